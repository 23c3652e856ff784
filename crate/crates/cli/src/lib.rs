//! Command-line front end: CSV input, run configuration, and JSON or text
//! reports.

pub mod config;
pub mod csv_io;
pub mod error;
pub mod report;
pub mod run;
pub mod text;

pub use config::{Cli, OutputFormat, RunConfig, Subcommand};
pub use error::CliError;
pub use report::{render, ReportEnvelope};
pub use run::run;

use clap::Parser;

/// Parses `args`, runs, and returns `(exit code, stdout, stderr)`.
pub fn execute<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion) {
                return (0, e.to_string(), String::new());
            }
            let err = CliError::Usage(e.to_string().trim_end().to_string());
            return (err.exit_code(), String::new(), error_text(&err));
        }
    };
    let outcome = RunConfig::from_cli(cli).and_then(|cfg| {
        let envelope = run(&cfg)?;
        Ok(render(&envelope, cfg.output_format))
    });
    match outcome {
        Ok(out) => (0, out, String::new()),
        Err(err) => (err.exit_code(), String::new(), error_text(&err)),
    }
}

fn error_text(err: &CliError) -> String {
    let mut s = serde_json::to_string(&err.to_json()).expect("error serializes");
    s.push('\n');
    s
}
