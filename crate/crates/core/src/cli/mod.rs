//! Batch front end: `run` fits a dataset and writes CSV/JSON products,
//! `elicit` tabulates prior cluster counts.
//!
//! Exit codes are 0 on success, 2 for invalid input and 3 when sampling or
//! writing fails; failures print a JSON object on stderr. The thread pool
//! size follows `RAYON_NUM_THREADS`.

mod args;
mod dataset;
mod run;

use std::ffi::OsString;

use clap::Parser;
use serde_json::json;

pub use args::{merge_config_args, Cli, Command, ElicitArgs, RunArgs};
pub use dataset::{format_dataset, parse_dataset, parse_dataset_str};
pub use run::{elicit_command, run_command, Failure, RunManifest, Timings, RUN_OUTPUTS};

use crate::error::Error;

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Machine-readable description of a failure.
pub fn error_json(kind: &str, err: &Error, code: i32) -> serde_json::Value {
    let mut v = json!({ "error": kind, "message": err.to_string(), "exit_code": code });
    match err {
        Error::Parse { line, .. } => v["line"] = json!(line),
        Error::Chain { chain, .. } => v["chain"] = json!(chain),
        _ => {}
    }
    v
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => EXIT_VALIDATION,
            Failure::Runtime(_) => EXIT_RUNTIME,
        }
    }

    /// The object printed on stderr.
    pub fn to_json(&self) -> serde_json::Value {
        let kind = match self {
            Failure::Validation(_) => "validation",
            Failure::Runtime(_) => "runtime",
        };
        error_json(kind, self.error(), self.exit_code())
    }
}

fn report(failure: Failure) -> i32 {
    eprintln!("{}", failure.to_json());
    failure.exit_code()
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn main_with_args(args: Vec<OsString>) -> i32 {
    let args = match merge_config_args(args) {
        Ok(a) => a,
        Err(e) => return report(Failure::Validation(e)),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // help and version
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let err = Error::invalid(e.to_string().trim().to_string());
            return report(Failure::Validation(err));
        }
    };
    let outcome = match &cli.command {
        Command::Run(a) => run_command(a).map(|m| {
            if !a.quiet {
                eprintln!("wrote {} files to {}", m.outputs.len(), a.out.display());
            }
        }),
        Command::Elicit(a) => elicit_command(a).map(|summary| {
            if a.out.is_some() {
                println!("{summary}");
            }
        }),
    };
    match outcome {
        Ok(()) => 0,
        Err(f) => report(f),
    }
}
