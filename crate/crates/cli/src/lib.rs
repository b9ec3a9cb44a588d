//! Command-line front end for `nitk-core`.
//!
//! Every invocation writes one JSON line per result to stdout. Exit status is
//! 0 on success, 1 on a domain or input error and 2 on a usage error.

pub mod args;
pub mod commands;
pub mod error;
pub mod files;
pub mod record;
pub mod suite;

use std::ffi::OsString;
use std::time::Instant;

use clap::Parser;
use serde_json::json;

use args::{Cli, Command};
use commands::Outcome;
use error::{CliError, CliResult};
use record::{ErrorRecord, RunRecord};

fn name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Capacity(_) => "capacity",
        Command::Dueck(_) => "dueck",
        Command::Condition(_) => "condition",
        Command::Slope(_) => "slope",
        Command::Blowup(_) => "blowup",
        Command::Cutset(_) => "cutset",
        Command::IcCheck(_) => "ic-check",
        Command::IcRegion(_) => "ic-region",
        Command::Wringing(_) => "wringing",
        Command::EvalCode(_) => "eval-code",
        Command::SearchCode(_) => "search-code",
        Command::Lemma1(_) => "lemma1",
        Command::Binning(_) => "binning",
        Command::Mds(_) => "mds",
        Command::StackedSim(_) => "stacked-sim",
        Command::Suite(_) => "suite",
    }
}

fn dispatch(cmd: &Command) -> CliResult<Outcome> {
    match cmd {
        Command::Capacity(a) => commands::capacity(a),
        Command::Dueck(a) => commands::dueck(a),
        Command::Condition(a) => commands::condition(a),
        Command::Slope(a) => commands::slope(a),
        Command::Blowup(a) => commands::blowup(a),
        Command::Cutset(a) => commands::cutset(a),
        Command::IcCheck(a) => commands::ic_check(a),
        Command::IcRegion(a) => commands::ic_region(a),
        Command::Wringing(a) => commands::wringing_cmd(a),
        Command::EvalCode(a) => commands::eval_code(a),
        Command::SearchCode(a) => commands::search_code(a),
        Command::Lemma1(a) => commands::lemma1(a),
        Command::Binning(a) => commands::binning(a),
        Command::Mds(a) => commands::mds(a),
        Command::StackedSim(a) => commands::stacked(a),
        Command::Suite(a) => run_suite(&a.id),
    }
}

fn run_suite(id: &str) -> CliResult<Outcome> {
    let criteria = suite::criteria_for(id).ok_or_else(|| CliError::Invalid(format!("unknown suite id `{id}`")))?;
    let mut checks = Vec::new();
    for c in criteria {
        let check = suite::run_criterion(c);
        eprintln!("{}", suite::format_line(&check));
        println!("{}", json!({ "command": "suite", "check": check }));
        checks.push(check);
    }
    let failed: Vec<u8> = checks.iter().filter(|c| !c.passed).map(|c| c.criterion).collect();
    eprintln!("{} of {} passed", checks.len() - failed.len(), checks.len());
    if !failed.is_empty() {
        return Err(CliError::Invalid(format!("suite `{id}`: criteria {failed:?} failed")));
    }
    Outcome::new(json!({ "id": id }), json!({ "passed": checks.len(), "failed": 0 }))
}

/// Runs the CLI on `argv` and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let command = name(&cli.command);
    if let Some(t) = cli.threads {
        // a second call in the same process fails harmlessly; results do not depend on it
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let start = Instant::now();
    let result = dispatch(&cli.command).and_then(|out| {
        if let (Some(path), Some(table)) = (&cli.csv, &out.table) {
            table.write(path)?;
        }
        Ok(out)
    });
    match result {
        Ok(out) => {
            let rec = RunRecord {
                command: command.into(),
                inputs: out.inputs,
                seed: out.seed,
                parameters: out.parameters,
                outputs: out.outputs,
                wall_time_s: start.elapsed().as_secs_f64(),
            };
            println!("{}", serde_json::to_string(&rec).expect("record serializes"));
            0
        }
        Err(e) => {
            let rec = ErrorRecord { command: command.into(), error: e.to_string() };
            println!("{}", serde_json::to_string(&rec).expect("record serializes"));
            1
        }
    }
}
