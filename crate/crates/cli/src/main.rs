//! `coda`: batch front end. Each command reads one CSV, writes its artifacts
//! to the output directory and finishes with a JSON manifest.

mod args;
mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use args::{Cli, Command, Common, DiagnoseMode};
use commands::Data;
use error::CliError;
use output::Run;

fn execute<P, F>(name: &str, common: &Common, params: &P, body: F) -> Result<(), CliError>
where
    P: Serialize + DeserializeOwned,
    F: FnOnce(&mut Run, &Data, &P, u64) -> Result<Value, CliError>,
{
    let (common, params) = config::merge(common, params)?;
    let rc = config::resolve(&common)?;
    if let Some(n) = rc.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let stem = match name {
        "diagnose" => {
            let v = serde_json::to_value(&params).expect("params serialize");
            let mode: DiagnoseMode = serde_json::from_value(v["mode"].clone()).unwrap_or(DiagnoseMode::Coherence);
            format!("diagnose-{}", serde_json::to_value(mode).expect("mode serializes").as_str().unwrap_or("coherence"))
        }
        _ => name.to_string(),
    };
    let mut run = Run::new(rc.out_dir.clone(), &stem)?;
    let data = commands::load(&mut run, &rc)?;
    let summary = body(&mut run, &data, &params, rc.seed)?;
    let config = json!({ "run": rc, "params": params });
    let seed = rc.seed;
    let stem = run.stem().to_string();
    let manifest = run.finish(name, config, seed)?;
    println!("{stem}: {}", serde_json::to_string(&summary).expect("summary serializes"));
    println!("manifest: {}", manifest.display());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Transform(r) => execute("transform", &r.common, &r.params, |run, d, p, _| commands::transform(run, d, p)),
        Command::Variance(r) => execute("variance", &r.common, &r.params, |run, d, p, _| commands::variance(run, d, p)),
        Command::Ordinate(r) => execute("ordinate", &r.common, &r.params, commands::ordinate),
        Command::Findalr(r) => execute("findalr", &r.common, &r.params, |run, d, _, _| commands::findalr(run, d)),
        Command::Step(r) => execute("step", &r.common, &r.params, |run, d, p, _| commands::step(run, d, p)),
        Command::Backstep(r) => execute("backstep", &r.common, &r.params, |run, d, p, _| commands::backstep(run, d, p)),
        Command::Theta(r) => execute("theta", &r.common, &r.params, commands::theta),
        Command::Cluster(r) => execute("cluster", &r.common, &r.params, commands::cluster),
        Command::Diagnose(r) => execute("diagnose", &r.common, &r.params, commands::diagnose),
        Command::Shrink(r) => execute("shrink", &r.common, &r.params, |run, d, _, _| commands::shrink(run, d)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                    ExitCode::from(2)
                } else {
                    ExitCode::SUCCESS
                };
            }
            let text = e.to_string();
            let first = text
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            let err = CliError::Usage(first.to_string());
            eprintln!("error[{}]: {err}", err.code());
            return ExitCode::from(2);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {msg}", e.code());
            ExitCode::from(1)
        }
    }
}
