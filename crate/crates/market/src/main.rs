use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use dataspace_core::expansion::{check, Form};
use dataspace_market::scenario::{run_scenario, ScenarioConfig, ScenarioKind, Script};

#[derive(Parser)]
#[command(name = "market-sim", about = "Scripted market simulations on the dataspace runtime")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario script and write its trace.
    Run {
        #[arg(long, default_value = "simple")]
        scenario: ScenarioKind,
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value_t = 1000)]
        open_ms: u64,
        #[arg(long, default_value_t = 500)]
        closed_ms: u64,
        /// How long a named broker collects prices before choosing.
        #[arg(long, default_value_t = 100)]
        wait_period: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare traces of a derived form and its hand expansion.
    ExpandCheck {
        #[arg(long)]
        form: Form,
        /// Also write each trace pair here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { scenario, script, trace, open_ms, closed_ms, wait_period, seed } => {
            let src = fs::read_to_string(&script).with_context(|| format!("reading {}", script.display()))?;
            let parsed = Script::parse(&src).with_context(|| format!("in {}", script.display()))?;
            let config = ScenarioConfig {
                kind: scenario,
                open_ms,
                closed_ms,
                wait_ms: i64::try_from(wait_period).context("wait period too large")?,
                seed,
                ..ScenarioConfig::default()
            };
            let result = run_scenario(&config, &parsed);
            fs::write(&trace, result.trace_text()).with_context(|| format!("writing {}", trace.display()))?;
            for (reference, o) in &result.outcomes {
                let answer = o.answer.map_or("pending".to_owned(), |a| a.to_string());
                println!("order {reference} {}: {answer}", o.buyer);
            }
            for (account, n) in &result.balances {
                println!("balance {account}: {n}");
            }
            for f in &result.failures {
                eprintln!("FAIL {}: {f}", script.display());
            }
            Ok(result.passed())
        }
        Command::ExpandCheck { form, out } => {
            let comparisons = check(form)?;
            if let Some(dir) = &out {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            let mut ok = true;
            for c in &comparisons {
                if let Some(dir) = &out {
                    let (derived, expanded) = c.files();
                    fs::write(dir.join(format!("{form}-{}-derived.jsonl", c.schedule)), derived)?;
                    fs::write(dir.join(format!("{form}-{}-expanded.jsonl", c.schedule)), expanded)?;
                }
                match c.first_difference() {
                    None => println!("{form} {}: identical ({} turns)", c.schedule, c.derived.len()),
                    Some(line) => {
                        ok = false;
                        println!("{form} {}: traces differ at line {}", c.schedule, line + 1);
                    }
                }
            }
            Ok(ok)
        }
    }
}
