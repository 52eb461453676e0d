//! Command line front end.

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::{Parser, Subcommand};

use crate::config::{Job, RunConfig};
use crate::manifest::{write_run, Manifest};
use crate::{jobs, pool};

#[derive(Parser, Debug)]
#[command(name = "speclab", version, about = "Numerical laboratory for Schrodinger evolution on R^m x T^n")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a job from a JSON run config.
    Run {
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the run config of a job without running it.
    Config {
        #[command(subcommand)]
        job: Job,
    },
    #[command(flatten)]
    Job(Job),
}

/// Runs a job and writes its outputs; returns the failure message, if any.
pub fn run_config(cfg: &RunConfig) -> Result<(jobs::Outcome, Option<String>)> {
    let threads = pool::thread_count()?;
    let start = Instant::now();
    let outcome = jobs::execute(&cfg.job)?;
    let wall = start.elapsed().as_secs_f64();
    if let Some(dir) = &cfg.job.common().out {
        std::fs::create_dir_all(dir)?;
        write_run(dir, &outcome, &Manifest::new(cfg, &outcome, threads, wall))?;
    }
    let failure = outcome.failure.clone();
    Ok((outcome, failure))
}

fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn dispatch(cli: Cli) -> Result<Option<String>> {
    let cfg = match cli.command {
        Command::Config { job } => {
            println!("{}", RunConfig::new(job).to_json());
            return Ok(None);
        }
        Command::Run { config, out } => {
            let mut cfg = RunConfig::load(&config)?;
            if out.is_some() {
                cfg.job.common_mut().out = out;
            }
            cfg
        }
        Command::Job(job) => RunConfig::new(job),
    };
    let (outcome, failure) = run_config(&cfg)?;
    for line in &outcome.report {
        println!("{line}");
    }
    Ok(failure)
}

pub fn main_from<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("error: {}", one_line(first.trim_start_matches("error:")));
            return ExitCode::from(2);
        }
    };
    match dispatch(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(msg)) => {
            eprintln!("error: {}", one_line(&msg));
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {}", one_line(&format!("{e:#}")));
            ExitCode::FAILURE
        }
    }
}
