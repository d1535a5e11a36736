mod args;
mod artifacts;
mod config;
mod manifest;
mod stages;

use std::process::ExitCode;

use clap::Parser;
use tempo_core::{Error, Result};

use args::{Cli, Command};
use config::{RunConfig, SEED_ENV};
use stages::Ctx;

/// 2 for problems with the user's configuration or inputs, 1 otherwise.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_)
        | Error::DegenerateInput(_)
        | Error::UndefinedMetric(_)
        | Error::EmptyEval
        | Error::SequenceTooLong { .. }
        | Error::SpanBounds { .. }
        | Error::CalendarMiss(_) => 1,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<()> {
    let env_seed = std::env::var(SEED_ENV).ok();
    let mut cfg = RunConfig::load(cli.global.config.as_deref(), env_seed.as_deref())?;
    if let Some(seed) = cli.global.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = cli.global.out_dir {
        cfg.out_dir = dir;
    }
    cfg.validate()?;
    let jobs = cli.global.jobs.max(1);
    let ctx = Ctx { cfg, force: cli.global.force };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} worker threads: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Synth(a) => stages::synth(&ctx, a),
        Command::Baseline(a) => stages::baseline(&ctx, a),
        Command::Annotate(a) => stages::annotate(&ctx, a, jobs),
        Command::Refine(a) => stages::refine(&ctx, a),
        Command::Calendar(a) => stages::calendar(&ctx, a),
        Command::Vocab(a) => stages::vocab(&ctx, a),
        Command::Examples(a) => stages::examples(&ctx, a),
        Command::Pretrain(a) => stages::pretrain_stage(&ctx, a),
        Command::Finetune(a) => stages::finetune(&ctx, a),
        Command::Eval(a) => stages::eval(&ctx, a),
        Command::Similarity(a) => stages::similarity(&ctx, a),
        Command::Timescope(a) => stages::timescope(&ctx, a),
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
