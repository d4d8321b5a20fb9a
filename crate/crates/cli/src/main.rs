use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use hindpo_cli::{gradcheck_fixture, Pipeline, RunConfig};
use hindpo_core::dataforge::StageOrder;
use hindpo_core::hindpo::LossMode;

/// Actuality- and Finesse-weighted preference training for explanation generation.
#[derive(Debug, Parser)]
#[command(name = "hindpo", version)]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Curriculum stage order: algorithm1 (B_L, B_M, B_H) or section4 (B_H, B_M, B_L).
    #[arg(long, global = true)]
    order: Option<StageOrder>,
    /// Loss mode: dpo, dpo_act, dpo_fin or hin_dpo.
    #[arg(long, global = true)]
    mode: Option<LossMode>,
    /// Use the small-model learning rate (0.5).
    #[arg(long, global = true)]
    toy_preset: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score, rank and bucketize the corpus into curriculum files.
    Forge,
    /// Train one loss mode over the forged curriculum.
    Train,
    /// Score the base policy and every trained mode on the test split.
    Eval,
    /// Check the analytic loss gradient against finite differences.
    Gradcheck,
    /// forge, train all modes and eval on the bundled toy corpus.
    Demo,
}

impl Cli {
    fn run_config(&self) -> Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.out {
            config.paths.out_dir = out.clone();
        }
        if let Some(order) = self.order {
            config.order = order;
        }
        if let Some(mode) = self.mode {
            config.loss.mode = mode;
        }
        if self.toy_preset || matches!(self.command, Command::Demo) {
            config.toy_preset = true;
        }
        if matches!(self.command, Command::Demo) {
            config.paths.corpus = None;
        }
        config.validate()?;
        Ok(config)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let config = cli.run_config()?;
    match cli.command {
        Command::Forge => {
            let manifest = Pipeline::new(config)?.forge()?;
            println!("{}", manifest.display());
        }
        Command::Train => {
            let mode = config.loss.mode;
            let s = Pipeline::new(config)?.train(mode)?;
            println!(
                "{mode}: loss {:.6}, margin {:.6}, accuracy {:.4}",
                s.final_epoch.loss, s.final_epoch.mean_margin, s.final_epoch.accuracy
            );
            println!("{}", s.checkpoint.display());
        }
        Command::Eval => {
            print!("{}", Pipeline::new(config)?.eval()?.text);
        }
        Command::Gradcheck => {
            let report = gradcheck_fixture(config.loss.mode, config.seed, &config.loss)?;
            println!("{}", serde_json::to_string(&report)?);
            if !report.pass {
                eprintln!(
                    "gradient check failed: {:e} >= {:e}",
                    report.max_relative_error, report.tolerance
                );
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Demo => {
            let summary = Pipeline::new(config)?.demo()?;
            for r in &summary.runs {
                println!(
                    "{:<8} accuracy {:.4}  margin {:.4}",
                    r.mode.as_str(),
                    r.final_epoch.accuracy,
                    r.final_epoch.mean_margin
                );
            }
            print!("{}", summary.report.text);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
