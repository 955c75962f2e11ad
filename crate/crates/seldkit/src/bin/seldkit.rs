//! Command-line front end: synthesize, augment, render, estimate, evaluate,
//! report, or run the whole pipeline.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/processing error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use seldkit::config::{dump_default_config, load_config, PipelineConfig, Representation};
use seldkit::io::read_metadata_csv;
use seldkit::metrics::evaluate;
use seldkit::pipeline::{
    format_scores, run_augment, run_estimate, run_evaluate, run_pipeline, run_render, run_report,
    run_synth,
};

#[derive(Parser)]
#[command(
    name = "seldkit",
    version,
    about = "Spatial sound event localization toolkit",
    arg_required_else_help = true
)]
struct Cli {
    /// Print the default configuration as TOML and exit.
    #[arg(long)]
    dump_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args)]
struct StageArgs {
    /// TOML configuration file; built-in defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory holding the stage layout.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the configured representation (foa | binaural | stereo).
    #[arg(long)]
    representation: Option<String>,
}

impl StageArgs {
    fn load(&self) -> Result<PipelineConfig, String> {
        let mut config = match &self.config {
            Some(path) => load_config(path).map_err(|e| e.to_string())?,
            None => PipelineConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(name) = &self.representation {
            config.representation = parse_representation(name)?;
        }
        Ok(config)
    }
}

fn parse_representation(name: &str) -> Result<Representation, String> {
    Representation::ALL
        .into_iter()
        .find(|r| r.name() == name)
        .ok_or_else(|| format!("unknown representation {name:?} (foa | binaural | stereo)"))
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    stage: StageArgs,
    /// Score this prediction CSV directly instead of the run layout.
    #[arg(long, requires = "reference")]
    pred: Option<PathBuf>,
    /// Reference CSV for `--pred`.
    #[arg(long = "ref", requires = "pred")]
    reference: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic FOA scene suite into `scenes/`.
    Synth(StageArgs),
    /// Expand every scene fourfold by channel rotation into `augmented/`.
    Augment(StageArgs),
    /// Render FOA scenes to the configured representation.
    Render(StageArgs),
    /// Run the representation's DOA estimator over rendered audio.
    Estimate(StageArgs),
    /// Score predictions against references.
    Evaluate(EvaluateArgs),
    /// Produce quadrant-confusion and polyphony analyses.
    Report(StageArgs),
    /// Full chain for all three representations plus a comparison table.
    Pipeline(StageArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    if cli.dump_config {
        print!("{}", dump_default_config());
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("error: missing command (see --help)");
        return ExitCode::from(1);
    };
    match execute(command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn execute(command: Command) -> Result<(), String> {
    match command {
        Command::Synth(args) => {
            let config = args.load()?;
            let files = run_synth(&config, &args.out).map_err(|e| e.to_string())?;
            println!(
                "synthesized {} scenes into {}",
                files.len() / 2,
                args.out.join("scenes").display()
            );
        }
        Command::Augment(args) => {
            let config = args.load()?;
            let files = run_augment(&config, &args.out).map_err(|e| e.to_string())?;
            println!(
                "wrote {} rotated copies into {}",
                files.len() / 2,
                args.out.join("augmented").display()
            );
        }
        Command::Render(args) => {
            let config = args.load()?;
            let repr = config.representation;
            let files = run_render(&config, &args.out, repr).map_err(|e| e.to_string())?;
            println!(
                "rendered {} files into {}",
                files.len(),
                args.out.join("rendered").join(repr.name()).display()
            );
        }
        Command::Estimate(args) => {
            let config = args.load()?;
            let repr = config.representation;
            let files = run_estimate(&config, &args.out, repr).map_err(|e| e.to_string())?;
            println!(
                "wrote {} prediction files into {}",
                files.len(),
                args.out.join("predictions").join(repr.name()).display()
            );
        }
        Command::Evaluate(args) => {
            let config = args.stage.load()?;
            if let (Some(pred), Some(reference)) = (&args.pred, &args.reference) {
                let predictions = read_metadata_csv(pred).map_err(|e| e.to_string())?;
                let references = read_metadata_csv(reference).map_err(|e| e.to_string())?;
                let (scores, _) =
                    evaluate(&predictions, &references, config.metrics.tolerance_deg);
                print!("{}", format_scores(&scores));
            } else {
                let repr = config.representation;
                let scores =
                    run_evaluate(&config, &args.stage.out, repr).map_err(|e| e.to_string())?;
                print!("{}", format_scores(&scores));
            }
        }
        Command::Report(args) => {
            let config = args.load()?;
            let repr = config.representation;
            run_report(&config, &args.out, repr).map_err(|e| e.to_string())?;
            println!(
                "wrote {} analysis into {}",
                repr.name(),
                args.out.join("reports").display()
            );
        }
        Command::Pipeline(args) => {
            let config = args.load()?;
            run_pipeline(&config, &args.out).map_err(|e| e.to_string())?;
            let table = std::fs::read_to_string(args.out.join("reports").join("comparison.txt"))
                .map_err(|e| e.to_string())?;
            print!("{table}");
        }
    }
    Ok(())
}
