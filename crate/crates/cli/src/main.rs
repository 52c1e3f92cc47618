use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use jcs_track::config::{load_config, LoadedConfig};
use jcs_track::experiments::{self, ExperimentId, ExperimentSpec};
use jcs_track::tracking::ProfileLabel;
use jcs_track::{ScenarioConfig, ScenarioVariant};

#[derive(Debug, Parser)]
#[command(
    name = "jcs-track",
    version,
    about = "Radio-based headset tracking experiments"
)]
struct Cli {
    /// More progress output on stderr (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment and write `<stem>.csv` plus `<stem>.json`.
    Run(RunArgs),
    /// List experiment ids.
    List,
    /// Parse and validate a configuration file.
    ValidateConfig { path: PathBuf },
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// Experiment id; see `list`.
    id: String,

    /// Key-value configuration file; defaults apply when absent.
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Trial count override.
    #[arg(long)]
    trials: Option<usize>,

    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,

    /// Motion profile; both when omitted.
    #[arg(long)]
    profile: Option<ProfileLabel>,

    #[arg(long, default_value = "S1")]
    scenario: ScenarioVariant,

    /// Force the SNR of the AP1-RIS1-HMD path, dB.
    #[arg(long)]
    snr_override_ris1: Option<f64>,

    /// Per-axis velocity stds in m/s as `x,y,z`, replacing simulation.
    #[arg(long, value_delimiter = ',')]
    sigma_v: Option<Vec<f64>>,
}

fn report_defaults(loaded: &LoadedConfig, verbose: u8) {
    if verbose > 0 {
        for d in &loaded.defaulted {
            eprintln!("{d}");
        }
    }
}

fn load(path: Option<&PathBuf>, verbose: u8) -> Result<ScenarioConfig> {
    match path {
        Some(p) => {
            let loaded = load_config(p).with_context(|| format!("loading {}", p.display()))?;
            report_defaults(&loaded, verbose);
            Ok(loaded.config)
        }
        None => Ok(ScenarioConfig::default()),
    }
}

fn run(args: RunArgs, verbose: u8) -> Result<()> {
    let id: ExperimentId = args.id.parse()?;
    let mut cfg = load(args.config.as_ref(), verbose)?;
    if let Some(snr) = args.snr_override_ris1 {
        cfg.ris1_snr_override = Some(snr);
    }
    cfg.validate()?;
    let sigma_v = match args.sigma_v.as_deref() {
        Some([x, y, z]) => Some([*x, *y, *z]),
        Some(_) => bail!("--sigma-v takes exactly three values"),
        None => None,
    };
    let spec = ExperimentSpec {
        trials: args.trials,
        seed: args.seed,
        variant: args.scenario,
        profile: args.profile,
        sigma_v,
        ..ExperimentSpec::new(id)
    };
    eprintln!(
        "running {id} ({} trials, seed {})",
        spec.trial_count(),
        spec.seed
    );
    let start = Instant::now();
    let result = experiments::run(&cfg, &spec).with_context(|| format!("experiment {id}"))?;
    let wall = start.elapsed().as_secs_f64();
    if verbose > 0 {
        eprintln!("finished in {wall:.2} s");
    }
    let paths = experiments::write_outputs(&result, &cfg, &spec, &args.out, wall)
        .with_context(|| format!("writing outputs to {}", args.out.display()))?;
    println!("{}", paths.csv.display());
    println!("{}", paths.json.display());
    for h in &result.headline {
        println!("{} = {}", h.name, h.value);
    }
    Ok(())
}

fn validate(path: &Path) -> Result<()> {
    let loaded = load_config(path).with_context(|| format!("validating {}", path.display()))?;
    println!("{}: ok", path.display());
    for d in &loaded.defaulted {
        println!("{d}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args, cli.verbose),
        Command::List => {
            for id in ExperimentId::ALL {
                println!("{:8} {}", id.name(), id.description());
            }
            Ok(())
        }
        Command::ValidateConfig { path } => validate(&path),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
