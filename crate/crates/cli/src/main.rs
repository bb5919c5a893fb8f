use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;

use randcover_cli::{preset, run, CliError, ExperimentConfig, OutputDir, ShapeSpec, PRESET_NAMES};

#[derive(Parser)]
#[command(name = "randcover", version, about = "Random covering sets on the torus")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed overriding the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default: the config `out`, else `out/<command>`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Built-in experiment.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// JSON config or manifest file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence exponent of a shape sequence.
    S0 {
        /// Dimension for `--power-law`.
        #[arg(long)]
        d: Option<usize>,
        /// Comma-separated ascending exponents of a unit-scale power law.
        #[arg(long, value_delimiter = ',')]
        power_law: Option<Vec<f64>>,
    },
    /// Coverage statistics of the random cover.
    Cover,
    /// Randomized Cantor construction with verification.
    Cantor,
    /// Box-dimension fits, energies and covering-sum tails.
    Dim,
    /// Partial sums of the one-dimensional covering series.
    Shepp,
    /// Integral check of `|Tx|^-s` against the singular value function.
    Falconer,
    /// List the built-in presets.
    Presets,
}

fn load_config(global: &Global, command: &Command) -> Result<ExperimentConfig, CliError> {
    let mut config = match (&global.config, &global.preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => preset(name).ok_or_else(|| {
            CliError::Invalid(format!("unknown preset `{name}`; try `randcover presets`"))
        })?,
        (None, None) => match command {
            Command::S0 {
                power_law: Some(exps),
                d,
            } => {
                if d.is_some_and(|d| d != exps.len()) {
                    return Err(CliError::Invalid(format!(
                        "--d {} does not match {} exponent(s)",
                        d.unwrap_or_default(),
                        exps.len()
                    )));
                }
                ExperimentConfig {
                    name: "s0".into(),
                    d: exps.len(),
                    shape: ShapeSpec::power_law(vec![1.0; exps.len()], exps.clone()),
                    s: None,
                    s_policy: None,
                    levels: 1,
                    mode: Default::default(),
                    seed: global.seed.unwrap_or(0),
                    budgets: Default::default(),
                    out: None,
                    window: None,
                    checkpoints: None,
                    points: None,
                    energy_s: None,
                }
            }
            _ => return Err(CliError::Invalid("pass --preset or --config".into())),
        },
    };
    if let Some(seed) = global.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let name = match &cli.command {
        Command::Presets => {
            PRESET_NAMES.iter().for_each(|p| println!("{p}"));
            return ExitCode::SUCCESS;
        }
        Command::S0 { .. } => "s0",
        Command::Cover => "cover",
        Command::Cantor => "cantor",
        Command::Dim => "dim",
        Command::Shepp => "shepp",
        Command::Falconer => "falconer",
    };
    let result = load_config(&cli.global, &cli.command).and_then(|config| {
        let dir = cli
            .global
            .out
            .clone()
            .or_else(|| config.out.clone())
            .unwrap_or_else(|| PathBuf::from("out").join(name));
        let manifest = run(name, &config, OutputDir::new(Some(&dir))?)?;
        log::info!(
            "wrote {} file(s) to {} in {:.2}s",
            manifest.outputs.len() + 1,
            dir.display(),
            manifest.runtime_secs
        );
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
