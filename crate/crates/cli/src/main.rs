mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hypctrl::scenario::{preset, presets, ScenarioConfig};
use hypctrl::Error;

use output::Outcome;

#[derive(Parser)]
#[command(name = "hypctrl", version, about = "Simulate, control and observe 1-D hyperbolic systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Forward solve from the configured initial data.
    Simulate(RunArgs),
    /// Synthesize controls steering the initial data to the target.
    Control(RunArgs),
    /// Reconstruct the initial data from boundary measurements.
    Observe(ObserveArgs),
    /// Grid refinement study of the forward solve.
    Converge(RunArgs),
    /// Conserved-functional and duality obstructions.
    Obstruct(ObstructArgs),
    /// List the built-in scenarios.
    Presets,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Scenario JSON file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario name.
    #[arg(long)]
    preset: Option<String>,
    /// Exit with 4 when the run's acceptance check fails.
    #[arg(long)]
    check: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the number of spatial cells.
    #[arg(long)]
    nx: Option<usize>,
    /// Override the horizon.
    #[arg(long = "T")]
    horizon: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    /// Canal: A and V at x = 0.
    AreaVelocity,
    /// Canal: S and Q at x = 0.
    EnergyDischarge,
    /// Wave: u and u_x at x = 0.
    U0Ux0,
    /// Wave: u at x = 0, u_x at x = L.
    U0UxL,
    /// Wave: u and u_x at x = L.
    ULUxL,
    /// Wave: u at x = L, u_x at x = 0.
    ULUx0,
}

#[derive(Args, Clone)]
struct ObserveArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Which boundary quantities are measured.
    #[arg(long, value_enum)]
    variant: Option<Variant>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ObstructionKind {
    Loop,
    Wave,
}

#[derive(Args, Clone)]
struct ObstructArgs {
    #[arg(value_enum)]
    kind: ObstructionKind,
    /// Loop data `(α λ₂, λ₁)`.
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    /// Eigenmode index for the wave.
    #[arg(long, default_value_t = 1)]
    n: u32,
    /// Random controls tried on the loop.
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    nx: usize,
    #[arg(long = "T", default_value_t = 3.0)]
    horizon: f64,
    #[arg(long)]
    check: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn load(args: &RunArgs) -> Result<ScenarioConfig, Error> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
            ScenarioConfig::from_json(&text)?
        }
        (None, Some(name)) => preset(name)?,
        (None, None) => return Err(Error::InvalidInput("pass --config or --preset".into())),
    };
    if let Some(nx) = args.nx {
        cfg.grid.nx = nx;
    }
    if let Some(t) = args.horizon {
        cfg.grid.horizon = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_scenario(
    args: &RunArgs,
    command: &str,
    f: impl FnOnce(&ScenarioConfig) -> Result<Outcome, Error>,
) -> ExitCode {
    let outcome = load(args).and_then(|cfg| f(&cfg));
    output::finish(&args.out, command, outcome, args.check)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate(a) => run_scenario(&a, "simulate", commands::simulate),
        Command::Control(a) => run_scenario(&a, "control", commands::control),
        Command::Converge(a) => run_scenario(&a, "converge", commands::converge),
        Command::Observe(a) => run_scenario(&a.run, "observe", |cfg| commands::observe(cfg, a.variant)),
        Command::Obstruct(a) => {
            let outcome = match a.kind {
                ObstructionKind::Loop => commands::obstruct_loop(a.alpha, a.nx, a.trials, a.seed),
                ObstructionKind::Wave => commands::obstruct_wave(a.n, a.nx, a.horizon),
            };
            output::finish(&a.out, "obstruct", outcome, a.check)
        }
        Command::Presets => {
            for p in presets() {
                println!("{:<20} {}", p.name, p.description);
            }
            ExitCode::SUCCESS
        }
    }
}
