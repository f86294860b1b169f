use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fracheat::scenario::{run, Experiment, ScenarioConfig};

#[derive(Parser)]
#[command(name = "fracheat", version, about = "Fractional heat equation experiments: kernels, semigroups, solvers, dichotomy classifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stable kernel values and envelopes on a (t, r) grid.
    Kernel(KernelArgs),
    /// Running semigroup lower-bound constants on the ball.
    Semigroup(SemigroupArgs),
    /// Solve the mild equation and record norms.
    Solve(SolveArgs),
    /// Classify a nonlinearity as local existence / non-existence.
    Classify(ClassifyArgs),
    /// Build stacked-indicator initial data and run the escalation experiment.
    Counterexample(CounterexampleArgs),
    /// Run the acceptance suite.
    Acceptance(AcceptanceArgs),
}

#[derive(Args)]
struct Common {
    /// Scenario file (flat key = value or JSON); flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<String>,
    /// Also write a gnuplot script next to the CSV.
    #[arg(long)]
    plot: bool,
}

#[derive(Args)]
struct KernelArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    d: Option<String>,
    /// Comma-separated times.
    #[arg(long = "t-grid")]
    t_grid: Option<String>,
    /// Comma-separated distances.
    #[arg(long = "r-grid")]
    r_grid: Option<String>,
}

#[derive(Args)]
struct SemigroupArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long = "R")]
    big_r: Option<String>,
    #[arg(long = "N")]
    n: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long = "t-min")]
    t_min: Option<String>,
    #[arg(long = "t-max")]
    t_max: Option<String>,
    #[arg(long = "t-count")]
    t_count: Option<String>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    common: Common,
    /// Growth function, e.g. powerlog:1,3,0.
    #[arg(long)]
    f: Option<String>,
    /// CSV table with columns s,f.
    #[arg(long = "f-table")]
    f_table: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    d: Option<String>,
    /// ball or whole_space.
    #[arg(long)]
    domain: Option<String>,
    /// Report format: json or csv.
    #[arg(long)]
    report: Option<String>,
    /// Exit with code 4 on an inconclusive verdict.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct CounterexampleArgs {
    #[command(flatten)]
    common: Common,
    /// 3.3, 4.1 or 5.
    #[arg(long)]
    theorem: Option<String>,
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    d: Option<String>,
    /// Comma-separated truncation levels.
    #[arg(long = "K-list")]
    k_list: Option<String>,
    #[arg(long = "R")]
    big_r: Option<String>,
    #[arg(long = "N")]
    n: Option<String>,
    #[arg(long = "T")]
    horizon: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    /// Support lower-bound constant; estimated from the discrete semigroup when absent.
    #[arg(long = "nu-hat")]
    nu_hat: Option<String>,
    /// Indicator lower-bound constant; estimated when absent.
    #[arg(long = "c-hat")]
    c_hat: Option<String>,
}

#[derive(Args)]
struct AcceptanceArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    seed: Option<String>,
}

fn build_config(experiment: Experiment, common: &Common, flags: &[(&str, &Option<String>)]) -> fracheat::Result<ScenarioConfig> {
    let mut cfg = match &common.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    cfg.experiment = Some(experiment);
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    if common.plot {
        cfg.plot = Some(true);
    }
    Ok(cfg)
}

fn config_for(command: &Command) -> fracheat::Result<ScenarioConfig> {
    match command {
        Command::Kernel(a) => build_config(
            Experiment::Kernel,
            &a.common,
            &[("alpha", &a.alpha), ("d", &a.d), ("t_grid", &a.t_grid), ("r_grid", &a.r_grid)],
        ),
        Command::Semigroup(a) => build_config(
            Experiment::Semigroup,
            &a.common,
            &[
                ("alpha", &a.alpha),
                ("R", &a.big_r),
                ("N", &a.n),
                ("r", &a.r),
                ("delta", &a.delta),
                ("t_min", &a.t_min),
                ("t_max", &a.t_max),
                ("t_count", &a.t_count),
            ],
        ),
        Command::Solve(a) => build_config(Experiment::Solve, &a.common, &[]),
        Command::Classify(a) => {
            let mut cfg = build_config(
                Experiment::Classify,
                &a.common,
                &[
                    ("f", &a.f),
                    ("f_table", &a.f_table),
                    ("q", &a.q),
                    ("alpha", &a.alpha),
                    ("d", &a.d),
                    ("domain", &a.domain),
                    ("report", &a.report),
                ],
            )?;
            if a.strict {
                cfg.strict = Some(true);
            }
            Ok(cfg)
        }
        Command::Counterexample(a) => build_config(
            Experiment::Counterexample,
            &a.common,
            &[
                ("theorem", &a.theorem),
                ("f", &a.f),
                ("q", &a.q),
                ("alpha", &a.alpha),
                ("d", &a.d),
                ("K_list", &a.k_list),
                ("R", &a.big_r),
                ("N", &a.n),
                ("T", &a.horizon),
                ("dt", &a.dt),
                ("nu_hat", &a.nu_hat),
                ("c_hat", &a.c_hat),
            ],
        ),
        Command::Acceptance(a) => build_config(Experiment::Acceptance, &a.common, &[("seed", &a.seed)]),
    }
}

/// `FRACHEAT_THREADS` caps the worker pool.
fn configure_threads() {
    if let Some(n) = std::env::var("FRACHEAT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|n| *n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let outcome = config_for(&cli.command).and_then(|cfg| run(&cfg));
    match outcome {
        Ok(report) => {
            for line in &report.summary {
                println!("{line}");
            }
            for path in &report.artifacts {
                eprintln!("wrote {}", path.display());
            }
            ExitCode::from(report.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
