use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use kac_core::experiment::{emit_results, run_plan, ExperimentPlan, Mode, StudyReport};

/// Kac particle system experiments.
#[derive(Parser)]
#[command(name = "kac", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the particle system and export grid snapshots.
    Simulate(Common),
    /// Convergence study of the empirical measure against a reference run.
    Converge(Common),
    /// Cutoff ladder study with shared-noise couplings.
    Couple(Common),
    /// Built-in self-checks.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct Common {
    /// Flat TOML experiment plan.
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct ValidateArgs {
    /// Optional plan; only its seed and output path are used.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct Overrides {
    /// Replaces `base_seed` from the plan.
    #[arg(long)]
    seed: Option<u64>,
    /// Replaces `output_path` from the plan.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the replica farm (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

const EXIT_FAILED: u8 = 1;
const EXIT_ERROR: u8 = 2;

fn default_validate_plan() -> ExperimentPlan {
    ExperimentPlan::from_toml_str(
        r#"
mode = "validate"
kernel = "hard_sphere"
n_ladder = [2]
horizon_t = 0.0
replicas = 1
base_seed = 0
"#,
    )
    .expect("built-in plan is valid")
}

fn load(mode: Mode, config: Option<&PathBuf>, o: &Overrides) -> anyhow::Result<ExperimentPlan> {
    let mut plan = match config {
        Some(path) => ExperimentPlan::from_file(path).with_context(|| format!("loading {}", path.display()))?,
        None => default_validate_plan(),
    };
    if plan.mode != mode {
        bail!(
            "plan mode is {:?} but the `{}` subcommand was used",
            plan.mode,
            format!("{mode:?}").to_lowercase()
        );
    }
    if let Some(seed) = o.seed {
        plan.base_seed = seed;
    }
    if let Some(out) = &o.out {
        plan.output_path = out.clone();
    }
    plan.validate()?;
    Ok(plan)
}

fn configure_threads(threads: Option<usize>) -> anyhow::Result<()> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        bail!("--threads must be at least 1");
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("building the worker pool")?;
    #[cfg(not(feature = "parallel"))]
    if n > 1 {
        eprintln!("built without the `parallel` feature; running on one thread");
    }
    Ok(())
}

fn describe(report: &StudyReport) -> String {
    match report {
        StudyReport::Simulate(r) => format!("{} runs", r.runs.len()),
        StudyReport::Converge(r) => match (r.fitted_slope, &r.diagnostic) {
            (Some(s), _) => format!("slope {s:.4} ± {:.4}", r.slope_stderr.unwrap_or(f64::NAN)),
            (None, Some(d)) => d.clone(),
            (None, None) => "no slope".into(),
        },
        StudyReport::Couple(r) => r
            .studies
            .iter()
            .map(|(n, s)| match s.fit {
                Some(f) => format!("N={n}: slope {:.4}", f.slope),
                None => format!("N={n}: no slope"),
            })
            .collect::<Vec<_>>()
            .join(", "),
        StudyReport::Validate(r) => r
            .suites
            .iter()
            .map(|s| format!("{}={}", s.name, if s.passed { "pass" } else { "FAIL" }))
            .collect::<Vec<_>>()
            .join(" "),
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let (mode, config, overrides) = match &cli.command {
        Command::Simulate(c) => (Mode::Simulate, Some(&c.config), &c.overrides),
        Command::Converge(c) => (Mode::Converge, Some(&c.config), &c.overrides),
        Command::Couple(c) => (Mode::Couple, Some(&c.config), &c.overrides),
        Command::Validate(v) => (Mode::Validate, v.config.as_ref(), &v.overrides),
    };
    let plan = load(mode, config, overrides)?;
    configure_threads(overrides.threads)?;
    let report = run_plan(&plan)?;
    let files = emit_results(&report, &plan, &plan.output_path)?;
    let passed = report.passed(&plan);
    println!(
        "{:?}: {} ({})",
        plan.mode,
        if passed { "pass" } else { "FAIL" },
        describe(&report)
    );
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(passed)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
