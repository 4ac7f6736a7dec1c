//! Command-line front end: every subcommand loads the config (defaults,
//! then the optional TOML file, then `GRAPHFP_*` environment variables,
//! then flags), runs one library driver, prints a short summary, and exits
//! 0 on success, 2 on validation errors, 3 on numerical failures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use graphfp::experiment::{
    apply_env_overrides, pde_compare, run_stage, sweep, witten_report, DeltaSpec, EpsilonSpec,
    ExperimentConfig, Stage,
};

/// Clustering through continuous-time Markov dynamics on proximity graphs,
/// with a finite-difference continuum solver for cross-validation.
#[derive(Parser)]
#[command(name = "graphfp", version)]
struct Cli {
    /// TOML config file. Precedence: defaults < file < GRAPHFP_* env < flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Density: uniform, two_bump, deep_valley, three_bump, blue_sky,
    /// three_blobs, mesa.
    #[arg(long, global = true)]
    density: Option<String>,
    /// Sample size.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Master seed for sampling and k-means.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Proximity bandwidth: a number or "auto".
    #[arg(long, global = true)]
    epsilon: Option<String>,
    /// KDE bandwidth: a number or "default".
    #[arg(long, global = true)]
    delta: Option<String>,
    /// Weight-support cutoff in units of epsilon.
    #[arg(long, global = true)]
    cutoff: Option<f64>,
    /// Generator family: q_beta, q_rw_alpha, q_knf, q_quickshift,
    /// q_rw_limit.
    #[arg(long, global = true)]
    generator: Option<String>,
    /// Exponent for q_rw_alpha.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Interpolation weight for q_beta (also used by witten).
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Hill-climb radius for q_knf, in units of epsilon.
    #[arg(long, global = true)]
    knf_radius: Option<f64>,
    /// Rate-constant preset: section5, section4, unit, or a number.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Comma-separated evaluation times.
    #[arg(long, global = true, value_delimiter = ',')]
    t: Option<Vec<f64>>,
    /// Comma-separated cluster counts.
    #[arg(long, global = true, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    /// k-means restarts.
    #[arg(long, global = true)]
    restarts: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Cells per axis of the finite-difference grid.
    #[arg(long, global = true)]
    grid_m: Option<usize>,
    /// Worker threads for sweep cells.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) -> graphfp::Result<()> {
        if let Some(v) = &self.density {
            cfg.density = v.clone();
        }
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.epsilon {
            let spec = EpsilonSpec::from_token(v);
            spec.resolve()?;
            cfg.epsilon = spec;
        }
        if let Some(v) = &self.delta {
            let spec = DeltaSpec::from_token(v);
            spec.resolve()?;
            cfg.delta = spec;
        }
        if let Some(v) = self.cutoff {
            cfg.cutoff = Some(v);
        }
        if let Some(v) = &self.generator {
            cfg.generator = v.clone();
        }
        if let Some(v) = self.alpha {
            cfg.alpha = Some(v);
        }
        if let Some(v) = self.beta {
            cfg.beta = Some(v);
        }
        if let Some(v) = self.knf_radius {
            cfg.knf_radius = Some(v);
        }
        if let Some(v) = &self.preset {
            cfg.preset = v.clone();
        }
        if let Some(v) = &self.t {
            cfg.t = v.clone();
        }
        if let Some(v) = &self.k {
            cfg.k = v.clone();
        }
        if let Some(v) = self.restarts {
            cfg.restarts = v;
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        if let Some(v) = self.grid_m {
            cfg.grid_m = v;
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        Ok(())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Draw seeded samples from the density; writes samples.csv.
    Sample,
    /// Sample, then build the proximity graph; adds graph.csv (degrees).
    Graph,
    /// Evolve the canonical initial distribution to each time; adds
    /// trajectory CSVs.
    Evolve,
    /// Compute the Markov embedding at each time; adds embedding CSVs.
    Embed,
    /// Full pipeline: trajectories, embeddings, energy profiles, cluster
    /// labelings, and the run summary.
    Cluster,
    /// One full run per value of one parameter, plus a cross-cell summary.
    Sweep {
        /// Parameter to sweep: beta, alpha, epsilon, delta, t, k, seed.
        #[arg(long)]
        param: String,
        /// Comma-separated values of that parameter.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Evolve matched initial data through the graph chain and the 1-D
    /// finite-difference equation; writes overlays and a discrepancy report.
    PdeCompare,
    /// Spectral report of the symmetrized continuum generator (1-D factor
    /// spectra; product check for separable 2-D densities).
    Witten,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(cli: &Cli) -> graphfp::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let applied = apply_env_overrides(&mut cfg, std::env::vars())?;
    if !applied.is_empty() {
        eprintln!("environment overrides: {}", applied.join(", "));
    }
    cli.overrides.apply(&mut cfg)?;
    Ok(cfg)
}

fn run_to(cfg: &ExperimentConfig, stage: Stage) -> graphfp::Result<()> {
    let manifest = run_stage(cfg, stage)?;
    for row in &manifest.summary {
        println!(
            "t={} k={} energy_norm={:.4} ari={:.4}",
            row.t, row.k, row.energy_norm, row.ari
        );
    }
    println!(
        "wrote {} artifacts to {}",
        manifest.artifacts.len(),
        cfg.out
    );
    Ok(())
}

fn execute(cli: Cli) -> graphfp::Result<ExitCode> {
    let cfg = load_config(&cli)?;
    match &cli.command {
        Command::Sample => run_to(&cfg, Stage::Sample)?,
        Command::Graph => run_to(&cfg, Stage::Graph)?,
        Command::Evolve => run_to(&cfg, Stage::Evolve)?,
        Command::Embed => run_to(&cfg, Stage::Embed)?,
        Command::Cluster => run_to(&cfg, Stage::Cluster)?,
        Command::Sweep { param, values } => {
            let manifest = sweep(&cfg, param, values)?;
            let mut failures = 0usize;
            for cell in &manifest.cells {
                match &cell.error {
                    None => println!("{param}={} ok ({})", cell.value, cell.out),
                    Some(e) => {
                        failures += 1;
                        println!("{param}={} FAILED: {e}", cell.value);
                    }
                }
            }
            println!("summary: {}/summary.csv", cfg.out);
            if failures > 0 {
                eprintln!("{failures} of {} cells failed", manifest.cells.len());
                return Ok(ExitCode::from(2));
            }
        }
        Command::PdeCompare => {
            let report = pde_compare(&cfg)?;
            for snap in &report.snapshots {
                println!("t={} l1_discrepancy={:.6}", snap.t, snap.l1);
            }
            if let Some(steady) = &report.steady {
                println!(
                    "steady t={}: l1_exact={:.6} l1_kde={:.6} kde_beats_exact={}",
                    steady.t, steady.l1_exact, steady.l1_kde, steady.kde_beats_exact
                );
            }
            println!("report: {}/pde_report.json", cfg.out);
        }
        Command::Witten => {
            let report = witten_report(&cfg)?;
            for spec in &report.spectra {
                println!(
                    "{}: m={} lambda_1={:.3e} gap={:.6e}",
                    spec.name, spec.m, spec.lambda[0], spec.gap
                );
            }
            if let Some(product) = &report.product {
                println!(
                    "product: gap_x={:.6e} gap_y={:.6e} preferred={:?} kronecker_dev={:.3e}",
                    product.gap_x, product.gap_y, product.preferred, product.check.kronecker_max_dev
                );
            }
            println!("report: {}/witten_report.json", cfg.out);
        }
    }
    Ok(ExitCode::SUCCESS)
}
