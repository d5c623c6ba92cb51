//! `banditscape` command line: episode simulation, exact minimax values,
//! expansion and error-budget checks, potential probing, and regret sweeps.
//!
//! All subcommands are deterministic functions of their flags and config
//! files; identical invocations produce bitwise-identical output. Worker
//! count is controlled through `RAYON_NUM_THREADS`.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::json;

use banditscape::dp::{solve_dpp, DpConfig};
use banditscape::expansion::{
    budget_sum, error_budget, error_budget_quadrature, first_order_check, second_order_check,
    ExpansionReport, FunctionalSpec,
};
use banditscape::game::{play_episode, Signal, SubsetMix};
use banditscape::lab::{run_experiment, ExperimentConfig, M0Spec};
use banditscape::measure::DiscreteMeasure;
use banditscape::potential::HeatPotential;
use banditscape::strategy::StrategySpec;
use banditscape::Result;

#[derive(Parser)]
#[command(name = "banditscape", version, about = "Prediction-game experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Play episodes and emit one JSON trace per line.
    Simulate {
        /// JSON file with a SimulateConfig.
        #[arg(long)]
        config: PathBuf,
        /// Output file (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Exact minimax value of the T-round game from the centered belief.
    DpValue {
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        t: usize,
        /// Forecaster simplex resolution.
        #[arg(long, default_value_t = 100)]
        grid_b: usize,
        /// Adversary simplex resolution.
        #[arg(long, default_value_t = 20)]
        grid_a: usize,
        /// Local refinement passes around grid incumbents.
        #[arg(long, default_value_t = 2)]
        passes: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// First/second-order expansion battery plus the error-budget checks.
    ExpansionCheck {
        /// Prefix for per-check CSV files (summary JSON goes to stdout).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// CSV table of potential values, gradients and PDE residuals on random
    /// sample points.
    PotentialProbe {
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long, default_value_t = 17)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Monte-Carlo regret experiment over a horizon list.
    RegretSweep {
        /// JSON file with an ExperimentConfig.
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output path prefix.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Deserialize)]
struct SimulateConfig {
    k: usize,
    horizon: usize,
    #[serde(default)]
    m0: M0Spec,
    forecaster: StrategySpec,
    adversary: StrategySpec,
    n_episodes: usize,
    seed: u64,
    #[serde(default)]
    record_beliefs: bool,
}

fn emit(text: String, output: Option<PathBuf>) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn simulate(config: PathBuf, output: Option<PathBuf>) -> Result<()> {
    let cfg: SimulateConfig = serde_json::from_str(&std::fs::read_to_string(config)?)?;
    let m0 = cfg.m0.build(cfg.k)?;
    let forecaster = cfg.forecaster.build_forecaster(cfg.k)?;
    let adversary = cfg.adversary.build_adversary(cfg.k)?;
    let mut lines = String::new();
    for ep in 0..cfg.n_episodes {
        let ep_seed = cfg.seed ^ (ep as u64).wrapping_mul(0xd131_0ba6_a5b1_c2b3);
        let trace = play_episode(
            cfg.horizon,
            &m0,
            forecaster.as_ref(),
            adversary.as_ref(),
            ep_seed,
            cfg.record_beliefs,
        )?;
        lines.push_str(&serde_json::to_string(&trace.to_json())?);
        lines.push('\n');
    }
    emit(lines, output)
}

fn dp_value(
    k: usize,
    t: usize,
    grid_b: usize,
    grid_a: usize,
    passes: usize,
    output: Option<PathBuf>,
) -> Result<()> {
    let mut cfg = DpConfig::new(k, t, grid_b, grid_a);
    cfg.passes = passes;
    let m0 = DiscreteMeasure::dirac_zero(k, 1.0);
    let sol = solve_dpp(&cfg, &m0)?;
    let fmt_vec = |v: &[f64]| {
        let items: Vec<String> = v.iter().map(|x| format!("{x:.16e}")).collect();
        format!("[{}]", items.join(","))
    };
    let text = format!(
        "{{\"k\":{k},\"horizon\":{t},\"grid_b\":{grid_b},\"grid_a\":{grid_a},\"passes\":{passes},\"value\":{:.16e},\"gap\":{:.16e},\"b0\":{},\"a0\":{},\"nodes\":{}}}\n",
        sol.value,
        sol.gap,
        fmt_vec(&sol.b0),
        fmt_vec(&sol.a0),
        sol.nodes,
    );
    emit(text, output)
}

fn expansion_check(output: Option<PathBuf>) -> Result<()> {
    let horizons = [16usize, 64, 256, 1024, 4096];
    let m0 = DiscreteMeasure::dirac_zero(2, 1.0);
    let m_off = DiscreteMeasure::point_mass(vec![1, 0], 1.0);
    let a = SubsetMix::uniform(2);
    let y = Signal::plus(0);
    let linear = FunctionalSpec::Linear { w: vec![1.0, -0.5] };
    let quadratic = FunctionalSpec::QuadraticX { m: vec![vec![1.0, 0.0], vec![0.0, 1.0]] };
    let squared = FunctionalSpec::SquaredMean { g: vec![1.0, 1.0] };

    let checks: Vec<(&str, ExpansionReport)> = vec![
        ("first_linear", first_order_check(&linear, &a, &m_off, y, &horizons)?),
        ("first_quadratic", first_order_check(&quadratic, &a, &m0, y, &horizons)?),
        ("first_squared_mean", first_order_check(&squared, &a, &m_off, y, &horizons)?),
        ("second_linear", second_order_check(&linear, &a, &m_off, y, &horizons)?),
        ("second_quadratic", second_order_check(&quadratic, &a, &m0, y, &horizons)?),
        ("second_squared_mean", second_order_check(&squared, &a, &m0, y, &horizons)?),
    ];

    let mut summary = serde_json::Map::new();
    for (name, report) in &checks {
        if let Some(prefix) = &output {
            std::fs::write(format!("{}_{name}.csv", prefix.display()), report.to_csv())?;
        }
        summary.insert((*name).to_string(), report.summary_json());
    }

    let budgets: Vec<serde_json::Value> = [100usize, 1_000, 10_000]
        .iter()
        .map(|&t| -> Result<serde_json::Value> {
            let q_diff = (error_budget(t, t / 2, 1.0)? - error_budget_quadrature(t, t / 2, 1.0)?).abs();
            Ok(json!({ "horizon": t, "sum": budget_sum(t, 1.0)?, "quadrature_diff": q_diff }))
        })
        .collect::<Result<_>>()?;
    summary.insert("error_budget".to_string(), serde_json::Value::Array(budgets));

    println!("{}", serde_json::to_string_pretty(&serde_json::Value::Object(summary))?);
    Ok(())
}

fn potential_probe(
    k: usize,
    sigma: f64,
    samples: usize,
    seed: u64,
    output: Option<PathBuf>,
) -> Result<()> {
    let pot = HeatPotential::new(k, sigma);
    let uniform = SubsetMix::uniform(k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut csv = String::from("t,");
    for i in 1..=k {
        let _ = write!(csv, "x{i},");
    }
    csv.push_str("phi,");
    for i in 1..=k {
        let _ = write!(csv, "grad{i},");
    }
    csv.push_str("supersolution_residual,subsolution_residual\n");
    for _ in 0..samples {
        let t: f64 = rng.gen_range(0.0..0.95);
        let x: Vec<f64> = (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let phi = pot.phi(t, &x)?;
        let grad = pot.grad(t, &x)?;
        let sup = pot.supersolution_residual(t, &x)?;
        let sub = pot.subsolution_residual(t, &x, &uniform)?;
        let _ = write!(csv, "{t:.16e},");
        for v in &x {
            let _ = write!(csv, "{v:.16e},");
        }
        let _ = write!(csv, "{phi:.16e},");
        for v in &grad {
            let _ = write!(csv, "{v:.16e},");
        }
        let _ = writeln!(csv, "{sup:.16e},{sub:.16e}");
    }
    emit(csv, output)
}

fn regret_sweep(config: PathBuf, output: Option<PathBuf>) -> Result<()> {
    let mut cfg: ExperimentConfig = serde_json::from_str(&std::fs::read_to_string(config)?)?;
    if let Some(path) = output {
        cfg.output = Some(path.display().to_string());
    }
    let report = run_experiment(&cfg)?;
    if cfg.output.is_none() {
        print!("{}", report.to_csv());
    }
    println!("{}", serde_json::to_string_pretty(&report.to_json())?);
    Ok(())
}

fn run() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Simulate { config, output } => simulate(config, output),
        Cmd::DpValue { k, t, grid_b, grid_a, passes, output } => {
            dp_value(k, t, grid_b, grid_a, passes, output)
        }
        Cmd::ExpansionCheck { output } => expansion_check(output),
        Cmd::PotentialProbe { k, sigma, samples, seed, output } => {
            potential_probe(k, sigma, samples, seed, output)
        }
        Cmd::RegretSweep { config, output } => regret_sweep(config, output),
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
