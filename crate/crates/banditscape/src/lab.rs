//! Monte-Carlo regret experiments: bound comparisons against the Gaussian
//! references, scaling-law sweeps, and reproducible CSV/JSON artifacts.
//!
//! Long-horizon runs at `K = 2` use a projected episode runner that tracks
//! the belief through the difference coordinate `D = x¹ − x²` (a 1-D pmf)
//! together with the exact belief mean, instead of the full lattice measure.
//! Every strategy implemented for `K = 2` is a function of these two
//! summaries, so the projection is lossless up to a pruning floor on the
//! pmf; the runner consumes the same RNG streams as the general engine and
//! is cross-checked against it at short horizons.

use dashmap::DashMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::game::{
    mean_stderr, sample_index, signal, step_state, stream_rng, update_kernel, ActionMix,
    Signal, SubsetMix,
};
use crate::math::{ls_slope, simplex_grid};
use crate::measure::DiscreteMeasure;
use crate::potential::{grad2_closed, phi2_closed, HeatPotential};
use crate::strategy::StrategySpec;

/// Finite-horizon allowance on the asymptotic bound references.
pub const BOUND_EPS: f64 = 0.15;

/// Pmf weights below this floor are dropped (and the rest renormalized) by
/// the projected runner; the general engine keeps exact supports.
pub const PRUNE_FLOOR: f64 = 1e-12;

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

/// Initial belief specification.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum M0Spec {
    #[default]
    DiracZero,
    PointMass {
        z: Vec<i64>,
    },
}

impl M0Spec {
    pub fn build(&self, k: usize) -> Result<DiscreteMeasure> {
        match self {
            M0Spec::DiracZero => Ok(DiscreteMeasure::dirac_zero(k, 1.0)),
            M0Spec::PointMass { z } => {
                if z.len() != k {
                    return Err(Error::DimensionMismatch { expected: k, got: z.len() });
                }
                Ok(DiscreteMeasure::point_mass(z.clone(), 1.0))
            }
        }
    }
}

/// One experiment cell family: a strategy pair evaluated over a horizon list.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub k: usize,
    pub horizons: Vec<usize>,
    #[serde(default)]
    pub m0: M0Spec,
    pub forecaster: StrategySpec,
    pub adversary: StrategySpec,
    pub n_episodes: usize,
    pub seed: u64,
    #[serde(default)]
    pub output: Option<String>,
}

impl ExperimentConfig {
    fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidConfig("K must be at least 2".into()));
        }
        if self.horizons.is_empty() {
            return Err(Error::InvalidConfig("horizon list must be nonempty".into()));
        }
        if self.horizons.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("horizons must be strictly increasing".into()));
        }
        if self.n_episodes == 0 {
            return Err(Error::InvalidConfig("n_episodes must be positive".into()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// reports
// ---------------------------------------------------------------------------

/// Per-horizon Monte-Carlo estimate with its bound references.
#[derive(Debug, Clone, Serialize)]
pub struct BoundRow {
    pub horizon: usize,
    pub n_episodes: usize,
    pub mean_regret: f64,
    pub stderr: f64,
    /// `mean_regret / √T`.
    pub normalized: f64,
    /// `√(2 log K)`.
    pub upper_ref: f64,
    /// `∫ φ_{σ=½}(0, x/√T) dm₀`: the computable Gaussian lower reference.
    pub lower_ref: f64,
    /// `0.065√(log K) − 0.35`: the analytic floor, informative only for
    /// large `K`; reported, never asserted.
    pub analytic_floor: f64,
    pub upper_pass: bool,
    /// Present only against the balanced uniform adversary, where the lower
    /// bound applies.
    pub lower_pass: Option<bool>,
}

/// Experiment outcome: per-horizon rows plus the fitted log-log scaling
/// slope when at least three horizons with positive mean regret are present.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub config: ExperimentConfig,
    pub rows: Vec<BoundRow>,
    pub slope: Option<f64>,
}

impl BoundReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "k,horizon,n_episodes,seed,mean_regret,stderr,normalized,upper_ref,lower_ref,analytic_floor,upper_pass,lower_pass\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}\n",
                self.config.k,
                r.horizon,
                r.n_episodes,
                self.config.seed,
                r.mean_regret,
                r.stderr,
                r.normalized,
                r.upper_ref,
                r.lower_ref,
                r.analytic_floor,
                r.upper_pass,
                r.lower_pass.map_or("n/a".to_string(), |p| p.to_string()),
            ));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "config": serde_json::to_value(&self.config).expect("config serializes"),
            "rows": self.rows,
            "slope": self.slope,
            "bound_check": bound_check(self),
        })
    }
}

/// Aggregated pass/fail with margins (positive margin = satisfied).
#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub upper_pass: bool,
    /// `None` when the lower bound does not apply to the configured adversary.
    pub lower_pass: Option<bool>,
    /// Per-horizon `(upper margin, lower margin)`.
    pub margins: Vec<(f64, Option<f64>)>,
}

/// Evaluates the bound flags of a report: upper check against
/// `√(2 log K)·(1+ε) + 3·stderr/√T` for every adversary, lower check against
/// `φ_{σ=½}·(1−ε) − 3·stderr/√T` when the adversary is balanced uniform.
pub fn bound_check(report: &BoundReport) -> BoundCheck {
    let mut margins = Vec::with_capacity(report.rows.len());
    let mut upper_all = true;
    let mut lower_all: Option<bool> = None;
    for r in &report.rows {
        let se = r.stderr / (r.horizon as f64).sqrt();
        let upper_margin = r.upper_ref * (1.0 + BOUND_EPS) + 3.0 * se - r.normalized;
        upper_all &= r.upper_pass;
        let lower_margin = r.lower_pass.map(|p| {
            lower_all = Some(lower_all.unwrap_or(true) && p);
            r.normalized - (r.lower_ref * (1.0 - BOUND_EPS) - 3.0 * se)
        });
        margins.push((upper_margin, lower_margin));
    }
    BoundCheck { upper_pass: upper_all, lower_pass: lower_all, margins }
}

// ---------------------------------------------------------------------------
// fast K=2 runner
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum FastForecaster {
    Pde { sigma: f64, mean_evaluated: bool },
    Mw { eta: f64 },
    Uniform,
}

#[derive(Debug, Clone)]
enum FastAdversary {
    BalancedUniform,
    Vertex { subset: usize },
    GridBr { forecaster: Box<FastForecaster>, sigma: f64, grid: usize },
}

fn fast_forecaster(spec: &StrategySpec) -> Option<FastForecaster> {
    match spec {
        StrategySpec::PdeForecaster { sigma, mean_evaluated } if *sigma > 0.0 => {
            Some(FastForecaster::Pde { sigma: *sigma, mean_evaluated: *mean_evaluated })
        }
        StrategySpec::MwForecaster { eta } if *eta > 0.0 => Some(FastForecaster::Mw { eta: *eta }),
        StrategySpec::UniformForecaster => Some(FastForecaster::Uniform),
        _ => None,
    }
}

fn fast_adversary(spec: &StrategySpec) -> Option<FastAdversary> {
    match spec {
        StrategySpec::BalancedUniformAdversary => Some(FastAdversary::BalancedUniform),
        StrategySpec::VertexAdversary { subset } if *subset < 4 => {
            Some(FastAdversary::Vertex { subset: *subset })
        }
        StrategySpec::GridBestResponseAdversary { forecaster, sigma, grid, lookahead }
            if *lookahead == 1 && *sigma > 0.0 && *grid >= 1 =>
        {
            fast_forecaster(forecaster).map(|inner| FastAdversary::GridBr {
                forecaster: Box::new(inner),
                sigma: *sigma,
                grid: *grid,
            })
        }
        _ => None,
    }
}

/// Belief summary: exact mean plus the law of `D = x¹ − x²`.
#[derive(Debug, Clone)]
struct FastBelief {
    mean: [f64; 2],
    rep: DRep,
}

#[derive(Debug, Clone)]
enum DRep {
    /// `D = S − offset` with `S ~ Binomial(round, ½)`: exact under the
    /// balanced uniform adversary, whose four conditional kernels each add
    /// an independent ±½/0-½ step to `D`.
    Binomial { offset: i64 },
    /// Explicit pmf on `{d_min, …, d_min + w.len() − 1}`.
    Pmf { w: Vec<f64>, d_min: i64 },
}

impl FastBelief {
    fn from_measure(m0: &DiscreteMeasure, binomial: bool) -> Self {
        let mean_v = m0.mean();
        let mean = [mean_v[0], mean_v[1]];
        let atoms = m0.sorted_atoms();
        if binomial && atoms.len() == 1 {
            let d0 = atoms[0].0[0] - atoms[0].0[1];
            return FastBelief { mean, rep: DRep::Binomial { offset: -d0 } };
        }
        let d_min = atoms.iter().map(|(z, _)| z[0] - z[1]).min().unwrap();
        let d_max = atoms.iter().map(|(z, _)| z[0] - z[1]).max().unwrap();
        let mut w = vec![0.0; (d_max - d_min + 1) as usize];
        for (z, p) in &atoms {
            w[(z[0] - z[1] - d_min) as usize] += p;
        }
        FastBelief { mean, rep: DRep::Pmf { w, d_min } }
    }

    /// `E[f(D)]` over the difference law; binomial sums are truncated at
    /// eight standard deviations (tail mass below 1e-15).
    fn expect(&self, round: usize, lnfact: &[f64], f: impl Fn(f64) -> f64) -> f64 {
        match &self.rep {
            DRep::Pmf { w, d_min } => w
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(i, &p)| p * f((*d_min + i as i64) as f64))
                .sum(),
            DRep::Binomial { offset } => {
                let n = round;
                let (lo, hi) = binomial_range(n);
                let ln2 = std::f64::consts::LN_2;
                let mut acc = 0.0;
                for s in lo..=hi {
                    let lp = lnfact[n] - lnfact[s] - lnfact[n - s] - n as f64 * ln2;
                    acc += lp.exp() * f((s as i64 - offset) as f64);
                }
                acc
            }
        }
    }

    /// Applies the conditional update kernel for mix `a` and signal `y`.
    fn update(&mut self, a: &SubsetMix, y: Signal) {
        let Some(kernel) = update_kernel(a, y) else {
            // degenerate signal: the engine resets the belief to δ₀
            self.mean = [0.0, 0.0];
            self.rep = DRep::Pmf { w: vec![1.0], d_min: 0 };
            return;
        };
        for (shift, p) in &kernel {
            self.mean[0] += p * shift.0[0] as f64;
            self.mean[1] += p * shift.0[1] as f64;
        }
        match &mut self.rep {
            DRep::Binomial { offset } => {
                // balanced uniform only: down-steps are −1/+2, up-steps +1/−2
                if (y.index == 1) == y.rewarded {
                    *offset += 1;
                }
            }
            DRep::Pmf { w, d_min } => {
                let taps: Vec<(i64, f64)> =
                    kernel.iter().map(|(s, p)| (s.0[0] - s.0[1], *p)).collect();
                let lo = taps.iter().map(|t| t.0).min().unwrap();
                let hi = taps.iter().map(|t| t.0).max().unwrap();
                let mut out = vec![0.0; w.len() + (hi - lo) as usize];
                for (i, &p) in w.iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    for &(d, q) in &taps {
                        out[(i as i64 + d - lo) as usize] += p * q;
                    }
                }
                let mut new_min = *d_min + lo;
                for v in out.iter_mut() {
                    if *v < PRUNE_FLOOR {
                        *v = 0.0;
                    }
                }
                let total: f64 = out.iter().sum();
                for v in out.iter_mut() {
                    *v /= total;
                }
                while out.first() == Some(&0.0) {
                    out.remove(0);
                    new_min += 1;
                }
                while out.last() == Some(&0.0) {
                    out.pop();
                }
                *w = out;
                *d_min = new_min;
            }
        }
    }
}

fn binomial_range(n: usize) -> (usize, usize) {
    if n <= 128 {
        return (0, n);
    }
    let half = 4.0 * (n as f64).sqrt();
    let mid = n as f64 / 2.0;
    (
        (mid - half).floor().max(0.0) as usize,
        ((mid + half).ceil() as usize).min(n),
    )
}

/// Shared state of one fast experiment cell.
struct FastRunner {
    horizon: usize,
    forecaster: FastForecaster,
    adversary: FastAdversary,
    m0: DiscreteMeasure,
    lnfact: Vec<f64>,
    /// `(round, binomial offset) → first action probability` for the
    /// gradient forecaster under the balanced uniform adversary.
    pde_cache: DashMap<(usize, i64), f64>,
    grid_pts: Vec<Vec<f64>>,
}

impl FastRunner {
    fn new(
        horizon: usize,
        forecaster: FastForecaster,
        adversary: FastAdversary,
        m0: DiscreteMeasure,
    ) -> Self {
        let mut lnfact = vec![0.0; horizon + 1];
        for i in 1..=horizon {
            lnfact[i] = lnfact[i - 1] + (i as f64).ln();
        }
        let grid_pts = match &adversary {
            FastAdversary::GridBr { grid, .. } => simplex_grid(4, *grid),
            _ => Vec::new(),
        };
        FastRunner { horizon, forecaster, adversary, m0, lnfact, pde_cache: DashMap::new(), grid_pts }
    }

    fn action_probs(&self, spec: &FastForecaster, round: usize, belief: &FastBelief) -> Vec<f64> {
        let sqrt_t = (self.horizon as f64).sqrt();
        match spec {
            FastForecaster::Uniform => vec![0.5, 0.5],
            FastForecaster::Mw { eta } => {
                let top = belief.mean[0].max(belief.mean[1]);
                let w: Vec<f64> =
                    belief.mean.iter().map(|m| (eta * (m - top)).exp()).collect();
                let total = w[0] + w[1];
                vec![w[0] / total, w[1] / total]
            }
            FastForecaster::Pde { sigma, mean_evaluated } => {
                let t = round as f64 / self.horizon as f64;
                let b1 = if *mean_evaluated {
                    grad2_closed(t, belief.mean[0] / sqrt_t, belief.mean[1] / sqrt_t, *sigma)
                } else if let DRep::Binomial { offset } = belief.rep {
                    *self.pde_cache.entry((round, offset)).or_insert_with(|| {
                        belief.expect(round, &self.lnfact, |d| {
                            grad2_closed(t, d / sqrt_t, 0.0, *sigma)
                        })
                    })
                } else {
                    belief.expect(round, &self.lnfact, |d| grad2_closed(t, d / sqrt_t, 0.0, *sigma))
                };
                vec![b1, 1.0 - b1]
            }
        }
    }

    fn adversary_probs(&self, round: usize, belief: &FastBelief) -> Vec<f64> {
        match &self.adversary {
            FastAdversary::BalancedUniform => vec![0.25; 4],
            FastAdversary::Vertex { subset } => {
                let mut p = vec![0.0; 4];
                p[*subset] = 1.0;
                p
            }
            FastAdversary::GridBr { forecaster, sigma, .. } => {
                let sqrt_t = (self.horizon as f64).sqrt();
                let b = self.action_probs(forecaster, round, belief);
                let t_next = ((round + 1) as f64 / self.horizon as f64).min(1.0);
                // ∫ φ(t', (x+v)/√T) dm = (E[x²]+v²)/√T + E[f((D+vᴰ)/√T)]
                let eg: Vec<f64> = [-1i64, 0, 1]
                    .iter()
                    .map(|&dd| {
                        belief.expect(round, &self.lnfact, |d| {
                            let dr = (d + dd as f64) / sqrt_t;
                            if t_next >= 1.0 {
                                dr.max(0.0)
                            } else {
                                phi2_closed(t_next, dr, 0.0, *sigma)
                            }
                        })
                    })
                    .collect();
                // (Δdiff, Δx²) of the conditional shift for subset j under
                // action i, matching the engine's per-vertex contributions
                const SHIFTS: [[(i64, i64); 2]; 4] =
                    [[(0, 0), (0, 0)], [(1, -1), (1, 0)], [(-1, 1), (-1, 0)], [(0, 0), (0, 0)]];
                let mut g = [0.0; 4];
                for (j, gj) in g.iter_mut().enumerate() {
                    for (i, &bi) in b.iter().enumerate() {
                        if bi == 0.0 {
                            continue;
                        }
                        let (dd, s2) = SHIFTS[j][i];
                        *gj += bi
                            * ((belief.mean[1] + s2 as f64) / sqrt_t + eg[(dd + 1) as usize]);
                    }
                }
                let mut best = (f64::NEG_INFINITY, 0usize);
                for (idx, point) in self.grid_pts.iter().enumerate() {
                    let val: f64 = point.iter().zip(&g).map(|(p, gj)| p * gj).sum();
                    if val > best.0 {
                        best = (val, idx);
                    }
                }
                self.grid_pts[best.1].clone()
            }
        }
    }

    /// One episode, consuming the same RNG streams as the general engine.
    fn play(&self, seed: u64) -> Result<f64> {
        let mut nature = stream_rng(seed, 0);
        let mut forecaster_rng = stream_rng(seed, 1);
        let mut adversary_rng = stream_rng(seed, 2);

        let sorted = self.m0.sorted_atoms();
        let weights: Vec<f64> = sorted.iter().map(|(_, w)| *w).collect();
        let mut state = sorted[sample_index(&weights, &mut nature)].0.clone();

        let binomial = matches!(self.adversary, FastAdversary::BalancedUniform);
        let mut belief = FastBelief::from_measure(&self.m0, binomial);

        for n in 0..self.horizon {
            let b = ActionMix::new(self.action_probs(&self.forecaster, n, &belief))?;
            let a = SubsetMix::new(self.adversary_probs(n, &belief))?;
            let action = b.sample(&mut forecaster_rng);
            let subset = a.sample(&mut adversary_rng);
            let y = signal(action, subset);
            state = step_state(&state, action, subset);
            belief.update(&a, y);
        }
        Ok(*state.iter().max().unwrap() as f64)
    }
}

/// Monte-Carlo regret estimate through the projected runner; seeds match
/// [`crate::game::estimate_regret`] episode for episode.
fn fast_estimate(runner: &FastRunner, n_episodes: usize, seed: u64) -> Result<(f64, f64)> {
    let regrets: Vec<Result<f64>> = (0..n_episodes)
        .into_par_iter()
        .map(|ep| {
            let ep_seed = seed ^ (ep as u64).wrapping_mul(0xd131_0ba6_a5b1_c2b3);
            runner.play(ep_seed)
        })
        .collect();
    let values: Vec<f64> = regrets.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(mean_stderr(&values))
}

// ---------------------------------------------------------------------------
// experiment driver
// ---------------------------------------------------------------------------

fn estimate_cell(cfg: &ExperimentConfig, horizon: usize, m0: &DiscreteMeasure) -> Result<(f64, f64)> {
    if cfg.k == 2 {
        if let (Some(f), Some(a)) = (fast_forecaster(&cfg.forecaster), fast_adversary(&cfg.adversary))
        {
            let runner = FastRunner::new(horizon, f, a, m0.clone());
            return fast_estimate(&runner, cfg.n_episodes, cfg.seed);
        }
    }
    // general path: builders reject invalid strategy combinations
    let forecaster = cfg.forecaster.build_forecaster(cfg.k)?;
    let adversary = cfg.adversary.build_adversary(cfg.k)?;
    crate::game::estimate_regret(horizon, m0, forecaster.as_ref(), adversary.as_ref(), cfg.n_episodes, cfg.seed)
}

/// Runs every horizon of the configured cell and assembles the bound report;
/// writes `<output>.csv` and `<output>.json` when an output path is set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<BoundReport> {
    cfg.validate()?;
    let m0 = cfg.m0.build(cfg.k)?;
    let lower_applies = matches!(cfg.adversary, StrategySpec::BalancedUniformAdversary);
    let upper_ref = (2.0 * (cfg.k as f64).ln()).sqrt();
    let analytic_floor = 0.065 * (cfg.k as f64).ln().sqrt() - 0.35;
    let pot_half = HeatPotential::new(cfg.k, 0.5);

    let mut rows = Vec::with_capacity(cfg.horizons.len());
    for &horizon in &cfg.horizons {
        let (mean_regret, stderr) = estimate_cell(cfg, horizon, &m0)?;
        let sqrt_t = (horizon as f64).sqrt();
        let normalized = mean_regret / sqrt_t;
        let se_norm = stderr / sqrt_t;
        let lower_ref = m0.integrate(|x| {
            let scaled: Vec<f64> = x.iter().map(|v| v / sqrt_t).collect();
            pot_half.phi(0.0, &scaled).expect("t = 0 is interior")
        });
        let upper_pass = normalized <= upper_ref * (1.0 + BOUND_EPS) + 3.0 * se_norm;
        let lower_pass = lower_applies
            .then(|| normalized >= lower_ref * (1.0 - BOUND_EPS) - 3.0 * se_norm);
        rows.push(BoundRow {
            horizon,
            n_episodes: cfg.n_episodes,
            mean_regret,
            stderr,
            normalized,
            upper_ref,
            lower_ref,
            analytic_floor,
            upper_pass,
            lower_pass,
        });
    }

    let slope = if rows.len() >= 3 && rows.iter().all(|r| r.mean_regret > 0.0) {
        let xs: Vec<f64> = rows.iter().map(|r| (r.horizon as f64).ln()).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.mean_regret.ln()).collect();
        Some(ls_slope(&xs, &ys))
    } else {
        None
    };

    let report = BoundReport { config: cfg.clone(), rows, slope };
    if let Some(path) = &cfg.output {
        std::fs::write(format!("{path}.csv"), report.to_csv())?;
        std::fs::write(
            format!("{path}.json"),
            serde_json::to_string_pretty(&report.to_json())? + "\n",
        )?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::estimate_regret;
    use approx::assert_abs_diff_eq;

    fn pde_spec() -> StrategySpec {
        StrategySpec::PdeForecaster { sigma: 1.0, mean_evaluated: false }
    }

    fn config(horizons: Vec<usize>, adversary: StrategySpec, n: usize) -> ExperimentConfig {
        ExperimentConfig {
            k: 2,
            horizons,
            m0: M0Spec::DiracZero,
            forecaster: pde_spec(),
            adversary,
            n_episodes: n,
            seed: 7,
            output: None,
        }
    }

    #[test]
    fn fast_runner_matches_engine_balanced_uniform() {
        let cfg = config(vec![16], StrategySpec::BalancedUniformAdversary, 300);
        let m0 = cfg.m0.build(2).unwrap();
        let fast = estimate_cell(&cfg, 16, &m0).unwrap();
        let forecaster = cfg.forecaster.build_forecaster(2).unwrap();
        let adversary = cfg.adversary.build_adversary(2).unwrap();
        let engine =
            estimate_regret(16, &m0, forecaster.as_ref(), adversary.as_ref(), 300, cfg.seed)
                .unwrap();
        // identical RNG streams; the only difference is closed-form versus
        // quadrature gradients (≈1e-10), far from any sampling threshold
        assert_abs_diff_eq!(fast.0, engine.0, epsilon = 1e-9);
        assert_abs_diff_eq!(fast.1, engine.1, epsilon = 1e-9);
    }

    #[test]
    fn fast_runner_matches_engine_grid_best_response() {
        let adversary = StrategySpec::GridBestResponseAdversary {
            forecaster: Box::new(pde_spec()),
            sigma: 1.0,
            grid: 4,
            lookahead: 1,
        };
        let cfg = config(vec![12], adversary, 80);
        let m0 = cfg.m0.build(2).unwrap();
        let fast = estimate_cell(&cfg, 12, &m0).unwrap();
        let forecaster = cfg.forecaster.build_forecaster(2).unwrap();
        let engine_adv = cfg.adversary.build_adversary(2).unwrap();
        let engine =
            estimate_regret(12, &m0, forecaster.as_ref(), engine_adv.as_ref(), 80, cfg.seed)
                .unwrap();
        assert_abs_diff_eq!(fast.0, engine.0, epsilon = 1e-9);
    }

    #[test]
    fn fast_runner_matches_engine_mw_vertex() {
        let cfg = ExperimentConfig {
            forecaster: StrategySpec::MwForecaster { eta: 0.5 },
            m0: M0Spec::PointMass { z: vec![1, -1] },
            ..config(vec![16], StrategySpec::VertexAdversary { subset: 0b01 }, 200)
        };
        let m0 = cfg.m0.build(2).unwrap();
        let fast = estimate_cell(&cfg, 16, &m0).unwrap();
        let forecaster = cfg.forecaster.build_forecaster(2).unwrap();
        let adversary = cfg.adversary.build_adversary(2).unwrap();
        let engine =
            estimate_regret(16, &m0, forecaster.as_ref(), adversary.as_ref(), 200, cfg.seed)
                .unwrap();
        assert_abs_diff_eq!(fast.0, engine.0, epsilon = 1e-9);
    }

    #[test]
    fn full_subset_adversary_gives_zero_regret() {
        // δ_{{1,2}}: the forecaster is always rewarded and the state never
        // moves, so realized regret is identically zero
        let cfg = config(vec![64], StrategySpec::VertexAdversary { subset: 0b11 }, 50);
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.rows[0].mean_regret, 0.0);
        assert_eq!(report.rows[0].stderr, 0.0);
        assert!(report.rows[0].upper_pass);
    }

    #[test]
    fn doubling_episodes_halves_variance() {
        let small = run_experiment(&config(vec![64], StrategySpec::BalancedUniformAdversary, 2000))
            .unwrap();
        let big = run_experiment(&config(vec![64], StrategySpec::BalancedUniformAdversary, 4000))
            .unwrap();
        let ratio = small.rows[0].stderr.powi(2) / big.rows[0].stderr.powi(2);
        assert!((ratio - 2.0).abs() < 0.4, "variance ratio {ratio}");
    }

    #[test]
    fn bounds_hold_at_moderate_horizon() {
        let report =
            run_experiment(&config(vec![256], StrategySpec::BalancedUniformAdversary, 2000))
                .unwrap();
        let check = bound_check(&report);
        assert!(check.upper_pass);
        assert_eq!(check.lower_pass, Some(true));
        let row = &report.rows[0];
        assert_abs_diff_eq!(row.upper_ref, 1.1774100225154747, epsilon = 1e-12);
        assert_abs_diff_eq!(row.lower_ref, 0.28209479177387814, epsilon = 1e-6);
        assert_abs_diff_eq!(row.analytic_floor, -0.29588395, epsilon = 1e-6);
    }

    #[test]
    fn permutation_of_initial_state_is_symmetric() {
        let base = config(vec![64], StrategySpec::BalancedUniformAdversary, 3000);
        let left = ExperimentConfig { m0: M0Spec::PointMass { z: vec![1, 0] }, ..base.clone() };
        let right = ExperimentConfig { m0: M0Spec::PointMass { z: vec![0, 1] }, ..base };
        let rl = run_experiment(&left).unwrap();
        let rr = run_experiment(&right).unwrap();
        let joint = (rl.rows[0].stderr.powi(2) + rr.rows[0].stderr.powi(2)).sqrt();
        assert!(
            (rl.rows[0].mean_regret - rr.rows[0].mean_regret).abs() <= 3.0 * joint,
            "asymmetry {} vs {}",
            rl.rows[0].mean_regret,
            rr.rows[0].mean_regret
        );
    }

    #[test]
    fn invalid_strategy_combination_errors() {
        let cfg = ExperimentConfig {
            forecaster: StrategySpec::BalancedUniformAdversary,
            ..config(vec![8], StrategySpec::BalancedUniformAdversary, 10)
        };
        assert!(matches!(run_experiment(&cfg), Err(Error::InvalidConfig(_))));
        let cfg = config(vec![8, 8], StrategySpec::BalancedUniformAdversary, 10);
        assert!(run_experiment(&cfg).is_err());
    }

    #[test]
    fn reports_are_bitwise_reproducible() {
        let cfg = config(vec![32, 64], StrategySpec::BalancedUniformAdversary, 200);
        let one = run_experiment(&cfg).unwrap();
        let two = run_experiment(&cfg).unwrap();
        assert_eq!(one.to_csv(), two.to_csv());
        assert_eq!(
            serde_json::to_string(&one.to_json()).unwrap(),
            serde_json::to_string(&two.to_json()).unwrap()
        );
    }

    #[test]
    fn config_serde_round_trip() {
        let cfg = config(vec![256, 1024], StrategySpec::BalancedUniformAdversary, 500);
        let text = serde_json::to_string(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.horizons, vec![256, 1024]);
        assert!(matches!(back.m0, M0Spec::DiracZero));
        assert!(matches!(back.adversary, StrategySpec::BalancedUniformAdversary));
    }

    #[test]
    fn scaling_slope_near_half() {
        let cfg = config(vec![64, 256, 1024], StrategySpec::BalancedUniformAdversary, 2000);
        let report = run_experiment(&cfg).unwrap();
        let slope = report.slope.unwrap();
        assert!((slope - 0.5).abs() < 0.1, "slope {slope}");
    }
}
