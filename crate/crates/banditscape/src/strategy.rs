//! Playable strategies: the gradient-of-the-potential forecaster, a
//! multiplicative-weights baseline, balanced adversaries, and a grid-search
//! best-response adversary, plus the drift vectors `V_{a,±i}` that the
//! balancing condition annihilates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{
    hat_a, subset_complement, subset_contains, subset_vector, update_shift, ActionMix, Adversary,
    Forecaster, Signal, SubsetMix,
};
use crate::math::simplex_grid;
use crate::measure::DiscreteMeasure;
use crate::potential::{balance_spread, HeatPotential};

/// `V_{a,+i} = Σ_{j∋i} (a(j)/â(+i)) e_{j^c}` and
/// `V_{a,−i} = Σ_{j∌i} (a(j)/â(−i)) e_j`: the conditional expected increase of
/// the state given the signal.
pub fn v_vector(a: &SubsetMix, y: Signal) -> Result<Vec<f64>> {
    let k = a.k();
    let hat = hat_a(a, y);
    if hat <= 0.0 {
        return Err(Error::DegenerateSignal);
    }
    let mut v = vec![0.0; k];
    for (j, &p) in a.probs().iter().enumerate() {
        if p == 0.0 || subset_contains(j, y.index) != y.rewarded {
            continue;
        }
        let set = if y.rewarded { subset_complement(j, k) } else { j };
        for (c, s) in subset_vector(set, k).iter().enumerate() {
            v[c] += p / hat * *s as f64;
        }
    }
    Ok(v)
}

/// `a` is balanced when `â(i) = Σ_{j∋i} a(j)` does not depend on `i`.
pub fn is_balanced(a: &SubsetMix) -> bool {
    balance_spread(a) <= 1e-12
}

/// Forecaster playing the spatial gradient of the heat potential evaluated on
/// the `1/√T`-rescaled belief.
///
/// The potential is linear in the measure, so its measure derivative is the
/// x-dependent field `∇φ`; pairing it with the belief gives the default
/// `β(i) = ∫ ∂_{x_i}φ(t_n, x) dm̃(x)`, which is exactly the convex
/// combination the first-order cancellation needs. The variant that instead
/// evaluates `∇φ` at the belief mean is available behind a flag.
pub struct PdeForecaster {
    pot: HeatPotential,
    mean_evaluated: bool,
}

impl PdeForecaster {
    pub fn new(k: usize, sigma: f64) -> Self {
        PdeForecaster { pot: HeatPotential::new(k, sigma), mean_evaluated: false }
    }

    pub fn mean_evaluated(k: usize, sigma: f64) -> Self {
        PdeForecaster { pot: HeatPotential::new(k, sigma), mean_evaluated: true }
    }
}

impl Forecaster for PdeForecaster {
    fn action_mix(&self, round: usize, belief: &DiscreteMeasure, horizon: usize) -> ActionMix {
        let k = belief.dim();
        let t = round as f64 / horizon as f64;
        let sqrt_t = (horizon as f64).sqrt();
        let g = if self.mean_evaluated {
            let x: Vec<f64> = belief.mean().iter().map(|v| v / sqrt_t).collect();
            self.pot.grad(t, &x).expect("t_n < 1 inside an episode")
        } else {
            let mut g = vec![0.0; k];
            for (z, w) in belief.atoms() {
                let x: Vec<f64> =
                    z.iter().map(|&c| c as f64 * belief.scale() / sqrt_t).collect();
                let gx = self.pot.grad(t, &x).expect("t_n < 1 inside an episode");
                for (gi, v) in g.iter_mut().zip(gx) {
                    *gi += w * v;
                }
            }
            g
        };
        // the gradient is a convex combination of simplex vectors; renormalize
        // away quadrature round-off
        let total: f64 = g.iter().sum();
        ActionMix::new(g.into_iter().map(|v| v / total).collect()).expect("simplex by construction")
    }
}

/// Multiplicative-weights baseline on the belief-mean gains, the only
/// information-consistent surrogate when realized gains are unobserved:
/// `b(i) ∝ exp(η·E_m[X^i])`.
pub struct MwForecaster {
    pub eta: f64,
}

impl Forecaster for MwForecaster {
    fn action_mix(&self, _round: usize, belief: &DiscreteMeasure, _horizon: usize) -> ActionMix {
        let mean = belief.mean();
        let top = mean.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = mean.iter().map(|m| (self.eta * (m - top)).exp()).collect();
        let total: f64 = w.iter().sum();
        ActionMix::new(w.into_iter().map(|v| v / total).collect()).expect("softmax is a simplex")
    }
}

/// Forecaster ignoring all information.
pub struct UniformForecaster;

impl Forecaster for UniformForecaster {
    fn action_mix(&self, _round: usize, belief: &DiscreteMeasure, _horizon: usize) -> ActionMix {
        ActionMix::uniform(belief.dim())
    }
}

/// The uniform mix over all `2^K` subsets; balanced with `â(i) = ½`.
pub fn balanced_uniform_adversary(k: usize) -> SubsetMix {
    SubsetMix::uniform(k)
}

/// The deterministic adversary `δ_j`.
pub fn vertex_adversary(j: usize, k: usize) -> SubsetMix {
    SubsetMix::vertex(j, k)
}

/// Adversary that grid-searches the subset simplex for the mix maximizing an
/// `h`-step lookahead of the potential proxy `∫φ(t_{n+h}, x/√T) dm` against a
/// fixed forecaster.
pub struct GridBestResponseAdversary<F: Forecaster> {
    pub forecaster: F,
    pot: HeatPotential,
    grid: usize,
    lookahead: usize,
}

impl<F: Forecaster> GridBestResponseAdversary<F> {
    pub fn new(forecaster: F, k: usize, sigma: f64, grid: usize, lookahead: usize) -> Self {
        assert!((1..=2).contains(&lookahead), "lookahead must be 1 or 2");
        assert!(grid >= 1);
        GridBestResponseAdversary { forecaster, pot: HeatPotential::new(k, sigma), grid, lookahead }
    }

    /// `∫ φ(t, x/√T) dm(x)`: linear proxy for the expected terminal maximum.
    fn proxy(&self, t: f64, m: &DiscreteMeasure, sqrt_t: f64) -> f64 {
        m.integrate(|x| {
            let scaled: Vec<f64> = x.iter().map(|v| v / sqrt_t).collect();
            self.pot.phi(t.min(1.0), &scaled).expect("t clamped to [0,1]")
        })
    }

    fn value(&self, round: usize, belief: &DiscreteMeasure, horizon: usize, depth: usize) -> f64 {
        let t = (round as f64 / horizon as f64).min(1.0);
        let sqrt_t = (horizon as f64).sqrt();
        if depth == 0 || round >= horizon {
            return self.proxy(t, belief, sqrt_t);
        }
        let k = belief.dim();
        let b = self.forecaster.action_mix(round, belief, horizon);
        let mut best = f64::NEG_INFINITY;
        for point in simplex_grid(1 << k, self.grid) {
            let a = SubsetMix::new(point).expect("grid point is a simplex vector");
            let mut acc = 0.0;
            for (i, &bi) in b.probs().iter().enumerate() {
                if bi == 0.0 {
                    continue;
                }
                for y in [Signal::plus(i), Signal::minus(i)] {
                    let hat = hat_a(&a, y);
                    if hat <= 0.0 {
                        continue;
                    }
                    let next = crate::game::belief_update(belief, &a, y);
                    acc += bi * hat * self.value(round + 1, &next, horizon, depth - 1);
                }
            }
            best = best.max(acc);
        }
        best
    }
}

impl<F: Forecaster> Adversary for GridBestResponseAdversary<F> {
    fn subset_mix(&self, round: usize, belief: &DiscreteMeasure, horizon: usize) -> SubsetMix {
        let k = belief.dim();
        let sqrt_t = (horizon as f64).sqrt();
        let b = self.forecaster.action_mix(round, belief, horizon);
        let t_next = ((round + 1) as f64 / horizon as f64).min(1.0);

        if self.lookahead == 1 {
            // the one-step objective is linear in a: precompute the per-vertex
            // contributions G_j and scan the grid with dot products
            let mut g = vec![0.0; 1 << k];
            for (j, gj) in g.iter_mut().enumerate() {
                for (i, &bi) in b.probs().iter().enumerate() {
                    if bi == 0.0 {
                        continue;
                    }
                    let y = crate::game::signal(i, j);
                    let shifted = belief
                        .pushforward_shift(&update_shift(j, y, k))
                        .expect("shift has belief dimension");
                    *gj += bi * self.proxy(t_next, &shifted, sqrt_t);
                }
            }
            let mut best = (f64::NEG_INFINITY, 0usize);
            let grid = simplex_grid(1 << k, self.grid);
            for (idx, point) in grid.iter().enumerate() {
                let val: f64 = point.iter().zip(&g).map(|(p, gj)| p * gj).sum();
                if val > best.0 {
                    best = (val, idx);
                }
            }
            return SubsetMix::new(grid[best.1].clone()).expect("grid point is a simplex vector");
        }

        // depth 2: exact recursion over signal outcomes
        let mut best = (f64::NEG_INFINITY, SubsetMix::uniform(k));
        for point in simplex_grid(1 << k, self.grid) {
            let a = SubsetMix::new(point).expect("grid point is a simplex vector");
            let mut acc = 0.0;
            for (i, &bi) in b.probs().iter().enumerate() {
                if bi == 0.0 {
                    continue;
                }
                for y in [Signal::plus(i), Signal::minus(i)] {
                    let hat = hat_a(&a, y);
                    if hat <= 0.0 {
                        continue;
                    }
                    let next = crate::game::belief_update(belief, &a, y);
                    acc += bi * hat * self.value(round + 1, &next, horizon, self.lookahead - 1);
                }
            }
            if acc > best.0 {
                best = (acc, a);
            }
        }
        best.1
    }
}

/// Serializable strategy description for CLI configs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategySpec {
    PdeForecaster {
        #[serde(default = "default_sigma")]
        sigma: f64,
        #[serde(default)]
        mean_evaluated: bool,
    },
    MwForecaster {
        eta: f64,
    },
    UniformForecaster,
    BalancedUniformAdversary,
    VertexAdversary {
        subset: usize,
    },
    GridBestResponseAdversary {
        forecaster: Box<StrategySpec>,
        #[serde(default = "default_sigma")]
        sigma: f64,
        #[serde(default = "default_grid")]
        grid: usize,
        #[serde(default = "default_lookahead")]
        lookahead: usize,
    },
}

fn default_sigma() -> f64 {
    1.0
}

fn default_grid() -> usize {
    8
}

fn default_lookahead() -> usize {
    1
}

impl StrategySpec {
    pub fn build_forecaster(&self, k: usize) -> Result<Box<dyn Forecaster>> {
        match self {
            StrategySpec::PdeForecaster { sigma, mean_evaluated } => {
                if *sigma <= 0.0 {
                    return Err(Error::InvalidConfig("sigma must be positive".into()));
                }
                Ok(if *mean_evaluated {
                    Box::new(PdeForecaster::mean_evaluated(k, *sigma))
                } else {
                    Box::new(PdeForecaster::new(k, *sigma))
                })
            }
            StrategySpec::MwForecaster { eta } => {
                if *eta <= 0.0 {
                    return Err(Error::InvalidConfig("eta must be positive".into()));
                }
                Ok(Box::new(MwForecaster { eta: *eta }))
            }
            StrategySpec::UniformForecaster => Ok(Box::new(UniformForecaster)),
            other => {
                Err(Error::InvalidConfig(format!("{other:?} is not a forecaster specification")))
            }
        }
    }

    pub fn build_adversary(&self, k: usize) -> Result<Box<dyn Adversary>> {
        match self {
            StrategySpec::BalancedUniformAdversary => {
                let a = balanced_uniform_adversary(k);
                Ok(Box::new(move |_: usize, _: &DiscreteMeasure, _: usize| a.clone()))
            }
            StrategySpec::VertexAdversary { subset } => {
                if *subset >= (1 << k) {
                    return Err(Error::InvalidConfig(format!(
                        "subset bitmask {subset} out of range for K={k}"
                    )));
                }
                let a = vertex_adversary(*subset, k);
                Ok(Box::new(move |_: usize, _: &DiscreteMeasure, _: usize| a.clone()))
            }
            StrategySpec::GridBestResponseAdversary { forecaster, sigma, grid, lookahead } => {
                if *sigma <= 0.0 {
                    return Err(Error::InvalidConfig("sigma must be positive".into()));
                }
                if !(1..=2).contains(lookahead) {
                    return Err(Error::InvalidConfig("lookahead must be 1 or 2".into()));
                }
                let inner = forecaster.build_forecaster(k)?;
                Ok(Box::new(GridBestResponseAdversary::new(
                    inner, k, *sigma, *grid, *lookahead,
                )))
            }
            other => {
                Err(Error::InvalidConfig(format!("{other:?} is not an adversary specification")))
            }
        }
    }
}

impl Forecaster for Box<dyn Forecaster> {
    fn action_mix(&self, round: usize, belief: &DiscreteMeasure, horizon: usize) -> ActionMix {
        (**self).action_mix(round, belief, horizon)
    }
}

impl Adversary for Box<dyn Adversary> {
    fn subset_mix(&self, round: usize, belief: &DiscreteMeasure, horizon: usize) -> SubsetMix {
        (**self).subset_mix(round, belief, horizon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::SignedShift;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn v_vector_uniform_k2() {
        let a = SubsetMix::uniform(2);
        // y=+1: (¼/½)e_{{2}} + (¼/½)e_∅ = (0, ½)
        let v = v_vector(&a, Signal::plus(0)).unwrap();
        assert_abs_diff_eq!(v[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v[1], 0.5, epsilon = 1e-12);
        // y=−1: (¼/½)·0 + (¼/½)e_{{2}} = (0, ½)
        let v = v_vector(&a, Signal::minus(0)).unwrap();
        assert_abs_diff_eq!(v[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn v_vector_vertex_and_degenerate() {
        let a = SubsetMix::vertex(0b01, 2); // δ_{{1}}
        assert_eq!(v_vector(&a, Signal::plus(0)).unwrap(), vec![0.0, 1.0]);
        assert!(matches!(v_vector(&a, Signal::minus(0)), Err(Error::DegenerateSignal)));
        let empty = SubsetMix::vertex(0, 2);
        assert!(v_vector(&empty, Signal::plus(0)).is_err());
    }

    #[test]
    fn balance_examples() {
        for k in 2..=6 {
            assert!(is_balanced(&balanced_uniform_adversary(k)));
        }
        assert!(!is_balanced(&SubsetMix::vertex(0b01, 2)));
        // ½δ_∅ + ½δ_{[K]}
        let a = SubsetMix::new(vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!(is_balanced(&a));
    }

    #[test]
    fn balanced_drift_cancels() {
        // â(−i)·V_{a,−i} = â(+i)·V_{a,+i} componentwise for balanced a
        let singles = {
            let mut p = vec![0.0; 8];
            p[0b001] = 1.0 / 3.0;
            p[0b010] = 1.0 / 3.0;
            p[0b100] = 1.0 / 3.0;
            SubsetMix::new(p).unwrap()
        };
        let candidates = [
            balanced_uniform_adversary(3),
            SubsetMix::new({
                let mut p = vec![0.0; 8];
                p[0] = 0.5;
                p[7] = 0.5;
                p
            })
            .unwrap(),
            singles,
        ];
        for a in &candidates {
            assert!(is_balanced(a));
            for i in 0..3 {
                let plus = Signal::plus(i);
                let minus = Signal::minus(i);
                let vp = v_vector(a, plus).unwrap();
                let vm = v_vector(a, minus).unwrap();
                let (hp, hm) = (hat_a(a, plus), hat_a(a, minus));
                for c in 0..3 {
                    assert_abs_diff_eq!(hm * vm[c] - hp * vp[c], 0.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn pde_forecaster_symmetric_belief_is_uniform() {
        for k in [2, 3] {
            let f = PdeForecaster::new(k, 1.0);
            let m = DiscreteMeasure::dirac_zero(k, 1.0);
            let b = f.action_mix(3, &m, 16);
            for &p in b.probs() {
                assert_abs_diff_eq!(p, 1.0 / k as f64, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn pde_forecaster_point_mass_matches_gradient() {
        let f = PdeForecaster::new(2, 1.0);
        let pot = HeatPotential::new(2, 1.0);
        let m = DiscreteMeasure::point_mass(vec![3, -1], 1.0);
        let (n, horizon) = (5, 16);
        let b = f.action_mix(n, &m, horizon);
        let sqrt_t = (horizon as f64).sqrt();
        let g = pot.grad(n as f64 / horizon as f64, &[3.0 / sqrt_t, -1.0 / sqrt_t]).unwrap();
        assert_abs_diff_eq!(b.probs()[0], g[0] / (g[0] + g[1]), epsilon = 1e-12);
    }

    #[test]
    fn pde_forecaster_simplex_on_random_beliefs() {
        let f = PdeForecaster::new(2, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n_atoms = rng.gen_range(1..6);
            let atoms: Vec<(Vec<i64>, f64)> = (0..n_atoms)
                .map(|_| {
                    (
                        vec![rng.gen_range(-5..5), rng.gen_range(-5..5)],
                        rng.gen::<f64>() + 1e-3,
                    )
                })
                .collect();
            let m = DiscreteMeasure::from_atoms(atoms, 1.0).unwrap();
            let b = f.action_mix(rng.gen_range(0..16), &m, 16);
            assert!(b.probs().iter().all(|&p| p >= 0.0));
            assert_abs_diff_eq!(b.probs().iter().sum::<f64>(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn pde_forecaster_translation_covariant() {
        let f = PdeForecaster::new(2, 1.0);
        let m = DiscreteMeasure::from_atoms(
            vec![(vec![1, 0], 0.3), (vec![-2, 4], 0.7)],
            1.0,
        )
        .unwrap();
        let shifted = m.pushforward_shift(&SignedShift(vec![5, 5])).unwrap();
        let b1 = f.action_mix(4, &m, 16);
        let b2 = f.action_mix(4, &shifted, 16);
        for (p, q) in b1.probs().iter().zip(b2.probs()) {
            assert_abs_diff_eq!(p, q, epsilon = 1e-10);
        }
    }

    #[test]
    fn mean_evaluated_variant_agrees_on_point_mass() {
        let a = PdeForecaster::new(2, 1.0);
        let b = PdeForecaster::mean_evaluated(2, 1.0);
        let m = DiscreteMeasure::point_mass(vec![2, -1], 1.0);
        let (ba, bb) = (a.action_mix(2, &m, 9), b.action_mix(2, &m, 9));
        for (p, q) in ba.probs().iter().zip(bb.probs()) {
            assert_abs_diff_eq!(p, q, epsilon = 1e-12);
        }
    }

    #[test]
    fn mw_examples() {
        let f = MwForecaster { eta: 1.0 };
        let m = DiscreteMeasure::dirac_zero(2, 1.0);
        let b = f.action_mix(0, &m, 4);
        assert_abs_diff_eq!(b.probs()[0], 0.5, epsilon = 1e-12);

        // mean (1, 0): softmax(1, 0) = (e/(e+1), 1/(e+1))
        let m = DiscreteMeasure::point_mass(vec![1, 0], 1.0);
        let b = f.action_mix(0, &m, 4);
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(b.probs()[0], e / (e + 1.0), epsilon = 1e-12);
        assert_abs_diff_eq!(b.probs()[1], 1.0 / (e + 1.0), epsilon = 1e-12);

        // η → 0 flattens any belief
        let f = MwForecaster { eta: 1e-14 };
        let b = f.action_mix(0, &DiscreteMeasure::point_mass(vec![7, -3], 1.0), 4);
        assert_abs_diff_eq!(b.probs()[0], 0.5, epsilon = 1e-10);
    }

    #[test]
    fn best_response_avoids_zero_drift_vertices() {
        // at a symmetric belief the full set and the empty set leave the
        // proxy unchanged while informative vertices raise it
        let adv = GridBestResponseAdversary::new(PdeForecaster::new(2, 1.0), 2, 1.0, 4, 1);
        let m = DiscreteMeasure::dirac_zero(2, 1.0);
        let a = adv.subset_mix(0, &m, 16);
        let p = a.probs();
        let informative = p[0b01] + p[0b10];
        assert!(informative > 0.99, "mix {p:?}");
    }

    #[test]
    fn best_response_symmetric_under_coordinate_swap() {
        let adv = GridBestResponseAdversary::new(UniformForecaster, 2, 1.0, 6, 1);
        let m = DiscreteMeasure::dirac_zero(2, 1.0);
        let sqrt_t = 4.0;
        // objective value of a mix and of its coordinate swap must agree
        let b = ActionMix::uniform(2);
        let value = |a: &SubsetMix| {
            let mut acc = 0.0;
            for (i, &bi) in b.probs().iter().enumerate() {
                for y in [Signal::plus(i), Signal::minus(i)] {
                    let hat = hat_a(a, y);
                    if hat <= 0.0 {
                        continue;
                    }
                    let next = crate::game::belief_update(&m, a, y);
                    acc += bi * hat * adv.proxy(1.0 / 16.0, &next, sqrt_t);
                }
            }
            acc
        };
        let a = SubsetMix::new(vec![0.1, 0.5, 0.2, 0.2]).unwrap();
        // swap coordinates: bit 0 <-> bit 1
        let swapped = SubsetMix::new(vec![0.1, 0.2, 0.5, 0.2]).unwrap();
        assert_abs_diff_eq!(value(&a), value(&swapped), epsilon = 1e-10);
    }

    #[test]
    fn lookahead_two_runs() {
        let adv = GridBestResponseAdversary::new(UniformForecaster, 2, 1.0, 2, 2);
        let m = DiscreteMeasure::dirac_zero(2, 1.0);
        let a = adv.subset_mix(0, &m, 4);
        assert_abs_diff_eq!(a.probs().iter().sum::<f64>(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn strategy_spec_round_trip_and_build() {
        let spec: StrategySpec =
            serde_json::from_str(r#"{"kind":"pde_forecaster","sigma":1.0}"#).unwrap();
        assert!(spec.build_forecaster(2).is_ok());
        assert!(spec.build_adversary(2).is_err());

        let spec: StrategySpec = serde_json::from_str(
            r#"{"kind":"grid_best_response_adversary",
                "forecaster":{"kind":"pde_forecaster"},"grid":4}"#,
        )
        .unwrap();
        assert!(spec.build_adversary(2).is_ok());

        let text = serde_json::to_string(&StrategySpec::MwForecaster { eta: 0.5 }).unwrap();
        let back: StrategySpec = serde_json::from_str(&text).unwrap();
        assert!(matches!(back, StrategySpec::MwForecaster { eta } if (eta - 0.5).abs() < 1e-12));

        let bad: StrategySpec = serde_json::from_str(r#"{"kind":"mw_forecaster","eta":-1}"#).unwrap();
        assert!(bad.build_forecaster(2).is_err());
        let bad: StrategySpec =
            serde_json::from_str(r#"{"kind":"vertex_adversary","subset":9}"#).unwrap();
        assert!(bad.build_adversary(2).is_err());
    }

    #[test]
    fn episode_with_library_strategies() {
        // end-to-end smoke: gradient forecaster vs uniform adversary
        let forecaster = PdeForecaster::new(2, 1.0);
        let spec = StrategySpec::BalancedUniformAdversary;
        let adversary = spec.build_adversary(2).unwrap();
        let m0 = DiscreteMeasure::dirac_zero(2, 1.0);
        let tr = crate::game::play_episode(16, &m0, &forecaster, &adversary, 42, false).unwrap();
        assert_eq!(tr.actions.len(), 16);
    }
}
