//! Game dynamics, signal generation, exact Bayesian belief updates, and
//! episode simulation.
//!
//! Subsets of `[K]` are bitmasks `j ∈ 0..2^K`; `e_j` is the indicator vector
//! of the subset. The state moves as `x ← x + e_J − 1_{I∈J}·e` and the only
//! outcome feedback is the signal `±I` telling whether the forecaster's
//! realized action was rewarded.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, SignedShift};

/// Probability vector over the `K` actions.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionMix(Vec<f64>);

/// Probability vector over the `2^K` subsets of `[K]`, indexed by bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetMix(Vec<f64>);

fn validate_simplex(probs: &[f64], tol: f64) -> Result<()> {
    if probs.iter().any(|&p| p < -tol || !p.is_finite()) {
        return Err(Error::NotSimplex(format!("negative or non-finite entry in {probs:?}")));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(Error::NotSimplex(format!("sum {sum} != 1")));
    }
    Ok(())
}

impl ActionMix {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        validate_simplex(&probs, 1e-9)?;
        Ok(ActionMix(probs))
    }

    pub fn uniform(k: usize) -> Self {
        ActionMix(vec![1.0 / k as f64; k])
    }

    pub fn pure(i: usize, k: usize) -> Self {
        let mut p = vec![0.0; k];
        p[i] = 1.0;
        ActionMix(p)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn sample(&self, rng: &mut impl Rng) -> usize {
        sample_index(&self.0, rng)
    }
}

impl SubsetMix {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if !probs.len().is_power_of_two() {
            return Err(Error::NotSimplex("subset mix length must be 2^K".into()));
        }
        validate_simplex(&probs, 1e-9)?;
        Ok(SubsetMix(probs))
    }

    /// Uniform over all `2^K` subsets.
    pub fn uniform(k: usize) -> Self {
        let n = 1usize << k;
        SubsetMix(vec![1.0 / n as f64; n])
    }

    /// Point mass on the subset with bitmask `j`.
    pub fn vertex(j: usize, k: usize) -> Self {
        let mut p = vec![0.0; 1usize << k];
        p[j] = 1.0;
        SubsetMix(p)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len().trailing_zeros() as usize
    }

    pub fn sample(&self, rng: &mut impl Rng) -> usize {
        sample_index(&self.0, rng)
    }
}

pub(crate) fn sample_index(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen::<f64>();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Outcome indicator `±i`: sign says whether the realized action was rewarded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signal {
    /// Action index, 0-based.
    pub index: usize,
    pub rewarded: bool,
}

impl Signal {
    pub fn plus(index: usize) -> Self {
        Signal { index, rewarded: true }
    }

    pub fn minus(index: usize) -> Self {
        Signal { index, rewarded: false }
    }
}

/// Indicator vector of the subset bitmask `j`.
pub fn subset_vector(j: usize, k: usize) -> Vec<i64> {
    (0..k).map(|i| ((j >> i) & 1) as i64).collect()
}

pub fn subset_complement(j: usize, k: usize) -> usize {
    !j & ((1usize << k) - 1)
}

pub fn subset_contains(j: usize, i: usize) -> bool {
    (j >> i) & 1 == 1
}

/// One step of the state dynamics: `x + e_J − 1_{I∈J}·e`.
pub fn step_state(x: &[i64], action: usize, subset: usize) -> Vec<i64> {
    let k = x.len();
    let hit = subset_contains(subset, action);
    (0..k)
        .map(|i| {
            let gain = ((subset >> i) & 1) as i64;
            x[i] + gain - if hit { 1 } else { 0 }
        })
        .collect()
}

/// Signal generated by realized draws: `+I` if `I ∈ J`, else `−I`.
pub fn signal(action: usize, subset: usize) -> Signal {
    Signal { index: action, rewarded: subset_contains(subset, action) }
}

/// `â(y)`: probability that the rewarded set contains (`+i`) or excludes
/// (`−i`) the signal's action under the adversary mix.
pub fn hat_a(a: &SubsetMix, y: Signal) -> f64 {
    a.probs()
        .iter()
        .enumerate()
        .filter(|(j, _)| subset_contains(*j, y.index) == y.rewarded)
        .map(|(_, &p)| p)
        .sum()
}

/// The lattice shift applied to the belief by subset `j` given signal `y`:
/// `−e_{j^c}` on a rewarded signal, `+e_j` otherwise.
pub fn update_shift(j: usize, y: Signal, k: usize) -> SignedShift {
    if y.rewarded {
        let comp = subset_complement(j, k);
        SignedShift(subset_vector(comp, k).into_iter().map(|c| -c).collect())
    } else {
        SignedShift(subset_vector(j, k))
    }
}

/// The update kernel as `(shift, probability)` pairs: the belief update is the
/// convolution of the prior with this finitely supported kernel.
pub fn update_kernel(a: &SubsetMix, y: Signal) -> Option<Vec<(SignedShift, f64)>> {
    let k = a.k();
    let hat = hat_a(a, y);
    if hat <= 0.0 {
        return None;
    }
    let mut kernel = Vec::new();
    for (j, &p) in a.probs().iter().enumerate() {
        if p == 0.0 || subset_contains(j, y.index) != y.rewarded {
            continue;
        }
        kernel.push((update_shift(j, y, k), p / hat));
    }
    Some(kernel)
}

/// Bayesian belief update `l(m, a, y)`: mixture of shifted copies of `m`
/// weighted by `a(j)/â(y)`. Returns `δ_0` when `â(y) = 0`.
pub fn belief_update(m: &DiscreteMeasure, a: &SubsetMix, y: Signal) -> DiscreteMeasure {
    match update_kernel(a, y) {
        None => DiscreteMeasure::dirac_zero(m.dim(), m.scale()),
        Some(kernel) => {
            let shifted: Vec<DiscreteMeasure> = kernel
                .iter()
                .map(|(v, _)| m.pushforward_shift(v).expect("dimension checked"))
                .collect();
            let components: Vec<(f64, &DiscreteMeasure)> =
                kernel.iter().zip(&shifted).map(|((_, p), s)| (*p, s)).collect();
            DiscreteMeasure::mix(&components).expect("kernel weights sum to 1")
        }
    }
}

/// Brute-force Bayes oracle: conditions the explicit finite joint distribution
/// over (atom, J, I) on `Y = y` and returns the law of `X + ΔX`. Independent
/// of `belief_update`'s mixture formula by construction.
pub fn bayes_oracle(
    m: &DiscreteMeasure,
    a: &SubsetMix,
    b: &ActionMix,
    y: Signal,
) -> Result<DiscreteMeasure> {
    if b.probs()[y.index] <= 0.0 {
        return Err(Error::ZeroProbabilityEvent);
    }
    let mut atoms: Vec<(Vec<i64>, f64)> = Vec::new();
    let mut total = 0.0;
    for (z, w) in m.atoms() {
        for (j, &aj) in a.probs().iter().enumerate() {
            for (i, &bi) in b.probs().iter().enumerate() {
                if signal(i, j) != y {
                    continue;
                }
                let p = w * aj * bi;
                if p == 0.0 {
                    continue;
                }
                total += p;
                atoms.push((step_state(z, i, j), p));
            }
        }
    }
    if total <= 0.0 {
        return Err(Error::ZeroProbabilityEvent);
    }
    DiscreteMeasure::from_atoms(atoms, m.scale())
}

/// Forecaster strategy: a deterministic function of the round, the current
/// belief, and the horizon.
pub trait Forecaster: Sync {
    fn action_mix(&self, round: usize, belief: &DiscreteMeasure, horizon: usize) -> ActionMix;
}

/// Adversary strategy, same interface on the subset simplex.
pub trait Adversary: Sync {
    fn subset_mix(&self, round: usize, belief: &DiscreteMeasure, horizon: usize) -> SubsetMix;
}

impl<F: Fn(usize, &DiscreteMeasure, usize) -> ActionMix + Sync> Forecaster for F {
    fn action_mix(&self, round: usize, belief: &DiscreteMeasure, horizon: usize) -> ActionMix {
        self(round, belief, horizon)
    }
}

impl<F: Fn(usize, &DiscreteMeasure, usize) -> SubsetMix + Sync> Adversary for F {
    fn subset_mix(&self, round: usize, belief: &DiscreteMeasure, horizon: usize) -> SubsetMix {
        self(round, belief, horizon)
    }
}

/// Realized path of one episode.
#[derive(Debug, Clone)]
pub struct EpisodeTrace {
    pub states: Vec<Vec<i64>>,
    pub actions: Vec<usize>,
    pub subsets: Vec<usize>,
    pub signals: Vec<Signal>,
    pub forecaster_mixes: Vec<ActionMix>,
    pub adversary_mixes: Vec<SubsetMix>,
    /// Exact beliefs `m_0..m_T`, recorded when requested.
    pub beliefs: Option<Vec<DiscreteMeasure>>,
    pub regret: f64,
    pub seed: u64,
}

impl EpisodeTrace {
    /// One JSON object per episode, suitable for JSON-lines output.
    pub fn to_json(&self) -> Value {
        json!({
            "seed": self.seed,
            "states": self.states,
            "actions": self.actions,
            "subsets": self.subsets,
            "signals": self.signals.iter()
                .map(|s| (s.index as i64 + 1) * if s.rewarded { 1 } else { -1 })
                .collect::<Vec<i64>>(),
            "forecaster_mixes": self.forecaster_mixes.iter().map(|b| b.probs().to_vec()).collect::<Vec<_>>(),
            "adversary_mixes": self.adversary_mixes.iter().map(|a| a.probs().to_vec()).collect::<Vec<_>>(),
            "regret": self.regret,
        })
    }
}

/// Deterministic per-stream RNG derivation from an episode seed.
pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(stream))
}

/// Plays one episode. The belief is updated exactly each round; identical
/// seeds give identical traces.
pub fn play_episode(
    horizon: usize,
    m0: &DiscreteMeasure,
    forecaster: &dyn Forecaster,
    adversary: &dyn Adversary,
    seed: u64,
    record_beliefs: bool,
) -> Result<EpisodeTrace> {
    let k = m0.dim();
    let mut nature = stream_rng(seed, 0);
    let mut forecaster_rng = stream_rng(seed, 1);
    let mut adversary_rng = stream_rng(seed, 2);

    // initial state sampled from m0 (scale must be 1: states live on Z^K)
    if (m0.scale() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidConfig("initial belief must have scale 1".into()));
    }
    let sorted = m0.sorted_atoms();
    let weights: Vec<f64> = sorted.iter().map(|(_, w)| *w).collect();
    let x0 = sorted[sample_index(&weights, &mut nature)].0.clone();
    let _ = nature;

    let mut belief = m0.clone();
    let mut state = x0;
    let mut states = vec![state.clone()];
    let mut actions = Vec::with_capacity(horizon);
    let mut subsets = Vec::with_capacity(horizon);
    let mut signals = Vec::with_capacity(horizon);
    let mut f_mixes = Vec::with_capacity(horizon);
    let mut a_mixes = Vec::with_capacity(horizon);
    let mut beliefs = if record_beliefs { Some(vec![belief.clone()]) } else { None };

    for n in 0..horizon {
        let b = forecaster.action_mix(n, &belief, horizon);
        validate_simplex(b.probs(), 1e-9)?;
        if b.dim() != k {
            return Err(Error::DimensionMismatch { expected: k, got: b.dim() });
        }
        let a = adversary.subset_mix(n, &belief, horizon);
        validate_simplex(a.probs(), 1e-9)?;
        if a.k() != k {
            return Err(Error::DimensionMismatch { expected: k, got: a.k() });
        }

        let action = b.sample(&mut forecaster_rng);
        let subset = a.sample(&mut adversary_rng);
        let y = signal(action, subset);

        state = step_state(&state, action, subset);
        belief = belief_update(&belief, &a, y);

        states.push(state.clone());
        actions.push(action);
        subsets.push(subset);
        signals.push(y);
        f_mixes.push(b);
        a_mixes.push(a);
        if let Some(bs) = beliefs.as_mut() {
            bs.push(belief.clone());
        }
    }

    let regret = *states.last().unwrap().iter().max().unwrap() as f64;
    Ok(EpisodeTrace {
        states,
        actions,
        subsets,
        signals,
        forecaster_mixes: f_mixes,
        adversary_mixes: a_mixes,
        beliefs,
        regret,
        seed,
    })
}

/// Monte-Carlo estimate of the expected terminal regret and its standard
/// error. Episodes get deterministic per-index seeds; results are
/// reproducible and order-independent.
pub fn estimate_regret(
    horizon: usize,
    m0: &DiscreteMeasure,
    forecaster: &dyn Forecaster,
    adversary: &dyn Adversary,
    n_episodes: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    assert!(n_episodes >= 1);
    let regrets: Vec<Result<f64>> = (0..n_episodes)
        .into_par_iter()
        .map(|ep| {
            let ep_seed = seed ^ (ep as u64).wrapping_mul(0xd131_0ba6_a5b1_c2b3);
            play_episode(horizon, m0, forecaster, adversary, ep_seed, false).map(|t| t.regret)
        })
        .collect();
    let values: Vec<f64> = regrets.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(mean_stderr(&values))
}

pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn step_state_examples() {
        // K=2, I=2 (index 1), J={1} (bitmask 0b01)
        assert_eq!(step_state(&[0, 0], 1, 0b01), vec![1, 0]);
        // I=1, J={1}: forecaster rewarded, e_J − e = (0,−1)
        assert_eq!(step_state(&[0, 0], 0, 0b01), vec![0, -1]);
        // J = [K]: x unchanged for any action
        for i in 0..2 {
            assert_eq!(step_state(&[3, -1], i, 0b11), vec![3, -1]);
        }
    }

    #[test]
    fn signal_examples() {
        assert_eq!(signal(0, 0b11), Signal::plus(0));
        assert_eq!(signal(1, 0b01), Signal::minus(1));
        assert_eq!(signal(0, 0), Signal::minus(0));
    }

    #[test]
    fn hat_a_examples() {
        for k in 2..=4 {
            let u = SubsetMix::uniform(k);
            for i in 0..k {
                assert_abs_diff_eq!(hat_a(&u, Signal::plus(i)), 0.5, epsilon = 1e-12);
                assert_abs_diff_eq!(hat_a(&u, Signal::minus(i)), 0.5, epsilon = 1e-12);
            }
        }
        let d1 = SubsetMix::vertex(0b01, 2);
        assert_abs_diff_eq!(hat_a(&d1, Signal::plus(0)), 1.0);
        assert_abs_diff_eq!(hat_a(&d1, Signal::plus(1)), 0.0);
    }

    #[test]
    fn belief_update_single_subset_is_deterministic_shift() {
        let m = DiscreteMeasure::from_atoms(vec![(vec![1, 0], 0.5), (vec![0, 1], 0.5)], 1.0).unwrap();
        // a = δ_{{1}}, y = +1: single term, shift −e_{{2}}
        let a = SubsetMix::vertex(0b01, 2);
        let updated = belief_update(&m, &a, Signal::plus(0));
        let expected = m.pushforward_shift(&SignedShift(vec![0, -1])).unwrap();
        assert!(updated.approx_eq(&expected, 1e-15));
    }

    #[test]
    fn belief_update_two_term_mixture() {
        // a(∅) = a({2}) = ½, y = −1: ½·m + ½·m_{♯e_2}
        let m = DiscreteMeasure::dirac_zero(2, 1.0);
        let mut probs = vec![0.0; 4];
        probs[0b00] = 0.5;
        probs[0b10] = 0.5;
        let a = SubsetMix::new(probs).unwrap();
        let updated = belief_update(&m, &a, Signal::minus(0));
        assert_abs_diff_eq!(updated.weight(&[0, 0]), 0.5);
        assert_abs_diff_eq!(updated.weight(&[0, 1]), 0.5);
    }

    #[test]
    fn belief_update_degenerate_convention() {
        let m = DiscreteMeasure::point_mass(vec![3, 5], 1.0);
        // a = δ_{{2}}: â(+1) = 0, so the convention δ_0 applies
        let a = SubsetMix::vertex(0b10, 2);
        let updated = belief_update(&m, &a, Signal::plus(0));
        assert_eq!(updated.weight(&[0, 0]), 1.0);
    }

    #[test]
    fn oracle_simple_case() {
        let m = DiscreteMeasure::dirac_zero(2, 1.0);
        let a = SubsetMix::vertex(0b01, 2);
        let b = ActionMix::uniform(2);
        let got = bayes_oracle(&m, &a, &b, Signal::plus(0)).unwrap();
        assert_eq!(got.weight(&[0, -1]), 1.0);
    }

    #[test]
    fn oracle_zero_probability_errors() {
        let m = DiscreteMeasure::dirac_zero(2, 1.0);
        let a = SubsetMix::vertex(0b10, 2);
        let b = ActionMix::pure(0, 2);
        // b(2) = 0 yet signal names action 2
        assert!(bayes_oracle(&m, &a, &b, Signal::plus(1)).is_err());
    }

    #[test]
    fn trivial_episodes() {
        let m0 = DiscreteMeasure::dirac_zero(2, 1.0);
        let forecaster = |_: usize, _: &DiscreteMeasure, _: usize| ActionMix::uniform(2);

        // adversary ≡ δ_{[K]}: state frozen, regret = max x0 = 0
        let full = |_: usize, _: &DiscreteMeasure, _: usize| SubsetMix::vertex(0b11, 2);
        let tr = play_episode(10, &m0, &forecaster, &full, 7, true).unwrap();
        assert_eq!(tr.regret, 0.0);
        assert!(tr.states.iter().all(|x| x == &vec![0, 0]));

        // adversary ≡ δ_∅: state frozen, all signals negative
        let empty = |_: usize, _: &DiscreteMeasure, _: usize| SubsetMix::vertex(0, 2);
        let tr = play_episode(10, &m0, &forecaster, &empty, 7, false).unwrap();
        assert_eq!(tr.regret, 0.0);
        assert!(tr.signals.iter().all(|y| !y.rewarded));
    }

    #[test]
    fn zero_horizon_regret_is_initial_max() {
        let m0 = DiscreteMeasure::point_mass(vec![2, -1], 1.0);
        let f = |_: usize, _: &DiscreteMeasure, _: usize| ActionMix::uniform(2);
        let a = |_: usize, _: &DiscreteMeasure, _: usize| SubsetMix::uniform(2);
        let tr = play_episode(0, &m0, &f, &a, 3, false).unwrap();
        assert_eq!(tr.regret, 2.0);
    }

    #[test]
    fn identical_seeds_identical_traces() {
        let m0 = DiscreteMeasure::dirac_zero(2, 1.0);
        let f = |_: usize, _: &DiscreteMeasure, _: usize| ActionMix::uniform(2);
        let a = |_: usize, _: &DiscreteMeasure, _: usize| SubsetMix::uniform(2);
        let t1 = play_episode(20, &m0, &f, &a, 99, false).unwrap();
        let t2 = play_episode(20, &m0, &f, &a, 99, false).unwrap();
        assert_eq!(t1.states, t2.states);
        assert_eq!(t1.signals, t2.signals);
    }

    #[test]
    fn non_simplex_strategy_rejected() {
        let m0 = DiscreteMeasure::dirac_zero(2, 1.0);
        let bad = |_: usize, _: &DiscreteMeasure, _: usize| ActionMix(vec![0.7, 0.7]);
        let a = |_: usize, _: &DiscreteMeasure, _: usize| SubsetMix::uniform(2);
        assert!(play_episode(2, &m0, &bad, &a, 0, false).is_err());
    }

    #[test]
    fn estimate_regret_trivial_and_enumerable() {
        let m0 = DiscreteMeasure::dirac_zero(2, 1.0);
        let f_uniform = |_: usize, _: &DiscreteMeasure, _: usize| ActionMix::uniform(2);
        let full = |_: usize, _: &DiscreteMeasure, _: usize| SubsetMix::vertex(0b11, 2);
        let (mean, se) = estimate_regret(5, &m0, &f_uniform, &full, 50, 1).unwrap();
        assert_eq!((mean, se), (0.0, 0.0));

        // K=2, T=1, forecaster (½,½), adversary uniform on {{1},{2}}:
        // exhaustive enumeration gives E[max] = ½ exactly
        let mut probs = vec![0.0; 4];
        probs[0b01] = 0.5;
        probs[0b10] = 0.5;
        let adv = SubsetMix::new(probs).unwrap();
        let a = move |_: usize, _: &DiscreteMeasure, _: usize| adv.clone();
        let (mean, se) = estimate_regret(1, &m0, &f_uniform, &a, 4000, 2).unwrap();
        assert!((mean - 0.5).abs() <= 3.0 * se, "mean {mean} se {se}");

        // deterministic outcome: forecaster plays 1, adversary rewards only 2
        let f_pure = |_: usize, _: &DiscreteMeasure, _: usize| ActionMix::pure(0, 2);
        let only2 = |_: usize, _: &DiscreteMeasure, _: usize| SubsetMix::vertex(0b10, 2);
        let (mean, _) = estimate_regret(1, &m0, &f_pure, &only2, 100, 3).unwrap();
        assert_eq!(mean, 1.0);
    }

    #[test]
    fn online_belief_matches_offline_recomputation() {
        let m0 = DiscreteMeasure::dirac_zero(2, 1.0);
        let f = |_: usize, _: &DiscreteMeasure, _: usize| ActionMix::uniform(2);
        let a = |_: usize, _: &DiscreteMeasure, _: usize| SubsetMix::uniform(2);
        let tr = play_episode(8, &m0, &f, &a, 5, true).unwrap();
        let beliefs = tr.beliefs.as_ref().unwrap();
        let mut m = m0.clone();
        for (n, y) in tr.signals.iter().enumerate() {
            m = belief_update(&m, &tr.adversary_mixes[n], *y);
            assert!(beliefs[n + 1].approx_eq(&m, 1e-12));
        }
    }
}
