//! Backward-induction solver for the minimax value
//! `v(n, m) = inf_b sup_a Σ_i b(i)[â(i)·v(n+1, l(m,a,+i)) + â(−i)·v(n+1, l(m,a,−i))]`
//! with terminal condition `∫ max_i x_i dm`, at desk scale (K ∈ {2,3}, small
//! horizons).
//!
//! Both simplices are searched on regular grids with two shrink-refinement
//! passes (factor 4) around the incumbent. The stage objective is linear in
//! `b`, so each adversary grid point contributes one coefficient vector and
//! the outer minimization reduces to dot products. In the final round the
//! continuation is also linear in `a` (the terminal functional is linear in
//! the measure), so the grid maximum sits at a subset vertex and only
//! vertices need scanning there.

use std::sync::atomic::{AtomicUsize, Ordering};

use dashmap::DashMap;

use crate::error::{Error, Result};
use crate::game::{belief_update, hat_a, signal, update_shift, ActionMix, Signal, SubsetMix};
use crate::math::simplex_grid;
use crate::measure::DiscreteMeasure;

/// `∫ max_i x_i dm`.
pub fn terminal_value(m: &DiscreteMeasure) -> f64 {
    m.expected_max()
}

/// Continuation value oracle used by the stage operations.
pub type Continuation<'a> = dyn FnMut(usize, &DiscreteMeasure) -> Result<f64> + 'a;

/// One stage of the dynamic programming display: the expected continuation
/// value over the signal distribution. Branches with `b(i)·â(±i) = 0` are
/// skipped entirely so the zero-probability `δ_0` convention never leaks in.
pub fn stage_objective(
    n: usize,
    m: &DiscreteMeasure,
    b: &ActionMix,
    a: &SubsetMix,
    continuation: &mut Continuation,
) -> Result<f64> {
    let coeffs = branch_coefficients(n, m, a, b.dim(), continuation)?;
    Ok(b.probs().iter().zip(&coeffs).map(|(bi, ci)| bi * ci).sum())
}

/// Per-action coefficients `c_i = â(+i)·v(n+1, l(m,a,+i)) + â(−i)·v(n+1, l(m,a,−i))`;
/// the stage objective is `b·c`.
fn branch_coefficients(
    n: usize,
    m: &DiscreteMeasure,
    a: &SubsetMix,
    k: usize,
    continuation: &mut Continuation,
) -> Result<Vec<f64>> {
    let mut c = vec![0.0; k];
    for (i, ci) in c.iter_mut().enumerate() {
        for y in [Signal::plus(i), Signal::minus(i)] {
            let hat = hat_a(a, y);
            if hat <= 0.0 {
                continue;
            }
            let next = belief_update(m, a, y);
            *ci += hat * continuation(n + 1, &next)?;
        }
    }
    Ok(c)
}

/// Grid search with `passes` shrink-refinement rounds (factor 4 around the
/// incumbent). Every candidate is a convex combination of the incumbent and a
/// base grid point, so it stays on the simplex.
fn refine_search(
    dim: usize,
    res: usize,
    passes: usize,
    maximize: bool,
    eval: &mut dyn FnMut(&[f64]) -> Result<f64>,
) -> Result<(Vec<f64>, f64)> {
    let base = simplex_grid(dim, res);
    let sign = if maximize { 1.0 } else { -1.0 };
    let mut best: Option<(Vec<f64>, f64)> = None;
    for p in &base {
        let v = eval(p)?;
        if best.as_ref().map_or(true, |(_, bv)| sign * v > sign * *bv) {
            best = Some((p.clone(), v));
        }
    }
    let (mut inc, mut inc_v) = best.expect("grid is nonempty");
    for pass in 1..=passes {
        let factor = 4f64.powi(pass as i32);
        for p in &base {
            let cand: Vec<f64> =
                inc.iter().zip(p).map(|(c, g)| c + (g - c) / factor).collect();
            let v = eval(&cand)?;
            if sign * v > sign * inc_v {
                inc = cand;
                inc_v = v;
            }
        }
    }
    Ok((inc, inc_v))
}

/// Inner `sup_a` of the stage objective for a fixed forecaster mix, by grid
/// search plus refinement.
pub fn best_response_a(
    n: usize,
    m: &DiscreteMeasure,
    b: &ActionMix,
    res_a: usize,
    passes: usize,
    continuation: &mut Continuation,
) -> Result<(SubsetMix, f64)> {
    let k = b.dim();
    let (point, value) = refine_search(1 << k, res_a, passes, true, &mut |p| {
        let a = SubsetMix::new(p.to_vec()).expect("grid point is a simplex vector");
        stage_objective(n, m, b, &a, continuation)
    })?;
    Ok((SubsetMix::new(point).expect("refined point is a simplex vector"), value))
}

/// One inf-sup step on the grids. Returns `(b*, a*, value, gap)` where the
/// gap is the sum of the final grid spacings after refinement.
pub fn minimax_step(
    n: usize,
    m: &DiscreteMeasure,
    res_b: usize,
    res_a: usize,
    passes: usize,
    continuation: &mut Continuation,
) -> Result<(ActionMix, SubsetMix, f64, f64)> {
    let k = m.dim();
    let mut best_a: Option<SubsetMix> = None;
    let (b_point, value) = refine_search(k, res_b, passes, false, &mut |p| {
        let b = ActionMix::new(p.to_vec()).expect("grid point is a simplex vector");
        let (a, v) = best_response_a(n, m, &b, res_a, passes, continuation)?;
        best_a = Some(a);
        Ok(v)
    })?;
    // re-derive the maximizer at the optimal b (the closure's last a belongs
    // to the last evaluated candidate, not necessarily the incumbent)
    let b = ActionMix::new(b_point).expect("refined point is a simplex vector");
    let (a, value_check) = best_response_a(n, m, &b, res_a, passes, continuation)?;
    debug_assert!((value - value_check).abs() <= 1e-12);
    let _ = best_a;
    Ok((b, a, value_check, grid_gap(res_b, res_a, passes)))
}

fn grid_gap(res_b: usize, res_a: usize, passes: usize) -> f64 {
    let shrink = 4f64.powi(passes as i32);
    1.0 / (res_b as f64 * shrink) + 1.0 / (res_a as f64 * shrink)
}

/// Solver configuration. `use_cache = false` recomputes every node, which is
/// only sensible for transparency checks at tiny resolutions.
#[derive(Debug, Clone)]
pub struct DpConfig {
    pub k: usize,
    pub horizon: usize,
    pub res_b: usize,
    pub res_a: usize,
    pub passes: usize,
    pub node_cap: usize,
    pub use_cache: bool,
}

impl DpConfig {
    pub fn new(k: usize, horizon: usize, res_b: usize, res_a: usize) -> Self {
        DpConfig { k, horizon, res_b, res_a, passes: 2, node_cap: 200_000, use_cache: true }
    }
}

/// Result of a full backward induction from the initial belief.
#[derive(Debug, Clone)]
pub struct DpSolution {
    pub value: f64,
    /// Final grid spacing of the two searches; the value is reliable to a
    /// small multiple of this.
    pub gap: f64,
    /// First-stage minimizer.
    pub b0: Vec<f64>,
    /// First-stage maximizer.
    pub a0: Vec<f64>,
    /// Distinct belief nodes evaluated.
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct NodeKey {
    round: usize,
    scale_bits: u64,
    /// Sorted atoms with weights in units of 1e-12.
    atoms: Vec<(Vec<i64>, i64)>,
}

fn node_key(round: usize, m: &DiscreteMeasure) -> NodeKey {
    NodeKey {
        round,
        scale_bits: m.scale().to_bits(),
        atoms: m
            .sorted_atoms()
            .into_iter()
            .map(|(z, w)| (z, (w * 1e12).round() as i64))
            .collect(),
    }
}

struct Solver<'a> {
    cfg: &'a DpConfig,
    memo: DashMap<NodeKey, f64>,
    visited: AtomicUsize,
}

impl Solver<'_> {
    fn value(&self, n: usize, m: &DiscreteMeasure) -> Result<f64> {
        if n == self.cfg.horizon {
            return Ok(terminal_value(m));
        }
        let key = node_key(n, m);
        if self.cfg.use_cache {
            if let Some(v) = self.memo.get(&key) {
                return Ok(*v);
            }
        }
        let visited = self.visited.fetch_add(1, Ordering::Relaxed) + 1;
        if visited > self.cfg.node_cap {
            return Err(Error::NodeBudget { visited, cap: self.cfg.node_cap, depth: n });
        }
        let (_, _, v, _) = self.minimax(n, m)?;
        if self.cfg.use_cache {
            self.memo.insert(key, v);
        }
        Ok(v)
    }

    fn minimax(&self, n: usize, m: &DiscreteMeasure) -> Result<(ActionMix, SubsetMix, f64, f64)> {
        let k = self.cfg.k;
        if n + 1 == self.cfg.horizon {
            return self.minimax_terminal(n, m);
        }
        // coefficient vectors c(a) are independent of b; cache them per
        // rounded a so the b-search costs only dot products
        let mut c_cache: std::collections::HashMap<Vec<i64>, Vec<f64>> =
            std::collections::HashMap::new();
        let mut coeffs = |p: &[f64]| -> Result<Vec<f64>> {
            let key: Vec<i64> = p.iter().map(|v| (v * 1e12).round() as i64).collect();
            if let Some(c) = c_cache.get(&key) {
                return Ok(c.clone());
            }
            let a = SubsetMix::new(p.to_vec()).expect("grid point is a simplex vector");
            let c = branch_coefficients(n, m, &a, k, &mut |n2, m2| self.value(n2, m2))?;
            c_cache.insert(key, c.clone());
            Ok(c)
        };

        let sup_a = |b: &[f64], coeffs: &mut dyn FnMut(&[f64]) -> Result<Vec<f64>>| {
            refine_search(1 << k, self.cfg.res_a, self.cfg.passes, true, &mut |p| {
                let c = coeffs(p)?;
                Ok(b.iter().zip(&c).map(|(bi, ci)| bi * ci).sum())
            })
        };
        let (b_point, _) = refine_search(k, self.cfg.res_b, self.cfg.passes, false, &mut |p| {
            sup_a(p, &mut coeffs).map(|(_, v)| v)
        })?;
        let (a_point, value) = sup_a(&b_point, &mut coeffs)?;
        Ok((
            ActionMix::new(b_point).expect("refined point is a simplex vector"),
            SubsetMix::new(a_point).expect("refined point is a simplex vector"),
            value,
            grid_gap(self.cfg.res_b, self.cfg.res_a, self.cfg.passes),
        ))
    }

    /// Final round: the continuation is the terminal functional, linear in
    /// the measure, so `sup_a` of the bilinear form `bᵀWa` over any simplex
    /// grid (which always contains the vertices) equals the vertex maximum.
    fn minimax_terminal(
        &self,
        _n: usize,
        m: &DiscreteMeasure,
    ) -> Result<(ActionMix, SubsetMix, f64, f64)> {
        let k = self.cfg.k;
        let subsets = 1usize << k;
        // W[i][j]: terminal value after action i against vertex subset j
        let mut w = vec![vec![0.0; subsets]; k];
        for j in 0..subsets {
            for (i, wi) in w.iter_mut().enumerate() {
                let y = signal(i, j);
                let shifted = m
                    .pushforward_shift(&update_shift(j, y, k))
                    .expect("shift has belief dimension");
                wi[j] = terminal_value(&shifted);
            }
        }
        let vertex_sup = |b: &[f64]| -> (usize, f64) {
            (0..subsets)
                .map(|j| (j, (0..k).map(|i| b[i] * w[i][j]).sum::<f64>()))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .expect("at least one subset")
        };
        let (b_point, _) = refine_search(k, self.cfg.res_b, self.cfg.passes, false, &mut |p| {
            Ok(vertex_sup(p).1)
        })?;
        let (j_star, value) = vertex_sup(&b_point);
        Ok((
            ActionMix::new(b_point).expect("refined point is a simplex vector"),
            SubsetMix::vertex(j_star, k),
            value,
            grid_gap(self.cfg.res_b, self.cfg.res_a, self.cfg.passes),
        ))
    }
}

/// Full backward induction from the initial belief.
pub fn solve_dpp(cfg: &DpConfig, m0: &DiscreteMeasure) -> Result<DpSolution> {
    if !(2..=3).contains(&cfg.k) {
        return Err(Error::InvalidConfig(format!("K={} unsupported; use 2 or 3", cfg.k)));
    }
    if cfg.horizon == 0 || cfg.horizon > 4 {
        return Err(Error::InvalidConfig(format!(
            "horizon {} outside the supported range 1..=4",
            cfg.horizon
        )));
    }
    if m0.dim() != cfg.k {
        return Err(Error::DimensionMismatch { expected: cfg.k, got: m0.dim() });
    }
    if cfg.res_b == 0 || cfg.res_a == 0 {
        return Err(Error::InvalidConfig("grid resolutions must be positive".into()));
    }
    let solver = Solver { cfg, memo: DashMap::new(), visited: AtomicUsize::new(1) };
    let (b0, a0, value, gap) = solver.minimax(0, m0)?;
    Ok(DpSolution {
        value,
        gap,
        b0: b0.probs().to_vec(),
        a0: a0.probs().to_vec(),
        nodes: solver.visited.load(Ordering::Relaxed),
    })
}
