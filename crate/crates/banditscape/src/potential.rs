//! Heat-kernel potentials `φ(t,x) = E[max_i (x_i + σ√(1−t) Z_i)]` for iid
//! standard normal `Z`, their gradients and Hessians, and the numerical
//! super/subsolution residual checks behind the regret bounds.
//!
//! `σ = 1` gives the supersolution used by the forecaster; `σ = ½` gives the
//! subsolution certified by the uniform adversary. All expectations reduce to
//! one-dimensional Gaussian integrals by conditioning on which coordinate
//! attains the maximum; the integrands are then smooth products of `Φ`
//! factors, so Gauss–Hermite quadrature converges fast. A seeded rank-1
//! lattice rule over the full K-dimensional Gaussian is kept as an
//! independent cross-check.

use std::sync::OnceLock;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{subset_complement, subset_contains, subset_vector, SubsetMix};
use crate::math::{gauss_hermite_normal, norm_cdf, norm_pdf, norm_quantile, Quadrature};

/// Gauss–Hermite nodes for the 1D conditional integrals.
pub const GH_NODES: usize = 64;
/// Lattice-rule sample count for the cross-check evaluator.
pub const QMC_POINTS: usize = 1 << 16;

/// Smooth potential with fixed dimension and diffusion.
#[derive(Debug)]
pub struct HeatPotential {
    k: usize,
    sigma: f64,
    gh: Quadrature,
    qmc_seed: u64,
    qmc: OnceLock<Vec<Vec<f64>>>,
}

impl HeatPotential {
    pub fn new(k: usize, sigma: f64) -> Self {
        assert!(k >= 2);
        assert!(sigma > 0.0);
        HeatPotential {
            k,
            sigma,
            gh: gauss_hermite_normal(GH_NODES),
            qmc_seed: 0x6865_6174,
            qmc: OnceLock::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::TimeOutOfRange(t));
        }
        Ok(())
    }

    /// Smoothing width `σ√(1−t)`.
    pub fn width(&self, t: f64) -> f64 {
        self.sigma * (1.0 - t).sqrt()
    }

    /// `φ(t, x)`. Exactly `max_i x_i` at `t = 1`; otherwise the Gaussian
    /// expectation of the max, split by the argmax coordinate:
    /// `φ = Σ_i E[(x_i + sZ)·Π_{l≠i} Φ((x_i−x_l)/s + Z)]`.
    pub fn phi(&self, t: f64, x: &[f64]) -> Result<f64> {
        self.check_time(t)?;
        assert_eq!(x.len(), self.k);
        let s = self.width(t);
        if s == 0.0 {
            return Ok(x.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        }
        let mut acc = 0.0;
        for i in 0..self.k {
            for (&z, &w) in self.gh.nodes.iter().zip(&self.gh.weights) {
                let mut prod = 1.0;
                for l in 0..self.k {
                    if l != i {
                        prod *= norm_cdf((x[i] - x[l]) / s + z);
                    }
                }
                acc += w * (x[i] + s * z) * prod;
            }
        }
        Ok(acc)
    }

    /// Independent evaluation of the same expectation by a shifted rank-1
    /// lattice rule over the full K-dimensional Gaussian.
    pub fn phi_lattice(&self, t: f64, x: &[f64]) -> Result<f64> {
        self.check_time(t)?;
        assert_eq!(x.len(), self.k);
        let s = self.width(t);
        if s == 0.0 {
            return Ok(x.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        }
        let pts = self.qmc_normals();
        let mut acc = 0.0;
        for z in pts {
            let mut best = f64::NEG_INFINITY;
            for d in 0..self.k {
                best = best.max(x[d] + s * z[d]);
            }
            acc += best;
        }
        Ok(acc / pts.len() as f64)
    }

    /// Kronecker lattice points (`√prime` generators) with seeded random
    /// shifts and the baker transform, mapped through the normal quantile.
    /// Built once; several shifted copies are concatenated to tighten the
    /// estimate on the non-periodic integrand.
    fn qmc_normals(&self) -> &[Vec<f64>] {
        self.qmc.get_or_init(|| self.build_qmc_normals())
    }

    fn build_qmc_normals(&self) -> Vec<Vec<f64>> {
        const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
        const SHIFTS: usize = 8;
        let alphas: Vec<f64> =
            (0..self.k).map(|j| (PRIMES[j % 12] as f64).sqrt().fract()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.qmc_seed);
        let mut pts = Vec::with_capacity(SHIFTS * QMC_POINTS);
        for _ in 0..SHIFTS {
            let shift: Vec<f64> = (0..self.k).map(|_| rng.gen::<f64>()).collect();
            for m in 0..QMC_POINTS {
                let z: Vec<f64> = (0..self.k)
                    .map(|j| {
                        let u = (m as f64 * alphas[j] + shift[j]).fract();
                        // baker transform: periodizes the integrand so the
                        // lattice rule keeps its fast convergence
                        let u = (1.0 - (2.0 * u - 1.0).abs()).clamp(1e-12, 1.0 - 1e-12);
                        norm_quantile(u)
                    })
                    .collect();
                pts.push(z);
            }
        }
        pts
    }

    /// Gradient of `φ`: component `i` is the probability that coordinate `i`
    /// attains the smoothed maximum. Simplex valued for `t < 1`.
    pub fn grad(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.check_time(t)?;
        if t >= 1.0 {
            // kink of max at ties; strategies never evaluate here
            return Err(Error::TerminalKink);
        }
        assert_eq!(x.len(), self.k);
        let s = self.width(t);
        let mut g = vec![0.0; self.k];
        for i in 0..self.k {
            let mut acc = 0.0;
            for (&z, &w) in self.gh.nodes.iter().zip(&self.gh.weights) {
                let mut prod = 1.0;
                for l in 0..self.k {
                    if l != i {
                        prod *= norm_cdf((x[i] - x[l]) / s + z);
                    }
                }
                acc += w * prod;
            }
            g[i] = acc;
        }
        Ok(g)
    }

    /// Hessian of `φ`: symmetric, zero row sums, nonnegative diagonal,
    /// nonpositive off-diagonal.
    pub fn hessian(&self, t: f64, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_time(t)?;
        if t >= 1.0 {
            return Err(Error::TerminalKink);
        }
        assert_eq!(x.len(), self.k);
        let s = self.width(t);
        let mut h = vec![vec![0.0; self.k]; self.k];
        for i in 0..self.k {
            for l in 0..self.k {
                if l == i {
                    continue;
                }
                let mut acc = 0.0;
                for (&z, &w) in self.gh.nodes.iter().zip(&self.gh.weights) {
                    let mut term = norm_pdf((x[i] - x[l]) / s + z) / s;
                    for r in 0..self.k {
                        if r != i && r != l {
                            term *= norm_cdf((x[i] - x[r]) / s + z);
                        }
                    }
                    acc += w * term;
                }
                h[i][l] = -acc;
                h[i][i] += acc;
            }
        }
        // ∂_l grad_i and ∂_i grad_l are the same integral up to quadrature
        // error; symmetrize and keep the zero row sums exact
        for i in 0..self.k {
            for l in (i + 1)..self.k {
                let avg = 0.5 * (h[i][l] + h[l][i]);
                let d = 0.5 * (h[i][l] - h[l][i]);
                h[i][l] = avg;
                h[l][i] = avg;
                h[i][i] += d;
                h[l][l] -= d;
            }
        }
        Ok(h)
    }

    /// `∂_t φ = −(σ²/2)·Δφ` from the heat equation.
    pub fn dt(&self, t: f64, x: &[f64]) -> Result<f64> {
        let h = self.hessian(t, x)?;
        Ok(self.dt_from_hessian(&h))
    }

    fn dt_from_hessian(&self, h: &[Vec<f64>]) -> f64 {
        let lap: f64 = (0..self.k).map(|i| h[i][i]).sum();
        -0.5 * self.sigma * self.sigma * lap
    }

    /// `∂_tφ + ½ sup_{i,a} Tr(D²φ · M(i,a))`. The trace objective is linear
    /// in `a`, so the sup is attained at a vertex and vertex enumeration is
    /// exact. Nonpositive for `σ = 1`.
    pub fn supersolution_residual(&self, t: f64, x: &[f64]) -> Result<f64> {
        let h = self.hessian(t, x)?;
        let dt = self.dt_from_hessian(&h);
        let mut best: f64 = 0.0; // e_∅ contributes a zero matrix
        for i in 0..self.k {
            for j in 0..(1usize << self.k) {
                let set = if subset_contains(j, i) { subset_complement(j, self.k) } else { j };
                best = best.max(quadratic_form(&h, set, self.k));
            }
        }
        Ok(dt + 0.5 * best)
    }

    /// `∂_tφ + ½ inf_i Tr(D²φ · M(i, a))` for a balanced adversary mix.
    pub fn subsolution_residual(&self, t: f64, x: &[f64], a: &SubsetMix) -> Result<f64> {
        let spread = balance_spread(a);
        if spread > 1e-12 {
            return Err(Error::NotBalanced(spread));
        }
        let h = self.hessian(t, x)?;
        let dt = self.dt_from_hessian(&h);
        let mut worst = f64::INFINITY;
        for i in 0..self.k {
            let m = direction_matrix(i, a);
            let tr: f64 = (0..self.k)
                .map(|r| (0..self.k).map(|c| h[r][c] * m[c][r]).sum::<f64>())
                .sum();
            worst = worst.min(tr);
        }
        Ok(dt + 0.5 * worst)
    }
}

/// `e_S^T H e_S` for the subset bitmask `S`.
fn quadratic_form(h: &[Vec<f64>], set: usize, k: usize) -> f64 {
    let mut acc = 0.0;
    for r in 0..k {
        if !subset_contains(set, r) {
            continue;
        }
        for c in 0..k {
            if subset_contains(set, c) {
                acc += h[r][c];
            }
        }
    }
    acc
}

/// `M(i,a) = Σ_j a(j)(1_{i∈j} e_{j^c}e_{j^c}^T + 1_{i∉j} e_j e_j^T)`.
///
/// Row and column `i` vanish: every contributing subset excludes `i`. For the
/// uniform mix over all subsets the restriction to the remaining coordinates
/// is `¼·11^T + ¼·I`, and `Tr(D²φ·M) = ¼Δφ` whenever the Hessian has zero
/// row sums.
pub fn direction_matrix(i: usize, a: &SubsetMix) -> Vec<Vec<f64>> {
    let k = a.k();
    let mut m = vec![vec![0.0; k]; k];
    for (j, &p) in a.probs().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let set = if subset_contains(j, i) { subset_complement(j, k) } else { j };
        let v = subset_vector(set, k);
        for r in 0..k {
            for c in 0..k {
                m[r][c] += p * (v[r] * v[c]) as f64;
            }
        }
    }
    m
}

/// `max_i â(i) − min_i â(i)`.
pub fn balance_spread(a: &SubsetMix) -> f64 {
    let k = a.k();
    let hats: Vec<f64> = (0..k)
        .map(|i| {
            a.probs()
                .iter()
                .enumerate()
                .filter(|(j, _)| subset_contains(*j, i))
                .map(|(_, &p)| p)
                .sum()
        })
        .collect();
    let max = hats.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = hats.iter().cloned().fold(f64::INFINITY, f64::min);
    max - min
}

/// Closed-form `φ` for `K = 2`:
/// `φ(t, x) = x₂ + h(x₁−x₂)` with `h(d) = d·Φ(d/s') + s'·n(d/s')`,
/// `s' = σ√(2(1−t))`.
pub fn phi2_closed(t: f64, x1: f64, x2: f64, sigma: f64) -> f64 {
    let sp = sigma * (2.0 * (1.0 - t)).sqrt();
    let d = x1 - x2;
    if sp == 0.0 {
        return x2 + d.max(0.0);
    }
    x2 + d * norm_cdf(d / sp) + sp * norm_pdf(d / sp)
}

/// Closed-form first gradient component for `K = 2`:
/// `Φ((x₁−x₂)/(σ√(2(1−t))))`.
pub fn grad2_closed(t: f64, x1: f64, x2: f64, sigma: f64) -> f64 {
    norm_cdf((x1 - x2) / (sigma * (2.0 * (1.0 - t)).sqrt()))
}

/// Derivative-growth estimates over a `t`-grid: the scaled quantities
/// `|∂²_tt φ|·(1−t)^{3/2}`, `|∂³_xxx φ|·(1−t)` and `|∂²_tx φ|·(1−t)` should
/// stay bounded as `t → 1`.
#[derive(Debug, Clone)]
pub struct GrowthProbe {
    /// Per grid point: `(t, max|∂²_tt φ|, max|∂³_xxx φ|, max|∂²_tx φ|)`.
    pub rows: Vec<(f64, f64, f64, f64)>,
    /// Fitted bound `C`: max over rows of the three scaled quantities.
    pub c: f64,
    /// log–log slopes of the scaled quantities against `1−t`; near 0 when
    /// the growth condition holds.
    pub slope_tt: f64,
    pub slope_xxx: f64,
    pub slope_tx: f64,
}

/// Finite-difference growth probe. The sup over `x` near each sample is
/// approximated on a stencil of offsets proportional to the smoothing width
/// `σ√(1−t)`, where the higher derivatives of the smoothed max peak.
pub fn derivative_growth_probe(
    pot: &HeatPotential,
    t_grid: &[f64],
    x_samples: &[Vec<f64>],
) -> Result<GrowthProbe> {
    const STENCIL: [f64; 4] = [0.0, 0.5, 1.0, 2.0];
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if !(0.0..1.0).contains(&t) {
            return Err(Error::TimeOutOfRange(t));
        }
        let s = pot.width(t);
        let ht = 1e-3 * (1.0 - t);
        let hx = 1e-3 * s;
        let mut max_tt: f64 = 0.0;
        let mut max_xxx: f64 = 0.0;
        let mut max_tx: f64 = 0.0;
        for base in x_samples {
            for &d in &STENCIL {
                let mut x = base.clone();
                x[0] += d * s;
                // ∂²_tt: difference of ∂_tφ (itself exact via the heat
                // equation), avoiding noisy second differences of φ
                let dp = pot.dt(t + ht, &x)?;
                let dm = pot.dt(t - ht, &x)?;
                max_tt = max_tt.max(((dp - dm) / (2.0 * ht)).abs());
                // ∂³_{x1x1x1}: central difference of the Hessian diagonal
                let mut xp = x.clone();
                xp[0] += hx;
                let mut xm = x.clone();
                xm[0] -= hx;
                let hp = pot.hessian(t, &xp)?[0][0];
                let hm = pot.hessian(t, &xm)?[0][0];
                max_xxx = max_xxx.max(((hp - hm) / (2.0 * hx)).abs());
                // ∂²_{tx}: central difference of the gradient in t
                let gp = pot.grad(t + ht, &x)?[0];
                let gm = pot.grad(t - ht, &x)?[0];
                max_tx = max_tx.max(((gp - gm) / (2.0 * ht)).abs());
            }
        }
        rows.push((t, max_tt, max_xxx, max_tx));
    }
    let c = rows
        .iter()
        .map(|&(t, tt, xxx, tx)| {
            let tau: f64 = 1.0 - t;
            (tt * tau.powf(1.5)).max(xxx * tau).max(tx * tau)
        })
        .fold(0.0f64, f64::max);
    let log_tau: Vec<f64> = rows.iter().map(|r| (1.0 - r.0).ln()).collect();
    let scaled_slope = |vals: Vec<f64>| {
        let logs: Vec<f64> = vals.iter().map(|v| v.max(1e-300).ln()).collect();
        crate::math::ls_slope(&log_tau, &logs)
    };
    Ok(GrowthProbe {
        c,
        slope_tt: scaled_slope(rows.iter().map(|r| r.1 * (1.0 - r.0).powf(1.5)).collect()),
        slope_xxx: scaled_slope(rows.iter().map(|r| r.2 * (1.0 - r.0)).collect()),
        slope_tx: scaled_slope(rows.iter().map(|r| r.3 * (1.0 - r.0)).collect()),
        rows,
    })
}
