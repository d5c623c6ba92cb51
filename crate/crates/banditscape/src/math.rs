//! Scalar normal-distribution helpers and quadrature rules.

use nalgebra::DMatrix;

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF via `erf`.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / SQRT_2))
}

/// Acklam's rational approximation of the standard normal quantile
/// (relative error below 1.15e-9 on (0,1)).
pub fn norm_quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -norm_quantile(1.0 - p)
    }
}

/// Nodes and weights of a quadrature rule, stored so that
/// `∫ f dμ ≈ Σ w_i f(x_i)`.
#[derive(Debug, Clone)]
pub struct Quadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Golub–Welsch: eigen-decomposition of the symmetric tridiagonal Jacobi
/// matrix gives nodes (eigenvalues) and weights (squared first eigenvector
/// components times the zeroth moment).
fn golub_welsch(off_diag: &[f64], moment0: f64) -> Quadrature {
    let n = off_diag.len() + 1;
    let mut jac = DMatrix::zeros(n, n);
    for (i, &b) in off_diag.iter().enumerate() {
        jac[(i, i + 1)] = b;
        jac[(i + 1, i)] = b;
    }
    let eig = jac.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let node = eig.eigenvalues[i];
            let w = moment0 * eig.eigenvectors[(0, i)].powi(2);
            (node, w)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Quadrature {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Gauss–Hermite rule for expectations under the standard normal: probabilist
/// nodes and probability weights, `E[f(Z)] ≈ Σ w_i f(z_i)` with `Σ w_i = 1`.
pub fn gauss_hermite_normal(n: usize) -> Quadrature {
    // physicists' recurrence: β_k = sqrt(k/2), zeroth moment √π
    let off: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    let raw = golub_welsch(&off, std::f64::consts::PI.sqrt());
    let z = std::f64::consts::PI.sqrt();
    Quadrature {
        nodes: raw.nodes.iter().map(|x| SQRT_2 * x).collect(),
        weights: raw.weights.iter().map(|w| w / z).collect(),
    }
}

/// Gauss–Legendre rule on [a, b].
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Quadrature {
    let off: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    let raw = golub_welsch(&off, 2.0);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    Quadrature {
        nodes: raw.nodes.iter().map(|x| mid + half * x).collect(),
        weights: raw.weights.iter().map(|w| w * half).collect(),
    }
}

/// All points of the regular simplex grid `{v/res : v ∈ ℕ^dim, Σv = res}`,
/// in deterministic lexicographic order.
pub fn simplex_grid(dim: usize, res: usize) -> Vec<Vec<f64>> {
    assert!(dim >= 1);
    let mut out = Vec::new();
    let mut comp = vec![0usize; dim];
    fn rec(out: &mut Vec<Vec<f64>>, comp: &mut Vec<usize>, pos: usize, left: usize, res: usize) {
        if pos == comp.len() - 1 {
            comp[pos] = left;
            out.push(comp.iter().map(|&c| c as f64 / res as f64).collect());
            return;
        }
        for c in 0..=left {
            comp[pos] = c;
            rec(out, comp, pos + 1, left - c, res);
        }
    }
    rec(&mut out, &mut comp, 0, res, res);
    out
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let num: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}
