//! Product integration for weakly singular kernels `(distance)^{α-1}`.
//!
//! The regular part of the integrand is replaced by its piecewise-linear
//! interpolant on a graded mesh and integrated exactly against the kernel.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quat::Quaternion;

/// Smallest admissible node count.
pub const MIN_NODES: usize = 8;

/// A 1D mesh description: `n` cells whose nodes cluster at both interval
/// ends with grading exponent `r`.
///
/// Node `j` sits at `lo + (hi-lo)·g(j/n)` with `g(ξ) = ξ^r / (ξ^r + (1-ξ)^r)`;
/// `r = 1` is the uniform mesh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mesh1D {
    pub n: usize,
    pub grading: f64,
}

impl Mesh1D {
    pub fn new(n: usize, grading: f64) -> Result<Self> {
        let m = Mesh1D { n, grading };
        m.validate()?;
        Ok(m)
    }

    /// Mesh with the default grading exponent 2.
    pub fn graded(n: usize) -> Result<Self> {
        Mesh1D::new(n, 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < MIN_NODES {
            return Err(Error::Config(format!(
                "mesh needs at least {MIN_NODES} cells, got {}",
                self.n
            )));
        }
        if !(self.grading >= 1.0) || !self.grading.is_finite() {
            return Err(Error::Config(format!(
                "grading exponent must be >= 1, got {}",
                self.grading
            )));
        }
        Ok(())
    }

    pub fn nodes(&self, lo: f64, hi: f64) -> Vec<f64> {
        let n = self.n;
        let r = self.grading;
        let len = hi - lo;
        let mut out = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let s = if j == 0 {
                lo
            } else if j == n {
                hi
            } else {
                let xi = j as f64 / n as f64;
                let (p, q) = (xi.powf(r), (1.0 - xi).powf(r));
                lo + len * (p / (p + q))
            };
            out.push(s);
        }
        out
    }
}

/// Which end of the interval carries the kernel singularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SingularEnd {
    /// `∫ (hi - s)^{α-1} g(s) ds` (left-sided fractional integrals).
    Upper,
    /// `∫ (s - lo)^{α-1} g(s) ds` (right-sided fractional integrals).
    Lower,
}

/// Sum in a fixed binary-tree order so the result does not depend on how
/// the values were produced.
pub fn pairwise_sum(values: &[Quaternion]) -> Quaternion {
    match values.len() {
        0 => Quaternion::ZERO,
        1 => values[0],
        n if n <= 8 => values.iter().fold(Quaternion::ZERO, |a, &b| a + b),
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Scalar variant of [`pairwise_sum`].
pub fn pairwise_sum_f64(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        n if n <= 8 => values.iter().sum(),
        n => {
            let mid = n / 2;
            pairwise_sum_f64(&values[..mid]) + pairwise_sum_f64(&values[mid..])
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` (Newton iteration on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn gl10() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL.get_or_init(|| gauss_legendre(10))
}

/// Weights `(w_far, w_near)` of `∫_{u1}^{u1+h} u^{α-1} ℓ(u) du` for the linear
/// interpolant `ℓ` with `ℓ(u1+h) = v_far`, `ℓ(u1) = v_near`.
fn cell_weights(u1: f64, h: f64, alpha: f64) -> (f64, f64) {
    let u0 = u1 + h;
    if u1 >= 2.0 * h {
        // kernel is smooth on the cell: Gauss-Legendre is accurate to roundoff
        let (gx, gw) = gl10();
        let (mut wf, mut wn) = (0.0, 0.0);
        for (&x, &w) in gx.iter().zip(gw.iter()) {
            let t = 0.5 * (x + 1.0); // 0 at u1, 1 at u0
            let u = u1 + h * t;
            let k = u.powf(alpha - 1.0) * w * 0.5 * h;
            wf += k * t;
            wn += k * (1.0 - t);
        }
        (wf, wn)
    } else {
        // closed-form moments; u0/h <= 3 so cancellation is harmless
        let m0 = (u0.powf(alpha) - u1.powf(alpha)) / alpha;
        let m1 = (u0.powf(alpha + 1.0) - u1.powf(alpha + 1.0)) / (alpha + 1.0);
        ((m1 - u1 * m0) / h, (u0 * m0 - m1) / h)
    }
}

/// Quadrature weights for `∫_lo^hi k(s) g(s) ds` with the singular kernel
/// `k = (hi-s)^{α-1}` or `(s-lo)^{α-1}` on the given node set.
pub fn product_weights(nodes: &[f64], alpha: f64, end: SingularEnd) -> Vec<f64> {
    let n = nodes.len() - 1;
    let lo = nodes[0];
    let hi = nodes[n];
    let mut w = vec![0.0; n + 1];
    for j in 0..n {
        let h = nodes[j + 1] - nodes[j];
        if h <= 0.0 {
            continue;
        }
        match end {
            SingularEnd::Upper => {
                // distance to hi: node j is far, node j+1 near
                let u1 = hi - nodes[j + 1];
                let (wf, wn) = cell_weights(u1.max(0.0), h, alpha);
                w[j] += wf;
                w[j + 1] += wn;
            }
            SingularEnd::Lower => {
                let u1 = nodes[j] - lo;
                let (wf, wn) = cell_weights(u1.max(0.0), h, alpha);
                w[j + 1] += wf;
                w[j] += wn;
            }
        }
    }
    w
}

type WeightKey = (usize, u64, u64, SingularEnd);
type ReferenceRule = Arc<(Vec<f64>, Vec<f64>)>;

/// Reference nodes and weights on `[0, 1]`. Both scale exactly under affine
/// maps of the interval (weights by `len^α`), so they are computed once.
fn reference_rule(mesh: &Mesh1D, alpha: f64, end: SingularEnd) -> ReferenceRule {
    static CACHE: OnceLock<Mutex<HashMap<WeightKey, ReferenceRule>>> = OnceLock::new();
    let key = (mesh.n, mesh.grading.to_bits(), alpha.to_bits(), end);
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("weight cache poisoned").get(&key) {
        return rule.clone();
    }
    let nodes = mesh.nodes(0.0, 1.0);
    let weights = product_weights(&nodes, alpha, end);
    let rule = Arc::new((nodes, weights));
    cache
        .lock()
        .expect("weight cache poisoned")
        .entry(key)
        .or_insert(rule)
        .clone()
}

/// Approximates `∫_lo^hi (distance to the singular end)^{α-1} · regular(s) ds`.
///
/// `regular` is sampled at the graded mesh nodes in parallel; the final sum is
/// order-fixed.
pub fn product_quadrature<F>(
    regular: F,
    alpha: f64,
    lo: f64,
    hi: f64,
    mesh: &Mesh1D,
    end: SingularEnd,
) -> Result<Quaternion>
where
    F: Fn(f64) -> Quaternion + Sync,
{
    mesh.validate()?;
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::Config(format!("kernel exponent alpha={alpha} outside (0,2)")));
    }
    if hi < lo {
        return Err(Error::Domain(format!("empty interval [{lo}, {hi}]")));
    }
    if hi == lo {
        return Ok(Quaternion::ZERO);
    }
    let rule = reference_rule(mesh, alpha, end);
    let (nodes, weights) = (&rule.0, &rule.1);
    let len = hi - lo;
    let scale = len.powf(alpha);
    let n = mesh.n;
    let terms: Vec<Quaternion> = nodes
        .par_iter()
        .zip(weights.par_iter())
        .enumerate()
        .with_min_len(128)
        .map(|(j, (&xi, &w))| {
            if w == 0.0 {
                return Quaternion::ZERO;
            }
            let s = if j == n { hi } else { lo + len * xi };
            regular(s) * (w * scale)
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mesh_validation() {
        assert!(Mesh1D::new(7, 2.0).is_err());
        assert!(Mesh1D::new(8, 0.5).is_err());
        let m = Mesh1D::new(16, 2.0).unwrap();
        let nodes = m.nodes(1.0, 3.0);
        assert_eq!(nodes.len(), 17);
        assert_eq!(nodes[0], 1.0);
        assert_eq!(nodes[16], 3.0);
        assert!(nodes.windows(2).all(|w| w[1] > w[0]));
        // clustering at both ends
        assert!(nodes[1] - nodes[0] < nodes[9] - nodes[8]);
        assert!(nodes[16] - nodes[15] < nodes[9] - nodes[8]);
    }

    #[test]
    fn zeroth_moment_exact() {
        let m = Mesh1D::graded(8).unwrap();
        for &alpha in &[0.2, 0.5, 0.9] {
            let h = 0.7;
            let v = product_quadrature(|_| Quaternion::ONE, alpha, 0.0, h, &m, SingularEnd::Upper)
                .unwrap();
            assert!((v.w0 - h.powf(alpha) / alpha).abs() < 1e-14, "{alpha}");
            let v = product_quadrature(|_| Quaternion::ONE, alpha, 0.0, h, &m, SingularEnd::Lower)
                .unwrap();
            assert!((v.w0 - h.powf(alpha) / alpha).abs() < 1e-14, "{alpha}");
        }
    }

    #[test]
    fn linears_exact() {
        // ∫_0^1 (1-s)^{α-1} (2 + 3s) ds = 2/α + 3(1/α - 1/(α+1))
        let m = Mesh1D::graded(12).unwrap();
        let alpha = 0.35;
        let exact = 2.0 / alpha + 3.0 * (1.0 / alpha - 1.0 / (alpha + 1.0));
        let v = product_quadrature(
            |s| Quaternion::new(2.0 + 3.0 * s, 0.0, 1.0, 0.0),
            alpha,
            0.0,
            1.0,
            &m,
            SingularEnd::Upper,
        )
        .unwrap();
        assert!((v.w0 - exact).abs() < 1e-13);
        assert!((v.w2 - 1.0 / alpha).abs() < 1e-13);
    }

    #[test]
    fn degenerate_interval_is_zero() {
        let m = Mesh1D::graded(8).unwrap();
        let v = product_quadrature(|_| Quaternion::ONE, 0.5, 2.0, 2.0, &m, SingularEnd::Upper);
        assert_eq!(v.unwrap(), Quaternion::ZERO);
        assert!(product_quadrature(|_| Quaternion::ONE, 0.5, 2.0, 1.0, &m, SingularEnd::Upper).is_err());
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let v: Vec<Quaternion> = (0..1000).map(|i| Quaternion::real(i as f64)).collect();
        assert_eq!(pairwise_sum(&v).w0, 499500.0);
    }
}
