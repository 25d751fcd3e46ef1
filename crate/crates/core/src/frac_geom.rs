//! Fractional Stokes and Borel-Pompeiu formulas.
//!
//! Both are obtained by applying the classical formulas to the
//! exponentially weighted inner integrals `e^{Σλ}·T_f` and `T_g·e^{Σμ}`.
//! The Borel-Pompeiu reconstruction is available before the outer per-axis
//! fractional derivatives are applied ([`weighted_bp`]) and after
//! ([`assembled_bp`]).

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field4d::{Box4, CoordTransform, MultSide, Point4, QField};
use crate::frac1d::{
    frac_integral_fn, outer_prop_deriv, rl_step, FracAxisParams, Mesh1D, Sense, Side,
    WeightFunction, ENDPOINT_BUFFER_STEPS,
};
use crate::fueter::{lambda_profile, prop_d_of_transform, OperatorSpec, WeightProfile};
use crate::geom::{check_inside, kernel_of_offset, surface_sum, volume_integral, QuadratureSpec, StokesReport};
use crate::quat::{Quaternion, StructuralSet};
use crate::special::gamma;

/// A Riemann-Liouville operator bundled with its inner integral and its
/// exponential profile (`λ` for left multiplication, `μ` for right).
pub struct WeightedTransform<F: QField> {
    pub transform: CoordTransform<F>,
    pub spec: OperatorSpec,
    pub profile: WeightProfile,
    sigma_inv: Quaternion,
    psi: StructuralSet,
    memo: Mutex<HashMap<[u64; 4], (Quaternion, Quaternion)>>,
}

/// Cap on memoized points; nodes beyond it are recomputed on demand.
const POINT_MEMO_CAP: usize = 1 << 20;

impl<F: QField> WeightedTransform<F> {
    pub fn new(f: F, spec: OperatorSpec, psi: &StructuralSet, q: Point4, mesh: Mesh1D) -> Result<Self> {
        if spec.sense != Sense::RiemannLiouville {
            return Err(Error::Unsupported(
                "weighted integral formulas use the Riemann-Liouville operators".into(),
            ));
        }
        let profile = lambda_profile(psi, spec.phi.as_ref(), spec.sigma_quat)?;
        if !profile.exists {
            return Err(Error::Unsupported("λ profile does not exist".into()));
        }
        let sigma_inv = if spec.sigma_quat == Quaternion::ONE { Quaternion::ONE } else { spec.sigma_quat.inv()? };
        let transform = spec.transform(f, q, mesh)?;
        Ok(WeightedTransform { transform, spec, profile, sigma_inv, psi: *psi, memo: Mutex::new(HashMap::new()) })
    }

    pub fn domain(&self) -> &Box4 {
        self.transform.domain()
    }

    pub fn side(&self) -> MultSide {
        self.spec.mult_side
    }

    /// `e^{Σ_k λ_k(y_k)}`.
    pub fn exp_weight(&self, y: &Point4) -> f64 {
        self.profile.sum(y).exp()
    }

    /// Inner integral `T(y)`.
    pub fn value(&self, y: &Point4) -> Quaternion {
        self.transform.eval(y)
    }

    /// `S·σ⁻¹·D f` (left) or `D_r g·ρ⁻¹·S` (right), where `S = Σφ_k'`.
    pub fn weighted_derivative(&self, psi: &StructuralSet, y: &Point4) -> Result<Quaternion> {
        let d = prop_d_of_transform(&self.transform, psi, &self.spec, y)?;
        let s = self.spec.phi.as_ref().map_or(1.0, |w| w.slope_sum(y));
        Ok(match self.spec.mult_side {
            MultSide::Left => (self.sigma_inv * d) * s,
            MultSide::Right => (d * self.sigma_inv) * s,
        })
    }

    /// `(T(y), weighted_derivative(y))` for the structural set given at
    /// construction, memoized by point.
    fn memo_pair(&self, y: &Point4) -> Result<(Quaternion, Quaternion)> {
        let key = y.map(f64::to_bits);
        if let Some(v) = self.memo.lock().expect("point memo poisoned").get(&key) {
            return Ok(*v);
        }
        let v = (self.value(y), self.weighted_derivative(&self.psi, y)?);
        let mut memo = self.memo.lock().expect("point memo poisoned");
        if memo.len() < POINT_MEMO_CAP {
            memo.insert(key, v);
        }
        Ok(v)
    }

    /// Weight function of axis `k` (identity when unweighted).
    pub fn axis_weight(&self, k: usize) -> WeightFunction {
        match &self.spec.phi {
            Some(w) => w.slice(k, self.transform.base_point()),
            None => WeightFunction::identity(),
        }
    }
}

fn expect_side<F: QField>(w: &WeightedTransform<F>, side: MultSide, what: &str) -> Result<()> {
    if w.side() != side {
        return Err(Error::Config(format!("{what} needs a {side:?}-multiplication operator")));
    }
    Ok(())
}

/// Fractional Stokes formula
/// `∫_∂Ω T_g e^{Σμ} ν e^{Σλ} T_f = ∫_Ω [T_g·Sσ⁻¹Df + D_r g·ρ⁻¹S·T_f] e^{Σ(λ+μ)}`.
///
/// With trivial proportions every weight is exactly one and the sums are
/// evaluated in the same order as [`crate::geom::stokes_classical`] on the
/// inner integrals.
pub fn frac_stokes<F: QField, G: QField>(
    f: &WeightedTransform<F>,
    g: &WeightedTransform<G>,
    omega: &Box4,
    psi: &StructuralSet,
    spec: &QuadratureSpec,
) -> Result<StokesReport> {
    expect_side(f, MultSide::Left, "the f-side")?;
    expect_side(g, MultSide::Right, "the g-side")?;
    check_inside(omega, f.domain())?;
    check_inside(omega, g.domain())?;
    let w = |y: &Point4| (f.profile.sum(y) + g.profile.sum(y)).exp();
    let boundary = surface_sum(omega, psi, spec, None, |y, nu| g.value(y) * (nu * w(y)) * f.value(y))?;
    let volume = volume_integral(
        omega,
        |y| {
            let df = f.weighted_derivative(psi, y).expect("volume node inside the domain");
            let dg = g.weighted_derivative(psi, y).expect("volume node inside the domain");
            let wy = w(y);
            (g.value(y) * df) * wy + (dg * f.value(y)) * wy
        },
        spec,
        None,
    )?
    .value;
    Ok(StokesReport { boundary, volume, residual: (boundary - volume).norm() })
}

/// Boundary and volume terms of a weighted Borel-Pompeiu reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpParts {
    pub boundary: Quaternion,
    pub volume: Quaternion,
    pub warnings: Vec<String>,
}

impl BpParts {
    pub fn value(&self) -> Quaternion {
        self.boundary - self.volume
    }
}

/// Weighted Borel-Pompeiu terms at `x` before any outer derivative:
/// left, `∫_∂Ω W ν T_f - ∫_Ω W·Sσ⁻¹Df` with `W = K(y-x) e^{Σ(λ(y)-λ(x))}`;
/// right, `∫_∂Ω T_g ν W - ∫_Ω D_r g·ρ⁻¹S·W` with `W = e^{Σ(μ(y)-μ(x))} K(y-x)`.
///
/// `x` may lie anywhere, including on `∂Ω`; the quadrature refines around it.
pub fn weighted_bp_parts<F: QField>(
    w: &WeightedTransform<F>,
    omega: &Box4,
    psi: &StructuralSet,
    x: &Point4,
    spec: &QuadratureSpec,
) -> Result<BpParts> {
    check_inside(omega, w.domain())?;
    let lx = w.profile.sum(x);
    let kernel = |y: &Point4| {
        let u: Point4 = std::array::from_fn(|k| y[k] - x[k]);
        kernel_of_offset(psi, &u) * (w.profile.sum(y) - lx).exp()
    };
    let side = w.side();
    let boundary = surface_sum(omega, psi, spec, Some(x), |y, nu| {
        let v = w.value(y);
        match side {
            MultSide::Left => kernel(y) * nu * v,
            MultSide::Right => v * nu * kernel(y),
        }
    })?;
    let vol = volume_integral(
        omega,
        |y| {
            let d = w.memo_pair(y).expect("volume node inside the domain").1;
            match side {
                MultSide::Left => kernel(y) * d,
                MultSide::Right => d * kernel(y),
            }
        },
        spec,
        Some(x),
    )?;
    Ok(BpParts { boundary, volume: vol.value, warnings: vol.warnings })
}

/// Pre-derivative weighted reconstruction, compared against `T(x)` inside
/// `Ω` and `0` outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedBpReport {
    pub x: Point4,
    pub interior: bool,
    pub parts: BpParts,
    pub target: Quaternion,
    pub residual: f64,
}

pub fn weighted_bp<F: QField>(
    w: &WeightedTransform<F>,
    omega: &Box4,
    psi: &StructuralSet,
    x: &Point4,
    spec: &QuadratureSpec,
) -> Result<WeightedBpReport> {
    let sd = omega.signed_distance_to_boundary(x);
    if sd == 0.0 {
        return Err(Error::Precondition(format!("x = {x:?} lies on the boundary")));
    }
    let interior = sd > 0.0;
    let mut parts = weighted_bp_parts(w, omega, psi, x, spec)?;
    let h = spec.cell_width(omega);
    if sd.abs() < h {
        parts.warnings.push(format!("x is within one cell ({h:.3e}) of the boundary"));
    }
    let target = if interior { w.transform.value(x)? } else { Quaternion::ZERO };
    let residual = (parts.value() - target).norm();
    Ok(WeightedBpReport { x: *x, interior, parts, target, residual })
}

/// Fractional Borel-Pompeiu formula after the outer derivatives
/// `Σ_i D^{1-α_i,σ_i,φ_i}` (from `a_i` on the left, `b_i` on the right)
/// have been applied along each axis line through `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssembledBp {
    pub x: Point4,
    pub interior: bool,
    /// Outer derivatives of the boundary integrals.
    pub boundary: Quaternion,
    /// Outer derivatives of the volume integrals.
    pub volume: Quaternion,
    /// `boundary - volume`.
    pub value: Quaternion,
    /// `Σ_i f(q_0,…,x_i,…,q_3)` inside `Ω`.
    pub axis_values: Quaternion,
    /// The N-term built from the per-axis derivatives of the constant 1.
    pub n_term: Quaternion,
    /// `axis_values + n_term` inside, `0` outside.
    pub target: Quaternion,
    pub residual: f64,
    pub warnings: Vec<String>,
}

/// Resolution of the outer per-axis derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuterSpec {
    /// Mesh of the product quadrature along each axis line.
    pub mesh: Mesh1D,
    /// Differencing step as a fraction of the axis length; `None` uses `1/n`.
    pub rel_step: Option<f64>,
}

impl OuterSpec {
    pub fn new(mesh: Mesh1D) -> Self {
        OuterSpec { mesh, rel_step: None }
    }

    fn step(&self, p: &FracAxisParams) -> f64 {
        match self.rel_step {
            Some(r) => r * (p.upper - p.lower),
            None => rl_step(p, &self.mesh),
        }
    }
}

/// Outer operator `D^{1-α_i,σ_i,φ_i}` of axis `i` on the side of `w`.
fn outer_params<F: QField>(w: &WeightedTransform<F>, i: usize) -> Result<FracAxisParams> {
    let dom = w.domain();
    FracAxisParams::new(1.0 - w.spec.alpha[i], w.spec.sigma_axes[i], w.spec.int_side, dom.a[i], dom.b[i])
}

/// `D^{α,σ,φ}[1](t)` for the outer operator `p` (whose order `α` is the
/// complement of the inner order): closed form `|φ(t)-φ(end)|^{-α}/Γ(1-α)`
/// for `σ = 1`, numerical otherwise.
pub fn outer_derivative_of_one(
    p: &FracAxisParams,
    phi: &WeightFunction,
    t: f64,
    outer: &OuterSpec,
) -> Result<Quaternion> {
    let order = 1.0 - p.alpha;
    if p.sigma == 1.0 {
        let gap = match p.side {
            Side::Left => phi.phi(t) - phi.phi(p.lower),
            Side::Right => phi.phi(p.upper) - phi.phi(t),
        };
        return Ok(Quaternion::real(gap.powf(order - 1.0) / gamma(order)));
    }
    let comp = p.complementary();
    let g = |s: f64| frac_integral_fn(|_| Quaternion::ONE, &comp, phi, s, &outer.mesh);
    outer_prop_deriv(&g, p, phi, t, outer.step(p))
}

/// Memo of the (boundary, volume) pair along one axis line.
struct LineMemo<'a, F: QField> {
    w: &'a WeightedTransform<F>,
    omega: &'a Box4,
    psi: &'a StructuralSet,
    spec: &'a QuadratureSpec,
    x: Point4,
    axis: usize,
    cache: Mutex<HashMap<u64, (Quaternion, Quaternion)>>,
    failure: Mutex<Option<Error>>,
}

impl<F: QField> LineMemo<'_, F> {
    fn get(&self, t: f64) -> (Quaternion, Quaternion) {
        let key = t.to_bits();
        if let Some(v) = self.cache.lock().expect("line cache poisoned").get(&key) {
            return *v;
        }
        let mut y = self.x;
        y[self.axis] = t;
        let v = match weighted_bp_parts(self.w, self.omega, self.psi, &y, self.spec) {
            Ok(p) => (p.boundary, p.volume),
            Err(e) => {
                self.failure.lock().expect("line failure poisoned").get_or_insert(e);
                let nan = Quaternion::new(f64::NAN, f64::NAN, f64::NAN, f64::NAN);
                (nan, nan)
            }
        };
        self.cache.lock().expect("line cache poisoned").insert(key, v);
        v
    }
}

/// Assembled fractional Borel-Pompeiu formula for one side at `x`.
///
/// The formula presumes every axis line from the integral end to `x` stays
/// inside `Ω` whenever `x` does, so `Ω` must share the lower corner `a`
/// (left) or upper corner `b` (right) with the field domain.
pub fn assembled_bp<F: QField>(
    w: &WeightedTransform<F>,
    omega: &Box4,
    psi: &StructuralSet,
    x: &Point4,
    spec: &QuadratureSpec,
    outer: &OuterSpec,
) -> Result<AssembledBp> {
    check_inside(omega, w.domain())?;
    outer.mesh.validate()?;
    let dom = *w.domain();
    let side = w.spec.int_side;
    let corner_ok = match side {
        Side::Left => omega.a == dom.a,
        Side::Right => omega.b == dom.b,
    };
    if !corner_ok {
        return Err(Error::Precondition(format!(
            "Ω must share the {} corner of the field domain",
            if side == Side::Left { "lower" } else { "upper" }
        )));
    }
    dom.check_point(x)?;
    let sd = omega.signed_distance_to_boundary(x);
    if sd == 0.0 {
        return Err(Error::Precondition(format!("x = {x:?} lies on the boundary")));
    }
    let interior = sd > 0.0;
    let mut warnings = Vec::new();
    if !interior {
        let beyond = (0..4).filter(|&k| x[k] < omega.a[k] || x[k] > omega.b[k]).count();
        if beyond < 2 {
            return Err(Error::Precondition(format!(
                "exterior x = {x:?} must lie outside Ω along at least two axes"
            )));
        }
    }
    let mut boundary = Quaternion::ZERO;
    let mut volume = Quaternion::ZERO;
    for i in 0..4 {
        let p = outer_params(w, i)?;
        let phi = w.axis_weight(i);
        let h = outer.step(&p);
        let dist = match side {
            Side::Left => x[i] - p.lower,
            Side::Right => p.upper - x[i],
        };
        if dist < ENDPOINT_BUFFER_STEPS * h {
            warnings.push(format!("axis {i}: x within the endpoint buffer ({ENDPOINT_BUFFER_STEPS} steps of {h:.3e})"));
        }
        let comp = p.complementary();
        let memo = LineMemo {
            w,
            omega,
            psi,
            spec,
            x: *x,
            axis: i,
            cache: Mutex::new(HashMap::new()),
            failure: Mutex::new(None),
        };
        let gb = |s: f64| frac_integral_fn(|t| memo.get(t).0, &comp, &phi, s, &outer.mesh);
        let gv = |s: f64| frac_integral_fn(|t| memo.get(t).1, &comp, &phi, s, &outer.mesh);
        boundary += outer_prop_deriv(&gb, &p, &phi, x[i], h)?;
        volume += outer_prop_deriv(&gv, &p, &phi, x[i], h)?;
        if let Some(e) = memo.failure.into_inner().expect("line failure poisoned") {
            return Err(e);
        }
    }
    let value = boundary - volume;
    let (axis_values, n_term) = if interior {
        let q = *w.transform.base_point();
        let f = w.transform.field();
        let mut axis_values = Quaternion::ZERO;
        let mut d_one = [Quaternion::ZERO; 4];
        for i in 0..4 {
            let mut y = q;
            y[i] = x[i];
            axis_values += f.eval(&y);
            d_one[i] = outer_derivative_of_one(&outer_params(w, i)?, &w.axis_weight(i), x[i], outer)?;
        }
        let mut n_term = Quaternion::ZERO;
        for j in 0..4 {
            let others = (0..4).filter(|&i| i != j).fold(Quaternion::ZERO, |acc, i| acc + d_one[i]);
            let tj = w.transform.axis_term(j, x[j])?;
            n_term += match w.side() {
                MultSide::Left => tj * others,
                MultSide::Right => others * tj,
            };
        }
        (axis_values, n_term)
    } else {
        (Quaternion::ZERO, Quaternion::ZERO)
    };
    let target = axis_values + n_term;
    Ok(AssembledBp {
        x: *x,
        interior,
        boundary,
        volume,
        value,
        axis_values,
        n_term,
        target,
        residual: (value - target).norm(),
        warnings,
    })
}
