//! Quaternionic proportional fractional Fueter-type operators.
//!
//! Riemann-Liouville variants apply the quaternionic proportional derivative
//! to a by-coordinate integral of order `1-α⃗`; Caputo variants integrate the
//! proportional derivative of `f`. The integral side (`a` or `b`) and the
//! multiplication side of the quaternionic factors are independent choices,
//! giving eight variants, each optionally taken with respect to a weight `φ`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field4d::{
    fueter, prop_d_from_parts, gradient, AxisOrders, AxisWeights, Box4, CoordTransform,
    FracVectorParams, MultSide, Point4, PropDField, QField,
};
use crate::frac1d::{Evaluated, Mesh1D, Sense, Side, ENDPOINT_BUFFER_STEPS};
use crate::quat::{Quaternion, StructuralSet};

/// `σ⁻¹ - 1`, equal to both `σ⁻¹(1-σ)` and `(1-σ)σ⁻¹`.
pub fn delta_of(sigma_quat: Quaternion) -> Result<Quaternion> {
    if sigma_quat == Quaternion::ZERO {
        return Err(Error::Domain("proportion quaternion is zero".into()));
    }
    if sigma_quat == Quaternion::ONE {
        return Ok(Quaternion::ZERO);
    }
    Ok(sigma_quat.inv()? - Quaternion::ONE)
}

/// One of the eight operator variants, optionally with respect to `φ`.
#[derive(Debug, Clone)]
pub struct OperatorSpec {
    pub sense: Sense,
    pub int_side: Side,
    pub mult_side: MultSide,
    /// Orders `α_i` of the fractional derivative (the inner integral has order `1-α_i`).
    pub alpha: [f64; 4],
    pub sigma_axes: [f64; 4],
    pub sigma_quat: Quaternion,
    pub phi: Option<AxisWeights>,
}

impl OperatorSpec {
    /// Operator built from the f-side parameters `(α⃗, σ⃗, σ)`.
    pub fn f_side(
        params: &FracVectorParams,
        sense: Sense,
        int_side: Side,
        mult_side: MultSide,
        phi: Option<AxisWeights>,
    ) -> Self {
        OperatorSpec {
            sense,
            int_side,
            mult_side,
            alpha: params.alpha,
            sigma_axes: params.sigma_axes,
            sigma_quat: params.sigma_quat,
            phi,
        }
    }

    /// Operator built from the g-side parameters `(β⃗, ρ⃗, ρ)`.
    pub fn g_side(
        params: &FracVectorParams,
        sense: Sense,
        int_side: Side,
        mult_side: MultSide,
        phi: Option<AxisWeights>,
    ) -> Self {
        OperatorSpec {
            sense,
            int_side,
            mult_side,
            alpha: params.beta,
            sigma_axes: params.rho_axes,
            sigma_quat: params.rho_quat,
            phi,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for k in 0..4 {
            if !(self.alpha[k] > 0.0 && self.alpha[k] < 1.0) {
                return Err(Error::Config(format!("alpha[{k}] = {} outside (0,1)", self.alpha[k])));
            }
            if !(self.sigma_axes[k] > 0.0 && self.sigma_axes[k] <= 1.0) {
                return Err(Error::Config(format!(
                    "sigma[{k}] = {} outside (0,1]",
                    self.sigma_axes[k]
                )));
            }
        }
        if self.sigma_quat.norm() == 0.0 {
            return Err(Error::Config("quaternionic proportion is zero".into()));
        }
        Ok(())
    }

    /// Orders and proportions of the inner integral (`1-α⃗`, `σ⃗`).
    pub fn inner_orders(&self) -> AxisOrders {
        AxisOrders::new(self.alpha.map(|a| 1.0 - a), self.sigma_axes)
    }

    /// The inner by-coordinate integral of `f` at base point `q`.
    pub fn transform<F: QField>(&self, f: F, q: Point4, mesh: Mesh1D) -> Result<CoordTransform<F>> {
        self.validate()?;
        CoordTransform::new(f, &self.inner_orders(), self.phi.as_ref(), self.int_side, q, mesh)
    }

    fn with_sense(&self, sense: Sense) -> Self {
        OperatorSpec { sense, ..self.clone() }
    }
}

fn buffer_warnings(dom: &Box4, side: Side, steps: impl Fn(usize) -> f64, x: &Point4) -> Vec<String> {
    (0..4)
        .filter_map(|k| {
            let h = steps(k);
            let dist = match side {
                Side::Left => x[k] - dom.a[k],
                Side::Right => dom.b[k] - x[k],
            };
            (dist < ENDPOINT_BUFFER_STEPS * h).then(|| {
                format!("axis {k}: x = {} within the endpoint buffer ({ENDPOINT_BUFFER_STEPS} steps of {h:.3e})", x[k])
            })
        })
        .collect()
}

/// Applies the quaternionic proportional derivative of `spec` to an
/// already-built transform at `x`.
pub fn prop_d_of_transform<F: QField>(
    t: &CoordTransform<F>,
    psi: &StructuralSet,
    spec: &OperatorSpec,
    x: &Point4,
) -> Result<Quaternion> {
    let d = gradient(t, x)?;
    let v = t.value(x)?;
    prop_d_from_parts(psi, spec.sigma_quat, spec.phi.as_ref(), spec.mult_side, x, v, &d)
}

/// Evaluates the fractional Fueter-type operator `spec` of `f` at `x` with
/// base point `q`.
pub fn frac_fueter<F: QField>(
    f: F,
    psi: &StructuralSet,
    spec: &OperatorSpec,
    q: &Point4,
    x: &Point4,
    mesh: &Mesh1D,
) -> Result<Evaluated<Quaternion>> {
    spec.validate()?;
    let dom = *f.domain();
    dom.check_point(x)?;
    match spec.sense {
        Sense::RiemannLiouville => {
            let t = spec.transform(f, *q, *mesh)?;
            let value = prop_d_of_transform(&t, psi, spec, x)?;
            let warnings = buffer_warnings(&dom, spec.int_side, |k| t.fd_step(k), x);
            Ok(Evaluated { value, warnings })
        }
        Sense::Caputo => {
            let g = PropDField {
                inner: f,
                psi: *psi,
                sigma_quat: spec.sigma_quat,
                phi: spec.phi.clone(),
                side: spec.mult_side,
            };
            let t = spec.transform(g, *q, *mesh)?;
            let value = t.value(x)?;
            if !value.is_finite() {
                return Err(Error::Precondition(
                    "proportional derivative of f is not finite on an integration line".into(),
                ));
            }
            Ok(Evaluated::clean(value))
        }
    }
}

/// Auxiliary operator `E`: `S δ T + ψD T` (left) or `T δ S + ψD_r T`
/// (right), where `T` is the inner integral, `δ = σ⁻¹ - 1` and `S = Σφ_k'`.
pub fn e_frac<F: QField>(
    f: F,
    psi: &StructuralSet,
    spec: &OperatorSpec,
    q: &Point4,
    x: &Point4,
    mesh: &Mesh1D,
) -> Result<Quaternion> {
    let w = spec
        .phi
        .as_ref()
        .ok_or_else(|| Error::Config("the E operator needs a weight function".into()))?;
    if spec.sense != Sense::RiemannLiouville {
        return Err(Error::Unsupported("the E operator is defined on the inner integral only".into()));
    }
    let t = spec.transform(f, *q, *mesh)?;
    e_of_transform(&t, psi, spec.sigma_quat, w, spec.mult_side, x)
}

pub(crate) fn e_of_transform<F: QField>(
    t: &CoordTransform<F>,
    psi: &StructuralSet,
    sigma_quat: Quaternion,
    w: &AxisWeights,
    side: MultSide,
    x: &Point4,
) -> Result<Quaternion> {
    w.check_positive(x)?;
    let s = w.slope_sum(x);
    let delta = delta_of(sigma_quat)?;
    let v = t.value(x)?;
    let d = fueter(t, psi, side, x)?;
    Ok(match side {
        MultSide::Left => delta * v * s + d,
        MultSide::Right => v * delta * s + d,
    })
}

/// Which construction produced a [`WeightProfile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileClass {
    /// `δ = 0`: every profile is zero.
    ZeroProportion,
    /// Every axis weight is affine (includes the unweighted case `S ≡ 1`).
    LinearPhi,
    /// Exactly one axis weight is nonlinear and `δ` lives on that axis.
    SingleNonlinearAxis { axis: usize },
    /// No separable profile exists.
    None,
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Per-axis exponents `λ_k` with `Σψ_k λ_k'(x_k) = S(x) δ`.
#[derive(Clone)]
pub struct WeightProfile {
    pub lambda: [ScalarFn; 4],
    pub lambda_prime: [ScalarFn; 4],
    pub exists: bool,
    pub class: ProfileClass,
    pub delta: Quaternion,
}

impl std::fmt::Debug for WeightProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WeightProfile")
            .field("exists", &self.exists)
            .field("class", &self.class)
            .field("delta", &self.delta)
            .finish()
    }
}

impl WeightProfile {
    /// `Σ_k λ_k(x_k)`.
    pub fn sum(&self, x: &Point4) -> f64 {
        (0..4).map(|k| (self.lambda[k])(x[k])).sum()
    }

    /// Largest `|λ_k'(x_k) - S(x)δ_k|` over the axes (zero when the defining
    /// relation holds).
    pub fn defect(&self, psi: &StructuralSet, phi: Option<&AxisWeights>, x: &Point4) -> f64 {
        let s = phi.map_or(1.0, |w| w.slope_sum(x));
        let dk = psi.to_coords(self.delta);
        (0..4)
            .map(|k| ((self.lambda_prime[k])(x[k]) - s * dk[k]).abs())
            .fold(0.0, f64::max)
    }
}

const DELTA_SUPPORT_TOL: f64 = 1e-14;

/// Builds `λ_k` for the proportion `σ` and weight `φ` (`None` meaning the
/// unweighted operators, `S ≡ 1`). Returns `exists = false` when no
/// separable profile exists.
pub fn lambda_profile(
    psi: &StructuralSet,
    phi: Option<&AxisWeights>,
    sigma_quat: Quaternion,
) -> Result<WeightProfile> {
    let delta = delta_of(sigma_quat)?;
    let dk = psi.to_coords(delta);
    let zero: ScalarFn = Arc::new(|_| 0.0);
    let zeros = || -> [ScalarFn; 4] { std::array::from_fn(|_| zero.clone()) };
    if dk.iter().all(|d| d.abs() <= DELTA_SUPPORT_TOL) {
        return Ok(WeightProfile {
            lambda: zeros(),
            lambda_prime: zeros(),
            exists: true,
            class: ProfileClass::ZeroProportion,
            delta,
        });
    }
    let nonlinear: Vec<usize> = match phi {
        None => Vec::new(),
        Some(w) => (0..4).filter(|&k| !w.axes[k].is_affine()).collect(),
    };
    let slope = |k: usize| phi.map_or(1.0, |w| w.axes[k].phi_prime(0.0));
    match nonlinear.as_slice() {
        [] => {
            let s: f64 = match phi {
                None => 1.0,
                Some(_) => (0..4).map(slope).sum(),
            };
            let lambda = std::array::from_fn(|k| {
                let c = s * dk[k];
                Arc::new(move |t: f64| c * t) as ScalarFn
            });
            let lambda_prime = std::array::from_fn(|k| {
                let c = s * dk[k];
                Arc::new(move |_: f64| c) as ScalarFn
            });
            Ok(WeightProfile { lambda, lambda_prime, exists: true, class: ProfileClass::LinearPhi, delta })
        }
        [axis] => {
            let axis = *axis;
            let supported_elsewhere =
                (0..4).any(|k| k != axis && dk[k].abs() > DELTA_SUPPORT_TOL);
            if supported_elsewhere {
                return Ok(nonexistent(delta));
            }
            let w = phi.expect("nonlinear axes imply a weight").axes[axis].clone();
            let rest: f64 = (0..4).filter(|&k| k != axis).map(slope).sum();
            let d = dk[axis];
            let mut lambda = zeros();
            let mut lambda_prime = zeros();
            let w1 = w.clone();
            lambda[axis] = Arc::new(move |t| d * (w1.phi(t) + rest * t));
            lambda_prime[axis] = Arc::new(move |t| d * (w.phi_prime(t) + rest));
            Ok(WeightProfile {
                lambda,
                lambda_prime,
                exists: true,
                class: ProfileClass::SingleNonlinearAxis { axis },
                delta,
            })
        }
        _ => Ok(nonexistent(delta)),
    }
}

fn nonexistent(delta: Quaternion) -> WeightProfile {
    let zero: ScalarFn = Arc::new(|_| f64::NAN);
    WeightProfile {
        lambda: std::array::from_fn(|_| zero.clone()),
        lambda_prime: std::array::from_fn(|_| zero.clone()),
        exists: false,
        class: ProfileClass::None,
        delta,
    }
}

/// Field `y ↦ e^{Σλ_k(y_k)} F(y)`.
pub struct ExpWeighted<'a, F: QField> {
    pub inner: &'a F,
    pub profile: &'a WeightProfile,
}

impl<F: QField> QField for ExpWeighted<'_, F> {
    fn domain(&self) -> &Box4 {
        self.inner.domain()
    }
    fn eval(&self, x: &Point4) -> Quaternion {
        self.inner.eval(x) * self.profile.sum(x).exp()
    }
    fn fd_step(&self, k: usize) -> f64 {
        self.inner.fd_step(k)
    }
}

/// Both sides of the exponential conjugation identity at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugationValues {
    /// The operator evaluated directly.
    pub direct: Quaternion,
    /// The exponential-conjugated Fueter form.
    pub conjugated: Quaternion,
}

impl ConjugationValues {
    pub fn residual(&self) -> f64 {
        (self.direct - self.conjugated).norm()
    }
}

/// Evaluates the direct operator and its exponential-conjugation form on an
/// already-built transform.
pub fn conjugation_values<F: QField>(
    t: &CoordTransform<F>,
    psi: &StructuralSet,
    spec: &OperatorSpec,
    profile: &WeightProfile,
    x: &Point4,
) -> Result<ConjugationValues> {
    if !profile.exists {
        return Err(Error::Unsupported("λ profile does not exist".into()));
    }
    let direct = prop_d_of_transform(t, psi, spec, x)?;
    let weighted = ExpWeighted { inner: t, profile };
    let d = fueter(&weighted, psi, spec.mult_side, x)?;
    let s_inv = match &spec.phi {
        Some(w) => 1.0 / w.slope_sum(x),
        None => 1.0,
    };
    let back = (-profile.sum(x)).exp();
    let conjugated = match spec.mult_side {
        MultSide::Left => spec.sigma_quat * d * (back * s_inv),
        MultSide::Right => d * (back * s_inv) * spec.sigma_quat,
    };
    Ok(ConjugationValues { direct, conjugated })
}

/// `|direct - conjugated|` for the Riemann-Liouville operator `spec`.
pub fn conjugation_residual<F: QField>(
    f: F,
    psi: &StructuralSet,
    spec: &OperatorSpec,
    q: &Point4,
    x: &Point4,
    mesh: &Mesh1D,
) -> Result<f64> {
    if spec.sense != Sense::RiemannLiouville {
        return Err(Error::Unsupported(
            "the conjugation identity concerns the Riemann-Liouville operators".into(),
        ));
    }
    let profile = lambda_profile(psi, spec.phi.as_ref(), spec.sigma_quat)?;
    if !profile.exists {
        return Err(Error::Unsupported("λ profile does not exist".into()));
    }
    let t = spec.transform(f, *q, *mesh)?;
    Ok(conjugation_values(&t, psi, spec, &profile, x)?.residual())
}

/// Caputo counterpart of a Riemann-Liouville spec (and vice versa).
pub fn switch_sense(spec: &OperatorSpec) -> OperatorSpec {
    match spec.sense {
        Sense::RiemannLiouville => spec.with_sense(Sense::Caputo),
        Sense::Caputo => spec.with_sense(Sense::RiemannLiouville),
    }
}

/// A convention fixed where a formula admits a competing reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Erratum {
    pub id: &'static str,
    pub location: &'static str,
    pub alternative: &'static str,
    pub implemented: &'static str,
}

/// Machine-readable table of the conventions this crate implements.
pub const ERRATA: &[Erratum] = &[
    Erratum {
        id: "bp_kernel_order",
        location: "fractional Borel-Pompeiu formula (unweighted), kernel and N-term definitions",
        alternative: "outer per-axis derivatives of order alpha_i (beta_i)",
        implemented: "order 1-alpha_i (1-beta_i), as produced by the derivation",
    },
    Erratum {
        id: "bp_g_kernel_exponent",
        location: "fractional Borel-Pompeiu formulas, right-side (b) kernel",
        alternative: "exponential weight built from delta_k (lambda_k)",
        implemented: "exponential weight built from gamma_k (mu_k), matching the g-side derivation",
    },
    Erratum {
        id: "g_operator_argument",
        location: "fractional Stokes/Borel-Pompeiu statements and Cauchy corollaries",
        alternative: "right-side b-derivative applied to f",
        implemented: "applied to g",
    },
    Erratum {
        id: "reduction_order",
        location: "closing remark, Katugampola reduction item",
        alternative: "(1 - psi_0 - psi_1 - psi_2 - psi_3) times the order-alpha integral",
        implemented: "order 1-alpha integral, as produced by expanding the definition",
    },
    Erratum {
        id: "nu_sign",
        location: "surface form nu in the classical Stokes formula",
        alternative: "-sgn(psi) sum (-1)^k psi_k dx_k-hat",
        implemented: "per-face weight +n_k psi_k (outward normal), fixed by calibration against Stokes",
    },
    Erratum {
        id: "right_rl_derivative_sign",
        location: "scalar right-sided proportional derivative used in the b-side inversion",
        alternative: "(1-sigma) f + sigma f'/phi'",
        implemented: "(1-sigma) f - sigma f'/phi' (the reflected form for which D_b I_b = id)",
    },
    Erratum {
        id: "bp_domain_corner",
        location: "fractional Borel-Pompeiu formulas, domain hypothesis",
        alternative: "any open domain inside the box",
        implemented: "the outer per-axis derivatives need the identity on whole coordinate segments, so the f-part needs the lower corner of the domain at a (the g-part the upper corner at b)",
    },
];
