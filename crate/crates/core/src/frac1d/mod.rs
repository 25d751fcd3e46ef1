//! Scalar-variable proportional fractional operators acting on
//! quaternion-valued functions of one real variable.
//!
//! All coefficients are real, so quaternion values are handled componentwise.
//! Right-sided derivatives use the reflected proportional derivative
//! `(1-σ)h - σ h'/φ'`, which is the convention under which
//! `D_b ∘ I_b = id` holds.

pub mod quadrature;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quat::Quaternion;
use crate::special::gamma;

pub use quadrature::{pairwise_sum, product_quadrature, Mesh1D, SingularEnd};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type QuatFn = Arc<dyn Fn(f64) -> Quaternion + Send + Sync>;

/// Endpoint buffer width, in units of the differencing step.
pub const ENDPOINT_BUFFER_STEPS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Integration from the lower bound `a` up to `t`.
    Left,
    /// Integration from `t` up to the upper bound `b`.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    RiemannLiouville,
    Caputo,
}

/// A value together with accuracy warnings collected while computing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluated<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

impl<T> Evaluated<T> {
    pub fn clean(value: T) -> Self {
        Evaluated { value, warnings: Vec::new() }
    }
}

/// A quaternion-valued function on `[a, b]`, optionally with its derivative.
#[derive(Clone)]
pub struct Function1D {
    eval: QuatFn,
    deriv: Option<QuatFn>,
    a: f64,
    b: f64,
}

impl std::fmt::Debug for Function1D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Function1D")
            .field("a", &self.a)
            .field("b", &self.b)
            .field("has_deriv", &self.deriv.is_some())
            .finish()
    }
}

impl Function1D {
    pub fn new(eval: QuatFn, deriv: Option<QuatFn>, a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::Config(format!("function domain [{a}, {b}] is empty")));
        }
        Ok(Function1D { eval, deriv, a, b })
    }

    pub fn from_fn<F>(f: F, a: f64, b: f64) -> Result<Self>
    where
        F: Fn(f64) -> Quaternion + Send + Sync + 'static,
    {
        Function1D::new(Arc::new(f), None, a, b)
    }

    pub fn with_deriv<F, G>(f: F, df: G, a: f64, b: f64) -> Result<Self>
    where
        F: Fn(f64) -> Quaternion + Send + Sync + 'static,
        G: Fn(f64) -> Quaternion + Send + Sync + 'static,
    {
        Function1D::new(Arc::new(f), Some(Arc::new(df)), a, b)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn has_deriv(&self) -> bool {
        self.deriv.is_some()
    }

    fn check(&self, t: f64) -> Result<()> {
        let slack = 1e-12 * (self.b - self.a);
        if t < self.a - slack || t > self.b + slack || t.is_nan() {
            return Err(Error::Domain(format!(
                "t = {t} outside [{}, {}]",
                self.a, self.b
            )));
        }
        Ok(())
    }

    pub fn value(&self, t: f64) -> Result<Quaternion> {
        self.check(t)?;
        Ok((self.eval)(t))
    }

    /// Unchecked evaluation, used inside quadrature loops.
    pub fn eval(&self, t: f64) -> Quaternion {
        (self.eval)(t)
    }

    /// Derivative at `t`; the flag is `true` when a finite-difference
    /// fallback was used.
    pub fn derivative(&self, t: f64) -> Result<(Quaternion, bool)> {
        self.check(t)?;
        Ok(self.derivative_unchecked(t))
    }

    fn derivative_unchecked(&self, t: f64) -> (Quaternion, bool) {
        match &self.deriv {
            Some(d) => (d(t), false),
            None => {
                let h = 1e-5 * (self.b - self.a);
                (fd_derivative(&*self.eval, t, h, self.a, self.b), true)
            }
        }
    }
}

/// Second-order difference of `g` at `t` with step `h`, switching to a
/// one-sided stencil when `t ± h` leaves `[lo, hi]`.
pub fn fd_derivative<G>(g: &G, t: f64, h: f64, lo: f64, hi: f64) -> Quaternion
where
    G: Fn(f64) -> Quaternion + ?Sized,
{
    try_fd_derivative(&|s| Ok(g(s)), t, h, lo, hi).expect("infallible")
}

/// Fallible form of [`fd_derivative`].
pub fn try_fd_derivative<G>(g: &G, t: f64, h: f64, lo: f64, hi: f64) -> Result<Quaternion>
where
    G: Fn(f64) -> Result<Quaternion> + ?Sized,
{
    Ok(if t - h >= lo && t + h <= hi {
        (g(t + h)? - g(t - h)?) / (2.0 * h)
    } else if t - h < lo {
        (g(t)? * -3.0 + g(t + h)? * 4.0 - g(t + 2.0 * h)?) / (2.0 * h)
    } else {
        (g(t)? * 3.0 - g(t - h)? * 4.0 + g(t - 2.0 * h)?) / (2.0 * h)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightLabel {
    Identity,
    /// `slope·t + offset`
    Linear { slope: f64, offset: f64 },
    /// `t^μ / μ`
    Power { mu: f64 },
    Log,
    Custom,
}

/// A scalar weight `φ` with positive derivative on the working interval.
#[derive(Clone)]
pub struct WeightFunction {
    phi: RealFn,
    phi_prime: RealFn,
    label: WeightLabel,
}

impl std::fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "WeightFunction({:?})", self.label)
    }
}

impl WeightFunction {
    pub fn identity() -> Self {
        WeightFunction {
            phi: Arc::new(|t| t),
            phi_prime: Arc::new(|_| 1.0),
            label: WeightLabel::Identity,
        }
    }

    pub fn linear(slope: f64, offset: f64) -> Self {
        WeightFunction {
            phi: Arc::new(move |t| slope * t + offset),
            phi_prime: Arc::new(move |_| slope),
            label: WeightLabel::Linear { slope, offset },
        }
    }

    /// `t^μ / μ` (Katugampola weight).
    pub fn power(mu: f64) -> Self {
        WeightFunction {
            phi: Arc::new(move |t| t.powf(mu) / mu),
            phi_prime: Arc::new(move |t| t.powf(mu - 1.0)),
            label: WeightLabel::Power { mu },
        }
    }

    /// `ln t` (Hadamard weight).
    pub fn log() -> Self {
        WeightFunction {
            phi: Arc::new(|t| t.ln()),
            phi_prime: Arc::new(|t| 1.0 / t),
            label: WeightLabel::Log,
        }
    }

    pub fn custom(phi: RealFn, phi_prime: RealFn) -> Self {
        WeightFunction { phi, phi_prime, label: WeightLabel::Custom }
    }

    pub fn from_label(label: WeightLabel) -> Result<Self> {
        match label {
            WeightLabel::Identity => Ok(Self::identity()),
            WeightLabel::Linear { slope, offset } => Ok(Self::linear(slope, offset)),
            WeightLabel::Power { mu } => Ok(Self::power(mu)),
            WeightLabel::Log => Ok(Self::log()),
            WeightLabel::Custom => Err(Error::Config(
                "custom weights cannot be built from a label".into(),
            )),
        }
    }

    pub fn label(&self) -> WeightLabel {
        self.label
    }

    /// Whether `φ'` is constant.
    pub fn is_affine(&self) -> bool {
        match self.label {
            WeightLabel::Identity | WeightLabel::Linear { .. } => true,
            WeightLabel::Power { mu } => mu == 1.0,
            _ => false,
        }
    }

    pub fn phi(&self, t: f64) -> f64 {
        (self.phi)(t)
    }

    pub fn phi_prime(&self, t: f64) -> f64 {
        (self.phi_prime)(t)
    }

    /// Checks `φ' > 0` at the mesh nodes of `[lo, hi]`.
    pub fn check_increasing(&self, lo: f64, hi: f64, mesh: &Mesh1D) -> Result<()> {
        for s in mesh.nodes(lo, hi) {
            let d = self.phi_prime(s);
            if !(d > 0.0) || !self.phi(s).is_finite() {
                return Err(Error::Precondition(format!(
                    "weight derivative {d} is not positive at {s}"
                )));
            }
        }
        Ok(())
    }
}

/// Order, proportion and side of a 1D fractional operator on `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracAxisParams {
    pub alpha: f64,
    pub sigma: f64,
    pub side: Side,
    pub lower: f64,
    pub upper: f64,
}

impl FracAxisParams {
    pub fn new(alpha: f64, sigma: f64, side: Side, lower: f64, upper: f64) -> Result<Self> {
        let p = FracAxisParams { alpha, sigma, side, lower, upper };
        p.validate()?;
        Ok(p)
    }

    pub fn left(alpha: f64, sigma: f64, a: f64, b: f64) -> Result<Self> {
        Self::new(alpha, sigma, Side::Left, a, b)
    }

    pub fn right(alpha: f64, sigma: f64, a: f64, b: f64) -> Result<Self> {
        Self::new(alpha, sigma, Side::Right, a, b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("order alpha={} outside (0,1)", self.alpha)));
        }
        check_sigma(self.sigma)?;
        if !(self.lower < self.upper) {
            return Err(Error::Config(format!(
                "interval [{}, {}] is empty",
                self.lower, self.upper
            )));
        }
        Ok(())
    }

    /// Same operator with order `1 - α`.
    pub fn complementary(&self) -> Self {
        FracAxisParams { alpha: 1.0 - self.alpha, ..*self }
    }

    /// The bound the integral starts from.
    pub fn bound(&self) -> f64 {
        match self.side {
            Side::Left => self.lower,
            Side::Right => self.upper,
        }
    }
}

pub(crate) fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::Config(format!("proportion sigma={sigma} outside (0,1]")));
    }
    Ok(())
}

/// `(σ-1)/σ`, exactly zero for `σ = 1`.
pub fn exp_rate(sigma: f64) -> f64 {
    if sigma == 1.0 {
        0.0
    } else {
        (sigma - 1.0) / sigma
    }
}

/// Proportional derivative `(1-σ)f(t) + σf'(t)`.
pub fn prop_deriv(f: &Function1D, sigma: f64, t: f64) -> Result<Quaternion> {
    check_sigma(sigma)?;
    let (d, _) = f.derivative(t)?;
    Ok(f.value(t)? * (1.0 - sigma) + d * sigma)
}

/// Proportional derivative with respect to `φ`: `(1-σ)f(t) + σf'(t)/φ'(t)`.
pub fn prop_deriv_wrt(f: &Function1D, phi: &WeightFunction, sigma: f64, t: f64) -> Result<Quaternion> {
    check_sigma(sigma)?;
    let dphi = positive_phi_prime(phi, t)?;
    let (d, _) = f.derivative(t)?;
    Ok(f.value(t)? * (1.0 - sigma) + d * (sigma / dphi))
}

/// Auxiliary operator `φ'(t)σ⁻¹(1-σ)f(t) + f'(t)`, which satisfies
/// `d/dt (e^{φσ⁻¹(1-σ)} f) = e^{φσ⁻¹(1-σ)} E f`.
pub fn e_op(f: &Function1D, phi: &WeightFunction, sigma: f64, t: f64) -> Result<Quaternion> {
    check_sigma(sigma)?;
    let dphi = positive_phi_prime(phi, t)?;
    let (d, _) = f.derivative(t)?;
    Ok(f.value(t)? * (dphi * (1.0 - sigma) / sigma) + d)
}

fn positive_phi_prime(phi: &WeightFunction, t: f64) -> Result<f64> {
    let d = phi.phi_prime(t);
    if !(d > 0.0) {
        return Err(Error::Precondition(format!("phi'({t}) = {d} is not positive")));
    }
    Ok(d)
}

/// Fractional proportional integral of an arbitrary callable, with respect
/// to `φ`, on the side and interval described by `p`.
///
/// Left: `1/(σ^αΓ(α)) ∫_a^t e^{c(φ(t)-φ(τ))} (φ(t)-φ(τ))^{α-1} f(τ) φ'(τ) dτ`,
/// right mirrored on `[t, b]`, with `c = (σ-1)/σ`.
pub fn frac_integral_fn<F>(
    f: F,
    p: &FracAxisParams,
    phi: &WeightFunction,
    t: f64,
    mesh: &Mesh1D,
) -> Result<Quaternion>
where
    F: Fn(f64) -> Quaternion + Sync,
{
    let slack = 1e-12 * (p.upper - p.lower);
    let t = match p.side {
        Side::Left if t < p.lower - slack => {
            return Err(Error::Domain(format!("t = {t} below the lower bound {}", p.lower)))
        }
        Side::Right if t > p.upper + slack => {
            return Err(Error::Domain(format!("t = {t} above the upper bound {}", p.upper)))
        }
        Side::Left => t.max(p.lower),
        Side::Right => t.min(p.upper),
    };
    let alpha = p.alpha;
    let c = exp_rate(p.sigma);
    let scale = 1.0 / (p.sigma.powf(alpha) * gamma(alpha));
    let phi_t = phi.phi(t);
    let dphi_t = phi.phi_prime(t);
    if phi.is_affine() {
        // constant ratio and φ': one exponential per node at most
        let slope = dphi_t;
        let w0 = slope.powf(alpha - 1.0) * slope;
        let rate = c * slope;
        let value = match p.side {
            Side::Left => {
                let regular = |tau: f64| {
                    let w = if rate == 0.0 { w0 } else { (rate * (t - tau)).exp() * w0 };
                    f(tau) * w
                };
                product_quadrature(regular, alpha, p.lower, t, mesh, SingularEnd::Upper)?
            }
            Side::Right => {
                let regular = |tau: f64| {
                    let w = if rate == 0.0 { w0 } else { (rate * (tau - t)).exp() * w0 };
                    f(tau) * w
                };
                product_quadrature(regular, alpha, t, p.upper, mesh, SingularEnd::Lower)?
            }
        };
        return Ok(value * scale);
    }
    let value = match p.side {
        Side::Left => {
            let regular = |tau: f64| {
                let gap = t - tau;
                let dphi = phi_t - phi.phi(tau);
                let ratio = if gap > 0.0 && dphi > 0.0 { dphi / gap } else { dphi_t };
                let w = (c * dphi + (alpha - 1.0) * ratio.ln()).exp() * phi.phi_prime(tau);
                f(tau) * w
            };
            product_quadrature(regular, alpha, p.lower, t, mesh, SingularEnd::Upper)?
        }
        Side::Right => {
            let regular = |tau: f64| {
                let gap = tau - t;
                let dphi = phi.phi(tau) - phi_t;
                let ratio = if gap > 0.0 && dphi > 0.0 { dphi / gap } else { dphi_t };
                let w = (c * dphi + (alpha - 1.0) * ratio.ln()).exp() * phi.phi_prime(tau);
                f(tau) * w
            };
            product_quadrature(regular, alpha, t, p.upper, mesh, SingularEnd::Lower)?
        }
    };
    Ok(value * scale)
}

/// Fractional proportional integral of a [`Function1D`]; `φ = identity`
/// recovers the plain proportional integrals.
pub fn prop_frac_integral(
    f: &Function1D,
    p: &FracAxisParams,
    phi: &WeightFunction,
    t: f64,
    mesh: &Mesh1D,
) -> Result<Quaternion> {
    p.validate()?;
    let (a, b) = f.domain();
    if p.lower < a - 1e-12 || p.upper > b + 1e-12 {
        return Err(Error::Domain(format!(
            "operator interval [{}, {}] exceeds the function domain [{a}, {b}]",
            p.lower, p.upper
        )));
    }
    phi.check_increasing(p.lower, p.upper, mesh)?;
    frac_integral_fn(|s| f.eval(s), p, phi, t, mesh)
}

/// Differencing step used by the Riemann-Liouville outer derivative.
pub fn rl_step(p: &FracAxisParams, mesh: &Mesh1D) -> f64 {
    (p.upper - p.lower) / mesh.n as f64
}

/// Proportional derivative (reflected for the right side) of a callable `g`
/// at `t`, by differencing on `[p.lower, p.upper]`.
pub fn outer_prop_deriv<G>(
    g: &G,
    p: &FracAxisParams,
    phi: &WeightFunction,
    t: f64,
    h: f64,
) -> Result<Quaternion>
where
    G: Fn(f64) -> Result<Quaternion> + ?Sized,
{
    let dphi = positive_phi_prime(phi, t)?;
    let value = if p.sigma == 1.0 { Quaternion::ZERO } else { g(t)? };
    let d = try_fd_derivative(g, t, h, p.lower, p.upper)?;
    Ok(match p.side {
        Side::Left => value * (1.0 - p.sigma) + d * (p.sigma / dphi),
        Side::Right => value * (1.0 - p.sigma) - d * (p.sigma / dphi),
    })
}

fn buffer_warning(p: &FracAxisParams, t: f64, h: f64) -> Option<String> {
    let dist = match p.side {
        Side::Left => t - p.lower,
        Side::Right => p.upper - t,
    };
    (dist < ENDPOINT_BUFFER_STEPS * h).then(|| {
        format!(
            "t = {t} lies within the endpoint buffer ({} steps of {h:.3e}) of {}",
            ENDPOINT_BUFFER_STEPS,
            p.bound()
        )
    })
}

/// Riemann-Liouville fractional proportional derivative of an arbitrary
/// callable: the proportional derivative of the order `1-α` integral.
pub fn rl_deriv_fn<F>(
    f: F,
    p: &FracAxisParams,
    phi: &WeightFunction,
    t: f64,
    mesh: &Mesh1D,
) -> Result<Evaluated<Quaternion>>
where
    F: Fn(f64) -> Quaternion + Sync,
{
    let comp = p.complementary();
    let h = rl_step(p, mesh);
    let g = |s: f64| frac_integral_fn(&f, &comp, phi, s, mesh);
    let value = outer_prop_deriv(&g, p, phi, t, h)?;
    let warnings = buffer_warning(p, t, h).into_iter().collect();
    Ok(Evaluated { value, warnings })
}

/// Fractional proportional derivative of a [`Function1D`] in the
/// Riemann-Liouville or Caputo sense.
pub fn prop_frac_deriv(
    f: &Function1D,
    p: &FracAxisParams,
    phi: &WeightFunction,
    sense: Sense,
    t: f64,
    mesh: &Mesh1D,
) -> Result<Evaluated<Quaternion>> {
    p.validate()?;
    mesh.validate()?;
    phi.check_increasing(p.lower, p.upper, mesh)?;
    if t < p.lower - 1e-12 || t > p.upper + 1e-12 {
        return Err(Error::Domain(format!(
            "t = {t} outside [{}, {}]",
            p.lower, p.upper
        )));
    }
    match sense {
        Sense::RiemannLiouville => rl_deriv_fn(|s| f.eval(s), p, phi, t, mesh),
        Sense::Caputo => {
            let comp = p.complementary();
            let sign = match p.side {
                Side::Left => 1.0,
                Side::Right => -1.0,
            };
            let inner = |s: f64| {
                let (d, _) = f.derivative_unchecked(s);
                f.eval(s) * (1.0 - p.sigma) + d * (sign * p.sigma / phi.phi_prime(s))
            };
            let value = frac_integral_fn(inner, &comp, phi, t, mesh)?;
            let mut warnings = Vec::new();
            if !f.has_deriv() {
                warnings.push("derivative approximated by finite differences".to_string());
            }
            Ok(Evaluated { value, warnings })
        }
    }
}
