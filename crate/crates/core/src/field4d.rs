//! Quaternion-valued fields on a 4D box: finite-difference Fueter operators,
//! quaternionic proportional derivatives and by-coordinate fractional
//! integrals with a fixed base point.
//!
//! Points are 4-vectors of ψ-coordinates. The by-coordinate integral with base
//! point `q` is `Σ_i I_i[t ↦ f(q_0,…,t,…,q_3)](x_i)`, a separable function of
//! `x`; [`CoordTransform`] caches its axis terms so that tensor-grid
//! quadratures over `x` only pay for one 1D integral per distinct coordinate.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frac1d::{frac_integral_fn, FracAxisParams, Mesh1D, Side, WeightFunction};
use crate::quat::{Quaternion, StructuralSet};

/// A point in ψ-coordinates.
pub type Point4 = [f64; 4];

/// Callable field representation.
pub type PointFn = Arc<dyn Fn(&Point4) -> Quaternion + Send + Sync>;

/// Minimum grid nodes per axis for sampled fields.
pub const MIN_GRID_NODES: usize = 9;

/// Which side the quaternionic factors multiply from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultSide {
    Left,
    Right,
}

/// Axis-aligned box `Π [a_k, b_k]` in ψ-coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box4 {
    pub a: Point4,
    pub b: Point4,
}

impl Box4 {
    pub fn new(a: Point4, b: Point4) -> Result<Self> {
        let bx = Box4 { a, b };
        bx.validate()?;
        Ok(bx)
    }

    pub fn unit() -> Self {
        Box4 { a: [0.0; 4], b: [1.0; 4] }
    }

    pub fn validate(&self) -> Result<()> {
        for k in 0..4 {
            if !(self.a[k] < self.b[k]) || !self.a[k].is_finite() || !self.b[k].is_finite() {
                return Err(Error::Config(format!(
                    "box edge {k} is degenerate: [{}, {}]",
                    self.a[k], self.b[k]
                )));
            }
        }
        Ok(())
    }

    pub fn edge(&self, k: usize) -> f64 {
        self.b[k] - self.a[k]
    }

    pub fn volume(&self) -> f64 {
        (0..4).map(|k| self.edge(k)).product()
    }

    pub fn center(&self) -> Point4 {
        std::array::from_fn(|k| 0.5 * (self.a[k] + self.b[k]))
    }

    /// Closed-box membership with a relative slack of `1e-12`.
    pub fn contains(&self, x: &Point4) -> bool {
        (0..4).all(|k| {
            let s = 1e-12 * self.edge(k);
            x[k] >= self.a[k] - s && x[k] <= self.b[k] + s
        })
    }

    /// Whether `x` is strictly inside.
    pub fn contains_open(&self, x: &Point4) -> bool {
        (0..4).all(|k| x[k] > self.a[k] && x[k] < self.b[k])
    }

    /// Whether `other` lies inside this box (closed).
    pub fn contains_box(&self, other: &Box4) -> bool {
        self.contains(&other.a) && self.contains(&other.b)
    }

    /// Euclidean distance from `x` to the boundary, negative outside.
    pub fn signed_distance_to_boundary(&self, x: &Point4) -> f64 {
        if self.contains_open(x) {
            (0..4)
                .map(|k| (x[k] - self.a[k]).min(self.b[k] - x[k]))
                .fold(f64::INFINITY, f64::min)
        } else {
            let d2: f64 = (0..4)
                .map(|k| {
                    let d = (self.a[k] - x[k]).max(0.0).max(x[k] - self.b[k]);
                    d * d
                })
                .sum();
            -d2.sqrt()
        }
    }

    pub(crate) fn check_point(&self, x: &Point4) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain(format!("point {x:?} outside the box {:?}..{:?}", self.a, self.b)))
        }
    }
}

/// Anything that can be evaluated as a quaternion field on a box.
pub trait QField: Send + Sync {
    fn domain(&self) -> &Box4;
    /// Value at `x`; callers guarantee `x` lies in the closed domain.
    fn eval(&self, x: &Point4) -> Quaternion;
    /// Finite-difference step along axis `k`.
    fn fd_step(&self, k: usize) -> f64;
}

#[derive(Clone)]
enum FieldRepr {
    Callable(PointFn),
    Grid { dims: [usize; 4], values: Arc<Vec<Quaternion>> },
}

/// A quaternion field on a box, either callable or sampled on a uniform grid
/// (interpolated quadrilinearly).
#[derive(Clone)]
pub struct Field4 {
    repr: FieldRepr,
    domain: Box4,
    fd_steps: [f64; 4],
}

impl std::fmt::Debug for Field4 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match &self.repr {
            FieldRepr::Callable(_) => "callable".to_string(),
            FieldRepr::Grid { dims, .. } => format!("grid {dims:?}"),
        };
        write!(f, "Field4({kind}, {:?})", self.domain)
    }
}

/// Default differencing step for callable fields, relative to the edge.
pub const DEFAULT_REL_FD_STEP: f64 = 1e-3;

impl Field4 {
    pub fn callable<F>(f: F, domain: Box4) -> Result<Self>
    where
        F: Fn(&Point4) -> Quaternion + Send + Sync + 'static,
    {
        domain.validate()?;
        Ok(Field4 {
            repr: FieldRepr::Callable(Arc::new(f)),
            domain,
            fd_steps: std::array::from_fn(|k| DEFAULT_REL_FD_STEP * domain.edge(k)),
        })
    }

    /// Field sampled at `dims[k]` uniformly spaced nodes per axis, values in
    /// row-major order (axis 3 fastest).
    pub fn grid(dims: [usize; 4], values: Vec<Quaternion>, domain: Box4) -> Result<Self> {
        domain.validate()?;
        if let Some(k) = (0..4).find(|&k| dims[k] < MIN_GRID_NODES) {
            return Err(Error::Config(format!(
                "grid axis {k} has {} nodes, need at least {MIN_GRID_NODES}",
                dims[k]
            )));
        }
        let n: usize = dims.iter().product();
        if values.len() != n {
            return Err(Error::Config(format!("grid expects {n} values, got {}", values.len())));
        }
        Ok(Field4 {
            repr: FieldRepr::Grid { dims, values: Arc::new(values) },
            domain,
            fd_steps: std::array::from_fn(|k| domain.edge(k) / (dims[k] - 1) as f64),
        })
    }

    /// Samples a callable on a uniform grid.
    pub fn sample<F>(f: F, dims: [usize; 4], domain: Box4) -> Result<Self>
    where
        F: Fn(&Point4) -> Quaternion,
    {
        domain.validate()?;
        let mut values = Vec::with_capacity(dims.iter().product());
        for i0 in 0..dims[0] {
            for i1 in 0..dims[1] {
                for i2 in 0..dims[2] {
                    for i3 in 0..dims[3] {
                        let idx = [i0, i1, i2, i3];
                        let x: Point4 = std::array::from_fn(|k| {
                            domain.a[k] + domain.edge(k) * idx[k] as f64 / (dims[k] - 1).max(1) as f64
                        });
                        values.push(f(&x));
                    }
                }
            }
        }
        Field4::grid(dims, values, domain)
    }

    pub fn with_fd_step(mut self, steps: [f64; 4]) -> Result<Self> {
        if steps.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::Config(format!("differencing steps must be positive: {steps:?}")));
        }
        self.fd_steps = steps;
        Ok(self)
    }

    pub fn is_grid(&self) -> bool {
        matches!(self.repr, FieldRepr::Grid { .. })
    }

    /// Domain-checked evaluation.
    pub fn value(&self, x: &Point4) -> Result<Quaternion> {
        self.domain.check_point(x)?;
        Ok(self.eval(x))
    }

    fn interpolate(&self, dims: &[usize; 4], values: &[Quaternion], x: &Point4) -> Quaternion {
        let mut base = [0usize; 4];
        let mut frac = [0.0; 4];
        for k in 0..4 {
            let s = ((x[k] - self.domain.a[k]) / self.domain.edge(k)).clamp(0.0, 1.0)
                * (dims[k] - 1) as f64;
            let i = (s.floor() as usize).min(dims[k] - 2);
            base[k] = i;
            frac[k] = s - i as f64;
        }
        let mut acc = Quaternion::ZERO;
        for corner in 0..16usize {
            let mut w = 1.0;
            let mut idx = 0usize;
            for k in 0..4 {
                let bit = (corner >> (3 - k)) & 1;
                w *= if bit == 1 { frac[k] } else { 1.0 - frac[k] };
                idx = idx * dims[k] + base[k] + bit;
            }
            if w != 0.0 {
                acc += values[idx] * w;
            }
        }
        acc
    }
}

impl QField for Field4 {
    fn domain(&self) -> &Box4 {
        &self.domain
    }

    fn eval(&self, x: &Point4) -> Quaternion {
        match &self.repr {
            FieldRepr::Callable(f) => f(x),
            FieldRepr::Grid { dims, values } => self.interpolate(dims, values, x),
        }
    }

    fn fd_step(&self, k: usize) -> f64 {
        self.fd_steps[k]
    }
}

fn shifted(x: &Point4, k: usize, d: f64) -> Point4 {
    let mut y = *x;
    y[k] += d;
    y
}

/// `∂_k F(x)`: second-order central difference, one-sided second order
/// within one step of a face.
pub fn partial_fd<F: QField + ?Sized>(f: &F, k: usize, x: &Point4) -> Result<Quaternion> {
    if k > 3 {
        return Err(Error::Config(format!("axis {k} out of range")));
    }
    let dom = f.domain();
    dom.check_point(x)?;
    let h = f.fd_step(k);
    let (lo, hi) = (dom.a[k], dom.b[k]);
    Ok(if x[k] - h >= lo && x[k] + h <= hi {
        (f.eval(&shifted(x, k, h)) - f.eval(&shifted(x, k, -h))) / (2.0 * h)
    } else if x[k] - h < lo {
        (f.eval(x) * -3.0 + f.eval(&shifted(x, k, h)) * 4.0 - f.eval(&shifted(x, k, 2.0 * h)))
            / (2.0 * h)
    } else {
        (f.eval(x) * 3.0 - f.eval(&shifted(x, k, -h)) * 4.0 + f.eval(&shifted(x, k, -2.0 * h)))
            / (2.0 * h)
    })
}

/// All four partial derivatives at `x`.
pub fn gradient<F: QField + ?Sized>(f: &F, x: &Point4) -> Result<[Quaternion; 4]> {
    Ok([partial_fd(f, 0, x)?, partial_fd(f, 1, x)?, partial_fd(f, 2, x)?, partial_fd(f, 3, x)?])
}

/// Combines partial derivatives into `Σψ_k ∂_k F` (left) or `Σ(∂_k F)ψ_k` (right).
pub fn fueter_from_partials(psi: &StructuralSet, d: &[Quaternion; 4], side: MultSide) -> Quaternion {
    (0..4)
        .map(|k| match side {
            MultSide::Left => psi.get(k) * d[k],
            MultSide::Right => d[k] * psi.get(k),
        })
        .sum()
}

/// Left (`Σψ_k ∂_k F`) or right (`Σ(∂_k F)ψ_k`) ψ-Fueter operator.
pub fn fueter<F: QField + ?Sized>(
    f: &F,
    psi: &StructuralSet,
    side: MultSide,
    x: &Point4,
) -> Result<Quaternion> {
    Ok(fueter_from_partials(psi, &gradient(f, x)?, side))
}

/// Separable weight `φ(x) = Σ w_k(x_k)`; the axis slice `φ_i` through any base
/// point differs from `w_i` by a constant, which the fractional operators
/// never see.
#[derive(Debug, Clone)]
pub struct AxisWeights {
    pub axes: [WeightFunction; 4],
}

impl AxisWeights {
    pub fn new(axes: [WeightFunction; 4]) -> Self {
        AxisWeights { axes }
    }

    /// `φ(x) = x_0 + x_1 + x_2 + x_3`.
    pub fn coordinate_sum() -> Self {
        AxisWeights::new(std::array::from_fn(|_| WeightFunction::identity()))
    }

    /// Identity on every axis except `axis`, which uses `w`.
    pub fn single_axis(axis: usize, w: WeightFunction) -> Self {
        let mut axes: [WeightFunction; 4] = std::array::from_fn(|_| WeightFunction::identity());
        axes[axis] = w;
        AxisWeights::new(axes)
    }

    pub fn phi(&self, x: &Point4) -> f64 {
        (0..4).map(|k| self.axes[k].phi(x[k])).sum()
    }

    /// `S(x) = Σ φ_k'(x_k)`.
    pub fn slope_sum(&self, x: &Point4) -> f64 {
        (0..4).map(|k| self.axes[k].phi_prime(x[k])).sum()
    }

    /// Axis slice through `q`: `t ↦ φ(q_0,…,t,…,q_3)`.
    pub fn slice(&self, axis: usize, q: &Point4) -> WeightFunction {
        let w = self.axes[axis].clone();
        let offset: f64 = (0..4).filter(|&k| k != axis).map(|k| self.axes[k].phi(q[k])).sum();
        if offset == 0.0 {
            return w;
        }
        let w2 = w.clone();
        WeightFunction::custom(Arc::new(move |t| w.phi(t) + offset), Arc::new(move |t| w2.phi_prime(t)))
    }

    /// Checks `φ_k' > 0` at `x` on every axis.
    pub fn check_positive(&self, x: &Point4) -> Result<()> {
        for k in 0..4 {
            let d = self.axes[k].phi_prime(x[k]);
            if !(d > 0.0) {
                return Err(Error::Precondition(format!(
                    "weight derivative on axis {k} is {d} at {}",
                    x[k]
                )));
            }
        }
        Ok(())
    }
}

/// Per-axis orders and proportions of the f-side (`α⃗, σ⃗`) and g-side
/// (`β⃗, ρ⃗`) operators, with the quaternionic proportions `σ`, `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracVectorParams {
    pub alpha: [f64; 4],
    pub sigma_axes: [f64; 4],
    pub sigma_quat: Quaternion,
    pub beta: [f64; 4],
    pub rho_axes: [f64; 4],
    pub rho_quat: Quaternion,
    /// `true` when `sigma_quat`/`rho_quat` were set explicitly instead of
    /// being built as `Σψ_kσ_k`.
    #[serde(default)]
    pub quat_override: bool,
}

/// Per-axis orders and proportions of one by-coordinate integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisOrders {
    pub order: [f64; 4],
    pub sigma: [f64; 4],
}

impl AxisOrders {
    pub fn new(order: [f64; 4], sigma: [f64; 4]) -> Self {
        AxisOrders { order, sigma }
    }

    pub fn uniform(order: f64, sigma: f64) -> Self {
        AxisOrders { order: [order; 4], sigma: [sigma; 4] }
    }

    pub fn axis_params(&self, k: usize, side: Side, domain: &Box4) -> Result<FracAxisParams> {
        FracAxisParams::new(self.order[k], self.sigma[k], side, domain.a[k], domain.b[k])
    }
}

fn combine(psi: &StructuralSet, c: &[f64; 4]) -> Quaternion {
    psi.from_coords(*c)
}

impl FracVectorParams {
    /// Parameters with `σ = Σψ_kσ_k` and the g-side equal to the f-side.
    pub fn new(alpha: [f64; 4], sigma_axes: [f64; 4], psi: &StructuralSet) -> Result<Self> {
        let p = FracVectorParams {
            alpha,
            sigma_axes,
            sigma_quat: combine(psi, &sigma_axes),
            beta: alpha,
            rho_axes: sigma_axes,
            rho_quat: combine(psi, &sigma_axes),
            quat_override: false,
        };
        p.validate(psi)?;
        Ok(p)
    }

    pub fn with_g_side(mut self, beta: [f64; 4], rho_axes: [f64; 4], psi: &StructuralSet) -> Result<Self> {
        self.beta = beta;
        self.rho_axes = rho_axes;
        if !self.quat_override {
            self.rho_quat = combine(psi, &rho_axes);
        }
        self.validate(psi)?;
        Ok(self)
    }

    /// Replaces the quaternionic proportions, e.g. by a real scalar.
    pub fn with_quat_proportions(mut self, sigma: Quaternion, rho: Quaternion) -> Result<Self> {
        for (name, v) in [("sigma", sigma), ("rho", rho)] {
            if v.norm() == 0.0 || !v.is_finite() {
                return Err(Error::Config(format!("quaternionic {name} must be finite and nonzero")));
            }
        }
        self.sigma_quat = sigma;
        self.rho_quat = rho;
        self.quat_override = true;
        Ok(self)
    }

    /// Same as [`with_quat_proportions`](Self::with_quat_proportions) with `ρ = σ`.
    pub fn with_sigma_quat(self, sigma: Quaternion) -> Result<Self> {
        self.with_quat_proportions(sigma, sigma)
    }

    pub fn validate(&self, psi: &StructuralSet) -> Result<()> {
        for k in 0..4 {
            for (name, v) in [("alpha", self.alpha[k]), ("beta", self.beta[k])] {
                if !(v > 0.0 && v < 1.0) {
                    return Err(Error::Config(format!("{name}[{k}] = {v} outside (0,1)")));
                }
            }
            for (name, v) in [("sigma", self.sigma_axes[k]), ("rho", self.rho_axes[k])] {
                if !(v > 0.0 && v <= 1.0) {
                    return Err(Error::Config(format!("{name}[{k}] = {v} outside (0,1]")));
                }
            }
        }
        if !self.quat_override {
            let s = combine(psi, &self.sigma_axes);
            let r = combine(psi, &self.rho_axes);
            if s.max_abs_diff(self.sigma_quat) > 1e-12 || r.max_abs_diff(self.rho_quat) > 1e-12 {
                return Err(Error::Config(
                    "quaternionic proportions inconsistent with the axis proportions".into(),
                ));
            }
        }
        Ok(())
    }

    /// Orders `1-α⃗` with proportions `σ⃗` (the f-side inner integral).
    pub fn f_integral(&self) -> AxisOrders {
        AxisOrders::new(self.alpha.map(|a| 1.0 - a), self.sigma_axes)
    }

    /// Orders `1-β⃗` with proportions `ρ⃗`.
    pub fn g_integral(&self) -> AxisOrders {
        AxisOrders::new(self.beta.map(|a| 1.0 - a), self.rho_axes)
    }
}

/// `(1-σ)F + σ S⁻¹ ψD F` (left) or `F(1-σ) + ψD_r F S⁻¹ σ` (right), with
/// `S = Σφ_k'(x_k)` when a weight is given and `S = 1` otherwise.
pub fn quat_prop_d<F: QField + ?Sized>(
    f: &F,
    psi: &StructuralSet,
    sigma_quat: Quaternion,
    phi: Option<&AxisWeights>,
    side: MultSide,
    x: &Point4,
) -> Result<Quaternion> {
    let d = gradient(f, x)?;
    let value = f.eval(x);
    prop_d_from_parts(psi, sigma_quat, phi, side, x, value, &d)
}

pub(crate) fn prop_d_from_parts(
    psi: &StructuralSet,
    sigma_quat: Quaternion,
    phi: Option<&AxisWeights>,
    side: MultSide,
    x: &Point4,
    value: Quaternion,
    partials: &[Quaternion; 4],
) -> Result<Quaternion> {
    let s_inv = match phi {
        Some(w) => {
            w.check_positive(x)?;
            1.0 / w.slope_sum(x)
        }
        None => 1.0,
    };
    let one_minus = Quaternion::ONE - sigma_quat;
    let dpsi = fueter_from_partials(psi, partials, side);
    Ok(match side {
        MultSide::Left => one_minus * value + sigma_quat * (dpsi * s_inv),
        MultSide::Right => value * one_minus + (dpsi * s_inv) * sigma_quat,
    })
}

/// Callable field `x ↦ quat_prop_d(F)(x)`, used for Caputo-type compositions.
pub struct PropDField<F: QField> {
    pub inner: F,
    pub psi: StructuralSet,
    pub sigma_quat: Quaternion,
    pub phi: Option<AxisWeights>,
    pub side: MultSide,
}

impl<F: QField> QField for PropDField<F> {
    fn domain(&self) -> &Box4 {
        self.inner.domain()
    }

    fn eval(&self, x: &Point4) -> Quaternion {
        quat_prop_d(&self.inner, &self.psi, self.sigma_quat, self.phi.as_ref(), self.side, x)
            .unwrap_or(Quaternion::new(f64::NAN, f64::NAN, f64::NAN, f64::NAN))
    }

    fn fd_step(&self, k: usize) -> f64 {
        self.inner.fd_step(k)
    }
}

impl<T: QField + ?Sized> QField for Arc<T> {
    fn domain(&self) -> &Box4 {
        (**self).domain()
    }
    fn eval(&self, x: &Point4) -> Quaternion {
        (**self).eval(x)
    }
    fn fd_step(&self, k: usize) -> f64 {
        (**self).fd_step(k)
    }
}

impl<T: QField + ?Sized> QField for &T {
    fn domain(&self) -> &Box4 {
        (**self).domain()
    }
    fn eval(&self, x: &Point4) -> Quaternion {
        (**self).eval(x)
    }
    fn fd_step(&self, k: usize) -> f64 {
        (**self).fd_step(k)
    }
}

/// The by-coordinate fractional integral `x ↦ Σ_i I_i[f(q…t…q)](x_i)` at a
/// fixed base point `q`, with per-axis values cached by coordinate.
pub struct CoordTransform<F: QField> {
    field: F,
    params: [FracAxisParams; 4],
    slices: [WeightFunction; 4],
    weights: Option<AxisWeights>,
    q: Point4,
    mesh: Mesh1D,
    fd_steps: [f64; 4],
    cache: [Mutex<HashMap<u64, Quaternion>>; 4],
}

impl<F: QField> CoordTransform<F> {
    pub fn new(
        field: F,
        orders: &AxisOrders,
        phi: Option<&AxisWeights>,
        side: Side,
        q: Point4,
        mesh: Mesh1D,
    ) -> Result<Self> {
        mesh.validate()?;
        let dom = *field.domain();
        dom.check_point(&q)?;
        let mut params = Vec::with_capacity(4);
        for k in 0..4 {
            params.push(orders.axis_params(k, side, &dom)?);
        }
        let params: [FracAxisParams; 4] = params.try_into().expect("four axes");
        let slices: [WeightFunction; 4] = std::array::from_fn(|k| match phi {
            Some(w) => w.slice(k, &q),
            None => WeightFunction::identity(),
        });
        for k in 0..4 {
            slices[k].check_increasing(dom.a[k], dom.b[k], &mesh)?;
        }
        let fd_steps = std::array::from_fn(|k| dom.edge(k) / mesh.n as f64);
        Ok(CoordTransform {
            field,
            params,
            slices,
            weights: phi.cloned(),
            q,
            mesh,
            fd_steps,
            cache: std::array::from_fn(|_| Mutex::new(HashMap::new())),
        })
    }

    pub fn base_point(&self) -> &Point4 {
        &self.q
    }

    pub fn params(&self, k: usize) -> &FracAxisParams {
        &self.params[k]
    }

    pub fn weights(&self) -> Option<&AxisWeights> {
        self.weights.as_ref()
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn with_fd_steps(mut self, steps: [f64; 4]) -> Self {
        self.fd_steps = steps;
        self
    }

    /// Axis term `F_k(t) = I_k[s ↦ f(q_0,…,s,…,q_3)](t)`.
    pub fn axis_term(&self, k: usize, t: f64) -> Result<Quaternion> {
        let key = t.to_bits();
        if let Some(v) = self.cache[k].lock().expect("cache poisoned").get(&key) {
            return Ok(*v);
        }
        let q = self.q;
        let line = |s: f64| {
            let mut y = q;
            y[k] = s;
            self.field.eval(&y)
        };
        let v = frac_integral_fn(line, &self.params[k], &self.slices[k], t, &self.mesh)?;
        self.cache[k].lock().expect("cache poisoned").insert(key, v);
        Ok(v)
    }

    /// Checked evaluation of `Σ_k F_k(x_k)`.
    pub fn value(&self, x: &Point4) -> Result<Quaternion> {
        self.field.domain().check_point(x)?;
        let mut acc = Quaternion::ZERO;
        for k in 0..4 {
            acc += self.axis_term(k, x[k])?;
        }
        Ok(acc)
    }
}

impl<F: QField> QField for CoordTransform<F> {
    fn domain(&self) -> &Box4 {
        self.field.domain()
    }

    fn eval(&self, x: &Point4) -> Quaternion {
        let dom = self.field.domain();
        let y: Point4 = std::array::from_fn(|k| x[k].clamp(dom.a[k], dom.b[k]));
        self.value(&y).unwrap_or(Quaternion::new(f64::NAN, f64::NAN, f64::NAN, f64::NAN))
    }

    fn fd_step(&self, k: usize) -> f64 {
        self.fd_steps[k]
    }
}

/// By-coordinate fractional proportional integral with base point `q`,
/// evaluated at `x`: `Σ_i I^{order_i, σ_i, φ_i}` along axis `i` through `q`.
pub fn coord_frac_integral<F: QField + ?Sized>(
    f: &F,
    orders: &AxisOrders,
    phi: Option<&AxisWeights>,
    side: Side,
    q: &Point4,
    x: &Point4,
    mesh: &Mesh1D,
) -> Result<Quaternion> {
    let t = CoordTransform::new(f, orders, phi, side, *q, *mesh)?;
    t.value(x)
}
