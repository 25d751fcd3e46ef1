//! Box-domain quadrature: the ψ-Cauchy kernel, the surface form `ν` as
//! per-face weights, tensor midpoint rules on faces and volumes (with local
//! refinement around a near-singular point), and the classical Stokes and
//! Borel-Pompeiu evaluators.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field4d::{fueter, Box4, MultSide, Point4, QField};
use crate::frac1d::{pairwise_sum, Evaluated};
use crate::quat::{Quaternion, StructuralSet};

/// `1/(2π²)`, the reciprocal area of the unit 3-sphere.
pub const CAUCHY_NORMALIZATION: f64 = 1.0 / (2.0 * std::f64::consts::PI * std::f64::consts::PI);

/// Cells closer than this many cell diameters to the singular point are
/// subdivided.
const REFINE_RATIO: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceSide {
    Low,
    High,
}

/// One of the eight faces of a box: axis `axis` fixed at `value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Face3 {
    pub axis: usize,
    pub side: FaceSide,
    pub value: f64,
    /// The parent box; the face spans its extent on the other three axes.
    pub parent: Box4,
}

impl Face3 {
    pub fn of_box(parent: &Box4, axis: usize, side: FaceSide) -> Result<Self> {
        parent.validate()?;
        if axis > 3 {
            return Err(Error::Config(format!("axis {axis} out of range")));
        }
        let value = match side {
            FaceSide::Low => parent.a[axis],
            FaceSide::High => parent.b[axis],
        };
        Ok(Face3 { axis, side, value, parent: *parent })
    }

    /// Faces in the fixed order (axis 0 low, axis 0 high, axis 1 low, …).
    pub fn all(parent: &Box4) -> Result<Vec<Face3>> {
        let mut out = Vec::with_capacity(8);
        for axis in 0..4 {
            for side in [FaceSide::Low, FaceSide::High] {
                out.push(Face3::of_box(parent, axis, side)?);
            }
        }
        Ok(out)
    }

    pub fn outward_sign(&self) -> f64 {
        match self.side {
            FaceSide::Low => -1.0,
            FaceSide::High => 1.0,
        }
    }

    pub fn area(&self) -> f64 {
        (0..4).filter(|&k| k != self.axis).map(|k| self.parent.edge(k)).product()
    }

    /// The three in-face axes in increasing order.
    pub fn tangent_axes(&self) -> [usize; 3] {
        let v: Vec<usize> = (0..4).filter(|&k| k != self.axis).collect();
        [v[0], v[1], v[2]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularPolicy {
    /// Drop the (finest) cell containing the singular point.
    Exclude,
    /// Replace that cell by an average over a shell of interior sample points.
    ExcludeWithShell,
}

/// Tensor midpoint rule parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Cells per axis for volume integrals.
    pub volume_nodes: usize,
    /// Cells per in-face axis for boundary integrals.
    pub face_nodes: usize,
    pub singular: SingularPolicy,
    /// Maximum subdivision depth around a near-singular point.
    #[serde(default = "default_refine_depth")]
    pub refine_depth: usize,
    /// Grading exponent of the cell layout (1 = uniform; larger values
    /// cluster cells at the faces).
    #[serde(default = "default_grading")]
    pub grading: f64,
}

fn default_refine_depth() -> usize {
    3
}

fn default_grading() -> f64 {
    1.0
}

/// Smallest admissible number of cells per axis.
pub const MIN_QUAD_NODES: usize = 8;

impl QuadratureSpec {
    pub fn new(volume_nodes: usize, face_nodes: usize) -> Result<Self> {
        let s = QuadratureSpec {
            volume_nodes,
            face_nodes,
            singular: SingularPolicy::Exclude,
            refine_depth: default_refine_depth(),
            grading: default_grading(),
        };
        s.validate()?;
        Ok(s)
    }

    /// Same number of cells on faces and in the volume.
    pub fn uniform(nodes: usize) -> Result<Self> {
        Self::new(nodes, nodes)
    }

    pub fn with_policy(mut self, policy: SingularPolicy) -> Self {
        self.singular = policy;
        self
    }

    pub fn with_refine_depth(mut self, depth: usize) -> Self {
        self.refine_depth = depth;
        self
    }

    pub fn with_grading(mut self, grading: f64) -> Result<Self> {
        self.grading = grading;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.volume_nodes < MIN_QUAD_NODES || self.face_nodes < MIN_QUAD_NODES {
            return Err(Error::Config(format!(
                "quadrature needs at least {MIN_QUAD_NODES} cells per axis (got {} / {})",
                self.volume_nodes, self.face_nodes
            )));
        }
        if !(self.grading >= 1.0) || !self.grading.is_finite() {
            return Err(Error::Config(format!("grading {} must be >= 1", self.grading)));
        }
        if self.refine_depth > 12 {
            return Err(Error::Config("refinement depth above 12".into()));
        }
        Ok(())
    }

    /// Largest volume cell width over the axes of `omega`.
    pub fn cell_width(&self, omega: &Box4) -> f64 {
        (0..4).map(|k| omega.edge(k)).fold(0.0, f64::max) / self.volume_nodes as f64
    }
}

/// `K_ψ(y - x) = conj(u_ψ) / (2π² |u|⁴)` with `u = y - x`.
pub fn cauchy_kernel(psi: &StructuralSet, y: &Point4, x: &Point4) -> Result<Quaternion> {
    let u: Point4 = std::array::from_fn(|k| y[k] - x[k]);
    if u.iter().all(|&c| c == 0.0) {
        return Err(Error::Singularity(format!("Cauchy kernel evaluated at y = x = {x:?}")));
    }
    Ok(kernel_of_offset(psi, &u))
}

#[inline]
pub(crate) fn kernel_of_offset(psi: &StructuralSet, u: &Point4) -> Quaternion {
    let r2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2] + u[3] * u[3];
    psi.from_coords(*u).conj() * (CAUCHY_NORMALIZATION / (r2 * r2))
}

/// Constant quaternion `w` with `∫_face g ν f = ∫_face g·w·f dS`: the outward
/// normal sign times `ψ_k` (fixed by [`calibrate_nu`]).
pub fn nu_face_weight(psi: &StructuralSet, face: &Face3) -> Quaternion {
    psi.get(face.axis) * face.outward_sign()
}

fn axis_cells(lo: f64, hi: f64, n: usize, grading: f64) -> Vec<(f64, f64)> {
    let node = |j: usize| {
        if j == 0 {
            return lo;
        }
        if j == n {
            return hi;
        }
        let xi = j as f64 / n as f64;
        let (p, q) = (xi.powf(grading), (1.0 - xi).powf(grading));
        lo + (hi - lo) * p / (p + q)
    };
    (0..n)
        .map(|j| {
            let (s0, s1) = (node(j), node(j + 1));
            (0.5 * (s0 + s1), s1 - s0)
        })
        .collect()
}

fn dist(a: &Point4, b: &Point4) -> f64 {
    (0..4).map(|k| (a[k] - b[k]) * (a[k] - b[k])).sum::<f64>().sqrt()
}

/// Recursive midpoint over one axis-aligned cell of dimension `dims.len()`
/// embedded in 4D; `dims` lists the axes the cell extends along.
struct CellRule<'a, I> {
    integrand: &'a I,
    near: Option<Point4>,
    max_depth: usize,
    policy: SingularPolicy,
    dims: &'a [usize],
}

impl<I: Fn(&Point4) -> Quaternion> CellRule<'_, I> {
    fn contains(&self, c: &Point4, half: &Point4, x: &Point4) -> bool {
        self.dims.iter().all(|&k| (x[k] - c[k]).abs() <= half[k])
            && (0..4).filter(|k| !self.dims.contains(k)).all(|k| x[k] == c[k])
    }

    fn cell(&self, c: &Point4, half: &Point4, depth: usize, excluded: &mut usize) -> Quaternion {
        let measure: f64 = self.dims.iter().map(|&k| 2.0 * half[k]).product();
        if let Some(x) = self.near {
            let diam = 2.0 * self.dims.iter().map(|&k| half[k] * half[k]).sum::<f64>().sqrt();
            let d = dist(c, &x);
            if d < REFINE_RATIO * diam && depth < self.max_depth {
                let m = self.dims.len();
                let mut parts = Vec::with_capacity(1 << m);
                for corner in 0..(1usize << m) {
                    let mut cc = *c;
                    let mut hh = *half;
                    for (bit, &k) in self.dims.iter().enumerate() {
                        hh[k] = 0.5 * half[k];
                        cc[k] += if (corner >> bit) & 1 == 1 { hh[k] } else { -hh[k] };
                    }
                    parts.push(self.cell(&cc, &hh, depth + 1, excluded));
                }
                return pairwise_sum(&parts);
            }
            if self.contains(c, half, &x) {
                *excluded += 1;
                return match self.policy {
                    SingularPolicy::Exclude => Quaternion::ZERO,
                    SingularPolicy::ExcludeWithShell => self.shell(c, half, &x) * measure,
                };
            }
        }
        (self.integrand)(c) * measure
    }

    /// Mean of the integrand over the sub-cell centres that stay away from `x`.
    fn shell(&self, c: &Point4, half: &Point4, x: &Point4) -> Quaternion {
        let m = self.dims.len();
        let min_half = self.dims.iter().map(|&k| half[k]).fold(f64::INFINITY, f64::min);
        let mut vals = Vec::with_capacity(1 << m);
        for corner in 0..(1usize << m) {
            let mut p = *c;
            for (bit, &k) in self.dims.iter().enumerate() {
                p[k] += if (corner >> bit) & 1 == 1 { 0.5 * half[k] } else { -0.5 * half[k] };
            }
            if dist(&p, x) > 0.25 * min_half {
                vals.push((self.integrand)(&p));
            }
        }
        if vals.is_empty() {
            return Quaternion::ZERO;
        }
        pairwise_sum(&vals) / vals.len() as f64
    }
}

/// `Σ_faces ∫_face integrand(y, ν_face) dS` by a tensor midpoint rule per
/// face, refined around `near` when given. Faces are summed in the fixed
/// [`Face3::all`] order.
pub fn surface_sum<I>(
    omega: &Box4,
    psi: &StructuralSet,
    spec: &QuadratureSpec,
    near: Option<&Point4>,
    integrand: I,
) -> Result<Quaternion>
where
    I: Fn(&Point4, Quaternion) -> Quaternion + Sync,
{
    spec.validate()?;
    omega.validate()?;
    let n = spec.face_nodes;
    let mut per_face = Vec::with_capacity(8);
    for face in Face3::all(omega)? {
        let nu = nu_face_weight(psi, &face);
        let tang = face.tangent_axes();
        let cells: Vec<Vec<(f64, f64)>> = tang
            .iter()
            .map(|&k| axis_cells(omega.a[k], omega.b[k], n, spec.grading))
            .collect();
        let f = |y: &Point4| integrand(y, nu);
        let rule = CellRule {
            integrand: &f,
            near: near.copied(),
            max_depth: spec.refine_depth,
            policy: spec.singular,
            dims: &tang,
        };
        let rows: Vec<Quaternion> = (0..n * n)
            .into_par_iter()
            .map(|ij| {
                let (i, j) = (ij / n, ij % n);
                let mut row = Vec::with_capacity(n);
                let mut excluded = 0;
                for l in 0..n {
                    let mut c = [0.0; 4];
                    let mut half = [0.0; 4];
                    c[face.axis] = face.value;
                    for (slot, &(ci, wi)) in [cells[0][i], cells[1][j], cells[2][l]].iter().enumerate() {
                        c[tang[slot]] = ci;
                        half[tang[slot]] = 0.5 * wi;
                    }
                    row.push(rule.cell(&c, &half, 0, &mut excluded));
                }
                pairwise_sum(&row)
            })
            .collect();
        per_face.push(pairwise_sum(&rows));
    }
    Ok(pairwise_sum(&per_face))
}

/// `∫_∂Ω g(y)·w(y)·ν·f(y) dS`, multiplication order preserved.
pub fn boundary_integral<G, F, W>(
    omega: &Box4,
    g: G,
    f: F,
    psi: &StructuralSet,
    spec: &QuadratureSpec,
    weight: Option<W>,
) -> Result<Quaternion>
where
    G: Fn(&Point4) -> Quaternion + Sync,
    F: Fn(&Point4) -> Quaternion + Sync,
    W: Fn(&Point4) -> f64 + Sync,
{
    surface_sum(omega, psi, spec, None, |y, nu| {
        let w = weight.as_ref().map_or(1.0, |w| w(y));
        g(y) * (nu * w) * f(y)
    })
}

/// Tensor midpoint rule over `omega`. With a singular point inside `omega`,
/// cells near it are refined and the finest cell containing it is handled by
/// the quadrature's [`SingularPolicy`].
pub fn volume_integral<I>(
    omega: &Box4,
    integrand: I,
    spec: &QuadratureSpec,
    singular_point: Option<&Point4>,
) -> Result<Evaluated<Quaternion>>
where
    I: Fn(&Point4) -> Quaternion + Sync,
{
    spec.validate()?;
    omega.validate()?;
    let mut warnings = Vec::new();
    let near = match singular_point {
        Some(x) if !omega.contains(x) => {
            warnings.push(format!("singular point {x:?} outside the domain; ignored"));
            // keep refining if it is close to the box, which still helps accuracy
            Some(*x)
        }
        other => other.copied(),
    };
    let n = spec.volume_nodes;
    let cells: Vec<Vec<(f64, f64)>> =
        (0..4).map(|k| axis_cells(omega.a[k], omega.b[k], n, spec.grading)).collect();
    let dims = [0usize, 1, 2, 3];
    let rule = CellRule {
        integrand: &integrand,
        near,
        max_depth: spec.refine_depth,
        policy: spec.singular,
        dims: &dims,
    };
    let slabs: Vec<(Quaternion, usize)> = (0..n * n)
        .into_par_iter()
        .map(|ij| {
            let (i, j) = (ij / n, ij % n);
            let mut row = Vec::with_capacity(n * n);
            let mut excluded = 0;
            for l in 0..n {
                for m in 0..n {
                    let idx = [i, j, l, m];
                    let c: Point4 = std::array::from_fn(|k| cells[k][idx[k]].0);
                    let half: Point4 = std::array::from_fn(|k| 0.5 * cells[k][idx[k]].1);
                    row.push(rule.cell(&c, &half, 0, &mut excluded));
                }
            }
            (pairwise_sum(&row), excluded)
        })
        .collect();
    let excluded: usize = slabs.iter().map(|s| s.1).sum();
    if excluded > 0 {
        warnings.push(format!(
            "{excluded} singular cell(s) handled by the {:?} policy",
            spec.singular
        ));
    }
    let values: Vec<Quaternion> = slabs.into_iter().map(|s| s.0).collect();
    Ok(Evaluated { value: pairwise_sum(&values), warnings })
}

/// Both sides of the classical Stokes formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StokesReport {
    /// `∫_∂Ω g ν f`.
    pub boundary: Quaternion,
    /// `∫_Ω (g ψD f + ψD_r g f)`.
    pub volume: Quaternion,
    pub residual: f64,
}

/// Classical Stokes formula `∫_∂Ω g ν f = ∫_Ω (g·ψDf + ψD_r g·f)`.
pub fn stokes_classical<F: QField + ?Sized, G: QField + ?Sized>(
    f: &F,
    g: &G,
    omega: &Box4,
    psi: &StructuralSet,
    spec: &QuadratureSpec,
) -> Result<StokesReport> {
    check_inside(omega, f.domain())?;
    check_inside(omega, g.domain())?;
    let boundary = surface_sum(omega, psi, spec, None, |y, nu| g.eval(y) * nu * f.eval(y))?;
    let volume = volume_integral(
        omega,
        |y| {
            let df = fueter(f, psi, MultSide::Left, y).expect("volume node inside the domain");
            let dg = fueter(g, psi, MultSide::Right, y).expect("volume node inside the domain");
            g.eval(y) * df + dg * f.eval(y)
        },
        spec,
        None,
    )?
    .value;
    Ok(StokesReport { boundary, volume, residual: (boundary - volume).norm() })
}

pub(crate) fn check_inside(omega: &Box4, domain: &Box4) -> Result<()> {
    omega.validate()?;
    if !domain.contains_box(omega) {
        return Err(Error::Config(format!(
            "integration box {:?}..{:?} leaves the field domain",
            omega.a, omega.b
        )));
    }
    Ok(())
}

/// Result of a Borel-Pompeiu reconstruction at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpReport {
    pub x: Point4,
    pub interior: bool,
    pub boundary_term: Quaternion,
    pub volume_term: Quaternion,
    /// `boundary_term - volume_term`.
    pub value: Quaternion,
    /// `f(x) + g(x)` inside, `0` outside.
    pub target: Quaternion,
    pub residual: f64,
    pub warnings: Vec<String>,
}

/// Classical Borel-Pompeiu formula at `x`:
/// `∫_∂Ω (K ν f + g ν K) - ∫_Ω (K ψDf + ψD_r g K)` against `f(x) + g(x)`
/// (interior) or `0` (exterior).
pub fn bp_classical<F: QField + ?Sized, G: QField + ?Sized>(
    f: &F,
    g: &G,
    omega: &Box4,
    psi: &StructuralSet,
    x: &Point4,
    spec: &QuadratureSpec,
) -> Result<BpReport> {
    check_inside(omega, f.domain())?;
    check_inside(omega, g.domain())?;
    let sd = omega.signed_distance_to_boundary(x);
    if sd == 0.0 {
        return Err(Error::Precondition(format!("x = {x:?} lies on the boundary")));
    }
    let interior = sd > 0.0;
    let mut warnings = Vec::new();
    let h = spec.cell_width(omega);
    if sd.abs() < h {
        warnings.push(format!("x is within one cell ({h:.3e}) of the boundary"));
    }
    let boundary_term = surface_sum(omega, psi, spec, Some(x), |y, nu| {
        let u: Point4 = std::array::from_fn(|k| y[k] - x[k]);
        let k = kernel_of_offset(psi, &u);
        k * nu * f.eval(y) + g.eval(y) * nu * k
    })?;
    let vol = volume_integral(
        omega,
        |y| {
            let u: Point4 = std::array::from_fn(|k| y[k] - x[k]);
            let k = kernel_of_offset(psi, &u);
            let df = fueter(f, psi, MultSide::Left, y).expect("volume node inside the domain");
            let dg = fueter(g, psi, MultSide::Right, y).expect("volume node inside the domain");
            k * df + dg * k
        },
        spec,
        if interior { Some(x) } else { None },
    )?;
    warnings.extend(vol.warnings);
    let value = boundary_term - vol.value;
    let target = if interior { f.eval(x) + g.eval(x) } else { Quaternion::ZERO };
    Ok(BpReport {
        x: *x,
        interior,
        boundary_term,
        volume_term: vol.value,
        value,
        target,
        residual: (value - target).norm(),
        warnings,
    })
}

/// Outcome of checking both global signs of `ν` against Stokes on the
/// monomial family `f = x_m`, `g ≡ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuCalibration {
    /// Sign `s` such that `ν = s·Σ n_k ψ_k dS` satisfies Stokes.
    pub calibrated_sign: i8,
    /// Global sign the `-sgnψ Σ(-1)^k ψ_k dx̂_k` bookkeeping produces.
    pub formula_sign: i8,
    pub residual_plus: f64,
    pub residual_minus: f64,
}

pub fn calibrate_nu(psi: &StructuralSet, omega: &Box4, spec: &QuadratureSpec) -> Result<NuCalibration> {
    let mut res = [0.0f64; 2];
    for m in 0..4 {
        let boundary = surface_sum(omega, psi, spec, None, |y, nu| nu * y[m])?;
        let volume = psi.get(m) * omega.volume();
        res[0] = res[0].max((boundary - volume).norm());
        res[1] = res[1].max((-boundary - volume).norm());
    }
    let calibrated_sign = if res[0] <= res[1] { 1 } else { -1 };
    Ok(NuCalibration {
        calibrated_sign,
        formula_sign: -psi.sgn(),
        residual_plus: res[0],
        residual_minus: res[1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field4d::Field4;

    #[test]
    fn kernel_examples() {
        let psi = StructuralSet::standard();
        let o = [0.0; 4];
        let k = cauchy_kernel(&psi, &[1.0, 0.0, 0.0, 0.0], &o).unwrap();
        assert!((k.w0 - 0.0506606).abs() < 1e-7);
        let k = cauchy_kernel(&psi, &[0.0, 1.0, 0.0, 0.0], &o).unwrap();
        assert!((k - Quaternion::I * -CAUCHY_NORMALIZATION).norm() < 1e-16);
        assert!(matches!(cauchy_kernel(&psi, &o, &o), Err(Error::Singularity(_))));
        let u = [0.3, -0.2, 0.7, 0.1];
        let lu = u.map(|c| 2.5 * c);
        let ratio = cauchy_kernel(&psi, &lu, &o).unwrap() * 2.5f64.powi(3);
        assert!((ratio - cauchy_kernel(&psi, &u, &o).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn nu_weights() {
        let psi = StructuralSet::standard();
        let unit = Box4::unit();
        let hi0 = Face3::of_box(&unit, 0, FaceSide::High).unwrap();
        assert_eq!(nu_face_weight(&psi, &hi0), Quaternion::ONE);
        let lo1 = Face3::of_box(&unit, 1, FaceSide::Low).unwrap();
        assert_eq!(nu_face_weight(&psi, &lo1), -Quaternion::I);
        let spec = QuadratureSpec::uniform(8).unwrap();
        let total = surface_sum(&unit, &psi, &spec, None, |_, nu| nu).unwrap();
        assert!(total.norm() < 1e-14);
        let cal = calibrate_nu(&psi, &unit, &spec).unwrap();
        assert_eq!(cal.calibrated_sign, 1);
        assert!(cal.residual_plus < 1e-12);
    }

    #[test]
    fn boundary_examples() {
        let psi = StructuralSet::standard();
        let unit = Box4::unit();
        let spec = QuadratureSpec::uniform(8).unwrap();
        let one = |_: &Point4| Quaternion::ONE;
        let none: Option<fn(&Point4) -> f64> = None;
        let v = boundary_integral(&unit, one, |y: &Point4| Quaternion::real(y[0]), &psi, &spec, none).unwrap();
        assert!((v - Quaternion::ONE).norm() < 1e-13);
        let v = boundary_integral(&unit, |_: &Point4| Quaternion::I, |_: &Point4| Quaternion::J, &psi, &spec, none)
            .unwrap();
        assert!(v.norm() < 1e-14);
    }

    #[test]
    fn volume_examples() {
        let b = Box4::new([0.0, 0.0, 0.0, 0.0], [1.0, 2.0, 1.0, 0.5]).unwrap();
        let spec = QuadratureSpec::uniform(8).unwrap();
        let v = volume_integral(&b, |_| Quaternion::ONE, &spec, None).unwrap();
        assert!((v.value.w0 - 1.0).abs() < 1e-13);
        let v = volume_integral(&b, |y| Quaternion::new(y[0], 2.0 * y[1] - y[3], 0.0, 1.0), &spec, None).unwrap();
        assert!((v.value - Quaternion::new(0.5, 2.0 - 0.25, 0.0, 1.0)).norm() < 1e-13);
    }

    #[test]
    fn stokes_linear_calibration_family() {
        let omega = Box4::new([0.1, 0.2, 0.0, 0.3], [0.9, 1.0, 0.7, 1.1]).unwrap();
        let dom = Box4::new([0.0; 4], [1.2; 4]).unwrap();
        let spec = QuadratureSpec::uniform(8).unwrap();
        for psi in [
            StructuralSet::standard(),
            StructuralSet::validate([Quaternion::ONE, Quaternion::J, Quaternion::I, Quaternion::K]).unwrap(),
        ] {
            let one = Field4::callable(|_| Quaternion::ONE, dom).unwrap();
            for m in 0..4 {
                let f = Field4::callable(move |x| Quaternion::real(x[m]), dom).unwrap();
                let r = stokes_classical(&f, &one, &omega, &psi, &spec).unwrap();
                assert!(r.residual < 1e-10, "{m}: {r:?}");
                assert!((r.boundary - psi.get(m) * omega.volume()).norm() < 1e-12);
            }
        }
    }
}
