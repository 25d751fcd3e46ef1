//! Scenario descriptions loaded from JSON and the field catalog they use.

use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field4d::{AxisWeights, Box4, Field4, FracVectorParams, Point4, PointFn};
use crate::frac1d::{Mesh1D, WeightFunction, WeightLabel};
use crate::geom::QuadratureSpec;
use crate::quat::{Quaternion, StructuralSet};
use crate::special::gamma;

/// A quaternion-valued test field on `R⁴` (coordinates in the structural set).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    #[default]
    Zero,
    Constant { value: [f64; 4] },
    /// `Σ coef·Π x_k^{powers_k}`.
    Polynomial { terms: Vec<Monomial> },
    /// `coef·e^{Σ rates_k x_k}`.
    ExpKernel { coef: [f64; 4], rates: [f64; 4] },
    /// Fueter variable `ζ_m = x_m - x_0 ψ_m` (`m` in 1..=3).
    Fueter { m: usize },
    /// `coef·(x_axis - shift)^power`, divided by `Γ(1+power)` when `normalize`.
    AxisPower {
        axis: usize,
        coef: [f64; 4],
        shift: f64,
        power: f64,
        #[serde(default)]
        normalize: bool,
    },
    /// `coef·sin(Σ freq_k x_k + phase)`.
    Sine { coef: [f64; 4], freq: [f64; 4], phase: f64 },
    /// Polynomial with coefficients drawn from the run seed (components in `[-1, 1]`).
    RandomPolynomial { degree: u32, seed_offset: u64 },
    Product { left: Box<FieldSpec>, right: Box<FieldSpec> },
    Sum { terms: Vec<FieldSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub coef: [f64; 4],
    pub powers: [u32; 4],
}

fn monomials_up_to(degree: u32) -> Vec<[u32; 4]> {
    let mut out = Vec::new();
    for total in 0..=degree {
        for p0 in (0..=total).rev() {
            for p1 in (0..=total - p0).rev() {
                for p2 in (0..=total - p0 - p1).rev() {
                    out.push([p0, p1, p2, total - p0 - p1 - p2]);
                }
            }
        }
    }
    out
}

fn eval_monomials(terms: &[(Quaternion, [u32; 4])], x: &Point4) -> Quaternion {
    terms.iter().fold(Quaternion::ZERO, |acc, (c, p)| {
        let m: f64 = (0..4).map(|k| x[k].powi(p[k] as i32)).product();
        acc + *c * m
    })
}

impl FieldSpec {
    /// Builds the field as a callable; `seed` feeds the random kinds.
    pub fn build(&self, psi: &StructuralSet, seed: u64) -> Result<PointFn> {
        Ok(match self {
            FieldSpec::Zero => Arc::new(|_| Quaternion::ZERO),
            FieldSpec::Constant { value } => {
                let c = Quaternion::from_array(*value);
                Arc::new(move |_| c)
            }
            FieldSpec::Polynomial { terms } => {
                let terms: Vec<_> = terms.iter().map(|t| (Quaternion::from_array(t.coef), t.powers)).collect();
                Arc::new(move |x| eval_monomials(&terms, x))
            }
            FieldSpec::ExpKernel { coef, rates } => {
                let (c, r) = (Quaternion::from_array(*coef), *rates);
                Arc::new(move |x| c * (0..4).map(|k| r[k] * x[k]).sum::<f64>().exp())
            }
            FieldSpec::Fueter { m } => {
                if !(1..=3).contains(m) {
                    return Err(Error::Config(format!("Fueter variable index {m} outside 1..=3")));
                }
                let (m, pm) = (*m, psi.get(*m));
                Arc::new(move |x| Quaternion::real(x[m]) - pm * x[0])
            }
            FieldSpec::AxisPower { axis, coef, shift, power, normalize } => {
                if *axis > 3 {
                    return Err(Error::Config(format!("axis {axis} outside 0..=3")));
                }
                let scale = if *normalize { 1.0 / gamma(1.0 + power) } else { 1.0 };
                let (axis, c, shift, power) = (*axis, Quaternion::from_array(*coef) * scale, *shift, *power);
                Arc::new(move |x| c * (x[axis] - shift).max(0.0).powf(power))
            }
            FieldSpec::Sine { coef, freq, phase } => {
                let (c, w, ph) = (Quaternion::from_array(*coef), *freq, *phase);
                Arc::new(move |x| c * ((0..4).map(|k| w[k] * x[k]).sum::<f64>() + ph).sin())
            }
            FieldSpec::RandomPolynomial { degree, seed_offset } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ seed_offset.wrapping_mul(0x9E37_79B9_7F4A_7C15));
                let terms: Vec<_> = monomials_up_to(*degree)
                    .into_iter()
                    .map(|p| {
                        let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..=1.0));
                        (Quaternion::from_array(c), p)
                    })
                    .collect();
                Arc::new(move |x| eval_monomials(&terms, x))
            }
            FieldSpec::Product { left, right } => {
                let (l, r) = (left.build(psi, seed)?, right.build(psi, seed)?);
                Arc::new(move |x| l(x) * r(x))
            }
            FieldSpec::Sum { terms } => {
                let parts = terms.iter().map(|t| t.build(psi, seed)).collect::<Result<Vec<_>>>()?;
                Arc::new(move |x| parts.iter().fold(Quaternion::ZERO, |acc, p| acc + p(x)))
            }
        })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, FieldSpec::Zero)
    }

    /// Short human-readable description.
    pub fn summary(&self) -> String {
        match self {
            FieldSpec::Zero => "0".into(),
            FieldSpec::Constant { .. } => "constant".into(),
            FieldSpec::Polynomial { terms } => {
                let deg = terms.iter().map(|t| t.powers.iter().sum::<u32>()).max().unwrap_or(0);
                format!("polynomial(deg {deg})")
            }
            FieldSpec::ExpKernel { .. } => "exp_kernel".into(),
            FieldSpec::Fueter { m } => format!("zeta_{m}"),
            FieldSpec::AxisPower { axis, power, .. } => format!("(x_{axis}-c)^{power}"),
            FieldSpec::Sine { .. } => "sine".into(),
            FieldSpec::RandomPolynomial { degree, .. } => format!("random_polynomial(deg {degree})"),
            FieldSpec::Product { left, right } => format!("({})*({})", left.summary(), right.summary()),
            FieldSpec::Sum { terms } => terms.iter().map(|t| t.summary()).collect::<Vec<_>>().join("+"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub a: Point4,
    pub b: Point4,
}

impl BoxSpec {
    pub fn build(&self) -> Result<Box4> {
        Box4::new(self.a, self.b)
    }
}

/// An `(f, g)` pair evaluated by the same identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldPair {
    #[serde(default)]
    pub f: FieldSpec,
    #[serde(default)]
    pub g: FieldSpec,
}

/// One-dimensional slice used by the 1D identities: `f(t)` is the scenario
/// field evaluated at `(t, 0, 0, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OneDSpec {
    pub a: f64,
    pub b: f64,
    pub f: FieldSpec,
    #[serde(default = "default_alpha1")]
    pub alpha: f64,
    #[serde(default = "default_sigmas")]
    pub sigmas: Vec<f64>,
    #[serde(default = "default_phis")]
    pub phis: Vec<WeightLabel>,
    pub points: Vec<f64>,
    /// `(α, β)` pairs for the semigroup identity.
    #[serde(default)]
    pub order_pairs: Vec<[f64; 2]>,
    #[serde(default = "default_grading")]
    pub grading: f64,
}

fn default_alpha1() -> f64 {
    0.4
}
fn default_sigmas() -> Vec<f64> {
    vec![1.0]
}
fn default_phis() -> Vec<WeightLabel> {
    vec![WeightLabel::Identity]
}
fn default_grading() -> f64 {
    2.0
}

/// Which closing-remark reduction a scenario exercises.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionFamily {
    /// `φ = x_0+x_1+x_2+x_3`: `4·D^φ f = D f + 3(1-σ) I^{1-α} f`.
    CoordinateSum,
    /// `φ = x_0+…+x_3`, `σ_k = 1`: the operator splits into the classical
    /// fractional Fueter operator and the order `1-α` integral.
    CoordinateSumUnitProportions,
    /// `φ(t) = t^μ/μ`, `σ = 1`, against the Katugampola-form quadrature.
    Katugampola { mu: f64 },
    /// `φ = ln`, `σ = 1`, against the Hadamard-form quadrature.
    Hadamard,
}

/// Expectations that refine an identity's default pass criterion.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expect {
    /// Overrides the identity's tier tolerance.
    #[serde(default)]
    pub tolerance: Option<f64>,
    /// Minimum empirical order over a ladder of at least three grids.
    #[serde(default)]
    pub min_order: Option<f64>,
    /// Require strictly decreasing residuals over the ladder.
    #[serde(default)]
    pub decreasing: bool,
    /// Default ladder for this scenario (grid parameter of the identity).
    #[serde(default)]
    pub ladder: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    #[serde(default)]
    pub description: String,
    /// Identity ids this scenario is meant for.
    pub identities: Vec<String>,
    /// Structural set as four quaternions in the standard basis; default `{1, i, j, k}`.
    #[serde(default)]
    pub psi: Option<[[f64; 4]; 4]>,
    /// The field domain `J`.
    #[serde(default = "default_domain")]
    pub domain: BoxSpec,
    /// Integration box `Ω`.
    #[serde(default)]
    pub omega: Option<BoxSpec>,
    #[serde(default)]
    pub f: FieldSpec,
    #[serde(default)]
    pub g: FieldSpec,
    /// Additional `(f, g)` cases; when present they replace `(f, g)`.
    #[serde(default)]
    pub cases: Vec<FieldPair>,
    #[serde(default = "default_half")]
    pub alpha: [f64; 4],
    #[serde(default = "default_one")]
    pub sigma: [f64; 4],
    #[serde(default = "default_half")]
    pub beta: [f64; 4],
    #[serde(default = "default_one")]
    pub rho: [f64; 4],
    /// Explicit quaternionic proportions replacing `Σψ_kσ_k` / `Σψ_kρ_k`.
    #[serde(default)]
    pub sigma_quat: Option<[f64; 4]>,
    #[serde(default)]
    pub rho_quat: Option<[f64; 4]>,
    #[serde(default)]
    pub phi: Option<[WeightLabel; 4]>,
    #[serde(default)]
    pub theta: Option<[WeightLabel; 4]>,
    /// Base point of the by-coordinate operators; default the domain centre.
    #[serde(default)]
    pub q: Option<Point4>,
    #[serde(default)]
    pub points: Vec<Point4>,
    #[serde(default)]
    pub exterior_points: Vec<Point4>,
    #[serde(default)]
    pub quadrature: Option<QuadratureSpec>,
    /// Mesh of the by-coordinate integrals.
    #[serde(default)]
    pub mesh: Option<Mesh1D>,
    /// Mesh of the outer per-axis derivatives (assembled Borel-Pompeiu).
    #[serde(default)]
    pub outer_mesh: Option<Mesh1D>,
    #[serde(default)]
    pub one_d: Option<OneDSpec>,
    #[serde(default)]
    pub reduction: Option<ReductionFamily>,
    #[serde(default)]
    pub expect: Expect,
}

fn default_domain() -> BoxSpec {
    BoxSpec { a: [0.0; 4], b: [1.0; 4] }
}
fn default_half() -> [f64; 4] {
    [0.5; 4]
}
fn default_one() -> [f64; 4] {
    [1.0; 4]
}

pub const DEFAULT_MESH_NODES: usize = 256;

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Scenario::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() || !self.id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(Error::Config(format!("scenario id {:?} must be a non-empty [A-Za-z0-9_-] string", self.id)));
        }
        self.structural_set()?;
        let dom = self.domain.build()?;
        if let Some(o) = &self.omega {
            let o = o.build()?;
            if !dom.contains_box(&o) {
                return Err(Error::Config(format!("scenario {}: Ω leaves the domain", self.id)));
            }
        }
        if let Some(q) = &self.q {
            dom.check_point(q)?;
        }
        if let Some(d) = &self.one_d {
            if !(d.b > d.a) {
                return Err(Error::Config(format!("scenario {}: empty 1D interval", self.id)));
            }
        }
        Ok(())
    }

    pub fn structural_set(&self) -> Result<StructuralSet> {
        match &self.psi {
            None => Ok(StructuralSet::standard()),
            Some(rows) => StructuralSet::validate(rows.map(Quaternion::from_array)),
        }
    }

    pub fn domain_box(&self) -> Result<Box4> {
        self.domain.build()
    }

    /// `Ω`, or an error naming the identity that needs it.
    pub fn omega_box(&self) -> Result<Box4> {
        self.omega
            .as_ref()
            .ok_or_else(|| Error::Config(format!("scenario {} has no integration box", self.id)))?
            .build()
    }

    pub fn base_point(&self) -> Result<Point4> {
        Ok(match self.q {
            Some(q) => q,
            None => self.domain_box()?.center(),
        })
    }

    pub fn mesh(&self) -> Result<Mesh1D> {
        match self.mesh {
            Some(m) => {
                m.validate()?;
                Ok(m)
            }
            None => Mesh1D::graded(DEFAULT_MESH_NODES),
        }
    }

    pub fn quadrature(&self, nodes: usize) -> Result<QuadratureSpec> {
        let mut spec = self.quadrature.unwrap_or(QuadratureSpec::uniform(nodes)?);
        spec.volume_nodes = nodes;
        spec.face_nodes = nodes;
        spec.validate()?;
        Ok(spec)
    }

    /// The `(f, g)` pairs to evaluate.
    pub fn field_pairs(&self) -> Vec<FieldPair> {
        if self.cases.is_empty() {
            vec![FieldPair { f: self.f.clone(), g: self.g.clone() }]
        } else {
            self.cases.clone()
        }
    }

    pub fn field(&self, spec: &FieldSpec, seed: u64) -> Result<Field4> {
        let psi = self.structural_set()?;
        let f = spec.build(&psi, seed)?;
        Field4::callable(move |x| f(x), self.domain_box()?)
    }

    pub fn params(&self) -> Result<FracVectorParams> {
        let psi = self.structural_set()?;
        let mut p = FracVectorParams::new(self.alpha, self.sigma, &psi)?.with_g_side(self.beta, self.rho, &psi)?;
        if self.sigma_quat.is_some() || self.rho_quat.is_some() {
            let s = self.sigma_quat.map_or(p.sigma_quat, Quaternion::from_array);
            let r = self.rho_quat.map_or(p.rho_quat, Quaternion::from_array);
            p = p.with_quat_proportions(s, r)?;
        }
        p.validate(&psi)?;
        Ok(p)
    }

    pub fn phi_weights(&self) -> Result<Option<AxisWeights>> {
        weights(self.phi)
    }

    pub fn theta_weights(&self) -> Result<Option<AxisWeights>> {
        weights(self.theta)
    }

    /// One-line summary for listings.
    pub fn summary(&self) -> String {
        let fields = self
            .field_pairs()
            .iter()
            .map(|p| format!("f={} g={}", p.f.summary(), p.g.summary()))
            .collect::<Vec<_>>()
            .join("; ");
        let weights = match (&self.phi, &self.theta) {
            (None, None) => String::new(),
            _ => " weighted".into(),
        };
        format!(
            "[{}] {fields} alpha={:?} sigma={:?}{weights}",
            self.identities.join(","),
            self.alpha,
            self.sigma
        )
    }
}

fn weights(labels: Option<[WeightLabel; 4]>) -> Result<Option<AxisWeights>> {
    match labels {
        None => Ok(None),
        Some(l) => {
            let axes = [
                WeightFunction::from_label(l[0])?,
                WeightFunction::from_label(l[1])?,
                WeightFunction::from_label(l[2])?,
                WeightFunction::from_label(l[3])?,
            ];
            Ok(Some(AxisWeights::new(axes)))
        }
    }
}

/// Loads every `*.json` scenario in `dir`, sorted by id. A missing or empty
/// directory yields an empty catalog.
pub fn load_catalog(dir: &Path) -> Result<Vec<Scenario>> {
    let mut out = Vec::new();
    let entries = match std::fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(out),
        Err(e) => return Err(e.into()),
    };
    for entry in entries {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) == Some("json") {
            out.push(Scenario::load(&path)?);
        }
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    for w in out.windows(2) {
        if w[0].id == w[1].id {
            return Err(Error::Config(format!("duplicate scenario id {}", w[0].id)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_enumeration_counts() {
        // C(d+4, 4) monomials of degree ≤ d in four variables
        assert_eq!(monomials_up_to(0).len(), 1);
        assert_eq!(monomials_up_to(1).len(), 5);
        assert_eq!(monomials_up_to(2).len(), 15);
        assert_eq!(monomials_up_to(3).len(), 35);
    }

    #[test]
    fn random_polynomial_is_seeded() {
        let psi = StructuralSet::standard();
        let spec = FieldSpec::RandomPolynomial { degree: 2, seed_offset: 1 };
        let x = [0.3, -0.2, 0.7, 0.1];
        let a = spec.build(&psi, 7).unwrap()(&x);
        let b = spec.build(&psi, 7).unwrap()(&x);
        let c = spec.build(&psi, 8).unwrap()(&x);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn fueter_variable_matches_definition() {
        let psi = StructuralSet::standard();
        let z = FieldSpec::Fueter { m: 2 }.build(&psi, 0).unwrap();
        assert_eq!(z(&[2.0, 0.0, 3.0, 0.0]), Quaternion::new(3.0, 0.0, -2.0, 0.0));
        assert!(FieldSpec::Fueter { m: 0 }.build(&psi, 0).is_err());
    }

    #[test]
    fn scenario_json_round_trip() {
        let text = r#"{
            "id": "demo",
            "identities": ["stokes_classical"],
            "omega": {"a": [0.1,0.1,0.1,0.1], "b": [0.9,0.9,0.9,0.9]},
            "f": {"kind": "polynomial", "terms": [{"coef": [1,0,0,0], "powers": [1,0,0,0]}]},
            "phi": [{"kind": "log"}, {"kind": "identity"}, {"kind": "identity"}, {"kind": "identity"}]
        }"#;
        let s = Scenario::from_json(text).unwrap();
        assert_eq!(s.domain.b, [1.0; 4]);
        assert!(s.phi_weights().unwrap().is_some());
        let back = Scenario::from_json(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn omega_outside_domain_is_rejected() {
        let text = r#"{"id": "bad", "identities": [], "omega": {"a": [0,0,0,0], "b": [2,1,1,1]}}"#;
        assert!(Scenario::from_json(text).is_err());
    }
}
