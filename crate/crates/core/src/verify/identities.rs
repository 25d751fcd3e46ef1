//! The identity implementations behind the verification registry.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::scenario::{OneDSpec, ReductionFamily, Scenario};
use super::{Gate, IdentityInfo, Outcome, RunContext, Tier};
use crate::error::{Error, Result};
use crate::field4d::{
    coord_frac_integral, quat_prop_d, AxisOrders, AxisWeights, CoordTransform, Field4, MultSide, PropDField,
};
use crate::frac1d::{
    frac_integral_fn, prop_frac_deriv, product_quadrature, rl_deriv_fn, FracAxisParams, Function1D, Mesh1D, Sense,
    Side, SingularEnd, WeightFunction, ENDPOINT_BUFFER_STEPS,
};
use crate::frac_geom::{
    assembled_bp, frac_stokes, outer_derivative_of_one, weighted_bp, AssembledBp, OuterSpec, WeightedTransform,
};
use crate::fueter::{conjugation_values, frac_fueter, lambda_profile, OperatorSpec};
use crate::geom::{bp_classical, stokes_classical};
use crate::quat::Quaternion;
use crate::special::{gamma, gamma_lower_regularized};

pub(super) fn all() -> Vec<IdentityInfo> {
    vec![
        IdentityInfo {
            id: "algebra",
            description: "quaternion norm multiplicativity, conjugate reversal and associativity on random triples",
            tier: Tier::Exact,
            grid: "samples",
            default_ladder: &[10_000],
            run: algebra,
        },
        IdentityInfo {
            id: "frac1d_oracles",
            description: "1D proportional integrals and derivatives against Beta, exponential-cancellation and incomplete-gamma closed forms",
            tier: Tier::Quadrature,
            grid: "mesh cells",
            default_ladder: &[2048],
            run: frac1d_oracles,
        },
        IdentityInfo {
            id: "fundamental",
            description: "1D inversion D^{α,σ,φ}∘I^{α,σ,φ} = id on both sides",
            tier: Tier::Nested,
            grid: "mesh cells",
            default_ladder: &[256, 512, 1024, 2048],
            run: fundamental,
        },
        IdentityInfo {
            id: "semigroup",
            description: "1D semigroup I^{α}I^{β} = I^{α+β} of the proportional integrals",
            tier: Tier::Quadrature,
            grid: "mesh cells",
            default_ladder: &[1024],
            run: semigroup,
        },
        IdentityInfo {
            id: "stokes_classical",
            description: "classical quaternionic Stokes formula on a box",
            tier: Tier::Quadrature,
            grid: "cells per axis",
            default_ladder: &[8, 12, 16, 24],
            run: stokes_classical_identity,
        },
        IdentityInfo {
            id: "bp_classical",
            description: "classical Borel-Pompeiu reconstruction inside and outside a box",
            tier: Tier::Quadrature,
            grid: "cells per axis",
            default_ladder: &[12, 16, 24],
            run: bp_classical_identity,
        },
        IdentityInfo {
            id: "prop_3_3_conjugation",
            description: "exponential conjugation of the proportional fractional Fueter operators (plain or weighted)",
            tier: Tier::Nested,
            grid: "mesh cells",
            default_ladder: &[64, 128, 256],
            run: conjugation,
        },
        IdentityInfo {
            id: "prop_3_4_stokes",
            description: "fractional Stokes formula with exponential weights (plain or with respect to φ, ϑ)",
            tier: Tier::Nested,
            grid: "cells per axis",
            default_ladder: &[8, 12, 16],
            run: frac_stokes_identity,
        },
        IdentityInfo {
            id: "stokes_collapse",
            description: "with unit proportions the fractional Stokes residual equals the classical one on the inner integrals",
            tier: Tier::Exact,
            grid: "cells per axis",
            default_ladder: &[12],
            run: stokes_collapse,
        },
        IdentityInfo {
            id: "frac_bp_weighted",
            description: "weighted Borel-Pompeiu reconstruction of the inner integral before the outer derivatives",
            tier: Tier::Quadrature,
            grid: "cells per axis",
            default_ladder: &[8, 12, 16],
            run: frac_bp_weighted,
        },
        IdentityInfo {
            id: "frac_bp",
            description: "assembled fractional Borel-Pompeiu formula with N-terms, interior and exterior",
            tier: Tier::Nested,
            grid: "cells per axis",
            default_ladder: &[8, 12, 16],
            run: frac_bp_identity,
        },
        IdentityInfo {
            id: "cor_3_5_cauchy",
            description: "Cauchy formula as Borel-Pompeiu minus the volume terms (implication-mode regrouping)",
            tier: Tier::Exact,
            grid: "cells per axis",
            default_ladder: &[8],
            run: cauchy_implication,
        },
        IdentityInfo {
            id: "cauchy_constructive",
            description: "boundary-only Cauchy reconstruction for a field whose inner integral is hyperholomorphic",
            tier: Tier::Nested,
            grid: "cells per axis",
            default_ladder: &[8, 12],
            run: cauchy_constructive,
        },
        IdentityInfo {
            id: "remark_3_6_caputo_rl",
            description: "relations between the Riemann-Liouville and Caputo fractional Fueter operators",
            tier: Tier::Nested,
            grid: "mesh cells",
            default_ladder: &[64, 128, 256],
            run: caputo_rl,
        },
        IdentityInfo {
            id: "reductions",
            description: "reductions for φ = Σx_k and the Katugampola / Hadamard weights",
            tier: Tier::Nested,
            grid: "mesh cells",
            default_ladder: &[256],
            run: reductions,
        },
    ]
}

fn need_samples(o: Outcome) -> Result<Outcome> {
    if o.lhs.is_none() {
        return Err(Error::Config("the scenario provides no sample points for this identity".into()));
    }
    Ok(o)
}

fn one_d(s: &Scenario) -> Result<&OneDSpec> {
    s.one_d.as_ref().ok_or_else(|| Error::Config(format!("scenario {} has no 1D slice", s.id)))
}

fn line_fn(s: &Scenario, d: &OneDSpec, ctx: &RunContext) -> Result<impl Fn(f64) -> Quaternion + Sync + Send> {
    let psi = s.structural_set()?;
    let f = d.f.build(&psi, ctx.seed)?;
    Ok(move |t: f64| f(&[t, 0.0, 0.0, 0.0]))
}

fn weight(label: crate::frac1d::WeightLabel, a: f64, b: f64, mesh: &Mesh1D) -> Result<WeightFunction> {
    let w = WeightFunction::from_label(label)?;
    w.check_increasing(a, b, mesh).map_err(|e| Error::Precondition(e.to_string()))?;
    Ok(w)
}

fn nan_quat() -> Quaternion {
    Quaternion::new(f64::NAN, f64::NAN, f64::NAN, f64::NAN)
}

// ---------------------------------------------------------------- algebra

fn algebra(_s: &Scenario, ctx: &RunContext, samples: usize) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut draw = || Quaternion::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let mut o = Outcome::default();
    for _ in 0..samples {
        let (x, y, z) = (draw(), draw(), draw());
        let xy = x * y;
        let norm = (xy.norm() - x.norm() * y.norm()).abs();
        let conj = (xy.conj() - y.conj() * x.conj()).norm();
        let assoc = (xy * z - x * (y * z)).norm();
        o.detail_max("norm_defect", norm);
        o.detail_max("conj_defect", conj);
        o.detail_max("assoc_defect", assoc);
        o.record(xy * z, x * (y * z));
        o.record_with_scale(Quaternion::real(xy.norm()), Quaternion::real(x.norm() * y.norm()), norm, 1.0);
        o.record_with_scale(xy.conj(), y.conj() * x.conj(), conj, 1.0);
    }
    need_samples(o)
}

// ---------------------------------------------------------------- 1D oracles

/// Relative error against a closed form, with an absolute floor for tiny values.
fn rel_err(v: Quaternion, exact: Quaternion) -> f64 {
    (v - exact).norm() / exact.norm().max(1e-300)
}

fn frac1d_oracles(s: &Scenario, _ctx: &RunContext, n: usize) -> Result<Outcome> {
    let d = one_d(s)?;
    let (a, b, alpha) = (d.a, d.b, d.alpha);
    let mesh = Mesh1D::new(n, d.grading)?;
    let id = WeightFunction::identity();
    let mut o = Outcome::default();
    let mut integral_rel: f64 = 0.0;
    let mut deriv_rel: f64 = 0.0;
    for &t in &d.points {
        // Beta integral: I^α (τ-a)^{β-1} = Γ(β)/Γ(α+β) (t-a)^{α+β-1}
        for beta in [1.5, 2.0] {
            let p = FracAxisParams::left(alpha, 1.0, a, b)?;
            let v = frac_integral_fn(|tau| Quaternion::real((tau - a).max(0.0).powf(beta - 1.0)), &p, &id, t, &mesh)?;
            let exact = Quaternion::real(gamma(beta) / gamma(alpha + beta) * (t - a).powf(alpha + beta - 1.0));
            let r = rel_err(v, exact);
            integral_rel = integral_rel.max(r);
            o.record_with_scale(v, exact, (v - exact).norm(), exact.norm());
        }
        // exponential cancellation: I^{α,σ} e^{cτ} = e^{ct}(t-a)^α / (σ^α Γ(α+1))
        for sigma in [0.5, 0.8] {
            let c = (sigma - 1.0) / sigma;
            let p = FracAxisParams::left(alpha, sigma, a, b)?;
            let v = frac_integral_fn(|tau| Quaternion::new(1.0, 0.0, 2.0, 0.0) * (c * tau).exp(), &p, &id, t, &mesh)?;
            let exact = Quaternion::new(1.0, 0.0, 2.0, 0.0)
                * ((c * t).exp() * (t - a).powf(alpha) / (sigma.powf(alpha) * gamma(alpha + 1.0)));
            integral_rel = integral_rel.max(rel_err(v, exact));
            o.record_with_scale(v, exact, (v - exact).norm(), exact.norm());
        }
        // derivative of the constant 1, skipped inside the endpoint buffer
        let one = Function1D::from_fn(|_| Quaternion::ONE, a, b)?;
        for sigma in [1.0, 0.5] {
            let p = FracAxisParams::left(alpha, sigma, a, b)?;
            let h = (b - a) / n as f64;
            if t - a < ENDPOINT_BUFFER_STEPS * h {
                o.warn(format!("t = {t} inside the endpoint buffer; skipped"));
                continue;
            }
            let v = prop_frac_deriv(&one, &p, &id, Sense::RiemannLiouville, t, &mesh)?.value;
            let exact = Quaternion::real(derivative_of_one_oracle(alpha, sigma, t - a));
            deriv_rel = deriv_rel.max(rel_err(v, exact));
            o.record_with_scale(v, exact, (v - exact).norm(), exact.norm());
        }
    }
    o.details.insert("integral_rel".into(), integral_rel);
    o.details.insert("derivative_rel".into(), deriv_rel);
    o.gates.push(Gate::at_most("integral_rel", integral_rel, 1e-4));
    need_samples(o)
}

/// `D^{α,σ}[1]` at distance `l` from the lower end: `l^{-α}/Γ(1-α)` for
/// `σ = 1`, otherwise through the regularized lower incomplete gamma function.
pub fn derivative_of_one_oracle(alpha: f64, sigma: f64, l: f64) -> f64 {
    let s = 1.0 - alpha;
    if sigma == 1.0 {
        return l.powf(-alpha) / gamma(s);
    }
    let kappa = (1.0 - sigma) / sigma;
    let pre = (1.0 - sigma).powf(-s);
    let g = pre * gamma_lower_regularized(s, kappa * l);
    let dg = pre * kappa * (kappa * l).powf(s - 1.0) * (-kappa * l).exp() / gamma(s);
    (1.0 - sigma) * g + sigma * dg
}

fn fundamental(s: &Scenario, ctx: &RunContext, n: usize) -> Result<Outcome> {
    let d = one_d(s)?;
    let f = line_fn(s, d, ctx)?;
    let mesh = Mesh1D::new(n, d.grading)?;
    let mut o = Outcome::default();
    for &label in &d.phis {
        let phi = weight(label, d.a, d.b, &mesh)?;
        for &sigma in &d.sigmas {
            for side in [Side::Left, Side::Right] {
                let p = FracAxisParams::new(d.alpha, sigma, side, d.a, d.b)?;
                let h = (d.b - d.a) / n as f64;
                let inner = |u: f64| frac_integral_fn(&f, &p, &phi, u, &mesh).unwrap_or_else(|_| nan_quat());
                for &t in &d.points {
                    let dist = match side {
                        Side::Left => t - d.a,
                        Side::Right => d.b - t,
                    };
                    if dist < ENDPOINT_BUFFER_STEPS * h {
                        o.warn(format!("t = {t} inside the {side:?} endpoint buffer; skipped"));
                        continue;
                    }
                    let v = rl_deriv_fn(inner, &p, &phi, t, &mesh)?;
                    for w in v.warnings {
                        o.warn(w);
                    }
                    o.record(v.value, f(t));
                }
            }
        }
    }
    need_samples(o)
}

fn semigroup(s: &Scenario, ctx: &RunContext, n: usize) -> Result<Outcome> {
    let d = one_d(s)?;
    let f = line_fn(s, d, ctx)?;
    let mesh = Mesh1D::new(n, d.grading)?;
    if d.order_pairs.is_empty() {
        return Err(Error::Config("the semigroup identity needs order_pairs".into()));
    }
    let mut o = Outcome::default();
    for &label in &d.phis {
        let phi = weight(label, d.a, d.b, &mesh)?;
        for &sigma in &d.sigmas {
            for &[al, be] in &d.order_pairs {
                let pa = FracAxisParams::left(al, sigma, d.a, d.b)?;
                let pb = FracAxisParams::left(be, sigma, d.a, d.b)?;
                let pab = FracAxisParams::left(al + be, sigma, d.a, d.b)?;
                let inner = |u: f64| frac_integral_fn(&f, &pb, &phi, u, &mesh).unwrap_or_else(|_| nan_quat());
                for &t in &d.points {
                    let lhs = frac_integral_fn(inner, &pa, &phi, t, &mesh)?;
                    let rhs = frac_integral_fn(&f, &pab, &phi, t, &mesh)?;
                    // relative to the value itself
                    o.record_with_scale(lhs, rhs, (lhs - rhs).norm(), rhs.norm().max(1e-300));
                }
            }
        }
    }
    need_samples(o)
}

// ---------------------------------------------------------------- classical

fn stokes_classical_identity(s: &Scenario, ctx: &RunContext, nodes: usize) -> Result<Outcome> {
    let psi = s.structural_set()?;
    let omega = s.omega_box()?;
    let spec = s.quadrature(nodes)?;
    let mut o = Outcome::default();
    for pair in s.field_pairs() {
        let f = s.field(&pair.f, ctx.seed)?;
        let g = s.field(&pair.g, ctx.seed)?;
        let r = stokes_classical(&f, &g, &omega, &psi, &spec)?;
        o.record(r.boundary, r.volume);
    }
    need_samples(o)
}

fn bp_classical_identity(s: &Scenario, ctx: &RunContext, nodes: usize) -> Result<Outcome> {
    let psi = s.structural_set()?;
    let omega = s.omega_box()?;
    let spec = s.quadrature(nodes)?;
    let mut o = Outcome::default();
    for pair in s.field_pairs() {
        let f = s.field(&pair.f, ctx.seed)?;
        let g = s.field(&pair.g, ctx.seed)?;
        for (x, key) in s.points.iter().map(|x| (x, "interior_abs")).chain(s.exterior_points.iter().map(|x| (x, "exterior_abs"))) {
            let r = bp_classical(&f, &g, &omega, &psi, x, &spec)?;
            for w in r.warnings {
                o.warn(w);
            }
            o.detail_max(key, r.residual);
            o.record(r.value, r.target);
        }
    }
    need_samples(o)
}

// ---------------------------------------------------------------- fractional

fn mesh_with(s: &Scenario, n: usize) -> Result<Mesh1D> {
    let grading = s.mesh.map_or(2.0, |m| m.grading);
    Mesh1D::new(n, grading)
}

fn f_spec(s: &Scenario, phi: Option<AxisWeights>) -> Result<OperatorSpec> {
    Ok(OperatorSpec::f_side(&s.params()?, Sense::RiemannLiouville, Side::Left, MultSide::Left, phi))
}

fn g_spec(s: &Scenario, theta: Option<AxisWeights>) -> Result<OperatorSpec> {
    Ok(OperatorSpec::g_side(&s.params()?, Sense::RiemannLiouville, Side::Right, MultSide::Right, theta))
}

fn conjugation(s: &Scenario, ctx: &RunContext, n: usize) -> Result<Outcome> {
    let psi = s.structural_set()?;
    let q = s.base_point()?;
    let mesh = mesh_with(s, n)?;
    let mut o = Outcome::default();
    let sides = [(s.f.clone(), f_spec(s, s.phi_weights()?)?), (s.g.clone(), g_spec(s, s.theta_weights()?)?)];
    for (field, spec) in sides {
        if field.is_zero() {
            continue;
        }
        let profile = lambda_profile(&psi, spec.phi.as_ref(), spec.sigma_quat)?;
        if !profile.exists {
            return Err(Error::Unsupported("λ profile does not exist".into()));
        }
        let t = spec.transform(s.field(&field, ctx.seed)?, q, mesh)?;
        for x in &s.points {
            let v = conjugation_values(&t, &psi, &spec, &profile, x)?;
            o.record(v.conjugated, v.direct);
        }
    }
    need_samples(o)
}

fn weighted_pair(s: &Scenario, ctx: &RunContext, mesh: Mesh1D) -> Result<(WeightedTransform<Field4>, WeightedTransform<Field4>)> {
    let psi = s.structural_set()?;
    let q = s.base_point()?;
    let wf = WeightedTransform::new(s.field(&s.f, ctx.seed)?, f_spec(s, s.phi_weights()?)?, &psi, q, mesh)?;
    let wg = WeightedTransform::new(s.field(&s.g, ctx.seed)?, g_spec(s, s.theta_weights()?)?, &psi, q, mesh)?;
    Ok((wf, wg))
}

fn strictly_inside(s: &Scenario) -> Result<()> {
    let (dom, omega) = (s.domain_box()?, s.omega_box()?);
    if !(0..4).all(|k| omega.a[k] > dom.a[k] && omega.b[k] < dom.b[k]) {
        return Err(Error::Precondition("Ω must lie strictly inside the domain".into()));
    }
    Ok(())
}

fn frac_stokes_identity(s: &Scenario, ctx: &RunContext, nodes: usize) -> Result<Outcome> {
    strictly_inside(s)?;
    let psi = s.structural_set()?;
    let (wf, wg) = weighted_pair(s, ctx, s.mesh()?)?;
    let r = frac_stokes(&wf, &wg, &s.omega_box()?, &psi, &s.quadrature(nodes)?)?;
    let mut o = Outcome::default();
    o.record(r.boundary, r.volume);
    o.details.insert("weighted".into(), if s.phi.is_some() || s.theta.is_some() { 1.0 } else { 0.0 });
    Ok(o)
}

fn stokes_collapse(s: &Scenario, ctx: &RunContext, nodes: usize) -> Result<Outcome> {
    strictly_inside(s)?;
    let p = s.params()?;
    let unit = p.sigma_axes == [1.0; 4] && p.rho_axes == [1.0; 4];
    if !unit || p.sigma_quat != Quaternion::ONE || p.rho_quat != Quaternion::ONE || s.phi.is_some() || s.theta.is_some() {
        return Err(Error::Precondition("the collapse needs unit proportions and no weights".into()));
    }
    let psi = s.structural_set()?;
    let (wf, wg) = weighted_pair(s, ctx, s.mesh()?)?;
    let omega = s.omega_box()?;
    let spec = s.quadrature(nodes)?;
    let frac = frac_stokes(&wf, &wg, &omega, &psi, &spec)?;
    let classical = stokes_classical(&wf.transform, &wg.transform, &omega, &psi, &spec)?;
    let mut o = Outcome::default();
    let abs = (frac.residual - classical.residual).abs();
    o.record_with_scale(Quaternion::real(frac.residual), Quaternion::real(classical.residual), abs, 1.0);
    o.details.insert("fractional_residual".into(), frac.residual);
    o.details.insert("classical_residual".into(), classical.residual);
    o.details.insert("boundary_difference".into(), (frac.boundary - classical.boundary).norm());
    o.details.insert("volume_difference".into(), (frac.volume - classical.volume).norm());
    Ok(o)
}

/// The sides of a scenario with a nonzero field.
fn active_sides(s: &Scenario, ctx: &RunContext, mesh: Mesh1D) -> Result<Vec<WeightedTransform<Field4>>> {
    let psi = s.structural_set()?;
    let q = s.base_point()?;
    let mut out = Vec::new();
    if !s.f.is_zero() {
        out.push(WeightedTransform::new(s.field(&s.f, ctx.seed)?, f_spec(s, s.phi_weights()?)?, &psi, q, mesh)?);
    }
    if !s.g.is_zero() {
        out.push(WeightedTransform::new(s.field(&s.g, ctx.seed)?, g_spec(s, s.theta_weights()?)?, &psi, q, mesh)?);
    }
    Ok(out)
}

fn frac_bp_weighted(s: &Scenario, ctx: &RunContext, nodes: usize) -> Result<Outcome> {
    let psi = s.structural_set()?;
    let omega = s.omega_box()?;
    let spec = s.quadrature(nodes)?;
    let mut o = Outcome::default();
    for w in active_sides(s, ctx, s.mesh()?)? {
        for (x, key) in s.points.iter().map(|x| (x, "interior_abs")).chain(s.exterior_points.iter().map(|x| (x, "exterior_abs"))) {
            let r = weighted_bp(&w, &omega, &psi, x, &spec)?;
            for warning in r.parts.warnings.iter() {
                o.warn(warning.clone());
            }
            o.detail_max(key, r.residual);
            o.record(r.parts.value(), r.target);
        }
    }
    need_samples(o)
}

fn outer_spec(s: &Scenario) -> Result<OuterSpec> {
    let mesh = match s.outer_mesh {
        Some(m) => m,
        None => Mesh1D::graded(32)?,
    };
    mesh.validate()?;
    Ok(OuterSpec::new(mesh))
}

/// Assembled Borel-Pompeiu results for every active side and sample point.
fn assembled_all(s: &Scenario, ctx: &RunContext, nodes: usize) -> Result<Vec<(AssembledBp, &'static str)>> {
    let psi = s.structural_set()?;
    let omega = s.omega_box()?;
    let spec = s.quadrature(nodes)?;
    let outer = outer_spec(s)?;
    let mut out = Vec::new();
    for w in active_sides(s, ctx, s.mesh()?)? {
        for (x, key) in s.points.iter().map(|x| (x, "interior")).chain(s.exterior_points.iter().map(|x| (x, "exterior"))) {
            out.push((assembled_bp(&w, &omega, &psi, x, &spec, &outer)?, key));
        }
    }
    Ok(out)
}

fn frac_bp_identity(s: &Scenario, ctx: &RunContext, nodes: usize) -> Result<Outcome> {
    let mut o = Outcome::default();
    for (r, key) in assembled_all(s, ctx, nodes)? {
        for w in &r.warnings {
            o.warn(w.clone());
        }
        o.detail_max(&format!("{key}_abs"), r.residual);
        o.detail_max("n_term_norm", r.n_term.norm());
        o.record(r.value, r.target);
    }
    need_samples(o)
}

fn cauchy_implication(s: &Scenario, ctx: &RunContext, nodes: usize) -> Result<Outcome> {
    let mut o = Outcome::default();
    for (r, _) in assembled_all(s, ctx, nodes)? {
        // boundary-only error, minus the dropped volume terms, minus the BP residual
        let cauchy_error = r.boundary - r.target;
        let bp_residual = r.value - r.target;
        let regrouped = cauchy_error - r.volume;
        let scale = r.boundary.norm() + r.volume.norm() + r.target.norm();
        o.detail_max("cauchy_error", cauchy_error.norm());
        o.detail_max("volume_terms", r.volume.norm());
        o.detail_max("bp_residual", bp_residual.norm());
        o.record_with_scale(regrouped, bp_residual, (regrouped - bp_residual).norm(), scale.max(1.0));
    }
    // the Stokes-type Cauchy theorem regroups the same way when Ω is interior
    if strictly_inside(s).is_ok() && !s.f.is_zero() && !s.g.is_zero() {
        let psi = s.structural_set()?;
        let (wf, wg) = weighted_pair(s, ctx, s.mesh()?)?;
        let st = frac_stokes(&wf, &wg, &s.omega_box()?, &psi, &s.quadrature(nodes)?)?;
        let lhs = st.boundary - st.volume;
        let scale = st.boundary.norm() + st.volume.norm();
        o.detail_max("stokes_volume_terms", st.volume.norm());
        o.record_with_scale(lhs, lhs, (st.residual - lhs.norm()).abs(), scale.max(1.0));
    }
    need_samples(o)
}

fn cauchy_constructive(s: &Scenario, ctx: &RunContext, nodes: usize) -> Result<Outcome> {
    let p = s.params()?;
    if p.sigma_axes != [1.0; 4] || p.sigma_quat != Quaternion::ONE {
        return Err(Error::Precondition("the constructive case needs unit proportions".into()));
    }
    let mut o = Outcome::default();
    let mut volume: f64 = 0.0;
    for (r, key) in assembled_all(s, ctx, nodes)? {
        volume = volume.max(r.volume.norm());
        o.detail_max(&format!("{key}_boundary_only_abs"), (r.boundary - r.target).norm());
        o.record(r.boundary, r.target);
    }
    o.details.insert("volume_terms".into(), volume);
    o.gates.push(Gate::at_most("volume_terms", volume, 1e-6));
    need_samples(o)
}

fn caputo_rl(s: &Scenario, ctx: &RunContext, n: usize) -> Result<Outcome> {
    if s.phi.is_some() {
        return Err(Error::Precondition("the Caputo relations are stated without weights".into()));
    }
    let psi = s.structural_set()?;
    let q = s.base_point()?;
    let mesh = mesh_with(s, n)?;
    let dom = s.domain_box()?;
    let params = s.params()?;
    let spec = f_spec(s, None)?;
    let h = s.field(&s.f, ctx.seed)?;
    let mut o = Outcome::default();
    let mut rel1: f64 = 0.0;
    let mut rel2: f64 = 0.0;

    // relation 1: f = I^{1-α}h (by coordinates at q)
    let f_t = CoordTransform::new(&h, &params.f_integral(), None, Side::Left, q, mesh)?;
    let caputo = CoordTransform::new(
        PropDField { inner: &f_t, psi, sigma_quat: params.sigma_quat, phi: None, side: MultSide::Left },
        &params.f_integral(),
        None,
        Side::Left,
        q,
        mesh,
    )?;
    let id = WeightFunction::identity();
    let outer = OuterSpec::new(mesh);
    for x in &s.points {
        let mut lhs = Quaternion::ZERO;
        let mut d_one = [Quaternion::ZERO; 4];
        for i in 0..4 {
            let p = FracAxisParams::left(1.0 - params.alpha[i], params.sigma_axes[i], dom.a[i], dom.b[i])?;
            let line = |t: f64| {
                let mut y = *x;
                y[i] = t;
                caputo.value(&y).unwrap_or_else(|_| nan_quat())
            };
            let v = rl_deriv_fn(line, &p, &id, x[i], &mesh)?;
            for w in v.warnings {
                o.warn(w);
            }
            lhs += v.value;
            d_one[i] = outer_derivative_of_one(&p, &id, x[i], &outer)?;
        }
        for i in 0..4 {
            let lambda_i = (0..4).filter(|&j| j != i).fold(Quaternion::ZERO, |acc, j| acc + d_one[j]);
            lhs -= caputo.axis_term(i, x[i])? * lambda_i;
        }
        let mut rhs = Quaternion::ZERO;
        for i in 0..4 {
            let mut y = q;
            y[i] = x[i];
            let v = frac_fueter(&h, &psi, &spec, &q, &y, &mesh)?;
            for w in v.warnings {
                o.warn(w);
            }
            rhs += v.value;
        }
        let r = (lhs - rhs).norm() / rhs.norm().max(1.0);
        rel1 = rel1.max(r);
        o.record(lhs, rhs);
    }

    // relation 2: f = ψD^σ h; RL operator of f against ψD^σ of the Caputo operator of h
    let f2 = PropDField { inner: &h, psi, sigma_quat: params.sigma_quat, phi: None, side: MultSide::Left };
    let caputo_h = CoordTransform::new(
        PropDField { inner: &h, psi, sigma_quat: params.sigma_quat, phi: None, side: MultSide::Left },
        &params.f_integral(),
        None,
        Side::Left,
        q,
        mesh,
    )?;
    for x in &s.points {
        let lhs = frac_fueter(&f2, &psi, &spec, &q, x, &mesh)?.value;
        let rhs = quat_prop_d(&caputo_h, &psi, params.sigma_quat, None, MultSide::Left, x)?;
        rel2 = rel2.max((lhs - rhs).norm() / rhs.norm().max(1.0));
        o.record(lhs, rhs);
    }
    o.details.insert("relation1_rel".into(), rel1);
    o.details.insert("relation2_rel".into(), rel2);
    need_samples(o)
}

fn reductions(s: &Scenario, ctx: &RunContext, n: usize) -> Result<Outcome> {
    let family = s
        .reduction
        .ok_or_else(|| Error::Config(format!("scenario {} selects no reduction family", s.id)))?;
    match family {
        ReductionFamily::CoordinateSum => coordinate_sum_reduction(s, ctx, n),
        ReductionFamily::CoordinateSumUnitProportions => unit_proportion_reduction(s, ctx, n),
        ReductionFamily::Katugampola { mu } => {
            let d = one_d(s)?;
            let direct = move |f: &(dyn Fn(f64) -> Quaternion + Sync), alpha: f64, t: f64, mesh: &Mesh1D| {
                // μ^{-α}/Γ(α) ∫_{a^μ}^{t^μ} (t^μ - u)^{α-1} f(u^{1/μ}) du
                let v = product_quadrature(|u: f64| f(u.powf(1.0 / mu)), alpha, d.a.powf(mu), t.powf(mu), mesh, SingularEnd::Upper)?;
                Ok(v * (mu.powf(-alpha) / gamma(alpha)))
            };
            weight_equivalence(s, ctx, n, WeightFunction::power(mu), &direct)
        }
        ReductionFamily::Hadamard => {
            let d = one_d(s)?;
            let direct = move |f: &(dyn Fn(f64) -> Quaternion + Sync), alpha: f64, t: f64, mesh: &Mesh1D| {
                // 1/Γ(α) ∫_{ln a}^{ln t} (ln t - u)^{α-1} f(e^u) du
                let v = product_quadrature(|u: f64| f(u.exp()), alpha, d.a.ln(), t.ln(), mesh, SingularEnd::Upper)?;
                Ok(v * (1.0 / gamma(alpha)))
            };
            weight_equivalence(s, ctx, n, WeightFunction::log(), &direct)
        }
    }
}

type DirectForm<'a> = dyn Fn(&(dyn Fn(f64) -> Quaternion + Sync), f64, f64, &Mesh1D) -> Result<Quaternion> + 'a;

/// Integrals of orders `α` and `1-α` with respect to `φ` (σ = 1) against a
/// direct quadrature of the classical weighted form.
fn weight_equivalence(s: &Scenario, ctx: &RunContext, n: usize, phi: WeightFunction, direct: &DirectForm) -> Result<Outcome> {
    let d = one_d(s)?;
    let f = line_fn(s, d, ctx)?;
    let mesh = Mesh1D::new(n, d.grading)?;
    phi.check_increasing(d.a, d.b, &mesh).map_err(|e| Error::Precondition(e.to_string()))?;
    let mut o = Outcome::default();
    for order in [d.alpha, 1.0 - d.alpha] {
        let p = FracAxisParams::left(order, 1.0, d.a, d.b)?;
        for &t in &d.points {
            let lhs = frac_integral_fn(&f, &p, &phi, t, &mesh)?;
            let rhs = direct(&f, order, t, &mesh)?;
            o.record(lhs, rhs);
        }
    }
    need_samples(o)
}

fn coordinate_sum_reduction(s: &Scenario, ctx: &RunContext, n: usize) -> Result<Outcome> {
    let psi = s.structural_set()?;
    let q = s.base_point()?;
    let mesh = mesh_with(s, n)?;
    let params = s.params()?;
    let f = s.field(&s.f, ctx.seed)?;
    let weighted = f_spec(s, Some(AxisWeights::coordinate_sum()))?;
    let plain = f_spec(s, None)?;
    let one_minus = Quaternion::ONE - params.sigma_quat;
    let mut o = Outcome::default();
    for x in &s.points {
        let dw = frac_fueter(&f, &psi, &weighted, &q, x, &mesh)?.value;
        let dp = frac_fueter(&f, &psi, &plain, &q, x, &mesh)?.value;
        let i = coord_frac_integral(&f, &params.f_integral(), None, Side::Left, &q, x, &mesh)?;
        let lhs = dw * 4.0;
        let rhs = dp + one_minus * i * 3.0;
        o.record(lhs, rhs);
    }
    need_samples(o)
}

fn unit_proportion_reduction(s: &Scenario, ctx: &RunContext, n: usize) -> Result<Outcome> {
    let params = s.params()?;
    if params.sigma_axes != [1.0; 4] || params.quat_override {
        return Err(Error::Precondition("this reduction needs σ_k = 1 and σ = Σψ_k".into()));
    }
    let psi = s.structural_set()?;
    let q = s.base_point()?;
    let mesh = mesh_with(s, n)?;
    let f = s.field(&s.f, ctx.seed)?;
    let weighted = f_spec(s, Some(AxisWeights::coordinate_sum()))?;
    let sum = psi.sum();
    let classical = OperatorSpec { sigma_quat: Quaternion::ONE, ..f_spec(s, None)? };
    let mut o = Outcome::default();
    for x in &s.points {
        let lhs = frac_fueter(&f, &psi, &weighted, &q, x, &mesh)?.value;
        let i = coord_frac_integral(&f, &AxisOrders::new(params.alpha.map(|a| 1.0 - a), [1.0; 4]), None, Side::Left, &q, x, &mesh)?;
        let d = frac_fueter(&f, &psi, &classical, &q, x, &mesh)?.value;
        let rhs = (Quaternion::ONE - sum) * i + sum * d * 0.25;
        o.record(lhs, rhs);
    }
    need_samples(o)
}
