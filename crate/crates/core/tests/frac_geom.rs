use qfrac::field4d::{Box4, Field4, FracVectorParams, MultSide, Point4};
use qfrac::frac1d::{FracAxisParams, Mesh1D, Sense, Side, WeightFunction};
use qfrac::frac_geom::{assembled_bp, frac_stokes, outer_derivative_of_one, weighted_bp, OuterSpec, WeightedTransform};
use qfrac::fueter::OperatorSpec;
use qfrac::geom::{stokes_classical, QuadratureSpec};
use qfrac::verify::identities::derivative_of_one_oracle;
use qfrac::{Error, Quaternion, StructuralSet};

fn cubic_f(x: &Point4) -> Quaternion {
    Quaternion::new(1.0 + x[0] * x[1], x[2] * x[2], -0.5 * x[3], x[0] * x[1] * x[2])
}

fn cubic_g(x: &Point4) -> Quaternion {
    Quaternion::new(x[3] - x[1] * x[1], 0.3, x[0] * x[2], 1.0 + x[1] * x[3])
}

/// f- and g-side transforms on `[0, 1.2]^4` with base point `0.6·1`.
fn pair(params: &FracVectorParams) -> (WeightedTransform<Field4>, WeightedTransform<Field4>) {
    let psi = StructuralSet::standard();
    let dom = Box4::new([0.0; 4], [1.2; 4]).unwrap();
    let f = Field4::callable(cubic_f, dom).unwrap();
    let g = Field4::callable(cubic_g, dom).unwrap();
    let fs = OperatorSpec::f_side(params, Sense::RiemannLiouville, Side::Left, MultSide::Left, None);
    let gs = OperatorSpec::g_side(params, Sense::RiemannLiouville, Side::Right, MultSide::Right, None);
    let mesh = Mesh1D::graded(64).unwrap();
    let q = [0.6; 4];
    (
        WeightedTransform::new(f, fs, &psi, q, mesh).unwrap(),
        WeightedTransform::new(g, gs, &psi, q, mesh).unwrap(),
    )
}

fn inner_omega() -> Box4 {
    Box4::new([0.2; 4], [1.0; 4]).unwrap()
}

#[test]
fn stokes_with_unit_proportions_is_the_classical_formula() {
    let psi = StructuralSet::standard();
    let params = FracVectorParams::new([0.4; 4], [1.0; 4], &psi)
        .unwrap()
        .with_g_side([0.3; 4], [1.0; 4], &psi)
        .unwrap()
        .with_quat_proportions(Quaternion::ONE, Quaternion::ONE)
        .unwrap();
    let (wf, wg) = pair(&params);
    let omega = inner_omega();
    let spec = QuadratureSpec::uniform(8).unwrap();
    let frac = frac_stokes(&wf, &wg, &omega, &psi, &spec).unwrap();
    let classical = stokes_classical(&wf.transform, &wg.transform, &omega, &psi, &spec).unwrap();
    assert!((frac.boundary - classical.boundary).norm() <= 1e-12);
    assert!((frac.volume - classical.volume).norm() <= 1e-12);
    assert!((frac.residual - classical.residual).abs() <= 1e-12);
}

#[test]
fn weighted_stokes_residual_shrinks_under_refinement() {
    let psi = StructuralSet::standard();
    let params = FracVectorParams::new([0.4; 4], [0.5; 4], &psi)
        .unwrap()
        .with_g_side([0.3; 4], [0.5; 4], &psi)
        .unwrap()
        .with_quat_proportions(Quaternion::real(0.5), Quaternion::real(0.5))
        .unwrap();
    let (wf, wg) = pair(&params);
    let omega = inner_omega();
    let residual = |n: usize| {
        let r = frac_stokes(&wf, &wg, &omega, &psi, &QuadratureSpec::uniform(n).unwrap()).unwrap();
        r.residual / r.volume.norm().max(1.0)
    };
    let (coarse, fine) = (residual(8), residual(12));
    assert!(fine < coarse, "coarse {coarse:e}, fine {fine:e}");
    assert!(fine < 5e-2, "fine {fine:e}");
}

#[test]
fn frac_stokes_rejects_swapped_sides() {
    let psi = StructuralSet::standard();
    let params = FracVectorParams::new([0.4; 4], [1.0; 4], &psi).unwrap();
    let (wf, wg) = pair(&params);
    let spec = QuadratureSpec::uniform(8).unwrap();
    assert!(frac_stokes(&wg, &wf, &inner_omega(), &psi, &spec).is_err());
}

/// The constant field 1 with α = 0.3 and unit proportions, Ω sharing the
/// lower corner of `[0, 1.5]^4`.
fn constant_transform() -> (WeightedTransform<Field4>, Box4) {
    let psi = StructuralSet::standard();
    let dom = Box4::new([0.0; 4], [1.5; 4]).unwrap();
    let f = Field4::callable(|_| Quaternion::ONE, dom).unwrap();
    let params = FracVectorParams::new([0.3; 4], [1.0; 4], &psi)
        .unwrap()
        .with_sigma_quat(Quaternion::ONE)
        .unwrap();
    let spec = OperatorSpec::f_side(&params, Sense::RiemannLiouville, Side::Left, MultSide::Left, None);
    let w = WeightedTransform::new(f, spec, &psi, [0.5; 4], Mesh1D::graded(128).unwrap()).unwrap();
    (w, Box4::new([0.0; 4], [1.0; 4]).unwrap())
}

#[test]
fn pre_derivative_reconstruction_of_a_constant() {
    let psi = StructuralSet::standard();
    let (w, omega) = constant_transform();
    let spec = QuadratureSpec::uniform(12).unwrap();
    let inside = weighted_bp(&w, &omega, &psi, &[0.53, 0.47, 0.55, 0.45], &spec).unwrap();
    assert!(inside.interior);
    assert!(inside.residual < 1e-2 * inside.target.norm().max(1.0), "interior {:e}", inside.residual);
    let outside = weighted_bp(&w, &omega, &psi, &[1.25, 1.25, 0.5, 0.5], &spec).unwrap();
    assert!(!outside.interior);
    assert_eq!(outside.target, Quaternion::ZERO);
    assert!(outside.residual < 1e-2, "exterior {:e}", outside.residual);
}

#[test]
fn boundary_points_are_rejected() {
    let psi = StructuralSet::standard();
    let (w, omega) = constant_transform();
    let spec = QuadratureSpec::uniform(8).unwrap();
    let r = weighted_bp(&w, &omega, &psi, &[1.0, 0.5, 0.5, 0.5], &spec);
    assert!(matches!(r, Err(Error::Precondition(_))));
}

#[test]
fn assembled_reconstruction_needs_the_shared_corner() {
    let psi = StructuralSet::standard();
    let (w, _) = constant_transform();
    let shifted = Box4::new([0.2; 4], [1.0; 4]).unwrap();
    let spec = QuadratureSpec::uniform(8).unwrap();
    let outer = OuterSpec::new(Mesh1D::graded(16).unwrap());
    let r = assembled_bp(&w, &shifted, &psi, &[0.5; 4], &spec, &outer);
    assert!(matches!(r, Err(Error::Precondition(_))));
}

#[test]
fn outer_derivative_of_one_matches_the_closed_forms() {
    let phi = WeightFunction::identity();
    let outer = OuterSpec::new(Mesh1D::graded(512).unwrap());
    for (alpha, sigma) in [(0.3, 1.0), (0.6, 1.0), (0.3, 0.6), (0.5, 0.8)] {
        let p = FracAxisParams::new(alpha, sigma, Side::Left, 0.0, 1.0).unwrap();
        for t in [0.3, 0.7] {
            let got = outer_derivative_of_one(&p, &phi, t, &outer).unwrap();
            let want = derivative_of_one_oracle(alpha, sigma, t);
            let tol = if sigma == 1.0 { 1e-12 } else { 1e-3 };
            assert!(
                (got - Quaternion::real(want)).norm() <= tol * want.abs(),
                "α={alpha} σ={sigma} t={t}: {got:?} vs {want}"
            );
        }
    }
}

#[test]
fn right_outer_derivative_of_one_is_reflected() {
    let phi = WeightFunction::identity();
    let outer = OuterSpec::new(Mesh1D::graded(512).unwrap());
    let left = FracAxisParams::new(0.4, 0.7, Side::Left, 0.0, 1.0).unwrap();
    let right = FracAxisParams::new(0.4, 0.7, Side::Right, 0.0, 1.0).unwrap();
    let l = outer_derivative_of_one(&left, &phi, 0.35, &outer).unwrap();
    let r = outer_derivative_of_one(&right, &phi, 0.65, &outer).unwrap();
    assert!((l - r).norm() <= 1e-3 * l.norm(), "{l:?} vs {r:?}");
}
