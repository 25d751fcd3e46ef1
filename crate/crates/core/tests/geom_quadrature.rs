use qfrac::field4d::{Box4, Field4, Point4};
use qfrac::geom::{bp_classical, stokes_classical, QuadratureSpec};
use qfrac::{Quaternion, StructuralSet};

fn dom() -> Box4 {
    Box4::new([-0.2; 4], [1.2; 4]).unwrap()
}

fn zeta(psi: StructuralSet) -> Field4 {
    // ζ₁ = x₁ - ψ₁x₀ is monogenic for the standard structural set
    Field4::callable(move |x: &Point4| Quaternion::real(x[1]) - psi.get(1) * x[0], dom()).unwrap()
}

#[test]
fn stokes_is_exact_on_affine_fields() {
    let psi = StructuralSet::standard();
    let f = Field4::callable(|x: &Point4| Quaternion::new(x[0], 2.0 * x[1], -x[2], 0.5 + x[3]), dom()).unwrap();
    let g = Field4::callable(|x: &Point4| Quaternion::new(1.0 - x[3], x[2], x[0], x[1]), dom()).unwrap();
    let r = stokes_classical(&f, &g, &Box4::unit(), &psi, &QuadratureSpec::uniform(8).unwrap()).unwrap();
    assert!(r.residual <= 1e-10, "residual {:e}", r.residual);
}

#[test]
fn reconstruction_of_a_constant_converges() {
    let psi = StructuralSet::standard();
    let one = Field4::callable(|_| Quaternion::ONE, dom()).unwrap();
    let zero = Field4::callable(|_| Quaternion::ZERO, dom()).unwrap();
    let x = [0.53, 0.47, 0.55, 0.45];
    let residual = |n: usize| {
        bp_classical(&one, &zero, &Box4::unit(), &psi, &x, &QuadratureSpec::uniform(n).unwrap())
            .unwrap()
            .residual
    };
    let (coarse, fine) = (residual(8), residual(16));
    assert!(fine < coarse, "coarse {coarse:e}, fine {fine:e}");
    assert!(fine < 1e-2, "fine {fine:e}");
}

#[test]
fn reconstruction_vanishes_outside() {
    let psi = StructuralSet::standard();
    let one = Field4::callable(|_| Quaternion::ONE, dom()).unwrap();
    let zero = Field4::callable(|_| Quaternion::ZERO, dom()).unwrap();
    let r = bp_classical(&one, &zero, &Box4::unit(), &psi, &[1.1, 0.5, 0.5, 0.5], &QuadratureSpec::uniform(12).unwrap())
        .unwrap();
    assert!(!r.interior);
    assert_eq!(r.target, Quaternion::ZERO);
    assert!(r.residual < 1e-2, "residual {:e}", r.residual);
}

#[test]
fn reconstruction_of_a_monogenic_field_on_both_sides() {
    let psi = StructuralSet::standard();
    let z = zeta(psi);
    let x = [0.37, 0.61, 0.52, 0.44];
    let r = bp_classical(&z, &z, &Box4::unit(), &psi, &x, &QuadratureSpec::uniform(12).unwrap()).unwrap();
    assert!(r.interior);
    let want = z.value(&x).unwrap() * 2.0;
    assert!((r.target - want).norm() < 1e-15);
    assert!(r.residual < 1e-2 * want.norm(), "residual {:e}", r.residual);
}

#[test]
fn boundary_points_are_rejected() {
    let psi = StructuralSet::standard();
    let one = Field4::callable(|_| Quaternion::ONE, dom()).unwrap();
    let r = bp_classical(&one, &one, &Box4::unit(), &psi, &[0.0, 0.5, 0.5, 0.5], &QuadratureSpec::uniform(8).unwrap());
    assert!(r.is_err());
}
