use proptest::prelude::*;

use qfrac::field4d::{coord_frac_integral, fueter, quat_prop_d, AxisOrders, AxisWeights, Box4, Field4, MultSide, Point4};
use qfrac::frac1d::{frac_integral_fn, prop_deriv_wrt, FracAxisParams, Function1D, Mesh1D, Side, WeightFunction};
use qfrac::fueter::lambda_profile;
use qfrac::geom::{calibrate_nu, stokes_classical, QuadratureSpec};
use qfrac::{Quaternion, StructuralSet};

fn quat(range: f64) -> impl Strategy<Value = Quaternion> {
    prop::array::uniform4(-range..range).prop_map(|c| Quaternion::new(c[0], c[1], c[2], c[3]))
}

fn unit_quat() -> impl Strategy<Value = Quaternion> {
    quat(1.0).prop_filter("nonzero", |q| q.norm() > 1e-3).prop_map(|q| q / q.norm())
}

fn basis() -> [Quaternion; 4] {
    [
        Quaternion::ONE,
        Quaternion::new(0.0, 1.0, 0.0, 0.0),
        Quaternion::new(0.0, 0.0, 1.0, 0.0),
        Quaternion::new(0.0, 0.0, 0.0, 1.0),
    ]
}

/// `ψ_k = p e_k q` (or `p ē_k q`, which reverses orientation) for unit `p, q`:
/// every orthonormal frame of either orientation arises this way.
fn structural_set() -> impl Strategy<Value = StructuralSet> {
    (unit_quat(), unit_quat(), any::<bool>()).prop_map(|(p, q, flip)| {
        let psi = basis().map(|e| p * if flip { e.conj() } else { e } * q);
        StructuralSet::validate(psi).expect("orthonormal frame")
    })
}

fn point(lo: f64, hi: f64) -> impl Strategy<Value = Point4> {
    prop::array::uniform4(lo..hi)
}

fn close(a: Quaternion, b: Quaternion, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_multiplicative(x in quat(10.0), y in quat(10.0)) {
        let lhs = (x * y).norm();
        let rhs = x.norm() * y.norm();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn conjugation_reverses_products(x in quat(10.0), y in quat(10.0)) {
        prop_assert!(close((x * y).conj(), y.conj() * x.conj(), 1e-13));
    }

    #[test]
    fn norm_squared_is_the_product_with_the_conjugate(x in quat(10.0)) {
        let n2 = x.norm_sqr();
        prop_assert!(close(x * x.conj(), Quaternion::real(n2), 1e-13));
        prop_assert!(close(x.conj() * x, Quaternion::real(n2), 1e-13));
    }

    #[test]
    fn inverse_is_two_sided(x in quat(10.0).prop_filter("invertible", |x| x.norm() > 1e-2)) {
        let inv = x.inv().unwrap();
        prop_assert!(close(x * inv, Quaternion::ONE, 1e-12));
        prop_assert!(close(inv * x, Quaternion::ONE, 1e-12));
    }

    #[test]
    fn multiplication_is_associative(x in quat(5.0), y in quat(5.0), z in quat(5.0)) {
        prop_assert!(close((x * y) * z, x * (y * z), 1e-12));
    }

    #[test]
    fn structural_sets_are_orthonormal(psi in structural_set()) {
        let g = psi.gram();
        for (r, row) in g.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                let want = if r == c { 1.0 } else { 0.0 };
                prop_assert!((v - want).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn coordinates_are_an_isometry(psi in structural_set(), x in quat(10.0)) {
        let c = psi.to_coords(x);
        let len = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((len - x.norm()).abs() <= 1e-12 * x.norm().max(1.0));
        prop_assert!(close(psi.from_coords(c), x, 1e-12));
    }

    #[test]
    fn orientation_follows_the_construction(p in unit_quat(), q in unit_quat(), flip in any::<bool>()) {
        let psi = StructuralSet::validate(basis().map(|e| p * if flip { e.conj() } else { e } * q)).unwrap();
        // e ↦ p e q is a rotation; conjugation is a reflection
        prop_assert_eq!(psi.sgn(), if flip { -1 } else { 1 });
    }

    #[test]
    fn face_weights_satisfy_stokes_on_monomials(psi in structural_set()) {
        let cal = calibrate_nu(&psi, &Box4::unit(), &QuadratureSpec::uniform(8).unwrap()).unwrap();
        prop_assert_eq!(cal.calibrated_sign, 1);
        prop_assert!(cal.residual_plus <= 1e-10, "residual {:e}", cal.residual_plus);
    }

    #[test]
    fn exponential_kernel_is_annihilated(
        sigma in 0.05f64..1.0,
        slope in 0.5f64..3.0,
        offset in -1.0f64..1.0,
        log in any::<bool>(),
        t in 1.1f64..1.9,
    ) {
        let phi = if log { WeightFunction::log() } else { WeightFunction::linear(slope, offset) };
        let rate = (sigma - 1.0) / sigma;
        let (p1, p2) = (phi.clone(), phi.clone());
        let f = Function1D::with_deriv(
            move |s| Quaternion::new(1.0, -2.0, 0.5, 3.0) * (rate * p1.phi(s)).exp(),
            move |s| Quaternion::new(1.0, -2.0, 0.5, 3.0) * (rate * p2.phi_prime(s) * (rate * p2.phi(s)).exp()),
            1.0,
            2.0,
        )
        .unwrap();
        let d = prop_deriv_wrt(&f, &phi, sigma, t).unwrap();
        prop_assert!(d.norm() <= 1e-12 * f.value(t).unwrap().norm().max(1.0), "{:?}", d);
    }

    #[test]
    fn fractional_integral_is_real_linear(
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        alpha in 0.1f64..0.9,
        sigma in 0.2f64..1.0,
        t in 0.2f64..0.8,
        right in any::<bool>(),
    ) {
        let side = if right { Side::Right } else { Side::Left };
        let p = FracAxisParams::new(alpha, sigma, side, 0.0, 1.0).unwrap();
        let phi = WeightFunction::linear(1.5, 0.2);
        let mesh = Mesh1D::graded(64).unwrap();
        let f = |s: f64| Quaternion::new(1.0 + s, s * s, -s, 0.5);
        let g = |s: f64| Quaternion::new((2.0 * s).sin(), 1.0, s.exp(), -s * s * s);
        let lhs = frac_integral_fn(|s| f(s) * a + g(s) * b, &p, &phi, t, &mesh).unwrap();
        let rhs = frac_integral_fn(f, &p, &phi, t, &mesh).unwrap() * a
            + frac_integral_fn(g, &p, &phi, t, &mesh).unwrap() * b;
        prop_assert!(close(lhs, rhs, 1e-13));
    }

    #[test]
    fn fueter_variables_are_monogenic(m in 1usize..4, x in point(0.1, 0.9)) {
        let psi = StructuralSet::standard();
        let z = Field4::callable(move |y: &Point4| Quaternion::real(y[m]) - psi.get(m) * y[0], Box4::unit()).unwrap();
        prop_assert!(fueter(&z, &psi, MultSide::Left, &x).unwrap().norm() <= 1e-10);
    }

    #[test]
    fn scalar_proportion_splits_the_operator(sigma in 0.05f64..1.0, x in point(0.1, 0.9), left in any::<bool>()) {
        let psi = StructuralSet::standard();
        let f = Field4::callable(|y: &Point4| Quaternion::new(y[0] * y[1], y[2] - y[3], y[0] * y[0], 1.0), Box4::unit()).unwrap();
        let side = if left { MultSide::Left } else { MultSide::Right };
        let got = quat_prop_d(&f, &psi, Quaternion::real(sigma), None, side, &x).unwrap();
        let want = f.value(&x).unwrap() * (1.0 - sigma) + fueter(&f, &psi, side, &x).unwrap() * sigma;
        prop_assert!(close(got, want, 1e-12));
    }

    #[test]
    fn coordinate_integral_is_real_linear(a in -2.0f64..2.0, alpha in 0.2f64..0.8, sigma in 0.3f64..1.0, x in point(0.2, 0.8)) {
        let dom = Box4::unit();
        let f = Field4::callable(|y: &Point4| Quaternion::new(y[0], y[1] * y[2], 1.0, y[3]), dom).unwrap();
        let g = Field4::callable(|y: &Point4| Quaternion::new(1.0, y[0] * y[3], y[1], -y[2]), dom).unwrap();
        let sum = Field4::callable(move |y: &Point4| {
            Quaternion::new(y[0], y[1] * y[2], 1.0, y[3]) * a + Quaternion::new(1.0, y[0] * y[3], y[1], -y[2])
        }, dom)
        .unwrap();
        let orders = AxisOrders::uniform(alpha, sigma);
        let (q, mesh) = ([0.5; 4], Mesh1D::graded(64).unwrap());
        let i = |h: &Field4| coord_frac_integral(h, &orders, None, Side::Left, &q, &x, &mesh).unwrap();
        prop_assert!(close(i(&sum), i(&f) * a + i(&g), 1e-12));
    }

    #[test]
    fn linear_weight_profiles_exist_and_solve_their_relation(
        sigma in quat(1.0).prop_filter("invertible", |s| s.norm() > 0.1),
        slopes in prop::array::uniform4(0.5f64..2.0),
        x in point(0.0, 1.0),
        weighted in any::<bool>(),
    ) {
        let psi = StructuralSet::standard();
        let w = AxisWeights::new(slopes.map(|s| WeightFunction::linear(s, 0.0)));
        let phi = if weighted { Some(&w) } else { None };
        let profile = lambda_profile(&psi, phi, sigma).unwrap();
        prop_assert!(profile.exists);
        prop_assert!(profile.defect(&psi, phi, &x) <= 1e-10);
    }
}

#[test]
fn classical_stokes_is_independent_of_the_thread_count() {
    let psi = StructuralSet::standard();
    let dom = Box4::new([-0.2; 4], [1.2; 4]).unwrap();
    let f = Field4::callable(|y: &Point4| Quaternion::new(y[0] * y[1], y[2].sin(), y[3] * y[3], 1.0), dom).unwrap();
    let g = Field4::callable(|y: &Point4| Quaternion::new(1.0, y[0], y[1] * y[3], y[2].cos()), dom).unwrap();
    let spec = QuadratureSpec::uniform(10).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| stokes_classical(&f, &g, &Box4::unit(), &psi, &spec).unwrap())
    };
    let (one, many) = (run(1), run(4));
    assert_eq!(one.boundary, many.boundary);
    assert_eq!(one.volume, many.volume);
}
