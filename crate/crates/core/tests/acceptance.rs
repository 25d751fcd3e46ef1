//! Acceptance suite: one pass/fail line per criterion, non-zero exit on any
//! failure. Tolerances and runtime budgets are pinned here, independently of
//! the scenario files.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use qfrac::frac1d::WeightLabel;
use qfrac::verify::{find_identity, load_catalog, resolve_ladder, run_study, RunContext, Scenario, Status, VerificationReport};
use qfrac::verify::output::DEFAULT_SEED;

struct Suite {
    catalog: Vec<Scenario>,
    ctx: RunContext,
}

impl Suite {
    fn scenario(&self, id: &str) -> Result<&Scenario, String> {
        self.catalog.iter().find(|s| s.id == id).ok_or_else(|| format!("scenario {id} missing from the catalog"))
    }

    /// All levels of `identity` on `scenario`, with the given ladder or the resolved one.
    fn study(&self, identity: &str, scenario: &str, ladder: Option<&[usize]>) -> Result<Vec<VerificationReport>, String> {
        let info = find_identity(identity).ok_or_else(|| format!("identity {identity} missing"))?;
        let s = self.scenario(scenario)?;
        let ladder = resolve_ladder(&info, s, ladder);
        let reports = run_study(&info, s, &ladder, &self.ctx);
        if let Some(r) = reports.iter().find(|r| matches!(r.status, Status::Error | Status::Skipped)) {
            return Err(format!("{identity}/{scenario}: {} ({})", r.status.name(), r.reason.clone().unwrap_or_default()));
        }
        Ok(reports)
    }
}

fn finest(reports: &[VerificationReport]) -> &VerificationReport {
    reports.last().expect("a study has at least one level")
}

fn detail(r: &VerificationReport, key: &str) -> Result<f64, String> {
    r.details.get(key).copied().ok_or_else(|| format!("{}/{}: no detail {key}", r.identity_id, r.scenario_id))
}

fn strictly_decreasing(reports: &[VerificationReport]) -> bool {
    reports.windows(2).all(|w| w[1].residual_abs < w[0].residual_abs)
}

/// Records `name: value ≤ tol`.
fn at_most(notes: &mut Vec<String>, ok: &mut bool, name: &str, value: f64, tol: f64) {
    let pass = value <= tol;
    *ok &= pass;
    notes.push(format!("{name}={value:.3e}{}{tol:.0e}", if pass { "≤" } else { ">" }));
}

fn check(notes: &mut Vec<String>, ok: &mut bool, name: &str, pass: bool) {
    *ok &= pass;
    notes.push(format!("{name}={}", if pass { "yes" } else { "NO" }));
}

type Outcome = Result<(bool, Vec<String>), String>;

fn c1(s: &Suite) -> Outcome {
    let (mut ok, mut n) = (true, Vec::new());
    let r = s.study("algebra", "algebra_triples", Some(&[10_000]))?;
    let r = finest(&r);
    for key in ["norm_defect", "conj_defect", "assoc_defect"] {
        at_most(&mut n, &mut ok, key, detail(r, key)?, 1e-12);
    }
    Ok((ok, n))
}

fn c2(s: &Suite) -> Outcome {
    let (mut ok, mut n) = (true, Vec::new());
    let r = s.study("frac1d_oracles", "oracles_1d", Some(&[2048]))?;
    let r = finest(&r);
    at_most(&mut n, &mut ok, "integral_rel", detail(r, "integral_rel")?, 1e-4);
    at_most(&mut n, &mut ok, "derivative_rel", detail(r, "derivative_rel")?, 1e-3);
    Ok((ok, n))
}

fn c3(s: &Suite) -> Outcome {
    let (mut ok, mut n) = (true, Vec::new());
    for scenario in ["rl_power", "smooth_1d"] {
        let r = s.study("fundamental", scenario, Some(&[256, 512, 1024, 2048]))?;
        at_most(&mut n, &mut ok, &format!("{scenario}@2048"), finest(&r).residual_abs, 1e-2);
        check(&mut n, &mut ok, &format!("{scenario} decreasing"), strictly_decreasing(&r));
    }
    Ok((ok, n))
}

fn c4(s: &Suite) -> Outcome {
    let (mut ok, mut n) = (true, Vec::new());
    let sc = s.scenario("semigroup_1d")?;
    let d = sc.one_d.as_ref().ok_or("semigroup_1d has no 1D slice")?;
    let covers = d.order_pairs.contains(&[0.3, 0.4])
        && d.order_pairs.contains(&[0.25, 0.5])
        && d.sigmas.contains(&1.0)
        && d.sigmas.contains(&0.5)
        && d.phis.contains(&WeightLabel::Identity)
        && d.phis.contains(&WeightLabel::Log);
    check(&mut n, &mut ok, "covers orders/σ/φ", covers);
    let r = s.study("semigroup", "semigroup_1d", Some(&[1024]))?;
    at_most(&mut n, &mut ok, "relative@1024", finest(&r).residual_rel, 1e-3);
    Ok((ok, n))
}

fn c5(s: &Suite) -> Outcome {
    let (mut ok, mut n) = (true, Vec::new());
    let r = s.study("stokes_classical", "stokes_linear", None)?;
    at_most(&mut n, &mut ok, "linear", finest(&r).residual_abs, 1e-10);
    let r = s.study("stokes_classical", "stokes_quadratic", Some(&[8, 12, 16, 24]))?;
    at_most(&mut n, &mut ok, "quadratic@24", finest(&r).residual_abs, 1e-3);
    let order = finest(&r).order_est.and_then(|o| o.value()).unwrap_or(f64::NAN);
    check(&mut n, &mut ok, &format!("order {order:.2}≥1.7"), order >= 1.7);
    Ok((ok, n))
}

fn c6(s: &Suite) -> Outcome {
    let (mut ok, mut n) = (true, Vec::new());
    for scenario in ["bp_constant", "bp_zeta"] {
        let r = s.study("bp_classical", scenario, Some(&[12, 16, 24]))?;
        let last = finest(&r);
        at_most(&mut n, &mut ok, &format!("{scenario} interior@24"), detail(last, "interior_abs")?, 1e-2);
        at_most(&mut n, &mut ok, &format!("{scenario} exterior@24"), detail(last, "exterior_abs")?, 1e-2);
        check(&mut n, &mut ok, &format!("{scenario} decreasing"), strictly_decreasing(&r));
    }
    Ok((ok, n))
}

fn c7(s: &Suite) -> Outcome {
    let (mut ok, mut n) = (true, Vec::new());
    let sc = s.scenario("conj_unit")?;
    check(&mut n, &mut ok, "unit proportions", sc.sigma == [1.0; 4] && sc.rho == [1.0; 4]);
    let r = s.study("prop_3_3_conjugation", "conj_unit", None)?;
    at_most(&mut n, &mut ok, "σ=1", finest(&r).residual_abs, 1e-8);
    let r = s.study("prop_3_3_conjugation", "conj_half", Some(&[64, 128, 256]))?;
    check(&mut n, &mut ok, "σ=0.5 decreasing", strictly_decreasing(&r));
    let order = finest(&r).order_est.and_then(|o| o.value()).unwrap_or(f64::NAN);
    check(&mut n, &mut ok, &format!("order {order:.2}≥1"), order >= 1.0);
    Ok((ok, n))
}

fn c8(s: &Suite) -> Outcome {
    let (mut ok, mut n) = (true, Vec::new());
    let r = s.study("stokes_collapse", "stokes_unit", None)?;
    at_most(&mut n, &mut ok, "collapse", finest(&r).residual_abs, 1e-12);
    for scenario in ["stokes_frac_half", "stokes_frac_weighted"] {
        let r = s.study("prop_3_4_stokes", scenario, Some(&[8, 10, 12]))?;
        at_most(&mut n, &mut ok, &format!("{scenario}@12"), finest(&r).residual_rel, 5e-2);
        check(&mut n, &mut ok, &format!("{scenario} decreasing"), strictly_decreasing(&r));
    }
    Ok((ok, n))
}

fn c9(s: &Suite) -> Outcome {
    let (mut ok, mut n) = (true, Vec::new());
    let r = s.study("frac_bp_weighted", "bp_frac_weighted", None)?;
    at_most(&mut n, &mut ok, "pre-derivative", finest(&r).residual_abs, 1e-2);
    let r = s.study("frac_bp", "bp_frac_constant", None)?;
    let last = finest(&r);
    at_most(&mut n, &mut ok, "assembled interior", detail(last, "interior_abs")?, 5e-2);
    at_most(&mut n, &mut ok, "assembled exterior", detail(last, "exterior_abs")?, 5e-2);
    Ok((ok, n))
}

fn c10(s: &Suite) -> Outcome {
    let (mut ok, mut n) = (true, Vec::new());
    let r = s.study("cor_3_5_cauchy", "cauchy_regroup", None)?;
    at_most(&mut n, &mut ok, "regrouping", finest(&r).residual_abs, 1e-10);
    let r = s.study("cauchy_constructive", "cauchy_zeta", None)?;
    let last = finest(&r);
    at_most(&mut n, &mut ok, "volume terms", detail(last, "volume_terms")?, 1e-6);
    at_most(&mut n, &mut ok, "boundary-only", detail(last, "interior_boundary_only_abs")?, 5e-2);
    at_most(&mut n, &mut ok, "boundary-only exterior", detail(last, "exterior_boundary_only_abs")?, 5e-2);
    Ok((ok, n))
}

fn c11(s: &Suite) -> Outcome {
    let (mut ok, mut n) = (true, Vec::new());
    let r = s.study("remark_3_6_caputo_rl", "caputo_smooth", None)?;
    let last = finest(&r);
    at_most(&mut n, &mut ok, "relation 1", detail(last, "relation1_rel")?, 5e-2);
    at_most(&mut n, &mut ok, "relation 2", detail(last, "relation2_rel")?, 5e-2);
    let r = s.study("reductions", "reduce_coord_sum", None)?;
    at_most(&mut n, &mut ok, "item 1", finest(&r).residual_rel, 1e-3);
    let r = s.study("reductions", "reduce_unit", None)?;
    at_most(&mut n, &mut ok, "item 2", finest(&r).residual_rel, 5e-2);
    for scenario in ["reduce_katugampola", "reduce_hadamard"] {
        let r = s.study("reductions", scenario, None)?;
        at_most(&mut n, &mut ok, scenario, finest(&r).residual_abs, 1e-6);
    }
    Ok((ok, n))
}

fn c12(_s: &Suite) -> Outcome {
    let (mut ok, mut n) = (true, Vec::new());
    let exe = env!("CARGO_BIN_EXE_qfrac");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for identity in ["stokes_classical", "prop_3_3_conjugation", "frac1d_oracles"] {
        let mut tables = Vec::new();
        for width in [1usize, 3] {
            let out = dir.path().join(format!("{identity}_{width}"));
            let status = Command::new(exe)
                .args(["run", "--identity", identity, "--parallel", &width.to_string(), "--seed", "7", "--out"])
                .arg(&out)
                .output()
                .map_err(|e| e.to_string())?;
            check(&mut n, &mut ok, &format!("{identity} w{width} exit 0"), status.status.success());
            tables.push(std::fs::read(out.join("reports.csv")).map_err(|e| e.to_string())?);
        }
        check(&mut n, &mut ok, &format!("{identity} identical"), tables[0] == tables[1]);
    }
    Ok((ok, n))
}

fn main() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let catalog = match load_catalog(&dir) {
        Ok(c) => c,
        Err(e) => {
            println!("cannot load the scenario catalog: {e}");
            std::process::exit(1);
        }
    };
    let suite = Suite { catalog, ctx: RunContext { seed: DEFAULT_SEED } };
    type Criterion = (u32, &'static str, u64, fn(&Suite) -> Outcome);
    let criteria: [Criterion; 12] = [
        (1, "quaternion algebra", 1, c1),
        (2, "1D closed-form oracles", 10, c2),
        (3, "1D inversion", 30, c3),
        (4, "semigroup", 10, c4),
        (5, "classical Stokes", 120, c5),
        (6, "classical Borel-Pompeiu", 300, c6),
        (7, "exponential conjugation", 120, c7),
        (8, "fractional Stokes", 600, c8),
        (9, "fractional Borel-Pompeiu", 900, c9),
        (10, "Cauchy formula", 300, c10),
        (11, "Caputo relations and reductions", 300, c11),
        (12, "determinism across thread counts", 600, c12),
    ];
    let mut failures = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let result = run(&suite);
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let (pass, notes) = match result {
            Ok((ok, notes)) => (ok && in_time, notes.join(", ")),
            Err(e) => (false, e),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {id:>2} [{}] {name}: {notes}; {:.1}s (budget {budget}s)",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} of 12 criteria passed", 12 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
