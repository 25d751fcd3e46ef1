//! Executable verification of the operator identities.
//!
//! Every identity is a function `(scenario, context, grid) -> Outcome`; the
//! [`run_study`] driver evaluates it over a refinement ladder, estimates the
//! convergence order and turns the outcomes into [`VerificationReport`]s.

pub mod identities;
pub mod output;
pub mod scenario;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quat::Quaternion;

pub use scenario::{load_catalog, FieldSpec, Scenario};

/// Tolerance tier of an identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    /// Algebraic or exact identities, `1e-10`.
    Exact,
    /// Smooth classical quadrature, `1e-3`.
    Quadrature,
    /// Nested fractional identities, `5e-2`.
    Nested,
}

impl Tier {
    pub fn tolerance(self) -> f64 {
        match self {
            Tier::Exact => 1e-10,
            Tier::Quadrature => 1e-3,
            Tier::Nested => 5e-2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Tier::Exact => "exact",
            Tier::Quadrature => "quadrature",
            Tier::Nested => "nested",
        }
    }
}

/// Least-squares order of a refinement ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum OrderEstimate {
    Order(f64),
    /// Residuals did not decrease monotonically under refinement.
    Inconclusive,
}

impl OrderEstimate {
    pub fn value(&self) -> Option<f64> {
        match self {
            OrderEstimate::Order(p) => Some(*p),
            OrderEstimate::Inconclusive => None,
        }
    }
}

impl std::fmt::Display for OrderEstimate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OrderEstimate::Order(p) => write!(f, "{p:.3}"),
            OrderEstimate::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// Slope of `log(residual)` against `log(h)` by least squares.
///
/// Needs at least three levels; a ladder whose residuals do not strictly
/// decrease as `h` shrinks (or that contains a non-positive residual) is
/// reported as inconclusive.
pub fn convergence_study(h: &[f64], residuals: &[f64]) -> Result<OrderEstimate> {
    if h.len() != residuals.len() {
        return Err(Error::Config("ladder and residual lengths differ".into()));
    }
    if h.len() < 3 {
        return Err(Error::Config(format!("a convergence study needs at least 3 levels, got {}", h.len())));
    }
    let mut pairs: Vec<(f64, f64)> = h.iter().copied().zip(residuals.iter().copied()).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let positive = pairs.iter().all(|&(hh, r)| hh > 0.0 && r > 0.0 && r.is_finite());
    let decreasing = pairs.windows(2).all(|w| w[1].1 < w[0].1);
    if !positive || !decreasing {
        return Ok(OrderEstimate::Inconclusive);
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(OrderEstimate::Order(sxy / sxx))
}

/// An additional pass condition attached to an outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Gate {
    /// `value ≤ tolerance`.
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Gate { name: name.into(), value, tolerance, passed: value <= tolerance }
    }

    /// `value ≥ tolerance`.
    pub fn at_least(name: &str, value: f64, tolerance: f64) -> Self {
        Gate { name: name.into(), value, tolerance, passed: value >= tolerance }
    }
}

/// What an identity computes on one grid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    /// Left- and right-hand side at the worst sample.
    pub lhs: Option<Quaternion>,
    pub rhs: Option<Quaternion>,
    pub residual_abs: f64,
    pub residual_rel: f64,
    pub gates: Vec<Gate>,
    pub warnings: Vec<String>,
    pub details: BTreeMap<String, f64>,
}

impl Outcome {
    /// Folds one sample into the worst-case residuals. The relative residual
    /// is `|lhs - rhs| / max(1, |rhs|)`.
    pub fn record(&mut self, lhs: Quaternion, rhs: Quaternion) {
        let abs = (lhs - rhs).norm();
        self.record_with_scale(lhs, rhs, abs, rhs.norm().max(1.0));
    }

    /// Like [`record`](Self::record) with an explicit residual and scale.
    /// NaN residuals stick, so a failed sample can never pass.
    pub fn record_with_scale(&mut self, lhs: Quaternion, rhs: Quaternion, abs: f64, scale: f64) {
        let rel = abs / scale;
        self.residual_abs = nan_max(self.residual_abs, abs);
        if self.lhs.is_none() || rel > self.residual_rel || (rel.is_nan() && !self.residual_rel.is_nan()) {
            self.residual_rel = rel;
            self.lhs = Some(lhs);
            self.rhs = Some(rhs);
        }
    }

    pub fn warn(&mut self, w: impl Into<String>) {
        let w = w.into();
        if !self.warnings.contains(&w) {
            self.warnings.push(w);
        }
    }

    pub fn detail_max(&mut self, key: &str, value: f64) {
        let e = self.details.entry(key.to_string()).or_insert(0.0);
        *e = nan_max(*e, value);
    }
}

/// Maximum that propagates NaN.
pub fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Pass/fail status of one report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// A coarser ladder level; informative only.
    Ladder,
    /// The scenario does not meet the identity's preconditions.
    Skipped,
    /// The computation failed (configuration or numerical error).
    Error,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Ladder => "ladder",
            Status::Skipped => "skipped",
            Status::Error => "error",
        }
    }
}

/// Result of one identity on one scenario and grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub identity_id: String,
    pub scenario_id: String,
    /// Grid parameter (meaning depends on the identity, see [`IdentityInfo::grid`]).
    pub grid: usize,
    pub grid_kind: String,
    pub lhs: Option<Quaternion>,
    pub rhs: Option<Quaternion>,
    pub residual_abs: f64,
    pub residual_rel: f64,
    pub tier: Tier,
    pub tolerance: f64,
    /// Present iff the ladder had at least three grids.
    pub order_est: Option<OrderEstimate>,
    pub gates: Vec<Gate>,
    pub status: Status,
    pub reason: Option<String>,
    pub warnings: Vec<String>,
    pub details: BTreeMap<String, f64>,
}

/// Shared inputs of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunContext {
    /// Seed of the randomized suites and random fields.
    pub seed: u64,
}

pub type IdentityFn = fn(&Scenario, &RunContext, usize) -> Result<Outcome>;

/// Registry entry of one identity.
#[derive(Clone, Copy)]
pub struct IdentityInfo {
    pub id: &'static str,
    pub description: &'static str,
    pub tier: Tier,
    /// Meaning of the grid parameter.
    pub grid: &'static str,
    pub default_ladder: &'static [usize],
    pub run: IdentityFn,
}

impl std::fmt::Debug for IdentityInfo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IdentityInfo").field("id", &self.id).field("tier", &self.tier).finish()
    }
}

/// All identities, sorted by id.
pub fn registry() -> Vec<IdentityInfo> {
    let mut v = identities::all();
    v.sort_by(|a, b| a.id.cmp(b.id));
    v
}

pub fn find_identity(id: &str) -> Option<IdentityInfo> {
    registry().into_iter().find(|i| i.id == id)
}

/// Ladder used for `info` on `scenario`: explicit override, then the
/// scenario's own ladder, then the identity default.
pub fn resolve_ladder(info: &IdentityInfo, scenario: &Scenario, override_ladder: Option<&[usize]>) -> Vec<usize> {
    if let Some(l) = override_ladder {
        return l.to_vec();
    }
    if !scenario.expect.ladder.is_empty() {
        return scenario.expect.ladder.clone();
    }
    info.default_ladder.to_vec()
}

fn classify(err: &Error) -> Status {
    match err {
        Error::Unsupported(_) | Error::Precondition(_) => Status::Skipped,
        _ => Status::Error,
    }
}

/// Runs `info` on `scenario` over `ladder` (in the given order; the last
/// grid is the gated one) and returns one report per grid.
pub fn run_study(info: &IdentityInfo, scenario: &Scenario, ladder: &[usize], ctx: &RunContext) -> Vec<VerificationReport> {
    let tolerance = scenario.expect.tolerance.unwrap_or(info.tier.tolerance());
    let base = |grid: usize| VerificationReport {
        identity_id: info.id.to_string(),
        scenario_id: scenario.id.clone(),
        grid,
        grid_kind: info.grid.to_string(),
        lhs: None,
        rhs: None,
        residual_abs: f64::NAN,
        residual_rel: f64::NAN,
        tier: info.tier,
        tolerance,
        order_est: None,
        gates: Vec::new(),
        status: Status::Ladder,
        reason: None,
        warnings: Vec::new(),
        details: BTreeMap::new(),
    };
    if ladder.is_empty() {
        let mut r = base(0);
        r.status = Status::Error;
        r.reason = Some("empty refinement ladder".into());
        return vec![r];
    }
    let mut reports = Vec::with_capacity(ladder.len());
    let mut failed = false;
    for &grid in ladder {
        let mut r = base(grid);
        match (info.run)(scenario, ctx, grid) {
            Ok(o) => {
                r.lhs = o.lhs;
                r.rhs = o.rhs;
                r.residual_abs = o.residual_abs;
                r.residual_rel = o.residual_rel;
                r.gates = o.gates;
                r.warnings = o.warnings;
                r.details = o.details;
            }
            Err(e) => {
                r.status = classify(&e);
                r.reason = Some(e.to_string());
                failed = true;
            }
        }
        reports.push(r);
    }
    if failed {
        // a skipped or failed level decides the whole study
        let worst = reports
            .iter()
            .find(|r| r.status == Status::Error)
            .or_else(|| reports.iter().find(|r| r.status == Status::Skipped))
            .map(|r| (r.status, r.reason.clone()))
            .expect("a failed level exists");
        for r in &mut reports {
            if r.status == Status::Ladder {
                r.status = worst.0;
                r.reason = worst.1.clone();
            }
        }
        return reports;
    }
    let residuals: Vec<f64> = reports.iter().map(|r| r.residual_abs).collect();
    let order = if ladder.len() >= 3 {
        let h: Vec<f64> = ladder.iter().map(|&g| 1.0 / g as f64).collect();
        convergence_study(&h, &residuals).ok()
    } else {
        None
    };
    let last = reports.len() - 1;
    let mut extra = Vec::new();
    if scenario.expect.decreasing && ladder.len() >= 2 {
        let ok = residuals.windows(2).all(|w| w[1] < w[0]);
        extra.push(Gate { name: "decreasing".into(), value: if ok { 1.0 } else { 0.0 }, tolerance: 1.0, passed: ok });
    }
    if let Some(min) = scenario.expect.min_order {
        let value = order.and_then(|o| o.value()).unwrap_or(f64::NAN);
        extra.push(Gate::at_least("order", value, min));
    }
    for (i, r) in reports.iter_mut().enumerate() {
        r.order_est = order;
        if i == last {
            r.gates.extend(extra.iter().cloned());
            let ok = r.residual_rel <= tolerance && r.gates.iter().all(|g| g.passed);
            r.status = if ok { Status::Pass } else { Status::Fail };
        }
    }
    reports
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_of_a_clean_power_law() {
        let h = [0.1, 0.05, 0.025];
        let r: Vec<f64> = h.iter().map(|x: &f64| 3.0 * x.powi(2)).collect();
        let p = convergence_study(&h, &r).unwrap().value().unwrap();
        assert!((p - 2.0).abs() < 1e-12);
    }

    #[test]
    fn constant_residuals_are_inconclusive() {
        let o = convergence_study(&[0.1, 0.05, 0.025], &[1e-3, 1e-3, 1e-3]).unwrap();
        assert_eq!(o, OrderEstimate::Inconclusive);
    }

    #[test]
    fn short_ladders_are_rejected() {
        assert!(convergence_study(&[0.1, 0.05], &[1.0, 0.5]).is_err());
    }

    #[test]
    fn registry_ids_are_unique_and_sorted() {
        let r = registry();
        assert!(r.windows(2).all(|w| w[0].id < w[1].id));
        for id in ["prop_3_3_conjugation", "prop_3_4_stokes", "cor_3_5_cauchy", "fundamental", "frac_bp"] {
            assert!(find_identity(id).is_some(), "{id}");
        }
    }
}
