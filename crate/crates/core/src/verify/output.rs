//! Batch runs over the scenario catalog and their on-disk reports.
//!
//! A run writes one JSON file per report under `reports/`, a `reports.csv`
//! table and a `summary.txt`. None of them contain timings, so the outputs
//! are byte-identical across thread counts.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{find_identity, registry, resolve_ladder, run_study, IdentityInfo, RunContext, Scenario, Status, VerificationReport};
use crate::error::{Error, Result};

/// Default seed of the randomized suites.
pub const DEFAULT_SEED: u64 = 20240917;

/// Selection and execution options of a batch run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenarios_dir: PathBuf,
    pub out_dir: PathBuf,
    pub identity: Option<String>,
    pub scenario: Option<String>,
    /// Replaces every resolved ladder.
    pub ladder: Option<Vec<usize>>,
    /// Worker threads; `0` uses the rayon default.
    pub parallel: usize,
    /// Treat skipped reports as failures.
    pub strict: bool,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(scenarios_dir: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            scenarios_dir: scenarios_dir.into(),
            out_dir: out_dir.into(),
            identity: None,
            scenario: None,
            ladder: None,
            parallel: 0,
            strict: false,
            seed: DEFAULT_SEED,
        }
    }
}

/// One `(identity, scenario, ladder)` study.
#[derive(Debug, Clone)]
pub struct Job {
    pub identity: IdentityInfo,
    pub scenario: Scenario,
    pub ladder: Vec<usize>,
}

/// Expands the catalog into studies, honouring the identity and scenario
/// filters. Unknown ids are configuration errors.
pub fn plan(catalog: &[Scenario], cfg: &RunConfig) -> Result<Vec<Job>> {
    if let Some(id) = &cfg.identity {
        if find_identity(id).is_none() {
            return Err(Error::Config(format!("unknown identity {id:?}")));
        }
    }
    if let Some(id) = &cfg.scenario {
        if !catalog.iter().any(|s| &s.id == id) {
            return Err(Error::Config(format!("unknown scenario {id:?}")));
        }
    }
    if let Some(l) = &cfg.ladder {
        if l.is_empty() || l.contains(&0) {
            return Err(Error::Config("a ladder needs at least one positive grid".into()));
        }
    }
    let mut jobs = Vec::new();
    for s in catalog {
        if cfg.scenario.as_ref().is_some_and(|id| &s.id != id) {
            continue;
        }
        let mut ids = s.identities.clone();
        ids.sort();
        ids.dedup();
        for id in ids {
            let info = find_identity(&id)
                .ok_or_else(|| Error::Config(format!("scenario {} names unknown identity {id:?}", s.id)))?;
            if cfg.identity.as_ref().is_some_and(|want| want != &id) {
                continue;
            }
            let ladder = resolve_ladder(&info, s, cfg.ladder.as_deref());
            jobs.push(Job { identity: info, scenario: s.clone(), ladder });
        }
    }
    if jobs.is_empty() && (cfg.identity.is_some() || cfg.scenario.is_some()) {
        return Err(Error::Config("no scenario matches the selection".into()));
    }
    Ok(jobs)
}

/// Reports of a finished run.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub reports: Vec<VerificationReport>,
    pub strict: bool,
}

impl RunSummary {
    /// Reports that decide the run: the gated (finest) level of each study.
    pub fn decisive(&self) -> impl Iterator<Item = &VerificationReport> {
        self.reports.iter().filter(|r| r.status != Status::Ladder)
    }

    pub fn count(&self, status: Status) -> usize {
        self.reports.iter().filter(|r| r.status == status).count()
    }

    pub fn passed(&self) -> bool {
        self.decisive().all(|r| match r.status {
            Status::Pass | Status::Ladder => true,
            Status::Skipped => !self.strict,
            Status::Fail | Status::Error => false,
        })
    }

    /// `0` when every decisive report passed, `1` otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

/// Runs the selected studies on a pool of `cfg.parallel` threads (results
/// keep the planned order) and writes the outputs to `cfg.out_dir`.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    let catalog = super::load_catalog(&cfg.scenarios_dir)?;
    let jobs = plan(&catalog, cfg)?;
    let ctx = RunContext { seed: cfg.seed };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallel)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let per_job: Vec<Vec<VerificationReport>> =
        pool.install(|| jobs.par_iter().map(|j| run_study(&j.identity, &j.scenario, &j.ladder, &ctx)).collect());
    let summary = RunSummary { reports: per_job.into_iter().flatten().collect(), strict: cfg.strict };
    write_outputs(&cfg.out_dir, &summary)?;
    Ok(summary)
}

/// File name of a report's JSON document.
pub fn report_file_name(r: &VerificationReport) -> String {
    format!("{}__{}__{}.json", r.identity_id, r.scenario_id, r.grid)
}

pub fn write_outputs(dir: &Path, summary: &RunSummary) -> Result<()> {
    let reports_dir = dir.join("reports");
    fs::create_dir_all(&reports_dir)?;
    for r in &summary.reports {
        let text = serde_json::to_string_pretty(r)?;
        fs::write(reports_dir.join(report_file_name(r)), text + "\n")?;
    }
    fs::write(dir.join("reports.csv"), csv_table(&summary.reports)?)?;
    fs::write(dir.join("summary.txt"), summary_text(summary))?;
    Ok(())
}

pub const CSV_HEADER: [&str; 10] = [
    "identity_id",
    "scenario_id",
    "grid",
    "residual_abs",
    "residual_rel",
    "order_est",
    "warnings",
    "tier",
    "tolerance",
    "status",
];

fn sci(v: f64) -> String {
    format!("{v:.6e}")
}

/// The report table, one row per report, in run order.
pub fn csv_table(reports: &[VerificationReport]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in reports {
        let order = r.order_est.map(|o| o.to_string()).unwrap_or_default();
        let mut warnings = r.warnings.clone();
        if let Some(reason) = &r.reason {
            warnings.insert(0, reason.clone());
        }
        w.write_record([
            r.identity_id.clone(),
            r.scenario_id.clone(),
            r.grid.to_string(),
            sci(r.residual_abs),
            sci(r.residual_rel),
            order,
            warnings.join(" | "),
            r.tier.name().to_string(),
            sci(r.tolerance),
            r.status.name().to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))
}

/// Human-readable summary of the decisive reports and the totals.
pub fn summary_text(summary: &RunSummary) -> String {
    let mut out = String::new();
    for r in summary.decisive() {
        let order = r.order_est.map(|o| format!(" order={o}")).unwrap_or_default();
        let reason = r.reason.as_ref().map(|s| format!(" ({s})")).unwrap_or_default();
        out.push_str(&format!(
            "{:<7} {} / {} grid={} rel={} tol={}{order}{reason}\n",
            r.status.name().to_uppercase(),
            r.identity_id,
            r.scenario_id,
            r.grid,
            sci(r.residual_rel),
            sci(r.tolerance),
        ));
    }
    out.push_str(&format!(
        "total: {} pass, {} fail, {} error, {} skipped{}\n",
        summary.count(Status::Pass),
        summary.count(Status::Fail),
        summary.count(Status::Error),
        summary.count(Status::Skipped),
        if summary.strict { " (strict)" } else { "" }
    ));
    out
}

/// Identity listing: `id  tier  description`, sorted by id.
pub fn list_identities() -> String {
    registry()
        .iter()
        .map(|i| format!("{:<22} {:<10} {}\n", i.id, i.tier.name(), i.description))
        .collect()
}

/// Scenario listing: `id  summary`, sorted by id.
pub fn list_scenarios(catalog: &[Scenario]) -> String {
    catalog
        .iter()
        .map(|s| {
            let text = if s.description.is_empty() { s.summary() } else { format!("{} {}", s.description, s.summary()) };
            format!("{:<28} {}\n", s.id, text)
        })
        .collect()
}
