use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::transition::{transition_matrix, transition_matrix_over, TransitionMatrix};
use crate::oracle::ModeKind;
use crate::policy::EpisodeRecord;
use crate::world::{EpisodeStatus, FailureReason};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub episode: usize,
    pub outcome: String,
    pub steps: usize,
    pub contacts: usize,
    #[serde(rename = "return")]
    pub ret: f64,
}

/// Aggregate evaluation metrics of one policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub policy: String,
    pub episodes: usize,
    pub success_pct: f64,
    pub avg_object_contacts: f64,
    /// Percentage of episodes per failure reason; every reason is listed.
    pub failure_pct: BTreeMap<String, f64>,
    pub mean_return: f64,
    pub transition: TransitionMatrix,
    pub table: Vec<EpisodeRow>,
}

fn outcome_name(s: EpisodeStatus) -> &'static str {
    match s {
        EpisodeStatus::Running => "running",
        EpisodeStatus::Success => "success",
        EpisodeStatus::Failure(r) => r.name(),
    }
}

/// Summarize `records` (in order) under the label `policy`. The transition
/// matrix covers the modes that occur.
pub fn aggregate(policy: &str, records: &[EpisodeRecord]) -> Result<RunReport> {
    aggregate_with(policy, None, records)
}

/// As [`aggregate`], with the transition matrix over a fixed mode list so
/// unvisited modes still get rows.
pub fn aggregate_over(policy: &str, modes: &[ModeKind], records: &[EpisodeRecord]) -> Result<RunReport> {
    aggregate_with(policy, Some(modes), records)
}

fn aggregate_with(policy: &str, modes: Option<&[ModeKind]>, records: &[EpisodeRecord]) -> Result<RunReport> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no episode records to aggregate".into()));
    }
    let n = records.len() as f64;
    let pct = |k: usize| 100.0 * k as f64 / n;
    let successes = records.iter().filter(|r| r.is_success()).count();
    let mut failure_pct = BTreeMap::new();
    for reason in FailureReason::ALL {
        let k = records
            .iter()
            .filter(|r| r.outcome == EpisodeStatus::Failure(reason))
            .count();
        failure_pct.insert(reason.name().to_string(), pct(k));
    }
    let traces: Vec<_> = records.iter().map(|r| r.mode_trace.clone()).collect();
    let table = records
        .iter()
        .enumerate()
        .map(|(i, r)| EpisodeRow {
            episode: i,
            outcome: outcome_name(r.outcome).to_string(),
            steps: r.steps,
            contacts: r.ball_contacts,
            ret: r.ret,
        })
        .collect();
    Ok(RunReport {
        policy: policy.to_string(),
        episodes: records.len(),
        success_pct: pct(successes),
        avg_object_contacts: records.iter().map(|r| r.ball_contacts as f64).sum::<f64>() / n,
        failure_pct,
        mean_return: records.iter().map(|r| r.ret).sum::<f64>() / n,
        transition: match modes {
            Some(m) => transition_matrix_over(m, &traces)?,
            None => transition_matrix(&traces)?,
        },
        table,
    })
}

impl RunReport {
    pub fn failure_pct(&self, reason: FailureReason) -> f64 {
        self.failure_pct.get(reason.name()).copied().unwrap_or(0.0)
    }

    /// The `fail_pct` column: out-of-arena exits, the planar analogue of a
    /// fall.
    pub fn fail_pct(&self) -> f64 {
        self.failure_pct(FailureReason::OutOfArena)
    }
}

pub const REPORT_COLUMNS: [&str; 4] = ["policy", "success_pct", "avg_contacts", "fail_pct"];

/// Fixed-column text table, one row per report.
pub fn format_table(reports: &[RunReport]) -> String {
    let mut s = format!(
        "{:<24} {:>12} {:>12} {:>12}\n",
        REPORT_COLUMNS[0], REPORT_COLUMNS[1], REPORT_COLUMNS[2], REPORT_COLUMNS[3]
    );
    for r in reports {
        s.push_str(&format!(
            "{:<24} {:>12.1} {:>12.2} {:>12.1}\n",
            r.policy,
            r.success_pct,
            r.avg_object_contacts,
            r.fail_pct()
        ));
    }
    s.push_str("fail_pct counts out-of-arena exits (planar analogue of a fall).\n");
    s
}

/// Write `report.txt` (table) and `report.json` (full reports) into `dir`.
pub fn write_reports(dir: &Path, reports: &[RunReport]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let txt = dir.join("report.txt");
    fs::write(&txt, format_table(reports)).map_err(|e| Error::io(&txt, e))?;
    let json = dir.join("report.json");
    let body = serde_json::to_string_pretty(reports).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(&json, body + "\n").map_err(|e| Error::io(&json, e))
}
