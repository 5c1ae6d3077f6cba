//! Equal-budget comparison of a single multi-mode policy with and without
//! the mode-preference term against the mode-specific policy baseline.

use std::fs;
use std::path::Path;

use log::{error, info};

use crate::config::RunConfig;
use crate::metrics::{aggregate_over, RunReport};
use crate::policy::{
    evaluate, train, train_multi_policy_baseline, write_curves_csv, IterationStats, PolicySet,
};
use crate::{Error, Result};

pub const ARM_PREFERENCE: &str = "single+pref";
pub const ARM_NO_PREFERENCE: &str = "single-pref";
pub const ARM_MULTI: &str = "multi-policy";

#[derive(Clone, Debug)]
pub struct ArmResult {
    pub label: String,
    pub report: RunReport,
    /// Environment steps consumed by training.
    pub env_steps: usize,
    pub param_count: usize,
    pub curve: Vec<IterationStats>,
}

/// Outcome of every arm, in the fixed order preference, no-preference,
/// multi-policy. A failed arm does not stop the others.
#[derive(Debug)]
pub struct Ablation {
    pub arms: Vec<(String, Result<ArmResult>)>,
}

impl Ablation {
    pub fn arm(&self, label: &str) -> Option<&ArmResult> {
        self.arms
            .iter()
            .find(|(l, _)| l == label)
            .and_then(|(_, r)| r.as_ref().ok())
    }

    pub fn reports(&self) -> Vec<RunReport> {
        self.arms
            .iter()
            .filter_map(|(_, r)| r.as_ref().ok().map(|a| a.report.clone()))
            .collect()
    }
}

fn single_arm(cfg: &RunConfig, label: &str, preference: bool, dir: Option<&Path>) -> Result<ArmResult> {
    let mut cfg = cfg.clone();
    cfg.train.preference_enabled = preference;
    let tc = cfg.train_config();
    let out = train(&cfg.env_config(), &tc, None)?;
    let eval = evaluate(
        PolicySet::Single(&out.policy),
        &cfg.env_config(),
        cfg.eval.episodes,
        cfg.eval.seed,
        false,
    )?;
    if let Some(d) = dir {
        write_curves_csv(&d.join(format!("curves_{label}.csv")), &out.curve)?;
    }
    Ok(ArmResult {
        label: label.to_string(),
        report: aggregate_over(label, &cfg.task_modes()?, &eval.records)?,
        env_steps: out.curve.iter().map(|c| c.env_steps).sum(),
        param_count: out.policy.param_count(),
        curve: out.curve,
    })
}

fn multi_arm(cfg: &RunConfig, dir: Option<&Path>) -> Result<ArmResult> {
    let tc = cfg.train_config();
    let multi = train_multi_policy_baseline(&cfg.env_config(), &tc, None)?;
    let eval = evaluate(
        PolicySet::Fsm(&multi),
        &cfg.env_config(),
        cfg.eval.episodes,
        cfg.eval.seed,
        false,
    )?;
    let curve: Vec<IterationStats> = multi.curves.iter().flat_map(|(_, c)| c.clone()).collect();
    if let Some(d) = dir {
        write_curves_csv(&d.join(format!("curves_{ARM_MULTI}.csv")), &curve)?;
    }
    Ok(ArmResult {
        label: ARM_MULTI.to_string(),
        report: aggregate_over(ARM_MULTI, &cfg.task_modes()?, &eval.records)?,
        env_steps: curve.iter().map(|c| c.env_steps).sum(),
        param_count: multi.param_count(),
        curve,
    })
}

/// Run the three arms sequentially. When `dir` is given, each arm's
/// learning curve is written there.
pub fn run_ablation(cfg: &RunConfig, dir: Option<&Path>) -> Result<Ablation> {
    if let Some(d) = dir {
        fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    let mut arms = Vec::new();
    for label in [ARM_PREFERENCE, ARM_NO_PREFERENCE, ARM_MULTI] {
        info!("ablation arm {label}");
        let r = match label {
            ARM_PREFERENCE => single_arm(cfg, label, true, dir),
            ARM_NO_PREFERENCE => single_arm(cfg, label, false, dir),
            _ => multi_arm(cfg, dir),
        };
        if let Err(e) = &r {
            error!("arm {label} failed: {e}");
        }
        arms.push((label.to_string(), r));
    }
    Ok(Ablation { arms })
}
