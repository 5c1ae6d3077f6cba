//! Run configuration: a TOML document with sections `task`, `oracle`,
//! `rewards`, `bounds`, `train` and `eval`, each optional and filled from
//! the task's defaults.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::Value;

use crate::guidance::{DeviationBounds, RewardConfig};
use crate::oracle::OracleConfig;
use crate::policy::{EnvConfig, TrainConfig};
use crate::world::{TaskKind, TaskSpec};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    pub episodes: usize,
    /// Episode `i` is reset with seed `seed + i`.
    pub seed: u64,
    /// Number of episodes whose trajectories are written out.
    pub trajectories: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            episodes: 100,
            seed: 0,
            trajectories: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed for training.
    pub seed: u64,
    pub out_dir: PathBuf,
    pub task: TaskSpec,
    pub oracle: OracleConfig,
    pub rewards: RewardConfig,
    pub bounds: DeviationBounds,
    pub train: TrainConfig,
    pub eval: EvalConfig,
}

impl RunConfig {
    pub fn paper_defaults(kind: TaskKind) -> Self {
        let mut rewards = RewardConfig::paper_defaults();
        rewards.regularization_enabled = kind.regularized();
        Self {
            seed: 0,
            out_dir: PathBuf::from(format!("runs/{}", kind.name())),
            task: TaskSpec::paper_defaults(kind),
            oracle: OracleConfig::default(),
            rewards,
            bounds: DeviationBounds::default(),
            train: TrainConfig::default(),
            eval: EvalConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.task.validate()?;
        self.oracle.build(&self.task)?;
        self.rewards.validate()?;
        self.bounds.validate()?;
        self.train.validate()?;
        Ok(())
    }

    /// Training settings with the master seed applied.
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed,
            ..self.train.clone()
        }
    }

    /// Oracle modes of the configured task, in rank order.
    pub fn task_modes(&self) -> Result<Vec<crate::oracle::ModeKind>> {
        Ok(self.oracle.build(&self.task)?.mode_kinds())
    }

    pub fn env_config(&self) -> EnvConfig {
        EnvConfig {
            spec: self.task.clone(),
            oracle: self.oracle,
            rewards: self.rewards,
            bounds: self.bounds,
            preference_enabled: self.train.preference_enabled,
            frame_stack: self.train.frame_stack,
        }
    }

    /// Parse a TOML document, applying `overrides` (`section.key=value`)
    /// before filling missing fields from the selected task's defaults.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut user: Value = if text.trim().is_empty() {
            Value::Table(Default::default())
        } else {
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        };
        for o in overrides {
            apply_override(&mut user, o)?;
        }
        let kind = match user.get("task").and_then(|t| t.get("task")) {
            None => TaskKind::SoccerStop,
            Some(v) => TaskKind::deserialize(v.clone())
                .map_err(|e| Error::Config(format!("task.task: {e}")))?,
        };
        let mut merged =
            Value::try_from(Self::paper_defaults(kind)).map_err(|e| Error::Config(e.to_string()))?;
        merge(&mut merged, user);
        let cfg: RunConfig = merged.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, overrides).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Effective configuration as TOML; parsing it back yields `self`.
    pub fn echo(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Table(b), Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Apply `a.b.c=value`. The value is read as a TOML literal when it parses
/// as one and as a plain string otherwise.
pub fn apply_override(root: &mut Value, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Usage(format!("override {spec:?} is not key=value")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(Error::Usage(format!("override {spec:?} has an empty key")));
    }
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.trim().to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for p in &parts[..parts.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override {key}: {p} is not a section")))?;
        node = table
            .entry(p.to_string())
            .or_insert_with(|| Value::Table(Default::default()));
    }
    node.as_table_mut()
        .ok_or_else(|| Error::Config(format!("override {key}: parent is not a section")))?
        .insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let c = RunConfig::from_toml_str("", &[]).unwrap();
        assert_eq!(c, RunConfig::paper_defaults(TaskKind::SoccerStop));
    }

    #[test]
    fn task_selects_defaults() {
        let c = RunConfig::from_toml_str("[task]\ntask = \"soccer_kick\"\n", &[]).unwrap();
        assert_eq!(c.task, TaskSpec::paper_defaults(TaskKind::SoccerKick));
        assert!(c.rewards.regularization_enabled);
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = RunConfig::from_toml_str("[train]\nbogus = 1\n", &[]).unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
        assert!(RunConfig::from_toml_str("[nope]\n", &[]).is_err());
    }

    #[test]
    fn overrides_take_precedence() {
        let c = RunConfig::from_toml_str(
            "[train]\npreference_enabled = true\n",
            &["train.preference_enabled=false".into(), "seed=9".into()],
        )
        .unwrap();
        assert!(!c.train.preference_enabled);
        assert_eq!(c.seed, 9);
        assert!(c.echo().unwrap().contains("preference_enabled = false"));
        assert!(RunConfig::from_toml_str("", &["novalue".into()]).is_err());
    }

    #[test]
    fn echo_round_trip() {
        for kind in [TaskKind::ReachAvoid, TaskKind::SoccerStop, TaskKind::SoccerKick, TaskKind::MoveBox] {
            let mut c = RunConfig::paper_defaults(kind);
            c.rewards.base_pos.weight = 0.1 + 0.2;
            let text = c.echo().unwrap();
            let back = RunConfig::from_toml_str(&text, &[]).unwrap();
            assert_eq!(back, c);
            assert_eq!(back.echo().unwrap(), text);
        }
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(RunConfig::from_toml_str("[train]\ngamma = 1.5\n", &[]).is_err());
    }
}
