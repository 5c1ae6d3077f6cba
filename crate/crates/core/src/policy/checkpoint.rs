use std::fs;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::actor_critic::{ActorCritic, ACTION_DIM};
use super::network::MlpShape;
use crate::oracle::ModeKind;
use crate::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

/// Position of a ChaCha8 stream, enough to resume it exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub seed: [u8; 32],
    pub stream: u64,
    /// Word position, decimal (it does not fit in 64 bits).
    pub word_pos: String,
}

impl RngState {
    pub fn of(rng: &ChaCha8Rng) -> Self {
        Self {
            seed: rng.get_seed(),
            stream: rng.get_stream(),
            word_pos: rng.get_word_pos().to_string(),
        }
    }

    pub fn restore(&self) -> Result<ChaCha8Rng> {
        use rand::SeedableRng;
        let pos: u128 = self
            .word_pos
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad rng word position {:?}", self.word_pos)))?;
        let mut rng = ChaCha8Rng::from_seed(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(pos);
        Ok(rng)
    }
}

/// One stored policy; `mode` is set for mode-specific baseline policies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyEntry {
    pub mode: Option<ModeKind>,
    pub actor_sizes: Vec<usize>,
    pub critic_sizes: Vec<usize>,
    pub action_scale: [f64; ACTION_DIM],
    pub params: Vec<f64>,
}

impl PolicyEntry {
    pub fn new(mode: Option<ModeKind>, ac: &ActorCritic) -> Self {
        Self {
            mode,
            actor_sizes: ac.actor.sizes.clone(),
            critic_sizes: ac.critic.sizes.clone(),
            action_scale: ac.action_scale,
            params: ac.params.clone(),
        }
    }

    pub fn to_policy(&self) -> Result<ActorCritic> {
        let ac = ActorCritic {
            actor: MlpShape {
                sizes: self.actor_sizes.clone(),
            },
            critic: MlpShape {
                sizes: self.critic_sizes.clone(),
            },
            action_scale: self.action_scale,
            params: self.params.clone(),
        };
        ac.validate()?;
        Ok(ac)
    }
}

/// Versioned JSON container for trained parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub version: u32,
    pub iteration: usize,
    pub rng: RngState,
    /// Effective run configuration at save time.
    pub config: serde_json::Value,
    pub policies: Vec<PolicyEntry>,
}

impl Checkpoint {
    pub fn new(policies: Vec<PolicyEntry>, iteration: usize, rng: RngState, config: serde_json::Value) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            iteration,
            rng,
            config,
            policies,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).map_err(|e| Error::Checkpoint {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let err = |msg: String| Error::Checkpoint {
            path: path.to_path_buf(),
            msg,
        };
        let raw: serde_json::Value = serde_json::from_str(&text).map_err(|e| err(e.to_string()))?;
        match raw.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == CHECKPOINT_VERSION as u64 => {}
            Some(v) => return Err(err(format!("unsupported version {v} (expected {CHECKPOINT_VERSION})"))),
            None => return Err(err("missing field `version`".into())),
        }
        let ck: Checkpoint = serde_json::from_value(raw).map_err(|e| err(e.to_string()))?;
        if ck.policies.is_empty() {
            return Err(err("no policies stored".into()));
        }
        for p in &ck.policies {
            p.to_policy().map_err(|e| err(e.to_string()))?;
        }
        Ok(ck)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::actor_critic::ArchitectureSpec;
    use rand::{RngCore, SeedableRng};

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ac = ActorCritic::new(6, &ArchitectureSpec { hidden: vec![4], init_log_std: -1.0 }, [1.0, 2.0, 3.0], &mut rng);
        rng.next_u64();
        let ck = Checkpoint::new(
            vec![PolicyEntry::new(Some(ModeKind::Reach), &ac)],
            7,
            RngState::of(&rng),
            serde_json::json!({"a": 1}),
        );
        let path = dir.path().join("ck.json");
        ck.save(&path).unwrap();
        let back = Checkpoint::load(&path).unwrap();
        assert_eq!(back, ck);
        assert_eq!(back.policies[0].to_policy().unwrap(), ac);
        let mut r2 = back.rng.restore().unwrap();
        assert_eq!(r2.next_u64(), rng.next_u64());
    }

    #[test]
    fn version_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        fs::write(&path, r#"{"version": 99}"#).unwrap();
        let e = Checkpoint::load(&path).unwrap_err().to_string();
        assert!(e.contains("version"), "{e}");
        fs::write(&path, "{not json").unwrap();
        assert!(Checkpoint::load(&path).is_err());
        fs::write(&path, r#"{"iteration": 1}"#).unwrap();
        assert!(Checkpoint::load(&path).unwrap_err().to_string().contains("version"));
    }
}
