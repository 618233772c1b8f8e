use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::config::{parse_entries, Entry};
use crate::learner::Td3Config;
use crate::rewards::RewardConfig;
use crate::sim::EnvConfig;
use crate::track::TrackConfig;

/// Agents a benchmark can evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AgentKind {
    PurePursuit,
    FollowTheGap,
    /// Path follower plus one trained actor per training seed.
    Modification,
}

impl AgentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::PurePursuit => "pure_pursuit",
            AgentKind::FollowTheGap => "fgm",
            AgentKind::Modification => "modification",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "pure_pursuit" => Some(AgentKind::PurePursuit),
            "fgm" => Some(AgentKind::FollowTheGap),
            "modification" => Some(AgentKind::Modification),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalConfig {
    pub agents: Vec<AgentKind>,
    /// Root seed for evaluation; per-lap seeds derive from it.
    pub seed: u64,
    pub laps_benchmark1: usize,
    pub laps_benchmark2: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            agents: vec![AgentKind::PurePursuit, AgentKind::FollowTheGap],
            seed: 0,
            laps_benchmark1: 100,
            laps_benchmark2: 1000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    /// Grid file, resolved against the config file's directory.
    pub grid: PathBuf,
    pub track: TrackConfig,
    pub env: EnvConfig,
    pub reward: RewardConfig,
    pub td3: Td3Config,
    /// Training seeds; evaluation loads one actor per seed.
    pub train_seeds: Vec<u64>,
    pub eval: EvalConfig,
    /// Lowercase hex SHA-256 of the canonical config text.
    pub digest: String,
}

const SECTIONS: [&str; 5] = ["track", "vehicle", "reward", "td3", "eval"];

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses config text; relative grid paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, HarnessError> {
        let entries = parse_entries(text)?;
        let mut grid = None;
        let mut track = TrackConfig::default();
        let mut env = EnvConfig::default();
        let mut reward = RewardConfig::default();
        let mut td3 = Td3Config::default();
        let mut train_seeds = vec![0];
        let mut eval = EvalConfig::default();

        for e in &entries {
            let known = match e.section.as_str() {
                "track" => match e.key.as_str() {
                    "grid" => {
                        grid = Some(base.join(&e.value));
                        true
                    }
                    "margin" => {
                        track.margin = e.parse()?;
                        true
                    }
                    "spacing" => {
                        track.centerline.spacing = e.parse()?;
                        true
                    }
                    "smoothing" => {
                        track.centerline.smoothing = e.parse()?;
                        true
                    }
                    _ => false,
                },
                "vehicle" => env.apply(e)?,
                "reward" => reward.apply(e)?,
                "td3" => match e.key.as_str() {
                    "seeds" => {
                        train_seeds = parse_list(e)?;
                        true
                    }
                    _ => td3.apply(e)?,
                },
                "eval" => apply_eval(&mut eval, e)?,
                other => {
                    return Err(e
                        .error(format!(
                            "unknown section [{other}], expected one of {SECTIONS:?}"
                        ))
                        .into())
                }
            };
            if !known {
                return Err(e.unknown().into());
            }
        }

        let grid = grid.ok_or_else(|| HarnessError::Config("[track] grid is required".into()))?;
        env.validate()?;
        td3.validate()?;
        if train_seeds.is_empty() {
            return Err(HarnessError::Config("[td3] seeds must not be empty".into()));
        }
        if eval.laps_benchmark1 == 0 || eval.laps_benchmark2 == 0 {
            return Err(HarnessError::Config(
                "evaluation lap counts must be at least 1".into(),
            ));
        }
        let grid_bytes = std::fs::read(&grid)
            .map_err(|e| HarnessError::Io(format!("{}: {e}", grid.display())))?;
        let digest = hex(&Sha256::digest(
            canonical_text(&entries, &grid_bytes).as_bytes(),
        ));
        Ok(Self {
            grid,
            track,
            env,
            reward,
            td3,
            train_seeds,
            eval,
            digest,
        })
    }

    /// Run directory for this config under `out`.
    pub fn run_dir(&self, out: &Path) -> PathBuf {
        out.join(&self.digest)
    }
}

fn apply_eval(eval: &mut EvalConfig, e: &Entry) -> Result<bool, HarnessError> {
    match e.key.as_str() {
        "agents" => {
            eval.agents = e
                .list()
                .iter()
                .map(|a| {
                    AgentKind::parse(a).ok_or_else(|| {
                        e.error(format!(
                            "unknown agent `{a}`, expected pure_pursuit, fgm or modification"
                        ))
                    })
                })
                .collect::<Result<_, _>>()?
        }
        "seed" => eval.seed = e.parse()?,
        "laps_benchmark1" => eval.laps_benchmark1 = e.parse()?,
        "laps_benchmark2" => eval.laps_benchmark2 = e.parse()?,
        _ => return Ok(false),
    }
    Ok(true)
}

fn parse_list(e: &Entry) -> Result<Vec<u64>, HarnessError> {
    e.list()
        .iter()
        .map(|s| {
            s.parse()
                .map_err(|_| e.error(format!("bad integer `{s}`")).into())
        })
        .collect()
}

/// Sections in fixed order, keys sorted, later duplicates win; the grid
/// path is replaced by the hash of its contents.
fn canonical_text(entries: &[Entry], grid_bytes: &[u8]) -> String {
    let mut out = String::new();
    for section in SECTIONS {
        let mut kv: Vec<(&str, String)> = Vec::new();
        for e in entries.iter().filter(|e| e.section == section) {
            let value = if section == "track" && e.key == "grid" {
                format!("sha256:{}", hex(&Sha256::digest(grid_bytes)))
            } else {
                e.value
                    .split(',')
                    .map(str::trim)
                    .collect::<Vec<_>>()
                    .join(",")
            };
            kv.retain(|(k, _)| *k != e.key);
            kv.push((&e.key, value));
        }
        kv.sort();
        for (k, v) in kv {
            out.push_str(&format!("{section}.{k}={v}\n"));
        }
    }
    out
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Per-lap seed: root and lap index hashed together.
pub fn lap_seed(root: u64, lap: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(root.to_le_bytes());
    h.update(lap.to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}
