//! Sweep configuration, execution and manifests.
//!
//! A sweep config names a preset, an explicit list of conditions, or both.
//! Manifests use the same schema with every condition fully resolved, so
//! `moval sweep --config <dir>/manifest.json --out <dir2>` recreates `<dir>`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{self, ConditionSummary, RecordSet, DEFAULT_WINDOW};
use crate::error::{Error, Result};
use crate::harness::{run_condition_runs, AgentKind, ConditionConfig, Preset, RecordWriter, RunResult};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RECORDS_FILE: &str = "episodes.csv";

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default)]
    pub conditions: Vec<ConditionConfig>,
    /// Overrides `base_seed` of every condition.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub episodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offline_episodes: Option<usize>,
    /// Write `summary.csv` and `table.md` after the runs.
    #[serde(default = "yes")]
    pub report: bool,
    /// Also write `curves/`.
    #[serde(default)]
    pub curves: bool,
    /// Write final Q-tables to `q/<condition>/run_<r>.csv`.
    #[serde(default)]
    pub dump_q: bool,
    /// Free text; manifests store the reproducing command here.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl SweepConfig {
    pub fn from_preset(preset: Preset) -> Self {
        SweepConfig {
            preset: Some(preset),
            conditions: Vec::new(),
            seed: None,
            runs: None,
            episodes: None,
            offline_episodes: None,
            report: true,
            curves: false,
            dump_q: false,
            note: None,
        }
    }

    pub fn from_conditions(conditions: Vec<ConditionConfig>) -> Self {
        SweepConfig {
            preset: None,
            conditions,
            ..SweepConfig::from_preset(Preset::Table1)
        }
    }

    /// Parses JSON, reporting the path of the first schema violation.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: SweepConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Schema {
                path: if path == "." { "$".into() } else { format!("$.{path}") },
                message: e.into_inner().to_string(),
            }
        })?;
        config.resolve()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Expands the preset, applies overrides and validates every condition.
    pub fn resolve(&self) -> Result<Vec<ConditionConfig>> {
        let mut out = self.preset.map(|p| p.conditions(0)).unwrap_or_default();
        out.extend(self.conditions.iter().cloned());
        if out.is_empty() {
            return Err(Error::Schema {
                path: "$".into(),
                message: "sweep needs a preset or at least one condition".into(),
            });
        }
        let from_preset = out.len() - self.conditions.len();
        for (i, c) in out.iter_mut().enumerate() {
            if let Some(seed) = self.seed {
                c.base_seed = seed;
            }
            if let Some(runs) = self.runs {
                c.runs = runs;
            }
            if let Some(episodes) = self.episodes {
                c.episodes = episodes;
            }
            if let Some(offline) = self.offline_episodes {
                c.offline_episodes = offline;
            }
            c.validate().map_err(|e| Error::Schema {
                path: if i < from_preset {
                    format!("$.preset[{i}]")
                } else {
                    format!("$.conditions[{}]", i - from_preset)
                },
                message: e.to_string(),
            })?;
        }
        let mut keys: Vec<_> = out.iter().map(ConditionConfig::key).collect();
        keys.sort();
        if let Some(w) = keys.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::config(format!("duplicate condition {}", w[0].slug())));
        }
        Ok(out)
    }

    /// Fully resolved copy suitable for writing as a manifest.
    pub fn manifest(&self, note: Option<String>) -> Result<SweepConfig> {
        Ok(SweepConfig {
            preset: None,
            conditions: self.resolve()?,
            seed: None,
            runs: None,
            episodes: None,
            offline_episodes: None,
            report: self.report,
            curves: self.curves,
            dump_q: self.dump_q,
            note,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug)]
pub struct SweepOutput {
    pub records: PathBuf,
    pub summaries: Option<Vec<ConditionSummary>>,
    pub set: RecordSet,
}

/// Runs every condition in order, streaming records to
/// `out_dir/episodes.csv`, then writes reports as configured.
///
/// `progress` is called after each finished condition.
pub fn run_sweep(
    config: &SweepConfig,
    out_dir: impl AsRef<Path>,
    note: Option<String>,
    mut progress: impl FnMut(usize, usize, &ConditionConfig),
) -> Result<SweepOutput> {
    let out_dir = out_dir.as_ref();
    let manifest = config.manifest(note)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let manifest_path = out_dir.join(MANIFEST_FILE);
    fs::write(&manifest_path, manifest.to_json()).map_err(|e| Error::io(&manifest_path, e))?;

    let mut writer = RecordWriter::create(out_dir.join(RECORDS_FILE))?;
    let mut set = RecordSet::new();
    let total = manifest.conditions.len();
    for (i, condition) in manifest.conditions.iter().enumerate() {
        let runs = run_condition_runs(condition)?;
        let key = condition.key();
        writer.write_runs(&key, &runs)?;
        if manifest.dump_q {
            dump_q_tables(out_dir, &key.slug(), &runs)?;
        }
        set.add_runs(&key, &runs);
        progress(i + 1, total, condition);
    }
    let records = writer.finish()?;

    let summaries = if manifest.report {
        let s = analysis::summarize(&set, AgentKind::Tloa)?;
        analysis::write_reports(&s, out_dir, None)?;
        Some(s)
    } else {
        None
    };
    if manifest.curves {
        analysis::emit_curves(&set, out_dir, DEFAULT_WINDOW)?;
    }
    Ok(SweepOutput { records, summaries, set })
}

fn dump_q_tables(out_dir: &Path, slug: &str, runs: &[RunResult]) -> Result<()> {
    let dir = out_dir.join("q").join(slug);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    for run in runs {
        let path = dir.join(format!("run_{}.csv", run.run));
        let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut out = BufWriter::new(file);
        run.q.write_csv(&mut out).map_err(|e| Error::io(&path, e))?;
        out.flush().map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Runs `f` on a pool of `threads` workers, or the global pool when `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::config("--threads must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::config(format!("cannot start {n} threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
