//! Experimental conditions, episode execution and record emission.
//!
//! A condition is one (environment, agent, mode, scaling, granularity)
//! combination repeated for a number of independent runs. Runs are seeded
//! from `(base_seed, run_index)` alone, so they can execute on any number of
//! threads and still produce byte-identical output once reassembled in run
//! order.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{Agent, LearningParams, QTable, SelectionPolicy, TransformMode};
use crate::error::{Error, Result};
use crate::gridworlds::{episode_r_star, EnvKind, Environment, RewardVector};
use crate::rng::derive_run_seed;
use crate::transforms::{TransformKind, TransformSpec, UtilityPolicy, OBJECTIVES};

pub const RECORDS_HEADER: &str = "experiment,env,agent,mode,scale_target,scale_factor,gran_target,gran_size,run,episode,phase,steps,sum_rp,sum_ra,r_star";

/// Scale factors of the reward-scaling sweeps.
pub const SWEEP_SCALES: [f64; 4] = [0.01, 0.1, 10.0, 100.0];
/// Granularity steps of the granularity sweep.
pub const SWEEP_GRANULARITIES: [f64; 3] = [0.01, 1.0, 100.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Seba,
    Sfella,
    Ela,
    Lela,
    #[serde(alias = "linearsum")]
    Linear,
    Tloa,
}

impl AgentKind {
    pub const ALL: [AgentKind; 6] = [
        AgentKind::Seba,
        AgentKind::Sfella,
        AgentKind::Ela,
        AgentKind::Lela,
        AgentKind::Linear,
        AgentKind::Tloa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Seba => "seba",
            AgentKind::Sfella => "sfella",
            AgentKind::Ela => "ela",
            AgentKind::Lela => "lela",
            AgentKind::Linear => "linear",
            AgentKind::Tloa => "tloa",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            AgentKind::Seba => "SEBA",
            AgentKind::Sfella => "SFELLA",
            AgentKind::Ela => "ELA",
            AgentKind::Lela => "LELA",
            AgentKind::Linear => "LinearSum",
            AgentKind::Tloa => "TLO^A",
        }
    }

    /// Per-objective transform kinds, or `None` for the lexicographic agent.
    pub fn transforms(self) -> Option<[TransformKind; OBJECTIVES]> {
        use TransformKind as K;
        Some(match self {
            AgentKind::Seba => [K::SebaPerformance, K::SebaAlignment],
            AgentKind::Sfella => [K::Sfella, K::Sfella],
            AgentKind::Ela => [K::Ela, K::Ela],
            AgentKind::Lela => [K::Lela, K::Lela],
            AgentKind::Linear => [K::Linear, K::Linear],
            AgentKind::Tloa => return None,
        })
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        if lower == "linearsum" {
            return Ok(AgentKind::Linear);
        }
        AgentKind::ALL
            .into_iter()
            .find(|a| a.name() == lower)
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown agent '{s}' (valid: seba, sfella, ela, lela, linear, tloa)"
                ))
            })
    }
}

/// Which objective a scaling or granularity setting applies to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveTarget {
    #[default]
    None,
    Primary,
    Alignment,
    Both,
}

impl ObjectiveTarget {
    pub fn name(self) -> &'static str {
        match self {
            ObjectiveTarget::None => "none",
            ObjectiveTarget::Primary => "primary",
            ObjectiveTarget::Alignment => "alignment",
            ObjectiveTarget::Both => "both",
        }
    }

    pub fn covers(self, objective: usize) -> bool {
        match self {
            ObjectiveTarget::None => false,
            ObjectiveTarget::Primary => objective == 0,
            ObjectiveTarget::Alignment => objective == 1,
            ObjectiveTarget::Both => true,
        }
    }
}

impl fmt::Display for ObjectiveTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObjectiveTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(ObjectiveTarget::None),
            "primary" | "performance" => Ok(ObjectiveTarget::Primary),
            "alignment" => Ok(ObjectiveTarget::Alignment),
            "both" => Ok(ObjectiveTarget::Both),
            _ => Err(Error::config(format!(
                "unknown objective '{s}' (valid: none, primary, alignment, both)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Online,
    Offline,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Online => "online",
            Phase::Offline => "offline",
        }
    }
}

impl FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "online" => Ok(Phase::Online),
            "offline" => Ok(Phase::Offline),
            _ => Err(Error::Records(format!("unknown phase '{s}'"))),
        }
    }
}

fn default_experiment() -> String {
    "custom".into()
}
fn default_mode() -> TransformMode {
    TransformMode::QValues
}
fn default_alpha() -> f64 {
    LearningParams::default().alpha
}
fn default_gamma() -> f64 {
    LearningParams::default().gamma
}
fn default_epsilon() -> f64 {
    LearningParams::default().epsilon
}
fn default_one() -> f64 {
    1.0
}
fn default_episodes() -> usize {
    5000
}
fn default_offline() -> usize {
    100
}
fn default_runs() -> usize {
    100
}

/// One experimental condition. Field names double as the JSON schema of
/// sweep configs and manifests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionConfig {
    #[serde(default = "default_experiment")]
    pub experiment: String,
    pub env: EnvKind,
    pub agent: AgentKind,
    #[serde(default = "default_mode")]
    pub mode: TransformMode,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// TLO^A alignment threshold.
    #[serde(default)]
    pub threshold: f64,
    /// Transform scale factor applied to both objectives.
    #[serde(default = "default_one")]
    pub c: f64,
    #[serde(default)]
    pub scale_target: ObjectiveTarget,
    #[serde(default = "default_one")]
    pub scale_factor: f64,
    #[serde(default)]
    pub gran_target: ObjectiveTarget,
    #[serde(default)]
    pub gran_size: f64,
    #[serde(default = "default_episodes")]
    pub episodes: usize,
    #[serde(default = "default_offline")]
    pub offline_episodes: usize,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Map text overriding the environment's embedded default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<String>,
}

impl ConditionConfig {
    pub fn new(experiment: &str, env: EnvKind, agent: AgentKind, mode: TransformMode) -> Self {
        ConditionConfig {
            experiment: experiment.into(),
            env,
            agent,
            mode,
            alpha: default_alpha(),
            gamma: default_gamma(),
            epsilon: default_epsilon(),
            threshold: 0.0,
            c: 1.0,
            scale_target: ObjectiveTarget::None,
            scale_factor: 1.0,
            gran_target: ObjectiveTarget::None,
            gran_size: 0.0,
            episodes: default_episodes(),
            offline_episodes: default_offline(),
            runs: default_runs(),
            base_seed: 0,
            map: None,
        }
    }

    pub fn with_scale(mut self, target: ObjectiveTarget, factor: f64) -> Self {
        self.scale_target = target;
        self.scale_factor = factor;
        self
    }

    pub fn with_granularity(mut self, target: ObjectiveTarget, size: f64) -> Self {
        self.gran_target = target;
        self.gran_size = size;
        self
    }

    pub fn with_budget(mut self, runs: usize, episodes: usize, offline: usize) -> Self {
        self.runs = runs;
        self.episodes = episodes;
        self.offline_episodes = offline;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.base_seed = seed;
        self
    }

    pub fn params(&self) -> LearningParams {
        LearningParams {
            alpha: self.alpha,
            gamma: self.gamma,
            epsilon: self.epsilon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params().validate()?;
        if self.runs == 0 {
            return Err(Error::config("runs must be positive"));
        }
        if self.episodes == 0 {
            return Err(Error::config("episodes must be positive"));
        }
        if !(self.scale_factor.is_finite() && self.scale_factor > 0.0) {
            return Err(Error::config(format!(
                "scale factor must be positive, got {}",
                self.scale_factor
            )));
        }
        if !(self.gran_size.is_finite() && self.gran_size >= 0.0) {
            return Err(Error::config(format!(
                "granularity must be nonnegative, got {}",
                self.gran_size
            )));
        }
        if self.agent == AgentKind::Tloa && self.gran_target != ObjectiveTarget::None && self.gran_size > 0.0 {
            return Err(Error::config("granularity does not apply to the tloa agent"));
        }
        self.selection_policy()?.validate()?;
        self.environment()?;
        Ok(())
    }

    pub fn environment(&self) -> Result<Environment> {
        match &self.map {
            Some(text) => Environment::from_map_text(self.env, text),
            None => Ok(Environment::with_default_map(self.env)),
        }
    }

    pub fn selection_policy(&self) -> Result<SelectionPolicy> {
        match self.agent.transforms() {
            None => Ok(SelectionPolicy::Tloa {
                threshold: self.threshold,
            }),
            Some(kinds) => {
                let specs = kinds
                    .into_iter()
                    .enumerate()
                    .map(|(i, kind)| {
                        let g = if self.gran_target.covers(i) { self.gran_size } else { 0.0 };
                        TransformSpec::new(kind, self.c, g)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(SelectionPolicy::Utility(UtilityPolicy::new(specs)?))
            }
        }
    }

    /// Multipliers turning base rewards into agent-visible rewards.
    pub fn reward_scale(&self) -> [f64; OBJECTIVES] {
        let mut s = [1.0; OBJECTIVES];
        for (i, v) in s.iter_mut().enumerate() {
            if self.scale_target.covers(i) {
                *v = self.scale_factor;
            }
        }
        s
    }

    pub fn key(&self) -> ConditionKey {
        ConditionKey {
            experiment: self.experiment.clone(),
            env: self.env,
            agent: self.agent,
            mode: self.mode,
            scale_target: self.scale_target,
            scale_factor: Micro::from_f64(self.scale_factor),
            gran_target: self.gran_target,
            gran_size: Micro::from_f64(self.gran_size),
        }
    }

    pub fn total_episodes(&self) -> usize {
        self.episodes + self.offline_episodes
    }
}

/// A decimal with six fractional digits, the precision of every CSV output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Micro(pub i64);

impl Micro {
    pub fn from_f64(v: f64) -> Micro {
        Micro((v * 1e6).round() as i64)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 1e6
    }
}

impl fmt::Display for Micro {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:06}", abs / 1_000_000, abs % 1_000_000)
    }
}

impl FromStr for Micro {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v: f64 = s
            .parse()
            .map_err(|_| Error::Records(format!("not a number: '{s}'")))?;
        Ok(Micro::from_f64(v))
    }
}

/// Identifies a condition in records and summaries.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConditionKey {
    pub experiment: String,
    pub env: EnvKind,
    pub agent: AgentKind,
    pub mode: TransformMode,
    pub scale_target: ObjectiveTarget,
    pub scale_factor: Micro,
    pub gran_target: ObjectiveTarget,
    pub gran_size: Micro,
}

impl ConditionKey {
    /// File-name friendly identifier.
    pub fn slug(&self) -> String {
        format!(
            "{}_{}_{}_{}_scale-{}-{}_gran-{}-{}",
            self.experiment,
            self.env,
            self.agent,
            self.mode.name(),
            self.scale_target,
            self.scale_factor,
            self.gran_target,
            self.gran_size
        )
    }

    pub fn is_unmodified(&self) -> bool {
        (self.scale_target == ObjectiveTarget::None || self.scale_factor == Micro(1_000_000))
            && (self.gran_target == ObjectiveTarget::None || self.gran_size == Micro(0))
    }

    fn csv_prefix(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.experiment,
            self.env,
            self.agent,
            self.mode.name(),
            self.scale_target,
            self.scale_factor,
            self.gran_target,
            self.gran_size
        )
    }
}

/// Totals of one episode, in base reward units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeOutcome {
    pub steps: u32,
    pub sum_rp: f64,
    pub sum_ra: f64,
    pub r_star: f64,
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeRecord {
    pub condition: Arc<ConditionKey>,
    pub run: usize,
    pub episode: usize,
    pub phase: Phase,
    pub steps: u32,
    pub sum_rp: f64,
    pub sum_ra: f64,
    pub r_star: f64,
}

impl EpisodeRecord {
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        write_record_line(out, &self.condition.csv_prefix(), self.run, self.episode, self.phase, self.steps, self.sum_rp, self.sum_ra, self.r_star)
    }
}

#[allow(clippy::too_many_arguments)]
fn write_record_line<W: Write>(
    out: &mut W,
    prefix: &str,
    run: usize,
    episode: usize,
    phase: Phase,
    steps: u32,
    sum_rp: f64,
    sum_ra: f64,
    r_star: f64,
) -> std::io::Result<()> {
    writeln!(
        out,
        "{prefix},{run},{episode},{},{steps},{sum_rp:.6},{sum_ra:.6},{r_star:.6}",
        phase.name()
    )
}

/// A greedy decision as seen by the agent, for auditing selection.
#[derive(Clone, Copy, Debug)]
pub struct Decision<'a> {
    pub state: usize,
    pub q_row: &'a [[f64; OBJECTIVES]],
    pub chosen: usize,
}

/// Plays one episode. The agent sees `scale`-multiplied rewards; the
/// outcome accumulates base rewards. With `learning` off exploration is
/// disabled and the Q-table is left untouched.
pub fn run_episode<R: Rng + ?Sized>(
    env: &Environment,
    agent: &mut Agent,
    rng: &mut R,
    learning: bool,
    scale: [f64; OBJECTIVES],
) -> EpisodeOutcome {
    run_episode_observed(env, agent, rng, learning, scale, |_| {})
}

/// [`run_episode`] that also reports every greedy selection to `observe`.
pub fn run_episode_observed<R: Rng + ?Sized>(
    env: &Environment,
    agent: &mut Agent,
    rng: &mut R,
    learning: bool,
    scale: [f64; OBJECTIVES],
    mut observe: impl FnMut(Decision<'_>),
) -> EpisodeOutcome {
    let epsilon = if learning { agent.params.epsilon } else { 0.0 };
    let mut state = env.reset();
    let mut sid = env.state_id(&state);
    let mut sum = RewardVector::default();
    let mut steps = 0usize;
    loop {
        let explore = rng.random::<f64>() < epsilon;
        let action = if explore {
            rng.random_range(0..env.action_count())
        } else {
            let a = agent.greedy_action(sid, rng);
            observe(Decision {
                state: sid,
                q_row: agent.q.row(sid),
                chosen: a,
            });
            a
        };
        let out = env
            .step_capped(state, action, steps, rng)
            .expect("agent actions are always in range");
        steps += 1;
        sum.r_p += out.reward.r_p;
        sum.r_a += out.reward.r_a;
        let next = env.state_id(&out.state);
        if learning {
            let visible = RewardVector::new(out.reward.r_p * scale[0], out.reward.r_a * scale[1]);
            // Truncation is not terminal: keep bootstrapping from the last state.
            agent.update(sid, action, visible, next, out.terminal(), rng);
        }
        state = out.state;
        sid = next;
        if out.done {
            return EpisodeOutcome {
                steps: steps as u32,
                sum_rp: sum.r_p,
                sum_ra: sum.r_a,
                r_star: episode_r_star(sum.r_p, sum.r_a, env.kind()),
                truncated: out.truncated,
            };
        }
    }
}

/// All episodes of one run, online then offline, plus the final Q-table.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub run: usize,
    pub episodes: Vec<EpisodeOutcome>,
    pub online: usize,
    pub q: QTable,
}

impl RunResult {
    pub fn phase(&self, episode: usize) -> Phase {
        if episode < self.online {
            Phase::Online
        } else {
            Phase::Offline
        }
    }
}

pub fn build_agent(config: &ConditionConfig, env: &Environment) -> Result<Agent> {
    Agent::new(
        env.state_count(),
        env.action_count(),
        config.selection_policy()?,
        config.mode,
        config.params(),
    )
}

/// Executes run `run_index` of a condition from a fresh agent.
pub fn run_single(config: &ConditionConfig, env: &Environment, run_index: usize) -> Result<RunResult> {
    let mut agent = build_agent(config, env)?;
    let mut rng = derive_run_seed(config.base_seed, run_index as u64);
    let scale = config.reward_scale();
    let mut episodes = Vec::with_capacity(config.total_episodes());
    for _ in 0..config.episodes {
        episodes.push(run_episode(env, &mut agent, &mut rng, true, scale));
    }
    for _ in 0..config.offline_episodes {
        episodes.push(run_episode(env, &mut agent, &mut rng, false, scale));
    }
    Ok(RunResult {
        run: run_index,
        episodes,
        online: config.episodes,
        q: agent.q,
    })
}

/// Runs every run of a condition (in parallel on the current rayon pool)
/// and returns them in run order.
pub fn run_condition_runs(config: &ConditionConfig) -> Result<Vec<RunResult>> {
    config.validate()?;
    let env = config.environment()?;
    (0..config.runs)
        .into_par_iter()
        .map(|r| run_single(config, &env, r))
        .collect()
}

/// Flattens a condition's runs into records in (run, episode) order.
pub fn run_condition(config: &ConditionConfig) -> Result<Vec<EpisodeRecord>> {
    let key = Arc::new(config.key());
    let runs = run_condition_runs(config)?;
    Ok(runs
        .iter()
        .flat_map(|run| {
            let key = Arc::clone(&key);
            run.episodes.iter().enumerate().map(move |(i, e)| EpisodeRecord {
                condition: Arc::clone(&key),
                run: run.run,
                episode: i,
                phase: run.phase(i),
                steps: e.steps,
                sum_rp: e.sum_rp,
                sum_ra: e.sum_ra,
                r_star: e.r_star,
            })
        })
        .collect())
}

/// Streams records to `episodes.csv`. Output goes to a temporary sibling
/// first and is renamed on [`RecordWriter::finish`], so a failed run never
/// leaves a truncated file behind.
pub struct RecordWriter {
    out: Option<BufWriter<File>>,
    partial: PathBuf,
    path: PathBuf,
}

impl RecordWriter {
    pub fn create(path: impl AsRef<Path>) -> Result<RecordWriter> {
        let path = path.as_ref().to_path_buf();
        let mut partial = path.clone().into_os_string();
        partial.push(".partial");
        let partial = PathBuf::from(partial);
        let file = File::create(&partial).map_err(|e| Error::io(&partial, e))?;
        let mut out = BufWriter::with_capacity(1 << 20, file);
        writeln!(out, "{RECORDS_HEADER}").map_err(|e| Error::io(&partial, e))?;
        Ok(RecordWriter {
            out: Some(out),
            partial,
            path,
        })
    }

    pub fn write_runs(&mut self, key: &ConditionKey, runs: &[RunResult]) -> Result<()> {
        let prefix = key.csv_prefix();
        let out = self.out.as_mut().expect("writer is open");
        for run in runs {
            for (i, e) in run.episodes.iter().enumerate() {
                write_record_line(out, &prefix, run.run, i, run.phase(i), e.steps, e.sum_rp, e.sum_ra, e.r_star)
                    .map_err(|err| Error::io(&self.partial, err))?;
            }
        }
        Ok(())
    }

    pub fn write_records(&mut self, records: &[EpisodeRecord]) -> Result<()> {
        let out = self.out.as_mut().expect("writer is open");
        for r in records {
            r.write_csv(out).map_err(|e| Error::io(&self.partial, e))?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        let out = self.out.take().expect("writer is open");
        let file = out
            .into_inner()
            .map_err(|e| Error::io(&self.partial, e.into_error()))?;
        file.sync_all().map_err(|e| Error::io(&self.partial, e))?;
        fs::rename(&self.partial, &self.path).map_err(|e| Error::io(&self.path, e))?;
        Ok(self.path.clone())
    }
}

impl Drop for RecordWriter {
    fn drop(&mut self) {
        if self.out.take().is_some() {
            let _ = fs::remove_file(&self.partial);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Table1,
    Table2,
    Exp2,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table1" => Ok(Preset::Table1),
            "table2" => Ok(Preset::Table2),
            "exp2" => Ok(Preset::Exp2),
            _ => Err(Error::config(format!("unknown preset '{s}' (valid: table1, table2, exp2)"))),
        }
    }
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Table1 => "table1",
            Preset::Table2 => "table2",
            Preset::Exp2 => "exp2",
        }
    }

    /// Expands the preset into its conditions with default budgets.
    pub fn conditions(self, seed: u64) -> Vec<ConditionConfig> {
        match self {
            Preset::Table1 => scaling_grid("table1", TransformMode::QValues, seed),
            Preset::Exp2 => scaling_grid("exp2", TransformMode::Rewards, seed),
            Preset::Table2 => granularity_grid(seed),
        }
    }
}

/// Scale conditions in table order: unscaled, then alignment, then primary.
pub fn scale_conditions() -> Vec<(ObjectiveTarget, f64)> {
    let mut out = vec![(ObjectiveTarget::None, 1.0)];
    for target in [ObjectiveTarget::Alignment, ObjectiveTarget::Primary] {
        out.extend(SWEEP_SCALES.iter().map(|&f| (target, f)));
    }
    out
}

fn scaling_grid(experiment: &str, mode: TransformMode, seed: u64) -> Vec<ConditionConfig> {
    let mut out = Vec::new();
    for env in EnvKind::ALL {
        for (target, factor) in scale_conditions() {
            for agent in AgentKind::ALL {
                out.push(
                    ConditionConfig::new(experiment, env, agent, mode)
                        .with_scale(target, factor)
                        .with_seed(seed),
                );
            }
        }
    }
    out
}

fn granularity_grid(seed: u64) -> Vec<ConditionConfig> {
    let mut out = Vec::new();
    for env in EnvKind::ALL {
        out.push(ConditionConfig::new("table2", env, AgentKind::Tloa, TransformMode::QValues).with_seed(seed));
        for target in [ObjectiveTarget::Alignment, ObjectiveTarget::Primary] {
            for g in SWEEP_GRANULARITIES {
                for agent in [AgentKind::Sfella, AgentKind::Linear] {
                    let mut c = ConditionConfig::new("table2", env, agent, TransformMode::QValues)
                        .with_granularity(target, g)
                        .with_seed(seed);
                    if env == EnvKind::Sokoban && agent == AgentKind::Sfella {
                        c = c.with_scale(ObjectiveTarget::Both, 0.01);
                    }
                    out.push(c);
                }
            }
        }
    }
    out
}
