//! Statistical comparison against the TLO^A baseline, summary tables and
//! learning curves.
//!
//! Per-condition, per-run sample: the mean online R* of that run. Each
//! condition is compared with its baseline by Welch's two-tailed t-test.
//! All sums are kept in exact micro-units so results do not depend on the
//! order in which records arrive.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use statrs::function::beta::beta_reg;

use crate::agents::TransformMode;
use crate::error::{Error, Result};
use crate::gridworlds::EnvKind;
use crate::harness::{
    AgentKind, ConditionKey, EpisodeRecord, Micro, ObjectiveTarget, Phase, RunResult, RECORDS_HEADER,
};

pub const DEFAULT_WINDOW: usize = 50;
/// Fraction of the row best within which a mean is highlighted.
pub const BEST_MARGIN: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WelchTest {
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, ss / (n - 1.0))
}

/// Welch's unequal-variance t-test, two-tailed.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::UndefinedTest(format!(
            "need at least 2 observations per sample, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (sa, sb) = (va / na, vb / nb);
    let se2 = sa + sb;
    if se2 == 0.0 {
        let pooled_df = na + nb - 2.0;
        return Ok(if ma == mb {
            WelchTest { t: 0.0, df: pooled_df, p: 1.0 }
        } else {
            let t = if ma > mb { f64::INFINITY } else { f64::NEG_INFINITY };
            WelchTest { t, df: pooled_df, p: 0.0 }
        });
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    Ok(WelchTest { t, df, p: student_t_two_tailed(t, df) })
}

/// `P(|T| >= |t|)` for Student's t with `df` degrees of freedom, through
/// the regularized incomplete beta function.
pub fn student_t_two_tailed(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    if !t.is_finite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    beta_reg(df / 2.0, 0.5, x).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stars {
    None,
    One,
    Two,
    Three,
}

impl Stars {
    /// Thresholds are strict: `p == 0.05` earns no star.
    pub fn from_p(p: f64) -> Stars {
        if p < 0.001 {
            Stars::Three
        } else if p < 0.01 {
            Stars::Two
        } else if p < 0.05 {
            Stars::One
        } else {
            Stars::None
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stars::None => "",
            Stars::One => "*",
            Stars::Two => "**",
            Stars::Three => "***",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
    None,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
            Direction::None => "none",
        }
    }

    fn arrow(self) -> &'static str {
        match self {
            Direction::Up => "↑",
            Direction::Down => "↓",
            Direction::None => "",
        }
    }
}

/// Significance marking of a condition against its baseline.
pub fn mark(test: &WelchTest, mean: f64, baseline_mean: f64) -> (Stars, Direction) {
    let stars = Stars::from_p(test.p);
    let direction = if stars == Stars::None {
        Direction::None
    } else if mean > baseline_mean {
        Direction::Up
    } else {
        Direction::Down
    };
    (stars, direction)
}

/// Flags every value within [`BEST_MARGIN`] of the largest one.
pub fn within_best(values: &[f64]) -> Vec<bool> {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cut = best - BEST_MARGIN * best.abs();
    values.iter().map(|&v| v >= cut).collect()
}

#[derive(Clone, Debug, Default)]
struct RunAcc {
    online: i128,
    online_n: u64,
    offline: i128,
    offline_n: u64,
}

#[derive(Clone, Debug, Default)]
struct EpisodeAcc {
    runs: u64,
    offline: bool,
    r_star: i128,
    sum_rp: i128,
    sum_ra: i128,
}

#[derive(Clone, Debug, Default)]
struct ConditionAcc {
    runs: BTreeMap<usize, RunAcc>,
    episodes: Vec<EpisodeAcc>,
}

fn micro(v: f64) -> i128 {
    Micro::from_f64(v).0 as i128
}

/// Order-independent aggregate of episode records.
#[derive(Clone, Debug, Default)]
pub struct RecordSet {
    conditions: BTreeMap<ConditionKey, ConditionAcc>,
}

impl RecordSet {
    pub fn new() -> Self {
        Self::default()
    }

    #[allow(clippy::too_many_arguments)]
    pub fn add(
        &mut self,
        key: &ConditionKey,
        run: usize,
        episode: usize,
        phase: Phase,
        sum_rp: f64,
        sum_ra: f64,
        r_star: f64,
    ) {
        let acc = match self.conditions.get_mut(key) {
            Some(acc) => acc,
            None => self.conditions.entry(key.clone()).or_default(),
        };
        let r = micro(r_star);
        let run_acc = acc.runs.entry(run).or_default();
        match phase {
            Phase::Online => {
                run_acc.online += r;
                run_acc.online_n += 1;
            }
            Phase::Offline => {
                run_acc.offline += r;
                run_acc.offline_n += 1;
            }
        }
        if acc.episodes.len() <= episode {
            acc.episodes.resize(episode + 1, EpisodeAcc::default());
        }
        let e = &mut acc.episodes[episode];
        e.runs += 1;
        e.offline |= phase == Phase::Offline;
        e.r_star += r;
        e.sum_rp += micro(sum_rp);
        e.sum_ra += micro(sum_ra);
    }

    pub fn add_record(&mut self, r: &EpisodeRecord) {
        self.add(&r.condition, r.run, r.episode, r.phase, r.sum_rp, r.sum_ra, r.r_star);
    }

    pub fn add_runs(&mut self, key: &ConditionKey, runs: &[RunResult]) {
        for run in runs {
            for (i, e) in run.episodes.iter().enumerate() {
                self.add(key, run.run, i, run.phase(i), e.sum_rp, e.sum_ra, e.r_star);
            }
        }
    }

    pub fn from_records(records: &[EpisodeRecord]) -> Self {
        let mut set = RecordSet::new();
        for r in records {
            set.add_record(r);
        }
        set
    }

    /// Streams an `episodes.csv` file.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| Error::Records(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        if header.join(",") != RECORDS_HEADER {
            return Err(Error::Records(format!("unexpected header '{}'", header.join(","))));
        }
        let mut set = RecordSet::new();
        let mut keys: BTreeMap<String, Arc<ConditionKey>> = BTreeMap::new();
        let mut row = csv::StringRecord::new();
        let mut line = 1usize;
        while reader.read_record(&mut row).map_err(|e| Error::Records(e.to_string()))? {
            line += 1;
            let bad = |what: &str| Error::Records(format!("line {line}: bad {what}"));
            let prefix = row.iter().take(8).collect::<Vec<_>>().join(",");
            let key = match keys.get(&prefix) {
                Some(k) => Arc::clone(k),
                None => {
                    let k = Arc::new(parse_key(&row).map_err(|e| Error::Records(format!("line {line}: {e}")))?);
                    keys.insert(prefix, Arc::clone(&k));
                    k
                }
            };
            let field = |i: usize| row.get(i).unwrap_or("");
            let run: usize = field(8).parse().map_err(|_| bad("run"))?;
            let episode: usize = field(9).parse().map_err(|_| bad("episode"))?;
            let phase: Phase = field(10).parse()?;
            let num = |i: usize, what: &str| field(i).parse::<f64>().map_err(|_| bad(what));
            set.add(&key, run, episode, phase, num(12, "sum_rp")?, num(13, "sum_ra")?, num(14, "r_star")?);
        }
        Ok(set)
    }

    pub fn read_csv_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::with_capacity(1 << 20, file))
    }

    pub fn keys(&self) -> impl Iterator<Item = &ConditionKey> {
        self.conditions.keys()
    }

    /// Per-run mean online R*, in run order.
    pub fn online_means(&self, key: &ConditionKey) -> Option<Vec<f64>> {
        self.conditions.get(key).map(|acc| {
            acc.runs
                .values()
                .filter(|r| r.online_n > 0)
                .map(|r| r.online as f64 / 1e6 / r.online_n as f64)
                .collect()
        })
    }

    /// Per-run mean offline R*, in run order.
    pub fn offline_means(&self, key: &ConditionKey) -> Option<Vec<f64>> {
        self.conditions.get(key).map(|acc| {
            acc.runs
                .values()
                .filter(|r| r.offline_n > 0)
                .map(|r| r.offline as f64 / 1e6 / r.offline_n as f64)
                .collect()
        })
    }

    /// Learning curve of one condition.
    pub fn curve(&self, key: &ConditionKey, window: usize) -> Result<Vec<CurvePoint>> {
        if window == 0 {
            return Err(Error::config("rolling window must be at least 1"));
        }
        let acc = self
            .conditions
            .get(key)
            .ok_or_else(|| Error::Report(format!("no records for {}", key.slug())))?;
        let mut points: Vec<CurvePoint> = acc
            .episodes
            .iter()
            .enumerate()
            .filter(|(_, e)| e.runs > 0)
            .map(|(i, e)| {
                let n = e.runs as f64;
                CurvePoint {
                    episode: i,
                    phase: if e.offline { Phase::Offline } else { Phase::Online },
                    runs: e.runs,
                    r_star: e.r_star as f64 / 1e6 / n,
                    sum_rp: e.sum_rp as f64 / 1e6 / n,
                    sum_ra: e.sum_ra as f64 / 1e6 / n,
                    rolling_r_star: 0.0,
                    rolling_sum_rp: 0.0,
                    rolling_sum_ra: 0.0,
                }
            })
            .collect();
        for i in 0..points.len() {
            let lo = (i + 1).saturating_sub(window);
            let span = &points[lo..=i];
            let k = span.len() as f64;
            let (r, p, a) = span.iter().fold((0.0, 0.0, 0.0), |(r, p, a), c| {
                (r + c.r_star, p + c.sum_rp, a + c.sum_ra)
            });
            points[i].rolling_r_star = r / k;
            points[i].rolling_sum_rp = p / k;
            points[i].rolling_sum_ra = a / k;
        }
        Ok(points)
    }
}

fn parse_key(row: &csv::StringRecord) -> Result<ConditionKey> {
    let f = |i: usize| row.get(i).unwrap_or("");
    Ok(ConditionKey {
        experiment: f(0).to_string(),
        env: f(1).parse()?,
        agent: f(2).parse()?,
        mode: f(3).parse()?,
        scale_target: f(4).parse()?,
        scale_factor: f(5).parse()?,
        gran_target: f(6).parse()?,
        gran_size: f(7).parse()?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub episode: usize,
    pub phase: Phase,
    pub runs: u64,
    pub r_star: f64,
    pub sum_rp: f64,
    pub sum_ra: f64,
    pub rolling_r_star: f64,
    pub rolling_sum_rp: f64,
    pub rolling_sum_ra: f64,
}

pub const CURVE_HEADER: &str =
    "episode,phase,runs,mean_r_star,mean_sum_rp,mean_sum_ra,rolling_r_star,rolling_sum_rp,rolling_sum_ra";

pub fn write_curve<W: Write>(mut out: W, points: &[CurvePoint]) -> std::io::Result<()> {
    writeln!(out, "{CURVE_HEADER}")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            p.episode,
            p.phase.name(),
            p.runs,
            p.r_star,
            p.sum_rp,
            p.sum_ra,
            p.rolling_r_star,
            p.rolling_sum_rp,
            p.rolling_sum_ra
        )?;
    }
    Ok(())
}

/// Writes `curves/<condition>.csv` under `dir` for every condition.
pub fn emit_curves(set: &RecordSet, dir: impl AsRef<Path>, window: usize) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref().join("curves");
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut written = Vec::new();
    for key in set.keys() {
        let points = set.curve(key, window)?;
        let path = dir.join(format!("{}.csv", key.slug()));
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        write_curve(BufWriter::new(file), &points).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionSummary {
    pub key: ConditionKey,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub offline_mean: Option<f64>,
    /// `None` for the baseline itself.
    pub test: Option<WelchTest>,
    pub stars: Stars,
    pub direction: Direction,
    pub best: bool,
}

/// Conditions sharing a table row. Granularity rows ignore reward scaling,
/// which some agents need only to keep values in a usable range.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct RowKey {
    experiment: String,
    env: EnvKind,
    mode: TransformMode,
    scaled: bool,
    scale: Option<(ObjectiveTarget, Micro)>,
    gran: (ObjectiveTarget, Micro),
}

fn row_of(k: &ConditionKey) -> RowKey {
    let gran_row = k.gran_target != ObjectiveTarget::None;
    RowKey {
        experiment: k.experiment.clone(),
        env: k.env,
        mode: k.mode,
        scaled: !gran_row && k.scale_target != ObjectiveTarget::None,
        scale: (!gran_row).then_some((k.scale_target, k.scale_factor)),
        gran: (k.gran_target, k.gran_size),
    }
}

/// TLO^A in the same row, else the unmodified TLO^A of the same
/// experiment and environment.
fn baseline_for<'a>(set: &'a RecordSet, key: &ConditionKey, baseline: AgentKind) -> Option<&'a ConditionKey> {
    let same_row = set.keys().find(|k| {
        k.agent == baseline
            && k.experiment == key.experiment
            && k.env == key.env
            && k.scale_target == key.scale_target
            && k.scale_factor == key.scale_factor
            && k.gran_target == key.gran_target
            && k.gran_size == key.gran_size
    });
    same_row.or_else(|| {
        set.keys().find(|k| {
            k.agent == baseline && k.experiment == key.experiment && k.env == key.env && k.is_unmodified()
        })
    })
}

/// Summarises every condition and tests it against the baseline agent.
pub fn summarize(set: &RecordSet, baseline: AgentKind) -> Result<Vec<ConditionSummary>> {
    let mut out = Vec::new();
    for key in set.keys() {
        let sample = set.online_means(key).unwrap_or_default();
        if sample.is_empty() {
            return Err(Error::Report(format!("no online episodes for {}", key.slug())));
        }
        let n = sample.len();
        let mean = sample.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 { mean_var(&sample).1.sqrt() } else { 0.0 };
        let offline = set.offline_means(key).unwrap_or_default();
        let offline_mean = (!offline.is_empty()).then(|| offline.iter().sum::<f64>() / offline.len() as f64);

        let (test, stars, direction) = if key.agent == baseline {
            (None, Stars::None, Direction::None)
        } else {
            let base_key = baseline_for(set, key, baseline).ok_or_else(|| {
                Error::Report(format!("no {} baseline for row {}", baseline.display_name(), key.slug()))
            })?;
            let base = set.online_means(base_key).unwrap_or_default();
            let test = welch_t_test(&sample, &base)?;
            let base_mean = base.iter().sum::<f64>() / base.len() as f64;
            let (s, d) = mark(&test, mean, base_mean);
            (Some(test), s, d)
        };
        out.push(ConditionSummary {
            key: key.clone(),
            n,
            mean,
            sd,
            offline_mean,
            test,
            stars,
            direction,
            best: false,
        });
    }
    let mut rows: BTreeMap<_, Vec<usize>> = BTreeMap::new();
    for (i, s) in out.iter().enumerate() {
        rows.entry(row_of(&s.key)).or_default().push(i);
    }
    for members in rows.values() {
        let means: Vec<f64> = members.iter().map(|&i| out[i].mean).collect();
        for (&i, flag) in members.iter().zip(within_best(&means)) {
            out[i].best = flag;
        }
    }
    Ok(out)
}

pub const SUMMARY_HEADER: &str = "experiment,env,agent,mode,scale_target,scale_factor,gran_target,gran_size,n,mean_r_star,sd_r_star,offline_mean_r_star,t,df,p,stars,direction,best";

pub fn write_summary_csv<W: Write>(mut out: W, summaries: &[ConditionSummary]) -> std::io::Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for s in summaries {
        let k = &s.key;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        let test = |f: fn(&WelchTest) -> f64| s.test.as_ref().map(|t| format!("{:.6}", f(t))).unwrap_or_default();
        let p = s.test.as_ref().map(|t| format!("{:.6e}", t.p)).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{:.6},{:.6},{},{},{},{},{},{},{}",
            k.experiment,
            k.env,
            k.agent,
            k.mode.name(),
            k.scale_target,
            k.scale_factor,
            k.gran_target,
            k.gran_size,
            s.n,
            s.mean,
            s.sd,
            opt(s.offline_mean),
            test(|t| t.t),
            test(|t| t.df),
            p,
            s.stars.as_str(),
            s.direction.name(),
            s.best
        )?;
    }
    Ok(())
}

fn factor_label(m: Micro) -> String {
    let v = m.to_f64();
    if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v}")
    }
}

/// Markdown tables, one per experiment, rows grouped by environment and
/// modification, one column per agent. Bold cells are within 10% of the
/// row best; arrows and stars mark significance against the baseline.
pub fn render_table(summaries: &[ConditionSummary], columns: Option<&[AgentKind]>) -> String {
    let mut experiments: BTreeMap<&str, Vec<&ConditionSummary>> = BTreeMap::new();
    for s in summaries {
        experiments.entry(&s.key.experiment).or_default().push(s);
    }
    let mut md = String::new();
    for (experiment, items) in experiments {
        let agents: Vec<AgentKind> = AgentKind::ALL
            .into_iter()
            .filter(|a| items.iter().any(|s| s.key.agent == *a))
            .filter(|a| columns.is_none_or(|c| c.contains(a)))
            .collect();
        let _ = writeln!(md, "## {experiment}\n");
        let _ = write!(md, "| Environment | Mode | Objective scaled | Scale | Objective granularised | Granularity |");
        for a in &agents {
            let _ = write!(md, " {} |", a.display_name());
        }
        let _ = write!(md, "\n|---|---|---|---:|---|---:|");
        for _ in &agents {
            md.push_str("---:|");
        }
        md.push('\n');
        let mut rows: BTreeMap<RowKey, Vec<&ConditionSummary>> = BTreeMap::new();
        for s in items {
            rows.entry(row_of(&s.key)).or_default().push(s);
        }
        for (row, cells) in rows {
            let (st, sf) = match row.scale {
                Some((t, f)) => (t.to_string(), factor_label(f)),
                None => {
                    let mut labels: Vec<String> = cells
                        .iter()
                        .map(|c| format!("{} {}", c.key.scale_target, factor_label(c.key.scale_factor)))
                        .collect();
                    labels.sort();
                    labels.dedup();
                    match labels.as_slice() {
                        [one] => {
                            let (t, f) = one.split_once(' ').unwrap_or((one, ""));
                            (t.to_string(), f.to_string())
                        }
                        _ => ("per agent".to_string(), labels.join("; ")),
                    }
                }
            };
            let _ = write!(
                md,
                "| {} | {} | {} | {} | {} | {} |",
                row.env.display_name(),
                row.mode.name(),
                st,
                sf,
                row.gran.0,
                factor_label(row.gran.1)
            );
            for a in &agents {
                match cells.iter().find(|s| s.key.agent == *a) {
                    Some(s) => {
                        let marks = format!("{}{}", s.direction.arrow(), s.stars.as_str().replace('*', "\\*"));
                        if s.best {
                            let _ = write!(md, " **{:.2}**{marks} |", s.mean);
                        } else {
                            let _ = write!(md, " {:.2}{marks} |", s.mean);
                        }
                    }
                    None => md.push_str("  |"),
                }
            }
            md.push('\n');
        }
        md.push('\n');
    }
    md
}

/// Writes `summary.csv` and `table.md` into `dir`.
pub fn write_reports(
    summaries: &[ConditionSummary],
    dir: impl AsRef<Path>,
    columns: Option<&[AgentKind]>,
) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join("summary.csv");
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = BufWriter::new(file);
    write_summary_csv(&mut w, summaries).map_err(|e| Error::io(&path, e))?;
    w.flush().map_err(|e| Error::io(&path, e))?;
    let path = dir.join("table.md");
    fs::write(&path, render_table(summaries, columns)).map_err(|e| Error::io(&path, e))?;
    Ok(())
}
