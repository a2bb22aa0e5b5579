//! Acceptance criteria, one status line each. Runs without the libtest
//! harness so the lines are always printed, in order.

mod common;

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::{forced_drop_rate, shortest_goal_path, Chain};
use moval::agents::{SelectionPolicy, TransformMode};
use moval::analysis::{mark, summarize, welch_t_test, ConditionSummary, Stars, WelchTest};
use moval::gridworlds::{EnvKind, Environment};
use moval::harness::{run_single, AgentKind, ConditionConfig, ObjectiveTarget};
use moval::sweep::{run_sweep, SweepConfig};
use moval::transforms::{aggregate, apply_transform, TransformKind, TransformSpec, UtilityPolicy};

const SEED: u64 = 42;

enum Status {
    Pass(String),
    Fail(String),
    /// Reported, never gating.
    Soft(String),
}

struct Criterion {
    id: &'static str,
    title: &'static str,
    budget: Duration,
    check: fn() -> Status,
}

fn main() -> ExitCode {
    let only: Vec<String> = std::env::args().skip(1).filter(|a| a.starts_with('A')).collect();
    let criteria = [
        Criterion { id: "A1", title: "transform exactness", budget: Duration::from_secs(1), check: a1 },
        Criterion { id: "A2", title: "transform property suite", budget: Duration::from_secs(30), check: a2 },
        Criterion { id: "A3", title: "environment geometry oracle", budget: Duration::from_secs(10), check: a3 },
        Criterion { id: "A4", title: "learner sanity", budget: Duration::from_secs(60), check: a4 },
        Criterion { id: "A6", title: "experiment-1 orderings", budget: Duration::from_secs(15 * 60), check: a6 },
        Criterion { id: "A7", title: "granularity degradation", budget: Duration::from_secs(15 * 60), check: a7 },
        Criterion { id: "A8", title: "statistics oracle", budget: Duration::from_secs(1), check: a8 },
        Criterion { id: "A9", title: "offline closeness (soft)", budget: Duration::from_secs(15 * 60), check: a9 },
        Criterion { id: "A5", title: "sweep determinism", budget: Duration::from_secs(60 * 60), check: a5 },
    ];
    let mut failed = 0;
    for c in criteria.iter().filter(|c| only.is_empty() || only.iter().any(|o| o == c.id)) {
        let start = Instant::now();
        let status = (c.check)();
        let elapsed = start.elapsed();
        let over = elapsed > c.budget;
        let (word, detail) = match status {
            Status::Pass(d) if !over => ("PASS", d),
            Status::Pass(d) => ("FAIL", format!("{d}; over the {:?} budget", c.budget)),
            Status::Fail(d) => ("FAIL", d),
            Status::Soft(d) => ("INFO", d),
        };
        if word == "FAIL" {
            failed += 1;
        }
        println!("{} {:<30} {word} ({:.1} s) {detail}", c.id, c.title, elapsed.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn verdict(problems: Vec<String>, ok: String) -> Status {
    if problems.is_empty() {
        Status::Pass(ok)
    } else {
        Status::Fail(problems.join("; "))
    }
}

fn a1() -> Status {
    use TransformKind::*;
    let cases: [(TransformKind, f64, f64); 9] = [
        (Sfella, 0.0, 0.0),
        (Sfella, 1.0, 0.693_147_180_559_945_3),
        (Sfella, -1.0, -1.718_281_828_459_045),
        (Ela, -2.0, -6.389_056_098_930_65),
        (Lela, 2.0, 2.864_664_716_763_387),
        (SebaAlignment, -2.0, -4.0),
        (Ela, 0.0, 0.0),
        (Lela, 0.0, 0.0),
        (SebaAlignment, 0.0, 0.0),
    ];
    let mut problems = Vec::new();
    for (kind, x, want) in cases {
        let got = apply_transform(&kind, 1.0, x).unwrap();
        if (got - want).abs() > 1e-12 {
            problems.push(format!("{kind}({x}) = {got}, want {want}"));
        }
    }
    let sfella = UtilityPolicy::uniform(Sfella, 1.0).unwrap();
    let pair = aggregate(&[1.0, -1.0], &sfella).unwrap();
    if (pair - -1.025_134_647_899_099_9).abs() > 1e-12 {
        problems.push(format!("aggregate [1, -1] = {pair}"));
    }
    verdict(problems, "9 closed forms within 1e-12".into())
}

fn a2() -> Status {
    let results = common::props::run_suite(100_000);
    let problems: Vec<String> = results
        .iter()
        .filter_map(|(name, r)| r.as_ref().err().map(|e| format!("{name}: {e}")))
        .collect();
    verdict(problems, format!("{} properties x 100000 cases", results.len()))
}

fn a3() -> Status {
    let mut problems = Vec::new();
    let doors = Environment::with_default_map(EnvKind::Doors);
    let open = shortest_goal_path(&doors, |_| true, |_| true).map(|r| r.0);
    let closed = shortest_goal_path(&doors, |_| true, |s| doors.violations(s) == 0).map(|r| r.0);
    let corridor = shortest_goal_path(&doors, |s| doors.violations(s) == 0, |_| true).map(|r| r.0);
    if (open, closed, corridor) != (Some(7), Some(8), Some(10)) {
        problems.push(format!("doors routes {open:?}/{closed:?}/{corridor:?}"));
    }
    let sok = Environment::with_default_map(EnvKind::Sokoban);
    let fast = shortest_goal_path(&sok, |_| true, |_| true).map(|(n, s)| (n, sok.violations(&s)));
    let safe = shortest_goal_path(&sok, |_| true, |s| sok.violations(s) <= 1).map(|(n, s)| (n, sok.violations(&s)));
    if (fast, safe) != (Some((5, 2)), Some((7, 1))) {
        problems.push(format!("sokoban routes {fast:?}/{safe:?}"));
    }
    let bb = Environment::with_default_map(EnvKind::BreakableBottles);
    let rate = forced_drop_rate(&bb, 10_000, SEED);
    if !(0.08..=0.12).contains(&rate) {
        problems.push(format!("drop rate {rate}"));
    }
    verdict(
        problems,
        format!("doors 7/8/10, sokoban 5 (2 walls) / 7 (1 wall), drop rate {rate:.4}"),
    )
}

fn a4() -> Status {
    let mut problems = Vec::new();
    let chain = Chain { n: 5, reward: [-1.0, -0.5] };
    let mut policies: Vec<(String, SelectionPolicy)> = AgentKind::ALL
        .iter()
        .filter_map(|a| {
            a.transforms().map(|[p, q]| {
                let specs = vec![TransformSpec::unit(p), TransformSpec::unit(q)];
                (a.name().to_string(), SelectionPolicy::Utility(UtilityPolicy::new(specs).unwrap()))
            })
        })
        .collect();
    policies.push(("tloa".into(), SelectionPolicy::Tloa { threshold: 0.0 }));
    let mut worst: f64 = 0.0;
    for (name, policy) in policies {
        let agent = chain.train(policy, 3000, 11);
        for s in 0..chain.n {
            let steps = (chain.n - s) as f64;
            for i in 0..2 {
                let err_right = (agent.q.get(s, 1)[i] - steps * chain.reward[i]).abs();
                let err_stay = (agent.q.get(s, 0)[i] - (steps + 1.0) * chain.reward[i]).abs();
                worst = worst.max(err_right).max(err_stay);
                if err_right.max(err_stay) > 1e-3 {
                    problems.push(format!("{name} state {s} objective {i}"));
                }
            }
        }
    }
    let mut equal = 0;
    for env in EnvKind::ALL {
        let q = ConditionConfig::new("m", env, AgentKind::Linear, TransformMode::QValues).with_budget(3, 200, 10);
        let r = ConditionConfig { mode: TransformMode::Rewards, ..q.clone() };
        let e = q.environment().unwrap();
        for run in 0..q.runs {
            let (a, b) = (run_single(&q, &e, run).unwrap(), run_single(&r, &e, run).unwrap());
            if a.episodes == b.episodes && a.q == b.q {
                equal += 1;
            } else {
                problems.push(format!("{env} run {run} differs between modes"));
            }
        }
    }
    verdict(problems, format!("chain max error {worst:.2e}; {equal} linear runs identical across modes"))
}

fn base(experiment: &str, env: EnvKind, agent: AgentKind) -> ConditionConfig {
    ConditionConfig::new(experiment, env, agent, TransformMode::QValues).with_seed(SEED)
}

fn sweep_summaries(conditions: Vec<ConditionConfig>) -> Vec<ConditionSummary> {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = SweepConfig::from_conditions(conditions);
    cfg.report = false;
    let out = run_sweep(&cfg, dir.path(), None, |_, _, _| {}).unwrap();
    summarize(&out.set, AgentKind::Tloa).unwrap()
}

fn find<'a>(s: &'a [ConditionSummary], env: EnvKind, agent: AgentKind, gran: f64) -> &'a ConditionSummary {
    s.iter()
        .find(|c| c.key.env == env && c.key.agent == agent && (c.key.gran_size.to_f64() - gran).abs() < 1e-9)
        .expect("condition present")
}

fn a6() -> Status {
    use AgentKind::*;
    let mut conditions = vec![base("a6", EnvKind::BreakableBottles, Sfella), base("a6", EnvKind::BreakableBottles, Tloa)];
    for a in [Seba, Sfella, Linear, Tloa] {
        conditions.push(base("a6", EnvKind::UnbreakableBottles, a));
    }
    conditions.push(base("a6", EnvKind::Doors, Sfella));
    conditions.push(base("a6", EnvKind::Doors, Tloa));
    let s = sweep_summaries(conditions);
    let mut problems = Vec::new();

    let (bb_s, bb_t) = (find(&s, EnvKind::BreakableBottles, Sfella, 0.0), find(&s, EnvKind::BreakableBottles, Tloa, 0.0));
    let p = bb_s.test.map(|t| t.p).unwrap_or(1.0);
    if !(bb_s.mean > bb_t.mean && p < 0.01) {
        problems.push(format!("BB SFELLA {:.2} vs TLO^A {:.2}, p={p:.3e}", bb_s.mean, bb_t.mean));
    }

    let ub: Vec<(AgentKind, f64)> = [Seba, Sfella, Linear, Tloa]
        .into_iter()
        .map(|a| (a, find(&s, EnvKind::UnbreakableBottles, a, 0.0).mean))
        .collect();
    let best = ub.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
    let floor = best - 0.15 * best.abs();
    for (a, m) in &ub {
        if *m < floor {
            problems.push(format!("UB {} {m:.2} below {floor:.2} (15% under best {best:.2})", a.display_name()));
        }
    }

    let (d_s, d_t) = (find(&s, EnvKind::Doors, Sfella, 0.0), find(&s, EnvKind::Doors, Tloa, 0.0));
    if d_s.mean < d_t.mean - 0.1 * d_t.mean.abs() {
        problems.push(format!("Doors SFELLA {:.2} below TLO^A {:.2} - 10%", d_s.mean, d_t.mean));
    }
    let ub_text: Vec<String> = ub.iter().map(|(a, m)| format!("{} {m:.2}", a.display_name())).collect();
    let summary = format!(
        "BB SFELLA {:.2} vs TLO^A {:.2} (p={p:.2e}); UB {}; Doors SFELLA {:.2} vs TLO^A {:.2}",
        bb_s.mean,
        bb_t.mean,
        ub_text.join(", "),
        d_s.mean,
        d_t.mean
    );
    if problems.is_empty() {
        Status::Pass(summary)
    } else {
        Status::Fail(format!("{}; [{summary}]", problems.join("; ")))
    }
}

fn a7() -> Status {
    let grans = [0.01, 1.0, 100.0];
    let conditions = grans
        .iter()
        .map(|&g| base("a7", EnvKind::BreakableBottles, AgentKind::Sfella).with_granularity(ObjectiveTarget::Primary, g))
        .chain([base("a7", EnvKind::BreakableBottles, AgentKind::Tloa)])
        .collect();
    let s = sweep_summaries(conditions);
    let means: Vec<f64> = grans.iter().map(|&g| find(&s, EnvKind::BreakableBottles, AgentKind::Sfella, g).mean).collect();
    let mut problems = Vec::new();
    if !(means[0] >= means[1] && means[1] >= means[2]) {
        problems.push("not non-increasing".to_string());
    }
    if means[2] > means[0] - 10.0 {
        problems.push("g=100 less than 10 below g=0.01".to_string());
    }
    let text = format!("SFELLA g=0.01 {:.2}, g=1 {:.2}, g=100 {:.2}", means[0], means[1], means[2]);
    if problems.is_empty() {
        Status::Pass(text)
    } else {
        Status::Fail(format!("{}: {text}", problems.join("; ")))
    }
}

#[derive(serde::Deserialize)]
struct WelchCase {
    a: Vec<f64>,
    b: Vec<f64>,
    t: f64,
    p: f64,
}

fn a8() -> Status {
    let cases: Vec<WelchCase> = serde_json::from_str(include_str!("fixtures/welch_reference.json")).unwrap();
    let mut worst: f64 = 0.0;
    let mut problems = Vec::new();
    for (i, c) in cases.iter().enumerate() {
        let r = welch_t_test(&c.a, &c.b).unwrap();
        let err = ((r.t - c.t) / c.t).abs().max(((r.p - c.p) / c.p).abs());
        worst = worst.max(err);
        if err > 1e-6 {
            problems.push(format!("case {i} relative error {err:.2e}"));
        }
    }
    let boundary = mark(&WelchTest { t: 2.0, df: 40.0, p: 0.05 }, 1.0, 0.0).0;
    if boundary != Stars::None {
        problems.push("p = 0.05 earned a star".into());
    }
    verdict(problems, format!("{} fixtures, max relative error {worst:.2e}; p=0.05 unstarred", cases.len()))
}

fn a9() -> Status {
    let mut conditions = Vec::new();
    for env in [EnvKind::BreakableBottles, EnvKind::UnbreakableBottles] {
        conditions.push(base("a9", env, AgentKind::Sfella));
        conditions.push(base("a9", env, AgentKind::Tloa));
    }
    let s = sweep_summaries(conditions);
    let mut parts = Vec::new();
    for env in [EnvKind::BreakableBottles, EnvKind::UnbreakableBottles] {
        let sf = find(&s, env, AgentKind::Sfella, 0.0).offline_mean.unwrap_or(f64::NAN);
        let tl = find(&s, env, AgentKind::Tloa, 0.0).offline_mean.unwrap_or(f64::NAN);
        let gap = (sf - tl).abs();
        let warn = if gap > 0.2 * tl.abs() { " calibration warning: gap above 20%" } else { "" };
        parts.push(format!("{} offline SFELLA {sf:.2} vs TLO^A {tl:.2} (|diff| {gap:.2}){warn}", env.display_name()));
    }
    Status::Soft(parts.join("; "))
}

fn same_bytes(a: &Path, b: &Path) -> std::io::Result<bool> {
    if a.metadata()?.len() != b.metadata()?.len() {
        return Ok(false);
    }
    let (mut x, mut y) = (BufReader::with_capacity(1 << 20, File::open(a)?), BufReader::with_capacity(1 << 20, File::open(b)?));
    let (mut bx, mut by) = (vec![0u8; 1 << 20], vec![0u8; 1 << 20]);
    loop {
        let n = x.read(&mut bx)?;
        if n == 0 {
            return Ok(true);
        }
        y.read_exact(&mut by[..n])?;
        if bx[..n] != by[..n] {
            return Ok(false);
        }
    }
}

/// Full table1 sweep through the CLI, single-threaded and multi-threaded.
fn a5() -> Status {
    let dir = tempfile::tempdir().unwrap();
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).max(4);
    let mut timings = Vec::new();
    for (name, t) in [("one", 1), ("many", threads)] {
        let out = dir.path().join(name);
        let start = Instant::now();
        let status = Command::new(env!("CARGO_BIN_EXE_moval"))
            .args(["sweep", "table1", "--seed", "42", "--quiet", "--threads", &t.to_string(), "--out"])
            .arg(&out)
            .status()
            .unwrap();
        if !status.success() {
            return Status::Fail(format!("sweep with {t} threads exited with {status}"));
        }
        timings.push(start.elapsed().as_secs_f64());
    }
    let mut problems = Vec::new();
    for f in ["episodes.csv", "summary.csv", "table.md"] {
        match same_bytes(&dir.path().join("one").join(f), &dir.path().join("many").join(f)) {
            Ok(true) => {}
            Ok(false) => problems.push(format!("{f} differs")),
            Err(e) => problems.push(format!("{f}: {e}")),
        }
    }
    let size = dir.path().join("one").join("episodes.csv").metadata().map(|m| m.len()).unwrap_or(0);
    verdict(
        problems,
        format!(
            "byte-identical with 1 and {threads} threads; {:.0} s and {:.0} s per sweep; episodes.csv {:.1} GB",
            timings[0],
            timings[1],
            size as f64 / 1e9
        ),
    )
}
