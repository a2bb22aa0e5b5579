use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use moval::agents::TransformMode;
use moval::analysis::{self, RecordSet, DEFAULT_WINDOW};
use moval::gridworlds::EnvKind;
use moval::harness::{AgentKind, ConditionConfig, ObjectiveTarget, Preset};
use moval::sweep::{self, SweepConfig, MANIFEST_FILE, RECORDS_FILE};
use moval::transforms::{curve_samples, write_curve_csv, TransformRegistry};
use moval::{Error, Result};

const REPRODUCE_NOTE: &str = "reproduce with: moval sweep --config manifest.json --out <dir>";

#[derive(Parser)]
#[command(name = "moval", version, about = "Multi-objective utility transforms on side-effect gridworlds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one condition and write episodes.csv and manifest.json.
    Run(RunArgs),
    /// Run a preset or a config file, then summarise against TLO^A.
    Sweep(SweepArgs),
    /// Rebuild summary.csv and table.md from an episodes.csv.
    Report(ReportArgs),
    /// Write per-condition learning curves from an episodes.csv.
    Curves(CurvesArgs),
    /// Sample a transform function and its slope.
    TransformCurves(TransformCurvesArgs),
    /// Print the embedded default maps.
    Maps(MapsArgs),
}

#[derive(Clone, Debug)]
struct Setting {
    target: ObjectiveTarget,
    value: f64,
}

fn parse_setting(s: &str) -> std::result::Result<Setting, String> {
    let (target, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected <primary|alignment|both>=<value>, got '{s}'"))?;
    let target: ObjectiveTarget = target.parse().map_err(|e: Error| e.to_string())?;
    if target == ObjectiveTarget::None {
        return Err("target must be primary, alignment or both".into());
    }
    let value: f64 = value.parse().map_err(|_| format!("not a number: '{value}'"))?;
    Ok(Setting { target, value })
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    env: EnvKind,
    #[arg(long)]
    agent: AgentKind,
    /// q: transform Q-values; r: transform rewards.
    #[arg(long, default_value = "q")]
    mode: TransformMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Reward scaling, e.g. primary=10.
    #[arg(long, value_parser = parse_setting)]
    scale: Option<Setting>,
    /// Granularity of one objective, e.g. alignment=1.
    #[arg(long, value_parser = parse_setting)]
    granularity: Option<Setting>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    offline: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    /// Map file replacing the embedded default.
    #[arg(long)]
    map: Option<PathBuf>,
    #[arg(long, default_value = "custom")]
    experiment: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
    /// Also write final Q-tables under q/.
    #[arg(long)]
    dump_q: bool,
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// table1, table2 or exp2.
    preset: Option<Preset>,
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    offline: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
    /// Also write learning curves.
    #[arg(long)]
    curves: bool,
    #[arg(long)]
    dump_q: bool,
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// episodes.csv, or a directory containing it.
    #[arg(long)]
    records: PathBuf,
    /// Defaults to the directory of the records file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Agents to show in table.md, comma separated.
    #[arg(long, value_delimiter = ',')]
    columns: Option<Vec<AgentKind>>,
}

#[derive(Args)]
struct CurvesArgs {
    #[arg(long)]
    records: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
}

#[derive(Args)]
struct TransformCurvesArgs {
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// lo:hi:step
    #[arg(long, allow_hyphen_values = true)]
    range: String,
    /// Directory for curve.csv and manifest.json; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MapsArgs {
    #[arg(long)]
    env: Option<EnvKind>,
}

/// Manifest of the read-side commands, which only need their arguments.
#[derive(Serialize)]
struct CommandManifest<'a> {
    command: &'a str,
    args: Vec<String>,
    version: &'a str,
}

fn write_command_manifest(dir: &Path, file: &str, command: &str) -> Result<()> {
    let manifest = CommandManifest {
        command,
        args: std::env::args().skip(1).collect(),
        version: env!("CARGO_PKG_VERSION"),
    };
    let path = dir.join(file);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

fn progress(quiet: bool) -> impl FnMut(usize, usize, &ConditionConfig) {
    move |i, n, c| {
        if !quiet {
            eprintln!("[{i}/{n}] {}", c.key().slug());
        }
    }
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let mut c = ConditionConfig::new(&a.experiment, a.env, a.agent, a.mode).with_seed(a.seed);
    if let Some(s) = a.scale {
        c = c.with_scale(s.target, s.value);
    }
    if let Some(g) = a.granularity {
        c = c.with_granularity(g.target, g.value);
    }
    c.episodes = a.episodes.unwrap_or(c.episodes);
    c.offline_episodes = a.offline.unwrap_or(c.offline_episodes);
    c.runs = a.runs.unwrap_or(c.runs);
    c.alpha = a.alpha.unwrap_or(c.alpha);
    c.gamma = a.gamma.unwrap_or(c.gamma);
    c.epsilon = a.epsilon.unwrap_or(c.epsilon);
    c.threshold = a.threshold.unwrap_or(c.threshold);
    c.c = a.c.unwrap_or(c.c);
    if let Some(path) = &a.map {
        c.map = Some(fs::read_to_string(path).map_err(|e| Error::io(path, e))?);
    }
    c.validate()?;
    let mut config = SweepConfig::from_conditions(vec![c]);
    config.report = false;
    config.dump_q = a.dump_q;
    let quiet = a.quiet;
    sweep::with_threads(a.threads, || {
        sweep::run_sweep(&config, &a.out, Some(REPRODUCE_NOTE.into()), progress(quiet))
    })??;
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> Result<()> {
    let mut config = match (a.preset, &a.config) {
        (Some(p), None) => SweepConfig::from_preset(p),
        (None, Some(path)) => SweepConfig::load(path)?,
        _ => return Err(Error::config("sweep needs a preset (table1, table2, exp2) or --config <file>")),
    };
    config.seed = a.seed.or(config.seed);
    config.runs = a.runs.or(config.runs);
    config.episodes = a.episodes.or(config.episodes);
    config.offline_episodes = a.offline.or(config.offline_episodes);
    config.curves |= a.curves;
    config.dump_q |= a.dump_q;
    config.resolve()?;
    let quiet = a.quiet;
    let out = sweep::with_threads(a.threads, || {
        sweep::run_sweep(&config, &a.out, Some(REPRODUCE_NOTE.into()), progress(quiet))
    })??;
    if !quiet {
        eprintln!("wrote {}", out.records.display());
    }
    Ok(())
}

fn records_path(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join(RECORDS_FILE)
    } else {
        p.to_path_buf()
    }
}

fn default_out(records: &Path, out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| records.parent().map(Path::to_path_buf).unwrap_or_default())
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    let records = records_path(&a.records);
    let out = default_out(&records, a.out);
    let set = RecordSet::read_csv_file(&records)?;
    let summaries = analysis::summarize(&set, AgentKind::Tloa)?;
    analysis::write_reports(&summaries, &out, a.columns.as_deref())?;
    write_command_manifest(&out, "report_manifest.json", "report")
}

fn cmd_curves(a: CurvesArgs) -> Result<()> {
    if a.window == 0 {
        return Err(Error::config("--window must be at least 1"));
    }
    let records = records_path(&a.records);
    let out = default_out(&records, a.out);
    let set = RecordSet::read_csv_file(&records)?;
    analysis::emit_curves(&set, &out, a.window)?;
    write_command_manifest(&out, "curves_manifest.json", "curves")
}

fn parse_range(s: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::config(format!("--range expects lo:hi:step, got '{s}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    Ok((num(parts[0])?, num(parts[1])?, num(parts[2])?))
}

fn cmd_transform_curves(a: TransformCurvesArgs) -> Result<()> {
    let kind = TransformRegistry::builtin().lookup(&a.kind)?;
    let (lo, hi, step) = parse_range(&a.range)?;
    let samples = curve_samples(&kind, a.c, lo, hi, step)?;
    match &a.out {
        None => {
            let stdout = io::stdout();
            write_curve_csv(stdout.lock(), &samples).map_err(|e| Error::io("<stdout>", e))
        }
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let path = dir.join("curve.csv");
            let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            let mut w = io::BufWriter::new(file);
            write_curve_csv(&mut w, &samples).map_err(|e| Error::io(&path, e))?;
            w.flush().map_err(|e| Error::io(&path, e))?;
            write_command_manifest(dir, MANIFEST_FILE, "transform-curves")
        }
    }
}

fn cmd_maps(a: MapsArgs) -> Result<()> {
    let kinds: Vec<EnvKind> = match a.env {
        Some(k) => vec![k],
        None => EnvKind::ALL.to_vec(),
    };
    let mut out = io::stdout().lock();
    for (i, k) in kinds.iter().enumerate() {
        if i > 0 {
            writeln!(out).map_err(|e| Error::io("<stdout>", e))?;
        }
        write!(out, "# {} ({})\n{}", k.display_name(), k.name(), k.default_map())
            .map_err(|e| Error::io("<stdout>", e))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Report(a) => cmd_report(a),
        Command::Curves(a) => cmd_curves(a),
        Command::TransformCurves(a) => cmd_transform_curves(a),
        Command::Maps(a) => cmd_maps(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
