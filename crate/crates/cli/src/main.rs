//! `gmtjet`: fixtures, point analyses, verification suites and plot data.
//!
//! Exit codes: 0 holds, 1 fails, 2 usage or input error, 3 inconclusive.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use gmtjet_core::fixtures::{catalog, ground_truth_report, make_fixture};
use gmtjet_core::measure::WeightedCloud;
use gmtjet_core::report::{analyze, Report};
use gmtjet_core::verify::{run, Suite, DEFAULT_SEED};
use gmtjet_core::{Config, MeasureOracle, ScaleSchedule, Status, Vector};

const HOLDS: u8 = 0;
const FAILS: u8 = 1;
const USAGE: u8 = 2;
const INCONCLUSIVE: u8 = 3;

#[derive(Parser)]
#[command(name = "gmtjet", version, about = "Approximate tangent cones, jets and second fundamental forms of sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the fixture catalog or write a fixture as a point cloud.
    Fixture {
        #[command(subcommand)]
        action: FixtureAction,
    },
    /// Tangent plane, iterated jet and sff at a point.
    Analyze {
        /// A gmt-cloud file, or `fixture:<name>`.
        #[arg(long)]
        input: String,
        /// Comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        /// `r0,q,J`.
        #[arg(long)]
        schedule: Option<String>,
        /// Fixture parameter `key=value` (repeatable).
        #[arg(long = "param")]
        params: Vec<String>,
        /// Report path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run verification suites.
    Verify {
        /// A suite name, a comma-separated list, or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Extract a density trace from a report as CSV `r,ratio,err`.
    PlotData {
        /// Report JSON written by `analyze`.
        #[arg(long)]
        trace: PathBuf,
        /// Trace label; the first trace when omitted.
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum FixtureAction {
    List,
    Emit {
        name: String,
        /// Fixture parameter `key=value` (repeatable).
        #[arg(long = "param")]
        params: Vec<String>,
        /// Approximate number of cloud points.
        #[arg(long, default_value_t = 20_000)]
        points: usize,
        /// Cloud path; ground truth goes next to it as `<out>.truth.json`.
        #[arg(long)]
        out: PathBuf,
    },
}

/// An error that maps to exit code 2.
#[derive(Debug)]
struct Usage(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.into())
    }
}

fn status_code(s: Status) -> u8 {
    match s {
        Status::Holds => HOLDS,
        Status::Fails | Status::PreconditionFailed => FAILS,
        Status::Inconclusive => INCONCLUSIVE,
    }
}

fn parse_params(raw: &[String]) -> Result<BTreeMap<String, f64>, Usage> {
    raw.iter()
        .map(|kv| {
            let (k, v) = kv.split_once('=').ok_or_else(|| anyhow!("parameter `{kv}` is not key=value"))?;
            let v: f64 = v.trim().parse().with_context(|| format!("parameter `{k}`"))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn parse_floats(s: &str, what: &str) -> Result<Vec<f64>, Usage> {
    s.split(',').map(|x| x.trim().parse::<f64>().with_context(|| format!("bad {what} `{s}`")).map_err(Usage)).collect()
}

fn parse_schedule(s: Option<&str>, default: ScaleSchedule) -> Result<ScaleSchedule, Usage> {
    let Some(s) = s else { return Ok(default) };
    let v = parse_floats(s, "schedule")?;
    if v.len() != 3 || v[2].fract() != 0.0 || v[2] < 0.0 {
        return Err(Usage(anyhow!("schedule must be `r0,q,J`, got `{s}`")));
    }
    Ok(ScaleSchedule::new(v[0], v[1], v[2] as usize)?)
}

fn load_input(input: &str, params: &BTreeMap<String, f64>) -> Result<MeasureOracle, Usage> {
    if let Some(name) = input.strip_prefix("fixture:") {
        return Ok(make_fixture(name, params)?.oracle);
    }
    let file = fs::File::open(input).with_context(|| format!("cannot open `{input}`"))?;
    let (cloud, m) = WeightedCloud::read_gmt(BufReader::new(file)).with_context(|| format!("reading `{input}`"))?;
    Ok(MeasureOracle::cloud(cloud, m)?)
}

fn write(path: &Path, contents: &str) -> Result<(), Usage> {
    fs::write(path, contents).with_context(|| format!("cannot write `{}`", path.display()))?;
    Ok(())
}

fn fixture(action: FixtureAction) -> Result<u8, Usage> {
    match action {
        FixtureAction::List => {
            for e in catalog() {
                let ps: Vec<String> = e.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                println!("{:<16} {:<28} {}", e.name, ps.join(" "), e.description);
            }
        }
        FixtureAction::Emit { name, params, points, out } => {
            let f = make_fixture(&name, &parse_params(&params)?)?;
            let cloud = f.oracle.discretize(points)?;
            write(&out, &cloud.write_gmt(f.oracle.dim()))?;
            let mut truth_path = out.clone().into_os_string();
            truth_path.push(".truth.json");
            let truth_path = PathBuf::from(truth_path);
            write(&truth_path, &(serde_json::to_string_pretty(&ground_truth_report(&f))? + "\n"))?;
            println!("wrote {} points to {} and ground truth to {}", cloud.len(), out.display(), truth_path.display());
        }
    }
    Ok(HOLDS)
}

#[allow(clippy::too_many_arguments)]
fn analyze_cmd(input: &str, point: &str, order: usize, alpha: f64, schedule: Option<&str>, params: &[String], out: Option<&Path>) -> Result<u8, Usage> {
    let cfg = Config::default();
    let schedule = parse_schedule(schedule, cfg.schedule)?;
    let oracle = load_input(input, &parse_params(params)?)?;
    let a = Vector::from_vec(parse_floats(point, "point")?);
    if a.len() != oracle.ambient_dim() {
        return Err(Usage(anyhow!("point has {} coordinates, the input lives in R^{}", a.len(), oracle.ambient_dim())));
    }
    let report = analyze(&oracle, input, &a, order, alpha, &schedule, &cfg)?;
    let json = serde_json::to_string_pretty(&report)? + "\n";
    match out {
        Some(p) => write(p, &json)?,
        None => print!("{json}"),
    }
    for (k, v) in &report.verdicts {
        eprintln!("{k:<24} {v}");
    }
    if report.tangent.m.is_none() || report.status() != Status::Holds {
        if let Some(t) = report.trace("lower_density") {
            eprintln!("lower density limit: {}", t.verdict.name());
        }
        for n in &report.notes {
            eprintln!("note: {n}");
        }
    }
    Ok(status_code(report.status()))
}

fn verify_cmd(suite: &str, out: &Path, seed: u64) -> Result<u8, Usage> {
    let suites = Suite::parse_list(suite)?;
    let start = Instant::now();
    let results = run(&suites, seed, &Config::default());
    write(out, &results.to_json())?;
    for s in &results.suites {
        println!("{:<12} {} ({} checks, {} failed)", s.suite.name(), if s.passed { "pass" } else { "FAIL" }, s.checks.len(), s.failures().count());
        for c in s.failures() {
            println!("  failed: {}", c.name);
        }
    }
    println!("{} of {} checks passed in {:.1} s", results.total - results.failed, results.total, start.elapsed().as_secs_f64());
    Ok(if results.passed { HOLDS } else { FAILS })
}

fn plot_data(trace: &Path, label: Option<&str>, out: &Path) -> Result<u8, Usage> {
    let text = fs::read_to_string(trace).with_context(|| format!("cannot read `{}`", trace.display()))?;
    let report: Report = serde_json::from_str(&text).with_context(|| format!("`{}` is not a report", trace.display()))?;
    let t = match label {
        Some(l) => report.trace(l).ok_or_else(|| anyhow!("no trace labelled `{l}` in the report"))?,
        None => report.traces.first().ok_or_else(|| anyhow!("the report has no traces"))?,
    };
    write(out, &t.to_csv())?;
    Ok(HOLDS)
}

fn init_threads() -> Result<(), Usage> {
    if let Ok(v) = std::env::var("GMTJET_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("GMTJET_THREADS = `{v}`"))?;
        if n == 0 {
            return Err(Usage(anyhow!("GMTJET_THREADS must be positive")));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = init_threads().and_then(|_| match cli.command {
        Command::Fixture { action } => fixture(action),
        Command::Analyze { input, point, order, alpha, schedule, params, out } => analyze_cmd(&input, &point, order, alpha, schedule.as_deref(), &params, out.as_deref()),
        Command::Verify { suite, out, seed } => verify_cmd(&suite, &out, seed),
        Command::PlotData { trace, label, out } => plot_data(&trace, label.as_deref(), &out),
    });
    match res {
        Ok(code) => ExitCode::from(code),
        Err(Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(USAGE)
        }
    }
}
