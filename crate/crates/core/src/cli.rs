//! Command-line front end: `reach`, `smooth`, `verify` and `report`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::manifold::{make_shape, sample_count, write_samples_csv, EmbeddedCurve, ShapeSpec, V2};
use crate::reach::{analytic_reach, default_min_sep, estimate_reach_federer, ReachEstimate};
use crate::smoothing::{smooth_manifold_detailed, SmoothingOptions, SmoothingReport};
use crate::verify::pipeline::{main_theorem_verdict, probe_patch_centre};
use crate::verify::{run_suite, CheckResult, Suite, SuiteConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const DEFAULT_SAMPLES: usize = 2000;

#[derive(Debug, Parser)]
#[command(name = "reach-smooth", version, about = "Reach-preserving smoothing of closed plane curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the sampled reach estimate as JSON.
    Reach(RunArgs),
    /// Smooth a shape and write the report, curves and overlay.
    Smooth(RunArgs),
    /// Run a checker suite and write checks.csv.
    Verify(RunArgs),
    /// Summarize the JSON written by `smooth` or `verify`.
    Report(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ShapeKind {
    Circle,
    Ellipse,
    Stadium,
    #[value(name = "cad_profile")]
    CadProfile,
}

#[derive(Debug, Clone, Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    shape: Option<ShapeKind>,
    /// Radius of the circle or of the stadium caps.
    #[arg(long)]
    r: Option<f64>,
    /// Length of the stadium's straight sides.
    #[arg(long)]
    l: Option<f64>,
    /// Ellipse semi-axes.
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    /// Smoothing tolerance. For `verify`, the tolerance of the pipeline
    /// runs relative to each shape's reach.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    /// Number of curve samples for reach scans and CSV output.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long = "min-sep")]
    min_sep: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with a `RunConfig`; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// lemmas, pipeline or all.
    #[arg(long)]
    suite: Option<String>,
}

/// Run settings as read from `--config`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub shape: Option<ShapeSpec>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub min_sep: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub suite: Option<String>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) | Error::Parameter(_) => Failure::Usage(e.to_string()),
            Error::Patch { index, ref source } => Failure::Run(format!("aborted at patch {index}: {source}")),
            other => Failure::Run(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Run(format!("{}: {e}", path.display()))
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit code: 0 when every invoked check passes, 1 on failed checks or an
/// aborted pipeline, 2 on malformed input.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Reach(a) => resolve(&a).and_then(|c| cmd_reach(&c)),
        Command::Smooth(a) => resolve(&a).and_then(|c| cmd_smooth(&c)),
        Command::Verify(a) => resolve(&a).and_then(|c| cmd_verify(&c)),
        Command::Report(a) => resolve(&a).and_then(|c| cmd_report(&c)),
    };
    match outcome {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILED,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Run(m)) => {
            eprintln!("error: {m}");
            EXIT_FAILED
        }
    }
}

/// Merges the config file with the flags.
fn resolve(a: &RunArgs) -> Result<RunConfig, Failure> {
    let mut cfg = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            serde_json::from_str::<RunConfig>(&text)
                .map_err(|e| Failure::Usage(format!("{}: malformed config: {e}", p.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(kind) = a.shape {
        cfg.shape = Some(match kind {
            ShapeKind::Circle => ShapeSpec::circle(a.r.unwrap_or(1.0)),
            ShapeKind::Ellipse => ShapeSpec::ellipse(a.a.unwrap_or(2.0), a.b.unwrap_or(1.0)),
            ShapeKind::Stadium => ShapeSpec::stadium(a.r.unwrap_or(1.0), a.l.unwrap_or(2.0)),
            ShapeKind::CadProfile => ShapeSpec::cad_default(),
        });
    } else if a.r.is_some() || a.l.is_some() || a.a.is_some() || a.b.is_some() {
        return Err(Failure::Usage("shape dimensions need --shape".into()));
    }
    macro_rules! over {
        ($($f:ident),*) => { $( if a.$f.is_some() { cfg.$f = a.$f.clone(); } )* };
    }
    over!(epsilon, delta, rho, samples, min_sep, seed, out, suite);
    if let Some(e) = cfg.epsilon {
        if !(e > 0.0 && e.is_finite()) {
            return Err(Failure::Usage(format!("epsilon must be positive, got {e}")));
        }
    }
    if cfg.samples.is_some_and(|n| n < 3) {
        return Err(Failure::Usage("--samples must be at least 3".into()));
    }
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, Failure> {
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    Ok(dir)
}

fn shape_of(cfg: &RunConfig) -> Result<(ShapeSpec, EmbeddedCurve), Failure> {
    let spec = cfg.shape.clone().ok_or_else(|| Failure::Usage("no shape given (--shape or config)".into()))?;
    let curve = make_shape(&spec)?;
    Ok((spec, curve))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("serializable");
    s.push(b'\n');
    s
}

#[derive(Serialize)]
struct ReachOutput {
    shape: ShapeSpec,
    #[serde(flatten)]
    estimate: ReachEstimate,
    analytic_reach: Option<f64>,
    samples: usize,
}

fn cmd_reach(cfg: &RunConfig) -> Result<bool, Failure> {
    let (spec, curve) = shape_of(cfg)?;
    let n = cfg.samples.unwrap_or(DEFAULT_SAMPLES);
    let sample = sample_count(&curve, n);
    let min_sep = cfg.min_sep.unwrap_or_else(|| default_min_sep(&sample));
    let estimate = estimate_reach_federer(&sample, min_sep)?;
    let out = ReachOutput { analytic_reach: analytic_reach(&spec).ok(), shape: spec, estimate, samples: n };
    let json = to_json(&out);
    std::io::stdout().write_all(&json).map_err(|e| Failure::Run(e.to_string()))?;
    if let Some(dir) = &cfg.out {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        write_file(&dir.join("reach.json"), &json)?;
    }
    Ok(true)
}

#[derive(Serialize, Deserialize)]
struct SmoothOutput {
    config: RunConfig,
    passed: bool,
    checks: Vec<CheckResult>,
    report: serde_json::Value,
}

fn cmd_smooth(cfg: &RunConfig) -> Result<bool, Failure> {
    let (_, curve) = shape_of(cfg)?;
    let eps = cfg.epsilon.ok_or_else(|| Failure::Usage("smooth needs --epsilon".into()))?;
    let mut opts = SmoothingOptions::new(eps);
    opts.delta = cfg.delta;
    opts.rho = cfg.rho;
    opts.min_sep = cfg.min_sep;
    if let Some(n) = cfg.samples {
        opts.scan_samples = n;
    }
    let (after, report, _) = smooth_manifold_detailed(&curve, &opts)?;
    let probes = crate::par::map_indexed(opts.exec, after.patches().len(), |k| probe_patch_centre(&after, k))
        .into_iter()
        .collect::<crate::error::Result<Vec<_>>>()?;
    let failing = probes.iter().filter(|p| !p.passed).count();
    let verdict = main_theorem_verdict(&report, failing, after.patches().len());
    let checks = vec![verdict.reach, verdict.c1, verdict.probe, verdict.result];
    let passed = checks.iter().all(|c| c.passed);

    let dir = out_dir(cfg)?;
    let n = cfg.samples.unwrap_or(DEFAULT_SAMPLES);
    let before_s = sample_count(&curve, n);
    let after_s = sample_count(&after, n);
    for (name, s) in [("curve_before.csv", &before_s), ("curve_after.csv", &after_s)] {
        let mut buf = Vec::new();
        write_samples_csv(s, &mut buf).map_err(|e| Failure::Run(e.to_string()))?;
        write_file(&dir.join(name), &buf)?;
    }
    let centres: Vec<V2> = after.patches().iter().map(|p| p.center).collect();
    let before_pts: Vec<V2> = before_s.iter().map(|s| s.point).collect();
    let after_pts: Vec<V2> = after_s.iter().map(|s| s.point).collect();
    write_file(&dir.join("overlay.svg"), overlay_svg(&before_pts, &after_pts, &centres).as_bytes())?;
    let out = SmoothOutput {
        config: cfg.clone(),
        passed,
        checks,
        report: serde_json::to_value(&report).expect("serializable"),
    };
    write_file(&dir.join("report.json"), &to_json(&out))?;
    println!("{}", smooth_summary(&report, passed));
    Ok(passed)
}

fn smooth_summary(r: &SmoothingReport, passed: bool) -> String {
    format!(
        "{}: R = {}, eps = {}, delta = {:e}, rho = {:e}, {} patches, measured reach {:.6}, C1 distance {:e}: {}",
        r.shape,
        r.r_input,
        r.epsilon,
        r.delta,
        r.rho,
        r.patches_applied,
        r.r_hat_measured.value,
        r.c1_distance,
        if passed { "pass" } else { "FAIL" }
    )
}

/// SVG with the curve before and after smoothing and the patch centres.
/// The y axis points up.
pub fn overlay_svg(before: &[V2], after: &[V2], centres: &[V2]) -> String {
    let all = before.iter().chain(after);
    let (mut lo, mut hi) = (V2::repeat(f64::INFINITY), V2::repeat(f64::NEG_INFINITY));
    for p in all {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    if !lo.x.is_finite() {
        lo = V2::zeros();
        hi = V2::repeat(1.0);
    }
    let span = hi - lo;
    let (mx, my) = (0.05 * span.x.max(1e-12), 0.05 * span.y.max(1e-12));
    let (x0, y0) = (lo.x - mx, -hi.y - my);
    let (w, h) = (span.x + 2.0 * mx, span.y + 2.0 * my);
    let stroke = 0.002 * w.max(h);
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0:.9} {y0:.9} {w:.9} {h:.9}" width="800" height="{:.0}">"#,
        800.0 * h / w
    );
    for (id, colour, pts) in [("before", "#888888", before), ("after", "#c0392b", after)] {
        let _ = write!(s, r#"<polyline id="{id}" fill="none" stroke="{colour}" stroke-width="{stroke:.9}" points=""#);
        for (i, p) in pts.iter().chain(pts.first()).enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{:.9},{:.9}", p.x, -p.y);
        }
        s.push_str("\"/>\n");
    }
    let _ = writeln!(s, r##"<g id="patch-centres" fill="#2471a3">"##);
    for c in centres {
        let _ = writeln!(s, r#"<circle cx="{:.9}" cy="{:.9}" r="{:.9}"/>"#, c.x, -c.y, 1.5 * stroke);
    }
    s.push_str("</g>\n</svg>\n");
    s
}

#[derive(Serialize, Deserialize)]
struct VerifySummary {
    suite: String,
    seed: u64,
    total: usize,
    passed: usize,
    failed: usize,
    all_passed: bool,
    /// `[passed, total]` per check name.
    by_name: BTreeMap<String, [usize; 2]>,
}

/// Writes `results` as CSV with 17 significant digits.
pub fn checks_csv(results: &[CheckResult]) -> Result<Vec<u8>, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Setup(e.to_string());
    w.write_record(["name", "passed", "measured", "bound", "slack", "tolerance", "instance"]).map_err(csv_err)?;
    for r in results {
        w.write_record([
            r.name.clone(),
            r.passed.to_string(),
            format!("{:.16e}", r.measured),
            format!("{:.16e}", r.bound),
            format!("{:.16e}", r.slack),
            format!("{:.16e}", r.tolerance),
            r.instance.clone(),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Setup(e.to_string()))
}

fn cmd_verify(cfg: &RunConfig) -> Result<bool, Failure> {
    let suite_name = cfg.suite.clone().unwrap_or_else(|| "all".into());
    let suite: Suite = suite_name.parse()?;
    let seed = cfg.seed.unwrap_or(0);
    let mut sc = SuiteConfig::new(seed);
    if let Some(e) = cfg.epsilon {
        if e >= 1.0 {
            return Err(Failure::Usage(format!("verify --epsilon is relative to the reach and must be below 1, got {e}")));
        }
        sc.pipeline_epsilon = e;
    }
    let outcome = run_suite(suite, &sc)?;
    let dir = out_dir(cfg)?;
    write_file(&dir.join("checks.csv"), &checks_csv(&outcome.results)?)?;
    write_file(&dir.join("failures.json"), &to_json(&outcome.failures))?;
    let mut by_name: BTreeMap<String, [usize; 2]> = BTreeMap::new();
    for r in &outcome.results {
        let e = by_name.entry(r.name.clone()).or_default();
        e[0] += r.passed as usize;
        e[1] += 1;
    }
    let passed = outcome.results.iter().filter(|r| r.passed).count();
    let summary = VerifySummary {
        suite: suite_name,
        seed,
        total: outcome.results.len(),
        passed,
        failed: outcome.results.len() - passed,
        all_passed: outcome.all_passed(),
        by_name,
    };
    write_file(&dir.join("summary.json"), &to_json(&summary))?;
    println!("{}", verify_text(&summary));
    Ok(summary.all_passed)
}

fn verify_text(s: &VerifySummary) -> String {
    let mut t = format!("suite {} (seed {}): {}/{} checks passed\n", s.suite, s.seed, s.passed, s.total);
    for (name, [p, n]) in &s.by_name {
        let _ = writeln!(t, "  {:<44} {p:>5}/{n:<5}{}", name, if p == n { "" } else { "  FAIL" });
    }
    t.pop();
    t
}

fn cmd_report(cfg: &RunConfig) -> Result<bool, Failure> {
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let mut found = false;
    let mut ok = true;
    let smooth = dir.join("report.json");
    if smooth.exists() {
        found = true;
        let text = fs::read_to_string(&smooth).map_err(|e| io_err(&smooth, e))?;
        let out: SmoothOutput =
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", smooth.display())))?;
        println!("{}", smooth_report_text(&out));
        ok &= out.passed;
    }
    let verify = dir.join("summary.json");
    if verify.exists() {
        found = true;
        let text = fs::read_to_string(&verify).map_err(|e| io_err(&verify, e))?;
        let s: VerifySummary =
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", verify.display())))?;
        println!("{}", verify_text(&s));
        ok &= s.all_passed;
    }
    if !found {
        return Err(Failure::Usage(format!("no report.json or summary.json in {}", dir.display())));
    }
    Ok(ok)
}

fn smooth_report_text(out: &SmoothOutput) -> String {
    let r = &out.report;
    let num = |k: &str| r.get(k).and_then(|v| v.as_f64()).unwrap_or(f64::NAN);
    let net = r.get("net");
    let mut t = String::new();
    let _ = writeln!(t, "shape            {}", r.get("shape").and_then(|v| v.as_str()).unwrap_or("?"));
    let _ = writeln!(t, "reach R          {}", num("r_input"));
    let _ = writeln!(t, "epsilon          {}", num("epsilon"));
    let _ = writeln!(t, "delta            {:e}", num("delta"));
    let _ = writeln!(t, "rho              {:e} (nominal {:e})", num("rho"), num("rho_nominal"));
    if let Some(net) = net {
        let _ = writeln!(
            t,
            "net              {} points, spacing {:e}, N_C = {}",
            net.get("points").and_then(|v| v.as_u64()).unwrap_or(0),
            net.get("spacing").and_then(|v| v.as_f64()).unwrap_or(f64::NAN),
            net.get("n_c").and_then(|v| v.as_u64()).unwrap_or(0)
        );
    }
    let _ = writeln!(t, "L combined       {:e}", num("l_combined"));
    let _ = writeln!(t, "predicted R'     {:e}", num("r_prime_predicted"));
    let measured = r.get("r_hat_measured").and_then(|v| v.get("reach_estimate")).and_then(|v| v.as_f64());
    let _ = writeln!(t, "measured reach   {}", measured.unwrap_or(f64::NAN));
    let _ = writeln!(t, "C1 distance      {:e}", num("c1_distance"));
    for c in &out.checks {
        let _ = writeln!(
            t,
            "check {:<22} {} (measured {:e}, bound {:e}, tolerance {:e})",
            c.name,
            if c.passed { "pass" } else { "FAIL" },
            c.measured,
            c.bound,
            c.tolerance
        );
    }
    let _ = write!(t, "overall          {}", if out.passed { "pass" } else { "FAIL" });
    t
}
