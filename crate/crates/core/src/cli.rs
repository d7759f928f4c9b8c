//! Plan files, result files and the command-line front end.
//!
//! # Plan file
//!
//! Plans are TOML. Every key is optional except `grid.snr_db`; list-valued
//! grid keys also accept a single scalar.
//!
//! ```toml
//! master_seed = 42
//! omega = 200                       # runs per grid point
//! methods = ["hosvd-sti", "bals", "clairvoyant"]
//!
//! [grid]
//! snr_db = [0, 10, 20, 30]          # `inf` disables noise
//! r_b = [0.2, 0.5, 1.0]
//! n = [8]
//! k = [8]                           # or: k_equals_n = true
//! m = [4]
//! l = [4]
//! p = [5]
//!
//! [impairments]
//! mode = "full"                     # full | blockage-only | phase-only | ideal
//! redraw_per_frame = true
//!
//! [bals]
//! max_iters = 200
//! tol = 1e-6
//! ```
//!
//! # Outputs
//!
//! - `results.csv`: one row per `(method, grid point)`, sorted by method,
//!   `r_b`, SNR, then dimensions.
//! - `results.json`: the same rows plus the run manifest (seed, verbatim plan,
//!   resolved plan, library version).
//! - `plot_nmse_<factor>_rb<r_b>.csv`: NMSE-vs-SNR series for each factor and
//!   `r_b`, linear and in dB, with the seed and resolved plan in a `#` preamble.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{BalsOptions, Method};
use crate::harness::{aggregate, run_plan, AggregateRow, ExperimentPlan, ScenarioGrid, DEFAULT_OMEGA};
use crate::scenario::ImpairmentMode;

pub const CSV_HEADER: &str = "method,snr_db,r_b,N,M,L,K,P,omega,nmse_H_mean,nmse_H_stderr,nmse_G_mean,nmse_G_stderr,nmse_E_mean,nmse_E_stderr,runtime_s_mean,excluded_columns";

pub const RUNTIME_NOTE: &str =
    "runtime_s covers estimator execution only (matched filter included for hosvd-sti); scenario generation is excluded";

// ---------------------------------------------------------------------------
// plan parsing

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlan {
    master_seed: Option<u64>,
    omega: Option<usize>,
    methods: Option<Vec<String>>,
    grid: RawGrid,
    impairments: Option<RawImpairments>,
    bals: Option<RawBals>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    snr_db: OneOrMany<f64>,
    r_b: Option<OneOrMany<f64>>,
    n: Option<OneOrMany<usize>>,
    k: Option<OneOrMany<usize>>,
    m: Option<OneOrMany<usize>>,
    l: Option<OneOrMany<usize>>,
    p: Option<OneOrMany<usize>>,
    k_equals_n: Option<bool>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawImpairments {
    mode: Option<ImpairmentMode>,
    redraw_per_frame: Option<bool>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBals {
    max_iters: Option<usize>,
    tol: Option<f64>,
}

fn line_of_offset(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].matches('\n').count() + 1
}

/// First line assigning `key`, optionally inside `[section]`.
fn line_of_key(source: &str, section: Option<&str>, key: &str) -> Option<usize> {
    let mut current: Option<String> = None;
    for (i, line) in source.lines().enumerate() {
        let t = line.trim();
        if let Some(name) = t.strip_prefix('[').and_then(|r| r.split(']').next()) {
            current = Some(name.trim().to_string());
            continue;
        }
        let in_section = match section {
            Some(s) => current.as_deref() == Some(s),
            None => current.is_none(),
        };
        if in_section {
            if let Some((lhs, _)) = t.split_once('=') {
                if lhs.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn plan_error(source: &str, section: Option<&str>, key: &str, message: String) -> Error {
    Error::Plan { line: line_of_key(source, section, key), message }
}

/// Parses and validates a plan, filling defaults (omega 200, every method,
/// full impairments redrawn per frame, `L = M = 4`, `N = K = 8`, `P = 5`,
/// `r_b = 0.5`).
pub fn parse_plan(source: &str) -> Result<ExperimentPlan> {
    let raw: RawPlan = toml::from_str(source).map_err(|e| Error::Plan {
        line: e.span().map(|s| line_of_offset(source, s.start)),
        message: e.message().to_string(),
    })?;

    let defaults = ScenarioGrid::default();
    let grid = ScenarioGrid {
        snr_db: raw.grid.snr_db.into_vec(),
        r_b: raw.grid.r_b.map_or(defaults.r_b, OneOrMany::into_vec),
        n: raw.grid.n.map_or(defaults.n, OneOrMany::into_vec),
        m: raw.grid.m.map_or(defaults.m, OneOrMany::into_vec),
        l: raw.grid.l.map_or(defaults.l, OneOrMany::into_vec),
        p: raw.grid.p.map_or(defaults.p, OneOrMany::into_vec),
        k_equals_n: raw.grid.k_equals_n.unwrap_or(false),
        k: match raw.grid.k {
            Some(k) => k.into_vec(),
            None if raw.grid.k_equals_n == Some(true) => Vec::new(),
            None => defaults.k,
        },
    };
    if grid.k_equals_n && !grid.k.is_empty() {
        return Err(plan_error(source, Some("grid"), "k", "k and k_equals_n are mutually exclusive".into()));
    }

    let methods = match raw.methods {
        None => Method::ALL.to_vec(),
        Some(list) => {
            let mut out = Vec::new();
            for name in list {
                let m: Method = name
                    .parse()
                    .map_err(|e: Error| plan_error(source, None, "methods", e.to_string()))?;
                if !out.contains(&m) {
                    out.push(m);
                }
            }
            out
        }
    };

    let bals_defaults = BalsOptions::default();
    let imp = raw.impairments.unwrap_or(RawImpairments { mode: None, redraw_per_frame: None });
    let bals = raw.bals.unwrap_or(RawBals { max_iters: None, tol: None });
    let plan = ExperimentPlan {
        grid,
        omega: raw.omega.unwrap_or(DEFAULT_OMEGA),
        methods,
        master_seed: raw.master_seed.unwrap_or(0),
        impairment_mode: imp.mode.unwrap_or(ImpairmentMode::Full),
        redraw_per_frame: imp.redraw_per_frame.unwrap_or(true),
        bals_max_iters: bals.max_iters.unwrap_or(bals_defaults.max_iters),
        bals_tol: bals.tol.unwrap_or(bals_defaults.tol),
    };
    validate_with_context(&plan, source)?;
    Ok(plan)
}

fn validate_with_context(plan: &ExperimentPlan, source: &str) -> Result<()> {
    let g = &plan.grid;
    for &r_b in &g.r_b {
        if !(0.0..=1.0).contains(&r_b) {
            return Err(plan_error(source, Some("grid"), "r_b", format!("r_b = {r_b} outside [0, 1]")));
        }
    }
    if !g.k_equals_n {
        for &n in &g.n {
            if let Some(&k) = g.k.iter().find(|&&k| k < n) {
                return Err(plan_error(
                    source,
                    Some("grid"),
                    "k",
                    format!("K = {k} < N = {n} violates the identifiability rule K >= N"),
                ));
            }
        }
    }
    if plan.omega == 0 {
        return Err(plan_error(source, None, "omega", "omega must be at least 1".into()));
    }
    if plan.methods.is_empty() {
        return Err(plan_error(source, None, "methods", "no methods requested".into()));
    }
    plan.validate().map_err(|e| Error::Plan { line: None, message: e.to_string() })
}

pub fn parse_plan_file(path: &Path) -> Result<(ExperimentPlan, String)> {
    let source = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let plan = parse_plan(&source)?;
    Ok((plan, source))
}

// ---------------------------------------------------------------------------
// result emission

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub library_version: String,
    pub master_seed: u64,
    /// The plan file text exactly as read, when the plan came from a file.
    pub plan_source: Option<String>,
    pub resolved_plan: ExperimentPlan,
    pub workers: usize,
    pub runtime_note: String,
    pub disambiguation_note: String,
    pub clairvoyant_note: String,
}

impl RunManifest {
    pub fn new(plan: &ExperimentPlan, plan_source: Option<String>, workers: usize) -> Self {
        Self {
            tool: "ris-chanest".into(),
            library_version: env!("CARGO_PKG_VERSION").into(),
            master_seed: plan.master_seed,
            plan_source,
            resolved_plan: plan.clone(),
            workers,
            runtime_note: RUNTIME_NOTE.into(),
            disambiguation_note: "NMSE is computed after per-column least-squares scaling against ground truth".into(),
            clairvoyant_note: "clairvoyant: per-factor least squares with all other factors set to the truth".into(),
        }
    }
}

/// Scientific notation with 10 significant digits.
pub fn sci(x: f64) -> String {
    format!("{x:.9e}")
}

fn sorted_rows(rows: &[AggregateRow]) -> Vec<&AggregateRow> {
    let mut sorted: Vec<&AggregateRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then(a.point.r_b.total_cmp(&b.point.r_b))
            .then(a.point.snr_db.total_cmp(&b.point.snr_db))
            .then((a.point.n, a.point.m, a.point.l, a.point.k, a.point.p).cmp(&(
                b.point.n, b.point.m, b.point.l, b.point.k, b.point.p,
            )))
    });
    sorted
}

pub fn results_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in sorted_rows(rows) {
        let p = &r.point;
        let (e_mean, e_se) = r.nmse_e.map_or((String::new(), String::new()), |s| (sci(s.mean), sci(s.stderr)));
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.method.as_str(),
            sci(p.snr_db),
            sci(p.r_b),
            p.n,
            p.m,
            p.l,
            p.k,
            p.p,
            r.omega,
            sci(r.nmse_h.mean),
            sci(r.nmse_h.stderr),
            sci(r.nmse_g.mean),
            sci(r.nmse_g.stderr),
            e_mean,
            e_se,
            sci(r.runtime_s.mean),
            r.excluded_columns
        );
    }
    out
}

#[derive(Serialize)]
struct JsonResults<'a> {
    manifest: &'a RunManifest,
    aggregates: Vec<&'a AggregateRow>,
}

pub fn results_json(rows: &[AggregateRow], manifest: &RunManifest) -> Result<String> {
    let doc = JsonResults { manifest, aggregates: sorted_rows(rows) };
    serde_json::to_string_pretty(&doc).map_err(|e| Error::Io(e.to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    H,
    G,
    E,
}

impl Factor {
    pub const ALL: [Factor; 3] = [Factor::H, Factor::G, Factor::E];

    pub fn name(&self) -> &'static str {
        match self {
            Factor::H => "H",
            Factor::G => "G",
            Factor::E => "E",
        }
    }
}

/// One plot-data file body per `(factor, r_b)`; keyed by file name.
pub fn plot_series(rows: &[AggregateRow], manifest: &RunManifest) -> Result<Vec<(String, String)>> {
    let plan_json = serde_json::to_string(&manifest.resolved_plan).map_err(|e| Error::Io(e.to_string()))?;
    let r_bs: BTreeSet<u64> = rows.iter().map(|r| r.point.r_b.to_bits()).collect();
    let mut r_bs: Vec<f64> = r_bs.into_iter().map(f64::from_bits).collect();
    r_bs.sort_by(f64::total_cmp);
    let mut files = Vec::new();
    for factor in Factor::ALL {
        for &r_b in &r_bs {
            let mut body = String::new();
            let _ = writeln!(body, "# master_seed={}", manifest.master_seed);
            let _ = writeln!(body, "# library_version={}", manifest.library_version);
            let _ = writeln!(body, "# plan={plan_json}");
            let _ = writeln!(body, "# factor={} r_b={}", factor.name(), sci(r_b));
            body.push_str("method,N,M,L,K,P,snr_db,nmse_mean,nmse_db\n");
            let mut any = false;
            let mut selected: Vec<&AggregateRow> =
                rows.iter().filter(|r| r.point.r_b.to_bits() == r_b.to_bits()).collect();
            selected.sort_by(|a, b| {
                a.method
                    .cmp(&b.method)
                    .then((a.point.n, a.point.m, a.point.l, a.point.k, a.point.p).cmp(&(
                        b.point.n, b.point.m, b.point.l, b.point.k, b.point.p,
                    )))
                    .then(a.point.snr_db.total_cmp(&b.point.snr_db))
            });
            for r in selected {
                let stat = match factor {
                    Factor::H => Some(r.nmse_h),
                    Factor::G => Some(r.nmse_g),
                    Factor::E => r.nmse_e,
                };
                let Some(stat) = stat else { continue };
                any = true;
                let p = &r.point;
                let _ = writeln!(
                    body,
                    "{},{},{},{},{},{},{},{},{}",
                    r.method,
                    p.n,
                    p.m,
                    p.l,
                    p.k,
                    p.p,
                    sci(p.snr_db),
                    sci(stat.mean),
                    sci(stat.mean_db())
                );
            }
            if any {
                files.push((format!("plot_nmse_{}_rb{}.csv", factor.name(), r_b), body));
            }
        }
    }
    Ok(files)
}

/// Writes the requested formats into `outdir` and returns the written paths.
pub fn emit_results(
    rows: &[AggregateRow],
    formats: &[OutputFormat],
    outdir: &Path,
    manifest: &RunManifest,
) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(Error::Aggregation("nothing to emit".into()));
    }
    fs::create_dir_all(outdir).map_err(|e| Error::Io(format!("{}: {e}", outdir.display())))?;
    let mut written = Vec::new();
    let mut write = |name: &str, body: &str| -> Result<()> {
        let path = outdir.join(name);
        fs::write(&path, body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        written.push(path);
        Ok(())
    };
    if formats.contains(&OutputFormat::Csv) {
        write("results.csv", &results_csv(rows))?;
        for (name, body) in plot_series(rows, manifest)? {
            write(&name, &body)?;
        }
    }
    if formats.contains(&OutputFormat::Json) {
        write("results.json", &results_json(rows, manifest)?)?;
    }
    Ok(written)
}

// ---------------------------------------------------------------------------
// exact-recovery validation

/// Per-run NMSE ceiling for noiseless recovery.
pub const EXACT_RECOVERY_TOL: f64 = 1e-20;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationReport {
    pub plan: ExperimentPlan,
    pub worst_nmse: f64,
    pub failures: Vec<String>,
    pub passed: bool,
}

/// Noiseless end-to-end check: every grid point of `plan` with noise disabled,
/// HOSVD-STI and the clairvoyant bound must both reach [`EXACT_RECOVERY_TOL`]
/// on every factor of every run.
pub fn validate_exact_recovery(plan: &ExperimentPlan, workers: usize) -> Result<ValidationReport> {
    let mut noiseless = plan.clone();
    noiseless.grid.snr_db = vec![f64::INFINITY];
    noiseless.methods = vec![Method::HosvdSti, Method::Clairvoyant];
    let records = run_plan(&noiseless, workers)?;
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for r in &records {
        for (m, e) in &r.failures {
            failures.push(format!("point {} run {}: {m} failed: {e}", r.point_index, r.run_index));
        }
        for o in &r.outcomes {
            for (name, v) in [("H", Some(o.nmse_h)), ("G", Some(o.nmse_g)), ("E", o.nmse_e)] {
                let Some(v) = v else { continue };
                worst = worst.max(v);
                if v.is_nan() || v > EXACT_RECOVERY_TOL {
                    failures.push(format!(
                        "point {} run {}: {} NMSE({name}) = {} > {}",
                        r.point_index,
                        r.run_index,
                        o.method,
                        sci(v),
                        sci(EXACT_RECOVERY_TOL)
                    ));
                }
            }
        }
    }
    Ok(ValidationReport { plan: noiseless, worst_nmse: worst, passed: failures.is_empty(), failures })
}

// ---------------------------------------------------------------------------
// front end

#[derive(Debug, Parser)]
#[command(name = "ris-chanest", version, about = "RIS channel and imperfection estimation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute a plan and write aggregate results.
    Run(CommonArgs),
    /// Execute a plan over an SNR sweep (at least two SNR points) and print the NMSE-vs-SNR table.
    Sweep(CommonArgs),
    /// Check noiseless exact recovery end to end; exits nonzero on failure.
    Validate(CommonArgs),
}

#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// Plan file (TOML).
    #[arg(long)]
    pub plan: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Output formats.
    #[arg(long, value_delimiter = ',', default_value = "csv,json")]
    pub format: Vec<OutputFormat>,
    /// Override the plan's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub quiet: bool,
}

fn load_plan(args: &CommonArgs, required: bool) -> Result<(ExperimentPlan, Option<String>)> {
    let (mut plan, source) = match &args.plan {
        Some(path) => {
            let (plan, source) = parse_plan_file(path)?;
            (plan, Some(source))
        }
        None if required => return Err(Error::Argument("--plan <path> is required".into())),
        None => (ExperimentPlan { omega: 10, ..Default::default() }, None),
    };
    if let Some(seed) = args.seed {
        plan.master_seed = seed;
    }
    Ok((plan, source))
}

fn sweep_table(rows: &[AggregateRow]) -> String {
    let mut out = String::from("method     r_b    N   snr_db   NMSE(H) dB  NMSE(G) dB  NMSE(E) dB  runtime_s\n");
    for r in sorted_rows(rows) {
        let e = r.nmse_e.map_or("       -".to_string(), |s| format!("{:8.2}", s.mean_db()));
        let _ = writeln!(
            out,
            "{:<10} {:<5.2} {:>3} {:>7.1}  {:>10.2}  {:>10.2}  {:>10}  {:.3e}",
            r.method.as_str(),
            r.point.r_b,
            r.point.n,
            r.point.snr_db,
            r.nmse_h.mean_db(),
            r.nmse_g.mean_db(),
            e,
            r.runtime_s.mean
        );
    }
    out
}

fn execute_plan(sweep: bool, args: &CommonArgs) -> Result<()> {
    let (plan, source) = load_plan(args, true)?;
    if sweep && plan.grid.snr_db.len() < 2 {
        return Err(Error::Argument("sweep needs at least two SNR values in grid.snr_db".into()));
    }
    let records = run_plan(&plan, args.workers)?;
    let rows = aggregate(&records)?;
    let manifest = RunManifest::new(&plan, source, args.workers);
    if let Some(out) = &args.out {
        let written = emit_results(&rows, &args.format, out, &manifest)?;
        if !args.quiet {
            for p in written {
                eprintln!("wrote {}", p.display());
            }
        }
    }
    if !args.quiet {
        if sweep {
            print!("{}", sweep_table(&rows));
        } else {
            print!("{}", results_csv(&rows));
        }
    }
    Ok(())
}

fn execute_validate(args: &CommonArgs) -> Result<bool> {
    let (plan, _) = load_plan(args, false)?;
    let report = validate_exact_recovery(&plan, args.workers)?;
    if let Some(out) = &args.out {
        fs::create_dir_all(out)?;
        let body = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
        fs::write(out.join("validation.json"), body)?;
    }
    if !args.quiet {
        for f in &report.failures {
            eprintln!("{f}");
        }
        println!(
            "{} noiseless exact recovery: worst NMSE {} (limit {})",
            if report.passed { "PASS" } else { "FAIL" },
            sci(report.worst_nmse),
            sci(EXACT_RECOVERY_TOL)
        );
    }
    Ok(report.passed)
}

/// Runs a parsed command and returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Run(a) => execute_plan(false, a).map(|_| true),
        Command::Sweep(a) => execute_plan(true, a).map(|_| true),
        Command::Validate(a) => execute_validate(a),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
