//! Monte Carlo experiment engine.
//!
//! A plan is a Cartesian grid of scenario parameters. Every `(grid point,
//! run)` pair gets a child seed derived from the master seed, one scenario is
//! generated from it, and every requested method runs on that same
//! realization. Only estimator execution is timed; for HOSVD-STI this
//! includes the matched filter.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimators::{
    bals_baseline, clairvoyant, disambiguate, estimate_hosvd_sti, BalsOptions, FactorEstimates, Method,
};
use crate::scenario::{ImpairmentConfig, ImpairmentMode, Scenario, ScenarioConfig, Truth};
use crate::tensor::ComplexMatrix;

pub const DEFAULT_OMEGA: usize = 200;

/// Parameter lists; the grid is their Cartesian product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioGrid {
    pub snr_db: Vec<f64>,
    pub r_b: Vec<f64>,
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    pub l: Vec<usize>,
    pub k: Vec<usize>,
    pub p: Vec<usize>,
    /// Use `K = N` at every point instead of the `k` list.
    pub k_equals_n: bool,
}

impl Default for ScenarioGrid {
    fn default() -> Self {
        Self {
            snr_db: vec![20.0],
            r_b: vec![0.5],
            n: vec![8],
            m: vec![4],
            l: vec![4],
            k: vec![8],
            p: vec![5],
            k_equals_n: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub snr_db: f64,
    pub r_b: f64,
    pub n: usize,
    pub m: usize,
    pub l: usize,
    pub k: usize,
    pub p: usize,
}

impl GridPoint {
    pub fn scenario(&self, seed: u64) -> ScenarioConfig {
        ScenarioConfig { m: self.m, l: self.l, n: self.n, k: self.k, p: self.p, snr_db: self.snr_db, seed }
    }
}

impl ScenarioGrid {
    /// Grid points in a fixed nested order (SNR innermost).
    pub fn points(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &r_b in &self.r_b {
            for &n in &self.n {
                let ks: Vec<usize> = if self.k_equals_n { vec![n] } else { self.k.clone() };
                for &k in &ks {
                    for &m in &self.m {
                        for &l in &self.l {
                            for &p in &self.p {
                                for &snr_db in &self.snr_db {
                                    out.push(GridPoint { snr_db, r_b, n, m, l, k, p });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub grid: ScenarioGrid,
    /// Runs per grid point.
    pub omega: usize,
    pub methods: Vec<Method>,
    pub master_seed: u64,
    pub impairment_mode: ImpairmentMode,
    pub redraw_per_frame: bool,
    pub bals_max_iters: usize,
    pub bals_tol: f64,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        Self {
            grid: ScenarioGrid::default(),
            omega: DEFAULT_OMEGA,
            methods: Method::ALL.to_vec(),
            master_seed: 0,
            impairment_mode: ImpairmentMode::Full,
            redraw_per_frame: true,
            bals_max_iters: 200,
            bals_tol: 1e-6,
        }
    }
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.omega == 0 {
            return Err(Error::Argument("omega must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Argument("no methods requested".into()));
        }
        let g = &self.grid;
        let lists: [(&str, usize); 6] = [
            ("snr_db", g.snr_db.len()),
            ("r_b", g.r_b.len()),
            ("n", g.n.len()),
            ("m", g.m.len()),
            ("l", g.l.len()),
            ("p", g.p.len()),
        ];
        for (name, len) in lists {
            if len == 0 {
                return Err(Error::Argument(format!("grid list {name} is empty")));
            }
        }
        if !g.k_equals_n && g.k.is_empty() {
            return Err(Error::Argument("grid list k is empty".into()));
        }
        if let Some(snr) = g.snr_db.iter().find(|s| s.is_nan() || **s == f64::NEG_INFINITY) {
            return Err(Error::Argument(format!("invalid SNR {snr}")));
        }
        if self.bals_max_iters == 0 {
            return Err(Error::Argument("bals max_iters must be at least 1".into()));
        }
        for point in g.points() {
            point.scenario(0).validate()?;
            self.impairments(point.r_b).validate()?;
        }
        Ok(())
    }

    pub fn impairments(&self, r_b: f64) -> ImpairmentConfig {
        ImpairmentConfig { r_b, mode: self.impairment_mode, redraw_per_frame: self.redraw_per_frame }
    }
}

/// Stable child seed: the first eight bytes (little endian) of
/// `SHA-256(master || point || run)`, each a little-endian `u64`.
pub fn child_seed(master: u64, point: usize, run: usize) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update((point as u64).to_le_bytes());
    hasher.update((run as u64).to_le_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// `||truth - est||_F^2 / ||truth||_F^2` for one realization.
pub fn nmse(truth: &ComplexMatrix, est: &ComplexMatrix) -> Result<f64> {
    if truth.shape() != est.shape() {
        return Err(Error::Dimension(format!("truth {:?} vs estimate {:?}", truth.shape(), est.shape())));
    }
    let denom = truth.frobenius_norm_sqr();
    if denom == 0.0 {
        return Err(Error::UndefinedMetric("NMSE against an all-zero truth".into()));
    }
    Ok(truth.sub(est)?.frobenius_norm_sqr() / denom)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: Method,
    pub nmse_h: f64,
    pub nmse_g: f64,
    /// `None` for methods that do not estimate `E`.
    pub nmse_e: Option<f64>,
    pub runtime_s: f64,
    pub iterations: Option<usize>,
    pub converged: bool,
    /// Unobservable columns dropped from every factor's NMSE.
    pub excluded_columns: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub point_index: usize,
    pub point: GridPoint,
    pub run_index: usize,
    pub seed: u64,
    pub outcomes: Vec<MethodOutcome>,
    /// Methods that failed on this realization, with the error text.
    pub failures: Vec<(Method, String)>,
}

impl RunRecord {
    pub fn outcome(&self, method: Method) -> Option<&MethodOutcome> {
        self.outcomes.iter().find(|o| o.method == method)
    }
}

fn score(est: &FactorEstimates, truth: &Truth, runtime_s: f64) -> Result<MethodOutcome> {
    let n = est.columns();
    let keep: Vec<usize> = (0..n).filter(|c| !est.degenerate_columns.contains(c)).collect();
    if keep.is_empty() {
        return Err(Error::UndefinedMetric("every column is unobservable".into()));
    }
    let reduced = FactorEstimates {
        g_hat: est.g_hat.select_columns(&keep),
        h_hat: est.h_hat.select_columns(&keep),
        e_hat: est.e_hat.as_ref().map(|e| e.select_columns(&keep)),
        ..est.clone()
    };
    let reduced_truth = Truth {
        channels: crate::scenario::ChannelSet {
            g: truth.channels.g.select_columns(&keep),
            h: truth.channels.h.select_columns(&keep),
        },
        impairments: crate::scenario::ImpairmentMatrix { e: truth.impairments.e.select_columns(&keep) },
    };
    let (aligned, _) = disambiguate(&reduced, &reduced_truth)?;
    let nmse_e = match &aligned.e_hat {
        Some(e) => Some(nmse(&reduced_truth.impairments.e, e)?),
        None => None,
    };
    Ok(MethodOutcome {
        method: est.method,
        nmse_h: nmse(&reduced_truth.channels.h, &aligned.h_hat)?,
        nmse_g: nmse(&reduced_truth.channels.g, &aligned.g_hat)?,
        nmse_e,
        runtime_s,
        iterations: est.iterations,
        converged: est.converged,
        excluded_columns: n - keep.len(),
    })
}

/// Runs one method on a scenario and scores it.
pub fn run_method(method: Method, scenario: &Scenario, bals: &BalsOptions) -> Result<MethodOutcome> {
    let y = &scenario.received;
    let s = &scenario.pattern;
    let start = Instant::now();
    let est = match method {
        Method::HosvdSti => estimate_hosvd_sti(y, s),
        Method::Bals => bals_baseline(y, s, bals),
        Method::Clairvoyant => clairvoyant(y, &scenario.truth, s),
    }?;
    let runtime_s = start.elapsed().as_secs_f64();
    score(&est, &scenario.truth, runtime_s)
}

fn run_one(plan: &ExperimentPlan, point_index: usize, point: GridPoint, run_index: usize) -> RunRecord {
    let seed = child_seed(plan.master_seed, point_index, run_index);
    let mut record =
        RunRecord { point_index, point, run_index, seed, outcomes: Vec::new(), failures: Vec::new() };
    let scenario = match Scenario::generate(&point.scenario(seed), &plan.impairments(point.r_b)) {
        Ok(s) => s,
        Err(e) => {
            record.failures = plan.methods.iter().map(|&m| (m, e.to_string())).collect();
            return record;
        }
    };
    let bals = BalsOptions { max_iters: plan.bals_max_iters, tol: plan.bals_tol, seed: seed ^ 0x9e37_79b9_7f4a_7c15 };
    for &method in &plan.methods {
        match run_method(method, &scenario, &bals) {
            Ok(o) => record.outcomes.push(o),
            Err(e) => record.failures.push((method, e.to_string())),
        }
    }
    record
}

/// Executes a validated plan on `workers` threads (`0` means the rayon
/// default). Records are ordered by `(grid point, run)` regardless of
/// scheduling.
///
/// Tasks are issued run-major, cycling through the grid points, so slow
/// periods on a busy machine spread over every point instead of inflating
/// the runtime of one.
pub fn run_plan(plan: &ExperimentPlan, workers: usize) -> Result<Vec<RunRecord>> {
    plan.validate()?;
    let points = plan.grid.points();
    let tasks: Vec<(usize, GridPoint, usize)> = (0..plan.omega)
        .flat_map(|r| points.iter().enumerate().map(move |(i, pt)| (i, *pt, r)))
        .collect();
    let mut records: Vec<RunRecord> = if workers == 1 {
        tasks.into_iter().map(|(i, pt, r)| run_one(plan, i, pt, r)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Argument(format!("cannot start worker pool: {e}")))?;
        pool.install(|| tasks.into_par_iter().map(|(i, pt, r)| run_one(plan, i, pt, r)).collect())
    };
    records.sort_by_key(|r| (r.point_index, r.run_index));
    Ok(records)
}

/// Mean and standard error of the mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

impl Stat {
    pub fn from_samples(xs: &[f64]) -> Option<Self> {
        let n = xs.len();
        if n == 0 {
            return None;
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, stderr, count: n })
    }

    pub fn mean_db(&self) -> f64 {
        10.0 * self.mean.log10()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub method: Method,
    pub point_index: usize,
    pub point: GridPoint,
    /// Successful runs.
    pub omega: usize,
    pub failed_runs: usize,
    pub nmse_h: Stat,
    pub nmse_g: Stat,
    pub nmse_e: Option<Stat>,
    pub runtime_s: Stat,
    pub excluded_columns: usize,
    pub mean_iterations: Option<f64>,
}

/// Per `(grid point, method)` statistics, ordered by point then method as
/// they appear in the records.
pub fn aggregate(records: &[RunRecord]) -> Result<Vec<AggregateRow>> {
    if records.is_empty() {
        return Err(Error::Aggregation("no records".into()));
    }
    let mut keys: Vec<(usize, Method)> = Vec::new();
    for r in records {
        for m in r.outcomes.iter().map(|o| o.method).chain(r.failures.iter().map(|f| f.0)) {
            if !keys.contains(&(r.point_index, m)) {
                keys.push((r.point_index, m));
            }
        }
    }
    keys.sort();
    let mut rows = Vec::with_capacity(keys.len());
    for (pi, method) in keys {
        let group: Vec<&RunRecord> = records.iter().filter(|r| r.point_index == pi).collect();
        let outcomes: Vec<&MethodOutcome> = group.iter().filter_map(|r| r.outcome(method)).collect();
        let failed_runs = group.iter().filter(|r| r.failures.iter().any(|f| f.0 == method)).count();
        let stat = |f: &dyn Fn(&MethodOutcome) -> Option<f64>| {
            let xs: Vec<f64> = outcomes.iter().filter_map(|o| f(o)).collect();
            Stat::from_samples(&xs)
        };
        let empty = || Error::Aggregation(format!("no successful {method} runs at grid point {pi}"));
        let iters: Vec<f64> = outcomes.iter().filter_map(|o| o.iterations.map(|i| i as f64)).collect();
        rows.push(AggregateRow {
            method,
            point_index: pi,
            point: group[0].point,
            omega: outcomes.len(),
            failed_runs,
            nmse_h: stat(&|o| Some(o.nmse_h)).ok_or_else(empty)?,
            nmse_g: stat(&|o| Some(o.nmse_g)).ok_or_else(empty)?,
            nmse_e: stat(&|o| o.nmse_e),
            runtime_s: stat(&|o| Some(o.runtime_s)).ok_or_else(empty)?,
            excluded_columns: outcomes.iter().map(|o| o.excluded_columns).sum(),
            mean_iterations: (!iters.is_empty()).then(|| iters.iter().sum::<f64>() / iters.len() as f64),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nmse_literals() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(nmse(&i2, &i2).unwrap(), 0.0);
        assert_eq!(nmse(&i2, &ComplexMatrix::zeros(2, 2)).unwrap(), 1.0);
        let d = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]).unwrap();
        assert!((nmse(&i2, &d).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(nmse(&ComplexMatrix::zeros(2, 2), &i2), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn child_seeds_are_stable_and_distinct() {
        assert_eq!(child_seed(7, 1, 2), child_seed(7, 1, 2));
        let seeds: std::collections::HashSet<u64> = (0..100).map(|r| child_seed(7, 0, r)).collect();
        assert_eq!(seeds.len(), 100);
        assert_ne!(child_seed(7, 0, 1), child_seed(7, 1, 0));
    }

    #[test]
    fn stat_of_single_and_pair() {
        let s = Stat::from_samples(&[0.25]).unwrap();
        assert_eq!((s.mean, s.stderr), (0.25, 0.0));
        let s = Stat::from_samples(&[0.1, 0.3]).unwrap();
        assert!((s.mean - 0.2).abs() < 1e-15);
        assert!(Stat::from_samples(&[]).is_none());
    }

    #[test]
    fn aggregate_rejects_empty() {
        assert!(matches!(aggregate(&[]), Err(Error::Aggregation(_))));
    }

    #[test]
    fn k_equals_n_grid() {
        let grid = ScenarioGrid { n: vec![4, 8], k: vec![], k_equals_n: true, ..Default::default() };
        let pts = grid.points();
        assert_eq!(pts.len(), 2);
        assert!(pts.iter().all(|p| p.k == p.n));
    }

    #[test]
    fn plan_with_fewer_blocks_than_elements_is_invalid() {
        let plan = ExperimentPlan {
            grid: ScenarioGrid { n: vec![8], k: vec![4], ..Default::default() },
            ..Default::default()
        };
        assert!(matches!(plan.validate(), Err(Error::Identifiability(_))));
    }
}
