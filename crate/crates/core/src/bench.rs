//! Query-count benchmarks and log-log scaling fits.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::certify::{exact_opt_metric, line_opt_instance, report_level_mis_sizes, LevelFrame};
use crate::error::{Error, Result};
use crate::gen::gen_gnp;
use crate::instance::MetricInstance;
use crate::mis::{alg_mul, rgmis_exact, MisConfig};
use crate::oracle::CountingAdjacencyOracle;
use crate::rng::derive_seed;
use crate::steiner::{estimate_sf, LevelReport, SfConfig};

/// Largest graph whose exact RGMIS size is recomputed for reference.
pub const EXACT_MIS_LIMIT: usize = 2000;

/// Largest instance whose exact per-level MIS sum is recomputed.
pub const EXACT_LEVEL_LIMIT: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub k_or_p: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub estimate: f64,
    pub exact_reference: Option<f64>,
    pub queries: u64,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MisBenchSpec {
    pub sizes: Vec<usize>,
    pub p: f64,
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
    pub cache: bool,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::input(format!("cannot start {workers} workers: {e}")))
}

/// One trial per (size, trial index): a fresh `G(n, p)` and one [`alg_mul`]
/// run. Rows come back in spec order whatever the worker count.
pub fn run_mis_bench(spec: &MisBenchSpec, workers: usize) -> Result<Vec<BenchRow>> {
    let config = MisConfig::new(spec.epsilon)?.with_cache(spec.cache);
    let tasks: Vec<(usize, usize, usize)> = spec
        .sizes
        .iter()
        .enumerate()
        .flat_map(|(i, &n)| (0..spec.trials).map(move |t| (i, n, t)))
        .collect();
    pool(workers)?.install(|| {
        tasks
            .par_iter()
            .map(|&(i, n, t)| {
                let trial_seed = derive_seed(spec.seed, ((i as u64) << 32) | t as u64);
                let graph = gen_gnp(n, spec.p, derive_seed(trial_seed, 1))?;
                let adj = CountingAdjacencyOracle::explicit(&graph);
                let started = Instant::now();
                let est = alg_mul(&adj, &config, trial_seed)?;
                let wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
                let exact_reference = match n <= EXACT_MIS_LIMIT {
                    true => Some(rgmis_exact(&graph, &est.permutation)?.len() as f64),
                    false => None,
                };
                Ok(BenchRow {
                    n,
                    k_or_p: spec.p,
                    epsilon: spec.epsilon,
                    seed: trial_seed,
                    estimate: est.value,
                    exact_reference,
                    queries: adj.query_count(),
                    wall_time_ms,
                })
            })
            .collect()
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SfBenchRow {
    pub instance: String,
    pub n: usize,
    pub k: usize,
    pub k_eff: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub sol_scaled: f64,
    pub sol_original: f64,
    /// `sum_i M_i tau_i` with exact MIS sizes under the estimator's permutations.
    pub exact_level_sum: Option<f64>,
    /// Optimum over the kept pairs in working units, when available.
    pub opt_scaled: Option<f64>,
    pub queries: u64,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SfBenchRecord {
    pub row: SfBenchRow,
    pub levels: Vec<LevelReport>,
}

/// Runs the estimator `trials` times on every named instance.
pub fn run_sf_bench(
    instances: &[(String, MetricInstance)],
    epsilon: f64,
    trials: usize,
    seed: u64,
    cache: bool,
    workers: usize,
) -> Result<Vec<SfBenchRecord>> {
    let frames = instances
        .iter()
        .map(|(_, inst)| match inst.n() <= EXACT_LEVEL_LIMIT {
            true => LevelFrame::working(inst).map(Some),
            false => Ok(None),
        })
        .collect::<Result<Vec<_>>>()?;
    let opts: Vec<Option<f64>> = instances
        .iter()
        .zip(&frames)
        .map(|((_, inst), frame)| reference_opt(inst, frame.as_ref()))
        .collect::<Result<_>>()?;
    let tasks: Vec<(usize, usize)> = (0..instances.len())
        .flat_map(|i| (0..trials).map(move |t| (i, t)))
        .collect();
    pool(workers)?.install(|| {
        tasks
            .par_iter()
            .map(|&(i, t)| {
                let (name, inst) = &instances[i];
                let trial_seed = derive_seed(seed, ((i as u64) << 32) | t as u64);
                let started = Instant::now();
                let report =
                    estimate_sf(inst, &SfConfig::new(epsilon, trial_seed).with_cache(cache))?;
                let wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
                let exact_level_sum = match &frames[i] {
                    Some(frame) => {
                        let sizes = report_level_mis_sizes(frame, &report)?;
                        Some(
                            sizes
                                .iter()
                                .zip(&report.levels)
                                .fold(0.0, |acc, (&m, l)| acc + m as f64 * l.tau),
                        )
                    }
                    None => None,
                };
                Ok(SfBenchRecord {
                    row: SfBenchRow {
                        instance: name.clone(),
                        n: inst.n(),
                        k: inst.k(),
                        k_eff: report.k_eff,
                        epsilon,
                        seed: trial_seed,
                        sol_scaled: report.sol_scaled,
                        sol_original: report.sol_original,
                        exact_level_sum,
                        opt_scaled: opts[i],
                        queries: report.total_queries,
                        wall_time_ms,
                    },
                    levels: report.levels,
                })
            })
            .collect()
    })
}

/// Kept-pair optimum in working units: analytic on a line, exact when small.
fn reference_opt(instance: &MetricInstance, frame: Option<&LevelFrame>) -> Result<Option<f64>> {
    let Some(frame) = frame else { return Ok(None) };
    if frame.pairs.is_empty() {
        return Ok(Some(0.0));
    }
    let kept = instance.with_pairs(frame.pairs.clone())?;
    if let Some(opt) = line_opt_instance(&kept) {
        return Ok(Some(frame.scale.apply(opt)));
    }
    match exact_opt_metric(&frame.metric, &frame.pairs) {
        Ok(opt) => Ok(Some(opt)),
        Err(Error::TooLarge(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Mean of `value` grouped by `n`, in increasing `n`.
pub fn mean_by_n<T>(
    rows: &[T],
    n: impl Fn(&T) -> usize,
    value: impl Fn(&T) -> f64,
) -> Vec<(f64, f64)> {
    let mut groups: std::collections::BTreeMap<usize, (f64, usize)> = Default::default();
    for r in rows {
        let g = groups.entry(n(r)).or_default();
        g.0 += value(r);
        g.1 += 1;
    }
    groups
        .into_iter()
        .map(|(n, (s, c))| (n as f64, s / c as f64))
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_scaling_exponent(points: &[(f64, f64)]) -> Result<f64> {
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::input(format!("point ({x}, {y}) is not positive")));
    }
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 3 {
        return Err(Error::input(format!(
            "need 3 distinct sizes, got {}",
            xs.len()
        )));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

/// Two whitespace-separated columns, one point per line, for gnuplot.
pub fn gnuplot_columns(points: &[(f64, f64)]) -> String {
    points.iter().map(|(x, y)| format!("{x} {y}\n")).collect()
}
