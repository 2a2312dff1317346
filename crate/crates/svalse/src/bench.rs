//! Monte Carlo comparison of the sequential and per-step estimators.

use std::collections::BTreeMap;

use rayon::prelude::*;

use svalse_core::metrics::{score_step, GospaBreakdown, MetricConfig};
use svalse_core::tracker::{run_independent, run_sequence};
use svalse_core::{ArrayGeometry, EstimatorConfig, Snapshot, TrackRecord};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::io::{MetricRow, Method, SummaryRow};
use crate::simkit::{build_truth, derive_seed, synthesize, SourceSpec, Truth};

pub fn estimate(method: Method, snapshots: &[Snapshot], geom: &ArrayGeometry, cfg: &EstimatorConfig) -> Result<Vec<TrackRecord>> {
    let records = match method {
        Method::Svalse => run_sequence(snapshots, geom, cfg)?,
        Method::Valse => run_independent(snapshots, geom, cfg)?,
    };
    Ok(records)
}

/// One metric row per time step of `truth`.
pub fn score_run(
    truth: &Truth,
    records: &[TrackRecord],
    run: usize,
    method: Method,
    snr_db: f64,
    mc: &MetricConfig,
) -> Vec<MetricRow> {
    (1..=truth.t_max())
        .map(|t| {
            let want = truth.doas_at(t);
            let est: Vec<f64> = records.iter().filter(|r| r.t == t).map(|r| r.doa_deg).collect();
            let m = score_step(&want, &est, mc);
            MetricRow { run, method, snr_db, t, gospa: m.gospa, rmse: m.rmse, n_true: want.len(), n_est: est.len() }
        })
        .collect()
}

#[derive(Clone, Copy, Debug)]
struct Job {
    snr_index: usize,
    snr_db: f64,
    run: usize,
}

struct Setup {
    geom: ArrayGeometry,
    est: EstimatorConfig,
    mc: MetricConfig,
    specs: Vec<SourceSpec>,
    t_max: usize,
    seed: u64,
}

fn run_job(setup: &Setup, job: Job) -> Result<Vec<MetricRow>> {
    let seed = derive_seed(setup.seed, job.run, job.snr_index);
    let truth = build_truth(&setup.specs, setup.t_max, seed)?;
    let syn = synthesize(&truth, &setup.geom, job.snr_db, seed)?;
    let mut rows = Vec::with_capacity(2 * setup.t_max);
    for method in [Method::Svalse, Method::Valse] {
        let records = estimate(method, &syn.snapshots, &setup.geom, &setup.est)?;
        rows.extend(score_run(&truth, &records, job.run, method, job.snr_db, &setup.mc));
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkOutput {
    /// Sorted by (snr order in the config, run, method, t).
    pub metrics: Vec<MetricRow>,
    /// One row per (method, snr), in config snr order.
    pub summary: Vec<SummaryRow>,
}

/// Runs every (snr, run) pair on a pool of `threads` workers (0 picks the
/// rayon default). Output does not depend on the thread count.
pub fn run_benchmark(cfg: &RunConfig, threads: usize) -> Result<BenchmarkOutput> {
    cfg.validate()?;
    let setup = Setup {
        geom: cfg.array()?,
        est: cfg.estimator_config()?,
        mc: cfg.metric_config()?,
        specs: cfg.sources()?,
        t_max: cfg.scenario.t_max,
        seed: cfg.seed,
    };
    let jobs: Vec<Job> = cfg
        .benchmark
        .snr_db
        .iter()
        .enumerate()
        .flat_map(|(snr_index, &snr_db)| (0..cfg.benchmark.n_runs).map(move |run| Job { snr_index, snr_db, run }))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    let per_job: Vec<Vec<MetricRow>> = pool.install(|| jobs.par_iter().map(|&job| run_job(&setup, job)).collect::<Result<_>>())?;

    let mut keyed: Vec<((usize, usize, Method, usize), MetricRow)> = jobs
        .iter()
        .zip(per_job)
        .flat_map(|(job, rows)| rows.into_iter().map(move |r| ((job.snr_index, r.run, r.method, r.t), r)))
        .collect();
    keyed.sort_by_key(|(k, _)| *k);
    let metrics: Vec<MetricRow> = keyed.into_iter().map(|(_, r)| r).collect();
    let summary = summarize(&metrics, &cfg.benchmark.snr_db);
    Ok(BenchmarkOutput { metrics, summary })
}

/// Means of the per-step rows for each (method, snr). RMSE is averaged over
/// the rows that have one.
pub fn summarize(rows: &[MetricRow], snrs: &[f64]) -> Vec<SummaryRow> {
    let mut out = Vec::new();
    for &snr in snrs {
        for method in [Method::Svalse, Method::Valse] {
            let sel: Vec<&MetricRow> = rows.iter().filter(|r| r.method == method && r.snr_db == snr).collect();
            if sel.is_empty() {
                continue;
            }
            let n = sel.len() as f64;
            let mean = |f: fn(&GospaBreakdown) -> f64| sel.iter().map(|r| f(&r.gospa)).sum::<f64>() / n;
            let rmses: Vec<f64> = sel.iter().filter_map(|r| r.rmse).collect();
            out.push(SummaryRow {
                method,
                snr_db: snr,
                n_rows: sel.len(),
                gospa: GospaBreakdown {
                    total: mean(|g| g.total),
                    dist: mean(|g| g.dist),
                    miss: mean(|g| g.miss),
                    false_: mean(|g| g.false_),
                },
                rmse: (!rmses.is_empty()).then(|| rmses.iter().sum::<f64>() / rmses.len() as f64),
                n_rmse: rmses.len(),
            });
        }
    }
    out
}

/// Mean GOSPA per time step over runs, for one method and snr.
pub fn gospa_by_time(rows: &[MetricRow], method: Method, snr_db: f64) -> Vec<(f64, f64)> {
    let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.method == method && r.snr_db == snr_db) {
        let e = acc.entry(r.t).or_insert((0.0, 0));
        e.0 += r.gospa.total;
        e.1 += 1;
    }
    acc.into_iter().map(|(t, (s, n))| (t as f64, s / n as f64)).collect()
}

/// Per-run mean GOSPA over time steps, indexed by run.
pub fn run_means(rows: &[MetricRow], method: Method, snr_db: f64) -> Vec<f64> {
    let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.method == method && r.snr_db == snr_db) {
        let e = acc.entry(r.run).or_insert((0.0, 0));
        e.0 += r.gospa.total;
        e.1 += 1;
    }
    acc.into_values().map(|(s, n)| s / n as f64).collect()
}
