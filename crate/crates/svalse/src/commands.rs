//! The `simulate`, `estimate` and `benchmark` commands.

use std::fs;
use std::path::{Path, PathBuf};

use svalse_core::TrackRecord;

use crate::bench::{estimate, gospa_by_time, run_benchmark, BenchmarkOutput};
use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::io::{self, Method, TrackRow};
use crate::plot::{doa_time_chart, line_chart, Series};
use crate::simkit::{build_truth, cbf, synthesize};

pub const SNAPSHOTS_FILE: &str = "snapshots.csv";
pub const TRUTH_FILE: &str = "truth.csv";
pub const TRACKS_FILE: &str = "tracks.csv";
pub const DOA_PLOT_FILE: &str = "doa.svg";
pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.csv";

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Writes the snapshot and truth files for the configured scenario.
pub fn cmd_simulate(cfg: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let geom = cfg.array()?;
    let truth = build_truth(&cfg.sources()?, cfg.scenario.t_max, cfg.seed)?;
    let syn = synthesize(&truth, &geom, cfg.scenario.snr_db, cfg.seed)?;
    ensure_dir(out_dir)?;
    let snap_path = out_dir.join(SNAPSHOTS_FILE);
    let truth_path = out_dir.join(TRUTH_FILE);
    io::write_file(&snap_path, |w| io::write_snapshots(w, &syn.snapshots))?;
    let entries: Vec<_> = truth.entries().copied().collect();
    io::write_file(&truth_path, |w| io::write_truth(w, &entries))?;
    Ok(vec![snap_path, truth_path])
}

#[derive(Clone, Debug)]
pub struct EstimateOptions {
    pub snapshots: PathBuf,
    pub sequential: bool,
    /// Truth file drawn into the DOA plot.
    pub truth: Option<PathBuf>,
    pub plot: bool,
}

/// Runs the estimator over a snapshot file and writes the track table
/// (and optionally a DOA-vs-time plot).
pub fn cmd_estimate(cfg: &RunConfig, opts: &EstimateOptions, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let geom = cfg.array()?;
    let est = cfg.estimator_config()?;
    let snapshots = io::parse_snapshots(&opts.snapshots)?;
    let m = snapshots[0].y.len();
    if m != geom.m_sensors() {
        return Err(CliError::data(format!(
            "{}: file has {m} sensors, geometry has {}",
            opts.snapshots.display(),
            geom.m_sensors()
        )));
    }
    let method = if opts.sequential { Method::Svalse } else { Method::Valse };
    let records = estimate(method, &snapshots, &geom, &est)?;
    ensure_dir(out_dir)?;
    let tracks_path = out_dir.join(TRACKS_FILE);
    let rows: Vec<TrackRow> = records.iter().map(|r| TrackRow { run: 0, record: *r }).collect();
    io::write_file(&tracks_path, |w| io::write_tracks(w, &rows))?;
    let mut written = vec![tracks_path];

    if opts.plot {
        let truth = match &opts.truth {
            Some(p) => {
                let f = fs::File::open(p).map_err(|e| CliError::io(p, e))?;
                io::read_truth(f, &p.display().to_string())?.iter().map(|e| (e.t, e.doa_deg)).collect()
            }
            None => Vec::new(),
        };
        let grid: Vec<f64> = (0..=180).map(|i| -90.0 + i as f64).collect();
        let spectra = snapshots.iter().map(|s| cbf(&geom, &s.y, &grid)).collect::<Result<Vec<_>>>()?;
        let steps: Vec<usize> = snapshots.iter().map(|s| s.t).collect();
        let points: Vec<(usize, f64)> = records.iter().map(|r: &TrackRecord| (r.t, r.doa_deg)).collect();
        let title = format!("{} DOA estimates", method.as_str().to_uppercase());
        let svg = doa_time_chart(&title, &steps, &grid, &spectra, &points, &truth);
        let path = out_dir.join(DOA_PLOT_FILE);
        write_text(&path, &svg)?;
        written.push(path);
    }
    Ok(written)
}

fn snr_tag(snr: f64) -> String {
    io::fmt_f64(snr).replace('-', "m").replace('.', "p")
}

/// Writes metrics, summary and plots of a Monte Carlo run.
pub fn cmd_benchmark(cfg: &RunConfig, threads: usize, out_dir: &Path) -> Result<(BenchmarkOutput, Vec<PathBuf>)> {
    let out = run_benchmark(cfg, threads)?;
    ensure_dir(out_dir)?;
    let mut written = Vec::new();

    let metrics_path = out_dir.join(METRICS_FILE);
    io::write_file(&metrics_path, |w| io::write_metrics(w, &out.metrics))?;
    written.push(metrics_path);
    let summary_path = out_dir.join(SUMMARY_FILE);
    io::write_file(&summary_path, |w| io::write_summary(w, &out.summary))?;
    written.push(summary_path);

    let methods = [Method::Svalse, Method::Valse];
    let vs_snr = |f: &dyn Fn(&io::SummaryRow) -> Option<f64>, method: Method| -> Vec<(f64, f64)> {
        out.summary.iter().filter(|r| r.method == method).filter_map(|r| f(r).map(|v| (r.snr_db, v))).collect()
    };
    let mut plots: Vec<(String, String)> = Vec::new();
    let total: Vec<Series> =
        methods.iter().map(|&m| Series::new(m.as_str(), vs_snr(&|r| Some(r.gospa.total), m))).collect();
    plots.push(("gospa_vs_snr.svg".into(), line_chart("Mean GOSPA", "SNR (dB)", "GOSPA (deg)", &total)));
    let mut parts = Vec::new();
    for &m in &methods {
        parts.push(Series::new(format!("{m} dist"), vs_snr(&|r| Some(r.gospa.dist), m)));
        parts.push(Series::new(format!("{m} miss"), vs_snr(&|r| Some(r.gospa.miss), m)));
        parts.push(Series::new(format!("{m} false"), vs_snr(&|r| Some(r.gospa.false_), m)));
    }
    plots.push(("gospa_parts_vs_snr.svg".into(), line_chart("GOSPA decomposition", "SNR (dB)", "GOSPA (deg)", &parts)));
    let rmse: Vec<Series> = methods.iter().map(|&m| Series::new(m.as_str(), vs_snr(&|r| r.rmse, m))).collect();
    plots.push(("rmse_vs_snr.svg".into(), line_chart("Mean RMSE", "SNR (dB)", "RMSE (deg)", &rmse)));
    for &snr in &cfg.benchmark.snr_db {
        let series: Vec<Series> =
            methods.iter().map(|&m| Series::new(m.as_str(), gospa_by_time(&out.metrics, m, snr))).collect();
        let title = format!("GOSPA per time step at {} dB", io::fmt_f64(snr));
        plots.push((format!("gospa_vs_time_{}.svg", snr_tag(snr)), line_chart(&title, "time step", "GOSPA (deg)", &series)));
    }
    for (name, svg) in plots {
        let path = out_dir.join(name);
        write_text(&path, &svg)?;
        written.push(path);
    }
    Ok((out, written))
}
