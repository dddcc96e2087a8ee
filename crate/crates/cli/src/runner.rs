//! The `run`, `sweep` and `eval` subcommands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use quadsar_core::mission::{evaluate_mission, MissionMetrics};
use quadsar_core::rng::{RngStream, Subsystem};
use quadsar_core::{Config, Simulation, TickRecord};
use rayon::prelude::*;

use crate::config_io::{apply_overrides, leaf_paths, load_config, parse_override, set_path};
use crate::error::{Error, Result};
use crate::output::{
    read_detection_log, write_detection_log, write_json, AttitudeWriter, Manifest, MetricsReport,
    ATTITUDE_FILE, DETECTIONS_FILE, MANIFEST_FILE, METRICS_FILE,
};

pub const SWEEP_FILE: &str = "sweep.csv";

pub const SWEEP_COLUMNS: [&str; 9] = [
    "value",
    "seed",
    "recall",
    "matched",
    "false_positives",
    "total_detections",
    "mean_localization_error",
    "roll_rms_filtered",
    "roll_rms_accel",
];

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    /// Config file; defaults are used when absent.
    pub config: Option<PathBuf>,
    /// Replaces `sim.seed` when set.
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    /// Raw `KEY=VALUE` strings, applied in order.
    pub overrides: Vec<String>,
}

impl RunConfig {
    /// Loads the config file, applies overrides and the seed, and validates.
    pub fn resolve(&self) -> Result<Config> {
        let base = match &self.config {
            Some(path) => load_config(path)?,
            None => Config::default(),
        };
        let pairs = self
            .overrides
            .iter()
            .map(|o| parse_override(o))
            .collect::<Result<Vec<_>>>()?;
        let mut config = apply_overrides(base, &pairs)?;
        if let Some(seed) = self.seed {
            config.sim.seed = seed;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Default)]
struct RmsAccumulator {
    filtered: f64,
    accel: f64,
    n: u64,
}

impl RmsAccumulator {
    fn add(&mut self, r: &TickRecord) {
        self.filtered += (r.estimate.roll - r.truth.roll).powi(2);
        self.accel += (r.accel.roll - r.truth.roll).powi(2);
        self.n += 1;
    }

    fn finish(&self) -> (f64, f64) {
        if self.n == 0 {
            return (0.0, 0.0);
        }
        let n = self.n as f64;
        ((self.filtered / n).sqrt(), (self.accel / n).sqrt())
    }
}

/// Runs one simulation to completion, calling `sink` on every tick.
fn simulate(
    config: Config,
    mut sink: impl FnMut(&TickRecord) -> Result<()>,
) -> Result<(Simulation, MetricsReport)> {
    let mut sim = Simulation::new(config)?;
    let mut rms = RmsAccumulator::default();
    while !sim.is_done() {
        let rec = sim.step()?;
        rms.add(&rec);
        sink(&rec)?;
    }
    let (roll_rms_filtered, roll_rms_accel) = rms.finish();
    let metrics = sim.metrics();
    let world = sim.world();
    let report = MetricsReport {
        recall_applicable: metrics.recall.is_some(),
        metrics,
        ticks: world.tick,
        frames: world.frames,
        sim_time: world.time,
        plan_complete: sim.guidance().is_some_and(|g| g.finished()),
        roll_rms_filtered,
        roll_rms_accel,
    };
    Ok((sim, report))
}

/// Runs a scenario and writes the attitude CSV, detection log, metrics and
/// manifest into `out_dir`.
pub fn run(rc: &RunConfig) -> Result<MetricsReport> {
    let config = rc.resolve()?;
    fs::create_dir_all(&rc.out_dir).map_err(|e| Error::io(&rc.out_dir, e))?;
    let out = |name: &str| rc.out_dir.join(name);

    let mut csv = AttitudeWriter::create(&out(ATTITUDE_FILE))?;
    let (sim, report) = simulate(config.clone(), |r| csv.record(r))?;
    csv.finish()?;
    write_detection_log(&out(DETECTIONS_FILE), sim.log())?;
    write_json(&out(METRICS_FILE), &report)?;

    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.sim.seed,
        overrides: rc.overrides.clone(),
        outputs: [ATTITUDE_FILE, DETECTIONS_FILE, METRICS_FILE]
            .map(String::from)
            .to_vec(),
        config,
    };
    write_json(&out(MANIFEST_FILE), &manifest)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: String,
    pub seed: u64,
    pub report: MetricsReport,
}

/// Per-value seeds drawn from the master seed's sweep stream.
pub fn sweep_seeds(master: u64, n: usize) -> Vec<u64> {
    let mut rng = RngStream::fork(master, Subsystem::Sweep);
    (0..n).map(|_| rng.next_u64()).collect()
}

/// Runs one simulation per value of `param`. Rows come back in input order.
pub fn sweep(base: &Config, param: &str, values: &[String]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::EmptySweep);
    }
    if !leaf_paths(base).iter().any(|p| p == param) {
        return Err(Error::UnknownPath {
            path: param.to_string(),
            valid: leaf_paths(base),
        });
    }
    let seeds = sweep_seeds(base.sim.seed, values.len());
    let configs = values
        .iter()
        .zip(&seeds)
        .map(|(v, &seed)| {
            let mut c = set_path(base, param, v)?;
            c.sim.seed = seed;
            c.validate()?;
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    configs
        .into_par_iter()
        .zip(values.par_iter())
        .map(|(c, v)| {
            let seed = c.sim.seed;
            let (_, report) = simulate(c, |_| Ok(()))?;
            Ok(SweepRow {
                value: v.clone(),
                seed,
                report,
            })
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn sweep_table(rows: &[SweepRow]) -> String {
    let mut s = SWEEP_COLUMNS.join(",");
    s.push('\n');
    for r in rows {
        let m = &r.report.metrics;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            csv_field(&r.value),
            r.seed,
            opt(m.recall),
            m.matched,
            m.false_positives,
            m.total_detections,
            opt(m.mean_localization_error),
            r.report.roll_rms_filtered,
            r.report.roll_rms_accel,
        );
    }
    s
}

fn csv_field(v: &str) -> String {
    if v.contains([',', '"', '\n']) {
        format!("\"{}\"", v.replace('"', "\"\""))
    } else {
        v.to_string()
    }
}

/// Resolves the config, runs the sweep and writes `sweep.csv`.
pub fn run_sweep(rc: &RunConfig, param: &str, values: &[String]) -> Result<String> {
    let config = rc.resolve()?;
    let rows = sweep(&config, param, values)?;
    let table = sweep_table(&rows);
    fs::create_dir_all(&rc.out_dir).map_err(|e| Error::io(&rc.out_dir, e))?;
    let path = rc.out_dir.join(SWEEP_FILE);
    fs::write(&path, &table).map_err(|e| Error::io(&path, e))?;
    Ok(table)
}

/// Re-scores an existing detection log against the config's scenario.
pub fn eval(rc: &RunConfig, log_path: &Path, assoc_radius: Option<f64>) -> Result<MissionMetrics> {
    let config = rc.resolve()?;
    let log = read_detection_log(log_path)?;
    let radius = assoc_radius.unwrap_or(config.mission.assoc_radius);
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::Config("association radius must be > 0".into()));
    }
    Ok(evaluate_mission(&log, &config.scenario, radius))
}
