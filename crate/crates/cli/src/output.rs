//! On-disk formats: the attitude CSV, the JSON-lines detection log, the
//! metrics summary and the run manifest.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use quadsar_core::mission::{LogEntry, MissionLog, MissionMetrics};
use quadsar_core::{Config, TickRecord};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ATTITUDE_FILE: &str = "attitude.csv";
pub const DETECTIONS_FILE: &str = "detections.jsonl";
pub const METRICS_FILE: &str = "metrics.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Attitude CSV header. Angles in rad, altitudes in m, time in s.
/// `echo_altitude` is empty while the ultrasonic echo is out of range.
pub const ATTITUDE_COLUMNS: [&str; 11] = [
    "time",
    "true_roll",
    "true_pitch",
    "filtered_roll",
    "filtered_pitch",
    "accel_roll",
    "accel_pitch",
    "gyro_roll",
    "gyro_pitch",
    "echo_altitude",
    "true_altitude",
];

/// Fields of one detection-log line, in serialization order.
pub const DETECTION_FIELDS: [&str; 5] = ["time", "pose", "box", "conf", "geo"];

/// Floats are written in Rust's shortest round-trip form.
pub fn attitude_row(r: &TickRecord) -> String {
    let mut s = String::with_capacity(200);
    let echo = r.echo_altitude.map(|a| a.to_string()).unwrap_or_default();
    let _ = write!(
        s,
        "{},{},{},{},{},{},{},{},{},{},{}",
        r.time,
        r.truth.roll,
        r.truth.pitch,
        r.estimate.roll,
        r.estimate.pitch,
        r.accel.roll,
        r.accel.pitch,
        r.gyro_only_roll,
        r.gyro_only_pitch,
        echo,
        r.altitude,
    );
    s
}

pub struct AttitudeWriter {
    out: BufWriter<File>,
    path: PathBuf,
}

impl AttitudeWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = Self {
            out: BufWriter::new(file),
            path: path.to_path_buf(),
        };
        w.line(&ATTITUDE_COLUMNS.join(","))?;
        Ok(w)
    }

    fn line(&mut self, s: &str) -> Result<()> {
        writeln!(self.out, "{s}").map_err(|e| Error::io(&self.path, e))
    }

    pub fn record(&mut self, r: &TickRecord) -> Result<()> {
        let row = attitude_row(r);
        self.line(&row)
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

pub fn write_detection_log(path: &Path, log: &MissionLog) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for entry in &log.entries {
        let line = serde_json::to_string(entry).expect("log entry serializes");
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_detection_log(path: &Path) -> Result<MissionLog> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut entries = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: LogEntry = serde_json::from_str(&line).map_err(|e| Error::LogRecord {
            path: path.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        entries.push(entry);
    }
    Ok(MissionLog { entries })
}

/// Mission metrics plus run bookkeeping, as written to `metrics.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// False when the scenario has no victims; `recall` is then null.
    pub recall_applicable: bool,
    #[serde(flatten)]
    pub metrics: MissionMetrics,
    pub ticks: u64,
    pub frames: u64,
    pub sim_time: f64,
    pub plan_complete: bool,
    /// RMS of (filtered - true) roll over the run, rad.
    pub roll_rms_filtered: f64,
    /// RMS of (accelerometer - true) roll over the run, rad.
    pub roll_rms_accel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub overrides: Vec<String>,
    pub outputs: Vec<String>,
    /// Fully resolved configuration the run used.
    pub config: Config,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
