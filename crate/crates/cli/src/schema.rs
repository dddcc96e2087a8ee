//! Text printed by the `schema` subcommand.

use std::fmt::Write as _;

use quadsar_core::Config;

use crate::config_io::leaf_values;
use crate::output::{
    ATTITUDE_COLUMNS, ATTITUDE_FILE, DETECTIONS_FILE, DETECTION_FIELDS, MANIFEST_FILE, METRICS_FILE,
};
use crate::runner::{SWEEP_COLUMNS, SWEEP_FILE};

const METRICS_FIELDS: [(&str, &str); 12] = [
    (
        "recall_applicable",
        "bool, false when the scenario has no victims",
    ),
    ("recall", "matched / victims, null when not applicable"),
    ("matched", "victims matched to a detection"),
    (
        "false_positives",
        "logged detections not matched to a new victim",
    ),
    ("total_detections", "logged detections"),
    ("mean_localization_error", "m, null when nothing matched"),
    ("time_to_first_detection", "per victim, s or null"),
    ("ticks", "simulation ticks executed"),
    ("frames", "detector frames processed"),
    ("sim_time", "s"),
    ("plan_complete", "bool, every waypoint reached"),
    (
        "roll_rms_filtered, roll_rms_accel",
        "rad, RMS error against true roll",
    ),
];

pub fn render() -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# config (JSON; every key optional, unknown keys rejected)"
    );
    for (path, value) in leaf_values(&Config::default()) {
        let _ = writeln!(s, "{path} = {value}");
    }
    let _ = writeln!(
        s,
        "\n# {ATTITUDE_FILE} (angles rad, altitudes m, time s; empty echo_altitude = out of range)"
    );
    let _ = writeln!(s, "{}", ATTITUDE_COLUMNS.join(","));
    let _ = writeln!(s, "\n# {DETECTIONS_FILE} (one JSON object per line)");
    let _ = writeln!(s, "{}", DETECTION_FIELDS.join(","));
    let _ = writeln!(s, "  pose: x,y,z,roll,pitch,yaw");
    let _ = writeln!(s, "  box: c_x,c_y,w,h (normalized image coordinates)");
    let _ = writeln!(s, "  geo: x,y ground point, or null");
    let _ = writeln!(s, "\n# {METRICS_FILE}");
    for (k, v) in METRICS_FIELDS {
        let _ = writeln!(s, "{k}: {v}");
    }
    let _ = writeln!(s, "\n# {MANIFEST_FILE}");
    let _ = writeln!(s, "tool,version,seed,overrides,outputs,config");
    let _ = writeln!(s, "\n# {SWEEP_FILE}");
    let _ = writeln!(s, "{}", SWEEP_COLUMNS.join(","));
    s
}
