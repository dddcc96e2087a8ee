//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

#![allow(clippy::needless_range_loop)]

use std::f64::consts::PI;
use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use quadsar::runner::{run, RunConfig};
use quadsar_core::control::{pid_update, Integration, PidGains, PidState};
use quadsar_core::detection::anchors::default_pyramid;
use quadsar_core::detection::{
    generate_anchors, match_anchors, nms, project_victim, simulate_detection, AnchorLabel, BBox,
    CameraModel, Detection, DetectorModel, FeatureMapSpec, VisibleTarget,
};
use quadsar_core::dynamics::{Attitude, QuadState};
use quadsar_core::estimation::{accel_angles, complementary_blend};
use quadsar_core::geom::Vec3;
use quadsar_core::mission::{geolocate, Pattern};
use quadsar_core::rng::RngStream;
use quadsar_core::sensors::{sample_accel, AccelModel};
use quadsar_core::{Config, Simulation, TickRecord};

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = fn() -> Outcome;

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn hover_records(config: Config) -> Vec<TickRecord> {
    let mut sim = Simulation::new(config).expect("valid config");
    let mut records = Vec::new();
    sim.run(|r| records.push(r.clone()))
        .expect("simulation runs");
    records
}

fn rms(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    (sum / n as f64).sqrt()
}

fn fixed_point() -> Outcome {
    let start = Instant::now();
    let (alpha, dt, bias) = (0.98, 0.01, 0.01);
    let target = alpha * bias * dt / (1.0 - alpha);
    let mut angle = 0.0;
    let mut iterations = None;
    for i in 1..=2000 {
        angle = complementary_blend(angle, bias, 0.0, true, alpha, dt);
        if (angle - 0.0049).abs() < 1e-6 {
            iterations = Some(i);
            break;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        iterations.is_some() && (target - 0.0049).abs() < 1e-15 && within(elapsed, 1.0),
        format!("estimate {angle:.9} after {iterations:?} iterations, {elapsed:.2?}"),
    )
}

fn filter_versus_raw() -> Outcome {
    let start = Instant::now();
    let mut config = Config::default();
    config.scenario.pattern = Pattern::Hover;
    config.sim.duration = 60.0;
    let recs = hover_records(config);
    let elapsed = start.elapsed();
    let filtered = rms(recs.iter().map(|r| r.estimate.roll - r.truth.roll));
    let raw = rms(recs.iter().map(|r| r.accel.roll - r.truth.roll));
    let last = recs.last().unwrap();
    let gyro_drift = (last.gyro_only_roll - last.truth.roll).abs();
    let filt_drift = (last.estimate.roll - last.truth.roll).abs();
    outcome(
        filtered < raw && gyro_drift > filt_drift && (last.time - 59.99).abs() < 1e-9 && within(elapsed, 5.0),
        format!(
            "roll RMS filtered {filtered:.5} vs accel {raw:.5}; drift at t={:.2}s gyro {gyro_drift:.5} vs filtered {filt_drift:.5}, {elapsed:.2?}",
            last.time
        ),
    )
}

fn accel_inverse() -> Outcome {
    let limit = 60f64.to_radians();
    let mut rng = RngStream::new(3);
    let model = AccelModel::ideal();
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for i in 0..40 {
        for j in 0..25 {
            let roll = -limit + (i as f64 + 0.5) * (2.0 * limit / 40.0);
            let pitch = -limit + (j as f64 + 0.5) * (2.0 * limit / 25.0);
            let yaw = (i * 25 + j) as f64 * 0.37 % (2.0 * PI) - PI;
            let att = Attitude::new(yaw, pitch, roll);
            let reading =
                sample_accel(&att, Vec3::new(0.0, 0.0, 9.81), 9.81, &model, &mut rng, 0.0);
            let est = accel_angles(&reading);
            worst = worst
                .max((est.roll - roll).abs())
                .max((est.pitch - pitch).abs());
            n += 1;
        }
    }
    outcome(
        worst <= 1e-12,
        format!("{n} grid points, max error {worst:e} rad"),
    )
}

fn pid_arithmetic() -> Outcome {
    let mut ok = true;
    let rect = Integration::Rectangular;

    let zero = PidGains {
        kp: 1.3,
        ki: 0.7,
        kd: 0.2,
    };
    let mut s = PidState::new(1.0);
    for _ in 0..100 {
        let (u, next) = pid_update(&zero, &s, 0.4, 0.4, 0.01, rect);
        ok &= u == 0.0;
        s = next;
    }

    let (u_p, _) = pid_update(
        &PidGains {
            kp: 2.0,
            ki: 0.0,
            kd: 0.0,
        },
        &PidState::new(1.0),
        1.5,
        0.0,
        0.01,
        rect,
    );
    ok &= u_p == 3.0;

    let gi = PidGains {
        kp: 0.0,
        ki: 1.0,
        kd: 0.0,
    };
    let mut s = PidState::new(10.0);
    let mut u_i = 0.0;
    for _ in 0..4 {
        let (u, next) = pid_update(&gi, &s, 0.5, 0.0, 0.1, rect);
        u_i = u;
        s = next;
    }
    let expected_i = 0.5 * 0.1 + 0.5 * 0.1 + 0.5 * 0.1 + 0.5 * 0.1;
    ok &= u_i == expected_i && (u_i - 0.2).abs() < 1e-15;

    let gd = PidGains {
        kp: 0.0,
        ki: 0.0,
        kd: 0.5,
    };
    let (_, s) = pid_update(&gd, &PidState::new(1.0), 0.25, 0.0, 0.5, rect);
    let (u_d, _) = pid_update(&gd, &s, 1.0, 0.0, 0.5, rect);
    ok &= u_d == 0.5 * (1.0 - 0.25) / 0.5;

    let mut rng = RngStream::new(4);
    let mut violations = 0;
    let mut state = PidState::new(0.3);
    let gains = PidGains {
        kp: 0.5,
        ki: 2.0,
        kd: 0.1,
    };
    for step in 0..100_000 {
        if step % 1000 == 0 {
            state = PidState::new(rng.uniform_range(0.01, 2.0));
        }
        let integ = if rng.chance(0.5) {
            rect
        } else {
            Integration::Trapezoidal
        };
        let e = rng.uniform_range(-50.0, 50.0);
        let dt = rng.uniform_range(1e-4, 0.5);
        let (_, next) = pid_update(&gains, &state, e, 0.0, dt, integ);
        if next.integral.abs() > next.integral_limit {
            violations += 1;
        }
        state = next;
    }
    outcome(
        ok && violations == 0,
        format!("P {u_p}, I {u_i}, D {u_d}, clamp violations {violations} in 1e5 steps"),
    )
}

fn hover_recovery() -> Outcome {
    let start = Instant::now();
    let mut config = Config::noiseless();
    config.scenario.pattern = Pattern::Hover;
    config.sim.duration = 10.0;
    config.initial.roll = 10f64.to_radians();
    let recs = hover_records(config);
    let elapsed = start.elapsed();
    let peak = recs
        .iter()
        .map(|r| r.truth.roll.abs())
        .fold(0.0, f64::max)
        .to_degrees();
    let late = recs
        .iter()
        .filter(|r| r.time > 5.0)
        .map(|r| r.truth.roll.abs())
        .fold(0.0, f64::max)
        .to_degrees();
    outcome(
        late < 1.0 && peak < 12.0 && within(elapsed, 2.0),
        format!("max |roll| {peak:.3} deg, max |roll| after 5 s {late:.4} deg, {elapsed:.2?}"),
    )
}

fn box_iou(a: &BBox, b: &BBox) -> f64 {
    let ix = ((a.c_x + a.w / 2.0).min(b.c_x + b.w / 2.0)
        - (a.c_x - a.w / 2.0).max(b.c_x - b.w / 2.0))
    .max(0.0);
    let iy = ((a.c_y + a.h / 2.0).min(b.c_y + b.h / 2.0)
        - (a.c_y - a.h / 2.0).max(b.c_y - b.h / 2.0))
    .max(0.0);
    let inter = ix * iy;
    let union = a.w * a.h + b.w * b.h - inter;
    if union > 0.0 {
        inter / union
    } else {
        0.0
    }
}

/// Highest confidence first, lower input index on ties.
fn outranks(d: &[Detection], a: usize, b: usize) -> bool {
    d[a].conf > d[b].conf || (d[a].conf == d[b].conf && a < b)
}

/// Reference NMS: repeatedly pick the best-ranked box still alive by full
/// scan, then kill everything it overlaps.
fn nms_reference(d: &[Detection], thr: f64) -> Vec<Detection> {
    let mut alive = vec![true; d.len()];
    let mut out = Vec::new();
    loop {
        let mut best: Option<usize> = None;
        for i in 0..d.len() {
            if alive[i] && best.is_none_or(|b| outranks(d, i, b)) {
                best = Some(i);
            }
        }
        let Some(b) = best else { break };
        alive[b] = false;
        out.push(d[b]);
        for i in 0..d.len() {
            if alive[i] && box_iou(&d[b].bbox, &d[i].bbox) > thr {
                alive[i] = false;
            }
        }
    }
    out
}

fn random_box(rng: &mut RngStream) -> BBox {
    BBox::new(
        rng.uniform_range(0.0, 1.0),
        rng.uniform_range(0.0, 1.0),
        rng.uniform_range(0.02, 0.5),
        rng.uniform_range(0.02, 0.5),
    )
}

/// Reference matcher over a dense IoU matrix.
fn match_reference(anchors: &[BBox], gts: &[BBox], thr: f64) -> Vec<Option<usize>> {
    let m: Vec<Vec<f64>> = anchors
        .iter()
        .map(|a| gts.iter().map(|g| box_iou(a, g)).collect())
        .collect();
    let mut label: Vec<Option<usize>> = m
        .iter()
        .map(|row| {
            let mut best = 0;
            for g in 1..row.len() {
                if row[g] > row[best] {
                    best = g;
                }
            }
            (row[best] > thr).then_some(best)
        })
        .collect();
    let mut taken = vec![false; anchors.len()];
    for g in 0..gts.len() {
        let mut best: Option<usize> = None;
        for a in 0..anchors.len() {
            if !taken[a] && best.is_none_or(|b| m[a][g] > m[b][g]) {
                best = Some(a);
            }
        }
        let Some(a) = best else { continue };
        taken[a] = true;
        label[a] = Some(g);
    }
    label
}

fn nms_and_matching_oracles() -> Outcome {
    let mut rng = RngStream::new(6);
    let mut nms_mismatch = 0;
    for _ in 0..1000 {
        let n = rng.index(51);
        let dets: Vec<Detection> = (0..n)
            .map(|_| Detection {
                bbox: random_box(&mut rng),
                // Coarse confidences so ties occur.
                conf: (rng.uniform() * 20.0).floor() / 20.0,
            })
            .collect();
        let thr = rng.uniform_range(0.1, 0.9);
        if nms(&dets, thr) != nms_reference(&dets, thr) {
            nms_mismatch += 1;
        }
    }

    let mut match_mismatch = 0;
    let mut uncovered_gt = 0;
    let mut instances = 0;
    while instances < 200 {
        let pyramid: Vec<FeatureMapSpec> = (0..1 + rng.index(3))
            .map(|_| FeatureMapSpec {
                grid: 1 + rng.index(8),
                scales: (0..1 + rng.index(2))
                    .map(|_| rng.uniform_range(0.05, 0.9))
                    .collect(),
                aspect_ratios: (0..1 + rng.index(3))
                    .map(|_| rng.uniform_range(0.3, 3.0))
                    .collect(),
            })
            .collect();
        let anchors = generate_anchors(&pyramid);
        let gts: Vec<BBox> = (0..1 + rng.index(6))
            .map(|_| random_box(&mut rng))
            .collect();
        // Each ground truth needs a distinct anchor to claim.
        if anchors.len() < gts.len() {
            continue;
        }
        instances += 1;
        let thr = rng.uniform_range(0.3, 0.7);
        let got: Vec<Option<usize>> = match_anchors(&anchors, &gts, thr)
            .labels
            .iter()
            .map(|l| match l {
                AnchorLabel::Positive { gt, .. } => Some(*gt),
                AnchorLabel::Negative => None,
            })
            .collect();
        if got != match_reference(&anchors, &gts, thr) {
            match_mismatch += 1;
        }
        uncovered_gt += (0..gts.len()).filter(|g| !got.contains(&Some(*g))).count();
    }
    outcome(
        nms_mismatch == 0 && match_mismatch == 0 && uncovered_gt == 0,
        format!(
            "NMS mismatches {nms_mismatch}/1000, matching mismatches {match_mismatch}/200, GTs without a positive {uncovered_gt}"
        ),
    )
}

fn anchor_count() -> Outcome {
    let pyramid = default_pyramid();
    let per_cell: Vec<usize> = pyramid
        .iter()
        .map(FeatureMapSpec::anchors_per_cell)
        .collect();
    let n = generate_anchors(&pyramid).len();
    outcome(
        n == 320 && per_cell == [4, 4],
        format!("{n} anchors, {per_cell:?} per cell"),
    )
}

fn drone_at(rng: &mut RngStream) -> QuadState {
    let tilt = 20f64.to_radians();
    QuadState {
        position: Vec3::new(
            rng.uniform_range(-50.0, 50.0),
            rng.uniform_range(-50.0, 50.0),
            rng.uniform_range(2.0, 30.0),
        ),
        attitude: Attitude::new(
            rng.uniform_range(-PI, PI),
            rng.uniform_range(-tilt, tilt),
            rng.uniform_range(-tilt, tilt),
        ),
        ..QuadState::default()
    }
}

fn geolocation_round_trip() -> Outcome {
    let cam = CameraModel::default();
    let mut rng = RngStream::new(8);
    let mut worst: f64 = 0.0;
    let mut placed = 0;
    let mut failed = 0;
    while placed < 1000 {
        let drone = drone_at(&mut rng);
        let reach = drone.position.z * 1.5;
        let x = drone.position.x + rng.uniform_range(-reach, reach);
        let y = drone.position.y + rng.uniform_range(-reach, reach);
        let Some(p) = project_victim(x, y, 1.7, &drone, &cam) else {
            continue;
        };
        placed += 1;
        match geolocate(&p.bbox, &drone, &cam) {
            Some((gx, gy)) => worst = worst.max((gx - x).hypot(gy - y)),
            None => failed += 1,
        }
    }
    outcome(
        failed == 0 && worst <= 1e-9,
        format!("{placed} placements, max error {worst:e} m, {failed} failed"),
    )
}

fn detection_rate(slant: f64, frames: usize, seed: u64) -> f64 {
    let cam = CameraModel::default();
    let model = DetectorModel::default();
    let drone = QuadState {
        position: Vec3::new(0.0, 0.0, slant),
        ..QuadState::default()
    };
    let p = project_victim(0.0, 0.0, 1.7, &drone, &cam).expect("victim below the camera");
    let target = VisibleTarget {
        bbox: p.bbox,
        apparent_px: p.apparent_px,
        slant: p.slant,
    };
    let mut rng = RngStream::new(seed);
    let hits = (0..frames)
        .filter(|_| {
            simulate_detection(&[target], &model, &mut rng)
                .iter()
                .any(|d| d.target == Some(0))
        })
        .count();
    hits as f64 / frames as f64
}

fn detector_range_and_cadence() -> Outcome {
    let start = Instant::now();
    let near = detection_rate(10.0, 10_000, 9);
    let far = detection_rate(30.0, 10_000, 9);
    let mut config = Config::noiseless();
    config.scenario.pattern = Pattern::Hover;
    config.sim.duration = 10.0;
    let mut sim = Simulation::new(config).unwrap();
    sim.run(|_| {}).unwrap();
    let frames = sim.world().frames;
    let elapsed = start.elapsed();
    outcome(
        near > 0.9 && far < 0.2 && frames.abs_diff(30) <= 1 && within(elapsed, 10.0),
        format!("rate {near:.4} at 10 m, {far:.4} at 30 m; {frames} frames in 10 s, {elapsed:.2?}"),
    )
}

fn end_to_end_determinism() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for name in ["a", "b"] {
        let rc = RunConfig {
            seed: Some(42),
            out_dir: dir.path().join(name),
            ..RunConfig::default()
        };
        match run(&rc) {
            Ok(r) => reports.push(r),
            Err(e) => return outcome(false, format!("run failed: {e}")),
        }
    }
    let elapsed = start.elapsed();
    let mut identical = true;
    let mut non_finite = 0;
    for file in [
        "attitude.csv",
        "detections.jsonl",
        "metrics.json",
        "manifest.json",
    ] {
        let a = fs::read_to_string(dir.path().join("a").join(file)).unwrap();
        let b = fs::read_to_string(dir.path().join("b").join(file)).unwrap();
        identical &= !a.is_empty() && a == b;
        non_finite += a.matches("NaN").count() + a.matches("inf").count();
    }
    let recall = reports[0].metrics.recall.unwrap_or(0.0);
    let scenario = &Config::default().scenario;
    let full_mission = scenario.victims.len() == 5
        && scenario.area.width() == 100.0
        && scenario.area.height() == 100.0;
    outcome(
        identical && non_finite == 0 && recall > 0.0 && full_mission && within(elapsed, 30.0),
        format!(
            "identical outputs {identical}, recall {recall}, non-finite values {non_finite}, two runs in {elapsed:.2?}"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 10] = [
        ("complementary filter fixed point", fixed_point),
        (
            "filtered attitude beats raw accel and gyro-only",
            filter_versus_raw,
        ),
        ("accelerometer inverse", accel_inverse),
        ("PID arithmetic and integral clamp", pid_arithmetic),
        ("hover recovery", hover_recovery),
        ("NMS and matching oracles", nms_and_matching_oracles),
        ("anchor count", anchor_count),
        ("geolocation round trip", geolocation_round_trip),
        ("detector range and cadence", detector_range_and_cadence),
        ("end-to-end determinism", end_to_end_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let r = check();
        failed += usize::from(!r.pass);
        println!(
            "{} {:>2} {name}: {}",
            if r.pass { "PASS" } else { "FAIL" },
            i + 1,
            r.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
