//! Rotated non-maximum suppression and its timing harness.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::NmsError;
use crate::geometry::{box_to_aabb, rotated_iou, OrientedBox};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub bbox: OrientedBox,
    pub score: f64,
    pub class_id: usize,
}

impl Detection {
    pub fn new(bbox: OrientedBox, score: f64, class_id: usize) -> Result<Self, NmsError> {
        if !(0.0..=1.0).contains(&score) {
            return Err(NmsError::Score(score));
        }
        Ok(Self {
            bbox,
            score,
            class_id,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NmsConfig {
    pub iou_threshold: f64,
    pub conf_threshold: f64,
    pub class_aware: bool,
}

impl Default for NmsConfig {
    fn default() -> Self {
        Self {
            iou_threshold: 0.1,
            conf_threshold: 0.05,
            class_aware: true,
        }
    }
}

impl NmsConfig {
    pub fn validate(&self) -> Result<(), NmsError> {
        if !(self.iou_threshold > 0.0 && self.iou_threshold < 1.0) {
            return Err(NmsError::IouThreshold(self.iou_threshold));
        }
        if !(self.conf_threshold >= 0.0 && self.conf_threshold < 1.0) {
            return Err(NmsError::ConfThreshold(self.conf_threshold));
        }
        Ok(())
    }
}

/// Keeps detections scoring at least `threshold`, in input order.
pub fn confidence_filter(dets: &[Detection], threshold: f64) -> Vec<Detection> {
    dets.iter().copied().filter(|d| d.score >= threshold).collect()
}

/// Indices (into `dets`) of the detections that survive, highest score first.
pub fn rotated_nms_indices(dets: &[Detection], cfg: &NmsConfig) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dets.len())
        .filter(|&i| dets[i].score >= cfg.conf_threshold)
        .collect();
    // stable sort keeps lower indices first among equal scores
    order.sort_by(|&a, &b| dets[b].score.partial_cmp(&dets[a].score).unwrap_or(Ordering::Equal));

    // boxes whose bounding rectangles are disjoint have IoU 0, which never
    // exceeds a valid threshold, so the polygon clip can be skipped
    let bounds: Vec<[f64; 4]> = dets
        .iter()
        .map(|d| {
            let r = box_to_aabb(&d.bbox);
            [r.x_min(), r.x_max(), r.y_min(), r.y_max()]
        })
        .collect();
    let overlaps = |a: &[f64; 4], b: &[f64; 4]| a[0] <= b[1] && b[0] <= a[1] && a[2] <= b[3] && b[2] <= a[3];

    let mut kept: Vec<usize> = Vec::new();
    for &i in &order {
        let cand = &dets[i];
        let suppressed = kept.iter().any(|&k| {
            let other = &dets[k];
            (!cfg.class_aware || other.class_id == cand.class_id)
                && overlaps(&bounds[k], &bounds[i])
                && rotated_iou(&other.bbox, &cand.bbox) > cfg.iou_threshold
        });
        if !suppressed {
            kept.push(i);
        }
    }
    kept
}

/// Confidence filtering followed by greedy rotated NMS. Output is sorted by
/// score, descending.
pub fn rotated_nms(dets: &[Detection], cfg: &NmsConfig) -> Vec<Detection> {
    rotated_nms_indices(dets, cfg)
        .into_iter()
        .map(|i| dets[i])
        .collect()
}

/// `count` non-overlapping boxes on a square grid, class 0, score 1.
///
/// Box sides are drawn from `[0.2, 0.7]·spacing`, so every diagonal is shorter
/// than the grid pitch and no two boxes can intersect whatever their angles.
pub fn gen_scene<R: Rng + ?Sized>(
    count: usize,
    spacing: f64,
    rng: &mut R,
) -> Result<Vec<Detection>, NmsError> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(NmsError::Spacing(spacing));
    }
    let side = (count as f64).sqrt().ceil() as usize;
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let (row, col) = (i / side, i % side);
        let w = spacing * rng.gen_range(0.2..0.7);
        let h = spacing * rng.gen_range(0.2..0.7);
        let theta = rng.gen_range(0.0..PI);
        let bbox = OrientedBox::new(
            (col as f64 + 0.5) * spacing,
            (row as f64 + 0.5) * spacing,
            w,
            h,
            theta,
        )?;
        out.push(Detection {
            bbox,
            score: 1.0,
            class_id: 0,
        });
    }
    Ok(out)
}

/// Timing summary for one scene size, in microseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub count: usize,
    pub median_us: f64,
    pub p10_us: f64,
    pub p90_us: f64,
    pub samples: Vec<f64>,
}

/// Nearest-rank percentile of an ascending slice.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn median(sorted: &[f64]) -> f64 {
    match sorted.len() {
        0 => 0.0,
        n if n % 2 == 1 => sorted[n / 2],
        n => 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]),
    }
}

/// Times `rotated_nms` on generated non-overlapping scenes.
///
/// Runs on the calling thread. Each count gets one untimed warm-up run and
/// then `repeats` timed runs.
pub fn benchmark_nms<R: Rng + ?Sized>(
    counts: &[usize],
    repeats: usize,
    cfg: &NmsConfig,
    spacing: f64,
    rng: &mut R,
) -> Result<Vec<BenchRow>, NmsError> {
    cfg.validate()?;
    if repeats < 5 {
        return Err(NmsError::Repeats(repeats));
    }
    if counts.windows(2).any(|w| w[0] > w[1]) {
        return Err(NmsError::UnsortedCounts);
    }
    let mut rows = Vec::with_capacity(counts.len());
    for &count in counts {
        let scene = gen_scene(count, spacing, rng)?;
        std::hint::black_box(rotated_nms(&scene, cfg));
        let mut samples = Vec::with_capacity(repeats);
        for _ in 0..repeats {
            let start = Instant::now();
            let kept = rotated_nms(std::hint::black_box(&scene), cfg);
            let elapsed = start.elapsed();
            std::hint::black_box(kept);
            samples.push(elapsed.as_secs_f64() * 1e6);
        }
        let mut sorted = samples.clone();
        sorted.sort_by(f64::total_cmp);
        rows.push(BenchRow {
            count,
            median_us: median(&sorted),
            p10_us: percentile(&sorted, 0.1),
            p90_us: percentile(&sorted, 0.9),
            samples,
        });
    }
    Ok(rows)
}

/// Kept-box counts after confidence filtering then NMS, one per threshold.
pub fn confidence_sweep(dets: &[Detection], thresholds: &[f64], cfg: &NmsConfig) -> Vec<(f64, usize)> {
    thresholds
        .iter()
        .map(|&t| {
            let c = NmsConfig {
                conf_threshold: t,
                ..*cfg
            };
            (t, rotated_nms_indices(dets, &c).len())
        })
        .collect()
}

/// Default sweep `0.005, 0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.25`.
pub fn default_sweep() -> Vec<f64> {
    vec![0.005, 0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.25]
}
