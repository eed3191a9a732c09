//! Independent reference implementations used by the integration and
//! acceptance tests. None of these call into the code they check.

#![allow(dead_code)]

use orbit::geometry::{rotated_iou, OrientedBox};
use orbit::nms::{Detection, NmsConfig};
use rand::Rng;

/// Corners from the rotation matrix applied to the half-extent offsets.
pub fn corners(b: &OrientedBox) -> Vec<(f64, f64)> {
    let (c, s) = (b.theta().cos(), b.theta().sin());
    let r = [[c, -s], [s, c]];
    [(1.0, 1.0), (1.0, -1.0), (-1.0, -1.0), (-1.0, 1.0)]
        .iter()
        .map(|&(a, bb)| {
            let lx = a * b.w() / 2.0;
            let ly = bb * b.h() / 2.0;
            (b.cx() + r[0][0] * lx + r[0][1] * ly, b.cy() + r[1][0] * lx + r[1][1] * ly)
        })
        .collect()
}

pub fn chamfer_oracle(a: &OrientedBox, b: &OrientedBox) -> f64 {
    let pa = corners(a);
    let pb = corners(b);
    let mut fwd = 0.0;
    for p in &pa {
        let mut best = f64::INFINITY;
        for q in &pb {
            let d = (p.0 - q.0).powi(2) + (p.1 - q.1).powi(2);
            if d < best {
                best = d;
            }
        }
        fwd += best;
    }
    let mut bwd = 0.0;
    for q in &pb {
        let mut best = f64::INFINITY;
        for p in &pa {
            let d = (p.0 - q.0).powi(2) + (p.1 - q.1).powi(2);
            if d < best {
                best = d;
            }
        }
        bwd += best;
    }
    fwd / pa.len() as f64 + bwd / pb.len() as f64
}

fn inside(b: &OrientedBox, x: f64, y: f64) -> bool {
    let (dx, dy) = (x - b.cx(), y - b.cy());
    let (c, s) = (b.theta().cos(), b.theta().sin());
    let u = dx * c + dy * s;
    let v = -dx * s + dy * c;
    u.abs() <= b.w() / 2.0 && v.abs() <= b.h() / 2.0
}

/// Monte-Carlo IoU. Samples one jittered point per cell of a `k x k` grid
/// over `a` (in its own frame, `k² ≈ samples`) and counts hits in `b`; the
/// areas come from the side lengths.
pub fn monte_carlo_iou<R: Rng>(a: &OrientedBox, b: &OrientedBox, samples: usize, rng: &mut R) -> f64 {
    let k = (samples as f64).sqrt().round().max(1.0) as usize;
    let (c, s) = (a.theta().cos(), a.theta().sin());
    let mut hits = 0usize;
    for i in 0..k {
        for j in 0..k {
            let u = ((i as f64 + rng.gen::<f64>()) / k as f64 - 0.5) * a.w();
            let v = ((j as f64 + rng.gen::<f64>()) / k as f64 - 0.5) * a.h();
            let x = a.cx() + u * c - v * s;
            let y = a.cy() + u * s + v * c;
            hits += inside(b, x, y) as usize;
        }
    }
    let area_a = a.w() * a.h();
    let area_b = b.w() * b.h();
    let inter = area_a * hits as f64 / (k * k) as f64;
    inter / (area_a + area_b - inter)
}

/// Minimum over every injective map from the smaller side into the larger.
/// `c[k][m]` is prediction `k` against ground truth `m`. Sums run in
/// increasing order of the smaller side's index.
pub fn brute_force_min(c: &[Vec<f64>]) -> f64 {
    let rows = c.len();
    let cols = c.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    let entry = |small: usize, large: usize| if cols <= rows { c[large][small] } else { c[small][large] };
    let (n_small, n_large) = (rows.min(cols), rows.max(cols));
    let mut best = f64::INFINITY;
    let mut used = vec![false; n_large];
    let mut chosen = Vec::with_capacity(n_small);
    fn walk(
        i: usize,
        n_small: usize,
        n_large: usize,
        used: &mut [bool],
        chosen: &mut Vec<usize>,
        entry: &dyn Fn(usize, usize) -> f64,
        best: &mut f64,
    ) {
        if i == n_small {
            let total = chosen.iter().enumerate().fold(0.0, |acc, (s, &l)| acc + entry(s, l));
            if total < *best {
                *best = total;
            }
            return;
        }
        for l in 0..n_large {
            if !used[l] {
                used[l] = true;
                chosen.push(l);
                walk(i + 1, n_small, n_large, used, chosen, entry, best);
                chosen.pop();
                used[l] = false;
            }
        }
    }
    walk(0, n_small, n_large, &mut used, &mut chosen, &entry, &mut best);
    best
}

/// Cost of `(gt, pred)` pairs summed in the same order as the brute force.
pub fn assignment_value(c: &[Vec<f64>], pairs: &[(usize, usize)]) -> f64 {
    let rows = c.len();
    let cols = c.first().map_or(0, Vec::len);
    let mut keyed: Vec<(usize, f64)> = pairs
        .iter()
        .map(|&(g, p)| (if cols <= rows { g } else { p }, c[p][g]))
        .collect();
    keyed.sort_by_key(|k| k.0);
    keyed.iter().fold(0.0, |acc, k| acc + k.1)
}

/// Textbook O(n²) suppression: walk detections best-first and strike out
/// every later same-class box that overlaps a survivor.
pub fn reference_nms(dets: &[Detection], cfg: &NmsConfig) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].score.total_cmp(&dets[a].score).then(a.cmp(&b)));
    let mut removed = vec![false; dets.len()];
    for &i in &order {
        if dets[i].score < cfg.conf_threshold {
            removed[i] = true;
        }
    }
    let mut kept = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if removed[i] {
            continue;
        }
        kept.push(i);
        for &j in &order[pos + 1..] {
            if removed[j] {
                continue;
            }
            let same = !cfg.class_aware || dets[i].class_id == dets[j].class_id;
            if same && rotated_iou(&dets[i].bbox, &dets[j].bbox) > cfg.iou_threshold {
                removed[j] = true;
            }
        }
    }
    kept
}

pub fn random_box<R: Rng>(rng: &mut R, extent: f64, min_side: f64, max_side: f64) -> OrientedBox {
    OrientedBox::new(
        rng.gen_range(-extent..extent),
        rng.gen_range(-extent..extent),
        rng.gen_range(min_side..max_side),
        rng.gen_range(min_side..max_side),
        rng.gen_range(0.0..std::f64::consts::PI),
    )
    .unwrap()
}

/// A cluttered scene: overlapping boxes, two classes, scores on a coarse grid
/// so ties occur.
pub fn random_detections<R: Rng>(rng: &mut R, n: usize) -> Vec<Detection> {
    (0..n)
        .map(|_| Detection {
            bbox: random_box(rng, 6.0, 0.5, 5.0),
            score: rng.gen_range(0..=20) as f64 / 20.0,
            class_id: rng.gen_range(0..2),
        })
        .collect()
}

/// Hausdorff distance between the corner sets of two boxes.
pub fn corner_hausdorff(a: &OrientedBox, b: &OrientedBox) -> f64 {
    let (pa, pb) = (corners(a), corners(b));
    let directed = |s: &[(f64, f64)], t: &[(f64, f64)]| {
        s.iter()
            .map(|p| {
                t.iter()
                    .map(|q| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    directed(&pa, &pb).max(directed(&pb, &pa))
}
