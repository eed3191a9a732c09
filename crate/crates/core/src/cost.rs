//! Matching costs between predicted and ground-truth boxes.
//!
//! Pairwise geometric costs implement [`PairCost`] and live in a
//! [`Registry`], so the distance term of the matcher can be swapped by name
//! (`l1`, `kld`, `hausdorff`, `chamfer`).

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::CostError;
use crate::geometry::{box_to_gaussian, corner_array, GaussianBox, OrientedBox, Point};
use crate::registry::Registry;

/// Probabilities fed to the focal term are clamped into `[PROB_EPS, 1 - PROB_EPS]`.
pub const PROB_EPS: f64 = 1e-6;

/// A geometric cost between one prediction and one ground truth.
pub trait PairCost: Send + Sync {
    fn name(&self) -> &str;
    fn cost(&self, pred: &OrientedBox, gt: &OrientedBox) -> Result<f64, CostError>;
}

/// Weights of the combined matching cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostWeights {
    pub kld: f64,
    pub cls: f64,
    pub cf: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            kld: 2.0,
            cls: 2.0,
            cf: 5.0,
        }
    }
}

impl CostWeights {
    pub fn validate(&self) -> Result<(), CostError> {
        for (name, value) in [("kld", self.kld), ("cls", self.cls), ("cf", self.cf)] {
            if !value.is_finite() || value < 0.0 {
                return Err(CostError::InvalidWeight { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FocalParams {
    pub alpha: f64,
    pub gamma: f64,
}

impl Default for FocalParams {
    fn default() -> Self {
        Self {
            alpha: 0.25,
            gamma: 2.0,
        }
    }
}

/// Everything the matcher needs to build a cost matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostConfig {
    pub weights: CostWeights,
    pub focal: FocalParams,
    pub kld_tau: f64,
    /// Registry name of the distance term.
    pub distance: String,
    pub samples_per_edge: usize,
}

impl Default for CostConfig {
    fn default() -> Self {
        Self {
            weights: CostWeights::default(),
            focal: FocalParams::default(),
            kld_tau: 1.0,
            distance: "chamfer".to_string(),
            samples_per_edge: 0,
        }
    }
}

impl CostConfig {
    pub fn validate(&self) -> Result<(), CostError> {
        self.weights.validate()?;
        let FocalParams { alpha, gamma } = self.focal;
        if !(0.0..=1.0).contains(&alpha) {
            return Err(CostError::InvalidWeight {
                name: "focal.alpha",
                value: alpha,
            });
        }
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(CostError::InvalidWeight {
                name: "focal.gamma",
                value: gamma,
            });
        }
        if !self.kld_tau.is_finite() || self.kld_tau < 1.0 {
            return Err(CostError::InvalidWeight {
                name: "kld_tau",
                value: self.kld_tau,
            });
        }
        if !cost_registry(self).contains(&self.distance) {
            return Err(CostError::UnknownCost(self.distance.clone()));
        }
        Ok(())
    }
}

/// A prediction: a box plus one probability per class.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub bbox: OrientedBox,
    pub class_scores: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruth {
    pub bbox: OrientedBox,
    pub class_id: usize,
}

/// Dense row-major `K x M` matrix; rows are predictions, columns ground truths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl CostMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    /// Builds from nested rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged cost matrix");
        Self {
            rows: rows.len(),
            cols,
            values: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                values.push(f(r, c));
            }
        }
        Self { rows, cols, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.values[row * self.cols + col] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }
}

/// Sum of absolute parameter differences. The angle term is the raw radian
/// difference with no wrap-around.
pub fn l1_cost(pred: &OrientedBox, gt: &OrientedBox) -> f64 {
    (pred.cx() - gt.cx()).abs()
        + (pred.cy() - gt.cy()).abs()
        + (pred.w() - gt.w()).abs()
        + (pred.h() - gt.h()).abs()
        + (pred.theta() - gt.theta()).abs()
}

/// Corners plus `samples_per_edge` evenly spaced interior points per edge.
pub fn boundary_points(b: &OrientedBox, samples_per_edge: usize) -> Vec<Point> {
    let [pp, pm, mp, mm] = corner_array(b);
    if samples_per_edge == 0 {
        return vec![pp, pm, mp, mm];
    }
    let ring = [pp, pm, mm, mp];
    let mut out = Vec::with_capacity(4 * (samples_per_edge + 1));
    for i in 0..4 {
        let a = ring[i];
        let b = ring[(i + 1) % 4];
        out.push(a);
        for j in 1..=samples_per_edge {
            let t = j as f64 / (samples_per_edge + 1) as f64;
            out.push(Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)));
        }
    }
    out
}

fn nearest_sq(p: Point, set: &[Point]) -> f64 {
    set.iter().map(|q| p.dist_sq(*q)).fold(f64::INFINITY, f64::min)
}

/// Symmetric Chamfer distance between two point sets: mean squared
/// nearest-neighbour distance in each direction, summed.
pub fn chamfer_distance(s: &[Point], t: &[Point]) -> f64 {
    let fwd: f64 = s.iter().map(|&p| nearest_sq(p, t)).sum::<f64>() / s.len() as f64;
    let bwd: f64 = t.iter().map(|&p| nearest_sq(p, s)).sum::<f64>() / t.len() as f64;
    fwd + bwd
}

/// Hausdorff distance between two point sets (unsquared).
pub fn hausdorff_distance(s: &[Point], t: &[Point]) -> f64 {
    let directed = |a: &[Point], b: &[Point]| {
        a.iter()
            .map(|&p| nearest_sq(p, b))
            .fold(0.0_f64, f64::max)
    };
    directed(s, t).max(directed(t, s)).sqrt()
}

pub fn chamfer_cost(pred: &OrientedBox, gt: &OrientedBox, samples_per_edge: usize) -> f64 {
    chamfer_distance(
        &boundary_points(pred, samples_per_edge),
        &boundary_points(gt, samples_per_edge),
    )
}

pub fn hausdorff_cost(pred: &OrientedBox, gt: &OrientedBox) -> f64 {
    hausdorff_distance(&corner_array(pred), &corner_array(gt))
}

/// `KL(p ‖ q)` between two 2-D Gaussians.
pub fn kld_divergence(p: &GaussianBox, q: &GaussianBox) -> Result<f64, CostError> {
    let q_inv = q.inverse_cov().ok_or(CostError::SingularCovariance)?;
    let det_p = p.det();
    if !(det_p > 0.0) {
        return Err(CostError::SingularCovariance);
    }
    let dx = q.mean[0] - p.mean[0];
    let dy = q.mean[1] - p.mean[1];
    let mahal = dx * (q_inv[0][0] * dx + q_inv[0][1] * dy) + dy * (q_inv[1][0] * dx + q_inv[1][1] * dy);
    let trace = q_inv[0][0] * p.cov[0][0]
        + q_inv[0][1] * p.cov[1][0]
        + q_inv[1][0] * p.cov[0][1]
        + q_inv[1][1] * p.cov[1][1];
    let log_det = (q.det() / det_p).ln();
    // rounding can push exact-match cases a hair below zero
    Ok((0.5 * (mahal + trace + log_det) - 1.0).max(0.0))
}

/// Bounded KL cost `1 - 1 / (τ + ln(1 + KL))` on unnormalized Gaussians.
pub fn kld_cost(pred: &OrientedBox, gt: &OrientedBox, tau: f64) -> Result<f64, CostError> {
    let d = kld_divergence(&box_to_gaussian(pred, false), &box_to_gaussian(gt, false))?;
    Ok(1.0 - 1.0 / (tau + d.ln_1p()))
}

/// Positive-minus-negative focal classification cost for probability `p`.
pub fn focal_cost(p: f64, alpha: f64, gamma: f64) -> Result<f64, CostError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(CostError::ProbabilityOutOfRange(p));
    }
    let pos = alpha * (1.0 - p).powf(gamma) * -p.ln();
    let neg = (1.0 - alpha) * p.powf(gamma) * -(-p).ln_1p();
    Ok(pos - neg)
}

pub struct L1Cost;

impl PairCost for L1Cost {
    fn name(&self) -> &str {
        "l1"
    }
    fn cost(&self, pred: &OrientedBox, gt: &OrientedBox) -> Result<f64, CostError> {
        Ok(l1_cost(pred, gt))
    }
}

#[derive(Default)]
pub struct ChamferCost {
    pub samples_per_edge: usize,
}

impl PairCost for ChamferCost {
    fn name(&self) -> &str {
        "chamfer"
    }
    fn cost(&self, pred: &OrientedBox, gt: &OrientedBox) -> Result<f64, CostError> {
        Ok(chamfer_cost(pred, gt, self.samples_per_edge))
    }
}

pub struct HausdorffCost;

impl PairCost for HausdorffCost {
    fn name(&self) -> &str {
        "hausdorff"
    }
    fn cost(&self, pred: &OrientedBox, gt: &OrientedBox) -> Result<f64, CostError> {
        Ok(hausdorff_cost(pred, gt))
    }
}

pub struct KldCost {
    pub tau: f64,
}

impl Default for KldCost {
    fn default() -> Self {
        Self { tau: 1.0 }
    }
}

impl PairCost for KldCost {
    fn name(&self) -> &str {
        "kld"
    }
    fn cost(&self, pred: &OrientedBox, gt: &OrientedBox) -> Result<f64, CostError> {
        kld_cost(pred, gt, self.tau)
    }
}

/// The four built-in pairwise costs, parameterized from `cfg`.
pub fn cost_registry(cfg: &CostConfig) -> Registry<dyn PairCost> {
    let mut reg: Registry<dyn PairCost> = Registry::new();
    reg.register("l1", Arc::new(L1Cost))
        .register(
            "chamfer",
            Arc::new(ChamferCost {
                samples_per_edge: cfg.samples_per_edge,
            }),
        )
        .register("hausdorff", Arc::new(HausdorffCost))
        .register("kld", Arc::new(KldCost { tau: cfg.kld_tau }));
    reg
}

/// Weighted matching cost `ξ_kld·overlap + ξ_cls·focal + ξ_cf·distance`.
pub struct MatchingCost {
    weights: CostWeights,
    focal: FocalParams,
    overlap: Arc<dyn PairCost>,
    distance: Arc<dyn PairCost>,
}

impl MatchingCost {
    pub fn new(
        weights: CostWeights,
        focal: FocalParams,
        overlap: Arc<dyn PairCost>,
        distance: Arc<dyn PairCost>,
    ) -> Self {
        Self {
            weights,
            focal,
            overlap,
            distance,
        }
    }

    pub fn from_config(cfg: &CostConfig) -> Result<Self, CostError> {
        cfg.validate()?;
        let reg = cost_registry(cfg);
        let distance = reg
            .get(&cfg.distance)
            .ok_or_else(|| CostError::UnknownCost(cfg.distance.clone()))?;
        let overlap = reg.get("kld").expect("kld is always registered");
        Ok(Self::new(cfg.weights, cfg.focal, overlap, distance))
    }

    pub fn distance_name(&self) -> &str {
        self.distance.name()
    }

    pub fn entry(&self, pred: &Prediction, gt: &GroundTruth) -> Result<f64, CostError> {
        let w = &self.weights;
        let mut total = 0.0;
        if w.kld != 0.0 {
            total += w.kld * self.overlap.cost(&pred.bbox, &gt.bbox)?;
        }
        if w.cls != 0.0 {
            let p = *pred
                .class_scores
                .get(gt.class_id)
                .ok_or(CostError::MissingClassScore {
                    class_id: gt.class_id,
                    num_classes: pred.class_scores.len(),
                })?;
            let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
            total += w.cls * focal_cost(p, self.focal.alpha, self.focal.gamma)?;
        }
        if w.cf != 0.0 {
            total += w.cf * self.distance.cost(&pred.bbox, &gt.bbox)?;
        }
        Ok(total)
    }

    /// Builds the `K x M` matrix, rows in parallel. Each entry is computed
    /// independently, so the result matches [`Self::matrix_sequential`] exactly.
    pub fn matrix(&self, preds: &[Prediction], gts: &[GroundTruth]) -> Result<CostMatrix, CostError> {
        let rows: Result<Vec<Vec<f64>>, CostError> = preds
            .par_iter()
            .map(|p| gts.iter().map(|g| self.entry(p, g)).collect())
            .collect();
        Ok(CostMatrix {
            rows: preds.len(),
            cols: gts.len(),
            values: rows?.into_iter().flatten().collect(),
        })
    }

    pub fn matrix_sequential(
        &self,
        preds: &[Prediction],
        gts: &[GroundTruth],
    ) -> Result<CostMatrix, CostError> {
        let mut values = Vec::with_capacity(preds.len() * gts.len());
        for p in preds {
            for g in gts {
                values.push(self.entry(p, g)?);
            }
        }
        Ok(CostMatrix {
            rows: preds.len(),
            cols: gts.len(),
            values,
        })
    }
}

/// Default matcher: KL overlap term, focal class term and 4-corner Chamfer
/// distance, with the given weights.
pub fn combined_cost_matrix(
    preds: &[Prediction],
    gts: &[GroundTruth],
    weights: CostWeights,
) -> Result<CostMatrix, CostError> {
    let cfg = CostConfig {
        weights,
        ..CostConfig::default()
    };
    MatchingCost::from_config(&cfg)?.matrix(preds, gts)
}
