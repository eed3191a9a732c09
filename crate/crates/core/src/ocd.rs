//! Oriented contrastive denoising: paired positive/negative noised copies of
//! ground-truth boxes.
//!
//! Each noise mode implements [`NoiseMode`] and is registered by name
//! (`box`, `angle`, `geometric`, `probability`).

use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::NoiseError;
use crate::geometry::{box_to_gaussian, gaussian_to_box, GaussianBox, OrientedBox};
use crate::registry::Registry;

/// Sides never shrink below this after box noise.
pub const MIN_SIDE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    /// Registry name of the noise mode.
    pub mode: String,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
    pub lambda5: f64,
    pub lambda6: f64,
    pub total_queries: usize,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            mode: "box".to_string(),
            lambda1: 1.0,
            lambda2: 2.0,
            lambda3: 9.0,
            lambda4: 18.0,
            lambda5: 0.3,
            lambda6: 0.6,
            total_queries: 200,
            seed: 0,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<(), NoiseError> {
        let pairs = [
            ("lambda1", self.lambda1, "lambda2", self.lambda2),
            ("lambda3", self.lambda3, "lambda4", self.lambda4),
            ("lambda5", self.lambda5, "lambda6", self.lambda6),
        ];
        for (lo_name, lo, hi_name, hi) in pairs {
            if !lo.is_finite() || lo < 0.0 {
                return Err(NoiseError::OutOfRange { name: lo_name, value: lo });
            }
            if !hi.is_finite() {
                return Err(NoiseError::OutOfRange { name: hi_name, value: hi });
            }
            if lo >= hi {
                return Err(NoiseError::BadOrder {
                    lo_name,
                    hi_name,
                    lo,
                    hi,
                });
            }
        }
        if self.lambda6 > 1.0 {
            return Err(NoiseError::OutOfRange {
                name: "lambda6",
                value: self.lambda6,
            });
        }
        if self.total_queries < 2 || !self.total_queries.is_multiple_of(2) {
            return Err(NoiseError::BadQueryCount(self.total_queries));
        }
        if !noise_registry().contains(&self.mode) {
            return Err(NoiseError::UnknownMode(self.mode.clone()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

/// The raw perturbation behind one noised box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Draw {
    /// Offsets added to `(x1, y1, x2, y2)`.
    Box { deltas: [f64; 4] },
    Angle { delta: f64 },
    Geometric { deltas: [f64; 4], delta: f64 },
    /// Mixing weight toward the identity covariance.
    Probability { lambda: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Noised {
    pub bbox: OrientedBox,
    pub draw: Draw,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisePair {
    pub positive: Noised,
    pub negative: Noised,
}

/// A strategy that produces one positive and one negative noised box.
pub trait NoiseMode: Send + Sync {
    fn name(&self) -> &str;
    fn noise_pair(
        &self,
        gt: &OrientedBox,
        cfg: &NoiseConfig,
        rng: &mut dyn RngCore,
    ) -> Result<NoisePair, NoiseError>;
}

/// Uniform draw from `[lo, hi)`; an empty interval yields `lo`.
fn uniform(rng: &mut dyn RngCore, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        lo + (hi - lo) * rng.gen::<f64>()
    } else {
        lo
    }
}

/// Draw from `[-outer, -inner) ∪ [inner, outer)`, both halves equally likely
/// by length.
fn annulus(rng: &mut dyn RngCore, inner: f64, outer: f64) -> f64 {
    let span = outer - inner;
    if span <= 0.0 {
        return inner;
    }
    let t = 2.0 * span * rng.gen::<f64>();
    if t < span {
        -outer + t
    } else {
        inner + (t - span)
    }
}

/// Offsets for `(x1, y1, x2, y2)` of a box with sides `w, h`.
pub fn sample_box_deltas(
    rng: &mut dyn RngCore,
    w: f64,
    h: f64,
    lambda1: f64,
    lambda2: f64,
    polarity: Polarity,
) -> [f64; 4] {
    let sides = [w, h, w, h];
    sides.map(|s| match polarity {
        Polarity::Positive => uniform(rng, -lambda1 * s / 2.0, lambda1 * s / 2.0),
        Polarity::Negative => annulus(rng, lambda1 * s / 2.0, lambda2 * s / 2.0),
    })
}

/// Adds corner offsets in the box's own axis-aligned frame; θ is untouched.
pub fn apply_box_deltas(gt: &OrientedBox, deltas: [f64; 4]) -> Result<OrientedBox, NoiseError> {
    let x1 = gt.cx() - gt.w() / 2.0 + deltas[0];
    let y1 = gt.cy() - gt.h() / 2.0 + deltas[1];
    let x2 = gt.cx() + gt.w() / 2.0 + deltas[2];
    let y2 = gt.cy() + gt.h() / 2.0 + deltas[3];
    let (x1, x2) = if x1 > x2 { (x2, x1) } else { (x1, x2) };
    let (y1, y2) = if y1 > y2 { (y2, y1) } else { (y1, y2) };
    Ok(OrientedBox::new(
        0.5 * (x1 + x2),
        0.5 * (y1 + y2),
        (x2 - x1).max(MIN_SIDE),
        (y2 - y1).max(MIN_SIDE),
        gt.theta(),
    )?)
}

/// Angle offset; the band scales with θ itself.
pub fn sample_angle_delta(
    rng: &mut dyn RngCore,
    theta: f64,
    lambda3: f64,
    lambda4: f64,
    polarity: Polarity,
) -> f64 {
    let inner = lambda3 * theta / 18.0;
    let outer = lambda4 * theta / 18.0;
    match polarity {
        Polarity::Positive => uniform(rng, -inner, inner),
        Polarity::Negative => annulus(rng, inner, outer),
    }
}

pub fn apply_angle_delta(gt: &OrientedBox, delta: f64) -> Result<OrientedBox, NoiseError> {
    Ok(OrientedBox::new(gt.cx(), gt.cy(), gt.w(), gt.h(), gt.theta() + delta)?)
}

pub fn sample_mixing(rng: &mut dyn RngCore, lambda5: f64, lambda6: f64, polarity: Polarity) -> f64 {
    match polarity {
        Polarity::Positive => uniform(rng, 0.0, lambda5),
        Polarity::Negative => uniform(rng, lambda5, lambda6),
    }
}

/// Blends the normalized covariance toward the identity,
/// `Σ' = (1 − λ) Σ + λ I`, and rebuilds the box around the original centre.
pub fn apply_mixing(gt: &OrientedBox, lambda: f64) -> Result<OrientedBox, NoiseError> {
    let g = box_to_gaussian(gt, true);
    let c = g.cov;
    let mixed = GaussianBox {
        mean: [gt.cx(), gt.cy()],
        cov: [
            [(1.0 - lambda) * c[0][0] + lambda, (1.0 - lambda) * c[0][1]],
            [(1.0 - lambda) * c[1][0], (1.0 - lambda) * c[1][1] + lambda],
        ],
    };
    Ok(gaussian_to_box(&mixed, gt.w().max(gt.h()), gt.theta())?)
}

pub struct BoxNoise;

impl NoiseMode for BoxNoise {
    fn name(&self) -> &str {
        "box"
    }
    fn noise_pair(
        &self,
        gt: &OrientedBox,
        cfg: &NoiseConfig,
        rng: &mut dyn RngCore,
    ) -> Result<NoisePair, NoiseError> {
        let one = |rng: &mut dyn RngCore, pol| -> Result<Noised, NoiseError> {
            let deltas = sample_box_deltas(rng, gt.w(), gt.h(), cfg.lambda1, cfg.lambda2, pol);
            Ok(Noised {
                bbox: apply_box_deltas(gt, deltas)?,
                draw: Draw::Box { deltas },
            })
        };
        Ok(NoisePair {
            positive: one(rng, Polarity::Positive)?,
            negative: one(rng, Polarity::Negative)?,
        })
    }
}

pub struct AngleNoise;

impl NoiseMode for AngleNoise {
    fn name(&self) -> &str {
        "angle"
    }
    fn noise_pair(
        &self,
        gt: &OrientedBox,
        cfg: &NoiseConfig,
        rng: &mut dyn RngCore,
    ) -> Result<NoisePair, NoiseError> {
        let one = |rng: &mut dyn RngCore, pol| -> Result<Noised, NoiseError> {
            let delta = sample_angle_delta(rng, gt.theta(), cfg.lambda3, cfg.lambda4, pol);
            Ok(Noised {
                bbox: apply_angle_delta(gt, delta)?,
                draw: Draw::Angle { delta },
            })
        };
        Ok(NoisePair {
            positive: one(rng, Polarity::Positive)?,
            negative: one(rng, Polarity::Negative)?,
        })
    }
}

/// Box noise followed by angle noise of the same polarity.
pub struct GeometricNoise;

impl NoiseMode for GeometricNoise {
    fn name(&self) -> &str {
        "geometric"
    }
    fn noise_pair(
        &self,
        gt: &OrientedBox,
        cfg: &NoiseConfig,
        rng: &mut dyn RngCore,
    ) -> Result<NoisePair, NoiseError> {
        let one = |rng: &mut dyn RngCore, pol| -> Result<Noised, NoiseError> {
            let deltas = sample_box_deltas(rng, gt.w(), gt.h(), cfg.lambda1, cfg.lambda2, pol);
            let delta = sample_angle_delta(rng, gt.theta(), cfg.lambda3, cfg.lambda4, pol);
            let moved = apply_box_deltas(gt, deltas)?;
            Ok(Noised {
                bbox: apply_angle_delta(&moved, delta)?,
                draw: Draw::Geometric { deltas, delta },
            })
        };
        Ok(NoisePair {
            positive: one(rng, Polarity::Positive)?,
            negative: one(rng, Polarity::Negative)?,
        })
    }
}

pub struct ProbabilityNoise;

impl NoiseMode for ProbabilityNoise {
    fn name(&self) -> &str {
        "probability"
    }
    fn noise_pair(
        &self,
        gt: &OrientedBox,
        cfg: &NoiseConfig,
        rng: &mut dyn RngCore,
    ) -> Result<NoisePair, NoiseError> {
        let one = |rng: &mut dyn RngCore, pol| -> Result<Noised, NoiseError> {
            let lambda = sample_mixing(rng, cfg.lambda5, cfg.lambda6, pol);
            Ok(Noised {
                bbox: apply_mixing(gt, lambda)?,
                draw: Draw::Probability { lambda },
            })
        };
        Ok(NoisePair {
            positive: one(rng, Polarity::Positive)?,
            negative: one(rng, Polarity::Negative)?,
        })
    }
}

pub fn noise_registry() -> Registry<dyn NoiseMode> {
    let mut reg: Registry<dyn NoiseMode> = Registry::new();
    reg.register("box", Arc::new(BoxNoise))
        .register("angle", Arc::new(AngleNoise))
        .register("geometric", Arc::new(GeometricNoise))
        .register("probability", Arc::new(ProbabilityNoise));
    reg
}

/// Deterministic random stream for one (group, gt) cell.
pub fn cell_rng(seed: u64, group: usize, gt_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((group as u64) << 32) | (gt_index as u64 & 0xffff_ffff));
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenoiseQuery {
    pub gt_index: usize,
    pub group: usize,
    pub bbox: OrientedBox,
}

/// Positives and negatives in matching order: `positives[i]` pairs with
/// `negatives[i]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DenoiseGroup {
    pub positives: Vec<DenoiseQuery>,
    pub negatives: Vec<DenoiseQuery>,
}

impl DenoiseGroup {
    pub fn len(&self) -> usize {
        self.positives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positives.is_empty()
    }
}

/// Number of denoising groups for `num_gts` ground truths: as many full
/// groups of `2·M` queries as fit in the budget, but at least one.
pub fn group_count(total_queries: usize, num_gts: usize) -> usize {
    if num_gts == 0 {
        return 0;
    }
    (total_queries / (2 * num_gts)).max(1)
}

/// Generates one positive/negative pair per ground truth per group with the
/// mode named in `cfg`.
pub fn generate_denoise_groups(
    gts: &[OrientedBox],
    cfg: &NoiseConfig,
) -> Result<DenoiseGroup, NoiseError> {
    cfg.validate()?;
    let mode = noise_registry()
        .get(&cfg.mode)
        .ok_or_else(|| NoiseError::UnknownMode(cfg.mode.clone()))?;
    generate_with(gts, cfg, mode.as_ref())
}

pub fn generate_with(
    gts: &[OrientedBox],
    cfg: &NoiseConfig,
    mode: &dyn NoiseMode,
) -> Result<DenoiseGroup, NoiseError> {
    let groups = group_count(cfg.total_queries, gts.len());
    let mut out = DenoiseGroup {
        positives: Vec::with_capacity(groups * gts.len()),
        negatives: Vec::with_capacity(groups * gts.len()),
    };
    for group in 0..groups {
        for (gt_index, gt) in gts.iter().enumerate() {
            let mut rng = cell_rng(cfg.seed, group, gt_index);
            let pair = mode.noise_pair(gt, cfg, &mut rng)?;
            out.positives.push(DenoiseQuery {
                gt_index,
                group,
                bbox: pair.positive.bbox,
            });
            out.negatives.push(DenoiseQuery {
                gt_index,
                group,
                bbox: pair.negative.bbox,
            });
        }
    }
    Ok(out)
}
