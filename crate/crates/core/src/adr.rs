//! Angle distribution refinement.
//!
//! A box is represented by its external (axis-aligned) rectangle plus two
//! vertex offsets along that rectangle's edges. Each of the six quantities
//! (left/top/right/bottom edge distances and the two offsets) carries a
//! discrete distribution over `N + 1` bins; decoder layers add residual logits,
//! and the expected bin weight scales the rectangle size into a correction.

use serde::{Deserialize, Serialize};

use crate::error::AdrError;
use crate::geometry::{box_to_aabb, corner_array, normalize_angle, AxisRect, OrientedBox, Point};

/// Edge distances `α, β, γ, δ` then offsets `ε, η`.
pub const NUM_DISTRIBUTIONS: usize = 6;

/// Six logit vectors, one per distribution.
pub type LogitSet = [Vec<f64>; NUM_DISTRIBUTIONS];

/// Parameters of the bin weighting function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightingConfig {
    /// Number of bins minus one.
    pub bins: usize,
    /// Half the largest correction, as a fraction of the rectangle size.
    pub a: f64,
    /// Curvature.
    pub c: f64,
}

impl Default for WeightingConfig {
    fn default() -> Self {
        Self {
            bins: 32,
            a: 0.5,
            c: 0.1,
        }
    }
}

impl WeightingConfig {
    pub fn validate(&self) -> Result<(), AdrError> {
        if self.bins < 2 || !self.bins.is_multiple_of(2) {
            return Err(AdrError::InvalidBins(self.bins));
        }
        for (name, value) in [("a", self.a), ("c", self.c)] {
            if !value.is_finite() || value <= 0.0 {
                return Err(AdrError::InvalidParameter { name, value });
            }
        }
        Ok(())
    }

    /// All `N + 1` bin weights.
    pub fn weights(&self) -> Result<Vec<f64>, AdrError> {
        (0..=self.bins).map(|n| weighting_fn(self, n)).collect()
    }
}

/// Signed correction carried by bin `n`.
///
/// The outermost bins are `±2a`, the centre bin is zero, and in between the
/// magnitude grows geometrically from `a` next to the edges down to fine steps
/// near the centre. The function is antisymmetric about `N/2`.
pub fn weighting_fn(cfg: &WeightingConfig, n: usize) -> Result<f64, AdrError> {
    cfg.validate()?;
    let big_n = cfg.bins;
    if n > big_n {
        return Err(AdrError::IndexOutOfRange { index: n, max: big_n });
    }
    let half = big_n / 2;
    if n == half {
        return Ok(0.0);
    }
    let sign = if n > half { 1.0 } else { -1.0 };
    if n == 0 || n == big_n {
        return Ok(sign * 2.0 * cfg.a);
    }
    let dist = n.abs_diff(half) as f64;
    let exponent = 2.0 * dist / (big_n - 2) as f64;
    Ok(sign * cfg.c * ((1.0 + cfg.a / cfg.c).powf(exponent) - 1.0))
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// `Σ A(n) P(n)`.
pub fn expected_weight(weights: &[f64], probs: &[f64]) -> f64 {
    weights.iter().zip(probs).map(|(a, p)| a * p).sum()
}

/// Vertex offsets of a box inside its external rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffsetEncoding {
    pub rect: AxisRect,
    /// Distance from the top vertex to the top-right corner.
    pub eps: f64,
    /// Distance from the rightmost vertex to the bottom-right corner.
    pub eta: f64,
}

/// Encodes a box as its external rectangle and vertex offsets.
///
/// "Top" is minimal y. Near-ties in the extreme coordinate (within `1e-9` of
/// the box size) go to the vertex with larger x (for the top) or larger y
/// (for the right), so axis-aligned boxes encode with zero offsets.
pub fn encode_offsets(b: &OrientedBox) -> OffsetEncoding {
    let rect = box_to_aabb(b);
    let corners = corner_array(b);
    let tie = 1e-9 * (b.w() + b.h());

    let top = pick_extreme(&corners, tie, |p| -p.y, |p| p.x);
    let right = pick_extreme(&corners, tie, |p| p.x, |p| p.y);
    let eps = (rect.x_max() - top.x).clamp(0.0, rect.width);
    let eta = (rect.y_max() - right.y).clamp(0.0, rect.height);
    OffsetEncoding { rect, eps, eta }
}

fn pick_extreme(
    pts: &[Point; 4],
    tie: f64,
    primary: impl Fn(&Point) -> f64,
    secondary: impl Fn(&Point) -> f64,
) -> Point {
    let best = pts.iter().map(&primary).fold(f64::NEG_INFINITY, f64::max);
    *pts.iter()
        .filter(|p| primary(p) >= best - tie)
        .max_by(|a, b| secondary(a).total_cmp(&secondary(b)))
        .expect("four corners")
}

/// Result of decoding offsets, with a flag set when offsets were clamped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decoded {
    pub bbox: OrientedBox,
    pub clamped: bool,
}

/// Decodes rectangle edges and vertex offsets back into an oriented box.
///
/// The four points on the rectangle's edges form a parallelogram; the box is
/// the smallest rectangle enclosing it with sides along one of the
/// parallelogram's two edge directions. For offsets satisfying
/// `ε(W−ε) = η(H−η)` the parallelogram is already a rectangle and is
/// returned exactly. The result is expressed with θ in `[0, π/2)`.
pub fn decode_box(
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    eps: f64,
    eta: f64,
) -> Result<Decoded, AdrError> {
    let width = x_max - x_min;
    let height = y_max - y_min;
    if !(width > 0.0 && height > 0.0) || !width.is_finite() || !height.is_finite() {
        return Err(AdrError::DegenerateRectangle { width, height });
    }
    let e = if eps.is_nan() { 0.0 } else { eps.clamp(0.0, width) };
    let n = if eta.is_nan() { 0.0 } else { eta.clamp(0.0, height) };
    let clamped = e != eps || n != eta;

    let top = Point::new(x_max - e, y_min);
    let right = Point::new(x_max, y_max - n);
    let bottom = Point::new(x_min + e, y_max);
    let left = Point::new(x_min, y_min + n);
    let quad = [top, right, bottom, left];

    let d1 = (right.x - top.x, right.y - top.y);
    let d2 = (bottom.x - right.x, bottom.y - right.y);
    let candidates = [enclosing_along(&quad, d1), enclosing_along(&quad, d2)];
    let best = candidates
        .into_iter()
        .flatten()
        .min_by(|a, b| (a.1 * a.2).total_cmp(&(b.1 * b.2)));

    let bbox = match best {
        Some((center, w, h, theta)) => OrientedBox::new(center.x, center.y, w, h, theta)?,
        // both edge directions vanish only for a zero-size rectangle
        None => return Err(AdrError::DegenerateRectangle { width, height }),
    };
    Ok(Decoded {
        bbox: bbox.canonical(),
        clamped,
    })
}

/// Tightest rectangle around `pts` with one side parallel to `dir`:
/// `(center, extent along dir, extent across, angle of dir)`.
fn enclosing_along(pts: &[Point; 4], dir: (f64, f64)) -> Option<(Point, f64, f64, f64)> {
    let len = dir.0.hypot(dir.1);
    if len < 1e-12 {
        return None;
    }
    let u = (dir.0 / len, dir.1 / len);
    let v = (-u.1, u.0);
    let (mut lo_u, mut hi_u, mut lo_v, mut hi_v) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in pts {
        let pu = p.x * u.0 + p.y * u.1;
        let pv = p.x * v.0 + p.y * v.1;
        lo_u = lo_u.min(pu);
        hi_u = hi_u.max(pu);
        lo_v = lo_v.min(pv);
        hi_v = hi_v.max(pv);
    }
    let w = hi_u - lo_u;
    let h = hi_v - lo_v;
    if w <= 0.0 || h <= 0.0 {
        return None;
    }
    let mu = 0.5 * (lo_u + hi_u);
    let mv = 0.5 * (lo_v + hi_v);
    let center = Point::new(mu * u.0 + mv * v.0, mu * u.1 + mv * v.1);
    Some((center, w, h, normalize_angle(u.1.atan2(u.0))))
}

/// Per-box refinement state carried between decoder layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdrState {
    /// External rectangle of the layer-0 box.
    pub rect0: AxisRect,
    /// Initial edge distances `(α, β, γ, δ)` from the centre.
    pub edges0: [f64; 4],
    /// Initial vertex offsets `(ε, η)`.
    pub offsets0: [f64; 2],
    pub logits: LogitSet,
    pub layer: usize,
}

impl AdrState {
    /// Layer-0 state with uniform (all-zero) logits.
    pub fn from_box(b: &OrientedBox, cfg: &WeightingConfig) -> Result<Self, AdrError> {
        cfg.validate()?;
        let enc = encode_offsets(b);
        let r = enc.rect;
        let zeros = vec![0.0; cfg.bins + 1];
        Ok(Self {
            rect0: r,
            edges0: [r.width / 2.0, r.height / 2.0, r.width / 2.0, r.height / 2.0],
            offsets0: [enc.eps, enc.eta],
            logits: std::array::from_fn(|_| zeros.clone()),
            layer: 0,
        })
    }

    pub fn probabilities(&self) -> [Vec<f64>; NUM_DISTRIBUTIONS] {
        std::array::from_fn(|i| softmax(&self.logits[i]))
    }

    /// Refined `([α, β, γ, δ], [ε, η])` under the current logits.
    pub fn distances(&self, cfg: &WeightingConfig) -> Result<([f64; 4], [f64; 2]), AdrError> {
        let weights = cfg.weights()?;
        let probs = self.probabilities();
        let (wr, hr) = (self.rect0.width, self.rect0.height);
        let scale = [wr, hr, wr, hr, wr, hr];
        let corr: [f64; NUM_DISTRIBUTIONS] =
            std::array::from_fn(|i| scale[i] * expected_weight(&weights, &probs[i]));
        let edges = std::array::from_fn(|i| self.edges0[i] + corr[i]);
        let offsets = [self.offsets0[0] + corr[4], self.offsets0[1] + corr[5]];
        Ok((edges, offsets))
    }

    /// Decodes the box described by the current logits.
    pub fn decode(&self, cfg: &WeightingConfig) -> Result<Decoded, AdrError> {
        let ([alpha, beta, gamma, delta], [eps, eta]) = self.distances(cfg)?;
        let (cx, cy) = (self.rect0.cx, self.rect0.cy);
        decode_box(cx - alpha, cx + gamma, cy - beta, cy + delta, eps, eta)
    }
}

/// One decoder layer: add residual logits, then decode.
pub fn refine_step(
    state: &AdrState,
    delta_logits: &LogitSet,
    cfg: &WeightingConfig,
) -> Result<(AdrState, OrientedBox), AdrError> {
    cfg.validate()?;
    let expected = cfg.bins + 1;
    let mut next = state.clone();
    for (i, (cur, delta)) in next.logits.iter_mut().zip(delta_logits).enumerate() {
        if delta.len() != expected {
            return Err(AdrError::LogitLength {
                which: i,
                got: delta.len(),
                expected,
            });
        }
        if cur.len() != expected {
            return Err(AdrError::LogitLength {
                which: i,
                got: cur.len(),
                expected,
            });
        }
        for (c, d) in cur.iter_mut().zip(delta) {
            *c += d;
        }
        if cur.iter().any(|v| !v.is_finite()) {
            return Err(AdrError::NonFiniteLogit(i));
        }
    }
    next.layer += 1;
    let decoded = next.decode(cfg)?;
    Ok((next, decoded.bbox))
}

/// Runs every layer from uniform initial logits and returns the decoded box
/// after each one.
pub fn simulate_layers(
    b0: &OrientedBox,
    layers: &[LogitSet],
    cfg: &WeightingConfig,
) -> Result<Vec<OrientedBox>, AdrError> {
    let mut state = AdrState::from_box(b0, cfg)?;
    let mut out = Vec::with_capacity(layers.len());
    for delta in layers {
        let (next, b) = refine_step(&state, delta, cfg)?;
        out.push(b);
        state = next;
    }
    Ok(out)
}
