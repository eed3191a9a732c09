//! Scene files: detections plus optional ground truths, as JSON.
//!
//! ```json
//! {"detections": [{"cx": 0, "cy": 0, "w": 4, "h": 2, "theta": 0.3, "score": 0.9, "class_id": 0}],
//!  "gts": [{"cx": 0, "cy": 0, "w": 4, "h": 2, "theta": 0.3, "class_id": 0}]}
//! ```

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::cost::{GroundTruth, Prediction};
use crate::geometry::{normalize_angle, OrientedBox};
use crate::nms::Detection;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: malformed JSON: {msg}")]
    Json { path: String, msg: String },
    #[error("{path}: {section}[{index}]: {msg}")]
    Record {
        path: String,
        section: &'static str,
        index: usize,
        msg: String,
    },
    #[error("{path}: {msg}")]
    Shape { path: String, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionRecord {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    pub theta: f64,
    pub score: f64,
    pub class_id: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GtRecord {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    pub theta: f64,
    pub class_id: usize,
}

/// On-disk layout.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub detections: Vec<DetectionRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gts: Option<Vec<GtRecord>>,
}

/// A validated scene.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    pub detections: Vec<Detection>,
    pub gts: Vec<GroundTruth>,
    pub has_gts: bool,
}

impl Scene {
    pub fn num_classes(&self) -> usize {
        let d = self.detections.iter().map(|d| d.class_id + 1).max().unwrap_or(0);
        let g = self.gts.iter().map(|g| g.class_id + 1).max().unwrap_or(0);
        d.max(g).max(1)
    }

    /// Detections as matcher predictions: the detection score on its own
    /// class, zero elsewhere.
    pub fn predictions(&self) -> Vec<Prediction> {
        let n = self.num_classes();
        self.detections
            .iter()
            .map(|d| {
                let mut class_scores = vec![0.0; n];
                class_scores[d.class_id] = d.score;
                Prediction {
                    bbox: d.bbox,
                    class_scores,
                }
            })
            .collect()
    }

    pub fn to_file(&self) -> SceneFile {
        SceneFile {
            detections: self.detections.iter().map(detection_record).collect(),
            gts: self.has_gts.then(|| {
                self.gts
                    .iter()
                    .map(|g| GtRecord {
                        cx: g.bbox.cx(),
                        cy: g.bbox.cy(),
                        w: g.bbox.w(),
                        h: g.bbox.h(),
                        theta: g.bbox.theta(),
                        class_id: g.class_id,
                    })
                    .collect()
            }),
        }
    }
}

pub fn detection_record(d: &Detection) -> DetectionRecord {
    DetectionRecord {
        cx: d.bbox.cx(),
        cy: d.bbox.cy(),
        w: d.bbox.w(),
        h: d.bbox.h(),
        theta: d.bbox.theta(),
        score: d.score,
        class_id: d.class_id,
    }
}

/// A parsed scene plus any angle-normalization warnings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Loaded {
    pub scene: Scene,
    pub warnings: Vec<String>,
}

pub fn load_scene(path: &Path, degrees: bool) -> Result<Loaded, SceneError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| SceneError::Io {
        path: shown.clone(),
        source,
    })?;
    parse_scene(&text, &shown, degrees)
}

/// Parses and validates scene JSON; `origin` names the source in errors.
pub fn parse_scene(text: &str, origin: &str, degrees: bool) -> Result<Loaded, SceneError> {
    let root: Value = serde_json::from_str(text).map_err(|e| SceneError::Json {
        path: origin.to_string(),
        msg: e.to_string(),
    })?;
    let obj = root.as_object().ok_or_else(|| SceneError::Shape {
        path: origin.to_string(),
        msg: "top level must be an object".into(),
    })?;
    if let Some(key) = obj.keys().find(|k| *k != "detections" && *k != "gts") {
        return Err(SceneError::Shape {
            path: origin.to_string(),
            msg: format!("unknown key {key:?}"),
        });
    }
    let dets = section(obj.get("detections"), "detections", origin)?.unwrap_or_default();
    let gts = section(obj.get("gts"), "gts", origin)?;

    let mut warnings = Vec::new();
    let mut scene = Scene {
        has_gts: gts.is_some(),
        ..Scene::default()
    };

    for (index, v) in dets.iter().enumerate() {
        let rec: DetectionRecord = record(v, origin, "detections", index)?;
        let bad = |msg: String| SceneError::Record {
            path: origin.to_string(),
            section: "detections",
            index,
            msg,
        };
        let bbox = build_box(
            [rec.cx, rec.cy, rec.w, rec.h, rec.theta],
            degrees,
            "detections",
            index,
            &mut warnings,
        )
        .map_err(bad)?;
        if !(0.0..=1.0).contains(&rec.score) {
            return Err(bad(format!("field score = {} outside [0, 1]", rec.score)));
        }
        scene.detections.push(Detection {
            bbox,
            score: rec.score,
            class_id: rec.class_id,
        });
    }
    for (index, v) in gts.unwrap_or_default().iter().enumerate() {
        let rec: GtRecord = record(v, origin, "gts", index)?;
        let bbox = build_box(
            [rec.cx, rec.cy, rec.w, rec.h, rec.theta],
            degrees,
            "gts",
            index,
            &mut warnings,
        )
        .map_err(|msg| SceneError::Record {
            path: origin.to_string(),
            section: "gts",
            index,
            msg,
        })?;
        scene.gts.push(GroundTruth {
            bbox,
            class_id: rec.class_id,
        });
    }
    Ok(Loaded { scene, warnings })
}

fn section<'a>(
    v: Option<&'a Value>,
    name: &str,
    origin: &str,
) -> Result<Option<Vec<&'a Value>>, SceneError> {
    match v {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Array(items)) => Ok(Some(items.iter().collect())),
        Some(_) => Err(SceneError::Shape {
            path: origin.to_string(),
            msg: format!("{name} must be an array"),
        }),
    }
}

fn record<T: for<'de> Deserialize<'de>>(
    v: &Value,
    origin: &str,
    section: &'static str,
    index: usize,
) -> Result<T, SceneError> {
    T::deserialize(v).map_err(|e| SceneError::Record {
        path: origin.to_string(),
        section,
        index,
        msg: e.to_string(),
    })
}

fn build_box(
    [cx, cy, w, h, theta]: [f64; 5],
    degrees: bool,
    section: &str,
    index: usize,
    warnings: &mut Vec<String>,
) -> Result<OrientedBox, String> {
    for (name, v) in [("cx", cx), ("cy", cy), ("w", w), ("h", h), ("theta", theta)] {
        if !v.is_finite() {
            return Err(format!("field {name} is not finite"));
        }
    }
    if w <= 0.0 {
        return Err(format!("field w = {w} must be positive"));
    }
    if h <= 0.0 {
        return Err(format!("field h = {h} must be positive"));
    }
    let theta = if degrees { theta.to_radians() } else { theta };
    let wrapped = normalize_angle(theta);
    if wrapped != theta {
        warnings.push(format!(
            "{section}[{index}]: theta {theta} normalized to {wrapped}"
        ));
    }
    OrientedBox::new(cx, cy, w, h, wrapped).map_err(|e| e.to_string())
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
