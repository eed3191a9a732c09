//! The `orbit` command-line tool.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::adr::{refine_step, AdrState, LogitSet, NUM_DISTRIBUTIONS};
use crate::config::RunConfig;
use crate::cost::{cost_registry, GroundTruth, MatchingCost};
use crate::fmt::sig6;
use crate::geometry::{normalize_angle, OrientedBox};
use crate::matching::{hungarian_assign, instability_with, InstabilityMode, LayerMatchRecord};
use crate::nms::{benchmark_nms, confidence_sweep, default_sweep, gen_scene, rotated_nms, NmsConfig};
use crate::ocd::{generate_denoise_groups, DenoiseQuery, Polarity};
use crate::scene::{load_scene, write_atomic, Scene, SceneFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "orbit", version, about = "Oriented-box detection toolkit")]
struct Cli {
    /// JSON run configuration; individual flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Read input angles as degrees instead of radians.
    #[arg(long, global = true)]
    degrees: bool,
    /// Random seed (overrides the config seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a grid of non-overlapping detections.
    GenScene(GenSceneArgs),
    /// Run confidence filtering and rotated NMS on a scene.
    Nms(NmsArgs),
    /// Time rotated NMS against box count.
    NmsBench(BenchArgs),
    /// Count surviving boxes across confidence thresholds.
    ConfSweep(SweepArgs),
    /// Combined matching-cost matrix between detections and ground truths.
    Cost(CostArgs),
    /// Optimal assignment of ground truths to detections.
    Match(CostArgs),
    /// Cross-layer matching instability per image.
    Instability(InstabilityArgs),
    /// Simulate distribution refinement of one box over decoder layers.
    AdrSim(AdrArgs),
    /// Generate contrastive denoising queries for the scene's ground truths.
    OcdGen(OcdArgs),
    /// Compare the pairwise costs of every detection against every ground truth.
    CostCompare(SceneArgs),
}

#[derive(Debug, Args)]
struct OutArg {
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SceneArgs {
    #[arg(long)]
    scene: PathBuf,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct GenSceneArgs {
    #[arg(long)]
    count: usize,
    /// Grid pitch.
    #[arg(long, default_value_t = 10.0)]
    spacing: f64,
    /// Also emit ground truths equal to the detections.
    #[arg(long)]
    with_gts: bool,
    /// Draw scores uniformly from [0, 1) instead of using 1.
    #[arg(long)]
    random_scores: bool,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct NmsFlags {
    #[arg(long)]
    iou_threshold: Option<f64>,
    #[arg(long)]
    conf_threshold: Option<f64>,
    /// Let boxes of different classes suppress each other.
    #[arg(long)]
    class_agnostic: bool,
}

#[derive(Debug, Args)]
struct NmsArgs {
    #[arg(long)]
    scene: PathBuf,
    #[command(flatten)]
    nms: NmsFlags,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "1000,2000,4000,8000,16000")]
    counts: Vec<usize>,
    #[arg(long, default_value_t = 9)]
    repeats: usize,
    #[arg(long, default_value_t = 10.0)]
    spacing: f64,
    #[command(flatten)]
    nms: NmsFlags,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    scene: PathBuf,
    /// Comma-separated thresholds; defaults to 0.005 through 0.25.
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<f64>>,
    #[command(flatten)]
    nms: NmsFlags,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct CostArgs {
    #[arg(long)]
    scene: PathBuf,
    /// Geometric distance term: one of the registered pair costs.
    #[arg(long)]
    distance: Option<String>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Indicator,
    BitwiseXor,
}

#[derive(Debug, Args)]
struct InstabilityArgs {
    /// JSON array of `{"image_id": ..., "layers": [[...], ...]}`.
    #[arg(long)]
    records: PathBuf,
    #[arg(long, value_enum, default_value = "indicator")]
    mode: ModeArg,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct AdrArgs {
    /// Initial box as `cx,cy,w,h,theta`.
    #[arg(long = "box")]
    bbox: String,
    /// JSON array of per-layer residual logits, each six vectors of N+1 values.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Number of random layers when no trace is given.
    #[arg(long, default_value_t = 6)]
    layers: usize,
    /// Half-width of the uniform random logit increments.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long)]
    bins: Option<usize>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug, Args)]
struct OcdArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    mode: Option<String>,
    /// Total denoising queries (positives plus negatives).
    #[arg(long)]
    total: Option<usize>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
}

type Outcome = Result<(), Failure>;

fn data(e: impl std::fmt::Display) -> Failure {
    Failure::Data(e.to_string())
}

/// Runs the tool on `argv` (program name first) and returns the exit code.
pub fn execute<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            EXIT_DATA
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p).map_err(data)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
        cfg.noise.seed = seed;
    }
    let degrees = cli.degrees;
    match cli.command {
        Command::GenScene(a) => cmd_gen_scene(a, &cfg),
        Command::Nms(a) => cmd_nms(a, &cfg, degrees),
        Command::NmsBench(a) => cmd_bench(a, &cfg),
        Command::ConfSweep(a) => cmd_sweep(a, &cfg, degrees),
        Command::Cost(a) => cmd_cost(a, &cfg, degrees),
        Command::Match(a) => cmd_match(a, &cfg, degrees),
        Command::Instability(a) => cmd_instability(a),
        Command::AdrSim(a) => cmd_adr(a, &cfg, degrees),
        Command::OcdGen(a) => cmd_ocd(a, &cfg, degrees),
        Command::CostCompare(a) => cmd_compare(a, &cfg, degrees),
    }
}

fn emit(out: &OutArg, text: &str) -> Outcome {
    match &out.out {
        Some(p) => write_atomic(p, text.as_bytes()).map_err(|e| data(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(data)
        }
    }
}

fn emit_json<T: Serialize>(out: &OutArg, value: &T) -> Outcome {
    let mut text = serde_json::to_string_pretty(value).map_err(data)?;
    text.push('\n');
    emit(out, &text)
}

fn read_scene(path: &Path, degrees: bool) -> Result<Scene, Failure> {
    let loaded = load_scene(path, degrees).map_err(data)?;
    for w in &loaded.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(loaded.scene)
}

fn nms_config(base: &NmsConfig, flags: &NmsFlags) -> Result<NmsConfig, Failure> {
    let cfg = NmsConfig {
        iou_threshold: flags.iou_threshold.unwrap_or(base.iou_threshold),
        conf_threshold: flags.conf_threshold.unwrap_or(base.conf_threshold),
        class_aware: base.class_aware && !flags.class_agnostic,
    };
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn cmd_gen_scene(a: GenSceneArgs, cfg: &RunConfig) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut dets = gen_scene(a.count, a.spacing, &mut rng).map_err(|e| Failure::Usage(e.to_string()))?;
    if a.random_scores {
        for d in &mut dets {
            d.score = rng.gen_range(0.0..1.0);
        }
    }
    let gts = dets
        .iter()
        .map(|d| GroundTruth {
            bbox: d.bbox,
            class_id: d.class_id,
        })
        .collect();
    let scene = Scene {
        detections: dets,
        gts,
        has_gts: a.with_gts,
    };
    emit_json(&a.out, &scene.to_file())
}

fn cmd_nms(a: NmsArgs, cfg: &RunConfig, degrees: bool) -> Outcome {
    let nms = nms_config(&cfg.nms, &a.nms)?;
    let scene = read_scene(&a.scene, degrees)?;
    let kept = Scene {
        detections: rotated_nms(&scene.detections, &nms),
        ..Scene::default()
    };
    emit_json(&a.out, &kept.to_file())
}

fn cmd_bench(a: BenchArgs, cfg: &RunConfig) -> Outcome {
    let nms = nms_config(&cfg.nms, &a.nms)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let rows = benchmark_nms(&a.counts, a.repeats, &nms, a.spacing, &mut rng)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let mut csv = String::from("count,median_us,p10_us,p90_us\n");
    for r in rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            r.count,
            sig6(r.median_us),
            sig6(r.p10_us),
            sig6(r.p90_us)
        ));
    }
    emit(&a.out, &csv)
}

fn cmd_sweep(a: SweepArgs, cfg: &RunConfig, degrees: bool) -> Outcome {
    let nms = nms_config(&cfg.nms, &a.nms)?;
    let thresholds = a.thresholds.unwrap_or_else(default_sweep);
    if let Some(t) = thresholds.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Failure::Usage(format!("threshold {t} outside [0, 1]")));
    }
    let scene = read_scene(&a.scene, degrees)?;
    let mut csv = String::from("threshold,kept\n");
    for (t, kept) in confidence_sweep(&scene.detections, &thresholds, &nms) {
        csv.push_str(&format!("{},{kept}\n", sig6(t)));
    }
    emit(&a.out, &csv)
}

fn matching_cost(cfg: &RunConfig, distance: Option<String>) -> Result<MatchingCost, Failure> {
    let mut cost_cfg = cfg.cost.clone();
    if let Some(d) = distance {
        cost_cfg.distance = d;
    }
    MatchingCost::from_config(&cost_cfg).map_err(|e| Failure::Usage(e.to_string()))
}

fn scene_with_gts(path: &Path, degrees: bool) -> Result<Scene, Failure> {
    let scene = read_scene(path, degrees)?;
    if !scene.has_gts {
        return Err(data(format!("{}: scene has no gts", path.display())));
    }
    Ok(scene)
}

#[derive(Serialize)]
struct MatrixOut {
    distance: String,
    preds: usize,
    gts: usize,
    /// `matrix[k][m]`: prediction `k` against ground truth `m`.
    matrix: Vec<Vec<f64>>,
}

fn cmd_cost(a: CostArgs, cfg: &RunConfig, degrees: bool) -> Outcome {
    let mc = matching_cost(cfg, a.distance)?;
    let scene = scene_with_gts(&a.scene, degrees)?;
    let m = mc.matrix(&scene.predictions(), &scene.gts).map_err(data)?;
    let out = MatrixOut {
        distance: mc.distance_name().to_string(),
        preds: m.rows(),
        gts: m.cols(),
        matrix: (0..m.rows()).map(|r| m.row(r).to_vec()).collect(),
    };
    emit_json(&a.out, &out)
}

#[derive(Serialize)]
struct PairOut {
    gt: usize,
    pred: usize,
    cost: f64,
}

#[derive(Serialize)]
struct MatchOut {
    pairs: Vec<PairOut>,
    total_cost: f64,
}

fn cmd_match(a: CostArgs, cfg: &RunConfig, degrees: bool) -> Outcome {
    let mc = matching_cost(cfg, a.distance)?;
    let scene = scene_with_gts(&a.scene, degrees)?;
    let m = mc.matrix(&scene.predictions(), &scene.gts).map_err(data)?;
    let assignment = hungarian_assign(&m).map_err(data)?;
    let out = MatchOut {
        pairs: assignment
            .pairs
            .iter()
            .map(|&(gt, pred)| PairOut {
                gt,
                pred,
                cost: m.get(pred, gt),
            })
            .collect(),
        total_cost: assignment.total_cost,
    };
    emit_json(&a.out, &out)
}

/// Parses an instability records file into `(image_id, record)` pairs.
pub fn parse_records(text: &str, origin: &str) -> Result<Vec<(String, LayerMatchRecord)>, String> {
    let root: Value = serde_json::from_str(text).map_err(|e| format!("{origin}: malformed JSON: {e}"))?;
    let items = root
        .as_array()
        .ok_or_else(|| format!("{origin}: top level must be an array of records"))?;
    let mut out = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let at = |msg: String| format!("{origin}: records[{i}]: {msg}");
        let obj = item.as_object().ok_or_else(|| at("record must be an object".into()))?;
        if let Some(k) = obj.keys().find(|k| *k != "image_id" && *k != "layers") {
            return Err(at(format!("unknown field {k:?}")));
        }
        let id = match obj.get("image_id") {
            Some(Value::String(s)) => s.clone(),
            Some(Value::Number(n)) => n.to_string(),
            Some(_) => return Err(at("field image_id must be a string or number".into())),
            None => i.to_string(),
        };
        let layers = obj.get("layers").ok_or_else(|| at("missing field layers".into()))?;
        let layers: Vec<Vec<usize>> =
            serde_json::from_value(layers.clone()).map_err(|e| at(format!("field layers: {e}")))?;
        let rec = LayerMatchRecord::new(layers).map_err(|e| at(format!("field layers: {e}")))?;
        out.push((id, rec));
    }
    Ok(out)
}

fn cmd_instability(a: InstabilityArgs) -> Outcome {
    let origin = a.records.display().to_string();
    let text = std::fs::read_to_string(&a.records).map_err(|e| data(format!("{origin}: {e}")))?;
    let records = parse_records(&text, &origin).map_err(Failure::Data)?;
    let mode = match a.mode {
        ModeArg::Indicator => InstabilityMode::Indicator,
        ModeArg::BitwiseXor => InstabilityMode::BitwiseXor,
    };
    let mut csv = String::from("image_id,IS\n");
    let mut sum = 0.0;
    for (id, rec) in &records {
        let is = instability_with(rec, mode).map_err(data)?;
        sum += is;
        csv.push_str(&format!("{id},{}\n", sig6(is)));
    }
    if !records.is_empty() {
        csv.push_str(&format!("mean,{}\n", sig6(sum / records.len() as f64)));
    }
    emit(&a.out, &csv)
}

#[derive(Serialize)]
struct BoxOut {
    cx: f64,
    cy: f64,
    w: f64,
    h: f64,
    theta: f64,
}

impl From<&OrientedBox> for BoxOut {
    fn from(b: &OrientedBox) -> Self {
        Self {
            cx: b.cx(),
            cy: b.cy(),
            w: b.w(),
            h: b.h(),
            theta: b.theta(),
        }
    }
}

#[derive(Serialize)]
struct LayerOut {
    layer: usize,
    #[serde(flatten)]
    bbox: BoxOut,
    clamped: bool,
    delta_logits: LogitSet,
}

#[derive(Serialize)]
struct AdrOut {
    bins: usize,
    initial: BoxOut,
    layers: Vec<LayerOut>,
}

fn parse_box(s: &str, degrees: bool) -> Result<OrientedBox, Failure> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::Usage(format!("--box {s:?}: {e}")))?;
    let [cx, cy, w, h, theta] = parts[..] else {
        return Err(Failure::Usage(format!("--box {s:?}: expected cx,cy,w,h,theta")));
    };
    let theta = if degrees { theta.to_radians() } else { theta };
    OrientedBox::new(cx, cy, w, h, normalize_angle(theta)).map_err(|e| Failure::Usage(format!("--box: {e}")))
}

fn cmd_adr(a: AdrArgs, cfg: &RunConfig, degrees: bool) -> Outcome {
    let mut wcfg = cfg.adr;
    if let Some(bins) = a.bins {
        wcfg.bins = bins;
    }
    wcfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let b0 = parse_box(&a.bbox, degrees)?;
    let deltas: Vec<LogitSet> = match &a.trace {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| data(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| data(format!("{}: {e}", p.display())))?
        }
        None => {
            if !(a.scale >= 0.0 && a.scale.is_finite()) {
                return Err(Failure::Usage(format!("--scale {} must be finite and non-negative", a.scale)));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            (0..a.layers)
                .map(|_| {
                    std::array::from_fn::<_, NUM_DISTRIBUTIONS, _>(|_| {
                        (0..=wcfg.bins)
                            .map(|_| if a.scale > 0.0 { rng.gen_range(-a.scale..=a.scale) } else { 0.0 })
                            .collect()
                    })
                })
                .collect()
        }
    };
    let mut state = AdrState::from_box(&b0, &wcfg).map_err(data)?;
    let mut layers = Vec::with_capacity(deltas.len());
    for delta in deltas {
        let (next, bbox) = refine_step(&state, &delta, &wcfg).map_err(data)?;
        let clamped = next.decode(&wcfg).map_err(data)?.clamped;
        layers.push(LayerOut {
            layer: next.layer,
            bbox: BoxOut::from(&bbox),
            clamped,
            delta_logits: delta,
        });
        state = next;
    }
    emit_json(
        &a.out,
        &AdrOut {
            bins: wcfg.bins,
            initial: BoxOut::from(&b0),
            layers,
        },
    )
}

#[derive(Serialize)]
struct QueryOut {
    gt_index: usize,
    group: usize,
    polarity: Polarity,
    #[serde(flatten)]
    bbox: BoxOut,
}

impl QueryOut {
    fn new(q: &DenoiseQuery, polarity: Polarity) -> Self {
        Self {
            gt_index: q.gt_index,
            group: q.group,
            polarity,
            bbox: BoxOut::from(&q.bbox),
        }
    }
}

fn cmd_ocd(a: OcdArgs, cfg: &RunConfig, degrees: bool) -> Outcome {
    let mut ncfg = cfg.noise.clone();
    if let Some(m) = a.mode {
        ncfg.mode = m;
    }
    if let Some(t) = a.total {
        ncfg.total_queries = t;
    }
    ncfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let scene = scene_with_gts(&a.scene, degrees)?;
    let gts: Vec<OrientedBox> = scene.gts.iter().map(|g| g.bbox).collect();
    let groups = generate_denoise_groups(&gts, &ncfg).map_err(data)?;
    let out: Vec<QueryOut> = groups
        .positives
        .iter()
        .zip(&groups.negatives)
        .flat_map(|(p, n)| [QueryOut::new(p, Polarity::Positive), QueryOut::new(n, Polarity::Negative)])
        .collect();
    emit_json(&a.out, &out)
}

fn cmd_compare(a: SceneArgs, cfg: &RunConfig, degrees: bool) -> Outcome {
    let registry = cost_registry(&cfg.cost);
    let columns = ["l1", "kld", "hausdorff", "chamfer"];
    let costs: Vec<_> = columns
        .iter()
        .map(|n| registry.get(n).expect("built-in cost registered"))
        .collect();
    let scene = scene_with_gts(&a.scene, degrees)?;
    let mut csv = format!("pred,gt,{}\n", columns.join(","));
    for (k, d) in scene.detections.iter().enumerate() {
        for (m, g) in scene.gts.iter().enumerate() {
            csv.push_str(&format!("{k},{m}"));
            for c in &costs {
                let v = c.cost(&d.bbox, &g.bbox).map_err(data)?;
                csv.push(',');
                csv.push_str(&sig6(v));
            }
            csv.push('\n');
        }
    }
    emit(&a.out, &csv)
}

/// Writes a scene file, for callers building fixtures programmatically.
pub fn write_scene(path: &Path, scene: &SceneFile) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(scene).map_err(std::io::Error::other)?;
    write_atomic(path, text.as_bytes())
}
