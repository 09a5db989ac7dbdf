//! Command-line front end.
//!
//! Every command writes one run manifest next to its result: `<out>.manifest.json`
//! when the result goes to a file, otherwise the `--manifest` path or a single
//! JSON line on stderr.
//!
//! Exit codes: 0 success, 2 argument or format error, 3 I/O error, 4 segmenter
//! failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clickgen::{generate_click_with, CenterSelection};
use crate::crop::compute_crop;
use crate::error::{Error, Result};
use crate::grid::{Grid, Mask, Shape};
use crate::harness::{evaluate_case, run_episode, BBoxMode, EpisodeConfig, EpisodeResult};
use crate::prompts::BBox3;
use crate::segmenter::{
    ExternalSegmenter, OracleConfig, OracleSegmenter, RegionGrowSegmenter, Segmenter,
};
use crate::volume::{decode_npy, preprocess_ct, preprocess_percentile, Volume3, WindowPreset};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_SEGMENTER: i32 = 4;

/// Environment variable consulted when `--seed` is not given.
pub const SEED_ENV: &str = "VOXPROMPT_SEED";

/// Maps a library error onto the process exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => EXIT_IO,
        e if e.is_segmenter() => EXIT_SEGMENTER,
        _ => EXIT_USAGE,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "voxprompt",
    version,
    about = "Interaction simulation for interactive 3D segmentation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert an NPY or VVOL array to VVOL.
    Convert(ConvertArgs),
    /// Run one interactive episode and write its report.
    Simulate(SimulateArgs),
    /// Propose the next corrective click for a prediction.
    Clickgen(ClickgenArgs),
    /// Compute the crop window for a box.
    Crop(CropArgs),
    /// Window or normalise an image to u8.
    Preprocess(PreprocessArgs),
    /// Evaluate a set of multiclass cases.
    Evaluate(EvaluateArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Convert(_) => "convert",
            Command::Simulate(_) => "simulate",
            Command::Clickgen(_) => "clickgen",
            Command::Crop(_) => "crop",
            Command::Preprocess(_) => "preprocess",
            Command::Evaluate(_) => "evaluate",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Npy,
    Vvol,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Vvol,
}

#[derive(Debug, Args, Serialize)]
pub struct ConvertArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Input format; guessed from the extension when omitted.
    #[arg(long)]
    pub from: Option<InputFormat>,
    #[arg(long, value_enum, default_value = "vvol")]
    pub to: OutputFormat,
}

/// Box as `z0,y0,x0,z1,y1,x1`, upper corner exclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct BBoxArg(pub BBox3);

impl FromStr for BBoxArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let v = parse_list(s)?;
        if v.len() != 6 {
            return Err(format!(
                "expected 6 comma-separated integers, got {}",
                v.len()
            ));
        }
        BBox3::new([v[0], v[1], v[2]], [v[3], v[4], v[5]])
            .map(BBoxArg)
            .map_err(|e| e.to_string())
    }
}

/// One size for every axis, or `D,H,W`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Dims(pub Shape);

impl FromStr for Dims {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let v = parse_list(s)?;
        let dims = match v[..] {
            [n] => [n; 3],
            [d, h, w] => [d, h, w],
            _ => return Err(format!("expected 1 or 3 integers, got {}", v.len())),
        };
        if dims.contains(&0) {
            return Err("sizes must be >= 1".into());
        }
        Ok(Dims(dims))
    }
}

fn parse_list(s: &str) -> std::result::Result<Vec<usize>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}")))
        .collect()
}

/// `oracle`, `growth` or `exec:<program>`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(into = "String")]
pub enum SegmenterKind {
    Oracle,
    Growth,
    Exec(PathBuf),
}

impl FromStr for SegmenterKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "oracle" => Ok(SegmenterKind::Oracle),
            "growth" => Ok(SegmenterKind::Growth),
            _ => match s.strip_prefix("exec:") {
                Some(p) if !p.is_empty() => Ok(SegmenterKind::Exec(p.into())),
                _ => Err(format!(
                    "unknown segmenter {s:?}; use oracle, growth or exec:<path>"
                )),
            },
        }
    }
}

impl From<SegmenterKind> for String {
    fn from(k: SegmenterKind) -> String {
        match k {
            SegmenterKind::Oracle => "oracle".into(),
            SegmenterKind::Growth => "growth".into(),
            SegmenterKind::Exec(p) => format!("exec:{}", p.display()),
        }
    }
}

/// Segmenter and episode settings shared by `simulate` and `evaluate`.
#[derive(Clone, Debug, Args, Serialize)]
pub struct EpisodeArgs {
    #[arg(long, default_value = "oracle")]
    pub segmenter: SegmenterKind,
    #[arg(long, default_value_t = 5)]
    pub clicks: usize,
    /// Wall-clock seconds per class.
    #[arg(long, default_value_t = 90.0)]
    pub budget: f64,
    /// NSD tolerance in voxels.
    #[arg(long, default_value_t = 2.0)]
    pub tau: f64,
    #[arg(long, default_value = "192")]
    pub patch: Dims,
    /// Falls back to $VOXPROMPT_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Break ties between equally deep click centres at random (seeded).
    #[arg(long)]
    pub sample_ties: bool,
    /// Oracle: fraction of voxels flipped before any click.
    #[arg(long, default_value_t = 0.0)]
    pub flip_rate: f64,
    /// Oracle: number of wrong-label spheres before any click.
    #[arg(long, default_value_t = 0)]
    pub blob_count: usize,
    #[arg(long, default_value_t = 3)]
    pub blob_radius: usize,
    /// Oracle: per-click corruption multiplier.
    #[arg(long, default_value_t = 1.0)]
    pub decay: f64,
    /// Region growing tolerance in image intensity units (sized for u8 input).
    #[arg(long, default_value_t = 16.0)]
    pub tolerance: f32,
    /// Per-call timeout for exec segmenters; defaults to the budget.
    #[arg(long)]
    pub seg_timeout: Option<f64>,
}

impl EpisodeArgs {
    fn episode_config(&self, seed: u64, bbox_mode: BBoxMode) -> Result<EpisodeConfig> {
        let cfg = EpisodeConfig {
            n_clicks: self.clicks,
            bbox_mode,
            per_class_budget: self.budget,
            seed,
            tau: self.tau,
            patch: self.patch.0,
            sample_ties: self.sample_ties,
            ..EpisodeConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn build(&self, gt: &Mask, seed: u64) -> Result<Box<dyn Segmenter>> {
        Ok(match &self.segmenter {
            SegmenterKind::Oracle => Box::new(OracleSegmenter::new(
                gt.clone(),
                OracleConfig {
                    flip_rate: self.flip_rate,
                    blob_count: self.blob_count,
                    blob_radius: self.blob_radius,
                    decay: self.decay,
                    seed,
                },
            )?),
            SegmenterKind::Growth => Box::new(RegionGrowSegmenter::new(self.tolerance)),
            SegmenterKind::Exec(program) => {
                let secs = self.seg_timeout.unwrap_or(self.budget);
                let timeout = Duration::try_from_secs_f64(secs)
                    .map_err(|_| Error::InvalidConfig(format!("bad segmenter timeout {secs}")))?;
                Box::new(ExternalSegmenter::new(program, timeout))
            }
        })
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, conflicts_with_all = ["default_bbox", "no_bbox"])]
    pub bbox: Option<BBoxArg>,
    /// Use the central-third box (the default when no box is given).
    #[arg(long, conflicts_with = "no_bbox")]
    pub default_bbox: bool,
    /// Run without a box; the first click is placed against an empty prediction.
    #[arg(long)]
    pub no_bbox: bool,
    #[command(flatten)]
    pub episode: EpisodeArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ClickgenArgs {
    /// Probability volume.
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    /// Break ties between equally deep centres at random with this seed.
    #[arg(long)]
    pub sample_ties: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the proposal here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CropArgs {
    #[arg(long)]
    pub bbox: BBoxArg,
    #[arg(long, default_value = "192")]
    pub patch: Dims,
    /// Volume shape `D,H,W`; read from `--image` when omitted.
    #[arg(long, required_unless_present = "image")]
    pub shape: Option<Dims>,
    #[arg(long)]
    pub image: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct PreprocessArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// CT window preset (soft, lung, brain, bone). Without it, intensities
    /// are clipped to the 0.5/99.5 percentiles.
    #[arg(long)]
    pub window: Option<String>,
    /// Custom CT window width; requires `--level`.
    #[arg(long, requires = "level", conflicts_with = "window")]
    pub width: Option<f64>,
    #[arg(long, requires = "width")]
    pub level: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    /// JSON file listing the cases; relative paths resolve against its directory.
    #[arg(long)]
    pub cases: PathBuf,
    #[command(flatten)]
    pub episode: EpisodeArgs,
    /// Run without a box for classes that have none, instead of the default box.
    #[arg(long)]
    pub no_default_bbox: bool,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Write each case's fused label map as `<id>.vvol` (u8) here.
    #[arg(long)]
    pub fused_dir: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Provenance record written alongside every result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    /// SHA-256 (hex) per input file, keyed by path as given.
    pub inputs: BTreeMap<String, String>,
    pub version: String,
    pub seed: Option<u64>,
}

/// One entry of the `evaluate` cases file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseEntry {
    pub id: String,
    #[serde(default)]
    pub modality: String,
    pub image: PathBuf,
    /// One binary mask per class.
    pub gts: Vec<PathBuf>,
    /// Per-class boxes as `[z0,y0,x0,z1,y1,x1]`; missing entries mean none.
    #[serde(default)]
    pub bboxes: Vec<Option<[usize; 6]>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CasesFile {
    pub cases: Vec<CaseEntry>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub dsc_auc: f64,
    pub nsd_auc: f64,
    pub dsc_final: f64,
    pub nsd_final: f64,
}

impl Aggregate {
    fn mean<'a>(items: impl IntoIterator<Item = &'a Aggregate>) -> Aggregate {
        let mut sum = Aggregate::default();
        let mut n = 0usize;
        for a in items {
            sum.dsc_auc += a.dsc_auc;
            sum.nsd_auc += a.nsd_auc;
            sum.dsc_final += a.dsc_final;
            sum.nsd_final += a.nsd_final;
            n += 1;
        }
        if n == 0 {
            return sum;
        }
        let n = n as f64;
        Aggregate {
            dsc_auc: sum.dsc_auc / n,
            nsd_auc: sum.nsd_auc / n,
            dsc_final: sum.dsc_final / n,
            nsd_final: sum.nsd_final / n,
        }
    }
}

impl From<&EpisodeResult> for Aggregate {
    fn from(r: &EpisodeResult) -> Self {
        Aggregate {
            dsc_auc: r.dsc_auc,
            nsd_auc: r.nsd_auc,
            dsc_final: r.dsc_final,
            nsd_final: r.nsd_final,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub id: String,
    pub modality: String,
    /// Class means.
    #[serde(flatten)]
    pub mean: Aggregate,
    pub classes: Vec<EpisodeResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModalityReport {
    pub cases: usize,
    #[serde(flatten)]
    pub mean: Aggregate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub cases: Vec<CaseReport>,
    pub modalities: BTreeMap<String, ModalityReport>,
    /// Mean over cases.
    pub mean: Aggregate,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code; diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let name = cli.command.name();
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("voxprompt {name}: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Convert(a) => cmd_convert(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Clickgen(a) => cmd_clickgen(&a),
        Command::Crop(a) => cmd_crop(&a),
        Command::Preprocess(a) => cmd_preprocess(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
    }
}

/// Reads input files and remembers their digests.
#[derive(Default)]
struct Inputs(BTreeMap<String, String>);

impl Inputs {
    fn read(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path).map_err(with_path(path))?;
        self.0.insert(
            path.display().to_string(),
            hex::encode(Sha256::digest(&bytes)),
        );
        Ok(bytes)
    }

    fn volume(&mut self, path: &Path) -> Result<Volume3> {
        Volume3::from_vvol_bytes(&self.read(path)?)
    }
}

fn with_path(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(with_path(path))
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            Error::InvalidConfig(format!("{SEED_ENV}={v:?} is not an unsigned integer"))
        }),
        Err(_) => Ok(0),
    }
}

fn manifest(
    command: &str,
    config: &impl Serialize,
    inputs: Inputs,
    seed: Option<u64>,
) -> RunManifest {
    RunManifest {
        command: command.into(),
        config: serde_json::to_value(config).expect("config serializes"),
        inputs: inputs.0,
        version: env!("CARGO_PKG_VERSION").into(),
        seed,
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn to_json(value: &impl Serialize) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

/// Writes a result to `out` (or stdout) and the manifest to its place.
fn emit(
    result: &str,
    out: Option<&Path>,
    manifest_flag: Option<&Path>,
    m: &RunManifest,
) -> Result<()> {
    match out {
        Some(path) => {
            write_file(path, result)?;
            write_file(
                &manifest_flag.map_or_else(|| manifest_path(path), Path::to_path_buf),
                to_json(m),
            )?;
        }
        None => {
            std::io::stdout().write_all(result.as_bytes())?;
            match manifest_flag {
                Some(p) => write_file(p, to_json(m))?,
                None => eprintln!("{}", serde_json::to_string(m).expect("manifest serializes")),
            }
        }
    }
    Ok(())
}

pub fn cmd_convert(a: &ConvertArgs) -> Result<()> {
    let mut inputs = Inputs::default();
    let bytes = inputs.read(&a.input)?;
    let from = a
        .from
        .unwrap_or_else(|| match a.input.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("npy") => InputFormat::Npy,
            _ => InputFormat::Vvol,
        });
    let vol = match from {
        InputFormat::Npy => decode_npy(&bytes)?,
        InputFormat::Vvol => Volume3::from_vvol_bytes(&bytes)?,
    };
    write_file(&a.output, vol.to_vvol_bytes())?;
    let m = manifest("convert", a, inputs, None);
    write_file(&manifest_path(&a.output), to_json(&m))?;
    Ok(())
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let seed = resolve_seed(a.episode.seed)?;
    let mut inputs = Inputs::default();
    let image = inputs.volume(&a.image)?.to_f32();
    let gt = inputs.volume(&a.gt)?.to_mask();
    let mode = if a.no_bbox {
        BBoxMode::AbsentNone
    } else if a.bbox.is_some() {
        BBoxMode::Provided
    } else {
        BBoxMode::AbsentUseDefault
    };
    let cfg = a.episode.episode_config(seed, mode)?;
    let mut seg = a.episode.build(&gt, seed)?;
    let report = run_episode(&image, &gt, a.bbox.map(|b| b.0), seg.as_mut(), &cfg)?;
    let m = manifest(
        "simulate",
        &serde_json::json!({ "args": a, "episode": cfg }),
        inputs,
        Some(seed),
    );
    emit(&to_json(&report), Some(&a.out), None, &m)
}

pub fn cmd_clickgen(a: &ClickgenArgs) -> Result<()> {
    let seed = resolve_seed(a.seed)?;
    let mut inputs = Inputs::default();
    let pred = inputs.volume(&a.pred)?.to_f32();
    let gt = inputs.volume(&a.gt)?.to_mask();
    let selection = if a.sample_ties {
        CenterSelection::SeededUniform(seed)
    } else {
        CenterSelection::FirstArgmax
    };
    let proposal = generate_click_with(&pred, &gt, selection)?;
    let seed = a.sample_ties.then_some(seed);
    let m = manifest("clickgen", a, inputs, seed);
    emit(
        &to_json(&proposal),
        a.out.as_deref(),
        a.manifest.as_deref(),
        &m,
    )
}

pub fn cmd_crop(a: &CropArgs) -> Result<()> {
    let mut inputs = Inputs::default();
    let shape = match (a.shape, &a.image) {
        (Some(s), _) => s.0,
        (None, Some(p)) => inputs.volume(p)?.shape(),
        (None, None) => return Err(Error::InvalidConfig("need --shape or --image".into())),
    };
    let spec = compute_crop(&a.bbox.0, a.patch.0, shape)?;
    let m = manifest("crop", a, inputs, None);
    emit(&to_json(&spec), a.out.as_deref(), a.manifest.as_deref(), &m)
}

pub fn cmd_preprocess(a: &PreprocessArgs) -> Result<()> {
    let mut inputs = Inputs::default();
    let vol = inputs.volume(&a.input)?;
    let preset = match (&a.window, a.width, a.level) {
        (Some(name), _, _) => Some(WindowPreset::by_name(name).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "unknown window {name:?}; use soft, lung, brain or bone"
            ))
        })?),
        (None, Some(w), Some(l)) => Some(WindowPreset::new("custom", w, l)?),
        _ => None,
    };
    let out: Grid<u8> = match &preset {
        Some(p) => preprocess_ct(&vol, p)?,
        None => preprocess_percentile(&vol),
    };
    write_file(&a.output, Volume3::from(out).to_vvol_bytes())?;
    let m = manifest(
        "preprocess",
        &serde_json::json!({ "args": a, "window": preset }),
        inputs,
        None,
    );
    write_file(&manifest_path(&a.output), to_json(&m))?;
    Ok(())
}

fn bbox_from_array(v: [usize; 6]) -> Result<BBox3> {
    BBox3::new([v[0], v[1], v[2]], [v[3], v[4], v[5]])
}

fn evaluate_one(
    entry: &CaseEntry,
    base: &Path,
    args: &EvaluateArgs,
    cfg: &EpisodeConfig,
) -> Result<(CaseReport, Inputs, Option<Grid<u8>>)> {
    let mut inputs = Inputs::default();
    let image = inputs.volume(&base.join(&entry.image))?.to_f32();
    let gts = entry
        .gts
        .iter()
        .map(|p| Ok(inputs.volume(&base.join(p))?.to_mask()))
        .collect::<Result<Vec<_>>>()?;
    if entry.bboxes.len() > gts.len() {
        return Err(Error::WrongLength {
            expected: gts.len(),
            found: entry.bboxes.len(),
        });
    }
    let mut bboxes = entry
        .bboxes
        .iter()
        .map(|b| b.map(bbox_from_array).transpose())
        .collect::<Result<Vec<_>>>()?;
    bboxes.resize(gts.len(), None);

    let case = evaluate_case(
        &image,
        &gts,
        &bboxes,
        |_, gt| args.episode.build(gt, cfg.seed),
        cfg,
    )?;
    let aggregates: Vec<Aggregate> = case.episodes.iter().map(Aggregate::from).collect();
    let fused = match args.fused_dir {
        Some(_) => {
            if gts.len() > u8::MAX as usize {
                return Err(Error::InvalidConfig(format!(
                    "{} classes do not fit a u8 label map",
                    gts.len()
                )));
            }
            Some(case.fused.map(|&l| l as u8))
        }
        None => None,
    };
    let report = CaseReport {
        id: entry.id.clone(),
        modality: entry.modality.clone(),
        mean: Aggregate::mean(&aggregates),
        classes: case.episodes,
    };
    Ok((report, inputs, fused))
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> Result<()> {
    let seed = resolve_seed(a.episode.seed)?;
    let mode = if a.no_default_bbox {
        BBoxMode::AbsentNone
    } else {
        BBoxMode::AbsentUseDefault
    };
    let cfg = a.episode.episode_config(seed, mode)?;
    let mut inputs = Inputs::default();
    let listing: CasesFile = serde_json::from_slice(&inputs.read(&a.cases)?)
        .map_err(|e| Error::InvalidConfig(format!("cases file: {e}")))?;
    let base = a.cases.parent().unwrap_or(Path::new("")).to_path_buf();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let results = pool.install(|| {
        listing
            .cases
            .par_iter()
            .map(|c| evaluate_one(c, &base, a, &cfg))
            .collect::<Vec<_>>()
    });

    let mut cases = Vec::with_capacity(results.len());
    for r in results {
        let (report, case_inputs, fused) = r?;
        inputs.0.extend(case_inputs.0);
        if let (Some(dir), Some(map)) = (&a.fused_dir, fused) {
            fs::create_dir_all(dir).map_err(with_path(dir))?;
            write_file(
                &dir.join(format!("{}.vvol", report.id)),
                Volume3::from(map).to_vvol_bytes(),
            )?;
        }
        cases.push(report);
    }

    let mut by_modality: BTreeMap<String, Vec<Aggregate>> = BTreeMap::new();
    for c in &cases {
        by_modality
            .entry(c.modality.clone())
            .or_default()
            .push(c.mean);
    }
    let modalities = by_modality
        .into_iter()
        .map(|(k, v)| {
            let report = ModalityReport {
                cases: v.len(),
                mean: Aggregate::mean(&v),
            };
            (k, report)
        })
        .collect();
    let report = EvaluationReport {
        mean: Aggregate::mean(cases.iter().map(|c| &c.mean)),
        cases,
        modalities,
    };
    let m = manifest(
        "evaluate",
        &serde_json::json!({ "args": a, "episode": cfg }),
        inputs,
        Some(seed),
    );
    emit(&to_json(&report), Some(&a.out), None, &m)
}
