use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{fuse_multiclass, EpisodeConfig, PatchFrame, PRNG_NAME};
use crate::clickgen::{generate_click_with, CenterSelection};
use crate::crop::paste_prediction;
use crate::error::{Error, Result};
use crate::grid::{Grid, Mask};
use crate::kernels::LabelMap;
use crate::prompts::{BBox3, ClickSet};
use crate::scoring::{dice, nsd, trapezoid, IterationScore};
use crate::segmenter::{run_segmenter, SegmentContext, Segmenter};

/// Outcome of one interactive episode for one class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub class_id: u32,
    /// Iteration 0 is the box-only prediction when a box is used, then one
    /// entry per click round.
    pub scores: Vec<IterationScore>,
    pub dsc_auc: f64,
    pub nsd_auc: f64,
    pub dsc_final: f64,
    pub nsd_final: f64,
    pub budget_exceeded: bool,
    pub clicks: ClickSet,
    pub seed: u64,
    pub prng: String,
}

fn score(
    pred: &Grid<f32>,
    gt: &Mask,
    tau: f64,
    iter: usize,
    started: Instant,
) -> Result<IterationScore> {
    let p = pred.threshold();
    Ok(IterationScore {
        iter,
        dsc: dice(&p, gt)?,
        nsd: nsd(&p, gt, tau)?,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

/// Runs the box prediction and up to `n_clicks` refinement rounds.
pub fn run_episode(
    image: &Grid<f32>,
    gt: &Mask,
    bbox: Option<BBox3>,
    seg: &mut dyn Segmenter,
    cfg: &EpisodeConfig,
) -> Result<EpisodeResult> {
    run_episode_with_prediction(image, gt, bbox, seg, cfg).map(|(r, _)| r)
}

/// Like [`run_episode`], also returning the last full-volume probability map.
pub fn run_episode_with_prediction(
    image: &Grid<f32>,
    gt: &Mask,
    bbox: Option<BBox3>,
    seg: &mut dyn Segmenter,
    cfg: &EpisodeConfig,
) -> Result<(EpisodeResult, Grid<f32>)> {
    cfg.validate()?;
    image.same_shape(gt)?;
    let started = Instant::now();
    let shape = image.shape();
    let bbox = cfg.resolve_bbox(bbox, shape)?;
    let frame = PatchFrame::new(image, bbox.as_ref(), cfg.patch)?;
    let selection = if cfg.sample_ties {
        CenterSelection::SeededUniform(cfg.seed)
    } else {
        CenterSelection::FirstArgmax
    };

    let mut clicks = ClickSet::new();
    let mut scores = Vec::new();
    let mut budget_exceeded = false;
    let over_budget = || started.elapsed().as_secs_f64() > cfg.per_class_budget;

    let mut pred = Grid::filled(shape, 0.0f32);
    if bbox.is_some() {
        let t0 = Instant::now();
        let prompt = frame.prompt(&clicks, None)?;
        let ctx = SegmentContext {
            crop: &frame.spec,
            volume_shape: shape,
            clicks_so_far: 0,
        };
        let patch = run_segmenter(seg, &prompt, &ctx)?;
        pred = paste_prediction(&patch, &frame.spec, shape)?;
        scores.push(score(&pred, gt, cfg.tau, 0, t0)?);
        budget_exceeded = over_budget();
    }

    for round in 1..=cfg.n_clicks {
        if budget_exceeded {
            break;
        }
        let t0 = Instant::now();
        let proposal = generate_click_with(
            &pred,
            gt,
            match selection {
                // vary the tie-breaking draw per round while staying reproducible
                CenterSelection::SeededUniform(s) => {
                    CenterSelection::SeededUniform(s.wrapping_add(round as u64))
                }
                other => other,
            },
        )?;
        // an error-free prediction is kept as is
        if let Some(p) = proposal {
            clicks.push(p.click);
            let prev = pred.threshold();
            let prompt = frame.prompt(&clicks, Some(&prev))?;
            let ctx = SegmentContext {
                crop: &frame.spec,
                volume_shape: shape,
                clicks_so_far: clicks.len(),
            };
            let patch = run_segmenter(seg, &prompt, &ctx)?;
            pred = paste_prediction(&patch, &frame.spec, shape)?;
        }
        scores.push(score(&pred, gt, cfg.tau, round, t0)?);
        budget_exceeded = over_budget();
    }

    let click_scores: Vec<&IterationScore> = scores.iter().filter(|s| s.iter > 0).collect();
    let dsc: Vec<f64> = click_scores.iter().map(|s| s.dsc).collect();
    let nsd_v: Vec<f64> = click_scores.iter().map(|s| s.nsd).collect();
    let (dsc_final, nsd_final) = match scores.last() {
        Some(s) => (s.dsc, s.nsd),
        None => {
            let s = score(&pred, gt, cfg.tau, 0, started)?;
            (s.dsc, s.nsd)
        }
    };
    let mut result = EpisodeResult {
        class_id: 1,
        scores,
        dsc_auc: trapezoid(&dsc),
        nsd_auc: trapezoid(&nsd_v),
        dsc_final,
        nsd_final,
        budget_exceeded,
        clicks,
        seed: cfg.seed,
        prng: PRNG_NAME.to_string(),
    };
    if budget_exceeded {
        result.dsc_auc = 0.0;
        result.nsd_auc = 0.0;
        result.dsc_final = 0.0;
        result.nsd_final = 0.0;
    }
    Ok((result, pred))
}

/// Per-class episodes for one image plus the fused label map.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseResult {
    pub episodes: Vec<EpisodeResult>,
    pub fused: LabelMap,
}

/// Runs one independent episode per class and fuses the final predictions.
///
/// `make_segmenter` builds the backend for class `k` (0-based) given its
/// ground truth.
pub fn evaluate_case<F>(
    image: &Grid<f32>,
    gts: &[Mask],
    bboxes: &[Option<BBox3>],
    mut make_segmenter: F,
    cfg: &EpisodeConfig,
) -> Result<CaseResult>
where
    F: FnMut(usize, &Mask) -> Result<Box<dyn Segmenter>>,
{
    if gts.is_empty() {
        return Err(Error::EmptyClassList);
    }
    if bboxes.len() != gts.len() {
        return Err(Error::WrongLength {
            expected: gts.len(),
            found: bboxes.len(),
        });
    }
    let mut episodes = Vec::with_capacity(gts.len());
    let mut probs = Vec::with_capacity(gts.len());
    for (k, (gt, bbox)) in gts.iter().zip(bboxes).enumerate() {
        let mut seg = make_segmenter(k, gt)?;
        let (mut result, pred) = run_episode_with_prediction(image, gt, *bbox, seg.as_mut(), cfg)?;
        result.class_id = k as u32 + 1;
        episodes.push(result);
        probs.push(pred);
    }
    let fused = fuse_multiclass(&probs)?;
    Ok(CaseResult { episodes, fused })
}
