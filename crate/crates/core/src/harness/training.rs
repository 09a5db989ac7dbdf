use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EpisodeConfig, PatchFrame};
use crate::clickgen::generate_click;
use crate::crop::{extract_patch_nearest, paste_prediction};
use crate::error::Result;
use crate::grid::{Grid, Mask};
use crate::prompts::{BBox3, Click, ClickSet, PromptTensor};
use crate::segmenter::{run_segmenter, SegmentContext, Segmenter};

/// Which of the two prompt settings a training sample was drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainingSetting {
    BboxOnly,
    OneClickWithPrev,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSample {
    pub prompt: PromptTensor,
    /// Ground truth cropped to the same patch as the prompt.
    pub target: Mask,
    pub setting: TrainingSetting,
    /// The simulated click, if the one-click branch produced one.
    pub click: Option<Click>,
}

/// Draws training prompts with a persistent seeded generator.
#[derive(Clone, Debug)]
pub struct TrainingSampler {
    rng: ChaCha8Rng,
    cfg: EpisodeConfig,
}

impl TrainingSampler {
    pub fn new(cfg: EpisodeConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(TrainingSampler {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            cfg,
        })
    }

    /// Bernoulli(p_click) draw only; exposed so the branch rate can be
    /// checked without running a segmenter.
    pub fn draw_one_click(&mut self) -> bool {
        self.rng.gen_bool(self.cfg.p_click)
    }

    pub fn sample(
        &mut self,
        image: &Grid<f32>,
        gt: &Mask,
        bbox: Option<BBox3>,
        seg: &mut dyn Segmenter,
    ) -> Result<TrainingSample> {
        image.same_shape(gt)?;
        let shape = image.shape();
        let bbox = self.cfg.resolve_bbox(bbox, shape)?;
        let frame = PatchFrame::new(image, bbox.as_ref(), self.cfg.patch)?;
        let target = extract_patch_nearest(gt, &frame.spec, false);
        let no_clicks = ClickSet::new();
        let bbox_prompt = frame.prompt(&no_clicks, None)?;

        if !self.draw_one_click() {
            return Ok(TrainingSample {
                prompt: bbox_prompt,
                target,
                setting: TrainingSetting::BboxOnly,
                click: None,
            });
        }

        let ctx = SegmentContext {
            crop: &frame.spec,
            volume_shape: shape,
            clicks_so_far: 0,
        };
        let patch = run_segmenter(seg, &bbox_prompt, &ctx)?;
        let pred = paste_prediction(&patch, &frame.spec, shape)?;
        // with no error left the sample keeps the previous mask but no click
        let click = generate_click(&pred, gt)?.map(|p| p.click);
        let clicks: ClickSet = click.into_iter().collect();
        let prompt = frame.prompt(&clicks, Some(&pred.threshold()))?;
        Ok(TrainingSample {
            prompt,
            target,
            setting: TrainingSetting::OneClickWithPrev,
            click,
        })
    }
}

/// One-shot sample with a fresh generator seeded from `cfg.seed`.
pub fn sample_training_example(
    image: &Grid<f32>,
    gt: &Mask,
    bbox: Option<BBox3>,
    seg: &mut dyn Segmenter,
    cfg: &EpisodeConfig,
) -> Result<TrainingSample> {
    TrainingSampler::new(cfg.clone())?.sample(image, gt, bbox, seg)
}
