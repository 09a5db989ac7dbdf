//! Interactive episodes, training-sample simulation and multiclass fusion.

mod episode;
mod fusion;
mod training;

pub use episode::{
    evaluate_case, run_episode, run_episode_with_prediction, CaseResult, EpisodeResult,
};
pub use fusion::fuse_multiclass;
pub use training::{sample_training_example, TrainingSample, TrainingSampler, TrainingSetting};

use serde::{Deserialize, Serialize};

use crate::crop::{compute_crop, extract_patch, extract_patch_nearest, CropSpec};
use crate::error::{Error, Result};
use crate::grid::{Grid, Mask, Shape};
use crate::kernels::Interp;
use crate::prompts::{
    default_bbox, paint_spheres, BBox3, ClickSet, Polarity, PromptTensor, BBOX_CHANNEL,
    IMAGE_CHANNEL, NEGATIVE_CHANNEL, POSITIVE_CHANNEL, PREVIOUS_CHANNEL,
};
use crate::scoring::DEFAULT_NSD_TOLERANCE;

/// Name of the generator behind every seeded draw.
pub const PRNG_NAME: &str = "chacha8";

/// What to do when a class comes without a bounding box.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BBoxMode {
    /// A box must be supplied.
    Provided,
    /// Substitute the central-third default box.
    #[default]
    AbsentUseDefault,
    /// Run without a box; iteration 0 is skipped.
    AbsentNone,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub n_clicks: usize,
    pub bbox_mode: BBoxMode,
    /// Wall-clock seconds allowed per class.
    pub per_class_budget: f64,
    pub p_click: f64,
    pub seed: u64,
    pub tau: f64,
    pub patch: Shape,
    /// Pick uniformly (seeded) among equally deep click centres instead of
    /// the first in scan order.
    pub sample_ties: bool,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            n_clicks: 5,
            bbox_mode: BBoxMode::AbsentUseDefault,
            per_class_budget: 90.0,
            p_click: 0.5,
            seed: 0,
            tau: DEFAULT_NSD_TOLERANCE,
            patch: [192; 3],
            sample_ties: false,
        }
    }
}

impl EpisodeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_click) {
            return Err(Error::InvalidConfig(format!(
                "p_click must lie in [0, 1], got {}",
                self.p_click
            )));
        }
        if self.per_class_budget.is_nan() || self.per_class_budget <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "per-class budget must be > 0, got {}",
                self.per_class_budget
            )));
        }
        if self.tau.is_nan() || self.tau <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "tau must be > 0, got {}",
                self.tau
            )));
        }
        if self.patch.contains(&0) {
            return Err(Error::InvalidConfig(format!(
                "patch must be >= 1, got {:?}",
                self.patch
            )));
        }
        Ok(())
    }

    pub(crate) fn resolve_bbox(&self, bbox: Option<BBox3>, shape: Shape) -> Result<Option<BBox3>> {
        match (bbox, self.bbox_mode) {
            (Some(b), _) => {
                b.check_within(shape)?;
                Ok(Some(b))
            }
            (None, BBoxMode::Provided) => Err(Error::InvalidConfig(
                "bbox mode 'provided' requires a bounding box".into(),
            )),
            (None, BBoxMode::AbsentUseDefault) => Ok(Some(default_bbox(shape))),
            (None, BBoxMode::AbsentNone) => Ok(None),
        }
    }
}

/// Fixed per-class inputs for building patch prompts.
pub(crate) struct PatchFrame {
    pub spec: CropSpec,
    pub shape: Shape,
    image: Grid<f32>,
    bbox: Grid<f32>,
}

impl PatchFrame {
    /// Crops around the box, or around the whole volume when there is none.
    pub fn new(image: &Grid<f32>, bbox: Option<&BBox3>, patch: Shape) -> Result<Self> {
        let shape = image.shape();
        let anchor = bbox.copied().unwrap_or(BBox3::full(shape));
        let spec = compute_crop(&anchor, patch, shape)?;
        let image_patch = extract_patch(image, &spec, Interp::Trilinear);
        let bbox_patch = match bbox {
            Some(b) => extract_patch_nearest(&b.to_mask(shape), &spec, false).to_f32(),
            None => Grid::filled(spec.target_patch, 0.0),
        };
        Ok(PatchFrame {
            spec,
            shape,
            image: image_patch,
            bbox: bbox_patch,
        })
    }

    /// Prompt tensor in patch space. Clicks are given in volume coordinates;
    /// those outside the crop window are not drawn.
    pub fn prompt(&self, clicks: &ClickSet, prev: Option<&Mask>) -> Result<PromptTensor> {
        let mut t = PromptTensor::zeros(self.spec.target_patch);
        t.channel_mut(IMAGE_CHANNEL)
            .copy_from_slice(self.image.data());
        t.channel_mut(BBOX_CHANNEL)
            .copy_from_slice(self.bbox.data());
        for (polarity, channel) in [
            (Polarity::Positive, POSITIVE_CHANNEL),
            (Polarity::Negative, NEGATIVE_CHANNEL),
        ] {
            let centers: Vec<_> = clicks
                .with_polarity(polarity)
                .filter_map(|c| self.spec.to_patch(c))
                .collect();
            paint_spheres(t.channel_mut(channel), self.spec.target_patch, centers);
        }
        if let Some(prev) = prev {
            if prev.shape() != self.shape {
                return Err(Error::shape(prev.shape(), self.shape));
            }
            let patch = extract_patch_nearest(prev, &self.spec, false);
            for (dst, &src) in t.channel_mut(PREVIOUS_CHANNEL).iter_mut().zip(patch.data()) {
                *dst = if src { 1.0 } else { 0.0 };
            }
        }
        Ok(t)
    }
}
