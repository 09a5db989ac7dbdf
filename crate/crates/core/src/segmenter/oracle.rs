use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{SegmentContext, Segmenter, BACKGROUND_PROB, FOREGROUND_PROB};
use crate::crop::extract_patch_nearest;
use crate::error::{Error, Result};
use crate::grid::{Grid, Mask};
use crate::prompts::{sphere_offsets_with_radius, PromptTensor};

/// Corruption model for the ground-truth test double.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Fraction of voxels flipped before any click.
    pub flip_rate: f64,
    /// Number of wrong-label spheres before any click.
    pub blob_count: usize,
    pub blob_radius: usize,
    /// Per-click multiplier on both corruption amounts.
    pub decay: f64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            flip_rate: 0.0,
            blob_count: 0,
            blob_radius: 3,
            decay: 1.0,
            seed: 0,
        }
    }
}

impl OracleConfig {
    pub fn perfect() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.flip_rate) || !(0.0..=1.0).contains(&self.decay) {
            return Err(Error::InvalidConfig(format!(
                "flip_rate and decay must lie in [0, 1], got {} and {}",
                self.flip_rate, self.decay
            )));
        }
        Ok(())
    }
}

/// Ground truth with seeded corruption that shrinks by `decay` per click.
///
/// The corrupted sets for successive click counts are nested, so fewer
/// errors always means a subset of the earlier errors.
pub fn oracle_segment(gt: &Mask, cfg: &OracleConfig, clicks_so_far: usize) -> Grid<f32> {
    let n = gt.len();
    let factor = cfg.decay.powi(clicks_so_far.min(i32::MAX as usize) as i32);
    let max_flips = (cfg.flip_rate * n as f64).round() as usize;
    let flips = ((cfg.flip_rate * factor * n as f64).round() as usize).min(max_flips);
    let blobs = ((cfg.blob_count as f64 * factor).round() as usize).min(cfg.blob_count);

    let mut wrong = vec![false; n];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    // partial Fisher-Yates; any prefix is a uniform sample
    let mut order: Vec<u32> = (0..n as u32).collect();
    for i in 0..max_flips {
        let j = rng.gen_range(i..n);
        order.swap(i, j);
    }
    for &i in &order[..flips] {
        wrong[i as usize] = true;
    }

    let mut blob_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    blob_rng.set_stream(1);
    let shape = gt.shape();
    let centers: Vec<[usize; 3]> = (0..cfg.blob_count)
        .map(|_| [0, 1, 2].map(|a| blob_rng.gen_range(0..shape[a])))
        .collect();
    let offsets = sphere_offsets_with_radius(cfg.blob_radius as i64);
    for c in &centers[..blobs] {
        for o in &offsets {
            let p = [0, 1, 2].map(|a| c[a] as i64 + o[a]);
            if gt.contains(p) {
                wrong[gt.offset(p.map(|v| v as usize))] = true;
            }
        }
    }

    let data = gt
        .data()
        .iter()
        .zip(wrong)
        .map(|(&g, w)| {
            if g != w {
                FOREGROUND_PROB
            } else {
                BACKGROUND_PROB
            }
        })
        .collect();
    Grid::from_vec(shape, data).expect("shape preserved")
}

/// Test double that answers every prompt with (corrupted) ground truth.
pub struct OracleSegmenter {
    gt: Mask,
    cfg: OracleConfig,
}

impl OracleSegmenter {
    pub fn new(gt: Mask, cfg: OracleConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(OracleSegmenter { gt, cfg })
    }
}

impl Segmenter for OracleSegmenter {
    fn name(&self) -> &str {
        "oracle"
    }

    fn segment(&mut self, prompt: &PromptTensor, ctx: &SegmentContext<'_>) -> Result<Grid<f32>> {
        if ctx.volume_shape != self.gt.shape() {
            return Err(Error::shape(ctx.volume_shape, self.gt.shape()));
        }
        let patch = extract_patch_nearest(&self.gt, ctx.crop, false);
        if patch.shape() != prompt.shape() {
            return Err(Error::shape(patch.shape(), prompt.shape()));
        }
        Ok(oracle_segment(&patch, &self.cfg, ctx.clicks_so_far))
    }
}
