//! Segmentation backends.
//!
//! Every backend maps a [`PromptTensor`] to a foreground probability volume
//! of the same spatial shape with values in `[0, 1]`. [`run_segmenter`]
//! enforces that contract for all of them.

mod external;
mod growth;
mod oracle;

pub use external::{external_segment, ExternalSegmenter};
pub use growth::{region_grow_segment, RegionGrowSegmenter};
pub use oracle::{oracle_segment, OracleConfig, OracleSegmenter};

use crate::crop::CropSpec;
use crate::error::{Error, Result};
use crate::grid::{Grid, Shape};
use crate::prompts::PromptTensor;

/// Probability assigned to predicted foreground by the reference backends.
pub const FOREGROUND_PROB: f32 = 0.9;
/// Probability assigned to predicted background by the reference backends.
pub const BACKGROUND_PROB: f32 = 0.1;

/// Where the prompt patch sits, for backends that need it.
#[derive(Clone, Debug)]
pub struct SegmentContext<'a> {
    pub crop: &'a CropSpec,
    pub volume_shape: Shape,
    /// Clicks issued before this call.
    pub clicks_so_far: usize,
}

pub trait Segmenter {
    fn name(&self) -> &str;

    fn segment(&mut self, prompt: &PromptTensor, ctx: &SegmentContext<'_>) -> Result<Grid<f32>>;
}

impl<S: Segmenter + ?Sized> Segmenter for Box<S> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn segment(&mut self, prompt: &PromptTensor, ctx: &SegmentContext<'_>) -> Result<Grid<f32>> {
        (**self).segment(prompt, ctx)
    }
}

/// Checks shape and range of a backend's output.
pub fn validate_output(prompt: &PromptTensor, out: &Grid<f32>) -> Result<()> {
    if out.shape() != prompt.shape() {
        return Err(Error::ProtocolError(format!(
            "output shape {:?} does not match prompt shape {:?}",
            out.shape(),
            prompt.shape()
        )));
    }
    if let Some(bad) = out.data().iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::ProtocolError(format!(
            "output value {bad} outside [0, 1]"
        )));
    }
    Ok(())
}

/// Runs a backend and validates its output.
pub fn run_segmenter(
    seg: &mut dyn Segmenter,
    prompt: &PromptTensor,
    ctx: &SegmentContext<'_>,
) -> Result<Grid<f32>> {
    let out = seg.segment(prompt, ctx)?;
    validate_output(prompt, &out)?;
    Ok(out)
}
