//! Overlap and boundary metrics, AUC over click iterations, and the
//! segmentation training losses with analytic gradients.

mod loss;
mod metrics;

pub use loss::{bce_loss, compound_loss, soft_dice_loss, LossConfig, LossValue, PROB_CLAMP};
pub use metrics::{auc, dice, nsd, trapezoid, IterationScore, AUC_POINTS, DEFAULT_NSD_TOLERANCE};
