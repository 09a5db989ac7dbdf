//! Voxel kernels: error masks, 26-connected components, exact EDT,
//! resampling and boundary extraction.

mod boundary;
mod components;
mod edt;
mod resample;

pub use boundary::{boundary_mask, boundary_voxels};
pub use components::{connected_components_26, ComponentStats, LabelMap};
pub use edt::{edt_squared, edt_squared_to_sites, DistanceMap, UNREACHABLE};
pub(crate) use resample::{axis_nearest, axis_taps, sample_trilinear, Tap};
pub use resample::{resample, resample_nearest, Interp};

use crate::error::Result;
use crate::grid::{Grid, Mask};

/// `(pred > 0.5) XOR gt`, voxel-wise.
pub fn error_mask(pred: &Grid<f32>, gt: &Mask) -> Result<Mask> {
    pred.same_shape(gt)?;
    let data = pred
        .data()
        .iter()
        .zip(gt.data())
        .map(|(&p, &g)| (p > 0.5) ^ g)
        .collect();
    Grid::from_vec(pred.shape(), data)
}
