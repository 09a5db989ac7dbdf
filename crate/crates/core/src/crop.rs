//! Content-aware cropping around a bounding box.
//!
//! The crop window is the network patch scaled by a single zoom factor so
//! the box fits with a margin of a third of the patch, centred on the box.
//! Window voxels outside the volume are padding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{voxel_count, Coord, Grid, Shape};
use crate::kernels::{axis_nearest, axis_taps, sample_trilinear, Interp, Tap};
use crate::prompts::BBox3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CropSpec {
    /// Zoom factor, >= 1.
    #[serde(rename = "z")]
    pub zoom: f64,
    /// Window size in volume voxels.
    pub scaled_patch: [usize; 3],
    /// Window start in volume coordinates; negative when padding.
    pub origin: [i64; 3],
    /// Network input size.
    pub target_patch: [usize; 3],
    pub pad_value: f32,
}

pub fn compute_crop(bbox: &BBox3, patch: Shape, shape: Shape) -> Result<CropSpec> {
    bbox.check_within(shape)?;
    if patch.contains(&0) {
        return Err(Error::InvalidConfig(format!(
            "patch must be >= 1, got {patch:?}"
        )));
    }
    let size = bbox.size();
    // ratio_a = (size_a + patch_a / 3) / patch_a = num_a / den_a, kept rational
    let num = [0, 1, 2].map(|a| (3 * size[a] + patch[a]) as u128);
    let den = [0, 1, 2].map(|a| (3 * patch[a]) as u128);
    let k = (1..3).fold(0, |k, a| {
        if num[a] * den[k] > num[k] * den[a] {
            a
        } else {
            k
        }
    });

    let (zoom, scaled_patch) = if num[k] <= den[k] {
        (1.0, patch)
    } else {
        let scaled = [0, 1, 2].map(|a| (num[k] * patch[a] as u128).div_ceil(den[k]) as usize);
        (num[k] as f64 / den[k] as f64, scaled)
    };
    let center = bbox.center();
    let origin = [0, 1, 2].map(|a| center[a] as i64 - (scaled_patch[a] / 2) as i64);
    Ok(CropSpec {
        zoom,
        scaled_patch,
        origin,
        target_patch: patch,
        pad_value: 0.0,
    })
}

impl CropSpec {
    /// Maps a volume voxel to the patch voxel whose centre is nearest, or
    /// `None` if it lies outside the crop window.
    pub fn to_patch(&self, c: Coord) -> Option<Coord> {
        let mut out = [0; 3];
        for a in 0..3 {
            let w = c[a] as i64 - self.origin[a];
            if w < 0 || w >= self.scaled_patch[a] as i64 {
                return None;
            }
            let scale = self.target_patch[a] as f64 / self.scaled_patch[a] as f64;
            let p = ((w as f64 + 0.5) * scale - 0.5).round().max(0.0) as usize;
            out[a] = p.min(self.target_patch[a] - 1);
        }
        Some(out)
    }

    /// Whether the window `[origin, origin + scaled_patch)` contains the box.
    pub fn covers(&self, bbox: &BBox3) -> bool {
        (0..3).all(|a| {
            self.origin[a] <= bbox.lo[a] as i64
                && self.origin[a] + self.scaled_patch[a] as i64 >= bbox.hi[a] as i64
        })
    }

    fn volume_index(&self, a: usize, w: usize, shape: Shape) -> Option<usize> {
        let v = self.origin[a] + w as i64;
        (v >= 0 && (v as usize) < shape[a]).then_some(v as usize)
    }
}

/// Reads the crop window (padding outside the volume) and resamples it to
/// the target patch.
pub fn extract_patch(vol: &Grid<f32>, spec: &CropSpec, mode: Interp) -> Grid<f32> {
    match mode {
        Interp::Nearest => extract_patch_nearest(vol, spec, spec.pad_value),
        Interp::Trilinear => {
            let shape = vol.shape();
            let taps = [0, 1, 2].map(|a| axis_taps(spec.scaled_patch[a], spec.target_patch[a]));
            // window index -> volume index for every tap position
            let map = [0, 1, 2].map(|a| {
                (0..spec.scaled_patch[a])
                    .map(|w| spec.volume_index(a, w, shape))
                    .collect::<Vec<_>>()
            });
            let out = sample_trilinear(
                spec.target_patch,
                [&taps[0], &taps[1], &taps[2]],
                |z, y, x| match (map[0][z], map[1][y], map[2][x]) {
                    (Some(z), Some(y), Some(x)) => vol[[z, y, x]],
                    _ => spec.pad_value,
                },
            );
            Grid::from_vec(spec.target_patch, out).expect("target shape")
        }
    }
}

/// Nearest-neighbour crop for any voxel type, e.g. masks.
pub fn extract_patch_nearest<T: Copy>(vol: &Grid<T>, spec: &CropSpec, pad: T) -> Grid<T> {
    let shape = vol.shape();
    let idx = [0, 1, 2].map(|a| {
        axis_nearest(spec.scaled_patch[a], spec.target_patch[a])
            .into_iter()
            .map(|w| spec.volume_index(a, w, shape))
            .collect::<Vec<_>>()
    });
    Grid::from_fn(spec.target_patch, |[z, y, x]| {
        match (idx[0][z], idx[1][y], idx[2][x]) {
            (Some(z), Some(y), Some(x)) => vol[[z, y, x]],
            _ => pad,
        }
    })
}

/// Resamples a patch prediction back to the window (trilinear) and writes
/// the in-volume part into a zero volume of `shape`.
pub fn paste_prediction(patch: &Grid<f32>, spec: &CropSpec, shape: Shape) -> Result<Grid<f32>> {
    if patch.shape() != spec.target_patch {
        return Err(Error::shape(patch.shape(), spec.target_patch));
    }
    let mut out = Grid::filled(shape, 0.0f32);
    // window positions that land inside the volume, per axis
    let mut ranges = [(0usize, 0usize); 3];
    for a in 0..3 {
        let start = (-spec.origin[a]).max(0) as usize;
        let end =
            ((shape[a] as i64 - spec.origin[a]).min(spec.scaled_patch[a] as i64)).max(0) as usize;
        if start >= end {
            return Ok(out);
        }
        ranges[a] = (start, end);
    }
    let taps: [Vec<Tap>; 3] = [0, 1, 2].map(|a| {
        let all = axis_taps(spec.target_patch[a], spec.scaled_patch[a]);
        all[ranges[a].0..ranges[a].1].to_vec()
    });
    let sub_shape = [0, 1, 2].map(|a| ranges[a].1 - ranges[a].0);
    let [_, ph, pw] = spec.target_patch;
    let data = patch.data();
    let values = sample_trilinear(sub_shape, [&taps[0], &taps[1], &taps[2]], |z, y, x| {
        data[(z * ph + y) * pw + x]
    });
    debug_assert_eq!(values.len(), voxel_count(sub_shape));
    let mut it = values.into_iter();
    for wz in ranges[0].0..ranges[0].1 {
        for wy in ranges[1].0..ranges[1].1 {
            for wx in ranges[2].0..ranges[2].1 {
                let v = [wz, wy, wx];
                let c = [0, 1, 2].map(|a| (spec.origin[a] + v[a] as i64) as usize);
                out[c] = it.next().expect("sized");
            }
        }
    }
    Ok(out)
}
