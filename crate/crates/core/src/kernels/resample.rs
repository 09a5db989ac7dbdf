//! Resampling with the align-corners-false convention: output voxel `o`
//! samples input coordinate `(o + 0.5) * in / out - 0.5`, clamped to the
//! valid range.

use serde::{Deserialize, Serialize};

use crate::grid::{voxel_count, Grid, Shape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interp {
    Trilinear,
    Nearest,
}

/// Linear interpolation tap along one axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Tap {
    pub lo: usize,
    pub hi: usize,
    pub frac: f64,
}

fn source_coord(o: usize, in_len: usize, out_len: usize) -> f64 {
    let scale = in_len as f64 / out_len as f64;
    ((o as f64 + 0.5) * scale - 0.5).clamp(0.0, (in_len - 1) as f64)
}

pub(crate) fn axis_taps(in_len: usize, out_len: usize) -> Vec<Tap> {
    (0..out_len)
        .map(|o| {
            let s = source_coord(o, in_len, out_len);
            let lo = s.floor() as usize;
            Tap {
                lo,
                hi: (lo + 1).min(in_len - 1),
                frac: s - lo as f64,
            }
        })
        .collect()
}

/// Nearest source index; exact half-way ties go to the lower index.
pub(crate) fn axis_nearest(in_len: usize, out_len: usize) -> Vec<usize> {
    (0..out_len)
        .map(|o| {
            let s = source_coord(o, in_len, out_len);
            ((s - 0.5).ceil().max(0.0) as usize).min(in_len - 1)
        })
        .collect()
}

/// Trilinear sampling over `target` using per-axis taps and a voxel fetcher.
pub(crate) fn sample_trilinear(
    target: Shape,
    taps: [&[Tap]; 3],
    fetch: impl Fn(usize, usize, usize) -> f32,
) -> Vec<f32> {
    let mut out = Vec::with_capacity(voxel_count(target));
    for tz in taps[0] {
        for ty in taps[1] {
            for tx in taps[2] {
                let lerp_x = |z, y| {
                    let a = fetch(z, y, tx.lo) as f64;
                    let b = fetch(z, y, tx.hi) as f64;
                    if tx.frac == 0.0 {
                        a
                    } else {
                        a + (b - a) * tx.frac
                    }
                };
                let lerp_y = |z| {
                    let a = lerp_x(z, ty.lo);
                    if ty.frac == 0.0 {
                        a
                    } else {
                        a + (lerp_x(z, ty.hi) - a) * ty.frac
                    }
                };
                let a = lerp_y(tz.lo);
                let v = if tz.frac == 0.0 {
                    a
                } else {
                    a + (lerp_y(tz.hi) - a) * tz.frac
                };
                out.push(v as f32);
            }
        }
    }
    out
}

pub fn resample(vol: &Grid<f32>, target: Shape, mode: Interp) -> Grid<f32> {
    match mode {
        Interp::Nearest => resample_nearest(vol, target),
        Interp::Trilinear => {
            let shape = vol.shape();
            if shape == target {
                return vol.clone();
            }
            let taps = [0, 1, 2].map(|a| axis_taps(shape[a], target[a]));
            let [_, h, w] = shape;
            let data = vol.data();
            let out = sample_trilinear(target, [&taps[0], &taps[1], &taps[2]], |z, y, x| {
                data[(z * h + y) * w + x]
            });
            Grid::from_vec(target, out).expect("target shape")
        }
    }
}

pub fn resample_nearest<T: Copy>(vol: &Grid<T>, target: Shape) -> Grid<T> {
    let shape = vol.shape();
    if shape == target {
        return vol.clone();
    }
    let idx = [0, 1, 2].map(|a| axis_nearest(shape[a], target[a]));
    Grid::from_fn(target, |[z, y, x]| vol[[idx[0][z], idx[1][y], idx[2][x]]])
}
