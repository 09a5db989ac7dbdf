//! Intensity normalization to the [0, 255] model range.

use serde::{Deserialize, Serialize};

use super::Volume3;
use crate::error::{Error, Result};
use crate::grid::Grid;

/// A CT display window in Hounsfield units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowPreset {
    pub name: String,
    pub width: f64,
    pub level: f64,
}

impl WindowPreset {
    pub fn new(name: impl Into<String>, width: f64, level: f64) -> Result<Self> {
        if width.is_nan() || width <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "window width must be > 0, got {width}"
            )));
        }
        Ok(WindowPreset {
            name: name.into(),
            width,
            level,
        })
    }

    pub fn soft_tissue() -> Self {
        WindowPreset::new("soft", 400.0, 40.0).unwrap()
    }

    pub fn lung() -> Self {
        WindowPreset::new("lung", 1500.0, -160.0).unwrap()
    }

    pub fn brain() -> Self {
        WindowPreset::new("brain", 80.0, 40.0).unwrap()
    }

    pub fn bone() -> Self {
        WindowPreset::new("bone", 1800.0, 400.0).unwrap()
    }

    pub fn presets() -> [WindowPreset; 4] {
        [
            Self::soft_tissue(),
            Self::lung(),
            Self::brain(),
            Self::bone(),
        ]
    }

    pub fn by_name(name: &str) -> Option<Self> {
        Self::presets().into_iter().find(|p| p.name == name)
    }

    fn apply(&self, hu: f64) -> u8 {
        let lo = self.level - self.width / 2.0;
        let t = ((hu - lo) / self.width).clamp(0.0, 1.0);
        (t * 255.0).round() as u8
    }
}

/// Windows Hounsfield units into `[0, 255]`. Only `i16` and `f32` volumes are accepted.
pub fn preprocess_ct(vol: &Volume3, preset: &WindowPreset) -> Result<Grid<u8>> {
    match vol {
        Volume3::I16(g) => Ok(g.map(|&v| preset.apply(v as f64))),
        Volume3::F32(g) => Ok(g.map(|&v| preset.apply(v as f64))),
        Volume3::U8(_) => Err(Error::InvalidConfig(
            "CT windowing expects i16 or f32 Hounsfield units".into(),
        )),
    }
}

fn values(vol: &Volume3) -> Vec<f64> {
    match vol {
        Volume3::U8(g) => g.data().iter().map(|&v| v as f64).collect(),
        Volume3::I16(g) => g.data().iter().map(|&v| v as f64).collect(),
        Volume3::F32(g) => g.data().iter().map(|&v| v as f64).collect(),
    }
}

/// Nearest-rank 0.5th and 99.5th percentiles over all voxels.
pub fn percentile_window(vol: &Volume3) -> (f64, f64) {
    let mut sorted = values(vol);
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    // rank = ceil(p * n) with p in per-mille, 1-based
    let rank = |per_mille: usize| ((per_mille * n).div_ceil(1000)).max(1);
    (sorted[rank(5) - 1], sorted[rank(995) - 1])
}

/// Clips to the 0.5–99.5 percentile range and rescales to `[0, 255]`.
///
/// `u8` volumes are already in range and are returned unchanged. A
/// degenerate range (both percentiles equal) yields all zeros.
pub fn preprocess_percentile(vol: &Volume3) -> Grid<u8> {
    if let Volume3::U8(g) = vol {
        return g.clone();
    }
    let (lo, hi) = percentile_window(vol);
    let shape = vol.shape();
    if hi <= lo {
        return Grid::filled(shape, 0);
    }
    let scale = 255.0 / (hi - lo);
    let out = values(vol)
        .into_iter()
        .map(|v| ((v.clamp(lo, hi) - lo) * scale).round() as u8)
        .collect();
    Grid::from_vec(shape, out).expect("shape preserved")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hu(v: i16) -> Volume3 {
        Volume3::I16(Grid::filled([1, 1, 1], v))
    }

    #[test]
    fn soft_window_anchors() {
        let soft = WindowPreset::soft_tissue();
        assert_eq!(preprocess_ct(&hu(40), &soft).unwrap().data(), &[128]);
        assert_eq!(preprocess_ct(&hu(-160), &soft).unwrap().data(), &[0]);
        assert_eq!(preprocess_ct(&hu(10000), &soft).unwrap().data(), &[255]);
        assert_eq!(preprocess_ct(&hu(240), &soft).unwrap().data(), &[255]);
    }

    #[test]
    fn presets_match_published_values() {
        let got: Vec<_> = WindowPreset::presets()
            .iter()
            .map(|p| (p.name.clone(), p.width, p.level))
            .collect();
        assert_eq!(
            got,
            vec![
                ("soft".into(), 400.0, 40.0),
                ("lung".into(), 1500.0, -160.0),
                ("brain".into(), 80.0, 40.0),
                ("bone".into(), 1800.0, 400.0),
            ]
        );
        assert!(WindowPreset::new("bad", 0.0, 0.0).is_err());
    }

    #[test]
    fn ct_rejects_u8() {
        let v = Volume3::U8(Grid::filled([1, 1, 1], 3));
        assert!(preprocess_ct(&v, &WindowPreset::bone()).is_err());
    }

    #[test]
    fn u8_is_untouched() {
        let g = Grid::from_vec([1, 1, 4], vec![0u8, 3, 200, 255]).unwrap();
        assert_eq!(preprocess_percentile(&Volume3::U8(g.clone())), g);
    }

    #[test]
    fn constant_volume_is_zero() {
        let v = Volume3::F32(Grid::filled([2, 2, 2], 7.0));
        assert!(preprocess_percentile(&v).data().iter().all(|&x| x == 0));
    }

    #[test]
    fn ramp_matches_sort_oracle() {
        let n = 1000;
        let data: Vec<f32> = (0..n).map(|i| i as f32).collect();
        let v = Volume3::F32(Grid::from_vec([10, 10, 10], data.clone()).unwrap());

        // oracle: sort, nearest-rank ceil(p*n), clip, rescale
        let mut sorted = data.clone();
        sorted.sort_by(f32::total_cmp);
        let lo = sorted[(0.005f64 * n as f64).round() as usize - 1] as f64;
        let hi = sorted[(0.995f64 * n as f64).round() as usize - 1] as f64;
        assert_eq!((lo, hi), (4.0, 994.0));
        let expected: Vec<u8> = data
            .iter()
            .map(|&x| ((x as f64).clamp(lo, hi) - lo) / (hi - lo) * 255.0)
            .map(|x| x.round() as u8)
            .collect();
        assert_eq!(preprocess_percentile(&v).data(), &expected[..]);
    }
}
