use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernels::LabelMap;

/// Fuses per-class foreground probabilities into one label map.
///
/// Background probability is `prod(1 - p_c)`; each voxel takes the argmax
/// over `(p_bg, p_1, .., p_K)`, ties going to the lower index.
pub fn fuse_multiclass(probs: &[Grid<f32>]) -> Result<LabelMap> {
    let first = probs.first().ok_or(Error::EmptyClassList)?;
    for p in probs {
        first.same_shape(p)?;
    }
    let data = (0..first.len())
        .map(|i| {
            let bg: f64 = probs.iter().map(|p| 1.0 - p.data()[i] as f64).product();
            let mut best = (0u32, bg);
            for (k, p) in probs.iter().enumerate() {
                let v = p.data()[i] as f64;
                if v > best.1 {
                    best = (k as u32 + 1, v);
                }
            }
            best.0
        })
        .collect();
    Grid::from_vec(first.shape(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(v: f32) -> Grid<f32> {
        Grid::filled([1, 1, 1], v)
    }

    #[test]
    fn anchors() {
        assert_eq!(fuse_multiclass(&[one(0.6)]).unwrap().data(), &[1]);
        assert_eq!(fuse_multiclass(&[one(0.5), one(0.5)]).unwrap().data(), &[1]);
        assert_eq!(
            fuse_multiclass(&[one(0.0), one(0.0), one(0.0)])
                .unwrap()
                .data(),
            &[0]
        );
        // 0.5 alone ties with its background and stays background
        assert_eq!(fuse_multiclass(&[one(0.5)]).unwrap().data(), &[0]);
        assert_eq!(fuse_multiclass(&[one(0.2), one(0.7)]).unwrap().data(), &[2]);
    }

    #[test]
    fn errors() {
        assert!(matches!(fuse_multiclass(&[]), Err(Error::EmptyClassList)));
        let a = Grid::filled([1, 1, 2], 0.1f32);
        assert!(matches!(
            fuse_multiclass(&[one(0.1), a]),
            Err(Error::ShapeMismatch { .. })
        ));
    }
}
