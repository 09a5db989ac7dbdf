use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, Mask};
use crate::kernels::{boundary_mask, edt_squared_to_sites};
use crate::prompts::BBox3;

/// Default surface tolerance in voxels.
pub const DEFAULT_NSD_TOLERANCE: f64 = 2.0;
/// Number of click predictions the AUC is taken over.
pub const AUC_POINTS: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationScore {
    pub iter: usize,
    pub dsc: f64,
    pub nsd: f64,
    pub wall_ms: f64,
}

/// `2|P∩G| / (|P| + |G|)`, 1 when both are empty.
pub fn dice(pred: &Mask, gt: &Mask) -> Result<f64> {
    pred.same_shape(gt)?;
    let (mut inter, mut total) = (0usize, 0usize);
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        inter += (p && g) as usize;
        total += p as usize + g as usize;
    }
    Ok(if total == 0 {
        1.0
    } else {
        2.0 * inter as f64 / total as f64
    })
}

fn bounds_of(a: &Mask, b: &Mask) -> Option<BBox3> {
    let mut lo = [usize::MAX; 3];
    let mut hi = [0; 3];
    let mut any = false;
    for (i, (&x, &y)) in a.data().iter().zip(b.data()).enumerate() {
        if x || y {
            any = true;
            let c = a.coord(i);
            for k in 0..3 {
                lo[k] = lo[k].min(c[k]);
                hi[k] = hi[k].max(c[k] + 1);
            }
        }
    }
    any.then_some(BBox3 { lo, hi })
}

fn crop(m: &Mask, b: &BBox3) -> Mask {
    Grid::from_fn(b.size(), |[z, y, x]| {
        m[[b.lo[0] + z, b.lo[1] + y, b.lo[2] + x]]
    })
}

/// Fraction of boundary voxels within `tau` of the other mask's boundary.
///
/// 1 when both masks are empty, 0 when exactly one is.
pub fn nsd(pred: &Mask, gt: &Mask, tau: f64) -> Result<f64> {
    pred.same_shape(gt)?;
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "NSD tolerance must be > 0, got {tau}"
        )));
    }
    let surf_p = boundary_mask(pred);
    let surf_g = boundary_mask(gt);
    let (np, ng) = (surf_p.count(), surf_g.count());
    match (np, ng) {
        (0, 0) => return Ok(1.0),
        (0, _) | (_, 0) => return Ok(0.0),
        _ => {}
    }
    // every site and every query voxel lies inside the joint bounds
    let b = bounds_of(&surf_p, &surf_g).expect("non-empty surfaces");
    let (sp, sg) = (crop(&surf_p, &b), crop(&surf_g, &b));
    let to_g = edt_squared_to_sites(&sg);
    let to_p = edt_squared_to_sites(&sp);
    let tau_sq = tau * tau;
    let within = |surf: &Mask, dist: &Grid<u64>| {
        surf.data()
            .iter()
            .zip(dist.data())
            .filter(|(&s, &d)| s && (d as f64) <= tau_sq)
            .count()
    };
    Ok((within(&sp, &to_g) + within(&sg, &to_p)) as f64 / (np + ng) as f64)
}

/// Trapezoidal area over unit-spaced points.
pub fn trapezoid(scores: &[f64]) -> f64 {
    scores.windows(2).map(|w| (w[0] + w[1]) / 2.0).sum()
}

/// Area under the per-click curve for exactly five click predictions, in `[0, 4]`.
pub fn auc(scores: &[f64]) -> Result<f64> {
    if scores.len() != AUC_POINTS {
        return Err(Error::WrongLength {
            expected: AUC_POINTS,
            found: scores.len(),
        });
    }
    Ok(trapezoid(scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::boundary_voxels;

    fn cube(shape: [usize; 3], lo: [usize; 3], side: usize) -> Mask {
        Grid::from_fn(shape, |c| {
            (0..3).all(|a| c[a] >= lo[a] && c[a] < lo[a] + side)
        })
    }

    #[test]
    fn dice_anchors() {
        let a = cube([6, 6, 6], [1, 1, 1], 2);
        assert_eq!(dice(&a, &a).unwrap(), 1.0);
        let far = cube([6, 6, 6], [4, 4, 4], 2);
        assert_eq!(dice(&a, &far).unwrap(), 0.0);
        let shifted = cube([6, 6, 6], [1, 1, 2], 2);
        // overlap 4 of 8 voxels
        let inter = a
            .data()
            .iter()
            .zip(shifted.data())
            .filter(|(&x, &y)| x && y)
            .count();
        assert_eq!(inter, 4);
        assert_eq!(dice(&a, &shifted).unwrap(), 0.5);
        let empty = Grid::filled([6, 6, 6], false);
        assert_eq!(dice(&empty, &empty).unwrap(), 1.0);
    }

    #[test]
    fn nsd_conventions() {
        let a = cube([8, 8, 8], [2, 2, 2], 3);
        let empty = Grid::filled([8, 8, 8], false);
        assert_eq!(nsd(&a, &a, 2.0).unwrap(), 1.0);
        assert_eq!(nsd(&empty, &a, 2.0).unwrap(), 0.0);
        assert_eq!(nsd(&a, &empty, 2.0).unwrap(), 0.0);
        assert_eq!(nsd(&empty, &empty, 2.0).unwrap(), 1.0);
        assert!(nsd(&a, &a, 0.0).is_err());
    }

    fn brute_nsd(p: &Mask, g: &Mask, tau: f64) -> f64 {
        let (bp, bg) = (boundary_voxels(p), boundary_voxels(g));
        let d = |a: &[usize; 3], b: &[usize; 3]| {
            (0..3)
                .map(|k| (a[k] as f64 - b[k] as f64).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        let near = |from: &[[usize; 3]], to: &[[usize; 3]]| {
            from.iter()
                .filter(|s| to.iter().any(|t| d(s, t) <= tau))
                .count()
        };
        (near(&bp, &bg) + near(&bg, &bp)) as f64 / (bp.len() + bg.len()) as f64
    }

    #[test]
    fn shifted_cube_within_tolerance() {
        let a = cube([9, 9, 9], [3, 3, 3], 3);
        let b = cube([9, 9, 9], [3, 3, 4], 3);
        assert_eq!(brute_nsd(&a, &b, 2.0), 1.0);
        assert_eq!(nsd(&a, &b, 2.0).unwrap(), 1.0);
    }

    #[test]
    fn nsd_matches_brute_force() {
        let a = cube([12, 12, 12], [1, 1, 1], 6);
        let b = cube([12, 12, 12], [4, 3, 2], 5);
        for tau in [0.5, 1.0, 1.5, 2.0, 3.0] {
            assert!((nsd(&a, &b, tau).unwrap() - brute_nsd(&a, &b, tau)).abs() < 1e-12);
        }
    }

    #[test]
    fn auc_anchors() {
        assert_eq!(auc(&[0.0; 5]).unwrap(), 0.0);
        assert_eq!(auc(&[1.0; 5]).unwrap(), 4.0);
        assert!((auc(&[0.5, 0.6, 0.7, 0.8, 0.9]).unwrap() - 2.8).abs() < 1e-12);
        assert!(matches!(
            auc(&[1.0; 4]),
            Err(Error::WrongLength {
                expected: 5,
                found: 4
            })
        ));
    }
}
