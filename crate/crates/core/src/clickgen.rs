//! Error-driven click generation.
//!
//! The click targets the largest 26-connected region where the thresholded
//! prediction disagrees with the ground truth, placed at the voxel deepest
//! inside that region, with polarity taken from the ground truth there.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::grid::{Coord, Grid, Mask};
use crate::kernels::{connected_components_26, edt_squared, error_mask, ComponentStats};
use crate::prompts::{BBox3, Click, ClickSet, Polarity};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClickProposal {
    #[serde(flatten)]
    pub click: Click,
    pub component_size: usize,
    pub component_label: u32,
    pub edt_sq: u64,
}

/// How to choose among voxels that share the maximal distance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CenterSelection {
    /// First maximum in (z, y, x) order.
    #[default]
    FirstArgmax,
    /// Uniform choice among all maxima, seeded.
    SeededUniform(u64),
}

pub fn generate_click(pred: &Grid<f32>, gt: &Mask) -> Result<Option<ClickProposal>> {
    generate_click_with(pred, gt, CenterSelection::FirstArgmax)
}

pub fn generate_click_with(
    pred: &Grid<f32>,
    gt: &Mask,
    selection: CenterSelection,
) -> Result<Option<ClickProposal>> {
    let errors = error_mask(pred, gt)?;
    let (labels, stats) = connected_components_26(&errors);
    // strict > keeps the earliest label on ties
    let mut largest: Option<&ComponentStats> = None;
    for s in &stats {
        if largest.is_none_or(|b| s.voxel_count > b.voxel_count) {
            largest = Some(s);
        }
    }
    let Some(largest) = largest else {
        return Ok(None);
    };

    // Only the chosen component is foreground. Growing its bounds by one voxel
    // keeps the EDT exact: the added layer is background and anything beyond
    // it is farther away.
    let shape = pred.shape();
    let window = BBox3 {
        lo: largest.bounds.lo.map(|v| v.saturating_sub(1)),
        hi: [0, 1, 2].map(|a| (largest.bounds.hi[a] + 1).min(shape[a])),
    };
    let size = window.size();
    let sub = Grid::from_fn(size, |[z, y, x]| {
        labels[[window.lo[0] + z, window.lo[1] + y, window.lo[2] + x]] == largest.label
    });
    let dist = edt_squared(&sub);

    let best = dist.data().iter().copied().max().unwrap_or(0);
    let to_full = |i: usize| -> Coord {
        let c = dist.coord(i);
        [0, 1, 2].map(|a| c[a] + window.lo[a])
    };
    let center = match selection {
        CenterSelection::FirstArgmax => to_full(
            dist.data()
                .iter()
                .position(|&v| v == best)
                .expect("non-empty"),
        ),
        CenterSelection::SeededUniform(seed) => {
            let ties: Vec<usize> = dist
                .data()
                .iter()
                .enumerate()
                .filter(|(_, &v)| v == best)
                .map(|(i, _)| i)
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            to_full(ties[rng.gen_range(0..ties.len())])
        }
    };
    let polarity = if gt[center] {
        Polarity::Positive
    } else {
        Polarity::Negative
    };
    Ok(Some(ClickProposal {
        click: Click { center, polarity },
        component_size: largest.voxel_count,
        component_label: largest.label,
        edt_sq: best,
    }))
}

/// Returns `clicks` with the proposal appended.
pub fn apply_click(clicks: &ClickSet, proposal: &ClickProposal) -> ClickSet {
    let mut out = clicks.clone();
    out.push(proposal.click);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_error_no_click() {
        let gt = Grid::from_fn([5, 5, 5], |[z, _, _]| z > 2);
        assert_eq!(generate_click(&gt.to_f32(), &gt).unwrap(), None);
    }

    #[test]
    fn missed_cube_gets_center_click() {
        let gt = Grid::from_fn([11, 11, 11], |c| c.iter().all(|&v| (3..8).contains(&v)));
        let pred = Grid::filled([11, 11, 11], 0.0f32);
        let p = generate_click(&pred, &gt).unwrap().unwrap();
        assert_eq!(p.click, Click::positive([5, 5, 5]));
        assert_eq!(p.edt_sq, 9);
        assert_eq!(p.component_size, 125);
    }

    #[test]
    fn larger_false_positive_wins() {
        let shape = [10, 10, 10];
        let mut gt = Grid::filled(shape, false);
        let mut pred = Grid::filled(shape, 0.1f32);
        // 7-voxel false positive: a plus shape around (2, 2, 2)
        for c in [
            [2, 2, 2],
            [1, 2, 2],
            [3, 2, 2],
            [2, 1, 2],
            [2, 3, 2],
            [2, 2, 1],
            [2, 2, 3],
        ] {
            pred[c] = 0.9;
        }
        // 3-voxel false negative far away
        for x in 6..9 {
            gt[[7, 7, x]] = true;
        }
        let errs = error_mask(&pred, &gt).unwrap();
        let (_, stats) = connected_components_26(&errs);
        let sizes: Vec<_> = stats.iter().map(|s| s.voxel_count).collect();
        assert_eq!(sizes, vec![7, 3]);
        let p = generate_click(&pred, &gt).unwrap().unwrap();
        assert_eq!(p.click.polarity, Polarity::Negative);
        assert_eq!(p.click.center, [2, 2, 2]);
        assert_eq!(p.component_size, 7);
    }

    #[test]
    fn seeded_uniform_picks_a_maximum() {
        let gt = Grid::from_fn([6, 6, 6], |[z, y, x]| z < 4 && y < 4 && x < 4);
        let pred = Grid::filled([6, 6, 6], 0.0f32);
        let first = generate_click(&pred, &gt).unwrap().unwrap();
        for seed in 0..10 {
            let p = generate_click_with(&pred, &gt, CenterSelection::SeededUniform(seed))
                .unwrap()
                .unwrap();
            assert_eq!(p.edt_sq, first.edt_sq);
            assert_eq!(
                generate_click_with(&pred, &gt, CenterSelection::SeededUniform(seed)).unwrap(),
                Some(p)
            );
        }
    }

    #[test]
    fn apply_click_appends() {
        let p = ClickProposal {
            click: Click::positive([0, 0, 0]),
            component_size: 1,
            component_label: 1,
            edt_sq: 1,
        };
        let empty = ClickSet::new();
        assert_eq!(apply_click(&empty, &p).len(), 1);
        let four: ClickSet = (0..4).map(|i| Click::negative([i, 0, 0])).collect();
        let five = apply_click(&four, &p);
        assert_eq!(five.len(), 5);
        assert_eq!(&five.0[..4], &four.0[..]);
        assert_eq!(apply_click(&five, &p).len(), 6);
        assert_eq!(four.len(), 4);
    }

    #[test]
    fn proposal_json() {
        let p = ClickProposal {
            click: Click::positive([1, 2, 3]),
            component_size: 9,
            component_label: 1,
            edt_sq: 4,
        };
        let v = serde_json::to_value(&p).unwrap();
        assert_eq!(v["z"], 1);
        assert_eq!(v["x"], 3);
        assert_eq!(v["polarity"], "positive");
        assert_eq!(v["component_size"], 9);
    }
}
