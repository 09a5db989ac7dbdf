use serde::Serialize;

use crate::grid::{Coord, Grid, Mask};
use crate::prompts::BBox3;

/// Component labels, 0 for background, 1..=n in scan order of first voxel.
pub type LabelMap = Grid<u32>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentStats {
    pub label: u32,
    pub voxel_count: usize,
    /// First voxel of the component in z, y, x scan order.
    pub seed: Coord,
    /// Tight bounding box of the component.
    pub bounds: BBox3,
}

fn find(parent: &mut [u32], mut i: u32) -> u32 {
    while parent[i as usize] != i {
        let p = parent[i as usize];
        parent[i as usize] = parent[p as usize];
        i = p;
    }
    i
}

fn union(parent: &mut [u32], a: u32, b: u32) {
    let ra = find(parent, a);
    let rb = find(parent, b);
    if ra != rb {
        // keep the earlier voxel as root
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi as usize] = lo;
    }
}

/// Labels 26-connected foreground components with a two-pass union-find.
pub fn connected_components_26(mask: &Mask) -> (LabelMap, Vec<ComponentStats>) {
    let [d, h, w] = mask.shape();
    let n = mask.len();
    assert!(n < u32::MAX as usize, "volume too large for u32 labels");
    let fg = mask.data();
    let mut parent: Vec<u32> = (0..n as u32).collect();

    // the 13 neighbours that precede a voxel in scan order
    let mut back = Vec::with_capacity(13);
    for dz in -1i64..=0 {
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if dz == -1 || dy == -1 || (dy == 0 && dx == -1) {
                    back.push([dz, dy, dx]);
                }
            }
        }
    }

    for z in 0..d {
        for y in 0..h {
            for x in 0..w {
                let i = (z * h + y) * w + x;
                if !fg[i] {
                    continue;
                }
                for o in &back {
                    let (nz, ny, nx) = (z as i64 + o[0], y as i64 + o[1], x as i64 + o[2]);
                    if nz < 0 || ny < 0 || nx < 0 || ny >= h as i64 || nx >= w as i64 {
                        continue;
                    }
                    let j = (nz as usize * h + ny as usize) * w + nx as usize;
                    if fg[j] {
                        union(&mut parent, i as u32, j as u32);
                    }
                }
            }
        }
    }

    let mut labels = vec![0u32; n];
    let mut label_of_root = vec![0u32; n];
    let mut stats: Vec<ComponentStats> = Vec::new();
    for i in 0..n {
        if !fg[i] {
            continue;
        }
        let root = find(&mut parent, i as u32) as usize;
        let c = mask.coord(i);
        if label_of_root[root] == 0 {
            stats.push(ComponentStats {
                label: stats.len() as u32 + 1,
                voxel_count: 0,
                seed: c,
                bounds: BBox3 {
                    lo: c,
                    hi: c.map(|v| v + 1),
                },
            });
            label_of_root[root] = stats.len() as u32;
        }
        let label = label_of_root[root];
        labels[i] = label;
        let s = &mut stats[label as usize - 1];
        s.voxel_count += 1;
        for (a, &v) in c.iter().enumerate() {
            s.bounds.lo[a] = s.bounds.lo[a].min(v);
            s.bounds.hi[a] = s.bounds.hi[a].max(v + 1);
        }
    }
    (
        Grid::from_vec(mask.shape(), labels).expect("shape preserved"),
        stats,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty() {
        let (labels, stats) = connected_components_26(&Grid::filled([3, 3, 3], false));
        assert!(stats.is_empty());
        assert!(labels.data().iter().all(|&l| l == 0));
    }

    #[test]
    fn diagonal_corner_is_connected() {
        let mut m = Grid::filled([2, 2, 2], false);
        m[[0, 0, 0]] = true;
        m[[1, 1, 1]] = true;
        let (_, stats) = connected_components_26(&m);
        assert_eq!(stats.len(), 1);
        assert_eq!(stats[0].voxel_count, 2);
    }

    #[test]
    fn scan_order_labels() {
        let mut m = Grid::filled([1, 3, 5], false);
        // second component starts later in scan order but merges through an
        // anti-diagonal link that appears only on the last row
        m[[0, 0, 4]] = true;
        m[[0, 0, 0]] = true;
        m[[0, 1, 3]] = true;
        m[[0, 2, 0]] = true;
        let (labels, stats) = connected_components_26(&m);
        assert_eq!(stats.len(), 3);
        assert_eq!(labels[[0, 0, 0]], 1);
        assert_eq!(labels[[0, 0, 4]], 2);
        assert_eq!(labels[[0, 1, 3]], 2);
        assert_eq!(labels[[0, 2, 0]], 3);
        assert_eq!(
            stats[1].bounds,
            BBox3 {
                lo: [0, 0, 3],
                hi: [1, 2, 5]
            }
        );
    }
}
