use crate::grid::{Coord, Grid, Mask};

/// Foreground voxels with a 6-neighbour that is background or outside the volume.
pub fn boundary_mask(mask: &Mask) -> Mask {
    let [d, h, w] = mask.shape();
    Grid::from_fn(mask.shape(), |[z, y, x]| {
        if !mask[[z, y, x]] {
            return false;
        }
        z == 0
            || y == 0
            || x == 0
            || z + 1 == d
            || y + 1 == h
            || x + 1 == w
            || !mask[[z - 1, y, x]]
            || !mask[[z + 1, y, x]]
            || !mask[[z, y - 1, x]]
            || !mask[[z, y + 1, x]]
            || !mask[[z, y, x - 1]]
            || !mask[[z, y, x + 1]]
    })
}

/// Boundary voxel coordinates in scan order.
pub fn boundary_voxels(mask: &Mask) -> Vec<Coord> {
    let b = boundary_mask(mask);
    b.data()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v)
        .map(|(i, _)| b.coord(i))
        .collect()
}
