//! Exact squared Euclidean distance transform.
//!
//! Three 1D passes, each computing the lower envelope of the parabolas
//! `(x - i)^2 + f(i)` with integer separators, so results are exact.

use crate::grid::{Grid, Mask, Shape};

/// Squared distances, exact integers.
pub type DistanceMap = Grid<u64>;

/// Distance value for voxels with no reachable site.
pub const UNREACHABLE: u64 = u64::MAX;

/// Squared distance from each voxel to the nearest background voxel.
///
/// Everything outside the volume counts as background, so an all-foreground
/// volume still has finite distances.
pub fn edt_squared(mask: &Mask) -> DistanceMap {
    let init = mask
        .data()
        .iter()
        .map(|&fg| if fg { UNREACHABLE } else { 0 })
        .collect();
    let data = separable(mask.shape(), init, true);
    Grid::from_vec(mask.shape(), data).expect("shape preserved")
}

/// Squared distance from each voxel to the nearest `true` voxel of `sites`.
///
/// No virtual border; if there are no sites every value is [`UNREACHABLE`].
pub fn edt_squared_to_sites(sites: &Mask) -> DistanceMap {
    let init = sites
        .data()
        .iter()
        .map(|&s| if s { 0 } else { UNREACHABLE })
        .collect();
    let data = separable(sites.shape(), init, false);
    Grid::from_vec(sites.shape(), data).expect("shape preserved")
}

fn separable(shape: Shape, mut values: Vec<u64>, border: bool) -> Vec<u64> {
    let [_, h, w] = shape;
    let strides = [h * w, w, 1];
    let mut env = Envelope::default();
    let mut line_in = Vec::new();
    let mut line_out = Vec::new();
    // x, then y, then z
    for axis in [2usize, 1, 0] {
        let len = shape[axis];
        let stride = strides[axis];
        let others: Vec<usize> = (0..3).filter(|&a| a != axis).collect();
        for a in 0..shape[others[0]] {
            for b in 0..shape[others[1]] {
                let base = a * strides[others[0]] + b * strides[others[1]];
                line_in.clear();
                line_in.extend((0..len).map(|i| values[base + i * stride]));
                line_out.resize(len, 0);
                env.run(&line_in, &mut line_out, border);
                for (i, &v) in line_out.iter().enumerate() {
                    values[base + i * stride] = v;
                }
            }
        }
    }
    values
}

#[derive(Default)]
struct Envelope {
    pos: Vec<i64>,
    val: Vec<i64>,
    start: Vec<i64>,
}

impl Envelope {
    #[inline]
    fn eval(&self, x: i64, k: usize) -> i64 {
        let dx = x - self.pos[k];
        dx * dx + self.val[k]
    }

    /// Last integer x at which site `k` is still no worse than the site at
    /// (`u`, `fu`).
    #[inline]
    fn sep(&self, k: usize, u: i64, fu: i64) -> i64 {
        let i = self.pos[k];
        (u * u - i * i + fu - self.val[k]).div_euclid(2 * (u - i))
    }

    fn push_site(&mut self, u: i64, fu: i64, m: i64) {
        while let Some(k) = self.pos.len().checked_sub(1) {
            let t = self.start[k];
            let du = t - u;
            if self.eval(t, k) > du * du + fu {
                self.pos.pop();
                self.val.pop();
                self.start.pop();
            } else {
                break;
            }
        }
        match self.pos.len().checked_sub(1) {
            None => {
                self.pos.push(u);
                self.val.push(fu);
                self.start.push(0);
            }
            Some(k) => {
                let w = 1 + self.sep(k, u, fu);
                if w < m {
                    self.pos.push(u);
                    self.val.push(fu);
                    self.start.push(w);
                }
            }
        }
    }

    fn run(&mut self, f: &[u64], out: &mut [u64], border: bool) {
        let m = f.len() as i64;
        self.pos.clear();
        self.val.clear();
        self.start.clear();
        if border {
            self.push_site(-1, 0, m);
        }
        for (i, &v) in f.iter().enumerate() {
            if v != UNREACHABLE {
                self.push_site(i as i64, v as i64, m);
            }
        }
        if border {
            self.push_site(m, 0, m);
        }
        if self.pos.is_empty() {
            out.fill(UNREACHABLE);
            return;
        }
        let mut k = self.pos.len() - 1;
        for x in (0..m).rev() {
            out[x as usize] = self.eval(x, k) as u64;
            if x == self.start[k] && k > 0 {
                k -= 1;
            }
        }
    }
}
