//! Dense row-major 3D grids.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Voxel counts along (depth, height, width).
pub type Shape = [usize; 3];
/// Voxel index (z, y, x).
pub type Coord = [usize; 3];

/// Binary volume.
pub type Mask = Grid<bool>;

/// A dense 3D grid, last axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    shape: Shape,
    data: Vec<T>,
}

pub(crate) fn voxel_count(shape: Shape) -> usize {
    shape[0] * shape[1] * shape[2]
}

impl<T> Grid<T> {
    pub fn from_vec(shape: Shape, data: Vec<T>) -> Result<Self> {
        if shape.contains(&0) {
            return Err(Error::InvalidConfig(format!(
                "grid dimensions must be >= 1, got {shape:?}"
            )));
        }
        if data.len() != voxel_count(shape) {
            return Err(Error::ShapeMismatch {
                left: shape.to_vec(),
                right: vec![data.len()],
            });
        }
        Ok(Grid { shape, data })
    }

    /// Panics if any dimension is zero.
    pub fn from_fn(shape: Shape, mut f: impl FnMut(Coord) -> T) -> Self {
        assert!(shape.iter().all(|&d| d > 0), "zero-sized grid {shape:?}");
        let mut data = Vec::with_capacity(voxel_count(shape));
        for z in 0..shape[0] {
            for y in 0..shape[1] {
                for x in 0..shape[2] {
                    data.push(f([z, y, x]));
                }
            }
        }
        Grid { shape, data }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn offset(&self, c: Coord) -> usize {
        debug_assert!(c[0] < self.shape[0] && c[1] < self.shape[1] && c[2] < self.shape[2]);
        (c[0] * self.shape[1] + c[1]) * self.shape[2] + c[2]
    }

    #[inline]
    pub fn coord(&self, offset: usize) -> Coord {
        let [_, h, w] = self.shape;
        [offset / (h * w), (offset / w) % h, offset % w]
    }

    pub fn contains(&self, c: [i64; 3]) -> bool {
        c.iter()
            .zip(self.shape)
            .all(|(&v, d)| v >= 0 && (v as usize) < d)
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            shape: self.shape,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn same_shape<U>(&self, other: &Grid<U>) -> Result<()> {
        if self.shape == other.shape {
            Ok(())
        } else {
            Err(Error::shape(self.shape, other.shape))
        }
    }
}

impl<T: Clone> Grid<T> {
    /// Panics if any dimension is zero.
    pub fn filled(shape: Shape, value: T) -> Self {
        assert!(shape.iter().all(|&d| d > 0), "zero-sized grid {shape:?}");
        Grid {
            shape,
            data: vec![value; voxel_count(shape)],
        }
    }
}

impl<T> Index<Coord> for Grid<T> {
    type Output = T;

    fn index(&self, c: Coord) -> &T {
        &self.data[self.offset(c)]
    }
}

impl<T> IndexMut<Coord> for Grid<T> {
    fn index_mut(&mut self, c: Coord) -> &mut T {
        let i = self.offset(c);
        &mut self.data[i]
    }
}

impl Grid<bool> {
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn to_f32(&self) -> Grid<f32> {
        self.map(|&b| if b { 1.0 } else { 0.0 })
    }
}

impl Grid<f32> {
    /// Strict `> 0.5` binarization.
    pub fn threshold(&self) -> Mask {
        self.map(|&p| p > 0.5)
    }
}
