//! Prompt types and rasterization into the 5-channel network input.
//!
//! Channel layout: 0 image, 1 bounding box, 2 positive clicks, 3 negative
//! clicks, 4 previous segmentation. Channels 1-4 are binary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{voxel_count, Coord, Grid, Mask, Shape};
use crate::volume::{decode_vvol, Buffer, VvolArray};

pub const PROMPT_CHANNELS: usize = 5;
pub const CLICK_RADIUS: i64 = 4;

pub const IMAGE_CHANNEL: usize = 0;
pub const BBOX_CHANNEL: usize = 1;
pub const POSITIVE_CHANNEL: usize = 2;
pub const NEGATIVE_CHANNEL: usize = 3;
pub const PREVIOUS_CHANNEL: usize = 4;

/// Axis-aligned box, `lo` inclusive and `hi` exclusive per axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BBox3 {
    pub lo: Coord,
    pub hi: Coord,
}

impl BBox3 {
    pub fn new(lo: Coord, hi: Coord) -> Result<Self> {
        if (0..3).any(|a| lo[a] >= hi[a]) {
            return Err(Error::InvalidBBox(format!("lo {lo:?} must be < hi {hi:?}")));
        }
        Ok(BBox3 { lo, hi })
    }

    /// The whole extent of `shape`.
    pub fn full(shape: Shape) -> Self {
        BBox3 {
            lo: [0; 3],
            hi: shape,
        }
    }

    pub fn size(&self) -> [usize; 3] {
        [0, 1, 2].map(|a| self.hi[a] - self.lo[a])
    }

    pub fn center(&self) -> Coord {
        [0, 1, 2].map(|a| (self.lo[a] + self.hi[a]) / 2)
    }

    pub fn volume(&self) -> usize {
        self.size().iter().product()
    }

    pub fn contains(&self, c: Coord) -> bool {
        (0..3).all(|a| self.lo[a] <= c[a] && c[a] < self.hi[a])
    }

    pub fn fits(&self, shape: Shape) -> bool {
        (0..3).all(|a| self.lo[a] < self.hi[a] && self.hi[a] <= shape[a])
    }

    pub fn check_within(&self, shape: Shape) -> Result<()> {
        if self.fits(shape) {
            Ok(())
        } else {
            Err(Error::InvalidBBox(format!(
                "{:?}..{:?} does not fit in shape {shape:?}",
                self.lo, self.hi
            )))
        }
    }

    pub fn to_mask(&self, shape: Shape) -> Mask {
        Grid::from_fn(shape, |c| self.contains(c))
    }
}

/// Fallback box covering the central third of each axis.
pub fn default_bbox(shape: Shape) -> BBox3 {
    let mut lo = [0; 3];
    let mut hi = [0; 3];
    for a in 0..3 {
        let d = shape[a];
        lo[a] = d / 3;
        hi[a] = 2 * d / 3;
        if hi[a] <= lo[a] {
            hi[a] = (lo[a] + 1).min(d);
        }
    }
    BBox3 { lo, hi }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "ClickRecord", into = "ClickRecord")]
pub struct Click {
    pub center: Coord,
    pub polarity: Polarity,
}

#[derive(Serialize, Deserialize)]
struct ClickRecord {
    z: usize,
    y: usize,
    x: usize,
    polarity: Polarity,
}

impl From<ClickRecord> for Click {
    fn from(r: ClickRecord) -> Self {
        Click {
            center: [r.z, r.y, r.x],
            polarity: r.polarity,
        }
    }
}

impl From<Click> for ClickRecord {
    fn from(c: Click) -> Self {
        ClickRecord {
            z: c.center[0],
            y: c.center[1],
            x: c.center[2],
            polarity: c.polarity,
        }
    }
}

impl Click {
    pub fn positive(center: Coord) -> Self {
        Click {
            center,
            polarity: Polarity::Positive,
        }
    }

    pub fn negative(center: Coord) -> Self {
        Click {
            center,
            polarity: Polarity::Negative,
        }
    }
}

/// Ordered click history. Duplicates are allowed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClickSet(pub Vec<Click>);

impl ClickSet {
    pub fn new() -> Self {
        ClickSet(Vec::new())
    }

    pub fn push(&mut self, click: Click) {
        self.0.push(click);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Click> {
        self.0.iter()
    }

    pub fn with_polarity(&self, polarity: Polarity) -> impl Iterator<Item = Coord> + '_ {
        self.0
            .iter()
            .filter(move |c| c.polarity == polarity)
            .map(|c| c.center)
    }
}

impl FromIterator<Click> for ClickSet {
    fn from_iter<I: IntoIterator<Item = Click>>(iter: I) -> Self {
        ClickSet(iter.into_iter().collect())
    }
}

/// Integer offsets within Euclidean distance `CLICK_RADIUS` of the origin.
pub fn sphere_offsets() -> Vec<[i64; 3]> {
    sphere_offsets_with_radius(CLICK_RADIUS)
}

/// Integer offsets within Euclidean distance `r` of the origin.
pub fn sphere_offsets_with_radius(r: i64) -> Vec<[i64; 3]> {
    let mut out = Vec::new();
    for dz in -r..=r {
        for dy in -r..=r {
            for dx in -r..=r {
                if dz * dz + dy * dy + dx * dx <= r * r {
                    out.push([dz, dy, dx]);
                }
            }
        }
    }
    out
}

/// Sets every voxel within the click radius of any center to 1, clipped at the borders.
pub fn paint_spheres(channel: &mut [f32], shape: Shape, centers: impl IntoIterator<Item = Coord>) {
    debug_assert_eq!(channel.len(), voxel_count(shape));
    let offsets = sphere_offsets();
    for c in centers {
        for o in &offsets {
            let p = [0, 1, 2].map(|a| c[a] as i64 + o[a]);
            if (0..3).all(|a| p[a] >= 0 && (p[a] as usize) < shape[a]) {
                let idx = (p[0] as usize * shape[1] + p[1] as usize) * shape[2] + p[2] as usize;
                channel[idx] = 1.0;
            }
        }
    }
}

/// The 5-channel model input, channel-first.
#[derive(Clone, Debug, PartialEq)]
pub struct PromptTensor {
    shape: Shape,
    data: Vec<f32>,
}

impl PromptTensor {
    pub fn zeros(shape: Shape) -> Self {
        PromptTensor {
            shape,
            data: vec![0.0; PROMPT_CHANNELS * voxel_count(shape)],
        }
    }

    /// Assembles a tensor from explicit channels; mask channels must be binary.
    pub fn from_channels(channels: [Grid<f32>; PROMPT_CHANNELS]) -> Result<Self> {
        let shape = channels[0].shape();
        let mut data = Vec::with_capacity(PROMPT_CHANNELS * voxel_count(shape));
        for (i, ch) in channels.iter().enumerate() {
            channels[0].same_shape(ch)?;
            if i > 0 && ch.data().iter().any(|&v| v != 0.0 && v != 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "prompt channel {i} is not binary"
                )));
            }
            data.extend_from_slice(ch.data());
        }
        Ok(PromptTensor { shape, data })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn channel(&self, i: usize) -> &[f32] {
        let n = voxel_count(self.shape);
        &self.data[i * n..(i + 1) * n]
    }

    pub fn channel_mut(&mut self, i: usize) -> &mut [f32] {
        let n = voxel_count(self.shape);
        &mut self.data[i * n..(i + 1) * n]
    }

    pub fn channel_grid(&self, i: usize) -> Grid<f32> {
        Grid::from_vec(self.shape, self.channel(i).to_vec()).expect("channel length")
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn to_vvol_bytes(&self) -> Vec<u8> {
        let [d, h, w] = self.shape;
        crate::volume::vvol_encode_f32(&[PROMPT_CHANNELS, d, h, w], &self.data)
    }

    pub fn from_vvol_bytes(bytes: &[u8]) -> Result<Self> {
        Self::try_from(decode_vvol(bytes)?)
    }
}

impl TryFrom<VvolArray> for PromptTensor {
    type Error = Error;

    fn try_from(array: VvolArray) -> Result<Self> {
        if array.dims.len() != 4 || array.dims[0] != PROMPT_CHANNELS {
            return Err(Error::BadHeader(format!(
                "prompt tensor must be {PROMPT_CHANNELS}xDxHxW, got {:?}",
                array.dims
            )));
        }
        let Buffer::F32(data) = array.data else {
            return Err(Error::UnsupportedDescr(format!("{:?}", array.data.elem())));
        };
        Ok(PromptTensor {
            shape: [array.dims[1], array.dims[2], array.dims[3]],
            data,
        })
    }
}

/// Builds the prompt tensor for `image`.
///
/// A missing box leaves channel 1 empty; a missing previous segmentation
/// leaves channel 4 zero.
pub fn rasterize(
    image: &Grid<f32>,
    bbox: Option<&BBox3>,
    clicks: &ClickSet,
    prev: Option<&Mask>,
) -> Result<PromptTensor> {
    let shape = image.shape();
    if let Some(p) = prev {
        image.same_shape(p)?;
    }
    if let Some(b) = bbox {
        b.check_within(shape)?;
    }
    for c in clicks.iter() {
        if (0..3).any(|a| c.center[a] >= shape[a]) {
            return Err(Error::ClickOutOfBounds {
                center: c.center,
                shape,
            });
        }
    }

    let mut t = PromptTensor::zeros(shape);
    t.channel_mut(IMAGE_CHANNEL).copy_from_slice(image.data());
    if let Some(b) = bbox {
        let ch = t.channel_mut(BBOX_CHANNEL);
        for z in b.lo[0]..b.hi[0] {
            for y in b.lo[1]..b.hi[1] {
                let row = (z * shape[1] + y) * shape[2];
                ch[row + b.lo[2]..row + b.hi[2]].fill(1.0);
            }
        }
    }
    paint_spheres(
        t.channel_mut(POSITIVE_CHANNEL),
        shape,
        clicks.with_polarity(Polarity::Positive),
    );
    paint_spheres(
        t.channel_mut(NEGATIVE_CHANNEL),
        shape,
        clicks.with_polarity(Polarity::Negative),
    );
    if let Some(p) = prev {
        for (dst, &src) in t.channel_mut(PREVIOUS_CHANNEL).iter_mut().zip(p.data()) {
            *dst = if src { 1.0 } else { 0.0 };
        }
    }
    Ok(t)
}
