use std::collections::VecDeque;

use super::{SegmentContext, Segmenter, BACKGROUND_PROB, FOREGROUND_PROB};
use crate::error::Result;
use crate::grid::{Grid, Shape};
use crate::prompts::{
    PromptTensor, BBOX_CHANNEL, IMAGE_CHANNEL, NEGATIVE_CHANNEL, POSITIVE_CHANNEL, PREVIOUS_CHANNEL,
};

/// Intensity-tolerance region growing driven by all five prompt channels.
#[derive(Clone, Debug)]
pub struct RegionGrowSegmenter {
    pub tolerance: f32,
}

impl RegionGrowSegmenter {
    pub fn new(tolerance: f32) -> Self {
        RegionGrowSegmenter { tolerance }
    }
}

impl Segmenter for RegionGrowSegmenter {
    fn name(&self) -> &str {
        "growth"
    }

    fn segment(&mut self, prompt: &PromptTensor, _ctx: &SegmentContext<'_>) -> Result<Grid<f32>> {
        Ok(region_grow_segment(prompt, self.tolerance))
    }
}

fn box_center(channel: &[f32], shape: Shape) -> [usize; 3] {
    let mut lo = [usize::MAX; 3];
    let mut hi = [0; 3];
    let [_, h, w] = shape;
    for (i, _) in channel.iter().enumerate().filter(|(_, &v)| v != 0.0) {
        let c = [i / (h * w), (i / w) % h, i % w];
        for a in 0..3 {
            lo[a] = lo[a].min(c[a]);
            hi[a] = hi[a].max(c[a]);
        }
    }
    if lo[0] == usize::MAX {
        return shape.map(|d| d / 2);
    }
    [0, 1, 2].map(|a| (lo[a] + hi[a]) / 2)
}

/// Grows a 6-connected region from the positive-click voxels (or the box
/// centre when there are none) plus any previous-segmentation voxels,
/// accepting neighbours within `tolerance` of the mean seed intensity.
///
/// Growth stays inside the box when one is given; negative-click spheres
/// are always background.
pub fn region_grow_segment(prompt: &PromptTensor, tolerance: f32) -> Grid<f32> {
    let shape = prompt.shape();
    let [d, h, w] = shape;
    let image = prompt.channel(IMAGE_CHANNEL);
    let bbox = prompt.channel(BBOX_CHANNEL);
    let positive = prompt.channel(POSITIVE_CHANNEL);
    let negative = prompt.channel(NEGATIVE_CHANNEL);
    let previous = prompt.channel(PREVIOUS_CHANNEL);
    let confined = bbox.iter().any(|&v| v != 0.0);
    let allowed = |i: usize| negative[i] == 0.0 && (!confined || bbox[i] != 0.0);

    let mut seeds: Vec<usize> = (0..image.len()).filter(|&i| positive[i] != 0.0).collect();
    if seeds.is_empty() {
        let [z, y, x] = box_center(bbox, shape);
        seeds.push((z * h + y) * w + x);
    }
    let mean = seeds.iter().map(|&i| image[i] as f64).sum::<f64>() / seeds.len() as f64;
    seeds.extend((0..image.len()).filter(|&i| previous[i] != 0.0));

    let mut grown = vec![false; image.len()];
    let mut queue = VecDeque::new();
    for &s in &seeds {
        if allowed(s) && !grown[s] {
            grown[s] = true;
            queue.push_back(s);
        }
    }
    let tol = tolerance as f64;
    while let Some(i) = queue.pop_front() {
        let (z, y, x) = (i / (h * w), (i / w) % h, i % w);
        let mut visit = |j: usize| {
            if !grown[j] && allowed(j) && (image[j] as f64 - mean).abs() <= tol {
                grown[j] = true;
                queue.push_back(j);
            }
        };
        if z > 0 {
            visit(i - h * w);
        }
        if z + 1 < d {
            visit(i + h * w);
        }
        if y > 0 {
            visit(i - w);
        }
        if y + 1 < h {
            visit(i + w);
        }
        if x > 0 {
            visit(i - 1);
        }
        if x + 1 < w {
            visit(i + 1);
        }
    }
    let data = grown
        .into_iter()
        .map(|g| if g { FOREGROUND_PROB } else { BACKGROUND_PROB })
        .collect();
    Grid::from_vec(shape, data).expect("shape preserved")
}
