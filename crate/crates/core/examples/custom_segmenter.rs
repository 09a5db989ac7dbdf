//! Plug an in-process model into the harness by implementing `Segmenter`.
//! This toy model thresholds the image inside the box and honours clicks.

use voxprompt::harness::{evaluate_case, EpisodeConfig};
use voxprompt::prompts::{
    BBox3, PromptTensor, BBOX_CHANNEL, IMAGE_CHANNEL, NEGATIVE_CHANNEL, POSITIVE_CHANNEL,
};
use voxprompt::segmenter::{SegmentContext, Segmenter};
use voxprompt::{Grid, Result};

struct Threshold {
    level: f32,
    calls: usize,
}

impl Segmenter for Threshold {
    fn name(&self) -> &str {
        "threshold"
    }

    fn segment(&mut self, prompt: &PromptTensor, _ctx: &SegmentContext<'_>) -> Result<Grid<f32>> {
        self.calls += 1;
        let (img, bbox) = (prompt.channel(IMAGE_CHANNEL), prompt.channel(BBOX_CHANNEL));
        let (pos, neg) = (
            prompt.channel(POSITIVE_CHANNEL),
            prompt.channel(NEGATIVE_CHANNEL),
        );
        let data = (0..img.len())
            .map(|i| {
                let fg = (bbox[i] > 0.0 && img[i] > self.level) || pos[i] > 0.0;
                if fg && neg[i] == 0.0 {
                    0.8
                } else {
                    0.05
                }
            })
            .collect();
        Grid::from_vec(prompt.shape(), data)
    }
}

fn main() -> Result<()> {
    let shape = [40, 40, 40];
    let organ = Grid::from_fn(shape, |[z, y, x]| {
        z.abs_diff(14) < 6 && y.abs_diff(14) < 8 && x.abs_diff(20) < 10
    });
    let lesion = Grid::from_fn(shape, |[z, y, x]| {
        z.abs_diff(28) < 4 && y.abs_diff(28) < 4 && x.abs_diff(28) < 4
    });
    let image = Grid::from_fn(shape, |c| {
        if lesion[c] {
            0.9
        } else if organ[c] {
            0.6
        } else {
            0.1
        }
    });
    let cfg = EpisodeConfig {
        patch: [40, 40, 40],
        ..EpisodeConfig::default()
    };
    let case = evaluate_case(
        &image,
        &[organ, lesion],
        &[
            Some(BBox3::new([8, 6, 10], [20, 22, 30])?),
            Some(BBox3::new([24, 24, 24], [32, 32, 32])?),
        ],
        |k, _gt| {
            Ok(Box::new(Threshold {
                level: [0.5, 0.8][k],
                calls: 0,
            }))
        },
        &cfg,
    )?;
    for r in &case.episodes {
        println!(
            "class {}: final DSC {:.3}, NSD {:.3}",
            r.class_id, r.dsc_final, r.nsd_final
        );
    }
    let counts = (0..3).map(|l| case.fused.data().iter().filter(|&&v| v == l).count());
    println!("fused voxels per label: {:?}", counts.collect::<Vec<_>>());
    Ok(())
}
