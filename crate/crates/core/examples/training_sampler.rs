//! Two-setting training prompts: box only, or box plus one simulated click
//! and the thresholded box prediction.

use voxprompt::harness::{EpisodeConfig, TrainingSampler, TrainingSetting};
use voxprompt::prompts::{NEGATIVE_CHANNEL, POSITIVE_CHANNEL, PREVIOUS_CHANNEL};
use voxprompt::segmenter::{OracleConfig, OracleSegmenter};
use voxprompt::Grid;

fn main() -> voxprompt::Result<()> {
    let shape = [32, 32, 32];
    let gt = Grid::from_fn(shape, |[z, y, x]| {
        z.abs_diff(16) + y.abs_diff(15) + x.abs_diff(17) <= 8
    });
    let image = gt.to_f32();
    let mut seg = OracleSegmenter::new(
        gt.clone(),
        OracleConfig {
            blob_count: 3,
            blob_radius: 3,
            seed: 5,
            ..OracleConfig::default()
        },
    )?;
    let mut sampler = TrainingSampler::new(EpisodeConfig {
        patch: [32, 32, 32],
        seed: 42,
        ..EpisodeConfig::default()
    })?;

    let mut one_click = 0;
    for i in 0..8 {
        let s = sampler.sample(&image, &gt, None, &mut seg)?;
        let ones = |k| s.prompt.channel(k).iter().filter(|&&v| v == 1.0).count();
        if s.setting == TrainingSetting::OneClickWithPrev {
            one_click += 1;
        }
        println!(
            "sample {i}: {:?}, click {:?}, pos/neg/prev voxels {}/{}/{}",
            s.setting,
            s.click.map(|c| (c.polarity, c.center)),
            ones(POSITIVE_CHANNEL),
            ones(NEGATIVE_CHANNEL),
            ones(PREVIOUS_CHANNEL)
        );
    }
    println!("{one_click}/8 samples used the click setting");
    Ok(())
}
