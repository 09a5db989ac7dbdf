//! Drive a segmenter that runs as a separate process. The child reads the
//! prompt tensor as VVOL on stdin and writes a probability volume to stdout;
//! by default a small Python stub answers with the positive-click channel,
//! so every positive click adds its sphere to the prediction.
//!
//! ```text
//! cargo run --example external_segmenter [path/to/model-executable]
//! ```

use std::time::Duration;

use voxprompt::harness::{run_episode, BBoxMode, EpisodeConfig};
use voxprompt::segmenter::ExternalSegmenter;
use voxprompt::Grid;

fn main() {
    let (program, args) = match std::env::args().nth(1) {
        Some(p) => (p, vec![]),
        None => (
            concat!(
                env!("CARGO_MANIFEST_DIR"),
                "/tests/fixtures/echo_channel.py"
            )
            .to_string(),
            vec!["2".to_string()],
        ),
    };
    let shape = [24, 24, 24];
    let gt = Grid::from_fn(shape, |[z, y, x]| {
        (6..18).contains(&z) && (8..16).contains(&y) && (4..20).contains(&x)
    });
    let image = gt.to_f32();
    let cfg = EpisodeConfig {
        bbox_mode: BBoxMode::AbsentNone,
        patch: [24, 24, 24],
        ..EpisodeConfig::default()
    };
    let mut seg = ExternalSegmenter::new(&program, Duration::from_secs(10)).with_args(args);
    match run_episode(&image, &gt, None, &mut seg, &cfg) {
        Ok(r) => {
            for s in &r.scores {
                println!(
                    "iteration {}: dsc {:.4} nsd {:.4} ({:.1} ms)",
                    s.iter, s.dsc, s.nsd, s.wall_ms
                );
            }
        }
        Err(e) => {
            eprintln!("segmenter {program} failed: {e}");
            std::process::exit(1);
        }
    }
}
