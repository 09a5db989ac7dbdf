//! Full interactive episodes: a perfect oracle, a noisy oracle whose errors
//! shrink with every click, and the intensity-based region grower.

use voxprompt::harness::{run_episode, EpisodeConfig, EpisodeResult};
use voxprompt::prompts::BBox3;
use voxprompt::segmenter::{OracleConfig, OracleSegmenter, RegionGrowSegmenter};
use voxprompt::Grid;

fn show(name: &str, r: &EpisodeResult) {
    let dsc: Vec<String> = r.scores.iter().map(|s| format!("{:.3}", s.dsc)).collect();
    println!(
        "{name:>8}: dsc per iteration [{}], DSC_AUC {:.3}, NSD_AUC {:.3}, {} clicks",
        dsc.join(", "),
        r.dsc_auc,
        r.nsd_auc,
        r.clicks.len()
    );
}

fn main() -> voxprompt::Result<()> {
    let shape = [64, 64, 64];
    let gt = Grid::from_fn(shape, |[z, y, x]| {
        let d = |v: usize, c: f64| (v as f64 - c).powi(2);
        d(z, 32.0) / 196.0 + d(y, 30.0) / 100.0 + d(x, 34.0) / 256.0 <= 1.0
    });
    let image = Grid::from_fn(shape, |c| if gt[c] { 120.0 } else { 40.0 });
    let bbox = BBox3::new([18, 20, 18], [47, 41, 51])?;
    let cfg = EpisodeConfig {
        patch: [64, 64, 64],
        ..EpisodeConfig::default()
    };

    let mut perfect = OracleSegmenter::new(gt.clone(), OracleConfig::perfect())?;
    show(
        "perfect",
        &run_episode(&image, &gt, Some(bbox), &mut perfect, &cfg)?,
    );

    let noisy_cfg = OracleConfig {
        flip_rate: 0.05,
        blob_count: 6,
        blob_radius: 4,
        decay: 0.5,
        seed: 3,
    };
    let mut noisy = OracleSegmenter::new(gt.clone(), noisy_cfg)?;
    show(
        "noisy",
        &run_episode(&image, &gt, Some(bbox), &mut noisy, &cfg)?,
    );

    let mut grower = RegionGrowSegmenter::new(16.0);
    let r = run_episode(&image, &gt, Some(bbox), &mut grower, &cfg)?;
    show("growth", &r);
    println!(
        "\nreport JSON:\n{}",
        serde_json::to_string_pretty(&r).unwrap()
    );
    Ok(())
}
