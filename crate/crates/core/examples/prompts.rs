//! Rasterise a box, two clicks and a previous mask into the five-channel
//! prompt tensor and inspect each channel.

use voxprompt::prompts::{rasterize, BBox3, Click, ClickSet, PROMPT_CHANNELS};
use voxprompt::Grid;

fn main() -> voxprompt::Result<()> {
    let shape = [32, 32, 32];
    let image = Grid::from_fn(shape, |[z, y, x]| ((z + y + x) % 16) as f32 / 15.0);
    let bbox = BBox3::new([8, 8, 8], [24, 24, 24])?;
    let clicks: ClickSet = [Click::positive([16, 16, 16]), Click::negative([1, 30, 2])]
        .into_iter()
        .collect();
    let prev = Grid::from_fn(shape, |[z, y, x]| (12..20).contains(&z) && y > 10 && x > 10);

    let tensor = rasterize(&image, Some(&bbox), &clicks, Some(&prev))?;
    let names = ["image", "bbox", "positive", "negative", "previous"];
    for (k, name) in names.iter().enumerate().take(PROMPT_CHANNELS) {
        let sum: f32 = tensor.channel(k).iter().sum();
        println!("channel {k} ({name:>8}): sum {sum:.1}");
    }
    // the negative click sits in a corner, so its sphere is clipped
    println!(
        "request size on the wire: {} bytes",
        tensor.to_vvol_bytes().len()
    );
    println!(
        "clicks as JSON: {}",
        serde_json::to_string(&clicks).unwrap()
    );
    Ok(())
}
