//! Simulate a user correcting a bad prediction one click at a time, without
//! any segmenter: each click's sphere is painted into the prediction.

use voxprompt::clickgen::generate_click;
use voxprompt::prompts::{sphere_offsets, Polarity};
use voxprompt::scoring::dice;
use voxprompt::Grid;

fn main() -> voxprompt::Result<()> {
    let shape = [40, 40, 40];
    let gt = Grid::from_fn(shape, |[z, y, x]| {
        let (z, y, x) = (z as i64 - 20, y as i64 - 18, x as i64 - 22);
        z * z + y * y + x * x <= 100
    });
    // shifted and too small
    let mut pred = Grid::from_fn(shape, |[z, y, x]| {
        let (z, y, x) = (z as i64 - 23, y as i64 - 18, x as i64 - 22);
        if z * z + y * y + x * x <= 36 {
            0.9f32
        } else {
            0.1
        }
    });

    for round in 1..=6 {
        let Some(p) = generate_click(&pred, &gt)? else {
            println!("round {round}: no errors left");
            break;
        };
        println!(
            "round {round}: {:?} click at {:?}, component of {} voxels, depth^2 {}",
            p.click.polarity, p.click.center, p.component_size, p.edt_sq
        );
        let value = if p.click.polarity == Polarity::Positive {
            0.9
        } else {
            0.1
        };
        for o in sphere_offsets() {
            let q = [0, 1, 2].map(|a| p.click.center[a] as i64 + o[a]);
            if pred.contains(q) {
                pred[q.map(|v| v as usize)] = value;
            }
        }
        println!("          dice now {:.4}", dice(&pred.threshold(), &gt)?);
    }
    Ok(())
}
