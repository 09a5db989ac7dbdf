//! Scores and training losses on small hand-made masks.

use voxprompt::scoring::{auc, bce_loss, compound_loss, dice, nsd, soft_dice_loss, LossConfig};
use voxprompt::Grid;

fn main() -> voxprompt::Result<()> {
    let shape = [16, 16, 16];
    let cube = |off: usize| {
        Grid::from_fn(shape, |[z, y, x]| {
            [z, y, x].iter().all(|&v| (4 + off..12 + off).contains(&v))
        })
    };
    let gt = cube(0);
    for off in 0..4 {
        let pred = cube(off);
        println!(
            "shift {off}: dice {:.4}, nsd(tau=1) {:.4}, nsd(tau=2) {:.4}",
            dice(&pred, &gt)?,
            nsd(&pred, &gt, 1.0)?,
            nsd(&pred, &gt, 2.0)?
        );
    }
    println!("AUC of [0.5 .. 0.9] = {}", auc(&[0.5, 0.6, 0.7, 0.8, 0.9])?);

    let probs = Grid::from_fn(shape, |c| if gt[c] { 0.7 } else { 0.2 });
    let cfg = LossConfig::default();
    let d = soft_dice_loss(&probs, &gt, &cfg)?;
    let b = bce_loss(&probs, &gt)?;
    let c = compound_loss(&probs, &gt, &cfg)?;
    println!(
        "soft dice {:.5}, bce {:.5}, compound {:.5}",
        d.value, b.value, c.value
    );
    let g = c.grad.data();
    println!(
        "compound gradient at a foreground voxel {:.3e}, background {:.3e}",
        g[gt.offset([8, 8, 8])],
        g[0]
    );
    Ok(())
}
