//! Merge per-class probability maps into one label map.

use voxprompt::harness::fuse_multiclass;
use voxprompt::Grid;

fn main() -> voxprompt::Result<()> {
    let shape = [1, 1, 5];
    let liver = Grid::from_vec(shape, vec![0.9, 0.6, 0.5, 0.2, 0.0])?;
    let kidney = Grid::from_vec(shape, vec![0.1, 0.7, 0.5, 0.3, 0.0])?;
    let labels = fuse_multiclass(&[liver.clone(), kidney.clone()])?;
    for i in 0..5 {
        let (a, b) = (liver.data()[i] as f64, kidney.data()[i] as f64);
        println!(
            "p_liver {a:.1} p_kidney {b:.1} p_bg {:.2} -> label {}",
            (1.0 - a) * (1.0 - b),
            labels.data()[i]
        );
    }
    Ok(())
}
