//! Content-aware cropping: small boxes get a fixed-size window, large boxes
//! a zoomed one. Shows extraction to the network patch and pasting back.

use voxprompt::crop::{compute_crop, extract_patch, paste_prediction};
use voxprompt::kernels::Interp;
use voxprompt::prompts::BBox3;
use voxprompt::Grid;

fn main() -> voxprompt::Result<()> {
    let shape = [300, 512, 512];
    let patch = [192, 192, 192];
    for (lo, hi) in [
        ([100, 200, 200], [164, 264, 264]),
        ([50, 100, 100], [250, 300, 400]),
        ([0, 0, 0], [300, 512, 512]),
    ] {
        let bbox = BBox3::new(lo, hi)?;
        let spec = compute_crop(&bbox, patch, shape)?;
        println!(
            "box {:?}: z = {:.4}, window {:?} at {:?}",
            bbox.size(),
            spec.zoom,
            spec.scaled_patch,
            spec.origin
        );
    }

    let small = [48, 64, 64];
    let vol = Grid::from_fn(small, |[z, y, x]| (z + y + x) as f32);
    let bbox = BBox3::new([10, 10, 10], [40, 60, 60])?;
    let spec = compute_crop(&bbox, [32, 32, 32], small)?;
    let patch_vals = extract_patch(&vol, &spec, Interp::Trilinear);
    let back = paste_prediction(&patch_vals, &spec, small)?;
    println!(
        "zoomed crop {:?} -> patch {:?} -> pasted {:?}, value at centre {} vs {}",
        spec.scaled_patch,
        patch_vals.shape(),
        back.shape(),
        back[[24, 32, 32]],
        vol[[24, 32, 32]]
    );
    Ok(())
}
