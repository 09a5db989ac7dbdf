//! Decode an NPY CT volume and bring it to u8 with a window preset, then
//! compare against percentile normalisation.
//!
//! ```text
//! cargo run --example preprocess
//! ```

use voxprompt::volume::{
    decode_npy, percentile_window, preprocess_ct, preprocess_percentile, WindowPreset,
};

fn npy_i16(shape: [usize; 3], values: &[i16]) -> Vec<u8> {
    let dict = format!(
        "{{'descr': '<i2', 'fortran_order': False, 'shape': ({}, {}, {}), }}",
        shape[0], shape[1], shape[2]
    );
    let pad = (64 - (10 + dict.len() + 1) % 64) % 64;
    let header = format!("{dict}{}\n", " ".repeat(pad));
    let mut out = b"\x93NUMPY\x01\x00".to_vec();
    out.extend((header.len() as u16).to_le_bytes());
    out.extend(header.as_bytes());
    out.extend(values.iter().flat_map(|v| v.to_le_bytes()));
    out
}

fn main() -> voxprompt::Result<()> {
    // a 4x8x8 ramp from air (-1000 HU) to dense bone (+1500 HU)
    let shape = [4, 8, 8];
    let values: Vec<i16> = (0..256).map(|i| -1000 + (i * 2500 / 255) as i16).collect();
    let vol = decode_npy(&npy_i16(shape, &values))?;
    println!("decoded {:?} {:?}", vol.elem(), vol.shape());

    for preset in WindowPreset::presets() {
        let out = preprocess_ct(&vol, &preset)?;
        let saturated_low = out.data().iter().filter(|&&v| v == 0).count();
        let saturated_high = out.data().iter().filter(|&&v| v == 255).count();
        println!(
            "{:>5} (W {:>6}, L {:>5}): {saturated_low:>3} voxels at 0, {saturated_high:>3} at 255",
            preset.name, preset.width, preset.level
        );
    }

    let (lo, hi) = percentile_window(&vol);
    let norm = preprocess_percentile(&vol);
    println!(
        "percentile window [{lo}, {hi}] -> first {} last {}",
        norm.data()[0],
        norm.data()[255]
    );
    Ok(())
}
