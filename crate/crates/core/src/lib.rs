//! Interaction simulation for interactive volumetric segmentation.

pub mod cli;
pub mod clickgen;
pub mod crop;
pub mod error;
pub mod grid;
pub mod harness;
pub mod kernels;
pub mod prompts;
pub mod scoring;
pub mod segmenter;
pub mod volume;

pub use error::{Error, Result};
pub use grid::{Coord, Grid, Mask, Shape};
