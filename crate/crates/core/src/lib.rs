//! Segmentation of deformable linear objects (cables, ropes, threads).
//!
//! An image is over-segmented into superpixels, the superpixels form a
//! region adjacency graph, and greedy likelihood walks connect pairs of seed
//! regions placed at object endpoints. Every surviving walk is turned into a
//! B-spline curve and a stroked pixel mask.
//!
//! ```no_run
//! use cablewalk::{segment, Image, PipelineConfig, Point2};
//!
//! let image = Image::open("desk.png")?;
//! let seeds = [Point2::new(40.0, 200.0), Point2::new(600.0, 260.0)];
//! let out = segment(&image, &seeds, &PipelineConfig::default())?;
//! out.result.union.save_png("mask.png")?;
//! # Ok::<(), cablewalk::Error>(())
//! ```

pub mod color;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod exec;
pub mod geometry;
pub mod graph;
pub mod model;
pub mod pipeline;
pub mod raster;
pub mod superpixel;
pub mod synth;
pub mod walker;

pub use config::PipelineConfig;
pub use error::{Error, Result};
pub use exec::Execution;
pub use geometry::Point2;
pub use graph::RegionGraph;
pub use pipeline::{segment, PipelineOutput};
pub use raster::{Image, Mask};
pub use superpixel::{slic_segment, SlicParams, SuperpixelMap};
pub use walker::{run_walks, WalkerParams};
