//! Artifacts of one segmentation, shared by `segment` and the serve API.

use std::fs;
use std::path::Path;

use cablewalk::model::SegmentationResult;
use cablewalk::pipeline::{render_overlay, SplinesDocument, WalksDocument};
use cablewalk::{Image, PipelineConfig, PipelineOutput, Result};

pub const WALKS_FILE: &str = "walks.json";
pub const SPLINES_FILE: &str = "splines.json";
pub const OVERLAY_FILE: &str = "overlay.png";
pub const CONFIG_FILE: &str = "config.json";

/// Writes the dataset layout for `result` plus walks, splines, overlay and
/// the effective config. `result` may be a subset of `output.result`.
pub fn write_segmentation(
    dir: &Path,
    image: &Image,
    output: &PipelineOutput,
    result: &SegmentationResult,
    config: &PipelineConfig,
    verbose: bool,
) -> Result<()> {
    let gap = config.spline.sample_gap_px;
    cablewalk::dataset::write_result(dir, image, result, gap)?;
    write_walks(dir, output, config, verbose)?;
    fs::write(dir.join(SPLINES_FILE), to_json(&SplinesDocument::new(result, gap))?)?;
    render_overlay(image, output).save_png(dir.join(OVERLAY_FILE))?;
    fs::write(dir.join(CONFIG_FILE), config.to_json()?)?;
    Ok(())
}

pub fn write_walks(dir: &Path, output: &PipelineOutput, config: &PipelineConfig, verbose: bool) -> Result<()> {
    fs::create_dir_all(dir)?;
    let doc = WalksDocument::new(output, &config.walker_params(), verbose);
    fs::write(dir.join(WALKS_FILE), to_json(&doc)?)?;
    Ok(())
}

pub fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}
