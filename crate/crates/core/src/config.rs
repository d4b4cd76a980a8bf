//! The single configuration document that drives a pipeline run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::graph::{DEFAULT_BINS, DEFAULT_ORDER};
use crate::model::ThicknessStrategy;
use crate::superpixel::SlicParams;
use crate::walker::WalkerParams;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplineOptions {
    pub degree: usize,
    /// Maximum distance between consecutive samples of the dense polyline.
    pub sample_gap_px: f64,
    pub thickness: ThicknessStrategy,
    /// Fit through the seed click points at both ends of the walk instead
    /// of only the visited region centroids.
    pub anchor_seeds: bool,
}

impl Default for SplineOptions {
    fn default() -> Self {
        Self { degree: 3, sample_gap_px: 1.0, thickness: ThicknessStrategy::default(), anchor_seeds: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub version: u32,
    /// Target superpixel count; `None` uses `width·height / 300`.
    pub region_count: Option<usize>,
    pub compactness: f64,
    pub max_iterations: usize,
    pub min_region_fraction: f64,
    pub histogram_bins: usize,
    /// Neighborhood order precomputed by the graph.
    pub graph_order: usize,
    pub walker: WalkerParams,
    pub spline: SplineOptions,
    pub output_dir: Option<PathBuf>,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let slic = SlicParams::default();
        Self {
            version: CONFIG_VERSION,
            region_count: None,
            compactness: slic.compactness,
            max_iterations: slic.max_iterations,
            min_region_fraction: slic.min_region_fraction,
            histogram_bins: DEFAULT_BINS,
            graph_order: DEFAULT_ORDER,
            walker: WalkerParams::default(),
            spline: SplineOptions::default(),
            output_dir: None,
            execution: Execution::default(),
        }
    }
}

impl PipelineConfig {
    pub fn slic_params(&self, width: u32, height: u32) -> SlicParams {
        SlicParams {
            region_count: self.region_count.unwrap_or_else(|| SlicParams::default_region_count(width, height)),
            compactness: self.compactness,
            max_iterations: self.max_iterations,
            min_region_fraction: self.min_region_fraction,
            execution: self.execution,
        }
    }

    pub fn walker_params(&self) -> WalkerParams {
        WalkerParams { execution: self.execution, ..self.walker }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Version(self.version));
        }
        if self.region_count == Some(0) {
            return Err(Error::InvalidParameter("region_count must be >= 1".into()));
        }
        self.slic_params(64, 64).validate()?;
        self.walker.validate()?;
        if self.histogram_bins < 2 {
            return Err(Error::InvalidParameter("histogram_bins must be >= 2".into()));
        }
        if self.graph_order < self.walker.graph_order {
            return Err(Error::InvalidParameter(format!(
                "graph_order {} below walker order {}",
                self.graph_order, self.walker.graph_order
            )));
        }
        if self.spline.degree < 1 {
            return Err(Error::InvalidParameter("spline degree must be >= 1".into()));
        }
        if !(self.spline.sample_gap_px > 0.0 && self.spline.sample_gap_px.is_finite()) {
            return Err(Error::InvalidParameter("sample_gap_px must be > 0".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut c =
            PipelineConfig { region_count: Some(900), output_dir: Some("out".into()), ..PipelineConfig::default() };
        c.walker.termination_radius_px = Some(12.5);
        c.spline.thickness = ThicknessStrategy::AreaPerLength;
        let back = PipelineConfig::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn partial_documents_take_defaults() {
        let c = PipelineConfig::from_json(r#"{"version": 1, "walker": {"von_mises_m": 6.0}}"#).unwrap();
        assert_eq!(c.walker.von_mises_m, 6.0);
        assert_eq!(c.walker.c_visual, 10.0);
        assert_eq!(c.histogram_bins, 8);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(PipelineConfig::from_json(r#"{"version": 2}"#).is_err());
        assert!(PipelineConfig::from_json(r#"{"histogram_bins": 0}"#).is_err());
        assert!(PipelineConfig::from_json(r#"{"walker": {"graph_order": 4}}"#).is_err());
        assert!(PipelineConfig::from_json(r#"{"walker": {"c_visual": -1}}"#).is_err());
        assert!(PipelineConfig::from_json(r#"{"compactness": 0}"#).is_err());
    }
}
