//! Pipeline flags shared by every subcommand that segments images.

use std::path::PathBuf;

use cablewalk::{Execution, PipelineConfig};
use clap::Args;

use crate::error::CliError;

#[derive(Debug, Clone, Default, Args)]
pub struct PipelineArgs {
    /// JSON config file; flags below override its values.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Target superpixel count K.
    #[arg(long, value_name = "K")]
    pub superpixels: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub compactness: Option<f64>,
    /// Histogram bins per HSV channel.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Neighborhood order d of the walk.
    #[arg(long)]
    pub order: Option<usize>,
    /// Von Mises concentration m.
    #[arg(long = "vm-m", allow_hyphen_values = true)]
    pub vm_m: Option<f64>,
    #[arg(long = "c-visual", allow_hyphen_values = true)]
    pub c_visual: Option<f64>,
    #[arg(long = "c-distance", allow_hyphen_values = true)]
    pub c_distance: Option<f64>,
    /// Walk termination radius in pixels.
    #[arg(long, allow_hyphen_values = true)]
    pub radius: Option<f64>,
    #[arg(long = "max-steps")]
    pub max_steps: Option<usize>,
    /// Run every stage on the calling thread.
    #[arg(long)]
    pub sequential: bool,
}

impl PipelineArgs {
    /// The config file (or defaults) with flag overrides applied, validated.
    pub fn resolve(&self) -> Result<PipelineConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
                PipelineConfig::from_json(&text).map_err(CliError::config)?
            }
            None => PipelineConfig::default(),
        };
        if let Some(k) = self.superpixels {
            config.region_count = Some(k);
        }
        if let Some(v) = self.compactness {
            config.compactness = v;
        }
        if let Some(v) = self.bins {
            config.histogram_bins = v;
        }
        if let Some(v) = self.order {
            config.graph_order = v;
            config.walker.graph_order = v;
            config.walker.initial_order = config.walker.initial_order.min(v);
        }
        if let Some(v) = self.vm_m {
            config.walker.von_mises_m = v;
        }
        if let Some(v) = self.c_visual {
            config.walker.c_visual = v;
        }
        if let Some(v) = self.c_distance {
            config.walker.c_distance = v;
        }
        if let Some(v) = self.radius {
            config.walker.termination_radius_px = Some(v);
        }
        if let Some(v) = self.max_steps {
            config.walker.max_steps = v;
        }
        if self.sequential {
            config.execution = Execution::Sequential;
        }
        config.validate().map_err(CliError::config)?;
        Ok(config)
    }
}
