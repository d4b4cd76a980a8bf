//! Seed point input: `--seed x,y` flags and seed files.

use std::path::Path;

use cablewalk::Point2;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// `x,y` in pixel coordinates.
pub fn parse_seed(text: &str) -> Result<Point2, String> {
    let (x, y) = text.split_once(',').ok_or_else(|| format!("expected x,y, got {text:?}"))?;
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}"));
    let p = Point2::new(num(x)?, num(y)?);
    if !p.is_finite() {
        return Err(format!("non-finite seed {text:?}"));
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedPoint {
    Pair([f64; 2]),
    Named { x: f64, y: f64 },
}

impl From<SeedPoint> for Point2 {
    fn from(p: SeedPoint) -> Self {
        match p {
            SeedPoint::Pair([x, y]) | SeedPoint::Named { x, y } => Point2::new(x, y),
        }
    }
}

/// Seed list document: `{"version": 1, "seeds": [[x, y], ...]}` or a bare
/// list. Points may also be `{"x": .., "y": ..}` objects.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SeedsInput {
    Document {
        #[serde(default = "one")]
        version: u32,
        seeds: Vec<SeedPoint>,
    },
    List(Vec<SeedPoint>),
}

fn one() -> u32 {
    1
}

impl SeedsInput {
    pub fn points(self) -> Result<Vec<Point2>, String> {
        let (version, seeds) = match self {
            SeedsInput::Document { version, seeds } => (version, seeds),
            SeedsInput::List(seeds) => (1, seeds),
        };
        if version != 1 {
            return Err(format!("unsupported seeds version {version}"));
        }
        Ok(seeds.into_iter().map(Point2::from).collect())
    }
}

pub fn read_seeds_file(path: &Path) -> Result<Vec<Point2>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::generic(format!("{}: {e}", path.display())))?;
    let input: SeedsInput =
        serde_json::from_str(&text).map_err(|e| CliError::generic(format!("{}: {e}", path.display())))?;
    input.points().map_err(CliError::generic)
}
