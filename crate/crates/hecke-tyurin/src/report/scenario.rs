//! Scenario files (schema 1). Complex numbers are written as [re, im].

use crate::curve::{CurveSpec, PeriodData, SurfacePoint};
use crate::error::{Error, Result};
use crate::hecke::{normal, random_points_in, HeckeConfig, SamplingBox};
use crate::numeric::QuadSettings;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub const SCHEMA_VERSION: u32 = 1;

pub const SUITES: [&str; 7] = ["theta", "periods", "green", "hecke", "hitchin", "kzb", "variation"];

/// Suites that need the 3g points and ℓ.
const HECKE_SUITES: [&str; 4] = ["hecke", "hitchin", "kzb", "variation"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSection {
    pub branch_points: Vec<C64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaSection {
    pub max_radius: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub x: C64,
    #[serde(default = "default_sheet")]
    pub sheet: i8,
}

fn default_sheet() -> i8 {
    1
}

impl PointSpec {
    pub fn surface_point(&self) -> SurfacePoint {
        SurfacePoint::new(self.x, self.sheet)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointsSection {
    Explicit { p0: PointSpec, points: Vec<PointSpec> },
    Random { seed: u64, #[serde(default, rename = "box")] region: Option<SamplingBox> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EllSection {
    Values { values: Vec<C64> },
    Random { seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    #[serde(default)]
    pub name: String,
    pub curve: CurveSection,
    #[serde(default)]
    pub quadrature: Option<QuadSettings>,
    #[serde(default)]
    pub theta: Option<ThetaSection>,
    /// Seed for every random sample drawn by the suites.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub points: Option<PointsSection>,
    #[serde(default)]
    pub ell: Option<EllSection>,
    pub suites: Vec<String>,
    /// Per-suite threshold overrides, keyed by check name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, BTreeMap<String, f64>>,
    /// Levels k for the operator suite.
    #[serde(default = "default_k")]
    pub k: Vec<f64>,
    /// Random samples per sample-based check.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Optional period cache file, resolved relative to the scenario.
    #[serde(default)]
    pub cache: Option<PathBuf>,
}

fn default_k() -> Vec<f64> {
    vec![1.0, -2.0]
}

fn default_samples() -> usize {
    3
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| Error::Invalid(format!("scenario: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)?;
        let mut s = Scenario::from_json(&text)?;
        if let Some(c) = &s.cache {
            if c.is_relative() {
                s.cache = Some(path.parent().unwrap_or(Path::new(".")).join(c));
            }
        }
        Ok(s)
    }

    pub fn spec(&self) -> Result<CurveSpec> {
        CurveSpec::new(self.curve.branch_points.clone())
    }

    pub fn settings(&self) -> QuadSettings {
        self.quadrature.unwrap_or_default()
    }

    pub fn needs_config(&self) -> bool {
        self.suites.iter().any(|s| HECKE_SUITES.contains(&s.as_str()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Invalid(format!("unsupported schema {} (expected {SCHEMA_VERSION})", self.schema)));
        }
        for s in &self.suites {
            if !SUITES.contains(&s.as_str()) {
                return Err(Error::Invalid(format!("unknown suite '{s}'")));
            }
        }
        for s in self.tolerances.keys() {
            if !SUITES.contains(&s.as_str()) {
                return Err(Error::Invalid(format!("tolerances for unknown suite '{s}'")));
            }
        }
        let spec = self.spec()?;
        let g = (spec.branch_points.len() - 1) / 2;
        if self.needs_config() {
            let n = 3 * g;
            match &self.points {
                None => return Err(Error::Invalid(format!("points are required; expected 3g = {n} points"))),
                Some(PointsSection::Explicit { points, .. }) if points.len() != n => {
                    return Err(Error::Invalid(format!("expected 3g = {n} points, got {}", points.len())))
                }
                _ => {}
            }
            match &self.ell {
                None => return Err(Error::Invalid(format!("ell is required; expected 3g = {n} values"))),
                Some(EllSection::Values { values }) if values.len() != n => {
                    return Err(Error::Invalid(format!("expected 3g = {n} values of ell, got {}", values.len())))
                }
                _ => {}
            }
        }
        if self.samples == 0 {
            return Err(Error::Invalid("samples must be positive".into()));
        }
        Ok(())
    }

    /// Threshold for a check, honoring overrides.
    pub fn threshold(&self, suite: &str, check: &str, default: f64) -> f64 {
        self.tolerances.get(suite).and_then(|m| m.get(check)).copied().unwrap_or(default)
    }

    /// Period data, through the cache file when one is configured.
    pub fn period_data(&self) -> Result<PeriodData> {
        let spec = self.spec()?;
        let settings = self.settings();
        let mut pd = match &self.cache {
            Some(path) => match PeriodData::cache_load(path, &spec, &settings) {
                Ok(pd) => pd,
                Err(Error::NotFound(_)) => {
                    let pd = PeriodData::compute_with(&spec, settings)?;
                    pd.cache_store(path)?;
                    pd
                }
                Err(e) => return Err(e),
            },
            None => PeriodData::compute_with(&spec, settings)?,
        };
        if let Some(t) = self.theta {
            pd.set_theta_max_radius(t.max_radius);
        }
        Ok(pd)
    }

    pub fn hecke_config(&self, pd: Arc<PeriodData>) -> Result<HeckeConfig> {
        let n = 3 * pd.genus();
        let (p0, pts) = match self.points.as_ref().ok_or_else(|| Error::Invalid("points are required".into()))? {
            PointsSection::Explicit { p0, points } => (p0.surface_point(), points.iter().map(|p| p.surface_point()).collect::<Vec<_>>()),
            PointsSection::Random { seed, region } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut v = random_points_in(&pd, n + 1, &mut rng, *region);
                let p0 = v.remove(0);
                (p0, v)
            }
        };
        let ell = match self.ell.as_ref().ok_or_else(|| Error::Invalid("ell is required".into()))? {
            EllSection::Values { values } => values.clone(),
            EllSection::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..n).map(|_| C64::new(normal(&mut rng), normal(&mut rng))).collect()
            }
        };
        HeckeConfig::new(pd, &pts, p0, ell)
    }
}
