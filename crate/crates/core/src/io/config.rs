use super::{io_err, sha256_hex, write_file, IoError, RoadChecks};
use crate::aggregation::CatalogueConfig;
use crate::behavior::{BdReduction, TraceChecks};
use crate::study::{Addition, LengthSide, Rq4Mode, SamplingPlan};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Whether point-based distances are computed on Procrustes-aligned pairs,
/// on the raw roads, or both (two result sets).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlignmentMode {
    Aligned,
    #[default]
    Raw,
    Both,
}

impl AlignmentMode {
    /// The `aligned` flags to run, each with its output subdirectory name.
    pub fn variants(self) -> Vec<(bool, &'static str)> {
        match self {
            AlignmentMode::Aligned => vec![(true, "aligned")],
            AlignmentMode::Raw => vec![(false, "raw")],
            AlignmentMode::Both => vec![(false, "raw"), (true, "aligned")],
        }
    }
}

/// Parameters of the individual study pipelines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudySettings {
    pub growth_sizes: Vec<usize>,
    pub growth_suites_per_size: usize,
    pub growth_fractions: Vec<f64>,
    pub duplicate_size: usize,
    pub duplicate_suites: usize,
    pub duplicate_fractions: Vec<f64>,
    pub efficiency_sizes: Vec<usize>,
    pub efficiency_suites_per_size: usize,
    pub additivity_sizes: Vec<usize>,
    pub additivity_suites_per_size: usize,
    pub additions: Vec<Addition>,
    /// Fraction of the pool kept by the shortest/longest length plans.
    pub length_fraction: f64,
    pub rq4_modes: Vec<Rq4Mode>,
    pub bd_reduction: BdReduction,
    pub trace_checks: TraceChecks,
}

impl Default for StudySettings {
    fn default() -> Self {
        Self {
            growth_sizes: vec![10, 20, 50],
            growth_suites_per_size: 100,
            growth_fractions: vec![0.1, 0.2, 0.5, 1.0],
            duplicate_size: 10,
            duplicate_suites: 100,
            duplicate_fractions: vec![0.1, 0.2],
            efficiency_sizes: vec![10, 20],
            efficiency_suites_per_size: 5,
            additivity_sizes: vec![10, 20],
            additivity_suites_per_size: 5,
            additions: Addition::DEFAULT.to_vec(),
            length_fraction: 0.25,
            rq4_modes: vec![
                Rq4Mode::All,
                Rq4Mode::LowDm,
                Rq4Mode::HighDm,
                Rq4Mode::LowBd,
                Rq4Mode::HighBd,
                Rq4Mode::ByLength,
            ],
            bd_reduction: BdReduction::Entropy,
            trace_checks: TraceChecks::default(),
        }
    }
}

/// Everything a run depends on besides the input files. Persisted verbatim
/// next to every result set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub sampling: SamplingPlan,
    pub catalogue: CatalogueConfig,
    pub alignment: AlignmentMode,
    pub output_dir: PathBuf,
    pub road_checks: RoadChecks,
    pub study: StudySettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            sampling: SamplingPlan::default(),
            catalogue: CatalogueConfig::default(),
            alignment: AlignmentMode::default(),
            output_dir: PathBuf::from("results"),
            road_checks: RoadChecks::default(),
            study: StudySettings::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, IoError> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|e| IoError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<(), IoError> {
        write_file(path, self.to_json().as_bytes())
    }

    /// SHA-256 of the serialized configuration. The output location is
    /// left out so identical runs in different directories hash alike.
    pub fn hash(&self) -> String {
        let mut cfg = self.clone();
        cfg.output_dir = PathBuf::new();
        sha256_hex(cfg.to_json().as_bytes())
    }

    /// The sampling plan with the run seed, optionally restricted to the
    /// shortest or longest part of the pool.
    pub fn plan(&self, side: Option<LengthSide>) -> SamplingPlan {
        SamplingPlan {
            seed: self.seed,
            length_quantile: side.map(|side| crate::study::LengthQuantile {
                side,
                fraction: self.study.length_fraction,
            }),
            ..self.sampling.clone()
        }
    }

    /// Catalogue settings for one alignment variant.
    pub fn catalogue_for(&self, aligned: bool) -> CatalogueConfig {
        CatalogueConfig {
            aligned,
            ..self.catalogue.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_and_hashes_stably() {
        let cfg = RunConfig {
            seed: 42,
            alignment: AlignmentMode::Both,
            ..RunConfig::default()
        };
        let back: RunConfig = serde_json::from_str(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
        assert_ne!(RunConfig::default().hash(), cfg.hash());
    }

    #[test]
    fn partial_documents_fill_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"seed": 3, "alignment": "aligned"}"#).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.alignment.variants(), vec![(true, "aligned")]);
        assert_eq!(cfg.plan(None).seed, 3);
        assert_eq!(cfg.study.growth_fractions, [0.1, 0.2, 0.5, 1.0]);
    }
}
