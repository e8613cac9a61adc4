//! Experiment files.
//!
//! An experiment is a TOML document:
//!
//! ```toml
//! schema_version = 1
//! seed = 20240601
//! d = 2
//! q = [0]
//! n_list = [4, 8]
//! trials = 30
//! pairs = [[0.5, 0.5]]
//! l = 2
//! out = "results"
//!
//! [model]
//! kind = "lower"
//! marks = [{ family = "uniform", a = 0.0, b = 1.0 }]
//!
//! [lambda_grid]          # one axis per pair; must contain 0 on every axis
//! min = -2.0
//! max = 2.0
//! points = 81
//!
//! [x_grid]               # or: values = [[0.1, 0.2, 0.3]]
//! min = 0.0
//! max = 2.0
//! points = 201
//!
//! [gap]                  # optional
//! k = [3, 4]
//! r = [1]
//! m = [1, 2]
//! n = [7, 9]
//! samples = 50
//! ```
//!
//! [`ExperimentConfig::load`] checks every constraint before anything is
//! sampled.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cube::Window;
use crate::error::{Error, Result};
use crate::limit_lab::{linspace, Grid, TimePair};
use crate::models::{ModelKind, ModelSpec};

pub const SCHEMA_VERSION: u32 = 1;

/// Axis values of a tensor grid: the same evenly spaced axis repeated, or
/// explicit values per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum GridSpec {
    Uniform { min: f64, max: f64, points: usize },
    Values { values: Vec<Vec<f64>> },
}

impl GridSpec {
    pub fn build(&self, h: usize) -> Result<Grid> {
        match self {
            GridSpec::Uniform { min, max, points } => {
                if *points < 1 || !(min <= max) || (*points > 1 && min == max) {
                    return Err(Error::Config(format!("bad grid axis min={min} max={max} points={points}")));
                }
                Grid::new(vec![linspace(*min, *max, *points); h])
            }
            GridSpec::Values { values } => {
                if values.len() != h {
                    return Err(Error::Config(format!("grid has {} axes, expected {h}", values.len())));
                }
                Grid::new(values.clone())
            }
        }
    }
}

/// Parameter ladder for the gap measurements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapConfig {
    pub k: Vec<u32>,
    #[serde(default)]
    pub r: Vec<u32>,
    #[serde(default)]
    pub m: Vec<u32>,
    /// Windows for the regularity gap.
    #[serde(default)]
    pub n: Vec<u32>,
    /// Realizations per parameter combination.
    pub samples: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub d: usize,
    pub q: Vec<usize>,
    pub n_list: Vec<u32>,
    pub trials: u64,
    #[serde(default)]
    pub pairs: Vec<TimePair>,
    #[serde(default = "default_l")]
    pub l: u32,
    #[serde(default)]
    pub out: Option<PathBuf>,
    pub model: ModelKind,
    #[serde(default)]
    pub lambda_grid: Option<GridSpec>,
    #[serde(default)]
    pub x_grid: Option<GridSpec>,
    #[serde(default)]
    pub gap: Option<GapConfig>,
}

fn default_l() -> u32 {
    2
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn model(&self) -> ModelSpec {
        ModelSpec {
            d: self.d,
            kind: self.model.clone(),
        }
    }

    pub fn lambda_grid(&self) -> Result<Grid> {
        let spec = self
            .lambda_grid
            .as_ref()
            .ok_or_else(|| Error::Config("missing [lambda_grid]".into()))?;
        let grid = spec.build(self.pairs.len())?;
        if grid.axes().iter().any(|a| !a.contains(&0.0)) {
            return Err(Error::Config("λ-grid must contain 0 on every axis".into()));
        }
        Ok(grid)
    }

    pub fn x_grid(&self) -> Result<Grid> {
        self.x_grid
            .as_ref()
            .ok_or_else(|| Error::Config("missing [x_grid]".into()))?
            .build(self.pairs.len())
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        if self.schema_version != SCHEMA_VERSION {
            return cfg(format!("schema_version {} is not {SCHEMA_VERSION}", self.schema_version));
        }
        Window::new(self.d, 0).map_err(|e| Error::Config(e.to_string()))?;
        let model = self.model();
        model.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.q.is_empty() {
            return cfg("q list is empty".into());
        }
        if let Some(&q) = self.q.iter().find(|&&q| q >= self.d) {
            return cfg(format!("degree {q} must be below d = {}", self.d));
        }
        if self.n_list.is_empty() || self.n_list[0] == 0 || !self.n_list.windows(2).all(|w| w[0] < w[1]) {
            return cfg("n_list must be a nonempty increasing list of positive windows".into());
        }
        if self.trials == 0 {
            return cfg("trials must be at least 1".into());
        }
        for &(s, t) in &self.pairs {
            if !(0.0 <= s && s <= t && t.is_finite()) {
                return cfg(format!("pair ({s}, {t}) violates 0 <= s <= t < ∞"));
            }
        }
        if self.l == 0 || self.l > 12 {
            return cfg(format!("fineness l = {} must be in 1..=12", self.l));
        }
        if self.lambda_grid.is_some() {
            self.lambda_grid()?;
        }
        if self.x_grid.is_some() {
            self.x_grid()?;
        }
        if let Some(gap) = &self.gap {
            if gap.samples == 0 || gap.k.is_empty() {
                return cfg("gap needs at least one k and one sample".into());
            }
            let range = model.dependence_range();
            for &k in &gap.k {
                for &r in &gap.r {
                    if k <= r {
                        return cfg(format!("gap needs k > r, got k={k}, r={r}"));
                    }
                    if 2 * r <= range {
                        return cfg(format!("gap needs 2r > R = {range}, got r={r}"));
                    }
                }
                if let Some(&n) = gap.n.iter().find(|&&n| n < k) {
                    return cfg(format!("regularity gap needs k <= n, got k={k}, n={n}"));
                }
            }
        }
        Ok(())
    }

    /// Checks that the fields needed by one estimator are present.
    pub fn require(&self, what: Requirement) -> Result<()> {
        let need_pairs = || {
            if self.pairs.is_empty() {
                Err(Error::Config("pairs list is empty".into()))
            } else {
                Ok(())
            }
        };
        match what {
            Requirement::Pairs => need_pairs(),
            Requirement::Mgf | Requirement::Rate => {
                need_pairs()?;
                if self.trials < 2 {
                    return Err(Error::Config("log-MGF estimation needs trials >= 2".into()));
                }
                self.lambda_grid()?;
                if what == Requirement::Rate {
                    self.x_grid()?;
                }
                Ok(())
            }
            Requirement::Gap => {
                need_pairs()?;
                self.gap
                    .as_ref()
                    .map(|_| ())
                    .ok_or_else(|| Error::Config("missing [gap]".into()))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Requirement {
    Pairs,
    Mgf,
    Rate,
    Gap,
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
schema_version = 1
seed = 7
d = 2
q = [0]
n_list = [2, 3]
trials = 4
pairs = [[0.5, 0.5]]

[model]
kind = "lower"
marks = [{ family = "uniform", a = 0.0, b = 1.0 }]

[lambda_grid]
min = -1.0
max = 1.0
points = 5
"#;

    #[test]
    fn parses_base() {
        let cfg = ExperimentConfig::parse(BASE).unwrap();
        assert_eq!(cfg.l, 2);
        assert_eq!(cfg.lambda_grid().unwrap().len(), 5);
        assert!(cfg.require(Requirement::Mgf).is_ok());
        assert!(cfg.require(Requirement::Rate).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        for (from, to) in [
            ("kind = \"lower\"", "kind = \"sideways\""),
            ("schema_version = 1", "schema_version = 2"),
            ("q = [0]", "q = [2]"),
            ("n_list = [2, 3]", "n_list = [3, 2]"),
            ("pairs = [[0.5, 0.5]]", "pairs = [[0.6, 0.5]]"),
            ("points = 5", "points = 4"),
            ("trials = 4", "trials = 4\nextra = 1"),
        ] {
            let text = BASE.replace(from, to);
            assert!(
                matches!(ExperimentConfig::parse(&text), Err(Error::Config(_))),
                "{to}"
            );
        }
    }

    #[test]
    fn gap_constraints() {
        let good = format!("{BASE}\n[gap]\nk = [3]\nr = [1]\nm = [1]\nn = [7]\nsamples = 2\n");
        assert!(ExperimentConfig::parse(&good).is_ok());
        let bad = good.replace("k = [3]", "k = [1]");
        assert!(ExperimentConfig::parse(&bad).is_err());
    }
}
