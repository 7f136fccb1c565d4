//! Experiment configuration: TOML text, validated in the order the
//! construction parameters are chosen, hashed for artifact headers.

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::measure::{make_cantor_square, CantorSquare, Measure};
use crate::params::{ClosingConstants, Condition, ConstructionParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Half extent of the square window.
    #[serde(rename = "L")]
    pub half_extent: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureConfig {
    Cantor { g: usize, kappa: f64, mass: f64 },
    /// A measure document as written by `Measure::to_json`, relative to the config file.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(rename = "N")]
    pub levels: usize,
    pub epsilon: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    pub delta: f64,
    #[serde(rename = "H")]
    pub budget: f64,
    pub m: f64,
    pub r_star: f64,
    pub rho_star: f64,
    #[serde(rename = "A_max")]
    pub a_max: f64,
    #[serde(default = "default_loss_constant")]
    pub loss_constant: f64,
}

fn default_loss_constant() -> f64 {
    10.0
}

/// Knobs of the slower subcommands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Quadrature nodes per cap diameter for the cap systems.
    #[serde(default = "default_n_loc")]
    pub n_loc: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// `λ = (m/H)⁴ / lambda_constant` for the equilibrium subcommand.
    #[serde(default = "one")]
    pub lambda_constant: f64,
    /// Seeded cases per `s` for the maximum principle corpus.
    #[serde(default = "default_corpus")]
    pub corpus: usize,
}

fn default_n_loc() -> usize {
    16
}

fn default_max_iters() -> usize {
    2000
}

fn one() -> f64 {
    1.0
}

fn default_corpus() -> usize {
    10
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { n_loc: default_n_loc(), max_iters: default_max_iters(), lambda_constant: 1.0, corpus: default_corpus() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    pub s: f64,
    pub grid: GridConfig,
    pub measure: MeasureConfig,
    pub params: ParamsConfig,
    #[serde(default)]
    pub run: RunConfig,
    /// Directory of the config file, for resolving measure paths.
    #[serde(skip)]
    pub base: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn construction(&self) -> ConstructionParams {
        let p = &self.params;
        ConstructionParams {
            s: self.s,
            levels: p.levels,
            epsilon: p.epsilon,
            big_m: p.big_m,
            delta: p.delta,
            m: p.m,
            budget: p.budget,
            r_star: p.r_star,
            rho_star: p.rho_star,
            loss_constant: p.loss_constant,
        }
    }

    /// Checks `N`, `ε`, `M`, `δ` in the order they are chosen, then the
    /// grid, measure and run settings.
    pub fn validate(&self) -> Result<()> {
        self.construction().validate()?;
        if !(self.params.a_max >= 1.0) {
            return Err(Error::Config(format!("A_max = {} must be at least 1", self.params.a_max)));
        }
        GridSpec::new(self.grid.half_extent, self.grid.n).map_err(|e| Error::Config(format!("grid: {e}")))?;
        if let MeasureConfig::Cantor { g, kappa, mass } = &self.measure {
            if *g < self.params.levels {
                return Err(Error::Config(format!("N = {} exceeds the {g} generations of the Cantor square", self.params.levels)));
            }
            make_cantor_square(self.s, *g, *kappa, *mass).map_err(|e| Error::Config(format!("measure: {e}")))?;
        }
        if self.run.n_loc < 4 || self.run.max_iters == 0 || !(self.run.lambda_constant > 0.0) {
            return Err(Error::Config("run: need n_loc >= 4, max_iters >= 1, lambda_constant > 0".into()));
        }
        Ok(())
    }

    /// The closing inequalities with the given measured constants; reported, not enforced.
    pub fn closing_report(&self, c: &ClosingConstants) -> Vec<Condition> {
        self.construction().closing_conditions(c)
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form, with the
    /// output directory left out so it does not change the artifacts.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        let text = serde_json::to_string(&c).expect("config serialises");
        hex::encode(&Sha256::digest(text.as_bytes())[..8])
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid.half_extent, self.grid.n)
    }

    pub fn cantor_square(&self) -> Result<Option<CantorSquare>> {
        match &self.measure {
            MeasureConfig::Cantor { g, kappa, mass } => Ok(Some(make_cantor_square(self.s, *g, *kappa, *mass)?)),
            MeasureConfig::File { .. } => Ok(None),
        }
    }

    pub fn load_measure(&self) -> Result<Measure> {
        match &self.measure {
            MeasureConfig::Cantor { .. } => {
                let sq = self.cantor_square()?.expect("cantor variant");
                Ok(Measure::Atomic(sq.atoms().to_vec()))
            }
            MeasureConfig::File { path } => {
                let full = self.base.join(path);
                let text = std::fs::read_to_string(&full).map_err(|e| Error::Config(format!("{}: {e}", full.display())))?;
                Measure::from_json(&text)
            }
        }
    }
}
