//! Run configuration: the group, the numerical tolerances and caps, and output paths.

use crate::error::CliError;
use chamberflow_core::bundled::bundled_config;
use chamberflow_core::dense_subgroup::{ApproxOptions, DensityOptions};
use chamberflow_core::mixing_witness::{DirectionOptions, WitnessOptions};
use chamberflow_core::{Alphabet, CartanVector, GroupElement, Word};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Recognized keys of `tolerances`.
pub const TOLERANCE_KEYS: [&str; 6] = ["r", "eps", "eta", "margin", "slack", "depth_coeff"];
/// Recognized keys of `caps`.
pub const CAP_KEYS: [&str; 9] = [
    "grid_n",
    "depth",
    "max_power",
    "pool_size",
    "corpus_size",
    "density_cap",
    "density_grid",
    "search_budget",
    "box_bound",
];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub dim: usize,
    pub seed: u64,
    /// Generators of the semigroup as row-major matrices.
    pub generators: Vec<Vec<Vec<f64>>>,
    /// The bracketing word of mixing witnesses.
    pub h: String,
    /// Default flow direction.
    pub theta: Vec<f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub caps: BTreeMap<String, u64>,
    pub output: OutputPaths,
}

impl Default for RunConfig {
    /// The bundled `SL(3, R)` example.
    fn default() -> Self {
        let b = bundled_config();
        let tolerances = [
            ("r", b.r),
            ("eps", b.eps),
            ("eta", b.eta),
            ("margin", 1e-2),
            ("slack", 1e-3),
            ("depth_coeff", WitnessOptions::default().depth_coeff),
        ];
        let w = WitnessOptions::default();
        let caps = [
            ("grid_n", b.grid_n as u64),
            ("depth", 2),
            ("max_power", w.max_power),
            ("pool_size", w.pool_size as u64),
            ("corpus_size", w.corpus_size as u64),
            ("density_cap", w.density.cap as u64),
            ("density_grid", w.density.grid_n as u64),
            ("search_budget", w.approx.budget as u64),
            ("box_bound", w.approx.box_bound as u64),
        ];
        RunConfig {
            dim: 3,
            seed: 0,
            generators: b.generators,
            h: b.h,
            theta: b.theta,
            tolerances: tolerances.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            caps: caps.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            output: OutputPaths::default(),
        }
    }
}

/// Parses JSON, reporting the position of a syntax or type error.
pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str, source: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Json {
        source_name: source.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

impl RunConfig {
    /// Reads a config file; keys absent from the file keep their bundled defaults.
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig = parse_json(&text, &path.display().to_string())?;
        let defaults = RunConfig::default();
        for (k, v) in defaults.tolerances {
            cfg.tolerances.entry(k).or_insert(v);
        }
        for (k, v) in defaults.caps {
            cfg.caps.entry(k).or_insert(v);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(k) = self.tolerances.keys().find(|k| !TOLERANCE_KEYS.contains(&k.as_str())) {
            return Err(CliError::Config(format!("unknown tolerance {k:?}; expected one of {TOLERANCE_KEYS:?}")));
        }
        if let Some(k) = self.caps.keys().find(|k| !CAP_KEYS.contains(&k.as_str())) {
            return Err(CliError::Config(format!("unknown cap {k:?}; expected one of {CAP_KEYS:?}")));
        }
        if self.dim < 2 {
            return Err(CliError::Config(format!("dim must be at least 2, got {}", self.dim)));
        }
        for (i, g) in self.generators.iter().enumerate() {
            if g.len() != self.dim || g.iter().any(|row| row.len() != self.dim) {
                return Err(CliError::Config(format!("generator {} is not {d}x{d}", i + 1, d = self.dim)));
            }
        }
        if !self.theta.is_empty() && self.theta.len() != self.dim {
            return Err(CliError::Config(format!("theta has {} entries, expected {}", self.theta.len(), self.dim)));
        }
        Ok(())
    }

    pub fn tol(&self, key: &str) -> f64 {
        self.tolerances.get(key).copied().unwrap_or_else(|| RunConfig::default().tolerances[key])
    }

    pub fn cap(&self, key: &str) -> u64 {
        self.caps.get(key).copied().unwrap_or_else(|| RunConfig::default().caps[key])
    }

    pub fn alphabet(&self) -> Result<Alphabet, CliError> {
        if self.generators.is_empty() {
            return Err(CliError::Config("no generators configured".into()));
        }
        let gens = self
            .generators
            .iter()
            .enumerate()
            .map(|(i, rows)| GroupElement::from_rows(rows).map_err(|e| CliError::Config(format!("generator {}: {e}", i + 1))))
            .collect::<Result<Vec<_>, _>>()?;
        Alphabet::new(gens).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn h_word(&self, generators: usize) -> Result<Word, CliError> {
        Word::parse(&self.h, generators).map_err(|e| CliError::Config(format!("h: {e}")))
    }

    pub fn theta(&self) -> Result<CartanVector, CliError> {
        CartanVector::new(self.theta.clone()).map_err(|e| CliError::Config(format!("theta: {e}")))
    }

    pub fn density_options(&self) -> DensityOptions {
        DensityOptions {
            seed: self.seed,
            cap: self.cap("density_cap") as usize,
            grid_n: self.cap("density_grid") as usize,
            ..DensityOptions::default()
        }
    }

    pub fn approx_options(&self) -> ApproxOptions {
        ApproxOptions {
            box_bound: self.cap("box_bound") as i64,
            budget: self.cap("search_budget") as usize,
        }
    }

    pub fn direction_options(&self) -> DirectionOptions {
        DirectionOptions {
            r: self.tol("r"),
            eps: self.tol("eps"),
            grid_n: self.cap("grid_n") as usize,
            margin: self.tol("margin"),
            max_power: self.cap("max_power"),
        }
    }

    pub fn witness_options(&self, eta: f64) -> WitnessOptions {
        WitnessOptions {
            eta,
            max_power: self.cap("max_power"),
            pool_size: self.cap("pool_size") as usize,
            corpus_size: self.cap("corpus_size") as usize,
            corpus_seed: self.seed,
            depth_coeff: self.tol("depth_coeff"),
            density: self.density_options(),
            approx: self.approx_options(),
            ..WitnessOptions::default()
        }
    }
}
