//! Run configuration files.
//!
//! A config is a TOML document with `schema = "hglfr-config/1"`:
//!
//! ```toml
//! schema = "hglfr-config/1"
//! realizations = 20
//! base_seed = 1
//!
//! [generator]
//! nodes = 1000
//! avg_degree = 14.0
//! max_degree = 100
//! tau1 = 2.5
//! tau2 = 1.5
//! min_community = 50
//! max_community = 200
//! mode = "HGLFR"
//!
//! [hierarchy]
//! levels = 3
//! merge_probability = [0.1, 0.5]   # a single value or a list cycled per realization
//! mu = [0.4, 0.2, 0.1]
//! delta = [0.1, 0.1, 0.1]
//!
//! [grid]                           # optional; replaces the single cell above
//! modes = ["LFR", "GLFR", "HGLFR"]
//! mu = [0.05, 0.1]
//! delta_mu = 0.3
//! parametrizations = ["Low", "Medium", "High"]
//! ```

use std::collections::HashSet;
use std::path::PathBuf;

use hglfr::{GeneratorParams, HierarchyParams, Mode};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const CONFIG_SCHEMA: &str = "hglfr-config/1";

/// Merge probabilities cycled across realizations when a config gives none:
/// eight log-spaced values in `[0.02, 0.9]`.
pub fn default_merge_probabilities() -> Vec<f64> {
    hglfr::analysis::log_grid(0.02, 0.9, 8)
}

/// The three named hierarchical mixing schemes (three levels each).
pub fn parametrization(name: &str) -> Option<(Vec<f64>, Vec<f64>)> {
    match name.to_ascii_lowercase().as_str() {
        "low" => Some((vec![0.33, 0.03, 0.027], vec![0.03, 0.01, 0.002])),
        "medium" => Some((vec![0.4, 0.2, 0.1], vec![0.1, 0.1, 0.1])),
        "high" => Some((vec![0.8, 0.6, 0.3], vec![0.2, 0.2, 0.2])),
        _ => None,
    }
}

/// Degree and size parameters shared by every benchmark cell.
pub fn benchmark_generator(mode: Mode, mu: f64, delta_mu: f64) -> GeneratorParams {
    GeneratorParams {
        nodes: 1000,
        avg_degree: 14.0,
        max_degree: 100,
        tau1: 2.5,
        tau2: 1.5,
        min_community: 50,
        max_community: 200,
        mode,
        mu,
        delta_mu,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchySection {
    pub levels: usize,
    #[serde(default)]
    pub merge_probability: Option<OneOrMany>,
    pub mu: Vec<f64>,
    pub delta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default)]
    pub modes: Vec<Mode>,
    /// Nominal mixing values for LFR and GLFR cells.
    #[serde(default)]
    pub mu: Vec<f64>,
    /// GLFR half-width; defaults to 0.3.
    #[serde(default)]
    pub delta_mu: Option<f64>,
    /// Named hierarchical schemes for HGLFR cells.
    #[serde(default)]
    pub parametrizations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSection {
    #[serde(default = "default_methods")]
    pub methods: Vec<String>,
    #[serde(default = "default_gammas")]
    pub gammas: Vec<f64>,
}

fn default_methods() -> Vec<String> {
    vec!["lp".into(), "mod".into()]
}

fn default_gammas() -> Vec<f64> {
    vec![1.0]
}

impl Default for DetectionSection {
    fn default() -> Self {
        Self {
            methods: default_methods(),
            gammas: default_gammas(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "one")]
    pub realizations: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Explicit per-realization seeds; overrides `realizations`/`base_seed`.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    pub generator: GeneratorParams,
    #[serde(default)]
    pub hierarchy: Option<HierarchySection>,
    #[serde(default)]
    pub grid: Option<GridSection>,
    #[serde(default)]
    pub detection: DetectionSection,
    /// Gamma grid for sweeps, `start:stop:points:log|lin`.
    #[serde(default)]
    pub gamma_grid: Option<String>,
    /// Whether `batch` also writes every network directory.
    #[serde(default)]
    pub write_networks: bool,
}

fn one() -> usize {
    1
}

/// One fully specified experiment cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub name: String,
    pub generator: GeneratorParams,
    pub hierarchy: Option<HierarchyParams>,
    /// Cycled across realizations; only meaningful for HGLFR.
    pub merge_probabilities: Vec<f64>,
}

impl Cell {
    /// Hierarchy parameters of realization `r`.
    pub fn hierarchy_for(&self, r: usize) -> Option<HierarchyParams> {
        self.hierarchy.clone().map(|mut h| {
            if !self.merge_probabilities.is_empty() {
                h.merge_probability = self.merge_probabilities[r % self.merge_probabilities.len()];
            }
            h
        })
    }
}

fn config_err(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::config(format!("{path}: {msg}"))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema != CONFIG_SCHEMA {
            return Err(config_err("schema", format!("expected {CONFIG_SCHEMA:?}, got {:?}", self.schema)));
        }
        if let Some(seeds) = &self.seeds {
            let unique: HashSet<_> = seeds.iter().collect();
            if unique.len() != seeds.len() {
                return Err(config_err("seeds", "seeds must be unique"));
            }
        }
        for (i, m) in self.detection.methods.iter().enumerate() {
            hglfr::Method::parse(m).map_err(|e| config_err(&format!("detection.methods[{i}]"), e))?;
        }
        for (i, &g) in self.detection.gammas.iter().enumerate() {
            if !(g > 0.0 && g.is_finite()) {
                return Err(config_err(&format!("detection.gammas[{i}]"), "must be positive"));
            }
        }
        if let Some(spec) = &self.gamma_grid {
            hglfr::analysis::parse_gamma_grid(spec).map_err(|e| config_err("gamma_grid", e))?;
        }
        for cell in self.cells()? {
            let prefix = format!("cell {}", cell.name);
            cell.generator
                .validate()
                .map_err(|e| config_err(&format!("{prefix}: generator"), e))?;
            for r in 0..cell.merge_probabilities.len().max(1) {
                if let Some(h) = cell.hierarchy_for(r) {
                    h.validate().map_err(|e| config_err(&format!("{prefix}: hierarchy"), e))?;
                }
            }
        }
        Ok(())
    }

    /// Seeds of the realizations of every cell.
    pub fn seeds(&self) -> Vec<u64> {
        match &self.seeds {
            Some(s) => s.clone(),
            None => (0..self.realizations as u64).map(|r| self.base_seed + r).collect(),
        }
    }

    fn hierarchy_cell(&self, name: String, mode_check: bool) -> Result<Cell, CliError> {
        let generator = self.generator.clone();
        match (&self.hierarchy, generator.mode) {
            (Some(h), Mode::Hglfr) => {
                let merge = h
                    .merge_probability
                    .as_ref()
                    .map(OneOrMany::values)
                    .unwrap_or_else(default_merge_probabilities);
                if merge.is_empty() {
                    return Err(config_err("hierarchy.merge_probability", "list must not be empty"));
                }
                Ok(Cell {
                    name,
                    generator,
                    hierarchy: Some(HierarchyParams {
                        levels: h.levels,
                        merge_probability: merge[0],
                        mu: h.mu.clone(),
                        delta: h.delta.clone(),
                    }),
                    merge_probabilities: merge,
                })
            }
            (None, Mode::Hglfr) => Err(config_err("hierarchy", "HGLFR mode requires a [hierarchy] table")),
            (Some(_), _) if mode_check => Err(config_err(
                "hierarchy",
                format!("{} mode does not take a [hierarchy] table", generator.mode),
            )),
            _ => Ok(Cell {
                name,
                generator,
                hierarchy: None,
                merge_probabilities: Vec::new(),
            }),
        }
    }

    /// Expands the config into experiment cells in a fixed order.
    pub fn cells(&self) -> Result<Vec<Cell>, CliError> {
        let Some(grid) = &self.grid else {
            let name = self.generator.mode.as_str().to_ascii_lowercase();
            return Ok(vec![self.hierarchy_cell(name, true)?]);
        };
        if grid.modes.is_empty() {
            return Err(config_err("grid.modes", "list at least one mode"));
        }
        let merge = match self.hierarchy.as_ref().and_then(|h| h.merge_probability.as_ref()) {
            Some(m) => m.values(),
            None => default_merge_probabilities(),
        };
        let mut cells = Vec::new();
        for &mode in &grid.modes {
            match mode {
                Mode::Lfr | Mode::Glfr => {
                    if grid.mu.is_empty() {
                        return Err(config_err("grid.mu", format!("{mode} cells need mu values")));
                    }
                    let delta = if mode == Mode::Glfr { grid.delta_mu.unwrap_or(0.3) } else { 0.0 };
                    for &mu in &grid.mu {
                        let mut generator = self.generator.clone();
                        generator.mode = mode;
                        generator.mu = mu;
                        generator.delta_mu = delta;
                        cells.push(Cell {
                            name: format!("{}-mu{mu}", mode.as_str().to_ascii_lowercase()),
                            generator,
                            hierarchy: None,
                            merge_probabilities: Vec::new(),
                        });
                    }
                }
                Mode::Hglfr => {
                    let mut generator = self.generator.clone();
                    generator.mode = Mode::Hglfr;
                    if grid.parametrizations.is_empty() {
                        let mut cfg = self.clone();
                        cfg.generator = generator.clone();
                        cells.push(cfg.hierarchy_cell("hglfr".into(), false)?);
                    }
                    for (i, name) in grid.parametrizations.iter().enumerate() {
                        let (mu, delta) = parametrization(name).ok_or_else(|| {
                            config_err(
                                &format!("grid.parametrizations[{i}]"),
                                format!("unknown parametrization {name:?} (expected Low, Medium or High)"),
                            )
                        })?;
                        cells.push(Cell {
                            name: format!("hglfr-{}", name.to_ascii_lowercase()),
                            generator: generator.clone(),
                            hierarchy: Some(HierarchyParams {
                                levels: mu.len(),
                                merge_probability: merge[0],
                                mu,
                                delta,
                            }),
                            merge_probabilities: merge.clone(),
                        });
                    }
                }
            }
        }
        let mut names = HashSet::new();
        for c in &cells {
            if !names.insert(c.name.clone()) {
                return Err(config_err("grid", format!("duplicate cell {}", c.name)));
            }
        }
        Ok(cells)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
schema = "hglfr-config/1"
realizations = 3
base_seed = 10

[generator]
nodes = 1000
avg_degree = 14.0
max_degree = 100
tau1 = 2.5
tau2 = 1.5
min_community = 50
max_community = 200
mode = "LFR"
mu = 0.05
"#;

    #[test]
    fn single_lfr_cell() {
        let cfg = RunConfig::parse(BASE).unwrap();
        let cells = cfg.cells().unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].name, "lfr");
        assert_eq!(cfg.seeds(), vec![10, 11, 12]);
    }

    #[test]
    fn hglfr_without_hierarchy_is_a_config_error() {
        let text = BASE.replace("mode = \"LFR\"", "mode = \"HGLFR\"");
        let err = RunConfig::parse(&text).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("hierarchy"));
    }

    #[test]
    fn field_errors_name_the_field() {
        let err = RunConfig::parse(&BASE.replace("tau1 = 2.5", "tau1 = 0.5")).unwrap_err();
        assert!(err.to_string().contains("generator"), "{err}");
        let err = RunConfig::parse(&BASE.replace("nodes = 1000", "nodes = \"many\"")).unwrap_err();
        assert!(err.to_string().contains("nodes"), "{err}");
        let err = RunConfig::parse(&BASE.replace("hglfr-config/1", "other/2")).unwrap_err();
        assert!(err.to_string().contains("schema"), "{err}");
    }

    #[test]
    fn grid_expands_in_order() {
        let text = format!(
            "{BASE}\n[grid]\nmodes = [\"LFR\", \"GLFR\", \"HGLFR\"]\nmu = [0.1, 0.2]\nparametrizations = [\"Low\", \"High\"]\n"
        );
        let cells = RunConfig::parse(&text).unwrap().cells().unwrap();
        let names: Vec<&str> = cells.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["lfr-mu0.1", "lfr-mu0.2", "glfr-mu0.1", "glfr-mu0.2", "hglfr-low", "hglfr-high"]);
        assert_eq!(cells[2].generator.delta_mu, 0.3);
        let high = &cells[5];
        assert_eq!(high.hierarchy.as_ref().unwrap().mu, vec![0.8, 0.6, 0.3]);
        assert_eq!(high.merge_probabilities.len(), 8);
        assert_ne!(high.hierarchy_for(0), high.hierarchy_for(1));
    }

    #[test]
    fn duplicate_seeds_rejected() {
        let text = BASE.replace("realizations = 3", "seeds = [1, 1]");
        assert!(RunConfig::parse(&text).is_err());
    }

    #[test]
    fn unknown_parametrization_rejected() {
        let text = format!("{BASE}\n[grid]\nmodes = [\"HGLFR\"]\nparametrizations = [\"Extreme\"]\n");
        assert!(RunConfig::parse(&text).unwrap_err().to_string().contains("parametrizations[0]"));
    }

    #[test]
    fn merge_probability_accepts_scalar_or_list() {
        let text = BASE.replace("mode = \"LFR\"", "mode = \"HGLFR\"")
            + "\n[hierarchy]\nlevels = 2\nmerge_probability = 0.4\nmu = [0.2, 0.05]\ndelta = [0.0, 0.0]\n";
        let cells = RunConfig::parse(&text).unwrap().cells().unwrap();
        assert_eq!(cells[0].merge_probabilities, vec![0.4]);
        let text = text.replace("merge_probability = 0.4", "merge_probability = [0.2, 0.6]");
        let cells = RunConfig::parse(&text).unwrap().cells().unwrap();
        assert_eq!(cells[0].hierarchy_for(1).unwrap().merge_probability, 0.6);
    }
}
