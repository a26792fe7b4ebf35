//! Run configuration: a single TOML document with one table per command.

use std::fmt;
use std::path::PathBuf;

use lbexp::assembly::DEFAULT_V0;
use lbexp::geometry::{resolution_for, AmbientGeometry, BasisSpec, DEFAULT_NODES_PER_HALF_WAVE};
use lbexp::region::{builtin_domain, builtin_domains, CatalogOptions, Region};
use lbexp::stats::SpacingOptions;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// A validation failure, located by the dotted path of the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { path: path.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for ConfigError {}

type Check = Result<(), ConfigError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    /// Basis size `N`.
    #[serde(default = "default_n")]
    pub n: usize,
    /// Penalty height.
    #[serde(default = "default_v0")]
    pub v0: f64,
    /// Fixed quadrature resolution; overrides `nodes_per_half_wave`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<[usize; 2]>,
    /// Quadrature density relative to the highest basis mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes_per_half_wave: Option<f64>,
    /// Eigenpairs to keep (`K`); defaults to all of them, capped at 120.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
    /// Points per chart axis for mode dumps.
    #[serde(default = "default_sample_grid")]
    pub sample_grid: [usize; 2],
    /// Seed for synthetic spacing samples.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Host space; taken from the catalog entry when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<AmbientGeometry>,
    pub region: RegionSpec,
    #[serde(default)]
    pub solve: SolveOptions,
    #[serde(default)]
    pub stats: StatsOptions,
    #[serde(default)]
    pub convergence: ConvergenceOptions,
    #[serde(default)]
    pub fd_compare: FdCompareOptions,
    #[serde(default)]
    pub fit_score: FitScoreOptions,
}

fn default_n() -> usize {
    400
}

fn default_v0() -> f64 {
    DEFAULT_V0
}

fn default_sample_grid() -> [usize; 2] {
    [64, 64]
}

/// Either a catalog name (with optional size overrides) or a shape tree.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<CatalogOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<Region>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixFormat {
    /// Header then row-major little-endian `f64`.
    Binary,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    /// How many of the lowest modes to sample onto the grid.
    pub mode_grids: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix_dump: Option<MatrixFormat>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { mode_grids: 4, matrix_dump: None }
    }
}

/// Where the levels fed to the spacing statistics come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumSource {
    /// Solve the relaxed problem.
    #[default]
    Expansion,
    /// Closed-form spectrum of the domain, when it has one.
    Oracle,
    /// Seeded synthetic levels with exponential gaps.
    SyntheticPoisson,
    /// Seeded synthetic levels with Wigner-surmise gaps.
    SyntheticGoe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsOptions {
    pub source: SpectrumSource,
    /// Number of spacings.
    pub count: usize,
    pub bin_width: f64,
    pub max_s: f64,
    pub spacing: SpacingOptions,
}

impl Default for StatsOptions {
    fn default() -> Self {
        StatsOptions {
            source: SpectrumSource::Expansion,
            count: 150,
            bin_width: 0.1,
            max_s: 4.0,
            spacing: SpacingOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceOptions {
    /// Penalty heights to sweep at fixed `n`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub v0_values: Vec<f64>,
    /// Basis sizes to sweep at fixed `v0`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub basis_sizes: Vec<usize>,
    /// Eigenvalues reported per row.
    pub count: usize,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        ConvergenceOptions { v0_values: Vec::new(), basis_sizes: Vec::new(), count: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FdCompareOptions {
    /// Interior nodes per axis.
    pub nodes: [usize; 2],
    pub count: usize,
    /// Adds a column with the FD spectrum of the operator shifted by this
    /// constant, minus the constant.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
}

impl Default for FdCompareOptions {
    fn default() -> Self {
        FdCompareOptions { nodes: [50, 50], count: 6, shift: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitScoreOptions {
    /// Hosts scored in addition to the configured geometry.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<AmbientGeometry>,
}

/// The configured domain after catalog lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub name: Option<String>,
    pub options: CatalogOptions,
    pub geometry: AmbientGeometry,
    pub region: Region,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Stats,
    Convergence,
    FdCompare,
    FitScore,
}

fn positive(path: &str, x: f64) -> Check {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::new(path, format!("must be positive and finite, got {x}")))
    }
}

fn at_least(path: &str, x: usize, min: usize) -> Check {
    if x >= min {
        Ok(())
    } else {
        Err(ConfigError::new(path, format!("must be at least {min}, got {x}")))
    }
}

impl RunConfig {
    /// A configuration for a catalog domain with every other field defaulted.
    pub fn for_catalog(name: &str) -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            n: default_n(),
            v0: default_v0(),
            resolution: None,
            nodes_per_half_wave: None,
            modes: None,
            sample_grid: default_sample_grid(),
            seed: 0,
            output_dir: None,
            geometry: None,
            region: RegionSpec { catalog: Some(name.to_string()), ..RegionSpec::default() },
            solve: SolveOptions::default(),
            stats: StatsOptions::default(),
            convergence: ConvergenceOptions::default(),
            fd_compare: FdCompareOptions::default(),
            fit_score: FitScoreOptions::default(),
        }
    }

    /// Parses and validates a TOML document.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::new("<document>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }

    /// Checks every field that does not depend on the command.
    pub fn validate(&self) -> Check {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::new(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        at_least("n", self.n, 1)?;
        positive("v0", self.v0)?;
        if let Some(r) = self.resolution {
            at_least("resolution[0]", r[0], 2)?;
            at_least("resolution[1]", r[1], 2)?;
            if self.nodes_per_half_wave.is_some() {
                return Err(ConfigError::new("nodes_per_half_wave", "conflicts with resolution"));
            }
        }
        if let Some(d) = self.nodes_per_half_wave {
            positive("nodes_per_half_wave", d)?;
        }
        if let Some(k) = self.modes {
            at_least("modes", k, 1)?;
            if k > self.n {
                return Err(ConfigError::new("modes", format!("{k} exceeds the basis size {}", self.n)));
            }
        }
        at_least("sample_grid[0]", self.sample_grid[0], 1)?;
        at_least("sample_grid[1]", self.sample_grid[1], 1)?;
        self.domain()?;

        let s = &self.stats;
        at_least("stats.count", s.count, 2)?;
        positive("stats.bin_width", s.bin_width)?;
        positive("stats.max_s", s.max_s)?;
        if s.max_s < s.bin_width {
            return Err(ConfigError::new("stats.max_s", "must be at least one bin wide"));
        }
        if let Some(w) = s.spacing.unfold_window {
            at_least("stats.spacing.unfold_window", w, 1)?;
        }

        let c = &self.convergence;
        for (i, &v) in c.v0_values.iter().enumerate() {
            positive(&format!("convergence.v0_values[{i}]"), v)?;
        }
        for (i, &n) in c.basis_sizes.iter().enumerate() {
            at_least(&format!("convergence.basis_sizes[{i}]"), n, 1)?;
        }
        at_least("convergence.count", c.count, 1)?;

        let f = &self.fd_compare;
        at_least("fd_compare.nodes[0]", f.nodes[0], 3)?;
        at_least("fd_compare.nodes[1]", f.nodes[1], 3)?;
        at_least("fd_compare.count", f.count, 1)?;
        if let Some(shift) = f.shift {
            if !shift.is_finite() {
                return Err(ConfigError::new("fd_compare.shift", "must be finite"));
            }
        }

        for (i, g) in self.fit_score.candidates.iter().enumerate() {
            g.validate().map_err(|e| ConfigError::new(format!("fit_score.candidates[{i}]"), e.to_string()))?;
        }
        Ok(())
    }

    /// Checks the fields a particular command relies on.
    pub fn validate_for(&self, command: Command) -> Check {
        self.validate()?;
        let domain = self.domain()?;
        match command {
            Command::Solve => {
                if self.solve.mode_grids > self.mode_count() {
                    return Err(ConfigError::new(
                        "solve.mode_grids",
                        format!("exceeds the {} modes kept", self.mode_count()),
                    ));
                }
            }
            Command::Stats => {
                if self.stats.source == SpectrumSource::Expansion && self.stats.count >= self.n {
                    return Err(ConfigError::new(
                        "stats.count",
                        format!("{} spacings need more than {} basis functions", self.stats.count, self.n),
                    ));
                }
            }
            Command::Convergence => {
                let c = &self.convergence;
                if c.v0_values.is_empty() == c.basis_sizes.is_empty() {
                    return Err(ConfigError::new("convergence", "set exactly one of v0_values and basis_sizes"));
                }
                let smallest = c.basis_sizes.iter().copied().min().unwrap_or(self.n);
                if c.count > smallest {
                    return Err(ConfigError::new(
                        "convergence.count",
                        format!("exceeds the smallest basis size {smallest}"),
                    ));
                }
            }
            Command::FdCompare => {
                if !matches!(domain.geometry, AmbientGeometry::Rectangle { .. }) {
                    return Err(ConfigError::new("geometry", "fd-compare needs a rectangle host"));
                }
                let nodes = self.fd_compare.nodes[0] * self.fd_compare.nodes[1];
                if self.fd_compare.count > self.n.min(nodes) {
                    return Err(ConfigError::new("fd_compare.count", "exceeds the basis or grid size"));
                }
            }
            Command::FitScore => {
                for (i, g) in self.fit_score.candidates.iter().enumerate() {
                    if g.chart_kind() != domain.geometry.chart_kind() {
                        return Err(ConfigError::new(
                            format!("fit_score.candidates[{i}]"),
                            format!("{} does not share a chart with {}", g.tag(), domain.geometry.tag()),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Resolves the catalog entry or shape tree against the geometry.
    pub fn domain(&self) -> Result<Domain, ConfigError> {
        if let Some(g) = &self.geometry {
            g.validate().map_err(|e| ConfigError::new("geometry", e.to_string()))?;
        }
        let r = &self.region;
        let domain = match (&r.catalog, &r.shape) {
            (Some(name), None) => {
                let options = r.options.unwrap_or_default();
                for (field, v) in [
                    ("triangle_side", options.triangle_side),
                    ("sinai_radius", options.sinai_radius),
                    ("octant_hole_radius", options.octant_hole_radius),
                    ("torus_hole_radius", options.torus_hole_radius),
                ] {
                    positive(&format!("region.options.{field}"), v)?;
                }
                let d = builtin_domain(name, &options).ok_or_else(|| {
                    let names: Vec<_> = builtin_domains().iter().map(|d| d.name).collect();
                    ConfigError::new("region.catalog", format!("unknown domain {name:?}; known: {}", names.join(", ")))
                })?;
                Domain {
                    name: Some(name.clone()),
                    options,
                    geometry: self.geometry.clone().unwrap_or(d.geometry),
                    region: d.region,
                }
            }
            (None, Some(shape)) => {
                if r.options.is_some() {
                    return Err(ConfigError::new("region.options", "only applies to catalog domains"));
                }
                shape.validate().map_err(|e| ConfigError::new("region.shape", e.to_string()))?;
                let geometry = self
                    .geometry
                    .clone()
                    .ok_or_else(|| ConfigError::new("geometry", "required when the region is a shape tree"))?;
                Domain { name: None, options: CatalogOptions::default(), geometry, region: shape.clone() }
            }
            _ => return Err(ConfigError::new("region", "set exactly one of catalog and shape")),
        };
        domain.region.check_compatible(&domain.geometry).map_err(|e| ConfigError::new("region", e.to_string()))?;
        Ok(domain)
    }

    /// Eigenpairs to compute.
    pub fn mode_count(&self) -> usize {
        self.modes.unwrap_or_else(|| lbexp::eigensolve::default_mode_count(self.n)).min(self.n)
    }

    /// Quadrature resolution for a basis.
    pub fn resolution_for(&self, spec: &BasisSpec) -> (usize, usize) {
        match self.resolution {
            Some([r1, r2]) => (r1, r2),
            None => resolution_for(spec, self.nodes_per_half_wave.unwrap_or(DEFAULT_NODES_PER_HALF_WAVE)),
        }
    }
}
