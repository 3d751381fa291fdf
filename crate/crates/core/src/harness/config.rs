//! Scenario files: JSON with `//` and `/* */` comments allowed.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ambient::AmbientParams;
use crate::error::{Error, Result};
use crate::flow::FlowConfig;
use crate::monitor::MonotonicityOptions;
use crate::phimap::PhiMap;
use crate::sphere::{legendre, GridMode, ScalarField, SphereGrid};
use crate::surface::{geometry_fields, GraphSurface};

/// Parses JSON after stripping comments.
pub fn parse_commented_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    let mut stripped = String::new();
    json_comments::StripComments::new(text.as_bytes())
        .read_to_string(&mut stripped)
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    serde_json::from_str(&stripped).map_err(|e| Error::InvalidConfig(e.to_string()))
}

pub fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
    parse_commented_json(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbientConfig {
    pub n: usize,
    pub m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub mode: GridMode,
    pub n_theta: usize,
    #[serde(default)]
    pub n_psi: Option<usize>,
    #[serde(default = "default_order")]
    pub stencil_order: usize,
}

fn default_order() -> usize {
    SphereGrid::DEFAULT_ORDER
}

impl GridConfig {
    pub fn build(&self, n: usize) -> Result<SphereGrid> {
        SphereGrid::build(self.mode, n, self.n_theta, self.n_psi, self.stencil_order)
    }
}

/// Which variable a perturbation is added to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    #[default]
    Phi,
    S,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    /// Degree of the zonal Legendre mode `P_l(cos theta)`.
    pub l: usize,
    pub amplitude: f64,
    #[serde(default)]
    pub applied_to: Variable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSurface {
    CoordinateSphere {
        base_s: f64,
    },
    PerturbedSphere {
        base_s: f64,
        perturbation: Perturbation,
    },
    /// Nodal area radii in grid order (`index = k * n_psi + j`).
    CustomTable {
        values: Vec<f64>,
    },
}

/// Every tolerance used by a verdict. Reports echo these values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub monotonicity_relative: f64,
    pub monotonicity_dt_squared: f64,
    pub q_floor_relative: f64,
    pub flux_relative: f64,
    pub area_growth_relative: f64,
    pub hexp_ratio_max: f64,
    pub limit_q_excess: f64,
    pub limit_spread: f64,
    pub limit_roundness: f64,
    pub gap_zero_relative: f64,
    pub static_residual: f64,
    pub phimap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            monotonicity_relative: 1e-8,
            monotonicity_dt_squared: 0.0,
            q_floor_relative: 1e-8,
            flux_relative: 1e-8,
            area_growth_relative: 1e-6,
            hexp_ratio_max: 1e3,
            limit_q_excess: 1e-3,
            limit_spread: 1e-3,
            limit_roundness: 1e-3,
            gap_zero_relative: 1e-9,
            static_residual: 1e-12,
            phimap: 1e-13,
        }
    }
}

impl Tolerances {
    pub fn monotonicity(&self) -> MonotonicityOptions {
        MonotonicityOptions {
            relative_slack: self.monotonicity_relative,
            dt_squared_coefficient: self.monotonicity_dt_squared,
            ..MonotonicityOptions::default()
        }
    }
}

/// Verdicts evaluated by `run`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Monotonicity,
    QFloor,
    Flux,
    AreaGrowth,
    Sandwich,
    ChiBound,
    HexpBounded,
    Limit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChecksConfig {
    pub verdicts: Vec<Check>,
    pub tolerances: Tolerances,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self {
            verdicts: vec![
                Check::Monotonicity,
                Check::QFloor,
                Check::Flux,
                Check::AreaGrowth,
                Check::Sandwich,
                Check::ChiBound,
                Check::HexpBounded,
            ],
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub trace: String,
    pub report: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), trace: "trace.csv".into(), report: "report.json".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub ambient: AmbientConfig,
    pub grid: GridConfig,
    pub initial: InitialSurface,
    #[serde(default)]
    pub flow: FlowConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
}

/// A validated scenario, ready to run.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub params: AmbientParams,
    pub grid: Arc<SphereGrid>,
    pub phimap: Arc<PhiMap>,
    pub surface: GraphSurface,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: Self = load_json(path)?;
        cfg.flow.validate()?;
        Ok(cfg)
    }

    pub fn params(&self) -> Result<AmbientParams> {
        AmbientParams::new(self.ambient.n, self.ambient.m)
    }

    /// Builds the grid, table and initial surface, and checks admissibility:
    /// outside the horizon, star-shaped and mean-convex.
    pub fn prepare(&self) -> Result<Prepared> {
        self.flow.validate()?;
        let params = self.params()?;
        let grid = Arc::new(self.grid.build(params.n())?);
        let radii = self.initial_radii(&grid, &params)?;
        for (node, &s) in radii.iter().enumerate() {
            if !(s > params.s0()) || !s.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "initial surface is not outside the horizon s0 = {} (node {node}: s = {s})",
                    params.s0()
                )));
            }
        }
        let lo = radii.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = radii.iter().copied().fold(0.0, f64::max);
        let s_min = params.s0() + 0.5 * (lo - params.s0());
        let s_max = hi * ((self.flow.t_end + 1.0) / params.dim_sigma()).exp();
        let phimap = Arc::new(PhiMap::build(params, s_min, s_max, self.checks.tolerances.phimap)?);
        let surface = match &self.initial {
            InitialSurface::PerturbedSphere { base_s, perturbation: p } if p.applied_to == Variable::Phi => {
                let base = phimap.phi_of_s(*base_s)?;
                let phi = ScalarField::from_fn(&grid, |t, _| base + p.amplitude * legendre(p.l, t.cos()));
                GraphSurface::new(grid.clone(), phimap.clone(), phi, 0.0)?
            }
            _ => GraphSurface::from_radii(grid.clone(), phimap.clone(), &radii, 0.0)?,
        };
        let fields = geometry_fields(&surface)?;
        if let Some((node, h)) = fields.mean_curvature.iter().enumerate().find(|(_, h)| !(**h > 0.0)) {
            return Err(Error::InvalidConfig(format!("initial surface is not mean-convex (node {node}: H = {h})")));
        }
        if let Some(chi) = fields.chi.iter().find(|c| !(**c > 0.0)) {
            return Err(Error::InvalidConfig(format!("initial surface is not star-shaped (chi = {chi})")));
        }
        Ok(Prepared { params, grid, phimap, surface })
    }

    fn initial_radii(&self, grid: &SphereGrid, params: &AmbientParams) -> Result<Vec<f64>> {
        let coords = |i: usize| grid.coords(i).0;
        match &self.initial {
            InitialSurface::CoordinateSphere { base_s } => Ok(vec![*base_s; grid.len()]),
            InitialSurface::PerturbedSphere { base_s, perturbation: p } => {
                if !(*base_s > params.s0()) {
                    return Err(Error::InvalidConfig(format!("base_s = {base_s} must exceed s0 = {}", params.s0())));
                }
                let phi_mode = p.applied_to == Variable::Phi;
                if phi_mode {
                    // Radii from a throwaway table covering phi(base) +- reach:
                    // since f <= 1, phi grows at least like ln s.
                    let reach = p.amplitude.abs() * 1.01 + 1e-12;
                    let s_lo = if params.m() > 0.0 {
                        params.s0() + (*base_s - params.s0()) * 1e-12
                    } else {
                        base_s * (-2.0 * reach).exp()
                    };
                    let s_hi = base_s * (2.0 * reach).exp();
                    let map = PhiMap::build(*params, s_lo, s_hi, self.checks.tolerances.phimap)?;
                    let base = map.phi_of_s(*base_s)?;
                    (0..grid.len())
                        .map(|i| {
                            let phi = base + p.amplitude * legendre(p.l, coords(i).cos());
                            map.s_of_phi(phi).map_err(|_| {
                                Error::InvalidConfig(format!(
                                    "perturbation amplitude {} reaches the horizon",
                                    p.amplitude
                                ))
                            })
                        })
                        .collect()
                } else {
                    Ok((0..grid.len()).map(|i| base_s * (1.0 + p.amplitude * legendre(p.l, coords(i).cos()))).collect())
                }
            }
            InitialSurface::CustomTable { values } => {
                if values.len() != grid.len() {
                    return Err(Error::InvalidConfig(format!(
                        "custom table has {} values; the grid has {} nodes",
                        values.len(),
                        grid.len()
                    )));
                }
                Ok(values.clone())
            }
        }
    }
}

/// Sweep description: a scenario template and the parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub scenario: String,
    pub grid: GridConfig,
    pub parameters: SweepGrid,
    #[serde(default)]
    pub applied_to: Variable,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub epsilon: Vec<f64>,
    pub l: Vec<usize>,
    pub s: Vec<f64>,
    pub m: Vec<f64>,
    pub n: Vec<usize>,
}

impl SweepGrid {
    pub fn is_empty(&self) -> bool {
        self.epsilon.is_empty() || self.l.is_empty() || self.s.is_empty() || self.m.is_empty() || self.n.is_empty()
    }

    /// Every combination in `(n, m, s, l, epsilon)` lexicographic order.
    pub fn points(&self) -> Vec<SweepPoint> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &m in &self.m {
                for &s in &self.s {
                    for &l in &self.l {
                        for &epsilon in &self.epsilon {
                            out.push(SweepPoint { n, m, s, l, epsilon });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n: usize,
    pub m: f64,
    pub s: f64,
    pub l: usize,
    pub epsilon: f64,
}
