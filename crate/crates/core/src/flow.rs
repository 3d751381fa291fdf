//! Explicit integration of the graph form of inverse mean curvature flow,
//! `d phi / dt = 1 / F` with `F = lambda H / v`.
//!
//! Stepping is RK2 (midpoint) under a parabolic CFL bound. Radii are carried
//! alongside `phi` and advanced with a third-order Taylor expansion of the
//! inverse map `s(phi)`, whose derivatives are closed-form; they are resynced
//! against the tabulated inverse at every snapshot.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ambient::AmbientParams;
use crate::error::{Error, Result};
use crate::monitor::{FlowOutcome, FlowRecord, FlowTrace};
use crate::phimap::PhiMap;
use crate::sphere::{Partials, ScalarField, SphereGrid};
use crate::surface::{node_geometry, GraphSurface};

/// Default breakdown threshold on `F`.
pub const F_MIN: f64 = 1e-10;

/// Largest `|delta phi|` advanced by Taylor expansion; larger increments use
/// the tabulated inverse.
const TAYLOR_MAX_INCREMENT: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub t_end: f64,
    pub cfl_safety: f64,
    pub snapshot_interval: f64,
    pub max_steps: usize,
    /// Breakdown threshold: the flow stops once `F <= f_min` at a node.
    pub f_min: f64,
    pub dt_min: f64,
    pub dt_max: Option<f64>,
    /// Relative slack for the coordinate-sphere sandwich check.
    pub sandwich_tolerance: f64,
    /// Relative slack for the support-function lower bound.
    pub chi_tolerance: f64,
    /// Integrate coordinate spheres with the exact radial solution.
    pub sphere_fast_path: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            t_end: 1.0,
            cfl_safety: 0.2,
            snapshot_interval: 0.1,
            max_steps: 50_000_000,
            f_min: F_MIN,
            dt_min: 1e-14,
            dt_max: None,
            sandwich_tolerance: 1e-6,
            chi_tolerance: 1e-6,
            sphere_fast_path: false,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be positive and finite");
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad("cfl_safety must lie in (0, 1]");
        }
        if !(self.snapshot_interval > 0.0) {
            return bad("snapshot_interval must be positive");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive");
        }
        if !(self.f_min >= 0.0) || !(self.dt_min >= 0.0) {
            return bad("f_min and dt_min must be nonnegative");
        }
        if let Some(dt) = self.dt_max {
            if !(dt > 0.0) {
                return bad("dt_max must be positive");
            }
        }
        if !(self.sandwich_tolerance >= 0.0 && self.chi_tolerance >= 0.0) {
            return bad("tolerances must be nonnegative");
        }
        Ok(())
    }
}

/// Something noteworthy observed during a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FlowEvent {
    Breakdown { t: f64, node: usize, f: f64 },
    DtUnderflow { t: f64, dt: f64 },
    MaxSteps { t: f64, steps: usize },
    HorizonApproach { t: f64, node: usize, lapse: f64 },
    SandwichViolation { t: f64, node: usize, s: f64, lower: f64, upper: f64 },
    ChiBoundViolation { t: f64, chi_min: f64, bound: f64 },
}

/// `1/F` at every node.
pub fn speed_field(surface: &GraphSurface) -> Result<ScalarField> {
    let radii = surface.radii();
    let mut kernel = Kernel::new(surface.grid().clone(), *surface.ambient());
    let mut out = vec![0.0; radii.len()];
    kernel.speed(&surface.phi().0, &radii, &mut out, F_MIN).map_err(|(node, f)| Error::Breakdown {
        node,
        f,
        t: surface.t(),
    })?;
    Ok(ScalarField(out))
}

/// CFL-limited step for the surface: `cfl * min(Delta^2 v^2 F^2) / (2 dim)`.
pub fn stable_dt(surface: &GraphSurface, cfl_safety: f64) -> Result<f64> {
    let radii = surface.radii();
    let mut kernel = Kernel::new(surface.grid().clone(), *surface.ambient());
    let mut out = vec![0.0; radii.len()];
    let bound = kernel.speed(&surface.phi().0, &radii, &mut out, F_MIN).map_err(|(node, f)| Error::Breakdown {
        node,
        f,
        t: surface.t(),
    })?;
    Ok(cfl_safety * bound)
}

/// Evaluates `1/F` and the diffusion bound with reusable buffers.
#[derive(Debug, Clone)]
struct Kernel {
    grid: Arc<SphereGrid>,
    params: AmbientParams,
    d: Partials,
    spacing_sq: Vec<f64>,
    inv_dim2: f64,
}

impl Kernel {
    fn new(grid: Arc<SphereGrid>, params: AmbientParams) -> Self {
        let len = grid.len();
        let spacing_sq = (0..len).map(|i| grid.local_spacing(i).powi(2)).collect();
        let inv_dim2 = 1.0 / (2.0 * grid.spatial_dim() as f64);
        let d = Partials { t: vec![0.0; len], tt: vec![0.0; len], p: Vec::new(), pp: Vec::new(), tp: Vec::new() };
        Self { grid, params, d, spacing_sq, inv_dim2 }
    }

    /// Writes `1/F` into `out` and returns the unscaled CFL bound, or the
    /// first node with `F <= f_min`.
    fn speed(&mut self, phi: &[f64], s: &[f64], out: &mut [f64], f_min: f64) -> std::result::Result<f64, (usize, f64)> {
        if self.grid.is_2d() {
            self.d = self.grid.partials(phi);
        } else {
            self.grid.d_theta_both_into(phi, &mut self.d.t, &mut self.d.tt);
        }
        let mut bound = f64::INFINITY;
        for i in 0..out.len() {
            let g = node_geometry(&self.grid, &self.params, &self.d, s[i], i);
            let f = s[i] * g.h / g.v;
            if !(f > f_min) {
                return Err((i, f));
            }
            out[i] = 1.0 / f;
            let vf = g.v * f;
            bound = bound.min(self.spacing_sq[i] * vf * vf);
        }
        Ok(bound * self.inv_dim2)
    }
}

/// `s(phi + dphi)` from `s(phi)`, using `ds/dphi = s f`.
#[inline]
fn advance_radius(params: &AmbientParams, s: f64, dphi: f64) -> f64 {
    if params.m() == 0.0 {
        return s * dphi.exp();
    }
    let f = params.lapse_unchecked(s);
    let l = params.lambda_dd_unchecked(s);
    let n = params.n() as f64;
    let g = s * f;
    let g1 = f + s * l / f;
    let g2 = (3.0 - n) * l / f - s * l * l / (f * f * f);
    let h = dphi;
    s + g * h * (1.0 + h * (0.5 * g1 + h * (g2 * g + g1 * g1) / 6.0))
}

/// A flow in progress. Owns its state exclusively.
#[derive(Debug, Clone)]
pub struct FlowState {
    grid: Arc<SphereGrid>,
    phimap: Arc<PhiMap>,
    phi: Vec<f64>,
    s: Vec<f64>,
    t: f64,
    steps: usize,
    dt: f64,
    config: FlowConfig,
    events: Vec<FlowEvent>,
    kernel: Kernel,
    k1: Vec<f64>,
    k2: Vec<f64>,
    phi_half: Vec<f64>,
    s_half: Vec<f64>,
}

impl FlowState {
    /// Prepares a flow from `initial`, extending the `phi` table if needed
    /// so it covers `s_max(0) e^{(t_end + 1)/(n-1)}`.
    pub fn new(initial: &GraphSurface, config: &FlowConfig) -> Result<Self> {
        config.validate()?;
        let params = *initial.ambient();
        let radii = initial.radii();
        let s_max0 = radii.iter().copied().fold(0.0, f64::max);
        let target = s_max0 * ((config.t_end + 1.0) / params.dim_sigma()).exp();
        let old = initial.phimap();
        let (s_lo, s_hi) = old.s_range();
        let (phimap, phi) = if s_hi >= target {
            (old.clone(), initial.phi().0.clone())
        } else {
            let map = Arc::new(PhiMap::build(params, s_lo, target, old.tolerance())?);
            let phi = radii.iter().map(|&s| map.phi_of_s(s)).collect::<Result<Vec<_>>>()?;
            (map, phi)
        };
        let grid = initial.grid().clone();
        let len = grid.len();
        let mut state = Self {
            kernel: Kernel::new(grid.clone(), params),
            grid,
            phimap,
            phi,
            s: radii,
            t: initial.t(),
            steps: 0,
            dt: 0.0,
            config: config.clone(),
            events: Vec::new(),
            k1: vec![0.0; len],
            k2: vec![0.0; len],
            phi_half: vec![0.0; len],
            s_half: vec![0.0; len],
        };
        state.dt = state.stable_dt()?;
        if let Some((node, lapse)) = state.min_lapse() {
            if lapse < 1e-3 {
                state.events.push(FlowEvent::HorizonApproach { t: state.t, node, lapse });
            }
        }
        Ok(state)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Most recent CFL step size. Steps shortened to land on a target time
    /// do not overwrite it.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn events(&self) -> &[FlowEvent] {
        &self.events
    }

    pub fn config(&self) -> &FlowConfig {
        &self.config
    }

    pub fn phimap(&self) -> &Arc<PhiMap> {
        &self.phimap
    }

    fn params(&self) -> &AmbientParams {
        self.phimap.params()
    }

    fn min_lapse(&self) -> Option<(usize, f64)> {
        let p = *self.params();
        self.s.iter().enumerate().map(|(i, &s)| (i, p.lapse_unchecked(s))).min_by(|a, b| a.1.total_cmp(&b.1))
    }

    fn breakdown(&self, (node, f): (usize, f64)) -> Error {
        Error::Breakdown { node, f, t: self.t }
    }

    /// The current surface, with radii resynced to the tabulated inverse.
    pub fn surface(&mut self) -> Result<GraphSurface> {
        self.resync();
        GraphSurface::new(self.grid.clone(), self.phimap.clone(), ScalarField(self.phi.clone()), self.t)
    }

    fn resync(&mut self) {
        for (s, &p) in self.s.iter_mut().zip(&self.phi) {
            *s = self.phimap.s_of_phi_unchecked(p);
        }
    }

    /// CFL step for the current state, capped by `dt_max`.
    pub fn stable_dt(&mut self) -> Result<f64> {
        let f_min = self.config.f_min;
        let bound = self.kernel.speed(&self.phi, &self.s, &mut self.k1, f_min).map_err(|e| self.breakdown(e))?;
        let dt = self.config.cfl_safety * bound;
        Ok(self.config.dt_max.map_or(dt, |cap| dt.min(cap)))
    }

    /// Taylor-advanced radii; `NaN` marks increments left for [`Self::fill_exact`].
    fn advance_all(params: &AmbientParams, s: &[f64], dphi: &[f64], out: &mut [f64]) {
        for i in 0..s.len() {
            out[i] =
                if dphi[i].abs() <= TAYLOR_MAX_INCREMENT { advance_radius(params, s[i], dphi[i]) } else { f64::NAN };
        }
    }

    /// One RK2 midpoint step of size `dt`.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParams(format!("time step must be positive, got {dt}")));
        }
        let params = *self.params();
        let f_min = self.config.f_min;
        let phi_max = self.phimap.phi_range().1;
        let len = self.phi.len();

        self.kernel.speed(&self.phi, &self.s, &mut self.k1, f_min).map_err(|e| self.breakdown(e))?;
        for i in 0..len {
            self.k2[i] = 0.5 * dt * self.k1[i];
            self.phi_half[i] = self.phi[i] + self.k2[i];
        }
        Self::advance_all(&params, &self.s, &self.k2, &mut self.s_half);
        self.fill_exact(true)?;

        self.kernel.speed(&self.phi_half, &self.s_half, &mut self.k2, f_min).map_err(|(node, f)| Error::Breakdown {
            node,
            f,
            t: self.t + 0.5 * dt,
        })?;
        for i in 0..len {
            self.k2[i] *= dt;
        }
        let mut s_new = std::mem::take(&mut self.s_half);
        Self::advance_all(&params, &self.s, &self.k2, &mut s_new);
        for i in 0..len {
            self.phi[i] += self.k2[i];
            if !(self.phi[i] <= phi_max) {
                return Err(Error::Range { value: self.phi[i], lo: 0.0, hi: phi_max });
            }
        }
        self.s_half = s_new;
        std::mem::swap(&mut self.s, &mut self.s_half);
        self.fill_exact(false)?;
        for (node, &s) in self.s.iter().enumerate() {
            if !(s > params.s0()) {
                return Err(Error::HorizonViolation { node, s });
            }
        }
        self.t += dt;
        self.steps += 1;
        self.dt = dt;
        Ok(())
    }

    /// Replaces radii that were too far for the Taylor update.
    fn fill_exact(&mut self, half: bool) -> Result<()> {
        let (phis, radii) = if half { (&self.phi_half, &mut self.s_half) } else { (&self.phi, &mut self.s) };
        let (lo, hi) = self.phimap.phi_range();
        for (s, &p) in radii.iter_mut().zip(phis) {
            if s.is_nan() {
                if !(p >= lo && p <= hi) {
                    return Err(Error::Range { value: p, lo, hi });
                }
                *s = self.phimap.s_of_phi_unchecked(p);
            }
        }
        Ok(())
    }

    /// Steps until `t_target`, landing on it exactly.
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        while self.t < t_target {
            if self.steps >= self.config.max_steps {
                return Err(Error::InvalidConfig(format!(
                    "max_steps = {} reached at t = {}",
                    self.config.max_steps, self.t
                )));
            }
            let dt = self.stable_dt()?;
            if dt < self.config.dt_min {
                return Err(Error::DtUnderflow { dt, dt_min: self.config.dt_min });
            }
            let remaining = t_target - self.t;
            if dt >= remaining || remaining - dt <= 1e-12 * t_target.abs().max(1.0) {
                let stable = dt;
                self.step(remaining)?;
                self.t = t_target;
                self.dt = stable;
            } else {
                self.step(dt)?;
            }
        }
        Ok(())
    }
}

/// Snapshot times `0, h, 2h, ..., t_end` with `t_end` always included.
pub fn snapshot_times(t_start: f64, t_end: f64, interval: f64) -> Vec<f64> {
    let mut out = vec![t_start];
    let mut k = 1u64;
    loop {
        let t = t_start + k as f64 * interval;
        if t >= t_end - 1e-12 * t_end.abs().max(1.0) {
            break;
        }
        out.push(t);
        k += 1;
    }
    if t_end > t_start {
        out.push(t_end);
    }
    out
}

struct SnapshotChecks {
    s_lo: f64,
    s_hi: f64,
    chi0: f64,
    t0: f64,
    n1: f64,
}

impl SnapshotChecks {
    fn new(surface: &GraphSurface, record: &FlowRecord) -> Self {
        let radii = surface.radii();
        Self {
            s_lo: radii.iter().copied().fold(f64::INFINITY, f64::min),
            s_hi: radii.iter().copied().fold(0.0, f64::max),
            chi0: record.chi_min,
            t0: surface.t(),
            n1: surface.ambient().dim_sigma(),
        }
    }

    fn apply(&self, config: &FlowConfig, surface: &GraphSurface, record: &FlowRecord, events: &mut Vec<FlowEvent>) {
        let t = surface.t();
        let growth = ((t - self.t0) / self.n1).exp();
        let lower = self.s_lo * growth * (1.0 - config.sandwich_tolerance);
        let upper = self.s_hi * growth * (1.0 + config.sandwich_tolerance);
        if let Some((node, &s)) = surface.radii().iter().enumerate().find(|(_, &s)| s < lower || s > upper) {
            events.push(FlowEvent::SandwichViolation { t, node, s, lower, upper });
        }
        let bound = self.chi0 * growth * (1.0 - config.chi_tolerance);
        if record.chi_min < bound {
            events.push(FlowEvent::ChiBoundViolation { t, chi_min: record.chi_min, bound });
        }
    }
}

fn is_coordinate_sphere(surface: &GraphSurface) -> bool {
    let phi = &surface.phi().0;
    phi.iter().all(|&p| p == phi[0])
}

/// Integrates from `initial` to `config.t_end`, recording a snapshot every
/// `snapshot_interval` and at the end. Breakdown or step underflow after the
/// start returns a partial trace flagged with the failure.
pub fn run(initial: &GraphSurface, config: &FlowConfig) -> Result<FlowTrace> {
    config.validate()?;
    let t0 = initial.t();
    let times = snapshot_times(t0, t0 + config.t_end, config.snapshot_interval);
    if config.sphere_fast_path && is_coordinate_sphere(initial) {
        return run_coordinate_sphere(initial, config, &times);
    }
    let mut state = FlowState::new(initial, config)?;
    let first = state.surface()?;
    let record = FlowRecord::from_surface(&first, state.dt())?;
    let checks = SnapshotChecks::new(&first, &record);
    let mut events = state.events().to_vec();
    checks.apply(config, &first, &record, &mut events);
    let mut records = vec![record];
    let mut outcome = FlowOutcome::Completed;
    let mut final_surface = first;
    for &t in &times[1..] {
        if let Err(e) = state.advance_to(t) {
            let (event, kind) = match e {
                Error::Breakdown { node, f, t } => (FlowEvent::Breakdown { t, node, f }, FlowOutcome::Breakdown),
                Error::DtUnderflow { dt, .. } => {
                    (FlowEvent::DtUnderflow { t: state.t(), dt }, FlowOutcome::DtUnderflow)
                }
                Error::InvalidConfig(_) if state.steps() >= config.max_steps => {
                    (FlowEvent::MaxSteps { t: state.t(), steps: state.steps() }, FlowOutcome::MaxSteps)
                }
                Error::HorizonViolation { node, s } => {
                    let lapse = state.params().lapse_unchecked(s.max(state.params().s0()));
                    (FlowEvent::HorizonApproach { t: state.t(), node, lapse }, FlowOutcome::HorizonViolation)
                }
                other => return Err(other),
            };
            events.push(event);
            outcome = kind;
            break;
        }
        let surface = state.surface()?;
        let record = FlowRecord::from_surface(&surface, state.dt())?;
        checks.apply(config, &surface, &record, &mut events);
        records.push(record);
        final_surface = surface;
    }
    Ok(FlowTrace { params: *initial.ambient(), records, events, outcome, steps: state.steps(), final_surface })
}

/// Coordinate spheres stay coordinate spheres with `s(t) = s(0) e^{t/(n-1)}`.
fn run_coordinate_sphere(initial: &GraphSurface, config: &FlowConfig, times: &[f64]) -> Result<FlowTrace> {
    let params = *initial.ambient();
    let s_init = initial.radii()[0];
    let n1 = params.dim_sigma();
    let target = s_init * ((config.t_end + 1.0) / n1).exp();
    let old = initial.phimap();
    let map = if old.s_range().1 >= target {
        old.clone()
    } else {
        Arc::new(PhiMap::build(params, old.s_range().0, target, old.tolerance())?)
    };
    let t0 = initial.t();
    let mut records = Vec::with_capacity(times.len());
    let mut events = Vec::new();
    let mut checks = None;
    let mut final_surface = None;
    for &t in times {
        let s = s_init * ((t - t0) / n1).exp();
        let mut surface = GraphSurface::coordinate_sphere(initial.grid().clone(), map.clone(), s)?;
        surface = surface.with_phi(surface.phi().clone(), t)?;
        let dt = stable_dt(&surface, config.cfl_safety)?;
        let record = FlowRecord::from_surface(&surface, dt)?;
        let c = checks.get_or_insert_with(|| SnapshotChecks::new(&surface, &record));
        c.apply(config, &surface, &record, &mut events);
        records.push(record);
        final_surface = Some(surface);
    }
    Ok(FlowTrace {
        params,
        records,
        events,
        outcome: FlowOutcome::Completed,
        steps: 0,
        final_surface: final_surface.expect("at least one snapshot"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::legendre;
    use approx::assert_relative_eq;

    fn setup(n: usize, m: f64, nt: usize, s_lo: f64, s_hi: f64) -> (Arc<SphereGrid>, Arc<PhiMap>) {
        let p = AmbientParams::new(n, m).unwrap();
        (Arc::new(SphereGrid::axisym(n, nt).unwrap()), Arc::new(PhiMap::build(p, s_lo, s_hi, 1e-13).unwrap()))
    }

    fn perturbed(grid: &Arc<SphereGrid>, map: &Arc<PhiMap>, s: f64, eps: f64) -> GraphSurface {
        let base = map.phi_of_s(s).unwrap();
        let phi = ScalarField::from_fn(grid, |t, _| base + eps * legendre(2, t.cos()));
        GraphSurface::new(grid.clone(), map.clone(), phi, 0.0).unwrap()
    }

    #[test]
    fn speed_on_coordinate_spheres() {
        let (grid, map) = setup(3, 1.0, 64, 2.5, 10.0);
        let sph = GraphSurface::coordinate_sphere(grid, map, 4.0).unwrap();
        let speed = speed_field(&sph).unwrap();
        for &u in speed.values() {
            assert_relative_eq!(u, 0.5f64.sqrt(), max_relative = 1e-12);
        }
        let (grid, map) = setup(4, 0.0, 32, 0.5, 3.0);
        let sph = GraphSurface::coordinate_sphere(grid, map, 1.3).unwrap();
        for &u in speed_field(&sph).unwrap().values() {
            assert_relative_eq!(u, 1.0 / 3.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn stable_dt_closed_form_and_scaling() {
        let (g64, map) = setup(3, 1.0, 64, 2.5, 10.0);
        let sph = GraphSurface::coordinate_sphere(g64.clone(), map.clone(), 4.0).unwrap();
        let dt = stable_dt(&sph, 0.2).unwrap();
        let dmin = (0..g64.len()).map(|i| g64.local_spacing(i)).fold(f64::INFINITY, f64::min);
        let f = 0.5f64.sqrt();
        assert_relative_eq!(dt, 0.2 * dmin * dmin * (2.0 * f).powi(2) / 2.0, max_relative = 1e-12);
        let g128 = Arc::new(SphereGrid::axisym(3, 128).unwrap());
        let sph2 = GraphSurface::coordinate_sphere(g128, map, 4.0).unwrap();
        let ratio = dt / stable_dt(&sph2, 0.2).unwrap();
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn taylor_radius_update_matches_table() {
        let p = AmbientParams::new(3, 1.0).unwrap();
        let map = PhiMap::build(p, 2.1, 50.0, 1e-13).unwrap();
        for &s in &[2.2, 3.0, 4.0, 10.0, 30.0] {
            let phi = map.phi_of_s(s).unwrap();
            for &h in &[1e-5, 1e-4, 1e-3] {
                let exact = map.s_of_phi(phi + h).unwrap();
                assert_relative_eq!(advance_radius(&p, s, h), exact, max_relative = 5e-13);
            }
        }
    }

    #[test]
    fn one_step_preserves_symmetry_of_spheres() {
        let (grid, map) = setup(3, 1.0, 64, 2.5, 10.0);
        let sph = GraphSurface::coordinate_sphere(grid, map, 4.0).unwrap();
        let config = FlowConfig { t_end: 1.0, ..FlowConfig::default() };
        let mut state = FlowState::new(&sph, &config).unwrap();
        let phi0 = sph.phi().0[0];
        state.step(1e-3).unwrap();
        let surf = state.surface().unwrap();
        let phi = &surf.phi().0;
        assert!(phi.iter().all(|&p| p == phi[0]));
        let shift = phi[0] - phi0;
        assert!((shift - 1e-3 / (2.0 * 0.5f64.sqrt())).abs() < 1e-6);
        assert!(state.step(-1e-3).is_err());
        assert!(state.step(0.0).is_err());
    }

    #[test]
    fn coordinate_sphere_follows_exact_solution() {
        let (grid, map) = setup(3, 1.0, 32, 2.5, 10.0);
        let sph = GraphSurface::coordinate_sphere(grid, map, 4.0).unwrap();
        let config = FlowConfig { t_end: 1.0, snapshot_interval: 0.5, ..FlowConfig::default() };
        let trace = run(&sph, &config).unwrap();
        assert_eq!(trace.outcome, FlowOutcome::Completed);
        assert_eq!(trace.records.len(), 3);
        let s_final = trace.final_surface.radii()[0];
        // Time error of RK2 at the CFL step of N = 32.
        assert_relative_eq!(s_final, 4.0 * 0.5f64.exp(), max_relative = 1e-7);
        assert!(trace.events.is_empty(), "{:?}", trace.events);
    }

    #[test]
    fn fast_path_matches_exact_solution() {
        let (grid, map) = setup(3, 1.0, 32, 2.5, 10.0);
        let sph = GraphSurface::coordinate_sphere(grid, map, 4.0).unwrap();
        let config = FlowConfig { t_end: 2.0, snapshot_interval: 0.5, sphere_fast_path: true, ..FlowConfig::default() };
        let trace = run(&sph, &config).unwrap();
        assert_eq!(trace.steps, 0);
        assert_relative_eq!(trace.final_surface.radii()[0], 4.0 * 1f64.exp(), max_relative = 1e-12);
    }

    #[test]
    fn rk2_error_is_second_order() {
        let (grid, map) = setup(3, 1.0, 16, 2.5, 10.0);
        let sph = GraphSurface::coordinate_sphere(grid, map, 4.0).unwrap();
        let exact = 4.0 * 0.25f64.exp();
        let err = |dt: f64| {
            let config = FlowConfig { t_end: 0.5, ..FlowConfig::default() };
            let mut st = FlowState::new(&sph, &config).unwrap();
            let steps = (0.5 / dt).round() as usize;
            for _ in 0..steps {
                st.step(dt).unwrap();
            }
            (st.surface().unwrap().radii()[0] - exact).abs()
        };
        let (e1, e2) = (err(0.05), err(0.025));
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.2, "order {order} ({e1:e}, {e2:e})");
    }

    #[test]
    fn perturbed_flow_expands_and_stays_even() {
        let (grid, map) = setup(3, 1.0, 48, 2.5, 10.0);
        let surf = perturbed(&grid, &map, 4.0, 0.1);
        let config = FlowConfig { t_end: 0.5, snapshot_interval: 0.1, ..FlowConfig::default() };
        let mut state = FlowState::new(&surf, &config).unwrap();
        let mut min_s = surf.radii().iter().copied().fold(f64::INFINITY, f64::min);
        for k in 1..=5 {
            state.advance_to(0.1 * k as f64).unwrap();
            let s = state.surface().unwrap().radii();
            let now = s.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(now >= min_s);
            min_s = now;
            let nt = grid.n_theta();
            for i in 0..nt {
                assert!((s[i] - s[nt - 1 - i]).abs() <= 1e-12 * s[i]);
            }
        }
        assert_eq!(state.t(), 0.5);
    }

    #[test]
    fn negative_mean_curvature_breaks_down_immediately() {
        let (grid, map) = setup(3, 1.0, 32, 2.05, 10.0);
        // A deep dimple near the pole makes H negative there.
        let base = map.phi_of_s(4.0).unwrap();
        let phi = ScalarField::from_fn(&grid, |t, _| base - 0.6 * (-(t / 0.25).powi(2)).exp());
        let surf = GraphSurface::new(grid, map, phi, 0.0).unwrap();
        let err = FlowState::new(&surf, &FlowConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Breakdown { .. }), "{err:?}");
        assert!(matches!(run(&surf, &FlowConfig::default()), Err(Error::Breakdown { .. })));
    }

    #[test]
    fn snapshot_times_include_end() {
        assert_eq!(snapshot_times(0.0, 1.0, 0.5), vec![0.0, 0.5, 1.0]);
        assert_eq!(snapshot_times(0.0, 1.0, 0.3).len(), 5);
        let t = snapshot_times(0.0, 10.0, 0.1);
        assert_eq!(t.len(), 101);
        assert_eq!(*t.last().unwrap(), 10.0);
    }

    #[test]
    fn invalid_config_rejected() {
        for cfg in [
            FlowConfig { t_end: 0.0, ..FlowConfig::default() },
            FlowConfig { cfl_safety: 1.5, ..FlowConfig::default() },
            FlowConfig { cfl_safety: 0.0, ..FlowConfig::default() },
            FlowConfig { snapshot_interval: -1.0, ..FlowConfig::default() },
        ] {
            assert!(cfg.validate().is_err());
        }
    }
}
