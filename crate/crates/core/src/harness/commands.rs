use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{Check, GridConfig, ScenarioConfig, SweepConfig, SweepPoint, Variable};
use super::{ExitStatus, Report, Timings, Verdict};
use crate::ambient::AmbientParams;
use crate::error::{Error, Result};
use crate::flow::{run, FlowEvent};
use crate::monitor::{flux_constant, limit_diagnostics, monotonicity_verdict, FlowTrace};
use crate::phimap::PhiMap;
use crate::sphere::{legendre, ScalarField, SphereGrid};
use crate::surface::{geometry_fields, GraphSurface};

/// Everything produced by one flow scenario.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub trace: FlowTrace,
    pub report: Report,
    pub status: ExitStatus,
}

/// Runs the flow of `config` and evaluates its enabled verdicts.
/// Configuration problems (including an inadmissible initial surface) are
/// returned as errors; breakdown mid-run yields [`ExitStatus::Breakdown`].
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunResult> {
    let start = Instant::now();
    let prepared = config.prepare()?;
    let compute = Instant::now();
    let trace = run(&prepared.surface, &config.flow)?;
    let compute_seconds = compute.elapsed().as_secs_f64();
    let verdicts = run_verdicts(config, &prepared.grid, &trace)?;
    let status = if !trace.completed() { ExitStatus::Breakdown } else { ExitStatus::from_verdicts(&verdicts) };
    let report = Report {
        scenario: config.scenario.clone(),
        effective_config: serde_json::to_value(config).expect("configs serialize"),
        verdicts,
        timings: Timings { total_seconds: start.elapsed().as_secs_f64(), compute_seconds },
    };
    Ok(RunResult { trace, report, status })
}

fn run_verdicts(config: &ScenarioConfig, grid: &SphereGrid, trace: &FlowTrace) -> Result<Vec<Verdict>> {
    let tol = &config.checks.tolerances;
    let params = trace.params;
    let records = &trace.records;
    let first = &records[0];
    let last = trace.last();
    let omega = grid.omega();
    let n1 = params.dim_sigma();
    let mut out = vec![Verdict::new("flow_completed", trace.completed(), last.t, config.flow.t_end)];
    for check in &config.checks.verdicts {
        match check {
            Check::Monotonicity => {
                if records.len() < 2 {
                    out.push(Verdict::new("monotonicity", false, f64::NAN, tol.monotonicity_relative));
                    continue;
                }
                let rep = monotonicity_verdict(records, &tol.monotonicity())?;
                let rel = rep.max_increase / first.q.abs();
                out.push(Verdict::new("monotonicity", rep.pass(), rel, tol.monotonicity_relative));
            }
            Check::QFloor => {
                let floor = n1 * omega.powf(1.0 / n1);
                let worst = records.iter().map(|r| (r.q - floor) / floor).fold(f64::INFINITY, f64::min);
                out.push(Verdict::new("q_floor", worst >= -tol.q_floor_relative, worst, -tol.q_floor_relative));
            }
            Check::Flux => {
                let expect = flux_constant(&params, omega);
                let scale = expect.abs().max(f64::MIN_POSITIVE);
                let worst = records.iter().map(|r| (r.flux - expect).abs()).fold(0.0, f64::max);
                let measured = if expect == 0.0 { worst } else { worst / scale };
                out.push(Verdict::at_most("flux", measured, tol.flux_relative));
            }
            Check::AreaGrowth => {
                let worst = records
                    .iter()
                    .map(|r| (r.area / (first.area * (r.t - first.t).exp()) - 1.0).abs())
                    .fold(0.0, f64::max);
                out.push(Verdict::at_most("area_growth", worst, tol.area_growth_relative));
            }
            Check::Sandwich => {
                let count = trace.events.iter().filter(|e| matches!(e, FlowEvent::SandwichViolation { .. })).count();
                out.push(Verdict::at_most("sandwich", count as f64, 0.0));
            }
            Check::ChiBound => {
                let count = trace.events.iter().filter(|e| matches!(e, FlowEvent::ChiBoundViolation { .. })).count();
                out.push(Verdict::at_most("chi_bound", count as f64, 0.0));
            }
            Check::HexpBounded => {
                let lo = records.iter().map(|r| r.hexp_min).fold(f64::INFINITY, f64::min);
                let hi = records.iter().map(|r| r.hexp_max).fold(0.0, f64::max);
                let ratio = if lo > 0.0 { hi / lo } else { f64::INFINITY };
                out.push(Verdict::at_most("hexp_bounded", ratio, tol.hexp_ratio_max));
            }
            Check::Limit => match limit_diagnostics(records, &params, omega, None) {
                Ok(rep) => {
                    out.push(Verdict::at_most("limit_q_excess", rep.q_excess, tol.limit_q_excess));
                    out.push(Verdict::at_most("limit_lambda_tilde_spread", rep.lambda_tilde_spread, tol.limit_spread));
                    out.push(Verdict::at_most("limit_roundness", rep.roundness, tol.limit_roundness));
                }
                Err(_) => out.push(Verdict::new("limit", false, f64::NAN, tol.limit_q_excess)),
            },
        }
    }
    Ok(out)
}

/// Parameters of `check-static`.
#[derive(Debug, Clone, Serialize)]
pub struct StaticCheck {
    pub cases: Vec<(usize, f64)>,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Test hook: scales `lambda''` by `1 + 1e-6` before evaluating residuals.
    pub corrupt_lambda_dd: bool,
}

impl StaticCheck {
    /// `n` in 3..=6 crossed with `m` in {0.5, 1, 2}.
    pub fn default_cases() -> Vec<(usize, f64)> {
        (3..=6).flat_map(|n| [0.5, 1.0, 2.0].map(|m| (n, m))).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StaticRow {
    pub n: usize,
    pub m: f64,
    pub max_scalar_curvature: f64,
    pub max_static_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StaticReport {
    pub rows: Vec<StaticRow>,
    pub worst: f64,
    pub status: ExitStatus,
}

/// Samples radii log-uniformly in `[s0 (1 + 1e-6), 1e3 s0]` (or `[1e-3, 1e3]`
/// for `m = 0`) and evaluates the scalar curvature and the static equation.
pub fn check_static(check: &StaticCheck) -> Result<StaticReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(check.seed);
    let mut rows = Vec::with_capacity(check.cases.len());
    for &(n, m) in &check.cases {
        let params = AmbientParams::new(n, m)?;
        let (lo, hi) = if m > 0.0 { (params.s0() * (1.0 + 1e-6), params.s0() * 1e3) } else { (1e-3, 1e3) };
        let (mut worst_r, mut worst_s) = (0.0_f64, 0.0_f64);
        for _ in 0..check.samples {
            let s = lo * (hi / lo).powf(rng.gen::<f64>());
            let mut point = params.point(s)?;
            if check.corrupt_lambda_dd {
                point.lambda_dd *= 1.0 + 1e-6;
            }
            worst_r = worst_r.max(point.scalar_curvature(&params).abs());
            worst_s = worst_s.max(point.static_residual(&params));
        }
        rows.push(StaticRow { n, m, max_scalar_curvature: worst_r, max_static_residual: worst_s });
    }
    let worst = rows.iter().map(|r| r.max_scalar_curvature.max(r.max_static_residual)).fold(0.0, f64::max);
    let status = if worst < check.tolerance { ExitStatus::Pass } else { ExitStatus::VerdictFailure };
    Ok(StaticReport { rows, worst, status })
}

/// Parameters of `check-flux`.
#[derive(Debug, Clone, Serialize)]
pub struct FluxCheck {
    pub n: usize,
    pub m: f64,
    pub grid: GridConfig,
    pub count: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Test hook: evaluates the flux density at a slightly wrong radius.
    pub corrupt: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FluxReport {
    pub expected: f64,
    pub fluxes: Vec<f64>,
    /// Relative deviation, or absolute when the expected flux is zero.
    pub worst_deviation: f64,
    pub status: ExitStatus,
}

/// Random smooth star-shaped surface: `phi = phi(base) + p(x)` with `p` a
/// random polynomial of degree 3 in the Cartesian point `x` on the sphere
/// (in `z = cos theta` only on axisymmetric grids).
pub fn random_surface(
    grid: &Arc<SphereGrid>,
    phimap: &Arc<PhiMap>,
    base_s: f64,
    amplitude: f64,
    rng: &mut ChaCha8Rng,
) -> Result<GraphSurface> {
    let mut monomials = Vec::new();
    for i in 0..=3u32 {
        for j in 0..=3 - i {
            for k in 0..=3 - i - j {
                if i + j + k > 0 && (grid.is_2d() || i + j == 0) {
                    monomials.push((i as i32, j as i32, k as i32, amplitude * (2.0 * rng.gen::<f64>() - 1.0)));
                }
            }
        }
    }
    let base = phimap.phi_of_s(base_s)?;
    let phi = (0..grid.len())
        .map(|idx| {
            let [x, y, z] = grid.cartesian(idx);
            base + monomials.iter().map(|&(i, j, k, c)| c * x.powi(i) * y.powi(j) * z.powi(k)).sum::<f64>()
        })
        .collect();
    GraphSurface::new(grid.clone(), phimap.clone(), ScalarField(phi), 0.0)
}

pub fn check_flux(check: &FluxCheck) -> Result<FluxReport> {
    if check.count == 0 {
        return Err(Error::InvalidConfig("count must be positive".into()));
    }
    let params = AmbientParams::new(check.n, check.m)?;
    let grid = Arc::new(check.grid.build(check.n)?);
    let (s_lo, s_hi) = if check.m > 0.0 { (params.s0() * 1.5, params.s0() * 3.0) } else { (0.5, 2.0) };
    let table_lo = if check.m > 0.0 { params.s0() * 1.05 } else { 0.1 };
    let phimap = Arc::new(PhiMap::build(params, table_lo, s_hi * 4.0, 1e-13)?);
    let mut rng = ChaCha8Rng::seed_from_u64(check.seed);
    let expected = flux_constant(&params, grid.omega());
    let mut fluxes = Vec::with_capacity(check.count);
    let mut attempts = 0;
    while fluxes.len() < check.count {
        attempts += 1;
        if attempts > 100 * check.count {
            return Err(Error::InvalidConfig("could not draw admissible random surfaces".into()));
        }
        let base = s_lo + (s_hi - s_lo) * rng.gen::<f64>();
        let Ok(surface) = random_surface(&grid, &phimap, base, 0.15, &mut rng) else {
            continue;
        };
        let fields = geometry_fields(&surface)?;
        let integrand: Vec<f64> = (0..fields.len())
            .map(|i| {
                let s = if check.corrupt { fields.s[i] * (1.0 + 1e-6) } else { fields.s[i] };
                params.normal_flux_density(s, fields.v[i]).map(|d| d * fields.area_weight[i])
            })
            .collect::<Result<_>>()?;
        fluxes.push(grid.integrate_values(&integrand));
    }
    let worst_abs = fluxes.iter().map(|f| (f - expected).abs()).fold(0.0, f64::max);
    let worst_deviation = if expected == 0.0 { worst_abs } else { worst_abs / expected.abs() };
    let status = if worst_deviation <= check.tolerance { ExitStatus::Pass } else { ExitStatus::VerdictFailure };
    Ok(FluxReport { expected, fluxes, worst_deviation, status })
}

/// One row of the sweep corpus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub m: f64,
    pub s: f64,
    pub l: usize,
    pub epsilon: f64,
    pub area: f64,
    #[serde(rename = "fH_integral")]
    pub fh_integral: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub gap: f64,
    /// Gap divided by `(n-1) omega (|Sigma| / omega)^{(n-2)/(n-1)}`.
    pub gap_relative: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub verdicts: Vec<Verdict>,
    pub status: ExitStatus,
}

impl SweepResult {
    /// The corpus as CSV, one row per parameter point in grid order.
    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).map_err(|e| Error::InvalidConfig(format!("csv: {e}")))?;
        }
        w.into_inner().map_err(|e| Error::InvalidConfig(format!("csv: {e}")))
    }
}

fn sweep_point(cfg: &SweepConfig, p: &SweepPoint) -> Result<SweepRow> {
    let params = AmbientParams::new(p.n, p.m)?;
    let grid = Arc::new(cfg.grid.build(p.n)?);
    let reach = p.epsilon.abs() * 1.01 + 1e-12;
    let lo = if p.m > 0.0 { params.s0() + (p.s - params.s0()) * 1e-12 } else { p.s * (-2.0 * reach).exp() };
    let map = Arc::new(PhiMap::build(params, lo, p.s * (2.0 * reach).exp() * 1.5, cfg.tolerances.phimap)?);
    let surface = match cfg.applied_to {
        Variable::Phi => {
            let base = map.phi_of_s(p.s)?;
            let phi = ScalarField::from_fn(&grid, |t, _| base + p.epsilon * legendre(p.l, t.cos()));
            GraphSurface::new(grid.clone(), map.clone(), phi, 0.0)?
        }
        Variable::S => {
            let radii: Vec<f64> =
                (0..grid.len()).map(|i| p.s * (1.0 + p.epsilon * legendre(p.l, grid.coords(i).0.cos()))).collect();
            GraphSurface::from_radii(grid.clone(), map.clone(), &radii, 0.0)?
        }
    };
    let fields = geometry_fields(&surface)?;
    let area = grid.integrate_values(&fields.area_weight);
    let fh_terms: Vec<f64> =
        (0..fields.len()).map(|i| fields.lambda_d[i] * fields.mean_curvature[i] * fields.area_weight[i]).collect();
    let fh = grid.integrate_values(&fh_terms);
    let omega = grid.omega();
    let n1 = params.dim_sigma();
    let e = (n1 - 1.0) / n1;
    let main = n1 * omega * (area / omega).powf(e);
    let gap = fh - (main - n1 * omega * 2.0 * p.m);
    let q = area.powf(-e) * (fh + 2.0 * n1 * p.m * omega);
    Ok(SweepRow {
        n: p.n,
        m: p.m,
        s: p.s,
        l: p.l,
        epsilon: p.epsilon,
        area,
        fh_integral: fh,
        q,
        gap,
        gap_relative: gap / main,
    })
}

/// Evaluates the gap (no flow) over the parameter grid, in parallel.
pub fn run_sweep(cfg: &SweepConfig, threads: Option<usize>) -> Result<SweepResult> {
    if cfg.parameters.is_empty() {
        return Err(Error::InvalidConfig("sweep parameter grid is empty".into()));
    }
    let points = cfg.parameters.points();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = threads {
        builder = builder.num_threads(k);
    }
    let pool = builder.build().map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let rows = pool.install(|| points.par_iter().map(|p| sweep_point(cfg, p)).collect::<Result<Vec<_>>>())?;
    let tol = cfg.tolerances.gap_zero_relative;
    let min_gap = rows.iter().map(|r| r.gap_relative).fold(f64::INFINITY, f64::min);
    let equality = rows.iter().filter(|r| r.epsilon == 0.0).map(|r| r.gap_relative.abs()).fold(0.0, f64::max);
    // Translations of round spheres are flat equality cases, and a first
    // harmonic perturbation is a translation to leading order.
    let strict = rows
        .iter()
        .filter(|r| r.epsilon != 0.0 && !(r.m == 0.0 && r.l == 1))
        .map(|r| r.gap_relative)
        .fold(f64::INFINITY, f64::min);
    let verdicts = vec![
        Verdict::new("min_gap", min_gap >= -tol, min_gap, -tol),
        Verdict::at_most("equality_at_spheres", equality, tol),
        Verdict::new("strict_off_spheres", strict > tol, strict, tol),
    ];
    let status = ExitStatus::from_verdicts(&verdicts);
    Ok(SweepResult { rows, verdicts, status })
}
