//! Integral functionals of a hypersurface and diagnostics of a flow trace.
//!
//! With `dmu = lambda^{n-1} v dvol` on the sphere:
//!
//! ```text
//! Q   = |Sigma|^{-(n-2)/(n-1)} ( int f H dmu + 2(n-1) m omega )
//! gap = int f H dmu - (n-1) omega ((|Sigma| / omega)^{(n-2)/(n-1)} - 2m)
//! ```
//!
//! `Q` is nonincreasing along the flow with floor `(n-1) omega^{1/(n-1)}`,
//! and the gap vanishes exactly on coordinate spheres.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::ambient::AmbientParams;
use crate::error::{Error, Result};
use crate::flow::FlowEvent;
use crate::surface::{geometry_fields, GeometryFields, GraphSurface};

/// `int f H dmu`.
pub fn weighted_mean_curvature_integral(surface: &GraphSurface) -> Result<f64> {
    let fields = geometry_fields(surface)?;
    Ok(fh_integral(surface, &fields))
}

fn fh_integral(surface: &GraphSurface, fields: &GeometryFields) -> f64 {
    let integrand: Vec<f64> =
        (0..fields.len()).map(|i| fields.lambda_d[i] * fields.mean_curvature[i] * fields.area_weight[i]).collect();
    surface.grid().integrate_values(&integrand)
}

fn area_of(surface: &GraphSurface, fields: &GeometryFields) -> f64 {
    surface.grid().integrate_values(&fields.area_weight)
}

/// The floor `(n-1) omega^{1/(n-1)}` of `Q`.
pub fn q_floor(surface: &GraphSurface) -> f64 {
    let n1 = surface.ambient().dim_sigma();
    n1 * surface.grid().omega().powf(1.0 / n1)
}

fn q_from(params: &AmbientParams, omega: f64, area: f64, fh: f64) -> f64 {
    let n1 = params.dim_sigma();
    area.powf(-(n1 - 1.0) / n1) * (fh + 2.0 * n1 * params.m() * omega)
}

pub fn quantity_q(surface: &GraphSurface) -> Result<f64> {
    let fields = geometry_fields(surface)?;
    let area = area_of(surface, &fields);
    Ok(q_from(surface.ambient(), surface.grid().omega(), area, fh_integral(surface, &fields)))
}

/// The two equivalent forms of the Minkowski-type gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinkowskiGap {
    /// Against `(n-1) omega ((|Sigma|/omega)^{(n-2)/(n-1)} - 2m)`.
    pub gap: f64,
    /// Against `(n-1) omega^{1/(n-1)} (|Sigma|^{(n-2)/(n-1)} - |dM|^{(n-2)/(n-1)})`
    /// with the horizon area `|dM| = s0^{n-1} omega`.
    pub gap_horizon_form: f64,
}

fn gap_from(params: &AmbientParams, omega: f64, area: f64, fh: f64) -> MinkowskiGap {
    let n1 = params.dim_sigma();
    let e = (n1 - 1.0) / n1;
    let gap = fh - n1 * omega * ((area / omega).powf(e) - 2.0 * params.m());
    let horizon = params.s0().powf(n1) * omega;
    let horizon_term = if params.m() == 0.0 { 0.0 } else { horizon.powf(e) };
    let gap_horizon_form = fh - n1 * omega.powf(1.0 / n1) * (area.powf(e) - horizon_term);
    MinkowskiGap { gap, gap_horizon_form }
}

pub fn minkowski_gap(surface: &GraphSurface) -> Result<MinkowskiGap> {
    let fields = geometry_fields(surface)?;
    let area = area_of(surface, &fields);
    Ok(gap_from(surface.ambient(), surface.grid().omega(), area, fh_integral(surface, &fields)))
}

/// `int <grad f, nu> dmu`, which equals `m (n-2) omega` for every surface
/// enclosing the horizon.
pub fn flux_integral(surface: &GraphSurface) -> Result<f64> {
    let fields = geometry_fields(surface)?;
    flux_from(surface, &fields)
}

fn flux_from(surface: &GraphSurface, fields: &GeometryFields) -> Result<f64> {
    let params = surface.ambient();
    let mut integrand = Vec::with_capacity(fields.len());
    for i in 0..fields.len() {
        integrand.push(params.normal_flux_density(fields.s[i], fields.v[i])? * fields.area_weight[i]);
    }
    Ok(surface.grid().integrate_values(&integrand))
}

/// Expected value of [`flux_integral`].
pub fn flux_constant(params: &AmbientParams, omega: f64) -> f64 {
    params.m() * (params.n() as f64 - 2.0) * omega
}

/// One snapshot of a flow. Field names are the CSV column names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub t: f64,
    pub area: f64,
    #[serde(rename = "fH_integral")]
    pub fh_integral: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub gap: f64,
    pub flux: f64,
    #[serde(rename = "H_min")]
    pub h_min: f64,
    #[serde(rename = "H_max")]
    pub h_max: f64,
    /// `min H e^{t/(n-1)}`.
    #[serde(rename = "Hexp_min")]
    pub hexp_min: f64,
    #[serde(rename = "Hexp_max")]
    pub hexp_max: f64,
    pub chi_min: f64,
    pub grad_phi_max: f64,
    /// `min lambda e^{-t/(n-1)}`.
    pub lambda_tilde_min: f64,
    pub lambda_tilde_max: f64,
    pub umbilicity_max: f64,
    pub roundness_max: f64,
    pub dt: f64,
}

/// Column order of the trace CSV.
pub const CSV_COLUMNS: [&str; 17] = [
    "t",
    "area",
    "fH_integral",
    "Q",
    "gap",
    "flux",
    "H_min",
    "H_max",
    "Hexp_min",
    "Hexp_max",
    "chi_min",
    "grad_phi_max",
    "lambda_tilde_min",
    "lambda_tilde_max",
    "umbilicity_max",
    "roundness_max",
    "dt",
];

fn min_max(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

impl FlowRecord {
    pub fn from_surface(surface: &GraphSurface, dt: f64) -> Result<Self> {
        let fields = geometry_fields(surface)?;
        let params = surface.ambient();
        let omega = surface.grid().omega();
        let t = surface.t();
        let growth = (t / params.dim_sigma()).exp();
        let area = area_of(surface, &fields);
        let fh = fh_integral(surface, &fields);
        let (h_min, h_max) = min_max(&fields.mean_curvature);
        let (s_min, s_max) = min_max(&fields.s);
        Ok(Self {
            t,
            area,
            fh_integral: fh,
            q: q_from(params, omega, area, fh),
            gap: gap_from(params, omega, area, fh).gap,
            flux: flux_from(surface, &fields)?,
            h_min,
            h_max,
            hexp_min: h_min * growth,
            hexp_max: h_max * growth,
            chi_min: min_max(&fields.chi).0,
            grad_phi_max: min_max(&fields.grad_sq).1.sqrt(),
            lambda_tilde_min: s_min / growth,
            lambda_tilde_max: s_max / growth,
            umbilicity_max: min_max(&fields.umbilicity).1,
            roundness_max: min_max(&fields.roundness).1,
            dt,
        })
    }

    /// `(max - min) / mean` of the normalized radius.
    pub fn lambda_tilde_spread(&self) -> f64 {
        let mean = 0.5 * (self.lambda_tilde_max + self.lambda_tilde_min);
        (self.lambda_tilde_max - self.lambda_tilde_min) / mean
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowOutcome {
    Completed,
    Breakdown,
    DtUnderflow,
    MaxSteps,
    HorizonViolation,
}

/// The snapshots of a flow run, its events and the final surface.
#[derive(Debug, Clone)]
pub struct FlowTrace {
    pub params: AmbientParams,
    pub records: Vec<FlowRecord>,
    pub events: Vec<FlowEvent>,
    pub outcome: FlowOutcome,
    pub steps: usize,
    pub final_surface: GraphSurface,
}

impl FlowTrace {
    pub fn completed(&self) -> bool {
        self.outcome == FlowOutcome::Completed
    }

    pub fn last(&self) -> &FlowRecord {
        self.records.last().expect("a trace holds at least the initial record")
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_records_csv(&self.records, out)
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }
}

pub fn write_records_csv<W: Write>(records: &[FlowRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r).map_err(|e| Error::InvalidConfig(format!("csv: {e}")))?;
    }
    if records.is_empty() {
        w.write_record(CSV_COLUMNS).map_err(|e| Error::InvalidConfig(format!("csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::InvalidConfig(format!("csv: {e}")))?;
    Ok(())
}

pub fn read_records_csv<R: std::io::Read>(input: R) -> Result<Vec<FlowRecord>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<std::result::Result<Vec<FlowRecord>, _>>()
        .map_err(|e| Error::InvalidConfig(format!("csv: {e}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MonotonicityOptions {
    /// Slack per comparison, relative to `|Q|`.
    pub relative_slack: f64,
    /// Extra slack `c dt^2` for the time discretization.
    pub dt_squared_coefficient: f64,
    /// Umbilicity below which a flat `Q` segment counts as the equality case.
    pub umbilic_tolerance: f64,
}

impl Default for MonotonicityOptions {
    fn default() -> Self {
        Self { relative_slack: 1e-8, dt_squared_coefficient: 0.0, umbilic_tolerance: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotonicityViolation {
    pub index: usize,
    pub t: f64,
    pub increase: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub violations: Vec<MonotonicityViolation>,
    /// Largest `Q(t_{k+1}) - Q(t_k)` over all pairs (negative when strictly decreasing).
    pub max_increase: f64,
    pub decreasing_pairs: usize,
    /// Pairs where `|dQ|` is within the slack.
    pub flat_pairs: usize,
    /// Largest umbilicity seen at the ends of flat pairs.
    pub max_umbilicity_when_flat: f64,
    /// Flat pairs whose surfaces are umbilic within tolerance.
    pub flat_pairs_umbilic: usize,
}

impl MonotonicityReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn monotonicity_verdict(records: &[FlowRecord], options: &MonotonicityOptions) -> Result<MonotonicityReport> {
    if records.len() < 2 {
        return Err(Error::InsufficientData(format!("{} records; need at least 2", records.len())));
    }
    let mut report = MonotonicityReport {
        violations: Vec::new(),
        max_increase: f64::NEG_INFINITY,
        decreasing_pairs: 0,
        flat_pairs: 0,
        max_umbilicity_when_flat: 0.0,
        flat_pairs_umbilic: 0,
    };
    for (k, pair) in records.windows(2).enumerate() {
        let (a, b) = (&pair[0], &pair[1]);
        let increase = b.q - a.q;
        let slack = options.relative_slack * a.q.abs() + options.dt_squared_coefficient * b.dt * b.dt;
        report.max_increase = report.max_increase.max(increase);
        if increase > slack {
            report.violations.push(MonotonicityViolation { index: k + 1, t: b.t, increase, slack });
        }
        if increase.abs() <= slack {
            report.flat_pairs += 1;
            let u = a.umbilicity_max.max(b.umbilicity_max);
            report.max_umbilicity_when_flat = report.max_umbilicity_when_flat.max(u);
            if u <= options.umbilic_tolerance {
                report.flat_pairs_umbilic += 1;
            }
        } else if increase < 0.0 {
            report.decreasing_pairs += 1;
        }
    }
    Ok(report)
}

/// Least-squares fit of `ln y = intercept + slope t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub samples: usize,
}

impl DecayFit {
    /// Decay rate `-slope`.
    pub fn rate(&self) -> f64 {
        -self.slope
    }
}

pub fn fit_log_linear(ts: &[f64], ys: &[f64]) -> Result<DecayFit> {
    if ts.len() != ys.len() {
        return Err(Error::ShapeMismatch { expected: ts.len(), got: ys.len() });
    }
    if ts.len() < 3 {
        return Err(Error::InsufficientData(format!("{} samples; need at least 3", ts.len())));
    }
    if let Some(y) = ys.iter().find(|y| !(**y > 0.0)) {
        return Err(Error::Degenerate(format!("log-linear fit needs positive data, got {y}")));
    }
    let n = ts.len() as f64;
    let logs: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let tm = ts.iter().sum::<f64>() / n;
    let lm = logs.iter().sum::<f64>() / n;
    let (mut stt, mut stl, mut sll) = (0.0, 0.0, 0.0);
    for (t, l) in ts.iter().zip(&logs) {
        stt += (t - tm) * (t - tm);
        stl += (t - tm) * (l - lm);
        sll += (l - lm) * (l - lm);
    }
    if stt == 0.0 {
        return Err(Error::Degenerate("all sample times coincide".into()));
    }
    let slope = stl / stt;
    let r_squared = if sll == 0.0 { 1.0 } else { stl * stl / (stt * sll) };
    Ok(DecayFit { slope, intercept: lm - slope * tm, r_squared, samples: ts.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub t_end: f64,
    /// `Q(t_end) - (n-1) omega^{1/(n-1)}`.
    pub q_excess: f64,
    /// Slope of `Q` over the fit window (least squares).
    pub q_tail_slope: f64,
    pub lambda_tilde_spread: f64,
    pub roundness: f64,
    /// Fit of `max |D phi|`; `None` when the gradient vanishes identically.
    pub gradient_decay: Option<DecayFit>,
    /// Fit of the normalized radius spread; `None` when it vanishes.
    pub spread_decay: Option<DecayFit>,
}

/// Diagnostics of the late-time behaviour over `window` (defaults to
/// `[t_end/2, t_end]`). `omega` is the area of the unit sphere.
pub fn limit_diagnostics(
    records: &[FlowRecord],
    params: &AmbientParams,
    omega: f64,
    window: Option<(f64, f64)>,
) -> Result<LimitReport> {
    let last = records.last().ok_or_else(|| Error::InsufficientData("empty trace".into()))?;
    let (lo, hi) = window.unwrap_or((0.5 * last.t, last.t));
    let tail: Vec<&FlowRecord> = records.iter().filter(|r| r.t >= lo - 1e-12 && r.t <= hi + 1e-12).collect();
    if tail.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} records in the fit window [{lo}, {hi}]; need at least 3",
            tail.len()
        )));
    }
    let n1 = params.dim_sigma();
    let floor = n1 * omega.powf(1.0 / n1);
    let ts: Vec<f64> = tail.iter().map(|r| r.t).collect();
    let qs: Vec<f64> = tail.iter().map(|r| r.q).collect();
    let tm = ts.iter().sum::<f64>() / ts.len() as f64;
    let qm = qs.iter().sum::<f64>() / qs.len() as f64;
    let num: f64 = ts.iter().zip(&qs).map(|(t, q)| (t - tm) * (q - qm)).sum();
    let den: f64 = ts.iter().map(|t| (t - tm) * (t - tm)).sum();
    let grads: Vec<f64> = tail.iter().map(|r| r.grad_phi_max).collect();
    let spreads: Vec<f64> = tail.iter().map(|r| r.lambda_tilde_spread()).collect();
    Ok(LimitReport {
        t_end: last.t,
        q_excess: last.q - floor,
        q_tail_slope: num / den,
        lambda_tilde_spread: last.lambda_tilde_spread(),
        roundness: last.roundness_max,
        gradient_decay: fit_log_linear(&ts, &grads).ok(),
        spread_decay: fit_log_linear(&ts, &spreads).ok(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phimap::PhiMap;
    use crate::quadrature::sphere_area;
    use crate::sphere::{legendre, ScalarField, SphereGrid};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn sphere(n: usize, m: f64, nt: usize, s: f64) -> GraphSurface {
        let p = AmbientParams::new(n, m).unwrap();
        let grid = Arc::new(SphereGrid::axisym(n, nt).unwrap());
        let s_lo = if m > 0.0 { p.s0() + 0.5 * (s - p.s0()).min(0.02 * p.s0()) } else { 0.1 * s };
        let map = Arc::new(PhiMap::build(p, s_lo, 4.0 * s, 1e-13).unwrap());
        GraphSurface::coordinate_sphere(grid, map, s).unwrap()
    }

    fn perturbed(n: usize, m: f64, nt: usize, s: f64, eps: f64, l: usize) -> GraphSurface {
        let sph = sphere(n, m, nt, s);
        let base = sph.phi().0[0];
        let phi = ScalarField::from_fn(sph.grid(), |t, _| base + eps * legendre(l, t.cos()));
        sph.with_phi(phi, 0.0).unwrap()
    }

    #[test]
    fn fh_integral_on_spheres() {
        let sph = sphere(3, 1.0, 64, 4.0);
        assert_relative_eq!(weighted_mean_curvature_integral(&sph).unwrap(), 16.0 * PI, max_relative = 1e-12);
        let flat = sphere(3, 0.0, 64, 1.0);
        assert_relative_eq!(weighted_mean_curvature_integral(&flat).unwrap(), 8.0 * PI, max_relative = 1e-12);
        let near = sphere(3, 1.0, 32, 2.0 + 1e-9);
        assert!(weighted_mean_curvature_integral(&near).unwrap() < 1e-6);
    }

    #[test]
    fn q_is_the_floor_on_coordinate_spheres() {
        let floor = 2.0 * (4.0 * PI).sqrt();
        for k in 0..10 {
            let s = 2.2 + 1.3 * k as f64;
            let sph = sphere(3, 1.0, 32, s);
            assert_relative_eq!(quantity_q(&sph).unwrap(), floor, max_relative = 1e-12);
            assert_relative_eq!(q_floor(&sph), floor, max_relative = 1e-14);
            assert!(minkowski_gap(&sph).unwrap().gap.abs() < 1e-10 * s);
        }
        for n in [4, 5] {
            let sph = sphere(n, 0.0, 32, 1.7);
            let n1 = n as f64 - 1.0;
            assert_relative_eq!(
                quantity_q(&sph).unwrap(),
                n1 * sphere_area(n - 1).powf(1.0 / n1),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn perturbed_sphere_has_positive_gap() {
        let surf = perturbed(3, 1.0, 128, 4.0, 0.1, 2);
        let gap = minkowski_gap(&surf).unwrap();
        assert!(gap.gap > 1e-4, "{gap:?}");
        assert_relative_eq!(gap.gap, gap.gap_horizon_form, max_relative = 1e-10);
        assert!(quantity_q(&surf).unwrap() > 2.0 * (4.0 * PI).sqrt());
    }

    #[test]
    fn flux_examples() {
        let surf = perturbed(3, 1.0, 128, 4.0, 0.1, 3);
        assert_relative_eq!(flux_integral(&surf).unwrap(), 4.0 * PI, max_relative = 1e-12);
        let flat = perturbed(3, 0.0, 64, 1.0, 0.1, 2);
        assert_eq!(flux_integral(&flat).unwrap(), 0.0);
        let sph = sphere(5, 2.0, 32, 3.0);
        assert_relative_eq!(flux_integral(&sph).unwrap(), 16.0 * PI * PI, max_relative = 1e-12);
        let p = *sph.ambient();
        assert_relative_eq!(flux_constant(&p, sph.grid().omega()), 16.0 * PI * PI, max_relative = 1e-14);
    }

    #[test]
    fn flat_gap_reduces_to_minkowski() {
        for l in [2, 3, 4] {
            let surf = perturbed(3, 0.0, 128, 1.0, 0.1, l);
            let fields = geometry_fields(&surf).unwrap();
            let int_h = surf.grid().integrate_values(
                &(0..fields.len()).map(|i| fields.mean_curvature[i] * fields.area_weight[i]).collect::<Vec<_>>(),
            );
            let area = surf.grid().integrate_values(&fields.area_weight);
            let flat = int_h - 2.0 * (4.0 * PI).sqrt() * area.sqrt();
            let gap = minkowski_gap(&surf).unwrap().gap;
            assert_relative_eq!(gap, flat, max_relative = 1e-12);
            assert!(gap > 0.0);
        }
    }

    fn record(t: f64, q: f64, umb: f64) -> FlowRecord {
        FlowRecord {
            t,
            area: 1.0,
            fh_integral: 1.0,
            q,
            gap: 0.0,
            flux: 0.0,
            h_min: 1.0,
            h_max: 1.0,
            hexp_min: 1.0,
            hexp_max: 1.0,
            chi_min: 1.0,
            grad_phi_max: (-t).exp(),
            lambda_tilde_min: 1.0,
            lambda_tilde_max: 1.0,
            umbilicity_max: umb,
            roundness_max: 0.0,
            dt: 1e-3,
        }
    }

    #[test]
    fn monotonicity_detects_reversal() {
        let recs: Vec<FlowRecord> = (0..10).map(|k| record(k as f64, 8.0 + (-(k as f64)).exp(), 0.0)).collect();
        let opts = MonotonicityOptions::default();
        let rep = monotonicity_verdict(&recs, &opts).unwrap();
        assert!(rep.pass());
        assert!(rep.decreasing_pairs >= 9 - rep.flat_pairs);
        let mut rev = recs.clone();
        rev.reverse();
        for (k, r) in rev.iter_mut().enumerate() {
            r.t = k as f64;
        }
        assert!(!monotonicity_verdict(&rev, &opts).unwrap().pass());
        assert!(monotonicity_verdict(&recs[..1], &opts).is_err());
    }

    #[test]
    fn flat_segments_report_umbilicity() {
        let recs: Vec<FlowRecord> = (0..5).map(|k| record(k as f64, 7.0, 0.0)).collect();
        let rep = monotonicity_verdict(&recs, &MonotonicityOptions::default()).unwrap();
        assert_eq!(rep.flat_pairs, 4);
        assert_eq!(rep.flat_pairs_umbilic, 4);
        assert_eq!(rep.max_increase, 0.0);
    }

    #[test]
    fn fitter_recovers_planted_rate() {
        let ts: Vec<f64> = (0..50).map(|k| 5.0 + 0.1 * k as f64).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 3.0 * (-1.37 * t).exp()).collect();
        let fit = fit_log_linear(&ts, &ys).unwrap();
        assert!((fit.rate() - 1.37).abs() < 1e-6);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(fit_log_linear(&ts[..2], &ys[..2]).is_err());
        assert!(fit_log_linear(&[0.0, 1.0, 2.0], &[1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn limit_diagnostics_window() {
        let recs: Vec<FlowRecord> = (0..=10).map(|k| record(k as f64, 2.0 * (4.0 * PI).sqrt(), 0.0)).collect();
        let p = AmbientParams::new(3, 1.0).unwrap();
        let rep = limit_diagnostics(&recs, &p, 4.0 * PI, None).unwrap();
        assert!(rep.q_excess.abs() < 1e-14);
        assert_eq!(rep.lambda_tilde_spread, 0.0);
        let fit = rep.gradient_decay.unwrap();
        assert!((fit.rate() - 1.0).abs() < 1e-9);
        assert!(rep.spread_decay.is_none());
        assert!(limit_diagnostics(&recs, &p, 4.0 * PI, Some((9.5, 10.0))).is_err());
    }

    #[test]
    fn csv_round_trip_and_header() {
        let recs: Vec<FlowRecord> = (0..3).map(|k| record(k as f64 * 0.5, 7.0, 1e-3)).collect();
        let mut buf = Vec::new();
        write_records_csv(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(text.lines().count(), 4);
        assert_eq!(read_records_csv(&buf[..]).unwrap(), recs);
    }
}
