//! Second routes to the formula-derived quantities.
//!
//! * [`fd_mean_curvature`] rebuilds `H` from the definition: the embedding is
//!   written in the geodesic chart `(r, theta, psi)` of the ambient metric
//!   `dr^2 + lambda(r)^2 sigma`, tangent vectors come from differentiating
//!   `r(theta, psi)`, and the second fundamental form is
//!   `h_ab = -<nu, D_{X_a} X_b>` with closed-form Christoffel symbols.
//! * [`evolution_residual_h`] and [`evolution_residual_chi`] compare centred
//!   time differences along a computed flow against the evolution equations
//!   of `H` and of the support function `chi`.
//! * [`richardson_order`] estimates convergence orders from three resolutions.
//!
//! The flow moves points along `(v/H) d_r` at fixed `theta`, which is the
//! normal velocity `nu/H` plus the tangential field `(v/H) d_r^T`. Time
//! derivatives at fixed `theta` therefore pick up the transport term
//! `(v/H) <grad u, d_r^T> = phi' u' / (v lambda H)` on top of the parametric
//! evolution equations.

use std::sync::Arc;

use crate::ambient::AmbientParams;
use crate::error::{Error, Result};
use crate::flow::{FlowConfig, FlowState};
use crate::phimap::GeodesicChart;
use crate::sphere::{ScalarField, SphereGrid};
use crate::surface::{geometry_fields, GeometryFields, GraphSurface};

/// Coordinates `(r, theta, psi)`.
const DIM: usize = 3;

/// `gamma[k][i][j] = Gamma^k_{ij}` in the chart `(r, theta, psi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Christoffel {
    pub gamma: [[[f64; DIM]; DIM]; DIM],
}

impl Christoffel {
    /// `Gamma(a, b)^k = Gamma^k_{ij} a^i b^j`.
    pub fn contract(&self, a: &[f64; DIM], b: &[f64; DIM]) -> [f64; DIM] {
        let mut out = [0.0; DIM];
        for (k, o) in out.iter_mut().enumerate() {
            for i in 0..DIM {
                for j in 0..DIM {
                    *o += self.gamma[k][i][j] * a[i] * b[j];
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Christoffel) -> f64 {
        let mut worst = 0.0_f64;
        for k in 0..DIM {
            for i in 0..DIM {
                for j in 0..DIM {
                    worst = worst.max((self.gamma[k][i][j] - other.gamma[k][i][j]).abs());
                }
            }
        }
        worst
    }
}

/// The geodesic chart of the ambient metric, with `r(s)` tabulated by
/// quadrature of `dr = ds / f`.
#[derive(Debug, Clone)]
pub struct EmbeddingChart {
    params: AmbientParams,
    chart: GeodesicChart,
}

impl EmbeddingChart {
    pub fn build(params: AmbientParams, s_min: f64, s_max: f64, tol: f64) -> Result<Self> {
        Ok(Self { params, chart: GeodesicChart::build(params, s_min, s_max, tol)? })
    }

    /// A chart covering the radii of `surface`.
    pub fn for_surface(surface: &GraphSurface) -> Result<Self> {
        let params = *surface.ambient();
        let radii = surface.radii();
        let lo = radii.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = radii.iter().copied().fold(0.0, f64::max);
        let s_min = params.s0() + 0.5 * (lo - params.s0());
        Self::build(params, s_min, 2.0 * hi, 1e-13)
    }

    pub fn params(&self) -> &AmbientParams {
        &self.params
    }

    pub fn r_of_s(&self, s: f64) -> Result<f64> {
        self.chart.r_of_s(s)
    }

    /// `lambda(r)` by Newton iteration on the tabulated `r(s)`.
    pub fn s_of_r(&self, r: f64) -> Result<f64> {
        let (lo, hi) = self.chart.s_range();
        let mut s = 0.5 * (lo + hi);
        for _ in 0..100 {
            let step = (self.chart.r_of_s(s)? - r) * self.params.lapse(s)?;
            let next = (s - step).clamp(lo, hi);
            if (next - s).abs() <= 1e-15 * s {
                return Ok(next);
            }
            s = next;
        }
        Ok(s)
    }

    /// Diagonal metric `(1, lambda^2, lambda^2 sin^2 theta)` at area radius `s`.
    pub fn metric(&self, s: f64, theta: f64) -> Result<[f64; DIM]> {
        self.params.check(s)?;
        let l2 = s * s;
        Ok([1.0, l2, l2 * theta.sin().powi(2)])
    }

    /// Closed-form Christoffel symbols of the warped product.
    pub fn christoffel(&self, s: f64, theta: f64) -> Result<Christoffel> {
        let (lam, lam_d) = (s, self.params.lapse(s)?);
        let (sn, cs) = theta.sin_cos();
        let mut g = [[[0.0; DIM]; DIM]; DIM];
        g[0][1][1] = -lam * lam_d;
        g[0][2][2] = -lam * lam_d * sn * sn;
        g[1][0][1] = lam_d / lam;
        g[1][1][0] = lam_d / lam;
        g[1][2][2] = -sn * cs;
        g[2][0][2] = lam_d / lam;
        g[2][2][0] = lam_d / lam;
        g[2][1][2] = cs / sn;
        g[2][2][1] = cs / sn;
        Ok(Christoffel { gamma: g })
    }

    /// Christoffel symbols from centred differences of the metric in the
    /// `(r, theta)` chart, for cross-checking [`Self::christoffel`].
    pub fn christoffel_from_metric(&self, s: f64, theta: f64, h: f64) -> Result<Christoffel> {
        let r = self.r_of_s(s)?;
        let metric_at = |r: f64, th: f64| -> Result<[f64; DIM]> { self.metric(self.s_of_r(r)?, th) };
        let g0 = self.metric(s, theta)?;
        // dg[l][i] = d_l g_ii; the metric is diagonal and psi-independent.
        let mut dg = [[0.0; DIM]; DIM];
        let (rp, rm) = (metric_at(r + h, theta)?, metric_at(r - h, theta)?);
        let (tp, tm) = (self.metric(s, theta + h)?, self.metric(s, theta - h)?);
        for i in 0..DIM {
            dg[0][i] = (rp[i] - rm[i]) / (2.0 * h);
            dg[1][i] = (tp[i] - tm[i]) / (2.0 * h);
        }
        let d = |l: usize, i: usize, j: usize| if i == j { dg[l][i] } else { 0.0 };
        let mut gamma = [[[0.0; DIM]; DIM]; DIM];
        for (k, gk) in gamma.iter_mut().enumerate() {
            for i in 0..DIM {
                for j in 0..DIM {
                    gk[i][j] = 0.5 / g0[k] * (d(i, j, k) + d(j, i, k) - d(k, i, j));
                }
            }
        }
        Ok(Christoffel { gamma })
    }
}

fn dot(g: &[f64; DIM], a: &[f64; DIM], b: &[f64; DIM]) -> f64 {
    g[0] * a[0] * b[0] + g[1] * a[1] * b[1] + g[2] * a[2] * b[2]
}

fn add(a: &[f64; DIM], b: &[f64; DIM]) -> [f64; DIM] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Mean curvature from the embedding `(r(theta, psi), theta, psi)` in the
/// geodesic chart.
pub fn fd_mean_curvature(surface: &GraphSurface) -> Result<ScalarField> {
    let grid = surface.grid();
    let chart = EmbeddingChart::for_surface(surface)?;
    let radii = surface.radii();
    let r = radii.iter().map(|&s| chart.r_of_s(s)).collect::<Result<Vec<_>>>()?;
    let d = grid.partials(&r);
    let mult = grid.tangential_multiplicity();
    let mut out = Vec::with_capacity(grid.len());
    for (i, &s) in radii.iter().enumerate() {
        let (theta, _) = grid.coords(i);
        let metric = chart.metric(s, theta)?;
        let gamma = chart.christoffel(s, theta)?;
        let (r_p, r_pp, r_tp) = if grid.is_2d() { (d.p[i], d.pp[i], d.tp[i]) } else { (0.0, 0.0, 0.0) };
        let x_t = [d.t[i], 1.0, 0.0];
        let x_p = [r_p, 0.0, 1.0];
        // Unit normal: raise the covector dr - r_theta dtheta - r_psi dpsi.
        let co = [1.0, -d.t[i], -r_p];
        let raised = [co[0] / metric[0], co[1] / metric[1], co[2] / metric[2]];
        let norm = (co[0] * raised[0] + co[1] * raised[1] + co[2] * raised[2]).sqrt();
        let nu = [raised[0] / norm, raised[1] / norm, raised[2] / norm];
        let second = |xab: [f64; DIM], a: &[f64; DIM], b: &[f64; DIM]| -> f64 {
            -dot(&metric, &nu, &add(&xab, &gamma.contract(a, b)))
        };
        let h_tt = second([d.tt[i], 0.0, 0.0], &x_t, &x_t);
        let h_tp = second([r_tp, 0.0, 0.0], &x_t, &x_p);
        let h_pp = second([r_pp, 0.0, 0.0], &x_p, &x_p);
        let g_tt = dot(&metric, &x_t, &x_t);
        let g_tp = dot(&metric, &x_t, &x_p);
        let g_pp = dot(&metric, &x_p, &x_p);
        let h = if grid.is_2d() {
            let det = g_tt * g_pp - g_tp * g_tp;
            (g_pp * h_tt - 2.0 * g_tp * h_tp + g_tt * h_pp) / det
        } else {
            h_tt / g_tt + mult * h_pp / g_pp
        };
        out.push(h);
    }
    Ok(ScalarField(out))
}

/// Mean curvature from the graph formula written in `r`:
/// `H = (n-1) lambda' / (v lambda) - sigma~^{ij} (r_ij - lambda' r_i r_j / lambda) / (v lambda^2)`.
pub fn mean_curvature_r_form(surface: &GraphSurface) -> Result<ScalarField> {
    let grid = surface.grid();
    let chart = EmbeddingChart::for_surface(surface)?;
    let params = *surface.ambient();
    let radii = surface.radii();
    let r = radii.iter().map(|&s| chart.r_of_s(s)).collect::<Result<Vec<_>>>()?;
    let hess = grid.covariant_hessian(&ScalarField(r.clone()))?;
    let d = grid.partials(&r);
    let mult = grid.tangential_multiplicity();
    let n1 = params.dim_sigma();
    let mut out = Vec::with_capacity(grid.len());
    for (i, &lam) in radii.iter().enumerate() {
        let lam_d = params.lapse(lam)?;
        let r1 = d.t[i];
        let r2 = if grid.is_2d() { d.p[i] / grid.coords(i).0.sin() } else { 0.0 };
        let v2 = 1.0 + (r1 * r1 + r2 * r2) / (lam * lam);
        let v = v2.sqrt();
        let mixed = hess.mixed.as_ref().map_or(0.0, |m| m[i]);
        // b_ij = r_ij - lambda' r_i r_j / lambda in the orthonormal frame.
        let c = lam_d / lam;
        let b11 = hess.polar[i] - c * r1 * r1;
        let b12 = mixed - c * r1 * r2;
        let b22 = hess.tangential[i] - c * r2 * r2;
        let trace = b11 + mult * b22;
        let w = 1.0 / (lam * lam * v2);
        let contraction = trace - w * (r1 * r1 * b11 + 2.0 * r1 * r2 * b12 + r2 * r2 * b22);
        out.push(n1 * lam_d / (v * lam) - contraction / (v * lam * lam));
    }
    Ok(ScalarField(out))
}

/// `log2 |(v1 - v2) / (v2 - v4)|` for a diagnostic at resolutions `N, 2N, 4N`.
pub fn richardson_order(v1: f64, v2: f64, v4: f64) -> Result<f64> {
    let (d1, d2) = (v1 - v2, v2 - v4);
    let scale = v1.abs().max(v2.abs()).max(v4.abs());
    let floor = 8.0 * f64::EPSILON * scale;
    if !(d1.abs() > floor && d2.abs() > floor) {
        return Err(Error::Degenerate(format!("successive differences {d1:e}, {d2:e} are at the rounding level")));
    }
    Ok((d1 / d2).abs().log2())
}

/// Surfaces from one flow run at `t` and at `t +- delta` for several `delta`.
#[derive(Debug, Clone)]
pub struct EvolutionSnapshots {
    pub t: f64,
    pub center: GraphSurface,
    /// `(delta, surface at t - delta, surface at t + delta)`.
    pub offsets: Vec<(f64, GraphSurface, GraphSurface)>,
}

impl EvolutionSnapshots {
    fn pair(&self, delta: f64) -> Result<(&GraphSurface, &GraphSurface)> {
        self.offsets
            .iter()
            .find(|(d, _, _)| (d - delta).abs() <= 1e-12 * delta)
            .map(|(_, a, b)| (a, b))
            .ok_or_else(|| Error::InsufficientData(format!("no snapshots at t +- {delta}")))
    }
}

/// Flows `initial` once, stopping at every `t +- delta` and at `t`.
pub fn capture_evolution(
    initial: &GraphSurface,
    config: &FlowConfig,
    t: f64,
    deltas: &[f64],
) -> Result<EvolutionSnapshots> {
    if initial.grid().is_2d() {
        return Err(Error::InvalidConfig("evolution residuals need an axisymmetric grid".into()));
    }
    if deltas.is_empty() || deltas.iter().any(|&d| !(d > 0.0) || t - d < initial.t()) {
        return Err(Error::InvalidConfig(format!("offsets {deltas:?} must be positive and keep t - delta >= t0")));
    }
    let d_max = deltas.iter().copied().fold(0.0, f64::max);
    let config = FlowConfig { t_end: t + d_max - initial.t(), ..config.clone() };
    let mut times: Vec<f64> = deltas.iter().flat_map(|&d| [t - d, t + d]).chain([t]).collect();
    times.sort_by(f64::total_cmp);
    let mut state = FlowState::new(initial, &config)?;
    let mut taken = Vec::with_capacity(times.len());
    for &target in &times {
        state.advance_to(target)?;
        taken.push((target, state.surface()?));
    }
    let find = |target: f64| taken.iter().find(|(tt, _)| *tt == target).map(|(_, s)| s.clone()).expect("captured");
    Ok(EvolutionSnapshots {
        t,
        center: find(t),
        offsets: deltas.iter().map(|&d| (d, find(t - d), find(t + d))).collect(),
    })
}

/// Intrinsic calculus on an axisymmetric graph: `(Delta u, |grad u|^2, transport)`
/// where the transport term is `phi' u' / (v lambda H)`.
fn intrinsic(grid: &SphereGrid, n: usize, phi: &[f64], fields: &GeometryFields, u: &[f64]) -> Vec<[f64; 3]> {
    let len = grid.len();
    let (mut p1, mut p2) = (vec![0.0; len], vec![0.0; len]);
    grid.d_theta_both_into(phi, &mut p1, &mut p2);
    let (mut u1, mut u2) = (vec![0.0; len], vec![0.0; len]);
    grid.d_theta_both_into(u, &mut u1, &mut u2);
    let n = n as f64;
    (0..len)
        .map(|i| {
            let (s, f, v, h) = (fields.s[i], fields.lambda_d[i], fields.v[i], fields.mean_curvature[i]);
            let s_t = s * f * p1[i];
            let v_t = p1[i] * p2[i] / v;
            let w = 1.0 / (s * s * v * v);
            let lap = w * (u2[i] + u1[i] * ((n - 3.0) * s_t / s - v_t / v + (n - 2.0) * grid.cot_at(i)));
            [lap, w * u1[i] * u1[i], p1[i] * u1[i] / (v * s * h)]
        })
        .collect()
}

fn relative_linf(lhs: &[f64], rhs: &[f64]) -> f64 {
    let scale = rhs.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let worst = lhs.iter().zip(rhs).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    worst / scale
}

fn centred(snaps: &EvolutionSnapshots, delta: f64, pick: impl Fn(&GeometryFields) -> Vec<f64>) -> Result<Vec<f64>> {
    let (minus, plus) = snaps.pair(delta)?;
    let (a, b) = (pick(&geometry_fields(minus)?), pick(&geometry_fields(plus)?));
    Ok(a.iter().zip(&b).map(|(a, b)| (b - a) / (2.0 * delta)).collect())
}

/// Relative `L^inf` residual of
/// `dH/dt = Delta H / H^2 - 2 |grad H|^2 / H^3 - |A|^2 / H - Ric(nu, nu) / H`.
pub fn evolution_residual_h(snaps: &EvolutionSnapshots, delta: f64) -> Result<f64> {
    let center = &snaps.center;
    let params = *center.ambient();
    let fields = geometry_fields(center)?;
    let lhs = centred(snaps, delta, |f| f.mean_curvature.clone())?;
    let ops = intrinsic(center.grid(), params.n(), &center.phi().0, &fields, &fields.mean_curvature);
    let rhs: Vec<f64> = (0..fields.len())
        .map(|i| {
            let h = fields.mean_curvature[i];
            let [lap, grad_sq, transport] = ops[i];
            let ric = params.ricci_normal(fields.s[i], fields.v[i]);
            lap / (h * h) - 2.0 * grad_sq / (h * h * h) - fields.a_sq[i] / h - ric / h + transport
        })
        .collect();
    Ok(relative_linf(&lhs, &rhs))
}

/// Relative `L^inf` residual of
/// `dchi/dt = Delta chi / H^2 + |A|^2 chi / H^2 + m n (n-2) lambda^{-n} |d_r^T|^2 chi / H^2`,
/// with `|d_r^T|^2 = 1 - 1/v^2`.
pub fn evolution_residual_chi(snaps: &EvolutionSnapshots, delta: f64) -> Result<f64> {
    let center = &snaps.center;
    let params = *center.ambient();
    let n = params.n() as f64;
    let fields = geometry_fields(center)?;
    let lhs = centred(snaps, delta, |f| f.chi.clone())?;
    let ops = intrinsic(center.grid(), params.n(), &center.phi().0, &fields, &fields.chi);
    let rhs: Vec<f64> = (0..fields.len())
        .map(|i| {
            let (h, chi, s, v) = (fields.mean_curvature[i], fields.chi[i], fields.s[i], fields.v[i]);
            let [lap, _, transport] = ops[i];
            let tangential = 1.0 - 1.0 / (v * v);
            let ricci = params.m() * n * (n - 2.0) * s.powi(-(params.n() as i32)) * tangential;
            (lap + fields.a_sq[i] * chi + ricci * chi) / (h * h) + transport
        })
        .collect();
    Ok(relative_linf(&lhs, &rhs))
}

/// Convenience: an axisymmetric surface `phi = phi(s) + eps P_l(cos theta)`.
pub fn perturbed_sphere(
    grid: Arc<SphereGrid>,
    phimap: Arc<crate::phimap::PhiMap>,
    s: f64,
    eps: f64,
    l: usize,
) -> Result<GraphSurface> {
    let base = phimap.phi_of_s(s)?;
    let phi = ScalarField::from_fn(&grid, |t, _| base + eps * crate::sphere::legendre(l, t.cos()));
    GraphSurface::new(grid, phimap, phi, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phimap::PhiMap;
    use crate::surface::mean_curvature_graph_form;

    fn setup(n: usize, m: f64, nt: usize) -> (Arc<SphereGrid>, Arc<PhiMap>) {
        let p = AmbientParams::new(n, m).unwrap();
        let lo = if m > 0.0 { p.s0() * 1.05 } else { 0.5 };
        (Arc::new(SphereGrid::axisym(n, nt).unwrap()), Arc::new(PhiMap::build(p, lo, 12.0, 1e-13).unwrap()))
    }

    fn linf_rel(a: &[f64], b: &[f64]) -> f64 {
        relative_linf(a, b)
    }

    #[test]
    fn christoffels_closed_form_and_from_metric() {
        let p = AmbientParams::new(3, 1.0).unwrap();
        let chart = EmbeddingChart::build(p, 2.2, 20.0, 1e-13).unwrap();
        for &(s, th) in &[(3.0, 0.7), (5.5, 1.9), (12.0, 0.3)] {
            let exact = chart.christoffel(s, th).unwrap();
            let f = p.lapse(s).unwrap();
            // Gamma^r_ij = -lambda lambda' sigma_ij.
            assert_eq!(exact.gamma[0][1][1], -s * f);
            assert!((exact.gamma[0][2][2] + s * f * th.sin().powi(2)).abs() < 1e-15 * s);
            let fd = chart.christoffel_from_metric(s, th, 1e-4).unwrap();
            assert!(exact.max_abs_diff(&fd) < 1e-7 * s, "{}", exact.max_abs_diff(&fd));
            let m = chart.metric(s, th).unwrap();
            assert!(m.iter().all(|&g| g > 0.0));
        }
    }

    #[test]
    fn s_of_r_inverts_chart() {
        let p = AmbientParams::new(4, 0.5).unwrap();
        let chart = EmbeddingChart::build(p, 1.1, 9.0, 1e-13).unwrap();
        for &s in &[1.2, 2.0, 5.0, 8.9] {
            let r = chart.r_of_s(s).unwrap();
            assert!((chart.s_of_r(r).unwrap() - s).abs() < 1e-12 * s);
        }
    }

    #[test]
    fn fd_mean_curvature_on_coordinate_spheres() {
        for (n, m) in [(3, 1.0), (4, 0.5), (5, 0.0)] {
            let (grid, map) = setup(n, m, 64);
            let p = *map.params();
            let s = if m > 0.0 { p.s0() * 2.0 } else { 1.5 };
            let sph = GraphSurface::coordinate_sphere(grid, map, s).unwrap();
            let expect = (n as f64 - 1.0) * p.lapse(s).unwrap() / s;
            for &h in fd_mean_curvature(&sph).unwrap().values() {
                assert!((h - expect).abs() < 1e-10 * expect);
            }
        }
    }

    #[test]
    fn fd_and_r_form_agree_with_graph_formula() {
        let (grid, map) = setup(3, 1.0, 256);
        let surf = perturbed_sphere(grid, map, 4.0, 0.1, 2).unwrap();
        let formula = geometry_fields(&surf).unwrap().mean_curvature;
        let fd = fd_mean_curvature(&surf).unwrap();
        let rf = mean_curvature_r_form(&surf).unwrap();
        assert!(linf_rel(&fd.0, &formula) < 1e-6);
        assert!(linf_rel(&rf.0, &formula) < 1e-6);
    }

    #[test]
    fn fd_mean_curvature_on_latlong_grid() {
        let p = AmbientParams::new(3, 1.0).unwrap();
        let map = Arc::new(PhiMap::build(p, 2.5, 10.0, 1e-13).unwrap());
        let grid = Arc::new(SphereGrid::latlong(96, 32).unwrap());
        let base = map.phi_of_s(4.0).unwrap();
        let phi = ScalarField::from_fn(&grid, |t, ps| base + 0.05 * t.sin() * t.cos() * ps.cos());
        let surf = GraphSurface::new(grid, map, phi, 0.0).unwrap();
        let formula = mean_curvature_graph_form(&surf).unwrap();
        let fd = fd_mean_curvature(&surf).unwrap();
        assert!(linf_rel(&fd.0, &formula) < 1e-4, "{}", linf_rel(&fd.0, &formula));
        let rf = mean_curvature_r_form(&surf).unwrap();
        assert!(linf_rel(&rf.0, &formula) < 1e-4);
    }

    #[test]
    fn richardson_on_planted_data() {
        let planted = |p: i32| {
            let v = |h: f64| 1.0 + 0.3 * h.powi(p);
            richardson_order(v(0.1), v(0.05), v(0.025)).unwrap()
        };
        assert!((planted(2) - 2.0).abs() < 1e-9);
        assert!((planted(4) - 4.0).abs() < 1e-6);
        assert!(richardson_order(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn area_converges_at_stencil_order() {
        let area = |nt: usize| {
            let (grid, map) = setup(3, 1.0, nt);
            crate::surface::area(&perturbed_sphere(grid, map, 4.0, 0.1, 3).unwrap()).unwrap()
        };
        let order = richardson_order(area(16), area(32), area(64)).unwrap();
        assert!(order >= 3.5, "order {order}");
    }

    #[test]
    fn residuals_on_coordinate_sphere() {
        let (grid, map) = setup(3, 1.0, 32);
        let sph = GraphSurface::coordinate_sphere(grid, map, 4.0).unwrap();
        let snaps = capture_evolution(&sph, &FlowConfig::default(), 0.2, &[1e-4]).unwrap();
        assert!(evolution_residual_h(&snaps, 1e-4).unwrap() < 1e-8);
        assert!(evolution_residual_chi(&snaps, 1e-4).unwrap() < 1e-8);
        assert!(matches!(evolution_residual_h(&snaps, 2e-4), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn residuals_do_not_depend_on_the_phi_offset() {
        let p = AmbientParams::new(3, 1.0).unwrap();
        let grid = Arc::new(SphereGrid::axisym(3, 48).unwrap());
        let res = |s_lo: f64| {
            let map = Arc::new(PhiMap::build(p, s_lo, 12.0, 1e-13).unwrap());
            let surf = perturbed_sphere(grid.clone(), map, 4.0, 0.05, 2).unwrap();
            let snaps = capture_evolution(&surf, &FlowConfig::default(), 0.05, &[0.01]).unwrap();
            (evolution_residual_h(&snaps, 0.01).unwrap(), evolution_residual_chi(&snaps, 0.01).unwrap())
        };
        let (a, b) = (res(2.1), res(2.9));
        assert!((a.0 - b.0).abs() < 1e-6 * a.0.max(1e-12), "{a:?} {b:?}");
        assert!((a.1 - b.1).abs() < 1e-6 * a.1.max(1e-12), "{a:?} {b:?}");
    }

    #[test]
    fn capture_rejects_bad_offsets() {
        let (grid, map) = setup(3, 1.0, 32);
        let sph = GraphSurface::coordinate_sphere(grid, map, 4.0).unwrap();
        assert!(capture_evolution(&sph, &FlowConfig::default(), 0.1, &[0.2]).is_err());
        assert!(capture_evolution(&sph, &FlowConfig::default(), 0.1, &[]).is_err());
    }
}
