//! Star-shaped hypersurfaces as graphs over the sphere, and their geometry.
//!
//! A graph `{(s(theta), theta)}` is stored through the flow variable
//! `phi = phi(s)`. With `v = sqrt(1 + |D phi|^2)` the induced metric is
//! `lambda^2 (sigma + D phi D phi)` and the shape operator is
//!
//! ```text
//! h_i^j = (lambda' delta_i^j - sigma~^{jk} phi_{ki}) / (v lambda),
//! sigma~^{jk} = sigma^{jk} - phi^j phi^k / v^2.
//! ```
//!
//! All tensors are handled in the orthonormal frame of the round metric, where
//! the axisymmetric case is diagonal: one polar eigenvalue and one tangential
//! eigenvalue of multiplicity `n - 2`.

use std::sync::Arc;

use crate::ambient::AmbientParams;
use crate::error::{Error, Result};
use crate::phimap::PhiMap;
use crate::sphere::{Partials, ScalarField, SphereGrid};

/// A graph over `S^{n-1}` at flow time `t`.
#[derive(Debug, Clone)]
pub struct GraphSurface {
    grid: Arc<SphereGrid>,
    phimap: Arc<PhiMap>,
    phi: ScalarField,
    t: f64,
}

impl GraphSurface {
    pub fn new(grid: Arc<SphereGrid>, phimap: Arc<PhiMap>, phi: ScalarField, t: f64) -> Result<Self> {
        if grid.n() != phimap.params().n() {
            return Err(Error::InvalidConfig(format!(
                "grid is for n = {} but the ambient space has n = {}",
                grid.n(),
                phimap.params().n()
            )));
        }
        if phi.len() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), got: phi.len() });
        }
        let (lo, hi) = phimap.phi_range();
        if let Some(&bad) = phi.0.iter().find(|p| !(**p >= lo && **p <= hi)) {
            return Err(Error::Range { value: bad, lo, hi });
        }
        Ok(Self { grid, phimap, phi, t })
    }

    /// Graph with the given nodal area radii.
    pub fn from_radii(grid: Arc<SphereGrid>, phimap: Arc<PhiMap>, radii: &[f64], t: f64) -> Result<Self> {
        let params = *phimap.params();
        let mut phi = Vec::with_capacity(radii.len());
        for (node, &s) in radii.iter().enumerate() {
            if !(s > params.s0()) {
                return Err(Error::HorizonViolation { node, s });
            }
            phi.push(phimap.phi_of_s(s)?);
        }
        Self::new(grid, phimap, ScalarField(phi), t)
    }

    /// The coordinate sphere `{s} x S^{n-1}`.
    pub fn coordinate_sphere(grid: Arc<SphereGrid>, phimap: Arc<PhiMap>, s: f64) -> Result<Self> {
        let radii = vec![s; grid.len()];
        Self::from_radii(grid, phimap, &radii, 0.0)
    }

    /// Same grid and table, new nodal values.
    pub fn with_phi(&self, phi: ScalarField, t: f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.phimap.clone(), phi, t)
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn phimap(&self) -> &Arc<PhiMap> {
        &self.phimap
    }

    pub fn ambient(&self) -> &AmbientParams {
        self.phimap.params()
    }

    pub fn phi(&self) -> &ScalarField {
        &self.phi
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Nodal area radii `s = s(phi)`.
    pub fn radii(&self) -> Vec<f64> {
        self.phi.0.iter().map(|&p| self.phimap.s_of_phi_unchecked(p)).collect()
    }
}

/// Pointwise geometry at one node.
#[derive(Debug, Clone, Copy)]
pub(crate) struct NodeGeometry {
    pub s: f64,
    pub f: f64,
    pub v: f64,
    pub grad_sq: f64,
    /// Principal curvatures; in the axisymmetric case `kappa[1]` has multiplicity `n - 2`.
    pub kappa: [f64; 2],
    pub h: f64,
    pub a_sq: f64,
}

/// Evaluates [`NodeGeometry`] at node `i` from precomputed partials.
#[inline]
pub(crate) fn node_geometry(grid: &SphereGrid, params: &AmbientParams, d: &Partials, s: f64, i: usize) -> NodeGeometry {
    let f = params.lapse_unchecked(s);
    let lam = s;
    if !grid.is_2d() {
        let g1 = d.t[i];
        let grad_sq = g1 * g1;
        let v2 = 1.0 + grad_sq;
        let v = v2.sqrt();
        let polar = d.tt[i] / v2;
        let tangential = grid.cot_at(i) * g1;
        let mult = grid.tangential_multiplicity();
        let k1 = (f - polar) / (v * lam);
        let k2 = (f - tangential) / (v * lam);
        return NodeGeometry { s, f, v, grad_sq, kappa: [k1, k2], h: k1 + mult * k2, a_sq: k1 * k1 + mult * k2 * k2 };
    }
    let (sn, cs) = (grid.sin_at(i), grid.cos_at(i));
    let g1 = d.t[i];
    let g2 = d.p[i] / sn;
    let hpp = d.tt[i];
    let hqq = (d.pp[i] + sn * cs * d.t[i]) / (sn * sn);
    let hpq = (d.tp[i] - (cs / sn) * d.p[i]) / sn;
    let grad_sq = g1 * g1 + g2 * g2;
    let v2 = 1.0 + grad_sq;
    let v = v2.sqrt();
    let (t11, t12, t22) = (1.0 - g1 * g1 / v2, -g1 * g2 / v2, 1.0 - g2 * g2 / v2);
    let s11 = t11 * hpp + t12 * hpq;
    let s12 = t11 * hpq + t12 * hqq;
    let s21 = t12 * hpp + t22 * hpq;
    let s22 = t12 * hpq + t22 * hqq;
    let scale = 1.0 / (v * lam);
    let (h11, h12, h21, h22) = ((f - s11) * scale, -s12 * scale, -s21 * scale, (f - s22) * scale);
    let tr = h11 + h22;
    let det = h11 * h22 - h12 * h21;
    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
    NodeGeometry {
        s,
        f,
        v,
        grad_sq,
        kappa: [0.5 * tr + disc, 0.5 * tr - disc],
        h: tr,
        a_sq: h11 * h11 + 2.0 * h12 * h21 + h22 * h22,
    }
}

impl NodeGeometry {
    /// `|A|^2 - H^2/(n-1)`, written as a sum of squared eigenvalue gaps.
    #[inline]
    pub fn umbilicity(&self, grid: &SphereGrid) -> f64 {
        let d = self.kappa[0] - self.kappa[1];
        if grid.is_2d() {
            0.5 * d * d
        } else {
            let mult = grid.tangential_multiplicity();
            mult * d * d / (mult + 1.0)
        }
    }

    #[inline]
    pub fn roundness(&self) -> f64 {
        let c = self.s / self.f;
        (c * self.kappa[0] - 1.0).abs().max((c * self.kappa[1] - 1.0).abs())
    }
}

/// Every pointwise quantity derived from a graph.
#[derive(Debug, Clone)]
pub struct GeometryFields {
    pub s: Vec<f64>,
    /// `lambda' = f(s)`.
    pub lambda_d: Vec<f64>,
    pub lambda_dd: Vec<f64>,
    pub v: Vec<f64>,
    /// `|D phi|^2` on the round sphere.
    pub grad_sq: Vec<f64>,
    pub mean_curvature: Vec<f64>,
    /// Support function `lambda / v`.
    pub chi: Vec<f64>,
    pub a_sq: Vec<f64>,
    /// Principal curvatures. Axisymmetric: `[kappa_theta, kappa_tangential]`,
    /// the second with multiplicity `n - 2`.
    pub kappa: Vec<[f64; 2]>,
    pub multiplicity: [f64; 2],
    /// Area element weight `lambda^{n-1} v` against `dvol_{S^{n-1}}`.
    pub area_weight: Vec<f64>,
    /// Largest eigenvalue of `M_i^j = H h_i^j`.
    pub m_max: Vec<f64>,
    /// `F = lambda H / v`, the reciprocal of the flow speed `d phi / dt`.
    pub speed_denominator: Vec<f64>,
    /// Pointwise `|A|^2 - H^2/(n-1)`.
    pub umbilicity: Vec<f64>,
    /// Pointwise `max |lambda/lambda' kappa_i - 1|`.
    pub roundness: Vec<f64>,
}

impl GeometryFields {
    pub fn is_mean_convex(&self) -> bool {
        self.mean_curvature.iter().all(|&h| h > 0.0)
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }
}

pub fn geometry_fields(surface: &GraphSurface) -> Result<GeometryFields> {
    let grid = surface.grid();
    let params = surface.ambient();
    let radii = surface.radii();
    for (node, &s) in radii.iter().enumerate() {
        if !(s > params.s0()) {
            return Err(Error::HorizonViolation { node, s });
        }
    }
    let d = grid.partials(&surface.phi().0);
    let len = grid.len();
    let n1 = params.n() as i32 - 1;
    let mut out = GeometryFields {
        s: Vec::with_capacity(len),
        lambda_d: Vec::with_capacity(len),
        lambda_dd: Vec::with_capacity(len),
        v: Vec::with_capacity(len),
        grad_sq: Vec::with_capacity(len),
        mean_curvature: Vec::with_capacity(len),
        chi: Vec::with_capacity(len),
        a_sq: Vec::with_capacity(len),
        kappa: Vec::with_capacity(len),
        multiplicity: [1.0, grid.tangential_multiplicity()],
        area_weight: Vec::with_capacity(len),
        m_max: Vec::with_capacity(len),
        speed_denominator: Vec::with_capacity(len),
        umbilicity: Vec::with_capacity(len),
        roundness: Vec::with_capacity(len),
    };
    for (i, &s) in radii.iter().enumerate() {
        let g = node_geometry(grid, params, &d, s, i);
        out.s.push(s);
        out.lambda_d.push(g.f);
        out.lambda_dd.push(params.lambda_dd_unchecked(s));
        out.v.push(g.v);
        out.grad_sq.push(g.grad_sq);
        out.mean_curvature.push(g.h);
        out.chi.push(s / g.v);
        out.a_sq.push(g.a_sq);
        out.kappa.push(g.kappa);
        out.area_weight.push(s.powi(n1) * g.v);
        let kmax = g.kappa[0].max(g.kappa[1]);
        let kmin = g.kappa[0].min(g.kappa[1]);
        out.m_max.push(if g.h >= 0.0 { g.h * kmax } else { g.h * kmin });
        out.speed_denominator.push(s * g.h / g.v);
        out.umbilicity.push(g.umbilicity(grid));
        out.roundness.push(g.roundness());
    }
    Ok(out)
}

/// Mean curvature straight from the graph formula
/// `H = ((n-1) lambda' - sigma~^{ij} phi_{ij}) / (v lambda)`, with the
/// contraction expanded as `Lap phi - phi^i phi^j phi_{ij} / v^2`.
pub fn mean_curvature_graph_form(surface: &GraphSurface) -> Result<Vec<f64>> {
    let grid = surface.grid();
    let params = surface.ambient();
    let hess = grid.covariant_hessian(surface.phi())?;
    let d = grid.partials(&surface.phi().0);
    let mult = grid.tangential_multiplicity();
    let n1 = params.dim_sigma();
    Ok(surface
        .radii()
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let g1 = d.t[i];
            let g2 = if grid.is_2d() { d.p[i] / grid.sin_at(i) } else { 0.0 };
            let v2 = 1.0 + g1 * g1 + g2 * g2;
            let lap = hess.trace_at(i, mult);
            let mixed = hess.mixed.as_ref().map_or(0.0, |m| m[i]);
            let ghg = g1 * g1 * hess.polar[i] + 2.0 * g1 * g2 * mixed + g2 * g2 * hess.tangential[i];
            let contraction = lap - ghg / v2;
            (n1 * params.lapse_unchecked(s) - contraction) / (v2.sqrt() * s)
        })
        .collect())
}

/// `|Sigma| = int lambda^{n-1} v dvol`.
pub fn area(surface: &GraphSurface) -> Result<f64> {
    let fields = geometry_fields(surface)?;
    Ok(surface.grid().integrate_values(&fields.area_weight))
}

/// Minimum of the support function `chi = lambda / v` over the nodes.
pub fn star_shape_margin(surface: &GraphSurface) -> Result<f64> {
    let fields = geometry_fields(surface)?;
    Ok(fields.chi.iter().copied().fold(f64::INFINITY, f64::min))
}

/// `max (|A|^2 - H^2/(n-1))` over the nodes.
pub fn umbilicity_deviation(fields: &GeometryFields) -> f64 {
    fields.umbilicity.iter().copied().fold(0.0, f64::max)
}
