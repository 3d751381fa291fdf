//! Discrete calculus on the unit sphere `S^{n-1}`.
//!
//! Two grids are supported:
//!
//! * `Axisym1d`: fields depending on the polar angle only, any `n >= 3`.
//!   Nodes are the Gauss-Gegenbauer points of the measure `sin^{n-2} theta`
//!   mapped to `theta = acos(x)`; for `n = 3` these are Gauss-Legendre points.
//! * `LatLong2d`: the same polar nodes times a uniform periodic azimuth, `n = 3` only.
//!
//! No node sits on a pole. Polar stencils that run past a pole read ghost
//! values across it: the point `(-theta, psi)` is the point
//! `(theta, psi + pi)`, so ghosts come from the antipodal column (the same
//! column in the axisymmetric case, which is even reflection). This extension
//! is smooth, so the stencils keep their order near the poles.
//!
//! Derivatives are evaluated in difference form, `sum_j w_j (u_j - u_i)`,
//! which annihilates constants exactly.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{compensated_sum, gauss_gegenbauer, sphere_area};
use crate::stencil::fornberg_weights;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridMode {
    #[serde(rename = "axisym_1d", alias = "AXISYM_1D")]
    Axisym1d,
    #[serde(rename = "latlong_2d", alias = "LATLONG_2D")]
    LatLong2d,
}

#[derive(Debug, Clone, Copy)]
struct Tap {
    theta: usize,
    /// Read from the antipodal column (stencil crossed a pole).
    flip: bool,
    w: f64,
}

#[derive(Debug, Clone)]
struct PolarStencil {
    d1: Vec<Tap>,
    d2: Vec<Tap>,
}

/// Nodal values on a [`SphereGrid`], laid out theta-major: `index = k * n_psi + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField(pub Vec<f64>);

impl ScalarField {
    pub fn constant(grid: &SphereGrid, value: f64) -> Self {
        Self(vec![value; grid.len()])
    }

    /// Samples `g(theta, psi)` at every node.
    pub fn from_fn(grid: &SphereGrid, g: impl Fn(f64, f64) -> f64) -> Self {
        Self(
            (0..grid.len())
                .map(|i| {
                    let (t, p) = grid.coords(i);
                    g(t, p)
                })
                .collect(),
        )
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Covariant Hessian of a scalar field in the orthonormal frame
/// `(e_theta, e_psi / sin theta)` of the round metric.
///
/// In the axisymmetric mode `tangential` is the eigenvalue `cot theta phi'`
/// shared by all `n - 2` directions orthogonal to `e_theta`, and `mixed` is `None`.
#[derive(Debug, Clone)]
pub struct CovariantHessian {
    pub polar: Vec<f64>,
    pub tangential: Vec<f64>,
    pub mixed: Option<Vec<f64>>,
}

impl CovariantHessian {
    /// `sigma^{ij} phi_{ij}` at node `i`.
    pub fn trace_at(&self, i: usize, tangential_mult: f64) -> f64 {
        self.polar[i] + tangential_mult * self.tangential[i]
    }
}

/// Partial derivatives in `(theta, psi)` coordinates. The azimuthal vectors
/// are empty on axisymmetric grids.
#[derive(Debug, Clone)]
pub(crate) struct Partials {
    pub t: Vec<f64>,
    pub tt: Vec<f64>,
    pub p: Vec<f64>,
    pub pp: Vec<f64>,
    pub tp: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SphereGrid {
    mode: GridMode,
    n: usize,
    n_theta: usize,
    n_psi: usize,
    order: usize,
    theta: Vec<f64>,
    sin_theta: Vec<f64>,
    cos_theta: Vec<f64>,
    cot_theta: Vec<f64>,
    psi: Vec<f64>,
    dpsi: f64,
    weights: Vec<f64>,
    omega: f64,
    polar: Vec<PolarStencil>,
    psi_d1: Vec<(usize, f64)>,
    psi_d2: Vec<(usize, f64)>,
    spacing: Vec<f64>,
}

impl SphereGrid {
    pub const DEFAULT_ORDER: usize = 4;

    /// Builds a grid. `n_psi` is required (and must be even) for `LatLong2d`.
    pub fn build(mode: GridMode, n: usize, n_theta: usize, n_psi: Option<usize>, order: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidConfig(format!("ambient dimension n = {n} must be >= 3")));
        }
        if n_theta < 16 {
            return Err(Error::InvalidConfig(format!("need at least 16 polar nodes, got {n_theta}")));
        }
        if !matches!(order, 2 | 4 | 6) {
            return Err(Error::InvalidConfig(format!("stencil order {order} not in {{2, 4, 6}}")));
        }
        let n_psi = match mode {
            GridMode::Axisym1d => 1,
            GridMode::LatLong2d => {
                if n != 3 {
                    return Err(Error::InvalidConfig(format!("latitude-longitude grids need n = 3, got n = {n}")));
                }
                let np = n_psi.ok_or_else(|| Error::InvalidConfig("latitude-longitude grid needs n_psi".into()))?;
                if np < 8 || np % 2 != 0 {
                    return Err(Error::InvalidConfig(format!("n_psi = {np} must be even and >= 8")));
                }
                np
            }
        };

        let (x, w) = gauss_gegenbauer(n_theta, n - 2);
        // Ascending theta is descending x.
        let theta: Vec<f64> = x.iter().rev().map(|x| x.acos()).collect();
        let gw: Vec<f64> = w.into_iter().rev().collect();
        let sin_theta: Vec<f64> = theta.iter().map(|t| t.sin()).collect();
        let cos_theta: Vec<f64> = theta.iter().map(|t| t.cos()).collect();
        let cot_theta = cos_theta.iter().zip(&sin_theta).map(|(c, s)| c / s).collect();

        let dpsi = 2.0 * PI / n_psi as f64;
        let psi: Vec<f64> = (0..n_psi).map(|j| j as f64 * dpsi).collect();

        let mut weights = Vec::with_capacity(n_theta * n_psi);
        let ring = match mode {
            GridMode::Axisym1d => sphere_area(n - 2),
            GridMode::LatLong2d => dpsi,
        };
        for wk in &gw {
            for _ in 0..n_psi {
                weights.push(wk * ring);
            }
        }
        let omega = compensated_sum(weights.iter().copied());

        let half = order / 2;
        let ghost = |j: isize| -> (f64, usize, bool) {
            let nt = n_theta as isize;
            if j < 0 {
                let src = (-j - 1) as usize;
                (-theta[src], src, true)
            } else if j >= nt {
                let src = (2 * nt - 1 - j) as usize;
                (2.0 * PI - theta[src], src, true)
            } else {
                (theta[j as usize], j as usize, false)
            }
        };
        let mut polar = Vec::with_capacity(n_theta);
        let mut spacing = Vec::with_capacity(n_theta);
        for i in 0..n_theta {
            let idx: Vec<isize> = (i as isize - half as isize..=i as isize + half as isize).collect();
            let nodes: Vec<(f64, usize, bool)> = idx.iter().map(|&j| ghost(j)).collect();
            let xs: Vec<f64> = nodes.iter().map(|n| n.0).collect();
            let c = fornberg_weights(theta[i], &xs, 2);
            let taps = |row: &Vec<f64>| -> Vec<Tap> {
                nodes
                    .iter()
                    .zip(row)
                    .enumerate()
                    .filter(|(k, _)| *k != half)
                    .map(|(_, (node, &w))| Tap { theta: node.1, flip: node.2, w })
                    .collect()
            };
            polar.push(PolarStencil { d1: taps(&c[1]), d2: taps(&c[2]) });
            let below = theta[i] - ghost(i as isize - 1).0;
            let above = ghost(i as isize + 1).0 - theta[i];
            spacing.push(below.min(above));
        }

        let (psi_d1, psi_d2) = if mode == GridMode::LatLong2d {
            let offsets: Vec<f64> = (0..=order).map(|k| (k as f64 - half as f64) * dpsi).collect();
            let c = fornberg_weights(0.0, &offsets, 2);
            let wrap = |k: usize| (k + n_psi - half) % n_psi;
            let mk = |row: &Vec<f64>| -> Vec<(usize, f64)> {
                (0..=order).filter(|&k| k != half).map(|k| (wrap(k), row[k])).collect()
            };
            (mk(&c[1]), mk(&c[2]))
        } else {
            (Vec::new(), Vec::new())
        };

        Ok(Self {
            mode,
            n,
            n_theta,
            n_psi,
            order,
            theta,
            sin_theta,
            cos_theta,
            cot_theta,
            psi,
            dpsi,
            weights,
            omega,
            polar,
            psi_d1,
            psi_d2,
            spacing,
        })
    }

    /// Axisymmetric grid with the default stencil order.
    pub fn axisym(n: usize, n_theta: usize) -> Result<Self> {
        Self::build(GridMode::Axisym1d, n, n_theta, None, Self::DEFAULT_ORDER)
    }

    /// Latitude-longitude grid on `S^2` with the default stencil order.
    pub fn latlong(n_theta: usize, n_psi: usize) -> Result<Self> {
        Self::build(GridMode::LatLong2d, 3, n_theta, Some(n_psi), Self::DEFAULT_ORDER)
    }

    pub fn mode(&self) -> GridMode {
        self.mode
    }

    /// Ambient dimension (the grid discretizes `S^{n-1}`).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_psi(&self) -> usize {
        self.n_psi
    }

    pub fn stencil_order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_psi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_2d(&self) -> bool {
        self.mode == GridMode::LatLong2d
    }

    /// Number of coordinate directions the grid resolves (1 or 2).
    pub fn spatial_dim(&self) -> usize {
        if self.is_2d() {
            2
        } else {
            1
        }
    }

    /// Multiplicity of the tangential Hessian eigenvalue: `n - 2` when
    /// axisymmetric, 1 for the explicit azimuth.
    pub fn tangential_multiplicity(&self) -> f64 {
        if self.is_2d() {
            1.0
        } else {
            self.n as f64 - 2.0
        }
    }

    pub fn thetas(&self) -> &[f64] {
        &self.theta
    }

    pub fn psis(&self) -> &[f64] {
        &self.psi
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Sum of the quadrature weights, `omega_{n-1}` to rounding.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    #[inline]
    pub fn theta_index(&self, i: usize) -> usize {
        i / self.n_psi
    }

    pub fn coords(&self, i: usize) -> (f64, f64) {
        (self.theta[i / self.n_psi], self.psi[i % self.n_psi])
    }

    #[inline]
    pub(crate) fn sin_at(&self, i: usize) -> f64 {
        self.sin_theta[i / self.n_psi]
    }

    #[inline]
    pub(crate) fn cot_at(&self, i: usize) -> f64 {
        self.cot_theta[i / self.n_psi]
    }

    #[inline]
    pub(crate) fn cos_at(&self, i: usize) -> f64 {
        self.cos_theta[i / self.n_psi]
    }

    /// Unit vector of node `i` in `R^3` (`R^n` axis `e_n` for the polar axis
    /// of axisymmetric grids, returned as its `(x, y, z)` part).
    pub fn cartesian(&self, i: usize) -> [f64; 3] {
        let (t, p) = self.coords(i);
        [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()]
    }

    /// Smallest local grid spacing (arc length) at node `i`.
    pub fn local_spacing(&self, i: usize) -> f64 {
        let dt = self.spacing[i / self.n_psi];
        if self.is_2d() {
            dt.min(self.sin_at(i) * self.dpsi)
        } else {
            dt
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::ShapeMismatch { expected: self.len(), got: len });
        }
        Ok(())
    }

    #[inline]
    fn polar_apply(&self, taps: &[Tap], u: &[f64], k: usize, j: usize) -> f64 {
        let np = self.n_psi;
        let center = u[k * np + j];
        let flipped = (j + np / 2) % np;
        let mut acc = 0.0;
        for tap in taps {
            let col = if tap.flip { flipped } else { j };
            acc += tap.w * (u[tap.theta * np + col] - center);
        }
        acc
    }

    #[inline]
    fn psi_apply(&self, taps: &[(usize, f64)], u: &[f64], k: usize, j: usize) -> f64 {
        let np = self.n_psi;
        let center = u[k * np + j];
        let mut acc = 0.0;
        for &(off, w) in taps {
            acc += w * (u[k * np + (j + off) % np] - center);
        }
        acc
    }

    /// First polar derivative of raw nodal values.
    pub(crate) fn d_theta(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for k in 0..self.n_theta {
            for j in 0..self.n_psi {
                out[k * self.n_psi + j] = self.polar_apply(&self.polar[k].d1, u, k, j);
            }
        }
        out
    }

    /// First and second polar derivatives, written into the given buffers.
    pub(crate) fn d_theta_both_into(&self, u: &[f64], d1: &mut [f64], d2: &mut [f64]) {
        for k in 0..self.n_theta {
            let st = &self.polar[k];
            for j in 0..self.n_psi {
                let i = k * self.n_psi + j;
                d1[i] = self.polar_apply(&st.d1, u, k, j);
                d2[i] = self.polar_apply(&st.d2, u, k, j);
            }
        }
    }

    pub(crate) fn partials(&self, u: &[f64]) -> Partials {
        let len = self.len();
        let mut t = vec![0.0; len];
        let mut tt = vec![0.0; len];
        self.d_theta_both_into(u, &mut t, &mut tt);
        if !self.is_2d() {
            return Partials { t, tt, p: Vec::new(), pp: Vec::new(), tp: Vec::new() };
        }
        let mut p = vec![0.0; len];
        let mut pp = vec![0.0; len];
        for k in 0..self.n_theta {
            for j in 0..self.n_psi {
                let i = k * self.n_psi + j;
                p[i] = self.psi_apply(&self.psi_d1, u, k, j);
                pp[i] = self.psi_apply(&self.psi_d2, u, k, j);
            }
        }
        let tp = self.d_theta(&p);
        Partials { t, tt, p, pp, tp }
    }

    pub fn covariant_hessian(&self, field: &ScalarField) -> Result<CovariantHessian> {
        self.check_len(field.len())?;
        let d = self.partials(&field.0);
        Ok(self.hessian_from_partials(&d))
    }

    pub(crate) fn hessian_from_partials(&self, d: &Partials) -> CovariantHessian {
        let len = self.len();
        if !self.is_2d() {
            let tangential = (0..len).map(|i| self.cot_at(i) * d.t[i]).collect();
            return CovariantHessian { polar: d.tt.clone(), tangential, mixed: None };
        }
        let mut tangential = Vec::with_capacity(len);
        let mut mixed = Vec::with_capacity(len);
        for i in 0..len {
            let (s, c) = (self.sin_at(i), self.cos_at(i));
            // phi_{;psi psi} = phi_pp + sin cos phi_t ; phi_{;theta psi} = phi_tp - cot phi_p
            tangential.push((d.pp[i] + s * c * d.t[i]) / (s * s));
            mixed.push((d.tp[i] - (c / s) * d.p[i]) / s);
        }
        CovariantHessian { polar: d.tt.clone(), tangential, mixed: Some(mixed) }
    }

    /// `|D phi|^2` with respect to the round metric.
    pub fn gradient_sq(&self, field: &ScalarField) -> Result<ScalarField> {
        self.check_len(field.len())?;
        let d = self.partials(&field.0);
        Ok(ScalarField(
            (0..self.len())
                .map(|i| {
                    let gp = if self.is_2d() { d.p[i] / self.sin_at(i) } else { 0.0 };
                    d.t[i] * d.t[i] + gp * gp
                })
                .collect(),
        ))
    }

    /// Round-sphere Laplacian `sigma^{ij} phi_{ij}`.
    pub fn laplacian(&self, field: &ScalarField) -> Result<ScalarField> {
        let h = self.covariant_hessian(field)?;
        let mult = self.tangential_multiplicity();
        Ok(ScalarField((0..self.len()).map(|i| h.trace_at(i, mult)).collect()))
    }

    /// `int_{S^{n-1}} field dvol`, with a fixed-order compensated sum.
    pub fn integrate(&self, field: &ScalarField) -> Result<f64> {
        self.check_len(field.len())?;
        Ok(self.integrate_values(&field.0))
    }

    pub(crate) fn integrate_values(&self, u: &[f64]) -> f64 {
        compensated_sum(self.weights.iter().zip(u).map(|(w, u)| w * u))
    }
}

/// Legendre polynomial `P_l(x)`.
pub fn legendre(l: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if l == 0 {
        return 1.0;
    }
    for k in 2..=l {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    p1
}
