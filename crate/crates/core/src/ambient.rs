//! Closed-form Schwarzschild background.
//!
//! The metric is `ds^2 / f(s)^2 + s^2 g_{S^{n-1}}` with lapse
//! `f(s) = sqrt(1 - 2 m s^{2-n})`. In geodesic gauge `dr = ds / f` the warping
//! function is `lambda(r) = s`, so every radial quantity used downstream is a
//! closed form in the area radius `s`:
//!
//! * `lambda'   = f`
//! * `lambda''  = m (n-2) s^{1-n}`
//! * `lambda''' = m (n-2) (1-n) s^{-n} f`
//!
//! `m = 0` is accepted and gives flat space (`f = 1`, all curvature zero).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimension and mass of the background, plus the derived horizon radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct AmbientParams {
    n: usize,
    m: f64,
    s0: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    n: usize,
    m: f64,
}

impl TryFrom<RawParams> for AmbientParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        AmbientParams::new(raw.n, raw.m)
    }
}

impl From<AmbientParams> for RawParams {
    fn from(p: AmbientParams) -> Self {
        RawParams { n: p.n, m: p.m }
    }
}

/// Horizon area radius: the positive root of `1 - 2 m s^{2-n} = 0`, or 0 when `m = 0`.
pub fn horizon_radius(n: usize, m: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidParams(format!("dimension n = {n} must be at least 3")));
    }
    if !(m >= 0.0) || !m.is_finite() {
        return Err(Error::InvalidParams(format!("mass m = {m} must be finite and >= 0")));
    }
    if m == 0.0 {
        return Ok(0.0);
    }
    Ok(if n == 3 { 2.0 * m } else { (2.0 * m).powf(1.0 / (n as f64 - 2.0)) })
}

/// Radial quantities at one area radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPoint {
    pub s: f64,
    /// Lapse `f`, equal to `lambda'`.
    pub f: f64,
    pub lambda_dd: f64,
}

impl AmbientParams {
    pub fn new(n: usize, m: f64) -> Result<Self> {
        let s0 = horizon_radius(n, m)?;
        Ok(Self { n, m, s0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    /// `n - 1` as a float; the dimension of the hypersurfaces.
    pub fn dim_sigma(&self) -> f64 {
        self.n as f64 - 1.0
    }

    /// `s^k` with an integer exponent.
    #[inline]
    pub(crate) fn pow(s: f64, k: i32) -> f64 {
        s.powi(k)
    }

    #[inline]
    pub(crate) fn check(&self, s: f64) -> Result<()> {
        if s > self.s0 && s.is_finite() && s > 0.0 {
            Ok(())
        } else {
            Err(Error::Domain { s, s0: self.s0 })
        }
    }

    /// Lapse without the domain check; callers guarantee `s > s0`.
    #[inline]
    pub(crate) fn lapse_unchecked(&self, s: f64) -> f64 {
        if self.m == 0.0 {
            return 1.0;
        }
        (1.0 - 2.0 * self.m * Self::pow(s, 2 - self.n as i32)).sqrt()
    }

    #[inline]
    pub(crate) fn lambda_dd_unchecked(&self, s: f64) -> f64 {
        if self.m == 0.0 {
            return 0.0;
        }
        self.m * (self.n as f64 - 2.0) * Self::pow(s, 1 - self.n as i32)
    }

    /// `f(s) = sqrt(1 - 2 m s^{2-n})`.
    pub fn lapse(&self, s: f64) -> Result<f64> {
        self.check(s)?;
        Ok(self.lapse_unchecked(s))
    }

    /// `(lambda', lambda'')` at area radius `s`.
    pub fn radial_derivatives(&self, s: f64) -> Result<(f64, f64)> {
        self.check(s)?;
        Ok((self.lapse_unchecked(s), self.lambda_dd_unchecked(s)))
    }

    pub fn point(&self, s: f64) -> Result<RadialPoint> {
        let (f, lambda_dd) = self.radial_derivatives(s)?;
        Ok(RadialPoint { s, f, lambda_dd })
    }

    /// Coefficients `(a, b)` of `Ric = a g + b dr^2`.
    pub fn ricci(&self, s: f64) -> Result<(f64, f64)> {
        self.check(s)?;
        Ok(self.ricci_unchecked(s))
    }

    #[inline]
    pub(crate) fn ricci_unchecked(&self, s: f64) -> (f64, f64) {
        let n = self.n as f64;
        let a = self.m * (n - 2.0) * Self::pow(s, -(self.n as i32));
        (a, -n * a)
    }

    /// `lambda''' = d lambda'' / dr`, by the chain rule through `dr = ds / f`.
    pub fn lambda_ddd(&self, s: f64) -> Result<f64> {
        self.check(s)?;
        let n = self.n as f64;
        Ok(self.m * (n - 2.0) * (1.0 - n) * Self::pow(s, -(self.n as i32)) * self.lapse_unchecked(s))
    }

    /// Largest component of the static equation `(Lap f) g - Hess f + f Ric`
    /// in an orthonormal frame adapted to `dr`.
    pub fn static_residual(&self, s: f64) -> Result<f64> {
        let point = self.point(s)?;
        Ok(point.static_residual(self))
    }

    /// Scalar curvature `(n-1)((n-2)(1 - lambda'^2)/lambda^2 - 2 lambda''/lambda)`.
    pub fn scalar_curvature(&self, s: f64) -> Result<f64> {
        let point = self.point(s)?;
        Ok(point.scalar_curvature(self))
    }

    /// `(n-1) lambda' lambda'' / lambda + lambda'''`, the ambient Laplacian of `f`.
    pub fn laplacian_of_lapse(&self, s: f64) -> Result<f64> {
        let point = self.point(s)?;
        Ok(point.laplacian_of_lapse(self))
    }

    /// `<grad f, nu> = lambda'' / v` for a graph with slope factor `v`.
    pub fn normal_flux_density(&self, s: f64, v: f64) -> Result<f64> {
        self.check(s)?;
        if !(v >= 1.0) {
            return Err(Error::InvalidParams(format!("slope factor v = {v} must be >= 1")));
        }
        Ok(self.lambda_dd_unchecked(s) / v)
    }

    /// `Ric(nu, nu)` for a unit normal with `<dr, nu> = 1/v`.
    #[inline]
    pub(crate) fn ricci_normal(&self, s: f64, v: f64) -> f64 {
        let (a, b) = self.ricci_unchecked(s);
        a + b / (v * v)
    }
}

impl RadialPoint {
    fn lambda_ddd(&self, params: &AmbientParams) -> f64 {
        let n = params.n as f64;
        params.m * (n - 2.0) * (1.0 - n) * AmbientParams::pow(self.s, -(params.n as i32)) * self.f
    }

    pub fn scalar_curvature(&self, params: &AmbientParams) -> f64 {
        let n = params.n as f64;
        let lam = self.s;
        // (1 - lambda'^2) is written as 2 m s^{2-n} to avoid cancellation.
        let sectional =
            if params.m == 0.0 { 0.0 } else { 2.0 * params.m * AmbientParams::pow(lam, -(params.n as i32)) };
        (n - 1.0) * ((n - 2.0) * sectional - 2.0 * self.lambda_dd / lam)
    }

    pub fn laplacian_of_lapse(&self, params: &AmbientParams) -> f64 {
        let n = params.n as f64;
        (n - 1.0) * self.f * self.lambda_dd / self.s + self.lambda_ddd(params)
    }

    /// See [`AmbientParams::static_residual`]. The fields are public so tests can
    /// feed in deliberately corrupted values.
    pub fn static_residual(&self, params: &AmbientParams) -> f64 {
        let (a, b) = params.ricci_unchecked(self.s);
        let lap = self.laplacian_of_lapse(params);
        let lam_ddd = self.lambda_ddd(params);
        let hess_tan = self.f * self.lambda_dd / self.s;
        let hess_rad = lam_ddd;
        let radial = lap - hess_rad + self.f * (a + b);
        let tangential = lap - hess_tan + self.f * a;
        radial.abs().max(tangential.abs())
    }
}
