//! Tabulated radial antiderivatives: the flow variable `phi(s)` with
//! `dphi/ds = 1 / (s f(s))`, and the geodesic coordinate `r(s)` with
//! `dr/ds = 1 / f(s)`.
//!
//! Nodes are geometric in `s - s0`, so every panel sits at the same relative
//! distance from the horizon singularity of the integrand. Panel integrals
//! use 8-point Gauss-Legendre; the panel count doubles until a half-panel
//! refinement agrees to the requested tolerance and the inverse round trip
//! passes. Point evaluation integrates from the nearest table node with the
//! same rule, so forward lookups carry quadrature accuracy rather than
//! interpolation accuracy.

use std::sync::OnceLock;

use crate::ambient::AmbientParams;
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

const PANEL_POINTS: usize = 8;
const MAX_PANELS: usize = 1 << 20;

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_POINTS))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Integrand {
    /// `1 / (s f)`
    Phi,
    /// `1 / f`
    GeodesicR,
}

#[derive(Debug, Clone)]
struct RadialTable {
    params: AmbientParams,
    integrand: Integrand,
    s: Vec<f64>,
    value: Vec<f64>,
    log_ratio: f64,
}

impl RadialTable {
    #[inline]
    fn integrand(&self, s: f64) -> f64 {
        let f = self.params.lapse_unchecked(s);
        match self.integrand {
            Integrand::Phi => 1.0 / (s * f),
            Integrand::GeodesicR => 1.0 / f,
        }
    }

    fn integrate(&self, a: f64, b: f64) -> f64 {
        let (x, w) = panel_rule();
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut acc = 0.0;
        for (xi, wi) in x.iter().zip(w) {
            acc += wi * self.integrand(mid + half * xi);
        }
        acc * half
    }

    fn build(params: AmbientParams, integrand: Integrand, s_min: f64, s_max: f64, panels: usize) -> (Self, f64) {
        let s0 = params.s0();
        let log_ratio = ((s_max - s0) / (s_min - s0)).ln() / panels as f64;
        let mut s = Vec::with_capacity(panels + 1);
        for k in 0..=panels {
            s.push(s0 + (s_min - s0) * (log_ratio * k as f64).exp());
        }
        s[panels] = s_max;
        let mut table = Self { params, integrand, s, value: Vec::with_capacity(panels + 1), log_ratio };
        let mut acc = 0.0;
        let mut worst = 0.0_f64;
        table.value.push(0.0);
        for k in 0..panels {
            let (a, b) = (table.s[k], table.s[k + 1]);
            let whole = table.integrate(a, b);
            let m = 0.5 * (a + b);
            let split = table.integrate(a, m) + table.integrate(m, b);
            worst = worst.max((whole - split).abs());
            acc += split;
            table.value.push(acc);
        }
        (table, worst)
    }

    fn s_range(&self) -> (f64, f64) {
        (self.s[0], *self.s.last().unwrap())
    }

    /// Index `k` of the panel `[s_k, s_{k+1}]` that contains `s`.
    #[inline]
    fn panel_of(&self, s: f64) -> usize {
        let s0 = self.params.s0();
        let last = self.s.len() - 2;
        let guess = (((s - s0) / (self.s[0] - s0)).ln() / self.log_ratio).floor();
        let mut k = if guess.is_finite() { (guess.max(0.0) as usize).min(last) } else { 0 };
        while k > 0 && self.s[k] > s {
            k -= 1;
        }
        while k < last && self.s[k + 1] < s {
            k += 1;
        }
        k
    }

    fn forward(&self, s: f64) -> Result<f64> {
        let (lo, hi) = self.s_range();
        if !(s >= lo && s <= hi) {
            return Err(Error::Range { value: s, lo, hi });
        }
        Ok(self.forward_unchecked(s))
    }

    #[inline]
    fn forward_unchecked(&self, s: f64) -> f64 {
        let k = self.panel_of(s);
        let (a, b) = (self.s[k], self.s[k + 1]);
        if s - a <= b - s {
            self.value[k] + self.integrate(a, s)
        } else {
            self.value[k + 1] - self.integrate(s, b)
        }
    }
}

/// Monotone bijection `s <-> phi` with `phi(s_min) = 0`.
#[derive(Debug, Clone)]
pub struct PhiMap {
    table: RadialTable,
    tol: f64,
}

impl PhiMap {
    /// Cubic Hermite interpolation of the inverse, before the Newton polish.
    pub const INTERPOLATION_ORDER: usize = 3;

    /// Tabulate `phi` on `[s_min, s_max]` so that `s -> phi -> s` round trips
    /// to relative error `tol`.
    pub fn build(params: AmbientParams, s_min: f64, s_max: f64, tol: f64) -> Result<Self> {
        params.check(s_min)?;
        if !(s_max > s_min) || !s_max.is_finite() {
            return Err(Error::InvalidParams(format!("table range [{s_min}, {s_max}] is empty or unbounded")));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidParams(format!("tolerance {tol} must be positive")));
        }
        let decades = ((s_max - params.s0()) / (s_min - params.s0())).ln().max(1.0);
        let mut panels = ((16.0 * decades).ceil() as usize).max(16);
        loop {
            let (table, quad_err) = RadialTable::build(params, Integrand::Phi, s_min, s_max, panels);
            let map = Self { table, tol };
            if quad_err < 0.1 * tol && map.round_trip_error() < tol {
                return Ok(map);
            }
            panels *= 2;
            if panels > MAX_PANELS {
                return Err(Error::Degenerate(format!(
                    "phi table failed to reach tolerance {tol} on [{s_min}, {s_max}]"
                )));
            }
        }
    }

    /// Worst relative round-trip error at the panel quarter points.
    fn round_trip_error(&self) -> f64 {
        let s = &self.table.s;
        let mut worst = 0.0_f64;
        for k in 0..s.len() - 1 {
            for frac in [0.25, 0.5, 0.75] {
                let x = s[k] + frac * (s[k + 1] - s[k]);
                let back = self.s_of_phi_unchecked(self.table.forward_unchecked(x));
                worst = worst.max((back - x).abs() / x);
            }
        }
        worst
    }

    pub fn params(&self) -> &AmbientParams {
        &self.table.params
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn panel_count(&self) -> usize {
        self.table.s.len() - 1
    }

    pub fn s_range(&self) -> (f64, f64) {
        self.table.s_range()
    }

    pub fn phi_range(&self) -> (f64, f64) {
        (0.0, *self.table.value.last().unwrap())
    }

    /// Table nodes `(s_k, phi_k)`.
    pub fn nodes(&self) -> (&[f64], &[f64]) {
        (&self.table.s, &self.table.value)
    }

    /// Exact `dphi/ds = 1 / (s f(s))`.
    pub fn dphi_ds(&self, s: f64) -> Result<f64> {
        self.table.params.check(s)?;
        Ok(self.table.integrand(s))
    }

    pub fn phi_of_s(&self, s: f64) -> Result<f64> {
        self.table.forward(s)
    }

    pub fn s_of_phi(&self, phi: f64) -> Result<f64> {
        let (lo, hi) = self.phi_range();
        if !(phi >= lo && phi <= hi) {
            return Err(Error::Range { value: phi, lo, hi });
        }
        Ok(self.s_of_phi_unchecked(phi))
    }

    #[inline]
    pub(crate) fn s_of_phi_unchecked(&self, phi: f64) -> f64 {
        let t = &self.table;
        let k = match t.value.binary_search_by(|v| v.partial_cmp(&phi).unwrap()) {
            Ok(k) => return t.s[k],
            Err(0) => 0,
            Err(k) => (k - 1).min(t.s.len() - 2),
        };
        let (p0, p1) = (t.value[k], t.value[k + 1]);
        let (s0, s1) = (t.s[k], t.s[k + 1]);
        let h = p1 - p0;
        let secant = (s1 - s0) / h;
        // ds/dphi = s f; Fritsch-Carlson clamp keeps the cubic monotone.
        let clamp = |d: f64| d.min(3.0 * secant);
        let d0 = clamp(s0 * t.params.lapse_unchecked(s0));
        let d1 = clamp(s1 * t.params.lapse_unchecked(s1));
        let u = (phi - p0) / h;
        let u2 = u * u;
        let u3 = u2 * u;
        let guess = (2.0 * u3 - 3.0 * u2 + 1.0) * s0
            + (u3 - 2.0 * u2 + u) * h * d0
            + (-2.0 * u3 + 3.0 * u2) * s1
            + (u3 - u2) * h * d1;
        let guess = guess.clamp(s0, s1);
        // One Newton step on phi(s) - phi = 0.
        let residual = t.forward_unchecked(guess) - phi;
        let polished = guess - residual * guess * t.params.lapse_unchecked(guess);
        polished.clamp(s0, s1)
    }
}

/// Geodesic radial coordinate `r(s)` with `r(s_min) = 0`.
#[derive(Debug, Clone)]
pub struct GeodesicChart {
    table: RadialTable,
}

impl GeodesicChart {
    pub fn build(params: AmbientParams, s_min: f64, s_max: f64, tol: f64) -> Result<Self> {
        params.check(s_min)?;
        if !(s_max > s_min) || !s_max.is_finite() {
            return Err(Error::InvalidParams(format!("chart range [{s_min}, {s_max}] is empty or unbounded")));
        }
        let decades = ((s_max - params.s0()) / (s_min - params.s0())).ln().max(1.0);
        let mut panels = ((16.0 * decades).ceil() as usize).max(16);
        loop {
            let (table, err) = RadialTable::build(params, Integrand::GeodesicR, s_min, s_max, panels);
            if err < tol * (1.0 + table.value.last().unwrap().abs()) {
                return Ok(Self { table });
            }
            panels *= 2;
            if panels > MAX_PANELS {
                return Err(Error::Degenerate("geodesic chart failed to converge".into()));
            }
        }
    }

    pub fn r_of_s(&self, s: f64) -> Result<f64> {
        self.table.forward(s)
    }

    pub fn s_range(&self) -> (f64, f64) {
        self.table.s_range()
    }
}
