//! Inverse mean curvature flow of star-shaped hypersurfaces in the
//! Schwarzschild manifold, together with the monitors and reference
//! computations used to check the Minkowski-type inequality
//! `int f H >= (n-1) omega ((|S|/omega)^{(n-2)/(n-1)} - 2m)` along it.
//!
//! Surfaces are radial graphs over a sphere grid ([`sphere`]) in the
//! variable phi of [`phimap`]; [`flow`] evolves them, [`monitor`] records
//! Q and the gap, and [`oracles`] recomputes the geometry independently.

// `!(x > 0.0)` is used on purpose to reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod ambient;
pub mod error;
pub mod flow;
pub mod harness;
pub mod monitor;
pub mod oracles;
pub mod phimap;
pub mod quadrature;
pub mod sphere;
pub mod stencil;
pub mod surface;
