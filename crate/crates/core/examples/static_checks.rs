//! The randomized static-identity and flux-constancy checks behind the
//! `check-static` and `check-flux` commands.

use imcf::harness::config::GridConfig;
use imcf::harness::{check_flux, check_static, FluxCheck, StaticCheck};
use imcf::sphere::GridMode;

fn main() -> imcf::error::Result<()> {
    let statics = check_static(&StaticCheck {
        cases: StaticCheck::default_cases(),
        samples: 1000,
        seed: 1,
        tolerance: 1e-12,
        corrupt_lambda_dd: false,
    })?;
    for row in &statics.rows {
        println!(
            "n={} m={:<3}  R {:.2e}  static {:.2e}",
            row.n, row.m, row.max_scalar_curvature, row.max_static_residual
        );
    }
    for m in [1.0, 0.0] {
        let flux = check_flux(&FluxCheck {
            n: 3,
            m,
            grid: GridConfig { mode: GridMode::Axisym1d, n_theta: 256, n_psi: None, stencil_order: 4 },
            count: 50,
            seed: 1,
            tolerance: 1e-8,
            corrupt: false,
        })?;
        println!("m = {m}: expected flux {:.12}, worst deviation {:.2e}", flux.expected, flux.worst_deviation);
    }
    Ok(())
}
