//! Checks the evolution equations of H and of the support function chi
//! along the flow by centred differences in time.

use std::sync::Arc;

use imcf::ambient::AmbientParams;
use imcf::flow::FlowConfig;
use imcf::oracles::{capture_evolution, evolution_residual_chi, evolution_residual_h, perturbed_sphere};
use imcf::phimap::PhiMap;
use imcf::sphere::SphereGrid;

fn main() -> imcf::error::Result<()> {
    let params = AmbientParams::new(3, 1.0)?;
    let grid = Arc::new(SphereGrid::axisym(3, 128)?);
    let map = Arc::new(PhiMap::build(params, 2.5, 10.0, 1e-13)?);
    let initial = perturbed_sphere(grid, map, 4.0, 0.1, 2)?;
    let deltas = [0.1, 0.05, 0.025, 0.0125, 1e-4];
    let snaps = capture_evolution(&initial, &FlowConfig { cfl_safety: 0.1, ..Default::default() }, 0.5, &deltas)?;
    for d in deltas {
        println!(
            "delta = {d:<7}  H residual {:.3e}  chi residual {:.3e}",
            evolution_residual_h(&snaps, d)?,
            evolution_residual_chi(&snaps, d)?
        );
    }
    Ok(())
}
