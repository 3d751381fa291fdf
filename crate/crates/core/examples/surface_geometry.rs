//! Curvature of a radial graph over the sphere: principal curvatures,
//! mean curvature, umbilicity, and the Minkowski functional Q.

use std::sync::Arc;

use imcf::ambient::AmbientParams;
use imcf::monitor::{minkowski_gap, q_floor, quantity_q};
use imcf::oracles::perturbed_sphere;
use imcf::phimap::PhiMap;
use imcf::sphere::SphereGrid;
use imcf::surface::{geometry_fields, star_shape_margin, umbilicity_deviation, GraphSurface};

fn main() -> imcf::error::Result<()> {
    let params = AmbientParams::new(3, 1.0)?;
    let grid = Arc::new(SphereGrid::axisym(3, 64)?);
    let map = Arc::new(PhiMap::build(params, 2.5, 10.0, 1e-13)?);

    let round = GraphSurface::coordinate_sphere(grid.clone(), map.clone(), 4.0)?;
    let fields = geometry_fields(&round)?;
    println!(
        "coordinate sphere s = 4: H = {:.12} (2 f / s = {:.12})",
        fields.mean_curvature[0],
        2.0 * params.lapse(4.0)? / 4.0
    );
    println!("  Q = {:.12}, floor = {:.12}", quantity_q(&round)?, q_floor(&round));

    for eps in [0.05, 0.1, 0.2] {
        let surface = perturbed_sphere(grid.clone(), map.clone(), 4.0, eps, 2)?;
        let fields = geometry_fields(&surface)?;
        let gap = minkowski_gap(&surface)?;
        println!(
            "eps = {eps}: H in [{:.5}, {:.5}], umbilicity {:.3e}, star margin {:.4}, Q = {:.9}, gap = {:.6e}",
            fields.mean_curvature.iter().copied().fold(f64::INFINITY, f64::min),
            fields.mean_curvature.iter().copied().fold(0.0, f64::max),
            umbilicity_deviation(&fields),
            star_shape_margin(&surface)?,
            quantity_q(&surface)?,
            gap.gap,
        );
    }
    Ok(())
}
