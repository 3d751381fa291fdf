//! Coordinate spheres stay round under the flow and their area radius
//! grows like s(0) exp(t / (n - 1)).

use std::sync::Arc;

use imcf::ambient::AmbientParams;
use imcf::flow::{run, FlowConfig};
use imcf::phimap::PhiMap;
use imcf::sphere::SphereGrid;
use imcf::surface::GraphSurface;

fn main() -> imcf::error::Result<()> {
    let params = AmbientParams::new(3, 1.0)?;
    let grid = Arc::new(SphereGrid::axisym(3, 64)?);
    let map = Arc::new(PhiMap::build(params, 2.5, 10.0, 1e-13)?);
    let initial = GraphSurface::coordinate_sphere(grid, map, 4.0)?;
    let config = FlowConfig { t_end: 2.0, snapshot_interval: 0.25, ..Default::default() };
    let trace = run(&initial, &config)?;
    let floor = 2.0 * (4.0 * std::f64::consts::PI).sqrt();
    println!("{} steps, outcome {:?}", trace.steps, trace.outcome);
    println!("{:>6} {:>14} {:>12} {:>12}", "t", "Q", "Q - floor", "s error");
    for r in &trace.records {
        let s = (r.area / (4.0 * std::f64::consts::PI)).sqrt();
        let exact = 4.0 * (r.t / 2.0).exp();
        println!("{:6.2} {:14.10} {:12.2e} {:12.2e}", r.t, r.q, r.q - floor, (s - exact).abs() / exact);
    }
    Ok(())
}
