//! Compares the graph-form mean curvature with a finite-difference
//! computation in the geodesic chart, and estimates convergence orders.

use std::sync::Arc;

use imcf::ambient::AmbientParams;
use imcf::oracles::{fd_mean_curvature, mean_curvature_r_form, perturbed_sphere, richardson_order};
use imcf::phimap::PhiMap;
use imcf::sphere::SphereGrid;
use imcf::surface::{area, mean_curvature_graph_form};

fn linf(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

fn main() -> imcf::error::Result<()> {
    let params = AmbientParams::new(3, 1.0)?;
    let map = Arc::new(PhiMap::build(params, 2.5, 10.0, 1e-13)?);
    let mut errors = Vec::new();
    let mut areas = Vec::new();
    for n_theta in [64, 128, 256, 512] {
        let grid = Arc::new(SphereGrid::axisym(3, n_theta)?);
        let surface = perturbed_sphere(grid, map.clone(), 4.0, 0.1, 2)?;
        let graph = mean_curvature_graph_form(&surface)?;
        let fd = fd_mean_curvature(&surface)?;
        let r_form = mean_curvature_r_form(&surface)?;
        let err = linf(fd.values(), &graph);
        println!("N = {n_theta:3}: fd vs graph {err:.3e}, r-form vs graph {:.3e}", linf(r_form.values(), &graph));
        errors.push(err);
        areas.push(area(&surface)?);
    }
    println!("order of the fd discrepancy: {:.2}", richardson_order(errors[0], errors[1], errors[2])?);
    match richardson_order(areas[0], areas[1], areas[2]) {
        Ok(p) => println!("order of the area: {p:.2}"),
        Err(e) => println!("area already at rounding level ({e})"),
    }
    Ok(())
}
