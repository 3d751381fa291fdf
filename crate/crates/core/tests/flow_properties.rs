use std::sync::Arc;

use imcf::ambient::AmbientParams;
use imcf::flow::{run, snapshot_times, FlowConfig};
use imcf::monitor::{monotonicity_verdict, quantity_q, read_records_csv, MonotonicityOptions};
use imcf::oracles::perturbed_sphere;
use imcf::phimap::PhiMap;
use imcf::sphere::{legendre, ScalarField, SphereGrid};
use imcf::surface::{geometry_fields, GraphSurface};

fn setup(n: usize, m: f64, n_theta: usize) -> (AmbientParams, Arc<SphereGrid>, Arc<PhiMap>) {
    let params = AmbientParams::new(n, m).unwrap();
    let lo = if m > 0.0 { params.s0() * 1.01 } else { 0.1 };
    let map = Arc::new(PhiMap::build(params, lo, 20.0 * params.s0().max(1.0), 1e-13).unwrap());
    (params, Arc::new(SphereGrid::axisym(n, n_theta).unwrap()), map)
}

#[test]
fn q_decreases_in_higher_dimensions() {
    for (n, m) in [(4, 0.5), (5, 1.0), (6, 2.0)] {
        let (params, grid, map) = setup(n, m, 48);
        let base = 2.0 * params.s0();
        let initial = perturbed_sphere(grid, map, base, 0.08, 2).unwrap();
        let trace = run(&initial, &FlowConfig { t_end: 1.0, ..Default::default() }).unwrap();
        assert!(trace.completed(), "n={n}: {:?}", trace.outcome);
        let rep = monotonicity_verdict(&trace.records, &MonotonicityOptions::default()).unwrap();
        assert!(rep.pass(), "n={n}: {:?}", rep.violations);
        assert!(rep.decreasing_pairs > 0);
        let floor = (n as f64 - 1.0) * initial.grid().omega().powf(1.0 / (n as f64 - 1.0));
        assert!(trace.records.iter().all(|r| r.q >= floor * (1.0 - 1e-10)));
    }
}

#[test]
fn one_row_per_snapshot_and_csv_round_trip() {
    let (_, grid, map) = setup(3, 1.0, 32);
    let initial = perturbed_sphere(grid, map, 4.0, 0.1, 3).unwrap();
    let config = FlowConfig { t_end: 0.55, snapshot_interval: 0.1, ..Default::default() };
    let trace = run(&initial, &config).unwrap();
    let times = snapshot_times(0.0, 0.55, 0.1);
    assert_eq!(trace.records.len(), times.len());
    for (r, t) in trace.records.iter().zip(&times) {
        assert_eq!(r.t, *t);
    }
    let csv = trace.to_csv_string().unwrap();
    assert_eq!(csv.lines().count(), times.len() + 1);
    let back = read_records_csv(csv.as_bytes()).unwrap();
    assert_eq!(back, trace.records);
}

#[test]
fn latlong_grid_matches_axisymmetric_grid_on_zonal_data() {
    let params = AmbientParams::new(3, 1.0).unwrap();
    let map = Arc::new(PhiMap::build(params, 2.5, 10.0, 1e-13).unwrap());
    let axi = perturbed_sphere(Arc::new(SphereGrid::axisym(3, 64).unwrap()), map.clone(), 4.0, 0.1, 2).unwrap();
    let ll = perturbed_sphere(Arc::new(SphereGrid::latlong(64, 8).unwrap()), map, 4.0, 0.1, 2).unwrap();
    let (qa, ql) = (quantity_q(&axi).unwrap(), quantity_q(&ll).unwrap());
    assert!((qa - ql).abs() < 1e-10 * qa, "{qa} vs {ql}");
    let fa = geometry_fields(&axi).unwrap();
    let fl = geometry_fields(&ll).unwrap();
    for (k, h) in fa.mean_curvature.iter().enumerate() {
        for j in 0..8 {
            assert!((fl.mean_curvature[k * 8 + j] - h).abs() < 1e-9);
        }
    }
}

#[test]
fn non_zonal_flow_on_latlong_grid() {
    let params = AmbientParams::new(3, 1.0).unwrap();
    let map = Arc::new(PhiMap::build(params, 2.5, 20.0, 1e-13).unwrap());
    let grid = Arc::new(SphereGrid::latlong(24, 16).unwrap());
    let base = map.phi_of_s(4.0).unwrap();
    // A sectoral harmonic, so nothing is axisymmetric about the pole.
    let phi = ScalarField::from_fn(&grid, |t, p| base + 0.05 * t.sin().powi(2) * (2.0 * p).cos());
    let initial = GraphSurface::new(grid, map, phi, 0.0).unwrap();
    let trace = run(&initial, &FlowConfig { t_end: 0.5, ..Default::default() }).unwrap();
    assert!(trace.completed());
    let rep = monotonicity_verdict(&trace.records, &MonotonicityOptions::default()).unwrap();
    assert!(rep.pass(), "{:?}", rep.violations);
    assert!(trace.last().grad_phi_max < trace.records[0].grad_phi_max);
}

#[test]
fn s_space_perturbations_flow_like_phi_space_ones() {
    let (_, grid, map) = setup(3, 1.0, 48);
    let radii: Vec<f64> = grid.thetas().iter().map(|t| 4.0 * (1.0 + 0.05 * legendre(2, t.cos()))).collect();
    let initial = GraphSurface::from_radii(grid, map, &radii, 0.0).unwrap();
    let trace = run(&initial, &FlowConfig { t_end: 1.0, ..Default::default() }).unwrap();
    let rep = monotonicity_verdict(&trace.records, &MonotonicityOptions::default()).unwrap();
    assert!(rep.pass());
    assert!(trace.last().gap < trace.records[0].gap);
}
