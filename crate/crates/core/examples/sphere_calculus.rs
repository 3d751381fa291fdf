//! Quadrature and differential operators on the sphere grids. Zonal
//! Legendre polynomials are eigenfunctions of the round Laplacian.

use imcf::sphere::{legendre, ScalarField, SphereGrid};

fn main() -> imcf::error::Result<()> {
    for n_theta in [16, 32, 64] {
        let grid = SphereGrid::axisym(3, n_theta)?;
        let u = ScalarField::from_fn(&grid, |t, _| legendre(3, t.cos()));
        let lap = grid.laplacian(&u)?;
        let err = lap.values().iter().zip(u.values()).map(|(l, v)| (l + 12.0 * v).abs()).fold(0.0, f64::max);
        println!(
            "N = {n_theta:3}: |Delta P3 + 12 P3| = {err:.2e}, omega - 4 pi = {:.1e}",
            grid.omega() - 4.0 * std::f64::consts::PI
        );
    }
    let grid = SphereGrid::latlong(24, 16)?;
    let u = ScalarField::from_fn(&grid, |t, p| t.sin() * p.cos());
    let lap = grid.laplacian(&u)?;
    let err = lap.values().iter().zip(u.values()).map(|(l, v)| (l + 2.0 * v).abs()).fold(0.0, f64::max);
    println!(
        "lat-long 24x16: |Delta x + 2 x| = {err:.2e}, integral of x^2 = {:.12}",
        grid.integrate(&ScalarField(u.values().iter().map(|v| v * v).collect()))?
    );
    for n in 3..=6 {
        println!("n = {n}: |S^{}| = {:.12}", n - 1, SphereGrid::axisym(n, 32)?.omega());
    }
    Ok(())
}
