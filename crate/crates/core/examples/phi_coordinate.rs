//! The flow variable phi with d(phi) = ds / (s f). Near the horizon phi
//! diverges logarithmically; far away it approaches log s.

use imcf::ambient::AmbientParams;
use imcf::phimap::PhiMap;

fn main() -> imcf::error::Result<()> {
    let params = AmbientParams::new(3, 1.0)?;
    let map = PhiMap::build(params, 2.0 + 1e-6, 1e4, 1e-13)?;
    println!("table: {} panels, phi in {:?}", map.panel_count(), map.phi_range());
    for s in [2.001, 2.1, 3.0, 4.0, 10.0, 100.0, 1000.0] {
        let phi = map.phi_of_s(s)?;
        let back = map.s_of_phi(phi)?;
        println!(
            "s = {s:8.3}  phi = {phi:12.8}  phi - log s = {:+.6}  round trip {:.1e}",
            phi - s.ln(),
            (back - s).abs() / s
        );
    }
    Ok(())
}
