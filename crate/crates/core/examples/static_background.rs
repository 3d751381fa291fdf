//! The Schwarzschild background in area-radius form: lapse, Ricci
//! eigenvalues and the residuals of the vacuum static equations.

use imcf::ambient::AmbientParams;

fn main() -> imcf::error::Result<()> {
    for n in 3..=6 {
        let params = AmbientParams::new(n, 1.0)?;
        println!("n = {n}: horizon at s0 = {:.6}", params.s0());
        for k in [1.01, 1.5, 3.0, 10.0] {
            let s = k * params.s0();
            let (a, b) = params.ricci(s)?;
            println!(
                "  s = {s:8.4}  f = {:.6}  Ric = {a:+.3e} g {b:+.3e} dr^2  R = {:+.1e}  static = {:.1e}",
                params.lapse(s)?,
                params.scalar_curvature(s)?,
                params.static_residual(s)?,
            );
        }
    }
    Ok(())
}
