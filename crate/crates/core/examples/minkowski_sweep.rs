//! Evaluates the Minkowski gap over families of perturbed spheres in
//! parallel and prints the corpus as CSV.

use imcf::harness::config::{GridConfig, SweepGrid, Variable};
use imcf::harness::{resolve_threads, run_sweep, SweepConfig};
use imcf::sphere::GridMode;

fn main() -> imcf::error::Result<()> {
    let config = SweepConfig {
        scenario: "example_sweep".into(),
        grid: GridConfig { mode: GridMode::Axisym1d, n_theta: 128, n_psi: None, stencil_order: 4 },
        parameters: SweepGrid {
            epsilon: vec![0.0, 0.05, 0.1],
            l: vec![2, 3, 4],
            s: vec![3.0, 6.0],
            m: vec![1.0, 0.0],
            n: vec![3, 5],
        },
        applied_to: Variable::Phi,
        tolerances: Default::default(),
        output: Default::default(),
    };
    let result = run_sweep(&config, resolve_threads(None))?;
    print!("{}", String::from_utf8_lossy(&result.to_csv_bytes()?));
    for v in &result.verdicts {
        eprintln!("{}: {} ({:.3e})", v.name, if v.pass { "pass" } else { "fail" }, v.measured);
    }
    Ok(())
}
