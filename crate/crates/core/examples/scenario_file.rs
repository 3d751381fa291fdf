//! Loads a scenario file (default: the coordinate-sphere preset), runs it,
//! and prints the report JSON. The trace goes to stdout with `--csv`.

use std::path::PathBuf;

use imcf::harness::{run_scenario, ScenarioConfig};

fn main() -> imcf::error::Result<()> {
    let path = std::env::args()
        .nth(1)
        .filter(|a| !a.starts_with("--"))
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/coordinate_sphere.json"));
    let config = ScenarioConfig::load(&path)?;
    let result = run_scenario(&config)?;
    if std::env::args().any(|a| a == "--csv") {
        print!("{}", result.trace.to_csv_string()?);
    } else {
        println!("{}", result.report.to_json());
    }
    eprintln!("exit status {}", result.status.code());
    Ok(())
}
