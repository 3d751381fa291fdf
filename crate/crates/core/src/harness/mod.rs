//! Scenario files, batch commands and machine-readable reports.
//!
//! Every command maps to a process exit status: 0 when all verdicts pass,
//! 1 on a verdict failure, 2 on flow breakdown and 64 on a configuration error.

mod commands;
pub mod config;

use std::io::Write;
use std::path::Path;

use serde::Serialize;

pub use commands::{
    check_flux, check_static, run_scenario, run_sweep, FluxCheck, FluxReport, RunResult, StaticCheck, StaticReport,
    StaticRow, SweepResult, SweepRow,
};
pub use config::{ScenarioConfig, SweepConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExitStatus {
    Pass,
    VerdictFailure,
    Breakdown,
    ConfigError,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Pass => 0,
            ExitStatus::VerdictFailure => 1,
            ExitStatus::Breakdown => 2,
            ExitStatus::ConfigError => 64,
        }
    }

    pub(crate) fn from_verdicts(verdicts: &[Verdict]) -> Self {
        if verdicts.iter().all(|v| v.pass) {
            ExitStatus::Pass
        } else {
            ExitStatus::VerdictFailure
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub tolerance: f64,
}

impl Verdict {
    pub fn new(name: &str, pass: bool, measured: f64, tolerance: f64) -> Self {
        Self { name: name.to_string(), pass, measured, tolerance }
    }

    /// `measured <= tolerance`.
    pub fn at_most(name: &str, measured: f64, tolerance: f64) -> Self {
        Self::new(name, measured <= tolerance, measured, tolerance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub compute_seconds: f64,
}

/// `{scenario, effective_config, verdicts, timings}`.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub scenario: String,
    pub effective_config: serde_json::Value,
    pub verdicts: Vec<Verdict>,
    pub timings: Timings,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("output");
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

/// Threads for parallel sweeps: the flag, then `IMCF_THREADS`, then rayon's default.
pub fn resolve_threads(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| std::env::var("IMCF_THREADS").ok().and_then(|v| v.trim().parse().ok())).filter(|&k| k > 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(ExitStatus::Pass.code(), 0);
        assert_eq!(ExitStatus::VerdictFailure.code(), 1);
        assert_eq!(ExitStatus::Breakdown.code(), 2);
        assert_eq!(ExitStatus::ConfigError.code(), 64);
        let v = [Verdict::at_most("a", 1.0, 2.0), Verdict::at_most("b", 3.0, 2.0)];
        assert_eq!(ExitStatus::from_verdicts(&v), ExitStatus::VerdictFailure);
        assert_eq!(ExitStatus::from_verdicts(&v[..1]), ExitStatus::Pass);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested").join("x.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn report_json_shape() {
        let report = Report {
            scenario: "s".into(),
            effective_config: serde_json::json!({ "k": 1 }),
            verdicts: vec![Verdict::at_most("v", 0.5, 1.0)],
            timings: Timings { total_seconds: 0.1, compute_seconds: 0.05 },
        };
        let value: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        let keys: Vec<&str> = value.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        assert_eq!(keys.len(), 4);
        for k in ["scenario", "effective_config", "verdicts", "timings"] {
            assert!(keys.contains(&k));
        }
        let v = &value["verdicts"][0];
        assert_eq!(v["name"], "v");
        assert_eq!(v["pass"], true);
        assert_eq!(v["measured"], 0.5);
        assert_eq!(v["tolerance"], 1.0);
    }
}
