//! Command-line laboratory for `L_a = −Δ + a|x|^{−2}` and the radial quintic NLS.
//!
//! An experiment is described by a JSON config ([`config::ExperimentConfig`]);
//! [`run_config`] validates it, runs it and writes `<experiment>-<hash>.json`
//! (and `.csv` when a time series exists) into the output directory.

pub mod acceptance;
pub mod config;
pub mod experiments;
pub mod lab;
pub mod output;
pub mod report;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde_json::json;

use config::{ConfigError, Experiment, ExperimentConfig};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_NUMERIC_FAIL: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

pub const DEFAULT_OUTPUT_DIR: &str = "results";

/// Reads, parses and prechecks a config file without running anything.
pub fn load_config(path: &Path, override_admissibility: bool) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    cfg.evolution.override_admissibility |= override_admissibility;
    experiments::precheck(&cfg)?;
    Ok(cfg)
}

/// Runs one config and returns the process exit code.
pub fn run_config(path: &Path, out_dir: Option<&Path>, override_admissibility: bool) -> u8 {
    let cfg = match load_config(path, override_admissibility) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let dir: PathBuf = out_dir
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    let params = experiments::precheck(&cfg).expect("prechecked");
    let hash = output::config_hash(&cfg);
    let name = cfg.experiment.name();

    let start = Instant::now();
    let outcome = experiments::run(&cfg);
    let elapsed = start.elapsed().as_secs_f64();

    let mut files = Vec::new();
    if let Some(series) = &outcome.series {
        let path = output::result_path(&dir, name, &hash, "csv");
        let mut bytes = Vec::new();
        series.write_csv(&mut bytes).expect("writing to memory");
        if let Err(e) = output::write_atomic(&path, &bytes) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return EXIT_NUMERIC_FAIL;
        }
        files.push(path.display().to_string());
    }
    let manifest_path = output::result_path(&dir, name, &hash, "json");
    files.push(manifest_path.display().to_string());
    let passed = outcome.passed();
    let manifest = json!({
        "experiment": name,
        "config_hash": hash,
        "config": cfg,
        "override_admissibility": cfg.evolution.override_admissibility,
        "params": experiments::params_json(&params),
        "versions": {
            "invsq-nls": env!("CARGO_PKG_VERSION"),
            "invsq-core": invsq_core::VERSION,
        },
        "verdict": if passed { "pass" } else { "fail" },
        "checks": outcome.checks,
        "metrics": outcome.metrics,
        "error": outcome.error,
        "files": files,
        "generated_unix": SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        "elapsed_seconds": elapsed,
    });
    let bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    if let Err(e) = output::write_atomic(&manifest_path, &bytes) {
        eprintln!("error: cannot write {}: {e}", manifest_path.display());
        return EXIT_NUMERIC_FAIL;
    }
    for c in &outcome.checks {
        let mark = if c.pass { "ok  " } else { "FAIL" };
        match c.threshold {
            Some(t) => println!("{mark} {:<40} {:>12.5e} (limit {t:.1e})", c.name, c.value),
            None => println!("{mark} {}", c.name),
        }
    }
    if let Some(e) = &outcome.error {
        println!("FAIL {e}");
    }
    println!("{name}: {} -> {}", if passed { "pass" } else { "fail" }, manifest_path.display());
    if passed {
        EXIT_PASS
    } else {
        EXIT_NUMERIC_FAIL
    }
}

/// The registry printed by `invsq-nls list`.
pub fn list() -> String {
    Experiment::ALL.iter().map(|e| format!("{:<18} {}\n", e.name(), e.summary())).collect()
}
