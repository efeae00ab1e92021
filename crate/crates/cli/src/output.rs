//! Result naming and atomic file output.

use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

/// First 16 hex digits of SHA-256 over the resolved config.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let digest = Sha256::digest(serde_json::to_vec(cfg).expect("config serializes"));
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

pub fn result_path(dir: &Path, experiment: &str, hash: &str, ext: &str) -> PathBuf {
    dir.join(format!("{experiment}-{hash}.{ext}"))
}

/// Writes through a temporary file in the same directory and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = ExperimentConfig::from_json(r#"{"experiment": "evolve"}"#).unwrap();
        let b = ExperimentConfig::from_json(r#"{"experiment": "evolve", "grid": {"R": 40, "N": 512}}"#).unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 16);
        let mut c = a.clone();
        c.evolution.override_admissibility = true;
        assert_ne!(config_hash(&a), config_hash(&c));
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = result_path(&dir.path().join("nested"), "evolve", "0123", "json");
        assert!(path.ends_with("evolve-0123.json"));
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }
}
