//! Run manifests: every subcommand records its resolved configuration, seed,
//! and the checksums of the artifacts it wrote. The timestamp is isolated in
//! the single `created_unix` field so byte-level reproducibility checks can
//! exclude it.

use std::path::{Path, PathBuf};

use mfkrig::Result;
use serde_json::json;
use sha2::{Digest, Sha256};

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Write `<...>/manifest.json` (or the given explicit path) describing a run.
pub fn write_manifest(
    manifest_path: &Path,
    subcommand: &str,
    seed: Option<u64>,
    config: serde_json::Value,
    artifacts: &[PathBuf],
) -> Result<()> {
    let mut entries = Vec::new();
    for path in artifacts {
        let bytes = std::fs::read(path)?;
        entries.push(json!({
            "path": path.display().to_string(),
            "sha256": sha256_hex(&bytes),
            "bytes": bytes.len(),
        }));
    }
    let created = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let doc = json!({
        "tool": "mfkrig",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": subcommand,
        "seed": seed,
        "config": config,
        "artifacts": entries,
        "created_unix": created,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("manifest serializes");
    text.push('\n');
    std::fs::write(manifest_path, text)?;
    Ok(())
}

/// Manifest path for a command whose primary artifact is `out`:
/// `model.json` gets `model.manifest.json` next to it.
pub fn sibling_manifest_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    out.with_file_name(format!("{stem}.manifest.json"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sibling_path_replaces_extension() {
        assert_eq!(
            sibling_manifest_path(Path::new("/tmp/m.json")),
            PathBuf::from("/tmp/m.manifest.json")
        );
        assert_eq!(
            sibling_manifest_path(Path::new("fig.svg")),
            PathBuf::from("fig.manifest.json")
        );
    }

    #[test]
    fn sha256_of_empty_input_matches_reference() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
