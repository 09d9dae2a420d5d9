//! Run directories: every file written through a `Bundle` is hashed into the manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub struct Bundle {
    dir: PathBuf,
    files: BTreeMap<String, String>,
    certificates: BTreeMap<String, bool>,
    library_sha256: Option<String>,
}

impl Bundle {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Bundle { dir: dir.to_path_buf(), files: BTreeMap::new(), certificates: BTreeMap::new(), library_sha256: None })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.files.insert(name.to_string(), sha256_hex(contents.as_bytes()));
        Ok(())
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let s = serde_json::to_string_pretty(value)?;
        self.write(name, &s)
    }

    pub fn write_library(&mut self, json: &str) -> Result<()> {
        self.write("library.json", json)?;
        self.library_sha256 = self.files.get("library.json").cloned();
        Ok(())
    }

    pub fn certify(&mut self, name: &str, passed: bool) {
        self.certificates.insert(name.to_string(), passed);
    }

    pub fn passed(&self) -> bool {
        self.certificates.values().all(|&p| p)
    }

    /// Writes `manifest.json` last and returns whether every certificate passed.
    pub fn finish(self, command: &str, config: Value, seed: u64, threads: Option<usize>) -> Result<bool> {
        let passed = self.passed();
        let manifest = json!({
            "tool": "quasisynth",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "argv": std::env::args().collect::<Vec<_>>(),
            "seed": seed,
            "threads": threads,
            "config": config,
            "library_sha256": self.library_sha256,
            "files": self.files,
            "certificates": self.certificates,
            "passed": passed,
        });
        let s = serde_json::to_string_pretty(&manifest)?;
        let path = self.dir.join("manifest.json");
        fs::write(&path, s).with_context(|| format!("writing {}", path.display()))?;
        Ok(passed)
    }
}
