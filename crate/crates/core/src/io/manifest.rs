use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Path relative to the manifest's directory, `/`-separated.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub entries: Vec<ManifestEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn collect(root: &Path, dir: &Path, skip: &str, out: &mut Vec<ManifestEntry>) -> Result<()> {
    let mut names: Vec<_> = fs::read_dir(dir)?.collect::<std::io::Result<Vec<_>>>()?;
    names.sort_by_key(|e| e.file_name());
    for e in names {
        let p = e.path();
        if p.is_dir() {
            collect(root, &p, skip, out)?;
            continue;
        }
        let rel = p.strip_prefix(root).expect("walked below root");
        let rel = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        if rel == skip {
            continue;
        }
        let bytes = fs::read(&p)?;
        out.push(ManifestEntry {
            path: rel,
            bytes: bytes.len() as u64,
            sha256: sha256_hex(&bytes),
        });
    }
    Ok(())
}

impl Manifest {
    /// Hashes every file below `dir` except `skip` (the manifest itself),
    /// in sorted path order.
    pub fn build(dir: &Path, seed: u64, skip: &str) -> Result<Manifest> {
        let mut entries = Vec::new();
        collect(dir, dir, skip, &mut entries)?;
        Ok(Manifest { seed, entries })
    }

    /// Paths whose content no longer matches the recorded hash or size,
    /// including missing files.
    pub fn verify(&self, dir: &Path) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for e in &self.entries {
            match fs::read(dir.join(&e.path)) {
                Ok(b) if b.len() as u64 == e.bytes && sha256_hex(&b) == e.sha256 => {}
                Ok(_) => bad.push(e.path.clone()),
                Err(err) if err.kind() == std::io::ErrorKind::NotFound => bad.push(e.path.clone()),
                Err(err) => return Err(Error::Io(err)),
            }
        }
        Ok(bad)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Manifest> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}
