//! Result cache keyed by scenario digest.
//!
//! Layout: `<root>/<digest>/<file>`. Writers hold an exclusive lock on
//! `<root>/.lock`; entries are written to a temporary directory and renamed
//! into place so readers never see a partial entry.

use crate::error::CliError;
use crate::run::{Bundle, VERSION};
use crate::scenario::Scenario;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs::{self, File};
use std::path::{Path, PathBuf};

pub const CACHE_ENV: &str = "RYTOV_CACHE_DIR";

/// SHA-256 over the tool version, the canonical scenario text (with the output
/// path removed) and the bytes of any referenced input file.
pub fn digest(scenario: &Scenario, base_dir: &Path) -> Result<String, CliError> {
    let mut canonical = scenario.clone();
    canonical.output = None;
    let mut h = Sha256::new();
    h.update(b"rytov ");
    h.update(VERSION.as_bytes());
    h.update(b"\n");
    h.update(canonical.to_toml().as_bytes());
    if let Some(p) = canonical.validity.as_ref().and_then(|v| v.profile.as_ref()) {
        if p != "standard" {
            let path = base_dir.join(p);
            let bytes = fs::read(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            h.update(b"\nprofile\n");
            h.update(&bytes);
        }
    }
    Ok(format!("{:x}", h.finalize()))
}

pub struct Cache {
    root: PathBuf,
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    /// `$RYTOV_CACHE_DIR`, else `$XDG_CACHE_HOME/rytov`, else `$HOME/.cache/rytov`.
    pub fn from_env() -> Option<Self> {
        if let Some(d) = std::env::var_os(CACHE_ENV) {
            return Some(Self::new(d));
        }
        if let Some(d) = std::env::var_os("XDG_CACHE_HOME") {
            return Some(Self::new(PathBuf::from(d).join("rytov")));
        }
        std::env::var_os("HOME").map(|h| Self::new(PathBuf::from(h).join(".cache").join("rytov")))
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn lock(&self) -> Result<File, CliError> {
        fs::create_dir_all(&self.root).map_err(io(&self.root))?;
        let path = self.root.join(".lock");
        let f = File::options().create(true).truncate(false).write(true).open(&path).map_err(io(&path))?;
        f.lock().map_err(io(&path))?;
        Ok(f)
    }

    pub fn lookup(&self, digest: &str) -> Result<Option<Bundle>, CliError> {
        let dir = self.root.join(digest);
        if !dir.is_dir() {
            return Ok(None);
        }
        let _guard = self.lock()?;
        let mut files = BTreeMap::new();
        for entry in fs::read_dir(&dir).map_err(io(&dir))? {
            let entry = entry.map_err(io(&dir))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            let text = fs::read_to_string(entry.path()).map_err(io(&entry.path()))?;
            files.insert(name, text);
        }
        Ok(Some(Bundle { files }))
    }

    pub fn store(&self, digest: &str, bundle: &Bundle) -> Result<(), CliError> {
        let _guard = self.lock()?;
        let dir = self.root.join(digest);
        if dir.is_dir() {
            return Ok(());
        }
        let tmp = self.root.join(format!(".{digest}.tmp"));
        let _ = fs::remove_dir_all(&tmp);
        fs::create_dir_all(&tmp).map_err(io(&tmp))?;
        for (name, text) in &bundle.files {
            let p = tmp.join(name);
            fs::write(&p, text).map_err(io(&p))?;
        }
        fs::rename(&tmp, &dir).map_err(io(&dir))
    }
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}
