//! Scenario files, command dispatch and the result cache behind the `rytov`
//! binary.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cache;
pub mod error;
pub mod run;
pub mod scenario;

pub use cache::{digest, Cache, CACHE_ENV};
pub use error::CliError;
pub use run::{num, run, Bundle, VERSION};
pub use scenario::Scenario;

use std::path::{Path, PathBuf};

/// Result of [`execute`].
#[derive(Debug)]
pub struct Outcome {
    pub digest: String,
    pub output_dir: PathBuf,
    pub cached: bool,
    pub bundle: Bundle,
}

/// Runs a scenario through the cache and writes its files into `out`.
pub fn execute(scenario: &Scenario, base_dir: &Path, out: &Path, cache: Option<&Cache>) -> Result<Outcome, CliError> {
    let digest = digest(scenario, base_dir)?;
    let hit = match cache {
        Some(c) => c.lookup(&digest)?,
        None => None,
    };
    let cached = hit.is_some();
    let bundle = match hit {
        Some(b) => b,
        None => {
            let mut b = run(scenario, base_dir)?;
            if let Some(s) = b.files.get_mut("summary.txt") {
                s.push_str(&format!("digest = {digest}\n"));
            }
            if let Some(c) = cache {
                c.store(&digest, &b)?;
            }
            b
        }
    };
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    for (name, text) in &bundle.files {
        let p = out.join(name);
        std::fs::write(&p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
    }
    Ok(Outcome {
        digest,
        output_dir: out.to_path_buf(),
        cached,
        bundle,
    })
}
