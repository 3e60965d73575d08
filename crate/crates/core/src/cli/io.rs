//! File plumbing shared by the subcommands: staged atomic writes, input
//! digests and run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::CliError;

pub const PARTIAL_SUFFIX: &str = ".partial";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn partial_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(PARTIAL_SUFFIX);
    PathBuf::from(name)
}

/// Outputs of one run, staged as `<name>.partial` and renamed into place by
/// [`Outputs::commit`]. Anything not committed keeps the suffix.
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    staged: Vec<(String, PathBuf)>,
    digests: BTreeMap<String, String>,
    inputs: BTreeMap<String, String>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            staged: Vec::new(),
            digests: BTreeMap::new(),
            inputs: BTreeMap::new(),
        })
    }

    /// Read an input file and record its digest under the given label.
    pub fn input(&mut self, label: &str, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = read_input(path)?;
        self.inputs.insert(label.to_string(), sha256_hex(&bytes));
        Ok(bytes)
    }

    pub fn stage(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let target = self.dir.join(name);
        let partial = partial_path(&target);
        let write = || -> std::io::Result<()> {
            let mut f = fs::File::create(&partial)?;
            f.write_all(bytes)?;
            f.sync_all()
        };
        write().map_err(|e| CliError::Output(format!("{}: {e}", partial.display())))?;
        self.digests.insert(name.to_string(), sha256_hex(bytes));
        self.staged.push((name.to_string(), partial));
        Ok(())
    }

    pub fn stage_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable output");
        text.push('\n');
        self.stage(name, text.as_bytes())
    }

    /// Write the manifest and move every staged file into place.
    pub fn commit<C: Serialize>(
        mut self,
        subcommand: &str,
        seed: u64,
        config: &C,
    ) -> Result<(), CliError> {
        let manifest = Manifest {
            subcommand,
            version: env!("CARGO_PKG_VERSION"),
            seed,
            config,
            inputs: &self.inputs,
            outputs: &self.digests,
        };
        let name = format!("{subcommand}.manifest.json");
        let manifest =
            serde_json::to_string_pretty(&manifest).expect("serializable manifest") + "\n";
        self.stage(&name, manifest.as_bytes())?;
        for (name, partial) in &self.staged {
            let target = self.dir.join(name);
            fs::rename(partial, &target)
                .map_err(|e| CliError::Output(format!("{}: {e}", target.display())))?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    subcommand: &'a str,
    version: &'a str,
    seed: u64,
    config: &'a C,
    inputs: &'a BTreeMap<String, String>,
    outputs: &'a BTreeMap<String, String>,
}
