//! Setting resolution, input digests, atomic output and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use incomedist::kv::KvMap;
use incomedist::{Error, Result};
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Keys that describe a previous run rather than configure this one.
fn is_record_key(k: &str) -> bool {
    k == "command" || k == "tool_version" || k.starts_with("output.") || k.ends_with(".sha256")
}

/// One command invocation: layered settings in, manifest out.
pub struct Run {
    command: &'static str,
    layered: KvMap,
    resolved: KvMap,
    inputs: KvMap,
    outputs: KvMap,
    out_dir: PathBuf,
}

impl Run {
    /// `layers` are applied in order, later ones winning.
    pub fn new(command: &'static str, layers: &[KvMap], out_dir: PathBuf) -> Result<Self> {
        let mut layered = KvMap::new();
        for l in layers {
            layered = layered.merged(l);
        }
        if let Some(c) = layered.get("command") {
            if c != command {
                return Err(Error::Precondition(format!(
                    "configuration was recorded for `{c}`, not `{command}`"
                )));
            }
        }
        fs::create_dir_all(&out_dir)?;
        Ok(Run {
            command,
            layered,
            resolved: KvMap::new(),
            inputs: KvMap::new(),
            outputs: KvMap::new(),
            out_dir,
        })
    }

    /// Records `key` if set and returns its text.
    pub fn opt(&mut self, key: &str) -> Option<String> {
        let v = self.layered.get(key).map(str::to_string);
        if let Some(v) = &v {
            self.resolved.set(key, v);
        }
        v
    }

    pub fn take(&mut self, keys: &[&str]) {
        for k in keys {
            self.opt(k);
        }
    }

    pub fn or_default(&mut self, key: &str, default: impl ToString) -> String {
        self.opt(key).unwrap_or_else(|| {
            let d = default.to_string();
            self.resolved.set(key, &d);
            d
        })
    }

    pub fn require(&mut self, key: &str) -> Result<String> {
        self.opt(key)
            .ok_or_else(|| Error::Parse(format!("missing required setting `{key}`")))
    }

    /// Resolved settings, as handed to the library parsers.
    pub fn settings(&self) -> &KvMap {
        &self.resolved
    }

    /// Path of an input file named by setting `key`; its digest is recorded and
    /// checked against one carried over from a replayed manifest.
    pub fn input(&mut self, key: &str) -> Result<Option<PathBuf>> {
        let Some(path) = self.opt(key) else {
            return Ok(None);
        };
        let bytes = fs::read(&path)
            .map_err(|e| Error::Parse(format!("cannot read {key} file {path}: {e}")))?;
        let digest = hex::encode(Sha256::digest(&bytes));
        let dkey = format!("{key}.sha256");
        if let Some(expected) = self.layered.get(&dkey) {
            if expected != digest {
                return Err(Error::Precondition(format!(
                    "{key} file {path} differs from the recorded run (sha256 {digest}, expected {expected})"
                )));
            }
        }
        self.inputs.set(dkey, digest);
        Ok(Some(PathBuf::from(path)))
    }

    pub fn require_input(&mut self, key: &str) -> Result<PathBuf> {
        self.input(key)?
            .ok_or_else(|| Error::Parse(format!("missing required input `{key}`")))
    }

    /// Writes `name` in the output directory through a temporary file and rename.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        write_atomic(&path, bytes)?;
        self.outputs.set(
            format!("output.{name}.sha256"),
            hex::encode(Sha256::digest(bytes)),
        );
        Ok(path)
    }

    /// Writes `manifest.txt`: command, version, resolved settings and digests.
    /// Passing it back as `--config` repeats the run.
    pub fn finish(self) -> Result<PathBuf> {
        let mut m = KvMap::new();
        m.set("command", self.command);
        m.set("tool_version", TOOL_VERSION);
        for (k, v) in self.resolved.iter().filter(|(k, _)| !is_record_key(k)) {
            m.set(k, v);
        }
        m = m.merged(&self.inputs).merged(&self.outputs);
        let text = format!("# run manifest; replay with --config\n{}", m.to_text());
        let path = self.out_dir.join("manifest.txt");
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
