use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

/// Everything needed to reproduce a run, stored next to its output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the program name, as given.
    pub args: Vec<String>,
    pub inputs: Vec<PathBuf>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub walk: Option<WalkSettings>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mode: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkSettings {
    /// Threshold used; `None` means every insertion is kept.
    pub distortion_threshold: Option<f64>,
    pub step_cap: usize,
    pub walker_count: usize,
    pub global_seed: u64,
}

impl RunManifest {
    pub fn new(command: &str, args: &[OsString], inputs: Vec<PathBuf>, seed: u64) -> Self {
        Self {
            tool: "dysparse".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            args: args.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
            inputs,
            seed,
            walk: None,
            mode: None,
        }
    }

    pub fn path_for(out: &Path) -> PathBuf {
        let mut s = out.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }

    pub fn save_next_to(&self, out: &Path) -> Result<()> {
        let path = Self::path_for(out);
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, json + "\n").with_context(|| format!("writing {}", path.display()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let m: Self = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if m.tool != "dysparse" {
            bail!("{} is not a dysparse manifest", path.display());
        }
        Ok(m)
    }

    /// Recorded arguments, with `--out` replaced when `out` is given.
    pub fn replay_args(&self, out: Option<&Path>) -> Vec<OsString> {
        let mut args: Vec<OsString> = self.args.iter().map(OsString::from).collect();
        if let Some(out) = out {
            let mut i = 0;
            while i < args.len() {
                if args[i] == "--out" && i + 1 < args.len() {
                    args[i + 1] = out.as_os_str().to_owned();
                    i += 1;
                } else if args[i].to_str().is_some_and(|a| a.starts_with("--out=")) {
                    let mut a = OsString::from("--out=");
                    a.push(out.as_os_str());
                    args[i] = a;
                }
                i += 1;
            }
        }
        args
    }
}
