//! Run manifests: enough to rerun a command and check that it reproduces
//! every output byte for byte.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::args::{Command, Format, ReplayArgs};
use crate::commands::Outputs;
use crate::error::{CliError, CliResult};
use crate::inputs::{embedded_text, sha256_hex, Sources};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct OutputDigest {
    pub name: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub format: Format,
    pub seed: Option<u64>,
    pub command: Command,
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<OutputDigest>,
}

pub const STDOUT: &str = "<stdout>";

pub fn output_digests(out: &Outputs) -> Vec<OutputDigest> {
    let mut v = vec![OutputDigest { name: STDOUT.into(), sha256: sha256_hex(out.stdout.as_bytes()) }];
    v.extend(out.files.iter().map(|(p, b)| OutputDigest { name: p.display().to_string(), sha256: sha256_hex(b) }));
    v
}

impl RunManifest {
    pub fn new(command: &Command, format: Format, sources: &Sources, out: &Outputs) -> Self {
        RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            format,
            seed: command.seed(),
            command: command.clone(),
            inputs: sources.digests.clone(),
            outputs: output_digests(out),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

fn default_out_dir(manifest: &Path) -> PathBuf {
    let stem = manifest.file_stem().map_or_else(|| "manifest".into(), |s| s.to_string_lossy().into_owned());
    manifest.with_file_name(format!("{stem}.replay"))
}

/// Checks recorded input digests, then reruns the command with its output
/// files redirected into `out_dir`. Returns the rerun's outputs and the
/// summary to print.
pub fn replay<F>(args: &ReplayArgs, run: F) -> CliResult<(Outputs, String)>
where
    F: FnOnce(&Command, Format, &mut Sources) -> CliResult<Outputs>,
{
    let text = std::fs::read_to_string(&args.file).map_err(|e| CliError::io(&args.file, e))?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: not a run manifest: {e}", args.file.display())))?;
    if matches!(manifest.command, Command::Replay(_)) {
        return Err(CliError::Invalid("cannot replay a replay".into()));
    }
    let mut summary = String::new();
    if manifest.version != env!("CARGO_PKG_VERSION") {
        summary.push_str(&format!("note: manifest written by version {}, running {}\n", manifest.version, env!("CARGO_PKG_VERSION")));
    }
    for (name, digest) in &manifest.inputs {
        let actual = match embedded_text(name) {
            Some(t) => sha256_hex(t.as_bytes()),
            None if name.starts_with("bundle:") => return Err(CliError::Mismatch(format!("unknown embedded input {name}"))),
            None => sha256_hex(&std::fs::read(name).map_err(|e| CliError::io(name, e))?),
        };
        if &actual != digest {
            return Err(CliError::Mismatch(format!("input {name} has changed since the manifest was written")));
        }
    }
    let out_dir = args.out_dir.clone().unwrap_or_else(|| default_out_dir(&args.file));
    let mut command = manifest.command.clone();
    for p in command.output_paths_mut() {
        let name = p.file_name().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("output"));
        *p = out_dir.join(name);
    }
    if !command.output_paths_mut().is_empty() {
        std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;
    }
    let mut sources = Sources::default();
    let out = run(&command, manifest.format, &mut sources)?;
    let fresh = output_digests(&out);
    if fresh.len() != manifest.outputs.len() {
        return Err(CliError::Mismatch(format!("{} outputs recorded, {} produced", manifest.outputs.len(), fresh.len())));
    }
    for (old, new) in manifest.outputs.iter().zip(&fresh) {
        if old.sha256 != new.sha256 {
            return Err(CliError::Mismatch(format!("output {} differs (rerun written to {})", old.name, new.name)));
        }
    }
    summary.push_str(&format!("replay: {} inputs and {} outputs match\n", manifest.inputs.len(), fresh.len()));
    Ok((out, summary))
}
