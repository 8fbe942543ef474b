//! Output plumbing: every command funnels its files through a `Run`,
//! which records them and finishes by writing the manifest next to them.

use crate::{Common, Failure};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    config: &'a serde_json::Value,
    seed: u64,
    version: &'a str,
    wall_time_s: f64,
    outputs: &'a [String],
}

pub struct Run {
    out_dir: PathBuf,
    command: String,
    config_echo: serde_json::Value,
    seed: u64,
    started: Instant,
    outputs: Vec<String>,
}

impl Run {
    /// Prepares the output directory. Call only after the config has
    /// parsed, so a malformed config never leaves partial files behind.
    pub fn start(
        common: &Common,
        command: &str,
        config_echo: &impl Serialize,
        seed: u64,
    ) -> Result<Run, Failure> {
        let out_dir = common_out_dir(common)?;
        let config_echo = serde_json::to_value(config_echo)
            .map_err(|e| Failure::config(format!("cannot echo the config: {e}")))?;
        Ok(Run {
            out_dir,
            command: command.to_string(),
            config_echo,
            seed,
            started: Instant::now(),
            outputs: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    /// Full-precision JSON; stdout is where digits get suppressed.
    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| Failure::config(format!("cannot serialize {name}: {e}")))?;
        self.write_bytes(name, text.as_bytes())
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), Failure> {
        self.write_bytes(name, text.as_bytes())
    }

    /// CSV with a header row; one record per line, full precision.
    pub fn write_csv(
        &mut self,
        name: &str,
        header: &str,
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> Result<(), Failure> {
        let mut text = String::from(header);
        text.push('\n');
        for row in rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        self.write_bytes(name, text.as_bytes())
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        let path = self.path(name);
        write_file(&path, bytes)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    /// Writes the manifest. The wall time varies run to run; everything
    /// else in the manifest and in the outputs is reproducible.
    pub fn finish(mut self) -> Result<(), Failure> {
        let manifest = RunManifest {
            command: &self.command,
            config: &self.config_echo,
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION"),
            wall_time_s: self.started.elapsed().as_secs_f64(),
            outputs: &self.outputs,
        };
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Failure::config(format!("cannot serialize the manifest: {e}")))?;
        let path = self.path("manifest.json");
        write_file(&path, text.as_bytes())?;
        self.outputs.push("manifest.json".to_string());
        Ok(())
    }
}

fn common_out_dir(common: &Common) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(&common.out).map_err(|e| {
        Failure::config(format!("cannot create {}: {e}", common.out.display()))
    })?;
    Ok(common.out.clone())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let mut f = std::fs::File::create(path)
        .map_err(|e| Failure::config(format!("cannot create {}: {e}", path.display())))?;
    f.write_all(bytes)
        .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))
}

/// Reads a whitespace-trimmed symbol string ("0102") into digits.
pub fn read_symbols(path: &Path, alphabet: usize) -> Result<Vec<u8>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for c in text.trim().chars() {
        let d = c
            .to_digit(10)
            .ok_or_else(|| Failure::codec(format!("non-digit symbol {c:?} in {}", path.display())))?;
        if d as usize >= alphabet {
            return Err(Failure::codec(format!(
                "symbol {d} outside alphabet {alphabet} in {}",
                path.display()
            )));
        }
        out.push(d as u8);
    }
    Ok(out)
}

pub fn symbols_to_string(symbols: &[u8]) -> String {
    let mut s: String = symbols.iter().map(|d| char::from(b'0' + d)).collect();
    s.push('\n');
    s
}
