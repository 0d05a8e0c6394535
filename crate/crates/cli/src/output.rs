//! Result files: JSON lines, CSV traces, and the run manifest.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use gatefloor::synthesis::engine::{SynthesisConfig, SynthesisResult};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::input::InputRecord;

pub const RESULTS_FILE: &str = "results.jsonl";
pub const TRACES_FILE: &str = "traces.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything that determines a run's results, echoed into every output.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunConfig {
    pub command: &'static str,
    pub synthesis: SynthesisConfig,
    /// Templates optimized, in order.
    pub templates: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_length: Option<usize>,
}

#[derive(Serialize)]
struct ResultLine<'a> {
    config: &'a RunConfig,
    result: &'a SynthesisResult,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Manifest<'a> {
    tool_version: &'static str,
    timestamp: String,
    config: &'a RunConfig,
    inputs: &'a [InputRecord],
    outputs: Vec<String>,
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn finish(path: &Path, mut w: BufWriter<File>) -> CliResult<()> {
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    writeln!(w).map_err(|e| CliError::io(path, e))?;
    finish(path, w)
}

/// Writes results, traces and manifest into `dir`; returns the paths written.
pub fn write_run(
    dir: &Path,
    config: &RunConfig,
    results: &[SynthesisResult],
    inputs: &[InputRecord],
    extra_outputs: &[PathBuf],
) -> CliResult<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let results_path = dir.join(RESULTS_FILE);
    let mut w = create(&results_path)?;
    for result in results {
        let line = serde_json::to_string(&ResultLine { config, result })
            .map_err(|e| CliError::Io(format!("{}: {e}", results_path.display())))?;
        writeln!(w, "{line}").map_err(|e| CliError::io(&results_path, e))?;
    }
    finish(&results_path, w)?;

    let traces_path = dir.join(TRACES_FILE);
    let mut w = create(&traces_path)?;
    let io = |e| CliError::io(&traces_path, e);
    writeln!(w, "template,restart,iteration,cost").map_err(io)?;
    for result in results {
        for (restart, trace) in result.traces.iter().enumerate() {
            for (iteration, cost) in trace.iter().enumerate() {
                writeln!(w, "{},{restart},{iteration},{cost:e}", result.template).map_err(io)?;
            }
        }
    }
    finish(&traces_path, w)?;

    let manifest_path = dir.join(MANIFEST_FILE);
    let mut outputs: Vec<PathBuf> = vec![results_path, traces_path];
    outputs.extend(extra_outputs.iter().cloned());
    outputs.push(manifest_path.clone());
    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION"),
        timestamp: chrono::Utc::now().to_rfc3339(),
        config,
        inputs,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    write_json(&manifest_path, &manifest)?;
    Ok(outputs)
}
