//! Config resolution and the single ordered write of each report.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::commands::{self, CliError, Outcome, Table};
use crate::config::{apply_override, ExperimentConfig, Format};

/// The resolved config as embedded in reports, and its SHA-256.
///
/// Output settings are left out so that the same run written to two places
/// yields identical files.
fn provenance(cfg: &ExperimentConfig) -> (Value, String) {
    let mut v = serde_json::to_value(cfg).expect("config serializes");
    if let Some(map) = v.as_object_mut() {
        map.remove("output");
    }
    let bytes = serde_json::to_vec(&v).expect("config serializes");
    let hash = format!("{:x}", Sha256::digest(&bytes));
    (v, hash)
}

pub fn resolve(
    path: &Path,
    sets: &[String],
    output: Option<PathBuf>,
    format: Option<Format>,
    seed: Option<u64>,
) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let mut v: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    for s in sets {
        apply_override(&mut v, s).map_err(CliError::config)?;
    }
    if let Some(seed) = seed {
        apply_override(&mut v, &format!("sim.seed={seed}")).map_err(CliError::config)?;
    }
    let mut cfg: ExperimentConfig =
        serde_json::from_value(v).map_err(|e| CliError::config(e.to_string()))?;
    if output.is_some() {
        cfg.output.path = output;
    }
    if let Some(f) = format {
        cfg.output.format = f;
    }
    cfg.validate().map_err(CliError::config)?;
    Ok(cfg)
}

fn csv_bytes(table: &Table) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let err = |e: csv::Error| CliError::io(e.to_string());
    w.write_record(table.header).map_err(err)?;
    for row in &table.rows {
        w.write_record(row).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::io(e.to_string()))
}

fn json_bytes(v: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("report serializes");
    out.push(b'\n');
    out
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::io(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::io(e.to_string())),
    }
}

/// Renders an outcome into the bytes of the main file and, for CSV, the
/// bytes of the `.meta.json` sidecar that carries the provenance.
pub fn render(cfg: &ExperimentConfig, outcome: &Outcome) -> Result<(Vec<u8>, Option<Vec<u8>>), CliError> {
    let (config, hash) = provenance(cfg);
    let header = json!({
        "experiment": cfg.experiment,
        "config": config,
        "config_sha256": hash,
    });
    match cfg.output.format {
        Format::Json => {
            let mut doc = header;
            doc["result"] = outcome.result.clone();
            Ok((json_bytes(&doc), None))
        }
        Format::Csv => {
            let table = outcome.table.as_ref().ok_or_else(|| {
                CliError::config(format!("{:?} has no tabular output; use --format json", cfg.experiment))
            })?;
            Ok((csv_bytes(table)?, Some(json_bytes(&header))))
        }
    }
}

pub fn execute(
    path: &Path,
    sets: &[String],
    output: Option<PathBuf>,
    format: Option<Format>,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let cfg = resolve(path, sets, output, format, seed)?;
    if cfg.output.format == Format::Csv && cfg.experiment != crate::config::Experiment::StabilityPair
        && cfg.experiment != crate::config::Experiment::Convergence
    {
        return Err(CliError::config(format!(
            "{:?} has no tabular output; use --format json",
            cfg.experiment
        )));
    }
    let outcome = commands::run(&cfg)?;
    let (main, sidecar) = render(&cfg, &outcome)?;
    let target = cfg.output.path.as_deref();
    write_out(target, &main)?;
    if let (Some(meta), Some(p)) = (sidecar, target) {
        let mut name = p.as_os_str().to_owned();
        name.push(".meta.json");
        write_out(Some(Path::new(&name)), &meta)?;
    }
    Ok(())
}

pub fn print_error(e: &CliError) {
    let v = json!({ "status": e.status, "error": e.kind, "message": e.message });
    eprintln!("{}", serde_json::to_string(&v).expect("error serializes"));
}
