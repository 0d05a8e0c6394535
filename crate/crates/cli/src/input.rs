//! Gate and circuit inputs: registry names first, then files.

use std::fs;
use std::path::Path;

use gatefloor::gates::registry::GateRegistry;
use gatefloor::matrix::DECISION_TOL;
use gatefloor::synthesis::circuit::{CircuitDescriptor, ParamCircuit};
use gatefloor::{ComplexMatrix, Error};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Provenance of one input, recorded in run manifests.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct InputRecord {
    pub name: String,
    /// `builtin` or `file`.
    pub source: &'static str,
    /// SHA-256 of the file bytes, or of the matrix JSON for built-in gates.
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

/// Resolves a gate spec against the registry, falling back to a matrix file.
pub fn load_gate(spec: &str) -> CliResult<(ComplexMatrix, InputRecord)> {
    match GateRegistry::with_builtin().resolve(spec) {
        Ok(m) => {
            let record = InputRecord {
                name: spec.to_string(),
                source: "builtin",
                sha256: sha256_hex(m.to_json().as_bytes()),
            };
            Ok((m, record))
        }
        Err(Error::UnknownName(name)) => {
            let path = Path::new(spec);
            if !path.is_file() {
                return Err(CliError::InvalidGate(format!(
                    "`{name}` is neither a known gate nor a matrix file"
                )));
            }
            let bytes = read(path)?;
            let text = String::from_utf8(bytes.clone())
                .map_err(|_| CliError::Malformed(format!("{spec}: not UTF-8")))?;
            let m = ComplexMatrix::from_json(&text).map_err(CliError::gate)?;
            let residual = m.unitarity_residual();
            if residual > DECISION_TOL {
                return Err(CliError::InvalidGate(format!(
                    "{spec}: matrix is not unitary (residual {residual:.3e})"
                )));
            }
            Ok((
                m,
                InputRecord {
                    name: spec.to_string(),
                    source: "file",
                    sha256: sha256_hex(&bytes),
                },
            ))
        }
        Err(e) => Err(CliError::gate(e)),
    }
}

/// Like [`load_gate`] but insists on an 8×8 target.
pub fn load_target(spec: &str) -> CliResult<(ComplexMatrix, InputRecord)> {
    let (m, record) = load_gate(spec)?;
    if m.dim() != 8 {
        return Err(CliError::InvalidGate(format!(
            "target `{spec}` is {0}x{0}; synthesis targets are three-qubit (8x8)",
            m.dim()
        )));
    }
    Ok((m, record))
}

/// Reads a circuit descriptor file.
pub fn load_circuit(path: &Path) -> CliResult<(ParamCircuit, InputRecord)> {
    let bytes = read(path)?;
    let descriptor: CircuitDescriptor = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Malformed(format!("{}: {e}", path.display())))?;
    let pc = ParamCircuit::from_descriptor(&descriptor)
        .map_err(|e| CliError::Malformed(format!("{}: {e}", path.display())))?;
    Ok((
        pc,
        InputRecord {
            name: path.display().to_string(),
            source: "file",
            sha256: sha256_hex(&bytes),
        },
    ))
}
