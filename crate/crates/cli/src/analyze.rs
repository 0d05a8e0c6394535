//! Structure report for a two- or three-qubit gate.

use std::collections::BTreeMap;

use gatefloor::gates::{permute_qubits, Qubit, QubitPermutation};
use gatefloor::matrix::{eigenvalues, operator_schmidt_rank, EigenMultiset, MatrixFile};
use gatefloor::structure::{
    eigen_pair_product_exists, find_control_basis, is_controlled_computational, BasisSearch, ControlledDecomposition,
    PairProduct,
};
use gatefloor::ComplexMatrix;
use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug)]
pub struct AnalyzeOptions {
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ControlEntry {
    pub qubit: String,
    /// `computational`, or `searched` for the rotated-basis search.
    pub basis: &'static str,
    pub detected: bool,
    pub residual: f64,
    /// Control states `[re, im]` pairs, when detected.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control_basis: Option<[Vec<[f64; 2]>; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<[MatrixFile; 2]>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalysisReport {
    pub gate: String,
    pub dim: usize,
    pub unitarity_residual: f64,
    pub controlled: Vec<ControlEntry>,
    pub operator_schmidt_rank: BTreeMap<String, usize>,
    pub operator_schmidt_values: BTreeMap<String, Vec<f64>>,
    pub eigenvalues: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair_product: Option<PairProduct>,
}

fn entry(qubit: Qubit, basis: &'static str, residual: f64, dec: Option<ControlledDecomposition>) -> ControlEntry {
    let detected = dec.is_some();
    let (control_basis, blocks) = match dec {
        Some(d) => {
            let state = |v: &gatefloor::ComplexVector| v.as_slice().iter().map(|z| [z.re, z.im]).collect();
            (
                Some([state(&d.control_basis[0]), state(&d.control_basis[1])]),
                Some([MatrixFile::from(&d.blocks[0]), MatrixFile::from(&d.blocks[1])]),
            )
        }
        None => (None, None),
    };
    ControlEntry {
        qubit: qubit.to_string(),
        basis,
        detected,
        residual,
        control_basis,
        blocks,
    }
}

pub fn analyze(name: &str, u: &ComplexMatrix, opts: &AnalyzeOptions) -> CliResult<AnalysisReport> {
    let n_qubits = match u.dim() {
        4 => 2,
        8 => 3,
        d => {
            return Err(CliError::InvalidGate(format!(
                "`{name}` is {d}x{d}; analysis takes 4x4 or 8x8 unitaries"
            )))
        }
    };
    let residual = u.unitarity_residual();
    if residual > gatefloor::matrix::DECISION_TOL {
        return Err(CliError::InvalidGate(format!("`{name}` is not unitary (residual {residual:.3e})")));
    }

    let mut controlled = Vec::new();
    for q in Qubit::ALL.into_iter().take(n_qubits) {
        let (res, dec) = is_controlled_computational(u, q, opts.tol).map_err(CliError::gate)?;
        controlled.push(entry(q, "computational", res, dec));
        let search = BasisSearch {
            tol: opts.tol,
            restarts: opts.restarts,
            seed: opts.seed,
            max_iters: opts.max_iters,
        };
        let found = find_control_basis(u, q, &search).map_err(CliError::gate)?;
        controlled.push(entry(q, "searched", found.residual, found.decomposition));
    }

    let mut ranks = BTreeMap::new();
    let mut values = BTreeMap::new();
    let cuts: Vec<(String, ComplexMatrix, [usize; 2])> = if n_qubits == 2 {
        vec![("A|B".into(), u.clone(), [2, 2])]
    } else {
        let moved = |q: Qubit| permute_qubits(u, &QubitPermutation::swap(Qubit::A, q)).map_err(CliError::gate);
        vec![
            ("A|BC".into(), u.clone(), [2, 4]),
            ("B|AC".into(), moved(Qubit::B)?, [2, 4]),
            ("C|AB".into(), moved(Qubit::C)?, [2, 4]),
        ]
    };
    for (label, m, dims) in cuts {
        let s = operator_schmidt_rank(&m, dims, opts.tol).map_err(CliError::gate)?;
        ranks.insert(label.clone(), s.rank);
        values.insert(label, s.singular_values);
    }

    let spectrum = EigenMultiset::new(eigenvalues(u).map_err(CliError::gate)?);
    let pair_product = if u.dim() == 4 {
        Some(eigen_pair_product_exists(&spectrum, opts.tol).map_err(CliError::gate)?)
    } else {
        None
    };
    Ok(AnalysisReport {
        gate: name.to_string(),
        dim: u.dim(),
        unitarity_residual: residual,
        controlled,
        operator_schmidt_rank: ranks,
        operator_schmidt_values: values,
        eigenvalues: spectrum.values.iter().map(|z| [z.re, z.im]).collect(),
        pair_product,
    })
}
