//! Exact checks of known Toffoli decompositions, multiplied out gate by gate.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::circuit::{generator_coefficients, ParamCircuit, PARAMS_PER_SLOT};
use super::template::CircuitTemplate;
use crate::error::Result;
use crate::gates::{self, PairLabel, Qubit};
use crate::matrix::{distance_up_to_phase, log_unitary, tensor, ComplexMatrix};

/// Default residual bound for the exact decompositions.
pub const VERIFY_TOL: f64 = 1e-10;

/// A negative control passes when its residual stays above this.
pub const NEGATIVE_MARGIN: f64 = 1e-2;

/// √X = ½[[1+i, 1−i], [1−i, 1+i]].
pub fn sqrt_x() -> ComplexMatrix {
    let (p, m) = (Complex64::new(0.5, 0.5), Complex64::new(0.5, -0.5));
    ComplexMatrix::from_rows(&[vec![p, m], vec![m, p]]).expect("2x2")
}

/// A labelled 8×8 step of a circuit, with its two-qubit gate when it has one.
#[derive(Clone, Debug)]
pub struct Step {
    pub label: String,
    pub unitary: ComplexMatrix,
    pub pair_gate: Option<(PairLabel, ComplexMatrix)>,
}

fn two_qubit(label: impl Into<String>, pair: PairLabel, g: ComplexMatrix) -> Step {
    Step {
        label: label.into(),
        unitary: gates::embed_pair(pair, &g).expect("4x4 unitary"),
        pair_gate: Some((pair, g)),
    }
}

fn one_qubit(label: impl Into<String>, q: Qubit, g: &ComplexMatrix) -> Step {
    let id = ComplexMatrix::identity(2);
    let (pair, local) = match q {
        Qubit::A => (PairLabel::AB, tensor(g, &id)),
        Qubit::B => (PairLabel::AB, tensor(&id, g)),
        Qubit::C => (PairLabel::BC, tensor(&id, g)),
    };
    Step {
        label: label.into(),
        unitary: gates::embed_pair(pair, &local).expect("4x4 unitary"),
        pair_gate: None,
    }
}

/// Controlled-√X on BC, CNOT on AB, controlled-√X† on BC, CNOT on AB,
/// controlled-√X on AC, in time order. With `flip_last` the final gate is
/// controlled-√X† instead, which no longer yields the Toffoli gate.
pub fn five_gate_steps(flip_last: bool) -> Vec<Step> {
    let v = sqrt_x();
    let vd = v.adjoint();
    let (last, last_label) = if flip_last { (&vd, "controlled-√X† on AC (control A)") } else { (&v, "controlled-√X on AC (control A)") };
    vec![
        two_qubit("controlled-√X on BC (control B)", PairLabel::BC, gates::controlled(&v)),
        two_qubit("CNOT on AB (control A)", PairLabel::AB, gates::cnot()),
        two_qubit("controlled-√X† on BC (control B)", PairLabel::BC, gates::controlled(&vd)),
        two_qubit("CNOT on AB (control A)", PairLabel::AB, gates::cnot()),
        two_qubit(last_label, PairLabel::AC, gates::controlled(last)),
    ]
}

/// The standard Toffoli circuit with six CNOTs, Hadamards and T gates.
pub fn six_cnot_steps() -> Vec<Step> {
    let (h, t, td) = (gates::hadamard(), gates::phase(FRAC_PI_4), gates::phase(-FRAC_PI_4));
    let cnot = |label: &str, pair| two_qubit(label, pair, gates::cnot());
    vec![
        one_qubit("H on C", Qubit::C, &h),
        cnot("CNOT B→C", PairLabel::BC),
        one_qubit("T† on C", Qubit::C, &td),
        cnot("CNOT A→C", PairLabel::AC),
        one_qubit("T on C", Qubit::C, &t),
        cnot("CNOT B→C", PairLabel::BC),
        one_qubit("T† on C", Qubit::C, &td),
        cnot("CNOT A→C", PairLabel::AC),
        one_qubit("T on B", Qubit::B, &t),
        one_qubit("T on C", Qubit::C, &t),
        one_qubit("H on C", Qubit::C, &h),
        cnot("CNOT A→B", PairLabel::AB),
        one_qubit("T on A", Qubit::A, &t),
        one_qubit("T† on B", Qubit::B, &td),
        cnot("CNOT A→B", PairLabel::AB),
    ]
}

/// Product of the steps, first step applied first.
pub fn multiply_out(steps: &[Step]) -> ComplexMatrix {
    steps.iter().fold(ComplexMatrix::identity(8), |acc, s| &s.unitary * &acc)
}

/// The five-gate construction as a parameterized circuit, each slot
/// generator taken from the matrix logarithm of its gate.
pub fn five_gate_circuit() -> Result<ParamCircuit> {
    let steps = five_gate_steps(false);
    let mut slots = Vec::new();
    let mut params = Vec::with_capacity(steps.len() * PARAMS_PER_SLOT);
    for (pair, g) in steps.iter().filter_map(|s| s.pair_gate.clone()) {
        slots.push(pair);
        params.extend(generator_coefficients(&log_unitary(&g)?));
    }
    ParamCircuit::new(CircuitTemplate::new(slots)?, params)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Check {
    pub name: String,
    /// Gate-by-gate listing in time order.
    pub steps: Vec<String>,
    pub residual: f64,
    pub tolerance: f64,
    /// False for negative controls, which must stay away from the target.
    pub expect_match: bool,
    pub passed: bool,
}

impl Check {
    pub fn new(name: &str, steps: Vec<String>, residual: f64, tolerance: f64, expect_match: bool) -> Self {
        let passed = if expect_match { residual <= tolerance } else { residual > NEGATIVE_MARGIN };
        Self {
            name: name.to_string(),
            steps,
            residual,
            tolerance,
            expect_match,
            passed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn new(checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self { checks, passed }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn labels(steps: &[Step]) -> Vec<String> {
    steps.iter().map(|s| s.label.clone()).collect()
}

/// Multiplies out the known decompositions and compares each with the
/// Toffoli gate up to global phase; residuals are phase-invariant costs.
pub fn verify_known_decompositions(tol: f64) -> Result<VerificationReport> {
    let toffoli = gates::toffoli();
    let mut checks = Vec::new();

    let five = five_gate_steps(false);
    checks.push(Check::new(
        "five-gate controlled-sqrt-x",
        labels(&five),
        distance_up_to_phase(&multiply_out(&five), &toffoli)?,
        tol,
        true,
    ));

    let six = six_cnot_steps();
    checks.push(Check::new(
        "six-cnot",
        labels(&six),
        distance_up_to_phase(&multiply_out(&six), &toffoli)?,
        tol,
        true,
    ));

    let flipped = five_gate_steps(true);
    checks.push(Check::new(
        "five-gate with final gate inverted",
        labels(&flipped),
        distance_up_to_phase(&multiply_out(&flipped), &toffoli)?,
        tol,
        false,
    ));

    let h = gates::hadamard_on_c();
    checks.push(Check::new(
        "hadamard-equivalence",
        vec!["H on C".into(), "Toffoli".into(), "H on C".into()],
        (&(&h * &toffoli) * &h).distance(&gates::v_abc()),
        tol,
        true,
    ));

    Ok(VerificationReport::new(checks))
}

/// Checks a parameterized circuit against a target.
pub fn verify_circuit(name: &str, pc: &ParamCircuit, target: &ComplexMatrix, tol: f64) -> Result<Check> {
    let steps = pc
        .template()
        .slots()
        .iter()
        .enumerate()
        .map(|(k, p)| format!("slot {k}: generator on {p}"))
        .collect();
    let residual = distance_up_to_phase(pc.unitary(), target)?;
    Ok(Check::new(name, steps, residual, tol, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::circuit::{cost, CircuitDescriptor};

    #[test]
    fn sqrt_x_squares_to_x() {
        let v = sqrt_x();
        assert!((&v * &v).distance(&gates::pauli_x()) < 1e-15);
        assert!(v.is_unitary(1e-15));
    }

    #[test]
    fn five_gate_product_is_exactly_toffoli() {
        // Entry-wise, not just up to phase.
        assert!(multiply_out(&five_gate_steps(false)).distance(&gates::toffoli()) < 1e-14);
    }

    #[test]
    fn six_cnot_product_is_toffoli_up_to_phase() {
        let u = multiply_out(&six_cnot_steps());
        assert!(distance_up_to_phase(&u, &gates::toffoli()).unwrap() < 1e-14);
        assert_eq!(six_cnot_steps().iter().filter(|s| s.pair_gate.is_some()).count(), 6);
    }

    #[test]
    fn default_report_passes() {
        let r = verify_known_decompositions(VERIFY_TOL).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.checks.len(), 4);
        let negative = &r.checks[2];
        assert!(!negative.expect_match && negative.residual > 0.05, "{}", negative.residual);
    }

    #[test]
    fn zero_tolerance_can_fail_but_negative_control_is_unaffected() {
        let r = verify_known_decompositions(0.0).unwrap();
        assert!(r.checks[2].passed);
        // The six-CNOT product accumulates rounding in the T phases.
        let six = &r.checks[1];
        assert_eq!(six.passed, six.residual == 0.0);
    }

    #[test]
    fn five_gate_param_circuit_reaches_zero_cost() {
        let pc = five_gate_circuit().unwrap();
        assert_eq!(pc.template().to_string(), "BC-AB-BC-AB-AC");
        assert!(cost(&pc, &gates::toffoli()).unwrap() < 1e-12);
        let check = verify_circuit("five", &pc, &gates::toffoli(), VERIFY_TOL).unwrap();
        assert!(check.passed);

        // A corrupted generator is caught and reports its residual.
        let mut d: CircuitDescriptor = pc.to_descriptor();
        d.slots[2].generator[5] += 0.3;
        let bad = ParamCircuit::from_descriptor(&d).unwrap();
        let check = verify_circuit("corrupted", &bad, &gates::toffoli(), VERIFY_TOL).unwrap();
        assert!(!check.passed && check.residual > VERIFY_TOL);
    }
}
