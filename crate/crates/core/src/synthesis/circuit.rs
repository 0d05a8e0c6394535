//! Parameterized circuits: one Hermitian generator per slot, 16 real
//! coefficients in the two-qubit Pauli-product basis, slot unitary `exp(iH)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gates::{PairLabel, QubitPermutation};
use crate::matrix::{ComplexMatrix, UNITARY_TOL};
use crate::synthesis::optimizer::Objective;
use crate::synthesis::template::CircuitTemplate;

pub const PARAMS_PER_SLOT: usize = 16;

type Mat4 = [Complex64; 16];
type Mat8 = [Complex64; 64];

const Z: Complex64 = Complex64::new(0.0, 0.0);
const O: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

const PAULI: [[Complex64; 4]; 4] = [
    [O, Z, Z, O],
    [Z, O, O, Z],
    [Z, Complex64::new(0.0, -1.0), I, Z],
    [O, Z, Z, Complex64::new(-1.0, 0.0)],
];

/// `σᵢ ⊗ σⱼ` for generator index `4i + j`, with `σ = (I, X, Y, Z)`.
pub fn pauli_product(index: usize) -> ComplexMatrix {
    let (a, b) = (&PAULI[index / 4], &PAULI[index % 4]);
    let mut m = ComplexMatrix::zeros(4);
    for r in 0..4 {
        for c in 0..4 {
            m[(r, c)] = a[(r >> 1) * 2 + (c >> 1)] * b[(r & 1) * 2 + (c & 1)];
        }
    }
    m
}

/// Hermitian generator `Σₖ cₖ σₖ` as a matrix.
pub fn generator_matrix(coeffs: &[f64]) -> ComplexMatrix {
    assert_eq!(coeffs.len(), PARAMS_PER_SLOT);
    let mut h = ComplexMatrix::zeros(4);
    for (k, &c) in coeffs.iter().enumerate() {
        if c != 0.0 {
            h = &h + &pauli_product(k).scale(Complex64::new(c, 0.0));
        }
    }
    h
}

/// Generator coefficients `cₖ = tr(σₖ H) / 4` of a Hermitian 4×4.
pub fn generator_coefficients(h: &ComplexMatrix) -> Vec<f64> {
    (0..PARAMS_PER_SLOT)
        .map(|k| (&pauli_product(k) * h).trace().re / 4.0)
        .collect()
}

fn generator4(coeffs: &[f64]) -> Mat4 {
    let mut h = [Z; 16];
    for (k, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let (a, b) = (&PAULI[k / 4], &PAULI[k % 4]);
        for r in 0..4 {
            for col in 0..4 {
                h[r * 4 + col] += a[(r >> 1) * 2 + (col >> 1)] * b[(r & 1) * 2 + (col & 1)] * c;
            }
        }
    }
    h
}

#[inline]
fn mul4(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [Z; 16];
    for i in 0..4 {
        for k in 0..4 {
            let x = a[i * 4 + k];
            for j in 0..4 {
                out[i * 4 + j] += x * b[k * 4 + j];
            }
        }
    }
    out
}

const TAYLOR_DEGREE: usize = 12;

/// `exp(iH)` by scaling and squaring a truncated Taylor series.
fn slot_exp(coeffs: &[f64]) -> Mat4 {
    let h = generator4(coeffs);
    // ‖H‖_F = 2‖c‖ bounds the spectral norm; scale it below 1/4.
    let norm = 2.0 * coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
    let squarings = if norm > 0.25 { (norm / 0.25).log2().ceil() as i32 } else { 0 };
    let scale = I * 0.5f64.powi(squarings);
    let a: Mat4 = h.map(|x| x * scale);
    // Horner: I + A(I + A/2(I + A/3(...)))
    let mut acc = [Z; 16];
    for k in 0..4 {
        acc[k * 5] = O;
    }
    for n in (1..=TAYLOR_DEGREE).rev() {
        let mut t = mul4(&a, &acc);
        let inv = 1.0 / n as f64;
        for x in t.iter_mut() {
            *x *= inv;
        }
        for k in 0..4 {
            t[k * 5] += O;
        }
        acc = t;
    }
    for _ in 0..squarings {
        acc = mul4(&acc, &acc);
    }
    acc
}

/// `exp(iH)` for the generator with these 16 coefficients.
pub fn slot_unitary(coeffs: &[f64]) -> ComplexMatrix {
    assert_eq!(coeffs.len(), PARAMS_PER_SLOT);
    ComplexMatrix::from_vec(slot_exp(coeffs).to_vec()).expect("4x4")
}

/// Row/column index inside the 8-dim space for spectator bit `s` and local index `l`.
#[inline]
fn full_index(pair: PairLabel, s: usize, l: usize) -> usize {
    let (hi, lo) = pair.qubits();
    ((l >> 1) << hi.bit()) | ((l & 1) << lo.bit()) | (s << pair.spectator().bit())
}

fn identity8() -> Mat8 {
    let mut m = [Z; 64];
    for i in 0..8 {
        m[i * 9] = O;
    }
    m
}

/// `acc ← E(g)·acc`.
fn apply_left(pair: PairLabel, g: &Mat4, acc: &mut Mat8) {
    for s in 0..2 {
        let rows = [0, 1, 2, 3].map(|l| full_index(pair, s, l));
        for col in 0..8 {
            let v = rows.map(|r| acc[r * 8 + col]);
            for (a, &r) in rows.iter().enumerate() {
                acc[r * 8 + col] = (0..4).map(|b| g[a * 4 + b] * v[b]).sum();
            }
        }
    }
}

/// `acc ← acc·E(g)`.
fn apply_right(pair: PairLabel, g: &Mat4, acc: &mut Mat8) {
    for s in 0..2 {
        let cols = [0, 1, 2, 3].map(|l| full_index(pair, s, l));
        for row in 0..8 {
            let v = cols.map(|c| acc[row * 8 + c]);
            for (b, &c) in cols.iter().enumerate() {
                acc[row * 8 + c] = (0..4).map(|a| v[a] * g[a * 4 + b]).sum();
            }
        }
    }
}

fn mul8(a: &Mat8, b: &Mat8) -> Mat8 {
    let mut out = [Z; 64];
    for i in 0..8 {
        for k in 0..8 {
            let x = a[i * 8 + k];
            if x == Z {
                continue;
            }
            for j in 0..8 {
                out[i * 8 + j] += x * b[k * 8 + j];
            }
        }
    }
    out
}

fn build8(slots: &[PairLabel], params: &[f64]) -> Mat8 {
    let mut acc = identity8();
    for (k, &pair) in slots.iter().enumerate() {
        let g = slot_exp(&params[k * PARAMS_PER_SLOT..(k + 1) * PARAMS_PER_SLOT]);
        apply_left(pair, &g, &mut acc);
    }
    acc
}

fn to_mat8(m: &ComplexMatrix) -> Mat8 {
    let mut out = [Z; 64];
    out.copy_from_slice(m.as_slice());
    out
}

/// A template with one generator per slot; the built unitary is cached.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamCircuit {
    template: CircuitTemplate,
    params: Vec<f64>,
    unitary: ComplexMatrix,
}

impl ParamCircuit {
    pub fn new(template: CircuitTemplate, params: Vec<f64>) -> Result<Self> {
        if params.len() != template.len() * PARAMS_PER_SLOT {
            return Err(invalid(format!(
                "template with {} slots needs {} parameters, got {}",
                template.len(),
                template.len() * PARAMS_PER_SLOT,
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(invalid("parameters must be finite"));
        }
        let unitary = ComplexMatrix::from_vec(build8(template.slots(), &params).to_vec())?;
        Ok(Self {
            template,
            params,
            unitary,
        })
    }

    pub fn zeros(template: CircuitTemplate) -> Self {
        let n = template.len() * PARAMS_PER_SLOT;
        Self::new(template, vec![0.0; n]).expect("well-formed")
    }

    pub fn template(&self) -> &CircuitTemplate {
        &self.template
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn slot_params(&self, k: usize) -> &[f64] {
        &self.params[k * PARAMS_PER_SLOT..(k + 1) * PARAMS_PER_SLOT]
    }

    /// The 4×4 unitary of slot `k`.
    pub fn slot_gate(&self, k: usize) -> ComplexMatrix {
        slot_unitary(self.slot_params(k))
    }

    /// Right-to-left product of the embedded slot gates, slot 0 applied first.
    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    /// Same circuit after relabelling qubits by `p`: every slot moves to its
    /// image pair, with the generator's tensor factors exchanged when the
    /// pair's qubit order flips.
    pub fn relabeled(&self, p: &QubitPermutation) -> Self {
        let mut slots = Vec::with_capacity(self.template.len());
        let mut params = Vec::with_capacity(self.params.len());
        for (k, &pair) in self.template.slots().iter().enumerate() {
            let (image, swapped) = pair.permuted(p);
            slots.push(image);
            let c = self.slot_params(k);
            params.extend((0..PARAMS_PER_SLOT).map(|idx| {
                if swapped {
                    c[(idx % 4) * 4 + idx / 4]
                } else {
                    c[idx]
                }
            }));
        }
        let template = CircuitTemplate::new(slots).expect("relabelling keeps adjacent slots distinct");
        Self::new(template, params).expect("well-formed")
    }

    /// The inverse circuit: slots reversed, every generator negated.
    pub fn inverse(&self) -> Self {
        let n = self.template.len();
        let params = (0..n)
            .rev()
            .flat_map(|k| self.slot_params(k).iter().map(|c| -c))
            .collect();
        Self::new(self.template.reversed(), params).expect("well-formed")
    }

    pub fn to_descriptor(&self) -> CircuitDescriptor {
        CircuitDescriptor {
            slots: self
                .template
                .slots()
                .iter()
                .enumerate()
                .map(|(k, &pair)| SlotDescriptor {
                    pair,
                    generator: self.slot_params(k).to_vec(),
                })
                .collect(),
        }
    }

    pub fn from_descriptor(d: &CircuitDescriptor) -> Result<Self> {
        if d.slots.is_empty() {
            return Err(Error::Malformed("circuit has no slots".into()));
        }
        for s in &d.slots {
            if s.generator.len() != PARAMS_PER_SLOT {
                return Err(Error::Malformed(format!(
                    "generator must have {PARAMS_PER_SLOT} entries, got {}",
                    s.generator.len()
                )));
            }
        }
        let template = CircuitTemplate::new(d.slots.iter().map(|s| s.pair).collect())?;
        let params = d.slots.iter().flat_map(|s| s.generator.iter().copied()).collect();
        Self::new(template, params)
    }
}

/// `{"slots": [{"pair": "AB", "generator": [16 reals]}, ...]}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitDescriptor {
    pub slots: Vec<SlotDescriptor>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlotDescriptor {
    pub pair: PairLabel,
    pub generator: Vec<f64>,
}

/// `1 − |tr(U†W)|/8` between the circuit's unitary and `target`.
pub fn cost(pc: &ParamCircuit, target: &ComplexMatrix) -> Result<f64> {
    if target.dim() != 8 {
        return Err(invalid("target must be 8x8"));
    }
    target.require_unitary(UNITARY_TOL)?;
    crate::matrix::distance_up_to_phase(pc.unitary(), target)
}

/// Cost of a fixed template as a function of its parameter vector.
pub struct CircuitCost {
    slots: Vec<PairLabel>,
    target_adjoint: Mat8,
}

impl CircuitCost {
    pub fn new(template: &CircuitTemplate, target: &ComplexMatrix) -> Result<Self> {
        if target.dim() != 8 {
            return Err(invalid("target must be 8x8"));
        }
        target.require_unitary(UNITARY_TOL)?;
        Ok(Self {
            slots: template.slots().to_vec(),
            target_adjoint: to_mat8(&target.adjoint()),
        })
    }

    fn cost_of(&self, w: &Mat8) -> f64 {
        // tr(T†W) with T† stored: Σᵢⱼ (T†)ᵢⱼ Wⱼᵢ
        let mut tr = Z;
        for i in 0..8 {
            for j in 0..8 {
                tr += self.target_adjoint[i * 8 + j] * w[j * 8 + i];
            }
        }
        (1.0 - tr.norm() / 8.0).clamp(0.0, 1.0)
    }
}

impl Objective for CircuitCost {
    fn dim(&self) -> usize {
        self.slots.len() * PARAMS_PER_SLOT
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.cost_of(&build8(&self.slots, x))
    }

    /// Central differences, perturbing one slot at a time: with
    /// `W = L·E(g)·R`, `tr(T†W) = tr(M·E(g))` where `M = R·T†·L`, so each
    /// probe costs one 4×4 exponential and a 16-term contraction.
    fn gradient(&self, x: &[f64], eps: f64, out: &mut [f64]) {
        let n = self.slots.len();
        let gates: Vec<Mat4> = (0..n)
            .map(|k| slot_exp(&x[k * PARAMS_PER_SLOT..(k + 1) * PARAMS_PER_SLOT]))
            .collect();
        // right[k] = G_{k-1}…G_0
        let mut right = Vec::with_capacity(n);
        let mut acc = identity8();
        for k in 0..n {
            right.push(acc);
            apply_left(self.slots[k], &gates[k], &mut acc);
        }
        // left[k] = G_{n-1}…G_{k+1}
        let mut left = vec![identity8(); n];
        let mut acc = identity8();
        for k in (0..n).rev() {
            left[k] = acc;
            apply_right(self.slots[k], &gates[k], &mut acc);
        }
        let mut probe = [0.0; PARAMS_PER_SLOT];
        for k in 0..n {
            let m = mul8(&mul8(&right[k], &self.target_adjoint), &left[k]);
            let pair = self.slots[k];
            // contraction[b][a] = Σ_s M[(s,b),(s,a)]
            let mut contraction = [Z; 16];
            for b in 0..4 {
                for a in 0..4 {
                    contraction[b * 4 + a] =
                        (0..2).map(|s| m[full_index(pair, s, b) * 8 + full_index(pair, s, a)]).sum();
                }
            }
            let value_with = |g: &Mat4| -> f64 {
                let mut tr = Z;
                for a in 0..4 {
                    for b in 0..4 {
                        tr += g[a * 4 + b] * contraction[b * 4 + a];
                    }
                }
                (1.0 - tr.norm() / 8.0).clamp(0.0, 1.0)
            };
            probe.copy_from_slice(&x[k * PARAMS_PER_SLOT..(k + 1) * PARAMS_PER_SLOT]);
            for i in 0..PARAMS_PER_SLOT {
                let orig = probe[i];
                probe[i] = orig + eps;
                let plus = value_with(&slot_exp(&probe));
                probe[i] = orig - eps;
                let minus = value_with(&slot_exp(&probe));
                probe[i] = orig;
                out[k * PARAMS_PER_SLOT + i] = (plus - minus) / (2.0 * eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{self, Qubit};
    use crate::matrix::{expm_i_hermitian, ComplexVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;
    use PairLabel::*;

    fn random_params(n: usize, rng: &mut impl Rng) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-PI..PI)).collect()
    }

    fn t(slots: &[PairLabel]) -> CircuitTemplate {
        CircuitTemplate::new(slots.to_vec()).unwrap()
    }

    #[test]
    fn pauli_basis_is_orthogonal_and_hermitian() {
        for a in 0..16 {
            let pa = pauli_product(a);
            assert!(pa.is_hermitian(0.0));
            for b in 0..16 {
                let tr = (&pa * &pauli_product(b)).trace();
                let expected = if a == b { 4.0 } else { 0.0 };
                assert!((tr.re - expected).abs() < 1e-15 && tr.im.abs() < 1e-15);
            }
        }
        let zx = pauli_product(13);
        assert_eq!(zx, gates::pauli_z().tensor(&gates::pauli_x()));
    }

    #[test]
    fn taylor_exponential_matches_eigendecomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for scale in [0.01, 1.0, PI, 10.0] {
            let c: Vec<f64> = (0..16).map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
            let taylor = slot_unitary(&c);
            let eig = expm_i_hermitian(&generator_matrix(&c));
            assert!(taylor.distance(&eig) < 1e-12, "scale {scale}: {}", taylor.distance(&eig));
            assert!(taylor.is_unitary(1e-12));
        }
    }

    #[test]
    fn zero_parameters_build_identity() {
        for template in [t(&[AB]), t(&[AB, BC, AC, AB, BC])] {
            let pc = ParamCircuit::zeros(template);
            assert!(pc.unitary().distance(&ComplexMatrix::identity(8)) < 1e-15);
        }
    }

    #[test]
    fn cnot_generator_builds_cnot() {
        // log(CNOT) = iπ|1⟩⟨1|⊗|−⟩⟨−|: read off Pauli coefficients of the projector generator.
        let minus = ComplexVector::new(vec![
            Complex64::new(1.0 / 2f64.sqrt(), 0.0),
            Complex64::new(-1.0 / 2f64.sqrt(), 0.0),
        ]);
        let one = ComplexVector::basis(2, 1);
        let proj = ComplexMatrix::outer(&one.tensor(&minus), &one.tensor(&minus)).unwrap();
        let h = proj.scale(Complex64::new(PI, 0.0));
        let coeffs = generator_coefficients(&h);
        let expected = [PI / 4.0, -PI / 4.0, -PI / 4.0, PI / 4.0];
        for (idx, e) in [0usize, 1, 12, 13].into_iter().zip(expected) {
            assert!((coeffs[idx] - e).abs() < 1e-15);
        }
        let pc = ParamCircuit::new(t(&[AB]), coeffs).unwrap();
        let target = gates::embed_pair(AB, &gates::cnot()).unwrap();
        assert!(crate::matrix::distance_up_to_phase(pc.unitary(), &target).unwrap() < 1e-14);
    }

    #[test]
    fn identity_slot_leaves_the_other() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut params = random_params(16, &mut rng);
        params.extend([0.0; 16]);
        let pc = ParamCircuit::new(t(&[AB, BC]), params.clone()).unwrap();
        let expected = gates::embed_pair(AB, &slot_unitary(&params[..16])).unwrap();
        assert!(pc.unitary().distance(&expected) < 1e-13);
    }

    #[test]
    fn built_unitary_is_ordered_product_of_embeddings() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let template = t(&[BC, AB, AC, BC]);
        let pc = ParamCircuit::new(template.clone(), random_params(64, &mut rng)).unwrap();
        let mut expected = ComplexMatrix::identity(8);
        for (k, &pair) in template.slots().iter().enumerate() {
            let g = expm_i_hermitian(&generator_matrix(pc.slot_params(k)));
            expected = &gates::embed_pair(pair, &g).unwrap() * &expected;
        }
        assert!(pc.unitary().distance(&expected) < 1e-12);
        assert!(pc.unitary().is_unitary(1e-10));
    }

    #[test]
    fn cost_examples() {
        let zero = ParamCircuit::zeros(t(&[AB, BC, AB, BC, AC]));
        assert!((cost(&zero, &gates::v_abc()).unwrap() - 0.25).abs() < 1e-15);
        assert!((cost(&zero, &gates::toffoli()).unwrap() - 0.25).abs() < 1e-15);
        assert!(cost(&zero, &ComplexMatrix::identity(4)).is_err());
    }

    #[test]
    fn fast_gradient_matches_plain_central_differences() {
        struct Plain<'a>(&'a CircuitCost);
        impl Objective for Plain<'_> {
            fn dim(&self) -> usize {
                self.0.dim()
            }
            fn value(&self, x: &[f64]) -> f64 {
                self.0.value(x)
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let template = t(&[AB, BC, AC, AB]);
        let objective = CircuitCost::new(&template, &gates::toffoli()).unwrap();
        let x = random_params(64, &mut rng);
        let (mut fast, mut plain) = (vec![0.0; 64], vec![0.0; 64]);
        objective.gradient(&x, 1e-5, &mut fast);
        Plain(&objective).gradient(&x, 1e-5, &mut plain);
        for (a, b) in fast.iter().zip(&plain) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn relabeling_and_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pc = ParamCircuit::new(t(&[AB, BC, AC]), random_params(48, &mut rng)).unwrap();
        for p in QubitPermutation::all() {
            let moved = pc.relabeled(&p);
            let expected = gates::permute_qubits(pc.unitary(), &p).unwrap();
            assert!(moved.unitary().distance(&expected) < 1e-12, "{p}");
        }
        let inv = pc.inverse();
        assert!((inv.unitary() * pc.unitary()).distance(&ComplexMatrix::identity(8)) < 1e-12);
        let _ = Qubit::A;
    }

    #[test]
    fn descriptor_roundtrip_and_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let pc = ParamCircuit::new(t(&[BC, AC]), random_params(32, &mut rng)).unwrap();
        let json = serde_json::to_string(&pc.to_descriptor()).unwrap();
        let back: CircuitDescriptor = serde_json::from_str(&json).unwrap();
        assert_eq!(ParamCircuit::from_descriptor(&back).unwrap(), pc);

        let short = CircuitDescriptor {
            slots: vec![SlotDescriptor {
                pair: AB,
                generator: vec![0.0; 15],
            }],
        };
        assert!(matches!(ParamCircuit::from_descriptor(&short), Err(Error::Malformed(_))));
        assert!(ParamCircuit::new(t(&[AB]), vec![0.0; 3]).is_err());
    }
}
