//! Named gates, pair embeddings into the three-qubit space, and qubit
//! permutations.
//!
//! Qubits are ordered `A, B, C` with `A` the most significant bit, so the
//! basis index of `|abc⟩` is `4a + 2b + c`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::matrix::{tensor, ComplexMatrix, ONE, UNITARY_TOL};

pub mod registry;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Qubit {
    A,
    B,
    C,
}

impl Qubit {
    pub const ALL: [Qubit; 3] = [Qubit::A, Qubit::B, Qubit::C];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Qubit {
        Self::ALL[i]
    }

    /// Bit position of this qubit inside a three-qubit basis index.
    pub fn bit(self) -> usize {
        2 - self.index()
    }
}

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

impl FromStr for Qubit {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Qubit::A),
            "B" => Ok(Qubit::B),
            "C" => Ok(Qubit::C),
            _ => Err(invalid(format!("unknown qubit `{s}`"))),
        }
    }
}

/// Which pair of qubits a two-qubit gate acts on. Ordered `AB < BC < AC`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PairLabel {
    AB,
    BC,
    AC,
}

impl PairLabel {
    pub const ALL: [PairLabel; 3] = [PairLabel::AB, PairLabel::BC, PairLabel::AC];

    /// The two qubits, in tensor-factor order of the embedded 4×4 gate.
    pub fn qubits(self) -> (Qubit, Qubit) {
        match self {
            PairLabel::AB => (Qubit::A, Qubit::B),
            PairLabel::BC => (Qubit::B, Qubit::C),
            PairLabel::AC => (Qubit::A, Qubit::C),
        }
    }

    /// The qubit this pair leaves untouched.
    pub fn spectator(self) -> Qubit {
        match self {
            PairLabel::AB => Qubit::C,
            PairLabel::BC => Qubit::A,
            PairLabel::AC => Qubit::B,
        }
    }

    pub fn contains(self, q: Qubit) -> bool {
        self.spectator() != q
    }

    pub fn from_qubits(x: Qubit, y: Qubit) -> Result<PairLabel> {
        PairLabel::ALL
            .into_iter()
            .find(|p| p.contains(x) && p.contains(y) && x != y)
            .ok_or_else(|| invalid(format!("{x}{y} is not a pair of distinct qubits")))
    }

    /// Image of the pair under `p`, and whether the two tensor factors swap
    /// places (the image of the first qubit now sorts after the second).
    pub fn permuted(self, p: &QubitPermutation) -> (PairLabel, bool) {
        let (x, y) = self.qubits();
        let (px, py) = (p.apply(x), p.apply(y));
        let label = PairLabel::from_qubits(px, py).expect("permutation is a bijection");
        (label, px > py)
    }
}

impl fmt::Display for PairLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

impl FromStr for PairLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "AB" | "BA" => Ok(PairLabel::AB),
            "BC" | "CB" => Ok(PairLabel::BC),
            "AC" | "CA" => Ok(PairLabel::AC),
            _ => Err(invalid(format!("unknown qubit pair `{s}`"))),
        }
    }
}

/// A bijection on `{A, B, C}`; `images[k]` is where qubit `k` goes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QubitPermutation {
    images: [Qubit; 3],
}

impl QubitPermutation {
    pub fn new(images: [Qubit; 3]) -> Result<Self> {
        let mut seen = [false; 3];
        for q in images {
            seen[q.index()] = true;
        }
        if seen.iter().all(|&s| s) {
            Ok(Self { images })
        } else {
            Err(invalid(format!("{images:?} is not a permutation")))
        }
    }

    pub fn identity() -> Self {
        Self { images: Qubit::ALL }
    }

    /// Transposition of two qubits.
    pub fn swap(x: Qubit, y: Qubit) -> Self {
        let mut images = Qubit::ALL;
        images.swap(x.index(), y.index());
        Self { images }
    }

    /// All six permutations, identity first.
    pub fn all() -> Vec<QubitPermutation> {
        use Qubit::*;
        [[A, B, C], [A, C, B], [B, A, C], [B, C, A], [C, A, B], [C, B, A]]
            .into_iter()
            .map(|images| Self { images })
            .collect()
    }

    pub fn apply(&self, q: Qubit) -> Qubit {
        self.images[q.index()]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        let images = Qubit::ALL.map(|q| self.apply(other.apply(q)));
        Self { images }
    }

    pub fn inverse(&self) -> Self {
        let mut images = Qubit::ALL;
        for q in Qubit::ALL {
            images[self.apply(q).index()] = q;
        }
        Self { images }
    }

    /// Image of a basis index when qubit `k`'s bit moves to qubit `p(k)`.
    pub fn map_index(&self, index: usize) -> usize {
        Qubit::ALL.iter().fold(0, |acc, &q| {
            let bit = (index >> q.bit()) & 1;
            acc | (bit << self.apply(q).bit())
        })
    }
}

impl fmt::Display for QubitPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A→{} B→{} C→{}", self.images[0], self.images[1], self.images[2])
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Toffoli: flips `C` exactly when `A` and `B` are both 1.
pub fn toffoli() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(8);
    for i in 0..8 {
        let j = if i >= 6 { i ^ 1 } else { i };
        m[(j, i)] = ONE;
    }
    m
}

/// `I − 2|111⟩⟨111|`.
pub fn v_abc() -> ComplexMatrix {
    let mut diag = vec![ONE; 8];
    diag[7] = -ONE;
    ComplexMatrix::from_diag(&diag)
}

/// Deutsch's three-qubit controlled phase `I − (1 − e^{iθ})|111⟩⟨111|`.
pub fn deutsch(theta: f64) -> ComplexMatrix {
    let mut diag = vec![ONE; 8];
    // Exact −1 at θ = π keeps deutsch(π) == v_abc() bit for bit.
    diag[7] = if theta == PI { -ONE } else { Complex64::from_polar(1.0, theta) };
    ComplexMatrix::from_diag(&diag)
}

/// True when θ ≡ 0 (mod 2π), where the Deutsch gate degenerates to the identity.
pub fn deutsch_is_trivial(theta: f64) -> bool {
    let r = theta.rem_euclid(2.0 * PI);
    r < 1e-12 || 2.0 * PI - r < 1e-12
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OneQubitGate {
    H,
    X,
    Z,
}

impl FromStr for OneQubitGate {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "h" => Ok(Self::H),
            "x" => Ok(Self::X),
            "z" => Ok(Self::Z),
            _ => Err(invalid(format!("unknown one-qubit gate `{s}`"))),
        }
    }
}

pub fn one_qubit(g: OneQubitGate) -> ComplexMatrix {
    let rows: [[f64; 2]; 2] = match g {
        OneQubitGate::H => [[FRAC_1_SQRT_2, FRAC_1_SQRT_2], [FRAC_1_SQRT_2, -FRAC_1_SQRT_2]],
        OneQubitGate::X => [[0.0, 1.0], [1.0, 0.0]],
        OneQubitGate::Z => [[1.0, 0.0], [0.0, -1.0]],
    };
    ComplexMatrix::from_real_rows(&[&rows[0], &rows[1]]).expect("2x2")
}

pub fn hadamard() -> ComplexMatrix {
    one_qubit(OneQubitGate::H)
}

pub fn pauli_x() -> ComplexMatrix {
    one_qubit(OneQubitGate::X)
}

pub fn pauli_z() -> ComplexMatrix {
    one_qubit(OneQubitGate::Z)
}

/// Phase gate `diag(1, e^{iθ})`.
pub fn phase(theta: f64) -> ComplexMatrix {
    ComplexMatrix::from_diag(&[ONE, Complex64::from_polar(1.0, theta)])
}

/// `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ g` for a one-qubit `g`.
pub fn controlled(g: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(g.dim(), 2, "controlled() takes a one-qubit gate");
    let mut m = ComplexMatrix::identity(4);
    for i in 0..2 {
        for j in 0..2 {
            m[(2 + i, 2 + j)] = g[(i, j)];
        }
    }
    m
}

/// CNOT with the first factor as control.
pub fn cnot() -> ComplexMatrix {
    controlled(&pauli_x())
}

pub fn cz() -> ComplexMatrix {
    ComplexMatrix::from_diag(&[ONE, ONE, ONE, -ONE])
}

pub fn swap() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4);
    for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        m[(i, j)] = ONE;
    }
    m
}

/// Embeds a 4×4 gate on `pair`; identity on the spectator qubit.
pub fn embed_pair(pair: PairLabel, g: &ComplexMatrix) -> Result<ComplexMatrix> {
    if g.dim() != 4 {
        return Err(invalid(format!("two-qubit gate must be 4x4, got {0}x{0}", g.dim())));
    }
    g.require_unitary(UNITARY_TOL)?;
    Ok(embed_pair_unchecked(pair, g))
}

/// Index arithmetic only; no unitarity check.
pub(crate) fn embed_pair_unchecked(pair: PairLabel, g: &ComplexMatrix) -> ComplexMatrix {
    let (hi, lo) = pair.qubits();
    let spectator = pair.spectator();
    let local = |i: usize| (((i >> hi.bit()) & 1) << 1) | ((i >> lo.bit()) & 1);
    let mut m = ComplexMatrix::zeros(8);
    for i in 0..8 {
        for j in 0..8 {
            if (i >> spectator.bit()) & 1 == (j >> spectator.bit()) & 1 {
                m[(i, j)] = g[(local(i), local(j))];
            }
        }
    }
    m
}

/// `P u P†` where `P` is the basis permutation induced by `p`.
pub fn permute_qubits(u: &ComplexMatrix, p: &QubitPermutation) -> Result<ComplexMatrix> {
    if u.dim() != 8 {
        return Err(invalid("qubit permutation needs an 8x8 operator"));
    }
    let mut out = ComplexMatrix::zeros(8);
    for i in 0..8 {
        for j in 0..8 {
            out[(p.map_index(i), p.map_index(j))] = u[(i, j)];
        }
    }
    Ok(out)
}

/// `I_AB ⊗ H_C`.
pub fn hadamard_on_c() -> ComplexMatrix {
    tensor(&ComplexMatrix::identity(4), &hadamard())
}

/// A real diagonal matrix with the given entries (convenience for tests).
pub fn real_diag(entries: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diag(&entries.iter().map(|&x| real(x)).collect::<Vec<_>>())
}
