//! Structure predicates on two- and three-qubit unitaries: controlled-gate
//! detection, product states in two-dimensional subspaces, the
//! controlled-product form of an `AB`·`AC` pair, and the spectral and
//! locality obstructions that rule out short circuits.
//!
//! Every analyzer returns its numeric evidence alongside the verdict.
//!
//! "Controlled" has two senses here. [`is_controlled_computational`] checks
//! control in the computational basis of the control qubit;
//! [`find_control_basis`] also allows a rotated basis, i.e. control after a
//! one-qubit change of basis has been absorbed.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::gates::{self, PairLabel, Qubit};
use crate::matrix::{
    operator_schmidt_rank, reshuffle, tensor, ComplexMatrix, ComplexVector, EigenMultiset,
    DECISION_TOL, ZERO,
};
use crate::synthesis::optimizer::{Bfgs, FnObjective, LocalOptimizer, OptimizerSettings};

/// Unitarity tolerance for analyzer inputs.
const INPUT_TOL: f64 = 1e-8;

/// `|φ₀⟩⟨φ₀| ⊗ U₀ + |φ₁⟩⟨φ₁| ⊗ U₁` with the control factor pulled out.
#[derive(Clone, Debug)]
pub struct ControlledDecomposition {
    pub control: Qubit,
    pub control_basis: [ComplexVector; 2],
    /// Blocks on the remaining qubits, in their original order.
    pub blocks: [ComplexMatrix; 2],
    /// Largest Frobenius norm of the two off-diagonal blocks in `control_basis`.
    pub residual: f64,
}

impl ControlledDecomposition {
    /// Rebuilds the full operator from the decomposition.
    pub fn reassemble(&self) -> ComplexMatrix {
        let n_qubits = qubit_count(self.blocks[0].dim() * 2);
        let mut out = ComplexMatrix::zeros(self.blocks[0].dim() * 2);
        for (phi, block) in self.control_basis.iter().zip(&self.blocks) {
            let proj = ComplexMatrix::outer(phi, phi).expect("same dimension");
            out = &out + &place_control(&proj, block, self.control, n_qubits);
        }
        out
    }
}

fn qubit_count(dim: usize) -> usize {
    match dim {
        4 => 2,
        8 => 3,
        _ => panic!("expected a 4x4 or 8x8 operator"),
    }
}

fn check_control(u: &ComplexMatrix, control: Qubit) -> Result<usize> {
    let n = match u.dim() {
        4 => 2,
        8 => 3,
        d => return Err(invalid(format!("expected a 4x4 or 8x8 operator, got {d}x{d}"))),
    };
    if control.index() >= n {
        return Err(invalid(format!("a {n}-qubit operator has no qubit {control}")));
    }
    Ok(n)
}

/// Bit position of `q` in an `n`-qubit index (first qubit most significant).
fn bit_of(q: Qubit, n: usize) -> usize {
    n - 1 - q.index()
}

/// Index of the full space from a control value and a complement index.
fn join_index(control_bit: usize, value: usize, rest: usize) -> usize {
    let low = rest & ((1 << control_bit) - 1);
    let high = rest >> control_bit;
    (high << (control_bit + 1)) | (value << control_bit) | low
}

/// Block `⟨s|_q u |t⟩_q` on the remaining qubits.
fn control_block(u: &ComplexMatrix, control: Qubit, n: usize, s: usize, t: usize) -> ComplexMatrix {
    let bit = bit_of(control, n);
    let half = u.dim() / 2;
    let mut block = ComplexMatrix::zeros(half);
    for i in 0..half {
        for j in 0..half {
            block[(i, j)] = u[(join_index(bit, s, i), join_index(bit, t, j))];
        }
    }
    block
}

/// `proj` on the control qubit tensored with `rest` on the others.
fn place_control(proj: &ComplexMatrix, rest: &ComplexMatrix, control: Qubit, n: usize) -> ComplexMatrix {
    let bit = bit_of(control, n);
    let half = rest.dim();
    let mut out = ComplexMatrix::zeros(half * 2);
    for s in 0..2 {
        for t in 0..2 {
            for i in 0..half {
                for j in 0..half {
                    out[(join_index(bit, s, i), join_index(bit, t, j))] = proj[(s, t)] * rest[(i, j)];
                }
            }
        }
    }
    out
}

/// `w` on the control qubit, identity elsewhere.
fn local_on(w: &ComplexMatrix, control: Qubit, n: usize) -> ComplexMatrix {
    place_control(w, &ComplexMatrix::identity(1 << (n - 1)), control, n)
}

/// Off-diagonal block norms of `u` with respect to the computational basis of `control`.
pub fn off_diagonal_norms(u: &ComplexMatrix, control: Qubit) -> Result<[f64; 2]> {
    let n = check_control(u, control)?;
    Ok([
        control_block(u, control, n, 0, 1).frobenius_norm(),
        control_block(u, control, n, 1, 0).frobenius_norm(),
    ])
}

/// Computational-basis control test: succeeds iff both off-diagonal blocks
/// have Frobenius norm ≤ `tol`. The residual is reported either way.
pub fn is_controlled_computational(
    u: &ComplexMatrix,
    control: Qubit,
    tol: f64,
) -> Result<(f64, Option<ControlledDecomposition>)> {
    let n = check_control(u, control)?;
    u.require_unitary(INPUT_TOL)?;
    let residual = off_diagonal_norms(u, control)?.into_iter().fold(0.0, f64::max);
    if residual > tol {
        return Ok((residual, None));
    }
    Ok((
        residual,
        Some(ControlledDecomposition {
            control,
            control_basis: [ComplexVector::basis(2, 0), ComplexVector::basis(2, 1)],
            blocks: [control_block(u, control, n, 0, 0), control_block(u, control, n, 1, 1)],
            residual,
        }),
    ))
}

/// `Rz(α) Ry(β) Rz(γ)`.
pub fn euler_unitary(alpha: f64, beta: f64, gamma: f64) -> ComplexMatrix {
    let rz = |t: f64| ComplexMatrix::from_diag(&[Complex64::from_polar(1.0, -t / 2.0), Complex64::from_polar(1.0, t / 2.0)]);
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let ry = ComplexMatrix::from_real_rows(&[&[c, -s], &[s, c]]).expect("2x2");
    &(&rz(alpha) * &ry) * &rz(gamma)
}

/// Settings of the rotated-basis control search.
#[derive(Clone, Debug)]
pub struct BasisSearch {
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
}

impl Default for BasisSearch {
    fn default() -> Self {
        Self {
            tol: DECISION_TOL,
            restarts: 8,
            seed: 0,
            max_iters: 2000,
        }
    }
}

/// Outcome of the rotated-basis search: the best residual over all restarts,
/// the restart that produced it, and the decomposition when it is ≤ tol.
#[derive(Clone, Debug)]
pub struct BasisSearchOutcome {
    pub residual: f64,
    pub restart: usize,
    pub decomposition: Option<ControlledDecomposition>,
}

/// Searches one-qubit basis changes `w` on the control qubit so that
/// `(w†⊗I) u (w⊗I)` is controlled in the computational basis.
///
/// Multi-start local descent over the three Euler angles of `w`, minimizing
/// the squared off-diagonal block norm. The winner is the least
/// `(residual, restart index)`, so the outcome depends only on the seed.
pub fn find_control_basis(u: &ComplexMatrix, control: Qubit, search: &BasisSearch) -> Result<BasisSearchOutcome> {
    let n = check_control(u, control)?;
    u.require_unitary(INPUT_TOL)?;
    let rotated = |x: &[f64]| {
        let w = local_on(&euler_unitary(x[0], x[1], x[2]), control, n);
        &(&w.adjoint() * u) * &w
    };
    let objective = FnObjective::new(3, |x: &[f64]| {
        let r = rotated(x);
        let [a, b] = off_diagonal_norms(&r, control).expect("checked");
        a * a + b * b
    });
    let settings = OptimizerSettings {
        max_iters: search.max_iters,
        step_size: 1.0,
        grad_epsilon: 1e-6,
        target_cost: (search.tol * 1e-2).powi(2),
        grad_tol: 1e-14,
        record_trace: false,
    };
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    for restart in 0..search.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(search.seed ^ (restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let x0: Vec<f64> = (0..3).map(|_| rng.gen_range(-PI..PI)).collect();
        let m = Bfgs.minimize(&objective, x0, &settings);
        let residual = off_diagonal_norms(&rotated(&m.x), control)?.into_iter().fold(0.0, f64::max);
        if best.as_ref().map_or(true, |(r, _, _)| residual < *r) {
            best = Some((residual, restart, m.x));
        }
    }
    let (residual, restart, x) = best.expect("at least one restart");
    let decomposition = (residual <= search.tol).then(|| {
        let w = euler_unitary(x[0], x[1], x[2]);
        let r = rotated(&x);
        ControlledDecomposition {
            control,
            control_basis: [w.column(0), w.column(1)],
            blocks: [control_block(&r, control, n, 0, 0), control_block(&r, control, n, 1, 1)],
            residual,
        }
    });
    Ok(BasisSearchOutcome {
        residual,
        restart,
        decomposition,
    })
}

/// 2×2 reshaping `M[i][j] = v[2i + j]` of a two-qubit vector.
fn reshape2(v: &ComplexVector) -> [[Complex64; 2]; 2] {
    [[v[0], v[1]], [v[2], v[3]]]
}

fn det2(m: [[Complex64; 2]; 2]) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// A product state in `span{u, v}` of two linearly independent two-qubit vectors.
///
/// Solves `a²·det(Mᵤ) + ab·m + b²·det(Mᵥ) = 0` with
/// `m = det(Mᵤ + Mᵥ) − det(Mᵤ) − det(Mᵥ)`; the returned `a·u + b·v` is normalized.
pub fn product_state_in_span(u: &ComplexVector, v: &ComplexVector) -> Result<ComplexVector> {
    if u.dim() != 4 || v.dim() != 4 {
        return Err(invalid("product_state_in_span takes two-qubit vectors"));
    }
    let gram = u.norm().powi(2) * v.norm().powi(2) - u.inner(v).norm_sqr();
    if gram <= 1e-12 {
        return Err(invalid(format!("vectors are linearly dependent (Gram determinant {gram:.3e})")));
    }
    let (mu, mv) = (reshape2(u), reshape2(v));
    let du = det2(mu);
    let dv = det2(mv);
    let sum = [[mu[0][0] + mv[0][0], mu[0][1] + mv[0][1]], [mu[1][0] + mv[1][0], mu[1][1] + mv[1][1]]];
    let m = det2(sum) - du - dv;
    let scale = u.norm().powi(2).max(v.norm().powi(2));
    if du.norm() <= 1e-14 * scale {
        return Ok(u.normalized());
    }
    // Roots a/b of du·t² + m·t + dv = 0, via the cancellation-free pair q/du, dv/q.
    let disc = (m * m - du * dv * 4.0).sqrt();
    let q = if (m.conj() * disc).re >= 0.0 { -(m + disc) / 2.0 } else { -(m - disc) / 2.0 };
    if q.norm() <= 1e-300 {
        // m = 0 and du·dv = 0 with du ≠ 0: v itself is product.
        return Ok(v.normalized());
    }
    let candidates = [q / du, dv / q];
    // Prefer the root with the smaller magnitude; both zero the determinant.
    let t = if candidates[0].norm() <= candidates[1].norm() { candidates[0] } else { candidates[1] };
    Ok((&u.scale(t) + v).normalized())
}

/// Returns `g` when `u` equals `embed_pair(pair, g)` within `tol`.
pub fn extract_pair_gate(u: &ComplexMatrix, pair: PairLabel, tol: f64) -> Option<ComplexMatrix> {
    if u.dim() != 8 {
        return None;
    }
    let (hi, lo) = pair.qubits();
    let index = |l: usize| ((l >> 1) << hi.bit()) | ((l & 1) << lo.bit());
    let mut g = ComplexMatrix::zeros(4);
    for a in 0..4 {
        for b in 0..4 {
            g[(a, b)] = u[(index(a), index(b))];
        }
    }
    (gates::embed_pair_unchecked(pair, &g).distance(u) <= tol).then_some(g)
}

/// Rank-1 factorization `block ≈ v ⊗ w` of a 4×4 across its two qubits.
///
/// Uses the top singular pair of the realigned block; fails when the second
/// singular value exceeds `tol`. The phase is split so that the first
/// largest-modulus entry of `v` is real and positive.
pub fn factor_product(block: &ComplexMatrix, tol: f64) -> Result<Option<(ComplexMatrix, ComplexMatrix)>> {
    if block.dim() != 4 {
        return Err(invalid("factor_product expects a 4x4 block"));
    }
    let r = reshuffle(block, [2, 2])?;
    let svd = r.svd(true, true);
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let (s1, s2) = (svd.singular_values[order[0]], svd.singular_values[order[1]]);
    if s2 > tol {
        return Ok(None);
    }
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    let k = order[0];
    let norm = block.frobenius_norm() / 2.0;
    let sqrt2 = 2f64.sqrt() * norm.sqrt();
    let mut left = ComplexMatrix::zeros(2);
    let mut right = ComplexMatrix::zeros(2);
    for a in 0..2 {
        for b in 0..2 {
            left[(a, b)] = u[(a * 2 + b, k)] * sqrt2;
            right[(a, b)] = v_t[(k, a * 2 + b)] * (s1 / sqrt2);
        }
    }
    let entries = left.as_slice();
    let max = entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pivot = entries
        .iter()
        .find(|z| z.norm() >= max - 1e-12)
        .copied()
        .unwrap_or(Complex64::new(1.0, 0.0));
    let phase = pivot / pivot.norm();
    Ok(Some((left.scale(phase.conj()), right.scale(phase))))
}

/// One-qubit factors of `uAB·uAC = |0⟩⟨0|⊗v_B1⊗w_C1 + |1⟩⟨1|⊗v_B2⊗w_C2`.
#[derive(Clone, Debug)]
pub struct ControlledProductForm {
    pub v_b: [ComplexMatrix; 2],
    pub w_c: [ComplexMatrix; 2],
    pub residual: f64,
}

/// Factors a product of an `AB` gate and an `AC` gate that is controlled on
/// `A`. `Ok(None)` when the product is not controlled on `A` (computational
/// basis) or a block does not factor.
pub fn controlled_product_form(
    u_ab: &ComplexMatrix,
    u_ac: &ComplexMatrix,
    tol: f64,
) -> Result<Option<ControlledProductForm>> {
    if extract_pair_gate(u_ab, PairLabel::AB, DECISION_TOL).is_none() {
        return Err(invalid("first operand is not a gate on AB"));
    }
    if extract_pair_gate(u_ac, PairLabel::AC, DECISION_TOL).is_none() {
        return Err(invalid("second operand is not a gate on AC"));
    }
    let product = u_ab * u_ac;
    let (_, Some(dec)) = is_controlled_computational(&product, Qubit::A, tol)? else {
        return Ok(None);
    };
    let mut v_b = Vec::with_capacity(2);
    let mut w_c = Vec::with_capacity(2);
    for block in &dec.blocks {
        match factor_product(block, tol)? {
            Some((v, w)) => {
                v_b.push(v);
                w_c.push(w);
            }
            None => return Ok(None),
        }
    }
    let p0 = ComplexMatrix::outer(&ComplexVector::basis(2, 0), &ComplexVector::basis(2, 0))?;
    let p1 = ComplexMatrix::outer(&ComplexVector::basis(2, 1), &ComplexVector::basis(2, 1))?;
    let rebuilt = &tensor(&p0, &tensor(&v_b[0], &w_c[0])) + &tensor(&p1, &tensor(&v_b[1], &w_c[1]));
    let residual = rebuilt.distance(&product);
    if residual > tol {
        return Ok(None);
    }
    let [v0, v1]: [ComplexMatrix; 2] = v_b.try_into().expect("two blocks");
    let [w0, w1]: [ComplexMatrix; 2] = w_c.try_into().expect("two blocks");
    Ok(Some(ControlledProductForm {
        v_b: [v0, v1],
        w_c: [w0, w1],
        residual,
    }))
}

/// Witness of the pair-product test on a four-element spectrum.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairProduct {
    pub holds: bool,
    /// Index pairing `{i,j}|{k,l}` that satisfied the test.
    pub pairing: Option<[[usize; 2]; 2]>,
    /// `|λᵢλⱼ − λₖλₗ|` for the three pairings, in the order of [`PAIRINGS`].
    pub gaps: [f64; 3],
}

pub const PAIRINGS: [[[usize; 2]; 2]; 3] = [[[0, 1], [2, 3]], [[0, 2], [1, 3]], [[0, 3], [1, 2]]];

/// True iff the four eigenvalues split into two pairs with equal products
/// (within `tol`), as every spectrum of a local unitary `a ⊗ b` does.
pub fn eigen_pair_product_exists(e: &EigenMultiset, tol: f64) -> Result<PairProduct> {
    if e.len() != 4 {
        return Err(invalid(format!("pair-product test needs 4 eigenvalues, got {}", e.len())));
    }
    let v = &e.values;
    let gaps = PAIRINGS.map(|[[i, j], [k, l]]| (v[i] * v[j] - v[k] * v[l]).norm());
    let best = (0..3).min_by(|&a, &b| gaps[a].total_cmp(&gaps[b])).expect("three pairings");
    let holds = gaps[best] <= tol;
    Ok(PairProduct {
        holds,
        pairing: holds.then_some(PAIRINGS[best]),
        gaps,
    })
}

/// Chordal distance on the Riemann sphere; `|a − b|` for unit-modulus inputs.
pub fn chordal_distance(a: Complex64, b: Complex64) -> f64 {
    2.0 * (a - b).norm() / ((1.0 + a.norm_sqr()) * (1.0 + b.norm_sqr())).sqrt()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MultisetMatch {
    pub matched: bool,
    /// Largest matched chordal distance of the optimal (bottleneck) assignment.
    pub max_distance: f64,
    /// `assignment[i]` is the index in `b` matched to `a[i]`.
    pub assignment: Vec<usize>,
}

/// Multiset equality up to `tol`, decided by the bottleneck assignment
/// minimizing the largest chordal distance.
pub fn eigen_multiset_match(a: &EigenMultiset, b: &EigenMultiset, tol: f64) -> Result<MultisetMatch> {
    if a.len() != b.len() {
        return Err(invalid(format!("multisets differ in size ({} vs {})", a.len(), b.len())));
    }
    let n = a.len();
    let dist: Vec<Vec<f64>> = a
        .values
        .iter()
        .map(|&x| b.values.iter().map(|&y| chordal_distance(x, y)).collect())
        .collect();
    let mut thresholds: Vec<f64> = dist.iter().flatten().copied().collect();
    thresholds.sort_by(|x, y| x.total_cmp(y));
    thresholds.dedup();
    if n == 0 {
        return Ok(MultisetMatch {
            matched: true,
            max_distance: 0.0,
            assignment: vec![],
        });
    }
    // Smallest threshold admitting a perfect matching (binary search).
    let (mut lo, mut hi) = (0, thresholds.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching(&dist, thresholds[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let max_distance = thresholds[lo];
    let assignment = perfect_matching(&dist, max_distance).expect("largest threshold always matches");
    Ok(MultisetMatch {
        matched: max_distance <= tol,
        max_distance,
        assignment,
    })
}

/// Kuhn's augmenting paths on the graph of pairs with distance ≤ `limit`.
fn perfect_matching(dist: &[Vec<f64>], limit: f64) -> Option<Vec<usize>> {
    let n = dist.len();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    fn augment(i: usize, dist: &[Vec<f64>], limit: f64, seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for j in 0..dist.len() {
            if dist[i][j] <= limit && !seen[j] {
                seen[j] = true;
                if owner[j].map_or(true, |k| augment(k, dist, limit, seen, owner)) {
                    owner[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    for i in 0..n {
        let mut seen = vec![false; n];
        if !augment(i, dist, limit, &mut seen, &mut owner) {
            return None;
        }
    }
    let mut assignment = vec![0; n];
    for (j, o) in owner.iter().enumerate() {
        assignment[o.expect("perfect")] = j;
    }
    Some(assignment)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Locality {
    pub local: bool,
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

/// True iff `u` is a tensor product across `dims` (operator Schmidt rank 1).
pub fn is_local_product(u: &ComplexMatrix, dims: [usize; 2], tol: f64) -> Result<Locality> {
    let s = operator_schmidt_rank(u, dims, tol)?;
    Ok(Locality {
        local: s.rank == 1,
        rank: s.rank,
        singular_values: s.singular_values,
    })
}

/// Whether a product state `|0⟩_control ⊗ |y⟩` keeps its control factor in
/// `|0⟩`: the weight that leaks into `|1⟩_control`, maximized over `ys`.
pub fn control_leakage(u: &ComplexMatrix, control: Qubit, ys: &[ComplexVector]) -> Result<f64> {
    let n = check_control(u, control)?;
    let mut worst: f64 = 0.0;
    for y in ys {
        let input = place_vector(&ComplexVector::basis(2, 0), y, control, n);
        let out = u.apply(&input);
        let bit = bit_of(control, n);
        let leak: f64 = (0..out.dim())
            .filter(|i| (i >> bit) & 1 == 1)
            .map(|i| out[i].norm_sqr())
            .sum();
        worst = worst.max(leak);
    }
    Ok(worst)
}

fn place_vector(c: &ComplexVector, rest: &ComplexVector, control: Qubit, n: usize) -> ComplexVector {
    let bit = bit_of(control, n);
    let mut data = vec![ZERO; 2 * rest.dim()];
    for s in 0..2 {
        for i in 0..rest.dim() {
            data[join_index(bit, s, i)] = c[s] * rest[i];
        }
    }
    ComplexVector::new(data)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObstructionKind {
    EigenMultisetMismatch,
    PairProductFails,
    NonlocalOperator,
    None,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Witness {
    Eigenvalues { values: Vec<[f64; 2]>, gaps: Vec<f64> },
    SingularValues { values: Vec<f64> },
    BlockNorms { values: Vec<f64> },
}

/// An obstruction verdict packaged with its evidence.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub kind: ObstructionKind,
    pub witness: Witness,
}

impl ObstructionReport {
    pub fn obstructed(&self) -> bool {
        self.kind != ObstructionKind::None
    }

    pub fn from_pair_product(e: &EigenMultiset, tol: f64) -> Result<Self> {
        let p = eigen_pair_product_exists(e, tol)?;
        Ok(Self {
            kind: if p.holds { ObstructionKind::None } else { ObstructionKind::PairProductFails },
            witness: Witness::Eigenvalues {
                values: e.values.iter().map(|z| [z.re, z.im]).collect(),
                gaps: p.gaps.to_vec(),
            },
        })
    }

    pub fn from_locality(u: &ComplexMatrix, dims: [usize; 2], tol: f64) -> Result<Self> {
        let l = is_local_product(u, dims, tol)?;
        Ok(Self {
            kind: if l.local { ObstructionKind::None } else { ObstructionKind::NonlocalOperator },
            witness: Witness::SingularValues { values: l.singular_values },
        })
    }

    pub fn from_multisets(a: &EigenMultiset, b: &EigenMultiset, tol: f64) -> Result<Self> {
        let m = eigen_multiset_match(a, b, tol)?;
        Ok(Self {
            kind: if m.matched { ObstructionKind::None } else { ObstructionKind::EigenMultisetMismatch },
            witness: Witness::Eigenvalues {
                values: a.values.iter().chain(&b.values).map(|z| [z.re, z.im]).collect(),
                gaps: vec![m.max_distance],
            },
        })
    }
}

/// Replays the three-gate impossibility argument on candidate factors.
///
/// `factors` are the 4×4 slot gates in time order for a template of shape
/// `(x, y, x)` or `(x, y, z)`; `target` must be controlled in the
/// computational basis on the qubit singled out by the shape.
///
/// * `(x, y, x)`: with `q` the qubit outside `x`, `M = E(s₂)†·T·E(s₀)†` must
///   be the middle gate, so its control blocks satisfy `M₀†M₁ = I ⊗ w` and
///   the spectrum of `M₀†M₁` must pass the pair-product test.
/// * `(x, y, z)`: with `q` the qubit shared by the first two slots,
///   `M = E(s₂)†·T` is the product of the first two gates, so `M₀†M₁` must be
///   a local operator.
///
/// Both `M₀†M₁` reduce to `T₀†T₁` up to similarity by the candidate factors,
/// so the obstruction does not depend on which factors are supplied.
pub fn replay_three_gate(
    slots: &[PairLabel],
    factors: &[ComplexMatrix],
    target: &ComplexMatrix,
    tol: f64,
) -> Result<ObstructionReport> {
    if slots.len() != 3 || factors.len() != 3 {
        return Err(invalid("three-gate replay needs three slots and three factors"));
    }
    if target.dim() != 8 {
        return Err(invalid("target must be 8x8"));
    }
    let embedded: Vec<ComplexMatrix> = slots
        .iter()
        .zip(factors)
        .map(|(&p, g)| gates::embed_pair(p, g))
        .collect::<Result<_>>()?;
    let (m, control, relative_is_paired) = if slots[0] == slots[2] && slots[0] != slots[1] {
        let q = slots[0].spectator();
        (&(&embedded[2].adjoint() * target) * &embedded[0].adjoint(), q, true)
    } else if slots[0] != slots[1] && slots[1] != slots[2] && slots[0] != slots[2] {
        let q = slots[2].spectator();
        (&embedded[2].adjoint() * target, q, false)
    } else {
        return Err(invalid("three-gate replay supports shapes (x,y,x) and (x,y,z)"));
    };
    let norms = off_diagonal_norms(&m, control)?;
    if norms.iter().any(|&x| x > tol) {
        return Err(invalid(format!("target is not controlled on {control} in the computational basis")));
    }
    let n = 3;
    let relative = &control_block(&m, control, n, 0, 0).adjoint() * &control_block(&m, control, n, 1, 1);
    if relative_is_paired {
        let spectrum = EigenMultiset::new(crate::matrix::eigenvalues(&relative)?);
        ObstructionReport::from_pair_product(&spectrum, tol)
    } else {
        ObstructionReport::from_locality(&relative, [2, 2], tol)
    }
}
