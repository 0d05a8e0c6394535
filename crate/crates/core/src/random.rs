//! Seeded random unitaries and states for property checks and restarts.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::matrix::{ComplexMatrix, ComplexVector};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-distributed unitary: Gram-Schmidt on a complex Ginibre matrix,
/// which leaves a positive diagonal in the implied R factor.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<Complex64> = (0..dim).map(|_| gaussian(rng)).collect();
        for q in &cols {
            let proj: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, qi) in v.iter_mut().zip(q) {
                *x -= proj * qi;
            }
        }
        let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if n < 1e-8 {
            continue;
        }
        cols.push(v.into_iter().map(|x| x / n).collect());
    }
    let mut m = ComplexMatrix::zeros(dim);
    for (j, col) in cols.iter().enumerate() {
        for (i, &x) in col.iter().enumerate() {
            m[(i, j)] = x;
        }
    }
    m
}

/// Uniformly random pure state.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexVector {
    ComplexVector::new((0..dim).map(|_| gaussian(rng)).collect()).normalized()
}
