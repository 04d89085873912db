//! Seeded random devices for tests and spot checks.

use super::{Channel, Observable, State, StochasticMatrix};
use crate::error::{Error, Result};
use crate::num::cx;
use crate::{Hermitian, Matrix};
use rand::Rng;
use rand_distr::StandardNormal;

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Matrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        cx(s * re, s * im)
    })
}

/// Haar-random unitary via Gram–Schmidt on a Ginibre matrix.
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> Matrix {
    let g = ginibre(d, d, rng);
    let mut cols: Vec<Vec<crate::C64>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut v = g.col(j);
        for q in &cols {
            let ip: crate::C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= ip * qi;
            }
        }
        let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|c| c / n).collect());
    }
    Matrix::from_fn(d, d, |i, j| cols[j][i])
}

fn random_psd(d: usize, rank: usize, rng: &mut impl Rng) -> Hermitian {
    let g = ginibre(d, rank, rng);
    Hermitian::symmetrized(&g.matmul(&g.adjoint()).expect("conformable"))
}

/// Full-rank random density matrix.
pub fn random_state(d: usize, rng: &mut impl Rng) -> State {
    let a = random_psd(d, d, rng);
    let t = a.real_trace();
    State::with_tolerance(a.scale(1.0 / t), 1e-9).expect("normalized PSD")
}

pub fn random_pure_state(d: usize, rng: &mut impl Rng) -> State {
    State::pure(&ginibre(d, 1, rng).col(0)).expect("nonzero")
}

/// `m` effects `S^{-1/2} A_x S^{-1/2}` with `S = Σ A_x` and random PSD `A_x`
/// of the given rank.
pub fn random_povm_with_rank(d: usize, m: usize, rank: usize, rng: &mut impl Rng) -> Result<Observable> {
    let parts: Vec<Hermitian> = (0..m).map(|_| random_psd(d, rank, rng)).collect();
    let total = Hermitian::sum_of(&parts, d);
    let inv_sqrt = total.apply_spectral(|l| 1.0 / l.sqrt())?;
    let effects = parts
        .iter()
        .map(|a| a.congruence(inv_sqrt.as_matrix()))
        .collect::<Result<Vec<_>>>()?;
    Observable::with_tolerance(effects, 1e-9)
}

pub fn random_povm(d: usize, m: usize, rng: &mut impl Rng) -> Result<Observable> {
    random_povm_with_rank(d, m, d, rng)
}

/// Random channel with `r` Kraus operators: an isometry `V (V†V)^{-1/2}` cut
/// into blocks.
pub fn random_channel(din: usize, dout: usize, r: usize, rng: &mut impl Rng) -> Result<Channel> {
    if r == 0 || dout * r < din {
        return Err(Error::Precondition(format!("{r} Kraus operators cannot form a {din}→{dout} channel")));
    }
    let g = ginibre(dout * r, din, rng);
    let gram = Hermitian::symmetrized(&g.adjoint().matmul(&g)?);
    let inv_sqrt = gram.apply_spectral(|l| 1.0 / l.sqrt())?;
    let v = g.matmul(inv_sqrt.as_matrix())?;
    let kraus = (0..r)
        .map(|k| Matrix::from_fn(dout, din, |o, i| v[(k * dout + o, i)]))
        .collect();
    Channel::from_kraus(kraus)
}

/// Column-stochastic matrix with uniform-simplex-like columns.
pub fn random_stochastic(rows: usize, cols: usize, rng: &mut impl Rng) -> StochasticMatrix {
    let mut data = vec![0.0; rows * cols];
    for x in 0..cols {
        let w: Vec<f64> = (0..rows).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let s: f64 = w.iter().sum();
        for y in 0..rows {
            data[y * cols + x] = w[y] / s;
        }
    }
    StochasticMatrix::with_tolerance(rows, cols, data, 1e-12).expect("normalized columns")
}
