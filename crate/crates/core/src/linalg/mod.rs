//! Dense complex linear algebra kernel.
//!
//! Everything here is generic over [`Real`] so the same code runs in `f32` and
//! `f64`; the rest of the crate uses the `f64` aliases from the crate root.

mod eigen;
mod hermitian;
mod matrix;

pub use eigen::{eig_hermitian, psd_project, EigenDecomposition, JACOBI_MAX_SWEEPS, JACOBI_TOL};
pub use hermitian::{
    hermitian_basis, hermitian_to_real_vec, hermitian_vec_len, real_vec_to_hermitian,
    HermitianMatrix, HERMITICITY_TOL,
};
pub(crate) use hermitian::write_real_vec;
pub use matrix::ComplexMatrix;

use crate::error::{Error, Result};
use crate::num::{czero, Real};

/// Which factor of a bipartite space to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Bipartite partial trace on `C^{d1} ⊗ C^{d2}`.
pub fn partial_trace<T: Real>(
    a: &HermitianMatrix<T>,
    dims: (usize, usize),
    keep: Subsystem,
) -> Result<HermitianMatrix<T>> {
    let keep_idx = match keep {
        Subsystem::First => 0,
        Subsystem::Second => 1,
    };
    partial_trace_multi(a, &[dims.0, dims.1], &[keep_idx])
}

/// Partial trace over every factor not listed in `keep` (which must be
/// strictly increasing). The kept factors stay in their original order.
pub fn partial_trace_multi<T: Real>(
    a: &HermitianMatrix<T>,
    dims: &[usize],
    keep: &[usize],
) -> Result<HermitianMatrix<T>> {
    let total: usize = dims.iter().product();
    if total != a.dim() {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dims {dims:?} multiply to {total}, matrix is {}x{}",
            a.dim(),
            a.dim()
        )));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidArgument(format!(
            "kept subsystems {keep:?} must be increasing indices below {}",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let env_dim: usize = traced_dims.iter().product();

    // Row-major strides of the full index.
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let compose = |kept_multi: usize, env_multi: usize| -> usize {
        let mut idx = 0;
        let mut r = kept_multi;
        for (pos, &k) in keep.iter().enumerate().rev() {
            let d = kept_dims[pos];
            idx += (r % d) * strides[k];
            r /= d;
        }
        let mut r = env_multi;
        for (pos, &k) in traced.iter().enumerate().rev() {
            let d = traced_dims[pos];
            idx += (r % d) * strides[k];
            r /= d;
        }
        idx
    };

    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    for i in 0..out_dim {
        for j in 0..out_dim {
            let mut s = czero();
            for e in 0..env_dim {
                s += a[(compose(i, e), compose(j, e))];
            }
            out[(i, j)] = s;
        }
    }
    Ok(HermitianMatrix::symmetrized(&out))
}

/// Kronecker product of a list of matrices.
pub fn kron_all<T: Real>(items: &[&ComplexMatrix<T>]) -> ComplexMatrix<T> {
    let mut acc = ComplexMatrix::identity(1);
    for m in items {
        acc = acc.kron(m);
    }
    acc
}

/// Frobenius norm.
pub fn frob_norm<T: Real>(a: &ComplexMatrix<T>) -> T {
    a.frob_norm()
}

/// Operator norm: largest singular value.
pub fn op_norm<T: Real>(a: &ComplexMatrix<T>) -> Result<T> {
    a.op_norm()
}

/// `‖U†U − I‖_max`.
pub fn unitarity_defect<T: Real>(u: &ComplexMatrix<T>) -> T {
    let g = &u.adjoint() * u;
    g.max_diff(&ComplexMatrix::identity(u.cols()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::cx;

    fn bell_projector() -> HermitianMatrix<f64> {
        let s = 0.5f64.sqrt();
        let v = vec![cx(s, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(s, 0.0)];
        HermitianMatrix::projector(&v)
    }

    #[test]
    fn partial_trace_of_product() {
        let rho = HermitianMatrix::from_real_diagonal(&[0.3, 0.7]);
        let sigma = HermitianMatrix::from_real_diagonal(&[0.1, 0.5, 0.4]);
        let prod = rho.kron(&sigma);
        let r = partial_trace(&prod, (2, 3), Subsystem::First).unwrap();
        assert!(r.max_diff(&rho) < 1e-15);
        let s = partial_trace(&prod, (2, 3), Subsystem::Second).unwrap();
        assert!(s.max_diff(&sigma) < 1e-15);
    }

    #[test]
    fn reduced_bell_state_is_maximally_mixed() {
        let r = partial_trace(&bell_projector(), (2, 2), Subsystem::First).unwrap();
        assert!(r.max_diff(&HermitianMatrix::identity(2).scale(0.5)) < 1e-15);
    }

    #[test]
    fn identity_choi_reduces_to_identity() {
        // Σ_ij |ii⟩⟨jj| traced over the input factor.
        let j = bell_projector().scale(2.0);
        let r = partial_trace(&j, (2, 2), Subsystem::Second).unwrap();
        assert!(r.max_diff(&HermitianMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn tripartite_middle_trace() {
        let a = HermitianMatrix::from_real_diagonal(&[0.25, 0.75]);
        let b = HermitianMatrix::from_real_diagonal(&[0.5, 0.5]);
        let c = HermitianMatrix::from_real_diagonal(&[0.9, 0.1]);
        let abc = a.kron(&b).kron(&c);
        let ac = partial_trace_multi(&abc, &[2, 2, 2], &[0, 2]).unwrap();
        assert!(ac.max_diff(&a.kron(&c)) < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = HermitianMatrix::<f64>::identity(4);
        assert!(partial_trace(&a, (2, 3), Subsystem::First).is_err());
    }
}
