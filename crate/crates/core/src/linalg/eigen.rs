use super::{ComplexMatrix, HermitianMatrix};
use crate::error::{Error, Result};
use crate::num::{cx, czero, Cx, Real};

/// Relative off-diagonal threshold for the Jacobi sweeps.
pub const JACOBI_TOL: f64 = 1e-14;
/// Sweep cap before reporting non-convergence.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Spectral decomposition `A = V diag(λ) V†` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct EigenDecomposition<T: Real = f64> {
    eigenvalues: Vec<T>,
    eigenvectors: ComplexMatrix<T>,
}

impl<T: Real> EigenDecomposition<T> {
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// Unitary matrix whose columns are the eigenvectors.
    pub fn eigenvectors(&self) -> &ComplexMatrix<T> {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, k: usize) -> Vec<Cx<T>> {
        self.eigenvectors.col(k)
    }

    /// `Σ_k f(λ_k) v_k v_k†`.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> HermitianMatrix<T> {
        let weights: Vec<T> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.reconstruct_with_values(&weights)
    }

    /// `Σ_k w_k v_k v_k†` for replacement eigenvalues `w`.
    pub fn reconstruct_with_values(&self, weights: &[T]) -> HermitianMatrix<T> {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        assert_eq!(weights.len(), n, "one weight per eigenvalue");
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &w) in weights.iter().enumerate() {
            if w == T::zero() {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * w;
                if vik.re == T::zero() && vik.im == T::zero() {
                    continue;
                }
                for j in i..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                out[(i, j)] = out[(j, i)].conj();
            }
        }
        HermitianMatrix::symmetrized(&out)
    }

    pub fn reconstruct(&self) -> HermitianMatrix<T> {
        self.reconstruct_with(|l| l)
    }
}

fn off_diagonal_norm<T: Real>(a: &ComplexMatrix<T>) -> T {
    let n = a.rows();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
pub fn eig_hermitian<T: Real>(h: &HermitianMatrix<T>) -> Result<EigenDecomposition<T>> {
    let n = h.dim();
    if n == 0 {
        return Err(Error::InvalidArgument("eigendecomposition of an empty matrix".into()));
    }
    let mut a: ComplexMatrix<T> = h.as_matrix().clone();
    let mut v = ComplexMatrix::<T>::identity(n);
    let fro = a.frob_norm();
    let rel = T::lit(JACOBI_TOL).max(T::epsilon() * T::lit(4.0));
    let threshold = rel * fro;

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= threshold || fro == T::zero() {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NotConverged {
                sweeps,
                residual: off.as_f64(),
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("finite eigenvalues"));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// One complex Jacobi rotation annihilating `a[p][q]`.
fn rotate<T: Real>(a: &mut ComplexMatrix<T>, v: &mut ComplexMatrix<T>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == T::zero() {
        return;
    }
    let n = a.rows();
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Skip rotations that are below the representable scale of the diagonal.
    if r < T::epsilon() * T::lit(1e-3) * (app.abs() + aqq.abs()) {
        a[(p, q)] = czero();
        a[(q, p)] = czero();
        return;
    }
    let phase = apq / r; // e^{iφ}
    let theta = (aqq - app) / (r + r);
    let t = if theta >= T::zero() {
        T::one() / (theta + (theta * theta + T::one()).sqrt())
    } else {
        -T::one() / (-theta + (theta * theta + T::one()).sqrt())
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;
    // J = D·R with D = diag(1, e^{-iφ}) on (p, q).
    let jpp = cx(c, T::zero());
    let jpq = cx(s, T::zero());
    let jqp = phase.conj() * (-s);
    let jqq = phase.conj() * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, q)] = czero();
    a[(q, p)] = czero();
    a[(p, p)] = cx(a[(p, p)].re, T::zero());
    a[(q, q)] = cx(a[(q, q)].re, T::zero());
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}

/// Frobenius-nearest positive semidefinite matrix.
pub fn psd_project<T: Real>(a: &HermitianMatrix<T>) -> Result<HermitianMatrix<T>> {
    let e = eig_hermitian(a)?;
    if e.eigenvalues()[0] >= T::zero() {
        return Ok(a.clone());
    }
    Ok(e.reconstruct_with(|l| l.max(T::zero())))
}
