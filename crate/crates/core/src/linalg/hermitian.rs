use std::ops::{Add, Deref, Sub};

use super::{eig_hermitian, ComplexMatrix};
use crate::error::{Error, Result};
use crate::num::{cx, Cx, Real};

/// Construction tolerance on `‖A − A†‖_max`.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Square complex matrix equal to its adjoint.
///
/// Stored exactly Hermitian: construction symmetrizes to `(A + A†)/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix<T: Real = f64>(ComplexMatrix<T>);

impl<T: Real> HermitianMatrix<T> {
    /// Checked construction. The deviation bound is relative to `max(1, ‖A‖_max)`.
    pub fn new(m: ComplexMatrix<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Hermitian matrix must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let dev = m.max_diff(&m.adjoint());
        let scale = m.max_abs().max(T::one());
        if dev > T::lit(HERMITICITY_TOL) * scale {
            return Err(Error::InvalidArgument(format!(
                "matrix is not Hermitian (‖A − A†‖_max = {:e})",
                dev.as_f64()
            )));
        }
        Ok(Self::symmetrized(&m))
    }

    /// Hermitian part `(A + A†)/2` without any check.
    pub fn symmetrized(m: &ComplexMatrix<T>) -> Self {
        assert!(m.is_square(), "symmetrized needs a square matrix");
        let half = T::lit(0.5);
        let n = m.rows();
        Self(ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j {
                cx(m[(i, i)].re, T::zero())
            } else {
                (m[(i, j)] + m[(j, i)].conj()) * half
            }
        }))
    }

    pub fn zeros(n: usize) -> Self {
        Self(ComplexMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(ComplexMatrix::identity(n))
    }

    pub fn from_real_diagonal(d: &[T]) -> Self {
        Self(ComplexMatrix::from_real_diagonal(d))
    }

    /// Projector `|v⟩⟨v|` (unnormalized if `v` is).
    pub fn projector(v: &[Cx<T>]) -> Self {
        Self::symmetrized(&ComplexMatrix::outer(v, v))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.0
    }

    pub fn real_trace(&self) -> T {
        self.0.trace().re
    }

    pub fn scale(&self, s: T) -> Self {
        Self(self.0.scale(s))
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    /// `tr(AB)`, real for Hermitian arguments.
    pub fn inner(&self, other: &Self) -> T {
        self.0.hs_inner(&other.0).expect("shape checked by caller").re
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kron(&other.0))
    }

    /// `B A B†`, Hermitian for any conformable `B`.
    pub fn congruence(&self, b: &ComplexMatrix<T>) -> Result<Self> {
        let inner = b.matmul(&self.0)?;
        Ok(Self::symmetrized(&inner.matmul(&b.adjoint())?))
    }

    /// Jordan product `(AB + BA)/2`.
    pub fn jordan(&self, other: &Self) -> Self {
        let ab = &self.0 * &other.0;
        Self::symmetrized(&ab)
    }

    /// Largest absolute eigenvalue.
    pub fn op_norm(&self) -> Result<T> {
        let e = eig_hermitian(self)?;
        Ok(e.eigenvalues()
            .iter()
            .fold(T::zero(), |a, &l| a.max(l.abs())))
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        Ok(eig_hermitian(self)?.eigenvalues()[0])
    }

    pub fn max_eigenvalue(&self) -> Result<T> {
        Ok(*eig_hermitian(self)?.eigenvalues().last().expect("dim >= 1"))
    }

    /// Matrix function `f(A) = Σ f(λ_k) v_k v_k†`.
    pub fn apply_spectral(&self, f: impl Fn(T) -> T) -> Result<Self> {
        let e = eig_hermitian(self)?;
        Ok(e.reconstruct_with(f))
    }

    /// Positive square root; eigenvalues above `−clip` are zeroed, anything more
    /// negative is an error.
    pub fn sqrt_psd(&self, clip: T) -> Result<Self> {
        let e = eig_hermitian(self)?;
        if e.eigenvalues()[0] < -clip {
            return Err(Error::InvalidArgument(format!(
                "square root of a matrix with eigenvalue {:e}",
                e.eigenvalues()[0].as_f64()
            )));
        }
        Ok(e.reconstruct_with(|l| l.max(T::zero()).sqrt()))
    }

    /// `‖A² − A‖`; zero exactly for projections.
    pub fn idempotency_defect(&self) -> Result<T> {
        let sq = Self::symmetrized(&(&self.0 * &self.0));
        (&sq - self).op_norm()
    }

    pub fn max_diff(&self, other: &Self) -> T {
        self.0.max_diff(&other.0)
    }

    pub fn sum_of<'a>(items: impl IntoIterator<Item = &'a Self>, n: usize) -> Self {
        let mut acc = ComplexMatrix::zeros(n, n);
        for m in items {
            acc += &m.0;
        }
        Self(acc)
    }
}

impl<T: Real> Deref for HermitianMatrix<T> {
    type Target = ComplexMatrix<T>;

    fn deref(&self) -> &ComplexMatrix<T> {
        &self.0
    }
}

impl<T: Real> Add for &HermitianMatrix<T> {
    type Output = HermitianMatrix<T>;

    fn add(self, rhs: Self) -> HermitianMatrix<T> {
        HermitianMatrix(&self.0 + &rhs.0)
    }
}

impl<T: Real> Sub for &HermitianMatrix<T> {
    type Output = HermitianMatrix<T>;

    fn sub(self, rhs: Self) -> HermitianMatrix<T> {
        HermitianMatrix(&self.0 - &rhs.0)
    }
}

/// Number of real coordinates of an `n×n` Hermitian matrix.
pub fn hermitian_vec_len(n: usize) -> usize {
    n * n
}

/// Isometric real coordinates: diagonal entries, then `√2·Re` and `√2·Im` of the
/// strict upper triangle in row-major order.
pub fn hermitian_to_real_vec<T: Real>(a: &HermitianMatrix<T>) -> Vec<T> {
    let mut out = Vec::with_capacity(a.dim() * a.dim());
    write_real_vec(a, &mut out);
    out
}

pub(crate) fn write_real_vec<T: Real>(a: &HermitianMatrix<T>, out: &mut Vec<T>) {
    let n = a.dim();
    let r2 = T::SQRT_2();
    for i in 0..n {
        out.push(a[(i, i)].re);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let z = a[(i, j)];
            out.push(r2 * z.re);
            out.push(r2 * z.im);
        }
    }
}

/// Inverse of [`hermitian_to_real_vec`].
pub fn real_vec_to_hermitian<T: Real>(v: &[T], dim: usize) -> Result<HermitianMatrix<T>> {
    if v.len() != dim * dim {
        return Err(Error::DimensionMismatch(format!(
            "real vector of length {} for a {dim}x{dim} Hermitian matrix",
            v.len()
        )));
    }
    let mut m = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] = cx(v[i], T::zero());
    }
    let inv = T::one() / T::SQRT_2();
    let mut k = dim;
    for i in 0..dim {
        for j in (i + 1)..dim {
            let z = cx(v[k] * inv, v[k + 1] * inv);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    Ok(HermitianMatrix(m))
}

/// Orthonormal basis element `k` of the Hermitian matrices under the
/// vectorization above.
pub fn hermitian_basis<T: Real>(dim: usize, k: usize) -> HermitianMatrix<T> {
    let mut v = vec![T::zero(); dim * dim];
    v[k] = T::one();
    real_vec_to_hermitian(&v, dim).expect("basis index in range")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::new(
            2,
            2,
            vec![cx(1.0, 0.0), cx(1.0, 0.0), cx(0.0, 0.0), cx(1.0, 0.0)],
        )
        .unwrap();
        assert!(HermitianMatrix::new(m).is_err());
    }

    #[test]
    fn tiny_asymmetry_is_symmetrized() {
        let m = ComplexMatrix::new(
            2,
            2,
            vec![cx(1.0, 1e-14), cx(0.5, 0.0), cx(0.5, 1e-14), cx(1.0, 0.0)],
        )
        .unwrap();
        let h = HermitianMatrix::new(m).unwrap();
        assert_eq!(h[(0, 0)].im, 0.0);
        assert_eq!(h[(0, 1)], h[(1, 0)].conj());
    }

    #[test]
    fn basis_is_orthonormal() {
        let n = 3;
        for a in 0..n * n {
            for b in 0..n * n {
                let ip = hermitian_basis::<f64>(n, a).inner(&hermitian_basis(n, b));
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((ip - want).abs() < 1e-15);
            }
        }
    }
}
