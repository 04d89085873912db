use crate::error::{Error, Result};
use crate::linalg::{hermitian_basis, hermitian_to_real_vec, HermitianMatrix};
use crate::num::Real;

/// Handle to a declared variable block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockId(pub(crate) usize);

impl BlockId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    /// Hermitian positive semidefinite matrix of the given dimension.
    Psd(usize),
    /// Nonnegative real scalar.
    NonnegScalar,
}

impl BlockKind {
    /// Length of the real vectorization.
    pub fn vec_len(self) -> usize {
        match self {
            BlockKind::Psd(n) => n * n,
            BlockKind::NonnegScalar => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Block<T: Real = f64> {
    pub kind: BlockKind,
    /// Upper bound on the trace (value, for scalars).
    pub trace_cap: T,
}

/// `Σ_terms ⟨coeff, vec(block)⟩ = rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint<T: Real = f64> {
    pub terms: Vec<(BlockId, Vec<T>)>,
    pub rhs: T,
}

/// Real-linear map between vectorized blocks, stored densely
/// (`out_len` rows × `in_len` columns).
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap<T: Real = f64> {
    in_len: usize,
    out_len: usize,
    data: Vec<T>,
}

impl<T: Real> LinearMap<T> {
    /// Tabulates a Hermiticity-preserving map on `in_dim×in_dim` matrices.
    pub fn from_fn(
        in_dim: usize,
        out_dim: usize,
        f: impl Fn(&HermitianMatrix<T>) -> Result<HermitianMatrix<T>>,
    ) -> Result<Self> {
        let in_len = in_dim * in_dim;
        let out_len = out_dim * out_dim;
        let mut data = vec![T::zero(); in_len * out_len];
        for k in 0..in_len {
            let image = f(&hermitian_basis(in_dim, k))?;
            if image.dim() != out_dim {
                return Err(Error::DimensionMismatch(format!(
                    "map image has dim {}, expected {out_dim}",
                    image.dim()
                )));
            }
            for (r, v) in hermitian_to_real_vec(&image).into_iter().enumerate() {
                data[r * in_len + k] = v;
            }
        }
        Ok(Self {
            in_len,
            out_len,
            data,
        })
    }

    /// `X ↦ s·X` on `dim×dim` matrices.
    pub fn scaled_identity(dim: usize, s: T) -> Self {
        let n = dim * dim;
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = s;
        }
        Self {
            in_len: n,
            out_len: n,
            data,
        }
    }

    /// Scalar block times a fixed Hermitian matrix: `t ↦ t·H`.
    pub fn scalar_times(h: &HermitianMatrix<T>) -> Self {
        let data = hermitian_to_real_vec(h);
        Self {
            in_len: 1,
            out_len: data.len(),
            data,
        }
    }

    /// Linear functional on a block, as a single-row map.
    pub fn functional(coeffs: Vec<T>) -> Self {
        Self {
            in_len: coeffs.len(),
            out_len: 1,
            data: coeffs,
        }
    }

    pub fn scaled(mut self, s: T) -> Self {
        for v in &mut self.data {
            *v *= s;
        }
        self
    }

    pub fn in_len(&self) -> usize {
        self.in_len
    }

    pub fn out_len(&self) -> usize {
        self.out_len
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.in_len..(r + 1) * self.in_len]
    }
}

/// Block-structured feasibility instance: find PSD blocks and nonnegative
/// scalars, each under its trace cap, satisfying affine equalities.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SdpProblem<T: Real = f64> {
    blocks: Vec<Block<T>>,
    constraints: Vec<Constraint<T>>,
}

impl<T: Real> SdpProblem<T> {
    pub fn new() -> Self {
        Self {
            blocks: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn add_psd(&mut self, dim: usize, trace_cap: T) -> BlockId {
        self.add_block(BlockKind::Psd(dim), trace_cap)
    }

    pub fn add_scalar(&mut self, cap: T) -> BlockId {
        self.add_block(BlockKind::NonnegScalar, cap)
    }

    fn add_block(&mut self, kind: BlockKind, trace_cap: T) -> BlockId {
        assert!(
            trace_cap.is_finite() && trace_cap > T::zero(),
            "trace caps must be finite and positive"
        );
        if let BlockKind::Psd(n) = kind {
            assert!(n > 0, "PSD block of dimension zero");
        }
        self.blocks.push(Block { kind, trace_cap });
        BlockId(self.blocks.len() - 1)
    }

    pub fn blocks(&self) -> &[Block<T>] {
        &self.blocks
    }

    pub fn block(&self, id: BlockId) -> &Block<T> {
        &self.blocks[id.0]
    }

    pub fn constraints(&self) -> &[Constraint<T>] {
        &self.constraints
    }

    /// Adds one scalar equality.
    pub fn add_constraint(&mut self, terms: Vec<(BlockId, Vec<T>)>, rhs: T) -> Result<()> {
        for (id, coeff) in &terms {
            let block = self.blocks.get(id.0).ok_or_else(|| {
                Error::InvalidArgument(format!("constraint references undeclared block {}", id.0))
            })?;
            if coeff.len() != block.kind.vec_len() {
                return Err(Error::DimensionMismatch(format!(
                    "coefficient vector of length {} for block {} of length {}",
                    coeff.len(),
                    id.0,
                    block.kind.vec_len()
                )));
            }
        }
        self.constraints.push(Constraint { terms, rhs });
        Ok(())
    }

    /// Adds `Σ_terms L(block) = rhs` coordinatewise in the real Hermitian
    /// vectorization of the right-hand side.
    pub fn add_matrix_equality(
        &mut self,
        terms: Vec<(BlockId, LinearMap<T>)>,
        rhs: &HermitianMatrix<T>,
    ) -> Result<()> {
        let target = hermitian_to_real_vec(rhs);
        self.add_vector_equality(terms, &target)
    }

    /// Adds `Σ_terms L(block) = target` for a raw real target vector.
    pub fn add_vector_equality(
        &mut self,
        terms: Vec<(BlockId, LinearMap<T>)>,
        target: &[T],
    ) -> Result<()> {
        for (id, map) in &terms {
            let block = self.blocks.get(id.0).ok_or_else(|| {
                Error::InvalidArgument(format!("constraint references undeclared block {}", id.0))
            })?;
            if map.in_len() != block.kind.vec_len() || map.out_len() != target.len() {
                return Err(Error::DimensionMismatch(format!(
                    "map {}→{} for block of length {} and target of length {}",
                    map.in_len(),
                    map.out_len(),
                    block.kind.vec_len(),
                    target.len()
                )));
            }
        }
        for (r, &rhs) in target.iter().enumerate() {
            let row_terms: Vec<(BlockId, Vec<T>)> = terms
                .iter()
                .filter_map(|(id, map)| {
                    let row = map.row(r);
                    row.iter()
                        .any(|v| *v != T::zero())
                        .then(|| (*id, row.to_vec()))
                })
                .collect();
            if row_terms.is_empty() && rhs == T::zero() {
                continue;
            }
            self.constraints.push(Constraint {
                terms: row_terms,
                rhs,
            });
        }
        Ok(())
    }

    /// Total length of the stacked real vectorization.
    pub fn vec_len(&self) -> usize {
        self.blocks.iter().map(|b| b.kind.vec_len()).sum()
    }

    pub(crate) fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.blocks.len());
        let mut acc = 0;
        for b in &self.blocks {
            off.push(acc);
            acc += b.kind.vec_len();
        }
        off
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_undeclared_blocks_and_bad_lengths() {
        let mut p = SdpProblem::<f64>::new();
        let x = p.add_psd(2, 1.0);
        assert!(p.add_constraint(vec![(x, vec![1.0; 3])], 1.0).is_err());
        assert!(p.add_constraint(vec![(BlockId(7), vec![1.0])], 1.0).is_err());
        assert!(p.add_constraint(vec![(x, vec![1.0; 4])], 1.0).is_ok());
    }

    #[test]
    fn tabulated_trace_map() {
        let m = LinearMap::<f64>::from_fn(2, 1, |h| {
            Ok(HermitianMatrix::from_real_diagonal(&[h.real_trace()]))
        })
        .unwrap();
        assert_eq!(m.row(0), &[1.0, 1.0, 0.0, 0.0]);
    }
}
