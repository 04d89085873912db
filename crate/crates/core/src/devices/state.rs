use crate::error::{invalid, Result};
use crate::{Hermitian, C64};

/// Density operator.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    rho: Hermitian,
}

impl State {
    pub const TOL: f64 = 1e-10;

    pub fn new(rho: Hermitian) -> Result<Self> {
        Self::with_tolerance(rho, Self::TOL)
    }

    pub fn with_tolerance(rho: Hermitian, tol: f64) -> Result<Self> {
        let tr = rho.real_trace();
        if (tr - 1.0).abs() > tol {
            return Err(invalid("state", format!("trace {tr} differs from 1")));
        }
        let lo = rho.min_eigenvalue()?;
        if lo < -tol {
            return Err(invalid("state", format!("negative eigenvalue {lo:e}")));
        }
        Ok(Self { rho })
    }

    /// `|ψ⟩⟨ψ|` for a (renormalized) vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(invalid("state", "zero vector"));
        }
        let v: Vec<C64> = psi.iter().map(|c| c / norm).collect();
        Ok(Self {
            rho: Hermitian::projector(&v),
        })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            rho: Hermitian::identity(d).scale(1.0 / d as f64),
        }
    }

    /// Computational basis state `|k⟩⟨k|`.
    pub fn basis(d: usize, k: usize) -> Self {
        let mut diag = vec![0.0; d];
        diag[k] = 1.0;
        Self {
            rho: Hermitian::from_real_diagonal(&diag),
        }
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn rho(&self) -> &Hermitian {
        &self.rho
    }

    pub fn into_rho(self) -> Hermitian {
        self.rho
    }

    pub fn tensor(&self, other: &State) -> State {
        State {
            rho: self.rho.kron(&other.rho),
        }
    }

    /// `⟨ρ, E⟩ = tr[ρE]`.
    pub fn expectation(&self, e: &Hermitian) -> f64 {
        self.rho.inner(e)
    }
}
