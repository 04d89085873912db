use super::State;
use crate::error::{invalid, Error, Result};
use crate::num::cx;
use crate::{Hermitian, Matrix};

/// Finite-outcome POVM.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    dim: usize,
    outcomes: Vec<String>,
    effects: Vec<Hermitian>,
}

fn default_labels(m: usize) -> Vec<String> {
    (0..m).map(|x| x.to_string()).collect()
}

impl Observable {
    pub const TOL: f64 = 1e-10;

    pub fn new(effects: Vec<Hermitian>) -> Result<Self> {
        Self::with_tolerance(effects, Self::TOL)
    }

    pub fn with_labels(effects: Vec<Hermitian>, outcomes: Vec<String>) -> Result<Self> {
        let mut m = Self::new(effects)?;
        if outcomes.len() != m.effects.len() {
            return Err(invalid("observable", "one label per effect required"));
        }
        m.outcomes = outcomes;
        Ok(m)
    }

    /// Validates `0 ⪯ M(x) ⪯ I` and `Σ M(x) = I` to `tol`.
    pub fn with_tolerance(effects: Vec<Hermitian>, tol: f64) -> Result<Self> {
        let dim = effects
            .first()
            .ok_or_else(|| invalid("observable", "no effects"))?
            .dim();
        for (x, e) in effects.iter().enumerate() {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "effect {x} has dim {}, expected {dim}",
                    e.dim()
                )));
            }
            let lo = e.min_eigenvalue()?;
            let hi = e.max_eigenvalue()?;
            if lo < -tol || hi > 1.0 + tol {
                return Err(invalid(
                    "observable",
                    format!("effect {x} has spectrum [{lo:e}, {hi}] outside [0,1]"),
                ));
            }
        }
        let total = Hermitian::sum_of(&effects, dim);
        let defect = total.max_diff(&Hermitian::identity(dim));
        if defect > tol {
            return Err(invalid("observable", format!("effects sum to I only up to {defect:e}")));
        }
        Ok(Self {
            dim,
            outcomes: default_labels(effects.len()),
            effects,
        })
    }

    /// POVM `{|b_k⟩⟨b_k|}` from the columns of a unitary.
    pub fn from_basis(u: &Matrix) -> Result<Self> {
        if !u.is_square() || crate::linalg::unitarity_defect(u) > Self::TOL {
            return Err(invalid("observable", "basis matrix is not unitary"));
        }
        Self::new((0..u.cols()).map(|k| Hermitian::projector(&u.col(k))).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn effects(&self) -> &[Hermitian] {
        &self.effects
    }

    pub fn effect(&self, x: usize) -> &Hermitian {
        &self.effects[x]
    }

    pub fn probabilities(&self, state: &State) -> Vec<f64> {
        self.effects.iter().map(|e| state.expectation(e)).collect()
    }

    /// Every effect is a projection to `tol`.
    pub fn is_sharp(&self, tol: f64) -> Result<bool> {
        for e in &self.effects {
            if e.idempotency_defect()? > tol {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Every effect is a multiple of the identity to `tol`.
    pub fn is_trivial(&self, tol: f64) -> bool {
        self.effects.iter().all(|e| {
            let c = e.real_trace() / self.dim as f64;
            e.max_diff(&Hermitian::identity(self.dim).scale(c)) <= tol
        })
    }

    /// Entrywise transpose of every effect.
    pub fn transpose(&self) -> Self {
        Self {
            dim: self.dim,
            outcomes: self.outcomes.clone(),
            effects: self.effects.iter().map(|e| e.transpose()).collect(),
        }
    }

    /// `x ↦ U M(x) U†`.
    pub fn conjugate_by(&self, u: &Matrix) -> Result<Self> {
        let effects = self
            .effects
            .iter()
            .map(|e| e.congruence(u))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dim: self.dim,
            outcomes: self.outcomes.clone(),
            effects,
        })
    }
}

/// Coin-toss observable `x ↦ p(x)·I`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrivialObservable {
    dim: usize,
    distribution: Vec<f64>,
}

impl TrivialObservable {
    pub fn new(dim: usize, distribution: Vec<f64>) -> Result<Self> {
        if distribution.is_empty() || distribution.iter().any(|p| !(*p >= 0.0)) {
            return Err(invalid("trivial observable", "probabilities must be nonnegative"));
        }
        let s: f64 = distribution.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(invalid("trivial observable", format!("probabilities sum to {s}")));
        }
        if dim == 0 {
            return Err(invalid("trivial observable", "dimension zero"));
        }
        Ok(Self { dim, distribution })
    }

    pub fn uniform(dim: usize, m: usize) -> Self {
        Self {
            dim,
            distribution: vec![1.0 / m as f64; m],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn distribution(&self) -> &[f64] {
        &self.distribution
    }

    pub fn effects(&self) -> Vec<Hermitian> {
        self.distribution
            .iter()
            .map(|&p| Hermitian::identity(self.dim).scale(p))
            .collect()
    }

    pub fn to_observable(&self) -> Observable {
        Observable {
            dim: self.dim,
            outcomes: default_labels(self.distribution.len()),
            effects: self.effects(),
        }
    }
}

/// Column-stochastic matrix `p(y|x)`: `rows` outputs, `cols` inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl StochasticMatrix {
    pub const TOL: f64 = 1e-12;

    /// Row-major data, entry `(y, x)` at `y * cols + x`.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(rows, cols, data, Self::TOL)
    }

    pub fn with_tolerance(rows: usize, cols: usize, data: Vec<f64>, tol: f64) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} stochastic matrix",
                data.len()
            )));
        }
        if data.iter().any(|v| !(*v >= -tol)) {
            return Err(invalid("stochastic matrix", "negative entry"));
        }
        for x in 0..cols {
            let s: f64 = (0..rows).map(|y| data[y * cols + x]).sum();
            if (s - 1.0).abs() > tol {
                return Err(invalid("stochastic matrix", format!("column {x} sums to {s}")));
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        Self::deterministic(&(0..n).collect::<Vec<_>>(), n).expect("valid permutation")
    }

    /// `p(y|x) = δ_{y, f(x)}`.
    pub fn deterministic(f: &[usize], rows: usize) -> Result<Self> {
        let cols = f.len();
        let mut data = vec![0.0; rows * cols];
        for (x, &y) in f.iter().enumerate() {
            if y >= rows {
                return Err(Error::InvalidArgument(format!("f({x}) = {y} out of range {rows}")));
            }
            data[y * cols + x] = 1.0;
        }
        Self::new(rows, cols, data)
    }

    /// `p(y|x) = t(y)` for every input.
    pub fn constant(t: &[f64], cols: usize) -> Result<Self> {
        let rows = t.len();
        let data = (0..rows * cols).map(|k| t[k / cols]).collect();
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.data[y * self.cols + x]
    }

    /// `self ∘ first`: `(q·p)(z|x) = Σ_y q(z|y) p(y|x)`.
    pub fn after(&self, first: &StochasticMatrix) -> Result<Self> {
        if self.cols != first.rows {
            return Err(Error::DimensionMismatch("stochastic composition".into()));
        }
        let mut data = vec![0.0; self.rows * first.cols];
        for z in 0..self.rows {
            for x in 0..first.cols {
                data[z * first.cols + x] = (0..self.cols).map(|y| self.get(z, y) * first.get(y, x)).sum();
            }
        }
        Self::with_tolerance(self.rows, first.cols, data, 1e-10)
    }
}

/// `λM(x) + (1−λ)p(x)I`.
pub fn mix_with_trivial(m: &Observable, lambda: f64, t: &TrivialObservable) -> Result<Observable> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!("mixing weight {lambda} outside [0,1]")));
    }
    if t.dim() != m.dim() || t.distribution().len() != m.num_outcomes() {
        return Err(Error::DimensionMismatch("trivial noise does not match the observable".into()));
    }
    let id = Hermitian::identity(m.dim());
    let effects = m
        .effects()
        .iter()
        .zip(t.distribution())
        .map(|(e, &p)| &e.scale(lambda) + &id.scale((1.0 - lambda) * p))
        .collect();
    Ok(Observable {
        dim: m.dim,
        outcomes: m.outcomes.clone(),
        effects,
    })
}

/// `N(y) = Σ_x p(y|x) M(x)`.
pub fn post_process(m: &Observable, p: &StochasticMatrix) -> Result<Observable> {
    if p.cols() != m.num_outcomes() {
        return Err(Error::DimensionMismatch(format!(
            "processing takes {} inputs, observable has {} outcomes",
            p.cols(),
            m.num_outcomes()
        )));
    }
    let effects = (0..p.rows())
        .map(|y| {
            let mut acc = Hermitian::zeros(m.dim());
            for (x, e) in m.effects().iter().enumerate() {
                let w = p.get(y, x);
                if w != 0.0 {
                    acc = &acc + &e.scale(w);
                }
            }
            acc
        })
        .collect();
    Ok(Observable {
        dim: m.dim,
        outcomes: default_labels(p.rows()),
        effects,
    })
}

/// Deterministic relabeling `x ↦ f(x)` onto `range` outcomes.
pub fn relabel(m: &Observable, f: &[usize], range: usize) -> Result<Observable> {
    post_process(m, &StochasticMatrix::deterministic(f, range)?)
}

/// `(M(X), I − M(X))`.
pub fn binarize(m: &Observable, subset: &[usize]) -> Result<Observable> {
    let mut inside = vec![false; m.num_outcomes()];
    for &x in subset {
        if x >= inside.len() {
            return Err(Error::InvalidArgument(format!("outcome {x} out of range")));
        }
        inside[x] = true;
    }
    let count = inside.iter().filter(|b| **b).count();
    if count == 0 || count == inside.len() {
        return Err(Error::InvalidArgument("binarization subset must be nonempty and proper".into()));
    }
    let f: Vec<usize> = inside.iter().map(|&b| if b { 0 } else { 1 }).collect();
    relabel(m, &f, 2)
}

/// The spin-½ observables `X`, `Y`, `Z` with effects `(I ± σ)/2`.
pub fn mub_qubit() -> (Observable, Observable, Observable) {
    let z = cx(0.0, 0.0);
    let h = |a: [crate::C64; 4]| Hermitian::new(Matrix::new(2, 2, a.to_vec()).unwrap()).unwrap();
    let half = |s: f64| {
        [
            h([cx(0.5, 0.0), cx(0.5 * s, 0.0), cx(0.5 * s, 0.0), cx(0.5, 0.0)]),
            h([cx(0.5, 0.0), cx(0.0, -0.5 * s), cx(0.0, 0.5 * s), cx(0.5, 0.0)]),
            h([cx(0.5 + 0.5 * s, 0.0), z, z, cx(0.5 - 0.5 * s, 0.0)]),
        ]
    };
    let [xp, yp, zp] = half(1.0);
    let [xm, ym, zm] = half(-1.0);
    (
        Observable::new(vec![xp, xm]).unwrap(),
        Observable::new(vec![yp, ym]).unwrap(),
        Observable::new(vec![zp, zm]).unwrap(),
    )
}

/// Unitary whose columns are the Fourier basis `e_k = d^{-1/2} Σ_j ω^{jk}|j⟩`.
pub fn fourier_matrix(d: usize) -> Matrix {
    let s = 1.0 / (d as f64).sqrt();
    Matrix::from_fn(d, d, |j, k| {
        let phase = 2.0 * std::f64::consts::PI * ((j * k) % d) as f64 / d as f64;
        cx(s * phase.cos(), s * phase.sin())
    })
}

/// Computational-basis `Q_d` and Fourier-basis `P_d`.
pub fn fourier_pair(d: usize) -> Result<(Observable, Observable)> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("Fourier pair needs d >= 2, got {d}")));
    }
    let q = Observable::from_basis(&Matrix::identity(d))?;
    let p = Observable::from_basis(&fourier_matrix(d))?;
    Ok((q, p))
}

/// Isometric dilation of a POVM to a sharp observable.
#[derive(Clone, Debug)]
pub struct NaimarkDilation {
    pub big_dim: usize,
    /// Isometry `V: C^d → C^d ⊗ C^m`.
    pub isometry: Matrix,
    pub sharp_effects: Vec<Hermitian>,
}

impl NaimarkDilation {
    /// Largest deviation among `V†V = I`, `Σ P_x = I`, `P_x² = P_x` and
    /// `V†P_xV = M(x)`.
    pub fn defect(&self, m: &Observable) -> Result<f64> {
        let v = &self.isometry;
        let mut worst = crate::linalg::unitarity_defect(v);
        let total = Hermitian::sum_of(&self.sharp_effects, self.big_dim);
        worst = worst.max(total.max_diff(&Hermitian::identity(self.big_dim)));
        for (p, e) in self.sharp_effects.iter().zip(m.effects()) {
            worst = worst.max(p.idempotency_defect()?);
            worst = worst.max(p.congruence(&v.adjoint())?.max_diff(e));
        }
        Ok(worst)
    }
}

/// Canonical construction `Vψ = Σ_x √M(x)ψ ⊗ |x⟩`, `P_x = I ⊗ |x⟩⟨x|`.
pub fn naimark_dilate(m: &Observable) -> Result<NaimarkDilation> {
    let d = m.dim();
    let k = m.num_outcomes();
    let roots = m
        .effects()
        .iter()
        .map(|e| e.sqrt_psd(1e-10))
        .collect::<Result<Vec<_>>>()?;
    let big = d * k;
    let isometry = Matrix::from_fn(big, d, |row, col| roots[row % k][(row / k, col)]);
    let sharp_effects = (0..k)
        .map(|x| {
            let mut diag = vec![0.0; big];
            for i in 0..d {
                diag[i * k + x] = 1.0;
            }
            Hermitian::from_real_diagonal(&diag)
        })
        .collect();
    Ok(NaimarkDilation {
        big_dim: big,
        isometry,
        sharp_effects,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> Hermitian {
        Hermitian::from_real_diagonal(v)
    }

    #[test]
    fn mub_effects() {
        let (x, _, z) = mub_qubit();
        assert!(z.effect(0).max_diff(&diag(&[1.0, 0.0])) < 1e-15);
        assert!(z.effect(1).max_diff(&diag(&[0.0, 1.0])) < 1e-15);
        assert!((x.effect(0)[(0, 1)].re - 0.5).abs() < 1e-15);
        assert!(x.is_sharp(1e-12).unwrap());
    }

    #[test]
    fn fourier_pair_is_unbiased() {
        let (q2, p2) = fourier_pair(2).unwrap();
        let (x, _, z) = mub_qubit();
        assert!(p2.effect(0).max_diff(x.effect(0)) < 1e-15);
        assert!(p2.effect(1).max_diff(x.effect(1)) < 1e-15);
        assert!(q2.effect(0).max_diff(z.effect(0)) < 1e-15);
        let (q3, p3) = fourier_pair(3).unwrap();
        for a in q3.effects() {
            for b in p3.effects() {
                assert!((a.inner(b) - 1.0 / 3.0).abs() < 1e-14);
            }
        }
        assert!(fourier_pair(1).is_err());
    }

    #[test]
    fn mixing_examples() {
        let (_, _, z) = mub_qubit();
        let t = TrivialObservable::uniform(2, 2);
        let m = mix_with_trivial(&z, 0.5, &t).unwrap();
        assert!(m.effect(0).max_diff(&diag(&[0.75, 0.25])) < 1e-15);
        assert!(m.effect(1).max_diff(&diag(&[0.25, 0.75])) < 1e-15);
        assert_eq!(mix_with_trivial(&z, 1.0, &t).unwrap(), z);
        assert!(mix_with_trivial(&z, 0.0, &t).unwrap().is_trivial(1e-15));
        assert!(mix_with_trivial(&z, 1.5, &t).is_err());
    }

    #[test]
    fn post_processing_examples() {
        let (_, _, z) = mub_qubit();
        assert_eq!(post_process(&z, &StochasticMatrix::identity(2)).unwrap(), z);
        let merged = post_process(&z, &StochasticMatrix::new(1, 2, vec![1.0, 1.0]).unwrap()).unwrap();
        assert!(merged.effect(0).max_diff(&Hermitian::identity(2)) < 1e-15);
        let swapped = relabel(&z, &[1, 0], 2).unwrap();
        assert_eq!(swapped.effect(0), z.effect(1));
        assert!(post_process(&z, &StochasticMatrix::identity(3)).is_err());
    }

    #[test]
    fn binarization_examples() {
        let (q3, _) = fourier_pair(3).unwrap();
        let b = binarize(&q3, &[0]).unwrap();
        assert!(b.effect(0).max_diff(&diag(&[1.0, 0.0, 0.0])) < 1e-15);
        assert!(b.effect(1).max_diff(&diag(&[0.0, 1.0, 1.0])) < 1e-15);
        let (_, _, z) = mub_qubit();
        assert_eq!(binarize(&z, &[0]).unwrap().effects(), z.effects());
        assert_eq!(binarize(&z, &[1]).unwrap().effect(0), z.effect(1));
        assert!(binarize(&z, &[]).is_err() && binarize(&z, &[0, 1]).is_err());
    }

    #[test]
    fn naimark_examples() {
        let (_, _, z) = mub_qubit();
        let n = naimark_dilate(&z).unwrap();
        assert!(n.defect(&z).unwrap() < 1e-12);
        let noisy = mix_with_trivial(&z, 0.5, &TrivialObservable::uniform(2, 2)).unwrap();
        let n = naimark_dilate(&noisy).unwrap();
        assert_eq!(n.big_dim, 4);
        assert!(n.defect(&noisy).unwrap() < 1e-12);
        let t = TrivialObservable::uniform(2, 2).to_observable();
        let n = naimark_dilate(&t).unwrap();
        assert!((n.isometry[(0, 0)].re - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(n.defect(&t).unwrap() < 1e-12);
    }

    #[test]
    fn rejects_invalid_effects() {
        assert!(Observable::new(vec![diag(&[1.0, 0.0]), diag(&[0.5, 1.0])]).is_err());
        assert!(Observable::new(vec![diag(&[1.5, 0.0]), diag(&[-0.5, 1.0])]).is_err());
    }

    #[test]
    fn stochastic_composition() {
        let p = StochasticMatrix::new(2, 2, vec![0.9, 0.2, 0.1, 0.8]).unwrap();
        let q = StochasticMatrix::deterministic(&[0, 0], 1).unwrap();
        let qp = q.after(&p).unwrap();
        assert_eq!(qp.rows(), 1);
        assert!((qp.get(0, 1) - 1.0).abs() < 1e-15);
    }
}
