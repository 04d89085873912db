use super::joint::{multi_index, JointObservable};
use crate::devices::Observable;
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, hermitian_to_real_vec};
use crate::num::cx;
use crate::{Hermitian, Matrix};

/// Largest family handled by the Jordan criterion.
pub const JORDAN_MAX_OBSERVABLES: usize = 4;

#[derive(Clone, Debug)]
pub enum JordanOutcome {
    CompatibleCertified(JointObservable),
    Inconclusive { min_eigenvalue: f64 },
}

impl JordanOutcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, JordanOutcome::CompatibleCertified(_))
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Symmetrized product `(1/n!) Σ_π E_{π(1)} ⋯ E_{π(n)}`.
pub fn jordan_product(ops: &[&Hermitian]) -> Hermitian {
    let d = ops[0].dim();
    let perms = permutations(ops.len());
    let mut acc = Matrix::zeros(d, d);
    for p in &perms {
        let mut prod = Matrix::identity(d);
        for &k in p {
            prod = &prod * ops[k].as_matrix();
        }
        acc += &prod;
    }
    Hermitian::symmetrized(&acc.scale(1.0 / perms.len() as f64))
}

/// Sufficient condition: all symmetrized products `J_n(M_1(x_1), …)` are PSD.
pub fn jordan_criterion(observables: &[Observable]) -> Result<JordanOutcome> {
    let n = observables.len();
    if n == 0 || n > JORDAN_MAX_OBSERVABLES {
        return Err(Error::CapExceeded {
            what: "observables in the Jordan criterion".into(),
            count: n,
            cap: JORDAN_MAX_OBSERVABLES,
        });
    }
    let d = observables[0].dim();
    if observables.iter().any(|m| m.dim() != d) {
        return Err(Error::DimensionMismatch("observables act on different spaces".into()));
    }
    let factors: Vec<usize> = observables.iter().map(|m| m.num_outcomes()).collect();
    let total: usize = factors.iter().product();
    let mut effects = Vec::with_capacity(total);
    let mut lowest = f64::INFINITY;
    for idx in 0..total {
        let xs = multi_index(idx, &factors);
        let ops: Vec<&Hermitian> = observables.iter().zip(&xs).map(|(m, &x)| m.effect(x)).collect();
        let j = jordan_product(&ops);
        lowest = lowest.min(j.min_eigenvalue()?);
        effects.push(j);
    }
    if lowest < -1e-10 {
        return Ok(JordanOutcome::Inconclusive { min_eigenvalue: lowest });
    }
    let joint = JointObservable::new(effects, factors, 1e-10)?;
    if joint.marginal_defect(observables) > 1e-9 {
        return Err(Error::Solver("Jordan joint marginals do not match".into()));
    }
    Ok(JordanOutcome::CompatibleCertified(joint))
}

#[derive(Clone, Debug, PartialEq)]
pub enum MiyaderaImaiOutcome {
    IncompatibleCertified { x: usize, y: usize, lhs: f64, rhs: f64 },
    Inconclusive { best_margin: f64 },
}

impl MiyaderaImaiOutcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, MiyaderaImaiOutcome::IncompatibleCertified { .. })
    }
}

/// Necessary condition `‖[A,B]‖² ≤ 4‖A−A²‖‖B−B²‖` scanned over effect pairs.
pub fn miyadera_imai(m1: &Observable, m2: &Observable) -> Result<MiyaderaImaiOutcome> {
    if m1.dim() != m2.dim() {
        return Err(Error::DimensionMismatch("observables act on different spaces".into()));
    }
    let nu1 = m1.effects().iter().map(|e| e.idempotency_defect()).collect::<Result<Vec<_>>>()?;
    let nu2 = m2.effects().iter().map(|e| e.idempotency_defect()).collect::<Result<Vec<_>>>()?;
    let mut best = f64::NEG_INFINITY;
    let mut best_cert = None;
    for (x, a) in m1.effects().iter().enumerate() {
        for (y, b) in m2.effects().iter().enumerate() {
            let c = a.commutator(b)?.op_norm()?;
            let lhs = c * c;
            let rhs = 4.0 * nu1[x] * nu2[y];
            let margin = lhs - rhs;
            if margin > best {
                best = margin;
                if margin > 1e-12 {
                    best_cert = Some((x, y, lhs, rhs));
                }
            }
        }
    }
    Ok(match best_cert {
        Some((x, y, lhs, rhs)) => MiyaderaImaiOutcome::IncompatibleCertified { x, y, lhs, rhs },
        None => MiyaderaImaiOutcome::Inconclusive { best_margin: best },
    })
}

/// `ν(M) = max_x ‖M(x) − M(x)²‖`.
pub fn unsharpness(m: &Observable) -> Result<f64> {
    m.effects()
        .iter()
        .try_fold(0.0f64, |acc, e| Ok(acc.max(e.idempotency_defect()?)))
}

/// `δ(M, M′) = max_x ‖M(x) − M′(x)‖`.
pub fn discrepancy(m: &Observable, mp: &Observable) -> Result<f64> {
    if m.num_outcomes() != mp.num_outcomes() || m.dim() != mp.dim() {
        return Err(Error::DimensionMismatch("discrepancy needs matching outcome sets".into()));
    }
    m.effects()
        .iter()
        .zip(mp.effects())
        .try_fold(0.0f64, |acc, (a, b)| Ok(acc.max((a - b).op_norm()?)))
}

/// `c_{M,N} = max_{x,y} ‖[M(x), N(y)]‖`.
pub fn commutator_bound(m: &Observable, n: &Observable) -> Result<f64> {
    let mut c: f64 = 0.0;
    for a in m.effects() {
        for b in n.effects() {
            c = c.max(a.commutator(b)?.op_norm()?);
        }
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MurReport {
    pub lhs: f64,
    pub bound: f64,
    pub incompatible_certified: bool,
}

/// Approximate-joint-measurement inequality for `(M′, N′)` approximating `(M, N)`:
/// `2δδ′ + δ + δ′ + 2√(2δ+ν(M))√(2δ′+ν(N)) ≥ c_{M,N}` holds whenever `M′, N′`
/// are compatible.
pub fn mur_test(m: &Observable, n: &Observable, mp: &Observable, np: &Observable) -> Result<MurReport> {
    let delta = discrepancy(m, mp)?;
    let deltap = discrepancy(n, np)?;
    let lhs = 2.0 * delta * deltap
        + delta
        + deltap
        + 2.0 * (2.0 * delta + unsharpness(m)?).sqrt() * (2.0 * deltap + unsharpness(n)?).sqrt();
    let bound = commutator_bound(m, n)?;
    Ok(MurReport {
        lhs,
        bound,
        incompatible_certified: bound - lhs > 1e-12,
    })
}

/// `Σ λ_j² > 1`: mixtures of complementary sharp observables with white noise
/// are then incompatible.
pub fn zhu_criterion(lambdas: &[f64]) -> bool {
    lambdas.iter().map(|l| l * l).sum::<f64>() > 1.0
}

/// Number of eigenvalues above `rel·max` of a real symmetric Gram matrix.
fn real_rank(vectors: &[Vec<f64>], rel: f64) -> Result<usize> {
    let n = vectors.len();
    let gram = Matrix::from_fn(n, n, |i, j| {
        cx(vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a * b).sum(), 0.0)
    });
    let e = eig_hermitian(&Hermitian::symmetrized(&gram))?;
    let top = e.eigenvalues().last().copied().unwrap_or(0.0);
    Ok(e.eigenvalues().iter().filter(|&&l| l > rel * top.max(1e-300)).count())
}

/// Real span of the effects has full dimension `d²`.
pub fn is_informationally_complete(m: &Observable) -> Result<bool> {
    let vecs: Vec<Vec<f64>> = m.effects().iter().map(hermitian_to_real_vec).collect();
    Ok(real_rank(&vecs, 1e-10)? == m.dim() * m.dim())
}

/// Largest outcome count scanned by [`has_projection_in_range`].
pub const RANGE_SCAN_CAP: usize = 12;

/// Some subset sum `M(X)` is a projection other than `0` and `I`.
pub fn has_projection_in_range(m: &Observable) -> Result<bool> {
    let k = m.num_outcomes();
    if k > RANGE_SCAN_CAP {
        return Err(Error::CapExceeded {
            what: "outcomes in the projection scan (2^m subsets)".into(),
            count: k,
            cap: RANGE_SCAN_CAP,
        });
    }
    let d = m.dim();
    let zero = Hermitian::zeros(d);
    let id = Hermitian::identity(d);
    for mask in 1..(1usize << k) - 1 {
        let mut s = Hermitian::zeros(d);
        for x in 0..k {
            if mask & (1 << x) != 0 {
                s = &s + m.effect(x);
            }
        }
        if s.max_diff(&zero) <= 1e-8 || s.max_diff(&id) <= 1e-8 {
            continue;
        }
        if s.idempotency_defect()? <= 1e-8 {
            return Ok(true);
        }
    }
    Ok(false)
}
