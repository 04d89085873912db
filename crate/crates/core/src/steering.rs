//! Assemblages, local hidden state models, and their relation to joint
//! measurability.
//!
//! An assemblage is unsteerable exactly when the measured observables are
//! jointly measurable (for a full-rank reduced state); the cross-check below
//! asserts that polarity.

use crate::devices::{mix_with_trivial, Observable, State, TrivialObservable};
use crate::error::{invalid, Error, Result};
use crate::linalg::partial_trace_multi;
use crate::num::cx;
use crate::obscompat::{check_joint, degree_of_compatibility, NoiseMode};
use crate::sdp::{bisect_max, solve_feasibility, BlockId, LinearMap, SdpProblem, Status, Verdict};
use crate::{Hermitian, Tolerances};

/// Cap on the number of deterministic strategies `Π_j o_j`.
pub const STRATEGY_CAP: usize = 4096;

/// Conditional states `σ_{x|j}` on Bob's side.
#[derive(Clone, Debug, PartialEq)]
pub struct Assemblage {
    dim: usize,
    sigma: Vec<Vec<Hermitian>>,
}

impl Assemblage {
    pub fn new(sigma: Vec<Vec<Hermitian>>) -> Result<Self> {
        Self::with_tolerance(sigma, 1e-8)
    }

    pub fn with_tolerance(sigma: Vec<Vec<Hermitian>>, tol: f64) -> Result<Self> {
        let bad = |r: String| Err(invalid("assemblage", r));
        let Some(first) = sigma.first().and_then(|s| s.first()) else {
            return bad("no settings or outcomes".into());
        };
        let dim = first.dim();
        let mut average: Option<Hermitian> = None;
        for (j, row) in sigma.iter().enumerate() {
            if row.is_empty() {
                return bad(format!("setting {j} has no outcomes"));
            }
            for (x, s) in row.iter().enumerate() {
                if s.dim() != dim {
                    return bad(format!("σ({x}|{j}) has dim {}", s.dim()));
                }
                if s.min_eigenvalue()? < -1e-10 {
                    return bad(format!("σ({x}|{j}) is not PSD"));
                }
            }
            let avg = Hermitian::sum_of(row, dim);
            if (avg.real_trace() - 1.0).abs() > tol {
                return bad(format!("setting {j} has total trace {}", avg.real_trace()));
            }
            match &average {
                None => average = Some(avg),
                Some(a) if a.max_diff(&avg) > tol => {
                    return bad(format!("setting {j} has a different average state"))
                }
                _ => {}
            }
        }
        Ok(Self { dim, sigma })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_settings(&self) -> usize {
        self.sigma.len()
    }

    pub fn outcomes(&self) -> Vec<usize> {
        self.sigma.iter().map(|r| r.len()).collect()
    }

    pub fn sigma(&self, j: usize, x: usize) -> &Hermitian {
        &self.sigma[j][x]
    }

    /// Reduced state `Σ_x σ_{x|j}`.
    pub fn average(&self) -> Hermitian {
        Hermitian::sum_of(&self.sigma[0], self.dim)
    }
}

/// `|Ω⟩ = Σ_i |ii⟩/√d`.
pub fn maximally_entangled(d: usize) -> State {
    let mut psi = vec![cx(0.0, 0.0); d * d];
    for i in 0..d {
        psi[i * d + i] = cx(1.0 / (d as f64).sqrt(), 0.0);
    }
    State::pure(&psi).expect("normalized")
}

/// `σ_{x|j} = tr_A[(A_j(x) ⊗ I) ω]`.
pub fn assemblage_from(omega: &State, dim_a: usize, observables: &[Observable]) -> Result<Assemblage> {
    if dim_a == 0 || omega.dim() % dim_a != 0 {
        return Err(Error::DimensionMismatch(format!("state of dim {} has no factor {dim_a}", omega.dim())));
    }
    let db = omega.dim() / dim_a;
    let id_b = Hermitian::identity(db);
    let mut sigma = Vec::with_capacity(observables.len());
    for a in observables {
        if a.dim() != dim_a {
            return Err(Error::DimensionMismatch("observable does not act on the first factor".into()));
        }
        let mut row = Vec::with_capacity(a.num_outcomes());
        for e in a.effects() {
            let prod = e.kron(&id_b).as_matrix().matmul(omega.rho().as_matrix())?;
            let h = Hermitian::symmetrized(&prod);
            row.push(partial_trace_multi(&h, &[dim_a, db], &[1])?);
        }
        sigma.push(row);
    }
    Assemblage::with_tolerance(sigma, 1e-8)
}

fn strategy(mut idx: usize, outcomes: &[usize]) -> Vec<usize> {
    let mut out = vec![0; outcomes.len()];
    for k in (0..outcomes.len()).rev() {
        out[k] = idx % outcomes[k];
        idx /= outcomes[k];
    }
    out
}

/// Hidden states indexed by deterministic strategies `λ = (λ_1, …, λ_n)`.
#[derive(Clone, Debug)]
pub struct LhsModel {
    pub strategies: Vec<Vec<usize>>,
    pub hidden: Vec<Hermitian>,
}

impl LhsModel {
    /// `Σ_λ δ_{x,λ_j} σ_λ`.
    pub fn reconstruct(&self, j: usize, x: usize) -> Hermitian {
        let d = self.hidden[0].dim();
        let mut acc = Hermitian::zeros(d);
        for (s, h) in self.strategies.iter().zip(&self.hidden) {
            if s[j] == x {
                acc = &acc + h;
            }
        }
        acc
    }

    /// Largest entrywise reconstruction error over all `(x, j)`.
    pub fn residual(&self, a: &Assemblage) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, &o) in a.outcomes().iter().enumerate() {
            for x in 0..o {
                worst = worst.max(self.reconstruct(j, x).max_diff(a.sigma(j, x)));
            }
        }
        worst
    }
}

#[derive(Clone, Debug)]
pub struct LhsVerdict {
    pub verdict: Verdict,
    pub model: Option<LhsModel>,
}

impl LhsVerdict {
    pub fn status(&self) -> Status {
        self.verdict.status
    }

    /// Feasible means unsteerable.
    pub fn is_unsteerable(&self) -> bool {
        self.verdict.is_feasible()
    }
}

/// Local hidden state feasibility over deterministic strategies.
pub fn check_lhs(a: &Assemblage, tol: &Tolerances) -> Result<LhsVerdict> {
    let outcomes = a.outcomes();
    let count = outcomes
        .iter()
        .try_fold(1usize, |acc, &o| acc.checked_mul(o).filter(|&v| v <= STRATEGY_CAP));
    let Some(count) = count else {
        return Err(Error::CapExceeded {
            what: "deterministic strategies".into(),
            count: outcomes.iter().map(|&o| o as f64).product::<f64>() as usize,
            cap: STRATEGY_CAP,
        });
    };
    let d = a.dim();
    let strategies: Vec<Vec<usize>> = (0..count).map(|i| strategy(i, &outcomes)).collect();
    let mut p = SdpProblem::new();
    let blocks: Vec<BlockId> = (0..count).map(|_| p.add_psd(d, 1.0)).collect();
    for (j, &o) in outcomes.iter().enumerate() {
        for x in 0..o {
            let terms = strategies
                .iter()
                .zip(&blocks)
                .filter(|(s, _)| s[j] == x)
                .map(|(_, &b)| (b, LinearMap::scaled_identity(d, 1.0)))
                .collect();
            p.add_matrix_equality(terms, a.sigma(j, x))?;
        }
    }
    let verdict = solve_feasibility(&p, tol)?;
    let model = if verdict.is_feasible() {
        let hidden = blocks.iter().map(|&b| verdict.psd(b).expect("witness").clone()).collect();
        let m = LhsModel { strategies, hidden };
        let r = m.residual(a);
        if r > tol.verify() {
            return Err(Error::Solver(format!("hidden state reconstruction residual {r:.2e}")));
        }
        Some(m)
    } else {
        None
    };
    Ok(LhsVerdict { verdict, model })
}

/// `λ A_j + (1−λ) I/o_j`.
pub fn noisy_family(observables: &[Observable], lambda: f64) -> Result<Vec<Observable>> {
    observables
        .iter()
        .map(|m| mix_with_trivial(m, lambda, &TrivialObservable::uniform(m.dim(), m.num_outcomes())))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrosscheckReport {
    pub lambda: f64,
    pub lhs: Status,
    pub joint: Status,
    pub agree: bool,
    pub lhs_threshold: f64,
    pub joint_threshold: f64,
}

fn entangled_assemblage(observables: &[Observable], lambda: f64) -> Result<Assemblage> {
    let d = observables[0].dim();
    assemblage_from(&maximally_entangled(d), d, &noisy_family(observables, lambda)?)
}

/// Compares unsteerability of the maximally entangled assemblage with joint
/// measurability of the transposed mixtures, at `lambda` and at threshold.
pub fn steering_jm_crosscheck(observables: &[Observable], lambda: f64, tol: &Tolerances) -> Result<CrosscheckReport> {
    if observables.is_empty() {
        return Err(Error::InvalidArgument("empty observable family".into()));
    }
    let transposed: Vec<Observable> = observables.iter().map(|m| m.transpose()).collect();
    let lhs = check_lhs(&entangled_assemblage(observables, lambda)?, tol)?.status();
    let joint = check_joint(&noisy_family(&transposed, lambda)?, tol)?.status();
    let lhs_threshold = bisect_max(
        |l| Ok(check_lhs(&entangled_assemblage(observables, l)?, tol)?.is_unsteerable()),
        tol.bisect,
    )?
    .value;
    let joint_threshold = degree_of_compatibility(&transposed, NoiseMode::UniformTrivial, tol)?.value;
    Ok(CrosscheckReport {
        lambda,
        lhs,
        joint,
        agree: lhs.is_feasible() == joint.is_feasible(),
        lhs_threshold,
        joint_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices::{mub_qubit, random_povm, random_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn entangled_sharp_z_gives_transposed_halves() {
        let (_, _, z) = mub_qubit();
        let a = assemblage_from(&maximally_entangled(2), 2, &[z.clone()]).unwrap();
        for x in 0..2 {
            assert!(a.sigma(0, x).max_diff(&z.effect(x).transpose().scale(0.5)) < 1e-14);
        }
    }

    #[test]
    fn product_states_are_unsteerable() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ra = random_state(2, &mut rng);
        let rb = random_state(2, &mut rng);
        let obs: Vec<Observable> = (0..2).map(|_| random_povm(2, 2, &mut rng).unwrap()).collect();
        let a = assemblage_from(&ra.tensor(&rb), 2, &obs).unwrap();
        for (j, m) in obs.iter().enumerate() {
            for x in 0..2 {
                let expect = rb.rho().scale(ra.expectation(m.effect(x)));
                assert!(a.sigma(j, x).max_diff(&expect) < 1e-12);
            }
        }
        let v = check_lhs(&a, &tol()).unwrap();
        assert!(v.is_unsteerable());
        assert!(v.model.unwrap().residual(&a) < 1e-7);
    }

    #[test]
    fn sharp_xz_steer_and_noisy_do_not() {
        let (x, _, z) = mub_qubit();
        let obs = [x, z];
        let sharp = entangled_assemblage(&obs, 1.0).unwrap();
        assert!(check_lhs(&sharp, &tol()).unwrap().status().is_infeasible());
        let noisy = entangled_assemblage(&obs, 0.6).unwrap();
        assert!(check_lhs(&noisy, &tol()).unwrap().is_unsteerable());
    }

    #[test]
    fn crosscheck_xz() {
        let (x, _, z) = mub_qubit();
        let r = steering_jm_crosscheck(&[x, z], 0.8, &tol()).unwrap();
        assert!(r.agree && r.lhs.is_infeasible());
        assert!((r.lhs_threshold - 0.7071).abs() < 1e-2);
        assert!((r.joint_threshold - 0.7071).abs() < 1e-2);
    }

    #[test]
    fn inconsistent_assemblage_rejected() {
        let s0 = vec![Hermitian::from_real_diagonal(&[0.5, 0.0]), Hermitian::from_real_diagonal(&[0.0, 0.5])];
        let s1 = vec![Hermitian::from_real_diagonal(&[1.0, 0.0]), Hermitian::zeros(2)];
        assert!(Assemblage::new(vec![s0, s1]).is_err());
    }
}
