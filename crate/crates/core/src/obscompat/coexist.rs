use super::joint::{check_joint, multi_index};
use crate::devices::{binarize, Observable};
use crate::error::{Error, Result};
use crate::sdp::Status;
use crate::Tolerances;

/// Cap on `Σ_ℓ (2^{m_ℓ} − 2)` for coexistence.
pub const COEXISTENCE_BINARIZATION_CAP: usize = 8;
/// Cap on each outcome count for weak coexistence.
pub const WEAK_COEXISTENCE_OUTCOME_CAP: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct CoexistenceReport {
    pub status: Status,
    /// Subsets `X_ℓ` of the first tuple whose binarizations failed.
    pub failing: Option<Vec<Vec<usize>>>,
    pub sdp_calls: usize,
}

/// Nonempty proper subsets containing outcome 0; each binarization up to
/// relabeling.
fn binarization_subsets(m: usize) -> Vec<Vec<usize>> {
    (0..(1usize << m) - 1)
        .filter(|mask| mask & 1 == 1)
        .map(|mask| (0..m).filter(|x| mask & (1 << x) != 0).collect())
        .collect()
}

/// Joint measurability of every binarization of every observable at once.
pub fn check_coexistent(observables: &[Observable], tol: &Tolerances) -> Result<CoexistenceReport> {
    let count: usize = observables.iter().map(|m| (1usize << m.num_outcomes()) - 2).sum();
    if count > COEXISTENCE_BINARIZATION_CAP {
        return Err(Error::CapExceeded {
            what: format!(
                "binarizations Σ(2^m - 2) for outcome counts {:?}",
                observables.iter().map(|m| m.num_outcomes()).collect::<Vec<_>>()
            ),
            count,
            cap: COEXISTENCE_BINARIZATION_CAP,
        });
    }
    let mut family = Vec::new();
    for m in observables {
        for s in binarization_subsets(m.num_outcomes()) {
            family.push(binarize(m, &s)?);
        }
    }
    let v = check_joint(&family, tol)?;
    Ok(CoexistenceReport {
        status: v.status(),
        failing: None,
        sdp_calls: 1,
    })
}

/// For every choice of one subset per observable, the binarizations are
/// jointly measurable.
pub fn check_weakly_coexistent(observables: &[Observable], tol: &Tolerances) -> Result<CoexistenceReport> {
    if let Some(m) = observables.iter().find(|m| m.num_outcomes() > WEAK_COEXISTENCE_OUTCOME_CAP) {
        return Err(Error::CapExceeded {
            what: "outcomes per observable for weak coexistence".into(),
            count: m.num_outcomes(),
            cap: WEAK_COEXISTENCE_OUTCOME_CAP,
        });
    }
    let choices: Vec<Vec<Vec<usize>>> = observables
        .iter()
        .map(|m| binarization_subsets(m.num_outcomes()))
        .collect();
    let dims: Vec<usize> = choices.iter().map(|c| c.len()).collect();
    let total: usize = dims.iter().product();
    let mut worst = Status::Feasible;
    for idx in 0..total {
        let pick = multi_index(idx, &dims);
        let subsets: Vec<Vec<usize>> = pick.iter().zip(&choices).map(|(&k, c)| c[k].clone()).collect();
        let family = observables
            .iter()
            .zip(&subsets)
            .map(|(m, s)| binarize(m, s))
            .collect::<Result<Vec<_>>>()?;
        let v = check_joint(&family, tol)?;
        match v.status() {
            Status::Feasible => {}
            Status::Undecided => worst = Status::Undecided,
            s => {
                return Ok(CoexistenceReport {
                    status: s,
                    failing: Some(subsets),
                    sdp_calls: idx + 1,
                })
            }
        }
    }
    Ok(CoexistenceReport {
        status: worst,
        failing: None,
        sdp_calls: total,
    })
}
