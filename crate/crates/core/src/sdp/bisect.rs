use crate::error::{Error, Result};
use rayon::prelude::*;

/// Result of a threshold search on `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BisectOutcome {
    /// Largest parameter known to be feasible.
    pub value: f64,
    /// Smallest parameter known not to be feasible (1 when `value == 1`).
    pub upper: f64,
    pub evaluations: usize,
}

fn steps_for(tol: f64) -> Result<usize> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidArgument(format!("bisection tolerance {tol} outside (0,1)")));
    }
    Ok((1.0 / tol).log2().ceil() as usize)
}

/// Largest `λ ∈ [0,1]` with `feasible(λ)`, assuming monotonicity, to within
/// `tol`. The returned value is always on the feasible side.
pub fn bisect_max(mut feasible: impl FnMut(f64) -> Result<bool>, tol: f64) -> Result<BisectOutcome> {
    let steps = steps_for(tol)?;
    if feasible(1.0)? {
        return Ok(BisectOutcome {
            value: 1.0,
            upper: 1.0,
            evaluations: 1,
        });
    }
    if !feasible(0.0)? {
        return Err(Error::Precondition("parameter 0 is not feasible".into()));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut evaluations = 2;
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        evaluations += 1;
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(BisectOutcome {
        value: lo,
        upper: hi,
        evaluations,
    })
}

/// Like [`bisect_max`] but probes `k` interior points per round in parallel,
/// shrinking the bracket by a factor `k + 1`. A feasible probe above an
/// infeasible one is reported as [`Error::NonMonotone`].
pub fn bisect_max_parallel(
    feasible: impl Fn(f64) -> Result<bool> + Sync,
    tol: f64,
    k: usize,
) -> Result<BisectOutcome> {
    if k <= 1 {
        return bisect_max(&feasible, tol);
    }
    steps_for(tol)?;
    let ends: Vec<Result<bool>> = [1.0, 0.0].par_iter().map(|&x| feasible(x)).collect();
    let mut ends = ends.into_iter();
    let at_one = ends.next().expect("two probes")?;
    let at_zero = ends.next().expect("two probes")?;
    if at_one {
        if !at_zero {
            return Err(Error::NonMonotone {
                feasible: 1.0,
                infeasible: 0.0,
            });
        }
        return Ok(BisectOutcome {
            value: 1.0,
            upper: 1.0,
            evaluations: 2,
        });
    }
    if !at_zero {
        return Err(Error::Precondition("parameter 0 is not feasible".into()));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut evaluations = 2;
    while hi - lo > tol {
        let probes: Vec<f64> = (1..=k)
            .map(|i| lo + (hi - lo) * i as f64 / (k + 1) as f64)
            .collect();
        let results: Vec<bool> = probes
            .par_iter()
            .map(|&x| feasible(x))
            .collect::<Result<Vec<_>>>()?;
        evaluations += k;
        let first_bad = results.iter().position(|ok| !ok);
        if let Some(fb) = first_bad {
            if let Some(later) = results[fb..].iter().position(|ok| *ok) {
                return Err(Error::NonMonotone {
                    feasible: probes[fb + later],
                    infeasible: probes[fb],
                });
            }
            hi = probes[fb];
            if fb > 0 {
                lo = probes[fb - 1];
            }
        } else {
            lo = probes[k - 1];
        }
    }
    Ok(BisectOutcome {
        value: lo,
        upper: hi,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_known_threshold_from_below() {
        let t = 0.5f64.sqrt();
        let out = bisect_max(|x| Ok(x <= t), 1e-4).unwrap();
        assert!(out.value <= t && t - out.value <= 1e-4);
        assert!(out.upper > t);
    }

    #[test]
    fn fully_feasible_returns_one() {
        let out = bisect_max(|_| Ok(true), 1e-3).unwrap();
        assert_eq!(out.value, 1.0);
        assert_eq!(out.evaluations, 1);
    }

    #[test]
    fn infeasible_origin_is_an_error() {
        assert!(matches!(bisect_max(|_| Ok(false), 1e-3), Err(Error::Precondition(_))));
    }

    #[test]
    fn parallel_matches_sequential() {
        let t = 0.6830127;
        let out = bisect_max_parallel(|x| Ok(x <= t), 1e-4, 4).unwrap();
        assert!(out.value <= t && t - out.value <= 1e-4);
    }

    #[test]
    fn parallel_detects_non_monotone_oracle() {
        let r = bisect_max_parallel(|x| Ok(x < 0.3 || (0.7..0.8).contains(&x)), 1e-3, 3);
        assert!(matches!(r, Err(Error::NonMonotone { .. })));
    }
}
