use crate::devices::{post_process, Observable, StochasticMatrix, TrivialObservable};
use crate::error::{Error, Result};
use crate::sdp::{bisect_max, bisect_max_parallel, solve_feasibility, BlockId, LinearMap, SdpProblem, Status, Verdict};
use crate::{Hermitian, Tolerances};

/// Largest product outcome set accepted by the joint-measurability SDP.
pub const JOINT_OUTCOME_CAP: usize = 4096;

/// Row-major multi-index of `idx` over `dims`.
pub(crate) fn multi_index(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
    out
}

/// POVM on a product outcome set `Ω_1 × … × Ω_n`.
#[derive(Clone, Debug)]
pub struct JointObservable {
    observable: Observable,
    factors: Vec<usize>,
}

impl JointObservable {
    /// Effects listed in row-major order over `factors`.
    pub fn new(effects: Vec<Hermitian>, factors: Vec<usize>, tol: f64) -> Result<Self> {
        let total: usize = factors.iter().product();
        if total != effects.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} effects for product outcome set of size {total}",
                effects.len()
            )));
        }
        Ok(Self {
            observable: Observable::with_tolerance(effects, tol)?,
            factors,
        })
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn effect(&self, xs: &[usize]) -> &Hermitian {
        let idx = xs.iter().zip(&self.factors).fold(0, |acc, (x, m)| acc * m + x);
        self.observable.effect(idx)
    }

    /// `x ↦ Σ_{x_j, j≠k} M(x_1, …, x_n)`.
    pub fn marginal_effects(&self, k: usize) -> Vec<Hermitian> {
        let d = self.observable.dim();
        let mut out = vec![Hermitian::zeros(d); self.factors[k]];
        for (idx, e) in self.observable.effects().iter().enumerate() {
            let xs = multi_index(idx, &self.factors);
            out[xs[k]] = &out[xs[k]] + e;
        }
        out
    }

    pub fn marginal(&self, k: usize) -> Result<Observable> {
        Observable::with_tolerance(self.marginal_effects(k), 1e-8)
    }

    /// Largest entrywise deviation of the marginals from `targets`.
    pub fn marginal_defect(&self, targets: &[Observable]) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, t) in targets.iter().enumerate() {
            for (a, b) in self.marginal_effects(k).iter().zip(t.effects()) {
                worst = worst.max(a.max_diff(b));
            }
        }
        worst
    }
}

/// How trivial noise enters a compatibility-region query.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum NoiseMode {
    /// `p(x) = 1/m`.
    UniformTrivial,
    /// Distributions are solver variables.
    #[default]
    OptimizedTrivial,
    /// Given distributions, one per observable.
    FixedTrivial(Vec<Vec<f64>>),
}

/// Mixture weights together with the noise model.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSpec {
    pub weights: Vec<f64>,
    pub mode: NoiseMode,
}

impl NoiseSpec {
    pub fn new(weights: Vec<f64>, mode: NoiseMode) -> Result<Self> {
        if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::InvalidArgument(format!("weights {weights:?} outside [0,1]")));
        }
        Ok(Self { weights, mode })
    }

    pub fn symmetric(n: usize, lambda: f64, mode: NoiseMode) -> Result<Self> {
        Self::new(vec![lambda; n], mode)
    }
}

/// Verdict of a joint-measurability query, with the joint observable and
/// the noise distributions used when feasible.
#[derive(Clone, Debug)]
pub struct JointVerdict {
    pub verdict: Verdict,
    pub joint: Option<JointObservable>,
    pub noise: Option<Vec<Vec<f64>>>,
}

impl JointVerdict {
    pub fn status(&self) -> Status {
        self.verdict.status
    }

    pub fn is_feasible(&self) -> bool {
        self.verdict.is_feasible()
    }
}

fn check_family(obs: &[Observable]) -> Result<(usize, Vec<usize>)> {
    let first = obs
        .first()
        .ok_or_else(|| Error::InvalidArgument("no observables given".into()))?;
    let d = first.dim();
    if obs.iter().any(|m| m.dim() != d) {
        return Err(Error::DimensionMismatch("observables act on different spaces".into()));
    }
    let factors: Vec<usize> = obs.iter().map(|m| m.num_outcomes()).collect();
    let total = factors
        .iter()
        .try_fold(1usize, |acc, &m| acc.checked_mul(m))
        .unwrap_or(usize::MAX);
    if total > JOINT_OUTCOME_CAP {
        return Err(Error::CapExceeded {
            what: "product outcome count".into(),
            count: total,
            cap: JOINT_OUTCOME_CAP,
        });
    }
    Ok((d, factors))
}

/// Joint measurability of `observables` as a feasibility SDP.
pub fn check_joint(observables: &[Observable], tol: &Tolerances) -> Result<JointVerdict> {
    let spec = NoiseSpec::symmetric(observables.len(), 1.0, NoiseMode::UniformTrivial)?;
    region_membership(observables, &spec, tol)
}

struct RegionProblem {
    problem: SdpProblem,
    joint: Vec<BlockId>,
    noise: Vec<Vec<BlockId>>,
    fixed_noise: Vec<Vec<f64>>,
    factors: Vec<usize>,
}

fn build_region(obs: &[Observable], spec: &NoiseSpec) -> Result<RegionProblem> {
    let (d, factors) = check_family(obs)?;
    if spec.weights.len() != obs.len() {
        return Err(Error::DimensionMismatch("one weight per observable required".into()));
    }
    let total: usize = factors.iter().product();
    let mut p = SdpProblem::new();
    let joint: Vec<BlockId> = (0..total).map(|_| p.add_psd(d, d as f64)).collect();
    let id = Hermitian::identity(d);

    let fixed_noise: Vec<Vec<f64>> = match &spec.mode {
        NoiseMode::UniformTrivial | NoiseMode::OptimizedTrivial => {
            factors.iter().map(|&m| vec![1.0 / m as f64; m]).collect()
        }
        NoiseMode::FixedTrivial(ps) => {
            if ps.len() != obs.len() {
                return Err(Error::DimensionMismatch("one noise distribution per observable".into()));
            }
            // Shorter distributions are padded with zeros.
            ps.iter()
                .zip(&factors)
                .map(|(q, &m)| {
                    if q.len() > m {
                        return Err(Error::DimensionMismatch("noise distribution too long".into()));
                    }
                    let mut v = q.clone();
                    v.resize(m, 0.0);
                    TrivialObservable::new(d, v.clone())?;
                    Ok(v)
                })
                .collect::<Result<_>>()?
        }
    };
    let optimized = spec.mode == NoiseMode::OptimizedTrivial;
    let noise: Vec<Vec<BlockId>> = if optimized {
        factors
            .iter()
            .zip(&spec.weights)
            .map(|(&m, &w)| if w < 1.0 { (0..m).map(|_| p.add_scalar(1.0)).collect() } else { Vec::new() })
            .collect()
    } else {
        vec![Vec::new(); obs.len()]
    };

    p.add_matrix_equality(
        joint.iter().map(|&b| (b, LinearMap::scaled_identity(d, 1.0))).collect(),
        &id,
    )?;
    for (k, m) in obs.iter().enumerate() {
        let lam = spec.weights[k];
        for x in 0..factors[k] {
            let mut terms: Vec<(BlockId, LinearMap)> = (0..total)
                .filter(|&idx| multi_index(idx, &factors)[k] == x)
                .map(|idx| (joint[idx], LinearMap::scaled_identity(d, 1.0)))
                .collect();
            let mut rhs = m.effect(x).scale(lam);
            if noise[k].is_empty() {
                rhs = &rhs + &id.scale((1.0 - lam) * fixed_noise[k][x]);
            } else {
                terms.push((noise[k][x], LinearMap::scalar_times(&id.scale(-(1.0 - lam)))));
            }
            p.add_matrix_equality(terms, &rhs)?;
        }
        if !noise[k].is_empty() {
            p.add_constraint(noise[k].iter().map(|&b| (b, vec![1.0])).collect(), 1.0)?;
        }
    }
    Ok(RegionProblem {
        problem: p,
        joint,
        noise,
        fixed_noise,
        factors,
    })
}

/// Joint measurability of the mixtures `λ_j M_j + (1−λ_j) T_j`.
pub fn region_membership(observables: &[Observable], spec: &NoiseSpec, tol: &Tolerances) -> Result<JointVerdict> {
    let rp = build_region(observables, spec)?;
    let verdict = solve_feasibility(&rp.problem, tol)?;
    if !verdict.is_feasible() {
        return Ok(JointVerdict {
            verdict,
            joint: None,
            noise: None,
        });
    }
    let effects: Vec<Hermitian> = rp
        .joint
        .iter()
        .map(|&b| verdict.psd(b).cloned().expect("witness block"))
        .collect();
    let joint = JointObservable::new(effects, rp.factors.clone(), tol.verify())?;
    let noise = rp
        .noise
        .iter()
        .zip(&rp.fixed_noise)
        .map(|(ids, fixed)| {
            if ids.is_empty() {
                fixed.clone()
            } else {
                ids.iter().map(|&b| verdict.scalar(b).expect("scalar").max(0.0)).collect()
            }
        })
        .collect();
    Ok(JointVerdict {
        verdict,
        joint: Some(joint),
        noise: Some(noise),
    })
}

/// Threshold search outcome.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Degree {
    pub value: f64,
    pub upper: f64,
    pub evaluations: usize,
}

/// Largest symmetric weight λ with all mixtures compatible, from below.
pub fn degree_of_compatibility(observables: &[Observable], mode: NoiseMode, tol: &Tolerances) -> Result<Degree> {
    degree_of_compatibility_parallel(observables, mode, tol, 1)
}

/// As [`degree_of_compatibility`], probing `workers` weights per round.
pub fn degree_of_compatibility_parallel(
    observables: &[Observable],
    mode: NoiseMode,
    tol: &Tolerances,
    workers: usize,
) -> Result<Degree> {
    check_family(observables)?;
    if observables.len() == 1 {
        return Ok(Degree {
            value: 1.0,
            upper: 1.0,
            evaluations: 0,
        });
    }
    let probe = |lam: f64| -> Result<bool> {
        let spec = NoiseSpec::symmetric(observables.len(), lam, mode.clone())?;
        Ok(region_membership(observables, &spec, tol)?.is_feasible())
    };
    let out = if workers > 1 {
        bisect_max_parallel(probe, tol.bisect, workers)?
    } else {
        bisect_max(probe, tol.bisect)?
    };
    Ok(Degree {
        value: out.value,
        upper: out.upper,
        evaluations: out.evaluations,
    })
}

/// `(d−1)(λ1+λ2) − √(d − (d−1)(λ1−λ2)²) ≤ d−2`.
pub fn region_formula_qp(d: usize, l1: f64, l2: f64) -> bool {
    region_formula_qp_margin(d, l1, l2) <= 0.0
}

/// Left side minus right side of the Fourier-pair region inequality.
pub fn region_formula_qp_margin(d: usize, l1: f64, l2: f64) -> f64 {
    let df = d as f64;
    (df - 1.0) * (l1 + l2) - (df - (df - 1.0) * (l1 - l2).powi(2)).sqrt() - (df - 2.0)
}

/// `½(1 + 1/(1+√d))`.
pub fn qp_degree_closed_form(d: usize) -> f64 {
    0.5 * (1.0 + 1.0 / (1.0 + (d as f64).sqrt()))
}

/// `(n+d)/(n(1+d))`.
pub fn cloner_bound(d: usize, n: usize) -> f64 {
    (n + d) as f64 / (n * (1 + d)) as f64
}

/// Joint with marginals `(1/n)M_k + (1−1/n)T_k`:
/// `G(x) = (1/n) Σ_k M_k(x_k) Π_{j≠k} p_j(x_j)`.
pub fn build_toss_joint(observables: &[Observable], trivials: &[TrivialObservable]) -> Result<JointObservable> {
    let (d, factors) = check_family(observables)?;
    if trivials.len() != observables.len()
        || trivials.iter().zip(&factors).any(|(t, &m)| t.distribution().len() != m || t.dim() != d)
    {
        return Err(Error::DimensionMismatch("one matching trivial observable per input".into()));
    }
    let n = observables.len();
    let total: usize = factors.iter().product();
    let effects = (0..total)
        .map(|idx| {
            let xs = multi_index(idx, &factors);
            let mut acc = Hermitian::zeros(d);
            for k in 0..n {
                let w: f64 = (0..n)
                    .filter(|&j| j != k)
                    .map(|j| trivials[j].distribution()[xs[j]])
                    .product();
                if w != 0.0 {
                    acc = &acc + &observables[k].effect(xs[k]).scale(w / n as f64);
                }
            }
            acc
        })
        .collect();
    JointObservable::new(effects, factors, 1e-10)
}

/// `M′(y_1..y_n) = Σ_x Π_k p_k(y_k|x) M(x)`.
pub fn build_postprocess_joint(m: &Observable, processings: &[StochasticMatrix]) -> Result<JointObservable> {
    if processings.is_empty() {
        return Err(Error::InvalidArgument("no processings given".into()));
    }
    if processings.iter().any(|p| p.cols() != m.num_outcomes()) {
        return Err(Error::DimensionMismatch("processing inputs must match the outcome count".into()));
    }
    let factors: Vec<usize> = processings.iter().map(|p| p.rows()).collect();
    let total: usize = factors.iter().product();
    if total > JOINT_OUTCOME_CAP {
        return Err(Error::CapExceeded {
            what: "product outcome count".into(),
            count: total,
            cap: JOINT_OUTCOME_CAP,
        });
    }
    let effects = (0..total)
        .map(|idx| {
            let ys = multi_index(idx, &factors);
            let mut acc = Hermitian::zeros(m.dim());
            for (x, e) in m.effects().iter().enumerate() {
                let w: f64 = processings.iter().zip(&ys).map(|(p, &y)| p.get(y, x)).product();
                if w != 0.0 {
                    acc = &acc + &e.scale(w);
                }
            }
            acc
        })
        .collect();
    JointObservable::new(effects, factors, 1e-10)
}

/// `M ⪯ N` witness: `M = post_process(N, p)`.
#[derive(Clone, Debug)]
pub enum OrderOutcome {
    Below(StochasticMatrix),
    NotBelow(Status),
}

impl OrderOutcome {
    pub fn is_below(&self) -> bool {
        matches!(self, OrderOutcome::Below(_))
    }
}

/// Searches a classical channel `p` with `M(y) = Σ_x p(y|x) N(x)`.
pub fn postprocessing_order(m: &Observable, n: &Observable, tol: &Tolerances) -> Result<OrderOutcome> {
    if m.dim() != n.dim() {
        return Err(Error::DimensionMismatch("observables act on different spaces".into()));
    }
    let (ym, xn) = (m.num_outcomes(), n.num_outcomes());
    let mut p = SdpProblem::new();
    let vars: Vec<BlockId> = (0..ym * xn).map(|_| p.add_scalar(1.0)).collect();
    for x in 0..xn {
        p.add_constraint((0..ym).map(|y| (vars[y * xn + x], vec![1.0])).collect(), 1.0)?;
    }
    for y in 0..ym {
        let terms = (0..xn)
            .map(|x| (vars[y * xn + x], LinearMap::scalar_times(n.effect(x))))
            .collect();
        p.add_matrix_equality(terms, m.effect(y))?;
    }
    let v = solve_feasibility(&p, tol)?;
    if !v.is_feasible() {
        return Ok(OrderOutcome::NotBelow(v.status));
    }
    let mut data: Vec<f64> = vars.iter().map(|&b| v.scalar(b).expect("scalar").max(0.0)).collect();
    for x in 0..xn {
        let s: f64 = (0..ym).map(|y| data[y * xn + x]).sum();
        for y in 0..ym {
            data[y * xn + x] /= s;
        }
    }
    let witness = StochasticMatrix::with_tolerance(ym, xn, data, 1e-9)?;
    let check = post_process(n, &witness)?;
    let defect = check
        .effects()
        .iter()
        .zip(m.effects())
        .fold(0.0f64, |a, (u, w)| a.max(u.max_diff(w)));
    if defect > tol.verify() {
        return Err(Error::Solver(format!("post-processing witness off by {defect:e}")));
    }
    Ok(OrderOutcome::Below(witness))
}
