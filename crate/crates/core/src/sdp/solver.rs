use super::problem::{BlockId, BlockKind, SdpProblem};
use crate::config::{Method, Tolerances};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, real_vec_to_hermitian, write_real_vec, HermitianMatrix};
use crate::num::Real;

/// Outcome class of a feasibility query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Feasible,
    InfeasibleCertified,
    InfeasibleHeuristic,
    Undecided,
}

impl Status {
    pub fn is_feasible(self) -> bool {
        self == Status::Feasible
    }

    pub fn is_infeasible(self) -> bool {
        matches!(self, Status::InfeasibleCertified | Status::InfeasibleHeuristic)
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Feasible => "FEASIBLE",
            Status::InfeasibleCertified => "INFEASIBLE_CERTIFIED",
            Status::InfeasibleHeuristic => "INFEASIBLE_HEURISTIC",
            Status::Undecided => "UNDECIDED",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Value of one block in a witness.
#[derive(Clone, Debug, PartialEq)]
pub enum BlockValue<T: Real = f64> {
    Psd(HermitianMatrix<T>),
    Scalar(T),
}

impl<T: Real> BlockValue<T> {
    pub fn as_psd(&self) -> Option<&HermitianMatrix<T>> {
        match self {
            BlockValue::Psd(h) => Some(h),
            BlockValue::Scalar(_) => None,
        }
    }

    pub fn as_scalar(&self) -> Option<T> {
        match self {
            BlockValue::Scalar(s) => Some(*s),
            BlockValue::Psd(_) => None,
        }
    }

    fn write_vec(&self, out: &mut Vec<T>) {
        match self {
            BlockValue::Psd(h) => write_real_vec(h, out),
            BlockValue::Scalar(s) => out.push(*s),
        }
    }
}

/// Separating functional `h = Σ_i y_i a_i` given by multipliers `y` on the
/// problem's constraints. It proves infeasibility when
/// `sup_{affine} ⟨h,·⟩ − inf_{cones} ⟨h,·⟩ = yᵀb − inf_{cones} ⟨h,·⟩ < 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate<T: Real = f64> {
    pub multipliers: Vec<T>,
    /// The separation value above; negative means separated.
    pub gap: T,
}

/// Result of [`solve_feasibility`].
#[derive(Clone, Debug)]
pub struct Verdict<T: Real = f64> {
    pub status: Status,
    pub witness: Option<Vec<BlockValue<T>>>,
    pub certificate: Option<Certificate<T>>,
    pub residual: T,
    pub iterations: usize,
}

impl<T: Real> Verdict<T> {
    pub fn is_feasible(&self) -> bool {
        self.status.is_feasible()
    }

    pub fn psd(&self, id: BlockId) -> Option<&HermitianMatrix<T>> {
        self.witness.as_ref()?.get(id.0)?.as_psd()
    }

    pub fn scalar(&self, id: BlockId) -> Option<T> {
        self.witness.as_ref()?.get(id.0)?.as_scalar()
    }
}

/// Residuals of a candidate assignment, computed from the problem data alone.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WitnessCheck<T: Real = f64> {
    pub max_constraint_residual: T,
    pub min_eigenvalue: T,
    pub max_cap_excess: T,
}

impl<T: Real> WitnessCheck<T> {
    pub fn passes(&self, tol: T) -> bool {
        self.max_constraint_residual <= tol && self.min_eigenvalue >= -tol && self.max_cap_excess <= tol
    }
}

/// Re-verifies an assignment against every constraint and cone.
pub fn verify_witness<T: Real>(p: &SdpProblem<T>, witness: &[BlockValue<T>]) -> Result<WitnessCheck<T>> {
    if witness.len() != p.blocks().len() {
        return Err(Error::DimensionMismatch(format!(
            "witness has {} blocks, problem has {}",
            witness.len(),
            p.blocks().len()
        )));
    }
    let mut vecs = Vec::with_capacity(witness.len());
    let mut min_eig = T::infinity();
    let mut cap_excess = T::neg_infinity();
    for (b, w) in p.blocks().iter().zip(witness) {
        let mut v = Vec::new();
        w.write_vec(&mut v);
        if v.len() != b.kind.vec_len() {
            return Err(Error::DimensionMismatch("witness block shape".into()));
        }
        match w {
            BlockValue::Psd(h) => {
                min_eig = min_eig.min(h.min_eigenvalue()?);
                cap_excess = cap_excess.max(h.real_trace() - b.trace_cap);
            }
            BlockValue::Scalar(s) => {
                min_eig = min_eig.min(*s);
                cap_excess = cap_excess.max(*s - b.trace_cap);
            }
        }
        vecs.push(v);
    }
    let mut worst = T::zero();
    for c in p.constraints() {
        let mut lhs = T::zero();
        for (id, coeff) in &c.terms {
            lhs += coeff.iter().zip(&vecs[id.0]).map(|(a, b)| *a * *b).sum::<T>();
        }
        worst = worst.max((lhs - c.rhs).abs());
    }
    Ok(WitnessCheck {
        max_constraint_residual: worst,
        min_eigenvalue: min_eig,
        max_cap_excess: cap_excess,
    })
}

/// `yᵀb − inf_{cones∩caps} ⟨Σ y_i a_i, ·⟩`, evaluated from the problem data.
pub fn certificate_gap<T: Real>(p: &SdpProblem<T>, multipliers: &[T]) -> Result<T> {
    if multipliers.len() != p.constraints().len() {
        return Err(Error::DimensionMismatch("one multiplier per constraint required".into()));
    }
    let offsets = p.offsets();
    let mut h = vec![T::zero(); p.vec_len()];
    let mut sup = T::zero();
    for (c, &y) in p.constraints().iter().zip(multipliers) {
        sup += y * c.rhs;
        for (id, coeff) in &c.terms {
            let off = offsets[id.0];
            for (k, a) in coeff.iter().enumerate() {
                h[off + k] += y * *a;
            }
        }
    }
    let mut inf = T::zero();
    for (b, &off) in p.blocks().iter().zip(&offsets) {
        let seg = &h[off..off + b.kind.vec_len()];
        let lowest = match b.kind {
            BlockKind::Psd(n) => eig_hermitian(&real_vec_to_hermitian(seg, n)?)?.eigenvalues()[0],
            BlockKind::NonnegScalar => seg[0],
        };
        inf += b.trace_cap * lowest.min(T::zero());
    }
    Ok(sup - inf)
}

/// Sparse constraint row, sorted by coordinate and normalized to unit norm.
struct Row<T: Real> {
    entries: Vec<(usize, T)>,
    rhs: T,
    /// Original constraint index and the normalization factor applied.
    source: usize,
    scale: T,
}

impl<T: Real> Row<T> {
    fn dot(&self, x: &[T]) -> T {
        self.entries.iter().map(|&(k, a)| a * x[k]).sum()
    }

    fn axpy(&self, alpha: T, x: &mut [T]) {
        for &(k, a) in &self.entries {
            x[k] += alpha * a;
        }
    }

    fn dot_row(&self, other: &Row<T>) -> T {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        let mut s = T::zero();
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    s += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        s
    }
}

/// Precomputed affine projector onto `{x : A x = b}`.
struct AffineSet<T: Real> {
    rows: Vec<Row<T>>,
    /// Lower Cholesky factor of the Gram matrix of `rows`, row-major `r×r`.
    chol: Vec<T>,
}

enum AffineSetup<T: Real> {
    Ready(AffineSet<T>),
    Inconsistent(Vec<T>),
}

const PIVOT_TOL: f64 = 1e-10;
const CONSISTENCY_TOL: f64 = 1e-9;

impl<T: Real> AffineSet<T> {
    fn build(p: &SdpProblem<T>, offsets: &[usize]) -> Result<AffineSetup<T>> {
        let m = p.constraints().len();
        let mut rows = Vec::new();
        for (i, c) in p.constraints().iter().enumerate() {
            let mut entries: Vec<(usize, T)> = Vec::new();
            for (id, coeff) in &c.terms {
                let off = offsets[id.0];
                entries.extend(
                    coeff
                        .iter()
                        .enumerate()
                        .filter(|(_, a)| **a != T::zero())
                        .map(|(k, a)| (off + k, *a)),
                );
            }
            entries.sort_by_key(|e| e.0);
            // Merge repeated block references.
            let mut merged: Vec<(usize, T)> = Vec::with_capacity(entries.len());
            for (k, a) in entries {
                match merged.last_mut() {
                    Some(last) if last.0 == k => last.1 += a,
                    _ => merged.push((k, a)),
                }
            }
            let norm = merged.iter().map(|e| e.1 * e.1).sum::<T>().sqrt();
            if norm <= T::lit(1e-14) {
                if c.rhs.abs() > T::lit(CONSISTENCY_TOL) {
                    let mut y = vec![T::zero(); m];
                    y[i] = -c.rhs.signum();
                    return Ok(AffineSetup::Inconsistent(y));
                }
                continue;
            }
            let inv = T::one() / norm;
            let entries = merged.into_iter().map(|(k, a)| (k, a * inv)).collect();
            rows.push(Row {
                entries,
                rhs: c.rhs * inv,
                source: i,
                scale: inv,
            });
        }

        // Pivoted Cholesky on the Gram matrix to select independent rows.
        let n = rows.len();
        let mut gram = vec![T::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let g = rows[i].dot_row(&rows[j]);
                gram[i * n + j] = g;
                gram[j * n + i] = g;
            }
        }
        let mut perm: Vec<usize> = (0..n).collect();
        let mut l = vec![T::zero(); n * n]; // row-major, columns = pivot steps
        let mut diag: Vec<T> = (0..n).map(|i| gram[i * n + i]).collect();
        let mut rank = 0;
        while rank < n {
            let (best, &dmax) = diag[rank..]
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite gram"))
                .map(|(k, v)| (k + rank, v))
                .expect("nonempty");
            if dmax <= T::lit(PIVOT_TOL) {
                break;
            }
            perm.swap(rank, best);
            diag.swap(rank, best);
            for c in 0..rank {
                l.swap(rank * n + c, best * n + c);
            }
            let piv = dmax.sqrt();
            l[rank * n + rank] = piv;
            for i in (rank + 1)..n {
                let mut s = gram[perm[i] * n + perm[rank]];
                for c in 0..rank {
                    s -= l[i * n + c] * l[rank * n + c];
                }
                let v = s / piv;
                l[i * n + rank] = v;
                diag[i] -= v * v;
            }
            rank += 1;
        }
        let mut chol = vec![T::zero(); rank * rank];
        for i in 0..rank {
            for j in 0..=i {
                chol[i * rank + j] = l[i * n + j];
            }
        }
        let mut ordered: Vec<Option<Row<T>>> = rows.into_iter().map(Some).collect();
        let kept: Vec<Row<T>> = perm[..rank]
            .iter()
            .map(|&k| ordered[k].take().expect("unique"))
            .collect();
        let dropped: Vec<Row<T>> = perm[rank..]
            .iter()
            .map(|&k| ordered[k].take().expect("unique"))
            .collect();
        let set = AffineSet { rows: kept, chol };

        // Dropped rows are combinations of kept ones; their right-hand sides
        // must agree with that combination.
        for d in &dropped {
            let s: Vec<T> = set.rows.iter().map(|r| r.dot_row(d)).collect();
            let coef = set.solve_gram(&s);
            let implied: T = coef.iter().zip(&set.rows).map(|(c, r)| *c * r.rhs).sum();
            let defect = d.rhs - implied;
            if defect.abs() > T::lit(CONSISTENCY_TOL) {
                // y = ±(e_d − Σ c_i e_i) in original coordinates, oriented so yᵀb < 0.
                let sign = -defect.signum();
                let mut y = vec![T::zero(); m];
                y[d.source] += sign * d.scale;
                for (c, r) in coef.iter().zip(&set.rows) {
                    y[r.source] -= sign * *c * r.scale;
                }
                return Ok(AffineSetup::Inconsistent(y));
            }
        }
        Ok(AffineSetup::Ready(set))
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    fn solve_gram(&self, rhs: &[T]) -> Vec<T> {
        let r = self.rank();
        let l = &self.chol;
        let mut y = rhs.to_vec();
        for i in 0..r {
            let mut s = y[i];
            for j in 0..i {
                s -= l[i * r + j] * y[j];
            }
            y[i] = s / l[i * r + i];
        }
        for i in (0..r).rev() {
            let mut s = y[i];
            for j in (i + 1)..r {
                s -= l[j * r + i] * y[j];
            }
            y[i] = s / l[i * r + i];
        }
        y
    }

    fn project(&self, x: &[T], out: &mut [T]) {
        out.copy_from_slice(x);
        if self.rows.is_empty() {
            return;
        }
        let res: Vec<T> = self.rows.iter().map(|r| r.dot(x) - r.rhs).collect();
        let y = self.solve_gram(&res);
        for (r, &yi) in self.rows.iter().zip(&y) {
            r.axpy(-yi, out);
        }
    }

    /// Row-space component of `h`: multipliers `y` with `h' = A_Rᵀ y`.
    fn row_space_multipliers(&self, h: &[T]) -> Vec<T> {
        let s: Vec<T> = self.rows.iter().map(|r| r.dot(h)).collect();
        self.solve_gram(&s)
    }
}

/// Projection of `λ` onto `{μ ≥ 0, Σμ ≤ cap}`.
fn capped_simplex<T: Real>(lambda: &mut [T], cap: T) {
    let mut total = T::zero();
    for l in lambda.iter_mut() {
        *l = l.max(T::zero());
        total += *l;
    }
    if total <= cap {
        return;
    }
    let mut sorted: Vec<T> = lambda.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let mut acc = T::zero();
    let mut tau = T::zero();
    for (k, &s) in sorted.iter().enumerate() {
        acc += s;
        let t = (acc - cap) / T::from_usize(k + 1).expect("small");
        if k + 1 == sorted.len() || sorted[k + 1] <= t {
            tau = t;
            break;
        }
    }
    for l in lambda.iter_mut() {
        *l = (*l - tau).max(T::zero());
    }
}

struct ConeSet<T: Real> {
    kinds: Vec<BlockKind>,
    caps: Vec<T>,
    offsets: Vec<usize>,
}

impl<T: Real> ConeSet<T> {
    fn project(&self, x: &[T], out: &mut [T]) -> Result<()> {
        for ((kind, &cap), &off) in self.kinds.iter().zip(&self.caps).zip(&self.offsets) {
            match *kind {
                BlockKind::NonnegScalar => out[off] = x[off].max(T::zero()).min(cap),
                BlockKind::Psd(n) => {
                    let seg = &x[off..off + n * n];
                    // Fast path: diagonally dominant inputs are already inside
                    // the cone when the trace fits.
                    let h = real_vec_to_hermitian(seg, n)?;
                    let eig = eig_hermitian(&h)?;
                    let mut lam = eig.eigenvalues().to_vec();
                    let inside = lam[0] >= T::zero() && lam.iter().copied().sum::<T>() <= cap;
                    if inside {
                        out[off..off + n * n].copy_from_slice(seg);
                        continue;
                    }
                    capped_simplex(&mut lam, cap);
                    let proj = eig.reconstruct_with_values(&lam);
                    let mut v = Vec::with_capacity(n * n);
                    write_real_vec(&proj, &mut v);
                    out[off..off + n * n].copy_from_slice(&v);
                }
            }
        }
        Ok(())
    }

    fn split(&self, x: &[T]) -> Result<Vec<BlockValue<T>>> {
        self.kinds
            .iter()
            .zip(&self.offsets)
            .map(|(kind, &off)| match *kind {
                BlockKind::NonnegScalar => Ok(BlockValue::Scalar(x[off])),
                BlockKind::Psd(n) => Ok(BlockValue::Psd(real_vec_to_hermitian(
                    &x[off..off + n * n],
                    n,
                )?)),
            })
            .collect()
    }

    /// `inf` of `⟨h,·⟩` over the capped cones.
    fn support_min(&self, h: &[T]) -> Result<T> {
        let mut inf = T::zero();
        for ((kind, &cap), &off) in self.kinds.iter().zip(&self.caps).zip(&self.offsets) {
            let lowest = match *kind {
                BlockKind::NonnegScalar => h[off],
                BlockKind::Psd(n) => {
                    eig_hermitian(&real_vec_to_hermitian(&h[off..off + n * n], n)?)?.eigenvalues()[0]
                }
            };
            inf += cap * lowest.min(T::zero());
        }
        Ok(inf)
    }
}

fn dist<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(x, y)| (*x - *y) * (*x - *y))
        .sum::<T>()
        .sqrt()
}

/// Decides feasibility of `p` by projections between its affine set and the
/// product of (trace-capped) cones.
///
/// FEASIBLE is reported once the cone iterate lies within `tol.feas` of the
/// affine set; the witness is the affine projection of that iterate, so it
/// satisfies the equalities to rounding and the cones to `tol.feas`. When the
/// residual stalls above `tol.infeas` a separating functional is extracted
/// from the gap direction and validated exactly; on validation the verdict is
/// INFEASIBLE_CERTIFIED. Otherwise the run continues to the iteration cap.
pub fn solve_feasibility<T: Real>(p: &SdpProblem<T>, tol: &Tolerances) -> Result<Verdict<T>> {
    let offsets = p.offsets();
    let n = p.vec_len();
    let affine = match AffineSet::build(p, &offsets)? {
        AffineSetup::Ready(a) => a,
        AffineSetup::Inconsistent(y) => {
            let gap = certificate_gap(p, &y)?;
            return Ok(Verdict {
                status: Status::InfeasibleCertified,
                witness: None,
                certificate: Some(Certificate { multipliers: y, gap }),
                residual: T::infinity(),
                iterations: 0,
            });
        }
    };
    let cones = ConeSet {
        kinds: p.blocks().iter().map(|b| b.kind).collect(),
        caps: p.blocks().iter().map(|b| b.trace_cap).collect(),
        offsets,
    };
    let tol_feas = T::lit(tol.feas);
    let tol_infeas = T::lit(tol.infeas);
    let tol_polish = T::lit(tol.polish);

    let mut z = vec![T::zero(); n];
    let mut c = vec![T::zero(); n];
    let mut a = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let mut refl = vec![T::zero(); n];

    let mut history: Vec<T> = Vec::with_capacity(tol.max_iter / tol.plateau_window.max(1) + 2);
    let mut window_min = T::infinity();
    let mut best: Option<(T, Vec<T>)> = None;
    let mut feasible_at: Option<usize> = None;
    let mut last_residual = T::infinity();
    let mut gap_dir = vec![T::zero(); n];

    let mut iter = 0;
    while iter < tol.max_iter {
        iter += 1;
        match tol.method {
            Method::AlternatingProjections => {
                cones.project(&z, &mut c)?;
                affine.project(&c, &mut a);
                for k in 0..n {
                    gap_dir[k] = c[k] - a[k];
                }
                std::mem::swap(&mut z, &mut a);
                // z now holds P_A(c); the residual is its distance to c.
                w.copy_from_slice(&z);
            }
            Method::DouglasRachford => {
                cones.project(&z, &mut c)?;
                for k in 0..n {
                    refl[k] = c[k] + c[k] - z[k];
                }
                affine.project(&refl, &mut a);
                for k in 0..n {
                    gap_dir[k] = c[k] - a[k];
                    z[k] += a[k] - c[k];
                }
                affine.project(&c, &mut w);
            }
        }
        let residual = dist(&c, &w);
        last_residual = residual;
        window_min = window_min.min(residual);

        if residual < tol_feas {
            if best.as_ref().map_or(true, |(r, _)| residual < *r) {
                best = Some((residual, w.clone()));
            }
            let start = *feasible_at.get_or_insert(iter);
            if residual < tol_polish || iter - start >= tol.polish_iter {
                break;
            }
            continue;
        }
        if feasible_at.is_some() {
            // Polishing but the residual bounced; keep the best witness so far.
            if iter - feasible_at.unwrap() >= tol.polish_iter {
                break;
            }
            continue;
        }

        if iter % tol.plateau_window.max(1) == 0 {
            let prev = history.last().copied();
            history.push(window_min);
            window_min = T::infinity();
            let plateau = prev.map_or(false, |old: T| {
                old > T::zero() && (old - history[history.len() - 1]) / old < T::lit(tol.plateau_rel)
            });
            if plateau && residual > tol_infeas {
                if let Some(cert) = try_certificate(p, &affine, &cones, &gap_dir, tol_feas)? {
                    return Ok(Verdict {
                        status: Status::InfeasibleCertified,
                        witness: None,
                        certificate: Some(cert),
                        residual,
                        iterations: iter,
                    });
                }
            }
        }
    }

    if let Some((residual, w)) = best {
        return Ok(Verdict {
            status: Status::Feasible,
            witness: Some(cones.split(&w)?),
            certificate: None,
            residual,
            iterations: iter,
        });
    }
    let status = if last_residual > tol_infeas {
        // One last attempt at a certificate from the final gap direction.
        if let Some(cert) = try_certificate(p, &affine, &cones, &gap_dir, tol_feas)? {
            return Ok(Verdict {
                status: Status::InfeasibleCertified,
                witness: None,
                certificate: Some(cert),
                residual: last_residual,
                iterations: iter,
            });
        }
        Status::InfeasibleHeuristic
    } else {
        Status::Undecided
    };
    Ok(Verdict {
        status,
        witness: None,
        certificate: None,
        residual: last_residual,
        iterations: iter,
    })
}

/// Builds and validates a separating functional from the gap direction
/// `c − P_A(·)`, which points from the affine set toward the cones.
fn try_certificate<T: Real>(
    p: &SdpProblem<T>,
    affine: &AffineSet<T>,
    cones: &ConeSet<T>,
    gap_dir: &[T],
    tol_feas: T,
) -> Result<Option<Certificate<T>>> {
    let y = affine.row_space_multipliers(gap_dir);
    let mut h = vec![T::zero(); gap_dir.len()];
    for (r, &yi) in affine.rows.iter().zip(&y) {
        r.axpy(yi, &mut h);
    }
    let norm = h.iter().map(|v| *v * *v).sum::<T>().sqrt();
    if norm <= T::zero() {
        return Ok(None);
    }
    let inv = T::one() / norm;
    let sup: T = affine.rows.iter().zip(&y).map(|(r, &yi)| yi * r.rhs).sum::<T>() * inv;
    for v in h.iter_mut() {
        *v *= inv;
    }
    let inf = cones.support_min(&h)?;
    if sup - inf >= -tol_feas {
        return Ok(None);
    }
    let mut mult = vec![T::zero(); p.constraints().len()];
    for (r, &yi) in affine.rows.iter().zip(&y) {
        mult[r.source] += yi * inv * r.scale;
    }
    let gap = certificate_gap(p, &mult)?;
    if gap >= -tol_feas {
        return Ok(None);
    }
    Ok(Some(Certificate {
        multipliers: mult,
        gap,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_to_real_vec;
    use crate::sdp::LinearMap;

    fn sigma_z() -> HermitianMatrix<f64> {
        HermitianMatrix::from_real_diagonal(&[1.0, -1.0])
    }

    #[test]
    fn unit_trace_psd_is_feasible() {
        let mut p = SdpProblem::<f64>::new();
        let x = p.add_psd(2, 2.0);
        p.add_constraint(vec![(x, vec![1.0, 1.0, 0.0, 0.0])], 1.0).unwrap();
        let v = solve_feasibility(&p, &Tolerances::default()).unwrap();
        assert_eq!(v.status, Status::Feasible);
        assert!((v.psd(x).unwrap().real_trace() - 1.0).abs() < 1e-9);
        let check = verify_witness(&p, v.witness.as_ref().unwrap()).unwrap();
        assert!(check.passes(1e-6));
    }

    #[test]
    fn pinned_to_non_psd_matrix_is_infeasible() {
        let mut p = SdpProblem::<f64>::new();
        let x = p.add_psd(2, 4.0);
        p.add_matrix_equality(vec![(x, LinearMap::scaled_identity(2, 1.0))], &sigma_z())
            .unwrap();
        for m in [Method::DouglasRachford, Method::AlternatingProjections] {
            let v = solve_feasibility(&p, &Tolerances::default().with_method(m)).unwrap();
            assert_eq!(v.status, Status::InfeasibleCertified, "{m:?}");
            let cert = v.certificate.unwrap();
            assert!(certificate_gap(&p, &cert.multipliers).unwrap() < -1e-7);
        }
    }

    #[test]
    fn inconsistent_equalities_are_certified_immediately() {
        let mut p = SdpProblem::<f64>::new();
        let s = p.add_scalar(10.0);
        p.add_constraint(vec![(s, vec![1.0])], 1.0).unwrap();
        p.add_constraint(vec![(s, vec![2.0])], 3.0).unwrap();
        let v = solve_feasibility(&p, &Tolerances::default()).unwrap();
        assert_eq!(v.status, Status::InfeasibleCertified);
        assert_eq!(v.iterations, 0);
        assert!(v.certificate.unwrap().gap < 0.0);
    }

    #[test]
    fn redundant_constraints_are_pruned() {
        let mut p = SdpProblem::<f64>::new();
        let x = p.add_psd(2, 2.0);
        let tr = vec![1.0, 1.0, 0.0, 0.0];
        p.add_constraint(vec![(x, tr.clone())], 1.0).unwrap();
        p.add_constraint(vec![(x, tr.iter().map(|v| v * 2.0).collect())], 2.0).unwrap();
        let v = solve_feasibility(&p, &Tolerances::default()).unwrap();
        assert!(v.is_feasible());
    }

    #[test]
    fn capped_simplex_projection() {
        let mut l = vec![0.9f64, 0.6, -0.2];
        capped_simplex(&mut l, 1.0);
        assert!((l[0] - 0.65).abs() < 1e-15 && (l[1] - 0.35).abs() < 1e-15 && l[2] == 0.0);
        let mut l = vec![0.2, 0.3];
        capped_simplex(&mut l, 1.0);
        assert_eq!(l, vec![0.2, 0.3]);
    }

    #[test]
    fn witness_matches_forced_value() {
        let mut p = SdpProblem::<f64>::new();
        let x = p.add_psd(2, 2.0);
        let target = HermitianMatrix::from_real_diagonal(&[0.25, 0.75]);
        p.add_matrix_equality(vec![(x, LinearMap::scaled_identity(2, 1.0))], &target)
            .unwrap();
        let v = solve_feasibility(&p, &Tolerances::default()).unwrap();
        assert!(v.is_feasible());
        let got = hermitian_to_real_vec(v.psd(x).unwrap());
        let want = hermitian_to_real_vec(&target);
        assert!(dist(&got, &want) < 1e-9);
    }
}
