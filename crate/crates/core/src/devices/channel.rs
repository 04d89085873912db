use super::{Observable, State};
use crate::error::{invalid, Error, Result};
use crate::linalg::{eig_hermitian, partial_trace, partial_trace_multi, unitarity_defect, Subsystem};
use crate::num::{cx, czero};
use crate::{Hermitian, Matrix, C64};

/// `J = Σ_k vec(K_k) vec(K_k)†` with `vec(K)[i·d_out + o] = K[o][i]`.
pub fn kraus_to_choi(kraus: &[Matrix]) -> Result<Hermitian> {
    let first = kraus.first().ok_or_else(|| invalid("channel", "empty Kraus list"))?;
    let (dout, din) = (first.rows(), first.cols());
    let n = din * dout;
    let mut j = Matrix::zeros(n, n);
    for k in kraus {
        if k.rows() != dout || k.cols() != din {
            return Err(Error::DimensionMismatch("Kraus operators of different shapes".into()));
        }
        let v: Vec<C64> = (0..n).map(|idx| k[(idx % dout, idx / dout)]).collect();
        for a in 0..n {
            if v[a] == czero() {
                continue;
            }
            for b in 0..n {
                j[(a, b)] += v[a] * v[b].conj();
            }
        }
    }
    Ok(Hermitian::symmetrized(&j))
}

/// Kraus operators from the spectral decomposition of a Choi matrix; eigenvalues
/// below `cut` are dropped, below `-tol` rejected.
pub fn choi_to_kraus(choi: &Hermitian, din: usize, dout: usize, tol: f64) -> Result<Vec<Matrix>> {
    if choi.dim() != din * dout {
        return Err(Error::DimensionMismatch(format!(
            "Choi of dim {} for {din}→{dout}",
            choi.dim()
        )));
    }
    let e = eig_hermitian(choi)?;
    if e.eigenvalues()[0] < -tol {
        return Err(invalid("channel", format!("Choi eigenvalue {:e}", e.eigenvalues()[0])));
    }
    let top = e.eigenvalues().last().copied().unwrap_or(0.0).max(1.0);
    let cut = 1e-13 * top;
    let mut out = Vec::new();
    for (k, &lam) in e.eigenvalues().iter().enumerate().rev() {
        if lam <= cut {
            continue;
        }
        let s = lam.sqrt();
        let v = e.eigenvector(k);
        out.push(Matrix::from_fn(dout, din, |o, i| v[i * dout + o] * s));
    }
    if out.is_empty() {
        return Err(invalid("channel", "zero Choi matrix"));
    }
    Ok(out)
}

/// Completely positive trace-preserving map in Kraus and Choi form.
#[derive(Clone, Debug)]
pub struct Channel {
    in_dim: usize,
    out_dim: usize,
    kraus: Vec<Matrix>,
    choi: Hermitian,
}

impl Channel {
    pub const TOL: f64 = 1e-10;

    pub fn from_kraus(kraus: Vec<Matrix>) -> Result<Self> {
        let choi = kraus_to_choi(&kraus)?;
        let (dout, din) = (kraus[0].rows(), kraus[0].cols());
        let c = Self {
            in_dim: din,
            out_dim: dout,
            kraus,
            choi,
        };
        c.check_trace_preserving(Self::TOL)?;
        Ok(c)
    }

    pub fn from_choi(choi: Hermitian, din: usize, dout: usize) -> Result<Self> {
        Self::from_choi_with_tolerance(choi, din, dout, Self::TOL)
    }

    /// Accepts Choi matrices that are PSD and trace-preserving to `tol`.
    pub fn from_choi_with_tolerance(choi: Hermitian, din: usize, dout: usize, tol: f64) -> Result<Self> {
        let kraus = choi_to_kraus(&choi, din, dout, tol)?;
        let c = Self {
            in_dim: din,
            out_dim: dout,
            kraus,
            choi,
        };
        c.check_trace_preserving(tol)?;
        Ok(c)
    }

    fn check_trace_preserving(&self, tol: f64) -> Result<()> {
        let red = partial_trace(&self.choi, (self.in_dim, self.out_dim), Subsystem::First)?;
        let defect = red.max_diff(&Hermitian::identity(self.in_dim));
        if defect > tol {
            return Err(invalid("channel", format!("not trace preserving (defect {defect:e})")));
        }
        Ok(())
    }

    pub fn identity(d: usize) -> Self {
        Self::from_kraus(vec![Matrix::identity(d)]).expect("identity is a channel")
    }

    pub fn unitary(u: &Matrix) -> Result<Self> {
        if !u.is_square() || unitarity_defect(u) > Self::TOL {
            return Err(invalid("channel", "matrix is not unitary"));
        }
        Self::from_kraus(vec![u.clone()])
    }

    /// Completely depolarizing channel `ρ ↦ tr(ρ)ξ`.
    pub fn depolarizing_to(xi: &State, din: usize) -> Self {
        let choi = Hermitian::identity(din).kron(xi.rho());
        Self::from_choi(choi, din, xi.dim()).expect("constant channel")
    }

    /// `ρ ↦ tr(ρ)` onto a one-dimensional output.
    pub fn trace_map(din: usize) -> Self {
        Self::depolarizing_to(&State::maximally_mixed(1), din)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus(&self) -> &[Matrix] {
        &self.kraus
    }

    pub fn choi(&self) -> &Hermitian {
        &self.choi
    }

    /// `Σ_k K_k A K_k†` for any input operator.
    pub fn apply_operator(&self, a: &Hermitian) -> Result<Hermitian> {
        if a.dim() != self.in_dim {
            return Err(Error::DimensionMismatch("channel input".into()));
        }
        let mut acc = Hermitian::zeros(self.out_dim);
        for k in &self.kraus {
            acc = &acc + &a.congruence(k)?;
        }
        Ok(acc)
    }

    pub fn apply(&self, rho: &State) -> Result<State> {
        State::with_tolerance(self.apply_operator(rho.rho())?, 1e-8)
    }

    /// Heisenberg picture `B ↦ Σ_k K_k† B K_k`.
    pub fn dual(&self, b: &Hermitian) -> Result<Hermitian> {
        if b.dim() != self.out_dim {
            return Err(Error::DimensionMismatch("channel output".into()));
        }
        let mut acc = Hermitian::zeros(self.in_dim);
        for k in &self.kraus {
            acc = &acc + &b.congruence(&k.adjoint())?;
        }
        Ok(acc)
    }

    /// `then ∘ self`.
    pub fn then(&self, then: &Channel) -> Result<Channel> {
        if then.in_dim != self.out_dim {
            return Err(Error::DimensionMismatch("channel composition".into()));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * then.kraus.len());
        for b in &then.kraus {
            for a in &self.kraus {
                kraus.push(b.matmul(a)?);
            }
        }
        Self::from_kraus(kraus)
    }

    /// Largest entrywise difference of Choi matrices.
    pub fn choi_distance(&self, other: &Channel) -> f64 {
        if self.choi.dim() != other.choi.dim() {
            return f64::INFINITY;
        }
        self.choi.max_diff(&other.choi)
    }
}

/// Choi matrix of `E ∘ Λ` from those of `Λ: in→mid` and `E: mid→out`:
/// `J[(i,o),(j,o′)] = Σ_{a,b} J_Λ[(i,a),(j,b)] J_E[(a,o),(b,o′)]`.
pub fn compose_choi(
    lambda: &Hermitian,
    e: &Hermitian,
    din: usize,
    dmid: usize,
    dout: usize,
) -> Result<Hermitian> {
    if lambda.dim() != din * dmid || e.dim() != dmid * dout {
        return Err(Error::DimensionMismatch("Choi composition".into()));
    }
    let n = din * dout;
    let mut out = Matrix::zeros(n, n);
    for i in 0..din {
        for j in 0..din {
            for a in 0..dmid {
                for b in 0..dmid {
                    let l = lambda[(i * dmid + a, j * dmid + b)];
                    if l == czero() {
                        continue;
                    }
                    for o in 0..dout {
                        for p in 0..dout {
                            out[(i * dout + o, j * dout + p)] += l * e[(a * dout + o, b * dout + p)];
                        }
                    }
                }
            }
        }
    }
    Ok(Hermitian::symmetrized(&out))
}

/// Outcome-indexed family of CP maps summing to a channel, in Choi form.
#[derive(Clone, Debug)]
pub struct Instrument {
    in_dim: usize,
    out_dim: usize,
    outcomes: Vec<String>,
    operation_chois: Vec<Hermitian>,
}

impl Instrument {
    pub const TOL: f64 = 1e-10;

    pub fn new(chois: Vec<Hermitian>, din: usize, dout: usize) -> Result<Self> {
        Self::with_tolerance(chois, din, dout, Self::TOL)
    }

    pub fn with_tolerance(chois: Vec<Hermitian>, din: usize, dout: usize, tol: f64) -> Result<Self> {
        if chois.is_empty() {
            return Err(invalid("instrument", "no operations"));
        }
        for (x, j) in chois.iter().enumerate() {
            if j.dim() != din * dout {
                return Err(Error::DimensionMismatch(format!("operation {x} Choi dimension")));
            }
            let lo = j.min_eigenvalue()?;
            if lo < -tol {
                return Err(invalid("instrument", format!("operation {x} not CP ({lo:e})")));
            }
        }
        let inst = Self {
            in_dim: din,
            out_dim: dout,
            outcomes: (0..chois.len()).map(|x| x.to_string()).collect(),
            operation_chois: chois,
        };
        inst.total_channel_with_tolerance(tol)?;
        Ok(inst)
    }

    /// Lüders instrument `ρ ↦ √M(x) ρ √M(x)`.
    pub fn luders(m: &Observable) -> Result<Self> {
        let chois = m
            .effects()
            .iter()
            .map(|e| kraus_to_choi(&[e.sqrt_psd(1e-10)?.into_matrix()]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(chois, m.dim(), m.dim())
    }

    /// `I_x = w_x · C` for weights summing to one.
    pub fn scaled_channel(c: &Channel, weights: &[f64]) -> Result<Self> {
        Self::new(
            weights.iter().map(|&w| c.choi().scale(w)).collect(),
            c.in_dim(),
            c.out_dim(),
        )
    }

    /// Measure-and-prepare `ρ ↦ tr[ρM(x)] ξ_x`.
    pub fn measure_prepare(m: &Observable, states: &[State]) -> Result<Self> {
        if states.len() != m.num_outcomes() {
            return Err(Error::DimensionMismatch("one state per outcome".into()));
        }
        let dout = states[0].dim();
        let chois = m
            .effects()
            .iter()
            .zip(states)
            .map(|(e, s)| e.transpose().kron(s.rho()))
            .collect();
        Self::new(chois, m.dim(), dout)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn operation_chois(&self) -> &[Hermitian] {
        &self.operation_chois
    }

    fn total_channel_with_tolerance(&self, tol: f64) -> Result<Channel> {
        let sum = Hermitian::sum_of(&self.operation_chois, self.in_dim * self.out_dim);
        Channel::from_choi_with_tolerance(sum, self.in_dim, self.out_dim, tol)
    }

    pub fn total_channel(&self) -> Result<Channel> {
        self.total_channel_with_tolerance(1e-8)
    }

    /// `x ↦ (tr_out J_x)ᵀ`.
    pub fn induced_observable(&self) -> Result<Observable> {
        let effects = self
            .operation_chois
            .iter()
            .map(|j| Ok(partial_trace(j, (self.in_dim, self.out_dim), Subsystem::First)?.transpose()))
            .collect::<Result<Vec<_>>>()?;
        Observable::with_tolerance(effects, 1e-8)
    }

    /// Unnormalized `I_x(ρ) = tr_in[J_x(ρᵀ ⊗ I)]`.
    pub fn apply_operation(&self, x: usize, rho: &Hermitian) -> Result<Hermitian> {
        let (din, dout) = (self.in_dim, self.out_dim);
        let j = &self.operation_chois[x];
        let mut out = Matrix::zeros(dout, dout);
        for o in 0..dout {
            for p in 0..dout {
                let mut s = czero();
                for i in 0..din {
                    for k in 0..din {
                        s += rho[(i, k)] * j[(i * dout + o, k * dout + p)];
                    }
                }
                out[(o, p)] = s;
            }
        }
        Ok(Hermitian::symmetrized(&out))
    }
}

/// `ρ ↦ Σ_j ⟨b_j|ρ|b_j⟩ |b_j⟩⟨b_j|` for the columns `b_j` of a unitary.
pub fn diag_channel(basis: &Matrix) -> Result<Channel> {
    if !basis.is_square() || unitarity_defect(basis) > Channel::TOL {
        return Err(invalid("channel", "basis matrix is not unitary"));
    }
    let kraus = (0..basis.cols())
        .map(|k| {
            let b = basis.col(k);
            Matrix::outer(&b, &b)
        })
        .collect();
    Channel::from_kraus(kraus)
}

/// Complementary channel `ρ ↦ Σ_{ij} tr[K_i ρ K_j†] |i⟩⟨j|` on a register of
/// dimension equal to the Kraus count.
pub fn conjugate_channel(c: &Channel) -> Result<Channel> {
    let r = c.kraus().len();
    let kraus = (0..c.out_dim())
        .map(|o| Matrix::from_fn(r, c.in_dim(), |i, k| c.kraus()[i][(o, k)]))
        .collect();
    Channel::from_kraus(kraus)
}

/// Both marginals of the isometry `V: C^d → C^{da} ⊗ C^{db}`.
pub fn isometry_marginals(v: &Matrix, da: usize, db: usize) -> Result<(Channel, Channel)> {
    if v.rows() != da * db {
        return Err(Error::DimensionMismatch("isometry output".into()));
    }
    let d = v.cols();
    let ka = (0..db)
        .map(|b| Matrix::from_fn(da, d, |a, i| v[(a * db + b, i)]))
        .collect();
    let kb = (0..da)
        .map(|a| Matrix::from_fn(db, d, |b, i| v[(a * db + b, i)]))
        .collect();
    Ok((Channel::from_kraus(ka)?, Channel::from_kraus(kb)?))
}

/// Powers `diag(1, ω, …, ω^{d−1})^j` of the clock matrix, `j = 0..d`.
pub fn clock_unitaries(d: usize) -> Vec<Matrix> {
    (0..d)
        .map(|j| {
            Matrix::from_fn(d, d, |a, b| {
                if a != b {
                    return czero();
                }
                let phase = 2.0 * std::f64::consts::PI * ((a * j) % d) as f64 / d as f64;
                cx(phase.cos(), phase.sin())
            })
        })
        .collect()
}

/// Controlled-unitary dilation with register basis `φ_j = U_j†φ` for the
/// uniform vector `φ` and register input `d^{-1/2} Σ_j φ_j`. Returns the
/// system marginal and the register marginal; both equal
/// `ρ ↦ d^{-1} Σ_j U_j ρ U_j†`.
pub fn ctrl_unitary_selfconjugate(d: usize, unitaries: &[Matrix]) -> Result<(Channel, Channel)> {
    if unitaries.len() != d {
        return Err(Error::Precondition(format!("need {d} unitaries, got {}", unitaries.len())));
    }
    for u in unitaries {
        if u.rows() != d || !u.is_square() || unitarity_defect(u) > 1e-10 {
            return Err(Error::Precondition("operators must be d×d unitaries".into()));
        }
    }
    for (j, a) in unitaries.iter().enumerate() {
        for (k, b) in unitaries.iter().enumerate() {
            let g = a.adjoint().matmul(b)?.trace();
            let want = if j == k { d as f64 } else { 0.0 };
            if (g - cx(want, 0.0)).norm() > 1e-9 {
                return Err(Error::Precondition(format!("tr[U_{j}†U_{k}] = {g}, expected {want}")));
            }
            let comm = a.commutator(b)?;
            if comm.max_abs() > 1e-9 {
                return Err(Error::Precondition(format!("U_{j} and U_{k} do not commute")));
            }
        }
    }
    let s = 1.0 / (d as f64).sqrt();
    let phi = vec![cx(s, 0.0); d];
    let basis: Vec<Vec<C64>> = unitaries.iter().map(|u| u.adjoint().apply(&phi)).collect::<Result<_>>()?;
    for j in 0..d {
        for k in 0..d {
            let ip: C64 = basis[j].iter().zip(&basis[k]).map(|(a, b)| a.conj() * b).sum();
            let want = if j == k { 1.0 } else { 0.0 };
            if (ip - cx(want, 0.0)).norm() > 1e-9 {
                return Err(Error::Precondition("register vectors are not orthonormal".into()));
            }
        }
    }
    let mut u_ctrl = Matrix::zeros(d * d, d * d);
    for (u, b) in unitaries.iter().zip(&basis) {
        u_ctrl += &u.kron(&Matrix::outer(b, b));
    }
    let mut bar = vec![czero(); d];
    for b in &basis {
        for (acc, v) in bar.iter_mut().zip(b) {
            *acc += v * s;
        }
    }
    // V ψ = U_ctrl (ψ ⊗ φ̄).
    let embed = Matrix::identity(d).kron(&Matrix::column(&bar));
    let v = u_ctrl.matmul(&embed)?;
    isometry_marginals(&v, d, d)
}

/// Largest supported `d^n` for the symmetric cloner.
pub const CLONER_DIM_CAP: usize = 64;

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

/// Projector onto the symmetric subspace of `(C^d)^{⊗n}`.
pub fn symmetric_projector(d: usize, n: usize) -> Matrix {
    let dim = d.pow(n as u32);
    let perms = permutations(n);
    let w = 1.0 / perms.len() as f64;
    let mut s = Matrix::zeros(dim, dim);
    let digits = |mut idx: usize| {
        let mut v = vec![0; n];
        for k in (0..n).rev() {
            v[k] = idx % d;
            idx /= d;
        }
        v
    };
    for col in 0..dim {
        let ds = digits(col);
        for p in &perms {
            let row = p.iter().fold(0, |acc, &k| acc * d + ds[k]);
            s[(row, col)] += cx(w, 0.0);
        }
    }
    s
}

/// Optimal symmetric `1 → n` cloner `ρ ↦ s·S(ρ ⊗ I^{⊗(n−1)})S`, with `s` fixed
/// numerically by trace preservation.
pub fn werner_cloner(d: usize, n: usize) -> Result<Channel> {
    if d < 2 || n < 1 {
        return Err(Error::InvalidArgument("cloner needs d >= 2 and n >= 1".into()));
    }
    let big = d.checked_pow(n as u32).unwrap_or(usize::MAX);
    if n > 3 || big > CLONER_DIM_CAP {
        return Err(Error::CapExceeded {
            what: format!("cloner output dimension d^n (d={d}, n={n})"),
            count: big,
            cap: CLONER_DIM_CAP,
        });
    }
    let s = symmetric_projector(d, n);
    let env = big / d;
    let raw: Vec<Matrix> = (0..env)
        .map(|k| {
            let mut e = vec![czero(); env];
            e[k] = cx(1.0, 0.0);
            let embed = Matrix::identity(d).kron(&Matrix::column(&e));
            s.matmul(&embed)
        })
        .collect::<Result<_>>()?;
    // Σ_k K_k†K_k must be a multiple of the identity.
    let mut gram = Matrix::zeros(d, d);
    for k in &raw {
        gram += &k.adjoint().matmul(k)?;
    }
    let g = gram[(0, 0)].re;
    if gram.max_diff(&Matrix::identity(d).scale(g)) > 1e-12 {
        return Err(Error::Solver("cloner normalization depends on the input".into()));
    }
    let scale = (1.0 / g).sqrt();
    Channel::from_kraus(raw.iter().map(|k| k.scale(scale)).collect())
}

/// Coefficient `c` of the single-copy marginal `c ρ + (1−c) I/d` of the
/// universal cloner, read off from the input `|0⟩⟨0|`.
pub fn cloner_coefficient(d: usize, n: usize) -> Result<f64> {
    let c = werner_cloner(d, n)?;
    let out = c.apply_operator(State::basis(d, 0).rho())?;
    let marg = partial_trace_multi(&out, &vec![d; n], &[0])?;
    Ok((marg.as_matrix()[(0, 0)].re - 1.0 / d as f64) / (1.0 - 1.0 / d as f64))
}
