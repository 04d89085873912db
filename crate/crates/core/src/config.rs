//! Central tolerance and iteration settings.

/// Projection scheme used by the feasibility engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Method {
    /// Plain alternating projections between the affine set and the cones.
    AlternatingProjections,
    /// Douglas–Rachford splitting (averaged alternating reflections).
    #[default]
    DouglasRachford,
}

/// Every numerical threshold used by the toolkit, with its default.
#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    /// Device invariants (PSD, normalization): `1e-10`.
    pub device: f64,
    /// Feasibility residual below which a verdict is FEASIBLE: `1e-7`.
    pub feas: f64,
    /// Residual above which a plateaued run counts as infeasible: `1e-5`.
    pub infeas: f64,
    /// Iteration cap of the feasibility engine: `50_000`.
    pub max_iter: usize,
    /// Window for the plateau test: `200` iterations.
    pub plateau_window: usize,
    /// Relative decrease over the window that counts as a plateau: `1e-3`.
    pub plateau_rel: f64,
    /// Target residual for witness polishing after FEASIBLE: `1e-10`.
    pub polish: f64,
    /// Extra iterations spent polishing a witness: `5_000`.
    pub polish_iter: usize,
    /// Threshold search accuracy: `5e-4`.
    pub bisect: f64,
    /// Witness re-verification slack (multiple of `feas`): `10`.
    pub verify_factor: f64,
    pub method: Method,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            device: 1e-10,
            feas: 1e-7,
            infeas: 1e-5,
            max_iter: 50_000,
            plateau_window: 200,
            plateau_rel: 1e-3,
            polish: 1e-10,
            polish_iter: 5_000,
            bisect: 5e-4,
            verify_factor: 10.0,
            method: Method::default(),
        }
    }
}

impl Tolerances {
    pub fn with_bisect(mut self, tol: f64) -> Self {
        self.bisect = tol;
        self
    }

    pub fn with_max_iter(mut self, n: usize) -> Self {
        self.max_iter = n;
        self
    }

    pub fn with_method(mut self, m: Method) -> Self {
        self.method = m;
        self
    }

    /// Slack used when re-verifying solver witnesses.
    pub fn verify(&self) -> f64 {
        self.feas * self.verify_factor
    }
}
