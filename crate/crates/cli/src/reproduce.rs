//! Reference tables regenerated as deterministic CSV.

use crate::record::ConfigSnapshot;
use crate::CliResult;
use clap::ValueEnum;
use qincompat::chancompat::{robustness, DevicePair, NoiseClass};
use qincompat::devices::{cloner_coefficient, fourier_pair, mub_qubit, random_povm, random_state, Channel, Observable, State};
use qincompat::num::cx;
use qincompat::obscompat::{
    cloner_bound, degree_of_compatibility_parallel, jordan_criterion, qp_degree_closed_form, region_formula_qp,
    region_formula_qp_margin, region_membership, NoiseMode, NoiseSpec,
};
use qincompat::process::{orthogonal_probe_pair, tester_degree, Tester};
use qincompat::sdp::bisect_max;
use qincompat::steering::noisy_family;
use qincompat::Tolerances;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Seed of every randomized spot check.
pub const SEED: u64 = 20_240_601;

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Fig4,
    PosMomTable,
    BcBoundTable,
    MubThresholds,
    ProcessQ,
    Robustness,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Fig4 => "fig4",
            Target::PosMomTable => "pos-mom-table",
            Target::BcBoundTable => "bc-bound-table",
            Target::MubThresholds => "mub-thresholds",
            Target::ProcessQ => "process-q",
            Target::Robustness => "robustness",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub file: String,
    pub csv: String,
    pub rows: usize,
    pub summary: String,
}

struct Builder {
    header: Vec<String>,
    w: csv::Writer<Vec<u8>>,
    rows: usize,
}

impl Builder {
    fn new(target: &str, tol: &Tolerances, seed: Option<u64>, columns: &[&str]) -> Self {
        let mut header = vec![format!("# target: {target}")];
        if let Some(s) = seed {
            header.push(format!("# seed: {s}"));
        }
        header.push(ConfigSnapshot::from(tol).header_line());
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(columns).expect("in-memory");
        Self { header, w, rows: 0 }
    }

    fn row(&mut self, cells: Vec<String>) {
        self.w.write_record(&cells).expect("in-memory");
        self.rows += 1;
    }

    fn finish(self, file: &str, summary: String) -> Table {
        let body = String::from_utf8(self.w.into_inner().expect("in-memory")).expect("utf8");
        Table {
            file: file.into(),
            csv: format!("{}\n{}", self.header.join("\n"), body),
            rows: self.rows,
            summary,
        }
    }
}

fn f(v: f64) -> String {
    format!("{v:.6}")
}

pub fn run(target: Target, tol: &Tolerances, workers: usize) -> CliResult<Vec<Table>> {
    match target {
        Target::Fig4 => fig4(tol, workers),
        Target::PosMomTable => pos_mom_table(tol, workers),
        Target::BcBoundTable => bc_bound_table(tol),
        Target::MubThresholds => mub_thresholds(tol, workers),
        Target::ProcessQ => process_q(tol),
        Target::Robustness => robustness_table(tol),
    }
}

/// Largest `λ2` inside the closed-form region at fixed `λ1`, if any.
pub fn boundary_lambda2(d: usize, l1: f64) -> Option<f64> {
    if region_formula_qp_margin(d, l1, 0.0) > 0.0 {
        return None;
    }
    if region_formula_qp_margin(d, l1, 1.0) <= 0.0 {
        return Some(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if region_formula_qp_margin(d, l1, mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

fn fig4(tol: &Tolerances, workers: usize) -> CliResult<Vec<Table>> {
    let mut b = Builder::new("fig4", tol, None, &["d", "lambda1", "lambda2_boundary"]);
    for d in [3usize, 100] {
        for k in 0..200 {
            let l1 = k as f64 / 199.0;
            if let Some(l2) = boundary_lambda2(d, l1) {
                b.row(vec![d.to_string(), f(l1), f(l2)]);
            }
        }
    }
    let diag = qp_degree_closed_form(3);
    let boundary = b.finish("fig4_boundary.csv", format!("closed-form boundaries, d=3 diagonal at {diag:.4}"));
    let (q, p) = fourier_pair(3)?;
    let pair = [q, p];
    let grid: Vec<f64> = (0..6).map(|k| k as f64 / 5.0).collect();
    let points: Vec<(f64, f64)> = grid.iter().flat_map(|&a| grid.iter().map(move |&c| (a, c))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| crate::CliError::Runtime(e.to_string()))?;
    let verdicts = pool.install(|| {
        points
            .par_iter()
            .map(|&(a, c)| {
                let spec = NoiseSpec::new(vec![a, c], NoiseMode::OptimizedTrivial)?;
                Ok(region_membership(&pair, &spec, tol)?.status())
            })
            .collect::<qincompat::Result<Vec<_>>>()
    })?;
    let mut s = Builder::new("fig4", tol, None, &["d", "lambda1", "lambda2", "sdp_verdict", "formula_inside"]);
    let mut disagree = 0;
    for (&(a, c), v) in points.iter().zip(&verdicts) {
        let inside = region_formula_qp(3, a, c);
        if v.is_feasible() != inside && region_formula_qp_margin(3, a, c).abs() > 1e-2 {
            disagree += 1;
        }
        s.row(vec!["3".into(), f(a), f(c), v.label().into(), inside.to_string()]);
    }
    let sdp = s.finish("fig4_sdp_d3.csv", format!("d=3 SDP grid, {disagree} disagreements off the boundary"));
    Ok(vec![boundary, sdp])
}

fn pos_mom_table(tol: &Tolerances, workers: usize) -> CliResult<Vec<Table>> {
    let mut b = Builder::new("pos-mom-table", tol, None, &["d", "closed_form", "sdp_degree"]);
    let mut summary = String::new();
    for d in [2usize, 3, 4, 5, 6, 7, 8, 9, 10, 20, 50, 100] {
        let cf = qp_degree_closed_form(d);
        let sdp = if d <= 3 {
            let (q, p) = fourier_pair(d)?;
            let v = degree_of_compatibility_parallel(&[q, p], NoiseMode::OptimizedTrivial, tol, workers)?.value;
            summary.push_str(&format!("d={d}: {v:.4} vs {cf:.4}; "));
            f(v)
        } else {
            String::new()
        };
        b.row(vec![d.to_string(), f(cf), sdp]);
    }
    Ok(vec![b.finish("pos_mom_table.csv", summary.trim_end_matches("; ").to_string())])
}

fn bc_bound_table(tol: &Tolerances) -> CliResult<Vec<Table>> {
    let mut b = Builder::new("bc-bound-table", tol, None, &["n", "d", "closed_form", "cloner_numeric"]);
    for n in [2usize, 3] {
        for d in [2usize, 3, 4] {
            if d.pow(n as u32) > 64 {
                continue;
            }
            b.row(vec![n.to_string(), d.to_string(), f(cloner_bound(d, n)), format!("{:.9}", cloner_coefficient(d, n)?)]);
        }
    }
    Ok(vec![b.finish("bc_bound_table.csv", format!("(n=3,d=2) bound {:.6}", cloner_bound(2, 3)))])
}

/// Largest weight at which all Jordan products of the uniform mixtures are PSD.
pub fn jordan_threshold(obs: &[Observable], accuracy: f64) -> CliResult<f64> {
    Ok(bisect_max(|l| Ok(jordan_criterion(&noisy_family(obs, l)?)?.is_certified()), accuracy)?.value)
}

fn mub_thresholds(tol: &Tolerances, workers: usize) -> CliResult<Vec<Table>> {
    let (x, y, z) = mub_qubit();
    let mut b = Builder::new(
        "mub-thresholds",
        tol,
        None,
        &["family", "sdp_uniform", "sdp_optimized", "jordan_threshold", "cloner_bound"],
    );
    let mut summary = String::new();
    for (name, fam) in [("X,Z", vec![x.clone(), z.clone()]), ("X,Y,Z", vec![x, y, z])] {
        let u = degree_of_compatibility_parallel(&fam, NoiseMode::UniformTrivial, tol, workers)?.value;
        let o = degree_of_compatibility_parallel(&fam, NoiseMode::OptimizedTrivial, tol, workers)?.value;
        let j = jordan_threshold(&fam, tol.bisect)?;
        let c = cloner_bound(2, fam.len());
        summary.push_str(&format!("{name}: {u:.4}; "));
        b.row(vec![name.into(), f(u), f(o), f(j), f(c)]);
    }
    Ok(vec![b.finish("mub_thresholds.csv", summary.trim_end_matches("; ").to_string())])
}

fn process_q(tol: &Tolerances) -> CliResult<Vec<Table>> {
    let mut b = Builder::new("process-q", tol, Some(SEED), &["pair", "degree"]);
    let (dm, dn) = orthogonal_probe_pair();
    let q = tester_degree(&dm, &dn, tol)?.value;
    b.row(vec!["orthogonal-probes".into(), f(q)]);
    let (_, _, z) = mub_qubit();
    let h = 1.0 / 2f64.sqrt();
    let plus = State::pure(&[cx(h, 0.0), cx(h, 0.0)])?;
    let a = Tester::probe_measure(&State::basis(2, 0), &z)?;
    let c = Tester::probe_measure(&plus, &z)?;
    b.row(vec!["probes-0-plus".into(), f(tester_degree(&a, &c, tol)?.value)]);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for k in 0..5 {
        let t1 = Tester::probe_measure(&random_state(2, &mut rng), &random_povm(2, 2, &mut rng)?)?;
        let t2 = Tester::probe_measure(&random_state(2, &mut rng), &random_povm(2, 2, &mut rng)?)?;
        b.row(vec![format!("random-{k}"), f(tester_degree(&t1, &t2, tol)?.value)]);
    }
    Ok(vec![b.finish("process_q.csv", format!("orthogonal-probe degree {q:.4}"))])
}

fn robustness_table(tol: &Tolerances) -> CliResult<Vec<Table>> {
    let (_, _, z) = mub_qubit();
    let id = Channel::identity(2);
    let pairs = [
        ("id,id", DevicePair::Channels(id.clone(), id.clone())),
        ("Z,id", DevicePair::ObservableChannel(z, id)),
    ];
    let classes = [
        ("trivial", NoiseClass::TrivialNoise),
        ("compatible", NoiseClass::CompatibleNoise),
        ("arbitrary", NoiseClass::ArbitraryNoise),
    ];
    let mut b = Builder::new("robustness", tol, None, &["pair", "noise", "robustness"]);
    let mut summary = String::new();
    for (name, pair) in &pairs {
        for (cname, class) in classes {
            let r = robustness(pair, class, tol)?;
            if cname == "arbitrary" {
                summary.push_str(&format!("{name}: {r:.4}; "));
            }
            b.row(vec![name.to_string(), cname.into(), f(r)]);
        }
    }
    Ok(vec![b.finish("robustness.csv", summary.trim_end_matches("; ").to_string())])
}
