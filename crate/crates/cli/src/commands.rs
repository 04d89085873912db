use crate::device_file::{load, Device, DeviceFile};
use crate::record::{ConfigSnapshot, ResultRecord};
use crate::reproduce::{self, Target};
use crate::{CliError, CliResult, EXIT_FEASIBLE, EXIT_INFEASIBLE, EXIT_UNDECIDED};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qincompat::chancompat::{check_channel_pair, robustness, DevicePair, NoiseClass};
use qincompat::devices::{fourier_pair, mub_qubit, Channel, Observable, State};
use qincompat::obschan::check_obs_channel;
use qincompat::obscompat::{
    check_joint, commutator_bound, degree_of_compatibility_parallel, has_projection_in_range,
    is_informationally_complete, jordan_criterion, miyadera_imai, postprocessing_order, region_membership,
    unsharpness, JordanOutcome, MiyaderaImaiOutcome, NoiseMode, NoiseSpec, OrderOutcome,
};
use qincompat::process::{commutation_vs_compat_report, orthogonal_probe_pair, tester_degree, Tester};
use qincompat::sdp::Status;
use qincompat::steering::{assemblage_from, check_lhs, maximally_entangled, steering_jm_crosscheck};
use qincompat::Tolerances;
use rayon::prelude::*;
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(name = "qincompat", version, about = "Compatibility of quantum observables, channels, instruments and testers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Joint measurability of two or more observables.
    CheckJoint {
        files: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Degree of compatibility by bisection.
    Degree {
        files: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Membership of weights in the compatibility region, or a grid sweep.
    Region {
        files: Vec<PathBuf>,
        /// Comma-separated mixing weights, one per observable.
        #[arg(long, value_delimiter = ',')]
        weights: Vec<f64>,
        /// Dimension for the closed-form position–momentum comparison column.
        #[arg(long)]
        formula_dim: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Analytic incompatibility criteria for a pair of observables.
    Criteria {
        files: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Compatibility of two channels with a common input.
    ChannelCompat {
        files: Vec<PathBuf>,
        /// Also report the robustness against this noise class.
        #[arg(long, value_enum)]
        robustness: Option<NoiseArg>,
        #[command(flatten)]
        common: Common,
    },
    /// Existence of an instrument realizing an observable and a channel.
    ObsChannel {
        files: Vec<PathBuf>,
        #[arg(long, value_enum)]
        robustness: Option<NoiseArg>,
        #[command(flatten)]
        common: Common,
    },
    /// Local hidden state model for an assemblage file, or for a state file
    /// followed by observables on its first factor.
    Steering {
        files: Vec<PathBuf>,
        /// Dimension of the measured factor when a state file is given.
        #[arg(long)]
        dim_a: Option<usize>,
        /// Compare with joint measurability on the maximally entangled state at
        /// this noise weight (observable files only).
        #[arg(long)]
        crosscheck: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Compatibility and commutators of two testers.
    Process {
        files: Vec<PathBuf>,
        /// Also compute the degree with optimized trivial-tester noise.
        #[arg(long)]
        degree: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Post-processing order: is the first observable a post-processing of the second?
    Order {
        files: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Writes a built-in device as a JSON device file.
    Generate {
        #[arg(value_enum)]
        device: Builtin,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Regenerates reference tables as CSV files.
    Reproduce {
        #[arg(value_enum)]
        target: Target,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Feasibility residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Threshold (bisection) accuracy.
    #[arg(long)]
    pub bisect_tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, value_enum, default_value_t = NoiseModeArg::Optimized)]
    pub noise_mode: NoiseModeArg,
    /// Weight grid `a:b:n`.
    #[arg(long)]
    pub grid: Option<Grid>,
    /// Print the machine-readable record instead of the table.
    #[arg(long)]
    pub json: bool,
    /// Output file (record, CSV or device file) or directory for `reproduce`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker count for bisection probes and grid points.
    #[arg(long, default_value_t = 1)]
    pub parallel: usize,
    /// File receiving the witness device when feasible.
    #[arg(long)]
    pub witness: Option<PathBuf>,
}

impl Common {
    pub fn tolerances(&self) -> Tolerances {
        let mut t = Tolerances::default();
        if let Some(v) = self.tol {
            t.feas = v;
        }
        if let Some(v) = self.bisect_tol {
            t.bisect = v;
        }
        if let Some(v) = self.max_iter {
            t.max_iter = v;
        }
        t
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseModeArg {
    Uniform,
    #[default]
    Optimized,
}

impl From<NoiseModeArg> for NoiseMode {
    fn from(m: NoiseModeArg) -> Self {
        match m {
            NoiseModeArg::Uniform => NoiseMode::UniformTrivial,
            NoiseModeArg::Optimized => NoiseMode::OptimizedTrivial,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseArg {
    Trivial,
    Compatible,
    Arbitrary,
}

impl From<NoiseArg> for NoiseClass {
    fn from(n: NoiseArg) -> Self {
        match n {
            NoiseArg::Trivial => NoiseClass::TrivialNoise,
            NoiseArg::Compatible => NoiseClass::CompatibleNoise,
            NoiseArg::Arbitrary => NoiseClass::ArbitraryNoise,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    /// Qubit σ_x eigenbasis.
    X,
    Y,
    Z,
    /// Computational basis in dimension `--dim`.
    Q,
    /// Fourier basis in dimension `--dim`.
    P,
    IdentityChannel,
    /// Complete depolarization to the maximally mixed state.
    Depolarizing,
    MaximallyEntangled,
    MaximallyMixed,
    /// Probe `|0⟩`, measure σ_z.
    Probe0,
    /// Probe `|1⟩`, measure σ_z.
    Probe1,
}

/// Evenly spaced weights `a, …, b` with `n` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.from];
        }
        (0..self.points)
            .map(|k| self.from + (self.to - self.from) * k as f64 / (self.points - 1) as f64)
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err("expected a:b:n".into());
        }
        let num = |p: &str| p.parse::<f64>().map_err(|e| format!("{p}: {e}"));
        let (from, to) = (num(parts[0])?, num(parts[1])?);
        let points: usize = parts[2].parse().map_err(|e| format!("{}: {e}", parts[2]))?;
        if points == 0 || !(0.0..=1.0).contains(&from) || !(0.0..=1.0).contains(&to) {
            return Err("weights must lie in [0, 1] with at least one point".into());
        }
        Ok(Self { from, to, points })
    }
}

/// Result of a command: record plus the lines shown to a human reader.
pub struct Report {
    pub record: ResultRecord,
    pub lines: Vec<String>,
    pub exit: i32,
}

pub fn status_exit(s: Status) -> i32 {
    match s {
        Status::Feasible => EXIT_FEASIBLE,
        Status::InfeasibleCertified | Status::InfeasibleHeuristic => EXIT_INFEASIBLE,
        Status::Undecided => EXIT_UNDECIDED,
    }
}

fn names(files: &[PathBuf]) -> Vec<String> {
    files.iter().map(|p| p.display().to_string()).collect()
}

fn expect_count(files: &[PathBuf], min: usize, max: Option<usize>, what: &str) -> CliResult<()> {
    let n = files.len();
    if n < min || max.is_some_and(|m| n > m) {
        let want = match max {
            Some(m) if m == min => format!("exactly {min}"),
            Some(m) => format!("{min} to {m}"),
            None => format!("at least {min}"),
        };
        return Err(CliError::Usage(format!("{what} needs {want} device files, got {n}")));
    }
    Ok(())
}

fn load_observables(files: &[PathBuf]) -> CliResult<Vec<Observable>> {
    files
        .iter()
        .map(|f| match load(f)? {
            Device::Observable(m) => Ok(m),
            d => Err(CliError::Input(format!("{}: expected an observable, found a {}", f.display(), d.kind()))),
        })
        .collect()
}

fn load_channel(f: &Path) -> CliResult<Channel> {
    match load(f)? {
        Device::Channel(c) => Ok(c),
        d => Err(CliError::Input(format!("{}: expected a channel, found a {}", f.display(), d.kind()))),
    }
}

fn load_tester(f: &Path) -> CliResult<Tester> {
    match load(f)? {
        Device::Tester(t) => Ok(t),
        d => Err(CliError::Input(format!("{}: expected a tester, found a {}", f.display(), d.kind()))),
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn write_device(path: &Path, d: Device) -> CliResult<()> {
    write_file(path, &DeviceFile::from_device(&d).to_canonical_string())
}

fn verdict_line(s: Status) -> String {
    format!("verdict: {}", s.label())
}

fn with_pool<R: Send>(k: usize, f: impl FnOnce() -> R + Send) -> CliResult<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(k.max(1))
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(pool.install(f))
}

pub fn check_joint_cmd(files: &[PathBuf], common: &Common) -> CliResult<Report> {
    expect_count(files, 2, None, "check-joint")?;
    let tol = common.tolerances();
    let obs = load_observables(files)?;
    let v = check_joint(&obs, &tol)?;
    if let (Some(path), Some(j)) = (&common.witness, &v.joint) {
        write_device(path, Device::Observable(j.observable().clone()))?;
    }
    let record = ResultRecord::new("check-joint", names(files), &tol).with_verdict(&v.verdict);
    Ok(Report {
        lines: vec![
            verdict_line(v.status()),
            format!("residual: {:.3e}  iterations: {}", v.verdict.residual, v.verdict.iterations),
        ],
        exit: status_exit(v.status()),
        record,
    })
}

pub fn degree_cmd(files: &[PathBuf], common: &Common) -> CliResult<Report> {
    expect_count(files, 2, None, "degree")?;
    let tol = common.tolerances();
    let obs = load_observables(files)?;
    let mode: NoiseMode = common.noise_mode.into();
    let d = degree_of_compatibility_parallel(&obs, mode, &tol, common.parallel.max(1))?;
    let record = ResultRecord::new("degree", names(files), &tol)
        .detail("upper", d.upper)
        .detail("evaluations", d.evaluations)
        .detail("noise_mode", format!("{:?}", common.noise_mode).to_lowercase());
    let mut record = record;
    record.value = Some(d.value);
    Ok(Report {
        lines: vec![format!("degree: {:.4}  (infeasible above {:.4}, {} probes)", d.value, d.upper, d.evaluations)],
        exit: EXIT_FEASIBLE,
        record,
    })
}

pub fn region_cmd(files: &[PathBuf], weights: &[f64], formula_dim: Option<usize>, common: &Common) -> CliResult<Report> {
    expect_count(files, 2, None, "region")?;
    let tol = common.tolerances();
    let obs = load_observables(files)?;
    let mode: NoiseMode = common.noise_mode.into();
    if let Some(grid) = common.grid {
        if obs.len() != 2 {
            return Err(CliError::Usage("--grid sweeps exactly two observables".into()));
        }
        let vals = grid.values();
        let points: Vec<(f64, f64)> = vals.iter().flat_map(|&a| vals.iter().map(move |&b| (a, b))).collect();
        let verdicts = with_pool(common.parallel, || {
            points
                .par_iter()
                .map(|&(a, b)| {
                    let spec = NoiseSpec::new(vec![a, b], mode.clone())?;
                    Ok(region_membership(&obs, &spec, &tol)?.status())
                })
                .collect::<qincompat::Result<Vec<Status>>>()
        })??;
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["lambda1", "lambda2", "verdict"];
        if formula_dim.is_some() {
            header.push("formula");
        }
        w.write_record(&header).expect("in-memory");
        for (&(a, b), s) in points.iter().zip(&verdicts) {
            let mut row = vec![a.to_string(), b.to_string(), s.label().to_string()];
            if let Some(d) = formula_dim {
                row.push(qincompat::obscompat::region_formula_qp(d, a, b).to_string());
            }
            w.write_record(&row).expect("in-memory");
        }
        let csv_text = format!(
            "{}\n{}",
            ConfigSnapshot::from(&tol).header_line(),
            String::from_utf8(w.into_inner().expect("in-memory")).expect("utf8")
        );
        let feasible = verdicts.iter().filter(|s| s.is_feasible()).count();
        let record = ResultRecord::new("region", names(files), &tol)
            .detail("grid_points", points.len())
            .detail("feasible_points", feasible);
        let lines = match &common.out {
            Some(path) => {
                write_file(path, &csv_text)?;
                vec![format!("{} of {} grid points feasible; CSV written to {}", feasible, points.len(), path.display())]
            }
            None => csv_text.lines().map(String::from).collect(),
        };
        return Ok(Report {
            record,
            lines,
            exit: EXIT_FEASIBLE,
        });
    }
    if weights.len() != obs.len() {
        return Err(CliError::Usage(format!(
            "--weights needs {} values (or use --grid a:b:n)",
            obs.len()
        )));
    }
    let spec = NoiseSpec::new(weights.to_vec(), mode)?;
    let v = region_membership(&obs, &spec, &tol)?;
    let mut lines = vec![verdict_line(v.status())];
    let mut record = ResultRecord::new("region", names(files), &tol)
        .with_verdict(&v.verdict)
        .detail("weights", weights.to_vec());
    if let (Some(d), [a, b]) = (formula_dim, weights) {
        let f = qincompat::obscompat::region_formula_qp(d, *a, *b);
        lines.push(format!("closed form (d={d}): {}", if f { "inside" } else { "outside" }));
        record = record.detail("formula", f);
    }
    if let (Some(path), Some(j)) = (&common.witness, &v.joint) {
        write_device(path, Device::Observable(j.observable().clone()))?;
    }
    Ok(Report {
        exit: status_exit(v.status()),
        record,
        lines,
    })
}

pub fn criteria_cmd(files: &[PathBuf], common: &Common) -> CliResult<Report> {
    expect_count(files, 2, Some(2), "criteria")?;
    let tol = common.tolerances();
    let obs = load_observables(files)?;
    let (m, n) = (&obs[0], &obs[1]);
    let mut lines = Vec::new();
    let mut record = ResultRecord::new("criteria", names(files), &tol);
    match jordan_criterion(&obs)? {
        JordanOutcome::CompatibleCertified(_) => {
            lines.push("jordan: COMPATIBLE_CERTIFIED".into());
            record = record.detail("jordan", "COMPATIBLE_CERTIFIED");
        }
        JordanOutcome::Inconclusive { min_eigenvalue } => {
            lines.push(format!("jordan: INCONCLUSIVE (min eigenvalue {min_eigenvalue:.6})"));
            record = record.detail("jordan", json!({"status": "INCONCLUSIVE", "min_eigenvalue": min_eigenvalue}));
        }
    }
    match miyadera_imai(m, n)? {
        MiyaderaImaiOutcome::IncompatibleCertified { x, y, lhs, rhs } => {
            lines.push(format!("miyadera-imai: CERTIFIED x={x} y={y} ‖[A,B]‖²={lhs:.6} > {rhs:.6}"));
            record = record.detail(
                "miyadera_imai",
                json!({"status": "CERTIFIED", "x": x, "y": y, "lhs": lhs, "rhs": rhs}),
            );
        }
        MiyaderaImaiOutcome::Inconclusive { best_margin } => {
            lines.push(format!("miyadera-imai: INCONCLUSIVE (best margin {best_margin:.3e})"));
            record = record.detail("miyadera_imai", json!({"status": "INCONCLUSIVE", "best_margin": best_margin}));
        }
    }
    let c = commutator_bound(m, n)?;
    let (um, un) = (unsharpness(m)?, unsharpness(n)?);
    let (icm, icn) = (is_informationally_complete(m)?, is_informationally_complete(n)?);
    lines.push(format!("commutator bound: {c:.6}"));
    lines.push(format!("unsharpness: {um:.6} {un:.6}"));
    lines.push(format!("informationally complete: {icm} {icn}"));
    record = record
        .detail("commutator_bound", c)
        .detail("unsharpness", vec![um, un])
        .detail("informationally_complete", vec![icm, icn]);
    if m.num_outcomes() <= qincompat::obscompat::RANGE_SCAN_CAP && n.num_outcomes() <= qincompat::obscompat::RANGE_SCAN_CAP {
        let (pm, pn) = (has_projection_in_range(m)?, has_projection_in_range(n)?);
        lines.push(format!("nontrivial projection in range: {pm} {pn}"));
        record = record.detail("projection_in_range", vec![pm, pn]);
    }
    Ok(Report {
        record,
        lines,
        exit: EXIT_FEASIBLE,
    })
}

pub fn channel_compat_cmd(files: &[PathBuf], noise: Option<NoiseArg>, common: &Common) -> CliResult<Report> {
    expect_count(files, 2, Some(2), "channel-compat")?;
    let tol = common.tolerances();
    let (a, b) = (load_channel(&files[0])?, load_channel(&files[1])?);
    let v = check_channel_pair(&a, &b, &tol)?;
    if let (Some(path), Some(j)) = (&common.witness, &v.joint) {
        write_device(path, Device::Channel(j.clone()))?;
    }
    let mut record = ResultRecord::new("channel-compat", names(files), &tol).with_verdict(&v.verdict);
    let mut lines = vec![verdict_line(v.status())];
    if let Some(n) = noise {
        let r = robustness(&DevicePair::Channels(a, b), n.into(), &tol)?;
        lines.push(format!("robustness ({n:?}): {r:.4}").to_lowercase());
        record.value = Some(r);
    }
    Ok(Report {
        exit: status_exit(v.status()),
        record,
        lines,
    })
}

pub fn obs_channel_cmd(files: &[PathBuf], noise: Option<NoiseArg>, common: &Common) -> CliResult<Report> {
    expect_count(files, 2, Some(2), "obs-channel")?;
    let tol = common.tolerances();
    let m = load_observables(&files[..1])?.remove(0);
    let c = load_channel(&files[1])?;
    let v = check_obs_channel(&m, &c, &tol)?;
    if let (Some(path), Some(inst)) = (&common.witness, &v.instrument) {
        let dump = json!({
            "kind": "instrument",
            "in_dim": inst.in_dim(),
            "out_dim": inst.out_dim(),
            "operation_chois": inst.operation_chois().iter().map(|h| {
                let m = h.as_matrix();
                (0..m.rows()).map(|r| (0..m.cols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect::<Vec<_>>()).collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
        });
        write_file(path, &(serde_json::to_string_pretty(&dump).expect("serializable") + "\n"))?;
    }
    let mut record = ResultRecord::new("obs-channel", names(files), &tol).with_verdict(&v.verdict);
    let mut lines = vec![verdict_line(v.status())];
    if let Some(n) = noise {
        let r = robustness(&DevicePair::ObservableChannel(m, c), n.into(), &tol)?;
        lines.push(format!("robustness ({n:?}): {r:.4}").to_lowercase());
        record.value = Some(r);
    }
    Ok(Report {
        exit: status_exit(v.status()),
        record,
        lines,
    })
}

pub fn steering_cmd(files: &[PathBuf], dim_a: Option<usize>, crosscheck: Option<f64>, common: &Common) -> CliResult<Report> {
    expect_count(files, 1, None, "steering")?;
    let tol = common.tolerances();
    if let Some(lambda) = crosscheck {
        let obs = load_observables(files)?;
        let r = steering_jm_crosscheck(&obs, lambda, &tol)?;
        let record = ResultRecord::new("steering", names(files), &tol)
            .with_status(r.lhs)
            .detail("joint", r.joint.label())
            .detail("agree", r.agree)
            .detail("lhs_threshold", r.lhs_threshold)
            .detail("joint_threshold", r.joint_threshold);
        return Ok(Report {
            lines: vec![
                format!("lhs at λ={lambda}: {}", r.lhs.label()),
                format!("joint measurability of transposes: {}", r.joint.label()),
                format!("agree: {}", r.agree),
                format!("thresholds: lhs {:.4}  joint {:.4}", r.lhs_threshold, r.joint_threshold),
            ],
            exit: status_exit(r.lhs),
            record,
        });
    }
    let assemblage = match load(&files[0])? {
        Device::Assemblage(a) => {
            expect_count(files, 1, Some(1), "steering with an assemblage")?;
            a
        }
        Device::State(s) => {
            let da = dim_a.ok_or_else(|| CliError::Usage("--dim-a is required with a state file".into()))?;
            let obs = load_observables(&files[1..])?;
            if obs.is_empty() {
                return Err(CliError::Usage("state file must be followed by observable files".into()));
            }
            assemblage_from(&s, da, &obs)?
        }
        Device::Observable(_) => {
            let obs = load_observables(files)?;
            let d = obs[0].dim();
            assemblage_from(&maximally_entangled(d), d, &obs)?
        }
        d => return Err(CliError::Input(format!("steering does not accept a {}", d.kind()))),
    };
    let v = check_lhs(&assemblage, &tol)?;
    let record = ResultRecord::new("steering", names(files), &tol)
        .with_verdict(&v.verdict)
        .detail("unsteerable", v.is_unsteerable());
    Ok(Report {
        lines: vec![
            verdict_line(v.status()),
            if v.is_unsteerable() { "local hidden state model found" } else { "no local hidden state model" }.into(),
        ],
        exit: status_exit(v.status()),
        record,
    })
}

pub fn process_cmd(files: &[PathBuf], degree: bool, common: &Common) -> CliResult<Report> {
    expect_count(files, 2, Some(2), "process")?;
    let tol = common.tolerances();
    let (a, b) = (load_tester(&files[0])?, load_tester(&files[1])?);
    let r = commutation_vs_compat_report(&a, &b, &tol)?;
    let mut lines = vec![verdict_line(r.status), format!("max effect commutator: {:.3e}", r.max_commutator)];
    for (j, row) in r.commutators.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|c| format!("{c:.3e}")).collect();
        lines.push(format!("  ‖[M_{j}, N_l]‖: {}", cells.join(" ")));
    }
    let mut record = ResultRecord::new("process", names(files), &tol)
        .with_status(r.status)
        .detail("commutators", r.commutators.clone())
        .detail("max_commutator", r.max_commutator);
    if degree {
        let d = tester_degree(&a, &b, &tol)?;
        lines.push(format!("degree: {:.4}", d.value));
        record.value = Some(d.value);
    }
    Ok(Report {
        exit: status_exit(r.status),
        record,
        lines,
    })
}

pub fn order_cmd(files: &[PathBuf], common: &Common) -> CliResult<Report> {
    expect_count(files, 2, Some(2), "order")?;
    let tol = common.tolerances();
    let obs = load_observables(files)?;
    let record = ResultRecord::new("order", names(files), &tol);
    Ok(match postprocessing_order(&obs[0], &obs[1], &tol)? {
        OrderOutcome::Below(p) => {
            let rows: Vec<Vec<f64>> = (0..p.rows()).map(|y| (0..p.cols()).map(|x| p.get(y, x)).collect()).collect();
            let mut lines = vec!["verdict: BELOW".to_string(), "post-processing p(y|x):".into()];
            lines.extend(rows.iter().map(|r| {
                format!("  {}", r.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(" "))
            }));
            Report {
                record: record.with_status(Status::Feasible).detail("postprocessing", rows),
                lines,
                exit: EXIT_FEASIBLE,
            }
        }
        OrderOutcome::NotBelow(s) => Report {
            record: record.with_status(s),
            lines: vec![format!("verdict: NOT_BELOW ({})", s.label())],
            exit: status_exit(s).max(EXIT_INFEASIBLE),
        },
    })
}

pub fn builtin_device(b: Builtin, dim: usize) -> CliResult<Device> {
    let (x, y, z) = mub_qubit();
    Ok(match b {
        Builtin::X => Device::Observable(x),
        Builtin::Y => Device::Observable(y),
        Builtin::Z => Device::Observable(z),
        Builtin::Q => Device::Observable(fourier_pair(dim)?.0),
        Builtin::P => Device::Observable(fourier_pair(dim)?.1),
        Builtin::IdentityChannel => Device::Channel(Channel::identity(dim)),
        Builtin::Depolarizing => Device::Channel(Channel::depolarizing_to(&State::maximally_mixed(dim), dim)),
        Builtin::MaximallyEntangled => Device::State(maximally_entangled(dim)),
        Builtin::MaximallyMixed => Device::State(State::maximally_mixed(dim)),
        Builtin::Probe0 => Device::Tester(orthogonal_probe_pair().0),
        Builtin::Probe1 => Device::Tester(orthogonal_probe_pair().1),
    })
}

pub fn generate_cmd(b: Builtin, dim: usize, common: &Common) -> CliResult<Report> {
    let tol = common.tolerances();
    let d = builtin_device(b, dim)?;
    let text = DeviceFile::from_device(&d).to_canonical_string();
    let lines = match &common.out {
        Some(path) => {
            write_file(path, &text)?;
            vec![format!("{} written to {}", d.kind(), path.display())]
        }
        None => text.lines().map(String::from).collect(),
    };
    Ok(Report {
        record: ResultRecord::new("generate", vec![format!("{b:?}").to_lowercase()], &tol),
        lines,
        exit: EXIT_FEASIBLE,
    })
}

pub fn reproduce_cmd(target: Target, common: &Common) -> CliResult<Report> {
    let tol = common.tolerances();
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("reproduce"));
    std::fs::create_dir_all(&dir)?;
    let tables = reproduce::run(target, &tol, common.parallel.max(1))?;
    let mut lines = Vec::new();
    let mut record = ResultRecord::new("reproduce", vec![target.name().into()], &tol);
    for t in &tables {
        let path = dir.join(&t.file);
        write_file(&path, &t.csv)?;
        lines.push(format!("{} ({} rows) -> {}", t.summary, t.rows, path.display()));
        record = record.detail(&t.file, t.summary.clone());
    }
    Ok(Report {
        record,
        lines,
        exit: EXIT_FEASIBLE,
    })
}

/// Runs a parsed command; prints the table or the JSON record.
pub fn execute(cli: Cli) -> i32 {
    let start = Instant::now();
    let (result, common) = match &cli.command {
        Command::CheckJoint { files, common } => (check_joint_cmd(files, common), common),
        Command::Degree { files, common } => (degree_cmd(files, common), common),
        Command::Region {
            files,
            weights,
            formula_dim,
            common,
        } => (region_cmd(files, weights, *formula_dim, common), common),
        Command::Criteria { files, common } => (criteria_cmd(files, common), common),
        Command::ChannelCompat {
            files,
            robustness,
            common,
        } => (channel_compat_cmd(files, *robustness, common), common),
        Command::ObsChannel {
            files,
            robustness,
            common,
        } => (obs_channel_cmd(files, *robustness, common), common),
        Command::Steering {
            files,
            dim_a,
            crosscheck,
            common,
        } => (steering_cmd(files, *dim_a, *crosscheck, common), common),
        Command::Process { files, degree, common } => (process_cmd(files, *degree, common), common),
        Command::Order { files, common } => (order_cmd(files, common), common),
        Command::Generate { device, dim, common } => (generate_cmd(*device, *dim, common), common),
        Command::Reproduce { target, common } => (reproduce_cmd(*target, common), common),
    };
    match result {
        Ok(mut report) => {
            report.record.wall_time_s = start.elapsed().as_secs_f64();
            let writes_file = match &cli.command {
                Command::Generate { .. } | Command::Reproduce { .. } => true,
                Command::Region { .. } => common.grid.is_some(),
                _ => false,
            };
            if let (Some(path), false) = (&common.out, writes_file) {
                let text = if path.extension().is_some_and(|e| e == "csv") {
                    report.record.to_csv()
                } else {
                    report.record.to_json() + "\n"
                };
                if let Err(e) = write_file(path, &text) {
                    eprintln!("{e}");
                    return e.exit_code();
                }
            }
            let mut out = std::io::stdout().lock();
            if common.json {
                let _ = writeln!(out, "{}", report.record.to_json());
            } else {
                for l in &report.lines {
                    let _ = writeln!(out, "{l}");
                }
            }
            report.exit
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
