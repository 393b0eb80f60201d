use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;

use hjdecay::analysis::{
    detect_extinction, fit_decay_rate, sup_distance, DecayReport, ExtinctionReport, Report, RunMetadata,
    EXTINCTION_FLOOR,
};
use hjdecay::data::InitialDatum;
use hjdecay::domain::{first_eigenpair, GridFunction, Interval};
use hjdecay::exact::{profiled_rearrangement, stationary_ball, ColeHopf};
use hjdecay::solver::{hj_solve, hj_solve_with, HJProblem, Regime, SolverConfig};
use hjdecay::spectral::{compute_spectrum, r1_cross_identities, r1_sweep_csv};
use hjdecay::verify::{run_all, Summary, CRITERIA};
use hjdecay::HjError;
use serde::Serialize;

use crate::config::{out_dir, parse_u0, pick, DtSetting, FileConfig, Oracle, U0Source};
use crate::{CliError, Common, RearrangeArgs, SolveArgs, SpectrumArgs, StationaryArgs, VerifyArgs};

struct Output {
    dir: PathBuf,
    name: String,
}

impl Output {
    fn new(common: &Common, file: &mut FileConfig, default_name: &str) -> Self {
        Self {
            dir: out_dir(common.out.clone(), file.out.take()),
            name: pick(common.name.clone(), file.name.take(), default_name.to_string()),
        }
    }

    fn file(&self, suffix: &str) -> String {
        format!("{}{suffix}", self.name)
    }

    fn write(&self, file: &str, contents: &str) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&self.dir).map_err(CliError::io)?;
        let path = self.dir.join(file);
        fs::write(&path, contents).map_err(CliError::io)?;
        println!("wrote {}", path.display());
        Ok(path)
    }

    fn write_json<T: Serialize>(&self, file: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut s = serde_json::to_string_pretty(value).expect("plain data");
        s.push('\n');
        self.write(file, &s)
    }

    fn write_field(&self, file: &str, f: &GridFunction) -> Result<PathBuf, CliError> {
        let mut buf = Vec::new();
        f.write_csv(&mut buf).map_err(CliError::io)?;
        self.write(file, &String::from_utf8(buf).expect("ascii csv"))
    }
}

fn load_config(common: &Common) -> Result<FileConfig, CliError> {
    FileConfig::load(common.config.as_deref())
}

fn required(v: Option<f64>, key: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing {key} (flag --{} or config key {key})", key.replace('_', "-"))))
}

#[derive(Debug, Serialize)]
struct SolveConfig {
    a: f64,
    p: f64,
    u0: U0Source,
    n_cells: usize,
    t_end: f64,
    dt: DtSetting,
    record_every: usize,
    extinction_floor: f64,
    snapshots: Vec<f64>,
    oracle: Option<Oracle>,
    fit_window: (f64, f64),
}

#[derive(Debug, Serialize)]
struct FinalState {
    t: f64,
    sup_norm: f64,
    grad_sup_norm: f64,
}

#[derive(Debug, Serialize)]
struct OracleReport {
    kind: Oracle,
    max_sup_error: f64,
    final_sup_error: f64,
}

#[derive(Debug, Serialize)]
struct Snapshot {
    t: f64,
    file: String,
}

#[derive(Debug, Serialize)]
struct SolveBody<'a> {
    config: &'a SolveConfig,
    regime: Regime,
    warnings: Vec<String>,
    #[serde(rename = "final")]
    final_state: FinalState,
    extinction: ExtinctionReport,
    decay: Option<DecayReport>,
    decay_note: Option<String>,
    oracle: Option<OracleReport>,
    trajectory: String,
    snapshots: Vec<Snapshot>,
}

#[derive(Debug, Serialize)]
struct SolveFailure<'a> {
    config: &'a SolveConfig,
    error: String,
    step: Option<usize>,
    time: Option<f64>,
}

/// Rate the fit is compared against, when one is known for the regime.
fn theoretical_rate(problem: &HJProblem, lambda1: f64) -> Option<f64> {
    match problem.regime() {
        Regime::Extinction => None,
        Regime::Spectral if problem.interval() == Interval::symmetric() => {
            hjdecay::spectral::decay_rate_r1(problem.a).ok().map(|d| d.r1)
        }
        Regime::Spectral => None,
        Regime::HeatRate | Regime::Envelope => Some(lambda1),
    }
}

pub fn solve(args: SolveArgs) -> Result<(), CliError> {
    let mut file = load_config(&args.common)?;
    let out = Output::new(&args.common, &mut file, "solve");
    let t_end = pick(args.t_end, file.t_end, 1.0);
    let default_window = if t_end > 1.0 { (1.0, t_end) } else { (0.5 * t_end, t_end) };
    let mut cfg = SolveConfig {
        a: required(args.a.or(file.a), "a")?,
        p: required(args.p.or(file.p), "p")?,
        u0: pick(parse_u0(args.u0)?, parse_u0(file.u0)?, U0Source::Named(InitialDatum::E1)),
        n_cells: pick(args.n_cells, file.n_cells, 512),
        t_end,
        dt: pick(args.dt, file.dt, DtSetting::Auto),
        record_every: pick(args.record_every, file.record_every, 100),
        extinction_floor: pick(args.extinction_floor, file.extinction_floor, 1e-12),
        snapshots: pick(args.snapshots, file.snapshots, Vec::new()),
        oracle: args.oracle.or(file.oracle),
        fit_window: (
            pick(args.fit_from, file.fit_from, default_window.0),
            pick(args.fit_to, file.fit_to, default_window.1),
        ),
    };

    let u0 = cfg.u0.load(cfg.n_cells)?;
    // A file datum brings its own grid.
    cfg.n_cells = u0.grid().n_cells;
    let problem = HJProblem::new(cfg.a, cfg.p, u0).map_err(CliError::invalid)?;
    let solver = SolverConfig {
        dt: cfg.dt.into(),
        t_end: cfg.t_end,
        record_every: cfg.record_every,
        extinction_floor: cfg.extinction_floor,
        snapshot_times: cfg.snapshots.clone(),
        ..SolverConfig::default()
    };
    solver.validate().map_err(CliError::invalid)?;
    let oracle = match cfg.oracle {
        Some(Oracle::ColeHopf) => {
            if problem.p != 2.0 {
                return Err(CliError::Usage(format!("the cole-hopf oracle needs p = 2, got p = {}", problem.p)));
            }
            Some(ColeHopf::new(problem.a, &problem.u0).map_err(CliError::invalid)?)
        }
        None => None,
    };

    let mut errors = Vec::new();
    let mut oracle_failure = None;
    let run = hj_solve_with(&problem, &solver, |t, u| {
        if let Some(ch) = &oracle {
            match ch.solution(t).and_then(|exact| sup_distance(u, &exact)) {
                Ok(e) => errors.push(e),
                Err(e) => {
                    oracle_failure.get_or_insert(e);
                    errors.push(f64::NAN);
                }
            }
        }
    });
    let traj = match run {
        Ok(t) => t,
        Err(e) => {
            let (step, time) = match e {
                HjError::NonFinite { step, time } => (Some(step), Some(time)),
                _ => (None, None),
            };
            let failure = SolveFailure { config: &cfg, error: e.to_string(), step, time };
            out.write_json(&out.file(".error.json"), &failure)?;
            return Err(CliError::Failed(format!("solver failed: {e}")));
        }
    };
    if let Some(e) = oracle_failure {
        return Err(CliError::Failed(format!("oracle failed: {e}")));
    }

    let mut csv = String::from("t,sup_norm,grad_sup_norm");
    if oracle.is_some() {
        csv.push_str(",sup_error");
    }
    csv.push('\n');
    for i in 0..traj.len() {
        csv.push_str(&format!("{:.16e},{:.16e},{:.16e}", traj.times[i], traj.sup_norms[i], traj.grad_sup_norms[i]));
        if let Some(e) = errors.get(i) {
            csv.push_str(&format!(",{e:.16e}"));
        }
        csv.push('\n');
    }
    let traj_file = out.file(".trajectory.csv");
    out.write(&traj_file, &csv)?;

    let mut snapshots = Vec::new();
    for (k, (t, field)) in traj.snapshots.iter().enumerate() {
        let f = out.file(&format!(".snapshot{k}.csv"));
        out.write_field(&f, field)?;
        snapshots.push(Snapshot { t: *t, file: f });
    }

    let lambda1 = first_eigenpair(problem.grid()).map_err(CliError::invalid)?.lambda1;
    let (decay, decay_note) = match fit_decay_rate(&traj, cfg.fit_window) {
        Ok(r) => match theoretical_rate(&problem, lambda1) {
            Some(rate) => (Some(r.with_theory(rate)), None),
            None => (Some(r), None),
        },
        Err(e) => (None, Some(e.to_string())),
    };
    let last = traj.len() - 1;
    let body = SolveBody {
        config: &cfg,
        regime: problem.regime(),
        warnings: problem.warnings(),
        final_state: FinalState {
            t: traj.times[last],
            sup_norm: traj.sup_norms[last],
            grad_sup_norm: traj.grad_sup_norms[last],
        },
        extinction: detect_extinction(&traj, EXTINCTION_FLOOR.max(cfg.extinction_floor)),
        decay,
        decay_note,
        oracle: oracle.as_ref().map(|_| OracleReport {
            kind: Oracle::ColeHopf,
            max_sup_error: errors.iter().copied().fold(0.0, f64::max),
            final_sup_error: errors[last],
        }),
        trajectory: traj_file,
        snapshots,
    };
    for w in &body.warnings {
        eprintln!("warning: {w}");
    }
    let report = Report { metadata: RunMetadata::new(&problem, &solver, &traj), body };
    out.write(&out.file(".report.json"), &(report.to_json() + "\n"))?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct SpectrumReport {
    config: SpectrumConfig,
    alpha1: f64,
    r1: f64,
    lambda1: f64,
    max_residual: f64,
    identity_gap: f64,
    csv: String,
}

#[derive(Debug, Serialize)]
struct SpectrumConfig {
    a: f64,
    modes: usize,
}

#[derive(Debug, Serialize)]
struct SweepReport {
    config: SweepConfig,
    rows: usize,
    csv: String,
}

#[derive(Debug, Serialize)]
struct SweepConfig {
    a_from: f64,
    a_to: f64,
    a_steps: usize,
}

pub fn spectrum(args: SpectrumArgs) -> Result<(), CliError> {
    let mut file = load_config(&args.common)?;
    if args.sweep || file.sweep == Some(true) {
        let out = Output::new(&args.common, &mut file, "r1_sweep");
        let config = SweepConfig {
            a_from: pick(args.a_from, file.a_from, -5.0),
            a_to: pick(args.a_to, file.a_to, 8.0),
            a_steps: pick(args.a_steps, file.a_steps, 260),
        };
        let csv = r1_sweep_csv(config.a_from, config.a_to, config.a_steps).map_err(CliError::invalid)?;
        let csv_file = out.file(".csv");
        out.write(&csv_file, &csv)?;
        let rows = csv.lines().count() - 1;
        out.write_json(&out.file(".json"), &SweepReport { config, rows, csv: csv_file })?;
        return Ok(());
    }

    let out = Output::new(&args.common, &mut file, "spectrum");
    let config = SpectrumConfig { a: required(args.a.or(file.a), "a")?, modes: pick(args.modes, file.modes, 10) };
    if config.a == 0.0 {
        return Err(CliError::Usage("spectrum needs a != 0 (use --sweep for curves through a = 0)".into()));
    }
    if config.modes == 0 {
        return Err(CliError::Usage("modes must be >= 1".into()));
    }
    let spec = compute_spectrum(config.a, config.modes).map_err(CliError::invalid)?;
    let csv_file = out.file(".csv");
    out.write(&csv_file, &spec.to_csv())?;
    let report = SpectrumReport {
        alpha1: spec.alpha(1),
        r1: spec.r1(),
        lambda1: PI * PI / 4.0,
        max_residual: spec.modes.iter().map(|m| m.residual).fold(0.0, f64::max),
        identity_gap: r1_cross_identities(&spec).into_iter().map(f64::abs).fold(0.0, f64::max),
        csv: csv_file,
        config,
    };
    println!("r1 = {:.12}", report.r1);
    out.write_json(&out.file(".json"), &report)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    only: Vec<String>,
    #[serde(flatten)]
    summary: Summary,
}

pub fn verify(args: VerifyArgs) -> Result<(), CliError> {
    let mut file = load_config(&args.common)?;
    let out = Output::new(&args.common, &mut file, "verify");
    let only = pick(args.only, file.only, Vec::new());
    if let Some(bad) = only.iter().find(|id| !CRITERIA.iter().any(|(c, _)| c == id)) {
        let known: Vec<&str> = CRITERIA.iter().map(|(c, _)| *c).collect();
        return Err(CliError::Usage(format!("unknown criterion {bad:?}; known: {}", known.join(", "))));
    }
    let summary = run_all(&only, |o| println!("{o}"));
    let failed: Vec<String> = summary.failed_ids().into_iter().map(String::from).collect();
    let n = summary.criteria.len();
    out.write_json(&out.file(".json"), &VerifyReport { only, summary })?;
    if failed.is_empty() {
        println!("all {n} criteria passed");
        Ok(())
    } else {
        Err(CliError::Failed(format!("criteria failed: {}", failed.join(", "))))
    }
}

#[derive(Debug, Serialize)]
struct RearrangeReport {
    config: RearrangeConfig,
    sup_norm: f64,
    max_lift: f64,
    already_profiled: bool,
    input_csv: String,
    output_csv: String,
}

#[derive(Debug, Serialize)]
struct RearrangeConfig {
    u0: U0Source,
    n_cells: usize,
}

pub fn rearrange(args: RearrangeArgs) -> Result<(), CliError> {
    let mut file = load_config(&args.common)?;
    let out = Output::new(&args.common, &mut file, "rearrange");
    let mut config = RearrangeConfig {
        u0: pick(parse_u0(args.u0)?, parse_u0(file.u0)?, U0Source::Named(InitialDatum::Asym)),
        n_cells: pick(args.n_cells, file.n_cells, 512),
    };
    let u0 = config.u0.load(config.n_cells)?;
    config.n_cells = u0.grid().n_cells;
    let ubar = profiled_rearrangement(&u0).map_err(CliError::invalid)?;
    let lift = ubar.zip_with(&u0, |a, b| a - b).map_err(CliError::invalid)?;
    let (input_csv, output_csv) = (out.file(".input.csv"), out.file(".csv"));
    out.write_field(&input_csv, &u0)?;
    out.write_field(&output_csv, &ubar)?;
    let report = RearrangeReport {
        config,
        sup_norm: ubar.sup_norm(),
        max_lift: lift.max_value(),
        already_profiled: lift.max_value() == 0.0,
        input_csv,
        output_csv,
    };
    out.write_json(&out.file(".json"), &report)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct StationaryReport {
    config: StationaryConfig,
    peak: f64,
    radial_csv: String,
    field_csv: Option<String>,
    drift: Option<f64>,
}

#[derive(Debug, Serialize)]
struct StationaryConfig {
    p: f64,
    n_dim: usize,
    n_cells: usize,
    t_end: Option<f64>,
}

pub fn stationary(args: StationaryArgs) -> Result<(), CliError> {
    let mut file = load_config(&args.common)?;
    let out = Output::new(&args.common, &mut file, "stationary");
    let config = StationaryConfig {
        p: pick(args.p, file.p, 0.5),
        n_dim: pick(args.n_dim, file.n_dim, 1),
        n_cells: pick(args.n_cells, file.n_cells, 256),
        t_end: args.t_end.or(file.t_end),
    };
    if config.t_end.is_some() && config.n_dim != 1 {
        return Err(CliError::Usage("--t-end marches the profile on an interval and needs n_dim = 1".into()));
    }
    let profile = stationary_ball(config.p, config.n_dim, config.n_cells).map_err(CliError::invalid)?;
    let radial_csv = out.file(".radial.csv");
    out.write_field(&radial_csv, &profile.radial)?;
    let field_csv = match &profile.field {
        Some(f) => {
            let name = out.file(".field.csv");
            out.write_field(&name, f)?;
            Some(name)
        }
        None => None,
    };
    let drift = match (config.t_end, &profile.field) {
        (Some(t_end), Some(w)) => Some(march_drift(config.p, w, t_end)?),
        _ => None,
    };
    let report = StationaryReport {
        peak: hjdecay::exact::stationary_peak(config.p, config.n_dim),
        config,
        radial_csv,
        field_csv,
        drift,
    };
    out.write_json(&out.file(".json"), &report)?;
    Ok(())
}

/// Sup-distance between the profile and the a = 1 solution started from it.
fn march_drift(p: f64, w: &GridFunction, t_end: f64) -> Result<f64, CliError> {
    let problem = HJProblem::new(1.0, p, w.clone()).map_err(CliError::invalid)?;
    let cfg = SolverConfig::default().with_t_end(t_end).with_snapshots(vec![t_end]);
    cfg.validate().map_err(CliError::invalid)?;
    let traj = hj_solve(&problem, &cfg).map_err(|e| CliError::Failed(e.to_string()))?;
    let last = &traj.snapshots.last().expect("t_end snapshot").1;
    sup_distance(last, w).map_err(|e| CliError::Failed(e.to_string()))
}
