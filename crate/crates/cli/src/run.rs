//! Pipelines behind the subcommands.

use std::path::{Path, PathBuf};

use qspectral::fourier::{calibrate_with, parseval_residual, round_trip_residual};
use qspectral::io;
use qspectral::solvers::{ProblemKind, Provenance};
use qspectral::verification::{
    apriori_heat, classical_limit_study, residual_heat_physical, residual_wave_physical, uniqueness_probe,
};
use qspectral::{
    build_kernel_table_with, forward, solve_forced_wave, solve_heat, solve_wave, ForcedWaveProblem, Forcing,
    HeatProblem, Mode, QParam, Sign, SignedLatticeFunction, SolutionTrajectory, TimeGrid, TransformConfig,
    VerificationReport, WaveProblem,
};
use serde_json::{json, Value};
use std::sync::Arc;

use crate::config::{DataSelector, ProblemSpec, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pipeline {
    Transform,
    SolveHeat,
    SolveWave,
    SolveForcedWave,
    Verify,
    KernelTable,
    LimitStudy,
}

impl Pipeline {
    pub fn name(&self) -> &'static str {
        match self {
            Pipeline::Transform => "transform",
            Pipeline::SolveHeat => "solve-heat",
            Pipeline::SolveWave => "solve-wave",
            Pipeline::SolveForcedWave => "solve-forced-wave",
            Pipeline::Verify => "verify",
            Pipeline::KernelTable => "kernel-table",
            Pipeline::LimitStudy => "limit-study",
        }
    }

    /// Whether the pipeline's exit status reflects its checks.
    pub fn verifies(&self) -> bool {
        matches!(self, Pipeline::Verify | Pipeline::LimitStudy)
    }
}

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Numeric(qspectral::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "{m}"),
            RunError::Numeric(e) => write!(f, "{e}"),
        }
    }
}

impl From<qspectral::Error> for RunError {
    fn from(e: qspectral::Error) -> Self {
        RunError::Numeric(e)
    }
}

type Res<T> = Result<T, RunError>;

/// What a run produced.
#[derive(Debug)]
pub struct Outcome {
    pub passed: bool,
    pub artifacts: Vec<PathBuf>,
}

pub struct Options {
    pub out: PathBuf,
    pub trajectory: Option<PathBuf>,
}

fn transform_config(cfg: &RunConfig) -> Res<TransformConfig<f64>> {
    let spec = cfg.spec();
    let kernel = Arc::new(build_kernel_table_with(&spec, &cfg.kernel_options())?);
    Ok(calibrate_with(spec, cfg.mode, kernel)?)
}

fn calibration_json(tc: &TransformConfig<f64>) -> Value {
    match tc.calibration() {
        Some(c) => json!({
            "nominal_constant": c.nominal_constant,
            "probe_scales": c.probe_scales,
            "raw_scale": c.raw_scale,
            "correction": c.correction,
            "residual": c.residual,
            "residual_tolerance": qspectral::fourier::CALIBRATION_RESIDUAL,
            "normalization": tc.normalization(),
        }),
        None => json!({ "normalization": tc.normalization(), "calibrated": false }),
    }
}

pub fn sample(cfg: &RunConfig, d: &DataSelector, tc: Option<&TransformConfig<f64>>) -> Res<SignedLatticeFunction<f64>> {
    let spec = cfg.spec();
    Ok(match d {
        DataSelector::GaussianBump { a, center, amplitude } => {
            SignedLatticeFunction::from_real_fn(spec, |x| amplitude * (-a * (x - center) * (x - center)).exp())?
        }
        DataSelector::Indicator { k, sign } => SignedLatticeFunction::indicator(spec, *k, sign.unwrap_or(Sign::Pos))?,
        DataSelector::PolynomialWindow { degree, radius } => SignedLatticeFunction::from_real_fn(spec, |x| {
            let r = x / radius;
            if r.abs() < 1.0 {
                (1.0 - r * r).powi(*degree as i32)
            } else {
                0.0
            }
        })?,
        DataSelector::KernelSample { j, sign } => {
            let table;
            let kernel = match tc {
                Some(tc) => tc.kernel(),
                None => {
                    table = build_kernel_table_with(&spec, &cfg.kernel_options())?;
                    &table
                }
            };
            kernel.require(j + spec.k_min(), j + spec.k_max())?;
            let s = sign.unwrap_or(Sign::Pos);
            let mut f = SignedLatticeFunction::zeros(spec);
            for (i, k) in spec.indices().enumerate() {
                for x_sign in [Sign::Pos, Sign::Neg] {
                    let arg_sign = if x_sign == s { Sign::Pos } else { Sign::Neg };
                    f.channel_mut(x_sign)[i] = kernel.at(j + k, arg_sign).expect("covered");
                }
            }
            f
        }
        DataSelector::Csv { path } => {
            let p = cfg.resolve(path);
            let raw = io::read_samples_csv(&p, cfg.qparam()).map_err(|e| RunError::Config(e.to_string()))?;
            raw.extend_to(&spec)
                .map_err(|e| RunError::Config(format!("{}: {e}", p.display())))?
        }
    })
}

fn forcing(cfg: &RunConfig, tc: &TransformConfig<f64>) -> Res<Forcing<f64>> {
    Ok(match &cfg.forcing {
        None => Forcing::Zero,
        Some(f) => Forcing::Separable {
            profile: sample(cfg, &f.profile, Some(tc))?,
            time: f.time.profile(),
        },
    })
}

fn grid(cfg: &RunConfig) -> Res<TimeGrid<f64>> {
    Ok(TimeGrid::uniform(cfg.t_final, cfg.time_nodes)?)
}

enum Problem {
    Heat(HeatProblem<f64>),
    Wave(WaveProblem<f64>),
    Forced(ForcedWaveProblem<f64>),
}

impl Problem {
    fn kind(&self) -> ProblemKind {
        match self {
            Problem::Heat(_) => ProblemKind::Heat,
            Problem::Wave(_) => ProblemKind::Wave,
            Problem::Forced(_) => ProblemKind::ForcedWave,
        }
    }

    fn hash(&self) -> u64 {
        match self {
            Problem::Heat(p) => p.hash(),
            Problem::Wave(p) => p.hash(),
            Problem::Forced(p) => p.hash(),
        }
    }
}

fn problem(cfg: &RunConfig, tc: &TransformConfig<f64>, want: Option<ProblemKind>) -> Res<Problem> {
    let Some(spec) = cfg.problem else {
        return Err(RunError::Config("config has no \"problem\" section".into()));
    };
    let p = match spec {
        ProblemSpec::Heat { m } => Problem::Heat(HeatProblem::new(m, sample(cfg, &cfg.initial, Some(tc))?, forcing(cfg, tc)?, cfg.t_final)?),
        ProblemSpec::Wave { b, m } => {
            let psi = match &cfg.velocity {
                Some(v) => sample(cfg, v, Some(tc))?,
                None => SignedLatticeFunction::zeros(cfg.spec()),
            };
            Problem::Wave(WaveProblem::new(b, m, sample(cfg, &cfg.initial, Some(tc))?, psi, cfg.t_final)?)
        }
        ProblemSpec::ForcedWave { b, m } => Problem::Forced(ForcedWaveProblem::new(b, m, forcing(cfg, tc)?, cfg.t_final)?),
    };
    if let Some(k) = want {
        if k != p.kind() {
            return Err(RunError::Config(format!(
                "this subcommand solves the {} problem but the config describes {}",
                k.name(),
                spec.name()
            )));
        }
    }
    Ok(p)
}

fn solve(p: &Problem, cfg: &RunConfig, tc: &TransformConfig<f64>) -> Res<SolutionTrajectory<f64>> {
    let g = grid(cfg)?;
    Ok(match p {
        Problem::Heat(h) => solve_heat(h, &g, tc, cfg.panels)?,
        Problem::Wave(w) => solve_wave(w, &g, tc)?,
        Problem::Forced(f) => solve_forced_wave(f, &g, tc, cfg.panels)?,
    })
}

fn checks(p: &Problem, traj: &SolutionTrajectory<f64>, tc: &TransformConfig<f64>) -> Res<Vec<VerificationReport>> {
    Ok(match p {
        Problem::Heat(h) => vec![residual_heat_physical(traj, h)?, apriori_heat(traj, h, tc)?],
        Problem::Wave(w) => vec![residual_wave_physical(traj, w)?],
        Problem::Forced(f) => vec![residual_wave_physical(traj, f)?],
    })
}

fn provenance_json(p: &Provenance) -> Value {
    json!({
        "problem": p.kind.name(),
        "problem_hash": format!("{:016x}", p.problem_hash),
        "q": p.q,
        "k_min": p.k_min,
        "k_max": p.k_max,
        "mode": p.mode,
        "normalization": p.normalization,
        "panels": p.panels,
        "forcing_interpolation_error": p.forcing_interpolation_error,
    })
}

fn write(path: PathBuf, body: &str, artifacts: &mut Vec<PathBuf>) -> Res<()> {
    io::write_atomic(&path, body)?;
    artifacts.push(path);
    Ok(())
}

fn reports_pass(rs: &[VerificationReport]) -> bool {
    rs.iter().all(VerificationReport::passed)
}

pub fn run(pipeline: Pipeline, cfg: &RunConfig, opts: &Options) -> Res<Outcome> {
    std::fs::create_dir_all(&opts.out)
        .map_err(|e| RunError::Numeric(qspectral::Error::Io(format!("{}: {e}", opts.out.display()))))?;
    let mut artifacts = Vec::new();
    let out = |name: &str| opts.out.join(name);
    let (body, passed) = match pipeline {
        Pipeline::KernelTable => {
            let table = build_kernel_table_with(&cfg.spec(), &cfg.kernel_options())?;
            write(out("kernel.csv"), &io::render_kernel(&table), &mut artifacts)?;
            let ov = table.overlap();
            let (lo, hi) = table.range();
            let (req_lo, req_hi) = table.requested();
            (
                json!({
                    "rows": hi - lo + 1,
                    "requested": [req_lo, req_hi],
                    "range": [lo, hi],
                    "complete": table.is_complete(),
                    "working_digits": table.working_digits(),
                    "max_certified_error": table.max_certified_error(),
                    "max_cancellation_log10": table.max_cancellation_log10(),
                    "empirical_sup": table.empirical_sup(),
                    "overlap": {
                        "window": [ov.window.0, ov.window.1],
                        "measured": ov.max_scaled_diff,
                        "tolerance": qspectral::special::kernel::OverlapCheck::TOLERANCE,
                        "pass": ov.passed(),
                    },
                }),
                true,
            )
        }
        Pipeline::Transform => {
            let (tc, note) = match transform_config(cfg) {
                Ok(tc) => (tc, None),
                Err(RunError::Numeric(e @ qspectral::Error::Calibration(_))) if cfg.mode == Mode::HalfLine => {
                    let spec = cfg.spec();
                    let kernel = Arc::new(build_kernel_table_with(&spec, &cfg.kernel_options())?);
                    (TransformConfig::uncalibrated(spec, cfg.mode, kernel)?, Some(e.to_string()))
                }
                Err(e) => return Err(e),
            };
            let f = sample(cfg, &cfg.initial, Some(&tc))?;
            let fh = forward(&f, &tc)?;
            write(out("spectrum.csv"), &io::render_spectrum(&fh), &mut artifacts)?;
            (
                json!({
                    "calibration": calibration_json(&tc),
                    "calibration_failure": note,
                    "round_trip_residual": round_trip_residual(&f, &tc)?,
                    "parseval_residual": parseval_residual(&f, &tc)?,
                }),
                true,
            )
        }
        Pipeline::SolveHeat | Pipeline::SolveWave | Pipeline::SolveForcedWave => {
            let want = match pipeline {
                Pipeline::SolveHeat => ProblemKind::Heat,
                Pipeline::SolveWave => ProblemKind::Wave,
                _ => ProblemKind::ForcedWave,
            };
            let tc = transform_config(cfg)?;
            let p = problem(cfg, &tc, Some(want))?;
            let traj = solve(&p, cfg, &tc)?;
            write(out("solution.csv"), &io::render_trajectory(&traj), &mut artifacts)?;
            let last = traj.spectral().last().expect("non-empty grid");
            write(out("spectrum.csv"), &io::render_spectrum(last), &mut artifacts)?;
            let rs = checks(&p, &traj, &tc)?;
            (
                json!({
                    "calibration": calibration_json(&tc),
                    "provenance": provenance_json(traj.provenance()),
                    "max_imaginary": traj.max_imag(),
                    "residuals": rs,
                }),
                true,
            )
        }
        Pipeline::Verify => {
            let tc = transform_config(cfg)?;
            let p = problem(cfg, &tc, None)?;
            let traj = match &opts.trajectory {
                Some(path) => load_trajectory(path, cfg, &tc, &p)?,
                None => solve(&p, cfg, &tc)?,
            };
            let mut rs = checks(&p, &traj, &tc)?;
            rs.push(uniqueness_probe(p.kind(), &tc, traj.grid())?);
            let passed = reports_pass(&rs);
            (
                json!({
                    "calibration": calibration_json(&tc),
                    "provenance": provenance_json(traj.provenance()),
                    "trajectory": opts.trajectory,
                    "reports": rs,
                }),
                passed,
            )
        }
        Pipeline::LimitStudy => {
            let qs: Vec<QParam<f64>> = cfg.limit.qs.iter().map(|&q| QParam::new(q)).collect::<Result<_, _>>()?;
            let r = classical_limit_study(&qs, (cfg.limit.window[0], cfg.limit.window[1]))?;
            let mut csv = String::from("quantity,value\n");
            for o in &r.observations {
                csv.push_str(&format!("{},{:.16e}\n", o.name, o.value));
            }
            write(out("limit.csv"), &csv, &mut artifacts)?;
            let passed = r.passed();
            (json!({ "reports": [r] }), passed)
        }
    };
    let report = json!({
        "command": pipeline.name(),
        "config": cfg,
        "passed": passed,
        "artifacts": artifacts,
        "result": body,
    });
    let path = out("report.json");
    io::write_atomic(&path, &(serde_json::to_string_pretty(&report).expect("serializable") + "\n"))?;
    artifacts.push(path);
    Ok(Outcome {
        passed,
        artifacts,
    })
}

fn load_trajectory(
    path: &Path,
    cfg: &RunConfig,
    tc: &TransformConfig<f64>,
    p: &Problem,
) -> Res<SolutionTrajectory<f64>> {
    let (grid, physical) = io::read_trajectory_csv(path, cfg.qparam()).map_err(|e| RunError::Config(e.to_string()))?;
    if physical[0].spec() != tc.spec() {
        return Err(RunError::Config(format!(
            "{} covers k in [{}, {}], config expects [{}, {}]",
            path.display(),
            physical[0].spec().k_min(),
            physical[0].spec().k_max(),
            cfg.k_min,
            cfg.k_max
        )));
    }
    let prov = Provenance {
        kind: p.kind(),
        problem_hash: p.hash(),
        q: cfg.q,
        k_min: cfg.k_min,
        k_max: cfg.k_max,
        mode: cfg.mode,
        normalization: tc.normalization(),
        panels: cfg.panels,
        forcing_interpolation_error: None,
    };
    Ok(SolutionTrajectory::from_physical(grid, physical, tc, prov)?)
}
