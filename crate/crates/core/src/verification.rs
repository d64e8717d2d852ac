//! Independent checks of computed trajectories against the equations they claim to solve.
//!
//! Residual checks apply central differences in `t` and the Rubin operator in `x` directly
//! to the physical samples, so they share nothing with the spectral formulas beyond the
//! samples themselves. Convergence is established by comparing the step `h` of the stored
//! grid with the step `2h` of its even subsample.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{forward, TransformConfig};
use crate::lattice::{LatticeSpec, Mode, QParam, Sign, SignedLatticeFunction};
use crate::quadrature::{l2_norm_mode, time_quadrature_nodes, weighted_square_sum, TimeGrid};
use crate::rubin::{rubin_d2, rubin_d_callable};
use crate::scalar::Real;
use crate::solvers::{
    solve_forced_wave, solve_heat, solve_wave, ForcedWaveProblem, Forcing, HeatProblem, ProblemKind, SolutionTrajectory,
    WaveProblem, DEFAULT_PANELS,
};
use crate::special::e_q2_imag;

/// Relative residual below which a trajectory counts as exact to rounding.
pub const RESIDUAL_FLOOR: f64 = 1e-6;
/// Accepted band around 2 for measured convergence orders.
pub const ORDER_BAND: f64 = 0.2;
/// Largest roundoff amplification of the second Rubin difference admitted in the window.
pub const STENCIL_ROUNDOFF: f64 = 1e-8;
/// Relative slack of the a priori inequalities.
pub const APRIORI_SLACK: f64 = 1e-6;
/// Absolute slack of the a priori inequalities.
pub const APRIORI_ABS_SLACK: f64 = 1e-24;
/// Series tolerance for the classical-limit kernel values, far below the errors measured.
const LIMIT_SERIES_TOL: f64 = 1e-10;
/// Zero-data solutions must stay below this norm.
pub const UNIQUENESS_TOL: f64 = 1e-12;
/// Relative tolerance for reproducing initial data.
pub const INITIAL_TOL: f64 = 1e-8;

/// One measured quantity against its tolerance. `enforced = false` entries are reported
/// but do not affect [`VerificationReport::passed`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub order: Option<f64>,
    pub enforced: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
            pass: measured <= tolerance,
            order: None,
            enforced: true,
        }
    }

    pub fn with_order(mut self, order: Option<f64>) -> Self {
        self.order = order;
        self
    }

    pub fn informational(mut self) -> Self {
        self.enforced = false;
        self
    }
}

/// A named number without a pass/fail meaning.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observation {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub title: String,
    pub checks: Vec<Check>,
    pub observations: Vec<Observation>,
}

impl VerificationReport {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn observe(&mut self, name: impl Into<String>, value: f64) {
        self.observations.push(Observation {
            name: name.into(),
            value,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().filter(|c| c.enforced).all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.enforced && !c.pass).collect()
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn merge(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
        self.observations.extend(other.observations);
    }
}

/// Lattice indices on which the second Rubin difference can be formed from `spec` and its
/// roundoff `8ε/((1-q)x)²` stays below [`STENCIL_ROUNDOFF`].
pub fn residual_window<T: Real>(spec: &LatticeSpec<T>) -> Result<LatticeSpec<T>> {
    let q = spec.q();
    let lo = spec.k_min() + 2;
    let mut hi = spec.k_max() - 2;
    let eps = T::epsilon().as_f64();
    let omq = q.one_minus().as_f64();
    while hi >= lo {
        let x = spec.point(hi).as_f64();
        if 8.0 * eps / (omq * x).powi(2) <= STENCIL_ROUNDOFF {
            break;
        }
        hi -= 1;
    }
    if hi - lo + 1 < 5 {
        return Err(Error::RangeTooSmall {
            needed: 5,
            have: (hi - lo + 1).max(0) as usize,
        });
    }
    spec.with_range(lo, hi)
}

fn uniform_step<T: Real>(grid: &TimeGrid<T>) -> Result<T> {
    if grid.len() < 5 {
        return Err(Error::Grid(format!("need at least 5 time nodes, have {}", grid.len())));
    }
    grid.uniform_step()
        .ok_or_else(|| Error::Grid("residual checks need a uniform time grid".into()))
}

/// `sqrt(Σ w |r|²)` over the window, both signs in full-line mode.
fn window_norm<T: Real>(spec: &LatticeSpec<T>, mode: Mode, r: &[Vec<Complex<T>>; 2]) -> T {
    let mut acc = T::zero();
    for (i, k) in spec.indices().enumerate() {
        let mut s = r[0][i].norm_sqr();
        if mode == Mode::FullLine {
            s = s + r[1][i].norm_sqr();
        }
        acc = acc + spec.weight(k) * s;
    }
    acc.sqrt()
}

enum Equation<'a, T: Real> {
    Heat { m: T, forcing: &'a Forcing<T> },
    Wave { b: T, m: T, forcing: &'a Forcing<T> },
}

struct Residuals<T> {
    fine: T,
    coarse: T,
    scale: T,
    max_forcing_imag: T,
}

/// Residual norms with steps `h` and `2h` at the even interior nodes shared by both grids.
fn residuals<T: Real>(traj: &SolutionTrajectory<T>, eq: &Equation<'_, T>) -> Result<Residuals<T>> {
    let h = uniform_step(traj.grid())?;
    let us = traj.physical();
    let spec = *us[0].spec();
    let mode = traj.provenance().mode;
    let win = residual_window(&spec)?;
    let local = win.with_range(win.k_min() - 2, win.k_max() + 2)?;
    let n = us.len();
    let mut out = Residuals {
        fine: T::zero(),
        coarse: T::zero(),
        scale: T::zero(),
        max_forcing_imag: T::zero(),
    };
    let zero = Forcing::Zero;
    let forcing = match eq {
        Equation::Heat { forcing, .. } | Equation::Wave { forcing, .. } => *forcing,
    };
    let forcing = if forcing.is_zero() { &zero } else { forcing };
    let near: Vec<SignedLatticeFunction<T>> = us.iter().map(|u| u.restrict(&win)).collect::<Result<_>>()?;
    for c in (2..n.saturating_sub(2)).step_by(2) {
        let t = traj.grid().nodes()[c];
        let d2 = rubin_d2(&us[c].restrict(&local)?)?;
        let f = forcing.at(t, &spec)?.restrict(&win)?;
        out.max_forcing_imag = out.max_forcing_imag.max(f.max_abs_imag());
        let mut scale = [Vec::new(), Vec::new()];
        let mut res = [[Vec::new(), Vec::new()], [Vec::new(), Vec::new()]];
        for (ci, sign) in [Sign::Pos, Sign::Neg].into_iter().enumerate() {
            for i in 0..win.len() {
                let u0 = near[c].channel(sign)[i];
                let dd = d2.channel(sign)[i];
                let fv = f.channel(sign)[i];
                let mut mag = dd.norm() + fv.norm();
                for (si, s) in [1usize, 2].into_iter().enumerate() {
                    let um = near[c - s].channel(sign)[i];
                    let up = near[c + s].channel(sign)[i];
                    let hs = h * T::of_int(s as i64);
                    let ut = (up - um) / (T::lit(2.0) * hs);
                    let r = match *eq {
                        Equation::Heat { m, .. } => {
                            if si == 0 {
                                mag = mag + ut.norm() + u0.norm() * m;
                            }
                            ut - dd + u0 * m - fv
                        }
                        Equation::Wave { b, m, .. } => {
                            let utt = (up - u0 * T::lit(2.0) + um) / (hs * hs);
                            if si == 0 {
                                mag = mag + utt.norm() + ut.norm() * b + u0.norm() * m;
                            }
                            utt + ut * b + u0 * m - dd - fv
                        }
                    };
                    res[si][ci].push(r);
                }
                scale[ci].push(Complex::new(mag, T::zero()));
            }
        }
        out.fine = out.fine.max(window_norm(&win, mode, &res[0]));
        out.coarse = out.coarse.max(window_norm(&win, mode, &res[1]));
        out.scale = out.scale.max(window_norm(&win, mode, &scale));
    }
    Ok(out)
}

fn order_of<T: Real>(fine: T, coarse: T) -> Option<f64> {
    let (f, c) = (fine.as_f64(), coarse.as_f64());
    (f > 0.0 && c > 0.0).then(|| (c / f).log2())
}

/// Pass/fail pair for a quantity that should fall as `h²`: the fine value must respect the
/// decay predicted from the coarse one, and the measured order must lie in `2 ± 0.2`.
/// Values at the relative noise floor pass both.
fn refinement_checks<T: Real>(report: &mut VerificationReport, label: &str, fine: T, coarse: T, scale: T, enforce_order: bool) {
    let floor = RESIDUAL_FLOOR * scale.as_f64();
    let (f, c) = (fine.as_f64(), coarse.as_f64());
    let order = order_of(fine, coarse);
    let predicted = 1.25 * c / 4.0;
    report.push(Check::at_most(format!("{label} (h)"), f, floor.max(predicted)).with_order(order));
    report.observe(format!("{label} (2h)"), c);
    report.observe(format!("{label} scale"), scale.as_f64());
    if f <= floor {
        report.push(Check::at_most(format!("{label} order"), f, floor).with_order(order));
    } else {
        let dev = order.map(|p| (p - 2.0).abs()).unwrap_or(f64::INFINITY);
        let mut c = Check::at_most(format!("{label} order"), dev, ORDER_BAND).with_order(order);
        c.enforced = enforce_order;
        report.push(c);
    }
}

fn initial_check<T: Real>(
    report: &mut VerificationReport,
    label: &str,
    got: &SignedLatticeFunction<T>,
    want: &SignedLatticeFunction<T>,
    mode: Mode,
) -> Result<()> {
    let err = l2_norm_mode(&got.sub(want)?, mode).as_f64();
    let tol = INITIAL_TOL * l2_norm_mode(want, mode).as_f64() + 1e-12;
    report.push(Check::at_most(label, err, tol));
    Ok(())
}

fn reality_check<T: Real>(report: &mut VerificationReport, traj: &SolutionTrajectory<T>, data_real: bool) {
    if !data_real {
        return;
    }
    let peak = traj.physical().iter().fold(T::zero(), |m, u| m.max(u.max_abs())).as_f64();
    report.push(Check::at_most(
        "imaginary residue",
        traj.max_imag().as_f64(),
        10.0 * INITIAL_TOL * peak + 1e-14,
    ));
}

fn is_real<T: Real>(f: &SignedLatticeFunction<T>) -> bool {
    f.max_abs_imag() == T::zero()
}

/// Physical residual of `u_t - D²u + m u = f` together with the initial condition.
pub fn residual_heat_physical<T: Real>(traj: &SolutionTrajectory<T>, p: &HeatProblem<T>) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("heat residual");
    let r = residuals(traj, &Equation::Heat { m: p.m, forcing: &p.forcing })?;
    refinement_checks(&mut report, "heat residual", r.fine, r.coarse, r.scale, true);
    let mode = traj.provenance().mode;
    initial_check(&mut report, "initial condition", &traj.physical()[0], &p.phi, mode)?;
    reality_check(&mut report, traj, is_real(&p.phi) && r.max_forcing_imag == T::zero());
    Ok(report)
}

/// Homogeneous or forced wave data for [`residual_wave_physical`].
pub enum WaveData<'a, T: Real> {
    Homogeneous(&'a WaveProblem<T>),
    Forced(&'a ForcedWaveProblem<T>),
}

impl<'a, T: Real> From<&'a WaveProblem<T>> for WaveData<'a, T> {
    fn from(p: &'a WaveProblem<T>) -> Self {
        WaveData::Homogeneous(p)
    }
}

impl<'a, T: Real> From<&'a ForcedWaveProblem<T>> for WaveData<'a, T> {
    fn from(p: &'a ForcedWaveProblem<T>) -> Self {
        WaveData::Forced(p)
    }
}

/// One-sided second-order `u_t(0)` with step `s·h`.
fn start_velocity<T: Real>(us: &[SignedLatticeFunction<T>], h: T, s: usize) -> Result<SignedLatticeFunction<T>> {
    let c = |v: f64| Complex::new(T::lit(v), T::zero());
    let a = us[0].combine(c(-3.0), &us[s], c(4.0))?;
    let b = a.sub(&us[2 * s])?;
    Ok(b.scale_real(T::one() / (T::lit(2.0) * h * T::of_int(s as i64))))
}

/// Physical residual of `u_tt + b u_t + m u - D²u = f` with both Cauchy conditions.
pub fn residual_wave_physical<'a, T: Real>(
    traj: &SolutionTrajectory<T>,
    p: impl Into<WaveData<'a, T>>,
) -> Result<VerificationReport> {
    let data = p.into();
    let zero = Forcing::Zero;
    let (b, m, forcing) = match &data {
        WaveData::Homogeneous(w) => (w.b, w.m, &zero),
        WaveData::Forced(w) => (w.b, w.m, &w.forcing),
    };
    let mut report = VerificationReport::new("wave residual");
    let r = residuals(traj, &Equation::Wave { b, m, forcing })?;
    refinement_checks(&mut report, "wave residual", r.fine, r.coarse, r.scale, true);
    let mode = traj.provenance().mode;
    let us = traj.physical();
    let spec = *us[0].spec();
    let (phi, psi) = match &data {
        WaveData::Homogeneous(w) => (w.phi.clone(), w.psi.clone()),
        WaveData::Forced(_) => (SignedLatticeFunction::zeros(spec), SignedLatticeFunction::zeros(spec)),
    };
    initial_check(&mut report, "initial condition", &us[0], &phi, mode)?;
    let h = uniform_step(traj.grid())?;
    let v1 = start_velocity(us, h, 1)?;
    let v2 = start_velocity(us, h, 2)?;
    let e1 = l2_norm_mode(&v1.sub(&psi)?, mode);
    let e2 = l2_norm_mode(&v2.sub(&psi)?, mode);
    let vscale = l2_norm_mode(&psi, mode) + l2_norm_mode(&v1, mode);
    // the one-sided start stencil mixes h² and h³ terms on practical grids, so only its
    // decay is enforced
    refinement_checks(&mut report, "initial velocity", e1, e2, vscale, false);
    reality_check(
        &mut report,
        traj,
        is_real(&phi) && is_real(&psi) && r.max_forcing_imag == T::zero(),
    );
    Ok(report)
}

/// `∫_{t_i}^{t_{i+1}} g` accumulated from `0` to every grid node, GL4 on each interval.
fn cumulative<T: Real>(grid: &TimeGrid<T>, g: &mut dyn FnMut(T) -> Result<T>) -> Result<Vec<T>> {
    let nodes = grid.nodes();
    let mut out = vec![T::zero(); nodes.len()];
    for i in 1..nodes.len() {
        let mut acc = T::zero();
        for (tau, w) in time_quadrature_nodes(nodes[i] - nodes[i - 1], 1)? {
            acc = acc + w * g(nodes[i - 1] + tau)?;
        }
        out[i] = out[i - 1] + acc;
    }
    Ok(out)
}

fn bound_check(report: &mut VerificationReport, name: &str, lhs: &[f64], rhs: &[f64], enforced: bool) {
    let mut worst = f64::NEG_INFINITY;
    let mut pass = true;
    for (l, r) in lhs.iter().zip(rhs) {
        pass &= *l <= r + APRIORI_SLACK * r + APRIORI_ABS_SLACK;
        let rel = if *r > 0.0 {
            (l - r - APRIORI_ABS_SLACK) / r
        } else if *l <= APRIORI_ABS_SLACK {
            continue;
        } else {
            f64::INFINITY
        };
        worst = worst.max(rel);
    }
    if worst == f64::NEG_INFINITY {
        worst = 0.0;
    }
    let mut c = Check::at_most(name, worst, APRIORI_SLACK);
    c.pass = pass;
    c.enforced = enforced;
    report.push(c);
    report.observe(format!("{name} least margin"), -worst);
}

/// The a priori estimates of the heat problem at every grid node:
/// `‖u(t)‖² ≤ t∫_0^t ‖f‖² dτ + e^{-2tm}‖φ‖²` in `L²_q`, and the same with the spectral
/// weights `ξ²` and `(1+ξ²)²`.
///
/// When both `φ` and `f` are nonzero the inequality needs a factor 2 on the right (the
/// square of a sum); the single-factor form is then reported but not enforced.
pub fn apriori_heat<T: Real>(
    traj: &SolutionTrajectory<T>,
    p: &HeatProblem<T>,
    cfg: &TransformConfig<T>,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("heat a priori");
    let mode = traj.provenance().mode;
    let spec = *cfg.spec();
    let grid = traj.grid();
    let phi_hat = forward(&p.phi, cfg)?;
    let weights: [(&str, fn(f64) -> f64); 3] = [
        ("L2", |_| 1.0),
        ("xi^2 weight", |x| x * x),
        ("(1+xi^2)^2 weight", |x| (1.0 + x * x).powi(2)),
    ];
    let phi_zero = p.phi.is_zero();
    let forced = !p.forcing.is_zero();
    let factor = if forced && !phi_zero { 2.0 } else { 1.0 };
    for (wi, (label, w)) in weights.iter().enumerate() {
        let weigh = |x: T| T::lit(w(x.as_f64()));
        let sq_f = |tau: T| -> Result<T> {
            let f = p.forcing.at(tau, &spec)?;
            Ok(if wi == 0 {
                weighted_square_sum(&f, mode, |_| T::one())
            } else {
                weighted_square_sum(&forward(&f, cfg)?, mode, weigh)
            })
        };
        let int_f = if forced {
            cumulative(grid, &mut |tau| sq_f(tau))?
        } else {
            vec![T::zero(); grid.len()]
        };
        let phi_sq = if wi == 0 {
            weighted_square_sum(&p.phi, mode, |_| T::one())
        } else {
            weighted_square_sum(&phi_hat, mode, weigh)
        };
        let mut lhs = Vec::with_capacity(grid.len());
        let mut rhs = Vec::with_capacity(grid.len());
        for (n, &t) in grid.nodes().iter().enumerate() {
            let l = if wi == 0 {
                weighted_square_sum(&traj.physical()[n], mode, |_| T::one())
            } else {
                weighted_square_sum(&traj.spectral()[n], mode, weigh)
            };
            lhs.push(l.as_f64());
            rhs.push((t * int_f[n] + (-T::lit(2.0) * t * p.m).exp() * phi_sq).as_f64());
        }
        let name = if wi == 0 { "L2 bound".to_string() } else { format!("W2 bound, {label}") };
        if factor > 1.0 {
            bound_check(&mut report, &format!("{name} (single factor)"), &lhs, &rhs, false);
            let doubled: Vec<f64> = rhs.iter().map(|r| factor * r).collect();
            bound_check(&mut report, &format!("{name} (factor 2)"), &lhs, &doubled, true);
        } else {
            bound_check(&mut report, &name, &lhs, &rhs, true);
        }
        if wi == 0 && !forced {
            let l: Vec<f64> = lhs.iter().map(|v| v.sqrt()).collect();
            let r: Vec<f64> = rhs.iter().map(|v| v.sqrt()).collect();
            bound_check(&mut report, "damping e^{-tm}", &l, &r, true);
        }
    }
    let u0 = l2_norm_mode(&traj.physical()[0], mode).as_f64();
    let phi = l2_norm_mode(&p.phi, mode).as_f64();
    report.push(Check::at_most("initial norm", (u0 - phi).abs(), INITIAL_TOL * phi + 1e-12));
    Ok(report)
}

/// Runs one solver with all data zero and checks that the solution stays zero.
pub fn uniqueness_probe<T: Real>(
    kind: ProblemKind,
    cfg: &TransformConfig<T>,
    grid: &TimeGrid<T>,
) -> Result<VerificationReport> {
    let spec = *cfg.spec();
    let z = SignedLatticeFunction::zeros(spec);
    let t_final = grid.horizon();
    let traj = match kind {
        ProblemKind::Heat => solve_heat(&HeatProblem::new(T::one(), z, Forcing::Zero, t_final)?, grid, cfg, DEFAULT_PANELS)?,
        ProblemKind::Wave => solve_wave(&WaveProblem::new(T::one(), T::one(), z.clone(), z, t_final)?, grid, cfg)?,
        ProblemKind::ForcedWave => {
            let f = Forcing::Separable {
                profile: z,
                time: crate::solvers::TimeProfile::Constant,
            };
            solve_forced_wave(&ForcedWaveProblem::new(T::one(), T::one(), f, t_final)?, grid, cfg, DEFAULT_PANELS)?
        }
    };
    let mode = cfg.mode();
    let peak = traj
        .physical()
        .iter()
        .fold(T::zero(), |m, u| m.max(l2_norm_mode(u, mode)))
        .as_f64();
    let mut report = VerificationReport::new(format!("{} uniqueness", kind.name()));
    report.push(Check::at_most(format!("{} zero-data norm", kind.name()), peak, UNIQUENESS_TOL));
    Ok(report)
}

/// Lattice `{q^k} ∩ [lo, hi]`.
fn window_spec(q: QParam<f64>, lo: f64, hi: f64) -> Result<LatticeSpec<f64>> {
    let lq = q.value().ln();
    let k_min = (hi.ln() / lq).ceil() as i64;
    let k_max = (lo.ln() / lq).floor() as i64;
    LatticeSpec::new(q, k_min, k_max)
}

fn per_decade(e0: f64, e1: f64, q0: f64, q1: f64) -> f64 {
    let decades = ((1.0 - q0) / (1.0 - q1)).log10();
    (e0 / e1).powf(1.0 / decades)
}

/// Errors of the Rubin derivative and of `e_{q²}(ix)` against their classical limits along
/// an increasing sequence of `q`, on the compact window `[lo, hi]` of `|x|`.
pub fn classical_limit_study(qs: &[QParam<f64>], window: (f64, f64)) -> Result<VerificationReport> {
    if qs.len() < 2 || qs.windows(2).any(|w| w[1].value() <= w[0].value()) {
        return Err(Error::InvalidParameter("need at least two increasing q values".into()));
    }
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidParameter(format!("bad window [{lo}, {hi}]")));
    }
    let mut report = VerificationReport::new("classical limit");
    type Mono = (&'static str, fn(f64) -> f64, fn(f64) -> f64, bool);
    let monomials: [Mono; 3] = [
        ("x^2", |x| x * x, |x| 2.0 * x, false),
        ("x^3", |x| x * x * x, |x| 3.0 * x * x, true),
        ("x^5", |x| x.powi(5), |x| 5.0 * x.powi(4), false),
    ];
    let qv: Vec<f64> = qs.iter().map(|q| q.value()).collect();
    for (name, f, df, enforced) in monomials {
        let mut errs = Vec::with_capacity(qs.len());
        for q in qs {
            let spec = window_spec(*q, lo, hi)?;
            let d = rubin_d_callable(|x| Complex::new(f(x), 0.0), &spec)?;
            let mut worst = 0.0_f64;
            for (i, k) in spec.indices().enumerate() {
                let x = spec.point(k);
                worst = worst.max((d.pos()[i].re - df(x)).abs()).max((d.neg()[i].re - df(-x)).abs());
            }
            report.observe(format!("rubin {name} error q={}", q.value()), worst);
            errs.push(worst);
        }
        for i in 0..errs.len() - 1 {
            let ratio = per_decade(errs[i], errs[i + 1], qv[i], qv[i + 1]);
            let mut c = Check::at_most(format!("rubin {name} ratio per decade q={}->{}", qv[i], qv[i + 1]), (ratio - 10.0).abs(), 2.0)
                .with_order(Some(ratio.log10()));
            c.enforced = enforced;
            report.push(c);
        }
        report.observe(format!("rubin {name} slope"), slope(&qv, &errs));
    }
    let xs: Vec<f64> = (1..=400).map(|i| hi.min(4.0) * i as f64 / 400.0).collect();
    let mut errs = Vec::with_capacity(qs.len());
    for q in qs {
        let mut worst = 0.0_f64;
        for &x in &xs {
            let e = e_q2_imag(x, *q, LIMIT_SERIES_TOL)?.value;
            worst = worst.max((e - Complex::new(x.cos(), x.sin())).norm());
        }
        report.observe(format!("e_q2 error q={}", q.value()), worst);
        errs.push(worst);
    }
    let growth = errs.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    let mut c = Check::at_most("e_q2 error monotone decrease", growth, 1.0);
    c.pass = growth < 1.0;
    report.push(c);
    report.observe("e_q2 slope", slope(&qv, &errs));
    Ok(report)
}

/// Least-squares slope of `log err` against `log(1-q)`.
fn slope(qs: &[f64], errs: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = qs.iter().zip(errs).map(|(q, e)| ((1.0 - q).ln(), e.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
