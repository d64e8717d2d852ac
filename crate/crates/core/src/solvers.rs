//! Spectral solution formulas for the q-heat, damped q-wave and forced q-wave problems.
//!
//! Every solver works frequency by frequency: transform the data, apply the closed-form
//! evolution in `t` (with the Duhamel integral done by Gauss–Legendre), then transform
//! back. The physical-space kernel form of the wave solution is provided separately by
//! [`wave_kernels`] so both paths can be compared.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fourier::{forward, inverse, TransformConfig};
use crate::lattice::{Mode, Sign, SignedLatticeFunction, SpectralFunction};
use crate::quadrature::{time_quadrature_nodes, TimeGrid, TimeIndexedFamily};
use crate::scalar::{czero, Real};

/// Below this `|ω t|` the difference quotient `(e^{ωt/2} - e^{-ωt/2})/ω` uses its series.
pub const SERIES_GUARD: f64 = 1e-6;

/// Default number of uniform time nodes.
pub const DEFAULT_TIME_NODES: usize = 65;

/// Default number of Gauss–Legendre panels per Duhamel integral.
pub const DEFAULT_PANELS: usize = 8;

/// Time factor of a separable forcing `f(t, x) = g(t) h(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeProfile<T = f64> {
    Constant,
    Linear,
    ExpDecay(T),
    Cos(T),
}

impl<T: Real> TimeProfile<T> {
    pub fn eval(&self, t: T) -> T {
        match *self {
            TimeProfile::Constant => T::one(),
            TimeProfile::Linear => t,
            TimeProfile::ExpDecay(r) => (-r * t).exp(),
            TimeProfile::Cos(w) => (w * t).cos(),
        }
    }
}

type ForcingFn<T> = dyn Fn(T) -> SignedLatticeFunction<T> + Send + Sync;

/// Right-hand side `f(t, ·)`.
#[derive(Clone)]
pub enum Forcing<T: Real = f64> {
    Zero,
    Separable {
        profile: SignedLatticeFunction<T>,
        time: TimeProfile<T>,
    },
    /// Samples on a time grid, linearly interpolated in between.
    Family(TimeIndexedFamily<SignedLatticeFunction<T>, T>),
    Callable(Arc<ForcingFn<T>>),
}

impl<T: Real> fmt::Debug for Forcing<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forcing::Zero => write!(f, "Zero"),
            Forcing::Separable { time, .. } => write!(f, "Separable({time:?})"),
            Forcing::Family(fam) => write!(f, "Family({} nodes)", fam.grid().len()),
            Forcing::Callable(_) => write!(f, "Callable"),
        }
    }
}

fn interval<T: Real>(nodes: &[T], t: T) -> (usize, T) {
    let n = nodes.len();
    let i = match nodes.binary_search_by(|v| v.partial_cmp(&t).expect("finite time")) {
        Ok(i) => i.min(n - 2),
        Err(0) => 0,
        Err(i) => (i - 1).min(n - 2),
    };
    let theta = ((t - nodes[i]) / (nodes[i + 1] - nodes[i])).max(T::zero()).min(T::one());
    (i, theta)
}

impl<T: Real> Forcing<T> {
    pub fn is_zero(&self) -> bool {
        matches!(self, Forcing::Zero)
    }

    /// `f(t, ·)` on the lattice of `spec_hint` (used only by the zero forcing).
    pub fn at(&self, t: T, spec_hint: &crate::lattice::LatticeSpec<T>) -> Result<SignedLatticeFunction<T>> {
        match self {
            Forcing::Zero => Ok(SignedLatticeFunction::zeros(*spec_hint)),
            Forcing::Separable { profile, time } => Ok(profile.scale_real(time.eval(t))),
            Forcing::Family(fam) => {
                let (i, th) = interval(fam.grid().nodes(), t);
                let s = fam.samples();
                let re = |v: T| Complex::new(v, T::zero());
                s[i].combine(re(T::one() - th), &s[i + 1], re(th))
            }
            Forcing::Callable(f) => {
                let v = f(t);
                if !crate::scalar::all_finite(v.pos()) || !crate::scalar::all_finite(v.neg()) {
                    return Err(Error::NonFinite(format!("forcing at t = {t}")));
                }
                Ok(v)
            }
        }
    }

    /// Largest midpoint deviation from linearity between family nodes, a proxy for the
    /// interpolation error. `None` for other forcing kinds.
    pub fn interpolation_error(&self) -> Option<T> {
        let Forcing::Family(fam) = self else {
            return None;
        };
        let s = fam.samples();
        let mut worst = T::zero();
        for w in s.windows(3) {
            let half = Complex::new(T::lit(0.5), T::zero());
            let mid = w[0].combine(half, &w[2], half).ok()?;
            worst = worst.max(mid.sub(&w[1]).ok()?.max_abs());
        }
        Some(worst)
    }

    fn fingerprint(&self, h: &mut Fnv) {
        match self {
            Forcing::Zero => h.word(0),
            Forcing::Separable { profile, time } => {
                h.word(1);
                h.samples(profile);
                match *time {
                    TimeProfile::Constant => h.word(10),
                    TimeProfile::Linear => h.word(11),
                    TimeProfile::ExpDecay(r) => {
                        h.word(12);
                        h.real(r)
                    }
                    TimeProfile::Cos(w) => {
                        h.word(13);
                        h.real(w)
                    }
                }
            }
            Forcing::Family(fam) => {
                h.word(2);
                for (t, s) in fam.grid().nodes().iter().zip(fam.samples()) {
                    h.real(*t);
                    h.samples(s);
                }
            }
            Forcing::Callable(_) => h.word(3),
        }
    }
}

/// Forcing in frequency space, transformed once where the structure allows.
enum SpectralForcing<'a, T: Real> {
    Zero,
    Separable(SpectralFunction<T>, TimeProfile<T>),
    Family(&'a TimeGrid<T>, Vec<SpectralFunction<T>>),
    Callable(&'a Arc<ForcingFn<T>>),
}

impl<'a, T: Real> SpectralForcing<'a, T> {
    fn new(f: &'a Forcing<T>, cfg: &TransformConfig<T>) -> Result<Self> {
        Ok(match f {
            Forcing::Zero => SpectralForcing::Zero,
            Forcing::Separable { profile, time } => SpectralForcing::Separable(forward(profile, cfg)?, *time),
            Forcing::Family(fam) => SpectralForcing::Family(
                fam.grid(),
                fam.samples().iter().map(|s| forward(s, cfg)).collect::<Result<_>>()?,
            ),
            Forcing::Callable(c) => SpectralForcing::Callable(c),
        })
    }

    fn at(&self, t: T, cfg: &TransformConfig<T>) -> Result<Option<SpectralFunction<T>>> {
        Ok(match self {
            SpectralForcing::Zero => None,
            SpectralForcing::Separable(h, g) => Some(h.scale_real(g.eval(t))),
            SpectralForcing::Family(grid, s) => {
                let (i, th) = interval(grid.nodes(), t);
                let re = |v: T| Complex::new(v, T::zero());
                Some(s[i].combine(re(T::one() - th), &s[i + 1], re(th))?)
            }
            SpectralForcing::Callable(c) => Some(forward(&c(t), cfg)?),
        })
    }
}

fn require_positive<T: Real>(name: &str, v: T, errs: &mut Vec<String>) {
    if !(v > T::zero()) || !v.is_finite() {
        errs.push(format!("{name} must be positive, got {v}"));
    }
}

fn finish(errs: Vec<String>) -> Result<()> {
    if errs.is_empty() {
        Ok(())
    } else {
        Err(Error::Constraint(errs.join("; ")))
    }
}

/// `u_t - D² u + m u = f`, `u(0) = φ`.
#[derive(Debug, Clone)]
pub struct HeatProblem<T: Real = f64> {
    pub m: T,
    pub phi: SignedLatticeFunction<T>,
    pub forcing: Forcing<T>,
    pub t_final: T,
}

impl<T: Real> HeatProblem<T> {
    pub fn new(m: T, phi: SignedLatticeFunction<T>, forcing: Forcing<T>, t_final: T) -> Result<Self> {
        let mut errs = Vec::new();
        require_positive("heat coefficient m", m, &mut errs);
        require_positive("horizon T", t_final, &mut errs);
        finish(errs)?;
        Ok(Self { m, phi, forcing, t_final })
    }

    pub fn hash(&self) -> u64 {
        let mut h = Fnv::new();
        h.word(100);
        h.real(self.m);
        h.real(self.t_final);
        h.samples(&self.phi);
        self.forcing.fingerprint(&mut h);
        h.finish()
    }
}

/// `u_tt + b u_t - D² u + m u = 0`, `u(0) = φ`, `u_t(0) = ψ`.
#[derive(Debug, Clone)]
pub struct WaveProblem<T: Real = f64> {
    pub b: T,
    pub m: T,
    pub phi: SignedLatticeFunction<T>,
    pub psi: SignedLatticeFunction<T>,
    pub t_final: T,
}

fn check_wave<T: Real>(b: T, m: T, t_final: T) -> Result<()> {
    let mut errs = Vec::new();
    require_positive("damping b", b, &mut errs);
    require_positive("coefficient m", m, &mut errs);
    require_positive("horizon T", t_final, &mut errs);
    if b > T::zero() && m > T::zero() && !(b * b < T::lit(4.0) * m) {
        errs.push(format!("wave requires b^2 < 4m, got b^2 = {} and 4m = {}", b * b, T::lit(4.0) * m));
    }
    finish(errs)
}

impl<T: Real> WaveProblem<T> {
    pub fn new(b: T, m: T, phi: SignedLatticeFunction<T>, psi: SignedLatticeFunction<T>, t_final: T) -> Result<Self> {
        check_wave(b, m, t_final)?;
        if phi.spec() != psi.spec() {
            return Err(Error::LatticeMismatch("phi and psi on different lattices".into()));
        }
        Ok(Self { b, m, phi, psi, t_final })
    }

    pub fn hash(&self) -> u64 {
        let mut h = Fnv::new();
        h.word(200);
        h.real(self.b);
        h.real(self.m);
        h.real(self.t_final);
        h.samples(&self.phi);
        h.samples(&self.psi);
        h.finish()
    }
}

/// `u_tt + b u_t - D² u + m u = f` with zero Cauchy data.
#[derive(Debug, Clone)]
pub struct ForcedWaveProblem<T: Real = f64> {
    pub b: T,
    pub m: T,
    pub forcing: Forcing<T>,
    pub t_final: T,
}

impl<T: Real> ForcedWaveProblem<T> {
    pub fn new(b: T, m: T, forcing: Forcing<T>, t_final: T) -> Result<Self> {
        check_wave(b, m, t_final)?;
        Ok(Self { b, m, forcing, t_final })
    }

    pub fn hash(&self) -> u64 {
        let mut h = Fnv::new();
        h.word(300);
        h.real(self.b);
        h.real(self.m);
        h.real(self.t_final);
        self.forcing.fingerprint(&mut h);
        h.finish()
    }
}

/// Which of the three problems produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Heat,
    Wave,
    ForcedWave,
}

impl ProblemKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::Heat => "heat",
            ProblemKind::Wave => "wave",
            ProblemKind::ForcedWave => "forced-wave",
        }
    }
}

/// Where a trajectory came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub kind: ProblemKind,
    pub problem_hash: u64,
    pub q: f64,
    pub k_min: i64,
    pub k_max: i64,
    pub mode: Mode,
    pub normalization: f64,
    pub panels: usize,
    pub forcing_interpolation_error: Option<f64>,
}

/// Solution on a time grid, in both representations.
#[derive(Debug, Clone)]
pub struct SolutionTrajectory<T: Real = f64> {
    grid: TimeGrid<T>,
    spectral: Vec<SpectralFunction<T>>,
    physical: Vec<SignedLatticeFunction<T>>,
    provenance: Provenance,
}

impl<T: Real> SolutionTrajectory<T> {
    fn build(
        grid: TimeGrid<T>,
        spectral: Vec<SpectralFunction<T>>,
        cfg: &TransformConfig<T>,
        provenance: Provenance,
    ) -> Result<Self> {
        let physical = spectral.iter().map(|s| inverse(s, cfg)).collect::<Result<_>>()?;
        Ok(Self {
            grid,
            spectral,
            physical,
            provenance,
        })
    }

    /// Trajectory known only in physical space (e.g. read back from disk); the spectral
    /// history is recomputed with `cfg`.
    pub fn from_physical(
        grid: TimeGrid<T>,
        physical: Vec<SignedLatticeFunction<T>>,
        cfg: &TransformConfig<T>,
        provenance: Provenance,
    ) -> Result<Self> {
        if physical.len() != grid.len() {
            return Err(Error::Grid(format!("{} samples for {} nodes", physical.len(), grid.len())));
        }
        let spectral = physical.iter().map(|u| forward(u, cfg)).collect::<Result<_>>()?;
        Ok(Self {
            grid,
            spectral,
            physical,
            provenance,
        })
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn spectral(&self) -> &[SpectralFunction<T>] {
        &self.spectral
    }

    pub fn physical(&self) -> &[SignedLatticeFunction<T>] {
        &self.physical
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Both histories multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        Self {
            grid: self.grid.clone(),
            spectral: self.spectral.iter().map(|s| s.scale_real(factor)).collect(),
            physical: self.physical.iter().map(|s| s.scale_real(factor)).collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// Every `stride`-th time node.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        let grid = self.grid.subsample(stride)?;
        Ok(Self {
            grid,
            spectral: self.spectral.iter().step_by(stride).cloned().collect(),
            physical: self.physical.iter().step_by(stride).cloned().collect(),
            provenance: self.provenance.clone(),
        })
    }

    /// Largest imaginary part over the physical history.
    pub fn max_imag(&self) -> T {
        self.physical.iter().fold(T::zero(), |m, u| m.max(u.max_abs_imag()))
    }
}

fn provenance<T: Real>(kind: ProblemKind, hash: u64, cfg: &TransformConfig<T>, panels: usize, forcing: Option<&Forcing<T>>) -> Provenance {
    Provenance {
        kind,
        problem_hash: hash,
        q: cfg.spec().q().value().as_f64(),
        k_min: cfg.spec().k_min(),
        k_max: cfg.spec().k_max(),
        mode: cfg.mode(),
        normalization: cfg.normalization().as_f64(),
        panels,
        forcing_interpolation_error: forcing.and_then(|f| f.interpolation_error()).map(|e| e.as_f64()),
    }
}

fn check_grid<T: Real>(grid: &TimeGrid<T>, t_final: T) -> Result<()> {
    if grid.horizon() > t_final * (T::one() + T::lit(8.0) * T::epsilon()) {
        return Err(Error::Grid(format!(
            "grid reaches {} beyond the horizon {t_final}",
            grid.horizon()
        )));
    }
    Ok(())
}

fn check_data<T: Real>(f: &SignedLatticeFunction<T>, cfg: &TransformConfig<T>, name: &str) -> Result<()> {
    if f.spec() != cfg.spec() {
        return Err(Error::LatticeMismatch(format!("{name} is not sampled on the transform lattice")));
    }
    Ok(())
}

/// `∫_0^t M(t - τ, |ξ|) f̂(τ, ξ) dτ` for every frequency, by composite Gauss–Legendre.
fn duhamel<T: Real>(
    forcing: &SpectralForcing<'_, T>,
    t: T,
    panels: usize,
    cfg: &TransformConfig<T>,
    mult: &dyn Fn(T, T) -> Complex<T>,
) -> Result<SpectralFunction<T>> {
    let spec = *cfg.spec();
    let mut pos = vec![czero::<T>(); spec.len()];
    let mut neg = vec![czero::<T>(); spec.len()];
    if t == T::zero() || matches!(forcing, SpectralForcing::Zero) {
        return SpectralFunction::new(spec, pos, neg);
    }
    let xis: Vec<T> = spec.indices().map(|j| spec.point(j)).collect();
    for (tau, w) in time_quadrature_nodes(t, panels)? {
        let Some(fh) = forcing.at(tau, cfg)? else { continue };
        for (i, &xi) in xis.iter().enumerate() {
            let k = mult(t - tau, xi) * w;
            pos[i] = pos[i] + fh.pos()[i] * k;
            neg[i] = neg[i] + fh.neg()[i] * k;
        }
    }
    SpectralFunction::new(spec, pos, neg)
}

/// `û(t, ξ) = ∫_0^t e^{-(t-τ)(m+ξ²)} f̂(τ, ξ) dτ + φ̂(ξ) e^{-t(m+ξ²)}`.
pub fn solve_heat<T: Real>(
    p: &HeatProblem<T>,
    grid: &TimeGrid<T>,
    cfg: &TransformConfig<T>,
    panels: usize,
) -> Result<SolutionTrajectory<T>> {
    check_grid(grid, p.t_final)?;
    check_data(&p.phi, cfg, "phi")?;
    let phi_hat = forward(&p.phi, cfg)?;
    let forcing = SpectralForcing::new(&p.forcing, cfg)?;
    let m = p.m;
    let mult = move |s: T, xi: T| Complex::new((-(s) * (m + xi * xi)).exp(), T::zero());
    let mut spectral = Vec::with_capacity(grid.len());
    for &t in grid.nodes() {
        let free = phi_hat.multiply_by(|xi| mult(t, xi));
        let u = if p.forcing.is_zero() {
            free
        } else {
            free.add(&duhamel(&forcing, t, panels, cfg, &mult)?)?
        };
        spectral.push(u);
    }
    let prov = provenance(ProblemKind::Heat, p.hash(), cfg, panels, Some(&p.forcing));
    SolutionTrajectory::build(grid.clone(), spectral, cfg, prov)
}

/// `ω = sqrt(b² - 4(m + ξ²))`, principal branch.
pub fn discriminant_root<T: Real>(b: T, m: T, xi: T) -> Complex<T> {
    Complex::new(b * b - T::lit(4.0) * (m + xi * xi), T::zero()).sqrt()
}

/// `(e^{ωt/2} - e^{-ωt/2}) / ω`, with the series `t (1 + (ωt)²/24)` near `ωt = 0`.
pub fn sinh_quotient<T: Real>(omega: Complex<T>, t: T) -> Complex<T> {
    let z = omega * t;
    if z.norm() < T::lit(SERIES_GUARD) {
        return (Complex::new(T::one(), T::zero()) + z * z / T::lit(24.0)) * t;
    }
    let half = z / T::lit(2.0);
    (half.exp() - (-half).exp()) / omega
}

/// `K(t, ξ) = e^{ωt/2} + e^{-ωt/2} + b (e^{ωt/2} - e^{-ωt/2}) / ω`.
pub fn wave_symbol<T: Real>(b: T, omega: Complex<T>, t: T) -> Complex<T> {
    let half = omega * t / T::lit(2.0);
    half.exp() + (-half).exp() + sinh_quotient(omega, t) * b
}

/// Per-frequency coefficients `G1, G2` of the homogeneous wave solution.
#[derive(Debug, Clone)]
pub struct SpectralCoefficients<T: Real = f64> {
    pub omega: Vec<Complex<T>>,
    pub g1: SpectralFunction<T>,
    pub g2: SpectralFunction<T>,
}

/// `G1 = (1/2 + b/(2ω)) φ̂ + ψ̂/ω`, `G2 = (1/2 - b/(2ω)) φ̂ - ψ̂/ω`.
pub fn wave_coefficients<T: Real>(
    b: T,
    m: T,
    phi_hat: &SpectralFunction<T>,
    psi_hat: &SpectralFunction<T>,
) -> Result<SpectralCoefficients<T>> {
    let spec = *phi_hat.spec();
    let omega: Vec<Complex<T>> = (0..spec.len()).map(|i| discriminant_root(b, m, phi_hat.frequency(i))).collect();
    let half = T::lit(0.5);
    let mut g1 = (Vec::new(), Vec::new());
    let mut g2 = (Vec::new(), Vec::new());
    for (i, w) in omega.iter().enumerate() {
        let a = Complex::new(half, T::zero()) + Complex::new(b * half, T::zero()) / w;
        let a2 = Complex::new(half, T::zero()) - Complex::new(b * half, T::zero()) / w;
        for (sign, out1, out2) in [(Sign::Pos, &mut g1.0, &mut g2.0), (Sign::Neg, &mut g1.1, &mut g2.1)] {
            let ph = phi_hat.channel(sign)[i];
            let ps = psi_hat.channel(sign)[i];
            out1.push(a * ph + ps / w);
            out2.push(a2 * ph - ps / w);
        }
    }
    Ok(SpectralCoefficients {
        omega,
        g1: SpectralFunction::new(spec, g1.0, g1.1)?,
        g2: SpectralFunction::new(spec, g2.0, g2.1)?,
    })
}

/// Spectral solution of the homogeneous wave problem at time `t`.
pub fn wave_spectral_at<T: Real>(
    b: T,
    coeffs: &SpectralCoefficients<T>,
    phi_hat: &SpectralFunction<T>,
    psi_hat: &SpectralFunction<T>,
    t: T,
) -> Result<SpectralFunction<T>> {
    let spec = *phi_hat.spec();
    let mut pos = Vec::with_capacity(spec.len());
    let mut neg = Vec::with_capacity(spec.len());
    let hb = Complex::new(-b / T::lit(2.0), T::zero());
    for (i, &w) in coeffs.omega.iter().enumerate() {
        if (w * t).norm() < T::lit(SERIES_GUARD) {
            // equivalent form e^{-bt/2} [(K/2) φ̂ + S ψ̂] without the 1/ω coefficients
            let damp = (hb * t).exp();
            let k_half = wave_symbol(b, w, t) / T::lit(2.0);
            let s = sinh_quotient(w, t);
            pos.push(damp * (k_half * phi_hat.pos()[i] + s * psi_hat.pos()[i]));
            neg.push(damp * (k_half * phi_hat.neg()[i] + s * psi_hat.neg()[i]));
        } else {
            let e1 = ((hb + w / T::lit(2.0)) * t).exp();
            let e2 = ((hb - w / T::lit(2.0)) * t).exp();
            pos.push(coeffs.g1.pos()[i] * e1 + coeffs.g2.pos()[i] * e2);
            neg.push(coeffs.g1.neg()[i] * e1 + coeffs.g2.neg()[i] * e2);
        }
    }
    SpectralFunction::new(spec, pos, neg)
}

/// `û(t, ξ) = G1 e^{(-b/2 + ω/2) t} + G2 e^{(-b/2 - ω/2) t}`.
pub fn solve_wave<T: Real>(p: &WaveProblem<T>, grid: &TimeGrid<T>, cfg: &TransformConfig<T>) -> Result<SolutionTrajectory<T>> {
    check_grid(grid, p.t_final)?;
    check_data(&p.phi, cfg, "phi")?;
    check_data(&p.psi, cfg, "psi")?;
    let phi_hat = forward(&p.phi, cfg)?;
    let psi_hat = forward(&p.psi, cfg)?;
    let coeffs = wave_coefficients(p.b, p.m, &phi_hat, &psi_hat)?;
    let spectral = grid
        .nodes()
        .iter()
        .map(|&t| wave_spectral_at(p.b, &coeffs, &phi_hat, &psi_hat, t))
        .collect::<Result<Vec<_>>>()?;
    let prov = provenance(ProblemKind::Wave, p.hash(), cfg, 0, None);
    SolutionTrajectory::build(grid.clone(), spectral, cfg, prov)
}

/// `û(t, ξ) = ∫_0^t f̂(τ, ξ) [e^{(-b/2+ω/2)(t-τ)} - e^{(-b/2-ω/2)(t-τ)}] / ω dτ`.
pub fn solve_forced_wave<T: Real>(
    p: &ForcedWaveProblem<T>,
    grid: &TimeGrid<T>,
    cfg: &TransformConfig<T>,
    panels: usize,
) -> Result<SolutionTrajectory<T>> {
    check_grid(grid, p.t_final)?;
    let forcing = SpectralForcing::new(&p.forcing, cfg)?;
    let (b, m) = (p.b, p.m);
    let mult = move |s: T, xi: T| {
        let w = discriminant_root(b, m, xi);
        sinh_quotient(w, s) * (-b * s / T::lit(2.0)).exp()
    };
    let spectral = grid
        .nodes()
        .iter()
        .map(|&t| duhamel(&forcing, t, panels, cfg, &mult))
        .collect::<Result<Vec<_>>>()?;
    let prov = provenance(ProblemKind::ForcedWave, p.hash(), cfg, panels, Some(&p.forcing));
    SolutionTrajectory::build(grid.clone(), spectral, cfg, prov)
}

/// Physical-space kernels `Φ(t, x, y)` and `Ψ(t, x, y)` of the homogeneous wave solution,
/// tabulated over all pairs of signed lattice points.
#[derive(Debug, Clone)]
pub struct WaveKernels<T: Real = f64> {
    n: usize,
    mode: Mode,
    phi: Vec<Complex<T>>,
    psi: Vec<Complex<T>>,
}

fn signed_points(mode: Mode) -> &'static [Sign] {
    match mode {
        Mode::FullLine => &[Sign::Pos, Sign::Neg],
        Mode::HalfLine => &[Sign::Pos],
    }
}

fn mul_sign(a: Sign, b: Sign) -> Sign {
    if a == b {
        Sign::Pos
    } else {
        Sign::Neg
    }
}

/// `Φ = c²/2 · e^{-bt/2} ∫ K(t,ξ) e(-iξy) e(iξx) d_qξ`, `Ψ = c² e^{-bt/2} ∫ S(t,ξ) e(-iξy) e(iξx) d_qξ`,
/// where `c` is the calibrated prefactor (nominally `1/(8π_q²)` and `1/(4π_q²)`).
pub fn wave_kernels<T: Real>(b: T, m: T, t: T, cfg: &TransformConfig<T>) -> Result<WaveKernels<T>> {
    check_wave(b, m, if t > T::zero() { t } else { T::one() })?;
    let spec = *cfg.spec();
    let n = spec.len();
    let kernel = cfg.kernel();
    kernel.require(2 * spec.k_min(), 2 * spec.k_max())?;
    let c = cfg.normalization();
    let damp = (-b * t / T::lit(2.0)).exp();
    let signs = signed_points(cfg.mode());
    let ns = signs.len();
    let idx = |s: usize, i: usize| s * n + i;
    let mut phi = vec![czero::<T>(); (ns * n) * (ns * n)];
    let mut psi = phi.clone();
    let sym: Vec<(Complex<T>, Complex<T>)> = spec
        .indices()
        .map(|j| {
            let w = discriminant_root(b, m, spec.point(j));
            let wt = spec.weight(j);
            (
                wave_symbol(b, w, t) * (wt * c * c * damp / T::lit(2.0)),
                sinh_quotient(w, t) * (wt * c * c * damp),
            )
        })
        .collect();
    for (sx, &sgx) in signs.iter().enumerate() {
        for (ix, kx) in spec.indices().enumerate() {
            for (sy, &sgy) in signs.iter().enumerate() {
                for (iy, ky) in spec.indices().enumerate() {
                    let mut acc_phi = czero::<T>();
                    let mut acc_psi = czero::<T>();
                    for &sgxi in signs {
                        for (ij, j) in spec.indices().enumerate() {
                            // e(-iξy) e(iξx) at ξ = ±q^j
                            let ey = kernel.at(j + ky, mul_sign(sgxi, sgy).flip()).expect("covered");
                            let ex = kernel.at(j + kx, mul_sign(sgxi, sgx)).expect("covered");
                            let e = ey * ex;
                            acc_phi = acc_phi + sym[ij].0 * e;
                            acc_psi = acc_psi + sym[ij].1 * e;
                        }
                    }
                    let at = idx(sx, ix) * (ns * n) + idx(sy, iy);
                    phi[at] = acc_phi;
                    psi[at] = acc_psi;
                }
            }
        }
    }
    Ok(WaveKernels {
        n,
        mode: cfg.mode(),
        phi,
        psi,
    })
}

impl<T: Real> WaveKernels<T> {
    fn slot(&self, i: usize, s: Sign) -> usize {
        match s {
            Sign::Pos => i,
            Sign::Neg => self.n + i,
        }
    }

    fn width(&self) -> usize {
        signed_points(self.mode).len() * self.n
    }

    /// `Φ(t, x, y)` for lattice slots `x = (ix, sx)`, `y = (iy, sy)`.
    pub fn phi(&self, ix: usize, sx: Sign, iy: usize, sy: Sign) -> Complex<T> {
        self.phi[self.slot(ix, sx) * self.width() + self.slot(iy, sy)]
    }

    pub fn psi(&self, ix: usize, sx: Sign, iy: usize, sy: Sign) -> Complex<T> {
        self.psi[self.slot(ix, sx) * self.width() + self.slot(iy, sy)]
    }

    /// `∫ Φ(t,x,y) φ(y) d_q y + ∫ Ψ(t,x,y) ψ(y) d_q y`.
    pub fn apply(&self, phi: &SignedLatticeFunction<T>, psi: &SignedLatticeFunction<T>) -> Result<SignedLatticeFunction<T>> {
        let spec = *phi.spec();
        if spec.len() != self.n || psi.spec() != &spec {
            return Err(Error::LatticeMismatch("kernel and data lattices differ".into()));
        }
        let signs = signed_points(self.mode);
        let mut out = SignedLatticeFunction::zeros(spec);
        for &sx in signs {
            for ix in 0..self.n {
                let mut acc = czero::<T>();
                for &sy in signs {
                    for (iy, ky) in spec.indices().enumerate() {
                        let w = spec.weight(ky);
                        acc = acc
                            + (self.phi(ix, sx, iy, sy) * phi.channel(sy)[iy] + self.psi(ix, sx, iy, sy) * psi.channel(sy)[iy]) * w;
                    }
                }
                out.channel_mut(sx)[ix] = acc;
            }
        }
        Ok(out)
    }
}

/// FNV-1a over the bit patterns of the problem data.
struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Self(0xcbf2_9ce4_8422_2325)
    }

    fn word(&mut self, w: u64) {
        for b in w.to_le_bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }

    fn real<T: Real>(&mut self, v: T) {
        self.word(v.as_f64().to_bits());
    }

    fn finish(&self) -> u64 {
        self.0
    }

    fn samples<T: Real>(&mut self, f: &SignedLatticeFunction<T>) {
        self.word(f.spec().k_min() as u64);
        self.word(f.spec().k_max() as u64);
        self.real(f.spec().q().value());
        for z in f.pos().iter().chain(f.neg()) {
            self.real(z.re);
            self.real(z.im);
        }
    }
}
