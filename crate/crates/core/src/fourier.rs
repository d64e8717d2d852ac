//! The q²-Fourier transform on the truncated lattice.
//!
//! On the signed line the pair is
//!
//! ```text
//! f̂(ξ) = c ∫ f(x) e_{q²}(-ixξ) d_q x,      ǧ(x) = c ∫ g(ξ) e_{q²}(ixξ) d_q ξ,
//! ```
//!
//! with both integrals running over `{±q^k}`. Every kernel argument is a lattice point
//! `±q^{k+j}`, so all kernel values come from one [`KernelTable`]. Half-line mode keeps
//! only the positive points and positive frequencies.
//!
//! The prefactor starts at `c = 1/(2π_q)` and is corrected by [`calibrate`], which
//! measures the round-trip scale on Gaussian probes; the raw scale is kept for audit.

use std::sync::{Arc, OnceLock};

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::lattice::{pi_q, LatticeSpec, Mode, SignedLatticeFunction, SpectralFunction};
use crate::quadrature::{l2_norm_mode, weighted_square_sum};
use crate::rubin::rubin_d2;
use crate::scalar::{czero, Real};
use crate::special::{build_kernel_table, KernelTable, DEFAULT_TOL};

/// Decay rates `a` of the calibration probes `e^{-a x²}`.
pub const PROBE_RATES: [f64; 3] = [0.5, 1.0, 2.0];

/// Probe scales must agree to this relative spread.
pub const PROBE_CONSISTENCY: f64 = 1e-6;

/// Largest round-trip residual a calibration may leave behind.
pub const CALIBRATION_RESIDUAL: f64 = 1e-8;

/// A gate tightened for `f64`, floored at a hundred ulps of `T`.
fn gate<T: Real>(tol: f64) -> T {
    T::lit(tol).max(T::lit(100.0) * T::epsilon())
}

/// Record of how the prefactor was fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration<T> {
    /// `1/(2π_q)`.
    pub nominal_constant: T,
    /// Round-trip scale `⟨inv(fwd f), f⟩ / ⟨f, f⟩` with the nominal constant, per probe.
    pub probe_scales: Vec<T>,
    /// Mean of the probe scales.
    pub raw_scale: T,
    /// `c / (1/(2π_q))`.
    pub correction: T,
    /// Largest relative round-trip residual on the probes after correction.
    pub residual: T,
}

struct Plan<T: Real> {
    size: usize,
    fft: Arc<dyn Fft<T>>,
    ifft: Arc<dyn Fft<T>>,
    kernel: Vec<Complex<T>>,
    kernel_conj: Vec<Complex<T>>,
}

impl<T: Real> std::fmt::Debug for Plan<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Plan").field("size", &self.size).finish()
    }
}

/// Prefactor, mode and kernel table for transforms whose frequency and spatial windows
/// are both `spec`.
#[derive(Debug, Clone)]
pub struct TransformConfig<T: Real = f64> {
    spec: LatticeSpec<T>,
    mode: Mode,
    c: T,
    calibration: Option<Calibration<T>>,
    kernel: Arc<KernelTable<T>>,
    plan: Arc<OnceLock<Plan<T>>>,
}

impl<T: Real> TransformConfig<T> {
    /// Configuration with the nominal prefactor `1/(2π_q)` and no calibration.
    pub fn uncalibrated(spec: LatticeSpec<T>, mode: Mode, kernel: Arc<KernelTable<T>>) -> Result<Self> {
        if kernel.q() != spec.q() {
            return Err(Error::LatticeMismatch("kernel table built for a different q".into()));
        }
        kernel.require(2 * spec.k_min(), 2 * spec.k_max())?;
        Ok(Self {
            spec,
            mode,
            c: nominal_constant(&spec),
            calibration: None,
            kernel,
            plan: Arc::new(OnceLock::new()),
        })
    }

    pub fn spec(&self) -> &LatticeSpec<T> {
        &self.spec
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// The prefactor in use.
    pub fn normalization(&self) -> T {
        self.c
    }

    pub fn calibration(&self) -> Option<&Calibration<T>> {
        self.calibration.as_ref()
    }

    pub fn kernel(&self) -> &KernelTable<T> {
        &self.kernel
    }

    pub fn kernel_arc(&self) -> Arc<KernelTable<T>> {
        Arc::clone(&self.kernel)
    }

    /// Same configuration with another prefactor (calibration record dropped).
    pub fn with_normalization(&self, c: T) -> Result<Self> {
        if !(c > T::zero()) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("normalization must be positive, got {c}")));
        }
        Ok(Self {
            c,
            calibration: None,
            plan: Arc::clone(&self.plan),
            ..self.clone()
        })
    }

    fn check_input(&self, spec: &LatticeSpec<T>, out: &LatticeSpec<T>) -> Result<()> {
        if spec.q() != self.spec.q() || out.q() != self.spec.q() {
            return Err(Error::LatticeMismatch("transform input uses a different q".into()));
        }
        self.kernel
            .require(spec.k_min() + out.k_min(), spec.k_max() + out.k_max())
    }
}

/// `1/(2π_q)`.
pub fn nominal_constant<T: Real>(spec: &LatticeSpec<T>) -> T {
    T::one() / (T::lit(2.0) * pi_q(spec.q()))
}

/// Correlation along the index sum: `out_j = Σ_k a_k K(k+j)` for `j` in `out`.
fn correlate<T: Real>(
    a_pos: &[Complex<T>],
    a_neg: &[Complex<T>],
    in_spec: &LatticeSpec<T>,
    out_spec: &LatticeSpec<T>,
    kernel: &KernelTable<T>,
    mode: Mode,
    conj_for_pos: bool,
) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
    let base = in_spec.k_min() + out_spec.k_min();
    let table = kernel
        .slice(base, in_spec.k_max() + out_spec.k_max())
        .expect("coverage checked by caller");
    let mut pos = Vec::with_capacity(out_spec.len());
    let mut neg = Vec::with_capacity(out_spec.len());
    for jj in 0..out_spec.len() {
        let mut acc_p = czero::<T>();
        let mut acc_n = czero::<T>();
        for kk in 0..in_spec.len() {
            let e = table[kk + jj];
            let (same, cross) = if conj_for_pos { (e.conj(), e) } else { (e, e.conj()) };
            acc_p = acc_p + a_pos[kk] * same;
            if mode == Mode::FullLine {
                acc_p = acc_p + a_neg[kk] * cross;
                acc_n = acc_n + a_pos[kk] * cross + a_neg[kk] * same;
            }
        }
        pos.push(acc_p);
        neg.push(acc_n);
    }
    (pos, neg)
}

fn weighted<T: Real>(spec: &LatticeSpec<T>, v: &[Complex<T>], c: T) -> Vec<Complex<T>> {
    spec.indices().zip(v).map(|(k, z)| z * (c * spec.weight(k))).collect()
}

/// Forward transform onto the frequency window of `cfg`.
pub fn forward<T: Real>(f: &SignedLatticeFunction<T>, cfg: &TransformConfig<T>) -> Result<SpectralFunction<T>> {
    forward_on(f, &cfg.spec, cfg)
}

/// Forward transform onto an explicit frequency window.
pub fn forward_on<T: Real>(
    f: &SignedLatticeFunction<T>,
    freq: &LatticeSpec<T>,
    cfg: &TransformConfig<T>,
) -> Result<SpectralFunction<T>> {
    cfg.check_input(f.spec(), freq)?;
    let a_pos = weighted(f.spec(), f.pos(), cfg.c);
    let a_neg = weighted(f.spec(), f.neg(), cfg.c);
    let (pos, neg) = correlate(&a_pos, &a_neg, f.spec(), freq, &cfg.kernel, cfg.mode, true);
    SpectralFunction::new(*freq, pos, neg)
}

/// Inverse transform onto the spatial window of `cfg`, at both signs of every point.
pub fn inverse<T: Real>(g: &SpectralFunction<T>, cfg: &TransformConfig<T>) -> Result<SignedLatticeFunction<T>> {
    inverse_on(g, &cfg.spec, cfg)
}

pub fn inverse_on<T: Real>(
    g: &SpectralFunction<T>,
    space: &LatticeSpec<T>,
    cfg: &TransformConfig<T>,
) -> Result<SignedLatticeFunction<T>> {
    cfg.check_input(g.spec(), space)?;
    let a_pos = weighted(g.spec(), g.pos(), cfg.c);
    let a_neg = weighted(g.spec(), g.neg(), cfg.c);
    match cfg.mode {
        Mode::FullLine => {
            let (pos, neg) = correlate(&a_pos, &a_neg, g.spec(), space, &cfg.kernel, Mode::FullLine, false);
            SignedLatticeFunction::new(*space, pos, neg)
        }
        Mode::HalfLine => {
            let zero = vec![czero::<T>(); g.spec().len()];
            let (pos, _) = correlate(&a_pos, &zero, g.spec(), space, &cfg.kernel, Mode::HalfLine, false);
            // the conjugate kernel gives the values at -q^k
            let (neg, _) = correlate(&a_pos, &zero, g.spec(), space, &cfg.kernel, Mode::HalfLine, true);
            SignedLatticeFunction::new(*space, pos, neg)
        }
    }
}

/// Weighted inner product `⟨a, b⟩` over the mode's half or full lattice.
fn inner<T: Real>(a: &SignedLatticeFunction<T>, b: &SignedLatticeFunction<T>, mode: Mode) -> Complex<T> {
    let spec = a.spec();
    let mut acc = czero::<T>();
    for (i, k) in spec.indices().enumerate() {
        let mut v = a.pos()[i] * b.pos()[i].conj();
        if mode == Mode::FullLine {
            v = v + a.neg()[i] * b.neg()[i].conj();
        }
        acc = acc + v * spec.weight(k);
    }
    acc
}

fn probe<T: Real>(spec: LatticeSpec<T>, rate: f64) -> Result<SignedLatticeFunction<T>> {
    let a = T::lit(rate);
    SignedLatticeFunction::from_real_fn(spec, move |x| (-a * x * x).exp())
}

/// The calibration probe `e^{-a x²}` sampled on `spec`.
pub fn probe_function<T: Real>(spec: LatticeSpec<T>, rate: f64) -> Result<SignedLatticeFunction<T>> {
    probe(spec, rate)
}

/// Builds the kernel table for `spec` and calibrates the prefactor.
pub fn calibrate<T: Real>(spec: LatticeSpec<T>, mode: Mode) -> Result<TransformConfig<T>> {
    let kernel = Arc::new(build_kernel_table(&spec, T::lit(DEFAULT_TOL).max(T::epsilon() * T::lit(8.0)))?);
    calibrate_with(spec, mode, kernel)
}

/// Calibrates against an existing kernel table.
pub fn calibrate_with<T: Real>(spec: LatticeSpec<T>, mode: Mode, kernel: Arc<KernelTable<T>>) -> Result<TransformConfig<T>> {
    let raw = TransformConfig::uncalibrated(spec, mode, kernel)?;
    let c0 = raw.c;
    let mut scales = Vec::with_capacity(PROBE_RATES.len());
    let mut probes = Vec::with_capacity(PROBE_RATES.len());
    for &a in &PROBE_RATES {
        let f = probe(spec, a)?;
        let back = inverse(&forward(&f, &raw)?, &raw)?;
        scales.push((inner(&back, &f, mode) / inner(&f, &f, mode)).re);
        probes.push(f);
    }
    let n = T::of_int(scales.len() as i64);
    let mean = scales.iter().fold(T::zero(), |s, &v| s + v) / n;
    let spread = scales
        .iter()
        .fold(T::zero(), |m, &v| m.max((v - mean).abs()))
        / mean.abs();
    let describe = || {
        scales
            .iter()
            .zip(PROBE_RATES)
            .map(|(s, a)| format!("a={a}: {s:e}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    if !(mean > T::zero()) || spread > gate::<T>(PROBE_CONSISTENCY) {
        return Err(Error::Calibration(format!(
            "round-trip scales disagree across probes ({}), relative spread {spread:e}",
            describe()
        )));
    }
    let c = c0 / mean.sqrt();
    let cfg = raw.with_normalization(c)?;
    let mut residual = T::zero();
    for f in &probes {
        residual = residual.max(round_trip_residual(f, &cfg)?);
    }
    if residual > gate::<T>(CALIBRATION_RESIDUAL) {
        return Err(Error::Calibration(format!(
            "no prefactor restores the round trip: scales {}, residual after rescaling {residual:e}",
            describe()
        )));
    }
    Ok(TransformConfig {
        calibration: Some(Calibration {
            nominal_constant: c0,
            probe_scales: scales,
            raw_scale: mean,
            correction: c / c0,
            residual,
        }),
        ..cfg
    })
}

/// `‖inv(fwd f) - f‖ / ‖f‖` in the mode's norm.
pub fn round_trip_residual<T: Real>(f: &SignedLatticeFunction<T>, cfg: &TransformConfig<T>) -> Result<T> {
    let nf = l2_norm_mode(f, cfg.mode);
    if nf == T::zero() {
        return Err(Error::ZeroInput("round trip of the zero function".into()));
    }
    let back = inverse_on(&forward(f, cfg)?, f.spec(), cfg)?;
    Ok(l2_norm_mode(&back.sub(f)?, cfg.mode) / nf)
}

/// `|‖f̂‖ - ‖f‖| / ‖f‖`.
pub fn parseval_residual<T: Real>(f: &SignedLatticeFunction<T>, cfg: &TransformConfig<T>) -> Result<T> {
    let nf = l2_norm_mode(f, cfg.mode);
    if nf == T::zero() {
        return Err(Error::ZeroInput("Parseval ratio of the zero function".into()));
    }
    let nh = l2_norm_mode(&forward(f, cfg)?, cfg.mode);
    Ok((nh - nf).abs() / nf)
}

/// `‖fwd(D² f) + ξ² fwd(f)‖ / ‖ξ² fwd(f)‖` on the frequency window of `cfg`.
pub fn diagonalization_residual<T: Real>(f: &SignedLatticeFunction<T>, cfg: &TransformConfig<T>) -> Result<T> {
    let d2 = rubin_d2(f)?;
    let lhs = forward(&d2, cfg)?;
    let rhs = forward(f, cfg)?.multiply_by(|xi| Complex::new(xi * xi, T::zero()));
    let denom = weighted_square_sum(&rhs, cfg.mode, |_| T::one()).sqrt();
    if denom == T::zero() {
        return Err(Error::ZeroInput("diagonalization of the zero function".into()));
    }
    Ok(l2_norm_mode(&lhs.add(&rhs)?, cfg.mode) / denom)
}

fn build_plan<T: Real>(in_spec: &LatticeSpec<T>, out_spec: &LatticeSpec<T>, kernel: &KernelTable<T>) -> Plan<T> {
    let (n, m) = (in_spec.len(), out_spec.len());
    let size = (2 * n + m - 2).max(1).next_power_of_two();
    let mut planner = FftPlanner::<T>::new();
    let fft = planner.plan_fft_forward(size);
    let ifft = planner.plan_fft_inverse(size);
    let table = kernel
        .slice(in_spec.k_min() + out_spec.k_min(), in_spec.k_max() + out_spec.k_max())
        .expect("coverage checked by caller");
    let mut h = vec![czero::<T>(); size];
    h[..table.len()].copy_from_slice(table);
    let mut hc: Vec<Complex<T>> = h.iter().map(|z| z.conj()).collect();
    fft.process(&mut h);
    fft.process(&mut hc);
    Plan {
        size,
        fft,
        ifft,
        kernel: h,
        kernel_conj: hc,
    }
}

/// Forward transform as an FFT correlation along the index sum `k + j`, `O(N log N)`.
/// Falls back to [`forward`] when the kernel table does not cover the input.
pub fn forward_structured<T: Real>(f: &SignedLatticeFunction<T>, cfg: &TransformConfig<T>) -> Result<SpectralFunction<T>> {
    if cfg.check_input(f.spec(), &cfg.spec).is_err() {
        return forward(f, cfg);
    }
    let fresh;
    let plan = if f.spec() == &cfg.spec {
        cfg.plan.get_or_init(|| build_plan(f.spec(), &cfg.spec, &cfg.kernel))
    } else {
        fresh = build_plan(f.spec(), &cfg.spec, &cfg.kernel);
        &fresh
    };
    let n = f.spec().len();
    let m = cfg.spec.len();
    let load = |v: &[Complex<T>]| {
        let mut buf = vec![czero::<T>(); plan.size];
        // reversed weighted samples turn the correlation into a convolution
        for (i, (k, z)) in f.spec().indices().zip(v).enumerate() {
            buf[n - 1 - i] = z * (cfg.c * f.spec().weight(k));
        }
        plan.fft.process(&mut buf);
        buf
    };
    let ap = load(f.pos());
    let full = cfg.mode == Mode::FullLine;
    let an = if full { load(f.neg()) } else { vec![czero(); plan.size] };
    let scale = T::one() / T::of_int(plan.size as i64);
    let finish = |mut buf: Vec<Complex<T>>| {
        plan.ifft.process(&mut buf);
        buf[n - 1..n - 1 + m].iter().map(|z| z * scale).collect::<Vec<_>>()
    };
    let pos_spec: Vec<Complex<T>> = (0..plan.size)
        .map(|i| ap[i] * plan.kernel_conj[i] + an[i] * plan.kernel[i])
        .collect();
    let pos = finish(pos_spec);
    let neg = if full {
        finish(
            (0..plan.size)
                .map(|i| ap[i] * plan.kernel[i] + an[i] * plan.kernel_conj[i])
                .collect(),
        )
    } else {
        vec![czero(); m]
    };
    SpectralFunction::new(cfg.spec, pos, neg)
}
