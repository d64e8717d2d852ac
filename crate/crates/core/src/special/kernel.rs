//! Tabulated transform kernel `E_m = e_{q²}(i q^m)` over every index sum the transform
//! can reach on a lattice.
//!
//! Entries with `q^m <= 1` come from the direct series. Larger arguments are reached by
//! marching outward from `m = 0` with
//!
//! ```text
//! cos(u/q) = cos(u) - u (1-q) sin(u)
//! sin(u/q) = sin(u) + (u/q) (1-q) cos(u/q)
//! ```
//!
//! in binary high precision. The march is exactly as ill-conditioned as the series (its
//! step matrix has unit determinant and grows like the largest series term), so each run
//! is repeated 64 bits wider and an entry is accepted once both runs agree to `2^-60`
//! relative. Precision is raised by half again until the whole range certifies or the
//! budget is spent; in the latter case the table stops at the deepest certified entry.

use num_complex::Complex;

use super::{e_q2_imag, mp};
use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, QParam, Sign};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelOptions {
    /// Absolute tolerance for the direct series at `q^m <= 1`.
    pub tol: f64,
    /// Starting precision of the recurrence, in decimal digits.
    pub precision_digits: u32,
    /// Precision budget for escalation, in decimal digits.
    pub max_digits: u32,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            tol: super::DEFAULT_TOL,
            precision_digits: 60,
            max_digits: 4000,
        }
    }
}

/// One row of the CSV audit dump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelRow {
    pub m: i64,
    pub argument: f64,
    pub re: f64,
    pub im: f64,
    pub certified_error: f64,
}

/// Comparison of the recurrence against the working-precision series where both run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapCheck {
    /// Inclusive range of `m` compared.
    pub window: (i64, i64),
    /// `max |table - series| / max(1, |series|)` over the window.
    pub max_scaled_diff: f64,
}

impl OverlapCheck {
    pub const TOLERANCE: f64 = 1e-10;

    pub fn passed(&self) -> bool {
        self.max_scaled_diff <= Self::TOLERANCE
    }
}

#[derive(Debug, Clone)]
pub struct KernelTable<T = f64> {
    q: QParam<T>,
    requested: (i64, i64),
    lo: i64,
    hi: i64,
    values: Vec<Complex<T>>,
    errors: Vec<T>,
    cancellation_log10: Vec<f64>,
    working_digits: u32,
    overlap: OverlapCheck,
}

struct Chain {
    values: Vec<Complex<f64>>,
    errors: Vec<f64>,
}

/// March from `m = 0` down to `m = lo` at precision `ctx`, returning `f64` roundings of
/// every entry `m = -1, -2, ..., lo`.
fn march(q: f64, lo: i64, ctx: mp::Ctx) -> Vec<Complex<f64>> {
    let (mut c, mut s, _) = mp::trig_q2(1.0, q, ctx);
    let qb = ctx.num(q);
    let omq = ctx.sub(&ctx.num(1.0), &qb);
    let mut u = ctx.num(1.0);
    let mut out = Vec::with_capacity((-lo) as usize);
    for _ in lo..0 {
        c = ctx.sub(&c, &ctx.mul(&ctx.mul(&u, &omq), &s));
        u = ctx.div(&u, &qb);
        s = ctx.add(&s, &ctx.mul(&ctx.mul(&u, &omq), &c));
        out.push(Complex::new(mp::to_f64(&c), mp::to_f64(&s)));
    }
    out
}

fn certified(diff: f64, v: Complex<f64>) -> bool {
    let mag = v.norm();
    diff <= 2f64.powi(-60) * mag || mag < 2f64.powi(-1000) && diff < 2f64.powi(-1100)
}

/// Recurrence entries for `m = -1..=lo` (index 0 is `m = -1`), escalating precision as
/// needed. Returns the certified prefix and the digits of the final run.
fn negative_chain(q: f64, lo: i64, opts: &KernelOptions) -> (Chain, u32) {
    let max_bits = mp::Ctx::from_digits(opts.max_digits).bits;
    let mut ctx = mp::Ctx::from_digits(opts.precision_digits);
    loop {
        let base = march(q, lo, ctx);
        let wide = march(q, lo, ctx.wider(64));
        let mut chain = Chain {
            values: Vec::with_capacity(base.len()),
            errors: Vec::with_capacity(base.len()),
        };
        for (a, b) in base.iter().zip(&wide) {
            let diff = (a - b).norm();
            if !certified(diff, *b) {
                break;
            }
            chain.values.push(*b);
            // disagreement between the two runs plus the final rounding to f64
            chain.errors.push(diff + f64::EPSILON * b.norm() + f64::from_bits(1));
        }
        if chain.values.len() == base.len() || ctx.bits >= max_bits {
            return (chain, ctx.wider(64).digits());
        }
        ctx = ctx.grown(max_bits);
    }
}

/// `log10` of the largest term of the series at argument `x > 0`.
fn max_term_log10(x: f64, q: f64) -> f64 {
    let (lx, lq) = (x.ln(), q.ln());
    let mut bracket = 0.0;
    let mut log_a = 0.0f64;
    let mut best = 0.0f64;
    for n in 1..100_000u32 {
        bracket = 1.0 + q * bracket;
        log_a += lx - f64::ln(bracket);
        if n % 2 == 0 {
            log_a += n as f64 * lq;
        }
        best = best.max(log_a);
        if log_a < best - 40.0 {
            break;
        }
    }
    best / std::f64::consts::LN_10
}

/// Kernel table for every index sum `m = k + j` of two lattice indices on `spec`,
/// i.e. `m` in `[2 k_min, 2 k_max]`.
pub fn build_kernel_table<T: Real>(spec: &LatticeSpec<T>, tol: T) -> Result<KernelTable<T>> {
    build_kernel_table_with(
        spec,
        &KernelOptions {
            tol: tol.as_f64(),
            ..KernelOptions::default()
        },
    )
}

pub fn build_kernel_table_with<T: Real>(
    spec: &LatticeSpec<T>,
    opts: &KernelOptions,
) -> Result<KernelTable<T>> {
    build_range(spec.q(), 2 * spec.k_min(), 2 * spec.k_max(), opts)
}

/// Kernel table over an explicit range of `m`.
pub fn build_range<T: Real>(q: QParam<T>, lo: i64, hi: i64, opts: &KernelOptions) -> Result<KernelTable<T>> {
    if lo > hi {
        return Err(Error::InvalidParameter(format!("empty kernel range [{lo}, {hi}]")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {}", opts.tol)));
    }
    if opts.precision_digits == 0 || opts.max_digits < opts.precision_digits {
        return Err(Error::InvalidParameter(format!(
            "precision digits {} must be positive and at most the budget {}",
            opts.precision_digits, opts.max_digits
        )));
    }
    let qf = q.value().as_f64();
    let q64 = QParam::new(qf)?;

    let (chain, working_digits) = if lo < 0 {
        negative_chain(qf, lo, opts)
    } else {
        (
            Chain {
                values: Vec::new(),
                errors: Vec::new(),
            },
            0,
        )
    };
    // deepest m reached by the certified part of the march
    let first = if lo < 0 { -(chain.values.len() as i64) } else { lo };
    if first > hi {
        return Err(Error::KernelCoverage {
            need_lo: lo,
            need_hi: hi,
            have_lo: first,
            have_hi: hi.max(first),
        });
    }

    let mut values = Vec::with_capacity((hi - first + 1) as usize);
    let mut errors = Vec::with_capacity(values.capacity());
    let mut cancellation = Vec::with_capacity(values.capacity());
    let t_eps = T::epsilon().as_f64();
    for m in first..=hi {
        let (v, err) = if m < 0 {
            let idx = (-m - 1) as usize;
            (chain.values[idx], chain.errors[idx])
        } else {
            let kv = e_q2_imag(q64.powi(m), q64, opts.tol.min(super::DEFAULT_TOL))?;
            (kv.value, kv.error_bound)
        };
        let vt = Complex::new(T::lit(v.re), T::lit(v.im));
        // rounding into T, or the whole value when it underflows there
        let back = Complex::new(vt.re.as_f64(), vt.im.as_f64());
        let round = (back - v).norm().max(t_eps * v.norm() * 0.5);
        values.push(vt);
        errors.push(T::lit(err + round));
        cancellation.push(if m < 0 { max_term_log10(q64.powi(m), qf) } else { 0.0 });
    }

    // recurrence against the working-precision series while the latter still certifies
    let mut window_lo = 0i64.min(hi);
    let mut worst = 0.0f64;
    let mut m = -1i64;
    while m >= first {
        match e_q2_imag(q64.powi(m), q64, 1e-11) {
            Ok(kv) => {
                let idx = (m - first) as usize;
                let table = Complex::new(values[idx].re.as_f64(), values[idx].im.as_f64());
                let d = (table - kv.value).norm() / kv.value.norm().max(1.0);
                worst = worst.max(d);
                window_lo = m;
                m -= 1;
            }
            Err(_) => break,
        }
    }
    let window_hi = 0i64.max(window_lo).min(hi);

    Ok(KernelTable {
        q,
        requested: (lo, hi),
        lo: first,
        hi,
        values,
        errors,
        cancellation_log10: cancellation,
        working_digits,
        overlap: OverlapCheck {
            window: (window_lo, window_hi),
            max_scaled_diff: worst,
        },
    })
}

impl<T: Real> KernelTable<T> {
    pub fn q(&self) -> QParam<T> {
        self.q
    }

    /// Range of `m` that was asked for.
    pub fn requested(&self) -> (i64, i64) {
        self.requested
    }

    /// Range of `m` actually tabulated.
    pub fn range(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn is_complete(&self) -> bool {
        self.lo == self.requested.0
    }

    pub fn covers(&self, lo: i64, hi: i64) -> bool {
        self.lo <= lo && hi <= self.hi
    }

    pub fn require(&self, lo: i64, hi: i64) -> Result<()> {
        if self.covers(lo, hi) {
            Ok(())
        } else {
            Err(Error::KernelCoverage {
                need_lo: lo,
                need_hi: hi,
                have_lo: self.lo,
                have_hi: self.hi,
            })
        }
    }

    /// `e_{q²}(i q^m)`.
    pub fn get(&self, m: i64) -> Option<Complex<T>> {
        (self.lo..=self.hi)
            .contains(&m)
            .then(|| self.values[(m - self.lo) as usize])
    }

    /// `e_{q²}(± i q^m)`; the negative argument is the conjugate.
    pub fn at(&self, m: i64, sign: Sign) -> Option<Complex<T>> {
        self.get(m).map(|v| match sign {
            Sign::Pos => v,
            Sign::Neg => v.conj(),
        })
    }

    pub fn error(&self, m: i64) -> Option<T> {
        (self.lo..=self.hi)
            .contains(&m)
            .then(|| self.errors[(m - self.lo) as usize])
    }

    /// Contiguous values for `m` in `[lo, hi]`.
    pub fn slice(&self, lo: i64, hi: i64) -> Result<&[Complex<T>]> {
        self.require(lo, hi)?;
        Ok(&self.values[(lo - self.lo) as usize..=(hi - self.lo) as usize])
    }

    pub fn errors_slice(&self, lo: i64, hi: i64) -> Result<&[T]> {
        self.require(lo, hi)?;
        Ok(&self.errors[(lo - self.lo) as usize..=(hi - self.lo) as usize])
    }

    /// Decimal digits of the widest recurrence run (0 when no recurrence was needed).
    pub fn working_digits(&self) -> u32 {
        self.working_digits
    }

    /// Largest `log10` of an intermediate series term over the tabulated arguments.
    pub fn max_cancellation_log10(&self) -> f64 {
        self.cancellation_log10.iter().cloned().fold(0.0, f64::max)
    }

    pub fn cancellation_log10(&self, m: i64) -> Option<f64> {
        (self.lo..=self.hi)
            .contains(&m)
            .then(|| self.cancellation_log10[(m - self.lo) as usize])
    }

    pub fn overlap(&self) -> OverlapCheck {
        self.overlap
    }

    /// Empirical `sup |e_{q²}(i q^m)|` over the table.
    pub fn empirical_sup(&self) -> T {
        self.values.iter().fold(T::zero(), |a, v| a.max(v.norm()))
    }

    pub fn max_certified_error(&self) -> T {
        self.errors.iter().fold(T::zero(), |a, &e| a.max(e))
    }

    pub fn rows(&self) -> Vec<KernelRow> {
        (self.lo..=self.hi)
            .zip(self.values.iter().zip(&self.errors))
            .map(|(m, (v, e))| KernelRow {
                m,
                argument: self.q.powi(m).as_f64(),
                re: v.re.as_f64(),
                im: v.im.as_f64(),
                certified_error: e.as_f64(),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(k_min: i64, k_max: i64) -> LatticeSpec<f64> {
        LatticeSpec::new(QParam::new(0.5).unwrap(), k_min, k_max).unwrap()
    }

    #[test]
    fn covers_every_index_sum() {
        let t = build_kernel_table(&spec(-6, 10), 1e-14).unwrap();
        assert_eq!(t.range(), (-12, 20));
        assert!(t.is_complete());
        assert!(t.require(-12, 20).is_ok());
        assert!(matches!(t.require(-13, 0), Err(Error::KernelCoverage { .. })));
    }

    #[test]
    fn unit_argument_matches_series() {
        let t = build_kernel_table(&spec(-3, 3), 1e-14).unwrap();
        let qq = QParam::new(0.5).unwrap();
        assert_eq!(t.get(0).unwrap(), e_q2_imag(1.0, qq, 1e-14).unwrap().value);
    }

    #[test]
    fn recurrence_matches_series_on_overlap() {
        let t = build_kernel_table(&spec(-12, 40), 1e-14).unwrap();
        let o = t.overlap();
        assert!(o.window.0 <= -2, "{o:?}");
        assert!(o.passed(), "{o:?}");
    }

    #[test]
    fn recurrence_matches_high_precision_series() {
        let t = build_kernel_table(&spec(-12, 4), 1e-14).unwrap();
        for m in [-1, -5, -12, -20, -24] {
            let (hp, _) = super::super::e_q2_imag_mp(0.5f64.powi(m as i32), 0.5, 60, 2000).unwrap();
            let v = t.get(m).unwrap();
            assert!((v - hp).norm() <= 1e-13 * hp.norm(), "m={m} {v} {hp}");
            assert!(t.error(m).unwrap() <= 1e-15 * hp.norm());
        }
    }

    #[test]
    fn every_row_is_certified_and_conjugates_pair() {
        let t = build_kernel_table(&spec(-12, 40), 1e-14).unwrap();
        for r in t.rows() {
            assert!(r.certified_error.is_finite() && r.certified_error > 0.0 || r.m >= 0);
            let p = t.at(r.m, Sign::Pos).unwrap();
            let n = t.at(r.m, Sign::Neg).unwrap();
            assert_eq!(n, p.conj());
        }
        assert!(t.working_digits() > 60);
        assert!(t.max_cancellation_log10() > 100.0);
    }

    #[test]
    fn exhausted_budget_truncates_with_report() {
        let opts = KernelOptions {
            tol: 1e-14,
            precision_digits: 20,
            max_digits: 40,
        };
        let t: KernelTable<f64> = build_kernel_table_with(&spec(-12, 4), &opts).unwrap();
        assert!(!t.is_complete());
        assert!(t.range().0 > -24 && t.range().0 < 0, "{:?}", t.range());
        assert!(matches!(t.require(-24, 8), Err(Error::KernelCoverage { have_lo, .. }) if have_lo == t.range().0));
    }

    #[test]
    fn single_precision_table_rounds_from_double() {
        let s32 = LatticeSpec::new(QParam::new(0.5f32).unwrap(), -4, 8).unwrap();
        let t = build_kernel_table(&s32, 1e-6f32).unwrap();
        let d = build_kernel_table(&spec(-4, 8), 1e-14).unwrap();
        for m in -8..=16 {
            let a = t.get(m).unwrap();
            let b = d.get(m).unwrap();
            assert!((a.re as f64 - b.re).abs() <= 1e-7 * b.norm().max(1e-30));
        }
    }
}
