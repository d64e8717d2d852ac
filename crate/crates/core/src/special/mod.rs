//! q²-trigonometric functions and the q²-exponential kernel `e_{q²}(ix)`.
//!
//! Small arguments are summed directly in the working scalar type. Large arguments make
//! the alternating series cancel catastrophically; the series refuses those with
//! [`Error::PrecisionEscalation`] and [`kernel`] tabulates lattice arguments through a
//! high-precision recurrence instead.

pub mod kernel;
pub mod mp;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::lattice::QParam;
use crate::scalar::Real;

pub use kernel::{build_kernel_table, build_kernel_table_with, KernelOptions, KernelRow, KernelTable};

/// Default absolute tolerance for series evaluation in working precision.
pub const DEFAULT_TOL: f64 = 1e-14;

/// A series value with its error bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue<T> {
    pub value: T,
    /// Largest intermediate term magnitude (the cancellation indicator).
    pub max_term: T,
    /// Bound on the absolute error: discarded tail plus accumulated rounding.
    pub error_bound: T,
    pub terms: usize,
}

/// `e_{q²}(ix) = cos_{q²}(x) + i sin_{q²}(x)` with combined error bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue<T> {
    pub value: Complex<T>,
    pub max_term: T,
    pub error_bound: T,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Parity {
    Even,
    Odd,
}

/// Sums `Σ (-1)^k q^{k(k+1)} z^n / [n]_q!` over `n = 2k` (even) or `n = 2k+1` (odd).
///
/// Terms are generated jointly for all n by `a_n = a_{n-1} z q^{n·[n even]} / [n]_q`, so the
/// q-factorial never has to be formed explicitly.
fn series<T: Real>(z: T, q: QParam<T>, tol: T, parity: Parity) -> Result<SeriesValue<T>> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    if !z.is_finite() {
        return Err(Error::NonFinite("series argument".into()));
    }
    let qv = q.value();
    let az = z.abs();
    let u = T::epsilon() / T::lit(2.0);
    let mut bracket = T::zero();
    let mut qn = T::one();
    let mut a = T::one();
    let (mut sum, mut max_term, mut abs_weighted, mut terms) = match parity {
        Parity::Even => (T::one(), T::one(), T::lit(2.0), 1usize),
        Parity::Odd => (T::zero(), T::zero(), T::zero(), 0usize),
    };
    let mut n: u32 = 0;
    let tail = loop {
        n += 1;
        bracket = T::one() + qv * bracket;
        qn = qn * qv;
        a = a * az / bracket;
        if n % 2 == 0 {
            a = a * qn;
        }
        let wanted = match parity {
            Parity::Even => n % 2 == 0,
            Parity::Odd => n % 2 == 1,
        };
        if !wanted {
            continue;
        }
        let signed = if (n / 2) % 2 == 0 { a } else { -a };
        sum = sum + signed;
        max_term = max_term.max(a);
        abs_weighted = abs_weighted + a * T::of_int(n as i64 + 2);
        terms += 1;
        if a == T::zero() {
            break T::zero();
        }
        // next same-parity term and the two-step ratio that bounds everything after it
        let b1 = T::one() + qv * bracket;
        let b2 = T::one() + qv * b1;
        let even_exp = if n % 2 == 0 { n + 2 } else { n + 1 };
        let r = az * az * qv.powi(even_exp as i32) / (b1 * b2);
        let next = a * r;
        let r_after = r * qv;
        if r_after < T::one() {
            let bound = next / (T::one() - r_after);
            if bound <= tol * T::lit(0.5) {
                break bound;
            }
        }
        if terms > 100_000 {
            return Err(Error::NonFinite("series failed to converge".into()));
        }
    };
    let rounding = u * abs_weighted;
    if rounding > tol * T::lit(0.5) {
        let needed = (max_term.as_f64().max(1.0) / tol.as_f64()).log10().ceil().max(1.0) as u32 + 4;
        return Err(Error::PrecisionEscalation {
            requested: tol.as_f64(),
            achievable: rounding.as_f64(),
            needed_digits: needed,
        });
    }
    let value = match parity {
        Parity::Even => sum,
        Parity::Odd => {
            if z < T::zero() {
                -sum
            } else {
                sum
            }
        }
    };
    Ok(SeriesValue {
        value,
        max_term,
        error_bound: tail + rounding,
        terms,
    })
}

/// `cos_{q²}(z) = Σ_{k≥0} (-1)^k q^{k(k+1)} z^{2k} / [2k]_q!` to absolute error `tol`.
pub fn cos_q2<T: Real>(z: T, q: QParam<T>, tol: T) -> Result<SeriesValue<T>> {
    series(z, q, tol, Parity::Even)
}

/// `sin_{q²}(z) = Σ_{k≥0} (-1)^k q^{k(k+1)} z^{2k+1} / [2k+1]_q!` to absolute error `tol`.
pub fn sin_q2<T: Real>(z: T, q: QParam<T>, tol: T) -> Result<SeriesValue<T>> {
    series(z, q, tol, Parity::Odd)
}

/// `e_{q²}(ix) = cos_{q²}(x) + i sin_{q²}(x)`.
///
/// `e_q2_imag(-x)` is the exact conjugate of `e_q2_imag(x)`: both components are computed
/// from `|x|` and only the sine changes sign.
pub fn e_q2_imag<T: Real>(x: T, q: QParam<T>, tol: T) -> Result<KernelValue<T>> {
    let c = cos_q2(x, q, tol)?;
    let s = sin_q2(x, q, tol)?;
    Ok(KernelValue {
        value: Complex::new(c.value, s.value),
        max_term: c.max_term.max(s.max_term),
        error_bound: c.error_bound.hypot(s.error_bound),
    })
}

/// High-precision `e_{q²}(ix)` rounded to `f64`, for arguments outside the reach of the
/// working-precision series. Precision is raised until two evaluations 64 bits apart
/// agree to `2^-60` relative; returns the value and its certified absolute error.
pub fn e_q2_imag_mp(x: f64, q: f64, digits: u32, max_digits: u32) -> Result<(Complex<f64>, f64)> {
    if !(0.0 < q && q < 1.0) || !x.is_finite() {
        return Err(Error::InvalidParameter(format!("bad arguments x={x}, q={q}")));
    }
    let mut ctx = mp::Ctx::from_digits(digits);
    let max_bits = mp::Ctx::from_digits(max_digits).bits;
    loop {
        let (c0, s0, _) = mp::trig_q2(x, q, ctx);
        let (c1, s1, _) = mp::trig_q2(x, q, ctx.wider(64));
        let v0 = Complex::new(mp::to_f64(&c0), mp::to_f64(&s0));
        let v1 = Complex::new(mp::to_f64(&c1), mp::to_f64(&s1));
        let diff = (v1 - v0).norm();
        if diff <= 2f64.powi(-60) * v1.norm() || v1.norm() < 2f64.powi(-1000) && diff < 2f64.powi(-1100) {
            return Ok((v1, diff + 2.0 * f64::EPSILON * v1.norm()));
        }
        if ctx.bits >= max_bits {
            return Err(Error::PrecisionEscalation {
                requested: 2f64.powi(-60),
                achievable: diff / v1.norm(),
                needed_digits: (ctx.digits() as f64 * 1.5) as u32,
            });
        }
        ctx = ctx.grown(max_bits);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: f64) -> QParam<f64> {
        QParam::new(v).unwrap()
    }

    #[test]
    fn trivial_values() {
        assert_eq!(cos_q2(0.0, q(0.5), 1e-14).unwrap().value, 1.0);
        assert_eq!(sin_q2(0.0, q(0.5), 1e-14).unwrap().value, 0.0);
        let e = e_q2_imag(0.0, q(0.5), 1e-14).unwrap().value;
        assert_eq!(e, Complex::new(1.0, 0.0));
    }

    #[test]
    fn small_argument_expansions() {
        let z = 1e-6;
        let c = cos_q2(z, q(0.5), 1e-14).unwrap().value;
        assert!((c - (1.0 - 0.25e-12 / 1.5)).abs() <= 1e-20);
        let s = sin_q2(z, q(0.5), 1e-14).unwrap().value;
        assert!((s - z).abs() <= 1e-18);
    }

    #[test]
    fn conjugate_symmetry_is_exact() {
        for &x in &[0.3, 1.0, 2.5, 7.0] {
            let a = e_q2_imag(x, q(0.5), 1e-12).unwrap().value;
            let b = e_q2_imag(-x, q(0.5), 1e-12).unwrap().value;
            assert_eq!(a, b.conj());
        }
    }

    #[test]
    fn large_argument_requests_escalation() {
        let r = cos_q2(4096.0, q(0.5), 1e-14);
        assert!(matches!(r, Err(Error::PrecisionEscalation { .. })), "{r:?}");
    }

    #[test]
    fn extra_terms_stay_within_bound() {
        let qq = q(0.5);
        for &x in &[0.5, 1.0, 3.0] {
            let loose = cos_q2(x, qq, 1e-10).unwrap();
            let tight = cos_q2(x, qq, 1e-14).unwrap();
            assert!(tight.terms >= loose.terms);
            assert!((loose.value - tight.value).abs() <= loose.error_bound + tight.error_bound);
        }
    }

    #[test]
    fn high_precision_matches_series_where_both_run() {
        for &x in &[0.25, 1.0, 4.0] {
            let direct = e_q2_imag(x, q(0.5), 1e-13).unwrap().value;
            let (hp, err) = e_q2_imag_mp(x, 0.5, 40, 400).unwrap();
            assert!((direct - hp).norm() < 1e-12, "x={x}");
            assert!(err < 1e-15);
        }
    }

    #[test]
    fn classical_limit_at_one() {
        let e = e_q2_imag(1.0, q(1.0 - 1e-3), 1e-13).unwrap().value;
        let exact = Complex::new(1f64.cos(), 1f64.sin());
        assert!((e - exact).norm() < 1e-2);
    }

    #[test]
    fn works_in_single_precision() {
        let c = cos_q2(1.0f32, QParam::new(0.5f32).unwrap(), 1e-6).unwrap();
        let d = cos_q2(1.0f64, q(0.5), 1e-14).unwrap();
        assert!((c.value as f64 - d.value).abs() < 1e-6);
    }
}
