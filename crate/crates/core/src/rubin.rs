//! Rubin's five-point q-difference operator on signed lattice samples,
//!
//! ```text
//! D_q f(x) = [f(x/q) + f(-x/q) - f(qx) + f(-qx) - 2 f(-x)] / (2x(1-q)),
//! ```
//!
//! which reduces to `[f(x/q) - f(x)] / (x(1-q))` on even and to the Jackson derivative
//! `[f(x) - f(qx)] / (x(1-q))` on odd functions. Each application needs both neighbours
//! of a point, so the result lives on the lattice shrunk by one index at each end.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, SignedLatticeFunction};
use crate::scalar::Real;

#[inline]
fn stencil<T: Real>(
    up: Complex<T>,
    up_mirror: Complex<T>,
    down: Complex<T>,
    down_mirror: Complex<T>,
    mirror: Complex<T>,
    den: T,
) -> Complex<T> {
    (up + up_mirror - down + down_mirror - mirror * T::lit(2.0)) / den
}

/// `D_q f` at `±q^k` for `k` in `[k_min+1, k_max-1]`.
pub fn rubin_d<T: Real>(f: &SignedLatticeFunction<T>) -> Result<SignedLatticeFunction<T>> {
    let spec = f.spec();
    if spec.k_max() - spec.k_min() < 2 {
        return Err(Error::RangeTooSmall {
            needed: 3,
            have: spec.len(),
        });
    }
    let out_spec = spec.shrink(1)?;
    let (p, n) = (f.pos(), f.neg());
    let two_omq = T::lit(2.0) * spec.q().one_minus();
    let mut pos = Vec::with_capacity(out_spec.len());
    let mut neg = Vec::with_capacity(out_spec.len());
    for (i, k) in out_spec.indices().enumerate() {
        // slot i + 1 of the input holds index k; i and i + 2 are its outer and inner neighbours
        let den = two_omq * spec.point(k);
        pos.push(stencil(p[i], n[i], p[i + 2], n[i + 2], n[i + 1], den));
        neg.push(stencil(n[i], p[i], n[i + 2], p[i + 2], p[i + 1], -den));
    }
    SignedLatticeFunction::new(out_spec, pos, neg)
}

/// `D_q² f`, shrinking the range by two at each end.
pub fn rubin_d2<T: Real>(f: &SignedLatticeFunction<T>) -> Result<SignedLatticeFunction<T>> {
    let spec = f.spec();
    if spec.k_max() - spec.k_min() < 4 {
        return Err(Error::RangeTooSmall {
            needed: 5,
            have: spec.len(),
        });
    }
    rubin_d(&rubin_d(f)?)
}

/// The same stencil applied to an analytically known `f`, sampled one index beyond each
/// end of `spec` so the output covers the whole of `spec`.
pub fn rubin_d_callable<T: Real>(
    f: impl Fn(T) -> Complex<T>,
    spec: &LatticeSpec<T>,
) -> Result<SignedLatticeFunction<T>> {
    let wide = spec.with_range(spec.k_min() - 1, spec.k_max() + 1)?;
    rubin_d(&SignedLatticeFunction::from_fn(wide, f)?)
}

/// Absolute error bounds for a sample vector, one per signed point.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorBounds<T> {
    pub pos: Vec<T>,
    pub neg: Vec<T>,
}

impl<T: Real> ErrorBounds<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            pos: vec![T::zero(); n],
            neg: vec![T::zero(); n],
        }
    }
}

/// `D_q f` together with a bound on its error, given bounds on the input samples. The bound
/// covers the propagated input error and the rounding of the five-term sum.
pub fn rubin_d_with_error<T: Real>(
    f: &SignedLatticeFunction<T>,
    err: &ErrorBounds<T>,
) -> Result<(SignedLatticeFunction<T>, ErrorBounds<T>)> {
    let out = rubin_d(f)?;
    let spec = f.spec();
    let (p, n) = (f.pos(), f.neg());
    let two_omq = T::lit(2.0) * spec.q().one_minus();
    let u = T::epsilon();
    let mut bounds = ErrorBounds::zeros(out.spec().len());
    for (i, k) in out.spec().indices().enumerate() {
        let den = two_omq * spec.point(k);
        let e = |v: &[T], w: &[T]| v[i] + w[i] + v[i + 2] + w[i + 2];
        let a = |v: &[Complex<T>], w: &[Complex<T>]| v[i].norm() + w[i].norm() + v[i + 2].norm() + w[i + 2].norm();
        let two = T::lit(2.0);
        let prop_p = e(&err.pos, &err.neg) + two * err.neg[i + 1];
        let prop_n = e(&err.neg, &err.pos) + two * err.pos[i + 1];
        let mag_p = a(p, n) + two * n[i + 1].norm();
        let mag_n = a(n, p) + two * p[i + 1].norm();
        let four = T::lit(4.0);
        bounds.pos[i] = (prop_p + four * u * mag_p) / den + u * out.pos()[i].norm();
        bounds.neg[i] = (prop_n + four * u * mag_n) / den + u * out.neg()[i].norm();
    }
    Ok((out, bounds))
}

/// `D_q² f` with propagated error bounds.
pub fn rubin_d2_with_error<T: Real>(
    f: &SignedLatticeFunction<T>,
    err: &ErrorBounds<T>,
) -> Result<(SignedLatticeFunction<T>, ErrorBounds<T>)> {
    let (d1, e1) = rubin_d_with_error(f, err)?;
    rubin_d_with_error(&d1, &e1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::QParam;

    fn spec(q: f64, lo: i64, hi: i64) -> LatticeSpec<f64> {
        LatticeSpec::new(QParam::new(q).unwrap(), lo, hi).unwrap()
    }

    fn re(v: f64) -> Complex<f64> {
        Complex::new(v, 0.0)
    }

    #[test]
    fn constants_and_identity() {
        let s = spec(0.5, -5, 10);
        let c = SignedLatticeFunction::from_real_fn(s, |_| 3.25).unwrap();
        assert!(rubin_d(&c).unwrap().is_zero());
        assert!(rubin_d2(&c).unwrap().is_zero());
        let x = SignedLatticeFunction::from_real_fn(s, |x| x).unwrap();
        let d = rubin_d(&x).unwrap();
        assert!(d.pos().iter().chain(d.neg()).all(|v| (v - re(1.0)).norm() < 1e-14));
        assert!(rubin_d2(&x).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn even_and_odd_monomials() {
        let qq = 0.5;
        let s = spec(qq, -5, 10);
        let d = rubin_d_callable(|x| re(x * x), &s).unwrap();
        for i in 0..s.len() {
            let x = d.point(i, crate::lattice::Sign::Pos);
            let want = (1.0 + qq) / (qq * qq) * x;
            assert!((d.pos()[i].re - want).abs() <= 4e-15 * want.abs(), "{i}");
            assert!((d.neg()[i].re + want).abs() <= 4e-15 * want.abs());
        }
        let d = rubin_d_callable(|x| re(x * x * x), &s).unwrap();
        let b3 = 1.0 + qq + qq * qq;
        for i in 0..s.len() {
            let x = d.point(i, crate::lattice::Sign::Pos);
            assert!((d.pos()[i].re - b3 * x * x).abs() <= 1e-14 * x * x);
        }
    }

    #[test]
    fn range_checks() {
        let s = spec(0.5, 0, 1);
        let f = SignedLatticeFunction::zeros(s);
        assert!(matches!(rubin_d(&f), Err(Error::RangeTooSmall { .. })));
        let s = spec(0.5, 0, 3);
        assert!(rubin_d(&SignedLatticeFunction::zeros(s)).is_ok());
        assert!(rubin_d2(&SignedLatticeFunction::zeros(s)).is_err());
        let out = rubin_d2(&SignedLatticeFunction::zeros(spec(0.5, 0, 4))).unwrap();
        assert_eq!((out.spec().k_min(), out.spec().k_max()), (2, 2));
    }

    #[test]
    fn both_stencil_arrangements_agree() {
        let s = spec(0.7, -3, 6);
        let f = |x: f64| Complex::new((x - 0.3).exp(), x.sin());
        let d = rubin_d_callable(f, &s).unwrap();
        let qq: f64 = 0.7;
        for (i, k) in s.indices().enumerate() {
            let x = qq.powi(k as i32);
            let alt = (f(x / qq) - f(qq * x) + f(-qq * x) - f(-x) + f(-x / qq) - f(-x)) / (2.0 * x * (1.0 - qq));
            assert!((d.pos()[i] - alt).norm() <= 1e-13 * alt.norm().max(1.0));
        }
    }

    #[test]
    fn error_bound_covers_perturbation() {
        let s = spec(0.5, -4, 12);
        let f = SignedLatticeFunction::from_real_fn(s, |x| (-x * x).exp()).unwrap();
        let delta = 1e-9;
        let g = f.map(|v| v + re(delta));
        let err = ErrorBounds {
            pos: vec![delta; s.len()],
            neg: vec![delta; s.len()],
        };
        let (df, bound) = rubin_d2_with_error(&f, &err).unwrap();
        let dg = rubin_d2(&g).unwrap();
        for i in 0..df.spec().len() {
            assert!((df.pos()[i] - dg.pos()[i]).norm() <= bound.pos[i]);
        }
    }
}
