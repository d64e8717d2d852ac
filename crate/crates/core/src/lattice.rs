//! The deformation parameter, the truncated signed geometric lattice and scalar
//! q-arithmetic: q-numbers, q-factorials, q-Pochhammer products, the q-gamma
//! function and the normalisation constant `π_q`.
//!
//! Lattice samples are stored in increasing index order `k = k_min..=k_max`, which is
//! decreasing order of the point `q^k`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{all_finite, czero, Real};

/// Deformation parameter, `0 < q < 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct QParam<T = f64>(T);

impl<T: Real> QParam<T> {
    pub fn new(q: T) -> Result<Self> {
        if q.is_finite() && q > T::zero() && q < T::one() {
            Ok(Self(q))
        } else {
            Err(Error::InvalidParameter(format!(
                "q must satisfy 0 < q < 1, got {q}"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> T {
        self.0
    }

    /// The base `q^2` used by the q²-gamma function inside `π_q`.
    pub fn squared(self) -> Self {
        Self(self.0 * self.0)
    }

    #[inline]
    pub fn powi(self, k: i64) -> T {
        pow_int(self.0, k)
    }

    /// `1 - q`.
    #[inline]
    pub fn one_minus(self) -> T {
        T::one() - self.0
    }
}

/// `q^k` for any integer `k`, by binary powering.
pub(crate) fn pow_int<T: Real>(q: T, k: i64) -> T {
    let mut base = if k < 0 { q.recip() } else { q };
    let mut e = k.unsigned_abs();
    let mut acc = T::one();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base;
        }
        base = base * base;
        e >>= 1;
    }
    acc
}

/// Which half of the signed lattice a sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Pos,
    #[serde(rename = "-")]
    Neg,
}

impl Sign {
    pub fn flip(self) -> Self {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Sign::Pos => '+',
            Sign::Neg => '-',
        }
    }

    pub fn factor<T: Real>(self) -> T {
        match self {
            Sign::Pos => T::one(),
            Sign::Neg => -T::one(),
        }
    }
}

/// Whether integrals run over the signed line or only over `(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    FullLine,
    HalfLine,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" | "full-line" => Ok(Mode::FullLine),
            "half" | "half-line" => Ok(Mode::HalfLine),
            other => Err(Error::InvalidParameter(format!(
                "mode must be full or half, got {other:?}"
            ))),
        }
    }
}

/// A truncated geometric lattice `{q^k : k_min <= k <= k_max}` (and its mirror image).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec<T = f64> {
    q: QParam<T>,
    k_min: i64,
    k_max: i64,
}

impl<T: Real> LatticeSpec<T> {
    pub fn new(q: QParam<T>, k_min: i64, k_max: i64) -> Result<Self> {
        if k_min > k_max {
            return Err(Error::InvalidParameter(format!(
                "k_min ({k_min}) must not exceed k_max ({k_max})"
            )));
        }
        Ok(Self { q, k_min, k_max })
    }

    pub fn q(&self) -> QParam<T> {
        self.q
    }

    pub fn k_min(&self) -> i64 {
        self.k_min
    }

    pub fn k_max(&self) -> i64 {
        self.k_max
    }

    pub fn len(&self) -> usize {
        (self.k_max - self.k_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        self.k_min..=self.k_max
    }

    pub fn contains(&self, k: i64) -> bool {
        (self.k_min..=self.k_max).contains(&k)
    }

    /// Storage slot of lattice index `k`.
    pub fn slot(&self, k: i64) -> Option<usize> {
        self.contains(k).then(|| (k - self.k_min) as usize)
    }

    #[inline]
    pub fn point(&self, k: i64) -> T {
        self.q.powi(k)
    }

    /// Jackson weight `(1 - q) q^k` of the lattice point `q^k`.
    #[inline]
    pub fn weight(&self, k: i64) -> T {
        self.q.one_minus() * self.q.powi(k)
    }

    pub fn weights(&self) -> Vec<T> {
        self.indices().map(|k| self.weight(k)).collect()
    }

    /// The same lattice with `n` indices removed at each end.
    pub fn shrink(&self, n: i64) -> Result<Self> {
        if self.k_max - self.k_min < 2 * n {
            return Err(Error::RangeTooSmall {
                needed: (2 * n + 1) as usize,
                have: self.len(),
            });
        }
        Ok(Self {
            q: self.q,
            k_min: self.k_min + n,
            k_max: self.k_max - n,
        })
    }

    /// True when `other` uses the same `q` and its index range lies inside this one.
    pub fn covers(&self, other: &Self) -> bool {
        self.q == other.q && self.k_min <= other.k_min && other.k_max <= self.k_max
    }

    pub fn with_range(&self, k_min: i64, k_max: i64) -> Result<Self> {
        Self::new(self.q, k_min, k_max)
    }
}

/// Lattice points `q^k` for `k = k_min..=k_max`, in that (decreasing-value) order.
pub fn lattice_points<T: Real>(spec: &LatticeSpec<T>) -> Vec<T> {
    spec.indices().map(|k| spec.point(k)).collect()
}

/// Common view of the two sample containers: a lattice and one value per signed point.
pub trait LatticeSamples<T: Real>: Clone {
    fn spec(&self) -> &LatticeSpec<T>;
    fn pos(&self) -> &[Complex<T>];
    fn neg(&self) -> &[Complex<T>];
    /// `a * self + b * other` on a common lattice.
    fn combine(&self, a: Complex<T>, other: &Self, b: Complex<T>) -> Result<Self>;
}

macro_rules! signed_samples {
    ($name:ident, $first:literal, $second:literal) => {
        impl<T: Real> LatticeSamples<T> for $name<T> {
            fn spec(&self) -> &LatticeSpec<T> {
                &self.spec
            }

            fn pos(&self) -> &[Complex<T>] {
                &self.pos
            }

            fn neg(&self) -> &[Complex<T>] {
                &self.neg
            }

            fn combine(&self, a: Complex<T>, other: &Self, b: Complex<T>) -> Result<Self> {
                $name::combine(self, a, other, b)
            }
        }

        impl<T: Real> $name<T> {
            pub fn new(
                spec: LatticeSpec<T>,
                pos: Vec<Complex<T>>,
                neg: Vec<Complex<T>>,
            ) -> Result<Self> {
                let n = spec.len();
                if pos.len() != n || neg.len() != n {
                    return Err(Error::LatticeMismatch(format!(
                        "expected {n} samples per sign, got {} and {}",
                        pos.len(),
                        neg.len()
                    )));
                }
                if !all_finite(&pos) || !all_finite(&neg) {
                    return Err(Error::NonFinite(stringify!($name).into()));
                }
                Ok(Self { spec, pos, neg })
            }

            pub fn zeros(spec: LatticeSpec<T>) -> Self {
                let n = spec.len();
                Self {
                    spec,
                    pos: vec![czero(); n],
                    neg: vec![czero(); n],
                }
            }

            pub fn spec(&self) -> &LatticeSpec<T> {
                &self.spec
            }

            #[doc = concat!("Samples at ", $first, ".")]
            pub fn pos(&self) -> &[Complex<T>] {
                &self.pos
            }

            #[doc = concat!("Samples at ", $second, ".")]
            pub fn neg(&self) -> &[Complex<T>] {
                &self.neg
            }

            pub fn channel(&self, sign: Sign) -> &[Complex<T>] {
                match sign {
                    Sign::Pos => &self.pos,
                    Sign::Neg => &self.neg,
                }
            }

            pub fn channel_mut(&mut self, sign: Sign) -> &mut [Complex<T>] {
                match sign {
                    Sign::Pos => &mut self.pos,
                    Sign::Neg => &mut self.neg,
                }
            }

            pub fn get(&self, k: i64, sign: Sign) -> Option<Complex<T>> {
                self.spec.slot(k).map(|i| self.channel(sign)[i])
            }

            pub fn into_parts(self) -> (LatticeSpec<T>, Vec<Complex<T>>, Vec<Complex<T>>) {
                (self.spec, self.pos, self.neg)
            }

            pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
                Self {
                    spec: self.spec,
                    pos: self.pos.iter().map(|&z| f(z)).collect(),
                    neg: self.neg.iter().map(|&z| f(z)).collect(),
                }
            }

            pub fn scale(&self, alpha: Complex<T>) -> Self {
                self.map(|z| z * alpha)
            }

            pub fn scale_real(&self, alpha: T) -> Self {
                self.map(|z| z * alpha)
            }

            pub fn conj(&self) -> Self {
                self.map(|z| z.conj())
            }

            /// `alpha * self + beta * other` on a common lattice.
            pub fn combine(&self, alpha: Complex<T>, other: &Self, beta: Complex<T>) -> Result<Self> {
                if self.spec != other.spec {
                    return Err(Error::LatticeMismatch(
                        "linear combination of samples on different lattices".into(),
                    ));
                }
                let lin = |a: &[Complex<T>], b: &[Complex<T>]| {
                    a.iter().zip(b).map(|(&x, &y)| x * alpha + y * beta).collect()
                };
                Ok(Self {
                    spec: self.spec,
                    pos: lin(&self.pos, &other.pos),
                    neg: lin(&self.neg, &other.neg),
                })
            }

            pub fn add(&self, other: &Self) -> Result<Self> {
                let one = Complex::new(T::one(), T::zero());
                self.combine(one, other, one)
            }

            pub fn sub(&self, other: &Self) -> Result<Self> {
                let one = Complex::new(T::one(), T::zero());
                self.combine(one, other, -one)
            }

            pub fn is_zero(&self) -> bool {
                self.pos.iter().chain(&self.neg).all(|z| z.re == T::zero() && z.im == T::zero())
            }

            /// Largest modulus over both channels.
            pub fn max_abs(&self) -> T {
                self.pos
                    .iter()
                    .chain(&self.neg)
                    .fold(T::zero(), |m, z| m.max(z.norm()))
            }

            pub fn max_abs_imag(&self) -> T {
                self.pos
                    .iter()
                    .chain(&self.neg)
                    .fold(T::zero(), |m, z| m.max(z.im.abs()))
            }

            /// Restriction to a sub-range of the lattice.
            pub fn restrict(&self, spec: &LatticeSpec<T>) -> Result<Self> {
                if !self.spec.covers(spec) {
                    return Err(Error::LatticeMismatch(format!(
                        "cannot restrict [{}, {}] to [{}, {}]",
                        self.spec.k_min(),
                        self.spec.k_max(),
                        spec.k_min(),
                        spec.k_max()
                    )));
                }
                let lo = (spec.k_min() - self.spec.k_min()) as usize;
                let hi = lo + spec.len();
                Ok(Self {
                    spec: *spec,
                    pos: self.pos[lo..hi].to_vec(),
                    neg: self.neg[lo..hi].to_vec(),
                })
            }

            /// Zero extension onto a wider lattice.
            pub fn extend_to(&self, spec: &LatticeSpec<T>) -> Result<Self> {
                if !spec.covers(&self.spec) {
                    return Err(Error::LatticeMismatch(format!(
                        "cannot extend [{}, {}] to [{}, {}]",
                        self.spec.k_min(),
                        self.spec.k_max(),
                        spec.k_min(),
                        spec.k_max()
                    )));
                }
                let mut out = Self::zeros(*spec);
                let lo = (self.spec.k_min() - spec.k_min()) as usize;
                out.pos[lo..lo + self.spec.len()].copy_from_slice(&self.pos);
                out.neg[lo..lo + self.spec.len()].copy_from_slice(&self.neg);
                Ok(out)
            }
        }
    };
}

/// Complex samples of a function at the points `+q^k` and `-q^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedLatticeFunction<T = f64> {
    spec: LatticeSpec<T>,
    pos: Vec<Complex<T>>,
    neg: Vec<Complex<T>>,
}

signed_samples!(SignedLatticeFunction, "`+q^k`", "`-q^k`");

impl<T: Real> SignedLatticeFunction<T> {
    /// Samples `f(±q^k)` of a pointwise-defined function.
    pub fn from_fn(spec: LatticeSpec<T>, f: impl Fn(T) -> Complex<T>) -> Result<Self> {
        let pos = spec.indices().map(|k| f(spec.point(k))).collect();
        let neg = spec.indices().map(|k| f(-spec.point(k))).collect();
        Self::new(spec, pos, neg)
    }

    pub fn from_real_fn(spec: LatticeSpec<T>, f: impl Fn(T) -> T) -> Result<Self> {
        Self::from_fn(spec, |x| Complex::new(f(x), T::zero()))
    }

    /// Unit mass at a single signed lattice point.
    pub fn indicator(spec: LatticeSpec<T>, k: i64, sign: Sign) -> Result<Self> {
        let slot = spec.slot(k).ok_or_else(|| {
            Error::InvalidParameter(format!("index {k} outside [{}, {}]", spec.k_min(), spec.k_max()))
        })?;
        let mut f = Self::zeros(spec);
        f.channel_mut(sign)[slot] = Complex::new(T::one(), T::zero());
        Ok(f)
    }

    /// Lattice point `±q^k` belonging to storage slot `i` of channel `sign`.
    pub fn point(&self, i: usize, sign: Sign) -> T {
        sign.factor::<T>() * self.spec.point(self.spec.k_min() + i as i64)
    }

    pub fn is_even(&self) -> bool {
        self.pos == self.neg
    }

    pub fn is_odd(&self) -> bool {
        self.pos.iter().zip(&self.neg).all(|(&a, &b)| a == -b)
    }
}

/// Complex samples of a q²-Fourier transform at the frequencies `+q^j` (`pos`) and
/// `-q^j` (`neg`). In half-line mode the negative channel is identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction<T = f64> {
    spec: LatticeSpec<T>,
    pos: Vec<Complex<T>>,
    neg: Vec<Complex<T>>,
}

signed_samples!(SpectralFunction, "`ξ = +q^j`", "`ξ = -q^j`");

impl<T: Real> SpectralFunction<T> {
    /// Spectrum supported on the positive frequencies only.
    pub fn positive(spec: LatticeSpec<T>, values: Vec<Complex<T>>) -> Result<Self> {
        let n = spec.len();
        Self::new(spec, values, vec![czero(); n])
    }

    pub fn from_fn(spec: LatticeSpec<T>, f: impl Fn(T) -> Complex<T>) -> Result<Self> {
        let pos = spec.indices().map(|j| f(spec.point(j))).collect();
        let neg = spec.indices().map(|j| f(-spec.point(j))).collect();
        Self::new(spec, pos, neg)
    }

    /// Frequency `|ξ| = q^j` of storage slot `i`.
    pub fn frequency(&self, i: usize) -> T {
        self.spec.point(self.spec.k_min() + i as i64)
    }

    /// Multiply every channel by a function of `|ξ|`.
    pub fn multiply_by(&self, mult: impl Fn(T) -> Complex<T>) -> Self {
        let factors: Vec<Complex<T>> = (0..self.spec.len()).map(|i| mult(self.frequency(i))).collect();
        Self {
            spec: self.spec,
            pos: self.pos.iter().zip(&factors).map(|(&z, &f)| z * f).collect(),
            neg: self.neg.iter().zip(&factors).map(|(&z, &f)| z * f).collect(),
        }
    }
}

/// `[α]_q = (1 - q^α) / (1 - q)`.
pub fn q_bracket<T: Real>(alpha: T, q: QParam<T>) -> T {
    let lnq = q.value().ln();
    // expm1 keeps both numerator and denominator accurate as q -> 1
    (alpha * lnq).exp_m1() / lnq.exp_m1()
}

/// `[n]_q! = [1]_q [2]_q ... [n]_q`, with `[0]_q! = 1`.
pub fn q_factorial<T: Real>(n: u32, q: QParam<T>) -> T {
    let mut bracket = T::zero();
    let mut acc = T::one();
    for _ in 0..n {
        bracket = T::one() + q.value() * bracket;
        acc = acc * bracket;
    }
    acc
}

/// Number of factors in a q-Pochhammer product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Count {
    Finite(u32),
    Infinite,
}

/// Value of a q-Pochhammer product together with its truncation bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pochhammer<T> {
    pub value: T,
    /// Number of factors actually multiplied.
    pub factors: u32,
    /// Bound on `|true / value - 1|` from the discarded factors (zero for finite products).
    pub tail_bound: T,
}

/// Default truncation threshold for infinite products.
pub const POCHHAMMER_EPS: f64 = 1e-30;

/// `(a; q)_n = prod_{k=0}^{n-1} (1 - a q^k)`; for `n = ∞` the product stops once
/// `|a q^k| < eps` and the relative size of the discarded tail is reported.
pub fn q_pochhammer<T: Real>(a: T, n: Count, q: QParam<T>, eps: T) -> Result<Pochhammer<T>> {
    let mut acc = T::one();
    let mut term = a;
    match n {
        Count::Finite(n) => {
            for _ in 0..n {
                acc = acc * (T::one() - term);
                term = term * q.value();
            }
            Ok(Pochhammer {
                value: acc,
                factors: n,
                tail_bound: T::zero(),
            })
        }
        Count::Infinite => {
            if !(a.abs() < T::one()) {
                return Err(Error::NonConvergentProduct(a.as_f64()));
            }
            if !(eps > T::zero()) {
                return Err(Error::InvalidParameter("eps must be positive".into()));
            }
            let mut factors = 0u32;
            while term.abs() >= eps {
                acc = acc * (T::one() - term);
                term = term * q.value();
                factors += 1;
            }
            let t = term.abs();
            let log_tail = t / (q.one_minus() * (T::one() - t));
            Ok(Pochhammer {
                value: acc,
                factors,
                tail_bound: log_tail.exp_m1(),
            })
        }
    }
}

/// `Γ_q(x) = (q;q)_∞ / (q^x;q)_∞ · (1-q)^{1-x}`.
///
/// The ratio of the two infinite products is accumulated factor by factor in the log
/// domain with compensated summation, so it stays finite even when both products
/// underflow (q close to 1).
pub fn q_gamma<T: Real>(x: T, q: QParam<T>) -> Result<T> {
    if !x.is_finite() {
        return Err(Error::NonFinite("q_gamma argument".into()));
    }
    if x <= T::zero() && x == x.round() {
        return Err(Error::GammaPole(x.as_f64()));
    }
    let qv = q.value();
    let qx = qv.powf(x);
    let eps = T::lit(POCHHAMMER_EPS);
    let mut sum = T::zero();
    let mut comp = T::zero();
    let mut negative = false;
    let mut qk = T::one();
    let scale = T::one().max(qx);
    loop {
        let num = (-(qk * qv)).ln_1p();
        let inner = T::one() - qk * qx;
        if inner < T::zero() {
            negative = !negative;
        }
        let den = if qk * qx < T::lit(0.5) {
            (-(qk * qx)).ln_1p()
        } else {
            inner.abs().ln()
        };
        let d = num - den;
        // Neumaier summation
        let t = sum + d;
        if sum.abs() >= d.abs() {
            comp = comp + ((sum - t) + d);
        } else {
            comp = comp + ((d - t) + sum);
        }
        sum = t;
        qk = qk * qv;
        if qk * scale < eps {
            break;
        }
    }
    let log_gamma = sum + comp + (T::one() - x) * q.one_minus().ln();
    let mag = log_gamma.exp();
    Ok(if negative { -mag } else { mag })
}

/// `π_q = Γ_{q²}(1/2) / (1 + q)^{1/2}`, so that `1/(2π_q)` is the transform prefactor.
pub fn pi_q<T: Real>(q: QParam<T>) -> T {
    let g = q_gamma(T::lit(0.5), q.squared()).expect("1/2 is not a pole");
    g / (T::one() + q.value()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: f64) -> QParam<f64> {
        QParam::new(v).unwrap()
    }

    #[test]
    fn qparam_rejects_out_of_range() {
        for bad in [0.0, 1.0, 1.2, -0.3, f64::NAN] {
            assert!(QParam::new(bad).is_err(), "{bad}");
        }
        assert!(QParam::new(0.5f32).is_ok());
    }

    #[test]
    fn bracket_values() {
        assert_eq!(q_bracket(0.0, q(0.3)), 0.0);
        assert!((q_bracket(1.0, q(0.3)) - 1.0).abs() < 1e-15);
        assert!((q_bracket(2.0, q(0.5)) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn bracket_classical_limit_is_linear() {
        let alpha = 2.5;
        let errs: Vec<f64> = [2, 3, 4, 5]
            .iter()
            .map(|&n| (q_bracket(alpha, q(1.0 - 10f64.powi(-n))) - alpha).abs())
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((9.0..11.0).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn factorial_values() {
        assert_eq!(q_factorial(0, q(0.7)), 1.0);
        assert_eq!(q_factorial(1, q(0.7)), 1.0);
        assert!((q_factorial(3, q(0.5)) - 2.625).abs() < 1e-15);
    }

    #[test]
    fn factorial_matches_bracket_fold() {
        for &qq in &[0.1, 0.5, 0.93] {
            for n in 0..25u32 {
                let fold = (1..=n).fold(1.0, |acc, i| acc * q_bracket(i as f64, q(qq)));
                let rel = (q_factorial(n, q(qq)) - fold).abs() / fold;
                assert!(rel < 1e-13, "q={qq} n={n} rel={rel}");
            }
        }
    }

    #[test]
    fn pochhammer_conventions() {
        let p = q_pochhammer(0.7, Count::Finite(0), q(0.5), 1e-30).unwrap();
        assert_eq!(p.value, 1.0);
        let p = q_pochhammer(0.0, Count::Finite(5), q(0.5), 1e-30).unwrap();
        assert_eq!(p.value, 1.0);
        assert!(matches!(
            q_pochhammer(1.0, Count::Infinite, q(0.5), 1e-30),
            Err(Error::NonConvergentProduct(_))
        ));
        let p = q_pochhammer(0.5, Count::Infinite, q(0.5), 1e-30).unwrap();
        assert!(p.tail_bound < 1e-29);
    }

    #[test]
    fn pochhammer_step_is_exact() {
        let qq = q(0.37);
        let a = 0.81;
        for n in 0..30u32 {
            let lo = q_pochhammer(a, Count::Finite(n), qq, 0.0).unwrap().value;
            let hi = q_pochhammer(a, Count::Finite(n + 1), qq, 0.0).unwrap().value;
            let mut qn = a;
            for _ in 0..n {
                qn *= qq.value();
            }
            assert_eq!(hi, lo * (1.0 - qn));
        }
    }

    #[test]
    fn gamma_special_values_and_poles() {
        for &qq in &[0.2, 0.5, 0.9] {
            assert!((q_gamma(1.0, q(qq)).unwrap() - 1.0).abs() < 1e-13);
            assert!((q_gamma(2.0, q(qq)).unwrap() - 1.0).abs() < 1e-13);
        }
        assert_eq!(q_gamma(0.0, q(0.5)), Err(Error::GammaPole(0.0)));
        assert_eq!(q_gamma(-3.0, q(0.5)), Err(Error::GammaPole(-3.0)));
    }

    #[test]
    fn gamma_functional_equation() {
        for &qq in &[0.3, 0.5, 0.9] {
            for &x in &[0.5, 1.5, 2.5, -0.5] {
                let lhs = q_gamma(x + 1.0, q(qq)).unwrap();
                let rhs = q_bracket(x, q(qq)) * q_gamma(x, q(qq)).unwrap();
                assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs(), "q={qq} x={x}");
            }
        }
    }

    #[test]
    fn pi_q_is_positive_and_tends_to_classical_value() {
        for &qq in &[0.1, 0.5, 0.9] {
            let p = pi_q(q(qq));
            assert!(p.is_finite() && p > 0.0);
        }
        let limit = (std::f64::consts::PI / 2.0).sqrt();
        assert!((pi_q(q(1.0 - 1e-4)) - limit).abs() < 1e-2);
    }

    #[test]
    fn lattice_points_order() {
        let s = LatticeSpec::new(q(0.5), -1, 1).unwrap();
        assert_eq!(lattice_points(&s), vec![2.0, 1.0, 0.5]);
        let s = LatticeSpec::new(q(0.5), 0, 0).unwrap();
        assert_eq!(lattice_points(&s), vec![1.0]);
        let s = LatticeSpec::new(q(0.5), 0, 3).unwrap();
        assert_eq!(lattice_points(&s), vec![1.0, 0.5, 0.25, 0.125]);
        assert!(LatticeSpec::new(q(0.5), 2, 1).is_err());
    }

    #[test]
    fn samples_validate_shape_and_finiteness() {
        let s = LatticeSpec::new(q(0.5), 0, 3).unwrap();
        let z = Complex::new(0.0, 0.0);
        assert!(SignedLatticeFunction::new(s, vec![z; 3], vec![z; 4]).is_err());
        assert!(SignedLatticeFunction::new(s, vec![Complex::new(f64::NAN, 0.0); 4], vec![z; 4]).is_err());
        let f = SignedLatticeFunction::from_real_fn(s, |x| x * x).unwrap();
        assert!(f.is_even());
        let g = SignedLatticeFunction::from_real_fn(s, |x| x * x * x).unwrap();
        assert!(g.is_odd());
        let r = f.restrict(&s.shrink(1).unwrap()).unwrap();
        assert_eq!(r.extend_to(&s).unwrap().get(1, Sign::Pos), f.get(1, Sign::Pos));
    }
}
