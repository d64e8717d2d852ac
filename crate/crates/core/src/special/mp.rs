//! Thin binary-precision layer over `astro-float` for the cancelling kernel chain.

use astro_float::{BigFloat, RoundingMode, Sign};

const RM: RoundingMode = RoundingMode::ToEven;

/// Working precision in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ctx {
    pub bits: usize,
}

impl Ctx {
    /// Precision holding at least `digits` decimal digits, rounded up to whole words.
    pub fn from_digits(digits: u32) -> Self {
        let bits = (digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + 1;
        Self {
            bits: bits.div_ceil(64).max(1) * 64,
        }
    }

    pub fn digits(&self) -> u32 {
        (self.bits as f64 / std::f64::consts::LOG2_10).floor() as u32
    }

    pub fn wider(&self, extra_bits: usize) -> Self {
        Self {
            bits: self.bits + extra_bits,
        }
    }

    /// Next rung of the escalation ladder: 1.5 times the bits, capped at `cap`.
    pub fn grown(&self, cap: usize) -> Self {
        Self {
            bits: ((self.bits * 3 / 2).div_ceil(64) * 64).min(cap.max(self.bits)),
        }
    }

    pub fn num(&self, v: f64) -> BigFloat {
        BigFloat::from_f64(v, self.bits)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.bits, RM)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.bits, RM)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.bits, RM)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.bits, RM)
    }
}

/// Multiply by `2^e` without intermediate overflow.
fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

/// Nearest `f64` (to within one unit in the last place).
pub fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let Some((words, _, sign, exp, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    let top = *words.last().expect("non-empty mantissa");
    // value = 0.m * 2^exp with the top word holding the leading 64 bits
    let mag = ldexp(top as f64, exp as i64 - 64);
    if sign == Sign::Neg {
        -mag
    } else {
        mag
    }
}

/// Base-2 logarithm of `|x|`, accurate to a few bits; `-inf` for zero.
pub fn log2_abs(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    match x.as_raw_parts() {
        Some((words, _, _, exp, _)) => {
            let top = *words.last().expect("non-empty mantissa") as f64;
            top.log2() - 64.0 + exp as f64
        }
        None => f64::NAN,
    }
}

/// `cos_{q²}(x)` and `sin_{q²}(x)` summed at precision `ctx`, with the base-2 logarithm of
/// the largest term. Summation stops once the remaining tail is below `2^-bits` of the
/// largest term, i.e. at the level of the working rounding error.
pub fn trig_q2(x: f64, q: f64, ctx: Ctx) -> (BigFloat, BigFloat, f64) {
    let one = ctx.num(1.0);
    let qb = ctx.num(q);
    let xb = ctx.num(x);
    let mut cos = ctx.num(1.0);
    let mut sin = ctx.num(0.0);
    let mut term = ctx.num(1.0);
    let mut bracket = ctx.num(0.0);
    let mut qn = ctx.num(1.0);
    let mut max_log2 = 0.0f64;
    let mut n: u64 = 0;
    loop {
        n += 1;
        bracket = ctx.add(&one, &ctx.mul(&qb, &bracket));
        qn = ctx.mul(&qn, &qb);
        term = ctx.div(&ctx.mul(&term, &xb), &bracket);
        if n % 2 == 0 {
            term = ctx.mul(&term, &qn);
        }
        let mag = log2_abs(&term);
        max_log2 = max_log2.max(mag);
        match n % 4 {
            0 => cos = ctx.add(&cos, &term),
            1 => sin = ctx.add(&sin, &term),
            2 => cos = ctx.sub(&cos, &term),
            _ => sin = ctx.sub(&sin, &term),
        }
        // past the peak the two-step ratio x² q^{n+1} / ([n+1][n+2]) is below 1/4; the
        // odd step can still grow by up to |x|, hence the extra margin
        let ratio = x * x * q.powi((n + 1) as i32);
        let margin = ctx.bits as f64 + 8.0 + x.abs().log2().max(0.0);
        if mag < max_log2 - margin && ratio < 0.25 || term.is_zero() {
            break;
        }
    }
    (cos, sin, max_log2)
}
