//! Exact rational oracles for the special functions and the kernel table.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use qspectral::special::{cos_q2, e_q2_imag, sin_q2};
use qspectral::{build_kernel_table, q_gamma, q_pochhammer, Count, LatticeSpec, QParam};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// `∏_{k<n} (1 - a q^k)`.
fn poch(a: &BigRational, q: &BigRational, n: usize) -> BigRational {
    let mut acc = BigRational::one();
    let mut t = a.clone();
    for _ in 0..n {
        acc *= BigRational::one() - &t;
        t *= q;
    }
    acc
}

/// `(cos_{q²}(x), sin_{q²}(x))` summed to `2·terms` terms.
fn trig(x: &BigRational, q: &BigRational, terms: usize) -> (BigRational, BigRational) {
    let (mut c, mut s) = (BigRational::zero(), BigRational::zero());
    let mut a = BigRational::one();
    let mut bracket = BigRational::zero();
    let mut qn = BigRational::one();
    for n in 0..2 * terms {
        if n > 0 {
            bracket = BigRational::one() + q * &bracket;
            qn *= q;
            a = &a * x / &bracket;
            if n % 2 == 0 {
                a *= &qn;
            }
        }
        let signed = if (n / 2) % 2 == 0 { a.clone() } else { -a.clone() };
        if n % 2 == 0 {
            c += signed;
        } else {
            s += signed;
        }
    }
    (c, s)
}

#[test]
fn infinite_pochhammer_half_half() {
    let exact = poch(&rat(1, 2), &rat(1, 2), 200).to_f64().unwrap();
    let got = q_pochhammer(0.5, Count::Infinite, QParam::new(0.5).unwrap(), 1e-30).unwrap();
    assert!(rel(got.value, exact) <= 1e-14, "{} vs {exact}", got.value);
    assert!(got.tail_bound <= 1e-29);
}

#[test]
fn finite_pochhammer_matches_rational_product() {
    let q = QParam::new(0.75).unwrap();
    for n in [0u32, 1, 5, 17] {
        let exact = poch(&rat(1, 3), &rat(3, 4), n as usize).to_f64().unwrap();
        let got = q_pochhammer(1.0 / 3.0, Count::Finite(n), q, 1e-30).unwrap().value;
        assert!(rel(got, exact) <= 1e-14, "n={n}");
    }
}

#[test]
fn q_gamma_quarter_at_half() {
    // Γ_q(x) = (q;q)_∞ / (q^x;q)_∞ (1-q)^{1-x} with q = 1/4, q^{1/2} = 1/2
    let q = rat(1, 4);
    let ratio = (poch(&q, &q, 120) / poch(&rat(1, 2), &q, 120)).to_f64().unwrap();
    let exact = ratio * 0.75f64.sqrt();
    let got = q_gamma(0.5, QParam::new(0.25).unwrap()).unwrap();
    assert!(rel(got, exact) <= 1e-13, "{got} vs {exact}");
}

#[test]
fn q_gamma_integer_values_are_q_factorials() {
    let q = QParam::new(0.6).unwrap();
    for n in 1..8u32 {
        let exact = qspectral::q_factorial(n - 1, q);
        assert!(rel(q_gamma(n as f64, q).unwrap(), exact) <= 1e-12, "n={n}");
    }
}

#[test]
fn trig_series_at_one() {
    let (c, s) = trig(&BigRational::one(), &rat(1, 2), 30);
    let q = QParam::new(0.5).unwrap();
    let got_c = cos_q2(1.0, q, 1e-15).unwrap().value;
    let got_s = sin_q2(1.0, q, 1e-15).unwrap().value;
    assert!((got_c - c.to_f64().unwrap()).abs() <= 1e-15);
    assert!((got_s - s.to_f64().unwrap()).abs() <= 1e-15);
}

#[test]
fn kernel_table_entries_at_large_arguments() {
    let q = QParam::new(0.5).unwrap();
    let spec = LatticeSpec::new(q, -6, 10).unwrap();
    let table = build_kernel_table(&spec, 1e-14).unwrap();
    for m in [-2i64, -6, -12] {
        let x = BigRational::from_integer(BigInt::from(1u64 << (-m)));
        let (c, s) = trig(&x, &rat(1, 2), 60);
        let got = table.get(m).unwrap();
        let err = table.error(m).unwrap();
        let dc = c.to_f64().unwrap();
        let ds = s.to_f64().unwrap();
        let diff = ((got.re - dc).powi(2) + (got.im - ds).powi(2)).sqrt();
        let mag = (dc * dc + ds * ds).sqrt();
        assert!(diff <= err.max(4.0 * f64::EPSILON * mag), "m={m}: diff {diff:e}, certified {err:e}");
        assert!(diff <= 1e-14 * mag.max(1e-300), "m={m}: rel {:e}", diff / mag);
        // exact rational check that the certified error is honest
        let gap = (c - BigRational::from_float(got.re).unwrap()).abs();
        assert!(gap.to_f64().unwrap() <= err, "m={m}");
    }
}

#[test]
fn series_is_exactly_conjugate_symmetric() {
    let q = QParam::new(0.5).unwrap();
    for x in [0.1, 0.7, 1.0, 1.9] {
        let a = e_q2_imag(x, q, 1e-14).unwrap().value;
        let b = e_q2_imag(-x, q, 1e-14).unwrap().value;
        assert_eq!(a, b.conj());
    }
}
