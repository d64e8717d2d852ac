//! Jackson q-integrals, the weighted lattice norms, time grids and the classical time
//! quadrature used by the Duhamel integrals.

use std::ops::{Add, Mul};

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lattice::{LatticeSamples, LatticeSpec, Mode, QParam};
use crate::scalar::{czero, Real};

/// A Jackson sum together with the magnitudes of its outermost retained terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacksonSum<T> {
    pub value: Complex<T>,
    /// Weighted term at the large-argument end (`k_min`, or `k = 0` for `[0, x]`).
    pub head: T,
    /// Weighted term at the small-argument end (`k_max`, or `k = K`).
    pub tail: T,
}

/// `∫_0^x f d_q t = (1-q) x Σ_{k=0}^{K} q^k f(q^k x)`.
pub fn jackson_integral_finite<T: Real>(
    f: impl Fn(T) -> Complex<T>,
    x: T,
    q: QParam<T>,
    depth: usize,
) -> Result<JacksonSum<T>> {
    if !(x > T::zero()) {
        return Err(Error::InvalidParameter(format!("upper limit must be positive, got {x}")));
    }
    let w0 = q.one_minus() * x;
    let mut qk = T::one();
    let mut acc = czero::<T>();
    let (mut head, mut tail) = (T::zero(), T::zero());
    for k in 0..=depth {
        let v = f(qk * x);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite(format!("integrand at q^{k} x")));
        }
        let term = v * (w0 * qk);
        if k == 0 {
            head = term.norm();
        }
        tail = term.norm();
        acc = acc + term;
        qk = qk * q.value();
    }
    Ok(JacksonSum {
        value: acc,
        head,
        tail,
    })
}

/// `∫_0^∞ f d_q x = (1-q) Σ_k q^k f(q^k)`, truncated to the lattice window.
pub fn jackson_integral_improper<T: Real, S: LatticeSamples<T>>(f: &S) -> JacksonSum<T> {
    jackson_sum(f.spec(), f.pos())
}

/// Signed-line version: `∫_{-∞}^{∞} f d_q x`, the sum over both halves of the lattice.
pub fn jackson_integral_signed<T: Real, S: LatticeSamples<T>>(f: &S) -> JacksonSum<T> {
    let a = jackson_sum(f.spec(), f.pos());
    let b = jackson_sum(f.spec(), f.neg());
    JacksonSum {
        value: a.value + b.value,
        head: a.head.max(b.head),
        tail: a.tail.max(b.tail),
    }
}

/// Improper integral of a pointwise-defined function over the window of `spec`.
pub fn jackson_integral_improper_fn<T: Real>(f: impl Fn(T) -> Complex<T>, spec: &LatticeSpec<T>) -> Result<JacksonSum<T>> {
    let vals: Vec<Complex<T>> = spec.indices().map(|k| f(spec.point(k))).collect();
    if vals.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::NonFinite("improper integrand".into()));
    }
    Ok(jackson_sum(spec, &vals))
}

fn jackson_sum<T: Real>(spec: &LatticeSpec<T>, vals: &[Complex<T>]) -> JacksonSum<T> {
    let mut acc = czero::<T>();
    for (k, v) in spec.indices().zip(vals) {
        acc = acc + v * spec.weight(k);
    }
    let n = vals.len();
    JacksonSum {
        value: acc,
        head: (vals[0] * spec.weight(spec.k_min())).norm(),
        tail: (vals[n - 1] * spec.weight(spec.k_max())).norm(),
    }
}

/// `Σ_k (1-q) q^k w(q^k) |f|²` over the positive half, plus the negative half in full-line mode.
pub fn weighted_square_sum<T: Real, S: LatticeSamples<T>>(f: &S, mode: Mode, weight: impl Fn(T) -> T) -> T {
    let spec = f.spec();
    let mut acc = T::zero();
    for (i, k) in spec.indices().enumerate() {
        let mut sq = f.pos()[i].norm_sqr();
        if mode == Mode::FullLine {
            sq = sq + f.neg()[i].norm_sqr();
        }
        acc = acc + spec.weight(k) * weight(spec.point(k)) * sq;
    }
    acc
}

/// `‖f‖_{L²_q} = (Σ_k (1-q) q^k |f(q^k)|²)^{1/2}` over the positive lattice.
pub fn l2_norm<T: Real, S: LatticeSamples<T>>(f: &S) -> T {
    weighted_square_sum(f, Mode::HalfLine, |_| T::one()).sqrt()
}

/// L²_q norm over the positive lattice (half-line) or over both signs (full-line).
pub fn l2_norm_mode<T: Real, S: LatticeSamples<T>>(f: &S, mode: Mode) -> T {
    weighted_square_sum(f, mode, |_| T::one()).sqrt()
}

/// `‖u‖_{W^s_q} = (∫_0^∞ (1+ξ²)^s |û(ξ)|² d_qξ)^{1/2}` from spectral samples.
pub fn sobolev_norm<T: Real, S: LatticeSamples<T>>(u_hat: &S, s: T) -> T {
    sobolev_norm_mode(u_hat, s, Mode::HalfLine)
}

pub fn sobolev_norm_mode<T: Real, S: LatticeSamples<T>>(u_hat: &S, s: T, mode: Mode) -> T {
    weighted_square_sum(u_hat, mode, |xi| (T::one() + xi * xi).powf(s)).sqrt()
}

/// Strictly increasing time nodes from `0` to `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid<T = f64> {
    nodes: Vec<T>,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(nodes: Vec<T>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Grid("need at least the two endpoints".into()));
        }
        if nodes[0] != T::zero() {
            return Err(Error::Grid(format!("first node must be 0, got {}", nodes[0])));
        }
        if !nodes.iter().all(|t| t.is_finite()) || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Grid("nodes must be finite and strictly increasing".into()));
        }
        Ok(Self { nodes })
    }

    /// `n` equally spaced nodes on `[0, T]`.
    pub fn uniform(t_final: T, n: usize) -> Result<Self> {
        if !(t_final > T::zero()) || !t_final.is_finite() {
            return Err(Error::Grid(format!("horizon must be positive, got {t_final}")));
        }
        if n < 2 {
            return Err(Error::Grid(format!("need at least 2 nodes, got {n}")));
        }
        let last = T::of_int(n as i64 - 1);
        let mut nodes: Vec<T> = (0..n).map(|i| t_final * T::of_int(i as i64) / last).collect();
        nodes[n - 1] = t_final;
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn horizon(&self) -> T {
        self.nodes[self.nodes.len() - 1]
    }

    /// Common spacing when the grid is uniform to a few ulps.
    pub fn uniform_step(&self) -> Option<T> {
        let h = self.horizon() / T::of_int(self.len() as i64 - 1);
        let tol = T::lit(64.0) * T::epsilon() * self.horizon();
        self.nodes
            .iter()
            .enumerate()
            .all(|(i, &t)| (t - h * T::of_int(i as i64)).abs() <= tol)
            .then_some(h)
    }

    /// Every `stride`-th node, which must land on the last one.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        if stride == 0 || (self.len() - 1) % stride != 0 || (self.len() - 1) / stride < 1 {
            return Err(Error::Grid(format!(
                "cannot take every {stride}th node of {} nodes",
                self.len()
            )));
        }
        Self::new(self.nodes.iter().step_by(stride).cloned().collect())
    }
}

/// One lattice sample per node of a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeIndexedFamily<S, T = f64> {
    grid: TimeGrid<T>,
    samples: Vec<S>,
}

impl<T: Real, S: LatticeSamples<T>> TimeIndexedFamily<S, T> {
    pub fn new(grid: TimeGrid<T>, samples: Vec<S>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::Grid(format!(
                "{} samples for {} nodes",
                samples.len(),
                grid.len()
            )));
        }
        if samples.windows(2).any(|w| w[0].spec() != w[1].spec()) {
            return Err(Error::LatticeMismatch("family samples on different lattices".into()));
        }
        Ok(Self { grid, samples })
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn samples(&self) -> &[S] {
        &self.samples
    }

    pub fn spec(&self) -> &LatticeSpec<T> {
        self.samples[0].spec()
    }

    /// Second-order finite-difference time derivative (three-point Lagrange stencils,
    /// one-sided at the ends).
    pub fn time_derivative(&self) -> Result<Self> {
        let t = self.grid.nodes();
        let n = t.len();
        if n < 3 {
            return Err(Error::Grid("finite differences need at least 3 nodes".into()));
        }
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b, c) = match i {
                0 => (0, 1, 2),
                i if i == n - 1 => (n - 3, n - 2, n - 1),
                i => (i - 1, i, i + 1),
            };
            let (ta, tb, tc) = (t[a], t[b], t[c]);
            let x = t[i];
            // derivative of the quadratic through (ta, tb, tc) evaluated at x
            let wa = ((x - tb) + (x - tc)) / ((ta - tb) * (ta - tc));
            let wb = ((x - ta) + (x - tc)) / ((tb - ta) * (tb - tc));
            let wc = ((x - ta) + (x - tb)) / ((tc - ta) * (tc - tb));
            let re = |w: T| Complex::new(w, T::zero());
            let s = self.samples[a].combine(re(wa), &self.samples[b], re(wb))?;
            let one = re(T::one());
            out.push(s.combine(one, &self.samples[c], re(wc))?);
        }
        Self::new(self.grid.clone(), out)
    }
}

/// `Σ_{n=0}^{k} max_t ‖∂_t^n u(t)‖`. Derivative families may be supplied (index `n-1` holds
/// the n-th derivative); missing ones are finite-differenced from the previous order.
pub fn ck_norm<T: Real, S: LatticeSamples<T>>(
    u: &TimeIndexedFamily<S, T>,
    derivatives: &[TimeIndexedFamily<S, T>],
    k: usize,
    space_norm: impl Fn(&S) -> T,
) -> Result<T> {
    if derivatives.len() < k && u.grid().len() < 3 {
        return Err(Error::Grid(format!(
            "order {k} needs at least 3 nodes for finite differences, have {}",
            u.grid().len()
        )));
    }
    let max_norm = |f: &TimeIndexedFamily<S, T>| f.samples().iter().fold(T::zero(), |m, s| m.max(space_norm(s)));
    let mut total = max_norm(u);
    let mut current = u.clone();
    for n in 1..=k {
        current = match derivatives.get(n - 1) {
            Some(d) => d.clone(),
            None => current.time_derivative()?,
        };
        total = total + max_norm(&current);
    }
    Ok(total)
}

const GL4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_8,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_8,
];

/// Nodes and weights of composite 4-point Gauss–Legendre on `[0, t]` with `panels` panels.
pub fn time_quadrature_nodes<T: Real>(t: T, panels: usize) -> Result<Vec<(T, T)>> {
    if panels == 0 {
        return Err(Error::InvalidParameter("need at least one quadrature panel".into()));
    }
    let h = t / T::of_int(panels as i64);
    let half = h / T::lit(2.0);
    let mut out = Vec::with_capacity(4 * panels);
    for p in 0..panels {
        let mid = h * T::of_int(p as i64) + half;
        for (x, w) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
            out.push((mid + half * T::lit(*x), half * T::lit(w)));
        }
    }
    Ok(out)
}

/// `∫_0^t g(τ) dτ` by composite 4-point Gauss–Legendre (exact for degree-7 polynomials;
/// the error falls by 2^8 per halving of the panel width on smooth integrands).
pub fn time_quadrature<T, V>(g: impl Fn(T) -> V, t: T, panels: usize) -> Result<V>
where
    T: Real,
    V: Copy + Zero + Add<Output = V> + Mul<T, Output = V>,
{
    let mut acc = V::zero();
    for (tau, w) in time_quadrature_nodes(t, panels)? {
        acc = acc + g(tau) * w;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Sign, SignedLatticeFunction, SpectralFunction};

    fn q(v: f64) -> QParam<f64> {
        QParam::new(v).unwrap()
    }

    fn c(v: f64) -> Complex<f64> {
        Complex::new(v, 0.0)
    }

    #[test]
    fn finite_jackson_integrals() {
        let qq = q(0.5);
        let r = jackson_integral_finite(|_| c(1.0), 1.0, qq, 10).unwrap();
        assert!((r.value.re - (1.0 - 0.5f64.powi(11))).abs() < 1e-15);
        let r = jackson_integral_finite(c, 1.0, qq, 200).unwrap();
        assert!((r.value.re - 1.0 / 1.5).abs() < 1e-15);
        let r = jackson_integral_finite(|t| c(t * t), 1.0, qq, 200).unwrap();
        assert!((r.value.re - 1.0 / 1.75).abs() < 1e-15);
        assert!(jackson_integral_finite(|_| c(f64::NAN), 1.0, qq, 3).is_err());
    }

    #[test]
    fn improper_single_points() {
        let s = LatticeSpec::new(q(0.5), -4, 8).unwrap();
        let f = SignedLatticeFunction::indicator(s, 0, Sign::Pos).unwrap();
        assert!((jackson_integral_improper(&f).value.re - 0.5).abs() < 1e-16);
        let f = SignedLatticeFunction::indicator(s, 3, Sign::Pos).unwrap();
        assert!((jackson_integral_improper(&f).value.re - 0.0625).abs() < 1e-16);
    }

    #[test]
    fn norms_of_indicators() {
        let s = LatticeSpec::new(q(0.5), -4, 8).unwrap();
        let f = SignedLatticeFunction::indicator(s, 2, Sign::Pos).unwrap();
        assert!((l2_norm(&f) - (0.5f64 * 0.25).sqrt()).abs() < 1e-16);
        assert_eq!(l2_norm(&SignedLatticeFunction::zeros(s)), 0.0);
        let g = SpectralFunction::positive(s, (0..13).map(|i| c((i == 4) as i32 as f64)).collect()).unwrap();
        for sv in [0.0, 1.0, 2.0] {
            assert!((sobolev_norm(&g, sv) - (2f64.powf(sv) * 0.5).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn time_quadrature_examples() {
        assert!((time_quadrature(|_: f64| 1.0f64, 1.0, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!((time_quadrature(|t: f64| t, 1.0, 1).unwrap() - 0.5).abs() < 1e-15);
        let v = time_quadrature(|t: f64| (-t).exp(), 1.0, 4).unwrap();
        assert!((v - (1.0 - (-1f64).exp())).abs() < 1e-12);
        let z = time_quadrature(|t: f64| Complex::new(t.cos(), t.sin()), 2.0, 8).unwrap();
        assert!((z - Complex::new(2f64.sin(), 1.0 - 2f64.cos())).norm() < 1e-12);
    }

    #[test]
    fn time_quadrature_halving_order() {
        let exact = 3f64.sin();
        let g = |t: f64| t.cos();
        let e1 = (time_quadrature(g, 3.0, 1).unwrap() - exact).abs();
        let e2 = (time_quadrature(g, 3.0, 2).unwrap() - exact).abs();
        let e3 = (time_quadrature(g, 3.0, 4).unwrap() - exact).abs();
        assert!(e1 / e2 >= 64.0 && e2 / e3 >= 64.0, "{e1} {e2} {e3}");
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(vec![0.0, 0.5, 0.5, 1.0]).is_err());
        assert!(TimeGrid::new(vec![0.1, 1.0]).is_err());
        let g = TimeGrid::uniform(1.0, 65).unwrap();
        assert_eq!(g.nodes()[64], 1.0);
        assert!(g.uniform_step().is_some());
        assert_eq!(g.subsample(2).unwrap().len(), 33);
        assert!(g.subsample(3).is_err());
        assert!(TimeGrid::<f64>::uniform(0.0, 5).is_err());
    }

    #[test]
    fn ck_norm_examples() {
        let s = LatticeSpec::new(q(0.5), -4, 8).unwrap();
        let g = SpectralFunction::from_fn(s, |xi| c((-xi * xi).exp())).unwrap();
        let grid = TimeGrid::uniform(2.0, 9).unwrap();
        let norm = |f: &SpectralFunction<f64>| l2_norm(f);
        let constant = TimeIndexedFamily::new(grid.clone(), vec![g.clone(); 9]).unwrap();
        let g_norm = l2_norm(&g);
        assert!((ck_norm(&constant, &[], 0, norm).unwrap() - g_norm).abs() < 1e-15);
        assert!((ck_norm(&constant, &[], 1, norm).unwrap() - g_norm).abs() < 1e-13);
        let linear: Vec<_> = grid.nodes().iter().map(|&t| g.scale_real(t)).collect();
        let fam = TimeIndexedFamily::new(grid.clone(), linear).unwrap();
        let v = ck_norm(&fam, &[], 1, norm).unwrap();
        assert!((v - 3.0 * g_norm).abs() < 1e-12);
        let two = TimeIndexedFamily::new(TimeGrid::uniform(1.0, 2).unwrap(), vec![g.clone(); 2]).unwrap();
        assert!(ck_norm(&two, &[], 1, norm).is_err());
    }
}
