use std::sync::{Arc, OnceLock};

use num_complex::Complex;
use qspectral::quadrature::l2_norm_mode;
use qspectral::solvers::{discriminant_root, wave_coefficients, wave_spectral_at};
use qspectral::{
    calibrate, forward, solve_forced_wave, solve_heat, solve_wave, wave_kernels, Error, ForcedWaveProblem, Forcing,
    HeatProblem, LatticeSpec, Mode, QParam, Sign, SignedLatticeFunction, SpectralFunction, TimeGrid,
    TimeIndexedFamily, TimeProfile, TransformConfig, WaveProblem,
};

fn spec() -> LatticeSpec<f64> {
    LatticeSpec::new(QParam::new(0.5).unwrap(), -12, 40).unwrap()
}

fn cfg() -> &'static TransformConfig<f64> {
    static CFG: OnceLock<TransformConfig<f64>> = OnceLock::new();
    CFG.get_or_init(|| calibrate(spec(), Mode::FullLine).unwrap())
}

fn bump(center: f64) -> SignedLatticeFunction<f64> {
    SignedLatticeFunction::from_real_fn(spec(), move |x: f64| (-(x - center) * (x - center)).exp()).unwrap()
}

fn max_diff(a: &SpectralFunction<f64>, b: &SpectralFunction<f64>) -> f64 {
    [Sign::Pos, Sign::Neg]
        .iter()
        .flat_map(|&s| a.channel(s).iter().zip(b.channel(s)).map(|(x, y)| (x - y).norm()))
        .fold(0.0, f64::max)
}

fn constant(profile: SignedLatticeFunction<f64>) -> Forcing<f64> {
    Forcing::Separable {
        profile,
        time: TimeProfile::Constant,
    }
}

#[test]
fn homogeneous_heat_is_exact_multiplier() {
    let phi = bump(0.0);
    let p = HeatProblem::new(1.5, phi.clone(), Forcing::Zero, 1.0).unwrap();
    let grid = TimeGrid::uniform(1.0, 9).unwrap();
    let tr = solve_heat(&p, &grid, cfg(), 8).unwrap();
    let ph = forward(&phi, cfg()).unwrap();
    for (t, u) in grid.nodes().iter().zip(tr.spectral()) {
        let exact = ph.multiply_by(|xi| Complex::new((-t * (1.5 + xi * xi)).exp(), 0.0));
        assert!(max_diff(u, &exact) <= 1e-12 * ph.max_abs());
    }
    assert_eq!(tr.spectral()[0], ph);
}

#[test]
fn constant_forcing_heat_matches_antiderivative() {
    // the default 8 panels under-resolve the stiffest frequencies; see the README
    let g = bump(0.5);
    let p = HeatProblem::new(1.0, SignedLatticeFunction::zeros(spec()), constant(g.clone()), 1.0).unwrap();
    let grid = TimeGrid::uniform(1.0, 5).unwrap();
    let tr = solve_heat(&p, &grid, cfg(), 64).unwrap();
    let gh = forward(&g, cfg()).unwrap();
    for (&t, u) in grid.nodes().iter().zip(tr.spectral()).skip(1) {
        let exact = gh.multiply_by(|xi| {
            let l = 1.0 + xi * xi;
            Complex::new(-(-t * l).exp_m1() / l, 0.0)
        });
        let err = max_diff(u, &exact) / exact.max_abs();
        assert!(err <= 1e-10, "t={t}: {err:e}");
    }
}

#[test]
fn heat_superposition() {
    let grid = TimeGrid::uniform(1.0, 9).unwrap();
    let (p1, f1) = (bump(0.0), bump(1.0));
    let (p2, f2) = (bump(-0.5), bump(0.25));
    let cos = |g| Forcing::Separable {
        profile: g,
        time: TimeProfile::Cos(3.0),
    };
    let solve = |phi, f| solve_heat(&HeatProblem::new(2.0, phi, f, 1.0).unwrap(), &grid, cfg(), 8).unwrap();
    let a = solve(p1.clone(), cos(f1.clone()));
    let b = solve(p2.clone(), cos(f2.clone()));
    let ab = solve(p1.add(&p2).unwrap(), cos(f1.add(&f2).unwrap()));
    for i in 0..grid.len() {
        let sum = a.physical()[i].add(&b.physical()[i]).unwrap();
        let d = ab.physical()[i].sub(&sum).unwrap().max_abs();
        assert!(d <= 1e-12 * sum.max_abs().max(1.0), "node {i}: {d:e}");
    }
}

#[test]
fn heat_damping_bound() {
    let phi = bump(0.3);
    let p = HeatProblem::new(0.7, phi.clone(), Forcing::Zero, 2.0).unwrap();
    let grid = TimeGrid::uniform(2.0, 17).unwrap();
    let tr = solve_heat(&p, &grid, cfg(), 8).unwrap();
    let n0 = l2_norm_mode(&forward(&phi, cfg()).unwrap(), Mode::FullLine);
    for (&t, u) in grid.nodes().iter().zip(tr.spectral()) {
        assert!(l2_norm_mode(u, Mode::FullLine) <= (-t * 0.7).exp() * n0 * (1.0 + 1e-12));
    }
}

#[test]
fn callable_and_family_forcing_agree_with_separable() {
    let g = bump(0.5);
    let grid = TimeGrid::uniform(1.0, 9).unwrap();
    let sep = Forcing::Separable {
        profile: g.clone(),
        time: TimeProfile::ExpDecay(0.5),
    };
    let gc = g.clone();
    let call = Forcing::Callable(Arc::new(move |t: f64| gc.scale_real((-0.5 * t).exp())));
    let fine = TimeGrid::uniform(1.0, 2049).unwrap();
    let fam = TimeIndexedFamily::new(
        fine.clone(),
        fine.nodes().iter().map(|&t: &f64| g.scale_real((-0.5 * t).exp())).collect(),
    )
    .unwrap();
    let z = SignedLatticeFunction::zeros(spec());
    let run = |f| solve_heat(&HeatProblem::new(1.0, z.clone(), f, 1.0).unwrap(), &grid, cfg(), 8).unwrap();
    let a = run(sep);
    let b = run(call);
    let c = run(Forcing::Family(fam));
    let ie = c.provenance().forcing_interpolation_error.expect("family reports interpolation error");
    assert!(ie > 0.0 && ie < 1e-6, "{ie:e}");
    for i in 0..grid.len() {
        assert!(max_diff(&a.spectral()[i], &b.spectral()[i]) <= 1e-14);
        assert!(max_diff(&a.spectral()[i], &c.spectral()[i]) <= 1e-7);
    }
}

#[test]
fn wave_matches_real_form() {
    let (b, m) = (0.8, 1.5);
    let s = spec();
    let phi_hat = SpectralFunction::from_fn(s, |xi: f64| Complex::new((-xi.abs()).exp(), 0.3 * xi.sin())).unwrap();
    let psi_hat = SpectralFunction::from_fn(s, |xi: f64| Complex::new(1.0 / (1.0 + xi * xi), -0.2)).unwrap();
    let zero = SpectralFunction::zeros(s);
    let cp = wave_coefficients(b, m, &phi_hat, &zero).unwrap();
    let cs = wave_coefficients(b, m, &zero, &psi_hat).unwrap();
    for t in [0.0, 1e-9, 0.01, 0.37, 1.0, 3.0] {
        let up = wave_spectral_at(b, &cp, &phi_hat, &zero, t).unwrap();
        let us = wave_spectral_at(b, &cs, &zero, &psi_hat, t).unwrap();
        for i in 0..s.len() {
            let xi = up.frequency(i);
            let th = (4.0 * (m + xi * xi) - b * b).sqrt() / 2.0;
            let damp = (-b * t / 2.0).exp();
            let fp = damp * ((th * t).cos() + b / (2.0 * th) * (th * t).sin());
            let fs = damp * (th * t).sin() / th;
            for sg in [Sign::Pos, Sign::Neg] {
                let ep = phi_hat.channel(sg)[i] * fp;
                let es = psi_hat.channel(sg)[i] * fs;
                assert!((up.channel(sg)[i] - ep).norm() <= 1e-12 * phi_hat.channel(sg)[i].norm(), "phi xi={xi} t={t}");
                assert!((us.channel(sg)[i] - es).norm() <= 1e-12 * psi_hat.channel(sg)[i].norm(), "psi xi={xi} t={t}");
            }
        }
    }
    let g = &cp.g1.combine(Complex::new(1.0, 0.0), &cp.g2, Complex::new(1.0, 0.0)).unwrap();
    assert!(max_diff(g, &phi_hat) <= 1e-12);
}

#[test]
fn wave_omega_is_imaginary_with_positive_part() {
    for xi in [0.0, 1e-6, 1.0, 4096.0] {
        let w = discriminant_root(1.0, 2.0, xi);
        assert_eq!(w.re, 0.0);
        assert!(w.im > 0.0);
    }
}

#[test]
fn kernel_path_matches_spectral_path() {
    let (b, m, t) = (1.0, 2.0, 0.6);
    let phi = bump(0.0);
    let psi = SignedLatticeFunction::from_real_fn(spec(), |x: f64| x * (-x * x).exp()).unwrap();
    let p = WaveProblem::new(b, m, phi.clone(), psi.clone(), 1.0).unwrap();
    let tr = solve_wave(&p, &TimeGrid::new(vec![0.0, t]).unwrap(), cfg()).unwrap();
    let spectral = &tr.physical()[1];
    let kernels = wave_kernels(b, m, t, cfg()).unwrap();
    let kernel = kernels.apply(&phi, &psi).unwrap();
    let rel = l2_norm_mode(&kernel.sub(spectral).unwrap(), Mode::FullLine) / l2_norm_mode(spectral, Mode::FullLine);
    assert!(rel <= 1e-6, "{rel:e}");
}

#[test]
fn forced_wave_constant_forcing_closed_form() {
    let (b, m) = (1.0, 2.0);
    let g = bump(0.5);
    let p = ForcedWaveProblem::new(b, m, constant(g.clone()), 1.0).unwrap();
    let grid = TimeGrid::uniform(1.0, 5).unwrap();
    let tr = solve_forced_wave(&p, &grid, cfg(), 8).unwrap();
    let gh = forward(&g, cfg()).unwrap();
    for (&t, u) in grid.nodes().iter().zip(tr.spectral()).skip(1) {
        let exact = gh.multiply_by(|xi| {
            let w = discriminant_root(b, m, xi);
            let (r1, r2) = ((w - b) / 2.0, (-w - b) / 2.0);
            (((r1 * t).exp() - 1.0) / r1 - ((r2 * t).exp() - 1.0) / r2) / w
        });
        let err = max_diff(u, &exact) / exact.max_abs();
        assert!(err <= 1e-10, "t={t}: {err:e}");
    }
    assert!(tr.spectral()[0].is_zero());
}

#[test]
fn zero_forcing_gives_zero_wave() {
    let p = ForcedWaveProblem::new(1.0, 2.0, Forcing::Zero, 1.0).unwrap();
    let tr = solve_forced_wave(&p, &TimeGrid::uniform(1.0, 9).unwrap(), cfg(), 8).unwrap();
    assert!(tr.physical().iter().all(|u| u.is_zero()));
}

#[test]
fn constraints_are_reported_together() {
    let z = SignedLatticeFunction::zeros(spec());
    let e = HeatProblem::new(-1.0, z.clone(), Forcing::Zero, 0.0).unwrap_err();
    let Error::Constraint(msg) = e else { panic!("{e:?}") };
    assert!(msg.contains("m") && msg.contains("T"), "{msg}");
    let e = WaveProblem::new(3.0, 2.0, z.clone(), z.clone(), 1.0).unwrap_err();
    assert!(e.to_string().contains("b^2 < 4m"), "{e}");
    assert!(ForcedWaveProblem::new(2.0, 1.0, Forcing::Zero, 1.0).is_err());
}

#[test]
fn grid_beyond_horizon_is_rejected() {
    let p = HeatProblem::new(1.0, bump(0.0), Forcing::Zero, 1.0).unwrap();
    assert!(solve_heat(&p, &TimeGrid::uniform(2.0, 5).unwrap(), cfg(), 8).is_err());
}

#[test]
fn problem_hash_tracks_data() {
    let a = HeatProblem::new(1.0, bump(0.0), Forcing::Zero, 1.0).unwrap();
    let b = HeatProblem::new(1.0, bump(0.0), Forcing::Zero, 1.0).unwrap();
    let c = HeatProblem::new(1.0, bump(0.1), Forcing::Zero, 1.0).unwrap();
    assert_eq!(a.hash(), b.hash());
    assert_ne!(a.hash(), c.hash());
}
