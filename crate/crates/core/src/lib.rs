//! q-calculus on the geometric lattice `{±q^k}`.

pub mod error;
pub mod fourier;
pub mod io;
pub mod lattice;
pub mod quadrature;
pub mod rubin;
pub mod scalar;
pub mod solvers;
pub mod special;
pub mod verification;

pub use error::{Error, Result};
pub use lattice::{
    lattice_points, pi_q, q_bracket, q_factorial, q_gamma, q_pochhammer, Count, LatticeSpec, Mode, QParam,
    Sign, SignedLatticeFunction, SpectralFunction,
};
pub use fourier::{calibrate, forward, forward_structured, inverse, Calibration, TransformConfig};
pub use quadrature::{TimeGrid, TimeIndexedFamily};
pub use scalar::Real;
pub use solvers::{
    solve_forced_wave, solve_heat, solve_wave, wave_kernels, ForcedWaveProblem, Forcing, HeatProblem, ProblemKind,
    Provenance, SolutionTrajectory, SpectralCoefficients, TimeProfile, WaveKernels, WaveProblem,
};
pub use special::{build_kernel_table, build_kernel_table_with, KernelOptions, KernelTable};
pub use verification::{Check, VerificationReport};

pub type QParam64 = QParam<f64>;
pub type LatticeSpec64 = LatticeSpec<f64>;
pub type SignedLatticeFunction64 = SignedLatticeFunction<f64>;
pub type SpectralFunction64 = SpectralFunction<f64>;
pub type KernelTable64 = KernelTable<f64>;
pub type TransformConfig64 = TransformConfig<f64>;
pub type TimeGrid64 = TimeGrid<f64>;
pub type HeatProblem64 = HeatProblem<f64>;
pub type WaveProblem64 = WaveProblem<f64>;
pub type ForcedWaveProblem64 = ForcedWaveProblem<f64>;
pub type SolutionTrajectory64 = SolutionTrajectory<f64>;

pub type QParam32 = QParam<f32>;
pub type LatticeSpec32 = LatticeSpec<f32>;
pub type SignedLatticeFunction32 = SignedLatticeFunction<f32>;
pub type SpectralFunction32 = SpectralFunction<f32>;
pub type KernelTable32 = KernelTable<f32>;
pub type TransformConfig32 = TransformConfig<f32>;
pub type TimeGrid32 = TimeGrid<f32>;
pub type HeatProblem32 = HeatProblem<f32>;
pub type WaveProblem32 = WaveProblem<f32>;
pub type ForcedWaveProblem32 = ForcedWaveProblem<f32>;
pub type SolutionTrajectory32 = SolutionTrajectory<f32>;
