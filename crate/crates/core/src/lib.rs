//! Green's functions of the Helmholtz equation in weakly turbulent media.
//!
//! The library evaluates free-space and paraxial kernels, first-order Rytov
//! perturbations over sampled white-noise index fields, and their ensemble means,
//! and applies them to time-reversal refocusing and to the pupil apodization
//! eigenproblem. Everything is generic over the scalar type ([`Real`]: `f32` or
//! `f64`); the `*64` aliases fix `f64`. Dense eigensolves run in `f64`.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod apodization;
pub mod error;
pub mod geometry;
pub mod greens;
pub mod montecarlo;
pub mod quadrature;
pub mod rng;
pub mod rytov;
pub mod scalar;
pub mod time_reversal;
pub mod turbulence;
pub mod wave;

pub use apodization::{
    build_ks, cross_term_diagnostic, energy_ratio, image_amplitude, solve_alpha, solve_concentration, ApodizationProblem,
    EigenResult, KernelForm, KernelMatrix, Normalization, Parity, Propagation, PupilAmplitude, SlabTurbulence,
};
pub use error::{Error, Result};
pub use geometry::{ParaxialCoords, Point3, TransversePoint};
pub use greens::{g0, gp, helmholtz_residual, kernel_k, kernel_kprime, paraxial_residual, radiation_defect, GreensSample};
pub use montecarlo::{mc_mean, mc_mean_vec, McEstimate, MonteCarloSpec};
pub use quadrature::{build_grid, integrate, integrate_nodes, DiskGrid, Integral, Interval, Node, QuadratureGrid, QuadratureRule};
pub use rytov::{
    beam_field, mean_turbulent_green, parabolic_turbulent_green, phi1_full, phi1_parabolic, reciprocity_defect,
    turbulent_green, BackgroundField, BackgroundKind, Convention, FreeSpace, FrozenMedium, GreenEvaluator,
    LogPerturbation, RatioKernel, TurbulentGreens,
};
pub use scalar::Real;
pub use time_reversal::{
    backpropagate, mc_refocus, mean_refocus, mirror_field, point_point_mean_intensity, spot_fwhm, MirrorSpec,
    RefocusResult, SourceField,
};
pub use turbulence::{
    cn_from_ct, delta_n_from_delta_t, refractivity, rytov_validity, sample_field, AtmosphericState, CnProfile,
    RefractiveFieldRealization, RytovValidity, TurbulenceSpec,
};
pub use wave::WaveParams;

pub use num_complex::Complex;

pub type Point3d = Point3<f64>;
pub type TransversePoint64 = TransversePoint<f64>;
pub type ParaxialCoords64 = ParaxialCoords<f64>;
pub type WaveParams64 = WaveParams<f64>;
pub type QuadratureGrid64 = QuadratureGrid<f64>;
pub type DiskGrid64 = DiskGrid<f64>;
pub type TurbulenceSpec64 = TurbulenceSpec<f64>;
pub type FieldRealization64 = RefractiveFieldRealization<f64>;
pub type CnProfile64 = CnProfile<f64>;
pub type Complex64 = Complex<f64>;
