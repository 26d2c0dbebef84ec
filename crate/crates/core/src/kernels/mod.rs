//! Radial wave kernels `h_j = (e^{-i|ξ|} ψ(2^{-j}|ξ|))^∨` and the
//! supporting special functions and quadrature.

pub mod bessel;
pub mod probes;
pub mod quadrature;
pub mod radial;

pub use bessel::{bessel_j, radial_bessel_kernel};
pub use probes::{l1_scaling_probe, ProbeVariant, ScalingReport};
pub use radial::{
    certify_plateau, certify_plateau_with_phase, envelope_fit, kernel_lp_norms, plateau_constant, plateau_phase,
    radial_wave_kernel, EnvelopeReport, KernelNorms, KernelProfile, PlateauCertificate,
};
