//! Closed-form first moments under the full Milburn map.
//!
//! Summing the Poisson-weighted branch phases `e^{±ikω/γ}` gives the two decay
//! kernels `e^{−γt(1−e^{±iω/γ})}`; every expectation value below is an affine
//! combination of them. These evaluators are the ground truth for the
//! numerical engine.

use crate::fock::{OscillatorParams, SqueezeParameter};
use crate::C64;

/// `plus = e^{−γt(1−e^{iω/γ})}`, `minus = e^{−γt(1−e^{−iω/γ})}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayKernel {
    pub plus: C64,
    pub minus: C64,
}

/// Evaluates both kernels at time `t ≥ 0`.
///
/// `1 − e^{ix}` is formed as `2 sin²(x/2) − i sin x`, which stays accurate for
/// `x = ω/γ → 0` (the unitary limit) where the naive difference cancels.
pub fn decay_kernel(params: &OscillatorParams, t: f64) -> DecayKernel {
    debug_assert!(t >= 0.0, "decay_kernel: negative time {t}");
    let x = params.omega() / params.gamma();
    let gt = params.gamma() * t;
    let half = (0.5 * x).sin();
    let log_modulus = -gt * 2.0 * half * half;
    let phase = gt * x.sin();
    let plus = C64::from_polar(log_modulus.exp(), phase);
    DecayKernel {
        plus,
        minus: plus.conj(),
    }
}

/// Decay rate of the oscillation envelope, `γ(1 − cos(ω/γ))`.
pub fn envelope_rate(params: &OscillatorParams) -> f64 {
    let half = (0.5 * params.omega() / params.gamma()).sin();
    2.0 * params.gamma() * half * half
}

/// Angular frequency of the damped oscillation, `γ sin(ω/γ)`.
pub fn oscillation_frequency(params: &OscillatorParams) -> f64 {
    params.gamma() * (params.omega() / params.gamma()).sin()
}

/// Real expectation value split into its time-dependent and constant parts.
///
/// `value = 2 Re(oscillating_part) + constant_part` whenever the initial
/// moments come from a physical state (`⟨a⟩ = ⟨a†⟩*`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormResult {
    pub value: f64,
    /// Coefficient of the `plus` kernel times the kernel.
    pub oscillating_part: C64,
    pub constant_part: f64,
    /// Imaginary part of the full sum before it was discarded.
    pub imag_residue: f64,
}

/// `⟨a†⟩` and `⟨a⟩` of the initial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstMoments {
    pub mean_adag: C64,
    pub mean_a: C64,
}

impl FirstMoments {
    pub fn coherent(alpha: C64) -> Self {
        Self {
            mean_adag: alpha.conj(),
            mean_a: alpha,
        }
    }

    /// Moments of `S(z)|α⟩` via `S†aS = μa − νa†`.
    pub fn squeezed(alpha: C64, z: &SqueezeParameter) -> Self {
        let (mu, nu) = (z.mu(), z.nu());
        Self {
            mean_adag: alpha.conj() * mu - nu.conj() * alpha,
            mean_a: alpha * mu - nu * alpha.conj(),
        }
    }

    /// `⟨a† + a⟩`
    pub fn quadrature(&self) -> f64 {
        (self.mean_adag + self.mean_a).re
    }
}

const RESIDUE_TOL: f64 = 1e-12;

fn combine(
    coeff_plus: C64,
    coeff_minus: C64,
    kernel: &DecayKernel,
    constant: f64,
) -> ClosedFormResult {
    let osc_plus = coeff_plus * kernel.plus;
    let sum = osc_plus + coeff_minus * kernel.minus;
    let scale = 1.0 + coeff_plus.norm() + coeff_minus.norm();
    debug_assert!(
        sum.im.abs() <= RESIDUE_TOL * scale,
        "closed form has imaginary residue {}",
        sum.im
    );
    ClosedFormResult {
        value: sum.re + constant,
        oscillating_part: osc_plus,
        constant_part: constant,
        imag_residue: sum.im,
    }
}

/// `⟨a† + a⟩(t)` for arbitrary initial first moments:
/// `(⟨a†⟩ + λ/ω)·plus + (⟨a⟩ + λ/ω)·minus − 2λ/ω`.
pub fn quad_general(moments: &FirstMoments, params: &OscillatorParams, t: f64) -> ClosedFormResult {
    let beta = params.displacement();
    let kernel = decay_kernel(params, t);
    combine(
        moments.mean_adag + beta,
        moments.mean_a + beta,
        &kernel,
        -2.0 * beta,
    )
}

/// `⟨a†a⟩(t)` given the initial first moments and initial mean photon
/// number:
/// `[n₀ + (λ/ω)⟨a†+a⟩ + 2λ²/ω²] − (λ/ω)[(⟨a†⟩ + λ/ω)·plus + (⟨a⟩ + λ/ω)·minus]`.
pub fn num_general(
    moments: &FirstMoments,
    mean_number: f64,
    params: &OscillatorParams,
    t: f64,
) -> ClosedFormResult {
    let beta = params.displacement();
    let kernel = decay_kernel(params, t);
    let constant = mean_number + beta * moments.quadrature() + 2.0 * beta * beta;
    combine(
        (moments.mean_adag + beta) * -beta,
        (moments.mean_a + beta) * -beta,
        &kernel,
        constant,
    )
}

pub fn quad_coherent(alpha: C64, params: &OscillatorParams, t: f64) -> ClosedFormResult {
    quad_general(&FirstMoments::coherent(alpha), params, t)
}

pub fn num_coherent(alpha: C64, params: &OscillatorParams, t: f64) -> ClosedFormResult {
    num_general(&FirstMoments::coherent(alpha), alpha.norm_sqr(), params, t)
}

pub fn quad_squeezed(
    alpha: C64,
    z: &SqueezeParameter,
    params: &OscillatorParams,
    t: f64,
) -> ClosedFormResult {
    quad_general(&FirstMoments::squeezed(alpha, z), params, t)
}

/// Initial `⟨a†a⟩` of `S(z)|α⟩`:
/// `(μ² + |ν|²)|α|² − μ(να*² + ν*α²) + |ν|²`.
pub fn squeezed_mean_number(alpha: C64, z: &SqueezeParameter) -> f64 {
    let (mu, nu) = (z.mu(), z.nu());
    let cross = nu * alpha.conj() * alpha.conj() + nu.conj() * alpha * alpha;
    (mu * mu + nu.norm_sqr()) * alpha.norm_sqr() - mu * cross.re + nu.norm_sqr()
}

pub fn num_squeezed(
    alpha: C64,
    z: &SqueezeParameter,
    params: &OscillatorParams,
    t: f64,
) -> ClosedFormResult {
    num_general(
        &FirstMoments::squeezed(alpha, z),
        squeezed_mean_number(alpha, z),
        params,
        t,
    )
}
