//! Truncated Fock-space representation of the displaced oscillator.
//!
//! Levels `0..N-1` are kept. Operators are dense `N×N` complex matrices; the
//! truncation corrupts only the last few rows and columns, so identities are
//! checked on a leading block.

mod matrix;
mod operators;
mod spectral;
mod states;

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result, C64};

pub use matrix::{commutator, leading_block_max_diff, max_abs, max_abs_diff};
pub use operators::{
    displacement_operator, make_annihilation, make_creation, make_hamiltonian, number_operator,
    quadrature_operator, squeeze_operator,
};
pub use spectral::{hermitian_eig, SpectralDecomposition};
pub use states::{coherent_state, expectation, fock_state, squeezed_state, Expectation};

/// Number of top Fock levels inspected by the truncation-health check.
pub const EDGE_LEVELS: usize = 5;

/// Physical constants of `H = ω a†a + λ(a + a†)` and the Milburn rate `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    omega: f64,
    lambda: f64,
    gamma: f64,
}

impl OscillatorParams {
    pub fn new(omega: f64, lambda: f64, gamma: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::invalid(
                "omega",
                format!("must be finite and > 0, got {omega}"),
            ));
        }
        if !lambda.is_finite() {
            return Err(Error::invalid(
                "lambda",
                format!("must be finite, got {lambda}"),
            ));
        }
        // Very large finite γ stands in for the unitary limit.
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::invalid(
                "gamma",
                format!("must be finite and > 0, got {gamma}"),
            ));
        }
        Ok(Self {
            omega,
            lambda,
            gamma,
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Displacement `λ/ω` of the oscillator's equilibrium (in units of the
    /// ladder operators; the equilibrium sits at `a = −λ/ω`).
    pub fn displacement(&self) -> f64 {
        self.lambda / self.omega
    }

    pub fn with_lambda(self, lambda: f64) -> Result<Self> {
        Self::new(self.omega, lambda, self.gamma)
    }

    pub fn with_gamma(self, gamma: f64) -> Result<Self> {
        Self::new(self.omega, self.lambda, gamma)
    }
}

/// Fock cutoff and tolerances controlling all truncation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    fock_cutoff: usize,
    edge_tolerance: f64,
    poisson_tail_tol: f64,
    max_series_terms: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            fock_cutoff: 96,
            edge_tolerance: 1e-10,
            poisson_tail_tol: 1e-12,
            max_series_terms: 1_000_000,
        }
    }
}

impl TruncationPolicy {
    /// Policy with the given cutoff and default tolerances.
    pub fn new(fock_cutoff: usize) -> Result<Self> {
        Self::default().with_cutoff(fock_cutoff)
    }

    pub fn with_cutoff(mut self, fock_cutoff: usize) -> Result<Self> {
        if fock_cutoff < 2 {
            return Err(Error::invalid(
                "fock_cutoff",
                format!("must be at least 2, got {fock_cutoff}"),
            ));
        }
        self.fock_cutoff = fock_cutoff;
        Ok(self)
    }

    /// `0` disables the edge-population check.
    pub fn with_edge_tolerance(mut self, tol: f64) -> Result<Self> {
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(Error::invalid(
                "edge_tolerance",
                format!("must be finite and >= 0, got {tol}"),
            ));
        }
        self.edge_tolerance = tol;
        Ok(self)
    }

    pub fn with_poisson_tail_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::invalid(
                "poisson_tail_tol",
                format!("must be finite and > 0, got {tol}"),
            ));
        }
        self.poisson_tail_tol = tol;
        Ok(self)
    }

    pub fn with_max_series_terms(mut self, ceiling: usize) -> Result<Self> {
        if ceiling == 0 {
            return Err(Error::invalid("max_series_terms", "must be positive"));
        }
        self.max_series_terms = ceiling;
        Ok(self)
    }

    pub fn fock_cutoff(&self) -> usize {
        self.fock_cutoff
    }

    pub fn edge_tolerance(&self) -> f64 {
        self.edge_tolerance
    }

    pub fn poisson_tail_tol(&self) -> f64 {
        self.poisson_tail_tol
    }

    pub fn max_series_terms(&self) -> usize {
        self.max_series_terms
    }

    /// Fails if `state` leaks more than `edge_tolerance` into the top levels.
    pub fn check_edge(&self, state: &FockVector) -> Result<()> {
        let population = state.edge_population();
        if self.edge_tolerance > 0.0 && population > self.edge_tolerance {
            return Err(Error::Truncation {
                population,
                levels: EDGE_LEVELS.min(state.dim()),
                tolerance: self.edge_tolerance,
            });
        }
        Ok(())
    }
}

/// State vector on the truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector(DVector<C64>);

impl FockVector {
    pub fn new(amplitudes: DVector<C64>) -> Self {
        Self(amplitudes)
    }

    /// Rescaled to unit norm. Panics on the zero vector.
    pub fn normalized(amplitudes: DVector<C64>) -> Self {
        let norm = amplitudes.norm();
        assert!(norm > 0.0, "cannot normalize the zero vector");
        Self(amplitudes.unscale(norm))
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Total population of the top [`EDGE_LEVELS`] levels.
    pub fn edge_population(&self) -> f64 {
        let n = self.dim();
        let start = n.saturating_sub(EDGE_LEVELS);
        self.0.iter().skip(start).map(|c| c.norm_sqr()).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// Density matrix on the truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(DMatrix<C64>);

impl DensityMatrix {
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        Ok(Self(entries))
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn pure(state: &FockVector) -> Self {
        let v = state.amplitudes();
        Self(v * v.adjoint())
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_entries(self) -> DMatrix<C64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// `max |ρ − ρ†|` elementwise.
    pub fn hermiticity_defect(&self) -> f64 {
        max_abs_diff(&self.0, &self.0.adjoint())
    }

    /// `tr(ρ²)`, real part.
    pub fn purity(&self) -> f64 {
        // tr(ρρ) = Σ_ij ρ_ij ρ_ji
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.0[(i, j)] * self.0[(j, i)];
            }
        }
        acc.re
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let spectral = hermitian_eig(&self.0)?;
        Ok(spectral.eigenvalues()[0])
    }
}

/// Complex squeeze parameter `z = r e^{iθ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeParameter {
    r: f64,
    theta: f64,
}

impl SqueezeParameter {
    /// `theta` is reduced into `[0, 2π)`.
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::invalid(
                "r",
                format!("must be finite and >= 0, got {r}"),
            ));
        }
        if !theta.is_finite() {
            return Err(Error::invalid(
                "theta",
                format!("must be finite, got {theta}"),
            ));
        }
        let mut theta = theta.rem_euclid(TAU);
        if theta >= TAU {
            theta = 0.0;
        }
        Ok(Self { r, theta })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn z(&self) -> C64 {
        C64::from_polar(self.r, self.theta)
    }

    /// `cosh r`
    pub fn mu(&self) -> f64 {
        self.r.cosh()
    }

    /// `e^{iθ} sinh r`
    pub fn nu(&self) -> C64 {
        C64::from_polar(self.r.sinh(), self.theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_reject_bad_values() {
        assert!(OscillatorParams::new(0.0, 0.7, 10.0).is_err());
        assert!(OscillatorParams::new(4.0, f64::NAN, 10.0).is_err());
        assert!(OscillatorParams::new(4.0, 0.7, -1.0).is_err());
        assert!(OscillatorParams::new(4.0, 0.7, f64::INFINITY).is_err());
        let p = OscillatorParams::new(4.0, -0.7, 1e12).unwrap();
        assert_eq!(p.displacement(), -0.175);
    }

    #[test]
    fn policy_defaults_and_validation() {
        let p = TruncationPolicy::default();
        assert_eq!(p.fock_cutoff(), 96);
        assert_eq!(p.edge_tolerance(), 1e-10);
        assert_eq!(p.poisson_tail_tol(), 1e-12);
        assert!(TruncationPolicy::new(1).is_err());
        assert!(p.with_poisson_tail_tol(0.0).is_err());
        assert!(p.with_edge_tolerance(0.0).is_ok());
        assert!(p.with_edge_tolerance(-1e-3).is_err());
    }

    #[test]
    fn squeeze_hyperbolic_identity() {
        for &(r, theta) in &[(0.0, 0.0), (0.3, 1.0), (1.0, 5.0), (2.5, -1.0)] {
            let z = SqueezeParameter::new(r, theta).unwrap();
            let lhs = z.mu().powi(2) - z.nu().norm_sqr();
            assert!((lhs - 1.0).abs() < 1e-12 * z.mu().powi(2).max(1.0));
            assert!((0.0..TAU).contains(&z.theta()));
        }
    }

    #[test]
    fn squeeze_mu_nu_at_quarter_turn() {
        // independent scalar evaluation: cosh 0.3, sinh 0.3
        let z = SqueezeParameter::new(0.3, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((z.mu() - 1.045_338_514_4).abs() < 1e-9);
        assert!(z.nu().re.abs() < 1e-15);
        assert!((z.nu().im - 0.304_520_293_4).abs() < 1e-9);
    }

    #[test]
    fn edge_population_counts_top_five() {
        let mut v = DVector::from_element(8, C64::new(0.0, 0.0));
        v[2] = C64::new(0.6, 0.0);
        v[3] = C64::new(0.0, 0.8);
        let state = FockVector::new(v);
        assert!((state.edge_population() - 0.64).abs() < 1e-15);
        let policy = TruncationPolicy::new(8).unwrap();
        assert!(matches!(
            policy.check_edge(&state),
            Err(Error::Truncation { .. })
        ));
        let off = policy.with_edge_tolerance(0.0).unwrap();
        assert!(off.check_edge(&state).is_ok());
    }

    #[test]
    fn density_matrix_of_pure_state() {
        let state = FockVector::normalized(DVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(0.5, -0.5),
        ]));
        let rho = DensityMatrix::pure(&state);
        assert!((rho.trace().re - 1.0).abs() < 1e-14);
        assert!(rho.hermiticity_defect() < 1e-15);
        assert!((rho.purity() - 1.0).abs() < 1e-14);
        assert!(rho.min_eigenvalue().unwrap() > -1e-14);
    }
}
