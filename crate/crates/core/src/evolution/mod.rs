//! Numerical evolution under the Milburn map.
//!
//! The exact solution is a Poisson mixture of unitary "kick" branches,
//! `ρ(t) = Σ_k e^{−γt}(γt)^k/k! |ψ_k⟩⟨ψ_k|` with `|ψ_k⟩ = e^{−ikH/γ}|ψ(0)⟩`.
//! Two independent routes compute the branches: repeated application of the
//! dense kernel `U = e^{−iH/γ}` ([`evolve_series`]), and diagonal phases in
//! the displaced frame ([`evolve_series_displaced_frame`]). The Lindblad
//! approximation is integrated separately ([`integrate_lindblad`]).

mod kernel;
mod lindblad;
mod series;
mod timeseries;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::fock::{number_operator, quadrature_operator, TruncationPolicy};
use crate::{Error, C64};

pub use kernel::{build_kernel, plan_series, MilburnKernel, SeriesPlan};
pub use lindblad::{
    integrate_lindblad, integrate_lindblad_with, lindblad_rhs, lindblad_rhs_with, rk4_step,
    LindbladForm, LindbladRun,
};
pub use series::{
    displaced_frame_branches, evolve_series, evolve_series_density, evolve_series_displaced_frame,
    series_branches, BranchExpectations,
};
pub use timeseries::{run_timeseries, track_name, Diagnostics, InitialState, TimeSeries};

/// Non-empty, finite, strictly ascending.
pub(crate) fn check_grid(t_grid: &[f64]) -> Result<(), Error> {
    if t_grid.is_empty() {
        return Err(Error::InvalidGrid("empty".into()));
    }
    if let Some(t) = t_grid.iter().find(|t| !t.is_finite() || **t < 0.0) {
        return Err(Error::InvalidGrid(format!(
            "time {t} is not finite and >= 0"
        )));
    }
    if let Some(w) = t_grid.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(format!(
            "not strictly ascending at {} -> {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Observables with closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Observable {
    /// `a† + a`
    Quadrature,
    /// `a†a`
    Number,
}

impl Observable {
    pub const ALL: [Observable; 2] = [Observable::Quadrature, Observable::Number];

    pub fn name(self) -> &'static str {
        match self {
            Observable::Quadrature => "quadrature",
            Observable::Number => "number",
        }
    }

    pub fn matrix(self, policy: &TruncationPolicy) -> DMatrix<C64> {
        match self {
            Observable::Quadrature => quadrature_operator(policy),
            Observable::Number => number_operator(policy),
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quadrature" => Ok(Observable::Quadrature),
            "number" => Ok(Observable::Number),
            other => Err(format!("unknown observable `{other}`")),
        }
    }
}

/// Ways of producing an expectation-value track.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Series,
    DisplacedFrame,
    Lindblad,
    ClosedForm,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Series,
        Method::DisplacedFrame,
        Method::Lindblad,
        Method::ClosedForm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::DisplacedFrame => "displaced_frame",
            Method::Lindblad => "lindblad",
            Method::ClosedForm => "closed_form",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}
