use nalgebra::{DMatrix, DVector};

use super::operators::squeeze_operator;
use super::{DensityMatrix, FockVector, SqueezeParameter, TruncationPolicy};
use crate::{Error, Result, C64};

/// `|α⟩` from the recurrence `c_{n+1} = c_n α/√(n+1)`, renormalized after
/// truncation.
pub fn coherent_state(alpha: C64, policy: &TruncationPolicy) -> Result<FockVector> {
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(Error::invalid("alpha", "must be finite"));
    }
    let dim = policy.fock_cutoff();
    let mut amps = DVector::from_element(dim, C64::new(0.0, 0.0));
    amps[0] = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..dim - 1 {
        amps[n + 1] = amps[n] * alpha / ((n + 1) as f64).sqrt();
    }
    let norm = amps.norm();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::invalid(
            "alpha",
            format!("|alpha| = {} underflows the vacuum amplitude", alpha.norm()),
        ));
    }
    let state = FockVector::normalized(amps);
    policy.check_edge(&state)?;
    Ok(state)
}

/// `|α, z⟩ = S(z)|α⟩`.
pub fn squeezed_state(
    alpha: C64,
    z: &SqueezeParameter,
    policy: &TruncationPolicy,
) -> Result<FockVector> {
    // The squeeze spreads population upward, so check only the final state.
    let unchecked = policy.with_edge_tolerance(0.0)?;
    let coherent = coherent_state(alpha, &unchecked)?;
    let s = squeeze_operator(z, policy);
    let state = FockVector::normalized(s * coherent.amplitudes());
    policy.check_edge(&state)?;
    Ok(state)
}

/// Number state `|n⟩`.
pub fn fock_state(n: usize, policy: &TruncationPolicy) -> Result<FockVector> {
    let dim = policy.fock_cutoff();
    if n >= dim {
        return Err(Error::invalid(
            "n",
            format!("level {n} outside the truncated basis 0..{dim}"),
        ));
    }
    let mut amps = DVector::from_element(dim, C64::new(0.0, 0.0));
    amps[n] = C64::new(1.0, 0.0);
    let state = FockVector::new(amps);
    policy.check_edge(&state)?;
    Ok(state)
}

/// Anything an observable can be averaged over.
pub trait Expectation {
    fn dim(&self) -> usize;

    /// `⟨ψ|O|ψ⟩` or `tr(ρO)`; real for Hermitian `O` up to roundoff.
    fn expectation(&self, observable: &DMatrix<C64>) -> Result<C64>;
}

fn check_square(dim: usize, observable: &DMatrix<C64>) -> Result<()> {
    for found in [observable.nrows(), observable.ncols()] {
        if found != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found,
            });
        }
    }
    Ok(())
}

impl Expectation for FockVector {
    fn dim(&self) -> usize {
        FockVector::dim(self)
    }

    fn expectation(&self, observable: &DMatrix<C64>) -> Result<C64> {
        check_square(FockVector::dim(self), observable)?;
        let v = self.amplitudes();
        Ok(v.dotc(&(observable * v)))
    }
}

impl Expectation for DensityMatrix {
    fn dim(&self) -> usize {
        DensityMatrix::dim(self)
    }

    fn expectation(&self, observable: &DMatrix<C64>) -> Result<C64> {
        let n = DensityMatrix::dim(self);
        check_square(n, observable)?;
        let rho = self.entries();
        // tr(ρO) = Σ_ij ρ_ij O_ji
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += rho[(i, j)] * observable[(j, i)];
            }
        }
        Ok(acc)
    }
}

/// Free-function form of [`Expectation::expectation`].
pub fn expectation<S: Expectation + ?Sized>(state: &S, observable: &DMatrix<C64>) -> Result<C64> {
    state.expectation(observable)
}
