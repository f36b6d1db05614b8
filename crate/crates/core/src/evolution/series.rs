use nalgebra::{DMatrix, DVector};

use super::kernel::{MilburnKernel, SeriesPlan};
use crate::fock::{
    displacement_operator, DensityMatrix, FockVector, OscillatorParams, TruncationPolicy,
    EDGE_LEVELS,
};
use crate::{Error, Result, C64};

/// `⟨ψ_k|O|ψ_k⟩` for `k = 0..=k_max` and each observable.
///
/// The branch states do not depend on `t`, so one table serves every time
/// point; each time point only contributes its own Poisson weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchExpectations {
    rows: Vec<Vec<f64>>,
    max_edge_population: f64,
}

impl BranchExpectations {
    pub fn k_max(&self) -> usize {
        self.rows.len() - 1
    }

    /// Largest population in the top Fock levels over all branches.
    pub fn max_edge_population(&self) -> f64 {
        self.max_edge_population
    }

    /// Expectations of branch `k`, one per observable.
    pub fn row(&self, k: usize) -> &[f64] {
        &self.rows[k]
    }

    /// `Σ_k w_k ⟨ψ_k|O|ψ_k⟩` with the weights of `plan`.
    pub fn weigh(&self, plan: &SeriesPlan) -> Result<Vec<f64>> {
        if plan.k_max > self.k_max() {
            return Err(Error::DimensionMismatch {
                expected: plan.k_max + 1,
                found: self.rows.len(),
            });
        }
        Ok(plan.weigh(&self.rows))
    }
}

fn check_dims(dim: usize, initial: &FockVector, observables: &[DMatrix<C64>]) -> Result<()> {
    if initial.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: initial.dim(),
        });
    }
    for o in observables {
        for found in [o.nrows(), o.ncols()] {
            if found != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found,
                });
            }
        }
    }
    Ok(())
}

fn measure(psi: &DVector<C64>, observables: &[DMatrix<C64>]) -> Vec<f64> {
    observables
        .iter()
        .map(|o| psi.dotc(&(o * psi)).re)
        .collect()
}

fn edge_population(psi: &DVector<C64>) -> f64 {
    let skip = psi.len().saturating_sub(EDGE_LEVELS);
    psi.iter().skip(skip).map(|x| x.norm_sqr()).sum()
}

/// Branch table from repeated kicks `ψ_{k+1} = U ψ_k`.
pub fn series_branches(
    initial: &FockVector,
    kernel: &MilburnKernel,
    k_max: usize,
    observables: &[DMatrix<C64>],
) -> Result<BranchExpectations> {
    check_dims(kernel.dim(), initial, observables)?;
    let u = kernel.unitary();
    let mut psi = initial.amplitudes().clone();
    let mut rows = Vec::with_capacity(k_max + 1);
    let mut max_edge_population = 0.0f64;
    for k in 0..=k_max {
        rows.push(measure(&psi, observables));
        max_edge_population = max_edge_population.max(edge_population(&psi));
        if k < k_max {
            psi = u * psi;
        }
    }
    Ok(BranchExpectations {
        rows,
        max_edge_population,
    })
}

/// Branch table in the displaced frame,
/// `ψ_k ∝ D†(λ/ω) e^{−i a†a kω/γ} D(λ/ω) ψ(0)`.
///
/// The global phase `e^{ikλ²/(γω)}` is dropped: it cancels in every
/// `⟨ψ_k|O|ψ_k⟩` and in `|ψ_k⟩⟨ψ_k|`.
pub fn displaced_frame_branches(
    initial: &FockVector,
    params: &OscillatorParams,
    policy: &TruncationPolicy,
    k_max: usize,
    observables: &[DMatrix<C64>],
) -> Result<BranchExpectations> {
    let dim = policy.fock_cutoff();
    check_dims(dim, initial, observables)?;
    let d = displacement_operator(C64::new(params.displacement(), 0.0), policy);
    let d_dag = d.adjoint();
    let shifted = d * initial.amplitudes();
    let step = params.omega() / params.gamma();

    let mut rows = Vec::with_capacity(k_max + 1);
    let mut max_edge_population = 0.0f64;
    let mut rotated = shifted.clone();
    for k in 0..=k_max {
        for (n, (dst, src)) in rotated.iter_mut().zip(shifted.iter()).enumerate() {
            *dst = src * C64::from_polar(1.0, -((n * k) as f64) * step);
        }
        let psi = &d_dag * &rotated;
        rows.push(measure(&psi, observables));
        max_edge_population = max_edge_population.max(edge_population(&psi));
    }
    Ok(BranchExpectations {
        rows,
        max_edge_population,
    })
}

/// Expectation values at `plan.t` via the dense kernel.
///
/// Memory stays `O(N)` per branch; the density matrix is never formed.
pub fn evolve_series(
    initial: &FockVector,
    kernel: &MilburnKernel,
    plan: &SeriesPlan,
    observables: &[DMatrix<C64>],
) -> Result<Vec<f64>> {
    series_branches(initial, kernel, plan.k_max, observables)?.weigh(plan)
}

/// Expectation values at `plan.t` via the displaced-frame route. Shares no
/// operator code with [`evolve_series`] beyond the Fock primitives.
pub fn evolve_series_displaced_frame(
    initial: &FockVector,
    params: &OscillatorParams,
    policy: &TruncationPolicy,
    plan: &SeriesPlan,
    observables: &[DMatrix<C64>],
) -> Result<Vec<f64>> {
    displaced_frame_branches(initial, params, policy, plan.k_max, observables)?.weigh(plan)
}

/// `ρ(t) = Σ_k w_k |ψ_k⟩⟨ψ_k|`, for invariant checks.
pub fn evolve_series_density(
    initial: &FockVector,
    kernel: &MilburnKernel,
    plan: &SeriesPlan,
) -> Result<DensityMatrix> {
    let dim = kernel.dim();
    check_dims(dim, initial, &[])?;
    let u = kernel.unitary();
    let mut psi = initial.amplitudes().clone();
    let mut rho = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    for (k, &w) in plan.weights.iter().enumerate() {
        if k > 0 {
            psi = u * psi;
        }
        rho.gerc(C64::new(w, 0.0), &psi, &psi, C64::new(1.0, 0.0));
    }
    DensityMatrix::new(rho)
}
