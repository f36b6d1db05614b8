use nalgebra::DMatrix;

use crate::fock::{
    hermitian_eig, make_hamiltonian, OscillatorParams, SpectralDecomposition, TruncationPolicy,
};
use crate::{Error, Result, C64};

/// One Milburn kick `U = e^{−iH/γ}` together with the spectrum it came from.
#[derive(Debug, Clone)]
pub struct MilburnKernel {
    unitary: DMatrix<C64>,
    spectral: SpectralDecomposition,
    params: OscillatorParams,
    policy: TruncationPolicy,
}

impl MilburnKernel {
    pub fn unitary(&self) -> &DMatrix<C64> {
        &self.unitary
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        &self.spectral
    }

    pub fn params(&self) -> &OscillatorParams {
        &self.params
    }

    pub fn policy(&self) -> &TruncationPolicy {
        &self.policy
    }

    pub fn dim(&self) -> usize {
        self.unitary.nrows()
    }
}

pub fn build_kernel(params: &OscillatorParams, policy: &TruncationPolicy) -> Result<MilburnKernel> {
    let h = make_hamiltonian(params, policy);
    let spectral = hermitian_eig(&h)?;
    let unitary = spectral.unitary(1.0 / params.gamma());
    Ok(MilburnKernel {
        unitary,
        spectral,
        params: *params,
        policy: *policy,
    })
}

/// Poisson weights `e^{−γt}(γt)^k/k!` for `k = 0..=k_max`, with the dropped
/// tail mass.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPlan {
    pub t: f64,
    pub k_max: usize,
    pub weights: Vec<f64>,
    pub tail_mass: f64,
}

impl SeriesPlan {
    /// Σ_k w_k · branch_k for each column of the branch table.
    pub fn weigh(&self, branches: &[Vec<f64>]) -> Vec<f64> {
        let width = branches.first().map_or(0, Vec::len);
        let mut out = vec![0.0; width];
        for (w, row) in self.weights.iter().zip(branches) {
            for (acc, v) in out.iter_mut().zip(row) {
                *acc += w * v;
            }
        }
        out
    }
}

/// Above this mean the leading weight `e^{−γt}` underflows.
const LOG_SPACE_MEAN: f64 = 700.0;

/// Weights are generated until the bound on everything beyond them falls
/// below this (or below `tol · 1e−3` if that is smaller).
const NEGLIGIBLE_MASS: f64 = 1e-18;

/// Smallest `k_max` whose Poisson(γt) tail is within `poisson_tail_tol`.
///
/// The tail is the exact sum of the weights beyond `k_max` plus a geometric
/// bound on the remainder past the last generated term.
pub fn plan_series(
    params: &OscillatorParams,
    policy: &TruncationPolicy,
    t: f64,
) -> Result<SeriesPlan> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(
            "t",
            format!("must be finite and >= 0, got {t}"),
        ));
    }
    let mean = params.gamma() * t;
    if mean == 0.0 {
        return Ok(SeriesPlan {
            t,
            k_max: 0,
            weights: vec![1.0],
            tail_mass: 0.0,
        });
    }
    let tol = policy.poisson_tail_tol();
    let ceiling = policy.max_series_terms();
    let negligible = (tol * 1e-3).min(NEGLIGIBLE_MASS);

    let log_space = mean > LOG_SPACE_MEAN;
    let log_mean = mean.ln();
    let mut weights = Vec::new();
    let mut log_w = -mean;
    let mut w = (-mean).exp();
    let mut remainder_bound;
    let mut k = 0usize;
    loop {
        if log_space {
            w = log_w.exp();
        }
        weights.push(w);
        let ratio = mean / (k + 1) as f64;
        remainder_bound = if ratio < 1.0 {
            w * ratio / (1.0 - ratio)
        } else {
            f64::INFINITY
        };
        if remainder_bound < negligible || k > ceiling {
            break;
        }
        k += 1;
        if log_space {
            log_w += log_mean - (k as f64).ln();
        } else {
            w *= mean / k as f64;
        }
    }

    // tails[k] = Σ_{j>k} w_j, accumulated smallest-first
    let mut tails = vec![0.0; weights.len()];
    // an infinite bound (stopped at the ceiling before the mode) fails below
    let mut acc = remainder_bound;
    for j in (0..weights.len()).rev() {
        tails[j] = acc;
        acc += weights[j];
    }
    let k_max = match tails.iter().position(|&tail| tail <= tol) {
        Some(k_max) if k_max <= ceiling => k_max,
        _ => {
            return Err(Error::PlanOverflow {
                needed: weights.len(),
                ceiling,
            })
        }
    };
    let tail_mass = tails[k_max];
    weights.truncate(k_max + 1);
    Ok(SeriesPlan {
        t,
        k_max,
        weights,
        tail_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, max_abs_diff, TruncationPolicy};
    use statrs::distribution::{DiscreteCDF, Poisson};

    fn params(lambda: f64, gamma: f64) -> OscillatorParams {
        OscillatorParams::new(4.0, lambda, gamma).unwrap()
    }

    #[test]
    fn kernel_is_diagonal_without_displacement() {
        let p = params(0.0, 10.0);
        let policy = TruncationPolicy::new(12).unwrap();
        let k = build_kernel(&p, &policy).unwrap();
        let expected = DMatrix::from_fn(12, 12, |i, j| {
            if i == j {
                C64::from_polar(1.0, -4.0 * i as f64 / 10.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        assert!(max_abs_diff(k.unitary(), &expected) < 1e-12);
    }

    #[test]
    fn kernel_unitarity_and_spectral_consistency() {
        let p = params(0.7, 10.0);
        let policy = TruncationPolicy::new(64).unwrap();
        let k = build_kernel(&p, &policy).unwrap();
        let u = k.unitary();
        let id = DMatrix::<C64>::identity(64, 64);
        assert!(max_abs_diff(&(u.adjoint() * u), &id) < 1e-9);
        let rebuilt = k
            .spectral()
            .apply_fn(|e| C64::from_polar(1.0, -e / p.gamma()));
        assert!(max_abs_diff(u, &rebuilt) < 1e-10);

        let mut v = coherent_state(C64::new(0.0, 0.0), &policy)
            .unwrap()
            .into_amplitudes();
        for _ in 0..8 {
            v = u * v;
        }
        assert!((v.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn kernel_unitary_limit() {
        // deviation from I is |E|/γ, so keep the spectrum below 100
        let p = params(0.7, 1e12);
        let policy = TruncationPolicy::new(16).unwrap();
        let k = build_kernel(&p, &policy).unwrap();
        assert!(max_abs_diff(k.unitary(), &DMatrix::identity(16, 16)) < 1e-10);
    }

    #[test]
    fn plan_at_zero() {
        let plan = plan_series(&params(0.7, 10.0), &TruncationPolicy::default(), 0.0).unwrap();
        assert_eq!(plan.k_max, 0);
        assert_eq!(plan.weights, vec![1.0]);
        assert_eq!(plan.tail_mass, 0.0);
    }

    #[test]
    fn plan_rejects_negative_time() {
        assert!(plan_series(&params(0.7, 10.0), &TruncationPolicy::default(), -1.0).is_err());
    }

    #[test]
    fn plan_k_max_matches_brute_force_tail() {
        // γt = 100; oracle: Poisson survival function from statrs
        let plan = plan_series(&params(0.7, 10.0), &TruncationPolicy::default(), 10.0).unwrap();
        let poisson = Poisson::new(100.0).unwrap();
        assert!(poisson.sf(plan.k_max as u64) <= 1e-12 * (1.0 + 1e-6));
        assert!(poisson.sf(plan.k_max as u64 - 1) > 1e-12);
        let c = (plan.k_max as f64 - 100.0) / 10.0;
        assert!((7.0..=8.0).contains(&c), "c = {c}");
        assert!((plan.tail_mass - poisson.sf(plan.k_max as u64)).abs() < 1e-15);
    }

    #[test]
    fn plan_normalization() {
        for &(gamma, t) in &[
            (10.0, 1.0),
            (10.0, 0.01),
            (10.0, 6.0),
            (3.0, 250.0),
            (10.0, 90.0),
        ] {
            let plan = plan_series(&params(0.7, gamma), &TruncationPolicy::default(), t).unwrap();
            let total: f64 = plan.weights.iter().sum::<f64>() + plan.tail_mass;
            assert!((total - 1.0).abs() < 1e-12, "γt = {}", gamma * t);
            assert!(plan.weights.iter().all(|&w| w >= 0.0));
            assert!(plan.tail_mass <= 1e-12);
        }
    }

    #[test]
    fn plan_sum_direct() {
        // γt = 10: direct summation of the pmf as the oracle
        let plan = plan_series(&params(0.7, 10.0), &TruncationPolicy::default(), 1.0).unwrap();
        let sum: f64 = plan.weights.iter().sum();
        assert!((sum - (1.0 - plan.tail_mass)).abs() < 1e-14);
        let mut direct = 0.0;
        let mut pmf = (-10.0f64).exp();
        for k in 0..=plan.k_max {
            if k > 0 {
                pmf *= 10.0 / k as f64;
            }
            direct += pmf;
        }
        assert!((sum - direct).abs() < 1e-15);
    }

    #[test]
    fn plan_log_space_for_large_mean() {
        // γt = 1500 exceeds the linear-space range of e^{−γt}
        let plan = plan_series(&params(0.7, 10.0), &TruncationPolicy::default(), 150.0).unwrap();
        let total: f64 = plan.weights.iter().sum::<f64>() + plan.tail_mass;
        assert!((total - 1.0).abs() < 1e-12);
        let poisson = Poisson::new(1500.0).unwrap();
        assert!(poisson.sf(plan.k_max as u64) <= 1e-12 * 1.01);
        assert!(poisson.sf(plan.k_max as u64 - 1) > 1e-12 * 0.99);
    }

    #[test]
    fn plan_overflow() {
        let policy = TruncationPolicy::default()
            .with_max_series_terms(50)
            .unwrap();
        let err = plan_series(&params(0.7, 10.0), &policy, 10.0).unwrap_err();
        assert!(matches!(err, Error::PlanOverflow { ceiling: 50, .. }));
        assert!(plan_series(&params(0.7, 10.0), &policy, 1.0).is_ok());
    }
}
