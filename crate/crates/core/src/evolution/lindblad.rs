use nalgebra::DMatrix;

use super::{check_grid, Observable};
use crate::fock::{
    commutator, hermitian_eig, make_hamiltonian, DensityMatrix, OscillatorParams, TruncationPolicy,
};
use crate::{Error, Result, C64};

/// Coefficient of the double commutator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LindbladForm {
    /// `−(1/2γ)[H,[H,ρ]]`: the second-order Taylor term of
    /// `γ(e^{−iH/γ}ρe^{iH/γ} − ρ)`.
    #[default]
    SecondOrder,
    /// `−(1/γ)[H,[H,ρ]]`: twice the Taylor coefficient. Kept for comparison;
    /// its error against the exact map does not shrink like `1/γ²`.
    Unhalved,
}

impl LindbladForm {
    pub fn coefficient(self, gamma: f64) -> f64 {
        match self {
            LindbladForm::SecondOrder => 0.5 / gamma,
            LindbladForm::Unhalved => 1.0 / gamma,
        }
    }
}

/// `−i[H,ρ] − (1/2γ)[H,[H,ρ]]`.
pub fn lindblad_rhs(rho: &DMatrix<C64>, h: &DMatrix<C64>, gamma: f64) -> Result<DMatrix<C64>> {
    lindblad_rhs_with(rho, h, gamma, LindbladForm::SecondOrder)
}

pub fn lindblad_rhs_with(
    rho: &DMatrix<C64>,
    h: &DMatrix<C64>,
    gamma: f64,
    form: LindbladForm,
) -> Result<DMatrix<C64>> {
    let dim = h.nrows();
    for found in [h.ncols(), rho.nrows(), rho.ncols()] {
        if found != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found,
            });
        }
    }
    let inner = commutator(h, rho);
    let outer = commutator(h, &inner);
    Ok(inner * C64::new(0.0, -1.0) - outer * C64::new(form.coefficient(gamma), 0.0))
}

/// One classic RK4 step of `y' = f(y)`.
pub fn rk4_step<F>(f: F, y: &DMatrix<C64>, h: f64) -> DMatrix<C64>
where
    F: Fn(&DMatrix<C64>) -> DMatrix<C64>,
{
    let half = C64::new(h / 2.0, 0.0);
    let full = C64::new(h, 0.0);
    let k1 = f(y);
    let k2 = f(&(y + &k1 * half));
    let k3 = f(&(y + &k2 * half));
    let k4 = f(&(y + &k3 * full));
    y + (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0)
}

/// Output of [`integrate_lindblad`].
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladRun {
    /// `series[obs][i]` is the expectation at `t_grid[i]`.
    pub series: Vec<Vec<f64>>,
    /// Largest step actually taken.
    pub step: f64,
    pub max_trace_drift: f64,
    pub renormalizations: usize,
}

const MIN_STEP: f64 = 1e-9;
const TRACE_DRIFT_TOL: f64 = 1e-9;

/// Step bound: `0.01/ω`, `0.1γ/spread²` for the damping term, and
/// `0.02/spread` so the fastest coherence is resolved to ~1e−11 per step.
fn max_step(params: &OscillatorParams, spread: f64) -> f64 {
    let mut h = 0.01 / params.omega();
    if spread > 0.0 {
        h = h
            .min(0.1 * params.gamma() / (spread * spread))
            .min(0.02 / spread);
    }
    h
}

/// RK4 stability polynomial `1 + z + z²/2 + z³/6 + z⁴/24`.
fn rk4_polynomial(z: C64) -> C64 {
    let one = C64::new(1.0, 0.0);
    one + z * (one + z * (one / 2.0 + z * (one / 6.0 + z / 24.0)))
}

/// `m` RK4 steps of size `h` on the eigenbasis generator
/// `L_ij = −iΔ_ij − cΔ_ij²`, as an elementwise multiplier.
///
/// For a linear elementwise ODE one RK4 step multiplies each entry by the
/// stability polynomial of `hL_ij`; `m` steps multiply by its `m`th power.
fn propagator(energies: &[f64], c: f64, h: f64, m: u32) -> DMatrix<C64> {
    let n = energies.len();
    DMatrix::from_fn(n, n, |i, j| {
        let d = energies[i] - energies[j];
        rk4_polynomial(C64::new(-c * d * d, -d) * h).powu(m)
    })
}

fn trace_product(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    // tr(AB) = Σ_ij A_ij B_ji
    a.iter()
        .zip(b.transpose().iter())
        .map(|(x, y)| x * y)
        .sum::<C64>()
        .re
}

/// Fixed-step RK4 of the second-order Lindblad equation, sampled on `t_grid`.
pub fn integrate_lindblad(
    initial: &DensityMatrix,
    params: &OscillatorParams,
    policy: &TruncationPolicy,
    t_grid: &[f64],
    observables: &[Observable],
) -> Result<LindbladRun> {
    integrate_lindblad_with(
        initial,
        params,
        policy,
        t_grid,
        observables,
        LindbladForm::SecondOrder,
    )
}

/// As [`integrate_lindblad`] with an explicit double-commutator coefficient.
///
/// The equation is integrated in the eigenbasis of `H`, where its right-hand
/// side is elementwise; this is the same RK4 scheme up to a fixed unitary
/// change of basis.
pub fn integrate_lindblad_with(
    initial: &DensityMatrix,
    params: &OscillatorParams,
    policy: &TruncationPolicy,
    t_grid: &[f64],
    observables: &[Observable],
    form: LindbladForm,
) -> Result<LindbladRun> {
    let dim = policy.fock_cutoff();
    if initial.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: initial.dim(),
        });
    }
    check_grid(t_grid)?;
    if t_grid[0] != 0.0 {
        return Err(Error::InvalidGrid(format!(
            "integration starts at t = 0, grid starts at {}",
            t_grid[0]
        )));
    }

    let spectral = hermitian_eig(&make_hamiltonian(params, policy))?;
    let h_max = max_step(params, spectral.spread());
    if h_max < MIN_STEP {
        return Err(Error::StepSizeUnderflow { step: h_max });
    }
    let energies: Vec<f64> = spectral.eigenvalues().iter().copied().collect();
    let c = form.coefficient(params.gamma());
    let obs_e: Vec<DMatrix<C64>> = observables
        .iter()
        .map(|o| spectral.to_eigenbasis(&o.matrix(policy)))
        .collect();

    let mut rho = spectral.to_eigenbasis(initial.entries());
    let mut series = vec![Vec::with_capacity(t_grid.len()); observables.len()];
    let mut step = 0.0f64;
    let mut max_trace_drift = 0.0f64;
    let mut renormalizations = 0;
    // uniform grids reuse one multiplier
    let mut cached: Option<(u32, f64, DMatrix<C64>)> = None;

    for (i, &t) in t_grid.iter().enumerate() {
        if i > 0 {
            let dt = t - t_grid[i - 1];
            let m = (dt / h_max).ceil().max(1.0) as u32;
            let h = dt / m as f64;
            step = step.max(h);
            let reuse = matches!(&cached, Some((cm, ch, _)) if *cm == m && *ch == h);
            if !reuse {
                cached = Some((m, h, propagator(&energies, c, h, m)));
            }
            let (_, _, mult) = cached.as_ref().expect("multiplier cached above");
            rho.component_mul_assign(mult);

            let tr = rho.trace();
            let drift = (tr - C64::new(1.0, 0.0)).norm();
            max_trace_drift = max_trace_drift.max(drift);
            if drift > TRACE_DRIFT_TOL {
                rho /= tr;
                renormalizations += 1;
            }
        }
        for (track, o) in series.iter_mut().zip(&obs_e) {
            track.push(trace_product(&rho, o));
        }
    }

    Ok(LindbladRun {
        series,
        step,
        max_trace_drift,
        renormalizations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{build_kernel, evolve_series, plan_series};
    use crate::fock::{
        coherent_state, fock_state, max_abs, max_abs_diff, quadrature_operator, FockVector,
    };
    use nalgebra::DVector;
    use proptest::prelude::*;

    fn fig(lambda: f64, gamma: f64) -> OscillatorParams {
        OscillatorParams::new(4.0, lambda, gamma).unwrap()
    }

    fn policy(n: usize) -> TruncationPolicy {
        TruncationPolicy::new(n).unwrap()
    }

    #[test]
    fn rhs_vanishes_on_eigenprojector() {
        let p = policy(24);
        let h = make_hamiltonian(&fig(0.7, 10.0), &p);
        let spectral = hermitian_eig(&h).unwrap();
        let v = spectral.eigenvectors().column(3).into_owned();
        let rho = &v * v.adjoint();
        assert!(max_abs(&lindblad_rhs(&rho, &h, 10.0).unwrap()) < 1e-10);

        let h0 = make_hamiltonian(&fig(0.0, 10.0), &p);
        let vac = DensityMatrix::pure(&fock_state(0, &p).unwrap());
        assert_eq!(
            max_abs(&lindblad_rhs(vac.entries(), &h0, 10.0).unwrap()),
            0.0
        );
    }

    #[test]
    fn rhs_dimension_mismatch() {
        let h = make_hamiltonian(&fig(0.7, 10.0), &policy(8));
        let rho = DMatrix::<C64>::identity(6, 6);
        assert!(matches!(
            lindblad_rhs(&rho, &h, 10.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    fn random_density(entries: &[(f64, f64)], n: usize) -> DMatrix<C64> {
        let a = DMatrix::from_fn(n, n, |i, j| {
            let (re, im) = entries[i * n + j];
            C64::new(re, im)
        });
        let rho = &a * a.adjoint();
        let tr = rho.trace();
        rho / tr
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn rhs_traceless_and_hermitian(
            entries in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 256),
            lambda in 0.0f64..2.0,
        ) {
            let p = policy(16);
            let h = make_hamiltonian(&fig(lambda, 10.0), &p);
            let rho = random_density(&entries, 16);
            let out = lindblad_rhs(&rho, &h, 10.0).unwrap();
            let scale = max_abs(&out).max(1.0);
            prop_assert!(out.trace().norm() < 1e-12 * scale);
            prop_assert!(max_abs_diff(&out, &out.adjoint()) < 1e-12 * scale);
        }
    }

    #[test]
    fn eigenbasis_step_equals_stagewise_rk4() {
        let n = 12;
        let p = policy(n);
        let params = fig(0.7, 10.0);
        let h = make_hamiltonian(&params, &p);
        let spectral = hermitian_eig(&h).unwrap();
        let psi = FockVector::normalized(DVector::from_fn(n, |i, _| {
            C64::new(1.0 / (1.0 + i as f64), 0.3 * i as f64 - 1.0)
        }));
        let rho0 = DensityMatrix::pure(&psi).into_entries();
        let step = 1e-3;
        for form in [LindbladForm::SecondOrder, LindbladForm::Unhalved] {
            let mut stagewise = rho0.clone();
            for _ in 0..5 {
                stagewise = rk4_step(
                    |r| lindblad_rhs_with(r, &h, params.gamma(), form).unwrap(),
                    &stagewise,
                    step,
                );
            }
            let energies: Vec<f64> = spectral.eigenvalues().iter().copied().collect();
            let mult = propagator(&energies, form.coefficient(params.gamma()), step, 5);
            let eig = spectral.from_eigenbasis(&spectral.to_eigenbasis(&rho0).component_mul(&mult));
            assert!(max_abs_diff(&stagewise, &eig) < 1e-12);
        }
    }

    #[test]
    fn unitary_limit_matches_schrodinger() {
        // the double commutator carries 1/γ, so only −i[H,ρ] survives
        let p = policy(32);
        let params = fig(0.7, 1e12);
        let psi = coherent_state(C64::new(2.0, 0.0), &p).unwrap();
        let grid: Vec<f64> = (0..=10).map(|i| 0.1 * i as f64).collect();
        let run = integrate_lindblad(
            &DensityMatrix::pure(&psi),
            &params,
            &p,
            &grid,
            &[Observable::Quadrature],
        )
        .unwrap();
        let spectral = hermitian_eig(&make_hamiltonian(&params, &p)).unwrap();
        let x = quadrature_operator(&p);
        for (&t, &v) in grid.iter().zip(&run.series[0]) {
            let psi_t = spectral.unitary(t) * psi.amplitudes();
            let exact = psi_t.dotc(&(&x * &psi_t)).re;
            assert!((v - exact).abs() < 1e-6, "t = {t}: {v} vs {exact}");
        }
    }

    #[test]
    fn stationary_state_is_constant() {
        let p = policy(24);
        let params = fig(0.7, 10.0);
        let spectral = hermitian_eig(&make_hamiltonian(&params, &p)).unwrap();
        // mixture of eigenprojectors
        let rho = spectral.apply_fn(|e| C64::new((-0.5 * e).exp(), 0.0));
        let tr = rho.trace();
        let rho = DensityMatrix::new(rho / tr).unwrap();
        let grid = [0.0, 0.5, 1.0, 2.0];
        let run = integrate_lindblad(&rho, &params, &p, &grid, &Observable::ALL).unwrap();
        for track in &run.series {
            for v in track {
                assert!((v - track[0]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn trace_kept_and_step_bounded() {
        let p = policy(64);
        let params = fig(0.7, 10.0);
        let psi = coherent_state(C64::new(4.0, 0.0), &p).unwrap();
        let grid = [0.0, 0.05, 0.1];
        let run = integrate_lindblad(
            &DensityMatrix::pure(&psi),
            &params,
            &p,
            &grid,
            &Observable::ALL,
        )
        .unwrap();
        assert!(run.max_trace_drift < 1e-12);
        assert_eq!(run.renormalizations, 0);
        let spread = hermitian_eig(&make_hamiltonian(&params, &p))
            .unwrap()
            .spread();
        assert!(run.step <= 0.01 / 4.0);
        assert!(run.step <= 0.1 * 10.0 / (spread * spread) * (1.0 + 1e-12));
        assert!((run.series[0][0] - 8.0).abs() < 1e-9);
    }

    #[test]
    fn grid_errors() {
        let p = policy(16);
        let params = fig(0.7, 10.0);
        let rho = DensityMatrix::pure(&fock_state(0, &p).unwrap());
        for grid in [&[][..], &[0.5, 1.0], &[0.0, 1.0, 0.5], &[0.0, f64::NAN]] {
            assert!(matches!(
                integrate_lindblad(&rho, &params, &p, grid, &Observable::ALL),
                Err(Error::InvalidGrid(_))
            ));
        }
        let wrong = DensityMatrix::pure(&fock_state(0, &policy(8)).unwrap());
        assert!(integrate_lindblad(&wrong, &params, &p, &[0.0], &Observable::ALL).is_err());
    }

    #[test]
    fn step_underflow() {
        // γ tiny relative to spread² forces the damping bound below 1e-9
        let p = policy(64);
        let params = OscillatorParams::new(4.0, 0.7, 1e-6).unwrap();
        let rho = DensityMatrix::pure(&fock_state(0, &p).unwrap());
        assert!(matches!(
            integrate_lindblad(&rho, &params, &p, &[0.0, 1.0], &Observable::ALL),
            Err(Error::StepSizeUnderflow { .. })
        ));
    }

    fn deviation_at_one(gamma: f64, form: LindbladForm) -> f64 {
        let p = policy(64);
        let params = fig(0.7, gamma);
        let psi = coherent_state(C64::new(4.0, 0.0), &p).unwrap();
        let run = integrate_lindblad_with(
            &DensityMatrix::pure(&psi),
            &params,
            &p,
            &[0.0, 1.0],
            &Observable::ALL,
            form,
        )
        .unwrap();
        let kernel = build_kernel(&params, &p).unwrap();
        let plan = plan_series(&params, &p, 1.0).unwrap();
        let obs: Vec<_> = Observable::ALL.iter().map(|o| o.matrix(&p)).collect();
        let exact = evolve_series(&psi, &kernel, &plan, &obs).unwrap();
        run.series
            .iter()
            .zip(&exact)
            .map(|(track, e)| (track[1] - e).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn deviation_shrinks_with_gamma() {
        let d10 = deviation_at_one(10.0, LindbladForm::SecondOrder);
        let d20 = deviation_at_one(20.0, LindbladForm::SecondOrder);
        assert!(d20 / d10 < 0.7, "{d10} {d20}");
    }

    #[test]
    fn unhalved_form_converges_slowly() {
        // twice the Taylor coefficient leaves an O(1/γ) error
        let d10 = deviation_at_one(10.0, LindbladForm::Unhalved);
        let d20 = deviation_at_one(20.0, LindbladForm::Unhalved);
        assert!(d20 / d10 > 0.7, "{d10} {d20}");
    }
}
