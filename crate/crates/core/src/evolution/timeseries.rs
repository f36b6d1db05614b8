use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{
    build_kernel, check_grid, displaced_frame_branches, integrate_lindblad, plan_series,
    series_branches, BranchExpectations, Method, Observable, SeriesPlan,
};
use crate::closed_form::{num_coherent, num_squeezed, quad_coherent, quad_squeezed};
use crate::fock::{
    coherent_state, fock_state, squeezed_state, DensityMatrix, FockVector, OscillatorParams,
    SqueezeParameter, TruncationPolicy,
};
use crate::{Error, Result, C64};

/// Initial state, kept symbolic so closed forms can be matched to it.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Coherent { alpha: C64 },
    Squeezed { alpha: C64, z: SqueezeParameter },
    Fock { n: usize },
    Custom(FockVector),
}

impl InitialState {
    pub fn prepare(&self, policy: &TruncationPolicy) -> Result<FockVector> {
        match self {
            InitialState::Coherent { alpha } => coherent_state(*alpha, policy),
            InitialState::Squeezed { alpha, z } => squeezed_state(*alpha, z, policy),
            InitialState::Fock { n } => fock_state(*n, policy),
            InitialState::Custom(v) => {
                if v.dim() != policy.fock_cutoff() {
                    return Err(Error::DimensionMismatch {
                        expected: policy.fock_cutoff(),
                        found: v.dim(),
                    });
                }
                policy.check_edge(v)?;
                Ok(v.clone())
            }
        }
    }

    pub fn has_closed_form(&self) -> bool {
        matches!(
            self,
            InitialState::Coherent { .. } | InitialState::Squeezed { .. }
        )
    }

    /// Closed-form expectation, if one exists for this state.
    pub fn closed_form(&self, obs: Observable, params: &OscillatorParams, t: f64) -> Option<f64> {
        let result = match (self, obs) {
            (InitialState::Coherent { alpha }, Observable::Quadrature) => {
                quad_coherent(*alpha, params, t)
            }
            (InitialState::Coherent { alpha }, Observable::Number) => {
                num_coherent(*alpha, params, t)
            }
            (InitialState::Squeezed { alpha, z }, Observable::Quadrature) => {
                quad_squeezed(*alpha, z, params, t)
            }
            (InitialState::Squeezed { alpha, z }, Observable::Number) => {
                num_squeezed(*alpha, z, params, t)
            }
            _ => return None,
        };
        Some(result.value)
    }
}

/// Truncation and integrator health for one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Largest top-level population seen in the initial state or any branch.
    pub edge_population: f64,
    /// Largest Poisson tail dropped at any time point.
    pub max_tail_mass: f64,
    /// Deepest branch index used.
    pub max_k: usize,
    pub lindblad_step: Option<f64>,
    pub lindblad_trace_drift: Option<f64>,
}

/// Expectation tracks on a shared time grid, keyed by [`track_name`].
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub tracks: BTreeMap<String, Vec<f64>>,
    pub diagnostics: Diagnostics,
}

impl TimeSeries {
    pub fn track(&self, obs: Observable, method: Method) -> Option<&[f64]> {
        self.tracks.get(&track_name(obs, method)).map(Vec::as_slice)
    }
}

/// `"<observable>.<method>"`, e.g. `quadrature.series`.
pub fn track_name(obs: Observable, method: Method) -> String {
    format!("{}.{}", obs.name(), method.name())
}

fn weigh_all(table: &BranchExpectations, plans: &[SeriesPlan]) -> Result<Vec<Vec<f64>>> {
    plans.par_iter().map(|plan| table.weigh(plan)).collect()
}

/// One track per requested (observable, method). `closed_form` is skipped for
/// states without a closed form.
///
/// The branch expectations `⟨ψ_k|O|ψ_k⟩` are computed once, up to the largest
/// `k_max` the grid needs, and each time point applies its own weights.
pub fn run_timeseries(
    initial: &InitialState,
    params: &OscillatorParams,
    policy: &TruncationPolicy,
    t_grid: &[f64],
    observables: &[Observable],
    methods: &[Method],
) -> Result<TimeSeries> {
    check_grid(t_grid)?;
    let psi = initial.prepare(policy)?;
    let obs_mats: Vec<_> = observables.iter().map(|o| o.matrix(policy)).collect();
    let mut diagnostics = Diagnostics {
        edge_population: psi.edge_population(),
        ..Diagnostics::default()
    };
    let mut tracks = BTreeMap::new();
    let mut store = |method: Method, per_t: Vec<Vec<f64>>| {
        for (j, &obs) in observables.iter().enumerate() {
            let track = per_t.iter().map(|row| row[j]).collect();
            tracks.insert(track_name(obs, method), track);
        }
    };

    let wants = |m: Method| methods.contains(&m);
    if wants(Method::Series) || wants(Method::DisplacedFrame) {
        let plans = t_grid
            .par_iter()
            .map(|&t| plan_series(params, policy, t))
            .collect::<Result<Vec<_>>>()?;
        let k_max = plans.iter().map(|p| p.k_max).max().unwrap_or(0);
        diagnostics.max_k = k_max;
        diagnostics.max_tail_mass = plans.iter().map(|p| p.tail_mass).fold(0.0, f64::max);

        let (dense, displaced) = rayon::join(
            || -> Result<Option<BranchExpectations>> {
                if !wants(Method::Series) {
                    return Ok(None);
                }
                let kernel = build_kernel(params, policy)?;
                series_branches(&psi, &kernel, k_max, &obs_mats).map(Some)
            },
            || -> Result<Option<BranchExpectations>> {
                if !wants(Method::DisplacedFrame) {
                    return Ok(None);
                }
                displaced_frame_branches(&psi, params, policy, k_max, &obs_mats).map(Some)
            },
        );
        for (method, table) in [
            (Method::Series, dense?),
            (Method::DisplacedFrame, displaced?),
        ] {
            if let Some(table) = table {
                diagnostics.edge_population =
                    diagnostics.edge_population.max(table.max_edge_population());
                store(method, weigh_all(&table, &plans)?);
            }
        }
    }

    if wants(Method::Lindblad) {
        // the integrator starts at t = 0
        let offset = usize::from(t_grid[0] != 0.0);
        let mut grid = Vec::with_capacity(t_grid.len() + offset);
        if offset == 1 {
            grid.push(0.0);
        }
        grid.extend_from_slice(t_grid);
        let run = integrate_lindblad(
            &DensityMatrix::pure(&psi),
            params,
            policy,
            &grid,
            observables,
        )?;
        diagnostics.lindblad_step = Some(run.step);
        diagnostics.lindblad_trace_drift = Some(run.max_trace_drift);
        let per_t = (offset..grid.len())
            .map(|i| run.series.iter().map(|track| track[i]).collect())
            .collect();
        store(Method::Lindblad, per_t);
    }

    if wants(Method::ClosedForm) && initial.has_closed_form() {
        let per_t = t_grid
            .iter()
            .map(|&t| {
                observables
                    .iter()
                    .map(|&o| {
                        initial
                            .closed_form(o, params, t)
                            .expect("state has closed forms")
                    })
                    .collect()
            })
            .collect();
        store(Method::ClosedForm, per_t);
    }

    Ok(TimeSeries {
        times: t_grid.to_vec(),
        tracks,
        diagnostics,
    })
}
