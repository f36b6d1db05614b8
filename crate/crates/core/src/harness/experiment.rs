use rayon::prelude::*;

use super::config::{field_error, ExperimentConfig, StateSpec, SweepField};
use crate::evolution::{run_timeseries, Diagnostics, InitialState, Method, Observable, TimeSeries};
use crate::fock::{OscillatorParams, SqueezeParameter};
use crate::{Result, C64};

/// Label of the single case of an unswept config.
pub const BASE_CASE: &str = "base";

/// One concrete run: a sweep value applied to the base config.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub label: String,
    pub params: OscillatorParams,
    pub state: InitialState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseResult {
    pub label: String,
    pub series: TimeSeries,
}

fn initial_state(spec: &StateSpec, field: &str) -> Result<InitialState> {
    Ok(match *spec {
        StateSpec::Coherent { alpha } => InitialState::Coherent { alpha },
        StateSpec::Squeezed { alpha, r, theta } => InitialState::Squeezed {
            alpha,
            z: SqueezeParameter::new(r, theta).map_err(|e| field_error(field, e))?,
        },
        StateSpec::Fock { n } => InitialState::Fock { n },
    })
}

/// Sweep cases in configured order, or the single `base` case.
pub fn expand_cases(config: &ExperimentConfig) -> Result<Vec<Case>> {
    let Some(sweep) = &config.sweep else {
        return Ok(vec![Case {
            label: BASE_CASE.to_string(),
            params: config.params,
            state: initial_state(&config.state, "state")?,
        }]);
    };
    sweep
        .values
        .iter()
        .map(|v| {
            let key = sweep.field.key();
            let mut params = config.params;
            let mut state = config.state;
            let x = v.value;
            match (sweep.field, &mut state) {
                (SweepField::Omega, _) => {
                    params = OscillatorParams::new(x, params.lambda(), params.gamma())
                        .map_err(|e| field_error(key, e))?
                }
                (SweepField::Lambda, _) => {
                    params = params.with_lambda(x).map_err(|e| field_error(key, e))?
                }
                (SweepField::Gamma, _) => {
                    params = params.with_gamma(x).map_err(|e| field_error(key, e))?
                }
                (SweepField::AlphaRe, StateSpec::Coherent { alpha })
                | (SweepField::AlphaRe, StateSpec::Squeezed { alpha, .. }) => {
                    *alpha = C64::new(x, alpha.im)
                }
                (SweepField::AlphaIm, StateSpec::Coherent { alpha })
                | (SweepField::AlphaIm, StateSpec::Squeezed { alpha, .. }) => {
                    *alpha = C64::new(alpha.re, x)
                }
                (SweepField::R, StateSpec::Squeezed { r, .. }) => *r = x,
                (SweepField::Theta, StateSpec::Squeezed { theta, .. }) => *theta = x,
                _ => {
                    return Err(crate::Error::validation(
                        "sweep.field",
                        format!("`{key}` is not used by a {} state", state.kind()),
                    ))
                }
            }
            Ok(Case {
                label: format!("{}={}", sweep.field.short(), v.text),
                params,
                state: initial_state(&state, key)?,
            })
        })
        .collect()
}

/// Max-abs gap between two method tracks of one observable.
#[derive(Debug, Clone, PartialEq)]
pub struct PairResult {
    pub observable: Observable,
    pub first: Method,
    pub second: Method,
    pub max_dev: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseReport {
    pub label: String,
    pub pairs: Vec<PairResult>,
    pub diagnostics: Diagnostics,
    /// Edge population and Poisson tail within the policy tolerances.
    pub truncation_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub tolerance: f64,
    pub cases: Vec<CaseReport>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.cases
            .iter()
            .all(|c| c.truncation_ok && c.pairs.iter().all(|p| p.passed))
    }

    /// Plain-text report, one line per comparison and one truncation line
    /// per case.
    pub fn render(&self) -> String {
        let mut out = format!("# tolerance {:e}\n", self.tolerance);
        for case in &self.cases {
            for p in &case.pairs {
                out += &format!(
                    "CASE {} PAIR {} {}/{} MAXDEV {:.6e} {}\n",
                    case.label,
                    p.observable,
                    p.first,
                    p.second,
                    p.max_dev,
                    verdict(p.passed)
                );
            }
            let d = &case.diagnostics;
            let mut line = format!(
                "CASE {} TRUNCATION edge_population {:.3e} max_tail_mass {:.3e} max_k {}",
                case.label, d.edge_population, d.max_tail_mass, d.max_k
            );
            if let (Some(step), Some(drift)) = (d.lindblad_step, d.lindblad_trace_drift) {
                line += &format!(" lindblad_step {step:.3e} lindblad_trace_drift {drift:.3e}");
            }
            out += &format!("{line} {}\n", verdict(case.truncation_ok));
        }
        out += &format!("OVERALL {}\n", verdict(self.passed()));
        out
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn compare(case: &CaseResult, config: &ExperimentConfig, tolerance: f64) -> CaseReport {
    let present: Vec<Method> = config
        .methods
        .iter()
        .copied()
        .filter(|&m| {
            config
                .observables
                .iter()
                .any(|&o| case.series.track(o, m).is_some())
        })
        .collect();
    let mut pairs = Vec::new();
    for &observable in &config.observables {
        for (i, &first) in present.iter().enumerate() {
            for &second in &present[i + 1..] {
                let (Some(a), Some(b)) = (
                    case.series.track(observable, first),
                    case.series.track(observable, second),
                ) else {
                    continue;
                };
                let max_dev = a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
                pairs.push(PairResult {
                    observable,
                    first,
                    second,
                    max_dev,
                    passed: max_dev <= tolerance,
                });
            }
        }
    }
    let d = &case.series.diagnostics;
    let policy = &config.policy;
    let edge_ok = policy.edge_tolerance() == 0.0 || d.edge_population <= policy.edge_tolerance();
    CaseReport {
        label: case.label.clone(),
        pairs,
        diagnostics: d.clone(),
        truncation_ok: edge_ok && d.max_tail_mass <= policy.poisson_tail_tol(),
    }
}

/// Run every sweep case (in parallel, results in configured order) and
/// compare all method pairs against `tolerance`.
pub fn run_experiment(
    config: &ExperimentConfig,
    tolerance: f64,
) -> Result<(Vec<CaseResult>, ValidationReport)> {
    let times = config.grid.times();
    let results = expand_cases(config)?
        .into_par_iter()
        .map(|case| {
            run_timeseries(
                &case.state,
                &case.params,
                &config.policy,
                &times,
                &config.observables,
                &config.methods,
            )
            .map(|series| CaseResult {
                label: case.label.clone(),
                series,
            })
            .map_err(|e| e.in_case(case.label))
        })
        .collect::<Result<Vec<_>>>()?;
    let report = ValidationReport {
        tolerance,
        cases: results
            .iter()
            .map(|r| compare(r, config, tolerance))
            .collect(),
    };
    Ok((results, report))
}
