//! Experiment configuration.
//!
//! A config file is a TOML document of dotted keys, for example
//!
//! ```toml
//! params.omega = 4.0
//! params.lambda = 0.7
//! params.gamma = 10.0
//! state.kind = "squeezed"
//! state.alpha_re = 4.0
//! state.r = 0.3
//! state.theta = "pi/2"
//! ```
//!
//! Angles and other reals may also be written as strings using `pi`
//! (`"pi"`, `"pi/2"`, `"3*pi/4"`, `"2pi"`).

use std::path::Path;

use toml::{Table, Value};

use crate::evolution::{Method, Observable};
use crate::fock::{OscillatorParams, SqueezeParameter, TruncationPolicy};
use crate::{Error, Result, C64};

pub const DEFAULT_T_START: f64 = 0.0;
pub const DEFAULT_T_END: f64 = 10.0;
pub const DEFAULT_POINTS: usize = 1001;

/// Initial-state descriptor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateSpec {
    Coherent { alpha: C64 },
    Squeezed { alpha: C64, r: f64, theta: f64 },
    Fock { n: usize },
}

impl StateSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            StateSpec::Coherent { .. } => "coherent",
            StateSpec::Squeezed { .. } => "squeezed",
            StateSpec::Fock { .. } => "fock",
        }
    }

    pub fn has_closed_form(&self) -> bool {
        !matches!(self, StateSpec::Fock { .. })
    }
}

/// Uniform grid `t_start..=t_end` with `points` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub t_start: f64,
    pub t_end: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn times(&self) -> Vec<f64> {
        let span = self.t_end - self.t_start;
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.t_end
                } else {
                    self.t_start + span * i as f64 / last
                }
            })
            .collect()
    }
}

/// Fields a sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepField {
    Omega,
    Lambda,
    Gamma,
    AlphaRe,
    AlphaIm,
    R,
    Theta,
}

impl SweepField {
    pub const ALL: [SweepField; 7] = [
        SweepField::Omega,
        SweepField::Lambda,
        SweepField::Gamma,
        SweepField::AlphaRe,
        SweepField::AlphaIm,
        SweepField::R,
        SweepField::Theta,
    ];

    /// Config key, e.g. `params.lambda`.
    pub fn key(self) -> &'static str {
        match self {
            SweepField::Omega => "params.omega",
            SweepField::Lambda => "params.lambda",
            SweepField::Gamma => "params.gamma",
            SweepField::AlphaRe => "state.alpha_re",
            SweepField::AlphaIm => "state.alpha_im",
            SweepField::R => "state.r",
            SweepField::Theta => "state.theta",
        }
    }

    /// Short name used in case labels, e.g. `lambda`.
    pub fn short(self) -> &'static str {
        let key = self.key();
        &key[key.find('.').map_or(0, |i| i + 1)..]
    }
}

/// One swept value with its label text as written in the config.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepValue {
    pub value: f64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub field: SweepField,
    pub values: Vec<SweepValue>,
}

/// Fully validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub params: OscillatorParams,
    pub policy: TruncationPolicy,
    pub state: StateSpec,
    pub grid: GridSpec,
    pub observables: Vec<Observable>,
    pub methods: Vec<Method>,
    pub sweep: Option<Sweep>,
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parse and validate config text.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| Error::Parse {
        line: e.span().map_or(1, |s| line_of(text, s.start)),
        message: e.message().trim().to_string(),
    })?;
    Reader::new(table)?.build()
}

const SECTIONS: [(&str, &[&str]); 6] = [
    ("params", &["omega", "lambda", "gamma"]),
    (
        "state",
        &["kind", "alpha_re", "alpha_im", "r", "theta", "n"],
    ),
    ("grid", &["t_start", "t_end", "points"]),
    ("run", &["observables", "methods"]),
    ("sweep", &["field", "values"]),
    (
        "policy",
        &["fock_cutoff", "edge_tolerance", "poisson_tail_tol"],
    ),
];

/// Flattened `section.key -> value` view.
struct Reader {
    entries: Vec<(String, Value)>,
}

impl Reader {
    fn new(table: Table) -> Result<Self> {
        let mut entries = Vec::new();
        for (section, value) in table {
            let Some((_, keys)) = SECTIONS.iter().find(|(s, _)| *s == section) else {
                return Err(Error::validation(section, "unknown section"));
            };
            let Value::Table(inner) = value else {
                return Err(Error::validation(
                    section,
                    "expected dotted keys under this section",
                ));
            };
            for (key, value) in inner {
                let full = format!("{section}.{key}");
                if !keys.contains(&key.as_str()) {
                    return Err(Error::validation(full, "unknown key"));
                }
                entries.push((full, value));
            }
        }
        Ok(Reader { entries })
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    fn real(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| real_value(key, v).map(|sv| sv.value))
            .transpose()
    }

    fn required_real(&self, key: &str) -> Result<f64> {
        self.real(key)?
            .ok_or_else(|| Error::validation(key, "required"))
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        self.get(key)
            .map(|v| match v {
                Value::Integer(i) if *i >= 0 => Ok(*i as usize),
                _ => Err(Error::validation(key, "expected a non-negative integer")),
            })
            .transpose()
    }

    fn string(&self, key: &str) -> Result<Option<&str>> {
        self.get(key)
            .map(|v| {
                v.as_str()
                    .ok_or_else(|| Error::validation(key, "expected a string"))
            })
            .transpose()
    }

    /// A string list, written as an array or a single comma-separated string.
    fn names(&self, key: &str) -> Result<Option<Vec<String>>> {
        let Some(v) = self.get(key) else {
            return Ok(None);
        };
        let names: Vec<String> = match v {
            Value::String(s) => s.split(',').map(|p| p.trim().to_string()).collect(),
            Value::Array(items) => items
                .iter()
                .map(|i| {
                    i.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| Error::validation(key, "expected strings"))
                })
                .collect::<Result<_>>()?,
            _ => return Err(Error::validation(key, "expected a list of names")),
        };
        if names.is_empty() || names.iter().any(String::is_empty) {
            return Err(Error::validation(key, "empty name"));
        }
        Ok(Some(names))
    }

    fn build(self) -> Result<ExperimentConfig> {
        let params = OscillatorParams::new(
            self.required_real("params.omega")?,
            self.required_real("params.lambda")?,
            self.required_real("params.gamma")?,
        )
        .map_err(|e| field_error("params", e))?;

        let state = self.state()?;
        let grid = self.grid()?;
        let policy = self.policy()?;

        let observables = match self.names("run.observables")? {
            None => Observable::ALL.to_vec(),
            Some(names) => unique(
                "run.observables",
                names
                    .iter()
                    .map(|n| {
                        n.parse::<Observable>()
                            .map_err(|e| Error::validation("run.observables", e))
                    })
                    .collect::<Result<Vec<_>>>()?,
            )?,
        };
        let methods = match self.names("run.methods")? {
            None if state.has_closed_form() => vec![Method::Series, Method::ClosedForm],
            None => vec![Method::Series, Method::DisplacedFrame],
            Some(names) => unique(
                "run.methods",
                names
                    .iter()
                    .map(|n| {
                        n.parse::<Method>()
                            .map_err(|e| Error::validation("run.methods", e.to_string()))
                    })
                    .collect::<Result<Vec<_>>>()?,
            )?,
        };
        if methods.contains(&Method::ClosedForm) && !state.has_closed_form() {
            return Err(Error::validation(
                "run.methods",
                "closed_form needs a coherent or squeezed state",
            ));
        }

        let sweep = self.sweep(&state)?;
        let config = ExperimentConfig {
            params,
            policy,
            state,
            grid,
            observables,
            methods,
            sweep,
        };
        // every sweep case must itself be valid
        super::experiment::expand_cases(&config)?;
        Ok(config)
    }

    fn state(&self) -> Result<StateSpec> {
        let kind = self
            .string("state.kind")?
            .ok_or_else(|| Error::validation("state.kind", "required"))?;
        let allowed: &[&str] = match kind {
            "coherent" => &["state.kind", "state.alpha_re", "state.alpha_im"],
            "squeezed" => &[
                "state.kind",
                "state.alpha_re",
                "state.alpha_im",
                "state.r",
                "state.theta",
            ],
            "fock" => &["state.kind", "state.n"],
            other => {
                return Err(Error::validation(
                    "state.kind",
                    format!("`{other}` is not one of coherent, squeezed, fock"),
                ))
            }
        };
        if let Some((key, _)) = self
            .entries
            .iter()
            .find(|(k, _)| k.starts_with("state.") && !allowed.contains(&k.as_str()))
        {
            return Err(Error::validation(
                key.clone(),
                format!("not used by a {kind} state"),
            ));
        }
        let alpha = C64::new(
            self.real("state.alpha_re")?.unwrap_or(0.0),
            self.real("state.alpha_im")?.unwrap_or(0.0),
        );
        Ok(match kind {
            "coherent" => StateSpec::Coherent { alpha },
            "squeezed" => {
                let r = self.required_real("state.r")?;
                let theta = self.real("state.theta")?.unwrap_or(0.0);
                SqueezeParameter::new(r, theta).map_err(|e| field_error("state", e))?;
                StateSpec::Squeezed { alpha, r, theta }
            }
            _ => StateSpec::Fock {
                n: self
                    .count("state.n")?
                    .ok_or_else(|| Error::validation("state.n", "required"))?,
            },
        })
    }

    fn grid(&self) -> Result<GridSpec> {
        let t_start = self.real("grid.t_start")?.unwrap_or(DEFAULT_T_START);
        let t_end = self.real("grid.t_end")?.unwrap_or(DEFAULT_T_END);
        let points = self.count("grid.points")?.unwrap_or(DEFAULT_POINTS);
        if t_start < 0.0 {
            return Err(Error::validation("grid.t_start", "must be >= 0"));
        }
        if t_end <= t_start {
            return Err(Error::validation(
                "grid.t_end",
                format!("must exceed t_start = {t_start}"),
            ));
        }
        if points < 2 {
            return Err(Error::validation("grid.points", "must be at least 2"));
        }
        Ok(GridSpec {
            t_start,
            t_end,
            points,
        })
    }

    fn policy(&self) -> Result<TruncationPolicy> {
        let mut policy = TruncationPolicy::default();
        if let Some(n) = self.count("policy.fock_cutoff")? {
            policy = policy
                .with_cutoff(n)
                .map_err(|e| field_error("policy.fock_cutoff", e))?;
        }
        if let Some(tol) = self.real("policy.edge_tolerance")? {
            policy = policy
                .with_edge_tolerance(tol)
                .map_err(|e| field_error("policy.edge_tolerance", e))?;
        }
        if let Some(tol) = self.real("policy.poisson_tail_tol")? {
            policy = policy
                .with_poisson_tail_tol(tol)
                .map_err(|e| field_error("policy.poisson_tail_tol", e))?;
        }
        Ok(policy)
    }

    fn sweep(&self, state: &StateSpec) -> Result<Option<Sweep>> {
        let field = self.string("sweep.field")?;
        let values = self.get("sweep.values");
        let (field, values) = match (field, values) {
            (None, None) => return Ok(None),
            (Some(_), None) => {
                return Err(Error::validation(
                    "sweep.values",
                    "required with sweep.field",
                ))
            }
            (None, Some(_)) => {
                return Err(Error::validation(
                    "sweep.field",
                    "required with sweep.values",
                ))
            }
            (Some(f), Some(v)) => (f, v),
        };
        let field = SweepField::ALL
            .into_iter()
            .find(|f| f.key() == field)
            .ok_or_else(|| {
                Error::validation("sweep.field", format!("`{field}` cannot be swept"))
            })?;
        let state_fields: &[SweepField] = match state {
            StateSpec::Coherent { .. } => &[SweepField::AlphaRe, SweepField::AlphaIm],
            StateSpec::Squeezed { .. } => &[
                SweepField::AlphaRe,
                SweepField::AlphaIm,
                SweepField::R,
                SweepField::Theta,
            ],
            StateSpec::Fock { .. } => &[],
        };
        if field.key().starts_with("state.") && !state_fields.contains(&field) {
            return Err(Error::validation(
                "sweep.field",
                format!("`{}` is not used by a {} state", field.key(), state.kind()),
            ));
        }
        let Value::Array(items) = values else {
            return Err(Error::validation("sweep.values", "expected an array"));
        };
        if items.is_empty() {
            return Err(Error::validation("sweep.values", "must not be empty"));
        }
        let values = items
            .iter()
            .map(|v| real_value("sweep.values", v))
            .collect::<Result<Vec<_>>>()?;
        Ok(Some(Sweep { field, values }))
    }
}

pub(crate) fn field_error(field: &str, err: Error) -> Error {
    match err {
        Error::InvalidParameter {
            field: inner,
            reason,
        } => {
            let name = if field.contains('.') {
                field.to_string()
            } else {
                format!("{field}.{inner}")
            };
            Error::validation(name, reason)
        }
        other => Error::validation(field, other.to_string()),
    }
}

fn unique<T: PartialEq>(key: &str, items: Vec<T>) -> Result<Vec<T>> {
    for (i, item) in items.iter().enumerate() {
        if items[..i].contains(item) {
            return Err(Error::validation(key, "listed twice"));
        }
    }
    Ok(items)
}

fn real_value(key: &str, v: &Value) -> Result<SweepValue> {
    let value = match v {
        Value::Float(x) => *x,
        Value::Integer(i) => *i as f64,
        Value::String(s) => parse_pi_expr(s)
            .ok_or_else(|| Error::validation(key, format!("cannot read `{s}` as a number")))?,
        _ => return Err(Error::validation(key, "expected a number")),
    };
    if !value.is_finite() {
        return Err(Error::validation(key, "must be finite"));
    }
    let text = match v {
        Value::String(s) => s.replace(' ', ""),
        _ => format!("{value}"),
    };
    Ok(SweepValue { value, text })
}

/// `x`, `pi`, `k*pi`, `kpi`, each optionally followed by `/d`.
pub fn parse_pi_expr(s: &str) -> Option<f64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().ok()?),
        None => (s.as_str(), 1.0),
    };
    let num = match num.strip_suffix("pi") {
        Some("") => std::f64::consts::PI,
        Some(k) => k.strip_suffix('*').unwrap_or(k).parse::<f64>().ok()? * std::f64::consts::PI,
        None => num.parse::<f64>().ok()?,
    };
    (den != 0.0).then(|| num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const MINIMAL: &str = "params.omega = 4\nparams.lambda = 0.7\nparams.gamma = 10\n\
                           state.kind = \"coherent\"\nstate.alpha_re = 4\n";

    fn field_of(err: Error) -> String {
        match err {
            Error::Validation { field, .. } => field,
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(
            c.grid,
            GridSpec {
                t_start: 0.0,
                t_end: 10.0,
                points: 1001
            }
        );
        assert_eq!(c.policy, TruncationPolicy::default());
        assert_eq!(c.policy.fock_cutoff(), 96);
        assert_eq!(c.policy.edge_tolerance(), 1e-10);
        assert_eq!(c.policy.poisson_tail_tol(), 1e-12);
        assert_eq!(c.observables, Observable::ALL.to_vec());
        assert_eq!(c.methods, vec![Method::Series, Method::ClosedForm]);
        assert_eq!(
            c.state,
            StateSpec::Coherent {
                alpha: C64::new(4.0, 0.0)
            }
        );
        assert!(c.sweep.is_none());
        let times = c.grid.times();
        assert_eq!(times.len(), 1001);
        assert_eq!(times[1000], 10.0);
        assert!((times[1] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn sections_and_dotted_keys_are_equivalent() {
        let sectioned = "[params]\nomega = 4\nlambda = 0.7\ngamma = 10\n\
                         [state]\nkind = \"coherent\"\nalpha_re = 4\n";
        assert_eq!(
            parse_config(sectioned).unwrap(),
            parse_config(MINIMAL).unwrap()
        );
    }

    #[test]
    fn sweep_with_pi_values() {
        let text = "params.omega = 4\nparams.lambda = 0.7\nparams.gamma = 10\n\
                    state.kind = \"squeezed\"\nstate.alpha_re = 4\nstate.r = 0.3\n\
                    sweep.field = \"state.theta\"\nsweep.values = [0, \"pi/2\", \"pi\"]\n";
        let c = parse_config(text).unwrap();
        let sweep = c.sweep.unwrap();
        assert_eq!(sweep.field, SweepField::Theta);
        let values: Vec<f64> = sweep.values.iter().map(|v| v.value).collect();
        assert_eq!(values, vec![0.0, PI / 2.0, PI]);
        let labels: Vec<&str> = sweep.values.iter().map(|v| v.text.as_str()).collect();
        assert_eq!(labels, vec!["0", "pi/2", "pi"]);
    }

    #[test]
    fn pi_expressions() {
        assert_eq!(parse_pi_expr("pi"), Some(PI));
        assert_eq!(parse_pi_expr("pi/2"), Some(PI / 2.0));
        assert_eq!(parse_pi_expr("2*pi"), Some(2.0 * PI));
        assert_eq!(parse_pi_expr("3 pi / 4"), Some(3.0 * PI / 4.0));
        assert_eq!(parse_pi_expr("0.25"), Some(0.25));
        assert_eq!(parse_pi_expr("1/0"), None);
        assert_eq!(parse_pi_expr("tau"), None);
    }

    #[test]
    fn parse_error_reports_line() {
        let text = format!("{MINIMAL}grid.points = = 3\n");
        match parse_config(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("{other:?}"),
        }
        let dup = format!("{MINIMAL}params.gamma = 20\n");
        assert!(matches!(
            parse_config(&dup),
            Err(Error::Parse { line: 6, .. })
        ));
    }

    #[test]
    fn validation_errors_name_the_field() {
        let cases = [
            ("grid.t_start = 5\ngrid.t_end = 2\n", "grid.t_end"),
            ("grid.points = 1\n", "grid.points"),
            ("params.colour = 1\n", "params.colour"),
            ("extra.key = 1\n", "extra"),
            ("run.methods = [\"rk45\"]\n", "run.methods"),
            ("run.observables = [\"position\"]\n", "run.observables"),
            ("state.r = 0.3\n", "state.r"),
            ("sweep.field = \"params.lambda\"\n", "sweep.values"),
            (
                "sweep.field = \"params.lambda\"\nsweep.values = []\n",
                "sweep.values",
            ),
            (
                "sweep.field = \"state.theta\"\nsweep.values = [1]\n",
                "sweep.field",
            ),
            (
                "sweep.field = \"params.gamma\"\nsweep.values = [10, -1]\n",
                "params.gamma",
            ),
            ("policy.fock_cutoff = 1\n", "policy.fock_cutoff"),
            ("run.methods = \"series, series\"\n", "run.methods"),
        ];
        for (extra, field) in cases {
            let err = parse_config(&format!("{MINIMAL}{extra}")).unwrap_err();
            assert_eq!(field_of(err), field, "{extra}");
        }
        let missing = MINIMAL.replace("params.gamma = 10\n", "");
        assert_eq!(
            field_of(parse_config(&missing).unwrap_err()),
            "params.gamma"
        );
        let bad_gamma = MINIMAL.replace("params.gamma = 10", "params.gamma = 0");
        assert_eq!(
            field_of(parse_config(&bad_gamma).unwrap_err()),
            "params.gamma"
        );
    }

    #[test]
    fn fock_state_gating() {
        let base = "params.omega = 4\nparams.lambda = 0.7\nparams.gamma = 10\n\
                    state.kind = \"fock\"\nstate.n = 1\n";
        let c = parse_config(base).unwrap();
        assert_eq!(c.state, StateSpec::Fock { n: 1 });
        assert_eq!(c.methods, vec![Method::Series, Method::DisplacedFrame]);
        let err = parse_config(&format!(
            "{base}run.methods = [\"series\", \"closed_form\"]\n"
        ))
        .unwrap_err();
        assert_eq!(field_of(err), "run.methods");
        let err = parse_config(&format!("{base}state.alpha_re = 1\n")).unwrap_err();
        assert_eq!(field_of(err), "state.alpha_re");
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_config(Path::new("/nonexistent/missing.conf")),
            Err(Error::Io { .. })
        ));
    }
}
