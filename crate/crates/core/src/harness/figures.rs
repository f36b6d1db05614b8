//! Built-in configs reproducing the four published figures.
//!
//! Figures 1 and 2 use `t ∈ [0, 6]` so the tails are visibly settled;
//! Figures 3 and 4 use `t ∈ [0, 3]`, where the envelope is already below
//! 0.01. The squeeze phases `θ ∈ {0, π/2, π}` are our choice. At `θ = π`
//! the state is stretched to `⟨a†a⟩ ≈ 29` and leaks ~2e-10 into the top of
//! a 96-level basis, so the squeezed figures use 128 levels.

use super::config::{parse_config, ExperimentConfig};
use crate::Result;

pub struct Figure {
    /// File stem, e.g. `fig1`.
    pub name: &'static str,
    pub title: &'static str,
    pub config: &'static str,
}

pub const FIGURES: [Figure; 4] = [
    Figure {
        name: "fig1",
        title: "coherent state, alpha = 4: <a^+ + a>",
        config: r#"
params.omega = 4.0
params.lambda = 0.7
params.gamma = 10.0
state.kind = "coherent"
state.alpha_re = 4.0
grid.t_start = 0.0
grid.t_end = 6.0
grid.points = 3001
run.observables = ["quadrature"]
run.methods = ["closed_form", "series"]
sweep.field = "params.lambda"
sweep.values = [0.1, 0.7, 1.5]
"#,
    },
    Figure {
        name: "fig2",
        title: "coherent state, alpha = 4: <a^+ a>",
        config: r#"
params.omega = 4.0
params.lambda = 0.7
params.gamma = 10.0
state.kind = "coherent"
state.alpha_re = 4.0
grid.t_start = 0.0
grid.t_end = 6.0
grid.points = 3001
run.observables = ["number"]
run.methods = ["closed_form", "series"]
sweep.field = "params.lambda"
sweep.values = [0.1, 0.7, 1.5]
"#,
    },
    Figure {
        name: "fig3",
        title: "squeezed state, alpha = 4, r = 0.3, lambda = 0.7: <a^+ + a>",
        config: r#"
params.omega = 4.0
params.lambda = 0.7
params.gamma = 10.0
state.kind = "squeezed"
state.alpha_re = 4.0
state.r = 0.3
policy.fock_cutoff = 128
grid.t_start = 0.0
grid.t_end = 3.0
grid.points = 1501
run.observables = ["quadrature"]
run.methods = ["closed_form", "series"]
sweep.field = "state.theta"
sweep.values = [0, "pi/2", "pi"]
"#,
    },
    Figure {
        name: "fig4",
        title: "squeezed state, alpha = 4, r = 0.3, lambda = 0.7: <a^+ a>",
        config: r#"
params.omega = 4.0
params.lambda = 0.7
params.gamma = 10.0
state.kind = "squeezed"
state.alpha_re = 4.0
state.r = 0.3
policy.fock_cutoff = 128
grid.t_start = 0.0
grid.t_end = 3.0
grid.points = 1501
run.observables = ["number"]
run.methods = ["closed_form", "series"]
sweep.field = "state.theta"
sweep.values = [0, "pi/2", "pi"]
"#,
    },
];

impl Figure {
    pub fn load(&self) -> Result<ExperimentConfig> {
        parse_config(self.config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{Method, Observable};
    use crate::harness::config::{StateSpec, SweepField};

    #[test]
    fn all_figures_parse() {
        for fig in &FIGURES {
            let c = fig.load().unwrap();
            assert_eq!(c.methods, vec![Method::ClosedForm, Method::Series]);
            assert_eq!(c.sweep.as_ref().unwrap().values.len(), 3);
        }
        let f1 = FIGURES[0].load().unwrap();
        assert_eq!(f1.observables, vec![Observable::Quadrature]);
        assert_eq!(f1.sweep.unwrap().field, SweepField::Lambda);
        let f4 = FIGURES[3].load().unwrap();
        assert_eq!(f4.observables, vec![Observable::Number]);
        assert!(matches!(f4.state, StateSpec::Squeezed { r, .. } if r == 0.3));
    }
}
