use std::fmt::Write as _;
use std::path::Path;

use super::experiment::{CaseResult, ValidationReport, BASE_CASE};
use crate::evolution::{Method, Observable};
use crate::{Error, Result};

/// One CSV column: a track of one case.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub header: String,
    pub case: usize,
    pub track: String,
}

/// Columns after `t`: track names sorted, cases in configured order within
/// each track. Swept cases append `[label]` to the header.
pub fn columns(cases: &[CaseResult]) -> Vec<Column> {
    let mut names: Vec<&String> = cases.iter().flat_map(|c| c.series.tracks.keys()).collect();
    names.sort();
    names.dedup();
    let single = cases.len() == 1 && cases[0].label == BASE_CASE;
    let mut out = Vec::new();
    for name in names {
        for (i, case) in cases.iter().enumerate() {
            if case.series.tracks.contains_key(name) {
                let header = if single {
                    name.clone()
                } else {
                    format!("{name}[{}]", case.label)
                };
                out.push(Column {
                    header,
                    case: i,
                    track: name.clone(),
                });
            }
        }
    }
    out
}

/// CSV text; all cases must share one time grid.
pub fn render_csv(cases: &[CaseResult]) -> Result<String> {
    let Some(first) = cases.first() else {
        return Err(Error::validation("series", "nothing to write"));
    };
    let times = &first.series.times;
    if let Some(c) = cases.iter().find(|c| &c.series.times != times) {
        return Err(Error::InvalidGrid(format!(
            "case `{}` uses a different grid",
            c.label
        )));
    }
    let cols = columns(cases);
    let mut out = String::from("t");
    for c in &cols {
        out.push(',');
        out.push_str(&c.header);
    }
    out.push('\n');
    for (i, t) in times.iter().enumerate() {
        // 17 significant digits round-trip an f64
        write!(out, "{t:.16e}").expect("writing to a String");
        for c in &cols {
            let v = cases[c.case].series.tracks[&c.track][i];
            write!(out, ",{v:.16e}").expect("writing to a String");
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn emit_csv(cases: &[CaseResult], path: &Path) -> Result<()> {
    std::fs::write(path, render_csv(cases)?).map_err(|e| Error::io(path, e))
}

fn axis_label(observables: &[Observable]) -> &'static str {
    match observables {
        [Observable::Quadrature] => "<a^+ + a>",
        [Observable::Number] => "<a^+ a>",
        _ => "expectation value",
    }
}

/// Gnuplot script drawing the primary method (closed form when present,
/// otherwise the first track found) for each case.
///
/// `csv_name` is written as given, so pass a path relative to the script.
pub fn render_plot_script(
    cases: &[CaseResult],
    report: &ValidationReport,
    csv_name: &str,
    title: &str,
) -> String {
    let cols = columns(cases);
    let primary = |obs: Observable| -> Option<String> {
        [
            Method::ClosedForm,
            Method::Series,
            Method::DisplacedFrame,
            Method::Lindblad,
        ]
        .into_iter()
        .map(|m| crate::evolution::track_name(obs, m))
        .find(|name| cols.iter().any(|c| &c.track == name))
    };
    let observables: Vec<Observable> = Observable::ALL
        .into_iter()
        .filter(|&o| primary(o).is_some())
        .collect();

    let mut out = String::new();
    out += &format!("# {title}\n");
    for line in report.render().lines() {
        out += &format!("# {line}\n");
    }
    out += "set datafile separator ','\n";
    out += &format!("set title '{title}'\n");
    out += "set xlabel 't'\n";
    out += &format!("set ylabel '{}'\n", axis_label(&observables));
    out += "set key outside right\n";
    let mut curves = Vec::new();
    for &obs in &observables {
        let track = primary(obs).expect("filtered above");
        for (index, c) in cols.iter().enumerate().filter(|(_, c)| c.track == track) {
            let mut legend = cases[c.case].label.clone();
            if legend == BASE_CASE {
                legend = obs.name().to_string();
            } else if observables.len() > 1 {
                legend = format!("{} {legend}", obs.name());
            }
            // column 1 is t
            curves.push(format!(
                "'{csv_name}' using 1:{} skip 1 with lines title '{legend}'",
                index + 2
            ));
        }
    }
    out += "plot ";
    out += &curves.join(", \\\n     ");
    out.push('\n');
    out
}

pub fn emit_plot_script(
    cases: &[CaseResult],
    report: &ValidationReport,
    csv_name: &str,
    title: &str,
    path: &Path,
) -> Result<()> {
    std::fs::write(path, render_plot_script(cases, report, csv_name, title))
        .map_err(|e| Error::io(path, e))
}
