//! Standalone gnuplot scripts for the CSV reports. Data is embedded as
//! inline data blocks, so a script runs without the CSV next to it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::counterexample::{FIT_HEADER, SWEEP_HEADER};
use crate::error::{KpError, Result};
use crate::estimates::ESTIMATES_HEADER;
use crate::evolution::stepper::DIAGNOSTICS_HEADER;
use crate::fit::loglog_fit;
use crate::norms::CSV_HEADER as NORMS_HEADER;

const REFINEMENT_HEADER: &str = "estimate_id,coarse_max,fine_max,relative_change";
const PICARD_HEADER: &str = "iteration,difference,ratio";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schema {
    Empty,
    Diagnostics,
    Estimates,
    Sweep,
    Fit,
    Norms,
    Refinement,
    Picard,
}

pub fn detect_schema(text: &str) -> Result<Schema> {
    let Some(header) = text.lines().map(str::trim).find(|l| !l.is_empty()) else {
        return Ok(Schema::Empty);
    };
    Ok(match header {
        DIAGNOSTICS_HEADER => Schema::Diagnostics,
        ESTIMATES_HEADER => Schema::Estimates,
        SWEEP_HEADER => Schema::Sweep,
        FIT_HEADER => Schema::Fit,
        NORMS_HEADER => Schema::Norms,
        REFINEMENT_HEADER => Schema::Refinement,
        PICARD_HEADER => Schema::Picard,
        other => return Err(KpError::UnknownSchema(other.to_string())),
    })
}

fn rows(text: &str) -> Vec<Vec<&str>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect()
}

fn block(out: &mut String, name: &str, lines: impl IntoIterator<Item = String>) {
    writeln!(out, "${name} << EOD").unwrap();
    for l in lines {
        writeln!(out, "{l}").unwrap();
    }
    writeln!(out, "EOD").unwrap();
}

fn num(s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| KpError::UnknownSchema(format!("non-numeric field `{s}`")))
}

/// Gnuplot script for a report; `stem` names the PNG it writes.
pub fn plot_script(text: &str, stem: &str) -> Result<String> {
    let schema = detect_schema(text)?;
    let mut s = String::new();
    writeln!(s, "set terminal pngcairo size 900,600").unwrap();
    writeln!(s, "set output '{stem}.png'").unwrap();
    writeln!(s, "set datafile separator whitespace").unwrap();
    let data = rows(text);
    match schema {
        Schema::Empty => {
            writeln!(s, "set title 'empty report'").unwrap();
        }
        Schema::Diagnostics => {
            block(&mut s, "diag", data.iter().map(|r| r.join(" ")));
            writeln!(s, "set xlabel 't'\nset ylabel 'L2'\nset y2label 'H'\nset y2tics\nset ytics nomirror").unwrap();
            writeln!(
                s,
                "plot $diag using 1:2 with lines title 'L2', $diag using 1:3 axes x1y2 with lines title 'Hamiltonian'"
            )
            .unwrap();
        }
        Schema::Estimates => {
            let mut by: BTreeMap<&str, Vec<String>> = BTreeMap::new();
            for r in data.iter().filter(|r| r.len() == 5 && r[1] != "max" && r[1] != "median") {
                by.entry(r[0]).or_default().push(format!("{} {}", r[1], r[4]));
            }
            for (id, lines) in &by {
                block(&mut s, id, lines.iter().cloned());
            }
            writeln!(s, "set xlabel 'seed'\nset ylabel 'lhs / rhs'\nset logscale y").unwrap();
            if !by.is_empty() {
                let parts: Vec<String> = by
                    .keys()
                    .map(|id| format!("${id} using 1:2 with points title '{}'", id.replace('_', " ")))
                    .collect();
                writeln!(s, "plot {}", parts.join(", ")).unwrap();
            }
        }
        Schema::Sweep => {
            let mut by: BTreeMap<String, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
            for r in data.iter().filter(|r| r.len() == 8) {
                let e = by.entry(r[1].to_string()).or_default();
                e.0.push(num(r[0])?);
                e.1.push(num(r[7])?);
            }
            writeln!(s, "set xlabel 'N'\nset ylabel 'ratio indicator'\nset logscale xy").unwrap();
            let mut parts = Vec::new();
            for (k, (eps, (n, y))) in by.iter().enumerate() {
                let name = format!("eps{k}");
                block(&mut s, &name, n.iter().zip(y).map(|(a, b)| format!("{a} {b}")));
                let e = num(eps)?;
                parts.push(format!("${name} using 1:2 with points pt 7 title 'eps = {e}'"));
                if let Ok(f) = loglog_fit(n, y) {
                    parts.push(format!(
                        "exp({:.17e}) * x**({:.17e}) with lines dt 2 title sprintf('fit eps = {e}: slope %.3f', {:.17e})",
                        f.intercept, f.slope, f.slope
                    ));
                }
            }
            if !parts.is_empty() {
                writeln!(s, "plot {}", parts.join(", ")).unwrap();
            }
        }
        Schema::Fit => {
            block(&mut s, "fit", data.iter().filter(|r| r.len() == 4).map(|r| format!("{} {}", r[0], r[1])));
            writeln!(s, "set xlabel 'eps'\nset ylabel 'growth exponent'").unwrap();
            writeln!(
                s,
                "plot $fit using 1:2 with linespoints title 'fitted slope', (x < 0.25 ? 0.25 - x : 0) title '1/4 - eps'"
            )
            .unwrap();
        }
        Schema::Norms => {
            block(
                &mut s,
                "norms",
                data.iter()
                    .filter(|r| r.len() == 8)
                    .enumerate()
                    .map(|(k, r)| format!("{k} {}", r[6])),
            );
            writeln!(s, "set xlabel 'entry'\nset ylabel 'shell contribution'\nset logscale y").unwrap();
            writeln!(s, "plot $norms using 1:2 with impulses title 'contribution'").unwrap();
        }
        Schema::Refinement => {
            block(
                &mut s,
                "refine",
                data.iter()
                    .filter(|r| r.len() == 4)
                    .enumerate()
                    .map(|(k, r)| format!("{k} {} {} \"{}\"", r[1], r[2], r[0])),
            );
            writeln!(s, "set ylabel 'max ratio'\nset xtics rotate by -45").unwrap();
            writeln!(
                s,
                "plot $refine using 1:2:xtic(4) with points title 'coarse', $refine using 1:3 with points title 'fine'"
            )
            .unwrap();
        }
        Schema::Picard => {
            block(&mut s, "picard", data.iter().filter(|r| r.len() >= 2).map(|r| format!("{} {}", r[0], r[1])));
            writeln!(s, "set xlabel 'iteration'\nset ylabel 'iterate difference'\nset logscale y").unwrap();
            writeln!(s, "plot $picard using 1:2 with linespoints title 'difference'").unwrap();
        }
    }
    Ok(s)
}

/// Write `<csv stem>.gp` next to the report and return its path.
pub fn emit_plot_script(csv: &Path) -> Result<PathBuf> {
    let text = fs::read_to_string(csv)?;
    let stem = csv
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    let script = plot_script(&text, &stem)?;
    let out = csv.with_extension("gp");
    fs::write(&out, script)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schemas() {
        assert_eq!(detect_schema("").unwrap(), Schema::Empty);
        assert_eq!(detect_schema("t,l2,hamiltonian,energy_norm\n0,1,2,3\n").unwrap(), Schema::Diagnostics);
        assert!(matches!(detect_schema("a,b\n1,2\n"), Err(KpError::UnknownSchema(_))));
    }

    #[test]
    fn sweep_script_annotates_the_slope() {
        let mut csv = format!("{SWEEP_HEADER}\n");
        for n in [16.0f64, 32.0, 64.0, 128.0] {
            writeln!(csv, "{n},0,1,1,1,1,1,{}", 2.0 * n.powf(0.25)).unwrap();
        }
        let s = plot_script(&csv, "sweep").unwrap();
        assert!(s.contains("set logscale xy"));
        assert!(s.contains("sprintf('fit eps = 0: slope %.3f'"));
        assert!(s.contains("$eps0 << EOD\n16 4\n"));
    }

    #[test]
    fn empty_report_plots_nothing() {
        let s = plot_script("", "empty").unwrap();
        assert!(!s.contains("plot "));
        let e = plot_script(&format!("{ESTIMATES_HEADER}\n"), "e").unwrap();
        assert!(!e.contains("\nplot "));
    }
}
