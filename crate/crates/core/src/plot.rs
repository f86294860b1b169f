//! Gnuplot scripts for the CSV tables written by the scenario runner.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    /// Kernel values and envelopes against `r`.
    Kernel,
    /// `‖u(t)‖_{L^q}` against `t`, with the blowup time marked.
    Trajectory,
    /// Largest `L^q` norm against the truncation level.
    Escalation,
}

impl PlotKind {
    pub fn required_columns(self) -> &'static [&'static str] {
        match self {
            PlotKind::Kernel => &["t", "r", "p", "min_form", "sum_form"],
            PlotKind::Trajectory => &["t", "norm_lq", "status"],
            PlotKind::Escalation => &["K", "sup_norm_lq", "t_star"],
        }
    }
}

fn column(header: &[&str], name: &str) -> usize {
    header.iter().position(|h| *h == name).map_or(0, |i| i + 1)
}

/// Writes `<csv stem>.gp` next to the CSV and returns its path.
pub fn emit_plot_script(csv_path: &Path, kind: PlotKind) -> Result<PathBuf> {
    let text = fs::read_to_string(csv_path)?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').map(str::trim).collect();
    let missing: Vec<String> =
        kind.required_columns().iter().filter(|c| !header.contains(c)).map(|c| c.to_string()).collect();
    if !missing.is_empty() {
        return Err(Error::MissingColumns { path: csv_path.display().to_string(), columns: missing });
    }
    let data = csv_path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let out = csv_path.with_extension("gp");
    let png = csv_path.with_extension("png").file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let c = |name| column(&header, name);

    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set terminal pngcairo size 900,600\n");
    s.push_str(&format!("set output '{png}'\n"));
    s.push_str("set key top right\n");
    match kind {
        PlotKind::Kernel => {
            s.push_str("set logscale xy\nset xlabel 'r'\nset ylabel 'density'\n");
            let (r, p, lo, hi) = (c("r"), c("p"), c("min_form"), c("sum_form"));
            s.push_str(&format!(
                "plot '{data}' skip 1 using (${r} > 0 ? ${r} : 1/0):{p} with points pt 7 ps 0.5 title 'p(t,r)', \\\n     \
                 '' skip 1 using (${r} > 0 ? ${r} : 1/0):{lo} with points pt 1 title 'min form', \\\n     \
                 '' skip 1 using (${r} > 0 ? ${r} : 1/0):{hi} with points pt 2 title 'sum form'\n"
            ));
        }
        PlotKind::Trajectory => {
            let (t, norm, status) = (c("t"), c("norm_lq"), column(&header, "status") - 1);
            s.push_str("set xlabel 't'\nset ylabel 'L^q norm'\nset logscale y\n");
            let blowup = lines.find_map(|l| {
                let cells: Vec<&str> = l.split(',').collect();
                (cells.get(status).map(|v| v.trim()) == Some("blowup_detected")).then(|| cells[t - 1].trim().to_string())
            });
            if let Some(ts) = blowup {
                s.push_str(&format!("set arrow from {ts}, graph 0 to {ts}, graph 1 nohead dashtype 2\n"));
                s.push_str(&format!("set label 't* = {ts}' at {ts}, graph 0.95 right offset -1,0\n"));
            }
            s.push_str(&format!("plot '{data}' skip 1 using {t}:{norm} with lines lw 2 title 'norm_lq'\n"));
        }
        PlotKind::Escalation => {
            let (k, sup) = (c("K"), c("sup_norm_lq"));
            s.push_str("set xlabel 'K'\nset ylabel 'sup L^q norm'\nset logscale y\nset xtics 1\n");
            s.push_str(&format!("plot '{data}' skip 1 using {k}:{sup} with linespoints pt 7 lw 2 title 'sup_norm_lq'\n"));
        }
    }
    fs::write(&out, s)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_script_and_marks_blowup() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("run.csv");
        fs::write(&csv, "t,norm_l1,norm_lq,max_value,status\n0,1,1,1,running\n0.1,5,9,40,blowup_detected\n").unwrap();
        let gp = emit_plot_script(&csv, PlotKind::Trajectory).unwrap();
        let text = fs::read_to_string(gp).unwrap();
        assert!(text.contains("set arrow from 0.1"));
        assert!(text.contains("using 1:3"));
    }

    #[test]
    fn missing_columns_are_named() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("k.csv");
        fs::write(&csv, "t,r,p\n1,0,0.3\n").unwrap();
        match emit_plot_script(&csv, PlotKind::Kernel) {
            Err(Error::MissingColumns { columns, .. }) => assert_eq!(columns, vec!["min_form", "sum_form"]),
            other => panic!("{other:?}"),
        }
    }
}
