//! Static SVG line plots of the CSV files written by the other commands.

use std::fmt::Write as _;
use std::path::Path;

use clap::ValueEnum;
use dlab_core::fields::io::{COLUMNS_1D, COLUMNS_2D};
use dlab_core::io::{read_table, IoError};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    /// `t,E`
    Energy,
    /// `t,defect,traceR,slack`
    Defect,
    /// A state CSV; density and momentum against the cell index.
    Profile,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];

struct Series {
    name: String,
    points: Vec<(f64, f64)>,
}

fn load(path: &Path, kind: PlotKind) -> Result<(String, Vec<Series>), IoError> {
    let (accepted, x_col, y_cols): (&[&[&str]], usize, Vec<usize>) = match kind {
        PlotKind::Energy => (&[&["t", "E"]], 0, vec![1]),
        PlotKind::Defect => (&[&["t", "defect", "traceR", "slack"]], 0, vec![1, 2]),
        PlotKind::Profile => (&[COLUMNS_1D, COLUMNS_2D], 0, vec![]),
    };
    let table = read_table(path, accepted)?;
    let (x_name, y_cols, use_row_index) = match kind {
        PlotKind::Profile if table.header.len() == COLUMNS_2D.len() => ("row".to_string(), vec![2, 3, 4], true),
        PlotKind::Profile => ("i".to_string(), vec![1, 2], false),
        _ => (table.header[x_col].clone(), y_cols, false),
    };
    let series = y_cols
        .iter()
        .map(|&c| Series {
            name: table.header[c].clone(),
            points: table
                .rows
                .iter()
                .enumerate()
                .map(|(r, (_, v))| (if use_row_index { r as f64 } else { v[x_col] }, v[c]))
                .collect(),
        })
        .collect();
    Ok((x_name, series))
}

/// Axis range with a little padding; flat data gets a unit-width band.
fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let span = hi - lo;
    if span <= 1e-12 * lo.abs().max(1.0) {
        let pad = 0.5 * lo.abs().max(1.0);
        (lo - pad, hi + pad)
    } else {
        (lo - 0.05 * span, hi + 0.05 * span)
    }
}

/// Renders the SVG text; identical input gives identical bytes.
fn render(title: &str, x_name: &str, series: &[Series]) -> String {
    let (x0, x1) = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ =
        writeln!(s, r#"<text x="{}" y="24" font-size="14" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{m:.2},{t:.2} L{m:.2},{b:.2} L{r:.2},{b:.2}" stroke="black" fill="none"/>"#,
        m = MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="middle">{:.4e}</text>"#,
            sx(xv),
            HEIGHT - MARGIN + 16.0,
            xv
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{:.4e}</text>"#,
            MARGIN - 4.0,
            sy(yv) + 3.0,
            yv
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 14.0,
        escape(x_name)
    );
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut d = String::new();
        for (j, &(x, y)) in ser.points.iter().enumerate() {
            let _ = write!(d, "{}{:.2},{:.2}", if j == 0 { "M" } else { " L" }, sx(x), sy(y));
        }
        let _ = writeln!(s, r#"<path d="{d}" stroke="{color}" stroke-width="1.5" fill="none"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" fill="{color}">{}</text>"#,
            WIDTH - MARGIN + 4.0,
            MARGIN + 14.0 * i as f64,
            escape(&ser.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Reads `csv`, renders it and writes `out`.
pub fn cmd_plot(csv: &Path, kind: PlotKind, out: &Path) -> Result<(), CliError> {
    let (x_name, series) = load(csv, kind)?;
    let title = csv.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
    }
    std::fs::write(out, render(&title, &x_name, &series))
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", out.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_series_renders_a_horizontal_line() {
        let s = [Series { name: "E".into(), points: vec![(0.0, 1.0), (1.0, 1.0)] }];
        let svg = render("energy", "t", &s);
        assert!(svg.contains(r#"d="M83.64,200.00 L556.36,200.00""#), "{svg}");
        assert_eq!(svg, render("energy", "t", &s));
    }

    #[test]
    fn column_mismatch_names_the_expected_columns() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        std::fs::write(&p, "t,X\n0,1\n").unwrap();
        let e = cmd_plot(&p, PlotKind::Energy, &dir.path().join("x.svg")).unwrap_err().to_string();
        assert!(e.contains("expected columns `t,E`"), "{e}");
    }
}
