//! Static SVG line plots from CSV files: one stacked panel per requested
//! column, each plotted against the file's first column.

use std::fmt::Write as _;
use std::path::Path;

use super::csv_out::write_file;
use super::format_real;
use crate::error::{Error, Result};

const WIDTH: f64 = 720.0;
const PANEL_HEIGHT: f64 = 200.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 28.0;
const BOTTOM: f64 = 42.0;
const TICKS: usize = 5;

struct Table {
    x_name: String,
    xs: Vec<f64>,
    columns: Vec<(String, Vec<Option<f64>>)>,
}

fn read_table(csv_text: &str, columns: &[&str], source: &str) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(csv_text.as_bytes());
    let bad = |m: String| Error::InvalidArgument(format!("{source}: {m}"));
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let x_name = headers
        .get(0)
        .ok_or_else(|| bad("no columns".into()))?
        .to_string();
    let mut idx = Vec::with_capacity(columns.len());
    for &name in columns {
        let i = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| bad(format!("missing column {name:?}")))?;
        idx.push(i);
    }
    let mut xs = Vec::new();
    let mut ys: Vec<Vec<Option<f64>>> = vec![Vec::new(); columns.len()];
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let x: f64 = record
            .get(0)
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| bad(format!("data row {} has no numeric {x_name}", row + 1)))?;
        xs.push(x);
        for (k, &i) in idx.iter().enumerate() {
            ys[k].push(record.get(i).and_then(|v| v.trim().parse().ok()));
        }
    }
    if xs.is_empty() {
        return Err(bad("no data rows".into()));
    }
    Ok(Table {
        x_name,
        xs,
        columns: columns.iter().map(|c| c.to_string()).zip(ys).collect(),
    })
}

fn padded_range(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.5 };
        (lo - pad, hi + pad)
    }
}

/// SVG text for `columns` of `csv_text`.
pub fn render_svg(csv_text: &str, columns: &[&str]) -> Result<String> {
    svg_for(csv_text, columns, "csv")
}

fn svg_for(csv_text: &str, columns: &[&str], source: &str) -> Result<String> {
    if columns.is_empty() {
        return Err(Error::InvalidArgument("no columns requested".into()));
    }
    let table = read_table(csv_text, columns, source)?;
    let height = PANEL_HEIGHT * columns.len() as f64;
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = PANEL_HEIGHT - TOP - BOTTOM;
    let (x_lo, x_hi) = padded_range(
        table.xs.iter().copied().fold(f64::INFINITY, f64::min),
        table.xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();

    for (panel, (name, ys)) in table.columns.iter().enumerate() {
        let oy = panel as f64 * PANEL_HEIGHT;
        let present = ys.iter().flatten().copied();
        let (y_lo, y_hi) = padded_range(
            present.clone().fold(f64::INFINITY, f64::min),
            present.fold(f64::NEG_INFINITY, f64::max),
        );
        if !y_lo.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "column {name:?} has no numeric values"
            )));
        }
        let px = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
        let py = |y: f64| oy + TOP + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h;

        writeln!(
            svg,
            r#"<rect x="{LEFT}" y="{:.2}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#,
            oy + TOP
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{name}</text>"#,
            LEFT + plot_w / 2.0,
            oy + TOP - 8.0
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + plot_w / 2.0,
            oy + PANEL_HEIGHT - 6.0,
            table.x_name
        )
        .unwrap();
        for t in 0..TICKS {
            let frac = t as f64 / (TICKS - 1) as f64;
            let xv = x_lo + frac * (x_hi - x_lo);
            let yv = y_lo + frac * (y_hi - y_lo);
            writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                px(xv),
                oy + TOP + plot_h + 14.0,
                format_real(xv)
            )
            .unwrap();
            writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                LEFT - 6.0,
                py(yv) + 4.0,
                format_real(yv)
            )
            .unwrap();
        }

        // gaps in the column split the series into separate polylines
        let mut segment: Vec<String> = Vec::new();
        let flush = |segment: &mut Vec<String>, svg: &mut String| {
            if !segment.is_empty() {
                writeln!(
                    svg,
                    r#"<polyline fill="none" stroke="steelblue" stroke-width="1.2" points="{}"/>"#,
                    segment.join(" ")
                )
                .unwrap();
                segment.clear();
            }
        };
        for (x, y) in table.xs.iter().zip(ys) {
            match y {
                Some(y) => segment.push(format!("{:.2},{:.2}", px(*x), py(*y))),
                None => flush(&mut segment, &mut svg),
            }
        }
        flush(&mut segment, &mut svg);
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Reads `csv_path` and writes an SVG with one panel per column.
pub fn render_plot(csv_path: &Path, columns: &[&str], out_path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(csv_path).map_err(|e| Error::io(csv_path, e))?;
    let svg = svg_for(&text, columns, &csv_path.display().to_string())?;
    write_file(out_path, &svg)
}
