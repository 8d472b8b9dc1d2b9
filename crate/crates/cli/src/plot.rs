//! SVG figures: |u(t, x)| heatmaps and line charts.

use std::path::Path;

use anyhow::{anyhow, Result};
use mcnls::Field;
use plotters::prelude::*;

const MAX_COLUMNS: usize = 128;
const MAX_ROWS: usize = 100;

/// |u| along the x axis; in d = 2 the slice y = 0.
pub fn abs_slice(field: &Field) -> Vec<(f64, f64)> {
    let g = field.grid;
    let n = g.points_per_axis();
    let stride = n.div_ceil(MAX_COLUMNS);
    (0..n)
        .step_by(stride)
        .map(|a| {
            let i = if g.dim() == 1 { a } else { a * n + n / 2 };
            (g.coord(a), field.values[i].norm())
        })
        .collect()
}

fn color(v: f64) -> HSLColor {
    let v = v.clamp(0.0, 1.0);
    HSLColor(0.7 * (1.0 - v), 0.85, 0.15 + 0.5 * v)
}

/// Rows of |u| at the given (possibly unevenly spaced) times.
pub fn heatmap(path: &Path, title: &str, times: &[f64], fields: &[Field]) -> Result<()> {
    if fields.is_empty() {
        return Err(anyhow!("heatmap of an empty trajectory"));
    }
    let row_stride = fields.len().div_ceil(MAX_ROWS);
    let picks: Vec<usize> = (0..fields.len()).step_by(row_stride).collect();
    let rows: Vec<Vec<(f64, f64)>> = picks.iter().map(|&k| abs_slice(&fields[k])).collect();
    let peak = rows.iter().flatten().map(|p| p.1).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let g = fields[0].grid;
    let dx = g.spacing() * g.points_per_axis().div_ceil(MAX_COLUMNS) as f64;
    let ts: Vec<f64> = picks.iter().map(|&k| times[k]).collect();
    let gap = if ts.len() > 1 { ts[ts.len() - 1] - ts[ts.len() - 2] } else { 1.0 };
    let t_top = ts[ts.len() - 1] + gap;

    let root = SVGBackend::new(path, (800, 600)).into_drawing_area();
    root.fill(&WHITE)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(10)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(-g.half_width()..g.half_width(), ts[0]..t_top)?;
    chart.configure_mesh().disable_mesh().x_desc("x").y_desc("t").draw()?;
    for (r, row) in rows.iter().enumerate() {
        let t1 = ts.get(r + 1).copied().unwrap_or(t_top);
        chart.draw_series(
            row.iter().map(|&(x, v)| Rectangle::new([(x, ts[r]), (x + dx, t1)], color(v / peak).filled())),
        )?;
    }
    root.present()?;
    Ok(())
}

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), points }
    }

    /// The same series with y replaced by log10(y); nonpositive values are
    /// dropped.
    pub fn log10(mut self) -> Self {
        self.points = self.points.into_iter().filter(|p| p.1 > 0.0).map(|(x, y)| (x, y.log10())).collect();
        self
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
    (lo - pad, hi + pad)
}

pub fn line_chart(path: &Path, title: &str, x_desc: &str, y_desc: &str, series: &[Series]) -> Result<()> {
    let pts = || series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
    let (x0, x1) = padded(pts().map(|p| p.0).fold(f64::INFINITY, f64::min), pts().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max));
    let (y0, y1) = padded(pts().map(|p| p.1).fold(f64::INFINITY, f64::min), pts().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max));

    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(10)
        .x_label_area_size(40)
        .y_label_area_size(70)
        .build_cartesian_2d(x0..x1, y0..y1)?;
    chart.configure_mesh().x_desc(x_desc).y_desc(y_desc).draw()?;
    for (k, s) in series.iter().enumerate() {
        let style = Palette99::pick(k).stroke_width(2);
        let line: Vec<(f64, f64)> = s.points.iter().copied().filter(|p| p.0.is_finite() && p.1.is_finite()).collect();
        chart
            .draw_series(LineSeries::new(line, style))?
            .label(s.label.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], Palette99::pick(k).stroke_width(2)));
    }
    if series.len() > 1 {
        chart.configure_series_labels().background_style(WHITE.mix(0.8)).border_style(BLACK).draw()?;
    }
    root.present()?;
    Ok(())
}
