//! Standalone SVG plots and CSV dumps.
//!
//! Plots are first assembled as a [`Figure`] (data-space series plus the
//! affine map of each panel) and then written out by [`Figure::to_svg`].
//! Output depends only on the inputs, so repeated renders are byte-identical.

use std::fmt::Write as _;

use crate::bspline::{KnotVector, Spline};
use crate::error::{Error, Result};
use crate::ingest::{RateTable, TableFormat};
use crate::phase::{sample_ages, ExtremumKind, PhaseFeatures, PhasePath, RadiusComparison};
use crate::smooth::RateCurve;

/// Stroke colours assigned to series in order: dark grey, then light grey.
pub const DEFAULT_COLORS: [&str; 2] = ["#404040", "#b0b0b0"];
/// Samples per basis function trace.
pub const BASIS_SAMPLES: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub width: f64,
    pub height: f64,
    pub margin: f64,
    pub title: Option<String>,
    pub x_label: String,
    pub y_label: String,
    pub colors: Vec<String>,
    /// Label integer ages along phase paths.
    pub annotate_ages: bool,
}

impl PlotSpec {
    pub fn new(x_label: &str, y_label: &str) -> Self {
        Self {
            width: 640.0,
            height: 480.0,
            margin: 60.0,
            title: None,
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            colors: DEFAULT_COLORS.iter().map(|c| c.to_string()).collect(),
            annotate_ages: true,
        }
    }

    pub fn phase_plane() -> Self {
        Self::new("Velocity", "Acceleration")
    }

    pub fn scatter() -> Self {
        Self::new("Age", "Fertility rate")
    }

    pub fn basis() -> Self {
        Self::new("u", "Basis function value")
    }

    pub fn with_title(mut self, title: &str) -> Self {
        self.title = Some(title.to_string());
        self
    }

    fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.width) || !ok(self.height) || self.margin.is_nan() || self.margin < 0.0 {
            return Err(Error::InvalidPlot("dimensions must be positive".into()));
        }
        if 2.0 * self.margin >= self.width.min(self.height) {
            return Err(Error::InvalidPlot("margins leave no drawing area".into()));
        }
        if self.colors.is_empty() {
            return Err(Error::InvalidPlot("at least one colour is required".into()));
        }
        Ok(())
    }

    fn color(&self, i: usize) -> &str {
        &self.colors[i % self.colors.len()]
    }
}

/// Affine map from a data rectangle onto a pixel rectangle (y pointing down).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    /// Pixel rectangle as `(left, top, width, height)`.
    pub pixels: (f64, f64, f64, f64),
}

impl Transform {
    fn fit(points: impl Iterator<Item = (f64, f64)>, pixels: (f64, f64, f64, f64)) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for (x, y) in points {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let pad = |lo: f64, hi: f64| {
            let span = hi - lo;
            if span > 0.0 {
                (lo - 0.05 * span, hi + 0.05 * span)
            } else {
                let d = if lo.abs() > 0.0 { 0.5 * lo.abs() } else { 1.0 };
                (lo - d, hi + d)
            }
        };
        Self {
            x_range: pad(x0, x1),
            y_range: pad(y0, y1),
            pixels,
        }
    }

    pub fn to_pixel(&self, x: f64, y: f64) -> (f64, f64) {
        let (left, top, w, h) = self.pixels;
        let px = left + (x - self.x_range.0) / (self.x_range.1 - self.x_range.0) * w;
        let py = top + h - (y - self.y_range.0) / (self.y_range.1 - self.y_range.0) * h;
        (px, py)
    }

    pub fn to_data(&self, px: f64, py: f64) -> (f64, f64) {
        let (left, top, w, h) = self.pixels;
        let x = self.x_range.0 + (px - left) / w * (self.x_range.1 - self.x_range.0);
        let y = self.y_range.0 + (top + h - py) / h * (self.y_range.1 - self.y_range.0);
        (x, y)
    }

    /// Data units covered by one pixel along each axis.
    pub fn data_per_pixel(&self) -> (f64, f64) {
        let (_, _, w, h) = self.pixels;
        (
            (self.x_range.1 - self.x_range.0) / w,
            (self.y_range.1 - self.y_range.0) / h,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    Line,
    Points,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub kind: SeriesKind,
    pub color: String,
    pub points: Vec<(f64, f64)>,
    /// Text annotations at data coordinates.
    pub labels: Vec<(f64, f64, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub x_label: String,
    pub y_label: String,
    pub transform: Transform,
    pub series: Vec<Series>,
    pub zero_axes: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub width: f64,
    pub height: f64,
    pub title: Option<String>,
    pub panels: Vec<Panel>,
}

fn fmt_tick(v: f64) -> String {
    let a = v.abs();
    let s = if a == 0.0 {
        "0".to_string()
    } else if !(1e-3..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.4}")
    };
    if s.contains('.') && !s.contains('e') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

impl Figure {
    fn build(spec: &PlotSpec, panels: Vec<(String, String, Vec<Series>, bool)>) -> Result<Self> {
        spec.validate()?;
        let count = panels.len();
        let m = spec.margin;
        let panels = panels
            .into_iter()
            .enumerate()
            .map(|(k, (x_label, y_label, series, zero_axes))| {
                let top = k as f64 * spec.height + m;
                let rect = (m, top, spec.width - 2.0 * m, spec.height - 2.0 * m);
                let mut pts = series
                    .iter()
                    .flat_map(|s| s.points.iter().copied())
                    .collect::<Vec<_>>();
                if zero_axes {
                    if let Some(&(x, y)) = pts.first() {
                        pts.push((0.0, y));
                        pts.push((x, 0.0));
                    }
                }
                Panel {
                    x_label,
                    y_label,
                    transform: Transform::fit(pts.into_iter(), rect),
                    series,
                    zero_axes,
                }
            })
            .collect();
        Ok(Self {
            width: spec.width,
            height: spec.height * count as f64,
            title: spec.title.clone(),
            panels,
        })
    }

    pub fn to_svg(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#
        );
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
            w = self.width,
            h = self.height
        );
        let _ = writeln!(
            s,
            r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#,
            self.width, self.height
        );
        if let Some(t) = &self.title {
            let _ = writeln!(
                s,
                r#"<text x="{:.3}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
                self.width / 2.0,
                escape(t)
            );
        }
        for panel in &self.panels {
            panel.write_svg(&mut s);
        }
        s.push_str("</svg>\n");
        s
    }
}

impl Panel {
    fn write_svg(&self, s: &mut String) {
        let t = &self.transform;
        let (left, top, w, h) = t.pixels;
        let _ = writeln!(
            s,
            r##"<rect class="frame" x="{left:.3}" y="{top:.3}" width="{w:.3}" height="{h:.3}" fill="none" stroke="#000000"/>"##
        );
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let xv = t.x_range.0 + f * (t.x_range.1 - t.x_range.0);
            let yv = t.y_range.0 + f * (t.y_range.1 - t.y_range.0);
            let (px, _) = t.to_pixel(xv, t.y_range.0);
            let (_, py) = t.to_pixel(t.x_range.0, yv);
            let _ = writeln!(
                s,
                r#"<text class="tick" x="{px:.3}" y="{:.3}" text-anchor="middle" font-family="sans-serif" font-size="10">{}</text>"#,
                top + h + 14.0,
                fmt_tick(xv)
            );
            let _ = writeln!(
                s,
                r#"<text class="tick" x="{:.3}" y="{:.3}" text-anchor="end" font-family="sans-serif" font-size="10">{}</text>"#,
                left - 4.0,
                py + 3.0,
                fmt_tick(yv)
            );
        }
        let _ = writeln!(
            s,
            r#"<text class="axis-label" x="{:.3}" y="{:.3}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
            left + w / 2.0,
            top + h + 36.0,
            escape(&self.x_label)
        );
        let (lx, ly) = (left - 44.0, top + h / 2.0);
        let _ = writeln!(
            s,
            r#"<text class="axis-label" x="{lx:.3}" y="{ly:.3}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 {lx:.3} {ly:.3})">{}</text>"#,
            escape(&self.y_label)
        );
        if self.zero_axes {
            let (x0, _) = t.to_pixel(0.0, 0.0);
            let (_, y0) = t.to_pixel(0.0, 0.0);
            if x0 >= left && x0 <= left + w {
                let _ = writeln!(
                    s,
                    r##"<line class="zero-axis" x1="{x0:.3}" y1="{top:.3}" x2="{x0:.3}" y2="{:.3}" stroke="#808080" stroke-dasharray="4 3"/>"##,
                    top + h
                );
            }
            if y0 >= top && y0 <= top + h {
                let _ = writeln!(
                    s,
                    r##"<line class="zero-axis" x1="{left:.3}" y1="{y0:.3}" x2="{:.3}" y2="{y0:.3}" stroke="#808080" stroke-dasharray="4 3"/>"##,
                    left + w
                );
            }
        }
        for series in &self.series {
            match series.kind {
                SeriesKind::Line => {
                    let pts: Vec<String> = series
                        .points
                        .iter()
                        .map(|&(x, y)| {
                            let (px, py) = t.to_pixel(x, y);
                            format!("{px:.3},{py:.3}")
                        })
                        .collect();
                    let _ = writeln!(
                        s,
                        r#"<polyline class="series" data-name="{}" fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                        escape(&series.name),
                        series.color,
                        pts.join(" ")
                    );
                }
                SeriesKind::Points => {
                    let _ = writeln!(
                        s,
                        r#"<g class="points" data-name="{}" fill="{}">"#,
                        escape(&series.name),
                        series.color
                    );
                    for &(x, y) in &series.points {
                        let (px, py) = t.to_pixel(x, y);
                        let _ = writeln!(s, r#"<circle cx="{px:.3}" cy="{py:.3}" r="2.5"/>"#);
                    }
                    s.push_str("</g>\n");
                }
            }
            for (x, y, text) in &series.labels {
                let (px, py) = t.to_pixel(*x, *y);
                let _ = writeln!(
                    s,
                    r#"<text class="annotation" x="{px:.3}" y="{:.3}" font-family="sans-serif" font-size="8" fill="{}">{}</text>"#,
                    py - 3.0,
                    series.color,
                    escape(text)
                );
            }
        }
    }
}

/// Phase-plane plot: velocity on x, acceleration on y, one polyline per path
/// in age order with integer ages marked along it.
pub fn render_phase_plane(paths: &[(&str, &PhasePath)], spec: &PlotSpec) -> Result<Figure> {
    if paths.is_empty() {
        return Err(Error::InvalidPlot("no paths to draw".into()));
    }
    let mut series = Vec::with_capacity(paths.len());
    for (i, (name, path)) in paths.iter().enumerate() {
        if path.len() < 2 {
            return Err(Error::DegeneratePath(format!(
                "path {name:?} has {} sample(s); at least 2 are needed to draw it",
                path.len()
            )));
        }
        let points = path
            .samples()
            .iter()
            .map(|s| (s.velocity, s.acceleration))
            .collect();
        let mut labels = Vec::new();
        if spec.annotate_ages {
            let (lo, hi) = path.domain();
            let mut age = lo.ceil();
            while age <= hi {
                let p = path.at(age)?;
                labels.push((p.velocity, p.acceleration, format!("{age}")));
                age += 1.0;
            }
        }
        series.push(Series {
            name: name.to_string(),
            kind: SeriesKind::Line,
            color: spec.color(i).to_string(),
            points,
            labels,
        });
    }
    Figure::build(
        spec,
        vec![(spec.x_label.clone(), spec.y_label.clone(), series, true)],
    )
}

/// Observed rates as points with the fitted spline drawn over them.
pub fn render_scatter(curves: &[(&RateCurve, &Spline)], spec: &PlotSpec) -> Result<Figure> {
    if curves.is_empty() {
        return Err(Error::InvalidPlot("no curves to draw".into()));
    }
    let mut series = Vec::new();
    for (i, (curve, spline)) in curves.iter().enumerate() {
        if curve.is_empty() {
            return Err(Error::EmptyCurve);
        }
        let color = spec.color(i).to_string();
        series.push(Series {
            name: format!("{} observed", curve.label()),
            kind: SeriesKind::Points,
            color: color.clone(),
            points: curve.points().collect(),
            labels: Vec::new(),
        });
        let (lo, hi) = spline.domain();
        let fitted = sample_ages(lo, hi, (hi - lo) / 400.0)
            .into_iter()
            .map(|u| Ok((u, spline.eval(u)?)))
            .collect::<Result<Vec<_>>>()?;
        series.push(Series {
            name: format!("{} fitted", curve.label()),
            kind: SeriesKind::Line,
            color,
            points: fitted,
            labels: Vec::new(),
        });
    }
    Figure::build(
        spec,
        vec![(spec.x_label.clone(), spec.y_label.clone(), series, false)],
    )
}

/// `(u, value)` traces of every basis function (or its `order`-th derivative)
/// at [`BASIS_SAMPLES`] equally spaced points.
pub fn basis_traces(kv: &KnotVector, order: usize) -> Result<Vec<Vec<(f64, f64)>>> {
    let (lo, hi) = kv.domain();
    let us: Vec<f64> = (0..BASIS_SAMPLES)
        .map(|k| {
            if k + 1 == BASIS_SAMPLES {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (BASIS_SAMPLES - 1) as f64
            }
        })
        .collect();
    let mut traces = vec![Vec::with_capacity(us.len()); kv.basis_count()];
    for &u in &us {
        for (trace, v) in traces.iter_mut().zip(kv.eval_basis_derivative(u, order)?) {
            trace.push((u, v));
        }
    }
    Ok(traces)
}

/// One polyline per basis function; with `derivative_panel` a second panel
/// holds their first derivatives.
pub fn render_basis(kv: &KnotVector, derivative_panel: bool, spec: &PlotSpec) -> Result<Figure> {
    let make = |order: usize| -> Result<Vec<Series>> {
        Ok(basis_traces(kv, order)?
            .into_iter()
            .enumerate()
            .map(|(i, points)| Series {
                name: format!("N{i}"),
                kind: SeriesKind::Line,
                color: spec.color(i).to_string(),
                points,
                labels: Vec::new(),
            })
            .collect())
    };
    let mut panels = vec![(spec.x_label.clone(), spec.y_label.clone(), make(0)?, false)];
    if derivative_panel {
        panels.push((
            spec.x_label.clone(),
            "First derivative".to_string(),
            make(1)?,
            true,
        ));
    }
    Figure::build(spec, panels)
}

/// Generic line plot of `(x, y)` traces in a single panel.
pub fn render_traces(traces: &[Vec<(f64, f64)>], spec: &PlotSpec) -> Result<Figure> {
    if traces.is_empty() || traces.iter().any(Vec::is_empty) {
        return Err(Error::InvalidPlot("no traces to draw".into()));
    }
    let series = traces
        .iter()
        .enumerate()
        .map(|(i, points)| Series {
            name: format!("trace{i}"),
            kind: SeriesKind::Line,
            color: spec.color(i).to_string(),
            points: points.clone(),
            labels: Vec::new(),
        })
        .collect();
    Figure::build(
        spec,
        vec![(spec.x_label.clone(), spec.y_label.clone(), series, true)],
    )
}

/// `age,velocity,acceleration` rows.
pub fn path_csv(path: &PhasePath) -> String {
    let mut out = String::from("age,velocity,acceleration\n");
    for s in path.samples() {
        let _ = writeln!(out, "{},{},{}", s.age, s.velocity, s.acceleration);
    }
    out
}

pub const LABELLED_PATH_HEADER: &str = "label,age,velocity,acceleration\n";

/// Path rows prefixed with a label column, without header.
pub fn labelled_path_rows(label: &str, path: &PhasePath) -> String {
    let mut out = String::new();
    for s in path.samples() {
        let _ = writeln!(out, "{label},{},{},{}", s.age, s.velocity, s.acceleration);
    }
    out
}

pub const FEATURES_HEADER: &str = "label,feature,age,value\n";

/// Landmark rows for one curve, without header.
pub fn features_rows(label: &str, f: &PhaseFeatures) -> String {
    let mut out = String::new();
    for z in &f.zero_velocity {
        let _ = writeln!(
            out,
            "{label},zero_velocity_{},{},0",
            z.direction.as_str(),
            z.age
        );
    }
    let _ = writeln!(
        out,
        "{label},max_positive_velocity,{},{}",
        f.max_positive_velocity_age, f.max_positive_velocity
    );
    let _ = writeln!(
        out,
        "{label},max_negative_velocity,{},{}",
        f.max_negative_velocity_age, f.max_negative_velocity
    );
    for e in &f.velocity_local_extrema {
        let kind = match e.kind {
            ExtremumKind::Max => "velocity_local_max",
            ExtremumKind::Min => "velocity_local_min",
        };
        let _ = writeln!(out, "{label},{kind},{},{}", e.age, e.value);
    }
    let _ = writeln!(out, "{label},max_radius,,{}", f.radius.max_radius);
    let _ = writeln!(out, "{label},mean_radius,,{}", f.radius.mean_radius);
    let _ = writeln!(out, "{label},skew,,{}", f.skew.as_str());
    let _ = writeln!(out, "{label},bimodal,,{}", f.bimodal);
    out
}

pub fn features_csv(label: &str, f: &PhaseFeatures) -> String {
    format!("{FEATURES_HEADER}{}", features_rows(label, f))
}

/// The table in long layout, readable by [`crate::ingest::parse_table`].
pub fn table_csv(table: &RateTable) -> Result<String> {
    table.to_csv(TableFormat::Long)
}

/// Observed and fitted values at each observed age.
pub fn fit_rows(curve: &RateCurve, spline: &Spline) -> Result<String> {
    let mut out = String::new();
    for (age, rate) in curve.points() {
        let _ = writeln!(out, "{},{age},{rate},{}", curve.label(), spline.eval(age)?);
    }
    Ok(out)
}

pub const FIT_HEADER: &str = "year,age,rate,fitted\n";

pub fn comparison_csv(label_a: &str, label_b: &str, c: &RadiusComparison) -> String {
    format!(
        "a,b,max_radius_a,max_radius_b,ratio,velocity_scale,acceleration_scale\n{label_a},{label_b},{},{},{},{},{}\n",
        c.max_radius_a, c.max_radius_b, c.ratio, c.velocity_scale, c.acceleration_scale
    )
}
