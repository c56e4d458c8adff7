//! Standalone SVG rendering of column data: 2-D scatter or line plots, and
//! 3-D scatter plots drawn through an orthographic projection.
//!
//! Output is deterministic for a given [`PlotSpec`] and uses only the
//! `svg`, `g`, `line`, `circle`, `polyline` and `text` elements.

use std::fmt::Write as _;

use thiserror::Error;

pub const DEFAULT_WIDTH: u32 = 800;
pub const DEFAULT_HEIGHT: u32 = 600;
pub const DEFAULT_MARGIN: u32 = 60;
pub const DEFAULT_YAW: f64 = 30.0;
pub const DEFAULT_PITCH: f64 = 20.0;

const TICK_TARGET: usize = 6;
const GLYPH_RADIUS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlotError {
    #[error("nothing to plot: no points")]
    NoPoints,
    #[error("canvas {width}x{height} is smaller than 100x100 or leaves no room inside the margins")]
    CanvasTooSmall { width: u32, height: u32 },
    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("invalid tick range: {0}")]
    TickRange(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlotStyle {
    #[default]
    Scatter,
    Line,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Points {
    Planar(Vec<(f64, f64)>),
    Spatial(Vec<(f64, f64, f64)>),
}

impl Points {
    pub fn len(&self) -> usize {
        match self {
            Points::Planar(p) => p.len(),
            Points::Spatial(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// View angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub yaw: f64,
    pub pitch: f64,
}

impl Default for Projection {
    fn default() -> Self {
        Projection {
            yaw: DEFAULT_YAW,
            pitch: DEFAULT_PITCH,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub points: Points,
    pub style: PlotStyle,
    /// Used for spatial points; `None` means the default view.
    pub projection: Option<Projection>,
    pub width: u32,
    pub height: u32,
    pub margin: u32,
    pub labels: Vec<String>,
}

impl PlotSpec {
    pub fn new(points: Points) -> Self {
        PlotSpec {
            points,
            style: PlotStyle::Scatter,
            projection: None,
            width: DEFAULT_WIDTH,
            height: DEFAULT_HEIGHT,
            margin: DEFAULT_MARGIN,
            labels: Vec::new(),
        }
    }
}

/// An axis after tick selection; the display range spans the first to the
/// last tick.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub data_min: f64,
    pub data_max: f64,
    pub ticks: Vec<f64>,
    pub label: String,
}

impl Axis {
    pub fn new(data_min: f64, data_max: f64, label: impl Into<String>) -> Result<Axis, PlotError> {
        let (lo, hi) = if data_min == data_max {
            // 0.5 vanishes next to large magnitudes; widen relatively there.
            let half = if data_min - 0.5 < data_min + 0.5 {
                0.5
            } else {
                data_min.abs() * 1e-6
            };
            (data_min - half, data_max + half)
        } else {
            (data_min, data_max)
        };
        // Near the ends of the f64 range no round tick may cover the data;
        // the bounds themselves still make a usable axis.
        let ticks = match nice_ticks(lo, hi, TICK_TARGET) {
            Ok(ticks) => ticks,
            Err(_) if lo.is_finite() && hi.is_finite() && lo < hi => vec![lo, hi],
            Err(e) => return Err(e),
        };
        Ok(Axis {
            data_min,
            data_max,
            ticks,
            label: label.into(),
        })
    }

    pub fn display_min(&self) -> f64 {
        self.ticks[0]
    }

    pub fn display_max(&self) -> f64 {
        self.ticks[self.ticks.len() - 1]
    }
}

/// Index range of the ticks covering `[min, max]` for `step`, judged on the
/// tick values actually emitted so rounding in `bound / step` cannot leave a
/// bound uncovered or add a spare tick.
fn tick_index_range(min: f64, max: f64, mantissa: i64, exponent: i32) -> Option<(i64, i64)> {
    let step = mantissa as f64 * 10f64.powi(exponent);
    let (qlo, qhi) = ((min / step).floor(), (max / step).ceil());
    // Keep indices exactly representable.
    const LIMIT: f64 = (1u64 << 52) as f64;
    if !(qlo.abs() < LIMIT && qhi.abs() < LIMIT) {
        return None;
    }
    let (mut lo, mut hi) = (qlo as i64, qhi as i64);
    while tick_value(lo, mantissa, exponent) > min {
        lo -= 1;
    }
    while tick_value(lo + 1, mantissa, exponent) <= min {
        lo += 1;
    }
    while tick_value(hi, mantissa, exponent) < max {
        hi += 1;
    }
    while tick_value(hi - 1, mantissa, exponent) >= max {
        hi -= 1;
    }
    tick_value(hi, mantissa, exponent).is_finite().then_some((lo, hi))
}

fn tick_value(index: i64, mantissa: i64, exponent: i32) -> f64 {
    let units = (index * mantissa) as f64;
    if exponent >= 0 {
        units * 10f64.powi(exponent)
    } else {
        units / 10f64.powi(-exponent)
    }
}

/// Evenly spaced "round" tick positions covering `[min, max]`.
///
/// The step is `m * 10^k` with `m` in {1, 2, 5}, picked so the tick count is
/// as close to `target_count` as possible (ties go to the finer step). The
/// first tick is at or below `min` and the last at or above `max`.
pub fn nice_ticks(min: f64, max: f64, target_count: usize) -> Result<Vec<f64>, PlotError> {
    if !min.is_finite() || !max.is_finite() {
        return Err(PlotError::TickRange("non-finite bounds".into()));
    }
    if min >= max {
        return Err(PlotError::TickRange(format!("min {min} is not below max {max}")));
    }
    if !(2..=20).contains(&target_count) {
        return Err(PlotError::TickRange(format!(
            "target count {target_count} outside 2..=20"
        )));
    }
    let span = max - min;
    if !span.is_finite() {
        return Err(PlotError::TickRange("span overflows".into()));
    }
    let decade = (span / target_count as f64).log10().floor() as i32;
    // Finer steps overshoot the target by 100x. Once a step exceeds both
    // bounds' magnitudes the index range, hence the count, stops changing.
    let magnitude = min.abs().max(max.abs());
    let top = (magnitude.log10().ceil() as i32 + 1).max(decade + 2);
    let mut best: Option<(usize, i64, i32, (i64, i64))> = None;
    for exponent in decade - 2..=top {
        for mantissa in [1, 2, 5] {
            if !(mantissa as f64 * 10f64.powi(exponent)).is_finite() {
                continue;
            }
            let Some((lo, hi)) = tick_index_range(min, max, mantissa, exponent) else {
                continue;
            };
            let count = (hi - lo + 1) as usize;
            let distance = count.abs_diff(target_count);
            // Candidates arrive in increasing step order; strict < keeps the
            // finer step on ties.
            if best.is_none_or(|(d, ..)| distance < d) {
                best = Some((distance, mantissa, exponent, (lo, hi)));
            }
        }
    }
    let (_, mantissa, exponent, (lo, hi)) =
        best.ok_or_else(|| PlotError::TickRange(format!("no finite round ticks cover [{min:e}, {max:e}]")))?;
    Ok((lo..=hi).map(|i| tick_value(i, mantissa, exponent)).collect())
}

/// Rotates about the vertical axis by `yaw`, then about the horizontal axis
/// by `pitch` (both in degrees), and drops depth.
pub fn project_orthographic(point: (f64, f64, f64), yaw: f64, pitch: f64) -> (f64, f64) {
    let (x, y, z) = point;
    let (sy, cy) = yaw.to_radians().sin_cos();
    let (sp, cp) = pitch.to_radians().sin_cos();
    let u = x * cy + y * sy;
    let depth = -x * sy + y * cy;
    let v = z * cp - depth * sp;
    (u, v)
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c if (c as u32) < 0x20 && !matches!(c, '\t' | '\n' | '\r') => out.push(' '),
            c => out.push(c),
        }
    }
    out
}

fn fmt_tick(v: f64) -> String {
    // Avoid "-0" labels.
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v}")
}

struct Frame {
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
}

impl Frame {
    fn map(&self, x: &Axis, y: &Axis, u: f64, v: f64) -> (f64, f64) {
        // Halved so spans near f64::MAX stay finite.
        let frac = |t: f64, a: &Axis| {
            (t / 2.0 - a.display_min() / 2.0) / (a.display_max() / 2.0 - a.display_min() / 2.0)
        };
        let (fx, fy) = (frac(u, x), frac(v, y));
        (
            self.left + fx.clamp(0.0, 1.0) * (self.right - self.left),
            self.bottom - fy.clamp(0.0, 1.0) * (self.bottom - self.top),
        )
    }
}

/// Renders the plot as a complete SVG document.
pub fn render_svg(spec: &PlotSpec) -> Result<String, PlotError> {
    let (w, h, m) = (spec.width, spec.height, spec.margin);
    if w < 100 || h < 100 || 2 * u64::from(m) + 10 > u64::from(w.min(h)) {
        return Err(PlotError::CanvasTooSmall { width: w, height: h });
    }
    if spec.points.is_empty() {
        return Err(PlotError::NoPoints);
    }
    let projection = spec.projection.unwrap_or_default();
    let planar: Vec<(f64, f64)> = match &spec.points {
        Points::Planar(p) => p.clone(),
        Points::Spatial(p) => p
            .iter()
            .map(|&q| project_orthographic(q, projection.yaw, projection.pitch))
            .collect(),
    };
    if let Some(index) = planar.iter().position(|(u, v)| !u.is_finite() || !v.is_finite()) {
        return Err(PlotError::NonFinite { index });
    }
    let spatial = matches!(spec.points, Points::Spatial(_));
    let label = |i: usize, fallback: &str| {
        spec.labels
            .get(i)
            .cloned()
            .unwrap_or_else(|| fallback.to_string())
    };
    let (x_label, y_label) = if spatial {
        (
            "projected horizontal".to_string(),
            "projected vertical".to_string(),
        )
    } else {
        (label(0, "x"), label(1, "y"))
    };

    let bounds = |f: fn(&(f64, f64)) -> f64| {
        planar
            .iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    };
    let (ulo, uhi) = bounds(|p| p.0);
    let (vlo, vhi) = bounds(|p| p.1);
    let x_axis = Axis::new(ulo, uhi, x_label)?;
    let y_axis = Axis::new(vlo, vhi, y_label)?;

    let frame = Frame {
        left: f64::from(m),
        right: f64::from(w - m),
        top: f64::from(m),
        bottom: f64::from(h - m),
    };

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );

    let _ = writeln!(
        svg,
        r#"<g id="axes" stroke="black" stroke-width="1" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
        frame.left, frame.bottom, frame.right, frame.bottom
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
        frame.left, frame.bottom, frame.left, frame.top
    );
    for &t in &x_axis.ticks {
        let (px, _) = frame.map(&x_axis, &y_axis, t, y_axis.display_min());
        let _ = writeln!(
            svg,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}"/>"#,
            frame.bottom,
            frame.bottom + 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle" stroke="none">{}</text>"#,
            frame.bottom + 18.0,
            escape(&fmt_tick(t))
        );
    }
    for &t in &y_axis.ticks {
        let (_, py) = frame.map(&x_axis, &y_axis, x_axis.display_min(), t);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}"/>"#,
            frame.left - 5.0,
            frame.left
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" stroke="none">{}</text>"#,
            frame.left - 8.0,
            py + 4.0,
            escape(&fmt_tick(t))
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" stroke="none">{}</text>"#,
        (frame.left + frame.right) / 2.0,
        f64::from(h) - 12.0,
        escape(&x_axis.label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="14.00" y="{:.2}" text-anchor="middle" stroke="none" transform="rotate(-90 14.00 {:.2})">{}</text>"#,
        (frame.top + frame.bottom) / 2.0,
        (frame.top + frame.bottom) / 2.0,
        escape(&y_axis.label)
    );
    let _ = writeln!(svg, "</g>");

    if spatial {
        // Orientation triad: projected unit vectors of the data axes.
        let (ox, oy) = (frame.right - 40.0, frame.top + 40.0);
        let _ = writeln!(
            svg,
            r#"<g id="triad" stroke="gray" stroke-width="1" font-family="sans-serif" font-size="11">"#
        );
        for (i, (unit, fallback)) in [
            ((1.0, 0.0, 0.0), "x"),
            ((0.0, 1.0, 0.0), "y"),
            ((0.0, 0.0, 1.0), "z"),
        ]
        .into_iter()
        .enumerate()
        {
            let (du, dv) = project_orthographic(unit, projection.yaw, projection.pitch);
            let (ex, ey) = (ox + 30.0 * du, oy - 30.0 * dv);
            let _ = writeln!(
                svg,
                r#"<line x1="{ox:.2}" y1="{oy:.2}" x2="{ex:.2}" y2="{ey:.2}"/>"#
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" stroke="none">{}</text>"#,
                ox + 36.0 * du,
                oy - 36.0 * dv,
                escape(&label(i, fallback))
            );
        }
        let _ = writeln!(svg, "</g>");
    }

    match spec.style {
        PlotStyle::Scatter => {
            let _ = writeln!(svg, r#"<g id="data" fill="steelblue" stroke="none">"#);
            for &(u, v) in &planar {
                let (px, py) = frame.map(&x_axis, &y_axis, u, v);
                let _ = writeln!(svg, r#"<circle cx="{px:.2}" cy="{py:.2}" r="{GLYPH_RADIUS}"/>"#);
            }
        }
        PlotStyle::Line => {
            let _ = writeln!(
                svg,
                r#"<g id="data" fill="none" stroke="steelblue" stroke-width="1.5">"#
            );
            let coords: Vec<String> = planar
                .iter()
                .map(|&(u, v)| {
                    let (px, py) = frame.map(&x_axis, &y_axis, u, v);
                    format!("{px:.2},{py:.2}")
                })
                .collect();
            let _ = writeln!(svg, r#"<polyline points="{}"/>"#, coords.join(" "));
        }
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, "</svg>");
    Ok(svg)
}
