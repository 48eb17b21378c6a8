//! SVG figures: one panel per vertex with the `f1` curve, optionally `f2`,
//! knot markers and an attractor projection.
//!
//! Output depends only on the inputs: coordinates are printed with a fixed
//! number of decimals and nothing is timestamped.

use std::fmt::Write as _;

use chfif_core::attractor::PointSet3;
use chfif_core::evaluator::SampledFunction;
use chfif_core::model::GDIFSystem;
use serde::{Deserialize, Serialize};

const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 36.0;
const MAX_POLYLINE_POINTS: usize = 8192;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderSettings {
    /// Width of one panel in pixels.
    pub width: u32,
    pub height: u32,
    /// Curve colour per vertex, cycled.
    pub colors: Vec<String>,
    pub show_f2: bool,
    pub show_knots: bool,
    pub show_cloud: bool,
    /// Cloud points drawn per panel; larger clouds are thinned evenly.
    pub cloud_max_points: usize,
}

impl RenderSettings {
    pub const FIELDS: &'static [&'static str] = &[
        "width",
        "height",
        "colors",
        "show_f2",
        "show_knots",
        "show_cloud",
        "cloud_max_points",
    ];

    fn color(&self, vertex: usize) -> &str {
        if self.colors.is_empty() {
            "#1f77b4"
        } else {
            &self.colors[vertex % self.colors.len()]
        }
    }
}

impl Default for RenderSettings {
    fn default() -> Self {
        Self {
            width: 480,
            height: 320,
            colors: ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
                .map(String::from)
                .to_vec(),
            show_f2: false,
            show_knots: true,
            show_cloud: true,
            cloud_max_points: 20_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RenderError {
    #[error("nothing to draw: no samples and no nonempty clouds")]
    EmptyInput,
    #[error("expected one entry per vertex ({expected}), got {found}")]
    VertexMismatch { expected: usize, found: usize },
}

/// Affine map from data coordinates to pixels for one panel.
#[derive(Clone, Copy, Debug)]
struct Frame {
    left: f64,
    top: f64,
    w: f64,
    h: f64,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x0) / (self.x1 - self.x0) * self.w
    }

    fn py(&self, y: f64) -> f64 {
        self.top + (self.y1 - y) / (self.y1 - self.y0) * self.h
    }
}

/// Tick positions at 1, 2 or 5 times a power of ten, about `target` of them.
fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![lo];
    }
    let target = target.max(1);
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [0.5, 1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&s| span / s <= (target + 1) as f64)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let v = if v.abs() < 1e-12 { 0.0 } else { v };
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// Indices of at most `max` evenly spread samples, always keeping `keep`.
fn thin(len: usize, max: usize, keep: &[usize]) -> Vec<usize> {
    if len <= max {
        return (0..len).collect();
    }
    let stride = len.div_ceil(max);
    let mut idx: Vec<usize> = (0..len)
        .step_by(stride)
        .chain(keep.iter().copied())
        .collect();
    idx.push(len - 1);
    idx.sort_unstable();
    idx.dedup();
    idx
}

fn polyline(
    out: &mut String,
    frame: &Frame,
    xs: &[f64],
    ys: &[f64],
    idx: &[usize],
    class: &str,
    style: &str,
) {
    let _ = write!(
        out,
        r#"<polyline class="{class}" fill="none" {style} points=""#
    );
    for (k, &i) in idx.iter().enumerate() {
        if k > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{:.2},{:.2}", frame.px(xs[i]), frame.py(ys[i]));
    }
    out.push_str("\"/>\n");
}

/// Renders one panel per vertex. `samples` and `clouds`, when given, must
/// hold one entry per vertex.
pub fn render_svg(
    system: &GDIFSystem,
    samples: Option<&[SampledFunction]>,
    clouds: Option<&[PointSet3]>,
    settings: &RenderSettings,
) -> Result<String, RenderError> {
    let n = system.vertex_count();
    for found in [samples.map(<[_]>::len), clouds.map(<[_]>::len)]
        .into_iter()
        .flatten()
    {
        if found != n {
            return Err(RenderError::VertexMismatch { expected: n, found });
        }
    }
    let clouds = clouds.filter(|c| settings.show_cloud && c.iter().any(|s| !s.is_empty()));
    if samples.is_none() && clouds.is_none() {
        return Err(RenderError::EmptyInput);
    }

    let (pw, ph) = (
        settings.width.max(120) as f64,
        settings.height.max(100) as f64,
    );
    let total_w = pw * n as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="11">"#,
        total_w, ph, total_w, ph
    );
    let _ = writeln!(
        out,
        r#"<rect width="{total_w}" height="{ph}" fill="white"/>"#
    );

    for v in 0..n {
        let ds = system.dataset(v);
        let (x0, x1) = ds.interval();
        let f = samples.map(|s| &s[v]);
        let cloud = clouds.map(|c| &c[v]).filter(|c| !c.is_empty());

        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut widen = |y: f64| {
            if y.is_finite() {
                lo = lo.min(y);
                hi = hi.max(y);
            }
        };
        if let Some(f) = f {
            f.f1().for_each(&mut widen);
            if settings.show_f2 {
                f.f2().for_each(&mut widen);
            }
        }
        if settings.show_knots {
            ds.points().iter().for_each(|p| widen(p.y));
        }
        if let Some(c) = cloud {
            c.points.iter().for_each(|p| widen(p.y));
        }
        let pad = if hi > lo { 0.05 * (hi - lo) } else { 1.0 };
        let frame = Frame {
            left: v as f64 * pw + MARGIN_LEFT,
            top: MARGIN_TOP,
            w: pw - MARGIN_LEFT - MARGIN_RIGHT,
            h: ph - MARGIN_TOP - MARGIN_BOTTOM,
            x0,
            x1,
            y0: lo - pad,
            y1: hi + pad,
        };

        let _ = writeln!(out, r#"<g class="panel" id="vertex-{}">"#, v + 1);
        let edges: Vec<String> = system.graph().edge_counts()[v]
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(s, k)| format!("{k} from {}", s + 1))
            .collect();
        let _ = writeln!(
            out,
            r#"<text class="title" x="{:.2}" y="{:.2}">vertex {} ({})</text>"#,
            frame.left,
            MARGIN_TOP - 10.0,
            v + 1,
            edges.join(", ")
        );
        let _ = writeln!(
            out,
            r##"<rect class="axes" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444"/>"##,
            frame.left, frame.top, frame.w, frame.h
        );
        for t in nice_ticks(frame.x0, frame.x1, 5) {
            let x = frame.px(t);
            let yb = frame.top + frame.h;
            let _ = writeln!(
                out,
                r##"<line class="tick" x1="{x:.2}" y1="{yb:.2}" x2="{x:.2}" y2="{:.2}" stroke="#444"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
                yb + 4.0,
                yb + 16.0,
                tick_label(t)
            );
        }
        for t in nice_ticks(frame.y0, frame.y1, 5) {
            let y = frame.py(t);
            let _ = writeln!(
                out,
                r##"<line class="tick" x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#444"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
                frame.left - 4.0,
                frame.left,
                frame.left - 6.0,
                y + 4.0,
                tick_label(t)
            );
        }

        if let Some(c) = cloud {
            let _ = writeln!(out, r##"<g class="cloud" fill="#888" fill-opacity="0.5">"##);
            for i in thin(c.len(), settings.cloud_max_points, &[]) {
                let p = c.points[i];
                let _ = writeln!(
                    out,
                    r#"<rect x="{:.2}" y="{:.2}" width="1" height="1"/>"#,
                    frame.px(p.x) - 0.5,
                    frame.py(p.y) - 0.5
                );
            }
            out.push_str("</g>\n");
        }

        if let Some(f) = f {
            let knot_idx: Vec<usize> = (0..=ds.subinterval_count())
                .map(|k| k * f.density)
                .collect();
            let idx = thin(f.grid.len(), MAX_POLYLINE_POINTS, &knot_idx);
            let color = settings.color(v);
            if settings.show_f2 {
                let f2: Vec<f64> = f.f2().collect();
                let style =
                    format!(r#"stroke="{color}" stroke-opacity="0.6" stroke-dasharray="4 3""#);
                polyline(&mut out, &frame, &f.grid, &f2, &idx, "f2", &style);
            }
            let f1: Vec<f64> = f.f1().collect();
            let style = format!(r#"stroke="{color}" stroke-width="1.2""#);
            polyline(&mut out, &frame, &f.grid, &f1, &idx, "f1", &style);
        }

        if settings.show_knots {
            for p in ds.points() {
                let _ = writeln!(
                    out,
                    r#"<circle class="knot" cx="{:.2}" cy="{:.2}" r="3" fill="black"/>"#,
                    frame.px(p.x),
                    frame.py(p.y)
                );
            }
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    Ok(out)
}
