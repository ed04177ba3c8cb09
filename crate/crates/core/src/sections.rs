//! Design sections: 2D projections of a solution box with classified
//! scatter samples, exportable as JSON, CSV or SVG.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adg::{Classification, DesignPoint};
use crate::boxsolver::{sample_uniform, DesignBox};
use crate::problem::{Problem, ProblemError};
use crate::run::canonical_json;

/// Default number of points per section.
pub const DEFAULT_SECTION_SAMPLES: usize = 1000;

/// Range the on-axis coordinates are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Span {
    /// The box projection only.
    Box,
    /// The full design-space range, so the good/bad boundary beyond the box
    /// is visible.
    #[default]
    DesignSpace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub unit: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionPoint {
    /// The full design; `x[i]`, `x[j]` are the plotted coordinates.
    pub x: DesignPoint,
    pub classification: Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionData {
    pub dims: (usize, usize),
    pub axes: (Axis, Axis),
    pub box_rect: ((f64, f64), (f64, f64)),
    pub span: Span,
    pub seed: u64,
    /// How the off-axis coordinates were drawn.
    pub provenance: String,
    /// Requirement ids in rendering priority order (first is red).
    pub priority: Vec<String>,
    pub points: Vec<SectionPoint>,
}

impl SectionData {
    pub fn coords(&self, p: &SectionPoint) -> (f64, f64) {
        (p.x.0[self.dims.0], p.x.0[self.dims.1])
    }

    /// Color of a point: green when good, red when the highest-priority
    /// violated requirement is the first one, blue otherwise.
    pub fn color(&self, c: &Classification) -> Color {
        if c.is_good() {
            return Color::Green;
        }
        match self.priority.first() {
            Some(first) if c.violated.contains(first) => Color::Red,
            Some(_) => Color::Blue,
            None => Color::Red,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Color {
    Green,
    Red,
    Blue,
}

impl Color {
    pub fn as_str(self) -> &'static str {
        match self {
            Color::Green => "green",
            Color::Red => "red",
            Color::Blue => "blue",
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SectionError {
    #[error("section axes must differ and be below {dim}, got ({i}, {j})")]
    BadDims { i: usize, j: usize, dim: usize },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

pub const OFF_AXIS_PROVENANCE: &str = "off-axis coordinates drawn uniformly inside the box";

/// Samples `n` designs for the `(i, j)` section of `b` and classifies them.
pub fn make_section(
    problem: &Problem,
    b: &DesignBox,
    dims: (usize, usize),
    n: usize,
    seed: u64,
    span: Span,
) -> Result<SectionData, SectionError> {
    let (i, j) = dims;
    let d = problem.dim();
    if i == j || i >= d || j >= d || b.dim() != d {
        return Err(SectionError::BadDims { i, j, dim: d });
    }
    let vars = problem.variables();
    let range = |k: usize| match span {
        Span::Box => b.intervals[k],
        Span::DesignSpace => (vars[k].lower, vars[k].upper),
    };
    let (ri, rj) = (range(i), range(j));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = sample_uniform(b, n, &mut rng);
    for x in &mut points {
        for (k, (lo, hi)) in [(i, ri), (j, rj)] {
            let u: f64 = rng.random();
            x.0[k] = (lo + u * (hi - lo)).clamp(lo, hi);
        }
    }
    let classes = problem.classify_batch(&points)?;

    let mut priority: Vec<(usize, String)> = problem
        .requirements()
        .iter()
        .map(|r| (problem.requirement_rank(&r.id).unwrap_or(usize::MAX), r.id.clone()))
        .collect();
    priority.sort();

    let axis = |k: usize| Axis {
        name: vars[k].name.clone(),
        unit: vars[k].unit.clone(),
        lower: vars[k].lower,
        upper: vars[k].upper,
    };
    Ok(SectionData {
        dims,
        axes: (axis(i), axis(j)),
        box_rect: (b.intervals[i], b.intervals[j]),
        span,
        seed,
        provenance: OFF_AXIS_PROVENANCE.to_string(),
        priority: priority.into_iter().map(|(_, id)| id).collect(),
        points: points
            .into_iter()
            .zip(classes)
            .map(|(x, classification)| SectionPoint { x, classification })
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Json,
    Csv,
    Svg,
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Json => "json",
            ExportFormat::Csv => "csv",
            ExportFormat::Svg => "svg",
        }
    }
}

pub fn export_section(section: &SectionData, format: ExportFormat) -> Vec<u8> {
    match format {
        ExportFormat::Json => canonical_json(section).into_bytes(),
        ExportFormat::Csv => section_csv(section).into_bytes(),
        ExportFormat::Svg => section_svg(section).into_bytes(),
    }
}

pub fn parse_section_json(bytes: &[u8]) -> Result<SectionData, serde_json::Error> {
    serde_json::from_slice(bytes)
}

/// `good`, or the violated requirement ids joined by `+`.
pub fn label(c: &Classification) -> String {
    if c.is_good() {
        "good".to_string()
    } else {
        c.violated.iter().cloned().collect::<Vec<_>>().join("+")
    }
}

fn section_csv(s: &SectionData) -> String {
    let mut out = String::from("xi,xj,label\n");
    for p in &s.points {
        let (xi, xj) = s.coords(p);
        let _ = writeln!(out, "{xi},{xj},{}", label(&p.classification));
    }
    out
}

const SIZE: f64 = 480.0;
const MARGIN: f64 = 60.0;

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn section_svg(s: &SectionData) -> String {
    let plot = SIZE - 2.0 * MARGIN;
    let (ax, ay) = (&s.axes.0, &s.axes.1);
    let px = |x: f64| MARGIN + (x - ax.lower) / (ax.upper - ax.lower) * plot;
    let py = |y: f64| SIZE - MARGIN - (y - ay.lower) / (ay.upper - ay.lower) * plot;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    let (x0, x1, y0, y1) = (MARGIN, SIZE - MARGIN, SIZE - MARGIN, MARGIN);
    let _ = writeln!(
        out,
        r#"<g class="axes" stroke="black" stroke-width="1"><line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/></g>"#
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let vx = ax.lower + f * (ax.upper - ax.lower);
        let vy = ay.lower + f * (ay.upper - ay.lower);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(vx),
            y0 + 16.0,
            tick(vx)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            py(vy) + 4.0,
            tick(vy)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{} [{}]</text>"#,
        SIZE / 2.0,
        SIZE - 16.0,
        escape(&ax.name),
        escape(&ax.unit)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{} [{}]</text>"#,
        SIZE / 2.0,
        SIZE / 2.0,
        escape(&ay.name),
        escape(&ay.unit)
    );
    let _ = writeln!(out, r#"<g class="points">"#);
    for p in &s.points {
        let (xi, xj) = s.coords(p);
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}"/>"#,
            px(xi),
            py(xj),
            s.color(&p.classification).as_str()
        );
    }
    let _ = writeln!(out, "</g>");
    let ((bx0, bx1), (by0, by1)) = s.box_rect;
    let _ = writeln!(
        out,
        r#"<rect class="box" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black" stroke-width="2"/>"#,
        px(bx0),
        py(by1),
        px(bx1) - px(bx0),
        py(by0) - py(by1)
    );
    out.push_str("</svg>\n");
    out
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".to_string() } else { s.to_string() }
}
