//! Deterministic SVG output for complexes, trajectories and belief points.
//!
//! Every element carries a `class` so tests and stylesheets can find it.
//! Coordinates are printed with two decimals, so identical inputs give
//! identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write;

use thiserror::Error;

use crate::belief::{confidence_band, BeliefVisualisation, Thresholds};
use crate::engine::{EventKind, Trajectory};
use crate::simplicial::{layout, AbstractComplex, Coord, Face, SimplexPoint, VertexId};

/// Fill and stroke colours, cycled in face order.
pub const PALETTE: [&str; 12] = [
    "steelblue",
    "darkorange",
    "seagreen",
    "crimson",
    "mediumpurple",
    "sienna",
    "orchid",
    "slategray",
    "olive",
    "teal",
    "goldenrod",
    "navy",
];

/// Opacity of filled 2-faces.
pub const FACE_OPACITY: f64 = 0.25;

#[derive(Debug, Error, PartialEq)]
pub enum RenderError {
    #[error("no layout position for vertex `{0}`")]
    MissingLayout(String),
    #[error("invalid render settings: {0}")]
    InvalidSpec(String),
    #[error("inconsistent input: {0}")]
    Consistency(String),
    #[error("nothing to draw")]
    Empty,
}

/// A line `weight(vertex) = threshold` drawn across every face that contains
/// the vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct WarningLine {
    pub vertex: VertexId,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderSpec {
    pub layout: BTreeMap<VertexId, Coord>,
    pub width: f64,
    pub height: f64,
    pub margin: f64,
    pub palette: Vec<String>,
    pub thresholds: Thresholds,
    pub vertex_labels: bool,
    /// Percentage labels: on the final sample only, unless `label_all`.
    pub percentages: bool,
    pub label_all: bool,
    pub warning_lines: Vec<WarningLine>,
}

impl RenderSpec {
    /// Default canvas with a layout computed from `hints`.
    pub fn new(complex: &AbstractComplex, hints: &BTreeMap<VertexId, Coord>) -> Self {
        RenderSpec {
            layout: layout(complex, hints),
            width: 480.0,
            height: 420.0,
            margin: 48.0,
            palette: PALETTE.iter().map(|s| s.to_string()).collect(),
            thresholds: Thresholds::default(),
            vertex_labels: true,
            percentages: true,
            label_all: false,
            warning_lines: Vec::new(),
        }
    }

    fn check(&self) -> Result<(), RenderError> {
        if !(self.width > 0.0 && self.height > 0.0) {
            return Err(RenderError::InvalidSpec("canvas must have positive size".into()));
        }
        if !(self.margin >= 0.0 && 2.0 * self.margin < self.width.min(self.height)) {
            return Err(RenderError::InvalidSpec("margin leaves no drawing area".into()));
        }
        if !(self.thresholds.low < self.thresholds.high) {
            return Err(RenderError::InvalidSpec("colour thresholds must be ordered".into()));
        }
        if self.palette.is_empty() {
            return Err(RenderError::InvalidSpec("empty palette".into()));
        }
        Ok(())
    }
}

/// Maps layout coordinates onto the canvas, y pointing up.
struct Frame {
    pos: BTreeMap<VertexId, Coord>,
}

impl Frame {
    fn new(complex: &AbstractComplex, spec: &RenderSpec) -> Result<Self, RenderError> {
        spec.check()?;
        if complex.vertices().is_empty() {
            return Err(RenderError::Empty);
        }
        let mut raw = Vec::new();
        for v in complex.vertices() {
            let p = spec.layout.get(v).ok_or_else(|| RenderError::MissingLayout(v.to_string()))?;
            raw.push((v.clone(), *p));
        }
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for (_, p) in &raw {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let w = spec.width - 2.0 * spec.margin;
        let h = spec.height - 2.0 * spec.margin;
        let span = [(hi[0] - lo[0]).max(1e-12), (hi[1] - lo[1]).max(1e-12)];
        let scale = if raw.len() == 1 { 1.0 } else { (w / span[0]).min(h / span[1]) };
        // Centre the drawing in the available area.
        let off = [
            spec.margin + (w - scale * (hi[0] - lo[0])) / 2.0,
            spec.margin + (h - scale * (hi[1] - lo[1])) / 2.0,
        ];
        let pos = raw
            .into_iter()
            .map(|(v, p)| {
                let x = off[0] + scale * (p[0] - lo[0]);
                let y = spec.height - (off[1] + scale * (p[1] - lo[1]));
                (v, [x, y])
            })
            .collect();
        Ok(Frame { pos })
    }

    fn vertex(&self, v: &VertexId) -> Coord {
        self.pos[v]
    }

    fn point(&self, p: &SimplexPoint) -> Result<Coord, RenderError> {
        let mut out = [0.0; 2];
        for (v, w) in p.iter() {
            let q = self.pos.get(v).ok_or_else(|| RenderError::MissingLayout(v.to_string()))?;
            out[0] += w * q[0];
            out[1] += w * q[1];
        }
        Ok(out)
    }
}

fn n(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn percent(c: f64) -> String {
    format!("{}%", (c * 100.0).round() as i64)
}

fn header(spec: &RenderSpec) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"12\">\n<rect class=\"background\" x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
        w = n(spec.width),
        h = n(spec.height)
    )
}

fn face_label(f: &Face) -> String {
    format!("{{{}}}", f.names().join(", "))
}

/// The 2-skeleton: filled triangles, then edges, badges and vertices.
fn skeleton(out: &mut String, complex: &AbstractComplex, frame: &Frame, spec: &RenderSpec) {
    let colour = |i: usize| spec.palette[i % spec.palette.len()].as_str();
    out.push_str("<g class=\"faces\">\n");
    for (i, f) in complex.faces_of_dim(2).enumerate() {
        let pts: Vec<String> = f.vertices().iter().map(|v| frame.vertex(v)).map(|p| format!("{},{}", n(p[0]), n(p[1]))).collect();
        let _ = writeln!(
            out,
            "<polygon class=\"face\" points=\"{}\" fill=\"{}\" fill-opacity=\"{FACE_OPACITY}\" stroke=\"none\"><title>{}</title></polygon>",
            pts.join(" "),
            colour(i),
            escape(&face_label(f))
        );
    }
    out.push_str("</g>\n<g class=\"edges\">\n");
    for f in complex.faces_of_dim(1) {
        let a = frame.vertex(&f.vertices()[0]);
        let b = frame.vertex(&f.vertices()[1]);
        let _ = writeln!(
            out,
            "<line class=\"edge\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\" stroke-width=\"1.5\"/>",
            n(a[0]),
            n(a[1]),
            n(b[0]),
            n(b[1])
        );
    }
    out.push_str("</g>\n");
    let solids: Vec<&Face> = complex.maximal_faces().into_iter().filter(|f| f.dim() >= 3).collect();
    if !solids.is_empty() {
        out.push_str("<g class=\"badges\">\n");
        for f in solids {
            let mut c = [0.0; 2];
            for v in f.vertices() {
                let p = frame.vertex(v);
                c[0] += p[0] / f.len() as f64;
                c[1] += p[1] / f.len() as f64;
            }
            let _ = writeln!(
                out,
                "<text class=\"badge\" x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-style=\"italic\">solid {}-simplex {}</text>",
                n(c[0]),
                n(c[1]),
                f.dim(),
                escape(&face_label(f))
            );
        }
        out.push_str("</g>\n");
    }
    out.push_str("<g class=\"vertices\">\n");
    for (i, v) in complex.vertices().iter().enumerate() {
        let p = frame.vertex(v);
        let _ = writeln!(
            out,
            "<circle class=\"vertex\" cx=\"{}\" cy=\"{}\" r=\"5\" fill=\"{}\" stroke=\"black\"/>",
            n(p[0]),
            n(p[1]),
            colour(i)
        );
        if spec.vertex_labels {
            let _ = writeln!(
                out,
                "<text class=\"vertex-label\" x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
                n(p[0]),
                n(p[1] - 10.0),
                escape(v.as_str())
            );
        }
    }
    out.push_str("</g>\n");
}

fn warning_lines(out: &mut String, complex: &AbstractComplex, frame: &Frame, spec: &RenderSpec) -> Result<(), RenderError> {
    if spec.warning_lines.is_empty() {
        return Ok(());
    }
    out.push_str("<g class=\"zones\">\n");
    for wl in &spec.warning_lines {
        if !complex.vertices().contains(&wl.vertex) {
            return Err(RenderError::Consistency(format!("warning line on unknown vertex `{}`", wl.vertex)));
        }
        let t = wl.threshold.clamp(0.0, 1.0);
        let v = frame.vertex(&wl.vertex);
        let towards = |q: Coord| [t * v[0] + (1.0 - t) * q[0], t * v[1] + (1.0 - t) * q[1]];
        for f in complex.faces_of_dim(2).filter(|f| f.contains(&wl.vertex)) {
            let others: Vec<Coord> = f.vertices().iter().filter(|u| **u != wl.vertex).map(|u| frame.vertex(u)).collect();
            let (a, b) = (towards(others[0]), towards(others[1]));
            let _ = writeln!(
                out,
                "<line class=\"warning-line\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"red\" stroke-dasharray=\"6 3\"><title>weight({}) = {}</title></line>",
                n(a[0]),
                n(a[1]),
                n(b[0]),
                n(b[1]),
                escape(wl.vertex.as_str()),
                t
            );
        }
    }
    out.push_str("</g>\n");
    Ok(())
}

pub fn render_complex(complex: &AbstractComplex, spec: &RenderSpec) -> Result<String, RenderError> {
    let frame = Frame::new(complex, spec)?;
    let mut out = header(spec);
    skeleton(&mut out, complex, &frame, spec);
    warning_lines(&mut out, complex, &frame, spec)?;
    out.push_str("</svg>\n");
    Ok(out)
}

fn dot(out: &mut String, p: Coord, confidence: f64, spec: &RenderSpec, title: &str) {
    let band = confidence_band(confidence, spec.thresholds);
    let _ = writeln!(
        out,
        "<circle class=\"sample {}\" cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{}\"><title>{}</title></circle>",
        band.css(),
        n(p[0]),
        n(p[1]),
        band.css(),
        escape(title)
    );
}

fn pct_label(out: &mut String, p: Coord, confidence: f64) {
    let _ = writeln!(out, "<text class=\"pct\" x=\"{}\" y=\"{}\">{}</text>", n(p[0] + 7.0), n(p[1] + 4.0), percent(confidence));
}

/// The complex with the trajectory drawn over it.
pub fn render_trajectory(complex: &AbstractComplex, trajectory: &Trajectory, spec: &RenderSpec) -> Result<String, RenderError> {
    if trajectory.samples.is_empty() {
        return Err(RenderError::Empty);
    }
    let frame = Frame::new(complex, spec)?;
    let mut pts = Vec::with_capacity(trajectory.samples.len());
    for s in &trajectory.samples {
        if !complex.contains(&s.mode) {
            return Err(RenderError::Consistency(format!("mode {} at t={} is not a face of the complex", s.mode, s.t)));
        }
        pts.push(frame.point(&s.point)?);
    }
    let mut out = header(spec);
    skeleton(&mut out, complex, &frame, spec);
    warning_lines(&mut out, complex, &frame, spec)?;
    out.push_str("<g class=\"trajectory\">\n");
    let coords: Vec<String> = pts.iter().map(|p| format!("{},{}", n(p[0]), n(p[1]))).collect();
    let _ = writeln!(out, "<polyline class=\"path\" points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>", coords.join(" "));
    for (s, p) in trajectory.samples.iter().zip(&pts) {
        for e in &s.events {
            let kind = match e.kind {
                EventKind::Warn => "warn",
                EventKind::Transition => "transition",
                EventKind::Intervene => "intervene",
                EventKind::AccessViolation => continue,
            };
            let _ = writeln!(
                out,
                "<rect class=\"event {kind}\" x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"none\" stroke=\"black\" transform=\"rotate(45 {} {})\"><title>t={} {kind} {}</title></rect>",
                n(p[0] - 5.0),
                n(p[1] - 5.0),
                n(p[0]),
                n(p[1]),
                s.t,
                escape(&e.name)
            );
        }
    }
    let last = pts.len() - 1;
    for (i, (s, p)) in trajectory.samples.iter().zip(&pts).enumerate() {
        dot(&mut out, *p, s.confidence, spec, &format!("t={} mode {}", s.t, s.mode));
        if spec.percentages && (spec.label_all || i == last) {
            pct_label(&mut out, *p, s.confidence);
        }
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

/// Named belief points, each a dot coloured by confidence band with a name
/// and a whole-percent label.
pub fn render_beliefs(
    complex: &AbstractComplex,
    points: &[(String, BeliefVisualisation)],
    spec: &RenderSpec,
) -> Result<String, RenderError> {
    if points.is_empty() {
        return Err(RenderError::Empty);
    }
    let frame = Frame::new(complex, spec)?;
    let mut out = header(spec);
    skeleton(&mut out, complex, &frame, spec);
    out.push_str("<g class=\"beliefs\">\n");
    for (name, b) in points {
        let p = frame.point(&b.position)?;
        dot(&mut out, p, b.confidence, spec, name);
        let _ = writeln!(out, "<text class=\"name\" x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>", n(p[0] - 7.0), n(p[1] + 4.0), escape(name));
        if spec.percentages {
            pct_label(&mut out, p, b.confidence);
        }
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}
