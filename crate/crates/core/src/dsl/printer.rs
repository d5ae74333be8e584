use std::fmt::Write;

use super::*;
use crate::numeric::fmt_num;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn braces(face: &[String]) -> String {
    format!("{{{}}}", face.join(", "))
}

fn region(out: &mut String, r: &RegionDecl, indent: &str) {
    match r {
        RegionDecl::Box(iv) => {
            out.push_str("box");
            for [lo, hi] in iv {
                let _ = write!(out, " [{}, {}]", fmt_num(*lo), fmt_num(*hi));
            }
        }
        RegionDecl::HalfSpace { normal, offset } => {
            let n: Vec<String> = normal.iter().map(|x| fmt_num(*x)).collect();
            let _ = write!(out, "halfspace [{}] <= {}", n.join(", "), fmt_num(*offset));
        }
        RegionDecl::Polygon(pts) => {
            out.push_str("polygon");
            for p in pts {
                match p {
                    PointRef::Named(n) => {
                        let _ = write!(out, " {n}");
                    }
                    PointRef::At([x, y]) => {
                        let _ = write!(out, " ({}, {})", fmt_num(*x), fmt_num(*y));
                    }
                }
            }
        }
        RegionDecl::Union(parts) | RegionDecl::Intersection(parts) => {
            out.push_str(if matches!(r, RegionDecl::Union(_)) { "union\n" } else { "intersection\n" });
            let inner = format!("{indent}  ");
            for p in parts {
                out.push_str(&inner);
                region(out, p, &inner);
                out.push('\n');
            }
            let _ = write!(out, "{indent}end");
        }
    }
}

fn atom(a: &AtomDecl) -> String {
    match a {
        AtomDecl::Weight(w) => {
            let t = match &w.threshold {
                Threshold::Value(x) => fmt_num(*x),
                Threshold::Param(p) => p.clone(),
            };
            format!("weight({}) {} {t}", w.weight, w.cmp.symbol())
        }
        AtomDecl::InFace(f) => format!("in {} tol {}", braces(&f.face), fmt_num(f.tol)),
    }
}

/// Prints `doc` in `.mode` syntax. Parsing the output gives back `doc`.
pub fn to_text(doc: &ScenarioDoc) -> String {
    let mut o = String::new();
    let _ = writeln!(o, "scenario {}", quote(&doc.name));
    let _ = writeln!(o, "\nvertices {}", doc.vertices.join(" "));
    for f in &doc.faces {
        let _ = writeln!(o, "face {}", f.join(" "));
    }
    o.push_str("\nstate\n");
    for a in &doc.state {
        let _ = writeln!(o, "  axis {} {} {} init {}", a.name, fmt_num(a.lo), fmt_num(a.hi), fmt_num(a.init));
    }
    o.push_str("end\n");
    if !doc.points.is_empty() {
        o.push('\n');
        for (n, [x, y]) in &doc.points {
            let _ = writeln!(o, "point {n} {} {}", fmt_num(*x), fmt_num(*y));
        }
    }
    if !doc.params.is_empty() {
        o.push('\n');
        for p in &doc.params {
            let _ = write!(o, "param {} {}", p.name, fmt_num(p.value));
            if let Some(b) = p.busy {
                let _ = write!(o, " busy {}", fmt_num(b));
            }
            o.push('\n');
        }
    }
    if !doc.cover.is_empty() {
        o.push_str("\ncover\n");
        for c in &doc.cover {
            let _ = write!(o, "  region {} ", c.vertex);
            region(&mut o, &c.region, "  ");
            o.push('\n');
        }
        o.push_str("end\n");
    }
    let _ = write!(o, "\nevaluator {}", doc.evaluator.kind.keyword());
    for a in &doc.evaluator.axes {
        let _ = write!(o, " {a}");
    }
    if let Some(m) = doc.evaluator.margin {
        let _ = write!(o, " margin {}", fmt_num(m));
    }
    o.push('\n');
    if !doc.channels.is_empty() {
        o.push('\n');
        for c in &doc.channels {
            let _ = writeln!(o, "channel {} writes {}", c.name, c.writes.join(" "));
        }
    }
    for m in &doc.modes {
        let _ = writeln!(o, "\nmode {}", m.face.join(" "));
        if !m.objective.is_empty() {
            let _ = writeln!(o, "  objective {}", quote(&m.objective));
        }
        if !m.reads.is_empty() {
            let _ = writeln!(o, "  reads {}", m.reads.join(" "));
        }
        for z in &m.zones {
            let when: Vec<String> = z.when.iter().map(atom).collect();
            let action = match &z.action {
                ActionDecl::Warn(s) => format!("warn {}", quote(s)),
                ActionDecl::Intervene(s) => format!("intervene {}", quote(s)),
                ActionDecl::Transition(f) => format!("transition {}", braces(f)),
            };
            let _ = writeln!(o, "  zone {} when {} {action}", z.name, when.join(" and "));
        }
        o.push_str("end\n");
    }
    if !doc.domains.is_empty() {
        o.push('\n');
        for d in &doc.domains {
            let _ = write!(o, "domain {} ", braces(&d.mode));
            region(&mut o, &d.region, "");
            o.push('\n');
        }
    }
    let _ = writeln!(o, "\ninitial {}", doc.initial.join(" "));
    if !doc.layout.is_empty() {
        o.push('\n');
        for (v, [x, y]) in &doc.layout {
            let _ = writeln!(o, "layout {v} {} {}", fmt_num(*x), fmt_num(*y));
        }
    }
    if let Some(c) = doc.colours {
        let _ = writeln!(o, "colours {} {}", fmt_num(c.low), fmt_num(c.high));
    }
    o
}
