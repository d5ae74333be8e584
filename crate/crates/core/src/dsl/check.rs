use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::*;
use crate::cover::{default_margin, Axis, Cover, PartitionOfUnity, Region, StateSpace, DEFAULT_RESOLUTION};
use crate::engine::{Action, Atom, Channel, Evaluator, Machine, Mode, Predicate, StableDomain, Zone};
use crate::par::Exec;
use crate::scenarios::{judicial, offender};
use crate::simplicial::{close_downward, AbstractComplex, Face, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompileOptions {
    /// Use each parameter's `busy` value where one is given.
    pub busy: bool,
    /// Grid points per axis for sampled cover checks.
    pub resolution: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { busy: false, resolution: DEFAULT_RESOLUTION }
    }
}

/// All error diagnostics for `doc`; empty when it compiles.
pub fn validate(doc: &ScenarioDoc) -> Vec<Diagnostic> {
    match compile(doc, &CompileOptions::default()) {
        Ok(_) => Vec::new(),
        Err(e) => e,
    }
}

#[derive(Default)]
struct Errs(Vec<Diagnostic>);

impl Errs {
    fn push(&mut self, loc: Loc, msg: impl Into<String>) {
        self.0.push(Diagnostic::error(msg).at_loc(&loc));
    }

    fn push_hint(&mut self, loc: Loc, msg: impl Into<String>, hint: impl Into<String>) {
        self.0.push(Diagnostic::error(msg).at_loc(&loc).hint(hint));
    }
}

fn fmt_face(vs: &[String]) -> String {
    format!("{{{}}}", vs.join(","))
}

pub(crate) fn resolve_region(decl: &RegionDecl, points: &BTreeMap<String, [f64; 2]>) -> Result<Region, String> {
    Ok(match decl {
        RegionDecl::Box(iv) => Region::Box(iv.clone()),
        RegionDecl::HalfSpace { normal, offset } => Region::HalfSpace { normal: normal.clone(), offset: *offset },
        RegionDecl::Polygon(pts) => Region::Polygon(
            pts.iter()
                .map(|p| match p {
                    PointRef::At(xy) => Ok(*xy),
                    PointRef::Named(n) => points.get(n).copied().ok_or_else(|| format!("undeclared point `{n}`")),
                })
                .collect::<Result<_, _>>()?,
        ),
        RegionDecl::Union(parts) => {
            Region::Union(parts.iter().map(|r| resolve_region(r, points)).collect::<Result<_, _>>()?)
        }
        RegionDecl::Intersection(parts) => {
            Region::Intersection(parts.iter().map(|r| resolve_region(r, points)).collect::<Result<_, _>>()?)
        }
    })
}

/// Resolves, type-checks and builds the engine machine for `doc`.
pub fn compile(doc: &ScenarioDoc, opts: &CompileOptions) -> Result<Machine, Vec<Diagnostic>> {
    let mut e = Errs::default();

    if doc.name.trim().is_empty() {
        e.push(Loc::Name, "scenario name is empty");
    }

    // Vertices and complex.
    let mut verts = BTreeSet::new();
    for v in &doc.vertices {
        if VertexId::new(v.as_str()).is_err() || !verts.insert(v.as_str()) {
            e.push(Loc::Vertices, format!("vertex `{v}` is empty or repeated"));
        }
    }
    if verts.is_empty() {
        e.push_hint(Loc::Vertices, "no vertices declared", "add `vertices a b c`");
    }
    let declared_face = |vs: &[String]| vs.iter().all(|v| verts.contains(v.as_str()));
    for (i, f) in doc.faces.iter().enumerate() {
        if let Some(v) = f.iter().find(|v| !verts.contains(v.as_str())) {
            e.push(Loc::Face(i), format!("face {} uses undeclared vertex `{v}`", fmt_face(f)));
        }
    }
    let mut complex: Option<AbstractComplex> = None;
    if e.0.is_empty() {
        let mut gens: Vec<Face> = Vec::new();
        for (i, f) in doc.faces.iter().enumerate() {
            match Face::new(f.iter().map(String::as_str)) {
                Ok(face) => gens.push(face),
                Err(err) => e.push(Loc::Face(i), err.to_string()),
            }
        }
        gens.extend(verts.iter().map(|v| Face::of(&[v])));
        match close_downward(&gens) {
            Ok(c) => complex = Some(c),
            Err(err) => e.push(Loc::Vertices, err.to_string()),
        }
    }
    let face_of = |vs: &[String]| -> Option<Face> {
        let f = Face::new(vs.iter().map(String::as_str)).ok()?;
        complex.as_ref().filter(|c| c.contains(&f)).map(|_| f)
    };

    // State space.
    let mut axis_names = BTreeSet::new();
    for (i, a) in doc.state.iter().enumerate() {
        if !axis_names.insert(a.name.as_str()) {
            e.push(Loc::Axis(i), format!("axis `{}` declared twice", a.name));
        }
        if !(a.lo.is_finite() && a.hi.is_finite() && a.lo < a.hi) {
            e.push(Loc::Axis(i), format!("axis `{}` needs lo < hi", a.name));
        } else if !(a.lo..=a.hi).contains(&a.init) {
            e.push(Loc::Axis(i), format!("axis `{}` starts at {} outside [{}, {}]", a.name, a.init, a.lo, a.hi));
        }
    }
    let space = if doc.state.is_empty() {
        e.push(Loc::Root, "the state block declares no axes");
        None
    } else {
        match StateSpace::new(doc.state.iter().map(|a| Axis::new(a.name.clone(), a.lo, a.hi)).collect()) {
            Ok(s) => Some(s),
            Err(err) => {
                if e.0.is_empty() {
                    e.push(Loc::Axis(0), err.to_string());
                }
                None
            }
        }
    };
    let axis = |name: &str| doc.state.iter().position(|a| a.name == name);

    for (name, p) in &doc.points {
        if p.iter().any(|x| !x.is_finite()) {
            e.push(Loc::Point(name.clone()), format!("point `{name}` is not finite"));
        }
    }

    let mut params: BTreeMap<&str, f64> = BTreeMap::new();
    for (i, p) in doc.params.iter().enumerate() {
        let v = if opts.busy { p.busy.unwrap_or(p.value) } else { p.value };
        if params.insert(p.name.as_str(), v).is_some() {
            e.push(Loc::Param(i), format!("parameter `{}` declared twice", p.name));
        }
        if !p.value.is_finite() || p.busy.is_some_and(|b| !b.is_finite()) {
            e.push(Loc::Param(i), format!("parameter `{}` is not finite", p.name));
        }
    }

    let region_at = |e: &mut Errs, loc: Loc, decl: &RegionDecl| -> Option<Region> {
        let space = space.as_ref()?;
        match resolve_region(decl, &doc.points).and_then(|r| r.check(space).map(|_| r).map_err(|x| x.to_string())) {
            Ok(r) => Some(r),
            Err(msg) => {
                e.push(loc, msg);
                None
            }
        }
    };

    // Cover.
    let mut entries = Vec::new();
    let mut cover_verts = BTreeSet::new();
    for (i, c) in doc.cover.iter().enumerate() {
        if !verts.contains(c.vertex.as_str()) {
            e.push(Loc::Cover(i), format!("cover region for undeclared vertex `{}`", c.vertex));
        } else if !cover_verts.insert(c.vertex.as_str()) {
            e.push(Loc::Cover(i), format!("vertex `{}` has two cover regions", c.vertex));
        }
        if let Some(r) = region_at(&mut e, Loc::Cover(i), &c.region) {
            entries.push((VertexId::from(c.vertex.as_str()), r));
        }
    }

    // Channels.
    let mut channels = Vec::new();
    for (i, c) in doc.channels.iter().enumerate() {
        if doc.channels[..i].iter().any(|o| o.name == c.name) {
            e.push(Loc::Channel(i), format!("channel `{}` declared twice", c.name));
        }
        let mut axes = Vec::new();
        for w in &c.writes {
            match axis(w) {
                Some(k) => axes.push(k),
                None => e.push(Loc::Channel(i), format!("channel `{}` writes undeclared axis `{w}`", c.name)),
            }
        }
        channels.push(Channel { name: c.name.clone(), axes });
    }

    // Modes and zones.
    let declared_modes: Vec<&Vec<String>> = doc.modes.iter().map(|m| &m.face).collect();
    let is_mode = |f: &[String]| {
        let mut a: Vec<&String> = f.iter().collect();
        a.sort();
        declared_modes.iter().any(|m| {
            let mut b: Vec<&String> = m.iter().collect();
            b.sort();
            a == b
        })
    };
    let mut zones_per_mode = Vec::new();
    for (i, m) in doc.modes.iter().enumerate() {
        if face_of(&m.face).is_none() && complex.is_some() {
            e.push_hint(
                Loc::Mode(i),
                format!("mode {} is not a face of the complex", fmt_face(&m.face)),
                "declare it with a `face` line",
            );
        }
        if doc.modes[..i].iter().any(|o| face_of(&o.face).is_some() && face_of(&o.face) == face_of(&m.face)) {
            e.push(Loc::Mode(i), format!("mode {} declared twice", fmt_face(&m.face)));
        }
        for r in &m.reads {
            if !doc.channels.iter().any(|c| &c.name == r) {
                e.push(Loc::Mode(i), format!("mode {} reads undeclared channel `{r}`", fmt_face(&m.face)));
            }
        }
        let mut zones = Vec::new();
        for (j, z) in m.zones.iter().enumerate() {
            let loc = || Loc::Zone(i, j);
            let mut atoms = Vec::new();
            for a in &z.when {
                match a {
                    AtomDecl::Weight(w) => {
                        if !verts.contains(w.weight.as_str()) {
                            e.push(loc(), format!("zone `{}` weighs undeclared vertex `{}`", z.name, w.weight));
                            continue;
                        }
                        let threshold = match &w.threshold {
                            Threshold::Value(x) => *x,
                            Threshold::Param(p) => match params.get(p.as_str()) {
                                Some(x) => *x,
                                None => {
                                    e.push(loc(), format!("zone `{}` uses undeclared parameter `{p}`", z.name));
                                    continue;
                                }
                            },
                        };
                        if !threshold.is_finite() {
                            e.push(loc(), format!("zone `{}` has a non-finite threshold", z.name));
                        }
                        atoms.push(Atom::Weight { vertex: w.weight.as_str().into(), cmp: w.cmp, threshold });
                    }
                    AtomDecl::InFace(f) => {
                        if !declared_face(&f.face) || f.face.is_empty() {
                            e.push(loc(), format!("zone `{}` tests undeclared face {}", z.name, fmt_face(&f.face)));
                            continue;
                        }
                        if !(f.tol.is_finite() && f.tol >= 0.0) {
                            e.push(loc(), format!("zone `{}` needs a non-negative tolerance", z.name));
                        }
                        atoms.push(Atom::InFace { face: Face::new(f.face.iter().map(String::as_str)).expect("declared"), tol: f.tol });
                    }
                }
            }
            if z.when.is_empty() {
                e.push(loc(), format!("zone `{}` has no condition", z.name));
            }
            let action = match &z.action {
                ActionDecl::Warn(s) => Some(Action::Warn(s.clone())),
                ActionDecl::Intervene(s) => Some(Action::Intervene(s.clone())),
                ActionDecl::Transition(target) => match face_of(target) {
                    Some(f) if is_mode(target) => Some(Action::Transition(f)),
                    _ => {
                        e.push_hint(
                            loc(),
                            format!("zone `{}` targets undeclared face {}", z.name, fmt_face(target)),
                            "transition targets must be declared modes",
                        );
                        None
                    }
                },
            };
            if let Some(action) = action {
                zones.push(Zone { name: z.name.clone(), predicate: Predicate(atoms), action });
            }
        }
        zones_per_mode.push(zones);
    }

    // Stable domains.
    let mut domains = Vec::new();
    for (i, d) in doc.domains.iter().enumerate() {
        if !is_mode(&d.mode) {
            e.push(Loc::Domain(i), format!("stable domain for undeclared mode {}", fmt_face(&d.mode)));
        }
        if let (Some(r), Some(f)) = (region_at(&mut e, Loc::Domain(i), &d.region), face_of(&d.mode)) {
            domains.push(StableDomain { mode: f, region: r });
        }
    }

    if !is_mode(&doc.initial) {
        e.push_hint(
            Loc::Initial,
            format!("initial mode {} is not a declared mode", fmt_face(&doc.initial)),
            "declare a `mode` block for it",
        );
    }

    for (v, xy) in &doc.layout {
        if !verts.contains(v.as_str()) {
            e.push(Loc::Layout(v.clone()), format!("layout for undeclared vertex `{v}`"));
        }
        if xy.iter().any(|x| !x.is_finite()) {
            e.push(Loc::Layout(v.clone()), format!("layout for `{v}` is not finite"));
        }
    }
    if let Some(c) = doc.colours {
        if !(0.0 <= c.low && c.low < c.high && c.high <= 1.0) {
            e.push(Loc::Colours, "colour thresholds need 0 <= low < high <= 1");
        }
    }

    if !e.0.is_empty() {
        return Err(e.0);
    }
    let space = space.expect("no errors");
    let complex_ref = complex.as_ref().expect("no errors");

    let cover = if entries.is_empty() {
        None
    } else {
        match Cover::new(space.clone(), entries) {
            Ok(c) => Some(c),
            Err(err) => return Err(vec![Diagnostic::error(err.to_string()).at_loc(&Loc::Cover(0))]),
        }
    };

    let ev = &doc.evaluator;
    let mut fail = |msg: String| e.push(Loc::Evaluator, msg);
    let needs_vertices = |names: &[&str], fail: &mut dyn FnMut(String)| {
        for n in names {
            if !verts.contains(n) {
                fail(format!("the {} evaluator needs a vertex named `{n}`", ev.kind.keyword()));
            }
        }
    };
    let two_axes = |fail: &mut dyn FnMut(String)| -> Option<(usize, usize)> {
        match ev.axes.as_slice() {
            [a, b] => match (axis(a), axis(b)) {
                (Some(i), Some(j)) => Some((i, j)),
                _ => {
                    fail(format!("evaluator axes {a}, {b} are not both declared"));
                    None
                }
            },
            _ => {
                fail(format!("the {} evaluator takes exactly two axes", ev.kind.keyword()));
                None
            }
        }
    };
    if ev.margin.is_some() && ev.kind != EvaluatorKind::Pou {
        fail("only the pou evaluator takes a margin".into());
    }
    let evaluator = match ev.kind {
        EvaluatorKind::Pou => {
            if !ev.axes.is_empty() {
                fail("the pou evaluator takes no axes".into());
            }
            match &cover {
                None => {
                    fail("the pou evaluator needs a cover block".into());
                    None
                }
                Some(cover) => {
                    let margin = ev.margin.unwrap_or_else(|| default_margin(&space));
                    match PartitionOfUnity::build(cover, margin, opts.resolution, Exec::default()) {
                        Ok(pou) => {
                            if let Some(f) = pou.nerve().faces().iter().find(|f| !complex_ref.contains(f)) {
                                fail(format!("the cover's nerve has face {f}, which the complex lacks"));
                            }
                            Some(Evaluator::Pou(Arc::new(pou)))
                        }
                        Err(err) => {
                            fail(err.to_string());
                            None
                        }
                    }
                }
            }
        }
        EvaluatorKind::Offender => {
            needs_vertices(&[offender::OK, offender::ALC, offender::TAG], &mut fail);
            two_axes(&mut fail).and_then(|(alc, tag)| {
                let unit = |k: usize| doc.state[k].lo >= 0.0 && doc.state[k].hi <= 1.0;
                if unit(alc) && unit(tag) {
                    Some(Evaluator::Offender { alc, tag })
                } else {
                    fail("offender axes must lie within [0, 1]".into());
                    None
                }
            })
        }
        EvaluatorKind::Barycentric => {
            if !ev.axes.is_empty() {
                fail("the barycentric evaluator takes no axes; each vertex reads its namesake axis".into());
            }
            let mut axes = Vec::new();
            for v in &verts {
                match axis(v) {
                    Some(k) if doc.state[k].lo >= 0.0 => axes.push((VertexId::from(*v), k)),
                    Some(_) => fail(format!("axis `{v}` must be non-negative")),
                    None => fail(format!("no state axis named after vertex `{v}`")),
                }
            }
            Some(Evaluator::Barycentric { axes })
        }
        EvaluatorKind::Judicial => {
            needs_vertices(&[judicial::JAIL, judicial::PROBATION, judicial::RELEASE], &mut fail);
            let params_ok = judicial_params(doc, &params);
            match params_ok {
                Ok(p) => two_axes(&mut fail).map(|(t, g)| Evaluator::Judicial { params: Arc::new(p), t, g }),
                Err(msg) => {
                    fail(msg);
                    None
                }
            }
        }
    };
    if !e.0.is_empty() {
        return Err(e.0);
    }
    let evaluator = evaluator.expect("no errors");

    let modes = doc
        .modes
        .iter()
        .zip(zones_per_mode)
        .map(|(m, zones)| Mode {
            face: face_of(&m.face).expect("checked"),
            objective: m.objective.clone(),
            channels: m.reads.clone(),
            evaluator: evaluator.clone(),
            zones,
        })
        .collect();
    let initial_state = doc.state.iter().map(|a| a.init).collect();
    Machine::new(
        complex_ref.clone(),
        space,
        modes,
        channels,
        domains,
        face_of(&doc.initial).expect("checked"),
        initial_state,
    )
    .map_err(|err| vec![Diagnostic::error(err.to_string()).at_loc(&Loc::Root)])
}

/// Judicial parameters from `param a|b|decay` and the corner points.
pub(crate) fn judicial_params(doc: &ScenarioDoc, params: &BTreeMap<&str, f64>) -> Result<judicial::JudicialParams, String> {
    let mut p = judicial::JudicialParams::default();
    if let Some(a) = params.get("a") {
        p.a = *a;
    }
    if let Some(b) = params.get("b") {
        p.b = *b;
    }
    if let Some(d) = params.get("decay") {
        p.decay = *d;
    }
    for (name, xy) in &doc.points {
        p.geometry.set_point(name, *xy);
    }
    p.validate().map_err(|e| e.to_string())?;
    Ok(p)
}
