use std::collections::BTreeMap;

use super::lexer::{lex, Line, Tok, Token};
use super::*;
use crate::engine::Cmp;

/// Parses and validates a `.mode` source.
pub fn parse(src: &str) -> Result<ScenarioDoc, Vec<Diagnostic>> {
    parse_with_map(src).map(|(doc, _)| doc)
}

/// As [`parse`], also returning where each declaration sits in the source.
pub fn parse_with_map(src: &str) -> Result<(ScenarioDoc, SourceMap), Vec<Diagnostic>> {
    let lines = lex(src)?;
    let mut p = Parser { lines: &lines, i: 0, errors: Vec::new(), map: SourceMap::default(), draft: Draft::default(), axes_seen: 0, cover_seen: 0 };
    p.document();
    if !p.errors.is_empty() {
        return Err(p.errors);
    }
    let doc = p.finish()?;
    let mut errors = super::validate(&doc);
    if errors.is_empty() {
        Ok((doc, p.map))
    } else {
        p.map.attach(&mut errors);
        Err(errors)
    }
}

#[derive(Default)]
struct Draft {
    name: Option<String>,
    vertices: Vec<String>,
    faces: Vec<Vec<String>>,
    state: Option<Vec<AxisDecl>>,
    points: BTreeMap<String, [f64; 2]>,
    params: Vec<ParamDecl>,
    cover: Option<Vec<CoverEntry>>,
    evaluator: Option<EvaluatorDecl>,
    channels: Vec<ChannelDecl>,
    modes: Vec<ModeDecl>,
    domains: Vec<DomainDecl>,
    initial: Option<Vec<String>>,
    layout: BTreeMap<String, [f64; 2]>,
    colours: Option<Colours>,
}

struct Parser<'a> {
    lines: &'a [Line],
    i: usize,
    errors: Vec<Diagnostic>,
    map: SourceMap,
    draft: Draft,
    axes_seen: usize,
    cover_seen: usize,
}

const TOP: &[&str] = &[
    "scenario", "vertices", "face", "state", "point", "param", "cover", "evaluator", "channel", "mode",
    "domain", "initial", "layout", "colours",
];

fn describe(t: Option<&Token>) -> String {
    match t.map(|t| &t.tok) {
        None => "end of line".into(),
        Some(Tok::Ident(s)) => format!("`{s}`"),
        Some(Tok::Num(x)) => format!("number {x}"),
        Some(Tok::Str(s)) => format!("string \"{s}\""),
        Some(Tok::Sym(c)) => format!("`{c}`"),
        Some(Tok::Cmp(c)) => format!("`{c}`"),
    }
}

/// Token cursor over one line.
struct Cur<'a> {
    line: &'a Line,
    k: usize,
}

type R<T> = Result<T, Diagnostic>;

impl<'a> Cur<'a> {
    fn new(line: &'a Line) -> Self {
        Cur { line, k: 0 }
    }

    fn peek(&self) -> Option<&'a Token> {
        self.line.tokens.get(self.k)
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.line.tokens.get(self.k);
        self.k += 1;
        t
    }

    fn here(&self) -> Span {
        match self.peek() {
            Some(t) => t.span,
            None => Span::point(self.line.number, self.line.len + 1),
        }
    }

    fn fail<T>(&self, expected: &str) -> R<T> {
        Err(Diagnostic::error(format!("expected {expected}, found {}", describe(self.peek()))).at(self.here()))
    }

    fn ident(&mut self, what: &str) -> R<String> {
        match self.peek().map(|t| &t.tok) {
            Some(Tok::Ident(s)) => {
                self.k += 1;
                Ok(s.clone())
            }
            _ => self.fail(what),
        }
    }

    fn keyword(&mut self, kw: &str) -> R<()> {
        match self.peek().map(|t| &t.tok) {
            Some(Tok::Ident(s)) if s == kw => {
                self.k += 1;
                Ok(())
            }
            _ => self.fail(&format!("`{kw}`")),
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek().map(|t| &t.tok), Some(Tok::Ident(s)) if s == kw)
    }

    fn num(&mut self) -> R<f64> {
        match self.peek().map(|t| &t.tok) {
            Some(Tok::Num(x)) => {
                self.k += 1;
                Ok(*x)
            }
            _ => self.fail("a number"),
        }
    }

    fn string(&mut self) -> R<String> {
        match self.peek().map(|t| &t.tok) {
            Some(Tok::Str(s)) => {
                self.k += 1;
                Ok(s.clone())
            }
            _ => self.fail("a quoted string"),
        }
    }

    fn sym(&mut self, c: char) -> R<()> {
        match self.peek().map(|t| &t.tok) {
            Some(Tok::Sym(d)) if *d == c => {
                self.k += 1;
                Ok(())
            }
            _ => self.fail(&format!("`{c}`")),
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        let hit = matches!(self.peek().map(|t| &t.tok), Some(Tok::Sym(d)) if *d == c);
        self.k += hit as usize;
        hit
    }

    fn done(&self) -> bool {
        self.k >= self.line.tokens.len()
    }

    fn end(&self) -> R<()> {
        if self.done() {
            Ok(())
        } else {
            Err(Diagnostic::error(format!("unexpected {}", describe(self.peek()))).at(self.here()))
        }
    }

    /// Identifiers up to the end of the line.
    fn idents(&mut self, what: &str) -> R<Vec<String>> {
        let mut out = vec![self.ident(what)?];
        while !self.done() {
            out.push(self.ident(what)?);
        }
        Ok(out)
    }

    /// `{a, b}` or `{a b}`.
    fn face(&mut self) -> R<Vec<String>> {
        self.sym('{')?;
        let mut out = Vec::new();
        while !self.eat_sym('}') {
            if !out.is_empty() {
                self.eat_sym(',');
            }
            out.push(self.ident("a vertex name or `}`")?);
        }
        if out.is_empty() {
            return self.fail("at least one vertex");
        }
        Ok(out)
    }

    /// `[lo, hi]`.
    fn interval(&mut self) -> R<[f64; 2]> {
        self.sym('[')?;
        let lo = self.num()?;
        self.sym(',')?;
        let hi = self.num()?;
        self.sym(']')?;
        Ok([lo, hi])
    }

    /// `[x, y, ...]`.
    fn vector(&mut self) -> R<Vec<f64>> {
        self.sym('[')?;
        let mut out = vec![self.num()?];
        while self.eat_sym(',') {
            out.push(self.num()?);
        }
        self.sym(']')?;
        Ok(out)
    }

    fn point_ref(&mut self) -> R<PointRef> {
        if self.eat_sym('(') {
            let x = self.num()?;
            self.sym(',')?;
            let y = self.num()?;
            self.sym(')')?;
            Ok(PointRef::At([x, y]))
        } else {
            Ok(PointRef::Named(self.ident("a point name or `(x, y)`")?))
        }
    }
}

impl<'a> Parser<'a> {
    fn document(&mut self) {
        if self.lines.is_empty() {
            self.errors.push(
                Diagnostic::error("no scenario declared")
                    .at(Span::point(1, 1))
                    .hint("start the file with `scenario \"name\"`"),
            );
            return;
        }
        while self.i < self.lines.len() {
            let line = &self.lines[self.i];
            self.i += 1;
            if let Err(d) = self.top(line) {
                self.errors.push(d);
            }
        }
    }

    fn top(&mut self, line: &'a Line) -> R<()> {
        let mut c = Cur::new(line);
        let kw = c.ident("a declaration keyword")?;
        let span = line.span();
        let d = &mut self.draft;
        match kw.as_str() {
            "scenario" => {
                let name = c.string()?;
                c.end()?;
                if d.name.replace(name).is_some() {
                    return Err(Diagnostic::error("scenario declared twice").at(span));
                }
                self.map.insert(Loc::Name, span);
            }
            "vertices" => {
                let vs = c.idents("a vertex name")?;
                d.vertices.extend(vs);
                self.map.insert(Loc::Vertices, span);
            }
            "face" => {
                let vs = c.idents("a vertex name")?;
                self.map.insert(Loc::Face(d.faces.len()), span);
                d.faces.push(vs);
            }
            "state" => {
                c.end()?;
                if d.state.is_some() {
                    return Err(Diagnostic::error("state declared twice").at(span));
                }
                let axes = self.block(line, "state", |p, l| p.axis_line(l))?;
                self.draft.state = Some(axes);
            }
            "point" => {
                let name = c.ident("a point name")?;
                let x = c.num()?;
                let y = c.num()?;
                c.end()?;
                self.map.insert(Loc::Point(name.clone()), span);
                if d.points.insert(name.clone(), [x, y]).is_some() {
                    return Err(Diagnostic::error(format!("point {name} declared twice")).at(span));
                }
            }
            "param" => {
                let name = c.ident("a parameter name")?;
                let value = c.num()?;
                let busy = if c.is_keyword("busy") {
                    c.bump();
                    Some(c.num()?)
                } else {
                    None
                };
                c.end()?;
                self.map.insert(Loc::Param(d.params.len()), span);
                d.params.push(ParamDecl { name, value, busy });
            }
            "cover" => {
                c.end()?;
                if d.cover.is_some() {
                    return Err(Diagnostic::error("cover declared twice").at(span));
                }
                let entries = self.block(line, "cover", |p, l| p.cover_line(l))?;
                self.draft.cover = Some(entries);
            }
            "evaluator" => {
                let kind_span = c.here();
                let word = c.ident("an evaluator kind")?;
                let kind = EvaluatorKind::from_keyword(&word).ok_or_else(|| {
                    Diagnostic::error(format!("unknown evaluator `{word}`"))
                        .at(kind_span)
                        .hint("use one of pou, offender, barycentric, judicial")
                })?;
                let mut axes = Vec::new();
                let mut margin = None;
                while !c.done() {
                    if c.is_keyword("margin") {
                        c.bump();
                        margin = Some(c.num()?);
                    } else {
                        axes.push(c.ident("an axis name or `margin`")?);
                    }
                }
                if d.evaluator.replace(EvaluatorDecl { kind, axes, margin }).is_some() {
                    return Err(Diagnostic::error("evaluator declared twice").at(span));
                }
                self.map.insert(Loc::Evaluator, span);
            }
            "channel" => {
                let name = c.ident("a channel name")?;
                c.keyword("writes")?;
                let writes = c.idents("an axis name")?;
                self.map.insert(Loc::Channel(d.channels.len()), span);
                d.channels.push(ChannelDecl { name, writes });
            }
            "mode" => {
                let face = c.idents("a vertex name")?;
                let idx = d.modes.len();
                self.map.insert(Loc::Mode(idx), span);
                let mut mode = ModeDecl { face, objective: String::new(), reads: Vec::new(), zones: Vec::new() };
                let items = self.block(line, "mode", |p, l| p.mode_line(l, idx))?;
                for item in items {
                    match item {
                        ModeItem::Objective(s) => mode.objective = s,
                        ModeItem::Reads(r) => mode.reads.extend(r),
                        ModeItem::Zone(z) => mode.zones.push(z),
                    }
                }
                self.draft.modes.push(mode);
            }
            "domain" => {
                let mode = c.face()?;
                let region = self.region(&mut c, line)?;
                self.map.insert(Loc::Domain(self.draft.domains.len()), span);
                self.draft.domains.push(DomainDecl { mode, region });
            }
            "initial" => {
                let face = c.idents("a vertex name")?;
                if d.initial.replace(face).is_some() {
                    return Err(Diagnostic::error("initial mode declared twice").at(span));
                }
                self.map.insert(Loc::Initial, span);
            }
            "layout" => {
                let v = c.ident("a vertex name")?;
                let x = c.num()?;
                let y = c.num()?;
                c.end()?;
                self.map.insert(Loc::Layout(v.clone()), span);
                d.layout.insert(v, [x, y]);
            }
            "colours" => {
                let low = c.num()?;
                let high = c.num()?;
                c.end()?;
                d.colours = Some(Colours { low, high });
                self.map.insert(Loc::Colours, span);
            }
            "end" => return Err(Diagnostic::error("`end` without an open block").at(span)),
            other => {
                return Err(Diagnostic::error(format!("unknown declaration `{other}`"))
                    .at(line.tokens[0].span)
                    .hint(format!("expected one of: {}", TOP.join(", "))))
            }
        }
        Ok(())
    }

    /// Runs `item` over lines until `end`. Per-line errors are recorded and
    /// parsing continues; a missing `end` is reported at the opening line.
    fn block<T>(&mut self, open: &Line, what: &str, mut item: impl FnMut(&mut Self, &'a Line) -> R<T>) -> R<Vec<T>> {
        let mut out = Vec::new();
        while self.i < self.lines.len() {
            let line = &self.lines[self.i];
            let head = match &line.tokens[0].tok {
                Tok::Ident(s) => s.as_str(),
                _ => "",
            };
            if head == "end" {
                self.i += 1;
                if let Err(d) = (Cur { line, k: 1 }).end() {
                    self.errors.push(d);
                }
                return Ok(out);
            }
            if TOP.contains(&head) && !(what == "cover" && head == "region") {
                break;
            }
            self.i += 1;
            match item(self, line) {
                Ok(x) => out.push(x),
                Err(d) => self.errors.push(d),
            }
        }
        Err(Diagnostic::error(format!("`{what}` block is not closed")).at(open.span()).hint("add a line with `end`"))
    }

    fn axis_line(&mut self, line: &'a Line) -> R<AxisDecl> {
        let mut c = Cur::new(line);
        c.keyword("axis")?;
        let name = c.ident("an axis name")?;
        let lo = c.num()?;
        let hi = c.num()?;
        c.keyword("init")?;
        let init = c.num()?;
        c.end()?;
        self.map.insert(Loc::Axis(self.axes_seen), line.span());
        self.axes_seen += 1;
        Ok(AxisDecl { name, lo, hi, init })
    }

    fn cover_line(&mut self, line: &'a Line) -> R<CoverEntry> {
        let mut c = Cur::new(line);
        c.keyword("region")?;
        let vertex = c.ident("a vertex name")?;
        let region = self.region(&mut c, line)?;
        self.map.insert(Loc::Cover(self.cover_seen), line.span());
        self.cover_seen += 1;
        Ok(CoverEntry { vertex, region })
    }

    /// A region starting at the cursor. `union` and `intersection` at the
    /// end of a line open a block of one region per line.
    fn region(&mut self, c: &mut Cur<'a>, line: &'a Line) -> R<RegionDecl> {
        let kw_span = c.here();
        let kw = c.ident("a region kind")?;
        let r = match kw.as_str() {
            "box" => {
                let mut iv = vec![c.interval()?];
                while !c.done() {
                    iv.push(c.interval()?);
                }
                RegionDecl::Box(iv)
            }
            "halfspace" => {
                let normal = c.vector()?;
                match c.bump().map(|t| &t.tok) {
                    Some(Tok::Cmp("<=")) => {}
                    _ => {
                        c.k -= 1;
                        return c.fail("`<=`");
                    }
                }
                let offset = c.num()?;
                RegionDecl::HalfSpace { normal, offset }
            }
            "polygon" => {
                let mut pts = vec![c.point_ref()?];
                while !c.done() {
                    pts.push(c.point_ref()?);
                }
                RegionDecl::Polygon(pts)
            }
            "union" | "intersection" => {
                c.end()?;
                let parts = self.block(line, &kw, |p, l| {
                    let mut c = Cur::new(l);
                    let r = p.region(&mut c, l)?;
                    c.end()?;
                    Ok(r)
                })?;
                if kw == "union" {
                    RegionDecl::Union(parts)
                } else {
                    RegionDecl::Intersection(parts)
                }
            }
            other => {
                return Err(Diagnostic::error(format!("unknown region kind `{other}`"))
                    .at(kw_span)
                    .hint("use box, halfspace, polygon, union or intersection"))
            }
        };
        c.end()?;
        Ok(r)
    }

    fn mode_line(&mut self, line: &'a Line, mode: usize) -> R<ModeItem> {
        let mut c = Cur::new(line);
        let kw = c.ident("`objective`, `reads` or `zone`")?;
        match kw.as_str() {
            "objective" => {
                let s = c.string()?;
                c.end()?;
                Ok(ModeItem::Objective(s))
            }
            "reads" => Ok(ModeItem::Reads(c.idents("a channel name")?)),
            "zone" => {
                let zone_idx = self.draft.modes.len();
                debug_assert_eq!(zone_idx, mode);
                let name = c.ident("a zone name")?;
                c.keyword("when")?;
                let mut when = vec![atom(&mut c)?];
                while c.is_keyword("and") {
                    c.bump();
                    when.push(atom(&mut c)?);
                }
                let act_span = c.here();
                let act = c.ident("`warn`, `transition` or `intervene`")?;
                let action = match act.as_str() {
                    "warn" => ActionDecl::Warn(c.string()?),
                    "intervene" => ActionDecl::Intervene(c.string()?),
                    "transition" => ActionDecl::Transition(c.face()?),
                    other => {
                        return Err(Diagnostic::error(format!("unknown action `{other}`"))
                            .at(act_span)
                            .hint("use warn, transition or intervene"))
                    }
                };
                c.end()?;
                let j = self.zone_counter(mode);
                self.map.insert(Loc::Zone(mode, j), line.span());
                Ok(ModeItem::Zone(ZoneDecl { name, when, action }))
            }
            other => Err(Diagnostic::error(format!("unknown mode item `{other}`"))
                .at(line.tokens[0].span)
                .hint("use objective, reads or zone")),
        }
    }

    fn zone_counter(&self, mode: usize) -> usize {
        (0..)
            .find(|j| self.map.get(&Loc::Zone(mode, *j)).is_none())
            .expect("unbounded range")
    }

    fn finish(&mut self) -> Result<ScenarioDoc, Vec<Diagnostic>> {
        let d = std::mem::take(&mut self.draft);
        let mut missing = Vec::new();
        let name = d.name.unwrap_or_default();
        if self.map.get(&Loc::Name).is_none() {
            missing.push(
                Diagnostic::error("no scenario declared")
                    .at(Span::point(1, 1))
                    .hint("start the file with `scenario \"name\"`"),
            );
        }
        // Missing sections are reported at the end of the last non-blank line.
        let end = self.lines.last().map_or(Span::point(1, 1), |l| Span::point(l.number, l.len + 1));
        if d.evaluator.is_none() {
            missing.push(Diagnostic::error("no evaluator declared").at(end).hint("add e.g. `evaluator pou`"));
        }
        if d.state.is_none() {
            missing.push(Diagnostic::error("no state block declared").at(end));
        }
        if d.initial.is_none() {
            missing.push(Diagnostic::error("no initial mode declared").at(end).hint("add `initial <vertices>`"));
        }
        if !missing.is_empty() {
            return Err(missing);
        }
        Ok(ScenarioDoc {
            name,
            vertices: d.vertices,
            faces: d.faces,
            state: d.state.unwrap_or_default(),
            points: d.points,
            params: d.params,
            cover: d.cover.unwrap_or_default(),
            evaluator: d.evaluator.expect("checked"),
            channels: d.channels,
            modes: d.modes,
            domains: d.domains,
            initial: d.initial.expect("checked"),
            layout: d.layout,
            colours: d.colours,
        })
    }
}

enum ModeItem {
    Objective(String),
    Reads(Vec<String>),
    Zone(ZoneDecl),
}

fn atom(c: &mut Cur) -> R<AtomDecl> {
    if c.is_keyword("weight") {
        c.bump();
        c.sym('(')?;
        let weight = c.ident("a vertex name")?;
        c.sym(')')?;
        let cmp = match c.peek().map(|t| &t.tok) {
            Some(Tok::Cmp(op)) => {
                c.bump();
                Cmp::parse(op).expect("lexer only emits known operators")
            }
            _ => return c.fail("a comparison"),
        };
        let threshold = match c.peek().map(|t| &t.tok) {
            Some(Tok::Num(x)) => {
                c.bump();
                Threshold::Value(*x)
            }
            Some(Tok::Ident(s)) => {
                c.bump();
                Threshold::Param(s.clone())
            }
            _ => return c.fail("a threshold number or parameter name"),
        };
        Ok(AtomDecl::Weight(WeightAtom { weight, cmp, threshold }))
    } else if c.is_keyword("in") {
        c.bump();
        let face = c.face()?;
        c.keyword("tol")?;
        let tol = c.num()?;
        Ok(AtomDecl::InFace(FaceAtom { face, tol }))
    } else {
        c.fail("`weight(v)` or `in {face}`")
    }
}
