//! Scenario files: a line-oriented `.mode` language and its canonical JSON
//! twin, with validation, linting and compilation to an engine [`Machine`].
//!
//! [`Machine`]: crate::engine::Machine

mod check;
mod json;
mod lexer;
mod lint;
mod parser;
mod printer;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use check::{compile, validate, CompileOptions};
pub use json::{from_json, to_json};
pub use lint::lint;
pub use parser::{parse, parse_with_map};
pub use printer::to_text;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub name: String,
    pub vertices: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub faces: Vec<Vec<String>>,
    pub state: Vec<AxisDecl>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub points: BTreeMap<String, [f64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<ParamDecl>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cover: Vec<CoverEntry>,
    pub evaluator: EvaluatorDecl,
    pub channels: Vec<ChannelDecl>,
    pub modes: Vec<ModeDecl>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub domains: Vec<DomainDecl>,
    pub initial: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub layout: BTreeMap<String, [f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colours: Option<Colours>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisDecl {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub init: f64,
}

/// A named number, optionally with a different value on busy days.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamDecl {
    pub name: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub busy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverEntry {
    pub vertex: String,
    pub region: RegionDecl,
}

/// A polygon corner: literal coordinates or the name of a declared point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointRef {
    Named(String),
    At([f64; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum RegionDecl {
    Box(Vec<[f64; 2]>),
    HalfSpace { normal: Vec<f64>, offset: f64 },
    Polygon(Vec<PointRef>),
    Union(Vec<RegionDecl>),
    Intersection(Vec<RegionDecl>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvaluatorKind {
    /// Partition of unity over the declared cover.
    Pou,
    /// Offender ramp map; axes `(alc, tag)`.
    Offender,
    /// Each vertex reads the state axis of the same name.
    Barycentric,
    /// Judicial boundary interpolation; axes `(t, g)`.
    Judicial,
}

impl EvaluatorKind {
    pub fn keyword(self) -> &'static str {
        match self {
            EvaluatorKind::Pou => "pou",
            EvaluatorKind::Offender => "offender",
            EvaluatorKind::Barycentric => "barycentric",
            EvaluatorKind::Judicial => "judicial",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        Some(match s {
            "pou" => EvaluatorKind::Pou,
            "offender" => EvaluatorKind::Offender,
            "barycentric" => EvaluatorKind::Barycentric,
            "judicial" => EvaluatorKind::Judicial,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluatorDecl {
    pub kind: EvaluatorKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub axes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDecl {
    pub name: String,
    pub writes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeDecl {
    pub face: Vec<String>,
    #[serde(default)]
    pub objective: String,
    #[serde(default)]
    pub reads: Vec<String>,
    #[serde(default)]
    pub zones: Vec<ZoneDecl>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZoneDecl {
    pub name: String,
    pub when: Vec<AtomDecl>,
    pub action: ActionDecl,
}

/// A threshold literal or a parameter name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Threshold {
    Value(f64),
    Param(String),
}

/// One conjunct of a zone predicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AtomDecl {
    Weight(WeightAtom),
    InFace(FaceAtom),
}

/// `weight(v) cmp threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightAtom {
    pub weight: String,
    pub cmp: crate::engine::Cmp,
    pub threshold: Threshold,
}

/// The point lies in a face up to a tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceAtom {
    #[serde(rename = "in")]
    pub face: Vec<String>,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ActionDecl {
    Warn(String),
    Transition(Vec<String>),
    Intervene(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainDecl {
    pub mode: Vec<String>,
    pub region: RegionDecl,
}

/// Confidence band edges for rendering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Colours {
    pub low: f64,
    pub high: f64,
}

/// A logical place in a document, independent of its concrete syntax.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Loc {
    Root,
    Name,
    Vertices,
    Face(usize),
    Axis(usize),
    Point(String),
    Param(usize),
    Cover(usize),
    Evaluator,
    Channel(usize),
    Mode(usize),
    Zone(usize, usize),
    Domain(usize),
    Initial,
    Layout(String),
    Colours,
}

impl Loc {
    /// The JSON pointer of this place in the canonical twin.
    pub fn pointer(&self) -> String {
        match self {
            Loc::Root => String::new(),
            Loc::Name => "/name".into(),
            Loc::Vertices => "/vertices".into(),
            Loc::Face(i) => format!("/faces/{i}"),
            Loc::Axis(i) => format!("/state/{i}"),
            Loc::Point(p) => format!("/points/{}", escape(p)),
            Loc::Param(i) => format!("/params/{i}"),
            Loc::Cover(i) => format!("/cover/{i}"),
            Loc::Evaluator => "/evaluator".into(),
            Loc::Channel(i) => format!("/channels/{i}"),
            Loc::Mode(i) => format!("/modes/{i}"),
            Loc::Zone(i, j) => format!("/modes/{i}/zones/{j}"),
            Loc::Domain(i) => format!("/domains/{i}"),
            Loc::Initial => "/initial".into(),
            Loc::Layout(v) => format!("/layout/{}", escape(v)),
            Loc::Colours => "/colours".into(),
        }
    }
}

pub(crate) fn escape(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}

/// 1-based line and column range; `end_col` is exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub col: usize,
    pub end_line: usize,
    pub end_col: usize,
}

impl Span {
    pub fn point(line: usize, col: usize) -> Self {
        Span { line, col, end_line: line, end_col: col + 1 }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub span: Option<Span>,
    pub pointer: Option<String>,
    pub message: String,
    pub hint: Option<String>,
}

impl Diagnostic {
    pub fn error(message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            span: None,
            pointer: None,
            message: message.into(),
            hint: None,
        }
    }

    pub fn warning(message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, ..Diagnostic::error(message) }
    }

    pub fn at(mut self, span: Span) -> Self {
        self.span = Some(span);
        self
    }

    pub fn at_loc(mut self, loc: &Loc) -> Self {
        self.pointer = Some(loc.pointer());
        self
    }

    pub fn hint(mut self, hint: impl Into<String>) -> Self {
        self.hint = Some(hint.into());
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}")?;
        match (&self.span, &self.pointer) {
            (Some(s), _) => write!(f, " at {s}")?,
            (None, Some(p)) => write!(f, " at {}", if p.is_empty() { "/" } else { p })?,
            _ => {}
        }
        write!(f, ": {}", self.message)?;
        if let Some(h) = &self.hint {
            write!(f, " (hint: {h})")?;
        }
        Ok(())
    }
}

/// Source positions of each declaration in a parsed `.mode` file.
#[derive(Debug, Clone, Default)]
pub struct SourceMap {
    spans: HashMap<Loc, Span>,
}

impl SourceMap {
    pub(crate) fn insert(&mut self, loc: Loc, span: Span) {
        self.spans.entry(loc).or_insert(span);
    }

    pub fn get(&self, loc: &Loc) -> Option<Span> {
        self.spans.get(loc).copied()
    }

    /// Fills in source spans for diagnostics that only carry a pointer.
    pub fn attach(&self, diags: &mut [Diagnostic]) {
        for d in diags.iter_mut().filter(|d| d.span.is_none()) {
            if let Some(p) = &d.pointer {
                if let Some((_, s)) = self.spans.iter().filter(|(l, _)| &l.pointer() == p).min_by_key(|(_, s)| (s.line, s.col)) {
                    d.span = Some(*s);
                }
            }
        }
    }
}

/// Loads a scenario from `.mode` text or `.json` text, chosen by `json`.
/// Lint warnings are appended after a successful load.
pub fn load(text: &str, json: bool) -> Result<(ScenarioDoc, Vec<Diagnostic>), Vec<Diagnostic>> {
    if json {
        let doc = from_json(text)?;
        let warnings = lint(&doc);
        Ok((doc, warnings))
    } else {
        let (doc, map) = parse_with_map(text)?;
        let mut warnings = lint(&doc);
        map.attach(&mut warnings);
        Ok((doc, warnings))
    }
}

#[cfg(test)]
mod tests;
