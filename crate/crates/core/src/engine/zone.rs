use std::fmt;

use serde::{Deserialize, Serialize};

use crate::simplicial::{Face, SimplexPoint, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cmp {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
}

impl Cmp {
    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
            Cmp::Le => "<=",
            Cmp::Lt => "<",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            ">=" => Cmp::Ge,
            ">" => Cmp::Gt,
            "<=" => Cmp::Le,
            "<" => Cmp::Lt,
            _ => return None,
        })
    }
}

/// One barycentric constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum Atom {
    Weight { vertex: VertexId, cmp: Cmp, threshold: f64 },
    /// The point lies in `face` up to `tol`.
    InFace { face: Face, tol: f64 },
}

impl Atom {
    pub fn holds(&self, p: &SimplexPoint) -> bool {
        match self {
            Atom::Weight { vertex, cmp, threshold } => {
                let w = p.weight(vertex);
                match cmp {
                    Cmp::Ge => w >= *threshold,
                    Cmp::Gt => w > *threshold,
                    Cmp::Le => w <= *threshold,
                    Cmp::Lt => w < *threshold,
                }
            }
            Atom::InFace { face, tol } => crate::simplicial::in_face(p, face, *tol),
        }
    }

    /// Signed distance to the constraint boundary: positive while the atom
    /// does not hold, zero on the line, negative inside.
    pub fn margin(&self, p: &SimplexPoint) -> f64 {
        match self {
            Atom::Weight { vertex, cmp, threshold } => {
                let w = p.weight(vertex);
                match cmp {
                    Cmp::Ge | Cmp::Gt => threshold - w,
                    Cmp::Le | Cmp::Lt => w - threshold,
                }
            }
            Atom::InFace { face, tol } => {
                let outside: f64 = p.iter().filter(|(v, _)| !face.contains(v)).map(|(_, w)| w).sum();
                outside - tol
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Weight { vertex, cmp, threshold } => {
                write!(f, "weight({vertex}) {} {}", cmp.symbol(), crate::numeric::fmt_num(*threshold))
            }
            Atom::InFace { face, tol } => write!(f, "in {face} tol {}", crate::numeric::fmt_num(*tol)),
        }
    }
}

/// A conjunction of atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Predicate(pub Vec<Atom>);

impl Predicate {
    pub fn holds(&self, p: &SimplexPoint) -> bool {
        self.0.iter().all(|a| a.holds(p))
    }

    pub fn margin(&self, p: &SimplexPoint) -> f64 {
        self.0
            .iter()
            .map(|a| a.margin(p))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// A predicate that no point of a simplex can satisfy.
    pub fn is_unsatisfiable(&self) -> bool {
        self.0.iter().any(|a| match a {
            Atom::Weight { cmp, threshold, .. } => match cmp {
                Cmp::Ge => *threshold > 1.0,
                Cmp::Gt => *threshold >= 1.0,
                Cmp::Le => *threshold < 0.0,
                Cmp::Lt => *threshold <= 0.0,
            },
            Atom::InFace { .. } => false,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Warn(String),
    Transition(Face),
    Intervene(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Zone {
    pub name: String,
    pub predicate: Predicate,
    pub action: Action,
}
