//! Abstract simplicial complexes and points of their standard realisation.
//!
//! A [`Face`] is a non-empty set of vertices kept in canonical sorted order, an
//! [`AbstractComplex`] is a downward-closed family of faces, and a
//! [`SimplexPoint`] is a barycentric weight vector supported on one face.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::TOL;

/// Maximum number of vertices in one complex.
pub const MAX_VERTICES: usize = 24;
/// Maximum number of faces in one complex.
pub const MAX_FACES: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimplicialError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("complex too large: {0}")]
    TooLarge(String),
    #[error("support {0} is not a face of the complex")]
    NotAFace(Face),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("every weight is at or below the tolerance {tol}")]
    DegeneratePoint { tol: f64 },
}

/// A basic mode: a symbolic vertex name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(String);

impl VertexId {
    pub fn new(name: impl Into<String>) -> Result<Self, SimplicialError> {
        let name = name.into();
        if name.is_empty() {
            return Err(SimplicialError::InvalidInput("empty vertex name".into()));
        }
        Ok(VertexId(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VertexId {
    /// Panics on the empty string; use [`VertexId::new`] for untrusted input.
    fn from(s: &str) -> Self {
        VertexId::new(s).expect("vertex names are non-empty")
    }
}

/// A face (simplex) of an abstract complex. Vertices are sorted and unique.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<VertexId>", into = "Vec<VertexId>")]
pub struct Face(Vec<VertexId>);

impl Face {
    pub fn new<I, V>(vertices: I) -> Result<Self, SimplicialError>
    where
        I: IntoIterator<Item = V>,
        V: Into<VertexId>,
    {
        let mut vs: Vec<VertexId> = vertices.into_iter().map(Into::into).collect();
        if vs.is_empty() {
            return Err(SimplicialError::InvalidInput("empty face".into()));
        }
        vs.sort();
        let before = vs.len();
        vs.dedup();
        if vs.len() != before {
            return Err(SimplicialError::InvalidInput(format!(
                "duplicate vertex in face {}",
                Face(vs)
            )));
        }
        Ok(Face(vs))
    }

    /// Builds a face from names, panicking on invalid input. Intended for
    /// literals in tests and fixtures.
    pub fn of(names: &[&str]) -> Self {
        Face::new(names.iter().copied()).expect("valid face literal")
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn contains(&self, v: &VertexId) -> bool {
        self.0.binary_search(v).is_ok()
    }

    pub fn is_subset_of(&self, other: &Face) -> bool {
        self.0.iter().all(|v| other.contains(v))
    }

    /// All non-empty subsets, including the face itself.
    pub fn subfaces(&self) -> impl Iterator<Item = Face> + '_ {
        let n = self.0.len();
        (1u64..(1u64 << n)).map(move |mask| {
            Face(
                (0..n)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| self.0[i].clone())
                    .collect(),
            )
        })
    }

    pub fn names(&self) -> Vec<String> {
        self.0.iter().map(|v| v.0.clone()).collect()
    }
}

impl TryFrom<Vec<VertexId>> for Face {
    type Error = SimplicialError;
    fn try_from(v: Vec<VertexId>) -> Result<Self, Self::Error> {
        Face::new(v)
    }
}

impl From<Face> for Vec<VertexId> {
    fn from(f: Face) -> Self {
        f.0
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(&v.0)?;
        }
        f.write_str("}")
    }
}

/// A downward-closed family of faces over a finite vertex set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractComplex {
    vertices: BTreeSet<VertexId>,
    faces: BTreeSet<Face>,
}

/// Closes `faces` downward: the result holds every input face and all of its
/// non-empty subsets.
pub fn close_downward(faces: &[Face]) -> Result<AbstractComplex, SimplicialError> {
    if faces.is_empty() {
        return Err(SimplicialError::InvalidInput("no faces given".into()));
    }
    let vertices: BTreeSet<VertexId> = faces.iter().flat_map(|f| f.0.iter().cloned()).collect();
    if vertices.len() > MAX_VERTICES {
        return Err(SimplicialError::TooLarge(format!(
            "{} vertices (limit {MAX_VERTICES})",
            vertices.len()
        )));
    }
    let mut closed = BTreeSet::new();
    for face in faces {
        // 2^17 - 1 subsets alone would exceed the face cap.
        if face.len() > 16 {
            return Err(SimplicialError::TooLarge(format!(
                "face {face} has {} vertices; its closure exceeds {MAX_FACES} faces",
                face.len()
            )));
        }
        if closed.contains(face) {
            continue;
        }
        closed.extend(face.subfaces());
        if closed.len() > MAX_FACES {
            return Err(SimplicialError::TooLarge(format!(
                "more than {MAX_FACES} faces"
            )));
        }
    }
    Ok(AbstractComplex {
        vertices,
        faces: closed,
    })
}

impl AbstractComplex {
    /// The full simplex on the given vertices.
    pub fn simplex(face: &Face) -> Result<Self, SimplicialError> {
        close_downward(std::slice::from_ref(face))
    }

    pub fn vertices(&self) -> &BTreeSet<VertexId> {
        &self.vertices
    }

    pub fn faces(&self) -> &BTreeSet<Face> {
        &self.faces
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.faces.iter().map(Face::dim).max().unwrap_or(0)
    }

    pub fn contains(&self, face: &Face) -> bool {
        self.faces.contains(face)
    }

    pub fn faces_of_dim(&self, dim: usize) -> impl Iterator<Item = &Face> {
        self.faces.iter().filter(move |f| f.dim() == dim)
    }

    /// Faces not strictly contained in another face.
    pub fn maximal_faces(&self) -> Vec<&Face> {
        self.faces
            .iter()
            .filter(|f| {
                !self
                    .faces
                    .iter()
                    .any(|g| g.len() > f.len() && f.is_subset_of(g))
            })
            .collect()
    }

    pub fn vertex(&self, name: &str) -> Option<&VertexId> {
        self.vertices.iter().find(|v| v.as_str() == name)
    }
}

/// Membership query. Unknown vertices simply make the answer `false`.
pub fn is_face<'a, I>(complex: &AbstractComplex, candidate: I) -> bool
where
    I: IntoIterator<Item = &'a str>,
{
    match Face::new(candidate.into_iter().map(VertexId::from)) {
        Ok(face) => complex.contains(&face),
        Err(_) => false,
    }
}

/// A point of the standard realisation: barycentric weights on a carrier face.
///
/// `weights[i]` belongs to `carrier.vertices()[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint {
    carrier: Face,
    weights: Vec<f64>,
}

impl SimplexPoint {
    /// Builds a point from `(vertex, weight)` pairs without reference to a
    /// complex. Zero weights are dropped from the carrier; the remaining
    /// weights are renormalised to sum exactly to one.
    pub fn from_weights<I, V>(weights: I) -> Result<Self, SimplicialError>
    where
        I: IntoIterator<Item = (V, f64)>,
        V: Into<VertexId>,
    {
        let mut map: BTreeMap<VertexId, f64> = BTreeMap::new();
        for (v, w) in weights {
            let v = v.into();
            if !w.is_finite() {
                return Err(SimplicialError::InvalidWeights(format!(
                    "non-finite weight for {v}"
                )));
            }
            if w < -TOL {
                return Err(SimplicialError::InvalidWeights(format!(
                    "negative weight {w} for {v}"
                )));
            }
            if map.insert(v.clone(), w.max(0.0)).is_some() {
                return Err(SimplicialError::InvalidWeights(format!(
                    "vertex {v} given twice"
                )));
            }
        }
        let sum: f64 = map.values().sum();
        if (sum - 1.0).abs() > TOL {
            return Err(SimplicialError::InvalidWeights(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        let support: Vec<(VertexId, f64)> = map.into_iter().filter(|(_, w)| *w > 0.0).collect();
        let carrier = Face::new(support.iter().map(|(v, _)| v.clone()))?;
        let weights = support.into_iter().map(|(_, w)| w / sum).collect();
        Ok(SimplexPoint { carrier, weights })
    }

    /// The basis vector `e_v`.
    pub fn vertex(v: VertexId) -> Self {
        SimplexPoint {
            carrier: Face(vec![v]),
            weights: vec![1.0],
        }
    }

    pub fn carrier(&self) -> &Face {
        &self.carrier
    }

    pub fn weight(&self, v: &VertexId) -> f64 {
        match self.carrier.0.binary_search(v) {
            Ok(i) => self.weights[i],
            Err(_) => 0.0,
        }
    }

    pub fn weight_of(&self, name: &str) -> f64 {
        self.iter()
            .find(|(v, _)| v.as_str() == name)
            .map_or(0.0, |(_, w)| w)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VertexId, f64)> {
        self.carrier.0.iter().zip(self.weights.iter().copied())
    }

    pub fn to_map(&self) -> BTreeMap<VertexId, f64> {
        self.iter().map(|(v, w)| (v.clone(), w)).collect()
    }

    /// Largest absolute weight difference to `other`, over the union of both
    /// carriers.
    pub fn linf_distance(&self, other: &SimplexPoint) -> f64 {
        let mut d: f64 = 0.0;
        for (v, w) in self.iter() {
            d = d.max((w - other.weight(v)).abs());
        }
        for (v, w) in other.iter() {
            d = d.max((w - self.weight(v)).abs());
        }
        d
    }
}

/// Validates `weights` against `complex` and returns the point they describe.
pub fn realize_point<I, V>(
    complex: &AbstractComplex,
    weights: I,
) -> Result<SimplexPoint, SimplicialError>
where
    I: IntoIterator<Item = (V, f64)>,
    V: Into<VertexId>,
{
    let point = SimplexPoint::from_weights(weights)?;
    if !complex.contains(&point.carrier) {
        return Err(SimplicialError::NotAFace(point.carrier));
    }
    Ok(point)
}

/// Smallest face holding every vertex whose weight exceeds `tol`.
pub fn carrier_face(point: &SimplexPoint, tol: f64) -> Result<Face, SimplicialError> {
    let kept: Vec<VertexId> = point
        .iter()
        .filter(|(_, w)| *w > tol)
        .map(|(v, _)| v.clone())
        .collect();
    if kept.is_empty() {
        return Err(SimplicialError::DegeneratePoint { tol });
    }
    Face::new(kept)
}

/// True iff every vertex outside `face` carries weight at most `tol`.
pub fn in_face(point: &SimplexPoint, face: &Face, tol: f64) -> bool {
    point.iter().all(|(v, w)| face.contains(v) || w <= tol)
}

pub type Coord = [f64; 2];

const LAYOUT_SEED: u64 = 0x5eed;
const LAYOUT_ITERATIONS: usize = 300;

/// Planar coordinates for every vertex.
///
/// Hinted vertices keep their hint. The rest start from a seeded random
/// placement and relax under a Fruchterman–Reingold force model over the
/// 1-skeleton, with hinted vertices pinned. Output is identical across runs.
pub fn layout(
    complex: &AbstractComplex,
    hints: &BTreeMap<VertexId, Coord>,
) -> BTreeMap<VertexId, Coord> {
    let verts: Vec<&VertexId> = complex.vertices().iter().collect();
    let n = verts.len();
    let mut out = BTreeMap::new();
    if n == 1 && hints.is_empty() {
        out.insert(verts[0].clone(), [0.0, 0.0]);
        return out;
    }
    let index: BTreeMap<&VertexId, usize> = verts.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(LAYOUT_SEED);
    let mut pos: Vec<Coord> = verts
        .iter()
        .map(|v| {
            let r: Coord = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            hints.get(*v).copied().unwrap_or(r)
        })
        .collect();
    let pinned: Vec<bool> = verts.iter().map(|v| hints.contains_key(*v)).collect();
    let edges: Vec<(usize, usize)> = complex
        .faces_of_dim(1)
        .map(|f| (index[&f.vertices()[0]], index[&f.vertices()[1]]))
        .collect();

    let k = (4.0 / n as f64).sqrt();
    let mut temperature = 0.2;
    for _ in 0..LAYOUT_ITERATIONS {
        let mut disp = vec![[0.0f64; 2]; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let dx = pos[i][0] - pos[j][0];
                let dy = pos[i][1] - pos[j][1];
                let d = (dx * dx + dy * dy).sqrt().max(1e-6);
                let f = k * k / d;
                disp[i][0] += dx / d * f;
                disp[i][1] += dy / d * f;
            }
        }
        for &(a, b) in &edges {
            let dx = pos[a][0] - pos[b][0];
            let dy = pos[a][1] - pos[b][1];
            let d = (dx * dx + dy * dy).sqrt().max(1e-6);
            let f = d * d / k;
            disp[a][0] -= dx / d * f;
            disp[a][1] -= dy / d * f;
            disp[b][0] += dx / d * f;
            disp[b][1] += dy / d * f;
        }
        for i in 0..n {
            if pinned[i] {
                continue;
            }
            let len = (disp[i][0].powi(2) + disp[i][1].powi(2)).sqrt().max(1e-9);
            let step = len.min(temperature);
            pos[i][0] += disp[i][0] / len * step;
            pos[i][1] += disp[i][1] / len * step;
        }
        temperature *= 0.985;
    }
    for (v, p) in verts.into_iter().zip(pos) {
        out.insert(v.clone(), p);
    }
    out
}
