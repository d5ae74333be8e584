//! State spaces, covers by closed regions, the nerve of a cover and
//! partitions of unity subordinate to it.

mod pou;
mod region;

pub use pou::{build_pou, default_margin, evaluate, PartitionOfUnity, PouReport};
pub use region::{Point2, Region};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par::Exec;
use crate::simplicial::{close_downward, AbstractComplex, Face, SimplicialError, VertexId};
use region::{intersect_exact, Exact};

pub const MAX_DIMS: usize = 8;
/// Default samples per axis for grid-based checks.
pub const DEFAULT_RESOLUTION: usize = 512;
/// Upper bound on the number of grid points in one sweep.
pub const MAX_GRID_POINTS: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoverError {
    #[error("invalid state space: {0}")]
    InvalidSpace(String),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("invalid cover: {0}")]
    InvalidCover(String),
    #[error("no region covers the state {witness:?}")]
    CoverageGap { witness: Vec<f64> },
    #[error("cannot decide whether {face} has a common point at resolution {resolution}")]
    Resolution { face: Face, resolution: usize },
    #[error("{0} is not a face of the nerve")]
    InvalidMode(Face),
    #[error("state {0:?} lies outside the state space")]
    OutOfDomain(Vec<f64>),
    #[error(transparent)]
    Simplicial(#[from] SimplicialError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

impl Axis {
    pub fn new(name: impl Into<String>, lo: f64, hi: f64) -> Self {
        Axis {
            name: name.into(),
            lo,
            hi,
        }
    }
}

/// An axis-aligned box of possible states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    axes: Vec<Axis>,
}

impl StateSpace {
    pub fn new(axes: Vec<Axis>) -> Result<Self, CoverError> {
        if axes.is_empty() || axes.len() > MAX_DIMS {
            return Err(CoverError::InvalidSpace(format!(
                "{} axes (allowed 1..={MAX_DIMS})",
                axes.len()
            )));
        }
        for (i, a) in axes.iter().enumerate() {
            if !(a.lo.is_finite() && a.hi.is_finite() && a.lo < a.hi) {
                return Err(CoverError::InvalidSpace(format!(
                    "axis {} needs lo < hi, got [{}, {}]",
                    a.name, a.lo, a.hi
                )));
            }
            if a.name.is_empty() || axes[..i].iter().any(|b| b.name == a.name) {
                return Err(CoverError::InvalidSpace(format!(
                    "axis name `{}` is empty or repeated",
                    a.name
                )));
            }
        }
        Ok(StateSpace { axes })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axis_index(&self, name: &str) -> Option<usize> {
        self.axes.iter().position(|a| a.name == name)
    }

    pub fn contains(&self, s: &[f64]) -> bool {
        s.len() == self.axes.len()
            && s
                .iter()
                .zip(&self.axes)
                .all(|(x, a)| *x >= a.lo - 1e-12 && *x <= a.hi + 1e-12)
    }

    pub fn bounds(&self) -> Vec<[f64; 2]> {
        self.axes.iter().map(|a| [a.lo, a.hi]).collect()
    }

    pub fn shortest_axis(&self) -> f64 {
        self.axes
            .iter()
            .map(|a| a.hi - a.lo)
            .fold(f64::INFINITY, f64::min)
    }
}

/// A regular sampling grid over a box, endpoints included.
#[derive(Debug, Clone)]
pub struct Grid {
    bounds: Vec<[f64; 2]>,
    per_axis: usize,
}

impl Grid {
    /// `per_axis` is reduced if the full grid would exceed [`MAX_GRID_POINTS`].
    pub fn new(bounds: Vec<[f64; 2]>, per_axis: usize) -> Self {
        let n = bounds.len() as u32;
        let mut per_axis = per_axis.max(2);
        while per_axis > 2 && (per_axis as f64).powi(n as i32) > MAX_GRID_POINTS as f64 {
            per_axis -= 1;
        }
        Grid { bounds, per_axis }
    }

    pub fn per_axis(&self) -> usize {
        self.per_axis
    }

    pub fn len(&self) -> usize {
        self.per_axis.pow(self.bounds.len() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, mut index: usize) -> Vec<f64> {
        let m = self.per_axis;
        self.bounds
            .iter()
            .map(|[lo, hi]| {
                let k = index % m;
                index /= m;
                if k == m - 1 {
                    *hi
                } else {
                    lo + (hi - lo) * k as f64 / (m - 1) as f64
                }
            })
            .collect()
    }

    /// Spacing along the widest axis.
    pub fn cell(&self) -> f64 {
        self.bounds
            .iter()
            .map(|[lo, hi]| (hi - lo) / (self.per_axis - 1) as f64)
            .fold(0.0, f64::max)
    }
}

/// One closed region per basic mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Cover {
    space: StateSpace,
    entries: Vec<(VertexId, Region)>,
}

impl Cover {
    /// Validates every region against `space`. Coverage of the whole space is
    /// checked separately by [`Cover::check_coverage`].
    pub fn new(space: StateSpace, mut entries: Vec<(VertexId, Region)>) -> Result<Self, CoverError> {
        if entries.is_empty() {
            return Err(CoverError::InvalidCover("no regions".into()));
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(CoverError::InvalidCover(format!(
                    "vertex {} has two regions",
                    w[0].0
                )));
            }
        }
        for (v, r) in &entries {
            r.check(&space)
                .map_err(|e| CoverError::InvalidRegion(format!("{v}: {e}")))?;
        }
        Ok(Cover { space, entries })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn entries(&self) -> &[(VertexId, Region)] {
        &self.entries
    }

    pub fn region(&self, v: &VertexId) -> Option<&Region> {
        self.entries.iter().find(|(w, _)| w == v).map(|(_, r)| r)
    }

    /// Samples the space and reports the first state covered by no region.
    pub fn check_coverage(&self, per_axis: usize, exec: Exec) -> Result<(), CoverError> {
        let grid = Grid::new(self.space.bounds(), per_axis);
        match exec.find_first(grid.len(), |i| {
            let s = grid.point(i);
            (!self.entries.iter().any(|(_, r)| r.contains(&s))).then_some(s)
        }) {
            Some((_, witness)) => Err(CoverError::CoverageGap { witness }),
            None => Ok(()),
        }
    }

    fn regions_of(&self, face: &Face) -> Option<Vec<&Region>> {
        face.vertices().iter().map(|v| self.region(v)).collect()
    }

    fn has_common_point(&self, face: &Face, per_axis: usize, exec: Exec) -> Result<bool, CoverError> {
        let regions = self
            .regions_of(face)
            .ok_or_else(|| CoverError::InvalidMode(face.clone()))?;
        match intersect_exact(&self.space, &regions) {
            Exact::Empty => return Ok(false),
            Exact::NonEmpty(_) => return Ok(true),
            Exact::Unknown => {}
        }
        let all = Region::Intersection(regions.iter().map(|r| (*r).clone()).collect());
        let bounds = all.bbox(&self.space);
        if bounds.iter().any(|[lo, hi]| lo > hi) {
            return Ok(false);
        }
        let grid = Grid::new(bounds.clone(), per_axis);
        if exec.find_first(grid.len(), |i| all.contains(&grid.point(i)).then_some(())).is_some() {
            return Ok(true);
        }
        let whole = Grid::new(self.space.bounds(), per_axis).cell();
        if bounds.iter().any(|[lo, hi]| hi - lo < whole) {
            return Err(CoverError::Resolution {
                face: face.clone(),
                resolution: per_axis,
            });
        }
        Ok(false)
    }
}

/// The nerve: all vertex sets whose regions share a point.
///
/// Candidates are grown level by level, so a set is only tested once all of
/// its one-smaller subsets are known to be faces.
pub fn nerve(cover: &Cover) -> Result<AbstractComplex, CoverError> {
    nerve_with(cover, DEFAULT_RESOLUTION, Exec::default())
}

pub fn nerve_with(cover: &Cover, per_axis: usize, exec: Exec) -> Result<AbstractComplex, CoverError> {
    let verts: Vec<VertexId> = cover.entries.iter().map(|(v, _)| v.clone()).collect();
    let mut faces: Vec<Face> = verts.iter().map(|v| Face::new([v.clone()])).collect::<Result<_, _>>()?;
    let mut level: Vec<Face> = faces.clone();
    while !level.is_empty() {
        let known: std::collections::BTreeSet<&Face> = level.iter().collect();
        let mut next = Vec::new();
        for f in &level {
            let last = f.vertices().last().expect("non-empty");
            for v in verts.iter().filter(|v| *v > last) {
                let mut vs = f.vertices().to_vec();
                vs.push(v.clone());
                let cand = Face::new(vs)?;
                let all_subfaces_known = cand.vertices().iter().all(|drop| {
                    let sub: Vec<VertexId> =
                        cand.vertices().iter().filter(|x| *x != drop).cloned().collect();
                    Face::new(sub).map(|s| known.contains(&s)).unwrap_or(false)
                });
                if all_subfaces_known && cover.has_common_point(&cand, per_axis, exec)? {
                    next.push(cand);
                }
            }
        }
        faces.extend(next.iter().cloned());
        level = next;
    }
    Ok(close_downward(&faces)?)
}

/// `S_X = ∩_{α∈X} U_α`, exact for boxes and clipped to a polygon in 2-D where
/// possible, otherwise returned as an explicit intersection.
pub fn localise(cover: &Cover, face: &Face) -> Result<Region, CoverError> {
    let regions = cover
        .regions_of(face)
        .ok_or_else(|| CoverError::InvalidMode(face.clone()))?;
    if !cover.has_common_point(face, DEFAULT_RESOLUTION, Exec::default())? {
        return Err(CoverError::InvalidMode(face.clone()));
    }
    if let [single] = regions.as_slice() {
        return Ok((*single).clone());
    }
    Ok(match intersect_exact(&cover.space, &regions) {
        Exact::NonEmpty(r) => r,
        _ => Region::Intersection(regions.into_iter().cloned().collect()),
    })
}
