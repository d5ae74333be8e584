use crate::numeric::TOL;
use crate::par::Exec;
use crate::simplicial::{realize_point, AbstractComplex, SimplexPoint, VertexId};

use super::{nerve_with, Cover, CoverError, Grid, StateSpace, DEFAULT_RESOLUTION};

/// Normalised linear-ramp bumps over a cover.
///
/// `bump_α(s) = min(depth_α(s) / margin, 1)` where `depth_α` is the distance
/// to the part of `∂U_α` inside the state space, and `φ_α = bump_α / Σ bump`.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    cover: Cover,
    margin: f64,
    nerve: AbstractComplex,
}

/// Five percent of the shortest state axis.
pub fn default_margin(space: &StateSpace) -> f64 {
    0.05 * space.shortest_axis()
}

pub fn build_pou(cover: &Cover, margin: f64) -> Result<PartitionOfUnity, CoverError> {
    PartitionOfUnity::build(cover, margin, DEFAULT_RESOLUTION, Exec::default())
}

/// `φ(s) = Σ φ_α(s) e_α` as a point of the nerve.
pub fn evaluate(pou: &PartitionOfUnity, s: &[f64]) -> Result<SimplexPoint, CoverError> {
    let w = pou.weights(s)?;
    Ok(realize_point(&pou.nerve, w)?)
}

impl PartitionOfUnity {
    pub fn build(cover: &Cover, margin: f64, per_axis: usize, exec: Exec) -> Result<Self, CoverError> {
        if !(margin.is_finite() && margin > 0.0) {
            return Err(CoverError::InvalidCover(format!("margin must be positive, got {margin}")));
        }
        let pou = PartitionOfUnity {
            cover: cover.clone(),
            margin,
            nerve: nerve_with(cover, per_axis, exec)?,
        };
        let grid = Grid::new(cover.space().bounds(), per_axis);
        if let Some((_, witness)) = exec.find_first(grid.len(), |i| {
            let s = grid.point(i);
            (pou.bumps(&s).iter().all(|b| *b <= 0.0)).then_some(s)
        }) {
            return Err(CoverError::CoverageGap { witness });
        }
        Ok(pou)
    }

    pub fn cover(&self) -> &Cover {
        &self.cover
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn nerve(&self) -> &AbstractComplex {
        &self.nerve
    }

    fn bumps(&self, s: &[f64]) -> Vec<f64> {
        let space = self.cover.space();
        self.cover
            .entries()
            .iter()
            .map(|(_, r)| (r.depth(space, s) / self.margin).min(1.0))
            .collect()
    }

    /// Per-vertex weights at `s`, in vertex order. Every entry is returned,
    /// including zeros.
    pub fn weights(&self, s: &[f64]) -> Result<Vec<(VertexId, f64)>, CoverError> {
        if !self.cover.space().contains(s) {
            return Err(CoverError::OutOfDomain(s.to_vec()));
        }
        let bumps = self.bumps(s);
        let total: f64 = bumps.iter().sum();
        if total <= 0.0 {
            return Err(CoverError::CoverageGap { witness: s.to_vec() });
        }
        Ok(self
            .cover
            .entries()
            .iter()
            .zip(bumps)
            .map(|((v, _), b)| (v.clone(), b / total))
            .collect())
    }

    /// Sweeps a grid and checks the partition-of-unity contract at every
    /// sample: non-negative weights summing to one, each positive weight only
    /// inside its own region.
    pub fn check_grid(&self, per_axis: usize, exec: Exec) -> PouReport {
        let grid = Grid::new(self.cover.space().bounds(), per_axis);
        let per_point = exec.map_range(grid.len(), |i| {
            let s = grid.point(i);
            match self.weights(&s) {
                Ok(w) => {
                    let sum: f64 = w.iter().map(|(_, x)| x).sum();
                    let bad_support = w.iter().any(|(v, x)| {
                        *x > 0.0 && !self.cover.region(v).is_some_and(|r| r.contains(&s))
                    });
                    let negative = w.iter().any(|(_, x)| *x < 0.0);
                    ((sum - 1.0).abs(), bad_support || negative, false)
                }
                Err(_) => (f64::INFINITY, false, true),
            }
        });
        let mut report = PouReport {
            samples: grid.len(),
            max_sum_error: 0.0,
            support_violations: 0,
            gaps: 0,
        };
        for (err, bad, gap) in per_point {
            report.max_sum_error = report.max_sum_error.max(err);
            report.support_violations += bad as usize;
            report.gaps += gap as usize;
        }
        report
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PouReport {
    pub samples: usize,
    pub max_sum_error: f64,
    pub support_violations: usize,
    pub gaps: usize,
}

impl PouReport {
    pub fn holds(&self) -> bool {
        self.max_sum_error <= TOL && self.support_violations == 0 && self.gaps == 0
    }
}
