use std::fmt;

use crate::cover::{Axis, Cover, Region, StateSpace};
use crate::simplicial::{AbstractComplex, Face, SimplexPoint};

use super::ScenarioError;

pub const OK: &str = "OK";
pub const ALC: &str = "alcProb";
pub const TAG: &str = "tagProb";

/// Upper edge of the "clearly fine" band.
pub const OK_BAND: f64 = 0.25;
/// Lower edge of the "clearly a problem" band.
pub const PROBLEM_BAND: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffenderState {
    pub x_alc: f64,
    pub x_tag: f64,
}

impl OffenderState {
    pub fn new(x_alc: f64, x_tag: f64) -> Result<Self, ScenarioError> {
        for (name, x) in [("x_alc", x_alc), ("x_tag", x_tag)] {
            if !(0.0..=1.0).contains(&x) {
                return Err(ScenarioError::InvalidState(format!("{name} = {x} is outside [0, 1]")));
            }
        }
        Ok(OffenderState { x_alc, x_tag })
    }
}

/// Piecewise-linear ramp: 0 up to `lo`, 1 from `hi`.
pub fn ramp(x: f64, lo: f64, hi: f64) -> f64 {
    debug_assert!(lo < hi);
    ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
}

/// Weights proportional to `((1-u)(1-v), u, v)` on `(OK, alcProb, tagProb)`.
pub fn offender_phi(s: OffenderState) -> SimplexPoint {
    let u = ramp(s.x_alc, OK_BAND, PROBLEM_BAND);
    let v = ramp(s.x_tag, OK_BAND, PROBLEM_BAND);
    let ok = (1.0 - u) * (1.0 - v);
    let total = ok + u + v;
    SimplexPoint::from_weights([(OK, ok / total), (ALC, u / total), (TAG, v / total)])
        .expect("ramp weights are a valid point")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Intervention {
    ProbationOfficer,
    Counsellor,
    Police,
    Warning,
}

impl Intervention {
    pub fn label(self) -> &'static str {
        match self {
            Intervention::ProbationOfficer => "probation officer",
            Intervention::Counsellor => "counsellor",
            Intervention::Police => "police",
            Intervention::Warning => "warning",
        }
    }
}

impl fmt::Display for Intervention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// At most one of probation officer, counsellor or police; otherwise a
/// warning once the point is past the warning line.
pub fn offender_interventions(s: OffenderState) -> Vec<Intervention> {
    let alc = s.x_alc >= PROBLEM_BAND;
    let tag = s.x_tag >= PROBLEM_BAND;
    match (alc, tag) {
        (true, true) => vec![Intervention::Police],
        (true, false) => vec![Intervention::Counsellor],
        (false, true) => vec![Intervention::ProbationOfficer],
        (false, false) if offender_phi(s).weight_of(OK) < 0.5 => vec![Intervention::Warning],
        _ => Vec::new(),
    }
}

pub fn offender_complex() -> AbstractComplex {
    AbstractComplex::simplex(&Face::of(&[OK, ALC, TAG])).expect("three vertices")
}

/// The three-set cover of the unit square: each problem region starts at
/// 3/8 and the OK region ends at 5/8.
pub fn offender_cover() -> Cover {
    let space = StateSpace::new(vec![Axis::new("x_alc", 0.0, 1.0), Axis::new("x_tag", 0.0, 1.0)])
        .expect("unit square");
    Cover::new(
        space,
        vec![
            (OK.into(), Region::Box(vec![[0.0, 0.625], [0.0, 0.625]])),
            (ALC.into(), Region::Box(vec![[0.375, 1.0], [0.0, 1.0]])),
            (TAG.into(), Region::Box(vec![[0.0, 1.0], [0.375, 1.0]])),
        ],
    )
    .expect("valid cover")
}
