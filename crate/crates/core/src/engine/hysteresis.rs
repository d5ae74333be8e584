use crate::cover::Region;
use crate::simplicial::Face;

use super::EngineError;

/// A region of the state space in which a mode, once entered, persists.
/// Domains of different modes may overlap; the overlap is the hysteresis band.
#[derive(Debug, Clone, PartialEq)]
pub struct StableDomain {
    pub mode: Face,
    pub region: Region,
}

/// Keeps `current` while `s` stays in its domain; otherwise moves to the first
/// domain, in declaration order, that contains `s`.
pub fn hysteresis_transition(
    domains: &[StableDomain],
    current: &Face,
    s: &[f64],
) -> Result<Face, EngineError> {
    if domains
        .iter()
        .any(|d| &d.mode == current && d.region.contains(s))
    {
        return Ok(current.clone());
    }
    domains
        .iter()
        .find(|d| d.region.contains(s))
        .map(|d| d.mode.clone())
        .ok_or_else(|| EngineError::CoverageGap { state: s.to_vec() })
}
