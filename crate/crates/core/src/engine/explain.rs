use serde::Serialize;

use crate::simplicial::{Face, SimplexPoint};

use super::{EngineError, Machine, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZoneMargin {
    pub zone: String,
    /// Positive while the zone predicate is false.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplanationRecord {
    pub time: f64,
    pub mode: Face,
    pub point: SimplexPoint,
    pub margins: Vec<ZoneMargin>,
    /// The un-fired zone closest to firing.
    pub next_likely: Option<String>,
}

impl ExplanationRecord {
    pub fn to_json(&self) -> String {
        use crate::numeric::round_sig;
        #[derive(Serialize)]
        struct Doc<'a> {
            t: f64,
            mode: Vec<String>,
            weights: std::collections::BTreeMap<String, f64>,
            margins: Vec<ZoneMargin>,
            next_likely: &'a Option<String>,
        }
        let doc = Doc {
            t: round_sig(self.time),
            mode: self.mode.names(),
            weights: self.point.iter().map(|(v, w)| (v.to_string(), round_sig(w))).collect(),
            margins: self
                .margins
                .iter()
                .map(|m| ZoneMargin { zone: m.zone.clone(), margin: round_sig(m.margin) })
                .collect(),
            next_likely: &self.next_likely,
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("record serialises");
        s.push('\n');
        s
    }
}

/// Explains the latest sample at or before `time` against the zones of the
/// mode active at that sample.
pub fn explain(machine: &Machine, trajectory: &Trajectory, time: f64) -> Result<ExplanationRecord, EngineError> {
    let first = trajectory.samples.first().ok_or(EngineError::NoData)?;
    if time < first.t {
        return Err(EngineError::InvalidInput(format!(
            "time {time} precedes the trajectory start {}",
            first.t
        )));
    }
    let sample = trajectory
        .samples
        .iter()
        .take_while(|s| s.t <= time)
        .last()
        .unwrap_or(first);
    let mode = machine
        .mode(&sample.mode)
        .ok_or_else(|| EngineError::UnknownMode(sample.mode.clone()))?;
    let margins: Vec<ZoneMargin> = mode
        .zones
        .iter()
        .map(|z| ZoneMargin { zone: z.name.clone(), margin: z.predicate.margin(&sample.point) })
        .collect();
    let next_likely = margins
        .iter()
        .filter(|m| m.margin > 0.0)
        .min_by(|a, b| a.margin.total_cmp(&b.margin))
        .map(|m| m.zone.clone());
    Ok(ExplanationRecord {
        time: sample.t,
        mode: sample.mode.clone(),
        point: sample.point.clone(),
        margins,
        next_likely,
    })
}
