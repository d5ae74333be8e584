//! The mode machine: modes, zones, stable domains, oracle ingestion and
//! trajectory recording.

mod explain;
mod hysteresis;
mod zone;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cover::{evaluate, CoverError, PartitionOfUnity, StateSpace};
use crate::numeric::round_sig;
use crate::scenarios::judicial::{judicial_phi, JudicialParams};
use crate::scenarios::offender::{offender_phi, OffenderState};
use crate::scenarios::ScenarioError;
use crate::simplicial::{AbstractComplex, Face, SimplexPoint, SimplicialError, VertexId};

pub use explain::{explain, ExplanationRecord, ZoneMargin};
pub use hysteresis::{hysteresis_transition, StableDomain};
pub use zone::{Action, Atom, Cmp, Predicate, Zone};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("no stable domain contains the state {state:?}")]
    CoverageGap { state: Vec<f64> },
    #[error("{0} is not a declared mode")]
    UnknownMode(Face),
    #[error("trajectory is empty")]
    NoData,
    #[error("at t = {time}: {source}")]
    At {
        time: f64,
        #[source]
        source: Box<EngineError>,
    },
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Simplicial(#[from] SimplicialError),
}

/// State → barycentric point, chosen from a fixed family.
#[derive(Debug, Clone)]
pub enum Evaluator {
    /// Normalised bump functions over a cover; the point lives in the nerve.
    Pou(Arc<PartitionOfUnity>),
    /// The offender ramp map over the `(alc, tag)` state axes.
    Offender { alc: usize, tag: usize },
    /// Each listed vertex takes the value of one state axis, renormalised.
    Barycentric { axes: Vec<(VertexId, usize)> },
    /// Boundary interpolation over the judicial stable domains.
    Judicial { params: Arc<JudicialParams>, t: usize, g: usize },
}

impl Evaluator {
    pub fn eval(&self, mode: &Face, s: &[f64]) -> Result<SimplexPoint, EngineError> {
        match self {
            Evaluator::Pou(pou) => Ok(evaluate(pou, s)?),
            Evaluator::Offender { alc, tag } => {
                Ok(offender_phi(OffenderState::new(s[*alc], s[*tag])?))
            }
            Evaluator::Barycentric { axes } => {
                let total: f64 = axes.iter().map(|(_, i)| s[*i]).sum();
                if !(total > 0.0) {
                    return Err(EngineError::InvalidInput(format!(
                        "barycentric state {s:?} has no positive coordinate"
                    )));
                }
                Ok(SimplexPoint::from_weights(
                    axes.iter().map(|(v, i)| (v.clone(), s[*i] / total)),
                )?)
            }
            Evaluator::Judicial { params, t, g } => Ok(judicial_phi(params, mode, s[*t], s[*g])?),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Mode {
    pub face: Face,
    pub objective: String,
    pub channels: Vec<String>,
    pub evaluator: Evaluator,
    pub zones: Vec<Zone>,
}

/// A named oracle source that writes some state axes.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub name: String,
    pub axes: Vec<usize>,
}

/// The static description the engine runs against.
#[derive(Debug, Clone)]
pub struct Machine {
    complex: AbstractComplex,
    space: StateSpace,
    modes: Vec<Mode>,
    channels: Vec<Channel>,
    domains: Vec<StableDomain>,
    initial: Face,
    initial_state: Vec<f64>,
}

impl Machine {
    pub fn new(
        complex: AbstractComplex,
        space: StateSpace,
        modes: Vec<Mode>,
        channels: Vec<Channel>,
        domains: Vec<StableDomain>,
        initial: Face,
        initial_state: Vec<f64>,
    ) -> Result<Self, EngineError> {
        let bad = |m: String| Err(EngineError::InvalidScenario(m));
        if initial_state.len() != space.dim() || !space.contains(&initial_state) {
            return bad(format!("initial state {initial_state:?} is outside the state space"));
        }
        for m in &modes {
            if !complex.contains(&m.face) {
                return bad(format!("mode {} is not a face of the complex", m.face));
            }
            if modes.iter().filter(|o| o.face == m.face).count() > 1 {
                return bad(format!("mode {} declared twice", m.face));
            }
            for ch in &m.channels {
                if !channels.iter().any(|c| &c.name == ch) {
                    return bad(format!("mode {} reads undeclared channel {ch}", m.face));
                }
            }
            for z in &m.zones {
                if let Action::Transition(target) = &z.action {
                    if !modes.iter().any(|o| &o.face == target) {
                        return bad(format!("zone {} targets undeclared mode {target}", z.name));
                    }
                }
            }
        }
        for c in &channels {
            if let Some(i) = c.axes.iter().find(|i| **i >= space.dim()) {
                return bad(format!("channel {} writes missing axis {i}", c.name));
            }
        }
        for d in &domains {
            if !modes.iter().any(|m| m.face == d.mode) {
                return bad(format!("stable domain for undeclared mode {}", d.mode));
            }
            d.region.check(&space).map_err(|e| EngineError::InvalidScenario(e.to_string()))?;
        }
        if !modes.iter().any(|m| m.face == initial) {
            return bad(format!("initial mode {initial} is not declared"));
        }
        Ok(Machine { complex, space, modes, channels, domains, initial, initial_state })
    }

    pub fn complex(&self) -> &AbstractComplex {
        &self.complex
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn domains(&self) -> &[StableDomain] {
        &self.domains
    }

    pub fn initial(&self) -> &Face {
        &self.initial
    }

    pub fn initial_state(&self) -> &[f64] {
        &self.initial_state
    }

    pub fn mode(&self, face: &Face) -> Option<&Mode> {
        self.modes.iter().find(|m| &m.face == face)
    }

    fn mode_index(&self, face: &Face) -> Result<usize, EngineError> {
        self.modes
            .iter()
            .position(|m| &m.face == face)
            .ok_or_else(|| EngineError::UnknownMode(face.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReading {
    pub channel: String,
    pub t: f64,
    pub value: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reliability: Option<f64>,
}

/// A time-sorted list of oracle readings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trace {
    pub readings: Vec<OracleReading>,
}

impl Trace {
    pub fn from_json(text: &str) -> Result<Self, EngineError> {
        serde_json::from_str(text).map_err(|e| EngineError::InvalidInput(format!("trace: {e}")))
    }

    pub fn to_json(&self) -> String {
        let rounded = Trace {
            readings: self
                .readings
                .iter()
                .map(|r| OracleReading {
                    channel: r.channel.clone(),
                    t: round_sig(r.t),
                    value: r.value.iter().map(|x| round_sig(*x)).collect(),
                    reliability: r.reliability.map(round_sig),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&rounded).expect("trace serialises");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Warn,
    Transition,
    Intervene,
    AccessViolation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub name: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub mode: Face,
    pub point: SimplexPoint,
    pub confidence: f64,
    pub events: Vec<Event>,
}

#[derive(Serialize, Deserialize)]
struct SampleJson {
    t: f64,
    mode: Vec<String>,
    weights: BTreeMap<String, f64>,
    confidence: f64,
    events: Vec<Event>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn count(&self, kind: EventKind) -> usize {
        self.events().filter(|e| e.kind == kind).count()
    }

    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.samples.iter().flat_map(|s| s.events.iter())
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<SampleJson> = self
            .samples
            .iter()
            .map(|s| SampleJson {
                t: round_sig(s.t),
                mode: s.mode.names(),
                weights: s.point.iter().map(|(v, w)| (v.to_string(), round_sig(w))).collect(),
                confidence: round_sig(s.confidence),
                events: s.events.clone(),
            })
            .collect();
        let mut out = serde_json::to_string_pretty(&rows).expect("trajectory serialises");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, EngineError> {
        let rows: Vec<SampleJson> = serde_json::from_str(text)
            .map_err(|e| EngineError::InvalidInput(format!("trajectory: {e}")))?;
        let samples = rows
            .into_iter()
            .map(|r| {
                Ok(Sample {
                    t: r.t,
                    mode: Face::new(r.mode.into_iter().map(VertexId::new).collect::<Result<Vec<_>, _>>()?)?,
                    point: SimplexPoint::from_weights(
                        r.weights
                            .into_iter()
                            .map(|(v, w)| Ok((VertexId::new(v)?, w)))
                            .collect::<Result<Vec<_>, SimplicialError>>()?,
                    )?,
                    confidence: r.confidence,
                    events: r.events,
                })
            })
            .collect::<Result<Vec<_>, SimplicialError>>()?;
        Ok(Trajectory { samples })
    }
}

/// Mutable run state over a shared [`Machine`].
#[derive(Debug, Clone)]
pub struct Engine {
    machine: Arc<Machine>,
    time: f64,
    mode: usize,
    state: Vec<f64>,
    point: SimplexPoint,
    reliability: BTreeMap<String, (f64, f64)>,
    memory: Vec<bool>,
}

impl Engine {
    /// Enters the initial mode at `t = 0` with the declared initial state.
    pub fn new(machine: Arc<Machine>) -> Result<Self, EngineError> {
        let mode = machine.mode_index(machine.initial())?;
        let state = machine.initial_state().to_vec();
        let point = machine.modes[mode].evaluator.eval(&machine.modes[mode].face, &state)?;
        let memory = zone_truths(&machine.modes[mode], &point);
        Ok(Engine {
            machine,
            time: 0.0,
            mode,
            state,
            point,
            reliability: BTreeMap::new(),
            memory,
        })
    }

    pub fn machine(&self) -> &Machine {
        &self.machine
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn mode(&self) -> &Face {
        &self.machine.modes[self.mode].face
    }

    pub fn state(&self) -> &[f64] {
        &self.state
    }

    pub fn point(&self) -> &SimplexPoint {
        &self.point
    }

    /// Minimum reliability over the latest reading of each channel.
    pub fn confidence(&self) -> f64 {
        self.reliability.values().map(|(_, r)| *r).fold(1.0, f64::min)
    }

    pub fn sample(&self, events: Vec<Event>) -> Sample {
        Sample {
            t: self.time,
            mode: self.mode().clone(),
            point: self.point.clone(),
            confidence: self.confidence(),
            events,
        }
    }

    /// Advances to `time`, ingesting `readings` and firing zones.
    ///
    /// On error the engine is left unchanged.
    pub fn step(&mut self, time: f64, readings: &[OracleReading]) -> Result<Vec<Event>, EngineError> {
        if !time.is_finite() || time <= self.time {
            return Err(EngineError::InvalidInput(format!(
                "time {time} does not advance past {}",
                self.time
            )));
        }
        let m = &*self.machine;
        let mut events = Vec::new();
        let mut state = self.state.clone();
        let mut reliability = self.reliability.clone();
        let current = &m.modes[self.mode];
        for r in readings {
            if r.t > time {
                return Err(EngineError::InvalidInput(format!(
                    "reading on {} at t = {} is ahead of the step time {time}",
                    r.channel, r.t
                )));
            }
            if reliability.get(&r.channel).is_some_and(|(last, _)| r.t < *last) {
                return Err(EngineError::InvalidInput(format!(
                    "readings on {} go back in time to t = {}",
                    r.channel, r.t
                )));
            }
            let Some(channel) = m
                .channels
                .iter()
                .find(|c| c.name == r.channel)
                .filter(|c| current.channels.contains(&c.name))
            else {
                events.push(Event {
                    kind: EventKind::AccessViolation,
                    name: r.channel.clone(),
                    detail: format!("mode {} may not read {}", current.face, r.channel),
                });
                continue;
            };
            if r.value.len() != channel.axes.len() {
                return Err(EngineError::InvalidInput(format!(
                    "reading on {} carries {} values for {} axes",
                    r.channel,
                    r.value.len(),
                    channel.axes.len()
                )));
            }
            let rel = r.reliability.unwrap_or(1.0);
            if !(0.0..=1.0).contains(&rel) {
                return Err(EngineError::InvalidInput(format!(
                    "reliability {rel} on {} is outside [0, 1]",
                    r.channel
                )));
            }
            for (axis, v) in channel.axes.iter().zip(&r.value) {
                state[*axis] = *v;
            }
            reliability.insert(r.channel.clone(), (r.t, rel));
        }
        if !m.space.contains(&state) {
            return Err(EngineError::InvalidInput(format!(
                "state {state:?} leaves the state space"
            )));
        }

        let mut mode = self.mode;
        let mut memory = self.memory.clone();
        let mut entered = false;
        if !m.domains.is_empty() {
            let next = hysteresis_transition(&m.domains, &m.modes[mode].face, &state)?;
            if next != m.modes[mode].face {
                events.push(Event {
                    kind: EventKind::Transition,
                    name: "stable-domain".into(),
                    detail: format!("{} -> {next}", m.modes[mode].face),
                });
                mode = m.mode_index(&next)?;
                entered = true;
            }
        }
        let mut point = m.modes[mode].evaluator.eval(&m.modes[mode].face, &state)?;
        if !entered {
            let truths = zone_truths(&m.modes[mode], &point);
            let mut target = None;
            for (z, (&now, &before)) in m.modes[mode].zones.iter().zip(truths.iter().zip(&memory)) {
                if !now || before {
                    continue;
                }
                match &z.action {
                    Action::Warn(msg) => events.push(Event {
                        kind: EventKind::Warn,
                        name: z.name.clone(),
                        detail: msg.clone(),
                    }),
                    Action::Intervene(label) => events.push(Event {
                        kind: EventKind::Intervene,
                        name: z.name.clone(),
                        detail: label.clone(),
                    }),
                    Action::Transition(face) if target.is_none() => {
                        events.push(Event {
                            kind: EventKind::Transition,
                            name: z.name.clone(),
                            detail: format!("{} -> {face}", m.modes[mode].face),
                        });
                        target = Some(face.clone());
                    }
                    Action::Transition(_) => {}
                }
            }
            memory = truths;
            if let Some(face) = target {
                mode = m.mode_index(&face)?;
                entered = true;
            }
        }
        if entered {
            point = m.modes[mode].evaluator.eval(&m.modes[mode].face, &state)?;
            memory = zone_truths(&m.modes[mode], &point);
        }

        self.time = time;
        self.mode = mode;
        self.state = state;
        self.point = point;
        self.reliability = reliability;
        self.memory = memory;
        Ok(events)
    }

    /// Replays a time-sorted trace. Readings sharing a timestamp form one
    /// step. The trajectory starts with the initial sample at `t = 0`; if
    /// `t_end` lies past the last reading a final held sample is appended.
    pub fn run(mut self, trace: &[OracleReading], t_end: Option<f64>) -> Result<Trajectory, EngineError> {
        let at = |time: f64, e: EngineError| EngineError::At { time, source: Box::new(e) };
        let mut samples = vec![self.sample(Vec::new())];
        let mut i = 0;
        while i < trace.len() {
            let time = trace[i].t;
            let j = i + trace[i..].iter().take_while(|r| r.t == time).count();
            if j < trace.len() && trace[j].t < time {
                return Err(at(trace[j].t, EngineError::InvalidInput("trace is not time-sorted".into())));
            }
            let events = self.step(time, &trace[i..j]).map_err(|e| at(time, e))?;
            samples.push(self.sample(events));
            i = j;
        }
        if let Some(end) = t_end {
            if end > self.time {
                self.step(end, &[]).map_err(|e| at(end, e)).map(|ev| samples.push(self.sample(ev)))?;
            }
        }
        Ok(Trajectory { samples })
    }
}

fn zone_truths(mode: &Mode, point: &SimplexPoint) -> Vec<bool> {
    mode.zones.iter().map(|z| z.predicate.holds(point)).collect()
}

#[cfg(test)]
mod tests;
