//! Synthetic oracle traces for a compiled scenario.
//!
//! All randomness comes from one seed, so a generator called twice with the
//! same arguments returns the same trace.

use std::str::FromStr;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::engine::{Evaluator, Machine, OracleReading, Trace};
use crate::scenarios::judicial::{good_behaviour, JudicialParams, JAIL, PROBATION, RELEASE};
use crate::scenarios::offender::{ALC, OK, TAG};
use crate::scenarios::triage::{triage_advance, TriageTree, ADMIT, BEGIN, DISCHARGE};

#[derive(Debug, Error, PartialEq)]
pub enum TraceGenError {
    #[error("unknown generator `{0}` (expected ramp, random-walk or scripted)")]
    UnknownGenerator(String),
    #[error("no scripted trace for this scenario: {0}")]
    NoScript(String),
    #[error("invalid generator options: {0}")]
    InvalidOptions(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    /// Every axis moves linearly from its initial value to the farther of its
    /// two bounds.
    Ramp,
    /// Bounded uniform steps from the initial state, clamped to each axis.
    RandomWalk,
    /// A hand-written storyline for the bundled scenarios.
    Scripted,
}

impl FromStr for Generator {
    type Err = TraceGenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ramp" => Ok(Generator::Ramp),
            "random-walk" => Ok(Generator::RandomWalk),
            "scripted" => Ok(Generator::Scripted),
            other => Err(TraceGenError::UnknownGenerator(other.into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenOptions {
    pub steps: usize,
    pub seed: u64,
    /// Largest per-step move of the random walk, as a fraction of the axis.
    pub step_size: f64,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions { steps: 100, seed: 0, step_size: 0.1 }
    }
}

pub fn generate(machine: &Machine, generator: Generator, opts: &GenOptions) -> Result<Trace, TraceGenError> {
    if opts.steps == 0 {
        return Err(TraceGenError::InvalidOptions("at least one step is needed".into()));
    }
    if !(opts.step_size > 0.0 && opts.step_size <= 1.0) {
        return Err(TraceGenError::InvalidOptions("step size must lie in (0, 1]".into()));
    }
    let readings = match generator {
        Generator::Ramp => ramp(machine, opts.steps),
        Generator::RandomWalk => random_walk(machine, opts),
        Generator::Scripted => scripted(machine)?,
    };
    Ok(Trace { readings })
}

/// One reading per channel at time `t`, taken from the full state vector.
fn readings_at(machine: &Machine, t: f64, state: &[f64], reliability: Option<f64>) -> Vec<OracleReading> {
    machine
        .channels()
        .iter()
        .map(|c| OracleReading {
            channel: c.name.clone(),
            t,
            value: c.axes.iter().map(|&a| state[a]).collect(),
            reliability,
        })
        .collect()
}

fn ramp(machine: &Machine, steps: usize) -> Vec<OracleReading> {
    let ends: Vec<(f64, f64)> = machine
        .space()
        .axes()
        .iter()
        .zip(machine.initial_state())
        .map(|(a, &x0)| (x0, if x0 - a.lo <= a.hi - x0 { a.hi } else { a.lo }))
        .collect();
    let denom = (steps - 1).max(1) as f64;
    (0..steps)
        .flat_map(|k| {
            let x = k as f64 / denom;
            let state: Vec<f64> = ends.iter().map(|&(from, to)| if k + 1 == steps { to } else { from + (to - from) * x }).collect();
            readings_at(machine, (k + 1) as f64, &state, None)
        })
        .collect()
}

fn random_walk(machine: &Machine, opts: &GenOptions) -> Vec<OracleReading> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let axes = machine.space().axes();
    let mut state = machine.initial_state().to_vec();
    let mut out = Vec::with_capacity(opts.steps * machine.channels().len());
    for k in 1..=opts.steps {
        for (x, a) in state.iter_mut().zip(axes) {
            let d = opts.step_size * (a.hi - a.lo);
            *x = (*x + rng.random_range(-d..=d)).clamp(a.lo, a.hi);
        }
        let reliability = rng.random_range(0.5..=1.0);
        out.extend(readings_at(machine, k as f64, &state, Some(reliability)));
    }
    out
}

fn has_vertices(machine: &Machine, names: &[&str]) -> bool {
    names.iter().all(|n| machine.complex().vertex(n).is_some())
}

fn axis(machine: &Machine, name: &str) -> Result<usize, TraceGenError> {
    machine
        .space()
        .axis_index(name)
        .ok_or_else(|| TraceGenError::NoScript(format!("state axis `{name}` is missing")))
}

fn scripted(machine: &Machine) -> Result<Vec<OracleReading>, TraceGenError> {
    if let Some(Evaluator::Judicial { params, t, g }) = machine.modes().first().map(|m| &m.evaluator) {
        if has_vertices(machine, &[JAIL, PROBATION, RELEASE]) {
            return Ok(judicial_script(machine, params, *t, *g));
        }
    }
    if has_vertices(machine, &[OK, ALC, TAG]) {
        return Ok(offender_script(machine));
    }
    if has_vertices(machine, &[BEGIN, DISCHARGE, ADMIT]) {
        return triage_script(machine);
    }
    Err(TraceGenError::NoScript("expected the offender, triage or judicial vertices".into()))
}

/// Both indicators climb together to 0.9 over twenty steps: the warning line
/// is crossed first, then both problem bands.
fn offender_script(machine: &Machine) -> Vec<OracleReading> {
    let mut state = machine.initial_state().to_vec();
    let axes: Vec<usize> = machine.channels().iter().flat_map(|c| c.axes.iter().copied()).collect();
    (1..=20)
        .flat_map(|k| {
            for &a in &axes {
                state[a] = 0.045 * k as f64;
            }
            readings_at(machine, k as f64, &state, None)
        })
        .collect()
}

/// A nurse walks the bundled tree along the cardiac branch to admission.
fn triage_script(machine: &Machine) -> Result<Vec<OracleReading>, TraceGenError> {
    let tree = TriageTree::bundled();
    let idx = [axis(machine, BEGIN)?, axis(machine, DISCHARGE)?, axis(machine, ADMIT)?];
    let mut state = machine.initial_state().to_vec();
    let mut current = tree.root().id.clone();
    let mut out = Vec::new();
    for (k, answer) in ["chest pain", "yes", "yes"].into_iter().enumerate() {
        let (node, _) = triage_advance(&tree, &current, answer).map_err(|e| TraceGenError::NoScript(e.to_string()))?;
        for (i, s) in idx.iter().zip(node.scores) {
            state[*i] = s;
        }
        current = node.id.clone();
        out.extend(readings_at(machine, (k + 1) as f64, &state, None));
    }
    Ok(out)
}

/// An incident of size 0.6 at t = 0, then good behaviour while the clock runs
/// to 0.45: conduct recovers past the jail boundary exactly once.
fn judicial_script(machine: &Machine, params: &JudicialParams, t_axis: usize, g_axis: usize) -> Vec<OracleReading> {
    let mut p = params.clone();
    p.incidents = vec![(0.0, 0.6)];
    let mut state = machine.initial_state().to_vec();
    (1..=45)
        .flat_map(|k| {
            let t = k as f64 / 100.0;
            state[t_axis] = t;
            state[g_axis] = good_behaviour(&p, t);
            readings_at(machine, k as f64, &state, None)
        })
        .collect()
}
