//! Generalised belief functions, their plausibility dual and the two-piece
//! visualisation `(Bel(X), point in Δ_X)`.
//!
//! Subsets of the statement set are bitmasks: bit `i` is statement `i` in
//! construction order. Values are stored densely, `2^n` entries for `n`
//! statements.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::TOL;
use crate::par::Exec;
use crate::simplicial::{SimplexPoint, SimplicialError};

pub const MAX_STATEMENTS: usize = 16;

pub type Subset = u32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BeliefError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("subset {0:#b} is not contained in the statement set")]
    InvalidSubset(Subset),
    #[error("Bel(X) = 0: the visualisation is undefined")]
    ZeroConfidence,
    #[error("belief function violates its invariants: {0}")]
    Invalid(Violation),
    #[error(transparent)]
    Simplicial(#[from] SimplicialError),
}

/// The finite set `X` of statements, in a fixed order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatementSet {
    names: Vec<String>,
}

impl StatementSet {
    pub fn new<I, S>(names: I) -> Result<Self, BeliefError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(BeliefError::InvalidInput("no statements".into()));
        }
        if names.len() > MAX_STATEMENTS {
            return Err(BeliefError::InvalidInput(format!(
                "{} statements (limit {MAX_STATEMENTS})",
                names.len()
            )));
        }
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() {
                return Err(BeliefError::InvalidInput("empty statement name".into()));
            }
            if names[..i].contains(n) {
                return Err(BeliefError::InvalidInput(format!("duplicate statement {n}")));
            }
        }
        Ok(StatementSet { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn full(&self) -> Subset {
        ((1u64 << self.names.len()) - 1) as Subset
    }

    pub fn subset_count(&self) -> usize {
        1usize << self.names.len()
    }

    pub fn mask<S: AsRef<str>>(&self, names: &[S]) -> Result<Subset, BeliefError> {
        let mut mask = 0;
        for n in names {
            let i = self
                .names
                .iter()
                .position(|x| x == n.as_ref())
                .ok_or_else(|| {
                    BeliefError::InvalidInput(format!("unknown statement {}", n.as_ref()))
                })?;
            mask |= 1 << i;
        }
        Ok(mask)
    }

    /// Statement names in `mask`, sorted by name.
    pub fn names_of(&self, mask: Subset) -> Vec<String> {
        let mut v: Vec<String> = (0..self.names.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| self.names[i].clone())
            .collect();
        v.sort();
        v
    }

    fn check(&self, mask: Subset) -> Result<(), BeliefError> {
        if mask & !self.full() != 0 {
            return Err(BeliefError::InvalidSubset(mask));
        }
        Ok(())
    }
}

/// One failed invariant of a candidate belief function.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptySetNonZero { value: f64 },
    OutOfRange { subset: Subset, value: f64 },
    /// `Bel(Y∪Z) + Bel(Y∩Z) < Bel(Y) + Bel(Z)`.
    SuperAdditivity { y: Subset, z: Subset, lhs: f64, rhs: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptySetNonZero { value } => write!(f, "Bel(∅) = {value}, expected 0"),
            Violation::OutOfRange { subset, value } => {
                write!(f, "Bel({subset:#b}) = {value} outside [0,1]")
            }
            Violation::SuperAdditivity { y, z, lhs, rhs } => write!(
                f,
                "Y={y:#b}, Z={z:#b}: Bel(Y∪Z)+Bel(Y∩Z) = {lhs} < Bel(Y)+Bel(Z) = {rhs}"
            ),
        }
    }
}

/// A set function `Bel: P(X) → [0,1]` with `Bel(∅) = 0`, super-additive.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefFunction {
    over: StatementSet,
    values: Vec<f64>,
}

impl BeliefFunction {
    /// Builds and validates. Any violation is returned as an error.
    pub fn new(over: StatementSet, values: Vec<f64>) -> Result<Self, BeliefError> {
        let bel = Self::new_unchecked(over, values)?;
        if let Some(v) = validate(&bel).into_iter().next() {
            return Err(BeliefError::Invalid(v));
        }
        Ok(bel)
    }

    /// Builds without checking super-additivity; only the length is checked.
    /// Use [`validate`] to inspect the result.
    pub fn new_unchecked(over: StatementSet, values: Vec<f64>) -> Result<Self, BeliefError> {
        if values.len() != over.subset_count() {
            return Err(BeliefError::InvalidInput(format!(
                "expected {} values, got {}",
                over.subset_count(),
                values.len()
            )));
        }
        Ok(BeliefFunction { over, values })
    }

    /// Builds from named subsets; unlisted subsets get 0.
    pub fn from_subset_values<S: AsRef<str>>(
        over: StatementSet,
        entries: &[(&[S], f64)],
    ) -> Result<Self, BeliefError> {
        let mut values = vec![0.0; over.subset_count()];
        for (names, v) in entries {
            values[over.mask(names)? as usize] = *v;
        }
        Self::new(over, values)
    }

    pub fn over(&self) -> &StatementSet {
        &self.over
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bel(&self, y: Subset) -> Result<f64, BeliefError> {
        self.over.check(y)?;
        Ok(self.values[y as usize])
    }

    /// `Bel(X)`, the belief in the whole statement set.
    pub fn total(&self) -> f64 {
        self.values[self.over.full() as usize]
    }
}

/// Every invariant violation of `bel`; empty iff `bel` is a belief function.
pub fn validate(bel: &BeliefFunction) -> Vec<Violation> {
    validate_with(bel, Exec::default())
}

pub fn validate_with(bel: &BeliefFunction, exec: Exec) -> Vec<Violation> {
    let mut out = Vec::new();
    let v = &bel.values;
    if v[0].abs() > TOL {
        out.push(Violation::EmptySetNonZero { value: v[0] });
    }
    for (s, &x) in v.iter().enumerate() {
        if !(-TOL..=1.0 + TOL).contains(&x) || !x.is_finite() {
            out.push(Violation::OutOfRange {
                subset: s as Subset,
                value: x,
            });
        }
    }
    let n = v.len();
    let per_y = exec.map_range(n, |y| {
        let mut found = Vec::new();
        for z in y + 1..n {
            let lhs = v[y | z] + v[y & z];
            let rhs = v[y] + v[z];
            if lhs < rhs - TOL {
                found.push(Violation::SuperAdditivity {
                    y: y as Subset,
                    z: z as Subset,
                    lhs,
                    rhs,
                });
            }
        }
        found
    });
    out.extend(per_y.into_iter().flatten());
    out
}

/// A (possibly unnormalised) mass assignment on non-empty subsets.
#[derive(Debug, Clone, PartialEq)]
pub struct MassFunction {
    over: StatementSet,
    masses: BTreeMap<Subset, f64>,
}

impl MassFunction {
    pub fn new(over: StatementSet, masses: BTreeMap<Subset, f64>) -> Result<Self, BeliefError> {
        let mut total = 0.0;
        for (&s, &m) in &masses {
            over.check(s)?;
            if !m.is_finite() || m < 0.0 {
                return Err(BeliefError::InvalidInput(format!(
                    "mass {m} on {s:#b} is negative or non-finite"
                )));
            }
            if s == 0 && m != 0.0 {
                return Err(BeliefError::InvalidInput("mass on the empty set".into()));
            }
            total += m;
        }
        if total > 1.0 + TOL {
            return Err(BeliefError::InvalidInput(format!(
                "total mass {total} exceeds 1"
            )));
        }
        Ok(MassFunction { over, masses })
    }

    pub fn from_named<S: AsRef<str>>(
        over: StatementSet,
        entries: &[(&[S], f64)],
    ) -> Result<Self, BeliefError> {
        let mut masses = BTreeMap::new();
        for (names, m) in entries {
            *masses.entry(over.mask(names)?).or_insert(0.0) += *m;
        }
        Self::new(over, masses)
    }

    pub fn over(&self) -> &StatementSet {
        &self.over
    }

    pub fn masses(&self) -> &BTreeMap<Subset, f64> {
        &self.masses
    }

    pub fn total(&self) -> f64 {
        self.masses.values().sum()
    }
}

/// `Bel(Y) = Σ_{∅≠Z⊆Y} m(Z)`, computed with a subset-sum (zeta) transform.
pub fn from_mass(m: &MassFunction) -> BeliefFunction {
    let n = m.over.len();
    let mut values = vec![0.0; 1 << n];
    for (&s, &w) in &m.masses {
        values[s as usize] += w;
    }
    for bit in 0..n {
        for s in 0..values.len() {
            if s >> bit & 1 == 1 {
                values[s] += values[s ^ (1 << bit)];
            }
        }
    }
    for v in &mut values {
        *v = v.clamp(0.0, 1.0);
    }
    BeliefFunction {
        over: m.over.clone(),
        values,
    }
}

/// `Pla(Y) = Bel(X) − Bel(X∖Y)`.
pub fn plausibility(bel: &BeliefFunction, y: Subset) -> Result<f64, BeliefError> {
    bel.over.check(y)?;
    let full = bel.over.full();
    Ok(bel.total() - bel.values[(full & !y) as usize])
}

/// Plausibility-side violations: `Bel(Y) > Pla(Y)` or a failure of
/// sub-additivity `Pla(Y∪Z)+Pla(Y∩Z) ≤ Pla(Y)+Pla(Z)`.
#[derive(Debug, Clone, PartialEq)]
pub enum PlausibilityViolation {
    BelExceedsPla { y: Subset, bel: f64, pla: f64 },
    SubAdditivity { y: Subset, z: Subset, lhs: f64, rhs: f64 },
}

pub fn check_plausibility(bel: &BeliefFunction, exec: Exec) -> Vec<PlausibilityViolation> {
    let n = bel.values.len();
    let pla: Vec<f64> = (0..n)
        .map(|y| plausibility(bel, y as Subset).expect("in range"))
        .collect();
    let per_y = exec.map_range(n, |y| {
        let mut found = Vec::new();
        if bel.values[y] > pla[y] + TOL {
            found.push(PlausibilityViolation::BelExceedsPla {
                y: y as Subset,
                bel: bel.values[y],
                pla: pla[y],
            });
        }
        for z in y + 1..n {
            let lhs = pla[y | z] + pla[y & z];
            let rhs = pla[y] + pla[z];
            if lhs > rhs + TOL {
                found.push(PlausibilityViolation::SubAdditivity {
                    y: y as Subset,
                    z: z as Subset,
                    lhs,
                    rhs,
                });
            }
        }
        found
    });
    per_y.into_iter().flatten().collect()
}

/// `(Bel(X), Σ Pla({x}) e_x / Σ Pla({x}))`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefVisualisation {
    pub confidence: f64,
    pub position: SimplexPoint,
}

pub fn visualise(bel: &BeliefFunction) -> Result<BeliefVisualisation, BeliefError> {
    let confidence = bel.total();
    if confidence.abs() <= TOL {
        return Err(BeliefError::ZeroConfidence);
    }
    let singles: Vec<f64> = (0..bel.over.len())
        .map(|i| plausibility(bel, 1 << i).expect("singleton in range").max(0.0))
        .collect();
    let denom: f64 = singles.iter().sum();
    let position = SimplexPoint::from_weights(
        bel.over
            .names
            .iter()
            .zip(&singles)
            .map(|(n, p)| (n.as_str(), p / denom)),
    )?;
    Ok(BeliefVisualisation {
        confidence,
        position,
    })
}

pub fn is_normalised(bel: &BeliefFunction) -> bool {
    (bel.total() - 1.0).abs() <= TOL
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConfidenceBand {
    Red,
    Orange,
    Green,
}

impl ConfidenceBand {
    /// CSS colour name used by the renderer.
    pub fn css(self) -> &'static str {
        match self {
            ConfidenceBand::Green => "green",
            ConfidenceBand::Orange => "orange",
            ConfidenceBand::Red => "red",
        }
    }
}

/// Lower and upper confidence thresholds separating red, orange and green.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub low: f64,
    pub high: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            low: 0.75,
            high: 0.90,
        }
    }
}

impl Thresholds {
    pub fn new(low: f64, high: f64) -> Result<Self, BeliefError> {
        if !(0.0 <= low && low < high && high <= 1.0) {
            return Err(BeliefError::InvalidInput(format!(
                "thresholds must satisfy 0 ≤ low < high ≤ 1, got ({low}, {high})"
            )));
        }
        Ok(Thresholds { low, high })
    }
}

pub fn confidence_band(confidence: f64, t: Thresholds) -> ConfidenceBand {
    if confidence >= t.high {
        ConfidenceBand::Green
    } else if confidence >= t.low {
        ConfidenceBand::Orange
    } else {
        ConfidenceBand::Red
    }
}

/// JSON form: a statement list plus either masses or explicit values, with
/// subsets written as sorted arrays of statement names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeliefDoc {
    pub statements: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<Vec<SubsetValue>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<SubsetValue>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsetValue {
    pub subset: Vec<String>,
    pub value: f64,
}

impl BeliefDoc {
    pub fn to_belief(&self) -> Result<BeliefFunction, BeliefError> {
        let over = StatementSet::new(self.statements.iter().cloned())?;
        let entries = |list: &[SubsetValue]| -> Vec<(Vec<String>, f64)> {
            list.iter().map(|e| (e.subset.clone(), e.value)).collect()
        };
        match (&self.mass, &self.values) {
            (Some(m), None) => {
                let e = entries(m);
                let refs: Vec<(&[String], f64)> = e.iter().map(|(s, v)| (s.as_slice(), *v)).collect();
                Ok(from_mass(&MassFunction::from_named(over, &refs)?))
            }
            (None, Some(v)) => {
                let e = entries(v);
                let refs: Vec<(&[String], f64)> = e.iter().map(|(s, v)| (s.as_slice(), *v)).collect();
                BeliefFunction::from_subset_values(over, &refs)
            }
            _ => Err(BeliefError::InvalidInput(
                "exactly one of `mass` or `values` is required".into(),
            )),
        }
    }

    /// Explicit-value form of `bel`, listing every non-zero subset.
    pub fn from_belief(bel: &BeliefFunction) -> Self {
        let values = bel
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(s, v)| SubsetValue {
                subset: bel.over.names_of(s as Subset),
                value: crate::numeric::round_sig(*v),
            })
            .collect();
        BeliefDoc {
            statements: bel.over.names.clone(),
            mass: None,
            values: Some(values),
        }
    }
}
