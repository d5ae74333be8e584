use crate::cover::{Point2, Region};
use crate::engine::{hysteresis_transition, EngineError, StableDomain};
use crate::simplicial::{AbstractComplex, Face, SimplexPoint};

use super::ScenarioError;

pub const JAIL: &str = "Jail";
pub const PROBATION: &str = "Probation";
pub const RELEASE: &str = "Release";

/// Labelled corner points of the stable domains in the `(t, g)` square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JudicialGeometry {
    pub a: Point2,
    pub b: Point2,
    pub c: Point2,
    pub d: Point2,
    pub e: Point2,
    pub f: Point2,
    pub g: Point2,
}

impl Default for JudicialGeometry {
    fn default() -> Self {
        JudicialGeometry {
            a: [0.25, 1.0],
            b: [0.5, 1.0],
            c: [0.75, 0.75],
            d: [1.0, 0.5],
            e: [1.0, 0.625],
            f: [1.0, 0.25],
            g: [0.25, 0.5],
        }
    }
}

impl JudicialGeometry {
    /// Looks up a corner by its one-letter label.
    pub fn point(&self, label: &str) -> Option<Point2> {
        Some(match label {
            "a" => self.a,
            "b" => self.b,
            "c" => self.c,
            "d" => self.d,
            "e" => self.e,
            "f" => self.f,
            "g" => self.g,
            _ => return None,
        })
    }

    pub fn set_point(&mut self, label: &str, p: Point2) -> bool {
        let slot = match label {
            "a" => &mut self.a,
            "b" => &mut self.b,
            "c" => &mut self.c,
            "d" => &mut self.d,
            "e" => &mut self.e,
            "f" => &mut self.f,
            "g" => &mut self.g,
            _ => return false,
        };
        *slot = p;
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JudicialParams {
    /// Lower edge of the jail/probation overlap on the behaviour axis.
    pub a: f64,
    /// Upper edge of the overlap.
    pub b: f64,
    pub decay: f64,
    /// `(t_i, d_i)` incident times and deductions.
    pub incidents: Vec<(f64, f64)>,
    pub geometry: JudicialGeometry,
}

impl Default for JudicialParams {
    fn default() -> Self {
        JudicialParams {
            a: 0.4,
            b: 0.6,
            decay: 10.0,
            incidents: Vec::new(),
            geometry: JudicialGeometry::default(),
        }
    }
}

impl JudicialParams {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::InvalidParams(m));
        if !(0.0 < self.a && self.a < self.b && self.b < 1.0) {
            return bad(format!("need 0 < a < b < 1, got a = {}, b = {}", self.a, self.b));
        }
        if !(self.decay.is_finite() && self.decay > 0.0) {
            return bad(format!("decay must be positive, got {}", self.decay));
        }
        for (t, d) in &self.incidents {
            if !(0.0..=1.0).contains(t) || !(d.is_finite() && *d >= 0.0) {
                return bad(format!("incident ({t}, {d}) needs t in [0, 1] and d >= 0"));
            }
        }
        for region in judicial_domains(self).iter().map(|d| &d.region) {
            let Region::Polygon(p) = region else { unreachable!() };
            if p.iter().flatten().any(|x| !(0.0..=1.0).contains(x)) {
                return bad("domain corners must lie in the unit square".into());
            }
        }
        Ok(())
    }
}

/// `g(t) = clamp(1 - Σ_{t_i ≤ t} d_i exp(-λ (t - t_i)), 0, 1)`.
pub fn good_behaviour(params: &JudicialParams, t: f64) -> f64 {
    let loss: f64 = params
        .incidents
        .iter()
        .filter(|(ti, _)| *ti <= t)
        .map(|(ti, d)| d * (-params.decay * (t - ti)).exp())
        .sum();
    (1.0 - loss).clamp(0.0, 1.0)
}

pub fn judicial_complex() -> AbstractComplex {
    AbstractComplex::simplex(&Face::of(&[JAIL, PROBATION, RELEASE])).expect("three vertices")
}

type Ring = Vec<(Point2, [f64; 3])>;

const J: [f64; 3] = [1.0, 0.0, 0.0];
const P: [f64; 3] = [0.0, 1.0, 0.0];
const R: [f64; 3] = [0.0, 0.0, 1.0];

/// Boundary corners of each domain with the simplex vertex each maps to,
/// weights ordered `(Jail, Probation, Release)`.
fn rings(geo: &JudicialGeometry) -> [(&'static str, Ring); 3] {
    let JudicialGeometry { a, b, c, d, e, f, g } = *geo;
    [
        (JAIL, vec![([0.0, 0.0], J), ([1.0, 0.0], J), (d, R), (c, R), (a, P), ([0.0, 1.0], J)]),
        (RELEASE, vec![(b, R), ([1.0, 1.0], R), (d, R)]),
        (PROBATION, vec![(a, P), (b, R), (c, R), (e, R), (f, J), (g, J)]),
    ]
}

/// Jail, Release and Probation polygons, in that order. The order settles
/// exits across `c–d`, where Release and Probation both contain the state.
pub fn judicial_domains(params: &JudicialParams) -> Vec<StableDomain> {
    rings(&params.geometry)
        .into_iter()
        .map(|(name, ring)| StableDomain {
            mode: Face::of(&[name]),
            region: Region::Polygon(ring.into_iter().map(|(p, _)| p).collect()),
        })
        .collect()
}

/// The one-dimensional fold: Jail on `g ≤ b`, Probation on `g ≥ a`.
pub fn fold_domains(params: &JudicialParams) -> Vec<StableDomain> {
    vec![
        StableDomain { mode: Face::of(&[JAIL]), region: Region::Box(vec![[0.0, 1.0], [0.0, params.b]]) },
        StableDomain { mode: Face::of(&[PROBATION]), region: Region::Box(vec![[0.0, 1.0], [params.a, 1.0]]) },
    ]
}

fn gap(e: EngineError, t: f64, g: f64) -> ScenarioError {
    match e {
        EngineError::CoverageGap { .. } => ScenarioError::CoverageGap { t, g },
        other => ScenarioError::InvalidState(other.to_string()),
    }
}

pub fn judicial_mode(params: &JudicialParams, current: &Face, t: f64, g: f64) -> Result<Face, ScenarioError> {
    hysteresis_transition(&judicial_domains(params), current, &[t, g]).map_err(|e| gap(e, t, g))
}

pub fn fold_mode(params: &JudicialParams, current: &Face, g: f64) -> Result<Face, ScenarioError> {
    hysteresis_transition(&fold_domains(params), current, &[0.0, g]).map_err(|e| gap(e, 0.0, g))
}

/// Interpolates the boundary labels of `current`'s domain into its interior.
///
/// On the boundary the value is linear along each edge. Inside, it is the
/// inverse-square-distance average of the boundary values taken over the
/// whole boundary curve, which is continuous and tends to the edge value as
/// the point approaches an edge.
pub fn judicial_phi(params: &JudicialParams, current: &Face, t: f64, g: f64) -> Result<SimplexPoint, ScenarioError> {
    let name = match current.vertices() {
        [v] => v.as_str(),
        _ => "",
    };
    let out = || ScenarioError::OutOfDomain { mode: current.clone(), t, g };
    let (_, ring) = rings(&params.geometry)
        .into_iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(out)?;
    let poly = Region::Polygon(ring.iter().map(|(p, _)| *p).collect());
    if !poly.contains(&[t, g]) {
        return Err(out());
    }
    let w = interpolate(&ring, [t, g]);
    let total: f64 = w.iter().sum();
    Ok(SimplexPoint::from_weights([
        (JAIL, w[0] / total),
        (PROBATION, w[1] / total),
        (RELEASE, w[2] / total),
    ])?)
}

const ON_EDGE: f64 = 1e-12;

fn interpolate(ring: &Ring, p: Point2) -> [f64; 3] {
    let n = ring.len();
    let edges = || (0..n).map(|i| (ring[i], ring[(i + 1) % n]));
    for ((p0, v0), (p1, v1)) in edges() {
        let (len, s, h) = project(p0, p1, p);
        if h <= ON_EDGE && (-ON_EDGE..=len + ON_EDGE).contains(&s) {
            let r = (s / len).clamp(0.0, 1.0);
            return std::array::from_fn(|k| v0[k] + (v1[k] - v0[k]) * r);
        }
    }
    let mut num = [0.0; 3];
    let mut den = 0.0;
    for ((p0, v0), (p1, v1)) in edges() {
        let (len, s, h) = project(p0, p1, p);
        // ∫ ds / (h² + (s - s0)²) and ∫ s ds / (...) over [0, len].
        let i0 = if h > 0.0 {
            (h * len).atan2(h * h - s * (len - s)) / h
        } else {
            len / (s * (s - len))
        };
        let i1 = s * i0 + 0.5 * ((h * h + (len - s).powi(2)) / (h * h + s * s)).ln();
        for k in 0..3 {
            num[k] += v0[k] * i0 + (v1[k] - v0[k]) * i1 / len;
        }
        den += i0;
    }
    num.map(|x| (x / den).max(0.0))
}

/// Edge length, coordinate of `p`'s foot along the edge, distance to the line.
fn project(p0: Point2, p1: Point2, p: Point2) -> (f64, f64, f64) {
    let (dx, dy) = (p1[0] - p0[0], p1[1] - p0[1]);
    let len = dx.hypot(dy);
    let (ux, uy) = (dx / len, dy / len);
    let (qx, qy) = (p[0] - p0[0], p[1] - p0[1]);
    (len, qx * ux + qy * uy, (qx * uy - qy * ux).abs())
}
