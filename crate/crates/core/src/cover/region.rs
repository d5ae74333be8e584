use serde::{Deserialize, Serialize};

use super::{CoverError, StateSpace};

const EPS: f64 = 1e-12;

pub type Point2 = [f64; 2];

/// A closed subset of the state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Region {
    /// Axis-aligned box, one `[lo, hi]` interval per state axis.
    Box(Vec<[f64; 2]>),
    /// `{ s : normal · s ≤ offset }`.
    HalfSpace { normal: Vec<f64>, offset: f64 },
    /// Simple polygon in a 2-D state space, vertices in order.
    Polygon(Vec<Point2>),
    Union(Vec<Region>),
    Intersection(Vec<Region>),
}

impl Region {
    pub fn check(&self, space: &StateSpace) -> Result<(), CoverError> {
        let n = space.dim();
        let bad = |m: String| Err(CoverError::InvalidRegion(m));
        match self {
            Region::Box(iv) => {
                if iv.len() != n {
                    return bad(format!("box has {} intervals for {n} axes", iv.len()));
                }
                for (i, ([lo, hi], ax)) in iv.iter().zip(space.axes()).enumerate() {
                    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                        return bad(format!("box interval {i} is [{lo}, {hi}]"));
                    }
                    if *lo < ax.lo - EPS || *hi > ax.hi + EPS {
                        return bad(format!(
                            "box interval [{lo}, {hi}] leaves axis {} = [{}, {}]",
                            ax.name, ax.lo, ax.hi
                        ));
                    }
                }
                Ok(())
            }
            Region::HalfSpace { normal, offset } => {
                if normal.len() != n {
                    return bad(format!("half-space normal has {} components for {n} axes", normal.len()));
                }
                if !offset.is_finite() || normal.iter().any(|x| !x.is_finite()) || norm(normal) < EPS {
                    return bad("half-space normal must be finite and non-zero".into());
                }
                Ok(())
            }
            Region::Polygon(pts) => {
                if n != 2 {
                    return bad("polygons need a 2-D state space".into());
                }
                if pts.len() < 3 {
                    return bad("polygon needs at least 3 vertices".into());
                }
                for p in pts {
                    if !space.contains(p) {
                        return bad(format!("polygon vertex ({}, {}) lies outside the state space", p[0], p[1]));
                    }
                }
                if signed_area(pts).abs() < EPS {
                    return bad("polygon has zero area".into());
                }
                if !is_simple(pts) {
                    return bad("polygon edges intersect".into());
                }
                Ok(())
            }
            Region::Union(parts) | Region::Intersection(parts) => {
                if parts.is_empty() {
                    return bad("empty union/intersection".into());
                }
                parts.iter().try_for_each(|p| p.check(space))
            }
        }
    }

    pub fn contains(&self, s: &[f64]) -> bool {
        match self {
            Region::Box(iv) => iv
                .iter()
                .zip(s)
                .all(|([lo, hi], x)| *x >= lo - EPS && *x <= hi + EPS),
            Region::HalfSpace { normal, offset } => dot(normal, s) <= offset + EPS,
            Region::Polygon(pts) => polygon_contains(pts, [s[0], s[1]]),
            Region::Union(parts) => parts.iter().any(|p| p.contains(s)),
            Region::Intersection(parts) => parts.iter().all(|p| p.contains(s)),
        }
    }

    /// Distance from `s` to the part of this region's boundary that lies in
    /// the interior of the state space; `0` outside the region and
    /// `f64::INFINITY` when the region has no such boundary.
    ///
    /// Unions report the largest component depth, intersections the smallest.
    /// Both are lower bounds on the true depth and positive only inside.
    pub fn depth(&self, space: &StateSpace, s: &[f64]) -> f64 {
        if !self.contains(s) {
            return 0.0;
        }
        match self {
            Region::Box(iv) => {
                let mut d = f64::INFINITY;
                for (([lo, hi], ax), x) in iv.iter().zip(space.axes()).zip(s) {
                    if *lo > ax.lo + EPS {
                        d = d.min(x - lo);
                    }
                    if *hi < ax.hi - EPS {
                        d = d.min(hi - x);
                    }
                }
                d.max(0.0)
            }
            Region::HalfSpace { normal, offset } => {
                if max_over_box(normal, space) <= offset + EPS {
                    f64::INFINITY
                } else {
                    ((offset - dot(normal, s)) / norm(normal)).max(0.0)
                }
            }
            Region::Polygon(pts) => {
                let p = [s[0], s[1]];
                let mut d = f64::INFINITY;
                for i in 0..pts.len() {
                    let a = pts[i];
                    let b = pts[(i + 1) % pts.len()];
                    if edge_on_space_boundary(space, a, b) {
                        continue;
                    }
                    d = d.min(segment_distance(p, a, b));
                }
                d
            }
            Region::Union(parts) => parts
                .iter()
                .map(|r| r.depth(space, s))
                .fold(0.0, f64::max),
            Region::Intersection(parts) => parts
                .iter()
                .map(|r| r.depth(space, s))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Bounding box clipped to the state space.
    pub fn bbox(&self, space: &StateSpace) -> Vec<[f64; 2]> {
        let full: Vec<[f64; 2]> = space.axes().iter().map(|a| [a.lo, a.hi]).collect();
        match self {
            Region::Box(iv) => iv.clone(),
            Region::HalfSpace { .. } => full,
            Region::Polygon(pts) => {
                let mut b = [[f64::INFINITY, f64::NEG_INFINITY]; 2];
                for p in pts {
                    for k in 0..2 {
                        b[k][0] = b[k][0].min(p[k]);
                        b[k][1] = b[k][1].max(p[k]);
                    }
                }
                b.to_vec()
            }
            Region::Union(parts) => {
                let mut b = vec![[f64::INFINITY, f64::NEG_INFINITY]; space.dim()];
                for p in parts {
                    for (acc, iv) in b.iter_mut().zip(p.bbox(space)) {
                        acc[0] = acc[0].min(iv[0]);
                        acc[1] = acc[1].max(iv[1]);
                    }
                }
                b
            }
            Region::Intersection(parts) => {
                let mut b = full;
                for p in parts {
                    for (acc, iv) in b.iter_mut().zip(p.bbox(space)) {
                        acc[0] = acc[0].max(iv[0]);
                        acc[1] = acc[1].min(iv[1]);
                    }
                }
                b
            }
        }
    }

    fn is_convex(&self) -> bool {
        match self {
            Region::Box(_) | Region::HalfSpace { .. } => true,
            Region::Polygon(pts) => polygon_is_convex(pts),
            Region::Intersection(parts) => parts.iter().all(Region::is_convex),
            Region::Union(_) => false,
        }
    }

    fn flatten_into(&self, out: &mut Vec<Region>) {
        match self {
            Region::Intersection(parts) => parts.iter().for_each(|p| p.flatten_into(out)),
            other => out.push(other.clone()),
        }
    }
}

/// Outcome of an exact intersection attempt.
pub(crate) enum Exact {
    Empty,
    NonEmpty(Region),
    /// No exact procedure applies; callers fall back to sampling.
    Unknown,
}

/// Intersects `regions` exactly where that is cheap: boxes (interval
/// arithmetic), boxes with a single half-space, and 2-D clipping of a polygon
/// by convex pieces.
pub(crate) fn intersect_exact(space: &StateSpace, regions: &[&Region]) -> Exact {
    let mut flat = Vec::new();
    for r in regions {
        r.flatten_into(&mut flat);
    }
    if flat.iter().any(|r| matches!(r, Region::Union(_))) {
        return Exact::Unknown;
    }
    let boxes: Vec<&Vec<[f64; 2]>> = flat
        .iter()
        .filter_map(|r| match r {
            Region::Box(b) => Some(b),
            _ => None,
        })
        .collect();
    let mut ivs: Vec<[f64; 2]> = space.axes().iter().map(|a| [a.lo, a.hi]).collect();
    for b in &boxes {
        for (acc, iv) in ivs.iter_mut().zip(b.iter()) {
            acc[0] = acc[0].max(iv[0]);
            acc[1] = acc[1].min(iv[1]);
        }
    }
    if ivs.iter().any(|[lo, hi]| *lo > hi + EPS) {
        return Exact::Empty;
    }
    let rest: Vec<&Region> = flat.iter().filter(|r| !matches!(r, Region::Box(_))).collect();
    if rest.is_empty() {
        return Exact::NonEmpty(Region::Box(ivs));
    }
    if let [Region::HalfSpace { normal, offset }] = rest.as_slice() {
        let min: f64 = normal
            .iter()
            .zip(&ivs)
            .map(|(c, [lo, hi])| if *c >= 0.0 { c * lo } else { c * hi })
            .sum();
        if min > offset + EPS {
            return Exact::Empty;
        }
        if space.dim() != 2 {
            return Exact::NonEmpty(Region::Intersection(vec![
                Region::Box(ivs),
                (*rest[0]).clone(),
            ]));
        }
    }
    if space.dim() != 2 {
        return Exact::Unknown;
    }
    // 2-D: pick the subject (a non-convex polygon if there is one), clip by the rest.
    let nonconvex: Vec<&&Region> = rest.iter().filter(|r| !r.is_convex()).collect();
    if nonconvex.len() > 1 {
        return Exact::Unknown;
    }
    let subject_idx = rest
        .iter()
        .position(|r| !r.is_convex())
        .or_else(|| rest.iter().position(|r| matches!(r, Region::Polygon(_))));
    let mut poly: Vec<Point2> = match subject_idx {
        Some(i) => match rest[i] {
            Region::Polygon(p) => p.clone(),
            _ => return Exact::Unknown,
        },
        None => box_polygon(&ivs),
    };
    poly = clip_box(&poly, &ivs);
    for (i, r) in rest.iter().enumerate() {
        if Some(i) == subject_idx {
            continue;
        }
        poly = match r {
            Region::HalfSpace { normal, offset } => clip_half_plane(&poly, [normal[0], normal[1]], *offset),
            Region::Polygon(p) => clip_convex(&poly, p),
            _ => return Exact::Unknown,
        };
        if poly.is_empty() {
            return Exact::Empty;
        }
    }
    if poly.is_empty() {
        return Exact::Empty;
    }
    dedup_ring(&mut poly);
    Exact::NonEmpty(Region::Polygon(poly))
}

fn box_polygon(iv: &[[f64; 2]]) -> Vec<Point2> {
    let [x0, x1] = iv[0];
    let [y0, y1] = iv[1];
    vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]]
}

fn clip_box(poly: &[Point2], iv: &[[f64; 2]]) -> Vec<Point2> {
    let mut p = poly.to_vec();
    p = clip_half_plane(&p, [-1.0, 0.0], -iv[0][0]);
    p = clip_half_plane(&p, [1.0, 0.0], iv[0][1]);
    p = clip_half_plane(&p, [0.0, -1.0], -iv[1][0]);
    clip_half_plane(&p, [0.0, 1.0], iv[1][1])
}

/// Sutherland–Hodgman step keeping `normal · p ≤ offset`.
fn clip_half_plane(poly: &[Point2], normal: Point2, offset: f64) -> Vec<Point2> {
    let inside = |p: Point2| normal[0] * p[0] + normal[1] * p[1] <= offset + EPS;
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let cur = poly[i];
        let prev = poly[(i + poly.len() - 1) % poly.len()];
        let (ci, pi) = (inside(cur), inside(prev));
        if ci != pi {
            let fc = normal[0] * cur[0] + normal[1] * cur[1] - offset;
            let fp = normal[0] * prev[0] + normal[1] * prev[1] - offset;
            let t = fp / (fp - fc);
            out.push([prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])]);
        }
        if ci {
            out.push(cur);
        }
    }
    out
}

/// Clips by a convex polygon, one edge half-plane at a time.
fn clip_convex(poly: &[Point2], clip: &[Point2]) -> Vec<Point2> {
    let ccw = signed_area(clip) > 0.0;
    let mut out = poly.to_vec();
    for i in 0..clip.len() {
        let a = clip[i];
        let b = clip[(i + 1) % clip.len()];
        // Outward normal of edge a→b.
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let normal = if ccw { [dy, -dx] } else { [-dy, dx] };
        let offset = normal[0] * a[0] + normal[1] * a[1];
        out = clip_half_plane(&out, normal, offset);
        if out.is_empty() {
            break;
        }
    }
    out
}

fn dedup_ring(poly: &mut Vec<Point2>) {
    poly.dedup_by(|a, b| (a[0] - b[0]).abs() < EPS && (a[1] - b[1]).abs() < EPS);
    while poly.len() > 1 {
        let (f, l) = (poly[0], poly[poly.len() - 1]);
        if (f[0] - l[0]).abs() < EPS && (f[1] - l[1]).abs() < EPS {
            poly.pop();
        } else {
            break;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn max_over_box(normal: &[f64], space: &StateSpace) -> f64 {
    normal
        .iter()
        .zip(space.axes())
        .map(|(c, a)| if *c >= 0.0 { c * a.hi } else { c * a.lo })
        .sum()
}

pub(crate) fn signed_area(pts: &[Point2]) -> f64 {
    let mut a = 0.0;
    for i in 0..pts.len() {
        let p = pts[i];
        let q = pts[(i + 1) % pts.len()];
        a += p[0] * q[1] - q[0] * p[1];
    }
    a / 2.0
}

fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn polygon_is_convex(pts: &[Point2]) -> bool {
    let n = pts.len();
    let mut sign = 0.0;
    for i in 0..n {
        let c = cross(pts[i], pts[(i + 1) % n], pts[(i + 2) % n]);
        if c.abs() < EPS {
            continue;
        }
        if sign == 0.0 {
            sign = c.signum();
        } else if c.signum() != sign {
            return false;
        }
    }
    true
}

fn on_segment(p: Point2, a: Point2, b: Point2) -> bool {
    segment_distance(p, a, b) <= EPS
}

pub(crate) fn segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (a[0] + t * dx, a[1] + t * dy);
    ((p[0] - cx).powi(2) + (p[1] - cy).powi(2)).sqrt()
}

/// Even–odd test with the boundary counted as inside.
pub(crate) fn polygon_contains(pts: &[Point2], p: Point2) -> bool {
    let n = pts.len();
    let mut inside = false;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        if on_segment(p, a, b) {
            return true;
        }
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn segments_cross(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > EPS && d2 < -EPS) || (d1 < -EPS && d2 > EPS))
        && ((d3 > EPS && d4 < -EPS) || (d3 < -EPS && d4 > EPS))
    {
        return true;
    }
    on_segment(a, c, d) || on_segment(b, c, d) || on_segment(c, a, b) || on_segment(d, a, b)
}

fn is_simple(pts: &[Point2]) -> bool {
    let n = pts.len();
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_cross(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

fn edge_on_space_boundary(space: &StateSpace, a: Point2, b: Point2) -> bool {
    let ax = space.axes();
    (0..2).any(|k| {
        ((a[k] - ax[k].lo).abs() < EPS && (b[k] - ax[k].lo).abs() < EPS)
            || ((a[k] - ax[k].hi).abs() < EPS && (b[k] - ax[k].hi).abs() < EPS)
    })
}
