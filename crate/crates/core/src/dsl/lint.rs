use std::collections::BTreeSet;

use super::check::resolve_region;
use super::*;
use crate::cover::{Cover, Grid};
use crate::engine::Action;
use crate::par::Exec;
use crate::simplicial::{Face, VertexId};

/// Grid points per axis for sampled lint checks.
const LINT_RESOLUTION: usize = 129;

/// Warnings for a valid document: unreachable modes, zones that can never
/// fire, sampled cover and domain gaps, and nested stable domains.
/// Returns nothing for a document that does not compile.
pub fn lint(doc: &ScenarioDoc) -> Vec<Diagnostic> {
    let opts = CompileOptions { resolution: LINT_RESOLUTION, ..CompileOptions::default() };
    let Ok(machine) = compile(doc, &opts) else {
        return Vec::new();
    };
    let busy = compile(doc, &CompileOptions { busy: true, ..opts }).ok();
    let mut out = Vec::new();

    // Reachability over transition zones and stable domains.
    let mut reached: BTreeSet<Face> = BTreeSet::from([machine.initial().clone()]);
    let domain_modes: BTreeSet<&Face> = machine.domains().iter().map(|d| &d.mode).collect();
    loop {
        let before = reached.len();
        let current: Vec<&crate::engine::Mode> = machine.modes().iter().filter(|m| reached.contains(&m.face)).collect();
        for m in current {
            let targets: Vec<Face> = m
                .zones
                .iter()
                .filter_map(|z| match &z.action {
                    Action::Transition(f) => Some(f.clone()),
                    _ => None,
                })
                .collect();
            reached.extend(targets);
            if domain_modes.contains(&m.face) {
                reached.extend(domain_modes.iter().map(|f| (*f).clone()));
            }
        }
        if reached.len() == before {
            break;
        }
    }
    for (i, m) in machine.modes().iter().enumerate() {
        if !reached.contains(&m.face) {
            out.push(
                Diagnostic::warning(format!("mode {} is unreachable from the initial mode", m.face))
                    .at_loc(&Loc::Mode(i))
                    .hint("add a transition zone or a stable domain leading to it"),
            );
        }
    }

    // Zones that no point of a simplex can satisfy.
    for (i, m) in machine.modes().iter().enumerate() {
        for (j, z) in m.zones.iter().enumerate() {
            let in_busy = busy.as_ref().map(|b| b.modes()[i].zones[j].predicate.is_unsatisfiable());
            if z.predicate.is_unsatisfiable() || in_busy == Some(true) {
                out.push(
                    Diagnostic::warning(format!("zone `{}` can never fire: a threshold lies outside [0, 1]", z.name))
                        .at_loc(&Loc::Zone(i, j)),
                );
            }
        }
    }

    let space = machine.space();
    let grid = Grid::new(space.bounds(), LINT_RESOLUTION);

    if !doc.cover.is_empty() {
        let entries: Vec<(VertexId, _)> = doc
            .cover
            .iter()
            .filter_map(|c| Some((VertexId::new(c.vertex.as_str()).ok()?, resolve_region(&c.region, &doc.points).ok()?)))
            .collect();
        if let Ok(cover) = Cover::new(space.clone(), entries) {
            if let Err(e) = cover.check_coverage(LINT_RESOLUTION, Exec::default()) {
                out.push(Diagnostic::warning(format!("cover gap: {e}")).at_loc(&Loc::Cover(0)));
            }
        }
    }

    let domains = machine.domains();
    if !domains.is_empty() {
        if let Some((_, s)) = Exec::default().find_first(grid.len(), |k| {
            let s = grid.point(k);
            (!domains.iter().any(|d| d.region.contains(&s))).then_some(s)
        }) {
            out.push(
                Diagnostic::warning(format!("stable domains leave the state {s:?} uncovered")).at_loc(&Loc::Domain(0)),
            );
        }
        let inside: Vec<Vec<bool>> = domains
            .iter()
            .map(|d| Exec::default().map_range(grid.len(), |k| d.region.contains(&grid.point(k))))
            .collect();
        for a in 0..domains.len() {
            for b in 0..domains.len() {
                if a == b || domains[a].mode == domains[b].mode {
                    continue;
                }
                let some_a = inside[a].iter().any(|x| *x);
                let nested = some_a && inside[a].iter().zip(&inside[b]).all(|(x, y)| !*x || *y);
                // A region nested in another, away from its edge, can be
                // entered but never left through its own boundary.
                let touches = grid_touches_boundary(&inside[a], &inside[b], grid.per_axis(), space.dim());
                if nested && !touches {
                    out.push(
                        Diagnostic::warning(format!(
                            "stable domains of {} and {} overlap without a shared boundary",
                            domains[a].mode, domains[b].mode
                        ))
                        .at_loc(&Loc::Domain(a)),
                    );
                }
            }
        }
    }
    out
}

/// True if some sample inside `a` neighbours a sample outside `b`.
fn grid_touches_boundary(a: &[bool], b: &[bool], n: usize, dims: usize) -> bool {
    (0..a.len()).any(|k| {
        a[k] && (0..dims).any(|d| {
            let stride = n.pow(d as u32);
            let coord = (k / stride) % n;
            let neighbour = |j: usize| !b[j];
            (coord > 0 && neighbour(k - stride)) || (coord + 1 < n && neighbour(k + stride))
        })
    })
}
