//! Property tests for the cross-module invariants: complexes, covers,
//! the engine, the judicial behaviour model, the scenario language and the
//! renderer.

use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;

use modeplex::cover::{default_margin, nerve, Axis, Cover, PartitionOfUnity, Region, StateSpace};
use modeplex::dsl::{self, CompileOptions};
use modeplex::engine::{Engine, EventKind, Machine, OracleReading};
use modeplex::par::Exec;
use modeplex::render::{render_trajectory, RenderSpec};
use modeplex::scenarios::judicial::{fold_mode, good_behaviour, JudicialParams, JAIL, PROBATION};
use modeplex::scenarios::offender::{offender_phi, OffenderState, OK};
use modeplex::simplicial::{carrier_face, close_downward, in_face, is_face, realize_point};
use modeplex::{Face, VertexId};

const POOL: [&str; 6] = ["p", "q", "r", "s", "t", "u"];

fn face_strategy() -> impl Strategy<Value = Face> {
    proptest::sample::subsequence(POOL.to_vec(), 1..=4).prop_map(|names| Face::of(&names))
}

fn machine(src: &str) -> Arc<Machine> {
    let doc = dsl::parse(src).unwrap();
    Arc::new(dsl::compile(&doc, &CompileOptions::default()).unwrap())
}

fn offender() -> Arc<Machine> {
    machine(include_str!("../fixtures/offender.mode"))
}

/// One reading per step on each offender channel.
fn offender_trace(path: &[(f64, f64)]) -> Vec<OracleReading> {
    path.iter()
        .enumerate()
        .flat_map(|(k, &(a, t))| {
            let time = (k + 1) as f64;
            [
                OracleReading { channel: "alc".into(), t: time, value: vec![a], reliability: None },
                OracleReading { channel: "tag".into(), t: time, value: vec![t], reliability: None },
            ]
        })
        .collect()
}

fn unit_path(max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    proptest::collection::vec((0.0..=1.0f64, 0.0..=1.0f64), 0..max)
}

/// Four quadrant boxes of the unit square, each grown by `grow`, plus a few
/// arbitrary extra boxes. The quadrants alone already cover the square.
fn cover_strategy() -> impl Strategy<Value = (Cover, f64)> {
    let extra = proptest::collection::vec((0.0..0.9f64, 0.05..0.5f64, 0.0..0.9f64, 0.05..0.5f64), 0..3);
    (0.05..0.3f64, extra).prop_map(|(grow, extra)| {
        let space = StateSpace::new(vec![Axis::new("x", 0.0, 1.0), Axis::new("y", 0.0, 1.0)]).unwrap();
        let half = |lo: bool| if lo { [0.0, 0.5 + grow] } else { [0.5 - grow, 1.0] };
        let mut entries = Vec::new();
        for (i, (lx, ly)) in [(true, true), (false, true), (true, false), (false, false)].into_iter().enumerate() {
            entries.push((VertexId::new(format!("q{i}")).unwrap(), Region::Box(vec![half(lx), half(ly)])));
        }
        for (i, (x, w, y, h)) in extra.into_iter().enumerate() {
            let b = Region::Box(vec![[x, (x + w).min(1.0)], [y, (y + h).min(1.0)]]);
            entries.push((VertexId::new(format!("e{i}")).unwrap(), b));
        }
        let margin = default_margin(&space);
        (Cover::new(space, entries).unwrap(), margin)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closure_is_idempotent_and_downward_closed(faces in proptest::collection::vec(face_strategy(), 1..5)) {
        let c = close_downward(&faces).unwrap();
        let again = close_downward(&c.faces().iter().cloned().collect::<Vec<_>>()).unwrap();
        prop_assert_eq!(again.faces(), c.faces());
        for f in c.faces() {
            for sub in f.subfaces() {
                prop_assert!(is_face(&c, sub.vertices().iter().map(VertexId::as_str)), "{} missing from closure", sub);
            }
        }
    }

    #[test]
    fn carrier_of_a_realised_point_is_its_support(
        face in face_strategy(),
        raw in proptest::collection::vec(0.0..1.0f64, 4),
        zero in proptest::collection::vec(any::<bool>(), 4),
    ) {
        let c = close_downward(std::slice::from_ref(&face)).unwrap();
        let mut weights: Vec<(VertexId, f64)> = face
            .vertices()
            .iter()
            .zip(raw.iter().zip(&zero))
            .map(|(v, (w, z))| (v.clone(), if *z { 0.0 } else { 0.05 + w }))
            .collect();
        if weights.iter().all(|(_, w)| *w == 0.0) {
            weights[0].1 = 1.0;
        }
        let total: f64 = weights.iter().map(|(_, w)| w).sum();
        let normalised: Vec<(VertexId, f64)> = weights.iter().map(|(v, w)| (v.clone(), w / total)).collect();
        let p = realize_point(&c, normalised.clone()).unwrap();

        let support = Face::new(normalised.iter().filter(|(_, w)| *w > 0.0).map(|(v, _)| v.clone())).unwrap();
        prop_assert_eq!(carrier_face(&p, 0.0).unwrap(), support);

        let sum: f64 = p.iter().map(|(_, w)| w).sum();
        prop_assert!((sum - 1.0).abs() <= 1e-9);
        prop_assert!(p.iter().all(|(_, w)| (0.0..=1.0).contains(&w)));
    }

    #[test]
    fn in_face_is_monotone_under_inclusion(
        face in face_strategy(),
        raw in proptest::collection::vec(0.0..1.0f64, 4),
        small in face_strategy(),
    ) {
        let c = close_downward(std::slice::from_ref(&face)).unwrap();
        let total: f64 = raw.iter().take(face.len()).map(|w| w + 0.01).sum();
        let p = realize_point(&c, face.vertices().iter().zip(&raw).map(|(v, w)| (v.clone(), (w + 0.01) / total))).unwrap();
        for y in c.faces() {
            if !in_face(&p, y, 1e-9) {
                continue;
            }
            for z in c.faces().iter().filter(|z| y.is_subset_of(z)) {
                prop_assert!(in_face(&p, z, 1e-9));
            }
        }
        // Any face holding the point, in the complex or not, covers its carrier.
        if in_face(&p, &small, 1e-9) {
            prop_assert!(p.carrier().is_subset_of(&small));
        }
    }

    #[test]
    fn partition_of_unity_contract((cover, margin) in cover_strategy(), pts in proptest::collection::vec((0.0..=1.0f64, 0.0..=1.0f64), 64)) {
        let pou = PartitionOfUnity::build(&cover, margin, 64, Exec::default()).unwrap();
        let n = nerve(&cover).unwrap();
        prop_assert_eq!(pou.nerve().faces(), n.faces());
        for (x, y) in pts {
            let s = [x, y];
            let w = pou.weights(&s).unwrap();
            let sum: f64 = w.iter().map(|(_, x)| x).sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9, "sum {sum} at {s:?}");
            prop_assert!(w.iter().all(|(_, x)| *x >= 0.0));
            for (v, x) in &w {
                if *x > 0.0 {
                    prop_assert!(cover.region(v).unwrap().contains(&s), "{v} positive outside its region at {s:?}");
                }
            }
            let support = Face::new(w.iter().filter(|(_, x)| *x > 0.0).map(|(v, _)| v.clone())).unwrap();
            prop_assert!(n.contains(&support), "support {support} not in the nerve");
        }
    }

    #[test]
    fn partition_of_unity_is_lipschitz(
        (cover, margin) in cover_strategy(),
        x in 0.0..=1.0f64,
        y in 0.0..=1.0f64,
        dx in -1e-3..1e-3f64,
        dy in -1e-3..1e-3f64,
    ) {
        let pou = PartitionOfUnity::build(&cover, margin, 64, Exec::default()).unwrap();
        let s = [x, y];
        let t = [(x + dx).clamp(0.0, 1.0), (y + dy).clamp(0.0, 1.0)];
        let h = ((s[0] - t[0]).powi(2) + (s[1] - t[1]).powi(2)).sqrt();
        let a: BTreeMap<VertexId, f64> = pou.weights(&s).unwrap().into_iter().collect();
        let b: BTreeMap<VertexId, f64> = pou.weights(&t).unwrap().into_iter().collect();
        let worst = a.keys().chain(b.keys()).map(|v| {
            (a.get(v).copied().unwrap_or(0.0) - b.get(v).copied().unwrap_or(0.0)).abs()
        }).fold(0.0, f64::max);
        prop_assert!(worst <= 2.0 / margin * h + 1e-12, "|Δφ| = {worst} over h = {h}, margin {margin}");
    }

    #[test]
    fn runs_are_deterministic(path in unit_path(30)) {
        let m = offender();
        let trace = offender_trace(&path);
        let a = Engine::new(m.clone()).unwrap().run(&trace, None).unwrap().to_json();
        let b = Engine::new(m).unwrap().run(&trace, None).unwrap().to_json();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn warnings_fire_only_on_rising_edges(path in unit_path(40)) {
        let traj = Engine::new(offender()).unwrap().run(&offender_trace(&path), None).unwrap();
        // The warning zone watches weight(OK) < 0.5 and the mode never changes.
        let below = |a: f64, t: f64| offender_phi(OffenderState::new(a, t).unwrap()).weight_of(OK) < 0.5;
        let mut prev = below(0.0, 0.0);
        let mut rising = 0;
        for &(a, t) in &path {
            let now = below(a, t);
            if now && !prev {
                rising += 1;
            }
            prev = now;
        }
        prop_assert_eq!(traj.count(EventKind::Warn), rising);
        prop_assert_eq!(traj.count(EventKind::Transition), 0);
        prop_assert_eq!(traj.samples.len(), path.len() + 1);
        prop_assert!(traj.samples.windows(2).all(|w| w[0].t < w[1].t));
    }

    #[test]
    fn overlap_paths_never_switch(path in proptest::collection::vec(0.4001..0.5999f64, 100), start_in_jail in any::<bool>()) {
        let p = JudicialParams::default();
        let mut mode = Face::of(&[if start_in_jail { JAIL } else { PROBATION }]);
        let start = mode.clone();
        for g in path {
            mode = fold_mode(&p, &mode, g).unwrap();
        }
        prop_assert_eq!(mode, start);
    }

    #[test]
    fn good_behaviour_drops_at_incidents_and_recovers_between(
        incidents in proptest::collection::vec((0.05..0.95f64, 0.0..0.8f64), 1..4),
        u in 0.0..1.0f64,
        v in 0.0..1.0f64,
    ) {
        let mut p = JudicialParams::default();
        p.incidents = incidents.clone();
        p.incidents.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(ti, _) in &p.incidents {
            prop_assert!(good_behaviour(&p, ti) <= good_behaviour(&p, ti - 1e-9) + 1e-12);
        }
        // Two times between the same pair of consecutive incidents.
        let mut edges: Vec<f64> = p.incidents.iter().map(|(t, _)| *t).collect();
        edges.push(1.0);
        for w in edges.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if hi - lo < 1e-6 {
                continue;
            }
            let (s, t) = (lo + (hi - lo) * u.min(v) * 0.999, lo + (hi - lo) * u.max(v) * 0.999);
            if t - s < 1e-6 {
                continue;
            }
            let (gs, gt) = (good_behaviour(&p, s), good_behaviour(&p, t));
            if gs > 0.0 && gt < 1.0 {
                prop_assert!(gt > gs, "g({s}) = {gs}, g({t}) = {gt}");
            }
        }
    }

    #[test]
    fn printed_scenarios_reparse(low in 0.05..0.5f64, high in 0.5..0.99f64, warn in 0.01..0.99f64, trigger in 0.01..0.99f64) {
        let src = include_str!("../fixtures/trigger_line.mode")
            .replace(">= 0.5 warn", &format!(">= {warn:.4} warn"))
            .replace(">= 0.95 transition", &format!(">= {trigger:.4} transition"))
            .replace("colours 0.5 0.95", &format!("colours {low:.4} {high:.4}"));
        let doc = dsl::parse(&src).unwrap();
        let text = dsl::to_text(&doc);
        prop_assert_eq!(dsl::parse(&text).unwrap(), doc.clone());
        prop_assert_eq!(dsl::to_text(&dsl::parse(&text).unwrap()), text);
        prop_assert_eq!(dsl::from_json(&dsl::to_json(&doc)).unwrap(), doc);
    }

    #[test]
    fn damaged_scenarios_fail_with_real_spans_or_compile(drop in 0usize..40, cut in 0usize..40) {
        let src = include_str!("../fixtures/offender.mode");
        let lines: Vec<&str> = src.lines().collect();
        let mut damaged: Vec<String> = lines.iter().map(|l| l.to_string()).collect();
        let d = drop % damaged.len();
        damaged.remove(d);
        let c = cut % damaged.len();
        let keep = damaged[c].len() / 2;
        damaged[c].truncate(keep);
        let text = damaged.join("\n");
        let out: Vec<&str> = text.lines().collect();
        match dsl::load(&text, false) {
            Ok((doc, _)) => prop_assert!(dsl::compile(&doc, &CompileOptions::default()).is_ok()),
            Err(diags) => {
                prop_assert!(!diags.is_empty());
                for span in diags.iter().filter_map(|d| d.span) {
                    prop_assert!(span.line >= 1 && span.line <= out.len().max(1), "{span:?}");
                    let width = out.get(span.line - 1).map_or(0, |l| l.chars().count());
                    prop_assert!(span.col >= 1 && span.col <= width + 1, "{span:?} on {:?}", out.get(span.line - 1));
                }
            }
        }
    }

    #[test]
    fn rendered_trajectories_are_well_formed(path in unit_path(25)) {
        let m = offender();
        let traj = Engine::new(m.clone()).unwrap().run(&offender_trace(&path), None).unwrap();
        let spec = RenderSpec::new(m.complex(), &BTreeMap::new());
        let svg = render_trajectory(m.complex(), &traj, &spec).unwrap();
        prop_assert_eq!(&svg, &render_trajectory(m.complex(), &traj, &spec).unwrap());
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let polylines: Vec<_> = doc.descendants().filter(|n| n.has_tag_name("polyline")).collect();
        prop_assert_eq!(polylines.len(), 1);
        let points = polylines[0].attribute("points").unwrap().split_whitespace().count();
        prop_assert_eq!(points, traj.samples.len());
        let dots = doc.descendants().filter(|n| n.has_tag_name("circle") && n.attribute("class").is_some_and(|c| c.starts_with("sample"))).count();
        prop_assert_eq!(dots, traj.samples.len());
    }
}
