//! End-to-end acceptance checks. Runs without the test harness so that the
//! one PASS or FAIL line per criterion is always printed; the process exits
//! non-zero if any criterion fails.
//!
//! Expected values are recomputed here from first principles (mass sums,
//! box intersections, a hand-written hysteresis loop) rather than read back
//! from the library.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use modeplex::belief::{
    check_plausibility, from_mass, plausibility, validate, visualise, BeliefFunction, BeliefVisualisation,
    ConfidenceBand, MassFunction, StatementSet, Subset, Thresholds,
};
use modeplex::cover::{default_margin, PartitionOfUnity};
use modeplex::dsl::{self, CompileOptions, RegionDecl, ScenarioDoc};
use modeplex::engine::{Engine, Evaluator, EventKind, Trace};
use modeplex::par::Exec;
use modeplex::render::{render_beliefs, RenderSpec};
use modeplex::scenarios::judicial::{fold_mode, judicial_phi, JudicialParams, JAIL, PROBATION, RELEASE};
use modeplex::scenarios::offender::{
    offender_cover, offender_interventions, offender_phi, Intervention, OffenderState, ALC, OK, TAG,
};
use modeplex::scenarios::triage::{triage_decide, TriageDecision, TriageTree, ADMIT, BEGIN, DISCHARGE};
use modeplex::simplicial::{close_downward, in_face};
use modeplex::{Face, SimplexPoint};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn fixture(rel: &str) -> String {
    fs::read_to_string(format!("{}/fixtures/{rel}", env!("CARGO_MANIFEST_DIR"))).expect(rel)
}

const FIXTURES: &[(&str, &str)] = &[
    ("offender", "offender_crossing"),
    ("triage", "triage_cardiac"),
    ("judicial", "judicial_good_behaviour"),
    ("judicial", "judicial_oscillation"),
    ("trigger_line", "trigger_ramp"),
    ("emergency", "emergency_walk"),
    ("four_set", "four_set_sweep"),
    ("offender", "empty"),
];

// ---------------------------------------------------------------- oracles

/// `Bel(Y)` by direct summation over the masses of subsets of `Y`.
fn bel_oracle(masses: &BTreeMap<Subset, f64>, y: Subset) -> f64 {
    masses.iter().filter(|(z, _)| **z & !y == 0).map(|(_, m)| m).sum()
}

/// `Pla(Y)` as the total mass of focal sets meeting `Y`.
fn pla_oracle(masses: &BTreeMap<Subset, f64>, y: Subset) -> f64 {
    masses.iter().filter(|(z, _)| **z & y != 0).map(|(_, m)| m).sum()
}

fn statements(n: usize) -> StatementSet {
    StatementSet::new((0..n).map(|i| ["a", "b", "c", "d"][i])).unwrap()
}

/// 1000 mass functions over 2 to 4 statements with random total in (0, 1].
fn population() -> Vec<(usize, BTreeMap<Subset, f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..1000)
        .map(|_| {
            let n = rng.random_range(2..=4usize);
            let full = (1u32 << n) - 1;
            let focal = rng.random_range(1..=full as usize);
            let mut raw = BTreeMap::new();
            for _ in 0..focal {
                let s = rng.random_range(1..=full);
                *raw.entry(s).or_insert(0.0) += rng.random_range(0.01..1.0);
            }
            let total: f64 = raw.values().sum();
            let scale = rng.random_range(0.05..=1.0) / total;
            (n, raw.into_iter().map(|(s, m)| (s, m * scale)).collect())
        })
        .collect()
}

fn belief(n: usize, masses: &BTreeMap<Subset, f64>) -> BeliefFunction {
    from_mass(&MassFunction::new(statements(n), masses.clone()).unwrap())
}

// ---------------------------------------------------------------- criteria

fn c1_belief_soundness() -> Outcome {
    let start = Instant::now();
    let mut violations = 0;
    let mut mismatches = 0;
    for (n, masses) in population() {
        let bel = belief(n, &masses);
        violations += validate(&bel).len();
        for y in 0..(1u32 << n) {
            if (bel.bel(y).unwrap() - bel_oracle(&masses, y)).abs() > 1e-12 {
                mismatches += 1;
            }
        }
        // Independent super-additivity sweep over every pair.
        for y in 0..(1u32 << n) {
            for z in 0..(1u32 << n) {
                let lhs = bel_oracle(&masses, y | z) + bel_oracle(&masses, y & z);
                let rhs = bel_oracle(&masses, y) + bel_oracle(&masses, z);
                if lhs < rhs - 1e-12 {
                    violations += 1;
                }
            }
        }
    }
    let took = start.elapsed();
    ensure!(violations == 0, "{violations} invariant violations");
    ensure!(mismatches == 0, "{mismatches} Bel values differ from direct summation");
    ensure!(took < Duration::from_secs(5), "took {took:?}");
    Ok(format!("1000 mass functions, 0 violations, {took:.2?}"))
}

fn c2_plausibility() -> Outcome {
    let mut violations = 0;
    let mut mismatches = 0;
    let mut checked = 0;
    for (n, masses) in population() {
        let bel = belief(n, &masses);
        violations += check_plausibility(&bel, Exec::default()).len();
        let subsets = 1u32 << n;
        for y in 0..subsets {
            let pla = pla_oracle(&masses, y);
            if (plausibility(&bel, y).unwrap() - pla).abs() > 1e-12 {
                mismatches += 1;
            }
            if bel_oracle(&masses, y) > pla + 1e-12 {
                violations += 1;
            }
            for z in 0..subsets {
                checked += 1;
                let lhs = pla_oracle(&masses, y | z) + pla_oracle(&masses, y & z);
                if lhs > pla + pla_oracle(&masses, z) + 1e-12 {
                    violations += 1;
                }
            }
        }
    }
    ensure!(violations == 0, "{violations} violations");
    ensure!(mismatches == 0, "{mismatches} Pla values differ from the focal-set sum");
    Ok(format!("Bel ≤ Pla and Pla sub-additivity on {checked} subset pairs, 0 violations"))
}

/// Every vector of non-negative integers of length `len` with sum at most `cap`.
fn compositions(len: usize, cap: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() == len {
        out.push(prefix.clone());
        return;
    }
    let used: u32 = prefix.iter().sum();
    for k in 0..=cap - used {
        prefix.push(k);
        compositions(len, cap, prefix, out);
        prefix.pop();
    }
}

fn c3_face_membership() -> Outcome {
    let start = Instant::now();
    let mut functions = 0usize;
    let mut checks = 0usize;
    let mut failures = Vec::new();
    for n in 1..=4usize {
        let set = statements(n);
        let full = (1u32 << n) - 1;
        // Masses k/d with d ≤ 6, deduplicated on the common denominator 60.
        let mut seen = BTreeSet::new();
        for d in 1..=6u32 {
            let mut all = Vec::new();
            compositions(full as usize, d, &mut Vec::new(), &mut all);
            for ks in all {
                if ks.iter().all(|k| *k == 0) {
                    continue;
                }
                let key: Vec<u32> = ks.iter().map(|k| k * 60 / d).collect();
                if !seen.insert(key) {
                    continue;
                }
                let masses: BTreeMap<Subset, f64> = ks
                    .iter()
                    .enumerate()
                    .filter(|(_, k)| **k > 0)
                    .map(|(i, k)| ((i + 1) as Subset, *k as f64 / d as f64))
                    .collect();
                let bel = from_mass(&MassFunction::new(set.clone(), masses.clone()).unwrap());
                let vis = visualise(&bel).map_err(|e| e.to_string())?;
                functions += 1;
                let total = bel_oracle(&masses, full);
                for y in 1..=full {
                    checks += 1;
                    let lhs = (bel_oracle(&masses, y) - total).abs() <= 1e-9;
                    let names = set.names_of(y);
                    let face = Face::new(names.iter().map(String::as_str)).unwrap();
                    let rhs = in_face(&vis.position, &face, 1e-9);
                    if lhs != rhs && failures.len() < 3 {
                        failures.push(format!("n={n} masses={masses:?} Y={y:#b}: Bel test {lhs}, face test {rhs}"));
                    }
                }
            }
        }
    }
    let took = start.elapsed();
    ensure!(failures.is_empty(), "{}", failures.join("; "));
    ensure!(took < Duration::from_secs(60), "took {took:?}");
    Ok(format!("{functions} rational belief functions, {checks} face checks, {took:.2?}"))
}

fn five_beliefs() -> Vec<(String, BeliefVisualisation)> {
    let set = StatementSet::new(["a", "b", "c"]).unwrap();
    let named: [(&str, &[(&[&str], f64)]); 5] = [
        ("x", &[(&["c"], 0.95)]),
        ("w", &[(&["b"], 0.3), (&["c"], 0.4), (&["b", "c"], 0.25)]),
        ("y", &[(&["a"], 0.02), (&["b"], 0.4), (&["c"], 0.33), (&["b", "c"], 0.2)]),
        ("z", &[(&["a"], 0.25), (&["b"], 0.3), (&["c"], 0.2), (&["a", "b", "c"], 0.1)]),
        ("u", &[(&["a"], 0.2), (&["b"], 0.15), (&["c"], 0.1), (&["a", "b", "c"], 0.2)]),
    ];
    named
        .iter()
        .map(|(name, entries)| {
            let m = MassFunction::from_named(set.clone(), entries).unwrap();
            (name.to_string(), visualise(&from_mass(&m)).unwrap())
        })
        .collect()
}

fn c4_belief_rendering() -> Outcome {
    let points = five_beliefs();
    let face = |names: &[&str]| Face::of(names);
    let pos = |i: usize| &points[i].1.position;
    ensure!(in_face(pos(0), &face(&["c"]), 1e-9), "x is not at the c vertex");
    ensure!(in_face(pos(1), &face(&["b", "c"]), 1e-9), "w is not on the bc face");
    ensure!(!in_face(pos(2), &face(&["b", "c"]), 1e-9) && pos(2).weight_of("a") < 0.05, "y is not near the bc face");
    ensure!(["a", "b", "c"].iter().all(|v| pos(3).weight_of(v) > 0.1), "z is not interior");

    let c = close_downward(&[face(&["a", "b", "c"])]).unwrap();
    let mut spec = RenderSpec::new(&c, &BTreeMap::new());
    spec.thresholds = Thresholds::default();
    let svg = render_beliefs(&c, &points, &spec).map_err(|e| e.to_string())?;
    let doc = roxmltree::Document::parse(&svg).map_err(|e| e.to_string())?;
    let class_of = |n: &roxmltree::Node| n.attribute("class").unwrap_or("").to_string();
    let colours: Vec<String> = doc
        .descendants()
        .filter(|n| n.has_tag_name("circle") && class_of(n).starts_with("sample"))
        .map(|n| n.attribute("fill").unwrap_or("").to_string())
        .collect();
    let labels: Vec<String> = doc
        .descendants()
        .filter(|n| n.has_tag_name("text") && class_of(n) == "pct")
        .map(|n| n.text().unwrap_or("").to_string())
        .collect();
    let want_colours = [ConfidenceBand::Green, ConfidenceBand::Green, ConfidenceBand::Green, ConfidenceBand::Orange, ConfidenceBand::Red]
        .map(|b| b.css().to_string());
    ensure!(colours == want_colours, "colours {colours:?}");
    ensure!(labels == ["95%", "95%", "95%", "85%", "65%"], "labels {labels:?}");
    Ok(format!("colours {} and labels {}", colours.join("/"), labels.join(",")))
}

fn c5_partition_of_unity() -> Outcome {
    let cover = offender_cover();
    let margin = default_margin(cover.space());
    let mut reports = Vec::new();
    for exec in [Exec::Sequential, Exec::Parallel] {
        let pou = PartitionOfUnity::build(&cover, margin, 512, exec).map_err(|e| e.to_string())?;
        let n = 512;
        let mut worst: f64 = 0.0;
        let mut outside = 0;
        for i in 0..n {
            for j in 0..n {
                let s = [i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64];
                let w = pou.weights(&s).map_err(|e| format!("{s:?}: {e}"))?;
                worst = worst.max((w.iter().map(|(_, x)| x).sum::<f64>() - 1.0).abs());
                outside += w.iter().filter(|(v, x)| *x > 0.0 && !cover.region(v).unwrap().contains(&s)).count();
            }
        }
        reports.push((worst, outside));
    }
    let (worst, outside) = reports[0];
    ensure!(reports[0] == reports[1], "sequential and parallel builds differ: {reports:?}");
    ensure!(worst <= 1e-9, "max |Σφ − 1| = {worst:e}");
    ensure!(outside == 0, "{outside} support counterexamples");
    Ok(format!("512×512 grid, max |Σφ − 1| = {worst:.1e}, 0 support counterexamples"))
}

fn c6_offender() -> Outcome {
    let cases = [
        ((0.9, 0.1), vec![Intervention::Counsellor]),
        ((0.1, 0.9), vec![Intervention::ProbationOfficer]),
        ((0.9, 0.9), vec![Intervention::Police]),
        ((0.2, 0.2), vec![]),
    ];
    for ((a, t), want) in cases {
        let got = offender_interventions(OffenderState::new(a, t).map_err(|e| e.to_string())?);
        ensure!(got == want, "({a}, {t}) gave {got:?}");
    }
    for ((a, t), vertex) in [((0.0, 0.0), OK), ((1.0, 0.0), ALC), ((0.0, 1.0), TAG)] {
        let p = offender_phi(OffenderState::new(a, t).unwrap());
        ensure!((p.weight_of(vertex) - 1.0).abs() <= 1e-9, "({a}, {t}) maps to {p:?}");
    }
    Ok("four point checks and three corner images".into())
}

fn c7_triage() -> Outcome {
    let tree = TriageTree::bundled();
    ensure!(tree.len() == 12, "tree has {} nodes", tree.len());
    for node in tree.nodes() {
        let s: f64 = node.scores.iter().sum();
        ensure!((s - 1.0).abs() <= 1e-9, "node {} sums to {s}", node.id);
    }
    let p = SimplexPoint::from_weights([(BEGIN, 0.1), (DISCHARGE, 0.05), (ADMIT, 0.85)]).unwrap();
    ensure!(triage_decide(&p, false) == TriageDecision::Admit, "0.85 does not admit on a normal day");
    ensure!(triage_decide(&p, true) == TriageDecision::Continue, "0.85 does not continue on a busy day");
    // The same thresholds through the scenario file and the engine.
    let doc = dsl::parse(&fixture("triage.mode")).map_err(|e| format!("{e:?}"))?;
    let reading = r#"{"readings": [{"channel": "nurse", "t": 1.0, "value": [0.1, 0.05, 0.85]}]}"#;
    let trace = Trace::from_json(reading).unwrap();
    for (busy, want) in [(false, ADMIT), (true, BEGIN)] {
        let m = dsl::compile(&doc, &CompileOptions { busy, ..CompileOptions::default() }).map_err(|e| format!("{e:?}"))?;
        let traj = Engine::new(Arc::new(m)).unwrap().run(&trace.readings, None).map_err(|e| e.to_string())?;
        let mode = &traj.samples.last().unwrap().mode;
        ensure!(*mode == Face::of(&[want]), "busy={busy}: ended in {mode}");
    }
    Ok("12 nodes sum to 1; 0.85 admits when calm and continues when busy".into())
}

/// Jail holds while `g ≤ b`; probation holds while `g ≥ a`.
fn fold_oracle(a: f64, b: f64, path: &[f64]) -> Vec<&'static str> {
    let mut mode = JAIL;
    let mut seq = vec![mode];
    for &g in path {
        let next = match mode {
            JAIL if g > b => PROBATION,
            PROBATION if g < a => JAIL,
            m => m,
        };
        if next != mode {
            seq.push(next);
            mode = next;
        }
    }
    seq
}

fn fold_sequence(p: &JudicialParams, path: &[f64]) -> Result<Vec<String>, String> {
    let mut mode = Face::of(&[JAIL]);
    let mut seq = vec![JAIL.to_string()];
    for &g in path {
        let next = fold_mode(p, &mode, g).map_err(|e| e.to_string())?;
        if next != mode {
            seq.push(next.names()[0].clone());
            mode = next;
        }
    }
    Ok(seq)
}

fn c8_judicial() -> Outcome {
    let p = JudicialParams::default();
    let wobble: Vec<f64> = (0..100).map(|k| 0.5 + 0.09 * (k as f64 * 0.9).sin()).collect();
    ensure!(wobble.iter().all(|g| *g > p.a && *g < p.b), "wobble leaves the overlap");
    for start in [JAIL, PROBATION] {
        let mut mode = Face::of(&[start]);
        for &g in &wobble {
            let next = fold_mode(&p, &mode, g).map_err(|e| e.to_string())?;
            ensure!(next == mode, "switched from {start} at g = {g}");
            mode = next;
        }
    }
    let up_down: Vec<f64> = (0..=50).map(|k| 0.2 + 0.01 * k as f64).chain((0..=40).map(|k| 0.7 - 0.01 * k as f64)).collect();
    let seq = fold_sequence(&p, &up_down)?;
    ensure!(seq == fold_oracle(p.a, p.b, &up_down), "{seq:?} differs from the hand-written loop");
    ensure!(seq == [JAIL, PROBATION, JAIL], "sequence {seq:?}");

    // The two-dimensional domains through the scenario file.
    let doc = dsl::parse(&fixture("judicial.mode")).map_err(|e| format!("{e:?}"))?;
    let m = Arc::new(dsl::compile(&doc, &CompileOptions::default()).map_err(|e| format!("{e:?}"))?);
    let osc = Trace::from_json(&fixture("traces/judicial_oscillation.json")).unwrap();
    let traj = Engine::new(m).unwrap().run(&osc.readings, None).map_err(|e| e.to_string())?;
    ensure!(traj.count(EventKind::Transition) == 0, "2D oscillation switched modes");

    let labels = [("g", JAIL), ("f", JAIL), ("e", RELEASE), ("c", RELEASE), ("b", RELEASE), ("a", PROBATION)];
    for (label, want) in labels {
        let q = p.geometry.point(label).unwrap();
        let w = judicial_phi(&p, &Face::of(&[PROBATION]), q[0], q[1]).map_err(|e| e.to_string())?;
        ensure!(w == SimplexPoint::vertex(want.into()), "{label} maps to {w:?}, expected {want}");
    }
    Ok("0 switches inside (a, b); Jail→Probation→Jail; boundary labels g,f→Jail e,c,b→Release a→Probation".into())
}

fn compile_fixture(name: &str) -> Result<(ScenarioDoc, Arc<modeplex::engine::Machine>), String> {
    let doc = dsl::parse(&fixture(&format!("{name}.mode"))).map_err(|e| format!("{name}: {e:?}"))?;
    let m = dsl::compile(&doc, &CompileOptions::default()).map_err(|e| format!("{name}: {e:?}"))?;
    Ok((doc, Arc::new(m)))
}

fn c9_determinism() -> Outcome {
    for (scenario, trace) in FIXTURES {
        let trace = Trace::from_json(&fixture(&format!("traces/{trace}.json"))).map_err(|e| e.to_string())?;
        let runs: Vec<String> = (0..2)
            .map(|_| {
                let (_, m) = compile_fixture(scenario)?;
                let t = Engine::new(m).unwrap().run(&trace.readings, None).map_err(|e| e.to_string())?;
                Ok(t.to_json())
            })
            .collect::<Result<_, String>>()?;
        ensure!(runs[0] == runs[1], "{scenario}: runs differ");
    }
    let scenarios: BTreeSet<&str> = FIXTURES.iter().map(|(s, _)| *s).collect();
    for name in &scenarios {
        let (doc, _) = compile_fixture(name)?;
        let twin = dsl::from_json(&fixture(&format!("{name}.json"))).map_err(|e| format!("{name}: {e:?}"))?;
        ensure!(twin == doc, "{name}: JSON twin differs from the .mode file");
        ensure!(dsl::from_json(&dsl::to_json(&doc)).map_err(|e| format!("{e:?}"))? == doc, "{name}: JSON round trip");
        ensure!(dsl::parse(&dsl::to_text(&doc)).map_err(|e| format!("{e:?}"))? == doc, "{name}: text round trip");
    }
    Ok(format!("{} runs byte-identical; {} scenarios round-trip through text and JSON", FIXTURES.len(), scenarios.len()))
}

fn c10_closure_and_nerve() -> Outcome {
    let tetra = close_downward(&[Face::of(&["warning", "police", "ambulance", "fire"])]).map_err(|e| e.to_string())?;
    ensure!(tetra.len() == 15, "tetrahedron closes to {} faces", tetra.len());

    let (doc, m) = compile_fixture("four_set")?;
    let Evaluator::Pou(pou) = &m.modes()[0].evaluator else {
        return Err("four-set scenario does not use a partition of unity".into());
    };
    let nerve = pou.nerve();
    // Oracle: closed boxes meet iff their intervals overlap on every axis.
    let boxes: Vec<(String, Vec<[f64; 2]>)> = doc
        .cover
        .iter()
        .map(|c| match &c.region {
            RegionDecl::Box(iv) => Ok((c.vertex.clone(), iv.clone())),
            other => Err(format!("expected boxes, got {other:?}")),
        })
        .collect::<Result<_, String>>()?;
    let mut expected = BTreeSet::new();
    for mask in 1u32..(1 << boxes.len()) {
        let members: Vec<&(String, Vec<[f64; 2]>)> = (0..boxes.len()).filter(|i| mask >> i & 1 == 1).map(|i| &boxes[i]).collect();
        let meet = (0..2).all(|axis| {
            let lo = members.iter().map(|b| b.1[axis][0]).fold(f64::NEG_INFINITY, f64::max);
            let hi = members.iter().map(|b| b.1[axis][1]).fold(f64::INFINITY, f64::min);
            lo <= hi
        });
        if meet {
            expected.insert(Face::new(members.iter().map(|b| b.0.as_str())).unwrap());
        }
    }
    ensure!(*nerve.faces() == expected, "nerve {:?} differs from the box oracle", nerve.faces());
    ensure!(nerve.contains(&Face::of(&["alpha", "beta", "gamma"])), "αβγ missing");
    ensure!(nerve.contains(&Face::of(&["gamma", "delta"])), "γδ missing");
    Ok(format!("15 faces; nerve has {} faces including αβγ and γδ", nerve.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("belief-function soundness", c1_belief_soundness),
        ("plausibility and sub-additivity", c2_plausibility),
        ("face membership", c3_face_membership),
        ("belief rendering", c4_belief_rendering),
        ("partition of unity", c5_partition_of_unity),
        ("offender point checks", c6_offender),
        ("triage thresholds", c7_triage),
        ("judicial hysteresis", c8_judicial),
        ("determinism and round trips", c9_determinism),
        ("closure and nerve", c10_closure_and_nerve),
    ];
    let start = Instant::now();
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(msg) => println!("PASS {:>2} {name}: {msg}", i + 1),
            Err(msg) => {
                println!("FAIL {:>2} {name}: {msg}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    println!("acceptance finished in {:.2?}", start.elapsed());
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
