use super::*;
use crate::cover::Axis;
use crate::scenarios::offender::{offender_complex, ALC, OK, TAG};
use crate::simplicial::AbstractComplex;

fn weight(v: &str, cmp: Cmp, threshold: f64) -> Atom {
    Atom::Weight { vertex: v.into(), cmp, threshold }
}

/// A judgement line: `concern` rises from 0 (judge) to 1 (intervene).
fn trigger_line() -> Machine {
    let complex = AbstractComplex::simplex(&Face::of(&["judge", "intervene"])).unwrap();
    let space = StateSpace::new(vec![Axis::new("judge", 0.0, 1.0), Axis::new("intervene", 0.0, 1.0)]).unwrap();
    let eval = Evaluator::Barycentric { axes: vec![("intervene".into(), 1), ("judge".into(), 0)] };
    let judge = Mode {
        face: Face::of(&["judge"]),
        objective: "watch".into(),
        channels: vec!["concern".into()],
        evaluator: eval.clone(),
        zones: vec![
            Zone {
                name: "warning".into(),
                predicate: Predicate(vec![weight("intervene", Cmp::Ge, 0.5)]),
                action: Action::Warn("consider intervening".into()),
            },
            Zone {
                name: "trigger".into(),
                predicate: Predicate(vec![weight("intervene", Cmp::Ge, 0.95)]),
                action: Action::Transition(Face::of(&["intervene"])),
            },
        ],
    };
    let act = Mode {
        face: Face::of(&["intervene"]),
        objective: "act".into(),
        channels: vec!["concern".into()],
        evaluator: eval,
        zones: vec![],
    };
    Machine::new(
        complex,
        space,
        vec![judge, act],
        vec![Channel { name: "concern".into(), axes: vec![0, 1] }],
        vec![],
        Face::of(&["judge"]),
        vec![1.0, 0.0],
    )
    .unwrap()
}

fn concern(t: f64, x: f64) -> OracleReading {
    OracleReading { channel: "concern".into(), t, value: vec![1.0 - x, x], reliability: None }
}

fn offender() -> Machine {
    let space = StateSpace::new(vec![Axis::new("x_alc", 0.0, 1.0), Axis::new("x_tag", 0.0, 1.0)]).unwrap();
    let mode = Mode {
        face: Face::of(&[OK]),
        objective: "monitor".into(),
        channels: vec!["alc".into(), "tag".into()],
        evaluator: Evaluator::Offender { alc: 0, tag: 1 },
        zones: vec![
            Zone {
                name: "police".into(),
                predicate: Predicate(vec![weight(ALC, Cmp::Ge, 0.5), weight(TAG, Cmp::Ge, 0.5)]),
                action: Action::Intervene("police".into()),
            },
            Zone {
                name: "warning".into(),
                predicate: Predicate(vec![weight(OK, Cmp::Lt, 0.5)]),
                action: Action::Warn("past the warning line".into()),
            },
        ],
    };
    Machine::new(
        offender_complex(),
        space,
        vec![mode],
        vec![
            Channel { name: "alc".into(), axes: vec![0] },
            Channel { name: "tag".into(), axes: vec![1] },
            Channel { name: "gps".into(), axes: vec![1] },
        ],
        vec![],
        Face::of(&[OK]),
        vec![0.0, 0.0],
    )
    .unwrap()
}

fn reading(ch: &str, t: f64, x: f64) -> OracleReading {
    OracleReading { channel: ch.into(), t, value: vec![x], reliability: None }
}

#[test]
fn trigger_fires_transition() {
    let mut e = Engine::new(Arc::new(trigger_line())).unwrap();
    assert!(e.step(1.0, &[concern(1.0, 0.6)]).unwrap().iter().all(|ev| ev.kind == EventKind::Warn));
    let ev = e.step(2.0, &[concern(2.0, 0.97)]).unwrap();
    assert_eq!(ev.len(), 1);
    assert_eq!(ev[0].kind, EventKind::Transition);
    assert_eq!(e.mode(), &Face::of(&["intervene"]));
}

#[test]
fn stationary_point_is_quiet() {
    let mut e = Engine::new(Arc::new(trigger_line())).unwrap();
    for k in 1..10 {
        assert!(e.step(k as f64, &[concern(k as f64, 0.0)]).unwrap().is_empty());
    }
}

#[test]
fn time_must_advance() {
    let mut e = Engine::new(Arc::new(trigger_line())).unwrap();
    e.step(1.0, &[]).unwrap();
    assert!(matches!(e.step(1.0, &[]), Err(EngineError::InvalidInput(_))));
    assert!(matches!(e.step(0.5, &[]), Err(EngineError::InvalidInput(_))));
}

#[test]
fn police_at_both_problems() {
    let mut e = Engine::new(Arc::new(offender())).unwrap();
    let ev = e.step(1.0, &[reading("alc", 1.0, 0.9), reading("tag", 1.0, 0.9)]).unwrap();
    let kinds: Vec<_> = ev.iter().map(|e| (e.kind, e.name.as_str())).collect();
    assert_eq!(kinds, vec![(EventKind::Intervene, "police"), (EventKind::Warn, "warning")]);
}

#[test]
fn forbidden_channel_is_dropped() {
    let mut e = Engine::new(Arc::new(offender())).unwrap();
    let ev = e.step(1.0, &[reading("gps", 1.0, 0.9), reading("nope", 1.0, 0.9)]).unwrap();
    assert_eq!(ev.iter().filter(|e| e.kind == EventKind::AccessViolation).count(), 2);
    assert_eq!(e.state(), &[0.0, 0.0]);
}

#[test]
fn confidence_is_the_weakest_latest_reading() {
    let mut e = Engine::new(Arc::new(offender())).unwrap();
    assert_eq!(e.confidence(), 1.0);
    let mut r = reading("alc", 1.0, 0.1);
    r.reliability = Some(0.6);
    e.step(1.0, &[r]).unwrap();
    assert_eq!(e.confidence(), 0.6);
    let mut r = reading("alc", 2.0, 0.1);
    r.reliability = Some(0.9);
    e.step(2.0, &[r, reading("tag", 2.0, 0.1)]).unwrap();
    assert_eq!(e.confidence(), 0.9);
}

#[test]
fn empty_trace_gives_one_sample() {
    let traj = Engine::new(Arc::new(offender())).unwrap().run(&[], None).unwrap();
    assert_eq!(traj.samples.len(), 1);
    assert_eq!(traj.samples[0].t, 0.0);
}

#[test]
fn warning_crossed_and_returned_fires_once() {
    let trace: Vec<_> = (1..=40)
        .map(|k| {
            let x = if k <= 20 { k as f64 * 0.04 } else { (40 - k) as f64 * 0.04 };
            reading("alc", k as f64, x.min(0.7))
        })
        .collect();
    let traj = Engine::new(Arc::new(offender())).unwrap().run(&trace, None).unwrap();
    assert_eq!(traj.count(EventKind::Warn), 1);
    assert_eq!(traj.count(EventKind::Transition), 0);
    assert_eq!(traj.samples.len(), 41);
}

#[test]
fn run_reports_failure_time() {
    let trace = vec![reading("alc", 1.0, 0.5), reading("alc", 2.0, 1.5)];
    match Engine::new(Arc::new(offender())).unwrap().run(&trace, None) {
        Err(EngineError::At { time, .. }) => assert_eq!(time, 2.0),
        other => panic!("{other:?}"),
    }
}

#[test]
fn trajectory_json_round_trip() {
    let trace: Vec<_> = (1..=5).map(|k| reading("alc", k as f64 * 0.1, k as f64 * 0.15)).collect();
    let traj = Engine::new(Arc::new(offender())).unwrap().run(&trace, Some(1.0)).unwrap();
    assert_eq!(traj.samples.len(), 7);
    let json = traj.to_json();
    let back = Trajectory::from_json(&json).unwrap();
    assert_eq!(back.to_json(), json);
}

#[test]
fn explain_margins() {
    let m = trigger_line();
    let trace = vec![concern(1.0, 0.5), concern(2.0, 0.05)];
    let traj = Engine::new(Arc::new(m.clone())).unwrap().run(&trace, None).unwrap();
    let on_line = explain(&m, &traj, 1.0).unwrap();
    assert_eq!(on_line.margins[0].margin, 0.0);
    let top = explain(&m, &traj, 2.5).unwrap();
    assert_eq!(top.time, 2.0);
    assert!((top.margins[1].margin - 0.9).abs() < 1e-12);
    assert_eq!(top.next_likely.as_deref(), Some("warning"));
    assert!(matches!(explain(&m, &Trajectory::default(), 0.0), Err(EngineError::NoData)));
}

#[test]
fn machine_rejects_dangling_target() {
    let m = trigger_line();
    let mut modes = m.modes().to_vec();
    modes.truncate(1);
    let err = Machine::new(
        m.complex().clone(),
        m.space().clone(),
        modes,
        m.channels().to_vec(),
        vec![],
        m.initial().clone(),
        m.initial_state().to_vec(),
    );
    assert!(matches!(err, Err(EngineError::InvalidScenario(_))));
}
