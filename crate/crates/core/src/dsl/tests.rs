use super::*;

const FIXTURES: &[(&str, &str, &str)] = &[
    ("offender", include_str!("../../fixtures/offender.mode"), include_str!("../../fixtures/offender.json")),
    ("triage", include_str!("../../fixtures/triage.mode"), include_str!("../../fixtures/triage.json")),
    ("judicial", include_str!("../../fixtures/judicial.mode"), include_str!("../../fixtures/judicial.json")),
    (
        "trigger_line",
        include_str!("../../fixtures/trigger_line.mode"),
        include_str!("../../fixtures/trigger_line.json"),
    ),
    ("emergency", include_str!("../../fixtures/emergency.mode"), include_str!("../../fixtures/emergency.json")),
    ("four_set", include_str!("../../fixtures/four_set.mode"), include_str!("../../fixtures/four_set.json")),
];

fn parsed(text: &str) -> ScenarioDoc {
    parse(text).unwrap_or_else(|e| panic!("{}", e.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n")))
}

#[test]
fn fixtures_parse_compile_and_lint_clean() {
    for (name, text, _) in FIXTURES {
        let doc = parsed(text);
        compile(&doc, &CompileOptions::default()).unwrap_or_else(|e| panic!("{name}: {e:?}"));
        let warnings = lint(&doc);
        assert!(warnings.is_empty(), "{name}: {warnings:?}");
    }
}

#[test]
fn text_round_trip() {
    for (name, text, _) in FIXTURES {
        let doc = parsed(text);
        let printed = to_text(&doc);
        assert_eq!(parsed(&printed), doc, "{name}");
        assert_eq!(to_text(&parsed(&printed)), printed, "{name}: printing is not a fixed point");
    }
}

#[test]
fn json_twins_match() {
    for (name, text, json) in FIXTURES {
        let doc = parsed(text);
        assert_eq!(&to_json(&doc), json, "{name}: JSON twin is stale");
        assert_eq!(from_json(json).unwrap(), doc, "{name}");
    }
}

#[test]
fn empty_file_is_an_error_at_origin() {
    let errs = parse("").unwrap_err();
    assert_eq!(errs[0].span, Some(Span::point(1, 1)));
    let errs = parse("# only a comment\n\n").unwrap_err();
    assert!(errs[0].message.contains("no scenario"));
}

#[test]
fn undeclared_transition_target_points_at_the_zone() {
    let errs = parse(include_str!("../../fixtures/invalid/undeclared_face.mode")).unwrap_err();
    let e = errs.iter().find(|d| d.message.contains("undeclared face")).expect("diagnostic");
    assert!(e.is_error());
    assert_eq!(e.pointer.as_deref(), Some("/modes/0/zones/0"));
    let span = e.span.expect("span");
    assert_eq!(span.line, 17);
    assert!(e.hint.is_some());
}

#[test]
fn missing_initial_reports_pointer() {
    let errs = from_json(include_str!("../../fixtures/invalid/missing_initial.json")).unwrap_err();
    assert_eq!(errs[0].pointer.as_deref(), Some("/initial"));
}

#[test]
fn unclosed_block_is_reported() {
    let errs = parse(include_str!("../../fixtures/invalid/unclosed.mode")).unwrap_err();
    assert!(errs.iter().any(|d| d.message.contains("not closed")), "{errs:?}");
}

#[test]
fn orphan_mode_is_unreachable() {
    let doc = parsed(include_str!("../../fixtures/invalid/orphan.mode"));
    let w = lint(&doc);
    assert_eq!(w.len(), 1, "{w:?}");
    assert_eq!(w[0].severity, Severity::Warning);
    assert_eq!(w[0].pointer.as_deref(), Some("/modes/1"));
    assert!(w[0].message.contains("unreachable"));
}

#[test]
fn impossible_threshold_compiles_with_a_warning() {
    let text = include_str!("../../fixtures/invalid/never_fires.mode");
    let (doc, warnings) = load(text, false).unwrap();
    assert!(compile(&doc, &CompileOptions::default()).is_ok());
    assert_eq!(warnings.len(), 1);
    assert!(warnings[0].message.contains("never fire"));
    assert_eq!(warnings[0].span.map(|s| s.line), Some(17));
}

#[test]
fn busy_parameters_swap_thresholds() {
    let doc = parsed(FIXTURES[1].1);
    let calm = compile(&doc, &CompileOptions::default()).unwrap();
    let busy = compile(&doc, &CompileOptions { busy: true, ..CompileOptions::default() }).unwrap();
    let threshold = |m: &crate::engine::Machine| match &m.modes()[0].zones[0].predicate.0[0] {
        crate::engine::Atom::Weight { threshold, .. } => *threshold,
        other => panic!("{other:?}"),
    };
    assert_eq!(threshold(&calm), 0.8);
    assert_eq!(threshold(&busy), 0.95);
}

#[test]
fn nested_domains_warn() {
    let text = "scenario \"nest\"\nvertices a b\nface a b\nstate\n  axis a 0 1 init 0.5\n  axis b 0 1 init 0.5\nend\n\
        evaluator barycentric\nchannel c writes a b\nmode a\n  reads c\nend\nmode b\n  reads c\nend\n\
        domain {a} box [0, 1] [0, 1]\ndomain {b} box [0.4, 0.6] [0.4, 0.6]\ninitial a\n";
    let w = lint(&parsed(text));
    assert!(w.iter().any(|d| d.message.contains("without a shared boundary")), "{w:?}");
}

#[test]
fn unknown_json_field_is_rejected() {
    let mut v: serde_json::Value = serde_json::from_str(FIXTURES[0].2).unwrap();
    v["modes"][0]["colour"] = serde_json::json!("red");
    let errs = from_json(&v.to_string()).unwrap_err();
    assert_eq!(errs[0].pointer.as_deref(), Some("/modes/0/colour"));
}

#[test]
fn lexer_errors_carry_positions() {
    let errs = parse("scenario \"x\"\nvertices a $\n").unwrap_err();
    let span = errs[0].span.expect("span");
    assert_eq!((span.line, span.col), (2, 12));
}


