use akg_core::fixtures::{self, SEEDED_FAULTS};
use akg_core::ttl::{load_turtle_with, ParseOptions};
use akg_core::{validate, RuleId, Severity};

#[test]
fn clean_demo_and_one_violation_per_seeded_fixture() {
    assert!(validate(&fixtures::demo()).is_empty());
    for (rule, name, text) in SEEDED_FAULTS {
        let g = load_turtle_with(text, ParseOptions { allow_successor_cycles: true }).unwrap();
        let v = validate(&g);
        assert_eq!(v.len(), 1, "{name}: {v:?}");
        assert_eq!(v[0].rule_id, rule, "{name}");
        let expected = if matches!(rule, RuleId::V4 | RuleId::V8) { Severity::Warning } else { Severity::Error };
        assert_eq!(v[0].severity, expected);
    }
}

#[test]
fn cyclic_fixture_needs_lenient_loading() {
    let (_, _, text) = SEEDED_FAULTS[6];
    assert!(akg_core::load_turtle(text).is_err());
}

#[test]
fn validation_is_pure() {
    for rule in RuleId::ALL {
        let g = fixtures::seeded_fault(rule);
        let before = g.clone();
        assert_eq!(validate(&g), validate(&g));
        assert_eq!(g, before);
    }
}
