//! Shipped Turtle fixtures: the EV battery disassembly demo and one
//! seeded-fault document per validation rule.

use crate::graph::AkgGraph;
use crate::ttl::{load_turtle_with, ParseOptions};
use crate::validate::RuleId;

pub const DEMO_TTL: &str = include_str!("../../../fixtures/demo.ttl");

pub const SEEDED_FAULTS: [(RuleId, &str, &str); 8] = [
    (RuleId::V1, "bad_v1.ttl", include_str!("../../../fixtures/bad_v1.ttl")),
    (RuleId::V2, "bad_v2.ttl", include_str!("../../../fixtures/bad_v2.ttl")),
    (RuleId::V3, "bad_v3.ttl", include_str!("../../../fixtures/bad_v3.ttl")),
    (RuleId::V4, "bad_v4.ttl", include_str!("../../../fixtures/bad_v4.ttl")),
    (RuleId::V5, "bad_v5.ttl", include_str!("../../../fixtures/bad_v5.ttl")),
    (RuleId::V6, "bad_v6.ttl", include_str!("../../../fixtures/bad_v6.ttl")),
    (RuleId::V7, "bad_v7.ttl", include_str!("../../../fixtures/bad_v7.ttl")),
    (RuleId::V8, "bad_v8.ttl", include_str!("../../../fixtures/bad_v8.ttl")),
];

pub fn demo() -> AkgGraph {
    crate::load_turtle(DEMO_TTL).expect("demo fixture parses")
}

/// The fixture violating exactly `rule`, loaded leniently so that V7 is representable.
pub fn seeded_fault(rule: RuleId) -> AkgGraph {
    let (_, _, text) = SEEDED_FAULTS.iter().find(|(r, _, _)| *r == rule).expect("one fixture per rule");
    load_turtle_with(
        text,
        ParseOptions {
            allow_successor_cycles: true,
        },
    )
    .expect("seeded fixture parses")
}
