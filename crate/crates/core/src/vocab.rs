//! The `ppr:` vocabulary: namespaces, class and predicate IRIs, reserved attribute names.
//!
//! | Turtle term                 | Meaning                                   |
//! |-----------------------------|-------------------------------------------|
//! | `ppr:ProductClass` ...      | one class IRI per [`NodeKind`] variant    |
//! | `ppr:hasInput` ...          | one predicate IRI per [`EdgeKind`] variant|
//! | `rdfs:label`                | node label                                |
//! | `attr:<name>`               | node attribute `<name>`                   |
//! | `"v"^^ppr:member`           | one member of a text-set attribute        |
//!
//! [`NodeKind`]: crate::NodeKind
//! [`EdgeKind`]: crate::EdgeKind

pub const PPR_NS: &str = "http://ppr-akg.org/ns#";
pub const ATTR_NS: &str = "http://ppr-akg.org/attr#";
pub const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS_NS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const XSD_NS: &str = "http://www.w3.org/2001/XMLSchema#";
pub const OWL_NS: &str = "http://www.w3.org/2002/07/owl#";

pub const STANDARD_PREFIXES: [(&str, &str); 5] = [
    ("attr", ATTR_NS),
    ("ppr", PPR_NS),
    ("rdf", RDF_NS),
    ("rdfs", RDFS_NS),
    ("xsd", XSD_NS),
];

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
pub const SET_MEMBER: &str = "http://ppr-akg.org/ns#member";

/// Attribute carrying a process duration in seconds. Defaults to 1 when absent.
pub const DURATION_S: &str = "duration_s";
/// Attribute carrying the prior weight of a plausible cause. Defaults to 0.5 when absent.
pub const WEIGHT: &str = "weight";
/// Attribute on capability nodes naming the capability kind (an IRI).
pub const CAPABILITY_KIND: &str = "capability_kind";
/// Instance-level bookkeeping written by run instantiation and schedule commits.
pub const RUN_ID: &str = "run_id";
pub const STEP_INDEX: &str = "step_index";
pub const CREATED_AT: &str = "created_at";
pub const START_S: &str = "start_s";

pub const DEFAULT_DURATION_S: u64 = 1;
pub const DEFAULT_WEIGHT: f64 = 0.5;
