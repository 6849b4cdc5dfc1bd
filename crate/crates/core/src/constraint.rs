//! Attribute constraints carried by required capabilities.
//!
//! A required-capability node stores each constraint as an attribute named
//! `<attribute>__<op>`, e.g. `torque_nm__ge 12` or
//! `tool__in "hex"^^ppr:member, "torx"^^ppr:member`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attr::AttrValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    In,
}

impl ConstraintOp {
    pub const ALL: [ConstraintOp; 7] = [
        ConstraintOp::Eq,
        ConstraintOp::Ne,
        ConstraintOp::Lt,
        ConstraintOp::Le,
        ConstraintOp::Gt,
        ConstraintOp::Ge,
        ConstraintOp::In,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConstraintOp::Eq => "eq",
            ConstraintOp::Ne => "ne",
            ConstraintOp::Lt => "lt",
            ConstraintOp::Le => "le",
            ConstraintOp::Gt => "gt",
            ConstraintOp::Ge => "ge",
            ConstraintOp::In => "in",
        }
    }

    pub fn is_ordering(self) -> bool {
        matches!(self, ConstraintOp::Lt | ConstraintOp::Le | ConstraintOp::Gt | ConstraintOp::Ge)
    }
}

impl FromStr for ConstraintOp {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        ConstraintOp::ALL.into_iter().find(|o| o.name() == s).ok_or(())
    }
}

impl fmt::Display for ConstraintOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub attribute: String,
    pub op: ConstraintOp,
    pub value: AttrValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstraintError {
    #[error("attribute name carries no constraint operator")]
    NotAConstraint,
    #[error("operator `{0}` requires a set value")]
    InNeedsSet(ConstraintOp),
    #[error("operator `{0}` requires a numeric value")]
    OrderingNeedsNumber(ConstraintOp),
}

/// An ordering operator met a stored attribute that is not a number.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("constraint `{attribute} {op} {expected}` cannot compare against stored {found} value")]
pub struct TypeMismatch {
    pub attribute: String,
    pub op: ConstraintOp,
    pub expected: AttrValue,
    pub found: &'static str,
}

impl Constraint {
    pub fn new(attribute: impl Into<String>, op: ConstraintOp, value: AttrValue) -> Result<Self, ConstraintError> {
        match op {
            ConstraintOp::In if !matches!(value, AttrValue::Set(_)) => return Err(ConstraintError::InNeedsSet(op)),
            o if o.is_ordering() && value.as_number().is_none() => return Err(ConstraintError::OrderingNeedsNumber(op)),
            _ => {}
        }
        Ok(Constraint {
            attribute: attribute.into(),
            op,
            value,
        })
    }

    /// Reads a constraint from an attribute entry `<attribute>__<op>`.
    pub fn from_attr(name: &str, value: &AttrValue) -> Result<Self, ConstraintError> {
        let (attribute, op) = name.rsplit_once("__").ok_or(ConstraintError::NotAConstraint)?;
        let op = ConstraintOp::from_str(op).map_err(|_| ConstraintError::NotAConstraint)?;
        if attribute.is_empty() {
            return Err(ConstraintError::NotAConstraint);
        }
        Constraint::new(attribute, op, value.clone())
    }

    pub fn attr_name(&self) -> String {
        format!("{}__{}", self.attribute, self.op)
    }

    /// Evaluates against a provided-capability attribute map.
    ///
    /// A missing attribute leaves every operator unsatisfied. Numbers compare
    /// by value. `in` holds for a stored text that is a member of the set, or
    /// a stored set that is a subset of it.
    pub fn evaluate(&self, attrs: &BTreeMap<String, AttrValue>) -> Result<bool, TypeMismatch> {
        let Some(stored) = attrs.get(&self.attribute) else {
            return Ok(false);
        };
        Ok(match self.op {
            ConstraintOp::Eq => values_equal(stored, &self.value),
            ConstraintOp::Ne => !values_equal(stored, &self.value),
            ConstraintOp::In => match (stored, &self.value) {
                (AttrValue::Text(t), AttrValue::Set(allowed)) => allowed.contains(t),
                (AttrValue::Set(s), AttrValue::Set(allowed)) => s.is_subset(allowed),
                _ => false,
            },
            op => {
                let Some(stored_n) = stored.as_number() else {
                    return Err(TypeMismatch {
                        attribute: self.attribute.clone(),
                        op,
                        expected: self.value.clone(),
                        found: stored.type_name(),
                    });
                };
                let bound = self.value.as_number().expect("ordering constraint holds a number");
                let ord = stored_n.value().partial_cmp(&bound.value()).expect("finite numbers");
                match op {
                    ConstraintOp::Lt => ord == Ordering::Less,
                    ConstraintOp::Le => ord != Ordering::Greater,
                    ConstraintOp::Gt => ord == Ordering::Greater,
                    ConstraintOp::Ge => ord != Ordering::Less,
                    _ => unreachable!(),
                }
            }
        })
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.attribute, self.op, self.value)
    }
}

fn values_equal(a: &AttrValue, b: &AttrValue) -> bool {
    match (a, b) {
        (AttrValue::Number(x), AttrValue::Number(y)) => x.value() == y.value(),
        _ => a == b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn attrs(pairs: &[(&str, AttrValue)]) -> BTreeMap<String, AttrValue> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn parse_from_attr_names() {
        let c = Constraint::from_attr("torque_nm__ge", &AttrValue::int(12)).unwrap();
        assert_eq!(c.attribute, "torque_nm");
        assert_eq!(c.op, ConstraintOp::Ge);
        assert_eq!(c.attr_name(), "torque_nm__ge");
        assert_eq!(Constraint::from_attr("torque_nm", &AttrValue::int(1)), Err(ConstraintError::NotAConstraint));
        assert_eq!(Constraint::from_attr("x__foo", &AttrValue::int(1)), Err(ConstraintError::NotAConstraint));
        assert_eq!(Constraint::from_attr("__ge", &AttrValue::int(1)), Err(ConstraintError::NotAConstraint));
        assert!(matches!(
            Constraint::from_attr("x__lt", &AttrValue::text("a")),
            Err(ConstraintError::OrderingNeedsNumber(_))
        ));
        assert!(matches!(
            Constraint::from_attr("x__in", &AttrValue::int(1)),
            Err(ConstraintError::InNeedsSet(_))
        ));
    }

    #[test]
    fn ordering_ops() {
        let a = attrs(&[("t", AttrValue::int(10))]);
        let check = |op, v| Constraint::new("t", op, AttrValue::int(v)).unwrap().evaluate(&a).unwrap();
        assert!(!check(ConstraintOp::Ge, 12));
        assert!(check(ConstraintOp::Ge, 10));
        assert!(!check(ConstraintOp::Gt, 10));
        assert!(check(ConstraintOp::Le, 10));
        assert!(check(ConstraintOp::Lt, 11));
        assert!(!check(ConstraintOp::Lt, 10));
    }

    #[test]
    fn numeric_equality_ignores_lexical_form() {
        let a = attrs(&[("t", AttrValue::Number(crate::attr::Number::parse("12.0").unwrap()))]);
        assert!(Constraint::new("t", ConstraintOp::Eq, AttrValue::int(12)).unwrap().evaluate(&a).unwrap());
        assert!(!Constraint::new("t", ConstraintOp::Ne, AttrValue::int(12)).unwrap().evaluate(&a).unwrap());
    }

    #[test]
    fn missing_attribute_is_unsatisfied_for_every_op() {
        let a = attrs(&[]);
        for op in ConstraintOp::ALL {
            let v = if op == ConstraintOp::In { AttrValue::set(["x"]) } else { AttrValue::int(1) };
            assert!(!Constraint::new("t", op, v).unwrap().evaluate(&a).unwrap());
        }
    }

    #[test]
    fn membership() {
        let c = Constraint::new("tool", ConstraintOp::In, AttrValue::set(["hex", "torx"])).unwrap();
        assert!(c.evaluate(&attrs(&[("tool", AttrValue::text("hex"))])).unwrap());
        assert!(!c.evaluate(&attrs(&[("tool", AttrValue::text("flat"))])).unwrap());
        assert!(c.evaluate(&attrs(&[("tool", AttrValue::set(["torx"]))])).unwrap());
        assert!(!c.evaluate(&attrs(&[("tool", AttrValue::set(["torx", "flat"]))])).unwrap());
        assert!(!c.evaluate(&attrs(&[("tool", AttrValue::int(3))])).unwrap());
    }

    #[test]
    fn ordering_against_text_is_type_mismatch() {
        let c = Constraint::new("t", ConstraintOp::Ge, AttrValue::int(1)).unwrap();
        let err = c.evaluate(&attrs(&[("t", AttrValue::text("high"))])).unwrap_err();
        assert_eq!(err.found, "text");
    }
}
