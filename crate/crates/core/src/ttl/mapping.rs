//! Statements to graph: kind assignment, labels, edges, attributes, kind inference.

use std::collections::{BTreeMap, BTreeSet};

use super::lexer::Lexer;
use super::parser::{Literal, Object, Parser, Statement};
use super::{GraphDelta, ParseError, ParseOptions, Pos};
use crate::attr::{AttrValue, Number};
use crate::graph::{is_valid_attr_name, AkgGraph, EdgeKind, GraphError, NodeKind};
use crate::iri::Iri;
use crate::vocab;

#[derive(Default)]
struct NodeInfo {
    kind: Option<(NodeKind, Pos)>,
    label: Option<String>,
    attrs: BTreeMap<String, (AttrValue, Pos)>,
    first_pos: Option<Pos>,
}

struct PendingEdge {
    subject: Iri,
    kind: EdgeKind,
    object: Iri,
    pos: Pos,
}

pub(super) fn parse(text: &str, options: ParseOptions) -> Result<(GraphDelta, AkgGraph), Vec<ParseError>> {
    let (tokens, mut errors) = Lexer::new(text).tokenize();
    let last_pos = tokens.last().map(|t| t.pos);
    let parser = Parser::new(text, tokens).parse();
    errors.extend(parser.errors);
    if !errors.is_empty() {
        return Err(finish(errors));
    }
    let prefixes = parser.prefixes;

    let mut m = Mapper {
        src: text,
        nodes: BTreeMap::new(),
        edges: Vec::new(),
        errors: Vec::new(),
    };
    for st in &parser.statements {
        m.statement(st);
    }
    if !m.errors.is_empty() {
        return Err(finish(m.errors));
    }
    let kinds = m.infer_kinds(last_pos.unwrap_or(Pos { line: 1, column: 1 }));
    if !m.errors.is_empty() {
        return Err(finish(m.errors));
    }

    let mut graph = if options.allow_successor_cycles {
        AkgGraph::new_lenient()
    } else {
        AkgGraph::new()
    };
    for (prefix, base) in prefixes.iter() {
        graph.prefixes_mut().insert(prefix, base).expect("checked by the parser");
    }
    for (iri, info) in &m.nodes {
        let attrs: BTreeMap<String, AttrValue> = info.attrs.iter().map(|(k, (v, _))| (k.clone(), v.clone())).collect();
        let label = info.label.clone().unwrap_or_default();
        if let Err(e) = graph.add_node(iri.clone(), kinds[iri], label, attrs) {
            let pos = match &e {
                GraphError::InvalidAttr { name, .. } => info.attrs.get(name).map(|(_, p)| *p),
                _ => None,
            };
            let pos = pos.or(info.first_pos).expect("every node has a position");
            m.errors.push(ParseError::at(text, pos, e.to_string()));
        }
    }
    if !m.errors.is_empty() {
        return Err(finish(m.errors));
    }
    for e in &m.edges {
        if let Err(err) = graph.add_edge(&e.subject, e.kind, &e.object) {
            m.errors.push(ParseError::at(text, e.pos, err.to_string()));
        }
    }
    if !m.errors.is_empty() {
        return Err(finish(m.errors));
    }

    let delta = GraphDelta {
        prefixes,
        nodes: graph.nodes().map(|(i, n)| (i.clone(), n.clone())).collect(),
        edges: m.edges.into_iter().map(|e| crate::graph::Edge::new(e.subject, e.kind, e.object)).collect(),
    };
    Ok((delta, graph))
}

fn finish(mut errors: Vec<ParseError>) -> Vec<ParseError> {
    errors.sort_by(|a, b| (a.line, a.column, &a.message).cmp(&(b.line, b.column, &b.message)));
    errors.dedup();
    errors
}

struct Mapper<'a> {
    src: &'a str,
    nodes: BTreeMap<Iri, NodeInfo>,
    edges: Vec<PendingEdge>,
    errors: Vec<ParseError>,
}

impl Mapper<'_> {
    fn error(&mut self, pos: Pos, message: impl Into<String>) {
        self.errors.push(ParseError::at(self.src, pos, message));
    }

    fn touch(&mut self, iri: &Iri, pos: Pos) -> &mut NodeInfo {
        let info = self.nodes.entry(iri.clone()).or_default();
        info.first_pos.get_or_insert(pos);
        info
    }

    fn statement(&mut self, st: &Statement) {
        self.touch(&st.subject, st.subject_pos);
        let pred = st.predicate.as_str();
        if pred == vocab::RDF_TYPE {
            self.node_type(st);
        } else if pred == vocab::RDFS_LABEL {
            let label = match &st.object {
                Object::Literal(Literal::Plain(s) | Literal::Lang(s, _)) => s.clone(),
                Object::Literal(Literal::Typed(s, dt)) if dt.as_str() == format!("{}string", vocab::XSD_NS) => s.clone(),
                _ => return self.error(st.object_pos, "literal type mismatch: rdfs:label expects a string"),
            };
            let info = self.nodes.get_mut(&st.subject).expect("touched");
            match &info.label {
                Some(existing) if *existing != label => {
                    self.error(st.object_pos, format!("<{}> has more than one label", st.subject))
                }
                _ => info.label = Some(label),
            }
        } else if let Some(kind) = EdgeKind::from_predicate_iri(pred) {
            match &st.object {
                Object::Iri(o) => {
                    self.touch(o, st.object_pos);
                    self.edges.push(PendingEdge {
                        subject: st.subject.clone(),
                        kind,
                        object: o.clone(),
                        pos: st.predicate_pos,
                    });
                }
                Object::Literal(_) => {
                    self.error(st.object_pos, format!("literal type mismatch: ppr:{kind} expects an IRI object"))
                }
            }
        } else if let Some(local) = pred.strip_prefix(vocab::PPR_NS) {
            self.error(st.predicate_pos, format!("unknown ppr term `ppr:{local}`"));
        } else {
            self.attribute(st);
        }
    }

    fn node_type(&mut self, st: &Statement) {
        let Object::Iri(class) = &st.object else {
            return self.error(st.object_pos, "rdf:type expects a class IRI");
        };
        if class.as_str().starts_with(vocab::OWL_NS) {
            return;
        }
        let Some(kind) = NodeKind::from_class_iri(class.as_str()) else {
            return self.error(st.object_pos, format!("unknown node class <{class}>"));
        };
        let info = self.nodes.get_mut(&st.subject).expect("touched");
        match info.kind {
            Some((k, _)) if k != kind => self.error(
                st.object_pos,
                format!("conflicting node kinds for <{}>: {k} and {kind}", st.subject),
            ),
            _ => info.kind = Some((kind, st.object_pos)),
        }
    }

    fn attribute(&mut self, st: &Statement) {
        let pred = st.predicate.as_str();
        let name = match pred.strip_prefix(vocab::ATTR_NS) {
            Some(local) => local.to_string(),
            None => pred.to_string(),
        };
        if !is_valid_attr_name(&name) {
            return self.error(st.predicate_pos, format!("invalid attribute name `{name}`"));
        }
        let (value, member) = match literal_value(&st.object) {
            Ok(v) => v,
            Err(msg) => return self.error(st.object_pos, msg),
        };
        let info = self.nodes.get_mut(&st.subject).expect("touched");
        match (info.attrs.get_mut(&name), member) {
            (None, false) => {
                info.attrs.insert(name, (value, st.object_pos));
            }
            (None, true) => {
                let AttrValue::Text(m) = value else { unreachable!() };
                info.attrs.insert(name, (AttrValue::Set(BTreeSet::from([m])), st.object_pos));
            }
            (Some((AttrValue::Set(set), _)), true) => {
                let AttrValue::Text(m) = value else { unreachable!() };
                set.insert(m);
            }
            (Some(_), _) => self.error(
                st.object_pos,
                format!("attribute `{name}` of <{}> has more than one value", st.subject),
            ),
        }
    }

    /// Resolves the kind of every node: explicit types win; untyped nodes are
    /// narrowed by the typing table until a fixpoint is reached.
    fn infer_kinds(&mut self, report_at: Pos) -> BTreeMap<Iri, NodeKind> {
        let all: BTreeSet<NodeKind> = NodeKind::ALL.into_iter().collect();
        let mut cand: BTreeMap<Iri, BTreeSet<NodeKind>> = self
            .nodes
            .iter()
            .map(|(i, info)| match info.kind {
                Some((k, _)) => (i.clone(), BTreeSet::from([k])),
                None => (i.clone(), all.clone()),
            })
            .collect();
        let fixed: BTreeSet<Iri> = self
            .nodes
            .iter()
            .filter(|(_, n)| n.kind.is_some())
            .map(|(i, _)| i.clone())
            .collect();
        loop {
            let mut changed = false;
            for e in &self.edges {
                // An endpoint whose kind is outside the edge's signature is reported
                // as a typing violation later; it only narrows the other end to the
                // edge's plain domain or range.
                let range = e.kind.range();
                let domain = e.kind.domain();
                if !fixed.contains(&e.subject) {
                    let objs = cand[&e.object].clone();
                    let usable = objs.iter().any(|k| range.contains(k));
                    let s = cand.get_mut(&e.subject).expect("touched");
                    let before = s.len();
                    s.retain(|sk| {
                        domain.contains(sk) && (!usable || objs.iter().any(|ok| e.kind.permits(*sk, *ok)))
                    });
                    changed |= s.len() != before;
                }
                if !fixed.contains(&e.object) {
                    let subs = cand[&e.subject].clone();
                    let usable = subs.iter().any(|k| domain.contains(k));
                    let o = cand.get_mut(&e.object).expect("touched");
                    let before = o.len();
                    o.retain(|ok| range.contains(ok) && (!usable || subs.iter().any(|sk| e.kind.permits(*sk, *ok))));
                    changed |= o.len() != before;
                }
            }
            if !changed {
                break;
            }
        }
        let mut kinds = BTreeMap::new();
        for (iri, set) in cand {
            if set.len() == 1 {
                kinds.insert(iri, *set.first().expect("len 1"));
                continue;
            }
            let first = self.nodes[&iri].first_pos.expect("positioned");
            let detail = if set.is_empty() {
                "its uses are incompatible with every node kind".to_string()
            } else {
                format!(
                    "it could be any of {}",
                    set.iter().map(|k| k.name()).collect::<Vec<_>>().join(", ")
                )
            };
            self.error(
                report_at,
                format!(
                    "cannot determine the kind of <{iri}> (first used at {}:{}); {detail}; declare it with `a ppr:<Kind>`",
                    first.line, first.column
                ),
            );
        }
        kinds
    }
}

/// Converts an object to an attribute value. The flag marks `^^ppr:member` set members.
fn literal_value(obj: &Object) -> Result<(AttrValue, bool), String> {
    let lit = match obj {
        Object::Iri(i) => return Ok((AttrValue::Ref(i.clone()), false)),
        Object::Literal(l) => l,
    };
    let number = |s: &str| {
        Number::parse(s)
            .map(AttrValue::Number)
            .map_err(|_| format!("literal type mismatch: `{s}` is not a number"))
    };
    Ok(match lit {
        Literal::Plain(s) | Literal::Lang(s, _) => (AttrValue::Text(s.clone()), false),
        Literal::Number(n) => (number(n)?, false),
        Literal::Bool(b) => (AttrValue::Bool(*b), false),
        Literal::Typed(s, dt) => {
            let dt = dt.as_str();
            if dt == vocab::SET_MEMBER {
                return Ok((AttrValue::Text(s.clone()), true));
            }
            let Some(xsd) = dt.strip_prefix(vocab::XSD_NS) else {
                return Err(format!("unsupported datatype <{dt}>"));
            };
            let digits = |t: &str| {
                let t = t.strip_prefix(['+', '-']).unwrap_or(t);
                !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit())
            };
            match xsd {
                "string" => (AttrValue::Text(s.clone()), false),
                "integer" | "int" | "long" | "nonNegativeInteger" | "positiveInteger" if digits(s) => (number(s)?, false),
                "decimal" if !s.contains(['e', 'E']) => (number(s)?, false),
                "double" | "float" => (number(s)?, false),
                "boolean" => match s.as_str() {
                    "true" | "1" => (AttrValue::Bool(true), false),
                    "false" | "0" => (AttrValue::Bool(false), false),
                    _ => return Err(format!("literal type mismatch: `{s}` is not a valid xsd:boolean")),
                },
                "integer" | "int" | "long" | "nonNegativeInteger" | "positiveInteger" | "decimal" => {
                    return Err(format!("literal type mismatch: `{s}` is not a valid xsd:{xsd}"))
                }
                _ => return Err(format!("unsupported datatype xsd:{xsd}")),
            }
        }
    })
}
