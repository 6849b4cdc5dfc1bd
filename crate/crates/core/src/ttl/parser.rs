//! Token stream to expanded statements.

use super::lexer::{Tok, Token};
use super::{ParseError, Pos};
use crate::iri::{Iri, IriError, PrefixTable};
use crate::vocab;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Literal {
    Plain(String),
    Lang(String, String),
    Typed(String, Iri),
    Number(String),
    Bool(bool),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Object {
    Iri(Iri),
    Literal(Literal),
}

#[derive(Debug, Clone)]
pub(crate) struct Statement {
    pub subject: Iri,
    pub subject_pos: Pos,
    pub predicate: Iri,
    pub predicate_pos: Pos,
    pub object: Object,
    pub object_pos: Pos,
}

pub(crate) struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    i: usize,
    pub prefixes: PrefixTable,
    pub statements: Vec<Statement>,
    pub errors: Vec<ParseError>,
}

type Step<T> = Result<T, ()>;

impl<'a> Parser<'a> {
    pub fn new(src: &'a str, tokens: Vec<Token>) -> Self {
        Parser {
            src,
            tokens,
            i: 0,
            prefixes: PrefixTable::standard(),
            statements: Vec::new(),
            errors: Vec::new(),
        }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.i)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.i).cloned();
        self.i += 1;
        t
    }

    fn end_pos(&self) -> Pos {
        let line = self.src.lines().count().max(1);
        let column = self.src.lines().last().map_or(0, |l| l.chars().count()) + 1;
        Pos { line, column }
    }

    fn fail<T>(&mut self, pos: Pos, message: impl Into<String>) -> Step<T> {
        self.errors.push(ParseError::at(self.src, pos, message));
        Err(())
    }

    fn fail_here<T>(&mut self, what: &str) -> Step<T> {
        match self.peek().cloned() {
            Some(t) => self.fail(t.pos, format!("expected {what}, found {}", describe(&t.tok))),
            None => {
                let pos = self.end_pos();
                self.fail(pos, format!("expected {what}, found end of input"))
            }
        }
    }

    /// Skips past the next `.` to resume after a syntax error.
    fn synchronize(&mut self) {
        while let Some(t) = self.next() {
            if t.tok == Tok::Dot {
                break;
            }
        }
    }

    pub fn parse(mut self) -> Self {
        while self.peek().is_some() {
            let r = match self.peek().map(|t| &t.tok) {
                Some(Tok::PrefixDirective) => self.prefix_directive(true),
                Some(Tok::SparqlPrefix) => self.prefix_directive(false),
                _ => self.triples(),
            };
            if r.is_err() {
                self.synchronize();
            }
        }
        self
    }

    fn prefix_directive(&mut self, turtle_style: bool) -> Step<()> {
        let kw = self.next().expect("peeked");
        let (prefix, pos) = match self.next() {
            Some(Token {
                tok: Tok::PName { prefix, local },
                pos,
            }) if local.is_empty() => (prefix, pos),
            _ => {
                self.i -= 1;
                return self.fail_here("prefix name such as `ex:`");
            }
        };
        let base = match self.next() {
            Some(Token { tok: Tok::IriRef(b), .. }) => b,
            _ => {
                self.i -= 1;
                return self.fail_here("IRI reference");
            }
        };
        if let Err(e) = Iri::new(base.clone()) {
            return self.fail(pos, e.to_string());
        }
        if let Err(e) = self.prefixes.insert(&prefix, &base) {
            return self.fail(pos, e.to_string());
        }
        if turtle_style {
            match self.peek() {
                Some(Token { tok: Tok::Dot, .. }) => {
                    self.next();
                }
                _ => return self.fail_here("`.` after @prefix directive"),
            }
        }
        let _ = kw;
        Ok(())
    }

    fn iri_term(&mut self, what: &str) -> Step<(Iri, Pos)> {
        match self.peek().cloned() {
            Some(Token { tok: Tok::IriRef(s), pos }) => {
                self.next();
                match Iri::new(s) {
                    Ok(i) => Ok((i, pos)),
                    Err(e) => self.fail(pos, e.to_string()),
                }
            }
            Some(Token {
                tok: Tok::PName { prefix, local },
                pos,
            }) => {
                self.next();
                match self.prefixes.expand(&prefix, &local) {
                    Ok(i) => Ok((i, pos)),
                    Err(IriError::UndeclaredPrefix(p)) => self.fail(pos, format!("undeclared prefix `{p}:`")),
                    Err(e) => self.fail(pos, e.to_string()),
                }
            }
            _ => self.fail_here(what),
        }
    }

    fn triples(&mut self) -> Step<()> {
        let (subject, subject_pos) = self.iri_term("subject IRI")?;
        loop {
            let (predicate, predicate_pos) = match self.peek().cloned() {
                Some(Token { tok: Tok::A, pos }) => {
                    self.next();
                    (Iri::new(vocab::RDF_TYPE).expect("constant"), pos)
                }
                _ => self.iri_term("predicate")?,
            };
            loop {
                let (object, object_pos) = self.object()?;
                self.statements.push(Statement {
                    subject: subject.clone(),
                    subject_pos,
                    predicate: predicate.clone(),
                    predicate_pos,
                    object,
                    object_pos,
                });
                if matches!(self.peek(), Some(Token { tok: Tok::Comma, .. })) {
                    self.next();
                } else {
                    break;
                }
            }
            let mut saw_semicolon = false;
            while matches!(self.peek(), Some(Token { tok: Tok::Semicolon, .. })) {
                self.next();
                saw_semicolon = true;
            }
            match self.peek().map(|t| &t.tok) {
                Some(Tok::Dot) => {
                    self.next();
                    return Ok(());
                }
                _ if saw_semicolon => continue,
                _ => return self.fail_here("`;`, `,` or `.`"),
            }
        }
    }

    fn object(&mut self) -> Step<(Object, Pos)> {
        let Some(t) = self.peek().cloned() else {
            return self.fail_here("object");
        };
        let lit = match t.tok {
            Tok::IriRef(_) | Tok::PName { .. } => {
                let (i, pos) = self.iri_term("object")?;
                return Ok((Object::Iri(i), pos));
            }
            Tok::Number(n) => {
                self.next();
                Literal::Number(n)
            }
            Tok::Bool(b) => {
                self.next();
                Literal::Bool(b)
            }
            Tok::Str(s) => {
                self.next();
                match self.peek().map(|t| t.tok.clone()) {
                    Some(Tok::LangTag(tag)) => {
                        self.next();
                        Literal::Lang(s, tag)
                    }
                    Some(Tok::Carets) => {
                        self.next();
                        let (dt, _) = self.iri_term("datatype IRI")?;
                        Literal::Typed(s, dt)
                    }
                    _ => Literal::Plain(s),
                }
            }
            _ => return self.fail_here("object"),
        };
        Ok((Object::Literal(lit), t.pos))
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::IriRef(s) => format!("<{s}>"),
        Tok::PName { prefix, local } => format!("`{prefix}:{local}`"),
        Tok::PrefixDirective => "`@prefix`".into(),
        Tok::SparqlPrefix => "`PREFIX`".into(),
        Tok::A => "`a`".into(),
        Tok::Str(_) => "string literal".into(),
        Tok::LangTag(t) => format!("language tag `@{t}`"),
        Tok::Carets => "`^^`".into(),
        Tok::Number(n) => format!("number `{n}`"),
        Tok::Bool(b) => format!("`{b}`"),
        Tok::Dot => "`.`".into(),
        Tok::Semicolon => "`;`".into(),
        Tok::Comma => "`,`".into(),
    }
}
