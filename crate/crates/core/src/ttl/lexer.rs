use super::{ParseError, Pos};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    IriRef(String),
    PName { prefix: String, local: String },
    PrefixDirective,
    SparqlPrefix,
    A,
    Str(String),
    LangTag(String),
    Carets,
    Number(String),
    Bool(bool),
    Dot,
    Semicolon,
    Comma,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub(crate) struct Lexer<'a> {
    src: &'a str,
    chars: Vec<char>,
    i: usize,
    line: usize,
    col: usize,
    pub errors: Vec<ParseError>,
}

fn is_name_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.')
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str) -> Self {
        Lexer {
            src,
            chars: src.chars().collect(),
            i: 0,
            line: 1,
            col: 1,
            errors: Vec::new(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).copied()
    }

    fn peek_at(&self, k: usize) -> Option<char> {
        self.chars.get(self.i + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.i).copied()?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            column: self.col,
        }
    }

    fn error(&mut self, pos: Pos, message: impl Into<String>) {
        self.errors.push(ParseError::at(self.src, pos, message));
    }

    /// Skips to the next whitespace so lexing can resume after an error.
    fn recover(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                break;
            }
            self.bump();
        }
    }

    pub fn tokenize(mut self) -> (Vec<Token>, Vec<ParseError>) {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let pos = self.pos();
            let Some(c) = self.peek() else { break };
            let tok = match c {
                '<' => self.iri_ref(pos),
                '"' | '\'' => self.string(pos, c),
                '.' if !self.peek_at(1).is_some_and(|d| d.is_ascii_digit()) => {
                    self.bump();
                    Some(Tok::Dot)
                }
                ';' => {
                    self.bump();
                    Some(Tok::Semicolon)
                }
                ',' => {
                    self.bump();
                    Some(Tok::Comma)
                }
                '^' if self.peek_at(1) == Some('^') => {
                    self.bump();
                    self.bump();
                    Some(Tok::Carets)
                }
                '@' => self.at_word(pos),
                c if c.is_ascii_digit() || c == '.' || c == '+' || c == '-' => self.number(pos),
                ':' => self.pname(pos, String::new()),
                c if is_name_start(c) => self.word(pos),
                '[' | ']' => {
                    self.bump();
                    self.error(pos, "blank nodes are not supported");
                    None
                }
                '(' | ')' => {
                    self.bump();
                    self.error(pos, "collections are not supported");
                    None
                }
                other => {
                    self.error(pos, format!("unexpected character `{other}`"));
                    self.bump();
                    self.recover();
                    None
                }
            };
            if let Some(tok) = tok {
                let is_str = matches!(tok, Tok::Str(_));
                out.push(Token { tok, pos });
                if is_str {
                    out.extend(self.lang_tag());
                }
            }
        }
        (out, self.errors)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn iri_ref(&mut self, pos: Pos) -> Option<Tok> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.peek() {
                Some('>') => {
                    self.bump();
                    return Some(Tok::IriRef(s));
                }
                Some(c) if c.is_whitespace() || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') => {
                    self.error(pos, "unterminated or malformed IRI reference");
                    self.recover();
                    return None;
                }
                Some(c) => {
                    s.push(c);
                    self.bump();
                }
                None => {
                    self.error(pos, "unterminated IRI reference");
                    return None;
                }
            }
        }
    }

    fn string(&mut self, pos: Pos, quote: char) -> Option<Tok> {
        let long = self.peek_at(1) == Some(quote) && self.peek_at(2) == Some(quote);
        if long {
            self.bump();
            self.bump();
        }
        self.bump();
        let mut s = String::new();
        loop {
            let Some(c) = self.peek() else {
                self.error(pos, "unterminated string literal");
                return None;
            };
            if long {
                if c == quote && self.peek_at(1) == Some(quote) && self.peek_at(2) == Some(quote) {
                    self.bump();
                    self.bump();
                    self.bump();
                    break;
                }
            } else if c == quote {
                self.bump();
                break;
            } else if c == '\n' || c == '\r' {
                self.error(pos, "unterminated string literal");
                return None;
            }
            if c == '\\' {
                let esc_pos = self.pos();
                self.bump();
                match self.escape() {
                    Some(e) => s.push(e),
                    None => {
                        self.error(esc_pos, "invalid escape sequence");
                        self.recover();
                        return None;
                    }
                }
            } else {
                s.push(c);
                self.bump();
            }
        }
        Some(Tok::Str(s))
    }

    /// A language tag directly attached to the preceding string literal.
    fn lang_tag(&mut self) -> Option<Token> {
        if self.peek() != Some('@') {
            return None;
        }
        let pos = self.pos();
        self.bump();
        let mut tag = String::new();
        while let Some(c) = self.peek().filter(|c| c.is_ascii_alphanumeric() || *c == '-') {
            tag.push(c);
            self.bump();
        }
        if tag.is_empty() {
            self.error(pos, "empty language tag");
            return None;
        }
        Some(Token {
            tok: Tok::LangTag(tag),
            pos,
        })
    }

    fn escape(&mut self) -> Option<char> {
        let c = self.bump()?;
        Some(match c {
            't' => '\t',
            'b' => '\u{8}',
            'n' => '\n',
            'r' => '\r',
            'f' => '\u{c}',
            '"' => '"',
            '\'' => '\'',
            '\\' => '\\',
            'u' | 'U' => {
                let n = if c == 'u' { 4 } else { 8 };
                let mut v = 0u32;
                for _ in 0..n {
                    v = v * 16 + self.bump()?.to_digit(16)?;
                }
                char::from_u32(v)?
            }
            _ => return None,
        })
    }

    fn at_word(&mut self, pos: Pos) -> Option<Tok> {
        self.bump();
        let mut w = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphabetic() {
                w.push(c);
                self.bump();
            } else {
                break;
            }
        }
        match w.as_str() {
            "prefix" => Some(Tok::PrefixDirective),
            "base" => {
                self.error(pos, "@base is not supported");
                None
            }
            _ => {
                self.error(pos, format!("unknown directive `@{w}`"));
                self.recover();
                None
            }
        }
    }

    fn number(&mut self, pos: Pos) -> Option<Tok> {
        let mut s = String::new();
        if let Some(c @ ('+' | '-')) = self.peek() {
            s.push(c);
            self.bump();
        }
        let mut digits = 0;
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            s.push(c);
            self.bump();
            digits += 1;
        }
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            s.push('.');
            self.bump();
            while let Some(c) = self.peek().filter(char::is_ascii_digit) {
                s.push(c);
                self.bump();
                digits += 1;
            }
        }
        if digits == 0 {
            self.error(pos, "malformed numeric literal");
            self.recover();
            return None;
        }
        if let Some(e @ ('e' | 'E')) = self.peek() {
            s.push(e);
            self.bump();
            if let Some(c @ ('+' | '-')) = self.peek() {
                s.push(c);
                self.bump();
            }
            let mut exp = 0;
            while let Some(c) = self.peek().filter(char::is_ascii_digit) {
                s.push(c);
                self.bump();
                exp += 1;
            }
            if exp == 0 {
                self.error(pos, "malformed numeric exponent");
                self.recover();
                return None;
            }
        }
        if self.peek().is_some_and(|c| is_name_start(c) || c.is_ascii_digit()) {
            self.error(pos, "malformed numeric literal");
            self.recover();
            return None;
        }
        Some(Tok::Number(s))
    }

    fn read_name(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek().filter(|c| is_name_char(*c)) {
            // a trailing '.' terminates the statement instead
            if c == '.' && !self.peek_at(1).is_some_and(|d| is_name_char(d) && d != '.') {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    fn word(&mut self, pos: Pos) -> Option<Tok> {
        let w = self.read_name();
        if self.peek() == Some(':') {
            return self.pname(pos, w);
        }
        match w.as_str() {
            "a" => Some(Tok::A),
            "true" => Some(Tok::Bool(true)),
            "false" => Some(Tok::Bool(false)),
            _ if w.eq_ignore_ascii_case("prefix") => Some(Tok::SparqlPrefix),
            _ if w.eq_ignore_ascii_case("base") => {
                self.error(pos, "BASE is not supported");
                None
            }
            _ => {
                self.error(pos, format!("unexpected word `{w}`"));
                self.recover();
                None
            }
        }
    }

    fn pname(&mut self, pos: Pos, prefix: String) -> Option<Tok> {
        self.bump(); // ':'
        if prefix.ends_with('.') || prefix.starts_with(|c: char| c == '_' || c.is_ascii_digit()) {
            self.error(pos, format!("invalid prefix name `{prefix}`"));
            self.recover();
            return None;
        }
        let local = if self.peek().is_some_and(|c| is_name_char(c) && c != '.' || c == ':') {
            let mut l = String::new();
            while self.peek() == Some(':') {
                l.push(':');
                self.bump();
            }
            l.push_str(&self.read_name());
            l
        } else {
            String::new()
        };
        Some(Tok::PName { prefix, local })
    }
}
