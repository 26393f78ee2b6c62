//! The line-oriented triple text format and the pattern syntax that shares
//! its grammar.
//!
//! Statements are `S P O .` with IRIs in angle brackets or as prefixed names,
//! literals as `"lex"` or `"lex"^^datatype`, and `#` comments. Both
//! `@prefix p: <iri> .` and `PREFIX p: <iri>` declare prefixes. Pattern text
//! additionally admits `?name` variables. The canonical serialization uses
//! expanded IRIs only, one statement per line, in sorted order.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use super::pattern::{GraphPattern, PatternTerm, TriplePattern, Variable};
use super::store::KnowledgeBase;
use super::term::{Datatype, Iri, Literal, Term, Triple};

/// Prefix name to namespace IRI.
pub type Prefixes = BTreeMap<String, String>;

pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
pub const DC: &str = "http://purl.org/dc/elements/1.1/";

/// `rdf:`, `rdfs:`, `xsd:` and `dc:`.
pub fn well_known_prefixes() -> Prefixes {
    [("rdf", RDF), ("rdfs", RDFS), ("xsd", XSD), ("dc", DC)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown prefix `{0}:`")]
    UnknownPrefix(String),
    #[error("malformed IRI `{0}`")]
    InvalidIri(String),
    #[error("malformed literal: {0}")]
    InvalidLiteral(String),
    #[error("variable `?{0}` not allowed in ground data")]
    VariableNotAllowed(String),
    #[error("literal in {0} position")]
    LiteralPosition(&'static str),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    IriRef(String),
    PName(String, String),
    Literal(String, Option<Box<Tok>>),
    Var(String),
    Word(String),
    AtPrefix,
    Dot,
}

struct Lexer<'a> {
    chars: core::iter::Peekable<core::str::Chars<'a>>,
    pos: Pos,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            pos: Pos { line: 1, column: 1 },
        }
    }

    fn err(&self, at: Pos, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: at.line,
            column: at.column,
            kind,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, Pos)>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let start = self.pos;
            let Some(&c) = self.chars.peek() else {
                return Ok(out);
            };
            match c {
                '<' => {
                    let iri = self.iri_ref(start)?;
                    out.push((Tok::IriRef(iri), start));
                }
                '"' => {
                    let lexical = self.quoted(start)?;
                    let mut trailing_dots = 0;
                    let datatype = match self.chars.peek() {
                        Some('^') => {
                            self.bump();
                            if self.bump() != Some('^') {
                                return Err(self.err(start, ParseErrorKind::Syntax("expected `^^`".into())));
                            }
                            let dt_pos = self.pos;
                            let dt = if self.chars.peek() == Some(&'<') {
                                Tok::IriRef(self.iri_ref(dt_pos)?)
                            } else {
                                let (word, dots) = self.word();
                                trailing_dots = dots;
                                classify_word(word)
                            };
                            Some(Box::new(dt))
                        }
                        Some('@') => {
                            return Err(self.err(
                                self.pos,
                                ParseErrorKind::InvalidLiteral("language tags are not supported".into()),
                            ));
                        }
                        _ => None,
                    };
                    out.push((Tok::Literal(lexical, datatype), start));
                    for _ in 0..trailing_dots {
                        out.push((Tok::Dot, self.pos));
                    }
                }
                '?' => {
                    self.bump();
                    let (name, dots) = self.word();
                    if name.is_empty() {
                        return Err(self.err(start, ParseErrorKind::Syntax("empty variable name".into())));
                    }
                    out.push((Tok::Var(name), start));
                    for _ in 0..dots {
                        out.push((Tok::Dot, self.pos));
                    }
                }
                '.' => {
                    self.bump();
                    out.push((Tok::Dot, start));
                }
                '@' => {
                    self.bump();
                    let (word, _) = self.word();
                    if word == "prefix" {
                        out.push((Tok::AtPrefix, start));
                    } else {
                        return Err(self.err(start, ParseErrorKind::Syntax(alloc::format!("unknown directive `@{word}`"))));
                    }
                }
                _ => {
                    let (word, dots) = self.word();
                    if word.is_empty() {
                        self.bump();
                        return Err(self.err(start, ParseErrorKind::Syntax(alloc::format!("unexpected character `{c}`"))));
                    }
                    out.push((classify_word(word), start));
                    for _ in 0..dots {
                        out.push((Tok::Dot, self.pos));
                    }
                }
            }
        }
    }

    fn iri_ref(&mut self, start: Pos) -> Result<String, ParseError> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                Some('>') => return Ok(s),
                Some(c) if c == '\n' || c == '<' => {
                    return Err(self.err(start, ParseErrorKind::InvalidIri(s)));
                }
                Some(c) => s.push(c),
                None => return Err(self.err(start, ParseErrorKind::Syntax("unterminated IRI".into()))),
            }
        }
    }

    fn quoted(&mut self, start: Pos) -> Result<String, ParseError> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                Some('"') => return Ok(s),
                Some('\\') => {
                    let esc_pos = self.pos;
                    match self.bump() {
                        Some('"') => s.push('"'),
                        Some('\\') => s.push('\\'),
                        Some('n') => s.push('\n'),
                        Some('r') => s.push('\r'),
                        Some('t') => s.push('\t'),
                        Some('u') => {
                            let mut code = 0u32;
                            for _ in 0..4 {
                                let d = self.bump().and_then(|c| c.to_digit(16)).ok_or_else(|| {
                                    self.err(esc_pos, ParseErrorKind::InvalidLiteral("bad \\u escape".into()))
                                })?;
                                code = code * 16 + d;
                            }
                            let c = char::from_u32(code).ok_or_else(|| {
                                self.err(esc_pos, ParseErrorKind::InvalidLiteral("bad \\u escape".into()))
                            })?;
                            s.push(c);
                        }
                        _ => {
                            return Err(self.err(esc_pos, ParseErrorKind::InvalidLiteral("unknown escape".into())))
                        }
                    }
                }
                Some('\n') | None => {
                    return Err(self.err(start, ParseErrorKind::Syntax("unterminated string".into())))
                }
                Some(c) => s.push(c),
            }
        }
    }

    /// A bare word up to whitespace or a delimiter. Trailing dots are split
    /// off and counted, so `sp:Foo.` lexes as a name followed by a dot.
    fn word(&mut self) -> (String, usize) {
        let mut s = String::new();
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() || matches!(c, '<' | '>' | '"' | '#' | '?' | '^') {
                break;
            }
            s.push(c);
            self.bump();
        }
        let mut dots = 0;
        while s.ends_with('.') {
            s.pop();
            dots += 1;
        }
        (s, dots)
    }
}

fn classify_word(word: String) -> Tok {
    if word.eq_ignore_ascii_case("prefix") {
        return Tok::Word("PREFIX".into());
    }
    match word.split_once(':') {
        Some((p, l)) => Tok::PName(p.to_string(), l.to_string()),
        None => Tok::Word(word),
    }
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    prefixes: Prefixes,
    allow_vars: bool,
    end: Pos,
}

type RawStatement = (PatternTerm, PatternTerm, PatternTerm, Pos);

impl Parser {
    fn error(&self, at: Pos, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: at.line,
            column: at.column,
            kind,
        }
    }

    fn next(&mut self) -> Option<(Tok, Pos)> {
        let t = self.toks.get(self.i).cloned();
        self.i += 1;
        t
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(t, _)| t)
    }

    fn expect_dot(&mut self) -> Result<(), ParseError> {
        match self.next() {
            Some((Tok::Dot, _)) => Ok(()),
            Some((_, p)) => Err(self.error(p, ParseErrorKind::Syntax("expected `.`".into()))),
            None => Err(self.error(self.end, ParseErrorKind::Syntax("expected `.` at end of input".into()))),
        }
    }

    fn statements(mut self) -> Result<Vec<RawStatement>, ParseError> {
        let mut out = Vec::new();
        while let Some((tok, pos)) = self.next() {
            match tok {
                Tok::AtPrefix => {
                    self.prefix_decl(pos)?;
                    self.expect_dot()?;
                }
                Tok::Word(ref w) if w == "PREFIX" => {
                    self.prefix_decl(pos)?;
                    if self.peek() == Some(&Tok::Dot) {
                        self.i += 1;
                    }
                }
                other => {
                    let s = self.term(other, pos)?;
                    let (pt, ppos) = self.next().ok_or_else(|| {
                        self.error(self.end, ParseErrorKind::Syntax("incomplete statement".into()))
                    })?;
                    let p = self.term(pt, ppos)?;
                    let (ot, opos) = self.next().ok_or_else(|| {
                        self.error(self.end, ParseErrorKind::Syntax("incomplete statement".into()))
                    })?;
                    let o = self.term(ot, opos)?;
                    if matches!(s, PatternTerm::Literal(_)) {
                        return Err(self.error(pos, ParseErrorKind::LiteralPosition("subject")));
                    }
                    if matches!(p, PatternTerm::Literal(_)) {
                        return Err(self.error(ppos, ParseErrorKind::LiteralPosition("predicate")));
                    }
                    self.expect_dot()?;
                    out.push((s, p, o, pos));
                }
            }
        }
        Ok(out)
    }

    fn prefix_decl(&mut self, at: Pos) -> Result<(), ParseError> {
        let name = match self.next() {
            Some((Tok::PName(p, l), _)) if l.is_empty() => p,
            Some((_, p)) => return Err(self.error(p, ParseErrorKind::Syntax("expected `name:` in prefix declaration".into()))),
            None => return Err(self.error(at, ParseErrorKind::Syntax("incomplete prefix declaration".into()))),
        };
        let iri = match self.next() {
            Some((Tok::IriRef(iri), p)) => {
                Iri::new(&iri).map_err(|_| self.error(p, ParseErrorKind::InvalidIri(iri.clone())))?;
                iri
            }
            Some((_, p)) => return Err(self.error(p, ParseErrorKind::Syntax("expected `<iri>` in prefix declaration".into()))),
            None => return Err(self.error(at, ParseErrorKind::Syntax("incomplete prefix declaration".into()))),
        };
        self.prefixes.insert(name, iri);
        Ok(())
    }

    fn expand(&self, prefix: &str, local: &str, at: Pos) -> Result<Iri, ParseError> {
        let ns = self
            .prefixes
            .get(prefix)
            .ok_or_else(|| self.error(at, ParseErrorKind::UnknownPrefix(prefix.to_string())))?;
        let full = alloc::format!("{ns}{local}");
        Iri::new(&full).map_err(|_| self.error(at, ParseErrorKind::InvalidIri(full)))
    }

    fn term(&self, tok: Tok, at: Pos) -> Result<PatternTerm, ParseError> {
        match tok {
            Tok::IriRef(s) => Iri::new(&s)
                .map(PatternTerm::Iri)
                .map_err(|_| self.error(at, ParseErrorKind::InvalidIri(s))),
            Tok::PName(p, l) => self.expand(&p, &l, at).map(PatternTerm::Iri),
            Tok::Var(name) => {
                if !self.allow_vars {
                    return Err(self.error(at, ParseErrorKind::VariableNotAllowed(name)));
                }
                Variable::new(&name)
                    .map(PatternTerm::Var)
                    .map_err(|_| self.error(at, ParseErrorKind::Syntax(alloc::format!("invalid variable name `{name}`"))))
            }
            Tok::Literal(lexical, dt) => {
                let datatype = match dt.as_deref() {
                    None => Datatype::String,
                    Some(Tok::Word(w)) => Datatype::from_name(w).ok_or_else(|| {
                        self.error(at, ParseErrorKind::InvalidLiteral(alloc::format!("unsupported datatype `{w}`")))
                    })?,
                    Some(Tok::IriRef(i)) => xsd_datatype(i).ok_or_else(|| {
                        self.error(at, ParseErrorKind::InvalidLiteral(alloc::format!("unsupported datatype <{i}>")))
                    })?,
                    Some(Tok::PName(p, l)) => {
                        let iri = self.expand(p, l, at)?;
                        xsd_datatype(iri.as_str()).ok_or_else(|| {
                            self.error(at, ParseErrorKind::InvalidLiteral(alloc::format!("unsupported datatype {iri}")))
                        })?
                    }
                    Some(_) => {
                        return Err(self.error(at, ParseErrorKind::InvalidLiteral("bad datatype".into())))
                    }
                };
                Literal::new(&lexical, datatype)
                    .map(PatternTerm::Literal)
                    .map_err(|e| self.error(at, ParseErrorKind::InvalidLiteral(e.to_string())))
            }
            Tok::Dot => Err(self.error(at, ParseErrorKind::Syntax("unexpected `.`".into()))),
            Tok::AtPrefix => Err(self.error(at, ParseErrorKind::Syntax("unexpected `@prefix`".into()))),
            Tok::Word(w) => Err(self.error(at, ParseErrorKind::Syntax(alloc::format!("unexpected word `{w}`")))),
        }
    }
}

fn xsd_datatype(iri: &str) -> Option<Datatype> {
    iri.strip_prefix(XSD).and_then(Datatype::from_name)
}

fn parse_raw(text: &str, prefixes: &Prefixes, allow_vars: bool) -> Result<Vec<RawStatement>, ParseError> {
    let toks = Lexer::new(text).tokens()?;
    let end = {
        let lines = text.split('\n').count();
        let last = text.rsplit('\n').next().unwrap_or("");
        Pos {
            line: lines.max(1),
            column: last.chars().count() + 1,
        }
    };
    Parser {
        toks,
        i: 0,
        prefixes: prefixes.clone(),
        allow_vars,
        end,
    }
    .statements()
}

/// Parses ground triples in document order, duplicates preserved.
pub fn parse_document(text: &str, prefixes: &Prefixes) -> Result<Vec<Triple>, ParseError> {
    parse_raw(text, prefixes, false)?
        .into_iter()
        .map(|(s, p, o, pos)| {
            let as_iri = |t: PatternTerm| match t {
                PatternTerm::Iri(i) => i,
                _ => unreachable!("checked during parsing"),
            };
            let object: Term = match o {
                PatternTerm::Iri(i) => i.into(),
                PatternTerm::Literal(l) => l.into(),
                PatternTerm::Var(v) => {
                    return Err(ParseError {
                        line: pos.line,
                        column: pos.column,
                        kind: ParseErrorKind::VariableNotAllowed(v.name().to_string()),
                    })
                }
            };
            Ok(Triple::new(as_iri(s), as_iri(p), object))
        })
        .collect()
}

/// Parses pattern text (variables allowed) into a graph pattern.
pub fn parse_pattern(text: &str, prefixes: &Prefixes) -> Result<GraphPattern, ParseError> {
    let patterns = parse_raw(text, prefixes, true)?
        .into_iter()
        .map(|(s, p, o, _)| TriplePattern::new(s, p, o).expect("positions checked during parsing"))
        .collect();
    Ok(GraphPattern::new(patterns))
}

/// Canonical serialization: sorted, expanded, one statement per line.
pub fn serialize(kb: &KnowledgeBase) -> String {
    serialize_triples(kb.canonical_triples().iter())
}

/// Writes the given triples one per line, in the order given.
pub fn serialize_triples<'a>(triples: impl IntoIterator<Item = &'a Triple>) -> String {
    let mut out = String::new();
    for t in triples {
        out.push_str(&t.to_string());
        out.push('\n');
    }
    out
}
