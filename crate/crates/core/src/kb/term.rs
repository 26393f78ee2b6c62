//! Ground RDF terms: IRIs, typed literals and triples.

use alloc::string::String;
use alloc::sync::Arc;
use core::fmt;

use super::KbError;

/// An absolute IRI such as `http://purl.org/dc/elements/1.1/format`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(Arc<str>);

impl Iri {
    pub fn new(value: impl AsRef<str>) -> Result<Self, KbError> {
        let value = value.as_ref();
        if is_valid_iri(value) {
            Ok(Iri(Arc::from(value)))
        } else {
            Err(KbError::InvalidIri(String::from(value)))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The scheme part, lower-cased comparison is left to the caller.
    pub fn scheme(&self) -> &str {
        self.0.split(':').next().unwrap_or("")
    }
}

fn is_valid_iri(value: &str) -> bool {
    let Some((scheme, _)) = value.split_once(':') else {
        return false;
    };
    let mut chars = scheme.chars();
    let scheme_ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
    scheme_ok
        && !value
            .chars()
            .any(|c| c.is_whitespace() || c == '<' || c == '>' || c == '"' || c.is_control())
}

impl fmt::Debug for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

/// The four literal datatypes the knowledge base understands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Datatype {
    String,
    Integer,
    Decimal,
    Boolean,
}

impl Datatype {
    pub const ALL: [Datatype; 4] = [
        Datatype::String,
        Datatype::Integer,
        Datatype::Decimal,
        Datatype::Boolean,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Datatype::String => "string",
            Datatype::Integer => "integer",
            Datatype::Decimal => "decimal",
            Datatype::Boolean => "boolean",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.name() == name)
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, Datatype::Integer | Datatype::Decimal)
    }

    fn accepts(self, lexical: &str) -> bool {
        match self {
            Datatype::String => true,
            Datatype::Integer => {
                let digits = lexical.strip_prefix(['+', '-']).unwrap_or(lexical);
                !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
            }
            Datatype::Decimal => {
                let body = lexical.strip_prefix(['+', '-']).unwrap_or(lexical);
                match body.split_once('.') {
                    Some((int, frac)) => {
                        !(int.is_empty() && frac.is_empty())
                            && int.bytes().all(|b| b.is_ascii_digit())
                            && frac.bytes().all(|b| b.is_ascii_digit())
                    }
                    None => false,
                }
            }
            Datatype::Boolean => lexical == "true" || lexical == "false",
        }
    }
}

/// A literal value whose lexical form is valid for its datatype.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    lexical: Arc<str>,
    datatype: Datatype,
}

impl Literal {
    pub fn new(lexical: impl AsRef<str>, datatype: Datatype) -> Result<Self, KbError> {
        let lexical = lexical.as_ref();
        if datatype.accepts(lexical) {
            Ok(Literal {
                lexical: Arc::from(lexical),
                datatype,
            })
        } else {
            Err(KbError::InvalidLiteral {
                lexical: String::from(lexical),
                datatype: datatype.name(),
            })
        }
    }

    pub fn string(lexical: impl AsRef<str>) -> Self {
        Literal {
            lexical: Arc::from(lexical.as_ref()),
            datatype: Datatype::String,
        }
    }

    pub fn integer(value: i64) -> Self {
        Literal {
            lexical: Arc::from(alloc::format!("{value}").as_str()),
            datatype: Datatype::Integer,
        }
    }

    pub fn boolean(value: bool) -> Self {
        Literal {
            lexical: Arc::from(if value { "true" } else { "false" }),
            datatype: Datatype::Boolean,
        }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> Datatype {
        self.datatype
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("\"")?;
        for c in self.lexical.chars() {
            match c {
                '"' => f.write_str("\\\"")?,
                '\\' => f.write_str("\\\\")?,
                '\n' => f.write_str("\\n")?,
                '\r' => f.write_str("\\r")?,
                '\t' => f.write_str("\\t")?,
                c => fmt::Write::write_char(f, c)?,
            }
        }
        f.write_str("\"")?;
        if self.datatype != Datatype::String {
            write!(f, "^^{}", self.datatype.name())?;
        }
        Ok(())
    }
}

/// Anything that may stand in the object position of a triple.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
}

impl Term {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            Term::Literal(_) => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(lit) => Some(lit),
            Term::Iri(_) => None,
        }
    }

    /// Canonical text form, identical to what [`crate::kb::serialize`] writes.
    pub fn canonical(&self) -> String {
        alloc::format!("{self}")
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<Literal> for Term {
    fn from(lit: Literal) -> Self {
        Term::Literal(lit)
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => fmt::Display::fmt(iri, f),
            Term::Literal(lit) => fmt::Display::fmt(lit, f),
        }
    }
}

/// A ground statement. Subject and predicate are IRIs by construction.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Iri, predicate: Iri, object: impl Into<Term>) -> Self {
        Triple {
            subject,
            predicate,
            object: object.into(),
        }
    }

    /// Sort key matching the canonical line order of serialized documents.
    pub fn canonical_key(&self) -> (String, String, String) {
        (
            alloc::format!("{}", self.subject),
            alloc::format!("{}", self.predicate),
            self.object.canonical(),
        )
    }
}

impl fmt::Debug for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

/// Sorts triples into canonical order and drops duplicates.
pub fn sort_canonical(triples: &mut alloc::vec::Vec<Triple>) {
    triples.sort_by_cached_key(Triple::canonical_key);
    triples.dedup();
}
