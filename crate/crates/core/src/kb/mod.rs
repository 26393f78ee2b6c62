//! Triples, the knowledge base and conjunctive graph-pattern matching.

mod pattern;
mod store;
mod term;
mod text;

use alloc::string::String;

pub use pattern::{Binding, GraphPattern, PatternTerm, TriplePattern, Variable};
pub use store::{has_match, match_pattern, match_seeded, KnowledgeBase};
pub use term::{sort_canonical, Datatype, Iri, Literal, Term, Triple};
pub use text::{
    parse_document, parse_pattern, serialize, serialize_triples, well_known_prefixes, ParseError,
    ParseErrorKind, Prefixes, DC, RDF, RDFS, XSD,
};

/// Construction errors for terms and patterns.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum KbError {
    #[error("malformed IRI `{0}`")]
    InvalidIri(String),
    #[error("`{lexical}` is not a valid {datatype} literal")]
    InvalidLiteral { lexical: String, datatype: &'static str },
    #[error("invalid variable name `{0}`")]
    InvalidVariable(String),
    #[error("literal not allowed in {0} position")]
    LiteralPosition(&'static str),
}
