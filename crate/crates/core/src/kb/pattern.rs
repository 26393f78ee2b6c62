//! Variables, triple patterns, graph patterns and their solution bindings.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use super::term::{Iri, Literal, Term, Triple};
use super::KbError;

/// A query variable, written `?name` in pattern text.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable(Arc<str>);

impl Variable {
    pub fn new(name: impl AsRef<str>) -> Result<Self, KbError> {
        let name = name.as_ref();
        let mut chars = name.chars();
        let ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
        if ok {
            Ok(Variable(Arc::from(name)))
        } else {
            Err(KbError::InvalidVariable(String::from(name)))
        }
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

/// One position of a triple pattern.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PatternTerm {
    Var(Variable),
    Iri(Iri),
    Literal(Literal),
}

impl PatternTerm {
    pub fn as_var(&self) -> Option<&Variable> {
        match self {
            PatternTerm::Var(v) => Some(v),
            _ => None,
        }
    }

    /// The ground term this position denotes under `binding`, if any.
    pub fn resolve(&self, binding: &Binding) -> Option<Term> {
        match self {
            PatternTerm::Var(v) => binding.get(v).cloned(),
            PatternTerm::Iri(iri) => Some(Term::Iri(iri.clone())),
            PatternTerm::Literal(lit) => Some(Term::Literal(lit.clone())),
        }
    }
}

impl From<Term> for PatternTerm {
    fn from(term: Term) -> Self {
        match term {
            Term::Iri(iri) => PatternTerm::Iri(iri),
            Term::Literal(lit) => PatternTerm::Literal(lit),
        }
    }
}

impl From<Variable> for PatternTerm {
    fn from(v: Variable) -> Self {
        PatternTerm::Var(v)
    }
}

impl From<Iri> for PatternTerm {
    fn from(iri: Iri) -> Self {
        PatternTerm::Iri(iri)
    }
}

impl From<Literal> for PatternTerm {
    fn from(lit: Literal) -> Self {
        PatternTerm::Literal(lit)
    }
}

impl fmt::Debug for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternTerm::Var(v) => fmt::Display::fmt(v, f),
            PatternTerm::Iri(i) => fmt::Display::fmt(i, f),
            PatternTerm::Literal(l) => fmt::Display::fmt(l, f),
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TriplePattern {
    subject: PatternTerm,
    predicate: PatternTerm,
    object: PatternTerm,
}

impl TriplePattern {
    /// Literals are rejected in subject and predicate position.
    pub fn new(
        subject: impl Into<PatternTerm>,
        predicate: impl Into<PatternTerm>,
        object: impl Into<PatternTerm>,
    ) -> Result<Self, KbError> {
        let subject = subject.into();
        let predicate = predicate.into();
        if matches!(subject, PatternTerm::Literal(_)) {
            return Err(KbError::LiteralPosition("subject"));
        }
        if matches!(predicate, PatternTerm::Literal(_)) {
            return Err(KbError::LiteralPosition("predicate"));
        }
        Ok(TriplePattern {
            subject,
            predicate,
            object: object.into(),
        })
    }

    pub fn subject(&self) -> &PatternTerm {
        &self.subject
    }

    pub fn predicate(&self) -> &PatternTerm {
        &self.predicate
    }

    pub fn object(&self) -> &PatternTerm {
        &self.object
    }

    pub fn positions(&self) -> [&PatternTerm; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    pub fn vars(&self) -> impl Iterator<Item = &Variable> {
        self.positions().into_iter().filter_map(PatternTerm::as_var)
    }

    /// Substitutes `binding`; `None` if a variable is unbound or the result
    /// would put a literal in subject or predicate position.
    pub fn instantiate(&self, binding: &Binding) -> Option<Triple> {
        let subject = self.subject.resolve(binding)?.as_iri()?.clone();
        let predicate = self.predicate.resolve(binding)?.as_iri()?.clone();
        let object = self.object.resolve(binding)?;
        Some(Triple::new(subject, predicate, object))
    }
}

impl From<Triple> for TriplePattern {
    fn from(t: Triple) -> Self {
        TriplePattern {
            subject: t.subject.into(),
            predicate: t.predicate.into(),
            object: t.object.into(),
        }
    }
}

impl fmt::Debug for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

/// A conjunction of triple patterns.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct GraphPattern {
    patterns: Vec<TriplePattern>,
    vars: BTreeSet<Variable>,
}

impl GraphPattern {
    pub fn new(patterns: Vec<TriplePattern>) -> Self {
        let vars = patterns.iter().flat_map(|p| p.vars().cloned()).collect();
        GraphPattern { patterns, vars }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn patterns(&self) -> &[TriplePattern] {
        &self.patterns
    }

    pub fn vars(&self) -> &BTreeSet<Variable> {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Concatenation of two conjunctions.
    pub fn and(&self, other: &GraphPattern) -> GraphPattern {
        let mut patterns = self.patterns.clone();
        patterns.extend(other.patterns.iter().cloned());
        GraphPattern::new(patterns)
    }

    /// Instantiates every pattern; patterns that stay open are skipped.
    pub fn instantiate(&self, binding: &Binding) -> Vec<Triple> {
        self.patterns
            .iter()
            .filter_map(|p| p.instantiate(binding))
            .collect()
    }
}

impl fmt::Debug for GraphPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.patterns).finish()
    }
}

impl fmt::Display for GraphPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.patterns.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            fmt::Display::fmt(p, f)?;
        }
        Ok(())
    }
}

/// A solution mapping from variables to ground terms.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Binding(BTreeMap<Variable, Term>);

impl Binding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: &Variable) -> Option<&Term> {
        self.0.get(var)
    }

    pub fn insert(&mut self, var: Variable, term: Term) -> Option<Term> {
        self.0.insert(var, term)
    }

    pub fn remove(&mut self, var: &Variable) -> Option<Term> {
        self.0.remove(var)
    }

    pub fn contains(&self, var: &Variable) -> bool {
        self.0.contains_key(var)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Entries in variable-name order.
    pub fn iter(&self) -> impl Iterator<Item = (&Variable, &Term)> {
        self.0.iter()
    }

    pub fn vars(&self) -> impl Iterator<Item = &Variable> {
        self.0.keys()
    }

    /// The sub-binding over `vars`.
    pub fn restrict<'a>(&self, vars: impl IntoIterator<Item = &'a Variable>) -> Binding {
        let mut out = Binding::new();
        for v in vars {
            if let Some(t) = self.0.get(v) {
                out.0.insert(v.clone(), t.clone());
            }
        }
        out
    }

    /// Canonical text, one `?name=term` per line in variable-name order.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (v, t) in &self.0 {
            out.push_str(&alloc::format!("{v}={t}\n"));
        }
        out
    }

    /// Bound terms rendered canonically, in variable-name order.
    pub fn canonical_terms(&self) -> Vec<String> {
        self.0.values().map(Term::canonical).collect()
    }
}

impl FromIterator<(Variable, Term)> for Binding {
    fn from_iter<I: IntoIterator<Item = (Variable, Term)>>(iter: I) -> Self {
        Binding(iter.into_iter().collect())
    }
}

impl fmt::Debug for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.0.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variable_names() {
        assert!(Variable::new("inputImage").is_ok());
        assert!(Variable::new("_x1").is_ok());
        assert!(Variable::new("").is_err());
        assert!(Variable::new("1x").is_err());
        assert!(Variable::new("a-b").is_err());
    }

    #[test]
    fn literal_subject_is_rejected() {
        let p = Iri::new("http://x/p").unwrap();
        assert!(TriplePattern::new(Literal::string("s"), p.clone(), p.clone()).is_err());
        assert!(TriplePattern::new(p.clone(), Literal::string("s"), p).is_err());
    }

    #[test]
    fn vars_are_union_of_pattern_vars() {
        let a = Variable::new("a").unwrap();
        let b = Variable::new("b").unwrap();
        let p = Iri::new("http://x/p").unwrap();
        let gp = GraphPattern::new(alloc::vec![
            TriplePattern::new(a.clone(), p.clone(), b.clone()).unwrap(),
            TriplePattern::new(b.clone(), p.clone(), a.clone()).unwrap(),
        ]);
        assert_eq!(gp.vars().iter().cloned().collect::<Vec<_>>(), alloc::vec![a, b]);
        assert!(GraphPattern::empty().vars().is_empty());
    }
}
