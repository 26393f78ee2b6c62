//! In-memory triple set with SPO, POS and OSP indexes, and conjunctive
//! graph-pattern matching by left-to-right backtracking.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::pattern::{Binding, GraphPattern, PatternTerm, TriplePattern};
use super::term::{Iri, Term, Triple};

type Index<A, B, C> = BTreeMap<A, BTreeMap<B, BTreeSet<C>>>;

#[derive(Clone, Default)]
pub struct KnowledgeBase {
    spo: Index<Iri, Iri, Term>,
    pos: Index<Iri, Term, Iri>,
    osp: Index<Term, Iri, Iri>,
    len: usize,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_triples(triples: impl IntoIterator<Item = Triple>) -> Self {
        let mut kb = Self::new();
        kb.extend(triples);
        kb
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.spo
            .get(&t.subject)
            .and_then(|m| m.get(&t.predicate))
            .is_some_and(|objs| objs.contains(&t.object))
    }

    /// Adds one triple; `true` when it was not already present.
    pub fn insert_one(&mut self, t: Triple) -> bool {
        let fresh = self
            .spo
            .entry(t.subject.clone())
            .or_default()
            .entry(t.predicate.clone())
            .or_default()
            .insert(t.object.clone());
        if fresh {
            self.pos
                .entry(t.predicate.clone())
                .or_default()
                .entry(t.object.clone())
                .or_default()
                .insert(t.subject.clone());
            self.osp
                .entry(t.object)
                .or_default()
                .entry(t.subject)
                .or_default()
                .insert(t.predicate);
            self.len += 1;
        }
        fresh
    }

    /// Set union; returns how many triples were new.
    pub fn insert<I>(&mut self, triples: I) -> usize
    where
        I: IntoIterator<Item = Triple>,
    {
        triples
            .into_iter()
            .map(|t| self.insert_one(t))
            .filter(|&fresh| fresh)
            .count()
    }

    /// All triples, ordered by the derived `Ord` (not canonical text order).
    pub fn iter(&self) -> impl Iterator<Item = Triple> + '_ {
        self.spo.iter().flat_map(|(s, pm)| {
            pm.iter().flat_map(move |(p, objs)| {
                objs.iter()
                    .map(move |o| Triple::new(s.clone(), p.clone(), o.clone()))
            })
        })
    }

    /// Triples in canonical serialization order.
    pub fn canonical_triples(&self) -> Vec<Triple> {
        let mut out: Vec<Triple> = self.iter().collect();
        out.sort_by_cached_key(Triple::canonical_key);
        out
    }

    /// Every distinct term in any position.
    pub fn terms(&self) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        for t in self.iter() {
            out.insert(Term::Iri(t.subject));
            out.insert(Term::Iri(t.predicate));
            out.insert(t.object);
        }
        out
    }

    /// Triples matching the given fixed positions, via the best index.
    fn lookup<'a>(
        &'a self,
        s: Option<&'a Iri>,
        p: Option<&'a Iri>,
        o: Option<&'a Term>,
    ) -> Vec<Triple> {
        let mut out = Vec::new();
        match (s, p, o) {
            (Some(s), Some(p), Some(o)) => {
                let t = Triple::new(s.clone(), p.clone(), o.clone());
                if self.contains(&t) {
                    out.push(t);
                }
            }
            (Some(s), Some(p), None) => {
                if let Some(objs) = self.spo.get(s).and_then(|m| m.get(p)) {
                    out.extend(objs.iter().map(|o| Triple::new(s.clone(), p.clone(), o.clone())));
                }
            }
            (Some(s), None, Some(o)) => {
                if let Some(preds) = self.osp.get(o).and_then(|m| m.get(s)) {
                    out.extend(preds.iter().map(|p| Triple::new(s.clone(), p.clone(), o.clone())));
                }
            }
            (Some(s), None, None) => {
                if let Some(pm) = self.spo.get(s) {
                    for (p, objs) in pm {
                        out.extend(objs.iter().map(|o| Triple::new(s.clone(), p.clone(), o.clone())));
                    }
                }
            }
            (None, Some(p), Some(o)) => {
                if let Some(subjs) = self.pos.get(p).and_then(|m| m.get(o)) {
                    out.extend(subjs.iter().map(|s| Triple::new(s.clone(), p.clone(), o.clone())));
                }
            }
            (None, Some(p), None) => {
                if let Some(om) = self.pos.get(p) {
                    for (o, subjs) in om {
                        out.extend(subjs.iter().map(|s| Triple::new(s.clone(), p.clone(), o.clone())));
                    }
                }
            }
            (None, None, Some(o)) => {
                if let Some(sm) = self.osp.get(o) {
                    for (s, preds) in sm {
                        out.extend(preds.iter().map(|p| Triple::new(s.clone(), p.clone(), o.clone())));
                    }
                }
            }
            (None, None, None) => out.extend(self.iter()),
        }
        out
    }
}

impl Extend<Triple> for KnowledgeBase {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        self.insert(iter);
    }
}

impl PartialEq for KnowledgeBase {
    fn eq(&self, other: &Self) -> bool {
        self.len == other.len && self.spo == other.spo
    }
}

impl Eq for KnowledgeBase {}

impl core::fmt::Debug for KnowledgeBase {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_set().entries(self.canonical_triples()).finish()
    }
}

/// All solutions of `pattern` over `kb`, each with domain exactly
/// `pattern.vars()`, sorted by their bound terms in variable-name order.
pub fn match_pattern(pattern: &GraphPattern, kb: &KnowledgeBase) -> Vec<Binding> {
    match_seeded(pattern, kb, &Binding::new())
}

/// Like [`match_pattern`] but starting from `seed`. Seed entries are kept in
/// every solution, so the domain is `pattern.vars() ∪ seed.vars()`.
pub fn match_seeded(pattern: &GraphPattern, kb: &KnowledgeBase, seed: &Binding) -> Vec<Binding> {
    let mut out = Vec::new();
    let mut current = seed.clone();
    extend_solutions(pattern.patterns(), kb, &mut current, &mut out);
    out.sort_by_cached_key(Binding::canonical_terms);
    out.dedup();
    out
}

/// `true` iff at least one solution exists.
pub fn has_match(pattern: &GraphPattern, kb: &KnowledgeBase, seed: &Binding) -> bool {
    let mut current = seed.clone();
    any_solution(pattern.patterns(), kb, &mut current)
}

fn candidates(tp: &TriplePattern, kb: &KnowledgeBase, binding: &Binding) -> Option<Vec<Triple>> {
    // A position bound to a literal in subject/predicate place can never match.
    let iri_at = |pt: &PatternTerm| -> Result<Option<Iri>, ()> {
        match pt.resolve(binding) {
            None => Ok(None),
            Some(Term::Iri(i)) => Ok(Some(i)),
            Some(Term::Literal(_)) => Err(()),
        }
    };
    let s = iri_at(tp.subject()).ok()?;
    let p = iri_at(tp.predicate()).ok()?;
    let o = tp.object().resolve(binding);
    Some(kb.lookup(s.as_ref(), p.as_ref(), o.as_ref()))
}

/// Binds the open positions of `tp` against `t`; returns the variables it
/// newly bound, or `None` when a repeated variable disagrees.
fn unify(tp: &TriplePattern, t: &Triple, binding: &mut Binding) -> Option<Vec<super::Variable>> {
    let values = [
        Term::Iri(t.subject.clone()),
        Term::Iri(t.predicate.clone()),
        t.object.clone(),
    ];
    let mut added = Vec::new();
    for (pos, value) in tp.positions().into_iter().zip(values) {
        if let PatternTerm::Var(v) = pos {
            match binding.get(v) {
                Some(existing) if *existing != value => {
                    for a in &added {
                        binding.remove(a);
                    }
                    return None;
                }
                Some(_) => {}
                None => {
                    binding.insert(v.clone(), value);
                    added.push(v.clone());
                }
            }
        }
    }
    Some(added)
}

fn extend_solutions(
    patterns: &[TriplePattern],
    kb: &KnowledgeBase,
    binding: &mut Binding,
    out: &mut Vec<Binding>,
) {
    let Some((first, rest)) = patterns.split_first() else {
        out.push(binding.clone());
        return;
    };
    let Some(cands) = candidates(first, kb, binding) else {
        return;
    };
    for t in &cands {
        if let Some(added) = unify(first, t, binding) {
            extend_solutions(rest, kb, binding, out);
            for v in &added {
                binding.remove(v);
            }
        }
    }
}

fn any_solution(patterns: &[TriplePattern], kb: &KnowledgeBase, binding: &mut Binding) -> bool {
    let Some((first, rest)) = patterns.split_first() else {
        return true;
    };
    let Some(cands) = candidates(first, kb, binding) else {
        return false;
    };
    for t in &cands {
        if let Some(added) = unify(first, t, binding) {
            let found = any_solution(rest, kb, binding);
            for v in &added {
                binding.remove(v);
            }
            if found {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{Literal, Variable};
    use alloc::vec;

    fn iri(s: &str) -> Iri {
        Iri::new(alloc::format!("http://x/{s}")).unwrap()
    }

    fn var(s: &str) -> Variable {
        Variable::new(s).unwrap()
    }

    #[test]
    fn set_semantics() {
        let mut kb = KnowledgeBase::new();
        let t = Triple::new(iri("a"), iri("p"), iri("b"));
        assert_eq!(kb.insert([t.clone()]), 1);
        assert_eq!(kb.insert([t.clone()]), 0);
        assert_eq!(kb.len(), 1);
        let three = [
            Triple::new(iri("a"), iri("p"), iri("c")),
            Triple::new(iri("a"), iri("q"), Literal::string("x")),
            Triple::new(iri("d"), iri("p"), iri("b")),
        ];
        let mut empty = KnowledgeBase::new();
        assert_eq!(empty.insert(three), 3);
    }

    #[test]
    fn empty_pattern_has_one_empty_solution() {
        let kb = KnowledgeBase::new();
        let out = match_pattern(&GraphPattern::empty(), &kb);
        assert_eq!(out, vec![Binding::new()]);
    }

    #[test]
    fn repeated_variable_must_agree() {
        let kb = KnowledgeBase::from_triples([
            Triple::new(iri("a"), iri("p"), iri("a")),
            Triple::new(iri("a"), iri("p"), iri("b")),
        ]);
        let gp = GraphPattern::new(vec![TriplePattern::new(var("x"), iri("p"), var("x")).unwrap()]);
        let out = match_pattern(&gp, &kb);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].get(&var("x")), Some(&Term::Iri(iri("a"))));
    }

    #[test]
    fn literal_bound_variable_in_subject_position() {
        let kb = KnowledgeBase::from_triples([
            Triple::new(iri("a"), iri("p"), Literal::string("v")),
            Triple::new(iri("b"), iri("p"), iri("a")),
        ]);
        let gp = GraphPattern::new(vec![
            TriplePattern::new(iri("a"), iri("p"), var("x")).unwrap(),
            TriplePattern::new(var("x"), iri("p"), var("y")).unwrap(),
        ]);
        assert!(match_pattern(&gp, &kb).is_empty());
    }

    #[test]
    fn seeded_match_keeps_seed() {
        let kb = KnowledgeBase::from_triples([
            Triple::new(iri("a"), iri("p"), iri("b")),
            Triple::new(iri("c"), iri("p"), iri("d")),
        ]);
        let gp = GraphPattern::new(vec![TriplePattern::new(var("s"), iri("p"), var("o")).unwrap()]);
        let mut seed = Binding::new();
        seed.insert(var("s"), Term::Iri(iri("c")));
        seed.insert(var("other"), Term::Iri(iri("z")));
        let out = match_seeded(&gp, &kb, &seed);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].get(&var("o")), Some(&Term::Iri(iri("d"))));
        assert!(out[0].contains(&var("other")));
        assert!(has_match(&gp, &kb, &seed));
    }

    #[test]
    fn every_index_path() {
        let kb = KnowledgeBase::from_triples([
            Triple::new(iri("a"), iri("p"), iri("b")),
            Triple::new(iri("a"), iri("q"), iri("b")),
            Triple::new(iri("c"), iri("p"), iri("b")),
        ]);
        let a = Some(iri("a"));
        let p = Some(iri("p"));
        let b = Some(Term::Iri(iri("b")));
        let n = |s: &Option<Iri>, pp: &Option<Iri>, o: &Option<Term>| kb.lookup(s.as_ref(), pp.as_ref(), o.as_ref()).len();
        assert_eq!(n(&a, &p, &b), 1);
        assert_eq!(n(&a, &p, &None), 1);
        assert_eq!(n(&a, &None, &b), 2);
        assert_eq!(n(&a, &None, &None), 2);
        assert_eq!(n(&None, &p, &b), 2);
        assert_eq!(n(&None, &p, &None), 2);
        assert_eq!(n(&None, &None, &b), 3);
        assert_eq!(n(&None, &None, &None), 3);
    }
}
