//! Condition/action rules evaluated inside a service wrapper.
//!
//! A rule fires when its condition matches the request graph and every guard
//! holds for that match; the first firing rule in list order answers the
//! request with its instantiated emit template, bypassing the backend.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use thiserror::Error;

use crate::engine::mint_output_iri;
use crate::kb::{
    match_seeded, parse_document, parse_pattern, Binding, Datatype, GraphPattern, Iri,
    KnowledgeBase, Literal, ParseError, Prefixes, Term, Triple, TriplePattern, Variable,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Comparator {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl Comparator {
    pub const ALL: [Comparator; 6] = [
        Comparator::Lt,
        Comparator::Le,
        Comparator::Gt,
        Comparator::Ge,
        Comparator::Eq,
        Comparator::Ne,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
            Comparator::Eq => "==",
            Comparator::Ne => "!=",
        }
    }

    fn holds(self, ord: Ordering) -> bool {
        match self {
            Comparator::Lt => ord == Ordering::Less,
            Comparator::Le => ord != Ordering::Greater,
            Comparator::Gt => ord == Ordering::Greater,
            Comparator::Ge => ord != Ordering::Less,
            Comparator::Eq => ord == Ordering::Equal,
            Comparator::Ne => ord != Ordering::Equal,
        }
    }

    fn is_equality(self) -> bool {
        matches!(self, Comparator::Eq | Comparator::Ne)
    }
}

/// The bound value cannot be compared with the guard's right-hand side.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("cannot compare {value} {op} {right}")]
pub struct GuardTypeMismatch {
    pub value: String,
    pub op: &'static str,
    pub right: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Guard {
    pub left: Variable,
    pub comparator: Comparator,
    pub right: Literal,
}

impl Guard {
    pub fn new(left: Variable, comparator: Comparator, right: Literal) -> Self {
        Guard {
            left,
            comparator,
            right,
        }
    }

    /// Numeric operands compare by value; other literals only support
    /// `==`/`!=` against the same datatype.
    pub fn evaluate(&self, value: &Term) -> Result<bool, GuardTypeMismatch> {
        let mismatch = || GuardTypeMismatch {
            value: value.canonical(),
            op: self.comparator.symbol(),
            right: self.right.to_string(),
        };
        let lit = value.as_literal().ok_or_else(mismatch)?;
        if lit.datatype().is_numeric() && self.right.datatype().is_numeric() {
            let ord = compare_numeric(lit.lexical(), self.right.lexical());
            Ok(self.comparator.holds(ord))
        } else if self.comparator.is_equality() && lit.datatype() == self.right.datatype() {
            let eq = lit.lexical() == self.right.lexical();
            Ok(if self.comparator == Comparator::Eq { eq } else { !eq })
        } else {
            Err(mismatch())
        }
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let right = match self.right.datatype() {
            Datatype::String => self.right.to_string(),
            _ => self.right.lexical().to_string(),
        };
        write!(f, "{} {} {}", self.left, self.comparator.symbol(), right)
    }
}

struct Decimal<'a> {
    negative: bool,
    int: &'a str,
    frac: &'a str,
}

fn decompose(lexical: &str) -> Decimal<'_> {
    let (negative, body) = match lexical.as_bytes().first() {
        Some(b'-') => (true, &lexical[1..]),
        Some(b'+') => (false, &lexical[1..]),
        _ => (false, lexical),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    let int = int.trim_start_matches('0');
    let frac = frac.trim_end_matches('0');
    Decimal {
        negative: negative && !(int.is_empty() && frac.is_empty()),
        int,
        frac,
    }
}

/// Exact comparison of two integer/decimal lexical forms.
pub fn compare_numeric(a: &str, b: &str) -> Ordering {
    let a = decompose(a);
    let b = decompose(b);
    match (a.negative, b.negative) {
        (false, true) => return Ordering::Greater,
        (true, false) => return Ordering::Less,
        _ => {}
    }
    let magnitude = a
        .int
        .len()
        .cmp(&b.int.len())
        .then_with(|| a.int.cmp(b.int))
        .then_with(|| a.frac.cmp(b.frac));
    if a.negative {
        magnitude.reverse()
    } else {
        magnitude
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule `{rule}`: {source}")]
    Pattern { rule: String, source: ParseError },
    #[error("rule `{rule}`: malformed guard `{guard}`: {reason}")]
    Guard {
        rule: String,
        guard: String,
        reason: String,
    },
    #[error("rule `{rule}`: guard variable {var} does not occur in the condition")]
    UnboundGuard { rule: String, var: String },
    #[error("rule `{rule}`: emit template is empty")]
    EmptyEmit { rule: String },
    #[error("rule `{rule}`: condition is empty")]
    EmptyCondition { rule: String },
    #[error("rule name is empty")]
    EmptyName,
}

/// A rule as written in a description file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RuleBlock {
    pub name: String,
    pub condition: String,
    pub guards: Vec<String>,
    pub emit: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmartRule {
    name: String,
    condition: GraphPattern,
    guards: Vec<Guard>,
    emit: Vec<TriplePattern>,
    fresh: BTreeSet<Variable>,
}

impl SmartRule {
    /// Emit variables absent from the condition become fresh outputs minted
    /// per request.
    pub fn new(
        name: impl Into<String>,
        condition: GraphPattern,
        guards: Vec<Guard>,
        emit: Vec<TriplePattern>,
    ) -> Result<Self, RuleError> {
        let name = name.into();
        if name.is_empty() {
            return Err(RuleError::EmptyName);
        }
        if condition.is_empty() {
            return Err(RuleError::EmptyCondition { rule: name });
        }
        if emit.is_empty() {
            return Err(RuleError::EmptyEmit { rule: name });
        }
        if let Some(g) = guards.iter().find(|g| !condition.vars().contains(&g.left)) {
            return Err(RuleError::UnboundGuard {
                rule: name,
                var: g.left.to_string(),
            });
        }
        let fresh = emit
            .iter()
            .flat_map(TriplePattern::vars)
            .filter(|v| !condition.vars().contains(*v))
            .cloned()
            .collect();
        Ok(SmartRule {
            name,
            condition,
            guards,
            emit,
            fresh,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn condition(&self) -> &GraphPattern {
        &self.condition
    }

    pub fn guards(&self) -> &[Guard] {
        &self.guards
    }

    pub fn emit(&self) -> &[TriplePattern] {
        &self.emit
    }

    /// Variables minted when the rule fires.
    pub fn fresh_vars(&self) -> &BTreeSet<Variable> {
        &self.fresh
    }

    /// Block form with expanded IRIs; parses back to an equal rule.
    pub fn to_block(&self) -> RuleBlock {
        RuleBlock {
            name: self.name.clone(),
            condition: self.condition.to_string(),
            guards: self.guards.iter().map(ToString::to_string).collect(),
            emit: GraphPattern::new(self.emit.clone()).to_string(),
        }
    }
}

pub fn parse_guard(text: &str, prefixes: &Prefixes) -> Result<Guard, String> {
    let text = text.trim();
    let rest = text.strip_prefix('?').ok_or("guard must start with a variable")?;
    let name_len = rest
        .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .unwrap_or(rest.len());
    let left = Variable::new(&rest[..name_len]).map_err(|e| e.to_string())?;
    let rest = rest[name_len..].trim_start();
    let comparator = ["<=", ">=", "==", "!=", "<", ">"]
        .into_iter()
        .zip([
            Comparator::Le,
            Comparator::Ge,
            Comparator::Eq,
            Comparator::Ne,
            Comparator::Lt,
            Comparator::Gt,
        ])
        .find(|(sym, _)| rest.starts_with(sym));
    let (sym, comparator) = comparator.ok_or("expected one of < <= > >= == !=")?;
    let operand = rest[sym.len()..].trim();
    let right = parse_operand(operand, prefixes)?;
    Ok(Guard::new(left, comparator, right))
}

fn parse_operand(operand: &str, prefixes: &Prefixes) -> Result<Literal, String> {
    if operand.starts_with('"') {
        let doc = alloc::format!("<urn:guard:s> <urn:guard:p> {operand} .");
        let triples = parse_document(&doc, prefixes).map_err(|e| e.kind.to_string())?;
        return match triples.as_slice() {
            [t] => t.object.as_literal().cloned().ok_or_else(|| "operand must be a literal".into()),
            _ => Err("operand must be a single literal".into()),
        };
    }
    let datatype = match operand {
        "true" | "false" => Datatype::Boolean,
        s if s.contains('.') => Datatype::Decimal,
        _ => Datatype::Integer,
    };
    Literal::new(operand, datatype).map_err(|e| e.to_string())
}

pub fn parse_rule(block: &RuleBlock, prefixes: &Prefixes) -> Result<SmartRule, RuleError> {
    let pattern_err = |source| RuleError::Pattern {
        rule: block.name.clone(),
        source,
    };
    let condition = parse_pattern(&block.condition, prefixes).map_err(pattern_err)?;
    let emit = parse_pattern(&block.emit, prefixes).map_err(pattern_err)?;
    let guards = block
        .guards
        .iter()
        .map(|g| {
            parse_guard(g, prefixes).map_err(|reason| RuleError::Guard {
                rule: block.name.clone(),
                guard: g.clone(),
                reason,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    SmartRule::new(block.name.clone(), condition, guards, emit.patterns().to_vec())
}

/// Naming inputs for fresh resources emitted by a rule.
#[derive(Clone, Copy, Debug)]
pub struct MintContext<'a> {
    pub base: &'a Iri,
    pub service_name: &'a str,
    pub fingerprint: &'a str,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RuleOutcome {
    pub fired: bool,
    pub emitted: Vec<Triple>,
    pub rule_name: Option<String>,
    /// Rules abandoned because a guard could not be evaluated.
    pub skipped: Vec<String>,
}

pub fn evaluate_rules(
    rules: &[SmartRule],
    request_graph: &[Triple],
    binding: &Binding,
    mint: MintContext<'_>,
) -> RuleOutcome {
    let graph = KnowledgeBase::from_triples(request_graph.iter().cloned());
    let mut skipped = Vec::new();
    for rule in rules {
        let seed = binding.restrict(rule.condition.vars());
        let mut chosen = None;
        let mut mismatch = false;
        'solutions: for solution in match_seeded(&rule.condition, &graph, &seed) {
            for guard in &rule.guards {
                let value = solution.get(&guard.left).expect("guard variable bound by condition");
                match guard.evaluate(value) {
                    Ok(true) => {}
                    Ok(false) => continue 'solutions,
                    Err(_) => {
                        mismatch = true;
                        break 'solutions;
                    }
                }
            }
            chosen = Some(solution);
            break;
        }
        if mismatch {
            skipped.push(rule.name.clone());
            continue;
        }
        let Some(mut solution) = chosen else {
            continue;
        };
        for var in &rule.fresh {
            let iri = mint_output_iri(mint.base, mint.service_name, mint.fingerprint, var.name());
            solution.insert(var.clone(), Term::Iri(iri));
        }
        let emitted: Option<Vec<Triple>> =
            rule.emit.iter().map(|p| p.instantiate(&solution)).collect();
        match emitted {
            Some(mut emitted) => {
                crate::kb::sort_canonical(&mut emitted);
                return RuleOutcome {
                    fired: true,
                    emitted,
                    rule_name: Some(rule.name.clone()),
                    skipped,
                };
            }
            // A literal landed in subject/predicate position.
            None => skipped.push(rule.name.clone()),
        }
    }
    RuleOutcome {
        skipped,
        ..RuleOutcome::default()
    }
}
