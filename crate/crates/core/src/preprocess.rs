//! Preprocessing: detection of positively grounded predicates, their
//! elimination by exhaustive hierarchic resolution (`elim`), flattening of
//! positive conjectures into a fresh goal predicate plus Horn definition
//! rules, and the reduction of existential conjectures and satisfiability
//! checks to the universal pipeline.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::frontend::{Conjecture, ConjectureKind, Formula};
use crate::logic::{
    compact, simplify_theory_atom, Clause, FreeAtom, GroundTerm, Literal, PredName, Simplified,
    Substitution, Term, Var,
};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PreprocessError {
    #[error("elim instantiation count exceeded the limit of {0}")]
    CombinatorialLimit(u64),
    #[error("conjecture is not positive: {0}")]
    NonPositiveConjecture(String),
}

/// Default cap on elim instantiation combinations.
pub const ELIM_LIMIT: u64 = 10_000_000;

/// The set S of predicates whose positive occurrences are all ground unit
/// facts, together with the fact tuples (kept unabstracted for
/// instantiation).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PositivelyGroundedSet {
    pub predicates: BTreeSet<PredName>,
    pub facts: BTreeMap<PredName, Vec<Vec<GroundTerm>>>,
}

impl PositivelyGroundedSet {
    pub fn contains(&self, pred: &PredName) -> bool {
        self.predicates.contains(pred)
    }

    pub fn facts_of(&self, pred: &PredName) -> &[Vec<GroundTerm>] {
        self.facts.get(pred).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Removes predicates (used to honor the requirement that S-predicates do
    /// not occur in the conjecture; shrinking S is always sound).
    pub fn without(mut self, preds: &BTreeSet<PredName>) -> Self {
        for p in preds {
            self.predicates.remove(p);
            self.facts.remove(p);
        }
        self
    }
}

/// Computes the maximal set of positively grounded predicates of an
/// abstracted clause set and collects their fact tuples.
pub fn find_positively_grounded(n: &[Clause]) -> PositivelyGroundedSet {
    let mut bad: BTreeSet<PredName> = BTreeSet::new();
    let mut seen_positive: BTreeSet<PredName> = BTreeSet::new();
    let mut facts: BTreeMap<PredName, Vec<Vec<GroundTerm>>> = BTreeMap::new();
    for clause in n {
        let fact = clause.as_ground_fact();
        for lit in clause.positive_literals() {
            seen_positive.insert(lit.atom.pred.clone());
            match &fact {
                Some((pred, args)) => {
                    let entry = facts.entry(pred.clone()).or_default();
                    if !entry.contains(args) {
                        entry.push(args.clone());
                    }
                }
                None => {
                    bad.insert(lit.atom.pred.clone());
                }
            }
        }
    }
    // Predicates without any positive occurrence satisfy the definition
    // vacuously; they are included with an empty fact set, which makes elim
    // drop every clause containing them negatively (a pure-literal argument).
    let mut predicates: BTreeSet<PredName> = seen_positive;
    for clause in n {
        for lit in clause.negative_literals() {
            predicates.insert(lit.atom.pred.clone());
        }
    }
    predicates.retain(|p| !bad.contains(p));
    facts.retain(|p, _| predicates.contains(p));
    PositivelyGroundedSet { predicates, facts }
}

/// Resolves away all negative occurrences of S-predicates, drops the clauses
/// they occurred in, and keeps the S-facts themselves. Theory atoms of the
/// resolvents are simplified; a resolvent whose constraint contains a FALSE
/// atom is pruned early.
pub fn elim(s: &PositivelyGroundedSet, n: &[Clause]) -> Result<Vec<Clause>, PreprocessError> {
    elim_with_limit(s, n, ELIM_LIMIT)
}

pub fn elim_with_limit(
    s: &PositivelyGroundedSet,
    n: &[Clause],
    limit: u64,
) -> Result<Vec<Clause>, PreprocessError> {
    let mut out = Vec::new();
    let mut budget = limit;
    for clause in n {
        let targets: Vec<usize> = clause
            .literals
            .iter()
            .enumerate()
            .filter(|(_, l)| !l.positive && s.contains(&l.atom.pred))
            .map(|(i, _)| i)
            .collect();
        if targets.is_empty() {
            out.push(clause.clone());
            continue;
        }
        let mut partial = Substitution::new();
        resolve_rec(s, clause, &targets, 0, &mut partial, &mut out, &mut budget)?;
    }
    Ok(out)
}

fn resolve_rec(
    s: &PositivelyGroundedSet,
    clause: &Clause,
    targets: &[usize],
    depth: usize,
    partial: &mut Substitution,
    out: &mut Vec<Clause>,
    budget: &mut u64,
) -> Result<(), PreprocessError> {
    if depth == targets.len() {
        if *budget == 0 {
            return Err(PreprocessError::CombinatorialLimit(ELIM_LIMIT));
        }
        *budget -= 1;
        if let Some(resolvent) = build_resolvent(clause, targets, partial) {
            out.push(resolvent);
        }
        return Ok(());
    }
    let lit = &clause.literals[targets[depth]];
    for tuple in s.facts_of(&lit.atom.pred) {
        if tuple.len() != lit.atom.args.len() {
            continue;
        }
        let saved = partial.clone();
        let mut ok = true;
        for (arg, value) in lit.atom.args.iter().zip(tuple) {
            let ground = Term::from_ground(value);
            match partial.apply_term(arg) {
                Term::Var(v) => partial.bind(v, ground),
                bound => {
                    if bound != ground {
                        ok = false;
                        break;
                    }
                }
            }
        }
        if ok {
            resolve_rec(s, clause, targets, depth + 1, partial, out, budget)?;
        }
        *partial = saved;
    }
    Ok(())
}

fn build_resolvent(clause: &Clause, removed: &[usize], sigma: &Substitution) -> Option<Clause> {
    let mut constraint = Vec::new();
    for atom in &clause.constraint {
        match simplify_theory_atom(atom, sigma) {
            Ok(Simplified::True) => {}
            Ok(Simplified::False) => return None,
            Ok(Simplified::Atom(simple)) => constraint.push(simple),
            // Leave unsupported residuals in substituted form; the fragment
            // check reports them downstream.
            Err(_) => constraint.push(sigma.apply_theory(atom)),
        }
    }
    let literals: Vec<Literal> = clause
        .literals
        .iter()
        .enumerate()
        .filter(|(i, _)| !removed.contains(i))
        .map(|(_, l)| sigma.apply_literal(l))
        .collect();
    Some(compact(Clause::new(clause.vars.clone(), constraint, literals)))
}

/// Applies `elim` repeatedly, recomputing S each round. A single round is the
/// specified behavior; additional rounds are an opt-in extension.
pub fn elim_rounds(n: &[Clause], rounds: u32) -> Result<Vec<Clause>, PreprocessError> {
    let mut clauses = n.to_vec();
    for _ in 0..rounds {
        let s = find_positively_grounded(&clauses);
        if s.predicates.is_empty() {
            break;
        }
        clauses = elim(&s, &clauses)?;
    }
    Ok(clauses)
}

/// Result of flattening a positive conjecture body: a single goal atom plus
/// Horn definition clauses for the fresh predicates.
#[derive(Debug, Clone, PartialEq)]
pub struct FlattenResult {
    pub goal: FreeAtom,
    pub rules: Vec<Clause>,
}

/// Flattens a positive formula into a goal atom over the conjecture
/// variables plus definition rules:
/// * an `And` node produces one rule (conjunction of child atoms implies the
///   node's fresh atom), with theory-conjunction children folded into the
///   rule's constraint;
/// * an `Or` node produces one rule per child, with theory-conjunction
///   children folded into that rule's constraint;
/// * a `Λ ∥ φ` node behaves like `comp(Λ1) ∨ ... ∨ comp(Λk) ∨ φ`;
/// * a free atom stands for itself.
pub fn flatten_conjecture(c: &Conjecture) -> Result<FlattenResult, PreprocessError> {
    if !c.body.is_positive() {
        return Err(PreprocessError::NonPositiveConjecture(
            "body contains a negative free literal".into(),
        ));
    }
    let mut fl = Flattener { vars: c.vars.clone(), rules: Vec::new(), next: 0 };
    let goal = fl.flatten(&c.body);
    Ok(FlattenResult { goal, rules: fl.rules })
}

struct Flattener {
    vars: Vec<String>,
    rules: Vec<Clause>,
    next: usize,
}

impl Flattener {
    fn fresh_atom(&mut self, vars: &[Var]) -> FreeAtom {
        let name = format!("_flat{}", self.next);
        self.next += 1;
        FreeAtom::new(&name, vars.iter().map(|v| Term::Var(*v)).collect())
    }

    fn push_rule(&mut self, clause: Clause) {
        self.rules.push(compact(clause));
    }

    fn flatten(&mut self, f: &Formula) -> FreeAtom {
        match f {
            Formula::Atom(l) => l.atom.clone(),
            Formula::Theory(atoms) => {
                let head = self.fresh_atom(&f.vars());
                self.push_rule(Clause::new(
                    self.vars.clone(),
                    atoms.clone(),
                    vec![Literal::pos(head.clone())],
                ));
                head
            }
            Formula::Or(children) => {
                let head = self.fresh_atom(&f.vars());
                for child in children {
                    match child {
                        Formula::Theory(atoms) => {
                            self.push_rule(Clause::new(
                                self.vars.clone(),
                                atoms.clone(),
                                vec![Literal::pos(head.clone())],
                            ));
                        }
                        other => {
                            let sub = self.flatten_sub(other);
                            self.push_rule(Clause::new(
                                self.vars.clone(),
                                Vec::new(),
                                vec![Literal::neg(sub), Literal::pos(head.clone())],
                            ));
                        }
                    }
                }
                head
            }
            Formula::And(children) => {
                let head = self.fresh_atom(&f.vars());
                let mut constraint = Vec::new();
                let mut body = Vec::new();
                for child in children {
                    match child {
                        Formula::Theory(atoms) => constraint.extend(atoms.iter().cloned()),
                        other => body.push(Literal::neg(self.flatten_sub(other))),
                    }
                }
                body.push(Literal::pos(head.clone()));
                self.push_rule(Clause::new(self.vars.clone(), constraint, body));
                head
            }
            Formula::Guarded(guard, inner) => {
                // Λ ∥ φ  ≡  comp(Λ1) ∨ ... ∨ comp(Λk) ∨ φ
                let head = self.fresh_atom(&f.vars());
                for atom in guard {
                    self.push_rule(Clause::new(
                        self.vars.clone(),
                        vec![atom.complement()],
                        vec![Literal::pos(head.clone())],
                    ));
                }
                match &**inner {
                    Formula::Theory(atoms) => {
                        self.push_rule(Clause::new(
                            self.vars.clone(),
                            atoms.clone(),
                            vec![Literal::pos(head.clone())],
                        ));
                    }
                    other => {
                        let sub = self.flatten_sub(other);
                        self.push_rule(Clause::new(
                            self.vars.clone(),
                            Vec::new(),
                            vec![Literal::neg(sub), Literal::pos(head.clone())],
                        ));
                    }
                }
                head
            }
        }
    }

    /// Like `flatten` but used in child position: a bare atom maps to itself
    /// without a rule.
    fn flatten_sub(&mut self, f: &Formula) -> FreeAtom {
        match f {
            Formula::Atom(l) => l.atom.clone(),
            other => self.flatten(other),
        }
    }
}

/// Reduces a positive existential conjecture to a satisfiability check:
/// returns `N ∪ rflat(φ) ∪ { pflat(φ) → ⊥ }`, which is unsatisfiable exactly
/// when the conjecture is entailed.
pub fn reduce_existential(c: &Conjecture, n: &[Clause]) -> Result<Vec<Clause>, PreprocessError> {
    debug_assert_eq!(c.kind, ConjectureKind::Existential);
    let flat = flatten_conjecture(c)?;
    let mut out = n.to_vec();
    out.extend(flat.rules.iter().cloned());
    out.push(compact(Clause::new(c.vars.clone(), Vec::new(), vec![Literal::neg(flat.goal)])));
    Ok(out)
}

/// The ⊥ conjecture: deciding it is exactly a satisfiability check of N
/// (entailed means unsatisfiable).
pub fn satisfiability_as_conjecture() -> Conjecture {
    Conjecture { kind: ConjectureKind::Universal, vars: Vec::new(), body: Formula::Or(Vec::new()) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_problem;
    use crate::logic::CmpOp;
    use crate::rat::rat;

    #[test]
    fn ignition_table_is_positively_grounded() {
        let p = parse_problem(
            "fact IgnTable(0, 13, 880, 1100, 2200).\n\
             clause x1 <= x2, z2 >= z1 || !IgnTable(x1, x2, y1, y2, z1) \\/ R(z2).",
        )
        .unwrap();
        let s = find_positively_grounded(&p.clauses);
        assert!(s.contains(&PredName::from("IgnTable")));
        assert!(!s.contains(&PredName::from("R")));
        assert_eq!(s.facts_of(&PredName::from("IgnTable")).len(), 1);
    }

    #[test]
    fn extended_example_has_no_positively_grounded_predicates() {
        let p = parse_problem(
            "clause 0 <= x, x <= 2 || !P(x) \\/ Q(x).\n\
             clause x <= 1 || P(x).\n\
             clause x > 1 || !P(x).",
        )
        .unwrap();
        let s = find_positively_grounded(&p.clauses);
        // P and Q occur positively in non-ground clauses; no other predicates.
        assert!(s.predicates.is_empty());
    }

    #[test]
    fn empty_clause_set() {
        assert!(find_positively_grounded(&[]).predicates.is_empty());
    }

    #[test]
    fn elim_resolves_the_ignition_example() {
        let p = parse_problem(
            "fact IgnTable(0, 13, 880, 1100, 2200).\n\
             clause x1 <= x2, z2 >= z1 || !IgnTable(x1, x2, y1, y2, z1) \\/ R(z2).",
        )
        .unwrap();
        let s = find_positively_grounded(&p.clauses);
        let result = elim(&s, &p.clauses).unwrap();
        // the fact is retained, the rule is replaced by its resolvent
        assert_eq!(result.len(), 2);
        assert!(result[0].as_ground_fact().is_some());
        assert_eq!(result[1].to_string(), "z2 >= 2200 || R(z2)");
    }

    #[test]
    fn elim_is_identity_for_empty_s() {
        let p = parse_problem("clause x <= 1 || P(x).").unwrap();
        let s = PositivelyGroundedSet::default();
        assert_eq!(elim(&s, &p.clauses).unwrap(), p.clauses);
    }

    #[test]
    fn elim_enumerates_fact_combinations() {
        // Two negative T-literals and three facts give 3^2 = 9 resolvents.
        let p = parse_problem(
            "fact T(0). fact T(1). fact T(2).\n\
             clause !T(x) \\/ !T(y) \\/ P(x, y).",
        )
        .unwrap();
        let s = find_positively_grounded(&p.clauses);
        let result = elim(&s, &p.clauses).unwrap();
        let resolvents: Vec<_> =
            result.iter().filter(|c| c.literals[0].atom.pred.as_ref() == "P").collect();
        assert_eq!(resolvents.len(), 9);
    }

    #[test]
    fn elim_drops_clauses_with_factless_negative_predicate() {
        let p = parse_problem("clause !T(x) \\/ P(x).").unwrap();
        let s = find_positively_grounded(&p.clauses);
        assert!(s.contains(&PredName::from("T")));
        let result = elim(&s, &p.clauses).unwrap();
        assert!(result.is_empty());
    }

    #[test]
    fn elim_respects_the_limit() {
        let p = parse_problem(
            "fact T(0). fact T(1). fact T(2).\n\
             clause !T(x) \\/ !T(y) \\/ P(x, y).",
        )
        .unwrap();
        let s = find_positively_grounded(&p.clauses);
        assert!(matches!(
            elim_with_limit(&s, &p.clauses, 4),
            Err(PreprocessError::CombinatorialLimit(_))
        ));
    }

    #[test]
    fn flatten_phi3() {
        // (0 <= x, x <= 1 || Q(x)) flattens to a fresh R with three rules.
        let p = parse_problem("conjecture forall x. (0 <= x, x <= 1 || Q(x)).").unwrap();
        let flat = flatten_conjecture(&p.conjecture.unwrap()).unwrap();
        assert_eq!(&*flat.goal.pred, "_flat0");
        assert_eq!(flat.rules.len(), 3);
        assert_eq!(flat.rules[0].to_string(), "0 > x || _flat0(x)");
        assert_eq!(flat.rules[1].to_string(), "x > 1 || _flat0(x)");
        assert_eq!(flat.rules[2].to_string(), "|| !Q(x) \\/ _flat0(x)");
        assert!(flat.rules.iter().all(|r| r.is_horn()));
    }

    #[test]
    fn flatten_single_atom_is_the_identity() {
        let p = parse_problem("conjecture forall x. P(x).").unwrap();
        let flat = flatten_conjecture(&p.conjecture.unwrap()).unwrap();
        assert_eq!(&*flat.goal.pred, "P");
        assert!(flat.rules.is_empty());
    }

    #[test]
    fn flatten_and_or_tree() {
        // (A(x) /\ B(x)) \/ C(x): one And-rule, two Or-rules, fresh goal.
        let p = parse_problem("conjecture forall x. (A(x) /\\ B(x)) \\/ C(x).").unwrap();
        let flat = flatten_conjecture(&p.conjecture.unwrap()).unwrap();
        assert_eq!(&*flat.goal.pred, "_flat0");
        assert_eq!(flat.rules.len(), 3);
        let and_rules: Vec<_> = flat.rules.iter().filter(|r| r.literals.len() == 3).collect();
        assert_eq!(and_rules.len(), 1);
        assert!(flat.rules.iter().all(|r| r.is_horn()));
    }

    #[test]
    fn flatten_rejects_negative_atoms() {
        let p = parse_problem("conjecture forall x. !Q(x) \\/ P(x).").unwrap();
        assert!(matches!(
            flatten_conjecture(&p.conjecture.unwrap()),
            Err(PreprocessError::NonPositiveConjecture(_))
        ));
    }

    #[test]
    fn fresh_predicates_are_positive_only_in_their_definition() {
        let p = parse_problem("conjecture forall x. (0 <= x || A(x) /\\ (B(x) \\/ C(x))).").unwrap();
        let flat = flatten_conjecture(&p.conjecture.unwrap()).unwrap();
        for rule in &flat.rules {
            for lit in rule.positive_literals() {
                if lit.atom.pred.starts_with("_flat") {
                    // every positive occurrence is a head of exactly the rules
                    // that define it, never a body atom
                    assert_eq!(rule.literals.iter().filter(|l| l.positive).count(), 1);
                }
            }
        }
    }

    #[test]
    fn reduce_existential_single_atom() {
        let p = parse_problem(
            "clause x <= 1 || P(x).\nconjecture exists x. P(x).",
        )
        .unwrap();
        let reduced = reduce_existential(&p.conjecture.clone().unwrap(), &p.clauses).unwrap();
        assert_eq!(reduced.len(), 2);
        assert_eq!(reduced[1].to_string(), "|| !P(x)");
    }

    #[test]
    fn elim_simplifies_instantiated_bounds() {
        // After instantiation, 0 <= 13 disappears and z2 >= 2200 remains.
        let p = parse_problem(
            "fact T(5).\nclause x <= 7, y >= x || !T(x) \\/ R(y).",
        )
        .unwrap();
        let s = find_positively_grounded(&p.clauses);
        let result = elim(&s, &p.clauses).unwrap();
        let rule = result.iter().find(|c| !c.literals.is_empty() && c.literals[0].atom.pred.as_ref() == "R").unwrap();
        // 5 <= 7 simplified away; y >= 5 kept
        assert_eq!(rule.constraint.len(), 1);
        assert_eq!(
            rule.constraint[0].rhs,
            Term::Num(rat(5))
        );
        assert_eq!(rule.constraint[0].op, CmpOp::Ge);
    }

    #[test]
    fn satisfiability_conjecture_is_bottom() {
        let c = satisfiability_as_conjecture();
        assert_eq!(c.body, Formula::Or(Vec::new()));
        assert!(c.vars.is_empty());
    }
}
