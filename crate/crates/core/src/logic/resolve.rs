//! Single-step hierarchic resolution: given `Λ1 ∥ L ∨ C1` and
//! `Λ2 ∥ K ∨ C2` with `σ = mgu(L, comp(K))`, the resolvent is
//! `(Λ1, Λ2 ∥ C1 ∨ C2)σ` with theory atoms simplified afterwards.

use thiserror::Error;

use super::{mgu, simplify_theory_atom, Clause, Simplified, Substitution, Term, TheoryAtom, Var};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ResolveError {
    #[error("selected literals are not complementary or do not unify")]
    NotComplementary,
    #[error("literal index out of range")]
    BadIndex,
}

/// Resolves `c1[l1]` against `c2[l2]`. The clauses are renamed apart
/// automatically; the selected literals must have opposite signs and unify.
/// Theory atoms of the resolvent are simplified individually: atoms that
/// become TRUE are dropped, everything else is kept (a FALSE constraint is
/// retained in its substituted form so the unsatisfiable clause stays
/// visible).
pub fn hierarchic_resolve(
    c1: &Clause,
    l1: usize,
    c2: &Clause,
    l2: usize,
) -> Result<Clause, ResolveError> {
    if l1 >= c1.literals.len() || l2 >= c2.literals.len() {
        return Err(ResolveError::BadIndex);
    }
    if c1.literals[l1].positive == c2.literals[l2].positive {
        return Err(ResolveError::NotComplementary);
    }

    // Rename c2 apart by offsetting its variable indices.
    let offset = c1.vars.len() as Var;
    let c2 = offset_clause(c2, offset);

    let lit1 = &c1.literals[l1];
    let lit2 = &c2.literals[l2];
    let sigma = mgu(&lit1.atom, &lit2.atom).ok_or(ResolveError::NotComplementary)?;

    let mut vars = c1.vars.clone();
    vars.extend(c2.vars.iter().cloned());

    let mut constraint = Vec::new();
    for a in c1.constraint.iter().chain(&c2.constraint) {
        let substituted = sigma.apply_theory(a);
        match simplify_theory_atom(&substituted, &Substitution::new()) {
            Ok(Simplified::True) => {}
            Ok(Simplified::Atom(simple)) => constraint.push(simple),
            // FALSE and unsupported shapes are kept in substituted form.
            _ => constraint.push(substituted),
        }
    }

    let mut literals = Vec::new();
    for (i, l) in c1.literals.iter().enumerate() {
        if i != l1 {
            literals.push(sigma.apply_literal(l));
        }
    }
    for (i, l) in c2.literals.iter().enumerate() {
        if i != l2 {
            literals.push(sigma.apply_literal(l));
        }
    }

    Ok(compact(Clause::new(vars, constraint, literals)))
}

fn offset_clause(c: &Clause, offset: Var) -> Clause {
    fn shift(t: &Term, offset: Var) -> Term {
        match t {
            Term::Var(v) => Term::Var(v + offset),
            Term::Linear(l) => Term::Linear(super::LinearExpr {
                terms: l.terms.iter().map(|(k, t)| (k.clone(), shift(t, offset))).collect(),
                offset: l.offset.clone(),
            }),
            other => other.clone(),
        }
    }
    Clause::new(
        c.vars.clone(),
        c.constraint
            .iter()
            .map(|a| TheoryAtom::new(shift(&a.lhs, offset), a.op, shift(&a.rhs, offset)))
            .collect(),
        c.literals
            .iter()
            .map(|l| super::Literal {
                positive: l.positive,
                atom: super::FreeAtom {
                    pred: l.atom.pred.clone(),
                    args: l.atom.args.iter().map(|t| shift(t, offset)).collect(),
                },
            })
            .collect(),
    )
}

/// Renumbers variables to drop unused entries from the table.
pub(crate) fn compact(c: Clause) -> Clause {
    let mut used = vec![false; c.vars.len()];
    let mut mark = |t: &Term| {
        for v in TheoryAtom::new(t.clone(), super::CmpOp::Eq, Term::int(0)).vars() {
            used[v as usize] = true;
        }
    };
    for a in &c.constraint {
        mark(&a.lhs);
        mark(&a.rhs);
    }
    for l in &c.literals {
        for t in &l.atom.args {
            mark(t);
        }
    }
    let mut remap = vec![0 as Var; c.vars.len()];
    let mut vars = Vec::new();
    for (i, name) in c.vars.iter().enumerate() {
        if used[i] {
            remap[i] = vars.len() as Var;
            vars.push(name.clone());
        }
    }
    fn apply(t: &Term, remap: &[Var]) -> Term {
        match t {
            Term::Var(v) => Term::Var(remap[*v as usize]),
            Term::Linear(l) => Term::Linear(super::LinearExpr {
                terms: l.terms.iter().map(|(k, t)| (k.clone(), apply(t, remap))).collect(),
                offset: l.offset.clone(),
            }),
            other => other.clone(),
        }
    }
    Clause::new(
        vars,
        c.constraint
            .iter()
            .map(|a| TheoryAtom::new(apply(&a.lhs, &remap), a.op, apply(&a.rhs, &remap)))
            .collect(),
        c.literals
            .iter()
            .map(|l| super::Literal {
                positive: l.positive,
                atom: super::FreeAtom {
                    pred: l.atom.pred.clone(),
                    args: l.atom.args.iter().map(|t| apply(t, &remap)).collect(),
                },
            })
            .collect(),
    )
}
