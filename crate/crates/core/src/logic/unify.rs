//! Most general unification of free atoms over a shared variable space.

use super::{FreeAtom, Substitution, Term};

/// Returns the most general unifier of two free atoms, or `None` if they do
/// not unify. The result is idempotent and introduces no fresh variables.
pub fn mgu(a: &FreeAtom, b: &FreeAtom) -> Option<Substitution> {
    if a.pred != b.pred || a.args.len() != b.args.len() {
        return None;
    }
    let mut subst = Substitution::new();
    for (s, t) in a.args.iter().zip(&b.args) {
        if !unify_terms(&mut subst, s, t) {
            return None;
        }
    }
    Some(subst)
}

fn unify_terms(subst: &mut Substitution, s: &Term, t: &Term) -> bool {
    let s = subst.apply_term(s);
    let t = subst.apply_term(t);
    match (s, t) {
        (s, t) if s == t => true,
        (Term::Var(v), t) | (t, Term::Var(v)) => {
            // No occurs check needed: terms have no nesting below Linear, and
            // linear expressions only appear in theory atoms.
            if let Term::Linear(_) = t {
                return false;
            }
            subst.bind(v, t);
            true
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::CmpOp;

    fn p(args: Vec<Term>) -> FreeAtom {
        FreeAtom::new("P", args)
    }

    #[test]
    fn disjoint_variables_unify() {
        // P(x, 5) with P(3, y) → {x ↦ 3, y ↦ 5}
        let a = p(vec![Term::Var(0), Term::int(5)]);
        let b = p(vec![Term::int(3), Term::Var(1)]);
        let s = mgu(&a, &b).expect("unifies");
        assert_eq!(s.apply_term(&Term::Var(0)), Term::int(3));
        assert_eq!(s.apply_term(&Term::Var(1)), Term::int(5));
        assert_eq!(s.apply_atom(&a), s.apply_atom(&b));
    }

    #[test]
    fn predicate_clash() {
        let a = p(vec![Term::Var(0)]);
        let b = FreeAtom::new("Q", vec![Term::Var(0)]);
        assert!(mgu(&a, &b).is_none());
    }

    #[test]
    fn inconsistent_bindings_fail() {
        // P(x, x) with P(3, 5): x cannot be both.
        let a = p(vec![Term::Var(0), Term::Var(0)]);
        let b = p(vec![Term::int(3), Term::int(5)]);
        assert!(mgu(&a, &b).is_none());
        // but P(x, x) with P(3, 3) is fine.
        let b2 = p(vec![Term::int(3), Term::int(3)]);
        assert!(mgu(&a, &b2).is_some());
    }

    #[test]
    fn shared_variable_chains() {
        // P(x, y) with P(y, 3) → x = y = 3.
        let a = p(vec![Term::Var(0), Term::Var(1)]);
        let b = p(vec![Term::Var(1), Term::int(3)]);
        let s = mgu(&a, &b).expect("unifies");
        assert_eq!(s.apply_term(&Term::Var(0)), Term::int(3));
        assert_eq!(s.apply_term(&Term::Var(1)), Term::int(3));
        let _ = CmpOp::Eq;
    }
}
