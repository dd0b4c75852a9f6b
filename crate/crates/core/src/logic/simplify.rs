//! Theory-atom simplification. Atoms are normalized into a linear form over
//! symbols (variables and symbolic constants) with exact rational
//! coefficients, then classified as TRUE, FALSE, a one-symbol bound, or a
//! two-symbol comparison. Anything else is outside the supported fragment.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::{CmpOp, PointName, Substitution, Term, TheoryAtom, Var};
use crate::rat::{rat_from_bigint, Rat};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SimplifyError {
    /// The atom does not reduce to a variable bound, a constant bound, or a
    /// plain comparison between two symbols.
    #[error("atom is not linear in the supported sense: {0}")]
    NonLinear(String),
}

/// Symbols a linear form ranges over.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LinSym {
    Var(Var),
    Point(PointName),
}

impl LinSym {
    fn to_term(&self) -> Term {
        match self {
            LinSym::Var(v) => Term::Var(*v),
            LinSym::Point(p) => Term::Point(p.clone()),
        }
    }
}

/// `Σ coeff·sym + constant` with exact rational arithmetic.
#[derive(Debug, Clone, Default)]
pub struct LinForm {
    pub coeffs: BTreeMap<LinSym, Rat>,
    pub constant: Rat,
}

impl LinForm {
    fn add_sym(&mut self, sym: LinSym, c: Rat) {
        let entry = self.coeffs.entry(sym).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            let dead: Vec<_> =
                self.coeffs.iter().filter(|(_, v)| v.is_zero()).map(|(k, _)| k.clone()).collect();
            for k in dead {
                self.coeffs.remove(&k);
            }
        }
    }

    fn add_term(&mut self, t: &Term, scale: &Rat, partial: &Substitution) -> Result<(), SimplifyError> {
        match t {
            Term::Var(v) => match partial.get(*v) {
                Some(bound) => {
                    let bound = bound.clone();
                    self.add_term(&bound, scale, partial)?;
                }
                None => self.add_sym(LinSym::Var(*v), scale.clone()),
            },
            Term::Num(r) => self.constant += scale * r,
            Term::Point(p) => self.add_sym(LinSym::Point(p.clone()), scale.clone()),
            Term::Linear(l) => {
                for (c, inner) in &l.terms {
                    self.add_term(inner, &(scale * rat_from_bigint(c)), partial)?;
                }
                self.constant += scale * rat_from_bigint(&l.offset);
            }
        }
        Ok(())
    }

    /// Builds `lhs − rhs` of an atom under a partial substitution.
    pub fn from_atom(a: &TheoryAtom, partial: &Substitution) -> Result<LinForm, SimplifyError> {
        let mut f = LinForm::default();
        f.add_term(&a.lhs, &Rat::one(), partial)?;
        f.add_term(&a.rhs, &(-Rat::one()), partial)?;
        Ok(f)
    }
}

/// Result of simplifying a theory atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Simplified {
    True,
    False,
    /// A canonical residual atom: `sym ◁ c` with the symbol on the left, or a
    /// comparison `sym ◁ sym`.
    Atom(TheoryAtom),
}

impl Simplified {
    pub fn as_atom(&self) -> Option<&TheoryAtom> {
        match self {
            Simplified::Atom(a) => Some(a),
            _ => None,
        }
    }

    /// The residual bound `(var, op, constant)` if this is a variable bound.
    pub fn as_var_bound(&self) -> Option<(Var, CmpOp, Rat)> {
        match self {
            Simplified::Atom(TheoryAtom { lhs: Term::Var(v), op, rhs: Term::Num(c) }) => {
                Some((*v, *op, c.clone()))
            }
            _ => None,
        }
    }
}

/// Simplifies `a` under a partial substitution into TRUE, FALSE, a bound
/// `sym ◁ c`, or a comparison `sym ◁ sym`; fails with `NonLinear` otherwise.
/// All arithmetic is exact.
pub fn simplify_theory_atom(
    a: &TheoryAtom,
    partial: &Substitution,
) -> Result<Simplified, SimplifyError> {
    let form = LinForm::from_atom(a, partial)?;
    // form ◁ 0 where form = Σ coeff·sym + constant.
    let syms: Vec<(&LinSym, &Rat)> = form.coeffs.iter().collect();
    match syms.len() {
        0 => {
            // constant ◁ 0
            let holds = a.op.eval(&form.constant, &Rat::zero());
            Ok(if holds { Simplified::True } else { Simplified::False })
        }
        1 => {
            // k·sym + constant ◁ 0  ⇒  sym ◁' −constant/k  (◁ mirrored if k < 0)
            let (sym, k) = syms[0];
            let bound = -&form.constant / k;
            let op = if k.is_negative() { a.op.flip() } else { a.op };
            Ok(Simplified::Atom(TheoryAtom::new(sym.to_term(), op, Term::Num(bound))))
        }
        2 => {
            // Only plain comparisons `sym ◁ sym` are representable: the
            // coefficients must be k and −k with zero offset.
            let (s1, k1) = syms[0];
            let (s2, k2) = syms[1];
            if !form.constant.is_zero() || !(k1 + k2).is_zero() {
                return Err(SimplifyError::NonLinear(describe(&form, a.op)));
            }
            // k1·(s1 − s2) ◁ 0: keep the lower symbol on the left, mirroring
            // the operator when the coefficient is negative.
            let op = if k1.is_negative() { a.op.flip() } else { a.op };
            Ok(Simplified::Atom(TheoryAtom::new(s1.to_term(), op, s2.to_term())))
        }
        _ => Err(SimplifyError::NonLinear(describe(&form, a.op))),
    }
}

fn describe(form: &LinForm, op: CmpOp) -> String {
    let mut parts = Vec::new();
    for (s, c) in &form.coeffs {
        let sym = match s {
            LinSym::Var(v) => format!("_{v}"),
            LinSym::Point(p) => p.to_string(),
        };
        parts.push(format!("{}*{}", crate::rat::rat_str(c), sym));
    }
    if !form.constant.is_zero() || parts.is_empty() {
        parts.push(crate::rat::rat_str(&form.constant));
    }
    format!("{} {} 0", parts.join(" + "), op)
}

/// Evaluates a ground theory atom under an assignment for symbolic constants.
/// This is the direct evaluation route used by the oracle; it does not share
/// the classification logic above.
pub fn eval_ground_atom(a: &TheoryAtom, beta: &dyn Fn(&PointName) -> Rat) -> Option<bool> {
    fn value(t: &Term, beta: &dyn Fn(&PointName) -> Rat) -> Option<Rat> {
        match t {
            Term::Num(r) => Some(r.clone()),
            Term::Point(p) => Some(beta(p)),
            Term::Var(_) => None,
            Term::Linear(l) => {
                let mut acc = rat_from_bigint(&l.offset);
                for (c, inner) in &l.terms {
                    acc += rat_from_bigint(c) * value(inner, beta)?;
                }
                Some(acc)
            }
        }
    }
    let l = value(&a.lhs, beta)?;
    let r = value(&a.rhs, beta)?;
    Some(a.op.eval(&l, &r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_frac};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn bound_stays_put() {
        // (z2 >= z1) under {z1 ↦ 2200} → z2 >= 2200
        let a = TheoryAtom::new(Term::Var(1), CmpOp::Ge, Term::Var(0));
        let s = Substitution::singleton(0, Term::int(2200));
        let out = simplify_theory_atom(&a, &s).unwrap();
        assert_eq!(
            out,
            Simplified::Atom(TheoryAtom::new(Term::Var(1), CmpOp::Ge, Term::Num(rat(2200))))
        );
    }

    #[test]
    fn ground_atom_evaluates() {
        // (x1 <= x2) under {x1 ↦ 0, x2 ↦ 13} → TRUE
        let a = TheoryAtom::new(Term::Var(0), CmpOp::Le, Term::Var(1));
        let mut s = Substitution::new();
        s.bind(0, Term::int(0));
        s.bind(1, Term::int(13));
        assert_eq!(simplify_theory_atom(&a, &s).unwrap(), Simplified::True);
    }

    #[test]
    fn reflexive_equality_is_true() {
        let a = TheoryAtom::new(Term::Var(0), CmpOp::Eq, Term::Var(0));
        assert_eq!(simplify_theory_atom(&a, &Substitution::new()).unwrap(), Simplified::True);
    }

    #[test]
    fn constant_on_the_left_flips() {
        // 0 <= x  ⇒  x >= 0
        let a = TheoryAtom::new(Term::int(0), CmpOp::Le, Term::Var(0));
        let out = simplify_theory_atom(&a, &Substitution::new()).unwrap();
        assert_eq!(out.as_var_bound(), Some((0, CmpOp::Ge, rat(0))));
    }

    #[test]
    fn linear_expression_folds() {
        // xh1 = xes - 1 under {xes ↦ 5}  ⇒  xh1 = 4
        let lin = Term::Linear(super::super::LinearExpr {
            terms: vec![(1.into(), Term::Var(1))],
            offset: (-1).into(),
        });
        let a = TheoryAtom::new(Term::Var(0), CmpOp::Eq, lin);
        let s = Substitution::singleton(1, Term::int(5));
        let out = simplify_theory_atom(&a, &s).unwrap();
        assert_eq!(out.as_var_bound(), Some((0, CmpOp::Eq, rat(4))));
    }

    #[test]
    fn repeated_symbol_normalizes_with_division() {
        // x + x <= 5  ⇒  x <= 5/2
        let lin = Term::Linear(super::super::LinearExpr {
            terms: vec![(1.into(), Term::Var(0)), (1.into(), Term::Var(0))],
            offset: 0.into(),
        });
        let a = TheoryAtom::new(lin, CmpOp::Le, Term::int(5));
        let out = simplify_theory_atom(&a, &Substitution::new()).unwrap();
        assert_eq!(out.as_var_bound(), Some((0, CmpOp::Le, rat_frac(5, 2))));
    }

    #[test]
    fn negative_coefficient_mirrors_op() {
        // 1 - x <= 0  ⇒  x >= 1
        let lin = Term::Linear(super::super::LinearExpr {
            terms: vec![((-1).into(), Term::Var(0))],
            offset: 1.into(),
        });
        let a = TheoryAtom::new(lin, CmpOp::Le, Term::int(0));
        let out = simplify_theory_atom(&a, &Substitution::new()).unwrap();
        assert_eq!(out.as_var_bound(), Some((0, CmpOp::Ge, rat(1))));
    }

    #[test]
    fn comparison_canonicalizes() {
        // y > x stays a comparison with positive-left normalization: x < y flipped.
        let a = TheoryAtom::new(Term::Var(1), CmpOp::Gt, Term::Var(0));
        let out = simplify_theory_atom(&a, &Substitution::new()).unwrap();
        assert_eq!(
            out,
            Simplified::Atom(TheoryAtom::new(Term::Var(0), CmpOp::Lt, Term::Var(1)))
        );
    }

    #[test]
    fn difference_constraint_is_rejected() {
        // x - y <= 3 is not a plain comparison.
        let lin = Term::Linear(super::super::LinearExpr {
            terms: vec![(1.into(), Term::Var(0)), ((-1).into(), Term::Var(1))],
            offset: 0.into(),
        });
        let a = TheoryAtom::new(lin, CmpOp::Le, Term::int(3));
        assert!(matches!(
            simplify_theory_atom(&a, &Substitution::new()),
            Err(SimplifyError::NonLinear(_))
        ));
    }

    /// Independent oracle: grounding an atom and simplifying must agree with
    /// direct rational evaluation, across 1000 random atoms.
    #[test]
    fn simplify_agrees_with_direct_evaluation() {
        let mut rng = StdRng::seed_from_u64(0x5eed);
        let ops = [CmpOp::Le, CmpOp::Lt, CmpOp::Ne, CmpOp::Eq, CmpOp::Gt, CmpOp::Ge];
        for _ in 0..1000 {
            let nvars = rng.gen_range(1..=2u32);
            let values: Vec<Rat> = (0..nvars)
                .map(|_| rat_frac(rng.gen_range(-20..=20), rng.gen_range(1..=4)))
                .collect();
            let mut term = |rng: &mut StdRng| -> Term {
                if rng.gen_bool(0.5) {
                    Term::Var(rng.gen_range(0..nvars))
                } else {
                    Term::int(rng.gen_range(-10..=10))
                }
            };
            let lin = |rng: &mut StdRng, term: &mut dyn FnMut(&mut StdRng) -> Term| -> Term {
                let n = rng.gen_range(1..=3);
                Term::Linear(super::super::LinearExpr {
                    terms: (0..n).map(|_| (rng.gen_range(-3..=3i64).into(), term(rng))).collect(),
                    offset: rng.gen_range(-5..=5i64).into(),
                })
            };
            let lhs = if rng.gen_bool(0.5) { term(&mut rng) } else { lin(&mut rng, &mut term) };
            let rhs = if rng.gen_bool(0.5) { term(&mut rng) } else { lin(&mut rng, &mut term) };
            let op = ops[rng.gen_range(0..ops.len())];
            let atom = TheoryAtom::new(lhs, op, rhs);

            let mut s = Substitution::new();
            for (i, v) in values.iter().enumerate() {
                s.bind(i as Var, Term::Num(v.clone()));
            }
            let simplified = simplify_theory_atom(&atom, &s).unwrap();
            let substituted = s.apply_theory(&atom);
            let direct = eval_ground_atom(&substituted, &|_| unreachable!()).unwrap();
            match simplified {
                Simplified::True => assert!(direct),
                Simplified::False => assert!(!direct),
                Simplified::Atom(a) => panic!("fully ground atom left residual {a:?}"),
            }
        }
    }
}
