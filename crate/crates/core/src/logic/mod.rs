//! Core clause representation: terms, theory atoms, free literals, clauses in
//! the `Λ ∥ C` form (a multiset of arithmetic constraints implying a
//! disjunction of free first-order literals), substitutions, and clause
//! abstraction.
//!
//! Variables are interned per clause: a [`Clause`] owns a table of variable
//! names and terms refer to variables by index into that table. This makes
//! renaming-apart, grounding enumeration, and substitution application cheap
//! and deterministic.

mod resolve;
mod simplify;
mod unify;

pub(crate) use resolve::compact;
pub use resolve::{hierarchic_resolve, ResolveError};
pub use simplify::{eval_ground_atom, simplify_theory_atom, LinForm, Simplified, SimplifyError};
pub use unify::mgu;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;

use crate::rat::{rat_str, Rat};

/// Clause-local variable index.
pub type Var = u32;

/// Interned name of a symbolic constant (a test point for an interval).
pub type PointName = Arc<str>;

/// Interned predicate name.
pub type PredName = Arc<str>;

/// Comparison operators of arithmetic atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Le,
    Lt,
    Ne,
    Eq,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn eval(self, lhs: &Rat, rhs: &Rat) -> bool {
        match self {
            CmpOp::Le => lhs <= rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Ne => lhs != rhs,
            CmpOp::Eq => lhs == rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
        }
    }

    /// The complement predicate, e.g. `comp(≤) = >`.
    pub fn complement(self) -> CmpOp {
        match self {
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
        }
    }

    /// The mirrored predicate for swapped sides, e.g. `a ≤ b` iff `b ≥ a`.
    pub fn flip(self) -> CmpOp {
        match self {
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            CmpOp::Eq => CmpOp::Eq,
            CmpOp::Ne => CmpOp::Ne,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Ne => "!=",
            CmpOp::Eq => "=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// A ground value: either an exact rational or a symbolic test-point constant.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroundTerm {
    Num(Rat),
    Point(PointName),
}

impl fmt::Display for GroundTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundTerm::Num(r) => f.write_str(&rat_str(r)),
            GroundTerm::Point(p) => f.write_str(p),
        }
    }
}

/// A sum of integer-coefficient symbols plus an integer offset. Only permitted
/// inside theory atoms; simplification removes it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearExpr {
    /// Coefficient-term pairs; the inner terms are variables, numbers, or
    /// symbolic constants (never nested linear expressions).
    pub terms: Vec<(BigInt, Term)>,
    pub offset: BigInt,
}

/// Terms of the arithmetic sort.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    Num(Rat),
    Point(PointName),
    Linear(LinearExpr),
}

impl Term {
    pub fn int(n: i64) -> Term {
        Term::Num(crate::rat::rat(n))
    }

    pub fn as_ground(&self) -> Option<GroundTerm> {
        match self {
            Term::Num(r) => Some(GroundTerm::Num(r.clone())),
            Term::Point(p) => Some(GroundTerm::Point(p.clone())),
            _ => None,
        }
    }

    pub fn from_ground(g: &GroundTerm) -> Term {
        match g {
            GroundTerm::Num(r) => Term::Num(r.clone()),
            GroundTerm::Point(p) => Term::Point(p.clone()),
        }
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(*v);
                }
            }
            Term::Linear(l) => {
                for (_, t) in &l.terms {
                    t.collect_vars(out);
                }
            }
            _ => {}
        }
    }
}

/// An arithmetic atom `lhs ◁ rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TheoryAtom {
    pub lhs: Term,
    pub op: CmpOp,
    pub rhs: Term,
}

impl TheoryAtom {
    pub fn new(lhs: Term, op: CmpOp, rhs: Term) -> Self {
        TheoryAtom { lhs, op, rhs }
    }

    /// Variable bound `x ◁ c` builder.
    pub fn bound(var: Var, op: CmpOp, c: i64) -> Self {
        TheoryAtom::new(Term::Var(var), op, Term::int(c))
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.lhs.collect_vars(&mut out);
        self.rhs.collect_vars(&mut out);
        out
    }

    /// `comp(A)`: arithmetic literals are closed under negation.
    pub fn complement(&self) -> TheoryAtom {
        TheoryAtom::new(self.lhs.clone(), self.op.complement(), self.rhs.clone())
    }

    /// Destructures a variable bound `x ◁ c`.
    pub fn as_var_bound(&self) -> Option<(Var, CmpOp, Rat)> {
        match (&self.lhs, &self.rhs) {
            (Term::Var(v), Term::Num(c)) => Some((*v, self.op, c.clone())),
            _ => None,
        }
    }
}

/// A free first-order atom `P(t̄)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FreeAtom {
    pub pred: PredName,
    pub args: Vec<Term>,
}

impl FreeAtom {
    pub fn new(pred: &str, args: Vec<Term>) -> Self {
        FreeAtom { pred: Arc::from(pred), args }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for a in &self.args {
            a.collect_vars(&mut out);
        }
        out
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|a| a.as_ground().is_some())
    }
}

/// A signed free atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub positive: bool,
    pub atom: FreeAtom,
}

impl Literal {
    pub fn pos(atom: FreeAtom) -> Self {
        Literal { positive: true, atom }
    }

    pub fn neg(atom: FreeAtom) -> Self {
        Literal { positive: false, atom }
    }
}

/// A clause `Λ ∥ C`: the conjunction of the theory atoms in `constraint`
/// implies the disjunction of the free literals in `literals`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    /// Names of the clause's variables; terms refer to them by index.
    pub vars: Vec<String>,
    /// Λ, a multiset of theory atoms (kept in input order).
    pub constraint: Vec<TheoryAtom>,
    /// C, the free-literal disjunction.
    pub literals: Vec<Literal>,
}

impl Clause {
    pub fn new(vars: Vec<String>, constraint: Vec<TheoryAtom>, literals: Vec<Literal>) -> Self {
        Clause { vars, constraint, literals }
    }

    pub fn var_name(&self, v: Var) -> &str {
        &self.vars[v as usize]
    }

    /// At most one positive free literal.
    pub fn is_horn(&self) -> bool {
        self.literals.iter().filter(|l| l.positive).count() <= 1
    }

    pub fn positive_literals(&self) -> impl Iterator<Item = &Literal> {
        self.literals.iter().filter(|l| l.positive)
    }

    pub fn negative_literals(&self) -> impl Iterator<Item = &Literal> {
        self.literals.iter().filter(|l| !l.positive)
    }

    /// Recognizes a fact: a single positive literal whose arguments are ground
    /// directly or through defining equations `x = c` in Λ, with no other
    /// constraints or literals. Returns the predicate and the ground tuple.
    pub fn as_ground_fact(&self) -> Option<(PredName, Vec<GroundTerm>)> {
        if self.literals.len() != 1 || !self.literals[0].positive {
            return None;
        }
        // Defining equations from the constraint: x = c (or c = x).
        let mut defs: BTreeMap<Var, GroundTerm> = BTreeMap::new();
        for a in &self.constraint {
            let (v, g) = match (&a.lhs, a.op, &a.rhs) {
                (Term::Var(v), CmpOp::Eq, t) | (t, CmpOp::Eq, Term::Var(v)) => {
                    (*v, t.as_ground()?)
                }
                _ => return None,
            };
            if defs.insert(v, g).is_some() {
                return None;
            }
        }
        let atom = &self.literals[0].atom;
        let mut args = Vec::with_capacity(atom.args.len());
        for t in &atom.args {
            match t {
                Term::Var(v) => args.push(defs.remove(v)?),
                other => args.push(other.as_ground()?),
            }
        }
        if !defs.is_empty() {
            return None;
        }
        Some((atom.pred.clone(), args))
    }

    /// Introduces a fresh variable, returning its index.
    pub fn fresh_var(&mut self, hint: &str) -> Var {
        let mut k = 0usize;
        loop {
            let name = format!("{hint}{k}");
            if !self.vars.iter().any(|n| *n == name) {
                self.vars.push(name);
                return (self.vars.len() - 1) as Var;
            }
            k += 1;
        }
    }
}

/// A finite-domain map from variables to terms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn singleton(v: Var, t: Term) -> Self {
        let mut s = Substitution::new();
        s.bind(v, t);
        s
    }

    pub fn get(&self, v: Var) -> Option<&Term> {
        self.map.get(&v)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.map.iter()
    }

    /// Binds `v ↦ t`, keeping the substitution idempotent: `t` is first
    /// resolved through the current map, then the new binding is applied to
    /// every existing codomain term.
    pub fn bind(&mut self, v: Var, t: Term) {
        let t = self.apply_term(&t);
        if t == Term::Var(v) {
            return;
        }
        let single = Substitution { map: BTreeMap::from([(v, t.clone())]) };
        for existing in self.map.values_mut() {
            *existing = single.apply_term(existing);
        }
        self.map.insert(v, t);
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.map.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::Linear(l) => Term::Linear(LinearExpr {
                terms: l.terms.iter().map(|(c, t)| (c.clone(), self.apply_term(t))).collect(),
                offset: l.offset.clone(),
            }),
            other => other.clone(),
        }
    }

    pub fn apply_theory(&self, a: &TheoryAtom) -> TheoryAtom {
        TheoryAtom::new(self.apply_term(&a.lhs), a.op, self.apply_term(&a.rhs))
    }

    pub fn apply_atom(&self, a: &FreeAtom) -> FreeAtom {
        FreeAtom { pred: a.pred.clone(), args: a.args.iter().map(|t| self.apply_term(t)).collect() }
    }

    pub fn apply_literal(&self, l: &Literal) -> Literal {
        Literal { positive: l.positive, atom: self.apply_atom(&l.atom) }
    }
}

/// Replaces every non-variable term occurring in a free atom by a fresh
/// variable, adding the defining equation `x = t` to the constraint. The
/// result is equivalent to the input and contains only variables in its free
/// atoms; already-abstracted clauses are returned unchanged.
pub fn abstract_clause(c: &Clause) -> Clause {
    let mut out = c.clone();
    let mut added: Vec<TheoryAtom> = Vec::new();
    for lit in &mut out.literals {
        for arg in &mut lit.atom.args {
            if !matches!(arg, Term::Var(_)) {
                let taken = std::mem::replace(arg, Term::Var(0));
                let mut k = 0usize;
                let v = loop {
                    let name = format!("v{k}");
                    if !out.vars.iter().any(|n| *n == name) {
                        out.vars.push(name);
                        break (out.vars.len() - 1) as Var;
                    }
                    k += 1;
                };
                *arg = Term::Var(v);
                added.push(TheoryAtom::new(Term::Var(v), CmpOp::Eq, taken));
            }
        }
    }
    out.constraint.extend(added);
    out
}

// ---------------------------------------------------------------------------
// Display
// ---------------------------------------------------------------------------

pub(crate) struct TermDisplay<'a> {
    pub term: &'a Term,
    pub vars: &'a [String],
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.term {
            Term::Var(v) => f.write_str(&self.vars[*v as usize]),
            Term::Num(r) => f.write_str(&rat_str(r)),
            Term::Point(p) => f.write_str(p),
            Term::Linear(l) => {
                use num_traits::{One, Signed, Zero};
                let mut first = true;
                for (c, t) in &l.terms {
                    let inner = TermDisplay { term: t, vars: self.vars };
                    if first {
                        if c.is_one() {
                            write!(f, "{inner}")?;
                        } else if (-c).is_one() {
                            write!(f, "-{inner}")?;
                        } else {
                            write!(f, "{c} {inner}")?;
                        }
                        first = false;
                    } else if c.is_negative() {
                        if (-c).is_one() {
                            write!(f, " - {inner}")?;
                        } else {
                            write!(f, " - {} {inner}", -c)?;
                        }
                    } else if c.is_one() {
                        write!(f, " + {inner}")?;
                    } else {
                        write!(f, " + {c} {inner}")?;
                    }
                }
                if first {
                    write!(f, "{}", l.offset)?;
                } else if !l.offset.is_zero() {
                    if l.offset.is_negative() {
                        write!(f, " - {}", -&l.offset)?;
                    } else {
                        write!(f, " + {}", l.offset)?;
                    }
                }
                Ok(())
            }
        }
    }
}

pub(crate) struct AtomDisplay<'a> {
    pub atom: &'a FreeAtom,
    pub vars: &'a [String],
}

impl fmt::Display for AtomDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.atom.pred)?;
        if !self.atom.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.atom.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}", TermDisplay { term: a, vars: self.vars })?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

pub(crate) struct TheoryDisplay<'a> {
    pub atom: &'a TheoryAtom,
    pub vars: &'a [String],
}

impl fmt::Display for TheoryDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}",
            TermDisplay { term: &self.atom.lhs, vars: self.vars },
            self.atom.op,
            TermDisplay { term: &self.atom.rhs, vars: self.vars }
        )
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.constraint.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", TheoryDisplay { atom: a, vars: &self.vars })?;
        }
        if !self.constraint.is_empty() {
            f.write_str(" || ")?;
        } else {
            f.write_str("|| ")?;
        }
        if self.literals.is_empty() {
            f.write_str("bottom")?;
        }
        for (i, l) in self.literals.iter().enumerate() {
            if i > 0 {
                f.write_str(" \\/ ")?;
            }
            if !l.positive {
                f.write_str("!")?;
            }
            write!(f, "{}", AtomDisplay { atom: &l.atom, vars: &self.vars })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(pred: &str, args: Vec<Term>) -> FreeAtom {
        FreeAtom::new(pred, args)
    }

    #[test]
    fn abstraction_of_fact() {
        // P(3,5) becomes v0 = 3, v1 = 5 || P(v0, v1).
        let c = Clause::new(vec![], vec![], vec![Literal::pos(atom("P", vec![Term::int(3), Term::int(5)]))]);
        let a = abstract_clause(&c);
        assert_eq!(a.vars.len(), 2);
        assert_eq!(a.constraint.len(), 2);
        assert_eq!(a.constraint[0], TheoryAtom::new(Term::Var(0), CmpOp::Eq, Term::int(3)));
        assert_eq!(a.constraint[1], TheoryAtom::new(Term::Var(1), CmpOp::Eq, Term::int(5)));
        assert_eq!(a.literals[0].atom.args, vec![Term::Var(0), Term::Var(1)]);
    }

    #[test]
    fn abstraction_leaves_abstracted_clause_unchanged() {
        // x <= 1 || P(x) is already abstracted.
        let c = Clause::new(
            vec!["x".into()],
            vec![TheoryAtom::bound(0, CmpOp::Le, 1)],
            vec![Literal::pos(atom("P", vec![Term::Var(0)]))],
        );
        assert_eq!(abstract_clause(&c), c);
    }

    #[test]
    fn abstraction_of_mixed_clause() {
        // Q(2) \/ !R(x) becomes v0 = 2 || Q(v0) \/ !R(x).
        let c = Clause::new(
            vec!["x".into()],
            vec![],
            vec![
                Literal::pos(atom("Q", vec![Term::int(2)])),
                Literal::neg(atom("R", vec![Term::Var(0)])),
            ],
        );
        let a = abstract_clause(&c);
        assert_eq!(a.vars.len(), 2);
        assert_eq!(a.constraint, vec![TheoryAtom::new(Term::Var(1), CmpOp::Eq, Term::int(2))]);
        assert_eq!(a.literals[0].atom.args, vec![Term::Var(1)]);
        assert_eq!(a.literals[1].atom.args, vec![Term::Var(0)]);
    }

    #[test]
    fn abstraction_is_idempotent() {
        let c = Clause::new(
            vec!["x".into()],
            vec![],
            vec![
                Literal::pos(atom("Q", vec![Term::int(2), Term::Var(0)])),
                Literal::neg(atom("R", vec![Term::int(-1)])),
            ],
        );
        let once = abstract_clause(&c);
        let twice = abstract_clause(&once);
        assert_eq!(once, twice);
    }

    #[test]
    fn ground_fact_recognition() {
        let c = Clause::new(vec![], vec![], vec![Literal::pos(atom("P", vec![Term::int(3), Term::int(5)]))]);
        let a = abstract_clause(&c);
        let (pred, args) = a.as_ground_fact().expect("fact");
        assert_eq!(&*pred, "P");
        assert_eq!(args, vec![GroundTerm::Num(crate::rat::rat(3)), GroundTerm::Num(crate::rat::rat(5))]);

        // Not a fact: has a variable not fixed by a defining equation.
        let open = Clause::new(
            vec!["x".into()],
            vec![TheoryAtom::bound(0, CmpOp::Le, 1)],
            vec![Literal::pos(atom("P", vec![Term::Var(0)]))],
        );
        assert!(open.as_ground_fact().is_none());
    }

    #[test]
    fn substitution_is_idempotent() {
        let mut s = Substitution::new();
        s.bind(0, Term::Var(1));
        s.bind(1, Term::int(3));
        // 0 must now resolve straight to 3.
        assert_eq!(s.apply_term(&Term::Var(0)), Term::int(3));
        let reapplied = s.apply_term(&s.apply_term(&Term::Var(0)));
        assert_eq!(reapplied, Term::int(3));
    }

    #[test]
    fn clause_display_round_shape() {
        let c = Clause::new(
            vec!["x".into()],
            vec![TheoryAtom::bound(0, CmpOp::Gt, 1)],
            vec![Literal::neg(atom("P", vec![Term::Var(0)]))],
        );
        assert_eq!(c.to_string(), "x > 1 || !P(x)");
    }
}
