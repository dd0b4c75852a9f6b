//! Problem representation and the text format: clause sets in `Λ ∥ C` form,
//! facts, optional arity declarations, and one optional conjecture.

mod parser;

pub use parser::{parse_problem, ParseError};

use std::collections::BTreeMap;
use std::fmt;

use crate::logic::{
    AtomDisplay, Clause, FreeAtom, Literal, PredName, TheoryAtom, TheoryDisplay, Var,
};

/// A parsed problem: the clause set N (abstracted), predicate arities, and an
/// optional conjecture. Input clause sets are pure by construction: the text
/// format has no syntax for free arithmetic constants, only integers and
/// variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub clauses: Vec<Clause>,
    pub conjecture: Option<Conjecture>,
    pub declarations: BTreeMap<PredName, usize>,
}

impl Problem {
    pub fn is_horn(&self) -> bool {
        self.clauses.iter().all(|c| c.is_horn())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConjectureKind {
    Universal,
    Existential,
}

/// A quantified conjecture with a positive-by-default body. Free atoms carry
/// a sign so that the grounding-hammer path can also handle non-positive
/// bodies; the Datalog path rejects negative free atoms during flattening.
#[derive(Debug, Clone, PartialEq)]
pub struct Conjecture {
    pub kind: ConjectureKind,
    pub vars: Vec<String>,
    pub body: Formula,
}

/// Quantifier-free formula tree over free literals and theory atoms.
/// `Guarded(Λ, φ)` keeps the `Λ ∥ φ` input shape and means `Λ → φ`,
/// equivalently `comp(Λ1) ∨ ... ∨ comp(Λk) ∨ φ`.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Atom(Literal),
    Theory(Vec<TheoryAtom>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Guarded(Vec<TheoryAtom>, Box<Formula>),
}

impl Formula {
    /// Variables in first-occurrence order.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        let mut push = |vs: Vec<Var>| {
            for v in vs {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        };
        match self {
            Formula::Atom(l) => push(l.atom.vars()),
            Formula::Theory(atoms) => {
                for a in atoms {
                    push(a.vars());
                }
            }
            Formula::And(fs) | Formula::Or(fs) => {
                for f in fs {
                    f.collect_vars(out);
                }
            }
            Formula::Guarded(atoms, f) => {
                for a in atoms {
                    let vs = a.vars();
                    for v in vs {
                        if !out.contains(&v) {
                            out.push(v);
                        }
                    }
                }
                f.collect_vars(out);
            }
        }
    }

    /// True when every free atom occurs positively.
    pub fn is_positive(&self) -> bool {
        match self {
            Formula::Atom(l) => l.positive,
            Formula::Theory(_) => true,
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(|f| f.is_positive()),
            Formula::Guarded(_, f) => f.is_positive(),
        }
    }

    pub fn free_atoms(&self) -> Vec<&FreeAtom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a FreeAtom>) {
        match self {
            Formula::Atom(l) => out.push(&l.atom),
            Formula::Theory(_) => {}
            Formula::And(fs) | Formula::Or(fs) => {
                for f in fs {
                    f.collect_atoms(out);
                }
            }
            Formula::Guarded(_, f) => f.collect_atoms(out),
        }
    }

    /// All theory atoms of the formula, including guards.
    pub fn theory_atoms(&self) -> Vec<&TheoryAtom> {
        let mut out = Vec::new();
        self.collect_theory(&mut out);
        out
    }

    fn collect_theory<'a>(&'a self, out: &mut Vec<&'a TheoryAtom>) {
        match self {
            Formula::Atom(_) => {}
            Formula::Theory(atoms) => out.extend(atoms.iter()),
            Formula::And(fs) | Formula::Or(fs) => {
                for f in fs {
                    f.collect_theory(out);
                }
            }
            Formula::Guarded(atoms, f) => {
                out.extend(atoms.iter());
                f.collect_theory(out);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Printing (the inverse of parsing; `parse(print(p)) == p` on parsed input)
// ---------------------------------------------------------------------------

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (pred, arity) in &self.declarations {
            writeln!(f, "pred {pred}/{arity}.")?;
        }
        for c in &self.clauses {
            if let Some((pred, args)) = c.as_ground_fact() {
                write!(f, "fact {pred}")?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{a}")?;
                    }
                    write!(f, ")")?;
                }
                writeln!(f, ".")?;
            } else {
                writeln!(f, "clause {c}.")?;
            }
        }
        if let Some(conj) = &self.conjecture {
            writeln!(f, "{conj}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Conjecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ConjectureKind::Universal => "forall",
            ConjectureKind::Existential => "exists",
        };
        write!(f, "conjecture {kind} ")?;
        for (i, v) in self.vars.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ". ")?;
        write_formula(f, &self.body, &self.vars, false)?;
        write!(f, ".")
    }
}

fn write_formula(
    f: &mut fmt::Formatter<'_>,
    formula: &Formula,
    vars: &[String],
    nested: bool,
) -> fmt::Result {
    match formula {
        Formula::Atom(l) => {
            if !l.positive {
                write!(f, "!")?;
            }
            write!(f, "{}", AtomDisplay { atom: &l.atom, vars })
        }
        Formula::Theory(atoms) => {
            if atoms.len() == 1 {
                write!(f, "{}", TheoryDisplay { atom: &atoms[0], vars })
            } else {
                write!(f, "(")?;
                for (i, a) in atoms.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", TheoryDisplay { atom: a, vars })?;
                }
                write!(f, ")")
            }
        }
        Formula::And(fs) => {
            if nested {
                write!(f, "(")?;
            }
            for (i, sub) in fs.iter().enumerate() {
                if i > 0 {
                    write!(f, " /\\ ")?;
                }
                write_formula(f, sub, vars, true)?;
            }
            if nested {
                write!(f, ")")?;
            }
            Ok(())
        }
        Formula::Or(fs) => {
            if nested {
                write!(f, "(")?;
            }
            for (i, sub) in fs.iter().enumerate() {
                if i > 0 {
                    write!(f, " \\/ ")?;
                }
                // And binds tighter than Or, so only non-And children need
                // their own parens.
                write_formula(f, sub, vars, !matches!(sub, Formula::And(_)))?;
            }
            if nested {
                write!(f, ")")?;
            }
            Ok(())
        }
        Formula::Guarded(guard, inner) => {
            write!(f, "(")?;
            for (i, a) in guard.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", TheoryDisplay { atom: a, vars })?;
            }
            write!(f, " || ")?;
            write_formula(f, inner, vars, false)?;
            write!(f, ")")
        }
    }
}
