//! Hand-rolled tokenizer and recursive-descent parser for the problem format.
//!
//! Statements end with `.`; `%` starts a line comment. Predicates begin with
//! an uppercase letter, variables with a lowercase letter. Clauses take the
//! form `clause Λ || C.` where Λ is a comma-separated list of arithmetic
//! atoms and C is a `\/`-disjunction of literals, a `( , )` disjunction
//! group, or an implication `B1, ..., Bn -> H`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use super::{Conjecture, ConjectureKind, Formula, Problem};
use crate::logic::{
    abstract_clause, Clause, CmpOp, FreeAtom, LinearExpr, Literal, PredName, Term, TheoryAtom, Var,
};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("arity mismatch at {line}:{col}: {pred} used with {found} arguments, expected {expected}")]
    ArityMismatch { line: usize, col: usize, pred: String, expected: usize, found: usize },
    #[error("conjecture is not positive at {line}:{col}: {msg}")]
    NonPositiveConjecture { line: usize, col: usize, msg: String },
}

impl ParseError {
    fn syntax(pos: Pos, msg: impl Into<String>) -> Self {
        ParseError::Syntax { line: pos.line, col: pos.col, msg: msg.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    UIdent(String),
    LIdent(String),
    Int(BigInt),
    Op(CmpOp),
    Bar,       // ||
    OrSep,     // \/
    AndSep,    // /\
    Arrow,     // ->
    LParen,
    RParen,
    Comma,
    Dot,
    Bang,
    Plus,
    Minus,
    Slash,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::UIdent(s) | Tok::LIdent(s) => write!(f, "{s}"),
            Tok::Int(n) => write!(f, "{n}"),
            Tok::Op(op) => write!(f, "{op}"),
            Tok::Bar => write!(f, "||"),
            Tok::OrSep => write!(f, "\\/"),
            Tok::AndSep => write!(f, "/\\"),
            Tok::Arrow => write!(f, "->"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::Comma => write!(f, ","),
            Tok::Dot => write!(f, "."),
            Tok::Bang => write!(f, "!"),
            Tok::Plus => write!(f, "+"),
            Tok::Minus => write!(f, "-"),
            Tok::Slash => write!(f, "/"),
        }
    }
}

const RESERVED: &[&str] = &["clause", "fact", "conjecture", "forall", "exists", "pred", "bottom"];

fn tokenize(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1usize;
    let mut col = 1usize;
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        match c {
            '%' => {
                while let Some(&c) = chars.peek() {
                    bump(&mut chars);
                    if c == '\n' {
                        break;
                    }
                }
            }
            c if c.is_whitespace() => {
                bump(&mut chars);
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() {
                        s.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                out.push((Tok::Int(s.parse().unwrap()), pos));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        s.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                let tok = if s.starts_with(|c: char| c.is_ascii_uppercase()) {
                    Tok::UIdent(s)
                } else {
                    Tok::LIdent(s)
                };
                out.push((tok, pos));
            }
            '<' => {
                bump(&mut chars);
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    out.push((Tok::Op(CmpOp::Le), pos));
                } else {
                    out.push((Tok::Op(CmpOp::Lt), pos));
                }
            }
            '>' => {
                bump(&mut chars);
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    out.push((Tok::Op(CmpOp::Ge), pos));
                } else {
                    out.push((Tok::Op(CmpOp::Gt), pos));
                }
            }
            '=' => {
                bump(&mut chars);
                out.push((Tok::Op(CmpOp::Eq), pos));
            }
            '!' => {
                bump(&mut chars);
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    out.push((Tok::Op(CmpOp::Ne), pos));
                } else {
                    out.push((Tok::Bang, pos));
                }
            }
            '|' => {
                bump(&mut chars);
                if chars.peek() == Some(&'|') {
                    bump(&mut chars);
                    out.push((Tok::Bar, pos));
                } else {
                    return Err(ParseError::syntax(pos, "expected ||"));
                }
            }
            '\\' => {
                bump(&mut chars);
                if chars.peek() == Some(&'/') {
                    bump(&mut chars);
                    out.push((Tok::OrSep, pos));
                } else {
                    return Err(ParseError::syntax(pos, "expected \\/"));
                }
            }
            '/' => {
                bump(&mut chars);
                if chars.peek() == Some(&'\\') {
                    bump(&mut chars);
                    out.push((Tok::AndSep, pos));
                } else {
                    out.push((Tok::Slash, pos));
                }
            }
            '-' => {
                bump(&mut chars);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    out.push((Tok::Arrow, pos));
                } else {
                    out.push((Tok::Minus, pos));
                }
            }
            '+' => {
                bump(&mut chars);
                out.push((Tok::Plus, pos));
            }
            '(' => {
                bump(&mut chars);
                out.push((Tok::LParen, pos));
            }
            ')' => {
                bump(&mut chars);
                out.push((Tok::RParen, pos));
            }
            ',' => {
                bump(&mut chars);
                out.push((Tok::Comma, pos));
            }
            '.' => {
                bump(&mut chars);
                out.push((Tok::Dot, pos));
            }
            other => {
                return Err(ParseError::syntax(pos, format!("unexpected character {other:?}")));
            }
        }
    }
    Ok(out)
}

/// Clause- or conjecture-local variable interner.
struct VarScope {
    names: Vec<String>,
    /// When closed, unknown variables are errors instead of fresh entries.
    closed: bool,
}

impl VarScope {
    fn open() -> Self {
        VarScope { names: Vec::new(), closed: false }
    }

    fn resolve(&mut self, name: &str, pos: Pos) -> Result<Var, ParseError> {
        if let Some(i) = self.names.iter().position(|n| n == name) {
            return Ok(i as Var);
        }
        if self.closed {
            return Err(ParseError::syntax(pos, format!("unknown conjecture variable {name}")));
        }
        self.names.push(name.to_string());
        Ok((self.names.len() - 1) as Var)
    }
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    arities: BTreeMap<PredName, usize>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks
            .get(self.at)
            .or_else(|| self.toks.last())
            .map(|(_, p)| *p)
            .unwrap_or(Pos { line: 1, col: 1 })
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(t, _)| t.clone());
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        let pos = self.pos();
        match self.next() {
            Some(t) if t == tok => Ok(()),
            Some(t) => Err(ParseError::syntax(pos, format!("expected {tok}, found {t}"))),
            None => Err(ParseError::syntax(pos, format!("expected {tok}, found end of input"))),
        }
    }

    fn check_arity(&mut self, pred: &PredName, found: usize, pos: Pos) -> Result<(), ParseError> {
        match self.arities.get(pred) {
            Some(&expected) if expected != found => Err(ParseError::ArityMismatch {
                line: pos.line,
                col: pos.col,
                pred: pred.to_string(),
                expected,
                found,
            }),
            Some(_) => Ok(()),
            None => {
                self.arities.insert(pred.clone(), found);
                Ok(())
            }
        }
    }

    /// Looks ahead for a token at parenthesis depth 0, stopping at `.` or a
    /// depth-0 closing paren.
    fn lookahead_at_depth0(&self, wanted: &Tok) -> bool {
        let mut depth = 0i32;
        for (t, _) in &self.toks[self.at..] {
            match t {
                t if t == wanted && depth == 0 => return true,
                Tok::LParen => depth += 1,
                Tok::RParen => {
                    if depth == 0 {
                        return false;
                    }
                    depth -= 1;
                }
                Tok::Dot => return false,
                _ => {}
            }
        }
        false
    }

    // -- terms ------------------------------------------------------------

    /// A linear expression: `[-] prim ((+|-) prim)*` with prim an integer or
    /// a variable.
    fn linexpr(&mut self, scope: &mut VarScope) -> Result<Term, ParseError> {
        let mut terms: Vec<(BigInt, Term)> = Vec::new();
        let mut offset = BigInt::from(0);
        let mut sign = BigInt::from(1);
        if self.peek() == Some(&Tok::Minus) {
            self.next();
            sign = BigInt::from(-1);
        }
        loop {
            let pos = self.pos();
            match self.next() {
                Some(Tok::Int(n)) => offset += &sign * n,
                Some(Tok::LIdent(name)) => {
                    if RESERVED.contains(&name.as_str()) {
                        return Err(ParseError::syntax(pos, format!("{name} is a reserved word")));
                    }
                    let v = scope.resolve(&name, pos)?;
                    terms.push((sign.clone(), Term::Var(v)));
                }
                other => {
                    return Err(ParseError::syntax(
                        pos,
                        format!(
                            "expected integer or variable, found {}",
                            other.map(|t| t.to_string()).unwrap_or_else(|| "end of input".into())
                        ),
                    ));
                }
            }
            match self.peek() {
                Some(Tok::Plus) => {
                    self.next();
                    sign = BigInt::from(1);
                }
                Some(Tok::Minus) => {
                    self.next();
                    sign = BigInt::from(-1);
                }
                _ => break,
            }
        }
        use num_traits::Zero;
        Ok(match (terms.len(), offset.is_zero()) {
            (0, _) => Term::Num(crate::rat::rat_from_bigint(&offset)),
            (1, true) if terms[0].0 == BigInt::from(1) => terms.remove(0).1,
            _ => Term::Linear(LinearExpr { terms, offset }),
        })
    }

    fn theory_atom(&mut self, scope: &mut VarScope) -> Result<TheoryAtom, ParseError> {
        let lhs = self.linexpr(scope)?;
        let pos = self.pos();
        let op = match self.next() {
            Some(Tok::Op(op)) => op,
            other => {
                return Err(ParseError::syntax(
                    pos,
                    format!(
                        "expected comparison operator, found {}",
                        other.map(|t| t.to_string()).unwrap_or_else(|| "end of input".into())
                    ),
                ));
            }
        };
        let rhs = self.linexpr(scope)?;
        Ok(TheoryAtom::new(lhs, op, rhs))
    }

    fn theory_list(&mut self, scope: &mut VarScope) -> Result<Vec<TheoryAtom>, ParseError> {
        let mut atoms = vec![self.theory_atom(scope)?];
        while self.peek() == Some(&Tok::Comma) {
            self.next();
            atoms.push(self.theory_atom(scope)?);
        }
        Ok(atoms)
    }

    /// A free atom `P(arg, ...)`; arguments are variables or integers.
    fn free_atom(&mut self, scope: &mut VarScope) -> Result<FreeAtom, ParseError> {
        let pos = self.pos();
        let pred = match self.next() {
            Some(Tok::UIdent(name)) => PredName::from(name.as_str()),
            other => {
                return Err(ParseError::syntax(
                    pos,
                    format!(
                        "expected predicate, found {}",
                        other.map(|t| t.to_string()).unwrap_or_else(|| "end of input".into())
                    ),
                ));
            }
        };
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.next();
            loop {
                let apos = self.pos();
                let arg = match self.next() {
                    Some(Tok::LIdent(name)) => {
                        if RESERVED.contains(&name.as_str()) {
                            return Err(ParseError::syntax(apos, format!("{name} is a reserved word")));
                        }
                        Term::Var(scope.resolve(&name, apos)?)
                    }
                    Some(Tok::Int(n)) => Term::Num(crate::rat::rat_from_bigint(&n)),
                    Some(Tok::Minus) => match self.next() {
                        Some(Tok::Int(n)) => Term::Num(crate::rat::rat_from_bigint(&(-n))),
                        other => {
                            return Err(ParseError::syntax(
                                apos,
                                format!(
                                    "expected integer after -, found {}",
                                    other.map(|t| t.to_string()).unwrap_or_else(|| "end of input".into())
                                ),
                            ));
                        }
                    },
                    other => {
                        return Err(ParseError::syntax(
                            apos,
                            format!(
                                "expected argument, found {}",
                                other.map(|t| t.to_string()).unwrap_or_else(|| "end of input".into())
                            ),
                        ));
                    }
                };
                args.push(arg);
                match self.next() {
                    Some(Tok::Comma) => {}
                    Some(Tok::RParen) => break,
                    other => {
                        return Err(ParseError::syntax(
                            apos,
                            format!(
                                "expected , or ), found {}",
                                other.map(|t| t.to_string()).unwrap_or_else(|| "end of input".into())
                            ),
                        ));
                    }
                }
            }
        }
        self.check_arity(&pred, args.len(), pos)?;
        Ok(FreeAtom { pred, args })
    }

    fn literal(&mut self, scope: &mut VarScope) -> Result<Literal, ParseError> {
        if self.peek() == Some(&Tok::Bang) {
            self.next();
            Ok(Literal::neg(self.free_atom(scope)?))
        } else {
            Ok(Literal::pos(self.free_atom(scope)?))
        }
    }

    // -- clauses ----------------------------------------------------------

    fn clause_body(&mut self, scope: &mut VarScope) -> Result<Clause, ParseError> {
        let constraint = if self.lookahead_at_depth0(&Tok::Bar) {
            let atoms = self.theory_list(scope)?;
            self.expect(Tok::Bar)?;
            atoms
        } else {
            Vec::new()
        };
        let literals = if self.lookahead_at_depth0(&Tok::Arrow) {
            // Implication form: B1, ..., Bn -> H with negative body literals.
            let mut lits = Vec::new();
            loop {
                let atom = self.free_atom(scope)?;
                lits.push(Literal::neg(atom));
                match self.next() {
                    Some(Tok::Comma) => {}
                    Some(Tok::Arrow) => break,
                    other => {
                        let pos = self.pos();
                        return Err(ParseError::syntax(
                            pos,
                            format!(
                                "expected , or ->, found {}",
                                other.map(|t| t.to_string()).unwrap_or_else(|| "end of input".into())
                            ),
                        ));
                    }
                }
            }
            if self.peek() == Some(&Tok::LIdent("bottom".into())) {
                self.next();
            } else {
                lits.push(Literal::pos(self.free_atom(scope)?));
            }
            lits
        } else if self.peek() == Some(&Tok::LIdent("bottom".into())) {
            self.next();
            Vec::new()
        } else {
            // Disjunction: L1 \/ L2 ... where a parenthesized comma group
            // (L1, L2, ...) is also a disjunction of literals.
            let mut lits = Vec::new();
            loop {
                if self.peek() == Some(&Tok::LParen) {
                    self.next();
                    loop {
                        lits.push(self.literal(scope)?);
                        match self.next() {
                            Some(Tok::Comma) => {}
                            Some(Tok::RParen) => break,
                            other => {
                                let pos = self.pos();
                                return Err(ParseError::syntax(
                                    pos,
                                    format!(
                                        "expected , or ), found {}",
                                        other.map(|t| t.to_string()).unwrap_or_else(|| "end of input".into())
                                    ),
                                ));
                            }
                        }
                    }
                } else {
                    lits.push(self.literal(scope)?);
                }
                if self.peek() == Some(&Tok::OrSep) {
                    self.next();
                } else {
                    break;
                }
            }
            lits
        };
        Ok(Clause::new(Vec::new(), constraint, literals))
    }

    // -- conjecture formulas ------------------------------------------------

    fn formula(&mut self, scope: &mut VarScope) -> Result<Formula, ParseError> {
        let mut parts = vec![self.and_formula(scope)?];
        while self.peek() == Some(&Tok::OrSep) {
            self.next();
            parts.push(self.and_formula(scope)?);
        }
        Ok(if parts.len() == 1 { parts.remove(0) } else { Formula::Or(parts) })
    }

    fn and_formula(&mut self, scope: &mut VarScope) -> Result<Formula, ParseError> {
        let mut parts = vec![self.primary_formula(scope)?];
        while self.peek() == Some(&Tok::AndSep) {
            self.next();
            parts.push(self.primary_formula(scope)?);
        }
        Ok(if parts.len() == 1 { parts.remove(0) } else { Formula::And(parts) })
    }

    fn primary_formula(&mut self, scope: &mut VarScope) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::LParen) => {
                self.next();
                let f = self.group(scope)?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Some(Tok::Bang) => {
                let pos = self.pos();
                self.next();
                match self.peek() {
                    Some(Tok::UIdent(_)) => Ok(Formula::Atom(Literal::neg(self.free_atom(scope)?))),
                    // A negated theory atom is complemented on the spot.
                    Some(Tok::LIdent(_)) | Some(Tok::Int(_)) | Some(Tok::Minus) => {
                        let a = self.theory_atom(scope)?;
                        Ok(Formula::Theory(vec![a.complement()]))
                    }
                    Some(Tok::LParen) => {
                        self.next();
                        let atoms = self.theory_list(scope)?;
                        self.expect(Tok::RParen)?;
                        // ¬(a ∧ b) = comp(a) ∨ comp(b)
                        let comps: Vec<Formula> =
                            atoms.iter().map(|a| Formula::Theory(vec![a.complement()])).collect();
                        Ok(if comps.len() == 1 {
                            comps.into_iter().next().unwrap()
                        } else {
                            Formula::Or(comps)
                        })
                    }
                    _ => Err(ParseError::NonPositiveConjecture {
                        line: pos.line,
                        col: pos.col,
                        msg: "negation is only supported on atoms".into(),
                    }),
                }
            }
            Some(Tok::UIdent(_)) => Ok(Formula::Atom(Literal::pos(self.free_atom(scope)?))),
            Some(Tok::LIdent(_)) | Some(Tok::Int(_)) | Some(Tok::Minus) => {
                Ok(Formula::Theory(vec![self.theory_atom(scope)?]))
            }
            _ => {
                let pos = self.pos();
                Err(ParseError::syntax(pos, "expected formula"))
            }
        }
    }

    /// Inside parentheses: either `Λ || φ`, a bare theory-atom list, or a
    /// nested formula.
    fn group(&mut self, scope: &mut VarScope) -> Result<Formula, ParseError> {
        if self.lookahead_at_depth0(&Tok::Bar) {
            let guard = self.theory_list(scope)?;
            self.expect(Tok::Bar)?;
            let body = self.formula(scope)?;
            return Ok(Formula::Guarded(guard, Box::new(body)));
        }
        // Distinguish a comma-separated theory list from a formula: a theory
        // list can only start with a lowercase ident, integer, or minus, and
        // continues with commas.
        let starts_theory = matches!(self.peek(), Some(Tok::LIdent(_)) | Some(Tok::Int(_)) | Some(Tok::Minus));
        if starts_theory {
            let save = self.at;
            let atom = self.theory_atom(scope)?;
            if self.peek() == Some(&Tok::Comma) {
                self.next();
                let mut atoms = vec![atom];
                atoms.extend(self.theory_list(scope)?);
                return Ok(Formula::Theory(atoms));
            }
            if self.peek() == Some(&Tok::RParen) {
                return Ok(Formula::Theory(vec![atom]));
            }
            // Part of a larger formula; restart.
            self.at = save;
        }
        self.formula(scope)
    }

    // -- statements ---------------------------------------------------------

    fn statement(&mut self, problem: &mut ProblemBuilder) -> Result<(), ParseError> {
        let pos = self.pos();
        match self.next() {
            Some(Tok::LIdent(kw)) if kw == "pred" => {
                let ppos = self.pos();
                let pred = match self.next() {
                    Some(Tok::UIdent(name)) => PredName::from(name.as_str()),
                    other => {
                        return Err(ParseError::syntax(
                            ppos,
                            format!(
                                "expected predicate name, found {}",
                                other.map(|t| t.to_string()).unwrap_or_else(|| "end of input".into())
                            ),
                        ));
                    }
                };
                self.expect(Tok::Slash)?;
                let apos = self.pos();
                let arity = match self.next() {
                    Some(Tok::Int(n)) => n.to_string().parse::<usize>().map_err(|_| {
                        ParseError::syntax(apos, "arity out of range")
                    })?,
                    other => {
                        return Err(ParseError::syntax(
                            apos,
                            format!(
                                "expected arity, found {}",
                                other.map(|t| t.to_string()).unwrap_or_else(|| "end of input".into())
                            ),
                        ));
                    }
                };
                if let Some(&existing) = self.arities.get(&pred) {
                    if existing != arity {
                        return Err(ParseError::ArityMismatch {
                            line: apos.line,
                            col: apos.col,
                            pred: pred.to_string(),
                            expected: existing,
                            found: arity,
                        });
                    }
                }
                self.arities.insert(pred.clone(), arity);
                problem.declared.insert(pred, arity);
                self.expect(Tok::Dot)?;
            }
            Some(Tok::LIdent(kw)) if kw == "clause" => {
                let mut scope = VarScope::open();
                let mut clause = self.clause_body(&mut scope)?;
                clause.vars = scope.names;
                self.expect(Tok::Dot)?;
                problem.clauses.push(abstract_clause(&clause));
            }
            Some(Tok::LIdent(kw)) if kw == "fact" => {
                let mut scope = VarScope::open();
                let fpos = self.pos();
                let atom = self.free_atom(&mut scope)?;
                if !scope.names.is_empty() {
                    return Err(ParseError::syntax(fpos, "facts must be ground"));
                }
                self.expect(Tok::Dot)?;
                let clause = Clause::new(Vec::new(), Vec::new(), vec![Literal::pos(atom)]);
                problem.clauses.push(abstract_clause(&clause));
            }
            Some(Tok::LIdent(kw)) if kw == "conjecture" => {
                if problem.conjecture.is_some() {
                    return Err(ParseError::syntax(pos, "multiple conjectures"));
                }
                let kpos = self.pos();
                let kind = match self.next() {
                    Some(Tok::LIdent(k)) if k == "forall" => ConjectureKind::Universal,
                    Some(Tok::LIdent(k)) if k == "exists" => ConjectureKind::Existential,
                    other => {
                        return Err(ParseError::syntax(
                            kpos,
                            format!(
                                "expected forall or exists, found {}",
                                other.map(|t| t.to_string()).unwrap_or_else(|| "end of input".into())
                            ),
                        ));
                    }
                };
                let mut scope = VarScope::open();
                loop {
                    let vpos = self.pos();
                    match self.next() {
                        Some(Tok::LIdent(name)) => {
                            if RESERVED.contains(&name.as_str()) {
                                return Err(ParseError::syntax(vpos, format!("{name} is a reserved word")));
                            }
                            scope.resolve(&name, vpos)?;
                        }
                        other => {
                            return Err(ParseError::syntax(
                                vpos,
                                format!(
                                    "expected variable, found {}",
                                    other.map(|t| t.to_string()).unwrap_or_else(|| "end of input".into())
                                ),
                            ));
                        }
                    }
                    match self.next() {
                        Some(Tok::Comma) => {}
                        Some(Tok::Dot) => break,
                        other => {
                            let p = self.pos();
                            return Err(ParseError::syntax(
                                p,
                                format!(
                                    "expected , or ., found {}",
                                    other.map(|t| t.to_string()).unwrap_or_else(|| "end of input".into())
                                ),
                            ));
                        }
                    }
                }
                scope.closed = true;
                let bpos = self.pos();
                let body = self.formula(&mut scope)?;
                self.expect(Tok::Dot)?;
                let declared: Vec<Var> = (0..scope.names.len() as Var).collect();
                let used = body.vars();
                for v in &declared {
                    if !used.contains(v) {
                        return Err(ParseError::syntax(
                            bpos,
                            format!("conjecture variable {} does not occur in the body", scope.names[*v as usize]),
                        ));
                    }
                }
                problem.conjecture = Some(Conjecture { kind, vars: scope.names, body });
            }
            Some(other) => {
                return Err(ParseError::syntax(
                    pos,
                    format!("expected clause, fact, pred, or conjecture, found {other}"),
                ));
            }
            None => unreachable!("statement called at end of input"),
        }
        Ok(())
    }
}

#[derive(Default)]
struct ProblemBuilder {
    clauses: Vec<Clause>,
    conjecture: Option<Conjecture>,
    declared: BTreeMap<PredName, usize>,
}

/// Parses a problem; clauses are returned abstracted.
pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let toks = tokenize(text)?;
    let mut parser = Parser { toks, at: 0, arities: BTreeMap::new() };
    let mut builder = ProblemBuilder::default();
    while parser.peek().is_some() {
        parser.statement(&mut builder)?;
    }
    Ok(Problem {
        clauses: builder.clauses,
        conjecture: builder.conjecture,
        declarations: builder.declared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::GroundTerm;
    use crate::rat::rat;

    #[test]
    fn single_clause() {
        let p = parse_problem("clause x <= 1 || P(x).").unwrap();
        assert_eq!(p.clauses.len(), 1);
        let c = &p.clauses[0];
        assert_eq!(c.to_string(), "x <= 1 || P(x)");
    }

    #[test]
    fn extended_example_clauses() {
        let text = "\
clause 0 <= x, x <= 2 || !P(x) \\/ Q(x).
clause x <= 1 || P(x).
clause x > 1 || !P(x).
";
        let p = parse_problem(text).unwrap();
        assert_eq!(p.clauses.len(), 3);
        assert_eq!(p.clauses[0].to_string(), "0 <= x, x <= 2 || !P(x) \\/ Q(x)");
        assert_eq!(p.clauses[2].to_string(), "x > 1 || !P(x)");
        assert!(p.is_horn());
    }

    #[test]
    fn universal_guarded_conjecture() {
        let p = parse_problem("conjecture forall x. (0 <= x, x <= 1 || Q(x)).").unwrap();
        let conj = p.conjecture.unwrap();
        assert_eq!(conj.kind, ConjectureKind::Universal);
        assert_eq!(conj.vars, vec!["x".to_string()]);
        match &conj.body {
            Formula::Guarded(guard, inner) => {
                assert_eq!(guard.len(), 2);
                assert!(matches!(**inner, Formula::Atom(_)));
            }
            other => panic!("expected guarded body, got {other:?}"),
        }
    }

    #[test]
    fn fact_statement_abstracts() {
        let p = parse_problem("fact IgnTable(0, 13, 880, 1100, 2200).").unwrap();
        let (pred, args) = p.clauses[0].as_ground_fact().unwrap();
        assert_eq!(&*pred, "IgnTable");
        assert_eq!(args[4], GroundTerm::Num(rat(2200)));
        // no raw constants left in the free atom
        assert!(p.clauses[0].literals[0].atom.args.iter().all(|a| matches!(a, Term::Var(_))));
    }

    #[test]
    fn implication_clause_form() {
        let p = parse_problem(
            "clause SuggestionDisproven(xv, xa), VariantName(xv) -> ExcludedAction(xv, xa).",
        )
        .unwrap();
        let c = &p.clauses[0];
        assert_eq!(c.literals.len(), 3);
        assert_eq!(c.literals.iter().filter(|l| l.positive).count(), 1);
        assert!(c.is_horn());
    }

    #[test]
    fn headless_clause() {
        let p = parse_problem("clause P(x) -> bottom.").unwrap();
        assert_eq!(p.clauses[0].literals.len(), 1);
        assert!(!p.clauses[0].literals[0].positive);
        let q = parse_problem("clause x > 2, x <= 2 || bottom.").unwrap();
        assert!(q.clauses[0].literals.is_empty());
    }

    #[test]
    fn comma_disjunction_group() {
        let p = parse_problem("clause (P(x), !Q(x)).").unwrap();
        assert_eq!(p.clauses[0].literals.len(), 2);
        assert!(p.clauses[0].literals[0].positive);
        assert!(!p.clauses[0].literals[1].positive);
    }

    #[test]
    fn arity_mismatch_is_reported() {
        let err = parse_problem("clause P(x) -> Q(x).\nclause P(x, y) -> Q(x).").unwrap_err();
        assert!(matches!(err, ParseError::ArityMismatch { pred, .. } if pred == "P"));
        let err2 = parse_problem("pred P/2.\nclause P(x) -> Q(x).").unwrap_err();
        assert!(matches!(err2, ParseError::ArityMismatch { .. }));
    }

    #[test]
    fn negative_theory_literal_is_complemented() {
        let p = parse_problem("conjecture forall x. !(x <= 5) \\/ Q(x).").unwrap();
        let body = p.conjecture.unwrap().body;
        match body {
            Formula::Or(parts) => match &parts[0] {
                Formula::Theory(atoms) => {
                    assert_eq!(atoms[0].op, CmpOp::Gt);
                }
                other => panic!("expected theory formula, got {other:?}"),
            },
            other => panic!("expected or, got {other:?}"),
        }
    }

    #[test]
    fn non_positive_bodies_parse_for_grounding_path() {
        // φ1 of the worked example: negative free literal allowed at parse.
        let p = parse_problem(
            "conjecture forall x, y. (0 <= x, x <= 1, 0 <= y, y <= 1 || !Q(x) \\/ Q(y)).",
        )
        .unwrap();
        let conj = p.conjecture.unwrap();
        assert!(!conj.body.is_positive());
        assert_eq!(conj.vars.len(), 2);
    }

    #[test]
    fn unused_conjecture_variable_is_rejected() {
        let err = parse_problem("conjecture exists x, y. Q(x).").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }));
    }

    #[test]
    fn syntax_error_positions() {
        let err = parse_problem("clause x <= ||").unwrap_err();
        match err {
            ParseError::Syntax { line, col, .. } => {
                assert_eq!(line, 1);
                assert!(col > 1);
            }
            other => panic!("expected syntax error, got {other}"),
        }
    }

    #[test]
    fn print_parse_round_trip() {
        let text = "\
pred R/1.
clause 0 <= x, x <= 2 || !P(x) \\/ Q(x).
clause x <= 1 || P(x).
clause x > 1 || !P(x).
fact IgnTable(0, 13, 880, 1100, 2200).
conjecture forall x. (0 <= x, x <= 1 || Q(x)).
";
        let p = parse_problem(text).unwrap();
        let printed = p.to_string();
        let reparsed = parse_problem(&printed).unwrap();
        assert_eq!(p, reparsed);
        // and printing is a fixpoint
        assert_eq!(printed, reparsed.to_string());
    }

    #[test]
    fn linear_expression_in_theory_atom() {
        let p = parse_problem("clause xh1 = xes - 1 || P(xh1, xes).").unwrap();
        let c = &p.clauses[0];
        assert!(matches!(c.constraint[0].rhs, Term::Linear(_)));
        let printed = p.to_string();
        assert_eq!(p, parse_problem(&printed).unwrap());
    }
}
