//! Interval endpoints, the induced partition of the rationals, test-point
//! generation with a concrete assignment β, and the interval-membership
//! bounds idef(B).
//!
//! Every variable bound `x ◁ c` reachable by instantiating the clause set
//! against the facts of positively grounded predicates contributes interval
//! borders; sorting and pairing the borders yields a partition of the
//! rationals in which each bound is uniformly true or false per interval.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use thiserror::Error;

use crate::logic::{
    simplify_theory_atom, Clause, CmpOp, GroundTerm, PointName, Simplified, Substitution, Term,
    TheoryAtom, Var,
};
use crate::preprocess::PositivelyGroundedSet;
use crate::rat::{rat, rat_str, Rat};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TestPointError {
    /// The input is outside the supported fragment: after instantiation, a
    /// theory atom is neither TRUE, FALSE, nor a one-variable bound.
    #[error("unsupported atom outside the simple-bound fragment: {0}")]
    UnsupportedAtom(String),
    /// Internal invariant violation: sorted borders did not alternate
    /// lower/upper.
    #[error("malformed border sequence: {0}")]
    MalformedBorders(String),
    /// Instantiation budget exceeded while collecting endpoints.
    #[error("endpoint instantiation count exceeded the limit of {0}")]
    InstantiationLimit(u64),
}

/// Border kinds in ascending sort order for equal values: `c) < [c < c] < (c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BorderKind {
    UpperOpen,
    LowerClosed,
    UpperClosed,
    LowerOpen,
}

impl BorderKind {
    pub fn is_lower(self) -> bool {
        matches!(self, BorderKind::LowerClosed | BorderKind::LowerOpen)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BorderValue {
    NegInf,
    Finite(Rat),
    PosInf,
}

/// An interval border: a value plus the side/closedness information.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Border {
    pub value: BorderValue,
    pub kind: BorderKind,
}

impl Border {
    pub fn finite(value: Rat, kind: BorderKind) -> Border {
        Border { value: BorderValue::Finite(value), kind }
    }

    pub fn neg_inf() -> Border {
        Border { value: BorderValue::NegInf, kind: BorderKind::LowerOpen }
    }

    pub fn pos_inf() -> Border {
        Border { value: BorderValue::PosInf, kind: BorderKind::UpperOpen }
    }
}

impl fmt::Display for Border {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = match &self.value {
            BorderValue::NegInf => "-inf".to_string(),
            BorderValue::PosInf => "inf".to_string(),
            BorderValue::Finite(r) => rat_str(r),
        };
        match self.kind {
            BorderKind::UpperOpen => write!(f, "{v})"),
            BorderKind::LowerClosed => write!(f, "[{v}"),
            BorderKind::UpperClosed => write!(f, "{v}]"),
            BorderKind::LowerOpen => write!(f, "({v}"),
        }
    }
}

/// The two borders contributed by a variable bound `x ◁ c`: the border
/// implied by the bound itself plus the one implied by its negation. Equality
/// and disequality contribute all four.
pub fn borders_of_bound(op: CmpOp, c: &Rat) -> Vec<Border> {
    let mut out = Vec::new();
    if matches!(op, CmpOp::Le | CmpOp::Eq | CmpOp::Ne | CmpOp::Gt) {
        out.push(Border::finite(c.clone(), BorderKind::UpperClosed));
        out.push(Border::finite(c.clone(), BorderKind::LowerOpen));
    }
    if matches!(op, CmpOp::Ge | CmpOp::Eq | CmpOp::Ne | CmpOp::Lt) {
        out.push(Border::finite(c.clone(), BorderKind::UpperOpen));
        out.push(Border::finite(c.clone(), BorderKind::LowerClosed));
    }
    out
}

/// A nonempty interval over the rationals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    pub lower: Border,
    pub upper: Border,
}

impl Interval {
    pub fn full() -> Interval {
        Interval { lower: Border::neg_inf(), upper: Border::pos_inf() }
    }

    /// `[l,l]`-style point interval.
    pub fn is_point(&self) -> bool {
        match (&self.lower.value, &self.upper.value) {
            (BorderValue::Finite(l), BorderValue::Finite(u)) => l == u,
            _ => false,
        }
    }

    pub fn contains(&self, r: &Rat) -> bool {
        let lower_ok = match &self.lower.value {
            BorderValue::NegInf => true,
            BorderValue::Finite(l) => match self.lower.kind {
                BorderKind::LowerClosed => r >= l,
                BorderKind::LowerOpen => r > l,
                _ => unreachable!("lower border with upper kind"),
            },
            BorderValue::PosInf => false,
        };
        let upper_ok = match &self.upper.value {
            BorderValue::PosInf => true,
            BorderValue::Finite(u) => match self.upper.kind {
                BorderKind::UpperClosed => r <= u,
                BorderKind::UpperOpen => r < u,
                _ => unreachable!("upper border with lower kind"),
            },
            BorderValue::NegInf => false,
        };
        lower_ok && upper_ok
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = match &self.lower.value {
            BorderValue::NegInf => "-inf".to_string(),
            BorderValue::Finite(r) => rat_str(r),
            BorderValue::PosInf => unreachable!(),
        };
        let u = match &self.upper.value {
            BorderValue::PosInf => "inf".to_string(),
            BorderValue::Finite(r) => rat_str(r),
            BorderValue::NegInf => unreachable!(),
        };
        let lb = if self.lower.kind == BorderKind::LowerClosed { '[' } else { '(' };
        let ub = if self.upper.kind == BorderKind::UpperClosed { ']' } else { ')' };
        write!(f, "{lb}{l},{u}{ub}")
    }
}

/// Default cap on endpoint instantiation combinations.
pub const ENDPOINT_LIMIT: u64 = 10_000_000;

/// Collects the interval endpoints of `N ∪ atoms(φ)` without materializing
/// elim(S, N): every theory atom is instantiated against the fact values its
/// variables can receive from negative S-literals of the same clause, and
/// every instantiation must simplify to TRUE, FALSE, or a variable bound.
/// Residual atoms (variable comparisons and other multi-symbol shapes) are a
/// fragment violation.
pub fn compute_endpoints(
    n: &[Clause],
    s: &PositivelyGroundedSet,
    conjecture_atoms: &[TheoryAtom],
) -> Result<BTreeSet<Border>, TestPointError> {
    let mut borders = BTreeSet::new();
    borders.insert(Border::neg_inf());
    borders.insert(Border::pos_inf());
    let mut budget = ENDPOINT_LIMIT;
    for clause in n {
        // Candidate ground values per variable, drawn from the argument
        // positions of negative S-literals.
        let mut candidates: BTreeMap<Var, Vec<GroundTerm>> = BTreeMap::new();
        for lit in clause.negative_literals() {
            if !s.contains(&lit.atom.pred) {
                continue;
            }
            for (pos, arg) in lit.atom.args.iter().enumerate() {
                if let Term::Var(v) = arg {
                    let entry = candidates.entry(*v).or_default();
                    for tuple in s.facts_of(&lit.atom.pred) {
                        if let Some(value) = tuple.get(pos) {
                            if !entry.contains(value) {
                                entry.push(value.clone());
                            }
                        }
                    }
                }
            }
        }
        for atom in &clause.constraint {
            collect_atom_borders(atom, &candidates, &mut borders, &mut budget)?;
        }
    }
    for atom in conjecture_atoms {
        collect_atom_borders(atom, &BTreeMap::new(), &mut borders, &mut budget)?;
    }
    Ok(borders)
}

fn collect_atom_borders(
    atom: &TheoryAtom,
    candidates: &BTreeMap<Var, Vec<GroundTerm>>,
    borders: &mut BTreeSet<Border>,
    budget: &mut u64,
) -> Result<(), TestPointError> {
    let vars = atom.vars();
    let instantiated: Vec<(Var, &Vec<GroundTerm>)> = vars
        .iter()
        .filter_map(|v| candidates.get(v).filter(|c| !c.is_empty()).map(|c| (*v, c)))
        .collect();
    let choices: Vec<Vec<(Var, &GroundTerm)>> = instantiated
        .iter()
        .map(|(v, values)| values.iter().map(|g| (*v, g)).collect())
        .collect();
    for combo in choices.into_iter().multi_cartesian_product().pad_using(1, |_| Vec::new()) {
        if *budget == 0 {
            return Err(TestPointError::InstantiationLimit(ENDPOINT_LIMIT));
        }
        *budget -= 1;
        let mut partial = Substitution::new();
        for (v, g) in combo {
            partial.bind(v, Term::from_ground(g));
        }
        let simplified = simplify_theory_atom(atom, &partial)
            .map_err(|e| TestPointError::UnsupportedAtom(e.to_string()))?;
        match simplified {
            Simplified::True | Simplified::False => {}
            Simplified::Atom(a) => match a.as_var_bound() {
                Some((_, op, c)) => {
                    for b in borders_of_bound(op, &c) {
                        borders.insert(b);
                    }
                }
                None => {
                    return Err(TestPointError::UnsupportedAtom(format!(
                        "residual atom is not a variable bound: {} {} {}",
                        describe_term(&a.lhs),
                        a.op,
                        describe_term(&a.rhs)
                    )));
                }
            },
        }
    }
    Ok(())
}

fn describe_term(t: &Term) -> String {
    match t {
        Term::Var(v) => format!("_{v}"),
        Term::Num(r) => rat_str(r),
        Term::Point(p) => p.to_string(),
        Term::Linear(_) => "<linear>".to_string(),
    }
}

/// Pairs the sorted borders into the interval partition. The endpoint
/// construction guarantees alternation of lower and upper borders.
pub fn build_partition(borders: &BTreeSet<Border>) -> Result<Vec<Interval>, TestPointError> {
    let sorted: Vec<&Border> = borders.iter().collect();
    if sorted.len() % 2 != 0 {
        return Err(TestPointError::MalformedBorders(format!(
            "odd number of borders ({})",
            sorted.len()
        )));
    }
    let mut out = Vec::with_capacity(sorted.len() / 2);
    for pair in sorted.chunks(2) {
        let (lower, upper) = (pair[0], pair[1]);
        if !lower.kind.is_lower() || upper.kind.is_lower() {
            return Err(TestPointError::MalformedBorders(format!(
                "expected lower/upper alternation, found {lower} then {upper}"
            )));
        }
        out.push(Interval { lower: lower.clone(), upper: upper.clone() });
    }
    Ok(out)
}

/// The test points B: intervals in partition order, one point per point
/// interval (represented by its value) and `m` symbolic constants per
/// infinite interval, each with a concrete rational assignment β inside the
/// interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestPointSet {
    pub intervals: Vec<Interval>,
    pub m: u32,
    points: Vec<Vec<GroundTerm>>,
    beta: BTreeMap<PointName, Rat>,
    /// Symbolic point name → (interval index, point index j).
    info: BTreeMap<PointName, (usize, u32)>,
}

impl TestPointSet {
    pub fn new(intervals: Vec<Interval>, m: u32) -> TestPointSet {
        assert!(m >= 1, "at least one test point per interval");
        let mut points = Vec::with_capacity(intervals.len());
        let mut beta = BTreeMap::new();
        let mut info = BTreeMap::new();
        for (idx, interval) in intervals.iter().enumerate() {
            if interval.is_point() {
                let value = match &interval.lower.value {
                    BorderValue::Finite(l) => l.clone(),
                    _ => unreachable!("point interval with infinite border"),
                };
                points.push(vec![GroundTerm::Num(value)]);
            } else {
                let mut row = Vec::with_capacity(m as usize);
                for j in 1..=m {
                    // Identifier-safe name; the pretty a_{I,j} form is
                    // recovered through `pretty`.
                    let name: PointName = Arc::from(format!("a{idx}_{j}").as_str());
                    beta.insert(name.clone(), beta_value(interval, j, m));
                    info.insert(name.clone(), (idx, j));
                    row.push(GroundTerm::Point(name));
                }
                points.push(row);
            }
        }
        TestPointSet { intervals, m, points, beta, info }
    }

    /// Human-readable rendering `a_{I,j}` of a test point (numbers print as
    /// themselves).
    pub fn pretty(&self, g: &GroundTerm) -> String {
        match g {
            GroundTerm::Num(r) => rat_str(r),
            GroundTerm::Point(p) => match self.info.get(p) {
                Some((idx, j)) => format!("a_{{{},{}}}", self.intervals[*idx], j),
                None => p.to_string(),
            },
        }
    }

    /// All of B in partition order.
    pub fn all_points(&self) -> impl Iterator<Item = &GroundTerm> {
        self.points.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.points.iter().map(|p| p.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points_of(&self, interval_index: usize) -> &[GroundTerm] {
        &self.points[interval_index]
    }

    /// β: the concrete value of a test point (numbers map to themselves).
    pub fn beta(&self, g: &GroundTerm) -> Rat {
        match g {
            GroundTerm::Num(r) => r.clone(),
            GroundTerm::Point(p) => {
                self.beta.get(p).cloned().unwrap_or_else(|| panic!("unknown test point {p}"))
            }
        }
    }

    pub fn beta_of_name(&self, p: &PointName) -> Option<&Rat> {
        self.beta.get(p)
    }

    /// The interval a test point belongs to.
    pub fn interval_of(&self, g: &GroundTerm) -> Option<usize> {
        self.points.iter().position(|row| row.contains(g))
    }

    /// Same set extended by one fresh sample point per infinite interval
    /// (named with index m+1), used to validate that enlarging B does not
    /// change verdicts.
    pub fn extended(&self) -> TestPointSet {
        let mut out = self.clone();
        for (idx, interval) in out.intervals.iter().enumerate() {
            if interval.is_point() {
                continue;
            }
            let j = out.m + 1;
            let name: PointName = Arc::from(format!("a_{{{interval},{j}}}").as_str());
            out.beta.insert(name.clone(), extra_beta(interval, out.m));
            out.points[idx].push(GroundTerm::Point(name));
        }
        out
    }
}

/// Deterministic β: point intervals take their value; bounded intervals use
/// the interior grid l + (u−l)·j/(m+1); one-sided unbounded intervals step
/// away from the finite border; (−∞,∞) uses 0, 1, 2, ...
fn beta_value(interval: &Interval, j: u32, m: u32) -> Rat {
    let j_rat = rat(j as i64);
    match (&interval.lower.value, &interval.upper.value) {
        (BorderValue::Finite(l), BorderValue::Finite(u)) => {
            l + (u - l) * j_rat / rat((m + 1) as i64)
        }
        (BorderValue::NegInf, BorderValue::Finite(u)) => {
            if interval.upper.kind == BorderKind::UpperClosed {
                u - j_rat + rat(1)
            } else {
                u - j_rat
            }
        }
        (BorderValue::Finite(l), BorderValue::PosInf) => {
            if interval.lower.kind == BorderKind::LowerClosed {
                l + j_rat - rat(1)
            } else {
                l + j_rat
            }
        }
        (BorderValue::NegInf, BorderValue::PosInf) => j_rat - rat(1),
        _ => unreachable!("inverted interval"),
    }
}

/// A fresh in-interval value distinct from every `beta_value(_, j, m)`.
fn extra_beta(interval: &Interval, m: u32) -> Rat {
    match (&interval.lower.value, &interval.upper.value) {
        (BorderValue::Finite(l), BorderValue::Finite(u)) => {
            // Odd numerator over 2(m+1): never on the j/(m+1) grid.
            l + (u - l) * rat((2 * m + 1) as i64) / rat((2 * (m + 1)) as i64)
        }
        _ => beta_value(interval, m + 1, m),
    }
}

/// idef(B): the bounds fixing each symbolic test point inside its interval,
/// in the paper's orientation (`l ≤ a` / `l < a` and `a ≤ u` / `a < u`).
/// Point intervals are represented by their value and need no bounds.
pub fn idef(tps: &TestPointSet) -> Vec<TheoryAtom> {
    let mut out = Vec::new();
    for (idx, interval) in tps.intervals.iter().enumerate() {
        for point in tps.points_of(idx) {
            let GroundTerm::Point(name) = point else { continue };
            let a = Term::Point(name.clone());
            if let BorderValue::Finite(l) = &interval.lower.value {
                let op = if interval.lower.kind == BorderKind::LowerClosed {
                    CmpOp::Le
                } else {
                    CmpOp::Lt
                };
                out.push(TheoryAtom::new(Term::Num(l.clone()), op, a.clone()));
            }
            if let BorderValue::Finite(u) = &interval.upper.value {
                let op = if interval.upper.kind == BorderKind::UpperClosed {
                    CmpOp::Le
                } else {
                    CmpOp::Lt
                };
                out.push(TheoryAtom::new(a.clone(), op, Term::Num(u.clone())));
            }
        }
    }
    out
}
