//! Bounded finite-model search over a rational degree grid.
//!
//! Answers are a semi-oracle: a returned model is checked exactly, while
//! "unsat" only covers the searched sizes and grid.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::degrees::{implication, Degree, OperatorFamily};
use crate::semantics::{check_kb, AxiomCheck, Evaluator, FiniteInterpretation, SemanticsError};
use crate::syntax::{Axiom, Concept, KnowledgeBase};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchBounds {
    pub max_size: usize,
    pub denominators: Vec<u64>,
    /// Cap on search nodes (partial or complete interpretations) visited.
    pub budget: Option<u64>,
    /// Roles range over {0, 1} only.
    pub crisp_roles: bool,
    pub prune: bool,
    pub threads: Option<usize>,
}

impl SearchBounds {
    pub fn new(max_size: usize, denominators: &[u64]) -> SearchBounds {
        SearchBounds {
            max_size,
            denominators: denominators.to_vec(),
            budget: None,
            crisp_roles: false,
            prune: true,
            threads: None,
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn crisp(mut self) -> Self {
        self.crisp_roles = true;
        self
    }

    pub fn exhaustive(mut self) -> Self {
        self.prune = false;
        self
    }

    pub fn threads(mut self, n: usize) -> Self {
        self.threads = Some(n);
        self
    }

    fn validate(&self) -> Result<(), SearchError> {
        if self.max_size == 0 {
            return Err(SearchError::InvalidBounds("max size must be positive".into()));
        }
        if self.denominators.iter().any(|d| *d == 0) {
            return Err(SearchError::InvalidBounds("denominators must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(SearchError::InvalidBounds("thread count must be positive".into()));
        }
        Ok(())
    }

    /// All `k/d` for `d` in the denominator set, plus 0 and 1, ascending.
    pub fn grid(&self) -> Vec<Degree> {
        let mut set: BTreeSet<Degree> = [Degree::zero(), Degree::one()].into_iter().collect();
        for &d in &self.denominators {
            for k in 0..=d {
                set.insert(Degree::ratio(k as i64, d as i64));
            }
        }
        set.into_iter().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SearchStatus {
    Sat(#[serde(skip)] FiniteInterpretation),
    UnsatWithinBounds,
    BudgetExhausted,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    /// Partial and complete interpretations visited.
    pub nodes: u64,
    /// Complete interpretations checked.
    pub candidates: u64,
    /// Subtrees cut by propagation or a failed constraint.
    pub pruned: u64,
    pub sizes_completed: Vec<usize>,
    pub elapsed_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchOutcome {
    pub status: SearchStatus,
    pub stats: SearchStats,
    pub notes: Vec<String>,
    /// One structured line per searched size.
    pub log: Vec<String>,
}

impl SearchOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self.status, SearchStatus::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self.status, SearchStatus::UnsatWithinBounds)
    }

    pub fn model(&self) -> Option<&FiniteInterpretation> {
        match &self.status {
            SearchStatus::Sat(m) => Some(m),
            _ => None,
        }
    }
}

/// Variables: concept cells (names sorted, then elements), then role cells
/// (names sorted, row-major). Individuals are enumerated outside.
struct Cells {
    concepts: Vec<String>,
    roles: Vec<String>,
    n: usize,
}

impl Cells {
    fn concept_index(&self, name: &str) -> usize {
        self.concepts.binary_search_by(|c| c.as_str().cmp(name)).expect("concept in signature")
    }

    fn role_index(&self, name: &str) -> usize {
        self.roles.binary_search_by(|r| r.as_str().cmp(name)).expect("role in signature")
    }

    fn concept_var(&self, i: usize, x: usize) -> usize {
        i * self.n + x
    }

    fn role_var(&self, i: usize, x: usize, y: usize) -> usize {
        self.concepts.len() * self.n + i * self.n * self.n + x * self.n + y
    }

    fn count(&self) -> usize {
        self.concepts.len() * self.n + self.roles.len() * self.n * self.n
    }

    fn is_role(&self, var: usize) -> bool {
        var >= self.concepts.len() * self.n
    }

    fn set(&self, interp: &mut FiniteInterpretation, var: usize, value: Degree) {
        let cn = self.concepts.len() * self.n;
        if var < cn {
            interp.set_concept(&self.concepts[var / self.n], var % self.n, value);
        } else {
            let k = var - cn;
            let nn = self.n * self.n;
            interp.set_role(&self.roles[k / nn], (k % nn) / self.n, k % self.n, value);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Term {
    Top,
    Bottom,
    Atom(usize),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Forall(usize, usize),
    Exists(usize, usize),
    /// Łukasiewicz `a ⊗ (¬a ⊕ b)` and `a ⊕ (¬a ⊗ b)`, kept whole so the
    /// two copies of `a` do not widen the bounds.
    Min(usize, usize),
    Max(usize, usize),
}

/// Hash-consed concepts: equal subterms share an id, hence share bounds.
/// Unit laws are applied on the way in; the terms only feed bounds, models
/// are always checked against the original axioms.
struct Terms {
    family: OperatorFamily,
    nodes: Vec<Term>,
    ids: HashMap<Concept, usize>,
    by_term: HashMap<Term, usize>,
}

impl Terms {
    fn new(family: OperatorFamily) -> Terms {
        Terms { family, nodes: Vec::new(), ids: HashMap::new(), by_term: HashMap::new() }
    }

    fn add(&mut self, t: Term) -> usize {
        if let Some(&id) = self.by_term.get(&t) {
            return id;
        }
        self.nodes.push(t);
        self.by_term.insert(t, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    /// `b` when `l` is `¬a` and `r` is `b`, in either order.
    fn negated_side(&self, a: usize, l: usize, r: usize) -> Option<usize> {
        if self.nodes[l] == Term::Not(a) {
            Some(r)
        } else if self.nodes[r] == Term::Not(a) {
            Some(l)
        } else {
            None
        }
    }

    fn simplify(&self, t: Term) -> Result<Term, usize> {
        let luk = self.family == OperatorFamily::Lukasiewicz;
        let idempotent = matches!(self.family, OperatorFamily::Zadeh | OperatorFamily::Goedel);
        Ok(match t {
            Term::And(l, r) => match (self.nodes[l], self.nodes[r]) {
                (Term::Bottom, _) | (_, Term::Bottom) => Term::Bottom,
                (Term::Top, _) => return Err(r),
                (_, Term::Top) => return Err(l),
                _ if l == r && idempotent => return Err(l),
                (_, Term::Or(x, y)) if luk && self.negated_side(l, x, y).is_some() => {
                    Term::Min(l, self.negated_side(l, x, y).unwrap())
                }
                (Term::Or(x, y), _) if luk && self.negated_side(r, x, y).is_some() => {
                    Term::Min(r, self.negated_side(r, x, y).unwrap())
                }
                _ => t,
            },
            Term::Or(l, r) => match (self.nodes[l], self.nodes[r]) {
                (Term::Top, _) | (_, Term::Top) => Term::Top,
                (Term::Bottom, _) => return Err(r),
                (_, Term::Bottom) => return Err(l),
                _ if l == r && idempotent => return Err(l),
                (_, Term::And(x, y)) if luk && self.negated_side(l, x, y).is_some() => {
                    Term::Max(l, self.negated_side(l, x, y).unwrap())
                }
                (Term::And(x, y), _) if luk && self.negated_side(r, x, y).is_some() => {
                    Term::Max(r, self.negated_side(r, x, y).unwrap())
                }
                _ => t,
            },
            _ => t,
        })
    }

    fn intern(&mut self, c: &Concept, cells: &Cells) -> usize {
        if let Some(&id) = self.ids.get(c) {
            return id;
        }
        let t = match c {
            Concept::Top => Term::Top,
            Concept::Bottom => Term::Bottom,
            Concept::Atomic(a) => Term::Atom(cells.concept_index(a)),
            Concept::Not(d) => Term::Not(self.intern(d, cells)),
            Concept::And(l, r) => Term::And(self.intern(l, cells), self.intern(r, cells)),
            Concept::Or(l, r) => Term::Or(self.intern(l, cells), self.intern(r, cells)),
            Concept::Forall(role, d) => Term::Forall(cells.role_index(role), self.intern(d, cells)),
            Concept::Exists(role, d) => Term::Exists(cells.role_index(role), self.intern(d, cells)),
        };
        let id = match self.simplify(t) {
            Ok(t) => self.add(t),
            Err(id) => id,
        };
        self.ids.insert(c.clone(), id);
        id
    }

    /// For each term built from one atom and no role, its value at every
    /// grid point of that atom: `(atom, table)`. Bare atoms are left out.
    fn tabulate(&self, grid: &[Degree]) -> Vec<Option<(usize, Vec<Degree>)>> {
        let f = self.family;
        let zip = |a: &[Degree], b: &[Degree], op: &dyn Fn(&Degree, &Degree) -> Degree| {
            a.iter().zip(b).map(|(x, y)| op(x, y)).collect::<Vec<_>>()
        };
        // (sole atom, values); `None` atom for constants.
        let mut tabs: Vec<Option<(Option<usize>, Vec<Degree>)>> = Vec::with_capacity(self.nodes.len());
        for &t in &self.nodes {
            let pair = |l: usize, r: usize| match (&tabs[l], &tabs[r]) {
                (Some((a, x)), Some((b, y))) if a.is_none() || b.is_none() || a == b => {
                    Some((a.or(*b), x.as_slice(), y.as_slice()))
                }
                _ => None,
            };
            let entry = match t {
                Term::Top => Some((None, vec![Degree::one(); grid.len()])),
                Term::Bottom => Some((None, vec![Degree::zero(); grid.len()])),
                Term::Atom(i) => Some((Some(i), grid.to_vec())),
                Term::Not(d) => tabs[d].as_ref().map(|(a, v)| (*a, v.iter().map(|x| f.negation(x)).collect())),
                Term::And(l, r) => pair(l, r).map(|(a, x, y)| (a, zip(x, y, &|p, q| f.tnorm(p, q)))),
                Term::Or(l, r) => pair(l, r).map(|(a, x, y)| (a, zip(x, y, &|p, q| f.tconorm(p, q)))),
                Term::Min(l, r) => pair(l, r).map(|(a, x, y)| (a, zip(x, y, &|p, q| p.clone().min(q.clone())))),
                Term::Max(l, r) => pair(l, r).map(|(a, x, y)| (a, zip(x, y, &|p, q| p.clone().max(q.clone())))),
                Term::Forall(..) | Term::Exists(..) => None,
            };
            tabs.push(entry);
        }
        tabs.into_iter()
            .zip(&self.nodes)
            .map(|(e, t)| match (e, t) {
                (_, Term::Atom(_)) => None,
                (Some((Some(a), v)), _) => Some((a, v)),
                _ => None,
            })
            .collect()
    }

    /// True if `t` reads nothing but `src` and constants.
    fn only_reads(&self, t: usize, src: usize) -> bool {
        if t == src {
            return true;
        }
        match self.nodes[t] {
            Term::Top | Term::Bottom => true,
            Term::Atom(_) | Term::Forall(..) | Term::Exists(..) => false,
            Term::Not(d) => self.only_reads(d, src),
            Term::And(l, r) | Term::Or(l, r) | Term::Min(l, r) | Term::Max(l, r) => {
                self.only_reads(l, src) && self.only_reads(r, src)
            }
        }
    }

    /// Subterms of `t` strictly above `src`, children first.
    fn between(&self, t: usize, src: usize) -> Vec<usize> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![t];
        while let Some(u) = stack.pop() {
            if u == src || !seen.insert(u) {
                continue;
            }
            match self.nodes[u] {
                Term::Not(d) => stack.push(d),
                Term::And(l, r) | Term::Or(l, r) | Term::Min(l, r) | Term::Max(l, r) => stack.extend([l, r]),
                _ => {}
            }
        }
        seen.into_iter().collect()
    }

    /// For each term that is a function of one compound subterm `src`
    /// read at least twice: `(src, subterms in between)`. Terms over a
    /// single atom are tabulated instead.
    fn univariate(&self) -> Vec<Option<(usize, Vec<usize>)>> {
        (0..self.nodes.len())
            .map(|t| {
                if !matches!(self.nodes[t], Term::Not(_) | Term::And(..) | Term::Or(..) | Term::Min(..) | Term::Max(..)) {
                    return None;
                }
                let src = (0..t).rev().find(|&s| {
                    !matches!(self.nodes[s], Term::Top | Term::Bottom) && self.only_reads(t, s)
                })?;
                let compound = !matches!(self.nodes[src], Term::Atom(_));
                (compound && self.reads_twice(t, src)).then(|| (src, self.between(t, src)))
            })
            .collect()
    }

    fn reads_twice(&self, t: usize, src: usize) -> bool {
        fn count(terms: &Terms, t: usize, src: usize) -> usize {
            if t == src {
                return 1;
            }
            match terms.nodes[t] {
                Term::Not(d) => count(terms, d, src),
                Term::And(l, r) | Term::Or(l, r) | Term::Min(l, r) | Term::Max(l, r) => {
                    (count(terms, l, src) + count(terms, r, src)).min(2)
                }
                _ => 0,
            }
        }
        count(self, t, src) > 1
    }

    /// Variables the value of term `t` at `x` depends on.
    fn deps(&self, t: usize, x: usize, cells: &Cells, seen: &mut HashSet<(usize, usize)>, out: &mut BTreeSet<usize>) {
        if !seen.insert((t, x)) {
            return;
        }
        match self.nodes[t] {
            Term::Top | Term::Bottom => {}
            Term::Atom(i) => {
                out.insert(cells.concept_var(i, x));
            }
            Term::Not(d) => self.deps(d, x, cells, seen, out),
            Term::And(l, r) | Term::Or(l, r) | Term::Min(l, r) | Term::Max(l, r) => {
                self.deps(l, x, cells, seen, out);
                self.deps(r, x, cells, seen, out);
            }
            Term::Forall(r, d) | Term::Exists(r, d) => {
                for y in 0..cells.n {
                    out.insert(cells.role_var(r, x, y));
                    self.deps(d, y, cells, seen, out);
                }
            }
        }
    }
}

/// Search state: the values each cell may still take, with their ends
/// (equal once assigned), and the interval of every term at every element.
#[derive(Clone, Default)]
struct Partial {
    lo: Vec<Degree>,
    hi: Vec<Degree>,
    dom: Vec<Vec<usize>>,
    /// At `t * n + x`.
    hull: Vec<(Degree, Degree)>,
}

#[derive(Clone, Copy)]
enum UnitKind {
    Geq,
    Leq,
    Gci(usize),
}

struct Unit<'k> {
    axiom: &'k Axiom,
    kind: UnitKind,
    term: usize,
    x: usize,
    degree: &'k Degree,
}

/// Search space for one domain size and one individual assignment.
struct Plan<'k> {
    n: usize,
    role_base: usize,
    terms: Terms,
    /// See `Terms::tabulate`.
    unary: Vec<Option<(usize, Vec<Degree>)>>,
    /// See `Terms::univariate`.
    univ: Vec<Option<(usize, Vec<usize>)>>,
    units: Vec<Unit<'k>>,
    /// Units to re-check once a variable is fixed.
    units_at: Vec<Vec<usize>>,
    base: Partial,
    template: FiniteInterpretation,
}

impl Plan<'_> {
    /// Bound on term `t` at `x` over all models completing `p`. Every
    /// operator is monotone or antitone in each argument, so bounds compose.
    fn bound(&self, f: OperatorFamily, p: &Partial, t: usize, x: usize, upper: bool) -> Degree {
        self.eval_bound(f, p, t, x, upper, true)
    }

    /// As `bound`, but with `hull = false` over every completion, models or not.
    fn eval_bound(&self, f: OperatorFamily, p: &Partial, t: usize, x: usize, upper: bool, hull: bool) -> Degree {
        let n = self.n;
        let side = |u: bool| if u { &p.hi } else { &p.lo };
        let role_var = |r: usize, y: usize| self.role_base + r * n * n + x * n + y;
        let v = match self.terms.nodes[t] {
            _ if self.unary[t].is_some() => {
                let (i, tab) = self.unary[t].as_ref().unwrap();
                let (lo, hi) = range(tab, &p.dom[i * n + x]);
                if upper {
                    hi
                } else {
                    lo
                }
            }
            Term::Top => Degree::one(),
            Term::Bottom => Degree::zero(),
            Term::Atom(i) => side(upper)[i * n + x].clone(),
            Term::Not(d) => f.negation(&self.eval_bound(f, p, d, x, !upper, hull)),
            Term::And(l, r) => {
                f.tnorm(&self.eval_bound(f, p, l, x, upper, hull), &self.eval_bound(f, p, r, x, upper, hull))
            }
            Term::Or(l, r) => {
                f.tconorm(&self.eval_bound(f, p, l, x, upper, hull), &self.eval_bound(f, p, r, x, upper, hull))
            }
            Term::Min(l, r) => self.eval_bound(f, p, l, x, upper, hull).min(self.eval_bound(f, p, r, x, upper, hull)),
            Term::Max(l, r) => self.eval_bound(f, p, l, x, upper, hull).max(self.eval_bound(f, p, r, x, upper, hull)),
            Term::Forall(r, d) => (0..n)
                .map(|y| f.implication(&side(!upper)[role_var(r, y)], &self.eval_bound(f, p, d, y, upper, hull)))
                .min()
                .unwrap_or_else(Degree::one),
            Term::Exists(r, d) => (0..n)
                .map(|y| f.tnorm(&side(upper)[role_var(r, y)], &self.eval_bound(f, p, d, y, upper, hull)))
                .max()
                .unwrap_or_else(Degree::zero),
        };
        if !hull {
            return v;
        }
        let (lo, hi) = &p.hull[t * n + x];
        if upper {
            v.min(hi.clone())
        } else {
            v.max(lo.clone())
        }
    }

    /// False only if no completion of `p` satisfies the unit.
    fn feasible(&self, f: OperatorFamily, p: &Partial, u: &Unit) -> bool {
        match u.kind {
            UnitKind::Geq => self.bound(f, p, u.term, u.x, true) >= *u.degree,
            UnitKind::Leq => self.bound(f, p, u.term, u.x, false) <= *u.degree,
            UnitKind::Gci(sup) => {
                implication(f, &self.bound(f, p, u.term, u.x, false), &self.bound(f, p, sup, u.x, true)) >= *u.degree
            }
        }
    }

    /// True if every completion of `p` satisfies the unit.
    fn entailed(&self, f: OperatorFamily, p: &Partial, u: &Unit) -> bool {
        let b = |t: usize, upper: bool| self.eval_bound(f, p, t, u.x, upper, false);
        match u.kind {
            UnitKind::Geq => b(u.term, false) >= *u.degree,
            UnitKind::Leq => b(u.term, true) <= *u.degree,
            UnitKind::Gci(sup) => implication(f, &b(u.term, true), &b(sup, false)) >= *u.degree,
        }
    }

    /// Values to try for `var`. A cell no open unit cares about only takes
    /// its least value, which keeps the lexicographically least model.
    fn choices<'p>(&self, f: OperatorFamily, prune: bool, p: &'p Partial, var: usize) -> &'p [usize] {
        let dom = &p.dom[var];
        if prune && self.units_at[var].iter().all(|&u| self.entailed(f, p, &self.units[u])) {
            &dom[..1]
        } else {
            dom
        }
    }
}

enum Flow {
    Found(FiniteInterpretation),
    Exhausted,
    Continue,
}

struct Ctx<'a> {
    kb: &'a KnowledgeBase,
    family: OperatorFamily,
    grid: &'a [Degree],
    cells: &'a Cells,
    prune: bool,
    crisp: bool,
    budget: Option<u64>,
    nodes: AtomicU64,
    candidates: AtomicU64,
    pruned: AtomicU64,
    stop: AtomicBool,
}

impl<'a> Ctx<'a> {
    fn new(
        kb: &'a KnowledgeBase,
        family: OperatorFamily,
        grid: &'a [Degree],
        cells: &'a Cells,
        bounds: &SearchBounds,
        nodes_so_far: u64,
    ) -> Self {
        Ctx {
            kb,
            family,
            grid,
            cells,
            prune: bounds.prune,
            crisp: bounds.crisp_roles,
            budget: bounds.budget.map(|b| b.saturating_sub(nodes_so_far)),
            nodes: AtomicU64::new(0),
            candidates: AtomicU64::new(0),
            pruned: AtomicU64::new(0),
            stop: AtomicBool::new(false),
        }
    }

    /// Counts a node; false once the budget is spent.
    fn tick(&self) -> bool {
        let n = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if self.budget.is_some_and(|b| n > b) {
            self.stop.store(true, Ordering::Relaxed);
            return false;
        }
        !self.stop.load(Ordering::Relaxed)
    }

    fn leaf(&self, plan: &Plan, p: &Partial) -> Option<FiniteInterpretation> {
        self.candidates.fetch_add(1, Ordering::Relaxed);
        let mut interp = plan.template.clone();
        for (var, value) in p.lo.iter().enumerate() {
            self.cells.set(&mut interp, var, value.clone());
        }
        let report = check_kb(&interp, self.family, self.kb).expect("every individual is mapped");
        if self.prune {
            assert!(report.overall, "search produced a model that fails the check");
        }
        report.overall.then_some(interp)
    }

    /// `p` with `var` fixed to grid index `v`; `None` if that is refuted.
    fn child(&self, plan: &Plan, p: &Partial, var: usize, v: usize) -> Option<Partial> {
        let mut c = p.clone();
        c.lo[var] = self.grid[v].clone();
        c.hi[var] = self.grid[v].clone();
        c.dom[var] = vec![v];
        let ok = plan.units_at[var].iter().all(|&u| plan.feasible(self.family, &c, &plan.units[u]))
            && (!self.prune || plan.propagate(self, &mut c, 8));
        if !ok {
            self.pruned.fetch_add(1, Ordering::Relaxed);
        }
        ok.then_some(c)
    }

    fn dfs(&self, plan: &Plan, p: &Partial, depth: usize) -> Flow {
        if !self.tick() {
            return Flow::Exhausted;
        }
        if depth == p.dom.len() {
            return match self.leaf(plan, p) {
                Some(m) => Flow::Found(m),
                None => Flow::Continue,
            };
        }
        for &v in plan.choices(self.family, self.prune, p, depth) {
            let Some(c) = self.child(plan, p, depth, v) else { continue };
            match self.dfs(plan, &c, depth + 1) {
                Flow::Continue => {}
                other => return other,
            }
        }
        Flow::Continue
    }

    /// States after the first `k` cells, in search order.
    fn prefixes(&self, plan: &Plan, k: usize) -> Vec<Partial> {
        let mut out = Vec::new();
        self.collect_prefixes(plan, &plan.base, 0, k, &mut out);
        out
    }

    fn collect_prefixes(&self, plan: &Plan, p: &Partial, depth: usize, k: usize, out: &mut Vec<Partial>) {
        if depth == k {
            out.push(p.clone());
            return;
        }
        self.nodes.fetch_add(1, Ordering::Relaxed);
        for &v in plan.choices(self.family, self.prune, p, depth) {
            if let Some(c) = self.child(plan, p, depth, v) {
                self.collect_prefixes(plan, &c, depth + 1, k, out);
            }
        }
    }

    fn run_plan(&self, plan: &Plan, workers: usize) -> Flow {
        let vars = plan.base.dom.len();
        let mut k = 0;
        let mut width = 1usize;
        while k < vars && width < 8 * workers {
            width = width.saturating_mul(plan.base.dom[k].len().max(1));
            k += 1;
        }
        let prefixes = self.prefixes(plan, k);
        let found = prefixes.par_iter().find_map_first(|p| match self.dfs(plan, p, k) {
            Flow::Continue => None,
            other => Some(other),
        });
        found.unwrap_or(Flow::Continue)
    }
}

fn individuals_of(kb: &KnowledgeBase) -> Vec<String> {
    kb.signature().individuals.into_iter().collect()
}

/// Builds the plan for one individual assignment. `Err` carries the reason
/// the assignment is dead before any cell is chosen (`None`: no note).
fn plan<'k>(axioms: &'k [Axiom], ctx: &Ctx, sigma: &[(String, usize)]) -> Result<Plan<'k>, Option<String>> {
    let cells = ctx.cells;
    let n = cells.n;
    let all: Vec<usize> = (0..ctx.grid.len()).collect();
    let crisp: Vec<usize> = vec![0, ctx.grid.len() - 1];
    let mut domains: Vec<Vec<usize>> = (0..cells.count())
        .map(|v| if ctx.crisp && cells.is_role(v) { crisp.clone() } else { all.clone() })
        .collect();
    let mut terms = Terms::new(ctx.family);
    let mut units = Vec::new();
    let mut units_at: Vec<Vec<usize>> = vec![Vec::new(); cells.count()];

    let mut template = FiniteInterpretation::with_size(n).expect("positive size");
    for (ind, x) in sigma {
        template.assign(ind.clone(), *x);
    }
    for c in &cells.concepts {
        template.declare_concept(c.clone(), Degree::zero());
    }
    for r in &cells.roles {
        template.declare_role(r.clone(), Degree::zero());
    }

    if ctx.prune {
        let at = |ind: &str| sigma.iter().find(|(i, _)| i == ind).expect("assigned").1;
        for ax in axioms {
            match ax {
                Axiom::ConceptGeq { individual, concept, degree } => {
                    let x = at(individual);
                    if let Some(a) = concept.atomic_name() {
                        domains[cells.concept_var(cells.concept_index(a), x)].retain(|&v| ctx.grid[v] >= *degree);
                    }
                    let term = terms.intern(concept, cells);
                    units.push(Unit { axiom: ax, kind: UnitKind::Geq, term, x, degree });
                }
                Axiom::ConceptLeq { individual, concept, degree } => {
                    let x = at(individual);
                    if let Some(a) = concept.atomic_name() {
                        domains[cells.concept_var(cells.concept_index(a), x)].retain(|&v| ctx.grid[v] <= *degree);
                    }
                    let term = terms.intern(concept, cells);
                    units.push(Unit { axiom: ax, kind: UnitKind::Leq, term, x, degree });
                }
                Axiom::RoleGeq { subject, object, role, degree } => {
                    let var = cells.role_var(cells.role_index(role), at(subject), at(object));
                    domains[var].retain(|&v| ctx.grid[v] >= *degree);
                }
                Axiom::GciGeq { sub, sup, degree } => {
                    let term = terms.intern(sub, cells);
                    let sup = terms.intern(sup, cells);
                    for x in 0..n {
                        units.push(Unit { axiom: ax, kind: UnitKind::Gci(sup), term, x, degree });
                    }
                }
            }
        }
        if let Some(v) = domains.iter().position(Vec::is_empty) {
            let what = if cells.is_role(v) { "a role cell" } else { "a concept cell" };
            return Err(Some(format!("empty grid after propagation for {what} (variable {v})")));
        }
        let mut relevant = vec![false; cells.count()];
        for (i, u) in units.iter().enumerate() {
            let mut deps = BTreeSet::new();
            let mut seen = HashSet::new();
            terms.deps(u.term, u.x, cells, &mut seen, &mut deps);
            if let UnitKind::Gci(sup) = u.kind {
                terms.deps(sup, u.x, cells, &mut seen, &mut deps);
            }
            for v in deps {
                units_at[v].push(i);
                relevant[v] = true;
            }
        }
        // No axiom reads these cells, so the least value is as good as any.
        for (dom, _) in domains.iter_mut().zip(&relevant).filter(|(_, r)| !**r) {
            dom.truncate(1);
        }
    }

    let hull = vec![(Degree::zero(), Degree::one()); terms.nodes.len() * n];
    let lo: Vec<Degree> = domains.iter().map(|d| ctx.grid[d[0]].clone()).collect();
    let hi: Vec<Degree> = domains.iter().map(|d| ctx.grid[d[d.len() - 1]].clone()).collect();
    let mut plan = Plan {
        n,
        role_base: cells.concepts.len() * n,
        unary: terms.tabulate(ctx.grid),
        univ: terms.univariate(),
        terms,
        units,
        units_at,
        base: Partial { lo, hi, dom: domains, hull },
        template,
    };
    if let Some(u) = plan.units.iter().find(|u| !plan.feasible(ctx.family, &plan.base, u)) {
        let ground = u.axiom.concepts().iter().all(|c| c.atoms().is_empty() && !has_quantifier(c));
        return Err(ground.then(|| format!("{} fails in every interpretation", u.axiom)));
    }
    let mut base = std::mem::take(&mut plan.base);
    for _ in 0..4 {
        let narrowed = if plan.propagate(ctx, &mut base, 32) { plan.narrow(ctx, &mut base) } else { None };
        match narrowed {
            None => {
                ctx.pruned.fetch_add(1, Ordering::Relaxed);
                return Err(None);
            }
            Some(false) => break,
            Some(true) => {}
        }
    }
    plan.base = base;
    Ok(plan)
}

impl Plan<'_> {
    /// Drops every value that no completion can extend, until nothing
    /// changes. `None` if some cell runs out of values, else whether any
    /// domain shrank.
    fn narrow(&self, ctx: &Ctx, base: &mut Partial) -> Option<bool> {
        let mut any = false;
        let mut changed = true;
        while changed {
            changed = false;
            for var in 0..base.dom.len() {
                if self.units_at[var].is_empty() {
                    continue;
                }
                let mut p = base.clone();
                let keep: Vec<usize> = base.dom[var]
                    .iter()
                    .copied()
                    .filter(|&v| {
                        p.lo[var] = ctx.grid[v].clone();
                        p.hi[var] = ctx.grid[v].clone();
                        self.units_at[var].iter().all(|&u| self.feasible(ctx.family, &p, &self.units[u]))
                    })
                    .collect();
                if keep.is_empty() {
                    return None;
                }
                if keep.len() < base.dom[var].len() {
                    base.lo[var] = ctx.grid[keep[0]].clone();
                    base.hi[var] = ctx.grid[keep[keep.len() - 1]].clone();
                    base.dom[var] = keep;
                    changed = true;
                    any = true;
                }
            }
        }
        Some(any)
    }

    /// Interval propagation over terms and cells until stable: bounds flow
    /// up from children, constraints flow down through the inverse of each
    /// connective. Cells snap to the grid. False if some interval empties.
    fn propagate(&self, ctx: &Ctx, p: &mut Partial, rounds: usize) -> bool {
        let f = ctx.family;
        let n = self.n;
        let mut cell: Vec<(Degree, Degree)> = p.lo.iter().cloned().zip(p.hi.iter().cloned()).collect();
        let mut hull = std::mem::take(&mut p.hull);
        let ok = (|| -> Option<()> {
            // Rational intervals can shrink forever; the round cap keeps this finite.
            for _ in 0..rounds {
                let mut changed = false;
                for t in 0..self.terms.nodes.len() {
                    for x in 0..n {
                        let (lo, hi) = match &self.unary[t] {
                            Some((i, tab)) => range(tab, &p.dom[i * n + x]),
                            None => up(f, self.terms.nodes[t], x, n, self.role_base, &hull, &cell),
                        };
                        changed |= meet(&mut hull[t * n + x], lo, hi)?;
                        if let Some((src, path)) = &self.univ[t] {
                            changed |= self.split(f, t, *src, path, &mut hull, x)?;
                        }
                    }
                }
                for u in &self.units {
                    let i = u.term * n + u.x;
                    changed |= match u.kind {
                        UnitKind::Geq => meet(&mut hull[i], u.degree.clone(), Degree::one())?,
                        UnitKind::Leq => meet(&mut hull[i], Degree::zero(), u.degree.clone())?,
                        UnitKind::Gci(sup) => {
                            let j = sup * n + u.x;
                            let sub_lo = hull[i].0.clone();
                            let sup_hi = hull[j].1.clone();
                            let d = u.degree;
                            if f == OperatorFamily::Zadeh {
                                let nd = d.complement();
                                let a = sup_hi < *d && meet(&mut hull[i], Degree::zero(), nd.clone())?;
                                let b = sub_lo > nd && meet(&mut hull[j], d.clone(), Degree::one())?;
                                a | b
                            } else {
                                let a = meet(&mut hull[j], f.tnorm(&sub_lo, d), Degree::one())?;
                                let b = meet(&mut hull[i], Degree::zero(), f.implication(d, &sup_hi))?;
                                a | b
                            }
                        }
                    };
                }
                for t in (0..self.terms.nodes.len()).rev() {
                    for x in 0..n {
                        changed |= match &self.unary[t] {
                            Some((i, tab)) => {
                                let var = i * n + x;
                                let (lo, hi) = &hull[t * n + x];
                                let dom = &mut p.dom[var];
                                let before = dom.len();
                                dom.retain(|&v| tab[v] >= *lo && tab[v] <= *hi);
                                let (first, last) = (*dom.first()?, *dom.last()?);
                                let shrunk = meet(&mut cell[var], ctx.grid[first].clone(), ctx.grid[last].clone())?;
                                shrunk || dom.len() < before
                            }
                            None => down(f, self.terms.nodes[t], x, n, self.role_base, t, &mut hull, &mut cell)?,
                        };
                    }
                }
                for (var, dom) in p.dom.iter_mut().enumerate() {
                    let (lo, hi) = &cell[var];
                    let before = dom.len();
                    dom.retain(|&v| ctx.grid[v] >= *lo && ctx.grid[v] <= *hi);
                    if dom.is_empty() {
                        return None;
                    }
                    cell[var] = (ctx.grid[dom[0]].clone(), ctx.grid[dom[dom.len() - 1]].clone());
                    changed |= dom.len() < before;
                }
                if !changed {
                    break;
                }
            }
            Some(())
        })();
        p.hull = hull;
        for (var, (lo, hi)) in cell.into_iter().enumerate() {
            p.lo[var] = lo;
            p.hi[var] = hi;
        }
        ok.is_some()
    }
}

impl Plan<'_> {
    /// Bounds a term that only reads `src` by cutting the interval of `src`
    /// into pieces: the term keeps the union over pieces that can meet its
    /// interval, `src` keeps those pieces.
    fn split(
        &self,
        f: OperatorFamily,
        t: usize,
        src: usize,
        path: &[usize],
        hull: &mut [(Degree, Degree)],
        x: usize,
    ) -> Option<bool> {
        const PIECES: i64 = 12;
        let n = self.n;
        let (s_lo, s_hi) = hull[src * n + x].clone();
        let (t_lo, t_hi) = hull[t * n + x].clone();
        let width = s_hi.as_ratio() - s_lo.as_ratio();
        let cuts: Vec<Degree> = if width.is_zero() {
            vec![s_lo.clone(), s_hi.clone()]
        } else {
            (0..=PIECES)
                .map(|k| clamp(s_lo.as_ratio() + width.clone() * BigRational::new(k.into(), PIECES.into())))
                .collect()
        };
        let mut value: Option<(Degree, Degree)> = None;
        let mut kept: Option<(Degree, Degree)> = None;
        for w in cuts.windows(2) {
            let (lo, hi) = self.eval_over(f, src, path, (w[0].clone(), w[1].clone()));
            if hi < t_lo || lo > t_hi {
                continue;
            }
            value = Some(match value {
                None => (lo, hi),
                Some((a, b)) => (a.min(lo), b.max(hi)),
            });
            kept = Some(match kept {
                None => (w[0].clone(), w[1].clone()),
                Some((a, _)) => (a, w[1].clone()),
            });
        }
        let ((lo, hi), (k_lo, k_hi)) = (value?, kept?);
        let a = meet(&mut hull[t * n + x], lo, hi)?;
        let b = meet(&mut hull[src * n + x], k_lo, k_hi)?;
        Some(a || b)
    }

    /// Interval of the last term in `path` when `src` ranges over `piece`.
    fn eval_over(&self, f: OperatorFamily, src: usize, path: &[usize], piece: (Degree, Degree)) -> (Degree, Degree) {
        let mut val: HashMap<usize, (Degree, Degree)> = HashMap::new();
        val.insert(src, piece);
        for &u in path {
            let iv = {
                let get = |c: usize| &val[&c];
                match self.terms.nodes[u] {
                    Term::Top => (Degree::one(), Degree::one()),
                    Term::Bottom => (Degree::zero(), Degree::zero()),
                    Term::Not(d) => (f.negation(&get(d).1), f.negation(&get(d).0)),
                    Term::And(l, r) => (f.tnorm(&get(l).0, &get(r).0), f.tnorm(&get(l).1, &get(r).1)),
                    Term::Or(l, r) => (f.tconorm(&get(l).0, &get(r).0), f.tconorm(&get(l).1, &get(r).1)),
                    Term::Min(l, r) => (get(l).0.clone().min(get(r).0.clone()), get(l).1.clone().min(get(r).1.clone())),
                    Term::Max(l, r) => (get(l).0.clone().max(get(r).0.clone()), get(l).1.clone().max(get(r).1.clone())),
                    Term::Atom(_) | Term::Forall(..) | Term::Exists(..) => unreachable!("only `src` is read"),
                }
            };
            val.insert(u, iv);
        }
        val.remove(path.last().expect("nonempty path")).expect("evaluated")
    }
}

fn range(tab: &[Degree], dom: &[usize]) -> (Degree, Degree) {
    let vals = dom.iter().map(|&v| &tab[v]);
    (vals.clone().min().expect("nonempty domain").clone(), vals.max().expect("nonempty domain").clone())
}

/// Rounds outward once a denominator passes 64 bits; repeated products
/// would otherwise double the size of the bounds every round.
fn coarsen(d: Degree, up: bool) -> Degree {
    if d.as_ratio().denom().bits() <= 64 {
        return d;
    }
    let scale = BigRational::from_integer(BigInt::one() << 64usize);
    let scaled = d.as_ratio() * &scale;
    let q = if up { scaled.ceil() } else { scaled.floor() };
    clamp(q / scale)
}

/// Intersects `slot` with `[lo, hi]`: `None` if empty, else whether it shrank.
fn meet(slot: &mut (Degree, Degree), lo: Degree, hi: Degree) -> Option<bool> {
    let (lo, hi) = (coarsen(lo, false), coarsen(hi, true));
    let mut changed = false;
    if lo > slot.0 {
        slot.0 = lo;
        changed = true;
    }
    if hi < slot.1 {
        slot.1 = hi;
        changed = true;
    }
    (slot.0 <= slot.1).then_some(changed)
}

fn up(
    f: OperatorFamily,
    node: Term,
    x: usize,
    n: usize,
    role_base: usize,
    hull: &[(Degree, Degree)],
    cell: &[(Degree, Degree)],
) -> (Degree, Degree) {
    let at = |t: usize, y: usize| &hull[t * n + y];
    let role = |r: usize, y: usize| &cell[role_base + r * n * n + x * n + y];
    match node {
        Term::Top => (Degree::one(), Degree::one()),
        Term::Bottom => (Degree::zero(), Degree::zero()),
        Term::Atom(i) => cell[i * n + x].clone(),
        Term::Not(d) => (f.negation(&at(d, x).1), f.negation(&at(d, x).0)),
        Term::And(l, r) => (f.tnorm(&at(l, x).0, &at(r, x).0), f.tnorm(&at(l, x).1, &at(r, x).1)),
        Term::Or(l, r) => (f.tconorm(&at(l, x).0, &at(r, x).0), f.tconorm(&at(l, x).1, &at(r, x).1)),
        Term::Min(l, r) => (at(l, x).0.clone().min(at(r, x).0.clone()), at(l, x).1.clone().min(at(r, x).1.clone())),
        Term::Max(l, r) => (at(l, x).0.clone().max(at(r, x).0.clone()), at(l, x).1.clone().max(at(r, x).1.clone())),
        Term::Forall(r, d) => {
            let lo = (0..n).map(|y| f.implication(&role(r, y).1, &at(d, y).0)).min();
            let hi = (0..n).map(|y| f.implication(&role(r, y).0, &at(d, y).1)).min();
            (lo.unwrap_or_else(Degree::one), hi.unwrap_or_else(Degree::one))
        }
        Term::Exists(r, d) => {
            let lo = (0..n).map(|y| f.tnorm(&role(r, y).0, &at(d, y).0)).max();
            let hi = (0..n).map(|y| f.tnorm(&role(r, y).1, &at(d, y).1)).max();
            (lo.unwrap_or_else(Degree::zero), hi.unwrap_or_else(Degree::zero))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn down(
    f: OperatorFamily,
    node: Term,
    x: usize,
    n: usize,
    role_base: usize,
    t: usize,
    hull: &mut [(Degree, Degree)],
    cell: &mut [(Degree, Degree)],
) -> Option<bool> {
    let (lo, hi) = hull[t * n + x].clone();
    let zero = Degree::zero;
    let one = Degree::one;
    let mut changed = false;
    match node {
        Term::Top | Term::Bottom => {}
        Term::Atom(i) => changed |= meet(&mut cell[i * n + x], lo, hi)?,
        Term::Not(d) => {
            let slot = &mut hull[d * n + x];
            changed |= match f {
                OperatorFamily::Zadeh | OperatorFamily::Lukasiewicz => meet(slot, hi.complement(), lo.complement())?,
                _ if !lo.is_zero() => meet(slot, zero(), zero())?,
                _ => false,
            };
        }
        Term::And(l, r) => {
            for (a, b) in [(l, r), (r, l)] {
                let (b_lo, b_hi) = hull[b * n + x].clone();
                let new_lo = tnorm_lower_inv(f, &lo, &b_hi)?;
                let new_hi = tnorm_upper_inv(f, &hi, &b_lo);
                changed |= meet(&mut hull[a * n + x], new_lo, new_hi)?;
            }
        }
        Term::Or(l, r) => {
            for (a, b) in [(l, r), (r, l)] {
                let (b_lo, b_hi) = hull[b * n + x].clone();
                let new_lo = tconorm_lower_inv(f, &lo, &b_hi);
                let new_hi = tconorm_upper_inv(f, &hi, &b_lo)?;
                changed |= meet(&mut hull[a * n + x], new_lo, new_hi)?;
            }
        }
        Term::Min(l, r) => {
            for (a, b) in [(l, r), (r, l)] {
                let b_lo = hull[b * n + x].0.clone();
                let new_hi = if b_lo > hi { hi.clone() } else { one() };
                changed |= meet(&mut hull[a * n + x], lo.clone(), new_hi)?;
            }
        }
        Term::Max(l, r) => {
            for (a, b) in [(l, r), (r, l)] {
                let b_hi = hull[b * n + x].1.clone();
                let new_lo = if b_hi < lo { lo.clone() } else { zero() };
                changed |= meet(&mut hull[a * n + x], new_lo, hi.clone())?;
            }
        }
        Term::Forall(r, d) => {
            for y in 0..n {
                let rv = role_base + r * n * n + x * n + y;
                let (r_lo, _) = cell[rv].clone();
                let (_, d_hi) = hull[d * n + y].clone();
                if f == OperatorFamily::Zadeh {
                    let nl = lo.complement();
                    if d_hi < lo {
                        changed |= meet(&mut cell[rv], zero(), nl.clone())?;
                    }
                    if r_lo > nl {
                        changed |= meet(&mut hull[d * n + y], lo.clone(), one())?;
                    }
                } else {
                    changed |= meet(&mut hull[d * n + y], f.tnorm(&r_lo, &lo), one())?;
                    changed |= meet(&mut cell[rv], zero(), f.implication(&lo, &d_hi))?;
                }
            }
        }
        Term::Exists(r, d) => {
            for y in 0..n {
                let rv = role_base + r * n * n + x * n + y;
                let (r_lo, _) = cell[rv].clone();
                let (d_lo, _) = hull[d * n + y].clone();
                changed |= meet(&mut hull[d * n + y], zero(), tnorm_upper_inv(f, &hi, &r_lo))?;
                changed |= meet(&mut cell[rv], zero(), tnorm_upper_inv(f, &hi, &d_lo))?;
            }
        }
    }
    Some(changed)
}

fn clamp(q: BigRational) -> Degree {
    let q = q.max(BigRational::zero()).min(BigRational::one());
    Degree::from_ratio(q).expect("clamped into [0, 1]")
}

/// Largest `a` with `a ⊗ b <= h`.
fn tnorm_upper_inv(f: OperatorFamily, h: &Degree, b: &Degree) -> Degree {
    let f = if f == OperatorFamily::Zadeh { OperatorFamily::Goedel } else { f };
    f.implication(b, h)
}

/// Least `a` with `a ⊗ b >= l`; `None` if there is none.
fn tnorm_lower_inv(f: OperatorFamily, l: &Degree, b: &Degree) -> Option<Degree> {
    if l.is_zero() {
        return Some(Degree::zero());
    }
    if b < l {
        return None;
    }
    let (l, b) = (l.as_ratio(), b.as_ratio());
    Some(match f {
        OperatorFamily::Lukasiewicz => clamp(l + BigRational::one() - b),
        OperatorFamily::Product => clamp(l / b),
        OperatorFamily::Zadeh | OperatorFamily::Goedel => clamp(l.clone()),
    })
}

/// Largest `a` with `a ⊕ b <= h`; `None` if there is none.
fn tconorm_upper_inv(f: OperatorFamily, h: &Degree, b: &Degree) -> Option<Degree> {
    if b > h {
        return None;
    }
    if h.is_one() {
        return Some(Degree::one());
    }
    let (h, b) = (h.as_ratio(), b.as_ratio());
    Some(match f {
        OperatorFamily::Lukasiewicz => clamp(h - b),
        OperatorFamily::Product => clamp((h - b) / (BigRational::one() - b)),
        OperatorFamily::Zadeh | OperatorFamily::Goedel => clamp(h.clone()),
    })
}

/// Least `a` with `a ⊕ b >= l`.
fn tconorm_lower_inv(f: OperatorFamily, l: &Degree, b: &Degree) -> Degree {
    if b >= l {
        return Degree::zero();
    }
    let (l, b) = (l.as_ratio(), b.as_ratio());
    match f {
        OperatorFamily::Lukasiewicz => clamp(l - b),
        OperatorFamily::Product => clamp((l - b) / (BigRational::one() - b)),
        OperatorFamily::Zadeh | OperatorFamily::Goedel => clamp(l.clone()),
    }
}

fn has_quantifier(c: &Concept) -> bool {
    matches!(c, Concept::Forall(..) | Concept::Exists(..)) || c.children().into_iter().any(has_quantifier)
}

pub fn sat_search(
    kb: &KnowledgeBase,
    family: OperatorFamily,
    bounds: &SearchBounds,
) -> Result<SearchOutcome, SearchError> {
    bounds.validate()?;
    let run = || search_sizes(kb, family, bounds);
    match bounds.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| SearchError::InvalidBounds(e.to_string()))?;
            Ok(pool.install(run))
        }
        None => Ok(run()),
    }
}

fn search_sizes(kb: &KnowledgeBase, family: OperatorFamily, bounds: &SearchBounds) -> SearchOutcome {
    let start = Instant::now();
    let grid = bounds.grid();
    let sig = kb.signature();
    let individuals = individuals_of(kb);
    let axioms = kb.core_axioms();
    let workers = rayon::current_num_threads();
    let mut stats = SearchStats::default();
    let mut notes = BTreeSet::new();
    let mut log = Vec::new();

    let mut status = SearchStatus::UnsatWithinBounds;
    'sizes: for n in 1..=bounds.max_size {
        let cells = Cells { concepts: sig.concepts.iter().cloned().collect(), roles: sig.roles.iter().cloned().collect(), n };
        let ctx = Ctx::new(kb, family, &grid, &cells, bounds, stats.nodes);
        let mut result = Flow::Continue;
        let assignments = n.checked_pow(individuals.len() as u32).expect("assignment count fits");
        for code in 0..assignments {
            let mut sigma = Vec::with_capacity(individuals.len());
            let mut rest = code;
            for ind in individuals.iter().rev() {
                sigma.push((ind.clone(), rest % n));
                rest /= n;
            }
            sigma.reverse();
            match plan(&axioms, &ctx, &sigma) {
                Ok(p) => {
                    result = ctx.run_plan(&p, workers);
                    if !matches!(result, Flow::Continue) {
                        break;
                    }
                }
                Err(note) => {
                    ctx.pruned.fetch_add(1, Ordering::Relaxed);
                    notes.extend(note);
                }
            }
        }
        let size_nodes = ctx.nodes.load(Ordering::Relaxed).min(ctx.budget.unwrap_or(u64::MAX));
        stats.nodes += size_nodes;
        stats.candidates += ctx.candidates.load(Ordering::Relaxed);
        stats.pruned += ctx.pruned.load(Ordering::Relaxed);
        let verdict = match result {
            Flow::Found(m) => {
                status = SearchStatus::Sat(m);
                "sat"
            }
            Flow::Exhausted => {
                status = SearchStatus::BudgetExhausted;
                "budget-exhausted"
            }
            Flow::Continue => {
                stats.sizes_completed.push(n);
                "unsat"
            }
        };
        log.push(format!(
            "size={n} grid={} nodes={size_nodes} candidates={} pruned={} result={verdict}",
            grid.len(),
            ctx.candidates.load(Ordering::Relaxed),
            ctx.pruned.load(Ordering::Relaxed),
        ));
        if verdict != "unsat" {
            break 'sizes;
        }
    }
    stats.elapsed_ms = start.elapsed().as_millis();
    SearchOutcome { status, stats, notes: notes.into_iter().collect(), log }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Refutation {
    pub satisfied: bool,
    pub violation: Option<AxiomCheck>,
    /// For a violated inclusion: the element where the infimum is attained.
    pub witness: Option<String>,
    pub message: String,
}

pub fn refute_candidate(
    kb: &KnowledgeBase,
    family: OperatorFamily,
    interp: &FiniteInterpretation,
) -> Result<Refutation, SemanticsError> {
    let report = check_kb(interp, family, kb)?;
    let Some(v) = report.first_violation().cloned() else {
        return Ok(Refutation {
            satisfied: true,
            violation: None,
            witness: None,
            message: format!("all {} axioms satisfied under {family}", report.axioms.len()),
        });
    };
    let witness = match &v.axiom {
        Axiom::GciGeq { sub, sup, .. } => {
            let (x, _) = Evaluator::new(interp, family).subsumption_witness(sub, sup);
            Some(interp.element_name(x).to_string())
        }
        _ => None,
    };
    let cmp = if matches!(v.axiom, Axiom::ConceptLeq { .. }) { "above" } else { "below" };
    let at = witness.as_deref().map(|w| format!(" (attained at {w})")).unwrap_or_default();
    let message = format!("{} violated: achieved {} {cmp} required {}{at}", v.axiom, v.achieved, v.required);
    Ok(Refutation { satisfied: false, violation: Some(v), witness, message })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kbio::{parse_interpretation, parse_kb};

    fn k1() -> KnowledgeBase {
        parse_kb(include_str!("../fixtures/k1.kb")).unwrap()
    }

    fn k2() -> KnowledgeBase {
        parse_kb(include_str!("../fixtures/k2.kb")).unwrap()
    }

    #[test]
    fn grid_contains_endpoints() {
        let g = SearchBounds::new(1, &[2, 5]).grid();
        assert_eq!(g.len(), 7);
        assert_eq!(g[0], Degree::zero());
        assert_eq!(g[6], Degree::one());
        assert_eq!(SearchBounds::new(1, &[]).grid().len(), 2);
    }

    #[test]
    fn k1_zadeh_one_element() {
        let out = sat_search(&k1(), OperatorFamily::Zadeh, &SearchBounds::new(1, &[1, 2, 5])).unwrap();
        let m = out.model().expect("sat");
        assert_eq!(m.size(), 1);
        assert_eq!(m.concept_value("YoungPerson", 0), &Degree::ratio(1, 5));
        assert_eq!(m.role_value("likes", 0, 0), &Degree::ratio(4, 5));
        assert!(m.concept_value("Inn", 0).is_zero());
    }

    #[test]
    fn bottom_assertion_is_unsat_at_every_size() {
        let kb = parse_kb("abox:\n (a : Bot) >= 1/2\n").unwrap();
        for f in OperatorFamily::ALL {
            let out = sat_search(&kb, f, &SearchBounds::new(3, &[2])).unwrap();
            assert!(out.is_unsat());
            assert_eq!(out.stats.sizes_completed, vec![1, 2, 3]);
            assert!(!out.notes.is_empty());
        }
    }

    #[test]
    fn k2_small_bounds_unsat() {
        for f in [OperatorFamily::Lukasiewicz, OperatorFamily::Product] {
            let out = sat_search(&k2(), f, &SearchBounds::new(2, &[1, 2])).unwrap();
            assert!(out.is_unsat(), "{f}");
        }
    }

    #[test]
    fn exhaustive_count_matches_formula() {
        let kb = parse_kb("abox:\n ((a, a) : R) >= 0\n (a : A) >= 0\n").unwrap();
        let out = sat_search(&kb, OperatorFamily::Lukasiewicz, &SearchBounds::new(1, &[2]).exhaustive()).unwrap();
        assert!(out.is_sat());

        let kb = parse_kb("abox:\n ((a, a) : R) >= 0\n (a : A) >= 0\n (a : Bot) >= 1\n").unwrap();
        let out = sat_search(&kb, OperatorFamily::Lukasiewicz, &SearchBounds::new(2, &[2]).exhaustive()).unwrap();
        assert!(out.is_unsat());
        // n=1: 3^1 * 3^1 * 1; n=2: 3^2 * 3^4 * 2
        assert_eq!(out.stats.candidates, 9 + 9 * 81 * 2);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let kb = parse_kb(include_str!("../fixtures/k2_without_axiom4.kb")).unwrap();
        let a = sat_search(&kb, OperatorFamily::Lukasiewicz, &SearchBounds::new(2, &[1, 2]).threads(1)).unwrap();
        let b = sat_search(&kb, OperatorFamily::Lukasiewicz, &SearchBounds::new(2, &[1, 2]).threads(4)).unwrap();
        assert!(a.is_sat());
        assert_eq!(a.status, b.status);
    }

    #[test]
    fn budget_is_reported() {
        let out = sat_search(&k1(), OperatorFamily::Lukasiewicz, &SearchBounds::new(2, &[1, 2]).with_budget(1)).unwrap();
        assert_eq!(out.status, SearchStatus::BudgetExhausted);
        let out = sat_search(&k1(), OperatorFamily::Lukasiewicz, &SearchBounds::new(2, &[1, 2])).unwrap();
        assert!(out.is_sat());
    }

    #[test]
    fn refutations() {
        let loop_half = parse_interpretation(
            "domain: x\nindividuals:\n a = x\nconcept A:\n x = 1/2\nrole R:\n (x, x) = 1\n",
        )
        .unwrap();
        let r = refute_candidate(&k2(), OperatorFamily::Lukasiewicz, &loop_half).unwrap();
        assert!(!r.satisfied);
        let v = r.violation.unwrap();
        assert_eq!(v.axiom.to_string(), "⟨A ⊑ ∀R.A ⊓ ∀R.A ≥ 1⟩");
        assert_eq!(v.achieved, Degree::half());
        assert_eq!(r.witness.as_deref(), Some("x"));

        let loop_one = parse_interpretation(
            "domain: x\nindividuals:\n a = x\nconcept A:\n x = 1\nrole R:\n (x, x) = 1\n",
        )
        .unwrap();
        let r = refute_candidate(&k2(), OperatorFamily::Lukasiewicz, &loop_one).unwrap();
        let v = r.violation.unwrap();
        assert!(matches!(v.axiom, Axiom::ConceptLeq { .. }));
        assert_eq!(v.achieved, Degree::one());

        let m = parse_interpretation(include_str!("../fixtures/k1_one_element.model")).unwrap();
        assert!(refute_candidate(&k1(), OperatorFamily::Zadeh, &m).unwrap().satisfied);
    }
}
