//! The two example knowledge bases and the infinite canonical models that
//! satisfy K₂ under Łukasiewicz and Product semantics.
//!
//! Both models live on the naturals `1, 2, 3, ...` with the crisp successor
//! relation as `R` (Łukasiewicz adds a node `∞` with `R(∞, ∞) = 1`), and the
//! individual `a` at node 1. Since every node has exactly one successor with
//! degree 1, quantifiers reduce to evaluation at that successor and nothing
//! infinite is ever approximated.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::degrees::{ld_negation, ld_tnorm, Degree, LogDyadicDegree, OperatorFamily};
use crate::kbio::parse_kb;
use crate::semantics::FiniteInterpretation;
use crate::syntax::{Concept, KnowledgeBase};

pub const ROLE: &str = "R";
pub const ATOM: &str = "A";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FmpError {
    #[error("no canonical model for {0} (only Lukasiewicz and Product)")]
    UnsupportedFamily(OperatorFamily),
    #[error("`or` is not supported on the Product model: values stay of the form 2^r only without the t-conorm")]
    DisjunctionUnderProduct,
    #[error("the Product model has no node ∞")]
    NoInfinityNode,
    #[error("node numbering starts at 1")]
    NodeZero,
    #[error("Product model values beyond node 1 are irrational and cannot be exported")]
    NotRational,
}

pub fn k1() -> KnowledgeBase {
    parse_kb(include_str!("../fixtures/k1.kb")).expect("fixture parses")
}

pub fn k2() -> KnowledgeBase {
    parse_kb(include_str!("../fixtures/k2.kb")).expect("fixture parses")
}

/// K₂ without `A ≡ ∀R.A ⊓ ∀R.A`.
pub fn k2_without_axiom4() -> KnowledgeBase {
    parse_kb(include_str!("../fixtures/k2_without_axiom4.kb")).expect("fixture parses")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Node {
    Finite(u64),
    Infinity,
}

impl Node {
    fn successor(self) -> Node {
        match self {
            Node::Finite(i) => Node::Finite(i + 1),
            Node::Infinity => Node::Infinity,
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Finite(i) => write!(f, "{i}"),
            Node::Infinity => f.write_str("∞"),
        }
    }
}

/// A value of the Łukasiewicz model (rational) or the Product model (`2^r`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Exact(Degree),
    LogDyadic(LogDyadicDegree),
}

impl Value {
    pub fn is_zero(&self) -> bool {
        match self {
            Value::Exact(d) => d.is_zero(),
            Value::LogDyadic(l) => l.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Value::Exact(d) => d.is_one(),
            Value::LogDyadic(l) => l.is_one(),
        }
    }

    pub fn cmp_degree(&self, d: &Degree) -> Ordering {
        match self {
            Value::Exact(v) => v.cmp(d),
            Value::LogDyadic(l) => l.cmp_degree(d),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(d) => d.to_f64(),
            Value::LogDyadic(l) => l.to_f64(),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => Some(a.cmp(b)),
            (Value::LogDyadic(a), Value::LogDyadic(b)) => Some(a.cmp(b)),
            (Value::LogDyadic(a), Value::Exact(b)) => Some(a.cmp_degree(b)),
            (Value::Exact(a), Value::LogDyadic(b)) => Some(b.cmp_degree(a).reverse()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(d) => d.fmt(f),
            Value::LogDyadic(l) => l.fmt(f),
        }
    }
}

/// `(2^i - 1) / 2^i`.
pub fn lukasiewicz_value(i: u64) -> Degree {
    let p = BigInt::one() << i;
    Degree::from_ratio(BigRational::new(&p - 1, p)).expect("in range")
}

/// `2^(-1/2^(i-1))`.
pub fn product_value(i: u64) -> LogDyadicDegree {
    let r = BigRational::new(BigInt::from(-1), BigInt::one() << (i - 1));
    LogDyadicDegree::pow2(r).expect("negative exponent")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalModel {
    pub family: OperatorFamily,
    /// Replaces the closed-form value of `A` at finite nodes.
    pub overrides: BTreeMap<u64, Value>,
}

impl CanonicalModel {
    pub fn new(family: OperatorFamily) -> Result<CanonicalModel, FmpError> {
        match family {
            OperatorFamily::Lukasiewicz | OperatorFamily::Product => {
                Ok(CanonicalModel { family, overrides: BTreeMap::new() })
            }
            f => Err(FmpError::UnsupportedFamily(f)),
        }
    }

    pub fn lukasiewicz() -> CanonicalModel {
        CanonicalModel::new(OperatorFamily::Lukasiewicz).expect("supported")
    }

    pub fn product() -> CanonicalModel {
        CanonicalModel::new(OperatorFamily::Product).expect("supported")
    }

    pub fn with_override(mut self, node: u64, value: Value) -> CanonicalModel {
        self.overrides.insert(node, value);
        self
    }

    pub fn has_infinity(&self) -> bool {
        self.family == OperatorFamily::Lukasiewicz
    }

    fn check_node(&self, node: Node) -> Result<(), FmpError> {
        match node {
            Node::Finite(0) => Err(FmpError::NodeZero),
            Node::Infinity if !self.has_infinity() => Err(FmpError::NoInfinityNode),
            _ => Ok(()),
        }
    }

    pub fn atom_value(&self, node: Node) -> Result<Value, FmpError> {
        self.check_node(node)?;
        Ok(match node {
            Node::Infinity => Value::Exact(Degree::one()),
            Node::Finite(i) => match self.overrides.get(&i) {
                Some(v) => v.clone(),
                None if self.family == OperatorFamily::Lukasiewicz => Value::Exact(lukasiewicz_value(i)),
                None => Value::LogDyadic(product_value(i)),
            },
        })
    }

    fn constant(&self, one: bool) -> Value {
        match (self.family, one) {
            (OperatorFamily::Product, true) => Value::LogDyadic(LogDyadicDegree::one()),
            (OperatorFamily::Product, false) => Value::LogDyadic(LogDyadicDegree::Zero),
            (_, true) => Value::Exact(Degree::one()),
            (_, false) => Value::Exact(Degree::zero()),
        }
    }
}

pub fn eval_on_canonical(m: &CanonicalModel, c: &Concept, node: Node) -> Result<Value, FmpError> {
    m.check_node(node)?;
    if m.family == OperatorFamily::Product && c.contains_or() {
        return Err(FmpError::DisjunctionUnderProduct);
    }
    eval_at(m, c, node)
}

fn eval_at(m: &CanonicalModel, c: &Concept, node: Node) -> Result<Value, FmpError> {
    let f = m.family;
    Ok(match c {
        Concept::Top => m.constant(true),
        Concept::Bottom => m.constant(false),
        Concept::Atomic(a) if a == ATOM => m.atom_value(node)?,
        Concept::Atomic(_) => m.constant(false),
        Concept::Not(d) => match eval_at(m, d, node)? {
            Value::Exact(v) => Value::Exact(f.negation(&v)),
            Value::LogDyadic(v) => Value::LogDyadic(ld_negation(&v)),
        },
        Concept::And(l, r) => match (eval_at(m, l, node)?, eval_at(m, r, node)?) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(f.tnorm(&a, &b)),
            (Value::LogDyadic(a), Value::LogDyadic(b)) => Value::LogDyadic(ld_tnorm(&a, &b)),
            _ => unreachable!("one number system per model"),
        },
        Concept::Or(l, r) => match (eval_at(m, l, node)?, eval_at(m, r, node)?) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(f.tconorm(&a, &b)),
            _ => return Err(FmpError::DisjunctionUnderProduct),
        },
        // The only R-successor has degree 1; other roles are empty.
        Concept::Forall(role, d) | Concept::Exists(role, d) if role == ROLE => eval_at(m, d, node.successor())?,
        Concept::Forall(..) => m.constant(true),
        Concept::Exists(..) => m.constant(false),
    })
}

/// Values of `A` along the chain forced by K₂, by the recurrence.
pub fn forced_sequence(family: OperatorFamily, n: usize) -> Result<Vec<Value>, FmpError> {
    match family {
        OperatorFamily::Lukasiewicz => {
            let mut out = Vec::with_capacity(n);
            let mut a = BigRational::new(1.into(), 2.into());
            let two = BigRational::from_integer(2.into());
            for _ in 0..n {
                out.push(Value::Exact(Degree::from_ratio(a.clone()).expect("in range")));
                a = (&a + BigRational::one()) / &two;
            }
            Ok(out)
        }
        OperatorFamily::Product => {
            let mut out = Vec::with_capacity(n);
            let mut e = BigRational::from_integer((-1).into());
            for _ in 0..n {
                out.push(Value::LogDyadic(LogDyadicDegree::pow2(e.clone()).expect("negative")));
                e /= BigRational::from_integer(2.into());
            }
            Ok(out)
        }
        f => Err(FmpError::UnsupportedFamily(f)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub node: Node,
    pub axiom: u8,
    pub identity: &'static str,
    pub lhs: Value,
    pub rhs: Value,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrefixReport {
    pub family: OperatorFamily,
    pub depth: u64,
    pub checks: Vec<IdentityCheck>,
    pub passed: bool,
}

impl PrefixReport {
    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| !c.ok)
    }

    pub fn table(&self) -> String {
        let mut out = format!("{:>6}  {:>5}  {:<24}  {:<28}  {:<28}  verdict\n", "node", "axiom", "identity", "lhs", "rhs");
        for c in &self.checks {
            out.push_str(&format!(
                "{:>6}  {:>5}  {:<24}  {:<28}  {:<28}  {}\n",
                c.node.to_string(),
                c.axiom,
                c.identity,
                abbreviate(&c.lhs.to_string()),
                abbreviate(&c.rhs.to_string()),
                if c.ok { "ok" } else { "FAIL" }
            ));
        }
        out
    }
}

fn abbreviate(s: &str) -> String {
    if s.chars().count() <= 28 {
        s.to_string()
    } else {
        let head: String = s.chars().take(12).collect();
        let tail: String = s.chars().rev().take(12).collect::<Vec<_>>().into_iter().rev().collect();
        format!("{head}..{tail}")
    }
}

fn node_checks(m: &CanonicalModel, node: Node) -> Result<Vec<IdentityCheck>, FmpError> {
    let a = Concept::atom(ATOM);
    let all = Concept::forall(ROLE, a.clone());
    let some = Concept::exists(ROLE, a.clone());
    let twice = Concept::and(all.clone(), all.clone());
    let mut out = Vec::new();
    if node == Node::Finite(1) {
        let lhs = eval_at(m, &a, node)?;
        let rhs = Value::Exact(Degree::half());
        let ok = lhs.partial_cmp(&rhs) == Some(Ordering::Equal);
        out.push(IdentityCheck { node, axiom: 1, identity: "A(a) = 1/2", lhs, rhs, ok });
    }
    let lhs = eval_at(m, &Concept::Top, node)?;
    let rhs = eval_at(m, &Concept::exists(ROLE, Concept::Top), node)?;
    let ok = lhs <= rhs;
    out.push(IdentityCheck { node, axiom: 2, identity: "Top <= exists R.Top", lhs, rhs, ok });
    let lhs = eval_at(m, &all, node)?;
    let rhs = eval_at(m, &some, node)?;
    let ok = lhs == rhs;
    out.push(IdentityCheck { node, axiom: 3, identity: "forall R.A = exists R.A", lhs, rhs, ok });
    let lhs = eval_at(m, &a, node)?;
    let rhs = eval_at(m, &twice, node)?;
    let ok = lhs == rhs;
    out.push(IdentityCheck { node, axiom: 4, identity: "A = (forall R.A)^2", lhs, rhs, ok });
    Ok(out)
}

/// Checks K₂ at nodes `1..=depth` (and `∞` for Łukasiewicz). Degree-1
/// inclusions are checked pointwise as `<=`, equivalences as equality.
pub fn verify_k2_prefix(m: &CanonicalModel, depth: u64) -> Result<PrefixReport, FmpError> {
    let mut nodes: Vec<Node> = (1..=depth).map(Node::Finite).collect();
    if m.has_infinity() {
        nodes.push(Node::Infinity);
    }
    let per_node: Vec<Vec<IdentityCheck>> =
        nodes.par_iter().map(|&n| node_checks(m, n)).collect::<Result<_, _>>()?;
    let checks: Vec<IdentityCheck> = per_node.into_iter().flatten().collect();
    let passed = checks.iter().all(|c| c.ok);
    Ok(PrefixReport { family: m.family, depth, checks, passed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TailClass {
    /// Łukasiewicz: values tend to 0 and the value at ∞ is 0.
    Cond1,
    /// Łukasiewicz: values tend to 1 and the value at ∞ is 1.
    Cond2,
    IdenticallyZero,
    PositiveNondecreasingSupOne,
}

impl TailClass {
    pub fn tends_to_one(self) -> bool {
        matches!(self, TailClass::Cond2 | TailClass::PositiveNondecreasingSupOne)
    }
}

impl fmt::Display for TailClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TailClass::Cond1 => "Cond1",
            TailClass::Cond2 => "Cond2",
            TailClass::IdenticallyZero => "IdenticallyZero",
            TailClass::PositiveNondecreasingSupOne => "PositiveNondecreasingSupOne",
        })
    }
}

/// Rewrites into `¬`, `⊓`, `∀` only, using the Łukasiewicz dualities.
pub fn reduce_lukasiewicz(c: &Concept) -> Concept {
    match c {
        Concept::Top | Concept::Atomic(_) => c.clone(),
        Concept::Bottom => Concept::not(Concept::Top),
        Concept::Not(d) => Concept::not(reduce_lukasiewicz(d)),
        Concept::And(l, r) => Concept::and(reduce_lukasiewicz(l), reduce_lukasiewicz(r)),
        Concept::Or(l, r) => Concept::not(Concept::and(
            Concept::not(reduce_lukasiewicz(l)),
            Concept::not(reduce_lukasiewicz(r)),
        )),
        Concept::Forall(role, d) => Concept::forall(role.clone(), reduce_lukasiewicz(d)),
        Concept::Exists(role, d) => {
            Concept::not(Concept::forall(role.clone(), Concept::not(reduce_lukasiewicz(d))))
        }
    }
}

pub fn tail_classify(m: &CanonicalModel, c: &Concept) -> TailClass {
    match m.family {
        OperatorFamily::Product => classify_product(c),
        _ => classify_lukasiewicz(&reduce_lukasiewicz(c)),
    }
}

fn classify_lukasiewicz(c: &Concept) -> TailClass {
    use TailClass::{Cond1, Cond2};
    match c {
        Concept::Top => Cond2,
        Concept::Atomic(a) if a == ATOM => Cond2,
        Concept::Atomic(_) => Cond1,
        Concept::Not(d) => match classify_lukasiewicz(d) {
            Cond1 => Cond2,
            _ => Cond1,
        },
        Concept::And(l, r) => {
            if classify_lukasiewicz(l) == Cond2 && classify_lukasiewicz(r) == Cond2 {
                Cond2
            } else {
                Cond1
            }
        }
        Concept::Forall(role, d) if role == ROLE => classify_lukasiewicz(d),
        Concept::Forall(..) => Cond2,
        Concept::Bottom | Concept::Or(..) | Concept::Exists(..) => unreachable!("reduced"),
    }
}

fn classify_product(c: &Concept) -> TailClass {
    use TailClass::{IdenticallyZero as Zero, PositiveNondecreasingSupOne as Pos};
    match c {
        Concept::Top => Pos,
        Concept::Bottom => Zero,
        Concept::Atomic(a) if a == ATOM => Pos,
        Concept::Atomic(_) => Zero,
        Concept::Not(d) => match classify_product(d) {
            Zero => Pos,
            _ => Zero,
        },
        Concept::And(l, r) => {
            if classify_product(l) == Pos && classify_product(r) == Pos {
                Pos
            } else {
                Zero
            }
        }
        Concept::Or(l, r) => {
            if classify_product(l) == Pos || classify_product(r) == Pos {
                Pos
            } else {
                Zero
            }
        }
        Concept::Forall(role, d) | Concept::Exists(role, d) if role == ROLE => classify_product(d),
        Concept::Forall(..) => Pos,
        Concept::Exists(..) => Zero,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConsistencyReport {
    pub class: TailClass,
    pub consistent: bool,
    /// First node from which every sampled value is within tolerance of the limit.
    pub crossover: Option<u64>,
    /// A node contradicting the class, if any.
    pub counterexample: Option<u64>,
    pub last_value: Value,
    pub infinity_value: Option<Value>,
}

pub fn classify_vs_prefix(
    m: &CanonicalModel,
    c: &Concept,
    depth: u64,
    tolerance: u64,
) -> Result<ConsistencyReport, FmpError> {
    let class = tail_classify(m, c);
    let values: Vec<Value> = (1..=depth)
        .into_par_iter()
        .map(|i| eval_on_canonical(m, c, Node::Finite(i)))
        .collect::<Result<_, _>>()?;
    let tol = tolerance as i64;
    let near = |v: &Value| {
        if class.tends_to_one() {
            v.cmp_degree(&Degree::ratio(tol - 1, tol)) != Ordering::Less
        } else {
            v.cmp_degree(&Degree::ratio(1, tol)) != Ordering::Greater
        }
    };
    let crossover = values.iter().rposition(|v| !near(v)).map_or(Some(1), |k| {
        (k + 1 < values.len()).then_some(k as u64 + 2)
    });
    let mut counterexample = None;
    match class {
        TailClass::IdenticallyZero => {
            counterexample = values.iter().position(|v| !v.is_zero()).map(|k| k as u64 + 1);
        }
        TailClass::PositiveNondecreasingSupOne => {
            for (k, v) in values.iter().enumerate() {
                let bad = v.is_zero() || (k > 0 && values[k - 1].partial_cmp(v) == Some(Ordering::Greater));
                if bad {
                    counterexample = Some(k as u64 + 1);
                    break;
                }
            }
        }
        _ => {}
    }
    if counterexample.is_none() && crossover.is_none() {
        counterexample = Some(depth);
    }
    let infinity_value = if m.has_infinity() { Some(eval_on_canonical(m, c, Node::Infinity)?) } else { None };
    if let Some(v) = &infinity_value {
        let expected = class.tends_to_one();
        if (expected && !v.is_one()) || (!expected && !v.is_zero()) {
            counterexample.get_or_insert(depth);
        }
    }
    Ok(ConsistencyReport {
        class,
        consistent: counterexample.is_none(),
        crossover,
        counterexample,
        last_value: values.last().cloned().unwrap_or_else(|| m.constant(false)),
        infinity_value,
    })
}

/// The first `depth` nodes (and `∞` for Łukasiewicz) as a finite
/// interpretation. Node `depth` has no successor, so this is not a model.
pub fn export_prefix(m: &CanonicalModel, depth: u64) -> Result<FiniteInterpretation, FmpError> {
    let mut names: Vec<String> = (1..=depth).map(|i| format!("n{i}")).collect();
    if m.has_infinity() {
        names.push("inf".into());
    }
    let mut interp = FiniteInterpretation::new(names.clone()).map_err(|_| FmpError::NodeZero)?;
    interp.assign("a", 0);
    let mut values = Vec::new();
    for i in 1..=depth {
        match m.atom_value(Node::Finite(i))? {
            Value::Exact(d) => values.push(d),
            Value::LogDyadic(l) => values.push(l.to_degree().ok_or(FmpError::NotRational)?),
        }
    }
    if m.has_infinity() {
        values.push(Degree::one());
    }
    *interp.declare_concept(ATOM, Degree::zero()) = values;
    interp.declare_role(ROLE, Degree::zero());
    for i in 1..depth as usize {
        interp.set_role(ROLE, i - 1, i, Degree::one());
    }
    if m.has_infinity() {
        let inf = names.len() - 1;
        interp.set_role(ROLE, inf, inf, Degree::one());
    }
    Ok(interp)
}
