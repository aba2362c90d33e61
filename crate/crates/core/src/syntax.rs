//! Concepts, axioms and knowledge bases, plus the structural analysis of
//! TBoxes (the "uses" relation and the acyclic/unfoldable classification).

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::degrees::Degree;

/// An ALC concept. There is deliberately no implication constructor and no
/// truth constant other than top and bottom.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Concept {
    Top,
    Bottom,
    Atomic(String),
    And(Box<Concept>, Box<Concept>),
    Or(Box<Concept>, Box<Concept>),
    Not(Box<Concept>),
    Forall(String, Box<Concept>),
    Exists(String, Box<Concept>),
}

impl Concept {
    pub fn atom(name: impl Into<String>) -> Concept {
        Concept::Atomic(name.into())
    }

    pub fn and(left: Concept, right: Concept) -> Concept {
        Concept::And(Box::new(left), Box::new(right))
    }

    pub fn or(left: Concept, right: Concept) -> Concept {
        Concept::Or(Box::new(left), Box::new(right))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(inner: Concept) -> Concept {
        Concept::Not(Box::new(inner))
    }

    pub fn forall(role: impl Into<String>, inner: Concept) -> Concept {
        Concept::Forall(role.into(), Box::new(inner))
    }

    pub fn exists(role: impl Into<String>, inner: Concept) -> Concept {
        Concept::Exists(role.into(), Box::new(inner))
    }

    /// Right-nested `n`-fold conjunction of `c` with itself (`n >= 1`).
    pub fn conj_power(c: &Concept, n: usize) -> Concept {
        assert!(n >= 1, "empty conjunction");
        (1..n).fold(c.clone(), |acc, _| Concept::and(c.clone(), acc))
    }

    pub fn atomic_name(&self) -> Option<&str> {
        match self {
            Concept::Atomic(name) => Some(name),
            _ => None,
        }
    }

    pub fn children(&self) -> Vec<&Concept> {
        match self {
            Concept::Top | Concept::Bottom | Concept::Atomic(_) => vec![],
            Concept::And(l, r) | Concept::Or(l, r) => vec![l, r],
            Concept::Not(c) | Concept::Forall(_, c) | Concept::Exists(_, c) => vec![c],
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    pub fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        if let Concept::Atomic(name) = self {
            out.insert(name.clone());
        }
        for c in self.children() {
            c.collect_atoms(out);
        }
    }

    pub fn collect_roles(&self, out: &mut BTreeSet<String>) {
        if let Concept::Forall(r, _) | Concept::Exists(r, _) = self {
            out.insert(r.clone());
        }
        for c in self.children() {
            c.collect_roles(out);
        }
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    pub fn mentions(&self, name: &str) -> bool {
        match self {
            Concept::Atomic(n) => n == name,
            _ => self.children().iter().any(|c| c.mentions(name)),
        }
    }

    pub fn contains_or(&self) -> bool {
        matches!(self, Concept::Or(..)) || self.children().iter().any(|c| c.contains_or())
    }

    /// Replaces every occurrence of the atom `name` by `by`, returning the
    /// number of occurrences replaced.
    pub fn substitute(&self, name: &str, by: &Concept) -> (Concept, usize) {
        match self {
            Concept::Atomic(n) if n == name => (by.clone(), 1),
            Concept::Top | Concept::Bottom | Concept::Atomic(_) => (self.clone(), 0),
            Concept::And(l, r) => {
                let ((l, a), (r, b)) = (l.substitute(name, by), r.substitute(name, by));
                (Concept::and(l, r), a + b)
            }
            Concept::Or(l, r) => {
                let ((l, a), (r, b)) = (l.substitute(name, by), r.substitute(name, by));
                (Concept::or(l, r), a + b)
            }
            Concept::Not(c) => {
                let (c, n) = c.substitute(name, by);
                (Concept::not(c), n)
            }
            Concept::Forall(role, c) => {
                let (c, n) = c.substitute(name, by);
                (Concept::forall(role.clone(), c), n)
            }
            Concept::Exists(role, c) => {
                let (c, n) = c.substitute(name, by);
                (Concept::exists(role.clone(), c), n)
            }
        }
    }

    pub fn to_ascii(&self) -> String {
        let mut out = String::new();
        write_concept(&mut out, self, &ASCII, 0);
        out
    }

    pub fn to_unicode(&self) -> String {
        let mut out = String::new();
        write_concept(&mut out, self, &UNICODE, 0);
        out
    }
}

struct Symbols {
    top: &'static str,
    bottom: &'static str,
    and: &'static str,
    or: &'static str,
    not: &'static str,
    forall: fn(&str) -> String,
    exists: fn(&str) -> String,
}

const ASCII: Symbols = Symbols {
    top: "Top",
    bottom: "Bot",
    and: " and ",
    or: " or ",
    not: "not ",
    forall: |r| format!("forall {r} . "),
    exists: |r| format!("exists {r} . "),
};

const UNICODE: Symbols = Symbols {
    top: "⊤",
    bottom: "⊥",
    and: " ⊓ ",
    or: " ⊔ ",
    not: "¬",
    forall: |r| format!("∀{r}."),
    exists: |r| format!("∃{r}."),
};

// Precedence: or = 1, and = 2, unary = 3. Binary connectives are right-nested,
// so a left operand of the same connective needs parentheses.
fn write_concept(out: &mut String, c: &Concept, sym: &Symbols, ctx: u8) {
    let binary = |out: &mut String, l: &Concept, r: &Concept, op: &str, prec: u8| {
        if ctx > prec {
            out.push('(');
        }
        write_concept(out, l, sym, prec + 1);
        out.push_str(op);
        write_concept(out, r, sym, prec);
        if ctx > prec {
            out.push(')');
        }
    };
    match c {
        Concept::Top => out.push_str(sym.top),
        Concept::Bottom => out.push_str(sym.bottom),
        Concept::Atomic(name) => out.push_str(name),
        Concept::And(l, r) => binary(out, l, r, sym.and, 2),
        Concept::Or(l, r) => binary(out, l, r, sym.or, 1),
        Concept::Not(inner) => {
            out.push_str(sym.not);
            write_concept(out, inner, sym, 3);
        }
        Concept::Forall(role, inner) => {
            out.push_str(&(sym.forall)(role));
            write_concept(out, inner, sym, 3);
        }
        Concept::Exists(role, inner) => {
            out.push_str(&(sym.exists)(role));
            write_concept(out, inner, sym, 3);
        }
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_unicode())
    }
}

impl Serialize for Concept {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_ascii())
    }
}

/// A core fuzzy axiom. Upper bounds on role assertions are not part of the
/// language, so there is no `RoleLeq`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axiom {
    ConceptGeq { individual: String, concept: Concept, degree: Degree },
    ConceptLeq { individual: String, concept: Concept, degree: Degree },
    RoleGeq { subject: String, object: String, role: String, degree: Degree },
    GciGeq { sub: Concept, sup: Concept, degree: Degree },
}

impl Axiom {
    pub fn degree(&self) -> &Degree {
        match self {
            Axiom::ConceptGeq { degree, .. }
            | Axiom::ConceptLeq { degree, .. }
            | Axiom::RoleGeq { degree, .. }
            | Axiom::GciGeq { degree, .. } => degree,
        }
    }

    pub fn is_assertion(&self) -> bool {
        !matches!(self, Axiom::GciGeq { .. })
    }

    pub fn individuals(&self) -> Vec<&str> {
        match self {
            Axiom::ConceptGeq { individual, .. } | Axiom::ConceptLeq { individual, .. } => {
                vec![individual]
            }
            Axiom::RoleGeq { subject, object, .. } => vec![subject, object],
            Axiom::GciGeq { .. } => vec![],
        }
    }

    pub fn concepts(&self) -> Vec<&Concept> {
        match self {
            Axiom::ConceptGeq { concept, .. } | Axiom::ConceptLeq { concept, .. } => vec![concept],
            Axiom::RoleGeq { .. } => vec![],
            Axiom::GciGeq { sub, sup, .. } => vec![sub, sup],
        }
    }

    fn collect_signature(&self, sig: &mut Signature) {
        for c in self.concepts() {
            c.collect_atoms(&mut sig.concepts);
            c.collect_roles(&mut sig.roles);
        }
        if let Axiom::RoleGeq { role, .. } = self {
            sig.roles.insert(role.clone());
        }
        sig.individuals.extend(self.individuals().into_iter().map(String::from));
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axiom::ConceptGeq { individual, concept, degree } => {
                write!(f, "⟨{individual}:{concept} ≥ {degree}⟩")
            }
            Axiom::ConceptLeq { individual, concept, degree } => {
                write!(f, "⟨{individual}:{concept} ≤ {degree}⟩")
            }
            Axiom::RoleGeq { subject, object, role, degree } => {
                write!(f, "⟨({subject},{object}):{role} ≥ {degree}⟩")
            }
            Axiom::GciGeq { sub, sup, degree } => write!(f, "⟨{sub} ⊑ {sup} ≥ {degree}⟩"),
        }
    }
}

impl Serialize for Axiom {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// A TBox entry. An equivalence is kept as one unit so that it counts as a
/// single definition of its left-hand side.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TboxAxiom {
    Inclusion { sub: Concept, sup: Concept, degree: Degree },
    Equivalence { left: Concept, right: Concept },
}

impl TboxAxiom {
    pub fn inclusion(sub: Concept, sup: Concept, degree: Degree) -> TboxAxiom {
        TboxAxiom::Inclusion { sub, sup, degree }
    }

    pub fn equivalence(left: Concept, right: Concept) -> TboxAxiom {
        TboxAxiom::Equivalence { left, right }
    }

    pub fn left(&self) -> &Concept {
        match self {
            TboxAxiom::Inclusion { sub, .. } => sub,
            TboxAxiom::Equivalence { left, .. } => left,
        }
    }

    pub fn right(&self) -> &Concept {
        match self {
            TboxAxiom::Inclusion { sup, .. } => sup,
            TboxAxiom::Equivalence { right, .. } => right,
        }
    }

    /// The core GCIs this entry stands for.
    pub fn core(&self) -> Vec<Axiom> {
        match self {
            TboxAxiom::Inclusion { sub, sup, degree } => vec![Axiom::GciGeq {
                sub: sub.clone(),
                sup: sup.clone(),
                degree: degree.clone(),
            }],
            TboxAxiom::Equivalence { left, right } => vec![
                Axiom::GciGeq { sub: left.clone(), sup: right.clone(), degree: Degree::one() },
                Axiom::GciGeq { sub: right.clone(), sup: left.clone(), degree: Degree::one() },
            ],
        }
    }
}

impl fmt::Display for TboxAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TboxAxiom::Inclusion { sub, sup, degree } => write!(f, "⟨{sub} ⊑ {sup} ≥ {degree}⟩"),
            TboxAxiom::Equivalence { left, right } => write!(f, "{left} ≡ {right}"),
        }
    }
}

impl Serialize for TboxAxiom {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    Geq,
    Leq,
    Eq,
}

/// A surface statement, possibly using the usual abbreviations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    Assertion { individual: String, concept: Concept, relation: Relation, degree: Degree },
    RoleAssertion { subject: String, object: String, role: String, degree: Degree },
    Inclusion { sub: Concept, sup: Concept, degree: Degree },
    Equivalence { left: Concept, right: Concept },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub concepts: BTreeSet<String>,
    pub roles: BTreeSet<String>,
    pub individuals: BTreeSet<String>,
}

impl Signature {
    pub fn contains_name(&self, name: &str) -> bool {
        self.concepts.contains(name) || self.roles.contains(name) || self.individuals.contains(name)
    }
}

/// `K = <A, T>`: assertions in the ABox, inclusions and equivalences in the TBox.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeBase {
    pub abox: Vec<Axiom>,
    pub tbox: Vec<TboxAxiom>,
}

impl KnowledgeBase {
    pub fn new(abox: Vec<Axiom>, tbox: Vec<TboxAxiom>) -> KnowledgeBase {
        assert!(abox.iter().all(Axiom::is_assertion), "GCI in ABox");
        KnowledgeBase { abox, tbox }
    }

    /// Every axiom in core form: the ABox followed by the expanded TBox.
    pub fn core_axioms(&self) -> Vec<Axiom> {
        let mut out = self.abox.clone();
        out.extend(self.tbox.iter().flat_map(TboxAxiom::core));
        out
    }

    pub fn core_tbox(&self) -> Vec<Axiom> {
        self.tbox.iter().flat_map(TboxAxiom::core).collect()
    }

    pub fn signature(&self) -> Signature {
        let mut sig = Signature::default();
        for ax in self.core_axioms() {
            ax.collect_signature(&mut sig);
        }
        sig
    }

    /// Total concept-node count over all core axioms.
    pub fn concept_nodes(&self) -> usize {
        self.core_axioms()
            .iter()
            .flat_map(|ax| ax.concepts().into_iter().map(Concept::size).collect::<Vec<_>>())
            .sum()
    }

    /// Statements that expand back to this knowledge base.
    pub fn to_statements(&self) -> Vec<Statement> {
        let mut out: Vec<Statement> = self
            .abox
            .iter()
            .map(|ax| match ax.clone() {
                Axiom::ConceptGeq { individual, concept, degree } => {
                    Statement::Assertion { individual, concept, relation: Relation::Geq, degree }
                }
                Axiom::ConceptLeq { individual, concept, degree } => {
                    Statement::Assertion { individual, concept, relation: Relation::Leq, degree }
                }
                Axiom::RoleGeq { subject, object, role, degree } => {
                    Statement::RoleAssertion { subject, object, role, degree }
                }
                Axiom::GciGeq { .. } => unreachable!("GCI in ABox"),
            })
            .collect();
        out.extend(self.tbox.iter().map(|t| match t.clone() {
            TboxAxiom::Inclusion { sub, sup, degree } => Statement::Inclusion { sub, sup, degree },
            TboxAxiom::Equivalence { left, right } => Statement::Equivalence { left, right },
        }));
        out
    }
}

impl fmt::Display for KnowledgeBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ax in &self.abox {
            writeln!(f, "{ax}")?;
        }
        for ax in &self.tbox {
            writeln!(f, "{ax}")?;
        }
        Ok(())
    }
}

/// Expands `<a:C = d>` into its two bounds and keeps everything else as is.
/// Bare statements are expected to already carry degree 1.
pub fn expand_shorthands(statements: impl IntoIterator<Item = Statement>) -> KnowledgeBase {
    let mut kb = KnowledgeBase::default();
    for st in statements {
        match st {
            Statement::Assertion { individual, concept, relation, degree } => match relation {
                Relation::Geq => kb.abox.push(Axiom::ConceptGeq { individual, concept, degree }),
                Relation::Leq => kb.abox.push(Axiom::ConceptLeq { individual, concept, degree }),
                Relation::Eq => {
                    kb.abox.push(Axiom::ConceptGeq {
                        individual: individual.clone(),
                        concept: concept.clone(),
                        degree: degree.clone(),
                    });
                    kb.abox.push(Axiom::ConceptLeq { individual, concept, degree });
                }
            },
            Statement::RoleAssertion { subject, object, role, degree } => {
                kb.abox.push(Axiom::RoleGeq { subject, object, role, degree })
            }
            Statement::Inclusion { sub, sup, degree } => {
                kb.tbox.push(TboxAxiom::Inclusion { sub, sup, degree })
            }
            Statement::Equivalence { left, right } => {
                kb.tbox.push(TboxAxiom::Equivalence { left, right })
            }
        }
    }
    kb
}

/// The "directly uses" relation between atomic names.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct UsesGraph {
    pub edges: BTreeMap<String, BTreeSet<String>>,
}

impl UsesGraph {
    pub fn successors(&self, name: &str) -> impl Iterator<Item = &String> {
        self.edges.get(name).into_iter().flatten()
    }

    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        self.edges.get(from).is_some_and(|s| s.contains(to))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.values().map(BTreeSet::len).sum()
    }

    /// Whether `from` uses `to` (transitive closure, at least one step).
    pub fn uses(&self, from: &str, to: &str) -> bool {
        self.path(from, to).is_some()
    }

    /// Shortest path `from -> ... -> to` of at least one edge.
    pub fn path(&self, from: &str, to: &str) -> Option<Vec<String>> {
        let mut parent: BTreeMap<&str, &str> = BTreeMap::new();
        let mut queue: VecDeque<&str> = VecDeque::new();
        for s in self.successors(from) {
            if !parent.contains_key(s.as_str()) {
                parent.insert(s, from);
                queue.push_back(s);
            }
        }
        while let Some(node) = queue.pop_front() {
            if node == to {
                let mut path = vec![to.to_string()];
                let mut cur = to;
                loop {
                    let p = parent[cur];
                    path.push(p.to_string());
                    if p == from && path.len() > 1 {
                        break;
                    }
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            for s in self.successors(node) {
                if !parent.contains_key(s.as_str()) {
                    parent.insert(s, node);
                    queue.push_back(s);
                }
            }
        }
        None
    }

    fn nodes(&self) -> BTreeSet<&str> {
        let mut out: BTreeSet<&str> = self.edges.keys().map(String::as_str).collect();
        out.extend(self.edges.values().flatten().map(String::as_str));
        out
    }

    /// One concrete cycle `A1, A2, ..., A1` per strongly connected component
    /// that contains a cycle, starting at the component's least name.
    pub fn cycles(&self) -> Vec<Vec<String>> {
        let mut covered: BTreeSet<String> = BTreeSet::new();
        let mut out = Vec::new();
        for node in self.nodes() {
            if covered.contains(node) {
                continue;
            }
            if let Some(cycle) = self.path(node, node) {
                // Everything in the same component as `node` is covered.
                for other in self.nodes() {
                    if other == node || (self.uses(node, other) && self.uses(other, node)) {
                        covered.insert(other.to_string());
                    }
                }
                out.push(cycle);
            }
        }
        out
    }

    /// Names ordered so that every name precedes the names it uses.
    /// `None` if the graph is cyclic.
    pub fn users_first_order(&self) -> Option<Vec<String>> {
        let nodes = self.nodes();
        let mut indegree: BTreeMap<&str, usize> = nodes.iter().map(|n| (*n, 0)).collect();
        for targets in self.edges.values() {
            for t in targets {
                *indegree.get_mut(t.as_str()).expect("node") += 1;
            }
        }
        let mut ready: BTreeSet<&str> =
            indegree.iter().filter(|(_, d)| **d == 0).map(|(n, _)| *n).collect();
        let mut order = Vec::new();
        while let Some(n) = ready.pop_first() {
            order.push(n.to_string());
            for s in self.successors(n) {
                let d = indegree.get_mut(s.as_str()).expect("node");
                *d -= 1;
                if *d == 0 {
                    ready.insert(s);
                }
            }
        }
        (order.len() == nodes.len()).then_some(order)
    }
}

/// Edges `A -> B` for every TBox entry with atomic left side `A` and `B`
/// occurring on its right side. Entries with a complex left side add nothing.
pub fn uses_graph(tbox: &[TboxAxiom]) -> UsesGraph {
    let mut graph = UsesGraph::default();
    for ax in tbox {
        if let Some(a) = ax.left().atomic_name() {
            graph.edges.entry(a.to_string()).or_default().extend(ax.right().atoms());
        }
    }
    graph
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Constraint {
    /// Left side is not an atomic concept.
    Form,
    /// Some name is defined more than once.
    MultiDefinition,
    /// Some name uses itself.
    Cycle,
    /// An inclusion with degree below 1 (only blocks unfoldability).
    SubUnitDegree,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constraint::Form => "form",
            Constraint::MultiDefinition => "multi-definition",
            Constraint::Cycle => "cycle",
            Constraint::SubUnitDegree => "sub-unit-degree",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub constraint: Constraint,
    /// Offending TBox entries (for cycles: the defining entries along the path).
    pub axioms: Vec<TboxAxiom>,
    /// For cycles, `A1, A2, ..., A1`.
    pub cycle: Vec<String>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.constraint)?;
        if !self.cycle.is_empty() {
            write!(f, "{}", self.cycle.join(" uses "))
        } else {
            let items: Vec<String> = self.axioms.iter().map(ToString::to_string).collect();
            write!(f, "{}", items.join("; "))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TBoxClassification {
    pub acyclic: bool,
    pub unfoldable: bool,
    pub violations: Vec<Violation>,
}

pub fn classify_tbox(tbox: &[TboxAxiom]) -> TBoxClassification {
    let mut violations = Vec::new();

    let mut definitions: BTreeMap<&str, Vec<&TboxAxiom>> = BTreeMap::new();
    for ax in tbox {
        match ax.left().atomic_name() {
            Some(a) => definitions.entry(a).or_default().push(ax),
            None => violations.push(Violation {
                constraint: Constraint::Form,
                axioms: vec![ax.clone()],
                cycle: vec![],
            }),
        }
    }
    for defs in definitions.values().filter(|d| d.len() > 1) {
        violations.push(Violation {
            constraint: Constraint::MultiDefinition,
            axioms: defs.iter().map(|ax| (*ax).clone()).collect(),
            cycle: vec![],
        });
    }
    for cycle in uses_graph(tbox).cycles() {
        let mut axioms: Vec<TboxAxiom> = Vec::new();
        for name in &cycle[..cycle.len() - 1] {
            for ax in definitions.get(name.as_str()).into_iter().flatten() {
                if !axioms.contains(ax) {
                    axioms.push((*ax).clone());
                }
            }
        }
        violations.push(Violation { constraint: Constraint::Cycle, axioms, cycle });
    }
    let acyclic = violations.is_empty();

    for ax in tbox {
        if let TboxAxiom::Inclusion { degree, .. } = ax {
            if !degree.is_one() {
                violations.push(Violation {
                    constraint: Constraint::SubUnitDegree,
                    axioms: vec![ax.clone()],
                    cycle: vec![],
                });
            }
        }
    }
    let unfoldable = acyclic && violations.is_empty();
    TBoxClassification { acyclic, unfoldable, violations }
}

/// Generates names guaranteed absent from a reserved set. Names have the
/// shape `<prefix>'<n>`; the counter belongs to one transformation session.
#[derive(Debug, Clone)]
pub struct FreshNames {
    prefix: String,
    taken: BTreeSet<String>,
    counter: usize,
}

impl FreshNames {
    pub fn new(signature: &Signature) -> FreshNames {
        FreshNames::with_prefix("A", signature)
    }

    pub fn with_prefix(prefix: &str, signature: &Signature) -> FreshNames {
        let mut taken = signature.concepts.clone();
        taken.extend(signature.roles.iter().cloned());
        taken.extend(signature.individuals.iter().cloned());
        FreshNames { prefix: prefix.to_string(), taken, counter: 0 }
    }

    pub fn next_name(&mut self) -> String {
        loop {
            self.counter += 1;
            let name = format!("{}'{}", self.prefix, self.counter);
            if self.taken.insert(name.clone()) {
                return name;
            }
        }
    }

    pub fn is_taken(&self, name: &str) -> bool {
        self.taken.contains(name)
    }
}
