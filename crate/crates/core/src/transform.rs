//! TBox elimination: threshold gadgets, GCI encodings and unfolding into a
//! pure ABox, with a replayable trace and model lifting in both directions.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::degrees::{implication, Degree, OperatorFamily};
use crate::semantics::{eval_concept, FiniteInterpretation};
use crate::syntax::{
    classify_tbox, uses_graph, Axiom, Concept, FreshNames, KnowledgeBase, TboxAxiom, Violation,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("gadget needs 0 < alpha < 1, got {0}")]
    GadgetDegree(Degree),
    #[error("sweep denominator {n} is below q = {q}")]
    SweepTooCoarse { n: u64, q: u64 },
    #[error("TBox is not acyclic: {}", list(.0))]
    NotAcyclic(Vec<Violation>),
    #[error("TBox is not unfoldable: {}", list(.0))]
    NotUnfoldable(Vec<Violation>),
    #[error("{op} is only defined for {expected}, not {family}")]
    UnsupportedFamily { op: &'static str, expected: &'static str, family: OperatorFamily },
    #[error("min not definable in this fragment under {0}")]
    MinNotDefinable(OperatorFamily),
    #[error("TBox entry {0} is not an inclusion of degree 1")]
    NotUnitInclusion(usize),
    #[error("no TBox entry at index {0}")]
    NoSuchAxiom(usize),
    #[error("replay failed: {0} not found")]
    ReplayMismatch(String),
}

fn list(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// `(⊓^p A') ⊓ ¬(⊓^q A')` for `alpha = p/q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThresholdGadget {
    pub alpha: Degree,
    pub atom: String,
    pub concept: Concept,
    pub witness_input: Degree,
    pub bound: Degree,
}

pub fn synthesize_gadget(alpha: &Degree) -> Result<ThresholdGadget, TransformError> {
    gadget_on(alpha, "A'")
}

pub fn gadget_on(alpha: &Degree, atom: &str) -> Result<ThresholdGadget, TransformError> {
    if alpha.is_zero() || alpha.is_one() {
        return Err(TransformError::GadgetDegree(alpha.clone()));
    }
    let p = usize::try_from(alpha.numer()).expect("small numerator");
    let q = usize::try_from(alpha.denom()).expect("small denominator");
    let a = Concept::atom(atom);
    let concept = Concept::and(Concept::conj_power(&a, p), Concept::not(Concept::conj_power(&a, q)));
    Ok(ThresholdGadget {
        alpha: alpha.clone(),
        atom: atom.to_string(),
        concept,
        witness_input: Degree::ratio(q as i64 - 1, q as i64),
        bound: alpha.complement(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GadgetReport {
    pub passed: bool,
    pub points: usize,
    pub max_value: Degree,
    pub argmax: Degree,
    pub witness_value: Degree,
    /// Input with the largest value above the bound, if any.
    pub counterexample: Option<Degree>,
}

pub fn gadget_value(g: &ThresholdGadget, x: &Degree) -> Degree {
    let mut i = FiniteInterpretation::with_size(1).expect("nonempty");
    i.declare_concept(g.atom.clone(), x.clone());
    eval_concept(&i, OperatorFamily::Lukasiewicz, &g.concept, 0)
}

/// Evaluates at every `k/(n q)`. The gadget is piecewise linear with
/// breakpoints at multiples of `1/q`, so this covers every linear piece.
pub fn verify_gadget(g: &ThresholdGadget, n: u64) -> Result<GadgetReport, TransformError> {
    let q: u64 = g.alpha.denom().try_into().expect("small denominator");
    if n < q {
        return Err(TransformError::SweepTooCoarse { n, q });
    }
    let steps = (n * q) as i64;
    let mut max_value = Degree::zero();
    let mut argmax = Degree::zero();
    for k in 0..=steps {
        let x = Degree::ratio(k, steps);
        let v = gadget_value(g, &x);
        if v > max_value {
            max_value = v;
            argmax = x;
        }
    }
    let witness_value = gadget_value(g, &g.witness_input);
    let counterexample = (max_value > g.bound).then(|| argmax.clone());
    Ok(GadgetReport {
        passed: counterexample.is_none() && witness_value == g.bound,
        points: steps as usize + 1,
        max_value,
        argmax,
        witness_value,
        counterexample,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    Tnorm,
    Min,
}

impl FromStr for Encoding {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tnorm" => Ok(Encoding::Tnorm),
            "min" => Ok(Encoding::Min),
            _ => Err(format!("unknown encoding `{s}` (expected tnorm or min)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    DropVacuous,
    Gadget,
    GciTnorm,
    GciMin,
    Substitute,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::DropVacuous => "drop-vacuous",
            Rule::Gadget => "gadget",
            Rule::GciTnorm => "gci-tnorm",
            Rule::GciMin => "gci-min",
            Rule::Substitute => "substitute",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Item {
    Abox(Axiom),
    Tbox(TboxAxiom),
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Item::Abox(a) => a.fmt(f),
            Item::Tbox(t) => t.fmt(f),
        }
    }
}

/// How a fresh or defined name gets its values when moving a model across a step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Lift {
    None,
    /// Input to output: `name := value` everywhere.
    Constant { name: String, value: Degree },
    /// Input to output: `name := premise => conclusion` (Zadeh: `conclusion`).
    Residual { name: String, premise: Concept, conclusion: Concept },
    /// Input to output: `name := from`.
    Copy { name: String, from: Concept },
    /// Output to input: `name := definition`.
    Define { name: String, definition: Concept },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Step {
    pub rule: Rule,
    /// Each input entry and what replaces it (possibly nothing).
    pub replacements: Vec<(Item, Vec<Item>)>,
    pub fresh: Vec<String>,
    pub substitutions: usize,
    pub lift: Lift,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (before, after) in &self.replacements {
            if !first {
                writeln!(f)?;
            }
            first = false;
            let after: Vec<String> = after.iter().map(ToString::to_string).collect();
            let after = if after.is_empty() { "(removed)".to_string() } else { after.join(", ") };
            write!(f, "{}: {before} => {after}", self.rule)?;
        }
        if !self.fresh.is_empty() {
            write!(f, " [fresh {}]", self.fresh.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct SizeMetrics {
    pub axioms: usize,
    pub concept_nodes: usize,
}

impl SizeMetrics {
    pub fn of(kb: &KnowledgeBase) -> SizeMetrics {
        SizeMetrics { axioms: kb.core_axioms().len(), concept_nodes: kb.concept_nodes() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct TransformTrace {
    pub steps: Vec<Step>,
    pub before: SizeMetrics,
    pub after: SizeMetrics,
}

impl TransformTrace {
    fn start(kb: &KnowledgeBase) -> TransformTrace {
        TransformTrace { steps: vec![], before: SizeMetrics::of(kb), after: SizeMetrics::of(kb) }
    }

    fn finish(mut self, kb: &KnowledgeBase) -> TransformTrace {
        self.after = SizeMetrics::of(kb);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn fresh_names(&self) -> Vec<&str> {
        self.steps.iter().flat_map(|s| s.fresh.iter().map(String::as_str)).collect()
    }

    /// Fresh names are pairwise distinct and absent from `input`.
    pub fn fresh_names_ok(&self, input: &KnowledgeBase) -> bool {
        let sig = input.signature();
        let names = self.fresh_names();
        let unique: std::collections::BTreeSet<&str> = names.iter().copied().collect();
        unique.len() == names.len() && names.iter().all(|n| !sig.contains_name(n))
    }

    /// Appends the steps of `next`, which must start where this one ends.
    pub fn then(mut self, next: TransformTrace) -> TransformTrace {
        self.steps.extend(next.steps);
        self.after = next.after;
        self
    }

    pub fn replay(&self, input: &KnowledgeBase) -> Result<KnowledgeBase, TransformError> {
        let mut kb = input.clone();
        for step in &self.steps {
            apply(&mut kb, step)?;
        }
        Ok(kb)
    }

    pub fn step_log(&self) -> String {
        let mut out = String::new();
        for step in &self.steps {
            out.push_str(&step.to_string());
            out.push('\n');
        }
        out.push_str(&format!(
            "size: {} axioms / {} nodes -> {} axioms / {} nodes\n",
            self.before.axioms, self.before.concept_nodes, self.after.axioms, self.after.concept_nodes
        ));
        out
    }

    /// Turns a model of the input into a model of the output.
    pub fn lift_forward(&self, model: &FiniteInterpretation, family: OperatorFamily) -> FiniteInterpretation {
        let mut m = model.clone();
        for step in &self.steps {
            match &step.lift {
                Lift::Constant { name, value } => {
                    m.declare_concept(name.clone(), value.clone());
                }
                Lift::Residual { name, premise, conclusion } => {
                    let values: Vec<Degree> = (0..m.size())
                        .map(|x| {
                            let c = eval_concept(&m, family, conclusion, x);
                            if family == OperatorFamily::Zadeh {
                                c
                            } else {
                                implication(family, &eval_concept(&m, family, premise, x), &c)
                            }
                        })
                        .collect();
                    *m.declare_concept(name.clone(), Degree::zero()) = values;
                }
                Lift::Copy { name, from } => {
                    let values: Vec<Degree> = (0..m.size()).map(|x| eval_concept(&m, family, from, x)).collect();
                    *m.declare_concept(name.clone(), Degree::zero()) = values;
                }
                Lift::None | Lift::Define { .. } => {}
            }
        }
        m
    }

    /// Turns a model of the output into a model of the input.
    pub fn lift_backward(&self, model: &FiniteInterpretation, family: OperatorFamily) -> FiniteInterpretation {
        let mut m = model.clone();
        for step in self.steps.iter().rev() {
            if let Lift::Define { name, definition } = &step.lift {
                let values: Vec<Degree> =
                    (0..m.size()).map(|x| eval_concept(&m, family, definition, x)).collect();
                *m.declare_concept(name.clone(), Degree::zero()) = values;
            }
        }
        m
    }
}

fn apply(kb: &mut KnowledgeBase, step: &Step) -> Result<(), TransformError> {
    for (before, after) in &step.replacements {
        match before {
            Item::Abox(ax) => {
                let pos = kb.abox.iter().position(|a| a == ax).ok_or_else(|| TransformError::ReplayMismatch(ax.to_string()))?;
                let new: Vec<Axiom> = after
                    .iter()
                    .map(|i| match i {
                        Item::Abox(a) => a.clone(),
                        Item::Tbox(_) => unreachable!("ABox entry rewritten into the TBox"),
                    })
                    .collect();
                kb.abox.splice(pos..=pos, new);
            }
            Item::Tbox(ax) => {
                let pos = kb.tbox.iter().position(|a| a == ax).ok_or_else(|| TransformError::ReplayMismatch(ax.to_string()))?;
                let new: Vec<TboxAxiom> = after
                    .iter()
                    .map(|i| match i {
                        Item::Tbox(a) => a.clone(),
                        Item::Abox(_) => unreachable!("TBox entry rewritten into the ABox"),
                    })
                    .collect();
                kb.tbox.splice(pos..=pos, new);
            }
        }
    }
    Ok(())
}

/// Runs one step against `kb` and records it.
fn record(kb: &mut KnowledgeBase, trace: &mut TransformTrace, step: Step) {
    apply(kb, &step).expect("step built from the current KB");
    trace.steps.push(step);
}

fn drop_vacuous(kb: &mut KnowledgeBase, trace: &mut TransformTrace) {
    let vacuous: Vec<TboxAxiom> = kb
        .tbox
        .iter()
        .filter(|ax| matches!(ax, TboxAxiom::Inclusion { degree, .. } if degree.is_zero()))
        .cloned()
        .collect();
    for ax in vacuous {
        let step = Step {
            rule: Rule::DropVacuous,
            replacements: vec![(Item::Tbox(ax), vec![])],
            fresh: vec![],
            substitutions: 0,
            lift: Lift::None,
        };
        record(kb, trace, step);
    }
}

fn require_family(op: &'static str, family: OperatorFamily) -> Result<(), TransformError> {
    if family == OperatorFamily::Lukasiewicz {
        Ok(())
    } else {
        Err(TransformError::UnsupportedFamily { op, expected: "Lukasiewicz", family })
    }
}

/// Replaces every `<A ⊑ C ≥ α>` with `0 < α < 1` by `<A ⊑ C ⊔ τ_α(A') ≥ 1>`.
pub fn acyclic_to_unfoldable(
    kb: &KnowledgeBase,
    family: OperatorFamily,
) -> Result<(KnowledgeBase, TransformTrace), TransformError> {
    require_family("acyclic_to_unfoldable", family)?;
    let mut out = kb.clone();
    let mut trace = TransformTrace::start(kb);
    drop_vacuous(&mut out, &mut trace);
    let class = classify_tbox(&out.tbox);
    if !class.acyclic {
        return Err(TransformError::NotAcyclic(class.violations));
    }
    let mut fresh = FreshNames::new(&kb.signature());
    let graded: Vec<TboxAxiom> = out
        .tbox
        .iter()
        .filter(|ax| matches!(ax, TboxAxiom::Inclusion { degree, .. } if !degree.is_one()))
        .cloned()
        .collect();
    for ax in graded {
        let TboxAxiom::Inclusion { sub, sup, degree } = &ax else { unreachable!() };
        let name = fresh.next_name();
        let g = gadget_on(degree, &name)?;
        let new = TboxAxiom::inclusion(sub.clone(), Concept::or(sup.clone(), g.concept.clone()), Degree::one());
        let step = Step {
            rule: Rule::Gadget,
            replacements: vec![(Item::Tbox(ax.clone()), vec![Item::Tbox(new)])],
            fresh: vec![name.clone()],
            substitutions: 0,
            lift: Lift::Constant { name, value: g.witness_input },
        };
        record(&mut out, &mut trace, step);
    }
    Ok((out.clone(), trace.finish(&out)))
}

fn unit_inclusion(kb: &KnowledgeBase, index: usize) -> Result<(Concept, Concept), TransformError> {
    match kb.tbox.get(index) {
        None => Err(TransformError::NoSuchAxiom(index)),
        Some(TboxAxiom::Inclusion { sub, sup, degree }) if degree.is_one() => Ok((sub.clone(), sup.clone())),
        Some(_) => Err(TransformError::NotUnitInclusion(index)),
    }
}

/// `min{A, D}` in the connectives of `family`.
pub fn min_concept(family: OperatorFamily, a: Concept, d: Concept) -> Result<Concept, TransformError> {
    match family {
        OperatorFamily::Zadeh | OperatorFamily::Goedel => Ok(Concept::and(a, d)),
        OperatorFamily::Lukasiewicz => Ok(Concept::and(a.clone(), Concept::or(Concept::not(a), d))),
        OperatorFamily::Product => Err(TransformError::MinNotDefinable(family)),
    }
}

fn encode_step(
    rule: Rule,
    before: TboxAxiom,
    left: Concept,
    right: Concept,
    name: String,
    lift: Lift,
) -> Step {
    Step {
        rule,
        replacements: vec![(Item::Tbox(before), vec![Item::Tbox(TboxAxiom::equivalence(left, right))])],
        fresh: vec![name],
        substitutions: 0,
        lift,
    }
}

/// `<C ⊑ D ≥ 1>` becomes `C ≡ A ⊓ D` for a fresh `A`.
pub fn encode_gci_tnorm(
    kb: &KnowledgeBase,
    index: usize,
    fresh: &mut FreshNames,
) -> Result<(KnowledgeBase, TransformTrace), TransformError> {
    let (c, d) = unit_inclusion(kb, index)?;
    let name = fresh.next_name();
    let lift = Lift::Residual { name: name.clone(), premise: d.clone(), conclusion: c.clone() };
    let right = Concept::and(Concept::atom(&name), d);
    let step = encode_step(Rule::GciTnorm, kb.tbox[index].clone(), c, right, name, lift);
    let mut out = kb.clone();
    let mut trace = TransformTrace::start(kb);
    record(&mut out, &mut trace, step);
    Ok((out.clone(), trace.finish(&out)))
}

/// `<C ⊑ D ≥ 1>` becomes `C ≡ min{A, D}` for a fresh `A`.
pub fn encode_gci_min(
    kb: &KnowledgeBase,
    index: usize,
    family: OperatorFamily,
    fresh: &mut FreshNames,
) -> Result<(KnowledgeBase, TransformTrace), TransformError> {
    let (c, d) = unit_inclusion(kb, index)?;
    min_concept(family, Concept::Top, Concept::Top)?;
    let name = fresh.next_name();
    let lift = Lift::Copy { name: name.clone(), from: c.clone() };
    let right = min_concept(family, Concept::atom(&name), d)?;
    let step = encode_step(Rule::GciMin, kb.tbox[index].clone(), c, right, name, lift);
    let mut out = kb.clone();
    let mut trace = TransformTrace::start(kb);
    record(&mut out, &mut trace, step);
    Ok((out.clone(), trace.finish(&out)))
}

/// Eliminates an unfoldable TBox: inclusions become definitions, then every
/// definition is substituted once, users before the names they use.
pub fn unfold_to_abox(
    kb: &KnowledgeBase,
    encoding: Encoding,
    family: OperatorFamily,
) -> Result<(KnowledgeBase, TransformTrace), TransformError> {
    if encoding == Encoding::Min {
        min_concept(family, Concept::Top, Concept::Top)?;
    }
    let mut out = kb.clone();
    let mut trace = TransformTrace::start(kb);
    drop_vacuous(&mut out, &mut trace);
    let class = classify_tbox(&out.tbox);
    if !class.unfoldable {
        return Err(TransformError::NotUnfoldable(class.violations));
    }
    let mut fresh = FreshNames::new(&kb.signature());

    let mut i = 0;
    while i < out.tbox.len() {
        if matches!(out.tbox[i], TboxAxiom::Inclusion { .. }) {
            let step_kb;
            let step_trace;
            match encoding {
                Encoding::Tnorm => {
                    (step_kb, step_trace) = encode_gci_tnorm(&out, i, &mut fresh)?;
                }
                Encoding::Min => {
                    (step_kb, step_trace) = encode_gci_min(&out, i, family, &mut fresh)?;
                }
            }
            out = step_kb;
            trace.steps.extend(step_trace.steps);
        }
        i += 1;
    }

    let order = uses_graph(&out.tbox).users_first_order().expect("acyclic");
    for name in order {
        let Some(pos) = out.tbox.iter().position(|ax| ax.left().atomic_name() == Some(name.as_str())) else {
            continue;
        };
        let def = out.tbox[pos].clone();
        let body = def.right().clone();
        let mut replacements = vec![(Item::Tbox(def.clone()), vec![])];
        let mut count = 0;
        for ax in &out.abox {
            if ax.concepts().iter().any(|c| c.mentions(&name)) {
                let (new, n) = substitute_axiom(ax, &name, &body);
                count += n;
                replacements.push((Item::Abox(ax.clone()), vec![Item::Abox(new)]));
            }
        }
        for ax in out.tbox.iter().filter(|ax| **ax != def) {
            if ax.right().mentions(&name) {
                let (right, n) = ax.right().substitute(&name, &body);
                count += n;
                let new = match ax {
                    TboxAxiom::Inclusion { sub, degree, .. } => TboxAxiom::inclusion(sub.clone(), right, degree.clone()),
                    TboxAxiom::Equivalence { left, .. } => TboxAxiom::equivalence(left.clone(), right),
                };
                replacements.push((Item::Tbox(ax.clone()), vec![Item::Tbox(new)]));
            }
        }
        let step = Step {
            rule: Rule::Substitute,
            replacements,
            fresh: vec![],
            substitutions: count,
            lift: Lift::Define { name: name.clone(), definition: body },
        };
        record(&mut out, &mut trace, step);
    }
    debug_assert!(out.tbox.is_empty());
    Ok((out.clone(), trace.finish(&out)))
}

fn substitute_axiom(ax: &Axiom, name: &str, by: &Concept) -> (Axiom, usize) {
    match ax {
        Axiom::ConceptGeq { individual, concept, degree } => {
            let (c, n) = concept.substitute(name, by);
            (Axiom::ConceptGeq { individual: individual.clone(), concept: c, degree: degree.clone() }, n)
        }
        Axiom::ConceptLeq { individual, concept, degree } => {
            let (c, n) = concept.substitute(name, by);
            (Axiom::ConceptLeq { individual: individual.clone(), concept: c, degree: degree.clone() }, n)
        }
        Axiom::RoleGeq { .. } | Axiom::GciGeq { .. } => (ax.clone(), 0),
    }
}

/// Acyclic KB to a pure ABox: gadgets when some inclusion degree is below 1,
/// then unfolding.
pub fn eliminate_tbox(
    kb: &KnowledgeBase,
    encoding: Encoding,
    family: OperatorFamily,
) -> Result<(KnowledgeBase, TransformTrace), TransformError> {
    let class = classify_tbox(&kb.tbox);
    if !class.acyclic {
        return Err(TransformError::NotAcyclic(class.violations));
    }
    if class.unfoldable {
        return unfold_to_abox(kb, encoding, family);
    }
    let (mid, t1) = acyclic_to_unfoldable(kb, family)?;
    let (out, t2) = unfold_to_abox(&mid, encoding, family)?;
    Ok((out, t1.then(t2)))
}
