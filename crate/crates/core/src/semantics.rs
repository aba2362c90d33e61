//! Evaluation of concepts and axioms over finite fuzzy interpretations.
//!
//! Over a finite domain every infimum and supremum is a minimum or maximum,
//! so evaluation is exact. Ties are broken towards the element that comes
//! first in domain order.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::degrees::{Degree, OperatorFamily};
use crate::syntax::{Axiom, Concept, KnowledgeBase};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("domain must be nonempty")]
    EmptyDomain,
    #[error("duplicate domain element `{0}`")]
    DuplicateElement(String),
    #[error("unknown domain element `{0}`")]
    UnknownElement(String),
    #[error("individual `{0}` is not mapped to a domain element")]
    UnmappedIndividual(String),
    #[error("name `{0}` is not interpreted (strict mode)")]
    UninterpretedName(String),
}

/// A finite interpretation. Concept maps are stored densely per element and
/// role maps row-major (`x * n + y`); names without a map read as 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteInterpretation {
    domain: Vec<String>,
    individuals: BTreeMap<String, usize>,
    concepts: BTreeMap<String, Vec<Degree>>,
    roles: BTreeMap<String, Vec<Degree>>,
    zero: Degree,
}

impl FiniteInterpretation {
    pub fn new<S: Into<String>>(
        domain: impl IntoIterator<Item = S>,
    ) -> Result<FiniteInterpretation, SemanticsError> {
        let domain: Vec<String> = domain.into_iter().map(Into::into).collect();
        if domain.is_empty() {
            return Err(SemanticsError::EmptyDomain);
        }
        let mut seen = BTreeSet::new();
        for e in &domain {
            if !seen.insert(e) {
                return Err(SemanticsError::DuplicateElement(e.clone()));
            }
        }
        Ok(FiniteInterpretation {
            domain,
            individuals: BTreeMap::new(),
            concepts: BTreeMap::new(),
            roles: BTreeMap::new(),
            zero: Degree::zero(),
        })
    }

    /// Domain `e1, ..., en`.
    pub fn with_size(n: usize) -> Result<FiniteInterpretation, SemanticsError> {
        FiniteInterpretation::new((1..=n).map(|i| format!("e{i}")))
    }

    pub fn size(&self) -> usize {
        self.domain.len()
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn element(&self, name: &str) -> Option<usize> {
        self.domain.iter().position(|e| e == name)
    }

    pub fn element_name(&self, x: usize) -> &str {
        &self.domain[x]
    }

    pub fn individuals(&self) -> &BTreeMap<String, usize> {
        &self.individuals
    }

    pub fn concept_maps(&self) -> &BTreeMap<String, Vec<Degree>> {
        &self.concepts
    }

    pub fn role_maps(&self) -> &BTreeMap<String, Vec<Degree>> {
        &self.roles
    }

    pub fn individual(&self, name: &str) -> Option<usize> {
        self.individuals.get(name).copied()
    }

    pub fn assign(&mut self, individual: impl Into<String>, x: usize) {
        assert!(x < self.size(), "element index out of range");
        self.individuals.insert(individual.into(), x);
    }

    /// Ensures a concept map exists (filled with `default`).
    pub fn declare_concept(&mut self, name: impl Into<String>, default: Degree) -> &mut Vec<Degree> {
        let n = self.size();
        self.concepts.entry(name.into()).or_insert_with(|| vec![default; n])
    }

    pub fn declare_role(&mut self, name: impl Into<String>, default: Degree) -> &mut Vec<Degree> {
        let n = self.size();
        self.roles.entry(name.into()).or_insert_with(|| vec![default; n * n])
    }

    pub fn set_concept(&mut self, name: &str, x: usize, value: Degree) {
        self.declare_concept(name, Degree::zero())[x] = value;
    }

    pub fn set_role(&mut self, name: &str, x: usize, y: usize, value: Degree) {
        let n = self.size();
        self.declare_role(name, Degree::zero())[x * n + y] = value;
    }

    pub fn concept_value(&self, name: &str, x: usize) -> &Degree {
        self.concepts.get(name).map_or(&self.zero, |v| &v[x])
    }

    pub fn role_value(&self, name: &str, x: usize, y: usize) -> &Degree {
        let n = self.size();
        self.roles.get(name).map_or(&self.zero, |v| &v[x * n + y])
    }

    pub fn has_concept(&self, name: &str) -> bool {
        self.concepts.contains_key(name)
    }

    pub fn has_role(&self, name: &str) -> bool {
        self.roles.contains_key(name)
    }

    pub fn remove_concept(&mut self, name: &str) {
        self.concepts.remove(name);
    }

    /// Names used by `kb` that this interpretation has no map for; they
    /// evaluate as constant 0.
    pub fn uninterpreted_names(&self, kb: &KnowledgeBase) -> Vec<String> {
        let sig = kb.signature();
        let mut out: Vec<String> = sig.concepts.into_iter().filter(|c| !self.has_concept(c)).collect();
        out.extend(sig.roles.into_iter().filter(|r| !self.has_role(r)));
        out
    }
}

/// Evaluator with an optional per-(subconcept, element) cache. The cache is
/// keyed by node address, so it is only valid while the interpretation is
/// unchanged.
pub struct Evaluator<'i, 'c> {
    interp: &'i FiniteInterpretation,
    family: OperatorFamily,
    cache: Option<HashMap<(*const Concept, usize), Degree>>,
    _concepts: std::marker::PhantomData<&'c Concept>,
}

impl<'i, 'c> Evaluator<'i, 'c> {
    pub fn new(interp: &'i FiniteInterpretation, family: OperatorFamily) -> Self {
        Evaluator { interp, family, cache: None, _concepts: std::marker::PhantomData }
    }

    pub fn memoized(interp: &'i FiniteInterpretation, family: OperatorFamily) -> Self {
        Evaluator { interp, family, cache: Some(HashMap::new()), _concepts: std::marker::PhantomData }
    }

    pub fn eval(&mut self, c: &'c Concept, x: usize) -> Degree {
        if let Some(cache) = &self.cache {
            if let Some(v) = cache.get(&(c as *const Concept, x)) {
                return v.clone();
            }
        }
        let f = self.family;
        let i = self.interp;
        let value = match c {
            Concept::Top => Degree::one(),
            Concept::Bottom => Degree::zero(),
            Concept::Atomic(name) => i.concept_value(name, x).clone(),
            Concept::And(l, r) => {
                let l = self.eval(l, x);
                f.tnorm(&l, &self.eval(r, x))
            }
            Concept::Or(l, r) => {
                let l = self.eval(l, x);
                f.tconorm(&l, &self.eval(r, x))
            }
            Concept::Not(inner) => f.negation(&self.eval(inner, x)),
            Concept::Forall(role, inner) => self.forall_witness(role, inner, x).1,
            Concept::Exists(role, inner) => self.exists_witness(role, inner, x).1,
        };
        if let Some(cache) = &mut self.cache {
            cache.insert((c as *const Concept, x), value.clone());
        }
        value
    }

    /// Least element attaining `inf_y R(x,y) => C(y)`, with the value.
    pub fn forall_witness(&mut self, role: &str, inner: &'c Concept, x: usize) -> (usize, Degree) {
        let mut best: Option<(usize, Degree)> = None;
        for y in 0..self.interp.size() {
            let v = self.family.implication(self.interp.role_value(role, x, y), &self.eval(inner, y));
            if best.as_ref().is_none_or(|(_, b)| v < *b) {
                best = Some((y, v));
            }
        }
        best.expect("nonempty domain")
    }

    /// Least element attaining `sup_y R(x,y) (x) C(y)`, with the value.
    pub fn exists_witness(&mut self, role: &str, inner: &'c Concept, x: usize) -> (usize, Degree) {
        let mut best: Option<(usize, Degree)> = None;
        for y in 0..self.interp.size() {
            let v = self.family.tnorm(self.interp.role_value(role, x, y), &self.eval(inner, y));
            if best.as_ref().is_none_or(|(_, b)| v > *b) {
                best = Some((y, v));
            }
        }
        best.expect("nonempty domain")
    }

    /// Least element attaining `inf_x C(x) => D(x)`, with the value.
    pub fn subsumption_witness(&mut self, sub: &'c Concept, sup: &'c Concept) -> (usize, Degree) {
        let mut best: Option<(usize, Degree)> = None;
        for x in 0..self.interp.size() {
            let c = self.eval(sub, x);
            let v = self.family.implication(&c, &self.eval(sup, x));
            if best.as_ref().is_none_or(|(_, b)| v < *b) {
                best = Some((x, v));
            }
        }
        best.expect("nonempty domain")
    }
}

pub fn eval_concept(i: &FiniteInterpretation, f: OperatorFamily, c: &Concept, x: usize) -> Degree {
    Evaluator::new(i, f).eval(c, x)
}

/// `(C ⊑ D)^I = min_x C(x) => D(x)`.
pub fn subsumption_degree(i: &FiniteInterpretation, f: OperatorFamily, sub: &Concept, sup: &Concept) -> Degree {
    Evaluator::memoized(i, f).subsumption_witness(sub, sup).1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomCheck {
    pub axiom: Axiom,
    pub satisfied: bool,
    pub achieved: Degree,
    pub required: Degree,
}

fn lookup(i: &FiniteInterpretation, individual: &str) -> Result<usize, SemanticsError> {
    i.individual(individual)
        .ok_or_else(|| SemanticsError::UnmappedIndividual(individual.to_string()))
}

fn check_with<'c>(ev: &mut Evaluator<'_, 'c>, ax: &'c Axiom) -> Result<AxiomCheck, SemanticsError> {
    let i = ev.interp;
    let (satisfied, achieved) = match ax {
        Axiom::ConceptGeq { individual, concept, degree } => {
            let v = ev.eval(concept, lookup(i, individual)?);
            (v >= *degree, v)
        }
        Axiom::ConceptLeq { individual, concept, degree } => {
            let v = ev.eval(concept, lookup(i, individual)?);
            (v <= *degree, v)
        }
        Axiom::RoleGeq { subject, object, role, degree } => {
            let v = i.role_value(role, lookup(i, subject)?, lookup(i, object)?).clone();
            (v >= *degree, v)
        }
        Axiom::GciGeq { sub, sup, degree } => {
            let v = ev.subsumption_witness(sub, sup).1;
            (v >= *degree, v)
        }
    };
    Ok(AxiomCheck { axiom: ax.clone(), satisfied, achieved, required: ax.degree().clone() })
}

pub fn check_axiom(i: &FiniteInterpretation, f: OperatorFamily, ax: &Axiom) -> Result<AxiomCheck, SemanticsError> {
    check_with(&mut Evaluator::new(i, f), ax)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SatisfactionReport {
    pub family: OperatorFamily,
    pub axioms: Vec<AxiomCheck>,
    pub overall: bool,
    /// Names of the KB that the interpretation does not map (read as 0).
    pub warnings: Vec<String>,
}

impl SatisfactionReport {
    pub fn first_violation(&self) -> Option<&AxiomCheck> {
        self.axioms.iter().find(|c| !c.satisfied)
    }
}

pub fn check_kb(i: &FiniteInterpretation, f: OperatorFamily, kb: &KnowledgeBase) -> Result<SatisfactionReport, SemanticsError> {
    let axioms = kb.core_axioms();
    let mut ev = Evaluator::memoized(i, f);
    let checks = axioms.iter().map(|ax| check_with(&mut ev, ax)).collect::<Result<Vec<_>, _>>()?;
    let overall = checks.iter().all(|c| c.satisfied);
    Ok(SatisfactionReport { family: f, axioms: checks, overall, warnings: i.uninterpreted_names(kb) })
}

/// Like [`check_kb`], but every name of the KB must be interpreted.
pub fn check_kb_strict(i: &FiniteInterpretation, f: OperatorFamily, kb: &KnowledgeBase) -> Result<SatisfactionReport, SemanticsError> {
    if let Some(name) = i.uninterpreted_names(kb).into_iter().next() {
        return Err(SemanticsError::UninterpretedName(name));
    }
    check_kb(i, f, kb)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    /// The quantified subconcept.
    pub concept: Concept,
    /// Evaluation point.
    pub at: usize,
    /// Element attaining the infimum or supremum.
    pub witness: usize,
    pub value: Degree,
}

/// Witnesses for every quantified subconcept of `c` at every point where it
/// is evaluated when computing `c` at `x`.
pub fn find_witnesses(i: &FiniteInterpretation, f: OperatorFamily, c: &Concept, x: usize) -> Vec<Witness> {
    fn walk<'c>(
        ev: &mut Evaluator<'_, 'c>,
        c: &'c Concept,
        x: usize,
        seen: &mut BTreeSet<(*const Concept, usize)>,
        out: &mut Vec<Witness>,
    ) {
        if !seen.insert((c as *const Concept, x)) {
            return;
        }
        match c {
            Concept::Forall(role, inner) | Concept::Exists(role, inner) => {
                let (w, value) = if matches!(c, Concept::Forall(..)) {
                    ev.forall_witness(role, inner, x)
                } else {
                    ev.exists_witness(role, inner, x)
                };
                out.push(Witness { concept: c.clone(), at: x, witness: w, value });
                for y in 0..ev.interp.size() {
                    walk(ev, inner, y, seen, out);
                }
            }
            _ => {
                for child in c.children() {
                    walk(ev, child, x, seen, out);
                }
            }
        }
    }
    let mut ev = Evaluator::memoized(i, f);
    let mut out = Vec::new();
    walk(&mut ev, c, x, &mut BTreeSet::new(), &mut out);
    out
}

/// Element attaining the subsumption degree, with the degree.
pub fn subsumption_witness(i: &FiniteInterpretation, f: OperatorFamily, sub: &Concept, sup: &Concept) -> (usize, Degree) {
    Evaluator::memoized(i, f).subsumption_witness(sub, sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::TboxAxiom;
    use OperatorFamily::*;

    fn a(n: &str) -> Concept {
        Concept::atom(n)
    }

    fn two_elements() -> FiniteInterpretation {
        let mut i = FiniteInterpretation::new(["x", "y"]).unwrap();
        i.set_role("R", 0, 1, Degree::one());
        i.set_concept("A", 1, Degree::ratio(3, 4));
        i
    }

    #[test]
    fn quantifier_examples() {
        let i = two_elements();
        assert_eq!(eval_concept(&i, Lukasiewicz, &Concept::exists("R", a("A")), 0), Degree::ratio(3, 4));
        assert_eq!(eval_concept(&i, Goedel, &Concept::forall("R", a("A")), 0), Degree::ratio(3, 4));
        for f in OperatorFamily::ALL {
            assert_eq!(eval_concept(&i, f, &Concept::Top, 0), Degree::one());
            assert_eq!(eval_concept(&i, f, &Concept::Bottom, 1), Degree::zero());
        }
    }

    #[test]
    fn subsumption_examples() {
        let mut i = FiniteInterpretation::new(["x"]).unwrap();
        i.set_concept("C", 0, Degree::ratio(4, 5));
        i.set_concept("D", 0, Degree::ratio(2, 5));
        assert_eq!(subsumption_degree(&i, Product, &a("C"), &a("D")), Degree::half());
        assert_eq!(subsumption_degree(&i, Product, &a("Z"), &a("D")), Degree::one());
        for f in [Lukasiewicz, Product, Goedel] {
            assert_eq!(subsumption_degree(&i, f, &a("C"), &a("C")), Degree::one());
        }
        // Kleene-Dienes: max(1 - 4/5, 4/5).
        assert_eq!(subsumption_degree(&i, Zadeh, &a("C"), &a("C")), Degree::ratio(4, 5));
    }

    #[test]
    fn axiom_examples() {
        let mut i = FiniteInterpretation::new(["x"]).unwrap();
        i.assign("jim", 0);
        i.assign("a", 0);
        i.set_concept("YoungPerson", 0, Degree::ratio(1, 5));
        i.set_concept("A", 0, Degree::ratio(3, 4));
        i.set_role("R", 0, 0, Degree::one());
        let c = check_axiom(
            &i,
            Zadeh,
            &Axiom::ConceptGeq { individual: "jim".into(), concept: a("YoungPerson"), degree: Degree::ratio(1, 5) },
        )
        .unwrap();
        assert!(c.satisfied);
        assert_eq!(c.achieved, Degree::ratio(1, 5));

        let c = check_axiom(
            &i,
            Lukasiewicz,
            &Axiom::ConceptLeq { individual: "a".into(), concept: a("A"), degree: Degree::half() },
        )
        .unwrap();
        assert!(!c.satisfied);
        assert_eq!(c.achieved, Degree::ratio(3, 4));

        let c = check_axiom(
            &i,
            Lukasiewicz,
            &Axiom::GciGeq { sub: Concept::Top, sup: Concept::exists("R", Concept::Top), degree: Degree::one() },
        )
        .unwrap();
        assert!(c.satisfied && c.achieved.is_one());

        let err = check_axiom(
            &i,
            Zadeh,
            &Axiom::ConceptGeq { individual: "bob".into(), concept: a("A"), degree: Degree::one() },
        );
        assert_eq!(err, Err(SemanticsError::UnmappedIndividual("bob".into())));
    }

    #[test]
    fn empty_kb_is_satisfied() {
        let r = check_kb(&two_elements(), Product, &KnowledgeBase::default()).unwrap();
        assert!(r.overall && r.axioms.is_empty());
    }

    #[test]
    fn strict_mode_rejects_uninterpreted_names() {
        let kb = KnowledgeBase::new(vec![], vec![TboxAxiom::inclusion(a("B"), a("A"), Degree::one())]);
        let i = two_elements();
        assert_eq!(check_kb(&i, Zadeh, &kb).unwrap().warnings, vec!["B".to_string()]);
        assert_eq!(check_kb_strict(&i, Zadeh, &kb), Err(SemanticsError::UninterpretedName("B".into())));
    }

    #[test]
    fn witnesses_use_least_index_on_ties() {
        let mut i = FiniteInterpretation::new(["x", "y", "z"]).unwrap();
        i.set_role("R", 0, 1, Degree::one());
        i.set_role("R", 0, 2, Degree::one());
        i.set_concept("A", 1, Degree::half());
        i.set_concept("A", 2, Degree::half());
        let ex = Concept::exists("R", a("A"));
        let ws = find_witnesses(&i, Lukasiewicz, &ex, 0);
        assert_eq!(ws[0].witness, 1);
        i.set_concept("A", 2, Degree::ratio(2, 3));
        let ws = find_witnesses(&i, Lukasiewicz, &ex, 0);
        assert_eq!((ws[0].witness, ws[0].value.clone()), (2, Degree::ratio(2, 3)));
    }

    #[test]
    fn subsumption_witness_attains_minimum() {
        let mut i = FiniteInterpretation::new(["x", "y"]).unwrap();
        i.set_concept("C", 0, Degree::one());
        i.set_concept("C", 1, Degree::one());
        i.set_concept("D", 0, Degree::ratio(2, 3));
        i.set_concept("D", 1, Degree::ratio(1, 3));
        let (w, v) = subsumption_witness(&i, Lukasiewicz, &a("C"), &a("D"));
        assert_eq!((w, v), (1, Degree::ratio(1, 3)));
    }

    #[test]
    fn domain_must_be_nonempty() {
        assert_eq!(FiniteInterpretation::new(Vec::<String>::new()), Err(SemanticsError::EmptyDomain));
        assert!(matches!(FiniteInterpretation::new(["x", "x"]), Err(SemanticsError::DuplicateElement(_))));
    }
}
