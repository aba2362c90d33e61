//! Algebraic and semantic laws on randomized inputs (seeded, reproducible).

mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::{degree, rational_grid, random_interpretation, random_kb, rng, ConceptGen, TestRng, NAMES, ROLES};
use fuzzy_alc::degrees::{ld_implication, ld_negation, ld_tnorm};
use fuzzy_alc::semantics::{eval_concept, find_witnesses, subsumption_degree};
use fuzzy_alc::syntax::{classify_tbox, expand_shorthands, FreshNames, Signature};
use fuzzy_alc::{Concept, Degree, FiniteInterpretation, LogDyadicDegree, OperatorFamily, TboxAxiom};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use OperatorFamily::*;

fn concepts(rng: &mut TestRng, depth: u32) -> Concept {
    ConceptGen { atoms: NAMES, roles: ROLES, or: true, constants: true }.gen(rng, depth)
}

#[test]
fn operators_are_monotone() {
    let grid = rational_grid(8);
    for f in OperatorFamily::ALL {
        for w in grid.windows(2) {
            let (a, a2) = (&w[0], &w[1]);
            assert!(f.negation(a) >= f.negation(a2), "{f} negation");
            for b in &grid {
                assert!(f.tnorm(a, b) <= f.tnorm(a2, b), "{f} tnorm at {a}, {b}");
                assert!(f.tconorm(a, b) <= f.tconorm(a2, b), "{f} tconorm at {a}, {b}");
                assert!(f.implication(a, b) >= f.implication(a2, b), "{f} implication first at {a}, {b}");
                assert!(f.implication(b, a) <= f.implication(b, a2), "{f} implication second at {b}, {a}");
            }
        }
    }
}

#[test]
fn lukasiewicz_conorm_is_the_dual_of_the_norm() {
    let grid = rational_grid(12);
    let f = Lukasiewicz;
    for a in &grid {
        for b in &grid {
            assert_eq!(f.tconorm(a, b), f.negation(&f.tnorm(&f.negation(a), &f.negation(b))));
        }
    }
}

#[test]
fn operators_commute_and_have_units() {
    let grid = rational_grid(10);
    for f in OperatorFamily::ALL {
        for a in &grid {
            assert_eq!(f.tnorm(a, &Degree::one()), *a);
            assert_eq!(f.tconorm(a, &Degree::zero()), *a);
            for b in &grid {
                assert_eq!(f.tnorm(a, b), f.tnorm(b, a));
                assert_eq!(f.tconorm(a, b), f.tconorm(b, a));
            }
        }
    }
}

fn ld(num: i64, den: i64) -> LogDyadicDegree {
    LogDyadicDegree::pow2_ratio(num, den)
}

fn width_ok(lo: &BigRational, hi: &BigRational) -> bool {
    hi - lo < BigRational::new(BigInt::one(), BigInt::one() << 50usize)
}

fn overlaps(a: &(BigRational, BigRational), b: &(BigRational, BigRational)) -> bool {
    a.0 <= b.1 && b.0 <= a.1
}

#[test]
fn log_dyadic_operations_match_interval_arithmetic() {
    let mut values = vec![LogDyadicDegree::Zero];
    for m in 0..=5u32 {
        for k in 0..=12 {
            values.push(ld(-k, 1 << m));
        }
    }
    for a in &values {
        let ea = a.enclose(64);
        assert!(width_ok(&ea.0, &ea.1));
        for b in &values {
            let eb = b.enclose(64);
            let prod = (&ea.0 * &eb.0, &ea.1 * &eb.1);
            let t = ld_tnorm(a, b).enclose(64);
            assert!(width_ok(&t.0, &t.1) && overlaps(&t, &prod), "tnorm {a:?} {b:?}");

            let i = ld_implication(a, b).enclose(64);
            if ea.1 <= eb.0 {
                assert_eq!(i, (BigRational::one(), BigRational::one()));
            } else if eb.1 < ea.0 {
                let quotient = (&eb.0 / &ea.1, &eb.1 / &ea.0);
                assert!(width_ok(&i.0, &i.1) && overlaps(&i, &quotient), "implication {a:?} {b:?}");
            }
        }
        let n = ld_negation(a).enclose(64);
        let want = if a.is_zero() { BigRational::one() } else { BigRational::zero() };
        assert_eq!(n, (want.clone(), want));
    }
}

#[test]
fn expansion_is_idempotent() {
    let mut rng = rng(101);
    for _ in 0..300 {
        let kb = random_kb(&mut rng);
        let once = expand_shorthands(kb.to_statements());
        assert_eq!(expand_shorthands(once.to_statements()), once);
    }
}

/// Independent depth-first cycle search over "left uses right atoms".
fn has_cycle(tbox: &[TboxAxiom]) -> bool {
    let mut edges: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for ax in tbox {
        let from = ax.left().atomic_name().unwrap().to_string();
        edges.entry(from).or_default().extend(ax.right().atoms());
    }
    fn visit(n: &str, edges: &BTreeMap<String, BTreeSet<String>>, state: &mut BTreeMap<String, u8>) -> bool {
        match state.get(n) {
            Some(1) => return true,
            Some(2) => return false,
            _ => {}
        }
        state.insert(n.to_string(), 1);
        let found = edges.get(n).into_iter().flatten().any(|m| visit(m, edges, state));
        state.insert(n.to_string(), 2);
        found
    }
    let mut state = BTreeMap::new();
    edges.keys().any(|n| visit(n, &edges, &mut state))
}

#[test]
fn acyclicity_matches_an_independent_cycle_search() {
    let mut rng = rng(102);
    let names = ["A", "B", "C", "D"];
    let g = ConceptGen { atoms: &names, roles: &["R"], or: true, constants: true };
    let (mut cyclic, mut acyclic) = (0, 0);
    for _ in 0..500 {
        let mut defined = names.to_vec();
        defined.shuffle(&mut rng);
        let mut tbox = Vec::new();
        for name in defined.iter().take(rng.gen_range(0..=4)) {
            let body = g.gen(&mut rng, 2);
            tbox.push(if rng.gen_bool(0.5) {
                TboxAxiom::equivalence(Concept::atom(*name), body)
            } else {
                TboxAxiom::inclusion(Concept::atom(*name), body, degree(&mut rng, 4))
            });
        }
        let c = classify_tbox(&tbox);
        assert_eq!(c.acyclic, !has_cycle(&tbox), "{tbox:?}");
        assert!(!c.unfoldable || c.acyclic);
        if c.acyclic {
            acyclic += 1;
        } else {
            cyclic += 1;
        }
    }
    assert!(cyclic > 50 && acyclic > 50, "{cyclic} cyclic, {acyclic} acyclic");
}

#[test]
fn fresh_names_never_collide() {
    let mut rng = rng(103);
    for _ in 0..200 {
        let mut sig = Signature::default();
        for i in 1..=rng.gen_range(0..6) {
            sig.concepts.insert(format!("A'{}", rng.gen_range(1..=i + 2)));
        }
        sig.roles.insert("A'2".into());
        sig.individuals.insert("A'4".into());
        sig.concepts.insert("A".into());
        let mut fresh = FreshNames::new(&sig);
        let mut seen = BTreeSet::new();
        for _ in 0..10 {
            let n = fresh.next_name();
            assert!(!sig.contains_name(&n), "{n} collides");
            assert!(seen.insert(n));
        }
    }
}

#[test]
fn double_negation_and_conjunction_bounds() {
    let mut rng = rng(104);
    for _ in 0..300 {
        let i = random_interpretation(&mut rng);
        let (c, d) = (concepts(&mut rng, 3), concepts(&mut rng, 3));
        for x in 0..i.size() {
            for f in [Zadeh, Lukasiewicz] {
                let nn = Concept::not(Concept::not(c.clone()));
                assert_eq!(eval_concept(&i, f, &nn, x), eval_concept(&i, f, &c, x));
            }
            for f in OperatorFamily::ALL {
                let both = eval_concept(&i, f, &Concept::and(c.clone(), d.clone()), x);
                assert!(both <= eval_concept(&i, f, &c, x) && both <= eval_concept(&i, f, &d, x));
            }
        }
    }
}

#[test]
fn unit_subsumption_is_the_pointwise_order() {
    let mut rng = rng(105);
    let mut ones = 0;
    for _ in 0..400 {
        let i = random_interpretation(&mut rng);
        let c = concepts(&mut rng, 2);
        // Bias towards pairs where the order can hold.
        let d = if rng.gen_bool(0.3) { Concept::or(c.clone(), concepts(&mut rng, 1)) } else { concepts(&mut rng, 2) };
        for f in OperatorFamily::ALL {
            let values: Vec<(Degree, Degree)> =
                (0..i.size()).map(|x| (eval_concept(&i, f, &c, x), eval_concept(&i, f, &d, x))).collect();
            let unit = subsumption_degree(&i, f, &c, &d).is_one();
            let expected = if f == Zadeh {
                // Kleene–Dienes: max(1 - a, b) = 1 only when a = 0 or b = 1.
                values.iter().all(|(a, b)| a.is_zero() || b.is_one())
            } else {
                values.iter().all(|(a, b)| a <= b)
            };
            assert_eq!(unit, expected, "{f}");
            ones += usize::from(unit);
        }
    }
    assert!(ones > 100, "only {ones} unit subsumptions sampled");
}

#[test]
fn witnesses_reproduce_values() {
    let mut rng = rng(106);
    for _ in 0..300 {
        let i = random_interpretation(&mut rng);
        let c = concepts(&mut rng, 3);
        for f in OperatorFamily::ALL {
            for w in find_witnesses(&i, f, &c, 0) {
                let (role, inner) = match &w.concept {
                    Concept::Forall(r, d) | Concept::Exists(r, d) => (r.as_str(), d.as_ref()),
                    other => panic!("witness for {other}"),
                };
                let r = if i.has_role(role) { i.role_value(role, w.at, w.witness).clone() } else { Degree::zero() };
                let inner_value = eval_concept(&i, f, inner, w.witness);
                let plug = match w.concept {
                    Concept::Forall(..) => f.implication(&r, &inner_value),
                    _ => f.tnorm(&r, &inner_value),
                };
                assert_eq!(plug, w.value);
                assert_eq!(w.value, eval_concept(&i, f, &w.concept, w.at));
            }
        }
    }
}

/// Same interpretation with the domain listed in `order`.
fn reorder(i: &FiniteInterpretation, order: &[usize]) -> FiniteInterpretation {
    let names: Vec<String> = order.iter().map(|&x| i.element_name(x).to_string()).collect();
    let mut out = FiniteInterpretation::new(names).unwrap();
    let pos = |x: usize| order.iter().position(|&o| o == x).unwrap();
    for (ind, &x) in i.individuals() {
        out.assign(ind.clone(), pos(x));
    }
    for name in i.concept_maps().keys() {
        out.declare_concept(name.clone(), Degree::zero());
        for x in 0..i.size() {
            out.set_concept(name, pos(x), i.concept_value(name, x).clone());
        }
    }
    for name in i.role_maps().keys() {
        out.declare_role(name.clone(), Degree::zero());
        for x in 0..i.size() {
            for y in 0..i.size() {
                out.set_role(name, pos(x), pos(y), i.role_value(name, x, y).clone());
            }
        }
    }
    out
}

#[test]
fn values_do_not_depend_on_domain_order() {
    let mut rng = rng(107);
    for _ in 0..200 {
        let i = random_interpretation(&mut rng);
        let mut order: Vec<usize> = (0..i.size()).collect();
        order.shuffle(&mut rng);
        let j = reorder(&i, &order);
        let c = concepts(&mut rng, 3);
        for f in OperatorFamily::ALL {
            for (new, &old) in order.iter().enumerate() {
                assert_eq!(eval_concept(&j, f, &c, new), eval_concept(&i, f, &c, old));
            }
        }
    }
}

/// Operators written out again, straight from their defining formulas.
mod naive {
    use super::*;

    pub fn q(d: &Degree) -> BigRational {
        d.as_ratio().clone()
    }

    fn one() -> BigRational {
        BigRational::one()
    }

    fn zero() -> BigRational {
        BigRational::zero()
    }

    pub fn tnorm(f: OperatorFamily, a: &BigRational, b: &BigRational) -> BigRational {
        match f {
            Zadeh | Goedel => a.min(b).clone(),
            Lukasiewicz => (a + b - one()).max(zero()),
            Product => a * b,
        }
    }

    pub fn tconorm(f: OperatorFamily, a: &BigRational, b: &BigRational) -> BigRational {
        match f {
            Zadeh | Goedel => a.max(b).clone(),
            Lukasiewicz => (a + b).min(one()),
            Product => a + b - a * b,
        }
    }

    pub fn negation(f: OperatorFamily, a: &BigRational) -> BigRational {
        match f {
            Zadeh | Lukasiewicz => one() - a,
            Product | Goedel => {
                if a.is_zero() {
                    one()
                } else {
                    zero()
                }
            }
        }
    }

    pub fn implication(f: OperatorFamily, a: &BigRational, b: &BigRational) -> BigRational {
        match f {
            Zadeh => (one() - a).max(b.clone()),
            Lukasiewicz => (one() - a + b).min(one()),
            Goedel if a <= b => one(),
            Goedel => b.clone(),
            Product if a <= b => one(),
            Product => b / a,
        }
    }

    pub fn eval(i: &FiniteInterpretation, f: OperatorFamily, c: &Concept, x: usize) -> BigRational {
        let role = |r: &str, y: usize| if i.has_role(r) { q(i.role_value(r, x, y)) } else { zero() };
        match c {
            Concept::Top => one(),
            Concept::Bottom => zero(),
            Concept::Atomic(a) => {
                if i.has_concept(a) {
                    q(i.concept_value(a, x))
                } else {
                    zero()
                }
            }
            Concept::Not(d) => negation(f, &eval(i, f, d, x)),
            Concept::And(l, r) => tnorm(f, &eval(i, f, l, x), &eval(i, f, r, x)),
            Concept::Or(l, r) => tconorm(f, &eval(i, f, l, x), &eval(i, f, r, x)),
            Concept::Forall(r, d) => {
                (0..i.size()).map(|y| implication(f, &role(r, y), &eval(i, f, d, y))).min().unwrap()
            }
            Concept::Exists(r, d) => (0..i.size()).map(|y| tnorm(f, &role(r, y), &eval(i, f, d, y))).max().unwrap(),
        }
    }
}

fn bigger_interpretation(rng: &mut TestRng) -> FiniteInterpretation {
    let n = rng.gen_range(1..=4);
    let mut i = FiniteInterpretation::with_size(n).unwrap();
    for c in &NAMES[..4] {
        i.declare_concept(*c, Degree::zero());
        for x in 0..n {
            i.set_concept(c, x, degree(rng, 6));
        }
    }
    for r in &ROLES[..2] {
        i.declare_role(*r, Degree::zero());
        for x in 0..n {
            for y in 0..n {
                if rng.gen_bool(0.6) {
                    i.set_role(r, x, y, degree(rng, 6));
                }
            }
        }
    }
    i
}

#[test]
fn evaluator_matches_a_naive_transcription() {
    let mut rng = rng(108);
    for _ in 0..400 {
        let i = bigger_interpretation(&mut rng);
        let c = concepts(&mut rng, 4);
        for f in OperatorFamily::ALL {
            for x in 0..i.size() {
                assert_eq!(*eval_concept(&i, f, &c, x).as_ratio(), naive::eval(&i, f, &c, x), "{f} {c} at {x}");
            }
        }
    }
}

#[test]
fn subsumption_matches_a_naive_transcription() {
    let mut rng = rng(109);
    for _ in 0..300 {
        let i = bigger_interpretation(&mut rng);
        let (c, d) = (concepts(&mut rng, 3), concepts(&mut rng, 3));
        for f in OperatorFamily::ALL {
            let naive = (0..i.size())
                .map(|x| naive::implication(f, &naive::eval(&i, f, &c, x), &naive::eval(&i, f, &d, x)))
                .min()
                .unwrap();
            assert_eq!(*subsumption_degree(&i, f, &c, &d).as_ratio(), naive);
        }
    }
}

mod text {
    use fuzzy_alc::kbio::parse_concept;
    use fuzzy_alc::{Concept, Degree};
    use proptest::prelude::*;

    fn concept() -> impl Strategy<Value = Concept> {
        let leaf = prop_oneof![
            Just(Concept::Top),
            Just(Concept::Bottom),
            prop::sample::select(vec!["A", "Cat", "d_1", "E'", "A'1"]).prop_map(Concept::atom),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            let role = prop::sample::select(vec!["R", "has_part"]);
            prop_oneof![
                inner.clone().prop_map(Concept::not),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Concept::and(l, r)),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Concept::or(l, r)),
                (role.clone(), inner.clone()).prop_map(|(r, c)| Concept::forall(r, c)),
                (role, inner).prop_map(|(r, c)| Concept::exists(r, c)),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

        #[test]
        fn degrees_print_and_parse_back(q in 1i64..1_000_000, p in 0i64..1_000_000) {
            let d = Degree::ratio(p % (q + 1), q);
            prop_assert_eq!(d.to_string().parse::<Degree>().unwrap(), d);
        }

        #[test]
        fn terminating_decimals_are_exact(digits in 0u32..1_000_000, scale in 0u32..7) {
            let den = 10i64.pow(scale);
            let num = i64::from(digits) % (den + 1);
            let text = if scale == 0 { num.to_string() } else { format!("{}.{:0width$}", num / den, num % den, width = scale as usize) };
            prop_assert_eq!(text.parse::<Degree>().unwrap(), Degree::ratio(num, den));
        }

        #[test]
        fn concepts_print_and_parse_back(c in concept()) {
            prop_assert_eq!(parse_concept(&c.to_ascii()).unwrap(), c);
        }
    }
}
