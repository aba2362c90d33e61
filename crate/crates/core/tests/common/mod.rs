#![allow(dead_code)]

use fuzzy_alc::semantics::FiniteInterpretation;
use fuzzy_alc::{Axiom, Concept, Degree, KnowledgeBase, TboxAxiom};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every `p/q` in [0, 1] with `q <= max_den`, deduplicated and sorted.
pub fn rational_grid(max_den: i64) -> Vec<Degree> {
    let mut out: Vec<Degree> = (1..=max_den)
        .flat_map(|q| (0..=q).map(move |p| Degree::ratio(p, q)))
        .collect();
    out.sort();
    out.dedup();
    out
}

pub fn degree(rng: &mut TestRng, max_den: i64) -> Degree {
    let q = rng.gen_range(1..=max_den);
    Degree::ratio(rng.gen_range(0..=q), q)
}

pub struct ConceptGen<'a> {
    pub atoms: &'a [&'a str],
    pub roles: &'a [&'a str],
    pub or: bool,
    pub constants: bool,
}

impl ConceptGen<'_> {
    pub fn gen(&self, rng: &mut TestRng, depth: u32) -> Concept {
        let leaf = depth == 0 || rng.gen_bool(0.3);
        if leaf {
            if self.atoms.is_empty() || (self.constants && rng.gen_bool(0.1)) {
                return if rng.gen_bool(0.5) { Concept::Top } else { Concept::Bottom };
            }
            return Concept::atom(*self.atoms.choose(rng).unwrap());
        }
        let d = depth - 1;
        let choices = if self.or { 5 } else { 4 };
        match rng.gen_range(0..choices) {
            0 => Concept::not(self.gen(rng, d)),
            1 => Concept::and(self.gen(rng, d), self.gen(rng, d)),
            2 => Concept::forall(*self.roles.choose(rng).unwrap(), self.gen(rng, d)),
            3 => Concept::exists(*self.roles.choose(rng).unwrap(), self.gen(rng, d)),
            _ => Concept::or(self.gen(rng, d), self.gen(rng, d)),
        }
    }
}

pub const NAMES: &[&str] = &["A", "B", "Cat", "d_1", "E'", "A'1"];
pub const ROLES: &[&str] = &["R", "S", "has_part"];
pub const INDIVIDUALS: &[&str] = &["a", "b", "jim"];

/// Arbitrary KB for round-trip tests.
pub fn random_kb(rng: &mut TestRng) -> KnowledgeBase {
    let g = ConceptGen { atoms: NAMES, roles: ROLES, or: true, constants: true };
    let mut abox = Vec::new();
    for _ in 0..rng.gen_range(0..5) {
        let individual = INDIVIDUALS.choose(rng).unwrap().to_string();
        let degree = degree(rng, 12);
        abox.push(match rng.gen_range(0..3) {
            0 => Axiom::ConceptGeq { individual, concept: g.gen(rng, 3), degree },
            1 => Axiom::ConceptLeq { individual, concept: g.gen(rng, 3), degree },
            _ => Axiom::RoleGeq {
                subject: individual,
                object: INDIVIDUALS.choose(rng).unwrap().to_string(),
                role: ROLES.choose(rng).unwrap().to_string(),
                degree,
            },
        });
    }
    let mut tbox = Vec::new();
    for _ in 0..rng.gen_range(0..4) {
        tbox.push(if rng.gen_bool(0.7) {
            TboxAxiom::inclusion(g.gen(rng, 2), g.gen(rng, 3), degree(rng, 12))
        } else {
            TboxAxiom::equivalence(g.gen(rng, 2), g.gen(rng, 3))
        });
    }
    KnowledgeBase::new(abox, tbox)
}

pub fn random_interpretation(rng: &mut TestRng) -> FiniteInterpretation {
    let n = rng.gen_range(1..=3);
    let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let mut i = FiniteInterpretation::new(names).unwrap();
    for ind in INDIVIDUALS.iter().take(rng.gen_range(0..=3)) {
        i.assign(*ind, rng.gen_range(0..n));
    }
    for c in NAMES {
        if rng.gen_bool(0.5) {
            continue;
        }
        i.declare_concept(*c, Degree::zero());
        for x in 0..n {
            if rng.gen_bool(0.6) {
                i.set_concept(c, x, degree(rng, 12));
            }
        }
    }
    for r in ROLES {
        if rng.gen_bool(0.5) {
            continue;
        }
        i.declare_role(*r, Degree::zero());
        for x in 0..n {
            for y in 0..n {
                if rng.gen_bool(0.5) {
                    i.set_role(r, x, y, degree(rng, 12));
                }
            }
        }
    }
    i
}

/// Acyclic Łukasiewicz KB over `A`, `B`, one role and two individuals. `A`
/// may be defined in terms of `B`; `B` only in terms of `⊤`, `⊥` and `R`.
pub fn random_acyclic_kb(rng: &mut TestRng) -> KnowledgeBase {
    let inclusion_degrees = [Degree::ratio(1, 2), Degree::ratio(1, 3), Degree::ratio(2, 3), Degree::one()];
    let ground = ConceptGen { atoms: &[], roles: &["R"], or: true, constants: true };
    let upper = ConceptGen { atoms: &["B"], roles: &["R"], or: true, constants: true };
    let mut tbox = Vec::new();
    for (name, g) in [("A", &upper), ("B", &ground)] {
        if rng.gen_bool(0.8) {
            let body = g.gen(rng, 2);
            tbox.push(if rng.gen_bool(0.25) {
                TboxAxiom::equivalence(Concept::atom(name), body)
            } else {
                let d = inclusion_degrees.choose(rng).unwrap().clone();
                TboxAxiom::inclusion(Concept::atom(name), body, d)
            });
        }
    }
    tbox.shuffle(rng);
    let all = ConceptGen { atoms: &["A", "B"], roles: &["R"], or: true, constants: false };
    let grid = |lo: usize, hi: usize, rng: &mut TestRng| {
        let g = [(0, 1), (1, 6), (1, 4), (1, 3), (1, 2), (2, 3), (3, 4), (5, 6), (1, 1)];
        let (p, q) = g[rng.gen_range(lo..=hi)];
        Degree::ratio(p, q)
    };
    let mut abox = Vec::new();
    for _ in 0..rng.gen_range(2..=4) {
        let individual = ["a", "b"].choose(rng).unwrap().to_string();
        let concept = all.gen(rng, 1);
        abox.push(if rng.gen_bool(0.6) {
            Axiom::ConceptGeq { individual, concept, degree: grid(3, 8, rng) }
        } else {
            Axiom::ConceptLeq { individual, concept, degree: grid(0, 4, rng) }
        });
    }
    if rng.gen_bool(0.4) {
        abox.push(Axiom::RoleGeq { subject: "a".into(), object: "b".into(), role: "R".into(), degree: grid(1, 8, rng) });
    }
    KnowledgeBase::new(abox, tbox)
}
