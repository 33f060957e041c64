mod common;

use common::{Gen, Shape};
use cpa_core::bisim::{
    decide, decide_cost_preserving_weak, decide_minor_weak, find_split, quotient, refine, verify_witness, CostMode,
    RelationKind,
};
use cpa_core::model::{disjoint_union, Cpa};
use cpa_core::relations::Partition;
use proptest::prelude::*;
use rand::Rng;

const KINDS: [RelationKind; 3] = [RelationKind::Strong, RelationKind::StrongProb, RelationKind::WeakProb];
const MODES: [CostMode; 3] = [CostMode::Plain, CostMode::Preserving, CostMode::Minor];

fn shape(name: &'static str) -> Shape {
    let mut s = Shape::small(name);
    s.max_states = 4;
    s.max_transitions = 6;
    s
}

/// A random model and a second one that is either a cost variant of it or
/// unrelated.
fn pair(g: &mut Gen) -> (Cpa, Cpa) {
    let a = g.cpa(&shape("one"));
    let b = if g.rng.gen_bool(0.6) {
        g.rescale(&a, "two", 0, 2)
    } else {
        g.cpa(&shape("two"))
    };
    (a, b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn reflexive_in_every_mode(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let a = g.cpa(&shape("refl"));
        for kind in KINDS {
            for mode in MODES {
                let v = decide(kind, mode, &a, &a).unwrap();
                prop_assert!(v.holds, "{} {}", kind, mode);
                prop_assert!(verify_witness(&v, &a, &a), "{} {}", kind, mode);
            }
        }
    }

    #[test]
    fn implication_chain(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let (a, b) = pair(&mut g);
        for mode in MODES {
            let holds: Vec<bool> = KINDS.iter().map(|k| decide(*k, mode, &a, &b).unwrap().holds).collect();
            prop_assert!(!holds[0] || holds[1], "strong without strong-prob under {}", mode);
            prop_assert!(!holds[1] || holds[2], "strong-prob without weak-prob under {}", mode);
        }
        for kind in KINDS {
            let preserving = decide(kind, CostMode::Preserving, &a, &b).unwrap().holds;
            let minor = decide(kind, CostMode::Minor, &a, &b).unwrap().holds;
            let minor_back = decide(kind, CostMode::Minor, &b, &a).unwrap().holds;
            let plain = decide(kind, CostMode::Plain, &a, &b).unwrap().holds;
            prop_assert!(!preserving || (minor && minor_back), "{} preserving without minor", kind);
            prop_assert!(!minor || plain, "{} minor without plain", kind);
        }
    }

    #[test]
    fn witnesses_verify(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let (a, b) = pair(&mut g);
        for kind in KINDS {
            for mode in MODES {
                let v = decide(kind, mode, &a, &b).unwrap();
                if v.holds {
                    prop_assert!(verify_witness(&v, &a, &b), "{} {}", kind, mode);
                }
            }
        }
        let v = decide_cost_preserving_weak(&a, &b).unwrap();
        if v.holds {
            prop_assert!(decide_minor_weak(&a, &b).unwrap().holds);
        }
    }

    #[test]
    fn minor_removals_are_bounded(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let (a, b) = pair(&mut g);
        let v = decide_minor_weak(&a, &b).unwrap();
        prop_assert!(v.removed_pairs.len() <= a.num_states() * b.num_states());
        if let Some(rc) = &v.cost_relation {
            for (s2, s1) in rc.pairs() {
                prop_assert!(v.partition.same_class(*s2, *s1));
            }
        }
    }

    #[test]
    fn refinement_progresses_to_the_coarsest_partition(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let (a, b) = pair(&mut g);
        let u = disjoint_union(&a, &b).unwrap().cpa;
        let n = u.num_states();
        let mut w = Partition::trivial(0..n);
        let mut rounds = 0;
        while let Some(split) = find_split(&u, &w).unwrap() {
            let next = refine(&w, &split, &u).unwrap();
            prop_assert!(next.num_classes() > w.num_classes());
            if let Some(again) = find_split(&u, &next).unwrap() {
                prop_assert!(again != split);
            }
            w = next;
            rounds += 1;
            prop_assert!(rounds < n);
        }
        prop_assert_eq!(&w, &quotient(&u).unwrap());
        // merging two classes is always rejected
        if w.num_classes() > 1 {
            let i = g.rng.gen_range(0..w.num_classes());
            let j = (i + 1 + g.rng.gen_range(0..w.num_classes() - 1)) % w.num_classes();
            let mut classes: Vec<Vec<usize>> = w.classes().to_vec();
            let moved = classes[j].clone();
            classes[i].extend(moved);
            classes.remove(j);
            let merged = Partition::from_classes(classes).unwrap();
            prop_assert!(find_split(&u, &merged).unwrap().is_some());
        }
    }

    #[test]
    fn minor_is_transitive_on_cost_variants(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let a = g.cpa(&shape("x"));
        let b = g.rescale(&a, "y", 0, 2);
        let c = g.rescale(&b, "z", 0, 2);
        let ab = decide_minor_weak(&a, &b).unwrap().holds;
        let bc = decide_minor_weak(&b, &c).unwrap().holds;
        if ab && bc {
            prop_assert!(decide_minor_weak(&a, &c).unwrap().holds);
        }
    }
}
