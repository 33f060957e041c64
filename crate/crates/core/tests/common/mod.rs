//! Seeded generators shared by the integration suites.
#![allow(dead_code)]

pub mod props;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use cpa_core::flownet::WeakLabel;
use cpa_core::model::{Alphabet, Cpa, Distribution, Rational, StateId, Transition};
use cpa_core::relations::BinaryRelation;
use cpa_core::sched::{analyze, DeterminateScheduler, Stage, StageChoice};
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Size and alphabet of generated automata.
#[derive(Debug, Clone)]
pub struct Shape {
    pub name: &'static str,
    pub max_states: usize,
    pub max_transitions: usize,
    pub external: &'static [&'static str],
    pub internal: &'static [&'static str],
    /// Transitions only lead to states with larger index.
    pub acyclic: bool,
    /// Largest denominator of probabilities and costs.
    pub max_den: i64,
    pub min_states: usize,
    pub min_transitions: usize,
    /// Every state is the target of a transition from a smaller state.
    pub connected: bool,
}

impl Shape {
    pub fn small(name: &'static str) -> Self {
        Shape {
            name,
            max_states: 6,
            max_transitions: 10,
            external: &["a", "b"],
            internal: &["i"],
            acyclic: false,
            max_den: 8,
            min_states: 1,
            min_transitions: 0,
            connected: false,
        }
    }

    /// Exactly `states` states, all reachable, and `transitions` transitions.
    pub fn exact(mut self, states: usize, transitions: usize) -> Self {
        self.min_states = states;
        self.max_states = states;
        self.min_transitions = transitions;
        self.max_transitions = transitions;
        self.connected = true;
        self
    }

    pub fn acyclic(mut self, max_states: usize, max_transitions: usize) -> Self {
        self.acyclic = true;
        self.max_states = max_states;
        self.max_transitions = max_transitions;
        self
    }
}

pub struct Gen {
    pub rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn cost(&mut self, max_den: i64) -> Rational {
        let d = self.rng.gen_range(1..=max_den);
        q(self.rng.gen_range(0..=4 * d), d)
    }

    /// `k` positive weights summing to one, with a common denominator of at
    /// most `max_den`.
    pub fn weights(&mut self, k: usize, max_den: i64) -> Vec<Rational> {
        let k = k.max(1);
        let d = self.rng.gen_range(k as i64..=max_den.max(k as i64));
        let mut cuts: Vec<i64> = (1..d).collect();
        cuts.shuffle(&mut self.rng);
        let mut cuts: Vec<i64> = cuts.into_iter().take(k - 1).collect();
        cuts.push(0);
        cuts.push(d);
        cuts.sort_unstable();
        cuts.windows(2).map(|w| q(w[1] - w[0], d)).collect()
    }

    /// Full distribution over up to `max_support` elements of `from`.
    pub fn distribution<T: Ord + Clone>(&mut self, from: &[T], max_support: usize, max_den: i64) -> Distribution<T> {
        let k = self.rng.gen_range(1..=max_support.min(from.len()).min(max_den as usize));
        let support: Vec<T> = from.choose_multiple(&mut self.rng, k).cloned().collect();
        let w = self.weights(k, max_den);
        Distribution::from_pairs(support.into_iter().zip(w)).expect("weights form a distribution")
    }

    pub fn cpa(&mut self, shape: &Shape) -> Cpa {
        let n = self.rng.gen_range(shape.min_states..=shape.max_states);
        let m = self.rng.gen_range(shape.min_transitions..=shape.max_transitions);
        let actions: Vec<&str> = shape.external.iter().chain(shape.internal).copied().collect();
        let mut transitions = Vec::new();
        for k in 0..m {
            if shape.connected && k + 1 < n {
                let source = self.rng.gen_range(0..=k);
                let others: Vec<StateId> = (0..n).filter(|&v| v != k + 1 && (!shape.acyclic || v > source)).collect();
                let mut target = if others.is_empty() {
                    Distribution::dirac(k + 1)
                } else {
                    let w = self.weights(2, shape.max_den);
                    let other = *others.choose(&mut self.rng).expect("nonempty");
                    if self.rng.gen_bool(0.5) {
                        Distribution::from_pairs([(k + 1, w[0].clone()), (other, w[1].clone())]).expect("valid")
                    } else {
                        Distribution::dirac(k + 1)
                    }
                };
                if target.prob(&(k + 1)).is_zero() {
                    target = Distribution::dirac(k + 1);
                }
                transitions.push(Transition {
                    source,
                    action: actions.choose(&mut self.rng).expect("nonempty alphabet").to_string(),
                    target,
                    cost: self.cost(shape.max_den),
                });
                continue;
            }
            let source = if shape.acyclic {
                if n < 2 {
                    break;
                }
                self.rng.gen_range(0..n - 1)
            } else {
                self.rng.gen_range(0..n)
            };
            let targets: Vec<StateId> = if shape.acyclic { (source + 1..n).collect() } else { (0..n).collect() };
            let target = self.distribution(&targets, 3, shape.max_den);
            transitions.push(Transition {
                source,
                action: actions.choose(&mut self.rng).expect("nonempty alphabet").to_string(),
                target,
                cost: self.cost(shape.max_den),
            });
        }
        let alphabet = Alphabet::new(
            shape.external.iter().map(|s| s.to_string()).collect(),
            shape.internal.iter().map(|s| s.to_string()).collect(),
        );
        let states = (0..n).map(|i| format!("s{i}")).collect();
        Cpa::new(shape.name, states, 0, alphabet, transitions)
            .expect("generated automaton is valid")
            .prune_unreachable()
            .0
    }

    /// A relation where each pair of the universes is present with
    /// probability `density`.
    pub fn relation<T: Ord + Clone>(&mut self, left: &[T], right: &[T], density: f64) -> BinaryRelation<T> {
        let mut r = BinaryRelation::empty(left.iter().cloned(), right.iter().cloned());
        for x in left {
            for y in right {
                if self.rng.gen_bool(density) {
                    r.insert(x.clone(), y.clone()).expect("pair in the universes");
                }
            }
        }
        r
    }

    /// Moves the mass of each `x` onto random `R`-images of `x`, so the
    /// result is related to `mu` by the lifting. `None` when some support
    /// element has no image.
    pub fn push<T: Ord + Clone>(&mut self, mu: &Distribution<T>, r: &BinaryRelation<T>) -> Option<Distribution<T>> {
        let mut pairs = Vec::new();
        for (x, p) in mu.iter() {
            let image = r.image(x);
            if image.is_empty() {
                return None;
            }
            let k = self.rng.gen_range(1..=image.len().min(3));
            let targets: Vec<T> = image.choose_multiple(&mut self.rng, k).cloned().collect();
            for (y, w) in targets.into_iter().zip(self.weights(k, 8)) {
                pairs.push((y, p * w));
            }
        }
        Some(Distribution::from_pairs(pairs).expect("pushed mass is a distribution"))
    }

    /// A random determinate scheduler for a weak transition with `label`
    /// from `start`. Deterministic unless `randomized`. May not terminate.
    pub fn scheduler(&mut self, cpa: &Cpa, start: StateId, label: &WeakLabel, randomized: bool) -> DeterminateScheduler {
        let mut sched = DeterminateScheduler::new(label.clone());
        let root = (start, Stage::PreAction);
        let mut seen = BTreeSet::from([root]);
        let mut queue = VecDeque::from([root]);
        while let Some((s, stage)) = queue.pop_front() {
            let mut options: Vec<Option<usize>> = cpa
                .outgoing(s)
                .iter()
                .filter(|&&tr| sched.next_stage(cpa, stage, tr).is_some())
                .map(|&tr| Some(tr))
                .collect();
            if stage == sched.final_stage() {
                options.push(None);
            }
            if options.is_empty() {
                continue;
            }
            let k = if randomized { self.rng.gen_range(1..=options.len().min(3)) } else { 1 };
            let picked: Vec<Option<usize>> = options.choose_multiple(&mut self.rng, k).copied().collect();
            let mut choice = StageChoice {
                transitions: BTreeMap::new(),
                stop: Rational::zero(),
            };
            for (opt, w) in picked.into_iter().zip(self.weights(k, 8)) {
                match opt {
                    None => choice.stop = w,
                    Some(tr) => {
                        choice.transitions.insert(tr, w);
                        let next = sched.next_stage(cpa, stage, tr).expect("filtered");
                        for &v in cpa.transition(tr).target.support() {
                            if seen.insert((v, next)) {
                                queue.push_back((v, next));
                            }
                        }
                    }
                }
            }
            sched.set(s, stage, choice);
        }
        sched
    }

    /// A terminating random scheduler together with its target, if one is
    /// found within a few attempts.
    pub fn terminating_scheduler(
        &mut self,
        cpa: &Cpa,
        start: StateId,
        label: &WeakLabel,
        randomized: bool,
    ) -> Option<(DeterminateScheduler, Distribution)> {
        for _ in 0..8 {
            let sched = self.scheduler(cpa, start, label, randomized);
            if let Ok(summary) = analyze(&sched, start, cpa) {
                return Some((sched, summary.target));
            }
        }
        None
    }

    pub fn label(&mut self, cpa: &Cpa) -> WeakLabel {
        let ext = &cpa.alphabet().external;
        if ext.is_empty() || self.rng.gen_bool(0.4) {
            WeakLabel::Tau
        } else {
            WeakLabel::Action(ext.choose(&mut self.rng).expect("nonempty").clone())
        }
    }

    /// Random MDP: at most one transition per state and action.
    pub fn mdp(&mut self, max_states: usize) -> Cpa {
        let n = self.rng.gen_range(1..=max_states);
        let actions = ["a", "b"];
        let all: Vec<StateId> = (0..n).collect();
        let mut transitions = Vec::new();
        for s in 0..n {
            let forced = self.rng.gen_range(0..actions.len());
            for (k, a) in actions.iter().enumerate() {
                if k == forced || self.rng.gen_bool(0.5) {
                    transitions.push(Transition {
                        source: s,
                        action: a.to_string(),
                        target: self.distribution(&all, 2, 4),
                        cost: self.cost(4),
                    });
                }
            }
        }
        let states = (0..n).map(|i| format!("m{i}")).collect();
        Cpa::new("mdp", states, 0, Alphabet::new(vec!["a".into(), "b".into()], vec![]), transitions)
            .expect("generated MDP is valid")
            .prune_unreachable()
            .0
    }

    /// Same structure with every cost multiplied by a factor in `[lo, hi]`.
    pub fn rescale(&mut self, cpa: &Cpa, name: &str, lo: i64, hi: i64) -> Cpa {
        let transitions = cpa
            .transitions()
            .iter()
            .map(|t| Transition {
                cost: &t.cost * q(self.rng.gen_range(lo * 4..=hi * 4), 4),
                ..t.clone()
            })
            .collect();
        Cpa::new(name, cpa.states().to_vec(), cpa.start(), cpa.alphabet().clone(), transitions)
            .expect("same structure")
    }
}

/// Copy of `cpa` with each cost multiplied by the matching factor.
pub fn with_costs(cpa: &Cpa, name: &str, factors: &[Rational]) -> Cpa {
    let transitions = cpa
        .transitions()
        .iter()
        .zip(factors)
        .map(|(t, f)| Transition {
            cost: &t.cost * f,
            ..t.clone()
        })
        .collect();
    Cpa::new(name, cpa.states().to_vec(), cpa.start(), cpa.alphabet().clone(), transitions).expect("same structure")
}

pub fn all_states(cpa: &Cpa) -> Vec<StateId> {
    (0..cpa.num_states()).collect()
}

