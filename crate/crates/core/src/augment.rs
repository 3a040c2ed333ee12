//! Memory-vector augmentation of generalized Büchi automata.
//!
//! Each augmented state pairs a base state with a bit vector recording which
//! acceptance sets were visited since the vector was last cleared. A
//! transition of `F_j` stays accepting only while bit `j` is still clear, so
//! the augmented state tells a positional policy which sets remain to visit.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use crate::automata::{AccMarks, Edge, StateId, TGba, Transition};
use crate::graph;

/// One bit per acceptance set; bit `j` is set when `F_{j+1}` has been visited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MemoryVector {
    bits: u32,
    len: usize,
}

impl MemoryVector {
    pub fn zeros(len: usize) -> MemoryVector {
        MemoryVector { bits: 0, len }
    }

    pub fn ones(len: usize) -> MemoryVector {
        MemoryVector { bits: AccMarks::all(len).0, len }
    }

    /// Builds a vector from its entries, `v[0]` first.
    pub fn from_slice(v: &[u8]) -> MemoryVector {
        let bits = v.iter().enumerate().fold(0, |acc, (j, &b)| acc | u32::from(b != 0) << j);
        MemoryVector { bits, len: v.len() }
    }

    pub fn from_marks(marks: AccMarks, len: usize) -> MemoryVector {
        MemoryVector { bits: marks.0 & AccMarks::all(len).0, len }
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn len(self) -> usize {
        self.len
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    pub fn get(self, j: usize) -> bool {
        self.bits >> j & 1 == 1
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }

    pub fn is_all_ones(self) -> bool {
        self.bits == AccMarks::all(self.len).0
    }
}

impl fmt::Display for MemoryVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.len {
            f.write_str(if self.get(j) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// The sets containing transition `t` of `b`, as a vector. Unknown and ε
/// transitions visit nothing.
pub fn visitf(b: &TGba, t: &Transition) -> MemoryVector {
    let marks = b.find_edge(t).map_or(AccMarks::NONE, |i| b.edge(i).marks);
    MemoryVector::from_marks(marks, b.num_acceptance_sets())
}

/// Clears a full vector; leaves any other vector alone.
pub fn reset(v: MemoryVector) -> MemoryVector {
    if v.is_all_ones() {
        MemoryVector::zeros(v.len)
    } else {
        v
    }
}

pub fn vec_max(v: MemoryVector, u: MemoryVector) -> MemoryVector {
    assert_eq!(v.len, u.len, "memory vectors of different length");
    MemoryVector { bits: v.bits | u.bits, len: v.len }
}

/// Memory after taking a transition with `marks` from memory `v`.
pub fn update(v: MemoryVector, marks: AccMarks) -> MemoryVector {
    reset(vec_max(v, MemoryVector::from_marks(marks, v.len)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Memory {
    Vector(MemoryVector),
    /// Stands for every memory value of a base state that can no longer
    /// reach an accepting transition.
    Merged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AugmentedState {
    pub base: StateId,
    pub memory: Memory,
}

impl AugmentedState {
    pub fn vector(&self) -> Option<MemoryVector> {
        match self.memory {
            Memory::Vector(v) => Some(v),
            Memory::Merged => None,
        }
    }
}

/// An augmented automaton together with the meaning of each of its states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedAutomaton {
    pub automaton: TGba,
    pub states: Vec<AugmentedState>,
}

fn state_name(b: &TGba, s: &AugmentedState) -> String {
    match s.memory {
        Memory::Vector(v) => format!("{}@{v}", b.state_name(s.base)),
        Memory::Merged => format!("{}@*", b.state_name(s.base)),
    }
}

/// The reachable part of the memory-augmented automaton.
///
/// States are explored breadth-first from `(x_init, 0)`, following edges in
/// their sorted order, so state ids are deterministic.
pub fn augment(b: &TGba) -> AugmentedAutomaton {
    let n = b.num_acceptance_sets();
    let mut ids: BTreeMap<AugmentedState, usize> = BTreeMap::new();
    let mut states: Vec<AugmentedState> = Vec::new();
    let mut queue = VecDeque::new();
    let mut intern = |s: AugmentedState, states: &mut Vec<_>, queue: &mut VecDeque<_>| {
        *ids.entry(s).or_insert_with(|| {
            states.push(s);
            queue.push_back(s);
            states.len() - 1
        })
    };
    let start = AugmentedState { base: b.initial(), memory: Memory::Vector(MemoryVector::zeros(n)) };
    intern(start, &mut states, &mut queue);
    let mut edges = Vec::new();
    while let Some(s) = queue.pop_front() {
        let src = intern(s, &mut states, &mut queue);
        let v = s.vector().expect("augmentation only creates vector memories");
        for e in b.out_edges(s.base) {
            let t = e.transition;
            let next = AugmentedState { base: t.dst, memory: Memory::Vector(update(v, e.marks)) };
            let dst = intern(next, &mut states, &mut queue);
            edges.push(Edge {
                transition: Transition { src, letter: t.letter, dst },
                marks: AccMarks(e.marks.0 & !v.bits),
            });
        }
    }
    let names = states.iter().map(|s| state_name(b, s)).collect();
    let automaton = TGba::new(b.aps().to_vec(), names, 0, n, edges).expect("augmentation is well formed");
    AugmentedAutomaton { automaton, states }
}

/// Collapses, per base state, all augmented states from which no accepting
/// transition is reachable.
///
/// Such states accept nothing, so identifying them cannot change the
/// language. A base state with a single such copy keeps its vector name.
pub fn merge_unaccepting(aug: &AugmentedAutomaton) -> AugmentedAutomaton {
    let a = &aug.automaton;
    let successors: Vec<Vec<usize>> =
        (0..a.num_states()).map(|q| a.out_edges(q).iter().map(|e| e.transition.dst).collect()).collect();
    let marked_sources = a.edges().iter().filter(|e| !e.marks.is_empty()).map(|e| e.transition.src);
    let live = graph::can_reach(&successors, marked_sources);

    let mut dead_per_base: BTreeMap<StateId, usize> = BTreeMap::new();
    for (q, s) in aug.states.iter().enumerate() {
        if !live[q] {
            *dead_per_base.entry(s.base).or_default() += 1;
        }
    }
    let mut base_names: BTreeMap<StateId, &str> = BTreeMap::new();
    for (q, s) in aug.states.iter().enumerate() {
        let name = a.state_name(q);
        base_names.insert(s.base, name.rsplit_once('@').map_or(name, |(x, _)| x));
    }
    let mut new_id = vec![0; a.num_states()];
    let mut states: Vec<AugmentedState> = Vec::new();
    let mut merged_id: BTreeMap<StateId, usize> = BTreeMap::new();
    for (q, s) in aug.states.iter().enumerate() {
        if !live[q] && dead_per_base[&s.base] > 1 {
            new_id[q] = *merged_id.entry(s.base).or_insert_with(|| {
                states.push(AugmentedState { base: s.base, memory: Memory::Merged });
                states.len() - 1
            });
        } else {
            states.push(*s);
            new_id[q] = states.len() - 1;
        }
    }
    let mut edges: BTreeMap<Transition, AccMarks> = BTreeMap::new();
    for e in a.edges() {
        let t = e.transition;
        let t = Transition { src: new_id[t.src], letter: t.letter, dst: new_id[t.dst] };
        let marks = edges.entry(t).or_default();
        *marks = marks.union(e.marks);
    }
    let edges = edges.into_iter().map(|(transition, marks)| Edge { transition, marks }).collect();
    let names = states
        .iter()
        .map(|s| match s.memory {
            Memory::Vector(v) => format!("{}@{v}", base_names[&s.base]),
            Memory::Merged => format!("{}@*", base_names[&s.base]),
        })
        .collect();
    let automaton = TGba::new(a.aps().to_vec(), names, new_id[a.initial()], a.num_acceptance_sets(), edges)
        .expect("merging is well formed");
    AugmentedAutomaton { automaton, states }
}

/// `augment` followed by `merge_unaccepting`.
pub fn augment_and_merge(b: &TGba) -> AugmentedAutomaton {
    merge_unaccepting(&augment(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{
        accepts_lasso, check_limit_deterministic, fixture_fg_a, fixture_gfa_gfb_gfc, fixture_gfa_gfb_gnc, fixtures,
        Letter, Valuation,
    };
    use crate::ltl::{all_lasso_words, props};
    use proptest::prelude::*;

    fn t0(bits: u32) -> Transition {
        Transition { src: 0, letter: Letter::Set(Valuation(bits)), dst: 0 }
    }

    fn mv(v: &[u8]) -> MemoryVector {
        MemoryVector::from_slice(v)
    }

    #[test]
    fn visitf_on_running_example() {
        let b = fixture_gfa_gfb_gnc();
        assert_eq!(visitf(&b, &t0(0b011)), mv(&[1, 1]));
        assert_eq!(visitf(&b, &t0(0b001)), mv(&[1, 0]));
        assert_eq!(visitf(&b, &t0(0b000)), mv(&[0, 0]));
    }

    #[test]
    fn reset_and_max() {
        assert_eq!(reset(mv(&[1, 1])), mv(&[0, 0]));
        assert_eq!(reset(mv(&[1, 0])), mv(&[1, 0]));
        assert_eq!(reset(mv(&[0, 0])), mv(&[0, 0]));
        assert_eq!(vec_max(mv(&[1, 0]), mv(&[0, 1])), mv(&[1, 1]));
        assert_eq!(vec_max(mv(&[0, 0]), mv(&[0, 1])), mv(&[0, 1]));
        assert_eq!(vec_max(mv(&[1, 1]), mv(&[1, 1])), mv(&[1, 1]));
    }

    #[test]
    fn running_example_augmented_states() {
        let aug = augment(&fixture_gfa_gfb_gnc());
        assert_eq!(aug.automaton.state_names(), ["x0@00", "x0@10", "x0@01", "x1@00", "x1@10", "x1@01"]);
        let merged = merge_unaccepting(&aug);
        assert_eq!(merged.automaton.state_names(), ["x0@00", "x0@10", "x0@01", "x1@*"]);
        assert_eq!(merged.automaton.num_acceptance_sets(), 2);
    }

    #[test]
    fn running_example_b_from_10_resets_and_is_accepting_for_second_set() {
        let a = augment(&fixture_gfa_gfb_gnc()).automaton;
        let src = a.state_names().iter().position(|n| n == "x0@10").unwrap();
        let e = a.successors(src, Letter::Set(Valuation(0b010))).next().unwrap();
        let e = a.edge(e);
        assert_eq!(a.state_name(e.transition.dst), "x0@00");
        assert_eq!(e.marks, AccMarks::of(&[1]));
        // {a} again from 10 is no longer accepting.
        let e = a.edge(a.successors(src, Letter::Set(Valuation(0b001))).next().unwrap());
        assert!(e.marks.is_empty());
    }

    #[test]
    fn single_set_is_unchanged() {
        let b = fixture_fg_a();
        let aug = augment(&b);
        assert_eq!(aug.automaton.num_states(), b.num_states());
        assert_eq!(aug.automaton.edges(), b.edges());
        assert_eq!(merge_unaccepting(&aug).automaton.edges(), b.edges());
    }

    #[test]
    fn nothing_to_merge_when_all_states_live() {
        let b = fixture_gfa_gfb_gfc();
        let aug = augment(&b);
        assert_eq!(merge_unaccepting(&aug), aug);
    }

    #[test]
    fn limit_determinism_and_size_bound() {
        for f in fixtures() {
            let b = (f.build)();
            let aug = augment(&b);
            assert!(aug.automaton.num_states() <= b.num_states() << b.num_acceptance_sets());
            if check_limit_deterministic(&b).is_ok() {
                assert!(check_limit_deterministic(&aug.automaton).is_ok(), "{}", f.name);
                assert!(check_limit_deterministic(&augment_and_merge(&b).automaton).is_ok());
            }
        }
    }

    #[test]
    fn language_preserved_on_short_lassos() {
        let aps = props(&["a", "b", "c"]);
        let words = all_lasso_words(&aps, 1, 2);
        for f in fixtures() {
            let b = (f.build)();
            let aug = augment(&b);
            let merged = merge_unaccepting(&aug);
            for w in &words {
                let expected = accepts_lasso(&b, w);
                assert_eq!(accepts_lasso(&aug.automaton, w), expected, "{} {w:?}", f.name);
                assert_eq!(accepts_lasso(&merged.automaton, w), expected, "{} {w:?}", f.name);
            }
        }
    }

    fn vector(n: usize) -> impl Strategy<Value = MemoryVector> {
        (0u32..1 << n).prop_map(move |bits| MemoryVector { bits, len: n })
    }

    proptest! {
        #[test]
        fn update_clears_exactly_when_full((v, e) in (1usize..6).prop_flat_map(|n| (vector(n), vector(n)))) {
            let raised = vec_max(v, e);
            prop_assert_eq!(reset(raised) != raised, raised.is_all_ones());
            prop_assert_eq!(reset(raised).is_zero(), raised.is_all_ones() || raised.is_zero());
        }

        /// Along a random run of the augmented running-example automaton: memory only
        /// grows between clears, and bit `j` is set exactly when `F_j` was
        /// seen since the last clear.
        #[test]
        fn memory_tracks_visits(letters in proptest::collection::vec(0u32..4, 1..60)) {
            let b = fixture_gfa_gfb_gfc();
            let aug = augment(&b);
            let a = &aug.automaton;
            let mut q = a.initial();
            let mut seen = 0u32;
            let mut prev = MemoryVector::zeros(3);
            for bits in letters {
                let letter = Letter::Set(Valuation(bits));
                let base_marks = visitf(&b, &Transition { src: 0, letter, dst: 0 });
                let e = a.edge(a.successors(q, letter).next().unwrap());
                q = e.transition.dst;
                let v = aug.states[q].vector().unwrap();
                seen |= base_marks.bits();
                if seen == 0b111 {
                    seen = 0;
                    prop_assert!(v.is_zero());
                } else {
                    prop_assert_eq!(v.bits(), seen);
                    prop_assert_eq!(v.bits() & prev.bits(), prev.bits());
                }
                prev = v;
            }
        }
    }
}
