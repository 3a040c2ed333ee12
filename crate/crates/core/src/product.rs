//! Product of a labeled MDP with an automaton, the reward schemes used for
//! learning, and exact evaluation of positional policies.
//!
//! A product state pairs an MDP state with an automaton state. Ordinary
//! actions move both components, the automaton reading the label of the MDP
//! transition. Each ε-transition `x -> x'` of the automaton becomes an extra
//! action `eps_<x'>` that changes only the automaton component.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::augment::AugmentedAutomaton;
use crate::automata::{AccMarks, Letter, StateId as AutState, TGba, Valuation};
use crate::mdp::{
    self, decompose, induce_chain, ActionId, ActionRow, LabeledMdp, MdpError, Outcome, PositionalPolicy, StateId,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProductError {
    #[error("automaton proposition `{0}` is not an MDP proposition")]
    AlphabetMismatch(String),
    #[error("automaton has no move from {state} on {letter} (MDP transition {transition})")]
    MissingMove { state: String, letter: String, transition: String },
    #[error("automaton has {count} moves from {state} on {letter}")]
    NondeterministicMove { state: String, letter: String, count: usize },
    #[error(transparent)]
    Mdp(#[from] MdpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProductPair {
    pub mdp: StateId,
    pub aut: AutState,
}

/// The reachable product of an MDP and an automaton.
#[derive(Debug, Clone)]
pub struct ProductMdp {
    mdp: LabeledMdp,
    pairs: Vec<ProductPair>,
    index: BTreeMap<ProductPair, StateId>,
    automaton: TGba,
    base_actions: usize,
    /// Automaton target of each ε-action, in action-id order.
    eps_targets: Vec<AutState>,
    /// Automaton edge taken by each outcome: `[state][row][outcome]`.
    aut_edges: Vec<Vec<Vec<usize>>>,
}

impl ProductMdp {
    pub fn mdp(&self) -> &LabeledMdp {
        &self.mdp
    }

    pub fn automaton(&self) -> &TGba {
        &self.automaton
    }

    pub fn num_states(&self) -> usize {
        self.pairs.len()
    }

    pub fn pair(&self, s: StateId) -> ProductPair {
        self.pairs[s]
    }

    pub fn pairs(&self) -> &[ProductPair] {
        &self.pairs
    }

    pub fn state_of(&self, mdp: StateId, aut: AutState) -> Option<StateId> {
        self.index.get(&ProductPair { mdp, aut }).copied()
    }

    pub fn state_name(&self, s: StateId) -> &str {
        self.mdp.state_name(s)
    }

    pub fn initial(&self) -> StateId {
        self.mdp.initial()
    }

    pub fn num_base_actions(&self) -> usize {
        self.base_actions
    }

    pub fn is_epsilon_action(&self, a: ActionId) -> bool {
        a >= self.base_actions
    }

    pub fn epsilon_targets(&self) -> &[AutState] {
        &self.eps_targets
    }

    pub fn num_acceptance_sets(&self) -> usize {
        self.automaton.num_acceptance_sets()
    }

    /// Automaton edge id behind outcome `o` of row `row` at state `s`.
    pub fn automaton_edge(&self, s: StateId, row: usize, o: usize) -> usize {
        self.aut_edges[s][row][o]
    }

    /// Acceptance marks of outcome `o` of row `row` at state `s`.
    pub fn marks(&self, s: StateId, row: usize, o: usize) -> AccMarks {
        self.automaton.edge(self.aut_edges[s][row][o]).marks
    }

    /// Every product transition `(s, a, s')` with its marks.
    pub fn transitions(&self) -> impl Iterator<Item = (StateId, ActionId, StateId, AccMarks)> + '_ {
        (0..self.num_states()).flat_map(move |s| {
            self.mdp.enabled(s).iter().enumerate().flat_map(move |(r, row)| {
                row.outcomes.iter().enumerate().map(move |(o, out)| (s, row.action, out.next, self.marks(s, r, o)))
            })
        })
    }

    pub fn render_transition(&self, s: StateId, a: ActionId, next: StateId) -> String {
        format!("({}, {}, {})", self.state_name(s), self.mdp.action_name(a), self.state_name(next))
    }
}

/// Builds the product reachable from `(s_init, x_init)`.
///
/// Fails if the automaton has no move, or several moves, for a label that
/// the MDP produces, so probability mass is never dropped or duplicated.
pub fn build_product(m: &LabeledMdp, b: &TGba) -> Result<ProductMdp, ProductError> {
    let mut projection = Vec::with_capacity(b.aps().len());
    for p in b.aps() {
        let i = m.aps().iter().position(|q| q == p).ok_or_else(|| ProductError::AlphabetMismatch(p.to_string()))?;
        projection.push(i);
    }
    let project = |v: Valuation| {
        Valuation(projection.iter().enumerate().fold(0, |acc, (j, &i)| acc | u32::from(v.holds(i)) << j))
    };
    let eps_targets: Vec<AutState> = b
        .edges()
        .iter()
        .filter(|e| e.transition.letter.is_epsilon())
        .map(|e| e.transition.dst)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let base_actions = m.num_actions();
    let mut action_names = m.action_names().to_vec();
    action_names.extend(eps_targets.iter().map(|&x| format!("eps_{}", b.state_name(x))));

    let mut pairs = Vec::new();
    let mut index = BTreeMap::new();
    let mut queue = VecDeque::new();
    let mut intern = |p: ProductPair, pairs: &mut Vec<ProductPair>, queue: &mut VecDeque<ProductPair>| {
        *index.entry(p).or_insert_with(|| {
            pairs.push(p);
            queue.push_back(p);
            pairs.len() - 1
        })
    };
    intern(ProductPair { mdp: m.initial(), aut: b.initial() }, &mut pairs, &mut queue);
    let mut rows: Vec<Vec<ActionRow>> = Vec::new();
    let mut edges_of: Vec<BTreeMap<(ActionId, StateId), usize>> = Vec::new();
    while let Some(p) = queue.pop_front() {
        let mut state_rows = Vec::new();
        let mut state_edges = BTreeMap::new();
        for row in m.enabled(p.mdp) {
            let mut outcomes = Vec::new();
            for o in &row.outcomes {
                let letter = Letter::Set(project(o.label));
                let moves: Vec<usize> = b.successors(p.aut, letter).collect();
                let describe =
                    || format!("({}, {}, {})", m.state_name(p.mdp), m.action_name(row.action), m.state_name(o.next));
                let edge = match moves.as_slice() {
                    [e] => *e,
                    [] => {
                        return Err(ProductError::MissingMove {
                            state: b.state_name(p.aut).to_string(),
                            letter: letter.render(b.aps()),
                            transition: describe(),
                        })
                    }
                    _ => {
                        return Err(ProductError::NondeterministicMove {
                            state: b.state_name(p.aut).to_string(),
                            letter: letter.render(b.aps()),
                            count: moves.len(),
                        })
                    }
                };
                let next =
                    intern(ProductPair { mdp: o.next, aut: b.edge(edge).transition.dst }, &mut pairs, &mut queue);
                outcomes.push(Outcome { next, prob: o.prob, label: o.label });
                state_edges.insert((row.action, next), edge);
            }
            state_rows.push(ActionRow { action: row.action, outcomes });
        }
        for e in b.successors(p.aut, Letter::Epsilon) {
            let dst = b.edge(e).transition.dst;
            let k = eps_targets.binary_search(&dst).expect("ε target is listed");
            let next = intern(ProductPair { mdp: p.mdp, aut: dst }, &mut pairs, &mut queue);
            state_rows.push(ActionRow {
                action: base_actions + k,
                outcomes: vec![Outcome { next, prob: 1.0, label: Valuation::EMPTY }],
            });
            state_edges.insert((base_actions + k, next), e);
        }
        rows.push(state_rows);
        edges_of.push(state_edges);
    }

    let names = pairs.iter().map(|p| format!("({}|{})", m.state_name(p.mdp), b.state_name(p.aut))).collect();
    let product = LabeledMdp::new(names, action_names, m.aps().to_vec(), 0, rows)?;
    let aut_edges = (0..pairs.len())
        .map(|s| {
            product
                .enabled(s)
                .iter()
                .map(|row| row.outcomes.iter().map(|o| edges_of[s][&(row.action, o.next)]).collect())
                .collect()
        })
        .collect();
    Ok(ProductMdp { mdp: product, pairs, index, automaton: b.clone(), base_actions, eps_targets, aut_edges })
}

/// Reward of a product transition with marks `marks`: `r_p` if it belongs to
/// any acceptance set, else 0.
pub fn reward_accepting(marks: AccMarks, r_p: f64) -> f64 {
    if marks.is_empty() {
        0.0
    } else {
        r_p
    }
}

/// Accepting-frontier bookkeeping over the automaton's transitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontierState {
    /// Indexed by automaton edge id.
    remaining: Vec<bool>,
    count: usize,
}

impl FrontierState {
    /// Starts with every accepting transition of `b`.
    pub fn new(b: &TGba) -> FrontierState {
        let remaining: Vec<bool> = b.edges().iter().map(|e| !e.marks.is_empty()).collect();
        let count = remaining.iter().filter(|&&r| r).count();
        FrontierState { remaining, count }
    }

    pub fn contains(&self, edge: usize) -> bool {
        self.remaining[edge]
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Edge ids still in the frontier.
    pub fn remaining(&self) -> Vec<usize> {
        (0..self.remaining.len()).filter(|&e| self.remaining[e]).collect()
    }

    /// Whether every transition of acceptance set `set` has been removed.
    pub fn set_removed(&self, b: &TGba, set: usize) -> bool {
        b.edges().iter().enumerate().all(|(i, e)| !e.marks.contains(set) || !self.remaining[i])
    }

    /// Takes automaton edge `edge`. If it is still in the frontier, removes
    /// every acceptance set containing it and returns `true`; an emptied
    /// frontier starts over with all accepting transitions.
    pub fn step(&mut self, b: &TGba, edge: usize) -> bool {
        if !self.remaining[edge] {
            return false;
        }
        let hit = b.edge(edge).marks;
        for (i, e) in b.edges().iter().enumerate() {
            if self.remaining[i] && e.marks.0 & hit.0 != 0 {
                self.remaining[i] = false;
                self.count -= 1;
            }
        }
        if self.count == 0 {
            *self = FrontierState::new(b);
        }
        true
    }
}

/// Functional form of [`FrontierState::step`].
pub fn frontier_step(f: &FrontierState, b: &TGba, edge: usize) -> (FrontierState, bool) {
    let mut next = f.clone();
    let flag = next.step(b, edge);
    (next, flag)
}

/// How rewards are assigned during learning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RewardScheme {
    /// `r_p` on every accepting product transition.
    Accepting { r_p: f64 },
    /// `r_p` whenever the accepting frontier shrinks.
    Frontier { r_p: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub id: usize,
    pub states: Vec<String>,
    /// One character per acceptance set, `1` if the class contains one of
    /// its transitions.
    pub coverage: String,
    pub accepting: bool,
    /// For each acceptance set, a transition of the class lying in it.
    pub witnesses: Vec<Option<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyEvaluation {
    /// Chosen action per reachable product state.
    pub policy: BTreeMap<String, String>,
    pub transient_count: usize,
    pub classes: Vec<ClassReport>,
    pub sat_probability: f64,
    pub positively_satisfies: bool,
    pub residual: f64,
}

/// Union of the marks on transitions internal to `class` (local ids of the
/// chain induced by `pi`).
pub fn class_coverage(p: &ProductMdp, pi: &PositionalPolicy, chain: &mdp::MarkovChain, class: &[usize]) -> AccMarks {
    let members: BTreeSet<StateId> = class.iter().map(|&u| chain.states[u]).collect();
    let mut marks = AccMarks::NONE;
    for &s in &members {
        let a = pi.get(s).expect("chain states have choices");
        let r = p.mdp.enabled(s).iter().position(|row| row.action == a).expect("enabled");
        for (o, out) in p.mdp.enabled(s)[r].outcomes.iter().enumerate() {
            if members.contains(&out.next) {
                marks = marks.union(p.marks(s, r, o));
            }
        }
    }
    marks
}

/// Exact satisfaction analysis of a positional policy: the probability of
/// reaching a recurrent class whose internal transitions meet every
/// acceptance set.
pub fn evaluate_policy(p: &ProductMdp, pi: &PositionalPolicy) -> Result<PolicyEvaluation, MdpError> {
    let chain = induce_chain(&p.mdp, pi)?;
    let d = decompose(&chain);
    let n = p.num_acceptance_sets();
    let full = AccMarks::all(n);
    let mut classes = Vec::new();
    let mut target = Vec::new();
    for (id, class) in d.recurrent_classes.iter().enumerate() {
        let members: BTreeSet<StateId> = class.iter().map(|&u| chain.states[u]).collect();
        let mut witnesses: Vec<Option<String>> = vec![None; n];
        let mut coverage = AccMarks::NONE;
        for &s in &members {
            let a = pi.get(s).expect("chain states have choices");
            let r = p.mdp.enabled(s).iter().position(|row| row.action == a).expect("enabled");
            for (o, out) in p.mdp.enabled(s)[r].outcomes.iter().enumerate() {
                if !members.contains(&out.next) {
                    continue;
                }
                let marks = p.marks(s, r, o);
                coverage = coverage.union(marks);
                for j in marks.iter() {
                    witnesses[j].get_or_insert_with(|| p.render_transition(s, a, out.next));
                }
            }
        }
        let accepting = coverage == full;
        if accepting {
            target.extend(class.iter().copied());
        }
        classes.push(ClassReport {
            id,
            states: members.iter().map(|&s| p.state_name(s).to_string()).collect(),
            coverage: (0..n).map(|j| if coverage.contains(j) { '1' } else { '0' }).collect(),
            accepting,
            witnesses,
        });
    }
    let (sat_probability, residual) = if target.is_empty() {
        (0.0, 0.0)
    } else {
        let (x, residual) = mdp::reach_probability_with_residual(&chain, &target)?;
        (x[chain.initial], residual)
    };
    let policy = chain
        .states
        .iter()
        .map(|&s| (p.state_name(s).to_string(), p.mdp.action_name(pi.get(s).unwrap()).to_string()))
        .collect();
    Ok(PolicyEvaluation {
        policy,
        transient_count: d.transient.len(),
        classes,
        sat_probability,
        positively_satisfies: sat_probability > 0.0,
        residual,
    })
}

/// Evidence that no positional policy can visit two acceptance sets: both
/// sets are entered only from one product state, through disjoint actions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImpossibilityCertificate {
    pub state: String,
    /// 1-based acceptance set numbers.
    pub sets: (usize, usize),
    pub actions: (Vec<String>, Vec<String>),
}

pub fn check_positional_impossibility(p: &ProductMdp) -> Option<ImpossibilityCertificate> {
    let n = p.num_acceptance_sets();
    let mut sources: Vec<BTreeSet<StateId>> = vec![BTreeSet::new(); n];
    let mut actions: Vec<BTreeSet<ActionId>> = vec![BTreeSet::new(); n];
    for (s, a, _, marks) in p.transitions() {
        for j in marks.iter() {
            sources[j].insert(s);
            actions[j].insert(a);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let single = sources[i].len() == 1 && sources[i] == sources[j];
            if single && actions[i].is_disjoint(&actions[j]) {
                let s = *sources[i].iter().next().unwrap();
                let names = |set: &BTreeSet<ActionId>| set.iter().map(|&a| p.mdp.action_name(a).to_string()).collect();
                return Some(ImpossibilityCertificate {
                    state: p.state_name(s).to_string(),
                    sets: (i + 1, j + 1),
                    actions: (names(&actions[i]), names(&actions[j])),
                });
            }
        }
    }
    None
}

/// The corner cycle `s4 → s0 → s1 → s4 → s8 → s7 → s4` on the `grid9`
/// product with an augmented two-set automaton: at the corridor, head for
/// `s8` once the first set has been visited and for `s0` otherwise. States
/// off the cycle take their lowest enabled action.
pub fn grid9_cycle_policy(p: &ProductMdp, aug: &AugmentedAutomaton) -> PositionalPolicy {
    use crate::mdp::{grid_to, CORRIDOR, GRID_DOWN, GRID_LEFT, GRID_RIGHT, GRID_UP};
    let choice = (0..p.num_states())
        .map(|s| {
            let pair = p.pair(s);
            let first_done = aug.states[pair.aut].vector().is_some_and(|v| v.get(0) && !v.get(1));
            let a = match pair.mdp {
                CORRIDOR if first_done => grid_to(8),
                CORRIDOR => grid_to(0),
                7 => GRID_UP,
                0 => GRID_RIGHT,
                1 => GRID_DOWN,
                8 => GRID_LEFT,
                _ => p.mdp.enabled(s)[0].action,
            };
            Some(a)
        })
        .collect();
    PositionalPolicy::new(choice)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augment::{augment_and_merge, AugmentedState, Memory, MemoryVector};
    use crate::automata::{default_state_names, fixture_fg_a, fixture_gfa_gfb_gnc, Edge, Transition};
    use crate::ltl::props;
    use crate::mdp::{build_gridworld, grid_to, CORRIDOR, GRID_DOWN};

    fn aug_product() -> (ProductMdp, AugmentedAutomaton) {
        let aug = augment_and_merge(&fixture_gfa_gfb_gnc());
        (build_product(&build_gridworld(), &aug.automaton).unwrap(), aug)
    }

    fn state(p: &ProductMdp, name: &str) -> StateId {
        p.mdp().state_id(name).unwrap_or_else(|| panic!("no state {name}"))
    }

    #[test]
    fn augmented_grid_product_shape() {
        let (p, _) = aug_product();
        assert_eq!(p.state_name(p.initial()), "(s7|x0@00)");
        let s4 = state(&p, "(s4|x0@00)");
        let s0 = state(&p, "(s0|x0@10)");
        let to_s0 = grid_to(0);
        assert_eq!(p.mdp().prob(s4, to_s0, s0), 0.9);
        let r = p.mdp().enabled(s4).iter().position(|row| row.action == to_s0).unwrap();
        let o = p.mdp().enabled(s4)[r].outcomes.iter().position(|o| o.next == s0).unwrap();
        assert_eq!(p.marks(s4, r, o), AccMarks::of(&[0]));
        assert_eq!(reward_accepting(p.marks(s4, r, o), 2.0), 2.0);
        assert!(p.mdp().max_row_error() <= mdp::ROW_SUM_TOLERANCE);
    }

    #[test]
    fn reward_is_existential() {
        assert_eq!(reward_accepting(AccMarks::of(&[0, 1]), 2.0), 2.0);
        assert_eq!(reward_accepting(AccMarks::NONE, 2.0), 0.0);
    }

    #[test]
    fn trivial_automaton_gives_isomorphic_product() {
        let m = build_gridworld();
        let edges = (0..8)
            .map(|v| Edge {
                transition: Transition { src: 0, letter: Letter::Set(Valuation(v)), dst: 0 },
                marks: AccMarks::of(&[0]),
            })
            .collect();
        let b = TGba::new(props(&["a", "b", "c"]), default_state_names(1), 0, 1, edges).unwrap();
        let p = build_product(&m, &b).unwrap();
        assert_eq!(p.num_states(), m.num_states());
        for s in 0..p.num_states() {
            let base = p.pair(s).mdp;
            assert_eq!(p.mdp().enabled(s).len(), m.enabled(base).len());
            for (row, base_row) in p.mdp().enabled(s).iter().zip(m.enabled(base)) {
                let mapped: Vec<(StateId, f64)> = row.outcomes.iter().map(|o| (p.pair(o.next).mdp, o.prob)).collect();
                let expected: Vec<(StateId, f64)> = base_row.outcomes.iter().map(|o| (o.next, o.prob)).collect();
                let mut mapped = mapped;
                mapped.sort_by_key(|x| x.0);
                assert_eq!(mapped, expected);
            }
        }
    }

    #[test]
    fn epsilon_edges_become_actions() {
        let m = build_gridworld();
        let p = build_product(&m, &fixture_fg_a()).unwrap();
        assert_eq!(p.epsilon_targets(), [1]);
        let eps = p.num_base_actions();
        assert_eq!(p.mdp().action_name(eps), "eps_x1");
        for s in 0..p.num_states() {
            let pair = p.pair(s);
            let row = p.mdp().row(s, eps);
            assert_eq!(row.is_some(), pair.aut == 0, "{}", p.state_name(s));
            if let Some(row) = row {
                assert_eq!(row.outcomes.len(), 1);
                assert_eq!(row.outcomes[0].prob, 1.0);
                assert_eq!(p.pair(row.outcomes[0].next), ProductPair { mdp: pair.mdp, aut: 1 });
            }
        }
    }

    #[test]
    fn missing_move_is_an_error() {
        // Only `a` has a move, but the grid mostly produces the empty label.
        let edges = vec![Edge {
            transition: Transition { src: 0, letter: Letter::Set(Valuation(1)), dst: 0 },
            marks: AccMarks::of(&[0]),
        }];
        let b = TGba::new(props(&["a"]), default_state_names(1), 0, 1, edges).unwrap();
        let err = build_product(&build_gridworld(), &b).unwrap_err();
        assert!(matches!(err, ProductError::MissingMove { .. }));
    }

    #[test]
    fn alphabet_mismatch_is_an_error() {
        let b = TGba::new(props(&["z"]), default_state_names(1), 0, 1, vec![]).unwrap();
        assert_eq!(build_product(&build_gridworld(), &b).unwrap_err(), ProductError::AlphabetMismatch("z".into()));
    }

    #[test]
    fn frontier_examples() {
        let b = fixture_gfa_gfb_gnc();
        let edge = |bits| b.find_edge(&Transition { src: 0, letter: Letter::Set(Valuation(bits)), dst: 0 }).unwrap();
        let f = FrontierState::new(&b);
        assert_eq!(f.len(), 3);
        let (f, flag) = frontier_step(&f, &b, edge(0b001));
        assert!(flag);
        assert_eq!(f.remaining(), vec![edge(0b010)]);
        let (g, flag) = frontier_step(&f, &b, edge(0b001));
        assert!(!flag);
        assert_eq!(g, f);
        let (f, flag) = frontier_step(&f, &b, edge(0b010));
        assert!(flag);
        assert_eq!(f, FrontierState::new(&b));
    }

    #[test]
    fn cycle_policy_satisfies() {
        let (p, aug) = aug_product();
        let pi = grid9_cycle_policy(&p, &aug);
        let eval = evaluate_policy(&p, &pi).unwrap();
        assert!((eval.sat_probability - 1.0).abs() < 1e-12, "{eval:?}");
        assert!(eval.residual < 1e-10);
        let accepting: Vec<&ClassReport> = eval.classes.iter().filter(|c| c.accepting).collect();
        assert_eq!(accepting.len(), 1);
        assert!(accepting[0].witnesses.iter().all(Option::is_some));
        let rooms: BTreeSet<&str> = accepting[0].states.iter().map(|s| s[1..].split('|').next().unwrap()).collect();
        assert_eq!(rooms, BTreeSet::from(["s0", "s1", "s4", "s7", "s8"]));
    }

    #[test]
    fn parking_policy_never_satisfies() {
        let (p, _) = aug_product();
        // Shuttles between s7 and the corridor, never labeled.
        let choice =
            (0..p.num_states()).map(|s| if p.pair(s).mdp == CORRIDOR { grid_to(7) } else { GRID_DOWN }).collect();
        let eval = evaluate_policy(&p, &PositionalPolicy::total(choice)).unwrap();
        assert_eq!(eval.sat_probability, 0.0);
        assert!(!eval.positively_satisfies);
        assert_eq!(eval.classes.len(), 1);
        assert_eq!(eval.classes[0].coverage, "00");
    }

    #[test]
    fn impossibility_certificates() {
        let m = build_gridworld();
        let plain = build_product(&m, &fixture_gfa_gfb_gnc()).unwrap();
        let cert = check_positional_impossibility(&plain).unwrap();
        assert_eq!(cert.state, "(s4|x0)");
        assert_eq!(cert.actions, (vec!["to_s0".to_string()], vec!["to_s8".to_string()]));
        let (p, _) = aug_product();
        assert_eq!(check_positional_impossibility(&p), None);
        assert_eq!(check_positional_impossibility(&build_product(&m, &fixture_fg_a()).unwrap()), None);
    }

    #[test]
    fn augmented_state_lookup() {
        let (p, aug) = aug_product();
        let x = aug
            .states
            .iter()
            .position(|s| *s == AugmentedState { base: 0, memory: Memory::Vector(MemoryVector::from_slice(&[1, 0])) });
        assert!(p.state_of(0, x.unwrap()).is_some());
    }
}
