//! Labeled MDPs, positional policies and the Markov chains they induce.
//!
//! Labels sit on transitions `(s, a, s')`, not on states. Every row of an
//! MDP or chain is checked to be a probability distribution on construction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::automata::Valuation;
use crate::graph;
use crate::ltl::{self, AtomicProposition};

pub type StateId = usize;
pub type ActionId = usize;

/// Tolerance for row sums of stochastic matrices.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;
/// Largest admissible residual of a reachability solve.
pub const SOLVE_RESIDUAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MdpError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("policy has no choice for reachable state {0}")]
    UndefinedChoice(String),
    #[error("policy chooses action {action} which is not enabled in state {state}")]
    DisabledChoice { state: String, action: String },
    #[error("reachability target is empty")]
    EmptyTarget,
    #[error("reachability system could not be solved (residual {0:e})")]
    Singular(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub next: StateId,
    pub prob: f64,
    pub label: Valuation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionRow {
    pub action: ActionId,
    pub outcomes: Vec<Outcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMdp {
    state_names: Vec<String>,
    action_names: Vec<String>,
    aps: Vec<AtomicProposition>,
    initial: StateId,
    /// Enabled actions of each state, sorted by action id.
    rows: Vec<Vec<ActionRow>>,
}

impl LabeledMdp {
    pub fn new(
        state_names: Vec<String>,
        action_names: Vec<String>,
        aps: Vec<AtomicProposition>,
        initial: StateId,
        mut rows: Vec<Vec<ActionRow>>,
    ) -> Result<LabeledMdp, MdpError> {
        let invalid = |m: String| Err(MdpError::Invalid(m));
        let n = state_names.len();
        if n == 0 {
            return invalid("no states".into());
        }
        if rows.len() != n {
            return invalid(format!("{} states but {} rows", n, rows.len()));
        }
        if initial >= n {
            return invalid(format!("initial state {initial} out of range"));
        }
        if aps.len() > crate::automata::MAX_APS {
            return invalid("too many atomic propositions".into());
        }
        for (s, actions) in rows.iter_mut().enumerate() {
            if actions.is_empty() {
                return invalid(format!("state {} has no enabled action", state_names[s]));
            }
            actions.sort_by_key(|r| r.action);
            for pair in actions.windows(2) {
                if pair[0].action == pair[1].action {
                    return invalid(format!("state {} lists an action twice", state_names[s]));
                }
            }
            for row in actions.iter_mut() {
                if row.action >= action_names.len() {
                    return invalid(format!("action id {} out of range", row.action));
                }
                let mut sum = 0.0;
                let mut seen = BTreeSet::new();
                for o in &row.outcomes {
                    if o.next >= n {
                        return invalid(format!("successor {} out of range", o.next));
                    }
                    if !(o.prob > 0.0 && o.prob <= 1.0) {
                        return invalid(format!("probability {} not in (0, 1]", o.prob));
                    }
                    if o.label.0 >> aps.len() != 0 {
                        return invalid("label uses an undeclared proposition".into());
                    }
                    if !seen.insert(o.next) {
                        return invalid(format!(
                            "successor {} listed twice for ({}, {})",
                            state_names[o.next], state_names[s], action_names[row.action]
                        ));
                    }
                    sum += o.prob;
                }
                if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                    return invalid(format!("row ({}, {}) sums to {sum}", state_names[s], action_names[row.action]));
                }
                row.outcomes.sort_by_key(|o| o.next);
            }
        }
        Ok(LabeledMdp { state_names, action_names, aps, initial, rows })
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_actions(&self) -> usize {
        self.action_names.len()
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.state_names[s]
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.action_names[a]
    }

    pub fn action_names(&self) -> &[String] {
        &self.action_names
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.state_names.iter().position(|n| n == name)
    }

    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.action_names.iter().position(|n| n == name)
    }

    pub fn aps(&self) -> &[AtomicProposition] {
        &self.aps
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    /// Rows of the enabled actions of `s`, sorted by action id.
    pub fn enabled(&self, s: StateId) -> &[ActionRow] {
        &self.rows[s]
    }

    pub fn row(&self, s: StateId, a: ActionId) -> Option<&ActionRow> {
        self.rows[s].binary_search_by_key(&a, |r| r.action).ok().map(|i| &self.rows[s][i])
    }

    pub fn prob(&self, s: StateId, a: ActionId, next: StateId) -> f64 {
        self.row(s, a).and_then(|r| r.outcomes.iter().find(|o| o.next == next)).map_or(0.0, |o| o.prob)
    }

    pub fn label(&self, s: StateId, a: ActionId, next: StateId) -> Option<Valuation> {
        self.row(s, a)?.outcomes.iter().find(|o| o.next == next).map(|o| o.label)
    }

    /// Largest deviation of any row sum from 1.
    pub fn max_row_error(&self) -> f64 {
        self.rows
            .iter()
            .flatten()
            .map(|r| (r.outcomes.iter().map(|o| o.prob).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let aps: Vec<&str> = self.aps.iter().map(|p| p.as_str()).collect();
        writeln!(s, "ap: {}", aps.join(" ")).unwrap();
        writeln!(s, "states: {}", self.state_names.join(" ")).unwrap();
        writeln!(s, "actions: {}", self.action_names.join(" ")).unwrap();
        writeln!(s, "initial: {}", self.state_names[self.initial]).unwrap();
        for (st, rows) in self.rows.iter().enumerate() {
            for row in rows {
                for o in &row.outcomes {
                    let (from, act, to) =
                        (&self.state_names[st], &self.action_names[row.action], &self.state_names[o.next]);
                    writeln!(s, "prob {from} {act} {to} {}", o.prob).unwrap();
                    if o.label != Valuation::EMPTY {
                        writeln!(s, "label {from} {act} {to} {}", o.label.render(&self.aps)).unwrap();
                    }
                }
            }
        }
        s.replace("ap: \n", "ap:\n")
    }
}

/// Parses the line-oriented MDP format:
///
/// ```text
/// ap: a b
/// states: s0 s1
/// actions: go stay
/// initial: s0
/// prob s0 go s1 0.9
/// prob s0 go s0 0.1
/// label s0 go s1 {a}
/// prob s1 stay s1 1
/// ```
///
/// Triples without a `label` line carry the empty label.
pub fn parse_mdp(text: &str) -> Result<LabeledMdp, MdpError> {
    let mut aps: Option<Vec<AtomicProposition>> = None;
    let mut states: Option<Vec<String>> = None;
    let mut actions: Option<Vec<String>> = None;
    let mut initial: Option<String> = None;
    let mut probs: BTreeMap<(usize, usize), Vec<Outcome>> = BTreeMap::new();
    let mut labels: Vec<(usize, (usize, usize, usize), Valuation)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let code = raw.split_once('#').map_or(raw, |(c, _)| c).trim();
        if code.is_empty() {
            continue;
        }
        let syntax = |message: String| MdpError::Syntax { line, message };
        if let Some((key, value)) = code.split_once(':') {
            let names: Vec<String> = value.split_whitespace().map(str::to_string).collect();
            match key.trim() {
                "ap" => {
                    let list = names
                        .iter()
                        .map(|n| AtomicProposition::new(n.as_str()))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| syntax(e.to_string()))?;
                    aps = Some(list);
                }
                "states" => states = Some(names),
                "actions" => actions = Some(names),
                "initial" => initial = names.into_iter().next(),
                other => return Err(syntax(format!("unknown header `{other}`"))),
            }
            continue;
        }
        let (Some(aps), Some(states), Some(actions)) = (&aps, &states, &actions) else {
            return Err(syntax("`ap`, `states` and `actions` must precede transitions".into()));
        };
        let tokens: Vec<&str> = code.split_whitespace().collect();
        if tokens.len() < 5 {
            return Err(syntax("expected `prob s a s' p` or `label s a s' {..}`".into()));
        }
        let lookup = |names: &[String], tok: &str, what: &str| {
            names.iter().position(|n| n == tok).ok_or_else(|| syntax(format!("unknown {what} `{tok}`")))
        };
        let s = lookup(states, tokens[1], "state")?;
        let a = lookup(actions, tokens[2], "action")?;
        let next = lookup(states, tokens[3], "state")?;
        match tokens[0] {
            "prob" => {
                let p: f64 = tokens[4].parse().map_err(|_| syntax(format!("bad probability `{}`", tokens[4])))?;
                probs.entry((s, a)).or_default().push(Outcome { next, prob: p, label: Valuation::EMPTY });
            }
            "label" => {
                let set = tokens[4..].join("");
                let inner = set
                    .strip_prefix('{')
                    .and_then(|x| x.strip_suffix('}'))
                    .ok_or_else(|| syntax(format!("bad label `{set}`")))?;
                let mut v = 0u32;
                for name in inner.split(',').map(str::trim).filter(|n| !n.is_empty()) {
                    let i = aps
                        .iter()
                        .position(|p| p.as_str() == name)
                        .ok_or_else(|| syntax(format!("unknown atomic proposition `{name}`")))?;
                    v |= 1 << i;
                }
                labels.push((line, (s, a, next), Valuation(v)));
            }
            other => return Err(syntax(format!("unknown directive `{other}`"))),
        }
    }
    let missing = |h: &str| MdpError::Syntax { line: 0, message: format!("missing `{h}` header") };
    let aps = aps.ok_or_else(|| missing("ap"))?;
    let states = states.ok_or_else(|| missing("states"))?;
    let actions = actions.ok_or_else(|| missing("actions"))?;
    let initial = initial.ok_or_else(|| missing("initial"))?;
    let initial = states
        .iter()
        .position(|n| *n == initial)
        .ok_or_else(|| MdpError::Invalid(format!("unknown initial state `{initial}`")))?;
    for (line, (s, a, next), v) in labels {
        let outcome = probs
            .get_mut(&(s, a))
            .and_then(|os| os.iter_mut().find(|o| o.next == next))
            .ok_or_else(|| MdpError::Syntax { line, message: "label on a transition without probability".into() })?;
        outcome.label = v;
    }
    let mut rows = vec![Vec::new(); states.len()];
    for ((s, a), outcomes) in probs {
        rows[s].push(ActionRow { action: a, outcomes });
    }
    LabeledMdp::new(states, actions, aps, initial, rows)
}

pub const GRID_RIGHT: ActionId = 0;
pub const GRID_LEFT: ActionId = 1;
pub const GRID_UP: ActionId = 2;
pub const GRID_DOWN: ActionId = 3;
/// The corridor in the middle of the grid.
pub const CORRIDOR: StateId = 4;

/// Action id of `to_sK` in [`build_gridworld`].
pub fn grid_to(room: StateId) -> ActionId {
    assert!(room < 9 && room != CORRIDOR, "no action leads to s{room}");
    if room < CORRIDOR {
        4 + room
    } else {
        3 + room
    }
}

/// Eight rooms around one corridor on a 3×3 grid, numbered row-major
/// (`s0` top left, `s4` the corridor, `s8` bottom right), starting in `s7`.
///
/// Rooms move in the intended direction with probability 0.9 and in the
/// opposite one with 0.1; moves off the grid stay put. From the corridor,
/// `to_sK` reaches room `K` with 0.9 and stays with 0.1. Entering `s2`,
/// `s3`, `s5` or `s6` is labeled `c`; `(s4, to_s0, s0)` is labeled `a` and
/// `(s4, to_s8, s8)` is labeled `b`.
pub fn build_gridworld() -> LabeledMdp {
    let aps = ltl::props(&["a", "b", "c"]);
    let (a, b, c) = (Valuation(1), Valuation(2), Valuation(4));
    let mut action_names: Vec<String> = ["Right", "Left", "Up", "Down"].map(String::from).to_vec();
    action_names.extend((0..9).filter(|&k| k != CORRIDOR).map(|k| format!("to_s{k}")));
    let label = |s: StateId, act: ActionId, next: StateId| {
        if s == CORRIDOR && act == grid_to(0) && next == 0 {
            a
        } else if s == CORRIDOR && act == grid_to(8) && next == 8 {
            b
        } else if [2, 3, 5, 6].contains(&next) {
            c
        } else {
            Valuation::EMPTY
        }
    };
    let step = |s: StateId, (dr, dc): (i32, i32)| -> StateId {
        let (r, col) = ((s / 3) as i32 + dr, (s % 3) as i32 + dc);
        if (0..3).contains(&r) && (0..3).contains(&col) {
            (r * 3 + col) as StateId
        } else {
            s
        }
    };
    let directions = [(GRID_RIGHT, (0, 1)), (GRID_LEFT, (0, -1)), (GRID_UP, (-1, 0)), (GRID_DOWN, (1, 0))];
    let mut rows = Vec::new();
    for s in 0..9 {
        let mut actions = Vec::new();
        let moves: Vec<(ActionId, StateId, StateId)> = if s == CORRIDOR {
            (0..9).filter(|&k| k != CORRIDOR).map(|k| (grid_to(k), k, s)).collect()
        } else {
            directions.iter().map(|&(act, (dr, dc))| (act, step(s, (dr, dc)), step(s, (-dr, -dc)))).collect()
        };
        for (act, intended, slip) in moves {
            let mut dist: BTreeMap<StateId, f64> = BTreeMap::new();
            *dist.entry(intended).or_default() += 0.9;
            *dist.entry(slip).or_default() += 0.1;
            let outcomes =
                dist.into_iter().map(|(next, prob)| Outcome { next, prob, label: label(s, act, next) }).collect();
            actions.push(ActionRow { action: act, outcomes });
        }
        rows.push(actions);
    }
    let names = (0..9).map(|s| format!("s{s}")).collect();
    LabeledMdp::new(names, action_names, aps, 7, rows).expect("grid world is well formed")
}

/// A deterministic stationary policy; `None` leaves a state unconstrained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionalPolicy {
    pub choice: Vec<Option<ActionId>>,
}

impl PositionalPolicy {
    pub fn new(choice: Vec<Option<ActionId>>) -> PositionalPolicy {
        PositionalPolicy { choice }
    }

    pub fn total(choice: Vec<ActionId>) -> PositionalPolicy {
        PositionalPolicy { choice: choice.into_iter().map(Some).collect() }
    }

    pub fn get(&self, s: StateId) -> Option<ActionId> {
        self.choice.get(s).copied().flatten()
    }
}

/// A finite Markov chain over local ids `0..n`, each standing for a state of
/// some model.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    /// Model state of each local id.
    pub states: Vec<StateId>,
    /// Sparse rows `(local successor, probability)`, sorted by successor.
    pub rows: Vec<Vec<(usize, f64)>>,
    pub initial: usize,
}

impl MarkovChain {
    /// A chain whose local ids are its state ids.
    pub fn new(rows: Vec<Vec<(usize, f64)>>, initial: usize) -> Result<MarkovChain, MdpError> {
        let n = rows.len();
        if initial >= n {
            return Err(MdpError::Invalid("initial state out of range".into()));
        }
        let mut rows = rows;
        for (s, row) in rows.iter_mut().enumerate() {
            row.sort_by_key(|&(t, _)| t);
            if row.iter().any(|&(t, p)| t >= n || !(p > 0.0 && p <= 1.0)) {
                return Err(MdpError::Invalid(format!("row {s} has an invalid entry")));
            }
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(MdpError::Invalid(format!("row {s} lists a successor twice")));
            }
            let sum: f64 = row.iter().map(|&(_, p)| p).sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(MdpError::Invalid(format!("row {s} sums to {sum}")));
            }
        }
        Ok(MarkovChain { states: (0..n).collect(), rows, initial })
    }

    pub fn num_states(&self) -> usize {
        self.rows.len()
    }

    pub fn local_id(&self, state: StateId) -> Option<usize> {
        self.states.iter().position(|&s| s == state)
    }

    pub fn successors(&self) -> Vec<Vec<usize>> {
        self.rows.iter().map(|r| r.iter().map(|&(t, _)| t).collect()).collect()
    }

    pub fn max_row_error(&self) -> f64 {
        self.rows.iter().map(|r| (r.iter().map(|&(_, p)| p).sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// The chain of `m` under `pi`, restricted to states reachable from the
/// initial state. Local id 0 is the initial state; the rest follow in
/// breadth-first order.
pub fn induce_chain(m: &LabeledMdp, pi: &PositionalPolicy) -> Result<MarkovChain, MdpError> {
    let mut local = vec![usize::MAX; m.num_states()];
    let mut states = vec![m.initial()];
    local[m.initial()] = 0;
    let mut rows = Vec::new();
    let mut cursor = 0;
    while cursor < states.len() {
        let s = states[cursor];
        let a = pi.get(s).ok_or_else(|| MdpError::UndefinedChoice(m.state_name(s).to_string()))?;
        let row = m.row(s, a).ok_or_else(|| MdpError::DisabledChoice {
            state: m.state_name(s).to_string(),
            action: m.action_names.get(a).cloned().unwrap_or_else(|| a.to_string()),
        })?;
        let mut out = Vec::with_capacity(row.outcomes.len());
        for o in &row.outcomes {
            if local[o.next] == usize::MAX {
                local[o.next] = states.len();
                states.push(o.next);
            }
            out.push((local[o.next], o.prob));
        }
        out.sort_by_key(|&(t, _)| t);
        rows.push(out);
        cursor += 1;
    }
    Ok(MarkovChain { states, rows, initial: 0 })
}

/// Transient states and recurrent classes, in local ids of the chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecurrenceDecomposition {
    pub transient: Vec<usize>,
    /// Bottom strongly connected components, each sorted, ordered by their
    /// smallest member.
    pub recurrent_classes: Vec<Vec<usize>>,
}

pub fn decompose(mc: &MarkovChain) -> RecurrenceDecomposition {
    let succ = mc.successors();
    let components = graph::strongly_connected_components(&succ);
    let mut component_of = vec![0; mc.num_states()];
    for (c, comp) in components.iter().enumerate() {
        for &v in comp {
            component_of[v] = c;
        }
    }
    let mut transient = Vec::new();
    let mut classes = Vec::new();
    for (c, comp) in components.into_iter().enumerate() {
        let closed = comp.iter().all(|&u| succ[u].iter().all(|&v| component_of[v] == c));
        if closed {
            classes.push(comp);
        } else {
            transient.extend(comp);
        }
    }
    transient.sort_unstable();
    classes.sort();
    RecurrenceDecomposition { transient, recurrent_classes: classes }
}

/// Probability of eventually reaching `target` (local ids) from each state.
///
/// States that cannot reach the target get 0, target states get 1, and the
/// rest solve `(I - A) x = b` by LU decomposition, which is nonsingular once
/// the zero states are removed.
pub fn reach_probability(mc: &MarkovChain, target: &[usize]) -> Result<Vec<f64>, MdpError> {
    reach_probability_with_residual(mc, target).map(|(x, _)| x)
}

/// [`reach_probability`] together with the max-norm residual of the solve.
pub fn reach_probability_with_residual(mc: &MarkovChain, target: &[usize]) -> Result<(Vec<f64>, f64), MdpError> {
    if target.is_empty() {
        return Err(MdpError::EmptyTarget);
    }
    let n = mc.num_states();
    let mut is_target = vec![false; n];
    for &t in target {
        is_target[t] = true;
    }
    let positive = graph::can_reach(&mc.successors(), target.iter().copied());
    let mut result: Vec<f64> = (0..n).map(|s| if is_target[s] { 1.0 } else { 0.0 }).collect();
    let unknown: Vec<usize> = (0..n).filter(|&s| positive[s] && !is_target[s]).collect();
    if unknown.is_empty() {
        return Ok((result, 0.0));
    }
    let mut index = vec![usize::MAX; n];
    for (i, &s) in unknown.iter().enumerate() {
        index[s] = i;
    }
    let k = unknown.len();
    let mut a = DMatrix::<f64>::identity(k, k);
    let mut b = DVector::<f64>::zeros(k);
    for (i, &s) in unknown.iter().enumerate() {
        for &(t, p) in &mc.rows[s] {
            if is_target[t] {
                b[i] += p;
            } else if index[t] != usize::MAX {
                a[(i, index[t])] -= p;
            }
        }
    }
    let x = a.clone().lu().solve(&b).ok_or(MdpError::Singular(f64::INFINITY))?;
    let residual = (&a * &x - &b).amax();
    if residual.is_nan() || residual >= SOLVE_RESIDUAL_TOLERANCE {
        return Err(MdpError::Singular(residual));
    }
    for (i, &s) in unknown.iter().enumerate() {
        result[s] = x[i];
    }
    Ok((result, residual))
}
