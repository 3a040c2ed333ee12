//! Transition-based generalized Büchi automata (tGBA), including
//! limit-deterministic ones with ε-transitions.
//!
//! Letters are stored explicitly: one transition per valuation of the
//! automaton's propositions, so a guard such as `!c` is expanded into every
//! letter it covers. Acceptance sets are kept as per-transition marks.
//!
//! # Text format
//!
//! ```text
//! # comment
//! ap: a b c
//! states: 2
//! initial: 0
//! acceptance-sets: 2
//! state: 1 trap              # optional display name, default `x<i>`
//! 0 a & !b & !c 0 [acc: 1]   # src <guard> dst [acc: j,k]   (sets are 1-based)
//! 0 eps 1                    # ε-transition
//! ```

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::ops::Range;

use thiserror::Error;

use crate::graph;
use crate::ltl::{self, ApSet, AtomicProposition, LassoWord, Ltl};

pub type StateId = usize;

/// Upper bound on the number of propositions an automaton or MDP may use.
pub const MAX_APS: usize = 16;
/// Upper bound on the number of acceptance sets.
pub const MAX_ACCEPTANCE_SETS: usize = 16;

/// A set of propositions as a bitmask; bit `i` refers to the `i`-th entry of
/// the owning proposition list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Valuation(pub u32);

impl Valuation {
    pub const EMPTY: Valuation = Valuation(0);

    pub fn holds(self, index: usize) -> bool {
        self.0 >> index & 1 == 1
    }

    /// Projects a proposition set onto `aps`; unknown names are dropped.
    pub fn from_set(aps: &[AtomicProposition], set: &ApSet) -> Valuation {
        let mut bits = 0;
        for (i, p) in aps.iter().enumerate() {
            if set.contains(p) {
                bits |= 1 << i;
            }
        }
        Valuation(bits)
    }

    pub fn to_set(self, aps: &[AtomicProposition]) -> ApSet {
        aps.iter().enumerate().filter(|(i, _)| self.holds(*i)).map(|(_, p)| p.clone()).collect()
    }

    /// `{a,b}` style rendering.
    pub fn render(self, aps: &[AtomicProposition]) -> String {
        let names: Vec<&str> =
            aps.iter().enumerate().filter(|(i, _)| self.holds(*i)).map(|(_, p)| p.as_str()).collect();
        format!("{{{}}}", names.join(","))
    }
}

/// An input symbol: a letter of `2^AP` or ε.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    Set(Valuation),
    Epsilon,
}

impl Letter {
    pub fn is_epsilon(self) -> bool {
        self == Letter::Epsilon
    }

    pub fn render(self, aps: &[AtomicProposition]) -> String {
        match self {
            Letter::Set(v) => v.render(aps),
            Letter::Epsilon => "eps".to_string(),
        }
    }
}

/// Membership of a transition in the acceptance sets; bit `j` stands for the
/// set numbered `j + 1` in the text format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct AccMarks(pub u32);

impl AccMarks {
    pub const NONE: AccMarks = AccMarks(0);

    pub fn of(sets: &[usize]) -> AccMarks {
        AccMarks(sets.iter().fold(0, |acc, j| acc | 1 << j))
    }

    pub fn all(n: usize) -> AccMarks {
        AccMarks(((1u64 << n) - 1) as u32)
    }

    pub fn contains(self, set: usize) -> bool {
        self.0 >> set & 1 == 1
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: AccMarks) -> AccMarks {
        AccMarks(self.0 | other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |j| self.contains(*j))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub src: StateId,
    pub letter: Letter,
    pub dst: StateId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub transition: Transition,
    pub marks: AccMarks,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LdViolation {
    #[error("accepting transition {transition} leaves the final part")]
    AcceptingOutsideFinal { transition: String },
    #[error(
        "state {state} has {count} successors on letter {letter} inside the final part \
         (per-letter determinism fails)"
    )]
    NondeterministicInFinal { state: String, letter: String, count: usize },
    #[error("transition {transition} goes from the final part back to the initial part")]
    FinalToInitial { transition: String },
    #[error("ε-transition {transition} does not go from the initial to the final part")]
    EpsilonNotInitialToFinal { transition: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: undeclared state {state}")]
    UndeclaredState { line: usize, state: String },
    #[error("line {line}: unknown atomic proposition `{name}`")]
    UnknownAp { line: usize, name: String },
    #[error("line {line}: acceptance index {index} out of range 1..={sets}")]
    AcceptanceIndexOutOfRange { line: usize, index: usize, sets: usize },
    #[error("duplicate transition {0}")]
    DuplicateTransition(String),
    #[error("invalid automaton: {0}")]
    Invalid(String),
    #[error("not limit-deterministic: {0}")]
    NotLimitDeterministic(LdViolation),
}

/// A transition-based generalized Büchi automaton with explicit letters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TGba {
    aps: Vec<AtomicProposition>,
    state_names: Vec<String>,
    initial: StateId,
    num_sets: usize,
    /// Sorted by transition; edges leaving state `q` are `out[q]..out[q + 1]`.
    edges: Vec<Edge>,
    out: Vec<usize>,
}

impl TGba {
    pub fn new(
        aps: Vec<AtomicProposition>,
        state_names: Vec<String>,
        initial: StateId,
        num_sets: usize,
        mut edges: Vec<Edge>,
    ) -> Result<TGba, AutomatonError> {
        let invalid = |m: String| Err(AutomatonError::Invalid(m));
        if aps.len() > MAX_APS {
            return invalid(format!("{} propositions exceed the limit of {MAX_APS}", aps.len()));
        }
        if aps.iter().collect::<BTreeSet<_>>().len() != aps.len() {
            return invalid("duplicate atomic proposition".into());
        }
        if state_names.is_empty() {
            return invalid("no states".into());
        }
        if initial >= state_names.len() {
            return invalid(format!("initial state {initial} out of range"));
        }
        if num_sets == 0 || num_sets > MAX_ACCEPTANCE_SETS {
            return invalid(format!("number of acceptance sets must be in 1..={MAX_ACCEPTANCE_SETS}"));
        }
        let letters = 1u32 << aps.len();
        for e in &edges {
            let t = e.transition;
            if t.src >= state_names.len() || t.dst >= state_names.len() {
                return invalid(format!("transition {t:?} refers to a missing state"));
            }
            if let Letter::Set(v) = t.letter {
                if v.0 >= letters {
                    return invalid(format!("letter {:#b} outside the alphabet", v.0));
                }
            }
            if e.marks.0 >> num_sets != 0 {
                return invalid(format!("transition {t:?} marked with a missing acceptance set"));
            }
        }
        edges.sort_by_key(|e| e.transition);
        for pair in edges.windows(2) {
            if pair[0].transition == pair[1].transition {
                let t = pair[0].transition;
                let name = render_transition(&aps, &state_names, &t);
                return Err(AutomatonError::DuplicateTransition(name));
            }
        }
        let mut out = vec![0; state_names.len() + 1];
        for e in &edges {
            out[e.transition.src + 1] += 1;
        }
        for q in 0..state_names.len() {
            out[q + 1] += out[q];
        }
        Ok(TGba { aps, state_names, initial, num_sets, edges, out })
    }

    pub fn aps(&self) -> &[AtomicProposition] {
        &self.aps
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.state_names[q]
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn num_acceptance_sets(&self) -> usize {
        self.num_sets
    }

    pub fn full_marks(&self) -> AccMarks {
        AccMarks::all(self.num_sets)
    }

    pub fn num_letters(&self) -> u32 {
        1 << self.aps.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    pub fn out_edge_ids(&self, q: StateId) -> Range<usize> {
        self.out[q]..self.out[q + 1]
    }

    pub fn out_edges(&self, q: StateId) -> &[Edge] {
        &self.edges[self.out_edge_ids(q)]
    }

    /// Edge ids leaving `q` on `letter`.
    pub fn successors(&self, q: StateId, letter: Letter) -> impl Iterator<Item = usize> + '_ {
        self.out_edge_ids(q).filter(move |&i| self.edges[i].transition.letter == letter)
    }

    pub fn find_edge(&self, t: &Transition) -> Option<usize> {
        self.edges.binary_search_by_key(t, |e| e.transition).ok()
    }

    /// The transitions of acceptance set `set` (0-based).
    pub fn accepting_set(&self, set: usize) -> Vec<Transition> {
        self.edges.iter().filter(|e| e.marks.contains(set)).map(|e| e.transition).collect()
    }

    pub fn has_epsilon(&self) -> bool {
        self.edges.iter().any(|e| e.transition.letter.is_epsilon())
    }

    pub fn valuation(&self, set: &ApSet) -> Valuation {
        Valuation::from_set(&self.aps, set)
    }

    pub fn render_transition(&self, t: &Transition) -> String {
        render_transition(&self.aps, &self.state_names, t)
    }

    pub fn to_text(&self) -> String {
        serialize_automaton(self)
    }
}

fn render_transition(aps: &[AtomicProposition], names: &[String], t: &Transition) -> String {
    format!("({},{},{})", names[t.src], t.letter.render(aps), names[t.dst])
}

fn default_state_name(q: StateId) -> String {
    format!("x{q}")
}

/// Default state names `x0, x1, ...`.
pub fn default_state_names(n: usize) -> Vec<String> {
    (0..n).map(default_state_name).collect()
}

fn guard_cube(aps: &[AtomicProposition], v: Valuation) -> String {
    if aps.is_empty() {
        return "true".to_string();
    }
    aps.iter()
        .enumerate()
        .map(|(i, p)| if v.holds(i) { p.to_string() } else { format!("!{p}") })
        .collect::<Vec<_>>()
        .join(" & ")
}

/// Canonical text form: explicit letters, transitions sorted by source,
/// letter and target.
pub fn serialize_automaton(b: &TGba) -> String {
    let mut s = String::new();
    let aps: Vec<&str> = b.aps.iter().map(|p| p.as_str()).collect();
    s.push_str(&format!("ap: {}\n", aps.join(" ")).replace(": \n", ":\n"));
    s.push_str(&format!("states: {}\n", b.num_states()));
    s.push_str(&format!("initial: {}\n", b.initial));
    s.push_str(&format!("acceptance-sets: {}\n", b.num_sets));
    for (q, name) in b.state_names.iter().enumerate() {
        if *name != default_state_name(q) {
            s.push_str(&format!("state: {q} {name}\n"));
        }
    }
    for e in &b.edges {
        let t = e.transition;
        let guard = match t.letter {
            Letter::Set(v) => guard_cube(&b.aps, v),
            Letter::Epsilon => "eps".to_string(),
        };
        s.push_str(&format!("{} {} {}", t.src, guard, t.dst));
        if !e.marks.is_empty() {
            let sets: Vec<String> = e.marks.iter().map(|j| (j + 1).to_string()).collect();
            s.push_str(&format!(" [acc: {}]", sets.join(",")));
        }
        s.push('\n');
    }
    s
}

pub fn parse_automaton(text: &str) -> Result<TGba, AutomatonError> {
    let mut aps: Option<Vec<AtomicProposition>> = None;
    let mut num_states: Option<usize> = None;
    let mut initial: Option<usize> = None;
    let mut num_sets: Option<usize> = None;
    let mut names: BTreeMap<usize, String> = BTreeMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut seen: BTreeSet<Transition> = BTreeSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let code = raw.split_once('#').map_or(raw, |(c, _)| c).trim();
        if code.is_empty() {
            continue;
        }
        let syntax = |message: String| AutomatonError::Syntax { line, message };
        if let Some((key, value)) = header(code) {
            let value = value.trim();
            let number = || value.parse::<usize>().map_err(|_| syntax(format!("`{key}` expects a number")));
            match key {
                "ap" => {
                    let mut list = Vec::new();
                    for name in value.split_whitespace() {
                        if name == "eps" {
                            return Err(syntax("`eps` is reserved for ε-transitions".into()));
                        }
                        list.push(
                            AtomicProposition::new(name)
                                .map_err(|_| syntax(format!("invalid proposition `{name}`")))?,
                        );
                    }
                    aps = Some(list);
                }
                "states" => num_states = Some(number()?),
                "initial" => initial = Some(number()?),
                "acceptance-sets" => num_sets = Some(number()?),
                "state" => {
                    let mut parts = value.split_whitespace();
                    let (Some(id), Some(name), None) = (parts.next(), parts.next(), parts.next()) else {
                        return Err(syntax("expected `state: <id> <name>`".into()));
                    };
                    let id: usize = id.parse().map_err(|_| syntax(format!("invalid state id `{id}`")))?;
                    names.insert(id, name.to_string());
                }
                other => return Err(syntax(format!("unknown header `{other}`"))),
            }
            continue;
        }

        let (Some(aps), Some(n), Some(_), Some(sets)) = (&aps, num_states, initial, num_sets) else {
            return Err(syntax("transition before the `ap`, `states`, `initial` and `acceptance-sets` headers".into()));
        };
        let (body, marks) = match code.split_once('[') {
            Some((body, acc)) => (body.trim(), parse_marks(acc, sets, line)?),
            None => (code, AccMarks::NONE),
        };
        let tokens: Vec<&str> = body.split_whitespace().collect();
        if tokens.len() < 3 {
            return Err(syntax("expected `src <guard> dst`".into()));
        }
        let state = |tok: &str| -> Result<usize, AutomatonError> {
            let q: usize = tok.parse().map_err(|_| syntax(format!("invalid state id `{tok}`")))?;
            if q >= n {
                return Err(AutomatonError::UndeclaredState { line, state: tok.to_string() });
            }
            Ok(q)
        };
        let src = state(tokens[0])?;
        let dst = state(tokens[tokens.len() - 1])?;
        let guard = tokens[1..tokens.len() - 1].join(" ");
        let letters: Vec<Letter> = if guard == "eps" {
            vec![Letter::Epsilon]
        } else {
            expand_guard(&guard, aps, line)?.into_iter().map(Letter::Set).collect()
        };
        for letter in letters {
            let transition = Transition { src, letter, dst };
            if !seen.insert(transition) {
                return Err(AutomatonError::DuplicateTransition(format!("line {line}: {guard}")));
            }
            edges.push(Edge { transition, marks });
        }
    }

    let missing = |h: &str| AutomatonError::Syntax { line: 0, message: format!("missing `{h}` header") };
    let aps = aps.ok_or_else(|| missing("ap"))?;
    let n = num_states.ok_or_else(|| missing("states"))?;
    let initial = initial.ok_or_else(|| missing("initial"))?;
    let sets = num_sets.ok_or_else(|| missing("acceptance-sets"))?;
    let mut state_names = default_state_names(n);
    for (id, name) in names {
        if id >= n {
            return Err(AutomatonError::UndeclaredState { line: 0, state: id.to_string() });
        }
        state_names[id] = name;
    }
    TGba::new(aps, state_names, initial, sets, edges)
}

fn header(code: &str) -> Option<(&str, &str)> {
    let (key, value) = code.split_once(':')?;
    let key = key.trim();
    matches!(key, "ap" | "states" | "initial" | "acceptance-sets" | "state").then_some((key, value)).or_else(|| {
        (!key.is_empty() && key.chars().all(|c| c.is_ascii_alphabetic() || c == '-')).then_some((key, value))
    })
}

fn parse_marks(acc: &str, sets: usize, line: usize) -> Result<AccMarks, AutomatonError> {
    let syntax = |message: &str| AutomatonError::Syntax { line, message: message.to_string() };
    let inner = acc.trim().strip_suffix(']').ok_or_else(|| syntax("expected `]`"))?;
    let list = inner.trim().strip_prefix("acc:").ok_or_else(|| syntax("expected `[acc: ...]`"))?;
    let mut marks = AccMarks::NONE;
    for item in list.split(',') {
        let index: usize = item.trim().parse().map_err(|_| syntax("acceptance indices must be numbers"))?;
        if index == 0 || index > sets {
            return Err(AutomatonError::AcceptanceIndexOutOfRange { line, index, sets });
        }
        marks = marks.union(AccMarks::of(&[index - 1]));
    }
    Ok(marks)
}

/// All letters satisfying a Boolean guard over `aps`.
fn expand_guard(guard: &str, aps: &[AtomicProposition], line: usize) -> Result<Vec<Valuation>, AutomatonError> {
    let formula =
        ltl::parse_ltl(guard).map_err(|e| AutomatonError::Syntax { line, message: format!("guard `{guard}`: {e}") })?;
    if !formula.is_propositional() {
        return Err(AutomatonError::Syntax { line, message: format!("guard `{guard}` uses a temporal operator") });
    }
    if let Some(unknown) = formula.atoms().into_iter().find(|p| !aps.contains(p)) {
        return Err(AutomatonError::UnknownAp { line, name: unknown.to_string() });
    }
    let index: BTreeMap<&AtomicProposition, usize> = aps.iter().enumerate().map(|(i, p)| (p, i)).collect();
    Ok((0u32..1 << aps.len())
        .map(Valuation)
        .filter(|v| formula.eval_letter(&|p: &AtomicProposition| v.holds(index[p])).expect("propositional guard"))
        .collect())
}

/// The two-part split of a limit-deterministic automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitDetPartition {
    pub initial_part: BTreeSet<StateId>,
    pub final_part: BTreeSet<StateId>,
    /// Whether every final state also has exactly one outgoing transition
    /// into the final part in total (the literal, letter-agnostic count).
    pub literal_reading_holds: bool,
}

/// Finds a partition into an initial and a final part meeting the
/// limit-determinism conditions, or reports the first violated condition.
///
/// The final part is the smallest candidate: the forward closure of every
/// accepting-transition endpoint and every ε-target. All conditions only get
/// harder as the final part grows, so if this candidate fails none succeeds.
pub fn check_limit_deterministic(b: &TGba) -> Result<LimitDetPartition, AutomatonError> {
    let fail = |v| Err(AutomatonError::NotLimitDeterministic(v));
    let mut seeds = Vec::new();
    for e in &b.edges {
        let t = e.transition;
        if !e.marks.is_empty() {
            seeds.push(t.src);
            seeds.push(t.dst);
        }
        if t.letter.is_epsilon() {
            seeds.push(t.dst);
        }
    }
    let successors: Vec<Vec<usize>> =
        (0..b.num_states()).map(|q| b.out_edges(q).iter().map(|e| e.transition.dst).collect()).collect();
    let in_final = graph::reachable(&successors, seeds);
    let name = |t: &Transition| b.render_transition(t);

    for e in &b.edges {
        let t = e.transition;
        if !e.marks.is_empty() && !(in_final[t.src] && in_final[t.dst]) {
            return fail(LdViolation::AcceptingOutsideFinal { transition: name(&t) });
        }
    }
    let mut literal = true;
    for q in (0..b.num_states()).filter(|&q| in_final[q]) {
        let mut per_letter: BTreeMap<Letter, usize> = BTreeMap::new();
        let mut into_final = 0;
        for e in b.out_edges(q) {
            let t = e.transition;
            if in_final[t.dst] {
                into_final += 1;
                *per_letter.entry(t.letter).or_default() += 1;
            }
        }
        literal &= into_final == 1;
        if let Some((letter, count)) = per_letter.iter().find(|(l, c)| !l.is_epsilon() && **c > 1) {
            return fail(LdViolation::NondeterministicInFinal {
                state: b.state_names[q].clone(),
                letter: letter.render(&b.aps),
                count: *count,
            });
        }
    }
    for e in &b.edges {
        let t = e.transition;
        if in_final[t.src] && !in_final[t.dst] {
            return fail(LdViolation::FinalToInitial { transition: name(&t) });
        }
    }
    for e in &b.edges {
        let t = e.transition;
        if t.letter.is_epsilon() && (in_final[t.src] || !in_final[t.dst]) {
            return fail(LdViolation::EpsilonNotInitialToFinal { transition: name(&t) });
        }
    }
    let (final_part, initial_part) = (0..b.num_states()).partition(|&q| in_final[q]);
    Ok(LimitDetPartition { initial_part, final_part, literal_reading_holds: literal })
}

/// Counter construction from `n` acceptance sets to one.
///
/// States are `(x, j)` with `j` the acceptance set currently awaited. Taking a
/// transition of `F_j` while awaiting `j` advances to `j + 1 (mod n)`; the
/// single acceptance set holds the transitions of `F_n` taken while awaiting
/// `n`. Only states reachable from `(x_init, 1)` are built.
pub fn degeneralize(b: &TGba) -> TGba {
    let n = b.num_sets;
    let mut ids: BTreeMap<(StateId, usize), usize> = BTreeMap::new();
    let mut order: Vec<(StateId, usize)> = Vec::new();
    let mut queue = VecDeque::new();
    let mut intern = |key: (StateId, usize), order: &mut Vec<_>, queue: &mut VecDeque<_>| {
        *ids.entry(key).or_insert_with(|| {
            order.push(key);
            queue.push_back(key);
            order.len() - 1
        })
    };
    intern((b.initial, 0), &mut order, &mut queue);
    let mut edges = Vec::new();
    while let Some((q, j)) = queue.pop_front() {
        let src = intern((q, j), &mut order, &mut queue);
        for e in b.out_edges(q) {
            let hit = e.marks.contains(j);
            let next = if hit { (j + 1) % n } else { j };
            let dst = intern((e.transition.dst, next), &mut order, &mut queue);
            let marks = if hit && j == n - 1 { AccMarks::of(&[0]) } else { AccMarks::NONE };
            edges.push(Edge { transition: Transition { src, letter: e.transition.letter, dst }, marks });
        }
    }
    let names = order.iter().map(|(q, j)| format!("{}#{}", b.state_names[*q], j + 1)).collect();
    TGba::new(b.aps.clone(), names, 0, 1, edges).expect("degeneralization preserves validity")
}

/// Decides whether `b` accepts the infinite word `prefix · cycle^ω`.
///
/// Searches the finite graph of (suffix class, automaton state) pairs
/// reachable from `(0, x_init)`. Letter edges advance the suffix class, ε
/// edges keep it. The word is accepted iff some strongly connected component
/// contains a letter edge (so it describes an infinite run) and its internal
/// edges carry every acceptance mark.
pub fn accepts_lasso(b: &TGba, w: &LassoWord) -> bool {
    let letters: Vec<Letter> = (0..w.len()).map(|i| Letter::Set(b.valuation(w.letter(i)))).collect();
    let nq = b.num_states();
    let mut local = vec![usize::MAX; w.len() * nq];
    let mut nodes: Vec<(usize, StateId)> = Vec::new();
    let mut succ: Vec<Vec<usize>> = Vec::new();
    let mut arcs: Vec<(usize, usize, AccMarks, bool)> = Vec::new();

    let start = b.initial;
    local[start] = 0;
    nodes.push((0, start));
    succ.push(Vec::new());
    let mut cursor = 0;
    while cursor < nodes.len() {
        let (pos, q) = nodes[cursor];
        for e in b.out_edges(q) {
            let t = e.transition;
            let next_pos = match t.letter {
                Letter::Epsilon => pos,
                l if l == letters[pos] => w.successor(pos),
                _ => continue,
            };
            let key = next_pos * nq + t.dst;
            if local[key] == usize::MAX {
                local[key] = nodes.len();
                nodes.push((next_pos, t.dst));
                succ.push(Vec::new());
            }
            succ[cursor].push(local[key]);
            arcs.push((cursor, local[key], e.marks, !t.letter.is_epsilon()));
        }
        cursor += 1;
    }

    let components = graph::strongly_connected_components(&succ);
    let mut component_of = vec![0; nodes.len()];
    for (c, comp) in components.iter().enumerate() {
        for &v in comp {
            component_of[v] = c;
        }
    }
    let mut marks = vec![AccMarks::NONE; components.len()];
    let mut advances = vec![false; components.len()];
    for &(u, v, m, is_letter) in &arcs {
        let c = component_of[u];
        if c == component_of[v] {
            marks[c] = marks[c].union(m);
            advances[c] |= is_letter;
        }
    }
    let full = b.full_marks();
    (0..components.len()).any(|c| advances[c] && marks[c] == full)
}

/// A named automaton fixture together with the formula it recognizes.
pub struct Fixture {
    pub name: &'static str,
    pub formula: &'static str,
    pub build: fn() -> TGba,
}

pub fn fixtures() -> &'static [Fixture] {
    &[
        Fixture { name: "gfa_gfb_gnc", formula: "G F a & G F b & G !c", build: fixture_gfa_gfb_gnc },
        Fixture { name: "gfa_gfb_gfc", formula: "G F a & G F b & G F c", build: fixture_gfa_gfb_gfc },
        Fixture { name: "fg_a", formula: "F G a", build: fixture_fg_a },
    ]
}

pub fn fixture(name: &str) -> Option<TGba> {
    fixtures().iter().find(|f| f.name == name).map(|f| (f.build)())
}

/// Looks up a fixture whose formula is structurally equal to `phi`.
pub fn fixture_for_formula(phi: &Ltl) -> Option<&'static Fixture> {
    fixtures().iter().find(|f| ltl::parse_ltl(f.formula).as_ref() == Ok(phi))
}

/// Two-state tLDGBA for `GF a & GF b & G !c`.
///
/// `x0` loops on every letter without `c`: `{a}` is in `F_1`, `{b}` in `F_2`,
/// `{a,b}` in both. Any letter with `c` moves to the trap `x1`.
pub fn fixture_gfa_gfb_gnc() -> TGba {
    let aps = ltl::props(&["a", "b", "c"]);
    let mut edges = Vec::new();
    for v in 0u32..8 {
        let letter = Letter::Set(Valuation(v));
        if v & 0b100 == 0 {
            let mut sets = Vec::new();
            if v & 0b001 != 0 {
                sets.push(0);
            }
            if v & 0b010 != 0 {
                sets.push(1);
            }
            edges.push(Edge { transition: Transition { src: 0, letter, dst: 0 }, marks: AccMarks::of(&sets) });
        } else {
            edges.push(Edge { transition: Transition { src: 0, letter, dst: 1 }, marks: AccMarks::NONE });
        }
        edges.push(Edge { transition: Transition { src: 1, letter, dst: 1 }, marks: AccMarks::NONE });
    }
    TGba::new(aps, default_state_names(2), 0, 2, edges).expect("fixture is well formed")
}

/// One state, three acceptance sets: `{a}`-letters in `F_1`, `{b}` in `F_2`,
/// `{c}` in `F_3`.
pub fn fixture_gfa_gfb_gfc() -> TGba {
    let aps = ltl::props(&["a", "b", "c"]);
    let edges = (0u32..8)
        .map(|v| Edge {
            transition: Transition { src: 0, letter: Letter::Set(Valuation(v)), dst: 0 },
            marks: AccMarks(v),
        })
        .collect();
    TGba::new(aps, default_state_names(1), 0, 3, edges).expect("fixture is well formed")
}

/// `F G a`: `x0` waits on every letter and guesses via ε into `x1`, which
/// continues on `a` and falls into the rejecting sink `x2` otherwise.
pub fn fixture_fg_a() -> TGba {
    let aps = ltl::props(&["a"]);
    let t = |src, letter, dst| Transition { src, letter, dst };
    let (none, a) = (Letter::Set(Valuation(0)), Letter::Set(Valuation(1)));
    let edges = vec![
        Edge { transition: t(0, none, 0), marks: AccMarks::NONE },
        Edge { transition: t(0, a, 0), marks: AccMarks::NONE },
        Edge { transition: t(0, Letter::Epsilon, 1), marks: AccMarks::NONE },
        Edge { transition: t(1, none, 2), marks: AccMarks::NONE },
        Edge { transition: t(1, a, 1), marks: AccMarks::of(&[0]) },
        Edge { transition: t(2, none, 2), marks: AccMarks::NONE },
        Edge { transition: t(2, a, 2), marks: AccMarks::NONE },
    ];
    TGba::new(aps, default_state_names(3), 0, 1, edges).expect("fixture is well formed")
}

impl fmt::Display for TGba {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_automaton(self))
    }
}
