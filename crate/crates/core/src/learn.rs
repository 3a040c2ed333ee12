//! Tabular Q-learning on a product MDP, and value iteration as an exact
//! reference.
//!
//! Q-values are stored per product state and per enabled row; rows are
//! sorted by action id, so "lowest row index" and "lowest action id" agree.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mdp::{MdpError, PositionalPolicy, StateId};
use crate::product::{evaluate_policy, reward_accepting, FrontierState, ProductMdp, RewardScheme};

/// Satisfaction probabilities within this distance of 1 count as 1.
pub const SAT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("Q-table has no entry for state {0}")]
    MissingState(usize),
    #[error(transparent)]
    Mdp(#[from] MdpError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub gamma: f64,
    pub r_p: f64,
    pub episodes: usize,
    pub steps_per_episode: usize,
    pub sessions: usize,
    #[serde(default = "default_epsilon_numerator")]
    pub epsilon_numerator: f64,
    #[serde(default = "default_alpha_exponent")]
    pub alpha_exponent: f64,
    #[serde(default)]
    pub rng_seed: u64,
    /// Initial Q-value of every entry; `None` means the upper bound
    /// `r_p / (1 − γ)` of any discounted return.
    #[serde(default)]
    pub q_init: Option<f64>,
    /// Whether the visit counts behind ε persist across episodes.
    #[serde(default)]
    pub visit_count_scope: VisitCountScope,
    /// Evaluate the greedy policy exactly after every episode.
    #[serde(default = "default_track")]
    pub track_satisfaction: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VisitCountScope {
    /// Counts accumulate over the whole session.
    #[default]
    Session,
    /// Counts restart with every episode.
    Episode,
}

fn default_epsilon_numerator() -> f64 {
    0.95
}

fn default_alpha_exponent() -> f64 {
    0.85
}

fn default_track() -> bool {
    true
}

impl TrainConfig {
    /// 200 episodes of 1000 steps, 10 sessions.
    pub fn desk() -> TrainConfig {
        TrainConfig {
            gamma: 0.95,
            r_p: 2.0,
            episodes: 200,
            steps_per_episode: 1000,
            sessions: 10,
            epsilon_numerator: default_epsilon_numerator(),
            alpha_exponent: default_alpha_exponent(),
            rng_seed: 0,
            q_init: None,
            visit_count_scope: VisitCountScope::Session,
            track_satisfaction: true,
        }
    }

    /// 1000 episodes of 10000 steps, 100 sessions.
    pub fn full() -> TrainConfig {
        TrainConfig { episodes: 1000, steps_per_episode: 10_000, sessions: 100, ..TrainConfig::desk() }
    }

    pub fn preset(name: &str) -> Option<TrainConfig> {
        match name {
            "desk" => Some(TrainConfig::desk()),
            "full" => Some(TrainConfig::full()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), LearnError> {
        let bad = |m: &str| Err(LearnError::InvalidConfig(m.to_string()));
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1)");
        }
        if !(self.r_p > 0.0 && self.r_p.is_finite()) {
            return bad("r_p must be positive");
        }
        if self.episodes == 0 || self.steps_per_episode == 0 || self.sessions == 0 {
            return bad("episodes, steps_per_episode and sessions must be at least 1");
        }
        if !(self.epsilon_numerator > 0.0 && self.epsilon_numerator.is_finite()) {
            return bad("epsilon_numerator must be positive");
        }
        if !(self.alpha_exponent > 0.5 && self.alpha_exponent <= 1.0) {
            return bad(
                "alpha_exponent must lie in (0.5, 1] so that the step sizes are square-summable but not summable",
            );
        }
        if self.q_init.is_some_and(|q| !q.is_finite()) {
            return bad("q_init must be finite");
        }
        Ok(())
    }

    /// The initial Q-value actually used.
    pub fn initial_q(&self) -> f64 {
        self.q_init.unwrap_or(self.r_p / (1.0 - self.gamma))
    }
}

/// Exploration rate after `n` visits to the current state (`n` includes
/// the current one).
pub fn epsilon(n: u64, numerator: f64) -> f64 {
    (numerator / n as f64).min(1.0)
}

/// Learning rate after `k` visits to the current state-action pair.
pub fn alpha(k: u64, exponent: f64) -> f64 {
    (k as f64).powf(-exponent)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    /// `values[s][r]` for the `r`-th enabled action of product state `s`.
    pub values: Vec<Vec<f64>>,
    pub state_visits: Vec<u64>,
    pub pair_visits: Vec<Vec<u64>>,
}

impl QTable {
    pub fn new(p: &ProductMdp, init: f64) -> QTable {
        let shape: Vec<usize> = (0..p.num_states()).map(|s| p.mdp().enabled(s).len()).collect();
        QTable {
            values: shape.iter().map(|&k| vec![init; k]).collect(),
            state_visits: vec![0; shape.len()],
            pair_visits: shape.iter().map(|&k| vec![0; k]).collect(),
        }
    }

    pub fn max_value(&self, s: StateId) -> f64 {
        self.values[s].iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Row of the largest value at `s`, the lowest one on ties.
    pub fn greedy_row(&self, s: StateId) -> usize {
        argmax_first(&self.values[s])
    }
}

fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// One Q-learning update of entry `(s, row)`.
pub fn q_update(q: &mut QTable, s: StateId, row: usize, r: f64, next: StateId, gamma: f64, alpha: f64) {
    let target = r + gamma * q.max_value(next);
    let entry = &mut q.values[s][row];
    *entry += alpha * (target - *entry);
}

/// Greedy policy over every state of `p`, ties going to the lowest action id.
pub fn greedy_policy(p: &ProductMdp, q: &QTable) -> Result<PositionalPolicy, LearnError> {
    if q.values.len() < p.num_states() {
        return Err(LearnError::MissingState(q.values.len()));
    }
    let choice = (0..p.num_states())
        .map(|s| {
            if q.values[s].is_empty() {
                return Err(LearnError::MissingState(s));
            }
            Ok(p.mdp().enabled(s)[q.greedy_row(s)].action)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PositionalPolicy::total(choice))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionResult {
    pub q: QTable,
    pub policy: PositionalPolicy,
    /// Total reward of each episode divided by its number of steps.
    pub avg_reward: Vec<f64>,
    /// Exact satisfaction probability of the greedy policy after each
    /// episode; empty unless tracking is enabled.
    pub sat_probability: Vec<f64>,
    /// Satisfaction probability of the final greedy policy.
    pub final_sat_probability: f64,
}

impl SessionResult {
    /// 1-based index of the first episode after which the greedy policy
    /// satisfies the objective with probability 1.
    pub fn first_satisfaction(&self) -> Option<usize> {
        self.sat_probability.iter().position(|&p| p >= 1.0 - SAT_TOLERANCE).map(|i| i + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    /// `per_session[k][e]`: average reward of session `k` in episode `e`.
    pub per_session: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    /// Population standard deviation across sessions.
    pub std: Vec<f64>,
}

impl LearningCurve {
    pub fn from_sessions(per_session: Vec<Vec<f64>>) -> LearningCurve {
        let episodes = per_session.first().map_or(0, Vec::len);
        let n = per_session.len() as f64;
        let mut mean = Vec::with_capacity(episodes);
        let mut std = Vec::with_capacity(episodes);
        for e in 0..episodes {
            let m = per_session.iter().map(|s| s[e]).sum::<f64>() / n;
            let var = per_session.iter().map(|s| (s[e] - m).powi(2)).sum::<f64>() / n;
            mean.push(m);
            std.push(var.sqrt());
        }
        LearningCurve { per_session, mean, std }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub sessions: Vec<SessionResult>,
    pub curve: LearningCurve,
}

/// The random stream of session `session`.
pub fn session_rng(seed: u64, session: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(session as u64);
    rng
}

/// Runs `cfg.sessions` independent learning sessions in parallel.
pub fn train(p: &ProductMdp, scheme: RewardScheme, cfg: &TrainConfig) -> Result<TrainOutcome, LearnError> {
    cfg.validate()?;
    let sessions = (0..cfg.sessions)
        .into_par_iter()
        .map(|k| run_session(p, scheme, cfg, &mut session_rng(cfg.rng_seed, k)))
        .collect::<Result<Vec<_>, _>>()?;
    let curve = LearningCurve::from_sessions(sessions.iter().map(|s| s.avg_reward.clone()).collect());
    Ok(TrainOutcome { sessions, curve })
}

/// One session: Q-table and visit counts persist across episodes; each
/// episode restarts at the product's initial state with a fresh frontier.
pub fn run_session(
    p: &ProductMdp,
    scheme: RewardScheme,
    cfg: &TrainConfig,
    rng: &mut impl Rng,
) -> Result<SessionResult, LearnError> {
    let mut q = QTable::new(p, cfg.initial_q());
    let mut avg_reward = Vec::with_capacity(cfg.episodes);
    let mut sat_probability = Vec::new();
    let b = p.automaton();
    for _ in 0..cfg.episodes {
        if cfg.visit_count_scope == VisitCountScope::Episode {
            q.state_visits.iter_mut().for_each(|n| *n = 0);
        }
        let mut s = p.initial();
        let mut frontier = FrontierState::new(b);
        let mut total = 0.0;
        for _ in 0..cfg.steps_per_episode {
            q.state_visits[s] += 1;
            let rows = p.mdp().enabled(s);
            let row = if rng.random::<f64>() < epsilon(q.state_visits[s], cfg.epsilon_numerator) {
                rng.random_range(0..rows.len())
            } else {
                q.greedy_row(s)
            };
            q.pair_visits[s][row] += 1;
            let step = alpha(q.pair_visits[s][row], cfg.alpha_exponent);
            let outcomes = &rows[row].outcomes;
            let u: f64 = rng.random();
            let mut o = 0;
            let mut acc = outcomes[0].prob;
            while u >= acc && o + 1 < outcomes.len() {
                o += 1;
                acc += outcomes[o].prob;
            }
            let reward = match scheme {
                RewardScheme::Accepting { r_p } => reward_accepting(p.marks(s, row, o), r_p),
                RewardScheme::Frontier { r_p } => {
                    if frontier.step(b, p.automaton_edge(s, row, o)) {
                        r_p
                    } else {
                        0.0
                    }
                }
            };
            let next = outcomes[o].next;
            q_update(&mut q, s, row, reward, next, cfg.gamma, step);
            total += reward;
            s = next;
        }
        avg_reward.push(total / cfg.steps_per_episode as f64);
        if cfg.track_satisfaction {
            let pi = greedy_policy(p, &q)?;
            sat_probability.push(evaluate_policy(p, &pi)?.sat_probability);
        }
    }
    let policy = greedy_policy(p, &q)?;
    let final_sat_probability = match sat_probability.last() {
        Some(&v) => v,
        None => evaluate_policy(p, &policy)?.sat_probability,
    };
    Ok(SessionResult { q, policy, avg_reward, sat_probability, final_sat_probability })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueIterationResult {
    pub values: Vec<f64>,
    /// Optimal action values, indexed like [`QTable::values`].
    pub q_values: Vec<Vec<f64>>,
    pub policy: PositionalPolicy,
    pub iterations: usize,
}

/// Tolerance on the distance of the returned values to the Bellman fixed
/// point.
pub const VALUE_ITERATION_TOLERANCE: f64 = 1e-10;

/// Optimal discounted values under the accepting-transition reward.
///
/// Iterates until successive iterates differ by less than
/// `tol · (1 − γ) / γ` in max norm, which bounds the distance to the fixed
/// point by `tol`. The greedy policy takes the lowest action id among the
/// actions within `1e-9` of the best one.
pub fn value_iteration(p: &ProductMdp, r_p: f64, gamma: f64) -> ValueIterationResult {
    assert!((0.0..1.0).contains(&gamma), "gamma must lie in [0, 1)");
    let n = p.num_states();
    let m = p.mdp();
    // Expected immediate reward per row.
    let rewards: Vec<Vec<f64>> = (0..n)
        .map(|s| {
            m.enabled(s)
                .iter()
                .enumerate()
                .map(|(r, row)| {
                    row.outcomes
                        .iter()
                        .enumerate()
                        .map(|(o, out)| out.prob * reward_accepting(p.marks(s, r, o), r_p))
                        .sum()
                })
                .collect()
        })
        .collect();
    let q_of = |values: &[f64]| -> Vec<Vec<f64>> {
        (0..n)
            .map(|s| {
                m.enabled(s)
                    .iter()
                    .enumerate()
                    .map(|(r, row)| {
                        rewards[s][r] + gamma * row.outcomes.iter().map(|o| o.prob * values[o.next]).sum::<f64>()
                    })
                    .collect()
            })
            .collect()
    };
    let threshold = if gamma == 0.0 { f64::INFINITY } else { VALUE_ITERATION_TOLERANCE * (1.0 - gamma) / gamma };
    let mut values = vec![0.0; n];
    let mut iterations = 0;
    loop {
        let q = q_of(&values);
        let next: Vec<f64> = q.iter().map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max)).collect();
        let delta = next.iter().zip(&values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        values = next;
        iterations += 1;
        if delta < threshold {
            break;
        }
    }
    let q_values = q_of(&values);
    let choice = (0..n)
        .map(|s| {
            let best = q_values[s].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let row = q_values[s].iter().position(|&v| v >= best - 1e-9).expect("nonempty row");
            m.enabled(s)[row].action
        })
        .collect();
    ValueIterationResult { values, q_values, policy: PositionalPolicy::total(choice), iterations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augment::augment_and_merge;
    use crate::automata::{
        default_state_names, fixture_gfa_gfb_gnc, AccMarks, Edge, Letter, TGba, Transition, Valuation,
    };
    use crate::mdp::{build_gridworld, ActionRow, LabeledMdp, Outcome};
    use crate::product::build_product;

    fn grid_product() -> ProductMdp {
        build_product(&build_gridworld(), &augment_and_merge(&fixture_gfa_gfb_gnc()).automaton).unwrap()
    }

    fn small_cfg(seed: u64) -> TrainConfig {
        TrainConfig { episodes: 20, steps_per_episode: 300, sessions: 3, rng_seed: seed, ..TrainConfig::desk() }
    }

    /// Two states: `s0` moves to `s1`, `s1` loops labeled `a`. The automaton
    /// accepts every `a`.
    fn two_state_product() -> ProductMdp {
        let out = |next, label| vec![Outcome { next, prob: 1.0, label: Valuation(label) }];
        let rows = vec![
            vec![ActionRow { action: 0, outcomes: out(1, 0) }],
            vec![ActionRow { action: 0, outcomes: out(1, 1) }],
        ];
        let m = LabeledMdp::new(vec!["s0".into(), "s1".into()], vec!["go".into()], crate::ltl::props(&["a"]), 0, rows)
            .unwrap();
        let edges = (0..2)
            .map(|v| Edge {
                transition: Transition { src: 0, letter: Letter::Set(Valuation(v)), dst: 0 },
                marks: if v == 1 { AccMarks::of(&[0]) } else { AccMarks::NONE },
            })
            .collect();
        let b = TGba::new(crate::ltl::props(&["a"]), default_state_names(1), 0, 1, edges).unwrap();
        build_product(&m, &b).unwrap()
    }

    #[test]
    fn schedules() {
        assert_eq!(epsilon(1, 0.95), 0.95);
        assert!((epsilon(19, 0.95) - 0.05).abs() < 1e-15);
        assert!(epsilon(1_000_000, 0.95) < 1e-5);
        assert_eq!(alpha(1, 0.85), 1.0);
        assert!((alpha(16, 0.85) - 0.0947).abs() < 5e-5);
        let mut cfg = TrainConfig::desk();
        cfg.alpha_exponent = 0.4;
        assert!(matches!(cfg.validate(), Err(LearnError::InvalidConfig(_))));
        cfg.alpha_exponent = 0.85;
        cfg.gamma = 1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_json() {
        let cfg: TrainConfig =
            serde_json::from_str(r#"{"gamma":0.9,"r_p":1,"episodes":2,"steps_per_episode":3,"sessions":1}"#).unwrap();
        assert_eq!(cfg.epsilon_numerator, 0.95);
        assert_eq!(cfg.alpha_exponent, 0.85);
        assert!(serde_json::from_str::<TrainConfig>(r#"{"gamma":0.9,"bogus":1}"#).is_err());
    }

    #[test]
    fn one_step_updates() {
        let p = two_state_product();
        let mut q = QTable::new(&p, 0.0);
        q_update(&mut q, 0, 0, 2.0, 1, 0.95, 1.0);
        assert_eq!(q.values[0][0], 2.0);
        let mut q = QTable::new(&p, 0.0);
        q_update(&mut q, 0, 0, 0.0, 1, 0.95, 0.5);
        assert_eq!(q.values[0][0], 0.0);
    }

    #[test]
    fn greedy_ties_take_lowest_action() {
        let p = grid_product();
        let q = QTable::new(&p, 0.0);
        let pi = greedy_policy(&p, &q).unwrap();
        for s in 0..p.num_states() {
            assert_eq!(pi.get(s), Some(p.mdp().enabled(s)[0].action));
        }
        let empty = QTable { values: vec![], state_visits: vec![], pair_visits: vec![] };
        assert!(greedy_policy(&p, &empty).is_err());
    }

    #[test]
    fn value_iteration_geometric_series() {
        let p = two_state_product();
        let vi = value_iteration(&p, 1.0, 0.5);
        let s1 = p.state_of(1, 0).unwrap();
        assert!((vi.values[s1] - 2.0).abs() < 1e-10);
        assert!((vi.values[p.initial()] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn myopic_value_iteration() {
        let p = grid_product();
        let vi = value_iteration(&p, 2.0, 0.0);
        let s4 = p.mdp().state_id("(s4|x0@00)").unwrap();
        assert_eq!(p.mdp().action_name(vi.policy.get(s4).unwrap()), "to_s0");
        assert!((vi.values[s4] - 1.8).abs() < 1e-12);
    }

    #[test]
    fn value_iteration_policy_satisfies() {
        let p = grid_product();
        let vi = value_iteration(&p, 2.0, 0.95);
        let eval = evaluate_policy(&p, &vi.policy).unwrap();
        assert!((eval.sat_probability - 1.0).abs() < SAT_TOLERANCE);
        // Learned tables from the optimum extract the same policy.
        let q = QTable { values: vi.q_values.clone(), state_visits: vec![], pair_visits: vec![] };
        assert_eq!(greedy_policy(&p, &q).unwrap(), vi.policy);
    }

    #[test]
    fn optimal_values_have_zero_expected_td_error() {
        let p = grid_product();
        let gamma = 0.95;
        let vi = value_iteration(&p, 2.0, gamma);
        let mut rng = session_rng(7, 0);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let samples = 100_000;
        for _ in 0..samples {
            let s = rng.random_range(0..p.num_states());
            let rows = p.mdp().enabled(s);
            let r = rng.random_range(0..rows.len());
            let mut expected = 0.0;
            for (o, out) in rows[r].outcomes.iter().enumerate() {
                let target = reward_accepting(p.marks(s, r, o), 2.0) + gamma * vi.values[out.next];
                expected += out.prob * (target - vi.q_values[s][r]);
            }
            assert!(expected.abs() < 1e-9);
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let o = rows[r].outcomes.iter().position(|out| {
                acc += out.prob;
                u < acc
            });
            let o = o.unwrap_or(rows[r].outcomes.len() - 1);
            let out = rows[r].outcomes[o];
            let td = reward_accepting(p.marks(s, r, o), 2.0) + gamma * vi.values[out.next] - vi.q_values[s][r];
            sum += td;
            sum_sq += td * td;
        }
        let mean = sum / samples as f64;
        let se = ((sum_sq / samples as f64 - mean * mean) / samples as f64).sqrt();
        assert!(mean.abs() <= 4.0 * se + 1e-9, "mean {mean} se {se}");
    }

    #[test]
    fn training_is_deterministic_and_bounded() {
        let p = grid_product();
        let scheme = RewardScheme::Accepting { r_p: 2.0 };
        let a = train(&p, scheme, &small_cfg(3)).unwrap();
        let b = train(&p, scheme, &small_cfg(3)).unwrap();
        assert_eq!(a, b);
        let c = train(&p, scheme, &small_cfg(4)).unwrap();
        assert_ne!(a.curve.per_session, c.curve.per_session);
        let bound = 2.0 / (1.0 - 0.95);
        for s in &a.sessions {
            assert!(s.q.values.iter().flatten().all(|&v| (0.0..=bound + 1e-9).contains(&v)));
            assert_eq!(s.sat_probability.len(), 20);
            assert_eq!(s.avg_reward.len(), 20);
        }
        assert_eq!(a.curve.mean.len(), 20);
    }

    #[test]
    fn sessions_differ() {
        let p = grid_product();
        let out = train(&p, RewardScheme::Accepting { r_p: 2.0 }, &small_cfg(1)).unwrap();
        assert_ne!(out.curve.per_session[0], out.curve.per_session[1]);
    }
}
