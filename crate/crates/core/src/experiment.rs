//! End-to-end experiment runs: build the product for a method, train,
//! evaluate, and write reproducible artifacts.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::augment::{augment, augment_and_merge, merge_unaccepting, AugmentedAutomaton};
use crate::automata::{
    self, accepts_lasso, check_limit_deterministic, degeneralize, parse_automaton, AutomatonError, TGba,
};
use crate::learn::{self, train, TrainConfig, TrainOutcome, SAT_TOLERANCE};
use crate::ltl::{self, all_lasso_words, eval_lasso, Ltl};
use crate::mdp::{self, build_gridworld, decompose, induce_chain, LabeledMdp, PositionalPolicy};
use crate::product::{
    build_product, check_positional_impossibility, class_coverage, evaluate_policy, grid9_cycle_policy,
    ImpossibilityCertificate, PolicyEvaluation, ProductMdp, RewardScheme,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("property check failed: {0}")]
    Property(String),
}

impl ExperimentError {
    /// Process exit code: 2 for failed properties, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Property(_) => 2,
            _ => 1,
        }
    }
}

fn validation(e: impl fmt::Display) -> ExperimentError {
    ExperimentError::Validation(e.to_string())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io { path: path.to_path_buf(), source }
}

fn read(path: &Path) -> Result<String, ExperimentError> {
    fs::read_to_string(path).map_err(io_err(path))
}

fn write(path: &Path, contents: &str) -> Result<(), ExperimentError> {
    fs::write(path, contents).map_err(io_err(path))
}

pub fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Augmented,
    Degeneralized,
    Frontier,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Augmented, Method::Degeneralized, Method::Frontier];

    pub fn name(self) -> &'static str {
        match self {
            Method::Augmented => "augmented",
            Method::Degeneralized => "degeneralized",
            Method::Frontier => "frontier",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Method {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Method, ExperimentError> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| validation(format!("unknown method `{s}` (augmented, degeneralized, frontier)")))
    }
}

/// An environment: the built-in `grid9` or an MDP file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Environment {
    Named(String),
    File(PathBuf),
}

impl Environment {
    pub fn load(&self) -> Result<(LabeledMdp, String), ExperimentError> {
        match self {
            Environment::Named(name) if name == "grid9" => {
                let m = build_gridworld();
                let text = m.to_text();
                Ok((m, text))
            }
            Environment::Named(name) => Err(validation(format!("unknown environment `{name}` (known: grid9)"))),
            Environment::File(path) => {
                let text = read(path)?;
                let m = mdp::parse_mdp(&text).map_err(|e| validation(format!("{}: {e}", path.display())))?;
                Ok((m, text))
            }
        }
    }
}

/// Where the automaton comes from: a fixture name, an automaton file, or a
/// formula file matching a fixture's formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecSource(pub String);

impl SpecSource {
    pub fn load(&self) -> Result<(TGba, String), ExperimentError> {
        if let Some(b) = automata::fixture(&self.0) {
            let text = b.to_text();
            return Ok((b, text));
        }
        let path = Path::new(&self.0);
        if !path.exists() {
            let names: Vec<&str> = automata::fixtures().iter().map(|f| f.name).collect();
            return Err(validation(format!(
                "`{}` is neither a fixture ({}) nor an existing file",
                self.0,
                names.join(", ")
            )));
        }
        let text = read(path)?;
        if path.extension().is_some_and(|e| e == "ltl") {
            let phi = ltl::parse_ltl_file(&text).map_err(|e| validation(format!("{}: {e}", path.display())))?;
            let f = automata::fixture_for_formula(&phi)
                .ok_or_else(|| validation(format!("no automaton is known for `{phi}`; supply a .tgba file instead")))?;
            let b = (f.build)();
            return Ok((b, text));
        }
        let b = parse_automaton(&text).map_err(|e| validation(format!("{}: {e}", path.display())))?;
        Ok((b, text))
    }
}

/// The product and reward a method trains on.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub product: ProductMdp,
    pub scheme: RewardScheme,
    /// The augmented automaton, for methods that use one.
    pub augmented: Option<AugmentedAutomaton>,
}

/// Applies the method's automaton transformation and reward scheme.
pub fn prepare(m: &LabeledMdp, b: &TGba, method: Method, r_p: f64) -> Result<Prepared, ExperimentError> {
    let (automaton, augmented, scheme) = match method {
        Method::Augmented => {
            let aug = augment_and_merge(b);
            (aug.automaton.clone(), Some(aug), RewardScheme::Accepting { r_p })
        }
        Method::Degeneralized => {
            let aug = augment_and_merge(&degeneralize(b));
            (aug.automaton.clone(), Some(aug), RewardScheme::Accepting { r_p })
        }
        Method::Frontier => (b.clone(), None, RewardScheme::Frontier { r_p }),
    };
    let product = build_product(m, &automaton).map_err(validation)?;
    Ok(Prepared { product, scheme, augmented })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub env: Environment,
    pub spec: SpecSource,
    pub method: Method,
    pub config: TrainConfig,
}

/// Resolves `--config`: a preset name (`desk`, `full`) or a JSON file.
pub fn load_config(arg: Option<&str>) -> Result<TrainConfig, ExperimentError> {
    let Some(arg) = arg else { return Ok(TrainConfig::desk()) };
    if let Some(cfg) = TrainConfig::preset(arg) {
        return Ok(cfg);
    }
    let path = Path::new(arg);
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| validation(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: ExperimentSpec,
    pub schedules: Schedules,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedules {
    pub epsilon: String,
    pub alpha: String,
    pub q_init: f64,
    pub visit_count_scope: learn::VisitCountScope,
    pub frontier_reset: String,
    pub epsilon_actions: String,
    pub average_reward: String,
}

impl Schedules {
    fn of(cfg: &TrainConfig) -> Schedules {
        Schedules {
            epsilon: format!("min(1, {} / n(s))", cfg.epsilon_numerator),
            alpha: format!("k(s,a)^-{}", cfg.alpha_exponent),
            q_init: cfg.initial_q(),
            visit_count_scope: cfg.visit_count_scope,
            frontier_reset:
                "an emptied frontier is refilled with all accepting transitions; it also restarts every episode".into(),
            epsilon_actions: "ε-actions are enabled alongside ordinary actions (not forced)".into(),
            average_reward: "total episode reward / steps_per_episode".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionSummary {
    pub session: usize,
    pub final_sat_probability: f64,
    pub first_satisfaction: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainSummary {
    pub method: Method,
    pub sessions: Vec<SessionSummary>,
    pub sessions_satisfying: usize,
    pub median_first_satisfaction: Option<f64>,
    pub impossibility_certificate: Option<ImpossibilityCertificate>,
}

/// Median with `None` standing for "never"; `None` if the median itself is
/// never reached.
pub fn median_episode(values: &[Option<usize>]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v: Vec<f64> = values.iter().map(|x| x.map_or(f64::INFINITY, |e| e as f64)).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let m = if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 };
    m.is_finite().then_some(m)
}

pub fn summarize(method: Method, p: &ProductMdp, out: &TrainOutcome) -> TrainSummary {
    let sessions: Vec<SessionSummary> = out
        .sessions
        .iter()
        .enumerate()
        .map(|(k, s)| SessionSummary {
            session: k,
            final_sat_probability: s.final_sat_probability,
            first_satisfaction: s.first_satisfaction(),
        })
        .collect();
    let firsts: Vec<Option<usize>> = sessions.iter().map(|s| s.first_satisfaction).collect();
    TrainSummary {
        method,
        sessions_satisfying: sessions.iter().filter(|s| s.final_sat_probability >= 1.0 - SAT_TOLERANCE).count(),
        median_first_satisfaction: median_episode(&firsts),
        sessions,
        impossibility_certificate: check_positional_impossibility(p),
    }
}

/// Everything a training run produces, before it is written to disk.
pub struct TrainRun {
    pub prepared: Prepared,
    pub outcome: TrainOutcome,
    pub summary: TrainSummary,
    pub evaluations: Vec<PolicyEvaluation>,
    /// File name and contents of each artifact, manifest last.
    pub files: Vec<(String, String)>,
}

pub const CURVES_HEADER_COMMENT: &str = "# avg_reward = total reward of the episode / steps_per_episode";

pub fn run_train(spec: &ExperimentSpec) -> Result<TrainRun, ExperimentError> {
    spec.config.validate().map_err(validation)?;
    let (m, env_text) = spec.env.load()?;
    let (b, spec_text) = spec.spec.load()?;
    let prepared = prepare(&m, &b, spec.method, spec.config.r_p)?;
    let p = &prepared.product;
    let outcome = train(p, prepared.scheme, &spec.config).map_err(validation)?;
    let summary = summarize(spec.method, p, &outcome);
    let evaluations = outcome
        .sessions
        .iter()
        .map(|s| evaluate_policy(p, &s.policy))
        .collect::<Result<Vec<_>, _>>()
        .map_err(validation)?;

    let mut curves = format!("{CURVES_HEADER_COMMENT}\nepisode,session,avg_reward\n");
    let mut satisfaction = String::from("episode,session,sat_probability\n");
    for (k, s) in outcome.sessions.iter().enumerate() {
        for (e, r) in s.avg_reward.iter().enumerate() {
            curves.push_str(&format!("{},{k},{r}\n", e + 1));
        }
        for (e, v) in s.sat_probability.iter().enumerate() {
            satisfaction.push_str(&format!("{},{k},{v}\n", e + 1));
        }
    }
    let mut aggregate = String::from("episode,mean,std\n");
    for (e, (mean, std)) in outcome.curve.mean.iter().zip(&outcome.curve.std).enumerate() {
        aggregate.push_str(&format!("{},{mean},{std}\n", e + 1));
    }
    let policies: Vec<serde_json::Value> = outcome
        .sessions
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let policy: BTreeMap<&str, &str> = (0..p.num_states())
                .map(|st| (p.state_name(st), p.mdp().action_name(s.policy.get(st).expect("total policy"))))
                .collect();
            serde_json::json!({ "session": k, "policy": policy })
        })
        .collect();
    let evaluation = serde_json::json!({
        "summary": summary,
        "sessions": evaluations,
    });
    let mut files = vec![
        ("curves.csv".to_string(), curves),
        ("curves_aggregate.csv".to_string(), aggregate),
        ("satisfaction.csv".to_string(), satisfaction),
        ("policies.json".to_string(), to_json(&policies)),
        ("evaluation.json".to_string(), to_json(&evaluation)),
    ];
    let manifest = Manifest {
        experiment: spec.clone(),
        schedules: Schedules::of(&spec.config),
        inputs: BTreeMap::from([
            ("environment_sha256".to_string(), sha256_hex(env_text.as_bytes())),
            ("automaton_sha256".to_string(), sha256_hex(spec_text.as_bytes())),
        ]),
        outputs: files.iter().map(|(name, body)| (name.clone(), sha256_hex(body.as_bytes()))).collect(),
    };
    files.push(("manifest.json".to_string(), to_json(&manifest)));
    Ok(TrainRun { prepared, outcome, summary, evaluations, files })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Writes a run's artifacts into `dir`, creating it if needed.
pub fn write_run(run: &TrainRun, dir: &Path) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for (name, body) in &run.files {
        write(&dir.join(name), body)?;
    }
    Ok(())
}

pub fn load_manifest(path: &Path) -> Result<Manifest, ExperimentError> {
    serde_json::from_str(&read(path)?).map_err(|e| validation(format!("{}: {e}", path.display())))
}

/// Per-method data read back from a run directory.
#[derive(Debug, Clone, PartialEq)]
pub struct RunData {
    pub method: String,
    /// `avg_reward[session][episode]`.
    pub avg_reward: Vec<Vec<f64>>,
    pub sat_probability: Vec<Vec<f64>>,
}

fn read_per_session(path: &Path) -> Result<Vec<Vec<f64>>, ExperimentError> {
    let text = read(path)?;
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let mut rows: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| validation(format!("{}: {e}", path.display())))?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let bad = || validation(format!("{}: malformed row {record:?}", path.display()));
        let episode: usize = field(0).parse().map_err(|_| bad())?;
        let session: usize = field(1).parse().map_err(|_| bad())?;
        let value: f64 = field(2).parse().map_err(|_| bad())?;
        rows.entry(session).or_default().push((episode, value));
    }
    Ok(rows
        .into_values()
        .map(|mut v| {
            v.sort_by_key(|x| x.0);
            v.into_iter().map(|x| x.1).collect()
        })
        .collect())
}

pub fn load_run(dir: &Path) -> Result<RunData, ExperimentError> {
    let manifest = load_manifest(&dir.join("manifest.json"))?;
    Ok(RunData {
        method: manifest.experiment.method.to_string(),
        avg_reward: read_per_session(&dir.join("curves.csv"))?,
        sat_probability: read_per_session(&dir.join("satisfaction.csv"))?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodComparison {
    pub method: String,
    pub sessions: usize,
    pub sessions_satisfying: usize,
    pub first_satisfaction: Vec<Option<usize>>,
    pub median_first_satisfaction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    /// `episode,method,mean,std` rows every 50 episodes (and the last one).
    pub csv: String,
    pub methods: Vec<MethodComparison>,
}

pub const COMPARE_STRIDE: usize = 50;

/// Aligns several runs per episode and summarizes time to satisfaction.
pub fn compare(runs: &[RunData]) -> Result<Comparison, ExperimentError> {
    let Some(first) = runs.first() else {
        return Err(validation("compare needs at least one run"));
    };
    let episodes = first.avg_reward.first().map_or(0, Vec::len);
    for r in runs {
        if r.avg_reward.iter().chain(&r.sat_probability).any(|s| s.len() != episodes) {
            return Err(validation(format!("run `{}` does not have {episodes} episodes in every session", r.method)));
        }
    }
    let mut csv = String::from("episode,method,mean,std\n");
    let mut methods = Vec::new();
    for r in runs {
        let curve = learn::LearningCurve::from_sessions(r.avg_reward.clone());
        for e in (0..episodes).filter(|e| (e + 1) % COMPARE_STRIDE == 0 || e + 1 == episodes) {
            csv.push_str(&format!("{},{},{},{}\n", e + 1, r.method, curve.mean[e], curve.std[e]));
        }
        let firsts: Vec<Option<usize>> =
            r.sat_probability.iter().map(|s| s.iter().position(|&v| v >= 1.0 - SAT_TOLERANCE).map(|i| i + 1)).collect();
        methods.push(MethodComparison {
            method: r.method.clone(),
            sessions: r.sat_probability.len(),
            sessions_satisfying: r
                .sat_probability
                .iter()
                .filter(|s| s.last().is_some_and(|&v| v >= 1.0 - SAT_TOLERANCE))
                .count(),
            median_first_satisfaction: median_episode(&firsts),
            first_satisfaction: firsts,
        });
    }
    Ok(Comparison { csv, methods })
}

pub fn write_comparison(c: &Comparison, dir: &Path) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write(&dir.join("compare.csv"), &c.csv)?;
    write(&dir.join("compare.json"), &to_json(&c.methods))
}

/// Transformations of `automaton`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AutomatonOps {
    pub degeneralize: bool,
    pub augment: bool,
    pub merge: bool,
    pub check_ld: bool,
}

pub struct AutomatonReport {
    pub automaton: TGba,
    pub lines: Vec<String>,
    /// Set when `check_ld` found the result not limit-deterministic.
    pub ld_failure: Option<AutomatonError>,
}

/// Applies degeneralization, augmentation and merging in that order
/// (merging implies augmentation) and describes the result.
pub fn automaton_command(b: &TGba, ops: AutomatonOps) -> AutomatonReport {
    let mut lines = Vec::new();
    let mut current = b.clone();
    if ops.degeneralize {
        current = degeneralize(&current);
    }
    if ops.augment || ops.merge {
        let aug = augment(&current);
        lines.push(format!("reachable augmented states: {}", aug.automaton.num_states()));
        if ops.merge {
            let merged = merge_unaccepting(&aug);
            lines.push(format!("after merge: {}", merged.automaton.num_states()));
            current = merged.automaton;
        } else {
            current = aug.automaton;
        }
    }
    lines.push(format!("states: {}", current.num_states()));
    lines.push(format!("transitions: {}", current.edges().len()));
    lines.push(format!("accepting sets: {}", current.num_acceptance_sets()));
    let mut ld_failure = None;
    if ops.check_ld {
        match check_limit_deterministic(&current) {
            Ok(part) => {
                let names = |set: &std::collections::BTreeSet<usize>| {
                    set.iter().map(|&q| current.state_name(q)).collect::<Vec<_>>().join(", ")
                };
                let split = if part.initial_part.is_empty() {
                    "X_final = all".to_string()
                } else {
                    format!("X_initial = {{{}}}, X_final = {{{}}}", names(&part.initial_part), names(&part.final_part))
                };
                lines.push(format!("limit-deterministic: yes ({split})"));
                lines.push(format!(
                    "single transition into X_final per state (literal count): {}",
                    if part.literal_reading_holds { "holds" } else { "fails" }
                ));
            }
            Err(e) => {
                lines.push(format!("limit-deterministic: no ({e})"));
                ld_failure = Some(e);
            }
        }
    }
    AutomatonReport { automaton: current, lines, ld_failure }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Agreement counts of `accepts_lasso` over all lassos within the bounds.
pub fn language_sweep(
    reference: &dyn Fn(&ltl::LassoWord) -> bool,
    candidate: &dyn Fn(&ltl::LassoWord) -> bool,
    max_prefix: usize,
    max_cycle: usize,
) -> (usize, usize) {
    let words = all_lasso_words(&ltl::props(&["a", "b", "c"]), max_prefix, max_cycle);
    let agree = words.iter().filter(|w| reference(w) == candidate(w)).count();
    (agree, words.len())
}

/// Counts recurrent classes that meet some but not all acceptance sets,
/// over `samples` uniformly random positional policies.
pub fn mixed_class_count(p: &ProductMdp, samples: usize, seed: u64) -> Result<usize, ExperimentError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let full = automata::AccMarks::all(p.num_acceptance_sets());
    let mut violations = 0;
    for _ in 0..samples {
        let choice = (0..p.num_states())
            .map(|s| {
                let rows = p.mdp().enabled(s);
                rows[rng.random_range(0..rows.len())].action
            })
            .collect();
        let pi = PositionalPolicy::total(choice);
        let chain = induce_chain(p.mdp(), &pi).map_err(validation)?;
        for class in decompose(&chain).recurrent_classes {
            let cov = class_coverage(p, &pi, &chain, &class);
            if !cov.is_empty() && cov != full {
                violations += 1;
            }
        }
    }
    Ok(violations)
}

/// The property battery. `fixture_dir` holds `<name>.tgba` files, each
/// optionally next to a `<name>.ltl` formula.
pub fn verify(quick: bool, fixture_dir: &Path) -> Result<VerifyReport, ExperimentError> {
    let (max_prefix, max_cycle) = if quick { (1, 2) } else { (2, 3) };
    let policies = if quick { 100 } else { 1000 };
    let mut checks = Vec::new();
    let mut check = |name: String, passed: bool, detail: String| checks.push(CheckResult { name, passed, detail });

    let mut files: Vec<PathBuf> = fs::read_dir(fixture_dir)
        .map_err(io_err(fixture_dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "tgba"))
        .collect();
    files.sort();
    if files.is_empty() {
        check("fixtures.present".into(), false, format!("no .tgba files in {}", fixture_dir.display()));
    }
    for path in &files {
        let stem = path.file_stem().unwrap_or_default().to_string_lossy().to_string();
        let b = match parse_automaton(&read(path)?) {
            Ok(b) => b,
            Err(e) => {
                check(format!("fixture.{stem}.parse"), false, e.to_string());
                continue;
            }
        };
        check(format!("fixture.{stem}.parse"), true, format!("{} states", b.num_states()));
        if let Some(builtin) = automata::fixture(&stem) {
            let same = builtin == b;
            check(format!("fixture.{stem}.matches_builtin"), same, String::new());
        }
        let ld = check_limit_deterministic(&b);
        let ld_detail = ld.as_ref().err().map(|e| e.to_string()).unwrap_or_default();
        check(format!("fixture.{stem}.limit_deterministic"), ld.is_ok(), ld_detail);

        let ltl_path = path.with_extension("ltl");
        if ltl_path.exists() {
            match ltl::parse_ltl_file(&read(&ltl_path)?) {
                Ok(phi) => {
                    let (agree, total) =
                        language_sweep(&|w| eval_lasso(&phi, w), &|w| accepts_lasso(&b, w), max_prefix, max_cycle);
                    check(format!("fixture.{stem}.formula_agreement"), agree == total, format!("{agree}/{total}"));
                }
                Err(e) => check(format!("fixture.{stem}.formula_parse"), false, e.to_string()),
            }
        }
        let aug = augment(&b);
        let merged = merge_unaccepting(&aug);
        let deg = degeneralize(&b);
        for (label, candidate) in [("augment", &aug.automaton), ("merge", &merged.automaton), ("degeneralize", &deg)] {
            let (agree, total) =
                language_sweep(&|w| accepts_lasso(&b, w), &|w| accepts_lasso(candidate, w), max_prefix, max_cycle);
            check(format!("fixture.{stem}.language.{label}"), agree == total, format!("{agree}/{total}"));
            if ld.is_ok() {
                let kept = check_limit_deterministic(candidate).is_ok();
                check(format!("fixture.{stem}.limit_deterministic.{label}"), kept, String::new());
            }
        }
    }

    let running = automata::fixture_gfa_gfb_gnc();
    let aug = augment(&running);
    let merged = merge_unaccepting(&aug);
    check(
        "augment.state_counts".into(),
        aug.automaton.num_states() == 6 && merged.automaton.num_states() == 4,
        format!("{} before merge, {} after", aug.automaton.num_states(), merged.automaton.num_states()),
    );

    let m = build_gridworld();
    let augmented = build_product(&m, &merged.automaton).map_err(validation)?;
    let plain = build_product(&m, &running).map_err(validation)?;
    let degen = build_product(&m, &augment_and_merge(&degeneralize(&running)).automaton).map_err(validation)?;
    let worst =
        [m.max_row_error(), augmented.mdp().max_row_error(), plain.mdp().max_row_error(), degen.mdp().max_row_error()]
            .into_iter()
            .fold(0.0, f64::max);
    check("stochasticity".into(), worst <= mdp::ROW_SUM_TOLERANCE, format!("max row error {worst:e}"));

    let violations = mixed_class_count(&augmented, policies, 1)?;
    check("classes.all_or_none".into(), violations == 0, format!("{violations} violations over {policies} policies"));

    let cert = check_positional_impossibility(&plain);
    check(
        "impossibility.plain_product".into(),
        cert.is_some(),
        cert.map(|c| format!("{} via {:?}", c.state, c.actions)).unwrap_or_default(),
    );
    check(
        "impossibility.augmented_product".into(),
        check_positional_impossibility(&augmented).is_none(),
        String::new(),
    );

    let cycle = evaluate_policy(&augmented, &grid9_cycle_policy(&augmented, &merged)).map_err(validation)?;
    check(
        "cycle_policy.satisfies".into(),
        cycle.sat_probability >= 1.0 - SAT_TOLERANCE,
        format!("{}", cycle.sat_probability),
    );

    let vi = learn::value_iteration(&augmented, 2.0, 0.95);
    let eval = evaluate_policy(&augmented, &vi.policy).map_err(validation)?;
    check(
        "value_iteration.augmented".into(),
        eval.sat_probability >= 1.0 - SAT_TOLERANCE && eval.residual < mdp::SOLVE_RESIDUAL_TOLERANCE,
        format!("sat {} residual {:e}", eval.sat_probability, eval.residual),
    );
    let vi_plain = learn::value_iteration(&plain, 2.0, 0.95);
    let eval_plain = evaluate_policy(&plain, &vi_plain.policy).map_err(validation)?;
    check(
        "value_iteration.plain".into(),
        eval_plain.sat_probability == 0.0,
        format!("sat {}", eval_plain.sat_probability),
    );

    Ok(VerifyReport { checks })
}

/// Parses a formula and checks that it matches a fixture; convenience for
/// examples.
pub fn fixture_automaton_for(formula: &str) -> Result<TGba, ExperimentError> {
    let phi: Ltl = ltl::parse_ltl(formula).map_err(validation)?;
    automata::fixture_for_formula(&phi)
        .map(|f| (f.build)())
        .ok_or_else(|| validation(format!("no automaton is known for `{phi}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median_episode(&[Some(3), Some(1), Some(2)]), Some(2.0));
        assert_eq!(median_episode(&[Some(4), Some(2)]), Some(3.0));
        assert_eq!(median_episode(&[Some(4), None]), None);
        assert_eq!(median_episode(&[Some(1), Some(2), None]), Some(2.0));
        assert_eq!(median_episode(&[]), None);
    }

    #[test]
    fn methods_parse() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("other".parse::<Method>().is_err());
    }

    #[test]
    fn automaton_command_on_running_example() {
        let b = automata::fixture_gfa_gfb_gnc();
        let r = automaton_command(&b, AutomatonOps { augment: true, merge: true, ..Default::default() });
        assert_eq!(r.automaton.num_states(), 4);
        assert_eq!(r.automaton.num_acceptance_sets(), 2);
        let r = automaton_command(&b, AutomatonOps { check_ld: true, ..Default::default() });
        assert!(r.lines.contains(&"limit-deterministic: yes (X_final = all)".to_string()));
        let r = automaton_command(&b, AutomatonOps { degeneralize: true, ..Default::default() });
        assert_eq!(r.automaton.num_acceptance_sets(), 1);
    }

    #[test]
    fn spec_sources() {
        assert!(SpecSource("gfa_gfb_gnc".into()).load().is_ok());
        assert!(matches!(SpecSource("nope".into()).load(), Err(ExperimentError::Validation(_))));
        assert!(Environment::Named("grid9".into()).load().is_ok());
        assert!(Environment::Named("grid10".into()).load().is_err());
        assert!(fixture_automaton_for("G F a & G F b & G !c").is_ok());
        assert!(fixture_automaton_for("G a").is_err());
    }

    #[test]
    fn compare_rejects_mismatched_runs() {
        let a = RunData { method: "a".into(), avg_reward: vec![vec![0.0; 3]], sat_probability: vec![vec![0.0; 3]] };
        let b = RunData { method: "b".into(), avg_reward: vec![vec![0.0; 4]], sat_probability: vec![vec![0.0; 4]] };
        assert!(compare(&[a.clone(), b]).is_err());
        let single = compare(std::slice::from_ref(&a)).unwrap();
        assert_eq!(single.csv, "episode,method,mean,std\n3,a,0,0\n");
    }
}
