//! Acceptance battery. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use ldgba_rl::augment::{augment, augment_and_merge, merge_unaccepting};
use ldgba_rl::automata::{accepts_lasso, degeneralize, fixture_gfa_gfb_gnc};
use ldgba_rl::experiment::{mixed_class_count, run_train, Environment, ExperimentSpec, Method, SpecSource, TrainRun};
use ldgba_rl::learn::{value_iteration, TrainConfig, SAT_TOLERANCE};
use ldgba_rl::ltl::{all_lasso_words, eval_lasso, formula_gfa_gfb_gnc, props};
use ldgba_rl::mdp::{
    build_gridworld, induce_chain, reach_probability_with_residual, MarkovChain, PositionalPolicy, ROW_SUM_TOLERANCE,
    SOLVE_RESIDUAL_TOLERANCE,
};
use ldgba_rl::product::{build_product, check_positional_impossibility, evaluate_policy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into() }
}

fn timed(limit: Duration, f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let v = f();
    let elapsed = start.elapsed();
    let within = elapsed <= limit;
    Verdict {
        passed: v.passed && within,
        detail: format!("{}; {:.2}s (limit {}s)", v.detail, elapsed.as_secs_f64(), limit.as_secs()),
    }
}

fn sweep(candidate: &dyn Fn(&ldgba_rl::ltl::LassoWord) -> bool) -> (usize, usize) {
    let b = fixture_gfa_gfb_gnc();
    let words = all_lasso_words(&props(&["a", "b", "c"]), 2, 3);
    let agree = words.iter().filter(|w| accepts_lasso(&b, w) == candidate(w)).count();
    (agree, words.len())
}

fn language_preservation() -> Verdict {
    timed(Duration::from_secs(60), || {
        let aug = augment(&fixture_gfa_gfb_gnc());
        let merged = merge_unaccepting(&aug);
        let (a1, n) = sweep(&|w| accepts_lasso(&aug.automaton, w));
        let (a2, _) = sweep(&|w| accepts_lasso(&merged.automaton, w));
        verdict(a1 == n && a2 == n, format!("augmented {a1}/{n}, merged {a2}/{n}"))
    })
}

fn formula_agreement() -> Verdict {
    timed(Duration::from_secs(60), || {
        let phi = formula_gfa_gfb_gnc();
        let (agree, n) = sweep(&|w| eval_lasso(&phi, w));
        verdict(agree == n, format!("{agree}/{n}"))
    })
}

fn degeneralization() -> Verdict {
    timed(Duration::from_secs(60), || {
        let d = degeneralize(&fixture_gfa_gfb_gnc());
        let (agree, n) = sweep(&|w| accepts_lasso(&d, w));
        verdict(agree == n, format!("{agree}/{n}"))
    })
}

fn augmented_structure() -> Verdict {
    let aug = augment(&fixture_gfa_gfb_gnc());
    let merged = merge_unaccepting(&aug);
    let (before, after) = (aug.automaton.num_states(), merged.automaton.num_states());
    verdict(before == 6 && after == 4, format!("{before} states before merge, {after} after"))
}

fn classes_all_or_none() -> Verdict {
    timed(Duration::from_secs(60), || {
        let aug = augment_and_merge(&fixture_gfa_gfb_gnc());
        let p = build_product(&build_gridworld(), &aug.automaton).expect("product");
        let samples = 2000;
        match mixed_class_count(&p, samples, 7) {
            Ok(v) => verdict(v == 0, format!("{v} violations over {samples} random policies")),
            Err(e) => verdict(false, e.to_string()),
        }
    })
}

fn value_iteration_and_impossibility() -> Verdict {
    let m = build_gridworld();
    let b = fixture_gfa_gfb_gnc();
    let aug = augment_and_merge(&b);
    let p = build_product(&m, &aug.automaton).expect("product");
    let eval = evaluate_policy(&p, &value_iteration(&p, 2.0, 0.95).policy).expect("evaluates");
    let plain = build_product(&m, &b).expect("product");
    let cert = check_positional_impossibility(&plain);
    let eval_plain = evaluate_policy(&plain, &value_iteration(&plain, 2.0, 0.95).policy).expect("evaluates");
    let passed = eval.sat_probability >= 1.0 - SAT_TOLERANCE
        && eval.residual < SOLVE_RESIDUAL_TOLERANCE
        && cert.is_some()
        && eval_plain.sat_probability == 0.0;
    verdict(
        passed,
        format!(
            "augmented VI sat {} (residual {:e}); plain certificate {}; plain VI sat {}",
            eval.sat_probability,
            eval.residual,
            cert.map_or("none".to_string(), |c| c.state),
            eval_plain.sat_probability
        ),
    )
}

fn desk(method: Method) -> TrainRun {
    let spec = ExperimentSpec {
        env: Environment::Named("grid9".into()),
        spec: SpecSource("gfa_gfb_gnc".into()),
        method,
        config: TrainConfig::desk(),
    };
    run_train(&spec).expect("desk run")
}

fn learning(aug: &TrainRun, deg: &TrainRun, elapsed: Duration) -> Verdict {
    let a = &aug.summary;
    let d = &deg.summary;
    let faster = match (a.median_first_satisfaction, d.median_first_satisfaction) {
        (Some(x), Some(y)) => x < y,
        (Some(_), None) => true,
        _ => false,
    };
    let fmt = |m: Option<f64>| m.map_or("never".to_string(), |v| v.to_string());
    verdict(
        a.sessions_satisfying >= 9 && faster && elapsed <= Duration::from_secs(600),
        format!(
            "augmented {}/10 at sat 1, median first satisfaction {} vs degeneralized {}; {:.2}s",
            a.sessions_satisfying,
            fmt(a.median_first_satisfaction),
            fmt(d.median_first_satisfaction),
            elapsed.as_secs_f64()
        ),
    )
}

fn frontier(run: &TrainRun) -> Verdict {
    let zeros = run.outcome.sessions.iter().filter(|s| s.final_sat_probability == 0.0).count();
    let n = run.outcome.sessions.len();
    verdict(zeros == n && n == 10, format!("{zeros}/{n} sessions end at sat 0"))
}

fn random_chain(rng: &mut ChaCha8Rng) -> MarkovChain {
    let n = rng.random_range(4..=10);
    let rows = (0..n)
        .map(|_| {
            let k = rng.random_range(1..=3);
            let mut succ: Vec<usize> = (0..k).map(|_| rng.random_range(0..n)).collect();
            succ.sort_unstable();
            succ.dedup();
            let w: Vec<f64> = succ.iter().map(|_| rng.random_range(0.1..1.0)).collect();
            let total: f64 = w.iter().sum();
            let mut row: Vec<(usize, f64)> = succ.into_iter().zip(w).map(|(s, x)| (s, x / total)).collect();
            // Put the rounding error on the last entry so the row sums to 1.
            let rest: f64 = row[..row.len() - 1].iter().map(|e| e.1).sum();
            row.last_mut().unwrap().1 = 1.0 - rest;
            row
        })
        .collect();
    MarkovChain::new(rows, 0).expect("stochastic")
}

/// Monte Carlo estimate of reaching `target` from the initial state, each run
/// capped at `steps` and stopped once the target is hit or unreachable.
fn monte_carlo(mc: &MarkovChain, target: usize, runs: usize, steps: usize, rng: &mut ChaCha8Rng) -> f64 {
    let succ = mc.successors();
    let live = ldgba_rl::graph::can_reach(&succ, [target]);
    let mut hits = 0usize;
    for _ in 0..runs {
        let mut s = mc.initial;
        for _ in 0..steps {
            if s == target {
                break;
            }
            if !live[s] {
                break;
            }
            let u: f64 = rng.random();
            let row = &mc.rows[s];
            let mut acc = 0.0;
            s = row.last().unwrap().0;
            for &(t, p) in row {
                acc += p;
                if u < acc {
                    s = t;
                    break;
                }
            }
        }
        hits += usize::from(s == target);
    }
    hits as f64 / runs as f64
}

fn numerical_hygiene() -> Verdict {
    let m = build_gridworld();
    let b = fixture_gfa_gfb_gnc();
    let aug = augment_and_merge(&b);
    let products = [
        build_product(&m, &b).expect("product"),
        build_product(&m, &aug.automaton).expect("product"),
        build_product(&m, &augment_and_merge(&degeneralize(&b)).automaton).expect("product"),
    ];
    let mut worst = m.max_row_error();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for p in &products {
        worst = worst.max(p.mdp().max_row_error());
        for _ in 0..50 {
            let choice = (0..p.num_states())
                .map(|s| {
                    let rows = p.mdp().enabled(s);
                    rows[rng.random_range(0..rows.len())].action
                })
                .collect();
            let chain = induce_chain(p.mdp(), &PositionalPolicy::total(choice)).expect("chain");
            worst = worst.max(chain.max_row_error());
        }
    }

    let mut worst_z: f64 = 0.0;
    let mut failures = 0;
    let mut max_residual: f64 = 0.0;
    for _ in 0..20 {
        let mc = random_chain(&mut rng);
        worst = worst.max(mc.max_row_error());
        let target = mc.num_states() - 1;
        let (exact, residual) = reach_probability_with_residual(&mc, &[target]).expect("solvable");
        max_residual = max_residual.max(residual);
        let runs = 10_000;
        let estimate = monte_carlo(&mc, target, runs, 10_000, &mut rng);
        let p = exact[mc.initial];
        let se = (p * (1.0 - p) / runs as f64).sqrt();
        let diff = (estimate - p).abs();
        if se > 0.0 {
            worst_z = worst_z.max(diff / se);
        }
        if diff > 3.0 * se + 1e-12 {
            failures += 1;
        }
    }
    verdict(
        worst <= ROW_SUM_TOLERANCE && failures == 0 && max_residual < SOLVE_RESIDUAL_TOLERANCE,
        format!(
            "max row error {worst:e}; {failures}/20 chains outside 3 SE (largest |z| {worst_z:.2}); max residual {max_residual:e}"
        ),
    )
}

fn determinism(first: &TrainRun) -> Verdict {
    let again = desk(Method::Augmented);
    let csvs = |r: &TrainRun| -> Vec<(String, String)> {
        r.files.iter().filter(|(n, _)| n.ends_with(".csv")).cloned().collect()
    };
    let (a, b) = (csvs(first), csvs(&again));
    let same = !a.is_empty() && a == b;
    verdict(same, format!("{} CSV files compared", a.len()))
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Verdict)> = vec![
        ("1 language preservation", language_preservation()),
        ("2 formula/automaton agreement", formula_agreement()),
        ("3 degeneralization soundness", degeneralization()),
        ("4 augmented structure", augmented_structure()),
        ("5 recurrent classes all-or-none", classes_all_or_none()),
        ("6 value iteration and impossibility", value_iteration_and_impossibility()),
    ];
    let start = Instant::now();
    let aug = desk(Method::Augmented);
    let deg = desk(Method::Degeneralized);
    let elapsed = start.elapsed();
    results.push(("7 learning reproduction", learning(&aug, &deg, elapsed)));
    results.push(("8 frontier baseline", frontier(&desk(Method::Frontier))));
    results.push(("9 numerical hygiene", numerical_hygiene()));
    results.push(("10 determinism", determinism(&aug)));

    for (name, v) in &results {
        println!("{} criterion {name}: {}", if v.passed { "PASS" } else { "FAIL" }, v.detail);
    }
    if results.iter().all(|(_, v)| v.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
