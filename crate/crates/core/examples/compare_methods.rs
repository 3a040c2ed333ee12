//! Train all three methods on the same seed and compare time to satisfaction.
use ldgba_rl::experiment::{run_train, summarize, Environment, ExperimentSpec, Method, SpecSource};
use ldgba_rl::learn::TrainConfig;

fn main() {
    for method in Method::ALL {
        let spec = ExperimentSpec {
            env: Environment::Named("grid9".into()),
            spec: SpecSource("gfa_gfb_gnc".into()),
            method,
            config: TrainConfig::desk(),
        };
        let run = run_train(&spec).expect("run");
        let s = summarize(method, &run.prepared.product, &run.outcome);
        println!(
            "{method:>13}: {}/{} sessions at probability 1, median first satisfaction {:?}",
            s.sessions_satisfying,
            s.sessions.len(),
            s.median_first_satisfaction
        );
    }
}
