//! Q-learning on the augmented product with a small budget.
use ldgba_rl::augment::augment_and_merge;
use ldgba_rl::automata::fixture_gfa_gfb_gnc;
use ldgba_rl::learn::{train, TrainConfig};
use ldgba_rl::mdp::build_gridworld;
use ldgba_rl::product::{build_product, RewardScheme};

fn main() {
    let aug = augment_and_merge(&fixture_gfa_gfb_gnc());
    let p = build_product(&build_gridworld(), &aug.automaton).expect("product");
    let cfg = TrainConfig { episodes: 100, sessions: 4, ..TrainConfig::desk() };
    let out = train(&p, RewardScheme::Accepting { r_p: cfg.r_p }, &cfg).expect("valid config");
    for (k, s) in out.sessions.iter().enumerate() {
        println!(
            "session {k}: final sat {}, first satisfied at episode {:?}",
            s.final_sat_probability,
            s.first_satisfaction()
        );
    }
    for e in (9..cfg.episodes).step_by(10) {
        println!("episode {:>3}: mean avg reward {:.4} ± {:.4}", e + 1, out.curve.mean[e], out.curve.std[e]);
    }
}
