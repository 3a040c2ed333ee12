//! Without memory no positional policy satisfies GF a & GF b & G !c on the
//! gridworld; with memory a cycling policy satisfies it with probability 1.
use ldgba_rl::augment::augment_and_merge;
use ldgba_rl::automata::fixture_gfa_gfb_gnc;
use ldgba_rl::mdp::build_gridworld;
use ldgba_rl::product::{build_product, check_positional_impossibility, evaluate_policy, grid9_cycle_policy};

fn main() {
    let m = build_gridworld();
    let b = fixture_gfa_gfb_gnc();
    let plain = build_product(&m, &b).expect("product");
    match check_positional_impossibility(&plain) {
        Some(c) => println!("plain product: {} needs sets {:?} via {:?}", c.state, c.sets, c.actions),
        None => println!("plain product: no certificate"),
    }
    let aug = augment_and_merge(&b);
    let p = build_product(&m, &aug.automaton).expect("product");
    println!("augmented product: {} states, certificate: {:?}", p.num_states(), check_positional_impossibility(&p));
    let eval = evaluate_policy(&p, &grid9_cycle_policy(&p, &aug)).expect("evaluates");
    println!("cycle policy: satisfaction probability {}", eval.sat_probability);
    for class in eval.classes.iter().filter(|c| c.accepting) {
        for (j, w) in class.witnesses.iter().enumerate() {
            println!("  F_{}: {}", j + 1, w.as_deref().unwrap_or("-"));
        }
    }
}
