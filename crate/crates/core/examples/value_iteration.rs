//! Solve the discounted accepting-reward problem exactly and check the
//! resulting policy satisfies the formula.
use ldgba_rl::augment::augment_and_merge;
use ldgba_rl::automata::fixture_gfa_gfb_gnc;
use ldgba_rl::learn::value_iteration;
use ldgba_rl::mdp::build_gridworld;
use ldgba_rl::product::{build_product, evaluate_policy};

fn main() {
    let aug = augment_and_merge(&fixture_gfa_gfb_gnc());
    let p = build_product(&build_gridworld(), &aug.automaton).expect("product");
    let vi = value_iteration(&p, 2.0, 0.95);
    println!("converged in {} iterations, V(initial) = {:.4}", vi.iterations, vi.values[p.initial()]);
    let eval = evaluate_policy(&p, &vi.policy).expect("evaluates");
    println!("satisfaction probability {} (residual {:e})", eval.sat_probability, eval.residual);
}
