//! Counter degeneralization of a three-set automaton, checked on all short lassos.
use ldgba_rl::automata::{accepts_lasso, degeneralize, fixture_gfa_gfb_gfc};
use ldgba_rl::ltl::{all_lasso_words, props};

fn main() {
    let b = fixture_gfa_gfb_gfc();
    let d = degeneralize(&b);
    println!(
        "{} states, {} sets -> {} states, {} set",
        b.num_states(),
        b.num_acceptance_sets(),
        d.num_states(),
        d.num_acceptance_sets()
    );
    let words = all_lasso_words(&props(&["a", "b", "c"]), 1, 2);
    let agree = words.iter().filter(|w| accepts_lasso(&b, w) == accepts_lasso(&d, w)).count();
    println!("language agreement: {agree}/{}", words.len());
}
