//! Memory augmentation of the two-state automaton, before and after merging.
use ldgba_rl::augment::{augment, merge_unaccepting};
use ldgba_rl::automata::fixture_gfa_gfb_gnc;

fn main() {
    let aug = augment(&fixture_gfa_gfb_gnc());
    println!("augmented states ({}):", aug.automaton.num_states());
    for q in 0..aug.automaton.num_states() {
        println!("  {}", aug.automaton.state_name(q));
    }
    let merged = merge_unaccepting(&aug);
    println!("after merge ({}):", merged.automaton.num_states());
    print!("{}", merged.automaton.to_text());
}
