//! The nine-room gridworld: induce a chain from a policy, split it into
//! transient states and recurrent classes, and compute reachability.
use ldgba_rl::mdp::{
    build_gridworld, decompose, grid_to, induce_chain, reach_probability, PositionalPolicy, GRID_DOWN, GRID_RIGHT,
};

fn main() {
    let m = build_gridworld();
    println!("{} states, {} actions, max row error {:e}", m.num_states(), m.num_actions(), m.max_row_error());
    let choice = (0..m.num_states())
        .map(|s| {
            if m.row(s, GRID_RIGHT).is_some() {
                GRID_RIGHT
            } else if m.row(s, GRID_DOWN).is_some() {
                GRID_DOWN
            } else {
                grid_to(0)
            }
        })
        .collect();
    let pi = PositionalPolicy::total(choice);
    let chain = induce_chain(&m, &pi).expect("policy is enabled");
    let dec = decompose(&chain);
    let name = |l: usize| m.state_name(chain.states[l]).to_string();
    println!("transient: {:?}", dec.transient.iter().map(|&l| name(l)).collect::<Vec<_>>());
    for class in &dec.recurrent_classes {
        println!("recurrent: {:?}", class.iter().map(|&l| name(l)).collect::<Vec<_>>());
    }
    let target = chain.local_id(m.state_id("s8").unwrap()).into_iter().collect::<Vec<_>>();
    let probs = reach_probability(&chain, &target).expect("solvable");
    println!("P(reach s8) from {}: {}", m.state_name(m.initial()), probs[chain.initial]);
}
