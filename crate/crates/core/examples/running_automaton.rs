//! The two-state automaton for GF a & GF b & G !c: text form, acceptance on
//! lassos, and its limit-deterministic partition.
use ldgba_rl::automata::{accepts_lasso, check_limit_deterministic, fixture_gfa_gfb_gnc};
use ldgba_rl::ltl::LassoWord;

fn main() {
    let b = fixture_gfa_gfb_gnc();
    print!("{}", b.to_text());
    let part = check_limit_deterministic(&b).expect("limit-deterministic");
    println!("initial part: {:?}, final part: {:?}", part.initial_part, part.final_part);
    let w = LassoWord::from_names(&[], &[&["a"], &["b"]]);
    println!("accepts (a b)^ω: {}", accepts_lasso(&b, &w));
    let w = LassoWord::from_names(&[], &[&["a", "c"], &["b"]]);
    println!("accepts ({{a,c}} b)^ω: {}", accepts_lasso(&b, &w));
}
