//! Parse a formula and evaluate it on a few lasso words.
use ldgba_rl::ltl::{eval_lasso, parse_ltl, LassoWord};

fn main() {
    let phi = parse_ltl("G F a & G F b & G !c").expect("formula parses");
    println!("formula: {phi}");
    let words = [
        ("(a b)^ω", LassoWord::from_names(&[], &[&["a"], &["b"]])),
        ("{a,b}^ω", LassoWord::from_names(&[], &[&["a", "b"]])),
        ("c (a b)^ω", LassoWord::from_names(&[&["c"]], &[&["a"], &["b"]])),
        ("a^ω", LassoWord::from_names(&[], &[&["a"]])),
    ];
    for (label, w) in &words {
        println!("{label:>12}: {}", eval_lasso(&phi, w));
    }
}
