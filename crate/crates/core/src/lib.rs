//! Policy synthesis for labeled MDPs under LTL objectives via Q-learning on
//! the product with a memory-augmented limit-deterministic generalized Büchi
//! automaton.
//!
//! Modules, from the bottom up:
//!
//! - [`ltl`]: formulas, parsing and exact evaluation on lasso words.
//! - [`automata`]: transition-based generalized Büchi automata, their text
//!   format, limit-determinism checking, degeneralization and a lasso
//!   acceptance oracle.
//! - [`augment`]: memory vectors and the augmented automaton.
//! - [`mdp`]: labeled MDPs, the `grid9` environment and Markov-chain analysis.
//! - [`product`]: product MDPs, reward schemes and exact policy evaluation.
//! - [`learn`]: tabular Q-learning and a value-iteration oracle.
//! - [`experiment`]: the end-to-end runs behind the `ldgba` command.

pub mod augment;
pub mod automata;
pub mod experiment;
pub mod graph;
pub mod learn;
pub mod ltl;
pub mod mdp;
pub mod product;
