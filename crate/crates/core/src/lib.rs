//! Exact, witness-producing computations in `L⁰`-modules over atomic
//! probability spaces: essential suprema, `L⁰`-seminorms and their induced
//! topologies, gauge functions, countable concatenation closure, and a
//! verification harness built on top of them.

pub mod cli;
pub mod error;
pub mod l0;
pub mod prob_space;
pub mod rational;
pub mod sampling;
pub mod seminorms;
pub mod sets;
pub mod theorems;
pub mod verdict;

pub use error::L0Error;
pub use l0::{ExtRandomVar, RandomVar};
pub use prob_space::{AtomSpace, Event, Partition};
pub use rational::{ExtRational, Rational};
