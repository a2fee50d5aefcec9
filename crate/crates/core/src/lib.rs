//! Age of Incorrect Information (AoII) under threshold policies and random
//! transmission delay.
//!
//! A transmitter samples a two-state symmetric Markov source (flip
//! probability `p` per slot) and pushes updates to a receiver over an
//! error-free channel whose per-update delay `T` is i.i.d. on `{1..t_max}`.
//! Under threshold policy `τ` the transmitter sends a fresh sample whenever
//! the channel is idle and the AoII is at least `τ`. Two delay-truncation
//! modes are supported:
//!
//! * **A1** — delay capped at `t_max`, delivery guaranteed (pmf sums to 1);
//! * **A2** — transmissions lasting past `t_max` slots are discarded at the
//!   end of slot `t_max` (overflow mass `p_{t+}`).
//!
//! The crate computes the stationary expected AoII of a threshold policy two
//! independent ways:
//!
//! * exactly, by folding the busy states out of the chain ([`kernel`]),
//!   solving a finite linear system for the idle-state stationary law
//!   ([`stationary`]) and assembling per-transmission AoII sums plus an
//!   analytic tail series ([`cost`], [`aoii`]);
//! * empirically, by a seedable slotted Monte Carlo simulation ([`sim`]).
//!
//! Brute-force validators (exhaustive source-path enumeration and a
//! truncated full-state chain with power iteration) live in [`oracle`] and
//! back the test suite.

pub mod aoii;
pub mod cost;
pub mod kernel;
pub mod model;
pub mod oracle;
pub mod sim;
pub mod stationary;

mod error;

pub use aoii::{expected_aoii, expected_aoii_infinite_tau, tail_sigma, AoiiReport};
pub use cost::{
    action_cost, conditional_step_cost, conditional_transmission_cost, tail_cost_increment,
};
pub use error::Error;
pub use kernel::{
    aggregate_kernel, conditional_kernel, terminated_kernel, verify_kernel_properties,
};
pub use model::{
    expected_transmission_time, geometric_delay, same_state_prob, zipf_delay, Action, Assumption,
    DelaySpec, ModelParams, PolicyThreshold,
};
pub use sim::{run as run_simulation, run_traced, sample_delay, SimConfig, SimResult};
pub use stationary::{
    solve_stationary, solve_stationary_smalltau, stationary_never_transmit, StationarySolution,
};
