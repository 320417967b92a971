//! Analysis engine for the two-player counter-removal allocation game.
//!
//! Each player spreads a quota of `n` counters over `k` boxes. Every turn a
//! box is drawn (once for both players under the common-throw régime, once
//! per player under separate throws) and a player holding a counter in the
//! drawn box removes one. The first player to clear all counters wins; a
//! simultaneous finish is a draw.

pub mod common;
pub mod error;
mod joint;
pub mod quad;
pub mod removal;
pub mod reproduce;
pub mod scan;
pub mod separate;
pub mod simulate;
pub mod solver;
pub mod specfun;
pub mod strategy;

pub use common::PayoffBreakdown;
pub use error::{GameError, Result};
pub use simulate::SimResult;
pub use solver::{Engine, GameConfig, GameSolution, PayoffMatrix, Regime};
pub use specfun::Tolerance;
pub use strategy::{ProbVector, Strategy};
