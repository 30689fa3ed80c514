//! Arc-confidence estimation for DAG structure learning with a known
//! variable ordering.
//!
//! Given a structure learned from discrete data, this crate estimates how many
//! of its arcs are non-spurious in two ways:
//!
//! - [`bayes`]: the posterior expected number of true arcs, exact under a
//!   BDeu prior with bounded parent-set size.
//! - [`fdr`]: a permutation-null estimate of the false discovery rate of the
//!   search procedure that produced the structure.
//!
//! Around these sit the scoring functions ([`scoring`], [`noisyor`]), greedy
//! search ([`search`]), synthetic generators ([`synth`]) and the calibration
//! harness ([`evalharness`]).
//!
//! The crate is `no_std` and needs only `alloc`. Parallelism is injected
//! through [`exec::Executor`].
#![no_std]

extern crate alloc;

pub mod bayes;
pub mod error;
pub mod evalharness;
pub mod exec;
pub mod fdr;
pub mod math;
pub mod model;
pub mod noisyor;
pub mod rng;
pub mod scoring;
pub mod search;
pub mod synth;

pub use error::{Error, Result, Violation};
pub use exec::{Executor, Sequential};
pub use model::{arc_overlap, candidate_parents, Arc, ArcSet, Dag, Dataset, VarOrder};
pub use scoring::{FamilyScore, ScoreConfig, ScoreFamily};
