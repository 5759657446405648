//! Finite-resolution dynamics over overlapping open box covers.
//!
//! The crate builds rigorous combinatorial representations of dynamical maps
//! at a chosen finite resolution and decides whether the represented dynamics
//! is transitive or mixing in linear time:
//!
//! * [`interval`] — open-interval arithmetic with outward rounding, the atom
//!   of every rigorous computation here;
//! * [`cover`] — overlapping open box covers of a rectangular region, their
//!   inner/outer resolution bounds, and essentialization of 1-D covers;
//! * [`dynmap`] — rigorous box-image evaluators for the Hénon family and the
//!   1-D toy maps used by the test oracles;
//! * [`combin`] — combinatorial multivalued maps over finite covers:
//!   composition, inversion, the finer/coarser relation, and exact minimal
//!   representations of 1-D maps;
//! * [`graph`] — compressed sparse row digraphs, iterative Tarjan SCC, the
//!   graph-period GCD scan, and the transitivity/mixing verdicts;
//! * [`construct`] — the worklist construction that grows a cover from a seed
//!   point until the combinatorial image closes up;
//! * [`cli`] — run configuration, analysis reports, and the verify / sweep /
//!   analyze-graph entry points behind the `finres` binary.
//!
//! Every runnable capability has a dedicated example under `examples/`; start
//! with `henon_verify` for the end-to-end pipeline.

pub mod cli;
pub mod combin;
pub mod construct;
pub mod cover;
pub mod dynmap;
pub mod graph;
pub mod hexfloat;
pub mod interval;

pub use interval::{Metric, OInterval, ORect};
