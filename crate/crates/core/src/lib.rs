//! On-line orientation of a random edge process and extraction of a
//! directed Hamilton cycle from the oriented graph.
//!
//! The pipeline runs in stages:
//!
//! 1. [`process`] generates the edge process (or the graph process lifted to
//!    an edge process with redundant "blue" events) and finds the time `m*`
//!    at which the minimum degree first reaches 2.
//! 2. [`orient`] orients every edge on arrival using saturation counters and
//!    per-vertex alternation.
//! 3. [`classify`] splits the vertices into saturated, blossoming and
//!    restricted classes and measures the typicality conditions.
//! 4. [`fiveinout`] picks in/out neighbour sets per vertex and builds the
//!    bipartite double cover.
//! 5. [`factor`] finds a randomized perfect matching, i.e. a 1-factor.
//! 6. [`compress`] contracts the unsaturated vertices out of the factor.
//! 7. [`merge`] joins the cycles into one with rotations and closures.
//!
//! [`oracle`] holds the exact small-instance checks and [`harness`] the
//! trial runner used by the CLI.

pub mod classify;
pub mod compress;
pub mod factor;
pub mod fiveinout;
pub mod harness;
pub mod merge;
pub mod oracle;
pub mod orient;
pub mod process;
pub mod rng;

pub use harness::{run_baseline, run_sweep, run_trial, Stage, TrialConfig, TrialResult};
pub use process::{EdgeEvent, EventKind, Mode, Preset, ProcessConfig};
