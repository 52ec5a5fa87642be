//! Analysis, optimization, verification and an operational codec for
//! base-station-assisted cooperative regenerating codes.
//!
//! A cell of `n` storage nodes keeps an erasure-coded file. When `t` nodes
//! have departed, the `t` newcomers are repaired jointly: each downloads `β`
//! symbols from `d` live helpers, up to `b_l·β` symbols from base-station
//! layer `l` (at per-symbol cost `w_l`), and `β'` symbols from each of the
//! other newcomers.
//!
//! * [`model`] holds the shared parameter and variable types.
//! * [`bounds`] evaluates the repair cost and the file-size bound, both in
//!   closed form and by enumerating cut compositions.
//! * [`optimizer`] solves the cost/storage trade-off exactly and implements
//!   the closed-form operating points and the layer-count search.
//! * [`flowgraph`] builds information flow graphs and computes exact min-cuts.
//! * [`gf`] and [`codec`] implement the exact minimum-storage construction.
//! * [`simulator`] drives the codec through lazy-repair lifecycles.
//! * [`verify`] runs the oracle sweeps used by the `verify` command.

pub mod bounds;
pub mod codec;
pub mod flowgraph;
pub mod gf;
pub mod model;
pub mod numeric;
pub mod optimizer;
pub mod simulator;
pub mod verify;

pub use model::{
    selector, validate_params, CostLedger, LayerSelector, ModelError, OperatingPoint,
    ParamViolation, RepairVariables, SystemParams,
};
pub use numeric::Rational;
