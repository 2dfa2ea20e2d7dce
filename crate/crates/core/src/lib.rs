//! Electric vehicle scheduling by column generation.
//!
//! Charging arcs between timetabled services are preprocessed into one
//! acyclic multigraph per depot ([`charge_arcs`]). The set-partitioning
//! master problem is then solved by column generation ([`master`]) with a
//! labeling pricing algorithm ([`pricing`]), either exactly by
//! branch-and-price or heuristically by sparsification and diving
//! ([`sparsify`], [`search`]).

pub mod charge_arcs;
pub mod error;
pub mod io;
pub mod master;
pub mod model;
pub mod oracle;
pub mod pricing;
pub mod search;
pub mod solution;
pub mod sparsify;

pub use error::{ArcError, IoError, LpError, ModelError, SolveError};
pub use model::{pos, Battery, ChargeCurve, ChargeModel, Element, Instance, FEAS_EPS};
