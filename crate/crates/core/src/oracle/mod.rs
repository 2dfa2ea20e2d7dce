//! Brute-force references used by the tests and the `validate` mode:
//! literal schedule simulation, route validation, exhaustive route
//! enumeration, exact set partitioning on small instances, and a seeded
//! instance generator.
//!
//! Exponential by design. Nothing here depends on the pricing or master
//! code.

mod enumerate;
mod generate;
mod simulate;
mod validate;

pub use enumerate::{enumerate_routes, exact_small_solve, EnumeratedRoute};
pub use generate::{generate, GeneratorConfig};
pub use simulate::{best_sampled_level, just_enough_dwell, simulate_schedule, Legs, Trace};
pub use validate::{validate, validate_route, ValidationReport, Violation, ViolationKind};
