use thiserror::Error;

/// Errors raised by the data model and the battery physics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("battery level {level} outside [0, {capacity}]")]
    LevelOutOfRange { level: f64, capacity: f64 },
    #[error("negative charging duration {0}")]
    NegativeDuration(f64),
    #[error("invalid charge curve: {0}")]
    InvalidCurve(String),
    #[error("invalid instance field `{field}`: {reason}")]
    InvalidInstance { field: String, reason: String },
}

/// Errors raised while building station sequences and charging arcs.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArcError {
    #[error("station sequence violates its time window by {excess:.6}")]
    TimeWindow { excess: f64 },
    #[error("leg {leg} of the station sequence needs {energy} > capacity {capacity}")]
    LegEnergy {
        leg: usize,
        energy: f64,
        capacity: f64,
    },
    #[error("linear closed forms requested under a non-linear charge model")]
    NotLinear,
    #[error("arc has no charging station")]
    NoStation,
}

/// Errors from the LP layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("simplex hit the iteration limit ({iterations}) with objective {objective}")]
    IterationLimit { iterations: usize, objective: f64 },
    #[error("singular basis during refactorization at iteration {iteration}")]
    SingularBasis { iteration: usize },
    #[error("numerical failure at iteration {iteration}: {reason}")]
    Numerical { iteration: usize, reason: String },
}

/// Errors from the column generation and tree search layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("nothing to branch on: the LP solution is integral")]
    IntegralSolution,
    #[error("node is infeasible")]
    Infeasible,
    #[error("{0}")]
    Model(#[from] ModelError),
    #[error("oracle size guard: {0}")]
    SizeGuard(String),
}

/// Errors from reading and writing instance or solution files.
#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in `{path}`: {message}")]
    Parse {
        line: usize,
        column: usize,
        /// Field path such as `travel_energy[3]`, `.` for the document.
        path: String,
        message: String,
    },
    #[error("schema error in `{field}`: {reason}")]
    Schema { field: String, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}
