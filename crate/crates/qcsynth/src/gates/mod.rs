//! Gate catalog and matrix algebra: complex unitaries, Kronecker lifting
//! onto N-qubit registers, angle-discretized parametrized gates, and the
//! real embedding that makes downstream constraints real-valued bilinear.

mod catalog;
mod defs;
mod matrix;
pub mod random;
mod targets;

pub use catalog::{build_input_set, AngleGrid, CatalogEntry, Discretization, GateCatalog, DEDUP_TOL};
pub use defs::{
    fmt_angle, lift_gate, lift_single, parse_angle, parse_gate, u3_matrix, AngleConvention, Atom,
    AtomGate, ControlledBase, GateDef, GateKind, ParamGate, SingleGate,
};
pub use matrix::{kron, kron_all, ComplexMatrix, RealEmbedding, UNITARY_TOL};
pub use targets::target_lookup;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GateError {
    #[error("cannot parse gate `{0}`: {1}")]
    Parse(String, String),
    #[error("qubit {qubit} out of range for {n} qubits")]
    Placement { qubit: usize, n: usize },
    #[error("qubit {0} used twice in one gate placement")]
    DuplicatePlacement(usize),
    #[error("gate `{0}` has unresolved angle parameters")]
    UnresolvedAngles(String),
    #[error("missing or empty angle discretization for `{0}`")]
    EmptyDiscretization(String),
    #[error("duplicate gate name after expansion: `{0}`")]
    DuplicateName(String),
    #[error("input gate `{0}` is not unitary (error {1:.3e})")]
    NonUnitary(String, f64),
    #[error("unknown target gate `{0}`")]
    UnknownTarget(String),
    #[error("target `{name}` needs {need} qubits, got {got}")]
    TargetSize {
        name: String,
        need: usize,
        got: usize,
    },
}
