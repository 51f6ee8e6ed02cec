//! Exact dense density-matrix simulation.

mod dump;
mod gates;
mod matrix;
mod state;

pub use dump::{dump_matrix, parse_dump};
pub use gates::{cnot, controlled, cz, smolin_preparation_unitary, BellIndex, Bit, MeasurementOutcome, Pauli};
pub use matrix::ComplexMatrix;
pub use state::{
    labels, min_eigenvalue, tensor_product, tensor_product_capped, trace_distance, Branch, DensityMatrix, Label,
    DEFAULT_QUBIT_CAP, PSD_TOL, VALIDATION_TOL,
};
