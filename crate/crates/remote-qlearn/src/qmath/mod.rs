//! Complex linear algebra on pure states and operators: states and
//! measurement sampling, validated unitary/Hermitian matrices, Hermitian
//! matrix exponentials, and the SU(d) generator basis behind the trainable
//! unitary Û(a) = exp(−i a·G).

pub mod generators;
pub mod operator;
pub mod state;

pub use generators::{build_generators, unitary_from_params, wrap_angle, GeneratorSet};
pub use operator::{average_density, trace_distance_from_maximally_mixed, Operator, OperatorClass};
pub use state::QState;
