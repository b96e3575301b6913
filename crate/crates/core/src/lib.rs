//! Hamiltonian QAOA for 2-local Hamiltonians: statevector simulation,
//! lightcone-tree iterations on high-girth regular graphs, parameter
//! optimization, and exact-diagonalization references.
//!
//! Qubit `q` is bit `q` of a basis index; bit value 0 is `|0⟩`, `z = +1`.

pub mod eigen;
pub mod error;
pub mod formula;
pub mod graphs;
pub mod hamiltonians;
pub mod io;
pub mod optimize;
mod reduce;
pub mod simulator;
pub mod statevector;

pub use eigen::{extremal_eigenpair, extremal_eigenspace, Eigenpair, Eigenspace, Extremum};
pub use error::{Error, Result};
pub use graphs::{cut_value, girth, Girth, GraphKind, InteractionGraph, SignString};
pub use hamiltonians::{EdgeCoeffs, HamiltonianSpec, Pauli, PresetKind};
pub use simulator::{prepare_hqs, AnsatzSpec, HqsEngine, ParamSchedule};
pub use statevector::Statevector;
