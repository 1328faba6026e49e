//! Checks of the oscillator algebra behind the single-mode energy: symbolic
//! reduction of `½(pp* + ω²qq*)`, truncated ladder-operator matrices and the
//! scalar relations tying a quantum of action to the medium's parameters.

mod nc;
mod operators;
mod relations;

pub use nc::{
    reduce_mode_hamiltonian, reduce_with, Coeff, ConjugationRules, Monomial, NcExpression, Symbol,
};
pub use operators::{
    build_qp_matrices, commutator_defect, ground_energy, hamiltonian, projected_hamiltonian,
    spectrum, CommutatorReport, OperatorMatrix, OperatorRole,
};
pub use relations::{medium_atom_mass, planck_from_lattice, RelationInputs};
