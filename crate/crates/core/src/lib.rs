//! Momentum-resolved excitation energies of the transverse-field Ising
//! model on square and cubic lattices.
//!
//! An iPEPS is evolved in imaginary time with simple-update Trotter gates.
//! After every step the expectation value of `[H, O_k]`, with
//! `O_k = Σ_j e^{ik·r_j} σ^y_j`, is evaluated for each requested momentum;
//! its logarithm decays linearly in τ with slope `−Δ_k`.

pub mod dispersion;
pub mod ipeps;
pub mod lattice;
pub mod model;
pub mod series;
pub mod tensor;

pub use dispersion::{
    compute_curve, detect_plateau, fit_slope, fit_trace, numerical_derivative, run_trace,
    CellPolicy, DispersionCurve, EvolutionTrace, FitOptions, FitResult, FitWindow,
};
pub use ipeps::{evaluate_commutator, expect_local, EvolutionParams, IpepsState};
pub use lattice::{
    high_symmetry_path, minimal_cell_for, momentum_grid, phase, Bond, Momentum, SymmetryPoint,
    UnitCell,
};
pub use model::{
    bond_hamiltonian, build_gate, commutator_terms, CommutatorTerm, Phase, TfimParams, TrotterGate,
};
pub use series::{series_curve, series_delta, SeriesSpec};
pub use tensor::{svd_truncate, SvdResult, Tensor};
