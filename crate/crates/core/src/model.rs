//! Transverse-field Ising model: bond Hamiltonians, imaginary-time Trotter
//! gates and the local expansion of `[H, O_k]` for the probe `O_k = Σ_j e^{ik·r_j} σ^y_j`.

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{self, Bond, LatticeError, Momentum, UnitCell};
use crate::tensor::{Tensor, TensorError};

/// Critical field ratio g_c/J of the square lattice.
pub const CRITICAL_RATIO_2D: f64 = 3.044;
/// Critical field ratio g_c/J of the simple cubic lattice.
pub const CRITICAL_RATIO_3D: f64 = 5.29;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("imaginary time step must be finite and non-negative, got {0}")]
    InvalidTimeStep(f64),

    #[error(transparent)]
    Lattice(#[from] LatticeError),

    #[error(transparent)]
    Tensor(#[from] TensorError),
}

pub type ModelResult<T> = Result<T, ModelError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Ferromagnetic,
    Paramagnetic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TfimParams {
    pub j: f64,
    pub g: f64,
    pub dimensionality: usize,
}

impl TfimParams {
    pub fn new(j: f64, g: f64, dimensionality: usize) -> ModelResult<Self> {
        let p = Self {
            j,
            g,
            dimensionality,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> ModelResult<()> {
        lattice::check_dimensionality(self.dimensionality)?;
        if !(self.j.is_finite() && self.g.is_finite()) || self.j < 0.0 || self.g < 0.0 {
            return Err(ModelError::InvalidParams(format!(
                "J and g must be finite and non-negative (J={}, g={})",
                self.j, self.g
            )));
        }
        if self.j == 0.0 && self.g == 0.0 {
            return Err(ModelError::InvalidParams("J and g are both zero".into()));
        }
        Ok(())
    }

    pub fn critical_ratio(&self) -> f64 {
        if self.dimensionality == 3 {
            CRITICAL_RATIO_3D
        } else {
            CRITICAL_RATIO_2D
        }
    }

    pub fn phase(&self) -> Phase {
        if self.j > 0.0 && self.g / self.j < self.critical_ratio() {
            Phase::Ferromagnetic
        } else {
            Phase::Paramagnetic
        }
    }

    /// Energy unit of reported gaps: J in the ferromagnet, g in the paramagnet.
    pub fn energy_unit(&self) -> &'static str {
        match self.phase() {
            Phase::Ferromagnetic => "J",
            Phase::Paramagnetic => "g",
        }
    }

    /// Coordination number 2d.
    pub fn coordination(&self) -> usize {
        2 * self.dimensionality
    }
}

pub mod pauli {
    use super::*;

    pub fn identity() -> Tensor {
        Tensor::identity(2)
    }

    pub fn x() -> Tensor {
        Tensor::from_real(vec![2, 2], &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn y() -> Tensor {
        let i = C64::new(0.0, 1.0);
        Tensor::new(
            vec![2, 2],
            vec![C64::new(0.0, 0.0), -i, i, C64::new(0.0, 0.0)],
        )
        .unwrap()
    }

    pub fn z() -> Tensor {
        Tensor::from_real(vec![2, 2], &[1.0, 0.0, 0.0, -1.0]).unwrap()
    }
}

/// `ab − ba` for two square matrices.
pub fn commutator(a: &Tensor, b: &Tensor) -> ModelResult<Tensor> {
    Ok(a.matmul(b)?.sub(&b.matmul(a)?)?)
}

/// Converts a 4×4 two-site matrix with row index `(s1, s2)` into a rank-4
/// tensor `(s1, s2, s1', s2')`.
pub fn two_site(m: &Tensor) -> ModelResult<Tensor> {
    Ok(m.reshape(vec![2, 2, 2, 2])?)
}

/// `h = −J σ^z⊗σ^z − (g/2d)(σ^x⊗1 + 1⊗σ^x)`, shape `(2,2,2,2)`.
pub fn bond_hamiltonian(p: &TfimParams) -> ModelResult<Tensor> {
    p.validate()?;
    let zz = pauli::z().kron(&pauli::z())?;
    let x1 = pauli::x().kron(&pauli::identity())?;
    let x2 = pauli::identity().kron(&pauli::x())?;
    let field = p.g / p.coordination() as f64;
    let h = zz
        .scale(C64::new(-p.j, 0.0))
        .sub(&x1.add(&x2)?.scale(C64::new(field, 0.0)))?;
    two_site(&h)
}

fn real_4x4(t: &Tensor) -> Matrix4<f64> {
    Matrix4::from_fn(|r, c| t.data()[r * 4 + c].re)
}

/// Imaginary-time propagator `exp(−dτ·h)` on one bond.
#[derive(Clone, Debug)]
pub struct TrotterGate {
    pub matrix: Tensor,
    pub dtau: f64,
}

impl TrotterGate {
    pub fn identity() -> Self {
        Self {
            matrix: two_site(&Tensor::identity(4)).unwrap(),
            dtau: 0.0,
        }
    }

    /// Gate as a 4×4 matrix with row index `(s1, s2)`.
    pub fn as_matrix(&self) -> Tensor {
        self.matrix.reshape(vec![4, 4]).unwrap()
    }
}

/// `exp(−dτ·h_bond)` through the eigendecomposition of the real symmetric bond Hamiltonian.
pub fn build_gate(p: &TfimParams, dtau: f64) -> ModelResult<TrotterGate> {
    if !dtau.is_finite() || dtau < 0.0 {
        return Err(ModelError::InvalidTimeStep(dtau));
    }
    let h = real_4x4(&bond_hamiltonian(p)?.reshape(vec![4, 4])?);
    let eig = SymmetricEigen::new(h);
    let exp_diag = eig.eigenvalues.map(|e| (-dtau * e).exp());
    let gate = eig.eigenvectors * Matrix4::from_diagonal(&exp_diag) * eig.eigenvectors.transpose();
    let data: Vec<f64> = (0..16).map(|i| gate[(i / 4, i % 4)]).collect();
    Ok(TrotterGate {
        matrix: Tensor::from_real(vec![2, 2, 2, 2], &data)?,
        dtau,
    })
}

/// Where a commutator term acts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Support {
    Site(usize),
    /// Two sites joined by `bond`. The operator's first factor acts on
    /// `first`, which is either end of the bond.
    Pair {
        bond: Bond,
        first: usize,
        second: usize,
    },
}

#[derive(Clone, Debug)]
pub struct CommutatorTerm {
    pub prefactor: C64,
    pub support: Support,
    /// `(2,2)` for a site term, `(2,2,2,2)` for a pair term.
    pub operator: Tensor,
}

/// Exact expansion of `[H, O_k]` over one unit cell.
///
/// For each site `j` this yields the field term `e^{ik·r_j}(−g)[σ^x,σ^y]_j`
/// followed by one Ising term `e^{ik·r_j}(−J) σ^z_i ⊗ [σ^z,σ^y]_j` per
/// neighbour `i` (forward then backward along each axis). Pair operators
/// are ordered `(i, j)`.
pub fn commutator_terms(
    p: &TfimParams,
    k: &Momentum,
    cell: &UnitCell,
) -> ModelResult<Vec<CommutatorTerm>> {
    p.validate()?;
    if cell.dimensionality() != p.dimensionality {
        return Err(LatticeError::DimensionMismatch {
            momentum: cell.dimensionality(),
            expected: p.dimensionality,
        }
        .into());
    }
    cell.check_commensurate(k)?;

    let field_op = commutator(&pauli::x(), &pauli::y())?;
    let zz = pauli::z().kron(&pauli::z())?;
    let probe = pauli::identity().kron(&pauli::y())?;
    let ising_op = two_site(&commutator(&zz, &probe)?)?;

    let mut terms =
        Vec::with_capacity(cell.num_sites() * (cell.num_bonds() / cell.num_sites() * 2 + 1));
    for site in 0..cell.num_sites() {
        let ph = lattice::phase(k, &cell.coords(site))?;
        terms.push(CommutatorTerm {
            prefactor: ph * -p.g,
            support: Support::Site(site),
            operator: field_op.clone(),
        });
        for dir in 0..cell.dimensionality() {
            for forward in [true, false] {
                let neighbor = cell.neighbor(site, dir, forward);
                terms.push(CommutatorTerm {
                    prefactor: ph * -p.j,
                    support: Support::Pair {
                        bond: cell.bond_at(site, dir, forward),
                        first: neighbor,
                        second: site,
                    },
                    operator: ising_op.clone(),
                });
            }
        }
    }
    Ok(terms)
}
