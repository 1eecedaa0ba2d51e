//! iPEPS on a periodic unit cell with simple-update imaginary-time evolution.
//!
//! Site tensors carry the physical index on axis 0 followed by `2d` virtual
//! legs: for every direction the forward leg (bond `(r, ê)`) and then the
//! backward leg (bond `(r − ê, ê)`). Bond weights live separately, one
//! vector per bond, so each site tensor is stored in the Vidal gauge with
//! all weights divided out.

use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{Bond, UnitCell};
use crate::model::{self, CommutatorTerm, Support, TfimParams, TrotterGate};
use crate::tensor::{self, Tensor, TensorError};

/// Bond weights below this fraction of the largest one are dropped.
pub const WEIGHT_CUTOFF: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum IpepsError {
    #[error("cell {0:?} needs at least two sites along every axis")]
    CellTooSmall(Vec<usize>),

    #[error("bond {0:?} is not part of the unit cell")]
    InvalidBond(Bond),

    #[error("sites {0} and {1} are not the two ends of bond {2:?}")]
    NotAdjacent(usize, usize, Bond),

    #[error("site {0} is outside the unit cell")]
    InvalidSite(usize),

    #[error("operator shape {found:?} does not match support (expected {expected:?})")]
    OperatorShape {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("inconsistent state: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Tensor(#[from] TensorError),

    #[error(transparent)]
    Model(#[from] model::ModelError),

    #[error("checkpoint I/O: {0}")]
    Io(#[from] std::io::Error),

    #[error("checkpoint format: {0}")]
    Format(#[from] serde_json::Error),
}

pub type IpepsResult<T> = Result<T, IpepsError>;

/// Axis of a site tensor holding the virtual leg `(dir, forward)`.
pub fn leg(dir: usize, forward: bool) -> usize {
    1 + 2 * dir + usize::from(!forward)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionParams {
    pub dtau: f64,
    pub max_steps: usize,
    pub d_max: usize,
    pub seed: u64,
    pub floor: f64,
}

impl Default for EvolutionParams {
    fn default() -> Self {
        Self {
            dtau: 0.01,
            max_steps: 4000,
            d_max: 4,
            seed: 7,
            floor: 1e-12,
        }
    }
}

impl EvolutionParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.dtau.is_finite() && self.dtau > 0.0) {
            return Err(format!("dtau must be positive, got {}", self.dtau));
        }
        if self.max_steps == 0 {
            return Err("max_steps must be positive".into());
        }
        if self.d_max == 0 {
            return Err("d_max must be positive".into());
        }
        if !(self.floor.is_finite() && self.floor > f64::EPSILON) {
            return Err(format!(
                "floor must exceed machine epsilon, got {}",
                self.floor
            ));
        }
        Ok(())
    }

    pub fn max_tau(&self) -> f64 {
        self.dtau * self.max_steps as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IpepsState {
    cell: UnitCell,
    sites: Vec<Tensor>,
    /// Indexed by [`UnitCell::bond_index`].
    weights: Vec<Vec<f64>>,
    d_max: usize,
    tau: f64,
    seed: u64,
}

impl IpepsState {
    /// Bond dimension 1 state with i.i.d. uniform `[0, 1)` physical amplitudes.
    pub fn init_random(cell: &UnitCell, seed: u64, d_max: usize) -> IpepsResult<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = Self::product(cell, [1.0, 1.0], d_max)?;
        for t in &mut state.sites {
            let amps = [rng.gen::<f64>(), rng.gen::<f64>()];
            *t = Tensor::from_real(t.shape().to_vec(), &amps)?;
        }
        state.seed = seed;
        Ok(state)
    }

    /// Product state with the same single-site amplitudes everywhere.
    pub fn product(cell: &UnitCell, amplitudes: [f64; 2], d_max: usize) -> IpepsResult<Self> {
        if cell.dims().iter().any(|&l| l < 2) {
            return Err(IpepsError::CellTooSmall(cell.dims().to_vec()));
        }
        assert!(d_max >= 1, "d_max must be positive");
        let mut shape = vec![2];
        shape.extend(std::iter::repeat(1).take(2 * cell.dimensionality()));
        let site = Tensor::from_real(shape, &amplitudes)?;
        Ok(Self {
            cell: cell.clone(),
            sites: vec![site; cell.num_sites()],
            weights: vec![vec![1.0]; cell.num_bonds()],
            d_max,
            tau: 0.0,
            seed: 0,
        })
    }

    /// Assembles a state from raw parts, checking every structural invariant.
    pub fn from_parts(
        cell: UnitCell,
        sites: Vec<Tensor>,
        weights: Vec<Vec<f64>>,
        d_max: usize,
    ) -> IpepsResult<Self> {
        let state = Self {
            cell,
            sites,
            weights,
            d_max,
            tau: 0.0,
            seed: 0,
        };
        state.check()?;
        Ok(state)
    }

    pub fn cell(&self) -> &UnitCell {
        &self.cell
    }

    pub fn site_tensor(&self, site: usize) -> &Tensor {
        &self.sites[site]
    }

    pub fn bond_weights(&self, bond: Bond) -> &[f64] {
        &self.weights[self.cell.bond_index(bond)]
    }

    pub fn d_max(&self) -> usize {
        self.d_max
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn set_tau(&mut self, tau: f64) {
        self.tau = tau;
    }

    /// Largest virtual dimension over all bonds.
    pub fn max_bond_dim(&self) -> usize {
        self.weights.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Verifies leg dimensions, weight ordering and finiteness.
    pub fn check(&self) -> IpepsResult<()> {
        let cell = &self.cell;
        if cell.dims().iter().any(|&l| l < 2) {
            return Err(IpepsError::CellTooSmall(cell.dims().to_vec()));
        }
        if self.sites.len() != cell.num_sites() || self.weights.len() != cell.num_bonds() {
            return Err(IpepsError::Inconsistent(
                "wrong number of sites or bonds".into(),
            ));
        }
        let rank = 1 + 2 * cell.dimensionality();
        for (site, t) in self.sites.iter().enumerate() {
            if t.rank() != rank || t.shape()[0] != 2 {
                return Err(IpepsError::Inconsistent(format!(
                    "site {site} has shape {:?}",
                    t.shape()
                )));
            }
            if !t.is_finite() || t.norm() == 0.0 {
                return Err(IpepsError::Inconsistent(format!(
                    "site {site} has zero or non-finite norm"
                )));
            }
            for dir in 0..cell.dimensionality() {
                for forward in [true, false] {
                    let w = self.bond_weights(cell.bond_at(site, dir, forward));
                    let dim = t.shape()[leg(dir, forward)];
                    if dim != w.len() || dim > self.d_max {
                        return Err(IpepsError::Inconsistent(format!(
                            "site {site} leg ({dir},{forward}) has dim {dim}, weights {} (d_max {})",
                            w.len(),
                            self.d_max
                        )));
                    }
                }
            }
        }
        for (i, w) in self.weights.iter().enumerate() {
            let sorted = w.windows(2).all(|p| p[0] >= p[1]);
            let positive = w.iter().all(|&x| x > 0.0 && x.is_finite());
            if !sorted || !positive || (w[0] - 1.0).abs() > 1e-12 {
                return Err(IpepsError::Inconsistent(format!("bond {i} weights {w:?}")));
            }
        }
        Ok(())
    }

    /// Multiplies the weights of every leg of `site` except `skip` into its
    /// tensor, or divides them out when `divide` is set.
    fn apply_env(
        &self,
        t: &Tensor,
        site: usize,
        skip: Option<usize>,
        divide: bool,
    ) -> IpepsResult<Tensor> {
        let mut out = t.clone();
        for dir in 0..self.cell.dimensionality() {
            for forward in [true, false] {
                let axis = leg(dir, forward);
                if Some(axis) == skip {
                    continue;
                }
                let w = self.bond_weights(self.cell.bond_at(site, dir, forward));
                out = if divide {
                    let inv: Vec<f64> = w.iter().map(|x| 1.0 / x).collect();
                    out.scale_axis(axis, &inv)?
                } else {
                    out.scale_axis(axis, w)?
                };
            }
        }
        Ok(out)
    }

    fn bond_ends(&self, bond: Bond) -> IpepsResult<(usize, usize)> {
        if bond.site >= self.cell.num_sites() || bond.dir >= self.cell.dimensionality() {
            return Err(IpepsError::InvalidBond(bond));
        }
        Ok(self.cell.bond_sites(bond))
    }

    /// One simple-update step: absorb environment weights, apply the gate
    /// on the bond, split by truncated SVD, and restore the Vidal gauge.
    pub fn simple_update_step(&mut self, gate: &TrotterGate, bond: Bond) -> IpepsResult<()> {
        let (a, b) = self.bond_ends(bond)?;
        let leg_a = leg(bond.dir, true);
        let leg_b = leg(bond.dir, false);
        let lambda = self.bond_weights(bond).to_vec();

        let (qa, ra, perm_a, shape_a) = self.reduce_site(a, leg_a)?;
        let (qb, rb, perm_b, shape_b) = self.reduce_site(b, leg_b)?;
        let (ka, kb) = (ra.shape()[0], rb.shape()[0]);
        let dim = lambda.len();

        // theta(ka, s1, kb, s2)
        let ra = ra.reshape(vec![ka, 2, dim])?.scale_axis(2, &lambda)?;
        let rb = rb.reshape(vec![kb, 2, dim])?;
        let theta = ra.contract(&[2], &rb, &[2])?;
        // gate(t1, t2, s1, s2) -> (t1, t2, ka, kb)
        let theta = gate.matrix.contract(&[2, 3], &theta, &[1, 3])?;
        let m = theta
            .permute(&[2, 0, 1, 3])?
            .reshape(vec![ka * 2, 2 * kb])?;

        let svd = tensor::svd_truncate_with_cutoff(&m, self.d_max, WEIGHT_CUTOFF)?;
        let chi = svd.rank();
        let s_max = svd.singular_values[0];
        if !(s_max > 0.0 && s_max.is_finite()) {
            return Err(IpepsError::Inconsistent(format!(
                "bond {bond:?} collapsed to zero"
            )));
        }
        let new_lambda: Vec<f64> = svd.singular_values.iter().map(|s| s / s_max).collect();

        // (X, 2, chi)
        let ua = svd.left.reshape(vec![ka, 2, chi])?;
        let new_a = qa.contract(&[1], &ua, &[0])?;
        // (Y, chi, 2) -> (Y, 2, chi)
        let vb = svd.right.reshape(vec![chi, 2, kb])?;
        let new_b = qb.contract(&[1], &vb, &[2])?.permute(&[0, 2, 1])?;

        let idx = self.cell.bond_index(bond);
        self.weights[idx] = new_lambda;

        let new_a = restore(new_a, &shape_a, chi, &perm_a)?;
        let new_b = restore(new_b, &shape_b, chi, &perm_b)?;
        let new_a = self.apply_env(&new_a, a, Some(leg_a), true)?;
        let new_b = self.apply_env(&new_b, b, Some(leg_b), true)?;
        self.sites[a] = normalize_max(new_a)?;
        self.sites[b] = normalize_max(new_b)?;
        Ok(())
    }

    /// Returns `(q, r, perm, other_dims)` where the site tensor with
    /// environment absorbed, permuted to `(others…, phys, bond leg)`, equals `q · r`.
    fn reduce_site(
        &self,
        site: usize,
        bond_leg: usize,
    ) -> IpepsResult<(Tensor, Tensor, Vec<usize>, Vec<usize>)> {
        let t = self.apply_env(&self.sites[site], site, Some(bond_leg), false)?;
        let others: Vec<usize> = (1..t.rank()).filter(|&l| l != bond_leg).collect();
        let mut perm = others.clone();
        perm.extend([0, bond_leg]);
        let other_dims: Vec<usize> = others.iter().map(|&l| t.shape()[l]).collect();
        let rows: usize = other_dims.iter().product();
        let cols = 2 * t.shape()[bond_leg];
        let mat = t.permute(&perm)?.reshape(vec![rows, cols])?;
        let (q, r) = tensor::qr(&mat)?;
        Ok((q, r, perm, other_dims))
    }

    /// Applies the gate to every bond in sweep order and advances τ by `dtau`.
    pub fn sweep(&mut self, gate: &TrotterGate) -> IpepsResult<()> {
        for bond in self.cell.sweep_order() {
            self.simple_update_step(gate, bond)?;
        }
        self.tau += gate.dtau;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> IpepsResult<()> {
        fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> IpepsResult<Self> {
        let state: Self = serde_json::from_str(&fs::read_to_string(path)?)?;
        state.check()?;
        Ok(state)
    }
}

fn restore(t: Tensor, other_dims: &[usize], chi: usize, perm: &[usize]) -> IpepsResult<Tensor> {
    let mut shape = other_dims.to_vec();
    shape.extend([2, chi]);
    let mut inverse = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inverse[p] = i;
    }
    Ok(t.reshape(shape)?.permute(&inverse)?)
}

fn normalize_max(t: Tensor) -> IpepsResult<Tensor> {
    let m = t.max_abs();
    if !(m > 0.0 && m.is_finite()) {
        return Err(IpepsError::Inconsistent("site tensor vanished".into()));
    }
    Ok(t.scale(C64::new(1.0 / m, 0.0)))
}

/// Reduced density matrices from simple-update environments, computed on
/// first use and cached for one state snapshot.
pub struct Environment<'a> {
    state: &'a IpepsState,
    site_rdm: Vec<OnceLock<Tensor>>,
    bond_rdm: Vec<OnceLock<Tensor>>,
}

impl<'a> Environment<'a> {
    pub fn new(state: &'a IpepsState) -> Self {
        Self {
            state,
            site_rdm: (0..state.cell.num_sites())
                .map(|_| OnceLock::new())
                .collect(),
            bond_rdm: (0..state.cell.num_bonds())
                .map(|_| OnceLock::new())
                .collect(),
        }
    }

    /// Normalized 2×2 density matrix `ρ[s, s'] ∝ Σ ψ_s ψ*_{s'}` of one site.
    pub fn site_rdm(&self, site: usize) -> IpepsResult<&Tensor> {
        if site >= self.site_rdm.len() {
            return Err(IpepsError::InvalidSite(site));
        }
        if let Some(rho) = self.site_rdm[site].get() {
            return Ok(rho);
        }
        let st = self.state;
        let t = st.apply_env(&st.sites[site], site, None, false)?;
        let rest = t.len() / 2;
        let m = t.reshape(vec![2, rest])?;
        let rho = m.contract(&[1], &m.conj(), &[1])?;
        let rho = normalize_trace(rho)?;
        Ok(self.site_rdm[site].get_or_init(|| rho))
    }

    /// Normalized 4×4 density matrix of the two ends of `bond`, rows `(s_a, s_b)`.
    pub fn bond_rdm(&self, bond: Bond) -> IpepsResult<&Tensor> {
        let st = self.state;
        let (a, b) = st.bond_ends(bond)?;
        let idx = st.cell.bond_index(bond);
        if let Some(rho) = self.bond_rdm[idx].get() {
            return Ok(rho);
        }
        let half = |site: usize, bond_leg: usize| -> IpepsResult<Tensor> {
            let t = st.apply_env(&st.sites[site], site, Some(bond_leg), false)?;
            let mut perm = vec![0, bond_leg];
            perm.extend((1..t.rank()).filter(|&l| l != bond_leg));
            let dim = t.shape()[bond_leg];
            let rest = t.len() / (2 * dim);
            let m = t.permute(&perm)?.reshape(vec![2 * dim, rest])?;
            // (s, a, s', a')
            Ok(m.contract(&[1], &m.conj(), &[1])?
                .reshape(vec![2, dim, 2, dim])?)
        };
        let lambda = st.bond_weights(bond);
        let xa = half(a, leg(bond.dir, true))?
            .scale_axis(1, lambda)?
            .scale_axis(3, lambda)?;
        let xb = half(b, leg(bond.dir, false))?;
        // (s, s', t, t') -> (s, t, s', t')
        let rho = xa
            .contract(&[1, 3], &xb, &[1, 3])?
            .permute(&[0, 2, 1, 3])?
            .reshape(vec![4, 4])?;
        let rho = normalize_trace(rho)?;
        Ok(self.bond_rdm[idx].get_or_init(|| rho))
    }

    /// `⟨op⟩` on the given support.
    pub fn expect(&self, op: &Tensor, support: &Support) -> IpepsResult<C64> {
        match *support {
            Support::Site(site) => {
                if op.shape() != [2, 2] {
                    return Err(IpepsError::OperatorShape {
                        expected: vec![2, 2],
                        found: op.shape().to_vec(),
                    });
                }
                Ok(op.matmul(self.site_rdm(site)?)?.trace()?)
            }
            Support::Pair {
                bond,
                first,
                second,
            } => {
                if op.shape() != [2, 2, 2, 2] {
                    return Err(IpepsError::OperatorShape {
                        expected: vec![2, 2, 2, 2],
                        found: op.shape().to_vec(),
                    });
                }
                let (a, b) = self.state.bond_ends(bond)?;
                let op = if (first, second) == (a, b) {
                    op.clone()
                } else if (first, second) == (b, a) {
                    op.permute(&[1, 0, 3, 2])?
                } else {
                    return Err(IpepsError::NotAdjacent(first, second, bond));
                };
                let op = op.reshape(vec![4, 4])?;
                Ok(op.matmul(self.bond_rdm(bond)?)?.trace()?)
            }
        }
    }

    /// `Σ_terms prefactor · ⟨operator⟩`.
    pub fn evaluate(&self, terms: &[CommutatorTerm]) -> IpepsResult<C64> {
        terms
            .iter()
            .map(|t| Ok(t.prefactor * self.expect(&t.operator, &t.support)?))
            .sum()
    }

    /// Evaluates several term lists on this snapshot in parallel.
    pub fn evaluate_many(&self, term_sets: &[Vec<CommutatorTerm>]) -> IpepsResult<Vec<C64>> {
        // fill the caches first so workers only read
        for bond in self.state.cell.bonds() {
            self.bond_rdm(bond)?;
        }
        for site in 0..self.state.cell.num_sites() {
            self.site_rdm(site)?;
        }
        term_sets
            .par_iter()
            .map(|terms| self.evaluate(terms))
            .collect()
    }
}

fn normalize_trace(rho: Tensor) -> IpepsResult<Tensor> {
    let tr = rho.trace()?;
    if !(tr.norm() > 0.0 && tr.re.is_finite()) {
        return Err(IpepsError::Inconsistent(
            "reduced density matrix has zero trace".into(),
        ));
    }
    Ok(rho.scale(C64::new(1.0, 0.0) / tr))
}

/// `⟨φ|op|φ⟩/⟨φ|φ⟩` with simple-update environments.
pub fn expect_local(state: &IpepsState, op: &Tensor, support: &Support) -> IpepsResult<C64> {
    Environment::new(state).expect(op, support)
}

/// `Σ_terms prefactor · expect_local(operator, support)`.
pub fn evaluate_commutator(state: &IpepsState, terms: &[CommutatorTerm]) -> IpepsResult<C64> {
    Environment::new(state).evaluate(terms)
}

/// Simple-update estimate of `⟨H⟩` per site, using the split-field bond Hamiltonian.
pub fn energy_per_site(state: &IpepsState, params: &TfimParams) -> IpepsResult<f64> {
    let h = model::bond_hamiltonian(params)?;
    let env = Environment::new(state);
    let cell = state.cell();
    let mut total = 0.0;
    for bond in cell.bonds() {
        let (first, second) = cell.bond_sites(bond);
        total += env
            .expect(
                &h,
                &Support::Pair {
                    bond,
                    first,
                    second,
                },
            )?
            .re;
    }
    Ok(total / cell.num_sites() as f64)
}
