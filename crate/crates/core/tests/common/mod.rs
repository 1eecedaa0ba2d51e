//! Dense oracles shared by the integration suites.
#![allow(dead_code)]

use std::f64::consts::PI;

use ipeps_dispersion::ipeps::Environment;
use ipeps_dispersion::model::{pauli, Support};
use ipeps_dispersion::{
    build_gate, commutator_terms, Bond, IpepsState, Momentum, Tensor, TfimParams, UnitCell,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

pub type M = DMatrix<C64>;

pub fn mat(t: &Tensor) -> M {
    let n = (t.len() as f64).sqrt() as usize;
    DMatrix::from_row_slice(n, n, t.data())
}

/// `op` on `sites` of an `n`-site register, site 0 most significant.
pub fn embed(op: &M, sites: &[usize], n: usize) -> M {
    let dim = 1 << n;
    let mut out = M::zeros(dim, dim);
    let bit = |state: usize, site: usize| (state >> (n - 1 - site)) & 1;
    for col in 0..dim {
        let sub_col = sites.iter().fold(0, |acc, &s| acc * 2 + bit(col, s));
        for sub_row in 0..op.nrows() {
            let v = op[(sub_row, sub_col)];
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            let mut row = col;
            for (pos, &s) in sites.iter().enumerate() {
                let b = (sub_row >> (sites.len() - 1 - pos)) & 1;
                let mask = 1 << (n - 1 - s);
                row = if b == 1 { row | mask } else { row & !mask };
            }
            out[(row, col)] += v;
        }
    }
    out
}

/// Torus Hamiltonian with one term per cell bond, so wrapped pairs count twice on L=2.
pub fn torus_hamiltonian(p: &TfimParams, cell: &UnitCell) -> M {
    let n = cell.num_sites();
    let (x, z) = (mat(&pauli::x()), mat(&pauli::z()));
    let zz = z.kronecker(&z);
    let mut h = M::zeros(1 << n, 1 << n);
    for bond in cell.bonds() {
        let (a, b) = cell.bond_sites(bond);
        h -= embed(&zz, &[a, b], n) * C64::new(p.j, 0.0);
    }
    for s in 0..n {
        h -= embed(&x, &[s], n) * C64::new(p.g, 0.0);
    }
    h
}

pub fn terms_matrix(p: &TfimParams, k: &Momentum, cell: &UnitCell) -> M {
    let n = cell.num_sites();
    let mut out = M::zeros(1 << n, 1 << n);
    for t in commutator_terms(p, k, cell).unwrap() {
        let op = mat(&t.operator);
        let e = match t.support {
            Support::Site(s) => embed(&op, &[s], n),
            Support::Pair { first, second, .. } => embed(&op, &[first, second], n),
        };
        out += e * t.prefactor;
    }
    out
}

/// The four momenta of a 2×2 cell; all have real phases.
pub fn grid_2x2() -> Vec<Momentum> {
    let mut ks = Vec::new();
    for a in [0.0, PI] {
        for b in [0.0, PI] {
            ks.push(Momentum::new(vec![a, b]));
        }
    }
    ks
}

/// `(max |[H,O_k] − Σ terms|, max |C + C†|)` on the 2×2 torus.
pub fn commutator_errors(p: &TfimParams, k: &Momentum) -> (f64, f64) {
    let cell = UnitCell::new(vec![2, 2]).unwrap();
    let h = torus_hamiltonian(p, &cell);
    let mut o = M::zeros(16, 16);
    for s in 0..4 {
        o += embed(&mat(&pauli::y()), &[s], 4)
            * ipeps_dispersion::phase(k, &cell.coords(s)).unwrap();
    }
    let exact = &h * &o - &o * &h;
    let ours = terms_matrix(p, k, &cell);
    ((&exact - &ours).camax(), (&ours + ours.adjoint()).camax())
}

/// Largest deviation of simple-update `⟨σ^x⟩`, `⟨σ^x⟩` and `⟨σ^zσ^z⟩` from a
/// dense two-site evolution over `steps` gates.
///
/// Only bond (0, x) of a 2×2 cell is ever updated, so every other leg keeps
/// dimension 1 and the cell reduces to an open two-site cluster.
pub fn two_site_error(p: &TfimParams, dtau: f64, steps: usize, seed: u64) -> f64 {
    let cell = UnitCell::new(vec![2, 2]).unwrap();
    let bond = Bond { site: 0, dir: 0 };
    let (a, b) = cell.bond_sites(bond);
    let gate = build_gate(p, dtau).unwrap();
    let mut state = IpepsState::init_random(&cell, seed, 4).unwrap();

    let amp = |st: &IpepsState, s: usize| DVector::from_column_slice(st.site_tensor(s).data());
    let mut psi = amp(&state, a).kronecker(&amp(&state, b));
    let u = mat(&gate.as_matrix());
    let x = mat(&pauli::x());
    let id = M::identity(2, 2);
    let (xa, xb) = (x.kronecker(&id), id.kronecker(&x));
    let zz_t = pauli::z().kron(&pauli::z()).unwrap();
    let zz = mat(&zz_t);
    let zz_t = zz_t.reshape(vec![2, 2, 2, 2]).unwrap();

    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        state.simple_update_step(&gate, bond).unwrap();
        psi = &u * &psi;
        psi /= C64::new(psi.norm(), 0.0);
        let dense = |op: &M| (psi.adjoint() * op * &psi)[(0, 0)];
        let env = Environment::new(&state);
        let got_a = env.expect(&pauli::x(), &Support::Site(a)).unwrap();
        let got_b = env.expect(&pauli::x(), &Support::Site(b)).unwrap();
        let got_zz = env
            .expect(
                &zz_t,
                &Support::Pair {
                    bond,
                    first: a,
                    second: b,
                },
            )
            .unwrap();
        worst = worst
            .max((got_a - dense(&xa)).norm())
            .max((got_b - dense(&xb)).norm())
            .max((got_zz - dense(&zz)).norm());
    }
    worst
}

/// Largest `|Re v| / |v|` of `⟨[H, O_k]⟩` over every step of an evolution,
/// for all real-phase momenta of a 2×2 cell.
pub fn max_real_fraction(p: &TfimParams, dtau: f64, steps: usize, d_max: usize, seed: u64) -> f64 {
    let cell = UnitCell::new(vec![2, 2]).unwrap();
    let terms: Vec<_> = grid_2x2()
        .iter()
        .map(|k| commutator_terms(p, k, &cell).unwrap())
        .collect();
    let gate = build_gate(p, dtau).unwrap();
    let mut state = IpepsState::init_random(&cell, seed, d_max).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        state.sweep(&gate).unwrap();
        let env = Environment::new(&state);
        for v in env.evaluate_many(&terms).unwrap() {
            if v.norm() > 0.0 {
                worst = worst.max(v.re.abs() / v.norm());
            }
        }
    }
    worst
}

fn unravel(mut flat: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for (slot, &d) in idx.iter_mut().zip(shape).rev() {
        *slot = flat % d;
        flat /= d;
    }
    idx
}

fn row_major(shape: &[usize], idx: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |acc, (&i, &d)| acc * d + i)
}

/// Plain nested-loop contraction: `(shape, data)` of `a · b` over the paired axes.
pub fn naive_contract(
    a: &Tensor,
    axes_a: &[usize],
    b: &Tensor,
    axes_b: &[usize],
) -> (Vec<usize>, Vec<C64>) {
    let free_a: Vec<usize> = (0..a.rank()).filter(|x| !axes_a.contains(x)).collect();
    let free_b: Vec<usize> = (0..b.rank()).filter(|x| !axes_b.contains(x)).collect();
    let mut out_shape: Vec<usize> = free_a.iter().map(|&x| a.shape()[x]).collect();
    out_shape.extend(free_b.iter().map(|&x| b.shape()[x]));
    let sum_shape: Vec<usize> = axes_a.iter().map(|&x| a.shape()[x]).collect();
    let out_len: usize = out_shape.iter().product();
    let sum_len: usize = sum_shape.iter().product();
    let mut out = vec![C64::new(0.0, 0.0); out_len];
    for (o, slot) in out.iter_mut().enumerate() {
        let oi = unravel(o, &out_shape);
        for s in 0..sum_len {
            let si = unravel(s, &sum_shape);
            let mut ia = vec![0; a.rank()];
            let mut ib = vec![0; b.rank()];
            for (n, &ax) in free_a.iter().enumerate() {
                ia[ax] = oi[n];
            }
            for (n, &ax) in free_b.iter().enumerate() {
                ib[ax] = oi[free_a.len() + n];
            }
            for (n, (&xa, &xb)) in axes_a.iter().zip(axes_b).enumerate() {
                ia[xa] = si[n];
                ib[xb] = si[n];
            }
            *slot += a.data()[row_major(a.shape(), &ia)] * b.data()[row_major(b.shape(), &ib)];
        }
    }
    (out_shape, out)
}
