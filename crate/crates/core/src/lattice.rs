//! Periodic unit cells on square and cubic lattices, bond enumeration and
//! commensurate momenta.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const TWO_PI: f64 = 2.0 * PI;
/// Tolerance for comparing momenta modulo 2π.
pub const MOMENTUM_TOL: f64 = 1e-12;
/// Largest period searched when looking for a commensurate cell.
const MAX_PERIOD: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("unsupported dimensionality {0}; expected 2 or 3")]
    UnsupportedDimensionality(usize),

    #[error("cell dimensions must be positive, got {0:?}")]
    InvalidCell(Vec<usize>),

    #[error("dimension mismatch: momentum has {momentum} components, expected {expected}")]
    DimensionMismatch { momentum: usize, expected: usize },

    #[error("momentum component {0} is not a rational multiple of 2π with period ≤ {MAX_PERIOD}")]
    IrrationalMomentum(f64),

    #[error("momentum {momentum} is not commensurate with cell {cell:?}")]
    Incommensurate { momentum: String, cell: Vec<usize> },

    #[error("unknown symmetry point label {0:?}")]
    UnknownLabel(String),
}

pub type LatticeResult<T> = Result<T, LatticeError>;

pub fn check_dimensionality(d: usize) -> LatticeResult<()> {
    match d {
        2 | 3 => Ok(()),
        other => Err(LatticeError::UnsupportedDimensionality(other)),
    }
}

/// A nearest-neighbour bond connecting `site` to `site + ê_dir` (periodic).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bond {
    pub site: usize,
    pub dir: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct UnitCell {
    dims: Vec<usize>,
}

impl TryFrom<Vec<usize>> for UnitCell {
    type Error = LatticeError;

    fn try_from(dims: Vec<usize>) -> LatticeResult<Self> {
        Self::new(dims)
    }
}

impl From<UnitCell> for Vec<usize> {
    fn from(cell: UnitCell) -> Self {
        cell.dims
    }
}

impl UnitCell {
    pub fn new(dims: Vec<usize>) -> LatticeResult<Self> {
        check_dimensionality(dims.len())?;
        if dims.iter().any(|&l| l == 0) {
            return Err(LatticeError::InvalidCell(dims));
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dimensionality(&self) -> usize {
        self.dims.len()
    }

    pub fn num_sites(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn num_bonds(&self) -> usize {
        self.dimensionality() * self.num_sites()
    }

    /// Coordinates of a site; the x coordinate varies fastest.
    pub fn coords(&self, site: usize) -> Vec<usize> {
        let mut rest = site;
        self.dims
            .iter()
            .map(|&l| {
                let c = rest % l;
                rest /= l;
                c
            })
            .collect()
    }

    pub fn site_index(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.dims)
            .rev()
            .fold(0, |acc, (&c, &l)| acc * l + c % l)
    }

    pub fn sites(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.num_sites()).map(|s| self.coords(s))
    }

    /// Neighbour of `site` one step along `dir`, forwards or backwards.
    pub fn neighbor(&self, site: usize, dir: usize, forward: bool) -> usize {
        let mut c = self.coords(site);
        let l = self.dims[dir];
        c[dir] = if forward {
            (c[dir] + 1) % l
        } else {
            (c[dir] + l - 1) % l
        };
        self.site_index(&c)
    }

    /// All bonds, site-major then direction.
    pub fn bonds(&self) -> Vec<Bond> {
        let d = self.dimensionality();
        (0..self.num_sites())
            .flat_map(|site| (0..d).map(move |dir| Bond { site, dir }))
            .collect()
    }

    /// Bonds in sweep order: direction-major, site-major within a direction.
    pub fn sweep_order(&self) -> Vec<Bond> {
        (0..self.dimensionality())
            .flat_map(|dir| (0..self.num_sites()).map(move |site| Bond { site, dir }))
            .collect()
    }

    pub fn bond_index(&self, bond: Bond) -> usize {
        bond.site * self.dimensionality() + bond.dir
    }

    pub fn bond_sites(&self, bond: Bond) -> (usize, usize) {
        (bond.site, self.neighbor(bond.site, bond.dir, true))
    }

    /// The bond attached to leg `(dir, forward)` of `site`.
    pub fn bond_at(&self, site: usize, dir: usize, forward: bool) -> Bond {
        if forward {
            Bond { site, dir }
        } else {
            Bond {
                site: self.neighbor(site, dir, false),
                dir,
            }
        }
    }

    pub fn is_commensurate(&self, k: &Momentum) -> bool {
        k.dimensionality() == self.dimensionality()
            && k.components
                .iter()
                .zip(&self.dims)
                .all(|(&q, &l)| is_integer(q * l as f64 / TWO_PI))
    }

    pub fn check_commensurate(&self, k: &Momentum) -> LatticeResult<()> {
        if k.dimensionality() != self.dimensionality() {
            return Err(LatticeError::DimensionMismatch {
                momentum: k.dimensionality(),
                expected: self.dimensionality(),
            });
        }
        if !self.is_commensurate(k) {
            return Err(LatticeError::Incommensurate {
                momentum: k.to_string(),
                cell: self.dims.clone(),
            });
        }
        Ok(())
    }

    /// Smallest cell whose dimensions are multiples of both cells' dimensions.
    pub fn lcm(&self, other: &UnitCell) -> LatticeResult<UnitCell> {
        if self.dimensionality() != other.dimensionality() {
            return Err(LatticeError::DimensionMismatch {
                momentum: other.dimensionality(),
                expected: self.dimensionality(),
            });
        }
        UnitCell::new(
            self.dims
                .iter()
                .zip(&other.dims)
                .map(|(&a, &b)| lcm(a, b))
                .collect(),
        )
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

fn is_integer(x: f64) -> bool {
    (x - x.round()).abs() < 1e-9
}

/// High-symmetry points of the square and cubic Brillouin zones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetryPoint {
    #[serde(rename = "G")]
    Gamma,
    X,
    M,
    #[serde(rename = "S")]
    Sigma,
    R,
}

impl SymmetryPoint {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Gamma => "G",
            Self::X => "X",
            Self::M => "M",
            Self::Sigma => "S",
            Self::R => "R",
        }
    }

    pub fn parse(label: &str) -> LatticeResult<Self> {
        match label {
            "G" | "Γ" | "Gamma" => Ok(Self::Gamma),
            "X" => Ok(Self::X),
            "M" => Ok(Self::M),
            "S" | "Σ" | "Sigma" => Ok(Self::Sigma),
            "R" => Ok(Self::R),
            other => Err(LatticeError::UnknownLabel(other.to_string())),
        }
    }

    pub fn momentum(self, dimensionality: usize) -> LatticeResult<Momentum> {
        check_dimensionality(dimensionality)?;
        let mut comps = vec![0.0; dimensionality];
        match self {
            Self::Gamma => {}
            Self::X => comps[0] = PI,
            Self::M => {
                comps[0] = PI;
                comps[1] = PI;
            }
            Self::Sigma => {
                if dimensionality != 2 {
                    return Err(LatticeError::UnsupportedDimensionality(dimensionality));
                }
                comps = vec![PI / 2.0, PI / 2.0];
            }
            Self::R => {
                if dimensionality != 3 {
                    return Err(LatticeError::UnsupportedDimensionality(dimensionality));
                }
                comps = vec![PI; 3];
            }
        }
        Ok(Momentum::labeled(comps, self))
    }
}

impl fmt::Display for SymmetryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Lattice momentum with components reduced to `[0, 2π)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Momentum {
    pub components: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<SymmetryPoint>,
}

fn reduce(q: f64) -> f64 {
    let r = q.rem_euclid(TWO_PI);
    if (TWO_PI - r).abs() < MOMENTUM_TOL {
        0.0
    } else {
        r
    }
}

impl Momentum {
    pub fn new(components: Vec<f64>) -> Self {
        Self {
            components: components.into_iter().map(reduce).collect(),
            label: None,
        }
    }

    pub fn labeled(components: Vec<f64>, label: SymmetryPoint) -> Self {
        Self {
            label: Some(label),
            ..Self::new(components)
        }
    }

    pub fn dimensionality(&self) -> usize {
        self.components.len()
    }

    /// `−k` reduced to `[0, 2π)`.
    pub fn negate(&self) -> Self {
        Self {
            components: self.components.iter().map(|&q| reduce(-q)).collect(),
            label: self.label,
        }
    }

    /// Equality modulo 2π within [`MOMENTUM_TOL`].
    pub fn same_as(&self, other: &Momentum) -> bool {
        self.dimensionality() == other.dimensionality()
            && self
                .components
                .iter()
                .zip(&other.components)
                .all(|(&a, &b)| {
                    let d = (a - b).rem_euclid(TWO_PI);
                    d < MOMENTUM_TOL || TWO_PI - d < MOMENTUM_TOL
                })
    }

    pub fn label_str(&self) -> &'static str {
        self.label.map(SymmetryPoint::as_str).unwrap_or("")
    }
}

impl PartialEq for Momentum {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl fmt::Display for Momentum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(label) = self.label {
            write!(f, "{label}")?;
        }
        write!(f, "(")?;
        for (i, q) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{:.6}π", q / PI)?;
        }
        write!(f, ")")
    }
}

/// All momenta `2π n_i / L_i`, `n_i ∈ 0..L_i`, with the x index varying fastest.
pub fn momentum_grid(cell: &UnitCell) -> Vec<Momentum> {
    cell.sites()
        .map(|n| {
            Momentum::new(
                n.iter()
                    .zip(cell.dims())
                    .map(|(&ni, &l)| TWO_PI * ni as f64 / l as f64)
                    .collect(),
            )
        })
        .collect()
}

/// Labelled path through the Brillouin zone: X→M→Σ→Γ→X→Σ in 2D, Γ→X→M→R→Γ in 3D.
pub fn high_symmetry_path(dimensionality: usize) -> LatticeResult<Vec<Momentum>> {
    use SymmetryPoint::*;
    let points: &[SymmetryPoint] = match dimensionality {
        2 => &[X, M, Sigma, Gamma, X, Sigma],
        3 => &[Gamma, X, M, R, Gamma],
        other => return Err(LatticeError::UnsupportedDimensionality(other)),
    };
    points.iter().map(|p| p.momentum(dimensionality)).collect()
}

/// `e^{i k·r}`.
pub fn phase(k: &Momentum, r: &[usize]) -> LatticeResult<C64> {
    if k.dimensionality() != r.len() {
        return Err(LatticeError::DimensionMismatch {
            momentum: k.dimensionality(),
            expected: r.len(),
        });
    }
    let arg: f64 = k
        .components
        .iter()
        .zip(r)
        .map(|(&q, &x)| q * x as f64)
        .sum();
    Ok(C64::from_polar(1.0, arg))
}

/// Smallest periodic cell (every axis at least 2) on which `k` is commensurate.
pub fn minimal_cell_for(k: &Momentum) -> LatticeResult<UnitCell> {
    check_dimensionality(k.dimensionality())?;
    let dims = k
        .components
        .iter()
        .map(|&q| {
            (1..=MAX_PERIOD)
                .find(|&l| is_integer(q * l as f64 / TWO_PI))
                .map(|l| l.max(2))
                .ok_or(LatticeError::IrrationalMomentum(q))
        })
        .collect::<LatticeResult<Vec<_>>>()?;
    UnitCell::new(dims)
}
