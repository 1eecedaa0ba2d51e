//! Linked-cluster series for the TFIM dispersion on the square and simple
//! cubic lattices, transcribed term by term with exact rational coefficients.
//!
//! Paramagnetic series are polynomials in J at g = 1; ferromagnetic series
//! are polynomials in g at J = 1. Each monomial multiplies a product of
//! `cos(n k_axis)` factors.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{self, LatticeError, Momentum};
use crate::model::{Phase, CRITICAL_RATIO_2D, CRITICAL_RATIO_3D};

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("momentum has {found} components, series is {expected}-dimensional")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("coupling must be finite and non-negative, got {0}")]
    InvalidCoupling(f64),

    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

pub type SeriesResult<T> = Result<T, SeriesError>;

/// `coefficient · coupling^power · Π cos(harmonic · k_axis)`.
struct Monomial {
    power: u32,
    num: i64,
    den: i64,
    /// `(harmonic, axis)` pairs.
    cosines: &'static [(u8, u8)],
}

const fn m(power: u32, num: i64, den: i64, cosines: &'static [(u8, u8)]) -> Monomial {
    Monomial {
        power,
        num,
        den,
        cosines,
    }
}

const X: u8 = 0;
const Y: u8 = 1;
const Z: u8 = 2;

static PARA_2D: &[Monomial] = &[
    m(0, 2, 1, &[]),
    // −2J(c1x + c1y)
    m(1, -2, 1, &[(1, X)]),
    m(1, -2, 1, &[(1, Y)]),
    // J²[1 − 2c1x c1y − ½(c2x + c2y)]
    m(2, 1, 1, &[]),
    m(2, -2, 1, &[(1, X), (1, Y)]),
    m(2, -1, 2, &[(2, X)]),
    m(2, -1, 2, &[(2, Y)]),
    // ¼J³[c1x + c1y − 6(c2x c1y + c1x c2y) − (c3x + c3y)]
    m(3, 1, 4, &[(1, X)]),
    m(3, 1, 4, &[(1, Y)]),
    m(3, -6, 4, &[(2, X), (1, Y)]),
    m(3, -6, 4, &[(1, X), (2, Y)]),
    m(3, -1, 4, &[(3, X)]),
    m(3, -1, 4, &[(3, Y)]),
    // J⁴/32[70 − 16c1x c1y − 60c2x c2y − 24(c2x + c2y) − 40(c3x c1y + c1x c3y) − 5(c4x + c4y)]
    m(4, 70, 32, &[]),
    m(4, -16, 32, &[(1, X), (1, Y)]),
    m(4, -60, 32, &[(2, X), (2, Y)]),
    m(4, -24, 32, &[(2, X)]),
    m(4, -24, 32, &[(2, Y)]),
    m(4, -40, 32, &[(3, X), (1, Y)]),
    m(4, -40, 32, &[(1, X), (3, Y)]),
    m(4, -5, 32, &[(4, X)]),
    m(4, -5, 32, &[(4, Y)]),
];

static PARA_3D: &[Monomial] = &[
    m(0, 2, 1, &[]),
    // −2J(c1x + c1y + c1z)
    m(1, -2, 1, &[(1, X)]),
    m(1, -2, 1, &[(1, Y)]),
    m(1, -2, 1, &[(1, Z)]),
    // ½J²[3 − 4(c1x c1y + c1x c1z + c1y c1z) − (c2x + c2y + c2z)]
    m(2, 3, 2, &[]),
    m(2, -4, 2, &[(1, X), (1, Y)]),
    m(2, -4, 2, &[(1, X), (1, Z)]),
    m(2, -4, 2, &[(1, Y), (1, Z)]),
    m(2, -1, 2, &[(2, X)]),
    m(2, -1, 2, &[(2, Y)]),
    m(2, -1, 2, &[(2, Z)]),
    // ¼J³[−24c1x c1y c1z + (c1x + c1y + c1z) − 6(c2x c1y + c1x c2y + c2x c1z
    //     + c1x c2z + c2y c1z + c1y c2z) − (c3x + c3y + c3z)]
    m(3, -24, 4, &[(1, X), (1, Y), (1, Z)]),
    m(3, 1, 4, &[(1, X)]),
    m(3, 1, 4, &[(1, Y)]),
    m(3, 1, 4, &[(1, Z)]),
    m(3, -6, 4, &[(2, X), (1, Y)]),
    m(3, -6, 4, &[(1, X), (2, Y)]),
    m(3, -6, 4, &[(2, X), (1, Z)]),
    m(3, -6, 4, &[(1, X), (2, Z)]),
    m(3, -6, 4, &[(2, Y), (1, Z)]),
    m(3, -6, 4, &[(1, Y), (2, Z)]),
    m(3, -1, 4, &[(3, X)]),
    m(3, -1, 4, &[(3, Y)]),
    m(3, -1, 4, &[(3, Z)]),
];

static FERRO_2D: &[Monomial] = &[
    m(0, 8, 1, &[]),
    // −¼g²(1 + c1x + c1y)
    m(2, -1, 4, &[]),
    m(2, -1, 4, &[(1, X)]),
    m(2, -1, 4, &[(1, Y)]),
    // g⁴/768[19 + 12(c1x + c1y)]
    m(4, 19, 768, &[]),
    m(4, 12, 768, &[(1, X)]),
    m(4, 12, 768, &[(1, Y)]),
    // −g⁶/884736[4745 + 4176c1x c1y + 4710(c1x + c1y) + 504(c2x + c2y)
    //     + 276(c2x c1y + c1x c2y) + 46(c3x + c3y)]
    m(6, -4745, 884736, &[]),
    m(6, -4176, 884736, &[(1, X), (1, Y)]),
    m(6, -4710, 884736, &[(1, X)]),
    m(6, -4710, 884736, &[(1, Y)]),
    m(6, -504, 884736, &[(2, X)]),
    m(6, -504, 884736, &[(2, Y)]),
    m(6, -276, 884736, &[(2, X), (1, Y)]),
    m(6, -276, 884736, &[(1, X), (2, Y)]),
    m(6, -46, 884736, &[(3, X)]),
    m(6, -46, 884736, &[(3, Y)]),
];

static FERRO_3D: &[Monomial] = &[
    m(0, 12, 1, &[]),
    // −g²/12(1 + c1x + c1y + c1z)
    m(2, -1, 12, &[]),
    m(2, -1, 12, &[(1, X)]),
    m(2, -1, 12, &[(1, Y)]),
    m(2, -1, 12, &[(1, Z)]),
    // g⁴/69120[151 + 60(c1x + c1y + c1z) − 5(c2x + c2y + c2z)
    //     − 20(c1x c1y + c1x c1z + c1y c1z)]
    m(4, 151, 69120, &[]),
    m(4, 60, 69120, &[(1, X)]),
    m(4, 60, 69120, &[(1, Y)]),
    m(4, 60, 69120, &[(1, Z)]),
    m(4, -5, 69120, &[(2, X)]),
    m(4, -5, 69120, &[(2, Y)]),
    m(4, -5, 69120, &[(2, Z)]),
    m(4, -20, 69120, &[(1, X), (1, Y)]),
    m(4, -20, 69120, &[(1, X), (1, Z)]),
    m(4, -20, 69120, &[(1, Y), (1, Z)]),
];

/// Which series to evaluate and at what coupling (J for the paramagnet
/// with g = 1, g for the ferromagnet with J = 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesSpec {
    pub dimensionality: usize,
    pub phase: Phase,
    pub coupling: f64,
}

impl SeriesSpec {
    pub fn new(dimensionality: usize, phase: Phase, coupling: f64) -> SeriesResult<Self> {
        lattice::check_dimensionality(dimensionality)?;
        if !coupling.is_finite() || coupling < 0.0 {
            return Err(SeriesError::InvalidCoupling(coupling));
        }
        Ok(Self {
            dimensionality,
            phase,
            coupling,
        })
    }

    /// Highest power of the coupling included in the series.
    pub fn order(&self) -> u32 {
        self.terms().iter().map(|t| t.power).max().unwrap_or(0)
    }

    fn terms(&self) -> &'static [Monomial] {
        match (self.dimensionality, self.phase) {
            (2, Phase::Paramagnetic) => PARA_2D,
            (2, Phase::Ferromagnetic) => FERRO_2D,
            (_, Phase::Paramagnetic) => PARA_3D,
            (_, Phase::Ferromagnetic) => FERRO_3D,
        }
    }

    /// Whether the coupling is inside the range where the truncated series
    /// is a trustworthy reference.
    ///
    /// The paramagnetic series is accepted up to the critical coupling
    /// `1/g_c`. The 2D ferromagnetic series diverges at g = 2; the 3D one is
    /// accepted below g = 4.
    pub fn within_validity(&self) -> bool {
        match (self.dimensionality, self.phase) {
            (2, Phase::Paramagnetic) => self.coupling < 1.0 / CRITICAL_RATIO_2D,
            (_, Phase::Paramagnetic) => self.coupling < 1.0 / CRITICAL_RATIO_3D,
            (2, Phase::Ferromagnetic) => self.coupling < 2.0,
            (_, Phase::Ferromagnetic) => self.coupling < 4.0,
        }
    }
}

/// Evaluates the truncated series at momentum `k`.
pub fn series_delta(spec: &SeriesSpec, k: &Momentum) -> SeriesResult<f64> {
    if k.dimensionality() != spec.dimensionality {
        return Err(SeriesError::DimensionMismatch {
            expected: spec.dimensionality,
            found: k.dimensionality(),
        });
    }
    let q = &k.components;
    Ok(spec
        .terms()
        .iter()
        .map(|t| {
            let trig: f64 = t
                .cosines
                .iter()
                .map(|&(n, axis)| (f64::from(n) * q[usize::from(axis)]).cos())
                .product();
            t.num as f64 / t.den as f64 * spec.coupling.powi(t.power as i32) * trig
        })
        .sum())
}

/// One sample of a reference curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesSample {
    /// Cumulative distance along the path in k-space.
    pub position: f64,
    pub k: Momentum,
    pub delta: f64,
}

/// Evaluates the series on `samples_per_segment` evenly spaced momenta per
/// straight path segment, endpoints included and shared between segments.
pub fn series_curve(
    spec: &SeriesSpec,
    path: &[Momentum],
    samples_per_segment: usize,
) -> SeriesResult<Vec<SeriesSample>> {
    assert!(path.len() >= 2, "a path needs at least two points");
    assert!(
        samples_per_segment >= 2,
        "each segment needs both endpoints"
    );
    let mut out = Vec::new();
    let mut offset = 0.0;
    for (seg, pair) in path.windows(2).enumerate() {
        let (a, b) = (&pair[0].components, &pair[1].components);
        let length: f64 = a
            .iter()
            .zip(b)
            .map(|(x, y)| (y - x).powi(2))
            .sum::<f64>()
            .sqrt();
        let first = if seg == 0 { 0 } else { 1 };
        for i in first..samples_per_segment {
            let t = i as f64 / (samples_per_segment - 1) as f64;
            let comps: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect();
            let mut k = Momentum::new(comps);
            if i == 0 {
                k.label = pair[0].label;
            } else if i == samples_per_segment - 1 {
                k.label = pair[1].label;
            }
            let delta = series_delta(spec, &k)?;
            out.push(SeriesSample {
                position: offset + t * length,
                k,
                delta,
            });
        }
        offset += length;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::SymmetryPoint;
    use std::f64::consts::PI;

    fn k(c: &[f64]) -> Momentum {
        Momentum::new(c.to_vec())
    }

    #[test]
    fn orders_match_printed_truncations() {
        let order = |d, p| SeriesSpec::new(d, p, 0.1).unwrap().order();
        assert_eq!(order(2, Phase::Paramagnetic), 4);
        assert_eq!(order(3, Phase::Paramagnetic), 3);
        assert_eq!(order(2, Phase::Ferromagnetic), 6);
        assert_eq!(order(3, Phase::Ferromagnetic), 4);
    }

    #[test]
    fn zeroth_order_constants() {
        for q in [[0.3, 1.2], [PI, 0.0], [2.0, 5.0]] {
            let para = SeriesSpec::new(2, Phase::Paramagnetic, 0.0).unwrap();
            assert_eq!(series_delta(&para, &k(&q)).unwrap(), 2.0);
            let ferro = SeriesSpec::new(2, Phase::Ferromagnetic, 0.0).unwrap();
            assert_eq!(series_delta(&ferro, &k(&q)).unwrap(), 8.0);
        }
        let ferro3 = SeriesSpec::new(3, Phase::Ferromagnetic, 0.0).unwrap();
        assert_eq!(series_delta(&ferro3, &k(&[0.1, 0.2, 0.3])).unwrap(), 12.0);
    }

    #[test]
    fn paramagnet_x_point() {
        let spec = SeriesSpec::new(2, Phase::Paramagnetic, 0.1).unwrap();
        let v = series_delta(&spec, &k(&[PI, 0.0])).unwrap();
        assert!((v - 2.02015).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let spec = SeriesSpec::new(3, Phase::Paramagnetic, 0.1).unwrap();
        assert!(matches!(
            series_delta(&spec, &k(&[0.0, 0.0])),
            Err(SeriesError::DimensionMismatch {
                expected: 3,
                found: 2
            })
        ));
        assert!(SeriesSpec::new(2, Phase::Paramagnetic, -0.1).is_err());
        assert!(SeriesSpec::new(4, Phase::Paramagnetic, 0.1).is_err());
    }

    #[test]
    fn endpoints_only_with_two_samples() {
        let spec = SeriesSpec::new(2, Phase::Paramagnetic, 0.1).unwrap();
        let path = [
            SymmetryPoint::Gamma.momentum(2).unwrap(),
            SymmetryPoint::X.momentum(2).unwrap(),
        ];
        let curve = series_curve(&spec, &path, 2).unwrap();
        assert_eq!(curve.len(), 2);
        assert_eq!(curve[0].position, 0.0);
        assert!((curve[1].position - PI).abs() < 1e-15);
        assert_eq!(curve[1].k.label, Some(SymmetryPoint::X));
    }

    #[test]
    fn x_to_m_is_monotone() {
        let spec = SeriesSpec::new(2, Phase::Paramagnetic, 0.1).unwrap();
        let path = [
            SymmetryPoint::X.momentum(2).unwrap(),
            SymmetryPoint::M.momentum(2).unwrap(),
        ];
        let curve = series_curve(&spec, &path, 101).unwrap();
        assert_eq!(curve.len(), 101);
        assert!(curve.windows(2).all(|w| w[1].delta > w[0].delta));
    }

    #[test]
    fn shared_segment_endpoints() {
        let spec = SeriesSpec::new(3, Phase::Ferromagnetic, 1.0).unwrap();
        let path = lattice::high_symmetry_path(3).unwrap();
        let curve = series_curve(&spec, &path, 5).unwrap();
        assert_eq!(curve.len(), 1 + 4 * 4);
        assert!(curve.windows(2).all(|w| w[1].position > w[0].position));
    }

    #[test]
    fn validity_ranges() {
        assert!(SeriesSpec::new(2, Phase::Ferromagnetic, 1.0)
            .unwrap()
            .within_validity());
        assert!(!SeriesSpec::new(2, Phase::Ferromagnetic, 2.0)
            .unwrap()
            .within_validity());
        assert!(SeriesSpec::new(3, Phase::Ferromagnetic, 2.0)
            .unwrap()
            .within_validity());
        assert!(!SeriesSpec::new(3, Phase::Ferromagnetic, 4.0)
            .unwrap()
            .within_validity());
        assert!(SeriesSpec::new(2, Phase::Paramagnetic, 0.2)
            .unwrap()
            .within_validity());
    }
}
