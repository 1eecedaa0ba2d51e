//! Reference values computed symbolically (sympy, exact rationals) from the
//! displayed expressions, independently of the Rust coefficient tables.

use std::f64::consts::PI;

use ipeps_dispersion::model::Phase;
use ipeps_dispersion::{series_delta, Momentum, SeriesSpec};
use proptest::prelude::*;

const H: f64 = PI / 2.0;

fn check(d: usize, phase: Phase, cases: &[(&[f64], f64, f64)]) {
    for &(k, coupling, expected) in cases {
        let spec = SeriesSpec::new(d, phase, coupling).unwrap();
        let got = series_delta(&spec, &Momentum::new(k.to_vec())).unwrap();
        assert!(
            (got - expected).abs() < 1e-12,
            "{d}D {phase:?} coupling={coupling} k={k:?}: {got} vs {expected}"
        );
    }
}

#[test]
fn para_2d_frozen() {
    check(
        2,
        Phase::Paramagnetic,
        &[
            (&[0.0, 0.0], 0.0, 2.0),
            (&[PI, 0.0], 0.1, 2.02015),
            (&[PI, PI], 0.15, 2.562846875),
            (&[H, H], 0.2, 2.0824),
            (&[0.3, 1.7], 0.25, 1.7054445242766201241),
        ],
    );
}

#[test]
fn para_3d_frozen() {
    check(
        3,
        Phase::Paramagnetic,
        &[
            (&[0.0, 0.0, 0.0], 0.0, 2.0),
            (&[PI, 0.0, 0.0], 0.1, 1.823),
            (&[PI, PI, 0.0], 0.15, 2.334875),
            (&[PI, PI, PI], 0.2, 3.08),
            (&[0.3, 1.7, 0.5], 0.25, 1.1831565763703667617),
        ],
    );
}

#[test]
fn ferro_2d_frozen() {
    check(
        2,
        Phase::Ferromagnetic,
        &[
            (&[0.0, 0.0], 0.5, 7.8156462598730016638),
            (&[PI, 0.0], 1.0, 7.7729571307146990741),
            (&[PI, PI], 1.5, 8.5312790870666503906),
            (&[H, H], 2.0, 7.1255063657407407407),
            (&[0.3, 1.7], 0.1, 7.9954375265327950670),
            (&[PI, PI], 1.0, 8.24364217122396),
        ],
    );
}

#[test]
fn ferro_3d_frozen() {
    check(
        3,
        Phase::Ferromagnetic,
        &[
            (&[0.0, 0.0, 0.0], 0.5, 11.916898148148148148),
            (&[PI, 0.0, 0.0], 1.0, 11.836458333333333333),
            (&[PI, PI, 0.0], 1.5, 12.00703125),
            (&[PI, PI, PI], 2.0, 12.642592592592592593),
            (&[0.3, 1.7, 0.5], 0.1, 11.997746950609232455),
        ],
    );
}

#[test]
fn para_gap_at_gamma_closes_with_j() {
    let gap = |j: f64| {
        let spec = SeriesSpec::new(2, Phase::Paramagnetic, j).unwrap();
        series_delta(&spec, &Momentum::new(vec![0.0, 0.0])).unwrap()
    };
    let js: Vec<f64> = (0..=40).map(|i| 0.2 * i as f64 / 40.0).collect();
    assert!(js.windows(2).all(|w| gap(w[1]) < gap(w[0])));
}

fn specs() -> impl Strategy<Value = (SeriesSpec, Vec<f64>)> {
    // couplings span each series' physical range
    (2usize..=3, prop::bool::ANY, 0.0..1.0f64).prop_flat_map(|(d, ferro, u)| {
        let (phase, c) = if ferro {
            (Phase::Ferromagnetic, 4.0 * u)
        } else {
            (Phase::Paramagnetic, 0.3 * u)
        };
        let spec = SeriesSpec::new(d, phase, c).unwrap();
        (Just(spec), prop::collection::vec(-10.0..10.0f64, d))
    })
}

proptest! {
    #[test]
    fn even_and_permutation_invariant((spec, k) in specs()) {
        let at = |c: Vec<f64>| series_delta(&spec, &Momentum::new(c)).unwrap();
        let base = at(k.clone());
        prop_assert!((at(k.iter().map(|x| -x).collect()) - base).abs() < 1e-14 * base.abs().max(1.0));
        let mut rev = k.clone();
        rev.reverse();
        prop_assert!((at(rev) - base).abs() < 1e-13);
        let mut rot = k.clone();
        rot.rotate_left(1);
        prop_assert!((at(rot) - base).abs() < 1e-13);
    }
}
