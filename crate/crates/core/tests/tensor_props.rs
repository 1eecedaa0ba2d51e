mod common;

use ipeps_dispersion::tensor::qr;
use ipeps_dispersion::{svd_truncate, Tensor};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use common::naive_contract;

fn tensor_with_shape(shape: Vec<usize>) -> impl Strategy<Value = Tensor> {
    let n: usize = shape.iter().product();
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n).prop_map(move |v| {
        Tensor::new(
            shape.clone(),
            v.into_iter().map(|(r, i)| C64::new(r, i)).collect(),
        )
        .unwrap()
    })
}

/// Two random tensors plus a random pairing of `n` of their axes with equal dims.
fn contraction_case() -> impl Strategy<Value = (Tensor, Vec<usize>, Tensor, Vec<usize>)> {
    (1usize..=4, 1usize..=4)
        .prop_flat_map(|(ra, rb)| {
            (
                prop::collection::vec(1usize..=5, ra),
                prop::collection::vec(1usize..=5, rb),
                0..=ra.min(rb),
                Just(ra),
                Just(rb),
            )
        })
        .prop_flat_map(|(sa, sb, n, ra, rb)| {
            (
                Just(sa),
                Just(sb),
                Just(Vec::from_iter(0..ra)).prop_shuffle(),
                Just(Vec::from_iter(0..rb)).prop_shuffle(),
                Just(n),
            )
        })
        .prop_flat_map(|(sa, mut sb, pa, pb, n)| {
            let axes_a = pa[..n].to_vec();
            let axes_b = pb[..n].to_vec();
            for (&x, &y) in axes_a.iter().zip(&axes_b) {
                sb[y] = sa[x];
            }
            (
                tensor_with_shape(sa),
                Just(axes_a),
                tensor_with_shape(sb),
                Just(axes_b),
            )
        })
}

fn matrix(max: usize) -> impl Strategy<Value = Tensor> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| tensor_with_shape(vec![r, c]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn contraction_matches_nested_loops((a, axes_a, b, axes_b) in contraction_case()) {
        let got = a.contract(&axes_a, &b, &axes_b).unwrap();
        let (shape, data) = naive_contract(&a, &axes_a, &b, &axes_b);
        prop_assert_eq!(got.shape(), &shape[..]);
        for (x, y) in got.data().iter().zip(&data) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn contraction_is_bilinear(
        (a, axes_a, b, axes_b) in contraction_case(),
        alpha in (-2.0..2.0f64, -2.0..2.0f64),
    ) {
        let alpha = C64::new(alpha.0, alpha.1);
        let left = a.scale(alpha).contract(&axes_a, &b, &axes_b).unwrap();
        let right = a.contract(&axes_a, &b.scale(alpha), &axes_b).unwrap();
        let base = a.contract(&axes_a, &b, &axes_b).unwrap().scale(alpha);
        prop_assert!(left.max_abs_diff(&base) < 1e-12);
        prop_assert!(right.max_abs_diff(&base) < 1e-12);
        let doubled = a.add(&a).unwrap().contract(&axes_a, &b, &axes_b).unwrap();
        let twice = a.contract(&axes_a, &b, &axes_b).unwrap().scale(C64::new(2.0, 0.0));
        prop_assert!(doubled.max_abs_diff(&twice) < 1e-12);
    }

    #[test]
    fn permute_then_inverse_is_identity(
        t in prop::collection::vec(1usize..=4, 1..=5).prop_flat_map(tensor_with_shape),
        seed in any::<u64>(),
    ) {
        let r = t.rank();
        let mut order: Vec<usize> = (0..r).collect();
        // deterministic shuffle from the seed
        let mut s = seed;
        for i in (1..r).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (s >> 33) as usize % (i + 1));
        }
        let mut inverse = vec![0; r];
        for (i, &p) in order.iter().enumerate() {
            inverse[p] = i;
        }
        let back = t.permute(&order).unwrap().permute(&inverse).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn full_rank_svd_is_lossless(m in matrix(6)) {
        let svd = svd_truncate(&m, 6).unwrap();
        prop_assert!(svd.reconstruct().max_abs_diff(&m) < 1e-12 * m.max_abs().max(1.0));
        prop_assert!(svd.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn truncation_error_matches_discarded_weight(m in matrix(6), keep in 1usize..=6) {
        let full = svd_truncate(&m, 6).unwrap();
        let cut = svd_truncate(&m, keep).unwrap();
        prop_assert!(cut.rank() <= keep);
        let total: f64 = full.singular_values.iter().map(|s| s * s).sum();
        let residual = cut.reconstruct().sub(&m).unwrap().norm();
        let expected = residual / total.sqrt();
        prop_assert!((cut.truncation_error - expected).abs() < 1e-10);
    }

    #[test]
    fn qr_reconstructs(m in matrix(6)) {
        let (q, r) = qr(&m).unwrap();
        prop_assert!(q.matmul(&r).unwrap().max_abs_diff(&m) < 1e-12);
    }
}
