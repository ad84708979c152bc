mod common;

use sobonet_core::act::lookup;
use sobonet_core::error::Error;
use sobonet_core::jet;
use sobonet_core::net::{Layer, Network};

/// Composition and stacking are algebraically exact; the only slack allowed
/// is the reassociation of one merged affine map.
const COMPOSE_TOL: f64 = 1e-12;

/// Central differences with step 1e-4 resolve smooth second derivatives to
/// about 1e-8 relative, so 1e-5 leaves two decades of headroom.
const FD_REL_TOL: f64 = 1e-5;

#[test]
fn single_affine_layer_evaluates_exactly() {
    let act = lookup("relu", None).unwrap();
    let net = Network::new(1, act, vec![Layer::new(1, 1, vec![(0, 0, 2.0)], vec![1.0])]).unwrap();
    let y = net.realize(&[3.0]).unwrap();
    assert_eq!(y, vec![7.0], "2x + 1 at x = 3 must give exactly 7");
    let stats = net.stats();
    assert_eq!(stats.depth, 1);
    assert_eq!(stats.connections, 2, "one weight plus one nonzero bias");
}

#[test]
fn relu_applies_between_layers_but_not_after_the_last() {
    let act = lookup("relu", None).unwrap();
    let net = Network::new(
        1,
        act,
        vec![
            Layer::new(1, 1, vec![(0, 0, 1.0)], vec![-1.0]),
            Layer::new(1, 1, vec![(0, 0, 1.0)], vec![0.0]),
        ],
    )
    .unwrap();
    assert_eq!(net.realize(&[2.0]).unwrap(), vec![1.0]);
    // A negative last-layer output must pass through unclamped.
    let neg = Network::new(
        1,
        act,
        vec![
            Layer::new(1, 1, vec![(0, 0, 1.0)], vec![0.0]),
            Layer::new(1, 1, vec![(0, 0, -1.0)], vec![0.0]),
        ],
    )
    .unwrap();
    assert_eq!(neg.realize(&[2.0]).unwrap(), vec![-2.0], "last layer is affine only");
}

#[test]
fn sigmoid_hidden_layer_pins_midpoint() {
    let act = lookup("sigmoid", None).unwrap();
    let net = Network::new(
        1,
        act,
        vec![
            Layer::new(1, 1, vec![(0, 0, 1.0)], vec![0.0]),
            Layer::new(1, 1, vec![(0, 0, 1.0)], vec![0.0]),
        ],
    )
    .unwrap();
    assert_eq!(net.realize(&[0.0]).unwrap(), vec![0.5], "sigma(0) = 1/2");
}

#[test]
fn concat_merges_boundary_into_one_affine_map() {
    let act = lookup("sigmoid", None).unwrap();
    let inner = Network::new(
        2,
        act,
        vec![Layer::from_dense(2, 2, &[5.0, 6.0, 7.0, 8.0], vec![1.0, 1.0])],
    )
    .unwrap();
    let outer = Network::new(
        2,
        act,
        vec![Layer::from_dense(2, 2, &[1.0, 2.0, 3.0, 4.0], vec![0.5, -0.5])],
    )
    .unwrap();
    let merged = outer.concat(&inner).unwrap();
    assert_eq!(merged.depth(), 1, "1 + 1 - 1 layers");
    let layer = &merged.layers[0];
    let mut dense = [0.0f64; 4];
    for &(r, c, w) in &layer.entries {
        dense[(r * 2 + c) as usize] = w;
    }
    assert_eq!(dense, [19.0, 22.0, 43.0, 50.0], "weight block must be the matrix product");
    assert_eq!(layer.bias, vec![3.5, 6.5], "bias must fold the inner offset through");
}

#[test]
fn concat_depth_is_additive_minus_shared_boundary() {
    let act = lookup("sigmoid", None).unwrap();
    let mut r = common::rng(11);
    let inner = common::random_network(&mut r, act, 1, 2, 3);
    let mut outer = common::random_network(&mut r, act, 1, 3, 3);
    while outer.input_dim != inner.output_dim() {
        outer = common::random_network(&mut r, act, inner.output_dim(), 3, 3);
    }
    let joined = outer.concat(&inner).unwrap();
    assert_eq!(joined.depth(), 4, "L1 = 3 and L2 = 2 must join to depth 4");
}

#[test]
fn concat_realization_composes() {
    let act = lookup("tanh", None).unwrap();
    let mut r = common::rng(12);
    for trial in 0..200 {
        let d = 1 + trial % 3;
        let inner = common::random_network(&mut r, act, d, 1 + trial % 4, 4);
        let outer = common::random_network(&mut r, act, inner.output_dim(), 1 + (trial / 3) % 4, 4);
        let joined = outer.concat(&inner).unwrap();
        assert_eq!(joined.depth(), inner.depth() + outer.depth() - 1);
        let x = common::random_point(&mut r, d);
        let mid = inner.realize(&x).unwrap();
        let want = outer.realize(&mid).unwrap();
        let got = joined.realize(&x).unwrap();
        for (g, w) in got.iter().zip(want.iter()) {
            assert!(
                (g - w).abs() <= COMPOSE_TOL,
                "trial {trial}: composition drifted by {:.3e}",
                (g - w).abs()
            );
        }
    }
}

#[test]
fn parallelize_adds_connection_counts() {
    let act = lookup("sigmoid", None).unwrap();
    let five = Network::new(
        1,
        act,
        vec![
            Layer::new(2, 1, vec![(0, 0, 1.0), (1, 0, -1.0)], vec![0.5, 0.0]),
            Layer::new(1, 2, vec![(0, 0, 2.0)], vec![0.25]),
        ],
    )
    .unwrap();
    let seven = Network::new(
        1,
        act,
        vec![
            Layer::new(2, 1, vec![(0, 0, 3.0), (1, 0, 4.0)], vec![1.0, 2.0]),
            Layer::new(1, 2, vec![(0, 0, 1.0), (0, 1, 1.0)], vec![1.0]),
        ],
    )
    .unwrap();
    assert_eq!(five.stats().connections, 5);
    assert_eq!(seven.stats().connections, 7);
    let stacked = Network::parallelize(&[five.clone(), seven.clone()], true).unwrap();
    let stats = stacked.stats();
    assert_eq!(stats.connections, 12, "connections must add under stacking");
    assert_eq!(stats.depth, 2, "depth must be preserved");
    assert_eq!(stacked.output_dim(), 2);
    assert_eq!(stats.max_weight, 4.0, "largest weight of either block");
}

#[test]
fn parallelize_blocks_realize_bitwise_identically() {
    let act = lookup("tanh", None).unwrap();
    let mut r = common::rng(13);
    for trial in 0..50 {
        let d = 1 + trial % 3;
        let a = common::random_network(&mut r, act, d, 2, 4);
        let b = common::random_network(&mut r, act, d, 2, 4);
        let stacked = Network::parallelize(&[a.clone(), b.clone()], true).unwrap();
        let x = common::random_point(&mut r, d);
        let got = stacked.realize(&x).unwrap();
        let wa = a.realize(&x).unwrap();
        let wb = b.realize(&x).unwrap();
        for (g, w) in got.iter().zip(wa.iter().chain(wb.iter())) {
            assert_eq!(
                g.to_bits(),
                w.to_bits(),
                "trial {trial}: block rows must see the same accumulation order"
            );
        }
    }
}

#[test]
fn zero_weights_are_pruned_from_the_count() {
    let act = lookup("relu", None).unwrap();
    let net = Network::new(
        2,
        act,
        vec![Layer::new(2, 2, vec![(0, 0, 0.0), (0, 1, 0.0), (1, 1, 0.0)], vec![0.0, 0.0])],
    )
    .unwrap();
    assert_eq!(net.stats().connections, 0, "all-zero layers carry no connections");
    assert_eq!(net.realize(&[3.0, 4.0]).unwrap(), vec![0.0, 0.0]);
}

#[test]
fn width_mismatch_is_rejected() {
    let act = lookup("relu", None).unwrap();
    let err = Network::new(
        1,
        act,
        vec![
            Layer::new(2, 1, vec![(0, 0, 1.0)], vec![0.0, 0.0]),
            Layer::new(1, 3, vec![(0, 0, 1.0)], vec![0.0]),
        ],
    )
    .unwrap_err();
    assert!(
        matches!(err, Error::DimensionMismatch { expected: 2, got: 3, .. }),
        "got {err:?}"
    );
}

#[test]
fn jet_pins_sigmoid_slope_at_origin() {
    let act = lookup("sigmoid", None).unwrap();
    let net = Network::new(
        1,
        act,
        vec![
            Layer::new(1, 1, vec![(0, 0, 1.0)], vec![0.0]),
            Layer::new(1, 1, vec![(0, 0, 1.0)], vec![0.0]),
        ],
    )
    .unwrap();
    let ev = jet::derivative(&net, &[0.0], &[1], 0).unwrap();
    assert_eq!(ev.value, 0.25, "sigma'(0) = 1/4 exactly");
    assert!(!ev.one_sided);
}

#[test]
fn jet_derivatives_match_finite_differences() {
    let act = lookup("sigmoid", None).unwrap();
    let mut r = common::rng(14);
    let h = 1e-4;
    for trial in 0..20 {
        let net = common::random_network(&mut r, act, 2, 3, 4);
        let x = common::random_point(&mut r, 2);
        let eval = |p: &[f64]| net.realize(p).unwrap()[0];
        for (alpha, fd) in [
            (vec![1u8, 0u8], {
                let (mut a, mut b) = (x.clone(), x.clone());
                a[0] += h;
                b[0] -= h;
                (eval(&a) - eval(&b)) / (2.0 * h)
            }),
            (vec![0, 1], {
                let (mut a, mut b) = (x.clone(), x.clone());
                a[1] += h;
                b[1] -= h;
                (eval(&a) - eval(&b)) / (2.0 * h)
            }),
            (vec![2, 0], {
                let (mut a, mut b) = (x.clone(), x.clone());
                a[0] += h;
                b[0] -= h;
                (eval(&a) - 2.0 * eval(&x) + eval(&b)) / (h * h)
            }),
            (vec![1, 1], {
                let (mut pp, mut pm, mut mp, mut mm) =
                    (x.clone(), x.clone(), x.clone(), x.clone());
                pp[0] += h;
                pp[1] += h;
                pm[0] += h;
                pm[1] -= h;
                mp[0] -= h;
                mp[1] += h;
                mm[0] -= h;
                mm[1] -= h;
                (eval(&pp) - eval(&pm) - eval(&mp) + eval(&mm)) / (4.0 * h * h)
            }),
        ] {
            let exact = jet::derivative(&net, &x, &alpha, 0).unwrap().value;
            let rel = (exact - fd).abs() / exact.abs().max(fd.abs()).max(1.0);
            assert!(
                rel <= FD_REL_TOL,
                "trial {trial} alpha {alpha:?}: exact {exact:.6e} vs fd {fd:.6e} (rel {rel:.2e})"
            );
        }
    }
}
