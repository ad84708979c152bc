#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sobonet_core::act::Activation;
use sobonet_core::net::{Layer, Network};

/// Deterministic generator for the randomized structural tests.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random sparse network with the given input width and layer count.
/// Weights sit in [-1.5, 1.5], biases in [-0.5, 0.5], and every layer keeps
/// at least one connection so realization never degenerates to a constant.
pub fn random_network(
    rng: &mut ChaCha8Rng,
    act: Activation,
    input_dim: usize,
    depth: usize,
    max_width: usize,
) -> Network {
    let mut layers = Vec::with_capacity(depth);
    let mut prev = input_dim;
    for l in 0..depth {
        let rows = if l + 1 == depth { 1 } else { rng.gen_range(1..=max_width) };
        let mut entries = Vec::new();
        for r in 0..rows {
            for c in 0..prev {
                if rng.gen::<f64>() < 0.7 {
                    entries.push((r as u32, c as u32, rng.gen_range(-1.5..1.5)));
                }
            }
        }
        if entries.is_empty() {
            entries.push((0, 0, rng.gen_range(0.5..1.5)));
        }
        let bias = (0..rows).map(|_| rng.gen_range(-0.5..0.5)).collect();
        layers.push(Layer::new(rows, prev, entries, bias));
        prev = rows;
    }
    Network::new(input_dim, act, layers).expect("random layer widths chain by construction")
}

/// Point in the open unit cube, kept away from the boundary.
pub fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(0.05..0.95)).collect()
}
