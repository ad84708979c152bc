//! Sparse feedforward networks and the calculus on them.
//!
//! A network is a list of affine layers (sparse matrices in sorted
//! coordinate form plus dense biases); the fixed activation is applied
//! after every layer except the last. The two structural operations,
//! concatenation (function composition with the touching layers merged
//! into one affine map) and parallelization (stacking networks of equal
//! depth), are exact weight-level constructions; their realization
//! identities are property-tested rather than assumed.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::act::Activation;
use crate::error::Error;
use crate::math::{self, Kahan};

/// One affine layer: `rows × cols` matrix as sorted (row, col, value)
/// triples with exact zeros omitted, and a dense bias of length `rows`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(u32, u32, f64)>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn new(rows: usize, cols: usize, mut entries: Vec<(u32, u32, f64)>, bias: Vec<f64>) -> Self {
        assert_eq!(bias.len(), rows, "bias length must equal row count");
        entries.retain(|&(_, _, v)| v != 0.0);
        entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        for e in &entries {
            assert!((e.0 as usize) < rows && (e.1 as usize) < cols, "entry out of bounds");
        }
        for w in entries.windows(2) {
            assert!(
                (w[0].0, w[0].1) != (w[1].0, w[1].1),
                "duplicate entry at ({}, {})",
                w[0].0,
                w[0].1
            );
        }
        Layer { rows, cols, entries, bias }
    }

    pub fn from_dense(rows: usize, cols: usize, dense: &[f64], bias: Vec<f64>) -> Self {
        assert_eq!(dense.len(), rows * cols);
        let mut entries = Vec::new();
        for i in 0..rows {
            for j in 0..cols {
                let v = dense[i * cols + j];
                if v != 0.0 {
                    entries.push((i as u32, j as u32, v));
                }
            }
        }
        Layer::new(rows, cols, entries, bias)
    }

    /// Applies the affine map to `x`, entry accumulation in index order
    /// with compensated summation.
    pub fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        debug_assert_eq!(x.len(), self.cols);
        out.clear();
        out.reserve(self.rows);
        let mut idx = 0;
        for i in 0..self.rows {
            let mut acc = Kahan::default();
            acc.add(self.bias[i]);
            while idx < self.entries.len() && self.entries[idx].0 as usize == i {
                let (_, j, v) = self.entries[idx];
                acc.add(v * x[j as usize]);
                idx += 1;
            }
            out.push(acc.value());
        }
    }

    fn nonzero_count(&self) -> usize {
        self.entries.len() + self.bias.iter().filter(|&&b| b != 0.0).count()
    }

    fn max_abs(&self) -> f64 {
        let mut m = 0.0;
        for &(_, _, v) in &self.entries {
            m = math::fmax(m, math::abs(v));
        }
        for &b in &self.bias {
            m = math::fmax(m, math::abs(b));
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub input_dim: usize,
    pub activation: Activation,
    pub layers: Vec<Layer>,
}

/// Size summary: depth counts affine layers, `connections` counts nonzero
/// matrix and bias entries, `max_weight` is the largest magnitude among them.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkStats {
    pub depth: usize,
    pub connections: usize,
    pub max_weight: f64,
    pub widths: Vec<usize>,
}

impl Network {
    pub fn new(input_dim: usize, activation: Activation, layers: Vec<Layer>) -> Result<Self, Error> {
        if layers.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, got: 0, context: "layer count" });
        }
        let mut prev = input_dim;
        for layer in &layers {
            if layer.cols != prev {
                return Err(Error::DimensionMismatch {
                    expected: prev,
                    got: layer.cols,
                    context: "layer input width",
                });
            }
            prev = layer.rows;
        }
        Ok(Network { input_dim, activation, layers })
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.rows)
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut w = Vec::with_capacity(self.layers.len() + 1);
        w.push(self.input_dim);
        for layer in &self.layers {
            w.push(layer.rows);
        }
        w
    }

    pub fn stats(&self) -> NetworkStats {
        let connections = self.layers.iter().map(Layer::nonzero_count).sum();
        let max_weight = self.layers.iter().map(Layer::max_abs).fold(0.0, math::fmax);
        NetworkStats { depth: self.depth(), connections, max_weight, widths: self.widths() }
    }

    /// Forward pass: activation after every layer except the last.
    pub fn realize(&self, x: &[f64]) -> Result<Vec<f64>, Error> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: x.len(),
                context: "realize input",
            });
        }
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (idx, layer) in self.layers.iter().enumerate() {
            layer.apply(&cur, &mut next);
            if idx != last {
                for v in next.iter_mut() {
                    *v = self.activation.deriv(*v, 0);
                }
            }
            core::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Composition `self ∘ inner` with the touching layers merged into one
    /// affine map, so the result has `L(self) + L(inner) − 1` layers.
    pub fn concat(&self, inner: &Network) -> Result<Network, Error> {
        if self.activation != inner.activation {
            return Err(Error::UnsuitableActivation(alloc::string::String::from(
                "concatenation requires a common activation",
            )));
        }
        if self.input_dim != inner.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: inner.output_dim(),
                context: "concat interface width",
            });
        }
        let mut layers: Vec<Layer> = inner.layers[..inner.layers.len() - 1].to_vec();
        let inner_last = inner.layers.last().unwrap();
        let outer_first = &self.layers[0];
        layers.push(merge_affine(outer_first, inner_last));
        layers.extend_from_slice(&self.layers[1..]);
        Network::new(inner.input_dim, self.activation, layers)
    }

    /// Stacks networks of equal depth into one computing all their outputs.
    /// With `shared_input` the operands must read the same input vector and
    /// first layers are stacked row-wise; otherwise the input spaces are
    /// concatenated and every layer is block-diagonal.
    pub fn parallelize(nets: &[Network], shared_input: bool) -> Result<Network, Error> {
        let first = nets.first().ok_or(Error::DimensionMismatch {
            expected: 1,
            got: 0,
            context: "parallelize operand count",
        })?;
        let depth = first.depth();
        for n in nets {
            if n.depth() != depth {
                return Err(Error::DepthMismatch { left: depth, right: n.depth() });
            }
            if n.activation != first.activation {
                return Err(Error::UnsuitableActivation(alloc::string::String::from(
                    "parallelization requires a common activation",
                )));
            }
            if shared_input && n.input_dim != first.input_dim {
                return Err(Error::DimensionMismatch {
                    expected: first.input_dim,
                    got: n.input_dim,
                    context: "parallelize shared input width",
                });
            }
        }
        let input_dim = if shared_input {
            first.input_dim
        } else {
            nets.iter().map(|n| n.input_dim).sum()
        };
        let mut layers = Vec::with_capacity(depth);
        for ell in 0..depth {
            let rows: usize = nets.iter().map(|n| n.layers[ell].rows).sum();
            let cols = if ell == 0 {
                input_dim
            } else {
                nets.iter().map(|n| n.layers[ell].cols).sum()
            };
            let mut entries = Vec::new();
            let mut bias = Vec::with_capacity(rows);
            let mut row_off = 0u32;
            let mut col_off = 0u32;
            for n in nets {
                let l = &n.layers[ell];
                let co = if ell == 0 && shared_input { 0 } else { col_off };
                for &(i, j, v) in &l.entries {
                    entries.push((i + row_off, j + co, v));
                }
                bias.extend_from_slice(&l.bias);
                row_off += l.rows as u32;
                if !(ell == 0 && shared_input) {
                    col_off += l.cols as u32;
                }
            }
            layers.push(Layer::new(rows, cols, entries, bias));
        }
        Network::new(input_dim, first.activation, layers)
    }
}

/// (A_out, b_out) ∘ (A_in, b_in) = (A_out·A_in, A_out·b_in + b_out).
fn merge_affine(outer: &Layer, inner: &Layer) -> Layer {
    debug_assert_eq!(outer.cols, inner.rows);
    let mut acc: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    // Group the inner entries by row for the sparse product.
    let mut inner_rows: Vec<&[(u32, u32, f64)]> = Vec::with_capacity(inner.rows);
    let mut start = 0;
    for r in 0..inner.rows as u32 {
        let end = inner.entries[start..]
            .iter()
            .position(|&(i, _, _)| i != r)
            .map_or(inner.entries.len(), |p| start + p);
        inner_rows.push(&inner.entries[start..end]);
        start = end;
    }
    for &(i, k, v_outer) in &outer.entries {
        for &(_, j, v_inner) in inner_rows[k as usize] {
            *acc.entry((i, j)).or_insert(0.0) += v_outer * v_inner;
        }
    }
    let entries: Vec<(u32, u32, f64)> =
        acc.into_iter().map(|((i, j), v)| (i, j, v)).collect();
    let mut bias = outer.bias.clone();
    for &(i, k, v_outer) in &outer.entries {
        bias[i as usize] += v_outer * inner.bias[k as usize];
    }
    Layer::new(outer.rows, inner.cols, entries, bias)
}
