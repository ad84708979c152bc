//! Exact network derivatives by forward-mode propagation of second-order
//! jets (value, gradient, Hessian), with nested central differences on top
//! of the exact jets for third and higher orders.

use alloc::vec::Vec;

use crate::error::Error;
use crate::math::{self, Kahan};
use crate::net::Network;

/// Highest input dimension the jet propagation supports.
pub const MAX_DIM: usize = 3;

/// Value, gradient and symmetric Hessian of one scalar quantity with
/// respect to up to three inputs. The Hessian is packed upper-triangular.
#[derive(Debug, Clone, Copy, Default)]
pub struct Jet2 {
    pub dim: usize,
    pub v: f64,
    pub g: [f64; MAX_DIM],
    pub h: [f64; 6],
}

pub(crate) fn h_index(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    a * MAX_DIM - a * (a + 1) / 2 + b
}

impl Jet2 {
    fn constant(dim: usize, v: f64) -> Self {
        Jet2 { dim, v, g: [0.0; MAX_DIM], h: [0.0; 6] }
    }

    fn seed(dim: usize, v: f64, coord: usize) -> Self {
        let mut j = Jet2::constant(dim, v);
        j.g[coord] = 1.0;
        j
    }
}

/// Result of a derivative evaluation. `one_sided` flags orders beyond the
/// activation's continuous differentiability, where the value is the
/// a.e./one-sided interpretation rather than a classical derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivEval {
    pub value: f64,
    pub one_sided: bool,
}

/// Jets of all outputs of `net` at `x`.
pub fn realize_jet(net: &Network, x: &[f64]) -> Result<Vec<Jet2>, Error> {
    let d = net.input_dim;
    if x.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.len(), context: "jet input" });
    }
    if d > MAX_DIM {
        return Err(Error::DimensionMismatch {
            expected: MAX_DIM,
            got: d,
            context: "jet input dimension",
        });
    }
    let mut cur: Vec<Jet2> = (0..d).map(|i| Jet2::seed(d, x[i], i)).collect();
    let mut next: Vec<Jet2> = Vec::new();
    let last = net.layers.len() - 1;
    for (ell, layer) in net.layers.iter().enumerate() {
        next.clear();
        next.reserve(layer.rows);
        let mut idx = 0;
        for i in 0..layer.rows {
            let mut v = Kahan::default();
            let mut g = [Kahan::default(); MAX_DIM];
            let mut h = [Kahan::default(); 6];
            v.add(layer.bias[i]);
            while idx < layer.entries.len() && layer.entries[idx].0 as usize == i {
                let (_, jcol, w) = layer.entries[idx];
                let src = &cur[jcol as usize];
                v.add(w * src.v);
                for c in 0..d {
                    g[c].add(w * src.g[c]);
                }
                for t in 0..6 {
                    h[t].add(w * src.h[t]);
                }
                idx += 1;
            }
            let mut out = Jet2::constant(d, v.value());
            for c in 0..d {
                out.g[c] = g[c].value();
            }
            for t in 0..6 {
                out.h[t] = h[t].value();
            }
            next.push(out);
        }
        if ell != last {
            for j in next.iter_mut() {
                let d1 = net.activation.deriv(j.v, 1);
                let d2 = net.activation.deriv(j.v, 2);
                j.v = net.activation.deriv(j.v, 0);
                let g0 = j.g;
                for a in 0..d {
                    for b in a..d {
                        let t = h_index(a, b);
                        j.h[t] = d1 * j.h[t] + d2 * g0[a] * g0[b];
                    }
                }
                for c in 0..d {
                    j.g[c] = d1 * g0[c];
                }
            }
        }
        core::mem::swap(&mut cur, &mut next);
    }
    Ok(cur)
}

/// Mixed partial D^α of output `out` of `net` at `x`. Orders ≤ 2 come from
/// the jets exactly; order m ≥ 3 is a central difference of the exact
/// order-(m−1) derivative with step (machine ε)^{1/(m+2)} per coordinate,
/// scaled by the coordinate's magnitude.
pub fn derivative(net: &Network, x: &[f64], alpha: &[u8], out: usize) -> Result<DerivEval, Error> {
    if alpha.len() != net.input_dim {
        return Err(Error::DimensionMismatch {
            expected: net.input_dim,
            got: alpha.len(),
            context: "derivative multi-index",
        });
    }
    let order: u8 = alpha.iter().sum();
    let one_sided = match net.activation.smoothness {
        Some(j) => order > j,
        None => false,
    };
    let value = derivative_value(net, x, alpha, out, order)?;
    Ok(DerivEval { value, one_sided })
}

fn derivative_value(
    net: &Network,
    x: &[f64],
    alpha: &[u8],
    out: usize,
    order: u8,
) -> Result<f64, Error> {
    if order <= 2 {
        let jets = realize_jet(net, x)?;
        let jet = jets.get(out).ok_or(Error::DimensionMismatch {
            expected: out + 1,
            got: jets.len(),
            context: "derivative output index",
        })?;
        let mut coords = [0usize; 2];
        let mut n = 0;
        for (c, &a) in alpha.iter().enumerate() {
            for _ in 0..a {
                coords[n] = c;
                n += 1;
            }
        }
        return Ok(match n {
            0 => jet.v,
            1 => jet.g[coords[0]],
            _ => jet.h[h_index(coords[0], coords[1])],
        });
    }
    let i = alpha
        .iter()
        .position(|&a| a > 0)
        .expect("order ≥ 3 implies a nonzero index");
    let mut beta = alpha.to_vec();
    beta[i] -= 1;
    let h = math::powf(f64::EPSILON, 1.0 / (order as f64 + 2.0)) * (1.0 + math::abs(x[i]));
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[i] += h;
    xm[i] -= h;
    let fp = derivative_value(net, &xp, &beta, out, order - 1)?;
    let fm = derivative_value(net, &xm, &beta, out, order - 1)?;
    Ok((fp - fm) / (2.0 * h))
}
