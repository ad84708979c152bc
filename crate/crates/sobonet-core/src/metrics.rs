//! Measured Sobolev distances between a network and a target function, and
//! least-squares rate fits for sweep data.
//!
//! Distances are estimated on midpoint tensor grids over (0,1)^d: per
//! multi-index α the pointwise deviation |D^α net − D^α f| is aggregated in
//! L^p (quadrature for finite p, maximum for p = ∞), and the norm estimate
//! is the largest per-order aggregate over |α| ≤ k.

use alloc::vec::Vec;

use crate::error::Error;
use crate::jet;
use crate::math;
use crate::net::Network;

/// A target with exact derivative evaluations. `deriv` with the zero
/// multi-index must agree with plain evaluation.
pub trait TargetFn {
    fn dim(&self) -> usize;
    fn deriv(&self, x: &[f64], alpha: &[u8]) -> f64;
    fn eval(&self, x: &[f64]) -> f64 {
        let alpha = alloc::vec![0u8; self.dim()];
        self.deriv(x, &alpha)
    }
}

#[derive(Debug, Clone)]
pub struct NormEstimate {
    pub total: f64,
    /// Aggregate per multi-index, in enumeration order (total order, then lex).
    pub per_order: Vec<(Vec<u8>, f64)>,
    pub grid_n: usize,
    pub k: u8,
    /// Lebesgue exponent; `f64::INFINITY` for the sup norm.
    pub p: f64,
    /// Set when any requested order exceeded the activation's continuous
    /// differentiability somewhere on the grid.
    pub one_sided: bool,
}

/// Default per-axis grid resolution for each input dimension.
pub fn default_grid(d: usize) -> usize {
    match d {
        1 => 512,
        2 => 128,
        _ => 32,
    }
}

/// W^{k,p} distance between `net` (first output) and `f` on (0,1)^d,
/// estimated on a midpoint grid with `grid_n` points per axis (≥ 16).
pub fn sobolev_distance(
    f: &dyn TargetFn,
    net: &Network,
    k: u8,
    p: f64,
    grid_n: usize,
) -> Result<NormEstimate, Error> {
    let d = net.input_dim;
    if f.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: f.dim(), context: "target dimension" });
    }
    if grid_n < 16 {
        return Err(Error::InvalidParameter {
            name: "grid_n",
            message: alloc::format!("need at least 16 points per axis, got {grid_n}"),
        });
    }
    let alphas = math::multi_indices_upto(d, k);
    let n_points = math::powi(grid_n as f64, d as i32) as usize;
    let mut sup = alloc::vec![0.0f64; alphas.len()];
    let mut pow_sum = alloc::vec![math::Kahan::default(); alphas.len()];
    let mut one_sided = false;
    let mut x = alloc::vec![0.0f64; d];
    for flat in 0..n_points {
        let mut rem = flat;
        for c in 0..d {
            let idx = rem % grid_n;
            rem /= grid_n;
            x[c] = (idx as f64 + 0.5) / grid_n as f64;
        }
        // Value-only norms skip jet propagation entirely; it costs about
        // (1 + d)(2 + d)/2 times a plain forward pass.
        let jet0 = if k == 0 {
            jet::Jet2 { dim: d, v: net.realize(&x)?[0], ..jet::Jet2::default() }
        } else {
            jet::realize_jet(net, &x)?[0]
        };
        for (ai, alpha) in alphas.iter().enumerate() {
            let order = math::multi_index_order(alpha);
            let net_val = if order <= 2 {
                let mut coords = [0usize; 2];
                let mut n = 0;
                for (c, &a) in alpha.iter().enumerate() {
                    for _ in 0..a {
                        coords[n] = c;
                        n += 1;
                    }
                }
                match n {
                    0 => jet0.v,
                    1 => jet0.g[coords[0]],
                    _ => jet0.h[jet::h_index(coords[0], coords[1])],
                }
            } else {
                let ev = jet::derivative(net, &x, alpha, 0)?;
                one_sided |= ev.one_sided;
                ev.value
            };
            let dev = math::abs(net_val - f.deriv(&x, alpha));
            sup[ai] = math::fmax(sup[ai], dev);
            if p.is_finite() {
                pow_sum[ai].add(math::powf(dev, p));
            }
        }
    }
    let vol = 1.0 / n_points as f64;
    let mut per_order = Vec::with_capacity(alphas.len());
    let mut total = 0.0;
    for (ai, alpha) in alphas.into_iter().enumerate() {
        let agg = if p.is_finite() {
            math::powf(pow_sum[ai].value() * vol, 1.0 / p)
        } else {
            sup[ai]
        };
        total = math::fmax(total, agg);
        per_order.push((alpha, agg));
    }
    Ok(NormEstimate { total, per_order, grid_n, k, p, one_sided })
}

#[derive(Debug, Clone, Copy)]
pub struct RateFit {
    /// Power-law exponent with the sign convention y ∝ x^{−exponent}
    /// (for `fit_rate`), or decay constant with y ∝ e^{−exponent·x}
    /// (for `fit_decay`).
    pub exponent: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Log-log least squares through (x, y) pairs; `exponent` is the fitted
/// power of decay, so ((0.1, 100), (0.05, 200), (0.025, 400)) gives 1.0.
pub fn fit_rate(pairs: &[(f64, f64)]) -> RateFit {
    fit_transformed(pairs, true)
}

/// Semi-log least squares through (x, y): `exponent` is the fitted
/// exponential decay constant of y against x.
pub fn fit_decay(pairs: &[(f64, f64)]) -> RateFit {
    fit_transformed(pairs, false)
}

fn fit_transformed(pairs: &[(f64, f64)], log_x: bool) -> RateFit {
    assert!(pairs.len() >= 2, "need at least two samples to fit a rate");
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(x, y) in pairs {
        if y > 1e-300 {
            xs.push(if log_x { math::ln(x) } else { x });
            ys.push(math::ln(y));
        }
    }
    if xs.len() < 2 {
        return RateFit { exponent: f64::INFINITY, intercept: 0.0, r2: 1.0 };
    }
    let fit = math::fit_line(&xs, &ys);
    RateFit { exponent: -fit.slope, intercept: fit.intercept, r2: fit.r2 }
}
