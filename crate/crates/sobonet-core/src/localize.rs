//! Localized polynomial synthesis: fits a low-degree polynomial on every
//! patch of a uniform grid over (0,1)^d, multiplies each by its bump, and
//! assembles the weighted sum as one network.
//!
//! A branch network per (patch, monomial) pair computes
//! φ_m(x)·(x − m/N)^α by folding the d bump factors and |α| centered
//! coordinates through multiplication gadgets. Branches share every weight
//! except the final combination layer, which carries the fitted
//! coefficients; two targets synthesized against the same plan produce
//! networks that differ in that layer alone.

use alloc::vec::Vec;

use crate::act::{Activation, ActivationClass};
use crate::error::Error;
use crate::gadgets;
use crate::math;
use crate::metrics::{self, TargetFn};
use crate::net::{Layer, Network};
use crate::pu;

const EDGE_OFFSET: f64 = 1e-9;
const FOLD_WINDOW: f64 = 2.5;
const FACTOR_BOUND: f64 = 1.25;
const BUDGET_SHARE: f64 = 0.05;
const PILOT_EPS: f64 = 0.1;
const PILOT_MARGIN: f64 = 0.35;
const MAX_PILOT_DOUBLINGS: u32 = 8;

/// All patch indices of the (N+1)^d grid, in row-major order.
pub fn make_patches(d: usize, n: usize) -> Vec<Vec<usize>> {
    let count = math::powi((n + 1) as f64, d as i32) as usize;
    let mut out = Vec::with_capacity(count);
    for flat in 0..count {
        let mut rem = flat;
        let mut m = alloc::vec![0usize; d];
        for c in m.iter_mut() {
            *c = rem % (n + 1);
            rem /= n + 1;
        }
        out.push(m);
    }
    out
}

/// Least-squares polynomial fit around patch m in the scaled coordinates
/// t = N(x − m/N) ∈ [−1, 1]^d, on a grid of 2·degree + 5 points per axis
/// clipped into (0,1)^d.
#[derive(Debug, Clone)]
pub struct LocalFit {
    /// Multi-indices |β| ≤ degree, in enumeration order.
    pub alphas: Vec<Vec<u8>>,
    /// Coefficient of t^β for each multi-index.
    pub scaled: Vec<f64>,
    /// Largest pointwise residual on the fit grid.
    pub residual: f64,
}

impl LocalFit {
    /// Coefficient of (x − m/N)^β, i.e. the scaled coefficient times N^|β|.
    pub fn centered(&self, i: usize, n: usize) -> f64 {
        let order = math::multi_index_order(&self.alphas[i]) as i32;
        self.scaled[i] * math::powi(n as f64, order)
    }
}

pub fn fit_local_polynomial(
    f: &dyn TargetFn,
    m: &[usize],
    n: usize,
    degree: u8,
) -> Result<LocalFit, Error> {
    let d = f.dim();
    if m.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: m.len(),
            context: "patch index",
        });
    }
    let alphas = math::multi_indices_upto(d, degree);
    let cols = alphas.len();
    let per_axis = 2 * degree as usize + 5;
    let rows = math::powi(per_axis as f64, d as i32) as usize;
    let mut design = alloc::vec![0.0f64; rows * cols];
    let mut rhs = alloc::vec![0.0f64; rows];
    let mut t = alloc::vec![0.0f64; d];
    let mut x = alloc::vec![0.0f64; d];
    for row in 0..rows {
        let mut rem = row;
        for l in 0..d {
            let idx = rem % per_axis;
            rem /= per_axis;
            let raw = m[l] as f64 / n as f64
                + (2.0 * idx as f64 / (per_axis - 1) as f64 - 1.0) / n as f64;
            x[l] = math::fmin(math::fmax(raw, EDGE_OFFSET), 1.0 - EDGE_OFFSET);
            t[l] = n as f64 * (x[l] - m[l] as f64 / n as f64);
        }
        for (ci, alpha) in alphas.iter().enumerate() {
            let mut v = 1.0;
            for (l, &a) in alpha.iter().enumerate() {
                v *= math::powi(t[l], a as i32);
            }
            design[row * cols + ci] = v;
        }
        rhs[row] = f.eval(&x);
    }
    let coeffs = least_squares(&mut design, &rhs, rows, cols)?;
    let mut residual = 0.0f64;
    for row in 0..rows {
        let mut v = math::Kahan::default();
        for ci in 0..cols {
            v.add(design[row * cols + ci] * coeffs[ci]);
        }
        residual = math::fmax(residual, math::abs(v.value() - rhs[row]));
    }
    Ok(LocalFit { alphas, scaled: coeffs, residual })
}

/// Modified Gram–Schmidt with one reorthogonalization pass. `design` is
/// consumed as workspace and restored is not; callers keep their own copy
/// if they need the original columns.
fn least_squares(
    design: &mut [f64],
    rhs: &[f64],
    rows: usize,
    cols: usize,
) -> Result<Vec<f64>, Error> {
    let mut q = alloc::vec![0.0f64; rows * cols];
    let mut r = alloc::vec![0.0f64; cols * cols];
    for j in 0..cols {
        for i in 0..rows {
            q[i * cols + j] = design[i * cols + j];
        }
        for _pass in 0..2 {
            for p in 0..j {
                let mut dot = math::Kahan::default();
                for i in 0..rows {
                    dot.add(q[i * cols + p] * q[i * cols + j]);
                }
                let dot = dot.value();
                r[p * cols + j] += dot;
                for i in 0..rows {
                    q[i * cols + j] -= dot * q[i * cols + p];
                }
            }
        }
        let mut norm = math::Kahan::default();
        for i in 0..rows {
            norm.add(q[i * cols + j] * q[i * cols + j]);
        }
        let norm = math::sqrt(norm.value());
        if norm < 1e-12 {
            return Err(Error::InvalidParameter {
                name: "design",
                message: alloc::format!("rank-deficient fit basis at column {j}"),
            });
        }
        r[j * cols + j] = norm;
        for i in 0..rows {
            q[i * cols + j] /= norm;
        }
    }
    let mut proj = alloc::vec![0.0f64; cols];
    for (j, pj) in proj.iter_mut().enumerate() {
        let mut dot = math::Kahan::default();
        for i in 0..rows {
            dot.add(q[i * cols + j] * rhs[i]);
        }
        *pj = dot.value();
    }
    let mut coeffs = alloc::vec![0.0f64; cols];
    for j in (0..cols).rev() {
        let mut v = proj[j];
        for p in j + 1..cols {
            v -= r[j * cols + p] * coeffs[p];
        }
        coeffs[j] = v / r[j * cols + j];
    }
    Ok(coeffs)
}

/// Patch count per axis for a requested accuracy, from the calibrated
/// constant and the rate exponent of the construction.
pub fn choose_n(act: &Activation, n_smooth: u8, k: u8, eps: f64, ctilde: f64, mu: f64) -> usize {
    let exponent = 1.0 / rate_exponent(act, n_smooth, k, mu);
    let n = math::ceil(math::powf(eps / (2.0 * ctilde), -exponent));
    math::fmax(n, 1.0) as usize
}

/// Convergence exponent in N: n − k, less the sharpness drag μ·max(0, k−τ)
/// when the bump tails decay exponentially.
pub fn rate_exponent(act: &Activation, n_smooth: u8, k: u8, mu: f64) -> f64 {
    let drag = if act.class == ActivationClass::Exponential {
        mu * k.saturating_sub(act.tau) as f64
    } else {
        0.0
    };
    n_smooth as f64 - k as f64 - drag
}

#[derive(Debug, Clone)]
pub struct SynthesisPlan {
    pub d: usize,
    pub p: f64,
    pub n_smooth: u8,
    pub k: u8,
    pub eps: f64,
    pub mu: f64,
    pub ctilde: f64,
    /// Patch intervals per axis.
    pub n_patches: usize,
    /// Bump sharpness.
    pub s: f64,
    /// Per-branch sub-accuracy implied by the coefficient scales.
    pub eps_tilde: f64,
    /// Growth exponent for weight magnitudes: the largest weight scales
    /// like ε^{−θ} as ε shrinks, up to a constant factor.
    pub theta: f64,
    /// Layer count of the synthesized network.
    pub depth: usize,
    /// Accuracy target handed to each gadget search.
    pub stage_eps: f64,
    /// Sum of |coefficient| over all branches, in scaled coordinates.
    pub coeff_sum: f64,
    /// Largest |coefficient|, in scaled coordinates.
    pub coeff_max: f64,
}

/// Builds the run plan for approximating `f` to accuracy eps in W^{k,p}:
/// patch count, sharpness, per-gadget budgets, and weight-growth bound.
/// The budgets come from a fitting pass over all patches, so a plan is
/// specific to the target's coefficient scales but can be reused to
/// synthesize other targets against an identical scaffold.
pub fn plan(
    f: &dyn TargetFn,
    act: &Activation,
    p: f64,
    n_smooth: u8,
    k: u8,
    eps: f64,
    mu: f64,
    ctilde: f64,
) -> Result<SynthesisPlan, Error> {
    let n = choose_n(act, n_smooth, k, eps, ctilde, mu);
    plan_with_n(f, act, p, n_smooth, k, eps, mu, ctilde, n)
}

/// As `plan`, with the patch count forced. Used by calibration.
pub fn plan_with_n(
    f: &dyn TargetFn,
    act: &Activation,
    p: f64,
    n_smooth: u8,
    k: u8,
    eps: f64,
    mu: f64,
    ctilde: f64,
    n_patches: usize,
) -> Result<SynthesisPlan, Error> {
    let d = f.dim();
    if d == 0 || d > 3 {
        return Err(Error::InvalidParameter {
            name: "d",
            message: alloc::format!("dimension must be 1..=3, got {d}"),
        });
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter {
            name: "eps",
            message: alloc::format!("accuracy must lie in (0, 0.5), got {eps}"),
        });
    }
    if n_smooth == 0 || n_smooth > 6 {
        return Err(Error::InvalidParameter {
            name: "n",
            message: alloc::format!("smoothness order must be 1..=6, got {n_smooth}"),
        });
    }
    if k > 3 || k >= n_smooth {
        return Err(Error::InvalidParameter {
            name: "k",
            message: alloc::format!("norm order must satisfy k ≤ 3 and k < n, got {k}"),
        });
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter {
            name: "p",
            message: alloc::format!("Lebesgue exponent must be ≥ 1, got {p}"),
        });
    }
    if rate_exponent(act, n_smooth, k, mu) <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "mu",
            message: alloc::format!(
                "sharpness drag leaves no convergence rate for n={n_smooth}, k={k}, mu={mu}"
            ),
        });
    }
    let n = n_patches.max(1);
    let s = pu::select_scaling(act, n, d, p, n_smooth, mu);
    let degree = n_smooth - 1;
    let mut coeff_sum = math::Kahan::default();
    let mut coeff_max = 0.0f64;
    for m in make_patches(d, n) {
        let fit = fit_local_polynomial(f, &m, n, degree)?;
        for &c in &fit.scaled {
            coeff_sum.add(math::abs(c));
            coeff_max = math::fmax(coeff_max, math::abs(c));
        }
    }
    let coeff_sum = coeff_sum.value();
    let inv_p = if p.is_finite() { 1.0 / p } else { 0.0 };
    let rate = rate_exponent(act, n_smooth, k, mu);
    let drag = (n_smooth - k) as f64 - rate;
    let load = d as f64 * inv_p + d as f64 + k as f64 + drag;
    let eps_tilde = eps * math::powf(n as f64, -load);
    let theta = 2.0 + (2.0 * load + d as f64 * inv_p + d as f64) / rate;
    let folds = (d + degree as usize).saturating_sub(1).max(1) as f64;
    let stage_eps = if k == 0 {
        BUDGET_SHARE * eps / (folds * math::fmax(coeff_sum, 1.0))
    } else {
        let amplification = coeff_sum
            + math::powi(2.0, d as i32) * coeff_max * 3.0 * n as f64 * s;
        BUDGET_SHARE * eps / (folds * amplification)
    };
    Ok(SynthesisPlan {
        d,
        p,
        n_smooth,
        k,
        eps,
        mu,
        ctilde,
        n_patches: n,
        s,
        eps_tilde,
        theta,
        depth: d + n_smooth as usize,
        stage_eps,
        coeff_sum,
        coeff_max,
    })
}

#[derive(Debug, Clone)]
pub struct SynthesisInfo {
    pub branches: usize,
    pub patches: usize,
    /// Sum and maximum of |coefficient| actually emitted, scaled basis.
    pub coeff_sum: f64,
    pub coeff_max: f64,
}

/// Emits the network for `f` under `plan`. Every weight except the final
/// combination layer depends only on the plan.
pub fn synthesize(
    f: &dyn TargetFn,
    act: &Activation,
    plan: &SynthesisPlan,
) -> Result<(Network, SynthesisInfo), Error> {
    if f.dim() != plan.d {
        return Err(Error::DimensionMismatch {
            expected: plan.d,
            got: f.dim(),
            context: "synthesis target dimension",
        });
    }
    let d = plan.d;
    let n = plan.n_patches;
    let degree = plan.n_smooth - 1;
    let alphas = math::multi_indices_upto(d, degree);
    let patches = make_patches(d, n);
    let mut kit = GadgetKit::new(*act, plan.stage_eps);

    let mut branches = Vec::with_capacity(patches.len() * alphas.len());
    let mut coeffs = Vec::with_capacity(patches.len() * alphas.len());
    let mut coeff_sum = math::Kahan::default();
    let mut coeff_max = 0.0f64;
    for m in &patches {
        let fit = fit_local_polynomial(f, m, n, degree)?;
        for (ai, alpha) in alphas.iter().enumerate() {
            let branch = build_branch(act, m, alpha, n, plan.s, plan.depth, &mut kit)?;
            branches.push(branch);
            coeffs.push(fit.centered(ai, n));
            coeff_sum.add(math::abs(fit.scaled[ai]));
            coeff_max = math::fmax(coeff_max, math::abs(fit.scaled[ai]));
        }
    }
    let count = branches.len();
    let stack = Network::parallelize(&branches, true)?;
    let entries = coeffs
        .iter()
        .enumerate()
        .map(|(i, &c)| (0u32, i as u32, c))
        .collect();
    let combine = Network::new(
        count,
        *act,
        alloc::vec![Layer::new(1, count, entries, alloc::vec![0.0])],
    )?;
    let net = combine.concat(&stack)?;
    let info = SynthesisInfo {
        branches: count,
        patches: patches.len(),
        coeff_sum: coeff_sum.value(),
        coeff_max,
    };
    Ok((net, info))
}

/// Lazily built, reused gadget templates. All searches in a synthesis run
/// happen here once per shape, not once per branch.
struct GadgetKit {
    act: Activation,
    eps: f64,
    mult: Option<Network>,
    coord: Option<Network>,
    passthrough: Vec<Option<Network>>,
    chains: Vec<Option<Network>>,
}

impl GadgetKit {
    fn new(act: Activation, eps: f64) -> Self {
        GadgetKit { act, eps, mult: None, coord: None, passthrough: Vec::new(), chains: Vec::new() }
    }

    fn mult(&mut self) -> Result<&Network, Error> {
        if self.mult.is_none() {
            let (net, _) = gadgets::mult_net(&self.act, FOLD_WINDOW, self.eps)?;
            self.mult = Some(net);
        }
        Ok(self.mult.as_ref().unwrap())
    }

    /// Depth-2 identity on one coordinate, window wide enough for (0,1).
    fn coord(&mut self) -> Result<&Network, Error> {
        if self.coord.is_none() {
            let (net, _) = gadgets::identity_net(&self.act, 1, 2, FACTOR_BOUND, self.eps)?;
            self.coord = Some(net);
        }
        Ok(self.coord.as_ref().unwrap())
    }

    fn passthrough(&mut self, width: usize) -> Result<&Network, Error> {
        if self.passthrough.len() < width {
            self.passthrough.resize(width, None);
        }
        if self.passthrough[width - 1].is_none() {
            let (net, _) = gadgets::identity_net(&self.act, width, 2, FOLD_WINDOW, self.eps)?;
            self.passthrough[width - 1] = Some(net);
        }
        Ok(self.passthrough[width - 1].as_ref().unwrap())
    }

    fn chain(&mut self, depth: usize) -> Result<&Network, Error> {
        if self.chains.len() < depth {
            self.chains.resize(depth, None);
        }
        if self.chains[depth - 1].is_none() {
            let (net, _) = gadgets::identity_net(&self.act, 1, depth, FOLD_WINDOW, self.eps)?;
            self.chains[depth - 1] = Some(net);
        }
        Ok(self.chains[depth - 1].as_ref().unwrap())
    }
}

/// One branch: φ_m(x)·(x − m/N)^α, padded to `depth` layers.
fn build_branch(
    act: &Activation,
    m: &[usize],
    alpha: &[u8],
    n: usize,
    s: f64,
    depth: usize,
    kit: &mut GadgetKit,
) -> Result<Network, Error> {
    let d = m.len();
    let mut factors = Vec::new();
    factors.push(pu::bump_network(act, m, n, s)?);
    for (l, &a) in alpha.iter().enumerate() {
        for _ in 0..a {
            let shift = m[l] as f64 / n as f64;
            factors.push(shifted_coordinate(kit.coord()?, d, l, shift));
        }
    }
    let stacked = Network::parallelize(&factors, true)?;
    let mut outputs = stacked.output_dim();
    let mut running = stacked;
    while outputs > 1 {
        let mult = kit.mult()?.clone();
        let rest = outputs - 2;
        let id = if rest > 0 {
            Some(kit.passthrough(rest)?.clone())
        } else {
            None
        };
        running = gadgets::fold_product(running, &mult, id.as_ref())?;
        outputs -= 1;
    }
    let have = running.depth();
    if have < depth {
        let chain = kit.chain(depth - have + 1)?.clone();
        running = chain.concat(&running)?;
    }
    Ok(running)
}

/// Rewires the 1-input coordinate identity to read column `col` of a
/// d-dimensional input and subtract `shift` from its output.
fn shifted_coordinate(template: &Network, d: usize, col: usize, shift: f64) -> Network {
    let mut net = template.clone();
    net.input_dim = d;
    let first = &mut net.layers[0];
    first.cols = d;
    for e in first.entries.iter_mut() {
        e.1 = col as u32;
    }
    let last = net.layers.last_mut().expect("identity nets have layers");
    last.bias[0] -= shift;
    net
}

/// Direct evaluator for the localized polynomial sum Σ_m φ_m·p_m, sharing
/// no code with the network assembly path. Reference for synthesis tests.
pub struct LocalizedSum {
    act: Activation,
    d: usize,
    n: usize,
    s: f64,
    patches: Vec<Vec<usize>>,
    fits: Vec<LocalFit>,
}

impl LocalizedSum {
    pub fn new(
        f: &dyn TargetFn,
        act: &Activation,
        n: usize,
        s: f64,
        degree: u8,
    ) -> Result<Self, Error> {
        let d = f.dim();
        let patches = make_patches(d, n);
        let mut fits = Vec::with_capacity(patches.len());
        for m in &patches {
            fits.push(fit_local_polynomial(f, m, n, degree)?);
        }
        Ok(LocalizedSum { act: *act, d, n, s, patches, fits })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let nf = self.n as f64;
        let mut acc = math::Kahan::default();
        for (m, fit) in self.patches.iter().zip(&self.fits) {
            let mut bump = 1.0;
            for l in 0..self.d {
                bump *= pu::bump_1d(&self.act, self.s, 3.0 * nf * (x[l] - m[l] as f64 / nf));
            }
            if bump == 0.0 {
                continue;
            }
            let mut poly = math::Kahan::default();
            for (alpha, &c) in fit.alphas.iter().zip(&fit.scaled) {
                let mut term = c;
                for (l, &a) in alpha.iter().enumerate() {
                    term *= math::powi(nf * (x[l] - m[l] as f64 / nf), a as i32);
                }
                poly.add(term);
            }
            acc.add(bump * poly.value());
        }
        acc.value()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Calibration {
    pub ctilde: f64,
    pub pilot_n: usize,
    pub pilot_error: f64,
    pub doublings: u32,
}

/// Measures the rate constant for (f, act, norm) by running the pilot
/// synthesis at ε = 0.1 and doubling the patch count until the measured
/// error clears the target with margin. The returned constant makes
/// `choose_n` reproduce the pilot patch count at the pilot accuracy.
pub fn calibrate_ctilde(
    f: &dyn TargetFn,
    act: &Activation,
    p: f64,
    n_smooth: u8,
    k: u8,
    mu: f64,
) -> Result<Calibration, Error> {
    let mut n = choose_n(act, n_smooth, k, PILOT_EPS, 1.0, mu);
    let mut doublings = 0;
    loop {
        let plan = plan_with_n(f, act, p, n_smooth, k, PILOT_EPS, mu, 1.0, n)?;
        let (net, _) = synthesize(f, act, &plan)?;
        let grid = metrics::default_grid(plan.d);
        let measured = metrics::sobolev_distance(f, &net, k, p, grid)?.total;
        if measured <= PILOT_MARGIN * PILOT_EPS || doublings >= MAX_PILOT_DOUBLINGS {
            if measured > PILOT_EPS {
                return Err(Error::AccuracyNotReached {
                    target: PILOT_EPS,
                    achieved: measured,
                    context: "pilot calibration",
                });
            }
            let rate = rate_exponent(act, n_smooth, k, mu);
            let ctilde = PILOT_EPS * math::powf(n as f64, rate) / 2.0;
            return Ok(Calibration { ctilde, pilot_n: n, pilot_error: measured, doublings });
        }
        n *= 2;
        doublings += 1;
    }
}
