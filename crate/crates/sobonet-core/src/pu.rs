//! Partition-of-unity bumps on a uniform patch grid over (0,1)^d.
//!
//! Each patch m ∈ {0,…,N}^d carries the separable bump
//! φ_m(x) = Π_l ψ^s(3N(x_l − m_l/N)), where ψ^s is a plateau bump built
//! from shifted copies of the activation. Bumps at adjacent patches share
//! their transition terms, so Σ_m φ_m telescopes to 1 on (0,1)^d up to
//! activation tails controlled by the sharpness s.
//!
//! `bump_network` realizes the d per-axis factors of one bump as a
//! two-layer network; products are assembled downstream by multiplication
//! gadgets. `verify_pu` measures how far a configuration is from an exact
//! partition: sum deviation, off-patch mass, and derivative growth.

use alloc::vec::Vec;

use crate::act::{Activation, ActivationClass};
use crate::error::Error;
use crate::math;
use crate::net::{Layer, Network};

/// Default sharpness exponent for exponential-tail activations: s = N^μ.
pub const DEFAULT_MU: f64 = 0.25;

const GRID_PER_PATCH: usize = 33;
const EDGE_OFFSET: f64 = 1e-9;

/// One additive term of the scalar bump: ψ(y) = Σ coeff·ρ(s(y + shift)).
#[derive(Debug, Clone, Copy)]
pub struct BumpTerm {
    pub shift: f64,
    pub coeff: f64,
}

/// Shifted-activation decomposition of ψ^s for `act`.
///
/// Activations whose values have limits at ±∞ (τ = 0) use a single
/// difference with shifts ±3/2. When only the τ-th derivative has limits,
/// ψ is a difference of two monotone steps, each a τ-fold finite
/// difference of ρ with sub-step 1/τ, placed so the bump is 1 on [−1, 1]
/// and supported in [−2, 2] up to tails.
pub fn bump_terms(act: &Activation, s: f64) -> Vec<BumpTerm> {
    let span = act.b_lim - act.a_lim;
    let tau = act.tau;
    if tau == 0 {
        let c = 1.0 / span;
        return alloc::vec![
            BumpTerm { shift: 1.5, coeff: c },
            BumpTerm { shift: -1.5, coeff: -c },
        ];
    }
    let p = tau as u32;
    let h = 1.0 / p as f64;
    let norm = math::powi(s * h, p as i32) * span;
    let mut terms = Vec::with_capacity(2 * (p as usize + 1));
    for (edge, sign) in [(2.0, 1.0), (-1.0, -1.0)] {
        for i in 0..=p {
            let alt = if i % 2 == 0 { 1.0 } else { -1.0 };
            terms.push(BumpTerm {
                shift: edge - i as f64 * h,
                coeff: sign * alt * math::binomial(p, i) / norm,
            });
        }
    }
    terms
}

/// Scalar bump value ψ^s(y).
pub fn bump_1d(act: &Activation, s: f64, y: f64) -> f64 {
    let mut acc = math::Kahan::default();
    for t in bump_terms(act, s) {
        acc.add(t.coeff * act.deriv(s * (y + t.shift), 0));
    }
    acc.value()
}

/// k-th derivative of the scalar bump in y.
pub fn bump_1d_deriv(act: &Activation, s: f64, y: f64, k: u8) -> f64 {
    let scale = math::powi(s, k as i32);
    let mut acc = math::Kahan::default();
    for t in bump_terms(act, s) {
        acc.add(t.coeff * scale * act.deriv(s * (y + t.shift), k));
    }
    acc.value()
}

/// Sum of all N+1 bumps along one axis at coordinate t.
pub fn partition_sum_1d(act: &Activation, s: f64, n: usize, t: f64) -> f64 {
    let mut acc = math::Kahan::default();
    for m in 0..=n {
        acc.add(bump_1d(act, s, 3.0 * n as f64 * (t - m as f64 / n as f64)));
    }
    acc.value()
}

/// Two-layer network whose l-th output is the l-th axis factor
/// ψ^s(3N(x_l − m_l/N)) of the bump at patch m. Hidden width is
/// d·(number of bump terms); every weight is bounded by 3Ns + 2s.
pub fn bump_network(act: &Activation, m: &[usize], n: usize, s: f64) -> Result<Network, Error> {
    let d = m.len();
    if d == 0 || d > 3 {
        return Err(Error::InvalidParameter {
            name: "m",
            message: alloc::format!("patch index must have 1..=3 coordinates, got {d}"),
        });
    }
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            message: alloc::format!("need at least one patch interval, got {n}"),
        });
    }
    if !(s > 0.0) {
        return Err(Error::InvalidParameter {
            name: "s",
            message: alloc::format!("sharpness must be positive, got {s}"),
        });
    }
    for (l, &ml) in m.iter().enumerate() {
        if ml > n {
            return Err(Error::InvalidParameter {
                name: "m",
                message: alloc::format!("patch index {ml} on axis {l} exceeds {n}"),
            });
        }
    }
    let terms = bump_terms(act, s);
    let width = terms.len();
    let mut first = Vec::with_capacity(d * width);
    let mut first_bias = Vec::with_capacity(d * width);
    let mut second = Vec::with_capacity(d * width);
    for (l, &ml) in m.iter().enumerate() {
        for (i, t) in terms.iter().enumerate() {
            let row = (l * width + i) as u32;
            first.push((row, l as u32, 3.0 * n as f64 * s));
            first_bias.push(s * (t.shift - 3.0 * ml as f64));
            second.push((l as u32, row, t.coeff));
        }
    }
    let layers = alloc::vec![
        Layer::new(d * width, d, first, first_bias),
        Layer::new(d, d * width, second, alloc::vec![0.0; d]),
    ];
    Network::new(d, *act, layers)
}

/// Bump sharpness for a run: 1 for exact partitions, N^μ for exponential
/// tails, and N^{(2d/p + d + n)/D} for polynomial tails, floored at the
/// activation's minimum usable sharpness.
pub fn select_scaling(
    act: &Activation,
    n: usize,
    d: usize,
    p: f64,
    n_smooth: u8,
    mu: f64,
) -> f64 {
    let nf = n as f64;
    let raw = match act.class {
        ActivationClass::Exact => return 1.0,
        ActivationClass::Exponential => math::powf(nf, mu),
        ActivationClass::Polynomial => {
            let inv_p = if p.is_finite() { 1.0 / p } else { 0.0 };
            let exponent = (2.0 * d as f64 * inv_p + d as f64 + n_smooth as f64) / act.d_rate;
            math::powf(nf, exponent)
        }
    };
    math::fmax(raw, act.scale_floor())
}

#[derive(Debug, Clone)]
pub struct PuReport {
    pub n: usize,
    pub s: f64,
    /// max |Σ_m φ_m(x) − 1| over the measurement grid.
    pub deviation: f64,
    /// max over patches of sup |φ_m| at axis distance ≥ 1/N from the patch.
    pub complement: f64,
    /// max |network factor − scalar bump| over two sample patches.
    pub factor_match: f64,
    /// Entry k: max over patches and |α| = k of sup |D^α φ_m| on the grid.
    pub seminorms: Vec<f64>,
}

/// Measures partition quality for one (activation, d, N, s) configuration
/// on per-patch grids of 33 points per axis, nudged inside (0,1)^d.
pub fn verify_pu(
    act: &Activation,
    d: usize,
    n: usize,
    s: f64,
    max_order: u8,
) -> Result<PuReport, Error> {
    if d == 0 || d > 3 {
        return Err(Error::InvalidParameter {
            name: "d",
            message: alloc::format!("dimension must be 1..=3, got {d}"),
        });
    }
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            message: alloc::format!("need at least one patch interval, got {n}"),
        });
    }
    if !(s > 0.0) {
        return Err(Error::InvalidParameter {
            name: "s",
            message: alloc::format!("sharpness must be positive, got {s}"),
        });
    }
    let nf = n as f64;
    let coords = axis_coords(n);

    let mut sum_min = f64::INFINITY;
    let mut sum_max = f64::NEG_INFINITY;
    for &(_, t) in &coords {
        let v = partition_sum_1d(act, s, n, t);
        sum_min = math::fmin(sum_min, v);
        sum_max = math::fmax(sum_max, v);
    }
    let mut deviation = 0.0;
    for pick in 0..(1u32 << d) {
        let mut prod = 1.0;
        for l in 0..d {
            prod *= if pick >> l & 1 == 0 { sum_min } else { sum_max };
        }
        deviation = math::fmax(deviation, math::abs(prod - 1.0));
    }

    let mut far_max = 0.0f64;
    let mut all_max = 0.0f64;
    let mut deriv_max = alloc::vec![0.0f64; max_order as usize + 1];
    for mi in 0..=n {
        let center = mi as f64 / nf;
        for &(_, t) in &coords {
            let y = 3.0 * nf * (t - center);
            let v = math::abs(bump_1d(act, s, y));
            all_max = math::fmax(all_max, v);
            if math::abs(t - center) >= 1.0 / nf - 1e-12 {
                far_max = math::fmax(far_max, v);
            }
            for k in 0..=max_order {
                let dv = math::abs(bump_1d_deriv(act, s, y, k)) * math::powi(3.0 * nf, k as i32);
                deriv_max[k as usize] = math::fmax(deriv_max[k as usize], dv);
            }
        }
    }
    let complement = far_max * math::powi(all_max, d as i32 - 1);

    let mut seminorms = alloc::vec![0.0f64; max_order as usize + 1];
    for alpha in math::multi_indices_upto(d, max_order) {
        let k = math::multi_index_order(&alpha) as usize;
        let mut prod = 1.0;
        for &a in &alpha {
            prod *= deriv_max[a as usize];
        }
        seminorms[k] = math::fmax(seminorms[k], prod);
    }

    let mut factor_match = 0.0f64;
    for patch in [alloc::vec![0usize; d], alloc::vec![n / 2; d]] {
        let net = bump_network(act, &patch, n, s)?;
        let mut x = alloc::vec![0.0f64; d];
        let per_axis: Vec<f64> = patch_axis_points(patch[0], n);
        let points = per_axis.len();
        let total = math::powi(points as f64, d as i32) as usize;
        for flat in 0..total {
            let mut rem = flat;
            for l in 0..d {
                x[l] = per_axis[rem % points];
                rem /= points;
            }
            let out = net.realize(&x)?;
            for l in 0..d {
                let want = bump_1d(act, s, 3.0 * nf * (x[l] - patch[l] as f64 / nf));
                factor_match = math::fmax(factor_match, math::abs(out[l] - want));
            }
        }
    }

    Ok(PuReport { n, s, deviation, complement, factor_match, seminorms })
}

/// Deviation measurements over a sharpness sweep, for decay-rate fits.
pub fn deviation_sweep(
    act: &Activation,
    d: usize,
    n: usize,
    scales: &[f64],
) -> Result<Vec<(f64, f64)>, Error> {
    let mut out = Vec::with_capacity(scales.len());
    for &s in scales {
        let report = verify_pu(act, d, n, s, 0)?;
        out.push((s, report.deviation));
    }
    Ok(out)
}

fn axis_coords(n: usize) -> Vec<(usize, f64)> {
    let mut coords = Vec::with_capacity((n + 1) * GRID_PER_PATCH);
    for mi in 0..=n {
        for t in patch_axis_points(mi, n) {
            coords.push((mi, t));
        }
    }
    coords
}

fn patch_axis_points(mi: usize, n: usize) -> Vec<f64> {
    let center = mi as f64 / n as f64;
    let half = 0.5 / n as f64;
    (0..GRID_PER_PATCH)
        .map(|i| {
            let t = center + half * (i as f64 / ((GRID_PER_PATCH - 1) as f64 / 2.0) - 1.0);
            math::fmin(math::fmax(t, EDGE_OFFSET), 1.0 - EDGE_OFFSET)
        })
        .collect()
}
