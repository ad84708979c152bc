//! Small networks with closed-form weights: monomials, the identity map,
//! and pairwise multiplication, each certified on a sampling grid.
//!
//! All three share one mechanism: finite differences of the activation
//! around a base point x₀, with a step that shrinks as 1/δ. The free
//! parameter δ is chosen by an adaptive search that measures the certified
//! error and widens the step until the requested accuracy holds with
//! margin. Monomial error falls monotonically in δ, so the search only
//! doubles; the identity and multiplication bases are chosen so the
//! leading error term vanishes, where rounding noise grows with δ and the
//! search scans a two-sided ladder instead.

use alloc::vec::Vec;

use crate::act::{Activation, ActivationClass, BasePoint};
use crate::error::Error;
use crate::jet;
use crate::math;
use crate::net::{Layer, Network};

const MONO_GRID: usize = 1001;
const MULT_GRID: usize = 101;
const ACCEPT_MARGIN: f64 = 0.7;
const MAX_DOUBLINGS: u32 = 10;

/// Measured guarantee attached to a constructed gadget.
#[derive(Debug, Clone)]
pub struct GadgetCert {
    /// Requested sup-norm accuracy on the window.
    pub target: f64,
    /// Measured sup error per derivative order 0, 1, 2.
    pub achieved: [f64; 3],
    /// Half-width of the certified input box.
    pub window: f64,
    /// Final difference step parameter.
    pub delta: f64,
    /// Ladder steps taken by the adaptive search.
    pub steps: u32,
    /// Largest output magnitude seen on the certification grid.
    pub range: f64,
    /// Largest weight magnitude in the emitted network.
    pub max_weight: f64,
}

/// Network computing x ↦ x^r on [−b, b] within eps, with one hidden layer
/// of r+1 units and at most 3(r+1) nonzero weights. The accuracy gate is
/// the worst measured error over derivative orders 0..=2; orders above r
/// compare against zero, so the gate also bounds the raised seminorms.
pub fn monomial_net(
    act: &Activation,
    r: u8,
    b: f64,
    eps: f64,
) -> Result<(Network, GadgetCert), Error> {
    check_window(b)?;
    check_eps(eps)?;
    if r == 0 || r > 5 {
        return Err(Error::InvalidParameter {
            name: "r",
            message: alloc::format!("monomial degree must be 1..=5, got {r}"),
        });
    }
    let base = act.monomial_base(r).ok_or_else(|| {
        Error::UnsuitableActivation(alloc::format!(
            "{} has no sampling point with nonzero derivative of order {r}",
            act.name()
        ))
    })?;
    let mut delta = start_delta(act, base, b, eps, false);
    let mut steps = 0;
    let probe = |delta: f64| -> Result<(Network, [f64; 3], f64), Error> {
        let net = build_monomial(act, r, base.x0, delta)?;
        let (achieved, range) = measure_monomial(&net, r, b)?;
        Ok((net, achieved, range))
    };
    let worst = |a: &[f64; 3]| math::fmax(a[0], math::fmax(a[1], a[2]));
    // Doubling phase. The error is not monotone in δ (truncation falls,
    // rounding noise rises), so keep the best candidate seen for the case
    // where the margin gate is never met.
    let mut best: Option<(Network, [f64; 3], f64, f64)> = None;
    let mut last_rejected = None;
    let accepted = loop {
        let (net, achieved, range) = probe(delta)?;
        if best.as_ref().is_none_or(|(_, a, _, _)| worst(&achieved) < worst(a)) {
            best = Some((net, achieved, range, delta));
        }
        if worst(&achieved) <= ACCEPT_MARGIN * eps {
            break true;
        }
        if steps >= MAX_DOUBLINGS {
            break false;
        }
        last_rejected = Some(delta);
        delta *= 2.0;
        steps += 1;
    };
    if accepted {
        // Shrink back toward the smallest accepted step, so the final δ
        // tracks the acceptance boundary instead of a power-of-two
        // overshoot. Keeps weight magnitudes honest for rate fits.
        let floor = min_delta(act, base, b);
        let mut hi = delta;
        let mut lo = match last_rejected {
            Some(v) => v,
            None => loop {
                let next = hi / 2.0;
                if next < floor {
                    break hi;
                }
                let (net, achieved, range) = probe(next)?;
                steps += 1;
                if worst(&achieved) <= ACCEPT_MARGIN * eps {
                    best = Some((net, achieved, range, next));
                    hi = next;
                } else {
                    break next;
                }
            },
        };
        for _ in 0..5 {
            let mid = math::sqrt(lo * hi);
            if mid <= lo * 1.02 || mid >= hi * 0.98 {
                break;
            }
            let (net, achieved, range) = probe(mid)?;
            steps += 1;
            if worst(&achieved) <= ACCEPT_MARGIN * eps {
                best = Some((net, achieved, range, mid));
                hi = mid;
            } else {
                lo = mid;
            }
        }
    } else {
        // Ladder exhausted without meeting the margin: the power-of-two
        // grid straddles the noise/truncation crossover, so probe around
        // the best step seen before giving a verdict.
        let center = best.as_ref().expect("probed at least once").3;
        let floor = min_delta(act, base, b);
        for scale in [0.5, 0.7, 0.85, 1.2, 1.4] {
            let next = center * scale;
            if next < floor {
                continue;
            }
            let (net, achieved, range) = probe(next)?;
            steps += 1;
            if worst(&achieved) < worst(&best.as_ref().expect("tracked").1) {
                best = Some((net, achieved, range, next));
            }
        }
    }
    let (net, achieved, range, delta) = best.expect("probed at least once");
    if worst(&achieved) > eps {
        return Err(Error::AccuracyNotReached {
            target: eps,
            achieved: worst(&achieved),
            context: "monomial step search",
        });
    }
    let max_weight = net.stats().max_weight;
    Ok((net, GadgetCert { target: eps, achieved, window: b, delta, steps, range, max_weight }))
}

/// Network with exactly `depth` layers mapping each of d coordinates to
/// itself within eps on [−b, b], certified per axis up to second
/// derivatives. Used to carry values through stages that must line up in
/// depth; its range stays inside [−b − eps, b + eps].
pub fn identity_net(
    act: &Activation,
    d: usize,
    depth: usize,
    b: f64,
    eps: f64,
) -> Result<(Network, GadgetCert), Error> {
    check_window(b)?;
    check_eps(eps)?;
    if d == 0 {
        return Err(Error::InvalidParameter {
            name: "d",
            message: alloc::format!("need at least one coordinate, got {d}"),
        });
    }
    if depth < 2 {
        return Err(Error::InvalidParameter {
            name: "depth",
            message: alloc::format!("identity chains need at least 2 layers, got {depth}"),
        });
    }
    let base = act.identity_base();
    search_two_sided(
        act,
        base,
        b,
        eps,
        "identity step search",
        &|delta| build_identity(act, d, depth, base.x0, delta),
        &|net| measure_identity(net, d, b),
    )
}

/// Two-layer network approximating (a, b) ↦ a·b on [−b, b]² within eps,
/// including first and second derivatives. Built by polarization from two
/// squaring gadgets; needs an activation point with nonvanishing second
/// derivative, so piecewise linear activations are rejected.
pub fn mult_net(act: &Activation, b: f64, eps: f64) -> Result<(Network, GadgetCert), Error> {
    check_window(b)?;
    check_eps(eps)?;
    let base = act.mult_base().ok_or_else(|| {
        Error::UnsuitableActivation(alloc::format!(
            "{} has vanishing second derivative everywhere, products cannot be formed",
            act.name()
        ))
    })?;
    search_two_sided(
        act,
        base,
        b,
        eps,
        "multiplication step search",
        &|delta| build_mult(act, base.x0, delta),
        &|net| measure_mult(net, b),
    )
}

/// Folds the outputs of `factors` (each bounded by the matching entry of
/// `bounds` on the domain of interest) into their product, multiplying the
/// first two outputs per stage while identity chains carry the rest. Each
/// stage deepens the network by one layer; `eps` is split evenly across
/// the stages.
pub fn product_chain(
    act: &Activation,
    factors: Network,
    bounds: &[f64],
    eps: f64,
) -> Result<Network, Error> {
    check_eps(eps)?;
    let f = factors.output_dim();
    if f != bounds.len() {
        return Err(Error::DimensionMismatch {
            expected: f,
            got: bounds.len(),
            context: "product chain bounds",
        });
    }
    if f == 1 {
        return Ok(factors);
    }
    let folds = (f - 1) as f64;
    let mut running = factors;
    let mut bound_list: Vec<f64> = bounds.to_vec();
    while bound_list.len() > 1 {
        let stage_eps = eps / folds / 2.0;
        let window = math::fmax(bound_list[0], bound_list[1]) + 1.0;
        let (mult, _) = mult_net(act, window, stage_eps)?;
        let rest = bound_list.len() - 2;
        let id = if rest > 0 {
            let id_window = bound_list[2..].iter().fold(0.0, |a, &v| math::fmax(a, v)) + 1.0;
            Some(identity_net(act, rest, 2, id_window, stage_eps)?.0)
        } else {
            None
        };
        running = fold_product(running, &mult, id.as_ref())?;
        let product_bound = bound_list[0] * bound_list[1] + stage_eps;
        bound_list.splice(0..2, [product_bound]);
    }
    Ok(running)
}

/// One fold stage: composes P(mult, id) onto `running`, turning outputs
/// (y₀, y₁, y₂, …) into (y₀·y₁, y₂, …). `mult` must take 2 inputs and
/// `id` must carry the remaining outputs; both must have depth 2.
pub fn fold_product(
    running: Network,
    mult: &Network,
    id: Option<&Network>,
) -> Result<Network, Error> {
    let stage = match id {
        Some(id_net) => Network::parallelize(&[mult.clone(), id_net.clone()], false)?,
        None => mult.clone(),
    };
    stage.concat(&running)
}

/// Deepens `net` to exactly `target_depth` layers by composing an identity
/// chain on its outputs, certified on [−b, b] within eps.
pub fn extend_depth(
    act: &Activation,
    net: Network,
    target_depth: usize,
    b: f64,
    eps: f64,
) -> Result<Network, Error> {
    let depth = net.depth();
    if depth > target_depth {
        return Err(Error::DepthMismatch { left: depth, right: target_depth });
    }
    if depth == target_depth {
        return Ok(net);
    }
    let chain_depth = target_depth - depth + 1;
    let (chain, _) = identity_net(act, net.output_dim(), chain_depth, b, eps)?;
    chain.concat(&net)
}

fn check_window(b: f64) -> Result<(), Error> {
    if b > 0.0 && b.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "b",
            message: alloc::format!("window half-width must be positive and finite, got {b}"),
        })
    }
}

fn check_eps(eps: f64) -> Result<(), Error> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "eps",
            message: alloc::format!("accuracy must lie in (0, 1), got {eps}"),
        })
    }
}

/// Smallest admissible step. Piecewise activations need every sampled
/// argument on one branch, which bounds the step from below by the window.
fn min_delta(act: &Activation, base: BasePoint, b: f64) -> f64 {
    if act.class == ActivationClass::Exact {
        8.0 * (b + math::abs(base.x0) + 1.0)
    } else {
        1.0
    }
}

/// Starting step for the adaptive search, matched to the leading error
/// order: 1/δ at generic points, 1/δ² at superconvergent ones.
fn start_delta(act: &Activation, base: BasePoint, b: f64, eps: f64, superconvergent: bool) -> f64 {
    let scale = if superconvergent {
        math::sqrt(1.0 / eps)
    } else {
        1.0 / eps
    };
    math::fmax(scale, min_delta(act, base, b))
}

fn search_two_sided(
    act: &Activation,
    base: BasePoint,
    b: f64,
    eps: f64,
    context: &'static str,
    build: &dyn Fn(f64) -> Result<Network, Error>,
    measure: &dyn Fn(&Network) -> Result<([f64; 3], f64), Error>,
) -> Result<(Network, GadgetCert), Error> {
    let center = start_delta(act, base, b, eps, base.kappa == 2);
    let floor = min_delta(act, base, b);
    let mut candidates: Vec<f64> = Vec::new();
    for i in -4i32..=12 {
        let delta = math::fmax(floor, center * math::powi(2.0, i));
        if candidates.last().map_or(true, |&last| delta > last) {
            candidates.push(delta);
        }
    }
    let mut best: Option<(f64, [f64; 3], f64, u32)> = None;
    for (i, &delta) in candidates.iter().enumerate() {
        let net = build(delta)?;
        let (achieved, range) = measure(&net)?;
        let worst = math::fmax(achieved[0], math::fmax(achieved[1], achieved[2]));
        if worst <= ACCEPT_MARGIN * eps {
            let max_weight = net.stats().max_weight;
            return Ok((
                net,
                GadgetCert {
                    target: eps,
                    achieved,
                    window: b,
                    delta,
                    steps: i as u32,
                    range,
                    max_weight,
                },
            ));
        }
        if best.as_ref().map_or(true, |(_, a, _, _)| {
            worst < math::fmax(a[0], math::fmax(a[1], a[2]))
        }) {
            best = Some((delta, achieved, range, i as u32));
        }
    }
    let (delta, achieved, range, steps) = best.expect("candidate ladder is never empty");
    let worst = math::fmax(achieved[0], math::fmax(achieved[1], achieved[2]));
    if worst > eps {
        return Err(Error::AccuracyNotReached { target: eps, achieved: worst, context });
    }
    let net = build(delta)?;
    let max_weight = net.stats().max_weight;
    Ok((
        net,
        GadgetCert { target: eps, achieved, window: b, delta, steps, range, max_weight },
    ))
}

fn build_monomial(act: &Activation, r: u8, x0: f64, delta: f64) -> Result<Network, Error> {
    let rr = r as usize;
    let dr = act.deriv(x0, r);
    let lead = math::powi(delta, r as i32) / dr;
    let mut first = Vec::with_capacity(rr);
    for j in 1..=rr {
        first.push((j as u32, 0u32, -(j as f64) / delta));
    }
    let mut second = Vec::with_capacity(rr + 1);
    for j in 0..=rr {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        second.push((0u32, j as u32, sign * math::binomial(r as u32, j as u32) * lead));
    }
    let layers = alloc::vec![
        Layer::new(rr + 1, 1, first, alloc::vec![x0; rr + 1]),
        Layer::new(1, rr + 1, second, alloc::vec![0.0]),
    ];
    Network::new(1, *act, layers)
}

fn build_identity(
    act: &Activation,
    d: usize,
    depth: usize,
    x0: f64,
    delta: f64,
) -> Result<Network, Error> {
    let rho1 = act.deriv(x0, 1);
    let mut layers = Vec::with_capacity(depth);
    let mut first = Vec::with_capacity(d);
    for l in 0..d {
        first.push(((2 * l + 1) as u32, l as u32, -1.0 / delta));
    }
    layers.push(Layer::new(2 * d, d, first, alloc::vec![x0; 2 * d]));
    for _ in 0..depth - 2 {
        let mut mid = Vec::with_capacity(2 * d);
        for l in 0..d {
            let row = (2 * l + 1) as u32;
            mid.push((row, (2 * l) as u32, -1.0 / rho1));
            mid.push((row, row, 1.0 / rho1));
        }
        layers.push(Layer::new(2 * d, 2 * d, mid, alloc::vec![x0; 2 * d]));
    }
    let mut last = Vec::with_capacity(2 * d);
    for l in 0..d {
        last.push((l as u32, (2 * l) as u32, delta / rho1));
        last.push((l as u32, (2 * l + 1) as u32, -delta / rho1));
    }
    layers.push(Layer::new(d, 2 * d, last, alloc::vec![0.0; d]));
    Network::new(d, *act, layers)
}

fn build_mult(act: &Activation, x0: f64, delta: f64) -> Result<Network, Error> {
    let pre = Network::new(
        2,
        *act,
        alloc::vec![Layer::new(
            2,
            2,
            alloc::vec![(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, -1.0)],
            alloc::vec![0.0, 0.0],
        )],
    )?;
    let sq = build_monomial(act, 2, x0, delta)?;
    let pair = Network::parallelize(&[sq.clone(), sq], false)?;
    let post = Network::new(
        2,
        *act,
        alloc::vec![Layer::new(
            1,
            2,
            alloc::vec![(0, 0, 0.25), (0, 1, -0.25)],
            alloc::vec![0.0],
        )],
    )?;
    post.concat(&pair.concat(&pre)?)
}

fn measure_monomial(net: &Network, r: u8, b: f64) -> Result<([f64; 3], f64), Error> {
    let mut errs = [0.0f64; 3];
    let mut range = 0.0f64;
    for i in 0..MONO_GRID {
        let t = -b + 2.0 * b * i as f64 / (MONO_GRID - 1) as f64;
        let jets = jet::realize_jet(net, &[t])?;
        let jet0 = jets[0];
        let rf = r as f64;
        let d1 = rf * math::powi(t, r as i32 - 1);
        let d2 = if r >= 2 {
            rf * (rf - 1.0) * math::powi(t, r as i32 - 2)
        } else {
            0.0
        };
        errs[0] = math::fmax(errs[0], math::abs(jet0.v - math::powi(t, r as i32)));
        errs[1] = math::fmax(errs[1], math::abs(jet0.g[0] - d1));
        errs[2] = math::fmax(errs[2], math::abs(jet0.h[0] - d2));
        range = math::fmax(range, math::abs(jet0.v));
    }
    Ok((errs, range))
}

fn measure_identity(net: &Network, d: usize, b: f64) -> Result<([f64; 3], f64), Error> {
    let mut errs = [0.0f64; 3];
    let mut range = 0.0f64;
    let mut x = alloc::vec![0.0f64; d];
    for l in 0..d {
        for i in 0..MONO_GRID {
            let t = -b + 2.0 * b * i as f64 / (MONO_GRID - 1) as f64;
            x.iter_mut().for_each(|v| *v = 0.0);
            x[l] = t;
            let jets = jet::realize_jet(net, &x)?;
            let out = jets[l];
            errs[0] = math::fmax(errs[0], math::abs(out.v - t));
            errs[1] = math::fmax(errs[1], math::abs(out.g[l] - 1.0));
            errs[2] = math::fmax(errs[2], math::abs(out.h[jet::h_index(l, l)]));
            range = math::fmax(range, math::abs(out.v));
        }
    }
    Ok((errs, range))
}

fn measure_mult(net: &Network, b: f64) -> Result<([f64; 3], f64), Error> {
    let mut errs = [0.0f64; 3];
    let mut range = 0.0f64;
    for i in 0..MULT_GRID {
        let a = -b + 2.0 * b * i as f64 / (MULT_GRID - 1) as f64;
        for j in 0..MULT_GRID {
            let c = -b + 2.0 * b * j as f64 / (MULT_GRID - 1) as f64;
            let jets = jet::realize_jet(net, &[a, c])?;
            let jet0 = jets[0];
            errs[0] = math::fmax(errs[0], math::abs(jet0.v - a * c));
            errs[1] = math::fmax(errs[1], math::abs(jet0.g[0] - c));
            errs[1] = math::fmax(errs[1], math::abs(jet0.g[1] - a));
            errs[2] = math::fmax(errs[2], math::abs(jet0.h[jet::h_index(0, 0)]));
            errs[2] = math::fmax(errs[2], math::abs(jet0.h[jet::h_index(1, 1)]));
            errs[2] = math::fmax(errs[2], math::abs(jet0.h[jet::h_index(0, 1)] - 1.0));
            range = math::fmax(range, math::abs(jet0.v));
        }
    }
    Ok((errs, range))
}

