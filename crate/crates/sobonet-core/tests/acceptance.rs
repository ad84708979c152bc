mod common;

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use sobonet_core::act::{lookup, ActivationClass};
use sobonet_core::codec::{
    covering_theta, decode, encode, entropy_floor, round_output_layer, suggest_nu, CodingScheme,
};
use sobonet_core::corpus;
use sobonet_core::gadgets::{identity_net, monomial_net, mult_net};
use sobonet_core::jet;
use sobonet_core::localize::{calibrate_ctilde, plan, synthesize};
use sobonet_core::math;
use sobonet_core::metrics::{default_grid, fit_decay, fit_rate, sobolev_distance};
use sobonet_core::net::Network;
use sobonet_core::pu::deviation_sweep;

/// Numerically-zero threshold for exact identities.
const EXACT_TOL: f64 = 1e-12;

/// One synthesized approximation instance inside a rate sweep.
struct RunPoint {
    eps: f64,
    k: u8,
    theta: f64,
    net: Network,
    err: f64,
    m: usize,
    l: usize,
}

fn run_sweep(target: &str, k: u8, eps_list: &[f64]) -> Vec<RunPoint> {
    let act = lookup("sigmoid", None).unwrap();
    let f = corpus::lookup(target).unwrap();
    let cal = calibrate_ctilde(f.as_ref(), &act, f64::INFINITY, 3, k, 0.25).unwrap();
    let mut points = Vec::new();
    for &eps in eps_list {
        let p = plan(f.as_ref(), &act, f64::INFINITY, 3, k, eps, 0.25, cal.ctilde).unwrap();
        let theta = p.theta;
        let (net, _) = synthesize(f.as_ref(), &act, &p).unwrap();
        let grid = default_grid(f.dim());
        let est = sobolev_distance(f.as_ref(), &net, k, f64::INFINITY, grid).unwrap();
        let stats = net.stats();
        points.push(RunPoint {
            eps,
            k,
            theta,
            net,
            err: est.total,
            m: stats.connections,
            l: stats.depth,
        });
    }
    points
}

/// Six sin1 runs: k in {0, 1} at eps in {0.1, 0.05, 0.025}.
fn sin1_sweep() -> &'static (Vec<RunPoint>, Duration) {
    static CELL: OnceLock<(Vec<RunPoint>, Duration)> = OnceLock::new();
    CELL.get_or_init(|| {
        let start = Instant::now();
        let mut points = run_sweep("sin1", 0, &[0.1, 0.05, 0.025]);
        points.extend(run_sweep("sin1", 1, &[0.1, 0.05, 0.025]));
        (points, start.elapsed())
    })
}

/// Two gauss2 runs: k = 0 at eps in {0.2, 0.1}.
fn gauss2_sweep() -> &'static (Vec<RunPoint>, Duration) {
    static CELL: OnceLock<(Vec<RunPoint>, Duration)> = OnceLock::new();
    CELL.get_or_init(|| {
        let start = Instant::now();
        let points = run_sweep("gauss2", 0, &[0.2, 0.1]);
        (points, start.elapsed())
    })
}

#[test]
fn criterion_1_network_calculus_closure() {
    let start = Instant::now();
    let act = lookup("tanh", None).unwrap();
    let mut r = common::rng(101);
    for trial in 0..1000 {
        let d = 1 + trial % 3;
        let inner = common::random_network(&mut r, act, d, 1 + trial % 4, 4);
        let outer =
            common::random_network(&mut r, act, inner.output_dim(), 1 + (trial / 7) % 4, 4);
        let joined = outer.concat(&inner).unwrap();
        assert_eq!(
            joined.depth(),
            inner.depth() + outer.depth() - 1,
            "trial {trial}: composed depth"
        );
        let x = common::random_point(&mut r, d);
        let want = outer.realize(&inner.realize(&x).unwrap()).unwrap();
        let got = joined.realize(&x).unwrap();
        for (g, w) in got.iter().zip(&want) {
            assert!(
                (g - w).abs() <= EXACT_TOL,
                "trial {trial}: composition error {:.3e}",
                (g - w).abs()
            );
        }
        let other = common::random_network(&mut r, act, d, inner.depth(), 4);
        let stacked = Network::parallelize(&[inner.clone(), other.clone()], true).unwrap();
        assert_eq!(
            stacked.stats().connections,
            inner.stats().connections + other.stats().connections,
            "trial {trial}: stacked connection count"
        );
        assert_eq!(stacked.depth(), inner.depth());
        let got = stacked.realize(&x).unwrap();
        let wa = inner.realize(&x).unwrap();
        let wb = other.realize(&x).unwrap();
        for (g, w) in got.iter().zip(wa.iter().chain(wb.iter())) {
            assert_eq!(g.to_bits(), w.to_bits(), "trial {trial}: stacked block");
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    println!(
        "criterion 1: PASS (1000 random topologies, composition exact to 1e-12, \
         depth and connection bookkeeping closed, {elapsed:?})"
    );
}

#[test]
fn criterion_2_bump_taxonomy() {
    let start = Instant::now();
    let scales = [2.0, 4.0, 8.0, 16.0];
    let cases = [
        ("relu", None),
        ("sigmoid", None),
        ("elu", Some(1.0)),
        ("softplus", None),
        ("softsign", None),
        ("isru", Some(1.0)),
    ];
    let mut summary = Vec::new();
    for (name, param) in cases {
        let act = lookup(name, param).unwrap();
        let pairs = deviation_sweep(&act, 1, 5, &scales).unwrap();
        match act.class {
            ActivationClass::Exact => {
                for (s, dev) in &pairs {
                    assert!(*dev <= EXACT_TOL, "{name} at s = {s}: deviation {dev:.3e}");
                }
                summary.push(format!("{name} exact"));
            }
            ActivationClass::Exponential => {
                let fit = fit_decay(&pairs);
                let spacing = if act.tau == 0 { 1.5 } else { 1.0 };
                let floor = 0.9 * spacing * act.d_rate;
                assert!(
                    fit.exponent >= floor,
                    "{name}: semilog rate {:.3} under {floor:.3}; {pairs:?}",
                    fit.exponent
                );
                summary.push(format!("{name} {:.2}", fit.exponent));
            }
            ActivationClass::Polynomial => {
                let fit = fit_rate(&pairs);
                let floor = 0.9 * act.d_rate;
                assert!(
                    fit.exponent >= floor,
                    "{name}: log-log rate {:.3} under {floor:.3}; {pairs:?}",
                    fit.exponent
                );
                summary.push(format!("{name} {:.2}", fit.exponent));
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    println!(
        "criterion 2: PASS (deviation taxonomy over s in {{2,4,8,16}}: {}, {elapsed:?})",
        summary.join(", ")
    );
}

#[test]
fn criterion_3_polynomial_gadgets() {
    let start = Instant::now();
    let tanh = lookup("tanh", None).unwrap();
    let sigmoid = lookup("sigmoid", None).unwrap();
    let eps_list = [1e-1, 1e-2, 1e-3];
    let b = 2.0;
    let mut slopes = Vec::new();
    for r in 1u8..=3 {
        let mut weights = Vec::new();
        for eps in eps_list {
            let (net, cert) = monomial_net(&tanh, r, b, eps).unwrap();
            assert!(
                cert.achieved.iter().all(|a| *a <= eps),
                "x^{r} at eps = {eps:.0e}: achieved {:?}",
                cert.achieved
            );
            assert!(
                net.stats().connections <= 3 * (r as usize + 1),
                "x^{r}: {} connections",
                net.stats().connections
            );
            weights.push((eps, cert.max_weight));
        }
        let slope = fit_rate(&weights).exponent;
        assert!(
            slope >= r as f64 - 0.2 && slope <= r as f64 + 0.5,
            "x^{r}: weight exponent {slope:.3} outside [r - 0.2, r + 0.5]"
        );
        slopes.push(format!("{slope:.2}"));
    }
    for eps in eps_list {
        let (net, cert) = identity_net(&sigmoid, 1, 2, b, eps).unwrap();
        assert!(cert.achieved[0] <= eps);
        assert!(net.stats().connections <= 4 * 2 - 3);
        let (net, cert) = mult_net(&sigmoid, b, eps).unwrap();
        assert!(cert.achieved.iter().all(|a| *a <= eps), "mult: {:?}", cert.achieved);
        assert_eq!(net.depth(), 2);
        assert!(net.stats().connections <= 24);
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!(
        "criterion 3: PASS (tanh monomials r <= 3 with weight exponents {}, identity and \
         product gadgets inside their budgets at eps down to 1e-3, {elapsed:?})",
        slopes.join("/")
    );
}

#[test]
fn criterion_4_sin1_rate_sweep() {
    let (points, elapsed) = sin1_sweep();
    assert!(*elapsed < Duration::from_secs(600), "took {elapsed:?}");
    let mut exponents = Vec::new();
    for k in [0u8, 1] {
        let slice: Vec<&RunPoint> = points.iter().filter(|p| p.k == k).collect();
        assert_eq!(slice.len(), 3);
        for p in &slice {
            assert!(
                p.err <= p.eps,
                "k = {k} eps = {}: measured error {:.4e}",
                p.eps,
                p.err
            );
        }
        assert!(
            slice.iter().all(|p| p.l == slice[0].l),
            "depth must not move with eps"
        );
        let pairs: Vec<(f64, f64)> = slice.iter().map(|p| (p.eps, p.m as f64)).collect();
        let exponent = fit_rate(&pairs).exponent;
        let cap = 1.0 / (3.0 - k as f64) + 0.75;
        assert!(
            exponent >= -1e-6 && exponent <= cap,
            "k = {k}: connection growth exponent {exponent:.3} outside [0, {cap:.3}]; {pairs:?}"
        );
        exponents.push(format!("k={k}: {exponent:.2}"));
    }
    println!(
        "criterion 4: PASS (sin1 errors under eps at all six points, constant depth {}, \
         connection exponents {} within their caps, sweep took {elapsed:?})",
        points[0].l,
        exponents.join(", ")
    );
}

#[test]
fn criterion_5_gauss2_rate_sweep() {
    let (points, elapsed) = gauss2_sweep();
    assert!(*elapsed < Duration::from_secs(1200), "took {elapsed:?}");
    for p in points {
        assert!(p.err <= p.eps, "eps = {}: measured error {:.4e}", p.eps, p.err);
    }
    let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.eps, p.m as f64)).collect();
    let exponent = fit_rate(&pairs).exponent;
    let cap = 2.0 / 3.0 + 0.75;
    assert!(
        exponent <= cap,
        "connection growth exponent {exponent:.3} over {cap:.3}; {pairs:?}"
    );
    println!(
        "criterion 5: PASS (gauss2 errors {:.2e} and {:.2e} under eps = 0.2 and 0.1, \
         connection exponent {exponent:.2} <= {cap:.2}, sweep took {elapsed:?})",
        points[0].err, points[1].err
    );
}

#[test]
fn criterion_6_weight_encoding() {
    // Make sure the sweeps are attributed to criteria 4 and 5, then time
    // only the codec work.
    let (sin1_points, _) = sin1_sweep();
    let (gauss2_points, _) = gauss2_sweep();
    let start = Instant::now();
    let mut checked = 0usize;
    for p in sin1_points.iter().chain(gauss2_points.iter()) {
        let nu = suggest_nu(&p.net, p.eps);
        let theta = covering_theta(&p.net, p.eps, p.theta);
        let rounded = round_output_layer(&p.net, p.eps, theta, nu).unwrap();
        let d = p.net.input_dim;
        let grid = 101usize;
        let mut perturb = 0.0f64;
        let n_points = grid.pow(d as u32);
        let mut x = vec![0.0f64; d];
        for flat in 0..n_points {
            let mut rem = flat;
            for c in 0..d {
                x[c] = ((rem % grid) as f64 + 0.5) / grid as f64;
                rem /= grid;
            }
            let dev = (rounded.realize(&x).unwrap()[0] - p.net.realize(&x).unwrap()[0]).abs();
            perturb = perturb.max(dev);
        }
        assert!(
            perturb <= p.eps / 3.0,
            "k = {} eps = {}: rounding moved the realization by {perturb:.3e}",
            p.k,
            p.eps
        );
        let scheme = CodingScheme::for_network(&rounded, p.eps, nu, theta).unwrap();
        let stream = encode(&rounded, &scheme).unwrap();
        let back = decode(&stream, &scheme).unwrap();
        for (bl, ol) in back.layers.iter().zip(&rounded.layers) {
            assert_eq!(bl.entries.len(), ol.entries.len());
            for (be, oe) in bl.entries.iter().zip(&ol.entries) {
                assert_eq!(be.0, oe.0);
                assert_eq!(be.1, oe.1);
                assert_eq!(be.2.to_bits(), oe.2.to_bits(), "weight drifted through the stream");
            }
            for (bb, ob) in bl.bias.iter().zip(&ol.bias) {
                assert_eq!(bb.to_bits(), ob.to_bits(), "bias drifted through the stream");
            }
        }
        let m = rounded.stats().connections;
        let budget = 4 * m * (scheme.bits as usize + (usize::BITS - m.leading_zeros()) as usize);
        assert!(
            stream.len() * 8 <= budget,
            "k = {} eps = {}: {} bits over the {budget}-bit budget",
            p.k,
            p.eps,
            stream.len() * 8
        );
        checked += 1;
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    println!(
        "criterion 6: PASS ({checked} sweep networks rounded within eps/3, round-tripped \
         bit-exact, streams under 4M(K + log2 M) bits, {elapsed:?})"
    );
}

#[test]
fn criterion_7_entropy_floor() {
    let (points, _) = sin1_sweep();
    let start = Instant::now();
    for p in points {
        let gamma = 1.0 / (3.0 - p.k as f64);
        let floor = entropy_floor(gamma, 1.0, p.eps);
        assert!(
            floor <= p.m as f64,
            "k = {} eps = {}: floor {floor:.1} exceeds M = {}",
            p.k,
            p.eps,
            p.m
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    println!(
        "criterion 7: PASS (information floor stays below the measured connection count \
         at all six sweep points, {elapsed:?})"
    );
}

#[test]
fn criterion_8_jet_consistency() {
    let start = Instant::now();
    let sigmoid = lookup("sigmoid", None).unwrap();
    let tanh = lookup("tanh", None).unwrap();
    let mut r = common::rng(108);
    let h = 1e-4;
    let mut worst_rel = 0.0f64;
    for trial in 0..200 {
        let act = if trial % 2 == 0 { sigmoid } else { tanh };
        let d = 1 + trial % 3;
        let net = common::random_network(&mut r, act, d, 2 + trial % 3, 4);
        let x = common::random_point(&mut r, d);
        let eval = |p: &[f64]| net.realize(p).unwrap()[0];
        for alpha in math::multi_indices_upto(d, 2) {
            let order = math::multi_index_order(&alpha);
            if order == 0 {
                continue;
            }
            let fd = central_difference(&eval, &x, &alpha, h);
            let exact = jet::derivative(&net, &x, &alpha, 0).unwrap().value;
            let rel = (exact - fd).abs() / exact.abs().max(fd.abs()).max(1.0);
            worst_rel = worst_rel.max(rel);
            assert!(
                rel <= 1e-5,
                "trial {trial} alpha {alpha:?}: exact {exact:.6e} vs fd {fd:.6e}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    println!(
        "criterion 8: PASS (200 random networks, jets match finite differences to \
         {worst_rel:.1e} relative for orders up to two, {elapsed:?})"
    );
}

/// Nested central differences for a multi-index of total order at most two.
fn central_difference(
    eval: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    alpha: &[u8],
    h: f64,
) -> f64 {
    if let Some(axis) = alpha.iter().position(|&a| a > 0) {
        let mut lower = alpha.to_vec();
        lower[axis] -= 1;
        let mut plus = x.to_vec();
        plus[axis] += h;
        let mut minus = x.to_vec();
        minus[axis] -= h;
        (central_difference(eval, &plus, &lower, h) - central_difference(eval, &minus, &lower, h))
            / (2.0 * h)
    } else {
        eval(x)
    }
}
