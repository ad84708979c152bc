//! Command line front end for network synthesis and verification.
//!
//! Subcommands: `synth` emits a network approximating a target to a given
//! Sobolev accuracy, `verify-pu` measures partition quality, `rates` sweeps
//! accuracies and fits growth exponents, `codec` rounds and round-trips a
//! network through the bitstream format, `catalog` lists activations.
//!
//! Exit codes: 0 success, 1 contract failure (a measured quantity missed
//! its target), 2 usage error (bad flags, parameters out of range, or an
//! activation that cannot support the construction).

mod config;
mod expr;
mod hexfloat;
mod netfile;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use sobonet_core::act::{catalog, lookup, Activation, ActivationClass};
use sobonet_core::codec::{
    covering_theta, decode, encode, entropy_floor, round_output_layer, suggest_nu, CodingScheme,
};
use sobonet_core::corpus;
use sobonet_core::error::Error as CoreError;
use sobonet_core::localize::{calibrate_ctilde, plan, synthesize, SynthesisPlan};
use sobonet_core::metrics::{default_grid, fit_decay, fit_rate, sobolev_distance, TargetFn};
use sobonet_core::net::Network;
use sobonet_core::pu::{select_scaling, verify_pu};

use config::{check_ranges, ctilde_key, FileConfig};

#[derive(Parser)]
#[command(name = "sobonet", version, about = "Constructive network synthesis toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the activation catalog.
    Catalog {
        /// Emit JSON instead of an aligned table.
        #[arg(long)]
        json: bool,
    },
    /// Measure partition-of-unity quality for one activation.
    VerifyPu(VerifyPuArgs),
    /// Synthesize a network for a target function.
    Synth(SynthArgs),
    /// Sweep accuracies and fit complexity growth exponents.
    Rates(RatesArgs),
    /// Round a network onto the coding grid and round-trip the bitstream.
    Codec(CodecArgs),
}

#[derive(Args)]
struct VerifyPuArgs {
    #[arg(long)]
    activation: String,
    /// Activation parameter, for the families that take one.
    #[arg(long)]
    param: Option<f64>,
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Patch intervals per axis.
    #[arg(long, default_value_t = 5)]
    n: usize,
    /// Sharpness values; defaults to the selection rule for the class.
    #[arg(long, value_delimiter = ',')]
    s: Vec<f64>,
    /// Highest derivative order to measure.
    #[arg(long, default_value_t = 2)]
    kmax: u8,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    activation: String,
    #[arg(long)]
    param: Option<f64>,
    /// Named target (sin1, gauss2, poly3) or an inline expression in x, y.
    #[arg(long)]
    target: String,
    /// Accuracy in the W^{k,p} norm.
    #[arg(long)]
    eps: f64,
    /// Smoothness order driving the local polynomial degree (n - 1).
    #[arg(long, default_value_t = 3)]
    n: u8,
    /// Norm order of the accuracy target.
    #[arg(long, default_value_t = 0)]
    k: u8,
    /// Lebesgue exponent; inf for the sup norm.
    #[arg(long, default_value_t = f64::INFINITY)]
    p: f64,
    /// Input dimension; inferred from the target when omitted.
    #[arg(long)]
    d: Option<usize>,
    /// Interior margin parameter of the patch layout.
    #[arg(long, default_value_t = 0.25)]
    mu: f64,
    /// Measurement grid per axis; defaults by dimension.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, default_value = "network.json")]
    out: PathBuf,
    #[arg(long, default_value = "report.json")]
    report: PathBuf,
    /// key = value config carrying cached rate constants.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write newly calibrated constants back to --config.
    #[arg(long)]
    save_config: bool,
}

#[derive(Args)]
struct RatesArgs {
    #[arg(long)]
    activation: String,
    #[arg(long)]
    param: Option<f64>,
    #[arg(long)]
    target: String,
    /// Geometrically spaced accuracies, largest first, at least three.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.025")]
    eps: Vec<f64>,
    #[arg(long, default_value_t = 3)]
    n: u8,
    #[arg(long, default_value_t = 0)]
    k: u8,
    #[arg(long, default_value_t = f64::INFINITY)]
    p: f64,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 0.25)]
    mu: f64,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    save_config: bool,
}

#[derive(Args)]
struct CodecArgs {
    /// Round-trip an existing network file instead of synthesizing one.
    #[arg(long, conflicts_with_all = ["activation", "target"])]
    net: Option<PathBuf>,
    #[arg(long, required_unless_present = "net")]
    activation: Option<String>,
    #[arg(long)]
    param: Option<f64>,
    #[arg(long, required_unless_present = "net")]
    target: Option<String>,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 3)]
    n: u8,
    #[arg(long, default_value_t = 0)]
    k: u8,
    #[arg(long, default_value_t = f64::INFINITY)]
    p: f64,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 0.25)]
    mu: f64,
    /// Write the encoded bitstream here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Seed for the post-decode realization spot checks.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    save_config: bool,
}

struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn contract(message: impl Into<String>) -> Failure {
    Failure { code: 1, message: message.into() }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure { code: 1, message: format!("{e:#}") }
    }
}

/// Parameter and precondition violations are usage errors; a search that
/// ran out of accuracy is a contract failure.
fn core_err(e: CoreError) -> Failure {
    let code = match &e {
        CoreError::UnsuitableActivation(_)
        | CoreError::UnknownActivation(_)
        | CoreError::InvalidParameter { .. } => 2,
        _ => 1,
    };
    Failure { code, message: e.to_string() }
}

/// Prints a line to stdout, staying quiet when the consumer has closed
/// the pipe early (`sobonet ... | head` must not abort).
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, $($arg)*);
    }};
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Catalog { json } => cmd_catalog(json),
        Cmd::VerifyPu(a) => cmd_verify_pu(a),
        Cmd::Synth(a) => cmd_synth(a),
        Cmd::Rates(a) => cmd_rates(a),
        Cmd::Codec(a) => cmd_codec(a),
    }
}

fn class_name(c: ActivationClass) -> &'static str {
    match c {
        ActivationClass::Exact => "exact",
        ActivationClass::Exponential => "exponential",
        ActivationClass::Polynomial => "polynomial",
    }
}

fn finite_or_inf(p: f64) -> Value {
    if p.is_finite() {
        json!(p)
    } else {
        json!("inf")
    }
}

fn write_json(path: &std::path::Path, doc: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(doc).expect("report serialization");
    std::fs::write(path, text + "\n")
        .map_err(|e| contract(format!("writing {}: {e}", path.display())))
}

fn resolve_target(name: &str, d_hint: Option<usize>) -> Result<Box<dyn TargetFn>, Failure> {
    if let Some(t) = corpus::lookup(name) {
        if let Some(d) = d_hint {
            if d != t.dim() {
                return Err(usage(format!(
                    "target {name} has dimension {}, but d = {d} was given",
                    t.dim()
                )));
            }
        }
        return Ok(t);
    }
    match expr::parse_target(name, d_hint) {
        Ok(t) => Ok(Box::new(t)),
        Err(e) => Err(usage(format!(
            "target {name:?} is neither a named target ({}) nor a valid expression: {e}",
            corpus::names().join(", ")
        ))),
    }
}

fn load_config(path: Option<&PathBuf>) -> Result<FileConfig, Failure> {
    match path {
        Some(p) if p.exists() => FileConfig::load(p).map_err(|e| usage(format!("{e:#}"))),
        _ => Ok(FileConfig::default()),
    }
}

/// Cached rate constant for (activation, d, n, k), calibrating on a miss.
fn resolve_ctilde(
    cfg: &mut FileConfig,
    cfg_path: Option<&PathBuf>,
    save: bool,
    f: &dyn TargetFn,
    act: &Activation,
    p: f64,
    n: u8,
    k: u8,
    mu: f64,
) -> Result<(f64, bool), Failure> {
    let key = ctilde_key(act.name(), f.dim(), n, k);
    if let Some(c) = cfg.get_f64(&key).map_err(|e| usage(format!("{e:#}")))? {
        return Ok((c, false));
    }
    let cal = calibrate_ctilde(f, act, p, n, k, mu).map_err(core_err)?;
    cfg.entries.insert(key, format!("{:.6}", cal.ctilde));
    if save {
        if let Some(path) = cfg_path {
            cfg.save(path)?;
        }
    }
    Ok((cal.ctilde, true))
}

fn cmd_catalog(as_json: bool) -> Result<(), Failure> {
    let acts = catalog();
    if as_json {
        let rows: Vec<Value> = acts
            .iter()
            .map(|a| {
                json!({
                    "name": a.name(),
                    "param": a.param(),
                    "class": class_name(a.class),
                    "tau": a.tau,
                    "smoothness": a.smoothness,
                    "decay": a.d_rate,
                    "a": a.a_lim,
                    "b": a.b_lim,
                })
            })
            .collect();
        say!("{}", serde_json::to_string_pretty(&Value::Array(rows)).unwrap());
    } else {
        say!(
            "{:<12} {:>7} {:>4} {:>11} {:>13} {:>7} {:>7}",
            "name", "param", "tau", "smoothness", "class", "a", "b"
        );
        let compact = |v: f64| format!("{}", (v * 1e4).round() / 1e4);
        for a in &acts {
            let param = a.param().map_or("-".to_string(), compact);
            let smooth = a.smoothness.map_or("analytic".to_string(), |j| j.to_string());
            say!(
                "{:<12} {:>7} {:>4} {:>11} {:>13} {:>7} {:>7}",
                a.name(),
                param,
                a.tau,
                smooth,
                class_name(a.class),
                compact(a.a_lim),
                compact(a.b_lim)
            );
        }
    }
    Ok(())
}

fn cmd_verify_pu(a: VerifyPuArgs) -> Result<(), Failure> {
    let act = lookup(&a.activation, a.param).map_err(core_err)?;
    if a.d == 0 || a.d > 3 {
        return Err(usage(format!("d must lie in 1..=3, got {}", a.d)));
    }
    let scales = if a.s.is_empty() {
        vec![select_scaling(&act, a.n, a.d, f64::INFINITY, 3, 0.25)]
    } else {
        a.s.clone()
    };
    let mut rows = Vec::new();
    let mut pairs = Vec::new();
    for &s in &scales {
        let rep = verify_pu(&act, a.d, a.n, s, a.kmax).map_err(core_err)?;
        pairs.push((s, rep.deviation));
        rows.push(json!({
            "s": s,
            "deviation": rep.deviation,
            "complement": rep.complement,
            "factor_match": rep.factor_match,
            "seminorms": rep.seminorms,
        }));
    }
    let fit = if pairs.len() >= 2 {
        match act.class {
            ActivationClass::Exact => Value::Null,
            ActivationClass::Exponential => {
                let f = fit_decay(&pairs);
                json!({"kind": "semilog", "exponent": f.exponent, "r2": f.r2})
            }
            ActivationClass::Polynomial => {
                let f = fit_rate(&pairs);
                json!({"kind": "loglog", "exponent": f.exponent, "r2": f.r2})
            }
        }
    } else {
        Value::Null
    };
    let doc = json!({
        "command": "verify-pu",
        "activation": act.name(),
        "param": act.param(),
        "class": class_name(act.class),
        "d": a.d,
        "n": a.n,
        "kmax": a.kmax,
        "rows": rows,
        "fit": fit,
    });
    match &a.report {
        Some(path) => write_json(path, &doc)?,
        None => say!("{}", serde_json::to_string_pretty(&doc).unwrap()),
    }
    Ok(())
}

struct SynthOutcome {
    net: Network,
    plan: SynthesisPlan,
    branches: usize,
    ctilde: f64,
    calibrated: bool,
    error: f64,
    grid_n: usize,
}

#[allow(clippy::too_many_arguments)]
fn run_synthesis(
    f: &dyn TargetFn,
    act: &Activation,
    eps: f64,
    n: u8,
    k: u8,
    p: f64,
    mu: f64,
    grid: Option<usize>,
    cfg: &mut FileConfig,
    cfg_path: Option<&PathBuf>,
    save: bool,
) -> Result<SynthOutcome, Failure> {
    check_ranges(eps, f.dim(), n, k, mu).map_err(usage)?;
    if p < 1.0 {
        return Err(usage(format!("p must lie in [1, inf], got {p}")));
    }
    let (ctilde, calibrated) = resolve_ctilde(cfg, cfg_path, save, f, act, p, n, k, mu)?;
    let pl = plan(f, act, p, n, k, eps, mu, ctilde).map_err(core_err)?;
    let (net, info) = synthesize(f, act, &pl).map_err(core_err)?;
    let grid_n = grid.unwrap_or_else(|| default_grid(f.dim()));
    let est = sobolev_distance(f, &net, k, p, grid_n).map_err(core_err)?;
    Ok(SynthOutcome {
        net,
        plan: pl,
        branches: info.branches,
        ctilde,
        calibrated,
        error: est.total,
        grid_n,
    })
}

fn cmd_synth(a: SynthArgs) -> Result<(), Failure> {
    let act = lookup(&a.activation, a.param).map_err(core_err)?;
    let f = resolve_target(&a.target, a.d)?;
    let mut cfg = load_config(a.config.as_ref())?;
    let out = run_synthesis(
        f.as_ref(),
        &act,
        a.eps,
        a.n,
        a.k,
        a.p,
        a.mu,
        a.grid,
        &mut cfg,
        a.config.as_ref(),
        a.save_config,
    )?;
    netfile::write_network(&out.net, &a.out)?;
    let stats = out.net.stats();
    let pass = out.error <= a.eps;
    let doc = json!({
        "command": "synth",
        "target": a.target,
        "activation": act.name(),
        "param": act.param(),
        "eps": a.eps,
        "n": a.n,
        "k": a.k,
        "p": finite_or_inf(a.p),
        "mu": a.mu,
        "ctilde": out.ctilde,
        "calibrated": out.calibrated,
        "plan": {
            "n_patches": out.plan.n_patches,
            "s": out.plan.s,
            "theta": out.plan.theta,
            "stage_eps": out.plan.stage_eps,
        },
        "network": {
            "depth": stats.depth,
            "connections": stats.connections,
            "max_weight": stats.max_weight,
            "widths": stats.widths,
            "branches": out.branches,
        },
        "measured_error": out.error,
        "grid_n": out.grid_n,
        "pass": pass,
    });
    write_json(&a.report, &doc)?;
    say!(
        "synth {}: error {:.4e} vs eps {:.4e} ({} connections, depth {}, max weight {:.3e})",
        a.target, out.error, a.eps, stats.connections, stats.depth, stats.max_weight
    );
    say!("network -> {}", a.out.display());
    say!("report  -> {}", a.report.display());
    if pass {
        Ok(())
    } else {
        Err(contract(format!(
            "measured error {:.4e} exceeds eps {:.4e}",
            out.error, a.eps
        )))
    }
}

fn cmd_rates(a: RatesArgs) -> Result<(), Failure> {
    let act = lookup(&a.activation, a.param).map_err(core_err)?;
    let f = resolve_target(&a.target, a.d)?;
    if a.eps.len() < 3 {
        return Err(usage(format!("need at least three eps values, got {}", a.eps.len())));
    }
    let ratio = a.eps[0] / a.eps[1];
    for w in a.eps.windows(2) {
        if !(w[1] > 0.0 && w[1] < w[0]) {
            return Err(usage("eps values must be positive and strictly decreasing"));
        }
        let r = w[0] / w[1];
        if (r.ln() - ratio.ln()).abs() > 0.05 {
            return Err(usage(format!(
                "eps values must be geometrically spaced; ratios {ratio:.4} vs {r:.4}"
            )));
        }
    }
    let mut cfg = load_config(a.config.as_ref())?;
    let d = f.dim();
    let gamma = d as f64 / (f64::from(a.n) - f64::from(a.k));
    let mut rows = Vec::new();
    let mut m_pairs = Vec::new();
    let mut w_pairs = Vec::new();
    let mut depths = Vec::new();
    let mut all_pass = true;
    say!(
        "{:>9} {:>12} {:>8} {:>3} {:>12} {:>12}",
        "eps", "error", "M", "L", "max|w|", "floor"
    );
    for &eps in &a.eps {
        let out = run_synthesis(
            f.as_ref(),
            &act,
            eps,
            a.n,
            a.k,
            a.p,
            a.mu,
            a.grid,
            &mut cfg,
            a.config.as_ref(),
            a.save_config,
        )?;
        let stats = out.net.stats();
        let floor = entropy_floor(gamma, 1.0, eps);
        let pass = out.error <= eps && floor <= stats.connections as f64;
        all_pass &= pass;
        say!(
            "{:>9.4} {:>12.4e} {:>8} {:>3} {:>12.4e} {:>12.2}",
            eps, out.error, stats.connections, stats.depth, stats.max_weight, floor
        );
        m_pairs.push((eps, stats.connections as f64));
        w_pairs.push((eps, stats.max_weight));
        depths.push(stats.depth);
        rows.push(json!({
            "eps": eps,
            "error": out.error,
            "m": stats.connections,
            "l": stats.depth,
            "max_weight": stats.max_weight,
            "entropy_floor": floor,
            "floor_below_m": floor <= stats.connections as f64,
            "pass": pass,
        }));
    }
    let fit_m = fit_rate(&m_pairs);
    let fit_w = fit_rate(&w_pairs);
    let constant_depth = depths.iter().all(|&l| l == depths[0]);
    say!(
        "connection exponent {:.3} (theory {gamma:.3}), max-weight exponent {:.3}, depth {}",
        fit_m.exponent,
        fit_w.exponent,
        if constant_depth { "constant" } else { "varies" }
    );
    let doc = json!({
        "command": "rates",
        "target": a.target,
        "activation": act.name(),
        "param": act.param(),
        "n": a.n,
        "k": a.k,
        "p": finite_or_inf(a.p),
        "mu": a.mu,
        "theoretical_exponent": gamma,
        "rows": rows,
        "fit_connections": {"exponent": fit_m.exponent, "r2": fit_m.r2},
        "fit_max_weight": {"exponent": fit_w.exponent, "r2": fit_w.r2},
        "constant_depth": constant_depth,
        "pass": all_pass,
    });
    if let Some(path) = &a.report {
        write_json(path, &doc)?;
    }
    if all_pass {
        Ok(())
    } else {
        Err(contract("one or more sweep points missed the accuracy or floor check"))
    }
}

fn ceil_log2(m: usize) -> u32 {
    match m {
        0 | 1 => 0,
        _ => usize::BITS - (m - 1).leading_zeros(),
    }
}

/// Largest |realization difference| over a midpoint grid sized by dimension.
fn sup_realization_diff(a: &Network, b: &Network) -> f64 {
    let d = a.input_dim;
    let per: usize = match d {
        1 => 1001,
        2 => 101,
        _ => 33,
    };
    let mut x = vec![0.0f64; d];
    let mut sup = 0.0f64;
    for flat in 0..per.pow(d as u32) {
        let mut rem = flat;
        for c in 0..d {
            x[c] = ((rem % per) as f64 + 0.5) / per as f64;
            rem /= per;
        }
        let dev = (a.realize(&x).unwrap()[0] - b.realize(&x).unwrap()[0]).abs();
        sup = sup.max(dev);
    }
    sup
}

fn cmd_codec(a: CodecArgs) -> Result<(), Failure> {
    let (net, theta_floor, source) = match &a.net {
        Some(path) => {
            let net = netfile::read_network(path).map_err(|e| usage(format!("{e:#}")))?;
            if !(a.eps > 0.0 && a.eps < 0.5) {
                return Err(usage(format!("eps must lie in (0, 0.5), got {}", a.eps)));
            }
            (net, 1.0, json!({"net": path.display().to_string()}))
        }
        None => {
            let name = a.activation.as_deref().expect("clap enforces --activation");
            let target = a.target.as_deref().expect("clap enforces --target");
            let act = lookup(name, a.param).map_err(core_err)?;
            let f = resolve_target(target, a.d)?;
            let mut cfg = load_config(a.config.as_ref())?;
            let out = run_synthesis(
                f.as_ref(),
                &act,
                a.eps,
                a.n,
                a.k,
                a.p,
                a.mu,
                None,
                &mut cfg,
                a.config.as_ref(),
                a.save_config,
            )?;
            let theta = out.plan.theta;
            (out.net, theta, json!({"target": target, "error": out.error}))
        }
    };
    let nu = suggest_nu(&net, a.eps);
    let theta = covering_theta(&net, a.eps, theta_floor);
    let rounded = round_output_layer(&net, a.eps, theta, nu).map_err(core_err)?;
    let perturbation = sup_realization_diff(&net, &rounded);
    let scheme = CodingScheme::for_network(&rounded, a.eps, nu, theta).map_err(core_err)?;
    let stream = encode(&rounded, &scheme).map_err(core_err)?;
    let back = decode(&stream, &scheme).map_err(core_err)?;

    let mut bit_exact = back.layers.len() == rounded.layers.len();
    if bit_exact {
        'outer: for (bl, ol) in back.layers.iter().zip(&rounded.layers) {
            if bl.entries.len() != ol.entries.len() {
                bit_exact = false;
                break;
            }
            for (be, oe) in bl.entries.iter().zip(&ol.entries) {
                if (be.0, be.1) != (oe.0, oe.1) || be.2.to_bits() != oe.2.to_bits() {
                    bit_exact = false;
                    break 'outer;
                }
            }
            for (bb, ob) in bl.bias.iter().zip(&ol.bias) {
                if bb.to_bits() != ob.to_bits() {
                    bit_exact = false;
                    break 'outer;
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut spot_exact = true;
    for _ in 0..100 {
        let x: Vec<f64> = (0..rounded.input_dim).map(|_| rng.gen_range(0.0..1.0)).collect();
        let r = rounded.realize(&x).unwrap();
        let b = back.realize(&x).unwrap();
        if r.iter().zip(&b).any(|(u, v)| u.to_bits() != v.to_bits()) {
            spot_exact = false;
            break;
        }
    }

    let m = rounded.stats().connections;
    let budget_bits = 4 * m * (scheme.bits as usize + ceil_log2(m) as usize);
    let stream_bits = stream.len() * 8;
    let within_budget = stream_bits <= budget_bits;
    let perturb_ok = perturbation <= a.eps / 3.0;
    let pass = bit_exact && spot_exact && within_budget && perturb_ok;

    if let Some(path) = &a.out {
        std::fs::write(path, &stream)
            .map_err(|e| contract(format!("writing {}: {e}", path.display())))?;
    }
    let doc = json!({
        "command": "codec",
        "source": source,
        "eps": a.eps,
        "nu": nu,
        "theta": theta,
        "bits_per_index": scheme.bits,
        "dictionary_len": scheme.dictionary.len(),
        "m": m,
        "stream_bits": stream_bits,
        "budget_bits": budget_bits,
        "perturbation": perturbation,
        "perturbation_cap": a.eps / 3.0,
        "roundtrip_bit_exact": bit_exact,
        "realization_spot_checks": 100,
        "realization_spot_exact": spot_exact,
        "pass": pass,
    });
    if let Some(path) = &a.report {
        write_json(path, &doc)?;
    }
    say!(
        "codec: {} connections, {} stream bits (budget {}), perturbation {:.3e} (cap {:.3e}), \
         roundtrip {}",
        m,
        stream_bits,
        budget_bits,
        perturbation,
        a.eps / 3.0,
        if bit_exact && spot_exact { "bit-exact" } else { "MISMATCH" }
    );
    if pass {
        Ok(())
    } else {
        Err(contract("codec round-trip failed a check; see the report"))
    }
}
