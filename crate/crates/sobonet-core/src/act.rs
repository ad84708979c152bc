//! Activation catalog with closed-form derivative oracles.
//!
//! Every entry carries the data the constructions downstream need: the
//! smoothness order, the tail class (how fast the τ-th derivative settles to
//! its limits A and B), the decay constant D and onset threshold R for that
//! class, and tabulated base points x₀ at which the finite-difference
//! gadgets sample the activation. Derivatives up to order 6 are exact closed
//! forms, not finite differences; the whole pipeline leans on them for
//! certificates, so each formula is cross-checked against central
//! differences in the tests.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Error;
use crate::math;

/// Tail behaviour of ρ^{(τ)} as |x| grows: settles exactly beyond a
/// threshold, exponentially fast, or at a power-law rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActivationClass {
    Exact,
    Exponential,
    Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Relu,
    LeakyRelu { slope: f64 },
    Elu { alpha: f64 },
    Softsign,
    Isrlu { alpha: f64 },
    Isru { alpha: f64 },
    Sigmoid,
    Tanh,
    Arctan,
    Softplus,
    Swish,
    Repu { power: u8 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Activation {
    pub kind: Kind,
    pub class: ActivationClass,
    /// Order of the derivative whose limits define the tail class.
    pub tau: u8,
    /// Smoothness order; `None` means real-analytic.
    pub smoothness: Option<u8>,
    /// Decay constant of the tail class. Conservative defaults, not sharp
    /// rates: softsign ships 0.9 because the +1 offset in its 1/(1+x) tail
    /// drags every finite-window fit below the asymptotic 1.0.
    pub d_rate: f64,
    /// Threshold beyond which the tail bounds are measured.
    pub r_thresh: f64,
    /// Limit of ρ^{(τ)} at −∞.
    pub a_lim: f64,
    /// Limit of ρ^{(τ)} at +∞.
    pub b_lim: f64,
}

/// Sampling point for the product/identity gadgets, with the exponent of
/// the leading truncation error in 1/δ (`kappa`): 1 generic, 2 when the
/// next derivative vanishes at x₀, 0 when the gadget is exact there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasePoint {
    pub x0: f64,
    pub kappa: u8,
}

pub const MAX_DERIV_ORDER: u8 = 6;

/// Certificates never rely on derivatives beyond this order, even for
/// analytic entries.
pub const SMOOTHNESS_CAP: u8 = 4;

impl Activation {
    pub fn name(&self) -> &'static str {
        match self.kind {
            Kind::Relu => "relu",
            Kind::LeakyRelu { .. } => "leaky_relu",
            Kind::Elu { .. } => "elu",
            Kind::Softsign => "softsign",
            Kind::Isrlu { .. } => "isrlu",
            Kind::Isru { .. } => "isru",
            Kind::Sigmoid => "sigmoid",
            Kind::Tanh => "tanh",
            Kind::Arctan => "arctan",
            Kind::Softplus => "softplus",
            Kind::Swish => "swish",
            Kind::Repu { .. } => "repu",
        }
    }

    pub fn param(&self) -> Option<f64> {
        match self.kind {
            Kind::LeakyRelu { slope } => Some(slope),
            Kind::Elu { alpha } | Kind::Isrlu { alpha } | Kind::Isru { alpha } => Some(alpha),
            Kind::Repu { power } => Some(power as f64),
            _ => None,
        }
    }

    /// Smoothness order usable by certificates: min(j, 4).
    pub fn usable_order(&self) -> u8 {
        self.smoothness.unwrap_or(SMOOTHNESS_CAP).min(SMOOTHNESS_CAP)
    }

    /// Smallest bump sharpness the partition-of-unity construction accepts.
    pub fn scale_floor(&self) -> f64 {
        math::fmax(2.0 * self.r_thresh / 3.0, 1.0)
    }

    /// k-th derivative of the activation at x (k = 0 is the value itself).
    /// Supported up to order 6. On the measure-zero kink set of piecewise
    /// entries the right-hand branch is used.
    pub fn deriv(&self, x: f64, k: u8) -> f64 {
        debug_assert!(k <= MAX_DERIV_ORDER, "derivative order {k} not supported");
        match self.kind {
            Kind::Relu => piecewise_linear(x, 0.0, k),
            Kind::LeakyRelu { slope } => piecewise_linear(x, slope, k),
            Kind::Elu { alpha } => {
                if x > 0.0 {
                    match k {
                        0 => x,
                        1 => 1.0,
                        _ => 0.0,
                    }
                } else if k == 0 {
                    alpha * libm::expm1(x)
                } else {
                    alpha * math::exp(x)
                }
            }
            Kind::Softsign => softsign_deriv(x, k),
            Kind::Isrlu { alpha } => {
                if x >= 0.0 {
                    match k {
                        0 => x,
                        1 => 1.0,
                        _ => 0.0,
                    }
                } else {
                    isru_deriv(x, alpha, k)
                }
            }
            Kind::Isru { alpha } => isru_deriv(x, alpha, k),
            Kind::Sigmoid => sigmoid_deriv(x, k),
            Kind::Tanh => tanh_deriv(x, k),
            Kind::Arctan => arctan_deriv(x, k),
            Kind::Softplus => {
                if k == 0 {
                    softplus_value(x)
                } else {
                    sigmoid_deriv(x, k - 1)
                }
            }
            Kind::Swish => {
                if k == 0 {
                    x * sigmoid_deriv(x, 0)
                } else {
                    x * sigmoid_deriv(x, k) + k as f64 * sigmoid_deriv(x, k - 1)
                }
            }
            Kind::Repu { power } => {
                let p = power;
                if x <= 0.0 || k > p {
                    0.0
                } else {
                    let mut c = 1.0;
                    for i in 0..k {
                        c *= (p - i) as f64;
                    }
                    c * math::powi(x, (p - k) as i32)
                }
            }
        }
    }

    /// Base point for the degree-r monomial gadget. Chosen so that both
    /// ρ^{(r)}(x₀) and ρ^{(r+1)}(x₀) are comfortably nonzero: the leading
    /// error is then ~C/δ and the adaptive step search lands the same
    /// doubling count at every target accuracy, which keeps the measured
    /// weight-growth exponent at r. `None` when no usable point exists.
    pub fn monomial_base(&self, r: u8) -> Option<BasePoint> {
        match self.kind {
            Kind::Relu | Kind::LeakyRelu { .. } => {
                (r == 1).then_some(BasePoint { x0: 1.0, kappa: 0 })
            }
            Kind::Repu { power } => {
                if r > power {
                    None
                } else if r == power {
                    Some(BasePoint { x0: 1.0, kappa: 0 })
                } else {
                    Some(BasePoint { x0: 1.0, kappa: 1 })
                }
            }
            Kind::Elu { .. } => Some(BasePoint { x0: -1.0, kappa: 1 }),
            Kind::Sigmoid => {
                let x0 = if r <= 2 { -1.0 } else { -0.5 };
                Some(BasePoint { x0, kappa: 1 })
            }
            Kind::Tanh => {
                // Near zero the next even derivative is small, which keeps
                // the f64 cancellation noise of the δ^r-scaled output row
                // below tight targets while staying first order in 1/δ.
                let x0 = match r {
                    1 | 2 => -0.4,
                    3 => -0.03,
                    _ => -0.5,
                };
                Some(BasePoint { x0, kappa: 1 })
            }
            Kind::Softplus => {
                let x0 = if r == 1 { 0.0 } else { -1.0 };
                Some(BasePoint { x0, kappa: 1 })
            }
            Kind::Swish => {
                let x0 = if r == 1 { 0.0 } else { -1.0 };
                Some(BasePoint { x0, kappa: 1 })
            }
            Kind::Softsign => Some(BasePoint { x0: -0.5, kappa: 1 }),
            Kind::Isru { alpha } | Kind::Isrlu { alpha } => {
                Some(BasePoint { x0: -0.3 / math::sqrt(alpha), kappa: 1 })
            }
            Kind::Arctan => Some(BasePoint { x0: -0.5, kappa: 1 }),
        }
    }

    /// Base point for the squaring gadget inside multiplication: requires
    /// ρ″(x₀) ≠ 0, preferring points where ρ‴(x₀) = 0 (error ~C/δ², so δ
    /// stays small and the f64 cancellation noise of the δ²-scaled output
    /// row stays far below the synthesis-internal targets). `None` for
    /// piecewise-linear activations, which cannot multiply.
    pub fn mult_base(&self) -> Option<BasePoint> {
        match self.kind {
            Kind::Relu | Kind::LeakyRelu { .. } => None,
            Kind::Sigmoid => Some(BasePoint { x0: -1.316_957_9, kappa: 2 }),
            Kind::Tanh => Some(BasePoint { x0: -0.658_478_95, kappa: 2 }),
            Kind::Elu { .. } => Some(BasePoint { x0: -1.0, kappa: 1 }),
            Kind::Softplus => Some(BasePoint { x0: 0.0, kappa: 2 }),
            Kind::Swish => Some(BasePoint { x0: 0.0, kappa: 2 }),
            Kind::Softsign => Some(BasePoint { x0: -0.5, kappa: 1 }),
            Kind::Arctan => Some(BasePoint { x0: -1.0 / math::sqrt(3.0), kappa: 2 }),
            Kind::Isru { alpha } | Kind::Isrlu { alpha } => {
                Some(BasePoint { x0: -0.5 / math::sqrt(alpha), kappa: 2 })
            }
            Kind::Repu { power } => {
                let kappa = if power == 2 { 0 } else { 1 };
                Some(BasePoint { x0: 1.0, kappa })
            }
        }
    }

    /// Base point for the approximate-identity chain: requires ρ′(x₀) ≠ 0.
    /// κ = 0 marks activations whose identity is exact (a linear branch).
    pub fn identity_base(&self) -> BasePoint {
        match self.kind {
            Kind::Relu | Kind::LeakyRelu { .. } | Kind::Elu { .. } | Kind::Isrlu { .. } => {
                BasePoint { x0: 1.0, kappa: 0 }
            }
            Kind::Sigmoid | Kind::Tanh | Kind::Arctan => BasePoint { x0: 0.0, kappa: 2 },
            Kind::Isru { .. } => BasePoint { x0: 0.0, kappa: 2 },
            Kind::Softplus | Kind::Swish => BasePoint { x0: 0.0, kappa: 1 },
            Kind::Softsign => BasePoint { x0: -0.5, kappa: 1 },
            Kind::Repu { .. } => BasePoint { x0: 1.0, kappa: 1 },
        }
    }

    /// Measures the tail conditions on [2R, 50R] and fits the decay rate of
    /// the residuals per derivative order.
    pub fn check_admissibility(&self) -> AdmissibilityReport {
        // Residuals this small are dominated by f64 evaluation noise, not by
        // the tail decay itself (the derivative polynomials cancel to within
        // a few 1e-15 of zero), so they count as converged: they are skipped
        // by both the rate fit and the monotonicity scan.
        const CONVERGED: f64 = 1e-12;
        let lo = 2.0 * self.r_thresh;
        let hi = 50.0 * self.r_thresh;
        let n_samples = 200;
        let k_max = self.tau.max(self.usable_order().min(3));
        let mut orders = Vec::new();
        let mut pass = true;
        for k in self.tau..=k_max {
            let mut xs = Vec::with_capacity(n_samples);
            let mut resid = Vec::with_capacity(n_samples);
            for i in 0..n_samples {
                let x = lo + (hi - lo) * i as f64 / (n_samples - 1) as f64;
                let r_pos = if k == self.tau {
                    math::abs(self.deriv(x, k) - self.b_lim)
                } else {
                    math::abs(self.deriv(x, k))
                };
                let r_neg = if k == self.tau {
                    math::abs(self.deriv(-x, k) - self.a_lim)
                } else {
                    math::abs(self.deriv(-x, k))
                };
                xs.push(x);
                resid.push(math::fmax(r_pos, r_neg));
            }
            let max_residual = resid.iter().cloned().fold(0.0, math::fmax);
            // A residual may still rise briefly past the window edge before
            // the tail takes over (the third derivative of the logistic peaks
            // again near x = 2.3), so the decay scan starts at the observed
            // maximum, which in turn must sit in the first quarter.
            let peak = resid
                .iter()
                .enumerate()
                .filter(|(_, r)| **r > CONVERGED)
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let monotone = peak <= n_samples / 4
                && resid[peak..]
                    .windows(2)
                    .all(|w| w[0] <= CONVERGED || w[1] <= w[0] * (1.0 + 1e-6) + 1e-280);
            let (fitted_rate, order_pass) = match self.class {
                ActivationClass::Exact => {
                    let ok = max_residual <= 1e-12;
                    (f64::INFINITY, ok)
                }
                ActivationClass::Exponential | ActivationClass::Polynomial => {
                    let mut fx = Vec::new();
                    let mut fy = Vec::new();
                    for (&x, &r) in xs.iter().zip(&resid).skip(peak) {
                        if r > CONVERGED {
                            let abscissa = if self.class == ActivationClass::Exponential {
                                x
                            } else {
                                math::ln(x)
                            };
                            fx.push(abscissa);
                            fy.push(math::ln(r));
                        }
                    }
                    if fx.len() < 2 {
                        (f64::INFINITY, true)
                    } else {
                        let fit = math::fit_line(&fx, &fy);
                        let rate = -fit.slope;
                        (rate, rate >= 0.9 * self.d_rate && monotone)
                    }
                }
            };
            pass &= order_pass;
            orders.push(OrderFit { order: k, fitted_rate, max_residual, monotone, pass: order_pass });
        }
        AdmissibilityReport {
            activation: self.name(),
            class: self.class,
            tau: self.tau,
            window: (lo, hi),
            cataloged_rate: self.d_rate,
            orders,
            pass,
        }
    }
}

/// Decay fit for one derivative order of the admissibility check.
#[derive(Debug, Clone)]
pub struct OrderFit {
    pub order: u8,
    /// Fitted decay rate; ∞ when the residuals vanish outright.
    pub fitted_rate: f64,
    pub max_residual: f64,
    pub monotone: bool,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct AdmissibilityReport {
    pub activation: &'static str,
    pub class: ActivationClass,
    pub tau: u8,
    pub window: (f64, f64),
    pub cataloged_rate: f64,
    pub orders: Vec<OrderFit>,
    pub pass: bool,
}

/// The twelve stock entries with their default parameters.
pub fn catalog() -> Vec<Activation> {
    alloc::vec![
        lookup("relu", None).unwrap(),
        lookup("leaky_relu", None).unwrap(),
        lookup("elu", None).unwrap(),
        lookup("softsign", None).unwrap(),
        lookup("isrlu", None).unwrap(),
        lookup("isru", None).unwrap(),
        lookup("sigmoid", None).unwrap(),
        lookup("tanh", None).unwrap(),
        lookup("arctan", None).unwrap(),
        lookup("softplus", None).unwrap(),
        lookup("swish", None).unwrap(),
        lookup("repu", None).unwrap(),
    ]
}

/// Builds a catalog entry by name. `param` overrides the entry's default
/// parameter where one exists (slope for leaky_relu, α for elu/isru/isrlu,
/// power for repu) and is rejected otherwise.
pub fn lookup(name: &str, param: Option<f64>) -> Result<Activation, Error> {
    let check_no_param = |name: &'static str| -> Result<(), Error> {
        if param.is_some() {
            Err(Error::InvalidParameter {
                name: "param",
                message: format!("{name} takes no parameter"),
            })
        } else {
            Ok(())
        }
    };
    match name {
        "relu" => {
            check_no_param("relu")?;
            Ok(Activation {
                kind: Kind::Relu,
                class: ActivationClass::Exact,
                tau: 1,
                smoothness: Some(1),
                d_rate: f64::INFINITY,
                r_thresh: 1.0,
                a_lim: 0.0,
                b_lim: 1.0,
            })
        }
        "leaky_relu" => {
            let slope = param.unwrap_or(0.01);
            if !(0.0..1.0).contains(&slope) || slope == 0.0 {
                return Err(Error::InvalidParameter {
                    name: "slope",
                    message: format!("expected 0 < slope < 1, got {slope}"),
                });
            }
            Ok(Activation {
                kind: Kind::LeakyRelu { slope },
                class: ActivationClass::Exact,
                tau: 1,
                smoothness: Some(1),
                d_rate: f64::INFINITY,
                r_thresh: 1.0,
                a_lim: slope,
                b_lim: 1.0,
            })
        }
        "elu" => {
            let alpha = param.unwrap_or(1.0);
            if alpha <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "alpha",
                    message: format!("expected alpha > 0, got {alpha}"),
                });
            }
            let smoothness = if alpha == 1.0 { 2 } else { 1 };
            Ok(Activation {
                kind: Kind::Elu { alpha },
                class: ActivationClass::Exponential,
                tau: 1,
                smoothness: Some(smoothness),
                d_rate: 1.0,
                r_thresh: 1.0,
                a_lim: 0.0,
                b_lim: 1.0,
            })
        }
        "softsign" => {
            check_no_param("softsign")?;
            Ok(Activation {
                kind: Kind::Softsign,
                class: ActivationClass::Polynomial,
                tau: 0,
                smoothness: Some(2),
                d_rate: 0.9,
                r_thresh: 1.0,
                a_lim: -1.0,
                b_lim: 1.0,
            })
        }
        "isrlu" => {
            let alpha = param.unwrap_or(1.0);
            if alpha <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "alpha",
                    message: format!("expected alpha > 0, got {alpha}"),
                });
            }
            Ok(Activation {
                kind: Kind::Isrlu { alpha },
                class: ActivationClass::Polynomial,
                tau: 1,
                smoothness: Some(3),
                d_rate: 1.0,
                r_thresh: 1.0,
                a_lim: 0.0,
                b_lim: 1.0,
            })
        }
        "isru" => {
            let alpha = param.unwrap_or(1.0);
            if alpha <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "alpha",
                    message: format!("expected alpha > 0, got {alpha}"),
                });
            }
            let lim = 1.0 / math::sqrt(alpha);
            Ok(Activation {
                kind: Kind::Isru { alpha },
                class: ActivationClass::Polynomial,
                tau: 0,
                smoothness: None,
                d_rate: 1.0,
                r_thresh: 1.0,
                a_lim: -lim,
                b_lim: lim,
            })
        }
        "sigmoid" => {
            check_no_param("sigmoid")?;
            Ok(Activation {
                kind: Kind::Sigmoid,
                class: ActivationClass::Exponential,
                tau: 0,
                smoothness: None,
                d_rate: 1.0,
                r_thresh: 1.0,
                a_lim: 0.0,
                b_lim: 1.0,
            })
        }
        "tanh" => {
            check_no_param("tanh")?;
            Ok(Activation {
                kind: Kind::Tanh,
                class: ActivationClass::Exponential,
                tau: 0,
                smoothness: None,
                d_rate: 1.0,
                r_thresh: 1.0,
                a_lim: -1.0,
                b_lim: 1.0,
            })
        }
        "arctan" => {
            check_no_param("arctan")?;
            Ok(Activation {
                kind: Kind::Arctan,
                class: ActivationClass::Polynomial,
                tau: 0,
                smoothness: None,
                d_rate: 1.0,
                r_thresh: 1.0,
                a_lim: -core::f64::consts::FRAC_PI_2,
                b_lim: core::f64::consts::FRAC_PI_2,
            })
        }
        "softplus" => {
            check_no_param("softplus")?;
            Ok(Activation {
                kind: Kind::Softplus,
                class: ActivationClass::Exponential,
                tau: 1,
                smoothness: None,
                d_rate: 1.0,
                r_thresh: 1.0,
                a_lim: 0.0,
                b_lim: 1.0,
            })
        }
        "swish" => {
            check_no_param("swish")?;
            Ok(Activation {
                kind: Kind::Swish,
                class: ActivationClass::Exponential,
                tau: 1,
                smoothness: None,
                d_rate: 1.0,
                r_thresh: 10.0,
                a_lim: 0.0,
                b_lim: 1.0,
            })
        }
        "repu" => {
            let p = param.unwrap_or(2.0);
            if p.fract() != 0.0 || !(2.0..=4.0).contains(&p) {
                return Err(Error::InvalidParameter {
                    name: "power",
                    message: format!("expected integer power in 2..=4, got {p}"),
                });
            }
            let power = p as u8;
            Ok(Activation {
                kind: Kind::Repu { power },
                class: ActivationClass::Exact,
                tau: power,
                smoothness: Some(power),
                d_rate: f64::INFINITY,
                r_thresh: 1.0,
                a_lim: 0.0,
                b_lim: math::factorial(power as u32),
            })
        }
        other => Err(Error::UnknownActivation(String::from(other))),
    }
}

fn piecewise_linear(x: f64, neg_slope: f64, k: u8) -> f64 {
    match k {
        0 => {
            if x >= 0.0 {
                x
            } else {
                neg_slope * x
            }
        }
        1 => {
            if x >= 0.0 {
                1.0
            } else {
                neg_slope
            }
        }
        _ => 0.0,
    }
}

fn softplus_value(x: f64) -> f64 {
    if x > 0.0 {
        x + libm::log1p(math::exp(-x))
    } else {
        libm::log1p(math::exp(x))
    }
}

fn stable_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + math::exp(-x))
    } else {
        let e = math::exp(x);
        e / (1.0 + e)
    }
}

/// σ^{(k)} expressed as an integer polynomial in σ itself; row k holds the
/// coefficients of σ¹..σ^{k+1}.
const SIGMOID_POLY: [&[f64]; 6] = [
    &[1.0, -1.0],
    &[1.0, -3.0, 2.0],
    &[1.0, -7.0, 12.0, -6.0],
    &[1.0, -15.0, 50.0, -60.0, 24.0],
    &[1.0, -31.0, 180.0, -390.0, 360.0, -120.0],
    &[1.0, -63.0, 602.0, -2100.0, 3360.0, -2520.0, 720.0],
];

fn sigmoid_deriv(x: f64, k: u8) -> f64 {
    let s = stable_sigmoid(x);
    if k == 0 {
        return s;
    }
    let coeffs = SIGMOID_POLY[(k - 1) as usize];
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * s + c;
    }
    acc * s
}

/// tanh^{(k)} as a polynomial in tanh; row k holds coefficients of T^0..T^{k+1}.
const TANH_POLY: [&[f64]; 6] = [
    &[1.0, 0.0, -1.0],
    &[0.0, -2.0, 0.0, 2.0],
    &[-2.0, 0.0, 8.0, 0.0, -6.0],
    &[0.0, 16.0, 0.0, -40.0, 0.0, 24.0],
    &[16.0, 0.0, -136.0, 0.0, 240.0, 0.0, -120.0],
    &[0.0, -272.0, 0.0, 1232.0, 0.0, -1680.0, 0.0, 720.0],
];

fn tanh_deriv(x: f64, k: u8) -> f64 {
    let t = libm::tanh(x);
    if k == 0 {
        return t;
    }
    let coeffs = TANH_POLY[(k - 1) as usize];
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * t + c;
    }
    acc
}

fn softsign_deriv(x: f64, k: u8) -> f64 {
    if x >= 0.0 {
        let u = 1.0 + x;
        match k {
            0 => x / u,
            _ => {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * math::factorial(k as u32) / math::powi(u, (k + 1) as i32)
            }
        }
    } else {
        let u = 1.0 - x;
        match k {
            0 => x / u,
            _ => math::factorial(k as u32) / math::powi(u, (k + 1) as i32),
        }
    }
}

fn arctan_deriv(x: f64, k: u8) -> f64 {
    if k == 0 {
        return libm::atan(x);
    }
    let theta = libm::atan(x);
    let c = 1.0 / math::sqrt(1.0 + x * x);
    math::factorial(k as u32 - 1)
        * math::powi(c, k as i32)
        * libm::sin(k as f64 * (theta + core::f64::consts::FRAC_PI_2))
}

fn isru_deriv(x: f64, a: f64, k: u8) -> f64 {
    let u = 1.0 + a * x * x;
    let up = |e: i32| math::powf(u, -(e as f64) / 2.0);
    match k {
        0 => x * up(1),
        1 => up(3),
        2 => -3.0 * a * x * up(5),
        3 => -3.0 * a * up(5) + 15.0 * a * a * x * x * up(7),
        4 => 45.0 * a * a * x * up(7) - 105.0 * a * a * a * x * x * x * up(9),
        5 => {
            45.0 * a * a * up(7) - 630.0 * math::powi(a, 3) * x * x * up(9)
                + 945.0 * math::powi(a, 4) * math::powi(x, 4) * up(11)
        }
        _ => {
            -1575.0 * math::powi(a, 3) * x * up(9)
                + 9450.0 * math::powi(a, 4) * math::powi(x, 3) * up(11)
                - 10395.0 * math::powi(a, 5) * math::powi(x, 5) * up(13)
        }
    }
}
