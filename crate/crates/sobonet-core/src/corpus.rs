//! Named benchmark targets with closed-form derivatives.
//!
//! Each target is defined on the open cube and stays evaluable on the
//! enlarged cube (−0.5, 1.5)^d, so patch fits near the boundary never
//! leave its domain. Scale factors are chosen so the dominant derivative
//! order has unit sup norm.

use alloc::boxed::Box;

use crate::math;
use crate::metrics::TargetFn;

/// sin(2πx)/7 on dimension one. Every derivative is a phase-shifted sine:
/// the a-th is (2π)^a·sin(2πx + aπ/2)/7.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sin1;

impl TargetFn for Sin1 {
    fn dim(&self) -> usize {
        1
    }

    fn deriv(&self, x: &[f64], alpha: &[u8]) -> f64 {
        let a = alpha[0] as f64;
        let tau = 2.0 * core::f64::consts::PI;
        math::powf(tau, a) * libm::sin(tau * x[0] + a * core::f64::consts::FRAC_PI_2) / 7.0
    }
}

/// Largest absolute third derivative of e^{−8t²}, attained near t = 0.1855.
/// Dividing by it puts the steepest factor derivative on the unit scale.
pub const GAUSS2_SCALE: f64 = 88.3279;

/// e^{−8‖x − (0.5, 0.5)‖²}/88.3279 on dimension two. Factorizes across
/// axes, so mixed derivatives are products of one-dimensional ones.
#[derive(Debug, Clone, Copy, Default)]
pub struct Gauss2;

/// a-th derivative of e^{−8t²}, via the polynomial recurrence
/// p_{a+1} = p_a′ − 16t·p_a with g^{(a)} = p_a·g.
pub fn gauss_factor_deriv(t: f64, a: u8) -> f64 {
    let mut p = [0.0f64; 8];
    p[0] = 1.0;
    let mut deg = 0usize;
    for _ in 0..a {
        let mut next = [0.0f64; 8];
        for i in 1..=deg {
            next[i - 1] += p[i] * i as f64;
        }
        for i in 0..=deg {
            next[i + 1] -= 16.0 * p[i];
        }
        deg += 1;
        p = next;
    }
    let mut poly = 0.0;
    for i in (0..=deg).rev() {
        poly = poly * t + p[i];
    }
    poly * math::exp(-8.0 * t * t)
}

impl TargetFn for Gauss2 {
    fn dim(&self) -> usize {
        2
    }

    fn deriv(&self, x: &[f64], alpha: &[u8]) -> f64 {
        let fx = gauss_factor_deriv(x[0] - 0.5, alpha[0]);
        let fy = gauss_factor_deriv(x[1] - 0.5, alpha[1]);
        fx * fy / GAUSS2_SCALE
    }
}

/// x³/6 on dimension one: the third derivative is identically one and the
/// lower orders stay below it on the unit interval.
#[derive(Debug, Clone, Copy, Default)]
pub struct Poly3;

impl TargetFn for Poly3 {
    fn dim(&self) -> usize {
        1
    }

    fn deriv(&self, x: &[f64], alpha: &[u8]) -> f64 {
        match alpha[0] {
            0 => x[0] * x[0] * x[0] / 6.0,
            1 => x[0] * x[0] / 2.0,
            2 => x[0],
            3 => 1.0,
            _ => 0.0,
        }
    }
}

/// Looks up a benchmark target by its registry name.
pub fn lookup(name: &str) -> Option<Box<dyn TargetFn>> {
    match name {
        "sin1" => Some(Box::new(Sin1)),
        "gauss2" => Some(Box::new(Gauss2)),
        "poly3" => Some(Box::new(Poly3)),
        _ => None,
    }
}

/// Registry names, for listings and error messages.
pub fn names() -> &'static [&'static str] {
    &["sin1", "gauss2", "poly3"]
}
