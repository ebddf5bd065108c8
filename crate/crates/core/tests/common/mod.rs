//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use msgate::hilbert::{laguerre, zeros, FactoredHamiltonian, Operator, C64};
use msgate::GateParams;

/// Chebyshev nodes of the first kind mapped to `[0, 1]`.
fn nodes(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| 0.5 * (1.0 + (PI * (j as f64 + 0.5) / n as f64).cos()))
        .collect()
}

/// Cosine-transform matrix taking node values to Chebyshev coefficients.
fn transform(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|k| {
            let scale = if k == 0 { 1.0 } else { 2.0 } / n as f64;
            (0..n)
                .map(|j| scale * (PI * k as f64 * (j as f64 + 0.5) / n as f64).cos())
                .collect()
        })
        .collect()
}

/// Coefficients of `∫₀^τ f` (in `τ`) from coefficients of `f`.
fn integrate_coeffs<T>(c: &[T], zero: T) -> Vec<T>
where
    T: Clone
        + std::ops::Sub<Output = T>
        + std::ops::Mul<f64, Output = T>
        + std::ops::Add<Output = T>,
{
    let n = c.len();
    let get = |k: usize| if k < n { c[k].clone() } else { zero.clone() };
    let mut out = vec![zero.clone(); n + 1];
    for k in 1..=n {
        let lower = if k == 1 { get(0) * 2.0 } else { get(k - 1) };
        out[k] = (lower - get(k + 1)) * (0.25 / k as f64);
    }
    // F(−1) = 0
    let mut c0 = zero;
    for (k, v) in out.iter().enumerate().skip(1) {
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        c0 = c0 + v.clone() * sign;
    }
    out[0] = c0;
    out
}

/// Evaluates a Chebyshev series on `[0, 1]`.
fn eval<T>(c: &[T], tau: f64, zero: T) -> T
where
    T: Clone + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    let theta = (2.0 * tau - 1.0).clamp(-1.0, 1.0).acos();
    c.iter().enumerate().fold(zero, |acc, (k, v)| {
        acc + v.clone() * (k as f64 * theta).cos()
    })
}

fn nested_scalar(ns: &[i64], n: usize) -> C64 {
    let x = nodes(n);
    let m = transform(n);
    let zero = C64::new(0.0, 0.0);
    let mut g: Vec<C64> = vec![C64::new(1.0, 0.0); n];
    let mut last = zero;
    for (depth, &freq) in ns.iter().rev().enumerate() {
        let h: Vec<C64> = x
            .iter()
            .zip(&g)
            .map(|(&t, &v)| v * C64::from_polar(1.0, 2.0 * PI * freq as f64 * t))
            .collect();
        let coeffs: Vec<C64> = m
            .iter()
            .map(|row| row.iter().zip(&h).map(|(a, b)| b * *a).sum())
            .collect();
        let integral = integrate_coeffs(&coeffs, zero);
        if depth + 1 == ns.len() {
            last = eval(&integral, 1.0, zero);
        } else {
            g = x.iter().map(|&t| eval(&integral, t, zero)).collect();
        }
    }
    last
}

/// `I_{N1..Nk}` with `N₁` outermost, by nested Chebyshev quadrature with the
/// node count doubled until two successive values agree.
pub fn resonance_quadrature(ns: &[i64]) -> C64 {
    let total: i64 = ns.iter().map(|n| n.abs()).sum();
    let mut n = (16 + 4 * total as usize).next_power_of_two();
    let mut prev = nested_scalar(ns, n);
    loop {
        n *= 2;
        let cur = nested_scalar(ns, n);
        if (cur - prev).norm() <= 1e-14 * (1.0 + cur.norm()) || n >= 4096 {
            return cur;
        }
        prev = cur;
    }
}

fn nested_operator(h: &FactoredHamiltonian, up_to: usize, n: usize) -> Vec<Operator> {
    let x = nodes(n);
    let m = transform(n);
    let dim = h.dim();
    let hs: Vec<Operator> = x.iter().map(|&t| h.at(t, 1.0)).collect();
    let mut g: Vec<Operator> = vec![msgate::hilbert::identity(dim); n];
    let mut out = Vec::new();
    for _ in 0..up_to {
        let prod: Vec<Operator> = hs.iter().zip(&g).map(|(a, b)| a.dot(b)).collect();
        let coeffs: Vec<Operator> = m
            .iter()
            .map(|row| {
                let mut acc = zeros(dim);
                for (a, p) in row.iter().zip(&prod) {
                    acc.scaled_add(C64::new(*a, 0.0), p);
                }
                acc
            })
            .collect();
        let integral = integrate_coeffs(&coeffs, zeros(dim));
        out.push(eval(&integral, 1.0, zeros(dim)));
        g = x.iter().map(|&t| eval(&integral, t, zeros(dim))).collect();
    }
    out
}

/// `∫H(τ₁)∫H(τ₂)⋯` for `k = 1..=up_to` at unit drive, by operator-valued
/// Chebyshev quadrature on `n` nodes.
pub fn dyson_quadrature(h: &FactoredHamiltonian, up_to: usize, n: usize) -> Vec<Operator> {
    nested_operator(h, up_to, n)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Laguerre form factors `(d_x, d_y)` of `Z₂` at level `n` for a rectangular
/// pulse, with sidebands `|m| ≤ m_max`. The intermediate level is `n + m`,
/// the one reached by `Â_m`.
pub fn form_factors(params: &GateParams, omega_t: f64, n: usize) -> (f64, f64) {
    let (k, l, eta) = (params.k as f64, params.l as f64, params.eta);
    let x = eta * eta;
    let (mut dx, mut dy) = (0.0, 0.0);
    for m in -(params.m_max as i64)..=params.m_max as i64 {
        let target = n as i64 + m;
        if target < 0 {
            continue;
        }
        let (lo, hi) = (
            (n as i64).min(target) as usize,
            (n as i64).max(target) as usize,
        );
        let abs_m = m.unsigned_abs() as u32;
        let weight =
            (-x).powi(abs_m as i32) * laguerre(lo as u32, abs_m, x).powi(2) * factorial(lo)
                / factorial(hi);
        let detuning: f64 = [1.0, -1.0]
            .iter()
            .map(|mu| 1.0 / (m as f64 * k + mu * l))
            .sum();
        let term = omega_t * omega_t / (2.0 * PI) * (-x).exp() * weight * detuning;
        if m.rem_euclid(2) == 0 {
            dx -= term;
        } else {
            dy += term;
        }
    }
    (dx, dy)
}
