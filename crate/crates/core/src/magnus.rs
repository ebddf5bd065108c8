//! Dyson terms `P_k`, Magnus terms `Z_k` and truncated propagators `U_n`.
//!
//! With all beat notes nonzero integers `Z₁ = iP₁ = 0`, and the Magnus terms
//! follow from the Dyson terms:
//!
//! ```text
//! Z₂ = iP₂,  Z₃ = iP₃,  Z₄ = i(P₄ − ½P₂²),  Z₅ = i(P₅ − ½(P₂P₃ + P₃P₂))
//! ```
//!
//! Every `P_k` is homogeneous of degree `k` in `ΩT`, so the series is
//! assembled once at unit drive and rescaled for each drive strength.
//!
//! Two assembly routes exist. [`unit_dyson_terms`] propagates the nested
//! integrand as an operator-valued oscillatory sum, costing one matrix
//! product per (beat note, integrand term) pair; this is what everything
//! downstream uses. [`dyson_term_enumerated`] sums explicit beat-note tuples
//! weighted by exact resonance integrals and serves as its cross-check.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hilbert::{identity, matrix_exp, zeros, FactoredHamiltonian, Operator, C64};
use crate::params::GateParams;
use crate::pulses::PulseShape;
use crate::resint::ResonanceCache;

pub const MAX_ORDER: usize = 5;

#[derive(Debug, Clone)]
pub struct MagnusTerm {
    pub order: usize,
    pub matrix: Operator,
}

#[derive(Debug, Clone)]
pub struct TruncatedPropagator {
    pub order: usize,
    pub matrix: Operator,
}

/// `(−i)^k`
fn minus_i_pow(k: usize) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, -1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, 1.0),
    }
}

/// `∫₀¹ s^p exp(i2πωs) ds`
fn unit_weight(omega: i64, p: u32) -> C64 {
    if omega == 0 {
        return C64::new(1.0 / (p as f64 + 1.0), 0.0);
    }
    let inv_a = C64::new(0.0, -1.0 / (2.0 * PI * omega as f64));
    let mut total = C64::new(0.0, 0.0);
    let mut falling = 1.0;
    let mut inv_pow = inv_a;
    for j in 0..=p {
        if j > 0 {
            falling *= (p - j + 1) as f64;
            inv_pow *= inv_a;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let term = inv_pow * (sign * falling);
        total += term;
        if j == p {
            total -= term;
        }
    }
    total
}

/// Operator-valued `Σ C_{F,p} τ^p exp(i2πFτ)`.
type OpSum = HashMap<(i64, u32), Operator>;

fn add_into(sum: &mut OpSum, key: (i64, u32), scale: C64, op: &Operator) {
    sum.entry(key)
        .or_insert_with(|| zeros(op.nrows()))
        .scaled_add(scale, op);
}

/// `G'(τ) = ∫₀^τ H(s) G(s) ds` at unit drive.
fn integrate_ops(h: &FactoredHamiltonian, g: &OpSum) -> OpSum {
    let mut out = OpSum::new();
    for (n, b) in &h.terms {
        for (&(freq, p), c) in g {
            let prod = b.dot(c);
            let omega = freq + n;
            if omega == 0 {
                add_into(
                    &mut out,
                    (0, p + 1),
                    C64::new(1.0 / (p as f64 + 1.0), 0.0),
                    &prod,
                );
                continue;
            }
            let inv_a = C64::new(0.0, -1.0 / (2.0 * PI * omega as f64));
            let mut falling = 1.0;
            let mut inv_pow = inv_a;
            for j in 0..=p {
                if j > 0 {
                    falling *= (p - j + 1) as f64;
                    inv_pow *= inv_a;
                }
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                let coeff = inv_pow * (sign * falling);
                add_into(&mut out, (omega, p - j), coeff, &prod);
                if j == p {
                    add_into(&mut out, (0, 0), -coeff, &prod);
                }
            }
        }
    }
    out
}

/// `∫₀¹ H(s) G(s) ds` at unit drive, without expanding the integrand.
fn integrate_ops_at_one(h: &FactoredHamiltonian, g: &OpSum) -> Operator {
    let dim = h.dim();
    let mut total = zeros(dim);
    for (n, b) in &h.terms {
        let mut weighted = zeros(dim);
        for (&(freq, p), c) in g {
            weighted.scaled_add(unit_weight(freq + n, p), c);
        }
        total += &b.dot(&weighted);
    }
    total
}

/// Dyson terms `P₁..P_{up_to}` at `ΩT = 1`.
pub fn unit_dyson_terms(h: &FactoredHamiltonian, up_to: usize) -> Result<Vec<Operator>> {
    if !(1..=MAX_ORDER).contains(&up_to) {
        return Err(Error::OrderOutOfRange(up_to));
    }
    let mut g = OpSum::new();
    g.insert((0, 0), identity(h.dim()));
    let mut out = Vec::with_capacity(up_to);
    for k in 1..=up_to {
        let at_one = integrate_ops_at_one(h, &g);
        out.push(at_one.mapv(|z| z * minus_i_pow(k)));
        if k < up_to {
            g = integrate_ops(h, &g);
        }
    }
    Ok(out)
}

/// `P_k` at the drive strength in `params`.
pub fn dyson_term(k: usize, params: &GateParams, pulse: &PulseShape) -> Result<Operator> {
    if !(1..=MAX_ORDER).contains(&k) {
        return Err(Error::OrderOutOfRange(k));
    }
    let h = FactoredHamiltonian::new(params, pulse)?;
    let unit = unit_dyson_terms(&h, k)?;
    Ok(unit[k - 1].mapv(|z| z * params.omega_t.powi(k as i32)))
}

/// `P_k` at unit drive as an explicit sum over beat-note tuples, each
/// weighted by its exact resonance integral. Tuples failing the zero-block
/// test are skipped before any matrix work.
pub fn dyson_term_enumerated(
    k: usize,
    h: &FactoredHamiltonian,
    cache: &ResonanceCache,
) -> Result<Operator> {
    if !(1..=MAX_ORDER).contains(&k) {
        return Err(Error::OrderOutOfRange(k));
    }
    let dim = h.dim();
    let mut total = zeros(dim);
    let mut tuple = Vec::with_capacity(k);
    enumerate(h, cache, k, &identity(dim), &mut tuple, &mut total);
    Ok(total.mapv(|z| z * minus_i_pow(k)))
}

fn enumerate(
    h: &FactoredHamiltonian,
    cache: &ResonanceCache,
    k: usize,
    prefix: &Operator,
    tuple: &mut Vec<i64>,
    total: &mut Operator,
) {
    for (n, b) in &h.terms {
        tuple.push(*n);
        if tuple.len() == k {
            if crate::resint::has_zero_block(tuple) {
                let weight = cache.get(tuple);
                if !weight.is_zero() {
                    total.scaled_add(weight.to_complex(), &prefix.dot(b));
                }
            }
        } else {
            enumerate(h, cache, k, &prefix.dot(b), tuple, total);
        }
        tuple.pop();
    }
}

/// `Z₁ = iP₁` from exact first-order integrals, without assuming the beat
/// notes are nonzero.
pub fn first_order_term(h: &FactoredHamiltonian, omega_t: f64) -> Operator {
    let mut z1 = zeros(h.dim());
    for (n, b) in &h.terms {
        let weight = crate::resint::resonance_integral_exact(&[*n]);
        if !weight.is_zero() {
            // iP₁ = i·(−i)·ΩT·Σ I_N B_N
            z1.scaled_add(weight.to_complex() * omega_t, b);
        }
    }
    z1
}

/// Magnus terms `Z₂..Z_{max_order}` at unit drive for one parameter point.
#[derive(Debug, Clone)]
pub struct MagnusSeries {
    pub n_dim: usize,
    pub max_order: usize,
    unit: Vec<Operator>,
}

impl MagnusSeries {
    pub fn assemble(params: &GateParams, pulse: &PulseShape, up_to: usize) -> Result<Self> {
        if !(2..=MAX_ORDER).contains(&up_to) {
            return Err(Error::PropagatorOrder(up_to));
        }
        let h = FactoredHamiltonian::new(params, pulse)?;
        if let Some((n, _)) = h.terms.iter().find(|(n, _)| *n == 0) {
            return Err(Error::ZeroBeatNote(*n));
        }
        let p = unit_dyson_terms(&h, up_to)?;
        let i = C64::new(0.0, 1.0);
        let mut unit = Vec::with_capacity(up_to - 1);
        for k in 2..=up_to {
            let mut z = p[k - 1].clone();
            match k {
                4 => z.scaled_add(C64::new(-0.5, 0.0), &p[1].dot(&p[1])),
                5 => {
                    let sym = p[1].dot(&p[2]) + p[2].dot(&p[1]);
                    z.scaled_add(C64::new(-0.5, 0.0), &sym);
                }
                _ => {}
            }
            unit.push(z.mapv(|v| v * i));
        }
        Ok(Self {
            n_dim: params.n_dim,
            max_order: up_to,
            unit,
        })
    }

    /// `Z_k` at `ΩT = 1`.
    pub fn unit_term(&self, order: usize) -> Option<&Operator> {
        if order < 2 {
            return None;
        }
        self.unit.get(order - 2)
    }

    pub fn terms(&self, omega_t: f64) -> Vec<MagnusTerm> {
        self.unit
            .iter()
            .enumerate()
            .map(|(idx, z)| {
                let order = idx + 2;
                MagnusTerm {
                    order,
                    matrix: z.mapv(|v| v * omega_t.powi(order as i32)),
                }
            })
            .collect()
    }

    /// `Σ_{k=2}^{order} Z_k` at the given drive.
    pub fn effective_hamiltonian(&self, omega_t: f64, order: usize) -> Result<Operator> {
        if !(2..=self.max_order).contains(&order) {
            return Err(Error::PropagatorOrder(order));
        }
        let mut total = zeros(self.unit[0].nrows());
        for k in 2..=order {
            total.scaled_add(C64::new(omega_t.powi(k as i32), 0.0), &self.unit[k - 2]);
        }
        Ok(total)
    }

    /// `U_n = exp(−i Σ_{k=2}^n Z_k)`.
    pub fn propagator(&self, omega_t: f64, order: usize) -> Result<TruncatedPropagator> {
        let z = self.effective_hamiltonian(omega_t, order)?;
        let matrix = matrix_exp(&z.mapv(|v| v * C64::new(0.0, -1.0)))?;
        Ok(TruncatedPropagator { order, matrix })
    }
}

pub fn magnus_terms(
    params: &GateParams,
    pulse: &PulseShape,
    up_to: usize,
) -> Result<Vec<MagnusTerm>> {
    Ok(MagnusSeries::assemble(params, pulse, up_to)?.terms(params.omega_t))
}

pub fn propagator(
    params: &GateParams,
    pulse: &PulseShape,
    order: usize,
) -> Result<TruncatedPropagator> {
    MagnusSeries::assemble(params, pulse, order)?.propagator(params.omega_t, order)
}
