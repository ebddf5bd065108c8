//! Brute-force time-ordered propagator `U_num` as a product of short-time
//! exponentials.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    identity, matrix_exp, zeros, DisplacementHamiltonian, FactoredHamiltonian, Operator, C64,
};
use crate::params::GateParams;
use crate::pulses::PulseShape;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// Sample the Hamiltonian at the centre of each step.
    #[default]
    Midpoint,
    /// Sample at the start of each step.
    LeftEndpoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrotterConfig {
    /// Steps per period of the fastest beat note, divided by 2π.
    pub safety: f64,
    pub rule: StepRule,
    /// Explicit step count; must meet the safety bound unless `allow_coarse`.
    pub steps: Option<usize>,
    pub allow_coarse: bool,
}

impl Default for TrotterConfig {
    fn default() -> Self {
        Self {
            safety: 10.0,
            rule: StepRule::Midpoint,
            steps: None,
            allow_coarse: false,
        }
    }
}

/// `max|N| = max_harmonic + m_max·K + L`
pub fn max_frequency(params: &GateParams, pulse: &PulseShape) -> i64 {
    pulse.max_harmonic() + params.m_max as i64 * params.k + params.l
}

impl TrotterConfig {
    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = Some(steps);
        self
    }

    /// `ceil(2π · safety · max|N|)`
    pub fn required_steps(&self, params: &GateParams, pulse: &PulseShape) -> usize {
        let n = max_frequency(params, pulse).max(1) as f64;
        (2.0 * PI * self.safety.max(1.0) * n).ceil() as usize
    }

    pub fn resolve_steps(&self, params: &GateParams, pulse: &PulseShape) -> Result<usize> {
        let required = self.required_steps(params, pulse);
        match self.steps {
            None => Ok(required),
            Some(0) => Err(Error::TooFewSteps {
                requested: 0,
                required,
            }),
            Some(n) if n < required && !self.allow_coarse => Err(Error::TooFewSteps {
                requested: n,
                required,
            }),
            Some(n) => Ok(n),
        }
    }

    fn sample_point(&self, step: usize, dtau: f64) -> f64 {
        match self.rule {
            StepRule::Midpoint => (step as f64 + 0.5) * dtau,
            StepRule::LeftEndpoint => step as f64 * dtau,
        }
    }
}

fn ordered_product(
    dim: usize,
    steps: usize,
    config: &TrotterConfig,
    mut generator: impl FnMut(f64, &mut Operator),
) -> Result<Operator> {
    let dtau = 1.0 / steps as f64;
    let mut u = identity(dim);
    let mut h = zeros(dim);
    for step in 0..steps {
        h.fill(C64::new(0.0, 0.0));
        generator(config.sample_point(step, dtau), &mut h);
        let factor = matrix_exp(&h)?;
        u = factor.dot(&u);
    }
    Ok(u)
}

/// `U_num = Π exp(−i H(τ_n) Δτ)` with later times on the left, built from the
/// same sideband-truncated Hamiltonian as the Magnus assembly.
pub fn propagate_numeric(
    params: &GateParams,
    pulse: &PulseShape,
    config: &TrotterConfig,
) -> Result<Operator> {
    let steps = config.resolve_steps(params, pulse)?;
    let h = FactoredHamiltonian::new(params, pulse)?;
    let scale = C64::new(0.0, -params.omega_t / steps as f64);
    ordered_product(h.dim(), steps, config, |tau, out| {
        h.accumulate(tau, scale, out)
    })
}

/// As [`propagate_numeric`] but with the full displacement operator in place
/// of the truncated sideband expansion.
pub fn propagate_numeric_exact_displacement(
    params: &GateParams,
    pulse: &PulseShape,
    config: &TrotterConfig,
) -> Result<Operator> {
    let steps = config.resolve_steps(params, pulse)?;
    let h = DisplacementHamiltonian::new(params, pulse)?;
    let scale = C64::new(0.0, -1.0 / steps as f64);
    ordered_product(4 * params.n_dim, steps, config, |tau, out| {
        out.scaled_add(scale, &h.at(tau, params.omega_t))
    })
}
