//! Bell-state and thermally averaged gate fidelities against the ideal
//! entangling rotation `exp(iπ/2 Jy²)`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use serde::Serialize;

use crate::hilbert::{matrix_exp, qubit_block, CollectiveSpinSet, Operator, C64, QUBIT_DIM};

pub const DEFAULT_BELL_PHASE: f64 = -FRAC_PI_2;
pub const DEFAULT_TARGET_ANGLE: f64 = FRAC_PI_2;

/// Thermal occupation `P_n = n̄ⁿ/(n̄+1)^{n+1}` truncated at `n_dim` levels.
/// The weights are not renormalized; the missing probability is `tail_mass`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThermalWeights {
    pub nbar: f64,
    pub weights: Vec<f64>,
    pub tail_mass: f64,
}

impl ThermalWeights {
    pub fn new(nbar: f64, n_dim: usize) -> Self {
        let ratio = nbar / (nbar + 1.0);
        let mut weights = Vec::with_capacity(n_dim);
        let mut p = 1.0 / (nbar + 1.0);
        for _ in 0..n_dim {
            weights.push(p);
            p *= ratio;
        }
        // Σ_{n≥N} P_n = ratio^N
        let tail_mass = ratio.powi(n_dim as i32);
        Self {
            nbar,
            weights,
            tail_mass,
        }
    }

    pub fn n_dim(&self) -> usize {
        self.weights.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityResult {
    pub bell: f64,
    pub average: f64,
    pub tail_mass: f64,
}

impl FidelityResult {
    pub fn evaluate(u: &Operator, weights: &ThermalWeights) -> Self {
        Self {
            bell: bell_fidelity(u, weights, DEFAULT_BELL_PHASE),
            average: average_fidelity(u, weights, DEFAULT_TARGET_ANGLE),
            tail_mass: weights.tail_mass,
        }
    }

    pub fn bell_infidelity(&self) -> f64 {
        1.0 - self.bell
    }

    pub fn average_infidelity(&self) -> f64 {
        1.0 - self.average
    }
}

/// Overlap of the motion-traced final state, starting from `|00⟩` and a
/// thermal mode, with `(|00⟩ + e^{iφ}|11⟩)/√2`.
pub fn bell_fidelity(u: &Operator, weights: &ThermalWeights, target_phase: f64) -> f64 {
    let n_dim = weights.n_dim();
    let back = C64::from_polar(1.0, -target_phase);
    let mut total = 0.0;
    for (n, p) in weights.weights.iter().enumerate() {
        let mut level = 0.0;
        for k in 0..n_dim {
            let amp = (u[[k, n]] + back * u[[3 * n_dim + k, n]]) * FRAC_1_SQRT_2;
            level += amp.norm_sqr();
        }
        total += p * level;
    }
    total
}

/// `exp(iφ Jy²)` on the qubit pair.
pub fn target_unitary(target_angle: f64) -> Operator {
    let jy2 = CollectiveSpinSet::new().jy2;
    matrix_exp(&jy2.mapv(|z| z * C64::new(0.0, target_angle))).expect("finite 4x4 generator")
}

/// `¼ |Tr_q Σ_n P_n ⟨n| U U_target† |n⟩|`
pub fn average_fidelity(u: &Operator, weights: &ThermalWeights, target_angle: f64) -> f64 {
    let n_dim = weights.n_dim();
    let target_dag = target_unitary(-target_angle);
    let mut trace = C64::new(0.0, 0.0);
    for (n, p) in weights.weights.iter().enumerate() {
        let block = qubit_block(u, n_dim, n, n).dot(&target_dag);
        trace += block.diag().sum() * *p;
    }
    trace.norm() / QUBIT_DIM as f64
}

/// `½(1 − Σ_n P_n sin φ sin(d_x⁽ⁿ⁾ − d_y⁽ⁿ⁾))` for a generator diagonal in
/// the Fock index.
pub fn closed_form_bell(
    dx_by_n: &[f64],
    dy_by_n: &[f64],
    weights: &ThermalWeights,
    phase: f64,
) -> f64 {
    let sum: f64 = weights
        .weights
        .iter()
        .zip(dx_by_n.iter().zip(dy_by_n))
        .map(|(p, (dx, dy))| p * phase.sin() * (dx - dy).sin())
        .sum();
    0.5 * (1.0 - sum)
}
