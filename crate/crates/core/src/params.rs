//! Dimensionless gate parameters and the resonance-exclusion rules they must
//! satisfy.
//!
//! Time enters only through `τ = t/T ∈ [0, 1]` and the drive only through
//! `Ω·T`. The trap and detuning frequencies become the integers
//! `K = νT/2π` and `L = δT/2π`, so every beat note `M + mK + μL` is an
//! integer by construction.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::pulses::PulseShape;

fn default_n_dim() -> usize {
    8
}
fn default_m_max() -> usize {
    3
}
fn default_k_max() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateParams {
    /// Lamb-Dicke parameter.
    pub eta: f64,
    /// Dimensionless gate duration `νT/2π`.
    #[serde(rename = "K")]
    pub k: i64,
    /// Dimensionless detuning `δT/2π`.
    #[serde(rename = "L")]
    pub l: i64,
    /// Drive strength `Ω·T` in radians.
    #[serde(rename = "omega_T", default)]
    pub omega_t: f64,
    #[serde(default)]
    pub nbar: f64,
    #[serde(default = "default_n_dim")]
    pub n_dim: usize,
    #[serde(default = "default_m_max")]
    pub m_max: usize,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    /// Physical trap frequency `ν/2π` in Hz; only used for unit conversion.
    #[serde(default)]
    pub trap_freq: Option<f64>,
}

impl GateParams {
    /// The rectangular-pulse configuration used throughout the reference
    /// figures: `η = 0.18`, `K = 28`, `L = 25`, `n̄ = 0.02`, `ν/2π = 1 MHz`.
    pub fn reference() -> Self {
        Self {
            eta: 0.18,
            k: 28,
            l: 25,
            omega_t: 0.0,
            nbar: 0.02,
            n_dim: 8,
            m_max: 3,
            k_max: 4,
            trap_freq: Some(1.0e6),
        }
    }

    pub fn with_omega_t(mut self, omega_t: f64) -> Self {
        self.omega_t = omega_t;
        self
    }

    /// Gate duration `T = K/(ν/2π)` in microseconds, if the trap frequency is known.
    pub fn gate_time_us(&self) -> Option<f64> {
        self.trap_freq.map(|f| self.k as f64 / f * 1e6)
    }

    /// Converts a drive amplitude quoted in MHz (angular, `10⁶ rad/s`) to `Ω·T`.
    pub fn omega_t_from_mhz(&self, omega_mhz: f64) -> Option<f64> {
        self.gate_time_us().map(|t| omega_mhz * t)
    }

    pub fn omega_mhz_from_omega_t(&self, omega_t: f64) -> Option<f64> {
        self.gate_time_us().map(|t| omega_t / t)
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    pub fn beat_note(&self, harmonic: i64, sideband: i64, mu: i64) -> i64 {
        beat_note(harmonic, sideband, mu, self)
    }
}

/// One Hamiltonian component labelled by pulse harmonic `M`, sideband `m`
/// and detuning sign `μ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BeatNote {
    pub harmonic: i64,
    pub sideband: i64,
    pub mu: i64,
}

impl BeatNote {
    pub fn new(harmonic: i64, sideband: i64, mu: i64) -> Self {
        debug_assert!(mu == 1 || mu == -1);
        Self {
            harmonic,
            sideband,
            mu,
        }
    }

    pub fn value(&self, k: i64, l: i64) -> i64 {
        self.harmonic + self.sideband * k + self.mu * l
    }

    pub fn negated(&self) -> Self {
        Self::new(-self.harmonic, -self.sideband, -self.mu)
    }
}

pub fn beat_note(harmonic: i64, sideband: i64, mu: i64, params: &GateParams) -> i64 {
    BeatNote::new(harmonic, sideband, mu).value(params.k, params.l)
}

/// Every component `(M, m, μ)` of the factored Hamiltonian for this pulse.
pub fn beat_notes(params: &GateParams, pulse: &PulseShape) -> Vec<BeatNote> {
    let m_max = params.m_max as i64;
    let mut out = Vec::new();
    for (harmonic, _) in pulse.support() {
        for sideband in -m_max..=m_max {
            for mu in [-1, 1] {
                out.push(BeatNote::new(harmonic, sideband, mu));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EtaOutOfRange(f64),
    DetuningNotBelowTrap { k: i64, l: i64 },
    NonPositiveDetuning(i64),
    TwoPhotonDegenerate { k: i64, l: i64 },
    Commensurate { j: i64, l: i64 },
    FockTooSmall { n_dim: usize, m_max: usize },
    MagnusOrder(usize),
    SidebandTruncation(usize),
    NegativeDrive(f64),
    NegativeNbar(f64),
    TrapFrequency(f64),
    ZeroBeatNote(BeatNote),
}

/// Names of the individual validity checks, in reporting order.
pub const CHECKS: [&str; 12] = [
    "eta in (0, 1)",
    "L >= 1",
    "K > L",
    "K != 2L",
    "no jK = lL",
    "k_max in [2, 5]",
    "m_max >= 1",
    "n_dim >= m_max + 2",
    "omega_T >= 0",
    "nbar >= 0",
    "trap_freq > 0",
    "no zero beat note",
];

impl Violation {
    /// The entry of [`CHECKS`] this violation fails.
    pub fn check(&self) -> &'static str {
        let i = match self {
            Violation::EtaOutOfRange(_) => 0,
            Violation::NonPositiveDetuning(_) => 1,
            Violation::DetuningNotBelowTrap { .. } => 2,
            Violation::TwoPhotonDegenerate { .. } => 3,
            Violation::Commensurate { .. } => 4,
            Violation::MagnusOrder(_) => 5,
            Violation::SidebandTruncation(_) => 6,
            Violation::FockTooSmall { .. } => 7,
            Violation::NegativeDrive(_) => 8,
            Violation::NegativeNbar(_) => 9,
            Violation::TrapFrequency(_) => 10,
            Violation::ZeroBeatNote(_) => 11,
        };
        CHECKS[i]
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EtaOutOfRange(eta) => write!(f, "eta={eta} outside (0, 1)"),
            Violation::DetuningNotBelowTrap { k, l } => write!(f, "K={k} must exceed L={l}"),
            Violation::NonPositiveDetuning(l) => write!(f, "L={l} must be at least 1"),
            Violation::TwoPhotonDegenerate { k, l } => write!(f, "K=2L (K={k}, L={l})"),
            Violation::Commensurate { j, l } => write!(f, "jK=lL at (j={j}, l={l})"),
            Violation::FockTooSmall { n_dim, m_max } => {
                write!(f, "n_dim={n_dim} must be at least m_max+2={}", m_max + 2)
            }
            Violation::MagnusOrder(k) => write!(f, "k_max={k} outside [2, 5]"),
            Violation::SidebandTruncation(m) => write!(f, "m_max={m} must be at least 1"),
            Violation::NegativeDrive(w) => write!(f, "omega_T={w} is negative"),
            Violation::NegativeNbar(n) => write!(f, "nbar={n} is negative"),
            Violation::TrapFrequency(v) => write!(f, "trap_freq={v} must be positive"),
            Violation::ZeroBeatNote(b) => write!(
                f,
                "beat note M={} m={} mu={} is zero",
                b.harmonic, b.sideband, b.mu
            ),
        }
    }
}

/// Outcome of a validity check; an empty report means the point is usable.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn summary(&self) -> String {
        self.violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ")
    }
}

pub fn validate(params: &GateParams) -> ValidationReport {
    let mut violations = Vec::new();
    let (k, l) = (params.k, params.l);

    if !(params.eta > 0.0 && params.eta < 1.0) {
        violations.push(Violation::EtaOutOfRange(params.eta));
    }
    if l < 1 {
        violations.push(Violation::NonPositiveDetuning(l));
    }
    if k <= l {
        violations.push(Violation::DetuningNotBelowTrap { k, l });
    }
    if k == 2 * l {
        violations.push(Violation::TwoPhotonDegenerate { k, l });
    }
    if !(2..=5).contains(&params.k_max) {
        violations.push(Violation::MagnusOrder(params.k_max));
    }
    if params.m_max < 1 {
        violations.push(Violation::SidebandTruncation(params.m_max));
    }
    if params.n_dim < params.m_max + 2 {
        violations.push(Violation::FockTooSmall {
            n_dim: params.n_dim,
            m_max: params.m_max,
        });
    }
    if params.omega_t < 0.0 || !params.omega_t.is_finite() {
        violations.push(Violation::NegativeDrive(params.omega_t));
    }
    if params.nbar < 0.0 || !params.nbar.is_finite() {
        violations.push(Violation::NegativeNbar(params.nbar));
    }
    if let Some(f) = params.trap_freq {
        if !(f > 0.0) {
            violations.push(Violation::TrapFrequency(f));
        }
    }

    // Generalized exclusion: no jK = |l|L for j ≤ k_max·m_max, |l| ≤ k_max.
    let j_max = (params.k_max * params.m_max) as i64;
    let l_max = params.k_max as i64;
    for j in 1..=j_max {
        for ll in 1..=l_max {
            if j * k == ll * l {
                violations.push(Violation::Commensurate { j, l: ll });
            }
        }
    }

    ValidationReport { violations }
}

/// Parameter validation plus the requirement that no beat note of the
/// given pulse vanishes (otherwise the first Magnus term survives).
pub fn validate_with_pulse(params: &GateParams, pulse: &PulseShape) -> ValidationReport {
    let mut report = validate(params);
    for b in beat_notes(params, pulse) {
        if b.value(params.k, params.l) == 0 {
            report.violations.push(Violation::ZeroBeatNote(b));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_kl(k: i64, l: i64) -> GateParams {
        GateParams {
            k,
            l,
            ..GateParams::reference()
        }
    }

    #[test]
    fn reference_point_is_valid() {
        assert!(validate(&GateParams::reference()).is_valid());
    }

    #[test]
    fn k_equal_two_l_is_rejected() {
        let report = validate(&with_kl(28, 14));
        assert!(report
            .violations
            .contains(&Violation::TwoPhotonDegenerate { k: 28, l: 14 }));
        for l in 1..40 {
            assert!(!validate(&with_kl(2 * l, l)).is_valid());
        }
    }

    #[test]
    fn small_commensurate_pair() {
        let p = GateParams {
            k: 2,
            l: 1,
            k_max: 2,
            m_max: 3,
            ..GateParams::reference()
        };
        // brute-force oracle over the stated ranges
        let mut expected = Vec::new();
        for j in 1..=6i64 {
            for l in 1..=2i64 {
                if j * 2 == l {
                    expected.push((j, l));
                }
            }
        }
        assert_eq!(expected, vec![(1, 2)]);
        let report = validate(&p);
        assert!(report
            .violations
            .contains(&Violation::Commensurate { j: 1, l: 2 }));
        assert!(report.summary().contains("jK=lL at (j=1, l=2)"));
    }

    #[test]
    fn detuning_must_be_below_trap() {
        assert!(!validate(&with_kl(25, 25)).is_valid());
        assert!(!validate(&with_kl(20, 25)).is_valid());
    }

    #[test]
    fn beat_note_examples() {
        let p = GateParams::reference();
        assert_eq!(beat_note(0, 1, -1, &p), 3);
        assert_eq!(beat_note(0, 0, 1, &p), 25);
        assert_eq!(beat_note(-1, -1, 1, &p), -4);
    }

    #[test]
    fn sin2_with_unit_gap_has_zero_beat_note() {
        let p = with_kl(28, 27);
        assert!(validate(&p).is_valid());
        let report = validate_with_pulse(&p, &PulseShape::sin2());
        assert!(!report.is_valid());
        assert!(validate_with_pulse(&GateParams::reference(), &PulseShape::sin2()).is_valid());
    }

    #[test]
    fn unit_conversion() {
        let p = GateParams::reference();
        assert!((p.gate_time_us().unwrap() - 28.0).abs() < 1e-12);
        assert!((p.omega_t_from_mhz(1.0).unwrap() - 28.0).abs() < 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn beat_notes_pair_to_zero(m in -5i64..5, s in -4i64..4, mu in proptest::bool::ANY, k in 2i64..200, l in 1i64..199) {
            let mu = if mu { 1 } else { -1 };
            let b = BeatNote::new(m, s, mu);
            proptest::prop_assert_eq!(b.value(k, l) + b.negated().value(k, l), 0);
        }
    }
}
