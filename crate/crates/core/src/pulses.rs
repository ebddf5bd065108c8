//! Drive envelopes as finite Fourier series on the gate window `τ ∈ [0, 1]`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const SYMMETRY_TOL: f64 = 1e-12;

/// Envelope `Ω(τ)/Ω = Σ_M c_M exp(i2πMτ)` with `c_{-M} = conj(c_M)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseShape {
    pub name: String,
    pub coefficients: BTreeMap<i64, Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeReport {
    pub violations: Vec<String>,
    pub max_harmonic: i64,
}

impl ShapeReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl PulseShape {
    pub fn rectangular() -> Self {
        Self {
            name: "rect".into(),
            coefficients: BTreeMap::from([(0, Complex64::new(1.0, 0.0))]),
        }
    }

    /// `sin²(πτ) = 1/2 - (e^{i2πτ} + e^{-i2πτ})/4`.
    pub fn sin2() -> Self {
        Self {
            name: "sin2".into(),
            coefficients: BTreeMap::from([
                (-1, Complex64::new(-0.25, 0.0)),
                (0, Complex64::new(0.5, 0.0)),
                (1, Complex64::new(-0.25, 0.0)),
            ]),
        }
    }

    /// Builds a shape from `(M, re, im)` triples. Repeated harmonics are summed.
    pub fn from_triples(name: &str, triples: &[(i64, f64, f64)]) -> Self {
        let mut coefficients = BTreeMap::new();
        for &(m, re, im) in triples {
            *coefficients.entry(m).or_insert(Complex64::new(0.0, 0.0)) += Complex64::new(re, im);
        }
        Self {
            name: name.into(),
            coefficients,
        }
    }

    /// Looks up a named preset (`rect`, `rectangular`, `sin2`).
    pub fn named(name: &str) -> Option<Self> {
        match name {
            "rect" | "rectangular" => Some(Self::rectangular()),
            "sin2" | "sin^2" => Some(Self::sin2()),
            _ => None,
        }
    }

    pub fn is_rectangular(&self) -> bool {
        let support: Vec<_> = self.support().collect();
        support.len() == 1 && support[0].0 == 0 && (support[0].1 - 1.0).norm() < SYMMETRY_TOL
    }

    /// Nonzero Fourier components in ascending harmonic order.
    pub fn support(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coefficients
            .iter()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(&m, &c)| (m, c))
    }

    pub fn coefficient(&self, harmonic: i64) -> Complex64 {
        self.coefficients
            .get(&harmonic)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn max_harmonic(&self) -> i64 {
        self.support().map(|(m, _)| m.abs()).max().unwrap_or(0)
    }

    /// Complex value of the series; the imaginary part vanishes for valid shapes.
    pub fn envelope_complex(&self, tau: f64) -> Complex64 {
        self.support()
            .map(|(m, c)| c * Complex64::from_polar(1.0, 2.0 * PI * m as f64 * tau))
            .sum()
    }

    pub fn envelope_at(&self, tau: f64) -> f64 {
        self.envelope_complex(tau).re
    }

    pub fn validate(&self) -> ShapeReport {
        let mut violations = Vec::new();
        if self.support().next().is_none() {
            violations.push("pulse has no nonzero Fourier component".to_string());
        }
        for (m, c) in self.support() {
            let partner = self.coefficient(-m);
            if (partner - c.conj()).norm() > SYMMETRY_TOL * (1.0 + c.norm()) {
                violations.push(format!(
                    "c_{} = {} but c_{} = {} (expected conjugate)",
                    m, c, -m, partner
                ));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                violations.push(format!("c_{m} is not finite"));
            }
        }
        ShapeReport {
            violations,
            max_harmonic: self.max_harmonic(),
        }
    }
}

impl Default for PulseShape {
    fn default() -> Self {
        Self::rectangular()
    }
}
