//! Exact evaluation of the nested time-ordered resonance integrals
//!
//! ```text
//! I_{N1..Nk} = ∫₀¹ dt₁ ∫₀^{t₁} dt₂ ⋯ ∫₀^{t_{k-1}} dt_k  exp(i2π Σ_j N_j t_j)
//! ```
//!
//! for integer beat notes. `N₁` rides the outermost (latest) time, matching
//! the Dyson ordering `H(t₁)H(t₂)⋯H(t_k)` with `t₁ > t₂ > ⋯ > t_k`.
//!
//! Integrands are kept as exact sums of `c·τ^p·exp(i2πFτ)` where every
//! coefficient is a polynomial in `x = 1/(2πi)` with rational coefficients.
//! Each integration step is done by repeated integration by parts, so no
//! floating-point cancellation occurs before the final conversion.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::sync::RwLock;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// `Σ_q r_q · (2πi)^{-q}` with rational `r_q`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExactCoeff {
    parts: BTreeMap<u32, BigRational>,
}

impl ExactCoeff {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn rational(r: BigRational) -> Self {
        Self::term(0, r)
    }

    pub fn one() -> Self {
        Self::rational(BigRational::one())
    }

    /// `r · (2πi)^{-q}`
    pub fn term(q: u32, r: BigRational) -> Self {
        let mut parts = BTreeMap::new();
        if !r.is_zero() {
            parts.insert(q, r);
        }
        Self { parts }
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    /// Nonzero `(q, r_q)` pairs in ascending `q`.
    pub fn parts(&self) -> impl Iterator<Item = (u32, &BigRational)> {
        self.parts.iter().map(|(&q, r)| (q, r))
    }

    pub fn add_assign(&mut self, other: &ExactCoeff) {
        for (&q, r) in &other.parts {
            self.add_term(q, r.clone());
        }
    }

    fn add_term(&mut self, q: u32, r: BigRational) {
        if r.is_zero() {
            return;
        }
        let entry = self.parts.entry(q).or_insert_with(BigRational::zero);
        *entry += r;
        if entry.is_zero() {
            self.parts.remove(&q);
        }
    }

    /// `self · r · (2πi)^{-shift}`
    pub fn scaled(&self, r: &BigRational, shift: u32) -> Self {
        let mut parts = BTreeMap::new();
        if !r.is_zero() {
            for (&q, v) in &self.parts {
                parts.insert(q + shift, v * r);
            }
        }
        Self { parts }
    }

    pub fn to_complex(&self) -> Complex64 {
        let mut out = Complex64::new(0.0, 0.0);
        for (&q, r) in &self.parts {
            // (2πi)^{-q} = (-i)^q / (2π)^q
            let mag = rational_to_f64(r) / (2.0 * PI).powi(q as i32);
            let phase = match q % 4 {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, -1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, 1.0),
            };
            out += phase * mag;
        }
        out
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Fall back to scaling for huge numerators/denominators.
    let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(900) as usize;
    let n = (r.numer() >> shift).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift).to_f64().unwrap_or(1.0);
    n / d
}

fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// One term `coeff · τ^power · exp(i2π·freq·τ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OscTerm {
    pub coeff: ExactCoeff,
    pub power: u32,
    pub freq: i64,
}

/// Canonical sum of [`OscTerm`]s keyed by `(freq, power)`; zero terms are dropped.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OscSum {
    terms: BTreeMap<(i64, u32), ExactCoeff>,
}

impl OscSum {
    pub fn one() -> Self {
        let mut s = Self::default();
        s.add(0, 0, ExactCoeff::one());
        s
    }

    pub fn from_terms(terms: impl IntoIterator<Item = OscTerm>) -> Self {
        let mut s = Self::default();
        for t in terms {
            s.add(t.freq, t.power, t.coeff);
        }
        s
    }

    pub fn add(&mut self, freq: i64, power: u32, coeff: ExactCoeff) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry((freq, power)).or_default();
        entry.add_assign(&coeff);
        if entry.is_zero() {
            self.terms.remove(&(freq, power));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = OscTerm> + '_ {
        self.terms.iter().map(|(&(freq, power), c)| OscTerm {
            coeff: c.clone(),
            power,
            freq,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Value at `τ = 1`, where every `exp(i2πF)` is exactly one.
    pub fn at_one(&self) -> ExactCoeff {
        let mut out = ExactCoeff::zero();
        for c in self.terms.values() {
            out.add_assign(c);
        }
        out
    }

    /// Floating-point evaluation at an arbitrary `τ`.
    pub fn eval(&self, tau: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&(freq, power), c)| {
                c.to_complex()
                    * tau.powi(power as i32)
                    * Complex64::from_polar(1.0, 2.0 * PI * freq as f64 * tau)
            })
            .sum()
    }
}

/// `G(τ) = ∫₀^τ exp(i2πNs) f(s) ds`, exactly.
///
/// For a term `s^p e^{i2πFs}` with `ω = F + N ≠ 0`,
/// `∫₀^τ s^p e^{as} ds = e^{aτ} Σ_{j≤p} (−1)^j p!/(p−j)! τ^{p−j}/a^{j+1} − (−1)^p p!/a^{p+1}`
/// with `a = i2πω`, i.e. `1/a = x/ω` for `x = 1/(2πi)`.
pub fn integrate_step(f: &OscSum, n: i64) -> OscSum {
    let mut out = OscSum::default();
    for ((freq, p), c) in &f.terms {
        let omega = freq + n;
        let p = *p;
        if omega == 0 {
            out.add(0, p + 1, c.scaled(&frac(1, p as i64 + 1), 0));
            continue;
        }
        let mut falling = BigInt::one(); // p!/(p-j)!
        let mut omega_pow = BigInt::from(omega); // ω^{j+1}
        for j in 0..=p {
            if j > 0 {
                falling *= BigInt::from((p - j + 1) as i64);
                omega_pow *= BigInt::from(omega);
            }
            let sign = if j % 2 == 0 { 1 } else { -1 };
            let r = BigRational::new(falling.clone() * sign, omega_pow.clone());
            out.add(omega, p - j, c.scaled(&r, j + 1));
            if j == p {
                out.add(0, 0, c.scaled(&(-r), j + 1));
            }
        }
    }
    out
}

/// Cheap necessary condition for a nonzero integral: some contiguous block
/// of beat notes sums to zero. Without one, every term reaching the outermost
/// integration is a pure nonzero-frequency exponential and integrates to zero.
pub fn has_zero_block(ns: &[i64]) -> bool {
    (0..ns.len()).any(|i| {
        let mut acc = 0i64;
        ns[i..].iter().any(|&v| {
            acc += v;
            acc == 0
        })
    })
}

fn compute(ns: &[i64]) -> ExactCoeff {
    if !has_zero_block(ns) {
        return ExactCoeff::zero();
    }
    integrate_nested(ns)
}

/// Full recursive integration, innermost (`N_k`) first, without pruning.
fn integrate_nested(ns: &[i64]) -> ExactCoeff {
    let mut g = OscSum::one();
    for &n in ns.iter().rev() {
        g = integrate_step(&g, n);
    }
    g.at_one()
}

/// Memo table shared across assemblies; safe for concurrent use.
#[derive(Debug, Default)]
pub struct ResonanceCache {
    table: RwLock<HashMap<Vec<i64>, ExactCoeff>>,
}

impl ResonanceCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, ns: &[i64]) -> ExactCoeff {
        if let Some(v) = self.table.read().expect("cache poisoned").get(ns) {
            return v.clone();
        }
        let value = compute(ns);
        self.table
            .write()
            .expect("cache poisoned")
            .insert(ns.to_vec(), value.clone());
        value
    }

    pub fn len(&self) -> usize {
        self.table.read().expect("cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Exact value of `I_{N1..Nk}` (dimensionless, `T = 1`).
pub fn resonance_integral_exact(ns: &[i64]) -> ExactCoeff {
    compute(ns)
}

pub fn resonance_integral(ns: &[i64]) -> Complex64 {
    compute(ns).to_complex()
}

/// True iff the exact integral is nonzero.
pub fn is_resonant(ns: &[i64]) -> bool {
    has_zero_block(ns) && !compute(ns).is_zero()
}
