//! Operators on the two-qubit ⊗ truncated Fock space.
//!
//! Basis ordering is `|q⟩ ⊗ |n⟩` with the qubit pair index `q ∈ {00, 01, 10, 11}`
//! major and the Fock index `n ∈ 0..n_dim` minor, so the flat index is
//! `q·n_dim + n`.

use std::f64::consts::PI;

use ndarray::{s, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{beat_notes, GateParams};
use crate::pulses::PulseShape;

pub type C64 = Complex64;
/// Dense complex matrix on the composite (or a factor) space.
pub type Operator = Array2<C64>;

pub const QUBIT_DIM: usize = 4;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub fn identity(n: usize) -> Operator {
    Array2::eye(n)
}

pub fn zeros(n: usize) -> Operator {
    Array2::zeros((n, n))
}

pub fn dagger(a: &Operator) -> Operator {
    a.t().mapv(|z| z.conj())
}

pub fn kron(a: &Operator, b: &Operator) -> Operator {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for ((i, j), &x) in a.indexed_iter() {
        if x == ZERO {
            continue;
        }
        out.slice_mut(s![i * br..(i + 1) * br, j * bc..(j + 1) * bc])
            .assign(&b.mapv(|y| x * y));
    }
    out
}

pub fn max_abs(a: &Operator) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_defect(a: &Operator) -> f64 {
    let mut worst = 0.0f64;
    let n = a.nrows();
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    worst
}

pub fn is_hermitian(a: &Operator, tol: f64) -> bool {
    hermiticity_defect(a) <= tol
}

/// Largest entrywise deviation of `U†U` from the identity.
pub fn unitarity_defect(u: &Operator) -> f64 {
    let n = u.nrows();
    max_abs(&(dagger(u).dot(u) - identity(n)))
}

/// Restriction of a composite operator to Fock levels `n < keep`
/// (all qubit states retained).
pub fn fock_sub_block(a: &Operator, n_dim: usize, keep: usize) -> Operator {
    let idx: Vec<usize> = (0..QUBIT_DIM)
        .flat_map(|q| (0..keep).map(move |n| q * n_dim + n))
        .collect();
    Array2::from_shape_fn((idx.len(), idx.len()), |(i, j)| a[[idx[i], idx[j]]])
}

/// The 4×4 qubit block `⟨row|A|col⟩` between two Fock levels.
pub fn qubit_block(a: &Operator, n_dim: usize, row: usize, col: usize) -> Operator {
    Array2::from_shape_fn((QUBIT_DIM, QUBIT_DIM), |(i, j)| {
        a[[i * n_dim + row, j * n_dim + col]]
    })
}

fn mat2(entries: [[C64; 2]; 2]) -> Operator {
    Array2::from_shape_fn((2, 2), |(i, j)| entries[i][j])
}

pub fn pauli_x() -> Operator {
    mat2([[ZERO, ONE], [ONE, ZERO]])
}

pub fn pauli_y() -> Operator {
    mat2([[ZERO, -I], [I, ZERO]])
}

pub fn pauli_z() -> Operator {
    mat2([[ONE, ZERO], [ZERO, -ONE]])
}

/// Collective spin operators of the qubit pair, all 4×4.
#[derive(Debug, Clone)]
pub struct CollectiveSpinSet {
    pub jx: Operator,
    pub jy: Operator,
    pub jz: Operator,
    pub jplus: Operator,
    pub jminus: Operator,
    /// `½(σx⊗σy + σy⊗σx)`
    pub jxy: Operator,
    pub jx2: Operator,
    pub jy2: Operator,
    pub jz2: Operator,
}

impl CollectiveSpinSet {
    pub fn new() -> Self {
        let one = identity(2);
        let collective = |p: &Operator| (kron(&one, p) + kron(p, &one)).mapv(|z| z * 0.5);
        let (sx, sy, sz) = (pauli_x(), pauli_y(), pauli_z());
        let jx = collective(&sx);
        let jy = collective(&sy);
        let jz = collective(&sz);
        let jplus = &jx + &jy.mapv(|z| z * I);
        let jminus = &jx - &jy.mapv(|z| z * I);
        let jxy = (kron(&sx, &sy) + kron(&sy, &sx)).mapv(|z| z * 0.5);
        Self {
            jx2: jx.dot(&jx),
            jy2: jy.dot(&jy),
            jz2: jz.dot(&jz),
            jx,
            jy,
            jz,
            jplus,
            jminus,
            jxy,
        }
    }
}

impl Default for CollectiveSpinSet {
    fn default() -> Self {
        Self::new()
    }
}

/// `Ĵ_m = ½(J₊ + (−1)^m J₋)`: `Jx` for even `m`, `iJy` for odd `m`.
pub fn collective_spin(m: i64) -> Operator {
    let spins = CollectiveSpinSet::new();
    if m.rem_euclid(2) == 0 {
        spins.jx
    } else {
        spins.jy.mapv(|z| z * I)
    }
}

/// Associated Laguerre polynomial `L_a^{(b)}(x)` by the three-term recurrence.
pub fn laguerre(a: u32, b: u32, x: f64) -> f64 {
    let b = b as f64;
    let mut prev = 1.0;
    if a == 0 {
        return prev;
    }
    let mut cur = 1.0 + b - x;
    for k in 1..a {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + b - x) * cur - (k + b) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Truncated annihilation operator on `n_dim` Fock levels.
pub fn annihilation(n_dim: usize) -> Operator {
    let mut a = zeros(n_dim);
    for n in 1..n_dim {
        a[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Sideband transition operator `Â_m` on the truncated Fock space, summed
/// from its defining Taylor series up to the Fock cutoff.
///
/// Because truncated lowering never leaves the space and truncated raising
/// never re-enters it, the result equals the projection of the untruncated
/// operator entry by entry.
pub fn sideband_operator(m: i64, eta: f64, n_dim: usize) -> Result<Operator> {
    if m.unsigned_abs() as usize > n_dim {
        return Err(Error::SidebandOutOfRange { m, n_dim });
    }
    let a = annihilation(n_dim);
    let ad = dagger(&a);
    let mut powers_a = vec![identity(n_dim)];
    let mut powers_ad = vec![identity(n_dim)];
    for p in 1..=2 * n_dim {
        powers_a.push(powers_a[p - 1].dot(&a));
        powers_ad.push(powers_ad[p - 1].dot(&ad));
    }
    let mut out = zeros(n_dim);
    let k_start = if m < 0 { (-m) as usize } else { 0 };
    for k in k_start..n_dim {
        let raise = (k as i64 + m) as usize;
        if raise >= powers_ad.len() {
            break;
        }
        let order = (2 * k) as i64 + m;
        let coeff =
            I.powi(order as i32) * eta.powi(order as i32) / (factorial(raise) * factorial(k));
        out.scaled_add(coeff, &powers_ad[raise].dot(&powers_a[k]));
    }
    Ok(out.mapv(|z| z * (-0.5 * eta * eta).exp()))
}

/// Closed form `⟨n+m|Â_m|n⟩` through associated Laguerre polynomials; zero
/// when `n+m` is negative.
pub fn sideband_element(m: i64, n: usize, eta: f64) -> C64 {
    let target = n as i64 + m;
    if target < 0 {
        return ZERO;
    }
    let target = target as usize;
    let x = eta * eta;
    let (lo, hi) = (n.min(target), n.max(target));
    let abs_m = m.unsigned_abs() as u32;
    let ratio = (factorial(lo) / factorial(hi)).sqrt();
    let phase = I.powi(abs_m as i32);
    // ⟨n−|m||Â_{−|m|}|n⟩ = (−1)^m conj(⟨n|Â_{|m|}|n−|m|⟩)
    let base =
        phase * eta.powi(abs_m as i32) * (-0.5 * x).exp() * ratio * laguerre(lo as u32, abs_m, x);
    if m >= 0 {
        base
    } else if abs_m.is_multiple_of(2) {
        base.conj()
    } else {
        -base.conj()
    }
}

/// Displacement `exp(iη(a + a†))` computed by matrix exponential of the
/// truncated generator.
pub fn displacement(eta: f64, n_dim: usize) -> Result<Operator> {
    let a = annihilation(n_dim);
    let gen = (&a + &dagger(&a)).mapv(|z| z * C64::new(0.0, eta));
    matrix_exp(&gen)
}

// --- matrix exponential -------------------------------------------------

fn one_norm(a: &Operator) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solves `A X = B` by LU decomposition with partial pivoting.
pub fn solve(a: &Operator, b: &Operator) -> Result<Operator> {
    let n = a.nrows();
    let mut lu = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| lu[[i, col]].norm().total_cmp(&lu[[j, col]].norm()))
            .unwrap_or(col);
        if lu[[pivot, col]].norm() == 0.0 {
            return Err(Error::Singular);
        }
        if pivot != col {
            for j in 0..n {
                lu.swap([pivot, j], [col, j]);
            }
            for j in 0..x.ncols() {
                x.swap([pivot, j], [col, j]);
            }
        }
        let inv = ONE / lu[[col, col]];
        for row in col + 1..n {
            let factor = lu[[row, col]] * inv;
            if factor == ZERO {
                continue;
            }
            for j in col..n {
                let v = lu[[col, j]];
                lu[[row, j]] -= factor * v;
            }
            for j in 0..x.ncols() {
                let v = x[[col, j]];
                x[[row, j]] -= factor * v;
            }
        }
    }
    for col in (0..n).rev() {
        let inv = ONE / lu[[col, col]];
        for j in 0..x.ncols() {
            let mut acc = x[[col, j]];
            for k in col + 1..n {
                acc -= lu[[col, k]] * x[[k, j]];
            }
            x[[col, j]] = acc * inv;
        }
    }
    Ok(x)
}

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152;

fn pade_low(a: &Operator, coeffs: &[f64]) -> (Operator, Operator) {
    let n = a.nrows();
    let a2 = a.dot(a);
    let mut even = vec![identity(n), a2.clone()];
    while even.len() * 2 < coeffs.len() {
        let next = even.last().unwrap().dot(&a2);
        even.push(next);
    }
    let mut u = zeros(n);
    let mut v = zeros(n);
    for (p, pow) in even.iter().enumerate() {
        if 2 * p + 1 < coeffs.len() {
            u.scaled_add(C64::new(coeffs[2 * p + 1], 0.0), pow);
        }
        v.scaled_add(C64::new(coeffs[2 * p], 0.0), pow);
    }
    (a.dot(&u), v)
}

fn pade13(a: &Operator) -> (Operator, Operator) {
    let b = |i: usize| C64::new(PADE13[i], 0.0);
    let n = a.nrows();
    let id = identity(n);
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let inner_u = &a6.mapv(|z| z * b(13)) + &a4.mapv(|z| z * b(11)) + &a2.mapv(|z| z * b(9));
    let mut u = a6.dot(&inner_u);
    u.scaled_add(b(7), &a6);
    u.scaled_add(b(5), &a4);
    u.scaled_add(b(3), &a2);
    u.scaled_add(b(1), &id);
    let u = a.dot(&u);
    let inner_v = &a6.mapv(|z| z * b(12)) + &a4.mapv(|z| z * b(10)) + &a2.mapv(|z| z * b(8));
    let mut v = a6.dot(&inner_v);
    v.scaled_add(b(6), &a6);
    v.scaled_add(b(4), &a4);
    v.scaled_add(b(2), &a2);
    v.scaled_add(b(0), &id);
    (u, v)
}

/// `exp(A)` by scaling and squaring with a diagonal Padé approximant whose
/// degree is chosen from the 1-norm of `A`.
pub fn matrix_exp(a: &Operator) -> Result<Operator> {
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let norm = one_norm(a);
    for (degree, theta) in THETA {
        if norm <= theta {
            let coeffs: &[f64] = match degree {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            let (u, v) = pade_low(a, coeffs);
            return solve(&(&v - &u), &(&v + &u));
        }
    }
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.mapv(|z| z / 2f64.powi(squarings));
    let (u, v) = pade13(&scaled);
    let mut r = solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..squarings {
        r = r.dot(&r);
    }
    Ok(r)
}

// --- Hamiltonian ---------------------------------------------------------

/// The interaction-picture Hamiltonian at unit drive, grouped by beat note:
/// `T·H(τ)/ħ = ΩT Σ_N exp(i2πNτ) B_N` with `B_N = Σ c_M Ĵ_m ⊗ Â_m` over all
/// `(M, m, μ)` sharing the beat note `N`.
#[derive(Debug, Clone)]
pub struct FactoredHamiltonian {
    pub n_dim: usize,
    pub terms: Vec<(i64, Operator)>,
}

impl FactoredHamiltonian {
    pub fn new(params: &GateParams, pulse: &PulseShape) -> Result<Self> {
        let m_max = params.m_max as i64;
        let mut sidebands = Vec::new();
        for m in -m_max..=m_max {
            let op = kron(
                &collective_spin(m),
                &sideband_operator(m, params.eta, params.n_dim)?,
            );
            sidebands.push((m, op));
        }
        let mut grouped: std::collections::BTreeMap<i64, Operator> = Default::default();
        for b in beat_notes(params, pulse) {
            let c = pulse.coefficient(b.harmonic);
            let op = &sidebands[(b.sideband + m_max) as usize].1;
            grouped
                .entry(b.value(params.k, params.l))
                .or_insert_with(|| zeros(op.nrows()))
                .scaled_add(c, op);
        }
        Ok(Self {
            n_dim: params.n_dim,
            terms: grouped.into_iter().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        QUBIT_DIM * self.n_dim
    }

    /// Largest `|N|` among the grouped beat notes.
    pub fn max_beat_note(&self) -> i64 {
        self.terms.iter().map(|(n, _)| n.abs()).max().unwrap_or(0)
    }

    pub fn at(&self, tau: f64, omega_t: f64) -> Operator {
        let mut h = zeros(self.dim());
        self.accumulate(tau, C64::new(omega_t, 0.0), &mut h);
        h
    }

    /// Adds `scale · Σ_N exp(i2πNτ) B_N` into `out`.
    pub fn accumulate(&self, tau: f64, scale: C64, out: &mut Operator) {
        for (n, op) in &self.terms {
            let phase = C64::from_polar(1.0, 2.0 * PI * *n as f64 * tau);
            out.scaled_add(scale * phase, op);
        }
    }
}

/// `T·Ĥ(τT)/ħ` for the factored, sideband-truncated Hamiltonian.
pub fn hamiltonian_at(tau: f64, params: &GateParams, pulse: &PulseShape) -> Result<Operator> {
    Ok(FactoredHamiltonian::new(params, pulse)?.at(tau, params.omega_t))
}

/// The same Hamiltonian built from the full displacement operator
/// `exp(iη(a e^{-i2πKτ} + a† e^{i2πKτ}))` instead of the sideband series.
#[derive(Debug, Clone)]
pub struct DisplacementHamiltonian {
    n_dim: usize,
    trap: i64,
    detuning: i64,
    pulse: PulseShape,
    jplus: Operator,
    jminus: Operator,
    d0: Operator,
}

impl DisplacementHamiltonian {
    pub fn new(params: &GateParams, pulse: &PulseShape) -> Result<Self> {
        let spins = CollectiveSpinSet::new();
        Ok(Self {
            n_dim: params.n_dim,
            trap: params.k,
            detuning: params.l,
            pulse: pulse.clone(),
            jplus: spins.jplus,
            jminus: spins.jminus,
            d0: displacement(params.eta, params.n_dim)?,
        })
    }

    pub fn at(&self, tau: f64, omega_t: f64) -> Operator {
        let theta = 2.0 * PI * self.trap as f64 * tau;
        let d = Array2::from_shape_fn((self.n_dim, self.n_dim), |(j, k)| {
            self.d0[[j, k]] * C64::from_polar(1.0, theta * (j as f64 - k as f64))
        });
        let drive =
            omega_t * self.pulse.envelope_at(tau) * (2.0 * PI * self.detuning as f64 * tau).cos();
        let h = kron(&self.jplus, &d) + kron(&self.jminus, &dagger(&d));
        h.mapv(|z| z * drive)
    }
}
