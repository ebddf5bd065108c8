mod common;

use num_bigint::BigInt;
use num_rational::BigRational;

use msgate::resint::{is_resonant, resonance_integral, resonance_integral_exact, ExactCoeff};

fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Third-order closed form for nonzero beat notes, `1/(4π²) = −x²`.
fn order_three(n1: i64, n2: i64, n3: i64) -> ExactCoeff {
    let mut r = frac(0, 1);
    if n1 + n2 == 0 {
        r += frac(1, n2 * n3);
    }
    if n2 + n3 == 0 {
        r -= frac(1, n1 * n3);
    }
    if n1 + n2 + n3 == 0 {
        // (1/N₁ − 1/N₃)/(4π²N₂) with N₂ = −(N₁+N₃)
        r += frac(1, n1 * n2) - frac(1, n3 * n2);
    }
    if r == frac(0, 1) {
        ExactCoeff::zero()
    } else {
        ExactCoeff::term(2, -r)
    }
}

#[test]
fn third_order_closed_form_for_pairwise_resonances() {
    for n1 in (-7i64..=7).filter(|n| *n != 0) {
        for n2 in (-7i64..=7).filter(|n| *n != 0) {
            for n3 in (-7i64..=7).filter(|n| *n != 0) {
                let exact = resonance_integral_exact(&[n1, n2, n3]);
                if n1 + n2 + n3 == 0 {
                    let quad = common::resonance_quadrature(&[n1, n2, n3]);
                    assert!((resonance_integral(&[n1, n2, n3]) - quad).norm() < 1e-12);
                    continue;
                }
                assert_eq!(exact, order_three(n1, n2, n3), "{n1} {n2} {n3}");
            }
        }
    }
}

#[test]
fn total_resonance_is_nonzero() {
    for (n1, n3) in [(1, 2), (-3, 5), (4, -1)] {
        let n2 = -(n1 + n3);
        if n1 + n2 != 0 && n2 + n3 != 0 {
            assert!(is_resonant(&[n1, n2, n3]));
        }
    }
}
