//! Distributional pairing of the single-photon coefficients against the
//! second y-derivative of the auxiliary integral.

use std::f64::consts::PI;

use pqpd::quadrature::{gauss_legendre, gauss_legendre_on};
use pqpd::{i_xi_closed, i_xi_numeric, w1_coefficients, SupplementaryProbe};

const P1: f64 = 0.189;
const WIDTH: f64 = 0.05;

fn phi(s: f64) -> f64 {
    (-(s - 1.0).powi(2) / (2.0 * WIDTH * WIDTH)).exp()
}

fn dphi(s: f64) -> f64 {
    -(s - 1.0) / (WIDTH * WIDTH) * phi(s)
}

fn psi(theta: f64) -> f64 {
    1.0 + 0.5 * theta.cos() + 0.3 * theta.cos().powi(2)
}

/// Nodes in `cos θ`, strictly inside (−1, 1).
fn angular() -> (Vec<f64>, Vec<f64>) {
    gauss_legendre(16)
}

/// `∫ dΩ ψ ∫ S² φ W₁ dS` with `W₁ = A δ(S−1) + B δ′(S−1)`.
fn pairing_from_coefficients() -> f64 {
    let (ct, cw) = angular();
    let mut acc = 0.0;
    for (t, w) in ct.iter().zip(&cw) {
        let theta = t.acos();
        let (a, b) = w1_coefficients(P1, 1.0, theta);
        // d/dS [S² B(S) φ(S)] at S = 1, with B(S) = b / S
        let d = b * (phi(1.0) + dphi(1.0));
        acc += 2.0 * PI * w * psi(theta) * (a * phi(1.0) - d);
    }
    acc
}

/// `−p₁/(8π²) ∂²_y ∫ dΩ ψ ∫_y S² φ I_ξ dS` at `y = 1`.
fn pairing_from_i_xi<F>(i_xi: F) -> f64
where
    F: Fn(f64, f64, f64) -> f64,
{
    let (ct, cw) = angular();
    let j = |y: f64| {
        let mut acc = 0.0;
        for (t, w) in ct.iter().zip(&cw) {
            let theta = t.acos();
            let mut radial = 0.0;
            for k in 0..20 {
                let (a, b) = (y + 0.03 * k as f64, y + 0.03 * (k + 1) as f64);
                let (ss, sw) = gauss_legendre_on(16, a, b);
                for (s, ws) in ss.iter().zip(&sw) {
                    radial += ws * s * s * phi(*s) * i_xi(*s, theta, y);
                }
            }
            acc += 2.0 * PI * w * psi(theta) * radial;
        }
        acc
    };
    let h = 2e-3;
    let d2 = (-j(1.0 + 2.0 * h) + 16.0 * j(1.0 + h) - 30.0 * j(1.0) + 16.0 * j(1.0 - h) - j(1.0 - 2.0 * h))
        / (12.0 * h * h);
    -P1 / (8.0 * PI * PI) * d2
}

#[test]
fn coefficients_pair_like_the_closed_integral() {
    let a = pairing_from_coefficients();
    let b = pairing_from_i_xi(i_xi_closed);
    assert!(a.abs() > 1e-2, "{a}");
    assert!((a - b).abs() < 1e-4, "{a} vs {b}");
}

#[test]
fn coefficients_pair_like_the_numeric_integral() {
    let a = pairing_from_coefficients();
    let b = pairing_from_i_xi(|s, theta, y| {
        i_xi_numeric(&SupplementaryProbe::new(s, theta, y, 1e-12)).expect("probe off the step")
    });
    assert!((a - b).abs() < 1e-4, "{a} vs {b}");
}

#[test]
fn numeric_and_closed_agree_on_a_grid() {
    for i in 0..40 {
        let s = 1.05 + 1.95 * i as f64 / 39.0;
        for j in 0..25 {
            let theta = 0.1 + (PI - 0.2) * j as f64 / 24.0;
            let n = i_xi_numeric(&SupplementaryProbe::new(s, theta, 1.0, 1e-6)).unwrap();
            assert!((n - i_xi_closed(s, theta, 1.0)).abs() <= 1e-6, "S = {s}, theta = {theta}");
        }
        let below = i_xi_numeric(&SupplementaryProbe::new(2.0 - s, 1.0, 1.0, 1e-6));
        if 2.0 - s < 1.0 - 1e-5 && 2.0 - s > 0.0 {
            assert_eq!(below.unwrap(), 0.0);
        }
    }
}
