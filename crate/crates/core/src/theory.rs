//! Closed-form PQPD of the truncated coherent state and its smoothed forms.
//!
//! The unsmoothed distribution is
//!
//! ```text
//! W(S, θ) = p₀ δ₃(S) + p₁ cos θ / (4π S²) δ(S − 1) − p₁ (1 + cos θ) / (4π S) δ′(S − 1)
//! ```
//!
//! where θ is the polar angle measured from the S₁ axis. Two smoothed forms
//! are provided: the radial substitution `δ → δ_ε` and the exact convolution
//! with the 3-D Gaussian `G₃(r) = δ_ε(r₁) δ_ε(r₂) δ_ε(r₃)`, which is what the
//! smoothed backprojection computes.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::quantum::TruncatedState;
use crate::stokes::{DeltaKernel, StokesVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryParams {
    pub state: TruncatedState,
    pub kernel: DeltaKernel,
}

impl TheoryParams {
    pub fn new(state: TruncatedState, kernel: DeltaKernel) -> Self {
        Self { state, kernel }
    }

    /// `p₀ G₃(r)` for `|r| = radius`.
    pub fn central_peak(&self, radius: f64) -> f64 {
        let e = self.kernel.epsilon();
        self.state.p0() * self.kernel.peak().powi(3) * (-radius * radius / (4.0 * e * e)).exp()
    }
}

/// Radially smoothed single-photon part alone. Fails at `S = 0` whenever the
/// window around the unit sphere reaches the origin.
pub fn theory_single_photon_radial(tp: &TheoryParams, s: f64, theta: f64) -> Result<f64> {
    let k = &tp.kernel;
    let x = s - 1.0;
    if x.abs() > k.cutoff() {
        return Ok(0.0);
    }
    if s <= 0.0 {
        return Err(Error::DomainError(format!(
            "single-photon terms are singular at S = {s} for epsilon = {}",
            k.epsilon()
        )));
    }
    let (c_delta, c_prime) = w1_coefficients(tp.state.p1(), s, theta);
    Ok(c_delta * k.delta(x) + c_prime * k.delta_prime(x))
}

/// `p₀ G₃(S) + p₁ cos θ/(4πS²) δ_ε(S−1) − p₁(1+cos θ)/(4πS) δ′_ε(S−1)`.
pub fn theory_pqpd_radial(tp: &TheoryParams, s: f64, theta: f64) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::DomainError(format!("radius must be a finite non-negative number, got {s}")));
    }
    Ok(tp.central_peak(s) + theory_single_photon_radial(tp, s, theta)?)
}

/// Coefficients of `δ(S−1)` and `δ′(S−1)` in the single-photon PQPD.
pub fn w1_coefficients(p1: f64, s: f64, theta: f64) -> (f64, f64) {
    let c = theta.cos();
    (p1 * c / (4.0 * PI * s * s), -p1 * (1.0 + c) / (4.0 * PI * s))
}

/// Exact Gaussian convolution of the closed-form PQPD.
///
/// The δ and δ′ shells reduce to an integral over unit directions `n̂`:
///
/// ```text
/// p₁/(4π) ∫ dΩ G₃(r − n̂) [(1 + 2n₁) + (1 + n₁)(n̂·r − 1)/(2ε²)]
/// ```
///
/// Taking the pole along `r̂`, `G₃` depends only on `t = n̂·r̂` and the bracket
/// is linear in `n₁`, so the azimuthal average is exact (`n₁ → t r̂₁`). The
/// remaining integral over `t` runs on the part of `[−1, 1]` where the
/// Gaussian window is active.
#[derive(Debug, Clone)]
pub struct ConvolvedTheory {
    params: TheoryParams,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl ConvolvedTheory {
    pub const DEFAULT_NODES: usize = 64;

    pub fn new(params: TheoryParams) -> Self {
        Self::with_nodes(params, Self::DEFAULT_NODES)
    }

    pub fn with_nodes(params: TheoryParams, n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n.max(1));
        Self { params, nodes, weights }
    }

    pub fn params(&self) -> &TheoryParams {
        &self.params
    }

    pub fn eval(&self, r: &StokesVector) -> f64 {
        let tp = &self.params;
        let radius = r.norm();
        tp.central_peak(radius) + self.single_photon(radius, r.s1)
    }

    /// Convolved single-photon part at radius `radius` and `S₁ = s1`.
    pub fn single_photon(&self, radius: f64, s1: f64) -> f64 {
        let tp = &self.params;
        let k = &tp.kernel;
        let cut = k.cutoff();
        if (radius - 1.0).abs() > cut {
            return 0.0;
        }
        let e2 = k.epsilon() * k.epsilon();
        let g0 = k.peak().powi(3);
        let g = |d2: f64| g0 * (-d2 / (4.0 * e2)).exp();

        let (r1, t_lo) = if radius > 0.0 {
            (s1 / radius, ((radius * radius + 1.0 - cut * cut) / (2.0 * radius)).max(-1.0))
        } else {
            (1.0, -1.0)
        };
        if t_lo >= 1.0 {
            return 0.0;
        }
        let (mid, half) = (0.5 * (1.0 + t_lo), 0.5 * (1.0 - t_lo));
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let t = mid + half * x;
            let d2 = radius * radius + 1.0 - 2.0 * radius * t;
            if d2 > cut * cut {
                continue;
            }
            let n1 = t * r1;
            let bracket = (1.0 + 2.0 * n1) + (1.0 + n1) * (radius * t - 1.0) / (2.0 * e2);
            acc += w * g(d2) * bracket;
        }
        // p₁/(4π) · 2π · ∫dt
        0.5 * tp.state.p1() * half * acc
    }
}

pub fn theory_pqpd_convolved(tp: &TheoryParams, s: &StokesVector) -> f64 {
    ConvolvedTheory::new(*tp).eval(s)
}

/// Auxiliary-integral probe: radius, polar angle, Leibniz variable `y` and
/// the rectangular-delta width `kappa` that sets the excluded band `|S − y| < 10κ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupplementaryProbe {
    pub s: f64,
    pub theta: f64,
    pub y: f64,
    pub kappa: f64,
}

impl SupplementaryProbe {
    pub fn new(s: f64, theta: f64, y: f64, kappa: f64) -> Self {
        Self { s, theta, y, kappa }
    }
}

fn heaviside(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        0.0
    } else {
        0.5
    }
}

/// `I_ξ = 2π/S² (S + y cos θ) H(S − y)` with `H(0) = 1/2`.
pub fn i_xi_closed(s: f64, theta: f64, y: f64) -> f64 {
    2.0 * PI / (s * s) * (s + y * theta.cos()) * heaviside(s - y)
}

/// κ → 0 limit of the ρ̄ integral: `2/√(1 − P²)` inside `|P| < 1`, else 0.
pub fn i_rho_bar(p: f64) -> f64 {
    if p.abs() < 1.0 {
        2.0 / (1.0 - p * p).sqrt()
    } else {
        0.0
    }
}

/// `∫₀^{2π} δ_κ(P − cos ρ̄) dρ̄` with the rectangular delta, in closed form.
pub fn i_rho_bar_rect(p: f64, kappa: f64) -> f64 {
    let lo = (p - 0.5 * kappa).max(-1.0);
    let hi = (p + 0.5 * kappa).min(1.0);
    if lo >= hi {
        return 0.0;
    }
    2.0 / kappa * (lo.acos() - hi.acos())
}

/// Nodes of the midpoint rule in `i_xi_numeric`.
pub const I_XI_NODES: usize = 1000;

/// `I_ξ = ∫₀^π dξ (1 + cos ξ)/(S sin θ) I_ρ̄(P)` by quadrature.
///
/// The support `|P| < 1` is the interval `t₋ < cos ξ < t₊`; on it the
/// substitution `cos ξ = m + h sin s` absorbs the inverse square-root
/// endpoint singularities and the midpoint rule runs over `s ∈ (−π/2, π/2)`.
pub fn i_xi_numeric(probe: &SupplementaryProbe) -> Result<f64> {
    let SupplementaryProbe { s, theta, y, kappa } = *probe;
    let (sin_t, cos_t) = theta.sin_cos();
    if s * sin_t == 0.0 || !s.is_finite() || !theta.is_finite() {
        return Err(Error::SingularProbe(format!("S sin(theta) vanishes at S = {s}, theta = {theta}")));
    }
    if (s - y).abs() < 10.0 * kappa || s == y {
        return Err(Error::SingularProbe(format!(
            "S = {s} lies within 10 kappa of the step at y = {y}"
        )));
    }
    if s < y {
        return Ok(0.0);
    }
    let root = sin_t.abs() * (s * s - y * y).sqrt();
    let t_minus = (y * cos_t - root) / s;
    let t_plus = (y * cos_t + root) / s;
    let (m, h) = (0.5 * (t_plus + t_minus), 0.5 * (t_plus - t_minus));
    let ds = PI / I_XI_NODES as f64;
    let mut acc = 0.0;
    for i in 0..I_XI_NODES {
        let u = -0.5 * PI + (i as f64 + 0.5) * ds;
        let t = m + h * u.sin();
        let sin_xi = (1.0 - t * t).max(0.0).sqrt();
        let p = (y - s * t * cos_t) / (s * sin_xi * sin_t);
        let dxi = h * u.cos() / sin_xi;
        acc += (1.0 + t) / (s * sin_t) * i_rho_bar(p) * dxi;
    }
    Ok(acc * ds)
}
