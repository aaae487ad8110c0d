//! Poincaré-sphere geometry, Stokes-space coordinates and the one-dimensional
//! kernels (smoothed Dirac deltas, interpolation kernels) used everywhere else.
//!
//! Angles are radians throughout; degrees only appear at I/O boundaries.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{Error, Result};

const POLE_TOL: f64 = 1e-12;

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Measurement direction on the Poincaré sphere.
///
/// `alpha` is the azimuth in `[0, 2π)`, `beta` the latitude in `[-π/2, π/2]`.
/// At the poles `alpha` carries no information.
#[derive(Debug, Clone, Copy)]
pub struct PoincarePoint {
    alpha: f64,
    beta: f64,
}

impl PartialEq for PoincarePoint {
    fn eq(&self, other: &Self) -> bool {
        self.beta == other.beta && (self.alpha == other.alpha || (self.is_pole() && other.is_pole()))
    }
}

impl PoincarePoint {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::OutOfRange {
                what: "poincare angle",
                value: if alpha.is_finite() { beta } else { alpha },
            });
        }
        if beta.abs() > FRAC_PI_2 + POLE_TOL {
            return Err(Error::OutOfRange {
                what: "beta",
                value: beta,
            });
        }
        Ok(Self {
            alpha: wrap_angle(alpha),
            beta: beta.clamp(-FRAC_PI_2, FRAC_PI_2),
        })
    }

    pub fn from_degrees(alpha_deg: f64, beta_deg: f64) -> Result<Self> {
        Self::new(alpha_deg.to_radians(), beta_deg.to_radians())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_pole(&self) -> bool {
        self.beta.abs() >= FRAC_PI_2 - POLE_TOL
    }

    /// Point equality up to `tol` radians, with α ignored at the poles and
    /// compared modulo 2π elsewhere.
    pub fn same_point(&self, other: &PoincarePoint, tol: f64) -> bool {
        if (self.beta - other.beta).abs() > tol {
            return false;
        }
        if self.is_pole() && other.is_pole() {
            return true;
        }
        let d = (self.alpha - other.alpha).abs();
        d.min(TAU - d) <= tol
    }

    /// The inverted direction `(α + π, −β)`.
    pub fn antipode(&self) -> PoincarePoint {
        PoincarePoint {
            alpha: wrap_angle(self.alpha + PI),
            beta: -self.beta,
        }
    }

    /// Unit Stokes vector `(cosα cosβ, sinα cosβ, sinβ)`.
    pub fn direction(&self) -> StokesVector {
        let (sa, ca) = self.alpha.sin_cos();
        let (sb, cb) = self.beta.sin_cos();
        StokesVector::new(ca * cb, sa * cb, sb)
    }
}

/// Half-wave (`α̃`) and quarter-wave (`β̃`) plate angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavePlateSetting {
    pub half_wave: f64,
    pub quarter_wave: f64,
}

impl WavePlateSetting {
    pub fn new(half_wave: f64, quarter_wave: f64) -> Self {
        Self {
            half_wave,
            quarter_wave,
        }
    }

    pub fn from_degrees(half_wave_deg: f64, quarter_wave_deg: f64) -> Self {
        Self::new(half_wave_deg.to_radians(), quarter_wave_deg.to_radians())
    }
}

/// Maps plate angles to the measured direction: `α = 4α̃ − 2β̃`, `β = 2β̃`.
pub fn waveplate_to_poincare(setting: WavePlateSetting) -> Result<PoincarePoint> {
    let beta = 2.0 * setting.quarter_wave;
    if !beta.is_finite() || beta.abs() > FRAC_PI_2 + POLE_TOL {
        return Err(Error::OutOfRange {
            what: "beta = 2 * quarter_wave",
            value: beta,
        });
    }
    PoincarePoint::new(4.0 * setting.half_wave - 2.0 * setting.quarter_wave, beta)
}

/// One plate setting reaching `p`; inverse of [`waveplate_to_poincare`] up to
/// the half-wave plate's π/2 periodicity.
pub fn poincare_to_waveplate(p: PoincarePoint) -> WavePlateSetting {
    let quarter = p.beta / 2.0;
    WavePlateSetting::new((p.alpha + 2.0 * quarter) / 4.0, quarter)
}

/// Point in Stokes space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StokesVector {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

/// `(S, θ, φ)` with θ measured from the S₁ axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spherical {
    pub radius: f64,
    pub theta: f64,
    pub phi: f64,
}

/// `(S₁, S₂₃, φ)` with `S₂₃ = √(S₂² + S₃²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cylindrical {
    pub s1: f64,
    pub s23: f64,
    pub phi: f64,
}

impl StokesVector {
    pub const fn new(s1: f64, s2: f64, s3: f64) -> Self {
        Self { s1, s2, s3 }
    }

    pub fn from_spherical(radius: f64, theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self::new(radius * ct, radius * st * cp, radius * st * sp)
    }

    pub fn from_cylindrical(s1: f64, s23: f64, phi: f64) -> Self {
        let (sp, cp) = phi.sin_cos();
        Self::new(s1, s23 * cp, s23 * sp)
    }

    pub fn dot(&self, other: &StokesVector) -> f64 {
        self.s1 * other.s1 + self.s2 * other.s2 + self.s3 * other.s3
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, f: f64) -> StokesVector {
        StokesVector::new(self.s1 * f, self.s2 * f, self.s3 * f)
    }

    pub fn sub(&self, other: &StokesVector) -> StokesVector {
        StokesVector::new(self.s1 - other.s1, self.s2 - other.s2, self.s3 - other.s3)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.s1, self.s2, self.s3]
    }

    /// Spherical view; θ = φ = 0 at the origin.
    pub fn spherical(&self) -> Spherical {
        let radius = self.norm();
        if radius == 0.0 {
            return Spherical {
                radius,
                theta: 0.0,
                phi: 0.0,
            };
        }
        let s23 = self.s2.hypot(self.s3);
        Spherical {
            radius,
            theta: s23.atan2(self.s1),
            phi: self.phi(),
        }
    }

    pub fn cylindrical(&self) -> Cylindrical {
        Cylindrical {
            s1: self.s1,
            s23: self.s2.hypot(self.s3),
            phi: self.phi(),
        }
    }

    fn phi(&self) -> f64 {
        if self.s2 == 0.0 && self.s3 == 0.0 {
            0.0
        } else {
            wrap_angle(self.s3.atan2(self.s2))
        }
    }
}

/// Projection of `v` on the measurement direction `p`.
pub fn stokes_projection(v: &StokesVector, p: &PoincarePoint) -> f64 {
    v.dot(&p.direction())
}

/// Gaussian approximation of the Dirac delta,
/// `δ_ε(x) = exp(−x²/4ε²) / (2ε√π)`, truncated to zero outside
/// `|x| ≤ cutoff_sigmas · ε√2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaKernel {
    epsilon: f64,
    cutoff_sigmas: f64,
}

impl DeltaKernel {
    pub const DEFAULT_CUTOFF_SIGMAS: f64 = 8.0;

    pub fn new(epsilon: f64) -> Result<Self> {
        Self::with_cutoff(epsilon, Self::DEFAULT_CUTOFF_SIGMAS)
    }

    pub fn with_cutoff(epsilon: f64, cutoff_sigmas: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::NonPositiveWidth(epsilon));
        }
        if !(cutoff_sigmas > 0.0 && cutoff_sigmas.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cutoff_sigmas must be positive, got {cutoff_sigmas}"
            )));
        }
        Ok(Self {
            epsilon,
            cutoff_sigmas,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn cutoff_sigmas(&self) -> f64 {
        self.cutoff_sigmas
    }

    /// Standard deviation of δ_ε viewed as a normal density.
    pub fn sigma(&self) -> f64 {
        self.epsilon * std::f64::consts::SQRT_2
    }

    /// Half-width of the evaluation window.
    pub fn cutoff(&self) -> f64 {
        self.cutoff_sigmas * self.sigma()
    }

    /// Peak value `δ_ε(0) = 1/(2ε√π)`.
    pub fn peak(&self) -> f64 {
        1.0 / (2.0 * self.epsilon * PI.sqrt())
    }

    pub fn delta(&self, x: f64) -> f64 {
        if x.abs() > self.cutoff() {
            return 0.0;
        }
        self.peak() * (-x * x / (4.0 * self.epsilon * self.epsilon)).exp()
    }

    pub fn delta_prime(&self, x: f64) -> f64 {
        -x / (2.0 * self.epsilon * self.epsilon) * self.delta(x)
    }

    pub fn delta_second(&self, x: f64) -> f64 {
        let e2 = self.epsilon * self.epsilon;
        (x * x - 2.0 * e2) / (4.0 * e2 * e2) * self.delta(x)
    }
}

/// `order`-th derivative (0, 1 or 2) of the Gaussian delta at `x`.
pub fn delta_gauss(x: f64, kernel: &DeltaKernel, order: u32) -> Result<f64> {
    match order {
        0 => Ok(kernel.delta(x)),
        1 => Ok(kernel.delta_prime(x)),
        2 => Ok(kernel.delta_second(x)),
        other => Err(Error::InvalidOrder(other)),
    }
}

/// Unit rectangle on the half-open support `[-1/2, 1/2)`.
pub fn rect(x: f64) -> f64 {
    if (-0.5..0.5).contains(&x) {
        1.0
    } else {
        0.0
    }
}

/// Rectangular delta approximation `Π(x/κ)/κ`.
pub fn delta_rect(x: f64, kappa: f64) -> Result<f64> {
    if kappa.is_nan() || kappa <= 0.0 {
        return Err(Error::NonPositiveWidth(kappa));
    }
    Ok(rect(x / kappa) / kappa)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InterpKernelKind {
    Rectangular,
    CubicSpline,
}

impl InterpKernelKind {
    pub fn name(&self) -> &'static str {
        match self {
            InterpKernelKind::Rectangular => "rectangular",
            InterpKernelKind::CubicSpline => "cubic-spline",
        }
    }
}

impl std::str::FromStr for InterpKernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "rectangular" | "rect" => Ok(InterpKernelKind::Rectangular),
            "cubic-spline" | "cubic" => Ok(InterpKernelKind::CubicSpline),
            other => Err(Error::InvalidParameter(format!(
                "unknown interpolation kernel '{other}'"
            ))),
        }
    }
}

impl std::fmt::Display for InterpKernelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Interpolation kernel value; the argument is in units of the node spacing.
pub fn interp_kernel(kind: InterpKernelKind, x: f64) -> f64 {
    match kind {
        InterpKernelKind::Rectangular => rect(x),
        InterpKernelKind::CubicSpline => {
            let ax = x.abs();
            if ax <= 1.0 {
                (2.0 * ax - 3.0) * ax * ax + 1.0
            } else {
                0.0
            }
        }
    }
}
