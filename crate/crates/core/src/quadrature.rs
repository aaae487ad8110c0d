//! Gauss–Legendre rules and the hemisphere mesh used by the reconstructor.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes in ascending order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi's initial guess, then Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped onto `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|v| v * half).collect(),
    )
}

/// Latitude rule of the hemisphere quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatitudeRule {
    /// Gauss–Legendre in `sin β` with one node per `d_beta` of latitude.
    GaussLegendre,
    /// Composite midpoint in β with weight `cos β`.
    Midpoint,
}

impl LatitudeRule {
    pub fn name(&self) -> &'static str {
        match self {
            LatitudeRule::GaussLegendre => "gauss-legendre",
            LatitudeRule::Midpoint => "midpoint",
        }
    }
}

impl std::str::FromStr for LatitudeRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gauss-legendre" | "gl" => Ok(LatitudeRule::GaussLegendre),
            "midpoint" => Ok(LatitudeRule::Midpoint),
            other => Err(Error::InvalidParameter(format!(
                "unknown quadrature rule '{other}'"
            ))),
        }
    }
}

/// Discretization of the `(α, β)` integral over the upper hemisphere.
///
/// α always uses the composite midpoint rule, which is spectrally accurate for
/// periodic integrands. `rule` selects how latitude is sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub d_alpha: f64,
    pub d_beta: f64,
    pub rule: LatitudeRule,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::from_degrees(1.0, 1.0)
    }
}

impl QuadratureSpec {
    pub fn from_degrees(d_alpha_deg: f64, d_beta_deg: f64) -> Self {
        Self {
            d_alpha: d_alpha_deg.to_radians(),
            d_beta: d_beta_deg.to_radians(),
            rule: LatitudeRule::GaussLegendre,
        }
    }

    pub fn with_rule(mut self, rule: LatitudeRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn halved(&self) -> Self {
        Self {
            d_alpha: self.d_alpha / 2.0,
            d_beta: self.d_beta / 2.0,
            rule: self.rule,
        }
    }

    pub fn n_alpha(&self) -> Result<usize> {
        divides(TAU, self.d_alpha, "d_alpha")
    }

    pub fn n_beta(&self) -> Result<usize> {
        divides(FRAC_PI_2, self.d_beta, "d_beta")
    }

    pub fn validate(&self) -> Result<()> {
        self.n_alpha()?;
        self.n_beta()?;
        Ok(())
    }

    /// Latitudes and weights (the `cos β dβ` measure is folded into the
    /// weights). Weights sum to 1, the hemisphere area divided by 2π.
    pub fn latitudes(&self) -> Result<Vec<(f64, f64)>> {
        let n = self.n_beta()?;
        Ok(match self.rule {
            LatitudeRule::Midpoint => (0..n)
                .map(|j| {
                    let b = (j as f64 + 0.5) * self.d_beta;
                    (b, b.cos() * self.d_beta)
                })
                .collect(),
            LatitudeRule::GaussLegendre => {
                // the upper half of a full-sphere rule in z = sin β; the
                // integrand is even under inversion so z = 0 is not an edge
                let (z, w) = gauss_legendre(2 * n);
                z.iter()
                    .zip(&w)
                    .skip(n)
                    .map(|(&z, &w)| (z.asin(), w))
                    .collect()
            }
        })
    }

    pub fn alphas(&self) -> Result<Vec<f64>> {
        let n = self.n_alpha()?;
        Ok((0..n).map(|i| (i as f64 + 0.5) * self.d_alpha).collect())
    }
}

fn divides(range: f64, step: f64, what: &str) -> Result<usize> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter(format!("{what} must be positive")));
    }
    let n = range / step;
    let r = n.round();
    if r < 1.0 || (n - r).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "{what} = {step} rad does not divide {range}"
        )));
    }
    Ok(r as usize)
}
