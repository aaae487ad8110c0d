//! Quasiprobability reconstruction from outcome probabilities.
//!
//! Integrating the characteristic function radially turns the Fourier
//! inversion into a backprojection over the upper hemisphere:
//!
//! ```text
//! W_ε(S) = −1/(2π)² ∫₀^{2π} dα ∫₀^{π/2} dβ cos β Σₙ W_{αβ}(n) δ″_ε(S·n̂(α,β) − n)
//! ```
//!
//! with `n ∈ {−1, 0, 1}`. The lower hemisphere is supplied by the sign
//! symmetry of the outcome sum, so the field is never queried at β < 0.
//!
//! [`Reconstructor`] evaluates the field once on the quadrature mesh and
//! folds the measure, the `−1/(2π)²` prefactor and the probabilities into
//! per-node weights. Every output point is then an independent sum over the
//! mesh, which is what makes slices embarrassingly parallel.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::ProbabilityField;
use crate::par::{map_indexed, Execution};
use crate::quadrature::QuadratureSpec;
use crate::stokes::{DeltaKernel, PoincarePoint, StokesVector};

#[derive(Debug, Clone, Copy)]
struct MeshNode {
    dir: [f64; 3],
    // −cosβ dα dβ / (2π)² · W(n) for n = −1, 0, 1
    weight: [f64; 3],
}

/// Backprojection engine bound to one field, delta kernel and quadrature.
#[derive(Debug, Clone)]
pub struct Reconstructor {
    kernel: DeltaKernel,
    quadrature: QuadratureSpec,
    nodes: Vec<MeshNode>,
}

impl Reconstructor {
    pub fn new(field: &ProbabilityField, kernel: DeltaKernel, quadrature: QuadratureSpec) -> Result<Self> {
        quadrature.validate()?;
        let alphas = quadrature.alphas()?;
        let lats = quadrature.latitudes()?;
        let prefactor = -quadrature.d_alpha / (4.0 * PI * PI);
        let mut nodes = Vec::with_capacity(alphas.len() * lats.len());
        for &(beta, lat_weight) in &lats {
            for &alpha in &alphas {
                let p = PoincarePoint::new(alpha, beta)?;
                let probs = field.at(&p)?.as_array();
                let w = prefactor * lat_weight;
                let weight = probs.map(|q| w * q);
                if weight.iter().all(|&x| x == 0.0) {
                    continue;
                }
                nodes.push(MeshNode {
                    dir: p.direction().as_array(),
                    weight,
                });
            }
        }
        Ok(Self {
            kernel,
            quadrature,
            nodes,
        })
    }

    pub fn kernel(&self) -> &DeltaKernel {
        &self.kernel
    }

    pub fn quadrature(&self) -> &QuadratureSpec {
        &self.quadrature
    }

    pub fn mesh_size(&self) -> usize {
        self.nodes.len()
    }

    /// `W_ε(S)`.
    pub fn eval(&self, s: &StokesVector) -> f64 {
        let eps = self.kernel.epsilon();
        let e2 = eps * eps;
        let cut = self.kernel.cutoff();
        let inv4e2 = 1.0 / (4.0 * e2);
        let two_e2 = 2.0 * e2;
        let norm = self.kernel.peak() / (4.0 * e2 * e2);
        let [s1, s2, s3] = s.as_array();
        // projections only reach n = ±1 when |S| is within the window of 1
        let reach_unit = s.norm() + cut >= 1.0;

        let mut acc = 0.0;
        for node in &self.nodes {
            let proj = s1 * node.dir[0] + s2 * node.dir[1] + s3 * node.dir[2];
            if proj.abs() <= cut {
                let x2 = proj * proj;
                acc += node.weight[1] * (x2 - two_e2) * (-x2 * inv4e2).exp();
            }
            if reach_unit {
                let xm = proj + 1.0;
                if xm.abs() <= cut {
                    let x2 = xm * xm;
                    acc += node.weight[0] * (x2 - two_e2) * (-x2 * inv4e2).exp();
                }
                let xp = proj - 1.0;
                if xp.abs() <= cut {
                    let x2 = xp * xp;
                    acc += node.weight[2] * (x2 - two_e2) * (-x2 * inv4e2).exp();
                }
            }
        }
        acc * norm
    }

    pub fn slice(&self, plane: &PlaneSpec) -> PQPDSlice {
        self.slice_with(plane, Execution::default())
    }

    pub fn slice_with(&self, plane: &PlaneSpec, exec: Execution) -> PQPDSlice {
        PQPDSlice::from_fn(plane, self.kernel, exec, |s| self.eval(s))
    }
}

/// `W_ε` at one point. Builds the mesh on every call; use [`Reconstructor`]
/// for repeated evaluation.
pub fn pqpd_at(
    field: &ProbabilityField,
    kernel: &DeltaKernel,
    s: &StokesVector,
    quadrature: &QuadratureSpec,
) -> Result<f64> {
    Ok(Reconstructor::new(field, *kernel, *quadrature)?.eval(s))
}

pub fn pqpd_slice(
    field: &ProbabilityField,
    kernel: &DeltaKernel,
    plane: &PlaneSpec,
    quadrature: &QuadratureSpec,
) -> Result<PQPDSlice> {
    plane.validate()?;
    Ok(Reconstructor::new(field, *kernel, *quadrature)?.slice(plane))
}

/// `χ(λ) = Σₙ W_{αβ}(n) e^{iλn}` synthesized from the field. Lower-hemisphere
/// directions are answered through the antipode.
pub fn characteristic_from_field(field: &ProbabilityField, p: &PoincarePoint, lambda: f64) -> Result<Complex64> {
    let dist = if p.beta() < 0.0 {
        field.at(&p.antipode())?.inverted()
    } else {
        field.at(p)?
    };
    Ok(dist.characteristic(lambda))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlaneKind {
    /// `S₁ = value`; coordinates `(a, b) = (S₂, S₃)`.
    S1(f64),
    /// Half-plane at azimuth `φ` (radians) about the S₁ axis; coordinates
    /// `(a, b) = (S₁, S₂₃)`.
    Phi(f64),
}

/// Planar cross-section of Stokes space sampled on a square lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneSpec {
    pub kind: PlaneKind,
    pub a_range: (f64, f64),
    pub b_range: (f64, f64),
    pub step: f64,
}

impl PlaneSpec {
    pub const DEFAULT_STEP: f64 = 0.01;

    /// `(S₂, S₃) ∈ [−1.3, 1.3]²` at fixed `S₁`.
    pub fn s1_plane(s1: f64) -> Self {
        Self {
            kind: PlaneKind::S1(s1),
            a_range: (-1.3, 1.3),
            b_range: (-1.3, 1.3),
            step: Self::DEFAULT_STEP,
        }
    }

    /// `S₁ ∈ [−1.3, 1.3]`, `S₂₃ ∈ [0, 1.3]` at azimuth `phi` (radians).
    pub fn phi_plane(phi: f64) -> Self {
        Self {
            kind: PlaneKind::Phi(phi),
            a_range: (-1.3, 1.3),
            b_range: (0.0, 1.3),
            step: Self::DEFAULT_STEP,
        }
    }

    pub fn with_ranges(mut self, a: (f64, f64), b: (f64, f64)) -> Self {
        self.a_range = a;
        self.b_range = b;
        self
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.a_range.0, self.a_range.1, self.b_range.0, self.b_range.1]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.a_range.1 < self.a_range.0 || self.b_range.1 < self.b_range.0 {
            return Err(Error::InvalidParameter(format!("bad plane ranges in '{self}'")));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidParameter(format!("plane step must be positive in '{self}'")));
        }
        let fixed = match self.kind {
            PlaneKind::S1(v) | PlaneKind::Phi(v) => v,
        };
        if !fixed.is_finite() {
            return Err(Error::InvalidParameter(format!("plane position is not finite in '{self}'")));
        }
        Ok(())
    }

    fn axis_len(range: (f64, f64), step: f64) -> usize {
        ((range.1 - range.0) / step + 1e-9).floor() as usize + 1
    }

    pub fn n_a(&self) -> usize {
        Self::axis_len(self.a_range, self.step)
    }

    pub fn n_b(&self) -> usize {
        Self::axis_len(self.b_range, self.step)
    }

    pub fn a_value(&self, i: usize) -> f64 {
        self.a_range.0 + i as f64 * self.step
    }

    pub fn b_value(&self, j: usize) -> f64 {
        self.b_range.0 + j as f64 * self.step
    }

    pub fn point(&self, a: f64, b: f64) -> StokesVector {
        match self.kind {
            PlaneKind::S1(s1) => StokesVector::new(s1, a, b),
            PlaneKind::Phi(phi) => StokesVector::from_cylindrical(a, b, phi),
        }
    }
}

impl fmt::Display for PlaneSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            PlaneKind::S1(v) => write!(f, "s1={v}")?,
            PlaneKind::Phi(v) => write!(f, "phi={}", tidy(v.to_degrees()))?,
        }
        write!(
            f,
            ":a={},{}:b={},{}:step={}",
            self.a_range.0, self.a_range.1, self.b_range.0, self.b_range.1, self.step
        )
    }
}

fn tidy(v: f64) -> f64 {
    let r = (v * 1e9).round() / 1e9;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Parses `s1=V` or `phi=DEG` followed by optional `:range=LO,HI` (both
/// axes), `:a=LO,HI`, `:b=LO,HI` and `:step=H` parts.
impl FromStr for PlaneSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidParameter(format!("plane '{text}': {msg}"));
        let mut parts = text.split(':');
        let head = parts.next().unwrap_or_default();
        let (key, value) = head.split_once('=').ok_or_else(|| bad("expected s1=V or phi=DEG"))?;
        let value: f64 = value.trim().parse().map_err(|_| bad("position is not a number"))?;
        let mut spec = match key.trim() {
            "s1" => PlaneSpec::s1_plane(value),
            "phi" => PlaneSpec::phi_plane(value.to_radians()),
            _ => return Err(bad("expected s1=V or phi=DEG")),
        };
        let mut b_given = false;
        for part in parts {
            let (k, v) = part.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            let pair = || -> Result<(f64, f64)> {
                let (lo, hi) = v.split_once(',').ok_or_else(|| bad("expected LO,HI"))?;
                let lo = lo.trim().parse().map_err(|_| bad("range bound is not a number"))?;
                let hi = hi.trim().parse().map_err(|_| bad("range bound is not a number"))?;
                Ok((lo, hi))
            };
            match k.trim() {
                "range" => {
                    let r = pair()?;
                    spec.a_range = r;
                    if !b_given {
                        spec.b_range = match spec.kind {
                            PlaneKind::S1(_) => r,
                            PlaneKind::Phi(_) => (0.0, r.1.abs().max(r.0.abs())),
                        };
                    }
                }
                "a" => spec.a_range = pair()?,
                "b" => {
                    spec.b_range = pair()?;
                    b_given = true;
                }
                "step" => spec.step = v.trim().parse().map_err(|_| bad("step is not a number"))?,
                other => return Err(bad(&format!("unknown key '{other}'"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Sampled `W_ε` on a plane; `values[i * n_b + j]` belongs to `(a_i, b_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PQPDSlice {
    pub plane: PlaneSpec,
    pub values: Vec<f64>,
    pub kernel: DeltaKernel,
}

impl PQPDSlice {
    pub fn from_fn<F>(plane: &PlaneSpec, kernel: DeltaKernel, exec: Execution, f: F) -> Self
    where
        F: Fn(&StokesVector) -> f64 + Sync + Send,
    {
        let (na, nb) = (plane.n_a(), plane.n_b());
        let values = map_indexed(na * nb, exec, |k| {
            let (i, j) = (k / nb, k % nb);
            f(&plane.point(plane.a_value(i), plane.b_value(j)))
        });
        Self {
            plane: *plane,
            values,
            kernel,
        }
    }

    pub fn n_a(&self) -> usize {
        self.plane.n_a()
    }

    pub fn n_b(&self) -> usize {
        self.plane.n_b()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_b() + j]
    }

    /// `(a, b, S, W)` for every cell in storage order.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, StokesVector, f64)> + '_ {
        let nb = self.n_b();
        self.values.iter().enumerate().map(move |(k, &w)| {
            let (a, b) = (self.plane.a_value(k / nb), self.plane.b_value(k % nb));
            (a, b, self.plane.point(a, b), w)
        })
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.cells().find(|c| !c.3.is_finite()) {
            Some((a, b, _, w)) => Err(Error::NonFinite(format!("W = {w} at (a, b) = ({a}, {b})"))),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::ProbabilityGrid;
    use crate::quantum::{characteristic_exact, outcome_probabilities, TruncatedState};
    use crate::stokes::InterpKernelKind;
    use std::f64::consts::FRAC_PI_2;

    fn kernel() -> DeltaKernel {
        DeltaKernel::new(0.02).unwrap()
    }

    fn coarse() -> QuadratureSpec {
        QuadratureSpec::from_degrees(2.0, 2.0)
    }

    fn gaussian_peak(p0: f64) -> f64 {
        p0 * (2.0 * 0.02 * PI.sqrt()).powi(-3)
    }

    #[test]
    fn vacuum_peak() {
        let f = ProbabilityField::analytic(TruncatedState::vacuum());
        let w = pqpd_at(&f, &kernel(), &StokesVector::default(), &QuadratureSpec::default()).unwrap();
        assert!((gaussian_peak(1.0) - 2806.05).abs() < 0.01);
        assert!((w - gaussian_peak(1.0)).abs() < 1e-9 * w, "{w}");
    }

    #[test]
    fn coherent_peak() {
        let f = ProbabilityField::analytic(TruncatedState::default());
        let w = pqpd_at(&f, &kernel(), &StokesVector::default(), &QuadratureSpec::default()).unwrap();
        assert!((w - 2.276e3).abs() < 0.01 * 2.276e3, "{w}");
        assert!((w - gaussian_peak(0.811)).abs() < 1e-6 * w);
    }

    #[test]
    fn inversion_consistency() {
        let state = TruncatedState::default();
        let grid = ProbabilityGrid::analytic(&state, 8.0, true).unwrap();
        let flipped = ProbabilityGrid::from_fn(8.0, true, |p| outcome_probabilities(&state, p).inverted()).unwrap();
        let a = Reconstructor::new(
            &ProbabilityField::interpolated(grid, InterpKernelKind::CubicSpline),
            kernel(),
            coarse(),
        )
        .unwrap();
        let b = Reconstructor::new(
            &ProbabilityField::interpolated(flipped, InterpKernelKind::CubicSpline),
            kernel(),
            coarse(),
        )
        .unwrap();
        for s in [
            StokesVector::new(0.97, 0.0, 0.0),
            StokesVector::new(0.3, 0.7, -0.6),
            StokesVector::new(-1.02, 0.1, 0.0),
        ] {
            let (x, y) = (a.eval(&s), b.eval(&s.scale(-1.0)));
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{x} {y}");
        }
    }

    #[test]
    fn linear_in_the_field() {
        let mk = |p1: f64| {
            Reconstructor::new(&ProbabilityField::analytic(TruncatedState::new(p1).unwrap()), kernel(), coarse())
                .unwrap()
        };
        let (r0, r1, rm) = (mk(0.0), mk(0.189), mk(0.0945));
        for s in [
            StokesVector::default(),
            StokesVector::new(0.97, 0.0, 0.0),
            StokesVector::new(0.1, 0.98, 0.1),
            StokesVector::new(-0.5, 0.5, 0.5),
        ] {
            let mix = 0.5 * (r0.eval(&s) + r1.eval(&s));
            let direct = rm.eval(&s);
            assert!((mix - direct).abs() <= 1e-9 * direct.abs().max(1.0), "{mix} {direct}");
        }
    }

    #[test]
    fn characteristic_closure() {
        let state = TruncatedState::default();
        let analytic = ProbabilityField::analytic(state);
        let interp = ProbabilityField::interpolated(
            ProbabilityGrid::analytic(&state, 8.0, true).unwrap(),
            InterpKernelKind::CubicSpline,
        );
        for (a, b) in [(0.3, 0.2), (2.0, -0.7), (5.0, 1.2)] {
            let p = PoincarePoint::new(a, b).unwrap();
            for lambda in [0.0, 0.5, 3.0, -7.0] {
                let x = characteristic_from_field(&analytic, &p, lambda).unwrap();
                assert!((x - characteristic_exact(&state, &p, lambda)).norm() < 1e-12);
            }
        }
        assert!((characteristic_from_field(&analytic, &PoincarePoint::new(1.0, 0.5).unwrap(), 0.0).unwrap()
            - Complex64::new(1.0, 0.0))
        .norm()
            < 1e-15);
        let node = PoincarePoint::from_degrees(16.0, 24.0).unwrap();
        for lambda in [0.7, 2.5] {
            let x = characteristic_from_field(&interp, &node, lambda).unwrap();
            assert!((x - characteristic_exact(&state, &node, lambda)).norm() < 1e-12);
        }
        let pole = PoincarePoint::new(0.0, FRAC_PI_2).unwrap();
        let x = characteristic_from_field(&interp, &pole, 1.1).unwrap();
        assert!((x - characteristic_exact(&state, &pole, 1.1)).norm() < 1e-12);
    }

    #[test]
    fn sequential_and_parallel_slices_agree_bitwise() {
        let r = Reconstructor::new(&ProbabilityField::analytic(TruncatedState::default()), kernel(), coarse()).unwrap();
        let plane = PlaneSpec::phi_plane(0.0).with_ranges((0.9, 1.05), (0.0, 0.05));
        let a = r.slice_with(&plane, Execution::Sequential);
        let b = r.slice_with(&plane, Execution::Parallel);
        assert_eq!(a, b);
        assert_eq!(a.values.len(), 16 * 6);
        a.check_finite().unwrap();
    }

    #[test]
    fn plane_spec_parsing() {
        let p: PlaneSpec = "s1=1:range=-1.3,1.3:step=0.01".parse().unwrap();
        assert_eq!(p.kind, PlaneKind::S1(1.0));
        assert_eq!((p.a_range, p.b_range), ((-1.3, 1.3), (-1.3, 1.3)));
        assert_eq!((p.n_a(), p.n_b()), (261, 261));

        let q: PlaneSpec = "phi=0".parse().unwrap();
        assert_eq!(q, PlaneSpec::phi_plane(0.0));
        assert_eq!((q.n_a(), q.n_b()), (261, 131));

        let r: PlaneSpec = "phi=90:range=-1,1:step=0.1".parse().unwrap();
        assert_eq!(r.b_range, (0.0, 1.0));
        let s = r.point(0.5, 0.7);
        assert!((s.s2).abs() < 1e-15 && (s.s3 - 0.7).abs() < 1e-15);
        assert_eq!(r.to_string().parse::<PlaneSpec>().unwrap(), r);
        assert_eq!(p.to_string().parse::<PlaneSpec>().unwrap(), p);

        for bad in ["", "s2=1", "s1=x", "s1=1:step=0", "s1=1:range=1", "s1=1:a=2,1", "phi=0:foo=1"] {
            assert!(bad.parse::<PlaneSpec>().is_err(), "{bad}");
        }
    }
}
