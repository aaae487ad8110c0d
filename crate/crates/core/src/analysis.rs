//! Slice comparison, negativity, symmetry and marginal checks.

use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::quantum::{outcome_probabilities, TruncatedState};
use crate::reconstruct::{PQPDSlice, Reconstructor};
use crate::stokes::{DeltaKernel, PoincarePoint, StokesVector};

/// Absolute floor used in place of vanishing denominators.
pub const NOISE_FLOOR: f64 = 1e-6;

/// Default radius of the masked central-peak ball.
pub const DEFAULT_EXCLUDE_RADIUS: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceMetrics {
    pub rel_l2: f64,
    pub rel_linf: f64,
    pub peak_value: f64,
    pub peak_location: (f64, f64),
    pub min_value: f64,
    pub min_location: (f64, f64),
    pub negative_mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativityReport {
    pub min_value: f64,
    pub min_location: (f64, f64),
    pub negative_mass: f64,
}

/// Relative distance of `a` from the reference `b`, skipping cells with
/// `|S| < exclude_radius`. Peak and minimum are read from `a`.
pub fn compare_slices(a: &PQPDSlice, b: &PQPDSlice, exclude_radius: f64) -> Result<SliceMetrics> {
    if a.plane != b.plane || a.values.len() != b.values.len() {
        return Err(Error::ShapeMismatch(format!("'{}' vs '{}'", a.plane, b.plane)));
    }
    let (mut diff2, mut ref2, mut diff_max, mut ref_max) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for ((_, _, s, wa), wb) in a.cells().zip(&b.values) {
        if s.norm() < exclude_radius {
            continue;
        }
        let d = wa - wb;
        diff2 += d * d;
        ref2 += wb * wb;
        diff_max = diff_max.max(d.abs());
        ref_max = ref_max.max(wb.abs());
    }
    let (mut peak_value, mut peak_location) = (f64::NEG_INFINITY, (f64::NAN, f64::NAN));
    for (x, y, _, w) in a.cells() {
        if w > peak_value {
            peak_value = w;
            peak_location = (x, y);
        }
    }
    let neg = negativity_report(a);
    Ok(SliceMetrics {
        rel_l2: diff2.sqrt() / ref2.sqrt().max(NOISE_FLOOR),
        rel_linf: diff_max / ref_max.max(NOISE_FLOOR),
        peak_value,
        peak_location,
        min_value: neg.min_value,
        min_location: neg.min_location,
        negative_mass: neg.negative_mass,
    })
}

pub fn negativity_report(s: &PQPDSlice) -> NegativityReport {
    let area = s.plane.step * s.plane.step;
    let (mut min_value, mut min_location, mut negative_mass) = (f64::INFINITY, (f64::NAN, f64::NAN), 0.0);
    for (a, b, _, w) in s.cells() {
        if w < min_value {
            min_value = w;
            min_location = (a, b);
        }
        negative_mass += w.min(0.0) * area;
    }
    NegativityReport {
        min_value,
        min_location,
        negative_mass,
    }
}

/// `max_φ |W(s1, s23, φ) − W(s1, s23, 0)| / max(|W(s1, s23, 0)|, floor)`.
pub fn symmetry_residual_with<F>(eval: F, s1: f64, s23: f64, phis: &[f64]) -> f64
where
    F: Fn(&StokesVector) -> f64,
{
    let w0 = eval(&StokesVector::from_cylindrical(s1, s23, 0.0));
    let denom = w0.abs().max(NOISE_FLOOR);
    phis.iter()
        .map(|&phi| (eval(&StokesVector::from_cylindrical(s1, s23, phi)) - w0).abs() / denom)
        .fold(0.0, f64::max)
}

pub fn symmetry_residual(rec: &Reconstructor, s1: f64, s23: f64, phis: &[f64]) -> f64 {
    symmetry_residual_with(|s| rec.eval(s), s1, s23, phis)
}

/// Integral of `eval` over the disk of `radius` in the plane
/// `S · n̂(direction) = x`, by the midpoint rule on a square lattice.
pub fn marginal_1d<F>(eval: F, direction: &PoincarePoint, x: f64, radius: f64, step: f64) -> f64
where
    F: Fn(&StokesVector) -> f64 + Sync + Send,
{
    marginal_1d_with(eval, direction, x, radius, step, Execution::default())
}

pub fn marginal_1d_with<F>(eval: F, direction: &PoincarePoint, x: f64, radius: f64, step: f64, exec: Execution) -> f64
where
    F: Fn(&StokesVector) -> f64 + Sync + Send,
{
    let d = direction.direction();
    let (e_a, e_b) = transverse_basis(&d);
    let centre = d.scale(x);
    let n = (2.0 * radius / step).ceil() as usize;
    let start = -0.5 * n as f64 * step;
    let r2 = radius * radius;
    let rows = map_indexed(n, exec, |i| {
        let u = start + (i as f64 + 0.5) * step;
        let mut row = 0.0;
        for j in 0..n {
            let v = start + (j as f64 + 0.5) * step;
            if u * u + v * v > r2 {
                continue;
            }
            let p = StokesVector::new(
                centre.s1 + u * e_a.s1 + v * e_b.s1,
                centre.s2 + u * e_a.s2 + v * e_b.s2,
                centre.s3 + u * e_a.s3 + v * e_b.s3,
            );
            row += eval(&p);
        }
        row
    });
    rows.iter().sum::<f64>() * step * step
}

fn transverse_basis(d: &StokesVector) -> (StokesVector, StokesVector) {
    let seed = if d.s1.abs() < 0.9 {
        StokesVector::new(1.0, 0.0, 0.0)
    } else {
        StokesVector::new(0.0, 1.0, 0.0)
    };
    let a = seed.sub(&d.scale(seed.dot(d)));
    let a = a.scale(1.0 / a.norm());
    let b = StokesVector::new(
        d.s2 * a.s3 - d.s3 * a.s2,
        d.s3 * a.s1 - d.s1 * a.s3,
        d.s1 * a.s2 - d.s2 * a.s1,
    );
    (a, b)
}

/// Smoothed marginal `Σₙ W(n) δ_ε(x − n)` along `direction`.
pub fn expected_marginal(state: &TruncatedState, kernel: &DeltaKernel, direction: &PoincarePoint, x: f64) -> f64 {
    let w = outcome_probabilities(state, direction).as_array();
    (-1..=1).zip(w).map(|(n, p)| p * kernel.delta(x - n as f64)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ProbabilityField;
    use crate::quadrature::QuadratureSpec;
    use crate::reconstruct::PlaneSpec;
    use crate::theory::{ConvolvedTheory, TheoryParams};
    use std::f64::consts::PI;

    fn slice_from(values: Vec<f64>) -> PQPDSlice {
        let plane = PlaneSpec::s1_plane(0.0).with_ranges((0.0, 0.2), (0.0, 0.1)).with_step(0.1);
        assert_eq!(plane.n_a() * plane.n_b(), values.len());
        PQPDSlice {
            plane,
            values,
            kernel: DeltaKernel::new(0.02).unwrap(),
        }
    }

    #[test]
    fn identical_slices() {
        let a = slice_from(vec![1.0, -2.0, 3.0, 0.5, 0.0, -0.5]);
        let m = compare_slices(&a, &a, 0.0).unwrap();
        assert_eq!((m.rel_l2, m.rel_linf), (0.0, 0.0));
        assert_eq!(m.peak_value, 3.0);
        assert_eq!(m.min_value, -2.0);
        assert!((m.peak_location.0 - 0.1).abs() < 1e-12 && (m.peak_location.1 - 0.0).abs() < 1e-12);
        assert!((m.negative_mass + 2.5 * 0.01).abs() < 1e-12);
    }

    #[test]
    fn scaled_slice() {
        let b = slice_from(vec![1.0, -2.0, 3.0, 0.5, 0.25, -0.5]);
        let a = slice_from(b.values.iter().map(|v| 1.01 * v).collect());
        let m = compare_slices(&a, &b, 0.0).unwrap();
        assert!((m.rel_l2 - 0.01).abs() < 1e-12 && (m.rel_linf - 0.01).abs() < 1e-12);
    }

    #[test]
    fn masked_cells_are_ignored() {
        let b = slice_from(vec![100.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let a = slice_from(vec![0.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        assert_eq!(compare_slices(&a, &b, 0.05).unwrap().rel_l2, 0.0);
        assert!(compare_slices(&a, &b, 0.0).unwrap().rel_l2 > 0.9);
    }

    #[test]
    fn shape_mismatch() {
        let a = slice_from(vec![0.0; 6]);
        let mut b = a.clone();
        b.plane = b.plane.with_step(0.05);
        assert!(matches!(compare_slices(&a, &b, 0.0), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn symmetry_residual_examples() {
        let f = ProbabilityField::analytic(TruncatedState::default());
        let rec = Reconstructor::new(&f, DeltaKernel::new(0.02).unwrap(), QuadratureSpec::default()).unwrap();
        assert_eq!(symmetry_residual(&rec, 0.5, 0.7, &[0.0]), 0.0);
        let r = symmetry_residual(&rec, 0.5, 0.7, &[PI / 4.0, PI / 2.0, PI]);
        assert!(r < 1e-3, "{r}");
        let r = symmetry_residual(&rec, 0.97, 0.1, &[PI / 4.0, PI / 2.0, PI]);
        assert!(r < 1e-3, "{r}");
    }

    #[test]
    fn vacuum_has_no_negativity() {
        let f = ProbabilityField::analytic(TruncatedState::vacuum());
        let k = DeltaKernel::new(0.02).unwrap();
        let rec = Reconstructor::new(&f, k, QuadratureSpec::from_degrees(2.0, 2.0)).unwrap();
        let plane = PlaneSpec::phi_plane(0.0).with_ranges((-0.2, 0.2), (0.0, 0.2)).with_step(0.02);
        let rep = negativity_report(&rec.slice(&plane));
        assert!(rep.min_value > -1e-6 && rep.negative_mass > -1e-9, "{rep:?}");
    }

    #[test]
    fn marginal_of_a_gaussian() {
        // ∫∫ G₃ over a transverse plane is δ_ε(x)
        let k = DeltaKernel::new(0.05).unwrap();
        let g = |s: &StokesVector| k.delta(s.s1) * k.delta(s.s2) * k.delta(s.s3);
        for dir in [(0.0, 0.0), (0.7, 0.3), (0.0, PI / 2.0)] {
            let p = PoincarePoint::new(dir.0, dir.1).unwrap();
            for x in [0.0, 0.03, 0.1] {
                let m = marginal_1d(g, &p, x, 0.6, 0.005);
                assert!((m - k.delta(x)).abs() < 1e-6 * k.peak(), "{dir:?} {x}: {m}");
            }
        }
    }

    #[test]
    fn marginal_examples() {
        let state = TruncatedState::default();
        let k = DeltaKernel::new(0.02).unwrap();
        let theory = ConvolvedTheory::new(TheoryParams::new(state, k));
        let p = PoincarePoint::new(0.0, 0.0).unwrap();
        let radius = 1.0 + k.cutoff();
        let at0 = marginal_1d(|s| theory.eval(s), &p, 0.0, radius, 0.005);
        let at1 = marginal_1d(|s| theory.eval(s), &p, 1.0, radius, 0.005);
        let atm1 = marginal_1d(|s| theory.eval(s), &p, -1.0, radius, 0.005);
        assert!((at0 - 11.44).abs() < 0.02 * 11.44, "{at0}");
        assert!((at1 - 2.666).abs() < 0.02 * 2.666, "{at1}");
        assert!(atm1.abs() < 1e-3, "{atm1}");
        assert!((expected_marginal(&state, &k, &p, 0.0) - 0.811 * 14.1047395886939).abs() < 1e-9);
        assert!((expected_marginal(&state, &k, &p, 1.0) - 0.189 * 14.1047395886939).abs() < 1e-9);
    }
}
