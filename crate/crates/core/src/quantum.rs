//! Measurement model of horizontally polarized weak coherent light restricted
//! to no-photon and single-photon events.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::ingest::{MeasurementRecord, MeasurementSet, Setting};
use crate::par::{map_indexed, Execution};
use crate::stokes::PoincarePoint;

const NORM_TOL: f64 = 1e-9;

/// `ρ = (p₀|0⟩⟨0| + p₁|1⟩⟨1|)_H ⊗ |0⟩⟨0|_V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedState {
    p0: f64,
    p1: f64,
}

impl TruncatedState {
    pub const DEFAULT_P1: f64 = 0.189;

    pub fn new(p1: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p1) {
            return Err(Error::OutOfRange {
                what: "p1",
                value: p1,
            });
        }
        Ok(Self { p0: 1.0 - p1, p1 })
    }

    pub fn from_probabilities(p0: f64, p1: f64) -> Result<Self> {
        if p0 < 0.0 || p1 < 0.0 || (p0 + p1 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "p0 = {p0}, p1 = {p1} is not a probability pair"
            )));
        }
        Ok(Self { p0, p1 })
    }

    pub fn vacuum() -> Self {
        Self { p0: 1.0, p1: 0.0 }
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }
}

impl Default for TruncatedState {
    fn default() -> Self {
        Self::new(Self::DEFAULT_P1).expect("default p1 is valid")
    }
}

/// Probabilities of the outcomes `n = n₁ − n₂ ∈ {−1, 0, +1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeDistribution {
    pub p_minus: f64,
    pub p_zero: f64,
    pub p_plus: f64,
}

impl OutcomeDistribution {
    pub fn new(p_minus: f64, p_zero: f64, p_plus: f64) -> Result<Self> {
        let d = Self {
            p_minus,
            p_zero,
            p_plus,
        };
        let ok = d
            .as_array()
            .iter()
            .all(|p| p.is_finite() && (-NORM_TOL..=1.0 + NORM_TOL).contains(p))
            && (d.total() - 1.0).abs() <= NORM_TOL;
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "({p_minus}, {p_zero}, {p_plus}) is not a probability distribution"
            )));
        }
        Ok(d)
    }

    /// Ordered as `[W(−1), W(0), W(+1)]`.
    pub fn as_array(&self) -> [f64; 3] {
        [self.p_minus, self.p_zero, self.p_plus]
    }

    pub fn from_array(a: [f64; 3]) -> Result<Self> {
        Self::new(a[0], a[1], a[2])
    }

    pub fn total(&self) -> f64 {
        self.p_minus + self.p_zero + self.p_plus
    }

    /// `W(n)` for `n ∈ {−1, 0, 1}`, zero otherwise.
    pub fn get(&self, n: i32) -> f64 {
        match n {
            -1 => self.p_minus,
            0 => self.p_zero,
            1 => self.p_plus,
            _ => 0.0,
        }
    }

    /// Outcome distribution at the antipodal direction.
    pub fn inverted(&self) -> Self {
        Self {
            p_minus: self.p_plus,
            p_zero: self.p_zero,
            p_plus: self.p_minus,
        }
    }

    /// `Σₙ W(n) e^{iλn}`.
    pub fn characteristic(&self, lambda: f64) -> Complex64 {
        let (s, c) = lambda.sin_cos();
        Complex64::new(self.p_zero + (self.p_plus + self.p_minus) * c, (self.p_plus - self.p_minus) * s)
    }

    pub fn total_variation(&self, other: &Self) -> f64 {
        0.5 * self
            .as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}

/// Raw detector tallies for one setting. `discarded` holds multi-photon or
/// double-click pulses that are excluded from probability estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OutcomeCounts {
    pub c_minus: u64,
    pub c_zero: u64,
    pub c_plus: u64,
    pub discarded: u64,
}

impl OutcomeCounts {
    pub fn new(c_minus: u64, c_zero: u64, c_plus: u64, discarded: u64) -> Self {
        Self {
            c_minus,
            c_zero,
            c_plus,
            discarded,
        }
    }

    pub fn accepted(&self) -> u64 {
        self.c_minus + self.c_zero + self.c_plus
    }

    pub fn total_pulses(&self) -> u64 {
        self.accepted() + self.discarded
    }

    pub fn merge(&mut self, other: &OutcomeCounts) {
        self.c_minus += other.c_minus;
        self.c_zero += other.c_zero;
        self.c_plus += other.c_plus;
        self.discarded += other.discarded;
    }
}

/// Exact outcome law at direction `p`:
/// `W(±1) = p₁(1 ± cosα cosβ)/2`, `W(0) = p₀`.
pub fn outcome_probabilities(state: &TruncatedState, p: &PoincarePoint) -> OutcomeDistribution {
    let c = p.alpha().cos() * p.beta().cos();
    OutcomeDistribution {
        p_minus: 0.5 * state.p1 * (1.0 - c),
        p_zero: state.p0,
        p_plus: 0.5 * state.p1 * (1.0 + c),
    }
}

/// `χ(λ) = p₀ + p₁(cos λ + i sin λ cosα cosβ)`.
pub fn characteristic_exact(state: &TruncatedState, p: &PoincarePoint, lambda: f64) -> Complex64 {
    let c = p.alpha().cos() * p.beta().cos();
    let (s, co) = lambda.sin_cos();
    Complex64::new(state.p0 + state.p1 * co, state.p1 * s * c)
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the RNG stream for grid point `index`, independent of visit order.
pub fn point_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index.wrapping_add(0x5EED)))
}

/// Multinomial draw of `n_pulses` outcomes.
pub fn sample_counts(dist: &OutcomeDistribution, n_pulses: u64, seed: u64) -> Result<OutcomeCounts> {
    if n_pulses == 0 {
        return Err(Error::InvalidParameter("n_pulses must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p_minus = dist.p_minus.clamp(0.0, 1.0);
    let c_minus = draw_binomial(n_pulses, p_minus, &mut rng)?;
    let rest = n_pulses - c_minus;
    let remaining_mass = 1.0 - p_minus;
    let p_plus_cond = if remaining_mass > 0.0 {
        (dist.p_plus / remaining_mass).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let c_plus = draw_binomial(rest, p_plus_cond, &mut rng)?;
    Ok(OutcomeCounts::new(c_minus, rest - c_plus, c_plus, 0))
}

fn draw_binomial(n: u64, p: f64, rng: &mut ChaCha8Rng) -> Result<u64> {
    if n == 0 || p == 0.0 {
        return Ok(0);
    }
    if p == 1.0 {
        return Ok(n);
    }
    let b = Binomial::new(n, p).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(b.sample(rng))
}

/// Simulates a full tomography run: one multinomial record per grid point,
/// each from its own seed stream.
pub fn simulate_dataset(
    state: &TruncatedState,
    grid: &[PoincarePoint],
    n_pulses: u64,
    seed: u64,
) -> Result<MeasurementSet> {
    simulate_dataset_with(state, grid, n_pulses, seed, Execution::default())
}

pub fn simulate_dataset_with(
    state: &TruncatedState,
    grid: &[PoincarePoint],
    n_pulses: u64,
    seed: u64,
    exec: Execution,
) -> Result<MeasurementSet> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("simulation grid is empty".into()));
    }
    if n_pulses == 0 {
        return Err(Error::InvalidParameter("n_pulses must be at least 1".into()));
    }
    let counts = map_indexed(grid.len(), exec, |i| {
        let dist = outcome_probabilities(state, &grid[i]);
        sample_counts(&dist, n_pulses, point_seed(seed, i as u64))
    });
    let mut set = MeasurementSet::new("simulated", Some(seed));
    for (p, c) in grid.iter().zip(counts) {
        set.push(MeasurementRecord {
            setting: Setting::Poincare(*p),
            counts: c?,
        })?;
    }
    Ok(set)
}
