//! Continuous outcome-probability field over the upper hemisphere.
//!
//! A grid-backed field is the convolution sum of the node distributions with
//! a separable kernel `u((α − α_k)/Δα) · u((β − β_l)/Δβ)`. α wraps
//! periodically. Between the top lattice row and the pole the β argument is
//! normalized by the actual gap so the pole behaves as one more row.

use crate::error::{Error, Result};
use crate::ingest::ProbabilityGrid;
use crate::quantum::{outcome_probabilities, OutcomeDistribution, TruncatedState};
use crate::stokes::{interp_kernel, InterpKernelKind, PoincarePoint};

#[derive(Debug, Clone, PartialEq)]
pub enum ProbabilityField {
    Interpolated {
        grid: ProbabilityGrid,
        kernel: InterpKernelKind,
    },
    Analytic(TruncatedState),
}

impl ProbabilityField {
    pub fn interpolated(grid: ProbabilityGrid, kernel: InterpKernelKind) -> Self {
        ProbabilityField::Interpolated { grid, kernel }
    }

    /// Interpolation-free field returning the exact outcome law of `state`.
    pub fn analytic(state: TruncatedState) -> Self {
        ProbabilityField::Analytic(state)
    }

    /// Outcome distribution at `p`; `p` must lie on the upper hemisphere.
    pub fn at(&self, p: &PoincarePoint) -> Result<OutcomeDistribution> {
        if p.beta() < -1e-12 {
            return Err(Error::OutsideDomain { beta: p.beta() });
        }
        Ok(match self {
            ProbabilityField::Analytic(state) => outcome_probabilities(state, p),
            ProbabilityField::Interpolated { grid, kernel } => interpolate(grid, *kernel, p),
        })
    }
}

pub fn field_at(field: &ProbabilityField, p: &PoincarePoint) -> Result<OutcomeDistribution> {
    field.at(p)
}

pub fn analytic_field(state: TruncatedState) -> ProbabilityField {
    ProbabilityField::analytic(state)
}

fn interpolate(grid: &ProbabilityGrid, kind: InterpKernelKind, p: &PoincarePoint) -> OutcomeDistribution {
    let layout = grid.layout();
    let step = layout.step;

    let xa = p.alpha() / step;
    let ia = xa.floor();
    let ta = xa - ia;
    let ia = ia as usize;
    let alpha_w = [(ia, interp_kernel(kind, ta)), (ia + 1, interp_kernel(kind, ta - 1.0))];

    // rows: (row index or None for the pole, weight)
    let top = layout.n_beta - 1;
    let beta = p.beta().max(0.0);
    let jb = ((beta / step).floor() as usize).min(top);
    let beta_w: [(Option<usize>, f64); 2] = if jb < top {
        let tb = beta / step - jb as f64;
        [(Some(jb), interp_kernel(kind, tb)), (Some(jb + 1), interp_kernel(kind, tb - 1.0))]
    } else if grid.pole().is_some() {
        let tb = (beta - top as f64 * step) / layout.top_gap();
        [(Some(top), interp_kernel(kind, tb)), (None, interp_kernel(kind, tb - 1.0))]
    } else {
        // no pole record: hold the top row up to the pole
        [(Some(top), 1.0), (None, 0.0)]
    };

    let mut acc = [0.0; 3];
    for &(row, wb) in &beta_w {
        if wb == 0.0 {
            continue;
        }
        match row {
            None => {
                let v = grid.pole().expect("pole weight only with pole").as_array();
                for k in 0..3 {
                    acc[k] += wb * v[k];
                }
            }
            Some(j) => {
                for &(i, wa) in &alpha_w {
                    if wa == 0.0 {
                        continue;
                    }
                    let v = grid.value(i, j).as_array();
                    for k in 0..3 {
                        acc[k] += wa * wb * v[k];
                    }
                }
            }
        }
    }
    OutcomeDistribution {
        p_minus: acc[0],
        p_zero: acc[1],
        p_plus: acc[2],
    }
}
