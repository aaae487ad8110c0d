//! Polarization quasiprobability distributions: simulation of polarization
//! measurements on weak coherent light, reconstruction of the smoothed
//! distribution over Stokes space, and closed-form references to check it.

pub mod analysis;
pub mod error;
pub mod field;
pub mod ingest;
pub mod par;
pub mod quadrature;
pub mod quantum;
pub mod reconstruct;
pub mod slice_io;
pub mod stokes;
pub mod theory;

pub use analysis::{
    compare_slices, expected_marginal, marginal_1d, negativity_report, symmetry_residual, NegativityReport,
    SliceMetrics,
};
pub use error::{Error, Result};
pub use field::{analytic_field, field_at, ProbabilityField};
pub use ingest::{
    assemble_grid, estimate_probabilities, hemisphere_grid, parse_measurements, write_measurements, CsvFormat,
    MeasurementRecord, MeasurementSet, ProbabilityGrid, Setting,
};
pub use par::Execution;
pub use quadrature::{LatitudeRule, QuadratureSpec};
pub use quantum::{
    characteristic_exact, outcome_probabilities, sample_counts, simulate_dataset, OutcomeCounts, OutcomeDistribution,
    TruncatedState,
};
pub use reconstruct::{characteristic_from_field, pqpd_at, pqpd_slice, PQPDSlice, PlaneKind, PlaneSpec, Reconstructor};
pub use slice_io::{read_slice_csv, write_slice_csv};
pub use stokes::{
    delta_gauss, delta_rect, interp_kernel, poincare_to_waveplate, stokes_projection, waveplate_to_poincare,
    DeltaKernel, InterpKernelKind, PoincarePoint, StokesVector, WavePlateSetting,
};
pub use theory::{
    i_xi_closed, i_xi_numeric, theory_pqpd_convolved, theory_pqpd_radial, w1_coefficients, ConvolvedTheory,
    SupplementaryProbe, TheoryParams,
};
