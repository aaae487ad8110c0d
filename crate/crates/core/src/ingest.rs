//! Measurement records, the measurement CSV format, probability estimation
//! and assembly of the hemisphere probability grid.
//!
//! CSV layout (UTF-8, one header line, angles in decimal degrees):
//!
//! ```text
//! half_wave_deg,quarter_wave_deg,count_minus,count_zero,count_plus[,count_discarded]
//! alpha_deg,beta_deg,count_minus,count_zero,count_plus[,count_discarded]
//! ```

use std::f64::consts::{FRAC_PI_2, TAU};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::quantum::{outcome_probabilities, OutcomeCounts, OutcomeDistribution, TruncatedState};
use crate::stokes::{poincare_to_waveplate, waveplate_to_poincare, PoincarePoint, WavePlateSetting};

const MERGE_TOL: f64 = 1e-9;
const LATTICE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvFormat {
    Waveplate,
    Poincare,
}

impl CsvFormat {
    fn angle_columns(&self) -> [&'static str; 2] {
        match self {
            CsvFormat::Waveplate => ["half_wave_deg", "quarter_wave_deg"],
            CsvFormat::Poincare => ["alpha_deg", "beta_deg"],
        }
    }
}

impl std::str::FromStr for CsvFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "waveplate" => Ok(CsvFormat::Waveplate),
            "poincare" => Ok(CsvFormat::Poincare),
            other => Err(Error::InvalidParameter(format!("unknown csv format '{other}'"))),
        }
    }
}

const COUNT_COLUMNS: [&str; 4] = ["count_minus", "count_zero", "count_plus", "count_discarded"];

/// How a record's direction was specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Setting {
    Waveplate(WavePlateSetting),
    Poincare(PoincarePoint),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub setting: Setting,
    pub counts: OutcomeCounts,
}

impl MeasurementRecord {
    pub fn point(&self) -> Result<PoincarePoint> {
        match self.setting {
            Setting::Waveplate(w) => waveplate_to_poincare(w),
            Setting::Poincare(p) => Ok(p),
        }
    }
}

/// A set of records with at most one record per direction.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    records: Vec<MeasurementRecord>,
    points: Vec<PoincarePoint>,
    pub source: String,
    pub seed: Option<u64>,
}

impl MeasurementSet {
    pub fn new(source: impl Into<String>, seed: Option<u64>) -> Self {
        Self {
            records: Vec::new(),
            points: Vec::new(),
            source: source.into(),
            seed,
        }
    }

    /// Adds a record, summing its counts into an existing record at the same
    /// direction if there is one. Fails if the setting maps off the sphere.
    pub fn push(&mut self, record: MeasurementRecord) -> Result<()> {
        let p = record.point()?;
        match self.points.iter().position(|q| q.same_point(&p, MERGE_TOL)) {
            Some(i) => self.records[i].counts.merge(&record.counts),
            None => {
                self.points.push(p);
                self.records.push(record);
            }
        }
        Ok(())
    }

    pub fn records(&self) -> &[MeasurementRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records paired with their directions.
    pub fn iter_points(&self) -> impl Iterator<Item = (&MeasurementRecord, PoincarePoint)> {
        self.records.iter().zip(self.points.iter().copied())
    }
}

pub fn parse_measurements<R: BufRead>(reader: R, format: CsvFormat) -> Result<MeasurementSet> {
    let mut set = MeasurementSet::new("file", None);
    let mut lines = reader.lines().enumerate();
    let (header_cols, with_discarded) = loop {
        let Some((i, line)) = lines.next() else {
            return Err(Error::Parse {
                line: 1,
                column: 1,
                message: "missing header line".into(),
            });
        };
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        break parse_header(&line, i + 1, format)?;
    };

    for (i, line) in lines {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != header_cols {
            return Err(Error::Parse {
                line: lineno,
                column: fields.len().min(header_cols) + 1,
                message: format!("expected {header_cols} fields, found {}", fields.len()),
            });
        }
        let a = parse_angle(fields[0], lineno, 1)?;
        let b = parse_angle(fields[1], lineno, 2)?;
        let mut counts = [0u64; 4];
        for (k, c) in counts.iter_mut().enumerate().take(if with_discarded { 4 } else { 3 }) {
            *c = parse_count(fields[2 + k], lineno, 3 + k)?;
        }
        let setting = match format {
            CsvFormat::Waveplate => Setting::Waveplate(WavePlateSetting::from_degrees(a, b)),
            CsvFormat::Poincare => Setting::Poincare(PoincarePoint::from_degrees(a, b)?),
        };
        set.push(MeasurementRecord {
            setting,
            counts: OutcomeCounts::new(counts[0], counts[1], counts[2], counts[3]),
        })?;
    }
    Ok(set)
}

fn parse_header(line: &str, lineno: usize, format: CsvFormat) -> Result<(usize, bool)> {
    let cols: Vec<&str> = line.split(',').map(str::trim).collect();
    let angle = format.angle_columns();
    let expected: Vec<&str> = angle.iter().chain(COUNT_COLUMNS.iter()).copied().collect();
    if cols.len() != 5 && cols.len() != 6 {
        return Err(Error::Parse {
            line: lineno,
            column: 1,
            message: format!("header must have 5 or 6 columns, found {}", cols.len()),
        });
    }
    for (k, (got, want)) in cols.iter().zip(&expected).enumerate() {
        if got != want {
            return Err(Error::Parse {
                line: lineno,
                column: k + 1,
                message: format!("expected column '{want}', found '{got}'"),
            });
        }
    }
    Ok((cols.len(), cols.len() == 6))
}

fn parse_angle(field: &str, line: usize, column: usize) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            line,
            column,
            message: format!("'{field}' is not a finite angle"),
        }),
    }
}

fn parse_count(field: &str, line: usize, column: usize) -> Result<u64> {
    if let Ok(v) = field.parse::<i64>() {
        if v < 0 {
            return Err(Error::NegativeCount { line, column });
        }
    }
    field.parse::<u64>().map_err(|_| Error::Parse {
        line,
        column,
        message: format!("'{field}' is not a non-negative integer count"),
    })
}

/// Degrees rounded to 12 decimals, without a trailing `.0` or `-0`.
pub fn format_angle_deg(deg: f64) -> String {
    let r = (deg * 1e12).round() / 1e12;
    let r = if r == 0.0 { 0.0 } else { r };
    format!("{r}")
}

pub fn write_measurements<W: Write>(set: &MeasurementSet, format: CsvFormat, mut out: W) -> Result<()> {
    let with_discarded = set.records.iter().any(|r| r.counts.discarded > 0);
    let [a, b] = format.angle_columns();
    let ncounts = if with_discarded { 4 } else { 3 };
    writeln!(out, "{a},{b},{}", COUNT_COLUMNS[..ncounts].join(","))?;
    for (rec, p) in set.iter_points() {
        let (x, y) = match (format, rec.setting) {
            (CsvFormat::Waveplate, Setting::Waveplate(w)) => (w.half_wave, w.quarter_wave),
            (CsvFormat::Waveplate, Setting::Poincare(p)) => {
                let w = poincare_to_waveplate(p);
                (w.half_wave, w.quarter_wave)
            }
            (CsvFormat::Poincare, _) => (p.alpha(), p.beta()),
        };
        let c = rec.counts;
        write!(
            out,
            "{},{},{},{},{}",
            format_angle_deg(x.to_degrees()),
            format_angle_deg(y.to_degrees()),
            c.c_minus,
            c.c_zero,
            c.c_plus
        )?;
        if with_discarded {
            write!(out, ",{}", c.discarded)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Maximum-likelihood frequencies over accepted pulses; discarded pulses do
/// not enter the denominator.
pub fn estimate_probabilities(counts: &OutcomeCounts) -> Result<OutcomeDistribution> {
    let n = counts.accepted();
    if n == 0 {
        return Err(Error::EmptyRecord);
    }
    let n = n as f64;
    Ok(OutcomeDistribution {
        p_minus: counts.c_minus as f64 / n,
        p_zero: counts.c_zero as f64 / n,
        p_plus: counts.c_plus as f64 / n,
    })
}

/// Lattice of a hemisphere grid with step `Δ`: α ∈ {0, Δ, …, 2π − Δ}, rows
/// β ∈ {0, Δ, …} strictly below the pole, plus the pole itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridLayout {
    pub step: f64,
    pub n_alpha: usize,
    pub n_beta: usize,
}

impl GridLayout {
    pub fn from_step_deg(step_deg: f64) -> Result<Self> {
        if !(step_deg > 0.0 && step_deg <= 90.0) {
            return Err(Error::NonUniformGrid(format!("grid step {step_deg} deg is not in (0, 90]")));
        }
        let na = 360.0 / step_deg;
        if (na - na.round()).abs() > 1e-9 {
            return Err(Error::NonUniformGrid(format!("grid step {step_deg} deg does not divide 360")));
        }
        let n_beta = (90.0 / step_deg - 1e-9).ceil() as usize;
        Ok(Self {
            step: step_deg.to_radians(),
            n_alpha: na.round() as usize,
            n_beta,
        })
    }

    /// Latitude gap between the top row and the pole.
    pub fn top_gap(&self) -> f64 {
        FRAC_PI_2 - (self.n_beta - 1) as f64 * self.step
    }

    pub fn node(&self, i: usize, j: usize) -> PoincarePoint {
        PoincarePoint::new(i as f64 * self.step, j as f64 * self.step).expect("lattice node on sphere")
    }

    pub fn pole() -> PoincarePoint {
        PoincarePoint::new(0.0, FRAC_PI_2).expect("pole on sphere")
    }
}

/// Directions of a full hemisphere scan, row by row from the equator, with
/// the pole last when requested.
pub fn hemisphere_grid(step_deg: f64, include_pole: bool) -> Result<Vec<PoincarePoint>> {
    let l = GridLayout::from_step_deg(step_deg)?;
    let mut pts = Vec::with_capacity(l.n_alpha * l.n_beta + 1);
    for j in 0..l.n_beta {
        for i in 0..l.n_alpha {
            pts.push(l.node(i, j));
        }
    }
    if include_pole {
        pts.push(GridLayout::pole());
    }
    Ok(pts)
}

/// Outcome distributions on a hemisphere lattice. The pole, when present,
/// is stored once.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityGrid {
    layout: GridLayout,
    values: Vec<OutcomeDistribution>,
    pole: Option<OutcomeDistribution>,
}

impl ProbabilityGrid {
    pub fn from_fn(
        step_deg: f64,
        include_pole: bool,
        f: impl Fn(&PoincarePoint) -> OutcomeDistribution,
    ) -> Result<Self> {
        let layout = GridLayout::from_step_deg(step_deg)?;
        let mut values = Vec::with_capacity(layout.n_alpha * layout.n_beta);
        for i in 0..layout.n_alpha {
            for j in 0..layout.n_beta {
                values.push(f(&layout.node(i, j)));
            }
        }
        let pole = include_pole.then(|| f(&GridLayout::pole()));
        Ok(Self { layout, values, pole })
    }

    /// Grid holding the exact outcome law of `state`: the infinite-statistics
    /// limit of a simulated run.
    pub fn analytic(state: &TruncatedState, step_deg: f64, include_pole: bool) -> Result<Self> {
        Self::from_fn(step_deg, include_pole, |p| outcome_probabilities(state, p))
    }

    pub fn layout(&self) -> &GridLayout {
        &self.layout
    }

    pub fn alpha_step(&self) -> f64 {
        self.layout.step
    }

    pub fn beta_step(&self) -> f64 {
        self.layout.step
    }

    pub fn n_alpha(&self) -> usize {
        self.layout.n_alpha
    }

    pub fn n_beta(&self) -> usize {
        self.layout.n_beta
    }

    pub fn alpha_nodes(&self) -> Vec<f64> {
        (0..self.layout.n_alpha).map(|i| i as f64 * self.layout.step).collect()
    }

    pub fn beta_nodes(&self) -> Vec<f64> {
        (0..self.layout.n_beta).map(|j| j as f64 * self.layout.step).collect()
    }

    /// Value at α-node `i` (taken modulo the column count) and row `j`.
    pub fn value(&self, i: usize, j: usize) -> &OutcomeDistribution {
        &self.values[(i % self.layout.n_alpha) * self.layout.n_beta + j]
    }

    pub fn pole(&self) -> Option<&OutcomeDistribution> {
        self.pole.as_ref()
    }
}

/// Validates that `set` covers the lattice of step `expected_step_deg` and
/// converts counts to probabilities. Lower-hemisphere records are folded
/// onto their antipodes with `±1` outcomes swapped; pole records are merged.
pub fn assemble_grid(set: &MeasurementSet, expected_step_deg: f64) -> Result<ProbabilityGrid> {
    let layout = GridLayout::from_step_deg(expected_step_deg)?;
    let mut counts: Vec<Option<OutcomeCounts>> = vec![None; layout.n_alpha * layout.n_beta];
    let mut pole: Option<OutcomeCounts> = None;

    for (rec, p) in set.iter_points() {
        let (p, c) = if p.beta() < -1e-12 {
            let c = rec.counts;
            (p.antipode(), OutcomeCounts::new(c.c_plus, c.c_zero, c.c_minus, c.discarded))
        } else {
            (p, rec.counts)
        };
        if p.is_pole() {
            pole.get_or_insert_with(OutcomeCounts::default).merge(&c);
            continue;
        }
        let i = lattice_index(p.alpha(), layout.step, "alpha")? % layout.n_alpha;
        let j = lattice_index(p.beta().max(0.0), layout.step, "beta")?;
        if j >= layout.n_beta {
            return Err(Error::NonUniformGrid(format!(
                "beta = {} deg is above the top lattice row",
                format_angle_deg(p.beta().to_degrees())
            )));
        }
        counts[i * layout.n_beta + j]
            .get_or_insert_with(OutcomeCounts::default)
            .merge(&c);
    }

    let mut missing = Vec::new();
    for j in 0..layout.n_beta {
        for i in 0..layout.n_alpha {
            if counts[i * layout.n_beta + j].is_none() {
                let p = layout.node(i, j);
                missing.push((round_deg(p.alpha()), round_deg(p.beta())));
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::IncompleteGrid { missing });
    }

    let values = counts
        .iter()
        .map(|c| estimate_probabilities(c.as_ref().expect("checked complete")))
        .collect::<Result<Vec<_>>>()?;
    let pole = pole.as_ref().map(estimate_probabilities).transpose()?;
    Ok(ProbabilityGrid { layout, values, pole })
}

fn round_deg(rad: f64) -> f64 {
    (rad.to_degrees() * 1e9).round() / 1e9
}

fn lattice_index(angle: f64, step: f64, what: &str) -> Result<usize> {
    let x = angle / step;
    let r = x.round();
    if (x - r).abs() > LATTICE_TOL {
        return Err(Error::NonUniformGrid(format!(
            "{what} = {} deg is not on the {} deg lattice",
            format_angle_deg(angle.to_degrees()),
            format_angle_deg(step.to_degrees())
        )));
    }
    // alpha = 2π − tiny rounds to the column count and wraps to zero
    Ok(if (r * step - TAU).abs() < 1e-12 { 0 } else { r as usize })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::simulate_dataset;
    use proptest::prelude::*;

    const HEADER: &str = "half_wave_deg,quarter_wave_deg,count_minus,count_zero,count_plus\n";

    fn parse(text: &str) -> Result<MeasurementSet> {
        parse_measurements(text.as_bytes(), CsvFormat::Waveplate)
    }

    #[test]
    fn parse_single_row() {
        let set = parse(&format!("{HEADER}0,0,12,81088,18900\n")).unwrap();
        assert_eq!(set.len(), 1);
        let (rec, p) = set.iter_points().next().unwrap();
        assert_eq!((p.alpha(), p.beta()), (0.0, 0.0));
        assert_eq!(rec.counts, OutcomeCounts::new(12, 81088, 18900, 0));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse(&format!("{HEADER}0,50,1,2,3\n")),
            Err(Error::OutOfRange { .. })
        ));
        assert!(matches!(
            parse(&format!("{HEADER}0,0,1,-2,3\n")),
            Err(Error::NegativeCount { line: 2, column: 4 })
        ));
        assert!(matches!(
            parse(&format!("{HEADER}0,0,1,x,3\n")),
            Err(Error::Parse { line: 2, column: 4, .. })
        ));
        assert!(matches!(
            parse(&format!("{HEADER}0,0,1,2\n")),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse("alpha_deg,beta_deg,count_minus,count_zero,count_plus\n"),
            Err(Error::Parse { line: 1, column: 1, .. })
        ));
        assert!(matches!(parse(""), Err(Error::Parse { .. })));
    }

    #[test]
    fn duplicate_rows_merge() {
        let set = parse(&format!("{HEADER}2,0,1,2,3\n2,0,10,20,30\n0,45,1,1,1\n22,45,2,2,2\n")).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.records()[0].counts, OutcomeCounts::new(11, 22, 33, 0));
        assert_eq!(set.records()[1].counts, OutcomeCounts::new(3, 3, 3, 0));
    }

    #[test]
    fn discarded_column() {
        let text = "alpha_deg,beta_deg,count_minus,count_zero,count_plus,count_discarded\n8,16,10,80,10,100\n";
        let set = parse_measurements(text.as_bytes(), CsvFormat::Poincare).unwrap();
        let c = set.records()[0].counts;
        assert_eq!(c.total_pulses(), 200);
        let mut out = Vec::new();
        write_measurements(&set, CsvFormat::Poincare, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn estimate_examples() {
        let close = |d: OutcomeDistribution, e: [f64; 3]| d.as_array().iter().zip(e).all(|(a, b)| (a - b).abs() < 1e-15);
        assert!(close(estimate_probabilities(&OutcomeCounts::new(0, 811, 189, 0)).unwrap(), [0.0, 0.811, 0.189]));
        assert!(close(estimate_probabilities(&OutcomeCounts::new(0, 0, 5, 0)).unwrap(), [0.0, 0.0, 1.0]));
        assert!(close(estimate_probabilities(&OutcomeCounts::new(10, 80, 10, 100)).unwrap(), [0.1, 0.8, 0.1]));
        assert!(matches!(
            estimate_probabilities(&OutcomeCounts::new(0, 0, 0, 7)),
            Err(Error::EmptyRecord)
        ));
    }

    #[test]
    fn default_grid_shape() {
        let g = hemisphere_grid(8.0, true).unwrap();
        assert_eq!(g.len(), 45 * 12 + 1);
        let l = GridLayout::from_step_deg(8.0).unwrap();
        assert!((l.top_gap().to_degrees() - 2.0).abs() < 1e-9);
        assert_eq!(GridLayout::from_step_deg(10.0).unwrap().n_beta, 9);
        assert!(GridLayout::from_step_deg(7.0).is_err());
    }

    #[test]
    fn simulated_dataset_assembles() {
        let state = TruncatedState::default();
        let set = simulate_dataset(&state, &hemisphere_grid(8.0, true).unwrap(), 1000, 1).unwrap();
        let grid = assemble_grid(&set, 8.0).unwrap();
        assert!(grid.pole().is_some());
        assert_eq!(grid.alpha_nodes().len(), 45);
        assert_eq!(grid.beta_nodes().len(), 12);

        // through the waveplate CSV as well
        let mut buf = Vec::new();
        write_measurements(&set, CsvFormat::Waveplate, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(2).unwrap().starts_with("2,0,"), "{}", &text[..200]);
        let back = parse_measurements(text.as_bytes(), CsvFormat::Waveplate).unwrap();
        assert_eq!(assemble_grid(&back, 8.0).unwrap(), grid);
    }

    #[test]
    fn analytic_fill_matches_outcome_law() {
        let state = TruncatedState::default();
        let grid = ProbabilityGrid::analytic(&state, 8.0, true).unwrap();
        for (i, a) in grid.alpha_nodes().iter().enumerate() {
            for (j, b) in grid.beta_nodes().iter().enumerate() {
                let exact = outcome_probabilities(&state, &PoincarePoint::new(*a, *b).unwrap());
                assert!(grid.value(i, j).total_variation(&exact) < 1e-12);
            }
        }
    }

    #[test]
    fn missing_node_is_reported() {
        let grid: Vec<_> = hemisphere_grid(8.0, true)
            .unwrap()
            .into_iter()
            .filter(|p| !p.same_point(&PoincarePoint::from_degrees(16.0, 8.0).unwrap(), 1e-9))
            .collect();
        let set = simulate_dataset(&TruncatedState::default(), &grid, 10, 3).unwrap();
        match assemble_grid(&set, 8.0) {
            Err(Error::IncompleteGrid { missing }) => assert_eq!(missing, vec![(16.0, 8.0)]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn off_lattice_is_rejected() {
        let mut pts = hemisphere_grid(8.0, false).unwrap();
        pts.push(PoincarePoint::from_degrees(3.0, 8.0).unwrap());
        let set = simulate_dataset(&TruncatedState::default(), &pts, 10, 3).unwrap();
        assert!(matches!(assemble_grid(&set, 8.0), Err(Error::NonUniformGrid(_))));
    }

    #[test]
    fn pole_records_merge() {
        let text = format!("{HEADER}0,45,1,8,1\n13,45,3,4,3\n");
        let set = parse(&text).unwrap();
        assert_eq!(set.len(), 1);
        // the same merge happens when the records arrive separately
        let mut set = MeasurementSet::new("t", None);
        let grid = hemisphere_grid(8.0, false).unwrap();
        for p in &grid {
            set.push(MeasurementRecord { setting: Setting::Poincare(*p), counts: OutcomeCounts::new(1, 1, 1, 0) }).unwrap();
        }
        for (half, c) in [(0.0, OutcomeCounts::new(1, 8, 1, 0)), (13.0, OutcomeCounts::new(3, 4, 3, 0))] {
            set.push(MeasurementRecord { setting: Setting::Waveplate(WavePlateSetting::from_degrees(half, 45.0)), counts: c }).unwrap();
        }
        let g = assemble_grid(&set, 8.0).unwrap();
        let pole = g.pole().unwrap();
        assert!((pole.p_zero - 0.6).abs() < 1e-15 && (pole.p_plus - 0.2).abs() < 1e-15);
    }

    #[test]
    fn lower_hemisphere_folds_onto_antipode() {
        let mut set = MeasurementSet::new("t", None);
        for p in hemisphere_grid(8.0, true).unwrap() {
            let q = if p.beta() > 0.0 && !p.is_pole() { p.antipode() } else { p };
            let counts = if q.beta() < 0.0 { OutcomeCounts::new(7, 2, 1, 0) } else { OutcomeCounts::new(1, 2, 7, 0) };
            set.push(MeasurementRecord { setting: Setting::Poincare(q), counts }).unwrap();
        }
        let g = assemble_grid(&set, 8.0).unwrap();
        assert!((g.value(3, 5).p_plus - 0.7).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn csv_round_trip(rows in proptest::collection::vec(
            (0.0f64..360.0, -90.0f64..=90.0, 0u64..1_000_000, 0u64..1_000_000, 0u64..1_000_000), 1..20)) {
            let mut set = MeasurementSet::new("t", None);
            for (a, b, x, y, z) in rows {
                set.push(MeasurementRecord {
                    setting: Setting::Poincare(PoincarePoint::from_degrees(a, b).unwrap()),
                    counts: OutcomeCounts::new(x, y, z, 0),
                }).unwrap();
            }
            for fmt in [CsvFormat::Poincare, CsvFormat::Waveplate] {
                let mut buf = Vec::new();
                write_measurements(&set, fmt, &mut buf).unwrap();
                let once = parse_measurements(buf.as_slice(), fmt).unwrap();
                let mut buf2 = Vec::new();
                write_measurements(&once, fmt, &mut buf2).unwrap();
                let twice = parse_measurements(buf2.as_slice(), fmt).unwrap();
                prop_assert_eq!(once.len(), set.len());
                prop_assert_eq!(&buf, &buf2);
                for ((r1, p1), (r2, p2)) in once.iter_points().zip(twice.iter_points()) {
                    prop_assert_eq!(r1.counts, r2.counts);
                    prop_assert!(p1.same_point(&p2, 1e-12));
                }
                for ((r0, p0), (r1, p1)) in set.iter_points().zip(once.iter_points()) {
                    prop_assert_eq!(r0.counts, r1.counts);
                    prop_assert!(p0.same_point(&p1, 1e-12));
                }
            }
        }
    }
}
