//! Experiment recipes: one module per subcommand, each wiring the source
//! model, analyzers, statistics, and report rendering together.

pub mod bbell;
pub mod chsh;
pub mod leggett;
pub mod overlap;
pub mod sweep;
pub mod tomo;
pub mod visibility;

use std::path::PathBuf;

use anyhow::Result;
use biphoton::analyzer::{simulate_counts, waveplate_angles, CountRecord, DetectorConfig};
use biphoton::inequalities::{correlation_from_counts, exact_correlation, CorrelationEstimate};
use biphoton::quantum::{DensityMatrix, MeasurementBasis};
use biphoton::rng::derived_seed;

use crate::config::RunConfig;
use crate::report::{ExperimentReport, Headline, RunMode};

/// How a subcommand obtains its numbers.
#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    /// Seeded Poissonian counting.
    Simulation,
    /// Exact expectations, no sampling.
    Exact,
    /// Arithmetic on a measured-data CSV.
    Fixture(PathBuf),
}

impl Mode {
    pub fn run_mode(&self) -> RunMode {
        match self {
            Mode::Simulation => RunMode::Simulation,
            Mode::Exact => RunMode::Exact,
            Mode::Fixture(_) => RunMode::Fixture,
        }
    }
}

/// A plot-ready CSV produced alongside the report.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub filename: String,
    pub contents: String,
}

/// Everything one experiment run produces.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: ExperimentReport,
    pub artifacts: Vec<Artifact>,
}

pub(crate) fn fmt(x: f64) -> String {
    format!("{x:.6}")
}

/// Headline that renders as measured when it carries statistical spread
/// and as exact otherwise (exact-mode correlations have zero uncertainty).
pub(crate) fn result_headline(label: impl Into<String>, value: f64, uncertainty: f64) -> Headline {
    if uncertainty > 0.0 {
        Headline::measured(label, value, uncertainty)
    } else {
        Headline::exact(label, value)
    }
}

/// Waveplate angles realizing a measurement basis, as a compact string
/// (degrees).
pub(crate) fn angles_of(basis: &MeasurementBasis) -> String {
    let w = waveplate_angles(basis.axis);
    format!(
        "qwp {:.2} hwp {:.2}",
        w.qwp_rad.to_degrees(),
        w.hwp_rad.to_degrees()
    )
}

/// Echo of the source/detector/acquisition inputs shared by the counting
/// experiments.
pub(crate) fn echo_source_inputs(
    report: &mut ExperimentReport,
    cfg: &RunConfig,
    overlap: f64,
    seed: Option<u64>,
) {
    report.input("overlap", fmt(overlap));
    report.input("purity_weight", fmt(cfg.source.purity_weight));
    report.input("phase_rad", fmt(cfg.source.phase_rad));
    report.input("pair_rate_hz", fmt(cfg.source.pair_rate_hz));
    report.input("duration_s", fmt(cfg.experiment.duration_s));
    report.input(
        "coincidence_window_ns",
        fmt(cfg.detectors.coincidence_window_ns),
    );
    if let Some(s) = seed {
        report.input("seed", s.to_string());
    }
}

/// Simulate the four-channel counts of every `(a, b)` pair and estimate
/// their correlations. Each pair gets a seed derived from `base_seed` and
/// its index.
pub(crate) fn sampled_correlations(
    rho: &DensityMatrix,
    pairs: &[(MeasurementBasis, MeasurementBasis)],
    pair_rate_hz: f64,
    det: &DetectorConfig,
    duration_s: f64,
    base_seed: u64,
) -> Result<(Vec<CountRecord>, Vec<CorrelationEstimate>)> {
    let mut records = Vec::with_capacity(pairs.len());
    let mut estimates = Vec::with_capacity(pairs.len());
    for (k, (a, b)) in pairs.iter().enumerate() {
        let rec = simulate_counts(
            rho,
            a,
            b,
            pair_rate_hz,
            det,
            duration_s,
            derived_seed(base_seed, k as u64),
        )?;
        estimates.push(correlation_from_counts(&rec)?);
        records.push(rec);
    }
    Ok((records, estimates))
}

/// Exact model correlations of every `(a, b)` pair.
pub(crate) fn exact_correlations(
    rho: &DensityMatrix,
    pairs: &[(MeasurementBasis, MeasurementBasis)],
) -> Vec<CorrelationEstimate> {
    pairs
        .iter()
        .map(|(a, b)| exact_correlation(rho, a, b))
        .collect()
}

/// A correlation-terms table with analyzer waveplate angles (simulation
/// and exact modes know the measurement directions; fixture mode only has
/// labels).
pub(crate) fn terms_table(
    title: &str,
    terms: &[CorrelationEstimate],
    pairs: Option<&[(MeasurementBasis, MeasurementBasis)]>,
) -> crate::report::ReportTable {
    match pairs {
        Some(pairs) => crate::report::ReportTable {
            title: title.into(),
            columns: vec![
                "setting_a".into(),
                "setting_b".into(),
                "analyzer_a_deg".into(),
                "analyzer_b_deg".into(),
                "E".into(),
                "dE".into(),
            ],
            rows: terms
                .iter()
                .zip(pairs)
                .map(|(t, (a, b))| {
                    vec![
                        t.label_a.clone(),
                        t.label_b.clone(),
                        angles_of(a),
                        angles_of(b),
                        fmt(t.value),
                        fmt(t.uncertainty),
                    ]
                })
                .collect(),
        },
        None => crate::report::ReportTable {
            title: title.into(),
            columns: vec![
                "setting_a".into(),
                "setting_b".into(),
                "E".into(),
                "dE".into(),
            ],
            rows: terms
                .iter()
                .map(|t| {
                    vec![
                        t.label_a.clone(),
                        t.label_b.clone(),
                        fmt(t.value),
                        fmt(t.uncertainty),
                    ]
                })
                .collect(),
        },
    }
}

/// CSV of correlation terms in the fixture schema.
pub(crate) fn terms_csv(terms: &[CorrelationEstimate]) -> String {
    let mut out = String::from("basis_a,basis_b,e_value,e_uncertainty\n");
    for t in terms {
        out.push_str(&format!(
            "{},{},{:.6},{:.6}\n",
            t.label_a, t.label_b, t.value, t.uncertainty
        ));
    }
    out
}
