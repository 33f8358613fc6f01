//! Two-basis fringe-visibility scans: analyzer A fixed, analyzer B swept
//! around a great circle of the Bloch sphere.

use anyhow::Result;
use biphoton::analyzer::{fit_visibility, visibility_scan, GreatCircle, VisibilityFit};
use biphoton::quantum::{coincidence_probability, BlochVector, DensityMatrix, MeasurementBasis};
use biphoton::rng::derived_seed;

use super::{echo_source_inputs, fmt, Artifact, ExperimentOutput, Mode};
use crate::config::{config_error, RunConfig};
use crate::reference;
use crate::report::{ExperimentReport, Headline, ReferenceCheck};

struct ScanSpec {
    name: &'static str,
    fixed_a: MeasurementBasis,
    circle: GreatCircle,
    reference: f64,
    reference_err: f64,
}

fn scan_specs() -> [ScanSpec; 2] {
    [
        ScanSpec {
            name: "linear",
            fixed_a: MeasurementBasis::new("H", BlochVector::Z),
            circle: GreatCircle::linear(),
            reference: reference::VISIBILITY_LINEAR,
            reference_err: reference::VISIBILITY_LINEAR_ERR,
        },
        ScanSpec {
            name: "coherence",
            fixed_a: MeasurementBasis::new("+", BlochVector::X),
            circle: GreatCircle::coherence(),
            reference: reference::VISIBILITY_COHERENCE,
            reference_err: reference::VISIBILITY_COHERENCE_ERR,
        },
    ]
}

/// Exact expected `c_ab` at each scan angle: the Poisson means the seeded
/// scan draws from.
fn exact_scan_points(rho: &DensityMatrix, spec: &ScanSpec, cfg: &RunConfig) -> Vec<(f64, f64)> {
    let det = cfg.detectors.to_core();
    let detected = cfg.source.pair_rate_hz * det.efficiency_product * cfg.experiment.duration_s;
    let accidental = det.accidental_mean(cfg.experiment.duration_s);
    let n = cfg.experiment.n_points;
    (0..n)
        .map(|k| {
            let beta = std::f64::consts::TAU * k as f64 / n as f64;
            let p = coincidence_probability(rho, spec.fixed_a.axis, spec.circle.point(beta));
            (beta / 2.0, detected * p + accidental)
        })
        .collect()
}

fn scan_csv(points: &[(f64, f64)], fit: &VisibilityFit) -> String {
    let mut out = String::from("theta_deg,counts,fit\n");
    for &(theta, count) in points {
        let model =
            fit.amplitude * (1.0 + fit.visibility * (2.0 * (theta - fit.phase_offset_rad)).cos());
        out.push_str(&format!(
            "{:.4},{:.6},{:.6}\n",
            theta.to_degrees(),
            count,
            model
        ));
    }
    out
}

pub fn run(cfg: &RunConfig, mode: &Mode) -> Result<ExperimentOutput> {
    if let Mode::Fixture(_) = mode {
        return Err(config_error(
            "the visibility experiment has no fixture mode (its references are scalar constants); run it in simulation or --exact mode",
        ));
    }

    let rho = cfg.source.state()?;
    let overlap = cfg.source.resolve_overlap()?;
    let mut report = ExperimentReport::new("visibility", mode.run_mode());
    let mut artifacts = Vec::new();

    let seed = match mode {
        Mode::Simulation => Some(cfg.require_seed()?),
        _ => None,
    };
    echo_source_inputs(&mut report, cfg, overlap, seed);
    report.input("n_points", cfg.experiment.n_points.to_string());

    // Model predictions: the linear (H/V) fringe amplitude is the purity
    // weight alone; the coherence (+/−) fringe also carries the spectral
    // overlap.
    let model = [cfg.source.purity_weight, cfg.source.purity_weight * overlap];

    for (i, spec) in scan_specs().into_iter().enumerate() {
        let points: Vec<(f64, f64)> = match mode {
            Mode::Simulation => visibility_scan(
                &rho,
                &spec.fixed_a,
                &spec.circle,
                cfg.experiment.n_points,
                cfg.source.pair_rate_hz,
                &cfg.detectors.to_core(),
                cfg.experiment.duration_s,
                derived_seed(seed.expect("checked above"), i as u64),
            )?
            .into_iter()
            .map(|(theta, rec)| (theta, rec.c_ab as f64))
            .collect(),
            _ => exact_scan_points(&rho, &spec, cfg),
        };

        let fit = fit_visibility(&points)?;
        report.headlines.push(Headline::measured(
            format!("{} visibility", spec.name),
            fit.visibility,
            fit.visibility_err,
        ));
        report.headlines.push(Headline::exact(
            format!("model {} visibility", spec.name),
            model[i],
        ));
        report.checks.push(ReferenceCheck::within(
            format!("{} visibility vs reference", spec.name),
            fit.visibility,
            spec.reference,
            reference::three_sigma_combined(spec.reference_err, fit.visibility_err),
        ));
        report.input(
            format!("{}_scan_phase_offset_deg", spec.name),
            fmt(fit.phase_offset_rad.to_degrees()),
        );
        artifacts.push(Artifact {
            filename: format!("visibility_{}.csv", spec.name),
            contents: scan_csv(&points, &fit),
        });
    }

    Ok(ExperimentOutput { report, artifacts })
}
