//! Leggett-model experiment: three plane pairs at separation angle φ,
//! optionally scanned over a list of φ values.

use anyhow::Result;
use biphoton::analyzer::{write_count_records, CountRecord};
use biphoton::inequalities::{
    leggett_bound, leggett_l3, leggett_settings, CorrelationEstimate, LeggettResult,
};
use biphoton::rng::derived_seed;

use super::{
    echo_source_inputs, exact_correlations, fmt, result_headline, sampled_correlations, terms_csv,
    terms_table, Artifact, ExperimentOutput, Mode,
};
use crate::config::{config_error, RunConfig};
use crate::fixtures::load_correlations;
use crate::reference;
use crate::report::{ExperimentReport, Headline, ReferenceCheck, ReportTable};

/// One evaluated separation angle.
struct PhiPoint {
    phi_deg: f64,
    result: LeggettResult,
    /// Exact model prediction at this angle (equals `result.l3` in exact
    /// mode).
    model_l3: f64,
}

pub fn run(cfg: &RunConfig, mode: &Mode) -> Result<ExperimentOutput> {
    let mut report = ExperimentReport::new("leggett", mode.run_mode());
    let mut artifacts = Vec::new();

    let points: Vec<PhiPoint> = match mode {
        Mode::Fixture(path) => {
            // A fixture holds the six correlations of a single angle: the
            // configured one if the list has exactly one entry, otherwise
            // the reference angle.
            let phi_deg = match cfg.experiment.phi_deg.as_slice() {
                [phi] => *phi,
                _ => reference::LEGGETT_PHI_DEG,
            };
            let loaded = load_correlations(path)?;
            report.input("fixture", path.display().to_string());
            report.input("phi_deg", fmt(phi_deg));
            let terms: [CorrelationEstimate; 6] = loaded.try_into().map_err(|v: Vec<_>| {
                config_error(format!(
                    "Leggett fixture needs exactly 6 correlations, found {}",
                    v.len()
                ))
            })?;
            let result = leggett_l3(terms, phi_deg.to_radians())?;
            vec![PhiPoint {
                phi_deg,
                model_l3: result.l3,
                result,
            }]
        }
        Mode::Exact => {
            let rho = cfg.source.state()?;
            echo_source_inputs(&mut report, cfg, cfg.source.resolve_overlap()?, None);
            let mut points = Vec::new();
            for &phi_deg in &cfg.experiment.phi_deg {
                let settings = leggett_settings(phi_deg.to_radians())?;
                let terms = exact_correlations(&rho, &settings.pairs());
                let result = leggett_l3(terms.try_into().expect("six pairs"), settings.phi_rad)?;
                points.push(PhiPoint {
                    phi_deg,
                    model_l3: result.l3,
                    result,
                });
            }
            points
        }
        Mode::Simulation => {
            let rho = cfg.source.state()?;
            let seed = cfg.require_seed()?;
            echo_source_inputs(&mut report, cfg, cfg.source.resolve_overlap()?, Some(seed));
            let mut points = Vec::new();
            let mut all_records: Vec<CountRecord> = Vec::new();
            for (i, &phi_deg) in cfg.experiment.phi_deg.iter().enumerate() {
                let settings = leggett_settings(phi_deg.to_radians())?;
                let pairs = settings.pairs();
                let (records, terms) = sampled_correlations(
                    &rho,
                    &pairs,
                    cfg.source.pair_rate_hz,
                    &cfg.detectors.to_core(),
                    cfg.experiment.duration_s,
                    derived_seed(seed, i as u64),
                )?;
                all_records.extend(records);
                let exact = exact_correlations(&rho, &pairs);
                let model_l3 =
                    leggett_l3(exact.try_into().expect("six pairs"), settings.phi_rad)?.l3;
                let result = leggett_l3(terms.try_into().expect("six pairs"), settings.phi_rad)?;
                points.push(PhiPoint {
                    phi_deg,
                    model_l3,
                    result,
                });
            }
            artifacts.push(Artifact {
                filename: "leggett_counts.csv".into(),
                contents: write_count_records(&all_records),
            });
            points
        }
    };

    // Headline angle: the reference angle when scanned, else the first.
    let headline_idx = points
        .iter()
        .position(|p| (p.phi_deg - reference::LEGGETT_PHI_DEG).abs() < 1e-9)
        .unwrap_or(0);
    let head = &points[headline_idx];
    report.headlines.push(result_headline(
        format!("L3 at phi = {} deg", fmt(head.phi_deg)),
        head.result.l3,
        head.result.uncertainty,
    ));
    report.headlines.push(Headline::exact(
        "non-signaling model bound",
        head.result.bound,
    ));
    if !matches!(mode, Mode::Fixture(_)) {
        report
            .headlines
            .push(Headline::exact("model L3", head.model_l3));
    }
    if head.result.uncertainty > 0.0 {
        report.headlines.push(Headline::exact(
            "bound violation significance (sigma)",
            head.result.violation_sigma,
        ));
    }

    // Per-angle summary (only interesting when more than one angle ran).
    if points.len() > 1 {
        report.tables.push(ReportTable {
            title: "L3 versus separation angle".into(),
            columns: vec![
                "phi_deg".into(),
                "L3".into(),
                "dL3".into(),
                "bound".into(),
                "model".into(),
                "violated".into(),
            ],
            rows: points
                .iter()
                .map(|p| {
                    vec![
                        fmt(p.phi_deg),
                        fmt(p.result.l3),
                        fmt(p.result.uncertainty),
                        fmt(p.result.bound),
                        fmt(p.model_l3),
                        if p.result.l3 > p.result.bound {
                            "yes"
                        } else {
                            "no"
                        }
                        .into(),
                    ]
                })
                .collect(),
        });
    }

    // Correlation terms at the headline angle.
    let head_pairs = leggett_settings(head.phi_deg.to_radians())?.pairs();
    let show_pairs = !matches!(mode, Mode::Fixture(_));
    report.tables.push(terms_table(
        "correlation terms at the headline angle",
        &head.result.terms,
        show_pairs.then_some(&head_pairs[..]),
    ));

    report.checks.push(ReferenceCheck::above(
        "non-signaling model bound violated",
        head.result.l3,
        head.result.bound,
    ));
    if (head.phi_deg - reference::LEGGETT_PHI_DEG).abs() < 1e-9 {
        report.checks.push(ReferenceCheck::within(
            "L3 vs reference",
            head.result.l3,
            reference::LEGGETT_L3,
            reference::three_sigma_combined(reference::LEGGETT_DL3, head.result.uncertainty),
        ));
    }

    // Plot-ready curve, one row per angle.
    let mut curve = String::from("phi_deg,l3,dl3,bound,model\n");
    for p in &points {
        curve.push_str(&format!(
            "{:.4},{:.6},{:.6},{:.6},{:.6}\n",
            p.phi_deg,
            p.result.l3,
            p.result.uncertainty,
            leggett_bound(p.phi_deg.to_radians())?,
            p.model_l3
        ));
    }
    artifacts.push(Artifact {
        filename: "leggett_curve.csv".into(),
        contents: curve,
    });
    artifacts.push(Artifact {
        filename: "leggett_terms.csv".into(),
        contents: terms_csv(&head.result.terms),
    });

    Ok(ExperimentOutput { report, artifacts })
}
