//! Crystal-temperature tangle sweep: spectral overlap, model tangle, and a
//! full tomographic reconstruction at every HH-crystal temperature.

use anyhow::Result;
use biphoton::quantum::tangle;
use biphoton::source::{pair_tangle, source_state};
use biphoton::tomography::{
    expected_counts, mle_reconstruct, tangle_vs_temperature_curve, MleOptions, SweepPoint,
    TomographyData, TomographySettings,
};

use super::{fmt, Artifact, ExperimentOutput, Mode};
use crate::config::RunConfig;
use crate::fixtures::load_density_matrices;
use crate::reference;
use crate::report::{ExperimentReport, Headline, ReferenceCheck, ReportTable};

/// `true` when the sequence increases to a single peak and decreases after
/// it (the signature of tuning through the spectral-overlap maximum).
fn rises_then_falls(values: &[f64]) -> bool {
    let Some((peak, _)) = values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)) else {
        return false;
    };
    values
        .windows(2)
        .enumerate()
        .all(|(i, w)| if i < peak { w[0] < w[1] } else { w[0] > w[1] })
}

fn run_fixture(path: &std::path::Path) -> Result<ExperimentOutput> {
    let matrices = load_density_matrices(path)?;
    let mut report = ExperimentReport::new("tangle-sweep", crate::report::RunMode::Fixture);
    report.input("fixture", path.display().to_string());
    report.input("matrices", matrices.len().to_string());

    let tangles: Vec<(String, f64)> = matrices
        .iter()
        .map(|(label, rho)| (label.clone(), tangle(rho)))
        .collect();

    let has_reference = tangles.len() == reference::SWEEP_TANGLES.len();
    let mut columns = vec!["label".into(), "tangle".into()];
    if has_reference {
        columns.push("reference".into());
    }
    report.tables.push(ReportTable {
        title: "reconstructed tangle per sweep point".into(),
        columns,
        rows: tangles
            .iter()
            .enumerate()
            .map(|(i, (label, t))| {
                let mut row = vec![label.clone(), fmt(*t)];
                if has_reference {
                    row.push(fmt(reference::SWEEP_TANGLES[i]));
                }
                row
            })
            .collect(),
    });

    if has_reference {
        for (i, (label, t)) in tangles.iter().enumerate() {
            report.checks.push(ReferenceCheck::within(
                format!("tangle at {label} vs reference"),
                *t,
                reference::SWEEP_TANGLES[i],
                reference::SWEEP_TANGLE_TOL,
            ));
        }
    }
    if tangles.len() >= 3 {
        let shape = rises_then_falls(&tangles.iter().map(|(_, t)| *t).collect::<Vec<_>>());
        report.checks.push(ReferenceCheck::within(
            "tangle rises to a single peak then falls",
            shape as u8 as f64,
            1.0,
            0.5,
        ));
    }

    let mut csv = String::from("label,tangle\n");
    for (label, t) in &tangles {
        csv.push_str(&format!("{label},{t:.6}\n"));
    }
    Ok(ExperimentOutput {
        report,
        artifacts: vec![Artifact {
            filename: "tangle_sweep.csv".into(),
            contents: csv,
        }],
    })
}

pub fn run(cfg: &RunConfig, mode: &Mode) -> Result<ExperimentOutput> {
    if let Mode::Fixture(path) = mode {
        return run_fixture(path);
    }

    let mut report = ExperimentReport::new("tangle-sweep", mode.run_mode());
    let hh = cfg.source.hh_crystal_core();
    let vv = cfg.source.vv_crystal_core();
    let temps = &cfg.experiment.hh_temps_c;
    report.input("vv_temp_c", fmt(cfg.experiment.vv_temp_c));
    report.input("purity_weight", fmt(cfg.source.purity_weight));
    report.input("exposure", fmt(cfg.experiment.exposure));
    report.input(
        "hh_temps_c",
        temps
            .iter()
            .map(|t| format!("{t:.2}"))
            .collect::<Vec<_>>()
            .join(" "),
    );

    let points: Vec<SweepPoint> = match mode {
        Mode::Simulation => {
            let seed = cfg.require_seed()?;
            report.input("seed", seed.to_string());
            tangle_vs_temperature_curve(
                &hh,
                &vv,
                temps,
                cfg.experiment.vv_temp_c,
                cfg.source.purity_weight,
                cfg.experiment.exposure,
                seed,
            )?
        }
        Mode::Exact => {
            // Reconstruct from the exact expected counts: isolates the
            // estimator itself from counting noise.
            let settings = TomographySettings::standard_36();
            let mut src = cfg.source.clone();
            src.overlap = None;
            src.vv_temp_c = Some(cfg.experiment.vv_temp_c);
            temps
                .iter()
                .map(|&t| -> Result<SweepPoint> {
                    src.hh_temp_c = Some(t);
                    let overlap = src.resolve_overlap()?;
                    let rho = source_state(overlap, cfg.source.purity_weight, 0.0)?;
                    let means = expected_counts(&rho, &settings, cfg.experiment.exposure)?;
                    let rec = mle_reconstruct(
                        &settings,
                        &TomographyData::new(means)?,
                        cfg.experiment.exposure,
                        &MleOptions::default(),
                    )?;
                    Ok(SweepPoint {
                        hh_temp_c: t,
                        overlap,
                        tangle_model: pair_tangle(overlap, cfg.source.purity_weight)?,
                        tangle_qst: rec.tangle,
                    })
                })
                .collect::<Result<_>>()?
        }
        Mode::Fixture(_) => unreachable!("handled above"),
    };

    let peak = points
        .iter()
        .max_by(|a, b| a.tangle_qst.total_cmp(&b.tangle_qst))
        .expect("validated non-empty");
    report
        .headlines
        .push(Headline::exact("peak tangle", peak.tangle_qst));
    report
        .headlines
        .push(Headline::exact("peak hh_temp_c", peak.hh_temp_c));

    report.tables.push(ReportTable {
        title: "tangle versus HH-crystal temperature".into(),
        columns: vec![
            "hh_temp_c".into(),
            "overlap".into(),
            "tangle_model".into(),
            "tangle_qst".into(),
        ],
        rows: points
            .iter()
            .map(|p| {
                vec![
                    format!("{:.2}", p.hh_temp_c),
                    fmt(p.overlap),
                    fmt(p.tangle_model),
                    fmt(p.tangle_qst),
                ]
            })
            .collect(),
    });

    let worst = points
        .iter()
        .map(|p| (p.tangle_qst - p.tangle_model).abs())
        .fold(0.0, f64::max);
    report.checks.push(ReferenceCheck::within(
        "reconstruction tracks the model tangle (worst point)",
        worst,
        0.0,
        0.05,
    ));
    if points.len() >= 3 {
        let shape = rises_then_falls(&points.iter().map(|p| p.tangle_qst).collect::<Vec<_>>());
        report.checks.push(ReferenceCheck::within(
            "tangle rises to a single peak then falls",
            shape as u8 as f64,
            1.0,
            0.5,
        ));
    }

    let mut csv = String::from("hh_temp_c,overlap,tangle_model,tangle_qst\n");
    for p in &points {
        csv.push_str(&format!(
            "{:.2},{:.6},{:.6},{:.6}\n",
            p.hh_temp_c, p.overlap, p.tangle_model, p.tangle_qst
        ));
    }
    Ok(ExperimentOutput {
        report,
        artifacts: vec![Artifact {
            filename: "tangle_sweep.csv".into(),
            contents: csv,
        }],
    })
}
