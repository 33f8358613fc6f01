//! (2,3) Bell experiment: twelve correlation settings.

use anyhow::Result;
use biphoton::analyzer::write_count_records;
use biphoton::inequalities::{bb_min_visibility, bb_s, bb_settings, CorrelationEstimate};

use super::{
    echo_source_inputs, exact_correlations, result_headline, sampled_correlations, terms_csv,
    terms_table, Artifact, ExperimentOutput, Mode,
};
use crate::config::{config_error, RunConfig};
use crate::fixtures::load_correlations;
use crate::reference;
use crate::report::{ExperimentReport, Headline, ReferenceCheck};

pub fn run(cfg: &RunConfig, mode: &Mode) -> Result<ExperimentOutput> {
    let settings = bb_settings();
    let pairs = settings.pairs();
    let mut report = ExperimentReport::new("bbell", mode.run_mode());
    let mut artifacts = Vec::new();

    let terms: [CorrelationEstimate; 12] = match mode {
        Mode::Fixture(path) => {
            let loaded = load_correlations(path)?;
            report.input("fixture", path.display().to_string());
            loaded.try_into().map_err(|v: Vec<_>| {
                config_error(format!(
                    "(2,3) Bell fixture needs exactly 12 correlations, found {}",
                    v.len()
                ))
            })?
        }
        Mode::Exact => {
            let rho = cfg.source.state()?;
            echo_source_inputs(&mut report, cfg, cfg.source.resolve_overlap()?, None);
            exact_correlations(&rho, &pairs)
                .try_into()
                .expect("twelve pairs")
        }
        Mode::Simulation => {
            let rho = cfg.source.state()?;
            let seed = cfg.require_seed()?;
            echo_source_inputs(&mut report, cfg, cfg.source.resolve_overlap()?, Some(seed));
            let (records, terms) = sampled_correlations(
                &rho,
                &pairs,
                cfg.source.pair_rate_hz,
                &cfg.detectors.to_core(),
                cfg.experiment.duration_s,
                seed,
            )?;
            artifacts.push(Artifact {
                filename: "bbell_counts.csv".into(),
                contents: write_count_records(&records),
            });
            terms.try_into().expect("twelve pairs")
        }
    };

    let result = bb_s(terms);
    report
        .headlines
        .push(result_headline("S_BB", result.s, result.uncertainty));
    report
        .headlines
        .push(Headline::exact("LHV bound", result.lhv_bound));
    report
        .headlines
        .push(Headline::exact("quantum bound", result.quantum_bound));
    report.headlines.push(Headline::exact(
        "minimum violating visibility",
        bb_min_visibility(),
    ));
    if result.uncertainty > 0.0 {
        report.headlines.push(Headline::exact(
            "LHV violation significance (sigma)",
            result.violation_sigma,
        ));
    }

    let show_pairs = !matches!(mode, Mode::Fixture(_));
    report.tables.push(terms_table(
        "correlation terms",
        &result.terms,
        show_pairs.then_some(&pairs[..]),
    ));

    report.checks.push(ReferenceCheck::above(
        "LHV bound violated",
        result.s,
        result.lhv_bound,
    ));
    report.checks.push(ReferenceCheck::within(
        "S_BB vs reference",
        result.s,
        reference::BB_S,
        reference::three_sigma_combined(reference::BB_DS, result.uncertainty),
    ));
    if result.uncertainty > 0.0 {
        let min_sigma = match mode {
            Mode::Fixture(_) => reference::BB_MIN_SIGNIFICANCE,
            _ => 5.0,
        };
        report.checks.push(ReferenceCheck::above(
            "violation significance (sigma)",
            result.violation_sigma,
            min_sigma,
        ));
    }

    artifacts.push(Artifact {
        filename: "bbell_terms.csv".into(),
        contents: terms_csv(&result.terms),
    });

    Ok(ExperimentOutput { report, artifacts })
}
