//! CHSH experiment: four correlation settings in the z–x plane.

use anyhow::Result;
use biphoton::analyzer::write_count_records;
use biphoton::inequalities::{chsh_s, chsh_settings, s_max_from_tangle, CorrelationEstimate};
use biphoton::quantum::tangle;

use super::{
    echo_source_inputs, exact_correlations, result_headline, sampled_correlations, terms_csv,
    terms_table, Artifact, ExperimentOutput, Mode,
};
use crate::config::{config_error, RunConfig};
use crate::fixtures::load_correlations;
use crate::reference;
use crate::report::{ExperimentReport, Headline, ReferenceCheck};

pub fn run(cfg: &RunConfig, mode: &Mode) -> Result<ExperimentOutput> {
    let settings = chsh_settings();
    let pairs = settings.pairs();
    let mut report = ExperimentReport::new("chsh", mode.run_mode());
    let mut artifacts = Vec::new();

    let terms: [CorrelationEstimate; 4] = match mode {
        Mode::Fixture(path) => {
            let loaded = load_correlations(path)?;
            report.input("fixture", path.display().to_string());
            loaded.try_into().map_err(|v: Vec<_>| {
                config_error(format!(
                    "CHSH fixture needs exactly 4 correlations, found {}",
                    v.len()
                ))
            })?
        }
        Mode::Exact => {
            let rho = cfg.source.state()?;
            echo_source_inputs(&mut report, cfg, cfg.source.resolve_overlap()?, None);
            report.headlines.push(Headline::exact(
                "model S_max from tangle",
                s_max_from_tangle(tangle(&rho))?,
            ));
            exact_correlations(&rho, &pairs)
                .try_into()
                .expect("four pairs")
        }
        Mode::Simulation => {
            let rho = cfg.source.state()?;
            let seed = cfg.require_seed()?;
            echo_source_inputs(&mut report, cfg, cfg.source.resolve_overlap()?, Some(seed));
            report.headlines.push(Headline::exact(
                "model S_max from tangle",
                s_max_from_tangle(tangle(&rho))?,
            ));
            let (records, terms) = sampled_correlations(
                &rho,
                &pairs,
                cfg.source.pair_rate_hz,
                &cfg.detectors.to_core(),
                cfg.experiment.duration_s,
                seed,
            )?;
            artifacts.push(Artifact {
                filename: "chsh_counts.csv".into(),
                contents: write_count_records(&records),
            });
            terms.try_into().expect("four pairs")
        }
    };

    let result = chsh_s(terms);
    report
        .headlines
        .insert(0, result_headline("S", result.s, result.uncertainty));
    report
        .headlines
        .push(Headline::exact("LHV bound", result.lhv_bound));
    report
        .headlines
        .push(Headline::exact("quantum bound", result.quantum_bound));

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
        "S vs reference",
        result.s,
        reference::CHSH_S,
        reference::three_sigma_combined(reference::CHSH_DS, result.uncertainty),
    ));
    let mut quantum_bound_check = ReferenceCheck::below(
        "consistent with the quantum bound",
        result.s,
        result.quantum_bound,
        5.0 * result.uncertainty,
    );
    quantum_bound_check.pass = result.is_physical();
    report.checks.push(quantum_bound_check);
    if result.uncertainty > 0.0 {
        report.headlines.push(Headline::exact(
            "LHV violation significance (sigma)",
            result.violation_sigma(),
        ));
    }

    artifacts.push(Artifact {
        filename: "chsh_terms.csv".into(),
        contents: terms_csv(&result.terms),
    });

    Ok(ExperimentOutput { report, artifacts })
}
