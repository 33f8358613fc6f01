//! Root-spectral overlap of the two signal spectra, from measured spectrum
//! files or from the crystal model.

use std::path::PathBuf;

use anyhow::Result;
use biphoton::source::{
    pair_tangle, signal_spectrum, spectral_overlap, SpectralDensity, WavelengthGrid,
};

use super::{fmt, Artifact, ExperimentOutput, Mode};
use crate::config::{config_error, RunConfig};
use crate::report::{ExperimentReport, Headline};

/// Interleave the two spectra on their own grids into one plot-ready CSV
/// (missing half left empty).
fn spectra_csv(a: &SpectralDensity, b: &SpectralDensity) -> String {
    let mut out = String::from("wavelength_nm,density_hh,density_vv\n");
    let mut rows: Vec<(f64, Option<f64>, Option<f64>)> = a
        .samples()
        .iter()
        .map(|&(l, d)| (l, Some(d), None))
        .chain(b.samples().iter().map(|&(l, d)| (l, None, Some(d))))
        .collect();
    rows.sort_by(|x, y| x.0.total_cmp(&y.0));
    // Merge rows that share a wavelength (the model case: same grid).
    let mut merged: Vec<(f64, Option<f64>, Option<f64>)> = Vec::with_capacity(rows.len());
    for (l, da, db) in rows {
        match merged.last_mut() {
            Some(last) if (last.0 - l).abs() < 1e-9 => {
                last.1 = last.1.or(da);
                last.2 = last.2.or(db);
            }
            _ => merged.push((l, da, db)),
        }
    }
    for (l, da, db) in merged {
        let fa = da.map(|d| format!("{d:.8}")).unwrap_or_default();
        let fb = db.map(|d| format!("{d:.8}")).unwrap_or_default();
        out.push_str(&format!("{l:.4},{fa},{fb}\n"));
    }
    out
}

pub fn run(
    cfg: &RunConfig,
    mode: &Mode,
    spectrum_a: Option<&PathBuf>,
    spectrum_b: Option<&PathBuf>,
) -> Result<ExperimentOutput> {
    if let Mode::Fixture(_) = mode {
        return Err(config_error(
            "the overlap experiment takes spectra as positional arguments, not --fixture",
        ));
    }
    let mut report = ExperimentReport::new("overlap", crate::report::RunMode::Exact);

    let (s_hh, s_vv) = match (spectrum_a, spectrum_b) {
        (Some(a), Some(b)) => {
            report.input("spectrum_hh", a.display().to_string());
            report.input("spectrum_vv", b.display().to_string());
            (SpectralDensity::from_csv(a)?, SpectralDensity::from_csv(b)?)
        }
        (None, None) => {
            let hh = cfg.source.hh_crystal_core();
            let vv = cfg.source.vv_crystal_core();
            let t_hh = cfg.source.hh_temp_c.unwrap_or(hh.temp_ref_c);
            let t_vv = cfg.source.vv_temp_c.unwrap_or(vv.temp_ref_c);
            report.input("hh_temp_c", fmt(t_hh));
            report.input("vv_temp_c", fmt(t_vv));
            report.input("hh_center_nm", fmt(hh.center_at(t_hh)));
            report.input("vv_center_nm", fmt(vv.center_at(t_vv)));
            let grid = WavelengthGrid::covering(
                &[hh.center_at(t_hh), vv.center_at(t_vv)],
                hh.fwhm_nm.max(vv.fwhm_nm),
                6.0,
                0.005,
            )?;
            (
                signal_spectrum(&hh, t_hh, &grid)?,
                signal_spectrum(&vv, t_vv, &grid)?,
            )
        }
        _ => {
            return Err(config_error(
                "overlap needs either two spectrum files or none (model spectra)",
            ))
        }
    };

    let overlap = spectral_overlap(&s_hh, &s_vv)?;
    report
        .headlines
        .push(Headline::exact("spectral overlap", overlap));
    report.headlines.push(Headline::exact(
        "model tangle at this overlap",
        pair_tangle(overlap, cfg.source.purity_weight)?,
    ));
    report.input("purity_weight", fmt(cfg.source.purity_weight));

    Ok(ExperimentOutput {
        report,
        artifacts: vec![Artifact {
            filename: "overlap_spectra.csv".into(),
            contents: spectra_csv(&s_hh, &s_vv),
        }],
    })
}
