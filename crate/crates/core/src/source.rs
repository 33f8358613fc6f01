//! Phenomenological model of the two-crystal Sagnac pair source.
//!
//! The two crystals emit pairs into the `|HH⟩` and `|VV⟩` channels with
//! signal spectra `S_HH(λ)` and `S_VV(λ)`. The coherence between the two
//! channels is set by the root-spectral overlap
//! `O = ∫ √S_HH(λ) √S_VV(λ) dλ` of the unit-area spectra, and residual
//! hardware imperfections are summarized by a single purity weight `v`:
//!
//! `ρ = v·ρ_O(φ) + (1 − v)·I/4`, where
//! `ρ_O(φ) = ½(|HH⟩⟨HH| + |VV⟩⟨VV|) + (O/2)(e^{iφ}|VV⟩⟨HH| + e^{−iφ}|HH⟩⟨VV|)`.
//!
//! Spectra are modeled as Gaussians whose center tunes linearly with crystal
//! temperature; all integrals are trapezoidal on explicit wavelength grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{c, DensityMatrix, Mat4, C64};

/// Uniform wavelength grid in nanometers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavelengthGrid {
    pub start_nm: f64,
    pub stop_nm: f64,
    pub step_nm: f64,
}

impl WavelengthGrid {
    pub fn new(start_nm: f64, stop_nm: f64, step_nm: f64) -> Result<Self> {
        if !(start_nm.is_finite() && stop_nm.is_finite() && step_nm.is_finite())
            || stop_nm <= start_nm
            || step_nm <= 0.0
        {
            return Err(Error::invalid_argument(format!(
                "bad wavelength grid [{start_nm}, {stop_nm}] step {step_nm}"
            )));
        }
        Ok(WavelengthGrid {
            start_nm,
            stop_nm,
            step_nm,
        })
    }

    /// Grid spanning `margin_fwhm` full widths on both sides of every center.
    pub fn covering(
        centers_nm: &[f64],
        fwhm_nm: f64,
        margin_fwhm: f64,
        step_nm: f64,
    ) -> Result<Self> {
        if centers_nm.is_empty() {
            return Err(Error::invalid_argument("no centers to cover".to_string()));
        }
        let lo = centers_nm.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = centers_nm.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        WavelengthGrid::new(
            lo - margin_fwhm * fwhm_nm,
            hi + margin_fwhm * fwhm_nm,
            step_nm,
        )
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop_nm - self.start_nm) / self.step_nm).round() as usize;
        (0..=n)
            .map(|i| self.start_nm + i as f64 * self.step_nm)
            .collect()
    }
}

/// Sampled spectral density on a strictly increasing wavelength axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity {
    samples: Vec<(f64, f64)>,
}

impl SpectralDensity {
    /// Validate samples: at least two points, strictly increasing wavelengths,
    /// non-negative densities.
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::invalid_argument(
                "a spectrum needs at least two samples".to_string(),
            ));
        }
        for (i, w) in samples.windows(2).enumerate() {
            // partial_cmp also rejects NaN wavelengths, which `<=` would admit.
            if w[1].0.partial_cmp(&w[0].0) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::invalid_argument(format!(
                    "wavelengths must increase strictly (sample {} to {})",
                    i,
                    i + 1
                )));
            }
        }
        if let Some((lam, s)) = samples.iter().find(|(_, s)| !s.is_finite() || *s < 0.0) {
            return Err(Error::invalid_argument(format!(
                "negative or non-finite density {s} at {lam} nm"
            )));
        }
        Ok(SpectralDensity { samples })
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    /// Trapezoidal integral over the sampled range.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.samples)
    }

    /// Rescale to unit area.
    pub fn normalized(&self) -> Result<SpectralDensity> {
        let area = self.integral();
        if area <= 0.0 || !area.is_finite() {
            return Err(Error::Normalization { integral: area });
        }
        Ok(SpectralDensity {
            samples: self.samples.iter().map(|&(l, s)| (l, s / area)).collect(),
        })
    }

    /// Linear interpolation; zero outside the sampled range.
    pub fn value_at(&self, lambda_nm: f64) -> f64 {
        let s = &self.samples;
        if lambda_nm < s[0].0 || lambda_nm > s[s.len() - 1].0 {
            return 0.0;
        }
        let idx = s.partition_point(|&(l, _)| l < lambda_nm);
        if idx == 0 {
            return s[0].1;
        }
        if idx >= s.len() {
            return s[s.len() - 1].1;
        }
        let (l0, v0) = s[idx - 1];
        let (l1, v1) = s[idx];
        let t = (lambda_nm - l0) / (l1 - l0);
        v0 + t * (v1 - v0)
    }

    /// Read a two-column CSV `wavelength_nm, counts` (optional header line)
    /// and normalize to unit area.
    pub fn from_csv(path: &std::path::Path) -> Result<SpectralDensity> {
        let text = std::fs::read_to_string(path)?;
        let mut samples = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected 2 comma-separated fields, found {}", fields.len()),
                });
            }
            // Tolerate one header line of column names.
            if lineno == 1 && fields[0].parse::<f64>().is_err() {
                continue;
            }
            let lam: f64 = fields[0].parse().map_err(|e| Error::Parse {
                line: lineno,
                message: format!("bad wavelength {:?}: {e}", fields[0]),
            })?;
            let val: f64 = fields[1].parse().map_err(|e| Error::Parse {
                line: lineno,
                message: format!("bad density {:?}: {e}", fields[1]),
            })?;
            samples.push((lam, val));
        }
        SpectralDensity::new(samples)?.normalized()
    }
}

fn trapezoid(samples: &[(f64, f64)]) -> f64 {
    samples
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum()
}

/// Temperature response of one down-conversion crystal: the signal spectrum
/// is Gaussian with fixed width, and its center tunes linearly away from the
/// reference point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrystalConfig {
    /// Signal center wavelength at `temp_ref_c`.
    pub center_wavelength_nm: f64,
    /// Reference temperature for `center_wavelength_nm`.
    pub temp_ref_c: f64,
    /// Linear tuning coefficient of the center wavelength.
    pub dlambda_dt_nm_per_c: f64,
    /// Full width at half maximum of the signal spectrum.
    pub fwhm_nm: f64,
}

impl CrystalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.fwhm_nm <= 0.0 || !self.fwhm_nm.is_finite() {
            return Err(Error::invalid_argument(format!(
                "crystal fwhm must be positive, got {}",
                self.fwhm_nm
            )));
        }
        if !(self.center_wavelength_nm.is_finite()
            && self.temp_ref_c.is_finite()
            && self.dlambda_dt_nm_per_c.is_finite())
        {
            return Err(Error::invalid_argument(
                "non-finite crystal parameter".to_string(),
            ));
        }
        Ok(())
    }

    /// Center wavelength at an operating temperature.
    pub fn center_at(&self, temperature_c: f64) -> f64 {
        self.center_wavelength_nm + self.dlambda_dt_nm_per_c * (temperature_c - self.temp_ref_c)
    }
}

/// Unit-area Gaussian signal spectrum of `crystal` at `temperature_c`,
/// sampled on `grid`.
///
/// The grid must capture essentially all of the line: if the raw trapezoidal
/// integral of the analytic unit Gaussian falls below 0.999 the grid is
/// rejected as truncating. The returned samples are renormalized so their
/// trapezoidal integral is exactly 1.
pub fn signal_spectrum(
    crystal: &CrystalConfig,
    temperature_c: f64,
    grid: &WavelengthGrid,
) -> Result<SpectralDensity> {
    crystal.validate()?;
    let center = crystal.center_at(temperature_c);
    let sigma = crystal.fwhm_nm / (8.0 * std::f64::consts::LN_2).sqrt();
    let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    let samples: Vec<(f64, f64)> = grid
        .points()
        .into_iter()
        .map(|lam| {
            let u = (lam - center) / sigma;
            (lam, norm * (-0.5 * u * u).exp())
        })
        .collect();
    let spectrum = SpectralDensity::new(samples)?;
    let captured = spectrum.integral();
    if captured < 0.999 {
        return Err(Error::Truncation { integral: captured });
    }
    spectrum.normalized()
}

/// Root-spectral overlap `O = ∫ √S₁(λ) √S₂(λ) dλ` between two unit-area
/// spectra, evaluated trapezoidally on the union of the two sample grids
/// (linear interpolation, zero outside each spectrum's support).
///
/// By Cauchy–Schwarz `O ∈ [0, 1]`, with 1 exactly for identical spectra.
pub fn spectral_overlap(s1: &SpectralDensity, s2: &SpectralDensity) -> Result<f64> {
    for s in [s1, s2] {
        let area = s.integral();
        if (area - 1.0).abs() > 1e-6 {
            return Err(Error::Normalization { integral: area });
        }
    }
    let mut lambdas: Vec<f64> = s1
        .samples()
        .iter()
        .chain(s2.samples().iter())
        .map(|&(l, _)| l)
        .collect();
    lambdas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    lambdas.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let integrand: Vec<(f64, f64)> = lambdas
        .into_iter()
        .map(|l| {
            let v = (s1.value_at(l).max(0.0) * s2.value_at(l).max(0.0)).sqrt();
            (l, v)
        })
        .collect();
    let overlap = trapezoid(&integrand);
    if !(-1e-9..=1.0 + 1e-9).contains(&overlap) {
        return Err(Error::out_of_range("spectral overlap", overlap, 0.0, 1.0));
    }
    Ok(overlap.clamp(0.0, 1.0))
}

/// Source emission parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceConfig {
    /// Pump phase `φ` between the `|HH⟩` and `|VV⟩` amplitudes.
    pub phase_rad: f64,
    /// Root-spectral overlap `O` of the two signal spectra.
    pub overlap: f64,
    /// Purity weight `v` of the two-photon state against white noise.
    pub purity_weight: f64,
    /// Detected coincidence rate of the source at unit efficiency.
    pub pair_rate_hz: f64,
}

impl SourceConfig {
    pub fn validate(&self) -> Result<()> {
        check_unit_interval("overlap", self.overlap)?;
        check_unit_interval("purity_weight", self.purity_weight)?;
        if !self.phase_rad.is_finite() {
            return Err(Error::invalid_argument("phase must be finite".to_string()));
        }
        if self.pair_rate_hz < 0.0 || !self.pair_rate_hz.is_finite() {
            return Err(Error::invalid_argument(format!(
                "pair rate must be non-negative, got {}",
                self.pair_rate_hz
            )));
        }
        Ok(())
    }

    pub fn state(&self) -> Result<DensityMatrix> {
        source_state(self.overlap, self.purity_weight, self.phase_rad)
    }
}

fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) || !v.is_finite() {
        return Err(Error::out_of_range(name, v, 0.0, 1.0));
    }
    Ok(())
}

/// Emitted two-qubit state `ρ = v·ρ_O(φ) + (1 − v)·I/4`.
///
/// At `O = 1, v = 1` this is the pure `|Φ^φ⟩`; lowering `O` decoheres only
/// the HH–VV off-diagonal block, lowering `v` admixes white noise.
pub fn source_state(overlap: f64, purity_weight: f64, phase_rad: f64) -> Result<DensityMatrix> {
    check_unit_interval("overlap", overlap)?;
    check_unit_interval("purity_weight", purity_weight)?;
    if !phase_rad.is_finite() {
        return Err(Error::invalid_argument("phase must be finite".to_string()));
    }
    let v = purity_weight;
    let mut m = Mat4::identity() * c((1.0 - v) / 4.0, 0.0);
    m[(0, 0)] += c(v / 2.0, 0.0);
    m[(3, 3)] += c(v / 2.0, 0.0);
    let coherence = C64::from_polar(v * overlap / 2.0, -phase_rad);
    m[(0, 3)] += coherence; // ⟨HH|ρ|VV⟩ = (vO/2)·e^{−iφ}
    m[(3, 0)] += coherence.conj();
    DensityMatrix::new(m)
}

/// Closed-form tangle of [`source_state`]:
/// the concurrence of this X-shaped state is `max(0, vO − (1 − v)/2)`.
pub fn pair_tangle(overlap: f64, purity_weight: f64) -> Result<f64> {
    check_unit_interval("overlap", overlap)?;
    check_unit_interval("purity_weight", purity_weight)?;
    let cc = (purity_weight * overlap - (1.0 - purity_weight) / 2.0).max(0.0);
    Ok(cc * cc)
}

/// Invert [`pair_tangle`] for the purity weight that reaches `target_tangle`
/// at a given overlap: `v = (2√𝒯 + 1)/(2O + 1)`.
pub fn purity_for_target_tangle(target_tangle: f64, overlap: f64) -> Result<f64> {
    check_unit_interval("target_tangle", target_tangle)?;
    check_unit_interval("overlap", overlap)?;
    let v = (2.0 * target_tangle.sqrt() + 1.0) / (2.0 * overlap + 1.0);
    if v > 1.0 + 1e-12 {
        return Err(Error::out_of_range(
            "purity weight for requested tangle",
            v,
            0.0,
            1.0,
        ));
    }
    Ok(v.min(1.0))
}
