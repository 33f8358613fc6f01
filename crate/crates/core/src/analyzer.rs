//! Polarization analyzers: waveplate settings, coincidence counting, and
//! visibility curves.
//!
//! Each analyzer is a quarter-wave plate followed by a half-wave plate and a
//! polarizing beam splitter whose transmitted port is `|H⟩`. Light therefore
//! sees `J = J_HWP(h) · J_QWP(q)`, and the analyzer transmits the state that
//! `J` maps onto `|H⟩`; the projection state is `J† |H⟩`. Waveplate angles
//! are fast-axis angles from horizontal, with retarder Jones matrices
//! `R(θ) · diag(1, i or −1) · R(−θ)`.
//!
//! Counting is Poissonian: for a source emitting detected pairs at
//! `pair_rate · efficiency_product`, the four coincidence channels of a
//! basis pair `(a, b)` each draw from an independent Poisson law with mean
//! `pair_rate · efficiency_product · p · duration + accidental_mean`, where
//! `p` is the corresponding quantum coincidence probability and the
//! accidentals model gated dark coincidences, split evenly over channels.

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{
    bloch_from_ket, c, coincidence_probability, ket_from_bloch, BlochVector, DensityMatrix, Ket2,
    Mat2, MeasurementBasis,
};
use crate::rng::{derived_seed, seeded_rng};

// ---------------------------------------------------------------------------
// Jones calculus
// ---------------------------------------------------------------------------

fn rotation(theta: f64) -> Mat2 {
    let (s, co) = theta.sin_cos();
    Mat2::new(c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0))
}

/// Quarter-wave plate with fast axis at `theta` from horizontal.
pub fn qwp_jones(theta: f64) -> Mat2 {
    rotation(theta)
        * Mat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0))
        * rotation(-theta)
}

/// Half-wave plate with fast axis at `theta` from horizontal.
pub fn hwp_jones(theta: f64) -> Mat2 {
    rotation(theta)
        * Mat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0))
        * rotation(-theta)
}

/// Waveplate pair that projects an analyzer onto one Bloch direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveplateAngles {
    /// Quarter-wave plate fast-axis angle, radians in `[0, π)`.
    pub qwp_rad: f64,
    /// Half-wave plate fast-axis angle, radians in `[0, π)`.
    pub hwp_rad: f64,
}

fn wrap_half_turn(theta: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let mut t = theta % pi;
    if t < 0.0 {
        t += pi;
    }
    if t >= pi {
        t -= pi;
    }
    t
}

/// Waveplate angles that make the analyzer project onto the state with
/// Bloch vector `target`.
///
/// The QWP fast axis is aligned with the polarization-ellipse axes of the
/// target (angle `½·atan2(n_x, n_z)` from horizontal), converting the target
/// to a linear state; the HWP then rotates that linear state onto `|H⟩`.
pub fn waveplate_angles(target: BlochVector) -> WaveplateAngles {
    let qwp = 0.5 * target.x.atan2(target.z);
    let intermediate: Ket2 = qwp_jones(qwp) * ket_from_bloch(target);
    // The intermediate state is linear (Bloch y ≈ 0); read its angle in the
    // linear-polarization circle and halve it for the HWP.
    let n = bloch_from_ket(&intermediate).expect("waveplate input is a unit ket");
    debug_assert!(n.y.abs() < 1e-9, "QWP should linearize the target");
    let linear_angle = 0.5 * n.x.atan2(n.z);
    WaveplateAngles {
        qwp_rad: wrap_half_turn(qwp),
        hwp_rad: wrap_half_turn(linear_angle / 2.0),
    }
}

/// Bloch vector of the state a QWP–HWP–PBS analyzer projects onto, given the
/// two fast-axis angles. Inverse of [`waveplate_angles`].
pub fn bloch_from_waveplates(qwp_rad: f64, hwp_rad: f64) -> BlochVector {
    let j = hwp_jones(hwp_rad) * qwp_jones(qwp_rad);
    let h = Ket2::new(c(1.0, 0.0), c(0.0, 0.0));
    let projected = j.adjoint() * h;
    bloch_from_ket(&projected).expect("unitary image of |H⟩ is a unit ket")
}

// ---------------------------------------------------------------------------
// Detectors and coincidence counting
// ---------------------------------------------------------------------------

/// Detection-chain parameters for the two arms: arm A is free-running, arm B
/// is gated by A's singles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Singles rate on arm A that triggers the gate.
    pub singles_rate_a_hz: f64,
    /// Dark-count rate of the arm-A detector.
    pub dark_rate_a_hz: f64,
    /// Dark-count probability per nanosecond of the gated arm-B detector.
    pub dark_prob_b_per_ns: f64,
    /// Coincidence window in nanoseconds.
    pub coincidence_window_ns: f64,
    /// Product of all collection/detection efficiencies applied to the pair rate.
    pub efficiency_product: f64,
}

impl DetectorConfig {
    /// Noise-free unit-efficiency detectors.
    pub fn noiseless() -> Self {
        DetectorConfig {
            singles_rate_a_hz: 0.0,
            dark_rate_a_hz: 0.0,
            dark_prob_b_per_ns: 0.0,
            coincidence_window_ns: 1.0,
            efficiency_product: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("singles_rate_a_hz", self.singles_rate_a_hz),
            ("dark_rate_a_hz", self.dark_rate_a_hz),
            ("dark_prob_b_per_ns", self.dark_prob_b_per_ns),
            ("coincidence_window_ns", self.coincidence_window_ns),
        ] {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::invalid_argument(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.efficiency_product) {
            return Err(Error::out_of_range(
                "efficiency_product",
                self.efficiency_product,
                0.0,
                1.0,
            ));
        }
        Ok(())
    }

    /// Expected accidental coincidences per channel over `duration_s`:
    /// every arm-A single opens a `coincidence_window_ns` gate in which the
    /// arm-B detector may fire darkly; the resulting accidentals are split
    /// evenly over the four coincidence channels.
    pub fn accidental_mean(&self, duration_s: f64) -> f64 {
        self.singles_rate_a_hz * self.dark_prob_b_per_ns * self.coincidence_window_ns * duration_s
            / 4.0
    }
}

/// Raw coincidence counts of one basis pair: the four analyzer output
/// combinations, plus the acquisition metadata needed to re-derive rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub setting_a: String,
    pub setting_b: String,
    pub c_ab: u64,
    pub c_aperp_b: u64,
    pub c_a_bperp: u64,
    pub c_aperp_bperp: u64,
    pub duration_s: f64,
    pub seed: u64,
}

impl CountRecord {
    pub fn total(&self) -> u64 {
        self.c_ab + self.c_aperp_b + self.c_a_bperp + self.c_aperp_bperp
    }
}

/// CSV header for count records.
pub const COUNT_CSV_HEADER: &str =
    "setting_a,setting_b,c_ab,c_aperp_b,c_a_bperp,c_aperp_bperp,duration_s,seed";

/// Serialize records to the canonical CSV layout.
pub fn write_count_records(records: &[CountRecord]) -> String {
    let mut out = String::from(COUNT_CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.setting_a,
            r.setting_b,
            r.c_ab,
            r.c_aperp_b,
            r.c_a_bperp,
            r.c_aperp_bperp,
            r.duration_s,
            r.seed
        ));
    }
    out
}

/// Parse the canonical count-record CSV, reporting 1-based line numbers on
/// failure. The header line is required.
pub fn read_count_records(text: &str) -> Result<Vec<CountRecord>> {
    let mut records = Vec::new();
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == COUNT_CSV_HEADER => {}
        Some((_, header)) => {
            return Err(Error::Parse {
                line: 1,
                message: format!("unexpected header {header:?}"),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty count file".to_string(),
            })
        }
    }
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 8 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 8 fields, found {}", f.len()),
            });
        }
        let parse_u64 = |s: &str, what: &str| -> Result<u64> {
            s.parse().map_err(|e| Error::Parse {
                line: lineno,
                message: format!("bad {what} {s:?}: {e}"),
            })
        };
        let duration_s: f64 = f[6].parse().map_err(|e| Error::Parse {
            line: lineno,
            message: format!("bad duration {:?}: {e}", f[6]),
        })?;
        records.push(CountRecord {
            setting_a: f[0].to_string(),
            setting_b: f[1].to_string(),
            c_ab: parse_u64(f[2], "count")?,
            c_aperp_b: parse_u64(f[3], "count")?,
            c_a_bperp: parse_u64(f[4], "count")?,
            c_aperp_bperp: parse_u64(f[5], "count")?,
            duration_s,
            seed: parse_u64(f[7], "seed")?,
        });
    }
    Ok(records)
}

fn sample_poisson(rng: &mut impl Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let dist = rand_distr::Poisson::new(mean).expect("positive finite Poisson mean");
    dist.sample(rng) as u64
}

/// Simulate one coincidence acquisition of the basis pair `(a, b)`.
///
/// The four channels `(a,b)`, `(a⊥,b)`, `(a,b⊥)`, `(a⊥,b⊥)` are drawn, in
/// that order, from independent Poisson laws with mean
/// `pair_rate_hz · efficiency_product · p · duration_s + accidental_mean`.
/// The same seed always reproduces the same record.
pub fn simulate_counts(
    rho: &DensityMatrix,
    a: &MeasurementBasis,
    b: &MeasurementBasis,
    pair_rate_hz: f64,
    det: &DetectorConfig,
    duration_s: f64,
    seed: u64,
) -> Result<CountRecord> {
    det.validate()?;
    if pair_rate_hz < 0.0 || !pair_rate_hz.is_finite() {
        return Err(Error::invalid_argument(format!(
            "pair rate must be non-negative, got {pair_rate_hz}"
        )));
    }
    if duration_s <= 0.0 || !duration_s.is_finite() {
        return Err(Error::invalid_argument(format!(
            "duration must be positive, got {duration_s}"
        )));
    }
    let detected = pair_rate_hz * det.efficiency_product * duration_s;
    let accidental = det.accidental_mean(duration_s);
    let mut rng = seeded_rng(seed);
    let mut channel = |na: BlochVector, nb: BlochVector| {
        let p = coincidence_probability(rho, na, nb);
        sample_poisson(&mut rng, detected * p + accidental)
    };
    let c_ab = channel(a.axis, b.axis);
    let c_aperp_b = channel(-a.axis, b.axis);
    let c_a_bperp = channel(a.axis, -b.axis);
    let c_aperp_bperp = channel(-a.axis, -b.axis);
    Ok(CountRecord {
        setting_a: a.label.clone(),
        setting_b: b.label.clone(),
        c_ab,
        c_aperp_b,
        c_a_bperp,
        c_aperp_bperp,
        duration_s,
        seed,
    })
}

// ---------------------------------------------------------------------------
// Visibility scans
// ---------------------------------------------------------------------------

/// Great circle on the Bloch sphere, parameterized as
/// `n(β) = u·cos β + v·sin β` for orthonormal `u`, `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreatCircle {
    u: BlochVector,
    v: BlochVector,
}

impl GreatCircle {
    pub fn new(u: BlochVector, v: BlochVector) -> Result<Self> {
        if (u.norm() - 1.0).abs() > 1e-9 || (v.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid_argument(
                "great-circle axes must be unit vectors".to_string(),
            ));
        }
        if u.dot(v).abs() > 1e-9 {
            return Err(Error::invalid_argument(format!(
                "great-circle axes must be orthogonal (u·v = {})",
                u.dot(v)
            )));
        }
        Ok(GreatCircle { u, v })
    }

    /// The linear-polarization circle through H, +, V, −.
    pub fn linear() -> Self {
        GreatCircle {
            u: BlochVector::Z,
            v: BlochVector::X,
        }
    }

    /// The coherence circle through +, R, −, L.
    pub fn coherence() -> Self {
        GreatCircle {
            u: BlochVector::X,
            v: BlochVector::Y,
        }
    }

    /// Point at circle angle `beta` (radians).
    pub fn point(&self, beta: f64) -> BlochVector {
        let (s, co) = beta.sin_cos();
        BlochVector::normalized(
            self.u.x * co + self.v.x * s,
            self.u.y * co + self.v.y * s,
            self.u.z * co + self.v.z * s,
        )
        .expect("great-circle points are unit vectors")
    }
}

/// Scan analyzer B around a great circle with analyzer A fixed.
///
/// Returns `n_points` pairs `(θ, record)` where `θ` is the *analyzer* angle
/// in radians: the Bloch-circle angle is `β = 2θ`, matching the lab
/// convention that rotating a polarization analyzer by `θ` moves its Bloch
/// vector by `2θ`. Points are equally spaced over a full Bloch revolution
/// (`θ ∈ [0, π)`), each drawn with its own derived seed.
#[allow(clippy::too_many_arguments)]
pub fn visibility_scan(
    rho: &DensityMatrix,
    fixed_a: &MeasurementBasis,
    circle: &GreatCircle,
    n_points: usize,
    pair_rate_hz: f64,
    det: &DetectorConfig,
    duration_s: f64,
    seed: u64,
) -> Result<Vec<(f64, CountRecord)>> {
    if n_points < 8 {
        return Err(Error::invalid_argument(format!(
            "a visibility scan needs at least 8 points, got {n_points}"
        )));
    }
    let mut out = Vec::with_capacity(n_points);
    for k in 0..n_points {
        let beta = std::f64::consts::TAU * k as f64 / n_points as f64;
        let theta = beta / 2.0;
        let b = MeasurementBasis::new(
            format!("scan@{:.3}deg", theta.to_degrees()),
            circle.point(beta),
        );
        let record = simulate_counts(
            rho,
            fixed_a,
            &b,
            pair_rate_hz,
            det,
            duration_s,
            derived_seed(seed, k as u64),
        )?;
        out.push((theta, record));
    }
    Ok(out)
}

/// Sinusoidal visibility fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityFit {
    /// Fringe visibility `V ∈ [0, 1]`.
    pub visibility: f64,
    /// 1σ uncertainty on `V` from the weighted-fit covariance.
    pub visibility_err: f64,
    /// Mean count level `A`.
    pub amplitude: f64,
    /// Fringe phase `θ₀` in radians, in `[0, π)`.
    pub phase_offset_rad: f64,
}

/// Weighted least-squares fit of coincidence counts to
/// `C(θ) = A·(1 + V·cos 2(θ − θ₀))`.
///
/// The model is linear in `(A, A·V·cos 2θ₀, A·V·sin 2θ₀)`, so the fit is a
/// single weighted normal-equations solve with Poisson weights `1/max(C, 1)`.
/// Flat data yields `V = 0` with a correspondingly large uncertainty rather
/// than an error.
pub fn fit_visibility(points: &[(f64, f64)]) -> Result<VisibilityFit> {
    if points.len() < 8 {
        return Err(Error::invalid_argument(format!(
            "visibility fit needs at least 8 points, got {}",
            points.len()
        )));
    }
    if let Some((theta, count)) = points
        .iter()
        .find(|(t, cnt)| !t.is_finite() || !cnt.is_finite() || *cnt < 0.0)
    {
        return Err(Error::invalid_argument(format!(
            "bad scan point (θ = {theta}, count = {count})"
        )));
    }
    let mut xtwx = nalgebra::Matrix3::<f64>::zeros();
    let mut xtwy = nalgebra::Vector3::<f64>::zeros();
    for &(theta, count) in points {
        let row = nalgebra::Vector3::new(1.0, (2.0 * theta).cos(), (2.0 * theta).sin());
        let w = 1.0 / count.max(1.0);
        xtwx += row * row.transpose() * w;
        xtwy += row * (w * count);
    }
    let chol = nalgebra::linalg::Cholesky::new(xtwx)
        .ok_or_else(|| Error::invalid_argument("singular visibility design matrix".to_string()))?;
    let beta = chol.solve(&xtwy);
    let cov = chol.inverse();
    let (a, bc, bs) = (beta[0], beta[1], beta[2]);
    if a <= 0.0 {
        // All-zero (or pathological) data: no fringe information at all.
        return Ok(VisibilityFit {
            visibility: 0.0,
            visibility_err: 1.0,
            amplitude: a.max(0.0),
            phase_offset_rad: 0.0,
        });
    }
    let r = (bc * bc + bs * bs).sqrt();
    // Below the noise scale of the fringe coefficients the phase and the
    // delta-method gradient are undefined: report V = 0 with the coefficient
    // noise as the uncertainty.
    let coeff_noise2 = cov[(1, 1)] + cov[(2, 2)];
    if r * r <= coeff_noise2 {
        return Ok(VisibilityFit {
            visibility: 0.0,
            visibility_err: (coeff_noise2.sqrt() / a).max(f64::MIN_POSITIVE),
            amplitude: a,
            phase_offset_rad: 0.0,
        });
    }
    let visibility = (r / a).clamp(0.0, 1.0);
    // Delta method for V = √(Bc² + Bs²)/A.
    let g = nalgebra::Vector3::new(-r / (a * a), bc / (a * r), bs / (a * r));
    let var = (g.transpose() * cov * g)[(0, 0)].max(0.0);
    Ok(VisibilityFit {
        visibility,
        visibility_err: var.sqrt(),
        amplitude: a,
        phase_offset_rad: wrap_half_turn(0.5 * bs.atan2(bc)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{phi_state, tangle};
    use crate::source::source_state;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn waveplate_angles_for_named_targets() {
        // Projecting onto |H⟩ needs no waveplate action at all.
        let wp = waveplate_angles(BlochVector::Z);
        assert_relative_eq!(wp.qwp_rad, 0.0, epsilon = 1e-12);
        assert_relative_eq!(wp.hwp_rad, 0.0, epsilon = 1e-12);
        // |+⟩: both plates at 45°/22.5°... the QWP aligns with the diagonal.
        let wp = waveplate_angles(BlochVector::X);
        assert_relative_eq!(wp.qwp_rad, std::f64::consts::FRAC_PI_4, epsilon = 1e-12);
        assert_relative_eq!(wp.hwp_rad, std::f64::consts::PI / 8.0, epsilon = 1e-12);
        // |V⟩ via HWP at 45° with QWP on axis (π/2 ≡ vertical fast axis).
        let v = bloch_from_waveplates(0.0, std::f64::consts::FRAC_PI_4);
        assert_relative_eq!(v.z, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn hwp_at_zero_and_quarter_turn() {
        let h = Ket2::new(c(1.0, 0.0), c(0.0, 0.0));
        // HWP at 45° swaps H and V.
        let out = hwp_jones(std::f64::consts::FRAC_PI_4) * h;
        assert_relative_eq!(out[1].re, 1.0, epsilon = 1e-12);
        // QWP at 45° sends H to a circular state.
        let out = qwp_jones(std::f64::consts::FRAC_PI_4) * h;
        let n = bloch_from_ket(&out).unwrap();
        assert!(
            n.y.abs() > 1.0 - 1e-9,
            "expected circular output, got {n:?}"
        );
    }

    proptest! {
        #[test]
        fn waveplate_round_trip(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
            let n2 = x*x + y*y + z*z;
            prop_assume!(n2 > 1e-4);
            let target = BlochVector::normalized(x, y, z).unwrap();
            let wp = waveplate_angles(target);
            let back = bloch_from_waveplates(wp.qwp_rad, wp.hwp_rad);
            prop_assert!((back.x - target.x).abs() < 1e-9);
            prop_assert!((back.y - target.y).abs() < 1e-9);
            prop_assert!((back.z - target.z).abs() < 1e-9);
        }
    }

    #[test]
    fn angles_stay_in_half_turn_range() {
        let mut rng = crate::rng::seeded_rng(21);
        for _ in 0..200 {
            use rand::Rng;
            let n = BlochVector::normalized(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let Ok(n) = n else { continue };
            let wp = waveplate_angles(n);
            assert!((0.0..std::f64::consts::PI).contains(&wp.qwp_rad));
            assert!((0.0..std::f64::consts::PI).contains(&wp.hwp_rad));
        }
    }

    #[test]
    fn counts_are_deterministic_per_seed() {
        let rho = source_state(1.0, 0.97, 0.0).unwrap();
        let a = MeasurementBasis::new("H", BlochVector::Z);
        let b = MeasurementBasis::new("H", BlochVector::Z);
        let det = DetectorConfig::noiseless();
        let r1 = simulate_counts(&rho, &a, &b, 500.0, &det, 40.0, 7).unwrap();
        let r2 = simulate_counts(&rho, &a, &b, 500.0, &det, 40.0, 7).unwrap();
        assert_eq!(r1, r2);
        let r3 = simulate_counts(&rho, &a, &b, 500.0, &det, 40.0, 8).unwrap();
        assert_ne!(r1, r3, "different seeds should differ");
    }

    #[test]
    fn count_means_track_probabilities() {
        // High statistics: relative fluctuation ~ 1/√N ≈ 0.4%.
        let rho = DensityMatrix::from_pure(&phi_state(0.0)).unwrap();
        let a = MeasurementBasis::new("H", BlochVector::Z);
        let b = MeasurementBasis::new("H", BlochVector::Z);
        let det = DetectorConfig::noiseless();
        let rec = simulate_counts(&rho, &a, &b, 5000.0, &det, 100.0, 3).unwrap();
        let total = rec.total() as f64;
        assert!((total - 500_000.0).abs() < 5000.0, "total {total}");
        // Perfect correlations: cross channels empty.
        assert_eq!(rec.c_aperp_b, 0);
        assert_eq!(rec.c_a_bperp, 0);
        let frac = rec.c_ab as f64 / total;
        assert!((frac - 0.5).abs() < 0.01, "c_ab fraction {frac}");
    }

    #[test]
    fn accidentals_lift_all_channels() {
        let rho = DensityMatrix::from_pure(&phi_state(0.0)).unwrap();
        let a = MeasurementBasis::new("H", BlochVector::Z);
        let b = MeasurementBasis::new("H", BlochVector::Z);
        let det = DetectorConfig {
            singles_rate_a_hz: 20_000.0,
            dark_rate_a_hz: 40.0,
            dark_prob_b_per_ns: 5e-5,
            coincidence_window_ns: 4.0,
            efficiency_product: 1.0,
        };
        // accidental mean per channel = 2e4·5e-5·4·100/4 = 100
        assert_relative_eq!(det.accidental_mean(100.0), 100.0, epsilon = 1e-9);
        let rec = simulate_counts(&rho, &a, &b, 500.0, &det, 100.0, 5).unwrap();
        // The cross channels are fed only by accidentals: Poisson(100).
        assert!(
            rec.c_aperp_b > 50 && rec.c_aperp_b < 160,
            "{}",
            rec.c_aperp_b
        );
        assert!(
            rec.c_a_bperp > 50 && rec.c_a_bperp < 160,
            "{}",
            rec.c_a_bperp
        );
    }

    #[test]
    fn zero_rate_gives_zero_counts() {
        let rho = DensityMatrix::maximally_mixed();
        let a = MeasurementBasis::new("H", BlochVector::Z);
        let b = MeasurementBasis::new("+", BlochVector::X);
        let det = DetectorConfig::noiseless();
        let rec = simulate_counts(&rho, &a, &b, 0.0, &det, 10.0, 1).unwrap();
        assert_eq!(rec.total(), 0);
    }

    #[test]
    fn count_csv_round_trip() {
        let rho = source_state(0.9, 1.0, 0.0).unwrap();
        let det = DetectorConfig::noiseless();
        let a = MeasurementBasis::new("H", BlochVector::Z);
        let records: Vec<CountRecord> = (0..3)
            .map(|k| {
                let b = MeasurementBasis::new(format!("b{k}"), BlochVector::X);
                simulate_counts(&rho, &a, &b, 500.0, &det, 40.0, derived_seed(9, k)).unwrap()
            })
            .collect();
        let text = write_count_records(&records);
        let back = read_count_records(&text).unwrap();
        assert_eq!(records, back);
    }

    #[test]
    fn count_csv_errors_carry_line_numbers() {
        let text = format!("{COUNT_CSV_HEADER}\nH,V,1,2,3,4,40.0,7\nH,V,1,2,nope,4,40.0,7\n");
        match read_count_records(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn ideal_visibility_fits_to_one() {
        // Noiseless expected counts on the linear circle for a perfect pair.
        let rho = DensityMatrix::from_pure(&phi_state(0.0)).unwrap();
        let circle = GreatCircle::linear();
        let n = 24;
        let points: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let beta = std::f64::consts::TAU * k as f64 / n as f64;
                let p = coincidence_probability(&rho, BlochVector::Z, circle.point(beta));
                (beta / 2.0, 20_000.0 * p)
            })
            .collect();
        let fit = fit_visibility(&points).unwrap();
        assert!(
            (fit.visibility - 1.0).abs() < 1e-4,
            "V = {}",
            fit.visibility
        );
        assert_relative_eq!(fit.phase_offset_rad, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn scan_plus_fit_recovers_reduced_visibility() {
        // v < 1 lowers the linear-circle visibility to exactly v.
        let v = 0.9;
        let rho = source_state(1.0, v, 0.0).unwrap();
        let a = MeasurementBasis::new("H", BlochVector::Z);
        let det = DetectorConfig::noiseless();
        let scan =
            visibility_scan(&rho, &a, &GreatCircle::linear(), 16, 2000.0, &det, 40.0, 11).unwrap();
        let points: Vec<(f64, f64)> = scan.iter().map(|(t, r)| (*t, r.c_ab as f64)).collect();
        let fit = fit_visibility(&points).unwrap();
        assert!(
            (fit.visibility - v).abs() < 4.0 * fit.visibility_err.max(1e-3),
            "V = {} ± {}, expected {v}",
            fit.visibility,
            fit.visibility_err
        );
    }

    #[test]
    fn phase_offset_is_recovered() {
        let n = 32;
        let theta0 = 0.35;
        let points: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let theta = std::f64::consts::PI * k as f64 / n as f64;
                (theta, 5000.0 * (1.0 + 0.8 * (2.0 * (theta - theta0)).cos()))
            })
            .collect();
        let fit = fit_visibility(&points).unwrap();
        assert_relative_eq!(fit.visibility, 0.8, epsilon = 1e-9);
        assert_relative_eq!(fit.phase_offset_rad, theta0, epsilon = 1e-9);
        assert_relative_eq!(fit.amplitude, 5000.0, epsilon = 1e-6);
    }

    #[test]
    fn flat_data_fits_to_zero_visibility() {
        let points: Vec<(f64, f64)> = (0..16)
            .map(|k| (std::f64::consts::PI * k as f64 / 16.0, 1000.0))
            .collect();
        let fit = fit_visibility(&points).unwrap();
        assert_eq!(fit.visibility, 0.0);
        assert!(fit.visibility_err > 0.0);
    }

    #[test]
    fn degenerate_circle_and_short_scans_are_rejected() {
        assert!(GreatCircle::new(BlochVector::Z, BlochVector::Z).is_err());
        assert!(fit_visibility(&[(0.0, 1.0); 4]).is_err());
        let rho = DensityMatrix::maximally_mixed();
        let a = MeasurementBasis::new("H", BlochVector::Z);
        let det = DetectorConfig::noiseless();
        assert!(visibility_scan(&rho, &a, &GreatCircle::linear(), 4, 500.0, &det, 1.0, 0).is_err());
    }

    #[test]
    fn coherence_circle_visibility_reads_v_times_overlap() {
        let (o, v) = (0.9, 0.97);
        let rho = source_state(o, v, 0.0).unwrap();
        let a = MeasurementBasis::new("+", BlochVector::X);
        let circle = GreatCircle::coherence();
        let n = 24;
        let points: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let beta = std::f64::consts::TAU * k as f64 / n as f64;
                let p = coincidence_probability(&rho, a.axis, circle.point(beta));
                (beta / 2.0, 10_000.0 * p)
            })
            .collect();
        let fit = fit_visibility(&points).unwrap();
        assert!(
            (fit.visibility - o * v).abs() < 1e-9,
            "coherence-circle visibility {} should equal v·O = {}",
            fit.visibility,
            o * v
        );
        // Consistency: the same state's tangle obeys the closed form.
        assert_relative_eq!(
            tangle(&rho),
            crate::source::pair_tangle(o, v).unwrap(),
            epsilon = 1e-9
        );
    }
}
