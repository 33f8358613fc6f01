//! CHSH, (2,3) Bell, and Leggett inequality evaluation.
//!
//! All settings are fixed Bloch directions chosen so that the ideal
//! `(|HH⟩ + |VV⟩)/√2` state saturates each quantum bound:
//!
//! * CHSH: four directions in the z–x plane; `S ≤ 2` for LHV models,
//!   `S = 2√2` on the ideal state.
//! * (2,3) Bell: three orthogonal axes against four cube diagonals;
//!   `S ≤ 6` for LHV models, `S = 4√3` on the ideal state.
//! * Leggett `L₃`: three analyzer planes with Bob offset by `±φ/2`;
//!   non-local-hidden-variable bound `2 − (2/3)|sin(φ/2)|`, quantum value
//!   `2·cos(φ/2)`.
//!
//! Correlation coefficients come from four-channel coincidence counts,
//! `E = (c_ab + c_a⊥b⊥ − c_a⊥b − c_ab⊥) / N`, with a Poissonian
//! uncertainty propagated per channel.

use serde::{Deserialize, Serialize};

use crate::analyzer::CountRecord;
use crate::error::{Error, Result};
use crate::quantum::{correlation_expectation, BlochVector, DensityMatrix, MeasurementBasis};

/// Correlation totals below this are flagged as statistically weak.
pub const LOW_STATISTICS_TOTAL: u64 = 100;

// ---------------------------------------------------------------------------
// Correlation coefficients
// ---------------------------------------------------------------------------

/// A correlation coefficient `E(a, b) ∈ [−1, 1]` with its 1σ uncertainty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub value: f64,
    /// 1σ uncertainty; zero for exact (infinite-statistics) values.
    pub uncertainty: f64,
    pub label_a: String,
    pub label_b: String,
    /// True when the estimate comes from fewer than
    /// [`LOW_STATISTICS_TOTAL`] total coincidences.
    pub low_statistics: bool,
}

impl CorrelationEstimate {
    pub fn new(
        value: f64,
        uncertainty: f64,
        label_a: impl Into<String>,
        label_b: impl Into<String>,
    ) -> Self {
        CorrelationEstimate {
            value,
            uncertainty,
            label_a: label_a.into(),
            label_b: label_b.into(),
            low_statistics: false,
        }
    }

    /// An exact correlation (zero uncertainty), e.g. a model expectation.
    pub fn exact(value: f64, label_a: impl Into<String>, label_b: impl Into<String>) -> Self {
        CorrelationEstimate::new(value, 0.0, label_a, label_b)
    }
}

/// Estimate `E(a, b)` from the four coincidence channels of one record.
///
/// With `P = c_ab + c_a⊥b⊥` (agreements), `M = c_a⊥b + c_ab⊥`
/// (disagreements) and `N = P + M`:
///
/// `E = (P − M)/N`, `ΔE = √[(1−E)²·P + (1+E)²·M] / N`,
///
/// the first-order propagation of independent Poissonian channel errors.
pub fn correlation_from_counts(record: &CountRecord) -> Result<CorrelationEstimate> {
    let total = record.total();
    if total == 0 {
        return Err(Error::UndefinedCorrelation);
    }
    let p = (record.c_ab + record.c_aperp_bperp) as f64;
    let m = (record.c_aperp_b + record.c_a_bperp) as f64;
    let n = p + m;
    let e = (p - m) / n;
    let de = ((1.0 - e).powi(2) * p + (1.0 + e).powi(2) * m).sqrt() / n;
    Ok(CorrelationEstimate {
        value: e,
        uncertainty: de,
        label_a: record.setting_a.clone(),
        label_b: record.setting_b.clone(),
        low_statistics: total < LOW_STATISTICS_TOTAL,
    })
}

/// Exact model correlation `Tr[ρ (n̂_a·σ) ⊗ (n̂_b·σ)]` wrapped as an
/// estimate with zero uncertainty.
pub fn exact_correlation(
    rho: &DensityMatrix,
    a: &MeasurementBasis,
    b: &MeasurementBasis,
) -> CorrelationEstimate {
    CorrelationEstimate::exact(
        correlation_expectation(rho, a, b),
        a.label.clone(),
        b.label.clone(),
    )
}

fn significance(excess: f64, uncertainty: f64) -> f64 {
    if uncertainty > 0.0 {
        excess / uncertainty
    } else if excess > 0.0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    }
}

// ---------------------------------------------------------------------------
// CHSH
// ---------------------------------------------------------------------------

/// The CHSH measurement directions, all in the z–x (linear-polarization)
/// plane: Alice at Bloch angles 0° and 90°, Bob at 45° and 135°.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshSettings {
    pub alice: [MeasurementBasis; 2],
    pub bob: [MeasurementBasis; 2],
}

impl ChshSettings {
    /// The four `(aᵢ, bⱼ)` coincidence settings in the order expected by
    /// [`chsh_s`]: `(a1,b1), (a1,b2), (a2,b1), (a2,b2)`.
    pub fn pairs(&self) -> [(MeasurementBasis, MeasurementBasis); 4] {
        [
            (self.alice[0].clone(), self.bob[0].clone()),
            (self.alice[0].clone(), self.bob[1].clone()),
            (self.alice[1].clone(), self.bob[0].clone()),
            (self.alice[1].clone(), self.bob[1].clone()),
        ]
    }
}

/// Standard CHSH settings. Labels give the linear analyzer angle
/// (half the Bloch angle): Alice `H/V` and `+/-`, Bob `22.5deg` and
/// `67.5deg`.
pub fn chsh_settings() -> ChshSettings {
    let half = std::f64::consts::FRAC_1_SQRT_2;
    ChshSettings {
        alice: [
            MeasurementBasis::new("H/V", BlochVector::Z),
            MeasurementBasis::new("+/-", BlochVector::X),
        ],
        bob: [
            MeasurementBasis::new("22.5deg", BlochVector::new(half, 0.0, half).unwrap()),
            MeasurementBasis::new("67.5deg", BlochVector::new(half, 0.0, -half).unwrap()),
        ],
    }
}

/// A CHSH evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshResult {
    /// `S = E(a1,b1) − E(a1,b2) + E(a2,b1) + E(a2,b2)`.
    pub s: f64,
    /// Quadrature-propagated 1σ uncertainty.
    pub uncertainty: f64,
    /// The four correlation terms, in [`ChshSettings::pairs`] order.
    pub terms: [CorrelationEstimate; 4],
    /// Local-hidden-variable bound, 2.
    pub lhv_bound: f64,
    /// Quantum (Tsirelson) bound, `2√2`.
    pub quantum_bound: f64,
}

impl ChshResult {
    /// `(S − 2)/ΔS`: positive when LHV models are violated.
    pub fn violation_sigma(&self) -> f64 {
        significance(self.s - self.lhv_bound, self.uncertainty)
    }

    /// Whether `|S|` is consistent with quantum mechanics
    /// (`|S| ≤ 2√2 + 5ΔS`, plus round-off slack so exact saturation
    /// passes). Arbitrary correlation inputs — for example algebraic
    /// extremes — can exceed this.
    pub fn is_physical(&self) -> bool {
        self.s.abs() <= self.quantum_bound + 5.0 * self.uncertainty + 1e-12
    }
}

/// Combine four correlation estimates (in [`ChshSettings::pairs`] order)
/// into a CHSH value.
pub fn chsh_s(terms: [CorrelationEstimate; 4]) -> ChshResult {
    let s = terms[0].value - terms[1].value + terms[2].value + terms[3].value;
    let ds = terms
        .iter()
        .map(|t| t.uncertainty * t.uncertainty)
        .sum::<f64>()
        .sqrt();
    ChshResult {
        s,
        uncertainty: ds,
        terms,
        lhv_bound: 2.0,
        quantum_bound: 2.0 * std::f64::consts::SQRT_2,
    }
}

/// Largest CHSH value reachable by a two-qubit state of tangle `𝒯` with
/// optimal settings: `S_max = 2√(1 + 𝒯)`.
pub fn s_max_from_tangle(tangle: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&tangle) {
        return Err(Error::out_of_range("tangle", tangle, 0.0, 1.0));
    }
    Ok(2.0 * (1.0 + tangle).sqrt())
}

// ---------------------------------------------------------------------------
// (2,3) Bell inequality: three Bloch axes against four cube diagonals
// ---------------------------------------------------------------------------

/// Sign pattern of the twelve `E(aᵢ, bⱼ)` terms, row `i` (Alice) by
/// column `j` (Bob).
pub const BB_SIGNS: [[f64; 4]; 3] = [
    [1.0, 1.0, -1.0, -1.0],
    [1.0, -1.0, 1.0, -1.0],
    [1.0, -1.0, -1.0, 1.0],
];

/// LHV bound of the (2,3) inequality.
pub const BB_LHV_BOUND: f64 = 6.0;

/// Measurement directions for the (2,3) inequality: Alice along the three
/// Bloch axes, Bob along four cube diagonals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BbSettings {
    pub alice: [MeasurementBasis; 3],
    pub bob: [MeasurementBasis; 4],
}

impl BbSettings {
    /// The twelve `(aᵢ, bⱼ)` settings, row-major in `i`, in the order
    /// expected by [`bb_s`].
    pub fn pairs(&self) -> Vec<(MeasurementBasis, MeasurementBasis)> {
        let mut out = Vec::with_capacity(12);
        for a in &self.alice {
            for b in &self.bob {
                out.push((a.clone(), b.clone()));
            }
        }
        out
    }
}

/// The settings that maximize the (2,3) expression on
/// `(|HH⟩ + |VV⟩)/√2`: Alice x̂, ŷ, ẑ; Bob the cube diagonals
/// `(1,−1,1)/√3`, `(1,1,−1)/√3`, `(−1,−1,−1)/√3`, `(−1,1,1)/√3`
/// (components in x, y, z order).
pub fn bb_settings() -> BbSettings {
    let d = |x: f64, y: f64, z: f64| BlochVector::normalized(x, y, z).unwrap();
    BbSettings {
        alice: [
            MeasurementBasis::new("x", BlochVector::X),
            MeasurementBasis::new("y", BlochVector::Y),
            MeasurementBasis::new("z", BlochVector::Z),
        ],
        bob: [
            MeasurementBasis::new("b0", d(1.0, -1.0, 1.0)),
            MeasurementBasis::new("b1", d(1.0, 1.0, -1.0)),
            MeasurementBasis::new("b2", d(-1.0, -1.0, -1.0)),
            MeasurementBasis::new("b3", d(-1.0, 1.0, 1.0)),
        ],
    }
}

/// A (2,3) Bell evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BbResult {
    /// `S = Σᵢⱼ sᵢⱼ E(aᵢ, bⱼ)` with signs [`BB_SIGNS`].
    pub s: f64,
    pub uncertainty: f64,
    /// `(S − 6)/ΔS`: positive when LHV models are violated.
    pub violation_sigma: f64,
    /// The twelve correlation terms, row-major in Alice's index.
    pub terms: Vec<CorrelationEstimate>,
    /// LHV bound, 6.
    pub lhv_bound: f64,
    /// Quantum maximum, `4√3`.
    pub quantum_bound: f64,
}

/// Combine twelve correlation estimates (row-major over
/// [`BbSettings::pairs`]) into the (2,3) Bell value.
pub fn bb_s(terms: [CorrelationEstimate; 12]) -> BbResult {
    let mut s = 0.0;
    let mut var = 0.0;
    for i in 0..3 {
        for j in 0..4 {
            let t = &terms[4 * i + j];
            s += BB_SIGNS[i][j] * t.value;
            var += t.uncertainty * t.uncertainty;
        }
    }
    let ds = var.sqrt();
    BbResult {
        s,
        uncertainty: ds,
        violation_sigma: significance(s - BB_LHV_BOUND, ds),
        terms: terms.to_vec(),
        lhv_bound: BB_LHV_BOUND,
        quantum_bound: 4.0 * 3.0_f64.sqrt(),
    }
}

/// Smallest two-qubit-Werner visibility that still violates the (2,3)
/// inequality: `6 / 4√3 = √3/2`.
pub fn bb_min_visibility() -> f64 {
    3.0_f64.sqrt() / 2.0
}

// ---------------------------------------------------------------------------
// Leggett inequality
// ---------------------------------------------------------------------------

/// Leggett `L₃` measurement plan: for each of three analyzer planes, Alice
/// measures along `aᵢ` and Bob along two directions `bᵢ, bᵢ'` rotated by
/// `±φ/2` from `aᵢ` within that plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeggettSettings {
    pub alice: [MeasurementBasis; 3],
    pub bob_pairs: [(MeasurementBasis, MeasurementBasis); 3],
    pub phi_rad: f64,
}

impl LeggettSettings {
    /// The six `(aᵢ, b)` settings in the order expected by [`leggett_l3`]:
    /// `(a1,b1), (a1,b1'), (a2,b2), (a2,b2'), (a3,b3), (a3,b3')`.
    pub fn pairs(&self) -> [(MeasurementBasis, MeasurementBasis); 6] {
        [
            (self.alice[0].clone(), self.bob_pairs[0].0.clone()),
            (self.alice[0].clone(), self.bob_pairs[0].1.clone()),
            (self.alice[1].clone(), self.bob_pairs[1].0.clone()),
            (self.alice[1].clone(), self.bob_pairs[1].1.clone()),
            (self.alice[2].clone(), self.bob_pairs[2].0.clone()),
            (self.alice[2].clone(), self.bob_pairs[2].1.clone()),
        ]
    }
}

/// Standard `L₃` settings for separation angle `φ ∈ (0, π)`:
/// `a₁ = x̂` with Bob rotated in the x–y plane, `a₂ = ŷ` rotated in the
/// y–z plane, `a₃ = ẑ` rotated in the z–x plane.
pub fn leggett_settings(phi_rad: f64) -> Result<LeggettSettings> {
    if !(phi_rad > 0.0 && phi_rad < std::f64::consts::PI) {
        return Err(Error::out_of_range(
            "phi_rad",
            phi_rad,
            0.0,
            std::f64::consts::PI,
        ));
    }
    let (sin, cos) = (phi_rad / 2.0).sin_cos();
    let v = |x: f64, y: f64, z: f64| BlochVector::new(x, y, z).unwrap();
    Ok(LeggettSettings {
        alice: [
            MeasurementBasis::new("a1", BlochVector::X),
            MeasurementBasis::new("a2", BlochVector::Y),
            MeasurementBasis::new("a3", BlochVector::Z),
        ],
        bob_pairs: [
            (
                MeasurementBasis::new("b1", v(cos, sin, 0.0)),
                MeasurementBasis::new("b1'", v(cos, -sin, 0.0)),
            ),
            (
                MeasurementBasis::new("b2", v(0.0, cos, sin)),
                MeasurementBasis::new("b2'", v(0.0, cos, -sin)),
            ),
            (
                MeasurementBasis::new("b3", v(sin, 0.0, cos)),
                MeasurementBasis::new("b3'", v(-sin, 0.0, cos)),
            ),
        ],
        phi_rad,
    })
}

/// Leggett model bound `L₃ ≤ 2 − (2/3)|sin(φ/2)|` for `φ ∈ (0, π)`.
pub fn leggett_bound(phi_rad: f64) -> Result<f64> {
    if !(phi_rad > 0.0 && phi_rad < std::f64::consts::PI) {
        return Err(Error::out_of_range(
            "phi_rad",
            phi_rad,
            0.0,
            std::f64::consts::PI,
        ));
    }
    Ok(2.0 - (2.0 / 3.0) * (phi_rad / 2.0).sin().abs())
}

/// A Leggett `L₃` evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeggettResult {
    /// `L₃ = (1/3) Σᵢ |E(aᵢ,bᵢ) + E(aᵢ,bᵢ')|`.
    pub l3: f64,
    pub uncertainty: f64,
    /// The Leggett model bound at this `φ`.
    pub bound: f64,
    pub phi_rad: f64,
    /// `(L₃ − bound)/ΔL₃`: positive when the Leggett model is violated.
    pub violation_sigma: f64,
    /// The six correlation terms, in [`LeggettSettings::pairs`] order.
    pub terms: Vec<CorrelationEstimate>,
}

/// Combine six correlation estimates (in [`LeggettSettings::pairs`] order)
/// into `L₃` and compare against the model bound at `φ`.
pub fn leggett_l3(terms: [CorrelationEstimate; 6], phi_rad: f64) -> Result<LeggettResult> {
    let bound = leggett_bound(phi_rad)?;
    let mut l3 = 0.0;
    let mut var = 0.0;
    for pair in terms.chunks_exact(2) {
        l3 += (pair[0].value + pair[1].value).abs() / 3.0;
        var += (pair[0].uncertainty.powi(2) + pair[1].uncertainty.powi(2)) / 9.0;
    }
    let dl3 = var.sqrt();
    Ok(LeggettResult {
        l3,
        uncertainty: dl3,
        bound,
        phi_rad,
        violation_sigma: significance(l3 - bound, dl3),
        terms: terms.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyzer::{simulate_counts, DetectorConfig};
    use crate::quantum::{phi_state, tangle};
    use crate::rng::seeded_rng;
    use crate::source::source_state;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn ideal_state() -> DensityMatrix {
        DensityMatrix::from_pure(&phi_state(0.0)).unwrap()
    }

    fn exact_terms<const N: usize>(
        rho: &DensityMatrix,
        pairs: &[(MeasurementBasis, MeasurementBasis)],
    ) -> [CorrelationEstimate; N] {
        let v: Vec<CorrelationEstimate> = pairs
            .iter()
            .map(|(a, b)| exact_correlation(rho, a, b))
            .collect();
        v.try_into().unwrap()
    }

    #[test]
    fn correlation_from_balanced_counts_is_zero() {
        let rec = CountRecord {
            setting_a: "a".into(),
            setting_b: "b".into(),
            c_ab: 25,
            c_aperp_b: 25,
            c_a_bperp: 25,
            c_aperp_bperp: 25,
            duration_s: 1.0,
            seed: 0,
        };
        let e = correlation_from_counts(&rec).unwrap();
        assert_relative_eq!(e.value, 0.0);
        assert_relative_eq!(e.uncertainty, 0.1);
        assert!(!e.low_statistics);
    }

    #[test]
    fn correlation_from_perfect_counts_is_one_with_zero_error() {
        let rec = CountRecord {
            setting_a: "a".into(),
            setting_b: "b".into(),
            c_ab: 50,
            c_aperp_b: 0,
            c_a_bperp: 0,
            c_aperp_bperp: 50,
            duration_s: 1.0,
            seed: 0,
        };
        let e = correlation_from_counts(&rec).unwrap();
        assert_relative_eq!(e.value, 1.0);
        assert_relative_eq!(e.uncertainty, 0.0);
    }

    #[test]
    fn correlation_flags_low_statistics_and_rejects_empty() {
        let mut rec = CountRecord {
            setting_a: "a".into(),
            setting_b: "b".into(),
            c_ab: 20,
            c_aperp_b: 20,
            c_a_bperp: 20,
            c_aperp_bperp: 20,
            duration_s: 1.0,
            seed: 0,
        };
        assert!(correlation_from_counts(&rec).unwrap().low_statistics);
        rec.c_ab = 0;
        rec.c_aperp_b = 0;
        rec.c_a_bperp = 0;
        rec.c_aperp_bperp = 0;
        assert!(matches!(
            correlation_from_counts(&rec),
            Err(Error::UndefinedCorrelation)
        ));
    }

    #[test]
    fn chsh_saturates_tsirelson_on_the_ideal_state() {
        let rho = ideal_state();
        let settings = chsh_settings();
        let terms: [CorrelationEstimate; 4] = exact_terms(&rho, &settings.pairs());
        for t in &terms {
            assert_relative_eq!(
                t.value.abs(),
                std::f64::consts::FRAC_1_SQRT_2,
                epsilon = 1e-12
            );
        }
        let result = chsh_s(terms);
        assert_relative_eq!(result.s, 2.0 * std::f64::consts::SQRT_2, epsilon = 1e-9);
        assert!(result.is_physical());
        assert_eq!(result.violation_sigma(), f64::INFINITY);
    }

    #[test]
    fn chsh_admits_algebraic_extremes_but_flags_them() {
        let e = |v: f64| CorrelationEstimate::exact(v, "a", "b");
        let result = chsh_s([e(1.0), e(-1.0), e(1.0), e(1.0)]);
        assert_relative_eq!(result.s, 4.0);
        assert!(!result.is_physical());
    }

    #[test]
    fn chsh_scales_linearly_with_werner_visibility() {
        let settings = chsh_settings();
        for v in [0.5, 0.71, 0.9, 1.0] {
            let rho = source_state(1.0, v, 0.0).unwrap();
            let terms: [CorrelationEstimate; 4] = exact_terms(&rho, &settings.pairs());
            let s = chsh_s(terms).s;
            assert_relative_eq!(s, v * 2.0 * std::f64::consts::SQRT_2, epsilon = 1e-9);
        }
    }

    #[test]
    fn tsirelson_bound_holds_for_random_states_and_settings() {
        let mut rng = seeded_rng(41);
        let quantum_bound = 2.0 * std::f64::consts::SQRT_2;
        for _ in 0..300 {
            let rho = crate::tomography::PhysicalParams::random(&mut rng).density_matrix();
            let dir = |rng: &mut rand_chacha::ChaCha8Rng| {
                let v = loop {
                    let x: f64 = rng.gen_range(-1.0..1.0);
                    let y: f64 = rng.gen_range(-1.0..1.0);
                    let z: f64 = rng.gen_range(-1.0..1.0);
                    if (x * x + y * y + z * z).sqrt() > 1e-3 {
                        break BlochVector::normalized(x, y, z).unwrap();
                    }
                };
                MeasurementBasis::new("r", v)
            };
            let (a1, a2, b1, b2) = (dir(&mut rng), dir(&mut rng), dir(&mut rng), dir(&mut rng));
            let terms = [
                exact_correlation(&rho, &a1, &b1),
                exact_correlation(&rho, &a1, &b2),
                exact_correlation(&rho, &a2, &b1),
                exact_correlation(&rho, &a2, &b2),
            ];
            let s = chsh_s(terms).s;
            assert!(s.abs() <= quantum_bound + 1e-9, "S = {s}");
        }
    }

    #[test]
    fn s_max_follows_the_tangle() {
        assert_relative_eq!(
            s_max_from_tangle(1.0).unwrap(),
            2.0 * std::f64::consts::SQRT_2
        );
        assert_relative_eq!(s_max_from_tangle(0.0).unwrap(), 2.0);
        assert_relative_eq!(
            s_max_from_tangle(0.884).unwrap(),
            2.7451775898837583,
            epsilon = 1e-12
        );
        assert!(s_max_from_tangle(1.2).is_err());
        assert!(s_max_from_tangle(-0.1).is_err());

        // Consistency: a Werner state of visibility v has tangle
        // max(0, (3v−1)/2)² and reaches S = 2√2·v with the CHSH settings.
        let v = 0.95;
        let rho = source_state(1.0, v, 0.0).unwrap();
        let smax = s_max_from_tangle(tangle(&rho)).unwrap();
        let settings = chsh_settings();
        let terms: [CorrelationEstimate; 4] = exact_terms(&rho, &settings.pairs());
        assert!(chsh_s(terms).s <= smax + 1e-12);
    }

    #[test]
    fn bb_saturates_its_quantum_maximum_on_the_ideal_state() {
        let rho = ideal_state();
        let settings = bb_settings();
        let terms: [CorrelationEstimate; 12] = exact_terms(&rho, &settings.pairs());
        let inv_sqrt3 = 1.0 / 3.0_f64.sqrt();
        for (k, t) in terms.iter().enumerate() {
            assert_relative_eq!(t.value.abs(), inv_sqrt3, epsilon = 1e-12);
            // Every term enters the sum positively.
            let (i, j) = (k / 4, k % 4);
            assert!(BB_SIGNS[i][j] * t.value > 0.0);
        }
        let result = bb_s(terms);
        assert_relative_eq!(result.s, 4.0 * 3.0_f64.sqrt(), epsilon = 1e-9);
        assert_relative_eq!(result.quantum_bound, 4.0 * 3.0_f64.sqrt());
    }

    #[test]
    fn bb_bob_settings_are_four_distinct_directions() {
        let settings = bb_settings();
        for i in 0..4 {
            for j in (i + 1)..4 {
                let d = settings.bob[i].axis.dot(settings.bob[j].axis);
                // Cube diagonals meet at |cos| = 1/3; none coincide or
                // are antipodal.
                assert_relative_eq!(d.abs(), 1.0 / 3.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn bb_quantum_maximum_is_not_exceeded_by_random_settings() {
        let mut rng = seeded_rng(42);
        let rho = ideal_state();
        let bound = 4.0 * 3.0_f64.sqrt();
        for _ in 0..200 {
            let mut dir = || {
                let v = loop {
                    let x: f64 = rng.gen_range(-1.0..1.0);
                    let y: f64 = rng.gen_range(-1.0..1.0);
                    let z: f64 = rng.gen_range(-1.0..1.0);
                    if (x * x + y * y + z * z).sqrt() > 1e-3 {
                        break BlochVector::normalized(x, y, z).unwrap();
                    }
                };
                MeasurementBasis::new("r", v)
            };
            let alice = [dir(), dir(), dir()];
            let bob = [dir(), dir(), dir(), dir()];
            let mut s = 0.0;
            for i in 0..3 {
                for j in 0..4 {
                    s += BB_SIGNS[i][j] * correlation_expectation(&rho, &alice[i], &bob[j]);
                }
            }
            assert!(s <= bound + 1e-9, "S_BB = {s}");
        }
    }

    #[test]
    fn bb_reference_correlations_reproduce_the_published_value() {
        let e = CorrelationEstimate::new;
        let terms = [
            e(0.5742, 0.0061, "x", "b0"),
            e(0.5247, 0.0062, "x", "b1"),
            e(-0.5641, 0.0062, "x", "b2"),
            e(-0.5678, 0.0061, "x", "b3"),
            e(0.5446, 0.0061, "y", "b0"),
            e(-0.5307, 0.0061, "y", "b1"),
            e(0.5763, 0.0060, "y", "b2"),
            e(-0.5833, 0.0061, "y", "b3"),
            e(0.6124, 0.0061, "z", "b0"),
            e(-0.6255, 0.0061, "z", "b1"),
            e(-0.5039, 0.0061, "z", "b2"),
            e(0.4645, 0.0061, "z", "b3"),
        ];
        let result = bb_s(terms);
        assert_relative_eq!(result.s, 6.672, epsilon = 1e-12);
        assert_relative_eq!(
            result.uncertainty,
            0.021_160_576_551_691_59,
            epsilon = 1e-12
        );
        assert!(result.violation_sigma > 8.0);
    }

    #[test]
    fn bb_werner_visibility_threshold() {
        assert_relative_eq!(bb_min_visibility(), 0.8660254037844386, epsilon = 1e-15);
        let settings = bb_settings();
        let s_of = |v: f64| {
            let rho = source_state(1.0, v, 0.0).unwrap();
            let terms: [CorrelationEstimate; 12] = exact_terms(&rho, &settings.pairs());
            bb_s(terms).s
        };
        assert!(s_of(0.87) > BB_LHV_BOUND);
        assert!(s_of(0.86) < BB_LHV_BOUND);
        assert_relative_eq!(s_of(bb_min_visibility()), BB_LHV_BOUND, epsilon = 1e-9);
    }

    #[test]
    fn leggett_l3_is_two_cos_half_phi_on_the_ideal_state() {
        let rho = ideal_state();
        for phi_deg in [10.0, 25.0, 40.0, 60.0, 90.0] {
            let phi = f64::to_radians(phi_deg);
            let settings = leggett_settings(phi).unwrap();
            let terms: [CorrelationEstimate; 6] = exact_terms(&rho, &settings.pairs());
            let result = leggett_l3(terms, phi).unwrap();
            assert_relative_eq!(result.l3, 2.0 * (phi / 2.0).cos(), epsilon = 1e-9);
        }
        // Frozen reference at the maximal-violation angle.
        let phi = f64::to_radians(40.0);
        let settings = leggett_settings(phi).unwrap();
        let terms: [CorrelationEstimate; 6] = exact_terms(&rho, &settings.pairs());
        assert_relative_eq!(
            leggett_l3(terms, phi).unwrap().l3,
            1.8793852415718169,
            epsilon = 1e-12
        );
    }

    #[test]
    fn leggett_middle_plane_correlations_are_negative() {
        // The y-plane pair enters through an absolute value; on the ideal
        // state those two correlations are individually negative.
        let rho = ideal_state();
        let settings = leggett_settings(f64::to_radians(40.0)).unwrap();
        let pairs = settings.pairs();
        assert!(correlation_expectation(&rho, &pairs[2].0, &pairs[2].1) < 0.0);
        assert!(correlation_expectation(&rho, &pairs[3].0, &pairs[3].1) < 0.0);
        // The outer planes are positive.
        assert!(correlation_expectation(&rho, &pairs[0].0, &pairs[0].1) > 0.0);
        assert!(correlation_expectation(&rho, &pairs[4].0, &pairs[4].1) > 0.0);
    }

    #[test]
    fn leggett_bound_reference_values() {
        assert_relative_eq!(
            leggett_bound(f64::to_radians(40.0)).unwrap(),
            1.7719865711162208,
            epsilon = 1e-12
        );
        assert!(leggett_bound(0.0).is_err());
        assert!(leggett_bound(std::f64::consts::PI).is_err());
        assert!(leggett_settings(0.0).is_err());
        assert!(leggett_settings(-0.2).is_err());
    }

    #[test]
    fn leggett_reference_correlations_reproduce_the_published_value() {
        let e = CorrelationEstimate::new;
        let terms = [
            e(0.9083, 0.0057, "a1", "b1"),
            e(0.8919, 0.0057, "a1", "b1'"),
            e(-0.9081, 0.0038, "a2", "b2"),
            e(-0.8972, 0.0059, "a2", "b2'"),
            e(0.9199, 0.0059, "a3", "b3"),
            e(0.9391, 0.0060, "a3", "b3'"),
        ];
        let result = leggett_l3(terms, f64::to_radians(40.0)).unwrap();
        assert_relative_eq!(result.l3, 1.8215, epsilon = 1e-12);
        assert_relative_eq!(result.uncertainty, 0.004534313619501854, epsilon = 1e-12);
        assert!(result.violation_sigma > 10.0);
        assert!(result.l3 > result.bound);
    }

    #[test]
    fn leggett_quantum_value_decreases_with_phi() {
        let rho = ideal_state();
        let mut prev = f64::INFINITY;
        for phi_deg in [5.0, 20.0, 40.0, 70.0, 110.0, 150.0] {
            let phi = f64::to_radians(phi_deg);
            let settings = leggett_settings(phi).unwrap();
            let terms: [CorrelationEstimate; 6] = exact_terms(&rho, &settings.pairs());
            let l3 = leggett_l3(terms, phi).unwrap().l3;
            assert!(l3 < prev);
            prev = l3;
        }
    }

    #[test]
    fn counted_chsh_matches_the_model_within_errors() {
        let rho = source_state(1.0, 0.96, 0.0).unwrap();
        let det = DetectorConfig::noiseless();
        let settings = chsh_settings();
        let mut terms = Vec::new();
        for (k, (a, b)) in settings.pairs().iter().enumerate() {
            let rec = simulate_counts(&rho, a, b, 500.0, &det, 40.0, 1000 + k as u64).unwrap();
            terms.push(correlation_from_counts(&rec).unwrap());
        }
        let terms: [CorrelationEstimate; 4] = terms.try_into().unwrap();
        let result = chsh_s(terms);
        let expected = 0.96 * 2.0 * std::f64::consts::SQRT_2;
        assert!(
            (result.s - expected).abs() < 4.0 * result.uncertainty,
            "S = {} ± {}, expected {expected}",
            result.s,
            result.uncertainty
        );
        assert!(result.is_physical());
    }
}
