//! Measured reference values for the source this toolkit models.
//!
//! Reports compare computed results against these numbers: informationally
//! in simulation and exact modes, decisively (exit code 3) in fixture
//! mode. Tolerances follow each value's quoted 1σ uncertainty; statistical
//! comparisons use 3σ of the combined uncertainty.

/// CHSH parameter of the reference measurement.
pub const CHSH_S: f64 = 2.757;
/// 1σ uncertainty of [`CHSH_S`].
pub const CHSH_DS: f64 = 0.008;

/// (2,3) Bell parameter of the reference measurement.
pub const BB_S: f64 = 6.67;
/// 1σ uncertainty of [`BB_S`].
pub const BB_DS: f64 = 0.08;
/// The reference measurement violated the LHV bound by over 8σ.
pub const BB_MIN_SIGNIFICANCE: f64 = 8.0;

/// Leggett L₃ of the reference measurement at φ = 40°.
pub const LEGGETT_L3: f64 = 1.82;
/// 1σ uncertainty of [`LEGGETT_L3`].
pub const LEGGETT_DL3: f64 = 0.02;
/// The separation angle of maximal violation.
pub const LEGGETT_PHI_DEG: f64 = 40.0;

/// Tangle of the reference reconstructed density matrix.
pub const TANGLE: f64 = 0.905;
/// Tolerance on [`TANGLE`] for tabulated (4-decimal-rounded) input.
pub const TANGLE_TOL: f64 = 0.010;

/// Fidelity of the reference reconstruction to `(|HH⟩ + |VV⟩)/√2`.
pub const FIDELITY: f64 = 0.974;
/// Tolerance on [`FIDELITY`] for tabulated input.
pub const FIDELITY_TOL: f64 = 0.005;

/// Fringe visibility of the reference linear-basis scan.
pub const VISIBILITY_LINEAR: f64 = 0.991;
/// 1σ uncertainty of [`VISIBILITY_LINEAR`].
pub const VISIBILITY_LINEAR_ERR: f64 = 0.007;

/// Fringe visibility of the reference coherence-basis scan.
pub const VISIBILITY_COHERENCE: f64 = 0.974;
/// 1σ uncertainty of [`VISIBILITY_COHERENCE`].
pub const VISIBILITY_COHERENCE_ERR: f64 = 0.009;

/// Tangles of the seven temperature-sweep reference reconstructions, in
/// sweep order (163.70 °C to 166.70 °C).
pub const SWEEP_TANGLES: [f64; 7] = [0.020, 0.122, 0.351, 0.628, 0.843, 0.894, 0.758];
/// Per-point tolerance on [`SWEEP_TANGLES`] for tabulated input.
pub const SWEEP_TANGLE_TOL: f64 = 0.01;

/// 3σ of two combined independent 1σ uncertainties.
pub fn three_sigma_combined(a: f64, b: f64) -> f64 {
    3.0 * (a * a + b * b).sqrt()
}
