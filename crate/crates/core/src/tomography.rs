//! Maximum-likelihood quantum state tomography from coincidence counts.
//!
//! The standard acquisition projects both photons onto all 36 pairs drawn
//! from {H, V, +, −, R, L} and records one coincidence count per pair. A
//! physical state is parameterized by 16 real numbers `t` through a
//! lower-triangular factor `L(t)` with real diagonal:
//!
//! `ρ(t) = L L† / Tr(L L†)`,
//!
//! which is Hermitian, positive semidefinite, and unit-trace for every `t`
//! (`Tr(L L†) = |t|²`). The Poissonian negative log-likelihood (constants
//! dropped) is
//!
//! `ℓ(t) = Σ_k (m̄_k − n_k · ln m̄_k)`, `m̄_k = exposure · Tr[ρ(t) Π_k]`,
//!
//! with means floored at `1e-12` so empty channels never produce `ln 0`.
//! Minimization is a BFGS descent with central-difference gradients and a
//! backtracking line search, run from two starts: the maximally mixed state
//! and the physicality-projected linear-inversion estimate.

use rand::Rng;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analyzer::CountRecord;
use crate::error::{Error, Result};
use crate::quantum::{
    c, projector_from_bloch, tangle, tensor_product, BlochVector, DensityMatrix, Mat4,
    MeasurementBasis,
};
use crate::rng::{derived_seed, seeded_rng};
use crate::source::{
    pair_tangle, signal_spectrum, source_state, spectral_overlap, CrystalConfig, WavelengthGrid,
};

/// Floor applied to expected means inside the likelihood.
pub const MEAN_FLOOR: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Settings and data
// ---------------------------------------------------------------------------

/// The six single-qubit analyzer states used by the standard tomography.
pub fn standard_single_qubit_bases() -> Vec<MeasurementBasis> {
    vec![
        MeasurementBasis::new("H", BlochVector::Z),
        MeasurementBasis::new("V", -BlochVector::Z),
        MeasurementBasis::new("+", BlochVector::X),
        MeasurementBasis::new("-", -BlochVector::X),
        MeasurementBasis::new("R", BlochVector::Y),
        MeasurementBasis::new("L", -BlochVector::Y),
    ]
}

/// An ordered list of projective coincidence settings `(a, b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographySettings {
    pairs: Vec<(MeasurementBasis, MeasurementBasis)>,
}

impl TomographySettings {
    /// The full 36-pair set {H,V,+,−,R,L} ⊗ {H,V,+,−,R,L}, row-major in A.
    pub fn standard_36() -> Self {
        let singles = standard_single_qubit_bases();
        let mut pairs = Vec::with_capacity(36);
        for a in &singles {
            for b in &singles {
                pairs.push((a.clone(), b.clone()));
            }
        }
        TomographySettings { pairs }
    }

    /// Custom settings; at least 16 informationally distinct pairs are needed
    /// for tomography, but any non-empty list is accepted for likelihood
    /// evaluation.
    pub fn new(pairs: Vec<(MeasurementBasis, MeasurementBasis)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::invalid_argument(
                "no tomography settings".to_string(),
            ));
        }
        Ok(TomographySettings { pairs })
    }

    pub fn pairs(&self) -> &[(MeasurementBasis, MeasurementBasis)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Two-qubit projectors `Π_a ⊗ Π_b`, in setting order.
    pub fn projectors(&self) -> Vec<Mat4> {
        self.pairs
            .iter()
            .map(|(a, b)| {
                tensor_product(&projector_from_bloch(a.axis), &projector_from_bloch(b.axis))
            })
            .collect()
    }

    /// Index of the pair whose labels match `(label_a, label_b)`.
    pub fn index_of(&self, label_a: &str, label_b: &str) -> Option<usize> {
        self.pairs
            .iter()
            .position(|(a, b)| a.label == label_a && b.label == label_b)
    }
}

/// One observed coincidence count per setting. Counts are `f64` so exact
/// expected data (infinite statistics) can flow through the same pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyData {
    pub counts: Vec<f64>,
}

impl TomographyData {
    pub fn new(counts: Vec<f64>) -> Result<Self> {
        if let Some(bad) = counts.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::invalid_argument(format!(
                "counts must be finite and non-negative, got {bad}"
            )));
        }
        Ok(TomographyData { counts })
    }

    /// Extract the `(a, b)` coincidence channel of analyzer count records,
    /// matching records to `settings` by label.
    pub fn from_count_records(
        records: &[CountRecord],
        settings: &TomographySettings,
    ) -> Result<Self> {
        let mut counts = vec![None; settings.len()];
        for rec in records {
            let idx = settings
                .index_of(&rec.setting_a, &rec.setting_b)
                .ok_or_else(|| {
                    Error::invalid_argument(format!(
                        "record ({}, {}) matches no tomography setting",
                        rec.setting_a, rec.setting_b
                    ))
                })?;
            counts[idx] = Some(rec.c_ab as f64);
        }
        let counts: Vec<f64> = counts
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                c.ok_or_else(|| {
                    let (a, b) = &settings.pairs()[i];
                    Error::invalid_argument(format!(
                        "no record for setting ({}, {})",
                        a.label, b.label
                    ))
                })
            })
            .collect::<Result<_>>()?;
        TomographyData::new(counts)
    }
}

/// Expected coincidence counts `exposure · Tr[ρ Π_k]` for every setting.
pub fn expected_counts(
    rho: &DensityMatrix,
    settings: &TomographySettings,
    exposure: f64,
) -> Result<Vec<f64>> {
    if exposure <= 0.0 || !exposure.is_finite() {
        return Err(Error::invalid_argument(format!(
            "exposure must be positive, got {exposure}"
        )));
    }
    Ok(settings
        .projectors()
        .iter()
        .map(|p| exposure * (rho.matrix() * p).trace().re.clamp(0.0, 1.0))
        .collect())
}

/// Draw one Poissonian tomography dataset from a state.
pub fn sample_counts(
    rho: &DensityMatrix,
    settings: &TomographySettings,
    exposure: f64,
    seed: u64,
) -> Result<TomographyData> {
    let means = expected_counts(rho, settings, exposure)?;
    let mut rng = seeded_rng(seed);
    let counts = means
        .iter()
        .map(|&m| {
            if m <= 0.0 {
                0.0
            } else {
                rand_distr::Poisson::new(m)
                    .expect("positive mean")
                    .sample(&mut rng)
            }
        })
        .collect();
    TomographyData::new(counts)
}

// ---------------------------------------------------------------------------
// Physical parameterization
// ---------------------------------------------------------------------------

/// 16 real parameters of the Cholesky-style physical parameterization.
///
/// Layout: `t[0..4]` are the real diagonal of `L`; the strictly-lower
/// entries follow row-major as (re, im) pairs:
/// `L10 = t4+it5`, `L20 = t6+it7`, `L21 = t8+it9`,
/// `L30 = t10+it11`, `L31 = t12+it13`, `L32 = t14+it15`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub t: [f64; 16],
}

impl PhysicalParams {
    pub fn new(t: [f64; 16]) -> Self {
        PhysicalParams { t }
    }

    fn lower_factor(&self) -> Mat4 {
        let t = &self.t;
        let mut l = Mat4::zeros();
        l[(0, 0)] = c(t[0], 0.0);
        l[(1, 1)] = c(t[1], 0.0);
        l[(2, 2)] = c(t[2], 0.0);
        l[(3, 3)] = c(t[3], 0.0);
        l[(1, 0)] = c(t[4], t[5]);
        l[(2, 0)] = c(t[6], t[7]);
        l[(2, 1)] = c(t[8], t[9]);
        l[(3, 0)] = c(t[10], t[11]);
        l[(3, 1)] = c(t[12], t[13]);
        l[(3, 2)] = c(t[14], t[15]);
        l
    }

    /// `ρ(t) = L L† / Tr(L L†)`; the all-zero parameter vector maps to the
    /// maximally mixed state.
    pub fn density_matrix(&self) -> DensityMatrix {
        let norm2: f64 = self.t.iter().map(|x| x * x).sum();
        if norm2 < 1e-300 {
            return DensityMatrix::maximally_mixed();
        }
        let l = self.lower_factor();
        let m = l * l.adjoint() / c(norm2, 0.0);
        // Hermitian, PSD, unit trace by construction.
        DensityMatrix::new_unchecked((m + m.adjoint()) * c(0.5, 0.0))
    }

    /// Factor a density matrix back into parameters. A small multiple of the
    /// identity is mixed in first so rank-deficient states stay factorable.
    pub fn from_density_matrix(rho: &DensityMatrix) -> Result<Self> {
        let eps = 1e-9;
        let m = (rho.matrix() * c(1.0 - eps, 0.0)) + Mat4::identity() * c(eps / 4.0, 0.0);
        let chol = nalgebra::linalg::Cholesky::new(m)
            .ok_or_else(|| Error::invalid_state("density matrix is not factorable".to_string()))?;
        let l = chol.l();
        let mut t = [0.0; 16];
        t[0] = l[(0, 0)].re;
        t[1] = l[(1, 1)].re;
        t[2] = l[(2, 2)].re;
        t[3] = l[(3, 3)].re;
        t[4] = l[(1, 0)].re;
        t[5] = l[(1, 0)].im;
        t[6] = l[(2, 0)].re;
        t[7] = l[(2, 0)].im;
        t[8] = l[(2, 1)].re;
        t[9] = l[(2, 1)].im;
        t[10] = l[(3, 0)].re;
        t[11] = l[(3, 0)].im;
        t[12] = l[(3, 1)].re;
        t[13] = l[(3, 1)].im;
        t[14] = l[(3, 2)].re;
        t[15] = l[(3, 2)].im;
        Ok(PhysicalParams::new(t))
    }

    /// Random parameters with independent standard-normal entries; the image
    /// of this sampler covers all full-rank states.
    pub fn random(rng: &mut impl Rng) -> Self {
        let normal = rand_distr::StandardNormal;
        let mut t = [0.0; 16];
        for x in &mut t {
            *x = normal.sample(rng);
        }
        PhysicalParams::new(t)
    }
}

// ---------------------------------------------------------------------------
// Likelihood
// ---------------------------------------------------------------------------

struct MleProblem<'d> {
    projectors: Vec<Mat4>,
    counts: &'d [f64],
    exposure: f64,
}

impl MleProblem<'_> {
    fn nll_of_t(&self, t: &[f64; 16]) -> f64 {
        let rho = PhysicalParams::new(*t).density_matrix();
        let m = rho.matrix();
        let mut ll = 0.0;
        for (proj, &n) in self.projectors.iter().zip(self.counts) {
            let mean = (self.exposure * (m * proj).trace().re).max(MEAN_FLOOR);
            ll += mean - n * mean.ln();
        }
        ll
    }

    /// Central-difference gradient.
    fn grad(&self, t: &[f64; 16]) -> [f64; 16] {
        let mut g = [0.0; 16];
        let mut tp = *t;
        for i in 0..16 {
            let h = 1e-6 * t[i].abs().max(1.0);
            let orig = tp[i];
            tp[i] = orig + h;
            let fp = self.nll_of_t(&tp);
            tp[i] = orig - h;
            let fm = self.nll_of_t(&tp);
            tp[i] = orig;
            g[i] = (fp - fm) / (2.0 * h);
        }
        g
    }
}

/// Poissonian negative log-likelihood (constants dropped) of parameters `t`
/// against observed counts, one count per setting.
pub fn neg_log_likelihood(
    params: &PhysicalParams,
    settings: &TomographySettings,
    data: &TomographyData,
    exposure: f64,
) -> Result<f64> {
    if data.counts.len() != settings.len() {
        return Err(Error::invalid_argument(format!(
            "{} counts for {} settings",
            data.counts.len(),
            settings.len()
        )));
    }
    if exposure <= 0.0 || !exposure.is_finite() {
        return Err(Error::invalid_argument(format!(
            "exposure must be positive, got {exposure}"
        )));
    }
    let problem = MleProblem {
        projectors: settings.projectors(),
        counts: &data.counts,
        exposure,
    };
    Ok(problem.nll_of_t(&params.t))
}

/// The likelihood gradient the optimizer descends: central differences with
/// per-component steps `1e-6·max(|t_i|, 1)`.
pub fn nll_gradient(
    params: &PhysicalParams,
    settings: &TomographySettings,
    data: &TomographyData,
    exposure: f64,
) -> Result<[f64; 16]> {
    if data.counts.len() != settings.len() {
        return Err(Error::invalid_argument(format!(
            "{} counts for {} settings",
            data.counts.len(),
            settings.len()
        )));
    }
    if exposure <= 0.0 || !exposure.is_finite() {
        return Err(Error::invalid_argument(format!(
            "exposure must be positive, got {exposure}"
        )));
    }
    let problem = MleProblem {
        projectors: settings.projectors(),
        counts: &data.counts,
        exposure,
    };
    Ok(problem.grad(&params.t))
}

// ---------------------------------------------------------------------------
// Linear inversion (optimizer seed)
// ---------------------------------------------------------------------------

/// Pauli-basis linear inversion: least-squares fit of the 16 real
/// correlation components to the observed frequencies. The result is
/// Hermitian with unit trace but may be slightly unphysical.
pub fn linear_inversion(
    settings: &TomographySettings,
    data: &TomographyData,
    exposure: f64,
) -> Result<Mat4> {
    if data.counts.len() != settings.len() {
        return Err(Error::invalid_argument(format!(
            "{} counts for {} settings",
            data.counts.len(),
            settings.len()
        )));
    }
    // Hermitian operator basis G_m = σ_i ⊗ σ_j (σ_0 = I), m = 4i + j.
    let singles = [
        nalgebra::Matrix2::identity(),
        crate::quantum::sigma_x(),
        crate::quantum::sigma_y(),
        crate::quantum::sigma_z(),
    ];
    let mut basis = Vec::with_capacity(16);
    for si in &singles {
        for sj in &singles {
            basis.push(tensor_product(si, sj));
        }
    }
    let projectors = settings.projectors();
    let k = settings.len();
    // Design matrix A[k][m] = Tr[G_m Π_k] / 4 (ρ = Σ x_m G_m / 4... absorb
    // the 1/4 into x). Solve A x = p for the frequencies p.
    let mut a = nalgebra::DMatrix::<f64>::zeros(k, 16);
    let mut p = nalgebra::DVector::<f64>::zeros(k);
    for (row, proj) in projectors.iter().enumerate() {
        for (col, g) in basis.iter().enumerate() {
            a[(row, col)] = (g * proj).trace().re / 4.0;
        }
        p[row] = data.counts[row] / exposure;
    }
    let ata = a.transpose() * &a;
    let atp = a.transpose() * p;
    let x = ata
        .cholesky()
        .ok_or_else(|| {
            Error::invalid_argument(
                "settings are not informationally complete for inversion".to_string(),
            )
        })?
        .solve(&atp);
    let mut rho = Mat4::zeros();
    for (coef, g) in x.iter().zip(&basis) {
        rho += g * c(*coef / 4.0, 0.0);
    }
    // Enforce exact unit trace; positivity is handled by the projection step.
    let tr = rho.trace().re;
    if tr.abs() < 1e-12 {
        return Err(Error::invalid_state(
            "inversion produced a traceless matrix".to_string(),
        ));
    }
    Ok(rho / c(tr, 0.0))
}

/// Project a Hermitian unit-trace matrix onto the physical set: clip
/// negative eigenvalues and renormalize the trace.
pub fn project_to_physical(m: &Mat4) -> DensityMatrix {
    let herm = (m + m.adjoint()) * c(0.5, 0.0);
    let se = nalgebra::linalg::SymmetricEigen::new(herm);
    let clipped: Vec<f64> = se.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return DensityMatrix::maximally_mixed();
    }
    let d = Mat4::from_diagonal(&nalgebra::Vector4::from_iterator(
        clipped.iter().map(|&l| c(l / total, 0.0)),
    ));
    let m = se.eigenvectors * d * se.eigenvectors.adjoint();
    DensityMatrix::new_unchecked((m + m.adjoint()) * c(0.5, 0.0))
}

// ---------------------------------------------------------------------------
// MLE optimizer
// ---------------------------------------------------------------------------

/// Optimizer controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    /// Maximum BFGS iterations per start.
    pub max_iterations: usize,
    /// Declare convergence after this many consecutive iterations whose
    /// likelihood improvement is below the stall threshold.
    pub stall_iterations: usize,
    /// Also try the linear-inversion start (in addition to the mixed start).
    pub multi_start: bool,
}

impl Default for MleOptions {
    fn default() -> Self {
        MleOptions {
            max_iterations: 2000,
            stall_iterations: 5,
            multi_start: true,
        }
    }
}

/// Outcome of one maximum-likelihood reconstruction.
#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionResult {
    pub rho: DensityMatrix,
    /// Final negative log-likelihood (constants dropped).
    pub nll: f64,
    /// Wootters tangle of the reconstructed state.
    pub tangle: f64,
    /// Total accepted iterations across starts.
    pub iterations: usize,
    pub converged: bool,
}

struct BfgsOutcome {
    t: [f64; 16],
    nll: f64,
    iterations: usize,
    converged: bool,
}

/// BFGS with backtracking Armijo line search. The likelihood never
/// increases across accepted iterations by construction.
fn bfgs(problem: &MleProblem, t0: [f64; 16], opts: &MleOptions) -> BfgsOutcome {
    const N: usize = 16;
    let mut t = t0;
    let mut f = problem.nll_of_t(&t);
    let mut g = problem.grad(&t);
    let mut h = nalgebra::SMatrix::<f64, N, N>::identity();
    let mut stall = 0usize;
    let mut iterations = 0usize;

    for _ in 0..opts.max_iterations {
        let gv = nalgebra::SVector::<f64, N>::from_row_slice(&g);
        let mut d = -(h * gv);
        if d.dot(&gv) >= 0.0 {
            // Curvature model went bad; restart from steepest descent.
            h = nalgebra::SMatrix::<f64, N, N>::identity();
            d = -gv;
        }
        // Backtracking line search.
        let slope = d.dot(&gv);
        let mut alpha = 1.0;
        let mut accepted = false;
        let mut t_new = t;
        let mut f_new = f;
        while alpha > 1e-14 {
            for i in 0..N {
                t_new[i] = t[i] + alpha * d[i];
            }
            f_new = problem.nll_of_t(&t_new);
            if f_new <= f + 1e-4 * alpha * slope {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // No descent step exists at the resolution of f64: stalled.
            stall += 1;
            if stall >= opts.stall_iterations {
                return BfgsOutcome {
                    t,
                    nll: f,
                    iterations,
                    converged: true,
                };
            }
            continue;
        }
        iterations += 1;
        let g_new = problem.grad(&t_new);
        let s = nalgebra::SVector::<f64, N>::from_iterator((0..N).map(|i| t_new[i] - t[i]));
        let y = nalgebra::SVector::<f64, N>::from_iterator((0..N).map(|i| g_new[i] - g[i]));
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            // Standard BFGS inverse-Hessian update.
            let rho_bfgs = 1.0 / sy;
            let i_mat = nalgebra::SMatrix::<f64, N, N>::identity();
            let left = i_mat - (s * y.transpose()) * rho_bfgs;
            h = left * h * left.transpose() + (s * s.transpose()) * rho_bfgs;
        }
        // Stall detection: tiny decrease (1e-9 absolute, with a relative
        // floor for the f64 resolution of large likelihoods).
        let delta = f - f_new;
        let threshold = 1e-9_f64.max(f.abs() * 1e-14);
        if delta.abs() < threshold {
            stall += 1;
        } else {
            stall = 0;
        }
        t = t_new;
        f = f_new;
        g = g_new;
        if stall >= opts.stall_iterations {
            return BfgsOutcome {
                t,
                nll: f,
                iterations,
                converged: true,
            };
        }
    }
    BfgsOutcome {
        t,
        nll: f,
        iterations,
        converged: false,
    }
}

/// Reconstruct the state that maximizes the Poissonian likelihood of the
/// observed counts.
pub fn mle_reconstruct(
    settings: &TomographySettings,
    data: &TomographyData,
    exposure: f64,
    opts: &MleOptions,
) -> Result<ReconstructionResult> {
    if data.counts.len() != settings.len() {
        return Err(Error::invalid_argument(format!(
            "{} counts for {} settings",
            data.counts.len(),
            settings.len()
        )));
    }
    if exposure <= 0.0 || !exposure.is_finite() {
        return Err(Error::invalid_argument(format!(
            "exposure must be positive, got {exposure}"
        )));
    }
    let problem = MleProblem {
        projectors: settings.projectors(),
        counts: &data.counts,
        exposure,
    };

    // Start 1: maximally mixed state, L = I/2.
    let mut starts: Vec<[f64; 16]> = Vec::with_capacity(2);
    let mut mixed = [0.0; 16];
    mixed[0] = 0.5;
    mixed[1] = 0.5;
    mixed[2] = 0.5;
    mixed[3] = 0.5;
    starts.push(mixed);

    // Start 2: physicality-projected linear inversion.
    if opts.multi_start {
        if let Ok(lin) = linear_inversion(settings, data, exposure) {
            let projected = project_to_physical(&lin);
            if let Ok(params) = PhysicalParams::from_density_matrix(&projected) {
                starts.push(params.t);
            }
        }
    }

    let mut best: Option<BfgsOutcome> = None;
    let mut total_iterations = 0usize;
    let mut all_converged = true;
    for t0 in starts {
        let outcome = bfgs(&problem, t0, opts);
        total_iterations += outcome.iterations;
        all_converged &= outcome.converged;
        let better = match &best {
            None => true,
            Some(b) => outcome.nll < b.nll,
        };
        if better {
            best = Some(outcome);
        }
    }
    let best = best.expect("at least one start");
    let rho = PhysicalParams::new(best.t).density_matrix();
    let t = tangle(&rho);
    Ok(ReconstructionResult {
        rho,
        nll: best.nll,
        tangle: t,
        iterations: total_iterations,
        converged: all_converged,
    })
}

/// 1σ spread of the reconstructed tangle under a seeded parametric
/// bootstrap: Poisson datasets are resampled from `rho_hat` and
/// re-reconstructed, `replicas` times, in parallel.
pub fn bootstrap_tangle_std(
    rho_hat: &DensityMatrix,
    settings: &TomographySettings,
    exposure: f64,
    replicas: usize,
    seed: u64,
) -> Result<f64> {
    if replicas < 2 {
        return Err(Error::invalid_argument(format!(
            "bootstrap needs at least 2 replicas, got {replicas}"
        )));
    }
    let tangles: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let data = sample_counts(rho_hat, settings, exposure, derived_seed(seed, i as u64))?;
            let rec = mle_reconstruct(settings, &data, exposure, &MleOptions::default())?;
            Ok(rec.tangle)
        })
        .collect::<Result<_>>()?;
    let n = tangles.len() as f64;
    let mean = tangles.iter().sum::<f64>() / n;
    let var = tangles.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(var.sqrt())
}

// ---------------------------------------------------------------------------
// Temperature sweep
// ---------------------------------------------------------------------------

/// One point of the crystal-temperature sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub hh_temp_c: f64,
    /// Root-spectral overlap of the two signal spectra at this temperature.
    pub overlap: f64,
    /// Closed-form model tangle at this overlap.
    pub tangle_model: f64,
    /// Tangle reconstructed from simulated tomography counts.
    pub tangle_qst: f64,
}

/// Sweep the HH-crystal temperature with the VV crystal held fixed: for each
/// point, compute the spectral overlap, the model state, and a full
/// simulated-counts tomographic reconstruction. Points run in parallel with
/// per-point derived seeds.
#[allow(clippy::too_many_arguments)]
pub fn tangle_vs_temperature_curve(
    hh_crystal: &CrystalConfig,
    vv_crystal: &CrystalConfig,
    hh_temps_c: &[f64],
    vv_temp_c: f64,
    purity_weight: f64,
    exposure: f64,
    seed: u64,
) -> Result<Vec<SweepPoint>> {
    if hh_temps_c.is_empty() {
        return Err(Error::invalid_argument("no sweep temperatures".to_string()));
    }
    let settings = TomographySettings::standard_36();
    let fwhm = hh_crystal.fwhm_nm.max(vv_crystal.fwhm_nm);
    hh_temps_c
        .par_iter()
        .enumerate()
        .map(|(i, &hh_temp)| -> Result<SweepPoint> {
            let centers = [
                hh_crystal.center_at(hh_temp),
                vv_crystal.center_at(vv_temp_c),
            ];
            let grid = WavelengthGrid::covering(&centers, fwhm, 6.0, 0.005)?;
            let s_hh = signal_spectrum(hh_crystal, hh_temp, &grid)?;
            let s_vv = signal_spectrum(vv_crystal, vv_temp_c, &grid)?;
            let overlap = spectral_overlap(&s_hh, &s_vv)?;
            let rho = source_state(overlap, purity_weight, 0.0)?;
            let data = sample_counts(&rho, &settings, exposure, derived_seed(seed, i as u64))?;
            let rec = mle_reconstruct(&settings, &data, exposure, &MleOptions::default())?;
            Ok(SweepPoint {
                hh_temp_c: hh_temp,
                overlap,
                tangle_model: pair_tangle(overlap, purity_weight)?,
                tangle_qst: rec.tangle,
            })
        })
        .collect()
}
