//! Acceptance gate: the eight criteria the toolkit must satisfy, one test
//! and one printed pass line each, plus command-line smoke checks.

use std::path::{Path, PathBuf};

use biphoton::inequalities::{
    bb_s, bb_settings, chsh_s, chsh_settings, exact_correlation, leggett_bound, leggett_l3,
    leggett_settings, s_max_from_tangle, CorrelationEstimate,
};
use biphoton::quantum::{
    coincidence_probability, fidelity, fidelity_mixed, phi_state, tangle, BlochVector,
    DensityMatrix, Ket4, MeasurementBasis, C64,
};
use biphoton::rng::{derived_seed, seeded_rng};
use biphoton::source::{
    pair_tangle, signal_spectrum, source_state, spectral_overlap, CrystalConfig, WavelengthGrid,
};
use biphoton::tomography::{
    expected_counts, mle_reconstruct, neg_log_likelihood, nll_gradient, sample_counts, MleOptions,
    PhysicalParams, TomographyData, TomographySettings,
};
use biphoton_cli::config::RunConfig;
use biphoton_cli::experiments::{self, Mode};
use biphoton_cli::fixtures::{load_correlations, load_density_matrices};
use biphoton_cli::report::ExperimentReport;
use rand::Rng;

fn data_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn exact_terms<const N: usize>(
    rho: &DensityMatrix,
    pairs: &[(MeasurementBasis, MeasurementBasis)],
) -> [CorrelationEstimate; N] {
    let v: Vec<CorrelationEstimate> = pairs
        .iter()
        .map(|(a, b)| exact_correlation(rho, a, b))
        .collect();
    v.try_into()
        .unwrap_or_else(|_| panic!("expected {N} pairs"))
}

fn headline(report: &ExperimentReport, prefix: &str) -> (f64, f64) {
    let h = report
        .headlines
        .iter()
        .find(|h| h.label.starts_with(prefix))
        .unwrap_or_else(|| panic!("no headline starting with {prefix:?}"));
    (h.value, h.uncertainty.unwrap_or(0.0))
}

fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(rand_distr::StandardNormal)
}

fn random_direction(rng: &mut impl Rng) -> BlochVector {
    loop {
        let (x, y, z) = (normal(rng), normal(rng), normal(rng));
        if (x * x + y * y + z * z).sqrt() > 1e-3 {
            return BlochVector::normalized(x, y, z).unwrap();
        }
    }
}

#[test]
fn criterion_1_reference_correlation_arithmetic() {
    let bb_terms: [CorrelationEstimate; 12] =
        load_correlations(&data_file("bb_reference_correlations.csv"))
            .unwrap()
            .try_into()
            .unwrap();
    let bb = bb_s(bb_terms);
    assert!(
        (bb.s - 6.672).abs() <= 0.005,
        "S_BB = {} not within 0.005 of 6.672",
        bb.s
    );
    assert!(
        bb.violation_sigma >= 8.0,
        "S_BB significance {} below 8 sigma",
        bb.violation_sigma
    );

    let l_terms: [CorrelationEstimate; 6] =
        load_correlations(&data_file("leggett_reference_correlations.csv"))
            .unwrap()
            .try_into()
            .unwrap();
    let phi = 40.0_f64.to_radians();
    let leggett = leggett_l3(l_terms, phi).unwrap();
    assert!(
        (leggett.l3 - 1.8215).abs() <= 0.001,
        "L3 = {} not within 0.001 of 1.8215",
        leggett.l3
    );
    let bound = leggett_bound(phi).unwrap();
    assert!(
        (bound - 1.7720).abs() <= 0.0005,
        "bound(40 deg) = {bound} not within 0.0005 of 1.7720"
    );

    println!(
        "[PASS] criterion 1: S_BB = {:.4} ({:.1} sigma), L3 = {:.4}, bound(40 deg) = {:.4}",
        bb.s, bb.violation_sigma, leggett.l3, bound
    );
}

#[test]
fn criterion_2_reference_state_tangle_and_fidelity() {
    let matrices = load_density_matrices(&data_file("reference_density_matrix.csv")).unwrap();
    assert_eq!(matrices.len(), 1);
    let rho = &matrices[0].1;
    let t = tangle(rho);
    let f = fidelity(rho, &phi_state(0.0)).unwrap();
    assert!((t - 0.905).abs() <= 0.010, "tangle = {t}");
    assert!((f - 0.974).abs() <= 0.005, "fidelity = {f}");
    println!("[PASS] criterion 2: tangle = {t:.4}, fidelity = {f:.4}");
}

#[test]
fn criterion_3_temperature_sweep_tangle_sequence() {
    let expected = [0.020, 0.122, 0.351, 0.628, 0.843, 0.894, 0.758];
    let matrices =
        load_density_matrices(&data_file("temperature_sweep_density_matrices.csv")).unwrap();
    assert_eq!(matrices.len(), expected.len());

    let tangles: Vec<f64> = matrices.iter().map(|(_, rho)| tangle(rho)).collect();
    for (i, (&t, &e)) in tangles.iter().zip(&expected).enumerate() {
        assert!(
            (t - e).abs() <= 0.01,
            "point {i}: tangle {t} not within 0.01 of {e}"
        );
    }
    let peak = tangles
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    for w in 0..tangles.len() - 1 {
        if w < peak {
            assert!(tangles[w] < tangles[w + 1], "not rising at {w}");
        } else {
            assert!(tangles[w] > tangles[w + 1], "not falling at {w}");
        }
    }
    println!(
        "[PASS] criterion 3: sweep tangles {} rise then fall within 0.01 of reference",
        tangles
            .iter()
            .map(|t| format!("{t:.3}"))
            .collect::<Vec<_>>()
            .join(" ")
    );
}

#[test]
fn criterion_4_analytic_saturation() {
    let bell = DensityMatrix::from_pure(&phi_state(0.0)).unwrap();

    let s = chsh_s(exact_terms::<4>(&bell, &chsh_settings().pairs())).s;
    let tsirelson = 2.0 * 2.0_f64.sqrt();
    assert!((s - tsirelson).abs() <= 1e-9, "S = {s}");

    let s_bb = bb_s(exact_terms::<12>(&bell, &bb_settings().pairs())).s;
    let bb_max = 4.0 * 3.0_f64.sqrt();
    assert!((s_bb - bb_max).abs() <= 1e-9, "S_BB = {s_bb}");

    let s_max = s_max_from_tangle(0.884).unwrap();
    assert!((s_max - 2.745).abs() <= 0.001, "s_max = {s_max}");

    let phi = 40.0_f64.to_radians();
    let l3 = leggett_l3(
        exact_terms::<6>(&bell, &leggett_settings(phi).unwrap().pairs()),
        phi,
    )
    .unwrap()
    .l3;
    let closed_form = 2.0 * (phi / 2.0).cos(); // 1.8794 to four decimals
    assert!((l3 - closed_form).abs() <= 1e-6, "L3 = {l3}");

    println!(
        "[PASS] criterion 4: S = {s:.6}, S_BB = {s_bb:.6}, s_max(0.884) = {s_max:.4}, L3(40 deg) = {l3:.4}"
    );
}

#[test]
fn criterion_5_end_to_end_statistical_reproduction() {
    // Calibrated defaults: tangle-0.905 purity weight, perfect overlap,
    // noise-free detectors, 40 s at 500 Hz, fixed seed.
    let cfg = RunConfig::default();

    let chsh = experiments::chsh::run(&cfg, &Mode::Simulation).unwrap();
    let (s, ds) = headline(&chsh.report, "S");
    let window = 3.0 * (0.008_f64.powi(2) + ds * ds).sqrt();
    assert!(
        (s - 2.757).abs() <= window,
        "S = {s} +- {ds} not within 3 combined sigma ({window}) of 2.757"
    );

    let bbell = experiments::bbell::run(&cfg, &Mode::Simulation).unwrap();
    let (s_bb, ds_bb) = headline(&bbell.report, "S_BB");
    assert!(s_bb > 6.0, "S_BB = {s_bb} does not violate the LHV bound");
    assert!(
        (s_bb - 6.0) / ds_bb >= 5.0,
        "S_BB violation significance {} below 5 sigma",
        (s_bb - 6.0) / ds_bb
    );

    let leggett = experiments::leggett::run(&cfg, &Mode::Simulation).unwrap();
    let (l3, _) = headline(&leggett.report, "L3 at phi = 40");
    let (bound, _) = headline(&leggett.report, "non-signaling model bound");
    assert!(l3 > bound, "L3 = {l3} does not violate the bound {bound}");

    println!(
        "[PASS] criterion 5: S = {s:.4} +- {ds:.4} (ref 2.757), S_BB = {s_bb:.4} ({:.1} sigma), L3 = {l3:.4} > {bound:.4}",
        (s_bb - 6.0) / ds_bb
    );
}

#[test]
fn criterion_6_tomography_oracle_equivalence() {
    let settings = TomographySettings::standard_36();
    let exposure = 2.0e4;
    let opts = MleOptions::default();

    // Noiseless recovery of random physical states.
    let mut rng = seeded_rng(60);
    let mut worst_fid = 1.0_f64;
    for _ in 0..50 {
        let truth = PhysicalParams::random(&mut rng).density_matrix();
        let means = expected_counts(&truth, &settings, exposure).unwrap();
        let rec = mle_reconstruct(
            &settings,
            &TomographyData::new(means).unwrap(),
            exposure,
            &opts,
        )
        .unwrap();
        worst_fid = worst_fid.min(fidelity_mixed(&rec.rho, &truth));
    }
    assert!(worst_fid >= 0.999, "worst noiseless fidelity {worst_fid}");

    // Poissonian recovery of the dephased source state.
    let truth = source_state(0.9, 1.0, 0.0).unwrap();
    let target = pair_tangle(0.9, 1.0).unwrap();
    assert!((target - 0.81).abs() < 1e-12);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..20 {
        let data = sample_counts(&truth, &settings, exposure, derived_seed(61, i)).unwrap();
        let rec = mle_reconstruct(&settings, &data, exposure, &opts).unwrap();
        assert!(
            (rec.tangle - target).abs() <= 0.02,
            "seed {i}: tangle {} not within 0.02 of {target}",
            rec.tangle
        );
        lo = lo.min(rec.tangle);
        hi = hi.max(rec.tangle);
    }
    println!(
        "[PASS] criterion 6: worst noiseless fidelity {worst_fid:.6}; noisy tangles in [{lo:.4}, {hi:.4}] vs 0.81 +- 0.02"
    );
}

#[test]
fn criterion_7_numerical_checks() {
    // Likelihood gradient against an independent finite difference.
    let settings = TomographySettings::standard_36();
    let exposure = 2.0e4;
    let mut rng = seeded_rng(70);
    let mut worst_rel = 0.0_f64;
    for _ in 0..5 {
        let truth = PhysicalParams::random(&mut rng).density_matrix();
        let data = sample_counts(&truth, &settings, exposure, rng.gen()).unwrap();
        let at = PhysicalParams::random(&mut rng);
        let grad = nll_gradient(&at, &settings, &data, exposure).unwrap();
        for (i, &g) in grad.iter().enumerate() {
            let h = 1e-5 * at.t[i].abs().max(1.0);
            let mut tp = at;
            tp.t[i] += h;
            let fp = neg_log_likelihood(&tp, &settings, &data, exposure).unwrap();
            tp.t[i] -= 2.0 * h;
            let fm = neg_log_likelihood(&tp, &settings, &data, exposure).unwrap();
            let fd = (fp - fm) / (2.0 * h);
            let rel = (fd - g).abs() / g.abs().max(fd.abs()).max(1.0);
            worst_rel = worst_rel.max(rel);
        }
    }
    assert!(worst_rel <= 1e-4, "worst gradient mismatch {worst_rel}");

    // Numerical overlap of Gaussian lines against the closed form.
    let fwhm = 0.30;
    let sigma = fwhm / (8.0 * 2.0_f64.ln()).sqrt();
    let mut worst_overlap = 0.0_f64;
    for k in 0..=12 {
        let delta = sigma * 0.5 * k as f64;
        let c1 = CrystalConfig {
            center_wavelength_nm: 810.0,
            temp_ref_c: 165.7,
            dlambda_dt_nm_per_c: 0.2,
            fwhm_nm: fwhm,
        };
        let c2 = CrystalConfig {
            center_wavelength_nm: 810.0 + delta,
            ..c1
        };
        let grid = WavelengthGrid::covering(&[810.0, 810.0 + delta], fwhm, 6.0, 0.002).unwrap();
        let o = spectral_overlap(
            &signal_spectrum(&c1, c1.temp_ref_c, &grid).unwrap(),
            &signal_spectrum(&c2, c2.temp_ref_c, &grid).unwrap(),
        )
        .unwrap();
        let exact = (-delta * delta / (8.0 * sigma * sigma)).exp();
        worst_overlap = worst_overlap.max((o - exact).abs());
    }
    assert!(worst_overlap <= 1e-4, "worst overlap error {worst_overlap}");

    // Quantum ceilings under randomized states and settings. Cycle through
    // generic mixed states, generic pure states, and lightly perturbed Bell
    // states so the search also probes close to the boundary.
    let tsirelson = 2.0 * 2.0_f64.sqrt() + 1e-9;
    let bb_max = 4.0 * 3.0_f64.sqrt() + 1e-9;
    let mut max_s = 0.0_f64;
    let mut max_bb = 0.0_f64;
    for draw in 0..300 {
        let rho = match draw % 3 {
            0 => PhysicalParams::random(&mut rng).density_matrix(),
            1 => {
                let psi = Ket4::from_fn(|_, _| C64::new(normal(&mut rng), normal(&mut rng)));
                DensityMatrix::from_pure(&psi).unwrap()
            }
            _ => {
                let mut psi = phi_state(0.1 * normal(&mut rng));
                for k in 0..4 {
                    psi[k] += C64::new(0.05 * normal(&mut rng), 0.05 * normal(&mut rng));
                }
                DensityMatrix::from_pure(&psi).unwrap()
            }
        };
        let s = chsh_s(exact_terms::<4>(&rho, &chsh_settings().pairs()))
            .s
            .abs();
        assert!(s <= tsirelson, "draw {draw}: S = {s}");
        max_s = max_s.max(s);

        let s_bb = bb_s(exact_terms::<12>(&rho, &bb_settings().pairs()))
            .s
            .abs();
        assert!(s_bb <= bb_max, "draw {draw}: S_BB = {s_bb}");
        max_bb = max_bb.max(s_bb);

        let basis = |rng: &mut _, tag: String| MeasurementBasis::new(tag, random_direction(rng));
        let a: Vec<MeasurementBasis> = (0..2).map(|i| basis(&mut rng, format!("a{i}"))).collect();
        let b: Vec<MeasurementBasis> = (0..2).map(|i| basis(&mut rng, format!("b{i}"))).collect();
        let terms = [
            exact_correlation(&rho, &a[0], &b[0]),
            exact_correlation(&rho, &a[0], &b[1]),
            exact_correlation(&rho, &a[1], &b[0]),
            exact_correlation(&rho, &a[1], &b[1]),
        ];
        let s_random = chsh_s(terms).s.abs();
        assert!(
            s_random <= tsirelson,
            "draw {draw}: random-settings S = {s_random}"
        );

        let a3: Vec<MeasurementBasis> = (0..3).map(|i| basis(&mut rng, format!("a{i}"))).collect();
        let b4: Vec<MeasurementBasis> = (0..4).map(|i| basis(&mut rng, format!("b{i}"))).collect();
        let mut bb_terms = Vec::with_capacity(12);
        for ai in &a3 {
            for bj in &b4 {
                bb_terms.push(exact_correlation(&rho, ai, bj));
            }
        }
        let bb_terms: [CorrelationEstimate; 12] = bb_terms.try_into().unwrap();
        let s_bb = bb_s(bb_terms).s.abs();
        assert!(s_bb <= bb_max, "draw {draw}: S_BB = {s_bb}");
        max_bb = max_bb.max(s_bb);
    }

    println!(
        "[PASS] criterion 7: gradient mismatch {worst_rel:.2e}, overlap error {worst_overlap:.2e}, ceilings respected (max |S| {max_s:.4}, max |S_BB| {max_bb:.4})"
    );
}

#[test]
fn criterion_8_visibility_fits() {
    use biphoton::analyzer::{fit_visibility, visibility_scan, DetectorConfig, GreatCircle};

    // Ideal source: exact scan points must fit to unit visibility.
    let ideal = DensityMatrix::from_pure(&phi_state(0.0)).unwrap();
    let scans = [
        (
            MeasurementBasis::new("H", BlochVector::Z),
            GreatCircle::linear(),
        ),
        (
            MeasurementBasis::new("+", BlochVector::X),
            GreatCircle::coherence(),
        ),
    ];
    for (fixed, circle) in &scans {
        let points: Vec<(f64, f64)> = (0..16)
            .map(|k| {
                let beta = std::f64::consts::TAU * k as f64 / 16.0;
                let p = coincidence_probability(&ideal, fixed.axis, circle.point(beta));
                (beta / 2.0, 2.0e4 * p)
            })
            .collect();
        let fit = fit_visibility(&points).unwrap();
        assert!(
            (fit.visibility - 1.0).abs() <= 1e-4,
            "ideal visibility = {}",
            fit.visibility
        );
    }

    // Source tuned to the measured visibilities: seeded scans land within
    // 3 sigma of the reference values.
    let v = 0.991;
    let overlap = 0.974 / 0.991;
    let rho = source_state(overlap, v, 0.0).unwrap();
    let det = DetectorConfig::noiseless();
    let mut fitted = [0.0; 2];
    for (i, (fixed, circle)) in scans.iter().enumerate() {
        let scan = visibility_scan(
            &rho,
            fixed,
            circle,
            16,
            500.0,
            &det,
            40.0,
            derived_seed(80, i as u64),
        )
        .unwrap();
        let points: Vec<(f64, f64)> = scan
            .into_iter()
            .map(|(theta, rec)| (theta, rec.c_ab as f64))
            .collect();
        fitted[i] = fit_visibility(&points).unwrap().visibility;
    }
    assert!(
        (fitted[0] - 0.991).abs() <= 3.0 * 0.007,
        "linear visibility = {}",
        fitted[0]
    );
    assert!(
        (fitted[1] - 0.974).abs() <= 3.0 * 0.009,
        "coherence visibility = {}",
        fitted[1]
    );

    println!(
        "[PASS] criterion 8: ideal fits exact; calibrated scans V1 = {:.4} (ref 0.991), V2 = {:.4} (ref 0.974)",
        fitted[0], fitted[1]
    );
}

// ---------------------------------------------------------------------------
// Command-line smoke checks
// ---------------------------------------------------------------------------

fn binary() -> std::process::Command {
    std::process::Command::new(env!("CARGO_BIN_EXE_biphoton"))
}

#[test]
fn cli_fixture_runs_exit_zero_on_passing_checks() {
    for (sub, file) in [
        ("bbell", "bb_reference_correlations.csv"),
        ("leggett", "leggett_reference_correlations.csv"),
        ("tomography", "reference_density_matrix.csv"),
        ("tangle-sweep", "temperature_sweep_density_matrices.csv"),
    ] {
        let out = binary()
            .args([sub, "--fixture"])
            .arg(data_file(file))
            .output()
            .unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "{sub} on {file}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    println!("[PASS] cli: shipped fixtures all check out (exit 0)");
}

#[test]
fn cli_config_errors_exit_two() {
    let missing = binary()
        .args(["chsh", "--config", "/no/such/file.toml"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));

    let conflicting = binary()
        .args(["chsh", "--exact", "--fixture"])
        .arg(data_file("bb_reference_correlations.csv"))
        .output()
        .unwrap();
    assert_eq!(conflicting.status.code(), Some(2));

    let wrong_shape = binary()
        .args(["chsh", "--fixture"])
        .arg(data_file("bb_reference_correlations.csv"))
        .output()
        .unwrap();
    assert_eq!(wrong_shape.status.code(), Some(2));
    println!("[PASS] cli: configuration problems exit 2");
}

#[test]
fn cli_failing_fixture_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let weak = dir.path().join("weak.csv");
    std::fs::write(
        &weak,
        "basis_a,basis_b,e_value,e_uncertainty\n\
         H/V,22.5deg,0.1,0.01\nH/V,67.5deg,-0.1,0.01\n\
         +/-,22.5deg,0.1,0.01\n+/-,67.5deg,0.1,0.01\n",
    )
    .unwrap();
    let out = binary()
        .args(["chsh", "--fixture"])
        .arg(&weak)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    println!("[PASS] cli: failing fixture checks exit 3");
}

#[test]
fn cli_seeded_runs_are_bit_identical() {
    let run = || binary().args(["chsh", "--seed", "99"]).output().unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
    println!("[PASS] cli: repeated seeded runs are bit-identical");
}
