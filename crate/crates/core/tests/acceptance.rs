//! End-to-end acceptance checks. Each test prints one `criterion N: PASS|FAIL`
//! line with the measured numbers before asserting.
//!
//! Criteria 3 and 5 share one cached set of grid sweeps.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use jointrecon::image_solver::{solve_c, CSchedule};
use jointrecon::io::matrix_file::{decode, encode, AnyMatrix};
use jointrecon::io::{read_results_csv, write_results_csv};
use jointrecon::joint::{solve_joint, JointConfig};
use jointrecon::kaczmarz::{
    project_hyperplane, project_nonneg, regularized_row_update, soft_threshold,
    AugmentedRowState,
};
use jointrecon::metrics::data_residual;
use jointrecon::scalar::dot;
use jointrecon::sweep::{
    enumerate_grid, powers_of_two, rate_experiment, run_sweep, select_best, GridSpec, Method,
    Metric, RateConfig, SweepOptions, SweepRecord,
};
use jointrecon::system_solver::{solve_s, SSchedule};
use jointrecon::testbed::{
    generate_complex_instance, generate_instance, ComplexInstanceSpec, PhantomSpec,
};
use jointrecon::{
    map_reg_params, Complex64, Image, KaczmarzSchedule, Matrix, Measurement, ProblemInstance,
    ProjectionMap, RegParams,
};

const SIGMAS: [f64; 3] = [0.05, 0.025, 0.0125];

fn report(id: u32, pass: bool, detail: impl AsRef<str>) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {id}: {verdict} {}", detail.as_ref());
}

fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

fn to_model(m: &DMatrix<f64>) -> Matrix<f64> {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn rel_err(x: &[f64], reference: &DVector<f64>) -> f64 {
    let diff: f64 = x.iter().zip(reference.iter()).map(|(a, b)| (a - b).powi(2)).sum();
    diff.sqrt() / reference.norm()
}

// ---------------------------------------------------------------- criterion 1

#[test]
fn criterion_1_augmented_system_reaches_tikhonov_minimizer() {
    const TOL: f64 = 1e-6;
    const MAX_SWEEPS: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: (f64, usize) = (0.0, 0);
    let mut failures = 0;
    for trial in 0..20 {
        let eta = if trial % 2 == 0 { 0.1 } else { 1.0 };
        let a = uniform_matrix(&mut rng, 20, 20);
        let x = DVector::from_fn(20, |_, _| rng.random_range(-1.0..1.0));
        let b = &a * &x;
        let gram = a.transpose() * &a + DMatrix::identity(20, 20) * (eta * eta);
        let direct = gram.cholesky().expect("SPD").solve(&(a.transpose() * &b));

        let rows = to_model(&a);
        let mut state = AugmentedRowState::<f64>::zeros(20, 20);
        let mut err = f64::INFINITY;
        let mut sweeps = 0;
        while sweeps < MAX_SWEEPS {
            for k in 0..20 {
                regularized_row_update(&mut state, rows.row(k), b[k], k, eta, 1.0).unwrap();
            }
            sweeps += 1;
            if sweeps % 50 == 0 {
                err = rel_err(&state.z, &direct);
                if err < TOL {
                    break;
                }
            }
        }
        if err >= TOL {
            failures += 1;
        }
        if err > worst.0 || sweeps > worst.1 {
            worst = (worst.0.max(err), worst.1.max(sweeps));
        }
    }
    let pass = failures == 0;
    report(
        1,
        pass,
        format!(
            "20 instances K=M=20, eta in {{0.1, 1}}: worst rel err {:.2e} (tol {TOL:e}), max sweeps {} (limit {MAX_SWEEPS}), failures {failures}",
            worst.0, worst.1
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- criterion 2

#[test]
fn criterion_2_row_decoupled_matrix_solve_matches_normal_equations() {
    const TOL: f64 = 1e-5;
    let (k, m, n) = (4, 8, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let s_mod = uniform_matrix(&mut rng, k, m);
        let s_calib = uniform_matrix(&mut rng, k, n);
        let q = DMatrix::from_fn(m, n, |_, _| rng.random_range(0.1..1.0));
        let c = DVector::from_fn(m, |_, _| rng.random_range(0.0..1.0));
        let u = DVector::from_fn(k, |_, _| rng.random_range(-1.0..1.0));
        let gamma: f64 = rng.random_range(0.1..1.0);
        let mu: f64 = rng.random_range(0.1..1.0);
        let params = RegParams::new(0.0, 0.0, gamma, mu).unwrap();
        let (g2, m2) = (params.gamma_eff.powi(2), params.mu_eff.powi(2));

        let instance = ProblemInstance {
            s_true: None,
            s_mod: to_model(&s_mod),
            s_calib: to_model(&s_calib),
            q: ProjectionMap::from_dense(&to_model(&q)).unwrap(),
            c_true: None,
            u: Measurement::new(u.iter().copied().collect()).unwrap(),
            sigma: 0.0,
            seed: 0,
        };
        let image = Image::new(c.iter().copied().collect()).unwrap();
        let solved = solve_s(&instance, &image, &params, &SSchedule::sweeps(10_000))
            .unwrap()
            .state
            .s;

        // (c cᵀ + γ̃² I + µ̃² Q Qᵀ) s_k = c u_k + γ̃² s_mod,k + µ̃² Q s_calib,k
        let lhs = &c * c.transpose() + DMatrix::identity(m, m) * g2 + &q * q.transpose() * m2;
        let chol = lhs.cholesky().expect("SPD");
        for row in 0..k {
            let rhs = &c * u[row]
                + s_mod.row(row).transpose() * g2
                + &q * s_calib.row(row).transpose() * m2;
            let direct = chol.solve(&rhs);
            worst = worst.max(rel_err(solved.row(row), &direct));
        }
    }
    let pass = worst < TOL;
    report(
        2,
        pass,
        format!("5 instances K=4 M=8 N=4, 1e4 sweep pairs: worst per-row rel err {worst:.2e} (tol {TOL:e})"),
    );
    assert!(pass);
}

// ------------------------------------------------------------ criteria 3 and 5

fn reduced_grid(methods: Vec<Method>) -> GridSpec {
    GridSpec {
        gamma: powers_of_two([0, 2, 4]),
        mu: powers_of_two([0, 2, 4]),
        alpha: powers_of_two([12, 15, 18]),
        lambda: powers_of_two([4, 8, 12]),
        methods,
    }
}

/// `(seed, sigma, best joint l2, best c-with-S_mod l2)`
type Comparison = (u64, f64, f64, f64);

fn best_l2(records: &[SweepRecord], method: Method) -> f64 {
    let subset: Vec<SweepRecord> = records.iter().filter(|r| r.method == method).cloned().collect();
    select_best(&subset, Metric::L2).unwrap().best.l2_error
}

fn joint_vs_model_sweeps() -> &'static Vec<Comparison> {
    static CACHE: OnceLock<Vec<Comparison>> = OnceLock::new();
    CACHE.get_or_init(|| {
        let grid = reduced_grid(vec![Method::Joint, Method::CWithSeps]);
        let options = SweepOptions::new(KaczmarzSchedule::ACADEMIC);
        let mut out = Vec::new();
        for seed in 1..=3 {
            for sigma in SIGMAS {
                let instance = generate_instance(50, sigma, seed, &PhantomSpec::default_for(50)).unwrap();
                let records = run_sweep(&instance, &grid, &options).unwrap();
                assert!(records.iter().all(|r| r.status.is_ok()));
                out.push((
                    seed,
                    sigma,
                    best_l2(&records, Method::Joint),
                    best_l2(&records, Method::CWithSeps),
                ));
            }
        }
        out
    })
}

#[test]
fn criterion_3_joint_beats_model_only_reconstruction() {
    let results = joint_vs_model_sweeps();
    let mut pass = true;
    for seed in 1..=3 {
        let rows: Vec<&Comparison> = results.iter().filter(|r| r.0 == seed).collect();
        let wins = rows.iter().filter(|r| r.2 < r.3).count();
        for r in &rows {
            println!(
                "  seed {seed} sigma {:<7} joint {:.4}  c_with_Seps {:.4}",
                r.1, r.2, r.3
            );
        }
        pass &= wins >= 2;
    }
    report(
        3,
        pass,
        "best-over-grid joint l2 < best c_with_Seps l2 for >= 2 of 3 sigma in each of 3 seeds",
    );
    assert!(pass);
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[test]
fn criterion_5_joint_errors_near_reference_values() {
    const REFERENCE: [f64; 3] = [0.3158, 0.1124, 0.1027];
    const FACTOR: f64 = 3.0;
    let results = joint_vs_model_sweeps();
    let mut pass = true;
    for (sigma, reference) in SIGMAS.iter().zip(REFERENCE) {
        let ours = median(results.iter().filter(|r| r.1 == *sigma).map(|r| r.2).collect());
        let ratio = ours / reference;
        let within = (1.0 / FACTOR..=FACTOR).contains(&ratio);
        pass &= within;
        println!(
            "  sigma {sigma:<7} ours (median of 3 seeds) {ours:.4}  reference {reference:.4}  ratio {ratio:.2}"
        );
    }
    report(5, pass, format!("best joint l2 within a factor {FACTOR} of reference values"));
    assert!(pass);
}

// ---------------------------------------------------------------- criterion 4

#[test]
fn criterion_4_exact_operator_error_decreases_with_noise() {
    let grid = reduced_grid(vec![Method::CWithStrue]);
    let options = SweepOptions::new(KaczmarzSchedule::ACADEMIC);
    let medians: Vec<f64> = SIGMAS
        .iter()
        .map(|&sigma| {
            median(
                (1..=5)
                    .map(|seed| {
                        let instance =
                            generate_instance(50, sigma, seed, &PhantomSpec::default_for(50)).unwrap();
                        let records = run_sweep(&instance, &grid, &options).unwrap();
                        select_best(&records, Metric::L2).unwrap().best.l2_error
                    })
                    .collect(),
            )
        })
        .collect();
    let pass = medians.windows(2).all(|w| w[1] < w[0]);
    report(
        4,
        pass,
        format!(
            "median best c_with_Strue l2 over 5 seeds at sigma {SIGMAS:?}: {:.4} > {:.4} > {:.4}",
            medians[0], medians[1], medians[2]
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- criterion 6

#[test]
fn criterion_6_discrepancy_rate() {
    const MIN_SLOPE: f64 = 0.8;
    let cfg = RateConfig::default();
    let report_ = rate_experiment(&cfg, None).unwrap();
    for p in &report_.points {
        println!(
            "  delta+eps {:.4}  alpha {:.4e}  discrepancy {:.4e}",
            p.noise, p.alpha, p.discrepancy
        );
    }
    let pass = report_.slope >= MIN_SLOPE;
    report(
        6,
        pass,
        format!(
            "log-log slope of discrepancy vs noise over {} halvings from sigma {}: {:.3} (min {MIN_SLOPE})",
            cfg.levels, cfg.sigma0, report_.slope
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- criterion 7

#[test]
fn criterion_7_unit_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut checks: Vec<(&str, bool)> = Vec::new();
    let cplx = |rng: &mut ChaCha8Rng| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));

    // hyperplane projection: feasibility and idempotence at 1e-12
    let mut ok = true;
    for _ in 0..100 {
        let a: Vec<Complex64> = (0..5).map(|_| cplx(&mut rng)).collect();
        let z: Vec<Complex64> = (0..5).map(|_| cplx(&mut rng)).collect();
        let b = cplx(&mut rng);
        let p = project_hyperplane(&z, &a, b).unwrap();
        let pp = project_hyperplane(&p, &a, b).unwrap();
        ok &= (dot(&a, &p) - b).norm() < 1e-12;
        ok &= p.iter().zip(&pp).all(|(x, y)| (x - y).norm() < 1e-12);
    }
    checks.push(("hyperplane feasibility and idempotence (1e-12)", ok));

    // soft threshold: exact closed form
    let mut ok = true;
    for _ in 0..1000 {
        let x: f64 = rng.random_range(-2.0..2.0);
        let l: f64 = rng.random_range(0.0..1.0);
        let expect = x.signum() * (x.abs() - l).max(0.0);
        let got = soft_threshold(&[x], l).unwrap()[0];
        ok &= got == expect || (got == 0.0 && expect == 0.0);
    }
    checks.push(("soft threshold closed form (exact)", ok));

    // nonnegativity projection: idempotent
    let c: Vec<Complex64> = (0..50).map(|_| cplx(&mut rng)).collect();
    let once = project_nonneg(&c);
    let twice = project_nonneg(&once);
    checks.push(("nonnegativity projection idempotent (exact)", once == twice));

    // effective weights: exact formula, exact inverse on perfect squares
    let mut ok = true;
    for i in 0..=18 {
        let v = 2f64.powi(-i);
        let p = map_reg_params(v, v, v, v).unwrap();
        ok &= p.alpha_eff.to_bits() == (v / 2.0).sqrt().to_bits();
        ok &= p.gamma_eff == p.alpha_eff && p.mu_eff == p.alpha_eff && p.lambda == v;
        if i % 2 == 1 {
            ok &= 2.0 * p.alpha_eff * p.alpha_eff == v;
        }
    }
    checks.push(("parameter mapping (exact)", ok));

    // matrix roundtrip, including signed zeros and extremes
    let values = [0.0, -0.0, f64::MIN_POSITIVE, -f64::MAX, 1.0 / 3.0, 5e-324];
    let real = Matrix::new(2, 3, values.to_vec()).unwrap();
    let AnyMatrix::Real(back) = decode(&encode(&real)).unwrap() else { panic!() };
    let mut ok = back.as_slice().iter().zip(real.as_slice()).all(|(a, b)| a.to_bits() == b.to_bits());
    let z = Matrix::new(1, 3, values.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect()).unwrap();
    let AnyMatrix::Complex(zb) = decode(&encode(&z)).unwrap() else { panic!() };
    ok &= zb
        .as_slice()
        .iter()
        .zip(z.as_slice())
        .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits());
    checks.push(("matrix file roundtrip (bit-exact)", ok));

    // full pipeline determinism and CSV roundtrip
    let schedule = KaczmarzSchedule {
        outer_iterations: 5,
        c_sweeps_per_outer: 50,
        s_sweeps_per_outer: 30,
        relaxation_tau: 1.0,
        stop_rel_change: None,
    };
    let grid = GridSpec {
        gamma: vec![1.0, 0.25],
        mu: vec![1.0],
        alpha: vec![1e-4],
        lambda: vec![1e-3, 1e-4],
        methods: Method::ALL.to_vec(),
    };
    let run = |workers| {
        let instance = generate_instance(20, 0.05, 9, &PhantomSpec::default_for(20)).unwrap();
        let options = SweepOptions { schedule, workers: Some(workers) };
        let mut recs = run_sweep(&instance, &grid, &options).unwrap();
        recs.iter_mut().for_each(|r| r.wall_ms = 0.0);
        let params = RegParams::new(1e-4, 1e-3, 0.25, 1.0).unwrap();
        let joint = solve_joint(&instance, &params, &JointConfig::new(schedule)).unwrap();
        (recs, joint.c, joint.s)
    };
    let (a, b) = (run(1), run(2));
    checks.push(("same-seed pipeline determinism (bit-exact)", a == b));
    assert_eq!(a.0.len(), enumerate_grid(&grid).unwrap().len());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("results.csv");
    write_results_csv(&a.0, &path).unwrap();
    let back = read_results_csv(&path).unwrap();
    let same = |x: f64, y: f64| x.to_bits() == y.to_bits();
    let ok = back.len() == a.0.len()
        && back.iter().zip(&a.0).all(|(r, s)| {
            r.method == s.method
                && same(r.gamma, s.gamma)
                && same(r.lambda, s.lambda)
                && same(r.l2_error, s.l2_error)
                && same(r.ssim, s.ssim)
                && same(r.data_residual, s.data_residual)
                && same(r.j_final, s.j_final)
                && r.status == s.status
        });
    checks.push(("results CSV roundtrip (bit-exact)", ok));

    let pass = checks.iter().all(|c| c.1);
    for (name, ok) in &checks {
        println!("  {} {name}", if *ok { "ok  " } else { "FAIL" });
    }
    report(7, pass, format!("{} unit invariants", checks.len()));
    assert!(pass);
}

// ---------------------------------------------------------------- criterion 8

#[test]
fn criterion_8_complex_path_reduces_residual() {
    const MIN_REDUCTION: f64 = 10.0;
    let instance = generate_complex_instance(&ComplexInstanceSpec::small()).unwrap();
    assert_eq!(
        (instance.measurements(), instance.image_len(), instance.calib_len()),
        (64, 36, 9)
    );
    let params = RegParams::new(1e-4, 1e-4, 0.25, 1.0).unwrap();
    let outcome = solve_joint(&instance, &params, &JointConfig::new(KaczmarzSchedule::MPI)).unwrap();
    let zero = Image::zeros(instance.image_len());
    let initial = data_residual(&instance.s_mod, &zero, &instance.u).unwrap();
    let last = data_residual(&outcome.s, &outcome.c, &instance.u).unwrap();
    let baseline = solve_c(&instance.s_mod, &instance.u, &params, &CSchedule::sweeps(75)).unwrap();
    let model_only = data_residual(&instance.s_mod, &baseline.c_final, &instance.u).unwrap();
    let reduction = initial / last;
    let pass = outcome.history.len() == 10
        && outcome.history.records.iter().all(|r| r.objective.is_finite())
        && reduction >= MIN_REDUCTION;
    report(
        8,
        pass,
        format!(
            "complex K=64 M=36 N=9, 10x(75, 20) sweeps: residual {initial:.4e} -> {last:.4e} (x{reduction:.1}, min x{MIN_REDUCTION}); image-only with S_mod {model_only:.4e}"
        ),
    );
    assert!(pass);
}
