//! Regularization-parameter grids, parallel sweeps over reconstruction
//! methods, best-parameter selection and the noise-rate experiment.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::{eval_c_objective, eval_joint};
use crate::image_solver::{solve_c, CSchedule};
use crate::joint::{solve_joint, JointConfig};
use crate::metrics::{data_residual, empirical_rate, l2_error, ssim_1d, SsimOptions};
use crate::model::{Image, KaczmarzSchedule, Matrix, ProblemInstance, RegParams};
use crate::scalar::Scalar;
use crate::testbed::{clean_measurement, generate_instance, PhantomSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Joint,
    /// Image only, with the inexact model matrix.
    CWithSeps,
    /// Image only, with the exact operator (synthetic instances).
    CWithStrue,
    /// Image only on the coarse grid, with the calibration matrix.
    CWithScalib,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Joint,
        Method::CWithSeps,
        Method::CWithStrue,
        Method::CWithScalib,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Joint => "joint",
            Method::CWithSeps => "c_with_Seps",
            Method::CWithStrue => "c_with_Strue",
            Method::CWithScalib => "c_with_Scalib",
        }
    }

    pub fn is_joint(&self) -> bool {
        matches!(self, Method::Joint)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown method {s:?}")))
    }
}

/// Parameter lists and methods of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub gamma: Vec<f64>,
    pub mu: Vec<f64>,
    pub alpha: Vec<f64>,
    pub lambda: Vec<f64>,
    pub methods: Vec<Method>,
}

/// `[2^-i for i in range]`
pub fn powers_of_two(exponents: impl IntoIterator<Item = i32>) -> Vec<f64> {
    exponents.into_iter().map(|i| 2f64.powi(-i)).collect()
}

impl GridSpec {
    /// γ, µ ∈ 2^-(0..=18), α ∈ 2^-(10..=18), λ ∈ 2^-(1..=12).
    pub fn academic(methods: Vec<Method>) -> Self {
        Self {
            gamma: powers_of_two(0..=18),
            mu: powers_of_two(0..=18),
            alpha: powers_of_two(10..=18),
            lambda: powers_of_two(1..=12),
            methods,
        }
    }

    pub fn single(params: &RegParams, methods: Vec<Method>) -> Self {
        Self {
            gamma: vec![params.gamma],
            mu: vec![params.mu],
            alpha: vec![params.alpha],
            lambda: vec![params.lambda],
            methods,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (name, list) in [
            ("gamma", &self.gamma),
            ("mu", &self.mu),
            ("alpha", &self.alpha),
            ("lambda", &self.lambda),
        ] {
            if list.is_empty() {
                problems.push(format!("{name} list is empty"));
            }
            if list.iter().any(|v| !v.is_finite() || *v < 0.0) {
                problems.push(format!("{name} values must be finite and >= 0"));
            }
            for (i, a) in list.iter().enumerate() {
                if list[..i].contains(a) {
                    problems.push(format!("{name} contains duplicate {a}"));
                }
            }
        }
        if self.methods.is_empty() {
            problems.push("methods list is empty".into());
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                problems.push(format!("duplicate method {m}"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }
}

/// One point of the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Combination {
    pub index: usize,
    pub method: Method,
    pub gamma: f64,
    pub mu: f64,
    pub alpha: f64,
    pub lambda: f64,
}

impl Combination {
    pub fn params(&self) -> Result<RegParams> {
        RegParams::new(self.alpha, self.lambda, self.gamma, self.mu)
    }
}

/// Cartesian product per method, in method order. Image-only methods ignore
/// `γ` and `µ`, which are set to 0.
pub fn enumerate_grid(spec: &GridSpec) -> Result<Vec<Combination>> {
    spec.validate()?;
    let mut out = Vec::new();
    let placeholder = [0.0];
    for &method in &spec.methods {
        let (gammas, mus): (&[f64], &[f64]) = if method.is_joint() {
            (&spec.gamma, &spec.mu)
        } else {
            (&placeholder, &placeholder)
        };
        for &gamma in gammas {
            for &mu in mus {
                for &alpha in &spec.alpha {
                    for &lambda in &spec.lambda {
                        out.push(Combination {
                            index: out.len(),
                            method,
                            gamma,
                            mu,
                            alpha,
                            lambda,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    Failed(String),
}

impl RunStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, RunStatus::Ok)
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunStatus::Ok => f.write_str("ok"),
            RunStatus::Failed(msg) => write!(f, "failed: {msg}"),
        }
    }
}

/// Final metrics of one run. Metrics of failed runs are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub index: usize,
    pub method: Method,
    pub gamma: f64,
    pub mu: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub seed: u64,
    pub outer_iters: usize,
    pub l2_error: f64,
    pub ssim: f64,
    pub data_residual: f64,
    /// Joint functional for the joint method, `J^c` for image-only methods.
    pub j_final: f64,
    pub wall_ms: f64,
    pub status: RunStatus,
}

impl SweepRecord {
    fn failed(combo: &Combination, seed: u64, wall_ms: f64, err: &Error) -> Self {
        Self {
            index: combo.index,
            method: combo.method,
            gamma: combo.gamma,
            mu: combo.mu,
            alpha: combo.alpha,
            lambda: combo.lambda,
            seed,
            outer_iters: 0,
            l2_error: f64::NAN,
            ssim: f64::NAN,
            data_residual: f64::NAN,
            j_final: f64::NAN,
            wall_ms,
            status: RunStatus::Failed(err.to_string()),
        }
    }
}

/// Result of a single method run, before metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodRun {
    /// Reconstruction on the fine grid.
    pub c: Image,
    pub outer_iters: usize,
    pub data_residual: f64,
    pub j_final: f64,
}

/// Runs one method with one parameter set.
pub fn run_method<T: Scalar>(
    instance: &ProblemInstance<T>,
    method: Method,
    params: &RegParams,
    schedule: &KaczmarzSchedule,
) -> Result<MethodRun> {
    schedule.validate()?;
    let c_schedule = CSchedule::sweeps(schedule.c_sweeps_per_outer)
        .with_tau(schedule.relaxation_tau)
        .without_objective();
    let image_only = |s: &Matrix<T>| -> Result<(Image, f64, f64)> {
        let c = solve_c(s, &instance.u, params, &c_schedule)?.c_final;
        let res = data_residual(s, &c, &instance.u)?;
        let j = eval_c_objective(&c, s, &instance.u, params)?.total;
        Ok((c, res, j))
    };
    match method {
        Method::Joint => {
            let out = solve_joint(instance, params, &JointConfig::new(*schedule))
                .map_err(|f| f.source)?;
            Ok(MethodRun {
                data_residual: data_residual(&out.s, &out.c, &instance.u)?,
                j_final: eval_joint(&out.c, &out.s, instance, params)?.total,
                outer_iters: out.history.len(),
                c: out.c,
            })
        }
        Method::CWithSeps => {
            let (c, data_residual, j_final) = image_only(&instance.s_mod)?;
            Ok(MethodRun { c, outer_iters: 1, data_residual, j_final })
        }
        Method::CWithStrue => {
            let s_true = instance
                .s_true
                .as_ref()
                .ok_or_else(|| Error::Invalid("instance has no true operator".into()))?;
            let (c, data_residual, j_final) = image_only(s_true)?;
            Ok(MethodRun { c, outer_iters: 1, data_residual, j_final })
        }
        Method::CWithScalib => {
            let (coarse, data_residual, j_final) = image_only(&instance.s_calib)?;
            let c = Image::new(instance.q.upsample(&coarse)?)?;
            Ok(MethodRun { c, outer_iters: 1, data_residual, j_final })
        }
    }
}

fn run_combination(
    instance: &ProblemInstance<f64>,
    combo: &Combination,
    schedule: &KaczmarzSchedule,
) -> SweepRecord {
    let started = Instant::now();
    let outcome = (|| {
        let params = combo.params()?;
        let run = run_method(instance, combo.method, &params, schedule)?;
        let truth = instance
            .c_true
            .as_ref()
            .ok_or_else(|| Error::Invalid("instance has no ground-truth image".into()))?;
        let l2 = l2_error(&run.c, truth)?;
        let ssim = ssim_1d(&run.c, truth, &SsimOptions::default())?;
        if !(l2.is_finite() && ssim.is_finite() && run.data_residual.is_finite() && run.j_final.is_finite()) {
            return Err(Error::Invalid("non-finite metrics".into()));
        }
        Ok((run, l2, ssim))
    })();
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    match outcome {
        Ok((run, l2_error, ssim)) => SweepRecord {
            index: combo.index,
            method: combo.method,
            gamma: combo.gamma,
            mu: combo.mu,
            alpha: combo.alpha,
            lambda: combo.lambda,
            seed: instance.seed,
            outer_iters: run.outer_iters,
            l2_error,
            ssim,
            data_residual: run.data_residual,
            j_final: run.j_final,
            wall_ms,
            status: RunStatus::Ok,
        },
        Err(e) => {
            log::warn!("combination {} ({}) failed: {e}", combo.index, combo.method);
            SweepRecord::failed(combo, instance.seed, wall_ms, &e)
        }
    }
}

/// Execution settings of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub schedule: KaczmarzSchedule,
    /// Worker threads; `None` uses rayon's default.
    pub workers: Option<usize>,
}

impl SweepOptions {
    pub fn new(schedule: KaczmarzSchedule) -> Self {
        Self { schedule, workers: None }
    }
}

fn with_pool<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(Error::ParameterDomain {
            name: "workers",
            value: 0.0,
            domain: ">= 1",
        }),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs every grid combination on one shared instance. Records come back in
/// combination order; failed runs are kept as failed rows.
pub fn run_sweep(
    instance: &ProblemInstance<f64>,
    spec: &GridSpec,
    options: &SweepOptions,
) -> Result<Vec<SweepRecord>> {
    instance.ensure_valid()?;
    options.schedule.validate()?;
    let combos = enumerate_grid(spec)?;
    log::info!("sweeping {} combinations", combos.len());
    with_pool(options.workers, || {
        combos
            .par_iter()
            .map(|c| run_combination(instance, c, &options.schedule))
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    L2,
    OneMinusSsim,
}

impl Metric {
    pub fn value(&self, r: &SweepRecord) -> f64 {
        match self {
            Metric::L2 => r.l2_error,
            Metric::OneMinusSsim => 1.0 - r.ssim,
        }
    }
}

/// Best record plus the successful records ranked best first, as
/// `(position in input, metric value)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub best: SweepRecord,
    pub ranking: Vec<(usize, f64)>,
}

fn tie_break(a: &SweepRecord, b: &SweepRecord) -> Ordering {
    a.gamma
        .total_cmp(&b.gamma)
        .then(a.mu.total_cmp(&b.mu))
        .then(a.alpha.total_cmp(&b.alpha))
        .then(a.lambda.total_cmp(&b.lambda))
        .then(a.method.as_str().cmp(b.method.as_str()))
}

/// Argmin of `metric` over successful records, ties broken by
/// `(γ, µ, α, λ)` then method name.
pub fn select_best(records: &[SweepRecord], metric: Metric) -> Result<Selection> {
    let mut ranking: Vec<(usize, f64)> = records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.status.is_ok() && metric.value(r).is_finite())
        .map(|(i, r)| (i, metric.value(r)))
        .collect();
    ranking.sort_by(|&(i, a), &(j, b)| a.total_cmp(&b).then_with(|| tie_break(&records[i], &records[j])));
    let &(first, _) = ranking.first().ok_or(Error::EmptySelection)?;
    Ok(Selection {
        best: records[first].clone(),
        ranking,
    })
}

/// Noise-halving experiment with `α` tied to the noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct RateConfig {
    pub m: usize,
    /// Noise level of the first (largest) level.
    pub sigma0: f64,
    pub levels: usize,
    pub seed: u64,
    /// `α = alpha_scale · (δ + ε)` with `δ + ε = 2σ`.
    pub alpha_scale: f64,
    pub gamma: f64,
    /// `µ = mu_ratio · α`
    pub mu_ratio: f64,
    /// `λ = lambda_ratio · α`
    pub lambda_ratio: f64,
    pub schedule: KaczmarzSchedule,
}

impl Default for RateConfig {
    fn default() -> Self {
        Self {
            m: 50,
            sigma0: 0.08,
            levels: 5,
            seed: 1,
            alpha_scale: 1.0,
            gamma: 0.25,
            mu_ratio: 1.0,
            lambda_ratio: 0.1,
            schedule: KaczmarzSchedule::ACADEMIC,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub sigma: f64,
    /// `δ + ε`
    pub noise: f64,
    pub alpha: f64,
    /// `‖S^α c^α − u*‖`
    pub discrepancy: f64,
    pub l2_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub points: Vec<RatePoint>,
    /// Log-log slope of discrepancy against `δ + ε`.
    pub slope: f64,
}

/// Halves the noise level `levels` times and measures the discrepancy of the
/// joint reconstruction against the noise-free data.
pub fn rate_experiment(config: &RateConfig, workers: Option<usize>) -> Result<RateReport> {
    if config.levels < 2 {
        return Err(Error::Invalid("rate experiment needs at least two levels".into()));
    }
    let sigmas: Vec<f64> = (0..config.levels)
        .map(|i| config.sigma0 * 0.5f64.powi(i as i32))
        .collect();
    let phantom = PhantomSpec::default_for(config.m);
    let points = with_pool(workers, || {
        sigmas
            .par_iter()
            .map(|&sigma| -> Result<RatePoint> {
                let instance = generate_instance(config.m, sigma, config.seed, &phantom)?;
                let noise = 2.0 * sigma;
                let alpha = config.alpha_scale * noise;
                let params = RegParams::new(
                    alpha,
                    config.lambda_ratio * alpha,
                    config.gamma,
                    config.mu_ratio * alpha,
                )?;
                let out = solve_joint(&instance, &params, &JointConfig::new(config.schedule))
                    .map_err(|f| f.source)?;
                let clean = clean_measurement(&instance).expect("synthetic instance");
                let truth = instance.c_true.as_ref().expect("synthetic instance");
                Ok(RatePoint {
                    sigma,
                    noise,
                    alpha,
                    discrepancy: data_residual(&out.s, &out.c, &clean)?,
                    l2_error: l2_error(&out.c, truth)?,
                })
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.noise, p.discrepancy)).collect();
    Ok(RateReport {
        slope: empirical_rate(&pairs)?,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(n: usize, methods: Vec<Method>) -> GridSpec {
        let list = powers_of_two(0..n as i32);
        GridSpec {
            gamma: list.clone(),
            mu: list.clone(),
            alpha: list.clone(),
            lambda: list,
            methods,
        }
    }

    fn record(index: usize, l2: f64, gamma: f64, method: Method) -> SweepRecord {
        SweepRecord {
            index,
            method,
            gamma,
            mu: 1.0,
            alpha: 1.0,
            lambda: 1.0,
            seed: 0,
            outer_iters: 1,
            l2_error: l2,
            ssim: 0.5,
            data_residual: 0.0,
            j_final: 0.0,
            wall_ms: 0.0,
            status: RunStatus::Ok,
        }
    }

    #[test]
    fn grid_counts() {
        assert_eq!(enumerate_grid(&GridSpec::academic(vec![Method::Joint])).unwrap().len(), 38988);
        assert_eq!(enumerate_grid(&spec(1, vec![Method::Joint])).unwrap().len(), 1);
        assert_eq!(enumerate_grid(&spec(2, vec![Method::Joint])).unwrap().len(), 16);
        let all = enumerate_grid(&spec(2, Method::ALL.to_vec())).unwrap();
        assert_eq!(all.len(), 16 + 3 * 4);
        assert!(all.iter().enumerate().all(|(i, c)| c.index == i));
        assert!(all.iter().filter(|c| !c.method.is_joint()).all(|c| c.gamma == 0.0 && c.mu == 0.0));
    }

    #[test]
    fn grid_validation_collects_problems() {
        let mut bad = spec(2, vec![]);
        bad.alpha.clear();
        bad.lambda = vec![0.5, 0.5];
        let Err(Error::Config(problems)) = enumerate_grid(&bad) else {
            panic!("expected config error");
        };
        assert_eq!(problems.len(), 3, "{problems:?}");
    }

    #[test]
    fn method_names_roundtrip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("c_only".parse::<Method>().is_err());
    }

    #[test]
    fn select_best_examples() {
        let one = [record(0, 3.0, 1.0, Method::Joint)];
        assert_eq!(select_best(&one, Metric::L2).unwrap().best, one[0]);
        let two = [record(0, 3.0, 1.0, Method::Joint), record(1, 2.0, 1.0, Method::Joint)];
        assert_eq!(select_best(&two, Metric::L2).unwrap().best.index, 1);
        let tie = [record(0, 2.0, 0.5, Method::Joint), record(1, 2.0, 0.25, Method::Joint)];
        assert_eq!(select_best(&tie, Metric::L2).unwrap().best.index, 1);
        let by_name = [record(0, 2.0, 0.5, Method::Joint), record(1, 2.0, 0.5, Method::CWithSeps)];
        assert_eq!(select_best(&by_name, Metric::L2).unwrap().best.method, Method::CWithSeps);
    }

    #[test]
    fn select_best_skips_failures() {
        let mut failed = record(0, 0.1, 1.0, Method::Joint);
        failed.status = RunStatus::Failed("boom".into());
        let recs = [failed.clone(), record(1, 5.0, 1.0, Method::Joint)];
        let sel = select_best(&recs, Metric::OneMinusSsim).unwrap();
        assert_eq!(sel.best.index, 1);
        assert_eq!(sel.ranking.len(), 1);
        assert!(matches!(select_best(&[failed], Metric::L2), Err(Error::EmptySelection)));
        assert!(matches!(select_best(&[], Metric::L2), Err(Error::EmptySelection)));
    }

    proptest! {
        #[test]
        fn select_best_is_permutation_invariant(
            values in prop::collection::vec((0u8..4, 0u8..3), 1..12),
            seed in any::<u64>(),
        ) {
            let recs: Vec<SweepRecord> = values
                .iter()
                .enumerate()
                .map(|(i, &(l2, g))| record(i, l2 as f64, 2f64.powi(-(g as i32)), Method::ALL[i % 4]))
                .collect();
            let best = select_best(&recs, Metric::L2).unwrap().best;
            let mut shuffled = recs.clone();
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let other = select_best(&shuffled, Metric::L2).unwrap().best;
            prop_assert_eq!(
                (best.l2_error, best.gamma, best.method),
                (other.l2_error, other.gamma, other.method)
            );
        }
    }

    fn tiny_instance() -> ProblemInstance<f64> {
        generate_instance(10, 0.02, 5, &PhantomSpec::default_for(10)).unwrap()
    }

    fn tiny_schedule() -> KaczmarzSchedule {
        KaczmarzSchedule {
            outer_iterations: 3,
            c_sweeps_per_outer: 30,
            s_sweeps_per_outer: 10,
            relaxation_tau: 1.0,
            stop_rel_change: None,
        }
    }

    #[test]
    fn single_combination_matches_direct_solve() {
        let inst = tiny_instance();
        let p = RegParams::new(1e-3, 1e-3, 0.25, 1.0).unwrap();
        let recs = run_sweep(&inst, &GridSpec::single(&p, vec![Method::Joint]), &SweepOptions::new(tiny_schedule())).unwrap();
        assert_eq!(recs.len(), 1);
        let direct = solve_joint(&inst, &p, &JointConfig::new(tiny_schedule())).unwrap();
        assert_eq!(recs[0].l2_error, l2_error(&direct.c, inst.c_true.as_ref().unwrap()).unwrap());
        assert_eq!(recs[0].outer_iters, 3);
        assert!(recs[0].status.is_ok());
    }

    #[test]
    fn sweep_is_deterministic_across_worker_counts() {
        let inst = tiny_instance();
        let mut g = spec(2, Method::ALL.to_vec());
        g.alpha = vec![1e-3, 1e-4];
        let mut opts = SweepOptions::new(tiny_schedule());
        opts.workers = Some(1);
        let a = run_sweep(&inst, &g, &opts).unwrap();
        opts.workers = Some(3);
        let b = run_sweep(&inst, &g, &opts).unwrap();
        assert_eq!(a.len(), enumerate_grid(&g).unwrap().len());
        let strip = |r: &[SweepRecord]| -> Vec<SweepRecord> {
            r.iter().cloned().map(|mut x| { x.wall_ms = 0.0; x }).collect()
        };
        assert_eq!(strip(&a), strip(&b));
        assert!(a.iter().all(|r| r.status.is_ok()));
    }

    #[test]
    fn runs_without_ground_truth_are_failed_rows() {
        let mut inst = tiny_instance();
        inst.s_true = None;
        inst.c_true = None;
        let p = RegParams::new(1e-3, 1e-3, 0.0, 0.0).unwrap();
        let g = GridSpec::single(&p, vec![Method::CWithStrue, Method::CWithSeps]);
        let recs = run_sweep(&inst, &g, &SweepOptions::new(tiny_schedule())).unwrap();
        assert_eq!(recs.len(), 2);
        assert!(recs.iter().all(|r| matches!(r.status, RunStatus::Failed(_)) && r.l2_error.is_nan()));
        assert!(run_method(&inst, Method::CWithStrue, &p, &tiny_schedule()).is_err());
        assert!(run_method(&inst, Method::CWithSeps, &p, &tiny_schedule()).is_ok());
    }

    #[test]
    fn calib_method_lifts_to_fine_grid() {
        let inst = tiny_instance();
        let p = RegParams::new(1e-3, 1e-3, 0.0, 0.0).unwrap();
        let run = run_method(&inst, Method::CWithScalib, &p, &tiny_schedule()).unwrap();
        assert_eq!(run.c.len(), 10);
        assert!(run.c.chunks(2).all(|pair| pair[0] == pair[1]));
    }
}
