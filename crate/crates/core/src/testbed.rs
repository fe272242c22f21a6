//! Synthetic problems.
//!
//! The academic family uses the discretized integral operator with kernel
//! `χ_[0,x)(t)`: `S*` is the lower-triangular matrix of ones (so `S*c` is a
//! cumulative sum), `Q` sums pairs of neighbouring columns, `S_mod = S* + η`,
//! `S_calib = S*Q` and `u = S*c* + ξ` with i.i.d. Gaussian `η`, `ξ`.
//!
//! Noise comes from ChaCha20 (RFC 7539 block function, 20 rounds) seeded with
//! `seed_from_u64(seed)`; each perturbation uses its own stream id, and normal
//! variates are produced by the Box–Muller transform in row-major order.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::forward::{apply_forward, apply_projection};
use crate::model::{Image, Matrix, Measurement, ProblemInstance, ProjectionMap};
use crate::scalar::Scalar;

/// Stream id of the operator perturbation `η`.
pub const MODEL_NOISE_STREAM: u64 = 1;
/// Stream id of the measurement perturbation `ξ`.
pub const MEASUREMENT_NOISE_STREAM: u64 = 2;
pub const NOISE_GENERATOR: &str = "chacha20";
pub const NOISE_TRANSFORM: &str = "box-muller";

/// `S*_{k,m} = 1` for `m ≤ k`.
pub fn build_true_operator(m: usize) -> Result<Matrix<f64>> {
    if m < 1 {
        return Err(Error::Invalid("operator size must be at least 1".into()));
    }
    Ok(Matrix::from_fn(m, m, |k, j| if j <= k { 1.0 } else { 0.0 }))
}

/// Column `n` has ones at rows `2n` and `2n + 1`.
pub fn build_projection_map(m: usize) -> Result<ProjectionMap> {
    if m < 2 || m % 2 != 0 {
        return Err(Error::Invalid(format!(
            "pairwise projection needs an even size >= 2, got {m}"
        )));
    }
    ProjectionMap::block_sum(m, 2)
}

/// Half-open index range `[start, end)` with a constant height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhantomKind {
    /// Two plateaus and a spike. For `M = 50`: `c[10..20] = 1.0`,
    /// `c[30..35] = 0.5`, `c[42] = 1.5`; other sizes scale the positions.
    TwoBlocksAndSpike,
    Custom(Vec<Segment>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub kind: PhantomKind,
    pub m: usize,
}

impl PhantomSpec {
    pub fn default_for(m: usize) -> Self {
        Self {
            kind: PhantomKind::TwoBlocksAndSpike,
            m,
        }
    }

    pub fn custom(m: usize, segments: Vec<Segment>) -> Self {
        Self {
            kind: PhantomKind::Custom(segments),
            m,
        }
    }
}

pub fn make_phantom(spec: &PhantomSpec) -> Result<Image> {
    let m = spec.m;
    let segments = match &spec.kind {
        PhantomKind::TwoBlocksAndSpike => {
            if m < 8 {
                return Err(Error::Invalid(format!(
                    "default phantom needs M >= 8, got {m}"
                )));
            }
            let at = |p: usize| p * m / 50;
            let seg = |a: usize, b: usize, height: f64| {
                let start = at(a);
                Segment {
                    start,
                    end: at(b).max(start + 1),
                    height,
                }
            };
            vec![seg(10, 20, 1.0), seg(30, 35, 0.5), seg(42, 43, 1.5)]
        }
        PhantomKind::Custom(segments) => segments.clone(),
    };
    let mut values = vec![0.0; m];
    for s in &segments {
        if !(s.height.is_finite() && s.height >= 0.0) {
            return Err(Error::Invalid(format!(
                "phantom height {} must be finite and nonnegative",
                s.height
            )));
        }
        if s.start >= s.end || s.end > m {
            return Err(Error::Invalid(format!(
                "phantom segment [{}, {}) outside [0, {m})",
                s.start, s.end
            )));
        }
        values[s.start..s.end].fill(s.height);
    }
    let image = Image::new(values)?;
    if image.iter().all(|&x| x == 0.0) {
        return Err(Error::Invalid("phantom is identically zero".into()));
    }
    Ok(image)
}

/// i.i.d. `N(0, σ²)` perturbation drawn from one ChaCha20 stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
    pub stream: u64,
}

impl NoiseSpec {
    pub fn new(sigma: f64, seed: u64, stream: u64) -> Self {
        Self {
            sigma,
            seed,
            stream,
        }
    }
}

/// Standard normal variates via Box–Muller, consumed in pairs.
pub struct GaussianStream {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, spare: None }
    }

    pub fn next_standard(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the logarithm finite
        let u1 = 1.0 - self.rng.random::<f64>();
        let u2 = self.rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}

/// Targets of [`perturb_gaussian`].
pub trait Perturb: Clone {
    fn perturbed(&self, draw: &mut dyn FnMut() -> f64) -> Self;
}

impl<T: Scalar> Perturb for Matrix<T> {
    fn perturbed(&self, draw: &mut dyn FnMut() -> f64) -> Self {
        let mut out = self.clone();
        for x in out.as_mut_slice() {
            *x = x.add_noise(draw);
        }
        out
    }
}

impl<T: Scalar> Perturb for Measurement<T> {
    fn perturbed(&self, draw: &mut dyn FnMut() -> f64) -> Self {
        let mut out = self.clone();
        for x in out.as_mut_slice() {
            *x = x.add_noise(draw);
        }
        out
    }
}

/// Adds `N(0, σ²)` to every entry in row-major order; complex entries get
/// independent real and imaginary draws.
pub fn perturb_gaussian<P: Perturb>(target: &P, noise: &NoiseSpec) -> Result<P> {
    if !(noise.sigma.is_finite() && noise.sigma >= 0.0) {
        return Err(Error::ParameterDomain {
            name: "sigma",
            value: noise.sigma,
            domain: "finite and >= 0",
        });
    }
    if noise.sigma == 0.0 {
        return Ok(target.clone());
    }
    let mut stream = GaussianStream::new(noise.seed, noise.stream);
    let sigma = noise.sigma;
    Ok(target.perturbed(&mut || sigma * stream.next_standard()))
}

/// Academic instance of size `M` (with `K = M`, `N = M/2`).
pub fn generate_instance(
    m: usize,
    sigma: f64,
    seed: u64,
    phantom: &PhantomSpec,
) -> Result<ProblemInstance<f64>> {
    if phantom.m != m {
        return Err(Error::dim("phantom length", m, phantom.m));
    }
    let s_true = build_true_operator(m)?;
    let q = build_projection_map(m)?;
    let c_true = make_phantom(phantom)?;
    assemble(s_true, q, c_true, sigma, seed)
}

fn assemble<T: Scalar>(
    s_true: Matrix<T>,
    q: ProjectionMap,
    c_true: Image,
    sigma: f64,
    seed: u64,
) -> Result<ProblemInstance<T>> {
    let s_mod = perturb_gaussian(&s_true, &NoiseSpec::new(sigma, seed, MODEL_NOISE_STREAM))?;
    let clean = apply_forward(&s_true, &c_true)?;
    let u = perturb_gaussian(&clean, &NoiseSpec::new(sigma, seed, MEASUREMENT_NOISE_STREAM))?;
    let s_calib = apply_projection(&s_true, &q)?;
    Ok(ProblemInstance {
        s_true: Some(s_true),
        s_mod,
        s_calib,
        q,
        c_true: Some(c_true),
        u,
        sigma,
        seed,
    })
}

/// `u* = S*c*` for synthetic instances.
pub fn clean_measurement<T: Scalar>(instance: &ProblemInstance<T>) -> Option<Measurement<T>> {
    match (&instance.s_true, &instance.c_true) {
        (Some(s), Some(c)) => apply_forward(s, c).ok(),
        _ => None,
    }
}

/// Complex-valued synthetic problem on an `nx × ny` grid with
/// `factor × factor` calibration binning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexInstanceSpec {
    pub nx: usize,
    pub ny: usize,
    pub factor: usize,
    pub measurements: usize,
    pub sigma: f64,
    pub seed: u64,
}

impl ComplexInstanceSpec {
    /// `K = 64`, `6 × 6` image, `3 × 3` calibration grid.
    pub fn small() -> Self {
        Self {
            nx: 6,
            ny: 6,
            factor: 2,
            measurements: 64,
            sigma: 0.01,
            seed: 1,
        }
    }
}

/// Rows are products of cosines on the grid carrying a row-dependent
/// phase, loosely shaped like frequency-domain MPI system functions:
/// `S*_{k,(x,y)} = e^{iφ_k} cos(π p (x+½)/nx) cos(π q (y+½)/ny) / (1 + (p+q)/4)`
/// with `(p, q)` enumerating a `√K`-square of frequency pairs.
pub fn mpi_like_operator(nx: usize, ny: usize, measurements: usize) -> Result<Matrix<Complex64>> {
    if nx == 0 || ny == 0 || measurements == 0 {
        return Err(Error::Invalid("operator dimensions must be positive".into()));
    }
    let side = (measurements as f64).sqrt().ceil() as usize;
    Ok(Matrix::from_fn(measurements, nx * ny, |k, pixel| {
        let (p, q) = ((k % side) as f64, (k / side) as f64);
        let (x, y) = ((pixel % nx) as f64, (pixel / nx) as f64);
        let amp = (PI * p * (x + 0.5) / nx as f64).cos() * (PI * q * (y + 0.5) / ny as f64).cos()
            / (1.0 + (p + q) / 4.0);
        Complex64::from_polar(amp, 0.37 * 2.0 * PI * k as f64)
    }))
}

/// Two square inclusions on the grid.
pub fn grid_phantom(nx: usize, ny: usize) -> Result<Image> {
    let mut values = vec![0.0; nx * ny];
    for y in 0..ny {
        for x in 0..nx {
            let (fx, fy) = (x as f64 / nx as f64, y as f64 / ny as f64);
            if (0.15..0.5).contains(&fx) && (0.15..0.5).contains(&fy) {
                values[y * nx + x] = 1.0;
            } else if (0.6..0.9).contains(&fx) && (0.55..0.9).contains(&fy) {
                values[y * nx + x] = 0.6;
            }
        }
    }
    Image::new(values)
}

pub fn generate_complex_instance(spec: &ComplexInstanceSpec) -> Result<ProblemInstance<Complex64>> {
    let s_true = mpi_like_operator(spec.nx, spec.ny, spec.measurements)?;
    let q = ProjectionMap::binning_2d(spec.nx, spec.ny, spec.factor)?;
    let c_true = grid_phantom(spec.nx, spec.ny)?;
    assemble(s_true, q, c_true, spec.sigma, spec.seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_instance;
    use proptest::prelude::*;

    #[test]
    fn true_operator_examples() {
        assert_eq!(build_true_operator(1).unwrap().as_slice(), &[1.0]);
        assert_eq!(
            build_true_operator(3).unwrap().as_slice(),
            &[1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0]
        );
        let ones = build_true_operator(50).unwrap().as_slice().iter().filter(|&&x| x == 1.0).count();
        assert_eq!(ones, 50 * 51 / 2);
        assert!(build_true_operator(0).is_err());
    }

    #[test]
    fn projection_map_examples() {
        let q = build_projection_map(4).unwrap();
        assert_eq!(q.to_dense().as_slice(), &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
        let q2 = build_projection_map(2).unwrap();
        assert_eq!(q2.to_dense().as_slice(), &[1.0, 1.0]);
        assert!(build_projection_map(5).is_err());
        let q50 = build_projection_map(50).unwrap();
        assert_eq!(q50.cols(), 25);
        let mut seen = vec![0; 50];
        for col in q50.columns() {
            assert_eq!(col.iter().map(|&(_, v)| v).sum::<f64>(), 2.0);
            for &(m, _) in col {
                seen[m] += 1;
            }
        }
        assert!(seen.iter().all(|&s| s == 1));
    }

    #[test]
    fn default_phantom() {
        let c = make_phantom(&PhantomSpec::default_for(50)).unwrap();
        assert_eq!(c.l1_norm(), 14.0);
        assert_eq!(c.iter().filter(|&&x| x > 0.0).count(), 16);
        assert!(c.is_nonnegative());
        assert_eq!(c[10], 1.0);
        assert_eq!(c[19], 1.0);
        assert_eq!(c[20], 0.0);
        assert_eq!(c[34], 0.5);
        assert_eq!(c[42], 1.5);
        for m in [8, 16, 100] {
            let c = make_phantom(&PhantomSpec::default_for(m)).unwrap();
            assert!(c.is_nonnegative() && c.l1_norm() > 0.0);
        }
        assert!(make_phantom(&PhantomSpec::default_for(6)).is_err());
    }

    #[test]
    fn custom_phantom() {
        let c = make_phantom(&PhantomSpec::custom(5, vec![Segment { start: 0, end: 5, height: 1.0 }])).unwrap();
        assert_eq!(&*c, &[1.0; 5]);
        assert!(make_phantom(&PhantomSpec::custom(5, vec![Segment { start: 0, end: 2, height: -1.0 }])).is_err());
    }

    #[test]
    fn noise_determinism_and_zero_sigma() {
        let s = build_true_operator(10).unwrap();
        assert_eq!(perturb_gaussian(&s, &NoiseSpec::new(0.0, 3, 1)).unwrap(), s);
        let a = perturb_gaussian(&s, &NoiseSpec::new(0.1, 3, 1)).unwrap();
        let b = perturb_gaussian(&s, &NoiseSpec::new(0.1, 3, 1)).unwrap();
        assert_eq!(a, b);
        let c = perturb_gaussian(&s, &NoiseSpec::new(0.1, 4, 1)).unwrap();
        assert_ne!(a, c);
        let d = perturb_gaussian(&s, &NoiseSpec::new(0.1, 3, 2)).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn noise_statistics() {
        // 40000 draws: 4σ bounds on mean and standard deviation
        let z = Matrix::<f64>::zeros(200, 200);
        let noisy = perturb_gaussian(&z, &NoiseSpec::new(0.05, 17, 1)).unwrap();
        let n = 40_000.0;
        let mean = noisy.as_slice().iter().sum::<f64>() / n;
        let var = noisy.as_slice().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.002, "mean {mean}");
        assert!((var.sqrt() - 0.05).abs() < 0.003, "std {}", var.sqrt());
    }

    #[test]
    fn complex_noise_uses_both_parts() {
        let z = Matrix::<Complex64>::zeros(2, 2);
        let n = perturb_gaussian(&z, &NoiseSpec::new(1.0, 1, 1)).unwrap();
        assert!(n.as_slice().iter().all(|x| x.re != 0.0 && x.im != 0.0));
    }

    #[test]
    fn instance_examples() {
        let phantom = PhantomSpec::default_for(50);
        let clean = generate_instance(50, 0.0, 1, &phantom).unwrap();
        assert_eq!(clean.s_mod, *clean.s_true.as_ref().unwrap());
        assert_eq!(clean.u, clean_measurement(&clean).unwrap());

        let inst = generate_instance(50, 0.05, 1, &phantom).unwrap();
        assert!(validate_instance(&inst).is_ok());
        let s_true = inst.s_true.as_ref().unwrap();
        assert_eq!(inst.s_calib, apply_projection(s_true, &inst.q).unwrap());
        let diff: f64 = inst.s_mod.as_slice().iter().zip(s_true.as_slice()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let expected = 0.05 * 50.0;
        assert!((diff - expected).abs() < 0.1 * expected, "‖η‖_F = {diff}");

        assert_eq!(inst, generate_instance(50, 0.05, 1, &phantom).unwrap());
        assert_ne!(inst.s_mod, generate_instance(50, 0.05, 2, &phantom).unwrap().s_mod);
    }

    #[test]
    fn complex_instance_is_valid() {
        let inst = generate_complex_instance(&ComplexInstanceSpec::small()).unwrap();
        assert!(validate_instance(&inst).is_ok());
        assert_eq!((inst.measurements(), inst.image_len(), inst.calib_len()), (64, 36, 9));
    }

    proptest! {
        #[test]
        fn true_operator_is_cumulative_sum(c in prop::collection::vec(-3.0f64..3.0, 1..30)) {
            let s = build_true_operator(c.len()).unwrap();
            let u = apply_forward(&s, &c).unwrap();
            let mut acc = 0.0;
            for (k, &x) in c.iter().enumerate() {
                acc += x;
                prop_assert!((u[k] - acc).abs() <= 1e-12 * (1.0 + acc.abs()));
            }
        }
    }
}
