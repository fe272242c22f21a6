//! Shared domain types.

use std::fmt;
use std::ops::Deref;

use crate::error::{Error, Result};
use crate::scalar::{Scalar, ScalarField};

/// Dense row-major matrix. Holds system matrices (`S`, `S_mod`, `S_calib`,
/// iterates) as well as auxiliary per-entry state.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    /// Wraps a row-major buffer. Rejects empty shapes, mismatched buffer
    /// lengths and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Invalid(format!(
                "matrix shape {rows}x{cols} has an empty dimension"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::dim("matrix buffer", rows * cols, data.len()));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::Invalid(format!(
                "matrix entry ({}, {}) is not finite",
                i / cols,
                i % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| T::from_real(if i == j { 1.0 } else { 0.0 }))
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[i * self.cols + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.cols)
    }

    pub fn frobenius_norm(&self) -> f64 {
        crate::scalar::norm(&self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for row in self.data.chunks(self.cols.max(1)) {
            list.entry(&row);
        }
        list.finish()
    }
}

/// Real image / concentration vector `c ∈ ℝ^M`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image(Vec<f64>);

impl Image {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Invalid("image must have at least one entry".into()));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invalid("image entries must be finite".into()));
        }
        Ok(Self(values))
    }

    pub fn zeros(len: usize) -> Self {
        assert!(len > 0, "image length must be positive");
        Self(vec![0.0; len])
    }

    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&x| x >= 0.0)
    }

    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|x| x.abs()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl Deref for Image {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Measurement vector `u`, one entry per system-matrix row.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement<T>(Vec<T>);

impl<T: Scalar> Measurement<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::Invalid("measurement entries must be finite".into()));
        }
        Ok(Self(values))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![T::zero(); len])
    }

    pub(crate) fn from_vec_unchecked(values: Vec<T>) -> Self {
        Self(values)
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }
}

impl<T> Deref for Measurement<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.0
    }
}

/// Sparse real `M×N` matrix `Q` mapping a fine system matrix to the
/// calibration grid via `S ↦ SQ`. Stored column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMap {
    rows: usize,
    columns: Vec<Vec<(usize, f64)>>,
}

impl ProjectionMap {
    /// Builds `Q` from per-column `(row, value)` lists. Zero values are
    /// dropped; every column must keep at least one nonzero.
    pub fn from_columns(rows: usize, columns: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        if rows == 0 || columns.is_empty() {
            return Err(Error::Invalid("projection map must be at least 1x1".into()));
        }
        let mut cleaned = Vec::with_capacity(columns.len());
        for (n, col) in columns.into_iter().enumerate() {
            let mut entries: Vec<(usize, f64)> = Vec::with_capacity(col.len());
            for (m, value) in col {
                if m >= rows {
                    return Err(Error::Invalid(format!(
                        "projection column {n} references row {m} of {rows}"
                    )));
                }
                if !value.is_finite() {
                    return Err(Error::Invalid(format!(
                        "projection column {n} has a non-finite value"
                    )));
                }
                if value != 0.0 {
                    entries.push((m, value));
                }
            }
            entries.sort_by_key(|&(m, _)| m);
            if entries.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::Invalid(format!(
                    "projection column {n} lists a row twice"
                )));
            }
            if entries.is_empty() {
                return Err(Error::Invalid(format!("projection column {n} is all zeros")));
            }
            cleaned.push(entries);
        }
        Ok(Self {
            rows,
            columns: cleaned,
        })
    }

    /// Converts a dense real `M×N` matrix.
    pub fn from_dense(q: &Matrix<f64>) -> Result<Self> {
        let columns = (0..q.cols())
            .map(|n| (0..q.rows()).map(|m| (m, q.get(m, n))).collect())
            .collect();
        Self::from_columns(q.rows(), columns)
    }

    /// Sums `factor` consecutive fine columns into one coarse column.
    pub fn block_sum(fine: usize, factor: usize) -> Result<Self> {
        if factor == 0 || fine == 0 || fine % factor != 0 {
            return Err(Error::Invalid(format!(
                "cannot bin {fine} columns by a factor of {factor}"
            )));
        }
        let columns = (0..fine / factor)
            .map(|n| (n * factor..(n + 1) * factor).map(|m| (m, 1.0)).collect())
            .collect();
        Self::from_columns(fine, columns)
    }

    /// Sums `factor × factor` pixel blocks of an `nx × ny` row-major grid.
    pub fn binning_2d(nx: usize, ny: usize, factor: usize) -> Result<Self> {
        if factor == 0 || nx % factor != 0 || ny % factor != 0 || nx == 0 || ny == 0 {
            return Err(Error::Invalid(format!(
                "cannot bin a {nx}x{ny} grid by a factor of {factor}"
            )));
        }
        let (cx, cy) = (nx / factor, ny / factor);
        let mut columns = Vec::with_capacity(cx * cy);
        for by in 0..cy {
            for bx in 0..cx {
                let mut col = Vec::with_capacity(factor * factor);
                for dy in 0..factor {
                    for dx in 0..factor {
                        let (x, y) = (bx * factor + dx, by * factor + dy);
                        col.push((y * nx + x, 1.0));
                    }
                }
                columns.push(col);
            }
        }
        Self::from_columns(nx * ny, columns)
    }

    /// `M`, the fine dimension.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// `N`, the coarse dimension.
    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, n: usize) -> &[(usize, f64)] {
        &self.columns[n]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[(usize, f64)]> {
        self.columns.iter().map(|c| c.as_slice())
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn column_norm_sqr(&self, n: usize) -> f64 {
        self.columns[n].iter().map(|&(_, q)| q * q).sum()
    }

    pub fn to_dense(&self) -> Matrix<f64> {
        let mut dense = Matrix::zeros(self.rows, self.cols());
        for (n, col) in self.columns.iter().enumerate() {
            for &(m, q) in col {
                dense.set(m, n, q);
            }
        }
        dense
    }

    /// `Q x` for a coarse real vector `x` (length `N`).
    pub fn upsample(&self, coarse: &[f64]) -> Result<Vec<f64>> {
        crate::error::ensure_dim("projection upsample", self.cols(), coarse.len())?;
        let mut fine = vec![0.0; self.rows];
        for (col, &x) in self.columns.iter().zip(coarse) {
            for &(m, q) in col {
                fine[m] += q * x;
            }
        }
        Ok(fine)
    }
}

/// Regularization parameters of the joint functional together with the
/// effective weights used by the Kaczmarz solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegParams {
    pub alpha: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub mu: f64,
    /// `α̃ = √(α/2)`
    pub alpha_eff: f64,
    /// `γ̃ = √(γ/2)`
    pub gamma_eff: f64,
    /// `µ̃ = √(µ/2)`
    pub mu_eff: f64,
}

impl RegParams {
    pub fn new(alpha: f64, lambda: f64, gamma: f64, mu: f64) -> Result<Self> {
        map_reg_params(alpha, lambda, gamma, mu)
    }
}

/// Maps `(α, λ, γ, µ)` of the joint functional onto the effective weights
/// `α̃ = √(α/2)`, `γ̃ = √(γ/2)`, `µ̃ = √(µ/2)`; `λ` passes through.
pub fn map_reg_params(alpha: f64, lambda: f64, gamma: f64, mu: f64) -> Result<RegParams> {
    for (name, value) in [
        ("alpha", alpha),
        ("lambda", lambda),
        ("gamma", gamma),
        ("mu", mu),
    ] {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::ParameterDomain {
                name,
                value,
                domain: "finite and >= 0",
            });
        }
    }
    Ok(RegParams {
        alpha,
        lambda,
        gamma,
        mu,
        alpha_eff: (alpha / 2.0).sqrt(),
        gamma_eff: (gamma / 2.0).sqrt(),
        mu_eff: (mu / 2.0).sqrt(),
    })
}

/// Outer/inner iteration counts of the alternating solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KaczmarzSchedule {
    pub outer_iterations: usize,
    pub c_sweeps_per_outer: usize,
    pub s_sweeps_per_outer: usize,
    pub relaxation_tau: f64,
    /// Stop the outer loop once ‖c^{j+1} − c^j‖ / ‖c^j‖ falls below this.
    pub stop_rel_change: Option<f64>,
}

impl KaczmarzSchedule {
    /// 100 outer iterations of 500 image sweeps and 300 matrix sweeps.
    pub const ACADEMIC: KaczmarzSchedule = KaczmarzSchedule {
        outer_iterations: 100,
        c_sweeps_per_outer: 500,
        s_sweeps_per_outer: 300,
        relaxation_tau: 1.0,
        stop_rel_change: None,
    };

    /// 10 outer iterations of 75 image sweeps and 20 matrix sweeps.
    pub const MPI: KaczmarzSchedule = KaczmarzSchedule {
        outer_iterations: 10,
        c_sweeps_per_outer: 75,
        s_sweeps_per_outer: 20,
        relaxation_tau: 1.0,
        stop_rel_change: None,
    };

    pub fn validate(&self) -> Result<()> {
        validate_tau(self.relaxation_tau)?;
        if let Some(t) = self.stop_rel_change {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::ParameterDomain {
                    name: "stop_rel_change",
                    value: t,
                    domain: "> 0",
                });
            }
        }
        Ok(())
    }
}

impl Default for KaczmarzSchedule {
    fn default() -> Self {
        Self::ACADEMIC
    }
}

pub(crate) fn validate_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 2.0 {
        Ok(())
    } else {
        Err(Error::ParameterDomain {
            name: "relaxation_tau",
            value: tau,
            domain: "strictly inside (0, 2)",
        })
    }
}

/// One reconstruction problem: data, operator information and, for
/// synthetic problems, the ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance<T> {
    pub s_true: Option<Matrix<T>>,
    pub s_mod: Matrix<T>,
    pub s_calib: Matrix<T>,
    pub q: ProjectionMap,
    pub c_true: Option<Image>,
    pub u: Measurement<T>,
    pub sigma: f64,
    pub seed: u64,
}

impl<T: Scalar> ProblemInstance<T> {
    pub fn field(&self) -> ScalarField {
        T::FIELD
    }

    /// `K`
    pub fn measurements(&self) -> usize {
        self.s_mod.rows()
    }

    /// `M`
    pub fn image_len(&self) -> usize {
        self.s_mod.cols()
    }

    /// `N`
    pub fn calib_len(&self) -> usize {
        self.s_calib.cols()
    }

    pub fn is_synthetic(&self) -> bool {
        self.s_true.is_some() && self.c_true.is_some()
    }

    pub(crate) fn ensure_valid(&self) -> Result<()> {
        let report = validate_instance(self);
        if report.is_ok() {
            Ok(())
        } else {
            Err(Error::Invalid(report.to_string()))
        }
    }
}

/// One violated instance invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: &str) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}: {}", v.kind, v.detail)?;
        }
        Ok(())
    }
}

/// Checks the dimensional and structural invariants of an instance.
/// Violations are returned as data.
pub fn validate_instance<T: Scalar>(instance: &ProblemInstance<T>) -> ValidationReport {
    let mut violations = Vec::new();
    let mut push = |kind: &'static str, detail: String| violations.push(Violation { kind, detail });

    let (k, m) = instance.s_mod.shape();
    let (kc, n) = instance.s_calib.shape();
    if kc != k {
        push(
            "calib row mismatch",
            format!("s_calib has {kc} rows, s_mod has {k}"),
        );
    }
    if instance.q.rows() != m {
        push(
            "model/Q row mismatch",
            format!("Q has {} rows, s_mod has {m} columns", instance.q.rows()),
        );
    }
    if instance.q.cols() != n {
        push(
            "calib/Q column mismatch",
            format!("s_calib has {n} columns, Q has {}", instance.q.cols()),
        );
    }
    if instance.u.len() != k {
        push(
            "measurement length",
            format!("u has {} entries, expected K = {k}", instance.u.len()),
        );
    }
    if let Some(s_true) = &instance.s_true {
        if s_true.shape() != (k, m) {
            push(
                "true operator shape",
                format!("s_true is {:?}, expected ({k}, {m})", s_true.shape()),
            );
        }
    }
    if let Some(c_true) = &instance.c_true {
        if c_true.len() != m {
            push(
                "image length",
                format!("c_true has {} entries, expected M = {m}", c_true.len()),
            );
        }
    }
    if instance.s_true.is_some() != instance.c_true.is_some() {
        push(
            "synthetic ground truth",
            "s_true and c_true must be present together".into(),
        );
    }
    if !(instance.sigma.is_finite() && instance.sigma >= 0.0) {
        push("noise level", format!("sigma = {}", instance.sigma));
    }
    if !instance.s_mod.is_finite() || !instance.s_calib.is_finite() {
        push("non-finite entries", "system matrices must be finite".into());
    }
    if instance.u.iter().any(|x| !x.is_finite()) {
        push("non-finite entries", "measurement must be finite".into());
    }
    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testbed;

    fn academic() -> ProblemInstance<f64> {
        testbed::generate_instance(50, 0.05, 1, &testbed::PhantomSpec::default_for(50)).unwrap()
    }

    #[test]
    fn consistent_instance_validates() {
        assert!(validate_instance(&academic()).is_ok());
    }

    #[test]
    fn calib_column_mismatch_is_reported() {
        let mut inst = academic();
        inst.s_calib = Matrix::zeros(50, 26);
        let report = validate_instance(&inst);
        assert!(report.has("calib/Q column mismatch"), "{report}");
    }

    #[test]
    fn short_measurement_is_reported() {
        let mut inst = academic();
        inst.u = Measurement::zeros(49);
        let report = validate_instance(&inst);
        assert!(report.has("measurement length"));
        assert_eq!(report.violations.len(), 1);
        assert_eq!(validate_instance(&inst), report);
    }

    #[test]
    fn param_mapping_examples() {
        let p = map_reg_params(2.0, 0.0, 0.5, 0.0).unwrap();
        assert_eq!(p.alpha_eff, 1.0);
        assert_eq!(p.gamma_eff, 0.5);
        let z = map_reg_params(0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!((z.alpha_eff, z.gamma_eff, z.mu_eff), (0.0, 0.0, 0.0));
        assert!(map_reg_params(-1.0, 0.0, 0.0, 0.0).is_err());
        assert!(map_reg_params(1.0, f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn matrix_rejects_bad_buffers() {
        assert!(Matrix::<f64>::new(2, 2, vec![1.0; 3]).is_err());
        assert!(Matrix::<f64>::new(0, 2, vec![]).is_err());
        assert!(Matrix::new(1, 2, vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn projection_map_rejects_zero_column() {
        assert!(ProjectionMap::from_columns(2, vec![vec![(0, 1.0)], vec![(1, 0.0)]]).is_err());
        assert!(ProjectionMap::from_columns(2, vec![vec![(2, 1.0)]]).is_err());
    }

    #[test]
    fn binning_2d_covers_grid_once() {
        let q = ProjectionMap::binning_2d(6, 6, 2).unwrap();
        assert_eq!((q.rows(), q.cols()), (36, 9));
        let mut seen = vec![0; 36];
        for col in q.columns() {
            assert_eq!(col.len(), 4);
            for &(m, _) in col {
                seen[m] += 1;
            }
        }
        assert!(seen.iter().all(|&s| s == 1));
    }

    #[test]
    fn schedule_rejects_bad_tau() {
        let mut s = KaczmarzSchedule::ACADEMIC;
        assert!(s.validate().is_ok());
        s.relaxation_tau = 2.0;
        assert!(s.validate().is_err());
        s.relaxation_tau = 0.0;
        assert!(s.validate().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn effective_params_square_back(a in 0.0f64..1e6, g in 0.0f64..1e6, m in 0.0f64..1e6) {
                let p = map_reg_params(a, 0.1, g, m).unwrap();
                // sqrt is correctly rounded; squaring back is within one ulp-scale
                prop_assert!((2.0 * p.alpha_eff * p.alpha_eff - a).abs() <= 4.0 * f64::EPSILON * a);
                prop_assert!((2.0 * p.gamma_eff * p.gamma_eff - g).abs() <= 4.0 * f64::EPSILON * g);
                prop_assert!((2.0 * p.mu_eff * p.mu_eff - m).abs() <= 4.0 * f64::EPSILON * m);
            }
        }
    }
}
