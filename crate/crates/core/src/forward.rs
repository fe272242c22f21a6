//! Forward operator `(c, S) ↦ Sc`, resolution map `S ↦ SQ` and objective
//! evaluation.

use crate::error::{ensure_dim, Result};
use crate::model::{Matrix, Measurement, ProblemInstance, ProjectionMap, RegParams};
use crate::scalar::{dist_sqr, dot_real, Scalar};

/// Value of an objective split into its terms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FunctionalValue {
    pub total: f64,
    pub data_term: f64,
    pub model_term: f64,
    pub calib_term: f64,
    pub l2_term: f64,
    pub l1_term: f64,
}

impl FunctionalValue {
    fn from_terms(data: f64, model: f64, calib: f64, l2: f64, l1: f64) -> Self {
        Self {
            total: data + model + calib + l2 + l1,
            data_term: data,
            model_term: model,
            calib_term: calib,
            l2_term: l2,
            l1_term: l1,
        }
    }

    pub fn is_finite(&self) -> bool {
        [
            self.total,
            self.data_term,
            self.model_term,
            self.calib_term,
            self.l2_term,
            self.l1_term,
        ]
        .iter()
        .all(|x| x.is_finite())
    }
}

pub fn apply_forward<T: Scalar>(s: &Matrix<T>, c: &[f64]) -> Result<Measurement<T>> {
    ensure_dim("forward operator columns vs image", s.cols(), c.len())?;
    Ok(Measurement::from_vec_unchecked(
        s.row_iter().map(|row| dot_real(row, c)).collect(),
    ))
}

/// `SQ`, touching only the nonzeros of `Q`.
pub fn apply_projection<T: Scalar>(s: &Matrix<T>, q: &ProjectionMap) -> Result<Matrix<T>> {
    ensure_dim("projection rows vs matrix columns", s.cols(), q.rows())?;
    let n = q.cols();
    let mut out = Matrix::zeros(s.rows(), n);
    for k in 0..s.rows() {
        let row = s.row(k);
        let out_row = out.row_mut(k);
        for (dst, col) in out_row.iter_mut().zip(q.columns()) {
            *dst = project_entry(row, col);
        }
    }
    Ok(out)
}

/// `S_k Q_n` for one row and one sparse column.
#[inline]
pub(crate) fn project_entry<T: Scalar>(row: &[T], col: &[(usize, f64)]) -> T {
    col.iter()
        .fold(T::zero(), |acc, &(m, q)| acc + row[m].scale(q))
}

/// `‖Sc − u‖²`
pub(crate) fn residual_sqr<T: Scalar>(s: &Matrix<T>, c: &[f64], u: &[T]) -> f64 {
    s.row_iter()
        .zip(u)
        .map(|(row, &uk)| (dot_real(row, c) - uk).norm_sqr())
        .sum()
}

/// `‖SQ − S_calib‖²_F`
pub(crate) fn calib_residual_sqr<T: Scalar>(
    s: &Matrix<T>,
    q: &ProjectionMap,
    s_calib: &Matrix<T>,
) -> f64 {
    s.row_iter()
        .zip(s_calib.row_iter())
        .map(|(row, calib)| row_calib_residual_sqr(row, q, calib))
        .sum()
}

#[inline]
pub(crate) fn row_calib_residual_sqr<T: Scalar>(
    row: &[T],
    q: &ProjectionMap,
    calib_row: &[T],
) -> f64 {
    q.columns()
        .zip(calib_row)
        .map(|(col, &target)| (project_entry(row, col) - target).norm_sqr())
        .sum()
}

fn check_joint_dims<T: Scalar>(
    c: &[f64],
    s: &Matrix<T>,
    instance: &ProblemInstance<T>,
) -> Result<()> {
    ensure_dim("matrix rows vs s_mod rows", instance.s_mod.rows(), s.rows())?;
    ensure_dim("matrix cols vs s_mod cols", instance.s_mod.cols(), s.cols())?;
    ensure_dim("image length", s.cols(), c.len())?;
    ensure_dim("measurement length", s.rows(), instance.u.len())?;
    ensure_dim("projection rows", s.cols(), instance.q.rows())?;
    ensure_dim("calibration rows", s.rows(), instance.s_calib.rows())?;
    ensure_dim("calibration cols", instance.q.cols(), instance.s_calib.cols())?;
    Ok(())
}

/// The joint functional
/// `½‖Sc−u‖² + γ/2‖S−S_mod‖²_F + µ/2‖SQ−S_calib‖²_F + α|c|₂² + λ|c|₁`.
pub fn eval_joint<T: Scalar>(
    c: &[f64],
    s: &Matrix<T>,
    instance: &ProblemInstance<T>,
    params: &RegParams,
) -> Result<FunctionalValue> {
    check_joint_dims(c, s, instance)?;
    let data = 0.5 * residual_sqr(s, c, &instance.u);
    let model = 0.5 * params.gamma * dist_sqr(s.as_slice(), instance.s_mod.as_slice());
    let calib = 0.5 * params.mu * calib_residual_sqr(s, &instance.q, &instance.s_calib);
    let l2 = params.alpha * c.iter().map(|x| x * x).sum::<f64>();
    let l1 = params.lambda * c.iter().map(|x| x.abs()).sum::<f64>();
    Ok(FunctionalValue::from_terms(data, model, calib, l2, l1))
}

/// Image subproblem `J^c(c) = ‖Sc−u‖² + α̃²|c|₂² + λ|c|₁`.
pub fn eval_c_objective<T: Scalar>(
    c: &[f64],
    s: &Matrix<T>,
    u: &[T],
    params: &RegParams,
) -> Result<FunctionalValue> {
    ensure_dim("image length", s.cols(), c.len())?;
    ensure_dim("measurement length", s.rows(), u.len())?;
    let data = residual_sqr(s, c, u);
    let a2 = params.alpha_eff * params.alpha_eff;
    let l2 = a2 * c.iter().map(|x| x * x).sum::<f64>();
    let l1 = params.lambda * c.iter().map(|x| x.abs()).sum::<f64>();
    Ok(FunctionalValue::from_terms(data, 0.0, 0.0, l2, l1))
}

/// Matrix subproblem
/// `J^S(S) = ‖Sc−u‖² + γ̃²‖S−S_mod‖²_F + µ̃²‖SQ−S_calib‖²_F`.
pub fn eval_s_objective<T: Scalar>(
    s: &Matrix<T>,
    c: &[f64],
    u: &[T],
    instance: &ProblemInstance<T>,
    params: &RegParams,
) -> Result<FunctionalValue> {
    check_joint_dims(c, s, instance)?;
    ensure_dim("measurement length", s.rows(), u.len())?;
    let data = residual_sqr(s, c, u);
    let g2 = params.gamma_eff * params.gamma_eff;
    let m2 = params.mu_eff * params.mu_eff;
    let model = g2 * dist_sqr(s.as_slice(), instance.s_mod.as_slice());
    let calib = m2 * calib_residual_sqr(s, &instance.q, &instance.s_calib);
    Ok(FunctionalValue::from_terms(data, model, calib, 0.0, 0.0))
}

/// Contribution of row `k` to `J^S`.
pub(crate) fn s_objective_row<T: Scalar>(
    row: &[T],
    c: &[f64],
    u_k: T,
    model_row: &[T],
    q: &ProjectionMap,
    calib_row: &[T],
    gamma_eff: f64,
    mu_eff: f64,
) -> f64 {
    (dot_real(row, c) - u_k).norm_sqr()
        + gamma_eff * gamma_eff * dist_sqr(row, model_row)
        + mu_eff * mu_eff * row_calib_residual_sqr(row, q, calib_row)
}
