//! Regularized Kaczmarz reconstruction of the image for a fixed operator.
//!
//! Each cycle is one Kaczmarz sweep over all rows on the augmented system
//! of `‖Sc − u‖² + α̃²|c|₂²`, followed by the projection `P₊` and soft
//! thresholding with `λ`.

use crate::error::{ensure_dim, Result};
use crate::forward::eval_c_objective;
use crate::kaczmarz::{project_nonneg, relaxed_step, shrink, AugmentedRowState, RowOrder};
use crate::model::{validate_tau, Image, Matrix, RegParams};
use crate::scalar::{norm_sqr, Scalar};

/// Why an iterative solve stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopReason {
    SweepLimit,
    AbsChange,
    RelChange,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::SweepLimit => "sweep_limit",
            StopReason::AbsChange => "abs_change",
            StopReason::RelChange => "rel_change",
        }
    }
}

/// Change-based stopping thresholds, evaluated after every cycle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StopRule {
    /// `‖c^{j+1} − c^j‖ < abs_change`
    pub abs_change: Option<f64>,
    /// `‖c^{j+1} − c^j‖ / max(‖c^j‖, 1e-30) < rel_change`
    pub rel_change: Option<f64>,
}

impl StopRule {
    pub(crate) fn check(&self, change: f64, previous_norm: f64) -> Option<StopReason> {
        if let Some(t) = self.abs_change {
            if change < t {
                return Some(StopReason::AbsChange);
            }
        }
        if let Some(t) = self.rel_change {
            if change / previous_norm.max(1e-30) < t {
                return Some(StopReason::RelChange);
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CSchedule {
    pub sweeps: usize,
    pub tau: f64,
    pub stop: StopRule,
    pub order: RowOrder,
    /// Evaluate `J^c` after every cycle. Costs one extra matrix-vector
    /// product per sweep.
    pub record_objective: bool,
}

impl CSchedule {
    pub fn sweeps(sweeps: usize) -> Self {
        Self {
            sweeps,
            tau: 1.0,
            stop: StopRule::default(),
            order: RowOrder::Cyclic,
            record_objective: true,
        }
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn without_objective(mut self) -> Self {
        self.record_objective = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CSolveReport {
    pub c_final: Image,
    pub sweeps_run: usize,
    /// `J^c` after each cycle; empty when not recorded.
    pub per_sweep_objective: Vec<f64>,
    pub converged_by: StopReason,
}

/// Per-row denominators `α̃² + ‖S_k‖²`; `None` marks a degenerate row.
pub(crate) fn row_denominators<T: Scalar>(s: &Matrix<T>, eta: f64) -> Vec<Option<f64>> {
    let eta2 = eta * eta;
    let denoms: Vec<Option<f64>> = s
        .row_iter()
        .map(|row| {
            let d = eta2 + norm_sqr(row);
            (d > 0.0).then_some(d)
        })
        .collect();
    let skipped = denoms.iter().filter(|d| d.is_none()).count();
    if skipped > 0 {
        log::warn!("skipping {skipped} zero rows without regularization");
    }
    denoms
}

fn sweep_prepared<T: Scalar>(
    state: &mut AugmentedRowState<T>,
    s: &Matrix<T>,
    u: &[T],
    denoms: &[Option<f64>],
    eta: f64,
    tau: f64,
    order: &RowOrder,
) {
    let k_rows = s.rows();
    for j in 0..k_rows {
        let k = order.index(j, k_rows);
        if let Some(denom) = denoms[k] {
            relaxed_step(&mut state.z, &mut state.v[k], s.row(k), u[k], eta, tau, denom);
        }
    }
}

/// One full Kaczmarz pass over all rows of `S` with `η = α̃`. Updates the
/// (possibly complex) iterate in `state.z` and the auxiliary `state.v`.
pub fn c_sweep<T: Scalar>(
    state: &mut AugmentedRowState<T>,
    s: &Matrix<T>,
    u: &[T],
    alpha_eff: f64,
    tau: f64,
    order: &RowOrder,
) -> Result<()> {
    ensure_dim("iterate length", s.cols(), state.z.len())?;
    ensure_dim("auxiliary length", s.rows(), state.v.len())?;
    ensure_dim("measurement length", s.rows(), u.len())?;
    order.check_len(s.rows())?;
    let denoms = row_denominators(s, alpha_eff);
    sweep_prepared(state, s, u, &denoms, alpha_eff, tau, order);
    Ok(())
}

/// Image reconstruction from `c⁰ = 0`, `v⁰ = 0`.
pub fn solve_c<T: Scalar>(
    s: &Matrix<T>,
    u: &[T],
    params: &RegParams,
    schedule: &CSchedule,
) -> Result<CSolveReport> {
    solve_c_from(s, u, params, schedule, None)
}

/// Image reconstruction starting from `initial` (or zero) with `v⁰ = 0`.
pub fn solve_c_from<T: Scalar>(
    s: &Matrix<T>,
    u: &[T],
    params: &RegParams,
    schedule: &CSchedule,
    initial: Option<&Image>,
) -> Result<CSolveReport> {
    validate_tau(schedule.tau)?;
    ensure_dim("measurement length", s.rows(), u.len())?;
    schedule.order.check_len(s.rows())?;
    let m = s.cols();

    let mut c = match initial {
        Some(init) => {
            ensure_dim("initial image length", m, init.len())?;
            init.clone()
        }
        None => Image::zeros(m),
    };
    let mut state = AugmentedRowState::<T>::zeros(m, s.rows());
    for (z, &x) in state.z.iter_mut().zip(c.iter()) {
        *z = T::from_real(x);
    }

    let eta = params.alpha_eff;
    let denoms = row_denominators(s, eta);
    let mut objective = Vec::with_capacity(if schedule.record_objective { schedule.sweeps } else { 0 });
    let mut converged_by = StopReason::SweepLimit;
    let mut sweeps_run = 0;

    for _ in 0..schedule.sweeps {
        sweep_prepared(&mut state, s, u, &denoms, eta, schedule.tau, &schedule.order);

        // P₊ then T_λ, written back into the iterate
        let mut change_sqr = 0.0;
        let previous_norm = c.l2_norm();
        let projected = project_nonneg(&state.z);
        for ((z, cm), x) in state
            .z
            .iter_mut()
            .zip(c.as_mut_slice())
            .zip(projected.iter())
        {
            let next = shrink(*x, params.lambda);
            change_sqr += (next - *cm) * (next - *cm);
            *cm = next;
            *z = T::from_real(next);
        }
        sweeps_run += 1;

        if schedule.record_objective {
            objective.push(eval_c_objective(&c, s, u, params)?.total);
        }
        if let Some(reason) = schedule.stop.check(change_sqr.sqrt(), previous_norm) {
            converged_by = reason;
            break;
        }
    }

    Ok(CSolveReport {
        c_final: c,
        sweeps_run,
        per_sweep_objective: objective,
        converged_by,
    })
}
