//! Regularized Kaczmarz reconstruction of the system matrix for a fixed
//! image.
//!
//! `J^S` splits into independent row problems
//! `|S_k c − u_k|² + γ̃²‖S_k − S_mod,k‖² + µ̃²‖S_k Q − S_calib,k‖²`, so every
//! row carries its own auxiliaries (`v_k` for the measurement equation,
//! `w_k,n` for the calibration equations) and rows may be processed in any
//! order or in parallel without changing the result.

use rayon::prelude::*;

use crate::error::{ensure_dim, Result};
use crate::forward::{project_entry, s_objective_row};
use crate::kaczmarz::relaxed_step;
use crate::model::{validate_tau, Image, Matrix, ProblemInstance, ProjectionMap, RegParams};
use crate::scalar::Scalar;

/// Iterate of the matrix solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SSolveState<T> {
    pub s: Matrix<T>,
    /// One auxiliary per measurement row.
    pub v: Vec<T>,
    /// One auxiliary per (row, calibration column) pair, `K×N`.
    pub w: Matrix<T>,
}

impl<T: Scalar> SSolveState<T> {
    /// `S⁰ = S_mod`, `v⁰ = 0`, `w⁰ = 0`.
    pub fn initial(instance: &ProblemInstance<T>) -> Self {
        Self::warm(instance.s_mod.clone(), instance.calib_len())
    }

    /// Starts from `s` with zeroed auxiliaries.
    pub fn warm(s: Matrix<T>, calib_cols: usize) -> Self {
        let k = s.rows();
        Self {
            w: Matrix::zeros(k, calib_cols),
            v: vec![T::zero(); k],
            s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SSchedule {
    /// Number of (by-c, by-Q) sweep pairs.
    pub sweeps: usize,
    pub tau: f64,
    /// Record `J^S` after every sweep pair.
    pub record_trace: bool,
}

impl SSchedule {
    pub fn sweeps(sweeps: usize) -> Self {
        Self {
            sweeps,
            tau: 1.0,
            record_trace: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SSolveReport<T> {
    pub state: SSolveState<T>,
    /// `J^S` after each sweep pair; empty when not recorded.
    pub trace: Vec<f64>,
}

/// Coefficients shared by all rows of one solve.
struct RowSweep<'a, T> {
    c: &'a [T],
    /// `γ̃² + ‖c‖²`, `None` when zero
    c_denom: Option<f64>,
    q: &'a ProjectionMap,
    /// `γ̃² + µ̃²‖Q_n‖²` per column, `None` when zero
    q_denoms: Vec<Option<f64>>,
    gamma_eff: f64,
    mu_eff: f64,
    tau: f64,
}

impl<'a, T: Scalar> RowSweep<'a, T> {
    fn new(
        c: Option<&'a [T]>,
        q: &'a ProjectionMap,
        gamma_eff: f64,
        mu_eff: f64,
        tau: f64,
    ) -> Self {
        let g2 = gamma_eff * gamma_eff;
        let c_denom = c.and_then(|c| {
            let d = g2 + c.iter().map(|x| x.norm_sqr()).sum::<f64>();
            if d == 0.0 {
                log::warn!("zero image without model regularization: skipping sweeps by c");
            }
            (d > 0.0).then_some(d)
        });
        let c = c.unwrap_or(&[]);
        let q_denoms: Vec<Option<f64>> = (0..q.cols())
            .map(|n| {
                let d = g2 + mu_eff * mu_eff * q.column_norm_sqr(n);
                (d > 0.0).then_some(d)
            })
            .collect();
        if q_denoms.iter().any(Option::is_none) {
            log::warn!("calibration equations degenerate (γ̃ = µ̃ = 0): skipping sweeps by Q");
        }
        Self {
            c,
            c_denom,
            q,
            q_denoms,
            gamma_eff,
            mu_eff,
            tau,
        }
    }

    /// `S_k ← S_k + K cᵀ`, `v_k ← v_k + γ̃ K` with
    /// `K = τ(u_k − S_k c − γ̃ v_k)/(γ̃² + ‖c‖²)`.
    #[inline]
    fn by_c(&self, row: &mut [T], v_k: &mut T, u_k: T) {
        if let Some(denom) = self.c_denom {
            relaxed_step(row, v_k, self.c, u_k, self.gamma_eff, self.tau, denom);
        }
    }

    /// For `n = 0..N`: `S_k ← S_k + K µ̃ Q̄_nᵀ`, `w_k,n ← w_k,n + γ̃ K` with
    /// `K = τ(µ̃(S_calib,k,n − S_k Q_n) − γ̃ w_k,n)/(γ̃² + µ̃²‖Q_n‖²)`.
    #[inline]
    fn by_calib(&self, row: &mut [T], w_row: &mut [T], calib_row: &[T]) {
        for (n, (w, &target)) in w_row.iter_mut().zip(calib_row).enumerate() {
            let Some(denom) = self.q_denoms[n] else {
                continue;
            };
            let col = self.q.column(n);
            let residual =
                (target - project_entry(row, col)).scale(self.mu_eff) - w.scale(self.gamma_eff);
            let k = residual.scale(self.tau / denom);
            let step = k.scale(self.mu_eff);
            for &(m, qv) in col {
                row[m] += step.scale(qv);
            }
            *w += k.scale(self.gamma_eff);
        }
    }
}

fn lift<T: Scalar>(c: &[f64]) -> Vec<T> {
    c.iter().map(|&x| T::from_real(x)).collect()
}

fn check_state<T: Scalar>(state: &SSolveState<T>, c_len: usize, u_len: usize) -> Result<()> {
    let (k, m) = state.s.shape();
    ensure_dim("image length", m, c_len)?;
    ensure_dim("measurement length", k, u_len)?;
    ensure_dim("auxiliary v length", k, state.v.len())?;
    ensure_dim("auxiliary w rows", k, state.w.rows())?;
    Ok(())
}

/// One pass of measurement-equation updates over all rows `k = 0..K`.
pub fn s_sweep_by_c<T: Scalar>(
    state: &mut SSolveState<T>,
    c: &[f64],
    u: &[T],
    gamma_eff: f64,
    tau: f64,
) -> Result<()> {
    check_state(state, c.len(), u.len())?;
    let c_lift = lift::<T>(c);
    let denom = gamma_eff * gamma_eff + c.iter().map(|x| x * x).sum::<f64>();
    if denom == 0.0 {
        log::warn!("zero image without model regularization: skipping sweep by c");
        return Ok(());
    }
    for k in 0..state.s.rows() {
        relaxed_step(state.s.row_mut(k), &mut state.v[k], &c_lift, u[k], gamma_eff, tau, denom);
    }
    Ok(())
}

/// One pass of calibration-equation updates: for every row, all `N`
/// columns of `Q` in cyclic order.
pub fn s_sweep_by_calib<T: Scalar>(
    state: &mut SSolveState<T>,
    q: &ProjectionMap,
    s_calib: &Matrix<T>,
    gamma_eff: f64,
    mu_eff: f64,
    tau: f64,
) -> Result<()> {
    ensure_dim("projection rows", state.s.cols(), q.rows())?;
    ensure_dim("calibration rows", state.s.rows(), s_calib.rows())?;
    ensure_dim("calibration cols", q.cols(), s_calib.cols())?;
    ensure_dim("auxiliary w cols", q.cols(), state.w.cols())?;
    let sweep = RowSweep::<T>::new(None, q, gamma_eff, mu_eff, tau);
    for k in 0..state.s.rows() {
        sweep.by_calib(state.s.row_mut(k), state.w.row_mut(k), s_calib.row(k));
    }
    Ok(())
}

/// Matrix reconstruction from `S⁰ = S_mod` with zero auxiliaries.
pub fn solve_s<T: Scalar>(
    instance: &ProblemInstance<T>,
    c: &Image,
    params: &RegParams,
    schedule: &SSchedule,
) -> Result<SSolveReport<T>> {
    solve_s_from(SSolveState::initial(instance), instance, c, params, schedule)
}

/// Runs `schedule.sweeps` (by-c, by-Q) sweep pairs from `state`.
pub fn solve_s_from<T: Scalar>(
    mut state: SSolveState<T>,
    instance: &ProblemInstance<T>,
    c: &Image,
    params: &RegParams,
    schedule: &SSchedule,
) -> Result<SSolveReport<T>> {
    validate_tau(schedule.tau)?;
    instance.ensure_valid()?;
    check_state(&state, c.len(), instance.u.len())?;
    ensure_dim("state cols vs s_mod cols", instance.image_len(), state.s.cols())?;
    ensure_dim("auxiliary w cols", instance.calib_len(), state.w.cols())?;

    let c_lift = lift::<T>(c);
    let sweep = RowSweep::new(
        Some(&c_lift),
        &instance.q,
        params.gamma_eff,
        params.mu_eff,
        schedule.tau,
    );
    let (m, n) = (instance.image_len(), instance.calib_len());
    let sweeps = schedule.sweeps;
    let record = schedule.record_trace;

    // rows are independent: each runs all its sweep pairs on private state
    let row_traces: Vec<Vec<f64>> = state
        .s
        .as_mut_slice()
        .par_chunks_mut(m)
        .zip(state.v.par_iter_mut())
        .zip(state.w.as_mut_slice().par_chunks_mut(n))
        .enumerate()
        .map(|(k, ((row, v_k), w_row))| {
            let u_k = instance.u[k];
            let calib_row = instance.s_calib.row(k);
            let mut trace = Vec::with_capacity(if record { sweeps } else { 0 });
            for _ in 0..sweeps {
                sweep.by_c(row, v_k, u_k);
                sweep.by_calib(row, w_row, calib_row);
                if record {
                    trace.push(s_objective_row(
                        row,
                        c,
                        u_k,
                        instance.s_mod.row(k),
                        &instance.q,
                        calib_row,
                        params.gamma_eff,
                        params.mu_eff,
                    ));
                }
            }
            trace
        })
        .collect();

    let trace = if record {
        (0..sweeps)
            .map(|j| row_traces.iter().map(|t| t[j]).sum())
            .collect()
    } else {
        Vec::new()
    };
    Ok(SSolveReport { state, trace })
}
