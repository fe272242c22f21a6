//! Alternating minimization of the joint functional: each outer iteration
//! reconstructs the image for the current matrix, then the matrix for the
//! new image.

use std::fmt;
use std::time::Instant;

use crate::error::Error;
use crate::forward::{eval_joint, FunctionalValue};
use crate::image_solver::{solve_c_from, CSchedule, StopReason, StopRule};
use crate::kaczmarz::RowOrder;
use crate::metrics::l2_error;
use crate::model::{Image, KaczmarzSchedule, Matrix, ProblemInstance, RegParams};
use crate::scalar::Scalar;
use crate::system_solver::{solve_s_from, SSchedule, SSolveState};

/// Which matrix iterates are kept in the history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnapshotPolicy {
    None,
    /// First and last outer iteration only.
    #[default]
    FirstLast,
    All,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointConfig {
    pub schedule: KaczmarzSchedule,
    pub snapshots: SnapshotPolicy,
    /// Start every image solve from the previous image instead of zero.
    pub warm_start_c: bool,
    /// Start every matrix solve from the previous matrix instead of `S_mod`.
    /// Auxiliaries are reset either way, so the matrix penalty is then
    /// centered on the previous iterate rather than on `S_mod`.
    pub warm_start_s: bool,
    /// Record per-sweep inner objectives (costly).
    pub record_inner: bool,
}

impl JointConfig {
    pub fn new(schedule: KaczmarzSchedule) -> Self {
        Self {
            schedule,
            snapshots: SnapshotPolicy::default(),
            warm_start_c: false,
            warm_start_s: false,
            record_inner: false,
        }
    }
}

impl Default for JointConfig {
    fn default() -> Self {
        Self::new(KaczmarzSchedule::ACADEMIC)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointRecord<T> {
    /// 0-based outer iteration index.
    pub outer: usize,
    pub c: Image,
    pub s: Option<Matrix<T>>,
    pub objective: FunctionalValue,
    /// `‖c − c*‖` when the ground truth is known.
    pub l2_error: Option<f64>,
    /// Last inner objectives, when recorded.
    pub c_objective: Option<f64>,
    pub s_objective: Option<f64>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointHistory<T> {
    /// `J` at `c = 0`, `S = S_mod`.
    pub initial_objective: FunctionalValue,
    pub records: Vec<JointRecord<T>>,
}

impl<T> JointHistory<T> {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&JointRecord<T>> {
        self.records.last()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointOutcome<T> {
    pub history: JointHistory<T>,
    pub c: Image,
    pub s: Matrix<T>,
    pub stop: StopReason,
}

/// A failed joint solve, carrying the history recorded before the error.
#[derive(Debug)]
pub struct JointFailure<T> {
    pub history: JointHistory<T>,
    pub source: Error,
}

impl<T> fmt::Display for JointFailure<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "joint solve failed after {} outer iterations: {}",
            self.history.records.len(),
            self.source
        )
    }
}

impl<T: fmt::Debug> std::error::Error for JointFailure<T> {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

/// Outer-loop stopping criteria.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterStop {
    pub limit: usize,
    /// `‖c^j − c^{j−1}‖ / ‖c^{j−1}‖` threshold between consecutive outers.
    pub rel_change: Option<f64>,
}

impl From<&KaczmarzSchedule> for OuterStop {
    fn from(s: &KaczmarzSchedule) -> Self {
        Self {
            limit: s.outer_iterations,
            rel_change: s.stop_rel_change,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Continue,
    Stop(StopReason),
}

pub fn convergence_check<T>(history: &JointHistory<T>, criteria: &OuterStop) -> Decision {
    let n = history.records.len();
    if n >= criteria.limit {
        return Decision::Stop(StopReason::SweepLimit);
    }
    if let (Some(threshold), true) = (criteria.rel_change, n >= 2) {
        let (prev, cur) = (&history.records[n - 2].c, &history.records[n - 1].c);
        let change = l2_error(cur, prev).unwrap_or(f64::INFINITY);
        let rule = StopRule {
            abs_change: None,
            rel_change: Some(threshold),
        };
        if let Some(reason) = rule.check(change, prev.l2_norm()) {
            return Decision::Stop(reason);
        }
    }
    Decision::Continue
}

/// Alternating image / matrix reconstruction.
pub fn solve_joint<T: Scalar>(
    instance: &ProblemInstance<T>,
    params: &RegParams,
    config: &JointConfig,
) -> Result<JointOutcome<T>, JointFailure<T>> {
    let empty = |source| JointFailure {
        history: JointHistory {
            initial_objective: FunctionalValue::default(),
            records: Vec::new(),
        },
        source,
    };
    if let Err(e) = config.schedule.validate().and_then(|_| instance.ensure_valid()) {
        return Err(empty(e));
    }

    let m = instance.image_len();
    let mut c = Image::zeros(m);
    let mut s = instance.s_mod.clone();
    let initial_objective = match eval_joint(&c, &s, instance, params) {
        Ok(v) => v,
        Err(e) => return Err(empty(e)),
    };
    let mut history = JointHistory {
        initial_objective,
        records: Vec::with_capacity(config.schedule.outer_iterations),
    };

    let sched = &config.schedule;
    let c_schedule = CSchedule {
        sweeps: sched.c_sweeps_per_outer,
        tau: sched.relaxation_tau,
        stop: StopRule::default(),
        order: RowOrder::Cyclic,
        record_objective: config.record_inner,
    };
    let s_schedule = SSchedule {
        sweeps: sched.s_sweeps_per_outer,
        tau: sched.relaxation_tau,
        record_trace: config.record_inner,
    };
    let criteria = OuterStop::from(sched);

    let stop = loop {
        if let Decision::Stop(reason) = convergence_check(&history, &criteria) {
            break reason;
        }
        let outer = history.records.len();
        let started = Instant::now();

        let step = (|| -> crate::Result<_> {
            let initial = config.warm_start_c.then_some(&c);
            let c_report = solve_c_from(&s, &instance.u, params, &c_schedule, initial)?;
            let c_next = c_report.c_final;
            let state = if config.warm_start_s {
                SSolveState::warm(s.clone(), instance.calib_len())
            } else {
                SSolveState::initial(instance)
            };
            let s_report = solve_s_from(state, instance, &c_next, params, &s_schedule)?;
            let objective = eval_joint(&c_next, &s_report.state.s, instance, params)?;
            Ok((
                c_next,
                s_report.state.s,
                objective,
                c_report.per_sweep_objective.last().copied(),
                s_report.trace.last().copied(),
            ))
        })();

        let (c_next, s_next, objective, c_obj, s_obj) = match step {
            Ok(v) => v,
            Err(source) => return Err(JointFailure { history, source }),
        };
        c = c_next;
        s = s_next;

        let keep_s = match config.snapshots {
            SnapshotPolicy::None => false,
            SnapshotPolicy::FirstLast => outer == 0,
            SnapshotPolicy::All => true,
        };
        let l2 = instance
            .c_true
            .as_ref()
            .and_then(|truth| l2_error(&c, truth).ok());
        log::debug!(
            "outer {outer}: J = {:.6e}{}",
            objective.total,
            l2.map(|e| format!(", l2 = {e:.4}")).unwrap_or_default()
        );
        history.records.push(JointRecord {
            outer,
            c: c.clone(),
            s: keep_s.then(|| s.clone()),
            objective,
            l2_error: l2,
            c_objective: c_obj,
            s_objective: s_obj,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        });
    };

    if config.snapshots == SnapshotPolicy::FirstLast {
        if let Some(last) = history.records.last_mut() {
            last.s = Some(s.clone());
        }
    }
    Ok(JointOutcome {
        history,
        c,
        s,
        stop,
    })
}
