//! Row-action building blocks: hyperplane projection, the regularized
//! Kaczmarz step on the augmented system `(ηI  A)(v; z) = b`, the projection
//! onto the nonnegative orthant and soft thresholding.

use crate::error::{ensure_dim, Error, Result};
use crate::model::Image;
use crate::scalar::{dot, norm_sqr, Scalar};

/// Orthogonal projection of `z` onto `{x : Σ a_m x_m = b}`:
/// `P_H[z] = z − (Σ a_m z_m − b)/‖a‖² · ā`.
pub fn project_hyperplane<T: Scalar>(z: &[T], a: &[T], b: T) -> Result<Vec<T>> {
    ensure_dim("hyperplane normal length", z.len(), a.len())?;
    let a2 = norm_sqr(a);
    if a2 == 0.0 {
        return Err(Error::DegenerateHyperplane);
    }
    let factor = (dot(a, z) - b).scale(1.0 / a2);
    Ok(z.iter()
        .zip(a)
        .map(|(&zm, &am)| zm - factor * am.conj())
        .collect())
}

/// State of a regularized Kaczmarz iteration: primary unknown `z` and the
/// auxiliary `v` (one entry per row of the swept system).
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedRowState<T> {
    pub z: Vec<T>,
    pub v: Vec<T>,
}

impl<T: Scalar> AugmentedRowState<T> {
    pub fn zeros(unknowns: usize, rows: usize) -> Self {
        Self {
            z: vec![T::zero(); unknowns],
            v: vec![T::zero(); rows],
        }
    }
}

/// One regularized Kaczmarz step on row `row_index`:
///
/// ```text
/// K   = τ (b − a·z − η v_k) / (η² + ‖a‖²)
/// z  ← z + K ā
/// v_k ← v_k + η K
/// ```
///
/// With `η = 0` this is the relaxed projection onto the row's hyperplane.
pub fn regularized_row_update<T: Scalar>(
    state: &mut AugmentedRowState<T>,
    row: &[T],
    rhs: T,
    row_index: usize,
    eta: f64,
    tau: f64,
) -> Result<()> {
    ensure_dim("row length", state.z.len(), row.len())?;
    if row_index >= state.v.len() {
        return Err(Error::Invalid(format!(
            "row index {row_index} out of range for {} auxiliary entries",
            state.v.len()
        )));
    }
    let denom = eta * eta + norm_sqr(row);
    if denom == 0.0 {
        return Err(Error::DegenerateRow { row: row_index });
    }
    relaxed_step(&mut state.z, &mut state.v[row_index], row, rhs, eta, tau, denom);
    Ok(())
}

/// Hot-loop form of [`regularized_row_update`] with a precomputed
/// denominator `η² + ‖a‖² > 0`. Returns the shared factor `K`.
#[inline]
pub(crate) fn relaxed_step<T: Scalar>(
    z: &mut [T],
    v_k: &mut T,
    row: &[T],
    rhs: T,
    eta: f64,
    tau: f64,
    denom: f64,
) -> T {
    let residual = rhs - dot(row, z) - v_k.scale(eta);
    let k = residual.scale(tau / denom);
    for (zm, &am) in z.iter_mut().zip(row) {
        *zm += k * am.conj();
    }
    *v_k += k.scale(eta);
    k
}

/// Order in which rows (or calibration columns) are visited within one
/// sweep. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum RowOrder {
    /// `j ↦ j mod K`
    #[default]
    Cyclic,
    Permutation(Vec<usize>),
}

impl RowOrder {
    pub fn permutation(order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; order.len()];
        for &i in &order {
            if i >= order.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Invalid(
                    "row order must visit every index exactly once".into(),
                ));
            }
        }
        Ok(RowOrder::Permutation(order))
    }

    /// Row visited at step `j` of a sweep over `len` rows.
    #[inline]
    pub fn index(&self, j: usize, len: usize) -> usize {
        match self {
            RowOrder::Cyclic => j % len,
            RowOrder::Permutation(p) => p[j % len],
        }
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        match self {
            RowOrder::Cyclic => Ok(()),
            RowOrder::Permutation(p) => ensure_dim("row order length", len, p.len()),
        }
    }
}

/// `P₊`: real part, clamped at zero.
pub fn project_nonneg<T: Scalar>(c: &[T]) -> Image {
    Image::from_vec_unchecked(c.iter().map(|x| clamp_nonneg(x.re())).collect())
}

#[inline]
fn clamp_nonneg(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// `T_λ(x) = (x − λ)₊ − (−x − λ)₊`
#[inline]
pub fn shrink(x: f64, lambda: f64) -> f64 {
    clamp_nonneg(x - lambda) - clamp_nonneg(-x - lambda)
}

/// Entrywise soft thresholding.
pub fn soft_threshold(c: &[f64], lambda: f64) -> Result<Image> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::ParameterDomain {
            name: "lambda",
            value: lambda,
            domain: "finite and >= 0",
        });
    }
    Ok(Image::from_vec_unchecked(
        c.iter().map(|&x| shrink(x, lambda)).collect(),
    ))
}
