//! Linear-system view of synchronous waterfilling.
//!
//! With `P2 = P_max - P1`, waterfilling on both links of every UE collapses
//! to `P1(k+1) = N + M P1(k)` where
//!
//! ```text
//! M = Λ [W2 (F21 - F11) + W1 (F12 - F22)]
//! N = Λ [W1 P_max - W2 D1 + W1 D2 + (W1 F22 - W2 F21) P_max]
//! ```
//!
//! and `Λ = (W1 + W2)^-1`. When `ρ(M) < 1` the iteration has the unique fixed
//! point `(I - M)^-1 N`, which is the operating point as long as it lies
//! strictly inside `(0, P_max)`.

use serde::{Deserialize, Serialize};

use crate::channel_metrics::CrossGainMatrices;
use crate::linalg::{inf_dist, inf_norm, Matrix};
use crate::net_model::Link;
use crate::sim_engine::Trace;
use crate::{Error, Result, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationSystem<T = f64> {
    pub m: Matrix<T>,
    pub n_vec: Vec<T>,
    pub spectral_radius: Option<T>,
    /// Spectral radius of the element-wise absolute value of `M`.
    pub spectral_radius_abs: Option<T>,
    pub fixed_point_p1: Option<Vec<T>>,
    /// `0 < P1* < P_max` element-wise.
    pub interior: bool,
}

/// Closed-form operating point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium<T = f64> {
    pub p1_star: Vec<T>,
    pub p2_star: Vec<T>,
    pub interior: bool,
}

pub fn build_system<T: Scalar>(m: &CrossGainMatrices<T>, p_max: &[T]) -> Result<IterationSystem<T>> {
    let n = m.n();
    if p_max.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: p_max.len() });
    }
    let inner = m
        .f21
        .sub(&m.f11)?
        .scale_rows(&m.w2)?
        .add(&m.f12.sub(&m.f22)?.scale_rows(&m.w1)?)?;
    let mm = inner.scale_rows(&m.lambda)?;

    let cross = m.f22.scale_rows(&m.w1)?.sub(&m.f21.scale_rows(&m.w2)?)?.mul_vec(p_max)?;
    let n_vec = (0..n)
        .map(|i| m.lambda[i] * (m.w1[i] * p_max[i] - m.w2[i] * m.d1[i] + m.w1[i] * m.d2[i] + cross[i]))
        .collect();
    Ok(IterationSystem {
        m: mm,
        n_vec,
        spectral_radius: None,
        spectral_radius_abs: None,
        fixed_point_p1: None,
        interior: false,
    })
}

pub fn spectral_radius<T: Scalar>(m: &Matrix<T>) -> Result<T> {
    m.spectral_radius()
}

/// Unique fixed point of `x <- offset + matrix x`.
pub fn fixed_point<T: Scalar>(matrix: &Matrix<T>, offset: &[T]) -> Result<Vec<T>> {
    let n = matrix.rows();
    Matrix::identity(n).sub(matrix)?.solve(offset)
}

impl<T: Scalar> IterationSystem<T> {
    /// Fills in both spectral radii and, when `ρ(M) < 1`, the fixed point.
    pub fn analyze(mut self, p_max: &[T]) -> Result<Self> {
        let rho = self.m.spectral_radius()?;
        self.spectral_radius = Some(rho);
        self.spectral_radius_abs = Some(self.m.abs().spectral_radius()?);
        if rho < T::one() {
            match closed_form_equilibrium(&self, p_max) {
                Ok(eq) => {
                    self.interior = eq.interior;
                    self.fixed_point_p1 = Some(eq.p1_star);
                }
                Err(Error::Singular) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(self)
    }

    pub fn residual(&self, p1: &[T]) -> Result<T> {
        let mp = self.m.mul_vec(p1)?;
        let next: Vec<T> = self.n_vec.iter().zip(mp).map(|(&a, b)| a + b).collect();
        Ok(inf_dist(p1, &next))
    }
}

/// `P1* = (I - M)^-1 N`, `P2* = P_max - P1*`.
pub fn closed_form_equilibrium<T: Scalar>(sys: &IterationSystem<T>, p_max: &[T]) -> Result<Equilibrium<T>> {
    let rho = match sys.spectral_radius {
        Some(r) => r,
        None => sys.m.spectral_radius()?,
    };
    if !(rho < T::one()) {
        return Err(Error::NotContractive(rho.as_f64()));
    }
    let p1_star = fixed_point(&sys.m, &sys.n_vec)?;
    if p1_star.len() != p_max.len() {
        return Err(Error::DimensionMismatch { expected: p1_star.len(), found: p_max.len() });
    }
    let interior = p1_star.iter().zip(p_max).all(|(&p, &pm)| p > T::zero() && p < pm);
    let p2_star = p1_star.iter().zip(p_max).map(|(&p, &pm)| pm - p).collect();
    Ok(Equilibrium { p1_star, p2_star, interior })
}

/// Iteration matrix and offset when dual-connectivity UEs (`q = 0`)
/// waterfill and single-link UEs (`q = 1`) track a fixed SINR `beta`:
///
/// ```text
/// P1(k+1) = (I - Q)(N + M P1) + Q B (D1 + F11 P1)
/// ```
pub fn mixed_population_system<T: Scalar>(
    m: &CrossGainMatrices<T>,
    sys: &IterationSystem<T>,
    q: &[bool],
    beta: &[T],
) -> Result<(Matrix<T>, Vec<T>)> {
    let n = m.n();
    for len in [q.len(), beta.len(), sys.n_vec.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, found: len });
        }
    }
    let mut matrix = Matrix::zeros(n, n);
    let mut offset = vec![T::zero(); n];
    for i in 0..n {
        if q[i] {
            for j in 0..n {
                matrix[(i, j)] = beta[i] * m.f11[(i, j)];
            }
            offset[i] = beta[i] * m.d1[i];
        } else {
            for j in 0..n {
                matrix[(i, j)] = sys.m[(i, j)];
            }
            offset[i] = sys.n_vec[i];
        }
    }
    Ok((matrix, offset))
}

/// Outcome of checking the two-step SINR bound on a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LemmaCheck {
    Holds,
    Violated,
    /// The preconditions are not met at this iteration.
    Inapplicable(&'static str),
}

/// For a link whose PoA backhaul is a bottleneck at iteration `k` and whose
/// power was rescaled by `z` from `k` to `k+1`, checks
/// `sinr(k+2) > z^2 sinr(k)`.
pub fn lemma_bound_check<T: Scalar>(
    trace: &Trace<T>,
    z: T,
    ue: usize,
    link: Link,
    k: usize,
) -> LemmaCheck {
    if k + 2 >= trace.states.len() || k >= trace.reports.len() {
        return LemmaCheck::Inapplicable("iteration beyond trace");
    }
    let Some(i) = ue.checked_sub(1).filter(|&i| i < trace.states[k].n()) else {
        return LemmaCheck::Inapplicable("unknown UE");
    };
    let Some(v) = trace.reports[k].v_per_link[i][link.index()] else {
        return LemmaCheck::Inapplicable("UE has no such link");
    };
    if !(v < T::zero()) {
        return LemmaCheck::Inapplicable("PoA backhaul is not a bottleneck at k");
    }
    let p_k = trace.states[k].power(link)[i];
    let p_next = trace.states[k + 1].power(link)[i];
    let tol = T::lit(1e-9) * p_k.abs().max(T::min_positive_value());
    if !(p_k > T::zero()) || (p_next - z * p_k).abs() > tol {
        return LemmaCheck::Inapplicable("link power was not rescaled by z at k");
    }
    let before = trace.states[k].sinr(link)[i];
    let after = trace.states[k + 2].sinr(link)[i];
    if after > z * z * before {
        LemmaCheck::Holds
    } else {
        LemmaCheck::Violated
    }
}

/// Largest deviation of `p1` from the closed form, for reporting.
pub fn prediction_error<T: Scalar>(predicted: &[T], simulated: &[T]) -> T {
    inf_dist(predicted, simulated)
}

/// `||P1* - N - M P1*||_inf` relative to `max(1, ||P1*||_inf)`.
pub fn relative_residual<T: Scalar>(sys: &IterationSystem<T>, p1: &[T]) -> Result<T> {
    Ok(sys.residual(p1)? / T::one().max(inf_norm(p1)))
}
