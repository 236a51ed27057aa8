//! Gaussian state-space form of an ARMA process and its Kalman filter.
//!
//! The process w_t = Σφᵢw_{t−i} + ε_t + Σθⱼε_{t−j} is cast in companion
//! form with state dimension r = max(p, q+1): the transition matrix holds
//! the AR coefficients in its first column and an identity on the
//! superdiagonal, the disturbance loads through [1, θ₁, …, θ_{r−1}], and
//! the observation reads the first state element. The filter runs with
//! unit innovation variance so σ² can be concentrated out of the
//! likelihood, and it whitens any number of data channels in one pass —
//! regression coefficients are then profiled by ordinary least squares on
//! the whitened channels, which is exactly generalized least squares.

use ndarray::Array2;

use crate::error::{Error, Result};

use super::transform::poly_mul;

pub(crate) struct StateSpace {
    /// First column of the companion transition matrix (AR coefficients
    /// padded to length r).
    t_col: Vec<f64>,
    /// Disturbance loading [1, θ₁, …] padded to length r.
    rvec: Vec<f64>,
    r: usize,
}

pub(crate) struct FilterOutput {
    /// Σ ln F_t, the determinant term of the likelihood.
    pub log_f_sum: f64,
    /// Normalized innovations v_t/√F_t, one vector per input channel.
    pub whitened: Vec<Vec<f64>>,
    /// One-step-ahead state prediction after the last observation, one
    /// per channel.
    pub predicted_states: Vec<Vec<f64>>,
}

impl StateSpace {
    pub fn new(phi: &[f64], theta: &[f64]) -> Self {
        let r = phi.len().max(theta.len() + 1).max(1);
        let mut t_col = vec![0.0; r];
        t_col[..phi.len()].copy_from_slice(phi);
        let mut rvec = vec![0.0; r];
        rvec[0] = 1.0;
        rvec[1..=theta.len()].copy_from_slice(theta);
        StateSpace { t_col, rvec, r }
    }

    #[cfg(test)]
    pub fn dim(&self) -> usize {
        self.r
    }

    /// Applies the companion transition to a state vector in place.
    pub fn apply_t(&self, a: &mut [f64]) {
        let r = self.r;
        let head = a[0];
        for i in 0..r {
            a[i] = self.t_col[i] * head + if i + 1 < r { a[i + 1] } else { 0.0 };
        }
    }

    /// P ← T P Tᵀ, exploiting the companion structure in O(r²).
    fn transition_quad(&self, p: &Array2<f64>) -> Array2<f64> {
        let r = self.r;
        // m = P Tᵀ: m[i][j] = t_col[j]·P[i][0] + P[i][j+1].
        let mut m = Array2::zeros((r, r));
        for i in 0..r {
            for j in 0..r {
                m[(i, j)] =
                    self.t_col[j] * p[(i, 0)] + if j + 1 < r { p[(i, j + 1)] } else { 0.0 };
            }
        }
        // out = T m: out[i][j] = t_col[i]·m[0][j] + m[i+1][j].
        let mut out = Array2::zeros((r, r));
        for i in 0..r {
            for j in 0..r {
                out[(i, j)] =
                    self.t_col[i] * m[(0, j)] + if i + 1 < r { m[(i + 1, j)] } else { 0.0 };
            }
        }
        out
    }

    /// Stationary state covariance: the fixed point of P = TPTᵀ + RRᵀ,
    /// computed by doubling the partial sums of Σ T^k RRᵀ (T^k)ᵀ.
    pub fn stationary_covariance(&self) -> Result<Array2<f64>> {
        let r = self.r;
        let mut v = Array2::zeros((r, r));
        for i in 0..r {
            for j in 0..r {
                v[(i, j)] = self.rvec[i] * self.rvec[j];
            }
        }
        // Dense transition for the doubling iterations.
        let mut a = Array2::zeros((r, r));
        for i in 0..r {
            a[(i, 0)] = self.t_col[i];
            if i + 1 < r {
                a[(i, i + 1)] = 1.0;
            }
        }
        for _ in 0..80 {
            let ava = a.dot(&v).dot(&a.t());
            let increment = ava.iter().map(|x| x.abs()).fold(0.0, f64::max);
            v = v + &ava;
            if !increment.is_finite() {
                return Err(Error::Divergence {
                    what: "stationary covariance iteration".into(),
                });
            }
            if increment < 1e-13 * (1.0 + v[(0, 0)].abs()) {
                return Ok(v);
            }
            a = a.dot(&a);
        }
        Err(Error::NonConvergence {
            what: "stationary covariance iteration".into(),
            iterations: 80,
            trace: None,
        })
    }

    /// Runs the filter over every channel with one shared covariance
    /// recursion, returning normalized innovations and predicted states.
    pub fn filter(&self, channels: &[&[f64]]) -> Result<FilterOutput> {
        let n = channels.first().map_or(0, |c| c.len());
        if channels.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidArgument(
                "all filter channels must share a length".into(),
            ));
        }
        let r = self.r;
        let mut p = self.stationary_covariance()?;
        let mut states: Vec<Vec<f64>> = vec![vec![0.0; r]; channels.len()];
        let mut whitened: Vec<Vec<f64>> = vec![Vec::with_capacity(n); channels.len()];
        let mut log_f_sum = 0.0;

        for t in 0..n {
            let f = p[(0, 0)];
            if !(f.is_finite() && f > 1e-12) {
                return Err(Error::Divergence {
                    what: format!("innovation variance degenerate at step {t}"),
                });
            }
            let sqrt_f = f.sqrt();
            // Gain K = T·P·Zᵀ, with PZᵀ the first column of P.
            let mut k = vec![0.0; r];
            for i in 0..r {
                k[i] = self.t_col[i] * p[(0, 0)] + if i + 1 < r { p[(i + 1, 0)] } else { 0.0 };
            }
            for (c, channel) in channels.iter().enumerate() {
                let v = channel[t] - states[c][0];
                whitened[c].push(v / sqrt_f);
                let scaled = v / f;
                self.apply_t(&mut states[c]);
                for i in 0..r {
                    states[c][i] += k[i] * scaled;
                }
            }
            let mut next_p = self.transition_quad(&p);
            for i in 0..r {
                for j in 0..r {
                    next_p[(i, j)] += self.rvec[i] * self.rvec[j] - k[i] * k[j] / f;
                }
            }
            p = next_p;
            log_f_sum += f.ln();
        }

        Ok(FilterOutput {
            log_f_sum,
            whitened,
            predicted_states: states,
        })
    }
}

/// Impulse-response weights ψ₀..ψ_{h−1} of the full operator
/// θ*(B)/[φ*(B)·Δ(B)], where Δ is the differencing polynomial. The
/// h-step-ahead forecast error variance is σ²·Σ_{j<h} ψⱼ².
pub(crate) fn psi_weights(
    phi_expanded: &[f64],
    theta_expanded: &[f64],
    diff_poly: &[f64],
    h: usize,
) -> Vec<f64> {
    // Full autoregressive side A(B) = φ*(B)·Δ(B) = 1 − Σ αᵢ Bⁱ.
    let mut phi_poly = vec![1.0];
    phi_poly.extend(phi_expanded.iter().map(|v| -v));
    let a_poly = poly_mul(&phi_poly, diff_poly);
    let alpha: Vec<f64> = a_poly[1..].iter().map(|v| -v).collect();

    let mut psi = Vec::with_capacity(h);
    for j in 0..h {
        if j == 0 {
            psi.push(1.0);
            continue;
        }
        let mut value = if j <= theta_expanded.len() {
            theta_expanded[j - 1]
        } else {
            0.0
        };
        for i in 1..=j.min(alpha.len()) {
            value += alpha[i - 1] * psi[j - i];
        }
        psi.push(value);
    }
    psi
}
