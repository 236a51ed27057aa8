//! Regular and seasonal differencing with exact inversion.

use crate::error::{Error, Result};

/// One differencing pass, keeping the leading values needed to invert it.
#[derive(Debug, Clone, PartialEq)]
struct DiffStep {
    period: usize,
    head: Vec<f64>,
}

/// Retained initial values from [`difference_with_state`], sufficient to
/// reconstruct the original series (and to integrate appended forecasts).
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceState {
    steps: Vec<DiffStep>,
}

impl DifferenceState {
    /// Total length removed by differencing (d + D·s).
    pub fn removed(&self) -> usize {
        self.steps.iter().map(|s| s.period).sum()
    }
}

fn diff_once(x: &[f64], period: usize) -> Result<(Vec<f64>, DiffStep)> {
    if x.len() <= period {
        return Err(Error::SeriesTooShort {
            needed: period + 1,
            got: x.len(),
        });
    }
    let out = (period..x.len()).map(|t| x[t] - x[t - period]).collect();
    let head = x[..period].to_vec();
    Ok((out, DiffStep { period, head }))
}

/// Applies (1−B)^d (1−B^s)^D; output length = input length − d − D·s.
///
/// Regular differences are applied before seasonal ones; the operators
/// commute, so the order is a fixed convention.
pub fn difference(x: &[f64], d: usize, big_d: usize, s: usize) -> Result<Vec<f64>> {
    difference_with_state(x, d, big_d, s).map(|(w, _)| w)
}

/// As [`difference`], also returning the state needed to invert.
pub fn difference_with_state(
    x: &[f64],
    d: usize,
    big_d: usize,
    s: usize,
) -> Result<(Vec<f64>, DifferenceState)> {
    if big_d > 0 && s == 0 {
        return Err(Error::InvalidArgument(
            "seasonal differencing requires a period >= 1".into(),
        ));
    }
    let mut w = x.to_vec();
    let mut steps = Vec::with_capacity(d + big_d);
    for _ in 0..d {
        let (next, step) = diff_once(&w, 1)?;
        w = next;
        steps.push(step);
    }
    for _ in 0..big_d {
        let (next, step) = diff_once(&w, s)?;
        w = next;
        steps.push(step);
    }
    Ok((w, DifferenceState { steps }))
}

/// Inverts differencing: given the differenced series (optionally extended
/// past the training range with forecast steps) and the retained initial
/// values, reconstructs the original-scale series of length
/// `w.len() + state.removed()`.
pub fn undifference(w: &[f64], state: &DifferenceState) -> Vec<f64> {
    let mut x = w.to_vec();
    for step in state.steps.iter().rev() {
        let s = step.period;
        let mut full = Vec::with_capacity(x.len() + s);
        full.extend_from_slice(&step.head);
        for t in 0..x.len() {
            let prev = full[t];
            full.push(prev + x[t]);
        }
        x = full;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn first_difference_of_ramp() {
        assert_eq!(difference(&[1.0, 2.0, 3.0, 4.0], 1, 0, 1).unwrap(), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn seasonal_difference_kills_periodic_series() {
        let x: Vec<f64> = (0..24).map(|t| [3.0, -1.0, 4.0, 1.0][t % 4]).collect();
        let w = difference(&x, 0, 1, 4).unwrap();
        assert!(w.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn combined_length_arithmetic() {
        let x: Vec<f64> = (0..156).map(|t| t as f64).collect();
        assert_eq!(difference(&x, 1, 1, 52).unwrap().len(), 103);
    }

    #[test]
    fn too_short_rejected() {
        assert!(matches!(
            difference(&[1.0, 2.0], 0, 1, 4),
            Err(Error::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn round_trip_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x: Vec<f64> = (0..120).map(|_| rng.random_range(-5.0..5.0)).collect();
        for (d, big_d, s) in [(1, 0, 1), (2, 0, 1), (0, 1, 12), (1, 1, 12), (2, 1, 7)] {
            let (w, state) = difference_with_state(&x, d, big_d, s).unwrap();
            let back = undifference(&w, &state);
            assert_eq!(back.len(), x.len());
            for (a, b) in x.iter().zip(&back) {
                assert_relative_eq!(a, b, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn undifference_extends_forecasts() {
        // Random walk: differenced forecast of 0 extends flat on the level.
        let x = vec![1.0, 3.0, 2.0, 5.0];
        let (mut w, state) = difference_with_state(&x, 1, 0, 1).unwrap();
        w.extend_from_slice(&[0.0, 0.0]);
        let back = undifference(&w, &state);
        assert_eq!(back, vec![1.0, 3.0, 2.0, 5.0, 5.0, 5.0]);
    }
}
