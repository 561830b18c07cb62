//! Fixed-point iteration with optional Anderson acceleration.

use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy)]
pub struct FixedPointOptions {
    /// Anderson history depth; zero gives plain Picard iteration.
    pub depth: usize,
    /// Stop once `||x_{k+1} - x_k||_inf` falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions {
            depth: 0,
            tol: 1e-6,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FixedPointResult {
    pub x: Vec<f64>,
    /// Number of evaluations of the map.
    pub iterations: usize,
    /// `||x_{k+1} - x_k||_inf` after each evaluation.
    pub history: Vec<f64>,
    pub converged: bool,
}

/// Iterates `x <- G(x)` from `x0`, mixing the last `depth` residual
/// differences when `depth > 0` (type-II Anderson). The history is cleared
/// whenever the least-squares problem becomes rank deficient.
///
/// If `max_iter` evaluations do not reach the tolerance the last iterate is
/// returned with `converged` unset.
pub fn fixed_point(
    mut g: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    x0: Vec<f64>,
    opts: &FixedPointOptions,
) -> Result<FixedPointResult> {
    let mut x = x0;
    let mut history = Vec::new();
    let mut df: VecDeque<Vec<f64>> = VecDeque::new();
    let mut dg: VecDeque<Vec<f64>> = VecDeque::new();
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    for k in 1..=opts.max_iter {
        let gx = g(&x)?;
        if gx.len() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: gx.len(),
            });
        }
        if gx.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("fixed-point map".into()));
        }
        let next = if opts.depth == 0 {
            gx
        } else {
            let f: Vec<f64> = gx.iter().zip(&x).map(|(a, b)| a - b).collect();
            if let Some((fp, gp)) = prev.take() {
                df.push_back(f.iter().zip(&fp).map(|(a, b)| a - b).collect());
                dg.push_back(gx.iter().zip(&gp).map(|(a, b)| a - b).collect());
                if df.len() > opts.depth {
                    df.pop_front();
                    dg.pop_front();
                }
            }
            let mut out = gx.clone();
            if !df.is_empty() {
                match least_squares(&df, &f) {
                    Some(gamma) => {
                        for (j, col) in dg.iter().enumerate() {
                            for (o, c) in out.iter_mut().zip(col) {
                                *o -= gamma[j] * c;
                            }
                        }
                    }
                    None => {
                        df.clear();
                        dg.clear();
                    }
                }
            }
            prev = Some((f, gx));
            out
        };
        let diff = next.iter().zip(&x).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        history.push(diff);
        x = next;
        if diff < opts.tol {
            return Ok(FixedPointResult {
                x,
                iterations: k,
                history,
                converged: true,
            });
        }
    }
    Ok(FixedPointResult {
        x,
        iterations: opts.max_iter,
        history,
        converged: false,
    })
}

/// `argmin ||f - DF gamma||_2` via Householder QR; `None` when the columns
/// are numerically dependent.
fn least_squares(df: &VecDeque<Vec<f64>>, f: &[f64]) -> Option<Vec<f64>> {
    let n = f.len();
    let m = df.len();
    let a = DMatrix::from_fn(n, m, |i, j| df[j][i]);
    let qr = a.qr();
    let r = qr.r();
    let scale = (0..m).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if scale == 0.0 || (0..m).any(|i| r[(i, i)].abs() < 1e-12 * scale) {
        return None;
    }
    let qtf = qr.q().transpose() * DVector::from_column_slice(f);
    let sol = r.solve_upper_triangular(&qtf)?;
    Some(sol.iter().copied().collect())
}
