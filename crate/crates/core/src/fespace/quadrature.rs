//! Gauss-Legendre and Gauss-Lobatto rules on the unit interval and their
//! tensor products on the unit square.

use crate::{Error, Result};
use std::f64::consts::PI;

/// One-dimensional rule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1d {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Legendre polynomial `P_n(x)` and its derivative on `[-1, 1]`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        let s = if x > 0.0 { 1.0 } else { (-1.0f64).powi(n as i32 + 1) };
        s * (n * (n + 1)) as f64 / 2.0
    } else {
        n as f64 * (p0 - x * p1) / (1.0 - x * x)
    };
    (p1, dp)
}

/// `n`-point Gauss-Legendre rule on `[0, 1]`, exact for degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> Result<Rule1d> {
    if n == 0 {
        return Err(Error::InvalidQuadrature("Gauss-Legendre needs n >= 1".into()));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = -(PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes[i] = 0.5 * (x + 1.0);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    symmetrize(&mut nodes, &mut weights);
    Ok(Rule1d { nodes, weights })
}

/// `n`-point Gauss-Lobatto rule on `[0, 1]` including both endpoints,
/// exact for degree `2n - 3`.
pub fn gauss_lobatto(n: usize) -> Result<Rule1d> {
    if n < 2 {
        return Err(Error::InvalidQuadrature("Gauss-Lobatto needs n >= 2".into()));
    }
    let m = n - 1;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n {
        let mut x = -(PI * i as f64 / m as f64).cos();
        if i > 0 && i < m {
            // Newton on P'_m using P''_m from the Legendre ODE
            for _ in 0..100 {
                let (p, dp) = legendre(m, x);
                let d2p = (2.0 * x * dp - (m * (m + 1)) as f64 * p) / (1.0 - x * x);
                let dx = dp / d2p;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
        }
        let (p, _) = legendre(m, x);
        nodes[i] = 0.5 * (x + 1.0);
        weights[i] = 1.0 / (nf * (nf - 1.0) * p * p);
    }
    symmetrize(&mut nodes, &mut weights);
    Ok(Rule1d { nodes, weights })
}

fn symmetrize(nodes: &mut [f64], weights: &mut [f64]) {
    let n = nodes.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (nodes[i] + 1.0 - nodes[j]);
        nodes[i] = x;
        nodes[j] = 1.0 - x;
        let w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.5;
    }
}

/// Tensor-product rule on the unit square. Point `k = i + n * j` sits at
/// `(nodes[i], nodes[j])`.
#[derive(Debug, Clone)]
pub struct Rule2d {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl Rule2d {
    pub fn tensor(rule: &Rule1d) -> Self {
        let n = rule.len();
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                points.push([rule.nodes[i], rule.nodes[j]]);
                weights.push(rule.weights[i] * rule.weights[j]);
            }
        }
        Rule2d { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
