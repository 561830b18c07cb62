//! Angular quadrature sets on the unit sphere, reduced to the upper
//! hemisphere for planar geometry by doubling weights.

use crate::{Error, Result, Vec2, Vec3};
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct AngularQuadrature {
    pub directions: Vec<Vec3>,
    pub weights: Vec<f64>,
}

impl AngularQuadrature {
    /// Product rule: the `n_polar` positive cosines of the `2 n_polar`-point
    /// Gauss-Legendre rule on `[-1, 1]` times `n_azimuthal` equally spaced
    /// azimuths offset by half a spacing. The mirrored `z < 0` directions are
    /// collapsed onto their partners by doubling weights.
    pub fn product(n_polar: usize, n_azimuthal: usize) -> Result<Self> {
        if n_polar == 0 || n_azimuthal < 4 || n_azimuthal % 4 != 0 {
            return Err(Error::InvalidQuadrature(format!(
                "product rule needs n_polar >= 1 and n_azimuthal a positive multiple of 4, got {n_polar} and {n_azimuthal}"
            )));
        }
        let gl = crate::fespace::gauss_legendre(2 * n_polar)?;
        let mut directions = Vec::new();
        let mut weights = Vec::new();
        let dphi = 2.0 * PI / n_azimuthal as f64;
        for (&t, &w) in gl.nodes.iter().zip(&gl.weights) {
            // nodes and weights are on [0, 1]
            let mu = 2.0 * t - 1.0;
            if mu <= 0.0 {
                continue;
            }
            let s = (1.0 - mu * mu).sqrt();
            for k in 0..n_azimuthal {
                let phi = (k as f64 + 0.5) * dphi;
                directions.push(Vec3::new(s * phi.cos(), s * phi.sin(), mu));
                weights.push(2.0 * (2.0 * w) * dphi);
            }
        }
        Ok(AngularQuadrature { directions, weights })
    }

    /// Level-symmetric rule of even order 2 to 8.
    pub fn level_symmetric(order: usize) -> Result<Self> {
        let (mu1, classes): (f64, Vec<(usize, [usize; 3], f64)>) = match order {
            2 => (1.0 / 3f64.sqrt(), vec![(0, [1, 1, 1], 1.0)]),
            4 => (0.350_021_2, vec![(0, [1, 1, 2], 1.0 / 3.0)]),
            6 => (
                0.266_635_5,
                vec![(0, [1, 1, 3], 0.176_126_3), (1, [1, 2, 2], 0.157_207_1)],
            ),
            8 => (
                0.218_217_9,
                vec![
                    (0, [1, 1, 4], 0.120_987_7),
                    (1, [1, 2, 3], 0.090_740_7),
                    (2, [2, 2, 2], 0.092_592_6),
                ],
            ),
            _ => {
                return Err(Error::InvalidQuadrature(format!(
                    "level-symmetric order {order} not available"
                )))
            }
        };
        let nl = order / 2;
        let mus: Vec<f64> = if nl == 1 {
            vec![mu1]
        } else {
            let delta = 2.0 * (1.0 - 3.0 * mu1 * mu1) / (order as f64 - 2.0);
            (0..nl).map(|i| (mu1 * mu1 + i as f64 * delta).sqrt()).collect()
        };
        let mut octant: Vec<([f64; 3], f64)> = Vec::new();
        for i in 1..=nl {
            for j in 1..=nl {
                if i + j > nl + 1 {
                    continue;
                }
                let k = nl + 2 - i - j;
                let mut key = [i, j, k];
                key.sort_unstable();
                let w = classes
                    .iter()
                    .find(|(_, c, _)| *c == key)
                    .map(|c| c.2)
                    .ok_or_else(|| Error::InvalidQuadrature("weight class missing".into()))?;
                octant.push(([mus[i - 1], mus[j - 1], mus[k - 1]], w));
            }
        }
        let total: f64 = octant.iter().map(|o| o.1).sum();
        let mut directions = Vec::new();
        let mut weights = Vec::new();
        for (sx, sy) in [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)] {
            for (d, w) in &octant {
                directions.push(Vec3::new(sx * d[0], sy * d[1], d[2]));
                // octant weights sum to 4 pi / 8, doubled for z < 0
                weights.push(w / total * PI);
            }
        }
        Ok(AngularQuadrature { directions, weights })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// `sum_d w_d f(Omega_d)`
    pub fn integrate(&self, f: impl Fn(Vec3) -> f64) -> f64 {
        self.directions.iter().zip(&self.weights).map(|(&o, &w)| w * f(o)).sum()
    }

    /// Boundary factor `E_b0 = sum_d w_d |Omega_d . n| / (4 pi)`.
    pub fn eb0(&self, n: Vec2) -> f64 {
        self.integrate(|o| (o.x * n.x + o.y * n.y).abs()) / (4.0 * PI)
    }

    /// Half-range current `sum_{Omega . n < 0} w (Omega . n) f(Omega)`.
    pub fn incoming_current(&self, n: Vec2, f: impl Fn(Vec3) -> f64) -> f64 {
        self.integrate(|o| {
            let on = o.x * n.x + o.y * n.y;
            if on < 0.0 {
                on * f(o)
            } else {
                0.0
            }
        })
    }
}
