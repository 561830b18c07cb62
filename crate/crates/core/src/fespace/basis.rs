//! Nodal Lagrange bases on the reference square.

use super::quadrature::{gauss_legendre, gauss_lobatto};
use crate::{Mat2, Result, Vec2};

/// Lagrange interpolating polynomials through a fixed node set.
#[derive(Debug, Clone)]
pub struct Lagrange1d {
    nodes: Vec<f64>,
    denom: Vec<f64>,
}

impl Lagrange1d {
    pub fn new(nodes: Vec<f64>) -> Self {
        let denom = (0..nodes.len())
            .map(|i| {
                (0..nodes.len())
                    .filter(|&j| j != i)
                    .map(|j| nodes[i] - nodes[j])
                    .product::<f64>()
            })
            .collect();
        Lagrange1d { nodes, denom }
    }

    /// Closed nodes: `n` Gauss-Lobatto points (or the midpoint when `n == 1`).
    pub fn closed(n: usize) -> Result<Self> {
        if n == 1 {
            return Ok(Self::new(vec![0.5]));
        }
        Ok(Self::new(gauss_lobatto(n)?.nodes))
    }

    /// Open nodes: `n` Gauss-Legendre points.
    pub fn open(n: usize) -> Result<Self> {
        Ok(Self::new(gauss_legendre(n)?.nodes))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Values, first and second derivatives of every basis polynomial at `x`.
    pub fn eval_all(&self, x: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.nodes.len();
        let mut v = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut d2 = vec![0.0; n];
        for i in 0..n {
            let others: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| x - self.nodes[j]).collect();
            let m = others.len();
            let mut val = 1.0;
            for &o in &others {
                val *= o;
            }
            let mut der = 0.0;
            let mut der2 = 0.0;
            for a in 0..m {
                let mut pa = 1.0;
                for (b, &o) in others.iter().enumerate() {
                    if b != a {
                        pa *= o;
                    }
                }
                der += pa;
                for b in 0..m {
                    if b == a {
                        continue;
                    }
                    let mut pab = 1.0;
                    for (c, &o) in others.iter().enumerate() {
                        if c != a && c != b {
                            pab *= o;
                        }
                    }
                    der2 += pab;
                }
            }
            v[i] = val / self.denom[i];
            d[i] = der / self.denom[i];
            d2[i] = der2 / self.denom[i];
        }
        (v, d, d2)
    }

    pub fn eval(&self, x: f64) -> (Vec<f64>, Vec<f64>) {
        let (v, d, _) = self.eval_all(x);
        (v, d)
    }
}

/// Tensor-product scalar basis of degree `p` per direction. Local index
/// `i + (p + 1) * j` refers to node `(nodes[i], nodes[j])`.
#[derive(Debug, Clone)]
pub struct ScalarBasis {
    pub p: usize,
    pub line: Lagrange1d,
}

/// Scalar basis evaluated at one reference point.
#[derive(Debug, Clone)]
pub struct ScalarEval {
    pub values: Vec<f64>,
    pub grads: Vec<Vec2>,
}

impl ScalarBasis {
    pub fn new(p: usize, line: Lagrange1d) -> Self {
        ScalarBasis { p, line }
    }

    pub fn dim(&self) -> usize {
        (self.p + 1) * (self.p + 1)
    }

    pub fn node(&self, k: usize) -> [f64; 2] {
        let n = self.p + 1;
        [self.line.nodes()[k % n], self.line.nodes()[k / n]]
    }

    /// Values and reference gradients at `xi`.
    pub fn eval(&self, xi: [f64; 2]) -> ScalarEval {
        let n = self.p + 1;
        let (vx, dx) = self.line.eval(xi[0]);
        let (vy, dy) = self.line.eval(xi[1]);
        let mut values = Vec::with_capacity(n * n);
        let mut grads = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                values.push(vx[i] * vy[j]);
                grads.push(Vec2::new(dx[i] * vy[j], vx[i] * dy[j]));
            }
        }
        ScalarEval { values, grads }
    }

    /// Local indices of the nodes on local face `f`, ordered by the face
    /// parameter. Only meaningful for closed node sets.
    pub fn face_nodes(&self, f: usize) -> Vec<usize> {
        let n = self.p + 1;
        (0..n)
            .map(|s| match f {
                0 => s,
                1 => (n - 1) + n * s,
                2 => s + n * (n - 1),
                _ => n * s,
            })
            .collect()
    }
}

/// Reference Raviart-Thomas basis `Q_{p+1,p} x Q_{p,p+1}`.
///
/// The x-component functions come first, index `i + (p + 2) * j` with `i` over
/// closed nodes in xi and `j` over open nodes in eta. The y-component functions
/// follow at offset `(p + 2) * (p + 1)`, index `i + (p + 1) * j` with `i` open in
/// xi and `j` closed in eta.
#[derive(Debug, Clone)]
pub struct RtBasis {
    pub p: usize,
    pub closed: Lagrange1d,
    pub open: Lagrange1d,
}

/// Raviart-Thomas basis evaluated at one reference point.
#[derive(Debug, Clone)]
pub struct RtEval {
    pub values: Vec<Vec2>,
    /// `grads[k][(a, b)] = d vhat_a / d xi_b`.
    pub grads: Vec<Mat2>,
    pub divs: Vec<f64>,
}

impl RtBasis {
    pub fn new(p: usize) -> Result<Self> {
        Ok(RtBasis {
            p,
            closed: Lagrange1d::closed(p + 2)?,
            open: Lagrange1d::open(p + 1)?,
        })
    }

    pub fn dim(&self) -> usize {
        2 * (self.p + 2) * (self.p + 1)
    }

    pub fn y_offset(&self) -> usize {
        (self.p + 2) * (self.p + 1)
    }

    pub fn eval(&self, xi: [f64; 2]) -> RtEval {
        let (nc, no) = (self.p + 2, self.p + 1);
        let (cx, dcx) = self.closed.eval(xi[0]);
        let (cy, dcy) = self.closed.eval(xi[1]);
        let (ox, dox) = self.open.eval(xi[0]);
        let (oy, doy) = self.open.eval(xi[1]);
        let dim = self.dim();
        let mut values = Vec::with_capacity(dim);
        let mut grads = Vec::with_capacity(dim);
        let mut divs = Vec::with_capacity(dim);
        for j in 0..no {
            for i in 0..nc {
                values.push(Vec2::new(cx[i] * oy[j], 0.0));
                grads.push(Mat2::new(dcx[i] * oy[j], cx[i] * doy[j], 0.0, 0.0));
                divs.push(dcx[i] * oy[j]);
            }
        }
        for j in 0..nc {
            for i in 0..no {
                values.push(Vec2::new(0.0, ox[i] * cy[j]));
                grads.push(Mat2::new(0.0, 0.0, dox[i] * cy[j], ox[i] * dcy[j]));
                divs.push(ox[i] * dcy[j]);
            }
        }
        RtEval { values, grads, divs }
    }

    /// Local indices of the normal-trace functions on local face `f`, ordered
    /// by the face parameter, together with the sign `rho` such that the
    /// outward reference normal component equals `rho` times the coefficient.
    pub fn face_dofs(&self, f: usize) -> (Vec<usize>, f64) {
        let (nc, no) = (self.p + 2, self.p + 1);
        let off = self.y_offset();
        let dofs = (0..no)
            .map(|s| match f {
                0 => off + s,
                1 => (nc - 1) + nc * s,
                2 => off + s + no * (nc - 1),
                _ => nc * s,
            })
            .collect();
        let rho = if f == 1 || f == 2 { 1.0 } else { -1.0 };
        (dofs, rho)
    }

    /// Whether local function `k` has vanishing normal trace on every face.
    pub fn is_interior(&self, k: usize) -> bool {
        (0..4).all(|f| !self.face_dofs(f).0.contains(&k))
    }
}
