//! Shared fixtures: independently assembled diffusion discretizations on a
//! Cartesian grid and small coupled problems.

#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use smm_rad2d::closures::ClosureFields;
use smm_rad2d::fespace::Geometry;
use smm_rad2d::harness::problems::build_problem;
use smm_rad2d::linalg::{CsrMatrix, KrylovOptions};
use smm_rad2d::mesh::Mesh;
use smm_rad2d::smm::scalar::{assemble_matrix, assemble_rhs};
use smm_rad2d::smm::{HrtSystem, Method, MomentSolverOptions, RtSystem, SmmContext};
use smm_rad2d::transport::{AngularFlux, AngularQuadrature, InflowFn, SourceFn, TransportProblem};
use smm_rad2d::{Vec2, Vec3};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

// ---------------------------------------------------------------------------
// independent one-dimensional ingredients

/// Gauss-Legendre nodes and weights on `[0, 1]` from the Jacobi matrix.
pub fn gauss(n: usize) -> (Vec<f64>, Vec<f64>) {
    let j = DMatrix::from_fn(n, n, |a, b| {
        if a + 1 == b || b + 1 == a {
            let k = a.max(b) as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (0.5 * (eig.eigenvalues[i] + 1.0), eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// Gauss-Lobatto nodes on `[0, 1]`: the endpoints and the Gauss-Jacobi(1, 1)
/// nodes.
pub fn lobatto(n: usize) -> Vec<f64> {
    let m = n - 2;
    let j = DMatrix::from_fn(m, m, |a, b| {
        if a + 1 == b || b + 1 == a {
            let k = a.max(b) as f64;
            (k * (k + 2.0) / ((2.0 * k + 1.0) * (2.0 * k + 3.0))).sqrt()
        } else {
            0.0
        }
    });
    let mut x: Vec<f64> = if m == 0 {
        Vec::new()
    } else {
        SymmetricEigen::new(j)
            .eigenvalues
            .iter()
            .map(|v| 0.5 * (v + 1.0))
            .collect()
    };
    x.push(0.0);
    x.push(1.0);
    x.sort_by(|a, b| a.partial_cmp(b).unwrap());
    x
}

/// Lagrange polynomial `i` on `nodes` and its derivative at `t`.
pub fn lagrange(nodes: &[f64], i: usize, t: f64) -> (f64, f64) {
    let mut v = 1.0;
    for (k, &xk) in nodes.iter().enumerate() {
        if k != i {
            v *= (t - xk) / (nodes[i] - xk);
        }
    }
    let mut d = 0.0;
    for (m, &xm) in nodes.iter().enumerate() {
        if m == i {
            continue;
        }
        let mut term = 1.0 / (nodes[i] - xm);
        for (k, &xk) in nodes.iter().enumerate() {
            if k != i && k != m {
                term *= (t - xk) / (nodes[i] - xk);
            }
        }
        d += term;
    }
    (v, d)
}

// ---------------------------------------------------------------------------
// the test problem

pub const N: usize = 3;

pub fn sigma_t(ci: usize, cj: usize) -> f64 {
    1.0 + 0.5 * ((ci + 2 * cj) % 3) as f64
}

pub fn a_src(x: Vec2) -> f64 {
    1.0 + x.x * x.y
}

pub fn b_src(x: Vec2) -> Vec2 {
    Vec2::new(0.3 * x.x, -0.2)
}

pub fn inflow_value(x: Vec2, o: Vec3) -> f64 {
    (1.0 + x.x + 0.5 * x.y) * (1.0 + 0.3 * o.x) / (4.0 * PI)
}

/// Element `(ci, cj)` of the Cartesian mesh, located from its centre.
pub fn cell_of(mesh: &Mesh, e: usize) -> (usize, usize) {
    let c = mesh.element_center(e);
    ((c.x * N as f64) as usize, (c.y * N as f64) as usize)
}

pub fn problem(p: usize) -> TransportProblem {
    let mesh = Arc::new(Mesh::unit_square(N, 1).unwrap());
    let ne = mesh.num_elements();
    let st: Vec<f64> = (0..ne)
        .map(|e| {
            let (i, j) = cell_of(&mesh, e);
            sigma_t(i, j)
        })
        .collect();
    let ss: Vec<f64> = st.iter().map(|s| 0.5 * s).collect();
    let quad = Arc::new(AngularQuadrature::level_symmetric(6).unwrap());
    let source: SourceFn = Arc::new(|_, x, o| (a_src(x) + 3.0 * b_src(x).dot(&Vec2::new(o.x, o.y))) / (4.0 * PI));
    let inflow: InflowFn = Arc::new(inflow_value);
    let geo = Arc::new(Geometry::for_degree(mesh.clone(), p).unwrap());
    let space = Arc::new(smm_rad2d::fespace::FiniteElementSpace::dg(mesh, p).unwrap());
    TransportProblem::new(geo, space, quad, st, ss, source, inflow).unwrap()
}

pub fn oracle_eb0(quad: &AngularQuadrature, n: Vec2) -> f64 {
    let mut s = 0.0;
    for (o, w) in quad.directions.iter().zip(&quad.weights) {
        s += w * (o.x * n.x + o.y * n.y).abs();
    }
    s / (4.0 * PI)
}

pub fn oracle_jin(quad: &AngularQuadrature, x: Vec2, n: Vec2) -> f64 {
    let mut s = 0.0;
    for (o, w) in quad.directions.iter().zip(&quad.weights) {
        let on = o.x * n.x + o.y * n.y;
        if on < 0.0 {
            s += w * on * inflow_value(x, *o);
        }
    }
    s
}

/// Tensor Lagrange basis on `nodes` for a square cell of side `h`: values and
/// physical gradients at reference `(s, t)`, index `i + n j`.
pub fn tensor_eval(nodes: &[f64], s: f64, t: f64, h: f64) -> (Vec<f64>, Vec<Vec2>) {
    let n = nodes.len();
    let mut v = Vec::new();
    let mut g = Vec::new();
    for j in 0..n {
        let (ly, dy) = lagrange(nodes, j, t);
        for i in 0..n {
            let (lx, dx) = lagrange(nodes, i, s);
            v.push(lx * ly);
            g.push(Vec2::new(dx * ly, lx * dy) / h);
        }
    }
    (v, g)
}

/// Global numbering of the oracle plus a map from implementation unknowns.
pub struct Numbering {
    /// `dofs[(ci, cj)][local]`
    pub dofs: HashMap<(usize, usize), Vec<usize>>,
    pub n: usize,
}

/// Scalar numbering: discontinuous (per cell) or continuous (shared nodes).
pub fn scalar_numbering(nodes: &[f64], continuous: bool) -> Numbering {
    let np = nodes.len();
    let mut dofs = HashMap::new();
    let mut n = 0;
    if continuous {
        let p = np - 1;
        let side = N * p + 1;
        for cj in 0..N {
            for ci in 0..N {
                let mut d = Vec::new();
                for j in 0..np {
                    for i in 0..np {
                        d.push((ci * p + i) + side * (cj * p + j));
                    }
                }
                dofs.insert((ci, cj), d);
            }
        }
        n = side * side;
    } else {
        for cj in 0..N {
            for ci in 0..N {
                dofs.insert((ci, cj), (n..n + np * np).collect());
                n += np * np;
            }
        }
    }
    Numbering { dofs, n }
}

/// Implementation index -> oracle index, matched through node coordinates.
pub fn scalar_map(space: &smm_rad2d::fespace::FiniteElementSpace, nodes: &[f64], num: &Numbering) -> Vec<usize> {
    let mesh = space.mesh();
    let xs = space.interpolate(|x| x.x);
    let ys = space.interpolate(|x| x.y);
    let h = 1.0 / N as f64;
    let np = nodes.len();
    let mut map = vec![usize::MAX; space.ndofs()];
    for e in 0..mesh.num_elements() {
        let (ci, cj) = cell_of(mesh, e);
        for &k in space.element_dofs(e) {
            let (s, t) = ((xs[k] - ci as f64 * h) / h, (ys[k] - cj as f64 * h) / h);
            let i = (0..np)
                .min_by(|&a, &b| (nodes[a] - s).abs().partial_cmp(&(nodes[b] - s).abs()).unwrap())
                .unwrap();
            let j = (0..np)
                .min_by(|&a, &b| (nodes[a] - t).abs().partial_cmp(&(nodes[b] - t).abs()).unwrap())
                .unwrap();
            assert!((nodes[i] - s).abs() < 1e-12 && (nodes[j] - t).abs() < 1e-12);
            let o = num.dofs[&(ci, cj)][i + np * j];
            assert!(map[k] == usize::MAX || map[k] == o);
            map[k] = o;
        }
    }
    map
}

/// The four cell faces as (outward normal, reference point of parameter t).
pub fn cell_faces() -> [(Vec2, fn(f64) -> (f64, f64)); 4] {
    [
        (Vec2::new(0.0, -1.0), |t| (t, 0.0)),
        (Vec2::new(1.0, 0.0), |t| (1.0, t)),
        (Vec2::new(0.0, 1.0), |t| (t, 1.0)),
        (Vec2::new(-1.0, 0.0), |t| (0.0, t)),
    ]
}

pub fn neighbour(ci: usize, cj: usize, f: usize) -> Option<(usize, usize)> {
    match f {
        0 if cj > 0 => Some((ci, cj - 1)),
        1 if ci + 1 < N => Some((ci + 1, cj)),
        2 if cj + 1 < N => Some((ci, cj + 1)),
        3 if ci > 0 => Some((ci - 1, cj)),
        _ => None,
    }
}

/// Textbook symmetric interior penalty (`penalty`) or continuous Galerkin
/// diffusion with Marshak boundaries and a first-moment source.
pub fn textbook_scalar(p: usize, quad: &AngularQuadrature, penalty: bool) -> (DMatrix<f64>, Vec<f64>, Vec<f64>) {
    let nodes = if penalty { gauss(p + 1).0 } else { lobatto(p + 1) };
    let num = scalar_numbering(&nodes, !penalty);
    let (qx, qw) = gauss(p + 3);
    let h = 1.0 / N as f64;
    let mut a = DMatrix::zeros(num.n, num.n);
    let mut rhs = vec![0.0; num.n];
    let nl = (p + 1) * (p + 1);
    let kappa = |s1: f64, s2: f64| 0.5 * ((p + 1).pow(2) as f64 / (s1 * h) + (p + 1).pow(2) as f64 / (s2 * h));
    for cj in 0..N {
        for ci in 0..N {
            let st = sigma_t(ci, cj);
            let (d, sa) = (1.0 / (3.0 * st), 0.5 * st);
            let dofs = &num.dofs[&(ci, cj)];
            let origin = Vec2::new(ci as f64 * h, cj as f64 * h);
            for (s, ws) in qx.iter().zip(&qw) {
                for (t, wt) in qx.iter().zip(&qw) {
                    let x = origin + Vec2::new(s * h, t * h);
                    let w = ws * wt * h * h;
                    let (v, g) = tensor_eval(&nodes, *s, *t, h);
                    for i in 0..nl {
                        for j in 0..nl {
                            a[(dofs[i], dofs[j])] += w * (d * g[i].dot(&g[j]) + sa * v[i] * v[j]);
                        }
                        rhs[dofs[i]] += w * (a_src(x) * v[i] + g[i].dot(&b_src(x)) / st);
                    }
                }
            }
            for (f, (n, at)) in cell_faces().iter().enumerate() {
                match neighbour(ci, cj, f) {
                    None => {
                        for (t, wt) in qx.iter().zip(&qw) {
                            let (s1, s2) = at(*t);
                            let x = origin + Vec2::new(s1 * h, s2 * h);
                            let (v, _) = tensor_eval(&nodes, s1, s2, h);
                            let eb0 = oracle_eb0(quad, *n);
                            for i in 0..nl {
                                for j in 0..nl {
                                    a[(dofs[i], dofs[j])] += wt * h * eb0 * v[i] * v[j];
                                }
                                rhs[dofs[i]] -= wt * h * 2.0 * oracle_jin(quad, x, *n) * v[i];
                            }
                        }
                    }
                    // each interior face once, from the cell on its left or below
                    Some((ni, nj)) if penalty && (f == 1 || f == 2) => {
                        let st2 = sigma_t(ni, nj);
                        let d2 = 1.0 / (3.0 * st2);
                        let k = kappa(st, st2);
                        let dofs2 = &num.dofs[&(ni, nj)];
                        let (_, at2) = cell_faces()[(f + 2) % 4];
                        for (t, wt) in qx.iter().zip(&qw) {
                            let (s1, s2) = at(*t);
                            let (r1, r2) = at2(*t);
                            let x = origin + Vec2::new(s1 * h, s2 * h);
                            let (v1, g1) = tensor_eval(&nodes, s1, s2, h);
                            let (v2, g2) = tensor_eval(&nodes, r1, r2, h);
                            let w = wt * h;
                            // unknowns of both cells: [u] and {D grad u . n}
                            let mut all = dofs.clone();
                            all.extend_from_slice(dofs2);
                            let jump: Vec<f64> = v1.iter().copied().chain(v2.iter().map(|v| -v)).collect();
                            let avg: Vec<f64> = g1
                                .iter()
                                .map(|g| 0.5 * d * g.dot(n))
                                .chain(g2.iter().map(|g| 0.5 * d2 * g.dot(n)))
                                .collect();
                            for r in 0..2 * nl {
                                for c in 0..2 * nl {
                                    a[(all[r], all[c])] +=
                                        w * (k * jump[r] * jump[c] - avg[c] * jump[r] - avg[r] * jump[c]);
                                }
                                let bn = 0.5 * (b_src(x).dot(n) / st + b_src(x).dot(n) / st2);
                                rhs[all[r]] -= w * bn * jump[r];
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    (a, rhs, nodes)
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a: f64, v| a.max(v.abs()))
}

pub fn compare_scalar(method: Method, p: usize) -> (f64, f64) {
    let prob = problem(p);
    let ctx = SmmContext::from_problem(&prob);
    let space = match method {
        Method::Ip => smm_rad2d::fespace::FiniteElementSpace::dg(prob.geo.mesh.clone(), p).unwrap(),
        _ => smm_rad2d::fespace::FiniteElementSpace::cg(prob.geo.mesh.clone(), p).unwrap(),
    };
    let penalty = method == Method::Ip;
    let m = assemble_matrix(&ctx, &space, penalty);
    let closures = ClosureFields::diffusion(prob.space.ndofs(), &prob.geo, &prob.quad, &prob.inflow);
    let b = assemble_rhs(&ctx, &space, &closures, penalty);
    let (a, rhs, nodes) = textbook_scalar(p, &prob.quad, penalty);
    let num = scalar_numbering(&nodes, !penalty);
    let map = scalar_map(&space, &nodes, &num);
    let dense = m.to_dense();
    let scale = max_abs(&a).max(1.0);
    let mut worst_m: f64 = 0.0;
    let mut worst_b: f64 = 0.0;
    for r in 0..space.ndofs() {
        for c in 0..space.ndofs() {
            worst_m = worst_m.max((dense[r][c] - a[(map[r], map[c])]).abs() / scale);
        }
        worst_b = worst_b.max((b[r] - rhs[map[r]]).abs() / rhs.iter().fold(1.0f64, |s, v| s.max(v.abs())));
    }
    (worst_m, worst_b)
}

// ---------------------------------------------------------------------------
// mixed form

/// Reference `Q_{p+1,p} x Q_{p,p+1}` functions: x components first
/// (closed index fastest), then y components (open index fastest).
pub fn rt_eval(p: usize, s: f64, t: f64) -> (Vec<Vec2>, Vec<f64>) {
    let closed = lobatto(p + 2);
    let open = gauss(p + 1).0;
    let mut v = Vec::new();
    let mut div = Vec::new();
    for j in 0..p + 1 {
        let (oy, _) = lagrange(&open, j, t);
        for i in 0..p + 2 {
            let (cx, dcx) = lagrange(&closed, i, s);
            v.push(Vec2::new(cx * oy, 0.0));
            div.push(dcx * oy);
        }
    }
    for j in 0..p + 2 {
        let (cy, dcy) = lagrange(&closed, j, t);
        for i in 0..p + 1 {
            let (ox, _) = lagrange(&open, i, s);
            v.push(Vec2::new(0.0, ox * cy));
            div.push(ox * dcy);
        }
    }
    (v, div)
}

/// Global index of local RT function `k` of cell `(ci, cj)`. Normal-trace
/// functions are shared through their face; on an axis-aligned grid the local
/// functions of both cells agree there, so no signs are needed.
pub fn rt_global(p: usize, ci: usize, cj: usize, k: usize) -> usize {
    let (nc, no) = (p + 2, p + 1);
    let vertical = (N + 1) * N * no;
    let horizontal = N * (N + 1) * no;
    let interior = 2 * (nc - 2) * no;
    let yoff = nc * no;
    if k < yoff {
        let (i, j) = (k % nc, k / nc);
        if i == 0 || i == nc - 1 {
            let line = ci + if i == 0 { 0 } else { 1 };
            return (line + (N + 1) * cj) * no + j;
        }
        vertical + horizontal + (ci + N * cj) * interior + (i - 1) + (nc - 2) * j
    } else {
        let k = k - yoff;
        let (i, j) = (k % no, k / no);
        if j == 0 || j == nc - 1 {
            let line = cj + if j == 0 { 0 } else { 1 };
            return vertical + (ci + N * line) * no + i;
        }
        vertical + horizontal + (ci + N * cj) * interior + (nc - 2) * no + i + no * (j - 1)
    }
}

pub struct TextbookMixed {
    pub mt: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub ma: DMatrix<f64>,
    pub gv: Vec<f64>,
    pub f: Vec<f64>,
    pub nv: usize,
}

/// Textbook mixed diffusion `sigma_t J + grad phi / 3 = Q1`,
/// `div J + sigma_a phi = Q0` with Marshak boundaries.
pub fn textbook_mixed(p: usize, quad: &AngularQuadrature) -> TextbookMixed {
    let (nc, no) = (p + 2, p + 1);
    let nv = (N + 1) * N * no * 2 + N * N * 2 * (nc - 2) * no;
    let snodes = gauss(p + 1).0;
    let snum = scalar_numbering(&snodes, false);
    let ns = snum.n;
    let (qx, qw) = gauss(p + 3);
    let h = 1.0 / N as f64;
    let nr = 2 * nc * no;
    let nl = no * no;
    let mut t = TextbookMixed {
        mt: DMatrix::zeros(nv, nv),
        d: DMatrix::zeros(ns, nv),
        g: DMatrix::zeros(nv, ns),
        ma: DMatrix::zeros(ns, ns),
        gv: vec![0.0; nv],
        f: vec![0.0; ns],
        nv,
    };
    for cj in 0..N {
        for ci in 0..N {
            let st = sigma_t(ci, cj);
            let sa = 0.5 * st;
            let vd: Vec<usize> = (0..nr).map(|k| rt_global(p, ci, cj, k)).collect();
            let sd = &snum.dofs[&(ci, cj)];
            let origin = Vec2::new(ci as f64 * h, cj as f64 * h);
            let mut grad_part = DMatrix::<f64>::zeros(nr, nl);
            for (s, ws) in qx.iter().zip(&qw) {
                for (tt, wt) in qx.iter().zip(&qw) {
                    let x = origin + Vec2::new(s * h, tt * h);
                    let w = ws * wt * h * h;
                    let (rv, rdiv) = rt_eval(p, *s, *tt);
                    // contravariant Piola for the map x = origin + h xi
                    let v: Vec<Vec2> = rv.iter().map(|a| a / h).collect();
                    let div: Vec<f64> = rdiv.iter().map(|a| a / (h * h)).collect();
                    let (u, gu) = tensor_eval(&snodes, *s, *tt, h);
                    for i in 0..nr {
                        for j in 0..nr {
                            t.mt[(vd[i], vd[j])] += w * st * v[i].dot(&v[j]);
                        }
                        for k in 0..nl {
                            t.d[(sd[k], vd[i])] += w * u[k] * div[i];
                            grad_part[(i, k)] += w * gu[k].dot(&v[i]);
                        }
                        t.gv[vd[i]] += w * v[i].dot(&b_src(x));
                    }
                    for k in 0..nl {
                        for l in 0..nl {
                            t.ma[(sd[k], sd[l])] += w * sa * u[k] * u[l];
                        }
                        t.f[sd[k]] += w * u[k] * a_src(x);
                    }
                }
            }
            // G = -(1/3) (oint u v . n - int grad u . v)
            let mut boundary_part = DMatrix::<f64>::zeros(nr, nl);
            for (f, (n, at)) in cell_faces().iter().enumerate() {
                for (tt, wt) in qx.iter().zip(&qw) {
                    let (s1, s2) = at(*tt);
                    let x = origin + Vec2::new(s1 * h, s2 * h);
                    let (rv, _) = rt_eval(p, s1, s2);
                    let vn: Vec<f64> = rv.iter().map(|a| a.dot(n) / h).collect();
                    let (u, _) = tensor_eval(&snodes, s1, s2, h);
                    let w = wt * h;
                    for i in 0..nr {
                        for k in 0..nl {
                            boundary_part[(i, k)] += w * u[k] * vn[i];
                        }
                    }
                    if neighbour(ci, cj, f).is_none() {
                        let eb0 = oracle_eb0(quad, *n);
                        for i in 0..nr {
                            for j in 0..nr {
                                t.mt[(vd[i], vd[j])] += w * vn[i] * vn[j] / (3.0 * eb0);
                            }
                            t.gv[vd[i]] += w * 2.0 * oracle_jin(quad, x, *n) / (3.0 * eb0) * vn[i];
                        }
                    }
                }
            }
            for i in 0..nr {
                for k in 0..nl {
                    t.g[(vd[i], sd[k])] += -(boundary_part[(i, k)] - grad_part[(i, k)]) / 3.0;
                }
            }
        }
    }
    t
}

pub fn rel_diff(imp: &CsrMatrix, rows: &[(usize, f64)], cols: &[(usize, f64)], oracle: &DMatrix<f64>) -> f64 {
    let dense = imp.to_dense();
    let scale = max_abs(oracle).max(1.0);
    let mut worst: f64 = 0.0;
    for (r, &(or, sr)) in rows.iter().enumerate() {
        for (c, &(oc, sc)) in cols.iter().enumerate() {
            worst = worst.max((dense[r][c] - sr * sc * oracle[(or, oc)]).abs() / scale);
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// exact integration

pub fn affine_problem(p: usize) -> TransportProblem {
    let mut mesh = Mesh::unit_square(3, 1).unwrap();
    mesh.transform(|x| Vec2::new(x.x + 0.3 * x.y, 0.2 * x.x + 0.9 * x.y))
        .unwrap();
    let mesh = Arc::new(mesh);
    let ne = mesh.num_elements();
    let st: Vec<f64> = (0..ne).map(|e| 1.0 + 0.25 * (e % 4) as f64).collect();
    let ss: Vec<f64> = st.iter().map(|s| 0.6 * s).collect();
    let quad = Arc::new(AngularQuadrature::level_symmetric(4).unwrap());
    let source: SourceFn =
        Arc::new(move |_, x, o| (1.0 + x.x - x.y * x.y + (0.5 * x.y - 0.2) * o.x + 0.3 * o.x * o.y) / (4.0 * PI));
    let inflow: InflowFn = Arc::new(|x, o| (1.0 + x.x * x.y) * (1.0 + o.y * o.y));
    let geo = Arc::new(Geometry::for_degree(mesh.clone(), p).unwrap());
    let space = Arc::new(smm_rad2d::fespace::FiniteElementSpace::dg(mesh, p).unwrap());
    TransportProblem::new(geo, space, quad, st, ss, source, inflow).unwrap()
}

/// Pseudo-random anisotropic flux in the transport space.
pub fn some_flux(prob: &TransportProblem) -> AngularFlux {
    let mut s: u64 = 7;
    let data = (0..prob.quad.len())
        .map(|_| {
            (0..prob.space.ndofs())
                .map(|_| {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    (s >> 11) as f64 / (1u64 << 53) as f64
                })
                .collect()
        })
        .collect();
    AngularFlux { data }
}

pub fn max_rel(a: &CsrMatrix, b: &CsrMatrix) -> f64 {
    a.add_scaled(-1.0, b).max_abs() / b.max_abs()
}

pub fn max_rel_vec(a: &[f64], b: &[f64]) -> f64 {
    let s = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / s
}

// ---------------------------------------------------------------------------
// coupled solves

pub fn tight_moment() -> MomentSolverOptions {
    let mut m = MomentSolverOptions::default();
    m.krylov = KrylovOptions {
        rel_tol: 1e-12,
        abs_tol: 0.0,
        max_iter: 50_000,
    };
    m
}

/// Checkerboard of thick and thin cells with a localized source and vacuum
/// boundaries on a curved mesh.
pub fn checkerboard(n: usize, p: usize) -> Arc<TransportProblem> {
    let mut mesh = Mesh::unit_square(n, 2).unwrap();
    mesh.distort_taylor_green(0.5, 100).unwrap();
    let mesh = Arc::new(mesh);
    let ne = mesh.num_elements();
    let mut st = Vec::new();
    let mut ss = Vec::new();
    let mut q = Vec::new();
    for e in 0..ne {
        let c = mesh.element_center(e);
        let thick = ((c.x * 4.0) as usize + (c.y * 4.0) as usize) % 2 == 0;
        st.push(if thick { 20.0 } else { 0.2 });
        ss.push(if thick { 19.0 } else { 0.1 });
        q.push(if (c - Vec2::new(0.5, 0.5)).norm() < 0.3 {
            1.0
        } else {
            0.0
        });
    }
    let quad = Arc::new(AngularQuadrature::level_symmetric(4).unwrap());
    Arc::new(build_problem(mesh, p, quad, st, ss, q, Arc::new(|_, _| 0.0)).unwrap())
}
/// Largest relative deviations of the mixed blocks, `G + D^T / 3` and both
/// right-hand sides from the textbook assembly.
pub fn compare_rt(p: usize) -> Vec<(&'static str, f64)> {
    let prob = problem(p);
    let ctx = Arc::new(SmmContext::from_problem(&prob));
    let sys = RtSystem::new(ctx, MomentSolverOptions::default()).unwrap();
    let tb = textbook_mixed(p, &prob.quad);
    assert_eq!(sys.vspace.ndofs(), tb.nv);
    // implementation unknown -> (oracle unknown, sign)
    let mut vmap = vec![(usize::MAX, 0.0); tb.nv];
    for e in 0..prob.num_elements() {
        let (ci, cj) = cell_of(&prob.geo.mesh, e);
        for (k, (&g, &s)) in sys
            .vspace
            .element_dofs(e)
            .iter()
            .zip(sys.vspace.element_signs(e))
            .enumerate()
        {
            let o = (rt_global(p, ci, cj, k), s);
            assert!(vmap[g].0 == usize::MAX || vmap[g] == o, "inconsistent unknown {g}");
            vmap[g] = o;
        }
    }
    let snodes = gauss(p + 1).0;
    let smap: Vec<(usize, f64)> = scalar_map(&sys.sspace, &snodes, &scalar_numbering(&snodes, false))
        .into_iter()
        .map(|o| (o, 1.0))
        .collect();
    let gt = sys.d.transpose().scale(-1.0 / 3.0);
    let closures = ClosureFields::diffusion(prob.space.ndofs(), &prob.geo, &prob.quad, &prob.inflow);
    let (g, f) = sys.rhs(&closures);
    let gs = tb.gv.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let fs = tb.f.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let g_err = vmap
        .iter()
        .enumerate()
        .fold(0.0f64, |m, (k, &(o, s))| m.max((g[k] - s * tb.gv[o]).abs() / gs));
    let f_err = smap
        .iter()
        .enumerate()
        .fold(0.0f64, |m, (k, &(o, _))| m.max((f[k] - tb.f[o]).abs() / fs));
    vec![
        ("mt", rel_diff(&sys.mt, &vmap, &vmap, &tb.mt)),
        ("d", rel_diff(&sys.d, &smap, &vmap, &tb.d)),
        ("g", rel_diff(&sys.g, &vmap, &smap, &tb.g)),
        ("ma", rel_diff(&sys.ma, &smap, &smap, &tb.ma)),
        ("g + d^T / 3", sys.g.add_scaled(-1.0, &gt).max_abs() / sys.d.max_abs()),
        ("rhs g", g_err),
        ("rhs f", f_err),
    ]
}

/// Relative changes of every moment form when the quadrature gains one point
/// per direction, on an affine mesh with polynomial data and an anisotropic
/// flux.
pub fn saturation(p: usize) -> Vec<(String, f64)> {
    let prob = affine_problem(p);
    let psi = some_flux(&prob);
    let base = SmmContext::from_problem(&prob);
    let n0 = prob.geo.npts();
    let mut finer = base.clone();
    finer.geo = Arc::new(Geometry::new(prob.geo.mesh.clone(), n0 + 1).unwrap());
    let c0 = ClosureFields::from_flux(&psi, &prob.space, &base.geo, &prob.quad, &prob.inflow);
    let c1 = ClosureFields::from_flux(&psi, &prob.space, &finer.geo, &prob.quad, &prob.inflow);
    let mut out = Vec::new();
    for method in [Method::Ip, Method::Cg] {
        let space = match method {
            Method::Ip => smm_rad2d::fespace::FiniteElementSpace::dg(prob.geo.mesh.clone(), p).unwrap(),
            _ => smm_rad2d::fespace::FiniteElementSpace::cg(prob.geo.mesh.clone(), p).unwrap(),
        };
        let pen = method == Method::Ip;
        let dm = max_rel(
            &assemble_matrix(&finer, &space, pen),
            &assemble_matrix(&base, &space, pen),
        );
        let db = max_rel_vec(
            &assemble_rhs(&finer, &space, &c1, pen),
            &assemble_rhs(&base, &space, &c0, pen),
        );
        out.push((format!("{} matrix", method.name()), dm));
        out.push((format!("{} rhs", method.name()), db));
    }
    let r0 = RtSystem::new(Arc::new(base.clone()), MomentSolverOptions::default()).unwrap();
    let r1 = RtSystem::new(Arc::new(finer.clone()), MomentSolverOptions::default()).unwrap();
    for (name, a, b) in [
        ("rt mt", &r1.mt, &r0.mt),
        ("rt d", &r1.d, &r0.d),
        ("rt ma", &r1.ma, &r0.ma),
    ] {
        out.push((name.into(), max_rel(a, b)));
    }
    let (g0, f0) = r0.rhs(&c0);
    let (g1, f1) = r1.rhs(&c1);
    out.push(("rt rhs g".into(), max_rel_vec(&g1, &g0)));
    out.push(("rt rhs f".into(), max_rel_vec(&f1, &f0)));
    let h0 = HrtSystem::new(Arc::new(base), MomentSolverOptions::default()).unwrap();
    let h1 = HrtSystem::new(Arc::new(finer), MomentSolverOptions::default()).unwrap();
    out.push(("hrt reduced".into(), max_rel(&h1.reduced, &h0.reduced)));
    out
}
