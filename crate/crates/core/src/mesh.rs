//! Curved quadrilateral meshes.
//!
//! Every element is the image of the reference square `[0,1]^2` under a map in
//! `Q_m`, interpolating `(m+1)^2` control points placed at tensor Gauss-Lobatto
//! positions. Control point `i + (m+1) * j` of an element sits at reference
//! position `(g_i, g_j)`.
//!
//! Local faces are numbered 0 (eta = 0), 1 (xi = 1), 2 (eta = 1), 3 (xi = 0).
//! Each face is parametrised by `s` in `[0, 1]` running along increasing xi
//! (faces 0 and 2) or increasing eta (faces 1 and 3).

use crate::fespace::basis::Lagrange1d;
use crate::fespace::quadrature::gauss_legendre;
use crate::{Error, Mat2, Result, Vec2};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

/// Outward unit normals of the reference square faces.
pub const REF_NORMALS: [[f64; 2]; 4] = [[0.0, -1.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]];

/// Reference coordinates of the point with parameter `s` on local face `f`.
pub fn face_to_ref(f: usize, s: f64) -> [f64; 2] {
    match f {
        0 => [s, 0.0],
        1 => [1.0, s],
        2 => [s, 1.0],
        _ => [0.0, s],
    }
}

/// Local corner indices (0: (0,0), 1: (1,0), 2: (1,1), 3: (0,1)) at `s = 0`
/// and `s = 1` of local face `f`.
pub fn face_corners(f: usize) -> [usize; 2] {
    match f {
        0 => [0, 1],
        1 => [1, 2],
        2 => [3, 2],
        _ => [0, 3],
    }
}

/// A mesh face. The first side defines the face parameter and the global
/// normal, which points from the first side into the second.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub first: (usize, usize),
    pub second: Option<(usize, usize)>,
    /// The second side sees parameter `1 - s` where the first sees `s`.
    pub reversed: bool,
    /// Boundary tag, zero for interior faces.
    pub tag: usize,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.second.is_none()
    }

    /// Parameter on the second side matching `s` on the first.
    pub fn second_param(&self, s: f64) -> f64 {
        if self.reversed {
            1.0 - s
        } else {
            s
        }
    }
}

/// Pointwise geometry of an element map.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub x: Vec2,
    pub jac: Mat2,
    pub det: f64,
    pub inv_t: Mat2,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    order: usize,
    nodes: Vec<Vec2>,
    elements: Vec<Vec<usize>>,
    attributes: Vec<usize>,
    faces: Vec<Face>,
    element_faces: Vec<[usize; 4]>,
    line: Lagrange1d,
}

impl Mesh {
    /// Builds a mesh from control points and element connectivity, computing
    /// face connectivity and validating conformity and orientation.
    /// `tags` maps the corner-node pair of a boundary face to its tag; untagged
    /// boundary faces get tag 1.
    pub fn new(
        order: usize,
        nodes: Vec<Vec2>,
        elements: Vec<Vec<usize>>,
        attributes: Vec<usize>,
        tags: &HashMap<(usize, usize), usize>,
    ) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidMesh("geometric order must be at least 1".into()));
        }
        let npe = (order + 1) * (order + 1);
        if attributes.len() != elements.len() {
            return Err(Error::InvalidMesh(format!(
                "{} attributes for {} elements",
                attributes.len(),
                elements.len()
            )));
        }
        for (e, el) in elements.iter().enumerate() {
            if el.len() != npe {
                return Err(Error::InvalidMesh(format!(
                    "element {e} has {} control points, expected {npe}",
                    el.len()
                )));
            }
            if let Some(&bad) = el.iter().find(|&&n| n >= nodes.len()) {
                return Err(Error::InvalidMesh(format!("element {e} references missing node {bad}")));
            }
        }
        let line = Lagrange1d::closed(order + 1)?;
        let mut mesh = Mesh {
            order,
            nodes,
            elements,
            attributes,
            faces: Vec::new(),
            element_faces: Vec::new(),
            line,
        };
        mesh.build_faces(tags)?;
        mesh.check_hanging()?;
        mesh.check_orientation()?;
        Ok(mesh)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn nodes(&self) -> &[Vec2] {
        &self.nodes
    }

    pub fn element_nodes(&self, e: usize) -> &[usize] {
        &self.elements[e]
    }

    pub fn attribute(&self, e: usize) -> usize {
        self.attributes[e]
    }

    pub fn attributes(&self) -> &[usize] {
        &self.attributes
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, f: usize) -> &Face {
        &self.faces[f]
    }

    pub fn element_faces(&self, e: usize) -> [usize; 4] {
        self.element_faces[e]
    }

    /// Global node index of corner `c` of element `e`.
    pub fn corner(&self, e: usize, c: usize) -> usize {
        let m = self.order;
        let k = match c {
            0 => 0,
            1 => m,
            2 => m + (m + 1) * m,
            _ => (m + 1) * m,
        };
        self.elements[e][k]
    }

    /// Element-local control point indices along local face `f`, ordered by
    /// the face parameter.
    fn face_control_points(&self, f: usize) -> Vec<usize> {
        let n = self.order + 1;
        (0..n)
            .map(|s| match f {
                0 => s,
                1 => (n - 1) + n * s,
                2 => s + n * (n - 1),
                _ => n * s,
            })
            .collect()
    }

    fn build_faces(&mut self, tags: &HashMap<(usize, usize), usize>) -> Result<()> {
        let mut map: HashMap<(usize, usize), usize> = HashMap::new();
        let mut faces: Vec<Face> = Vec::new();
        let mut element_faces = vec![[usize::MAX; 4]; self.elements.len()];
        for e in 0..self.elements.len() {
            for lf in 0..4 {
                let [c0, c1] = face_corners(lf);
                let (a, b) = (self.corner(e, c0), self.corner(e, c1));
                if a == b {
                    return Err(Error::InvalidMesh(format!("element {e} has a collapsed face")));
                }
                let key = (a.min(b), a.max(b));
                match map.get(&key) {
                    None => {
                        map.insert(key, faces.len());
                        element_faces[e][lf] = faces.len();
                        faces.push(Face {
                            first: (e, lf),
                            second: None,
                            reversed: false,
                            tag: 0,
                        });
                    }
                    Some(&fid) => {
                        let face = &mut faces[fid];
                        if face.second.is_some() {
                            return Err(Error::NonConforming(format!(
                                "face ({a}, {b}) shared by more than two elements"
                            )));
                        }
                        let (e1, lf1) = face.first;
                        let [d0, _] = face_corners(lf1);
                        let first_start = self.corner(e1, d0);
                        let reversed = first_start != a;
                        let p1: Vec<usize> = self
                            .face_control_points(lf1)
                            .into_iter()
                            .map(|k| self.elements[e1][k])
                            .collect();
                        let mut p2: Vec<usize> = self
                            .face_control_points(lf)
                            .into_iter()
                            .map(|k| self.elements[e][k])
                            .collect();
                        if reversed {
                            p2.reverse();
                        }
                        if p1 != p2 {
                            return Err(Error::NonConforming(format!(
                                "elements {e1} and {e} disagree on the control points of a shared face"
                            )));
                        }
                        face.second = Some((e, lf));
                        face.reversed = reversed;
                        element_faces[e][lf] = fid;
                    }
                }
            }
        }
        for (key, &fid) in &map {
            if faces[fid].second.is_none() {
                faces[fid].tag = tags.get(key).copied().unwrap_or(1).max(1);
            }
        }
        self.faces = faces;
        self.element_faces = element_faces;
        Ok(())
    }

    /// Rejects meshes where a boundary vertex lies inside another boundary
    /// face, which is how a hanging node shows up in this representation.
    fn check_hanging(&self) -> Result<()> {
        let bfaces: Vec<Vec<Vec2>> = self
            .faces
            .iter()
            .filter(|f| f.is_boundary())
            .map(|f| {
                let (e, lf) = f.first;
                self.face_control_points(lf)
                    .into_iter()
                    .map(|k| self.nodes[self.elements[e][k]])
                    .collect()
            })
            .collect();
        let mut scale: f64 = 0.0;
        for f in &bfaces {
            scale = scale.max((f[0] - f[f.len() - 1]).norm());
        }
        let tol = 1e-9 * scale.max(1e-300);
        let mut verts: Vec<Vec2> = Vec::new();
        for f in &bfaces {
            verts.push(f[0]);
            verts.push(f[f.len() - 1]);
        }
        for v in &verts {
            for f in &bfaces {
                if (v - f[0]).norm() < tol || (v - f[f.len() - 1]).norm() < tol {
                    continue;
                }
                for w in f.windows(2) {
                    let d = w[1] - w[0];
                    let t = (v - w[0]).dot(&d) / d.norm_squared();
                    if (0.0..=1.0).contains(&t) && (w[0] + d * t - v).norm() < tol {
                        return Err(Error::NonConforming(format!(
                            "hanging vertex at ({:.6}, {:.6})",
                            v.x, v.y
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_orientation(&self) -> Result<()> {
        let rule = gauss_legendre(self.order + 2)?;
        let mut pts: Vec<[f64; 2]> = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        for &a in &rule.nodes {
            for &b in &rule.nodes {
                pts.push([a, b]);
            }
        }
        for e in 0..self.elements.len() {
            for &xi in &pts {
                let fr = self.frame(e, xi);
                if fr.det <= 0.0 || !fr.det.is_finite() {
                    return Err(Error::InvertedElement {
                        element: e,
                        jacobian: fr.det,
                        xi: xi[0],
                        eta: xi[1],
                    });
                }
            }
        }
        Ok(())
    }

    /// Position, Jacobian, its determinant and inverse transpose at `xi`.
    pub fn frame(&self, e: usize, xi: [f64; 2]) -> Frame {
        let n = self.order + 1;
        let (vx, dx) = self.line.eval(xi[0]);
        let (vy, dy) = self.line.eval(xi[1]);
        let mut x = Vec2::zeros();
        let mut jac = Mat2::zeros();
        let el = &self.elements[e];
        for j in 0..n {
            for i in 0..n {
                let p = self.nodes[el[i + n * j]];
                x += p * (vx[i] * vy[j]);
                let gx = dx[i] * vy[j];
                let gy = vx[i] * dy[j];
                jac[(0, 0)] += p.x * gx;
                jac[(0, 1)] += p.x * gy;
                jac[(1, 0)] += p.y * gx;
                jac[(1, 1)] += p.y * gy;
            }
        }
        let det = jac.determinant();
        let inv_t = Mat2::new(jac[(1, 1)], -jac[(1, 0)], -jac[(0, 1)], jac[(0, 0)]) / det;
        Frame { x, jac, det, inv_t }
    }

    pub fn map_point(&self, e: usize, xi: [f64; 2]) -> Vec2 {
        self.frame(e, xi).x
    }

    /// Derivatives of the Jacobian: `hess[l][(i, j)] = d^2 x_i / d xi_j d xi_l`.
    pub fn map_hessian(&self, e: usize, xi: [f64; 2]) -> [Mat2; 2] {
        let n = self.order + 1;
        let (vx, dx, ddx) = self.line.eval_all(xi[0]);
        let (vy, dy, ddy) = self.line.eval_all(xi[1]);
        let mut h = [Mat2::zeros(), Mat2::zeros()];
        let el = &self.elements[e];
        for j in 0..n {
            for i in 0..n {
                let p = self.nodes[el[i + n * j]];
                let xx = ddx[i] * vy[j];
                let xy = dx[i] * dy[j];
                let yy = vx[i] * ddy[j];
                for c in 0..2 {
                    h[0][(c, 0)] += p[c] * xx;
                    h[0][(c, 1)] += p[c] * xy;
                    h[1][(c, 0)] += p[c] * xy;
                    h[1][(c, 1)] += p[c] * yy;
                }
            }
        }
        h
    }

    /// Element area by Gauss quadrature exact for the Jacobian determinant.
    pub fn area(&self, e: usize) -> f64 {
        let rule = gauss_legendre(self.order + 1).expect("valid rule");
        let mut a = 0.0;
        for (j, &wy) in rule.weights.iter().enumerate() {
            for (i, &wx) in rule.weights.iter().enumerate() {
                a += wx * wy * self.frame(e, [rule.nodes[i], rule.nodes[j]]).det;
            }
        }
        a
    }

    /// Element size `sqrt(area)`.
    pub fn h(&self, e: usize) -> f64 {
        self.area(e).sqrt()
    }

    pub fn h_max(&self) -> f64 {
        (0..self.num_elements()).map(|e| self.h(e)).fold(0.0, f64::max)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_elements()).map(|e| self.area(e)).sum()
    }

    /// Bounding box of the control points as `(min, max)`.
    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        let mut lo = Vec2::repeat(f64::INFINITY);
        let mut hi = Vec2::repeat(f64::NEG_INFINITY);
        for p in &self.nodes {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (lo, hi)
    }

    /// Centroid of the element corners.
    pub fn element_center(&self, e: usize) -> Vec2 {
        self.map_point(e, [0.5, 0.5])
    }

    /// Finds an element containing `x` and the reference coordinates of `x`
    /// in it. Points on shared faces resolve to the lowest-numbered element.
    pub fn locate(&self, x: Vec2) -> Result<(usize, [f64; 2])> {
        let tol = 1e-10;
        for e in 0..self.num_elements() {
            let el = &self.elements[e];
            let mut lo = Vec2::repeat(f64::INFINITY);
            let mut hi = Vec2::repeat(f64::NEG_INFINITY);
            for &k in el {
                lo = lo.inf(&self.nodes[k]);
                hi = hi.sup(&self.nodes[k]);
            }
            let pad = 0.25 * (hi - lo).norm();
            if x.x < lo.x - pad || x.x > hi.x + pad || x.y < lo.y - pad || x.y > hi.y + pad {
                continue;
            }
            let mut xi = [0.5, 0.5];
            let mut ok = false;
            for _ in 0..50 {
                let fr = self.frame(e, xi);
                let r = x - fr.x;
                let d = fr.inv_t.transpose() * r;
                xi[0] += d.x;
                xi[1] += d.y;
                if !xi[0].is_finite() || xi[0].abs() > 10.0 || xi[1].abs() > 10.0 {
                    break;
                }
                if d.norm() < 1e-14 {
                    ok = true;
                    break;
                }
            }
            if ok && (-tol..=1.0 + tol).contains(&xi[0]) && (-tol..=1.0 + tol).contains(&xi[1]) {
                return Ok((e, [xi[0].clamp(0.0, 1.0), xi[1].clamp(0.0, 1.0)]));
            }
        }
        Err(Error::PointOutside(x.x, x.y))
    }

    /// Moves every control point through `f`, then revalidates orientation.
    pub fn transform(&mut self, f: impl Fn(Vec2) -> Vec2) -> Result<()> {
        for p in &mut self.nodes {
            *p = f(*p);
        }
        self.check_orientation()
    }

    /// Advects control points through the Taylor-Green vortex
    /// `v = (sin x cos y, -cos x sin y)` with forward Euler, in the mesh's own
    /// coordinates.
    pub fn distort_taylor_green(&mut self, t_final: f64, steps: usize) -> Result<()> {
        let dt = t_final / steps as f64;
        self.transform(|p| {
            let mut q = p;
            for _ in 0..steps {
                q += taylor_green_velocity(q) * dt;
            }
            q
        })
    }

    /// Variant of [`Mesh::distort_taylor_green`] that first maps the bounding
    /// box onto the vortex cell `[0, pi]^2`, so the outer boundary is fixed.
    pub fn distort_taylor_green_cell(&mut self, t_final: f64, steps: usize) -> Result<()> {
        let (lo, hi) = self.bounding_box();
        let ext = hi - lo;
        let dt = t_final / steps as f64;
        self.transform(|p| {
            let mut q = Vec2::new((p.x - lo.x) / ext.x * PI, (p.y - lo.y) / ext.y * PI);
            for _ in 0..steps {
                q += taylor_green_velocity(q) * dt;
            }
            Vec2::new(lo.x + q.x / PI * ext.x, lo.y + q.y / PI * ext.y)
        })
    }

    /// Structured mesh of order `order` whose element edges lie on the given
    /// coordinate lines. Boundary tags: 1 bottom, 2 right, 3 top, 4 left.
    pub fn from_lines(xs: &[f64], ys: &[f64], order: usize) -> Result<Self> {
        if xs.len() < 2 || ys.len() < 2 {
            return Err(Error::InvalidMesh("need at least two lines per direction".into()));
        }
        if order == 0 {
            return Err(Error::InvalidMesh("geometric order must be at least 1".into()));
        }
        let g = Lagrange1d::closed(order + 1)?.nodes().to_vec();
        let expand = |ls: &[f64]| -> Vec<f64> {
            let mut out = vec![ls[0]];
            for w in ls.windows(2) {
                for &t in &g[1..] {
                    out.push(w[0] + (w[1] - w[0]) * t);
                }
            }
            out
        };
        let gx = expand(xs);
        let gy = expand(ys);
        let nx = xs.len() - 1;
        let ny = ys.len() - 1;
        let ngx = gx.len();
        let mut nodes = Vec::with_capacity(ngx * gy.len());
        for &y in &gy {
            for &x in &gx {
                nodes.push(Vec2::new(x, y));
            }
        }
        let mut elements = Vec::with_capacity(nx * ny);
        for ey in 0..ny {
            for ex in 0..nx {
                let mut el = Vec::with_capacity((order + 1) * (order + 1));
                for j in 0..=order {
                    for i in 0..=order {
                        el.push((ex * order + i) + ngx * (ey * order + j));
                    }
                }
                elements.push(el);
            }
        }
        let mut tags = HashMap::new();
        let id = |ix: usize, iy: usize| ix + ngx * iy;
        let last_x = nx * order;
        let last_y = ny * order;
        for ex in 0..nx {
            let (a, b) = (id(ex * order, 0), id((ex + 1) * order, 0));
            tags.insert((a.min(b), a.max(b)), 1);
            let (a, b) = (id(ex * order, last_y), id((ex + 1) * order, last_y));
            tags.insert((a.min(b), a.max(b)), 3);
        }
        for ey in 0..ny {
            let (a, b) = (id(last_x, ey * order), id(last_x, (ey + 1) * order));
            tags.insert((a.min(b), a.max(b)), 2);
            let (a, b) = (id(0, ey * order), id(0, (ey + 1) * order));
            tags.insert((a.min(b), a.max(b)), 4);
        }
        let attributes = vec![0; elements.len()];
        Mesh::new(order, nodes, elements, attributes, &tags)
    }

    /// Uniform `nx` by `ny` mesh of a rectangle.
    pub fn cartesian(nx: usize, ny: usize, x: [f64; 2], y: [f64; 2], order: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidMesh("need at least one element per direction".into()));
        }
        let xs: Vec<f64> = (0..=nx).map(|i| x[0] + (x[1] - x[0]) * i as f64 / nx as f64).collect();
        let ys: Vec<f64> = (0..=ny).map(|i| y[0] + (y[1] - y[0]) * i as f64 / ny as f64).collect();
        Self::from_lines(&xs, &ys, order)
    }

    pub fn unit_square(n: usize, order: usize) -> Result<Self> {
        Self::cartesian(n, n, [0.0, 1.0], [0.0, 1.0], order)
    }

    /// Unit square with element edges on `n` Chebyshev-Lobatto points per
    /// direction, giving `(n - 1)^2` elements.
    pub fn chebyshev(n: usize, order: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidMesh("need at least three Chebyshev points".into()));
        }
        let pts = chebyshev_points(n);
        Self::from_lines(&pts, &pts, order)
    }

    /// Sets the material attribute of each element from its center.
    pub fn set_attributes(&mut self, f: impl Fn(Vec2) -> usize) {
        let attrs: Vec<usize> = (0..self.num_elements()).map(|e| f(self.element_center(e))).collect();
        self.attributes = attrs;
    }

    /// Serializes the mesh in the crate's plain text format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "smm-mesh 1");
        let _ = writeln!(s, "order {}", self.order);
        let _ = writeln!(s, "nodes {}", self.nodes.len());
        for p in &self.nodes {
            let _ = writeln!(s, "{:.17e} {:.17e}", p.x, p.y);
        }
        let _ = writeln!(s, "elements {}", self.elements.len());
        for (e, el) in self.elements.iter().enumerate() {
            let _ = write!(s, "{}", self.attributes[e]);
            for k in el {
                let _ = write!(s, " {k}");
            }
            let _ = writeln!(s);
        }
        let bfaces: Vec<&Face> = self.faces.iter().filter(|f| f.is_boundary()).collect();
        let _ = writeln!(s, "boundary {}", bfaces.len());
        for f in bfaces {
            let (e, lf) = f.first;
            let [c0, c1] = face_corners(lf);
            let _ = writeln!(s, "{} {} {}", self.corner(e, c0), self.corner(e, c1), f.tag);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut next = |what: &str| -> Result<(usize, &str)> {
            lines.next().ok_or_else(|| Error::Parse {
                line: 0,
                message: format!("unexpected end of input, expected {what}"),
            })
        };
        let perr = |line: usize, message: String| Error::Parse { line, message };
        let (ln, header) = next("header")?;
        if header != "smm-mesh 1" {
            return Err(perr(ln, format!("bad header '{header}'")));
        }
        let keyed = |ln: usize, l: &str, key: &str| -> Result<usize> {
            let mut it = l.split_whitespace();
            if it.next() != Some(key) {
                return Err(perr(ln, format!("expected '{key}'")));
            }
            it.next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| perr(ln, format!("bad '{key}' count")))
        };
        let (ln, l) = next("order")?;
        let order = keyed(ln, l, "order")?;
        let (ln, l) = next("nodes")?;
        let nn = keyed(ln, l, "nodes")?;
        let mut nodes = Vec::with_capacity(nn);
        for _ in 0..nn {
            let (ln, l) = next("node")?;
            let v: Vec<f64> = l
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| perr(ln, e.to_string()))?;
            if v.len() != 2 {
                return Err(perr(ln, "node needs two coordinates".into()));
            }
            nodes.push(Vec2::new(v[0], v[1]));
        }
        let (ln, l) = next("elements")?;
        let ne = keyed(ln, l, "elements")?;
        let mut elements = Vec::with_capacity(ne);
        let mut attributes = Vec::with_capacity(ne);
        for _ in 0..ne {
            let (ln, l) = next("element")?;
            let v: Vec<usize> = l
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| perr(ln, e.to_string()))?;
            if v.is_empty() {
                return Err(perr(ln, "empty element line".into()));
            }
            attributes.push(v[0]);
            elements.push(v[1..].to_vec());
        }
        let (ln, l) = next("boundary")?;
        let nb = keyed(ln, l, "boundary")?;
        let mut tags = HashMap::new();
        for _ in 0..nb {
            let (ln, l) = next("boundary face")?;
            let v: Vec<usize> = l
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| perr(ln, e.to_string()))?;
            if v.len() != 3 {
                return Err(perr(ln, "boundary face needs two nodes and a tag".into()));
            }
            tags.insert((v[0].min(v[1]), v[0].max(v[1])), v[2]);
        }
        Mesh::new(order, nodes, elements, attributes, &tags)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

pub fn taylor_green_velocity(q: Vec2) -> Vec2 {
    Vec2::new(q.x.sin() * q.y.cos(), -q.x.cos() * q.y.sin())
}

/// Chebyshev-Lobatto points on `[0, 1]`.
pub fn chebyshev_points(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| 0.5 * (1.0 - (PI * k as f64 / (n - 1) as f64).cos()))
        .map(|x| if x.abs() < 1e-15 { 0.0 } else { x })
        .collect()
}
