//! Element and face geometry tabulated at quadrature points.

use super::quadrature::{gauss_legendre, Rule1d, Rule2d};
use crate::mesh::{face_to_ref, Frame, Mesh, REF_NORMALS};
use crate::{Mat2, Result, Vec2};
use std::sync::Arc;

#[derive(Debug, Clone, Copy)]
pub struct VolumePoint {
    pub xi: [f64; 2],
    pub x: Vec2,
    /// Quadrature weight times the Jacobian determinant.
    pub w: f64,
    pub det: f64,
    pub jac: Mat2,
    pub inv_t: Mat2,
    /// `hess[l]` is the derivative of the Jacobian with respect to `xi_l`.
    pub hess: [Mat2; 2],
}

impl VolumePoint {
    pub fn frame(&self) -> Frame {
        Frame {
            x: self.x,
            jac: self.jac,
            det: self.det,
            inv_t: self.inv_t,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FacePoint {
    /// Quadrature index along the face, in the first side's parameter.
    pub q: usize,
    pub s: f64,
    pub xi1: [f64; 2],
    pub xi2: Option<[f64; 2]>,
    pub x: Vec2,
    /// Unit normal pointing out of the first side.
    pub normal: Vec2,
    /// Quadrature weight times the arc-length element.
    pub w: f64,
}

#[derive(Debug, Clone)]
pub struct FaceGeometry {
    pub points: Vec<FacePoint>,
}

/// Quadrature tabulation of a mesh's geometry.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub mesh: Arc<Mesh>,
    pub rule: Rule1d,
    pub rule2d: Rule2d,
    pub volume: Vec<Vec<VolumePoint>>,
    pub faces: Vec<FaceGeometry>,
}

impl Geometry {
    /// Tabulates with `n` Gauss points per direction.
    pub fn new(mesh: Arc<Mesh>, n: usize) -> Result<Self> {
        let rule = gauss_legendre(n)?;
        let rule2d = Rule2d::tensor(&rule);
        let volume = (0..mesh.num_elements())
            .map(|e| {
                rule2d
                    .points
                    .iter()
                    .zip(&rule2d.weights)
                    .map(|(&xi, &w)| {
                        let fr = mesh.frame(e, xi);
                        VolumePoint {
                            xi,
                            x: fr.x,
                            w: w * fr.det,
                            det: fr.det,
                            jac: fr.jac,
                            inv_t: fr.inv_t,
                            hess: mesh.map_hessian(e, xi),
                        }
                    })
                    .collect()
            })
            .collect();
        let faces = mesh
            .faces()
            .iter()
            .map(|face| {
                let (e1, lf1) = face.first;
                let points = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .enumerate()
                    .map(|(q, (&s, &w))| {
                        let xi1 = face_to_ref(lf1, s);
                        let fr = mesh.frame(e1, xi1);
                        let nh = Vec2::new(REF_NORMALS[lf1][0], REF_NORMALS[lf1][1]);
                        let nds = fr.inv_t * nh * fr.det;
                        let dl = nds.norm();
                        let xi2 = face.second.map(|(_, lf2)| face_to_ref(lf2, face.second_param(s)));
                        FacePoint {
                            q,
                            s,
                            xi1,
                            xi2,
                            x: fr.x,
                            normal: nds / dl,
                            w: w * dl,
                        }
                    })
                    .collect();
                FaceGeometry { points }
            })
            .collect();
        Ok(Geometry {
            mesh,
            rule,
            rule2d,
            volume,
            faces,
        })
    }

    /// Default rule for degree `p` fields on this mesh: `p + m + 1` points.
    pub fn for_degree(mesh: Arc<Mesh>, p: usize) -> Result<Self> {
        let n = p + mesh.order() + 1;
        Self::new(mesh, n)
    }

    pub fn npts(&self) -> usize {
        self.rule.len()
    }
}
