//! Driver configuration, read from TOML.
//!
//! Every key is optional except `driver`; unknown keys are rejected. The
//! effective configuration, with all defaults filled, is written next to the
//! report and parses back to the same value.
//!
//! ```toml
//! driver = "mms"                  # mms | diffusion-limit | multimaterial | sn-convergence
//! method = "all"                  # all, or a comma list of ip, cg, rt, hrt
//! p = [1, 2, 3]                   # one degree or a list
//! mesh_order = 3
//! refinements = [4, 8, 16, 32]
//! quadrature = { kind = "level-symmetric", order = 4 }
//! tol = 1e-6
//! inner_tol = 1e-8
//! max_iter = 200
//! anderson = 0
//! fixup = false
//! penalty_scale = 1.0
//! rt_solver = "minres"            # minres | bicgstab
//! rt_preconditioner = "diagonal"  # diagonal | triangular
//! schur_solver = "direct"         # direct | cg
//! epsilon = [0.1, 0.01, 0.001, 0.0001]
//! ```

use crate::linalg::{FixedPointOptions, KrylovOptions};
use crate::smm::{CoupledOptions, Method, MomentSolverOptions, RtPreconditioner, RtSolver, SchurSolver};
use crate::transport::AngularQuadrature;
use crate::{Error, Result};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Driver {
    Mms,
    DiffusionLimit,
    Multimaterial,
    SnConvergence,
}

impl Driver {
    pub fn name(&self) -> &'static str {
        match self {
            Driver::Mms => "mms",
            Driver::DiffusionLimit => "diffusion-limit",
            Driver::Multimaterial => "multimaterial",
            Driver::SnConvergence => "sn-convergence",
        }
    }
}

impl FromStr for Driver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mms" => Ok(Driver::Mms),
            "diffusion-limit" => Ok(Driver::DiffusionLimit),
            "multimaterial" => Ok(Driver::Multimaterial),
            "sn-convergence" => Ok(Driver::SnConvergence),
            _ => Err(Error::Config(format!("unknown driver '{s}'"))),
        }
    }
}

impl fmt::Display for Driver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses `all` or a comma-separated list of method names.
pub fn parse_methods(s: &str) -> Result<Vec<Method>> {
    if s.trim() == "all" {
        return Ok(Method::ALL.to_vec());
    }
    let ms = s
        .split(',')
        .map(|t| t.trim().parse())
        .collect::<Result<Vec<Method>>>()?;
    if ms.is_empty() {
        return Err(Error::Config("empty method list".into()));
    }
    Ok(ms)
}

fn ser_methods<S: Serializer>(ms: &[Method], s: S) -> std::result::Result<S::Ok, S::Error> {
    let names: Vec<&str> = ms.iter().map(|m| m.name()).collect();
    s.serialize_str(&names.join(","))
}

fn de_methods<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Method>, D::Error> {
    let s = String::deserialize(d)?;
    parse_methods(&s).map_err(de::Error::custom)
}

fn de_degrees<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<usize>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(usize),
        Many(Vec<usize>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(p) => vec![p],
        OneOrMany::Many(v) => v,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum QuadratureSpec {
    LevelSymmetric { order: usize },
    Product { polar: usize, azimuthal: usize },
}

impl QuadratureSpec {
    pub fn build(&self) -> Result<AngularQuadrature> {
        match *self {
            QuadratureSpec::LevelSymmetric { order } => AngularQuadrature::level_symmetric(order),
            QuadratureSpec::Product { polar, azimuthal } => AngularQuadrature::product(polar, azimuthal),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distortion {
    /// No distortion.
    None,
    /// Vortex applied to the mesh coordinates as they are.
    Literal,
    /// Bounding box mapped onto the vortex cell first.
    Cell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RtSolverName {
    Minres,
    Bicgstab,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RtPreconditionerName {
    Diagonal,
    Triangular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchurSolverName {
    Direct,
    Cg,
}

/// Manufactured-solution settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MmsConfig {
    pub sigma_t: f64,
    pub sigma_s: f64,
    pub distortion: Distortion,
    pub t_final: f64,
    pub steps: usize,
}

impl Default for MmsConfig {
    fn default() -> Self {
        MmsConfig {
            sigma_t: 1.0,
            sigma_s: 0.5,
            distortion: Distortion::Literal,
            t_final: 0.3 * PI,
            steps: 300,
        }
    }
}

/// Z-channel multi-material settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub width: f64,
    pub height: f64,
    pub half_width: f64,
    pub riser: f64,
    pub sigma_thin: f64,
    pub sigma_thick: f64,
    pub absorption: f64,
    pub source: f64,
    pub inflow: f64,
    /// Also run every case with the fixup toggled.
    pub paired_fixup: bool,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        let z = super::problems::ZChannel::default();
        ChannelConfig {
            width: z.width,
            height: z.height,
            half_width: z.half_width,
            riser: z.riser,
            sigma_thin: z.sigma_thin,
            sigma_thick: z.sigma_thick,
            absorption: z.absorption,
            source: z.source,
            inflow: z.inflow,
            paired_fixup: true,
        }
    }
}

impl ChannelConfig {
    pub fn geometry(&self) -> super::problems::ZChannel {
        super::problems::ZChannel {
            width: self.width,
            height: self.height,
            half_width: self.half_width,
            riser: self.riser,
            sigma_thin: self.sigma_thin,
            sigma_thick: self.sigma_thick,
            absorption: self.absorption,
            source: self.source,
            inflow: self.inflow,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub driver: Driver,
    #[serde(
        default = "all_methods",
        rename = "method",
        serialize_with = "ser_methods",
        deserialize_with = "de_methods"
    )]
    pub methods: Vec<Method>,
    #[serde(default = "default_degrees", rename = "p", deserialize_with = "de_degrees")]
    pub degrees: Vec<usize>,
    #[serde(default)]
    pub mesh_order: Option<usize>,
    /// Elements per side (mms, diffusion-limit), cells per channel
    /// half-width (multimaterial) or Chebyshev points (sn-convergence).
    #[serde(default)]
    pub refinements: Option<Vec<usize>>,
    #[serde(default = "default_quadrature")]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub inner_tol: Option<f64>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub anderson: Option<usize>,
    #[serde(default)]
    pub fixup: bool,
    #[serde(default = "one")]
    pub penalty_scale: f64,
    #[serde(default = "default_rt_solver")]
    pub rt_solver: RtSolverName,
    #[serde(default = "default_rt_preconditioner")]
    pub rt_preconditioner: RtPreconditionerName,
    #[serde(default = "default_schur_solver")]
    pub schur_solver: SchurSolverName,
    #[serde(default)]
    pub epsilon: Option<Vec<f64>>,
    #[serde(default)]
    pub mms: MmsConfig,
    #[serde(default)]
    pub channel: ChannelConfig,
}

fn all_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_degrees() -> Vec<usize> {
    vec![2]
}

fn default_quadrature() -> QuadratureSpec {
    QuadratureSpec::LevelSymmetric { order: 4 }
}

fn default_max_iter() -> usize {
    200
}

fn one() -> f64 {
    1.0
}

fn default_rt_solver() -> RtSolverName {
    RtSolverName::Minres
}

fn default_rt_preconditioner() -> RtPreconditionerName {
    RtPreconditionerName::Diagonal
}

fn default_schur_solver() -> SchurSolverName {
    SchurSolverName::Direct
}

impl Config {
    /// Configuration with every default for `driver`.
    pub fn new(driver: Driver) -> Self {
        let mut c: Config = toml::from_str(&format!("driver = \"{}\"", driver.name())).expect("defaults");
        c.fill_defaults();
        c
    }

    /// Parses TOML text, fills driver-dependent defaults and validates.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c: Config = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
                .unwrap_or(0);
            Error::Parse {
                line,
                message: e.message().to_string(),
            }
        })?;
        c.fill_defaults();
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Driver-dependent defaults for keys left unset.
    pub fn fill_defaults(&mut self) {
        let d = self.driver;
        self.mesh_order.get_or_insert(match d {
            Driver::Mms => 3,
            _ => 1,
        });
        self.refinements.get_or_insert_with(|| match d {
            Driver::Mms => vec![4, 8, 16, 32],
            Driver::DiffusionLimit => vec![8, 16],
            Driver::Multimaterial => vec![1, 2],
            Driver::SnConvergence => vec![21, 31, 41, 51],
        });
        self.tol.get_or_insert(match d {
            Driver::SnConvergence => 1e-10,
            _ => 1e-6,
        });
        self.inner_tol.get_or_insert(match d {
            Driver::Multimaterial => 1e-8,
            _ => 1e-12,
        });
        self.anderson.get_or_insert(match d {
            Driver::Multimaterial | Driver::SnConvergence => 2,
            _ => 0,
        });
        self.epsilon.get_or_insert_with(|| match d {
            Driver::SnConvergence => vec![1e-2],
            _ => vec![1e-1, 1e-2, 1e-3, 1e-4],
        });
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.methods.is_empty() {
            return bad("no method selected".into());
        }
        if self.degrees.is_empty() || self.degrees.iter().any(|&p| p == 0) {
            return bad("p must list degrees of at least 1".into());
        }
        if self.mesh_order() == 0 {
            return bad("mesh_order must be at least 1".into());
        }
        if self.refinements().is_empty() {
            return bad("refinements must not be empty".into());
        }
        for (k, v) in [("tol", self.tol()), ("inner_tol", self.inner_tol())] {
            if !(v > 0.0) {
                return bad(format!("{k} must be positive"));
            }
        }
        if !(self.penalty_scale > 0.0) {
            return bad("penalty_scale must be positive".into());
        }
        if self.epsilon().iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
            return bad("epsilon values must lie in (0, 1]".into());
        }
        if self.rt_solver == RtSolverName::Minres && self.rt_preconditioner == RtPreconditionerName::Triangular {
            return bad("minres needs the symmetric block diagonal preconditioner".into());
        }
        if self.driver == Driver::SnConvergence && self.refinements().iter().any(|&n| n < 3) {
            return bad("Chebyshev meshes need at least three points".into());
        }
        self.quadrature.build()?;
        Ok(())
    }

    pub fn mesh_order(&self) -> usize {
        self.mesh_order.unwrap_or(1)
    }

    pub fn refinements(&self) -> &[usize] {
        self.refinements.as_deref().unwrap_or(&[])
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(1e-6)
    }

    pub fn inner_tol(&self) -> f64 {
        self.inner_tol.unwrap_or(1e-12)
    }

    pub fn anderson(&self) -> usize {
        self.anderson.unwrap_or(0)
    }

    pub fn epsilon(&self) -> &[f64] {
        self.epsilon.as_deref().unwrap_or(&[])
    }

    pub fn moment_options(&self) -> MomentSolverOptions {
        MomentSolverOptions {
            krylov: KrylovOptions {
                rel_tol: self.inner_tol(),
                abs_tol: 0.0,
                max_iter: 50_000,
            },
            rt_solver: match self.rt_solver {
                RtSolverName::Minres => RtSolver::Minres,
                RtSolverName::Bicgstab => RtSolver::Bicgstab,
            },
            rt_preconditioner: match self.rt_preconditioner {
                RtPreconditionerName::Diagonal => RtPreconditioner::BlockDiagonal,
                RtPreconditionerName::Triangular => RtPreconditioner::BlockTriangular,
            },
            schur_solver: match self.schur_solver {
                SchurSolverName::Direct => SchurSolver::Direct,
                SchurSolverName::Cg => SchurSolver::Cg,
            },
            schur_tol: 1e-10,
        }
    }

    pub fn coupled_options(&self, method: Method) -> CoupledOptions {
        CoupledOptions {
            method,
            fixed_point: FixedPointOptions {
                depth: self.anderson(),
                tol: self.tol(),
                max_iter: self.max_iter,
            },
            fixup: self.fixup,
            moment: self.moment_options(),
            penalty_scale: self.penalty_scale,
        }
    }

    /// TOML text of the effective configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
