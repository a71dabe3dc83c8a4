//! JSON scenario files.
//!
//! ```json
//! {
//!   "cameras": [{ "position": [0, 0, 0], "rotation": [0, 0, 0], "focal_length": 0.01 }],
//!   "targets": [{ "position": [0.1, 0.5, -2.8], "rotation": [-0.3, -0.3, -0.3],
//!                 "velocity": { "constant": [0.2, 0, 0, 0, 0, 0.8] } }],
//!   "graph": { "edges": [] },
//!   "gains": { "k_e": 1.0, "k_s": 0.0 },
//!   "integration": { "dt": 0.001, "horizon": 20.0 },
//!   "noise": { "std": 0.0 },
//!   "initial_estimates": { "position": [0, 0, -2.5], "rotation": [0, 0, 0] }
//! }
//! ```
//!
//! Rotations are rotation vectors (axis times angle, radians). Twists are
//! `[v; w]` in body coordinates. Node ids in `graph.edges` are 1-based.
//! `initial_estimates` is either one pose used for every camera or a list.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bounds::{DEFAULT_C, DEFAULT_EPSILON};
use crate::camera::{CameraIntrinsics, FeatureModel};
use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::liegroup::{Pose, Twist};
use crate::sim::{CameraSpec, Gains, Scenario, TargetSpec, VelocityProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseJson {
    pub position: [f64; 3],
    #[serde(default)]
    pub rotation: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VelocityJson {
    Zero,
    Constant([f64; 6]),
    Piecewise(Vec<SegmentJson>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentJson {
    pub start: f64,
    pub twist: [f64; 6],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraJson {
    pub position: [f64; 3],
    #[serde(default)]
    pub rotation: [f64; 3],
    pub focal_length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<VelocityJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetJson {
    pub position: [f64; 3],
    #[serde(default)]
    pub rotation: [f64; 3],
    /// Feature points in the target frame; defaults to a 0.25 m square.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<VelocityJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphJson {
    pub edges: Vec<[usize; 2]>,
    /// Add every edge in both directions.
    #[serde(default)]
    pub undirected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsJson {
    pub k_e: f64,
    pub k_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationJson {
    pub dt: f64,
    pub horizon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseJson {
    pub std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsJson {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_c")]
    pub c: f64,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_c() -> f64 {
    DEFAULT_C
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialJson {
    Shared(PoseJson),
    PerCamera(Vec<PoseJson>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioJson {
    pub cameras: Vec<CameraJson>,
    pub targets: Vec<TargetJson>,
    pub graph: GraphJson,
    pub gains: GainsJson,
    pub integration: IntegrationJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseJson>,
    pub initial_estimates: InitialJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsJson>,
}

fn velocity_from(v: Option<VelocityJson>) -> VelocityProfile {
    match v {
        None | Some(VelocityJson::Zero) => VelocityProfile::Zero,
        Some(VelocityJson::Constant(a)) => VelocityProfile::Constant(Twist::from_array(a)),
        Some(VelocityJson::Piecewise(segs)) => VelocityProfile::Piecewise(
            segs.into_iter()
                .map(|s| (s.start, Twist::from_array(s.twist)))
                .collect(),
        ),
    }
}

fn velocity_to(v: &VelocityProfile) -> Option<VelocityJson> {
    let arr = |t: &Twist| {
        let v = t.to_vector();
        [v[0], v[1], v[2], v[3], v[4], v[5]]
    };
    match v {
        VelocityProfile::Zero => None,
        VelocityProfile::Constant(t) => Some(VelocityJson::Constant(arr(t))),
        VelocityProfile::Piecewise(segs) => Some(VelocityJson::Piecewise(
            segs.iter()
                .map(|(s, t)| SegmentJson {
                    start: *s,
                    twist: arr(t),
                })
                .collect(),
        )),
    }
}

fn pose_to(g: &Pose) -> Result<PoseJson> {
    let r = g.rot.log()?;
    Ok(PoseJson {
        position: [g.pos.x, g.pos.y, g.pos.z],
        rotation: [r.x, r.y, r.z],
    })
}

fn check_finite(what: &str, xs: &[f64]) -> Result<()> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Scenario(format!("{what} contains a non-finite value")))
    }
}

impl ScenarioJson {
    pub fn into_scenario(self) -> Result<Scenario> {
        let n = self.cameras.len();
        let cameras = self
            .cameras
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                check_finite(&format!("camera {}", i + 1), &[c.position, c.rotation].concat())?;
                Ok(CameraSpec {
                    pose: Pose::from_parts(c.position, c.rotation),
                    intrinsics: CameraIntrinsics::new(c.focal_length)?,
                    velocity: velocity_from(c.velocity),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let targets = self
            .targets
            .into_iter()
            .enumerate()
            .map(|(i, t)| {
                check_finite(&format!("target {}", i + 1), &[t.position, t.rotation].concat())?;
                let model = match t.features {
                    None => FeatureModel::default(),
                    Some(pts) => FeatureModel::new(pts.into_iter().map(Into::into).collect())?,
                };
                Ok(TargetSpec {
                    pose: Pose::from_parts(t.position, t.rotation),
                    model,
                    velocity: velocity_from(t.velocity),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let edges: Vec<(usize, usize)> = self.graph.edges.iter().map(|e| (e[0], e[1])).collect();
        let graph = if self.graph.undirected {
            Digraph::bidirectional(n, edges)?
        } else {
            Digraph::new(n, edges)?
        };
        let initial_estimates = match self.initial_estimates {
            InitialJson::Shared(p) => vec![Pose::from_parts(p.position, p.rotation); n],
            InitialJson::PerCamera(ps) => ps.iter().map(|p| Pose::from_parts(p.position, p.rotation)).collect(),
        };
        let bounds = self.bounds.unwrap_or(BoundsJson {
            epsilon: DEFAULT_EPSILON,
            c: DEFAULT_C,
        });
        let sc = Scenario {
            cameras,
            targets,
            graph,
            gains: Gains {
                k_e: self.gains.k_e,
                k_s: self.gains.k_s,
            },
            dt: self.integration.dt,
            horizon: self.integration.horizon,
            initial_estimates,
            noise_std: self.noise.map_or(0.0, |n| n.std),
            epsilon: bounds.epsilon,
            c: bounds.c,
        };
        sc.validate()?;
        Ok(sc)
    }

    pub fn from_scenario(sc: &Scenario) -> Result<Self> {
        let default_model = FeatureModel::default();
        Ok(ScenarioJson {
            cameras: sc
                .cameras
                .iter()
                .map(|c| {
                    let p = pose_to(&c.pose)?;
                    Ok(CameraJson {
                        position: p.position,
                        rotation: p.rotation,
                        focal_length: c.intrinsics.focal_length(),
                        velocity: velocity_to(&c.velocity),
                    })
                })
                .collect::<Result<_>>()?,
            targets: sc
                .targets
                .iter()
                .map(|t| {
                    let p = pose_to(&t.pose)?;
                    Ok(TargetJson {
                        position: p.position,
                        rotation: p.rotation,
                        features: (t.model != default_model)
                            .then(|| t.model.points().iter().map(|q| [q.x, q.y, q.z]).collect()),
                        velocity: velocity_to(&t.velocity),
                    })
                })
                .collect::<Result<_>>()?,
            graph: GraphJson {
                edges: sc.graph.edges().map(|(a, b)| [a, b]).collect(),
                undirected: false,
            },
            gains: GainsJson {
                k_e: sc.gains.k_e,
                k_s: sc.gains.k_s,
            },
            integration: IntegrationJson {
                dt: sc.dt,
                horizon: sc.horizon,
            },
            noise: (sc.noise_std > 0.0).then_some(NoiseJson { std: sc.noise_std }),
            initial_estimates: InitialJson::PerCamera(sc.initial_estimates.iter().map(pose_to).collect::<Result<_>>()?),
            bounds: Some(BoundsJson {
                epsilon: sc.epsilon,
                c: sc.c,
            }),
        })
    }
}

pub fn parse_scenario(json: &str) -> Result<Scenario> {
    let raw: ScenarioJson = serde_json::from_str(json).map_err(|e| Error::Scenario(e.to_string()))?;
    raw.into_scenario()
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))?;
    parse_scenario(&text)
}

pub fn scenario_to_json(sc: &Scenario) -> Result<String> {
    serde_json::to_string_pretty(&ScenarioJson::from_scenario(sc)?).map_err(|e| Error::Scenario(e.to_string()))
}
