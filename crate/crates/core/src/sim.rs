//! Scenario model and the simulation loop.
//!
//! Per step: every camera synthesizes its measurement from the true relative
//! pose (plus optional Gaussian image noise), the network advances one
//! synchronous observer round, the targets move, and a [`MetricsRecord`] is
//! taken at the new time.

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::bounds::{self, AveragingReport, TrackingReport};
use crate::camera::{project, CameraIntrinsics, FeatureModel, Measurement};
use crate::error::{Error, Result};
use crate::graph::{Assumption1, Digraph};
use crate::liegroup::{big_e_r, lambda_min_sym, matrix_mean, pose_average, proj_so3, se3_exp, Pose, Rotation, Twist};
use crate::observer::{networked_input, observer_step, Network, ObserverState};

/// `g * exp(dt * hat(vel))`.
pub fn world_step(g: &Pose, vel: &Twist, dt: f64) -> Pose {
    g * &se3_exp(vel, dt)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum VelocityProfile {
    #[default]
    Zero,
    Constant(Twist),
    /// `(start time, twist)` segments; each twist holds until the next start.
    /// Zero before the first segment.
    Piecewise(Vec<(f64, Twist)>),
}

impl VelocityProfile {
    pub fn at(&self, t: f64) -> Twist {
        match self {
            VelocityProfile::Zero => Twist::zero(),
            VelocityProfile::Constant(tw) => *tw,
            VelocityProfile::Piecewise(segs) => segs
                .iter()
                .take_while(|(start, _)| *start <= t)
                .last()
                .map(|(_, tw)| *tw)
                .unwrap_or_default(),
        }
    }

    /// `(sup ||v||, sup ||w||)`.
    pub fn sup_norms(&self) -> (f64, f64) {
        match self {
            VelocityProfile::Zero => (0.0, 0.0),
            VelocityProfile::Constant(tw) => (tw.v.norm(), tw.w.norm()),
            VelocityProfile::Piecewise(segs) => segs.iter().fold((0.0f64, 0.0f64), |(a, b), (_, tw)| {
                (a.max(tw.v.norm()), b.max(tw.w.norm()))
            }),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sup_norms() == (0.0, 0.0)
    }

    fn validate(&self) -> Result<()> {
        if let VelocityProfile::Piecewise(segs) = self {
            if segs.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(Error::Scenario("piecewise segment start times must increase".into()));
            }
        }
        let (v, w) = self.sup_norms();
        if !(v.is_finite() && w.is_finite()) {
            return Err(Error::Scenario("velocity profile must be bounded".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CameraSpec {
    pub pose: Pose,
    pub intrinsics: CameraIntrinsics,
    pub velocity: VelocityProfile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpec {
    pub pose: Pose,
    pub model: FeatureModel,
    pub velocity: VelocityProfile,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains {
    pub k_e: f64,
    pub k_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub cameras: Vec<CameraSpec>,
    pub targets: Vec<TargetSpec>,
    pub graph: Digraph,
    pub gains: Gains,
    pub dt: f64,
    pub horizon: f64,
    /// Initial `g_bar_{io_i}`, in each camera's own frame.
    pub initial_estimates: Vec<Pose>,
    /// Standard deviation of additive image-plane noise (0 disables it).
    pub noise_std: f64,
    /// Slack `epsilon` of the averaging bound.
    pub epsilon: f64,
    /// Slack `c` in `beta`.
    pub c: f64,
}

impl Scenario {
    pub fn len(&self) -> usize {
        self.cameras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cameras.is_empty()
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    pub fn is_static(&self) -> bool {
        self.targets.iter().all(|t| t.velocity.is_zero())
    }

    /// `(w_bar_p, w_bar_R)` over all targets.
    pub fn velocity_bounds(&self) -> (f64, f64) {
        self.targets
            .iter()
            .map(|t| t.velocity.sup_norms())
            .fold((0.0f64, 0.0f64), |(a, b), (v, w)| (a.max(v), b.max(w)))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.cameras.len();
        if n == 0 {
            return Err(Error::Scenario("scenario has no cameras".into()));
        }
        if self.targets.len() != n || self.initial_estimates.len() != n {
            return Err(Error::Scenario(format!(
                "need equal counts: {n} cameras, {} targets, {} initial estimates",
                self.targets.len(),
                self.initial_estimates.len()
            )));
        }
        if self.graph.node_count() != n {
            return Err(Error::Scenario(format!(
                "graph has {} nodes but there are {n} cameras",
                self.graph.node_count()
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) || !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Scenario(format!(
                "dt and horizon must be positive (dt = {}, horizon = {})",
                self.dt, self.horizon
            )));
        }
        if !(self.gains.k_e > 0.0 && self.gains.k_e.is_finite())
            || !(self.gains.k_s >= 0.0 && self.gains.k_s.is_finite())
        {
            return Err(Error::Scenario(format!(
                "need k_e > 0 and k_s >= 0 (k_e = {}, k_s = {})",
                self.gains.k_e, self.gains.k_s
            )));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::Scenario(format!(
                "noise std must be nonnegative, got {}",
                self.noise_std
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) || !(self.c >= 0.0) {
            return Err(Error::Scenario(format!(
                "need epsilon in (0, 1) and c >= 0 (epsilon = {}, c = {})",
                self.epsilon, self.c
            )));
        }
        for t in &self.targets {
            t.velocity.validate()?;
        }
        for cam in &self.cameras {
            cam.velocity.validate()?;
            if n > 1 && !cam.velocity.is_zero() {
                return Err(Error::Scenario(
                    "moving cameras are only supported with a single camera".into(),
                ));
            }
        }
        let flags = self.graph.validate_assumption1();
        if !flags.holds() {
            return Err(Error::GraphAssumption {
                balanced: flags.balanced,
                strongly_connected: flags.strongly_connected,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssumptionFlags {
    pub graph: Assumption1,
    /// Some pair of targets differs in both position and orientation.
    pub distinct_pair: bool,
    /// `min_{i,j} lambda_min(sym(R_j^T R_i))`.
    pub min_eig_targets: f64,
    /// `min_i lambda_min(sym(E*^T R_i))`.
    pub min_eig_average: f64,
    /// `min_i lambda_min(sym(E*^T R_bar_i))`, membership in S.
    pub min_eig_s: f64,
}

impl AssumptionFlags {
    pub fn targets_pairwise_pd(&self) -> bool {
        self.min_eig_targets > 0.0
    }

    pub fn average_pd(&self) -> bool {
        self.min_eig_average > 0.0
    }

    pub fn in_s(&self) -> bool {
        self.min_eig_s > 0.0
    }

    pub fn all_hold(&self) -> bool {
        self.graph.holds() && self.distinct_pair && self.targets_pairwise_pd() && self.average_pd() && self.in_s()
    }
}

/// Assumption checks on world-frame target poses and estimates.
pub fn check_assumptions(graph: &Digraph, targets_w: &[Pose], estimates_w: &[Pose]) -> AssumptionFlags {
    const SAME: f64 = 1e-12;
    let mut distinct_pair = false;
    let mut min_eig_targets = f64::INFINITY;
    for a in targets_w {
        for b in targets_w {
            let rel = b.rot.transpose() * a.rot;
            min_eig_targets = min_eig_targets.min(lambda_min_sym(rel.matrix()));
            let dp = (a.pos - b.pos).abs().max();
            let dr = (a.rot.matrix() - b.rot.matrix()).abs().max();
            distinct_pair |= dp > SAME && dr > SAME;
        }
    }
    let rots: Vec<Rotation> = targets_w.iter().map(|g| g.rot).collect();
    let (min_eig_average, min_eig_s) = match matrix_mean(&rots).and_then(|s| proj_so3(&s)) {
        Ok(e_star) => {
            let et = e_star.transpose();
            let lm = |g: &Pose| lambda_min_sym((et * g.rot).matrix());
            (
                targets_w.iter().map(lm).fold(f64::INFINITY, f64::min),
                estimates_w.iter().map(lm).fold(f64::INFINITY, f64::min),
            )
        }
        Err(_) => (f64::NAN, f64::NAN),
    };
    AssumptionFlags {
        graph: graph.validate_assumption1(),
        distinct_pair,
        min_eig_targets,
        min_eig_average,
        min_eig_s,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub t: f64,
    pub u_p: f64,
    pub u_r: f64,
    pub rho_p: f64,
    pub rho_r: f64,
    /// Bound level for `U_p` (`eps_p rho_p` or `eps'_p rho'_p`); NaN when unavailable.
    pub eps_bound_p: f64,
    pub eps_bound_r: f64,
    pub min_eig_s: f64,
    /// `||E_R(g_bar^-1 g)||` per camera.
    pub err_cam: Vec<f64>,
    /// `||E* - S||_F`.
    pub gamma: f64,
    /// `||omega^{b,*}||^2` from finite differencing the average.
    pub omega_star_sq: f64,
    /// `||w_R||^2 = sum_i ||omega_i||^2`.
    pub w_r_sq: f64,
    pub flags: AssumptionFlags,
}

/// Stepwise simulation state.
#[derive(Debug, Clone)]
pub struct Simulation {
    scenario: Scenario,
    network: Network,
    cameras_w: Vec<Pose>,
    targets_w: Vec<Pose>,
    states: Vec<ObserverState>,
    step: usize,
    rng: ChaCha8Rng,
    noise: Option<Normal<f64>>,
    averaging: Option<AveragingReport>,
    rho_sup: (f64, f64),
    gamma_max: f64,
    /// Side of the camera plane each target starts on (sign of depth).
    facing: Vec<f64>,
}

impl Simulation {
    pub fn new(scenario: &Scenario, seed: u64) -> Result<Self> {
        scenario.validate()?;
        let sc = scenario.clone();
        let network = Network::new(
            sc.cameras.iter().map(|c| c.pose).collect(),
            sc.cameras.iter().map(|c| c.intrinsics).collect(),
            sc.targets.iter().map(|t| t.model.clone()).collect(),
            sc.graph.clone(),
        )?;
        let states = sc
            .initial_estimates
            .iter()
            .map(|g| ObserverState::new(*g, sc.gains.k_e, sc.gains.k_s))
            .collect::<Result<Vec<_>>>()?;
        let noise = (sc.noise_std > 0.0)
            .then(|| Normal::new(0.0, sc.noise_std).map_err(|e| Error::Scenario(e.to_string())))
            .transpose()?;
        let averaging = if sc.is_static() && sc.len() > 1 && sc.gains.k_s > 0.0 {
            let targets: Vec<_> = sc.targets.iter().map(|t| t.pose).collect();
            match sc
                .graph
                .compute_w()
                .and_then(|w| AveragingReport::compute(&targets, sc.gains.k_e, sc.gains.k_s, w.w, sc.epsilon, sc.c))
            {
                Ok(r) => Some(r),
                Err(e) => {
                    log::warn!("averaging bound unavailable: {e}");
                    None
                }
            }
        } else {
            None
        };
        let facing = sc
            .cameras
            .iter()
            .zip(&sc.targets)
            .map(|(c, t)| (c.pose.inverse() * t.pose).pos.z.signum())
            .collect();
        Ok(Simulation {
            facing,
            cameras_w: sc.cameras.iter().map(|c| c.pose).collect(),
            targets_w: sc.targets.iter().map(|t| t.pose).collect(),
            states,
            network,
            step: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            noise,
            averaging,
            rho_sup: (0.0, 0.0),
            gamma_max: 0.0,
            scenario: sc,
        })
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.scenario.dt
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn is_done(&self) -> bool {
        self.step >= self.scenario.steps()
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn states(&self) -> &[ObserverState] {
        &self.states
    }

    pub fn targets_world(&self) -> &[Pose] {
        &self.targets_w
    }

    pub fn averaging_report(&self) -> Option<&AveragingReport> {
        self.averaging.as_ref()
    }

    /// Tracking levels from the running suprema observed so far (moving
    /// targets only; `None` below the gain threshold).
    pub fn tracking_report(&self) -> Option<TrackingReport> {
        if self.scenario.is_static() {
            return None;
        }
        let (w_p, w_r) = self.scenario.velocity_bounds();
        TrackingReport::compute(
            self.scenario.gains.k_e,
            self.gamma_max,
            w_p,
            w_r,
            self.rho_sup.0,
            self.rho_sup.1,
        )
        .ok()
    }

    /// Estimates `g_wi * g_bar_i` in the world frame.
    pub fn estimates_world(&self) -> Vec<Pose> {
        self.cameras_w
            .iter()
            .zip(&self.states)
            .map(|(c, s)| c * &s.g_bar)
            .collect()
    }

    fn twists(&self, t: f64) -> Vec<Twist> {
        self.scenario.targets.iter().map(|s| s.velocity.at(t)).collect()
    }

    fn measurements(&mut self) -> Result<Vec<Measurement>> {
        let mut out = Vec::with_capacity(self.targets_w.len());
        for i in 0..self.targets_w.len() {
            let g_io = self.cameras_w[i].inverse() * self.targets_w[i];
            // a step can jump over the |z| <= Z_MIN band, so also catch sign flips
            for (l, p) in self.scenario.targets[i].model.points().iter().enumerate() {
                let z = g_io.transform_point(p).z;
                if z * self.facing[i] <= 0.0 {
                    return Err(Error::FeatureAtCameraPlane { index: l, depth: z });
                }
            }
            let mut f = project(
                &g_io,
                &self.scenario.targets[i].model,
                &self.scenario.cameras[i].intrinsics,
            )?;
            if let Some(noise) = &self.noise {
                for x in f.0.iter_mut() {
                    *x += noise.sample(&mut self.rng);
                }
            }
            out.push(f);
        }
        Ok(out)
    }

    fn wrap<T>(&self, r: Result<T>) -> Result<T> {
        r.map_err(|e| Error::AtStep {
            step: self.step,
            t: self.time(),
            source: Box::new(e),
        })
    }

    /// Metrics at the current time. Updates the running suprema used by the
    /// tracking bound, so call it once per step.
    pub fn record(&mut self) -> Result<MetricsRecord> {
        let r = self.record_inner();
        self.wrap(r)
    }

    fn record_inner(&mut self) -> Result<MetricsRecord> {
        let t = self.time();
        let est = self.estimates_world();
        let g_star = pose_average(&self.targets_w)?;
        let p_bars: Vec<Vector3<f64>> = est.iter().map(|g| g.pos).collect();
        let r_bars: Vec<Rotation> = est.iter().map(|g| g.rot).collect();
        let u_p = bounds::energy_up(&p_bars, &g_star.pos);
        let u_r = bounds::energy_ur(&r_bars, &g_star.rot);
        let (rho_p, rho_r) = bounds::rho_values(&self.targets_w, &g_star);

        let twists = self.twists(t);
        let motion = bounds::average_motion_step(&self.targets_w, &twists, self.scenario.dt)?;
        self.rho_sup = (self.rho_sup.0.max(rho_p), self.rho_sup.1.max(rho_r));
        self.gamma_max = self.gamma_max.max(motion.gamma);

        let (eps_bound_p, eps_bound_r) = if let Some(avg) = &self.averaging {
            (avg.eps_p * rho_p, avg.eps_r * rho_r)
        } else if !self.scenario.is_static() {
            let (w_p, w_r) = self.scenario.velocity_bounds();
            match TrackingReport::compute(
                self.scenario.gains.k_e,
                self.gamma_max,
                w_p,
                w_r,
                self.rho_sup.0,
                self.rho_sup.1,
            ) {
                Ok(tr) => (tr.eps_p_track * self.rho_sup.0, tr.eps_r_track * self.rho_sup.1),
                Err(_) => (f64::NAN, f64::NAN),
            }
        } else {
            (f64::NAN, f64::NAN)
        };

        let err_cam = self
            .states
            .iter()
            .zip(self.cameras_w.iter().zip(&self.targets_w))
            .map(|(s, (c, g))| big_e_r(&(s.g_bar.inverse() * (c.inverse() * *g))).norm())
            .collect();
        let flags = check_assumptions(&self.scenario.graph, &self.targets_w, &est);
        Ok(MetricsRecord {
            t,
            u_p,
            u_r,
            rho_p,
            rho_r,
            eps_bound_p,
            eps_bound_r,
            min_eig_s: flags.min_eig_s,
            err_cam,
            gamma: motion.gamma,
            omega_star_sq: motion.omega_star.norm_squared(),
            w_r_sq: twists.iter().map(|tw| tw.w.norm_squared()).sum(),
            flags,
        })
    }

    /// Advances observers, targets and (single-camera) camera by one step.
    pub fn advance(&mut self) -> Result<()> {
        let r = self.advance_inner();
        self.wrap(r)
    }

    fn advance_inner(&mut self) -> Result<()> {
        let dt = self.scenario.dt;
        let t = self.time();
        let meas = self.measurements()?;
        let errors = self.network.reconstruct_errors(&self.states, &meas)?;
        let next: Vec<ObserverState> = (0..self.states.len())
            .map(|i| {
                let st = &self.states[i];
                let nbrs = self.network.neighbor_estimates(i, &self.states);
                let u = networked_input(&errors[i], &st.g_bar, &nbrs, st.gain_e, st.gain_s);
                let v_cam = self.scenario.cameras[i].velocity.at(t);
                observer_step(st, &u, &v_cam, dt)
            })
            .collect();
        self.states = next;
        for (g, spec) in self.targets_w.iter_mut().zip(&self.scenario.targets) {
            *g = world_step(g, &spec.velocity.at(t), dt);
        }
        for (g, spec) in self.cameras_w.iter_mut().zip(&self.scenario.cameras) {
            *g = world_step(g, &spec.velocity.at(t), dt);
        }
        self.step += 1;
        Ok(())
    }
}

/// `(sup gamma, sup rho_p, sup rho_R)` over the horizon, from the target
/// motion alone.
pub fn target_motion_sups(sc: &Scenario) -> Result<(f64, f64, f64)> {
    let mut targets: Vec<Pose> = sc.targets.iter().map(|t| t.pose).collect();
    let (mut gamma, mut rho_p, mut rho_r) = (0.0f64, 0.0f64, 0.0f64);
    for step in 0..=sc.steps() {
        let t = step as f64 * sc.dt;
        let twists: Vec<Twist> = sc.targets.iter().map(|s| s.velocity.at(t)).collect();
        let at_step = |e: Error| Error::AtStep {
            step,
            t,
            source: Box::new(e),
        };
        let g_star = pose_average(&targets).map_err(at_step)?;
        let (p, r) = bounds::rho_values(&targets, &g_star);
        let motion = bounds::average_motion_step(&targets, &twists, sc.dt).map_err(at_step)?;
        gamma = gamma.max(motion.gamma);
        rho_p = rho_p.max(p);
        rho_r = rho_r.max(r);
        for (g, tw) in targets.iter_mut().zip(&twists) {
            *g = world_step(g, tw, sc.dt);
        }
    }
    Ok((gamma, rho_p, rho_r))
}

/// Runs the whole horizon; one record per step including `t = 0`.
pub fn run(sc: &Scenario, seed: u64) -> Result<Vec<MetricsRecord>> {
    let mut sim = Simulation::new(sc, seed)?;
    let mut out = Vec::with_capacity(sc.steps() + 1);
    out.push(sim.record()?);
    while !sim.is_done() {
        sim.advance()?;
        out.push(sim.record()?);
    }
    Ok(out)
}

/// The five-camera reference setup: cameras on a cross in one plane, targets
/// about 3 m in front, a bidirectional star around camera 1 (`W = 1`), focal
/// length 0.01 m and a 0.25 m square feature model.
pub mod presets {
    use super::*;

    pub const CAMERA_POSITIONS: [[f64; 3]; 5] = [
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [-1.0, 0.0, 0.0],
    ];
    pub const TARGET_POSITIONS: [[f64; 3]; 5] = [
        [0.12, 0.55, -2.78],
        [0.22, 0.48, -2.85],
        [0.33, 0.33, -2.97],
        [0.42, 0.23, -3.08],
        [0.56, 0.12, -3.15],
    ];
    pub const TARGET_ROTATIONS: [[f64; 3]; 5] = [
        [-0.30, -0.30, -0.30],
        [-0.30, -0.40, -0.40],
        [-0.40, -0.30, -0.30],
        [-0.30, -0.40, -0.30],
        [-0.30, -0.30, -0.40],
    ];
    pub const FOCAL_LENGTH: f64 = 0.01;
    pub const INITIAL_POSITION: [f64; 3] = [0.0, 0.0, -2.5];
    pub const MOVING_TWIST: [f64; 6] = [0.2, 0.0, 0.0, 0.0, 0.0, 0.8];
    /// Small Lemma-1 slack so the reported levels are the small-`c` limit.
    pub const REFERENCE_C: f64 = 1e-4;

    pub fn target_poses() -> Vec<Pose> {
        TARGET_POSITIONS
            .iter()
            .zip(TARGET_ROTATIONS)
            .map(|(p, r)| Pose::from_parts(*p, r))
            .collect()
    }

    fn base(k_e: f64, k_s: f64, velocity: VelocityProfile, horizon: f64) -> Scenario {
        let intrinsics = CameraIntrinsics::new(FOCAL_LENGTH).expect("positive focal length");
        Scenario {
            cameras: CAMERA_POSITIONS
                .iter()
                .map(|p| CameraSpec {
                    pose: Pose::from_parts(*p, [0.0; 3]),
                    intrinsics,
                    velocity: VelocityProfile::Zero,
                })
                .collect(),
            targets: target_poses()
                .into_iter()
                .map(|pose| TargetSpec {
                    pose,
                    model: FeatureModel::default(),
                    velocity: velocity.clone(),
                })
                .collect(),
            graph: Digraph::star(5, 1).expect("valid star"),
            gains: Gains { k_e, k_s },
            dt: 1e-3,
            horizon,
            initial_estimates: vec![Pose::from_parts(INITIAL_POSITION, [0.0; 3]); 5],
            noise_std: 0.0,
            epsilon: bounds::DEFAULT_EPSILON,
            c: REFERENCE_C,
        }
    }

    /// Static targets, 50 s horizon.
    pub fn reference_static(k_e: f64, k_s: f64) -> Scenario {
        base(k_e, k_s, VelocityProfile::Zero, 50.0)
    }

    /// Targets moving with the constant body twist [`MOVING_TWIST`], 30 s horizon.
    pub fn reference_moving(k_e: f64, k_s: f64) -> Scenario {
        base(
            k_e,
            k_s,
            VelocityProfile::Constant(Twist::from_array(MOVING_TWIST)),
            30.0,
        )
    }

    /// One static camera watching the first reference target.
    pub fn single_camera(k_e: f64) -> Scenario {
        let mut sc = reference_static(k_e, 0.0);
        sc.cameras.truncate(1);
        sc.targets.truncate(1);
        sc.initial_estimates.truncate(1);
        sc.graph = Digraph::new(1, []).expect("single node");
        sc.horizon = 20.0;
        sc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn world_step_examples() {
        let g = Pose::from_parts([0.1, 0.2, -3.0], [0.1, -0.2, 0.3]);
        assert_eq!(world_step(&g, &Twist::zero(), 0.5), g);

        let tw = Twist::from_array([0.2, 0.0, 0.0, 0.0, 0.0, 0.8]);
        let one = world_step(&Pose::identity(), &tw, 1.0);
        // screw motion about z: circle of radius v/w
        let (r, th) = (0.2 / 0.8, 0.8f64);
        assert_relative_eq!(
            one.pos,
            Vector3::new(r * th.sin(), r * (1.0 - th.cos()), 0.0),
            epsilon = 1e-12
        );

        let halves = world_step(&world_step(&g, &tw, 0.5), &tw, 0.5);
        assert_relative_eq!(
            halves.to_homogeneous(),
            world_step(&g, &tw, 1.0).to_homogeneous(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn velocity_profiles() {
        let a = Twist::from_array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let b = Twist::from_array([0.0, 2.0, 0.0, 0.0, 0.0, 3.0]);
        let p = VelocityProfile::Piecewise(vec![(1.0, a), (2.0, b)]);
        assert_eq!(p.at(0.5), Twist::zero());
        assert_eq!(p.at(1.0), a);
        assert_eq!(p.at(5.0), b);
        assert_eq!(p.sup_norms(), (2.0, 3.0));
        assert!(VelocityProfile::Piecewise(vec![(1.0, a), (1.0, b)]).validate().is_err());
    }

    #[test]
    fn assumption_flags_examples() {
        let g = Digraph::star(3, 1).unwrap();
        let same = vec![Pose::identity(); 3];
        let f = check_assumptions(&g, &same, &same);
        assert!(f.targets_pairwise_pd() && f.average_pd() && f.in_s());
        assert!(!f.distinct_pair);

        let targets = presets::target_poses();
        let est = vec![Pose::identity(); 5];
        let f = check_assumptions(&Digraph::star(5, 1).unwrap(), &targets, &est);
        assert!(f.all_hold(), "{f:?}");

        let mut flipped = vec![Pose::identity(); 3];
        flipped[2] = Pose::from_parts([1.0, 0.0, 0.0], [0.0, 0.0, std::f64::consts::PI]);
        let f = check_assumptions(&g, &flipped, &flipped);
        assert!(!f.targets_pairwise_pd());
        assert!(!f.average_pd());
    }

    #[test]
    fn perfect_start_stays_perfect() {
        let mut sc = presets::reference_static(1.0, 100.0);
        sc.horizon = 0.2;
        sc.initial_estimates = sc
            .cameras
            .iter()
            .zip(&sc.targets)
            .map(|(c, t)| c.pose.inverse() * t.pose)
            .collect();
        let recs = run(&sc, 0).unwrap();
        assert_eq!(recs.len(), 201);
        // every camera starts on its own target, so U equals rho at t = 0
        assert_relative_eq!(recs[0].u_p, recs[0].rho_p, epsilon = 1e-12);
        assert_relative_eq!(recs[0].u_r, recs[0].rho_r, epsilon = 1e-12);
        assert!(recs[0].err_cam.iter().all(|e| *e < 1e-12));
        // consensus then pulls the estimates towards the average
        let last = recs.last().unwrap();
        assert!(last.u_p < recs[0].u_p && last.u_r < recs[0].u_r);
    }

    #[test]
    fn identical_targets_perfect_start_zero_energy() {
        let mut sc = presets::reference_static(2.0, 5.0);
        let common = presets::target_poses()[2];
        for t in &mut sc.targets {
            t.pose = common;
        }
        sc.initial_estimates = sc.cameras.iter().map(|c| c.pose.inverse() * common).collect();
        sc.horizon = 0.1;
        for r in run(&sc, 0).unwrap() {
            assert!(r.u_p < 1e-20 && r.u_r < 1e-12, "{} {}", r.u_p, r.u_r);
        }
    }

    #[test]
    fn validation_errors() {
        let mut sc = presets::reference_static(1.0, 1.0);
        sc.initial_estimates.pop();
        assert!(matches!(sc.validate(), Err(Error::Scenario(_))));

        let mut sc = presets::reference_static(1.0, 1.0);
        sc.graph = Digraph::new(5, [(1, 2), (2, 3), (3, 4), (4, 5)]).unwrap();
        assert!(matches!(sc.validate(), Err(Error::GraphAssumption { .. })));

        let mut sc = presets::reference_static(1.0, 1.0);
        sc.cameras[1].velocity = VelocityProfile::Constant(Twist::from_array([0.1, 0.0, 0.0, 0.0, 0.0, 0.0]));
        assert!(sc.validate().is_err());

        let mut sc = presets::reference_static(1.0, 1.0);
        sc.dt = 0.0;
        assert!(sc.validate().is_err());
    }

    #[test]
    fn camera_plane_crossing_aborts_with_step() {
        let mut sc = presets::single_camera(1e-3);
        sc.targets[0].pose = Pose::from_parts([0.0, 0.0, -0.05], [0.0; 3]);
        sc.initial_estimates[0] = sc.targets[0].pose;
        sc.targets[0].velocity = VelocityProfile::Constant(Twist::from_array([0.0, 0.0, 3.0, 0.0, 0.0, 0.0]));
        sc.horizon = 1.0;
        let err = run(&sc, 0).unwrap_err();
        match err {
            Error::AtStep { step, source, .. } => {
                assert!(step > 0);
                assert!(matches!(*source, Error::FeatureAtCameraPlane { .. }), "{source:?}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_moving_camera_tracks_static_target() {
        let mut sc = presets::single_camera(5.0);
        sc.cameras[0].velocity = VelocityProfile::Constant(Twist::from_array([0.02, 0.0, 0.0, 0.0, 0.0, 0.01]));
        sc.horizon = 10.0;
        let recs = run(&sc, 0).unwrap();
        let last = recs.last().unwrap();
        assert!(last.err_cam[0] < 0.05 * recs[0].err_cam[0], "{}", last.err_cam[0]);
    }

    #[test]
    fn noise_is_seeded() {
        let mut sc = presets::reference_static(1.0, 10.0);
        sc.horizon = 0.05;
        sc.noise_std = 1e-6;
        let a = run(&sc, 3).unwrap();
        let b = run(&sc, 3).unwrap();
        let c = run(&sc, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.last().unwrap().u_p, c.last().unwrap().u_p);
    }
}
