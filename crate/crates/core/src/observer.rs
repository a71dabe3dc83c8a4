//! Visual motion observer and its networked form.
//!
//! Each camera keeps an estimate `g_bar` of the pose of its target relative
//! to itself and integrates `d/dt g_bar = -hat(V_cam) g_bar + g_bar hat(u)`
//! with a geometric Euler step. The input is
//!
//! `u_i = k_e e_i + k_s sum_{j in N_i} E_R(g_bar_i^-1 g_ij g_bar_j)`,
//!
//! where `e_i` is reconstructed from the image and `g_ij` is the known
//! relative pose of camera `j` seen from camera `i`.

use crate::camera::{reconstruct_error, CameraIntrinsics, FeatureModel, Measurement};
use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::liegroup::{big_e_r, orthonormality_error, proj_so3, se3_exp, ErrorVector, Pose, Twist};

/// Rotation drift that triggers re-orthonormalization.
pub const REORTHONORMALIZE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObserverState {
    pub g_bar: Pose,
    pub gain_e: f64,
    pub gain_s: f64,
}

impl ObserverState {
    pub fn new(g_bar: Pose, gain_e: f64, gain_s: f64) -> Result<Self> {
        if !(gain_e > 0.0) || !(gain_s >= 0.0) {
            return Err(Error::Domain(format!(
                "gains must satisfy k_e > 0, k_s >= 0 (got {gain_e}, {gain_s})"
            )));
        }
        Ok(ObserverState { g_bar, gain_e, gain_s })
    }
}

/// A neighbour's estimate already expressed in the receiver's frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborEstimate {
    pub j: usize,
    pub g_ioj: Pose,
}

impl NeighborEstimate {
    /// `g_ioj = g_ij * g_bar_j`.
    pub fn from_relative(j: usize, g_ij: &Pose, g_bar_j: &Pose) -> Self {
        NeighborEstimate {
            j,
            g_ioj: g_ij * g_bar_j,
        }
    }
}

pub fn vmo_input(e: &ErrorVector, k_e: f64) -> Twist {
    e.as_twist().scale(k_e)
}

pub fn networked_input(e: &ErrorVector, g_bar: &Pose, nbrs: &[NeighborEstimate], k_e: f64, k_s: f64) -> Twist {
    let inv = g_bar.inverse();
    let mutual = nbrs
        .iter()
        .map(|nb| big_e_r(&(inv * nb.g_ioj)))
        .fold(ErrorVector::zero(), |acc, x| acc + x);
    vmo_input(e, k_e) + mutual.as_twist().scale(k_s)
}

/// One geometric Euler step of the observer model.
pub fn observer_step(st: &ObserverState, u: &Twist, v_cam: &Twist, dt: f64) -> ObserverState {
    let mut g = if v_cam.is_zero() {
        st.g_bar * se3_exp(u, dt)
    } else {
        (se3_exp(&-*v_cam, dt) * st.g_bar) * se3_exp(u, dt)
    };
    if orthonormality_error(g.rot.matrix()) > REORTHONORMALIZE_TOL {
        if let Ok(r) = proj_so3(g.rot.matrix()) {
            g.rot = r;
        }
    }
    ObserverState { g_bar: g, ..*st }
}

/// Static camera network: extrinsics, intrinsics, feature models and graph.
#[derive(Debug, Clone)]
pub struct Network {
    cameras: Vec<Pose>,
    intrinsics: Vec<CameraIntrinsics>,
    models: Vec<FeatureModel>,
    graph: Digraph,
    /// Per camera: (0-based neighbour index, g_ij).
    links: Vec<Vec<(usize, Pose)>>,
}

impl Network {
    pub fn new(
        cameras: Vec<Pose>,
        intrinsics: Vec<CameraIntrinsics>,
        models: Vec<FeatureModel>,
        graph: Digraph,
    ) -> Result<Self> {
        let n = cameras.len();
        if intrinsics.len() != n || models.len() != n || graph.node_count() != n {
            return Err(Error::Domain(format!(
                "network sizes disagree: {n} cameras, {} intrinsics, {} models, {} graph nodes",
                intrinsics.len(),
                models.len(),
                graph.node_count()
            )));
        }
        let flags = graph.validate_assumption1();
        if !flags.holds() {
            return Err(Error::GraphAssumption {
                balanced: flags.balanced,
                strongly_connected: flags.strongly_connected,
            });
        }
        let mut links = Vec::with_capacity(n);
        for i in 0..n {
            let inv = cameras[i].inverse();
            let row = graph
                .neighbors(i + 1)?
                .into_iter()
                .map(|j| (j - 1, inv * cameras[j - 1]))
                .collect();
            links.push(row);
        }
        Ok(Network {
            cameras,
            intrinsics,
            models,
            graph,
            links,
        })
    }

    pub fn len(&self) -> usize {
        self.cameras.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cameras.is_empty()
    }

    pub fn cameras(&self) -> &[Pose] {
        &self.cameras
    }

    pub fn intrinsics(&self) -> &[CameraIntrinsics] {
        &self.intrinsics
    }

    pub fn models(&self) -> &[FeatureModel] {
        &self.models
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    /// Neighbour estimates of camera `i` (0-based), read from `states`.
    pub fn neighbor_estimates(&self, i: usize, states: &[ObserverState]) -> Vec<NeighborEstimate> {
        self.links[i]
            .iter()
            .map(|(j, g_ij)| NeighborEstimate::from_relative(j + 1, g_ij, &states[*j].g_bar))
            .collect()
    }

    /// Reconstructs every camera's error vector from its measurement.
    pub fn reconstruct_errors(
        &self,
        states: &[ObserverState],
        measurements: &[Measurement],
    ) -> Result<Vec<ErrorVector>> {
        self.check_len(states.len())?;
        self.check_len(measurements.len())?;
        states
            .iter()
            .zip(measurements)
            .enumerate()
            .map(|(i, (st, f))| reconstruct_error(f, &st.g_bar, &self.models[i], &self.intrinsics[i]))
            .collect()
    }

    /// Synchronous update from already reconstructed errors.
    ///
    /// Every camera reads its neighbours' estimates from `states` (the
    /// previous step), so the result does not depend on evaluation order.
    pub fn round_with_errors(
        &self,
        states: &[ObserverState],
        errors: &[ErrorVector],
        dt: f64,
    ) -> Result<Vec<ObserverState>> {
        self.check_len(states.len())?;
        self.check_len(errors.len())?;
        if !(dt > 0.0) {
            return Err(Error::Domain(format!("dt must be positive, got {dt}")));
        }
        Ok((0..self.len())
            .map(|i| {
                let st = &states[i];
                let nbrs = self.neighbor_estimates(i, states);
                let u = networked_input(&errors[i], &st.g_bar, &nbrs, st.gain_e, st.gain_s);
                observer_step(st, &u, &Twist::zero(), dt)
            })
            .collect())
    }

    /// One synchronous round of the networked observer.
    pub fn network_round(
        &self,
        states: &[ObserverState],
        measurements: &[Measurement],
        dt: f64,
    ) -> Result<Vec<ObserverState>> {
        let errors = self.reconstruct_errors(states, measurements)?;
        self.round_with_errors(states, &errors, dt)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::Domain(format!("expected {} entries, got {len}", self.len())));
        }
        Ok(())
    }
}
