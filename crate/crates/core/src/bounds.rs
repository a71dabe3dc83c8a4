//! Energies and closed-form performance bounds.
//!
//! Averaging (static targets), with `k = k_e / k_s`:
//!
//! ```text
//! eps_p = 1 - (1 - eps)(1 - sqrt(k W))^2          if k <= 1/W,          else 1
//! eps_R = 1 - (1 - eps)(sqrt(beta) - sqrt(k W))^2 if k <= beta/W, beta>0, else 1
//! beta  = 1 - sqrt(2 (phi(E*^T R_h) + c)),  h the target farthest from E*
//! ```
//!
//! Tracking (moving targets), with `mu(gamma) = sqrt(2) / (sqrt(2) - gamma)`:
//!
//! ```text
//! eps'_p = 1 + 1/(k_e - 1)     + w_p^2 / (rho'_p (k_e - 1))
//! eps'_R = 1 + mu^2/(k_e - mu^2) + w_R^2 / (rho'_R (k_e - mu^2))
//! ```

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::liegroup::{matrix_mean, phi, proj_so3, vee, Pose, Rotation, Twist};
use crate::sim::world_step;

/// Default Lemma-1 slack `c`.
pub const DEFAULT_C: f64 = 0.01;
/// Default Theorem-1 slack `epsilon`.
pub const DEFAULT_EPSILON: f64 = 1e-3;

/// `U_p = 1/2 sum ||p* - p_bar_i||^2`.
pub fn energy_up(p_bars: &[Vector3<f64>], p_star: &Vector3<f64>) -> f64 {
    0.5 * p_bars.iter().map(|p| (p_star - p).norm_squared()).sum::<f64>()
}

/// `U_R = sum phi(E*^T R_bar_i)`.
pub fn energy_ur(r_bars: &[Rotation], r_star: &Rotation) -> f64 {
    let rt = r_star.transpose();
    r_bars.iter().map(|r| phi(&(&rt * r))).sum()
}

/// `(rho_p, rho_R)`: the energies of the true target poses. All poses in
/// one frame.
pub fn rho_values(targets: &[Pose], g_star: &Pose) -> (f64, f64) {
    let ps: Vec<_> = targets.iter().map(|g| g.pos).collect();
    let rs: Vec<_> = targets.iter().map(|g| g.rot).collect();
    (energy_up(&ps, &g_star.pos), energy_ur(&rs, &g_star.rot))
}

/// Membership in `Omega(eps)`: `U <= eps * rho`.
pub fn in_omega(energy: f64, eps: f64, rho: f64) -> bool {
    energy <= eps * rho
}

/// `phi_m = max_{i,j} phi(R_i^T R_j)`.
pub fn phi_max(r_targets: &[Rotation]) -> Result<f64> {
    if r_targets.is_empty() {
        return Err(Error::Domain("phi_max of an empty list".into()));
    }
    let mut best = 0.0f64;
    for (i, a) in r_targets.iter().enumerate() {
        for b in &r_targets[i + 1..] {
            best = best.max(phi(&(a.transpose() * *b)));
        }
    }
    Ok(best)
}

/// `beta = 1 - sqrt(2 (phi(E*^T R_h) + c))`. May be non-positive.
pub fn beta_value(r_targets: &[Rotation], r_star: &Rotation, c: f64) -> Result<f64> {
    if !(c >= 0.0) {
        return Err(Error::Domain(format!("c must be nonnegative, got {c}")));
    }
    if r_targets.is_empty() {
        return Err(Error::Domain("beta of an empty target list".into()));
    }
    let rt = r_star.transpose();
    let phi_h = r_targets.iter().map(|r| phi(&(&rt * r))).fold(0.0, f64::max);
    Ok(1.0 - (2.0 * (phi_h + c)).sqrt())
}

/// Averaging levels `(eps_p, eps_R)`.
pub fn theorem1_bounds(k_e: f64, k_s: f64, w_const: u64, beta: f64, epsilon: f64) -> Result<(f64, f64)> {
    if !(k_e > 0.0 && k_s > 0.0) {
        return Err(Error::Domain(format!(
            "gains must be positive (k_e = {k_e}, k_s = {k_s})"
        )));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if !beta.is_finite() {
        return Err(Error::Domain(format!("beta must be finite, got {beta}")));
    }
    let k = k_e / k_s;
    let kw = k * w_const as f64;
    let sqrt_kw = kw.sqrt();
    let eps_p = if kw <= 1.0 {
        1.0 - (1.0 - epsilon) * (1.0 - sqrt_kw).powi(2)
    } else {
        1.0
    };
    let eps_r = if beta > 0.0 && kw <= beta {
        1.0 - (1.0 - epsilon) * (beta.sqrt() - sqrt_kw).powi(2)
    } else {
        1.0
    };
    Ok((eps_p, eps_r))
}

/// `mu(gamma) = sqrt(2) / (sqrt(2) - gamma)` for `0 <= gamma < sqrt(2)`.
pub fn mu_value(gamma: f64) -> Result<f64> {
    let s2 = std::f64::consts::SQRT_2;
    if !(gamma >= 0.0 && gamma < s2) {
        return Err(Error::Domain(format!("gamma must lie in [0, sqrt 2), got {gamma}")));
    }
    Ok(s2 / (s2 - gamma))
}

/// Tracking levels `(eps'_p, eps'_R)`.
pub fn theorem2_bounds(
    k_e: f64,
    mu: f64,
    w_bar_p: f64,
    w_bar_r: f64,
    rho_p_sup: f64,
    rho_r_sup: f64,
) -> Result<(f64, f64)> {
    let mu2 = mu * mu;
    let threshold = mu2.max(1.0);
    if !(k_e > threshold) {
        return Err(Error::TrackingThreshold { k_e, threshold });
    }
    if !(rho_p_sup > 0.0 && rho_r_sup > 0.0) {
        return Err(Error::Domain(format!(
            "rho sups must be positive (rho'_p = {rho_p_sup}, rho'_R = {rho_r_sup})"
        )));
    }
    let eps_p = 1.0 + 1.0 / (k_e - 1.0) + w_bar_p * w_bar_p / (rho_p_sup * (k_e - 1.0));
    let eps_r = 1.0 + mu2 / (k_e - mu2) + w_bar_r * w_bar_r / (rho_r_sup * (k_e - mu2));
    Ok((eps_p, eps_r))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AveragingReport {
    pub rho_p: f64,
    pub rho_r: f64,
    pub beta: f64,
    pub phi_m: f64,
    pub k: f64,
    pub w_const: u64,
    pub epsilon: f64,
    pub c: f64,
    pub eps_p: f64,
    pub eps_r: f64,
}

impl AveragingReport {
    /// Bounds for world-frame target poses.
    pub fn compute(targets: &[Pose], k_e: f64, k_s: f64, w_const: u64, epsilon: f64, c: f64) -> Result<Self> {
        let g_star = crate::liegroup::pose_average(targets)?;
        let rots: Vec<_> = targets.iter().map(|g| g.rot).collect();
        let (rho_p, rho_r) = rho_values(targets, &g_star);
        let beta = beta_value(&rots, &g_star.rot, c)?;
        let (eps_p, eps_r) = theorem1_bounds(k_e, k_s, w_const, beta, epsilon)?;
        Ok(AveragingReport {
            rho_p,
            rho_r,
            beta,
            phi_m: phi_max(&rots)?,
            k: k_e / k_s,
            w_const,
            epsilon,
            c,
            eps_p,
            eps_r,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrackingReport {
    pub rho_p_sup: f64,
    pub rho_r_sup: f64,
    pub w_bar_p: f64,
    pub w_bar_r: f64,
    pub gamma: f64,
    pub mu: f64,
    pub eps_p_track: f64,
    pub eps_r_track: f64,
}

impl TrackingReport {
    pub fn compute(k_e: f64, gamma: f64, w_bar_p: f64, w_bar_r: f64, rho_p_sup: f64, rho_r_sup: f64) -> Result<Self> {
        let mu = mu_value(gamma)?;
        let (eps_p_track, eps_r_track) = theorem2_bounds(k_e, mu, w_bar_p, w_bar_r, rho_p_sup, rho_r_sup)?;
        Ok(TrackingReport {
            rho_p_sup,
            rho_r_sup,
            w_bar_p,
            w_bar_r,
            gamma,
            mu,
            eps_p_track,
            eps_r_track,
        })
    }
}

/// Instantaneous motion of the average pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AverageMotion {
    /// `E* v^{b,*}`.
    pub p_star_dot: Vector3<f64>,
    /// `v^{b,*} = E*^T (1/n) sum R_i v_i`.
    pub v_star: Vector3<f64>,
    pub e_star: Rotation,
    pub e_star_next: Rotation,
    /// Finite-difference estimate of `omega^{b,*}`.
    pub omega_star: Vector3<f64>,
    /// `||E* - S||_F` at the current instant.
    pub gamma: f64,
}

/// Motion of the average over one step of length `dt`.
pub fn average_motion_step(targets: &[Pose], twists: &[Twist], dt: f64) -> Result<AverageMotion> {
    if targets.len() != twists.len() || targets.is_empty() {
        return Err(Error::Domain(format!(
            "{} targets but {} twists",
            targets.len(),
            twists.len()
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    let n = targets.len() as f64;
    let rots: Vec<_> = targets.iter().map(|g| g.rot).collect();
    let s = matrix_mean(&rots)?;
    let e_star = proj_so3(&s)?;
    let mean_v = targets
        .iter()
        .zip(twists)
        .fold(Vector3::zeros(), |acc, (g, t)| acc + g.rot.matrix() * t.v)
        / n;
    let v_star = e_star.matrix().transpose() * mean_v;

    let next: Vec<_> = targets
        .iter()
        .zip(twists)
        .map(|(g, t)| world_step(g, t, dt).rot)
        .collect();
    let e_star_next = proj_so3(&matrix_mean(&next)?)?;
    let diff: Matrix3<f64> = e_star.matrix().transpose() * (e_star_next.matrix() - e_star.matrix()) / dt;
    let omega_star = vee(&((diff - diff.transpose()) * 0.5));

    Ok(AverageMotion {
        p_star_dot: e_star.matrix() * v_star,
        v_star,
        e_star,
        e_star_next,
        omega_star,
        gamma: (e_star.matrix() - s).norm(),
    })
}
