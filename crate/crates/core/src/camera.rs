//! Pinhole measurement model.
//!
//! The image Jacobian is the central-difference Jacobian of the measurement
//! map with respect to error-vector coordinates: column `k` perturbs the
//! estimate by `lift(±eps e_k)`, where `lift(dp, dr) = (dp, exp(dr))`.

use nalgebra::{DMatrix, DVector, Vector3};

use crate::error::{Error, Result};
use crate::liegroup::{rot_exp, ErrorVector, Pose};

/// Features closer than this to the camera plane are rejected.
pub const Z_MIN: f64 = 1e-6;
/// Finite-difference step of the image Jacobian.
pub const JACOBIAN_STEP: f64 = 1e-6;
/// Largest accepted condition number of the image Jacobian.
pub const MAX_CONDITION: f64 = 1e8;

/// Feature points in the object frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureModel {
    points: Vec<Vector3<f64>>,
}

impl FeatureModel {
    pub fn new(points: Vec<Vector3<f64>>) -> Result<Self> {
        if points.len() < 4 {
            return Err(Error::InvalidFeatureModel(format!(
                "need at least 4 feature points, got {}",
                points.len()
            )));
        }
        for (i, a) in points.iter().enumerate() {
            if !a.iter().all(|x| x.is_finite()) {
                return Err(Error::InvalidFeatureModel(format!("point {i} is not finite")));
            }
            for (j, b) in points.iter().enumerate().skip(i + 1) {
                if a == b {
                    return Err(Error::InvalidFeatureModel(format!("points {i} and {j} coincide")));
                }
            }
        }
        Ok(FeatureModel { points })
    }

    /// Square of side `side` centred in the object x-y plane.
    pub fn square(side: f64) -> Self {
        let h = 0.5 * side;
        FeatureModel {
            points: vec![
                Vector3::new(-h, -h, 0.0),
                Vector3::new(h, -h, 0.0),
                Vector3::new(h, h, 0.0),
                Vector3::new(-h, h, 0.0),
            ],
        }
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl Default for FeatureModel {
    /// 0.25 m square.
    fn default() -> Self {
        FeatureModel::square(0.25)
    }
}

/// Stacked image-plane coordinates `[f_1; ...; f_m]`, length `2m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement(pub DVector<f64>);

impl Measurement {
    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    lambda: f64,
}

impl CameraIntrinsics {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("focal length must be positive, got {lambda}")));
        }
        Ok(CameraIntrinsics { lambda })
    }

    pub fn focal_length(&self) -> f64 {
        self.lambda
    }
}

/// `f_l = (lambda / z_l) [x_l, y_l]` with `p_l = g_io * p_o_l`.
pub fn project(g_io: &Pose, model: &FeatureModel, cam: &CameraIntrinsics) -> Result<Measurement> {
    let mut f = DVector::zeros(2 * model.len());
    for (l, p) in model.points.iter().enumerate() {
        let q = g_io.transform_point(p);
        if q.z.abs() <= Z_MIN {
            return Err(Error::FeatureAtCameraPlane { index: l, depth: q.z });
        }
        let s = cam.lambda / q.z;
        f[2 * l] = s * q.x;
        f[2 * l + 1] = s * q.y;
    }
    Ok(Measurement(f))
}

fn lift(delta: &[f64; 6]) -> Pose {
    Pose::new(
        rot_exp(&Vector3::new(delta[3], delta[4], delta[5])),
        Vector3::new(delta[0], delta[1], delta[2]),
    )
}

/// `2m × 6` image Jacobian at the estimate `g_bar`.
pub fn image_jacobian(g_bar: &Pose, model: &FeatureModel, cam: &CameraIntrinsics) -> Result<DMatrix<f64>> {
    let mut j = DMatrix::zeros(2 * model.len(), 6);
    for k in 0..6 {
        let mut d = [0.0; 6];
        d[k] = JACOBIAN_STEP;
        let plus = project(&(g_bar * &lift(&d)), model, cam)?;
        d[k] = -JACOBIAN_STEP;
        let minus = project(&(g_bar * &lift(&d)), model, cam)?;
        j.set_column(k, &((plus.0 - minus.0) / (2.0 * JACOBIAN_STEP)));
    }
    Ok(j)
}

/// Condition number `sigma_max / sigma_min` (infinite when rank deficient).
pub fn condition_number(j: &DMatrix<f64>) -> f64 {
    let sv = j.singular_values();
    let (max, min) = (sv.max(), sv.min());
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// `e = J^+(g_bar) (f - project(g_bar))`.
pub fn reconstruct_error(
    f: &Measurement,
    g_bar: &Pose,
    model: &FeatureModel,
    cam: &CameraIntrinsics,
) -> Result<ErrorVector> {
    if f.len() != 2 * model.len() {
        return Err(Error::Domain(format!(
            "measurement has {} entries, model expects {}",
            f.len(),
            2 * model.len()
        )));
    }
    let f_bar = project(g_bar, model, cam)?;
    let j = image_jacobian(g_bar, model, cam)?;
    let svd = j.svd(true, true);
    let sv = &svd.singular_values;
    let (max, min) = (sv.max(), sv.min());
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::DegenerateFeatures { condition });
    }
    let (u, v_t) = (svd.u.as_ref().unwrap(), svd.v_t.as_ref().unwrap());
    let residual = &f.0 - &f_bar.0;
    let mut coeffs = u.transpose() * residual;
    for (c, s) in coeffs.iter_mut().zip(sv.iter()) {
        *c /= s;
    }
    let e = v_t.transpose() * coeffs;
    Ok(ErrorVector::new(
        Vector3::new(e[0], e[1], e[2]),
        Vector3::new(e[3], e[4], e[5]),
    ))
}
