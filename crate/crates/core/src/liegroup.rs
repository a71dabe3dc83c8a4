//! SO(3) / SE(3) algebra used by the observer and the bounds.
//!
//! Rotations are stored as plain 3×3 matrices (no quaternions); the orientation
//! average is the Euclidean mean, i.e. the orthogonal projection of the
//! arithmetic matrix mean back onto SO(3).

use std::ops::{Add, Mul, Neg};

use nalgebra::{Matrix3, Matrix4, SymmetricEigen, Vector3, Vector6};

use crate::error::{Error, Result};

/// Below this rotation angle the closed forms switch to Taylor series.
const SMALL_ANGLE: f64 = 1e-6;
/// `rot_log` refuses angles within this distance of pi.
const CUT_LOCUS_MARGIN: f64 = 1e-6;
/// Relative singular-value floor for `proj_so3`.
const RANK_TOL: f64 = 1e-12;

/// Element of SO(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Matrix3<f64>);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Matrix3::identity())
    }

    /// Wraps `m` after checking orthogonality and unit determinant to `tol`.
    pub fn from_matrix(m: Matrix3<f64>, tol: f64) -> Result<Self> {
        let drift = orthonormality_error(&m);
        let det = m.determinant();
        if drift > tol || (det - 1.0).abs() > tol {
            return Err(Error::Domain(format!(
                "matrix is not a rotation (orthonormality drift {drift:e}, det {det})"
            )));
        }
        Ok(Rotation(m))
    }

    /// Wraps `m` without checking. Callers must guarantee `m` is in SO(3).
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Rotation(m)
    }

    /// `exp(hat(xi_theta))`.
    pub fn from_rotation_vector(xi_theta: &Vector3<f64>) -> Self {
        rot_exp(xi_theta)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Rotation(self.0.transpose())
    }

    pub fn inverse(&self) -> Self {
        self.transpose()
    }

    /// Rotation angle in `[0, pi]`.
    pub fn angle(&self) -> f64 {
        let s = e_r(self).norm();
        let c = 0.5 * (self.0.trace() - 1.0);
        s.atan2(c)
    }

    pub fn log(&self) -> Result<Vector3<f64>> {
        rot_log(self)
    }
}

impl Mul for Rotation {
    type Output = Rotation;
    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

impl Mul<&Rotation> for &Rotation {
    type Output = Rotation;
    fn mul(self, rhs: &Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

impl Mul<Vector3<f64>> for &Rotation {
    type Output = Vector3<f64>;
    fn mul(self, rhs: Vector3<f64>) -> Vector3<f64> {
        self.0 * rhs
    }
}

/// Element of SE(3), `[rot pos; 0 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rot: Rotation,
    pub pos: Vector3<f64>,
}

impl Pose {
    pub fn new(rot: Rotation, pos: Vector3<f64>) -> Self {
        Pose { rot, pos }
    }

    pub fn identity() -> Self {
        Pose::new(Rotation::identity(), Vector3::zeros())
    }

    /// Pose from a position and a rotation vector `xi * theta`.
    pub fn from_parts(pos: [f64; 3], xi_theta: [f64; 3]) -> Self {
        Pose::new(rot_exp(&Vector3::from(xi_theta)), Vector3::from(pos))
    }

    pub fn inverse(&self) -> Pose {
        let rt = self.rot.transpose();
        Pose::new(rt, -(rt.0 * self.pos))
    }

    pub fn compose(&self, other: &Pose) -> Pose {
        Pose::new(self.rot * other.rot, self.rot.0 * other.pos + self.pos)
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rot.0 * p + self.pos
    }

    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut h = Matrix4::identity();
        h.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rot.0);
        h.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.pos);
        h
    }

    /// Reads the upper blocks of `h`; the bottom row is ignored.
    pub fn from_homogeneous_unchecked(h: &Matrix4<f64>) -> Pose {
        Pose::new(
            Rotation(h.fixed_view::<3, 3>(0, 0).into_owned()),
            h.fixed_view::<3, 1>(0, 3).into_owned(),
        )
    }
}

impl Mul for Pose {
    type Output = Pose;
    fn mul(self, rhs: Pose) -> Pose {
        self.compose(&rhs)
    }
}

impl Mul<&Pose> for &Pose {
    type Output = Pose;
    fn mul(self, rhs: &Pose) -> Pose {
        self.compose(rhs)
    }
}

/// Body velocity `(v, w)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Twist {
    pub v: Vector3<f64>,
    pub w: Vector3<f64>,
}

impl Twist {
    pub fn new(v: Vector3<f64>, w: Vector3<f64>) -> Self {
        Twist { v, w }
    }

    pub fn zero() -> Self {
        Twist::default()
    }

    /// `[v; w]` ordering.
    pub fn from_array(a: [f64; 6]) -> Self {
        Twist::new(Vector3::new(a[0], a[1], a[2]), Vector3::new(a[3], a[4], a[5]))
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::new(self.v.x, self.v.y, self.v.z, self.w.x, self.w.y, self.w.z)
    }

    pub fn is_zero(&self) -> bool {
        self.v == Vector3::zeros() && self.w == Vector3::zeros()
    }

    /// 4×4 generator `[hat(w) v; 0 0]`.
    pub fn hat(&self) -> Matrix4<f64> {
        let mut h = Matrix4::zeros();
        h.fixed_view_mut::<3, 3>(0, 0).copy_from(&hat(&self.w));
        h.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.v);
        h
    }

    /// Inverse of [`Twist::hat`].
    pub fn vee(h: &Matrix4<f64>) -> Twist {
        Twist::new(
            h.fixed_view::<3, 1>(0, 3).into_owned(),
            vee(&h.fixed_view::<3, 3>(0, 0).into_owned()),
        )
    }

    pub fn scale(&self, k: f64) -> Twist {
        Twist::new(self.v * k, self.w * k)
    }
}

impl Add for Twist {
    type Output = Twist;
    fn add(self, rhs: Twist) -> Twist {
        Twist::new(self.v + rhs.v, self.w + rhs.w)
    }
}

impl Neg for Twist {
    type Output = Twist;
    fn neg(self) -> Twist {
        Twist::new(-self.v, -self.w)
    }
}

/// Vector form `(p, sk(R)^vee)` of a pose error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorVector {
    pub ep: Vector3<f64>,
    pub er: Vector3<f64>,
}

impl ErrorVector {
    pub fn new(ep: Vector3<f64>, er: Vector3<f64>) -> Self {
        ErrorVector { ep, er }
    }

    pub fn zero() -> Self {
        ErrorVector::default()
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        ErrorVector::new(Vector3::new(v[0], v[1], v[2]), Vector3::new(v[3], v[4], v[5]))
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::new(self.ep.x, self.ep.y, self.ep.z, self.er.x, self.er.y, self.er.z)
    }

    pub fn norm(&self) -> f64 {
        self.to_vector().norm()
    }

    /// Treat the error as a twist (same coordinates, `v = ep`, `w = er`).
    pub fn as_twist(&self) -> Twist {
        Twist::new(self.ep, self.er)
    }
}

impl Add for ErrorVector {
    type Output = ErrorVector;
    fn add(self, rhs: ErrorVector) -> ErrorVector {
        ErrorVector::new(self.ep + rhs.ep, self.er + rhs.er)
    }
}

pub fn hat(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// Reads the skew entries of `m`; the symmetric part is ignored.
pub fn vee(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

/// Rodrigues formula, with a second-order series below [`SMALL_ANGLE`].
pub fn rot_exp(xi_theta: &Vector3<f64>) -> Rotation {
    let theta = xi_theta.norm();
    let k = hat(xi_theta);
    let k2 = k * k;
    let (a, b) = if theta < SMALL_ANGLE {
        (1.0 - theta * theta / 6.0, 0.5 - theta * theta / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
    };
    Rotation(Matrix3::identity() + k * a + k2 * b)
}

/// Rotation vector of `r`, with norm in `[0, pi)`.
pub fn rot_log(r: &Rotation) -> Result<Vector3<f64>> {
    let s = e_r(r);
    let sin_theta = s.norm();
    let theta = sin_theta.atan2(0.5 * (r.0.trace() - 1.0));
    if std::f64::consts::PI - theta < CUT_LOCUS_MARGIN {
        return Err(Error::CutLocus { angle: theta });
    }
    if theta < SMALL_ANGLE {
        // sin(theta)/theta = 1 - theta^2/6 + ...
        return Ok(s * (1.0 + theta * theta / 6.0));
    }
    Ok(s * (theta / sin_theta))
}

/// `exp(dt * hat(t))` in closed form.
pub fn se3_exp(t: &Twist, dt: f64) -> Pose {
    let w = t.w * dt;
    let v = t.v * dt;
    let theta = w.norm();
    let k = hat(&w);
    let k2 = k * k;
    let (b, c) = if theta < SMALL_ANGLE {
        (0.5 - theta * theta / 24.0, 1.0 / 6.0 - theta * theta / 120.0)
    } else {
        let t2 = theta * theta;
        ((1.0 - theta.cos()) / t2, (theta - theta.sin()) / (t2 * theta))
    };
    let left_jacobian = Matrix3::identity() + k * b + k2 * c;
    Pose::new(rot_exp(&w), left_jacobian * v)
}

/// `sk(R)^vee`, equal to `xi sin(theta)`.
pub fn e_r(r: &Rotation) -> Vector3<f64> {
    vee(&((r.0 - r.0.transpose()) * 0.5))
}

/// `(g.pos, e_R(g.rot))`.
pub fn big_e_r(g: &Pose) -> ErrorVector {
    ErrorVector::new(g.pos, e_r(&g.rot))
}

/// `phi(R) = 1/2 ||I - R||_F^2 = tr(I - R)`, in `[0, 4]`.
pub fn phi(r: &Rotation) -> f64 {
    3.0 - r.0.trace()
}

/// `psi(g) = 1/2 ||p||^2 + phi(R)`.
pub fn psi(g: &Pose) -> f64 {
    0.5 * g.pos.norm_squared() + phi(&g.rot)
}

pub fn sym(m: &Matrix3<f64>) -> Matrix3<f64> {
    (m + m.transpose()) * 0.5
}

/// Smallest eigenvalue of `sym(m)`.
pub fn lambda_min_sym(m: &Matrix3<f64>) -> f64 {
    SymmetricEigen::new(sym(m)).eigenvalues.min()
}

/// Largest entry of `|m^T m - I|`.
pub fn orthonormality_error(m: &Matrix3<f64>) -> f64 {
    (m.transpose() * m - Matrix3::identity()).abs().max()
}

/// Orthogonal projection `U V^T` onto SO(3).
///
/// Reflections (`det(U V^T) = -1`) and rank-deficient inputs are rejected
/// rather than repaired.
pub fn proj_so3(m: &Matrix3<f64>) -> Result<Rotation> {
    if !m.iter().all(|x| x.is_finite()) {
        return Err(Error::ProjectionEnvelope("non-finite matrix".into()));
    }
    let svd = m.svd(true, true);
    let sv = svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    if smax == 0.0 || smin <= RANK_TOL * smax {
        return Err(Error::ProjectionEnvelope(format!(
            "rank-deficient matrix (singular values {:.3e}, {:.3e}, {:.3e})",
            sv[0], sv[1], sv[2]
        )));
    }
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let r = u * v_t;
    if r.determinant() < 0.0 {
        return Err(Error::ProjectionEnvelope("det(U V^T) = -1".into()));
    }
    Ok(Rotation(r))
}

/// Arithmetic mean of rotation matrices (the matrix `S`).
pub fn matrix_mean(rs: &[Rotation]) -> Result<Matrix3<f64>> {
    if rs.is_empty() {
        return Err(Error::Domain("mean of an empty list".into()));
    }
    let sum = rs.iter().fold(Matrix3::zeros(), |acc, r| acc + r.0);
    Ok(sum / rs.len() as f64)
}

/// Euclidean mean: `Proj((1/n) sum R_j)`.
pub fn euclidean_mean(rs: &[Rotation]) -> Result<Rotation> {
    proj_so3(&matrix_mean(rs)?)
}

/// Arithmetic mean of positions together with the Euclidean mean of rotations.
pub fn pose_average(gs: &[Pose]) -> Result<Pose> {
    if gs.is_empty() {
        return Err(Error::Domain("average of an empty list".into()));
    }
    let rots: Vec<Rotation> = gs.iter().map(|g| g.rot).collect();
    let pos = gs.iter().fold(Vector3::zeros(), |acc, g| acc + g.pos) / gs.len() as f64;
    Ok(Pose::new(euclidean_mean(&rots)?, pos))
}
