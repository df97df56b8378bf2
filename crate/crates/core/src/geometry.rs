//! Homogeneous 3D transforms, rotations and pixel projection.
//!
//! Lengths are meters throughout. Every type here is an immutable value and
//! every operation is a pure function.

use std::ops::Mul;

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Mat4 = Matrix4<f64>;

/// Tolerance for the orthonormality and unit-axis checks.
pub const ORTHONORMAL_TOL: f64 = 1e-9;

/// A homogeneous 4-vector: `w = 1` for points, `w = 0` for directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousPoint(Vector4<f64>);

impl HomogeneousPoint {
    pub fn point(p: Vec3) -> Self {
        Self(Vector4::new(p.x, p.y, p.z, 1.0))
    }

    pub fn direction(d: Vec3) -> Self {
        Self(Vector4::new(d.x, d.y, d.z, 0.0))
    }

    /// Wraps a raw 4-vector. Fails unless `w` is exactly 0 or 1 and all entries are finite.
    pub fn from_vector(v: Vector4<f64>) -> Result<Self> {
        if !v.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidInput("non-finite homogeneous component".into()));
        }
        if v.w != 0.0 && v.w != 1.0 {
            return Err(Error::InvalidInput(format!("w must be 0 or 1, got {}", v.w)));
        }
        Ok(Self(v))
    }

    pub fn w(&self) -> f64 {
        self.0.w
    }

    pub fn xyz(&self) -> Vec3 {
        self.0.xyz()
    }

    pub fn as_vector(&self) -> &Vector4<f64> {
        &self.0
    }

    pub fn is_point(&self) -> bool {
        self.0.w == 1.0
    }
}

/// A proper rotation matrix (orthonormal, determinant +1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Mat3);

impl Rotation {
    pub fn identity() -> Self {
        Self(Mat3::identity())
    }

    /// Validates `m` as a rotation to within [`ORTHONORMAL_TOL`].
    pub fn from_matrix(m: Mat3) -> Result<Self> {
        if !m.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidInput("non-finite rotation entry".into()));
        }
        let drift = orthonormality_drift(&m);
        if drift > ORTHONORMAL_TOL {
            return Err(Error::Precondition(format!(
                "matrix is not orthonormal (max |RᵀR - I| = {drift:e})"
            )));
        }
        let det = m.determinant();
        if (det - 1.0).abs() > ORTHONORMAL_TOL {
            return Err(Error::Precondition(format!("rotation determinant {det} != 1")));
        }
        Ok(Self(m))
    }

    /// Nearest rotation in the Frobenius sense (polar decomposition via SVD).
    pub fn nearest(m: &Mat3) -> Result<Self> {
        if !m.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidInput("non-finite rotation entry".into()));
        }
        let svd = m.svd(true, true);
        let (u, v_t) = match (svd.u, svd.v_t) {
            (Some(u), Some(v_t)) => (u, v_t),
            _ => return Err(Error::DegenerateGeometry("SVD failed".into())),
        };
        let mut d = Mat3::identity();
        if (u * v_t).determinant() < 0.0 {
            d[(2, 2)] = -1.0;
        }
        Ok(Self(u * d * v_t))
    }

    /// Rodrigues rotation about a unit `axis` by `angle` radians.
    pub fn from_axis_angle(axis: &Vec3, angle: f64) -> Result<Self> {
        let norm = axis.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > ORTHONORMAL_TOL {
            return Err(Error::Precondition(format!("rotation axis must be unit length, |axis| = {norm}")));
        }
        if !angle.is_finite() {
            return Err(Error::InvalidInput("non-finite rotation angle".into()));
        }
        let k = skew(axis);
        let (s, c) = angle.sin_cos();
        Ok(Self(Mat3::identity() + k * s + k * k * (1.0 - c)))
    }

    /// Rotation given by a rotation vector (axis times angle, radians).
    pub fn from_rotation_vector(rv: &Vec3) -> Self {
        let angle = rv.norm();
        if angle == 0.0 {
            return Self::identity();
        }
        // the normalized axis is unit to rounding
        let axis = rv / angle;
        let k = skew(&axis);
        let (s, c) = angle.sin_cos();
        Self(Mat3::identity() + k * s + k * k * (1.0 - c))
    }

    /// Rotation angle in `[0, π]`.
    pub fn angle(&self) -> f64 {
        let cos = ((self.0.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
        cos.acos()
    }

    /// Axis-angle (rotation vector) form of this rotation.
    pub fn rotation_vector(&self) -> Vec3 {
        let r = &self.0;
        let vee = Vec3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]);
        let sin2 = vee.norm(); // 2 sin θ
        let cos = (r.trace() - 1.0) / 2.0;
        let angle = sin2.atan2(2.0 * cos);
        if angle < 1e-7 {
            return vee * 0.5;
        }
        if std::f64::consts::PI - angle > 1e-6 {
            return vee * (angle / sin2);
        }
        // near π the antisymmetric part vanishes; read the axis off the symmetric
        // part, (R + Rᵀ)/2 − cos θ·I = (1 − cos θ)·aaᵀ
        let b = (r + r.transpose()) * 0.5 - Mat3::identity() * cos;
        let col = (0..3)
            .max_by(|&i, &j| b.column(i).norm().total_cmp(&b.column(j).norm()))
            .unwrap_or(0);
        let mut axis: Vec3 = b.column(col).normalize();
        if axis.dot(&vee) < 0.0 {
            axis = -axis;
        }
        axis * angle
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }
}

impl Mul for Rotation {
    type Output = Rotation;

    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

impl Mul<Vec3> for Rotation {
    type Output = Vec3;

    fn mul(self, rhs: Vec3) -> Vec3 {
        self.0 * rhs
    }
}

/// A rigid transform `[R t; 0 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: Rotation,
    pub translation: Vec3,
}

impl RigidTransform {
    pub fn new(rotation: Rotation, translation: Vec3) -> Self {
        Self { rotation, translation }
    }

    pub fn identity() -> Self {
        Self::new(Rotation::identity(), Vec3::zeros())
    }

    pub fn from_translation(translation: Vec3) -> Self {
        Self::new(Rotation::identity(), translation)
    }

    /// Reads a 4×4 matrix whose bottom row is `[0 0 0 1]` and whose 3×3 block is a rotation.
    pub fn from_matrix(m: &Mat4) -> Result<Self> {
        let bottom = m.fixed_view::<1, 4>(3, 0);
        if bottom[0] != 0.0 || bottom[1] != 0.0 || bottom[2] != 0.0 || bottom[3] != 1.0 {
            return Err(Error::Precondition("bottom row of a rigid transform must be [0 0 0 1]".into()));
        }
        let rotation = Rotation::from_matrix(m.fixed_view::<3, 3>(0, 0).into_owned())?;
        let translation: Vec3 = m.fixed_view::<3, 1>(0, 3).into_owned();
        if !translation.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidInput("non-finite translation".into()));
        }
        Ok(Self::new(rotation, translation))
    }

    pub fn to_matrix(&self) -> Mat4 {
        let mut m = Mat4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(self.rotation.matrix());
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation.matrix() * p + self.translation
    }

    pub fn transform_direction(&self, d: &Vec3) -> Vec3 {
        self.rotation.matrix() * d
    }

    pub fn apply(&self, p: &HomogeneousPoint) -> HomogeneousPoint {
        let xyz = self.rotation.matrix() * p.xyz() + self.translation * p.w();
        HomogeneousPoint(Vector4::new(xyz.x, xyz.y, xyz.z, p.w()))
    }

    pub fn inverse(&self) -> Self {
        let r_t = self.rotation.transpose();
        Self::new(r_t, -(r_t * self.translation))
    }
}

impl Mul for RigidTransform {
    type Output = RigidTransform;

    fn mul(self, rhs: RigidTransform) -> RigidTransform {
        RigidTransform::new(
            self.rotation * rhs.rotation,
            self.rotation * rhs.translation + self.translation,
        )
    }
}

/// An image-plane location in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pixel {
    pub u: f64,
    pub v: f64,
}

impl Pixel {
    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn distance(&self, other: &Pixel) -> f64 {
        (self.u - other.u).hypot(self.v - other.v)
    }
}

pub fn rotation_from_axis_angle(axis: &Vec3, angle: f64) -> Result<Rotation> {
    Rotation::from_axis_angle(axis, angle)
}

pub fn rotation_angle(r: &Rotation) -> f64 {
    r.angle()
}

pub fn apply(t: &RigidTransform, p: &HomogeneousPoint) -> HomogeneousPoint {
    t.apply(p)
}

pub fn invert(t: &RigidTransform) -> RigidTransform {
    t.inverse()
}

/// Perspective division of homogeneous image coordinates `(h₁, h₂, ζ)`.
pub fn project_to_pixel(h: &Vec3) -> Result<Pixel> {
    if !(h.z > 0.0) {
        return Err(Error::BehindViewpoint(h.z));
    }
    Ok(Pixel::new(h.x / h.z, h.y / h.z))
}

/// Largest absolute entry of `MᵀM - I`.
pub fn orthonormality_drift(m: &Mat3) -> f64 {
    (m.transpose() * m - Mat3::identity()).amax()
}

pub fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Applies a general 4×4 matrix to a 3D point (`w = 1`), returning the xyz part.
///
/// The matrices used by the display model keep `w = 1` for points, so no
/// perspective division is performed.
pub fn transform_point4(m: &Mat4, p: &Vec3) -> Vec3 {
    m.fixed_view::<3, 3>(0, 0) * p + m.fixed_view::<3, 1>(0, 3)
}

pub fn centroid(points: &[Vec3]) -> Vec3 {
    let sum = points.iter().fold(Vec3::zeros(), |acc, p| acc + p);
    sum / points.len() as f64
}
