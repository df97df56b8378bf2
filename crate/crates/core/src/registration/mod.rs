//! Point-cloud registration: the rotation-constrained ICP that estimates the
//! viewpoint shift, the rigid ICP baseline, and the rotation guard.

mod icp;
mod kdtree;
mod rcicp;
mod system;

pub use icp::{icp_rigid, icp_rigid_from, icp_rigid_with, kabsch, phi_from_icp, rotation_guard, GuardOutcome, IcpOptions, IcpResult};
pub use kdtree::{build_index, NearestNeighborIndex, Neighbor};
pub use rcicp::{rcicp, rcicp_unguarded, RcIcpOptions, RegistrationResult};
pub use system::{assemble_system, solve_system, LinearSystem};

use crate::error::{Error, Result};
use crate::geometry::{centroid, transform_point4, Mat4, RigidTransform, Vec3};

/// Ordered sequence of world-frame points, meters.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec3>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidInput(format!("point {i} is not finite")));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Vec3> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> Vec3 {
        centroid(&self.points)
    }

    /// Applies a general affine 4×4 matrix to every point.
    pub fn transformed(&self, m: &Mat4) -> PointCloud {
        PointCloud { points: self.points.iter().map(|p| transform_point4(m, p)).collect() }
    }

    pub fn transformed_rigid(&self, t: &RigidTransform) -> PointCloud {
        PointCloud { points: self.points.iter().map(|p| t.transform_point(p)).collect() }
    }
}

/// Singular values of the centered cloud, descending.
pub(crate) fn spread(points: &[Vec3]) -> Vec3 {
    let c = centroid(points);
    let mut cov = nalgebra::Matrix3::<f64>::zeros();
    for p in points {
        let d = p - c;
        cov += d * d.transpose();
    }
    let mut s: Vec<f64> = cov.symmetric_eigenvalues().iter().map(|v| v.max(0.0).sqrt()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Vec3::new(s[0], s[1], s[2])
}

/// Fails when the cloud has fewer than `min` points or is (numerically) collinear.
pub(crate) fn check_registrable(cloud: &PointCloud, min: usize, role: &str) -> Result<()> {
    if cloud.len() < min {
        return Err(Error::InvalidInput(format!(
            "{role} cloud needs at least {min} points, got {}",
            cloud.len()
        )));
    }
    let s = spread(cloud.points());
    if !(s.y > 1e-9 * s.x) {
        return Err(Error::DegenerateGeometry(format!("{role} cloud is collinear")));
    }
    Ok(())
}

/// `Σ ‖a_i − b_i‖²`.
pub(crate) fn sum_sq(a: &[Vec3], b: &[Vec3]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).norm_squared()).sum()
}
