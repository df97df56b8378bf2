//! Point-to-point rigid ICP, used as the unconstrained baseline and by the rotation guard.

use nalgebra::Matrix3;

use crate::display_model::ViewpointShift;
use crate::error::{Error, Result};
use crate::geometry::{centroid, RigidTransform, Rotation, Vec3};

use super::{build_index, check_registrable, sum_sq, NearestNeighborIndex, PointCloud};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcpOptions {
    pub max_iterations: usize,
    pub convergence_ratio: f64,
    /// Mean squared residual (m²) treated as an exact fit.
    pub min_mean_sq_error: f64,
}

impl Default for IcpOptions {
    fn default() -> Self {
        Self { max_iterations: 800, convergence_ratio: 0.9999, min_mean_sq_error: 1e-24 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcpResult {
    /// `M_ICP` with `target ≈ M_ICP · source`.
    pub transform: RigidTransform,
    pub iterations: usize,
    pub converged: bool,
    pub final_error: f64,
}

/// Optimal rigid transform mapping `src[i]` onto `dst[i]` (cross-covariance SVD).
pub fn kabsch(src: &[Vec3], dst: &[Vec3]) -> Result<RigidTransform> {
    if src.len() != dst.len() || src.is_empty() {
        return Err(Error::InvalidInput("kabsch needs equally sized, non-empty point sets".into()));
    }
    let cs = centroid(src);
    let cd = centroid(dst);
    let mut h = Matrix3::zeros();
    for (p, q) in src.iter().zip(dst) {
        h += (p - cs) * (q - cd).transpose();
    }
    let svd = h.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::DegenerateGeometry("SVD of cross-covariance failed".into())),
    };
    let s = svd.singular_values;
    if !(s.max() > 0.0) || s.iter().filter(|&&v| v > 1e-12 * s.max()).count() < 2 {
        return Err(Error::DegenerateGeometry("correspondences are collinear".into()));
    }
    let v = v_t.transpose();
    let mut d = Matrix3::identity();
    if (v * u.transpose()).determinant() < 0.0 {
        d[(2, 2)] = -1.0;
    }
    let r = Rotation::nearest(&(v * d * u.transpose()))?;
    let t = cd - r * cs;
    Ok(RigidTransform::new(r, t))
}

fn correspond(index: &NearestNeighborIndex, moved: &[Vec3]) -> Vec<Vec3> {
    moved.iter().map(|p| *index.point(index.nearest(p).index)).collect()
}

pub fn icp_rigid_with(source: &PointCloud, target: &PointCloud, opts: &IcpOptions) -> Result<IcpResult> {
    let init = RigidTransform::from_translation(target.centroid() - source.centroid());
    icp_rigid_from(source, target, init, opts)
}

/// Rigid ICP started from an explicit initial transform.
pub fn icp_rigid_from(
    source: &PointCloud,
    target: &PointCloud,
    initial: RigidTransform,
    opts: &IcpOptions,
) -> Result<IcpResult> {
    if opts.max_iterations == 0 {
        return Err(Error::InvalidInput("max_iterations must be at least 1".into()));
    }
    check_registrable(source, 3, "source")?;
    check_registrable(target, 3, "target")?;
    let index = build_index(target)?;
    let src = source.points();
    let n = src.len() as f64;

    let mut transform = initial;
    let mut moved: Vec<Vec3> = src.iter().map(|p| transform.transform_point(p)).collect();
    let mut matched = correspond(&index, &moved);
    let mut e_prev = sum_sq(&moved, &matched);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iterations {
        if e_prev <= opts.min_mean_sq_error * n {
            converged = true;
            break;
        }
        let next = kabsch(src, &matched)?;
        iterations += 1;
        let stationary = next == transform;
        transform = next;
        moved = src.iter().map(|p| transform.transform_point(p)).collect();
        matched = correspond(&index, &moved);
        let e = sum_sq(&moved, &matched);
        let ratio = e / e_prev;
        e_prev = e;
        if stationary || (ratio < 1.0 && ratio > opts.convergence_ratio) {
            converged = true;
            break;
        }
    }
    Ok(IcpResult { transform, iterations, converged, final_error: e_prev })
}

/// Rigid ICP with the default termination rule and the given iteration cap.
pub fn icp_rigid(source: &PointCloud, target: &PointCloud, max_iterations: usize) -> Result<RigidTransform> {
    let opts = IcpOptions { max_iterations, ..IcpOptions::default() };
    Ok(icp_rigid_with(source, target, &opts)?.transform)
}

/// Viewpoint shift implied by a rigid registration: the negated translation of `X · M_ICP · X⁻¹`.
pub fn phi_from_icp(m_icp: &RigidTransform, x: &RigidTransform) -> ViewpointShift {
    let uq = *x * *m_icp * x.inverse();
    ViewpointShift::from_vec(&-uq.translation)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuardOutcome {
    pub rotation_deg: f64,
    pub accepted: bool,
}

/// Principal axes of a cloud as the columns of a proper rotation, by decreasing variance.
fn principal_frame(cloud: &PointCloud) -> Matrix3<f64> {
    let c = cloud.centroid();
    let mut cov = Matrix3::zeros();
    for p in cloud.points() {
        let d = p - c;
        cov += d * d.transpose();
    }
    let eig = cov.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut frame = Matrix3::from_columns(&[
        eig.eigenvectors.column(order[0]).into_owned(),
        eig.eigenvectors.column(order[1]).into_owned(),
        eig.eigenvectors.column(order[2]).into_owned(),
    ]);
    if frame.determinant() < 0.0 {
        frame.set_column(2, &(-frame.column(2)));
    }
    frame
}

/// Initial transforms for the guard: centroid alignment first, then the four
/// proper principal-axis alignments.
fn guard_starts(source: &PointCloud, target: &PointCloud) -> Result<Vec<RigidTransform>> {
    let cs = source.centroid();
    let ct = target.centroid();
    let mut starts = vec![RigidTransform::from_translation(ct - cs)];
    let fs = principal_frame(source);
    let ft = principal_frame(target);
    for signs in [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]] {
        let flip = Matrix3::from_diagonal(&Vec3::from(signs));
        let r = Rotation::nearest(&(ft * flip * fs.transpose()))?;
        starts.push(RigidTransform::new(r, ct - r * cs));
    }
    Ok(starts)
}

/// Relative rotation between two clouds, accepted when it does not exceed `threshold_deg`.
///
/// Rigid ICP is run from several initial alignments and the fit with the lowest
/// residual is measured, so a single local minimum cannot hide a large rotation.
pub fn rotation_guard(source: &PointCloud, target: &PointCloud, threshold_deg: f64) -> Result<GuardOutcome> {
    let opts = IcpOptions::default();
    let mut best: Option<IcpResult> = None;
    for start in guard_starts(source, target)? {
        let fit = icp_rigid_from(source, target, start, &opts)?;
        if best.is_none_or(|b| fit.final_error < b.final_error) {
            best = Some(fit);
        }
        if best.is_some_and(|b| b.final_error <= opts.min_mean_sq_error * source.len() as f64) {
            break;
        }
    }
    let best = best.ok_or_else(|| Error::DegenerateGeometry("no guard registration".into()))?;
    let rotation_deg = best.transform.rotation.angle().to_degrees();
    Ok(GuardOutcome { rotation_deg, accepted: rotation_deg <= threshold_deg })
}
