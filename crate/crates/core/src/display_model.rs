//! Homography-corrected off-axis eye-display model.
//!
//! The eye-display pair is an ideal on-axis camera `K_on` followed by a planar
//! homography `H` that accounts for the viewpoint's offset from the display
//! axis. A viewpoint shift `φ = (φ₁, φ₂, φ₃)` from the offline-calibrated
//! viewpoint updates `H` by `U` and the extrinsic by `Q`; their product `UQ`
//! is the only quantity estimated online. `φ̃₄ = 1 / z_{C₀S}` is the inverse
//! distance from the offline viewpoint to the virtual display plane.
//!
//! All matrices are 4×4 in a single convention. The 3-row projective chain is
//! recovered by reading rows 0..3 of the product and dividing by the third.

use crate::error::{Error, Result};
use crate::geometry::{project_to_pixel, HomogeneousPoint, Mat4, Pixel, RigidTransform, Rotation, Vec3};

/// Viewpoint shifts beyond this magnitude (per component) are implausible for an eye-box.
pub const VIEWPOINT_SHIFT_SANITY_BOUND: f64 = 0.05;

/// On-axis intrinsics of the ideal camera-display pair, in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnAxisIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl OnAxisIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self> {
        if ![fx, fy, cx, cy].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("intrinsics must be finite".into()));
        }
        if fx <= 0.0 || fy <= 0.0 {
            return Err(Error::InvalidInput(format!("focal lengths must be positive, got fx={fx}, fy={fy}")));
        }
        Ok(Self { fx, fy, cx, cy })
    }

    /// 4×4 embedding `[[fx 0 cx 0] [0 fy cy 0] [0 0 1 0] [0 0 0 1]]`.
    pub fn matrix(&self) -> Mat4 {
        let mut k = Mat4::identity();
        k[(0, 0)] = self.fx;
        k[(1, 1)] = self.fy;
        k[(0, 2)] = self.cx;
        k[(1, 2)] = self.cy;
        k
    }
}

/// Parameters of the off-axis homography.
///
/// `x_ce`, `y_ce` are the in-plane components of the viewpoint offset in the
/// screen frame; `z_es` and `z_cs` are viewpoint-to-screen depths. The screen
/// normal is fixed to `(0, 0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomographyParams {
    pub x_ce: f64,
    pub y_ce: f64,
    pub z_cs: f64,
    pub z_es: f64,
}

impl HomographyParams {
    pub fn new(x_ce: f64, y_ce: f64, z_cs: f64, z_es: f64) -> Result<Self> {
        if ![x_ce, y_ce, z_cs, z_es].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("homography parameters must be finite".into()));
        }
        if z_cs <= 0.0 || z_es <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "screen depths must be positive, got z_cs={z_cs}, z_es={z_es}"
            )));
        }
        Ok(Self { x_ce, y_ce, z_cs, z_es })
    }

    /// The on-axis case: no offset and equal depths, giving `H = I`.
    pub fn on_axis(depth: f64) -> Result<Self> {
        Self::new(0.0, 0.0, depth, depth)
    }
}

/// Viewpoint shift `(φ₁, φ₂, φ₃)` in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ViewpointShift {
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
}

impl ViewpointShift {
    pub const ZERO: ViewpointShift = ViewpointShift { phi1: 0.0, phi2: 0.0, phi3: 0.0 };

    pub fn new(phi1: f64, phi2: f64, phi3: f64) -> Self {
        Self { phi1, phi2, phi3 }
    }

    /// Like [`ViewpointShift::new`] but rejects non-finite components.
    pub fn try_new(phi1: f64, phi2: f64, phi3: f64) -> Result<Self> {
        if ![phi1, phi2, phi3].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("viewpoint shift must be finite".into()));
        }
        Ok(Self::new(phi1, phi2, phi3))
    }

    pub fn from_vec(v: &Vec3) -> Self {
        Self::new(v.x, v.y, v.z)
    }

    pub fn to_vec(&self) -> Vec3 {
        Vec3::new(self.phi1, self.phi2, self.phi3)
    }

    /// True when every component is within [`VIEWPOINT_SHIFT_SANITY_BOUND`].
    pub fn is_plausible(&self) -> bool {
        self.to_vec().amax() <= VIEWPOINT_SHIFT_SANITY_BOUND
    }

    pub fn abs_diff(&self, other: &ViewpointShift) -> Vec3 {
        (self.to_vec() - other.to_vec()).abs()
    }
}

impl std::ops::Neg for ViewpointShift {
    type Output = ViewpointShift;

    fn neg(self) -> ViewpointShift {
        ViewpointShift::new(-self.phi1, -self.phi2, -self.phi3)
    }
}

/// Offline calibration state for one eye.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationProfile {
    pub k_on: OnAxisIntrinsics,
    pub h0: HomographyParams,
    /// `1 / z_{C₀S}` in 1/m.
    pub phi4_tilde: f64,
    /// Offset between the offline viewpoint and the rendering camera, meters.
    pub t_c0v: Vec3,
}

impl CalibrationProfile {
    /// Builds a profile, checking `phi4_tilde = 1 / h0.z_cs` to within 1e-9.
    pub fn new(k_on: OnAxisIntrinsics, h0: HomographyParams, phi4_tilde: f64, t_c0v: Vec3) -> Result<Self> {
        if !phi4_tilde.is_finite() || phi4_tilde <= 0.0 {
            return Err(Error::InvalidInput(format!("phi4_tilde must be positive, got {phi4_tilde}")));
        }
        if (phi4_tilde - 1.0 / h0.z_cs).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "phi4_tilde {phi4_tilde} is inconsistent with 1/z_cs = {}",
                1.0 / h0.z_cs
            )));
        }
        if !t_c0v.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidInput("t_c0v must be finite".into()));
        }
        Ok(Self { k_on, h0, phi4_tilde, t_c0v })
    }

    /// Builds a profile with `phi4_tilde` derived from `h0.z_cs`.
    pub fn from_homography(k_on: OnAxisIntrinsics, h0: HomographyParams, t_c0v: Vec3) -> Result<Self> {
        Self::new(k_on, h0, 1.0 / h0.z_cs, t_c0v)
    }
}

pub fn homography_matrix(p: &HomographyParams) -> Mat4 {
    let scale = p.z_cs / p.z_es;
    let mut h = Mat4::identity();
    h[(0, 0)] = scale;
    h[(1, 1)] = scale;
    h[(0, 2)] = -p.x_ce / p.z_es;
    h[(1, 2)] = -p.y_ce / p.z_es;
    h
}

/// Update of the homography for a viewpoint shift: `H₁ = H₀ · U`.
pub fn build_u(phi: &ViewpointShift, phi4_tilde: f64) -> Mat4 {
    let mut u = Mat4::identity();
    let diag = 1.0 - phi.phi3 * phi4_tilde;
    u[(0, 0)] = diag;
    u[(1, 1)] = diag;
    u[(0, 2)] = phi.phi1 * phi4_tilde;
    u[(1, 2)] = phi.phi2 * phi4_tilde;
    u
}

/// Update of the extrinsic for a viewpoint shift: `E₁ = Q · E₀`.
pub fn build_q(phi: &ViewpointShift) -> Mat4 {
    let mut q = Mat4::identity();
    q[(0, 3)] = -phi.phi1;
    q[(1, 3)] = -phi.phi2;
    q[(2, 3)] = -phi.phi3;
    q
}

pub fn build_uq(phi: &ViewpointShift, phi4_tilde: f64) -> Mat4 {
    build_u(phi, phi4_tilde) * build_q(phi)
}

/// World-space map between the two alignment clouds, `M = X⁻¹ · UQ · X`.
///
/// `M` is a general affine matrix; its 3×3 block is only close to a rotation.
pub fn misalignment_transform(phi: &ViewpointShift, phi4_tilde: f64, x: &RigidTransform) -> Mat4 {
    x.inverse().to_matrix() * build_uq(phi, phi4_tilde) * x.to_matrix()
}

/// `K_on · H₀ · UQ · E₀` as one 4×4 matrix.
pub fn projection_chain(profile: &CalibrationProfile, phi: &ViewpointShift, e0: &RigidTransform) -> Mat4 {
    profile.k_on.matrix() * homography_matrix(&profile.h0) * build_uq(phi, profile.phi4_tilde) * e0.to_matrix()
}

/// Pixel at which the shifted eye sees the world point `v_world`.
pub fn project_point(
    profile: &CalibrationProfile,
    phi: &ViewpointShift,
    e0: &RigidTransform,
    v_world: &HomogeneousPoint,
) -> Result<Pixel> {
    if !v_world.is_point() {
        return Err(Error::Precondition("project_point expects a point (w = 1)".into()));
    }
    let h = projection_chain(profile, phi, e0) * v_world.as_vector();
    project_to_pixel(&h.xyz())
}

fn c0v_offset(profile: &CalibrationProfile) -> Mat4 {
    RigidTransform::from_translation(profile.t_c0v).to_matrix()
}

/// Offline rendering projection `P₀ = K_on · H₀ · [I | t_{C₀V}]`.
pub fn offline_projection(profile: &CalibrationProfile) -> Mat4 {
    profile.k_on.matrix() * homography_matrix(&profile.h0) * c0v_offset(profile)
}

/// Rendering projection after a viewpoint shift, `P₁ = K_on · H₀ · UQ · [I | t_{C₀V}]`.
pub fn updated_projection(profile: &CalibrationProfile, phi: &ViewpointShift) -> Mat4 {
    profile.k_on.matrix() * homography_matrix(&profile.h0) * build_uq(phi, profile.phi4_tilde) * c0v_offset(profile)
}

/// The world-to-rendering-camera transform implied by `E₀` and the fixed `C₀ → V` offset.
///
/// With this view matrix `P₁ · V · v` reproduces [`project_point`].
pub fn rendering_view(profile: &CalibrationProfile, e0: &RigidTransform) -> RigidTransform {
    RigidTransform::from_translation(-profile.t_c0v) * *e0
}

/// Mean Euclidean distance between paired pixels.
pub fn reprojection_error(gt: &[Pixel], reproj: &[Pixel]) -> Result<f64> {
    if gt.is_empty() {
        return Err(Error::InvalidInput("no pixels to compare".into()));
    }
    if gt.len() != reproj.len() {
        return Err(Error::InvalidInput(format!(
            "pixel sequences differ in length ({} vs {})",
            gt.len(),
            reproj.len()
        )));
    }
    let total: f64 = gt.iter().zip(reproj).map(|(a, b)| a.distance(b)).sum();
    Ok(total / gt.len() as f64)
}

/// Difference between a real and a virtual pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseOverlayError {
    /// Axis-angle form of `R_virtual · R_realᵀ`, radians.
    pub rotation_vector: Vec3,
    /// `t_virtual - t_real`, meters.
    pub translation_delta: Vec3,
}

impl PoseOverlayError {
    pub fn rotation_deg(&self) -> f64 {
        self.rotation_vector.norm().to_degrees()
    }

    /// Along-depth misalignment `|Δz|`.
    pub fn depth_error(&self) -> f64 {
        self.translation_delta.z.abs()
    }
}

pub fn pose_overlay_error(real: &RigidTransform, virt: &RigidTransform) -> PoseOverlayError {
    let relative: Rotation = virt.rotation * real.rotation.transpose();
    PoseOverlayError {
        rotation_vector: relative.rotation_vector(),
        translation_delta: virt.translation - real.translation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rotation_from_axis_angle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Entry-by-entry closed form of `UQ`.
    fn uq_closed_form(phi: &ViewpointShift, p4: f64) -> Mat4 {
        let d = 1.0 - phi.phi3 * p4;
        Mat4::new(
            d, 0.0, phi.phi1 * p4, -phi.phi1,
            0.0, d, phi.phi2 * p4, -phi.phi2,
            0.0, 0.0, 1.0, -phi.phi3,
            0.0, 0.0, 0.0, 1.0,
        )
    }

    fn random_phi(rng: &mut impl Rng) -> ViewpointShift {
        ViewpointShift::new(
            rng.random_range(-0.02..0.02),
            rng.random_range(-0.02..0.02),
            rng.random_range(-0.02..0.02),
        )
    }

    fn random_pose(rng: &mut impl Rng) -> RigidTransform {
        let axis = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            .normalize();
        RigidTransform::new(
            rotation_from_axis_angle(&axis, rng.random_range(0.0..0.5)).unwrap(),
            Vec3::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)),
        )
    }

    fn profile(rng: &mut impl Rng) -> CalibrationProfile {
        let k = OnAxisIntrinsics::new(
            rng.random_range(800.0..1500.0),
            rng.random_range(800.0..1500.0),
            rng.random_range(400.0..800.0),
            rng.random_range(300.0..600.0),
        )
        .unwrap();
        let h0 = HomographyParams::new(
            rng.random_range(-0.02..0.02),
            rng.random_range(-0.02..0.02),
            rng.random_range(1.5..2.5),
            rng.random_range(1.5..2.5),
        )
        .unwrap();
        let t = Vec3::new(rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.05), rng.random_range(-0.05..0.05));
        CalibrationProfile::from_homography(k, h0, t).unwrap()
    }

    #[test]
    fn homography_examples() {
        let on_axis = HomographyParams::new(0.0, 0.0, 2.0, 2.0).unwrap();
        assert_eq!(homography_matrix(&on_axis), Mat4::identity());
        let h = homography_matrix(&HomographyParams::new(0.01, 0.0, 2.0, 2.0).unwrap());
        assert_eq!(h[(0, 2)], -0.005);
        let h = homography_matrix(&HomographyParams::new(0.0, 0.0, 2.0, 1.0).unwrap());
        assert_eq!(h[(0, 0)], 2.0);
        assert_eq!(h[(1, 1)], 2.0);
        assert_eq!(h[(2, 2)], 1.0);
        assert!(HomographyParams::new(0.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn u_examples() {
        assert_eq!(build_u(&ViewpointShift::ZERO, 0.5), Mat4::identity());
        let u = build_u(&ViewpointShift::new(0.01, 0.005, 0.02), 0.5);
        assert!((u[(0, 0)] - 0.99).abs() < 1e-15);
        assert!((u[(1, 1)] - 0.99).abs() < 1e-15);
        assert!((u[(0, 2)] - 0.005).abs() < 1e-15);
        assert!((u[(1, 2)] - 0.0025).abs() < 1e-15);
        assert_eq!(u[(2, 2)], 1.0);
        assert_eq!(u[(3, 3)], 1.0);
        assert_eq!(build_u(&ViewpointShift::new(0.01, 0.005, 0.02), 0.0), Mat4::identity());
    }

    #[test]
    fn q_examples() {
        assert_eq!(build_q(&ViewpointShift::ZERO), Mat4::identity());
        let phi = ViewpointShift::new(0.01, 0.005, 0.02);
        let q = build_q(&phi);
        assert_eq!(q.fixed_view::<3, 1>(0, 3).into_owned(), Vec3::new(-0.01, -0.005, -0.02));
        assert_eq!(build_q(&phi) * build_q(&-phi), Mat4::identity());
    }

    #[test]
    fn uq_examples() {
        assert_eq!(build_uq(&ViewpointShift::ZERO, 0.5), Mat4::identity());
        let uq = build_uq(&ViewpointShift::new(0.02, 0.0, 0.0), 0.5);
        assert_eq!(uq[(0, 2)], 0.01);
        assert_eq!(uq[(0, 3)], -0.02);
        assert_eq!(uq[(0, 0)], 1.0);
        assert_eq!(uq[(1, 1)], 1.0);
    }

    #[test]
    fn uq_product_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let phi = random_phi(&mut rng);
            let p4 = rng.random_range(0.3..0.7);
            let diff = (build_uq(&phi, p4) - uq_closed_form(&phi, p4)).amax();
            assert!(diff <= 1e-12, "diff {diff}");
        }
    }

    #[test]
    fn uq_block_near_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let phi = random_phi(&mut rng);
            let uq = build_uq(&phi, 0.5);
            let dev = (uq.fixed_view::<3, 3>(0, 0) - nalgebra::Matrix3::identity()).amax();
            let bound = (phi.phi3 * 0.5).abs().max((phi.phi1 * 0.5).abs()).max((phi.phi2 * 0.5).abs());
            assert!(dev <= bound + 1e-15);
            assert!(dev <= 0.01);
        }
    }

    #[test]
    fn misalignment_examples() {
        let x = random_pose(&mut ChaCha8Rng::seed_from_u64(3));
        let m = misalignment_transform(&ViewpointShift::ZERO, 0.5, &x);
        assert!((m - Mat4::identity()).amax() < 1e-15);
        let phi = ViewpointShift::new(0.01, -0.008, 0.015);
        assert_eq!(misalignment_transform(&phi, 0.5, &RigidTransform::identity()), build_uq(&phi, 0.5));
        let m = misalignment_transform(&phi, 0.5, &x);
        let r = Rotation::nearest(&m.fixed_view::<3, 3>(0, 0).into_owned()).unwrap();
        assert!(r.angle().to_degrees() < 0.6);
    }

    #[test]
    fn project_point_examples() {
        let k = OnAxisIntrinsics::new(1000.0, 1000.0, 500.0, 500.0).unwrap();
        let profile = CalibrationProfile::from_homography(k, HomographyParams::on_axis(2.0).unwrap(), Vec3::zeros()).unwrap();
        let e0 = RigidTransform::identity();
        let px = project_point(&profile, &ViewpointShift::ZERO, &e0, &HomogeneousPoint::point(Vec3::new(0.0, 0.0, 1.0)))
            .unwrap();
        assert_eq!(px, Pixel::new(500.0, 500.0));
        let px = project_point(&profile, &ViewpointShift::ZERO, &e0, &HomogeneousPoint::point(Vec3::new(0.1, 0.0, 1.0)))
            .unwrap();
        assert!((px.u - 600.0).abs() < 1e-9 && (px.v - 500.0).abs() < 1e-9);
        let behind = project_point(&profile, &ViewpointShift::ZERO, &e0, &HomogeneousPoint::point(Vec3::new(0.0, 0.0, -1.0)));
        assert!(matches!(behind, Err(Error::BehindViewpoint(_))));
        let dir = project_point(&profile, &ViewpointShift::ZERO, &e0, &HomogeneousPoint::direction(Vec3::z()));
        assert!(matches!(dir, Err(Error::Precondition(_))));
    }

    #[test]
    fn project_point_matches_explicit_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let prof = profile(&mut rng);
            let phi = random_phi(&mut rng);
            let e0 = random_pose(&mut rng);
            // a point in front of the shifted viewpoint
            let cam = Vec3::new(rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2), rng.random_range(0.3..1.0));
            let world = e0.inverse().transform_point(&cam);
            let px = project_point(&prof, &phi, &e0, &HomogeneousPoint::point(world)).unwrap();

            // the 3-row chain written out step by step on plain arrays
            let k = &prof.k_on;
            let h = &prof.h0;
            let e = e0.transform_point(&world);
            let p4 = prof.phi4_tilde;
            let uq = [
                (1.0 - phi.phi3 * p4) * e.x + phi.phi1 * p4 * e.z - phi.phi1,
                (1.0 - phi.phi3 * p4) * e.y + phi.phi2 * p4 * e.z - phi.phi2,
                e.z - phi.phi3,
            ];
            let s = h.z_cs / h.z_es;
            let hh = [s * uq[0] - h.x_ce / h.z_es * uq[2], s * uq[1] - h.y_ce / h.z_es * uq[2], uq[2]];
            let kk = [k.fx * hh[0] + k.cx * hh[2], k.fy * hh[1] + k.cy * hh[2], hh[2]];
            assert!((px.u - kk[0] / kk[2]).abs() < 1e-9);
            assert!((px.v - kk[1] / kk[2]).abs() < 1e-9);
        }
    }

    #[test]
    fn updated_projection_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let prof = profile(&mut rng);
        let p0 = offline_projection(&prof);
        let p1 = updated_projection(&prof, &ViewpointShift::ZERO);
        for (a, b) in p0.iter().zip(p1.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }

        let k = OnAxisIntrinsics::new(1000.0, 900.0, 640.0, 360.0).unwrap();
        let bare = CalibrationProfile::from_homography(k, HomographyParams::on_axis(2.0).unwrap(), Vec3::zeros()).unwrap();
        assert_eq!(updated_projection(&bare, &ViewpointShift::ZERO), k.matrix());
    }

    #[test]
    fn updated_projection_matches_project_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let prof = profile(&mut rng);
            let phi = random_phi(&mut rng);
            let e0 = random_pose(&mut rng);
            let cam = Vec3::new(rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2), rng.random_range(0.3..1.0));
            let world = e0.inverse().transform_point(&cam);
            let v = HomogeneousPoint::point(world);
            let direct = project_point(&prof, &phi, &e0, &v).unwrap();
            let view = rendering_view(&prof, &e0);
            let h = updated_projection(&prof, &phi) * view.apply(&v).as_vector();
            let via_p1 = project_to_pixel(&h.xyz()).unwrap();
            assert!(direct.distance(&via_p1) < 1e-9);
        }
    }

    #[test]
    fn updated_projection_continuous_in_phi() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let prof = profile(&mut rng);
        let phi = random_phi(&mut rng);
        let base = updated_projection(&prof, &phi);
        for eps in [1e-3, 1e-5, 1e-7] {
            let moved = updated_projection(&prof, &ViewpointShift::new(phi.phi1 + eps, phi.phi2 - eps, phi.phi3 + eps));
            // entries scale with fx·φ̃₄ and fx, so normalise by the largest intrinsic
            let change = (moved - base).amax() / prof.k_on.fx.max(prof.k_on.fy).max(prof.k_on.cx).max(prof.k_on.cy);
            assert!(change <= 10.0 * eps, "eps {eps}: change {change}");
        }
    }

    #[test]
    fn reprojection_error_examples() {
        let a = vec![Pixel::new(1.0, 2.0), Pixel::new(3.0, 4.0)];
        assert_eq!(reprojection_error(&a, &a).unwrap(), 0.0);
        assert_eq!(reprojection_error(&[Pixel::new(0.0, 0.0)], &[Pixel::new(3.0, 4.0)]).unwrap(), 5.0);
        let b = vec![Pixel::new(1.0, 4.0), Pixel::new(7.0, 4.0)];
        assert_eq!(reprojection_error(&a, &b).unwrap(), 3.0);
        assert!(reprojection_error(&[], &[]).is_err());
        assert!(reprojection_error(&a, &b[..1]).is_err());
    }

    #[test]
    fn pose_overlay_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let t = random_pose(&mut rng);
        let e = pose_overlay_error(&t, &t);
        assert!(e.rotation_vector.norm() < 1e-12);
        assert_eq!(e.translation_delta, Vec3::zeros());

        let five = 5f64.to_radians();
        let rotated = RigidTransform::new(rotation_from_axis_angle(&Vec3::x(), five).unwrap(), Vec3::zeros());
        let e = pose_overlay_error(&RigidTransform::identity(), &rotated);
        assert!((e.rotation_vector - Vec3::new(0.0873, 0.0, 0.0)).amax() < 1e-4);
        assert!((e.rotation_vector.x - five).abs() < 1e-12);

        // relative rotation built explicitly, then recovered
        for _ in 0..50 {
            let real = random_pose(&mut rng);
            let axis = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                .normalize();
            let angle = rng.random_range(0.0..0.3);
            let delta = rotation_from_axis_angle(&axis, angle).unwrap();
            let shift = Vec3::new(rng.random_range(-0.01..0.01), 0.0, rng.random_range(-0.01..0.01));
            let virt = RigidTransform::new(delta * real.rotation, real.translation + shift);
            let e = pose_overlay_error(&real, &virt);
            assert!((e.rotation_vector - axis * angle).amax() < 1e-9);
            assert!((e.translation_delta - shift).amax() < 1e-15);
            assert!((e.depth_error() - shift.z.abs()).abs() < 1e-15);
        }
    }
}
