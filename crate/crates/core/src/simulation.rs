//! Synthetic alignment trials and rotational-noise sweeps.
//!
//! A trial takes a source hand cloud, maps it through a known conjugated update
//! `X⁻¹ · UQ(φ_gt) · X`, then rotates the result about a random axis through one
//! of its own points to mimic an imperfect user alignment. Both the
//! rotation-constrained ICP and the rigid ICP baseline are run on the pair and
//! their viewpoint-shift estimates are compared against `φ_gt`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::display_model::{misalignment_transform, ViewpointShift};
use crate::error::{Error, Result};
use crate::geometry::{Rotation, RigidTransform, Vec3};
use crate::registration::{
    icp_rigid_with, phi_from_icp, rcicp_unguarded, rotation_guard, IcpOptions, PointCloud, RcIcpOptions,
};

/// Per-component accuracy target for the viewpoint shift, millimeters.
pub const ACCURACY_BASELINE_MM: f64 = 4.0;

pub const MIN_CLOUD_POINTS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticCloudSpec {
    pub point_count: usize,
    /// Overall span of the hand silhouette, meters.
    pub extent: f64,
    /// Half-width of the uniform depth jitter, meters.
    pub depth_jitter: f64,
    pub center: Vec3,
    pub seed: u64,
}

impl Default for SyntheticCloudSpec {
    fn default() -> Self {
        Self { point_count: 1000, extent: 0.18, depth_jitter: 0.01, center: Vec3::new(0.0, 0.0, 0.5), seed: 0 }
    }
}

impl SyntheticCloudSpec {
    pub fn validate(&self) -> Result<()> {
        if self.point_count < MIN_CLOUD_POINTS {
            return Err(Error::InvalidInput(format!(
                "point_count must be at least {MIN_CLOUD_POINTS}, got {}",
                self.point_count
            )));
        }
        if !(self.extent > 0.0 && self.extent.is_finite()) {
            return Err(Error::InvalidInput(format!("extent must be positive, got {}", self.extent)));
        }
        if !(self.depth_jitter >= 0.0 && self.depth_jitter.is_finite()) {
            return Err(Error::InvalidInput(format!("depth_jitter must be non-negative, got {}", self.depth_jitter)));
        }
        if !self.center.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidInput("center must be finite".into()));
        }
        Ok(())
    }
}

// (direction in radians, length relative to the longest finger, angular half-width)
const FINGERS: [(f64, f64, f64); 5] = [
    (2.55, 0.62, 0.16), // thumb
    (1.88, 0.93, 0.09),
    (1.57, 1.00, 0.09),
    (1.27, 0.93, 0.09),
    (0.98, 0.74, 0.085),
];
const PALM: f64 = 0.46;

/// Radius of the silhouette at polar angle `theta`, as a fraction of the half-extent.
fn silhouette_radius(theta: f64) -> f64 {
    let lobes: f64 = FINGERS
        .iter()
        .map(|&(dir, len, width)| {
            let mut d = (theta - dir).rem_euclid(TAU);
            if d > std::f64::consts::PI {
                d -= TAU;
            }
            (len - PALM) * (-(d / width).powi(2)).exp()
        })
        .fold(0.0, f64::max);
    PALM + lobes
}

/// Samples a planar hand-silhouette contour (palm disc plus five finger lobes)
/// uniformly by arc length, centred at `spec.center` with uniform depth jitter.
pub fn generate_hand_cloud(spec: &SyntheticCloudSpec) -> Result<PointCloud> {
    spec.validate()?;
    const SEGMENTS: usize = 4096;
    let half = spec.extent / 2.0;
    let outline: Vec<(f64, f64)> = (0..=SEGMENTS)
        .map(|i| {
            let t = TAU * i as f64 / SEGMENTS as f64;
            let r = silhouette_radius(t) * half;
            (r * t.cos(), r * t.sin())
        })
        .collect();
    let mut cumulative = Vec::with_capacity(SEGMENTS + 1);
    cumulative.push(0.0);
    for w in outline.windows(2) {
        let len = (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1);
        cumulative.push(cumulative.last().copied().unwrap_or(0.0) + len);
    }
    let total = cumulative[SEGMENTS];

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let points = (0..spec.point_count)
        .map(|_| {
            let s = rng.random_range(0.0..total);
            let seg = cumulative.partition_point(|&c| c <= s).clamp(1, SEGMENTS) - 1;
            let f = (s - cumulative[seg]) / (cumulative[seg + 1] - cumulative[seg]);
            let (x0, y0) = outline[seg];
            let (x1, y1) = outline[seg + 1];
            let jitter = if spec.depth_jitter > 0.0 {
                rng.random_range(-spec.depth_jitter..=spec.depth_jitter)
            } else {
                0.0
            };
            spec.center + Vec3::new(x0 + f * (x1 - x0), y0 + f * (y1 - y0), jitter)
        })
        .collect();
    PointCloud::new(points)
}

/// Uniform direction on the unit sphere (Marsaglia's method).
pub fn random_unit_axis(rng: &mut impl Rng) -> Vec3 {
    loop {
        let u: f64 = rng.random_range(-1.0..1.0);
        let v: f64 = rng.random_range(-1.0..1.0);
        let s = u * u + v * v;
        if s < 1.0 && s > 0.0 {
            let k = 2.0 * (1.0 - s).sqrt();
            return Vec3::new(u * k, v * k, 1.0 - 2.0 * s);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub rotation_deg: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(rotation_deg: f64, seed: u64) -> Result<Self> {
        if !(rotation_deg >= 0.0 && rotation_deg.is_finite()) {
            return Err(Error::InvalidInput(format!("rotation_deg must be non-negative, got {rotation_deg}")));
        }
        Ok(Self { rotation_deg, seed })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialPair {
    pub source: PointCloud,
    pub target: PointCloud,
    /// Axis of the injected disturbance.
    pub axis: Vec3,
    /// Index (into the transformed cloud) of the rotation pivot.
    pub pivot_index: usize,
}

/// Builds `target = R_noise ∘ (X⁻¹ · UQ(φ_gt) · X)` applied to `source`.
pub fn make_trial_pair(
    source: &PointCloud,
    phi_gt: &ViewpointShift,
    phi4_tilde: f64,
    x: &RigidTransform,
    noise: &NoiseSpec,
) -> Result<TrialPair> {
    if source.is_empty() {
        return Err(Error::InvalidInput("source cloud is empty".into()));
    }
    if !(noise.rotation_deg >= 0.0 && noise.rotation_deg.is_finite()) {
        return Err(Error::InvalidInput(format!("rotation_deg must be non-negative, got {}", noise.rotation_deg)));
    }
    let moved = source.transformed(&misalignment_transform(phi_gt, phi4_tilde, x));
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let axis = random_unit_axis(&mut rng);
    let pivot_index = rng.random_range(0..moved.len());
    let target = if noise.rotation_deg == 0.0 {
        moved
    } else {
        let r = Rotation::from_axis_angle(&axis, noise.rotation_deg.to_radians())?;
        let pivot = moved.points()[pivot_index];
        let disturb = RigidTransform::new(r, pivot - r * pivot);
        moved.transformed_rigid(&disturb)
    };
    Ok(TrialPair { source: source.clone(), target, axis, pivot_index })
}

/// Estimate from one registration method within a trial.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub phi: ViewpointShift,
    /// `|φ − φ_gt|` per component, meters.
    pub error: Vec3,
    pub iterations: usize,
    pub converged: bool,
}

/// One simulated alignment. Failed registrations are kept as `Err(message)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub seed: u64,
    pub noise_seed: u64,
    pub rotation_deg: f64,
    pub phi_gt: ViewpointShift,
    pub rcicp: std::result::Result<MethodOutcome, String>,
    pub icp: std::result::Result<MethodOutcome, String>,
    /// Rigid-ICP relative rotation; NaN when the rigid registration failed.
    pub guard_rotation_deg: f64,
    pub pivot_index: usize,
}

impl TrialRecord {
    pub fn is_failed(&self) -> bool {
        self.rcicp.is_err() || self.icp.is_err()
    }
}

/// Runs both registration methods on one constructed pair.
pub fn run_trial(
    source: &PointCloud,
    phi_gt: &ViewpointShift,
    phi4_tilde: f64,
    x: &RigidTransform,
    noise: &NoiseSpec,
    opts: &RcIcpOptions,
) -> TrialRecord {
    let pair = match make_trial_pair(source, phi_gt, phi4_tilde, x, noise) {
        Ok(p) => p,
        Err(e) => {
            return TrialRecord {
                seed: noise.seed,
                noise_seed: noise.seed,
                rotation_deg: noise.rotation_deg,
                phi_gt: *phi_gt,
                rcicp: Err(e.to_string()),
                icp: Err(e.to_string()),
                guard_rotation_deg: f64::NAN,
                pivot_index: 0,
            }
        }
    };

    let rcicp = rcicp_unguarded(&pair.source, &pair.target, x, phi4_tilde, opts)
        .map(|r| MethodOutcome {
            phi: r.phi,
            error: r.phi.abs_diff(phi_gt),
            iterations: r.iterations,
            converged: r.converged,
        })
        .map_err(|e| e.to_string());

    let icp_opts = IcpOptions {
        max_iterations: opts.max_iterations,
        convergence_ratio: opts.convergence_ratio,
        min_mean_sq_error: opts.min_mean_sq_error,
    };
    let guard_rotation_deg = rotation_guard(&pair.source, &pair.target, opts.rotation_guard_deg)
        .map(|g| g.rotation_deg)
        .unwrap_or(f64::NAN);
    let icp = icp_rigid_with(&pair.source, &pair.target, &icp_opts)
        .map(|r| {
            let phi = phi_from_icp(&r.transform, x);
            MethodOutcome { phi, error: phi.abs_diff(phi_gt), iterations: r.iterations, converged: r.converged }
        })
        .map_err(|e| e.to_string());

    TrialRecord {
        seed: noise.seed,
        noise_seed: noise.seed,
        rotation_deg: noise.rotation_deg,
        phi_gt: *phi_gt,
        rcicp,
        icp,
        guard_rotation_deg,
        pivot_index: pair.pivot_index,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiPolicy {
    Fixed(ViewpointShift),
    /// Each component uniform in `[-max_abs, max_abs]` meters.
    SeededRandom { max_abs: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtrinsicPolicy {
    Fixed(RigidTransform),
    /// Rotation about a uniform axis by up to `max_angle_deg`, translation up to `max_translation` meters.
    SeededRandom { max_angle_deg: f64, max_translation: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    /// `(start, stop, step)` in degrees; `stop` is inclusive.
    pub rotation_range: (f64, f64, f64),
    pub trials_per_level: usize,
    pub phi_policy: PhiPolicy,
    pub phi4_tilde: f64,
    pub extrinsic_policy: ExtrinsicPolicy,
    pub base_seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            rotation_range: (0.0, 20.0, 1.0),
            trials_per_level: 20,
            phi_policy: PhiPolicy::SeededRandom { max_abs: 0.02 },
            phi4_tilde: 0.5,
            extrinsic_policy: ExtrinsicPolicy::SeededRandom { max_angle_deg: 30.0, max_translation: 0.5 },
            base_seed: 1,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let (start, stop, step) = self.rotation_range;
        if ![start, stop, step].iter().all(|v| v.is_finite()) || step <= 0.0 || start < 0.0 || stop < start {
            return Err(Error::InvalidInput(format!(
                "rotation range must satisfy 0 <= start <= stop and step > 0, got {start}:{stop}:{step}"
            )));
        }
        if self.trials_per_level == 0 {
            return Err(Error::InvalidInput("trials_per_level must be at least 1".into()));
        }
        if !(self.phi4_tilde > 0.0 && self.phi4_tilde.is_finite()) {
            return Err(Error::InvalidInput("phi4_tilde must be positive".into()));
        }
        Ok(())
    }

    /// Noise levels `start, start + step, …` up to and including `stop`.
    pub fn levels(&self) -> Vec<f64> {
        let (start, stop, step) = self.rotation_range;
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| start + i as f64 * step).collect()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic seed derived from a parent seed and a stream tag.
pub fn derive_seed(parent: u64, tag: u64) -> u64 {
    splitmix64(parent ^ splitmix64(tag))
}

const TAG_SCENE: u64 = 0x5343_454e;
const TAG_CLOUD: u64 = 0x434c_4f55;

/// Scene (cloud, `φ_gt`, `X`) seed of trial `index`; shared across noise levels.
pub fn trial_seed(base_seed: u64, index: usize) -> u64 {
    derive_seed(base_seed, index as u64)
}

/// Disturbance seed for a trial at a given noise level, keyed by the level in millidegrees.
pub fn noise_seed(trial_seed: u64, rotation_deg: f64) -> u64 {
    derive_seed(trial_seed, (rotation_deg * 1000.0).round() as u64)
}

/// Ground truth and geometry of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialScene {
    pub source: PointCloud,
    pub phi_gt: ViewpointShift,
    pub x: RigidTransform,
}

pub fn random_extrinsic(rng: &mut impl Rng, max_angle_deg: f64, max_translation: f64) -> Result<RigidTransform> {
    let axis = random_unit_axis(rng);
    let angle = rng.random_range(0.0..=max_angle_deg).to_radians();
    let dir = random_unit_axis(rng);
    let dist = rng.random_range(0.0..=max_translation);
    Ok(RigidTransform::new(Rotation::from_axis_angle(&axis, angle)?, dir * dist))
}

pub fn build_scene(cfg: &SweepConfig, spec: &SyntheticCloudSpec, seed: u64) -> Result<TrialScene> {
    let cloud_spec = SyntheticCloudSpec { seed: derive_seed(spec.seed ^ seed, TAG_CLOUD), ..*spec };
    let source = generate_hand_cloud(&cloud_spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, TAG_SCENE));
    let phi_gt = match cfg.phi_policy {
        PhiPolicy::Fixed(phi) => phi,
        PhiPolicy::SeededRandom { max_abs } => ViewpointShift::new(
            rng.random_range(-max_abs..=max_abs),
            rng.random_range(-max_abs..=max_abs),
            rng.random_range(-max_abs..=max_abs),
        ),
    };
    let x = match cfg.extrinsic_policy {
        ExtrinsicPolicy::Fixed(x) => x,
        ExtrinsicPolicy::SeededRandom { max_angle_deg, max_translation } => {
            random_extrinsic(&mut rng, max_angle_deg, max_translation)?
        }
    };
    Ok(TrialScene { source, phi_gt, x })
}

/// Runs every `(level, trial)` combination. Output order is level-major and
/// independent of thread scheduling.
pub fn run_sweep(cfg: &SweepConfig, spec: &SyntheticCloudSpec, opts: &RcIcpOptions) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    spec.validate()?;
    opts.validate()?;
    let levels = cfg.levels();
    let scenes: Vec<(u64, TrialScene)> = (0..cfg.trials_per_level)
        .into_par_iter()
        .map(|t| {
            let seed = trial_seed(cfg.base_seed, t);
            build_scene(cfg, spec, seed).map(|s| (seed, s))
        })
        .collect::<Result<_>>()?;

    let jobs: Vec<(f64, usize)> = levels
        .iter()
        .flat_map(|&level| (0..cfg.trials_per_level).map(move |t| (level, t)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(level, t)| {
            let (seed, scene) = &scenes[t];
            let noise = NoiseSpec { rotation_deg: level, seed: noise_seed(*seed, level) };
            let mut record = run_trial(&scene.source, &scene.phi_gt, cfg.phi4_tilde, &scene.x, &noise, opts);
            record.seed = *seed;
            record
        })
        .collect();
    Ok(records)
}

/// Median, mean and sample standard deviation per φ component, millimeters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentStats {
    pub median: Vec3,
    pub mean: Vec3,
    pub std: Vec3,
}

impl ComponentStats {
    fn from_errors(errors: &[Vec3]) -> Option<Self> {
        if errors.is_empty() {
            return None;
        }
        let mut median = Vec3::zeros();
        let mut mean = Vec3::zeros();
        let mut std = Vec3::zeros();
        for c in 0..3 {
            let mut vals: Vec<f64> = errors.iter().map(|e| e[c] * 1000.0).collect();
            vals.sort_by(f64::total_cmp);
            median[c] = median_sorted(&vals);
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            mean[c] = m;
            std[c] = if vals.len() > 1 {
                (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (vals.len() - 1) as f64).sqrt()
            } else {
                0.0
            };
        }
        Some(Self { median, mean, std })
    }
}

pub fn median_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSummary {
    pub rotation_deg: f64,
    pub trials: usize,
    /// `None` when every trial at this level failed for the method.
    pub rcicp: Option<ComponentStats>,
    pub icp: Option<ComponentStats>,
    pub rcicp_failures: usize,
    pub icp_failures: usize,
}

impl LevelSummary {
    /// True when every median rcICP component is within the accuracy baseline.
    pub fn rcicp_within_baseline(&self) -> bool {
        self.rcicp.is_some_and(|s| s.median.amax() <= ACCURACY_BASELINE_MM)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub levels: Vec<LevelSummary>,
    /// Largest level whose median rcICP components all meet the accuracy baseline.
    pub tolerance_angle_deg: Option<f64>,
    /// Largest level such that it and every lower level meet the baseline.
    pub contiguous_tolerance_deg: Option<f64>,
}

/// Per-level statistics over a sweep, grouped by noise level in ascending order.
pub fn summarize(records: &[TrialRecord]) -> Result<SweepSummary> {
    if records.is_empty() {
        return Err(Error::InvalidInput("no trial records to summarize".into()));
    }
    let mut levels: Vec<f64> = records.iter().map(|r| r.rotation_deg).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();

    let summaries: Vec<LevelSummary> = levels
        .iter()
        .map(|&level| {
            let at: Vec<&TrialRecord> = records.iter().filter(|r| r.rotation_deg == level).collect();
            let rc: Vec<Vec3> = at.iter().filter_map(|r| r.rcicp.as_ref().ok().map(|o| o.error)).collect();
            let ic: Vec<Vec3> = at.iter().filter_map(|r| r.icp.as_ref().ok().map(|o| o.error)).collect();
            LevelSummary {
                rotation_deg: level,
                trials: at.len(),
                rcicp_failures: at.len() - rc.len(),
                icp_failures: at.len() - ic.len(),
                rcicp: ComponentStats::from_errors(&rc),
                icp: ComponentStats::from_errors(&ic),
            }
        })
        .collect();

    let tolerance_angle_deg = summaries.iter().rev().find(|l| l.rcicp_within_baseline()).map(|l| l.rotation_deg);
    let contiguous_tolerance_deg = summaries
        .iter()
        .take_while(|l| l.rcicp_within_baseline())
        .last()
        .map(|l| l.rotation_deg);
    Ok(SweepSummary { levels: summaries, tolerance_angle_deg, contiguous_tolerance_deg })
}
