//! File formats: point clouds, calibration profiles, extrinsics, ground-truth
//! sidecars and sweep reports.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use ostcal::display_model::{CalibrationProfile, HomographyParams, OnAxisIntrinsics, ViewpointShift};
use ostcal::geometry::{orthonormality_drift, Mat3, RigidTransform, Rotation, Vec3};
use ostcal::registration::PointCloud;
use ostcal::simulation::TrialRecord;

use crate::error::{CliError, Result};

/// Rotations drifting further than this from orthonormal are rejected.
pub const EXTRINSIC_REJECT_TOL: f64 = 1e-6;
/// Rotations drifting further than this are re-orthonormalized with a warning.
pub const EXTRINSIC_WARN_TOL: f64 = 1e-9;

pub const SWEEP_CSV_HEADER: &str = "level_deg,trial,seed,method,err_x_mm,err_y_mm,err_z_mm,iterations,converged,guard_deg";

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_owned(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Write { path: path.to_owned(), source })
}

/// `points N` header followed by one `x y z` line per point, meters.
pub fn format_cloud(cloud: &PointCloud) -> String {
    let mut out = format!("points {}\n", cloud.len());
    for p in cloud.points() {
        writeln!(out, "{} {} {}", p.x, p.y, p.z).unwrap();
    }
    out
}

pub fn parse_cloud(text: &str) -> Result<PointCloud> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| CliError::Input("empty cloud file".into()))?;
    let declared: usize = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["points", n] => n.parse().map_err(|_| CliError::Input(format!("bad point count {n:?}")))?,
        _ => return Err(CliError::Input(format!("expected header `points N`, got {header:?}"))),
    };
    let mut points = Vec::with_capacity(declared);
    for (i, line) in lines {
        let values = parse_reals(line).map_err(|e| CliError::Input(format!("line {}: {e}", i + 1)))?;
        let [x, y, z] = values[..] else {
            return Err(CliError::Input(format!("line {}: expected 3 values, got {}", i + 1, values.len())));
        };
        points.push(Vec3::new(x, y, z));
    }
    if points.len() != declared {
        return Err(CliError::Input(format!("header declares {declared} points, body has {}", points.len())));
    }
    Ok(PointCloud::new(points)?)
}

pub fn read_cloud(path: &Path) -> Result<PointCloud> {
    parse_cloud(&read_text(path)?).map_err(|e| match e {
        CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Whitespace- or comma-separated finite reals.
pub fn parse_reals(text: &str) -> std::result::Result<Vec<f64>, String> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| match t.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(format!("not a finite number: {t:?}")),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDocument {
    pub units: String,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub x_ce: f64,
    pub y_ce: f64,
    pub z_cs: f64,
    pub z_es: f64,
    pub phi4_tilde: f64,
    pub t_c0v: [f64; 3],
}

impl ProfileDocument {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Input(format!("invalid profile: {e}")))
    }

    pub fn to_profile(&self) -> Result<CalibrationProfile> {
        if self.units != "m" {
            return Err(CliError::Input(format!("profile units must be \"m\", got {:?}", self.units)));
        }
        let k = OnAxisIntrinsics::new(self.fx, self.fy, self.cx, self.cy)?;
        let h0 = HomographyParams::new(self.x_ce, self.y_ce, self.z_cs, self.z_es)?;
        Ok(CalibrationProfile::new(k, h0, self.phi4_tilde, Vec3::from(self.t_c0v))?)
    }
}

pub fn read_profile(path: &Path) -> Result<CalibrationProfile> {
    ProfileDocument::parse(&read_text(path)?)?.to_profile()
}

/// Extrinsic as 12 row-major reals `[R | t]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParsedExtrinsic {
    pub transform: RigidTransform,
    /// Orthonormality drift of the supplied rotation block.
    pub drift: f64,
    pub reorthonormalized: bool,
}

pub fn parse_extrinsic(values: &[f64]) -> Result<ParsedExtrinsic> {
    if values.len() != 12 {
        return Err(CliError::Input(format!("extrinsic needs 12 values (row-major 3x4), got {}", values.len())));
    }
    let r = Mat3::from_fn(|i, j| values[4 * i + j]);
    let t = Vec3::new(values[3], values[7], values[11]);
    let drift = orthonormality_drift(&r);
    if drift > EXTRINSIC_REJECT_TOL {
        return Err(CliError::Input(format!("extrinsic rotation is not orthonormal (drift {drift:e})")));
    }
    if r.determinant() < 0.0 {
        return Err(CliError::Input("extrinsic rotation is a reflection".into()));
    }
    let reorthonormalized = drift > EXTRINSIC_WARN_TOL;
    let rotation = if reorthonormalized { Rotation::nearest(&r)? } else { Rotation::from_matrix(r)? };
    Ok(ParsedExtrinsic { transform: RigidTransform::new(rotation, t), drift, reorthonormalized })
}

pub fn extrinsic_values(x: &RigidTransform) -> [f64; 12] {
    let m = x.to_matrix();
    std::array::from_fn(|k| m[(k / 4, k % 4)])
}

/// Ground truth written next to a simulated pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthSidecar {
    /// Meters.
    pub phi_gt: [f64; 3],
    pub seed: u64,
    pub noise_deg: f64,
    pub phi4_tilde: f64,
    /// Row-major 3x4 `[R | t]`.
    pub x: Vec<f64>,
}

impl TruthSidecar {
    pub fn new(phi_gt: &ViewpointShift, seed: u64, noise_deg: f64, phi4_tilde: f64, x: &RigidTransform) -> Self {
        Self { phi_gt: phi_gt.to_vec().into(), seed, noise_deg, phi4_tilde, x: extrinsic_values(x).to_vec() }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("sidecar is always serializable")
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Input(format!("invalid ground-truth sidecar: {e}")))
    }
}

fn mm(v: f64) -> String {
    format!("{}", v * 1000.0)
}

/// Two rows per trial, rcICP first.
pub fn format_sweep_csv(records: &[TrialRecord], trials_per_level: usize) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for (i, r) in records.iter().enumerate() {
        let trial = i % trials_per_level;
        for (method, outcome) in [("rcicp", &r.rcicp), ("icp", &r.icp)] {
            let (err, iterations, converged) = match outcome {
                Ok(o) => ([mm(o.error.x), mm(o.error.y), mm(o.error.z)], o.iterations, o.converged),
                Err(_) => (["nan".into(), "nan".into(), "nan".into()], 0, false),
            };
            writeln!(
                out,
                "{},{trial},{},{method},{},{},{},{iterations},{converged},{}",
                r.rotation_deg, r.seed, err[0], err[1], err[2], r.guard_rotation_deg
            )
            .unwrap();
        }
    }
    out
}

/// Rounds to 9 significant digits and prints the shortest decimal of the rounded value.
pub fn sig9(v: f64) -> String {
    let rounded: f64 = format!("{v:.8e}").parse().expect("formatted float parses");
    format!("{}", rounded + 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cloud_round_trip_is_exact() {
        let cloud = PointCloud::new(vec![
            Vec3::new(0.1, -0.2, 0.5),
            Vec3::new(1.0 / 3.0, 2e-17, -7.25),
            Vec3::new(0.0, 0.0, 0.0),
        ])
        .unwrap();
        let text = format_cloud(&cloud);
        assert!(text.starts_with("points 3\n"));
        assert_eq!(parse_cloud(&text).unwrap(), cloud);
    }

    #[test]
    fn cloud_parse_errors() {
        assert!(parse_cloud("").is_err());
        assert!(parse_cloud("pts 1\n0 0 0\n").is_err());
        assert!(parse_cloud("points 2\n0 0 0\n").is_err());
        assert!(parse_cloud("points 1\n0 0\n").is_err());
        assert!(parse_cloud("points 1\n0 nan 0\n").is_err());
        assert!(parse_cloud("points 1\n0 0 x\n").is_err());
        assert_eq!(parse_cloud("points 1\n\n1 2 3\n\n").unwrap().len(), 1);
    }

    const PROFILE: &str = r#"
units = "m"
fx = 1200.0
fy = 1180.0
cx = 640.0
cy = 360.0
x_ce = 0.01
y_ce = -0.005
z_cs = 2.0
z_es = 2.02
phi4_tilde = 0.5
t_c0v = [0.0, 0.01, 0.0]
"#;

    #[test]
    fn profile_parses() {
        let p = read_profile_str(PROFILE).unwrap();
        assert_eq!(p.phi4_tilde, 0.5);
        assert_eq!(p.t_c0v, Vec3::new(0.0, 0.01, 0.0));
    }

    fn read_profile_str(s: &str) -> Result<CalibrationProfile> {
        ProfileDocument::parse(s)?.to_profile()
    }

    #[test]
    fn profile_rejects_unknown_missing_and_inconsistent() {
        assert!(read_profile_str(&format!("{PROFILE}extra = 1\n")).is_err());
        assert!(read_profile_str(&PROFILE.replace("fx = 1200.0\n", "")).is_err());
        assert!(read_profile_str(&PROFILE.replace("units = \"m\"", "units = \"mm\"")).is_err());
        assert!(read_profile_str(&PROFILE.replace("phi4_tilde = 0.5", "phi4_tilde = 0.4")).is_err());
    }

    #[test]
    fn extrinsic_validation() {
        let mut v = [1.0, 0.0, 0.0, 0.1, 0.0, 1.0, 0.0, 0.2, 0.0, 0.0, 1.0, 0.3];
        let x = parse_extrinsic(&v).unwrap();
        assert!(!x.reorthonormalized);
        assert_eq!(x.transform.translation, Vec3::new(0.1, 0.2, 0.3));
        assert_eq!(extrinsic_values(&x.transform), v);

        v[0] = 1.0 + 1e-7;
        let x = parse_extrinsic(&v).unwrap();
        assert!(x.reorthonormalized);
        assert!(orthonormality_drift(x.transform.rotation.matrix()) < 1e-12);

        v[0] = 1.0 + 1e-4;
        assert!(parse_extrinsic(&v).is_err());
        v[0] = -1.0;
        assert!(parse_extrinsic(&v).is_err());
        assert!(parse_extrinsic(&v[..11]).is_err());
    }

    #[test]
    fn significant_digits() {
        assert_eq!(sig9(1234.5), "1234.5");
        assert_eq!(sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(sig9(-2.0 / 3.0 * 1e6), "-666666.667");
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(-0.0), "0");
        assert_eq!(sig9(1.0), "1");
    }

    #[test]
    fn sidecar_round_trip() {
        let x = RigidTransform::from_translation(Vec3::new(0.1, 0.0, -0.2));
        let s = TruthSidecar::new(&ViewpointShift::new(0.01, -0.02, 0.003), 42, 5.0, 0.5, &x);
        assert_eq!(TruthSidecar::parse(&s.to_toml()).unwrap(), s);
    }
}
