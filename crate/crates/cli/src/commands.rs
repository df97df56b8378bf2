use ostcal::display_model::{updated_projection, ViewpointShift, VIEWPOINT_SHIFT_SANITY_BOUND};
use ostcal::geometry::RigidTransform;
use ostcal::registration::{rcicp, rotation_guard, RcIcpOptions};
use ostcal::simulation::{
    build_scene, make_trial_pair, noise_seed, run_sweep, summarize, ExtrinsicPolicy, NoiseSpec, PhiPolicy, SweepConfig,
    SyntheticCloudSpec,
};

use crate::error::{CliError, Result};
use crate::formats::{
    format_cloud, format_sweep_csv, parse_extrinsic, parse_reals, read_cloud, read_profile, read_text, sig9, write_text,
    TruthSidecar,
};
use crate::{ExtrinsicArgs, GenCloudArgs, GuardCheckArgs, RegisterArgs, SimulateArgs, SweepArgs, UpdateProjectionArgs};

fn parse_phi_mm(text: &str) -> Result<ViewpointShift> {
    let v = parse_reals(text).map_err(|e| CliError::Input(format!("--phi-mm: {e}")))?;
    match v[..] {
        [a, b, c] => Ok(ViewpointShift::new(a / 1000.0, b / 1000.0, c / 1000.0)),
        _ => Err(CliError::Input(format!("--phi-mm needs 3 values, got {}", v.len()))),
    }
}

/// Warn on the vector length, which also covers every single component.
fn exceeds_sanity_bound(phi: &ViewpointShift) -> bool {
    phi.to_vec().norm() > VIEWPOINT_SHIFT_SANITY_BOUND
}

fn parse_range(text: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<&str> = text.split(':').collect();
    let values: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| CliError::Input(format!("--range must be start:stop:step, got {text:?}")))?;
    match values[..] {
        [start, stop, step] => Ok((start, stop, step)),
        _ => Err(CliError::Input(format!("--range must be start:stop:step, got {text:?}"))),
    }
}

fn read_extrinsic(args: &ExtrinsicArgs) -> Result<Option<RigidTransform>> {
    let text = match (&args.extrinsic, &args.extrinsic_file) {
        (Some(v), _) => v.clone(),
        (None, Some(path)) => read_text(path)?,
        (None, None) => return Ok(None),
    };
    let values = parse_reals(&text).map_err(|e| CliError::Input(format!("extrinsic: {e}")))?;
    let parsed = parse_extrinsic(&values)?;
    if parsed.reorthonormalized {
        eprintln!("warning: extrinsic rotation drifts {:e} from orthonormal; re-orthonormalized", parsed.drift);
    }
    Ok(Some(parsed.transform))
}

pub fn gen_cloud(a: GenCloudArgs) -> Result<()> {
    let spec = SyntheticCloudSpec {
        point_count: a.points,
        seed: a.seed,
        extent: a.extent,
        depth_jitter: a.depth_jitter,
        ..SyntheticCloudSpec::default()
    };
    let cloud = ostcal::simulation::generate_hand_cloud(&spec)?;
    write_text(&a.output, &format_cloud(&cloud))
}

pub fn simulate(a: SimulateArgs) -> Result<()> {
    let phi_policy = match &a.phi_mm {
        Some(text) => PhiPolicy::Fixed(parse_phi_mm(text)?),
        None => PhiPolicy::SeededRandom { max_abs: 0.02 },
    };
    let extrinsic_policy = match read_extrinsic(&a.extrinsic)? {
        Some(x) => ExtrinsicPolicy::Fixed(x),
        None => SweepConfig::default().extrinsic_policy,
    };
    let cfg = SweepConfig { phi_policy, extrinsic_policy, phi4_tilde: a.phi4_tilde, ..SweepConfig::default() };
    cfg.validate()?;
    let spec = SyntheticCloudSpec { point_count: a.points, ..SyntheticCloudSpec::default() };
    let scene = build_scene(&cfg, &spec, a.seed)?;
    let noise = NoiseSpec::new(a.noise_deg, noise_seed(a.seed, a.noise_deg))?;
    let pair = make_trial_pair(&scene.source, &scene.phi_gt, a.phi4_tilde, &scene.x, &noise)?;

    write_text(&a.source, &format_cloud(&pair.source))?;
    write_text(&a.target, &format_cloud(&pair.target))?;
    let truth = TruthSidecar::new(&scene.phi_gt, a.seed, a.noise_deg, a.phi4_tilde, &scene.x);
    write_text(&a.truth, &truth.to_toml())
}

pub fn register(a: RegisterArgs) -> Result<()> {
    let profile = read_profile(&a.profile)?;
    let truth = a.truth.as_deref().map(|p| TruthSidecar::parse(&read_text(p)?)).transpose()?;
    let x = match (read_extrinsic(&a.extrinsic)?, &truth) {
        (Some(x), _) => x,
        (None, Some(t)) => parse_extrinsic(&t.x)?.transform,
        (None, None) => {
            return Err(CliError::Input("an extrinsic is required (--extrinsic, --extrinsic-file or --truth)".into()))
        }
    };
    let source = read_cloud(&a.source)?;
    let target = read_cloud(&a.target)?;
    let opts = RcIcpOptions {
        max_iterations: a.max_iterations,
        convergence_ratio: a.convergence_ratio,
        rotation_guard_deg: a.guard_deg,
        ..RcIcpOptions::default()
    };
    let r = rcicp(&source, &target, &x, profile.phi4_tilde, &opts)?;
    let phi = r.phi.to_vec() * 1000.0;
    println!("phi_mm {:.6} {:.6} {:.6}", phi.x, phi.y, phi.z);
    println!("iterations {}", r.iterations);
    println!("converged {}", r.converged);
    println!("guard_deg {:.3}", r.guard_rotation_deg);
    if let Some(t) = &truth {
        let err = r.phi.abs_diff(&ViewpointShift::from_vec(&t.phi_gt.into())) * 1000.0;
        println!("phi_err_mm {:.6} {:.6} {:.6}", err.x, err.y, err.z);
    }
    if exceeds_sanity_bound(&r.phi) {
        eprintln!("warning: estimated viewpoint shift exceeds the 5 cm sanity bound");
    }
    if r.guard_accepted(a.guard_deg) {
        println!("guard accepted");
        Ok(())
    } else {
        println!("guard rejected");
        Err(CliError::GuardRejected { rotation_deg: r.guard_rotation_deg, threshold_deg: a.guard_deg })
    }
}

pub fn sweep(a: SweepArgs) -> Result<()> {
    let cfg = SweepConfig {
        rotation_range: parse_range(&a.range)?,
        trials_per_level: a.trials,
        base_seed: a.seed,
        phi4_tilde: a.phi4_tilde,
        ..SweepConfig::default()
    };
    let spec = SyntheticCloudSpec { point_count: a.points, ..SyntheticCloudSpec::default() };
    let records = run_sweep(&cfg, &spec, &RcIcpOptions::default())?;
    write_text(&a.output, &format_sweep_csv(&records, cfg.trials_per_level))?;

    let summary = summarize(&records)?;
    println!("level_deg rcicp_x_mm rcicp_y_mm rcicp_z_mm icp_x_mm icp_y_mm icp_z_mm failed");
    for level in &summary.levels {
        let cols = |s: Option<ostcal::simulation::ComponentStats>| match s {
            Some(s) => format!("{:.3} {:.3} {:.3}", s.median.x, s.median.y, s.median.z),
            None => "nan nan nan".into(),
        };
        println!(
            "{} {} {} {}",
            level.rotation_deg,
            cols(level.rcicp),
            cols(level.icp),
            level.rcicp_failures + level.icp_failures
        );
    }
    let show = |v: Option<f64>| v.map_or("none".to_string(), |t| t.to_string());
    println!("tolerance_angle_deg {}", show(summary.tolerance_angle_deg));
    println!("contiguous_tolerance_angle_deg {}", show(summary.contiguous_tolerance_deg));
    Ok(())
}

pub fn update_projection(a: UpdateProjectionArgs) -> Result<()> {
    let profile = read_profile(&a.profile)?;
    let phi = parse_phi_mm(&a.phi_mm)?;
    if exceeds_sanity_bound(&phi) {
        eprintln!("warning: viewpoint shift exceeds the 5 cm sanity bound; computing anyway");
    }
    let p1 = updated_projection(&profile, &phi);
    for row in 0..4 {
        let cells: Vec<String> = (0..4).map(|col| sig9(p1[(row, col)])).collect();
        println!("{}", cells.join(" "));
    }
    Ok(())
}

pub fn guard_check(a: GuardCheckArgs) -> Result<()> {
    let source = read_cloud(&a.source)?;
    let target = read_cloud(&a.target)?;
    if !(a.threshold_deg >= 0.0) {
        return Err(CliError::Input("--threshold-deg must be non-negative".into()));
    }
    let g = rotation_guard(&source, &target, a.threshold_deg)?;
    println!("rotation_deg {:.3}", g.rotation_deg);
    if g.accepted {
        println!("accepted");
        Ok(())
    } else {
        println!("rejected");
        Err(CliError::GuardRejected { rotation_deg: g.rotation_deg, threshold_deg: a.threshold_deg })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parsing() {
        assert_eq!(parse_range("0:60:5").unwrap(), (0.0, 60.0, 5.0));
        assert_eq!(parse_range("0.5:2:0.25").unwrap(), (0.5, 2.0, 0.25));
        assert!(parse_range("0:60").is_err());
        assert!(parse_range("a:b:c").is_err());
    }

    #[test]
    fn phi_parsing() {
        let phi = parse_phi_mm("10,-5, 2.5").unwrap();
        assert_eq!(phi, ViewpointShift::new(0.01, -0.005, 0.0025));
        assert!(parse_phi_mm("1,2").is_err());
    }
}
