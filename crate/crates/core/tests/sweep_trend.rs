use ostcal::geometry::Vec3;
use ostcal::registration::RcIcpOptions;
use ostcal::simulation::{run_sweep, summarize, SweepConfig, SyntheticCloudSpec};

/// Per-level median rcICP error rises with the noise level, allowing one
/// inversion in any window of five consecutive levels.
#[test]
fn default_sweep_median_error_rises_with_noise() {
    let cfg = SweepConfig::default();
    let records = run_sweep(&cfg, &SyntheticCloudSpec::default(), &RcIcpOptions::default()).unwrap();
    let summary = summarize(&records).unwrap();
    let medians: Vec<Vec3> = summary.levels.iter().map(|l| l.rcicp.expect("level without results").median).collect();
    for k in 0..3 {
        let inversions: Vec<bool> = medians.windows(2).map(|w| w[1][k] < w[0][k]).collect();
        for (start, window) in inversions.windows(4).enumerate() {
            let count = window.iter().filter(|&&x| x).count();
            assert!(
                count <= 1,
                "phi{} medians invert {count} times in levels {}..={}: {:?}",
                k + 1,
                summary.levels[start].rotation_deg,
                summary.levels[start + 4].rotation_deg,
                medians.iter().map(|m| m[k]).collect::<Vec<_>>()
            );
        }
    }
}
