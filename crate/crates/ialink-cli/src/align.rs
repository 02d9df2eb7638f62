//! Alignment diagnostics: draw realizations, build beamformers, and report
//! the worst zero-forcing residual plus the rejection rate.

use ialink_core::ber::trial_stream;
use ialink_core::channel::{CsiParams, draw_realization};
use ialink_core::ia::{ChannelView, build_beamformers, verify_alignment};

use crate::config::{ConfigError, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignReport {
    pub draws: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub max_leakage: f64,
    pub min_desired_sv: f64,
}

impl AlignReport {
    pub fn rejection_rate(&self) -> f64 {
        self.rejected as f64 / (self.accepted + self.rejected).max(1) as f64
    }
}

/// Check `n_draws` accepted realizations under the configured topology with
/// perfect CSI (alignment is built from estimated channels, so the CSI
/// scenario only rescales them).
pub fn align_check(cfg: &ScenarioConfig, n_draws: u64) -> Result<AlignReport, ConfigError> {
    cfg.validate()?;
    assert!(n_draws >= 1, "at least one draw required");
    let topo = cfg.build_topology();
    let policy = cfg.rejection_policy();
    let csi = CsiParams::perfect(1.0);

    let mut accepted = 0u64;
    let mut rejected = 0u64;
    let mut max_leakage = 0.0f64;
    let mut min_desired_sv = f64::INFINITY;
    for trial in 0..n_draws {
        for attempt in 0.. {
            let mut stream = trial_stream(cfg.seed, trial, attempt);
            let ch = draw_realization(&mut stream, &topo, &csi);
            match build_beamformers(&ch, cfg.slot2_rule.into(), &mut stream, &policy) {
                Ok(beams) => {
                    let report = verify_alignment(&ch, &beams, ChannelView::Estimated);
                    max_leakage = max_leakage.max(report.max_leakage);
                    min_desired_sv = min_desired_sv.min(report.min_desired_sv);
                    accepted += 1;
                    break;
                }
                Err(_) => rejected += 1,
            }
        }
    }
    Ok(AlignReport {
        draws: n_draws,
        accepted,
        rejected,
        max_leakage,
        min_desired_sv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_aligns_cleanly() {
        let cfg = ScenarioConfig::default();
        let report = align_check(&cfg, 2000).unwrap();
        assert_eq!(report.accepted, 2000);
        assert!(report.max_leakage <= 1e-10, "leakage {}", report.max_leakage);
        assert!(report.rejection_rate() < 1e-3);
    }
}
