//! Parallel SNR sweeps with deterministic CSV assembly.
//!
//! Work is cut into fixed trial blocks per (scenario, SNR) point; a pool of
//! workers claims blocks from a shared counter and drops each result into
//! its preassigned slot. The final fold walks the slots in index order, so
//! the emitted CSV is byte-identical for any worker count.

use std::fmt;
use std::sync::OnceLock;
use std::sync::atomic::{AtomicUsize, Ordering};

use ialink_core::ber::{
    self, BlockStats, PointParams, PointResult, RunError, TRIAL_BLOCK, combine_blocks,
    point_from_stats,
};

use crate::config::{ConfigError, CsiEntry, ScenarioConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum SweepError {
    Config(ConfigError),
    Run { scenario: String, snr_db: f64, error: RunError },
}

impl fmt::Display for SweepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepError::Config(e) => e.fmt(f),
            SweepError::Run { scenario, snr_db, error } => {
                write!(f, "scenario {scenario} at {snr_db} dB failed: {error}")
            }
        }
    }
}

impl std::error::Error for SweepError {}

impl From<ConfigError> for SweepError {
    fn from(e: ConfigError) -> Self {
        SweepError::Config(e)
    }
}

/// Results of one CSI scenario over the SNR grid.
#[derive(Debug, Clone)]
pub struct ScenarioCurve {
    pub id: String,
    pub csi: CsiEntry,
    /// One entry per grid SNR, in grid order.
    pub points: Vec<PointResult>,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub csv: String,
    pub curves: Vec<ScenarioCurve>,
    pub seed: u64,
}

pub const CSV_HEADER: &str = "scenario_id,kappa,psi,snr_db,node,ber,ci_halfwidth,trials,rejected";

/// Node series emitted per point: the primary-user average plus the two
/// secondary nodes.
const CSV_SERIES: [&str; 3] = ["PU", "Relay", "Destination"];

fn block_layout(trials: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < trials {
        let len = TRIAL_BLOCK.min(trials - start);
        out.push((start, len));
        start += len;
    }
    out
}

/// Run every (scenario, SNR) point of the configuration. `threads = 0`
/// selects the machine's available parallelism.
pub fn run_sweep(cfg: &ScenarioConfig, threads: usize) -> Result<SweepOutput, SweepError> {
    cfg.validate()?;
    let topo = cfg.build_topology();
    let policy = cfg.rejection_policy();

    struct Job {
        params: PointParams,
        start: u64,
        len: u64,
        slot: usize,
    }

    let blocks = block_layout(cfg.trials);
    let mut jobs = Vec::with_capacity(cfg.csi.len() * cfg.snr_db.len() * blocks.len());
    for entry in &cfg.csi {
        for &snr_db in &cfg.snr_db {
            let (power, csi) = cfg.point_setup(entry, snr_db);
            let params = PointParams {
                topo: topo.clone(),
                power,
                csi,
                slot2: cfg.slot2_rule.into(),
                policy,
            };
            for &(start, len) in &blocks {
                let slot = jobs.len();
                jobs.push(Job {
                    params: params.clone(),
                    start,
                    len,
                    slot,
                });
            }
        }
    }

    let slots: Vec<OnceLock<Result<BlockStats, RunError>>> =
        (0..jobs.len()).map(|_| OnceLock::new()).collect();
    let next = AtomicUsize::new(0);
    let workers = if threads == 0 {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    } else {
        threads
    };

    std::thread::scope(|scope| {
        for _ in 0..workers.max(1) {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(idx) else { break };
                let result = ber::run_block(&job.params, cfg.seed, job.start, job.len);
                slots[job.slot].set(result).expect("each slot is filled once");
            });
        }
    });

    // Fold blocks per point in index order.
    let blocks_per_point = blocks.len();
    let mut curves: Vec<ScenarioCurve> = cfg
        .csi
        .iter()
        .map(|entry| ScenarioCurve {
            id: entry.id(),
            csi: *entry,
            points: Vec::with_capacity(cfg.snr_db.len()),
        })
        .collect();

    let mut slot = 0;
    for (si, entry) in cfg.csi.iter().enumerate() {
        for &snr_db in &cfg.snr_db {
            let mut stats = Vec::with_capacity(blocks_per_point);
            for _ in 0..blocks_per_point {
                let res = slots[slot].get().expect("worker filled slot");
                match res {
                    Ok(b) => stats.push(*b),
                    Err(e) => {
                        return Err(SweepError::Run {
                            scenario: entry.id(),
                            snr_db,
                            error: *e,
                        });
                    }
                }
                slot += 1;
            }
            let point = point_from_stats(&combine_blocks(&stats), snr_db, cfg.trials).map_err(
                |error| SweepError::Run {
                    scenario: entry.id(),
                    snr_db,
                    error,
                },
            )?;
            curves[si].points.push(point);
        }
    }

    let csv = render_csv(&curves);
    Ok(SweepOutput {
        csv,
        curves,
        seed: cfg.seed,
    })
}

fn render_csv(curves: &[ScenarioCurve]) -> String {
    let mut out = String::with_capacity(64 * curves.len() * 4);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for curve in curves {
        for point in &curve.points {
            let series = [&point.pu, &point.relay, &point.destination];
            for (name, p) in CSV_SERIES.iter().zip(series) {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    curve.id,
                    curve.csi.kappa,
                    curve.csi.psi,
                    p.snr_db,
                    name,
                    p.ber,
                    p.ci_halfwidth,
                    p.trials,
                    p.rejected
                ));
            }
        }
    }
    out
}
