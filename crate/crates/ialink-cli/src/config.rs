//! Scenario configuration: a single TOML file describing topology, powers,
//! CSI scenarios and the SNR grid, plus the built-in figure presets.
//!
//! The SNR axis maps to transmit power as P = snr_power_scale · θ · σ² with
//! θ = 10^(dB/10); the same θ drives the CSI error variance ψ·θ^(−κ). The
//! default scale of 350 is the calibration under which the simulator
//! reproduces the reference BER figures.

use std::fmt;
use std::str::FromStr;

use ialink_core::channel::{CsiParams, Rx, Topology, Tx};
use ialink_core::ia::{RejectionPolicy, Slot2Rule};
use ialink_core::link::PowerConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error at `{}`: {}", self.path, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    pub n_antennas: usize,
    /// Default distance for every link.
    pub distance: f64,
    /// Default path-loss exponent for every link.
    pub pathloss_exponent: f64,
    /// Per-link overrides, applied after the defaults.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<LinkOverride>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkOverride {
    /// One of: pu1, pu2, relay, destination.
    pub receiver: String,
    /// One of: pu1, pu2, source, relay.
    pub transmitter: String,
    pub distance: f64,
    pub pathloss_exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerSection {
    /// Power-splitting ratio routed to energy harvesting, in (0, 1).
    pub rho: f64,
    /// Energy-conversion efficiency, in (0, 1].
    pub eta: f64,
    /// Receiver noise power.
    pub sigma2: f64,
    /// Transmit power per unit of linear SNR: P = scale · θ · σ².
    pub snr_power_scale: f64,
}

/// One CSI scenario; ψ = 0 encodes perfect channel knowledge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsiEntry {
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub psi: f64,
}

impl CsiEntry {
    pub fn perfect() -> Self {
        CsiEntry { kappa: 0.0, psi: 0.0 }
    }

    pub fn mismatch(kappa: f64, psi: f64) -> Self {
        CsiEntry { kappa, psi }
    }

    pub fn is_perfect(&self) -> bool {
        self.psi == 0.0
    }

    pub fn params(&self, theta: f64) -> CsiParams {
        if self.is_perfect() {
            CsiParams::perfect(theta)
        } else {
            CsiParams::mismatch(self.psi, self.kappa, theta)
        }
    }

    pub fn id(&self) -> String {
        if self.is_perfect() {
            "perfect".to_string()
        } else {
            format!("k{}_psi{}", self.kappa, self.psi)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot2RuleConfig {
    SvdSeed,
    RandomSeed,
}

impl From<Slot2RuleConfig> for Slot2Rule {
    fn from(r: Slot2RuleConfig) -> Slot2Rule {
        match r {
            Slot2RuleConfig::SvdSeed => Slot2Rule::SvdSeed,
            Slot2RuleConfig::RandomSeed => Slot2Rule::RandomSeed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub topology: TopologySection,
    pub power: PowerSection,
    pub csi: Vec<CsiEntry>,
    /// SNR grid in dB, strictly increasing.
    pub snr_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub slot2_rule: Slot2RuleConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            topology: TopologySection {
                n_antennas: 2,
                distance: 3.0,
                pathloss_exponent: 2.7,
                overrides: Vec::new(),
            },
            power: PowerSection {
                rho: 0.75,
                eta: 0.8,
                sigma2: 1.0,
                snr_power_scale: 350.0,
            },
            csi: vec![CsiEntry::perfect()],
            snr_db: (0..=10).map(|k| 3.0 * k as f64).collect(),
            trials: 200_000,
            seed: 42,
            slot2_rule: Slot2RuleConfig::SvdSeed,
        }
    }
}

fn parse_rx(name: &str) -> Option<Rx> {
    match name {
        "pu1" => Some(Rx::Primary1),
        "pu2" => Some(Rx::Primary2),
        "relay" => Some(Rx::Relay),
        "destination" => Some(Rx::Destination),
        _ => None,
    }
}

fn parse_tx(name: &str) -> Option<Tx> {
    match name {
        "pu1" => Some(Tx::Primary1),
        "pu2" => Some(Tx::Primary2),
        "source" => Some(Tx::Source),
        "relay" => Some(Tx::Relay),
        _ => None,
    }
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

fn at_least(x: f64, bound: f64) -> bool {
    x.is_finite() && x >= bound
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let t = &self.topology;
        if t.n_antennas < 2 {
            return Err(ConfigError::new("topology.n_antennas", "must be at least 2"));
        }
        if !positive(t.distance) {
            return Err(ConfigError::new("topology.distance", "must be positive"));
        }
        if !at_least(t.pathloss_exponent, 2.0) {
            return Err(ConfigError::new(
                "topology.pathloss_exponent",
                "must be at least 2",
            ));
        }
        for (i, o) in t.overrides.iter().enumerate() {
            let path = format!("topology.overrides[{i}]");
            if parse_rx(&o.receiver).is_none() {
                return Err(ConfigError::new(
                    format!("{path}.receiver"),
                    "expected one of pu1, pu2, relay, destination",
                ));
            }
            if parse_tx(&o.transmitter).is_none() {
                return Err(ConfigError::new(
                    format!("{path}.transmitter"),
                    "expected one of pu1, pu2, source, relay",
                ));
            }
            if !positive(o.distance) {
                return Err(ConfigError::new(format!("{path}.distance"), "must be positive"));
            }
            if !at_least(o.pathloss_exponent, 2.0) {
                return Err(ConfigError::new(
                    format!("{path}.pathloss_exponent"),
                    "must be at least 2",
                ));
            }
        }

        let p = &self.power;
        if !positive(p.rho) || p.rho >= 1.0 {
            return Err(ConfigError::new("power.rho", "must lie strictly inside (0, 1)"));
        }
        if !positive(p.eta) || p.eta > 1.0 {
            return Err(ConfigError::new("power.eta", "must lie in (0, 1]"));
        }
        if !positive(p.sigma2) {
            return Err(ConfigError::new("power.sigma2", "must be positive"));
        }
        if !positive(p.snr_power_scale) {
            return Err(ConfigError::new("power.snr_power_scale", "must be positive"));
        }

        if self.csi.is_empty() {
            return Err(ConfigError::new("csi", "at least one CSI scenario required"));
        }
        for (i, c) in self.csi.iter().enumerate() {
            if !at_least(c.kappa, 0.0) {
                return Err(ConfigError::new(format!("csi[{i}].kappa"), "must be nonnegative"));
            }
            if !at_least(c.psi, 0.0) {
                return Err(ConfigError::new(format!("csi[{i}].psi"), "must be nonnegative"));
            }
            if c.psi == 0.0 && c.kappa != 0.0 {
                return Err(ConfigError::new(
                    format!("csi[{i}].kappa"),
                    "must be 0 when psi = 0 (perfect CSI)",
                ));
            }
        }

        if self.snr_db.is_empty() {
            return Err(ConfigError::new("snr_db", "SNR grid must not be empty"));
        }
        for (i, &s) in self.snr_db.iter().enumerate() {
            if !s.is_finite() {
                return Err(ConfigError::new(format!("snr_db[{i}]"), "must be finite"));
            }
            if i > 0 && s <= self.snr_db[i - 1] {
                return Err(ConfigError::new(
                    format!("snr_db[{i}]"),
                    "grid must be strictly increasing",
                ));
            }
        }

        if self.trials == 0 {
            return Err(ConfigError::new("trials", "must be at least 1"));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| ConfigError::new("<file>", e.message()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("scenario config serializes")
    }

    pub fn build_topology(&self) -> Topology {
        let t = &self.topology;
        let mut topo = Topology::homogeneous(t.n_antennas, t.distance, t.pathloss_exponent);
        for o in &t.overrides {
            let rx = parse_rx(&o.receiver).expect("validated receiver");
            let tx = parse_tx(&o.transmitter).expect("validated transmitter");
            topo.set_link(rx, tx, o.distance, o.pathloss_exponent);
        }
        topo
    }

    /// Resolve power and CSI at one grid point. θ = 10^(dB/10).
    pub fn point_setup(&self, csi: &CsiEntry, snr_db: f64) -> (PowerConfig, CsiParams) {
        let theta = 10.0_f64.powf(snr_db / 10.0);
        let p = self.power.snr_power_scale * theta * self.power.sigma2;
        let power = PowerConfig::new(p, p, self.power.sigma2, self.power.rho, self.power.eta);
        (power, csi.params(theta))
    }

    pub fn rejection_policy(&self) -> RejectionPolicy {
        RejectionPolicy::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetName {
    Fig2a,
    Fig2b,
    Fig3,
}

pub const PRESET_NAMES: [&str; 3] = ["fig2a", "fig2b", "fig3"];

impl FromStr for PresetName {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fig2a" => Ok(PresetName::Fig2a),
            "fig2b" => Ok(PresetName::Fig2b),
            "fig3" => Ok(PresetName::Fig3),
            other => Err(ConfigError::new(
                "preset",
                format!("unknown preset `{other}`; valid presets: {}", PRESET_NAMES.join(", ")),
            )),
        }
    }
}

/// Built-in scenario bundles matching the reference figures: `fig2a` sweeps
/// SNR under perfect CSI and two SNR-independent mismatch levels, `fig2b`
/// sweeps SNR under three SNR-dependent mismatch levels, and `fig3` holds
/// 20 dB while sweeping the mismatch parameters themselves.
pub fn preset(name: PresetName) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    match name {
        PresetName::Fig2a => {
            cfg.csi = vec![
                CsiEntry::perfect(),
                CsiEntry::mismatch(0.0, 0.001),
                CsiEntry::mismatch(0.0, 0.05),
            ];
        }
        PresetName::Fig2b => {
            cfg.csi = vec![
                CsiEntry::mismatch(0.75, 10.0),
                CsiEntry::mismatch(1.0, 10.0),
                CsiEntry::mismatch(1.5, 15.0),
            ];
        }
        PresetName::Fig3 => {
            cfg.snr_db = vec![20.0];
            let mut csi = Vec::new();
            // BER vs kappa at a few psi levels.
            for &psi in &[5.0, 10.0, 15.0] {
                for k in 0..=6 {
                    csi.push(CsiEntry::mismatch(0.5 * k as f64, psi));
                }
            }
            // BER vs psi at a few kappa levels.
            for &kappa in &[0.5, 1.0, 1.5] {
                for &psi in &[4.0, 8.0, 12.0, 16.0, 20.0] {
                    csi.push(CsiEntry::mismatch(kappa, psi));
                }
            }
            cfg.csi = csi;
        }
    }
    cfg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_round_trips() {
        let cfg = ScenarioConfig::default();
        cfg.validate().unwrap();
        let text = cfg.to_toml_string();
        let back = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn presets_round_trip() {
        for name in [PresetName::Fig2a, PresetName::Fig2b, PresetName::Fig3] {
            let cfg = preset(name);
            cfg.validate().unwrap();
            let back = ScenarioConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
            assert_eq!(cfg, back);
        }
    }

    #[test]
    fn preset_values_match_reference_parameters() {
        let a = preset(PresetName::Fig2a);
        assert_eq!(
            a.csi,
            vec![
                CsiEntry::perfect(),
                CsiEntry::mismatch(0.0, 0.001),
                CsiEntry::mismatch(0.0, 0.05)
            ]
        );
        assert_eq!(a.snr_db.first(), Some(&0.0));
        assert_eq!(a.snr_db.last(), Some(&30.0));
        assert_eq!(a.snr_db.len(), 11);

        let b = preset(PresetName::Fig2b);
        assert_eq!(
            b.csi,
            vec![
                CsiEntry::mismatch(0.75, 10.0),
                CsiEntry::mismatch(1.0, 10.0),
                CsiEntry::mismatch(1.5, 15.0)
            ]
        );
        assert_eq!(b.power.rho, 0.75);
        assert_eq!(b.power.eta, 0.8);
        assert_eq!(b.topology.distance, 3.0);
        assert_eq!(b.topology.pathloss_exponent, 2.7);

        let c = preset(PresetName::Fig3);
        assert_eq!(c.snr_db, vec![20.0]);
        assert_eq!(c.csi.len(), 36);
    }

    #[test]
    fn unknown_preset_lists_valid_names() {
        let err = "fig9".parse::<PresetName>().unwrap_err();
        assert!(err.message.contains("fig2a"));
        assert!(err.message.contains("fig3"));
    }

    #[test]
    fn empty_snr_grid_rejected_with_field_path() {
        let cfg = ScenarioConfig {
            snr_db: Vec::new(),
            ..Default::default()
        };
        let err = cfg.validate().unwrap_err();
        assert_eq!(err.path, "snr_db");
    }

    #[test]
    fn non_increasing_grid_rejected() {
        let cfg = ScenarioConfig {
            snr_db: vec![0.0, 3.0, 3.0],
            ..Default::default()
        };
        let err = cfg.validate().unwrap_err();
        assert_eq!(err.path, "snr_db[2]");
    }

    #[test]
    fn bad_rho_rejected() {
        let mut cfg = ScenarioConfig::default();
        cfg.power.rho = 1.0;
        assert_eq!(cfg.validate().unwrap_err().path, "power.rho");
    }

    #[test]
    fn perfect_entry_with_nonzero_kappa_rejected() {
        let cfg = ScenarioConfig {
            csi: vec![CsiEntry { kappa: 1.0, psi: 0.0 }],
            ..Default::default()
        };
        assert_eq!(cfg.validate().unwrap_err().path, "csi[0].kappa");
    }

    #[test]
    fn unknown_toml_key_rejected() {
        let mut text = ScenarioConfig::default().to_toml_string();
        text.push_str("\nbogus_key = 1\n");
        assert!(ScenarioConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn overrides_apply_to_topology() {
        let mut cfg = ScenarioConfig::default();
        cfg.topology.overrides.push(LinkOverride {
            receiver: "relay".into(),
            transmitter: "source".into(),
            distance: 5.0,
            pathloss_exponent: 3.0,
        });
        cfg.validate().unwrap();
        let topo = cfg.build_topology();
        assert_eq!(topo.distance(Rx::Relay, Tx::Source), 5.0);
        assert_eq!(topo.distance(Rx::Relay, Tx::Primary1), 3.0);
    }

    #[test]
    fn point_setup_maps_snr_to_power() {
        let cfg = ScenarioConfig::default();
        let (power, csi) = cfg.point_setup(&CsiEntry::mismatch(1.0, 10.0), 20.0);
        assert!((power.p_source - 350.0 * 100.0).abs() < 1e-9);
        assert!((csi.lambda - 0.1).abs() < 1e-12);
    }
}
