//! Power-splitting SWIPT link budget: harvested relay power and the SINR of
//! every receiver, with the residual-interference terms of the imperfect-CSI
//! model broken out so tests can assert them term by term.
//!
//! Conventions: the energy harvester taps the physical (actual) channels
//! because energy arrives regardless of estimation quality, while the SINRs
//! split each link into its estimated part (desired signal) and residual
//! part (self-noise and leaked interference). The relay's information branch
//! keeps the fraction (1−ρ) of the received power; noise is referenced after
//! the split, so it carries no (1−ρ) factor.

use crate::channel::{ChannelRealization, Rx, Topology, Tx};
use crate::ia::BeamformerSet;
use crate::matrix::Matrix;

/// Transmit powers, noise power and the power-splitting parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerConfig {
    /// Transmit power of each primary transmitter (P₁ = P₂).
    pub p_primary: f64,
    /// Transmit power of the secondary source.
    pub p_source: f64,
    /// Common noise power at every receiver.
    pub sigma2: f64,
    /// Fraction of received power routed to the energy harvester, in (0, 1).
    pub rho: f64,
    /// Energy-conversion efficiency, in (0, 1].
    pub eta: f64,
}

impl PowerConfig {
    pub fn new(p_primary: f64, p_source: f64, sigma2: f64, rho: f64, eta: f64) -> Self {
        assert!(p_primary >= 0.0 && p_source >= 0.0, "powers must be nonnegative");
        assert!(sigma2 > 0.0, "noise power must be positive");
        assert!(rho > 0.0 && rho < 1.0, "rho must lie strictly inside (0, 1)");
        assert!(eta > 0.0 && eta <= 1.0, "eta must lie in (0, 1]");
        PowerConfig {
            p_primary,
            p_source,
            sigma2,
            rho,
            eta,
        }
    }
}

/// All per-trial SINRs plus the harvested relay power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrSample {
    pub gamma_relay: f64,
    pub gamma_dest: f64,
    /// `gamma_primary[slot][j]`.
    pub gamma_primary: [[f64; 2]; 2],
    pub p_relay_harvested: f64,
}

fn proj_power(u: &Matrix, h: &Matrix, v: &Matrix) -> f64 {
    u.adjoint().mul(h).mul(v).fro_norm_sqr()
}

/// Instantaneous power harvested by the relay during slot 1:
/// ηρ·(P_S/d^τ·‖H_{R,S}V_S‖² + Σᵢ Pᵢ/d^τ·‖H_{R,i}Vᵢ‖²) over the actual
/// channels, with the (negligible) noise-harvesting term dropped.
pub fn harvested_power(
    ch: &ChannelRealization,
    beams: &BeamformerSet,
    cfg: &PowerConfig,
    topo: &Topology,
) -> f64 {
    let mut sum = cfg.p_source / topo.pathloss(Rx::Relay, Tx::Source)
        * ch.relay_from_source.actual.mul(&beams.v_source).fro_norm_sqr();
    for i in 0..2 {
        sum += cfg.p_primary / topo.pathloss(Rx::Relay, Tx::primary(i))
            * ch.relay_from_primary[i]
                .actual
                .mul(&beams.v_primary[0][i])
                .fro_norm_sqr();
    }
    cfg.eta * cfg.rho * sum
}

/// Terms of the relay SINR: desired power over (self-residual + leaked
/// primary interference + noise).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayBudget {
    pub desired: f64,
    pub self_residual: f64,
    /// Residual interference from the primary transmitters (I_PN).
    pub primary_residual: f64,
    pub noise: f64,
}

impl RelayBudget {
    pub fn sinr(&self) -> f64 {
        self.desired / (self.self_residual + self.primary_residual + self.noise)
    }
}

pub fn relay_budget(
    ch: &ChannelRealization,
    beams: &BeamformerSet,
    cfg: &PowerConfig,
    topo: &Topology,
) -> RelayBudget {
    let lambda = ch.lambda;
    let split = 1.0 - cfg.rho;
    let one_plus = 1.0 + lambda;
    let c_source = cfg.p_source * split / topo.pathloss(Rx::Relay, Tx::Source);

    let desired = c_source / (one_plus * one_plus)
        * proj_power(&beams.u_relay, &ch.relay_from_source.estimated, &beams.v_source);
    let self_residual =
        c_source * proj_power(&beams.u_relay, &ch.relay_from_source.residual, &beams.v_source);
    let mut primary_residual = 0.0;
    for i in 0..2 {
        primary_residual += cfg.p_primary * split / topo.pathloss(Rx::Relay, Tx::primary(i))
            * proj_power(
                &beams.u_relay,
                &ch.relay_from_primary[i].residual,
                &beams.v_primary[0][i],
            );
    }
    RelayBudget {
        desired,
        self_residual,
        primary_residual,
        noise: cfg.sigma2,
    }
}

pub fn sinr_relay(
    ch: &ChannelRealization,
    beams: &BeamformerSet,
    cfg: &PowerConfig,
    topo: &Topology,
) -> f64 {
    relay_budget(ch, beams, cfg, topo).sinr()
}

/// Terms of the destination SINR. The destination sees no interference and
/// uses no suppressor; only the relay's channel-estimate residual and noise
/// sit under the desired beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DestinationBudget {
    pub desired: f64,
    pub self_residual: f64,
    pub noise: f64,
}

impl DestinationBudget {
    pub fn sinr(&self) -> f64 {
        self.desired / (self.self_residual + self.noise)
    }
}

/// `p_relay` must be the harvested power of the same realization.
pub fn destination_budget(
    ch: &ChannelRealization,
    beams: &BeamformerSet,
    cfg: &PowerConfig,
    topo: &Topology,
    p_relay: f64,
) -> DestinationBudget {
    let lambda = ch.lambda;
    let one_plus = 1.0 + lambda;
    let c_relay = p_relay / topo.pathloss(Rx::Destination, Tx::Relay);
    DestinationBudget {
        desired: c_relay / (one_plus * one_plus)
            * ch.dest_from_relay.estimated.mul(&beams.v_relay).fro_norm_sqr(),
        self_residual: c_relay
            * ch.dest_from_relay.residual.mul(&beams.v_relay).fro_norm_sqr(),
        noise: cfg.sigma2,
    }
}

pub fn sinr_destination(
    ch: &ChannelRealization,
    beams: &BeamformerSet,
    cfg: &PowerConfig,
    topo: &Topology,
    p_relay: f64,
) -> f64 {
    destination_budget(ch, beams, cfg, topo, p_relay).sinr()
}

/// Terms of a primary receiver's SINR in one slot: desired power over
/// (intra-primary residual B + secondary residual C + noise).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimaryBudget {
    pub desired: f64,
    /// Residual intra-primary leakage (own link plus the other transmitter).
    pub intra_residual: f64,
    /// Residual secondary leakage: the source in slot 1, the relay in slot 2.
    pub secondary_residual: f64,
    pub noise: f64,
}

impl PrimaryBudget {
    pub fn sinr(&self) -> f64 {
        self.desired / (self.intra_residual + self.secondary_residual + self.noise)
    }
}

/// `slot` is 0-based; for slot 1 (the relay's transmission) `p_relay` must be
/// the harvested power of the same realization.
pub fn primary_budget(
    ch: &ChannelRealization,
    beams: &BeamformerSet,
    cfg: &PowerConfig,
    topo: &Topology,
    slot: usize,
    j: usize,
    p_relay: f64,
) -> PrimaryBudget {
    assert!(slot < 2 && j < 2);
    let lambda = ch.lambda;
    let one_plus = 1.0 + lambda;
    let i = 1 - j;
    let rx = Rx::primary(j);
    let u = &beams.u_primary[slot][j];

    let c_own = cfg.p_primary / topo.pathloss(rx, Tx::primary(j));
    let desired =
        c_own / (one_plus * one_plus) * proj_power(u, &ch.pn[slot][j][j].estimated, &beams.v_primary[slot][j]);

    let intra_residual = c_own
        * proj_power(u, &ch.pn[slot][j][j].residual, &beams.v_primary[slot][j])
        + cfg.p_primary / topo.pathloss(rx, Tx::primary(i))
            * proj_power(u, &ch.pn[slot][j][i].residual, &beams.v_primary[slot][i]);

    let secondary_residual = if slot == 0 {
        cfg.p_source / topo.pathloss(rx, Tx::Source)
            * proj_power(u, &ch.primary_from_source[j].residual, &beams.v_source)
    } else {
        p_relay / topo.pathloss(rx, Tx::Relay)
            * proj_power(u, &ch.primary_from_relay[j].residual, &beams.v_relay)
    };

    PrimaryBudget {
        desired,
        intra_residual,
        secondary_residual,
        noise: cfg.sigma2,
    }
}

pub fn sinr_primary(
    ch: &ChannelRealization,
    beams: &BeamformerSet,
    cfg: &PowerConfig,
    topo: &Topology,
    slot: usize,
    j: usize,
    p_relay: f64,
) -> f64 {
    primary_budget(ch, beams, cfg, topo, slot, j, p_relay).sinr()
}

/// Evaluate the whole trial: harvested power first, then every SINR.
pub fn evaluate(
    ch: &ChannelRealization,
    beams: &BeamformerSet,
    cfg: &PowerConfig,
    topo: &Topology,
) -> SinrSample {
    let p_relay = harvested_power(ch, beams, cfg, topo);
    let gamma_primary = core::array::from_fn(|slot| {
        core::array::from_fn(|j| sinr_primary(ch, beams, cfg, topo, slot, j, p_relay))
    });
    SinrSample {
        gamma_relay: sinr_relay(ch, beams, cfg, topo),
        gamma_dest: sinr_destination(ch, beams, cfg, topo, p_relay),
        gamma_primary,
        p_relay_harvested: p_relay,
    }
}
