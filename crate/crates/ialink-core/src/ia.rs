//! Interference-alignment beamforming for both transmission slots.
//!
//! Slot 1 (primary pair transmissions plus the source): the three precoders
//! are chained so that the two interference signals seen by each receiver
//! collapse into one direction, which the suppression matrices then null.
//! The seed direction is an eigenvector of the slot-1 alignment product.
//!
//! Slot 2 (primary pairs plus the relay, source silent): only the two
//! primary receivers carry alignment constraints, which leaves the relay
//! precoder free; it defaults to the dominant right singular direction of
//! the estimated relay→destination channel so the free dimension is spent
//! on beamforming gain at the suppressor-less destination.
//!
//! All beamformers are functions of the *estimated* channels only.

use core::fmt;

use crate::channel::ChannelRealization;
use crate::fp;
use crate::matrix::{Matrix, MatrixError, SINGULARITY_THRESHOLD};
use crate::rng::Stream;

/// How the free slot-2 relay precoder is seeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot2Rule {
    /// Dominant right singular direction of the estimated relay→destination
    /// channel (default).
    SvdSeed,
    /// Random unit-norm direction drawn from the trial stream.
    RandomSeed,
}

/// Numerical-quality gates applied before a realization is accepted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RejectionPolicy {
    /// Condition ceiling for every inverted channel matrix.
    pub max_condition: f64,
    /// Zero-forcing leakage ceiling, measured at unit channel scale (the
    /// estimated-channel leakage bound is this times √(1+λ)).
    pub max_leakage: f64,
    /// Floor on the smallest singular value of each desired effective
    /// channel, measured at unit channel scale.
    pub min_desired_sv: f64,
}

impl Default for RejectionPolicy {
    fn default() -> Self {
        RejectionPolicy {
            max_condition: SINGULARITY_THRESHOLD,
            max_leakage: 1e-11,
            min_desired_sv: 1e-6,
        }
    }
}

/// Why a channel realization was rejected (the caller redraws).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rejection {
    IllConditioned { cond: f64 },
    AlignmentLeakage { worst: f64 },
    RankDeficient { smallest_sv: f64 },
    EmptyNullSpace,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::IllConditioned { cond } => {
                write!(f, "channel draw too ill-conditioned (cond {cond:e})")
            }
            Rejection::AlignmentLeakage { worst } => {
                write!(f, "zero-forcing residual {worst:e} above tolerance")
            }
            Rejection::RankDeficient { smallest_sv } => {
                write!(f, "desired link lost rank (sigma_min {smallest_sv:e})")
            }
            Rejection::EmptyNullSpace => write!(f, "no interference-free subspace left"),
        }
    }
}

impl core::error::Error for Rejection {}

impl From<MatrixError> for Rejection {
    fn from(e: MatrixError) -> Self {
        match e {
            MatrixError::Singular { cond } => Rejection::IllConditioned { cond },
            MatrixError::EmptyNullSpace => Rejection::EmptyNullSpace,
            MatrixError::NonConvergence => Rejection::IllConditioned { cond: f64::INFINITY },
        }
    }
}

/// Precoders and suppression matrices for both slots, all N×f with f = 1
/// stream per link. Precoders satisfy trace(V Vᴴ) = 1; suppressors have
/// orthonormal columns.
#[derive(Debug, Clone)]
pub struct BeamformerSet {
    /// `v_primary[slot][i]`: precoder of primary transmitter i in the slot.
    pub v_primary: [[Matrix; 2]; 2],
    /// Source precoder (slot 1).
    pub v_source: Matrix,
    /// Relay precoder (slot 2).
    pub v_relay: Matrix,
    /// `u_primary[slot][j]`: suppressor of primary receiver j in the slot.
    pub u_primary: [[Matrix; 2]; 2],
    /// Relay suppressor (slot 1).
    pub u_relay: Matrix,
    /// Streams per link.
    pub streams: usize,
}

fn guarded_inverse(m: &Matrix, policy: &RejectionPolicy) -> Result<Matrix, Rejection> {
    let cond = m.cond_estimate();
    if cond.is_nan() || cond > policy.max_condition {
        return Err(Rejection::IllConditioned { cond });
    }
    Ok(m.inverse()?)
}

/// Slot-1 precoders (V₁ for each primary transmitter, V_S for the source).
///
/// The primary-1 precoder is the first eigenvector (under the kernel's
/// deterministic ordering) of
/// Z = H_{R,1}⁻¹ H_{R,2} H_{1,2}⁻¹ H_{1,S} H_{2,S}⁻¹ H_{2,1},
/// and the other two are chained through the alignment equalities so that
/// the interference pairs at each receiver become collinear.
pub fn slot1_precoders(
    ch: &ChannelRealization,
    policy: &RejectionPolicy,
) -> Result<(Matrix, Matrix, Matrix), Rejection> {
    let h_r1 = &ch.relay_from_primary[0].estimated;
    let h_r2 = &ch.relay_from_primary[1].estimated;
    let h_12 = &ch.pn[0][0][1].estimated;
    let h_21 = &ch.pn[0][1][0].estimated;
    let h_1s = &ch.primary_from_source[0].estimated;
    let h_2s = &ch.primary_from_source[1].estimated;

    let inv_r1 = guarded_inverse(h_r1, policy)?;
    let inv_r2 = guarded_inverse(h_r2, policy)?;
    let inv_12 = guarded_inverse(h_12, policy)?;
    let inv_2s = guarded_inverse(h_2s, policy)?;

    let z = inv_r1
        .mul(h_r2)
        .mul(&inv_12)
        .mul(h_1s)
        .mul(&inv_2s)
        .mul(h_21);
    let eig = z.eig().map_err(Rejection::from)?;
    let v1 = eig.vectors.col(0).normalized();
    let v2 = inv_r2.mul(h_r1).mul(&v1).normalized();
    let vs = inv_2s.mul(h_21).mul(&v1).normalized();
    Ok((v1, v2, vs))
}

/// Slot-1 suppressors: each is an orthonormal basis of the subspace
/// orthogonal to the (aligned) interference at its receiver, truncated to f
/// columns.
pub fn slot1_suppressors(
    ch: &ChannelRealization,
    v1: &Matrix,
    v2: &Matrix,
    streams: usize,
) -> Result<(Matrix, Matrix, Matrix), Rejection> {
    let u1 = suppressor_for(&ch.pn[0][0][1].estimated.mul(v2), streams)?;
    let u2 = suppressor_for(&ch.pn[0][1][0].estimated.mul(v1), streams)?;
    let ur = suppressor_for(&ch.relay_from_primary[0].estimated.mul(v1), streams)?;
    Ok((u1, u2, ur))
}

/// Slot-2 beamformers: the relay precoder seeds the slot, the two primary
/// precoders are chained to align with it, and the suppressors null the
/// aligned interference.
pub fn slot2_beamformers(
    ch: &ChannelRealization,
    rule: Slot2Rule,
    rng: &mut Stream,
    policy: &RejectionPolicy,
    streams: usize,
) -> Result<(Matrix, Matrix, Matrix, Matrix, Matrix), Rejection> {
    let n = ch.dest_from_relay.estimated.rows();
    let v_relay = match rule {
        Slot2Rule::SvdSeed => ch
            .dest_from_relay
            .estimated
            .dominant_right_singular_vector()
            .normalized(),
        Slot2Rule::RandomSeed => {
            Matrix::from_fn(n, 1, |_, _| rng.complex_gaussian(1.0)).normalized()
        }
    };

    let h2_12 = &ch.pn[1][0][1].estimated;
    let h2_21 = &ch.pn[1][1][0].estimated;
    let h_1r = &ch.primary_from_relay[0].estimated;
    let h_2r = &ch.primary_from_relay[1].estimated;

    let inv_12 = guarded_inverse(h2_12, policy)?;
    let inv_21 = guarded_inverse(h2_21, policy)?;

    let v2 = inv_12.mul(h_1r).mul(&v_relay).normalized();
    let v1 = inv_21.mul(h_2r).mul(&v_relay).normalized();
    let u1 = suppressor_for(&h_1r.mul(&v_relay), streams)?;
    let u2 = suppressor_for(&h_2r.mul(&v_relay), streams)?;
    Ok((v1, v2, v_relay, u1, u2))
}

fn suppressor_for(interference: &Matrix, streams: usize) -> Result<Matrix, Rejection> {
    let basis = interference.adjoint().nullspace()?;
    if basis.cols() < streams {
        return Err(Rejection::EmptyNullSpace);
    }
    if basis.cols() == streams {
        return Ok(basis);
    }
    Ok(Matrix::from_fn(basis.rows(), streams, |r, c| basis[(r, c)]))
}

/// Which side of each link triple the verifier reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelView {
    Estimated,
    Actual,
}

/// Residuals of every zero-forcing condition plus the desired-link rank
/// margins. `zero_forcing` holds, in order: the four cross-primary
/// conditions (slot 1 j=1,2 then slot 2 j=1,2), the four secondary-to-
/// primary conditions (source slot 1 j=1,2; relay slot 2 j=1,2), and the
/// two primary-to-relay conditions. `desired_sv` holds the smallest
/// singular values of the four primary desired links (slot-major) and the
/// relay desired link.
#[derive(Debug, Clone)]
pub struct AlignmentReport {
    pub zero_forcing: [f64; 10],
    pub desired_sv: [f64; 5],
    pub max_leakage: f64,
    pub min_desired_sv: f64,
    pub rank_ok: bool,
}

/// Rank margins below this fail the rank flags in [`AlignmentReport`].
pub const RANK_TOL: f64 = 1e-6;

pub fn verify_alignment(
    ch: &ChannelRealization,
    beams: &BeamformerSet,
    view: ChannelView,
) -> AlignmentReport {
    let pick = |link: &crate::channel::LinkChannel| -> Matrix {
        match view {
            ChannelView::Estimated => link.estimated.clone(),
            ChannelView::Actual => link.actual.clone(),
        }
    };

    let mut zf = [0.0f64; 10];
    let mut idx = 0;
    // Cross-primary interference, both slots.
    for slot in 0..2 {
        for j in 0..2 {
            let i = 1 - j;
            let h = pick(&ch.pn[slot][j][i]);
            zf[idx] = beams.u_primary[slot][j]
                .adjoint()
                .mul(&h)
                .mul(&beams.v_primary[slot][i])
                .fro_norm();
            idx += 1;
        }
    }
    // Secondary interference at the primary receivers: source in slot 1,
    // relay in slot 2.
    for j in 0..2 {
        let h = pick(&ch.primary_from_source[j]);
        zf[idx] = beams.u_primary[0][j]
            .adjoint()
            .mul(&h)
            .mul(&beams.v_source)
            .fro_norm();
        idx += 1;
    }
    for j in 0..2 {
        let h = pick(&ch.primary_from_relay[j]);
        zf[idx] = beams.u_primary[1][j]
            .adjoint()
            .mul(&h)
            .mul(&beams.v_relay)
            .fro_norm();
        idx += 1;
    }
    // Primary interference at the relay (slot 1).
    for i in 0..2 {
        let h = pick(&ch.relay_from_primary[i]);
        zf[idx] = beams
            .u_relay
            .adjoint()
            .mul(&h)
            .mul(&beams.v_primary[0][i])
            .fro_norm();
        idx += 1;
    }

    let mut desired = [0.0f64; 5];
    let mut d = 0;
    for slot in 0..2 {
        for j in 0..2 {
            let h = pick(&ch.pn[slot][j][j]);
            let eff = beams.u_primary[slot][j]
                .adjoint()
                .mul(&h)
                .mul(&beams.v_primary[slot][j]);
            desired[d] = *eff.svd().values.last().unwrap();
            d += 1;
        }
    }
    let eff_relay = beams
        .u_relay
        .adjoint()
        .mul(&pick(&ch.relay_from_source))
        .mul(&beams.v_source);
    desired[4] = *eff_relay.svd().values.last().unwrap();

    let max_leakage = zf.iter().fold(0.0f64, |m, &x| m.max(x));
    let min_desired_sv = desired.iter().fold(f64::INFINITY, |m, &x| m.min(x));
    AlignmentReport {
        zero_forcing: zf,
        desired_sv: desired,
        max_leakage,
        min_desired_sv,
        rank_ok: min_desired_sv > RANK_TOL,
    }
}

/// Full pipeline: slot-1 precoders and suppressors, slot-2 beamformers, then
/// the acceptance gates of the rejection policy (condition ceilings inside
/// the constructions, leakage and rank-margin checks here).
pub fn build_beamformers(
    ch: &ChannelRealization,
    rule: Slot2Rule,
    rng: &mut Stream,
    policy: &RejectionPolicy,
) -> Result<BeamformerSet, Rejection> {
    let streams = 1;
    let (v1_1, v2_1, v_source) = slot1_precoders(ch, policy)?;
    let (u1_1, u2_1, u_relay) = slot1_suppressors(ch, &v1_1, &v2_1, streams)?;
    let (v1_2, v2_2, v_relay, u1_2, u2_2) = slot2_beamformers(ch, rule, rng, policy, streams)?;

    let beams = BeamformerSet {
        v_primary: [[v1_1, v2_1], [v1_2, v2_2]],
        v_source,
        v_relay,
        u_primary: [[u1_1, u2_1], [u1_2, u2_2]],
        u_relay,
        streams,
    };

    // Gates are checked at unit channel scale so the accept/reject decision
    // is identical across CSI scenarios sharing the same raw draws.
    let scale = fp::sqrt(1.0 + ch.lambda);
    let report = verify_alignment(ch, &beams, ChannelView::Estimated);
    if report.max_leakage > policy.max_leakage * scale {
        return Err(Rejection::AlignmentLeakage {
            worst: report.max_leakage,
        });
    }
    if report.min_desired_sv <= policy.min_desired_sv * scale {
        return Err(Rejection::RankDeficient {
            smallest_sv: report.min_desired_sv,
        });
    }
    Ok(beams)
}
