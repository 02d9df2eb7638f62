//! Rayleigh channel generation with path loss and the imperfect-CSI model.
//!
//! Every link is drawn as a triple (estimated, residual, actual): the
//! receiver works with the estimated matrix, the residual is the part of
//! the true channel it cannot see, and the actual channel is their exact
//! algebraic combination
//!
//! ```text
//! H = Ĥ / (1 + λ) + H̃,   Ĥ ~ CN(0, 1+λ),   H̃ ~ CN(0, λ/(1+λ)),
//! ```
//!
//! so the actual entries are marginally CN(0, 1) and an error variance of
//! λ = 0 collapses the triple to a perfectly known channel. λ follows the
//! power law ψ·θ^(−κ) in the operating SNR θ.

use crate::fp;
use crate::matrix::Matrix;
use crate::rng::Stream;

/// Receiver-side node index for topology lookups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rx {
    Primary1 = 0,
    Primary2 = 1,
    Relay = 2,
    Destination = 3,
}

/// Transmitter-side node index for topology lookups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tx {
    Primary1 = 0,
    Primary2 = 1,
    Source = 2,
    Relay = 3,
}

impl Rx {
    pub fn primary(j: usize) -> Rx {
        match j {
            0 => Rx::Primary1,
            1 => Rx::Primary2,
            _ => panic!("primary receiver index must be 0 or 1"),
        }
    }
}

impl Tx {
    pub fn primary(i: usize) -> Tx {
        match i {
            0 => Tx::Primary1,
            1 => Tx::Primary2,
            _ => panic!("primary transmitter index must be 0 or 1"),
        }
    }
}

/// Antenna count plus per-link distance and path-loss exponent tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    n_antennas: usize,
    distance: [[f64; 4]; 4],
    exponent: [[f64; 4]; 4],
}

impl Topology {
    /// All links share one distance and exponent.
    pub fn homogeneous(n_antennas: usize, distance: f64, exponent: f64) -> Self {
        assert!(n_antennas >= 2, "at least two antennas per node");
        assert!(distance > 0.0, "distances must be positive");
        assert!(exponent >= 2.0, "path-loss exponents must be at least 2");
        Topology {
            n_antennas,
            distance: [[distance; 4]; 4],
            exponent: [[exponent; 4]; 4],
        }
    }

    pub fn set_link(&mut self, rx: Rx, tx: Tx, distance: f64, exponent: f64) {
        assert!(distance > 0.0, "distances must be positive");
        assert!(exponent >= 2.0, "path-loss exponents must be at least 2");
        self.distance[rx as usize][tx as usize] = distance;
        self.exponent[rx as usize][tx as usize] = exponent;
    }

    pub fn n_antennas(&self) -> usize {
        self.n_antennas
    }

    pub fn distance(&self, rx: Rx, tx: Tx) -> f64 {
        self.distance[rx as usize][tx as usize]
    }

    pub fn exponent(&self, rx: Rx, tx: Tx) -> f64 {
        self.exponent[rx as usize][tx as usize]
    }

    /// d^τ for the link, i.e. the power attenuation divisor.
    pub fn pathloss(&self, rx: Rx, tx: Tx) -> f64 {
        fp::pow(self.distance(rx, tx), self.exponent(rx, tx))
    }
}

/// Amplitude scaling √(P / d^τ) seen after propagation.
pub fn pathloss_amplitude(power: f64, distance: f64, exponent: f64) -> f64 {
    assert!(power >= 0.0, "power must be nonnegative");
    assert!(distance > 0.0, "distance must be positive");
    fp::sqrt(power / fp::pow(distance, exponent))
}

/// CSI error variance λ = ψ·θ^(−κ).
pub fn error_variance(psi: f64, kappa: f64, theta: f64) -> f64 {
    assert!(psi > 0.0, "psi must be positive");
    assert!(kappa >= 0.0, "kappa must be nonnegative");
    assert!(theta > 0.0, "theta must be positive");
    psi * fp::pow(theta, -kappa)
}

/// CSI mismatch scenario bound to an operating SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsiParams {
    pub psi: f64,
    pub kappa: f64,
    pub theta: f64,
    pub lambda: f64,
}

impl CsiParams {
    pub fn mismatch(psi: f64, kappa: f64, theta: f64) -> Self {
        CsiParams {
            psi,
            kappa,
            theta,
            lambda: error_variance(psi, kappa, theta),
        }
    }

    /// Perfect channel knowledge (λ = 0), encoded as ψ = 0.
    pub fn perfect(theta: f64) -> Self {
        CsiParams {
            psi: 0.0,
            kappa: 0.0,
            theta,
            lambda: 0.0,
        }
    }

    pub fn is_perfect(&self) -> bool {
        self.lambda == 0.0
    }
}

/// One physical link: the receiver's channel estimate, the residual error
/// invisible to it, and the actual channel the waveform propagates through.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkChannel {
    pub estimated: Matrix,
    pub residual: Matrix,
    pub actual: Matrix,
}

impl LinkChannel {
    fn draw(rng: &mut Stream, n: usize, lambda: f64) -> Self {
        // Raw unit-variance draws are consumed for both parts even at λ = 0
        // so streams stay aligned across CSI scenarios sharing a seed.
        let raw_est = Matrix::from_fn(n, n, |_, _| rng.complex_gaussian(1.0));
        let raw_res = Matrix::from_fn(n, n, |_, _| rng.complex_gaussian(1.0));
        let estimated = raw_est.scale_re(fp::sqrt(1.0 + lambda));
        let residual = raw_res.scale_re(fp::sqrt(lambda / (1.0 + lambda)));
        let actual = estimated.scale_re(1.0 / (1.0 + lambda)).add(&residual);
        LinkChannel {
            estimated,
            residual,
            actual,
        }
    }
}

/// Every channel matrix of one Monte Carlo trial. Primary-network links are
/// redrawn per slot; cross-network and secondary links hold for the block.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// `pn[slot][j][i]`: primary receiver j from primary transmitter i.
    pub pn: [[[LinkChannel; 2]; 2]; 2],
    /// Relay from the secondary source (slot 1).
    pub relay_from_source: LinkChannel,
    /// Relay from primary transmitter i (slot 1).
    pub relay_from_primary: [LinkChannel; 2],
    /// Destination from the relay (slot 2).
    pub dest_from_relay: LinkChannel,
    /// Primary receiver j from the secondary source (slot 1).
    pub primary_from_source: [LinkChannel; 2],
    /// Primary receiver j from the relay (slot 2).
    pub primary_from_relay: [LinkChannel; 2],
    pub lambda: f64,
}

/// Draw a full realization. The draw order is fixed (primary slot 1 and 2 in
/// row-major (j, i) order, then the secondary and cross links), so a given
/// stream always produces the same realization.
pub fn draw_realization(rng: &mut Stream, topo: &Topology, csi: &CsiParams) -> ChannelRealization {
    let n = topo.n_antennas();
    let lambda = csi.lambda;
    let mut link = || LinkChannel::draw(rng, n, lambda);
    let pn = core::array::from_fn(|_slot| {
        core::array::from_fn(|_j| core::array::from_fn(|_i| link()))
    });
    ChannelRealization {
        pn,
        relay_from_source: link(),
        relay_from_primary: core::array::from_fn(|_| link()),
        dest_from_relay: link(),
        primary_from_source: core::array::from_fn(|_| link()),
        primary_from_relay: core::array::from_fn(|_| link()),
        lambda,
    }
}

impl ChannelRealization {
    /// Iterate over all link triples (for tests and diagnostics).
    pub fn links(&self) -> impl Iterator<Item = &LinkChannel> {
        self.pn
            .iter()
            .flat_map(|slot| slot.iter().flat_map(|row| row.iter()))
            .chain(core::iter::once(&self.relay_from_source))
            .chain(self.relay_from_primary.iter())
            .chain(core::iter::once(&self.dest_from_relay))
            .chain(self.primary_from_source.iter())
            .chain(self.primary_from_relay.iter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_variance_power_law() {
        assert!((error_variance(10.0, 1.0, 100.0) - 0.1).abs() < 1e-15);
        // kappa = 0 removes the SNR dependence.
        assert!((error_variance(0.05, 0.0, 3.0) - 0.05).abs() < 1e-16);
        assert!((error_variance(0.05, 0.0, 30000.0) - 0.05).abs() < 1e-16);
        // Scalar oracle: 15 * 1000^-1.5 = 15 / (1000 * sqrt(1000)).
        let expected = 15.0 / (1000.0 * 1000.0_f64.sqrt());
        let got = error_variance(15.0, 1.5, 1000.0);
        assert!((got - expected).abs() < 1e-18);
        assert!((got - 4.743e-4).abs() < 1e-6);
    }

    #[test]
    #[should_panic(expected = "psi must be positive")]
    fn error_variance_rejects_nonpositive_psi() {
        error_variance(0.0, 1.0, 10.0);
    }

    #[test]
    fn pathloss_amplitude_examples() {
        assert!((pathloss_amplitude(1.0, 1.0, 2.7) - 1.0).abs() < 1e-15);
        assert_eq!(pathloss_amplitude(0.0, 3.0, 2.7), 0.0);
        // 3^2.7 ≈ 19.419, so the amplitude is ≈ 0.2269.
        let got = pathloss_amplitude(1.0, 3.0, 2.7);
        let exact = (1.0 / 3.0f64.powf(2.7)).sqrt();
        assert!((got - exact).abs() < 1e-15, "got {got}");
        assert!((got - 0.2269).abs() < 1e-4, "got {got}");
    }

    #[test]
    fn perfect_csi_collapses_the_triple() {
        let topo = Topology::homogeneous(2, 3.0, 2.7);
        let csi = CsiParams::perfect(100.0);
        let mut rng = Stream::from_words(&[1]);
        let ch = draw_realization(&mut rng, &topo, &csi);
        for link in ch.links() {
            assert_eq!(link.residual, Matrix::zeros(2, 2));
            assert_eq!(link.actual, link.estimated);
        }
    }

    #[test]
    fn fixed_seed_reproduces_realization() {
        let topo = Topology::homogeneous(2, 3.0, 2.7);
        let csi = CsiParams::mismatch(10.0, 1.0, 100.0);
        let a = draw_realization(&mut Stream::from_words(&[9, 1]), &topo, &csi);
        let b = draw_realization(&mut Stream::from_words(&[9, 1]), &topo, &csi);
        for (la, lb) in a.links().zip(b.links()) {
            assert_eq!(la, lb);
        }
    }

    #[test]
    fn decomposition_identity_is_exact() {
        let topo = Topology::homogeneous(2, 3.0, 2.7);
        let csi = CsiParams::mismatch(10.0, 0.75, 31.6);
        let lambda = csi.lambda;
        for seed in 0..50 {
            let mut rng = Stream::from_words(&[7, seed]);
            let ch = draw_realization(&mut rng, &topo, &csi);
            for link in ch.links() {
                let recomposed = link.estimated.scale_re(1.0 / (1.0 + lambda)).add(&link.residual);
                assert_eq!(link.actual, recomposed);
            }
        }
    }

    #[test]
    fn entry_variances_match_the_model() {
        let topo = Topology::homogeneous(2, 3.0, 2.7);
        let csi = CsiParams::mismatch(10.0, 1.0, 100.0); // lambda = 0.1
        let lambda = csi.lambda;
        let mut actual_power = 0.0;
        let mut est_power = 0.0;
        let mut res_power = 0.0;
        let mut cross = C64Acc::default();
        let mut count = 0usize;
        for trial in 0..4000u64 {
            let mut rng = Stream::from_words(&[11, trial]);
            let ch = draw_realization(&mut rng, &topo, &csi);
            for link in ch.links() {
                for k in 0..4 {
                    let e = link.estimated.data()[k];
                    let r = link.residual.data()[k];
                    let a = link.actual.data()[k];
                    est_power += e.norm_sqr();
                    res_power += r.norm_sqr();
                    actual_power += a.norm_sqr();
                    cross.re += e.re * r.re + e.im * r.im;
                    count += 1;
                }
            }
        }
        let n = count as f64;
        let est_var = est_power / n;
        let res_var = res_power / n;
        let actual_var = actual_power / n;
        assert!((actual_var - 1.0).abs() < 0.01, "actual var {actual_var}");
        assert!(
            (est_var - (1.0 + lambda)).abs() < 0.011 * (1.0 + lambda),
            "estimated var {est_var}"
        );
        assert!(
            (res_var - lambda / (1.0 + lambda)).abs() < 0.01 * lambda,
            "residual var {res_var}"
        );
        // Independence surrogate: the normalized cross-moment stays within
        // 3/sqrt(#samples).
        let corr = cross.re / n / (est_var * res_var).sqrt();
        assert!(corr.abs() <= 3.0 / n.sqrt(), "corr {corr}");
    }

    #[derive(Default)]
    struct C64Acc {
        re: f64,
    }
}
