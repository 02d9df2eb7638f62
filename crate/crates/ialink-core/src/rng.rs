//! Seedable random streams for the Monte Carlo loops.
//!
//! Each stream is a xoshiro256++ generator whose state is expanded with
//! splitmix64 from a list of seed words (master seed, trial index, attempt
//! index, domain tag, ...). Deriving a fresh stream per trial makes results
//! independent of how trials are scheduled across workers.

use crate::fp;
use crate::matrix::C64;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A deterministic xoshiro256++ stream.
#[derive(Debug, Clone)]
pub struct Stream {
    s: [u64; 4],
}

impl Stream {
    /// Derive a stream from a list of seed words. Different word lists give
    /// statistically independent streams.
    pub fn from_words(words: &[u64]) -> Self {
        let mut acc = 0x6C62_272E_07BB_0142u64;
        for &w in words {
            acc ^= w;
            acc = splitmix64(&mut acc);
        }
        let mut s = [0u64; 4];
        for lane in s.iter_mut() {
            *lane = splitmix64(&mut acc);
        }
        if s == [0; 4] {
            s[0] = GOLDEN;
        }
        Stream { s }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.s;
        let result = s[0].wrapping_add(s[3]).rotate_left(23).wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform in [0, 1) with 53 random bits.
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// A fair coin, used for BPSK symbols.
    pub fn bit(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }

    /// Two independent standard normals (Marsaglia polar method).
    pub fn standard_normal_pair(&mut self) -> (f64, f64) {
        loop {
            let u = 2.0 * self.unit_f64() - 1.0;
            let v = 2.0 * self.unit_f64() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let m = fp::sqrt(-2.0 * fp::log(s) / s);
                return (u * m, v * m);
            }
        }
    }

    /// Real N(0, variance).
    pub fn real_gaussian(&mut self, variance: f64) -> f64 {
        debug_assert!(variance >= 0.0);
        self.standard_normal_pair().0 * fp::sqrt(variance)
    }

    /// Circularly symmetric complex Gaussian CN(0, variance).
    pub fn complex_gaussian(&mut self, variance: f64) -> C64 {
        debug_assert!(variance >= 0.0);
        let (re, im) = self.standard_normal_pair();
        let scale = fp::sqrt(variance * 0.5);
        C64::new(re * scale, im * scale)
    }
}
