//! Keyed counter-based random streams.
//!
//! Every random draw in the simulator is a pure function of an
//! [`RngStreamKey`]. The key is fed to the Philox4x64-10 block cipher
//! (Salmon et al., Random123): the master seed is the cipher key and
//! `(draw_counter, trial_index, experiment_index)` is the counter. One call
//! produces a 256-bit block and advances `draw_counter` by one, so any draw
//! can be reproduced from its key alone, regardless of what other keys were
//! evaluated or in which order.
//!
//! Each sampler consumes exactly one block per call. Gaussian draws use the
//! Box-Muller transform on the first two words of the block.

use rand_core::{impls, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::scenario::Hypothesis;

const PHILOX_M0: u64 = 0xD2E7_470E_E14C_6C93;
const PHILOX_M1: u64 = 0xCA5A_8263_9512_1157;
const PHILOX_W0: u64 = 0x9E37_79B9_7F4A_7C15;
const PHILOX_W1: u64 = 0xBB67_AE85_84CA_A73B;

#[inline(always)]
fn mulhilo(a: u64, b: u64) -> (u64, u64) {
    let p = (a as u128) * (b as u128);
    ((p >> 64) as u64, p as u64)
}

/// Philox4x64 with 10 rounds.
#[inline]
pub fn philox4x64_10(counter: [u64; 4], key: [u64; 2]) -> [u64; 4] {
    let mut c = counter;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, c[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

/// Address of a position in the random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStreamKey {
    pub master_seed: u64,
    pub experiment_index: u64,
    pub trial_index: u64,
    pub draw_counter: u64,
}

impl RngStreamKey {
    pub fn new(master_seed: u64, experiment_index: u64, trial_index: u64) -> Self {
        Self {
            master_seed,
            experiment_index,
            trial_index,
            draw_counter: 0,
        }
    }

    /// Key for experiment `index` run under hypothesis `h`.
    ///
    /// The hypothesis occupies the low bit of `experiment_index`, so H0 and H1
    /// experiments with the same index never share randomness.
    pub fn for_experiment(master_seed: u64, h: Hypothesis, index: u64) -> Self {
        Self::new(master_seed, (index << 1) | h.index(), 0)
    }

    /// Same experiment, first draw of trial `trial`.
    pub fn at_trial(self, trial: u64) -> Self {
        Self {
            trial_index: trial,
            draw_counter: 0,
            ..self
        }
    }

    /// The next 256 random bits; advances `draw_counter`.
    #[inline]
    pub fn next_block(&mut self) -> [u64; 4] {
        let block = philox4x64_10(
            [self.draw_counter, self.trial_index, self.experiment_index, 0],
            [self.master_seed, 0],
        );
        self.draw_counter = self.draw_counter.wrapping_add(1);
        block
    }
}

/// Uniform on (0, 1], using the top 53 bits.
#[inline]
fn open_unit(word: u64) -> f64 {
    ((word >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform on [0, 1).
#[inline]
fn half_open_unit(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Two independent standard normals from one block (Box-Muller).
#[inline]
fn normal_pair(block: [u64; 4]) -> (f64, f64) {
    let radius = (-2.0 * open_unit(block[0]).ln()).sqrt();
    let (s, c) = (std::f64::consts::TAU * half_open_unit(block[1])).sin_cos();
    (radius * c, radius * s)
}

fn check_variance(variance: f64) -> Result<()> {
    if variance.is_nan() || variance < 0.0 {
        return Err(domain(format!("variance must be non-negative, got {variance}")));
    }
    Ok(())
}

/// One draw from `N(mean, variance)`. Consumes one block even when the
/// variance is zero.
pub fn sample_gaussian(stream: &mut RngStreamKey, mean: f64, variance: f64) -> Result<f64> {
    check_variance(variance)?;
    let (z, _) = normal_pair(stream.next_block());
    Ok(mean + variance.sqrt() * z)
}

/// Circular complex Gaussian: real and imaginary parts independent with the
/// given per-quadrature variance. Returned as `(re, im)`.
pub fn sample_complex_circular(
    stream: &mut RngStreamKey,
    per_quadrature_variance: f64,
) -> Result<(f64, f64)> {
    check_variance(per_quadrature_variance)?;
    let (x, y) = normal_pair(stream.next_block());
    let scale = per_quadrature_variance.sqrt();
    Ok((scale * x, scale * y))
}

/// Lets `rand_distr` samplers draw from a keyed stream. Each call consumes a
/// whole block.
impl RngCore for RngStreamKey {
    fn next_u32(&mut self) -> u32 {
        self.next_block()[0] as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.next_block()[0]
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        impls::fill_bytes_via_next(self, dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand_core::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Known-answer vectors checked against an independent implementation
    // (numpy's Philox bit generator).
    #[test]
    fn philox_known_answers() {
        assert_eq!(
            philox4x64_10([0, 0, 0, 0], [0, 0]),
            [
                0x1655_4d9e_ca36_314c,
                0xdb20_fe9d_672d_0fdc,
                0xd7e7_72ce_e186_176b,
                0x7e68_b68a_ec7b_a23b
            ]
        );
        assert_eq!(
            philox4x64_10([1, 0, 0, 0], [0, 0]),
            [
                0x02f4_ba64_08e4_d89b,
                0x3dd6_2b0b_9ca8_c5b2,
                0x1c86_67a5_5d90_2e79,
                0x907d_7a05_2fd5_b4dc
            ]
        );
        assert_eq!(
            philox4x64_10([7, 7, 8, 9], [42, 5]),
            [
                0x70fb_81ac_de6a_75d3,
                0x777e_15df_cab6_4be3,
                0x6195_9e71_d59b_1846,
                0xa173_7e3c_3c26_62f1
            ]
        );
    }

    #[test]
    fn degenerate_gaussian_returns_mean() {
        let mut key = RngStreamKey::new(9, 1, 2);
        assert_eq!(sample_gaussian(&mut key, 3.0, 0.0).unwrap(), 3.0);
        assert_eq!(key.draw_counter, 1);
        assert_eq!(sample_complex_circular(&mut key, 0.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn same_key_same_value() {
        let key = RngStreamKey::new(42, 7, 3);
        let a = sample_gaussian(&mut key.clone(), 0.0, 1.0).unwrap();
        let b = sample_gaussian(&mut key.clone(), 0.0, 1.0).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn draws_are_addressable() {
        let mut seq = RngStreamKey::new(1, 2, 3);
        let values: Vec<f64> = (0..5)
            .map(|_| sample_gaussian(&mut seq, 0.0, 1.0).unwrap())
            .collect();
        for (i, v) in values.iter().enumerate() {
            let mut key = RngStreamKey::new(1, 2, 3);
            key.draw_counter = i as u64;
            assert_eq!(sample_gaussian(&mut key, 0.0, 1.0).unwrap(), *v);
        }
    }

    #[test]
    fn hypotheses_get_distinct_streams() {
        let a = RngStreamKey::for_experiment(5, Hypothesis::H0, 10);
        let b = RngStreamKey::for_experiment(5, Hypothesis::H1, 10);
        assert_ne!(a, b);
        assert_ne!(a.clone().next_block(), b.clone().next_block());
    }

    #[test]
    fn rejects_negative_variance() {
        let mut key = RngStreamKey::new(0, 0, 0);
        assert!(sample_gaussian(&mut key, 0.0, -1.0).is_err());
        assert!(sample_complex_circular(&mut key, -0.5).is_err());
        assert!(sample_gaussian(&mut key, 0.0, f64::NAN).is_err());
    }

    #[test]
    fn gaussian_moments() {
        let n = 1_000_000;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for i in 0..n {
            let mut key = RngStreamKey::new(2024, 0, i);
            let x = sample_gaussian(&mut key, 0.0, 1.0).unwrap();
            sum += x;
            sum_sq += x * x;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.005, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn complex_circular_moments() {
        let n = 1_000_000;
        let mut key = RngStreamKey::new(77, 3, 0);
        let (mut power, mut pseudo_re, mut pseudo_im) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let (re, im) = sample_complex_circular(&mut key, 50.5).unwrap();
            power += re * re + im * im;
            // a^2 = (re^2 - im^2) + 2i re im
            pseudo_re += re * re - im * im;
            pseudo_im += 2.0 * re * im;
        }
        let n = n as f64;
        assert!((power / n - 101.0).abs() < 0.5, "E|a|^2 = {}", power / n);
        assert!((pseudo_re / n).abs() < 0.5 && (pseudo_im / n).abs() < 0.5);
    }
}
