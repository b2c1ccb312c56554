//! Counter-based random streams.
//!
//! A stream is identified by a [`StreamKey`] `(seed, replica, particle)` and
//! produces `mix(key, counter)` for `counter = 0, 1, 2, …`. Two streams with
//! different keys are statistically independent, and the value drawn at a
//! given counter does not depend on the order in which streams are used.

use rand_core::RngCore;
use serde::{Deserialize, Serialize};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const REPLICA_MUL: u64 = 0xD1B5_4A32_D192_ED03;
const PARTICLE_MUL: u64 = 0xABC9_8388_FB8C_AC03;
const TWEAK_SALT: u64 = 0x8CB9_2BA7_2F3D_8DD7;

/// SplitMix64 finaliser.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamKey {
    pub seed: u64,
    pub replica: u64,
    pub particle: u64,
}

impl StreamKey {
    pub fn new(seed: u64, replica: u64, particle: u64) -> Self {
        Self { seed, replica, particle }
    }

    fn derive(&self) -> (u64, u64) {
        let mut k = mix64(self.seed.wrapping_add(GOLDEN));
        k = mix64(k ^ self.replica.wrapping_mul(REPLICA_MUL).wrapping_add(GOLDEN));
        k = mix64(k ^ self.particle.wrapping_mul(PARTICLE_MUL).wrapping_add(GOLDEN));
        (k, mix64(k ^ TWEAK_SALT))
    }
}

#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    tweak: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(key: StreamKey) -> Self {
        let (key, tweak) = key.derive();
        Self { key, tweak, counter: 0 }
    }

    pub fn for_particle(seed: u64, replica: u64, particle: u64) -> Self {
        Self::new(StreamKey::new(seed, replica, particle))
    }

    /// The raw output at `counter`, without advancing.
    #[inline]
    pub fn at(&self, counter: u64) -> u64 {
        let state = self.key.wrapping_add(GOLDEN.wrapping_mul(counter.wrapping_add(1)));
        mix64(mix64(state) ^ self.tweak)
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn set_counter(&mut self, counter: u64) {
        self.counter = counter;
    }

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    #[inline]
    pub fn open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Exponential(1) by inversion.
    #[inline]
    pub fn exp1(&mut self) -> f64 {
        -self.open01().ln()
    }
}

impl RngCore for CounterRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        let v = self.at(self.counter);
        self.counter = self.counter.wrapping_add(1);
        v
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        rand_core::impls::fill_bytes_via_next(self, dst)
    }
}
