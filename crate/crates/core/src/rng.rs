//! Seeded, named random streams.
//!
//! Every stream is a ChaCha8 generator keyed by the user seed, with the
//! ChaCha stream id derived from a [`StreamKey`]. Replications, sweep points
//! and bandit runs therefore get independent, reproducible streams no matter
//! how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Purpose {
    Sample = 1,
    Sweep = 2,
    Bandit = 3,
    Validate = 4,
    Test = 5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub purpose: Purpose,
    pub arm: u32,
    pub replication: u64,
}

impl StreamKey {
    pub fn new(purpose: Purpose) -> Self {
        Self {
            purpose,
            arm: 0,
            replication: 0,
        }
    }

    pub fn arm(mut self, arm: u32) -> Self {
        self.arm = arm;
        self
    }

    pub fn replication(mut self, replication: u64) -> Self {
        self.replication = replication;
        self
    }

    fn stream_id(&self) -> u64 {
        let head = ((self.purpose as u64) << 56) ^ ((self.arm as u64) << 24);
        splitmix64(splitmix64(head) ^ self.replication)
    }

    pub fn rng(&self, seed: u64) -> SimRng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(self.stream_id());
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
