//! Counter-derived random substreams.
//!
//! Every (trial, UE, BS antenna) triple owns its own ChaCha8 stream under a
//! key derived from the master seed, so the numbers a trial sees never depend
//! on how trials are scheduled across workers.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const UE_BITS: u32 = 12;
const ANTENNA_BITS: u32 = 12;
pub const MAX_ANTENNAS: usize = 1 << ANTENNA_BITS;
pub const MAX_UES: usize = 1 << UE_BITS;

// Stream reserved for per-scenario constants such as LoS phases.
const SCENARIO_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedKey {
    key: [u8; 32],
}

impl SeedKey {
    pub fn new(seed: u64) -> Self {
        let mut base = ChaCha8Rng::seed_from_u64(seed);
        let mut key = [0u8; 32];
        base.fill_bytes(&mut key);
        Self { key }
    }

    /// Stream for one BS antenna as seen by one UE in one trial.
    pub fn antenna(&self, trial: u64, ue: usize, antenna: usize) -> ChaCha8Rng {
        debug_assert!(ue < MAX_UES && antenna < MAX_ANTENNAS);
        let id = (trial << (UE_BITS + ANTENNA_BITS)) | ((ue as u64) << ANTENNA_BITS) | antenna as u64;
        self.stream(id)
    }

    pub fn scenario(&self) -> ChaCha8Rng {
        self.stream(SCENARIO_STREAM)
    }

    fn stream(&self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(id);
        rng
    }
}
