//! Deterministic random streams.
//!
//! Every run owns one xoshiro256++ generator whose 256-bit state is expanded
//! by splitmix64 from a key derived from `(base_seed, run_index)`. Both
//! algorithms are fixed-width integer arithmetic, so streams are identical
//! on every platform.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};

pub type RunRng = Xoshiro256PlusPlus;

pub fn derive_run_seed(base_seed: u64, run_index: u64) -> RunRng {
    let key = SplitMix64::seed_from_u64(base_seed)
        .next_u64()
        .wrapping_add(run_index);
    Xoshiro256PlusPlus::seed_from_u64(key)
}

/// Replays a fixed script of uniform draws in `[0, 1)`, then repeats the last.
///
/// `rng.random::<f64>()` returns the smallest multiple of 2^-53 that is not
/// below the scripted value, so a draw of `p` never passes a `< p` test.
#[derive(Clone, Debug)]
pub struct ScriptedRng {
    draws: Vec<f64>,
    next: usize,
}

impl ScriptedRng {
    pub fn new(draws: impl Into<Vec<f64>>) -> Self {
        let draws = draws.into();
        assert!(!draws.is_empty(), "scripted rng needs at least one draw");
        assert!(draws.iter().all(|d| (0.0..1.0).contains(d)));
        ScriptedRng { draws, next: 0 }
    }
}

impl RngCore for ScriptedRng {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        let d = self.draws[self.next.min(self.draws.len() - 1)];
        self.next += 1;
        ((d * (1u64 << 53) as f64).ceil() as u64) << 11
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}
