//! Per-run random streams.
//!
//! Stream derivation, stable across releases of this crate:
//!
//! 1. The run seed is `base_seed.wrapping_add(run_index)`.
//! 2. The run seed is expanded into a 256-bit ChaCha key with
//!    `SeedableRng::seed_from_u64` (the PCG32-based expansion defined by
//!    `rand_core`).
//! 3. The generator is ChaCha with 8 rounds, stream id 0, word position 0.
//!
//! Measurement-only draws (for example evolvability estimation in the NEAT
//! model) use [`auxiliary_stream`]: the same key on ChaCha stream id 1, so that
//! taking measurements never perturbs the evolutionary trajectory.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used by every simulation in this crate.
pub type SimRng = ChaCha8Rng;

pub fn run_seed(base_seed: u64, run_index: u64) -> u64 {
    base_seed.wrapping_add(run_index)
}

pub fn seed_stream(base_seed: u64, run_index: u64) -> SimRng {
    SimRng::seed_from_u64(run_seed(base_seed, run_index))
}

pub fn auxiliary_stream(rng: &SimRng) -> SimRng {
    let mut aux = SimRng::from_seed(rng.get_seed());
    aux.set_stream(1);
    aux.set_word_pos(0);
    aux
}
