//! Deterministic RNG stream derivation.
//!
//! Every parallel worker draws from its own counter-derived stream, so
//! results are identical for any thread count. The derivation is the
//! documented formula `stream_id = hash(master, role, replica)` with a
//! SplitMix64 finalizer chain.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Roles keep streams for different pipeline stages disjoint even when they
/// share a replica index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamRole {
    ThetaInit,
    Environment,
    SrbSample,
    SyntheticNoise,
    ProfileInit,
}

impl StreamRole {
    fn tag(self) -> u64 {
        match self {
            StreamRole::ThetaInit => 0x7468_6574_615f_30,
            StreamRole::Environment => 0x656e_7669_726f_6e,
            StreamRole::SrbSample => 0x7372_625f_7361_6d,
            StreamRole::SyntheticNoise => 0x7379_6e74_685f_62,
            StreamRole::ProfileInit => 0x7072_6f66_696c_65,
        }
    }
}

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// stream_id = hash(master, role, replica)
pub fn stream_id(master_seed: u64, role: StreamRole, replica: u64) -> u64 {
    let mut state = master_seed;
    let a = splitmix64(&mut state);
    state ^= role.tag();
    let b = splitmix64(&mut state);
    state ^= replica.wrapping_mul(0xd134_2543_de82_ef95);
    let c = splitmix64(&mut state);
    a ^ b.rotate_left(17) ^ c.rotate_left(43)
}

/// ChaCha12 stream for (master, role, replica).
pub fn derive_rng(master_seed: u64, role: StreamRole, replica: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(stream_id(master_seed, role, replica))
}
