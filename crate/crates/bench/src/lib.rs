//! Shared fixtures for the criterion benches.

use std::sync::Arc;

use ark_bn254::Bn254;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use ppol_core::apk::keygen;
use ppol_core::pvc::{ProviderState, UserState};
use ppol_core::srs::{setup, SetupMode, StructuredReferenceString};

pub type Curve = Bn254;
pub type Srs = StructuredReferenceString<Curve>;

/// Deterministic test SRS for benchmarking.
pub fn bench_srs(n: usize) -> Arc<Srs> {
    let (srs, _) = setup::<Curve>(n, SetupMode::InsecureTest { seed: 1 }).unwrap();
    Arc::new(srs)
}

/// A provider with `users` registered accounts, past their first epoch so
/// they are active.
pub fn funded_provider(
    srs: &Arc<Srs>,
    users: usize,
) -> (ProviderState<Curve>, Vec<UserState<Curve>>) {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let mut provider = ProviderState::new(Arc::clone(srs)).unwrap();
    let mut states = Vec::new();
    for _ in 0..users {
        let slot = provider.next_slot().unwrap();
        let (sk, helpers) = keygen(slot, srs, &mut rng).unwrap();
        provider.add_pk(&helpers).unwrap();
        states.push(UserState::new(sk, slot));
    }
    provider
        .publish(ppol_core::apk::ApkMode::Masked, &mut rng)
        .unwrap();
    (provider, states)
}
