//! Deterministic workload simulation: drives a provider, users and an
//! auditor for a configured number of epochs and records a transcript.

use anyhow::{ensure, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::sync::Arc;

use ppol_core::apk::keygen;
use ppol_core::ppol::{publish_ppol, verify_epoch_ppol, RANGE_BITS};
use ppol_core::pvc::{AuditorState, ProviderState, UserState};

use crate::transcript::{EpochRecord, Transcript, TranscriptHeader};
use crate::{Curve, Fr, Srs};

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub n: usize,
    pub epochs: u64,
    /// Probability that an eligible user updates in a given epoch.
    pub update_fraction: f64,
    pub registrations_per_epoch: usize,
    pub seed: u64,
    /// Run the provider on dummy balance values (the privacy simulator):
    /// every honest update uses δ = 1 instead of a real balance change.
    pub simulator_mode: bool,
}

pub struct SimOutput {
    pub transcript: Transcript,
    /// All in-process verdicts (auditor and acting users), epoch by epoch.
    pub all_accepted: bool,
}

/// Run the workload and capture a transcript. Every verifier runs inline so
/// honest runs self-check; the transcript allows re-running them offline.
pub fn run_simulation(cfg: &SimConfig, srs: Arc<Srs>) -> Result<SimOutput> {
    ensure!(
        srs.n() == cfg.n,
        "SRS capacity does not match the configuration"
    );
    ensure!(
        cfg.epochs as usize * cfg.registrations_per_epoch <= cfg.n,
        "capacity exceeded: {} registrations requested for {} slots",
        cfg.epochs as usize * cfg.registrations_per_epoch,
        cfg.n
    );
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut provider = ProviderState::new(Arc::clone(&srs))?;
    let mut auditor = AuditorState::<Curve>::new();
    let mut users: Vec<UserState<Curve>> = Vec::new();
    let mut all_accepted = true;

    let mut epochs = Vec::new();
    for epoch in 1..=cfg.epochs {
        let mut registrations = Vec::new();
        let mut updates = Vec::new();

        for _ in 0..cfg.registrations_per_epoch {
            let Some(slot) = provider.next_slot() else {
                break;
            };
            let (sk, helpers) = keygen(slot, &srs, &mut rng)?;
            provider.add_pk(&helpers)?;
            registrations.push(helpers);
            users.push(UserState::new(sk, slot));
        }

        for user in users.iter_mut() {
            if provider.is_active(user.index) && rng.gen_bool(cfg.update_fraction) {
                let delta = if cfg.simulator_mode {
                    Fr::from(1u64)
                } else {
                    Fr::from(rng.gen_range(0u64..1 << 32))
                };
                let update = user.sign(epoch, delta, &srs, &mut rng)?;
                provider.update_db(&update)?;
                updates.push(update);
            }
        }

        let bundle = publish_ppol(&mut provider, &mut rng)?;

        // Inline verification: auditor plus every acting user.
        let verdicts = verify_epoch_ppol(&mut auditor, &bundle, &srs);
        all_accepted &= verdicts.all_ok();
        for reg in &registrations {
            let user = users
                .iter()
                .find(|u| u.index == reg.index)
                .expect("registered");
            all_accepted &= user.verify_pk(
                bundle.base.key_com,
                &bundle.base.key_inclusion[&(reg.index as u64)],
                &bundle.base.inclusion[&(reg.index as u64)],
                bundle.base.db_com,
                &srs,
            );
        }
        for update in &updates {
            let user = users
                .iter()
                .find(|u| u.index == update.index)
                .expect("active");
            all_accepted &= user.verify_lookup(
                bundle.base.db_com,
                &bundle.base.inclusion[&(update.index as u64)],
                &srs,
            );
        }

        epochs.push(EpochRecord {
            registrations,
            updates,
            bundle,
        });
    }

    Ok(SimOutput {
        transcript: Transcript {
            header: TranscriptHeader {
                n: cfg.n as u64,
                range_bits: RANGE_BITS as u32,
                insecure_srs: srs.is_insecure(),
                srs_digest: srs.digest(),
            },
            epochs,
        },
        all_accepted,
    })
}
