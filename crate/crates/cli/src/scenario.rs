//! Adversarial scenario runner: each named attack drives a real provider
//! through an honest prefix, injects one dishonest action via the provider's
//! fault hooks, and asserts that the relevant honest verifier rejects.
//!
//! Attacks must be *detected*: a scenario "passes" when verification fails
//! at the expected check.

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::str::FromStr;
use std::sync::Arc;

use ppol_core::apk::keygen;
use ppol_core::ppol::{check_epoch_ppol, publish_ppol, verify_epoch_ppol};
use ppol_core::pvc::{AuditorState, ProviderState, SignedUpdate, UserState};

use crate::{Curve, Fr, Srs};

/// The scripted attacks from the security game, each mapping to exactly one
/// fault-injection hook (or a dropped message) in the provider paths.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    /// Zero a colluding user's balance without a signature.
    OtbZeroing,
    /// Fabricate a balance update with no signature at all.
    UnsignedUpdate,
    /// Re-apply a signature from an earlier epoch.
    Replay,
    /// Remove a registered key from the key commitment.
    KeyRemoval,
    /// Accept a signed update, report success, apply nothing.
    OmittedUpdate,
    /// Seed a fresh registration with a nonzero balance.
    NonzeroRegistration,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::OtbZeroing,
        Scenario::UnsignedUpdate,
        Scenario::Replay,
        Scenario::KeyRemoval,
        Scenario::OmittedUpdate,
        Scenario::NonzeroRegistration,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::OtbZeroing => "otb-zeroing",
            Scenario::UnsignedUpdate => "unsigned-update",
            Scenario::Replay => "replay",
            Scenario::KeyRemoval => "key-removal",
            Scenario::OmittedUpdate => "omitted-update",
            Scenario::NonzeroRegistration => "nonzero-registration",
        }
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| format!("unknown scenario '{s}'"))
    }
}

#[derive(Clone, Debug)]
pub struct AttackOutcome {
    pub scenario: Scenario,
    /// The attack left a trace some honest verifier rejected.
    pub detected: bool,
    /// Which check tripped (empty when undetected).
    pub failing_check: String,
}

/// Run one scenario at the given size and seed.
///
/// The honest prefix registers a handful of users and funds two of them so
/// every attack has real state to corrupt; the injection epoch is then
/// verified by the auditor and by the affected user.
pub fn run_attack(scenario: Scenario, srs: Arc<Srs>, seed: u64) -> Result<AttackOutcome> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut provider = ProviderState::new(Arc::clone(&srs))?;
    let mut auditor = AuditorState::<Curve>::new();

    // Epoch 1: three registrations.
    let mut users: Vec<UserState<Curve>> = Vec::new();
    for _ in 0..3 {
        let slot = provider.next_slot().expect("capacity");
        let (sk, helpers) = keygen(slot, &srs, &mut rng)?;
        provider.add_pk(&helpers)?;
        users.push(UserState::new(sk, slot));
    }
    let b1 = publish_ppol(&mut provider, &mut rng)?;
    assert!(
        verify_epoch_ppol(&mut auditor, &b1, &srs).all_ok(),
        "honest prefix"
    );

    // Epoch 2: two funded accounts.
    let mut kept_update: Option<SignedUpdate<Curve>> = None;
    for user in users.iter_mut().take(2) {
        let delta = Fr::from(rng.gen_range(1u64..1 << 20));
        let update = user.sign(2, delta, &srs, &mut rng)?;
        provider.update_db(&update)?;
        kept_update.get_or_insert(update);
    }
    let b2 = publish_ppol(&mut provider, &mut rng)?;
    assert!(
        verify_epoch_ppol(&mut auditor, &b2, &srs).all_ok(),
        "honest prefix"
    );

    // Epoch 3: inject.
    let colluder = users[0].clone();
    let mut fresh_user: Option<UserState<Curve>> = None;
    let mut dropped_user: Option<UserState<Curve>> = None;
    match scenario {
        Scenario::OtbZeroing => {
            provider.fault_unsigned_write(colluder.index, -colluder.value, -colluder.mask)?;
        }
        Scenario::UnsignedUpdate => {
            provider.fault_apply_without_signature(
                colluder.index,
                Fr::from(rng.gen_range(1u64..1 << 20)),
                Fr::from(rng.gen_range(1u64..1 << 20)),
            )?;
        }
        Scenario::Replay => {
            provider.fault_accept_replayed(&kept_update.expect("epoch 2 update"))?;
        }
        Scenario::KeyRemoval => {
            provider.fault_remove_key(colluder.index)?;
        }
        Scenario::OmittedUpdate => {
            let user = &mut users[1];
            let delta = Fr::from(rng.gen_range(1u64..1 << 20));
            let _dropped = user.sign(3, delta, &srs, &mut rng)?;
            dropped_user = Some(user.clone());
        }
        Scenario::NonzeroRegistration => {
            let slot = provider.next_slot().expect("capacity");
            let (sk, helpers) = keygen(slot, &srs, &mut rng)?;
            provider.add_pk(&helpers)?;
            provider.fault_unsigned_write(
                slot,
                Fr::from(rng.gen_range(1u64..1 << 20)),
                Fr::from(0u64),
            )?;
            fresh_user = Some(UserState::new(sk, slot));
        }
    }

    let bundle = publish_ppol(&mut provider, &mut rng)?;
    let verdicts = check_epoch_ppol(&auditor, &bundle, &srs);

    // Auditor-side detection.
    if !verdicts.all_ok() {
        let failing = [
            (verdicts.base.apk, "auditor/apk"),
            (
                verdicts.base.aggregate_signature,
                "auditor/aggregate-signature",
            ),
            (verdicts.base.zerocheck, "auditor/zerocheck"),
            (verdicts.base.append, "auditor/append-only"),
            (verdicts.base.key_transition, "auditor/key-transition"),
            (verdicts.range, "auditor/range"),
            (verdicts.sum, "auditor/sum"),
        ]
        .into_iter()
        .find(|(ok, _)| !ok)
        .map(|(_, name)| name.to_string())
        .unwrap_or_else(|| "auditor/epoch-number".to_string());
        return Ok(AttackOutcome {
            scenario,
            detected: true,
            failing_check: failing,
        });
    }
    auditor.commit_epoch(&bundle.base);

    // User-side detection (the attacks auditors cannot see).
    if let Some(user) = dropped_user {
        let proof = provider.db_tree().open(user.index, srs.domain())?;
        if !user.verify_lookup(bundle.base.db_com, &proof, &srs) {
            return Ok(AttackOutcome {
                scenario,
                detected: true,
                failing_check: format!("user{}/lookup", user.index),
            });
        }
    }
    if let Some(user) = fresh_user {
        let idx = user.index as u64;
        let ok = user.verify_pk(
            bundle.base.key_com,
            &bundle.base.key_inclusion[&idx],
            &bundle.base.inclusion[&idx],
            bundle.base.db_com,
            &srs,
        );
        if !ok {
            return Ok(AttackOutcome {
                scenario,
                detected: true,
                failing_check: format!("user{}/key-inclusion", user.index),
            });
        }
    }

    Ok(AttackOutcome {
        scenario,
        detected: false,
        failing_check: String::new(),
    })
}
