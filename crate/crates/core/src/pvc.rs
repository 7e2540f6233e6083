//! The permissioned vector commitment: provider, user and auditor roles.
//!
//! The provider maintains a masked database commitment dbCom* ∈ Ĝ, the key
//! commitment keyCom ∈ G (a commitment to secrets, processed only through
//! user-supplied helper values), and the linking commitment Σ to the
//! polynomial interpolating sk_i·(v_i + η·ρ_i). Every balance change enters
//! the system as a user signature over (epoch, δ, ε); the provider folds it
//! into all commitments, accumulators and proof trees in O(log n).
//!
//! At the end of an epoch the provider publishes the new commitments with a
//! global consistency proof: auditors check an APK proof for the epoch's
//! aggregate key, verify the aggregate signature against it, run the
//! zerocheck linking keyCom, dbCom* and Σ, and check the key table's
//! append-only proof — all without any private data. Users who acted during
//! the epoch confirm their own slots with one opening proof each.
//!
//! Epoch bookkeeping follows a validate-then-mutate discipline: a rejected
//! request leaves every accumulator untouched. Auditor checks for epoch E
//! run against the key commitment as of the end of epoch E−1, so helper
//! columns and the zerocheck accumulator absorb an epoch's registrations
//! only when the epoch closes.

use ark_ec::AffineRepr;
use ark_ff::Zero;
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::amt::{amt_verify, ClaimedValue, Commitment, OpeningProof, ProofTree};
use crate::apk::{self, ApkAccumulator, ApkMode, ApkProof, HelperValues};
use crate::append::{verify_append, AppendProof};
use crate::curve::{msm_g1, pairing_product_is_zero, CurveBackend, G1Affine, Scalar, G1, G2};
use crate::ppol::SumProof;
use crate::quotient::verify_zerocheck;
use crate::srs::StructuredReferenceString;
use crate::Error;

/// Domain tag for hashing epoch numbers into Ĝ.
pub const EPOCH_TAG: &[u8] = b"PPOL:v1:epoch";

/// H(E): the epoch tag point all signatures of epoch E share.
pub fn epoch_point<B: CurveBackend>(epoch: u64) -> G2<B> {
    B::hash_to_g2(EPOCH_TAG, &epoch.to_be_bytes())
}

/// A user's signature over a single balance update.
#[derive(Clone, Debug, PartialEq, Eq, CanonicalSerialize, CanonicalDeserialize)]
pub struct SignedUpdate<B: CurveBackend> {
    pub index: usize,
    pub epoch: u64,
    pub delta: Scalar<B>,
    pub epsilon: Scalar<B>,
    pub sig: G2<B>,
}

/// Verify σ = sk·(H(E) + δ·[ℓ_i(τ)·ĝ] + ε·[ℓ_i(τ)·ĥ]) against pk.
///
/// `epoch` is the verifier's current epoch; a signature for any other epoch
/// fails (replay protection), since H(E) enters the signed message.
pub fn verify_sig<B: CurveBackend>(
    pk: &G1Affine<B>,
    epoch: u64,
    update: &SignedUpdate<B>,
    srs: &StructuredReferenceString<B>,
) -> bool {
    if update.index >= srs.n() {
        return false;
    }
    let message = epoch_point::<B>(epoch)
        + srs.lagrange_g2[update.index] * update.delta
        + srs.lagrange_h2[update.index] * update.epsilon;
    pairing_product_is_zero::<B>(&[srs.g(), -pk.into_group()], &[update.sig, message])
}

/// Client-side state: the signing key plus the running (value, mask) pair
/// the user expects their slot to hold.
#[derive(Clone, Debug)]
pub struct UserState<B: CurveBackend> {
    sk: Scalar<B>,
    pub index: usize,
    pub value: Scalar<B>,
    pub mask: Scalar<B>,
    last_signed_epoch: Option<u64>,
}

impl<B: CurveBackend> UserState<B> {
    pub fn new(sk: Scalar<B>, index: usize) -> Self {
        Self {
            sk,
            index,
            value: Scalar::<B>::zero(),
            mask: Scalar::<B>::zero(),
            last_signed_epoch: None,
        }
    }

    pub fn pk(&self, srs: &StructuredReferenceString<B>) -> G1<B> {
        srs.g() * self.sk
    }

    /// The signing key. Only the holder ever sees a `UserState`; oracle
    /// tests use this to recompute committed-secret structures.
    pub fn secret_key(&self) -> Scalar<B> {
        self.sk
    }

    /// Sign an update for `epoch`, sampling a fresh mask re-randomizer.
    ///
    /// At most one signature per epoch: a second signed delta in the same
    /// epoch would let the provider reorder or drop parts of it undetected.
    pub fn sign<R: Rng>(
        &mut self,
        epoch: u64,
        delta: Scalar<B>,
        srs: &StructuredReferenceString<B>,
        rng: &mut R,
    ) -> Result<SignedUpdate<B>, Error> {
        use ark_ff::UniformRand;
        if self.last_signed_epoch == Some(epoch) {
            return Err(Error::DoubleSign);
        }
        let epsilon = Scalar::<B>::rand(rng);
        let message = epoch_point::<B>(epoch)
            + srs.lagrange_g2[self.index] * delta
            + srs.lagrange_h2[self.index] * epsilon;
        let sig = message * self.sk;
        self.value += delta;
        self.mask += epsilon;
        self.last_signed_epoch = Some(epoch);
        Ok(SignedUpdate {
            index: self.index,
            epoch,
            delta,
            epsilon,
            sig,
        })
    }

    /// Post-registration check: the key landed in keyCom and the database
    /// slot opens to (0, 0).
    pub fn verify_pk(
        &self,
        key_com: G1<B>,
        key_inclusion: &OpeningProof<B>,
        db_inclusion: &OpeningProof<B>,
        db_com: G2<B>,
        srs: &StructuredReferenceString<B>,
    ) -> bool {
        use ark_ec::CurveGroup;
        verify_pk_inclusion::<B>(
            self.index,
            &self.pk(srs).into_affine(),
            key_com,
            key_inclusion,
            db_inclusion,
            db_com,
            srs,
        )
    }

    /// Post-update check: the published database commits (value, mask).
    pub fn verify_lookup(
        &self,
        db_com: G2<B>,
        proof: &OpeningProof<B>,
        srs: &StructuredReferenceString<B>,
    ) -> bool {
        verify_lookup_inclusion::<B>(self.index, self.value, self.mask, db_com, proof, srs)
    }
}

/// Key + zero-slot inclusion check, usable without the signing key (e.g.
/// when replaying a transcript).
pub fn verify_pk_inclusion<B: CurveBackend>(
    index: usize,
    pk: &G1Affine<B>,
    key_com: G1<B>,
    key_inclusion: &OpeningProof<B>,
    db_inclusion: &OpeningProof<B>,
    db_com: G2<B>,
    srs: &StructuredReferenceString<B>,
) -> bool {
    let key_ok = amt_verify(
        &Commitment::G1 {
            point: key_com,
            masked: false,
        },
        index,
        &ClaimedValue::G1(pk.into_group()),
        key_inclusion,
        srs,
    );
    let zero_ok = amt_verify(
        &Commitment::G2 {
            point: db_com,
            masked: true,
        },
        index,
        &ClaimedValue::G2(G2::<B>::zero()),
        db_inclusion,
        srs,
    );
    key_ok && zero_ok
}

/// Masked lookup check for a tracked (value, mask) pair.
pub fn verify_lookup_inclusion<B: CurveBackend>(
    index: usize,
    value: Scalar<B>,
    mask: Scalar<B>,
    db_com: G2<B>,
    proof: &OpeningProof<B>,
    srs: &StructuredReferenceString<B>,
) -> bool {
    amt_verify(
        &Commitment::G2 {
            point: db_com,
            masked: true,
        },
        index,
        &ClaimedValue::masked_g2(value, mask, srs),
        proof,
        srs,
    )
}

/// Provider-held per-user material that persists across epochs.
#[derive(Clone, Debug)]
struct RegisteredUser<B: CurveBackend> {
    pk: G1Affine<B>,
    key_lagrange: G1<B>,
    h_key_lagrange: G1<B>,
    r_i: G1<B>,
    r_deg: G1<B>,
    tree_helpers: Vec<G1<B>>,
}

/// A registration whose helper rows have not yet been folded into the
/// provider's column hints (deferred to the epoch close so mid-epoch proofs
/// stay consistent with the key commitment auditors hold).
#[derive(Clone, Debug)]
struct PendingRegistration<B: CurveBackend> {
    q_row: Vec<G1Affine<B>>,
    q_row_h: Vec<G1Affine<B>>,
}

/// Global consistency proof for the database side of one epoch.
#[derive(Clone, Debug, PartialEq, Eq, CanonicalSerialize, CanonicalDeserialize)]
pub struct DbProof<B: CurveBackend> {
    /// Δ_C: commitment to this epoch's signed deltas.
    pub sigma_epoch: G1<B>,
    /// σ_E: aggregate of the epoch's signatures.
    pub agg_sig: G2<B>,
    /// apk_E: aggregate public key of the epoch's signers.
    pub apk: G1<B>,
    pub apk_proof: ApkProof<B>,
    /// Q: zerocheck quotient commitment.
    pub zerocheck: G1<B>,
}

/// Everything one `publish` emits.
#[derive(Clone, Debug, PartialEq, Eq, CanonicalSerialize, CanonicalDeserialize)]
pub struct EpochBundle<B: CurveBackend> {
    pub epoch: u64,
    /// New masked database commitment dbCom*'.
    pub db_com: G2<B>,
    /// New key commitment keyCom'.
    pub key_com: G1<B>,
    pub db_proof: DbProof<B>,
    pub key_proof: AppendProof<B>,
    /// Database openings for everyone who updated or registered this epoch.
    pub inclusion: BTreeMap<u64, OpeningProof<B>>,
    /// Key-table openings for this epoch's registrations.
    pub key_inclusion: BTreeMap<u64, OpeningProof<B>>,
}

/// The provider's full mutable state.
///
/// Cloning forks the whole epoch state; exhaustive tests use this to share
/// a common honest prefix across many continuations.
#[derive(Clone)]
pub struct ProviderState<B: CurveBackend> {
    srs: Arc<StructuredReferenceString<B>>,
    epoch: u64,
    values: Vec<Scalar<B>>,
    masks: Vec<Scalar<B>>,
    db_com: G2<B>,
    db_tree: ProofTree<B>,
    key_com: G1<B>,
    key_tree: ProofTree<B>,
    /// keyCom as auditors hold it (state at the start of the epoch).
    key_com_start: G1<B>,
    key_com_epoch: G1<B>,
    epoch_key_tree: ProofTree<B>,
    sigma: G1<B>,
    sigma_epoch: G1<B>,
    zerocheck_acc: G1<B>,
    q_columns: Vec<G1<B>>,
    q_columns_h: Vec<G1<B>>,
    apk_acc: ApkAccumulator<B>,
    agg_sig: G2<B>,
    updated: BTreeSet<usize>,
    appended: Vec<usize>,
    /// Total registrations, including this epoch's pending ones.
    occupied: usize,
    /// First free FFT position at the start of the epoch (π(k)).
    split_pos_start: usize,
    /// Path for keyPoly(ω^k) = 0, snapshotted before this epoch's appends.
    path_old_snapshot: OpeningProof<B>,
    users: BTreeMap<usize, RegisteredUser<B>>,
    pending: Vec<PendingRegistration<B>>,
    /// Liability sum proof accumulator (T, S).
    sum: SumProof<B>,
    /// ρ̂: commitment to the mask interpolant on ĝ.
    mask_com: G2<B>,
}

impl<B: CurveBackend> ProviderState<B> {
    pub fn new(srs: Arc<StructuredReferenceString<B>>) -> Result<Self, Error> {
        let n = srs.n();
        let log_n = srs.log_n();
        Ok(Self {
            epoch: 1,
            values: vec![Scalar::<B>::zero(); n],
            masks: vec![Scalar::<B>::zero(); n],
            db_com: G2::<B>::zero(),
            db_tree: ProofTree::empty(n)?,
            key_com: G1::<B>::zero(),
            key_tree: ProofTree::empty(n)?,
            key_com_start: G1::<B>::zero(),
            key_com_epoch: G1::<B>::zero(),
            epoch_key_tree: ProofTree::empty(n)?,
            sigma: G1::<B>::zero(),
            sigma_epoch: G1::<B>::zero(),
            zerocheck_acc: G1::<B>::zero(),
            q_columns: vec![G1::<B>::zero(); n],
            q_columns_h: vec![G1::<B>::zero(); n],
            apk_acc: ApkAccumulator::default(),
            agg_sig: G2::<B>::zero(),
            updated: BTreeSet::new(),
            appended: Vec::new(),
            occupied: 0,
            split_pos_start: 0,
            path_old_snapshot: OpeningProof::identity(0, log_n),
            users: BTreeMap::new(),
            pending: Vec::new(),
            sum: SumProof::identity(),
            mask_com: G2::<B>::zero(),
            srs,
        })
    }

    pub fn srs(&self) -> &StructuredReferenceString<B> {
        &self.srs
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    /// The FFT-order slot the next registration must take.
    pub fn next_slot(&self) -> Option<usize> {
        (self.occupied < self.srs.n()).then(|| self.srs.domain().perm(self.occupied))
    }

    pub fn registered_count(&self) -> usize {
        self.occupied
    }

    pub fn pk_of(&self, i: usize) -> Option<G1Affine<B>> {
        self.users.get(&i).map(|u| u.pk)
    }

    /// `true` once `i` can sign updates (registered in a closed epoch).
    pub fn is_active(&self, i: usize) -> bool {
        self.users.contains_key(&i) && self.srs.domain().perm(i) < self.split_pos_start
    }

    pub fn values(&self) -> &[Scalar<B>] {
        &self.values
    }

    pub fn masks(&self) -> &[Scalar<B>] {
        &self.masks
    }

    pub fn db_com(&self) -> G2<B> {
        self.db_com
    }

    pub fn key_com(&self) -> G1<B> {
        self.key_com
    }

    pub fn sigma(&self) -> G1<B> {
        self.sigma
    }

    pub fn zerocheck_acc(&self) -> G1<B> {
        self.zerocheck_acc
    }

    pub fn db_tree(&self) -> &ProofTree<B> {
        &self.db_tree
    }

    pub fn key_tree(&self) -> &ProofTree<B> {
        &self.key_tree
    }

    pub fn apk_acc(&self) -> &ApkAccumulator<B> {
        &self.apk_acc
    }

    pub fn sum_proof(&self) -> &SumProof<B> {
        &self.sum
    }

    pub fn mask_com(&self) -> G2<B> {
        self.mask_com
    }

    /// Register a new user: checks the slot order and the helper values,
    /// then folds the key into both key trees. Column hints and the
    /// zerocheck accumulator pick the registration up at the epoch close.
    pub fn add_pk(&mut self, helpers: &HelperValues<B>) -> Result<(), Error> {
        let n = self.srs.n();
        if self.occupied >= n {
            return Err(Error::CapacityExceeded);
        }
        let expected = self.srs.domain().perm(self.occupied);
        if helpers.index != expected {
            return Err(Error::RegistrationOrder {
                expected,
                got: helpers.index,
            });
        }
        if !apk::verify_helpers(helpers, &self.srs) {
            return Err(Error::BadHelpers);
        }
        let i = helpers.index;
        let inv_n = self.srs.domain().inv_n();
        let key_lagrange = helpers.key_lagrange.into_group();
        let tree_helpers: Vec<G1<B>> = helpers
            .tree_helpers
            .iter()
            .map(|p| p.into_group())
            .collect();

        let domain = self.srs.domain().clone();
        self.key_com += key_lagrange;
        self.key_tree.maintain_terms(i, &tree_helpers, &domain)?;
        self.key_com_epoch += key_lagrange;
        self.epoch_key_tree
            .maintain_terms(i, &tree_helpers, &domain)?;

        self.users.insert(
            i,
            RegisteredUser {
                pk: helpers.pk,
                key_lagrange,
                h_key_lagrange: helpers.h_key_lagrange.into_group(),
                r_i: helpers.r_i.into_group(),
                r_deg: key_lagrange - helpers.pk.into_group() * inv_n,
                tree_helpers,
            },
        );
        self.pending.push(PendingRegistration {
            q_row: helpers.q_row.clone(),
            q_row_h: helpers.q_row_h.clone(),
        });
        self.appended.push(i);
        self.occupied += 1;
        Ok(())
    }

    /// Apply a signed update, admitting any delta.
    pub fn update_db(&mut self, update: &SignedUpdate<B>) -> Result<(), Error> {
        self.update_db_with_policy(update, |_, _| true)
    }

    /// Apply a signed update subject to an application policy on (i, δ).
    pub fn update_db_with_policy<P>(
        &mut self,
        update: &SignedUpdate<B>,
        policy: P,
    ) -> Result<(), Error>
    where
        P: Fn(usize, &Scalar<B>) -> bool,
    {
        let i = update.index;
        if update.epoch != self.epoch {
            return Err(Error::WrongEpoch {
                expected: self.epoch,
                got: update.epoch,
            });
        }
        if !self.is_active(i) {
            return Err(Error::NotRegistered(i));
        }
        if self.updated.contains(&i) {
            return Err(Error::DuplicateInEpoch(i));
        }
        if !policy(i, &update.delta) {
            return Err(Error::PolicyRejected);
        }
        let pk = self.users[&i].pk;
        if !verify_sig(&pk, self.epoch, update, &self.srs) {
            return Err(Error::BadSignature);
        }
        self.apply_update(update);
        Ok(())
    }

    // All state mutations for an accepted update; infallible by construction
    // (every precondition was checked above).
    fn apply_update(&mut self, update: &SignedUpdate<B>) {
        let i = update.index;
        let delta = update.delta;
        let epsilon = update.epsilon;
        let srs = Arc::clone(&self.srs);
        let domain = srs.domain();
        let user = &self.users[&i];

        // Database commitment, tree and plain bookkeeping.
        self.db_com += srs.lagrange_g2[i] * delta + srs.lagrange_h2[i] * epsilon;
        self.db_tree
            .maintain_scaled(i, delta, srs.amt_row_g1(i), domain)
            .expect("index validated");
        self.db_tree
            .maintain_scaled(i, epsilon, srs.amt_row_h1(i), domain)
            .expect("index validated");
        self.values[i] += delta;
        self.masks[i] += epsilon;

        // Signature-linked commitments and the zerocheck quotient.
        let sigma_delta = user.key_lagrange * delta + user.h_key_lagrange * epsilon;
        self.sigma += sigma_delta;
        self.sigma_epoch += sigma_delta;
        self.zerocheck_acc += self.q_columns[i] * delta + self.q_columns_h[i] * epsilon;
        self.agg_sig += update.sig;

        // APK accumulators.
        let (r_i, r_deg, pk) = (user.r_i, user.r_deg, user.pk);
        self.apk_acc
            .accumulate(i, &pk, &r_i, &r_deg, &self.q_columns[i].clone(), &srs)
            .expect("duplicate checked");

        // Liability sum proof and mask interpolant.
        self.sum.total_com += srs.g_hat() * delta + srs.h_hat() * epsilon;
        self.sum.opening += srs.sum_quotient_g1[i] * delta + srs.sum_quotient_h1[i] * epsilon;
        self.mask_com += srs.lagrange_g2[i] * epsilon;

        self.updated.insert(i);
    }

    /// Close the epoch: emit the bundle, then roll state forward (fold
    /// pending registrations, advance the split point, reset the per-epoch
    /// accumulators, re-snapshot the append path).
    pub fn publish<R: Rng>(
        &mut self,
        apk_mode: ApkMode,
        rng: &mut R,
    ) -> Result<EpochBundle<B>, Error> {
        let srs = Arc::clone(&self.srs);
        let domain = srs.domain();
        let n = srs.n();

        // The APK proof's binarity quotient is the one piece of end-of-epoch
        // computation that cannot be maintained online.
        let apk_proof = apk::finalize(&self.apk_acc, self.key_com_start, apk_mode, &srs, rng)?;

        let path_new = if self.split_pos_start > 0 {
            self.epoch_key_tree
                .open(domain.perm(self.split_pos_start - 1), domain)?
        } else {
            OpeningProof::identity(0, srs.log_n())
        };
        let key_proof = AppendProof {
            key_com_epoch: self.key_com_epoch,
            split_pos: self.split_pos_start,
            path_old: self.path_old_snapshot.clone(),
            path_new,
        };

        let mut inclusion = BTreeMap::new();
        for &i in self.updated.iter().chain(self.appended.iter()) {
            inclusion.insert(i as u64, self.db_tree.open(i, domain)?);
        }
        let mut key_inclusion = BTreeMap::new();
        for &i in &self.appended {
            key_inclusion.insert(i as u64, self.key_tree.open(i, domain)?);
        }

        let bundle = EpochBundle {
            epoch: self.epoch,
            db_com: self.db_com,
            key_com: self.key_com,
            db_proof: DbProof {
                sigma_epoch: self.sigma_epoch,
                agg_sig: self.agg_sig,
                apk: self.apk_acc.apk,
                apk_proof,
                zerocheck: self.zerocheck_acc,
            },
            key_proof,
            inclusion,
            key_inclusion,
        };

        // Fold this epoch's registrations into the column hints and roll the
        // zerocheck quotient onto the enlarged key polynomial: appending
        // sk_w·ℓ_w adds sk_w·Σ_m d_m·ℓ_m·ℓ_w/(xⁿ−1) to the quotient, an MSM
        // over the new user's helper row with the current database entries.
        for pending in std::mem::take(&mut self.pending) {
            self.zerocheck_acc += msm_g1::<B>(&pending.q_row, &self.values)?
                + msm_g1::<B>(&pending.q_row_h, &self.masks)?;
            for j in 0..n {
                self.q_columns[j] += pending.q_row[j].into_group();
                self.q_columns_h[j] += pending.q_row_h[j].into_group();
            }
        }

        self.updated.clear();
        self.appended.clear();
        self.apk_acc = ApkAccumulator::default();
        self.sigma_epoch = G1::<B>::zero();
        self.agg_sig = G2::<B>::zero();
        self.key_com_epoch = G1::<B>::zero();
        self.epoch_key_tree = ProofTree::empty(n)?;
        self.split_pos_start = self.occupied;
        self.path_old_snapshot = if self.occupied < n {
            self.key_tree.open(domain.perm(self.occupied), domain)?
        } else {
            OpeningProof {
                index: n,
                components: Vec::new(),
            }
        };
        self.key_com_start = self.key_com;
        self.epoch += 1;
        Ok(bundle)
    }

    // ------------------------------------------------------------------
    // Fault-injection hooks. These model a dishonest provider for the
    // adversarial scenario runner; the library itself never calls them.
    // ------------------------------------------------------------------

    /// Change a database slot without a user signature (the off-the-books
    /// edit). The hook does everything a cheating provider *can* do:
    /// commitment, tree, sum proof and even the zerocheck quotient are kept
    /// self-consistent via the column hints. For a slot owned by a
    /// registered key the required quotient polynomial does not exist, so
    /// the zerocheck still fails; for a freshly appended slot the auditor is
    /// satisfied and only the owner's zero-slot check can object.
    pub fn fault_unsigned_write(
        &mut self,
        i: usize,
        delta: Scalar<B>,
        epsilon: Scalar<B>,
    ) -> Result<(), Error> {
        let srs = Arc::clone(&self.srs);
        let domain = srs.domain();
        self.db_com += srs.lagrange_g2[i] * delta + srs.lagrange_h2[i] * epsilon;
        self.db_tree
            .maintain_scaled(i, delta, srs.amt_row_g1(i), domain)?;
        self.db_tree
            .maintain_scaled(i, epsilon, srs.amt_row_h1(i), domain)?;
        self.values[i] += delta;
        self.masks[i] += epsilon;
        self.zerocheck_acc += self.q_columns[i] * delta + self.q_columns_h[i] * epsilon;
        // Keep the published sum consistent with the tampered database so
        // only the permission checks can catch the edit.
        self.sum.total_com += srs.g_hat() * delta + srs.h_hat() * epsilon;
        self.sum.opening += srs.sum_quotient_g1[i] * delta + srs.sum_quotient_h1[i] * epsilon;
        self.mask_com += srs.lagrange_g2[i] * epsilon;
        Ok(())
    }

    /// Apply a fabricated update with full bookkeeping except the aggregate
    /// signature (the provider cannot forge sk_i·H(E)).
    pub fn fault_apply_without_signature(
        &mut self,
        i: usize,
        delta: Scalar<B>,
        epsilon: Scalar<B>,
    ) -> Result<(), Error> {
        if !self.users.contains_key(&i) {
            return Err(Error::NotRegistered(i));
        }
        let fake = SignedUpdate {
            index: i,
            epoch: self.epoch,
            delta,
            epsilon,
            sig: G2::<B>::zero(),
        };
        // The zero "signature" folded into agg_sig is a no-op: exactly the
        // missing-σ_i attack.
        self.apply_update(&fake);
        Ok(())
    }

    /// Accept an update while skipping signature and epoch validation
    /// (e.g. replaying last epoch's signature).
    pub fn fault_accept_replayed(&mut self, update: &SignedUpdate<B>) -> Result<(), Error> {
        if !self.users.contains_key(&update.index) {
            return Err(Error::NotRegistered(update.index));
        }
        let mut replayed = update.clone();
        replayed.epoch = self.epoch;
        self.apply_update(&replayed);
        Ok(())
    }

    /// Remove a registered key from both key commitments and trees, keeping
    /// keyCom' = keyCom + keyCom_E consistent so only the append-proof path
    /// checks can object.
    pub fn fault_remove_key(&mut self, i: usize) -> Result<(), Error> {
        let user = self.users.get(&i).ok_or(Error::NotRegistered(i))?;
        let key_lagrange = user.key_lagrange;
        let neg_helpers: Vec<G1<B>> = user.tree_helpers.iter().map(|t| -*t).collect();
        let domain = self.srs.domain().clone();
        self.key_com -= key_lagrange;
        self.key_tree.maintain_terms(i, &neg_helpers, &domain)?;
        self.key_com_epoch -= key_lagrange;
        self.epoch_key_tree
            .maintain_terms(i, &neg_helpers, &domain)?;
        Ok(())
    }
}

/// What the auditor remembers between epochs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditorState<B: CurveBackend> {
    pub key_com: G1<B>,
    pub sigma: G1<B>,
    pub epoch: u64,
}

impl<B: CurveBackend> Default for AuditorState<B> {
    fn default() -> Self {
        Self::new()
    }
}

/// Outcome of each auditor check for one epoch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EpochVerdicts {
    pub epoch_number: bool,
    pub apk: bool,
    pub aggregate_signature: bool,
    pub zerocheck: bool,
    pub append: bool,
    pub key_transition: bool,
}

impl EpochVerdicts {
    pub fn all_ok(&self) -> bool {
        self.epoch_number
            && self.apk
            && self.aggregate_signature
            && self.zerocheck
            && self.append
            && self.key_transition
    }
}

impl<B: CurveBackend> AuditorState<B> {
    pub fn new() -> Self {
        Self {
            key_com: G1::<B>::zero(),
            sigma: G1::<B>::zero(),
            epoch: 1,
        }
    }

    /// Database-side verification for epoch `epoch` against the key
    /// commitment held from the previous epoch. Mutates Σ on success only.
    pub fn verify_db(
        &mut self,
        epoch: u64,
        db_com: G2<B>,
        proof: &DbProof<B>,
        mode: ApkMode,
        srs: &StructuredReferenceString<B>,
    ) -> bool {
        let (apk_ok, sig_ok, zero_ok) = self.check_db(epoch, db_com, proof, mode, srs);
        if apk_ok && sig_ok && zero_ok {
            self.sigma += proof.sigma_epoch;
            true
        } else {
            false
        }
    }

    fn check_db(
        &self,
        epoch: u64,
        db_com: G2<B>,
        proof: &DbProof<B>,
        mode: ApkMode,
        srs: &StructuredReferenceString<B>,
    ) -> (bool, bool, bool) {
        let apk_ok = apk::apk_verify(self.key_com, proof.apk, &proof.apk_proof, mode, srs);
        // e(g, σ_E) = e(apk_E, H(E)) + e(Δ_C, ĝ).
        let sig_ok = pairing_product_is_zero::<B>(
            &[srs.g(), -proof.apk, -proof.sigma_epoch],
            &[proof.agg_sig, epoch_point::<B>(epoch), srs.g_hat()],
        );
        let zero_ok = verify_zerocheck::<B>(
            self.key_com,
            db_com,
            self.sigma + proof.sigma_epoch,
            proof.zerocheck,
            srs,
        );
        (apk_ok, sig_ok, zero_ok)
    }

    /// Key-table verification: append-only proof plus the transition
    /// keyCom' = keyCom + keyCom_E. Mutates keyCom on success only.
    pub fn verify_keys(
        &mut self,
        key_com_new: G1<B>,
        proof: &AppendProof<B>,
        srs: &StructuredReferenceString<B>,
    ) -> bool {
        let (append_ok, transition_ok) = self.check_keys(key_com_new, proof, srs);
        if append_ok && transition_ok {
            self.key_com = key_com_new;
            true
        } else {
            false
        }
    }

    fn check_keys(
        &self,
        key_com_new: G1<B>,
        proof: &AppendProof<B>,
        srs: &StructuredReferenceString<B>,
    ) -> (bool, bool) {
        let append_ok = verify_append(self.key_com, proof, srs);
        let transition_ok = key_com_new == self.key_com + proof.key_com_epoch;
        (append_ok, transition_ok)
    }

    /// Run all auditor checks for one bundle without mutating state.
    pub fn check_epoch(
        &self,
        bundle: &EpochBundle<B>,
        mode: ApkMode,
        srs: &StructuredReferenceString<B>,
    ) -> EpochVerdicts {
        let epoch_number = bundle.epoch == self.epoch;
        let (apk, aggregate_signature, zerocheck) =
            self.check_db(bundle.epoch, bundle.db_com, &bundle.db_proof, mode, srs);
        let (append, key_transition) = self.check_keys(bundle.key_com, &bundle.key_proof, srs);
        EpochVerdicts {
            epoch_number,
            apk,
            aggregate_signature,
            zerocheck,
            append,
            key_transition,
        }
    }

    /// Accept a fully verified epoch: advance Σ, keyCom and the counter.
    pub fn commit_epoch(&mut self, bundle: &EpochBundle<B>) {
        self.sigma += bundle.db_proof.sigma_epoch;
        self.key_com = bundle.key_com;
        self.epoch += 1;
    }

    /// Check and, if everything passes, commit one epoch.
    pub fn verify_epoch(
        &mut self,
        bundle: &EpochBundle<B>,
        mode: ApkMode,
        srs: &StructuredReferenceString<B>,
    ) -> EpochVerdicts {
        let verdicts = self.check_epoch(bundle, mode, srs);
        if verdicts.all_ok() {
            self.commit_epoch(bundle);
        }
        verdicts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ark_bn254::{Bn254, Fr};
    use ark_poly::Polynomial;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    use crate::srs::{setup, SetupMode, StructuredReferenceString, TrapdoorMaterial};

    type Srs = StructuredReferenceString<Bn254>;

    fn test_setup(n: usize) -> (Arc<Srs>, TrapdoorMaterial<Bn254>) {
        let (srs, td) = setup::<Bn254>(n, SetupMode::InsecureTest { seed: 31 }).unwrap();
        (Arc::new(srs), td.unwrap())
    }

    fn register(provider: &mut ProviderState<Bn254>, rng: &mut ChaCha20Rng) -> UserState<Bn254> {
        let i = provider.next_slot().unwrap();
        let (sk, helpers) = apk::keygen(i, provider.srs(), rng).unwrap();
        provider.add_pk(&helpers).unwrap();
        UserState::new(sk, i)
    }

    #[test]
    fn signature_round_trip_and_replay_protection() {
        let (srs, _) = test_setup(8);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let (sk, helpers) = apk::keygen(0, &srs, &mut rng).unwrap();
        let mut user = UserState::new(sk, 0);

        // A zero delta still binds a fresh mask re-randomizer.
        let upd = user.sign(3, Fr::from(0u64), &srs, &mut rng).unwrap();
        assert!(verify_sig(&helpers.pk, 3, &upd, &srs));
        assert!(matches!(
            user.sign(3, Fr::from(1u64), &srs, &mut rng),
            Err(Error::DoubleSign)
        ));

        let upd2 = user.sign(4, Fr::from(5u64), &srs, &mut rng).unwrap();
        assert!(verify_sig(&helpers.pk, 4, &upd2, &srs));
        // Replay protection: the same signature against another epoch fails.
        assert!(!verify_sig(&helpers.pk, 5, &upd2, &srs));

        // Tampering any field breaks the signature.
        let mut bad = upd2.clone();
        bad.delta += Fr::from(1u64);
        assert!(!verify_sig(&helpers.pk, 4, &bad, &srs));
        let mut bad = upd2;
        bad.epsilon += Fr::from(1u64);
        assert!(!verify_sig(&helpers.pk, 4, &bad, &srs));
    }

    #[test]
    fn registration_slot_ordering() {
        let (srs, _) = test_setup(8);
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let mut provider = ProviderState::new(Arc::clone(&srs)).unwrap();

        assert_eq!(provider.next_slot(), Some(0));
        let _u0 = register(&mut provider, &mut rng);
        // Second registration lands at π(1) = 4 for n = 8.
        assert_eq!(provider.next_slot(), Some(4));

        let (_, wrong) = apk::keygen(3, &srs, &mut rng).unwrap();
        assert!(matches!(
            provider.add_pk(&wrong),
            Err(Error::RegistrationOrder {
                expected: 4,
                got: 3
            })
        ));
    }

    #[test]
    fn empty_epoch_verifies() {
        let (srs, _) = test_setup(8);
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let mut provider = ProviderState::new(Arc::clone(&srs)).unwrap();
        let mut auditor = AuditorState::<Bn254>::new();
        for mode in [ApkMode::Plain, ApkMode::Masked] {
            let bundle = provider.publish(mode, &mut rng).unwrap();
            let verdicts = auditor.verify_epoch(&bundle, mode, &srs);
            assert!(verdicts.all_ok(), "{verdicts:?}");
        }
        assert_eq!(auditor.epoch, 3);
    }

    #[test]
    fn single_update_pipeline() {
        let (srs, _) = test_setup(4);
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let mut provider = ProviderState::new(Arc::clone(&srs)).unwrap();
        let mut auditor = AuditorState::<Bn254>::new();

        // Epoch 1: register one user.
        let mut user = register(&mut provider, &mut rng);
        let b1 = provider.publish(ApkMode::Plain, &mut rng).unwrap();
        assert!(auditor.verify_epoch(&b1, ApkMode::Plain, &srs).all_ok());
        assert!(user.verify_pk(
            b1.key_com,
            &b1.key_inclusion[&(user.index as u64)],
            &b1.inclusion[&(user.index as u64)],
            b1.db_com,
            &srs
        ));

        // Epoch 2: one update of 5.
        let upd = user.sign(2, Fr::from(5u64), &srs, &mut rng).unwrap();
        provider.update_db(&upd).unwrap();
        let b2 = provider.publish(ApkMode::Plain, &mut rng).unwrap();
        assert!(auditor.verify_epoch(&b2, ApkMode::Plain, &srs).all_ok());
        assert!(user.verify_lookup(b2.db_com, &b2.inclusion[&(user.index as u64)], &srs));
    }

    #[test]
    fn update_preconditions() {
        let (srs, _) = test_setup(8);
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let mut provider = ProviderState::new(Arc::clone(&srs)).unwrap();

        let mut user = register(&mut provider, &mut rng);
        // Same-epoch updates by a just-registered user are deferred: the
        // auditor verifies epochs against the previous key commitment.
        let premature = user.sign(1, Fr::from(1u64), &srs, &mut rng).unwrap();
        assert!(matches!(
            provider.update_db(&premature),
            Err(Error::NotRegistered(_))
        ));
        provider.publish(ApkMode::Plain, &mut rng).unwrap();

        let upd = user.sign(2, Fr::from(2u64), &srs, &mut rng).unwrap();
        provider.update_db(&upd).unwrap();
        assert!(matches!(
            provider.update_db(&upd),
            Err(Error::DuplicateInEpoch(_))
        ));

        // Policy hook.
        let upd3 = user.sign(3, Fr::from(100u64), &srs, &mut rng).unwrap();
        provider.publish(ApkMode::Plain, &mut rng).unwrap();
        assert!(matches!(
            provider.update_db_with_policy(&upd3, |_, d| *d < Fr::from(10u64)),
            Err(Error::PolicyRejected)
        ));

        // Stale epoch numbers are rejected before any state changes.
        let stale = SignedUpdate {
            epoch: 1,
            ..upd3.clone()
        };
        assert!(matches!(
            provider.update_db(&stale),
            Err(Error::WrongEpoch { .. })
        ));
    }

    #[test]
    fn multi_epoch_accumulators_match_recomputation() {
        let (srs, td) = test_setup(8);
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let mut provider = ProviderState::new(Arc::clone(&srs)).unwrap();
        let mut auditor = AuditorState::<Bn254>::new();
        let mut users: Vec<UserState<Bn254>> = Vec::new();
        let mut secrets: Vec<(usize, Fr)> = Vec::new();

        for epoch in 1u64..=4 {
            if epoch <= 2 {
                for _ in 0..2 {
                    let user = register(&mut provider, &mut rng);
                    secrets.push((user.index, user.sk));
                    users.push(user);
                }
            }
            for user in users.iter_mut() {
                if provider.is_active(user.index) && rng.gen_bool(0.7) {
                    let delta = Fr::from(rng.gen_range(0u64..1000));
                    let upd = user.sign(epoch, delta, &srs, &mut rng).unwrap();
                    provider.update_db(&upd).unwrap();
                }
            }
            let bundle = provider.publish(ApkMode::Masked, &mut rng).unwrap();
            assert!(auditor
                .verify_epoch(&bundle, ApkMode::Masked, &srs)
                .all_ok());
            for user in users.iter() {
                if let Some(proof) = bundle.inclusion.get(&(user.index as u64)) {
                    assert!(user.verify_lookup(bundle.db_com, proof, &srs));
                }
            }
        }

        // Σ equals the commitment to Σ sk_i·(v_i + η·ρ_i)·ℓ_i recomputed
        // from scratch with test-mode secrets.
        let mut sigma_vals = vec![Fr::from(0u64); 8];
        for (i, sk) in &secrets {
            sigma_vals[*i] = *sk * (provider.values()[*i] + td.eta * provider.masks()[*i]);
        }
        let expected_sigma = crate::curve::msm_g1::<Bn254>(&srs.lagrange_g1, &sigma_vals).unwrap();
        assert_eq!(provider.sigma(), expected_sigma);

        // Q equals the zerocheck quotient recomputed from the polynomials.
        let d = srs.domain();
        let mut key_vals = vec![Fr::from(0u64); 8];
        for (i, sk) in &secrets {
            key_vals[*i] = *sk;
        }
        let eff_db: Vec<Fr> = provider
            .values()
            .iter()
            .zip(provider.masks())
            .map(|(v, m)| *v + td.eta * m)
            .collect();
        let q = crate::quotient::zerocheck_quotient(
            &d.interpolate(&key_vals),
            &d.interpolate(&eff_db),
            &d.interpolate(&sigma_vals),
            d,
        )
        .unwrap();
        assert_eq!(
            provider.zerocheck_acc(),
            crate::quotient::commit_coeffs::<Bn254>(&q, &srs).unwrap()
        );

        // Database tree equals a from-scratch rebuild.
        let rebuilt =
            ProofTree::<Bn254>::build_masked(provider.values(), provider.masks(), &srs).unwrap();
        assert_eq!(provider.db_tree(), &rebuilt);

        // Key commitment equals keyPoly(τ)·g.
        let key_poly = d.interpolate(&key_vals);
        assert_eq!(provider.key_com(), srs.g() * key_poly.evaluate(&td.tau));
    }

    #[test]
    fn negative_game_coverage() {
        let (srs, _) = test_setup(8);
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let mode = ApkMode::Plain;

        // Shared honest prefix: two users, one funded epoch.
        let build = |rng: &mut ChaCha20Rng| {
            let mut provider = ProviderState::new(Arc::clone(&srs)).unwrap();
            let mut auditor = AuditorState::<Bn254>::new();
            let mut alice = register(&mut provider, rng);
            let mut bob = register(&mut provider, rng);
            let b = provider.publish(mode, rng).unwrap();
            assert!(auditor.verify_epoch(&b, mode, &srs).all_ok());
            let ua = alice.sign(2, Fr::from(40u64), &srs, rng).unwrap();
            let ub = bob.sign(2, Fr::from(60u64), &srs, rng).unwrap();
            provider.update_db(&ua).unwrap();
            provider.update_db(&ub).unwrap();
            let b = provider.publish(mode, rng).unwrap();
            assert!(auditor.verify_epoch(&b, mode, &srs).all_ok());
            (provider, auditor, alice, bob, ua)
        };

        // Off-the-books zeroing of a colluding user's balance.
        let (mut provider, mut auditor, alice, _, _) = build(&mut rng);
        provider
            .fault_unsigned_write(alice.index, -alice.value, -alice.mask)
            .unwrap();
        let bundle = provider.publish(mode, &mut rng).unwrap();
        let verdicts = auditor.verify_epoch(&bundle, mode, &srs);
        assert!(!verdicts.all_ok());
        assert!(!verdicts.zerocheck);

        // Fabricated update without a signature.
        let (mut provider, mut auditor, alice, _, _) = build(&mut rng);
        provider
            .fault_apply_without_signature(alice.index, Fr::from(13u64), Fr::from(1u64))
            .unwrap();
        let bundle = provider.publish(mode, &mut rng).unwrap();
        let verdicts = auditor.verify_epoch(&bundle, mode, &srs);
        assert!(!verdicts.aggregate_signature);

        // Replay of an earlier epoch's signature.
        let (mut provider, mut auditor, _, _, old_update) = build(&mut rng);
        assert!(matches!(
            provider.update_db(&old_update),
            Err(Error::WrongEpoch { .. })
        ));
        provider.fault_accept_replayed(&old_update).unwrap();
        let bundle = provider.publish(mode, &mut rng).unwrap();
        let verdicts = auditor.verify_epoch(&bundle, mode, &srs);
        assert!(!verdicts.aggregate_signature);

        // Key removal.
        let (mut provider, mut auditor, alice, _, _) = build(&mut rng);
        provider.fault_remove_key(alice.index).unwrap();
        let bundle = provider.publish(mode, &mut rng).unwrap();
        let verdicts = auditor.verify_epoch(&bundle, mode, &srs);
        assert!(!verdicts.all_ok());

        // Omitted update: all auditor checks pass, the user's does not.
        let (mut provider, mut auditor, _, mut bob, _) = build(&mut rng);
        let dropped = bob.sign(3, Fr::from(9u64), &srs, &mut rng).unwrap();
        let _ = dropped; // provider silently discards the request
        let bundle = provider.publish(mode, &mut rng).unwrap();
        assert!(auditor.verify_epoch(&bundle, mode, &srs).all_ok());
        let lookup = provider.db_tree().open(bob.index, srs.domain()).unwrap();
        assert!(!bob.verify_lookup(bundle.db_com, &lookup, &srs));

        // Nonzero-seeded registration: caught by the user's zero-slot check.
        let (mut provider, mut auditor, _, _, _) = build(&mut rng);
        let carol_slot = provider.next_slot().unwrap();
        let (carol_sk, carol_helpers) = apk::keygen(carol_slot, &srs, &mut rng).unwrap();
        provider.add_pk(&carol_helpers).unwrap();
        provider
            .fault_unsigned_write(carol_slot, Fr::from(77u64), Fr::from(0u64))
            .unwrap();
        let bundle = provider.publish(mode, &mut rng).unwrap();
        assert!(auditor.verify_epoch(&bundle, mode, &srs).all_ok());
        let carol = UserState::<Bn254>::new(carol_sk, carol_slot);
        assert!(!carol.verify_pk(
            bundle.key_com,
            &bundle.key_inclusion[&(carol_slot as u64)],
            &bundle.inclusion[&(carol_slot as u64)],
            bundle.db_com,
            &srs
        ));
    }
}
