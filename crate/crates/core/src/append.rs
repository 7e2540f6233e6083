//! Append-only proofs for the committed key table.
//!
//! The table fills in FFT order. With split position p (the first free FFT
//! slot of the old table, k = π⁻¹(p) its index), appending an epoch's worth
//! of keys is legitimate iff the old polynomial vanishes on FFT positions
//! [p, n) and the epoch polynomial vanishes on [0, p). Both statements
//! follow from two ordinary opening paths thanks to the dual nature of tree
//! quotients: the path component at level ℓ proves agreement with the node's
//! sibling subtree under the sign-flipped divisor x^{2^ℓ} + ω^{k·2^ℓ}, so
//! right siblings of the k-path witness the old table's zero suffix and left
//! siblings of the c-path (c the last occupied position's index) witness the
//! epoch table's zero prefix.
//!
//! Producing the proof is two tree path reads; no extra prover work.

use ark_ec::AffineRepr;
use ark_ff::Zero;
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};

use crate::amt::{OpeningProof, ProofTree};
use crate::curve::{multi_pairing, CurveBackend, Gt, G1, G2};
use crate::domain::Domain;
use crate::srs::StructuredReferenceString;
use crate::Error;

/// Append-only certificate published with each epoch.
#[derive(Clone, Debug, PartialEq, Eq, CanonicalSerialize, CanonicalDeserialize)]
pub struct AppendProof<B: CurveBackend> {
    /// Commitment to the epoch's appended keys (keyCom_E).
    pub key_com_epoch: G1<B>,
    /// First free FFT position of the old table, in [0, n]. `n` means the
    /// table was already full; 0 means it was empty.
    pub split_pos: usize,
    /// Opening path for keyPoly(ω^k) = 0, k = π⁻¹(split_pos). Snapshot taken
    /// against the old table. Empty components iff split_pos = n.
    pub path_old: OpeningProof<B>,
    /// Opening path for keyPoly_E(ω^c) = 0, c = π⁻¹(split_pos − 1). Empty
    /// components iff split_pos = 0.
    pub path_new: OpeningProof<B>,
}

/// Extract an append proof from the two proof trees.
///
/// `old_tree` must be the key tree *before* the epoch's appends and
/// `epoch_tree` the tree of only the appended keys. Reads are O(log n).
pub fn make_append_proof<B: CurveBackend>(
    old_tree: &ProofTree<B>,
    epoch_tree: &ProofTree<B>,
    key_com_epoch: G1<B>,
    split_pos: usize,
    domain: &Domain<crate::curve::Scalar<B>>,
) -> Result<AppendProof<B>, Error> {
    let n = domain.n();
    if split_pos > n {
        return Err(Error::IndexOutOfRange {
            index: split_pos,
            n,
        });
    }
    let log_n = domain.log_n();
    let path_old = if split_pos < n {
        old_tree.open(domain.perm(split_pos), domain)?
    } else {
        OpeningProof {
            index: n,
            components: Vec::new(),
        }
    };
    let path_new = if split_pos > 0 {
        epoch_tree.open(domain.perm(split_pos - 1), domain)?
    } else {
        OpeningProof::identity(0, log_n)
    };
    Ok(AppendProof {
        key_com_epoch,
        split_pos,
        path_old,
        path_new,
    })
}

/// Verify that `key_com_old + proof.key_com_epoch` is an append-only update
/// of `key_com_old`.
pub fn verify_append<B: CurveBackend>(
    key_com_old: G1<B>,
    proof: &AppendProof<B>,
    srs: &StructuredReferenceString<B>,
) -> bool {
    verify_append_counted(key_com_old, proof, srs).0
}

/// [`verify_append`] with an explicit tally of pairing evaluations, for
/// complexity assertions. The count stays within (log n)(log n + 3); with
/// per-level suffix sums reused it is at most 4·log n + 2.
pub fn verify_append_counted<B: CurveBackend>(
    key_com_old: G1<B>,
    proof: &AppendProof<B>,
    srs: &StructuredReferenceString<B>,
) -> (bool, usize) {
    let n = srs.n();
    let log_n = srs.log_n() as usize;
    let domain = srs.domain();
    let g_hat = srs.g_hat();
    let mut pairings = 0usize;

    if proof.split_pos > n {
        return (false, pairings);
    }

    // Full table: nothing may be appended.
    if proof.split_pos == n {
        return (proof.key_com_epoch.is_zero(), pairings);
    }

    let pair = |p: G1<B>, q: G2<B>, count: &mut usize| -> Gt<B> {
        *count += 1;
        multi_pairing::<B>(&[p], &[q])
    };

    // Old side: keyPoly vanishes on FFT positions [split_pos, n).
    {
        let k = domain.perm(proof.split_pos);
        if proof.path_old.index != k || proof.path_old.components.len() != log_n {
            return (false, pairings);
        }
        let lhs = pair(key_com_old, g_hat, &mut pairings);
        // Standard step terms e(π_j, [τ^{2^j}·ĝ] − ω^{k·2^j}·ĝ), each
        // computed once and reused across levels via suffix sums.
        let steps: Vec<Gt<B>> = proof
            .path_old
            .components
            .iter()
            .enumerate()
            .map(|(j, pi)| {
                let omega = domain.element((k << j) % n);
                pair(
                    *pi,
                    srs.amt_step_g2[j].into_group() - g_hat * omega,
                    &mut pairings,
                )
            })
            .collect();
        let mut suffix = vec![Gt::<B>::default(); log_n + 1];
        for j in (0..log_n).rev() {
            suffix[j] = suffix[j + 1] + steps[j];
        }
        // Opening at zero: e(keyCom − 0, ĝ) = Σ_j steps_j.
        if lhs != suffix[0] {
            return (false, pairings);
        }
        // Level ℓ is a left child iff bit ℓ of the split position is 0; its
        // right sibling must vanish, witnessed by the sign-flipped divisor.
        for level in 0..log_n {
            if (proof.split_pos >> level) & 1 == 0 {
                let omega = domain.element((k << level) % n);
                let flipped = pair(
                    proof.path_old.components[level],
                    srs.amt_step_g2[level].into_group() + g_hat * omega,
                    &mut pairings,
                );
                if lhs != flipped + suffix[level + 1] {
                    return (false, pairings);
                }
            }
        }
    }

    // New side: keyPoly_E vanishes on FFT positions [0, split_pos). Vacuous
    // for an empty old table.
    if proof.split_pos > 0 {
        let c_pos = proof.split_pos - 1;
        let c = domain.perm(c_pos);
        if proof.path_new.index != c || proof.path_new.components.len() != log_n {
            return (false, pairings);
        }
        let lhs = pair(proof.key_com_epoch, g_hat, &mut pairings);
        let steps: Vec<Gt<B>> = proof
            .path_new
            .components
            .iter()
            .enumerate()
            .map(|(j, pi)| {
                let omega = domain.element((c << j) % n);
                pair(
                    *pi,
                    srs.amt_step_g2[j].into_group() - g_hat * omega,
                    &mut pairings,
                )
            })
            .collect();
        let mut suffix = vec![Gt::<B>::default(); log_n + 1];
        for j in (0..log_n).rev() {
            suffix[j] = suffix[j + 1] + steps[j];
        }
        if lhs != suffix[0] {
            return (false, pairings);
        }
        // Right children of the c-path (bit = 1) have their left sibling in
        // the zero prefix.
        for level in 0..log_n {
            if (c_pos >> level) & 1 == 1 {
                let omega = domain.element((c << level) % n);
                let flipped = pair(
                    proof.path_new.components[level],
                    srs.amt_step_g2[level].into_group() + g_hat * omega,
                    &mut pairings,
                );
                if lhs != flipped + suffix[level + 1] {
                    return (false, pairings);
                }
            }
        }
    }

    (true, pairings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ark_bn254::{Bn254, Fr};
    use ark_ff::UniformRand;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    use crate::srs::{setup, SetupMode, StructuredReferenceString};

    fn test_srs(n: usize) -> StructuredReferenceString<Bn254> {
        setup::<Bn254>(n, SetupMode::InsecureTest { seed: 21 })
            .unwrap()
            .0
    }

    // Key-table scenario: `old_count` keys already present, `added` appended
    // this epoch, all in FFT slot order.
    struct Scenario {
        key_com_old: G1<Bn254>,
        proof: AppendProof<Bn254>,
    }

    fn build_scenario(
        srs: &StructuredReferenceString<Bn254>,
        old_count: usize,
        added: usize,
        rng: &mut ChaCha20Rng,
    ) -> Scenario {
        let n = srs.n();
        let d = srs.domain();
        let mut old_vals = vec![Fr::zero(); n];
        let mut epoch_vals = vec![Fr::zero(); n];
        for p in 0..old_count {
            old_vals[d.perm(p)] = Fr::rand(rng);
        }
        for p in old_count..old_count + added {
            epoch_vals[d.perm(p)] = Fr::rand(rng);
        }
        let old_tree = ProofTree::<Bn254>::build(&old_vals, &srs.powers_g1, d).unwrap();
        let epoch_tree = ProofTree::<Bn254>::build(&epoch_vals, &srs.powers_g1, d).unwrap();
        let key_com_old = crate::curve::msm_g1::<Bn254>(&srs.lagrange_g1, &old_vals).unwrap();
        let key_com_epoch = crate::curve::msm_g1::<Bn254>(&srs.lagrange_g1, &epoch_vals).unwrap();
        let proof = make_append_proof(&old_tree, &epoch_tree, key_com_epoch, old_count, d).unwrap();
        Scenario { key_com_old, proof }
    }

    #[test]
    fn exhaustive_small_n() {
        let srs = test_srs(4);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for old_count in 0..=4usize {
            for added in 0..=(4 - old_count) {
                let s = build_scenario(&srs, old_count, added, &mut rng);
                assert!(
                    verify_append(s.key_com_old, &s.proof, &srs),
                    "honest ({old_count}, {added})"
                );
                // Tamper each occupied position. With an empty old table
                // there is no prefix to protect and keyCom_E is free-form by
                // the boundary convention, so only old_count > 0 cases bind.
                if old_count == 0 {
                    continue;
                }
                for p in 0..old_count + added {
                    let i = srs.domain().perm(p);
                    let mut bad = s.proof.clone();
                    // Fold the tamper into keyCom_E so the auditor's sum
                    // check keyCom' = keyCom + keyCom_E would still pass;
                    // the path checks must catch it on their own. Old
                    // positions violate the zero prefix, appended positions
                    // desynchronize keyCom_E from its tree paths.
                    bad.key_com_epoch += srs.lagrange_g1[i] * Fr::from(3u64);
                    assert!(
                        !verify_append(s.key_com_old, &bad, &srs),
                        "tamper ({old_count}, {added}, pos {p})"
                    );
                }
            }
        }
    }

    #[test]
    fn epoch_touching_an_old_slot_rejected() {
        // Old table holds 4 keys (positions 0..4), epoch adds 2 (positions
        // 4..6) but also modifies position 2: the c-path zero-prefix fails.
        let srs = test_srs(8);
        let d = srs.domain();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let n = 8;
        let mut old_vals = vec![Fr::zero(); n];
        let mut epoch_vals = vec![Fr::zero(); n];
        for p in 0..4 {
            old_vals[d.perm(p)] = Fr::rand(&mut rng);
        }
        for p in 4..6 {
            epoch_vals[d.perm(p)] = Fr::rand(&mut rng);
        }
        let old_tree = ProofTree::<Bn254>::build(&old_vals, &srs.powers_g1, d).unwrap();
        let key_com_old = crate::curve::msm_g1::<Bn254>(&srs.lagrange_g1, &old_vals).unwrap();

        let honest_epoch_tree = ProofTree::<Bn254>::build(&epoch_vals, &srs.powers_g1, d).unwrap();
        let honest_com = crate::curve::msm_g1::<Bn254>(&srs.lagrange_g1, &epoch_vals).unwrap();
        let honest = make_append_proof(&old_tree, &honest_epoch_tree, honest_com, 4, d).unwrap();
        assert!(verify_append(key_com_old, &honest, &srs));

        epoch_vals[d.perm(2)] = Fr::rand(&mut rng);
        let bad_tree = ProofTree::<Bn254>::build(&epoch_vals, &srs.powers_g1, d).unwrap();
        let bad_com = crate::curve::msm_g1::<Bn254>(&srs.lagrange_g1, &epoch_vals).unwrap();
        let bad = make_append_proof(&old_tree, &bad_tree, bad_com, 4, d).unwrap();
        assert!(!verify_append(key_com_old, &bad, &srs));
    }

    #[test]
    fn boundary_conventions() {
        let srs = test_srs(8);
        let mut rng = ChaCha20Rng::seed_from_u64(3);

        // Empty old table: no zero-prefix obligation on the epoch side.
        let s = build_scenario(&srs, 0, 3, &mut rng);
        assert!(s.key_com_old.is_zero());
        assert!(verify_append(s.key_com_old, &s.proof, &srs));

        // Empty epoch: proof degenerates to the old-side path.
        let s = build_scenario(&srs, 5, 0, &mut rng);
        assert!(s.proof.key_com_epoch.is_zero());
        assert!(verify_append(s.key_com_old, &s.proof, &srs));

        // Full table: only the identity epoch commitment is acceptable.
        let s = build_scenario(&srs, 8, 0, &mut rng);
        assert_eq!(s.proof.split_pos, 8);
        assert!(verify_append(s.key_com_old, &s.proof, &srs));
        let mut bad = s.proof.clone();
        bad.key_com_epoch += srs.g();
        assert!(!verify_append(s.key_com_old, &bad, &srs));
    }

    #[test]
    fn pairing_budget() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for log_n in [2u32, 3, 5] {
            let n = 1usize << log_n;
            let srs = test_srs(n);
            let s = build_scenario(&srs, n / 2, n / 4, &mut rng);
            let (ok, count) = verify_append_counted(s.key_com_old, &s.proof, &srs);
            assert!(ok);
            let l = log_n as usize;
            assert!(count <= l * (l + 3), "n={n}: {count} pairings");
        }
    }
}
