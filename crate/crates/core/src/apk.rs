//! Aggregated-public-key (APK) proofs.
//!
//! Proves statements of the form "apk = Σ_{i∈I} sk_i·g for some subset I of
//! the keys committed in keyCom" without learning any sk_i. The prover works
//! purely homomorphically from per-user helper values published at key
//! generation; everything aggregates incrementally except the binarity
//! quotient, which is recomputed once per epoch.
//!
//! The masked mode additionally hides the active subset by blinding the bit
//! vector commitments with multiples of the vanishing polynomial, folding
//! the correction terms into the binarity quotient and the sumcheck
//! quotient (the accompanying bit-equivalence check is batched in via a
//! Fiat–Shamir challenge).

use ark_ec::{AffineRepr, CurveGroup};
use ark_ff::{One, Zero};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::collections::BTreeSet;

use crate::curve::{
    encode, hash_to_scalar, msm_g1, msm_g2, pairing_product_is_zero, CurveBackend, G1Affine,
    G2Affine, Scalar, G1, G2,
};
use crate::quotient::{binarity_quotient_from_evals, commit_coeffs};
use crate::srs::StructuredReferenceString;
use crate::Error;

const HELPER_BATCH_TAG: &[u8] = b"PPOL:v1:helper-batch";
const GAMMA3_TAG: &[u8] = b"PPOL:v1:apk-gamma3";

/// Per-user public helper values (the formal public key pk*).
///
/// Everything a provider needs to process this user homomorphically:
/// Lagrange-slot commitments of sk on both bases, the row of pair quotients
/// sk·ℓ_i·ℓ_j/(xⁿ−1) on g and h, the sum-opening term, and the log n proof
/// tree helpers sk·L_{i,j}.
#[derive(Clone, Debug, PartialEq, Eq, CanonicalSerialize, CanonicalDeserialize)]
pub struct HelperValues<B: CurveBackend> {
    pub index: usize,
    pub pk: G1Affine<B>,
    /// sk·[ℓ_i(τ)·g].
    pub key_lagrange: G1Affine<B>,
    /// Q_{i,j} = sk·[ℓ_i·ℓ_j/(xⁿ−1)](τ)·g for every j.
    pub q_row: Vec<G1Affine<B>>,
    /// sk·[(ℓ_i − 1/n)/x](τ)·g.
    pub r_i: G1Affine<B>,
    /// sk·[L_{i,j}(τ)·g] for j ∈ [0, log n).
    pub tree_helpers: Vec<G1Affine<B>>,
    /// sk·h.
    pub h_key: G1Affine<B>,
    /// sk·[ℓ_i(τ)·h].
    pub h_key_lagrange: G1Affine<B>,
    /// sk·[ℓ_i·ℓ_j/(xⁿ−1)](τ)·h for every j.
    pub q_row_h: Vec<G1Affine<B>>,
}

/// Generate a key pair and all helper values for slot `i`.
///
/// O(n) group operations; this is the one-time per-user registration cost.
pub fn keygen<B: CurveBackend, R: Rng>(
    i: usize,
    srs: &StructuredReferenceString<B>,
    rng: &mut R,
) -> Result<(Scalar<B>, HelperValues<B>), Error> {
    use ark_ff::UniformRand;
    let n = srs.n();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    let sk = Scalar::<B>::rand(rng);

    let mut q_row = Vec::with_capacity(n);
    let mut q_row_h = Vec::with_capacity(n);
    for j in 0..n {
        q_row.push(srs.quotient_base_g1(i, j)? * sk);
        q_row_h.push(srs.quotient_base_h1(i, j)? * sk);
    }
    let tree_helpers: Vec<_> = srs.amt_row_g1(i).iter().map(|b| *b * sk).collect();

    let helpers = HelperValues {
        index: i,
        pk: (srs.g() * sk).into_affine(),
        key_lagrange: (srs.lagrange_g1[i] * sk).into_affine(),
        q_row: B::G1::normalize_batch(&q_row),
        r_i: (srs.sum_quotient_g1[i] * sk).into_affine(),
        tree_helpers: B::G1::normalize_batch(&tree_helpers),
        h_key: (srs.h() * sk).into_affine(),
        h_key_lagrange: (srs.lagrange_h1[i] * sk).into_affine(),
        q_row_h: B::G1::normalize_batch(&q_row_h),
    };
    Ok((sk, helpers))
}

fn helper_transcript<B: CurveBackend>(h: &HelperValues<B>) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(&(h.index as u64).to_be_bytes());
    buf.extend_from_slice(&encode(&h.pk));
    buf.extend_from_slice(&encode(&h.key_lagrange));
    for p in &h.q_row {
        buf.extend_from_slice(&encode(p));
    }
    buf.extend_from_slice(&encode(&h.r_i));
    for p in &h.tree_helpers {
        buf.extend_from_slice(&encode(p));
    }
    buf.extend_from_slice(&encode(&h.h_key));
    buf.extend_from_slice(&encode(&h.h_key_lagrange));
    for p in &h.q_row_h {
        buf.extend_from_slice(&encode(p));
    }
    buf
}

/// Check every helper against pk under the pairing, batched into a single
/// two-pairing equation by a random linear combination with Fiat–Shamir
/// weights (the helpers are fixed before the weights are derived).
pub fn verify_helpers<B: CurveBackend>(
    helpers: &HelperValues<B>,
    srs: &StructuredReferenceString<B>,
) -> bool {
    let n = srs.n();
    let log_n = srs.log_n() as usize;
    let i = helpers.index;
    if i >= n
        || helpers.q_row.len() != n
        || helpers.q_row_h.len() != n
        || helpers.tree_helpers.len() != log_n
    {
        return false;
    }

    // Fixed check order: key_lagrange, h_key, h_key_lagrange, r_i,
    // tree_helpers[0..log n], q_row[0..n], q_row_h[0..n]. Weights are
    // independent 128-bit Fiat–Shamir scalars, expanded from a hash of the
    // helpers through a stream cipher: enough for 2^-128 batching soundness
    // while keeping the MSM buckets half as busy.
    let total = 4 + log_n + 2 * n;
    let seed = crate::curve::expand_message_xmd(HELPER_BATCH_TAG, &helper_transcript(helpers), 32);
    let mut xof = ChaCha20Rng::from_seed(seed.try_into().expect("32 bytes"));
    let weights: Vec<Scalar<B>> = (0..total)
        .map(|_| {
            let mut chunk = [0u8; 16];
            xof.fill_bytes(&mut chunk);
            Scalar::<B>::from(u128::from_be_bytes(chunk))
        })
        .collect();

    let mut left_points: Vec<G1Affine<B>> = Vec::with_capacity(total);
    left_points.push(helpers.key_lagrange);
    left_points.push(helpers.h_key);
    left_points.push(helpers.h_key_lagrange);
    left_points.push(helpers.r_i);
    left_points.extend_from_slice(&helpers.tree_helpers);
    left_points.extend_from_slice(&helpers.q_row);
    left_points.extend_from_slice(&helpers.q_row_h);
    let left = match msm_g1::<B>(&left_points, &weights) {
        Ok(p) => p,
        Err(_) => return false,
    };

    // Mirror combination over the verification bases. Pair-quotient bases
    // expand into Lagrange-basis coefficients via partial fractions, so the
    // right side is two size-n G2 MSMs plus a handful of extras.
    let mut w_lag_g2 = vec![Scalar::<B>::zero(); n];
    let mut w_lag_h2 = vec![Scalar::<B>::zero(); n];
    let mut extra_points: Vec<G2<B>> = Vec::new();
    let mut extra_weights: Vec<Scalar<B>> = Vec::new();

    w_lag_g2[i] += weights[0];
    extra_points.push(srs.h_hat());
    extra_weights.push(weights[1]);
    w_lag_h2[i] += weights[2];
    extra_points.push(srs.sum_quotient_g2[i].into_group());
    extra_weights.push(weights[3]);
    for (j, base) in srs.amt_row_g2(i).iter().enumerate() {
        extra_points.push(base.into_group());
        extra_weights.push(weights[4 + j]);
    }
    // Partial-fraction coefficients for the whole row, with one batched
    // inversion instead of n.
    let q_off = 4 + log_n;
    let omega_i = srs.domain().element(i);
    let n_scalar = Scalar::<B>::from(n as u64);
    let mut denoms: Vec<Scalar<B>> = (0..n)
        .map(|j| {
            if j == i {
                Scalar::<B>::one()
            } else {
                n_scalar * (omega_i - srs.domain().element(j))
            }
        })
        .collect();
    ark_ff::batch_inversion(&mut denoms);
    for j in 0..n {
        let w = weights[q_off + j];
        let wh = weights[q_off + n + j];
        if j == i {
            extra_points.push(srs.diag_quotient_g2[i].into_group());
            extra_weights.push(w);
            extra_points.push(srs.diag_quotient_h2[i].into_group());
            extra_weights.push(wh);
        } else {
            let omega_j = srs.domain().element(j);
            let ci = denoms[j] * omega_j;
            let cj = -(denoms[j] * omega_i);
            w_lag_g2[i] += w * ci;
            w_lag_g2[j] += w * cj;
            w_lag_h2[i] += wh * ci;
            w_lag_h2[j] += wh * cj;
        }
    }

    // One Pippenger pass over both Lagrange families.
    let mut bases: Vec<G2Affine<B>> = Vec::with_capacity(2 * n);
    bases.extend_from_slice(&srs.lagrange_g2);
    bases.extend_from_slice(&srs.lagrange_h2);
    let mut combo = w_lag_g2;
    combo.extend_from_slice(&w_lag_h2);
    let mut right = msm_g2::<B>(&bases, &combo).expect("sized");
    for (p, w) in extra_points.iter().zip(&extra_weights) {
        right += *p * w;
    }

    pairing_product_is_zero::<B>(&[left, -helpers.pk.into_group()], &[srs.g_hat(), right])
}

/// Plain or privacy-hardened proof mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApkMode {
    Plain,
    Masked,
}

/// Running epoch state for the APK proof, updated per signing user.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApkAccumulator<B: CurveBackend> {
    /// Σ pk_i over the active set.
    pub apk: G1<B>,
    /// Active indices this epoch (the bit polynomial's support).
    pub indices: BTreeSet<usize>,
    /// b(τ)·g.
    pub bit_com_g1: G1<B>,
    /// b(τ)·ĝ.
    pub bit_com_g2: G2<B>,
    /// b(τ)·h (needed to mask the binarity quotient).
    pub bit_com_h1: G1<B>,
    /// Σ r_i: sumcheck remainder commitment.
    pub remainder: G1<B>,
    /// Σ (key_lagrange_i − pk_i/n): degree-check commitment for r·x.
    pub remainder_deg: G1<B>,
    /// Σ Q_i over active columns: sumcheck quotient commitment.
    pub quotient: G1<B>,
}

impl<B: CurveBackend> Default for ApkAccumulator<B> {
    fn default() -> Self {
        Self {
            apk: G1::<B>::zero(),
            indices: BTreeSet::new(),
            bit_com_g1: G1::<B>::zero(),
            bit_com_g2: G2::<B>::zero(),
            bit_com_h1: G1::<B>::zero(),
            remainder: G1::<B>::zero(),
            remainder_deg: G1::<B>::zero(),
            quotient: G1::<B>::zero(),
        }
    }
}

impl<B: CurveBackend> ApkAccumulator<B> {
    /// Fold signer `i` into the epoch aggregate.
    ///
    /// `q_column` is the provider-maintained column aggregate
    /// Q_i = Σ_j Q_{j,i} over all registered users.
    pub fn accumulate(
        &mut self,
        i: usize,
        pk: &G1Affine<B>,
        r_i: &G1<B>,
        r_deg_i: &G1<B>,
        q_column: &G1<B>,
        srs: &StructuredReferenceString<B>,
    ) -> Result<(), Error> {
        if !self.indices.insert(i) {
            return Err(Error::DuplicateInEpoch(i));
        }
        self.apk += pk.into_group();
        self.bit_com_g1 += srs.lagrange_g1[i];
        self.bit_com_g2 += srs.lagrange_g2[i];
        self.bit_com_h1 += srs.lagrange_h1[i];
        self.remainder += r_i;
        self.remainder_deg += r_deg_i;
        self.quotient += q_column;
        Ok(())
    }
}

/// End-of-epoch APK proof.
#[derive(Clone, Debug, PartialEq, Eq, CanonicalSerialize, CanonicalDeserialize)]
pub struct ApkProof<B: CurveBackend> {
    pub bit_com: G1<B>,
    pub bit_com_hat: G2<B>,
    pub binarity: G1<B>,
    pub quotient: G1<B>,
    pub remainder: G1<B>,
    pub remainder_deg: G1<B>,
}

/// Finalize the epoch accumulator into a proof.
///
/// The binarity quotient requires one O(n log n) FFT pass; it is the only
/// part that cannot be maintained incrementally. `key_com_start` is the key
/// commitment the verifier holds (the state at the start of the epoch) and
/// only matters in masked mode.
pub fn finalize<B: CurveBackend, R: Rng>(
    acc: &ApkAccumulator<B>,
    key_com_start: G1<B>,
    mode: ApkMode,
    srs: &StructuredReferenceString<B>,
    rng: &mut R,
) -> Result<ApkProof<B>, Error> {
    use ark_ff::UniformRand;
    let n = srs.n();
    let mut bits = vec![Scalar::<B>::zero(); n];
    for &i in &acc.indices {
        bits[i] = Scalar::<B>::one();
    }
    let u = binarity_quotient_from_evals(&bits, srs.domain())?;
    let u_com = commit_coeffs::<B>(&u, srs)?;

    match mode {
        ApkMode::Plain => Ok(ApkProof {
            bit_com: acc.bit_com_g1,
            bit_com_hat: acc.bit_com_g2,
            binarity: u_com,
            quotient: acc.quotient,
            remainder: acc.remainder,
            remainder_deg: acc.remainder_deg,
        }),
        ApkMode::Masked => {
            let mu = Scalar::<B>::rand(rng);
            let mu_hat = Scalar::<B>::rand(rng);
            let bit_com = acc.bit_com_g1 + srs.vanishing_h1 * mu;
            let bit_com_hat = acc.bit_com_g2 + srs.vanishing_g2 * mu_hat;
            let gamma3 = gamma3::<B>(&bit_com, &bit_com_hat);
            // The combined check multiplies (b − 1)·b, so the quotient base
            // orientation flips to (b² − b)/(xⁿ−1) = −u.
            let binarity = -u_com
                + acc.bit_com_h1 * mu
                + acc.bit_com_g1 * mu_hat
                + srs.vanishing_h1 * (mu * mu_hat)
                - srs.g() * mu_hat
                + (srs.h() * mu - srs.g() * mu_hat) * gamma3;
            let quotient = acc.quotient + key_com_start * mu_hat;
            Ok(ApkProof {
                bit_com,
                bit_com_hat,
                binarity,
                quotient,
                remainder: acc.remainder,
                remainder_deg: acc.remainder_deg,
            })
        }
    }
}

fn gamma3<B: CurveBackend>(bit_com: &G1<B>, bit_com_hat: &G2<B>) -> Scalar<B> {
    let mut buf = encode(&bit_com.into_affine());
    buf.extend_from_slice(&encode(&bit_com_hat.into_affine()));
    hash_to_scalar::<B>(GAMMA3_TAG, &buf)
}

/// Verify an APK proof against the key commitment and claimed aggregate key.
pub fn apk_verify<B: CurveBackend>(
    key_com: G1<B>,
    apk: G1<B>,
    proof: &ApkProof<B>,
    mode: ApkMode,
    srs: &StructuredReferenceString<B>,
) -> bool {
    let g = srs.g();
    let g_hat = srs.g_hat();
    let tau_g2 = srs.powers_g2[1].into_group();
    let vanishing = srs.vanishing_g2.into_group();

    let binarity_ok = match mode {
        ApkMode::Plain => {
            // (1) same bit polynomial on both sides.
            let equal =
                pairing_product_is_zero::<B>(&[proof.bit_com, -g], &[g_hat, proof.bit_com_hat]);
            // (2) b − b² divisible by the vanishing polynomial.
            let binary = pairing_product_is_zero::<B>(
                &[proof.bit_com, -proof.binarity],
                &[g_hat - proof.bit_com_hat, vanishing],
            );
            equal && binary
        }
        ApkMode::Masked => {
            // Combined binarity + equivalence check under γ₃.
            let gamma3 = gamma3::<B>(&proof.bit_com, &proof.bit_com_hat);
            pairing_product_is_zero::<B>(
                &[
                    proof.bit_com - g,
                    proof.bit_com * gamma3,
                    -(g * gamma3),
                    -proof.binarity,
                ],
                &[proof.bit_com_hat, g_hat, proof.bit_com_hat, vanishing],
            )
        }
    };
    if !binarity_ok {
        return false;
    }

    // (3) explicit degree bound on the sumcheck remainder: r* = r·x.
    if !pairing_product_is_zero::<B>(&[proof.remainder, -proof.remainder_deg], &[tau_g2, g_hat]) {
        return false;
    }

    // (4) sumcheck: keyPoly·b = apk/n + r·x + t·(xⁿ−1).
    let inv_n = srs.domain().inv_n();
    pairing_product_is_zero::<B>(
        &[key_com, -(apk * inv_n), -proof.remainder, -proof.quotient],
        &[proof.bit_com_hat, g_hat, tau_g2, vanishing],
    )
}
