//! Liability reporting on top of the vector commitment: an incrementally
//! maintained sum proof and a masked bit-decomposition range proof.
//!
//! The sum proof authenticates a committed total via a KZG opening of the
//! database polynomial at 0 (Σ_i p(ω^i) = n·p(0)). Because the database
//! commitment carries an h-side mask interpolant, the opening quotient S
//! accumulates both the δ-side g-base term and the ε-side h-base term; the
//! pairing identity does not close without the second one.
//!
//! The range proof commits to the m = 64 bit polynomials of the database
//! values, blinds them with multiples of the vanishing polynomial, and
//! batches all binarity and cross-group equivalence checks into a single
//! quotient W under Fiat–Shamir powers γ₁, γ₂. Recomposition against
//! dbCom* is adjusted by the published ρ̂* (the blinded mask interpolant)
//! and the vanishing multiple M*.

use ark_ec::{AffineRepr, CurveGroup};
use ark_ff::{AdditiveGroup, BigInteger, One, PrimeField, Zero};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use rand::Rng;
use rayon::prelude::*;

use crate::amt::OpeningProof;
use crate::apk::ApkMode;
use crate::curve::{
    encode, hash_to_scalar, msm_g1, msm_g2, pairing_product_is_zero, CurveBackend, Scalar, G1, G2,
};
use crate::pvc::{AuditorState, EpochBundle, EpochVerdicts, ProviderState};
use crate::quotient::binarity_quotient_unchecked;
use crate::srs::StructuredReferenceString;
use crate::Error;

/// Bit width of the range proof; balances must be below 2^64.
pub const RANGE_BITS: usize = 64;

const GAMMA1_TAG: &[u8] = b"PPOL:v1:range-gamma1";
const GAMMA2_TAG: &[u8] = b"PPOL:v1:range-gamma2";

/// Incrementally maintained liability sum proof.
///
/// `total_com` (T) commits (Σ δ, Σ ε) on (ĝ, ĥ); `opening` (S) is the
/// running opening-at-zero quotient, satisfying
/// e(g, dbCom* − T/n) = e(S, τ·ĝ).
#[derive(Clone, Debug, PartialEq, Eq, CanonicalSerialize, CanonicalDeserialize)]
pub struct SumProof<B: CurveBackend> {
    pub total_com: G2<B>,
    pub opening: G1<B>,
}

impl<B: CurveBackend> SumProof<B> {
    pub fn identity() -> Self {
        Self {
            total_com: G2::<B>::zero(),
            opening: G1::<B>::zero(),
        }
    }
}

/// Fold one update into the sum proof.
pub fn sum_update<B: CurveBackend>(
    proof: &mut SumProof<B>,
    i: usize,
    delta: Scalar<B>,
    epsilon: Scalar<B>,
    srs: &StructuredReferenceString<B>,
) -> Result<(), Error> {
    if i >= srs.n() {
        return Err(Error::IndexOutOfRange {
            index: i,
            n: srs.n(),
        });
    }
    proof.total_com += srs.g_hat() * delta + srs.h_hat() * epsilon;
    proof.opening += srs.sum_quotient_g1[i] * delta + srs.sum_quotient_h1[i] * epsilon;
    Ok(())
}

/// e(g, dbCom* − T/n) = e(S, τ·ĝ).
pub fn sum_verify<B: CurveBackend>(
    db_com: G2<B>,
    proof: &SumProof<B>,
    srs: &StructuredReferenceString<B>,
) -> bool {
    let inv_n = srs.domain().inv_n();
    pairing_product_is_zero::<B>(
        &[srs.g(), -proof.opening],
        &[
            db_com - proof.total_com * inv_n,
            srs.powers_g2[1].into_group(),
        ],
    )
}

/// Masked bit-decomposition range proof for the whole database.
#[derive(Clone, Debug, PartialEq, Eq, CanonicalSerialize, CanonicalDeserialize)]
pub struct RangeProof<B: CurveBackend> {
    /// C_β = b_β(τ)·g + μ_β·(τⁿ−1)·h.
    pub bit_coms: Vec<G1<B>>,
    /// Ĉ_β = b_β(τ)·ĝ + μ̂_β·(τⁿ−1)·ĝ.
    pub bit_coms_hat: Vec<G2<B>>,
    /// ρ̂* = ρ̂ + γ₀·(τⁿ−1)·ĝ: blinded mask interpolant.
    pub mask_com_star: G2<B>,
    /// M* = −(γ₀ + Σ 2^β·μ_β)·h: the allowed vanishing multiple.
    pub m_star: G1<B>,
    /// W: batched binarity + equivalence quotient.
    pub batched_quotient: G1<B>,
}

fn gammas<B: CurveBackend>(bit_coms: &[G1<B>]) -> (Scalar<B>, Scalar<B>) {
    let mut buf = Vec::new();
    for c in bit_coms {
        buf.extend_from_slice(&encode(&c.into_affine()));
    }
    (
        hash_to_scalar::<B>(GAMMA1_TAG, &buf),
        hash_to_scalar::<B>(GAMMA2_TAG, &buf),
    )
}

/// Prove that every database value lies in [0, 2^64).
///
/// `mask_com` is the provider's running commitment ρ̂ to the mask
/// interpolant on ĝ.
pub fn range_prove<B: CurveBackend, R: Rng>(
    values: &[Scalar<B>],
    mask_com: G2<B>,
    srs: &StructuredReferenceString<B>,
    rng: &mut R,
) -> Result<RangeProof<B>, Error> {
    let n = srs.n();
    if values.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: values.len(),
        });
    }
    // Bit-decompose each value; anything at or above 2^64 is a prover error.
    let mut bit_evals = vec![vec![Scalar::<B>::zero(); n]; RANGE_BITS];
    for (t, v) in values.iter().enumerate() {
        let limbs = v.into_bigint();
        let bits = limbs.to_bits_le();
        if bits[RANGE_BITS..].iter().any(|b| *b) {
            return Err(Error::ValueOutOfRange(RANGE_BITS as u32));
        }
        for (beta, bit) in bits[..RANGE_BITS].iter().enumerate() {
            if *bit {
                bit_evals[beta][t] = Scalar::<B>::one();
            }
        }
    }
    range_prove_from_bits(&bit_evals, mask_com, srs, rng)
}

/// Range proof from explicit bit-polynomial evaluations.
///
/// No bit-validity check is performed: a dishonest vector here produces a
/// proof the verifier rejects. Exposed for fault-injection scenarios.
pub fn range_prove_from_bits<B: CurveBackend, R: Rng>(
    bit_evals: &[Vec<Scalar<B>>],
    mask_com: G2<B>,
    srs: &StructuredReferenceString<B>,
    rng: &mut R,
) -> Result<RangeProof<B>, Error> {
    use ark_ff::UniformRand;
    let m = bit_evals.len();
    let domain = srs.domain();

    // Blinding scalars are drawn sequentially so transcripts stay
    // deterministic for a fixed seed; the per-bit work is independent.
    let mu: Vec<Scalar<B>> = (0..m).map(|_| Scalar::<B>::rand(rng)).collect();
    let mu_hat: Vec<Scalar<B>> = (0..m).map(|_| Scalar::<B>::rand(rng)).collect();
    let gamma0 = Scalar::<B>::rand(rng);

    struct BitPart<B: CurveBackend> {
        bit_com: G1<B>,
        bit_com_hat: G2<B>,
        term: G1<B>,
        equiv: G1<B>,
    }

    let parts: Vec<BitPart<B>> = bit_evals
        .par_iter()
        .enumerate()
        .map(|(beta, evals)| {
            let b_poly = domain.interpolate(evals);
            // (b² − b)/(xⁿ−1)·g: negate the (b − b²) quotient.
            let u = binarity_quotient_unchecked(&b_poly, domain)?;
            let u_com = crate::quotient::commit_coeffs::<B>(&u, srs)?;
            let b_g1 = msm_g1::<B>(&srs.lagrange_g1, evals)?;
            let b_h1 = msm_g1::<B>(&srs.lagrange_h1, evals)?;
            let b_g2 = msm_g2::<B>(&srs.lagrange_g2, evals)?;
            let bit_com = b_g1 + srs.vanishing_h1 * mu[beta];
            let bit_com_hat = b_g2 + srs.vanishing_g2 * mu_hat[beta];
            let term = -u_com
                + b_h1 * mu[beta]
                + b_g1 * mu_hat[beta]
                + srs.vanishing_h1 * (mu[beta] * mu_hat[beta])
                - srs.g() * mu_hat[beta];
            let equiv = srs.h() * mu[beta] - srs.g() * mu_hat[beta];
            Ok(BitPart {
                bit_com,
                bit_com_hat,
                term,
                equiv,
            })
        })
        .collect::<Result<_, Error>>()?;

    let bit_coms: Vec<G1<B>> = parts.iter().map(|p| p.bit_com).collect();
    let bit_coms_hat: Vec<G2<B>> = parts.iter().map(|p| p.bit_com_hat).collect();
    let (gamma1, gamma2) = gammas::<B>(&bit_coms);

    let mut batched_quotient = G1::<B>::zero();
    let mut pow1 = Scalar::<B>::one();
    let mut pow2 = Scalar::<B>::one();
    for p in &parts {
        batched_quotient += p.term * pow1 + p.equiv * pow2;
        pow1 *= gamma1;
        pow2 *= gamma2;
    }

    let mut mu_weighted = Scalar::<B>::zero();
    let mut two_pow = Scalar::<B>::one();
    for mu_beta in &mu {
        mu_weighted += two_pow * mu_beta;
        two_pow.double_in_place();
    }

    Ok(RangeProof {
        bit_coms,
        bit_coms_hat,
        mask_com_star: mask_com + srs.vanishing_g2 * gamma0,
        m_star: -(srs.h() * (gamma0 + mu_weighted)),
        batched_quotient,
    })
}

/// Verify a range proof against the database commitment.
pub fn range_verify<B: CurveBackend>(
    db_com: G2<B>,
    proof: &RangeProof<B>,
    srs: &StructuredReferenceString<B>,
) -> bool {
    let m = proof.bit_coms.len();
    if m != RANGE_BITS || proof.bit_coms_hat.len() != m {
        return false;
    }
    let g = srs.g();
    let g_hat = srs.g_hat();
    let vanishing = srs.vanishing_g2.into_group();
    let (gamma1, gamma2) = gammas::<B>(&proof.bit_coms);

    // Batched binarity/equivalence:
    // e(W, (τⁿ−1)ĝ) = Σ_β e(γ₁^β·(C_β − g), Ĉ_β)
    //               + e(Σ_β γ₂^β·C_β, ĝ) − e(g, Σ_β γ₂^β·Ĉ_β).
    let mut g1s: Vec<G1<B>> = Vec::with_capacity(m + 3);
    let mut g2s: Vec<G2<B>> = Vec::with_capacity(m + 3);
    let mut pow1 = Scalar::<B>::one();
    let mut pow2 = Scalar::<B>::one();
    let mut c_weighted = G1::<B>::zero();
    let mut c_hat_weighted = G2::<B>::zero();
    for beta in 0..m {
        g1s.push((proof.bit_coms[beta] - g) * pow1);
        g2s.push(proof.bit_coms_hat[beta]);
        c_weighted += proof.bit_coms[beta] * pow2;
        c_hat_weighted += proof.bit_coms_hat[beta] * pow2;
        pow1 *= gamma1;
        pow2 *= gamma2;
    }
    g1s.push(c_weighted);
    g2s.push(g_hat);
    g1s.push(-g);
    g2s.push(c_hat_weighted);
    g1s.push(-proof.batched_quotient);
    g2s.push(vanishing);
    if !pairing_product_is_zero::<B>(&g1s, &g2s) {
        return false;
    }

    // Recomposition: e(g, dbCom*) − e(Σ 2^β·C_β, ĝ)
    //              = e(h, ρ̂*) + e(M*, (τⁿ−1)ĝ).
    let mut decomp = G1::<B>::zero();
    let mut two_pow = Scalar::<B>::one();
    for beta in 0..m {
        decomp += proof.bit_coms[beta] * two_pow;
        two_pow.double_in_place();
    }
    pairing_product_is_zero::<B>(
        &[g, -decomp, -srs.h(), -proof.m_star],
        &[db_com, g_hat, proof.mask_com_star, vanishing],
    )
}

/// Full liabilities bundle: the vector-commitment epoch bundle plus the
/// range and sum proofs, with the APK proof in masked mode.
#[derive(Clone, Debug, PartialEq, Eq, CanonicalSerialize, CanonicalDeserialize)]
pub struct PpolBundle<B: CurveBackend> {
    pub base: EpochBundle<B>,
    pub range: RangeProof<B>,
    pub sum: SumProof<B>,
}

/// Close an epoch in liabilities mode: masked APK proof plus range and sum
/// proofs over the end-of-epoch database.
pub fn publish_ppol<B: CurveBackend, R: Rng>(
    provider: &mut ProviderState<B>,
    rng: &mut R,
) -> Result<PpolBundle<B>, Error> {
    let range = range_prove(provider.values(), provider.mask_com(), provider.srs(), rng)?;
    let sum = provider.sum_proof().clone();
    let base = provider.publish(ApkMode::Masked, rng)?;
    Ok(PpolBundle { base, range, sum })
}

/// Per-check auditor verdicts for a liabilities epoch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PpolVerdicts {
    pub base: EpochVerdicts,
    pub range: bool,
    pub sum: bool,
}

impl PpolVerdicts {
    pub fn all_ok(&self) -> bool {
        self.base.all_ok() && self.range && self.sum
    }
}

/// Run every auditor check for a liabilities bundle without mutating state.
pub fn check_epoch_ppol<B: CurveBackend>(
    auditor: &AuditorState<B>,
    bundle: &PpolBundle<B>,
    srs: &StructuredReferenceString<B>,
) -> PpolVerdicts {
    let base = auditor.check_epoch(&bundle.base, ApkMode::Masked, srs);
    PpolVerdicts {
        base,
        range: range_verify(bundle.base.db_com, &bundle.range, srs),
        sum: sum_verify(bundle.base.db_com, &bundle.sum, srs),
    }
}

/// Check and, on success, commit a liabilities epoch.
pub fn verify_epoch_ppol<B: CurveBackend>(
    auditor: &mut AuditorState<B>,
    bundle: &PpolBundle<B>,
    srs: &StructuredReferenceString<B>,
) -> PpolVerdicts {
    let verdicts = check_epoch_ppol(auditor, bundle, srs);
    if verdicts.all_ok() {
        auditor.commit_epoch(&bundle.base);
    }
    verdicts
}

/// Openings a user consumes after an epoch, bundled for convenience.
pub type UserOpenings<B> = (OpeningProof<B>, OpeningProof<B>);
