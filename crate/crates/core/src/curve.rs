//! Pairing-curve backend contract.
//!
//! The protocol works over a pairing triple (G, Ĝ, G_T) of prime order
//! ≈ 2^254. Everything above this module is generic over [`CurveBackend`];
//! the concrete curve is fixed here (BN254) so swapping the backend is a
//! one-line change plus a `hash_to_g2` implementation.

use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::{AffineRepr, CurveGroup, VariableBaseMSM};
use ark_ff::{Field, PrimeField};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use sha2::{Digest, Sha256};

use crate::Error;

/// Field element of the scalar field F.
pub type Scalar<B> = <B as Pairing>::ScalarField;
/// Element of the first source group G.
pub type G1<B> = <B as Pairing>::G1;
/// Element of the second source group Ĝ.
pub type G2<B> = <B as Pairing>::G2;
/// Affine form of a G element (storage / wire form).
pub type G1Affine<B> = <B as Pairing>::G1Affine;
/// Affine form of a Ĝ element.
pub type G2Affine<B> = <B as Pairing>::G2Affine;
/// Element of the target group G_T.
pub type Gt<B> = PairingOutput<B>;

/// Contract a pairing-friendly curve must satisfy to back the protocol.
///
/// `Pairing` supplies the group and pairing arithmetic; the backend adds a
/// deterministic hash onto the second source group, used for epoch tags in
/// the signature scheme.
pub trait CurveBackend: Pairing {
    /// Hash `message` to a point of the prime-order subgroup of Ĝ.
    ///
    /// Deterministic in `(domain_tag, message)` and modeled as a random
    /// oracle into Ĝ.
    fn hash_to_g2(domain_tag: &[u8], message: &[u8]) -> Self::G2;
}

/// The curve the library is built against by default.
pub type DefaultCurve = ark_bn254::Bn254;

impl CurveBackend for ark_bn254::Bn254 {
    fn hash_to_g2(domain_tag: &[u8], message: &[u8]) -> Self::G2 {
        bn254_hash_to_g2(domain_tag, message)
    }
}

/// `expand_message_xmd` with SHA-256 (RFC 9380, section 5.3.1).
pub fn expand_message_xmd(dst: &[u8], msg: &[u8], len_in_bytes: usize) -> Vec<u8> {
    const B_IN_BYTES: usize = 32; // SHA-256 output
    const R_IN_BYTES: usize = 64; // SHA-256 block
    let ell = len_in_bytes.div_ceil(B_IN_BYTES);
    assert!(ell <= 255 && dst.len() <= 255, "xmd parameter bounds");

    let mut dst_prime = dst.to_vec();
    dst_prime.push(dst.len() as u8);

    let mut h = Sha256::new();
    h.update([0u8; R_IN_BYTES]);
    h.update(msg);
    h.update((len_in_bytes as u16).to_be_bytes());
    h.update([0u8]);
    h.update(&dst_prime);
    let b0 = h.finalize();

    let mut h = Sha256::new();
    h.update(b0);
    h.update([1u8]);
    h.update(&dst_prime);
    let mut b_prev = h.finalize();

    let mut out = b_prev.to_vec();
    for i in 2..=ell {
        let mut h = Sha256::new();
        let xored: Vec<u8> = b0.iter().zip(b_prev.iter()).map(|(x, y)| x ^ y).collect();
        h.update(xored);
        h.update([i as u8]);
        h.update(&dst_prime);
        b_prev = h.finalize();
        out.extend_from_slice(&b_prev);
    }
    out.truncate(len_in_bytes);
    out
}

// RFC 9380 hash_to_field parameter for a ~254-bit prime: L = ceil((254+128)/8).
const FIELD_HASH_BYTES: usize = 48;

fn bn254_hash_to_g2(dst: &[u8], msg: &[u8]) -> ark_bn254::G2Projective {
    use ark_bn254::{g2, Fq, Fq2, G2Affine};
    use ark_ec::short_weierstrass::SWCurveConfig;

    // Hash-to-field per RFC 9380, then map to the curve by incrementing a
    // counter until x^3 + b is square (the classic MapToGroup construction;
    // BN254 has no ratified RFC suite). The counter is part of the hashed
    // message, so the output stays deterministic.
    for ctr in 0u8..=255 {
        let mut input = Vec::with_capacity(msg.len() + 1);
        input.extend_from_slice(msg);
        input.push(ctr);
        let uniform = expand_message_xmd(dst, &input, 2 * FIELD_HASH_BYTES);
        let c0 = Fq::from_be_bytes_mod_order(&uniform[..FIELD_HASH_BYTES]);
        let c1 = Fq::from_be_bytes_mod_order(&uniform[FIELD_HASH_BYTES..]);
        let x = Fq2::new(c0, c1);
        let y2 = x * x * x + g2::Config::COEFF_B;
        if let Some(y) = y2.sqrt() {
            // Canonical sign: smaller compressed encoding of the two roots.
            let neg = -y;
            let pick = |a: &Fq2, b: &Fq2| -> Fq2 {
                let mut ab = Vec::new();
                let mut bb = Vec::new();
                a.serialize_compressed(&mut ab).expect("serialize");
                b.serialize_compressed(&mut bb).expect("serialize");
                if ab <= bb {
                    *a
                } else {
                    *b
                }
            };
            let point = G2Affine::new_unchecked(x, pick(&y, &neg));
            debug_assert!(point.is_on_curve());
            let cleared = point.clear_cofactor();
            if !cleared.is_zero() {
                return cleared.into_group();
            }
        }
    }
    unreachable!("no curve point found in 256 counter steps");
}

/// Hash arbitrary bytes to a scalar (Fiat–Shamir challenges).
pub fn hash_to_scalar<B: CurveBackend>(domain_tag: &[u8], message: &[u8]) -> Scalar<B> {
    let uniform = expand_message_xmd(domain_tag, message, FIELD_HASH_BYTES);
    Scalar::<B>::from_be_bytes_mod_order(&uniform)
}

/// Multi-scalar multiplication in G. Equals `Σ scalarᵢ · pointᵢ`.
pub fn msm_g1<B: CurveBackend>(
    points: &[G1Affine<B>],
    scalars: &[Scalar<B>],
) -> Result<G1<B>, Error> {
    if points.len() != scalars.len() {
        return Err(Error::LengthMismatch {
            expected: points.len(),
            got: scalars.len(),
        });
    }
    Ok(B::G1::msm(points, scalars).expect("lengths checked"))
}

/// Multi-scalar multiplication in Ĝ.
pub fn msm_g2<B: CurveBackend>(
    points: &[G2Affine<B>],
    scalars: &[Scalar<B>],
) -> Result<G2<B>, Error> {
    if points.len() != scalars.len() {
        return Err(Error::LengthMismatch {
            expected: points.len(),
            got: scalars.len(),
        });
    }
    Ok(B::G2::msm(points, scalars).expect("lengths checked"))
}

/// Batch pairing product: `Σᵢ e(aᵢ, bᵢ)`.
pub fn multi_pairing<B: CurveBackend>(g1s: &[G1<B>], g2s: &[G2<B>]) -> Gt<B> {
    debug_assert_eq!(g1s.len(), g2s.len());
    let g1s = B::G1::normalize_batch(g1s);
    let g2s = B::G2::normalize_batch(g2s);
    B::multi_pairing(g1s, g2s)
}

/// `true` iff `Σᵢ e(aᵢ, bᵢ) = 0` in G_T.
pub fn pairing_product_is_zero<B: CurveBackend>(g1s: &[G1<B>], g2s: &[G2<B>]) -> bool {
    multi_pairing::<B>(g1s, g2s) == PairingOutput::default()
}

/// Compressed canonical encoding of any serializable element.
pub fn encode<T: CanonicalSerialize>(value: &T) -> Vec<u8> {
    let mut out = Vec::with_capacity(value.compressed_size());
    value
        .serialize_compressed(&mut out)
        .expect("in-memory serialization");
    out
}

/// Decode a compressed encoding, rejecting off-curve or out-of-subgroup data.
pub fn decode<T: CanonicalDeserialize>(bytes: &[u8]) -> Result<T, Error> {
    Ok(T::deserialize_compressed(bytes)?)
}
