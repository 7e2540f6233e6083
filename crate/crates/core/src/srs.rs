//! Structured reference string: powers-of-τ bases on both source groups and
//! every derived family the protocol consumes.
//!
//! Besides the plain powers and Lagrange bases, verifiers need bases for the
//! per-user helper checks: the proof-tree quotients L_{i,j}, the diagonal
//! products (ℓ_i² − ℓ_i)/(xⁿ − 1) and the sum-opening quotients
//! (ℓ_i − 1/n)/x. Off-diagonal products ℓ_i·ℓ_j/(xⁿ − 1) are *not*
//! materialized (the table is O(n²)); [`StructuredReferenceString::quotient_base_g2`]
//! derives any of them on demand from two Lagrange bases via partial
//! fractions.
//!
//! The second generator pair (h, ĥ) shares the trapdoor τ and satisfies
//! ĥ = log_g(h)·ĝ, which masked commitments rely on.

use ark_ec::scalar_mul::BatchMulPreprocessing;
use ark_ec::{AffineRepr, CurveGroup, PrimeGroup};
use ark_ff::{batch_inversion, Field, One, Zero};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};
use std::io::{Read, Write};

use crate::curve::{CurveBackend, G1Affine, G2Affine, Scalar, G1, G2};
use crate::domain::Domain;
use crate::Error;

const FILE_MAGIC: &[u8; 8] = b"PPOLSRS\0";
const FILE_VERSION: u32 = 1;

/// How the reference string is produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetupMode {
    /// Deterministic test setup that samples and *retains* the trapdoor.
    /// Never use outside tests and local experiments.
    InsecureTest { seed: u64 },
    /// Placeholder for a real multi-party ceremony; [`setup`] refuses to run
    /// it and callers load a ceremony-produced file instead.
    CeremonyStub,
}

/// Trapdoor retained by the insecure test setup: τ and η = log_g(h).
///
/// Only ever returned by [`SetupMode::InsecureTest`]; it is not part of the
/// SRS file format and must not enter transcripts.
#[derive(Clone, Debug)]
pub struct TrapdoorMaterial<B: CurveBackend> {
    pub tau: Scalar<B>,
    pub eta: Scalar<B>,
}

/// All public bases derived from (τ, η).
///
/// Flattened families use row-major `[i][j]` indexing with `log_n` columns.
pub struct StructuredReferenceString<B: CurveBackend> {
    n: usize,
    log_n: u32,
    insecure: bool,
    domain: Domain<Scalar<B>>,
    /// [τ^i·g], i ∈ [0, n).
    pub powers_g1: Vec<G1Affine<B>>,
    /// [τ^i·ĝ], i ∈ [0, n].
    pub powers_g2: Vec<G2Affine<B>>,
    /// [τ^i·h], i ∈ [0, n).
    pub powers_h1: Vec<G1Affine<B>>,
    /// [τ^i·ĥ], i ∈ [0, n].
    pub powers_h2: Vec<G2Affine<B>>,
    /// [ℓ_i(τ)·g].
    pub lagrange_g1: Vec<G1Affine<B>>,
    /// [ℓ_i(τ)·ĝ].
    pub lagrange_g2: Vec<G2Affine<B>>,
    /// [ℓ_i(τ)·h].
    pub lagrange_h1: Vec<G1Affine<B>>,
    /// [ℓ_i(τ)·ĥ].
    pub lagrange_h2: Vec<G2Affine<B>>,
    /// Proof-tree quotient bases [L_{i,j}(τ)·g], n·log n entries.
    pub amt_quotient_g1: Vec<G1Affine<B>>,
    /// [L_{i,j}(τ)·h].
    pub amt_quotient_h1: Vec<G1Affine<B>>,
    /// [L_{i,j}(τ)·ĝ] (helper verification).
    pub amt_quotient_g2: Vec<G2Affine<B>>,
    /// [((ℓ_i² − ℓ_i)/(xⁿ−1))(τ)·g].
    pub diag_quotient_g1: Vec<G1Affine<B>>,
    /// [((ℓ_i² − ℓ_i)/(xⁿ−1))(τ)·h].
    pub diag_quotient_h1: Vec<G1Affine<B>>,
    /// [((ℓ_i² − ℓ_i)/(xⁿ−1))(τ)·ĝ].
    pub diag_quotient_g2: Vec<G2Affine<B>>,
    /// [((ℓ_i² − ℓ_i)/(xⁿ−1))(τ)·ĥ].
    pub diag_quotient_h2: Vec<G2Affine<B>>,
    /// [((ℓ_i − 1/n)/x)(τ)·g].
    pub sum_quotient_g1: Vec<G1Affine<B>>,
    /// [((ℓ_i − 1/n)/x)(τ)·h].
    pub sum_quotient_h1: Vec<G1Affine<B>>,
    /// [((ℓ_i − 1/n)/x)(τ)·ĝ].
    pub sum_quotient_g2: Vec<G2Affine<B>>,
    /// [τ^{2^j}·ĝ], j ∈ [0, log n].
    pub amt_step_g2: Vec<G2Affine<B>>,
    /// (τⁿ − 1)·ĝ.
    pub vanishing_g2: G2Affine<B>,
    /// (τⁿ − 1)·h.
    pub vanishing_h1: G1Affine<B>,
}

/// Run the trusted setup for a capacity-n system.
///
/// Test mode additionally returns the trapdoor so tests can build oracles.
pub fn setup<B: CurveBackend>(
    n: usize,
    mode: SetupMode,
) -> Result<(StructuredReferenceString<B>, Option<TrapdoorMaterial<B>>), Error> {
    match mode {
        SetupMode::CeremonyStub => Err(Error::CeremonyUnavailable),
        SetupMode::InsecureTest { seed } => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let domain = Domain::<Scalar<B>>::new(n)?;
            let trapdoor = loop {
                let tau: Scalar<B> = sample_scalar::<B, _>(&mut rng);
                let eta: Scalar<B> = sample_scalar::<B, _>(&mut rng);
                let usable =
                    !tau.is_zero() && !eta.is_zero() && !domain.vanishing_at(tau).is_zero();
                if usable {
                    break TrapdoorMaterial { tau, eta };
                }
            };
            let srs = StructuredReferenceString::from_trapdoor(n, &trapdoor)?;
            Ok((srs, Some(trapdoor)))
        }
    }
}

fn sample_scalar<B: CurveBackend, R: Rng>(rng: &mut R) -> Scalar<B> {
    use ark_ff::UniformRand;
    Scalar::<B>::rand(rng)
}

impl<B: CurveBackend> StructuredReferenceString<B> {
    /// Derive every base family from explicit trapdoor material.
    pub fn from_trapdoor(n: usize, trapdoor: &TrapdoorMaterial<B>) -> Result<Self, Error> {
        let domain = Domain::<Scalar<B>>::new(n)?;
        let log_n = domain.log_n();
        let tau = trapdoor.tau;
        let eta = trapdoor.eta;
        if tau.is_zero() || eta.is_zero() || domain.vanishing_at(tau).is_zero() {
            return Err(Error::IdentityViolation("degenerate trapdoor"));
        }
        // Range proofs decompose values into RANGE_BITS bits; summing n of
        // them must not wrap the field: m ≤ ⌊log₂(|F|/n)⌋.
        let field_bits = <Scalar<B> as ark_ff::PrimeField>::MODULUS_BIT_SIZE - 1;
        if crate::ppol::RANGE_BITS as u32 > field_bits - log_n {
            return Err(Error::ValueOutOfRange(crate::ppol::RANGE_BITS as u32));
        }

        // Scalar families.
        let mut pow_tau = Vec::with_capacity(n + 1);
        let mut acc = Scalar::<B>::one();
        for _ in 0..=n {
            pow_tau.push(acc);
            acc *= tau;
        }
        let lag = domain.lagrange_evals_at(tau);
        let vanishing = pow_tau[n] - Scalar::<B>::one();
        let inv_vanishing = vanishing.inverse().expect("tau^n != 1");
        let inv_tau = tau.inverse().expect("tau != 0");
        let inv_n = domain.inv_n();

        let diag: Vec<Scalar<B>> = lag
            .iter()
            .map(|l| (l.square() - l) * inv_vanishing)
            .collect();
        let sumq: Vec<Scalar<B>> = lag.iter().map(|l| (*l - inv_n) * inv_tau).collect();

        // Tree quotients L_{i,j}(τ) = (τ^{2^j} − ω^{i·2^j})
        //                           / (2^{j+1}·ω^{i·(2^{j+1}−1)}·(τ − ω^i)).
        let mut tau_minus_omega: Vec<Scalar<B>> = (0..n).map(|i| tau - domain.element(i)).collect();
        batch_inversion(&mut tau_minus_omega);
        let inv_two = Scalar::<B>::from(2u64).inverse().expect("char != 2");
        let mut amt = vec![Scalar::<B>::zero(); n * log_n as usize];
        for i in 0..n {
            let mut inv_pow2 = inv_two;
            for j in 0..log_n as usize {
                let num = pow_tau[1usize << j] - domain.element((i << j) % n);
                let omega_exp = (i * ((1usize << (j + 1)) - 1)) % n;
                let omega_inv = domain.element((n - omega_exp) % n);
                amt[i * log_n as usize + j] = num * tau_minus_omega[i] * inv_pow2 * omega_inv;
                inv_pow2 *= inv_two;
            }
        }

        // Group element batches.
        let g = G1::<B>::generator();
        let g_hat = G2::<B>::generator();
        let h = g * eta;
        let h_hat = g_hat * eta;
        let table_g = BatchMulPreprocessing::new(g, n.max(2) * log_n as usize);
        let table_h = BatchMulPreprocessing::new(h, n.max(2) * log_n as usize);
        let table_g2 = BatchMulPreprocessing::new(g_hat, n.max(2) * log_n as usize);
        let table_h2 = BatchMulPreprocessing::new(h_hat, n + 1);

        let steps: Vec<Scalar<B>> = (0..=log_n as usize).map(|j| pow_tau[1usize << j]).collect();

        let srs = Self {
            n,
            log_n,
            insecure: true,
            domain,
            powers_g1: table_g.batch_mul(&pow_tau[..n]),
            powers_g2: table_g2.batch_mul(&pow_tau),
            powers_h1: table_h.batch_mul(&pow_tau[..n]),
            powers_h2: table_h2.batch_mul(&pow_tau),
            lagrange_g1: table_g.batch_mul(&lag),
            lagrange_g2: table_g2.batch_mul(&lag),
            lagrange_h1: table_h.batch_mul(&lag),
            lagrange_h2: table_h2.batch_mul(&lag),
            amt_quotient_g1: table_g.batch_mul(&amt),
            amt_quotient_h1: table_h.batch_mul(&amt),
            amt_quotient_g2: table_g2.batch_mul(&amt),
            diag_quotient_g1: table_g.batch_mul(&diag),
            diag_quotient_h1: table_h.batch_mul(&diag),
            diag_quotient_g2: table_g2.batch_mul(&diag),
            diag_quotient_h2: table_h2.batch_mul(&diag),
            sum_quotient_g1: table_g.batch_mul(&sumq),
            sum_quotient_h1: table_h.batch_mul(&sumq),
            sum_quotient_g2: table_g2.batch_mul(&sumq),
            amt_step_g2: table_g2.batch_mul(&steps),
            vanishing_g2: (g_hat * vanishing).into_affine(),
            vanishing_h1: (h * vanishing).into_affine(),
        };
        Ok(srs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn log_n(&self) -> u32 {
        self.log_n
    }

    pub fn is_insecure(&self) -> bool {
        self.insecure
    }

    pub fn domain(&self) -> &Domain<Scalar<B>> {
        &self.domain
    }

    pub fn g(&self) -> G1<B> {
        self.powers_g1[0].into_group()
    }

    pub fn g_hat(&self) -> G2<B> {
        self.powers_g2[0].into_group()
    }

    pub fn h(&self) -> G1<B> {
        self.powers_h1[0].into_group()
    }

    pub fn h_hat(&self) -> G2<B> {
        self.powers_h2[0].into_group()
    }

    /// Row `i` of the [L_{i,j}(τ)·g] family (log n entries).
    pub fn amt_row_g1(&self, i: usize) -> &[G1Affine<B>] {
        let l = self.log_n as usize;
        &self.amt_quotient_g1[i * l..(i + 1) * l]
    }

    /// Row `i` of the [L_{i,j}(τ)·h] family.
    pub fn amt_row_h1(&self, i: usize) -> &[G1Affine<B>] {
        let l = self.log_n as usize;
        &self.amt_quotient_h1[i * l..(i + 1) * l]
    }

    /// Row `i` of the [L_{i,j}(τ)·ĝ] family.
    pub fn amt_row_g2(&self, i: usize) -> &[G2Affine<B>] {
        let l = self.log_n as usize;
        &self.amt_quotient_g2[i * l..(i + 1) * l]
    }

    /// Partial-fraction coefficients (c_i, c_j) with
    /// ℓ_i·ℓ_j/(xⁿ−1) = c_i·ℓ_i + c_j·ℓ_j for i ≠ j.
    pub fn pair_quotient_coeffs(&self, i: usize, j: usize) -> (Scalar<B>, Scalar<B>) {
        let wi = self.domain.element(i);
        let wj = self.domain.element(j);
        let c = (Scalar::<B>::from(self.n as u64) * (wi - wj))
            .inverse()
            .expect("distinct domain points");
        (c * wj, -(c * wi))
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<(), Error> {
        let n = self.n;
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        if j >= n {
            return Err(Error::IndexOutOfRange { index: j, n });
        }
        Ok(())
    }

    /// [ (ℓ_i·ℓ_j/(xⁿ−1))(τ)·ĝ ], derived on demand.
    pub fn quotient_base_g2(&self, i: usize, j: usize) -> Result<G2<B>, Error> {
        self.check_pair(i, j)?;
        if i == j {
            return Ok(self.diag_quotient_g2[i].into_group());
        }
        let (ci, cj) = self.pair_quotient_coeffs(i, j);
        Ok(self.lagrange_g2[i] * ci + self.lagrange_g2[j] * cj)
    }

    /// [ (ℓ_i·ℓ_j/(xⁿ−1))(τ)·ĥ ].
    pub fn quotient_base_h2(&self, i: usize, j: usize) -> Result<G2<B>, Error> {
        self.check_pair(i, j)?;
        if i == j {
            return Ok(self.diag_quotient_h2[i].into_group());
        }
        let (ci, cj) = self.pair_quotient_coeffs(i, j);
        Ok(self.lagrange_h2[i] * ci + self.lagrange_h2[j] * cj)
    }

    /// [ (ℓ_i·ℓ_j/(xⁿ−1))(τ)·g ] (prover side of helper generation).
    pub fn quotient_base_g1(&self, i: usize, j: usize) -> Result<G1<B>, Error> {
        self.check_pair(i, j)?;
        if i == j {
            return Ok(self.diag_quotient_g1[i].into_group());
        }
        let (ci, cj) = self.pair_quotient_coeffs(i, j);
        Ok(self.lagrange_g1[i] * ci + self.lagrange_g1[j] * cj)
    }

    /// [ (ℓ_i·ℓ_j/(xⁿ−1))(τ)·h ].
    pub fn quotient_base_h1(&self, i: usize, j: usize) -> Result<G1<B>, Error> {
        self.check_pair(i, j)?;
        if i == j {
            return Ok(self.diag_quotient_h1[i].into_group());
        }
        let (ci, cj) = self.pair_quotient_coeffs(i, j);
        Ok(self.lagrange_h1[i] * ci + self.lagrange_h1[j] * cj)
    }

    /// Short fingerprint binding (n, mode, generators, τ·g, τ·ĝ).
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(FILE_MAGIC);
        h.update(FILE_VERSION.to_be_bytes());
        h.update((self.n as u64).to_be_bytes());
        h.update([self.insecure as u8]);
        for p in [&self.powers_g1[0], &self.powers_g1[1]] {
            h.update(crate::curve::encode(p));
        }
        for p in [&self.powers_g2[0], &self.powers_g2[1]] {
            h.update(crate::curve::encode(p));
        }
        h.update(crate::curve::encode(&self.powers_h1[0]));
        h.update(crate::curve::encode(&self.powers_h2[0]));
        h.finalize().into()
    }

    /// Serialize to the SRS file format (header, then families in declared
    /// order, compressed points).
    pub fn save<W: Write>(&self, mut w: W) -> Result<(), Error> {
        let io = |e: std::io::Error| Error::Serialization(e.to_string());
        w.write_all(FILE_MAGIC).map_err(io)?;
        w.write_all(&FILE_VERSION.to_be_bytes()).map_err(io)?;
        w.write_all(&(self.n as u64).to_be_bytes()).map_err(io)?;
        w.write_all(&[self.insecure as u8]).map_err(io)?;
        self.powers_g1.serialize_compressed(&mut w)?;
        self.powers_g2.serialize_compressed(&mut w)?;
        self.powers_h1.serialize_compressed(&mut w)?;
        self.powers_h2.serialize_compressed(&mut w)?;
        self.lagrange_g1.serialize_compressed(&mut w)?;
        self.lagrange_g2.serialize_compressed(&mut w)?;
        self.lagrange_h1.serialize_compressed(&mut w)?;
        self.lagrange_h2.serialize_compressed(&mut w)?;
        self.amt_quotient_g1.serialize_compressed(&mut w)?;
        self.amt_quotient_h1.serialize_compressed(&mut w)?;
        self.amt_quotient_g2.serialize_compressed(&mut w)?;
        self.diag_quotient_g1.serialize_compressed(&mut w)?;
        self.diag_quotient_h1.serialize_compressed(&mut w)?;
        self.diag_quotient_g2.serialize_compressed(&mut w)?;
        self.diag_quotient_h2.serialize_compressed(&mut w)?;
        self.sum_quotient_g1.serialize_compressed(&mut w)?;
        self.sum_quotient_h1.serialize_compressed(&mut w)?;
        self.sum_quotient_g2.serialize_compressed(&mut w)?;
        self.amt_step_g2.serialize_compressed(&mut w)?;
        self.vanishing_g2.serialize_compressed(&mut w)?;
        self.vanishing_h1.serialize_compressed(&mut w)?;
        Ok(())
    }

    /// Load an SRS file. Points are not subgroup-checked here (files are
    /// locally produced artifacts); run [`Self::check_consistency`] to vet
    /// third-party files.
    pub fn load<R: Read>(mut r: R) -> Result<Self, Error> {
        let io = |e: std::io::Error| Error::Serialization(e.to_string());
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != FILE_MAGIC {
            return Err(Error::Serialization("bad SRS magic".into()));
        }
        let mut v = [0u8; 4];
        r.read_exact(&mut v).map_err(io)?;
        if u32::from_be_bytes(v) != FILE_VERSION {
            return Err(Error::Serialization("unsupported SRS version".into()));
        }
        let mut nb = [0u8; 8];
        r.read_exact(&mut nb).map_err(io)?;
        let n = u64::from_be_bytes(nb) as usize;
        let mut mode = [0u8; 1];
        r.read_exact(&mut mode).map_err(io)?;
        let domain = Domain::<Scalar<B>>::new(n)?;
        let log_n = domain.log_n();
        let srs = Self {
            n,
            log_n,
            insecure: mode[0] != 0,
            domain,
            powers_g1: Vec::deserialize_compressed_unchecked(&mut r)?,
            powers_g2: Vec::deserialize_compressed_unchecked(&mut r)?,
            powers_h1: Vec::deserialize_compressed_unchecked(&mut r)?,
            powers_h2: Vec::deserialize_compressed_unchecked(&mut r)?,
            lagrange_g1: Vec::deserialize_compressed_unchecked(&mut r)?,
            lagrange_g2: Vec::deserialize_compressed_unchecked(&mut r)?,
            lagrange_h1: Vec::deserialize_compressed_unchecked(&mut r)?,
            lagrange_h2: Vec::deserialize_compressed_unchecked(&mut r)?,
            amt_quotient_g1: Vec::deserialize_compressed_unchecked(&mut r)?,
            amt_quotient_h1: Vec::deserialize_compressed_unchecked(&mut r)?,
            amt_quotient_g2: Vec::deserialize_compressed_unchecked(&mut r)?,
            diag_quotient_g1: Vec::deserialize_compressed_unchecked(&mut r)?,
            diag_quotient_h1: Vec::deserialize_compressed_unchecked(&mut r)?,
            diag_quotient_g2: Vec::deserialize_compressed_unchecked(&mut r)?,
            diag_quotient_h2: Vec::deserialize_compressed_unchecked(&mut r)?,
            sum_quotient_g1: Vec::deserialize_compressed_unchecked(&mut r)?,
            sum_quotient_h1: Vec::deserialize_compressed_unchecked(&mut r)?,
            sum_quotient_g2: Vec::deserialize_compressed_unchecked(&mut r)?,
            amt_step_g2: Vec::deserialize_compressed_unchecked(&mut r)?,
            vanishing_g2: G2Affine::<B>::deserialize_compressed_unchecked(&mut r)?,
            vanishing_h1: G1Affine::<B>::deserialize_compressed_unchecked(&mut r)?,
        };
        if srs.powers_g1.len() != n || srs.powers_g2.len() != n + 1 {
            return Err(Error::Serialization("family size mismatch".into()));
        }
        Ok(srs)
    }

    /// Pairing-consistency suite over all stored families.
    ///
    /// Checks e(τ^i·g, ĝ) = e(g, τ^i·ĝ), e(g, ĥ) = e(h, ĝ) and the analogous
    /// relations for each derived family on a random linear combination, so
    /// a corrupted entry is caught with overwhelming probability.
    pub fn check_consistency<R: Rng>(&self, rng: &mut R) -> bool {
        use crate::curve::{msm_g1, msm_g2, pairing_product_is_zero};
        use ark_ff::UniformRand;

        let g_hat = self.g_hat();
        let g = self.g();

        // e(g, ĥ) = e(h, ĝ): shared η across generator pairs.
        if !pairing_product_is_zero::<B>(&[g, -self.h()], &[self.h_hat(), g_hat]) {
            return false;
        }

        // Each G1 family must pair against ĝ like its G2 sibling against g.
        let pairs: Vec<(&[G1Affine<B>], &[G2Affine<B>])> = vec![
            (&self.powers_g1, &self.powers_g2[..self.n]),
            (&self.lagrange_g1, &self.lagrange_g2),
            (&self.amt_quotient_g1, &self.amt_quotient_g2),
            (&self.diag_quotient_g1, &self.diag_quotient_g2),
            (&self.sum_quotient_g1, &self.sum_quotient_g2),
        ];
        for (fam1, fam2) in pairs {
            let coeffs: Vec<Scalar<B>> = (0..fam1.len()).map(|_| Scalar::<B>::rand(rng)).collect();
            let lhs = msm_g1::<B>(fam1, &coeffs).expect("same length");
            let rhs = msm_g2::<B>(fam2, &coeffs).expect("same length");
            if !pairing_product_is_zero::<B>(&[lhs, -g], &[g_hat, rhs]) {
                return false;
            }
        }

        // h-side families repeat the g-side scalars on base h: check against
        // the G2 g-side family with the ĥ generator swapped in.
        let h_pairs: Vec<(&[G1Affine<B>], &[G2Affine<B>])> = vec![
            (&self.powers_h1, &self.powers_g2[..self.n]),
            (&self.lagrange_h1, &self.lagrange_g2),
            (&self.amt_quotient_h1, &self.amt_quotient_g2),
            (&self.diag_quotient_h1, &self.diag_quotient_g2),
            (&self.sum_quotient_h1, &self.sum_quotient_g2),
        ];
        for (fam1, fam2) in h_pairs {
            let coeffs: Vec<Scalar<B>> = (0..fam1.len()).map(|_| Scalar::<B>::rand(rng)).collect();
            let lhs = msm_g1::<B>(fam1, &coeffs).expect("same length");
            let rhs = msm_g2::<B>(fam2, &coeffs).expect("same length");
            if !pairing_product_is_zero::<B>(&[lhs, -self.h()], &[g_hat, rhs]) {
                return false;
            }
        }

        // ĥ-side families against the h-side G1 families.
        let coeffs: Vec<Scalar<B>> = (0..self.n).map(|_| Scalar::<B>::rand(rng)).collect();
        let lhs = msm_g1::<B>(&self.lagrange_h1, &coeffs).expect("same length");
        let rhs = msm_g2::<B>(&self.lagrange_h2, &coeffs).expect("same length");
        if !pairing_product_is_zero::<B>(&[lhs, -g], &[g_hat, rhs]) {
            return false;
        }
        let lhs = msm_g1::<B>(&self.diag_quotient_h1, &coeffs).expect("same length");
        let rhs = msm_g2::<B>(&self.diag_quotient_h2, &coeffs).expect("same length");
        if !pairing_product_is_zero::<B>(&[lhs, -g], &[g_hat, rhs]) {
            return false;
        }
        let lhs = msm_g1::<B>(&self.powers_h1, &coeffs).expect("same length");
        let rhs = msm_g2::<B>(&self.powers_h2[..self.n], &coeffs).expect("same length");
        if !pairing_product_is_zero::<B>(&[lhs, -g], &[g_hat, rhs]) {
            return false;
        }
        // vanishing_h1 = (τⁿ−1)·h against τⁿ·ĥ − ĥ.
        if !pairing_product_is_zero::<B>(
            &[self.vanishing_h1.into_group(), -g],
            &[g_hat, self.powers_h2[self.n].into_group() - self.h_hat()],
        ) {
            return false;
        }

        // Structural spot checks: Lagrange bases are the iFFT of the powers,
        // the step bases match powers, vanishing elements match τⁿ − 1.
        let lag_from_powers = self.domain.ifft_in(
            &self
                .powers_g1
                .iter()
                .map(|p| p.into_group())
                .collect::<Vec<_>>(),
        );
        for (a, b) in lag_from_powers.iter().zip(&self.lagrange_g1) {
            if a.into_affine() != *b {
                return false;
            }
        }
        for j in 0..=self.log_n as usize {
            let expect = if (1usize << j) < self.n {
                // τ^{2^j}·ĝ only equals a stored power below n.
                Some(self.powers_g2[1usize << j])
            } else if (1usize << j) == self.n {
                Some(self.powers_g2[self.n])
            } else {
                None
            };
            if let Some(p) = expect {
                if self.amt_step_g2[j] != p {
                    return false;
                }
            }
        }
        if self.vanishing_g2.into_group() != self.powers_g2[self.n].into_group() - g_hat {
            return false;
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ark_bn254::{Bn254, Fr};
    use ark_ec::pairing::Pairing;
    use ark_poly::Polynomial;
    use rand::SeedableRng;

    fn test_srs(
        n: usize,
        seed: u64,
    ) -> (StructuredReferenceString<Bn254>, TrapdoorMaterial<Bn254>) {
        let (srs, td) = setup::<Bn254>(n, SetupMode::InsecureTest { seed }).unwrap();
        (srs, td.unwrap())
    }

    #[test]
    fn family_sizes() {
        let (srs, _) = test_srs(2, 0);
        assert_eq!(srs.powers_g2.len(), 3);
        assert_eq!(srs.powers_g1.len(), 2);
        assert_eq!(srs.amt_quotient_g1.len(), 2);
        assert_eq!(srs.amt_step_g2.len(), 2);
    }

    #[test]
    fn ceremony_mode_is_a_stub() {
        assert!(matches!(
            setup::<Bn254>(8, SetupMode::CeremonyStub),
            Err(Error::CeremonyUnavailable)
        ));
    }

    #[test]
    fn shared_trapdoor_across_groups() {
        let (srs, _) = test_srs(8, 1);
        for i in 0..8 {
            assert_eq!(
                Bn254::pairing(srs.powers_g1[i], srs.g_hat()),
                Bn254::pairing(srs.g(), srs.powers_g2[i])
            );
        }
        assert_eq!(
            Bn254::pairing(srs.g(), srs.h_hat()),
            Bn254::pairing(srs.h(), srs.g_hat())
        );
    }

    #[test]
    fn lagrange_is_fft_of_powers() {
        let (srs, td) = test_srs(8, 2);
        let lag = srs.domain().lagrange_evals_at(td.tau);
        for i in 0..8 {
            assert_eq!((srs.g() * lag[i]).into_affine(), srs.lagrange_g1[i]);
        }
        let from_powers = srs.domain().ifft_in(
            &srs.powers_g1
                .iter()
                .map(|p| p.into_group())
                .collect::<Vec<_>>(),
        );
        for i in 0..8 {
            assert_eq!(from_powers[i].into_affine(), srs.lagrange_g1[i]);
        }
    }

    #[test]
    fn quotient_base_matches_trapdoor_oracle() {
        let (srs, td) = test_srs(8, 3);
        let d = srs.domain();
        let l1 = d.lagrange_poly(1).unwrap();
        let l2 = d.lagrange_poly(2).unwrap();
        let expected =
            l1.evaluate(&td.tau) * l2.evaluate(&td.tau) / (td.tau.pow([8]) - Fr::from(1u64));
        let base = srs.quotient_base_g2(1, 2).unwrap();
        assert_eq!(base, srs.g_hat() * expected);
        // Pairing route: e(expected·g, ĝ) = e(g, base).
        assert_eq!(
            Bn254::pairing(srs.g() * expected, srs.g_hat()),
            Bn254::pairing(srs.g(), base)
        );
        // Diagonal base against the oracle.
        let diag = l1.evaluate(&td.tau) * (l1.evaluate(&td.tau) - Fr::from(1u64))
            / (td.tau.pow([8]) - Fr::from(1u64));
        assert_eq!(srs.quotient_base_g2(1, 1).unwrap(), srs.g_hat() * diag);
    }

    #[test]
    fn quotient_base_small_symbolic() {
        // n = 2: ℓ_0·ℓ_1/(x²−1) = −1/4.
        let (srs, _) = test_srs(2, 4);
        let minus_quarter = -Fr::from(4u64).inverse().unwrap();
        assert_eq!(
            srs.quotient_base_g2(0, 1).unwrap(),
            srs.g_hat() * minus_quarter
        );
    }

    #[test]
    fn deterministic_and_regenerable() {
        let (a, td) = test_srs(8, 5);
        let (b, _) = test_srs(8, 5);
        assert_eq!(a.powers_g1, b.powers_g1);
        assert_eq!(a.amt_quotient_g2, b.amt_quotient_g2);
        let c = StructuredReferenceString::<Bn254>::from_trapdoor(8, &td).unwrap();
        assert_eq!(a.powers_g1, c.powers_g1);
        assert_eq!(a.lagrange_h2, c.lagrange_h2);
        assert_eq!(a.vanishing_g2, c.vanishing_g2);
    }

    #[test]
    fn consistency_suite() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(99);
        for n in [2usize, 8, 64] {
            let (srs, _) = test_srs(n, 6);
            assert!(srs.check_consistency(&mut rng), "n = {n}");
        }
    }

    #[test]
    fn file_round_trip() {
        let (srs, _) = test_srs(8, 7);
        let mut buf = Vec::new();
        srs.save(&mut buf).unwrap();
        let mut buf2 = Vec::new();
        srs.save(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
        let loaded = StructuredReferenceString::<Bn254>::load(&buf[..]).unwrap();
        assert_eq!(loaded.n(), 8);
        assert_eq!(loaded.powers_g1, srs.powers_g1);
        assert_eq!(loaded.digest(), srs.digest());
        let mut buf3 = Vec::new();
        loaded.save(&mut buf3).unwrap();
        assert_eq!(buf, buf3);
    }
}
