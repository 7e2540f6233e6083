//! KZG vector commitments with maintainable proof trees.
//!
//! A commitment to values (a_0, …, a_{n−1}) is the commitment to their
//! interpolant p over H. An opening for index i is the chain of quotients
//! (π_{i,0}, …, π_{i,log n −1}) with
//!
//!   p(x) − p(ω^i) = Σ_j π_{i,j}(x) · (x^{2^j} − ω^{i·2^j}),
//!
//! checked by pairing against the [τ^{2^j}·ĝ] step bases. All n openings
//! share structure: sibling subtrees carry equal quotients, so the whole
//! family collapses into a perfect binary heap of n − 1 group elements over
//! FFT-ordered leaves. An opening is a root-to-leaf path read, and a single
//! value update touches exactly the log n nodes on that path.
//!
//! Tree node values always live in G; commitments may live in G (key table)
//! or Ĝ (database, with h-masking folded into both commitment and nodes).

use ark_ec::AffineRepr;
use ark_ff::Zero;
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};

use crate::curve::{msm_g1, pairing_product_is_zero, CurveBackend, G1Affine, Scalar, G1};
use crate::domain::Domain;
use crate::srs::StructuredReferenceString;
use crate::Error;

/// Which base family a commitment was formed over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseRole {
    /// g (first source group).
    G,
    /// h (first source group, masking base).
    H,
    /// ĝ (second source group).
    GHat,
    /// ĥ (second source group, masking base).
    HHat,
}

/// A KZG vector commitment tagged with its source group and masking status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Commitment<B: CurveBackend> {
    G1 {
        point: crate::curve::G1<B>,
        masked: bool,
    },
    G2 {
        point: crate::curve::G2<B>,
        masked: bool,
    },
}

/// Claimed value of one slot, encoded in the group matching the commitment
/// side. For masked Ĝ commitments the claim is v·ĝ + ρ·ĥ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClaimedValue<B: CurveBackend> {
    G1(crate::curve::G1<B>),
    G2(crate::curve::G2<B>),
}

impl<B: CurveBackend> ClaimedValue<B> {
    pub fn scalar_g1(z: Scalar<B>, srs: &StructuredReferenceString<B>) -> Self {
        ClaimedValue::G1(srs.g() * z)
    }

    pub fn scalar_g2(z: Scalar<B>, srs: &StructuredReferenceString<B>) -> Self {
        ClaimedValue::G2(srs.g_hat() * z)
    }

    pub fn masked_g2(v: Scalar<B>, rho: Scalar<B>, srs: &StructuredReferenceString<B>) -> Self {
        ClaimedValue::G2(srs.g_hat() * v + srs.h_hat() * rho)
    }
}

/// Commit to a value vector over the Lagrange bases of the chosen role.
pub fn commit<B: CurveBackend>(
    values: &[Scalar<B>],
    role: BaseRole,
    srs: &StructuredReferenceString<B>,
) -> Result<Commitment<B>, Error> {
    if values.len() != srs.n() {
        return Err(Error::LengthMismatch {
            expected: srs.n(),
            got: values.len(),
        });
    }
    Ok(match role {
        BaseRole::G => Commitment::G1 {
            point: msm_g1::<B>(&srs.lagrange_g1, values)?,
            masked: false,
        },
        BaseRole::H => Commitment::G1 {
            point: msm_g1::<B>(&srs.lagrange_h1, values)?,
            masked: true,
        },
        BaseRole::GHat => Commitment::G2 {
            point: crate::curve::msm_g2::<B>(&srs.lagrange_g2, values)?,
            masked: false,
        },
        BaseRole::HHat => Commitment::G2 {
            point: crate::curve::msm_g2::<B>(&srs.lagrange_h2, values)?,
            masked: true,
        },
    })
}

/// Opening proof: the log n path quotient commitments for one index.
#[derive(Clone, Debug, PartialEq, Eq, CanonicalSerialize, CanonicalDeserialize)]
pub struct OpeningProof<B: CurveBackend> {
    pub index: usize,
    pub components: Vec<G1<B>>,
}

impl<B: CurveBackend> OpeningProof<B> {
    /// All-identity proof (openings of the zero vector).
    pub fn identity(index: usize, log_n: u32) -> Self {
        Self {
            index,
            components: vec![G1::<B>::zero(); log_n as usize],
        }
    }
}

/// Heap-ordered tree of quotient commitments for one committed vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofTree<B: CurveBackend> {
    /// 1-indexed heap; slot 0 unused. Node v at depth d covers the FFT
    /// positions whose top d bits select v within its level.
    nodes: Vec<G1<B>>,
    n: usize,
    log_n: u32,
}

impl<B: CurveBackend> ProofTree<B> {
    /// Tree of the zero vector: every node is the identity.
    pub fn empty(n: usize) -> Result<Self, Error> {
        if !n.is_power_of_two() || n < 2 {
            return Err(Error::InvalidDomainSize(n));
        }
        Ok(Self {
            nodes: vec![G1::<B>::zero(); n],
            n,
            log_n: n.trailing_zeros(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Build the tree for a value vector over a powers-of-τ basis
    /// (`srs.powers_g1` or `srs.powers_h1` depending on which part of a
    /// masked commitment this tree carries).
    pub fn build(
        values: &[Scalar<B>],
        basis: &[G1Affine<B>],
        domain: &Domain<Scalar<B>>,
    ) -> Result<Self, Error> {
        let n = domain.n();
        if values.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: values.len(),
            });
        }
        let mut tree = Self::empty(n)?;
        let mut coeffs = domain.ifft(values);
        coeffs.resize(n, Scalar::<B>::zero());
        tree.fill(1, 0, 0, coeffs, basis, domain)?;
        Ok(tree)
    }

    /// Masked build: g-part for the values, h-part for the masks, summed
    /// node-wise (verification only ever consumes the sum).
    pub fn build_masked(
        values: &[Scalar<B>],
        masks: &[Scalar<B>],
        srs: &StructuredReferenceString<B>,
    ) -> Result<Self, Error> {
        let mut tree = Self::build(values, &srs.powers_g1, srs.domain())?;
        let mask_tree = Self::build(masks, &srs.powers_h1, srs.domain())?;
        for (a, b) in tree.nodes.iter_mut().zip(&mask_tree.nodes) {
            *a += b;
        }
        Ok(tree)
    }

    // Remainder-splitting recursion. Node v at depth `depth` holds the high
    // half of its remainder, committed in coefficient form; the children get
    // the folded halves lo ± ω^{class·half}·hi.
    fn fill(
        &mut self,
        v: usize,
        depth: u32,
        class: usize,
        rem: Vec<Scalar<B>>,
        basis: &[G1Affine<B>],
        domain: &Domain<Scalar<B>>,
    ) -> Result<(), Error> {
        let half = rem.len() / 2;
        let (lo, hi) = rem.split_at(half);
        self.nodes[v] = if hi.iter().all(|c| c.is_zero()) {
            G1::<B>::zero()
        } else {
            msm_g1::<B>(&basis[..half], hi)?
        };
        if half == 1 {
            return Ok(());
        }
        let c = domain.element(class * half);
        let left: Vec<_> = lo.iter().zip(hi).map(|(l, h)| *l + c * h).collect();
        let right: Vec<_> = lo.iter().zip(hi).map(|(l, h)| *l - c * h).collect();
        self.fill(2 * v, depth + 1, class, left, basis, domain)?;
        self.fill(
            2 * v + 1,
            depth + 1,
            class + (1 << depth),
            right,
            basis,
            domain,
        )
    }

    fn path_node(&self, position: usize, level: usize) -> usize {
        let depth = self.log_n as usize - 1 - level;
        (1usize << depth) + (position >> (level + 1))
    }

    /// Read the opening for index `i` off the tree: O(log n), no group math.
    pub fn open(&self, i: usize, domain: &Domain<Scalar<B>>) -> Result<OpeningProof<B>, Error> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange {
                index: i,
                n: self.n,
            });
        }
        let pos = domain.perm(i);
        let components = (0..self.log_n as usize)
            .map(|j| self.nodes[self.path_node(pos, j)])
            .collect();
        Ok(OpeningProof {
            index: i,
            components,
        })
    }

    /// Add `scalar · row[j]` to the log n path nodes of index `i`.
    ///
    /// `row` is the [L_{i,j}(τ)·base] family row for `i`; with the matching
    /// commitment delta this keeps every opening in the tree valid.
    pub fn maintain_scaled(
        &mut self,
        i: usize,
        scalar: Scalar<B>,
        row: &[G1Affine<B>],
        domain: &Domain<Scalar<B>>,
    ) -> Result<(), Error> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange {
                index: i,
                n: self.n,
            });
        }
        if row.len() != self.log_n as usize {
            return Err(Error::LengthMismatch {
                expected: self.log_n as usize,
                got: row.len(),
            });
        }
        if scalar.is_zero() {
            return Ok(());
        }
        let pos = domain.perm(i);
        for (j, base) in row.iter().enumerate() {
            let v = self.path_node(pos, j);
            self.nodes[v] += *base * scalar;
        }
        Ok(())
    }

    /// Add precomputed group terms (e.g. a user's sk·L_{i,j} helpers) to the
    /// path nodes of index `i`. This is the committed-secret maintenance.
    pub fn maintain_terms(
        &mut self,
        i: usize,
        terms: &[G1<B>],
        domain: &Domain<Scalar<B>>,
    ) -> Result<(), Error> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange {
                index: i,
                n: self.n,
            });
        }
        if terms.len() != self.log_n as usize {
            return Err(Error::LengthMismatch {
                expected: self.log_n as usize,
                got: terms.len(),
            });
        }
        let pos = domain.perm(i);
        for (j, term) in terms.iter().enumerate() {
            let v = self.path_node(pos, j);
            self.nodes[v] += term;
        }
        Ok(())
    }
}

/// Verify an opening against a commitment.
///
/// For a G commitment: e(C − Z, ĝ) = Σ_j e(π_{i,j}, [τ^{2^j}·ĝ] − ω^{i·2^j}·ĝ).
/// For a Ĝ commitment the left side becomes e(g, Ĉ − Z); masked claims fold
/// the h-part into Z.
pub fn amt_verify<B: CurveBackend>(
    com: &Commitment<B>,
    i: usize,
    claimed: &ClaimedValue<B>,
    proof: &OpeningProof<B>,
    srs: &StructuredReferenceString<B>,
) -> bool {
    let log_n = srs.log_n() as usize;
    if proof.components.len() != log_n || i >= srs.n() || proof.index != i {
        return false;
    }
    let mut g1s = Vec::with_capacity(log_n + 1);
    let mut g2s = Vec::with_capacity(log_n + 1);
    match (com, claimed) {
        (Commitment::G1 { point, .. }, ClaimedValue::G1(z)) => {
            g1s.push(*point - z);
            g2s.push(srs.g_hat());
        }
        (Commitment::G2 { point, .. }, ClaimedValue::G2(z)) => {
            g1s.push(srs.g());
            g2s.push(*point - z);
        }
        _ => return false,
    }
    let g_hat = srs.g_hat();
    for (j, pi) in proof.components.iter().enumerate() {
        let omega_pow = srs.domain().element((i << j) % srs.n());
        g1s.push(-*pi);
        g2s.push(srs.amt_step_g2[j].into_group() - g_hat * omega_pow);
    }
    pairing_product_is_zero::<B>(&g1s, &g2s)
}
