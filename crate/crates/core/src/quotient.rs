//! Quotient arguments over the evaluation domain: zerocheck, binarity and
//! sumcheck.
//!
//! Each prover routine returns exact polynomial quotients; each identity is
//! verified with a constant number of pairings against commitments. Products
//! of two degree-(n−1) polynomials are computed over a size-2n domain, which
//! determines the product exactly (no wraparound aliasing).

use ark_ff::Zero;

use crate::curve::{pairing_product_is_zero, CurveBackend, Scalar, G1, G2};
use crate::domain::{Domain, Poly};
use crate::srs::StructuredReferenceString;
use crate::Error;

/// What a quotient commitment certifies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuotientKind {
    Zerocheck,
    Binarity,
    SumcheckQuotient,
    SumcheckRemainder,
    DegreeCheck,
}

/// A committed quotient polynomial together with its role.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuotientCommitment<B: CurveBackend> {
    pub point: G1<B>,
    pub kind: QuotientKind,
}

/// Quotient q with a·b − c = q·(xⁿ − 1), for inputs satisfying
/// a(ω^i)·b(ω^i) = c(ω^i) on all of H.
pub fn zerocheck_quotient<F: ark_ff::FftField>(
    a: &Poly<F>,
    b: &Poly<F>,
    c: &Poly<F>,
    domain: &Domain<F>,
) -> Result<Poly<F>, Error> {
    let product = a * b;
    let (quotient, remainder) = domain.divide_by_vanishing(&(&product - c));
    if !remainder.is_zero() {
        return Err(Error::IdentityViolation("a·b − c does not vanish on H"));
    }
    Ok(quotient)
}

/// Quotient u with b − b² = u·(xⁿ − 1), for bit-valued b over H.
pub fn binarity_quotient<F: ark_ff::FftField>(
    b: &Poly<F>,
    domain: &Domain<F>,
) -> Result<Poly<F>, Error> {
    let evals = domain.fft(&b.coeffs);
    if !evals.iter().all(|e| e.is_zero() || e.is_one()) {
        return Err(Error::NonBinaryValue);
    }
    binarity_quotient_unchecked(b, domain)
}

/// Binarity quotient from evaluations over H (bit vector form).
pub fn binarity_quotient_from_evals<F: ark_ff::FftField>(
    evals: &[F],
    domain: &Domain<F>,
) -> Result<Poly<F>, Error> {
    if evals.len() != domain.n() {
        return Err(Error::LengthMismatch {
            expected: domain.n(),
            got: evals.len(),
        });
    }
    if !evals.iter().all(|e| e.is_zero() || e.is_one()) {
        return Err(Error::NonBinaryValue);
    }
    binarity_quotient_unchecked(&domain.interpolate(evals), domain)
}

/// Binarity quotient without the bit-valuedness precondition check.
///
/// With non-bit inputs the identity b − b² = u·(xⁿ−1) has no polynomial
/// solution and the division remainder is dropped, so the resulting
/// commitment cannot convince the verifier. Exposed for fault-injection
/// scenarios that need a dishonest prover.
pub fn binarity_quotient_unchecked<F: ark_ff::FftField>(
    b: &Poly<F>,
    domain: &Domain<F>,
) -> Result<Poly<F>, Error> {
    let product = b - &(b * b);
    let (quotient, _remainder) = domain.divide_by_vanishing(&product);
    Ok(quotient)
}

/// Sumcheck decomposition f·b = total/n + r·x + t·(xⁿ − 1) with
/// total = Σ_i f(ω^i)·b(ω^i) and deg r, deg t ≤ n − 2.
pub fn sumcheck_quotients<F: ark_ff::FftField>(
    f: &Poly<F>,
    b: &Poly<F>,
    domain: &Domain<F>,
) -> (F, Poly<F>, Poly<F>) {
    let n = domain.n();
    let product = f * b;
    let (t, rem) = domain.divide_by_vanishing(&product);
    // Σ over H of a degree ≤ 2n−2 polynomial is n·(p_0 + p_n); the fold has
    // already collapsed p_n into rem_0.
    let rem0 = rem.coeffs.first().copied().unwrap_or_else(F::zero);
    let total = rem0 * F::from(n as u64);
    let r = if rem.coeffs.len() <= 1 {
        Poly::zero()
    } else {
        Poly {
            coeffs: rem.coeffs[1..].to_vec(),
        }
    };
    (total, r, t)
}

/// The auditor-side zerocheck pairing identity:
/// e(keyCom, dbCom*) = e(Σ + Δ_C, ĝ) + e(Q, [τⁿ·ĝ] − ĝ).
pub fn verify_zerocheck<B: CurveBackend>(
    key_com: G1<B>,
    db_com: G2<B>,
    sigma_total: G1<B>,
    quotient: G1<B>,
    srs: &StructuredReferenceString<B>,
) -> bool {
    pairing_product_is_zero::<B>(
        &[key_com, -sigma_total, -quotient],
        &[db_com, srs.g_hat(), srs.vanishing_g2.into()],
    )
}

/// Commit a coefficient-form polynomial over the powers-of-τ g-basis.
pub fn commit_coeffs<B: CurveBackend>(
    poly: &Poly<Scalar<B>>,
    srs: &StructuredReferenceString<B>,
) -> Result<G1<B>, Error> {
    if poly.coeffs.len() > srs.n() {
        return Err(Error::LengthMismatch {
            expected: srs.n(),
            got: poly.coeffs.len(),
        });
    }
    crate::curve::msm_g1::<B>(&srs.powers_g1[..poly.coeffs.len()], &poly.coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ark_bn254::{Bn254, Fr};
    use ark_ff::{One, UniformRand};
    use ark_poly::{DenseUVPolynomial, Polynomial};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    use crate::amt::{commit, BaseRole, Commitment};
    use crate::srs::{setup, SetupMode};

    fn vanishing(n: usize) -> Poly<Fr> {
        let mut coeffs = vec![Fr::zero(); n + 1];
        coeffs[0] = -Fr::one();
        coeffs[n] = Fr::one();
        Poly::from_coefficients_vec(coeffs)
    }

    #[test]
    fn zerocheck_trivial_and_random() {
        let d = Domain::<Fr>::new(8).unwrap();
        let zero = Poly::zero();
        let one = Poly::from_coefficients_vec(vec![Fr::one()]);
        assert!(zerocheck_quotient(&zero, &one, &zero, &d)
            .unwrap()
            .is_zero());
        assert!(zerocheck_quotient(&one, &one, &one, &d).unwrap().is_zero());

        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for n in [4usize, 8, 16] {
            let d = Domain::<Fr>::new(n).unwrap();
            let a = Poly::rand(n - 1, &mut rng);
            let b = Poly::rand(n - 1, &mut rng);
            let products: Vec<Fr> = d
                .fft(&a.coeffs)
                .iter()
                .zip(d.fft(&b.coeffs))
                .map(|(x, y)| *x * y)
                .collect();
            let c = d.interpolate(&products);
            let q = zerocheck_quotient(&a, &b, &c, &d).unwrap();
            assert!(q.degree() <= n - 2);
            // Recomposition: q·(xⁿ−1) + c = a·b, coefficient for coefficient.
            assert_eq!(&(&q * &vanishing(n)) + &c, &a * &b);

            // Violated identity is an explicit error.
            let bad_c = &c + &Poly::from_coefficients_vec(vec![Fr::one()]);
            assert!(zerocheck_quotient(&a, &b, &bad_c, &d).is_err());
        }
    }

    #[test]
    fn binarity_quotients() {
        let d = Domain::<Fr>::new(8).unwrap();
        assert!(binarity_quotient(&Poly::zero(), &d).unwrap().is_zero());
        let ones = d.interpolate(&vec![Fr::one(); 8]);
        assert!(binarity_quotient(&ones, &d).unwrap().is_zero());

        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let bits: Vec<Fr> = (0..8).map(|_| Fr::from(rng.gen_bool(0.5) as u64)).collect();
        let b = d.interpolate(&bits);
        let u = binarity_quotient(&b, &d).unwrap();
        assert_eq!(&b - &(&b * &b), &u * &vanishing(8));

        let not_bits = d.interpolate(&vec![Fr::from(2u64); 8]);
        assert!(matches!(
            binarity_quotient(&not_bits, &d),
            Err(Error::NonBinaryValue)
        ));
    }

    #[test]
    fn sumcheck_decomposition() {
        let d = Domain::<Fr>::new(8).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(3);

        let f = Poly::rand(7, &mut rng);
        let (total, r, t) = sumcheck_quotients(&f, &Poly::zero(), &d);
        assert!(total.is_zero() && r.is_zero() && t.is_zero());

        let ones = d.interpolate(&vec![Fr::one(); 8]);
        let (total, _, _) = sumcheck_quotients(&ones, &ones, &d);
        assert_eq!(total, Fr::from(8u64));

        let f = Poly::rand(7, &mut rng);
        let b = Poly::rand(7, &mut rng);
        let (total, r, t) = sumcheck_quotients(&f, &b, &d);
        let naive: Fr = d
            .fft(&f.coeffs)
            .iter()
            .zip(d.fft(&b.coeffs))
            .map(|(x, y)| *x * y)
            .sum();
        assert_eq!(total, naive);
        assert!(r.degree() <= 6 && t.degree() <= 6);
        let mut recomposed = &t * &vanishing(8);
        recomposed = &recomposed + &Poly::from_coefficients_vec(vec![total / Fr::from(8u64)]);
        let rx = Poly::from_coefficients_vec(
            std::iter::once(Fr::zero())
                .chain(r.coeffs.iter().copied())
                .collect(),
        );
        recomposed = &recomposed + &rx;
        assert_eq!(recomposed, &f * &b);
    }

    #[test]
    fn zerocheck_verifier_accepts_honest_rejects_tampered() {
        let (srs, _) = setup::<Bn254>(8, SetupMode::InsecureTest { seed: 9 }).unwrap();
        let d = srs.domain().clone();
        let mut rng = ChaCha20Rng::seed_from_u64(4);

        // All-identity inputs satisfy 0 = 0.
        assert!(verify_zerocheck::<Bn254>(
            G1::<Bn254>::zero(),
            G2::<Bn254>::zero(),
            G1::<Bn254>::zero(),
            G1::<Bn254>::zero(),
            &srs
        ));

        for _ in 0..50 {
            let key_vals: Vec<Fr> = (0..8).map(|_| Fr::rand(&mut rng)).collect();
            let db_vals: Vec<Fr> = (0..8).map(|_| Fr::rand(&mut rng)).collect();
            let sigma_vals: Vec<Fr> = key_vals.iter().zip(&db_vals).map(|(k, v)| *k * v).collect();
            let key_poly = d.interpolate(&key_vals);
            let db_poly = d.interpolate(&db_vals);
            let sigma_poly = d.interpolate(&sigma_vals);
            let q = zerocheck_quotient(&key_poly, &db_poly, &sigma_poly, &d).unwrap();

            let key_com = match commit(&key_vals, BaseRole::G, &srs).unwrap() {
                Commitment::G1 { point, .. } => point,
                _ => unreachable!(),
            };
            let db_com = match commit(&db_vals, BaseRole::GHat, &srs).unwrap() {
                Commitment::G2 { point, .. } => point,
                _ => unreachable!(),
            };
            let sigma_com = match commit(&sigma_vals, BaseRole::G, &srs).unwrap() {
                Commitment::G1 { point, .. } => point,
                _ => unreachable!(),
            };
            let q_com = commit_coeffs::<Bn254>(&q, &srs).unwrap();

            assert!(verify_zerocheck::<Bn254>(
                key_com, db_com, sigma_com, q_com, &srs
            ));
            assert!(!verify_zerocheck::<Bn254>(
                key_com,
                db_com,
                sigma_com,
                q_com + srs.g(),
                &srs
            ));
            assert!(!verify_zerocheck::<Bn254>(
                key_com,
                db_com,
                sigma_com + srs.g(),
                q_com,
                &srs
            ));
        }
    }
}
