//! Size-n multiplicative evaluation domain, FFT ordering and interpolation.
//!
//! The domain is H = {1, ω, …, ω^{n−1}} for a power-of-two n. Vectors are
//! identified with the polynomial interpolating them over H in *index*
//! order; the bit-reversal permutation [`Domain::perm`] translates indices
//! into FFT positions, which is the order in which the key table fills up
//! and in which append proofs reason about prefixes.

use ark_ff::{FftField, Zero};
use ark_poly::univariate::DensePolynomial;
use ark_poly::{DenseUVPolynomial, EvaluationDomain, Radix2EvaluationDomain};

use crate::Error;

/// Polynomial in coefficient form (dense, degree < n in protocol use).
pub type Poly<F> = DensePolynomial<F>;

/// Radix-2 evaluation domain of power-of-two size.
#[derive(Clone, Debug)]
pub struct Domain<F: FftField> {
    inner: Radix2EvaluationDomain<F>,
    log_n: u32,
}

impl<F: FftField> Domain<F> {
    pub fn new(n: usize) -> Result<Self, Error> {
        if !n.is_power_of_two() || n < 2 {
            return Err(Error::InvalidDomainSize(n));
        }
        let inner = Radix2EvaluationDomain::new(n).ok_or(Error::InvalidDomainSize(n))?;
        Ok(Self {
            inner,
            log_n: n.trailing_zeros(),
        })
    }

    pub fn n(&self) -> usize {
        self.inner.size()
    }

    pub fn log_n(&self) -> u32 {
        self.log_n
    }

    /// Primitive n-th root of unity ω.
    pub fn omega(&self) -> F {
        self.inner.group_gen()
    }

    /// 1/n as a field element.
    pub fn inv_n(&self) -> F {
        self.inner.size_inv()
    }

    /// ω^k for arbitrary k (reduced mod n).
    pub fn element(&self, k: usize) -> F {
        self.inner.element(k % self.n())
    }

    /// Bit-reversal permutation π on [0, n): LSB-first bits of `i` become
    /// MSB-first. Involutive; π(i) is index i's FFT position.
    pub fn perm(&self, i: usize) -> usize {
        assert!(i < self.n(), "perm index {i} out of range");
        i.reverse_bits() >> (usize::BITS - self.log_n)
    }

    /// Coefficients → evaluations over H (index order).
    pub fn fft(&self, coeffs: &[F]) -> Vec<F> {
        self.inner.fft(coeffs)
    }

    /// Evaluations over H → coefficients.
    pub fn ifft(&self, evals: &[F]) -> Vec<F> {
        self.inner.ifft(evals)
    }

    /// FFT over any domain-coefficient type (e.g. group elements).
    pub fn ifft_in<T: ark_poly::domain::DomainCoeff<F>>(&self, evals: &[T]) -> Vec<T> {
        self.inner.ifft(evals)
    }

    /// Interpolant of `evals` over H.
    pub fn interpolate(&self, evals: &[F]) -> Poly<F> {
        Poly::from_coefficients_vec(self.ifft(evals))
    }

    /// The i-th Lagrange basis polynomial ℓ_i (ℓ_i(ω^j) = δ_ij).
    pub fn lagrange_poly(&self, i: usize) -> Result<Poly<F>, Error> {
        if i >= self.n() {
            return Err(Error::IndexOutOfRange {
                index: i,
                n: self.n(),
            });
        }
        let mut evals = vec![F::zero(); self.n()];
        evals[i] = F::one();
        Ok(self.interpolate(&evals))
    }

    /// All ℓ_i(x₀) for a point x₀ outside H (used to derive SRS bases).
    pub fn lagrange_evals_at(&self, point: F) -> Vec<F> {
        self.inner.evaluate_all_lagrange_coefficients(point)
    }

    /// x₀^n − 1.
    pub fn vanishing_at(&self, point: F) -> F {
        point.pow([self.n() as u64]) - F::one()
    }

    /// Exact division `p = q·(xⁿ − 1) + r` by coefficient folding.
    pub fn divide_by_vanishing(&self, p: &Poly<F>) -> (Poly<F>, Poly<F>) {
        let n = self.n();
        let coeffs = &p.coeffs;
        if coeffs.len() <= n {
            return (Poly::zero(), p.clone());
        }
        let mut quotient = vec![F::zero(); coeffs.len() - n];
        for k in (n..coeffs.len()).rev() {
            let carry = quotient.get(k).copied().unwrap_or_else(F::zero);
            quotient[k - n] = coeffs[k] + carry;
        }
        let mut remainder = coeffs[..n].to_vec();
        for (k, q) in quotient.iter().enumerate().take(n) {
            remainder[k] += q;
        }
        (
            Poly::from_coefficients_vec(quotient),
            Poly::from_coefficients_vec(remainder),
        )
    }
}
