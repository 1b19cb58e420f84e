//! Truncated univariate power series over a coefficient field.
//!
//! A [`UniSeries`] stores coefficients of z^0 … z^N densely and carries its
//! truncation order N explicitly: every operation returns the largest order
//! the inputs support and never silently extends a series with zeros.
//! Coefficient reads beyond the stored order are a bug, not a zero.

use crate::coeff::Coeff;
use crate::family::DegreeWeightSequence;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct UniSeries<C> {
    coeffs: Vec<C>,
}

impl<C: Coeff> UniSeries<C> {
    /// Series from its coefficients; the truncation order is `coeffs.len() - 1`.
    pub fn from_coeffs(coeffs: Vec<C>) -> Self {
        assert!(!coeffs.is_empty(), "a series carries at least the z^0 term");
        UniSeries { coeffs }
    }

    pub fn zeros(order: usize) -> Self {
        UniSeries { coeffs: vec![C::zero(); order + 1] }
    }

    /// The constant c as a series of the given order.
    pub fn constant(c: C, order: usize) -> Self {
        let mut s = Self::zeros(order);
        s.coeffs[0] = c;
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> C {
        assert!(
            n <= self.order(),
            "coefficient {} requested from a series truncated at order {}",
            n,
            self.order()
        );
        self.coeffs[n].clone()
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    /// Forget coefficients beyond `order`.
    pub fn truncated(&self, order: usize) -> Self {
        assert!(order <= self.order());
        Self::from_coeffs(self.coeffs[..=order].to_vec())
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let ord = self.order().min(rhs.order());
        let coeffs = (0..=ord)
            .map(|i| self.coeffs[i].add(&rhs.coeffs[i]))
            .collect();
        UniSeries { coeffs }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let ord = self.order().min(rhs.order());
        let coeffs = (0..=ord)
            .map(|i| self.coeffs[i].sub(&rhs.coeffs[i]))
            .collect();
        UniSeries { coeffs }
    }

    pub fn scale(&self, c: &C) -> Self {
        UniSeries { coeffs: self.coeffs.iter().map(|a| a.mul(c)).collect() }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let ord = self.order().min(rhs.order());
        let mut coeffs = vec![C::zero(); ord + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(ord + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(ord + 1 - i) {
                if !b.is_zero() {
                    coeffs[i + j].add_assign(&a.mul(b));
                }
            }
        }
        UniSeries { coeffs }
    }

    /// d/dz; the result is exact one order lower.
    pub fn derive(&self) -> Self {
        assert!(self.order() >= 1, "derivative of an order-0 series has no known terms");
        let coeffs = (1..=self.order())
            .map(|i| self.coeffs[i].mul(&C::from_u64(i as u64)))
            .collect();
        UniSeries { coeffs }
    }

    /// k-fold derivative.
    pub fn derive_k(&self, k: usize) -> Self {
        let mut s = self.clone();
        for _ in 0..k {
            s = s.derive();
        }
        s
    }

    /// ∫₀ᶻ, constant term 0; the result is exact one order higher.
    pub fn integrate(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.order() + 2);
        coeffs.push(C::zero());
        for (i, a) in self.coeffs.iter().enumerate() {
            coeffs.push(a.div(&C::from_u64(i as u64 + 1)));
        }
        UniSeries { coeffs }
    }

    /// Multiplication by z^k (exact: raises the order by k).
    pub fn shift_up(&self, k: usize) -> Self {
        let mut coeffs = vec![C::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        UniSeries { coeffs }
    }

    /// Division by z^k; the first k coefficients must vanish.
    pub fn shift_down(&self, k: usize) -> Result<Self> {
        if self.order() < k {
            return Err(Error::InvalidParameter(format!(
                "cannot divide an order-{} series by z^{k}",
                self.order()
            )));
        }
        if self.coeffs[..k].iter().any(|c| !c.is_zero()) {
            return Err(Error::InvalidParameter(format!(
                "series is not divisible by z^{k}"
            )));
        }
        Ok(UniSeries { coeffs: self.coeffs[k..].to_vec() })
    }

    /// outer ∘ inner. The inner constant term must vanish; the result is
    /// exact through min(order(outer), order(inner)).
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if !inner.coeffs[0].is_zero() {
            return Err(Error::InvalidParameter(
                "composition needs a vanishing inner constant term".into(),
            ));
        }
        let ord = self.order().min(inner.order());
        let mut acc = UniSeries::constant(self.coeffs[ord].clone(), ord);
        for k in (0..ord).rev() {
            acc = acc.mul(inner);
            acc.coeffs[0].add_assign(&self.coeffs[k]);
        }
        Ok(acc)
    }

    /// 1/self; the constant term must be invertible (nonzero).
    pub fn reciprocal(&self) -> Result<Self> {
        if self.coeffs[0].is_zero() {
            return Err(Error::InvalidParameter(
                "reciprocal of a series with zero constant term".into(),
            ));
        }
        let ord = self.order();
        let inv0 = C::one().div(&self.coeffs[0]);
        let mut coeffs = vec![C::zero(); ord + 1];
        coeffs[0] = inv0.clone();
        for n in 1..=ord {
            let mut s = C::zero();
            for k in 1..=n {
                if !self.coeffs[k].is_zero() {
                    s.add_assign(&self.coeffs[k].mul(&coeffs[n - k]));
                }
            }
            coeffs[n] = s.mul(&inv0).neg();
        }
        Ok(UniSeries { coeffs })
    }

    /// exp(self); the constant term must vanish.
    /// Uses (e^g)′ = g′·e^g: n·e_n = Σ_{k=1}^{n} k·g_k·e_{n−k}.
    pub fn exp(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::InvalidParameter(
                "exp of a series with nonzero constant term".into(),
            ));
        }
        let ord = self.order();
        let mut coeffs = vec![C::zero(); ord + 1];
        coeffs[0] = C::one();
        for n in 1..=ord {
            let mut s = C::zero();
            for k in 1..=n {
                if !self.coeffs[k].is_zero() {
                    let kg = self.coeffs[k].mul(&C::from_u64(k as u64));
                    s.add_assign(&kg.mul(&coeffs[n - k]));
                }
            }
            coeffs[n] = s.div(&C::from_u64(n as u64));
        }
        Ok(UniSeries { coeffs })
    }
}

/// Solves T(z) = z·φ(T(z)) to the requested order.
///
/// Coefficients are produced order by order from a table of powers
/// P_ℓ[n] = [z^n] T^ℓ: the functional equation gives
/// t_{n+1} = Σ_ℓ φ_ℓ·P_ℓ[n], and each P_ℓ[n] only needs coefficients of T
/// already known. O(N³) coefficient operations, O(N²) memory.
pub fn solve_tree_series<C: Coeff>(family: &DegreeWeightSequence, order: usize) -> UniSeries<C> {
    let weights: Vec<C> = family.weights_to(order.max(1));
    let mut t = vec![C::zero(); order + 1];
    let mut powers: Vec<Vec<C>> = vec![vec![C::zero(); order.max(1)]; order + 1];
    if order > 0 {
        powers[0][0] = C::one();
    }
    for n in 0..order {
        for l in 1..=n {
            let mut s = C::zero();
            for m in 1..=(n + 1 - l) {
                if !t[m].is_zero() && !powers[l - 1][n - m].is_zero() {
                    s.add_assign(&t[m].mul(&powers[l - 1][n - m]));
                }
            }
            powers[l][n] = s;
        }
        let mut s = C::zero();
        for l in 0..=n {
            if !weights[l].is_zero() && !powers[l][n].is_zero() {
                s.add_assign(&weights[l].mul(&powers[l][n]));
            }
        }
        t[n + 1] = s;
    }
    UniSeries::from_coeffs(t)
}

/// The series of φ^(k)(t) = Σ_ℓ φ_{ℓ+k}·(ℓ+k)·(ℓ+k−1)⋯(ℓ+1)·t^ℓ, truncated
/// at the given order, with coefficients drawn exactly from the weight rule.
pub fn phi_derivative_series<C: Coeff>(
    family: &DegreeWeightSequence,
    k: usize,
    order: usize,
) -> UniSeries<C> {
    let weights = family.weights_to::<C>(order + k);
    let coeffs = (0..=order)
        .map(|l| {
            let mut fall = C::one();
            for i in 0..k {
                fall = fall.mul(&C::from_u64((l + k - i) as u64));
            }
            weights[l + k].mul(&fall)
        })
        .collect();
    UniSeries::from_coeffs(coeffs)
}
