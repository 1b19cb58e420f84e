//! Per-label inversion statistics.
//!
//! For a fixed label j in a random size-n tree, the number of inversions
//! (i, j) — larger labels on the root-to-j path — has an exact distribution
//! reachable through generating functions. This module extracts it three
//! independent ways: a generic coefficient extraction that works for every
//! admissible family, closed-form sums for the ordered and unordered
//! families, and exact factorial moments.

use num::BigInt;

use crate::coeff::{
    big_binomial, big_factorial, big_falling, format_rat, parse_rat, Coeff, Rat,
};
use crate::family::{DegreeWeightSequence, FamilyConstants};
use crate::limitlaws::gamma_half;
use crate::series::{phi_derivative_series, solve_tree_series, UniSeries};
use crate::{Error, Result};

/// Distribution of the per-label inversion count: `probs[k]` is
/// P{I_{n,j} = k}, densely over the full support 0..=n-j.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf<C> {
    pub family: String,
    pub n: u64,
    pub j: u64,
    pub probs: Vec<C>,
}

impl<C: Coeff> Pmf<C> {
    pub fn new(family: String, n: u64, j: u64, probs: Vec<C>) -> Result<Self> {
        if j == 0 || j > n {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= j <= n, got j={j}, n={n}"
            )));
        }
        if probs.len() as u64 != n - j + 1 {
            return Err(Error::InvalidParameter(format!(
                "support of I_{{{n},{j}}} is 0..={}, got {} entries",
                n - j,
                probs.len()
            )));
        }
        Ok(Pmf {
            family,
            n,
            j,
            probs,
        })
    }

    /// Probability of exactly k inversions; zero outside the support.
    pub fn prob(&self, k: u64) -> C {
        self.probs
            .get(k as usize)
            .cloned()
            .unwrap_or_else(C::zero)
    }

    pub fn total(&self) -> C {
        let mut s = C::zero();
        for p in &self.probs {
            s.add_assign(p);
        }
        s
    }

    /// sum_k k(k-1)...(k-r+1) probs[k]
    pub fn factorial_moment(&self, r: u64) -> C {
        let mut s = C::zero();
        for (k, p) in self.probs.iter().enumerate() {
            let k = k as u64;
            if k >= r {
                let f = C::from_rat(&Rat::from_integer(big_falling(k, r)));
                s.add_assign(&f.mul(p));
            }
        }
        s
    }

    pub fn mean(&self) -> C {
        self.factorial_moment(1)
    }
}

impl Pmf<Rat> {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "family": self.family,
            "n": self.n,
            "j": self.j,
            "probs": self.probs.iter().map(format_rat).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let get = |k: &str| {
            v.get(k)
                .and_then(|x| x.as_u64())
                .ok_or_else(|| Error::Parse(format!("pmf JSON lacks integer field {k:?}")))
        };
        let family = v
            .get("family")
            .and_then(|x| x.as_str())
            .unwrap_or("")
            .to_string();
        let probs = v
            .get("probs")
            .and_then(|x| x.as_array())
            .ok_or_else(|| Error::Parse("pmf JSON lacks array field \"probs\"".into()))?
            .iter()
            .map(|x| {
                x.as_str()
                    .ok_or_else(|| Error::Parse("pmf entries must be strings".into()))
                    .and_then(parse_rat)
            })
            .collect::<Result<Vec<Rat>>>()?;
        Pmf::new(family, get("n")?, get("j")?, probs)
    }
}

impl Pmf<f64> {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "family": self.family,
            "n": self.n,
            "j": self.j,
            "probs": self.probs,
        })
    }
}

/// The label-independent half of the exact I_{n,j} extraction.
///
/// The trivariate generating function
///   N = phi(T(z+u)) / (1 - (z+uq) phi'(T(z+u)))
/// stores P{I_{n,j}=k} T_n z^{j-1} u^{n-j} q^k / ((j-1)! (n-j)!). Expanding
/// the denominator geometrically and using
/// [z^a u^b] g(z+u) = C(a+b, a) [z^{a+b}] g reduces everything to univariate
/// coefficients v_m = [z^{n-m-1}] phi(T) phi'(T)^m:
///
///   P{I_{n,j}=k} = ((j-1)!(n-j)!/T_n)
///                  sum_{m=k}^{j-1+k} C(m,k) C(n-m-1, j-1-m+k) v_m.
///
/// The v_m depend on the size alone, so one profile serves every label of a
/// fixed n; building it is the expensive part (a tree-series solve and a
/// sweep of phi'(T) multiplications whose truncation order shrinks as m
/// grows).
pub struct LocalProfile<C> {
    family: String,
    n: u64,
    /// w[m] = v_m / t_n; dividing by t_n early keeps the float backend
    /// inside range
    w: Vec<C>,
}

impl<C: Coeff> LocalProfile<C> {
    pub fn new(family: &DegreeWeightSequence, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("need n >= 1".into()));
        }
        let order = (n - 1) as usize;
        let t = solve_tree_series::<C>(family, n as usize);
        let tn = t.coeff(n as usize);
        if tn.is_zero() {
            return Err(Error::InvalidParameter(format!(
                "family {} has no trees of size {n}",
                family.name()
            )));
        }
        let inv_tn = C::one().div(&tn);
        let phi_t = phi_derivative_series::<C>(family, 0, order).compose(&t)?;
        let dphi_t = phi_derivative_series::<C>(family, 1, order).compose(&t)?;

        let mut w: Vec<C> = Vec::with_capacity(n as usize);
        let mut a = phi_t;
        for m in 0..n as usize {
            w.push(a.coeff(order - m).mul(&inv_tn));
            if m + 1 < n as usize {
                a = a.truncated(order - m - 1).mul(&dphi_t);
            }
        }
        Ok(LocalProfile {
            family: family.name().to_string(),
            n,
            w,
        })
    }

    /// Distribution of the inversions charged to label j.
    pub fn distribution(&self, j: u64) -> Result<Pmf<C>> {
        let n = self.n;
        if j == 0 || j > n {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= j <= n, got j={j}, n={n}"
            )));
        }
        let baseline = Rat::new(
            big_factorial(j - 1) * big_factorial(n - j),
            big_factorial(n),
        );
        let probs: Vec<C> = (0..=n - j)
            .map(|k| {
                let mut acc = C::zero();
                for m in k..=j - 1 + k {
                    let s = baseline.clone()
                        * Rat::from_integer(
                            big_binomial(m, k) * big_binomial(n - m - 1, j + k - 1 - m),
                        );
                    acc.add_assign(&C::from_rat(&s).mul(&self.w[m as usize]));
                }
                acc
            })
            .collect();
        Pmf::new(self.family.clone(), n, j, probs)
    }
}

/// Exact distribution of I_{n,j} for any admissible family. One-shot
/// convenience; loops over j should build the [`LocalProfile`] once.
pub fn local_distribution<C: Coeff>(
    family: &DegreeWeightSequence,
    n: u64,
    j: u64,
) -> Result<Pmf<C>> {
    LocalProfile::new(family, n)?.distribution(j)
}

/// Closed-form P{I_{n,j} = k} for the ordered family.
pub fn local_distribution_ordered(n: u64, j: u64, k: u64) -> Result<Rat> {
    if j == 0 || j > n {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= j <= n, got j={j}, n={n}"
        )));
    }
    if k > n - j {
        return Ok(Rat::zero());
    }
    let mut s = Rat::zero();
    for l in (n - j - k)..=(n - k - 1) {
        let ints = big_binomial(l, n - j - k)
            * big_binomial(2 * n - 2, l)
            * big_binomial(n - l - 1, k)
            * BigInt::from(2 * n - 1 - 2 * l);
        s += Rat::new(ints, BigInt::from(2 * n - 1 - l));
    }
    Ok(s / Rat::from_integer(big_binomial(n - 1, j - 1) * big_binomial(2 * n - 2, n - 1)))
}

/// Closed-form P{I_{n,j} = k} for the unordered family.
pub fn local_distribution_unordered(n: u64, j: u64, k: u64) -> Result<Rat> {
    if j == 0 || j > n {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= j <= n, got j={j}, n={n}"
        )));
    }
    if k > n - j {
        return Ok(Rat::zero());
    }
    let mut s = Rat::zero();
    for l in (n - j - k)..=(n - k - 1) {
        let choose = big_binomial(l, n - j - k) * big_binomial(n - l - 1, k);
        // (n-l) n^{l-1} collapses to 1 when l = 0
        let term = if l == 0 {
            Rat::from_integer(choose)
        } else {
            Rat::new(
                choose * BigInt::from(n - l) * BigInt::from(n).pow((l - 1) as u32),
                big_factorial(l),
            )
        };
        s += term;
    }
    Ok(s * Rat::new(
        big_factorial(j - 1) * big_factorial(n - j),
        BigInt::from(n).pow((n - 1) as u32),
    ))
}

/// Exact E[I_{n,j}(I_{n,j}-1)...(I_{n,j}-r+1)]:
///
///   ((j-1)!(n-j)! r! / T_n) C(n-r-1, j-1)
///       [z^n] (z phi'(T))^r T / (1 - z phi'(T))^{r+1}.
pub fn local_factorial_moment<C: Coeff>(
    family: &DegreeWeightSequence,
    n: u64,
    j: u64,
    r: u64,
) -> Result<C> {
    if j == 0 || j > n {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= j <= n, got j={j}, n={n}"
        )));
    }
    if r == 0 {
        return Ok(C::one());
    }
    // supports live in 0..=n-j, and k^(r falling) kills everything below r
    if n - j < r {
        return Ok(C::zero());
    }
    let order = n as usize;
    let t = solve_tree_series::<C>(family, order);
    let tn = t.coeff(order);
    if tn.is_zero() {
        return Err(Error::InvalidParameter(format!(
            "family {} has no trees of size {n}",
            family.name()
        )));
    }
    let b = phi_derivative_series::<C>(family, 1, order - 1)
        .compose(&t)?
        .shift_up(1);
    let denom_inv = UniSeries::constant(C::one(), order)
        .sub(&b)
        .reciprocal()?;
    let mut g = t.clone();
    for _ in 0..r {
        g = g.mul(&b);
    }
    for _ in 0..=r {
        g = g.mul(&denom_inv);
    }
    let scalar = Rat::new(
        big_factorial(j - 1)
            * big_factorial(n - j)
            * big_factorial(r)
            * big_binomial(n - r - 1, j - 1),
        big_factorial(n),
    );
    Ok(C::from_rat(&scalar).mul(&g.coeff(order)).mul(&C::one().div(&tn)))
}

/// Leading term of the factorial moment, uniform in j:
/// Gamma(r/2+1) 2^{r/2} sigma^r (n-j)^(r falling) / n^{r/2}.
pub fn local_moment_asymptotic(consts: &FamilyConstants, n: u64, j: u64, r: u64) -> f64 {
    let falling = crate::coeff::rat_to_f64(&Rat::from_integer(big_falling(n - j, r)));
    gamma_half(r + 2)
        * 2f64.powf(r as f64 / 2.0)
        * consts.sigma.powi(r as i32)
        * falling
        / (n as f64).powf(r as f64 / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{rat, rat_i, rat_to_f64};
    use crate::enumerate::brute_local_distribution;

    fn fam(name: &str) -> DegreeWeightSequence {
        DegreeWeightSequence::builtin(name).unwrap()
    }

    #[test]
    fn frozen_distributions() {
        let pmf = local_distribution::<Rat>(&fam("ordered"), 2, 1).unwrap();
        assert_eq!(pmf.probs, vec![rat(1, 2), rat(1, 2)]);
        let pmf = local_distribution::<Rat>(&fam("unordered"), 3, 1).unwrap();
        assert_eq!(pmf.probs, vec![rat(1, 3), rat(4, 9), rat(2, 9)]);
    }

    #[test]
    fn generic_extraction_matches_enumeration() {
        for name in ["ordered", "binary", "unordered", "cyclic"] {
            let f = fam(name);
            for n in 1..=6u64 {
                for j in 1..=n {
                    assert_eq!(
                        local_distribution::<Rat>(&f, n, j).unwrap(),
                        brute_local_distribution(&f, n, j).unwrap(),
                        "{name} n={n} j={j}"
                    );
                }
            }
        }
    }

    #[test]
    fn distributions_sum_to_one_and_stay_in_support() {
        for name in ["ordered", "binary", "unordered", "cyclic"] {
            let f = fam(name);
            for n in 1..=12u64 {
                for j in 1..=n {
                    let pmf = local_distribution::<Rat>(&f, n, j).unwrap();
                    assert_eq!(pmf.total(), rat_i(1), "{name} n={n} j={j}");
                    assert_eq!(pmf.probs.len() as u64, n - j + 1);
                    assert!(pmf.probs.iter().all(|p| *p >= rat_i(0)));
                    assert_eq!(pmf.prob(n - j + 5), rat_i(0));
                }
            }
        }
    }

    #[test]
    fn label_n_has_no_larger_ancestor() {
        for name in ["ordered", "binary", "unordered", "cyclic"] {
            for n in 1..=8u64 {
                let pmf = local_distribution::<Rat>(&fam(name), n, n).unwrap();
                assert_eq!(pmf.probs, vec![rat_i(1)]);
            }
        }
        assert!(local_distribution::<Rat>(&fam("ordered"), 3, 0).is_err());
        assert!(local_distribution::<Rat>(&fam("ordered"), 3, 4).is_err());
    }

    #[test]
    fn sizes_without_trees_are_rejected() {
        let f =
            DegreeWeightSequence::custom("evenish", vec![rat_i(1), rat_i(0), rat_i(1)], None)
                .unwrap();
        assert!(local_distribution::<Rat>(&f, 2, 1).is_err());
        // size 3 exists: a root with two leaves
        let pmf = local_distribution::<Rat>(&f, 3, 1).unwrap();
        assert_eq!(pmf.total(), rat_i(1));
    }

    #[test]
    fn closed_forms_match_generic_extraction() {
        for n in 1..=20u64 {
            for j in 1..=n {
                let pmf = local_distribution::<Rat>(&fam("ordered"), n, j).unwrap();
                let pmf_u = local_distribution::<Rat>(&fam("unordered"), n, j).unwrap();
                for k in 0..=n - j + 2 {
                    assert_eq!(
                        local_distribution_ordered(n, j, k).unwrap(),
                        pmf.prob(k),
                        "ordered n={n} j={j} k={k}"
                    );
                    assert_eq!(
                        local_distribution_unordered(n, j, k).unwrap(),
                        pmf_u.prob(k),
                        "unordered n={n} j={j} k={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn closed_form_spot_values() {
        assert_eq!(local_distribution_ordered(2, 1, 0).unwrap(), rat(1, 2));
        assert_eq!(local_distribution_unordered(3, 1, 1).unwrap(), rat(4, 9));
        assert_eq!(local_distribution_unordered(3, 1, 2).unwrap(), rat(2, 9));
        for n in 1..=12u64 {
            assert_eq!(local_distribution_ordered(n, n, 0).unwrap(), rat_i(1));
            assert_eq!(local_distribution_unordered(n, n, 0).unwrap(), rat_i(1));
        }
    }

    #[test]
    fn moments_match_distributions() {
        for name in ["ordered", "binary", "unordered", "cyclic"] {
            let f = fam(name);
            for n in 1..=14u64 {
                for j in 1..=n {
                    let pmf = local_distribution::<Rat>(&f, n, j).unwrap();
                    for r in 0..=3u64 {
                        assert_eq!(
                            local_factorial_moment::<Rat>(&f, n, j, r).unwrap(),
                            pmf.factorial_moment(r),
                            "{name} n={n} j={j} r={r}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn moment_spot_values() {
        assert_eq!(
            local_factorial_moment::<Rat>(&fam("ordered"), 2, 1, 1).unwrap(),
            rat(1, 2)
        );
        assert_eq!(
            local_factorial_moment::<Rat>(&fam("unordered"), 3, 1, 1).unwrap(),
            rat(8, 9)
        );
        for r in 1..=3u64 {
            assert_eq!(
                local_factorial_moment::<Rat>(&fam("ordered"), 6, 6, r).unwrap(),
                rat_i(0)
            );
        }
        assert_eq!(
            local_factorial_moment::<Rat>(&fam("cyclic"), 5, 2, 0).unwrap(),
            rat_i(1)
        );
    }

    #[test]
    fn float_backend_tracks_exact_backend() {
        let exact = local_distribution::<Rat>(&fam("ordered"), 30, 7).unwrap();
        let float = local_distribution::<f64>(&fam("ordered"), 30, 7).unwrap();
        for (e, f) in exact.probs.iter().zip(&float.probs) {
            assert!((rat_to_f64(e) - f).abs() < 1e-12);
        }
    }

    #[test]
    fn asymptotic_moment_examples() {
        let consts = fam("unordered").solve_constants().unwrap();
        assert_eq!(local_moment_asymptotic(&consts, 100, 17, 0), 1.0);
        let v = local_moment_asymptotic(&consts, 10_000, 5_000, 1);
        let expect = (std::f64::consts::PI / 2.0).sqrt() * 5_000.0 / 100.0;
        assert!((v - expect).abs() < 1e-9, "{v} vs {expect}");
        assert!((v - 62.666).abs() < 1e-3, "{v}");
    }

    #[test]
    fn exact_moment_approaches_asymptotic() {
        let f = fam("ordered");
        let consts = f.solve_constants().unwrap();
        let exact = local_factorial_moment::<f64>(&f, 200, 100, 1).unwrap();
        let asym = local_moment_asymptotic(&consts, 200, 100, 1);
        let ratio = exact / asym;
        assert!((0.9..=1.1).contains(&ratio), "ratio {ratio}");
    }

    // Sharp enough to reject a sigma off by a factor sqrt(tau) ~ 0.826:
    // with that value the ratio lands near 1.20.
    #[test]
    fn cyclic_sigma_is_confirmed_by_the_exact_moment() {
        let f = fam("cyclic");
        let consts = f.solve_constants().unwrap();
        let exact = local_factorial_moment::<f64>(&f, 400, 200, 1).unwrap();
        let asym = local_moment_asymptotic(&consts, 400, 200, 1);
        let ratio = exact / asym;
        assert!((0.9..=1.1).contains(&ratio), "ratio {ratio}");
        assert!((ratio - 0.9928).abs() < 2e-3, "ratio {ratio}");
    }

    #[test]
    fn json_round_trip() {
        let pmf = local_distribution::<Rat>(&fam("cyclic"), 7, 3).unwrap();
        let back = Pmf::<Rat>::from_json(&pmf.to_json()).unwrap();
        assert_eq!(back, pmf);
    }

    // ------------------------------------------------------------------
    // trivariate functional equation, checked coefficientwise
    // ------------------------------------------------------------------

    /// Polynomials in z, u, q truncated at a joint (z,u) total degree; only
    /// the test needs them, and only up to order 10.
    #[derive(Clone, Debug, PartialEq)]
    struct TriPoly {
        cap: usize,
        coeffs: std::collections::BTreeMap<(usize, usize, u64), Rat>,
    }

    impl TriPoly {
        fn zero(cap: usize) -> Self {
            TriPoly {
                cap,
                coeffs: Default::default(),
            }
        }

        fn set(&mut self, a: usize, b: usize, k: u64, v: Rat) {
            if a + b <= self.cap && !v.is_zero() {
                self.coeffs.insert((a, b, k), v);
            }
        }

        fn add(&self, rhs: &Self) -> Self {
            let mut out = self.clone();
            for (&key, v) in &rhs.coeffs {
                let e = out.coeffs.entry(key).or_insert_with(Rat::zero);
                *e += v.clone();
                if e.is_zero() {
                    out.coeffs.remove(&key);
                }
            }
            out
        }

        fn mul(&self, rhs: &Self) -> Self {
            let mut out = TriPoly::zero(self.cap.min(rhs.cap));
            for (&(a1, b1, k1), v1) in &self.coeffs {
                for (&(a2, b2, k2), v2) in &rhs.coeffs {
                    if a1 + a2 + b1 + b2 > out.cap {
                        continue;
                    }
                    let key = (a1 + a2, b1 + b2, k1 + k2);
                    let e = out.coeffs.entry(key).or_insert_with(Rat::zero);
                    *e += v1.clone() * v2.clone();
                    if e.is_zero() {
                        out.coeffs.remove(&key);
                    }
                }
            }
            out
        }

        /// Lift a univariate series g(z) to g(z+u):
        /// [z^a u^b] g(z+u) = C(a+b, a) [z^{a+b}] g.
        fn from_univariate(g: &UniSeries<Rat>, cap: usize) -> Self {
            let mut out = TriPoly::zero(cap);
            for a in 0..=cap {
                for b in 0..=cap - a {
                    let c = g.coeff(a + b) * Rat::from_integer(big_binomial((a + b) as u64, a as u64));
                    out.set(a, b, 0, c);
                }
            }
            out
        }
    }

    #[test]
    fn trivariate_functional_equation_holds_to_order_10() {
        // N = phi(T(z+u)) + (z + u q) phi'(T(z+u)) N, through joint degree 10
        let cap = 10usize;
        for name in ["ordered", "unordered", "cyclic"] {
            let f = fam(name);
            let t = solve_tree_series::<Rat>(&f, cap + 1);

            // N from exact local distributions: the (j-1, n-j, k) coefficient
            // is P{I_{n,j}=k} T_n / ((j-1)! (n-j)!)
            let mut n_series = TriPoly::zero(cap);
            for size in 1..=(cap as u64 + 1) {
                let tn = t.coeff(size as usize) * Rat::from_integer(big_factorial(size));
                for j in 1..=size {
                    let pmf = local_distribution::<Rat>(&f, size, j).unwrap();
                    let scale = tn.clone()
                        / Rat::from_integer(big_factorial(j - 1) * big_factorial(size - j));
                    for (k, p) in pmf.probs.iter().enumerate() {
                        n_series.set(
                            (j - 1) as usize,
                            (size - j) as usize,
                            k as u64,
                            p.clone() * scale.clone(),
                        );
                    }
                }
            }

            let phi_t = phi_derivative_series::<Rat>(&f, 0, cap).compose(&t.truncated(cap)).unwrap();
            let dphi_t = phi_derivative_series::<Rat>(&f, 1, cap).compose(&t.truncated(cap)).unwrap();
            let phi_lift = TriPoly::from_univariate(&phi_t, cap);
            let dphi_lift = TriPoly::from_univariate(&dphi_t, cap);

            let mut z_plus_uq = TriPoly::zero(cap);
            z_plus_uq.set(1, 0, 0, rat_i(1));
            z_plus_uq.set(0, 1, 1, rat_i(1));

            let rhs = phi_lift.add(&z_plus_uq.mul(&dphi_lift).mul(&n_series));
            assert_eq!(rhs, n_series, "{name}");
        }
    }
}
