//! Global inversion statistics.
//!
//! Exact inversion polynomials `J_n(q)` (all trees of size n, coefficient of
//! `q^k` = total weight of trees with k inversions) and their root-label-1
//! restriction, plus factorial and raw moments of the inversion count.
//! Moments come from a pumping recursion on the factorial-moment generating
//! functions, which reaches sizes far beyond what the polynomial tables can.

use std::collections::BTreeMap;

use num::{BigInt, Signed};

use crate::biseries::{bi_solve_f, row_convolve, BiSeries, QRow};
use crate::coeff::{
    big_binomial, big_factorial, big_falling, format_rat, parse_rat, power_sum,
    stirling1_signed_table, stirling2_table, Coeff, Rat,
};
use crate::family::DegreeWeightSequence;
use crate::series::{phi_derivative_series, solve_tree_series, UniSeries};
use crate::{Error, Result};

/// Exact sizes above this are refused: coefficient tables are cubic in n and
/// the rationals inside them grow, so the cost curve turns hostile fast.
pub const EXACT_POLY_CAP: u64 = 64;

/// Weighted count of size-`n` trees by inversion number: `coeffs[k]` is the
/// total weight of trees with exactly `k` inversions. Absent keys are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct InvPolynomial {
    pub n: u64,
    pub coeffs: BTreeMap<u64, Rat>,
}

impl InvPolynomial {
    /// Value at q = 1: the total weight of all trees of this size.
    pub fn total(&self) -> Rat {
        let mut s = Rat::zero();
        for v in self.coeffs.values() {
            s += v.clone();
        }
        s
    }

    /// r-th factorial moment of the inversion count under the weighted
    /// distribution this polynomial encodes.
    pub fn factorial_moment(&self, r: u64) -> Rat {
        let total = self.total();
        assert!(!total.is_zero(), "no trees of size {}", self.n);
        let mut s = Rat::zero();
        for (&k, v) in &self.coeffs {
            if k >= r {
                s += Rat::from_integer(big_falling(k, r)) * v.clone();
            }
        }
        s / total
    }

    pub fn to_json(&self) -> serde_json::Value {
        let coeffs: serde_json::Map<String, serde_json::Value> = self
            .coeffs
            .iter()
            .map(|(k, v)| (k.to_string(), serde_json::Value::String(format_rat(v))))
            .collect();
        serde_json::json!({ "n": self.n, "coeffs": coeffs })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let n = v
            .get("n")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| Error::Parse("polynomial JSON lacks integer field \"n\"".into()))?;
        let obj = v
            .get("coeffs")
            .and_then(|x| x.as_object())
            .ok_or_else(|| Error::Parse("polynomial JSON lacks object field \"coeffs\"".into()))?;
        let mut coeffs = BTreeMap::new();
        for (k, val) in obj {
            let key: u64 = k
                .parse()
                .map_err(|_| Error::Parse(format!("bad coefficient index {k:?}")))?;
            let s = val
                .as_str()
                .ok_or_else(|| Error::Parse(format!("coefficient {k} is not a string")))?;
            coeffs.insert(key, parse_rat(s)?);
        }
        Ok(InvPolynomial { n, coeffs })
    }
}

/// Inversion polynomial of one size, together with its restriction to trees
/// whose root carries label 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialPair {
    pub all: InvPolynomial,
    pub root1: InvPolynomial,
}

/// Exact inversion polynomials for all sizes 1..=n_max.
///
/// A size n whose total tree weight vanishes (periodic degree support) yields
/// an empty coefficient table.
pub fn inversion_polynomials(
    family: &DegreeWeightSequence,
    n_max: u64,
) -> Result<Vec<PolynomialPair>> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("need n >= 1".into()));
    }
    if n_max > EXACT_POLY_CAP {
        // entry count ~ n^3/3, and coefficient bit-length grows with n on top
        let entries = n_max * n_max * n_max / 3;
        let est_mib = entries * (48 + n_max / 4) / (1 << 20);
        return Err(Error::Budget(format!(
            "exact polynomials capped at n = {EXACT_POLY_CAP} (requested {n_max}; \
             roughly {entries} coefficients, ~{est_mib} MiB)"
        )));
    }
    let tables = bi_solve_f::<Rat>(family, n_max as usize);
    let mut out = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let fact = Rat::from_integer(big_factorial(n));
        let scale = |row: &QRow<Rat>| -> BTreeMap<u64, Rat> {
            row.iter()
                .map(|(&k, v)| (k, v.clone() * fact.clone()))
                .collect()
        };
        out.push(PolynomialPair {
            all: InvPolynomial {
                n,
                coeffs: scale(tables.t.row(n as usize)),
            },
            root1: InvPolynomial {
                n,
                coeffs: scale(tables.f.row(n as usize)),
            },
        });
    }
    Ok(out)
}

/// Weighted count of inversion-free trees of size n; the root is then forced
/// to carry label 1, and every child label exceeds its parent's.
pub fn increasing_tree_count(family: &DegreeWeightSequence, n: u64) -> Result<Rat> {
    let pairs = inversion_polynomials(family, n)?;
    Ok(pairs[n as usize - 1]
        .root1
        .coeffs
        .get(&0)
        .cloned()
        .unwrap_or_else(Rat::zero))
}

/// Largest absolute coefficient deviation, through z-order `n_max`, between
///   exp( sum_n (q-1)^{n-1} Jhat_n(q) z^n/n! )   and   sum_n q^{n(n-1)/2} z^n/n!
/// computed with exact root-1 inversion polynomials of the unordered family.
/// Exact arithmetic returns 0 whenever the identity holds.
pub fn mallows_riordan_residual(n_max: u64) -> Result<Rat> {
    let family = DegreeWeightSequence::builtin("unordered")?;
    if n_max == 0 || n_max > EXACT_POLY_CAP {
        return Err(Error::InvalidParameter(format!(
            "order must be in 1..={EXACT_POLY_CAP}"
        )));
    }
    let tables = bi_solve_f::<Rat>(&family, n_max as usize);
    let mut inner = BiSeries::<Rat>::zeros(n_max as usize);
    // (q-1)^{n-1} built up one factor at a time
    let mut qpow: QRow<Rat> = QRow::new();
    qpow.insert(0, Rat::one());
    for n in 1..=n_max as usize {
        if n > 1 {
            let mut step: QRow<Rat> = QRow::new();
            step.insert(0, -Rat::one());
            step.insert(1, Rat::one());
            qpow = row_convolve(&qpow, &step);
        }
        inner.set_row(n, row_convolve(&qpow, tables.f.row(n)));
    }
    let lhs = inner.exp_z();
    let mut worst = Rat::zero();
    for n in 0..=n_max as usize {
        let target_k = (n * n.saturating_sub(1) / 2) as u64;
        let target_v = Rat::from_integer(BigInt::from(1)) / Rat::from_integer(big_factorial(n as u64));
        let mut keys: Vec<u64> = lhs.row(n).keys().copied().collect();
        keys.push(target_k);
        keys.sort_unstable();
        keys.dedup();
        for k in keys {
            let mut d = lhs.coeff(n, k);
            if k == target_k {
                d -= target_v.clone();
            }
            if d.abs() > worst {
                worst = d.abs();
            }
        }
    }
    Ok(worst)
}

/// Factorial and raw moments of one integer-valued statistic at one size.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable<C> {
    pub n: u64,
    /// index r holds E[X(X-1)...(X-r+1)]; entry 0 is 1
    pub factorial: Vec<C>,
    /// index r holds E[X^r]
    pub raw: Vec<C>,
}

/// E[X^r] = sum_l S(r,l) E[X^(l falling)] with Stirling numbers of the
/// second kind.
pub fn factorial_to_raw<C: Coeff>(factorial: &[C]) -> Vec<C> {
    let r_max = factorial.len() - 1;
    let s2 = stirling2_table(r_max);
    (0..=r_max)
        .map(|r| {
            let mut acc = C::zero();
            for (l, f) in factorial.iter().enumerate().take(r + 1) {
                let w = C::from_rat(&Rat::from_integer(s2[r][l].clone()));
                acc.add_assign(&w.mul(f));
            }
            acc
        })
        .collect()
}

/// Inverse of [`factorial_to_raw`], via signed Stirling numbers of the first
/// kind.
pub fn raw_to_factorial<C: Coeff>(raw: &[C]) -> Vec<C> {
    let r_max = raw.len() - 1;
    let s1 = stirling1_signed_table(r_max);
    (0..=r_max)
        .map(|r| {
            let mut acc = C::zero();
            for (l, m) in raw.iter().enumerate().take(r + 1) {
                let w = C::from_rat(&Rat::from_integer(s1[r][l].clone()));
                acc.add_assign(&w.mul(m));
            }
            acc
        })
        .collect()
}

/// Tuples (k_1, ..., k_{r-1}) of nonnegative integers with
/// sum m*k_m = r. Empty for r = 1: there is no tuple position for a part of
/// size r itself.
fn moment_partitions(r: u64) -> Vec<Vec<u64>> {
    fn rec(m: usize, rem: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if m == cur.len() {
            if rem == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let part = (m + 1) as u64;
        for k in 0..=rem / part {
            cur[m] = k;
            rec(m + 1, rem - k * part, cur, out);
        }
        cur[m] = 0;
    }
    let mut cur = vec![0u64; r.saturating_sub(1) as usize];
    let mut out = Vec::new();
    rec(0, r, &mut cur, &mut out);
    out
}

/// Factorial (and derived raw) moments E[Ihat_n^(r falling)] of the inversion
/// count over root-1 trees, for every size n <= n_max with nonzero tree
/// weight.
///
/// The generating functions f_r of the factorial moments satisfy
///
///   f'_r = (phi'(T) * sum_{t=1}^r C(r,t)/(t+1) z^{t+1} f_{r-t}^{(t+1)}
///           + sum_{B_r} r!/(k_1!...k_{r-1}!) phi^(K)(T) prod_m g_m^{k_m})
///          / (1 - z phi'(T)),
///
///   g_m = (1/m!) sum_{s=0}^m C(m,s)/(s+1) z^{s+1} f_{m-s}^{(s+1)},
///
/// with K = k_1+...+k_{r-1} and B_r the tuples from `moment_partitions`; the
/// moment is then [z^n] z f'_r divided by [z^n] T. Every right-hand term has
/// the form z^j D_z^j f, which keeps the truncation order intact, so a single
/// working order serves the whole recursion.
pub fn pumped_factorial_moments<C: Coeff>(
    family: &DegreeWeightSequence,
    n_max: u64,
    r_max: u64,
) -> Result<Vec<MomentTable<C>>> {
    if r_max > 4 {
        return Err(Error::InvalidParameter(format!(
            "moment recursion implemented for r <= 4, requested {r_max}"
        )));
    }
    if n_max == 0 {
        return Err(Error::InvalidParameter("need n >= 1".into()));
    }
    let w = (n_max as usize + 2).max(r_max as usize + 2);
    let t = solve_tree_series::<C>(family, w);
    let mut phi_at_t: Vec<UniSeries<C>> = Vec::new();
    for k in 0..=r_max as usize {
        phi_at_t.push(phi_derivative_series::<C>(family, k, w).compose(&t)?);
    }
    let pump = UniSeries::constant(C::one(), w)
        .sub(&phi_at_t[1].shift_up(1))
        .reciprocal()?;

    // z^{s+1} f^{(s+1)}: derivative then shift, which leaves the truncation
    // order where it was
    let zs = |f: &UniSeries<C>, s1: usize| f.derive_k(s1).shift_up(s1);

    let mut f: Vec<UniSeries<C>> = vec![t.shift_down(1).expect("t_0 = 0").integrate()];
    let mut fprime: Vec<UniSeries<C>> = vec![t.shift_down(1).expect("t_0 = 0")];
    for r in 1..=r_max {
        let g: Vec<UniSeries<C>> = (1..r)
            .map(|m| {
                let mut acc = UniSeries::zeros(w);
                for s in 0..=m {
                    let c = Rat::new(big_binomial(m, s), BigInt::from(s + 1))
                        / Rat::from_integer(big_factorial(m));
                    acc = acc.add(&zs(&f[(m - s) as usize], s as usize + 1).scale(&C::from_rat(&c)));
                }
                acc
            })
            .collect();

        let mut sum1 = UniSeries::zeros(w);
        for tt in 1..=r {
            let c = Rat::new(big_binomial(r, tt), BigInt::from(tt + 1));
            sum1 = sum1.add(&zs(&f[(r - tt) as usize], tt as usize + 1).scale(&C::from_rat(&c)));
        }
        sum1 = phi_at_t[1].mul(&sum1);

        let mut sum2 = UniSeries::zeros(w);
        for tuple in moment_partitions(r) {
            let kk: u64 = tuple.iter().sum();
            let mut mult = big_factorial(r);
            for &km in &tuple {
                mult /= big_factorial(km);
            }
            let mut term = phi_at_t[kk as usize].scale(&C::from_rat(&Rat::from_integer(mult)));
            for (m, &km) in tuple.iter().enumerate() {
                for _ in 0..km {
                    term = term.mul(&g[m]);
                }
            }
            sum2 = sum2.add(&term);
        }

        let fpr = pump.mul(&sum1.add(&sum2));
        f.push(fpr.integrate());
        fprime.push(fpr);
    }

    let mut out = Vec::new();
    for n in 1..=n_max as usize {
        let tn = t.coeff(n);
        if tn.is_zero() {
            continue;
        }
        let factorial: Vec<C> = (0..=r_max as usize)
            .map(|r| {
                if r == 0 {
                    C::one()
                } else {
                    fprime[r].coeff(n - 1).div(&tn)
                }
            })
            .collect();
        let raw = factorial_to_raw(&factorial);
        out.push(MomentTable {
            n: n as u64,
            factorial,
            raw,
        });
    }
    Ok(out)
}

/// Moments of the unrestricted inversion count from those of the root-1
/// model: conditioning on the root label j shifts the count by exactly j-1,
/// so
///
///   E[I_n^r] = (1/n) sum_{i=0}^{n-1} E[(Ihat_n + i)^r]
///            = sum_s C(r,s) E[Ihat_n^s] (sum_{i<n} i^{r-s}) / n.
pub fn transfer_moments<C: Coeff>(hat: &MomentTable<C>, n: u64) -> MomentTable<C> {
    debug_assert_eq!(hat.n, n);
    let r_max = hat.raw.len() - 1;
    let raw: Vec<C> = (0..=r_max)
        .map(|r| {
            let mut acc = C::zero();
            for (s, m) in hat.raw.iter().enumerate().take(r + 1) {
                let c = Rat::new(
                    big_binomial(r as u64, s as u64) * power_sum(n, (r - s) as u64),
                    BigInt::from(n),
                );
                acc.add_assign(&C::from_rat(&c).mul(m));
            }
            acc
        })
        .collect();
    let factorial = raw_to_factorial(&raw);
    MomentTable {
        n,
        factorial,
        raw,
    }
}

impl MomentTable<Rat> {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "factorial": self.factorial.iter().map(|x| format_rat(x)).collect::<Vec<_>>(),
            "raw": self.raw.iter().map(|x| format_rat(x)).collect::<Vec<_>>(),
        })
    }
}

impl MomentTable<f64> {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "factorial": self.factorial,
            "raw": self.raw,
        })
    }
}
