//! Bivariate series in (z, q), truncated in z, sparse and exact in q.
//!
//! Rows are indexed by the z-exponent n; each row is a sparse polynomial in q
//! (inversion counts never exceed n(n−1)/2, so rows stay finite without any
//! q-truncation). The main entry point is [`bi_solve_f`], which produces the
//! joint tables of tree size and inversion count.

use std::collections::BTreeMap;
use crate::coeff::Coeff;
use crate::family::DegreeWeightSequence;

/// Sparse polynomial in q: exponent ↦ coefficient, zeros pruned.
pub type QRow<C> = BTreeMap<u64, C>;

fn row_add_scaled<C: Coeff>(dst: &mut QRow<C>, src: &QRow<C>, scale: &C) {
    for (&k, v) in src {
        let term = v.mul(scale);
        if term.is_zero() {
            continue;
        }
        match dst.get_mut(&k) {
            Some(slot) => {
                slot.add_assign(&term);
                if slot.is_zero() {
                    dst.remove(&k);
                }
            }
            None => {
                dst.insert(k, term);
            }
        }
    }
}

pub(crate) fn row_convolve<C: Coeff>(a: &QRow<C>, b: &QRow<C>) -> QRow<C> {
    let mut out: QRow<C> = QRow::new();
    for (&ka, va) in a {
        for (&kb, vb) in b {
            let term = va.mul(vb);
            if term.is_zero() {
                continue;
            }
            let k = ka + kb;
            match out.get_mut(&k) {
                Some(slot) => {
                    slot.add_assign(&term);
                    if slot.is_zero() {
                        out.remove(&k);
                    }
                }
                None => {
                    out.insert(k, term);
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiSeries<C> {
    rows: Vec<QRow<C>>,
}

impl<C: Coeff> BiSeries<C> {
    pub fn zeros(order: usize) -> Self {
        BiSeries { rows: vec![QRow::new(); order + 1] }
    }

    pub fn from_rows(rows: Vec<QRow<C>>) -> Self {
        assert!(!rows.is_empty());
        BiSeries { rows }
    }

    /// z-truncation order.
    pub fn order(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn row(&self, n: usize) -> &QRow<C> {
        &self.rows[n]
    }

    pub fn set_row(&mut self, n: usize, row: QRow<C>) {
        self.rows[n] = row;
    }

    /// [z^n q^k], zero when q^k is absent from the (stored) row.
    pub fn coeff(&self, n: usize, k: u64) -> C {
        self.rows[n].get(&k).cloned().unwrap_or_else(C::zero)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let ord = self.order().min(rhs.order());
        let mut rows = self.rows[..=ord].to_vec();
        let one = C::one();
        for (n, row) in rows.iter_mut().enumerate() {
            row_add_scaled(row, &rhs.rows[n], &one);
        }
        BiSeries { rows }
    }

    pub fn scale(&self, c: &C) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut out = QRow::new();
                row_add_scaled(&mut out, r, c);
                out
            })
            .collect();
        BiSeries { rows }
    }

    /// Product, truncated in z at the smaller order.
    pub fn mul(&self, rhs: &Self) -> Self {
        let ord = self.order().min(rhs.order());
        let mut rows = vec![QRow::new(); ord + 1];
        let one = C::one();
        for n1 in 0..=ord {
            if self.rows[n1].is_empty() {
                continue;
            }
            for n2 in 0..=(ord - n1) {
                if rhs.rows[n2].is_empty() {
                    continue;
                }
                let prod = row_convolve(&self.rows[n1], &rhs.rows[n2]);
                row_add_scaled(&mut rows[n1 + n2], &prod, &one);
            }
        }
        BiSeries { rows }
    }

    /// Evaluation at q = 1: collapses each row to the coefficient sum.
    pub fn at_q1(&self) -> Vec<C> {
        self.rows
            .iter()
            .map(|r| {
                let mut s = C::zero();
                for v in r.values() {
                    s.add_assign(v);
                }
                s
            })
            .collect()
    }

    /// exp in the z-direction (row 0 must vanish): Σ_m self^m/m!.
    pub fn exp_z(&self) -> Self {
        assert!(self.rows[0].is_empty(), "exp_z needs a vanishing z^0 row");
        let ord = self.order();
        let mut result = BiSeries::zeros(ord);
        result.rows[0].insert(0, C::one());
        let mut power = result.clone(); // self^0
        let mut mfact = C::one();
        for m in 1..=ord {
            power = power.mul(self);
            mfact = mfact.mul(&C::from_u64(m as u64));
            let inv = C::one().div(&mfact);
            for n in 0..=ord {
                row_add_scaled(&mut result.rows[n], &power.rows[n], &inv);
            }
        }
        result
    }
}

/// Joint tables of size and inversion count for a family.
///
/// `f` collects trees with root label 1: row n of `f` times n! is the
/// polynomial Σ_k (#root-1 trees of size n with k inversions, weighted)·q^k.
/// `t` collects all labelled trees the same way. The root label of a tree
/// contributes one unit of inversion per smaller label below a larger
/// ancestor; shifting the root label from 1 through n multiplies a root-1
/// polynomial row by 1 + q + … + q^{n−1}, which is exactly how `t` is built
/// from `f`.
#[derive(Debug, Clone)]
pub struct InversionTables<C> {
    pub f: BiSeries<C>,
    pub t: BiSeries<C>,
}

/// Solves D_z F(z, q) = φ(T(z, q)) jointly with T's rows being F's rows
/// multiplied by 1 + q + … + q^{n−1}.
///
/// Same power-table scheme as the univariate tree solver, with q-polynomial
/// rows as coefficients.
pub fn bi_solve_f<C: Coeff>(family: &DegreeWeightSequence, order: usize) -> InversionTables<C> {
    let weights: Vec<C> = family.weights_to(order.max(1));
    let mut f = BiSeries::<C>::zeros(order);
    let mut t = BiSeries::<C>::zeros(order);
    // powers[l][n] = [z^n] T(z,q)^l
    let mut powers: Vec<Vec<QRow<C>>> = vec![vec![QRow::new(); order.max(1)]; order + 1];
    if order > 0 {
        powers[0][0].insert(0, C::one());
    }
    for n in 0..order {
        for l in 1..=n {
            let mut row = QRow::new();
            let one = C::one();
            for m in 1..=(n + 1 - l) {
                if t.rows[m].is_empty() || powers[l - 1][n - m].is_empty() {
                    continue;
                }
                let prod = row_convolve(&t.rows[m], &powers[l - 1][n - m]);
                row_add_scaled(&mut row, &prod, &one);
            }
            powers[l][n] = row;
        }
        // g_n = [z^n] φ(T(z,q)); then (n+1)·f_{n+1} = g_n
        let mut g = QRow::new();
        for l in 0..=n {
            if !weights[l].is_zero() && !powers[l][n].is_empty() {
                row_add_scaled(&mut g, &powers[l][n], &weights[l]);
            }
        }
        let inv = C::one().div(&C::from_u64(n as u64 + 1));
        let mut frow = QRow::new();
        row_add_scaled(&mut frow, &g, &inv);
        // t-row: multiply by 1 + q + … + q^n
        let mut trow: QRow<C> = QRow::new();
        for shift in 0..=(n as u64) {
            for (&k, v) in &frow {
                let key = k + shift;
                match trow.get_mut(&key) {
                    Some(slot) => slot.add_assign(v),
                    None => {
                        trow.insert(key, v.clone());
                    }
                }
            }
        }
        f.rows[n + 1] = frow;
        t.rows[n + 1] = trow;
    }
    InversionTables { f, t }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{rat, rat_i, Rat};
    use crate::series::solve_tree_series;

    fn fam(name: &str) -> DegreeWeightSequence {
        DegreeWeightSequence::builtin(name).unwrap()
    }

    fn row(entries: &[(u64, Rat)]) -> QRow<Rat> {
        entries.iter().cloned().collect()
    }

    #[test]
    fn ordered_size3_rows() {
        let tabs = bi_solve_f::<Rat>(&fam("ordered"), 3);
        // 12 labelled plane trees of size 3, by inversion count 3/4/4/1;
        // rows carry EGF normalization 1/n!.
        assert_eq!(
            *tabs.t.row(3),
            row(&[(0, rat(3, 6)), (1, rat(4, 6)), (2, rat(4, 6)), (3, rat(1, 6))])
        );
        assert_eq!(*tabs.f.row(3), row(&[(0, rat(3, 6)), (1, rat(1, 6))]));
    }

    #[test]
    fn q1_collapse_recovers_tree_series() {
        for name in ["binary", "ordered", "unordered", "cyclic"] {
            let f = fam(name);
            let tabs = bi_solve_f::<Rat>(&f, 9);
            let t = solve_tree_series::<Rat>(&f, 9);
            let collapsed = tabs.t.at_q1();
            for n in 0..=9 {
                assert_eq!(collapsed[n], t.coeff(n), "{name} T n={n}");
            }
            // root-1 trees are a 1/n fraction of all trees
            let fcol = tabs.f.at_q1();
            for n in 1..=9 {
                assert_eq!(
                    fcol[n].clone() * rat_i(n as i64),
                    t.coeff(n),
                    "{name} F n={n}"
                );
            }
        }
    }

    #[test]
    fn rows_respect_inversion_bound() {
        let tabs = bi_solve_f::<Rat>(&fam("ordered"), 8);
        for n in 0..=8u64 {
            for &k in tabs.t.row(n as usize).keys() {
                assert!(k <= n * (n - 1) / 2, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn mul_and_exp_consistency() {
        // exp_z of a one-row series against the scalar expansion
        let mut s = BiSeries::<Rat>::zeros(4);
        s.set_row(1, row(&[(1, rat_i(2))])); // 2qz
        let e = s.exp_z();
        // e^{2qz} rows: (2q)^n/n! z^n
        for n in 0..=4u64 {
            let coeff = e.coeff(n as usize, n);
            let expect = Rat::new(
                num::BigInt::from(2).pow(n as u32),
                crate::coeff::big_factorial(n),
            );
            assert_eq!(coeff, expect, "n={n}");
            assert_eq!(e.row(n as usize).len(), 1);
        }
        // (z + qz)² = z² + 2qz² + q²z²
        let mut b = BiSeries::<Rat>::zeros(2);
        b.set_row(1, row(&[(0, rat_i(1)), (1, rat_i(1))]));
        let sq = b.mul(&b);
        assert_eq!(*sq.row(2), row(&[(0, rat_i(1)), (1, rat_i(2)), (2, rat_i(1))]));
        assert!(sq.row(1).is_empty());
    }
}
