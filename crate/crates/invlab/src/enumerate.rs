//! Brute-force enumeration of small labelled trees.
//!
//! Everything here is deliberately naive: ordered shapes times all label
//! permutations, quadratic inversion counting. The point is to be an
//! independent ground truth for the generating-function machinery, so this
//! module shares no nontrivial code with it.

use std::collections::BTreeMap;

use num::{One, Zero};

use crate::coeff::Rat;
use crate::family::DegreeWeightSequence;
use crate::invpoly::InvPolynomial;
use crate::localdist::Pmf;
use crate::{Error, Result};

/// Enumeration is capped here; the tree count at size n is
/// n! times the n-th Catalan-like shape count.
pub const ENUM_CAP: u64 = 9;

/// Rooted tree on labels 1..=n with an explicit left-to-right child order.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelledTree {
    /// parent[v] for v in 1..=n; 0 marks the root (index 0 is unused)
    parent: Vec<u32>,
    /// children[v] in left-to-right order
    children: Vec<Vec<u32>>,
    root: u32,
}

impl LabelledTree {
    pub fn n(&self) -> usize {
        self.parent.len() - 1
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    pub fn parent(&self, v: u32) -> Option<u32> {
        match self.parent[v as usize] {
            0 => None,
            p => Some(p),
        }
    }

    pub fn children(&self, v: u32) -> &[u32] {
        &self.children[v as usize]
    }

    /// Build from a parent array (entry 0 unused, root entry 0); children are
    /// ordered by label.
    pub fn from_parent_array(parent: Vec<u32>) -> Result<Self> {
        let n = parent.len().saturating_sub(1);
        if n == 0 {
            return Err(Error::Parse("empty parent array".into()));
        }
        let mut children = vec![Vec::new(); n + 1];
        let mut root = 0u32;
        for v in 1..=n as u32 {
            let p = parent[v as usize];
            if p == 0 {
                if root != 0 {
                    return Err(Error::Parse("two roots".into()));
                }
                root = v;
            } else if p as usize > n {
                return Err(Error::Parse(format!("parent {p} out of range")));
            } else {
                children[p as usize].push(v);
            }
        }
        if root == 0 {
            return Err(Error::Parse("no root".into()));
        }
        let t = LabelledTree {
            parent,
            children,
            root,
        };
        t.check_connected()?;
        Ok(t)
    }

    /// Build from explicit child lists; unlisted nodes are leaves.
    pub fn from_children(n: usize, root: u32, lists: &[(u32, Vec<u32>)]) -> Result<Self> {
        let mut parent = vec![0u32; n + 1];
        let mut children = vec![Vec::new(); n + 1];
        for (p, kids) in lists {
            for &c in kids {
                if c as usize > n || c == 0 {
                    return Err(Error::Parse(format!("label {c} out of range")));
                }
                if parent[c as usize] != 0 {
                    return Err(Error::Parse(format!("label {c} attached twice")));
                }
                parent[c as usize] = *p;
                children[*p as usize].push(c);
            }
        }
        if root == 0 || root as usize > n || parent[root as usize] != 0 {
            return Err(Error::Parse("bad root".into()));
        }
        let t = LabelledTree {
            parent,
            children,
            root,
        };
        t.check_connected()?;
        Ok(t)
    }

    /// Build from a preorder degree sequence and the labels met in preorder.
    pub fn from_preorder(degrees: &[usize], labels: &[u32]) -> Result<Self> {
        let n = degrees.len();
        if n == 0 || labels.len() != n {
            return Err(Error::Parse("preorder length mismatch".into()));
        }
        let mut seen = vec![false; n + 1];
        for &l in labels {
            if l == 0 || l as usize > n || seen[l as usize] {
                return Err(Error::Parse("labels are not a permutation".into()));
            }
            seen[l as usize] = true;
        }
        let mut parent = vec![0u32; n + 1];
        let mut children = vec![Vec::new(); n + 1];
        // stack of (label, unfilled child slots)
        let mut stack: Vec<(u32, usize)> = Vec::new();
        for (i, (&d, &lab)) in degrees.iter().zip(labels).enumerate() {
            if i > 0 {
                let top = stack
                    .last_mut()
                    .ok_or_else(|| Error::Parse("degree sequence closes early".into()))?;
                parent[lab as usize] = top.0;
                children[top.0 as usize].push(lab);
                top.1 -= 1;
                if top.1 == 0 {
                    stack.pop();
                }
            }
            if d > 0 {
                stack.push((lab, d));
            }
        }
        if !stack.is_empty() {
            return Err(Error::Parse("degree sequence leaves open slots".into()));
        }
        Ok(LabelledTree {
            parent,
            children,
            root: labels[0],
        })
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.n();
        for v in 1..=n as u32 {
            let mut cur = v;
            for _ in 0..n {
                if cur == self.root {
                    break;
                }
                cur = self.parent[cur as usize];
            }
            if cur != self.root {
                return Err(Error::Parse(format!("label {v} not connected to root")));
            }
        }
        Ok(())
    }

    /// Product of the degree weights over all nodes.
    pub fn weight(&self, family: &DegreeWeightSequence) -> Rat {
        let mut w = Rat::one();
        for v in 1..=self.n() as u32 {
            w *= family.weight(self.children(v).len());
        }
        w
    }

    /// For each label v, the number of strictly larger labels on the path
    /// from the root to v. Index 0 is unused.
    /// Entry v-1 counts ancestors of the node labelled v with a larger
    /// label, by walking parent pointers. Quadratic on purpose.
    pub fn inversions_by_node(&self) -> Vec<u64> {
        let n = self.n();
        let mut out = vec![0u64; n];
        for v in 1..=n as u32 {
            let mut cur = self.parent[v as usize];
            while cur != 0 {
                if cur > v {
                    out[v as usize - 1] += 1;
                }
                cur = self.parent[cur as usize];
            }
        }
        out
    }

    /// Total number of pairs (i, j) with i > j and i an ancestor of j.
    pub fn count_inversions(&self) -> u64 {
        self.inversions_by_node().iter().sum()
    }
}

/// Preorder degree sequences of all ordered tree shapes with n nodes.
fn all_shapes(n: usize) -> Vec<Vec<u8>> {
    // forests[m]: every ordered forest on m nodes as (tree count, preorders
    // of its trees, concatenated); splitting off the first tree makes the
    // enumeration unambiguous
    let mut forests: Vec<Vec<(u8, Vec<u8>)>> = vec![vec![(0, Vec::new())]];
    let mut shapes: Vec<Vec<Vec<u8>>> = vec![Vec::new()];
    for m in 1..=n {
        let mut sh = Vec::new();
        for (count, body) in &forests[m - 1] {
            let mut seq = Vec::with_capacity(m);
            seq.push(*count);
            seq.extend_from_slice(body);
            sh.push(seq);
        }
        shapes.push(sh);
        if m < n {
            let mut fo = Vec::new();
            for first in 1..=m {
                for t in &shapes[first] {
                    for (count, rest) in &forests[m - first] {
                        let mut body = t.clone();
                        body.extend_from_slice(rest);
                        fo.push((count + 1, body));
                    }
                }
            }
            forests.push(fo);
        }
    }
    shapes.pop().unwrap_or_default()
}

fn next_permutation(a: &mut [u32]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

fn check_cap(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("need n >= 1".into()));
    }
    if n > ENUM_CAP {
        return Err(Error::SizeCap {
            requested: n,
            cap: ENUM_CAP,
        });
    }
    Ok(())
}

/// Every labelled ordered tree of size n, streamed with its weight (which is
/// zero for shapes the family does not support).
pub fn enumerate_trees(
    family: &DegreeWeightSequence,
    n: u64,
) -> Result<impl Iterator<Item = (LabelledTree, Rat)>> {
    check_cap(n)?;
    let shapes = all_shapes(n as usize);
    let weights: Vec<Rat> = shapes
        .iter()
        .map(|s| {
            s.iter()
                .map(|&d| family.weight(d as usize))
                .product::<Rat>()
        })
        .collect();
    let first: Vec<u32> = (1..=n as u32).collect();
    let mut shape_idx = 0usize;
    let mut labels = first.clone();
    let mut exhausted = false;
    Ok(std::iter::from_fn(move || {
        if exhausted || shape_idx >= shapes.len() {
            return None;
        }
        let degrees: Vec<usize> = shapes[shape_idx].iter().map(|&d| d as usize).collect();
        let tree = LabelledTree::from_preorder(&degrees, &labels)
            .expect("enumerated shapes are well formed");
        let w = weights[shape_idx].clone();
        if !next_permutation(&mut labels) {
            labels.copy_from_slice(&first);
            shape_idx += 1;
            if shape_idx >= shapes.len() {
                exhausted = true;
            }
        }
        Some((tree, w))
    }))
}

/// Everything one enumeration pass can tell us about one size: the inversion
/// polynomial, its root-label-1 restriction, and per-label ancestor counts.
#[derive(Debug, Clone)]
pub struct BruteProfile {
    pub all: InvPolynomial,
    pub root1: InvPolynomial,
    /// local[j-1][k] = total weight of trees in which label j has exactly k
    /// strictly larger ancestors
    pub local: Vec<Vec<Rat>>,
    pub total: Rat,
}

/// One pass over all (shape, labelling) pairs. Inversion counts are pure
/// integers for a fixed shape, so each shape accumulates integer tallies
/// that are merged with its weight once at the end.
pub fn brute_profile(family: &DegreeWeightSequence, n: u64) -> Result<BruteProfile> {
    check_cap(n)?;
    let nn = n as usize;
    let max_inv = nn * (nn - 1) / 2;
    let mut poly_all = vec![Rat::zero(); max_inv + 1];
    let mut poly_root1 = vec![Rat::zero(); max_inv + 1];
    let mut local = vec![vec![Rat::zero(); nn]; nn];
    for shape in all_shapes(nn) {
        let w: Rat = shape
            .iter()
            .map(|&d| family.weight(d as usize))
            .product();
        if w.is_zero() {
            continue;
        }
        // ancestor positions of each preorder position
        let mut parent_pos = vec![usize::MAX; nn];
        let mut stack: Vec<(usize, u8)> = Vec::new();
        for (p, &d) in shape.iter().enumerate() {
            if p > 0 {
                let top = stack.last_mut().unwrap();
                parent_pos[p] = top.0;
                top.1 -= 1;
                if top.1 == 0 {
                    stack.pop();
                }
            }
            if d > 0 {
                stack.push((p, d));
            }
        }
        let ancestors: Vec<Vec<usize>> = (0..nn)
            .map(|p| {
                let mut chain = Vec::new();
                let mut cur = parent_pos[p];
                while cur != usize::MAX {
                    chain.push(cur);
                    cur = parent_pos[cur];
                }
                chain
            })
            .collect();

        let mut cnt_all = vec![0u64; max_inv + 1];
        let mut cnt_root1 = vec![0u64; max_inv + 1];
        let mut cnt_local = vec![vec![0u64; nn]; nn];
        let mut perm: Vec<u32> = (1..=n as u32).collect();
        loop {
            let mut total = 0usize;
            for p in 0..nn {
                let lab = perm[p];
                let c = ancestors[p].iter().filter(|&&q| perm[q] > lab).count();
                total += c;
                cnt_local[lab as usize - 1][c] += 1;
            }
            cnt_all[total] += 1;
            if perm[0] == 1 {
                cnt_root1[total] += 1;
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
        for k in 0..=max_inv {
            if cnt_all[k] > 0 {
                poly_all[k] += w.clone() * Rat::from_integer(cnt_all[k].into());
            }
            if cnt_root1[k] > 0 {
                poly_root1[k] += w.clone() * Rat::from_integer(cnt_root1[k].into());
            }
        }
        for j in 0..nn {
            for k in 0..nn {
                if cnt_local[j][k] > 0 {
                    local[j][k] += w.clone() * Rat::from_integer(cnt_local[j][k].into());
                }
            }
        }
    }
    let dense_to_map = |v: &[Rat]| -> BTreeMap<u64, Rat> {
        v.iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k as u64, c.clone()))
            .collect()
    };
    let total: Rat = poly_all.iter().cloned().sum();
    Ok(BruteProfile {
        all: InvPolynomial {
            n,
            coeffs: dense_to_map(&poly_all),
        },
        root1: InvPolynomial {
            n,
            coeffs: dense_to_map(&poly_root1),
        },
        local,
        total,
    })
}

pub fn brute_inversion_polynomial(family: &DegreeWeightSequence, n: u64) -> Result<InvPolynomial> {
    Ok(brute_profile(family, n)?.all)
}

pub fn brute_root1_polynomial(family: &DegreeWeightSequence, n: u64) -> Result<InvPolynomial> {
    Ok(brute_profile(family, n)?.root1)
}

/// Exact distribution of the number of inversions whose lower label is j.
pub fn brute_local_distribution(
    family: &DegreeWeightSequence,
    n: u64,
    j: u64,
) -> Result<Pmf<Rat>> {
    if j == 0 || j > n {
        return Err(Error::InvalidParameter(format!("need 1 <= j <= n, got j={j}")));
    }
    let profile = brute_profile(family, n)?;
    if profile.total.is_zero() {
        return Err(Error::InvalidParameter(format!(
            "family {} has no trees of size {n}",
            family.name()
        )));
    }
    let probs: Vec<Rat> = (0..=(n - j) as usize)
        .map(|k| profile.local[j as usize - 1][k].clone() / profile.total.clone())
        .collect();
    Pmf::new(family.name().to_string(), n, j, probs)
}
