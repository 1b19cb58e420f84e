//! Weight-proportional random trees, fast inversion counting, and the
//! Monte Carlo harness that confronts the limit laws with finite-n samples.
//!
//! Binary, ordered and unordered trees get exact bijective samplers (Rémy,
//! cycle lemma, Prüfer). Everything else goes through a size-conditioned
//! critical branching process: offspring law p_ℓ = φ_ℓ τ^ℓ / φ(τ), rejected
//! until the total progeny hits n. Tilting to criticality maximizes the
//! acceptance probability; the conditioned law does not depend on the tilt.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::coeff::rat_to_f64;
use crate::enumerate::LabelledTree;
use crate::family::DegreeWeightSequence;
use crate::limitlaws::{airy_moments, rayleigh_moment, ygamma_pmf};
use crate::{Error, Result};

/// Attempts before the size-conditioned sampler gives up.
pub const REJECTION_CAP: u64 = 1_000_000;

/// Offspring degrees beyond this carry negligible mass for any admissible
/// family (the table is cut earlier once the tail drops under 1e-15).
const OFFSPRING_CAP: usize = 512;

/// Monte Carlo work unit: each chunk of this many reps runs on its own
/// rng stream, so the merged result is independent of thread count.
const CHUNK: u64 = 250;

/// Boundary for the per-label statistic between "j far below n" (Rayleigh
/// regime) and the square-root window (discrete regime), in units of
/// alpha = (n - j)/sqrt(n).
const ALPHA_WINDOW: f64 = 10.0;

/// Reproducible rng coordinates. Equal (seed, stream) gives the identical
/// draw sequence; distinct streams of one seed are independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngStream { seed, stream }
    }

    pub fn offset(self, delta: u64) -> Self {
        RngStream {
            seed: self.seed,
            stream: self.stream.wrapping_add(delta),
        }
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.stream);
        r
    }
}

fn random_labels(n: usize, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let mut labels: Vec<u32> = (1..=n as u32).collect();
    labels.shuffle(rng);
    labels
}

/// One tree of size n, chosen with probability proportional to its weight.
pub fn sample_tree(
    family: &DegreeWeightSequence,
    n: u64,
    rng: &mut ChaCha8Rng,
) -> Result<LabelledTree> {
    if n == 0 {
        return Err(Error::InvalidParameter("tree size must be ≥ 1".into()));
    }
    match family.name() {
        "binary" => sample_binary(n as usize, rng),
        "ordered" => sample_ordered(n as usize, rng),
        "unordered" => sample_unordered(n as usize, rng),
        _ => sample_tree_conditioned(family, n, rng),
    }
}

/// Rémy's algorithm: grow a uniform full binary tree with n internal nodes
/// by repeatedly splicing a fresh leaf onto a uniformly chosen node, on a
/// uniformly chosen side. The internal nodes, with leaves erased, form a
/// uniform n-node binary tree; positions of only children collapse into the
/// weight 2 the binary weight sequence assigns them.
fn sample_binary(n: usize, rng: &mut ChaCha8Rng) -> Result<LabelledTree> {
    // node arrays for the full tree; usize::MAX marks "no child" (leaf)
    const NONE: usize = usize::MAX;
    let mut kids: Vec<[usize; 2]> = vec![[NONE, NONE]];
    let mut parent: Vec<usize> = vec![NONE];
    let mut root = 0usize;
    for _ in 0..n {
        let x = rng.random_range(0..kids.len());
        let side = rng.random_range(0..2usize);
        let u = kids.len();
        kids.push([NONE, NONE]);
        parent.push(parent[x]);
        let v = kids.len();
        kids.push([NONE, NONE]);
        parent.push(u);
        if parent[x] == NONE {
            root = u;
        } else {
            let p = parent[x];
            let slot = if kids[p][0] == x { 0 } else { 1 };
            kids[p][slot] = u;
        }
        parent[x] = u;
        kids[u][side] = v;
        kids[u][1 - side] = x;
    }
    // preorder over internal nodes only, children kept in left-right order
    let mut degrees = Vec::with_capacity(n);
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        let internal: Vec<usize> = kids[v]
            .iter()
            .copied()
            .filter(|&c| c != NONE && kids[c][0] != NONE)
            .collect();
        degrees.push(internal.len());
        for &c in internal.iter().rev() {
            stack.push(c);
        }
    }
    LabelledTree::from_preorder(&degrees, &random_labels(n, rng))
}

/// Cycle lemma: a uniform sequence of n child counts summing to n - 1
/// (drawn by stars and bars) has exactly one rotation that is a valid
/// preorder degree sequence, and the map is n-to-1 onto plane trees.
fn sample_ordered(n: usize, rng: &mut ChaCha8Rng) -> Result<LabelledTree> {
    let m = n - 1;
    // 2m slots, m of them bars; degree i counts stars before bar i
    let mut bar = vec![false; 2 * m];
    for b in bar.iter_mut().take(m) {
        *b = true;
    }
    bar.shuffle(rng);
    let mut degrees = vec![0usize; n];
    let mut i = 0;
    for &is_bar in &bar {
        if is_bar {
            i += 1;
        } else {
            degrees[i] += 1;
        }
    }
    // rotate to start just past the first minimum of the walk d_i - 1
    let mut sum = 0i64;
    let mut best = i64::MAX;
    let mut cut = 0;
    for (t, &d) in degrees.iter().enumerate() {
        sum += d as i64 - 1;
        if sum < best {
            best = sum;
            cut = t + 1;
        }
    }
    degrees.rotate_left(cut % n);
    LabelledTree::from_preorder(&degrees, &random_labels(n, rng))
}

/// Prüfer decode of a uniform sequence gives a uniform labelled tree on n
/// vertices; a uniform root then makes all n^{n-1} rooted trees equally
/// likely, which is exactly the weight-proportional law for this family.
fn sample_unordered(n: usize, rng: &mut ChaCha8Rng) -> Result<LabelledTree> {
    if n == 1 {
        return LabelledTree::from_children(1, 1, &[]);
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.random_range(1..=n)).collect();
    let mut deg = vec![1u32; n + 1];
    for &s in &seq {
        deg[s] += 1;
    }
    let mut leaves = std::collections::BinaryHeap::new();
    for v in 1..=n {
        if deg[v] == 1 {
            leaves.push(std::cmp::Reverse(v));
        }
    }
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n + 1];
    for &s in &seq {
        let std::cmp::Reverse(l) = leaves.pop().expect("decode invariant");
        adj[l].push(s as u32);
        adj[s].push(l as u32);
        deg[s] -= 1;
        if deg[s] == 1 {
            leaves.push(std::cmp::Reverse(s));
        }
    }
    let std::cmp::Reverse(a) = leaves.pop().expect("two leaves remain");
    let std::cmp::Reverse(b) = leaves.pop().expect("two leaves remain");
    adj[a].push(b as u32);
    adj[b].push(a as u32);

    let root = rng.random_range(1..=n) as u32;
    let mut lists: Vec<(u32, Vec<u32>)> = Vec::with_capacity(n);
    let mut stack = vec![(root, 0u32)];
    while let Some((v, par)) = stack.pop() {
        let mut ch: Vec<u32> = adj[v as usize].iter().copied().filter(|&w| w != par).collect();
        ch.sort_unstable();
        for &w in &ch {
            stack.push((w, v));
        }
        lists.push((v, ch));
    }
    LabelledTree::from_children(n, root, &lists)
}

/// Walker alias table: O(1) draws from a fixed finite law.
struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<usize>,
}

impl AliasTable {
    fn new(p: &[f64]) -> AliasTable {
        let m = p.len();
        let mut prob = vec![0.0; m];
        let mut alias = vec![0usize; m];
        let mut small = Vec::new();
        let mut large = Vec::new();
        let scaled: Vec<f64> = p.iter().map(|x| x * m as f64).collect();
        let mut rem: Vec<f64> = scaled.clone();
        for (i, &s) in scaled.iter().enumerate() {
            if s < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        while !small.is_empty() && !large.is_empty() {
            let s = small.pop().expect("checked nonempty");
            let l = large.pop().expect("checked nonempty");
            prob[s] = rem[s];
            alias[s] = l;
            rem[l] = (rem[l] + rem[s]) - 1.0;
            if rem[l] < 1.0 {
                small.push(l);
            } else {
                large.push(l);
            }
        }
        for i in small.into_iter().chain(large) {
            prob[i] = 1.0;
        }
        AliasTable { prob, alias }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        let i = rng.random_range(0..self.prob.len());
        if rng.random::<f64>() < self.prob[i] {
            i
        } else {
            self.alias[i]
        }
    }
}

fn offspring_table(family: &DegreeWeightSequence) -> Result<AliasTable> {
    let consts = family.solve_constants()?;
    let phi_tau = family.phi(consts.tau);
    let mut p = Vec::new();
    let mut cum = 0.0;
    let mut pow = 1.0;
    for l in 0..=OFFSPRING_CAP {
        let pl = rat_to_f64(&family.weight(l)) * pow / phi_tau;
        p.push(pl);
        cum += pl;
        pow *= consts.tau;
        if 1.0 - cum < 1e-15 {
            break;
        }
    }
    // renormalize the truncation so the alias construction sees an exact law
    for x in p.iter_mut() {
        *x /= cum;
    }
    Ok(AliasTable::new(&p))
}

/// Size-conditioned critical branching process, usable for any admissible
/// family. Attempts grow the tree in preorder and abort past n nodes.
pub fn sample_tree_conditioned(
    family: &DegreeWeightSequence,
    n: u64,
    rng: &mut ChaCha8Rng,
) -> Result<LabelledTree> {
    if n == 0 {
        return Err(Error::InvalidParameter("tree size must be ≥ 1".into()));
    }
    let d = family.support_gcd();
    if d > 0 && (n - 1) % d != 0 {
        return Err(Error::InvalidParameter(format!(
            "family `{}` has no trees of size {n}: sizes satisfy n ≡ 1 mod {d}",
            family.name()
        )));
    }
    let table = offspring_table(family)?;
    let n = n as usize;
    let mut degrees = Vec::with_capacity(n);
    for _attempt in 0..REJECTION_CAP {
        degrees.clear();
        let mut open = 1usize;
        while open > 0 {
            if degrees.len() == n {
                break;
            }
            let deg = table.draw(rng);
            degrees.push(deg);
            open = open - 1 + deg;
        }
        if open == 0 && degrees.len() == n {
            let labels = random_labels(n, rng);
            return LabelledTree::from_preorder(&degrees, &labels);
        }
    }
    Err(Error::RejectionCap {
        attempts: REJECTION_CAP,
        n: n as u64,
        d,
    })
}

/// Fenwick tree over label values, for rank queries along the root path.
struct Fenwick {
    t: Vec<i64>,
}

impl Fenwick {
    fn new(n: usize) -> Fenwick {
        Fenwick { t: vec![0; n + 1] }
    }

    fn add(&mut self, mut i: usize, delta: i64) {
        while i < self.t.len() {
            self.t[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// count of active values ≤ i
    fn prefix(&self, mut i: usize) -> i64 {
        let mut s = 0;
        while i > 0 {
            s += self.t[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

/// Inversions charged to each label: entry j-1 counts ancestors of the node
/// labelled j that carry a larger label. One DFS with insert-on-entry /
/// remove-on-exit over the root path, O(n log n).
pub fn inversions_by_node(tree: &LabelledTree) -> Vec<u64> {
    let n = tree.n();
    let mut fen = Fenwick::new(n);
    let mut out = vec![0u64; n];
    let mut depth = 0i64;
    enum Step {
        Enter(u32),
        Exit(u32),
    }
    let mut stack = vec![Step::Enter(tree.root())];
    while let Some(step) = stack.pop() {
        match step {
            Step::Enter(v) => {
                out[v as usize - 1] = (depth - fen.prefix(v as usize)) as u64;
                fen.add(v as usize, 1);
                depth += 1;
                stack.push(Step::Exit(v));
                for &c in tree.children(v).iter().rev() {
                    stack.push(Step::Enter(c));
                }
            }
            Step::Exit(v) => {
                fen.add(v as usize, -1);
                depth -= 1;
            }
        }
    }
    out
}

pub fn inversions_total(tree: &LabelledTree) -> u64 {
    inversions_by_node(tree).iter().sum()
}

/// One line of a Monte Carlo report: an empirical quantity, its standard
/// error from the same run, and the limit-law reference value.
#[derive(Debug, Clone, PartialEq)]
pub struct StatLine {
    pub label: String,
    pub value: f64,
    pub std_error: f64,
    pub reference: f64,
}

/// Merged result of a Monte Carlo run. The histogram collects the raw
/// (unnormalized) integer statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSummary {
    pub family: String,
    pub n: u64,
    pub j: Option<u64>,
    pub reps: u64,
    pub seed: u64,
    pub stream: u64,
    pub normalization: String,
    pub stats: Vec<StatLine>,
    pub histogram: BTreeMap<u64, u64>,
}

impl SampleSummary {
    pub fn to_json(&self) -> Value {
        json!({
            "family": self.family,
            "n": self.n,
            "j": self.j,
            "reps": self.reps,
            "seed": self.seed,
            "stream": self.stream,
            "normalization": self.normalization,
            "stats": self.stats.iter().map(|s| json!({
                "label": s.label,
                "value": s.value,
                "std_error": s.std_error,
                "reference": s.reference,
            })).collect::<Vec<_>>(),
            "histogram": self.histogram.iter()
                .map(|(k, c)| json!([k, c]))
                .collect::<Vec<_>>(),
        })
    }

    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("k,count\n");
        for (k, c) in &self.histogram {
            out.push_str(&format!("{k},{c}\n"));
        }
        out
    }
}

struct ChunkAcc {
    count: u64,
    // power sums of the raw integer statistic, s[p] = Σ k^p for p = 1..4
    s: [f64; 4],
    hist: BTreeMap<u64, u64>,
}

/// Chunked deterministic runner: chunk c draws from stream base + c, and
/// partial sums merge in chunk order, so the result is a pure function of
/// (seed, stream, reps) regardless of how rayon schedules the chunks.
fn run_chunks<F>(
    family: &DegreeWeightSequence,
    n: u64,
    reps: u64,
    base: RngStream,
    stat: F,
) -> Result<ChunkAcc>
where
    F: Fn(&LabelledTree) -> u64 + Sync,
{
    let chunks = reps.div_ceil(CHUNK);
    let parts: Vec<Result<ChunkAcc>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = base.offset(c).rng();
            let lo = c * CHUNK;
            let hi = reps.min(lo + CHUNK);
            let mut acc = ChunkAcc {
                count: 0,
                s: [0.0; 4],
                hist: BTreeMap::new(),
            };
            for _ in lo..hi {
                let t = sample_tree(family, n, &mut rng)?;
                let k = stat(&t);
                let x = k as f64;
                acc.count += 1;
                acc.s[0] += x;
                acc.s[1] += x * x;
                acc.s[2] += x * x * x;
                acc.s[3] += x * x * x * x;
                *acc.hist.entry(k).or_insert(0) += 1;
            }
            Ok(acc)
        })
        .collect();
    let mut total = ChunkAcc {
        count: 0,
        s: [0.0; 4],
        hist: BTreeMap::new(),
    };
    for part in parts {
        let part = part?;
        total.count += part.count;
        for p in 0..4 {
            total.s[p] += part.s[p];
        }
        for (k, c) in part.hist {
            *total.hist.entry(k).or_insert(0) += c;
        }
    }
    Ok(total)
}

/// Mean and standard error of scale^r · k^r from raw power sums.
fn moment_line(acc: &ChunkAcc, scale: f64, r: usize, label: &str, reference: f64) -> StatLine {
    let nn = acc.count as f64;
    let m = acc.s[r - 1] / nn * scale.powi(r as i32);
    let m2 = acc.s[2 * r - 1] / nn * scale.powi(2 * r as i32);
    let var = (m2 - m * m).max(0.0);
    StatLine {
        label: label.to_string(),
        value: m,
        std_error: (var / nn).sqrt(),
        reference,
    }
}

/// Total inversions normalized by c_φ n^{3/2}, against the first two
/// moments of the Airy law.
pub fn monte_carlo_global(
    family: &DegreeWeightSequence,
    n: u64,
    reps: u64,
    base: RngStream,
) -> Result<SampleSummary> {
    if reps < 2 {
        return Err(Error::InvalidParameter("need reps ≥ 2".into()));
    }
    let consts = family.solve_constants()?;
    let scale = 1.0 / (consts.c_phi * (n as f64).powf(1.5));
    let acc = run_chunks(family, n, reps, base, inversions_total)?;
    let airy = airy_moments(2);
    let stats = vec![
        moment_line(&acc, scale, 1, "E[X^1]", airy.mu[1]),
        moment_line(&acc, scale, 2, "E[X^2]", airy.mu[2]),
    ];
    Ok(SampleSummary {
        family: family.name().to_string(),
        n,
        j: None,
        reps,
        seed: base.seed,
        stream: base.stream,
        normalization: "X = I_n / (c_phi * n^(3/2))".into(),
        stats,
        histogram: acc.hist,
    })
}

/// Inversions charged to label j. Far below n the statistic is normalized
/// by (n-j)/sqrt(n) and compared to Rayleigh moments; within the
/// square-root window its raw pmf is compared to the discrete law with
/// parameter gamma = alpha * sigma; at j = n it is identically zero.
pub fn monte_carlo_local(
    family: &DegreeWeightSequence,
    n: u64,
    j: u64,
    reps: u64,
    base: RngStream,
) -> Result<SampleSummary> {
    if reps < 2 {
        return Err(Error::InvalidParameter("need reps ≥ 2".into()));
    }
    if j == 0 || j > n {
        return Err(Error::InvalidParameter(format!(
            "label j = {j} out of range 1..={n}"
        )));
    }
    let consts = family.solve_constants()?;
    let acc = run_chunks(family, n, reps, base, move |t| {
        inversions_by_node(t)[j as usize - 1]
    })?;
    let alpha = (n - j) as f64 / (n as f64).sqrt();
    let (normalization, stats) = if j == n {
        // the root label induces no inversions: point mass at zero
        let lines = vec![
            moment_line(&acc, 1.0, 1, "E[X^1]", 0.0),
            moment_line(&acc, 1.0, 2, "E[X^2]", 0.0),
        ];
        ("X = I_{n,j} with j = n (degenerate at 0)".to_string(), lines)
    } else if alpha >= ALPHA_WINDOW {
        let scale = (n as f64).sqrt() / (n - j) as f64;
        let lines = vec![
            moment_line(&acc, scale, 1, "E[X^1]", rayleigh_moment(consts.sigma, 1)),
            moment_line(&acc, scale, 2, "E[X^2]", rayleigh_moment(consts.sigma, 2)),
        ];
        (
            "X = I_{n,j} * sqrt(n)/(n-j), reference Rayleigh(sigma)".to_string(),
            lines,
        )
    } else {
        let gamma = consts.gamma_for(alpha);
        let nn = acc.count as f64;
        let lines = (0..=10u64)
            .map(|k| {
                let p = acc.hist.get(&k).copied().unwrap_or(0) as f64 / nn;
                StatLine {
                    label: format!("P[X={k}]"),
                    value: p,
                    std_error: (p * (1.0 - p) / nn).sqrt(),
                    reference: ygamma_pmf(gamma, k),
                }
            })
            .collect();
        (
            format!("X = I_{{n,j}} raw, reference discrete law at gamma = {gamma}"),
            lines,
        )
    };
    Ok(SampleSummary {
        family: family.name().to_string(),
        n,
        j: Some(j),
        reps,
        seed: base.seed,
        stream: base.stream,
        normalization,
        stats,
        histogram: acc.hist,
    })
}
