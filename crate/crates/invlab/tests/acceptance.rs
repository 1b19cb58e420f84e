//! End-to-end acceptance battery. Each test checks one numbered criterion and
//! prints exactly one `criterion N: PASS/FAIL (detail)` line (visible under
//! `--nocapture`, and always on failure). Tolerances are stated inline; the
//! Monte Carlo checks use fixed seeds, so the battery is reproducible.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use invlab::coeff::rat;
use invlab::family::DegreeWeightSequence;
use invlab::limitlaws::{
    airy_moments, ygamma_factorial_moment, ygamma_pmf, ygamma_support_hint,
};
use invlab::sampler::{monte_carlo_global, monte_carlo_local, RngStream, SampleSummary};
use invlab::verify::{run_suite, SuiteReport};

const SEED: u64 = 1234;

fn report(criterion: u32, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("criterion {criterion}: {verdict} ({detail})");
    assert!(ok, "criterion {criterion}: {verdict} ({detail})");
}

/// One timed run of a suite, shared between the criteria that read
/// different checks out of it.
fn timed_suite<'a>(
    cell: &'a OnceLock<(SuiteReport, Duration)>,
    suite: &str,
) -> &'a (SuiteReport, Duration) {
    cell.get_or_init(|| {
        let t = Instant::now();
        let rep = run_suite(suite, None, SEED).expect("suite must run");
        (rep, t.elapsed())
    })
}

fn closed_forms() -> &'static (SuiteReport, Duration) {
    static CELL: OnceLock<(SuiteReport, Duration)> = OnceLock::new();
    timed_suite(&CELL, "closed-forms")
}

fn moments() -> &'static (SuiteReport, Duration) {
    static CELL: OnceLock<(SuiteReport, Duration)> = OnceLock::new();
    timed_suite(&CELL, "moments")
}

fn check<'a>(rep: &'a SuiteReport, name: &str) -> &'a invlab::verify::CheckReport {
    rep.checks
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("suite {} has no check named {name}", rep.suite))
}

/// |observed - want| within three standard errors plus five percent of the
/// reference, the slack used by every sampling criterion.
fn within_mc_slack(line: &invlab::sampler::StatLine) -> bool {
    (line.value - line.reference).abs() <= 3.0 * line.std_error + 0.05 * line.reference.abs()
}

#[test]
fn criterion_01_exact_pipeline_matches_brute_enumeration() {
    let t = Instant::now();
    let rep = run_suite("oracle", None, SEED).expect("oracle suite must run");
    let secs = t.elapsed().as_secs_f64();
    let ok = rep.passed() && secs < 300.0;
    report(
        1,
        ok,
        &format!(
            "series polynomials and per-label pmfs equal brute enumeration, \
             4 builtin families, n <= 7, all labels; {} checks in {secs:.1}s (cap 300s)",
            rep.checks.len()
        ),
    );
}

#[test]
fn criterion_02_closed_forms_match_generic_extraction() {
    let (rep, _) = closed_forms();
    let pmf_checks: Vec<_> = rep
        .checks
        .iter()
        .filter(|c| c.name.starts_with("pmf-closed-vs-generic"))
        .collect();
    let ok = !pmf_checks.is_empty() && pmf_checks.iter().all(|c| c.passed);
    report(
        2,
        ok,
        "ordered and unordered closed-form pmfs equal bivariate-series \
         extraction exactly, n <= 40, all j and k",
    );
}

#[test]
fn criterion_03_q_exponential_identity_holds_through_order_ten() {
    let rep = run_suite("mallows-riordan", None, SEED).expect("suite must run");
    let c = check(&rep, "q-exponential-identity");
    let ok = c.passed && c.residual == 0.0;
    report(
        3,
        ok,
        &format!(
            "generating-function identity for unordered polynomials holds with \
             exact rational arithmetic through order 10, residual = {}",
            c.residual
        ),
    );
}

#[test]
fn criterion_04_singularity_constants_match_references() {
    let (rep, _) = closed_forms();
    let names = [
        "constants-binary",
        "constants-ordered",
        "constants-unordered",
        "constants-cyclic",
    ];
    let checks: Vec<_> = names.iter().map(|n| check(rep, n)).collect();
    let ok = checks.iter().all(|c| c.passed);
    let worst = checks.iter().map(|c| c.residual).fold(0.0f64, f64::max);
    report(
        4,
        ok,
        &format!(
            "tau, c_phi, sigma for binary/ordered/unordered within 1e-9 of the \
             closed forms; cyclic within 1e-5 of (0.6821555671, 0.2413351592, \
             0.6825989103); worst deviation {worst:.2e}"
        ),
    );
}

#[test]
fn criterion_05_moment_routes_agree_and_small_means_are_exact() {
    let (rep, _) = moments();
    let parts = [
        check(rep, "pumped-vs-polynomial-moments"),
        check(rep, "local-moments-vs-pmf"),
        check(rep, "transfer-small-means"),
    ];
    let ok = parts.iter().all(|c| c.passed);
    report(
        5,
        ok,
        "recursion moments equal polynomial moments (n <= 12, r <= 3), \
         extraction moments equal pmf sums (n <= 20, r <= 3), and \
         E[I_3] = 5/4 ordered, 4/3 unordered exactly",
    );
}

#[test]
fn criterion_06_float_moments_approach_the_growth_constants() {
    let (rep, took) = moments();
    let c = check(rep, "moment-scaling-n400");
    let secs = took.as_secs_f64();
    let ok = c.passed && secs < 60.0;
    report(
        6,
        ok,
        &format!(
            "ordered n = 400 float moments: E[I]/(c sqrt(pi) n^1.5) in [0.9, 1.1] \
             and E[I^2]/(c^2 n^3 mu_2) in [0.85, 1.15]; {}; whole moments suite \
             took {secs:.1}s (cap 60s)",
            c.detail
        ),
    );
}

#[test]
fn criterion_07_sampled_total_inversions_match_the_airy_mean() {
    let fam = DegreeWeightSequence::builtin("binary").unwrap();
    let t = Instant::now();
    let summary = monte_carlo_global(&fam, 2000, 10_000, RngStream::new(SEED, 0)).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let mean = &summary.stats[0];
    let ok = within_mc_slack(mean) && secs < 120.0;
    report(
        7,
        ok,
        &format!(
            "binary n = 2000, 10^4 reps: normalized mean {:.4} vs sqrt(pi) = {:.4}, \
             |diff| = {:.4} <= 3se + 5% = {:.4}; {secs:.1}s (cap 120s)",
            mean.value,
            mean.reference,
            (mean.value - mean.reference).abs(),
            3.0 * mean.std_error + 0.05 * mean.reference
        ),
    );
}

#[test]
fn criterion_08_bulk_label_inversions_match_the_rayleigh_mean() {
    let fam = DegreeWeightSequence::builtin("unordered").unwrap();
    let summary = monte_carlo_local(&fam, 10_000, 5_000, 10_000, RngStream::new(SEED, 500)).unwrap();
    let mean = &summary.stats[0];
    let ok = within_mc_slack(mean);
    report(
        8,
        ok,
        &format!(
            "unordered n = 10^4, j = n/2, 10^4 reps: normalized mean {:.4} vs \
             sqrt(pi/2) = {:.4}, |diff| = {:.4} <= 3se + 5% = {:.4}",
            mean.value,
            mean.reference,
            (mean.value - mean.reference).abs(),
            3.0 * mean.std_error + 0.05 * mean.reference
        ),
    );
}

/// The square-root-window criterion has three legs: sampled point
/// probabilities, the law's total mass, and its moments by quadrature.
#[test]
fn criterion_09_window_label_matches_the_discrete_law() {
    let fam = DegreeWeightSequence::builtin("unordered").unwrap();
    let summary: SampleSummary =
        monte_carlo_local(&fam, 10_000, 9_900, 10_000, RngStream::new(SEED, 900)).unwrap();
    let probs_ok = summary.stats.iter().take(4).all(within_mc_slack);
    let gamma = 1.0; // alpha = (n-j)/sqrt(n) = 1 and sigma = 1 for this family
    let mass: f64 = (0..=ygamma_support_hint(gamma)).map(|k| ygamma_pmf(gamma, k)).sum();
    let mass_ok = (mass - 1.0).abs() <= 1e-10;
    // factorial moments of the quadrature pmf vs the closed form
    let mut worst_quad = 0.0f64;
    for g in [0.5, 1.0, 2.0] {
        let k_max = ygamma_support_hint(g);
        for r in 0..=3u64 {
            let quad: f64 = (r..=k_max)
                .map(|k| {
                    let falling: f64 = (0..r).map(|i| (k - i) as f64).product();
                    falling * ygamma_pmf(g, k)
                })
                .sum();
            let want = ygamma_factorial_moment(g, r);
            worst_quad = worst_quad.max((quad - want).abs() / want.max(1.0));
        }
    }
    let quad_ok = worst_quad <= 1e-8;
    let ok = probs_ok && mass_ok && quad_ok;
    report(
        9,
        ok,
        &format!(
            "unordered n = 10^4, j = n - 100: sampled P(X = k) within 3se + 5% of \
             the gamma = 1 law for k <= 3 ({probs_ok}); law mass 1 - {:.1e} (need \
             1e-10); pmf moments vs closed form, worst rel err {worst_quad:.1e} \
             (need 1e-8)",
            (mass - 1.0).abs()
        ),
    );
}

#[test]
fn criterion_10_limit_law_constants_are_exact() {
    let a = airy_moments(2);
    let c1_ok = a.c[1] == rat(1, 2);
    let c2_ok = a.c[2] == rat(5, 4);
    let mu1_err = (a.mu[1] - std::f64::consts::PI.sqrt()).abs();
    let ok = c1_ok && c2_ok && mu1_err <= 1e-12;
    report(
        10,
        ok,
        &format!(
            "C_1 = 1/2 ({c1_ok}), C_2 = 5/4 ({c2_ok}) as exact rationals; \
             |mu_1 - sqrt(pi)| = {mu1_err:.1e} (need 1e-12)"
        ),
    );
}

#[test]
fn criterion_11_sampling_suite_reruns_bit_identically() {
    let a = run_suite("montecarlo", None, SEED).expect("suite must run");
    let b = run_suite("montecarlo", None, SEED).expect("suite must run");
    let ja = a.to_json().to_string();
    let jb = b.to_json().to_string();
    let ok = ja == jb && a.passed();
    report(
        11,
        ok,
        &format!(
            "montecarlo suite run twice with seed {SEED}: serialized reports are \
             byte-identical ({} bytes) and all {} checks pass both times",
            ja.len(),
            a.checks.len()
        ),
    );
}
