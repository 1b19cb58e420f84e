//! The three limit laws that govern inversion counts, as numeric oracles:
//! Airy (moments only), Rayleigh, and the discrete law Y_gamma that bridges
//! them in the per-label regime where n - j is of order sqrt(n).

use crate::coeff::{big_binomial, rat, rat_to_f64, Rat};

/// Gamma(twice/2) for twice >= 1, by the recurrence from Gamma(1/2) = sqrt(pi)
/// and Gamma(1) = 1. Half-integer arguments are all this crate ever needs,
/// and the recurrence avoids a general-purpose Gamma routine.
pub fn gamma_half(twice: u64) -> f64 {
    assert!(twice >= 1, "Gamma at a nonpositive argument");
    let (mut x, mut cur) = if twice % 2 == 0 {
        (1.0, 2)
    } else {
        (std::f64::consts::PI.sqrt(), 1)
    };
    while cur < twice {
        x *= cur as f64 / 2.0;
        cur += 2;
    }
    x
}

/// Moments of the Airy distribution: exact constants C_r together with the
/// float moments mu_r = 2 sqrt(pi) C_r / Gamma((3r-1)/2). Index r; the 0
/// entries are the trivial moment 1.
#[derive(Debug, Clone)]
pub struct AiryMoments {
    pub c: Vec<Rat>,
    pub mu: Vec<f64>,
}

/// C_1 = 1/2 and 2 C_r = (3r-4) r C_{r-1} + sum_{j=1}^{r-1} C(r,j) C_j C_{r-j}.
pub fn airy_moments(r_max: u64) -> AiryMoments {
    assert!(r_max >= 1);
    let mut c = vec![rat(1, 1), rat(1, 2)];
    for r in 2..=r_max {
        let mut acc = Rat::from_integer(((3 * r - 4) * r).into()) * c[r as usize - 1].clone();
        for j in 1..r {
            acc += Rat::from_integer(big_binomial(r, j))
                * c[j as usize].clone()
                * c[(r - j) as usize].clone();
        }
        c.push(acc / rat(2, 1));
    }
    let mu = (0..=r_max)
        .map(|r| {
            if r == 0 {
                1.0
            } else {
                2.0 * std::f64::consts::PI.sqrt() * rat_to_f64(&c[r as usize])
                    / gamma_half(3 * r - 1)
            }
        })
        .collect();
    AiryMoments { c, mu }
}

/// Rayleigh density (x/sigma^2) exp(-x^2 / (2 sigma^2)) for x >= 0.
pub fn rayleigh_pdf(sigma: f64, x: f64) -> f64 {
    assert!(sigma > 0.0);
    if x < 0.0 {
        0.0
    } else {
        x / (sigma * sigma) * (-x * x / (2.0 * sigma * sigma)).exp()
    }
}

/// E[X^r] = sigma^r 2^{r/2} Gamma(1 + r/2) for Rayleigh X.
pub fn rayleigh_moment(sigma: f64, r: u64) -> f64 {
    assert!(sigma > 0.0);
    sigma.powi(r as i32) * 2f64.powf(r as f64 / 2.0) * gamma_half(r + 2)
}

/// Adaptive Simpson on [a, b]. The first few levels split unconditionally:
/// the integrands here are narrow bumps, and an error estimate taken from
/// three points of a wide interval would see only zeros and quit early.
/// After that, halve until the local estimate drops under eps, with a hard
/// recursion cap that keeps pathological inputs from spinning.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        eps: f64,
        depth: u32,
        force: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let err = left + right - whole;
        if depth == 0 || (force == 0 && err.abs() <= 15.0 * eps) {
            return left + right + err / 15.0;
        }
        let fc = force.saturating_sub(1);
        rec(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1, fc)
            + rec(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1, fc)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, b - a);
    rec(f, a, b, fa, fm, fb, whole, eps, 40, 6)
}

/// P{Y_gamma = k} = (gamma^k / k!) int_0^inf x^{k+1} exp(-x^2/2 - gamma x) dx.
///
/// The prefactor is folded into the integrand in log form, so no
/// intermediate quantity overflows even for large gamma or k; the upper
/// limit leaves a tail below 1e-16 by the Gaussian bound.
pub fn ygamma_pmf(gamma: f64, k: u64) -> f64 {
    assert!(gamma > 0.0);
    let mut ln_pref = 0.0;
    for i in 1..=k {
        ln_pref += (gamma / i as f64).ln();
    }
    let kk = k as f64;
    let g = move |x: f64| -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            (ln_pref + (kk + 1.0) * x.ln() - 0.5 * x * x - gamma * x).exp()
        }
    };
    let upper = 10f64
        .max(gamma + 12.0)
        .max((2.0 * (kk + 1.0)).sqrt() + 12.0);
    adaptive_simpson(&g, 0.0, upper, 1e-13)
}

/// pmf values for k = 0..=k_max.
pub fn ygamma_table(gamma: f64, k_max: u64) -> Vec<f64> {
    (0..=k_max).map(|k| ygamma_pmf(gamma, k)).collect()
}

/// A support cutoff that keeps the missed upper tail below ~1e-12. The
/// upper tail decays like that of a Rayleigh variable with scale gamma,
/// so the cutoff must be a multiple of gamma, not gamma plus a few
/// standard deviations.
pub fn ygamma_support_hint(gamma: f64) -> u64 {
    (7.0 * gamma + 10.0 * gamma.sqrt() + 30.0).ceil() as u64
}

/// E[Y_gamma^(r falling)] = gamma^r 2^{r/2} Gamma(r/2 + 1), in closed form.
pub fn ygamma_factorial_moment(gamma: f64, r: u64) -> f64 {
    assert!(gamma > 0.0);
    gamma.powi(r as i32) * 2f64.powf(r as f64 / 2.0) * gamma_half(r + 2)
}
