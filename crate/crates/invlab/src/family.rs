//! Tree families given by degree-weight sequences.
//!
//! A family is a sequence `φ_ℓ ≥ 0` (ℓ = number of children) with `φ_0 > 0`
//! and at least one `φ_ℓ > 0` for ℓ ≥ 2. The generating function
//! `φ(t) = Σ φ_ℓ t^ℓ` drives everything: the tree series solves
//! `T(z) = z·φ(T(z))`, and the growth constants come from the minimal
//! positive root τ of `t·φ′(t) = φ(t)` inside the radius of convergence.
//!
//! Derived constants, with τ as above:
//!   ρ = τ/φ(τ)        — singularity of T,
//!   c = 1/√(8ρτφ″(τ)) — scale of the total inversion count (mean ≈ c·√π·n^{3/2}),
//!   σ = 1/√(ρτφ″(τ))  — scale parameter of the local Rayleigh limit,
//! and d = gcd{ℓ ≥ 1 : φ_ℓ > 0}, the support period: trees of size n exist
//! only for n ≡ 1 (mod d).

use crate::coeff::{big_binomial, big_factorial, rat, rat_i, Coeff, Rat};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum WeightRule {
    /// φ_ℓ = C(2, ℓ): binary trees (left/right slots).
    Binary,
    /// φ_ℓ = 1: plane (ordered) trees.
    Ordered,
    /// φ_ℓ = 1/ℓ!: labelled unordered (Cayley) trees.
    Unordered,
    /// φ_0 = 1, φ_ℓ = 1/ℓ: children arranged on a cycle.
    Cyclic,
    /// Explicit finite list of rational weights.
    Finite(Vec<Rat>),
}

/// A tree family: weight `φ_ℓ` per node with ℓ children.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeWeightSequence {
    name: String,
    rule: WeightRule,
    radius_hint: Option<f64>,
    support_period: Option<u64>,
}

/// Analytic constants of a family; see the module docs for the formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyConstants {
    pub tau: f64,
    pub rho: f64,
    pub c_phi: f64,
    pub sigma: f64,
    /// Support period d: tree sizes satisfy n ≡ 1 (mod d).
    pub d: u64,
    /// |τφ′(τ) − φ(τ)| achieved by the root solver.
    pub residual: f64,
}

impl FamilyConstants {
    /// γ = α·σ, the parameter of the discrete local limit law when the label
    /// sits at distance `α·√n` from the end, `j = n − α√n`.
    pub fn gamma_for(&self, alpha: f64) -> f64 {
        alpha * self.sigma
    }
}

pub const BUILTIN_NAMES: [&str; 4] = ["binary", "ordered", "unordered", "cyclic"];

impl DegreeWeightSequence {
    /// One of `binary`, `ordered`, `unordered`, `cyclic`.
    pub fn builtin(name: &str) -> Result<Self> {
        let rule = match name {
            "binary" => WeightRule::Binary,
            "ordered" => WeightRule::Ordered,
            "unordered" => WeightRule::Unordered,
            "cyclic" => WeightRule::Cyclic,
            other => return Err(Error::UnknownFamily(other.to_string())),
        };
        Ok(DegreeWeightSequence {
            name: name.to_string(),
            rule,
            radius_hint: None,
            support_period: None,
        })
    }

    /// Custom family from a finite weight list; `weights[ℓ] = φ_ℓ`.
    pub fn custom(name: &str, weights: Vec<Rat>, radius_hint: Option<f64>) -> Result<Self> {
        if weights.is_empty() || weights[0] <= rat_i(0) {
            return Err(Error::NotAdmissible {
                name: name.to_string(),
                reason: "φ_0 must be positive (every tree has leaves)".into(),
            });
        }
        if weights.iter().any(|w| w < &rat_i(0)) {
            return Err(Error::NotAdmissible {
                name: name.to_string(),
                reason: "weights must be nonnegative".into(),
            });
        }
        if let Some(r) = radius_hint {
            if !(r > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "radius_hint must be positive, got {r}"
                )));
            }
        }
        Ok(DegreeWeightSequence {
            name: name.to_string(),
            rule: WeightRule::Finite(weights),
            radius_hint,
            support_period: None,
        })
    }

    /// Loads a custom family from JSON:
    /// `{"name": "...", "weights": ["1", "1/2", ...], "radius_hint": 1.5}`
    /// (weights are `p/q` strings, `radius_hint` optional).
    pub fn from_json_str(text: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        let name = v
            .get("name")
            .and_then(|x| x.as_str())
            .ok_or_else(|| Error::Parse("family JSON needs a string `name`".into()))?;
        let weights = v
            .get("weights")
            .and_then(|x| x.as_array())
            .ok_or_else(|| Error::Parse("family JSON needs a `weights` array".into()))?
            .iter()
            .map(|w| {
                w.as_str()
                    .ok_or_else(|| Error::Parse("weights must be \"p/q\" strings".into()))
                    .and_then(crate::coeff::parse_rat)
            })
            .collect::<Result<Vec<_>>>()?;
        let radius_hint = match v.get("radius_hint") {
            None | Some(serde_json::Value::Null) => None,
            Some(x) => Some(x.as_f64().ok_or_else(|| {
                Error::Parse("radius_hint must be a number".into())
            })?),
        };
        Self::custom(name, weights, radius_hint)
    }

    /// Resolves a CLI-style family argument: a builtin name or a JSON file path.
    pub fn resolve(arg: &str) -> Result<Self> {
        if BUILTIN_NAMES.contains(&arg) {
            return Self::builtin(arg);
        }
        if arg.ends_with(".json") || std::path::Path::new(arg).exists() {
            let text = std::fs::read_to_string(arg)?;
            return Self::from_json_str(&text);
        }
        Err(Error::UnknownFamily(arg.to_string()))
    }

    /// Overrides the computed support period (for weight sequences whose gcd
    /// structure is known not to show within the first 64 indices).
    pub fn with_support_period(mut self, d: u64) -> Self {
        self.support_period = Some(d);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// φ_ℓ, exactly.
    pub fn weight(&self, l: usize) -> Rat {
        match &self.rule {
            WeightRule::Binary => {
                Rat::from_integer(big_binomial(2, l as u64))
            }
            WeightRule::Ordered => rat_i(1),
            WeightRule::Unordered => Rat::new(1.into(), big_factorial(l as u64)),
            WeightRule::Cyclic => {
                if l == 0 {
                    rat_i(1)
                } else {
                    rat(1, l as i64)
                }
            }
            WeightRule::Finite(w) => w.get(l).cloned().unwrap_or_else(|| rat_i(0)),
        }
    }

    /// φ_0 … φ_max converted into the coefficient field.
    pub fn weights_to<C: Coeff>(&self, max: usize) -> Vec<C> {
        (0..=max).map(|l| C::from_rat(&self.weight(l))).collect()
    }

    /// Support period d = gcd{ℓ ≥ 1 : φ_ℓ > 0} over the first 64 indices
    /// (or the declared override). 0 means no support above ℓ = 1.
    pub fn support_gcd(&self) -> u64 {
        if let Some(d) = self.support_period {
            return d;
        }
        let mut d = 0u64;
        for l in 1..=64u64 {
            if !Coeff::is_zero(&self.weight(l as usize)) {
                d = gcd(d, l);
                if d == 1 {
                    break;
                }
            }
        }
        d
    }

    /// Radius of convergence of φ (∞ for entire φ).
    pub fn radius(&self) -> f64 {
        match &self.rule {
            WeightRule::Binary | WeightRule::Unordered | WeightRule::Finite(_) => f64::INFINITY,
            WeightRule::Ordered | WeightRule::Cyclic => 1.0,
        }
    }

    /// φ(t) for 0 ≤ t < radius.
    pub fn phi(&self, t: f64) -> f64 {
        match &self.rule {
            WeightRule::Binary => (1.0 + t) * (1.0 + t),
            WeightRule::Ordered => 1.0 / (1.0 - t),
            WeightRule::Unordered => t.exp(),
            WeightRule::Cyclic => 1.0 - (1.0 - t).ln(),
            WeightRule::Finite(w) => horner(w, t, 0),
        }
    }

    /// φ′(t).
    pub fn dphi(&self, t: f64) -> f64 {
        match &self.rule {
            WeightRule::Binary => 2.0 * (1.0 + t),
            WeightRule::Ordered => 1.0 / ((1.0 - t) * (1.0 - t)),
            WeightRule::Unordered => t.exp(),
            WeightRule::Cyclic => 1.0 / (1.0 - t),
            WeightRule::Finite(w) => horner(w, t, 1),
        }
    }

    /// φ″(t).
    pub fn d2phi(&self, t: f64) -> f64 {
        match &self.rule {
            WeightRule::Binary => 2.0,
            WeightRule::Ordered => 2.0 / (1.0 - t).powi(3),
            WeightRule::Unordered => t.exp(),
            WeightRule::Cyclic => 1.0 / ((1.0 - t) * (1.0 - t)),
            WeightRule::Finite(w) => horner(w, t, 2),
        }
    }

    /// Solves for τ, ρ, c, σ, d.
    ///
    /// τ is bracketed on a geometric grid in (0, R), refined by 60 bisection
    /// steps and polished by 5 Newton steps on h(t) = tφ′(t) − φ(t)
    /// (h′ = tφ″, and h is increasing, so the first sign change is the
    /// minimal root). Fails with `NotAdmissible` when no sign change exists.
    pub fn solve_constants(&self) -> Result<FamilyConstants> {
        let d = self.support_gcd();
        if d == 0 {
            return Err(Error::NotAdmissible {
                name: self.name.clone(),
                reason: "needs some φ_ℓ > 0 with ℓ ≥ 2 (no branching, no trees beyond paths)"
                    .into(),
            });
        }
        // For d to be meaningful there must be branching: gcd over ℓ ≥ 1 can
        // be 1 from φ_1 alone, so check ℓ ≥ 2 support directly.
        let has_branching = (2..=64).any(|l| !Coeff::is_zero(&self.weight(l)));
        if !has_branching {
            return Err(Error::NotAdmissible {
                name: self.name.clone(),
                reason: "needs some φ_ℓ > 0 with ℓ ≥ 2 (no branching, no trees beyond paths)"
                    .into(),
            });
        }

        let h = |t: f64| t * self.dphi(t) - self.phi(t);
        let radius = self.radius();
        let r_eff = match self.radius_hint {
            Some(hint) => hint.min(radius),
            None if radius.is_finite() => radius,
            None => 65536.0,
        };

        // Geometric probe grid from 2^-40·R upward; for finite radius, finish
        // by approaching R from below (the critical point can sit anywhere in
        // (0, R)), for entire φ just keep doubling past the hint.
        let mut grid: Vec<f64> = (0..=39).map(|k| r_eff * 2f64.powi(k - 40)).collect();
        if radius.is_finite() {
            grid.extend((2..=40).map(|m| r_eff * (1.0 - 2f64.powi(-m))));
        } else {
            grid.extend((0..=16).map(|k| r_eff * 2f64.powi(k)));
        }
        grid.retain(|t| t.is_finite() && *t > 0.0 && *t < radius);
        grid.dedup();

        let mut bracket = None;
        let mut prev: Option<(f64, f64)> = None;
        for &t in &grid {
            let ht = h(t);
            if !ht.is_finite() {
                break;
            }
            if let Some((pt, ph)) = prev {
                if ph < 0.0 && ht >= 0.0 {
                    bracket = Some((pt, t));
                    break;
                }
            }
            if ht >= 0.0 && prev.is_none() {
                // root below the smallest probe; bracket against ~0
                bracket = Some((r_eff * 2f64.powi(-60), t));
                break;
            }
            prev = Some((t, ht));
        }
        let (mut lo, mut hi) = bracket.ok_or_else(|| Error::NotAdmissible {
            name: self.name.clone(),
            reason: format!(
                "t·φ′(t) − φ(t) has no sign change on (0, {r_eff:.6}); \
                 the weight sequence grows too slowly for a critical point in range \
                 (radius_hint = {:?})",
                self.radius_hint
            ),
        })?;

        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if h(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut tau = 0.5 * (lo + hi);
        for _ in 0..5 {
            let hp = tau * self.d2phi(tau);
            if hp.abs() < f64::MIN_POSITIVE {
                break;
            }
            let next = tau - h(tau) / hp;
            if next.is_finite() && next > 0.0 && next < radius {
                tau = next;
            }
        }

        let phi_tau = self.phi(tau);
        let residual = (tau * self.dphi(tau) - phi_tau).abs();
        if !(residual <= 1e-12 * phi_tau.max(1.0)) {
            return Err(Error::NotAdmissible {
                name: self.name.clone(),
                reason: format!("root polish failed: residual {residual:.3e} at t = {tau}"),
            });
        }
        let rho = tau / phi_tau;
        let curvature = rho * tau * self.d2phi(tau);
        if !(curvature > 0.0) {
            return Err(Error::NotAdmissible {
                name: self.name.clone(),
                reason: "ρτφ″(τ) must be positive".into(),
            });
        }
        Ok(FamilyConstants {
            tau,
            rho,
            c_phi: 1.0 / (8.0 * curvature).sqrt(),
            sigma: 1.0 / curvature.sqrt(),
            d,
            residual,
        })
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// k-th derivative of the polynomial with rational coefficients `w`, at t.
fn horner(w: &[Rat], t: f64, k: usize) -> f64 {
    let mut acc = 0.0;
    for (l, wl) in w.iter().enumerate().rev() {
        if l < k {
            break;
        }
        let mut fall = 1.0;
        for i in 0..k {
            fall *= (l - i) as f64;
        }
        acc = acc * t + fall * crate::coeff::rat_to_f64(wl);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn builtin_weights() {
        let b = DegreeWeightSequence::builtin("binary").unwrap();
        assert_eq!(
            (0..4).map(|l| b.weight(l)).collect::<Vec<_>>(),
            vec![rat_i(1), rat_i(2), rat_i(1), rat_i(0)]
        );
        let u = DegreeWeightSequence::builtin("unordered").unwrap();
        assert_eq!(u.weight(4), rat(1, 24));
        let c = DegreeWeightSequence::builtin("cyclic").unwrap();
        assert_eq!(c.weight(0), rat_i(1));
        assert_eq!(c.weight(5), rat(1, 5));
        assert!(DegreeWeightSequence::builtin("nope").is_err());
    }

    #[test]
    fn binary_constants_exact() {
        let c = DegreeWeightSequence::builtin("binary")
            .unwrap()
            .solve_constants()
            .unwrap();
        assert!(close(c.tau, 1.0, 1e-12));
        assert!(close(c.rho, 0.25, 1e-12));
        assert!(close(c.c_phi, 0.5, 1e-12));
        assert!(close(c.sigma, std::f64::consts::SQRT_2, 1e-12));
        assert_eq!(c.d, 1);
    }

    #[test]
    fn ordered_constants_exact() {
        let c = DegreeWeightSequence::builtin("ordered")
            .unwrap()
            .solve_constants()
            .unwrap();
        assert!(close(c.tau, 0.5, 1e-12));
        assert!(close(c.rho, 0.25, 1e-12));
        assert!(close(c.c_phi, 0.25, 1e-12));
        assert!(close(c.sigma, std::f64::consts::FRAC_1_SQRT_2, 1e-12));
    }

    #[test]
    fn unordered_constants_exact() {
        let c = DegreeWeightSequence::builtin("unordered")
            .unwrap()
            .solve_constants()
            .unwrap();
        assert!(close(c.tau, 1.0, 1e-12));
        assert!(close(c.rho, 1.0 / std::f64::consts::E, 1e-12));
        assert!(close(c.c_phi, 1.0 / 8f64.sqrt(), 1e-12));
        assert!(close(c.sigma, 1.0, 1e-12));
    }

    #[test]
    fn cyclic_constants() {
        let c = DegreeWeightSequence::builtin("cyclic")
            .unwrap()
            .solve_constants()
            .unwrap();
        // τ solves t/(1−t) = 1 − ln(1−t); at the root ρ = 1 − τ.
        assert!(close(c.tau, 0.682155, 2e-6));
        assert!(close(c.rho, 1.0 - c.tau, 1e-12));
        // σ = 1/√(ρτφ″) = √((1−τ)/τ); the defining identity is re-checked
        // generically in sigma_identity below.
        assert!(close(c.sigma, ((1.0 - c.tau) / c.tau).sqrt(), 1e-10));
        assert!(close(c.c_phi, c.sigma / 8f64.sqrt(), 1e-14));
    }

    #[test]
    fn sigma_identity() {
        // σ²·ρτφ″(τ) = 1 and σ = 2√2·c for every builtin
        for name in BUILTIN_NAMES {
            let f = DegreeWeightSequence::builtin(name).unwrap();
            let c = f.solve_constants().unwrap();
            let curv = c.rho * c.tau * f.d2phi(c.tau);
            assert!(
                (c.sigma * c.sigma * curv - 1.0).abs() <= 1e-10,
                "{name}: σ²ρτφ″ = {}",
                c.sigma * c.sigma * curv
            );
            assert!(close(c.sigma, 2.0 * std::f64::consts::SQRT_2 * c.c_phi, 1e-13), "{name}");
            assert!(c.residual <= 1e-12 * f.phi(c.tau).max(1.0), "{name}");
            assert_eq!(c.d, 1, "{name}");
        }
    }

    #[test]
    fn even_support_family() {
        // φ = 1 + t²: only even degrees, d = 2, τ = 1, ρ = 1/2, σ = 1
        let f = DegreeWeightSequence::custom("even", vec![rat_i(1), rat_i(0), rat_i(1)], None)
            .unwrap();
        assert_eq!(f.support_gcd(), 2);
        let c = f.solve_constants().unwrap();
        assert_eq!(c.d, 2);
        assert!(close(c.tau, 1.0, 1e-10));
        assert!(close(c.rho, 0.5, 1e-10));
        assert!(close(c.sigma, 1.0, 1e-10));
    }

    #[test]
    fn inadmissible_families() {
        // no branching: φ = 1 + t
        let f = DegreeWeightSequence::custom("path", vec![rat_i(1), rat_i(1)], None).unwrap();
        match f.solve_constants() {
            Err(Error::NotAdmissible { .. }) => {}
            other => panic!("expected NotAdmissible, got {other:?}"),
        }
        // φ_0 = 0 rejected at construction
        assert!(DegreeWeightSequence::custom("leafless", vec![rat_i(0), rat_i(1)], None).is_err());
        // negative weight rejected
        assert!(
            DegreeWeightSequence::custom("neg", vec![rat_i(1), rat_i(-1), rat_i(1)], None)
                .is_err()
        );
    }

    #[test]
    fn custom_family_json() {
        let f = DegreeWeightSequence::from_json_str(
            r#"{"name":"motzkinish","weights":["1","1","1/2"],"radius_hint":null}"#,
        )
        .unwrap();
        assert_eq!(f.name(), "motzkinish");
        assert_eq!(f.weight(2), rat(1, 2));
        assert_eq!(f.weight(7), rat_i(0));
        let c = f.solve_constants().unwrap();
        // t(1 + t) = 1 + t + t²/2 → t²/2 = 1 → τ = √2
        assert!(close(c.tau, std::f64::consts::SQRT_2, 1e-10));
        assert!(DegreeWeightSequence::from_json_str(r#"{"weights":["1"]}"#).is_err());
        assert!(DegreeWeightSequence::from_json_str(r#"{"name":"x","weights":["0.5"]}"#).is_err());
    }

    #[test]
    fn support_period_override() {
        let f = DegreeWeightSequence::custom("even", vec![rat_i(1), rat_i(0), rat_i(1)], None)
            .unwrap()
            .with_support_period(2);
        assert_eq!(f.support_gcd(), 2);
    }

    #[test]
    fn closed_form_phi_matches_weights() {
        // the closed-form φ evaluators agree with direct weight sums inside
        // the radius
        for name in BUILTIN_NAMES {
            let f = DegreeWeightSequence::builtin(name).unwrap();
            let t = 0.3f64;
            let mut s0 = 0.0;
            let mut s1 = 0.0;
            let mut s2 = 0.0;
            for l in 0..200usize {
                let w = f.weight(l).to_f64();
                s0 += w * t.powi(l as i32);
                if l >= 1 {
                    s1 += w * l as f64 * t.powi(l as i32 - 1);
                }
                if l >= 2 {
                    s2 += w * (l * (l - 1)) as f64 * t.powi(l as i32 - 2);
                }
            }
            assert!(close(f.phi(t), s0, 1e-10), "{name} phi");
            assert!(close(f.dphi(t), s1, 1e-10), "{name} dphi");
            assert!(close(f.d2phi(t), s2, 1e-10), "{name} d2phi");
        }
    }
}
