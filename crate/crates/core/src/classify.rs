//! Verdicts on whether the difference set contains an interval.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dgc::{establish_dgc, DgcReport, SearchOptions};
use crate::distribution::JointSurvivalDistribution;
use crate::error::{Error, Result};
use crate::rational::{format_rational, int, ln, one, Rational};
use crate::spectra::{
    consecutive_below_one, gamma_cyclic, lower_spectral_radius, SpectralEstimate, SpectralOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    IntervalAlmostSurely,
    NoIntervalAlmostSurely,
    Indeterminate,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::IntervalAlmostSurely => "IntervalAlmostSurely",
            Outcome::NoIntervalAlmostSurely => "NoIntervalAlmostSurely",
            Outcome::Indeterminate => "Indeterminate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Evidence {
    pub gammas: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<DgcReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral: Option<Vec<SpectralEstimate>>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub rule: String,
    pub evidence: Evidence,
    pub qualifiers: Vec<String>,
}

/// Qualifier attached to every positive verdict.
pub const NONEMPTY_QUALIFIER: &str = "on {F1 - F2 nonempty}";
/// Tag on positive verdicts from the spectral criterion.
pub const SPECTRAL_TAG: &str = "spectral-corrected";

impl Verdict {
    fn new(outcome: Outcome, rule: &str, evidence: Evidence) -> Self {
        let qualifiers = if outcome == Outcome::IntervalAlmostSurely {
            vec![NONEMPTY_QUALIFIER.to_string()]
        } else {
            Vec::new()
        };
        Verdict {
            outcome,
            rule: rule.to_string(),
            evidence,
            qualifiers,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdict serializes")
    }
}

fn gamma_strings(values: &[Rational]) -> Vec<String> {
    values.iter().map(format_rational).collect()
}

/// Complete classification of the `m`-subset family: an interval exactly
/// when `γ = M p² > 1`.
pub fn classify_correlated(m: usize, alphabet_size: usize, p: &Rational) -> Result<Verdict> {
    JointSurvivalDistribution::make_correlated(m, alphabet_size, p.clone())?;
    let big = alphabet_size;
    let gamma = int(big as i64) * p * p;
    let evidence = Evidence {
        gammas: vec![format_rational(&gamma); big],
        ..Evidence::default()
    };
    let mut v = if gamma > one() {
        // γ > 1 with p ≤ m/M forces m² > M
        let mut v = Verdict::new(
            Outcome::IntervalAlmostSurely,
            "correlated-supercritical",
            evidence,
        );
        let route = if m * m >= big + 2 {
            "single-level witness strings"
        } else {
            "second-order witness strings"
        };
        v.evidence.notes.push(format!("growth witnesses: {route}"));
        v
    } else if gamma < one() {
        Verdict::new(
            Outcome::NoIntervalAlmostSurely,
            "correlated-subcritical",
            evidence,
        )
    } else {
        Verdict::new(
            Outcome::NoIntervalAlmostSurely,
            "correlated-critical",
            evidence,
        )
    };
    v.evidence
        .notes
        .push(format!("gamma = M p^2 = {}", format_rational(&gamma)));
    Ok(v)
}

/// Rules in order: two consecutive coefficients below one; the critical
/// central-square argument; distributed growth; otherwise undecided.
pub fn classify_general(
    mu: &JointSurvivalDistribution,
    lambda: &JointSurvivalDistribution,
    opts: &SearchOptions,
) -> Result<Verdict> {
    if mu.alphabet_size() != lambda.alphabet_size() {
        return Err(Error::AlphabetMismatch {
            left: mu.alphabet_size(),
            right: lambda.alphabet_size(),
        });
    }
    let gamma = gamma_cyclic(mu, lambda)?;
    let mut evidence = Evidence {
        gammas: gamma_strings(&gamma.values),
        ..Evidence::default()
    };
    let m = gamma.len();

    if let Some(k) = consecutive_below_one(&gamma) {
        evidence
            .notes
            .push(format!("gamma_{k} < 1 and gamma_{} < 1", (k + 1) % m));
        return Ok(Verdict::new(
            Outcome::NoIntervalAlmostSurely,
            "consecutive-subcritical",
            evidence,
        ));
    }

    let (p, q) = (mu.marginals(), lambda.marginals());
    let sure_pair = (0..m).find(|&i| (p.get(i) * q.get(i)) == one());
    if gamma.values[0] <= one() && sure_pair.is_none() {
        evidence
            .notes
            .push("gamma_0 <= 1 and no letter survives surely in both sets".into());
        return Ok(Verdict::new(
            Outcome::NoIntervalAlmostSurely,
            "critical-central",
            evidence,
        ));
    }

    if gamma.values.iter().all(|g| g > &one()) {
        match establish_dgc(mu, lambda, opts) {
            Ok(report) if report.overall => {
                evidence.witnesses = Some(report);
                return Ok(Verdict::new(
                    Outcome::IntervalAlmostSurely,
                    "distributed-growth",
                    evidence,
                ));
            }
            Ok(report) => match second_order_dgc(mu, lambda, opts)? {
                Some(second) => {
                    evidence
                        .notes
                        .push("growth witnesses found for the order-2 law".into());
                    evidence.witnesses = Some(second);
                    return Ok(Verdict::new(
                        Outcome::IntervalAlmostSurely,
                        "distributed-growth",
                        evidence,
                    ));
                }
                None => {
                    evidence.notes.push("no growth witness family found".into());
                    evidence.witnesses = Some(report);
                }
            },
            Err(Error::ResourceLimitExceeded(msg)) => evidence
                .notes
                .push(format!("witness search stopped: {msg}")),
            Err(e) => return Err(e),
        }
    } else {
        evidence
            .notes
            .push("some gamma_k <= 1 without two consecutive below one".into());
    }
    if let Some(i) = sure_pair {
        evidence
            .notes
            .push(format!("letter {i} survives surely in both sets"));
    }
    Ok(Verdict::new(Outcome::Indeterminate, "undecided", evidence))
}

// largest squared alphabet tried by the order-2 fallback
const SECOND_ORDER_MAX_ALPHABET: usize = 64;

/// The two-level sets form the same random set over `M^2` letters, so a
/// witness family for them is just as good.
fn second_order_dgc(
    mu: &JointSurvivalDistribution,
    lambda: &JointSurvivalDistribution,
    opts: &SearchOptions,
) -> Result<Option<DgcReport>> {
    let m = mu.alphabet_size();
    if m * m > SECOND_ORDER_MAX_ALPHABET {
        return Ok(None);
    }
    let (a, b) = match (
        mu.expand_order(2, &opts.limits),
        lambda.expand_order(2, &opts.limits),
    ) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(Error::ResourceLimitExceeded(_)), _) | (_, Err(Error::ResourceLimitExceeded(_))) => {
            return Ok(None)
        }
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };
    match establish_dgc(&a, &b, opts) {
        Ok(r) if r.overall => Ok(Some(r)),
        Ok(_) | Err(Error::ResourceLimitExceeded(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SpectralPolicy {
    pub margin: f64,
    /// Number of final estimates that must sit on the same side of one.
    pub window: usize,
    pub spectral: SpectralOptions,
    pub search: SearchOptions,
}

impl Default for SpectralPolicy {
    fn default() -> Self {
        SpectralPolicy {
            margin: 0.05,
            window: 3,
            spectral: SpectralOptions::default(),
            search: SearchOptions::default(),
        }
    }
}

/// Symmetric case `μ = λ` with verified growth witnesses: decide from the
/// lower spectral radius estimates up to `n_max`.
pub fn classify_spectral(
    mu: &JointSurvivalDistribution,
    lambda: &JointSurvivalDistribution,
    n_max: usize,
    policy: &SpectralPolicy,
) -> Result<Verdict> {
    if !mu.same_law(lambda, &policy.search.limits)? {
        return Err(Error::HypothesisNotMet(
            "spectral criterion needs identical laws".into(),
        ));
    }
    let report = establish_dgc(mu, lambda, &policy.search)?;
    if !report.overall {
        return Err(Error::HypothesisNotMet(
            "distributed growth condition fails".into(),
        ));
    }
    let gamma = gamma_cyclic(mu, lambda)?;
    let estimates = lower_spectral_radius(mu, lambda, n_max, &policy.spectral)?;
    let tail: Vec<f64> = estimates
        .iter()
        .rev()
        .take(policy.window)
        .map(|e| e.value)
        .collect();
    let enough = n_max >= policy.window.max(2);
    let mut evidence = Evidence {
        gammas: gamma_strings(&gamma.values),
        witnesses: Some(report),
        spectral: Some(estimates),
        notes: Vec::new(),
    };
    let last = tail[0];
    let verdict = if !enough {
        evidence.notes.push(format!(
            "{n_max} estimate(s) are too few to judge convergence"
        ));
        Verdict::new(Outcome::Indeterminate, "spectral-undecided", evidence)
    } else if tail.iter().all(|&v| v < 1.0 - policy.margin) {
        Verdict::new(
            Outcome::NoIntervalAlmostSurely,
            "spectral-subcritical",
            evidence,
        )
    } else if tail.iter().all(|&v| v > 1.0 + policy.margin) {
        let mut v = Verdict::new(
            Outcome::IntervalAlmostSurely,
            "spectral-supercritical",
            evidence,
        );
        v.qualifiers.push(SPECTRAL_TAG.to_string());
        v
    } else {
        evidence.notes.push(format!(
            "final estimate {last:.6} is within {} of 1 or unsettled",
            policy.margin
        ));
        Verdict::new(Outcome::Indeterminate, "spectral-undecided", evidence)
    };
    Ok(verdict)
}

/// Sum of the two (equal) dimensions `log(Mp) / log M` of the limit sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionSum {
    pub dimension: f64,
    pub sum: f64,
    /// Decided exactly as `(Mp)² > M`.
    pub exceeds_one: bool,
}

pub fn dimension_sum(m: usize, alphabet_size: usize, p: &Rational) -> Result<DimensionSum> {
    JointSurvivalDistribution::make_correlated(m, alphabet_size, p.clone())?;
    let big = int(alphabet_size as i64);
    let mean = &big * p;
    if mean <= one() {
        return Err(Error::ParameterOutOfRange(format!(
            "M p = {} must exceed 1 for a nondegenerate limit",
            format_rational(&mean)
        )));
    }
    let dimension = ln(&mean) / ln(&big);
    Ok(DimensionSum {
        dimension,
        sum: 2.0 * dimension,
        exceeds_one: &mean * &mean > big,
    })
}

pub fn dimension_sum_check(m: usize, alphabet_size: usize, p: &Rational) -> Result<bool> {
    Ok(dimension_sum(m, alphabet_size, p)?.exceeds_one)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::MarginalVector;
    use crate::rational::rat;
    use crate::LetterSet;

    #[test]
    fn correlated_examples() {
        let v = classify_correlated(7, 9, &rat(7, 9)).unwrap();
        assert_eq!(v.outcome, Outcome::IntervalAlmostSurely);
        assert_eq!(v.evidence.gammas[0], "49/9");
        assert_eq!(v.qualifiers, vec![NONEMPTY_QUALIFIER.to_string()]);
        assert_eq!(
            classify_correlated(2, 9, &rat(2, 9)).unwrap().outcome,
            Outcome::NoIntervalAlmostSurely
        );
        assert_eq!(
            classify_correlated(3, 9, &rat(1, 3)).unwrap().rule,
            "correlated-critical"
        );
        assert!(classify_correlated(2, 9, &rat(1, 3)).is_err());
    }

    #[test]
    fn general_rules() {
        let opts = SearchOptions::default();
        let d = JointSurvivalDistribution::make_independent(
            MarginalVector::uniform(3, rat(4, 5)).unwrap(),
        );
        let v = classify_general(&d, &d, &opts).unwrap();
        assert_eq!(
            (v.outcome, v.rule.as_str()),
            (Outcome::IntervalAlmostSurely, "distributed-growth")
        );

        let a = JointSurvivalDistribution::deterministic(LetterSet::from_members(2, [0]).unwrap())
            .unwrap();
        let b = JointSurvivalDistribution::deterministic(LetterSet::full(2)).unwrap();
        assert_eq!(
            classify_general(&a, &b, &opts).unwrap().outcome,
            Outcome::Indeterminate
        );

        let c = JointSurvivalDistribution::make_correlated(3, 9, rat(1, 3)).unwrap();
        assert_eq!(
            classify_general(&c, &c, &opts).unwrap().rule,
            "critical-central"
        );

        let s = JointSurvivalDistribution::make_correlated(2, 9, rat(2, 9)).unwrap();
        assert_eq!(
            classify_general(&s, &s, &opts).unwrap().rule,
            "consecutive-subcritical"
        );
    }

    #[test]
    fn spectral_needs_symmetry_and_growth() {
        let policy = SpectralPolicy::default();
        let a = JointSurvivalDistribution::make_correlated(7, 9, rat(7, 9)).unwrap();
        let b = JointSurvivalDistribution::make_correlated(6, 9, rat(6, 9)).unwrap();
        assert!(matches!(
            classify_spectral(&a, &b, 3, &policy),
            Err(Error::HypothesisNotMet(_))
        ));
        let c = JointSurvivalDistribution::make_correlated(3, 9, rat(1, 3)).unwrap();
        assert!(matches!(
            classify_spectral(&c, &c, 3, &policy),
            Err(Error::HypothesisNotMet(_))
        ));
        let v = classify_spectral(&a, &a, 1, &policy).unwrap();
        assert_eq!(v.outcome, Outcome::Indeterminate);
        let v = classify_spectral(&a, &a, 4, &policy).unwrap();
        assert_eq!(v.outcome, Outcome::IntervalAlmostSurely);
        assert!(v.qualifiers.contains(&SPECTRAL_TAG.to_string()));
    }

    #[test]
    fn dimension_sum_examples() {
        assert!(!dimension_sum_check(4, 4, &rat(1, 2)).unwrap());
        assert!(dimension_sum_check(7, 9, &rat(7, 9)).unwrap());
        assert!(dimension_sum(1, 9, &rat(1, 9)).is_err());
    }
}
