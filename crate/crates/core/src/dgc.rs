//! Distributed growth witnesses: per-letter pairs of survivor sets `(X_k, Y_k)`
//! with positive mass (DG0), a coincidence at every offset (DG1) and at least
//! two coincidences at offsets `k` and `k+1` (DG2).

use std::sync::atomic::{AtomicU64, Ordering};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::distribution::{JointSurvivalDistribution, SurvivalLaw};
use crate::error::{Error, Result};
use crate::letters::{gamma_profile, Alphabet, LetterSet};
use crate::limits::Limits;
use crate::par::{self, Execution};
use crate::rational::{format_rational, ln, one, Rational};
use crate::spectra::gamma_cyclic;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DgcWitness {
    pub k: usize,
    #[serde(rename = "X")]
    pub x: LetterSet,
    #[serde(rename = "Y")]
    pub y: LetterSet,
}

/// Coincidence part of a witness check (DG1 and DG2).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCheck {
    pub dg1: bool,
    /// First offset with no coincidence.
    pub dg1_violation: Option<usize>,
    pub dg2: bool,
    /// `k` or `k+1`, whichever has fewer than two coincidences.
    pub dg2_violation: Option<usize>,
    pub gamma: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessCheck {
    pub dg0: bool,
    #[serde(flatten)]
    pub pair: PairCheck,
}

impl WitnessCheck {
    pub fn passes(&self) -> bool {
        self.dg0 && self.pair.dg1 && self.pair.dg2
    }
}

fn ensure_size(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::AlphabetMismatch {
            left: expected,
            right: got,
        });
    }
    Ok(())
}

fn pair_from_profile(gamma: Vec<u32>, k: usize) -> PairCheck {
    let m = gamma.len();
    let dg1_violation = gamma.iter().position(|&g| g == 0);
    let dg2_violation = [k, (k + 1) % m].into_iter().find(|&e| gamma[e] < 2);
    PairCheck {
        dg1: dg1_violation.is_none(),
        dg1_violation,
        dg2: dg2_violation.is_none(),
        dg2_violation,
        gamma,
    }
}

/// DG1 and DG2 for the pair `(X, Y)` at letter `k`.
pub fn check_pair(k: usize, x: &LetterSet, y: &LetterSet) -> Result<PairCheck> {
    ensure_size(x.alphabet_size(), y.alphabet_size())?;
    if k >= x.alphabet_size() {
        return Err(Error::IndexOutOfRange {
            index: k,
            alphabet_size: x.alphabet_size(),
        });
    }
    Ok(pair_from_profile(gamma_profile(x, y)?, k))
}

/// All three clauses; DG0 asks for `μ(X) > 0` and `λ(Y) > 0`.
pub fn verify_witness<A, B>(
    mu: &A,
    lambda: &B,
    k: usize,
    x: &LetterSet,
    y: &LetterSet,
) -> Result<WitnessCheck>
where
    A: SurvivalLaw + ?Sized,
    B: SurvivalLaw + ?Sized,
{
    ensure_size(mu.alphabet_size(), lambda.alphabet_size())?;
    ensure_size(mu.alphabet_size(), x.alphabet_size())?;
    ensure_size(mu.alphabet_size(), y.alphabet_size())?;
    let pair = check_pair(k, x, y)?;
    let dg0 = mu.has_positive_mass(x) && lambda.has_positive_mass(y);
    Ok(WitnessCheck { dg0, pair })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LetterOutcome {
    Witness {
        #[serde(flatten)]
        witness: DgcWitness,
    },
    Failure {
        k: usize,
        reason: String,
        /// Largest `min_e γ_e` seen over the candidates.
        best_dg1: u32,
        /// Largest `min(γ_k, γ_{k+1})` seen over the candidates.
        best_dg2: u32,
    },
}

impl LetterOutcome {
    pub fn witness(&self) -> Option<&DgcWitness> {
        match self {
            LetterOutcome::Witness { witness } => Some(witness),
            LetterOutcome::Failure { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DgcReport {
    pub alphabet_size: usize,
    pub method: String,
    pub letters: Vec<LetterOutcome>,
    pub overall: bool,
}

impl DgcReport {
    fn new(alphabet_size: usize, method: &str, letters: Vec<LetterOutcome>) -> Self {
        let overall = letters.iter().all(|l| l.witness().is_some());
        DgcReport {
            alphabet_size,
            method: method.to_string(),
            letters,
            overall,
        }
    }

    fn failed(alphabet_size: usize, method: &str, reason: &str) -> Self {
        let letters = (0..alphabet_size)
            .map(|k| LetterOutcome::Failure {
                k,
                reason: reason.to_string(),
                best_dg1: 0,
                best_dg2: 0,
            })
            .collect();
        DgcReport::new(alphabet_size, method, letters)
    }

    pub fn witnesses(&self) -> Vec<&DgcWitness> {
        self.letters
            .iter()
            .filter_map(LetterOutcome::witness)
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Witness pairs `X ⊆ A^(2)` and `Y_{0k_2}`, with `Y_{k_1 k_2} = σ^{k_1 M}(Y_{0k_2})`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecondOrderFamily {
    pub m: usize,
    pub alphabet_size: usize,
    pub x: LetterSet,
    pub y_first_row: Vec<LetterSet>,
}

impl SecondOrderFamily {
    /// Witness at the order-2 letter `k = k_1 M + k_2`.
    pub fn witness(&self, k: usize) -> DgcWitness {
        let m = self.alphabet_size;
        let (k1, k2) = (k / m, k % m);
        DgcWitness {
            k,
            x: self.x.clone(),
            y: self.y_first_row[k2].rotate(k1 * m),
        }
    }

    pub fn witnesses(&self) -> Vec<DgcWitness> {
        (0..self.alphabet_size * self.alphabet_size)
            .map(|k| self.witness(k))
            .collect()
    }
}

/// Intermediate strings of the single-level construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StringConstruction {
    pub x: LetterSet,
    pub y_prime: LetterSet,
    /// After the second position is set (only when ones are added).
    pub y_second: Option<LetterSet>,
    pub y: LetterSet,
    pub adds_ones: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    /// Maximum number of `(X, Y, e)` coincidence evaluations.
    pub budget: u64,
    pub exec: Execution,
    pub limits: Limits,
}

impl Default for SearchOptions {
    fn default() -> Self {
        let limits = Limits::default();
        SearchOptions {
            budget: limits.search_budget,
            exec: Execution::default(),
            limits,
        }
    }
}

impl From<Limits> for SearchOptions {
    fn from(limits: Limits) -> Self {
        SearchOptions {
            budget: limits.search_budget,
            exec: Execution::default(),
            limits,
        }
    }
}

// candidates per parallel batch; batches are merged in order so the first
// witness in support order wins regardless of scheduling
const SEARCH_BATCH: usize = 64;

#[derive(Clone)]
struct CandidateResult {
    /// Index of the first `Y` resolving each target letter.
    first: Vec<Option<usize>>,
    best_dg1: u32,
    best_dg2: Vec<u32>,
}

/// Exhaustive search over `support(μ) × support(λ)`, returning the first pair
/// (in support order) for every letter. When the support of `λ` is closed
/// under cyclic shifts only `k = 0` is searched and `Y_k = σ^k(Y_0)`.
pub fn search_witnesses(
    mu: &JointSurvivalDistribution,
    lambda: &JointSurvivalDistribution,
    opts: &SearchOptions,
) -> Result<DgcReport> {
    let m = mu.alphabet_size();
    ensure_size(m, lambda.alphabet_size())?;
    let xs: Vec<LetterSet> = mu
        .support(&opts.limits)?
        .into_iter()
        .filter(|s| !s.is_empty())
        .collect();
    let ys: Vec<LetterSet> = lambda
        .support(&opts.limits)?
        .into_iter()
        .filter(|s| !s.is_empty())
        .collect();
    if xs.is_empty() || ys.is_empty() {
        return Ok(DgcReport::failed(
            m,
            "search",
            "no nonempty set has positive mass",
        ));
    }
    let shift_closed = lambda.support_is_shift_closed(&opts.limits)?;
    let targets: Vec<usize> = if shift_closed {
        vec![0]
    } else {
        (0..m).collect()
    };
    let method = if shift_closed {
        "search-shift"
    } else {
        "search"
    };

    let spent = AtomicU64::new(0);
    let per_pair = m as u64;
    let mut found: Vec<Option<(usize, usize)>> = vec![None; targets.len()];
    let mut best_dg1 = 0u32;
    let mut best_dg2 = vec![0u32; targets.len()];
    let mut exhausted = false;

    'outer: for (batch_no, batch) in xs.chunks(SEARCH_BATCH).enumerate() {
        let pending: Vec<usize> = (0..targets.len()).filter(|&t| found[t].is_none()).collect();
        let results = par::map_slice(opts.exec, batch, |x| -> Option<CandidateResult> {
            let mut r = CandidateResult {
                first: vec![None; targets.len()],
                best_dg1: 0,
                best_dg2: vec![0; targets.len()],
            };
            for (yi, y) in ys.iter().enumerate() {
                if spent.fetch_add(per_pair, Ordering::Relaxed) + per_pair > opts.budget {
                    return None;
                }
                let gamma = gamma_profile(x, y).expect("sizes agree");
                let dg1 = gamma.iter().copied().min().unwrap_or(0);
                r.best_dg1 = r.best_dg1.max(dg1);
                for &t in &pending {
                    let k = targets[t];
                    let dg2 = gamma[k].min(gamma[(k + 1) % m]);
                    r.best_dg2[t] = r.best_dg2[t].max(dg2);
                    if dg1 >= 1 && dg2 >= 2 && r.first[t].is_none() {
                        r.first[t] = Some(yi);
                    }
                }
                if pending.iter().all(|&t| r.first[t].is_some()) {
                    break;
                }
            }
            Some(r)
        });
        for (offset, r) in results.into_iter().enumerate() {
            let Some(r) = r else {
                exhausted = true;
                break 'outer;
            };
            best_dg1 = best_dg1.max(r.best_dg1);
            for &t in &pending {
                best_dg2[t] = best_dg2[t].max(r.best_dg2[t]);
                if found[t].is_none() {
                    if let Some(yi) = r.first[t] {
                        found[t] = Some((batch_no * SEARCH_BATCH + offset, yi));
                    }
                }
            }
        }
        if found.iter().all(Option::is_some) {
            break;
        }
    }

    let letters: Vec<LetterOutcome> = (0..m)
        .map(|k| {
            let (t, rot) = if shift_closed { (0, k) } else { (k, 0) };
            match found[t] {
                Some((xi, yi)) => LetterOutcome::Witness {
                    witness: DgcWitness {
                        k,
                        x: xs[xi].clone(),
                        y: ys[yi].rotate(rot),
                    },
                },
                None => LetterOutcome::Failure {
                    k,
                    reason: if exhausted {
                        "search budget exhausted".into()
                    } else {
                        "no pair in the supports satisfies DG1 and DG2".into()
                    },
                    best_dg1,
                    best_dg2: best_dg2[t],
                },
            }
        })
        .collect();
    let report = DgcReport::new(m, method, letters);
    if exhausted {
        let solved: Vec<String> = report.witnesses().iter().map(|w| w.k.to_string()).collect();
        return Err(Error::ResourceLimitExceeded(format!(
            "witness search exceeded {} evaluations; resolved letters: [{}]",
            opts.budget,
            solved.join(",")
        )));
    }
    for w in report.witnesses() {
        let check = verify_witness(mu, lambda, w.k, &w.x, &w.y)?;
        if !check.passes() {
            return Err(Error::InvariantViolation(format!(
                "search returned an invalid witness at k={}",
                w.k
            )));
        }
    }
    Ok(report)
}

/// Single-level witness strings for the `m`-subset family, available when
/// `m² ≥ M + 2`.
pub fn single_level_steps(m: usize, alphabet_size: usize) -> Result<StringConstruction> {
    let big = alphabet_size;
    Alphabet::new(big)?;
    if m > big || m * m < big + 2 {
        return Err(Error::HypothesisNotMet(format!(
            "need m ≤ M and m² ≥ M + 2, got m={m}, M={big}"
        )));
    }
    let x = LetterSet::from_members(big, 0..m)?;
    let q = big / m;
    let r = big - q * m;
    // R: the leading r symbols of 1 0^(m-2), then q copies of 1 0^(m-1)
    let mut ones: Vec<usize> = Vec::new();
    if r > 0 {
        ones.push(0);
    }
    ones.extend((0..q).map(|j| r + j * m));
    let y_prime = LetterSet::from_members(big, ones)?;
    let adds_ones = q + 1 < m || r == 0;
    let (y_second, y) = if adds_ones {
        let mut second = y_prime.clone();
        second.insert(1);
        let mut y = second.clone();
        for i in 0..big {
            if y.len() >= m {
                break;
            }
            y.insert(i);
        }
        (Some(second), y)
    } else {
        (None, y_prime.clone())
    };
    let check = check_pair(0, &x, &y)?;
    if y.len() != m || !check.dg1 || !check.dg2 {
        return Err(Error::InvariantViolation(format!(
            "string construction failed for m={m}, M={big}"
        )));
    }
    Ok(StringConstruction {
        x,
        y_prime,
        y_second,
        y,
        adds_ones,
    })
}

pub fn build_single_level_strings(
    m: usize,
    alphabet_size: usize,
) -> Result<(LetterSet, LetterSet)> {
    let c = single_level_steps(m, alphabet_size)?;
    Ok((c.x, c.y))
}

/// Second-order witnesses for the `m`-subset family with `M = m² - 1`.
pub fn build_second_order_family(m: usize, alphabet_size: usize) -> Result<SecondOrderFamily> {
    let big = alphabet_size;
    Alphabet::new(big)?;
    if m < 2 || m * m != big + 1 {
        return Err(Error::HypothesisNotMet(format!(
            "need M = m² - 1, got m={m}, M={big}"
        )));
    }
    let width = big * big;
    let x = LetterSet::from_members(big, 0..m)?;
    // Y = [1 0^(m-2)][1 0^(m-1)]^(m-1)
    let y_ones: Vec<usize> = std::iter::once(0)
        .chain((0..m - 1).map(|j| m - 1 + j * m))
        .collect();
    let y = LetterSet::from_members(big, y_ones.iter().copied())?;

    let blocks = |top: &LetterSet, inner: &LetterSet| -> Result<LetterSet> {
        let mut out = LetterSet::empty(width);
        for i in top.iter() {
            for j in inner.iter() {
                out.insert(i * big + j);
            }
        }
        Ok(out)
    };
    let x2 = blocks(&x, &y)?;
    let y_first_row = (0..big)
        .map(|k2| {
            let s = usize::from(k2 + 1 >= m);
            Ok(blocks(&y, &x.rotate(k2))?.rotate(big * s))
        })
        .collect::<Result<Vec<_>>>()?;
    let family = SecondOrderFamily {
        m,
        alphabet_size: big,
        x: x2,
        y_first_row,
    };
    for k2 in 0..big {
        let w = family.witness(k2);
        let check = check_pair(k2, &w.x, &w.y)?;
        if !check.dg1 || !check.dg2 {
            return Err(Error::InvariantViolation(format!(
                "second-order pair at 0{k2} fails: DG1 violation {:?}, DG2 violation {:?}",
                check.dg1_violation, check.dg2_violation
            )));
        }
    }
    Ok(family)
}

/// `{l_1 .. l_n : every l_j ∈ X}` (and likewise for `Y`) on the order-`n` alphabet.
pub fn propagate_witness(
    x: &LetterSet,
    y: &LetterSet,
    n: u32,
    limits: &Limits,
) -> Result<(LetterSet, LetterSet)> {
    ensure_size(x.alphabet_size(), y.alphabet_size())?;
    if n == 0 {
        return Err(Error::ParameterOutOfRange(
            "propagation order must be at least 1".into(),
        ));
    }
    let m = x.alphabet_size();
    let width = Alphabet::new(m)?
        .order_size(n)
        .filter(|w| *w <= limits.max_level_width)
        .ok_or_else(|| Error::ResourceLimitExceeded(format!("alphabet {m}^{n} is too large")))?
        as usize;
    let power = |s: &LetterSet| {
        let letters = s.members();
        let mut words = letters.clone();
        for _ in 1..n {
            words = words
                .iter()
                .flat_map(|w| letters.iter().map(move |l| w * m + l))
                .collect();
        }
        LetterSet::from_members(width, words)
    };
    Ok((power(x)?, power(y)?))
}

/// Witnesses `X_k = Supp_m(μ)`, `Y_k = Supp_m(λ)` for every letter, valid when
/// all correlation coefficients exceed one and both laws satisfy the JSC.
pub fn jsc_witness(
    mu: &JointSurvivalDistribution,
    lambda: &JointSurvivalDistribution,
) -> Result<DgcReport> {
    let m = mu.alphabet_size();
    ensure_size(m, lambda.alphabet_size())?;
    let gamma = gamma_cyclic(mu, lambda)?;
    if let Some(k) = gamma.values.iter().position(|g| g <= &one()) {
        return Err(Error::HypothesisNotMet(format!(
            "γ_{k} = {} is not above 1",
            format_rational(&gamma.values[k])
        )));
    }
    let (a, b) = (mu.jsc_check(), lambda.jsc_check());
    if !a.satisfied || !b.satisfied {
        return Ok(DgcReport::failed(
            m,
            "jsc",
            "joint survival condition fails",
        ));
    }
    let (x, y) = (a.marginal_support, b.marginal_support);
    let gamma = gamma_profile(&x, &y)?;
    if let Some(e) = gamma.iter().position(|&g| g < 2) {
        let best = gamma.iter().copied().min().unwrap_or(0);
        return Ok(DgcReport::failed(
            m,
            "jsc",
            &format!("marginal supports have only {best} coincidence(s) at offset {e}"),
        ));
    }
    let letters = (0..m)
        .map(|k| LetterOutcome::Witness {
            witness: DgcWitness {
                k,
                x: x.clone(),
                y: y.clone(),
            },
        })
        .collect();
    Ok(DgcReport::new(m, "jsc", letters))
}

/// Witnesses via the JSC when it applies, otherwise by search.
pub fn establish_dgc(
    mu: &JointSurvivalDistribution,
    lambda: &JointSurvivalDistribution,
    opts: &SearchOptions,
) -> Result<DgcReport> {
    match jsc_witness(mu, lambda) {
        Ok(r) if r.overall => Ok(r),
        Ok(_) | Err(Error::HypothesisNotMet(_)) => search_witnesses(mu, lambda, opts),
        Err(e) => Err(e),
    }
}

/// Lower bound on the probability that a level-`n` block grows along the
/// witnesses, as an exact rational when its size is manageable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthBound {
    #[serde(with = "crate::rational::serde_option_rational")]
    pub exact: Option<Rational>,
    pub ln_value: f64,
}

// total exponent above which the exact product is skipped
const EXACT_EXPONENT_LIMIT: u64 = 1 << 14;

pub fn growth_probability_bound<A, B>(
    report: &DgcReport,
    mu: &A,
    lambda: &B,
    n: u32,
) -> Result<GrowthBound>
where
    A: SurvivalLaw + ?Sized,
    B: SurvivalLaw + ?Sized,
{
    if !report.overall {
        return Err(Error::HypothesisNotMet(
            "growth bound needs a witness for every letter".into(),
        ));
    }
    ensure_size(mu.alphabet_size(), report.alphabet_size)?;
    ensure_size(lambda.alphabet_size(), report.alphabet_size)?;
    // Σ_{j=1..n} s^{j-1}, saturating
    let geometric = |s: usize| -> u64 {
        let mut total = 0u64;
        let mut term = 1u64;
        for _ in 0..n {
            total = total.saturating_add(term);
            term = term.saturating_mul(s as u64);
        }
        total
    };
    let mut factors: Vec<(Rational, u64)> = Vec::new();
    for w in report.witnesses() {
        factors.push((mu.mass(&w.x), geometric(w.x.len())));
        factors.push((lambda.mass(&w.y), geometric(w.y.len())));
    }
    let ln_value: f64 = factors
        .iter()
        .map(|(base, e)| {
            if *e == 0 || base.is_one() {
                0.0
            } else {
                *e as f64 * ln(base)
            }
        })
        .sum();
    let total: u64 = factors
        .iter()
        .filter(|(b, _)| !b.is_one())
        .map(|(_, e)| *e)
        .fold(0, u64::saturating_add);
    let exact = (total <= EXACT_EXPONENT_LIMIT).then(|| {
        factors.iter().fold(one(), |acc, (base, e)| {
            if base.is_zero() && *e > 0 {
                Rational::zero()
            } else {
                acc * num_traits::pow(base.clone(), *e as usize)
            }
        })
    });
    Ok(GrowthBound { exact, ln_value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn bits(s: &str) -> LetterSet {
        LetterSet::from_bit_string(s).unwrap()
    }

    #[test]
    fn coincidence_example() {
        let c = check_pair(0, &bits("11100000"), &bits("10100100")).unwrap();
        assert!(c.dg1);
        assert!(!c.dg2);
        assert_eq!(c.dg2_violation, Some(1));
        assert_eq!(c.gamma[1], 1);
    }

    #[test]
    fn empty_set_fails_everywhere() {
        let c = check_pair(0, &LetterSet::empty(5), &LetterSet::full(5)).unwrap();
        assert!(c.gamma.iter().all(|&g| g == 0));
        assert_eq!(c.dg1_violation, Some(0));
    }

    #[test]
    fn string_steps() {
        let c = single_level_steps(4, 7).unwrap();
        assert_eq!(c.x, bits("1111000"));
        assert_eq!(c.y_prime, bits("1001000"));
        assert_eq!(c.y_second, Some(bits("1101000")));
        assert_eq!(c.y, bits("1111000"));
        let c = single_level_steps(4, 9).unwrap();
        assert_eq!(c.y_prime, bits("110001000"));
        assert_eq!(c.y, bits("111001000"));
        assert!(matches!(
            single_level_steps(3, 8),
            Err(Error::HypothesisNotMet(_))
        ));
    }

    #[test]
    fn second_order_example_blocks() {
        let f = build_second_order_family(3, 8).unwrap();
        let y = "10100100";
        let o = "00000000";
        assert_eq!(f.x.to_bit_string(), [y, y, y, o, o, o, o, o].concat());
        let x = "11100000";
        assert_eq!(
            f.y_first_row[0].to_bit_string(),
            [x, o, x, o, o, x, o, o].concat()
        );
    }

    #[test]
    fn growth_bound_small() {
        let d =
            JointSurvivalDistribution::from_member_lists(2, &[(vec![0, 1], rat(1, 2))]).unwrap();
        let full = LetterSet::full(2);
        let letters = (0..2)
            .map(|k| LetterOutcome::Witness {
                witness: DgcWitness {
                    k,
                    x: full.clone(),
                    y: full.clone(),
                },
            })
            .collect();
        let report = DgcReport::new(2, "manual", letters);
        let b = growth_probability_bound(&report, &d, &d, 2).unwrap();
        assert_eq!(b.exact, Some(rat(1, 4096)));
        assert_eq!(
            growth_probability_bound(&report, &d, &d, 0).unwrap().exact,
            Some(one())
        );
    }
}
