use cantordiff::classify::{
    classify_correlated, classify_general, classify_spectral, dimension_sum, dimension_sum_check,
    Outcome, SpectralPolicy, NONEMPTY_QUALIFIER,
};
use cantordiff::dgc::SearchOptions;
use cantordiff::rational::{rat, Rational};
use cantordiff::spectra::{lower_spectral_radius, SpectralOptions};
use cantordiff::{Error, JointSurvivalDistribution, LetterSet, MarginalVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn correlated_and_general_agree_on_small_grid() {
    for big in 2..=8usize {
        for m in 1..=big {
            let mut ps = vec![rat(m as i64, 2 * big as i64), rat(m as i64, big as i64)];
            let root = (big as f64).sqrt().round() as usize;
            if root * root == big && root <= m {
                ps.push(rat(1, root as i64));
            }
            for p in ps {
                let a = classify_correlated(m, big, &p).unwrap();
                let mu = JointSurvivalDistribution::make_correlated(m, big, p.clone()).unwrap();
                let b = classify_general(&mu, &mu, &SearchOptions::default()).unwrap();
                let ctx = format!("m={m} M={big} p={p}: {} vs {}", a.rule, b.rule);
                // supercritical cases decide only when witnesses are within reach
                let reachable =
                    a.outcome != Outcome::IntervalAlmostSurely || m * m >= big + 2 || big <= 3;
                if reachable {
                    assert_eq!(a.outcome, b.outcome, "{ctx}");
                } else {
                    assert_ne!(b.outcome, Outcome::NoIntervalAlmostSurely, "{ctx}");
                }
            }
        }
    }
}

#[test]
fn positive_verdicts_are_qualified() {
    let v = classify_correlated(7, 9, &rat(7, 9)).unwrap();
    assert_eq!(v.outcome, Outcome::IntervalAlmostSurely);
    assert_eq!(v.qualifiers, vec![NONEMPTY_QUALIFIER.to_string()]);
    let ind =
        JointSurvivalDistribution::make_independent(MarginalVector::uniform(3, rat(4, 5)).unwrap());
    let g = classify_general(&ind, &ind, &SearchOptions::default()).unwrap();
    assert_eq!(g.rule, "distributed-growth");
    assert!(g.to_json().contains(NONEMPTY_QUALIFIER));
    let n = classify_correlated(2, 9, &rat(2, 9)).unwrap();
    assert!(n.qualifiers.is_empty());
}

#[test]
fn critical_boundary() {
    let v = classify_correlated(3, 9, &rat(1, 3)).unwrap();
    assert_eq!(
        (v.outcome, v.rule.as_str()),
        (Outcome::NoIntervalAlmostSurely, "correlated-critical")
    );
    let mu = JointSurvivalDistribution::make_correlated(3, 9, rat(1, 3)).unwrap();
    let g = classify_general(&mu, &mu, &SearchOptions::default()).unwrap();
    assert_eq!(g.rule, "critical-central");
    let est = lower_spectral_radius(&mu, &mu, 4, &SpectralOptions::default()).unwrap();
    assert!(est.iter().all(|e| e.value <= 1.0 + 1e-12), "{est:?}");
    // no growth witnesses at criticality, so the spectral rule does not apply
    assert!(matches!(
        classify_spectral(&mu, &mu, 4, &SpectralPolicy::default()),
        Err(Error::HypothesisNotMet(_))
    ));
}

#[test]
fn sure_letter_is_undecided() {
    let mu =
        JointSurvivalDistribution::deterministic(LetterSet::from_members(3, [0]).unwrap()).unwrap();
    let v = classify_general(&mu, &mu, &SearchOptions::default()).unwrap();
    assert_eq!(v.outcome, Outcome::NoIntervalAlmostSurely);
    let one =
        JointSurvivalDistribution::deterministic(LetterSet::from_members(2, [0]).unwrap()).unwrap();
    let two = JointSurvivalDistribution::deterministic(LetterSet::full(2)).unwrap();
    let v = classify_general(&one, &two, &SearchOptions::default()).unwrap();
    assert_eq!(v.outcome, Outcome::Indeterminate);
    assert!(v
        .evidence
        .notes
        .iter()
        .any(|n| n.contains("survives surely")));
}

#[test]
fn spectral_verdicts() {
    let ind =
        JointSurvivalDistribution::make_independent(MarginalVector::uniform(3, rat(4, 5)).unwrap());
    let v = classify_spectral(&ind, &ind, 5, &SpectralPolicy::default()).unwrap();
    assert_eq!(v.outcome, Outcome::IntervalAlmostSurely);
    assert!(v.qualifiers.iter().any(|q| q == "spectral-corrected"));
    let few = classify_spectral(&ind, &ind, 1, &SpectralPolicy::default()).unwrap();
    assert_eq!(few.outcome, Outcome::Indeterminate);
    let other =
        JointSurvivalDistribution::make_independent(MarginalVector::uniform(3, rat(3, 5)).unwrap());
    assert!(matches!(
        classify_spectral(&ind, &other, 4, &SpectralPolicy::default()),
        Err(Error::HypothesisNotMet(_))
    ));
}

#[test]
fn dimension_sum_matches_gamma_threshold() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut checked = 0;
    while checked < 1000 {
        let big = rng.random_range(2..=40usize);
        let m = rng.random_range(1..=big);
        let den = rng.random_range(1..=200i64);
        let num = rng.random_range(1..=den);
        let p = rat(num, den);
        if p > rat(m as i64, big as i64)
            || p.clone() * Rational::from_integer((big as i64).into()) <= rat(1, 1)
        {
            continue;
        }
        let d = dimension_sum(m, big, &p).unwrap();
        let verdict = classify_correlated(m, big, &p).unwrap();
        assert_eq!(
            d.exceeds_one,
            verdict.outcome == Outcome::IntervalAlmostSurely,
            "m={m} M={big} p={p}"
        );
        let tol = 1e-9;
        if (d.sum - 1.0).abs() > tol {
            assert_eq!(d.exceeds_one, d.sum > 1.0);
        }
        checked += 1;
    }
    assert!(matches!(
        dimension_sum_check(1, 4, &rat(1, 4)),
        Err(Error::ParameterOutOfRange(_))
    ));
    assert!(!dimension_sum_check(3, 9, &rat(1, 3)).unwrap());
}
