mod common;

use cantordiff::distribution::MarginalVector;
use cantordiff::rational::{rat, Rational};
use cantordiff::spectra::{
    expectation_matrix, gamma_cyclic, gamma_from_marginals, lower_spectral_radius,
    lower_spectral_radius_family, word_matrix, Mat2, MatrixNorm, SpectralOptions,
};
use cantordiff::{gamma_indicator, Execution, JointSurvivalDistribution, LetterSet, Word};
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn gamma_depends_only_on_marginals() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for m in 2..=6 {
        let mu = random_distribution(&mut rng, m);
        let lambda = random_distribution(&mut rng, m);
        let ind_mu = JointSurvivalDistribution::make_independent(mu.marginals());
        let ind_lambda = JointSurvivalDistribution::make_independent(lambda.marginals());
        assert_eq!(
            gamma_cyclic(&mu, &lambda).unwrap(),
            gamma_cyclic(&ind_mu, &ind_lambda).unwrap()
        );
        let g = gamma_cyclic(&mu, &lambda).unwrap();
        assert_eq!(g.gamma_min, g.values.iter().min().unwrap().clone());
        assert!(g
            .values
            .iter()
            .all(|v| *v >= Rational::from_integer(0.into())
                && *v <= Rational::from_integer((m as i64).into())));
    }
}

#[test]
fn shift_identity_exhaustive() {
    for m in 2..=6usize {
        let all = 1u64 << m;
        for xm in 0..all {
            for ym in 0..all {
                let x = LetterSet::from_mask(m, xm);
                let y = LetterSet::from_mask(m, ym);
                let g0 = gamma_indicator(&x, &y, 0).unwrap();
                let g1 = gamma_indicator(&x, &y, 1 % m).unwrap();
                for k in 0..m {
                    let yk = y.rotate(k);
                    assert_eq!(gamma_indicator(&x, &yk, k).unwrap(), g0);
                    assert_eq!(gamma_indicator(&x, &yk, (k + 1) % m).unwrap(), g1);
                }
            }
        }
    }
}

#[test]
fn indicator_at_zero_is_size() {
    let x = LetterSet::from_bit_string("1011001").unwrap();
    assert_eq!(gamma_indicator(&x, &x, 0).unwrap(), 4);
}

#[test]
fn matrices_match_geometric_oracle() {
    let p = MarginalVector::new(vec![rat(1, 2), rat(1, 1)]).unwrap();
    let d = JointSurvivalDistribution::make_independent(p);
    let pv = d.marginals().values().to_vec();
    for k in 0..2 {
        assert_eq!(
            expectation_matrix(&d, &d, k).unwrap().entries(),
            &matrix_oracle(&pv, &pv, k)
        );
    }
    assert_eq!(
        gamma_from_marginals(&d.marginals(), &d.marginals())
            .unwrap()
            .values,
        vec![rat(5, 4), rat(1, 1)]
    );
}

#[test]
fn product_rule_is_associative() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..40 {
        let m = rng.random_range(2..=5);
        let mu = random_distribution(&mut rng, m);
        let lambda = random_distribution(&mut rng, m);
        let w1: Vec<usize> = (0..rng.random_range(1..=3))
            .map(|_| rng.random_range(0..m))
            .collect();
        let w2: Vec<usize> = (0..rng.random_range(1..=3))
            .map(|_| rng.random_range(0..m))
            .collect();
        let joined: Vec<usize> = w1.iter().chain(&w2).copied().collect();
        let a = word_matrix(&mu, &lambda, &Word::new(w1)).unwrap();
        let b = word_matrix(&mu, &lambda, &Word::new(w2)).unwrap();
        assert_eq!(
            word_matrix(&mu, &lambda, &Word::new(joined)).unwrap(),
            a.mul(&b)
        );
    }
}

#[test]
fn deterministic_column_sums_double() {
    let x = LetterSet::from_bit_string("1111000").unwrap();
    let d = JointSurvivalDistribution::deterministic(x).unwrap();
    let m0 = expectation_matrix(&d, &d, 0).unwrap();
    assert!(m0.column_sums().iter().all(|c| *c >= rat(2, 1)));
    for n in 1..=5 {
        let w = word_matrix(&d, &d, &Word::repeat(0, n)).unwrap();
        assert!(w.column_sums().iter().all(|c| *c >= rat(1 << n, 1)));
    }
}

#[test]
fn pruned_equals_exhaustive_small_alphabets() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for m in 2..=3 {
        for _ in 0..8 {
            let mu = random_distribution(&mut rng, m);
            let lambda = random_distribution(&mut rng, m);
            for norm in [MatrixNorm::MaxColumnSum, MatrixNorm::MaxRowSum] {
                let pruned = SpectralOptions {
                    norm,
                    ..SpectralOptions::default()
                };
                let full = SpectralOptions {
                    prune: false,
                    exec: Execution::Sequential,
                    ..pruned
                };
                assert_eq!(
                    lower_spectral_radius(&mu, &lambda, 5, &pruned).unwrap(),
                    lower_spectral_radius(&mu, &lambda, 5, &full).unwrap()
                );
            }
        }
    }
}

#[test]
fn independent_point_eight_estimates() {
    let d =
        JointSurvivalDistribution::make_independent(MarginalVector::uniform(3, rat(4, 5)).unwrap());
    let est = lower_spectral_radius(&d, &d, 8, &SpectralOptions::default()).unwrap();
    let full = lower_spectral_radius(
        &d,
        &d,
        4,
        &SpectralOptions {
            prune: false,
            ..SpectralOptions::default()
        },
    )
    .unwrap();
    assert_eq!(&est[..4], &full[..]);
    let mats: Vec<_> = (0..3)
        .map(|k| expectation_matrix(&d, &d, k).unwrap())
        .collect();
    for e in &est {
        assert_eq!(e.argmin_word.len(), e.n);
        let prod = e.argmin_word.letters()[1..]
            .iter()
            .fold(mats[e.argmin_word.letters()[0]].clone(), |acc, &k| {
                acc.mul(&mats[k])
            });
        let norm = MatrixNorm::MaxColumnSum
            .norm(&prod.to_f64())
            .powf(1.0 / e.n as f64);
        assert!((norm - e.value).abs() < 1e-12);
        // every column sum of every letter is at least gamma = 1.92
        assert!(e.value >= 1.92 - 1e-12);
    }
}

#[test]
fn sequential_and_parallel_agree() {
    let d = JointSurvivalDistribution::make_correlated(3, 5, rat(3, 5)).unwrap();
    let seq = SpectralOptions {
        exec: Execution::Sequential,
        ..SpectralOptions::default()
    };
    let par = SpectralOptions {
        exec: Execution::Parallel,
        ..SpectralOptions::default()
    };
    assert_eq!(
        lower_spectral_radius(&d, &d, 6, &seq).unwrap(),
        lower_spectral_radius(&d, &d, 6, &par).unwrap()
    );
}

#[test]
fn singleton_converges_towards_eigenvalue() {
    let a: Mat2 = [[1.0, 1.0], [0.0, 0.5]];
    let est = lower_spectral_radius_family(&[a], 64, &SpectralOptions::default()).unwrap();
    let oracle = spectral_radius(a);
    let gaps: Vec<f64> = est.iter().map(|e| (e.value - oracle).abs()).collect();
    assert!(gaps.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    assert!(gaps[63] < 0.011);
}

proptest! {
    #[test]
    fn column_sums_are_gammas(seed in any::<u64>(), m in 2usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mu = random_distribution(&mut rng, m);
        let lambda = random_distribution(&mut rng, m);
        let g = gamma_cyclic(&mu, &lambda).unwrap();
        for k in 0..m {
            let [l, r] = expectation_matrix(&mu, &lambda, k).unwrap().column_sums();
            prop_assert_eq!(&l, g.get(k + 1));
            prop_assert_eq!(&r, g.get(k));
        }
    }
}
