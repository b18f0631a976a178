#![allow(dead_code)]

use cantordiff::rational::{rat, zero, Rational};
use cantordiff::{JointSurvivalDistribution, LetterSet};
use rand::Rng;

/// A random explicit law on `{0..m-1}`: a handful of random subsets with
/// random rational masses, any shortfall going to the empty set.
pub fn random_distribution<R: Rng>(rng: &mut R, m: usize) -> JointSurvivalDistribution {
    let atoms_n = rng.random_range(1..=6);
    let weights: Vec<i64> = (0..atoms_n).map(|_| rng.random_range(1..=20)).collect();
    let denom: i64 = weights.iter().sum::<i64>() + rng.random_range(0..=10);
    let atoms: Vec<(LetterSet, Rational)> = weights
        .iter()
        .map(|&w| {
            let members: Vec<usize> = (0..m).filter(|_| rng.random_bool(0.5)).collect();
            (LetterSet::from_members(m, members).unwrap(), rat(w, denom))
        })
        .collect();
    JointSurvivalDistribution::make_distribution(m, atoms).unwrap()
}

/// Marginals summed directly from the atoms.
pub fn marginals_from_atoms(d: &JointSurvivalDistribution) -> Vec<Rational> {
    let m = d.alphabet_size();
    let mut p = vec![zero(); m];
    for (s, w) in d.atoms(&Default::default()).unwrap() {
        for i in s.iter() {
            p[i] += &w;
        }
    }
    p
}

/// `γ_k = Σ_i q_i p_{i+k}`.
pub fn gamma_oracle(p: &[Rational], q: &[Rational]) -> Vec<Rational> {
    let m = p.len();
    (0..m)
        .map(|k| (0..m).fold(zero(), |acc, i| acc + &q[i] * &p[(i + k) % m]))
        .collect()
}

/// Expectation matrix of letter `k` rebuilt from the level-1 picture: every
/// square `(a, b)` sheds an R triangle at column `a - b` and an L triangle at
/// column `a - b - 1`; column `c ≥ 0` is `R_c`, column `c < 0` is `L_{c+M}`.
/// Entry `[U][V]` sums `p_a q_b` over squares whose V triangle lands in `U_k`.
pub fn matrix_oracle(p: &[Rational], q: &[Rational], k: usize) -> [[Rational; 2]; 2] {
    let m = p.len() as i64;
    let mut out = [[zero(), zero()], [zero(), zero()]];
    for a in 0..m {
        for b in 0..m {
            let w = &p[a as usize] * &q[b as usize];
            for (ty, col) in [(0usize, a - b - 1), (1usize, a - b)] {
                let (side, letter) = if col >= 0 {
                    (1usize, col)
                } else {
                    (0usize, col + m)
                };
                if letter == k as i64 {
                    out[side][ty] += &w;
                }
            }
        }
    }
    out
}

/// Closed-form spectral radius of a real 2x2 matrix with real eigenvalues.
pub fn spectral_radius(a: [[f64; 2]; 2]) -> f64 {
    let tr = a[0][0] + a[1][1];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    (tr / 2.0 + disc).abs().max((tr / 2.0 - disc).abs())
}

/// Mean and standard error of a sample.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
