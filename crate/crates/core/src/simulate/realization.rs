use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distribution::JointSurvivalDistribution;
use crate::error::{Error, Result};
use crate::letters::Alphabet;
use crate::limits::Limits;
use crate::rational::to_f64;
use crate::sampling::{substream, SubsetSampler};

/// Survivor addresses per level; level `n` holds integers in `[0, M^n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Realization {
    pub alphabet_size: usize,
    pub depth: usize,
    pub levels: Vec<Vec<u64>>,
    pub seed: u64,
    pub stream: u64,
}

impl Realization {
    /// Builds the full survivor tree from the deepest level.
    pub fn from_leaves(alphabet_size: usize, depth: usize, leaves: Vec<u64>) -> Result<Self> {
        let width = level_width(alphabet_size, depth)?;
        let mut leaves = leaves;
        leaves.sort_unstable();
        leaves.dedup();
        if let Some(&a) = leaves.last() {
            if a >= width {
                return Err(Error::MemberOutOfRange {
                    letter: a as usize,
                    alphabet_size: width as usize,
                });
            }
        }
        let mut levels = vec![leaves];
        for _ in 0..depth {
            let mut parents: Vec<u64> = levels
                .last()
                .unwrap()
                .iter()
                .map(|a| a / alphabet_size as u64)
                .collect();
            parents.dedup();
            levels.push(parents);
        }
        levels.reverse();
        // the root always survives
        levels[0] = vec![0];
        let r = Realization {
            alphabet_size,
            depth,
            levels,
            seed: 0,
            stream: 0,
        };
        r.check_nesting()?;
        Ok(r)
    }

    pub fn level(&self, n: usize) -> Result<&[u64]> {
        self.levels
            .get(n)
            .map(Vec::as_slice)
            .ok_or(Error::DepthMismatch {
                requested: n,
                available: self.depth,
            })
    }

    pub fn width(&self, n: usize) -> u64 {
        (self.alphabet_size as u64).pow(n as u32)
    }

    pub fn survivor_counts(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    /// Every survivor's parent survives and the levels are strictly increasing.
    pub fn check_nesting(&self) -> Result<()> {
        if self.levels.first().map(Vec::as_slice) != Some(&[0][..])
            || self.levels.len() != self.depth + 1
        {
            return Err(Error::InvariantViolation(
                "level 0 must be the root alone".into(),
            ));
        }
        let m = self.alphabet_size as u64;
        for n in 1..=self.depth {
            let (upper, lower) = (&self.levels[n - 1], &self.levels[n]);
            let width = self.width(n);
            if lower.windows(2).any(|w| w[0] >= w[1]) || lower.last().is_some_and(|&a| a >= width) {
                return Err(Error::InvariantViolation(format!(
                    "level {n} is not a sorted address set"
                )));
            }
            if lower.iter().any(|a| upper.binary_search(&(a / m)).is_err()) {
                return Err(Error::InvariantViolation(format!(
                    "level {n} has an orphaned survivor"
                )));
            }
        }
        Ok(())
    }
}

fn level_width(alphabet_size: usize, depth: usize) -> Result<u64> {
    Alphabet::new(alphabet_size)?
        .order_size(depth as u32)
        .ok_or_else(|| {
            Error::ResourceLimitExceeded(format!("{alphabet_size}^{depth} addresses overflow"))
        })
}

/// Samples a realization from an explicit generator.
pub fn sample_realization_with<R: Rng + ?Sized>(
    sampler: &SubsetSampler,
    depth: usize,
    rng: &mut R,
    limits: &Limits,
) -> Result<Realization> {
    let m = sampler.alphabet_size();
    level_width(m, depth)?;
    let mut levels: Vec<Vec<u64>> = Vec::with_capacity(depth + 1);
    levels.push(vec![0]);
    let mut letters = Vec::with_capacity(m);
    for n in 1..=depth {
        let mut next = Vec::new();
        for &a in &levels[n - 1] {
            sampler.sample_letters(rng, &mut letters);
            next.extend(letters.iter().map(|&l| a * m as u64 + l as u64));
        }
        if next.len() as u64 > limits.max_survivors {
            return Err(Error::ResourceLimitExceeded(format!(
                "level {n} has {} survivors, above the cap of {}",
                next.len(),
                limits.max_survivors
            )));
        }
        levels.push(next);
    }
    let r = Realization {
        alphabet_size: m,
        depth,
        levels,
        seed: 0,
        stream: 0,
    };
    debug_assert!(r.check_nesting().is_ok());
    Ok(r)
}

fn check_expected_size(
    dist: &JointSurvivalDistribution,
    depth: usize,
    limits: &Limits,
) -> Result<()> {
    let mean: f64 = dist.marginals().values().iter().map(to_f64).sum();
    let expected = mean.powi(depth as i32);
    if expected > limits.max_survivors as f64 {
        return Err(Error::ResourceLimitExceeded(format!(
            "expected {expected:.3e} survivors at depth {depth}, above the cap of {}",
            limits.max_survivors
        )));
    }
    Ok(())
}

/// Samples one realization on substream `(seed, 0)`.
pub fn sample_realization(
    dist: &JointSurvivalDistribution,
    depth: usize,
    seed: u64,
    limits: &Limits,
) -> Result<Realization> {
    check_expected_size(dist, depth, limits)?;
    let sampler = SubsetSampler::new(dist, limits)?;
    let mut rng = substream(seed, 0);
    let mut r = sample_realization_with(&sampler, depth, &mut rng, limits)?;
    r.check_nesting()?;
    r.seed = seed;
    Ok(r)
}

/// The pair `(F_1, F_2)` of replica `stream`: both drawn in turn from
/// substream `(seed, stream)`.
pub fn sample_pair(
    first: &SubsetSampler,
    second: &SubsetSampler,
    depth: usize,
    seed: u64,
    stream: u64,
    limits: &Limits,
) -> Result<(Realization, Realization)> {
    let mut rng = substream(seed, stream);
    let mut a = sample_realization_with(first, depth, &mut rng, limits)?;
    let mut b = sample_realization_with(second, depth, &mut rng, limits)?;
    for r in [&mut a, &mut b] {
        r.check_nesting()?;
        r.seed = seed;
        r.stream = stream;
    }
    Ok((a, b))
}
