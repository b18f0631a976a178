//! Drawing subsets from a joint survival distribution.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distribution::{DistributionKind, JointSurvivalDistribution};
use crate::error::Result;
use crate::letters::LetterSet;
use crate::limits::Limits;
use crate::rational::to_f64;

pub type SimRng = ChaCha8Rng;

/// Generator for substream `stream` of `seed`. Replica `r` of an experiment
/// uses stream `r`, so any replica can be replayed on its own.
pub fn substream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Precomputed sampler. Correlated laws draw in two stages (empty or not,
/// then a uniform m-subset) so their support is never materialized.
#[derive(Debug, Clone)]
pub enum SubsetSampler {
    Table {
        alphabet_size: usize,
        cumulative: Vec<f64>,
        sets: Vec<LetterSet>,
    },
    UniformSubsets {
        alphabet_size: usize,
        m: usize,
        nonempty: f64,
    },
    Independent {
        alphabet_size: usize,
        p: Vec<f64>,
    },
}

impl SubsetSampler {
    pub fn new(dist: &JointSurvivalDistribution, limits: &Limits) -> Result<Self> {
        let alphabet_size = dist.alphabet_size();
        Ok(match dist.kind() {
            DistributionKind::UniformSubsets { m, empty_mass, .. } => {
                SubsetSampler::UniformSubsets {
                    alphabet_size,
                    m: *m,
                    nonempty: 1.0 - to_f64(empty_mass),
                }
            }
            DistributionKind::Independent(p) => SubsetSampler::Independent {
                alphabet_size,
                p: p.values().iter().map(to_f64).collect(),
            },
            DistributionKind::Atoms(_) => {
                let atoms = dist.atoms(limits)?;
                let mut acc = 0.0;
                let mut cumulative = Vec::with_capacity(atoms.len());
                let mut sets = Vec::with_capacity(atoms.len());
                for (s, w) in atoms {
                    acc += to_f64(&w);
                    cumulative.push(acc);
                    sets.push(s);
                }
                SubsetSampler::Table {
                    alphabet_size,
                    cumulative,
                    sets,
                }
            }
        })
    }

    pub fn alphabet_size(&self) -> usize {
        match self {
            SubsetSampler::Table { alphabet_size, .. }
            | SubsetSampler::UniformSubsets { alphabet_size, .. }
            | SubsetSampler::Independent { alphabet_size, .. } => *alphabet_size,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> LetterSet {
        let mut out = Vec::new();
        self.sample_letters(rng, &mut out);
        LetterSet::from_members(self.alphabet_size(), out).expect("sampled letters in range")
    }

    /// Writes the surviving letters, in increasing order, into `out`.
    pub fn sample_letters<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<usize>) {
        out.clear();
        match self {
            SubsetSampler::Table {
                cumulative, sets, ..
            } => {
                let u: f64 = rng.random::<f64>() * cumulative.last().copied().unwrap_or(1.0);
                let i = cumulative.partition_point(|&c| c <= u).min(sets.len() - 1);
                out.extend(sets[i].iter());
            }
            SubsetSampler::UniformSubsets {
                alphabet_size,
                m,
                nonempty,
            } => {
                if *nonempty >= 1.0 || rng.random::<f64>() < *nonempty {
                    if m == alphabet_size {
                        out.extend(0..*alphabet_size);
                    } else {
                        out.extend(index::sample(rng, *alphabet_size, *m));
                        out.sort_unstable();
                    }
                }
            }
            SubsetSampler::Independent { p, .. } => {
                for (i, &pi) in p.iter().enumerate() {
                    if pi >= 1.0 || (pi > 0.0 && rng.random::<f64>() < pi) {
                        out.push(i);
                    }
                }
            }
        }
    }
}

/// One draw from `dist` using the caller's generator.
pub fn sample_subset<R: Rng + ?Sized>(
    dist: &JointSurvivalDistribution,
    rng: &mut R,
) -> Result<LetterSet> {
    Ok(SubsetSampler::new(dist, &Limits::default())?.sample(rng))
}
