//! Cyclic cross-correlation coefficients, the 2x2 expectation matrices of the
//! triangle-counting process, and lower spectral radius estimates of the
//! matrix family.
//!
//! Geometry: the level-1 square `Q_{a,b}` (letter `a` of the first set, `b` of
//! the second) projects under `(x, y) ↦ x - y` onto `[(d-1)/M, (d+1)/M]` with
//! `d = a - b`. Its L triangle covers the left half, its R triangle the right
//! half. The R triangle therefore lies in column `R_k` when `d = k` and in
//! `L_k` when `d = k - M`; the L triangle lies in `R_k` when `d = k + 1` and in
//! `L_k` when `d = k + 1 - M`. Rows of a matrix are the parent triangle type,
//! columns the child type, both ordered `(L, R)`.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::distribution::{JointSurvivalDistribution, MarginalVector};
use crate::error::{Error, Result};
use crate::letters::Word;
use crate::limits::Limits;
use crate::par::{self, Execution};
use crate::rational::{format_rational, one, serde_rational, to_f64, zero, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    L,
    R,
}

impl Side {
    pub fn index(self) -> usize {
        match self {
            Side::L => 0,
            Side::R => 1,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::L => "L",
            Side::R => "R",
        })
    }
}

/// `γ_k = Σ_i q_i p_{i+k}` for `k = 0 .. M-1`, with its minimum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrelationVector {
    #[serde(with = "crate::rational::serde_rational_vec")]
    pub values: Vec<Rational>,
    #[serde(with = "serde_rational")]
    pub gamma_min: Rational,
}

impl CorrelationVector {
    pub fn get(&self, k: usize) -> &Rational {
        &self.values[k % self.values.len()]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.values.iter().map(to_f64).collect()
    }
}

/// Correlation coefficients from the marginals `p` (first set) and `q`
/// (second set).
pub fn gamma_from_marginals(p: &MarginalVector, q: &MarginalVector) -> Result<CorrelationVector> {
    let m = p.len();
    if q.len() != m {
        return Err(Error::AlphabetMismatch {
            left: m,
            right: q.len(),
        });
    }
    let values: Vec<Rational> = (0..m)
        .map(|k| (0..m).fold(zero(), |acc, i| acc + q.get(i) * p.get((i + k) % m)))
        .collect();
    let gamma_min = values.iter().min().cloned().unwrap_or_else(zero);
    Ok(CorrelationVector { values, gamma_min })
}

pub fn gamma_cyclic(
    mu: &JointSurvivalDistribution,
    lambda: &JointSurvivalDistribution,
) -> Result<CorrelationVector> {
    gamma_from_marginals(&mu.marginals(), &lambda.marginals())
}

/// Expected triangle counts one level down, labelled by the letter or word
/// they belong to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectationMatrix {
    entries: [[Rational; 2]; 2],
    label: Word,
}

impl ExpectationMatrix {
    pub fn new(entries: [[Rational; 2]; 2], label: Word) -> Self {
        ExpectationMatrix { entries, label }
    }

    pub fn identity() -> Self {
        ExpectationMatrix::new([[one(), zero()], [zero(), one()]], Word::default())
    }

    pub fn get(&self, parent: Side, child: Side) -> &Rational {
        &self.entries[parent.index()][child.index()]
    }

    pub fn entries(&self) -> &[[Rational; 2]; 2] {
        &self.entries
    }

    pub fn label(&self) -> &Word {
        &self.label
    }

    /// `[1 1] · A`, ordered `(L, R)`.
    pub fn column_sums(&self) -> [Rational; 2] {
        [
            &self.entries[0][0] + &self.entries[1][0],
            &self.entries[0][1] + &self.entries[1][1],
        ]
    }

    pub fn mul(&self, other: &ExpectationMatrix) -> ExpectationMatrix {
        let a = &self.entries;
        let b = &other.entries;
        let e = |i: usize, j: usize| &a[i][0] * &b[0][j] + &a[i][1] * &b[1][j];
        let mut label = self.label.0.clone();
        label.extend_from_slice(&other.label.0);
        ExpectationMatrix {
            entries: [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]],
            label: Word(label),
        }
    }

    pub fn to_f64(&self) -> Mat2 {
        let f = |i: usize, j: usize| to_f64(&self.entries[i][j]);
        [[f(0, 0), f(0, 1)], [f(1, 0), f(1, 1)]]
    }
}

impl fmt::Display for ExpectationMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |i: usize, j: usize| format_rational(&self.entries[i][j]);
        write!(
            f,
            "M({}) = [[{}, {}], [{}, {}]]",
            self.label,
            s(0, 0),
            s(0, 1),
            s(1, 0),
            s(1, 1)
        )
    }
}

/// `Σ_i q_i p_{i+shift}` restricted to `0 ≤ i + shift ≤ M - 1`.
fn offset_sum(p: &MarginalVector, q: &MarginalVector, shift: isize) -> Rational {
    let m = p.len() as isize;
    (0..m)
        .filter(|i| (0..m).contains(&(i + shift)))
        .fold(zero(), |acc, i| {
            acc + q.get(i as usize) * p.get((i + shift) as usize)
        })
}

pub fn matrix_from_marginals(
    p: &MarginalVector,
    q: &MarginalVector,
    k: usize,
) -> Result<ExpectationMatrix> {
    let m = p.len();
    if q.len() != m {
        return Err(Error::AlphabetMismatch {
            left: m,
            right: q.len(),
        });
    }
    if k >= m {
        return Err(Error::IndexOutOfRange {
            index: k,
            alphabet_size: m,
        });
    }
    let (mi, ki) = (m as isize, k as isize);
    let ll = offset_sum(p, q, ki + 1 - mi);
    let lr = offset_sum(p, q, ki - mi);
    let rl = offset_sum(p, q, ki + 1);
    let rr = offset_sum(p, q, ki);
    let matrix = ExpectationMatrix::new([[ll, lr], [rl, rr]], Word::letter(k));

    let gamma = gamma_from_marginals(p, q)?;
    let [left, right] = matrix.column_sums();
    if &left != gamma.get(k + 1) || &right != gamma.get(k) {
        return Err(Error::InvariantViolation(format!(
            "column sums of M({k}) are ({}, {}), expected (γ_{}, γ_{k}) = ({}, {})",
            format_rational(&left),
            format_rational(&right),
            (k + 1) % m,
            format_rational(gamma.get(k + 1)),
            format_rational(gamma.get(k)),
        )));
    }
    Ok(matrix)
}

pub fn expectation_matrix(
    mu: &JointSurvivalDistribution,
    lambda: &JointSurvivalDistribution,
    k: usize,
) -> Result<ExpectationMatrix> {
    matrix_from_marginals(&mu.marginals(), &lambda.marginals(), k)
}

/// `M(0), .., M(M-1)`.
pub fn expectation_matrices(
    mu: &JointSurvivalDistribution,
    lambda: &JointSurvivalDistribution,
) -> Result<Vec<ExpectationMatrix>> {
    let (p, q) = (mu.marginals(), lambda.marginals());
    (0..p.len())
        .map(|k| matrix_from_marginals(&p, &q, k))
        .collect()
}

/// `M(k_1) ⋯ M(k_n)`.
pub fn word_matrix(
    mu: &JointSurvivalDistribution,
    lambda: &JointSurvivalDistribution,
    word: &Word,
) -> Result<ExpectationMatrix> {
    if word.is_empty() {
        return Err(Error::ParameterOutOfRange("word must be nonempty".into()));
    }
    if mu.alphabet_size() != lambda.alphabet_size() {
        return Err(Error::AlphabetMismatch {
            left: mu.alphabet_size(),
            right: lambda.alphabet_size(),
        });
    }
    word.validate(mu.alphabet_size())?;
    let mats = expectation_matrices(mu, lambda)?;
    let mut acc = mats[word.letters()[0]].clone();
    for &k in &word.letters()[1..] {
        acc = acc.mul(&mats[k]);
    }
    Ok(acc)
}

pub type Mat2 = [[f64; 2]; 2];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

/// Induced norms on nonnegative 2x2 matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixNorm {
    #[default]
    MaxColumnSum,
    MaxRowSum,
}

impl MatrixNorm {
    pub fn name(self) -> &'static str {
        match self {
            MatrixNorm::MaxColumnSum => "max-column-sum",
            MatrixNorm::MaxRowSum => "max-row-sum",
        }
    }

    pub fn norm(self, a: &Mat2) -> f64 {
        match self {
            MatrixNorm::MaxColumnSum => {
                (a[0][0].abs() + a[1][0].abs()).max(a[0][1].abs() + a[1][1].abs())
            }
            MatrixNorm::MaxRowSum => {
                (a[0][0].abs() + a[0][1].abs()).max(a[1][0].abs() + a[1][1].abs())
            }
        }
    }

    /// A factor `c(P)` with `‖P S‖ ≥ c(P) ‖S‖` for every nonnegative `S`.
    fn extension_factor(self, p: &Mat2) -> f64 {
        match self {
            // 1ᵀ P S ≥ (min column sum of P) · 1ᵀ S
            MatrixNorm::MaxColumnSum => (p[0][0] + p[1][0]).min(p[0][1] + p[1][1]),
            // P (S 1) ≥ P_{·r} ‖S‖ where r is the heaviest row of S
            MatrixNorm::MaxRowSum => p[0][0].max(p[1][0]).min(p[0][1].max(p[1][1])),
        }
    }
}

impl std::str::FromStr for MatrixNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max-column-sum" | "column-sum" | "col" => Ok(MatrixNorm::MaxColumnSum),
            "max-row-sum" | "row-sum" | "row" => Ok(MatrixNorm::MaxRowSum),
            other => Err(Error::Parse(format!("unknown norm {other:?}"))),
        }
    }
}

/// `min_w ‖A_w‖^{1/n}` over all words of length `n`, with the
/// lexicographically first word attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralEstimate {
    pub n: usize,
    pub value: f64,
    pub argmin_word: Word,
    pub norm: String,
}

#[derive(Debug, Clone, Copy)]
pub struct SpectralOptions {
    pub norm: MatrixNorm,
    pub prune: bool,
    pub exec: Execution,
    pub limits: Limits,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            norm: MatrixNorm::default(),
            prune: true,
            exec: Execution::default(),
            limits: Limits::default(),
        }
    }
}

// Relative slack on the pruning bound so that rounding in the bound never
// discards a word whose computed norm ties the incumbent.
const PRUNE_SLACK: f64 = 1e-12;

struct Search<'a> {
    mats: &'a [Mat2],
    norm: MatrixNorm,
    n: usize,
    prune: bool,
    /// `shortest[r]`: minimal norm over words of length `r`.
    shortest: &'a [f64],
    incumbent: &'a AtomicU64,
    visited: &'a AtomicU64,
    max_visits: u64,
}

struct Best {
    norm: f64,
    word: Vec<usize>,
}

impl Best {
    fn offer(&mut self, norm: f64, word: &[usize]) {
        if norm < self.norm || (norm == self.norm && word < self.word.as_slice()) {
            self.norm = norm;
            self.word = word.to_vec();
        }
    }
}

impl Search<'_> {
    fn incumbent(&self) -> f64 {
        f64::from_bits(self.incumbent.load(Ordering::Relaxed))
    }

    fn lower_incumbent(&self, v: f64) {
        // nonnegative floats order like their bit patterns
        self.incumbent.fetch_min(v.to_bits(), Ordering::Relaxed);
    }

    fn dfs(&self, prefix: &Mat2, word: &mut Vec<usize>, best: &mut Best) -> Result<()> {
        if self.visited.fetch_add(1, Ordering::Relaxed) >= self.max_visits {
            return Err(Error::ResourceLimitExceeded(format!(
                "spectral search visited more than {} words",
                self.max_visits
            )));
        }
        let depth = word.len();
        if depth == self.n {
            let v = self.norm.norm(prefix);
            best.offer(v, word);
            self.lower_incumbent(v);
            return Ok(());
        }
        if self.prune && depth > 0 {
            let bound = self.norm.extension_factor(prefix) * self.shortest[self.n - depth];
            if bound > self.incumbent() * (1.0 + PRUNE_SLACK) {
                return Ok(());
            }
        }
        for (k, a) in self.mats.iter().enumerate() {
            word.push(k);
            let next = mat_mul(prefix, a);
            let r = self.dfs(&next, word, best);
            word.pop();
            r?;
        }
        Ok(())
    }
}

/// Lower spectral radius estimates for an arbitrary family of nonnegative
/// 2x2 matrices, for word lengths `1 ..= n_max`.
pub fn lower_spectral_radius_family(
    mats: &[Mat2],
    n_max: usize,
    opts: &SpectralOptions,
) -> Result<Vec<SpectralEstimate>> {
    if n_max == 0 {
        return Err(Error::ParameterOutOfRange(
            "n_max must be at least 1".into(),
        ));
    }
    if mats.is_empty() {
        return Err(Error::ParameterOutOfRange("matrix family is empty".into()));
    }
    if mats
        .iter()
        .flatten()
        .flatten()
        .any(|x| *x < 0.0 || !x.is_finite())
    {
        return Err(Error::ParameterOutOfRange(
            "matrices must be finite and nonnegative".into(),
        ));
    }
    let identity: Mat2 = [[1.0, 0.0], [0.0, 1.0]];
    let mut shortest = vec![opts.norm.norm(&identity)];
    let mut out = Vec::with_capacity(n_max);
    let visited = AtomicU64::new(0);
    let mut previous: Option<Vec<usize>> = None;
    for n in 1..=n_max {
        // seed the incumbent with the previous argmin extended by each letter
        let mut seed = f64::INFINITY;
        if let Some(prev) = &previous {
            let base = prev
                .iter()
                .fold(identity, |acc, &k| mat_mul(&acc, &mats[k]));
            for a in mats {
                seed = seed.min(opts.norm.norm(&mat_mul(&base, a)));
            }
        }
        let incumbent = AtomicU64::new(seed.to_bits());
        let search = Search {
            mats,
            norm: opts.norm,
            n,
            prune: opts.prune,
            shortest: &shortest,
            incumbent: &incumbent,
            visited: &visited,
            max_visits: opts.limits.max_words,
        };
        let first_letters: Vec<usize> = (0..mats.len()).collect();
        let partials = par::map_slice(opts.exec, &first_letters, |&k| {
            let mut best = Best {
                norm: f64::INFINITY,
                word: Vec::new(),
            };
            let mut word = vec![k];
            search.dfs(&mats[k], &mut word, &mut best).map(|_| best)
        });
        let mut best = Best {
            norm: f64::INFINITY,
            word: Vec::new(),
        };
        for p in partials {
            let p = p?;
            if !p.word.is_empty() {
                best.offer(p.norm, &p.word);
            }
        }
        shortest.push(best.norm);
        out.push(SpectralEstimate {
            n,
            value: best.norm.powf(1.0 / n as f64),
            argmin_word: Word(best.word.clone()),
            norm: opts.norm.name().to_string(),
        });
        previous = Some(best.word);
    }
    Ok(out)
}

/// Lower spectral radius estimates of `{M(0), .., M(M-1)}` for `(μ, λ)`.
pub fn lower_spectral_radius(
    mu: &JointSurvivalDistribution,
    lambda: &JointSurvivalDistribution,
    n_max: usize,
    opts: &SpectralOptions,
) -> Result<Vec<SpectralEstimate>> {
    let mats: Vec<Mat2> = expectation_matrices(mu, lambda)?
        .iter()
        .map(|m| m.to_f64())
        .collect();
    lower_spectral_radius_family(&mats, n_max, opts)
}

/// Whether every correlation coefficient is strictly above one.
pub fn all_above_one(gamma: &CorrelationVector) -> bool {
    gamma.values.iter().all(|g| g > &one())
}

/// Whether some pair of cyclically consecutive coefficients is strictly below one.
pub fn consecutive_below_one(gamma: &CorrelationVector) -> Option<usize> {
    let m = gamma.len();
    (0..m).find(|&k| gamma.get(k) < &one() && gamma.get(k + 1) < &one())
}

/// Nonnegativity check used by tests and reports.
pub fn is_nonnegative(m: &ExpectationMatrix) -> bool {
    m.entries.iter().flatten().all(|x| !x.is_negative())
}
