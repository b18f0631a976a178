use std::collections::HashSet;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::counts::{counts_from_levels, triangle_counts, CountBackend};
use super::realization::Realization;
use crate::dgc::check_pair;
use crate::distribution::JointSurvivalDistribution;
use crate::error::{Error, Result};
use crate::letters::{LetterSet, Word};
use crate::limits::Limits;
use crate::spectra::{word_matrix, Side};

/// Number of pairs `(a, b)` from two sorted lists with `a - b = d`.
fn pairs_at_offset(a: &[u64], b: &[u64], d: i64) -> u64 {
    let mut j = 0;
    let mut count = 0;
    for &x in a {
        let target = x as i64 - d;
        if target < 0 {
            continue;
        }
        let target = target as u64;
        while j < b.len() && b[j] < target {
            j += 1;
        }
        if j == b.len() {
            break;
        }
        if b[j] == target {
            count += 1;
        }
    }
    count
}

/// The central-square process and, once it dies out, the two boundary
/// processes next to the origin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalSeries {
    /// `|F_1^n ∩ F_2^n|` for `n = 0 ..= depth`.
    pub central: Vec<u64>,
    /// First level where the central process is zero.
    pub extinction_level: Option<usize>,
    /// L triangles in `C^R_{0^n}` for `n = N ..= depth`.
    pub right_boundary: Vec<u64>,
    /// R triangles in `C^L_{(M-1)^n}` for `n = N ..= depth`.
    pub left_boundary: Vec<u64>,
}

pub fn critical_processes(
    r1: &Realization,
    r2: &Realization,
    depth: usize,
) -> Result<CriticalSeries> {
    if r1.alphabet_size != r2.alphabet_size {
        return Err(Error::AlphabetMismatch {
            left: r1.alphabet_size,
            right: r2.alphabet_size,
        });
    }
    let mut central = Vec::with_capacity(depth + 1);
    for n in 0..=depth {
        central.push(pairs_at_offset(r1.level(n)?, r2.level(n)?, 0));
    }
    let extinction_level = central.iter().position(|&z| z == 0);
    let (mut right_boundary, mut left_boundary) = (Vec::new(), Vec::new());
    if let Some(start) = extinction_level {
        for n in start..=depth {
            let (a, b) = (r1.level(n)?, r2.level(n)?);
            right_boundary.push(pairs_at_offset(a, b, 1));
            left_boundary.push(pairs_at_offset(a, b, -1));
        }
    }
    Ok(CriticalSeries {
        central,
        extinction_level,
        right_boundary,
        left_boundary,
    })
}

/// Greedy selection of pairwise unaligned triangles in one column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaPairs {
    pub left: usize,
    pub right: usize,
    /// At least `M` of each type.
    pub enough_for_growth: bool,
}

/// Triangles in column `C^side_word` whose squares share no row and no
/// column, chosen greedily by ascending row. A lower bound on the maximum.
pub fn unaligned_delta_pairs(
    r1: &Realization,
    r2: &Realization,
    side: Side,
    word: &Word,
) -> Result<DeltaPairs> {
    let m = r1.alphabet_size;
    if m != r2.alphabet_size {
        return Err(Error::AlphabetMismatch {
            left: m,
            right: r2.alphabet_size,
        });
    }
    let n = word.len();
    word.validate(m)?;
    let (a, b) = (r1.level(n)?, r2.level(n)?);
    let width = r1.width(n) as i64;
    let k = word.value(m) as i64;
    let shift = if side == Side::L { width } else { 0 };
    // (row, type, column): type 0 is L, 1 is R
    let mut squares: Vec<(u64, u8, u64)> = Vec::new();
    for (ty, d) in [(0u8, k + 1 - shift), (1u8, k - shift)] {
        for &x in a {
            let y = x as i64 - d;
            if y >= 0 && b.binary_search(&(y as u64)).is_ok() {
                squares.push((y as u64, ty, x));
            }
        }
    }
    squares.sort_unstable();
    let (mut rows, mut cols) = (HashSet::new(), HashSet::new());
    let mut picked = [0usize; 2];
    for (row, ty, col) in squares {
        if !rows.contains(&row) && !cols.contains(&col) {
            rows.insert(row);
            cols.insert(col);
            picked[ty as usize] += 1;
        }
    }
    Ok(DeltaPairs {
        left: picked[0],
        right: picked[1],
        enough_for_growth: picked[0] >= m && picked[1] >= m,
    })
}

/// Outcome of running the two deterministic sets `X^n`, `Y^n` down a column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthCheck {
    pub word: Word,
    /// Realized counts, rows `C^L_w`, `C^R_w`, columns L, R.
    pub realized: [[u64; 2]; 2],
    pub predicted: [[u64; 2]; 2],
    pub column_sums: [u64; 2],
    /// `2^(occurrences of k in the word)`.
    pub lower_bound: u64,
    pub matches_prediction: bool,
    pub passes: bool,
    pub eta: String,
}

pub fn deterministic_growth_check(
    x: &LetterSet,
    y: &LetterSet,
    k: usize,
    word: &Word,
    limits: &Limits,
) -> Result<GrowthCheck> {
    let m = x.alphabet_size();
    let pair = check_pair(k, x, y)?;
    if !pair.dg1 || !pair.dg2 {
        return Err(Error::HypothesisNotMet(format!(
            "(X, Y) is not a growth witness at k={k}"
        )));
    }
    word.validate(m)?;
    let n = word.len();
    let width = (m as u64)
        .checked_pow(n as u32)
        .filter(|w| *w <= limits.max_level_width)
        .ok_or_else(|| Error::ResourceLimitExceeded(format!("alphabet {m}^{n} is too large")))?;
    let words_of = |s: &LetterSet| -> Result<Vec<u64>> {
        let size = (s.len() as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
        if size > limits.max_survivors {
            return Err(Error::ResourceLimitExceeded(format!(
                "{size} survivors at depth {n}"
            )));
        }
        let mut out = vec![0u64];
        for _ in 0..n {
            out = out
                .iter()
                .flat_map(|w| s.iter().map(move |l| w * m as u64 + l as u64))
                .collect();
        }
        Ok(out)
    };
    let (a, b) = (words_of(x)?, words_of(y)?);
    debug_assert!(a.iter().all(|&v| v < width));
    let dc = counts_from_levels(m, n, &a, &b, CountBackend::Auto)?;
    let mut realized = [[0u64; 2]; 2];
    for side in [Side::L, Side::R] {
        let tc = triangle_counts(&dc, side, word)?;
        let t = [tc.left, tc.right];
        realized[side.index()] = t;
    }
    let predicted = if n == 0 {
        [[1, 0], [0, 1]]
    } else {
        let mu = JointSurvivalDistribution::deterministic(x.clone())?;
        let lambda = JointSurvivalDistribution::deterministic(y.clone())?;
        let mat = word_matrix(&mu, &lambda, word)?;
        let e = mat.entries();
        let conv = |r: &crate::rational::Rational| -> Result<u64> {
            r.is_integer()
                .then(|| r.to_integer().to_u64())
                .flatten()
                .ok_or_else(|| {
                    Error::InvariantViolation("deterministic expectation is not an integer".into())
                })
        };
        [
            [conv(&e[0][0])?, conv(&e[0][1])?],
            [conv(&e[1][0])?, conv(&e[1][1])?],
        ]
    };
    let column_sums = [
        realized[0][0] + realized[1][0],
        realized[0][1] + realized[1][1],
    ];
    let occurrences = word.count(k) as u32;
    let lower_bound = 1u64.checked_shl(occurrences).unwrap_or(u64::MAX);
    let matches_prediction = realized == predicted;
    Ok(GrowthCheck {
        word: word.clone(),
        realized,
        predicted,
        column_sums,
        lower_bound,
        matches_prediction,
        passes: matches_prediction && column_sums.iter().all(|&c| c >= lower_bound),
        eta: format!("2^(1/{m})"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offset_pairs() {
        assert_eq!(pairs_at_offset(&[1, 2, 5], &[0, 1, 4], 1), 3);
        assert_eq!(pairs_at_offset(&[0, 3], &[1, 4], -1), 2);
        assert_eq!(pairs_at_offset(&[], &[1], 0), 0);
    }

    #[test]
    fn distinct_rows_and_columns_all_kept() {
        let r1 = Realization::from_leaves(8, 1, vec![0, 1, 2]).unwrap();
        let r2 = Realization::from_leaves(8, 1, vec![1, 2, 3]).unwrap();
        // offset -1 is the L diagonal of column C^L_6; its squares take rows 1, 2, 3 first
        let d = unaligned_delta_pairs(&r1, &r2, Side::L, &Word::letter(6)).unwrap();
        assert_eq!((d.left, d.right), (3, 0));
    }

    #[test]
    fn shared_row_keeps_one() {
        // squares (1,0) and (2,1) share nothing; (2,0) shares row 0 with (1,0)
        let r1 = Realization::from_leaves(3, 1, vec![1, 2]).unwrap();
        let r2 = Realization::from_leaves(3, 1, vec![0]).unwrap();
        // column C^R_1 holds the R triangle of offset 1 and the L triangle of offset 2
        let d = unaligned_delta_pairs(&r1, &r2, Side::R, &Word::letter(1)).unwrap();
        assert_eq!(d.left + d.right, 1);
    }

    #[test]
    fn word_of_zeros_doubles() {
        let x = LetterSet::from_bit_string("1111000").unwrap();
        let g =
            deterministic_growth_check(&x, &x, 0, &Word::repeat(0, 3), &Limits::default()).unwrap();
        assert!(g.passes, "{g:?}");
        assert!(g.column_sums.iter().all(|&c| c >= 8));
    }
}
