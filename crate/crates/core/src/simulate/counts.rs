use std::cell::RefCell;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::realization::Realization;
use crate::error::{Error, Result};
use crate::letters::Word;
use crate::spectra::Side;

/// Number of survivor pairs `(a, b) ∈ F_1^n × F_2^n` with `a - b = d`, for
/// `d ∈ [1 - M^n, M^n - 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalCounts {
    pub alphabet_size: usize,
    pub depth: usize,
    pub width: u64,
    /// Entry `d + width - 1` holds the count at offset `d`.
    counts: Vec<u64>,
}

impl DiagonalCounts {
    pub fn get(&self, d: i64) -> u64 {
        let idx = d + self.width as i64 - 1;
        if idx < 0 {
            return 0;
        }
        self.counts.get(idx as usize).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `(d, count)` for every offset with a positive count.
    pub fn nonzero(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        let w = self.width as i64;
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 0)
            .map(move |(i, c)| (i as i64 - w + 1, *c))
    }

    pub fn offsets(&self) -> std::ops::RangeInclusive<i64> {
        1 - self.width as i64..=self.width as i64 - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountBackend {
    /// Sparse for small products, FFT otherwise.
    #[default]
    Auto,
    Sparse,
    Fft,
}

impl std::str::FromStr for CountBackend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(CountBackend::Auto),
            "sparse" => Ok(CountBackend::Sparse),
            "fft" => Ok(CountBackend::Fft),
            other => Err(Error::Parse(format!("unknown backend {other:?}"))),
        }
    }
}

/// Level widths above this are refused by the FFT backend.
pub const FFT_MAX_WIDTH: u64 = 1 << 26;

pub fn diagonal_counts(r1: &Realization, r2: &Realization, n: usize) -> Result<DiagonalCounts> {
    diagonal_counts_with(r1, r2, n, CountBackend::Auto)
}

pub fn diagonal_counts_with(
    r1: &Realization,
    r2: &Realization,
    n: usize,
    backend: CountBackend,
) -> Result<DiagonalCounts> {
    if r1.alphabet_size != r2.alphabet_size {
        return Err(Error::AlphabetMismatch {
            left: r1.alphabet_size,
            right: r2.alphabet_size,
        });
    }
    let (a, b) = (r1.level(n)?, r2.level(n)?);
    counts_from_levels(r1.alphabet_size, n, a, b, backend)
}

pub(crate) fn counts_from_levels(
    alphabet_size: usize,
    depth: usize,
    a: &[u64],
    b: &[u64],
    backend: CountBackend,
) -> Result<DiagonalCounts> {
    let width = (alphabet_size as u64)
        .checked_pow(depth as u32)
        .ok_or_else(|| {
            Error::ResourceLimitExceeded(format!("{alphabet_size}^{depth} overflows"))
        })?;
    let len = fft_len(width);
    let use_fft = match backend {
        CountBackend::Sparse => false,
        CountBackend::Fft => true,
        CountBackend::Auto => {
            let pairs = a.len() as f64 * b.len() as f64;
            width <= FFT_MAX_WIDTH && pairs > 4.0 * len as f64 * (len as f64).log2()
        }
    };
    let counts = if use_fft {
        if width > FFT_MAX_WIDTH {
            return Err(Error::ResourceLimitExceeded(format!(
                "FFT backend refuses width {width} above 2^26"
            )));
        }
        fft_counts(width, len, a, b)?
    } else {
        let mut counts = vec![0u64; (2 * width - 1) as usize];
        for &x in a {
            let base = x + width - 1;
            for &y in b {
                counts[(base - y) as usize] += 1;
            }
        }
        counts
    };
    Ok(DiagonalCounts {
        alphabet_size,
        depth,
        width,
        counts,
    })
}

fn fft_len(width: u64) -> usize {
    (2 * width - 1).next_power_of_two() as usize
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Cross-correlation of the two indicator vectors. Both real signals ride in
/// one complex transform and are separated by conjugate symmetry.
fn fft_counts(width: u64, len: usize, a: &[u64], b: &[u64]) -> Result<Vec<u64>> {
    let (forward, inverse) = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(len), p.plan_fft_inverse(len))
    });
    let mut z = vec![Complex::new(0.0, 0.0); len];
    for &x in a {
        z[x as usize].re = 1.0;
    }
    for &y in b {
        z[y as usize].im = 1.0;
    }
    forward.process(&mut z);
    // A[k] = (Z[k] + conj Z[-k]) / 2, B[k] = (Z[k] - conj Z[-k]) / 2i,
    // and A[k] conj B[k] transforms back to Σ_y a[y + d] b[y].
    let mut prod = vec![Complex::new(0.0, 0.0); len];
    for k in 0..len {
        let zk = z[k];
        let zn = z[(len - k) % len].conj();
        let fa = (zk + zn) * 0.5;
        let fb = (zk - zn) * Complex::new(0.0, -0.5);
        prod[k] = fa * fb.conj();
    }
    inverse.process(&mut prod);
    let scale = 1.0 / len as f64;
    let w = width as usize;
    let mut counts = vec![0u64; 2 * w - 1];
    for (i, slot) in counts.iter_mut().enumerate() {
        // offset d = i - (w - 1); negative offsets wrap to the top of the buffer
        let d = i as isize - (w as isize - 1);
        let idx = if d >= 0 {
            d as usize
        } else {
            (len as isize + d) as usize
        };
        let v = prod[idx].re * scale;
        let r = v.round();
        if (v - r).abs() > 0.25 || r < 0.0 {
            return Err(Error::InvariantViolation(format!(
                "FFT count {v} at offset {d} is not an integer"
            )));
        }
        *slot = r as u64;
    }
    Ok(counts)
}

/// Triangle counts of one column, by triangle type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TriangleCounts {
    pub left: u64,
    pub right: u64,
}

impl TriangleCounts {
    pub fn get(&self, side: Side) -> u64 {
        match side {
            Side::L => self.left,
            Side::R => self.right,
        }
    }
}

/// L and R triangles in column `C^side_word` at the depth of `dc`.
pub fn triangle_counts(dc: &DiagonalCounts, side: Side, word: &Word) -> Result<TriangleCounts> {
    if word.len() != dc.depth {
        return Err(Error::WordLengthMismatch {
            expected: dc.depth,
            got: word.len(),
        });
    }
    word.validate(dc.alphabet_size)?;
    let k = word.value(dc.alphabet_size) as i64;
    let shift = match side {
        Side::R => 0,
        Side::L => dc.width as i64,
    };
    Ok(TriangleCounts {
        left: dc.get(k + 1 - shift),
        right: dc.get(k - shift),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(m: usize, n: usize, a: &[u64], b: &[u64], backend: CountBackend) -> DiagonalCounts {
        counts_from_levels(m, n, a, b, backend).unwrap()
    }

    #[test]
    fn full_level_one() {
        for backend in [CountBackend::Sparse, CountBackend::Fft] {
            let dc = counts(2, 1, &[0, 1], &[0, 1], backend);
            assert_eq!((dc.get(-1), dc.get(0), dc.get(1)), (1, 2, 1));
            assert_eq!(dc.get(2), 0);
        }
    }

    #[test]
    fn single_pair_offset() {
        for backend in [CountBackend::Sparse, CountBackend::Fft] {
            let dc = counts(2, 2, &[0], &[3], backend);
            assert_eq!(dc.get(-3), 1);
            assert_eq!(dc.total(), 1);
            let dc = counts(2, 2, &[3], &[0], backend);
            assert_eq!(dc.get(3), 1);
        }
    }

    #[test]
    fn backends_agree_on_dense_sets() {
        let a: Vec<u64> = (0..243).filter(|x| x % 3 != 1 || x % 7 == 0).collect();
        let b: Vec<u64> = (0..243).filter(|x| x % 5 != 2).collect();
        assert_eq!(
            counts(3, 5, &a, &b, CountBackend::Sparse),
            counts(3, 5, &a, &b, CountBackend::Fft)
        );
    }

    #[test]
    fn triangles_read_the_right_diagonals() {
        let dc = counts(2, 1, &[0, 1], &[0, 1], CountBackend::Sparse);
        let r0 = triangle_counts(&dc, Side::R, &Word::letter(0)).unwrap();
        assert_eq!((r0.left, r0.right), (1, 2));
        let l1 = triangle_counts(&dc, Side::L, &Word::letter(1)).unwrap();
        assert_eq!((l1.left, l1.right), (2, 1));
        assert!(matches!(
            triangle_counts(&dc, Side::R, &Word::new(vec![0, 0])),
            Err(Error::WordLengthMismatch { .. })
        ));
    }
}
