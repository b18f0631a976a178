//! Alphabets, letter sets (subsets of the alphabet, equivalently binary
//! strings) and words (letter sequences addressing M-adic subintervals).

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};

/// The alphabet `{0, .., M-1}` of an M-adic construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    size: usize,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::ParameterOutOfRange(format!(
                "alphabet size must be at least 2, got {size}"
            )));
        }
        Ok(Alphabet { size })
    }

    pub fn size(self) -> usize {
        self.size
    }

    pub fn letters(self) -> std::ops::Range<usize> {
        0..self.size
    }

    /// Size of the order-`n` alphabet, `M^n`, if it fits in a `u64`.
    pub fn order_size(self, n: u32) -> Option<u64> {
        (self.size as u64).checked_pow(n)
    }
}

/// A subset of `{0, .., size-1}` stored as a little-endian bitset. Alphabets of
/// at most 64 letters fit in one inline word.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LetterSet {
    size: usize,
    words: SmallVec<[u64; 1]>,
}

fn word_count(size: usize) -> usize {
    size.div_ceil(64).max(1)
}

fn low_mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

impl LetterSet {
    pub fn empty(size: usize) -> Self {
        LetterSet {
            size,
            words: smallvec![0; word_count(size)],
        }
    }

    pub fn full(size: usize) -> Self {
        let mut s = Self::empty(size);
        let n = s.words.len();
        for (i, w) in s.words.iter_mut().enumerate() {
            *w = if i + 1 < n {
                u64::MAX
            } else {
                low_mask(size - 64 * i)
            };
        }
        if size == 0 {
            s.words[0] = 0;
        }
        s
    }

    pub fn from_members<I: IntoIterator<Item = usize>>(size: usize, members: I) -> Result<Self> {
        let mut s = Self::empty(size);
        for m in members {
            if m >= size {
                return Err(Error::MemberOutOfRange {
                    letter: m,
                    alphabet_size: size,
                });
            }
            s.insert(m);
        }
        Ok(s)
    }

    /// Builds a set of an alphabet of at most 64 letters from a bitmask.
    pub fn from_mask(size: usize, mask: u64) -> Self {
        debug_assert!(size <= 64);
        LetterSet {
            size,
            words: smallvec![mask & low_mask(size)],
        }
    }

    /// Parses the binary-string notation: character `i` is `1` iff `i` is a
    /// member. Whitespace and `|` separators are ignored.
    pub fn from_bit_string(s: &str) -> Result<Self> {
        let bits: Vec<bool> = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '|')
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!(
                    "invalid character {other:?} in bit string"
                ))),
            })
            .collect::<Result<_>>()?;
        let mut set = Self::empty(bits.len());
        for (i, b) in bits.iter().enumerate() {
            if *b {
                set.insert(i);
            }
        }
        Ok(set)
    }

    pub fn to_bit_string(&self) -> String {
        (0..self.size)
            .map(|i| if self.contains(i) { '1' } else { '0' })
            .collect()
    }

    pub fn alphabet_size(&self) -> usize {
        self.size
    }

    pub fn mask(&self) -> Option<u64> {
        (self.size <= 64).then(|| self.words[0])
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.size && (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    /// Adds `i`; panics if `i` is outside the alphabet.
    pub fn insert(&mut self, i: usize) {
        assert!(
            i < self.size,
            "letter {i} outside alphabet of size {}",
            self.size
        );
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        if i < self.size {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let b = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }

    pub fn members(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn is_subset(&self, other: &LetterSet) -> bool {
        self.size == other.size
            && self
                .words
                .iter()
                .zip(&other.words)
                .all(|(a, b)| a & !b == 0)
    }

    pub fn union(&self, other: &LetterSet) -> LetterSet {
        debug_assert_eq!(self.size, other.size);
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a | b)
            .collect();
        LetterSet {
            size: self.size,
            words,
        }
    }

    /// Number of common members.
    pub fn intersection_len(&self, other: &LetterSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// The cyclic shift `σ^k`: position `i` of the result holds position
    /// `i + k (mod M)` of `self`.
    pub fn rotate(&self, k: usize) -> LetterSet {
        let m = self.size;
        if m == 0 {
            return self.clone();
        }
        let k = k % m;
        if k == 0 {
            return self.clone();
        }
        if let Some(x) = self.mask() {
            let rotated = (x >> k) | (x << (m - k));
            return LetterSet::from_mask(m, rotated);
        }
        let mut out = LetterSet::empty(m);
        for j in self.iter() {
            out.insert((j + m - k) % m);
        }
        out
    }

    /// Re-indexes the members into a larger alphabet as `offset + member`.
    pub fn embed(&self, new_size: usize, offset: usize) -> Result<LetterSet> {
        LetterSet::from_members(new_size, self.iter().map(|i| i + offset))
    }
}

impl Ord for LetterSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.size
            .cmp(&other.size)
            .then_with(|| self.iter().cmp(other.iter()))
    }
}

impl PartialOrd for LetterSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for LetterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bit_string())
    }
}

impl fmt::Debug for LetterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LetterSet({})", self.to_bit_string())
    }
}

impl Serialize for LetterSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_bit_string())
    }
}

impl<'de> Deserialize<'de> for LetterSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        LetterSet::from_bit_string(&s).map_err(serde::de::Error::custom)
    }
}

/// Indicator correlation `γ_e(X, Y) = Σ_i 1_Y(i) 1_X(i+e)`: the number of
/// coincidences between `σ^e(X)` and `Y`.
pub fn gamma_indicator(x: &LetterSet, y: &LetterSet, e: usize) -> Result<usize> {
    if x.size != y.size {
        return Err(Error::AlphabetMismatch {
            left: x.size,
            right: y.size,
        });
    }
    if e >= x.size {
        return Err(Error::IndexOutOfRange {
            index: e,
            alphabet_size: x.size,
        });
    }
    Ok(x.rotate(e).intersection_len(y))
}

/// All indicator correlations `γ_0(X,Y), .., γ_{M-1}(X,Y)` at once.
pub fn gamma_profile(x: &LetterSet, y: &LetterSet) -> Result<Vec<u32>> {
    if x.size != y.size {
        return Err(Error::AlphabetMismatch {
            left: x.size,
            right: y.size,
        });
    }
    let m = x.size;
    let mut out = vec![0u32; m];
    if let (Some(xm), Some(ym)) = (x.mask(), y.mask()) {
        for (e, slot) in out.iter_mut().enumerate() {
            let r = if e == 0 {
                xm
            } else {
                (xm >> e) | (xm << (m - e))
            };
            *slot = (r & ym & low_mask(m)).count_ones();
        }
        return Ok(out);
    }
    // a - b (mod M) over all member pairs
    let ys = y.members();
    for a in x.iter() {
        for &b in &ys {
            out[(a + m - b) % m] += 1;
        }
    }
    Ok(out)
}

/// A finite sequence of letters `k_1 .. k_n`, read as the base-M integer
/// `Σ k_j M^{n-j}` when addressing level-n intervals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn new(letters: Vec<usize>) -> Self {
        Word(letters)
    }

    pub fn letter(k: usize) -> Self {
        Word(vec![k])
    }

    pub fn repeat(k: usize, n: usize) -> Self {
        Word(vec![k; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn validate(&self, alphabet_size: usize) -> Result<()> {
        match self.0.iter().find(|&&k| k >= alphabet_size) {
            Some(&k) => Err(Error::IndexOutOfRange {
                index: k,
                alphabet_size,
            }),
            None => Ok(()),
        }
    }

    pub fn value(&self, alphabet_size: usize) -> u64 {
        self.0
            .iter()
            .fold(0u64, |acc, &k| acc * alphabet_size as u64 + k as u64)
    }

    pub fn from_value(mut value: u64, alphabet_size: usize, len: usize) -> Self {
        let mut letters = vec![0; len];
        for slot in letters.iter_mut().rev() {
            *slot = (value % alphabet_size as u64) as usize;
            value /= alphabet_size as u64;
        }
        Word(letters)
    }

    pub fn count(&self, k: usize) -> usize {
        self.0.iter().filter(|&&l| l == k).count()
    }

    /// Parses `"0,1,2"`, `"0.1.2"` or, for single-digit letters, `"012"`.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.is_empty() {
            return Ok(Word::default());
        }
        let parts: Vec<&str> = if t.contains(',') {
            t.split(',').collect()
        } else if t.contains('.') {
            t.split('.').collect()
        } else {
            t.split("").filter(|p| !p.is_empty()).collect()
        };
        parts
            .iter()
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad word {s:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&k| k < 10) {
            for k in &self.0 {
                write!(f, "{k}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
            f.write_str(&parts.join("."))
        }
    }
}
