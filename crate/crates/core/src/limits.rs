//! Resource caps shared by the enumerating and sampling routines.

use serde::{Deserialize, Serialize};

/// Environment variable prefix for overriding the defaults, e.g.
/// `CANTORDIFF_MAX_ATOMS=2000000`.
pub const ENV_PREFIX: &str = "CANTORDIFF_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Limits {
    /// Largest number of atoms a materialized distribution may hold.
    pub max_atoms: usize,
    /// Budget of `(X, Y, e)` coincidence evaluations for witness search.
    pub search_budget: u64,
    /// Largest total number of survivors (all levels) in one realization.
    pub max_survivors: u64,
    /// Largest `M^n` accepted by the dense diagonal-count backends.
    pub max_level_width: u64,
    /// Largest number of nodes the spectral word enumeration may visit.
    pub max_words: u64,
    /// Largest side length, in pixels, of a rendered image.
    pub max_pixels: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_atoms: 1_000_000,
            search_budget: 10_000_000,
            max_survivors: 20_000_000,
            max_level_width: 1 << 26,
            max_words: 200_000_000,
            max_pixels: 8192,
        }
    }
}

impl Limits {
    /// Defaults overridden by any `CANTORDIFF_*` variables that parse.
    pub fn from_env() -> Self {
        fn read<T: std::str::FromStr>(name: &str) -> Option<T> {
            std::env::var(format!("{ENV_PREFIX}{name}"))
                .ok()?
                .trim()
                .parse()
                .ok()
        }
        let mut l = Limits::default();
        if let Some(v) = read("MAX_ATOMS") {
            l.max_atoms = v;
        }
        if let Some(v) = read("SEARCH_BUDGET") {
            l.search_budget = v;
        }
        if let Some(v) = read("MAX_SURVIVORS") {
            l.max_survivors = v;
        }
        if let Some(v) = read("MAX_LEVEL_WIDTH") {
            l.max_level_width = v;
        }
        if let Some(v) = read("MAX_WORDS") {
            l.max_words = v;
        }
        if let Some(v) = read("MAX_PIXELS") {
            l.max_pixels = v;
        }
        l
    }
}
