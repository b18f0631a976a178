use serde::{Deserialize, Serialize};

use super::counts::DiagonalCounts;

/// A maximal block of consecutive occupied columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Run {
    pub start: i64,
    pub len: u64,
}

/// Which of the `2 M^n` level-n columns meet the projected product set.
/// Column `c ∈ [-M^n, M^n)` is `C^R_c` for `c ≥ 0` and `C^L_{c + M^n}` otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccupancyProfile {
    pub depth: usize,
    pub width: u64,
    pub occupied_columns: u64,
    pub longest_run: u64,
    pub full: bool,
    pub runs: Vec<Run>,
}

impl OccupancyProfile {
    pub fn is_occupied(&self, c: i64) -> bool {
        let i = self.runs.partition_point(|r| r.start + r.len as i64 <= c);
        self.runs.get(i).is_some_and(|r| r.start <= c)
    }

    pub fn column_count(&self) -> u64 {
        2 * self.width
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("profile serializes")
    }
}

pub fn occupancy_profile(dc: &DiagonalCounts) -> OccupancyProfile {
    let w = dc.width as i64;
    let mut runs: Vec<Run> = Vec::new();
    let mut occupied_columns = 0;
    for c in -w..w {
        if dc.get(c) + dc.get(c + 1) == 0 {
            continue;
        }
        occupied_columns += 1;
        match runs.last_mut() {
            Some(r) if r.start + r.len as i64 == c => r.len += 1,
            _ => runs.push(Run { start: c, len: 1 }),
        }
    }
    let longest_run = runs.iter().map(|r| r.len).max().unwrap_or(0);
    OccupancyProfile {
        depth: dc.depth,
        width: dc.width,
        occupied_columns,
        longest_run,
        full: occupied_columns == 2 * dc.width,
        runs,
    }
}

#[cfg(test)]
mod tests {
    use super::super::counts::{counts_from_levels, CountBackend};
    use super::*;

    fn profile(m: usize, n: usize, a: &[u64], b: &[u64]) -> OccupancyProfile {
        occupancy_profile(&counts_from_levels(m, n, a, b, CountBackend::Sparse).unwrap())
    }

    #[test]
    fn full_product_is_one_run() {
        let all: Vec<u64> = (0..9).collect();
        let p = profile(3, 2, &all, &all);
        assert!(p.full);
        assert_eq!(p.runs, vec![Run { start: -9, len: 18 }]);
    }

    #[test]
    fn single_square_meets_two_columns() {
        let p = profile(3, 2, &[0], &[0]);
        assert_eq!(p.runs, vec![Run { start: -1, len: 2 }]);
        assert!(p.is_occupied(-1) && p.is_occupied(0) && !p.is_occupied(1) && !p.is_occupied(-2));
    }

    #[test]
    fn empty_product() {
        let p = profile(3, 2, &[], &[4]);
        assert_eq!(p.occupied_columns, 0);
        assert_eq!(p.longest_run, 0);
        assert!(!p.full);
    }
}
