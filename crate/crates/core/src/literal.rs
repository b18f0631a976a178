//! Text format for distributions: `M` plus a list of atoms with exact masses.
//!
//! ```toml
//! M = 2
//! atoms = [
//!   { members = [0, 1], mass = "1/2" },
//!   { members = [1], mass = "1/2" },
//! ]
//! ```
//!
//! JSON with the same fields is accepted too. Unallocated mass goes to the
//! empty set.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distribution::JointSurvivalDistribution;
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::rational::{format_rational, parse_rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomLiteral {
    pub members: Vec<usize>,
    pub mass: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributionLiteral {
    #[serde(rename = "M")]
    pub alphabet_size: usize,
    #[serde(default)]
    pub atoms: Vec<AtomLiteral>,
}

impl DistributionLiteral {
    pub fn to_distribution(&self) -> Result<JointSurvivalDistribution> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Ok((a.members.clone(), parse_rational(&a.mass)?)))
            .collect::<Result<Vec<_>>>()?;
        JointSurvivalDistribution::from_member_lists(self.alphabet_size, &atoms)
    }

    pub fn from_distribution(dist: &JointSurvivalDistribution, limits: &Limits) -> Result<Self> {
        let atoms = dist
            .atoms(limits)?
            .into_iter()
            .map(|(s, w)| AtomLiteral {
                members: s.members(),
                mass: format_rational(&w),
            })
            .collect();
        Ok(DistributionLiteral {
            alphabet_size: dist.alphabet_size(),
            atoms,
        })
    }

    /// Parses JSON when the text starts with `{`, TOML otherwise.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
        } else {
            toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("literal serializes")
    }
}
