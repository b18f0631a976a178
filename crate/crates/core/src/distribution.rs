//! Joint survival distributions: probability measures on the subsets of the
//! alphabet that decide which children of a surviving interval survive.
//!
//! Three representations share one interface. Explicit atom lists hold
//! arbitrary measures; the correlated family (uniform over m-subsets, plus an
//! empty-set mass) and the independent family (product measure) are stored by
//! their parameters and only enumerated on request.

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::letters::{Alphabet, LetterSet};
use crate::limits::Limits;
use crate::rational::{binomial, format_rational, one, zero, Rational};

/// Per-letter survival probabilities `p_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginalVector(#[serde(with = "crate::rational::serde_rational_vec")] Vec<Rational>);

impl MarginalVector {
    pub fn new(values: Vec<Rational>) -> Result<Self> {
        Alphabet::new(values.len())?;
        if let Some(bad) = values.iter().find(|v| v.is_negative() || **v > one()) {
            return Err(Error::ParameterOutOfRange(format!(
                "marginal probability {} is not in [0, 1]",
                format_rational(bad)
            )));
        }
        Ok(MarginalVector(values))
    }

    pub fn uniform(size: usize, p: Rational) -> Result<Self> {
        Self::new(vec![p; size])
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

/// How a distribution is represented.
#[derive(Debug, Clone, PartialEq)]
pub enum DistributionKind {
    /// Positive-mass atoms sorted by [`LetterSet`] order, the empty set
    /// included when it carries mass.
    Atoms(Vec<(LetterSet, Rational)>),
    /// Every m-subset carries `atom_mass`, the empty set `empty_mass`.
    UniformSubsets {
        m: usize,
        empty_mass: Rational,
        atom_mass: Rational,
    },
    /// Letters survive independently with the given marginals.
    Independent(MarginalVector),
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointSurvivalDistribution {
    alphabet_size: usize,
    kind: DistributionKind,
}

/// Anything that assigns a probability to subsets of an alphabet: first-order
/// distributions as well as their higher-order views.
pub trait SurvivalLaw {
    fn alphabet_size(&self) -> usize;
    fn mass(&self, set: &LetterSet) -> Rational;
    fn has_positive_mass(&self, set: &LetterSet) -> bool {
        self.mass(set).is_positive()
    }
}

/// Marginal support and whether the measure charges it.
#[derive(Debug, Clone, PartialEq)]
pub struct JscReport {
    pub marginal_support: LetterSet,
    pub support_mass: Rational,
    pub satisfied: bool,
}

/// `(M, m)`-combinations in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut current: Option<Vec<usize>> = (k <= n).then(|| (0..k).collect());
    std::iter::from_fn(move || {
        let out = current.clone()?;
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                current = None;
                break;
            }
            i -= 1;
            if next[i] < n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                current = Some(next);
                break;
            }
        }
        Some(out)
    })
}

impl JointSurvivalDistribution {
    /// Validated distribution from explicit atoms; any mass deficit goes to
    /// the empty set and duplicate atoms are merged.
    pub fn make_distribution(
        alphabet_size: usize,
        atoms: Vec<(LetterSet, Rational)>,
    ) -> Result<Self> {
        Alphabet::new(alphabet_size)?;
        let mut merged: HashMap<LetterSet, Rational> = HashMap::new();
        let mut total = zero();
        for (set, mass) in atoms {
            if set.alphabet_size() != alphabet_size {
                return Err(Error::AlphabetMismatch {
                    left: alphabet_size,
                    right: set.alphabet_size(),
                });
            }
            if mass.is_negative() {
                return Err(Error::NegativeMass {
                    atom: set.to_bit_string(),
                    mass: format_rational(&mass),
                });
            }
            total += &mass;
            *merged.entry(set).or_insert_with(zero) += mass;
        }
        if total > one() {
            return Err(Error::MassExceedsOne {
                total: format_rational(&total),
            });
        }
        let deficit = one() - total;
        if deficit.is_positive() {
            *merged
                .entry(LetterSet::empty(alphabet_size))
                .or_insert_with(zero) += deficit;
        }
        let mut atoms: Vec<_> = merged
            .into_iter()
            .filter(|(_, m)| m.is_positive())
            .collect();
        atoms.sort();
        Ok(JointSurvivalDistribution {
            alphabet_size,
            kind: DistributionKind::Atoms(atoms),
        })
    }

    /// Same as [`make_distribution`](Self::make_distribution) with atoms given
    /// as member lists.
    pub fn from_member_lists(
        alphabet_size: usize,
        atoms: &[(Vec<usize>, Rational)],
    ) -> Result<Self> {
        let atoms = atoms
            .iter()
            .map(|(members, mass)| {
                Ok((
                    LetterSet::from_members(alphabet_size, members.iter().copied())?,
                    mass.clone(),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::make_distribution(alphabet_size, atoms)
    }

    /// Point mass on `set`.
    pub fn deterministic(set: LetterSet) -> Result<Self> {
        let m = set.alphabet_size();
        Self::make_distribution(m, vec![(set, one())])
    }

    /// `(m, M, p)`-percolation: with probability `pM/m` a uniformly chosen
    /// m-subset survives, otherwise nothing does.
    pub fn make_correlated(m: usize, alphabet_size: usize, p: Rational) -> Result<Self> {
        Alphabet::new(alphabet_size)?;
        if m == 0 || m > alphabet_size {
            return Err(Error::ParameterOutOfRange(format!(
                "m = {m} is not in [1, {alphabet_size}]"
            )));
        }
        let p_max = Rational::new(m.into(), alphabet_size.into());
        if !p.is_positive() || p > p_max {
            return Err(Error::ParameterOutOfRange(format!(
                "p = {} is not in (0, {}]",
                format_rational(&p),
                format_rational(&p_max)
            )));
        }
        let empty_mass = one() - &p / &p_max;
        Ok(Self::uniform_subsets(m, alphabet_size, empty_mass))
    }

    /// Correlated percolation parameterized by the empty-set mass instead of p.
    pub fn correlated_with_empty_mass(
        m: usize,
        alphabet_size: usize,
        empty_mass: Rational,
    ) -> Result<Self> {
        if empty_mass.is_negative() || empty_mass >= one() {
            return Err(Error::ParameterOutOfRange(format!(
                "empty-set mass {} is not in [0, 1)",
                format_rational(&empty_mass)
            )));
        }
        let p = (one() - empty_mass) * Rational::new(m.into(), alphabet_size.into());
        Self::make_correlated(m, alphabet_size, p)
    }

    fn uniform_subsets(m: usize, alphabet_size: usize, empty_mass: Rational) -> Self {
        let atom_mass = (one() - &empty_mass) / binomial(alphabet_size, m);
        JointSurvivalDistribution {
            alphabet_size,
            kind: DistributionKind::UniformSubsets {
                m,
                empty_mass,
                atom_mass,
            },
        }
    }

    /// Product measure with the given marginals.
    pub fn make_independent(p: MarginalVector) -> Self {
        JointSurvivalDistribution {
            alphabet_size: p.len(),
            kind: DistributionKind::Independent(p),
        }
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn kind(&self) -> &DistributionKind {
        &self.kind
    }

    pub fn mass(&self, set: &LetterSet) -> Rational {
        if set.alphabet_size() != self.alphabet_size {
            return zero();
        }
        match &self.kind {
            DistributionKind::Atoms(atoms) => match atoms.binary_search_by(|(s, _)| s.cmp(set)) {
                Ok(i) => atoms[i].1.clone(),
                Err(_) => zero(),
            },
            DistributionKind::UniformSubsets {
                m,
                empty_mass,
                atom_mass,
            } => {
                let n = set.len();
                if n == 0 {
                    empty_mass.clone()
                } else if n == *m {
                    atom_mass.clone()
                } else {
                    zero()
                }
            }
            DistributionKind::Independent(p) => {
                let mut acc = one();
                for (i, pi) in p.values().iter().enumerate() {
                    if set.contains(i) {
                        acc *= pi;
                    } else {
                        acc *= one() - pi;
                    }
                    if acc.is_zero() {
                        break;
                    }
                }
                acc
            }
        }
    }

    pub fn empty_mass(&self) -> Rational {
        self.mass(&LetterSet::empty(self.alphabet_size))
    }

    /// `p_i = Σ_{X ∋ i} μ(X)`.
    pub fn marginals(&self) -> MarginalVector {
        let m = self.alphabet_size;
        let values = match &self.kind {
            DistributionKind::Atoms(atoms) => {
                let mut v = vec![zero(); m];
                for (set, mass) in atoms {
                    for i in set.iter() {
                        v[i] += mass;
                    }
                }
                v
            }
            DistributionKind::UniformSubsets {
                m: k, empty_mass, ..
            } => {
                let p = (one() - empty_mass) * Rational::new((*k).into(), m.into());
                vec![p; m]
            }
            DistributionKind::Independent(p) => p.values().to_vec(),
        };
        MarginalVector(values)
    }

    /// Number of positive-mass sets, without enumerating them.
    pub fn support_len(&self) -> u128 {
        match &self.kind {
            DistributionKind::Atoms(atoms) => atoms.len() as u128,
            DistributionKind::UniformSubsets { m, empty_mass, .. } => {
                let c = num_integer::binomial(self.alphabet_size as u128, *m as u128);
                c + u128::from(empty_mass.is_positive())
            }
            DistributionKind::Independent(p) => {
                let free = p
                    .values()
                    .iter()
                    .filter(|v| v.is_positive() && **v < one())
                    .count();
                1u128.checked_shl(free as u32).unwrap_or(u128::MAX)
            }
        }
    }

    /// All positive-mass atoms in [`LetterSet`] order.
    pub fn atoms(&self, limits: &Limits) -> Result<Vec<(LetterSet, Rational)>> {
        let n = self.support_len();
        if n > limits.max_atoms as u128 {
            return Err(Error::ResourceLimitExceeded(format!(
                "distribution has {n} atoms, cap is {}",
                limits.max_atoms
            )));
        }
        let m = self.alphabet_size;
        let mut out = match &self.kind {
            DistributionKind::Atoms(atoms) => return Ok(atoms.clone()),
            DistributionKind::UniformSubsets {
                m: k,
                empty_mass,
                atom_mass,
            } => {
                let mut v: Vec<_> = combinations(m, *k)
                    .map(|c| {
                        (
                            LetterSet::from_members(m, c).expect("combination in range"),
                            atom_mass.clone(),
                        )
                    })
                    .collect();
                if empty_mass.is_positive() {
                    v.push((LetterSet::empty(m), empty_mass.clone()));
                }
                v
            }
            DistributionKind::Independent(p) => {
                let fixed: Vec<usize> = (0..m).filter(|&i| p.get(i).is_one()).collect();
                let free: Vec<usize> = (0..m)
                    .filter(|&i| p.get(i).is_positive() && !p.get(i).is_one())
                    .collect();
                let mut v = Vec::with_capacity(1 << free.len());
                for bits in 0u64..(1u64 << free.len()) {
                    let members = fixed.iter().copied().chain(
                        free.iter()
                            .enumerate()
                            .filter(|(j, _)| bits >> j & 1 == 1)
                            .map(|(_, &i)| i),
                    );
                    let set = LetterSet::from_members(m, members).expect("letters in range");
                    let mass = self.mass(&set);
                    v.push((set, mass));
                }
                v
            }
        };
        out.sort();
        Ok(out)
    }

    /// Positive-mass sets in [`LetterSet`] order.
    pub fn support(&self, limits: &Limits) -> Result<Vec<LetterSet>> {
        Ok(self.atoms(limits)?.into_iter().map(|(s, _)| s).collect())
    }

    /// Whether `σ(X)` has positive mass whenever `X` does.
    pub fn support_is_shift_closed(&self, limits: &Limits) -> Result<bool> {
        match &self.kind {
            DistributionKind::UniformSubsets { .. } => Ok(true),
            DistributionKind::Independent(p) => {
                let pattern = |i: usize| (p.get(i).is_zero(), p.get(i).is_one());
                let m = self.alphabet_size;
                Ok((0..m).all(|i| pattern(i) == pattern((i + 1) % m)))
            }
            DistributionKind::Atoms(_) => {
                let support = self.support(limits)?;
                Ok(support.iter().all(|s| self.has_positive_mass(&s.rotate(1))))
            }
        }
    }

    /// `Σ_{X ⊇ b} μ(X) · w^{|X| - |b|}`, the building block of higher-order
    /// masses.
    pub fn superset_weight(&self, b: &LetterSet, w: &Rational) -> Rational {
        let m = self.alphabet_size;
        let nb = b.len();
        match &self.kind {
            DistributionKind::Atoms(atoms) => {
                let mut acc = zero();
                for (set, mass) in atoms {
                    if b.is_subset(set) {
                        acc += mass * num_traits::pow(w.clone(), set.len() - nb);
                    }
                }
                acc
            }
            DistributionKind::UniformSubsets {
                m: k,
                empty_mass,
                atom_mass,
            } => {
                let mut acc = zero();
                if nb <= *k {
                    acc +=
                        atom_mass * binomial(m - nb, k - nb) * num_traits::pow(w.clone(), k - nb);
                }
                if nb == 0 {
                    acc += empty_mass;
                }
                acc
            }
            DistributionKind::Independent(p) => {
                let mut acc = one();
                for (i, pi) in p.values().iter().enumerate() {
                    if b.contains(i) {
                        acc *= pi;
                    } else {
                        acc *= one() - pi + pi * w;
                    }
                }
                acc
            }
        }
    }

    /// Marginal support `{i : p_i > 0}` and whether it has positive mass.
    pub fn jsc_check(&self) -> JscReport {
        let p = self.marginals();
        let support = LetterSet::from_members(
            self.alphabet_size,
            (0..self.alphabet_size).filter(|&i| p.get(i).is_positive()),
        )
        .expect("letters in range");
        let mass = self.mass(&support);
        JscReport {
            satisfied: mass.is_positive(),
            marginal_support: support,
            support_mass: mass,
        }
    }

    /// Whether both distributions assign the same mass to every subset.
    pub fn same_law(&self, other: &Self, limits: &Limits) -> Result<bool> {
        if self.alphabet_size != other.alphabet_size {
            return Ok(false);
        }
        match (&self.kind, &other.kind) {
            (DistributionKind::Independent(a), DistributionKind::Independent(b)) => Ok(a == b),
            (
                DistributionKind::UniformSubsets {
                    m: a,
                    empty_mass: ea,
                    ..
                },
                DistributionKind::UniformSubsets {
                    m: b,
                    empty_mass: eb,
                    ..
                },
            ) => Ok((a == b && ea == eb) || (ea.is_one() && eb.is_one())),
            _ => Ok(self.atoms(limits)? == other.atoms(limits)?),
        }
    }

    /// Short human-readable description.
    pub fn describe(&self) -> String {
        match &self.kind {
            DistributionKind::Atoms(atoms) => {
                format!("explicit(M={}, atoms={})", self.alphabet_size, atoms.len())
            }
            DistributionKind::UniformSubsets { m, .. } => {
                let p = self.marginals().get(0).clone();
                format!(
                    "correlated(m={m}, M={}, p={})",
                    self.alphabet_size,
                    format_rational(&p)
                )
            }
            DistributionKind::Independent(p) => {
                let v: Vec<String> = p.values().iter().map(format_rational).collect();
                format!("independent(M={}, p=[{}])", self.alphabet_size, v.join(","))
            }
        }
    }

    /// The order-`n` distribution `μ^(n)` on `{0, .., M^n - 1}`, materialized.
    /// A level-n address `i_1 .. i_n` is the letter `Σ i_j M^{n-j}`.
    pub fn expand_order(&self, n: u32, limits: &Limits) -> Result<JointSurvivalDistribution> {
        if n == 0 {
            return Err(Error::ParameterOutOfRange(
                "expansion order must be at least 1".into(),
            ));
        }
        if n == 1 {
            return Ok(self.clone());
        }
        let m = self.alphabet_size;
        let width = Alphabet::new(m)?
            .order_size(n)
            .filter(|w| *w <= limits.max_level_width)
            .ok_or_else(|| Error::ResourceLimitExceeded(format!("alphabet {m}^{n} is too large")))?
            as usize;
        let block = width / m;
        let lower = self.expand_order(n - 1, limits)?;
        let lower_atoms = lower.atoms(limits)?;
        let embedded: Vec<Vec<(LetterSet, Rational)>> = (0..m)
            .map(|i| {
                lower_atoms
                    .iter()
                    .map(|(t, w)| Ok((t.embed(width, i * block)?, w.clone())))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;

        let mut total: HashMap<LetterSet, Rational> = HashMap::new();
        for (top, top_mass) in self.atoms(limits)? {
            let mut partial: HashMap<LetterSet, Rational> = HashMap::new();
            partial.insert(LetterSet::empty(width), top_mass);
            for i in top.iter() {
                let mut next: HashMap<LetterSet, Rational> = HashMap::new();
                for (s, ws) in &partial {
                    for (t, wt) in &embedded[i] {
                        *next.entry(s.union(t)).or_insert_with(zero) += ws * wt;
                    }
                    if next.len() > limits.max_atoms {
                        return Err(Error::ResourceLimitExceeded(format!(
                            "order-{n} expansion exceeds {} atoms",
                            limits.max_atoms
                        )));
                    }
                }
                partial = next;
            }
            for (s, w) in partial {
                *total.entry(s).or_insert_with(zero) += w;
            }
            if total.len() > limits.max_atoms {
                return Err(Error::ResourceLimitExceeded(format!(
                    "order-{n} expansion exceeds {} atoms",
                    limits.max_atoms
                )));
            }
        }
        let sum: Rational = total.values().fold(zero(), |a, b| a + b);
        if !sum.is_one() {
            return Err(Error::InvariantViolation(format!(
                "order-{n} masses sum to {}",
                format_rational(&sum)
            )));
        }
        let mut atoms: Vec<_> = total.into_iter().filter(|(_, w)| w.is_positive()).collect();
        atoms.sort();
        Ok(JointSurvivalDistribution {
            alphabet_size: width,
            kind: DistributionKind::Atoms(atoms),
        })
    }

    /// A lazy view of `μ^(n)`; masses are computed on demand.
    pub fn higher_order(&self, n: u32) -> HigherOrder<'_> {
        HigherOrder::new(self, n)
    }
}

impl SurvivalLaw for JointSurvivalDistribution {
    fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    fn mass(&self, set: &LetterSet) -> Rational {
        JointSurvivalDistribution::mass(self, set)
    }

    fn has_positive_mass(&self, set: &LetterSet) -> bool {
        match &self.kind {
            DistributionKind::UniformSubsets { m, empty_mass, .. }
                if set.alphabet_size() == self.alphabet_size =>
            {
                let n = set.len();
                n == *m || (n == 0 && empty_mass.is_positive())
            }
            _ => self.mass(set).is_positive(),
        }
    }
}

impl fmt::Display for JointSurvivalDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

/// Order-`n` view of a distribution: `μ^(n)(S)` computed recursively from the
/// block decomposition of `S`, without enumerating the support.
#[derive(Debug, Clone)]
pub struct HigherOrder<'a> {
    base: &'a JointSurvivalDistribution,
    order: u32,
    width: usize,
    /// `extinction[j]` is `μ^(j)(∅)`, the mass of dying out within j steps.
    extinction: Vec<Rational>,
}

impl<'a> HigherOrder<'a> {
    pub fn new(base: &'a JointSurvivalDistribution, order: u32) -> Self {
        assert!(order >= 1, "order must be at least 1");
        let m = base.alphabet_size();
        let width = m
            .checked_pow(order)
            .expect("order-n alphabet overflows usize");
        let mut extinction = vec![one(), base.empty_mass()];
        for j in 2..=order as usize {
            let prev = extinction[j - 1].clone();
            extinction.push(base.superset_weight(&LetterSet::empty(m), &prev));
        }
        HigherOrder {
            base,
            order,
            width,
            extinction,
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    fn mass_at(&self, n: u32, members: &[usize]) -> Rational {
        let m = self.base.alphabet_size();
        if members.is_empty() {
            return self.extinction[n as usize].clone();
        }
        if n == 1 {
            let s = LetterSet::from_members(m, members.iter().copied()).expect("letters in range");
            return self.base.mass(&s);
        }
        let block = m.pow(n - 1);
        let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); m];
        for &a in members {
            blocks[a / block].push(a % block);
        }
        let b = LetterSet::from_members(m, (0..m).filter(|&i| !blocks[i].is_empty()))
            .expect("letters in range");
        let outer = self
            .base
            .superset_weight(&b, &self.extinction[n as usize - 1]);
        if outer.is_zero() {
            return outer;
        }
        let mut acc = outer;
        for i in b.iter() {
            acc *= self.mass_at(n - 1, &blocks[i]);
            if acc.is_zero() {
                break;
            }
        }
        acc
    }
}

impl SurvivalLaw for HigherOrder<'_> {
    fn alphabet_size(&self) -> usize {
        self.width
    }

    fn mass(&self, set: &LetterSet) -> Rational {
        if set.alphabet_size() != self.width {
            return zero();
        }
        self.mass_at(self.order, &set.members())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn set(m: usize, members: &[usize]) -> LetterSet {
        LetterSet::from_members(m, members.iter().copied()).unwrap()
    }

    #[test]
    fn explicit_example_has_no_empty_mass() {
        let d = JointSurvivalDistribution::from_member_lists(
            2,
            &[(vec![0, 1], rat(1, 2)), (vec![1], rat(1, 2))],
        )
        .unwrap();
        assert!(d.empty_mass().is_zero());
        assert_eq!(d.marginals().values(), &[rat(1, 2), int(1)]);
    }

    #[test]
    fn deficit_goes_to_empty_set() {
        let d = JointSurvivalDistribution::make_distribution(3, vec![]).unwrap();
        assert!(d.empty_mass().is_one());
        assert!(d.marginals().values().iter().all(|v| v.is_zero()));
    }

    #[test]
    fn constructor_errors() {
        let over = JointSurvivalDistribution::from_member_lists(
            2,
            &[(vec![0], rat(3, 4)), (vec![0, 1], rat(1, 2))],
        );
        assert!(matches!(over, Err(Error::MassExceedsOne { .. })));
        let neg = JointSurvivalDistribution::from_member_lists(2, &[(vec![0], rat(-1, 4))]);
        assert!(matches!(neg, Err(Error::NegativeMass { .. })));
        let range = JointSurvivalDistribution::from_member_lists(2, &[(vec![2], rat(1, 4))]);
        assert!(matches!(range, Err(Error::MemberOutOfRange { .. })));
    }

    #[test]
    fn duplicates_merge() {
        let d = JointSurvivalDistribution::from_member_lists(
            2,
            &[(vec![0], rat(1, 4)), (vec![0], rat(1, 4))],
        )
        .unwrap();
        assert_eq!(d.mass(&set(2, &[0])), rat(1, 2));
        assert_eq!(d.empty_mass(), rat(1, 2));
    }

    #[test]
    fn correlated_seven_of_nine() {
        let d = JointSurvivalDistribution::make_correlated(7, 9, rat(7, 9)).unwrap();
        assert!(d.empty_mass().is_zero());
        assert_eq!(d.mass(&set(9, &[0, 1, 2, 3, 4, 5, 6])), rat(1, 36));
        assert!(d.mass(&set(9, &[0, 1])).is_zero());
        assert_eq!(d.support_len(), 36);
        let atoms = d.atoms(&Limits::default()).unwrap();
        let total: Rational = atoms.iter().map(|(_, w)| w.clone()).sum();
        assert!(total.is_one());
    }

    #[test]
    fn correlated_from_empty_mass() {
        let d = JointSurvivalDistribution::correlated_with_empty_mass(8, 9, rat(1, 8)).unwrap();
        assert_eq!(d.marginals().get(3), &rat(7, 9));
    }

    #[test]
    fn two_of_two_is_deterministic() {
        let d = JointSurvivalDistribution::make_correlated(2, 2, int(1)).unwrap();
        assert!(d.mass(&LetterSet::full(2)).is_one());
        let ind = JointSurvivalDistribution::make_independent(
            MarginalVector::uniform(2, int(1)).unwrap(),
        );
        assert!(d.same_law(&ind, &Limits::default()).unwrap());
    }

    #[test]
    fn correlated_parameter_errors() {
        assert!(JointSurvivalDistribution::make_correlated(3, 9, rat(1, 2)).is_err());
        assert!(JointSurvivalDistribution::make_correlated(0, 9, rat(0, 1)).is_err());
        assert!(JointSurvivalDistribution::make_correlated(10, 9, rat(1, 2)).is_err());
        assert!(JointSurvivalDistribution::make_correlated(3, 9, zero()).is_err());
    }

    #[test]
    fn independent_masses() {
        let d = JointSurvivalDistribution::make_independent(
            MarginalVector::uniform(2, rat(1, 2)).unwrap(),
        );
        let atoms = d.atoms(&Limits::default()).unwrap();
        assert_eq!(atoms.len(), 4);
        assert!(atoms.iter().all(|(_, w)| *w == rat(1, 4)));
        let sure = JointSurvivalDistribution::make_independent(
            MarginalVector::uniform(2, int(1)).unwrap(),
        );
        assert_eq!(
            sure.atoms(&Limits::default()).unwrap(),
            vec![(LetterSet::full(2), int(1))]
        );
    }

    #[test]
    fn marginal_vector_range() {
        assert!(MarginalVector::new(vec![rat(1, 2), rat(3, 2)]).is_err());
        assert!(MarginalVector::new(vec![rat(1, 2)]).is_err());
    }

    #[test]
    fn jsc_cases() {
        let ind = JointSurvivalDistribution::make_independent(
            MarginalVector::uniform(3, rat(4, 5)).unwrap(),
        );
        let r = ind.jsc_check();
        assert!(r.satisfied);
        assert_eq!(r.support_mass, rat(64, 125));
        let corr = JointSurvivalDistribution::make_correlated(7, 9, rat(7, 9)).unwrap();
        assert!(!corr.jsc_check().satisfied);
        let full = JointSurvivalDistribution::make_correlated(9, 9, rat(1, 2)).unwrap();
        assert!(full.jsc_check().satisfied);
    }

    #[test]
    fn expansion_of_the_two_letter_example() {
        let d = JointSurvivalDistribution::from_member_lists(
            2,
            &[(vec![0, 1], rat(1, 2)), (vec![1], rat(1, 2))],
        )
        .unwrap();
        let e = d.expand_order(2, &Limits::default()).unwrap();
        let expect = [
            (vec![0, 1, 2, 3], rat(1, 8)),
            (vec![1, 2, 3], rat(1, 8)),
            (vec![0, 1, 3], rat(1, 8)),
            (vec![1, 3], rat(1, 8)),
            (vec![2, 3], rat(1, 4)),
            (vec![3], rat(1, 4)),
        ];
        assert_eq!(e.support_len(), 6);
        let lazy = d.higher_order(2);
        for (members, w) in expect {
            assert_eq!(e.mass(&set(4, &members)), w);
            assert_eq!(lazy.mass(&set(4, &members)), w);
        }
        assert_eq!(d.expand_order(1, &Limits::default()).unwrap(), d);
    }

    #[test]
    fn determinism_propagates() {
        let d = JointSurvivalDistribution::deterministic(LetterSet::full(3)).unwrap();
        for n in 1..=3 {
            let e = d.expand_order(n, &Limits::default()).unwrap();
            assert!(e.mass(&LetterSet::full(3usize.pow(n))).is_one());
        }
    }

    #[test]
    fn lazy_higher_order_matches_materialized() {
        let limits = Limits::default();
        let dists = [
            JointSurvivalDistribution::make_correlated(2, 3, rat(1, 2)).unwrap(),
            JointSurvivalDistribution::make_independent(
                MarginalVector::new(vec![rat(1, 3), rat(3, 4), int(1)]).unwrap(),
            ),
            JointSurvivalDistribution::from_member_lists(
                3,
                &[(vec![0, 2], rat(1, 3)), (vec![1], rat(1, 2))],
            )
            .unwrap(),
        ];
        for (i, d) in dists.iter().enumerate() {
            // the independent law has too many order-3 atoms to materialize
            let top = if i == 1 { 2 } else { 3 };
            for n in 2..=top {
                let e = d.expand_order(n, &limits).unwrap();
                let lazy = d.higher_order(n);
                for (s, w) in e.atoms(&limits).unwrap() {
                    assert_eq!(lazy.mass(&s), w, "{d} order {n} at {s}");
                }
                assert_eq!(
                    lazy.mass(&LetterSet::empty(e.alphabet_size())),
                    e.empty_mass()
                );
            }
        }
    }

    #[test]
    fn expansion_respects_cap() {
        let d = JointSurvivalDistribution::make_independent(
            MarginalVector::uniform(3, rat(1, 2)).unwrap(),
        );
        let limits = Limits {
            max_atoms: 100,
            ..Limits::default()
        };
        assert!(matches!(
            d.expand_order(2, &limits),
            Err(Error::ResourceLimitExceeded(_))
        ));
    }

    #[test]
    fn combinations_are_lexicographic() {
        let c: Vec<_> = combinations(4, 2).collect();
        assert_eq!(
            c,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(combinations(3, 0).count(), 1);
        assert_eq!(combinations(2, 3).count(), 0);
    }

    #[test]
    fn shift_closure() {
        let l = Limits::default();
        assert!(JointSurvivalDistribution::make_correlated(2, 5, rat(1, 5))
            .unwrap()
            .support_is_shift_closed(&l)
            .unwrap());
        let d = JointSurvivalDistribution::from_member_lists(3, &[(vec![0], rat(1, 2))]).unwrap();
        assert!(!d.support_is_shift_closed(&l).unwrap());
    }
}
