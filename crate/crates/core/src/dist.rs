//! Finitely supported subdistributions over dense state indices.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Signed, Zero};

use crate::error::DistError;
use crate::rational::{format_rational, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

impl StateId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A subdistribution. Only strictly positive masses are stored, so structural
/// equality is equality of the mathematical objects.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubDistribution {
    entries: BTreeMap<StateId, Rational>,
}

impl SubDistribution {
    /// The empty subdistribution.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn dirac(s: StateId) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(s, Rational::one());
        Self { entries }
    }

    /// Builds from (state, mass) pairs, merging duplicates and dropping zeros.
    pub fn from_pairs<I>(pairs: I) -> Result<Self, DistError>
    where
        I: IntoIterator<Item = (StateId, Rational)>,
    {
        let mut entries: BTreeMap<StateId, Rational> = BTreeMap::new();
        for (s, m) in pairs {
            if m.is_negative() {
                return Err(DistError::NegativeScale(m));
            }
            *entries.entry(s).or_insert_with(Rational::zero) += m;
        }
        entries.retain(|_, m| !m.is_zero());
        let d = Self { entries };
        let mass = d.mass();
        if mass > Rational::one() {
            return Err(DistError::MassOverflow(mass));
        }
        Ok(d)
    }

    pub fn get(&self, s: StateId) -> Rational {
        self.entries.get(&s).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = StateId> + '_ {
        self.entries.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (StateId, &Rational)> + '_ {
        self.entries.iter().map(|(s, m)| (*s, m))
    }

    pub fn contains(&self, s: StateId) -> bool {
        self.entries.contains_key(&s)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `|μ|`
    pub fn mass(&self) -> Rational {
        self.entries.values().sum()
    }

    pub fn is_full(&self) -> bool {
        self.mass().is_one()
    }

    pub fn is_dirac(&self, s: StateId) -> bool {
        self.entries.len() == 1 && self.get(s).is_one()
    }

    /// Mass assigned to a set of states.
    pub fn mass_on<F: Fn(StateId) -> bool>(&self, pred: F) -> Rational {
        self.entries
            .iter()
            .filter(|(s, _)| pred(**s))
            .map(|(_, m)| m)
            .sum()
    }

    /// `μ ⊕ μ'`
    pub fn sum(&self, other: &SubDistribution) -> Result<SubDistribution, DistError> {
        let mut entries = self.entries.clone();
        for (s, m) in &other.entries {
            *entries.entry(*s).or_insert_with(Rational::zero) += m;
        }
        let d = SubDistribution { entries };
        let mass = d.mass();
        if mass > Rational::one() {
            return Err(DistError::MassOverflow(mass));
        }
        Ok(d)
    }

    /// `cμ`
    pub fn scale(&self, c: &Rational) -> Result<SubDistribution, DistError> {
        if c.is_negative() {
            return Err(DistError::NegativeScale(c.clone()));
        }
        if c.is_zero() {
            return Ok(SubDistribution::empty());
        }
        let d = SubDistribution {
            entries: self
                .entries
                .iter()
                .map(|(s, m)| (*s, m * c))
                .collect(),
        };
        let mass = d.mass();
        if mass > Rational::one() {
            return Err(DistError::MassOverflow(mass));
        }
        Ok(d)
    }

    /// `μ − s`
    pub fn minus(&self, s: StateId) -> Result<SubDistribution, DistError> {
        if !self.contains(s) {
            return Err(DistError::NotInSupport(s.0));
        }
        let mut entries = self.entries.clone();
        entries.remove(&s);
        Ok(SubDistribution { entries })
    }

    /// `μ_{s→ν}`: every occurrence of `s` is replaced by `ν`, weighted by `μ(s)`.
    pub fn substitute(&self, s: StateId, nu: &SubDistribution) -> SubDistribution {
        let Some(weight) = self.entries.get(&s) else {
            return self.clone();
        };
        let mut entries = self.entries.clone();
        entries.remove(&s);
        for (t, m) in &nu.entries {
            *entries.entry(*t).or_insert_with(Rational::zero) += weight * m;
        }
        entries.retain(|_, m| !m.is_zero());
        SubDistribution { entries }
    }

    /// Applies an index map; states mapped to `None` must not be in the support.
    pub fn remap<F: Fn(StateId) -> Option<StateId>>(&self, f: F) -> Option<SubDistribution> {
        let mut entries: BTreeMap<StateId, Rational> = BTreeMap::new();
        for (s, m) in &self.entries {
            let t = f(*s)?;
            *entries.entry(t).or_insert_with(Rational::zero) += m;
        }
        Some(SubDistribution { entries })
    }

    /// Dense vector view in `ℚ^n`.
    pub fn to_vector(&self, n: usize) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); n];
        for (s, m) in &self.entries {
            v[s.0] = m.clone();
        }
        v
    }

    pub fn from_vector(v: &[Rational]) -> SubDistribution {
        SubDistribution {
            entries: v
                .iter()
                .enumerate()
                .filter(|(_, m)| !m.is_zero())
                .map(|(i, m)| (StateId(i), m.clone()))
                .collect(),
        }
    }

    /// Canonical text form `q1 n1, q2 n2, ...` in ascending state order.
    pub fn format_with<F: Fn(StateId) -> String>(&self, name: F) -> String {
        self.entries
            .iter()
            .map(|(s, m)| format!("{} {}", format_rational(m), name(*s)))
            .collect::<Vec<_>>()
            .join(", ")
    }
}
