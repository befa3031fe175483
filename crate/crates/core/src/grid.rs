//! Valuations with side semantics.
//!
//! Left limits are carried symbolically: `(v, LeftLimit)` stands for "just
//! below `v`" and sorts immediately before `(v, Exact)`. Every left limit in
//! this crate shares the same infinitesimal offset, so a buyer at
//! `(v, LeftLimit)` faced with a hindsight price `(v, LeftLimit)` still buys.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    LeftLimit,
    Exact,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::LeftLimit => f.write_str("LeftLimit"),
            Side::Exact => f.write_str("Exact"),
        }
    }
}

/// A valuation in `[0, vbar]` together with the side it is approached from.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridPoint {
    pub value: f64,
    pub side: Side,
}

impl GridPoint {
    pub fn new(value: f64, side: Side) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return domain(format!("grid point value {value} must be finite and nonnegative"));
        }
        if value == 0.0 && side == Side::LeftLimit {
            return domain("no left limit exists at 0");
        }
        Ok(Self { value, side })
    }

    /// # Panics
    /// If `value` is negative or not finite.
    pub fn exact(value: f64) -> Self {
        Self::new(value, Side::Exact).expect("invalid exact grid point")
    }

    /// # Panics
    /// If `value` is not strictly positive and finite.
    pub fn left(value: f64) -> Self {
        Self::new(value, Side::LeftLimit).expect("invalid left-limit grid point")
    }

    pub fn is_left(&self) -> bool {
        self.side == Side::LeftLimit
    }
}

impl PartialEq for GridPoint {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for GridPoint {}

impl PartialOrd for GridPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GridPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then(self.side.cmp(&other.side))
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Side::Exact => write!(f, "{}", self.value),
            Side::LeftLimit => write!(f, "{}-", self.value),
        }
    }
}

/// Finitely many atoms placed on grid points.
///
/// Used both for honest probability distributions and for the unnormalized
/// measure an adversary optimizes over before rescaling.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    pub atoms: Vec<(GridPoint, f64)>,
}

impl DiscreteDistribution {
    /// Sorts atoms, merges coincident ones and drops zero masses.
    pub fn new(mut atoms: Vec<(GridPoint, f64)>) -> Result<Self> {
        if let Some((_, m)) = atoms.iter().find(|(_, m)| !m.is_finite() || *m < 0.0) {
            return domain(format!("atom mass {m} must be finite and nonnegative"));
        }
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(GridPoint, f64)> = Vec::with_capacity(atoms.len());
        for (p, m) in atoms {
            if m == 0.0 {
                continue;
            }
            match merged.last_mut() {
                Some((q, mass)) if *q == p => *mass += m,
                _ => merged.push((p, m)),
            }
        }
        Ok(Self { atoms: merged })
    }

    /// Builds a probability distribution from exact atoms.
    pub fn from_exact(values: &[f64], masses: &[f64]) -> Result<Self> {
        if values.len() != masses.len() {
            return domain("values and masses differ in length");
        }
        let atoms = values
            .iter()
            .zip(masses)
            .map(|(&v, &m)| GridPoint::new(v, Side::Exact).map(|p| (p, m)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(atoms)
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, m)| m).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let total = self.total_mass();
        if total <= 0.0 {
            return domain("cannot normalize a measure with no mass");
        }
        Ok(Self {
            atoms: self.atoms.iter().map(|&(p, m)| (p, m / total)).collect(),
        })
    }

    pub fn is_probability(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= 1e-12
    }

    /// Mass on atoms at or above `at` in grid-point order, i.e. `1 - F(p-)`
    /// for a hindsight price `p = at`.
    pub fn mass_at_or_above(&self, at: GridPoint) -> f64 {
        self.atoms
            .iter()
            .filter(|(p, _)| *p >= at)
            .map(|(_, m)| m)
            .sum()
    }

    /// `P(V <= v)` counting atoms at `(v, Exact)` and below.
    pub fn cdf(&self, v: f64) -> f64 {
        let at = GridPoint { value: v, side: Side::Exact };
        self.atoms
            .iter()
            .filter(|(p, _)| *p <= at)
            .map(|(_, m)| m)
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|(p, m)| p.value * m).sum()
    }

    pub fn max_value(&self) -> Option<f64> {
        self.atoms.last().map(|(p, _)| p.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_puts_left_limit_first() {
        let a = GridPoint::left(0.5);
        let b = GridPoint::exact(0.5);
        let c = GridPoint::left(0.6);
        assert!(a < b);
        assert!(b < c);
        assert!(GridPoint::exact(0.0) < a);
    }

    #[test]
    fn left_limit_at_zero_is_rejected() {
        assert!(GridPoint::new(0.0, Side::LeftLimit).is_err());
        assert!(GridPoint::new(-1.0, Side::Exact).is_err());
        assert!(GridPoint::new(f64::NAN, Side::Exact).is_err());
    }

    #[test]
    fn distribution_merges_and_sorts() {
        let d = DiscreteDistribution::new(vec![
            (GridPoint::exact(1.0), 0.25),
            (GridPoint::left(1.0), 0.25),
            (GridPoint::exact(1.0), 0.5),
            (GridPoint::exact(0.2), 0.0),
        ])
        .unwrap();
        assert_eq!(d.atoms.len(), 2);
        assert_eq!(d.atoms[0].0, GridPoint::left(1.0));
        assert_eq!(d.atoms[1].1, 0.75);
        assert_eq!(d.mass_at_or_above(GridPoint::left(1.0)), 1.0);
        assert_eq!(d.mass_at_or_above(GridPoint::exact(1.0)), 0.75);
        assert_eq!(d.cdf(0.99), 0.0);
        assert_eq!(d.cdf(1.0), 1.0);
    }

    #[test]
    fn negative_mass_is_rejected() {
        assert!(DiscreteDistribution::new(vec![(GridPoint::exact(1.0), -0.1)]).is_err());
    }
}
