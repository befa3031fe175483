//! Randomized posted-price mechanisms and their step payment functions.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grid::{GridPoint, Side};
use crate::json;

/// Tolerance on the probability total accepted by [`Mechanism::canonicalize`].
pub const PROB_SUM_TOL: f64 = 1e-9;

/// Anything with a nondecreasing expected-payment function `t` on `[0, vbar]`.
///
/// Finite menus have right-continuous step payments; the continuous
/// mechanisms in [`crate::closed_form`] implement this too so that the
/// adversary can certify them.
pub trait PaymentRule: Sync {
    fn vbar(&self) -> f64;

    /// Expected payment of a buyer at `at`; `at.value` must lie in `[0, vbar]`.
    fn payment(&self, at: GridPoint) -> f64;

    /// Valuations where `t` jumps or changes slope.
    fn kinks(&self) -> Vec<f64>;
}

/// A distribution over finitely many posted prices.
///
/// Always canonical: prices strictly increasing, probabilities summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Mechanism {
    prices: Vec<f64>,
    probs: Vec<f64>,
    vbar: f64,
}

impl Mechanism {
    /// Sorts price levels, merges duplicates and renormalizes probabilities.
    pub fn canonicalize(prices: &[f64], probs: &[f64], vbar: f64) -> Result<Self> {
        if prices.len() != probs.len() {
            return domain(format!(
                "{} prices but {} probabilities",
                prices.len(),
                probs.len()
            ));
        }
        if prices.is_empty() {
            return domain("a mechanism needs at least one price level");
        }
        if !vbar.is_finite() || vbar < 0.0 {
            return domain(format!("vbar {vbar} must be finite and nonnegative"));
        }
        for (&v, &x) in prices.iter().zip(probs) {
            if !(v.is_finite() && (0.0..=vbar).contains(&v)) {
                return domain(format!("price {v} outside [0, {vbar}]"));
            }
            if !x.is_finite() || x < 0.0 {
                return domain(format!("probability {x} must be nonnegative"));
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return domain(format!("probabilities sum to {total}, not 1"));
        }

        let mut levels: Vec<(f64, f64)> = prices.iter().copied().zip(probs.iter().copied()).collect();
        levels.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(levels.len());
        for (v, x) in levels {
            match merged.last_mut() {
                Some((w, y)) if *w == v => *y += x,
                _ => merged.push((v, x)),
            }
        }
        let (prices, mut probs): (Vec<f64>, Vec<f64>) = merged.into_iter().unzip();
        let total: f64 = probs.iter().sum();
        // Within a few ulps of one is left alone so that canonicalize is idempotent.
        if (total - 1.0).abs() > 4.0 * f64::EPSILON {
            probs.iter_mut().for_each(|x| *x /= total);
        }
        Ok(Self { prices, probs, vbar })
    }

    pub fn deterministic(price: f64, vbar: f64) -> Result<Self> {
        Self::canonicalize(&[price], &[1.0], vbar)
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn vbar(&self) -> f64 {
        self.vbar
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    /// Price levels carrying positive probability.
    pub fn support(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.prices
            .iter()
            .copied()
            .zip(self.probs.iter().copied())
            .filter(|&(_, x)| x > 0.0)
    }

    /// `sum_l v_l x_l`, the payment of the highest type.
    pub fn expected_price(&self) -> f64 {
        self.prices.iter().zip(&self.probs).map(|(v, x)| v * x).sum()
    }

    /// Expected payment `t` at a grid point.
    ///
    /// `Exact` sums `v_l x_l` over `v_l <= v`; `LeftLimit` over `v_l < v`.
    pub fn payment_at(&self, at: GridPoint) -> Result<f64> {
        if !(0.0..=self.vbar).contains(&at.value) {
            return domain(format!("valuation {} outside [0, {}]", at.value, self.vbar));
        }
        Ok(self.step_payment(at))
    }

    fn step_payment(&self, at: GridPoint) -> f64 {
        let mut t = 0.0;
        for (&v, &x) in self.prices.iter().zip(&self.probs) {
            let included = match at.side {
                Side::Exact => v <= at.value,
                Side::LeftLimit => v < at.value,
            };
            if !included {
                break;
            }
            t += v * x;
        }
        t
    }

    /// Probability that a buyer at `at` receives the item.
    pub fn allocation_at(&self, at: GridPoint) -> f64 {
        self.prices
            .iter()
            .zip(&self.probs)
            .filter(|(&v, _)| match at.side {
                Side::Exact => v <= at.value,
                Side::LeftLimit => v < at.value,
            })
            .map(|(_, x)| x)
            .sum()
    }

    pub fn to_json(&self) -> String {
        format!(
            "{{\"prices\":{},\"probs\":{},\"vbar\":{}}}",
            json::array(&self.prices),
            json::array(&self.probs),
            json::number(self.vbar)
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawMechanism =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::canonicalize(&raw.prices, &raw.probs, raw.vbar)
    }
}

#[derive(Deserialize, Serialize)]
struct RawMechanism {
    prices: Vec<f64>,
    probs: Vec<f64>,
    vbar: f64,
}

impl PaymentRule for Mechanism {
    fn vbar(&self) -> f64 {
        self.vbar
    }

    fn payment(&self, at: GridPoint) -> f64 {
        self.step_payment(at)
    }

    fn kinks(&self) -> Vec<f64> {
        self.prices.clone()
    }
}

/// Outcome of a competitive-ratio synthesis.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioResult {
    pub ratio: f64,
    pub mechanism: Mechanism,
    /// Multipliers of the ambiguity constraints, when an LP produced them.
    pub dualvars: Option<Vec<f64>>,
}

impl RatioResult {
    pub fn new(ratio: f64, mechanism: Mechanism) -> Self {
        Self { ratio, mechanism, dualvars: None }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example2() -> Mechanism {
        Mechanism::canonicalize(&[40.0, 100.0], &[5.0 / 6.0, 1.0 / 6.0], 100.0).unwrap()
    }

    #[test]
    fn example2_payments() {
        let m = example2();
        let t40 = m.payment_at(GridPoint::exact(40.0)).unwrap();
        assert!((t40 - 100.0 / 3.0).abs() < 1e-12);
        let t100 = m.payment_at(GridPoint::exact(100.0)).unwrap();
        assert!((t100 - 50.0).abs() < 1e-12);
        assert_eq!(m.payment_at(GridPoint::left(40.0)).unwrap(), 0.0);
        assert_eq!(m.payment_at(GridPoint::exact(0.0)).unwrap(), 0.0);
    }

    #[test]
    fn payment_outside_range_is_an_error() {
        let m = example2();
        assert!(m.payment_at(GridPoint::exact(100.5)).is_err());
    }

    #[test]
    fn canonicalize_merges_and_sorts() {
        let m = Mechanism::canonicalize(&[0.5, 0.5], &[0.3, 0.7], 1.0).unwrap();
        assert_eq!(m.prices(), &[0.5]);
        assert_eq!(m.probs(), &[1.0]);

        let m = Mechanism::canonicalize(&[100.0, 40.0], &[1.0 / 6.0, 5.0 / 6.0], 100.0).unwrap();
        assert_eq!(m.prices(), &[40.0, 100.0]);
        assert_eq!(m.probs(), &[5.0 / 6.0, 1.0 / 6.0]);

        let m = Mechanism::canonicalize(&[0.2], &[1.0], 1.0).unwrap();
        assert_eq!(m.prices(), &[0.2]);
        assert_eq!(m.probs(), &[1.0]);
    }

    #[test]
    fn canonicalize_rejects_bad_input() {
        assert!(Mechanism::canonicalize(&[], &[], 1.0).is_err());
        assert!(Mechanism::canonicalize(&[0.2, 0.4], &[1.2, -0.2], 1.0).is_err());
        assert!(Mechanism::canonicalize(&[1.5], &[1.0], 1.0).is_err());
        assert!(Mechanism::canonicalize(&[0.5], &[0.9], 1.0).is_err());
        assert!(Mechanism::canonicalize(&[0.5, 0.6], &[1.0], 1.0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = example2();
        let text = m.to_json();
        assert!(text.starts_with("{\"prices\":["));
        let back = Mechanism::from_json(&text).unwrap();
        assert_eq!(back, m);
    }

    fn arb_mechanism() -> impl Strategy<Value = Mechanism> {
        (1usize..6)
            .prop_flat_map(|n| {
                (
                    prop::collection::vec(0.0f64..=10.0, n),
                    prop::collection::vec(0.01f64..1.0, n),
                )
            })
            .prop_map(|(prices, weights)| {
                let s: f64 = weights.iter().sum();
                let probs: Vec<f64> = weights.iter().map(|w| w / s).collect();
                Mechanism::canonicalize(&prices, &probs, 10.0).unwrap()
            })
    }

    proptest! {
        #[test]
        fn payment_is_monotone_along_grid_order(m in arb_mechanism()) {
            let mut points = Vec::new();
            for k in 0..=1000 {
                let v = 10.0 * k as f64 / 1000.0;
                if v > 0.0 {
                    points.push(GridPoint::left(v));
                }
                points.push(GridPoint::exact(v));
            }
            for &p in m.prices() {
                if p > 0.0 {
                    points.push(GridPoint::left(p));
                }
                points.push(GridPoint::exact(p));
            }
            points.sort();
            let mut last = 0.0;
            for p in points {
                let t = m.payment_at(p).unwrap();
                prop_assert!(t >= last);
                last = t;
            }
            prop_assert_eq!(m.payment_at(GridPoint::exact(0.0)).unwrap(), 0.0);
            prop_assert_eq!(m.payment_at(GridPoint::exact(10.0)).unwrap(), m.expected_price());
        }

        #[test]
        fn canonicalize_is_idempotent(m in arb_mechanism()) {
            let again = Mechanism::canonicalize(m.prices(), m.probs(), m.vbar()).unwrap();
            prop_assert_eq!(&again, &m);
            let total: f64 = m.probs().iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
        }
    }
}
