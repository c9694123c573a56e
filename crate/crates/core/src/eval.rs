//! Explanation quality measures and batch utility.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

use crate::dataset::{Group, ItemSet, RatingsDataset};
use crate::error::{Error, Result};
use crate::metrics::public_users;
use crate::scalar::{population_std, Scalar};
use crate::search::Explanation;

/// min(E) = 1 − |E|/|I_G|.
pub fn minimality<T: Scalar>(explanation_size: usize, interacted: usize) -> Result<T> {
    if explanation_size == 0 {
        return Err(Error::Domain("minimality of an empty explanation".into()));
    }
    if explanation_size > interacted {
        return Err(Error::Domain(format!(
            "explanation of {explanation_size} items exceeds |I_G| = {interacted}"
        )));
    }
    Ok(T::one() - T::from_count(explanation_size) / T::from_count(interacted))
}

/// Mean of group and public recognition over the explanation's items.
pub fn interpretability<T: Scalar>(
    ds: &RatingsDataset<T>,
    items: &ItemSet,
    group: &Group,
) -> Result<T> {
    if items.is_empty() {
        return Err(Error::Domain(
            "interpretability of an empty explanation".into(),
        ));
    }
    let public = public_users(ds, group);
    let members = group.members();
    let mut total = T::zero();
    for &i in items {
        let inside = members.iter().filter(|&&u| ds.has_interacted(u, i)).count();
        total += T::from_count(inside) / T::from_count(members.len());
        if !public.is_empty() {
            let outside = ds
                .item_users(i)
                .iter()
                .filter(|(u, _)| !group.contains(*u))
                .count();
            total += T::from_count(outside) / T::from_count(public.len());
        }
    }
    Ok(total / T::from_count(2 * items.len()))
}

/// Reciprocal of the contribution spread; `Perfect` when every member
/// contributed equally.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Fairness<T> {
    Finite(T),
    Perfect,
}

impl<T: Scalar> Fairness<T> {
    pub fn is_perfect(&self) -> bool {
        matches!(self, Fairness::Perfect)
    }

    pub fn finite(&self) -> Option<T> {
        match *self {
            Fairness::Finite(v) => Some(v),
            Fairness::Perfect => None,
        }
    }
}

impl<T: Scalar> PartialOrd for Fairness<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Fairness::Perfect, Fairness::Perfect) => Some(Ordering::Equal),
            (Fairness::Perfect, _) => Some(Ordering::Greater),
            (_, Fairness::Perfect) => Some(Ordering::Less),
            (Fairness::Finite(a), Fairness::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl<T: Scalar> fmt::Display for Fairness<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fairness::Finite(v) => write!(f, "{v}"),
            Fairness::Perfect => f.write_str("MAX"),
        }
    }
}

/// fair(G, E) from per-member contribution counts.
pub fn fairness_from_contributions<T: Scalar>(contributions: &[usize]) -> Result<Fairness<T>> {
    if contributions.is_empty() {
        return Err(Error::Domain("fairness over an empty group".into()));
    }
    let values: Vec<T> = contributions.iter().map(|&c| T::from_count(c)).collect();
    let sigma = population_std(&values);
    if sigma == T::zero() {
        Ok(Fairness::Perfect)
    } else {
        Ok(Fairness::Finite(sigma.recip()))
    }
}

pub fn fairness<T: Scalar>(items: &ItemSet, group: &Group) -> Result<Fairness<T>> {
    if items.is_empty() {
        return Err(Error::Domain("fairness of an empty explanation".into()));
    }
    fairness_from_contributions(&group.contributions(items))
}

/// Summary of how several fairness values compare, used to rank methods.
///
/// Any perfect value outranks an all-finite batch; with perfect values on
/// both sides the larger perfect share wins, then the finite mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FairnessAggregate {
    pub perfect_share: f64,
    pub finite_mean: Option<f64>,
    pub count: usize,
}

impl FairnessAggregate {
    pub fn of<T: Scalar>(values: &[Fairness<T>]) -> Self {
        let finite: Vec<f64> = values
            .iter()
            .filter_map(|f| f.finite())
            .map(Scalar::as_f64)
            .collect();
        let perfect = values.len() - finite.len();
        Self {
            perfect_share: if values.is_empty() {
                0.0
            } else {
                perfect as f64 / values.len() as f64
            },
            finite_mean: (!finite.is_empty())
                .then(|| finite.iter().sum::<f64>() / finite.len() as f64),
            count: values.len(),
        }
    }

    pub fn compare(&self, other: &Self) -> Ordering {
        self.perfect_share
            .partial_cmp(&other.perfect_share)
            .unwrap_or(Ordering::Equal)
            .then_with(|| {
                self.finite_mean
                    .unwrap_or(f64::NEG_INFINITY)
                    .partial_cmp(&other.finite_mean.unwrap_or(f64::NEG_INFINITY))
                    .unwrap_or(Ordering::Equal)
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplanationReport<T> {
    pub size: usize,
    pub minimality: T,
    pub interpretability: T,
    pub cost: u64,
    pub fairness: Fairness<T>,
    /// Filled in by [`utility_batch`].
    pub utility: Option<T>,
}

impl<T: Scalar> ExplanationReport<T> {
    /// Scores a valid explanation; `cost` includes metric calls only when
    /// `count_metric_calls` is set.
    pub fn evaluate(
        ds: &RatingsDataset<T>,
        group: &Group,
        explanation: &Explanation,
        count_metric_calls: bool,
    ) -> Result<Self> {
        let items = &explanation.items;
        Ok(Self {
            size: items.len(),
            minimality: minimality(items.len(), group.union_interactions().len())?,
            interpretability: interpretability(ds, items, group)?,
            cost: explanation.search_calls
                + if count_metric_calls {
                    explanation.metric_calls
                } else {
                    0
                },
            fairness: fairness(items, group)?,
            utility: None,
        })
    }
}

fn normalize<T: Scalar>(values: &[T]) -> Vec<T> {
    let lo = values.iter().copied().fold(T::infinity(), T::min);
    let hi = values.iter().copied().fold(T::neg_infinity(), T::max);
    if hi <= lo {
        return vec![T::lit(0.5); values.len()];
    }
    values.iter().map(|&v| (v - lo) / (hi - lo)).collect()
}

/// Min–max normalizes minimality and interpretability across the batch and
/// sets utility = w·min̂ + (1 − w)·interp̂. A constant dimension maps to 0.5.
pub fn utility_batch<T: Scalar>(reports: &mut [ExplanationReport<T>], weight_min: T) -> Result<()> {
    if reports.is_empty() {
        return Err(Error::Domain("utility over an empty batch".into()));
    }
    if !(T::zero()..=T::one()).contains(&weight_min) {
        return Err(Error::Domain(format!(
            "utility weight {weight_min} outside [0, 1]"
        )));
    }
    let mins: Vec<T> = reports.iter().map(|r| r.minimality).collect();
    let interps: Vec<T> = reports.iter().map(|r| r.interpretability).collect();
    let (m, i) = (normalize(&mins), normalize(&interps));
    for (k, r) in reports.iter_mut().enumerate() {
        r.utility = Some(weight_min * m[k] + (T::one() - weight_min) * i[k]);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(min: f64, interp: f64) -> ExplanationReport<f64> {
        ExplanationReport {
            size: 1,
            minimality: min,
            interpretability: interp,
            cost: 1,
            fairness: Fairness::Perfect,
            utility: None,
        }
    }

    #[test]
    fn minimality_cases() {
        assert_eq!(minimality::<f64>(30, 30).unwrap(), 0.0);
        assert!((minimality::<f64>(3, 30).unwrap() - 0.9).abs() < 1e-15);
        assert!(minimality::<f64>(1, 1_000_000).unwrap() > 0.999);
        assert!(minimality::<f64>(0, 10).is_err());
    }

    #[test]
    fn fairness_cases() {
        assert_eq!(
            fairness_from_contributions::<f64>(&[2, 2, 2]).unwrap(),
            Fairness::Perfect
        );
        assert_eq!(
            fairness_from_contributions::<f64>(&[1, 3]).unwrap(),
            Fairness::Finite(1.0)
        );
        let f = fairness_from_contributions::<f64>(&[0, 0, 4])
            .unwrap()
            .finite()
            .unwrap();
        assert!((f - 1.0 / (32.0f64 / 9.0).sqrt()).abs() < 1e-12);
        assert!((f - 0.5303).abs() < 1e-4);
    }

    #[test]
    fn fairness_is_permutation_invariant() {
        let a = fairness_from_contributions::<f64>(&[0, 1, 5]).unwrap();
        let b = fairness_from_contributions::<f64>(&[5, 0, 1]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fairness_ordering() {
        assert!(Fairness::Perfect > Fairness::Finite(1e9));
        assert!(Fairness::Finite(2.0) > Fairness::Finite(1.0));
        let a = FairnessAggregate::of(&[Fairness::Perfect, Fairness::Finite(0.5)]);
        let b = FairnessAggregate::of(&[Fairness::Finite(3.0), Fairness::Finite(5.0)]);
        assert_eq!(a.compare(&b), Ordering::Greater);
    }

    #[test]
    fn single_report_utility_is_half() {
        let mut batch = vec![report(0.9, 0.3)];
        utility_batch(&mut batch, 0.5).unwrap();
        assert_eq!(batch[0].utility, Some(0.5));
    }

    #[test]
    fn dominant_report_gets_full_utility() {
        let mut batch = vec![report(0.9, 0.8), report(0.5, 0.2), report(0.7, 0.5)];
        utility_batch(&mut batch, 0.5).unwrap();
        assert_eq!(batch[0].utility, Some(1.0));
        assert_eq!(batch[1].utility, Some(0.0));
    }

    #[test]
    fn empty_batch_and_bad_weight_rejected() {
        assert!(utility_batch::<f64>(&mut [], 0.5).is_err());
        assert!(utility_batch(&mut [report(0.1, 0.1)], 1.5).is_err());
    }
}
