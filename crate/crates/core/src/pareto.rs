//! τ-dominance, τ-Pareto sets and the Pareto-filtering search.
//!
//! Sign convention: `a` τ-dominates `b` when `a[w] + τ[w] ≥ b[w]` for every
//! dimension and `a[j] > b[j]` for some `j`. A negative τ therefore demands a
//! margin before one point can dominate another, so lowering τ only ever
//! grows the τ-Pareto set (τ < 0 relaxes toward the full set, τ > 0 tightens).

use std::cmp::Ordering;

use serde::Serialize;

use crate::dataset::{ItemId, ItemSet};
use crate::error::{BudgetExhausted, Error, Result};
use crate::metrics::ItemMetricVector;
use crate::scalar::{population_std, Scalar};

/// Default cap on relaxation rounds.
pub const DEFAULT_MAX_ITERS: usize = 25;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricPoint<T> {
    pub item: ItemId,
    pub coords: Vec<T>,
}

impl<T: Scalar> MetricPoint<T> {
    pub fn new(item: ItemId, coords: Vec<T>) -> Self {
        Self { item, coords }
    }

    pub fn dims(&self) -> usize {
        self.coords.len()
    }
}

impl<T: Scalar> From<&ItemMetricVector<T>> for MetricPoint<T> {
    fn from(v: &ItemMetricVector<T>) -> Self {
        Self::new(v.item, v.coords().to_vec())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdVector<T>(pub Vec<T>);

impl<T: Scalar> ThresholdVector<T> {
    pub fn zeros(dims: usize) -> Self {
        Self(vec![T::zero(); dims])
    }

    /// τ = −⟨it·σ₁, …, it·σ_d⟩ with σ the population standard deviation of
    /// each dimension over `points`.
    pub fn relaxation(points: &[MetricPoint<T>], iteration: usize) -> Self {
        let dims = points.first().map_or(0, MetricPoint::dims);
        let it = T::from_count(iteration);
        let tau = (0..dims)
            .map(|d| {
                let column: Vec<T> = points.iter().map(|p| p.coords[d]).collect();
                let v = -(it * population_std(&column));
                // Keeps τ = 0 free of negative zero.
                if v == T::zero() {
                    T::zero()
                } else {
                    v
                }
            })
            .collect();
        Self(tau)
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }

    fn is_non_positive(&self) -> bool {
        self.0.iter().all(|&t| t <= T::zero())
    }
}

fn dominates_unchecked<T: Scalar>(a: &[T], b: &[T], tau: &[T]) -> bool {
    let mut strict = false;
    for ((&x, &y), &t) in a.iter().zip(b).zip(tau) {
        if x + t < y {
            return false;
        }
        if x > y {
            strict = true;
        }
    }
    strict
}

/// Whether `a` τ-dominates `b`.
pub fn tau_dominates<T: Scalar>(
    a: &MetricPoint<T>,
    b: &MetricPoint<T>,
    tau: &ThresholdVector<T>,
) -> Result<bool> {
    if a.dims() != b.dims() || a.dims() != tau.dims() {
        return Err(Error::Domain(format!(
            "dimension mismatch: {} vs {} vs τ {}",
            a.dims(),
            b.dims(),
            tau.dims()
        )));
    }
    Ok(dominates_unchecked(&a.coords, &b.coords, &tau.0))
}

/// Indices (ascending) of the points not τ-dominated by any other point.
///
/// For τ ≤ 0 the relation is transitive and implies a strictly larger
/// coordinate sum, so a sort-filter pass suffices: points are visited by
/// descending sum and compared against the current skyline only. Positive
/// thresholds break transitivity and fall back to the pairwise scan.
pub fn tau_pareto_set<T: Scalar>(
    points: &[MetricPoint<T>],
    tau: &ThresholdVector<T>,
) -> Result<Vec<usize>> {
    if let Some(p) = points.iter().find(|p| p.dims() != tau.dims()) {
        return Err(Error::Domain(format!(
            "point of dimension {} with τ of dimension {}",
            p.dims(),
            tau.dims()
        )));
    }
    if tau.is_non_positive() {
        Ok(sort_filter_skyline(points, &tau.0))
    } else {
        Ok(pairwise_skyline(points, &tau.0))
    }
}

fn sort_filter_skyline<T: Scalar>(points: &[MetricPoint<T>], tau: &[T]) -> Vec<usize> {
    let sums: Vec<T> = points
        .iter()
        .map(|p| p.coords.iter().copied().sum())
        .collect();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        sums[b]
            .partial_cmp(&sums[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut window: Vec<usize> = Vec::new();
    for idx in order {
        let p = &points[idx].coords;
        if window
            .iter()
            .any(|&w| dominates_unchecked(&points[w].coords, p, tau))
        {
            continue;
        }
        // Rounding can tie the sums of a dominating pair; evict if so.
        window.retain(|&w| !dominates_unchecked(p, &points[w].coords, tau));
        window.push(idx);
    }
    window.sort_unstable();
    window
}

fn pairwise_skyline<T: Scalar>(points: &[MetricPoint<T>], tau: &[T]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| {
            !points
                .iter()
                .enumerate()
                .any(|(k, q)| k != i && dominates_unchecked(&q.coords, &points[i].coords, tau))
        })
        .collect()
}

/// Anything that can answer "is removing this set a counterfactual?".
pub trait CounterfactualCheck {
    fn is_counterfactual(&mut self, removed: &ItemSet) -> Result<bool, BudgetExhausted>;
}

/// One relaxation round of [`pareto_filtering`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoIteration<T> {
    pub iter: usize,
    pub tau: Vec<T>,
    pub set_size: usize,
    pub cf_found: bool,
}

impl<T: Scalar> ParetoIteration<T> {
    /// `iter,tau,|PS|,cf_found` with τ components joined by `;`.
    pub fn csv_line(&self) -> String {
        let tau: Vec<String> = self.tau.iter().map(|t| t.as_f64().to_string()).collect();
        format!(
            "{},{},{},{}",
            self.iter,
            tau.join(";"),
            self.set_size,
            self.cf_found
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ParetoStop {
    /// A τ-Pareto item set was a counterfactual.
    Found,
    /// The set grew to all of I_G without evicting the target.
    AllItemsExamined,
    /// The relaxation cap was reached first.
    IterationCap,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoOutcome<T> {
    pub items: Option<ItemSet>,
    pub stop: ParetoStop,
    pub iterations: Vec<ParetoIteration<T>>,
}

/// Iteratively relaxed τ-Pareto filtering over precomputed metric vectors.
///
/// Round `it` uses τ = −it·σ and tests the items of the τ-Pareto set; the
/// first counterfactual set is returned. Stops once a tested set equals all
/// of I_G or after `max_iters` rounds.
pub fn pareto_filtering<T: Scalar, C: CounterfactualCheck + ?Sized>(
    vectors: &[ItemMetricVector<T>],
    oracle: &mut C,
    max_iters: usize,
) -> Result<ParetoOutcome<T>, BudgetExhausted> {
    let points: Vec<MetricPoint<T>> = vectors.iter().map(MetricPoint::from).collect();
    let all: ItemSet = points.iter().map(|p| p.item).collect();
    let mut tested = ItemSet::new();
    let mut iterations = Vec::new();
    let mut it = 0;
    loop {
        if !iterations.is_empty() && tested == all {
            return Ok(ParetoOutcome {
                items: None,
                stop: ParetoStop::AllItemsExamined,
                iterations,
            });
        }
        if it == max_iters {
            return Ok(ParetoOutcome {
                items: None,
                stop: ParetoStop::IterationCap,
                iterations,
            });
        }
        let tau = ThresholdVector::relaxation(&points, it);
        let front = tau_pareto_set(&points, &tau).expect("uniform metric dimensions");
        tested = front.iter().map(|&k| points[k].item).collect();
        let cf = oracle.is_counterfactual(&tested)?;
        iterations.push(ParetoIteration {
            iter: it,
            tau: tau.0,
            set_size: tested.len(),
            cf_found: cf,
        });
        it += 1;
        if cf {
            return Ok(ParetoOutcome {
                items: Some(tested),
                stop: ParetoStop::Found,
                iterations,
            });
        }
    }
}
