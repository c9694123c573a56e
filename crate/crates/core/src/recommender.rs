//! The black-box group recommender and its call meter.
//!
//! Everything outside this module talks to the recommender only through the
//! [`GroupRecommender`] trait. [`UserKnn`] is the baseline implementation:
//! user-based collaborative filtering with cosine similarity over normalized
//! ratings, and average aggregation across group members.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::Serialize;

use crate::dataset::{GroupInteractions, ItemId, ItemSet, RatingsDataset, UserId};
use crate::error::BudgetExhausted;
use crate::scalar::Scalar;

/// Counts recommender invocations (unit cost each) against an optional budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CallMeter {
    calls_used: u64,
    budget: Option<u64>,
}

impl CallMeter {
    pub fn with_budget(budget: u64) -> Self {
        Self {
            calls_used: 0,
            budget: Some(budget),
        }
    }

    pub fn unlimited() -> Self {
        Self {
            calls_used: 0,
            budget: None,
        }
    }

    pub fn calls_used(&self) -> u64 {
        self.calls_used
    }

    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    pub fn remaining(&self) -> Option<u64> {
        self.budget.map(|b| b.saturating_sub(self.calls_used))
    }

    /// Records one call, or refuses when the budget is spent.
    pub fn charge(&mut self) -> Result<(), BudgetExhausted> {
        if let Some(b) = self.budget {
            if self.calls_used >= b {
                return Err(BudgetExhausted {
                    calls_used: self.calls_used,
                });
            }
        }
        self.calls_used += 1;
        Ok(())
    }
}

/// A ranked top-m list with non-increasing scores.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecommendationList<T> {
    entries: Vec<(ItemId, T)>,
    m: usize,
}

impl<T: Scalar> RecommendationList<T> {
    /// Sorts `scored` by score descending (ties by ascending item id) and
    /// keeps the first `m`.
    pub fn top_m(mut scored: Vec<(ItemId, T)>, m: usize) -> Self {
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(Ordering::Equal)
                .then(a.0.cmp(&b.0))
        });
        scored.truncate(m);
        Self { entries: scored, m }
    }

    pub fn entries(&self) -> &[(ItemId, T)] {
        &self.entries
    }

    pub fn items(&self) -> impl Iterator<Item = ItemId> + '_ {
        self.entries.iter().map(|&(i, _)| i)
    }

    /// Configured list length m (the list itself may be shorter).
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// 1-based rank of `item`.
    pub fn rank(&self, item: ItemId) -> Option<usize> {
        self.entries
            .iter()
            .position(|&(i, _)| i == item)
            .map(|p| p + 1)
    }

    pub fn contains(&self, item: ItemId) -> bool {
        self.rank(item).is_some()
    }

    pub fn score(&self, item: ItemId) -> Option<T> {
        self.entries
            .iter()
            .find(|&&(i, _)| i == item)
            .map(|&(_, s)| s)
    }

    pub fn top1(&self) -> Option<ItemId> {
        self.entries.first().map(|&(i, _)| i)
    }
}

/// The black-box group recommender π.
pub trait GroupRecommender<T: Scalar>: Sync {
    /// Configured list length m.
    fn list_length(&self) -> usize;

    /// π(I): the top-m group list for the given member histories. Costs one call.
    fn recommend(
        &self,
        interactions: &GroupInteractions,
        meter: &mut CallMeter,
    ) -> Result<RecommendationList<T>, BudgetExhausted>;

    /// recScore(t, I_u): score of `target` for a single user whose history is
    /// exactly `history`. Costs one call.
    fn rec_score(
        &self,
        user: UserId,
        history: &ItemSet,
        target: ItemId,
        meter: &mut CallMeter,
    ) -> Result<T, BudgetExhausted>;
}

pub const DEFAULT_NEIGHBORS: usize = 50;
pub const DEFAULT_LIST_LENGTH: usize = 10;

/// User-based CF with average aggregation.
///
/// When predicting for a group member, that member is replaced by a
/// pseudo-user holding the supplied history, and the other members' rows are
/// replaced by their supplied histories too, so a removal is seen consistently
/// by every neighbour computation.
#[derive(Debug, Clone, Copy)]
pub struct UserKnn<'a, T> {
    ds: &'a RatingsDataset<T>,
    k_neighbors: usize,
    list_length: usize,
}

impl<'a, T: Scalar> UserKnn<'a, T> {
    pub fn new(ds: &'a RatingsDataset<T>, k_neighbors: usize, list_length: usize) -> Self {
        assert!(k_neighbors > 0 && list_length > 0);
        Self {
            ds,
            k_neighbors,
            list_length,
        }
    }

    pub fn dataset(&self) -> &'a RatingsDataset<T> {
        self.ds
    }

    fn member_row(&self, user: UserId, history: &ItemSet) -> Vec<(ItemId, T)> {
        self.ds
            .user_items(user)
            .iter()
            .copied()
            .filter(|(i, _)| history.contains(i))
            .collect()
    }

    fn member_scores(&self, interactions: &GroupInteractions) -> Vec<BTreeMap<ItemId, T>> {
        let rows: Vec<(UserId, Vec<(ItemId, T)>)> = interactions
            .members
            .iter()
            .map(|(u, hist)| (*u, self.member_row(*u, hist)))
            .collect();
        rows.iter()
            .map(|(u, row)| {
                let overrides: Vec<(UserId, &[(ItemId, T)])> = rows
                    .iter()
                    .filter(|(v, _)| v != u)
                    .map(|(v, r)| (*v, r.as_slice()))
                    .collect();
                predict(self.ds, row, Some(*u), &overrides, self.k_neighbors)
            })
            .collect()
    }
}

impl<T: Scalar> GroupRecommender<T> for UserKnn<'_, T> {
    fn list_length(&self) -> usize {
        self.list_length
    }

    fn recommend(
        &self,
        interactions: &GroupInteractions,
        meter: &mut CallMeter,
    ) -> Result<RecommendationList<T>, BudgetExhausted> {
        meter.charge()?;
        let per_member = self.member_scores(interactions);
        let excluded = interactions.union();
        let mut totals: BTreeMap<ItemId, T> = BTreeMap::new();
        for scores in &per_member {
            for (&item, &s) in scores {
                if !excluded.contains(&item) {
                    *totals.entry(item).or_insert_with(T::zero) += s;
                }
            }
        }
        let n = T::from_count(per_member.len().max(1));
        let scored = totals.into_iter().map(|(i, s)| (i, s / n)).collect();
        Ok(RecommendationList::top_m(scored, self.list_length))
    }

    fn rec_score(
        &self,
        user: UserId,
        history: &ItemSet,
        target: ItemId,
        meter: &mut CallMeter,
    ) -> Result<T, BudgetExhausted> {
        meter.charge()?;
        debug_assert!(!history.contains(&target));
        let row = self.member_row(user, history);
        let scores = predict(self.ds, &row, Some(user), &[], self.k_neighbors);
        Ok(scores.get(&target).copied().unwrap_or_else(T::zero))
    }
}

/// CF scores for a pseudo-user with the given rated history, against every
/// user in `ds`. Items in `history` are excluded from the output.
pub fn predict_user_scores<T: Scalar>(
    ds: &RatingsDataset<T>,
    history: &[(ItemId, T)],
    k_neighbors: usize,
) -> BTreeMap<ItemId, T> {
    predict(ds, history, None, &[], k_neighbors)
}

/// The top-k neighbours (similarity > 0) of a pseudo-user, most similar first,
/// ties by ascending user id.
pub fn nearest_neighbors<T: Scalar>(
    ds: &RatingsDataset<T>,
    history: &[(ItemId, T)],
    k_neighbors: usize,
) -> Vec<(UserId, T)> {
    neighbors(ds, history, None, &[], k_neighbors)
}

fn neighbors<T: Scalar>(
    ds: &RatingsDataset<T>,
    row: &[(ItemId, T)],
    exclude: Option<UserId>,
    overrides: &[(UserId, &[(ItemId, T)])],
    k: usize,
) -> Vec<(UserId, T)> {
    let own_norm = row.iter().map(|&(_, r)| r * r).sum::<T>().sqrt();
    if own_norm <= T::zero() {
        return Vec::new();
    }
    let skip = |v: UserId| Some(v) == exclude || overrides.iter().any(|(o, _)| *o == v);

    let mut dots = vec![T::zero(); ds.num_users()];
    let mut touched: Vec<UserId> = Vec::new();
    for &(item, r) in row {
        for &(v, rv) in ds.item_users(item) {
            if skip(v) {
                continue;
            }
            if dots[v.index()] == T::zero() {
                touched.push(v);
            }
            dots[v.index()] += r * rv;
        }
    }
    let mut sims: Vec<(UserId, T)> = touched
        .into_iter()
        .map(|v| (v, dots[v.index()] / (own_norm * ds.user_norm(v))))
        .collect();
    for &(v, vrow) in overrides {
        if Some(v) == exclude {
            continue;
        }
        let norm = vrow.iter().map(|&(_, r)| r * r).sum::<T>().sqrt();
        if norm <= T::zero() {
            continue;
        }
        sims.push((v, sparse_dot(row, vrow) / (own_norm * norm)));
    }
    sims.retain(|&(_, s)| s > T::zero());
    sims.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
    sims.truncate(k);
    sims
}

fn sparse_dot<T: Scalar>(a: &[(ItemId, T)], b: &[(ItemId, T)]) -> T {
    let (mut x, mut y) = (0, 0);
    let mut acc = T::zero();
    while x < a.len() && y < b.len() {
        match a[x].0.cmp(&b[y].0) {
            Ordering::Less => x += 1,
            Ordering::Greater => y += 1,
            Ordering::Equal => {
                acc += a[x].1 * b[y].1;
                x += 1;
                y += 1;
            }
        }
    }
    acc
}

/// Similarity-weighted average of neighbour ratings; a neighbour that did not
/// rate an item contributes zero to it. Result lies in [0, 1].
fn predict<T: Scalar>(
    ds: &RatingsDataset<T>,
    row: &[(ItemId, T)],
    exclude: Option<UserId>,
    overrides: &[(UserId, &[(ItemId, T)])],
    k: usize,
) -> BTreeMap<ItemId, T> {
    let nbrs = neighbors(ds, row, exclude, overrides, k);
    let weight: T = nbrs.iter().map(|&(_, s)| s).sum();
    let mut acc: BTreeMap<ItemId, T> = BTreeMap::new();
    if weight <= T::zero() {
        return acc;
    }
    for &(v, s) in &nbrs {
        let vrow = overrides
            .iter()
            .find(|(o, _)| *o == v)
            .map(|&(_, r)| r)
            .unwrap_or_else(|| ds.user_items(v));
        for &(item, r) in vrow {
            *acc.entry(item).or_insert_with(T::zero) += s * r;
        }
    }
    for &(item, _) in row {
        acc.remove(&item);
    }
    for v in acc.values_mut() {
        *v = (*v / weight).min(T::one());
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> RatingsDataset<f64> {
        // a and b overlap on x; c is disjoint from both.
        RatingsDataset::from_triples([
            ("a", "x", 1.0),
            ("a", "y", 0.5),
            ("b", "x", 0.5),
            ("b", "z", 1.0),
            ("c", "w", 1.0),
        ])
    }

    #[test]
    fn meter_enforces_budget() {
        let mut m = CallMeter::with_budget(2);
        assert!(m.charge().is_ok());
        assert!(m.charge().is_ok());
        assert_eq!(m.charge(), Err(BudgetExhausted { calls_used: 2 }));
        assert_eq!(m.calls_used(), 2);
        let mut zero = CallMeter::with_budget(0);
        assert!(zero.charge().is_err());
    }

    #[test]
    fn budget_zero_refuses_recommend() {
        let ds = tiny();
        let rec = UserKnn::new(&ds, 5, 10);
        let g = GroupInteractions::single(UserId(0), ds.interacted_items(UserId(0)));
        assert!(rec.recommend(&g, &mut CallMeter::with_budget(0)).is_err());
    }

    #[test]
    fn identical_user_is_top_neighbor() {
        let ds = tiny();
        let row = ds.user_items(UserId(0)).to_vec();
        let n = nearest_neighbors(&ds, &row, 5);
        assert_eq!(n[0].0, UserId(0));
        assert!((n[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_history_has_no_scores() {
        let ds = RatingsDataset::from_triples([("a", "x", 1.0f64), ("b", "y", 1.0)]);
        let x = ds.item_by_label("x").unwrap();
        let scores = predict_user_scores(&ds, &[(x, 1.0)], 5);
        assert!(scores.is_empty());
        assert!(predict_user_scores(&ds, &[], 5).is_empty());
    }

    #[test]
    fn one_neighbor_prediction_by_hand() {
        // Pseudo-user rated only x (1.0). Neighbours: a (x=1, y=.5) and b (x=.5, z=1).
        // sim_a = 1 / (1 * sqrt(1.25)), sim_b = .5 / (1 * sqrt(1.25)).
        // score(y) = sim_a * .5 / (sim_a + sim_b) = .5 / 1.5; score(z) = .5 / 1.5.
        let ds = tiny();
        let scores = predict_user_scores(&ds, &[(ItemId(1), 1.0)], 5);
        let y = ds.item_by_label("y").unwrap();
        let z = ds.item_by_label("z").unwrap();
        assert!((scores[&y] - 1.0 / 3.0).abs() < 1e-12);
        assert!((scores[&z] - 1.0 / 3.0).abs() < 1e-12);
        assert!(!scores.contains_key(&ItemId(1)));
    }

    #[test]
    fn recommend_is_pure_and_excludes_history() {
        let ds = tiny();
        let rec = UserKnn::new(&ds, 5, 10);
        let g = GroupInteractions::single(UserId(0), ds.interacted_items(UserId(0)));
        let mut meter = CallMeter::unlimited();
        let a = rec.recommend(&g, &mut meter).unwrap();
        let b = rec.recommend(&g, &mut meter).unwrap();
        assert_eq!(a, b);
        assert_eq!(meter.calls_used(), 2);
        for item in a.items() {
            assert!(!g.union().contains(&item));
        }
    }

    #[test]
    fn rec_score_matches_individual_list() {
        let ds = tiny();
        let rec = UserKnn::new(&ds, 5, 10);
        let u = UserId(0);
        let hist = ds.interacted_items(u);
        let mut meter = CallMeter::unlimited();
        let list = rec
            .recommend(&GroupInteractions::single(u, hist.clone()), &mut meter)
            .unwrap();
        let top = list.top1().unwrap();
        let s = rec.rec_score(u, &hist, top, &mut meter).unwrap();
        assert_eq!(Some(s), list.score(top));
        assert_eq!(
            rec.rec_score(u, &ItemSet::new(), top, &mut meter).unwrap(),
            0.0
        );
    }

    #[test]
    fn top_m_breaks_ties_by_item_id() {
        let l = RecommendationList::top_m(
            vec![(ItemId(3), 0.5f64), (ItemId(1), 0.5), (ItemId(2), 0.9)],
            2,
        );
        assert_eq!(l.items().collect::<Vec<_>>(), vec![ItemId(2), ItemId(1)]);
        assert_eq!(l.rank(ItemId(1)), Some(2));
        assert_eq!(l.rank(ItemId(3)), None);
        assert_eq!(l.m(), 2);
    }
}
