//! Item-level metrics and the five-component metric vectors that rank
//! candidate items.

use std::io::Write;

use serde::Serialize;

use crate::dataset::{Group, ItemId, RatingsDataset, UserId};
use crate::error::{BudgetExhausted, Error, Result};
use crate::recommender::{CallMeter, GroupRecommender, RecommendationList};
use crate::scalar::Scalar;

/// Number of metric components per item.
pub const METRIC_DIMS: usize = 5;

/// Metric embedding of one interacted item.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ItemMetricVector<T> {
    pub item: ItemId,
    pub rc_group: T,
    pub rc_public: T,
    pub rt_group: T,
    pub rt_public: T,
    pub influence: T,
    pub total_score: T,
}

impl<T: Scalar> ItemMetricVector<T> {
    pub fn new(
        item: ItemId,
        rc_group: T,
        rc_public: T,
        rt_group: T,
        rt_public: T,
        influence: T,
    ) -> Self {
        Self {
            item,
            rc_group,
            rc_public,
            rt_group,
            rt_public,
            influence,
            total_score: rc_group + rc_public + rt_group + rt_public + influence,
        }
    }

    /// Components in the fixed order (rc_g, rc_p, rt_g, rt_p, infl).
    pub fn coords(&self) -> [T; METRIC_DIMS] {
        [
            self.rc_group,
            self.rc_public,
            self.rt_group,
            self.rt_public,
            self.influence,
        ]
    }
}

/// rc(i, S): fraction of `users` who interacted with `item`.
pub fn item_recognition<T: Scalar>(
    ds: &RatingsDataset<T>,
    item: ItemId,
    users: &[UserId],
) -> Result<T> {
    if users.is_empty() {
        return Err(Error::Domain(
            "item recognition over an empty user set".into(),
        ));
    }
    let hits = users
        .iter()
        .filter(|&&u| ds.has_interacted(u, item))
        .count();
    Ok(T::from_count(hits) / T::from_count(users.len()))
}

/// rt(i, S): mean rating of `item` over `users`, absent ratings counting zero.
pub fn item_rating<T: Scalar>(ds: &RatingsDataset<T>, item: ItemId, users: &[UserId]) -> Result<T> {
    if users.is_empty() {
        return Err(Error::Domain("item rating over an empty user set".into()));
    }
    let total: T = users.iter().map(|&u| ds.rating(u, item)).sum();
    Ok(total / T::from_count(users.len()))
}

/// Per-member recScore(t, I_u) values, fetched lazily and reused across items.
#[derive(Debug)]
pub struct InfluenceCache<T> {
    target: ItemId,
    scores: Vec<Option<T>>,
}

impl<T: Scalar> InfluenceCache<T> {
    pub fn new(group: &Group, target: ItemId) -> Self {
        Self {
            target,
            scores: vec![None; group.len()],
        }
    }

    fn member_score<R: GroupRecommender<T> + ?Sized>(
        &mut self,
        rec: &R,
        group: &Group,
        member: usize,
        meter: &mut CallMeter,
    ) -> Result<T, BudgetExhausted> {
        if let Some(s) = self.scores[member] {
            return Ok(s);
        }
        let s = rec.rec_score(
            group.members()[member],
            &group.member_interactions()[member],
            self.target,
            meter,
        )?;
        self.scores[member] = Some(s);
        Ok(s)
    }

    /// infl(i, t, I, G).
    pub fn influence<R: GroupRecommender<T> + ?Sized>(
        &mut self,
        rec: &R,
        group: &Group,
        item: ItemId,
        meter: &mut CallMeter,
    ) -> Result<T, BudgetExhausted> {
        let mut total = T::zero();
        let mut count = 0usize;
        for (k, hist) in group.member_interactions().iter().enumerate() {
            if hist.contains(&item) {
                total += self.member_score(rec, group, k, meter)?;
                count += 1;
            }
        }
        if count == 0 {
            return Ok(T::zero());
        }
        Ok(total / T::from_count(count))
    }
}

/// infl(i, t, I, G) without caching: one rec_score call per member in G′.
pub fn item_influence<T: Scalar, R: GroupRecommender<T> + ?Sized>(
    rec: &R,
    group: &Group,
    item: ItemId,
    target: ItemId,
    meter: &mut CallMeter,
) -> Result<T, BudgetExhausted> {
    let mut total = T::zero();
    let mut count = 0usize;
    for (&u, hist) in group.members().iter().zip(group.member_interactions()) {
        if hist.contains(&item) {
            total += rec.rec_score(u, hist, target, meter)?;
            count += 1;
        }
    }
    if count == 0 {
        return Ok(T::zero());
    }
    Ok(total / T::from_count(count))
}

/// expwr: normalized rank of `target` in `list`; 1 when it is absent.
pub fn explanatory_power<T: Scalar>(list: &RecommendationList<T>, target: ItemId) -> T {
    match list.rank(target) {
        None => T::one(),
        Some(rank) => (T::from_count(rank - 1) / T::from_count(list.m())).min(T::one()),
    }
}

/// The users outside `group`.
pub fn public_users<T: Scalar>(ds: &RatingsDataset<T>, group: &Group) -> Vec<UserId> {
    ds.users().filter(|&u| !group.contains(u)).collect()
}

/// Public recognition and rating from the item's rater list: exact, and
/// linear in the number of raters rather than in |U|.
fn public_components<T: Scalar>(
    ds: &RatingsDataset<T>,
    group: &Group,
    item: ItemId,
    n_public: usize,
) -> (T, T) {
    if n_public == 0 {
        return (T::zero(), T::zero());
    }
    let mut hits = 0usize;
    let mut total = T::zero();
    for &(u, r) in ds.item_users(item) {
        if !group.contains(u) {
            hits += 1;
            total += r;
        }
    }
    let n = T::from_count(n_public);
    (T::from_count(hits) / n, total / n)
}

/// One metric vector per item of I_G, in ascending item order. Influence uses
/// one rec_score call per group member at most.
pub fn build_metric_vectors<T: Scalar, R: GroupRecommender<T> + ?Sized>(
    ds: &RatingsDataset<T>,
    rec: &R,
    group: &Group,
    target: ItemId,
    meter: &mut CallMeter,
) -> Result<Vec<ItemMetricVector<T>>, BudgetExhausted> {
    let members = group.members();
    let n_public = ds.num_users() - group.len();
    let mut cache = InfluenceCache::new(group, target);
    let mut out = Vec::with_capacity(group.union_interactions().len());
    for &item in group.union_interactions() {
        let rc_group = item_recognition(ds, item, members).unwrap_or_else(|_| T::zero());
        let rt_group = item_rating(ds, item, members).unwrap_or_else(|_| T::zero());
        let (rc_public, rt_public) = public_components(ds, group, item, n_public);
        let influence = cache.influence(rec, group, item, meter)?;
        out.push(ItemMetricVector::new(
            item, rc_group, rc_public, rt_group, rt_public, influence,
        ));
    }
    Ok(out)
}

/// Writes vectors as `item,rc_g,rc_p,rt_g,rt_p,infl,total` with item labels.
pub fn write_metric_csv<T: Scalar, W: Write>(
    ds: &RatingsDataset<T>,
    vectors: &[ItemMetricVector<T>],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["item", "rc_g", "rc_p", "rt_g", "rt_p", "infl", "total"])?;
    for v in vectors {
        let mut record = vec![ds.item_label(v.item).to_owned()];
        record.extend(v.coords().iter().map(|c| c.as_f64().to_string()));
        record.push(v.total_score.as_f64().to_string());
        w.write_record(&record)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<metric csv>".into(),
        source,
    })?;
    Ok(())
}
