use crate::dataset::{ItemId, ItemSet};
use crate::error::BudgetExhausted;
use crate::recommender::GroupRecommender;
use crate::scalar::Scalar;

use super::{Candidate, SearchContext};

/// Grow phase with per-item explanatory power, then rebuild the set in
/// descending power order.
///
/// Each grow step attributes power(S)/|S| to the item just added. Rebuild
/// prefixes that are subsets of the penultimate grow set are skipped when
/// `skip_subsets` is on and count as not counterfactual. Falls back to the
/// grow set when no rebuild prefix works.
pub fn exp_rebuild<T: Scalar, R: GroupRecommender<T> + ?Sized>(
    ctx: &mut SearchContext<'_, T, R>,
    candidates: &[Candidate<T>],
    skip_subsets: bool,
) -> Result<Option<ItemSet>, BudgetExhausted> {
    let mut s = ItemSet::new();
    let mut q = ItemSet::new();
    let mut powered: Vec<(ItemId, T)> = Vec::new();
    let mut found = false;
    for c in candidates {
        q.clone_from(&s);
        s.insert(c.item);
        let (cf, power) = ctx.check_cf_and_power(&s)?;
        powered.push((c.item, power / T::from_count(s.len())));
        if cf {
            found = true;
            break;
        }
    }
    if !found {
        return Ok(None);
    }
    // Stable: equal powers keep grow order.
    powered.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    let mut p = ItemSet::new();
    for (item, _) in powered {
        p.insert(item);
        if skip_subsets && p.is_subset(&q) {
            continue;
        }
        if ctx.is_counterfactual(&p)? {
            return Ok(Some(p));
        }
    }
    Ok(Some(s))
}

#[cfg(test)]
mod tests {
    use super::super::testkit::*;
    use super::super::Method;
    use super::*;
    use crate::recommender::CallMeter;

    /// Rank of the target drops with how many of {0,1,2} are removed, and
    /// item 3 alone evicts it.
    fn rule(s: &ItemSet) -> Option<usize> {
        if s.contains(&ItemId(3)) {
            return None;
        }
        Some(1 + 3 * s.len())
    }

    #[test]
    fn skipped_prefixes_leave_only_full_set() {
        let (_, g) = one_user(4);
        let rec = Scripted {
            group: g.clone(),
            target: ItemId(99),
            rule: Box::new(rule),
        };
        let mut ctx = SearchContext::new(
            &rec,
            &g,
            ItemId(99),
            Method::ExpRebuild,
            CallMeter::unlimited(),
        );
        let got = exp_rebuild(&mut ctx, &candidates(&[0, 1, 2, 3]), true).unwrap();
        // powers 0.3, 0.3, 0.3, 0.25 keep grow order; the first three
        // prefixes lie inside Q = {0,1,2}.
        assert_eq!(got, Some(set(&[0, 1, 2, 3])));
        assert_eq!(ctx.calls_used(), 5);
    }

    #[test]
    fn rebuild_finds_high_power_singleton() {
        let (_, g) = one_user(3);
        let rec = Scripted {
            group: g.clone(),
            target: ItemId(99),
            rule: Box::new(|s: &ItemSet| {
                if s.contains(&ItemId(2)) {
                    None
                } else {
                    Some(1)
                }
            }),
        };
        let mut ctx = SearchContext::new(
            &rec,
            &g,
            ItemId(99),
            Method::ExpRebuild,
            CallMeter::unlimited(),
        );
        let got = exp_rebuild(&mut ctx, &candidates(&[0, 1, 2]), true).unwrap();
        assert_eq!(got, Some(set(&[2])));
        assert_eq!(ctx.calls_used(), 4);
    }

    #[test]
    fn rebuild_without_skip_tests_every_prefix() {
        let (_, g) = one_user(4);
        let rec = Scripted {
            group: g.clone(),
            target: ItemId(99),
            rule: Box::new(rule),
        };
        let mut ctx = SearchContext::new(
            &rec,
            &g,
            ItemId(99),
            Method::ExpRebuild,
            CallMeter::unlimited(),
        );
        let got = exp_rebuild(&mut ctx, &candidates(&[0, 1, 2, 3]), false).unwrap();
        assert_eq!(got, Some(set(&[0, 1, 2, 3])));
        assert_eq!(ctx.calls_used(), 8);
    }

    #[test]
    fn power_reorders_rebuild() {
        let (_, g) = one_user(3);
        // Removing 2 pushes the target to rank 10; only {1,2} evicts it.
        let rec = Scripted {
            group: g.clone(),
            target: ItemId(99),
            rule: Box::new(|s: &ItemSet| {
                let has = |i| s.contains(&ItemId(i));
                if has(1) && has(2) {
                    None
                } else if has(2) {
                    Some(10)
                } else {
                    Some(1)
                }
            }),
        };
        let mut ctx = SearchContext::new(
            &rec,
            &g,
            ItemId(99),
            Method::ExpRebuild,
            CallMeter::unlimited(),
        );
        let got = exp_rebuild(&mut ctx, &candidates(&[0, 1, 2]), true).unwrap();
        // powers 0, 0, 1/3 give rebuild order 2, 0, 1; every prefix is tested.
        assert_eq!(got, Some(set(&[0, 1, 2])));
        assert_eq!(ctx.calls_used(), 6);
    }

    #[test]
    fn no_counterfactual_returns_none() {
        let (_, g) = one_user(3);
        let rec = Scripted {
            group: g.clone(),
            target: ItemId(99),
            rule: Box::new(|_| Some(2)),
        };
        let mut ctx = SearchContext::new(
            &rec,
            &g,
            ItemId(99),
            Method::ExpRebuild,
            CallMeter::unlimited(),
        );
        assert_eq!(
            exp_rebuild(&mut ctx, &candidates(&[0, 1, 2]), true).unwrap(),
            None
        );
        assert_eq!(ctx.calls_used(), 3);
    }
}
