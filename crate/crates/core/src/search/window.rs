use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::dataset::{ItemId, ItemSet};
use crate::error::BudgetExhausted;
use crate::recommender::GroupRecommender;
use crate::scalar::Scalar;

use super::grow::{greedy_grow, grow_and_prune};
use super::{Candidate, Found, SearchContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindowRefiner {
    Powerset,
    GreedyGrow,
    GrowPrune,
}

/// Window sizes w, 2w, ... below |H|, then |H| itself.
fn window_sizes(w: usize, n: usize) -> Vec<usize> {
    let mut sizes: Vec<usize> = (1..).map(|k| k * w).take_while(|&s| s < n).collect();
    sizes.push(n);
    sizes
}

/// Advances `idx` to the next k-combination of 0..n in lexicographic order.
pub(crate) fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Smallest counterfactual subset of a counterfactual window, by increasing
/// cardinality then position order. The window itself is returned uncalled.
fn refine_powerset<T: Scalar, R: GroupRecommender<T> + ?Sized>(
    ctx: &mut SearchContext<'_, T, R>,
    window: &[ItemId],
) -> Result<ItemSet, BudgetExhausted> {
    let n = window.len();
    for k in 1..n {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let subset: ItemSet = idx.iter().map(|&p| window[p]).collect();
            if ctx.is_counterfactual(&subset)? {
                return Ok(subset);
            }
            if !next_combination(&mut idx, n) {
                break;
            }
        }
    }
    Ok(window.iter().copied().collect())
}

fn scan<T: Scalar, R: GroupRecommender<T> + ?Sized>(
    ctx: &mut SearchContext<'_, T, R>,
    candidates: &[Candidate<T>],
    w: usize,
    refiner: WindowRefiner,
) -> Result<Option<Found>, BudgetExhausted> {
    let n = candidates.len();
    if n == 0 {
        return Ok(None);
    }
    let w = w.max(1);
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    for size in window_sizes(w, n) {
        for start in 0..n {
            let end = (start + size).min(n);
            if !seen.insert((start, end)) {
                continue;
            }
            let slice = &candidates[start..end];
            let items: ItemSet = slice.iter().map(|c| c.item).collect();
            if !ctx.is_counterfactual(&items)? {
                continue;
            }
            let window: Vec<ItemId> = slice.iter().map(|c| c.item).collect();
            let refined = match refiner {
                WindowRefiner::Powerset => Some(refine_powerset(ctx, &window)?),
                WindowRefiner::GreedyGrow => greedy_grow(ctx, slice)?,
                WindowRefiner::GrowPrune => grow_and_prune(ctx, slice)?,
            };
            // A counterfactual window always refines to something; the
            // fallback only matters for non-deterministic recommenders.
            let items = refined.unwrap_or(items);
            return Ok(Some(Found {
                items,
                window: Some(window),
            }));
        }
    }
    Ok(None)
}

/// Sliding windows of growing size over `candidates`; the first
/// counterfactual window is refined by powerset enumeration.
pub fn fixed_window<T: Scalar, R: GroupRecommender<T> + ?Sized>(
    ctx: &mut SearchContext<'_, T, R>,
    candidates: &[Candidate<T>],
    w: usize,
) -> Result<Option<Found>, BudgetExhausted> {
    scan(ctx, candidates, w, WindowRefiner::Powerset)
}

/// FixedWindow with a grow heuristic, run on the window order, as refiner.
pub fn fixed_window_hybrid<T: Scalar, R: GroupRecommender<T> + ?Sized>(
    ctx: &mut SearchContext<'_, T, R>,
    candidates: &[Candidate<T>],
    w: usize,
    refiner: WindowRefiner,
) -> Result<Option<Found>, BudgetExhausted> {
    scan(ctx, candidates, w, refiner)
}

#[cfg(test)]
mod tests {
    use super::super::testkit::*;
    use super::super::Method;
    use super::*;
    use crate::recommender::CallMeter;

    #[test]
    fn sizes() {
        assert_eq!(window_sizes(15, 40), vec![15, 30, 40]);
        assert_eq!(window_sizes(15, 30), vec![15, 30]);
        assert_eq!(window_sizes(15, 7), vec![7]);
        assert_eq!(window_sizes(1, 3), vec![1, 2, 3]);
    }

    #[test]
    fn combinations_are_lexicographic() {
        let mut idx = vec![0, 1];
        let mut all = vec![idx.clone()];
        while next_combination(&mut idx, 4) {
            all.push(idx.clone());
        }
        assert_eq!(
            all,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
    }

    #[test]
    fn pair_found_after_singletons() {
        let (_, g) = one_user(20);
        let order: Vec<u32> = (0..20).collect();
        // Items at window positions 3 and 4 together evict the target.
        let rec = Scripted {
            group: g.clone(),
            target: ItemId(99),
            rule: Box::new(|s: &ItemSet| {
                if s.contains(&ItemId(3)) && s.contains(&ItemId(4)) {
                    None
                } else {
                    Some(2)
                }
            }),
        };
        let mut ctx = SearchContext::new(
            &rec,
            &g,
            ItemId(99),
            Method::FixedWindow,
            CallMeter::unlimited(),
        );
        let found = fixed_window(&mut ctx, &candidates(&order), 15)
            .unwrap()
            .unwrap();
        assert_eq!(found.items, set(&[3, 4]));
        let window = found.window.unwrap();
        assert_eq!(window.len(), 15);
        assert!(found.items.iter().all(|i| window.contains(i)));
        // 1 window + 15 singletons + pairs up to (3,4) in lexicographic order.
        let pairs_before = 14 + 13 + 12 + 1;
        assert_eq!(ctx.calls_used(), 1 + 15 + pairs_before);
    }

    #[test]
    fn wide_window_is_whole_list() {
        let (_, g) = one_user(4);
        let rec = Scripted {
            group: g.clone(),
            target: ItemId(99),
            rule: Box::new(|s: &ItemSet| if s.len() == 4 { None } else { Some(1) }),
        };
        let mut ctx = SearchContext::new(
            &rec,
            &g,
            ItemId(99),
            Method::FixedWindow,
            CallMeter::unlimited(),
        );
        let found = fixed_window(&mut ctx, &candidates(&[0, 1, 2, 3]), 15)
            .unwrap()
            .unwrap();
        assert_eq!(found.items, set(&[0, 1, 2, 3]));
        assert_eq!(
            found.window.unwrap(),
            vec![ItemId(0), ItemId(1), ItemId(2), ItemId(3)]
        );
        // window + 4 + 6 + 4 proper subsets; the window itself is not re-tested
        assert_eq!(ctx.calls_used(), 1 + 14);
    }

    #[test]
    fn tail_windows_are_candidates() {
        let (_, g) = one_user(5);
        let rec = Scripted {
            group: g.clone(),
            target: ItemId(99),
            rule: Box::new(|s: &ItemSet| if s == &set(&[4]) { None } else { Some(1) }),
        };
        let mut ctx = SearchContext::new(
            &rec,
            &g,
            ItemId(99),
            Method::FixedWindow,
            CallMeter::unlimited(),
        );
        let found = fixed_window(&mut ctx, &candidates(&[0, 1, 2, 3, 4]), 2)
            .unwrap()
            .unwrap();
        assert_eq!(found.items, set(&[4]));
        assert_eq!(found.window.unwrap(), vec![ItemId(4)]);
    }

    #[test]
    fn hybrid_greedy_returns_whole_window_when_needed() {
        let (_, g) = one_user(6);
        let rec = Scripted {
            group: g.clone(),
            target: ItemId(99),
            rule: Box::new(|s: &ItemSet| {
                if s.contains(&ItemId(0)) && s.contains(&ItemId(2)) {
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
            Method::FixedWindowGreedyGrow,
            CallMeter::unlimited(),
        );
        let h = candidates(&[0, 1, 2, 3, 4, 5]);
        let found = fixed_window_hybrid(&mut ctx, &h, 3, WindowRefiner::GreedyGrow)
            .unwrap()
            .unwrap();
        assert_eq!(found.items, set(&[0, 1, 2]));
        let mut ctx = SearchContext::new(
            &rec,
            &g,
            ItemId(99),
            Method::FixedWindowGrowPrune,
            CallMeter::unlimited(),
        );
        let pruned = fixed_window_hybrid(&mut ctx, &h, 3, WindowRefiner::GrowPrune)
            .unwrap()
            .unwrap();
        assert_eq!(pruned.items, set(&[0, 2]));
    }

    #[test]
    fn exhausted_budget_is_an_error() {
        let (_, g) = one_user(20);
        let rec = Scripted {
            group: g.clone(),
            target: ItemId(99),
            rule: Box::new(|s: &ItemSet| if s.len() >= 10 { None } else { Some(1) }),
        };
        let mut ctx = SearchContext::new(
            &rec,
            &g,
            ItemId(99),
            Method::FixedWindow,
            CallMeter::with_budget(50),
        );
        let order: Vec<u32> = (0..20).collect();
        assert!(fixed_window(&mut ctx, &candidates(&order), 15).is_err());
        assert_eq!(ctx.calls_used(), 50);
    }
}
