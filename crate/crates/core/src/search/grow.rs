use crate::dataset::{ItemId, ItemSet};
use crate::error::BudgetExhausted;
use crate::recommender::GroupRecommender;
use crate::scalar::Scalar;

use super::{Candidate, SearchContext};

/// Tests growing prefixes of `candidates` and returns the first counterfactual.
pub fn greedy_grow<T: Scalar, R: GroupRecommender<T> + ?Sized>(
    ctx: &mut SearchContext<'_, T, R>,
    candidates: &[Candidate<T>],
) -> Result<Option<ItemSet>, BudgetExhausted> {
    let mut s = ItemSet::new();
    for c in candidates {
        s.insert(c.item);
        if ctx.is_counterfactual(&s)? {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

/// GreedyGrow, then drop items one at a time (lowest total score first)
/// whenever the rest is still counterfactual.
pub fn grow_and_prune<T: Scalar, R: GroupRecommender<T> + ?Sized>(
    ctx: &mut SearchContext<'_, T, R>,
    candidates: &[Candidate<T>],
) -> Result<Option<ItemSet>, BudgetExhausted> {
    let Some(mut s) = greedy_grow(ctx, candidates)? else {
        return Ok(None);
    };
    let mut order: Vec<&Candidate<T>> = candidates.iter().filter(|c| s.contains(&c.item)).collect();
    order.sort_by(|a, b| {
        a.score
            .partial_cmp(&b.score)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let order: Vec<ItemId> = order.into_iter().map(|c| c.item).collect();
    for item in order {
        if s.len() == 1 {
            break;
        }
        s.remove(&item);
        if !ctx.is_counterfactual(&s)? {
            s.insert(item);
        }
    }
    Ok(Some(s))
}
