use crate::dataset::{ItemId, ItemSet};
use crate::error::BudgetExhausted;
use crate::recommender::GroupRecommender;
use crate::scalar::Scalar;

use super::window::next_combination;
use super::SearchContext;

/// Largest |I_G| the exhaustive search accepts.
pub const EXHAUSTIVE_LIMIT: usize = 20;

/// Minimum-cardinality counterfactual over all non-empty subsets of I_G, the
/// lexicographically first by ascending item id among ties. Callers enforce
/// [`EXHAUSTIVE_LIMIT`].
pub fn exhaustive_minimal<T: Scalar, R: GroupRecommender<T> + ?Sized>(
    ctx: &mut SearchContext<'_, T, R>,
) -> Result<Option<ItemSet>, BudgetExhausted> {
    let all: Vec<ItemId> = ctx.group().union_interactions().iter().copied().collect();
    let n = all.len();
    for k in 1..=n {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let subset: ItemSet = idx.iter().map(|&p| all[p]).collect();
            if ctx.is_counterfactual(&subset)? {
                return Ok(Some(subset));
            }
            if !next_combination(&mut idx, n) {
                break;
            }
        }
    }
    Ok(None)
}
