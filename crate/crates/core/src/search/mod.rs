//! Counterfactual search: the validity check, the heuristics, and the
//! pipeline that wires metric vectors, optional Pareto filtering and a
//! heuristic into one metered run.

mod exhaustive;
mod grow;
mod rebuild;
mod window;

use std::fmt;
use std::marker::PhantomData;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{Group, ItemId, ItemSet, RatingsDataset, UserId};
use crate::error::{BudgetExhausted, Error};
use crate::metrics::{build_metric_vectors, explanatory_power, ItemMetricVector};
use crate::pareto::{
    pareto_filtering, CounterfactualCheck, ParetoOutcome, ParetoStop, DEFAULT_MAX_ITERS,
};
use crate::recommender::{CallMeter, GroupRecommender};
use crate::scalar::Scalar;

pub use exhaustive::{exhaustive_minimal, EXHAUSTIVE_LIMIT};
pub use grow::{greedy_grow, grow_and_prune};
pub use rebuild::exp_rebuild;
pub use window::{fixed_window, fixed_window_hybrid, WindowRefiner};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Method {
    GreedyGrow,
    GrowPrune,
    ExpRebuild,
    FixedWindow,
    FixedWindowGreedyGrow,
    FixedWindowGrowPrune,
    ParetoFiltering,
    Exhaustive,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::GreedyGrow,
        Method::GrowPrune,
        Method::ExpRebuild,
        Method::FixedWindow,
        Method::FixedWindowGreedyGrow,
        Method::FixedWindowGrowPrune,
        Method::ParetoFiltering,
        Method::Exhaustive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::GreedyGrow => "GreedyGrow",
            Method::GrowPrune => "GrowPrune",
            Method::ExpRebuild => "ExpRebuild",
            Method::FixedWindow => "FixedWindow",
            Method::FixedWindowGreedyGrow => "FixedWindowGreedyGrow",
            Method::FixedWindowGrowPrune => "FixedWindowGrowPrune",
            Method::ParetoFiltering => "ParetoFiltering",
            Method::Exhaustive => "Exhaustive",
        }
    }

    /// Whether the method reads a candidate list (and so can be combined with
    /// a Pareto-filtered candidate source).
    pub fn uses_candidates(self) -> bool {
        !matches!(self, Method::ParetoFiltering | Method::Exhaustive)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<Method> for String {
    fn from(m: Method) -> Self {
        m.name().to_owned()
    }
}

impl TryFrom<String> for Method {
    type Error = Error;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name().to_ascii_lowercase() == key)
            .or(match key.as_str() {
                "growandprune" => Some(Method::GrowPrune),
                "pareto" => Some(Method::ParetoFiltering),
                _ => None,
            })
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

/// An interacted item with its total score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate<T> {
    pub item: ItemId,
    pub score: T,
}

/// I_G sorted by total score descending, ties by ascending item id.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateList<T> {
    entries: Vec<Candidate<T>>,
}

impl<T: Scalar> CandidateList<T> {
    pub fn from_vectors(vectors: &[ItemMetricVector<T>]) -> Self {
        let mut entries: Vec<Candidate<T>> = vectors
            .iter()
            .map(|v| Candidate {
                item: v.item,
                score: v.total_score,
            })
            .collect();
        entries.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.item.cmp(&b.item))
        });
        Self { entries }
    }

    /// Keeps only `keep`, preserving order.
    pub fn restrict(&self, keep: &ItemSet) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .copied()
                .filter(|c| keep.contains(&c.item))
                .collect(),
        }
    }

    pub fn entries(&self) -> &[Candidate<T>] {
        &self.entries
    }

    pub fn items(&self) -> Vec<ItemId> {
        self.entries.iter().map(|c| c.item).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One recommender call issued during search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: u64,
    pub method: Method,
    pub set_size: usize,
    pub cf_found: bool,
    pub rank_of_t: Option<usize>,
    pub removed: Vec<ItemId>,
}

/// Result of one recommend call on I_G ∖ S.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe<T> {
    pub counterfactual: bool,
    pub rank: Option<usize>,
    pub power: T,
}

/// Tuning knobs shared by the heuristics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Initial FixedWindow size w.
    pub window: usize,
    /// Relaxation cap ν for Pareto filtering.
    pub max_pareto_iters: usize,
    /// ExpRebuild only tests rebuild prefixes that are not subsets of the
    /// penultimate grow set. Disable to test every prefix.
    pub rebuild_skip_subsets: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            window: 15,
            max_pareto_iters: DEFAULT_MAX_ITERS,
            rebuild_skip_subsets: true,
        }
    }
}

/// Metered, traced access to the recommender for a single search run.
pub struct SearchContext<'a, T, R: ?Sized> {
    recommender: &'a R,
    group: &'a Group,
    target: ItemId,
    meter: CallMeter,
    method: Method,
    trace: Vec<TraceRecord>,
    _scalar: PhantomData<T>,
}

impl<'a, T: Scalar, R: GroupRecommender<T> + ?Sized> SearchContext<'a, T, R> {
    pub fn new(
        recommender: &'a R,
        group: &'a Group,
        target: ItemId,
        method: Method,
        meter: CallMeter,
    ) -> Self {
        Self {
            recommender,
            group,
            target,
            meter,
            method,
            trace: Vec::new(),
            _scalar: PhantomData,
        }
    }

    pub fn group(&self) -> &Group {
        self.group
    }

    pub fn target(&self) -> ItemId {
        self.target
    }

    pub fn calls_used(&self) -> u64 {
        self.meter.calls_used()
    }

    pub fn meter(&self) -> &CallMeter {
        &self.meter
    }

    /// Labels subsequent trace records with `method`.
    pub fn set_method(&mut self, method: Method) {
        self.method = method;
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn into_trace(self) -> Vec<TraceRecord> {
        self.trace
    }

    /// One recommend call on I_G ∖ `removed`.
    pub fn probe(&mut self, removed: &ItemSet) -> Result<Probe<T>, BudgetExhausted> {
        let scenario = self.group.interactions_without(removed);
        let list = self.recommender.recommend(&scenario, &mut self.meter)?;
        let rank = list.rank(self.target);
        self.trace.push(TraceRecord {
            step: self.meter.calls_used(),
            method: self.method,
            set_size: removed.len(),
            cf_found: rank.is_none(),
            rank_of_t: rank,
            removed: removed.iter().copied().collect(),
        });
        Ok(Probe {
            counterfactual: rank.is_none(),
            rank,
            power: explanatory_power(&list, self.target),
        })
    }

    /// isCF: true iff the target leaves the top-m list once `removed` is gone.
    pub fn is_counterfactual(&mut self, removed: &ItemSet) -> Result<bool, BudgetExhausted> {
        Ok(self.probe(removed)?.counterfactual)
    }

    /// The validity flag together with the explanatory power of `removed`.
    pub fn check_cf_and_power(&mut self, removed: &ItemSet) -> Result<(bool, T), BudgetExhausted> {
        let p = self.probe(removed)?;
        Ok((p.counterfactual, p.power))
    }
}

impl<T: Scalar, R: GroupRecommender<T> + ?Sized> CounterfactualCheck for SearchContext<'_, T, R> {
    fn is_counterfactual(&mut self, removed: &ItemSet) -> Result<bool, BudgetExhausted> {
        SearchContext::is_counterfactual(self, removed)
    }
}

/// What a heuristic hands back on success.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Found {
    pub items: ItemSet,
    /// The counterfactual window a FixedWindow variant refined.
    pub window: Option<Vec<ItemId>>,
}

impl From<ItemSet> for Found {
    fn from(items: ItemSet) -> Self {
        Self {
            items,
            window: None,
        }
    }
}

/// A validated counterfactual explanation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Explanation {
    pub items: ItemSet,
    pub method: Method,
    pub pareto: bool,
    pub search_calls: u64,
    pub metric_calls: u64,
    pub valid: bool,
    pub member_contributions: Vec<(UserId, usize)>,
    pub window: Option<Vec<ItemId>>,
}

impl Explanation {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum FailureKind {
    NoCounterfactual,
    BudgetExhausted,
    /// The method refused to run on this instance (e.g. exhaustive size guard).
    Refused(String),
}

/// A run that produced no explanation, with the calls it consumed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchFailure {
    pub kind: FailureKind,
    pub search_calls: u64,
    pub metric_calls: u64,
}

/// What one request should do.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRequest {
    pub method: Method,
    /// Restrict the candidate list to the first counterfactual τ-Pareto set.
    pub pareto: bool,
    /// Budget B on recommender calls; `None` is unlimited.
    pub budget: Option<u64>,
    /// Whether the rec_score calls behind the influence metric spend B.
    pub count_metric_calls_in_budget: bool,
    pub config: SearchConfig,
}

impl RunRequest {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            pareto: false,
            budget: Some(1000),
            count_metric_calls_in_budget: false,
            config: SearchConfig::default(),
        }
    }

    pub fn pareto(mut self, on: bool) -> Self {
        self.pareto = on;
        self
    }

    pub fn budget(mut self, budget: Option<u64>) -> Self {
        self.budget = budget;
        self
    }
}

/// Everything a single run produced.
#[derive(Debug, Clone)]
pub struct SearchRun<T> {
    pub outcome: Result<Explanation, SearchFailure>,
    pub trace: Vec<TraceRecord>,
    pub vectors: Vec<ItemMetricVector<T>>,
    pub pareto: Option<ParetoOutcome<T>>,
    /// The candidate list the heuristic actually consumed.
    pub candidates: Vec<ItemId>,
}

/// Re-checks `items` with a fresh, unmetered recommend call.
pub fn verify_counterfactual<T: Scalar, R: GroupRecommender<T> + ?Sized>(
    recommender: &R,
    group: &Group,
    target: ItemId,
    items: &ItemSet,
) -> bool {
    let list = recommender
        .recommend(
            &group.interactions_without(items),
            &mut CallMeter::unlimited(),
        )
        .expect("unlimited meter");
    !list.contains(target)
}

/// Runs one heuristic on a prepared candidate list.
pub fn run_heuristic<T: Scalar, R: GroupRecommender<T> + ?Sized>(
    ctx: &mut SearchContext<'_, T, R>,
    method: Method,
    candidates: &[Candidate<T>],
    config: &SearchConfig,
) -> Result<Result<Found, FailureKind>, BudgetExhausted> {
    let found = match method {
        Method::GreedyGrow => greedy_grow(ctx, candidates)?.map(Found::from),
        Method::GrowPrune => grow_and_prune(ctx, candidates)?.map(Found::from),
        Method::ExpRebuild => {
            exp_rebuild(ctx, candidates, config.rebuild_skip_subsets)?.map(Found::from)
        }
        Method::FixedWindow => fixed_window(ctx, candidates, config.window)?,
        Method::FixedWindowGreedyGrow => {
            fixed_window_hybrid(ctx, candidates, config.window, WindowRefiner::GreedyGrow)?
        }
        Method::FixedWindowGrowPrune => {
            fixed_window_hybrid(ctx, candidates, config.window, WindowRefiner::GrowPrune)?
        }
        Method::Exhaustive => {
            let all: Vec<ItemId> = ctx.group().union_interactions().iter().copied().collect();
            if all.len() > EXHAUSTIVE_LIMIT {
                return Ok(Err(FailureKind::Refused(format!(
                    "|I_G| = {} exceeds the exhaustive limit {EXHAUSTIVE_LIMIT}",
                    all.len()
                ))));
            }
            exhaustive_minimal(ctx)?.map(Found::from)
        }
        Method::ParetoFiltering => {
            return Ok(Err(FailureKind::Refused(
                "Pareto filtering needs metric vectors; use explain_target".into(),
            )))
        }
    };
    Ok(found.ok_or(FailureKind::NoCounterfactual))
}

/// Full pipeline for one (group, target, method, candidate source).
///
/// Builds metric vectors (metric calls), sorts I_G into the candidate list,
/// optionally narrows it to the first counterfactual τ-Pareto set, runs the
/// heuristic under the search budget, and re-verifies the result.
pub fn explain_target<T: Scalar, R: GroupRecommender<T> + ?Sized>(
    ds: &RatingsDataset<T>,
    recommender: &R,
    group: &Group,
    target: ItemId,
    request: &RunRequest,
) -> SearchRun<T> {
    let mut metric_meter = match (request.count_metric_calls_in_budget, request.budget) {
        (true, Some(b)) => CallMeter::with_budget(b),
        _ => CallMeter::unlimited(),
    };
    let vectors = match build_metric_vectors(ds, recommender, group, target, &mut metric_meter) {
        Ok(v) => v,
        Err(_) => {
            return SearchRun {
                outcome: Err(SearchFailure {
                    kind: FailureKind::BudgetExhausted,
                    search_calls: 0,
                    metric_calls: metric_meter.calls_used(),
                }),
                trace: Vec::new(),
                vectors: Vec::new(),
                pareto: None,
                candidates: Vec::new(),
            }
        }
    };
    let metric_calls = metric_meter.calls_used();
    let search_budget = request.budget.map(|b| {
        if request.count_metric_calls_in_budget {
            b.saturating_sub(metric_calls)
        } else {
            b
        }
    });
    let meter = search_budget.map_or_else(CallMeter::unlimited, CallMeter::with_budget);
    let sorted = CandidateList::from_vectors(&vectors);
    let mut ctx = SearchContext::new(recommender, group, target, request.method, meter);

    let mut pareto = None;
    let mut candidates = sorted.clone();
    let method = request.method;
    let result: Result<Result<Found, FailureKind>, BudgetExhausted> = (|| {
        if method == Method::ParetoFiltering || (request.pareto && method.uses_candidates()) {
            ctx.set_method(Method::ParetoFiltering);
            let outcome = pareto_filtering(&vectors, &mut ctx, request.config.max_pareto_iters)?;
            let stop = outcome.stop.clone();
            let items = outcome.items.clone();
            pareto = Some(outcome);
            match (stop, items) {
                (ParetoStop::Found, Some(items)) => {
                    if method == Method::ParetoFiltering {
                        candidates = sorted.restrict(&items);
                        return Ok(Ok(Found::from(items)));
                    }
                    candidates = sorted.restrict(&items);
                }
                (ParetoStop::AllItemsExamined, _) => return Ok(Err(FailureKind::NoCounterfactual)),
                _ if method == Method::ParetoFiltering => {
                    return Ok(Err(FailureKind::NoCounterfactual))
                }
                // Relaxation cap hit: fall back to the full sorted list.
                _ => {}
            }
        }
        ctx.set_method(method);
        run_heuristic(&mut ctx, method, candidates.entries(), &request.config)
    })();

    let search_calls = ctx.calls_used();
    let trace = ctx.into_trace();
    let fail = |kind| SearchFailure {
        kind,
        search_calls,
        metric_calls,
    };
    let outcome = match result {
        Err(BudgetExhausted { .. }) => Err(fail(FailureKind::BudgetExhausted)),
        Ok(Err(kind)) => Err(fail(kind)),
        Ok(Ok(found)) => {
            let valid = !found.items.is_empty()
                && verify_counterfactual(recommender, group, target, &found.items);
            let member_contributions = group
                .members()
                .iter()
                .copied()
                .zip(group.contributions(&found.items))
                .collect();
            Ok(Explanation {
                items: found.items,
                method,
                pareto: request.pareto && method.uses_candidates(),
                search_calls,
                metric_calls,
                valid,
                member_contributions,
                window: found.window,
            })
        }
    };
    SearchRun {
        outcome,
        trace,
        vectors,
        pareto,
        candidates: candidates.items(),
    }
}

/// Serializes a trace as JSON lines.
pub fn trace_to_jsonl(trace: &[TraceRecord]) -> String {
    let mut out = String::new();
    for rec in trace {
        out.push_str(&serde_json::to_string(rec).expect("trace records serialize"));
        out.push('\n');
    }
    out
}
