//! Benchmark grid over groups, methods and candidate sources, plus the
//! single-query explain entry point.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{
    filter_eligible_users, load_amazon, load_movielens, sample_groups, Group, ItemId,
    RatingsDataset,
};
use crate::error::{Error, Result};
use crate::eval::{utility_batch, ExplanationReport, Fairness, FairnessAggregate};
use crate::recommender::{CallMeter, GroupRecommender, RecommendationList, UserKnn};
use crate::scalar::Scalar;
use crate::search::{
    explain_target, Explanation, FailureKind, Method, RunRequest, SearchConfig, TraceRecord,
};
use crate::synth::generate_synthetic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Movielens,
    Amazon,
    Synthetic,
}

impl DatasetKind {
    pub fn name(self) -> &'static str {
        match self {
            DatasetKind::Movielens => "movielens",
            DatasetKind::Amazon => "amazon",
            DatasetKind::Synthetic => "synthetic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticParams {
    pub users: usize,
    pub items: usize,
    pub density: f64,
    pub seed: u64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self {
            users: 200,
            items: 300,
            density: 0.3,
            seed: 1,
        }
    }
}

pub fn default_methods() -> Vec<Method> {
    vec![
        Method::GreedyGrow,
        Method::GrowPrune,
        Method::ExpRebuild,
        Method::FixedWindow,
        Method::FixedWindowGreedyGrow,
        Method::FixedWindowGrowPrune,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset_kind: DatasetKind,
    pub path: Option<PathBuf>,
    pub rating_scale_max: f64,
    pub synthetic: SyntheticParams,
    pub group_sizes: Vec<usize>,
    pub groups_per_size: usize,
    pub min_ratings: usize,
    pub budget: u64,
    pub list_length: usize,
    pub window: usize,
    pub methods: Vec<Method>,
    /// Candidate sources to run: `false` is the sorted list, `true` the
    /// Pareto-filtered one.
    pub pareto_filter: Vec<bool>,
    pub seed: u64,
    pub k_neighbors: usize,
    pub count_metric_calls_in_budget: bool,
    pub utility_weight: f64,
    pub max_pareto_iters: usize,
    pub rebuild_skip_subsets: bool,
    /// Whether failed runs enter the summary's cost and size means.
    pub include_failed: bool,
    /// Worker threads; `None` uses rayon's default.
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset_kind: DatasetKind::Synthetic,
            path: None,
            rating_scale_max: 5.0,
            synthetic: SyntheticParams::default(),
            group_sizes: vec![5, 10],
            groups_per_size: 20,
            min_ratings: 50,
            budget: 1000,
            list_length: 10,
            window: 15,
            methods: default_methods(),
            pareto_filter: vec![false, true],
            seed: 7,
            k_neighbors: 50,
            count_metric_calls_in_budget: false,
            utility_weight: 0.5,
            max_pareto_iters: 25,
            rebuild_skip_subsets: true,
            include_failed: false,
            workers: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.group_sizes.is_empty() || self.group_sizes.contains(&0) {
            return bad("group_sizes must be non-empty and positive".into());
        }
        if self.groups_per_size == 0 {
            return bad("groups_per_size must be positive".into());
        }
        if self.budget == 0 {
            return bad("budget must be at least 1".into());
        }
        if self.list_length == 0 || self.window == 0 || self.k_neighbors == 0 {
            return bad("list_length, window and k_neighbors must be positive".into());
        }
        if self.methods.is_empty() {
            return bad("methods must be non-empty".into());
        }
        if self.pareto_filter.is_empty() {
            return bad("pareto_filter must list at least one mode".into());
        }
        if !(0.0..=1.0).contains(&self.utility_weight) {
            return bad(format!(
                "utility_weight {} outside [0, 1]",
                self.utility_weight
            ));
        }
        if self.dataset_kind != DatasetKind::Synthetic && self.path.is_none() {
            return bad(format!(
                "dataset_kind {} needs a path",
                self.dataset_kind.name()
            ));
        }
        if self.workers == Some(0) {
            return bad("workers must be positive".into());
        }
        Ok(())
    }

    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            window: self.window,
            max_pareto_iters: self.max_pareto_iters,
            rebuild_skip_subsets: self.rebuild_skip_subsets,
        }
    }

    pub fn request(&self, method: Method, pareto: bool) -> RunRequest {
        RunRequest {
            method,
            pareto,
            budget: Some(self.budget),
            count_metric_calls_in_budget: self.count_metric_calls_in_budget,
            config: self.search_config(),
        }
    }

    /// The (method, pareto) pairs of the grid. Pareto filtering only runs on
    /// its own candidate source and exhaustive search only on the full set.
    pub fn method_grid(&self) -> Vec<(Method, bool)> {
        let mut out = Vec::new();
        for &m in &self.methods {
            match m {
                Method::ParetoFiltering => out.push((m, true)),
                Method::Exhaustive => out.push((m, false)),
                _ => out.extend(self.pareto_filter.iter().map(|&p| (m, p))),
            }
        }
        out
    }
}

/// Loads or generates the configured dataset.
pub fn load_dataset<T: Scalar>(cfg: &ExperimentConfig) -> Result<RatingsDataset<T>> {
    match cfg.dataset_kind {
        DatasetKind::Synthetic => {
            let p = &cfg.synthetic;
            generate_synthetic(p.users, p.items, p.density, p.seed)
        }
        DatasetKind::Movielens | DatasetKind::Amazon => {
            let path = cfg
                .path
                .as_ref()
                .ok_or_else(|| Error::Config("dataset path missing".into()))?;
            if cfg.dataset_kind == DatasetKind::Movielens {
                load_movielens(path, cfg.rating_scale_max)
            } else {
                load_amazon(path, cfg.rating_scale_max)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Invalid,
    NoCounterfactual,
    BudgetExhausted,
    Refused,
    NothingToExplain,
}

impl RunStatus {
    pub fn name(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Invalid => "invalid",
            RunStatus::NoCounterfactual => "no_counterfactual",
            RunStatus::BudgetExhausted => "budget_exhausted",
            RunStatus::Refused => "refused",
            RunStatus::NothingToExplain => "nothing_to_explain",
        }
    }
}

/// One grid cell.
#[derive(Debug, Clone)]
pub struct RunRecord<T> {
    pub group_size: usize,
    pub group_id: usize,
    pub members: Vec<crate::dataset::UserId>,
    pub target: Option<ItemId>,
    pub method: Method,
    pub pareto: bool,
    pub status: RunStatus,
    pub search_calls: u64,
    pub metric_calls: u64,
    pub explanation: Option<Explanation>,
    pub report: Option<ExplanationReport<T>>,
    pub trace: Vec<TraceRecord>,
    pub candidates: Vec<ItemId>,
}

impl<T: Scalar> RunRecord<T> {
    pub fn expl_size(&self) -> Option<usize> {
        self.explanation.as_ref().map(Explanation::len)
    }

    pub fn cost(&self, count_metric_calls: bool) -> u64 {
        self.search_calls
            + if count_metric_calls {
                self.metric_calls
            } else {
                0
            }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult<T> {
    pub dataset: String,
    pub stats: String,
    pub records: Vec<RunRecord<T>>,
    pub include_failed: bool,
    pub count_metric_calls: bool,
}

/// Runs one (group, method, source) cell. `target` must be in the factual
/// list; `None` records a nothing-to-explain row.
pub fn run_cell<T: Scalar, R: GroupRecommender<T> + ?Sized>(
    ds: &RatingsDataset<T>,
    recommender: &R,
    group: &Group,
    target: Option<ItemId>,
    request: &RunRequest,
    count_metric_calls: bool,
) -> RunRecord<T> {
    let mut record = RunRecord {
        group_size: group.len(),
        group_id: 0,
        members: group.members().to_vec(),
        target,
        method: request.method,
        pareto: request.pareto && request.method != Method::Exhaustive,
        status: RunStatus::NothingToExplain,
        search_calls: 0,
        metric_calls: 0,
        explanation: None,
        report: None,
        trace: Vec::new(),
        candidates: Vec::new(),
    };
    let Some(target) = record.target else {
        return record;
    };
    let run = explain_target(ds, recommender, group, target, request);
    record.trace = run.trace;
    record.candidates = run.candidates;
    match run.outcome {
        Ok(expl) => {
            record.search_calls = expl.search_calls;
            record.metric_calls = expl.metric_calls;
            if expl.valid {
                record.status = RunStatus::Ok;
                record.report =
                    ExplanationReport::evaluate(ds, group, &expl, count_metric_calls).ok();
            } else {
                record.status = RunStatus::Invalid;
            }
            record.explanation = Some(expl);
        }
        Err(fail) => {
            record.search_calls = fail.search_calls;
            record.metric_calls = fail.metric_calls;
            record.status = match fail.kind {
                FailureKind::NoCounterfactual => RunStatus::NoCounterfactual,
                FailureKind::BudgetExhausted => RunStatus::BudgetExhausted,
                FailureKind::Refused(_) => RunStatus::Refused,
            };
        }
    }
    record
}

/// Seed for the groups of one size; distinct sizes draw independently.
fn group_seed(seed: u64, size: usize) -> u64 {
    seed ^ (size as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Samples the configured groups for every size, in config order.
pub fn experiment_groups<T: Scalar>(
    ds: &RatingsDataset<T>,
    cfg: &ExperimentConfig,
) -> Result<Vec<(usize, Vec<Group>)>> {
    let eligible = filter_eligible_users(ds, cfg.min_ratings);
    cfg.group_sizes
        .iter()
        .map(|&size| {
            Ok((
                size,
                sample_groups(
                    ds,
                    &eligible,
                    size,
                    cfg.groups_per_size,
                    group_seed(cfg.seed, size),
                )?,
            ))
        })
        .collect()
}

/// Runs the full grid. Rows come out in (size, group, method, source) order
/// regardless of worker count.
pub fn run_experiment<T: Scalar>(
    ds: &RatingsDataset<T>,
    cfg: &ExperimentConfig,
    dataset_name: &str,
) -> Result<ExperimentResult<T>> {
    cfg.validate()?;
    let recommender = UserKnn::new(ds, cfg.k_neighbors, cfg.list_length);
    let groups = experiment_groups(ds, cfg)?;
    let grid = cfg.method_grid();

    let mut cells = Vec::new();
    for (size, gs) in &groups {
        for (gid, g) in gs.iter().enumerate() {
            for &(m, p) in &grid {
                cells.push((*size, gid, g, m, p));
            }
        }
    }
    let factual: Vec<Vec<RecommendationList<T>>> = groups
        .par_iter()
        .map(|(_, gs)| {
            gs.iter()
                .map(|g| {
                    recommender
                        .recommend(&g.interactions(), &mut CallMeter::unlimited())
                        .expect("unlimited meter")
                })
                .collect()
        })
        .collect();
    let size_index: BTreeMap<usize, usize> = groups
        .iter()
        .enumerate()
        .map(|(k, (s, _))| (*s, k))
        .collect();

    let work = || -> Vec<RunRecord<T>> {
        cells
            .par_iter()
            .map(|&(size, gid, g, m, p)| {
                let list = &factual[size_index[&size]][gid];
                let mut rec = run_cell(
                    ds,
                    &recommender,
                    g,
                    list.top1(),
                    &cfg.request(m, p),
                    cfg.count_metric_calls_in_budget,
                );
                rec.group_id = gid;
                rec
            })
            .collect()
    };
    let mut records = match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };

    // Utility is normalized per group size across all methods.
    for size in &cfg.group_sizes {
        let idx: Vec<usize> = records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.group_size == *size && r.report.is_some())
            .map(|(k, _)| k)
            .collect();
        if idx.is_empty() {
            continue;
        }
        let mut batch: Vec<ExplanationReport<T>> = idx
            .iter()
            .map(|&k| records[k].report.clone().unwrap())
            .collect();
        utility_batch(&mut batch, T::lit(cfg.utility_weight))?;
        for (k, r) in idx.into_iter().zip(batch) {
            records[k].report = Some(r);
        }
    }

    Ok(ExperimentResult {
        dataset: dataset_name.to_owned(),
        stats: ds.stats_line(),
        records,
        include_failed: cfg.include_failed,
        count_metric_calls: cfg.count_metric_calls_in_budget,
    })
}

pub const CSV_HEADER: [&str; 13] = [
    "dataset",
    "group_size",
    "group_id",
    "method",
    "pareto",
    "expl_size",
    "search_calls",
    "metric_calls",
    "minimality",
    "interpretability",
    "fairness",
    "utility",
    "status",
];

impl<T: Scalar> ExperimentResult<T> {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.records {
            let rep = r.report.as_ref();
            let num = |v: Option<T>| v.map(|x| x.as_f64().to_string()).unwrap_or_default();
            w.write_record([
                self.dataset.clone(),
                r.group_size.to_string(),
                r.group_id.to_string(),
                r.method.to_string(),
                if r.pareto { "on" } else { "off" }.to_string(),
                r.expl_size().map(|s| s.to_string()).unwrap_or_default(),
                r.search_calls.to_string(),
                r.metric_calls.to_string(),
                num(rep.map(|x| x.minimality)),
                num(rep.map(|x| x.interpretability)),
                rep.map(|x| x.fairness.to_string()).unwrap_or_default(),
                num(rep.and_then(|x| x.utility)),
                r.status.name().to_string(),
            ])?;
        }
        w.flush().map_err(|source| Error::Io {
            path: "<csv>".into(),
            source,
        })?;
        Ok(())
    }

    pub fn csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory csv");
        String::from_utf8(buf).expect("utf-8 csv")
    }

    /// Per (method, pareto, group_size) aggregates.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut buckets: BTreeMap<(Method, bool, usize), Vec<&RunRecord<T>>> = BTreeMap::new();
        for r in &self.records {
            buckets
                .entry((r.method, r.pareto, r.group_size))
                .or_default()
                .push(r);
        }
        buckets
            .into_iter()
            .map(|((method, pareto, group_size), rows)| {
                let ok: Vec<&RunRecord<T>> = rows
                    .iter()
                    .copied()
                    .filter(|r| r.status == RunStatus::Ok)
                    .collect();
                let counted: Vec<&RunRecord<T>> = if self.include_failed {
                    rows.iter()
                        .copied()
                        .filter(|r| r.status != RunStatus::NothingToExplain)
                        .collect()
                } else {
                    ok.clone()
                };
                let costs: Vec<f64> = counted
                    .iter()
                    .map(|r| r.cost(self.count_metric_calls) as f64)
                    .collect();
                let sizes: Vec<f64> = counted
                    .iter()
                    .filter_map(|r| r.expl_size())
                    .map(|s| s as f64)
                    .collect();
                let reports: Vec<&ExplanationReport<T>> =
                    ok.iter().filter_map(|r| r.report.as_ref()).collect();
                let fair: Vec<Fairness<T>> = reports.iter().map(|r| r.fairness).collect();
                SummaryRow {
                    method,
                    pareto,
                    group_size,
                    runs: rows.len(),
                    ok: ok.len(),
                    mean_size: mean(&sizes),
                    median_size: median(&sizes),
                    mean_cost: mean(&costs),
                    median_cost: median(&costs),
                    mean_interpretability: mean(
                        &reports
                            .iter()
                            .map(|r| r.interpretability.as_f64())
                            .collect::<Vec<_>>(),
                    ),
                    fairness: FairnessAggregate::of(&fair),
                    mean_utility: mean(
                        &reports
                            .iter()
                            .filter_map(|r| r.utility)
                            .map(Scalar::as_f64)
                            .collect::<Vec<_>>(),
                    ),
                }
            })
            .collect()
    }

    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# dataset={} {} include_failed={} count_metric_calls={}",
            self.dataset, self.stats, self.include_failed, self.count_metric_calls
        );
        let _ = writeln!(
            s,
            "method,pareto,group_size,runs,ok,mean_size,median_size,mean_cost,median_cost,mean_interpretability,perfect_fairness_share,mean_finite_fairness,mean_utility"
        );
        let f = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
        for r in self.summary() {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{:.4},{},{}",
                r.method,
                if r.pareto { "on" } else { "off" },
                r.group_size,
                r.runs,
                r.ok,
                f(r.mean_size),
                f(r.median_size),
                f(r.mean_cost),
                f(r.median_cost),
                f(r.mean_interpretability),
                r.fairness.perfect_share,
                f(r.fairness.finite_mean),
                f(r.mean_utility),
            );
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: Method,
    pub pareto: bool,
    pub group_size: usize,
    pub runs: usize,
    pub ok: usize,
    pub mean_size: Option<f64>,
    pub median_size: Option<f64>,
    pub mean_cost: Option<f64>,
    pub median_cost: Option<f64>,
    pub mean_interpretability: Option<f64>,
    pub fairness: FairnessAggregate,
    pub mean_utility: Option<f64>,
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Median, averaging the middle pair for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExplainStatus {
    /// At least one method returned a valid explanation.
    Explained,
    /// The target is not in the factual list.
    NothingToExplain,
    /// Every method failed.
    NoExplanation,
}

#[derive(Debug, Clone)]
pub struct ExplainOutcome<T> {
    pub group: Group,
    pub factual: RecommendationList<T>,
    pub target: Option<ItemId>,
    pub status: ExplainStatus,
    pub runs: Vec<RunRecord<T>>,
}

/// Explains `target` (or the top-1 item) for the group of `member_labels`
/// with each method in `runs`.
pub fn explain_once<T: Scalar>(
    ds: &RatingsDataset<T>,
    cfg: &ExperimentConfig,
    member_labels: &[String],
    target_label: Option<&str>,
    runs: &[(Method, bool)],
) -> Result<ExplainOutcome<T>> {
    let members = member_labels
        .iter()
        .map(|l| {
            ds.user_by_label(l)
                .ok_or_else(|| Error::Config(format!("unknown user {l:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let group = Group::new(ds, members)?;
    let recommender = UserKnn::new(ds, cfg.k_neighbors, cfg.list_length);
    let factual = recommender
        .recommend(&group.interactions(), &mut CallMeter::unlimited())
        .expect("unlimited meter");
    let target = match target_label {
        None => factual.top1(),
        Some(l) => Some(
            ds.item_by_label(l)
                .ok_or_else(|| Error::Config(format!("unknown item {l:?}")))?,
        ),
    };
    let Some(target) = target.filter(|t| factual.contains(*t)) else {
        return Ok(ExplainOutcome {
            group,
            factual,
            target,
            status: ExplainStatus::NothingToExplain,
            runs: Vec::new(),
        });
    };
    let records: Vec<RunRecord<T>> = runs
        .iter()
        .map(|&(m, p)| {
            run_cell(
                ds,
                &recommender,
                &group,
                Some(target),
                &cfg.request(m, p),
                cfg.count_metric_calls_in_budget,
            )
        })
        .collect();
    let status = if records.iter().any(|r| r.status == RunStatus::Ok) {
        ExplainStatus::Explained
    } else {
        ExplainStatus::NoExplanation
    };
    Ok(ExplainOutcome {
        group,
        factual,
        target: Some(target),
        status,
        runs: records,
    })
}

impl<T: Scalar> ExplainOutcome<T> {
    /// Human-readable report.
    pub fn render(&self, ds: &RatingsDataset<T>) -> String {
        let mut s = String::new();
        let members: Vec<&str> = self
            .group
            .members()
            .iter()
            .map(|&u| ds.user_label(u))
            .collect();
        let _ = writeln!(s, "group: {}", members.join(" "));
        let _ = writeln!(s, "factual list:");
        for (k, (i, score)) in self.factual.entries().iter().enumerate() {
            let _ = writeln!(
                s,
                "  {:>2}. {} ({:.4})",
                k + 1,
                ds.item_label(*i),
                score.as_f64()
            );
        }
        match (self.status, self.target) {
            (ExplainStatus::NothingToExplain, Some(t)) => {
                let _ = writeln!(
                    s,
                    "status: NothingToExplain (item {} is not recommended)",
                    ds.item_label(t)
                );
                return s;
            }
            (ExplainStatus::NothingToExplain, None) => {
                let _ = writeln!(s, "status: NothingToExplain (empty recommendation list)");
                return s;
            }
            (_, Some(t)) => {
                let _ = writeln!(s, "target: {}", ds.item_label(t));
            }
            _ => {}
        }
        for r in &self.runs {
            let src = if r.pareto { "pareto" } else { "sorted" };
            let _ = write!(
                s,
                "\n[{} / {}] status={} search_calls={} metric_calls={}",
                r.method,
                src,
                r.status.name(),
                r.search_calls,
                r.metric_calls
            );
            let _ = writeln!(s);
            if let (Some(e), Some(rep)) = (&r.explanation, &r.report) {
                let items: Vec<&str> = e.items.iter().map(|&i| ds.item_label(i)).collect();
                let _ = writeln!(s, "  E = {{{}}} (|E| = {})", items.join(", "), e.len());
                for (u, c) in &e.member_contributions {
                    let _ = writeln!(s, "  zeta[{}] = {}", ds.user_label(*u), c);
                }
                let _ = writeln!(
                    s,
                    "  minimality={:.4} interpretability={:.4} cost={} fairness={}",
                    rep.minimality.as_f64(),
                    rep.interpretability.as_f64(),
                    rep.cost,
                    rep.fairness
                );
            }
        }
        let s_star = self
            .runs
            .iter()
            .find(|r| r.method == Method::Exhaustive && r.status == RunStatus::Ok)
            .and_then(|r| r.expl_size());
        if let Some(n) = s_star {
            let _ = writeln!(s, "\ns* (minimum size) = {n}");
        }
        let _ = writeln!(
            s,
            "\nstatus: {}",
            match self.status {
                ExplainStatus::Explained => "Explained",
                ExplainStatus::NoExplanation => "NoExplanation",
                ExplainStatus::NothingToExplain => "NothingToExplain",
            }
        );
        s
    }
}
