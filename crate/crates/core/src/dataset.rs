//! Rating storage, file loaders, eligibility filtering and group sampling.
//!
//! External user/item labels are interned into dense indices. Indices are
//! assigned in ascending label order (numeric when every label parses as an
//! integer), so "ascending item id" tie-breaks follow the raw file's ids.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UserId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ItemId(pub u32);

impl UserId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl ItemId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u#{}", self.0)
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "i#{}", self.0)
    }
}

/// Ordered item set; ordering keeps every traversal deterministic.
pub type ItemSet = BTreeSet<ItemId>;

/// Sparse user × item rating store. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsDataset<T> {
    user_labels: Vec<String>,
    item_labels: Vec<String>,
    user_lookup: HashMap<String, u32>,
    item_lookup: HashMap<String, u32>,
    user_rows: Vec<Vec<(ItemId, T)>>,
    item_cols: Vec<Vec<(UserId, T)>>,
    user_norms: Vec<T>,
    n_ratings: usize,
}

impl<T: Scalar> RatingsDataset<T> {
    /// Builds a dataset from `(user, item, rating)` triples. Ratings are
    /// stored as given; later duplicates of a (user, item) pair win.
    pub fn from_triples<U, I, It>(triples: It) -> Self
    where
        U: Into<String>,
        I: Into<String>,
        It: IntoIterator<Item = (U, I, T)>,
    {
        let mut builder = DatasetBuilder::new();
        for (u, i, r) in triples {
            builder.push(u.into(), i.into(), r);
        }
        builder.build()
    }

    pub fn num_users(&self) -> usize {
        self.user_labels.len()
    }

    pub fn num_items(&self) -> usize {
        self.item_labels.len()
    }

    pub fn num_ratings(&self) -> usize {
        self.n_ratings
    }

    pub fn users(&self) -> impl Iterator<Item = UserId> + '_ {
        (0..self.user_labels.len() as u32).map(UserId)
    }

    pub fn items(&self) -> impl Iterator<Item = ItemId> + '_ {
        (0..self.item_labels.len() as u32).map(ItemId)
    }

    pub fn contains_user(&self, u: UserId) -> bool {
        u.index() < self.user_labels.len()
    }

    pub fn contains_item(&self, i: ItemId) -> bool {
        i.index() < self.item_labels.len()
    }

    /// Rated items of `u`, sorted by item id.
    pub fn user_items(&self, u: UserId) -> &[(ItemId, T)] {
        &self.user_rows[u.index()]
    }

    /// Users who rated `i`, sorted by user id.
    pub fn item_users(&self, i: ItemId) -> &[(UserId, T)] {
        &self.item_cols[i.index()]
    }

    /// Euclidean norm of the user's full rating vector.
    pub fn user_norm(&self, u: UserId) -> T {
        self.user_norms[u.index()]
    }

    pub fn interaction_count(&self, u: UserId) -> usize {
        self.user_rows[u.index()].len()
    }

    /// ρ(i, u); absent ratings read as zero.
    pub fn rating(&self, u: UserId, i: ItemId) -> T {
        let row = &self.user_rows[u.index()];
        match row.binary_search_by_key(&i, |&(item, _)| item) {
            Ok(pos) => row[pos].1,
            Err(_) => T::zero(),
        }
    }

    /// ζ(u, i).
    pub fn has_interacted(&self, u: UserId, i: ItemId) -> bool {
        self.user_rows[u.index()]
            .binary_search_by_key(&i, |&(item, _)| item)
            .is_ok()
    }

    /// I_u as a set.
    pub fn interacted_items(&self, u: UserId) -> ItemSet {
        self.user_rows[u.index()].iter().map(|&(i, _)| i).collect()
    }

    pub fn user_label(&self, u: UserId) -> &str {
        &self.user_labels[u.index()]
    }

    pub fn item_label(&self, i: ItemId) -> &str {
        &self.item_labels[i.index()]
    }

    pub fn user_by_label(&self, label: &str) -> Option<UserId> {
        self.user_lookup.get(label).map(|&p| UserId(p))
    }

    pub fn item_by_label(&self, label: &str) -> Option<ItemId> {
        self.item_lookup.get(label).map(|&p| ItemId(p))
    }

    pub fn stats_line(&self) -> String {
        format!(
            "users={} items={} ratings={}",
            self.num_users(),
            self.num_items(),
            self.num_ratings()
        )
    }
}

/// Accumulates raw triples and produces a [`RatingsDataset`].
#[derive(Debug)]
pub struct DatasetBuilder<T> {
    user_ids: HashMap<String, u32>,
    item_ids: HashMap<String, u32>,
    user_labels: Vec<String>,
    item_labels: Vec<String>,
    triples: Vec<(u32, u32, T)>,
}

impl<T: Scalar> Default for DatasetBuilder<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> DatasetBuilder<T> {
    pub fn new() -> Self {
        Self {
            user_ids: HashMap::new(),
            item_ids: HashMap::new(),
            user_labels: Vec::new(),
            item_labels: Vec::new(),
            triples: Vec::new(),
        }
    }

    pub fn push(&mut self, user: impl AsRef<str>, item: impl AsRef<str>, rating: T) {
        let u = intern(&mut self.user_ids, &mut self.user_labels, user.as_ref());
        let i = intern(&mut self.item_ids, &mut self.item_labels, item.as_ref());
        self.triples.push((u, i, rating));
    }

    pub fn build(self) -> RatingsDataset<T> {
        let DatasetBuilder {
            user_labels,
            item_labels,
            mut triples,
            ..
        } = self;
        let (user_labels, user_map) = sorted_relabel(user_labels);
        let (item_labels, item_map) = sorted_relabel(item_labels);
        for t in &mut triples {
            t.0 = user_map[t.0 as usize];
            t.1 = item_map[t.1 as usize];
        }
        // Stable sort keeps file order among duplicates; the last one wins.
        triples.sort_by_key(|&(u, i, _)| (u, i));
        let mut deduped: Vec<(u32, u32, T)> = Vec::with_capacity(triples.len());
        for t in triples {
            match deduped.last_mut() {
                Some(last) if last.0 == t.0 && last.1 == t.1 => *last = t,
                _ => deduped.push(t),
            }
        }

        let mut user_rows = vec![Vec::new(); user_labels.len()];
        let mut item_cols = vec![Vec::new(); item_labels.len()];
        for &(u, i, r) in &deduped {
            user_rows[u as usize].push((ItemId(i), r));
            item_cols[i as usize].push((UserId(u), r));
        }
        let user_norms = user_rows
            .iter()
            .map(|row: &Vec<(ItemId, T)>| row.iter().map(|&(_, r)| r * r).sum::<T>().sqrt())
            .collect();
        let lookup = |labels: &[String]| -> HashMap<String, u32> {
            labels
                .iter()
                .enumerate()
                .map(|(k, l)| (l.clone(), k as u32))
                .collect()
        };
        RatingsDataset {
            user_lookup: lookup(&user_labels),
            item_lookup: lookup(&item_labels),
            user_labels,
            item_labels,
            user_rows,
            item_cols,
            user_norms,
            n_ratings: deduped.len(),
        }
    }
}

fn intern(ids: &mut HashMap<String, u32>, labels: &mut Vec<String>, label: &str) -> u32 {
    if let Some(&id) = ids.get(label) {
        return id;
    }
    let id = labels.len() as u32;
    labels.push(label.to_owned());
    ids.insert(label.to_owned(), id);
    id
}

/// Sorts labels and returns the old-index → new-index map.
fn sorted_relabel(labels: Vec<String>) -> (Vec<String>, Vec<u32>) {
    let all_numeric = labels.iter().all(|l| l.parse::<u64>().is_ok());
    let mut order: Vec<usize> = (0..labels.len()).collect();
    if all_numeric {
        order.sort_by_key(|&k| labels[k].parse::<u64>().unwrap_or(0));
    } else {
        order.sort_by(|&a, &b| labels[a].cmp(&labels[b]));
    }
    let mut map = vec![0u32; labels.len()];
    for (new, &old) in order.iter().enumerate() {
        map[old] = new as u32;
    }
    let mut slots: Vec<Option<String>> = labels.into_iter().map(Some).collect();
    let sorted = order
        .iter()
        .map(|&k| slots[k].take().unwrap_or_default())
        .collect();
    (sorted, map)
}

/// Which raw file layout a loader expects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    /// `UserID::MovieID::Rating::Timestamp`
    MovieLens,
    /// `user,item,rating,timestamp`
    Amazon,
}

impl Layout {
    fn split<'a>(&self, line: &'a str) -> Vec<&'a str> {
        match self {
            Layout::MovieLens => line.split("::").collect(),
            Layout::Amazon => line.split(',').collect(),
        }
    }
}

/// Loads a `::`-delimited MovieLens ratings file, dividing ratings by
/// `rating_scale_max`.
pub fn load_movielens<T: Scalar>(
    path: impl AsRef<Path>,
    rating_scale_max: f64,
) -> Result<RatingsDataset<T>> {
    load_delimited(path.as_ref(), rating_scale_max, Layout::MovieLens)
}

/// Loads a comma-delimited Amazon ratings file.
pub fn load_amazon<T: Scalar>(
    path: impl AsRef<Path>,
    rating_scale_max: f64,
) -> Result<RatingsDataset<T>> {
    load_delimited(path.as_ref(), rating_scale_max, Layout::Amazon)
}

fn load_delimited<T: Scalar>(path: &Path, scale: f64, layout: Layout) -> Result<RatingsDataset<T>> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Config(format!(
            "rating scale must be positive, got {scale}"
        )));
    }
    let io_err = |source| Error::Io {
        path: path.to_owned(),
        source,
    };
    let file = File::open(path).map_err(io_err)?;
    let reader = BufReader::new(file);
    let mut builder = DatasetBuilder::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err)?;
        let lineno = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields = layout.split(line);
        if fields.len() != 3 && fields.len() != 4 {
            return Err(Error::Parse {
                path: path.to_owned(),
                line: lineno,
                message: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        let (user, item) = (fields[0].trim(), fields[1].trim());
        if user.is_empty() || item.is_empty() {
            return Err(Error::Parse {
                path: path.to_owned(),
                line: lineno,
                message: "empty user or item id".into(),
            });
        }
        let raw: f64 = fields[2].trim().parse().map_err(|_| Error::Parse {
            path: path.to_owned(),
            line: lineno,
            message: format!("rating {:?} is not a number", fields[2]),
        })?;
        if !(raw > 0.0 && raw <= scale) {
            return Err(Error::Validation {
                path: path.to_owned(),
                line: lineno,
                message: format!("rating {raw} outside (0, {scale}]"),
            });
        }
        builder.push(user, item, T::lit(raw / scale));
    }
    let ds = builder.build();
    log::info!("{}", ds.stats_line());
    Ok(ds)
}

/// Users with at least `min_ratings` interactions.
pub fn filter_eligible_users<T: Scalar>(
    ds: &RatingsDataset<T>,
    min_ratings: usize,
) -> BTreeSet<UserId> {
    ds.users()
        .filter(|&u| ds.interaction_count(u) >= min_ratings)
        .collect()
}

/// A set of users together with their interaction histories.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Group {
    members: Vec<UserId>,
    member_interactions: Vec<ItemSet>,
    union_interactions: ItemSet,
}

impl Group {
    pub fn new<T: Scalar>(ds: &RatingsDataset<T>, members: Vec<UserId>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Domain("a group needs at least one member".into()));
        }
        let mut seen = BTreeSet::new();
        for &u in &members {
            if !ds.contains_user(u) {
                return Err(Error::Domain(format!("unknown user {u}")));
            }
            if !seen.insert(u) {
                return Err(Error::Domain(format!("duplicate member {u}")));
            }
        }
        let member_interactions: Vec<ItemSet> =
            members.iter().map(|&u| ds.interacted_items(u)).collect();
        let union_interactions = member_interactions.iter().flatten().copied().collect();
        Ok(Self {
            members,
            member_interactions,
            union_interactions,
        })
    }

    pub fn members(&self) -> &[UserId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, u: UserId) -> bool {
        self.members.contains(&u)
    }

    pub fn member_interactions(&self) -> &[ItemSet] {
        &self.member_interactions
    }

    /// I_G.
    pub fn union_interactions(&self) -> &ItemSet {
        &self.union_interactions
    }

    /// The factual scenario: every member's full history.
    pub fn interactions(&self) -> GroupInteractions {
        self.interactions_without(&ItemSet::new())
    }

    /// The scenario I_G ∖ removed: each removed item is dropped from every
    /// member's history.
    pub fn interactions_without(&self, removed: &ItemSet) -> GroupInteractions {
        GroupInteractions {
            members: self
                .members
                .iter()
                .zip(&self.member_interactions)
                .map(|(&u, items)| (u, items.difference(removed).copied().collect()))
                .collect(),
        }
    }

    /// Σ_{i∈E} ζ(u, i) for each member, in member order.
    pub fn contributions(&self, items: &ItemSet) -> Vec<usize> {
        self.member_interactions
            .iter()
            .map(|hist| items.iter().filter(|i| hist.contains(i)).count())
            .collect()
    }

    /// Fails unless every member has at least `min_ratings` interactions.
    pub fn check_min_ratings(&self, min_ratings: usize) -> Result<()> {
        for (u, hist) in self.members.iter().zip(&self.member_interactions) {
            if hist.len() < min_ratings {
                return Err(Error::Config(format!(
                    "member {u} has {} interactions, fewer than {min_ratings}",
                    hist.len()
                )));
            }
        }
        Ok(())
    }
}

/// Per-member histories handed to the recommender.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupInteractions {
    pub members: Vec<(UserId, ItemSet)>,
}

impl GroupInteractions {
    pub fn single(user: UserId, items: ItemSet) -> Self {
        Self {
            members: vec![(user, items)],
        }
    }

    pub fn union(&self) -> ItemSet {
        self.members
            .iter()
            .flat_map(|(_, s)| s.iter().copied())
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.members.iter().all(|(_, s)| s.is_empty())
    }
}

/// Draws `count` groups of `group_size` distinct eligible users. Each group is
/// an independent uniform draw without replacement; the whole sequence is a
/// function of `seed`.
pub fn sample_groups<T: Scalar>(
    ds: &RatingsDataset<T>,
    eligible: &BTreeSet<UserId>,
    group_size: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Group>> {
    if group_size == 0 {
        return Err(Error::Config("group size must be positive".into()));
    }
    if eligible.len() < group_size {
        return Err(Error::Config(format!(
            "{} eligible users cannot fill a group of {group_size}",
            eligible.len()
        )));
    }
    let pool: Vec<UserId> = eligible.iter().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut members: Vec<UserId> = index::sample(&mut rng, pool.len(), group_size)
                .into_iter()
                .map(|k| pool[k])
                .collect();
            members.sort();
            Group::new(ds, members)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use super::*;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn movielens_fixture_normalizes_by_scale() {
        let f = write_tmp("1::10::5.0::0\n1::20::2.5::0\n2::10::4.0::0\n");
        let ds: RatingsDataset<f64> = load_movielens(f.path(), 5.0).unwrap();
        assert_eq!(
            (ds.num_users(), ds.num_items(), ds.num_ratings()),
            (2, 2, 3)
        );
        let u1 = ds.user_by_label("1").unwrap();
        let u2 = ds.user_by_label("2").unwrap();
        let i10 = ds.item_by_label("10").unwrap();
        let i20 = ds.item_by_label("20").unwrap();
        assert_eq!(ds.rating(u1, i10), 1.0);
        assert_eq!(ds.rating(u1, i20), 0.5);
        assert_eq!(ds.rating(u2, i10), 0.8);
        assert_eq!(ds.rating(u2, i20), 0.0);
        assert!(!ds.has_interacted(u2, i20));
    }

    #[test]
    fn empty_file_gives_empty_dataset() {
        let f = write_tmp("");
        let ds: RatingsDataset<f64> = load_movielens(f.path(), 5.0).unwrap();
        assert_eq!(ds.stats_line(), "users=0 items=0 ratings=0");
    }

    #[test]
    fn amazon_single_line() {
        let f = write_tmp("a,b,5.0,0\n");
        let ds: RatingsDataset<f32> = load_amazon(f.path(), 5.0).unwrap();
        assert_eq!(
            (ds.num_users(), ds.num_items(), ds.num_ratings()),
            (1, 1, 1)
        );
        assert_eq!(ds.rating(UserId(0), ItemId(0)), 1.0);
    }

    #[test]
    fn non_numeric_rating_names_the_line() {
        let f = write_tmp("a,b,5.0,0\nc,d,five,0\n");
        let err = load_amazon::<f64>(f.path(), 5.0).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn malformed_and_out_of_range_lines() {
        let f = write_tmp("1::2::3::4\n1::2\n");
        assert!(matches!(
            load_movielens::<f64>(f.path(), 5.0),
            Err(Error::Parse { line: 2, .. })
        ));
        let f = write_tmp("1::2::6.0::4\n");
        assert!(matches!(
            load_movielens::<f64>(f.path(), 5.0),
            Err(Error::Validation { line: 1, .. })
        ));
        let f = write_tmp("1::2::0::4\n");
        assert!(matches!(
            load_movielens::<f64>(f.path(), 5.0),
            Err(Error::Validation { line: 1, .. })
        ));
    }

    #[test]
    fn duplicate_pairs_keep_last_occurrence() {
        let f = write_tmp("1::10::5.0::0\n1::10::1.0::9\n");
        let ds: RatingsDataset<f64> = load_movielens(f.path(), 5.0).unwrap();
        assert_eq!(ds.num_ratings(), 1);
        assert_eq!(ds.rating(UserId(0), ItemId(0)), 0.2);
    }

    #[test]
    fn numeric_labels_sort_numerically() {
        let ds = RatingsDataset::from_triples([
            ("10", "7", 1.0f64),
            ("9", "100", 1.0),
            ("9", "20", 1.0),
        ]);
        assert_eq!(ds.user_label(UserId(0)), "9");
        assert_eq!(ds.item_label(ItemId(0)), "7");
        assert_eq!(ds.item_label(ItemId(1)), "20");
        assert_eq!(ds.item_by_label("100"), Some(ItemId(2)));
    }

    fn counts_fixture(a: usize, b: usize) -> RatingsDataset<f64> {
        let mut triples = Vec::new();
        for i in 0..a {
            triples.push(("u1".to_string(), format!("i{i}"), 0.5));
        }
        for i in 0..b {
            triples.push(("u2".to_string(), format!("i{i}"), 0.5));
        }
        RatingsDataset::from_triples(triples)
    }

    #[test]
    fn eligibility_boundary() {
        let ds = counts_fixture(50, 49);
        let eligible = filter_eligible_users(&ds, 50);
        assert_eq!(eligible.len(), 1);
        assert_eq!(ds.user_label(*eligible.iter().next().unwrap()), "u1");
        assert_eq!(filter_eligible_users(&ds, 1).len(), 2);
    }

    #[test]
    fn group_union_and_validation() {
        let ds = RatingsDataset::from_triples([
            ("a", "x", 1.0f64),
            ("a", "y", 1.0),
            ("b", "y", 1.0),
            ("c", "z", 1.0),
        ]);
        let g = Group::new(&ds, vec![UserId(0), UserId(1)]).unwrap();
        assert_eq!(g.union_interactions().len(), 2);
        assert!(Group::new(&ds, vec![UserId(0), UserId(0)]).is_err());
        assert!(Group::new(&ds, vec![UserId(7)]).is_err());
        assert!(g.check_min_ratings(2).is_err());
        assert!(g.check_min_ratings(1).is_ok());
        let removed: ItemSet = [ItemId(1)].into();
        let scen = g.interactions_without(&removed);
        assert_eq!(scen.members[0].1, [ItemId(0)].into());
        assert!(scen.members[1].1.is_empty());
        assert_eq!(g.contributions(&removed), vec![1, 1]);
    }

    #[test]
    fn sampling_is_deterministic_and_exhaustive() {
        let ds = counts_fixture(3, 3);
        let eligible = filter_eligible_users(&ds, 1);
        let a = sample_groups(&ds, &eligible, 2, 4, 7).unwrap();
        let b = sample_groups(&ds, &eligible, 2, 4, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|g| g.len() == 2));
        assert!(sample_groups(&ds, &eligible, 3, 1, 7).is_err());
    }

    #[test]
    fn seed_change_changes_some_group() {
        let triples: Vec<_> = (0..12)
            .map(|u| (format!("{u}"), "x".to_string(), 1.0f64))
            .collect();
        let ds = RatingsDataset::from_triples(triples);
        let eligible = filter_eligible_users(&ds, 1);
        let a = sample_groups(&ds, &eligible, 5, 20, 1).unwrap();
        let b = sample_groups(&ds, &eligible, 5, 20, 2).unwrap();
        assert_ne!(a, b);
    }
}
