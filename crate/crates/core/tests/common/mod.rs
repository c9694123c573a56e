#![allow(dead_code)]

use std::path::PathBuf;

use groupcf::dataset::load_movielens;
use groupcf::{Dataset, Group, ItemId, ItemSet, UserId};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// The 4-user / 12-item hand fixture, ratings on a 5-point scale.
pub fn hand_fixture() -> Dataset {
    load_movielens(fixture_path("hand4x12.dat"), 5.0).unwrap()
}

pub fn user(ds: &Dataset, label: &str) -> UserId {
    ds.user_by_label(label).unwrap()
}

pub fn item(ds: &Dataset, label: &str) -> ItemId {
    ds.item_by_label(label).unwrap()
}

pub fn items(ds: &Dataset, labels: &[&str]) -> ItemSet {
    labels.iter().map(|l| item(ds, l)).collect()
}

pub fn group(ds: &Dataset, labels: &[&str]) -> Group {
    Group::new(ds, labels.iter().map(|l| user(ds, l)).collect()).unwrap()
}

/// Exact for dyadic rationals, otherwise within 1e-12.
pub fn assert_close(got: f64, want: f64, what: &str) {
    assert!(
        (got - want).abs() <= 1e-12,
        "{what}: got {got}, want {want}"
    );
}

/// Bitwise equality, for values representable in binary.
pub fn assert_exact(got: f64, want: f64, what: &str) {
    assert_eq!(
        got.to_bits(),
        want.to_bits(),
        "{what}: got {got}, want {want}"
    );
}

/// Two members whose only link to the neighbour rating i9 runs through
/// items i2, i5 and i8.
pub fn fig1_fixture() -> Dataset {
    groupcf::RatingsDataset::from_triples([
        ("u1", "i1", 0.6),
        ("u1", "i2", 1.0),
        ("u1", "i3", 0.4),
        ("u1", "i5", 1.0),
        ("u2", "i2", 0.8),
        ("u2", "i4", 0.5),
        ("u2", "i6", 0.3),
        ("u2", "i7", 0.4),
        ("u2", "i8", 1.0),
        ("n1", "i2", 1.0),
        ("n1", "i5", 1.0),
        ("n1", "i8", 1.0),
        ("n1", "i9", 1.0),
        ("n2", "i1", 0.6),
        ("n2", "i3", 0.4),
        ("n2", "i10", 0.5),
        ("n3", "i4", 0.5),
        ("n3", "i6", 0.3),
        ("n3", "i7", 0.4),
        ("n3", "i11", 0.4),
    ])
}

/// A small synthetic instance: 8 users, 12 items, density 0.6, a group of 3
/// and the top-1 item as target. `None` when the factual list is empty.
pub fn small_instance(seed: u64) -> Option<(Dataset, Group, ItemId)> {
    use groupcf::dataset::{filter_eligible_users, sample_groups};
    use groupcf::synth::generate_synthetic;
    use groupcf::{CallMeter, GroupRecommender, UserKnn};
    let ds: Dataset = generate_synthetic(8, 12, 0.6, seed).unwrap();
    let eligible = filter_eligible_users(&ds, 1);
    let g = sample_groups(&ds, &eligible, 3, 1, seed).unwrap().remove(0);
    let rec = UserKnn::new(&ds, 50, 10);
    let t = rec
        .recommend(&g.interactions(), &mut CallMeter::unlimited())
        .unwrap()
        .top1()?;
    Some((ds, g, t))
}
