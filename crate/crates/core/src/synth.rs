//! Synthetic rating matrices for desk-scale runs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{DatasetBuilder, RatingsDataset};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Number of rating levels on the normalized grid {0.1, ..., 1.0}.
pub const RATING_LEVELS: u32 = 10;

/// Each (user, item) pair is rated with probability `density`, uniformly on
/// the normalized grid. A user whose row comes out empty gets one uniformly
/// chosen item so that every user exists in the dataset.
pub fn generate_synthetic<T: Scalar>(
    users: usize,
    items: usize,
    density: f64,
    seed: u64,
) -> Result<RatingsDataset<T>> {
    if users == 0 || items == 0 {
        return Err(Error::Config(
            "synthetic dataset needs at least one user and one item".into(),
        ));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::Config(format!("density {density} outside (0, 1]")));
    }
    if density * (users as f64) * (items as f64) < users as f64 {
        return Err(Error::Config(format!(
            "density {density} gives fewer expected ratings than users ({users})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut builder = DatasetBuilder::new();
    let level = |rng: &mut ChaCha8Rng| {
        T::from_count(rng.gen_range(1..=RATING_LEVELS) as usize)
            / T::from_count(RATING_LEVELS as usize)
    };
    for u in 1..=users {
        let mut rated = false;
        for i in 1..=items {
            if rng.gen_bool(density) {
                let r = level(&mut rng);
                builder.push(u.to_string(), i.to_string(), r);
                rated = true;
            }
        }
        if !rated {
            let i = rng.gen_range(1..=items);
            let r = level(&mut rng);
            builder.push(u.to_string(), i.to_string(), r);
        }
    }
    Ok(builder.build())
}

/// Writes `user::item::rating::0` lines with ratings multiplied back by
/// `scale`, readable by [`crate::dataset::load_movielens`].
pub fn write_movielens<T: Scalar>(
    ds: &RatingsDataset<T>,
    path: impl AsRef<Path>,
    scale: f64,
) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_owned(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    for u in ds.users() {
        for &(i, r) in ds.user_items(u) {
            let raw = (r.as_f64() * scale * 1e6).round() / 1e6;
            writeln!(
                out,
                "{}::{}::{}::0",
                ds.user_label(u),
                ds.item_label(i),
                raw
            )
            .map_err(io_err)?;
        }
    }
    out.flush().map_err(io_err)
}
