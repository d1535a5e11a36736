use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::keyed_rng;

pub const DEFAULT_RATIOS: (f64, f64, f64) = (0.8, 0.1, 0.1);

/// Seeded shuffle, then floor / floor / remainder partition.
pub fn split_dataset<T>(items: Vec<T>, ratios: (f64, f64, f64), seed: u64) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    let (a, b, c) = ratios;
    if [a, b, c].iter().any(|r| !(0.0..=1.0).contains(r)) || ((a + b + c) - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("split ratios {ratios:?} must be non-negative and sum to 1")));
    }
    let n = items.len();
    let n_train = ((a * n as f64) + 1e-9).floor() as usize;
    let n_val = ((b * n as f64) + 1e-9).floor() as usize;
    let mut items = items;
    items.shuffle(&mut keyed_rng(seed, &[b"split"]));
    let test = items.split_off(n_train + n_val);
    let val = items.split_off(n_train);
    Ok((items, val, test))
}
