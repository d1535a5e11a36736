use rand::Rng;

use super::metrics::{accuracy, mean_absolute_error, MetricReport};
use crate::error::{Error, Result};
use crate::rng::keyed_rng;

/// Mean ACC and MAE over `trials` rounds of uniform guessing among
/// `classes` labels against `golds`.
pub fn random_guess_baseline(classes: usize, golds: &[usize], trials: usize, seed: u64) -> Result<MetricReport> {
    if classes == 0 || trials == 0 {
        return Err(Error::Config("random guessing needs at least one class and one trial".into()));
    }
    if golds.is_empty() {
        return Err(Error::EmptyEval);
    }
    if let Some(g) = golds.iter().find(|&&g| g >= classes) {
        return Err(Error::OutOfSpan(format!("gold class {g} of {classes}")));
    }
    let mut rng = keyed_rng(seed, &[b"random-guess"]);
    let (mut acc, mut mae) = (0.0, 0.0);
    let mut preds = vec![0usize; golds.len()];
    for _ in 0..trials {
        preds.iter_mut().for_each(|p| *p = rng.gen_range(0..classes));
        acc += accuracy(&preds, golds)?;
        mae += mean_absolute_error(&preds, golds)?;
    }
    Ok(MetricReport { acc: acc / trials as f64, mae: mae / trials as f64, ..Default::default() })
}

/// Each class repeated `per_class` times.
pub fn uniform_golds(classes: usize, per_class: usize) -> Vec<usize> {
    (0..classes).flat_map(|c| std::iter::repeat(c).take(per_class)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_class_is_perfect() {
        let r = random_guess_baseline(1, &[0, 0, 0], 10, 0).unwrap();
        assert_eq!((r.acc, r.mae), (100.0, 0.0));
    }

    #[test]
    fn year_classes_match_closed_forms() {
        let r = random_guess_baseline(21, &uniform_golds(21, 20), 1000, 1).unwrap();
        assert!((r.acc - 100.0 / 21.0).abs() < 0.2, "{r:?}");
        assert!((r.mae - 440.0 / 63.0).abs() < 0.3, "{r:?}");
    }

    #[test]
    fn validates_inputs() {
        assert!(random_guess_baseline(0, &[0], 1, 0).is_err());
        assert!(random_guess_baseline(3, &[], 1, 0).is_err());
        assert!(random_guess_baseline(3, &[3], 1, 0).is_err());
    }
}
