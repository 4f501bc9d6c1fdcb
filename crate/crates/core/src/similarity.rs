//! Similarity kernels between two embedded token sets.
//!
//! * pooled cosine: cosine between the two sum-pooled vectors;
//! * percentile Hausdorff: each point's best cosine match in the other set,
//!   summarized by a lower order statistic in both directions, then the min;
//! * cross sum: the sum of all pairwise dot products.

use std::fmt;
use std::str::FromStr;

use crate::embedding::{sum_pool, EmbeddedSet};
use crate::error::{Error, Result};
use crate::vector;

/// Median, the percentile used for the Hausdorff kernel unless overridden.
pub const DEFAULT_PERCENTILE: f64 = 50.0;

/// Set-to-set similarity used to weight concepts against a query.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub enum Kernel {
    #[default]
    Pooled,
    Hausdorff {
        percentile: f64,
    },
}

impl Kernel {
    pub fn hausdorff() -> Self {
        Kernel::Hausdorff {
            percentile: DEFAULT_PERCENTILE,
        }
    }

    pub fn similarity(&self, x: &EmbeddedSet, y: &EmbeddedSet) -> Result<f64> {
        match *self {
            Kernel::Pooled => sim_pooled(x, y),
            Kernel::Hausdorff { percentile } => sim_hausdorff(x, y, percentile),
        }
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pooled" => Ok(Kernel::Pooled),
            "hausdorff" => Ok(Kernel::hausdorff()),
            other => Err(Error::InvalidArgument(format!(
                "unknown kernel {other:?} (expected pooled or hausdorff)"
            ))),
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Pooled => f.write_str("pooled"),
            Kernel::Hausdorff { .. } => f.write_str("hausdorff"),
        }
    }
}

fn check_dims(x: &EmbeddedSet, y: &EmbeddedSet) -> Result<()> {
    if x.dimension() != y.dimension() {
        return Err(Error::WrongDimension {
            expected: x.dimension(),
            found: y.dimension(),
        });
    }
    Ok(())
}

/// Cosine between the sum-pooled vectors. Fails with [`Error::ZeroNorm`] when
/// either pooled vector vanishes.
pub fn sim_pooled(x: &EmbeddedSet, y: &EmbeddedSet) -> Result<f64> {
    check_dims(x, y)?;
    vector::cosine(&sum_pool(x), &sum_pool(y)).ok_or(Error::ZeroNorm)
}

/// Percentile-based Hausdorff similarity with percentile `l` in (0, 100].
pub fn sim_hausdorff(x: &EmbeddedSet, y: &EmbeddedSet, l: f64) -> Result<f64> {
    if !(l > 0.0 && l <= 100.0) {
        return Err(Error::InvalidPercentile(l));
    }
    check_dims(x, y)?;
    let (xs, ys) = (x.vectors(), y.vectors());

    // cos[i][j] between x_i and y_j
    let mut cos = vec![0.0; xs.len() * ys.len()];
    for (i, xi) in xs.iter().enumerate() {
        for (j, yj) in ys.iter().enumerate() {
            cos[i * ys.len() + j] = vector::cosine(xi, yj).ok_or(Error::ZeroNorm)?;
        }
    }

    let best_for_y: Vec<f64> = (0..ys.len())
        .map(|j| {
            (0..xs.len())
                .map(|i| cos[i * ys.len() + j])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let best_for_x: Vec<f64> = (0..xs.len())
        .map(|i| {
            cos[i * ys.len()..(i + 1) * ys.len()]
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();

    Ok(lower_percentile(best_for_y, l).min(lower_percentile(best_for_x, l)))
}

/// Element at ascending index `ceil(l * n / 100) - 1`.
pub(crate) fn lower_percentile(mut values: Vec<f64>, l: f64) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    let n = values.len();
    let rank = (l * n as f64 / 100.0).ceil() as usize;
    values[rank.clamp(1, n) - 1]
}

/// Sum of all pairwise dot products.
pub fn sim_crosssum(x: &EmbeddedSet, y: &EmbeddedSet) -> Result<f64> {
    check_dims(x, y)?;
    Ok(x.vectors()
        .iter()
        .flat_map(|xi| y.vectors().iter().map(move |yj| vector::dot(xi, yj)))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(vs: &[&[f64]]) -> EmbeddedSet {
        EmbeddedSet::new(vs.iter().map(|v| v.to_vec()).collect()).unwrap()
    }

    #[test]
    fn pooled_examples() {
        let e1 = set(&[&[1.0, 0.0, 0.0]]);
        let e2 = set(&[&[0.0, 1.0, 0.0]]);
        assert_eq!(sim_pooled(&e1, &e1).unwrap(), 1.0);
        assert_eq!(sim_pooled(&e1, &e2).unwrap(), 0.0);
        let both = set(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        assert!((sim_pooled(&both, &e1).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn pooled_cancellation_is_an_error() {
        let x = set(&[&[1.0, 0.0], &[-1.0, 0.0]]);
        let y = set(&[&[1.0, 0.0]]);
        assert!(matches!(sim_pooled(&x, &y), Err(Error::ZeroNorm)));
    }

    #[test]
    fn hausdorff_singletons_equal_cosine() {
        let x = set(&[&[0.3, -0.2, 0.9]]);
        let y = set(&[&[-0.5, 0.1, 0.4]]);
        for l in [1.0, 50.0, 100.0] {
            assert_eq!(sim_hausdorff(&x, &y, l).unwrap(), sim_pooled(&x, &y).unwrap());
        }
    }

    #[test]
    fn hausdorff_self_at_full_percentile_is_one() {
        let x = set(&[&[1.0, 0.0], &[0.6, 0.8], &[0.0, -1.0]]);
        assert!((sim_hausdorff(&x, &x, 100.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hausdorff_rejects_bad_percentile() {
        let x = set(&[&[1.0, 0.0]]);
        assert!(sim_hausdorff(&x, &x, 0.0).is_err());
        assert!(sim_hausdorff(&x, &x, 100.5).is_err());
    }

    #[test]
    fn percentile_order_statistic() {
        let v = vec![0.4, 0.1, 0.3, 0.2];
        assert_eq!(lower_percentile(v.clone(), 50.0), 0.2);
        assert_eq!(lower_percentile(v.clone(), 100.0), 0.4);
        assert_eq!(lower_percentile(v.clone(), 1.0), 0.1);
        assert_eq!(lower_percentile(v, 75.0), 0.3);
        // 30% of 10 must be rank 3, not 4
        let ten: Vec<f64> = (0..10).map(f64::from).collect();
        assert_eq!(lower_percentile(ten, 30.0), 2.0);
    }

    #[test]
    fn crosssum_examples() {
        assert_eq!(sim_crosssum(&set(&[&[1.0, 0.0]]), &set(&[&[1.0, 0.0]])).unwrap(), 1.0);
        let x = set(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(sim_crosssum(&x, &set(&[&[1.0, 0.0]])).unwrap(), 1.0);
    }

    fn arb_set(dim: usize) -> impl Strategy<Value = EmbeddedSet> {
        prop::collection::vec(
            prop::collection::vec(-1.0f64..1.0, dim)
                .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-6),
            1..6,
        )
        .prop_map(|vs| EmbeddedSet::new(vs).unwrap())
    }

    proptest! {
        #[test]
        fn kernels_are_symmetric(x in arb_set(4), y in arb_set(4), l in 1.0f64..=100.0) {
            if let (Ok(a), Ok(b)) = (sim_pooled(&x, &y), sim_pooled(&y, &x)) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            let a = sim_hausdorff(&x, &y, l).unwrap();
            let b = sim_hausdorff(&y, &x, l).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
            let a = sim_crosssum(&x, &y).unwrap();
            let b = sim_crosssum(&y, &x).unwrap();
            prop_assert!((a - b).abs() < 1e-10);
        }

        #[test]
        fn hausdorff_stays_in_range_with_duplicates(x in arb_set(3), y in arb_set(3), l in 1.0f64..=100.0) {
            let mut dup = x.vectors().to_vec();
            dup.push(x.vectors()[0].clone());
            let dup = EmbeddedSet::new(dup).unwrap();
            for s in [sim_hausdorff(&x, &y, l).unwrap(), sim_hausdorff(&dup, &y, l).unwrap()] {
                prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&s));
            }
        }

        #[test]
        fn crosssum_equals_pooled_dot(x in arb_set(5), y in arb_set(5)) {
            let identity = vector::dot(&sum_pool(&x), &sum_pool(&y));
            prop_assert!((sim_crosssum(&x, &y).unwrap() - identity).abs() < 1e-10);
        }

        #[test]
        fn pooled_self_similarity_is_one(x in arb_set(4)) {
            if let Ok(s) = sim_pooled(&x, &x) {
                prop_assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }
}
