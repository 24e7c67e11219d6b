use rayon::prelude::*;

use crate::bounds::{Direction, PinnedObjective, TypeSetup};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::structure::SurvivalSignature;

/// Largest number of objective evaluations the grid oracle will attempt.
pub const GRID_EVALUATION_LIMIT: u128 = 50_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct GridBound<T> {
    pub value: T,
    pub n0: Vec<T>,
    pub evaluations: usize,
}

/// Exhaustive search over an evenly spaced n0 grid with `points_per_axis`
/// values per type (y0 pinned as in the optimizer). Ties keep the first
/// grid point in row-major order.
pub fn grid_bound_oracle<T: Real>(
    sig: &SurvivalSignature,
    setups: &[TypeSetup<T>],
    t: T,
    direction: Direction,
    points_per_axis: usize,
) -> Result<GridBound<T>> {
    if points_per_axis < 2 {
        return Err(Error::param("grid", "need at least 2 points per axis"));
    }
    let k = setups.len() as u32;
    let evaluations = (points_per_axis as u128)
        .checked_pow(k)
        .unwrap_or(u128::MAX);
    if evaluations > GRID_EVALUATION_LIMIT {
        return Err(Error::GridTooLarge {
            evaluations,
            limit: GRID_EVALUATION_LIMIT,
        });
    }
    let obj = PinnedObjective::new(sig, setups, t, direction, false)?;
    let axes: Vec<Vec<T>> = obj
        .lo
        .iter()
        .zip(&obj.hi)
        .map(|(&a, &b)| {
            let step = (b - a) / T::lit((points_per_axis - 1) as f64);
            let mut v: Vec<T> = (0..points_per_axis).map(|i| a + step * T::lit(i as f64)).collect();
            v[points_per_axis - 1] = b;
            v
        })
        .collect();
    let total = evaluations as usize;
    let point = |mut idx: usize| -> Vec<T> {
        let mut x = vec![T::zero(); axes.len()];
        for d in (0..axes.len()).rev() {
            x[d] = axes[d][idx % points_per_axis];
            idx /= points_per_axis;
        }
        x
    };
    let better = |a: T, b: T| match direction {
        Direction::Lower => a < b,
        Direction::Upper => a > b,
    };
    let (best_idx, value) = (0..total)
        .into_par_iter()
        .map(|i| obj.eval(&point(i)).map(|v| (i, v)))
        .try_reduce_with(|x, y| {
            let keep_y = better(y.1, x.1) || (y.1 == x.1 && y.0 < x.0);
            Ok(if keep_y { y } else { x })
        })
        .expect("grid has at least one point")?;
    Ok(GridBound {
        value,
        n0: point(best_idx),
        evaluations: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifetime::{ObservationSet, PriorBox, WeibullShape};
    use crate::structure::{brake_system, compute_survival_signature};

    fn setups(n0_hi: f64) -> Vec<TypeSetup<f64>> {
        [(2.5, 1, 100.0), (1.2, 1, 10.0), (2.0, 4, 100.0), (1.5, 4, 8.0)]
            .iter()
            .map(|&(b, n, y)| TypeSetup {
                shape: WeibullShape::new(b).unwrap(),
                prior_box: PriorBox::new((1.0, n0_hi), (y, 1.5 * y)).unwrap(),
                obs: ObservationSet::none(n),
            })
            .collect()
    }

    #[test]
    fn refinement_never_worse() {
        let sig = compute_survival_signature(&brake_system()).unwrap();
        let s = setups(6.0);
        let coarse = grid_bound_oracle(&sig, &s, 5.0, Direction::Lower, 5).unwrap();
        let fine = grid_bound_oracle(&sig, &s, 5.0, Direction::Lower, 9).unwrap();
        assert!(fine.value <= coarse.value);
        let coarse = grid_bound_oracle(&sig, &s, 5.0, Direction::Upper, 5).unwrap();
        let fine = grid_bound_oracle(&sig, &s, 5.0, Direction::Upper, 9).unwrap();
        assert!(fine.value >= coarse.value);
    }

    #[test]
    fn size_limit() {
        let sig = compute_survival_signature(&brake_system()).unwrap();
        let e = grid_bound_oracle(&sig, &setups(6.0), 5.0, Direction::Lower, 100).unwrap_err();
        assert!(matches!(e, Error::GridTooLarge { .. }));
        assert!(grid_bound_oracle(&sig, &setups(6.0), 5.0, Direction::Lower, 1).is_err());
    }
}
