use rayon::prelude::*;

use super::optimize::{compass_search, multi_start_minimize, seed_points, Direction, PinnedObjective, SearchOptions};
use super::system::{shared_t_now, TypeSetup};
use crate::error::{Error, Result};
use crate::lifetime::{
    mean_lifetime_from_scale, predictive_reliability, update_posterior, ObservationSet, PriorBox, PriorParams,
    WeibullShape,
};
use crate::scalar::Real;
use crate::structure::SurvivalSignature;

/// Number of points in [`default_time_grid`].
pub const DEFAULT_GRID_POINTS: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint<T> {
    pub t: T,
    pub lower: T,
    pub upper: T,
    pub argmin_n0: Vec<T>,
    pub argmax_n0: Vec<T>,
    pub iterations_lower: usize,
    pub iterations_upper: usize,
}

/// Lower and upper reliability over a time grid (times elapsed since startup).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsCurve<T> {
    pub type_names: Vec<String>,
    pub t_now: T,
    pub normalized: bool,
    pub points: Vec<CurvePoint<T>>,
}

impl<T: Real> BoundsCurve<T> {
    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        self.points.iter().map(|p| p.t)
    }

    pub fn lower(&self) -> impl Iterator<Item = T> + '_ {
        self.points.iter().map(|p| p.lower)
    }

    pub fn upper(&self) -> impl Iterator<Item = T> + '_ {
        self.points.iter().map(|p| p.upper)
    }

    /// The point at exactly `t`, if it is on the grid.
    pub fn at(&self, t: T) -> Option<&CurvePoint<T>> {
        self.points.iter().find(|p| p.t == t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimeScale {
    Elapsed,
    Prospective,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImprecisionCurve<T> {
    pub scale: TimeScale,
    /// `(time, upper - lower)`; time is shifted by `-t_now` on the prospective scale.
    pub points: Vec<(T, T)>,
}

impl<T: Real> ImprecisionCurve<T> {
    /// Δ at exactly `t` on this curve's scale.
    pub fn at(&self, t: T) -> Option<T> {
        self.points.iter().find(|p| p.0 == t).map(|p| p.1)
    }
}

pub fn imprecision_curve<T: Real>(curve: &BoundsCurve<T>, scale: TimeScale) -> ImprecisionCurve<T> {
    let shift = match scale {
        TimeScale::Elapsed => T::zero(),
        TimeScale::Prospective => curve.t_now,
    };
    ImprecisionCurve {
        scale,
        points: curve
            .points
            .iter()
            .map(|p| (p.t - shift, (p.upper - p.lower).max(T::zero()).min(T::one())))
            .collect(),
    }
}

fn check_grid<T: Real>(grid: &[T], start: T) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::param("time grid", "is empty"));
    }
    if let Some(t) = grid.iter().find(|t| !t.is_finite() || !(**t >= start)) {
        return Err(Error::param("time grid", format!("time {t} lies before {start}")));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::param("time grid", "must be strictly ascending"));
    }
    Ok(())
}

/// `points` evenly spaced times from `start` to `end` inclusive.
pub fn uniform_grid<T: Real>(start: T, end: T, points: usize) -> Result<Vec<T>> {
    if points < 2 || !(end > start) {
        return Err(Error::param(
            "time grid",
            format!("need at least 2 points and end > start, got {points} on [{start}, {end}]"),
        ));
    }
    let step = (end - start) / T::lit((points - 1) as f64);
    let mut grid: Vec<T> = (0..points).map(|i| start + step * T::lit(i as f64)).collect();
    grid[points - 1] = end;
    Ok(grid)
}

/// 512 points from `t_now` to `t_now` plus three times the largest mean
/// lifetime implied by any type's `y0_hi`.
pub fn default_time_grid<T: Real>(setups: &[TypeSetup<T>]) -> Result<Vec<T>> {
    let t_now = setups.first().map(|s| s.obs.t_now()).unwrap_or_else(T::zero);
    let mut longest = T::zero();
    for s in setups {
        longest = longest.max(mean_lifetime_from_scale(s.shape, s.prior_box.y0_hi)?);
    }
    uniform_grid(t_now, t_now + T::lit(3.0) * longest, DEFAULT_GRID_POINTS)
}

struct PointResult<T> {
    value: T,
    n0: Vec<T>,
    iterations: usize,
}

fn bound_at<T: Real>(
    sig: &SurvivalSignature,
    setups: &[TypeSetup<T>],
    t: T,
    direction: Direction,
    normalize: bool,
    search: &SearchOptions<T>,
) -> Result<(PinnedObjective<T>, PointResult<T>)> {
    let obj = PinnedObjective::new(sig, setups, t, direction, normalize)?;
    let sign = sign_of::<T>(direction);
    let seeds = seed_points(&obj.lo, &obj.hi, None);
    let best = {
        let f = |n0: &[T]| obj.eval(n0).map(|r| sign * r);
        multi_start_minimize(&f, &obj.lo, &obj.hi, &seeds, search)?
    };
    Ok((
        obj,
        PointResult {
            value: best.value,
            n0: best.x,
            iterations: best.iterations,
        },
    ))
}

fn sign_of<T: Real>(direction: Direction) -> T {
    match direction {
        Direction::Lower => T::one(),
        Direction::Upper => -T::one(),
    }
}

/// Lower and upper system reliability at every grid time.
///
/// Each time is first optimized on its own from the box corners and center.
/// A second pass restarts each point from its left neighbour's optimum and
/// keeps the better value. Both passes run in parallel and neither depends
/// on scheduling, so the output is the same for any thread count.
pub fn reliability_bounds_curve<T: Real>(
    sig: &SurvivalSignature,
    setups: &[TypeSetup<T>],
    grid: &[T],
    normalize: bool,
) -> Result<BoundsCurve<T>> {
    let t_now = shared_t_now(sig, setups.iter().map(|s| &s.obs))?;
    check_grid(grid, t_now)?;
    let search = SearchOptions::default();

    let mut sides = Vec::with_capacity(2);
    for direction in [Direction::Lower, Direction::Upper] {
        let sign = sign_of::<T>(direction);
        let first: Vec<(PinnedObjective<T>, PointResult<T>)> = grid
            .par_iter()
            .map(|&t| bound_at(sig, setups, t, direction, normalize, &search))
            .collect::<Result<_>>()?;
        let refined: Vec<PointResult<T>> = (0..first.len())
            .into_par_iter()
            .map(|i| {
                let (obj, own) = &first[i];
                let mut best = PointResult {
                    value: own.value,
                    n0: own.n0.clone(),
                    iterations: own.iterations,
                };
                if i > 0 && first[i - 1].1.n0 != own.n0 {
                    let f = |n0: &[T]| obj.eval(n0).map(|r| sign * r);
                    let warm = compass_search(&f, &obj.lo, &obj.hi, &first[i - 1].1.n0, &search)?;
                    best.iterations += warm.iterations;
                    if warm.value < best.value {
                        best.value = warm.value;
                        best.n0 = warm.x;
                    }
                }
                Ok(best)
            })
            .collect::<Result<_>>()?;
        sides.push(refined);
    }
    let upper = sides.pop().unwrap_or_default();
    let lower = sides.pop().unwrap_or_default();

    let points = grid
        .iter()
        .zip(lower.into_iter().zip(upper))
        .map(|(&t, (lo, hi))| CurvePoint {
            t,
            lower: lo.value.max(T::zero()).min(T::one()),
            upper: (-hi.value).max(T::zero()).min(T::one()),
            argmin_n0: lo.n0,
            argmax_n0: hi.n0,
            iterations_lower: lo.iterations,
            iterations_upper: hi.iterations,
        })
        .collect();
    Ok(BoundsCurve {
        type_names: sig.type_names().to_vec(),
        t_now,
        normalized: normalize,
        points,
    })
}

/// Envelope of the predictive reliability of a single component over a
/// prior box, updated with `obs` when given. Times are measured from
/// the component's startup and may precede `obs.t_now()`.
///
/// y0 sits at `y0_lo` for the lower and `y0_hi` for the upper envelope; n0
/// is optimized in one dimension from nine evenly spaced starts.
pub fn component_predictive_bounds<T: Real>(
    shape: WeibullShape<T>,
    prior_box: &PriorBox<T>,
    obs: Option<&ObservationSet<T>>,
    grid: &[T],
) -> Result<BoundsCurve<T>> {
    check_grid(grid, T::zero())?;
    let search = SearchOptions::default();
    let lo = [prior_box.n0_lo];
    let hi = [prior_box.n0_hi];
    let seeds: Vec<Vec<T>> = {
        let mut s: Vec<Vec<T>> = (0..9)
            .map(|i| vec![prior_box.n0_lo + T::lit(i as f64 / 8.0) * (prior_box.n0_hi - prior_box.n0_lo)])
            .collect();
        s.dedup();
        s
    };
    let reliability = |n0: T, y0: T, t: T| -> Result<T> {
        let prior = PriorParams::new(n0, y0)?;
        match obs {
            Some(o) => predictive_reliability(&update_posterior(&prior, shape, o), shape, t),
            None => predictive_reliability(&prior, shape, t),
        }
    };
    let points = grid
        .par_iter()
        .map(|&t| {
            let fl = |x: &[T]| reliability(x[0], prior_box.y0_lo, t);
            let fu = |x: &[T]| reliability(x[0], prior_box.y0_hi, t).map(|r| -r);
            let l = multi_start_minimize(&fl, &lo, &hi, &seeds, &search)?;
            let u = multi_start_minimize(&fu, &lo, &hi, &seeds, &search)?;
            Ok(CurvePoint {
                t,
                lower: l.value.max(T::zero()).min(T::one()),
                upper: (-u.value).max(T::zero()).min(T::one()),
                argmin_n0: l.x,
                argmax_n0: u.x,
                iterations_lower: l.iterations,
                iterations_upper: u.iterations,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundsCurve {
        type_names: vec!["component".to_string()],
        t_now: obs.map(|o| o.t_now()).unwrap_or_else(T::zero),
        normalized: false,
        points,
    })
}
