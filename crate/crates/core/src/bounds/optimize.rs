//! Lower and upper system reliability over the prior boxes.
//!
//! Raising y0 makes every count distribution stochastically larger, and the
//! signature of a coherent system is non-decreasing, so the lower bound
//! always sits at `y0_lo` and the upper bound at `y0_hi` for every type.
//! What remains is a K-dimensional box-constrained search over the
//! pseudocounts n0, done here by compass search from several starts.

use rayon::prelude::*;

use super::system::{SystemObjective, TypeSetup};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::structure::SurvivalSignature;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Lower,
    Upper,
}

impl Direction {
    fn sign<T: Real>(self) -> T {
        match self {
            Direction::Lower => T::one(),
            Direction::Upper => -T::one(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions<T> {
    /// First step, as a fraction of each axis' width.
    pub initial_step: T,
    /// The search stops once every step is below this fraction of its width.
    pub min_step: T,
    pub max_evaluations: usize,
}

impl<T: Real> Default for SearchOptions<T> {
    fn default() -> Self {
        Self {
            initial_step: T::lit(0.25),
            min_step: T::lit(1e-6),
            max_evaluations: 5_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome<T> {
    pub x: Vec<T>,
    pub value: T,
    pub evaluations: usize,
    pub iterations: usize,
}

/// Minimizes `f` over the box `[lo, hi]` by compass (coordinate pattern)
/// search: try ± the current step along each axis, take the first
/// improvement, and halve all steps when no move improves.
///
/// Axes with zero width are left fixed. The returned value never exceeds
/// `f(start)`.
pub fn compass_search<T, F>(f: &F, lo: &[T], hi: &[T], start: &[T], opts: &SearchOptions<T>) -> Result<SearchOutcome<T>>
where
    T: Real,
    F: Fn(&[T]) -> Result<T> + ?Sized,
{
    let mut x: Vec<T> = start
        .iter()
        .zip(lo.iter().zip(hi))
        .map(|(&s, (&a, &b))| s.max(a).min(b))
        .collect();
    let mut fx = f(&x)?;
    let mut evaluations = 1;
    let mut iterations = 0;
    let width: Vec<T> = lo.iter().zip(hi).map(|(&a, &b)| b - a).collect();
    let mut step: Vec<T> = width.iter().map(|&w| w * opts.initial_step).collect();
    let active: Vec<usize> = (0..x.len()).filter(|&i| width[i] > T::zero()).collect();

    while !active.is_empty() && evaluations < opts.max_evaluations {
        iterations += 1;
        let mut improved = false;
        'axes: for &i in &active {
            for dir in [T::one(), -T::one()] {
                let cand = (x[i] + dir * step[i]).max(lo[i]).min(hi[i]);
                if cand == x[i] {
                    continue;
                }
                let old = x[i];
                x[i] = cand;
                let fc = f(&x)?;
                evaluations += 1;
                if fc < fx {
                    fx = fc;
                    improved = true;
                    break 'axes;
                }
                x[i] = old;
            }
        }
        if !improved {
            let mut done = true;
            for &i in &active {
                step[i] *= T::lit(0.5);
                if step[i] >= opts.min_step * width[i] {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
    }
    Ok(SearchOutcome {
        x,
        value: fx,
        evaluations,
        iterations,
    })
}

/// Start points: every corner of the box while there are at most 256 of
/// them (otherwise the all-low and all-high corners and each single-axis
/// high corner), then the center, then an optional warm start.
pub fn seed_points<T: Real>(lo: &[T], hi: &[T], warm_start: Option<&[T]>) -> Vec<Vec<T>> {
    let k = lo.len();
    let mut seeds: Vec<Vec<T>> = Vec::new();
    if k <= 8 {
        for mask in 0..1usize << k {
            seeds.push((0..k).map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] }).collect());
        }
    } else {
        seeds.push(lo.to_vec());
        seeds.push(hi.to_vec());
        for i in 0..k {
            let mut s = lo.to_vec();
            s[i] = hi[i];
            seeds.push(s);
        }
    }
    seeds.push(lo.iter().zip(hi).map(|(&a, &b)| T::lit(0.5) * (a + b)).collect());
    if let Some(w) = warm_start {
        if w.len() == k {
            seeds.push(w.iter().zip(lo.iter().zip(hi)).map(|(&s, (&a, &b))| s.max(a).min(b)).collect());
        }
    }
    let mut unique: Vec<Vec<T>> = Vec::with_capacity(seeds.len());
    for s in seeds {
        if !unique.contains(&s) {
            unique.push(s);
        }
    }
    unique
}

/// Runs [`compass_search`] from every seed and keeps the best result,
/// preferring the earliest seed on ties. Seeds are searched in parallel;
/// the choice does not depend on scheduling.
pub fn multi_start_minimize<T, F>(
    f: &F,
    lo: &[T],
    hi: &[T],
    seeds: &[Vec<T>],
    opts: &SearchOptions<T>,
) -> Result<SearchOutcome<T>>
where
    T: Real,
    F: Fn(&[T]) -> Result<T> + Sync + ?Sized,
{
    let runs: Vec<SearchOutcome<T>> = seeds
        .par_iter()
        .map(|s| compass_search(f, lo, hi, s, opts))
        .collect::<Result<_>>()?;
    let evaluations: usize = runs.iter().map(|r| r.evaluations).sum();
    let iterations: usize = runs.iter().map(|r| r.iterations).sum();
    let mut best = runs
        .into_iter()
        .reduce(|best, r| if r.value < best.value { r } else { best })
        .ok_or_else(|| Error::param("search", "no seed points"))?;
    best.evaluations = evaluations;
    best.iterations = iterations;
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundOptions<T> {
    /// Optimize R(t | θ) / R(t_now | θ) instead of R(t | θ).
    pub normalize: bool,
    /// Extra start point (an n0 vector), typically the optimum found at a
    /// neighbouring time.
    pub warm_start: Option<Vec<T>>,
    pub search: SearchOptions<T>,
}

impl<T: Real> Default for BoundOptions<T> {
    fn default() -> Self {
        Self {
            normalize: false,
            warm_start: None,
            search: SearchOptions::default(),
        }
    }
}

/// Extremal system reliability and where it is attained.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult<T> {
    pub value: T,
    /// Optimal pseudocount per type.
    pub n0: Vec<T>,
    /// Pinned prior guess per type (`y0_lo` for the lower bound, `y0_hi` for the upper).
    pub y0: Vec<T>,
    pub evaluations: usize,
    pub iterations: usize,
    pub seeds: usize,
}

/// System reliability objective with y0 pinned for `direction`, optionally
/// divided by its value at `t_now`.
pub(crate) struct PinnedObjective<T> {
    at_t: SystemObjective<T>,
    at_now: Option<SystemObjective<T>>,
    pub(crate) y0: Vec<T>,
    pub(crate) lo: Vec<T>,
    pub(crate) hi: Vec<T>,
}

impl<T: Real> PinnedObjective<T> {
    pub fn new(
        sig: &SurvivalSignature,
        setups: &[TypeSetup<T>],
        t: T,
        direction: Direction,
        normalize: bool,
    ) -> Result<Self> {
        let types = setups.iter().map(|s| (s.shape, &s.obs));
        let at_t = SystemObjective::new(sig, types.clone(), t)?;
        let at_now = if normalize {
            let t_now = setups.first().map(|s| s.obs.t_now()).unwrap_or_else(T::zero);
            Some(SystemObjective::new(sig, types, t_now)?)
        } else {
            None
        };
        let y0 = setups
            .iter()
            .map(|s| match direction {
                Direction::Lower => s.prior_box.y0_lo,
                Direction::Upper => s.prior_box.y0_hi,
            })
            .collect();
        Ok(Self {
            at_t,
            at_now,
            y0,
            lo: setups.iter().map(|s| s.prior_box.n0_lo).collect(),
            hi: setups.iter().map(|s| s.prior_box.n0_hi).collect(),
        })
    }

    pub fn eval(&self, n0: &[T]) -> Result<T> {
        let r = self.at_t.eval(n0, &self.y0)?;
        match &self.at_now {
            None => Ok(r),
            Some(now) => {
                let base = now.eval(n0, &self.y0)?;
                if base <= T::zero() {
                    return Err(Error::SystemAlreadyFailed);
                }
                Ok((r / base).min(T::one()))
            }
        }
    }
}

/// Lower or upper system reliability at `t` with default options.
pub fn optimize_bound<T: Real>(
    sig: &SurvivalSignature,
    setups: &[TypeSetup<T>],
    t: T,
    direction: Direction,
) -> Result<BoundResult<T>> {
    optimize_bound_with(sig, setups, t, direction, &BoundOptions::default())
}

pub fn optimize_bound_with<T: Real>(
    sig: &SurvivalSignature,
    setups: &[TypeSetup<T>],
    t: T,
    direction: Direction,
    opts: &BoundOptions<T>,
) -> Result<BoundResult<T>> {
    let obj = PinnedObjective::new(sig, setups, t, direction, opts.normalize)?;
    let sign: T = direction.sign();
    let f = |n0: &[T]| obj.eval(n0).map(|r| sign * r);
    let seeds = seed_points(&obj.lo, &obj.hi, opts.warm_start.as_deref());
    let best = multi_start_minimize(&f, &obj.lo, &obj.hi, &seeds, &opts.search)?;
    Ok(BoundResult {
        value: (sign * best.value).max(T::zero()).min(T::one()),
        n0: best.x,
        y0: obj.y0.clone(),
        evaluations: best.evaluations,
        iterations: best.iterations,
        seeds: seeds.len(),
    })
}
