//! Weibull component lifetimes with known shape and an inverse-gamma prior
//! on the scale λ, where `F(t | λ) = 1 - exp(-t^β / λ)`.
//!
//! Priors are parametrized by a pseudocount `n0` and a prior guess `y0` for
//! λ, which map to the usual inverse-gamma hyperparameters as
//! `a = n0 + 1`, `b = n0 · y0`. Updating with e failure times and
//! `n_total - e` components still working at `t_now` gives
//!
//! ```text
//! n_post      = n0 + e
//! n_post·y_post = n0·y0 + (n_total - e)·t_now^β + Σ t_i^β
//! ```
//!
//! A failure recorded exactly at `t_now` counts as a failure, not as a
//! censored observation.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::ln_gamma;

/// Weibull shape β (dimensionless, > 0).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct WeibullShape<T>(T);

impl<T: Real> WeibullShape<T> {
    pub fn new(beta: T) -> Result<Self> {
        if beta > T::zero() && beta.is_finite() {
            Ok(Self(beta))
        } else {
            Err(Error::param("shape", format!("β must be positive and finite, got {beta}")))
        }
    }

    pub fn value(self) -> T {
        self.0
    }

    /// t^β for t ≥ 0.
    #[inline]
    pub fn pow(self, t: T) -> T {
        if t == T::zero() {
            T::zero()
        } else {
            t.powf(self.0)
        }
    }
}

/// Anything that describes an inverse-gamma law IG(n + 1, n·y) on λ.
pub trait ScaleBelief<T: Real> {
    /// Pseudocount n.
    fn strength(&self) -> T;
    /// n·y.
    fn weighted_guess(&self) -> T;

    /// Expected λ.
    fn guess(&self) -> T {
        self.weighted_guess() / self.strength()
    }
    /// Inverse-gamma shape a = n + 1.
    fn ig_shape(&self) -> T {
        self.strength() + T::one()
    }
    /// Inverse-gamma scale b = n·y.
    fn ig_scale(&self) -> T {
        self.weighted_guess()
    }
}

/// Prior hyperparameters `(n0, y0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorParams<T> {
    n0: T,
    y0: T,
}

impl<T: Real> PriorParams<T> {
    /// `n0 >= 1` and `y0 > 0`. At `n0 = 1` the prior variance of λ is
    /// infinite; [`ig_moments`] reports that instead of failing here.
    pub fn new(n0: T, y0: T) -> Result<Self> {
        if !(n0 >= T::one()) || !n0.is_finite() {
            return Err(Error::param("prior strength", format!("n0 must be >= 1, got {n0}")));
        }
        if !(y0 > T::zero()) || !y0.is_finite() {
            return Err(Error::param("prior guess", format!("y0 must be > 0, got {y0}")));
        }
        Ok(Self { n0, y0 })
    }

    pub fn n0(&self) -> T {
        self.n0
    }

    pub fn y0(&self) -> T {
        self.y0
    }
}

impl<T: Real> ScaleBelief<T> for PriorParams<T> {
    fn strength(&self) -> T {
        self.n0
    }
    fn weighted_guess(&self) -> T {
        self.n0 * self.y0
    }
    fn guess(&self) -> T {
        self.y0
    }
}

/// Updated hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorParams<T> {
    pub n_post: T,
    /// n_post · y_post
    pub ny_post: T,
}

impl<T: Real> PosteriorParams<T> {
    pub fn y_post(&self) -> T {
        self.ny_post / self.n_post
    }

    /// Reuses the posterior as the prior for a later update.
    pub fn as_prior(&self) -> PriorParams<T> {
        PriorParams {
            n0: self.n_post,
            y0: self.y_post(),
        }
    }
}

impl<T: Real> ScaleBelief<T> for PosteriorParams<T> {
    fn strength(&self) -> T {
        self.n_post
    }
    fn weighted_guess(&self) -> T {
        self.ny_post
    }
}

/// Rectangle `[n0_lo, n0_hi] × [y0_lo, y0_hi]` of prior hyperparameters
/// for one component type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorBox<T> {
    pub n0_lo: T,
    pub n0_hi: T,
    pub y0_lo: T,
    pub y0_hi: T,
}

impl<T: Real> PriorBox<T> {
    pub fn new(n0: (T, T), y0: (T, T)) -> Result<Self> {
        let (n0_lo, n0_hi) = n0;
        let (y0_lo, y0_hi) = y0;
        if !(n0_lo >= T::one()) || !(n0_lo <= n0_hi) || !n0_hi.is_finite() {
            return Err(Error::param(
                "prior box",
                format!("need 1 <= n0_lo <= n0_hi, got [{n0_lo}, {n0_hi}]"),
            ));
        }
        if !(y0_lo > T::zero()) || !(y0_lo <= y0_hi) || !y0_hi.is_finite() {
            return Err(Error::param(
                "prior box",
                format!("need 0 < y0_lo <= y0_hi, got [{y0_lo}, {y0_hi}]"),
            ));
        }
        Ok(Self {
            n0_lo,
            n0_hi,
            y0_lo,
            y0_hi,
        })
    }

    /// Degenerate box holding a single prior.
    pub fn point(p: PriorParams<T>) -> Self {
        Self {
            n0_lo: p.n0,
            n0_hi: p.n0,
            y0_lo: p.y0,
            y0_hi: p.y0,
        }
    }

    /// Box whose y0 range is elicited from bounds on the mean lifetime.
    pub fn from_mean_lifetime(shape: WeibullShape<T>, n0: (T, T), mean: (T, T)) -> Result<Self> {
        let (lo, hi) = elicit_y0_interval(shape, mean.0, mean.1)?;
        Self::new(n0, (lo, hi))
    }

    pub fn is_point(&self) -> bool {
        self.n0_lo == self.n0_hi && self.y0_lo == self.y0_hi
    }

    pub fn contains(&self, p: &PriorParams<T>) -> bool {
        p.n0 >= self.n0_lo && p.n0 <= self.n0_hi && p.y0 >= self.y0_lo && p.y0 <= self.y0_hi
    }

    pub fn center(&self) -> PriorParams<T> {
        let half = T::lit(0.5);
        PriorParams {
            n0: half * (self.n0_lo + self.n0_hi),
            y0: half * (self.y0_lo + self.y0_hi),
        }
    }

    /// Prior at relative position `(u, v) ∈ [0,1]²` inside the box.
    pub fn at(&self, u: T, v: T) -> PriorParams<T> {
        PriorParams {
            n0: self.n0_lo + u * (self.n0_hi - self.n0_lo),
            y0: self.y0_lo + v * (self.y0_hi - self.y0_lo),
        }
    }
}

/// Failure times of one component type observed up to `t_now`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet<T> {
    failure_times: Vec<T>,
    t_now: T,
    n_total: usize,
}

impl<T: Real> ObservationSet<T> {
    pub fn new(failure_times: Vec<T>, t_now: T, n_total: usize) -> Result<Self> {
        if !(t_now >= T::zero()) || !t_now.is_finite() {
            return Err(Error::InvalidObservation(format!(
                "t_now must be a finite nonnegative time, got {t_now}"
            )));
        }
        if failure_times.len() > n_total {
            return Err(Error::InvalidObservation(format!(
                "{} failures recorded for {} components",
                failure_times.len(),
                n_total
            )));
        }
        for &t in &failure_times {
            if !(t > T::zero()) || !t.is_finite() {
                return Err(Error::InvalidObservation(format!(
                    "failure time {t} is not a positive time"
                )));
            }
            if t > t_now {
                return Err(Error::InvalidObservation(format!(
                    "failure time {t} exceeds t_now = {t_now}"
                )));
            }
        }
        Ok(Self {
            failure_times,
            t_now,
            n_total,
        })
    }

    /// No failures; every component still running at `t_now`.
    pub fn censored(n_total: usize, t_now: T) -> Result<Self> {
        Self::new(Vec::new(), t_now, n_total)
    }

    /// Fresh components, nothing observed yet.
    pub fn none(n_total: usize) -> Self {
        Self {
            failure_times: Vec::new(),
            t_now: T::zero(),
            n_total,
        }
    }

    pub fn failure_times(&self) -> &[T] {
        &self.failure_times
    }

    pub fn t_now(&self) -> T {
        self.t_now
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    /// Number of failures e.
    pub fn failures(&self) -> usize {
        self.failure_times.len()
    }

    /// Components still working at `t_now`.
    pub fn at_risk(&self) -> usize {
        self.n_total - self.failure_times.len()
    }
}

fn check_time<T: Real>(what: &'static str, t: T) -> Result<()> {
    if t >= T::zero() && !t.is_nan() {
        Ok(())
    } else {
        Err(Error::param(what, format!("must be >= 0, got {t}")))
    }
}

fn check_scale<T: Real>(lambda: T) -> Result<()> {
    if lambda > T::zero() && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::param("scale", format!("λ must be positive, got {lambda}")))
    }
}

/// `F(t | λ) = 1 - exp(-t^β / λ)`.
pub fn weibull_cdf<T: Real>(shape: WeibullShape<T>, lambda: T, t: T) -> Result<T> {
    check_scale(lambda)?;
    check_time("time", t)?;
    Ok(-(-shape.pow(t) / lambda).exp_m1())
}

/// `f(t | λ) = β/λ · t^(β-1) · exp(-t^β / λ)`.
pub fn weibull_density<T: Real>(shape: WeibullShape<T>, lambda: T, t: T) -> Result<T> {
    check_scale(lambda)?;
    check_time("time", t)?;
    let beta = shape.value();
    if t == T::zero() {
        return Ok(if beta > T::one() {
            T::zero()
        } else if beta == T::one() {
            T::one() / lambda
        } else {
            T::infinity()
        });
    }
    Ok((beta.ln() - lambda.ln() + (beta - T::one()) * t.ln() - shape.pow(t) / lambda).exp())
}

/// `P(T > t | T > t_now, λ) = exp(-(t^β - t_now^β) / λ)`.
pub fn conditional_survival<T: Real>(shape: WeibullShape<T>, lambda: T, t_now: T, t: T) -> Result<T> {
    check_scale(lambda)?;
    check_time("t_now", t_now)?;
    if !(t >= t_now) {
        return Err(Error::param("time", format!("t = {t} precedes t_now = {t_now}")));
    }
    Ok((-(shape.pow(t) - shape.pow(t_now)) / lambda).exp())
}

/// `E[T | λ] = λ^(1/β) Γ(1 + 1/β)`.
pub fn mean_lifetime_from_scale<T: Real>(shape: WeibullShape<T>, lambda: T) -> Result<T> {
    check_scale(lambda)?;
    let inv = T::one() / shape.value();
    Ok((inv * lambda.ln() + ln_gamma(T::one() + inv)).exp())
}

/// Inverse of [`mean_lifetime_from_scale`]: `λ = (m / Γ(1 + 1/β))^β`.
pub fn scale_from_mean_lifetime<T: Real>(shape: WeibullShape<T>, mean: T) -> Result<T> {
    if !(mean > T::zero()) || !mean.is_finite() {
        return Err(Error::param("mean lifetime", format!("must be positive, got {mean}")));
    }
    let beta = shape.value();
    Ok((beta * (mean.ln() - ln_gamma(T::one() + T::one() / beta))).exp())
}

/// Maps expert bounds on the expected lifetime to bounds on y0.
pub fn elicit_y0_interval<T: Real>(shape: WeibullShape<T>, mean_lo: T, mean_hi: T) -> Result<(T, T)> {
    if !(mean_lo <= mean_hi) {
        return Err(Error::param(
            "mean lifetime",
            format!("lower bound {mean_lo} exceeds upper bound {mean_hi}"),
        ));
    }
    Ok((
        scale_from_mean_lifetime(shape, mean_lo)?,
        scale_from_mean_lifetime(shape, mean_hi)?,
    ))
}

/// Conjugate update under right censoring at `obs.t_now()`.
pub fn update_posterior<T: Real>(
    prior: &PriorParams<T>,
    shape: WeibullShape<T>,
    obs: &ObservationSet<T>,
) -> PosteriorParams<T> {
    let tau: T = obs.failure_times().iter().map(|&t| shape.pow(t)).sum();
    let censored = T::lit(obs.at_risk() as f64) * shape.pow(obs.t_now());
    PosteriorParams {
        n_post: prior.n0 + T::lit(obs.failures() as f64),
        ny_post: prior.n0 * prior.y0 + censored + tau,
    }
}

/// Inverse-gamma density `b^a / Γ(a) · λ^(-a-1) · exp(-b/λ)`.
pub fn ig_density<T: Real>(a: T, b: T, lambda: T) -> Result<T> {
    if !(a > T::zero()) || !(b > T::zero()) {
        return Err(Error::param("inverse gamma", format!("need a, b > 0, got a = {a}, b = {b}")));
    }
    check_time("scale", lambda)?;
    if lambda == T::zero() {
        return Ok(T::zero());
    }
    Ok((a * b.ln() - ln_gamma(a) - (a + T::one()) * lambda.ln() - b / lambda).exp())
}

/// Mean and standard deviation of λ under IG(n + 1, n·y).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IgMoments<T> {
    pub mean: T,
    /// `None` when n ≤ 1, where the variance is infinite.
    pub sd: Option<T>,
}

impl<T: Real> IgMoments<T> {
    pub fn sd(&self) -> Result<T> {
        self.sd.ok_or_else(|| {
            Error::UndefinedMoment("standard deviation needs a pseudocount above 1".into())
        })
    }
}

/// Mean `y` and sd `y / sqrt(n - 1)` of IG(n + 1, n·y).
pub fn ig_moments<T: Real, P: ScaleBelief<T>>(params: &P) -> IgMoments<T> {
    let n = params.strength();
    let y = params.guess();
    IgMoments {
        mean: y,
        sd: (n > T::one()).then(|| y / (n - T::one()).sqrt()),
    }
}

/// Predictive lifetime density with λ integrated out:
/// `β t^(β-1) (n+1) (ny)^(n+1) / (ny + t^β)^(n+2)`.
pub fn predictive_density<T: Real, P: ScaleBelief<T>>(params: &P, shape: WeibullShape<T>, t: T) -> Result<T> {
    check_time("time", t)?;
    let beta = shape.value();
    let n = params.strength();
    let ny = params.weighted_guess();
    if t == T::zero() {
        return Ok(if beta > T::one() {
            T::zero()
        } else if beta == T::one() {
            (n + T::one()) / ny
        } else {
            T::infinity()
        });
    }
    let tb = shape.pow(t);
    let log = beta.ln() + (beta - T::one()) * t.ln() + (n + T::one()).ln() - ny.ln()
        - (n + T::lit(2.0)) * (tb / ny).ln_1p();
    Ok(log.exp())
}

/// Predictive survival `(ny / (ny + t^β))^(n+1)`.
pub fn predictive_reliability<T: Real, P: ScaleBelief<T>>(params: &P, shape: WeibullShape<T>, t: T) -> Result<T> {
    check_time("time", t)?;
    let ny = params.weighted_guess();
    Ok((-(params.strength() + T::one()) * (shape.pow(t) / ny).ln_1p()).exp())
}
