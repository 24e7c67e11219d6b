use crate::error::{Error, Result};
use crate::lifetime::{update_posterior, ObservationSet, PosteriorParams, PriorParams, ScaleBelief, WeibullShape};
use crate::scalar::Real;
use crate::special::choose;

/// Posterior predictive distribution of the number of components of one
/// type still working at `t`, given they were observed up to `t_now`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDistribution<T> {
    probs: Vec<T>,
    t: T,
    t_now: T,
}

impl<T: Real> CountDistribution<T> {
    pub(crate) fn from_parts(probs: Vec<T>, t: T, t_now: T) -> Self {
        Self { probs, t, t_now }
    }

    /// P(C = l) for l = 0..=at_risk.
    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn pmf(&self, l: usize) -> Option<T> {
        self.probs.get(l).copied()
    }

    /// Largest possible count (components working at `t_now`).
    pub fn at_risk(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub fn t_now(&self) -> T {
        self.t_now
    }

    pub fn mean(&self) -> T {
        self.probs
            .iter()
            .enumerate()
            .map(|(l, &p)| T::lit(l as f64) * p)
            .sum()
    }
}

/// Predictive pmf of the surviving count at `t`, from the prior and the
/// data observed up to `obs.t_now()`.
pub fn count_pmf<T: Real>(
    shape: WeibullShape<T>,
    prior: &PriorParams<T>,
    obs: &ObservationSet<T>,
    t: T,
) -> Result<CountDistribution<T>> {
    let post = update_posterior(prior, shape, obs);
    count_pmf_posterior(shape, &post, obs.at_risk(), obs.t_now(), t)
}

/// Same as [`count_pmf`] but starting from already updated parameters.
pub fn count_pmf_posterior<T: Real>(
    shape: WeibullShape<T>,
    post: &PosteriorParams<T>,
    at_risk: usize,
    t_now: T,
    t: T,
) -> Result<CountDistribution<T>> {
    if !(t_now >= T::zero()) {
        return Err(Error::param("t_now", format!("must be >= 0, got {t_now}")));
    }
    if !(t >= t_now) || !t.is_finite() {
        return Err(Error::param("time", format!("t = {t} precedes t_now = {t_now}")));
    }
    let delta = shape.pow(t) - shape.pow(t_now);
    let probs = alternating_pmf(at_risk, post.strength(), post.weighted_guess(), delta)?;
    Ok(CountDistribution { probs, t, t_now })
}

/// Closed-form pmf as an alternating binomial sum:
///
/// ```text
/// P(C = l) = Σ_j (-1)^j C(m, l) C(m-l, j) (ny / (ny + (l+j)Δ))^(n+1)
/// ```
///
/// with m = `at_risk`, Δ = t^β - t_now^β. Each power is evaluated as
/// `exp(-(n+1) · ln1p((l+j)Δ/ny))`. Entries within the type's mass
/// tolerance of `[0, 1]` are clamped; anything further out, or a total
/// further than the tolerance from one, is reported as a breakdown.
pub(crate) fn alternating_pmf<T: Real>(at_risk: usize, n_post: T, ny_post: T, delta: T) -> Result<Vec<T>> {
    let m = at_risk;
    if delta == T::zero() {
        let mut probs = vec![T::zero(); m + 1];
        probs[m] = T::one();
        return Ok(probs);
    }
    let power = n_post + T::one();
    // ratio^(n+1) depends only on i = l + j
    let ratios: Vec<T> = (0..=m)
        .map(|i| (-power * (T::lit(i as f64) * delta / ny_post).ln_1p()).exp())
        .collect();

    let tol = T::mass_tolerance();
    let mut worst = T::zero();
    let mut probs = Vec::with_capacity(m + 1);
    for l in 0..=m {
        let outer = choose(m as u64, l as u64) as f64;
        let mut acc = T::zero();
        for j in 0..=(m - l) {
            let term = T::lit(outer * choose((m - l) as u64, j as u64) as f64) * ratios[l + j];
            worst = worst.max(term);
            if j % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        probs.push(acc);
    }
    let raw_sum: T = probs.iter().copied().sum();
    let breakdown = || Error::Normalization {
        sum: raw_sum.as_f64(),
        worst_term: worst.as_f64(),
    };
    for p in probs.iter_mut() {
        if !(*p >= -tol && *p <= T::one() + tol) {
            return Err(breakdown());
        }
        *p = p.max(T::zero()).min(T::one());
    }
    let sum: T = probs.iter().copied().sum();
    if !((sum - T::one()).abs() <= tol) {
        return Err(breakdown());
    }
    for p in probs.iter_mut() {
        *p /= sum;
    }
    Ok(probs)
}

/// P(C ≤ l). `l` must lie in `0..=at_risk`; the empty sum at `l = -1` is
/// rejected rather than returned as zero.
pub fn count_cmf<T: Real>(dist: &CountDistribution<T>, l: i64) -> Result<T> {
    if l < 0 || l as usize > dist.at_risk() {
        return Err(Error::IndexOutOfRange {
            index: vec![l],
            bounds: vec![dist.at_risk()],
        });
    }
    let s: T = dist.probs[..=l as usize].iter().copied().sum();
    Ok(s.max(T::zero()).min(T::one()))
}
