//! Seeded Monte Carlo counterparts of the closed-form predictive results.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Gamma};
use rayon::prelude::*;

use crate::bounds::{CountDistribution, TypeInput};
use crate::error::{Error, Result};
use crate::lifetime::{update_posterior, PosteriorParams, ScaleBelief, WeibullShape};
use crate::scalar::Real;
use crate::structure::SystemModel;

pub const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    /// Samples per random stream; batch `i` uses stream `i` of `seed`.
    pub batch_size: usize,
    /// Run batches on the rayon pool. Results do not depend on this flag.
    pub parallel: bool,
}

impl McConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            batch_size: 10_000,
            parallel: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES {
            return Err(Error::param(
                "samples",
                format!("need at least {MIN_SAMPLES}, got {}", self.samples),
            ));
        }
        if self.batch_size == 0 {
            return Err(Error::param("batch size", "must be positive"));
        }
        Ok(())
    }

    fn batches(&self) -> Vec<(u64, usize)> {
        let full = self.samples / self.batch_size;
        let rest = self.samples % self.batch_size;
        let mut out: Vec<(u64, usize)> = (0..full as u64).map(|i| (i, self.batch_size)).collect();
        if rest > 0 {
            out.push((full as u64, rest));
        }
        out
    }

    fn run<A, F>(&self, f: F) -> Result<Vec<A>>
    where
        A: Send,
        F: Fn(&mut ChaCha8Rng, usize) -> Result<A> + Sync,
    {
        let job = |&(stream, n): &(u64, usize)| {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(stream);
            f(&mut rng, n)
        };
        let batches = self.batches();
        if self.parallel {
            batches.par_iter().map(job).collect()
        } else {
            batches.iter().map(job).collect()
        }
    }
}

/// One draw from IG(a, b), as the reciprocal of a Gamma(a, rate b) draw.
pub fn sample_inverse_gamma<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Result<f64> {
    Ok(1.0 / inverse_gamma_sampler(a, b)?.sample(rng))
}

fn inverse_gamma_sampler(a: f64, b: f64) -> Result<Gamma<f64>> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::param("inverse gamma", format!("need a, b > 0, got ({a}, {b})")));
    }
    Gamma::new(a, 1.0 / b).map_err(|e| Error::param("inverse gamma", e.to_string()))
}

/// A Monte Carlo mean with its standard error `sqrt(var / N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

impl McEstimate {
    /// Whether `value` lies within `k` standard errors.
    pub fn agrees(&self, value: f64, k: f64) -> bool {
        (self.estimate - value).abs() <= k * self.std_error
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McCountPmf {
    pub distribution: CountDistribution<f64>,
    pub std_errors: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
}

/// Empirical survivor-count distribution: per draw, λ from the posterior
/// and the count from Binomial(at_risk, exp(-(t^β - t_now^β)/λ)).
pub fn mc_count_pmf(
    shape: WeibullShape<f64>,
    posterior: &PosteriorParams<f64>,
    at_risk: usize,
    t_now: f64,
    t: f64,
    cfg: &McConfig,
) -> Result<McCountPmf> {
    cfg.validate()?;
    if !(t_now >= 0.0) || !(t >= t_now) || !t.is_finite() {
        return Err(Error::param("time", format!("need 0 <= t_now <= t, got t_now = {t_now}, t = {t}")));
    }
    let law = inverse_gamma_sampler(posterior.ig_shape(), posterior.ig_scale())?;
    let delta = shape.pow(t) - shape.pow(t_now);
    let hist = cfg.run(|rng, n| {
        let mut h = vec![0u64; at_risk + 1];
        for _ in 0..n {
            let lambda = 1.0 / law.sample(rng);
            let s = (-delta / lambda).exp();
            let c = Binomial::new(at_risk as u64, s)
                .map_err(|e| Error::param("binomial", e.to_string()))?
                .sample(rng);
            h[c as usize] += 1;
        }
        Ok(h)
    })?;
    let mut counts = vec![0u64; at_risk + 1];
    for h in hist {
        for (c, x) in counts.iter_mut().zip(h) {
            *c += x;
        }
    }
    let n = cfg.samples as f64;
    let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let std_errors = probs.iter().map(|&p| (p * (1.0 - p) / (n - 1.0)).sqrt()).collect();
    Ok(McCountPmf {
        distribution: CountDistribution::from_parts(probs, t, t_now),
        std_errors,
        samples: cfg.samples,
        seed: cfg.seed,
    })
}

/// Simulated system reliability at `t`.
///
/// Each replicate draws λ per type from its posterior, marks a uniformly
/// chosen set of `e_k` instances as already failed (which instances failed
/// is not recorded in the data), lets every other instance survive to `t`
/// with its conditional Weibull probability, and evaluates the structure
/// function on the resulting state.
pub fn mc_system_reliability<T: Real>(
    model: &SystemModel<T>,
    types: &[TypeInput<f64>],
    t: f64,
    cfg: &McConfig,
) -> Result<McEstimate> {
    cfg.validate()?;
    if types.len() != model.num_types() {
        return Err(Error::SignatureMismatch(format!(
            "{} component types supplied, model has {}",
            types.len(),
            model.num_types()
        )));
    }
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); model.num_types()];
    for (i, inst) in model.instances().iter().enumerate() {
        members[inst.type_index].push(i as u32);
    }
    let t_now = types.first().map(|ti| ti.obs.t_now()).unwrap_or(0.0);
    let mut plans = Vec::with_capacity(types.len());
    for (k, ti) in types.iter().enumerate() {
        if ti.obs.n_total() != members[k].len() {
            return Err(Error::SignatureMismatch(format!(
                "type `{}` has {} components in the model but {} in the data",
                model.types()[k].name,
                members[k].len(),
                ti.obs.n_total()
            )));
        }
        if ti.obs.t_now() != t_now {
            return Err(Error::InvalidObservation(format!(
                "all component types must share one t_now ({} vs {})",
                t_now,
                ti.obs.t_now()
            )));
        }
        let post = update_posterior(&ti.prior, ti.shape, &ti.obs);
        plans.push((
            inverse_gamma_sampler(post.ig_shape(), post.ig_scale())?,
            ti.obs.failures(),
            ti.shape.pow(t) - ti.shape.pow(t_now),
        ));
    }
    if !(t >= t_now) || !t.is_finite() {
        return Err(Error::param("time", format!("t = {t} precedes t_now = {t_now}")));
    }
    let sums = cfg.run(|rng, n| {
        let mut order = members.clone();
        let mut working = 0u64;
        for _ in 0..n {
            let mut mask = 0u64;
            for (k, (law, failed, delta)) in plans.iter().enumerate() {
                let s = (-delta * law.sample(rng)).exp();
                let ids = &mut order[k];
                ids.shuffle(rng);
                for &i in &ids[*failed..] {
                    if rng.random::<f64>() < s {
                        mask |= 1 << i;
                    }
                }
            }
            working += model.phi_mask(mask) as u64;
        }
        Ok(working)
    })?;
    let total: u64 = sums.iter().sum();
    let n = cfg.samples as f64;
    let p = total as f64 / n;
    Ok(McEstimate {
        estimate: p,
        std_error: (p * (1.0 - p) / (n - 1.0)).sqrt(),
        samples: cfg.samples,
        seed: cfg.seed,
    })
}
