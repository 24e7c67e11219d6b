use super::count::alternating_pmf;
use crate::error::{Error, Result};
use crate::lifetime::{ObservationSet, PriorBox, PriorParams, WeibullShape};
use crate::scalar::Real;
use crate::structure::SurvivalSignature;

/// One component type with a fixed prior.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeInput<T> {
    pub shape: WeibullShape<T>,
    pub prior: PriorParams<T>,
    pub obs: ObservationSet<T>,
}

/// One component type with a set of priors.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeSetup<T> {
    pub shape: WeibullShape<T>,
    pub prior_box: PriorBox<T>,
    pub obs: ObservationSet<T>,
}

impl<T: Real> TypeSetup<T> {
    /// Fixes the prior at `p`, keeping shape and data.
    pub fn with_prior(&self, p: PriorParams<T>) -> TypeInput<T> {
        TypeInput {
            shape: self.shape,
            prior: p,
            obs: self.obs.clone(),
        }
    }
}

/// Checks that the per-type data fit the signature and share one `t_now`.
pub(crate) fn shared_t_now<'a, T: Real>(
    sig: &SurvivalSignature,
    obs: impl ExactSizeIterator<Item = &'a ObservationSet<T>>,
) -> Result<T> {
    if obs.len() != sig.num_types() {
        return Err(Error::SignatureMismatch(format!(
            "{} component types supplied, signature has {}",
            obs.len(),
            sig.num_types()
        )));
    }
    let mut t_now = None;
    for (k, o) in obs.enumerate() {
        let nk = sig.counts()[k];
        if o.n_total() != nk {
            return Err(Error::SignatureMismatch(format!(
                "type `{}` has {} components in the signature but {} in the data",
                sig.type_names()[k],
                nk,
                o.n_total()
            )));
        }
        match t_now {
            None => t_now = Some(o.t_now()),
            Some(t0) if t0 != o.t_now() => {
                return Err(Error::InvalidObservation(format!(
                    "all component types must share one t_now ({} vs {})",
                    t0,
                    o.t_now()
                )))
            }
            _ => {}
        }
    }
    Ok(t_now.unwrap_or_else(T::zero))
}

#[derive(Debug, Clone)]
struct TypeState<T> {
    at_risk: usize,
    failures: T,
    /// (n_total - e)·t_now^β + Σ t_i^β
    data_weight: T,
    delta: T,
}

/// System reliability at a fixed `t` as a function of the per-type prior
/// parameters, with the data folded in once.
///
/// Only signature cells with Φ > 0 and l_k ≤ n_k − e_k are kept.
#[derive(Debug, Clone)]
pub(crate) struct SystemObjective<T> {
    terms: Vec<(Vec<usize>, T)>,
    types: Vec<TypeState<T>>,
}

impl<T: Real> SystemObjective<T> {
    pub fn new<'a>(
        sig: &SurvivalSignature,
        types: impl ExactSizeIterator<Item = (WeibullShape<T>, &'a ObservationSet<T>)> + Clone,
        t: T,
    ) -> Result<Self> {
        let t_now = shared_t_now(sig, types.clone().map(|(_, o)| o))?;
        if !(t >= t_now) || !t.is_finite() {
            return Err(Error::param("time", format!("t = {t} precedes t_now = {t_now}")));
        }
        let states: Vec<TypeState<T>> = types
            .map(|(shape, o)| {
                let tau: T = o.failure_times().iter().map(|&x| shape.pow(x)).sum();
                TypeState {
                    at_risk: o.at_risk(),
                    failures: T::lit(o.failures() as f64),
                    data_weight: tau + T::lit(o.at_risk() as f64) * shape.pow(t_now),
                    delta: shape.pow(t) - shape.pow(t_now),
                }
            })
            .collect();
        let terms = (0..sig.len())
            .filter_map(|i| {
                let l = sig.multi_index(i);
                let phi: T = sig.value_at(i);
                let fits = l.iter().zip(&states).all(|(&lk, s)| lk <= s.at_risk);
                (fits && phi > T::zero()).then_some((l, phi))
            })
            .collect();
        Ok(Self { terms, types: states })
    }

    /// R(t | n0, y0).
    pub fn eval(&self, n0: &[T], y0: &[T]) -> Result<T> {
        let pmfs = self
            .types
            .iter()
            .zip(n0.iter().zip(y0))
            .map(|(s, (&n, &y))| alternating_pmf(s.at_risk, n + s.failures, n * y + s.data_weight, s.delta))
            .collect::<Result<Vec<_>>>()?;
        let r: T = self
            .terms
            .iter()
            .map(|(l, phi)| {
                l.iter()
                    .zip(&pmfs)
                    .fold(*phi, |acc, (&lk, p)| acc * p[lk])
            })
            .sum();
        Ok(r.max(T::zero()).min(T::one()))
    }
}

/// System reliability R(t) for fixed priors:
/// `Σ_l Φ(l) Π_k P(C_k = l_k)` over `l_k ≤ n_k − e_k`, skipping Φ = 0.
pub fn system_reliability_point<T: Real>(
    sig: &SurvivalSignature,
    types: &[TypeInput<T>],
    t: T,
) -> Result<T> {
    let obj = SystemObjective::new(sig, types.iter().map(|ti| (ti.shape, &ti.obs)), t)?;
    let n0: Vec<T> = types.iter().map(|ti| ti.prior.n0()).collect();
    let y0: Vec<T> = types.iter().map(|ti| ti.prior.y0()).collect();
    obj.eval(&n0, &y0)
}
