//! JSON documents for systems, observations and what-if scenarios, and CSV
//! export of the results.

mod csv;

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bounds::{reliability_bounds_curve, TypeSetup};
use crate::error::{Error, Result};
use crate::lifetime::{elicit_y0_interval, ObservationSet, PriorBox, WeibullShape};
use crate::structure::{ComponentTypeDecl, StructureExpr, SurvivalSignature, SystemModel};

pub use self::csv::{
    emit_curve_csv, format_number, write_bounds_csv, write_imprecision_csv, write_signature_csv, write_what_if_csv,
    CsvExport, WhatIfRow,
};

/// The brake system used throughout the examples.
pub const BRAKE_SYSTEM: &str = include_str!("../../data/brake_system.json");
/// Failures as expected, observed until t_now = 8.
pub const CASE1: &str = include_str!("../../data/case1.json");
/// Surprisingly early failures, observed until t_now = 2.
pub const CASE2: &str = include_str!("../../data/case2.json");
/// Surprisingly late failures, observed until t_now = 12.
pub const CASE3: &str = include_str!("../../data/case3.json");
/// A few hypothetical data sets for the brake system.
pub const WHAT_IF: &str = include_str!("../../data/what_if.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDoc {
    pub types: Vec<TypeDoc>,
    pub structure: StructureExpr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeDoc {
    pub name: String,
    pub count: usize,
    /// Weibull shape β.
    pub shape: f64,
    pub prior: PriorDoc,
}

/// Prior box for one type. Give exactly one of `y0` or `mean_lifetime`;
/// the latter is mapped to y0 bounds through the Weibull mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorDoc {
    pub n0: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_lifetime: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationsDoc {
    pub t_now: f64,
    /// Failure times per type name; types not listed had no failures.
    #[serde(default)]
    pub failures: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    /// Times after each scenario's `t_now` at which to report the bounds.
    pub prospective: Vec<f64>,
    pub scenarios: Vec<NamedObservations>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedObservations {
    pub name: String,
    pub t_now: f64,
    #[serde(default)]
    pub failures: BTreeMap<String, Vec<f64>>,
}

/// A parsed and validated system document.
#[derive(Debug, Clone)]
pub struct SystemDefinition {
    pub model: SystemModel<f64>,
    pub boxes: Vec<PriorBox<f64>>,
    priors: Vec<PriorDoc>,
}

impl SystemDefinition {
    pub fn shapes(&self) -> Vec<WeibullShape<f64>> {
        self.model
            .types()
            .iter()
            .map(|d| WeibullShape::new(d.shape).expect("validated when parsed"))
            .collect()
    }

    /// Per-type optimizer inputs for the given data (one set per type, in
    /// declaration order).
    pub fn setups(&self, obs: Vec<ObservationSet<f64>>) -> Result<Vec<TypeSetup<f64>>> {
        if obs.len() != self.boxes.len() {
            return Err(Error::SignatureMismatch(format!(
                "{} observation sets for {} component types",
                obs.len(),
                self.boxes.len()
            )));
        }
        Ok(self
            .shapes()
            .into_iter()
            .zip(&self.boxes)
            .zip(obs)
            .map(|((shape, b), o)| TypeSetup {
                shape,
                prior_box: *b,
                obs: o,
            })
            .collect())
    }

    /// Inputs for a system observed from new: no failures, `t_now = 0`.
    pub fn prior_setups(&self) -> Vec<TypeSetup<f64>> {
        let fresh = self.model.types().iter().map(|d| ObservationSet::none(d.count)).collect();
        self.setups(fresh).expect("one set per type")
    }

    pub fn to_doc(&self) -> SystemDoc {
        SystemDoc {
            types: self
                .model
                .types()
                .iter()
                .zip(&self.priors)
                .map(|(d, p)| TypeDoc {
                    name: d.name.clone(),
                    count: d.count,
                    shape: d.shape,
                    prior: p.clone(),
                })
                .collect(),
            structure: self.model.expr().clone(),
        }
    }
}

fn from_json<D: DeserializeOwned>(bytes: &[u8]) -> Result<D> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let value = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Document(if path.is_empty() || path == "." {
            inner.to_string()
        } else {
            format!("at `{path}`: {inner}")
        })
    })?;
    Ok(value)
}

fn prior_box(t: &TypeDoc) -> Result<PriorBox<f64>> {
    let shape = WeibullShape::new(t.shape)?;
    let y0 = match (&t.prior.y0, &t.prior.mean_lifetime) {
        (Some(y), None) => (y[0], y[1]),
        (None, Some(m)) => elicit_y0_interval(shape, m[0], m[1])?,
        _ => {
            return Err(Error::Document(format!(
                "type `{}`: prior needs exactly one of `y0` or `mean_lifetime`",
                t.name
            )))
        }
    };
    PriorBox::new((t.prior.n0[0], t.prior.n0[1]), y0)
}

/// Parses and validates a system document.
pub fn parse_system_doc(bytes: &[u8]) -> Result<SystemDefinition> {
    let doc: SystemDoc = from_json(bytes)?;
    system_from_doc(doc)
}

pub fn system_from_doc(doc: SystemDoc) -> Result<SystemDefinition> {
    let mut boxes = Vec::with_capacity(doc.types.len());
    for t in &doc.types {
        boxes.push(prior_box(t).map_err(|e| match e {
            Error::Document(_) => e,
            other => Error::Document(format!("type `{}`: {other}", t.name)),
        })?);
    }
    let decls = doc
        .types
        .iter()
        .map(|t| ComponentTypeDecl::new(t.name.clone(), t.count, t.shape))
        .collect();
    let model = SystemModel::new(decls, doc.structure)?;
    Ok(SystemDefinition {
        model,
        boxes,
        priors: doc.types.into_iter().map(|t| t.prior).collect(),
    })
}

pub fn system_doc_to_json(doc: &SystemDoc) -> String {
    serde_json::to_string_pretty(doc).expect("documents always serialize")
}

fn observation_sets(
    t_now: f64,
    failures: &BTreeMap<String, Vec<f64>>,
    model: &SystemModel<f64>,
) -> Result<Vec<ObservationSet<f64>>> {
    if let Some(name) = failures.keys().find(|n| model.type_index(n).is_none()) {
        return Err(Error::InvalidObservation(format!("unknown component type `{name}`")));
    }
    model
        .types()
        .iter()
        .map(|d| {
            let times = failures.get(&d.name).cloned().unwrap_or_default();
            ObservationSet::new(times, t_now, d.count).map_err(|e| match e {
                Error::InvalidObservation(msg) => Error::InvalidObservation(format!("type `{}`: {msg}", d.name)),
                other => other,
            })
        })
        .collect()
}

/// Per-type observation sets in the model's type order.
pub fn parse_observations_doc(bytes: &[u8], model: &SystemModel<f64>) -> Result<Vec<ObservationSet<f64>>> {
    let doc: ObservationsDoc = from_json(bytes)?;
    observation_sets(doc.t_now, &doc.failures, model)
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub obs: Vec<ObservationSet<f64>>,
}

#[derive(Debug, Clone)]
pub struct ScenarioSet {
    pub prospective: Vec<f64>,
    pub scenarios: Vec<Scenario>,
}

pub fn parse_scenario_doc(bytes: &[u8], model: &SystemModel<f64>) -> Result<ScenarioSet> {
    let doc: ScenarioDoc = from_json(bytes)?;
    if doc.prospective.is_empty() {
        return Err(Error::Document("`prospective` must list at least one time".into()));
    }
    if doc.prospective.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(Error::Document("`prospective` times must be finite and >= 0".into()));
    }
    if doc.prospective.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Document("`prospective` times must be strictly ascending".into()));
    }
    let scenarios = doc
        .scenarios
        .iter()
        .map(|s| {
            Ok(Scenario {
                name: s.name.clone(),
                obs: observation_sets(s.t_now, &s.failures, model)
                    .map_err(|e| Error::InvalidObservation(format!("scenario `{}`: {e}", s.name)))?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ScenarioSet {
        prospective: doc.prospective,
        scenarios,
    })
}

/// Bounds at each scenario's `t_now` plus every prospective time.
pub fn what_if_bounds(
    def: &SystemDefinition,
    sig: &SurvivalSignature,
    set: &ScenarioSet,
    normalize: bool,
) -> Result<Vec<WhatIfRow>> {
    let mut rows = Vec::new();
    for s in &set.scenarios {
        let t_now = s.obs.first().map(|o| o.t_now()).unwrap_or(0.0);
        let grid: Vec<f64> = set.prospective.iter().map(|d| t_now + d).collect();
        let curve = reliability_bounds_curve(sig, &def.setups(s.obs.clone())?, &grid, normalize)?;
        rows.extend(curve.points.iter().zip(&set.prospective).map(|(p, &d)| WhatIfRow {
            scenario: s.name.clone(),
            t_now,
            t_prospective: d,
            lower: p.lower,
            upper: p.upper,
        }));
    }
    Ok(rows)
}
