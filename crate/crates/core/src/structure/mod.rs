//! System layouts as boolean structure functions over typed component
//! instances, and their compilation into survival signatures.
//!
//! A layout is written as a tree of `and` / `or` / `k_of_n` gates over
//! atoms. Each atom names a component instance and its type. An instance
//! may be referenced from several places in the tree (the brake system's
//! master cylinder sits on every actuation path), but it is still a single
//! component: the state space enumerated for the signature has one bit per
//! distinct instance, never one per atom occurrence.

mod coherence;
mod signature;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, StructureError};
use crate::scalar::Real;

pub use coherence::{check_coherence, CoherenceReport, Counterexample};
pub use signature::{compute_survival_signature, signature_lookup, SurvivalSignature};

/// Default cap on the number of component instances (the truth table has 2ⁿ rows).
pub const DEFAULT_ENUMERATION_LIMIT: usize = 24;

/// Hard cap imposed by the 64-bit state encoding and table memory.
pub const MAX_ENUMERATION_LIMIT: usize = 32;

/// One group of exchangeable components.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentTypeDecl<T> {
    pub name: String,
    pub count: usize,
    /// Weibull shape β shared by every component of this type.
    pub shape: T,
}

impl<T: Real> ComponentTypeDecl<T> {
    pub fn new(name: impl Into<String>, count: usize, shape: T) -> Self {
        Self {
            name: name.into(),
            count,
            shape,
        }
    }
}

/// Structure expression tree.
///
/// Serialized with the node kind as the tag, e.g.
/// `{"or": [{"atom": {"id": "C1", "type": "C"}}, ...]}` or
/// `{"k_of_n": {"k": 2, "of": [...]}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StructureExpr {
    Atom {
        id: String,
        #[serde(rename = "type")]
        type_name: String,
    },
    And(Vec<StructureExpr>),
    Or(Vec<StructureExpr>),
    KOfN { k: usize, of: Vec<StructureExpr> },
}

impl StructureExpr {
    pub fn atom(id: impl Into<String>, type_name: impl Into<String>) -> Self {
        StructureExpr::Atom {
            id: id.into(),
            type_name: type_name.into(),
        }
    }

    pub fn and(children: Vec<StructureExpr>) -> Self {
        StructureExpr::And(children)
    }

    pub fn or(children: Vec<StructureExpr>) -> Self {
        StructureExpr::Or(children)
    }

    pub fn k_of_n(k: usize, children: Vec<StructureExpr>) -> Self {
        StructureExpr::KOfN { k, of: children }
    }
}

/// A distinct component in the system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub id: String,
    /// Index into the model's type declarations.
    pub type_index: usize,
}

/// Expression with atoms resolved to instance bit positions.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Node {
    Atom(usize),
    And(Vec<Node>),
    Or(Vec<Node>),
    KOfN(usize, Vec<Node>),
}

impl Node {
    fn eval(&self, state: u64) -> bool {
        match self {
            Node::Atom(i) => state >> i & 1 == 1,
            Node::And(ch) => ch.iter().all(|c| c.eval(state)),
            Node::Or(ch) => ch.iter().any(|c| c.eval(state)),
            Node::KOfN(k, ch) => {
                let mut hits = 0;
                for c in ch {
                    if c.eval(state) {
                        hits += 1;
                        if hits >= *k {
                            return true;
                        }
                    }
                }
                false
            }
        }
    }
}

/// Component states `x ∈ {0,1}ⁿ`, indexed like [`SystemModel::instances`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateVector(Vec<bool>);

impl StateVector {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn all(n: usize, working: bool) -> Self {
        Self(vec![working; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub(crate) fn from_mask(mask: u64, n: usize) -> Self {
        Self((0..n).map(|i| mask >> i & 1 == 1).collect())
    }

    fn to_mask(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0u64, |m, (i, &b)| if b { m | 1 << i } else { m })
    }
}

/// Validated system: ordered type declarations plus a compiled structure.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel<T> {
    types: Vec<ComponentTypeDecl<T>>,
    expr: StructureExpr,
    root: Node,
    instances: Vec<Instance>,
    /// Bit mask of the instances of each type.
    type_masks: Vec<u64>,
    limit: usize,
}

/// Builds a model with the default enumeration limit.
pub fn build_system_model<T: Real>(
    decls: Vec<ComponentTypeDecl<T>>,
    expr: StructureExpr,
) -> Result<SystemModel<T>> {
    SystemModel::with_limit(decls, expr, DEFAULT_ENUMERATION_LIMIT)
}

pub(crate) fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl<T: Real> SystemModel<T> {
    pub fn new(decls: Vec<ComponentTypeDecl<T>>, expr: StructureExpr) -> Result<Self> {
        build_system_model(decls, expr)
    }

    /// Builds and validates a model, allowing at most `limit` instances.
    pub fn with_limit(
        decls: Vec<ComponentTypeDecl<T>>,
        expr: StructureExpr,
        limit: usize,
    ) -> Result<Self> {
        let limit = limit.min(MAX_ENUMERATION_LIMIT);
        let mut by_name = HashMap::new();
        for (k, d) in decls.iter().enumerate() {
            if !is_identifier(&d.name) {
                return Err(StructureError::InvalidIdentifier(d.name.clone()).into());
            }
            if by_name.insert(d.name.as_str(), k).is_some() {
                return Err(StructureError::DuplicateType(d.name.clone()).into());
            }
            if d.count == 0 {
                return Err(StructureError::EmptyType {
                    name: d.name.clone(),
                }
                .into());
            }
            if !(d.shape > T::zero()) || !d.shape.is_finite() {
                return Err(StructureError::InvalidShape {
                    name: d.name.clone(),
                    shape: d.shape.to_string(),
                }
                .into());
            }
        }

        let mut resolver = Resolver {
            by_name: &by_name,
            decls: &decls,
            ids: HashMap::new(),
            instances: Vec::new(),
        };
        let root = resolver.resolve(&expr)?;
        let instances = resolver.instances;

        for (k, d) in decls.iter().enumerate() {
            let found = instances.iter().filter(|i| i.type_index == k).count();
            if found != d.count {
                return Err(StructureError::CountMismatch {
                    name: d.name.clone(),
                    declared: d.count,
                    found,
                }
                .into());
            }
        }
        let n = instances.len();
        if n > limit {
            return Err(StructureError::EnumerationLimit { n, limit }.into());
        }

        let mut type_masks = vec![0u64; decls.len()];
        for (i, inst) in instances.iter().enumerate() {
            type_masks[inst.type_index] |= 1 << i;
        }

        let model = Self {
            types: decls,
            expr,
            root,
            instances,
            type_masks,
            limit,
        };
        if model.phi_mask(0) {
            return Err(StructureError::Boundary("system functions with every component failed").into());
        }
        if !model.phi_mask(model.full_mask()) {
            return Err(StructureError::Boundary("system fails with every component working").into());
        }
        Ok(model)
    }

    pub fn types(&self) -> &[ComponentTypeDecl<T>] {
        &self.types
    }

    pub fn expr(&self) -> &StructureExpr {
        &self.expr
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    /// Number of component types K.
    pub fn num_types(&self) -> usize {
        self.types.len()
    }

    /// Total number of components n = Σ n_k.
    pub fn num_components(&self) -> usize {
        self.instances.len()
    }

    /// Per-type counts (n₁, …, n_K).
    pub fn counts(&self) -> Vec<usize> {
        self.types.iter().map(|d| d.count).collect()
    }

    pub fn enumeration_limit(&self) -> usize {
        self.limit
    }

    pub fn type_index(&self, name: &str) -> Option<usize> {
        self.types.iter().position(|d| d.name == name)
    }

    /// State with exactly the named instances working.
    pub fn state_with_working(&self, ids: &[&str]) -> Result<StateVector> {
        let mut bits = vec![false; self.num_components()];
        for id in ids {
            let i = self
                .instances
                .iter()
                .position(|inst| inst.id == *id)
                .ok_or_else(|| StructureError::UnknownInstance(id.to_string()))?;
            bits[i] = true;
        }
        Ok(StateVector(bits))
    }

    /// Structure function φ(x).
    pub fn evaluate(&self, state: &StateVector) -> Result<bool> {
        if state.len() != self.num_components() {
            return Err(StructureError::StateLength {
                expected: self.num_components(),
                found: state.len(),
            }
            .into());
        }
        Ok(self.phi_mask(state.to_mask()))
    }

    pub(crate) fn phi_mask(&self, state: u64) -> bool {
        self.root.eval(state)
    }

    pub(crate) fn full_mask(&self) -> u64 {
        let n = self.num_components();
        if n == 64 {
            u64::MAX
        } else {
            (1u64 << n) - 1
        }
    }

    /// Working-count vector l for a state.
    pub(crate) fn counts_of(&self, state: u64) -> impl Iterator<Item = usize> + '_ {
        self.type_masks
            .iter()
            .map(move |m| (state & m).count_ones() as usize)
    }
}

/// Free-function form of [`SystemModel::evaluate`].
pub fn evaluate_structure<T: Real>(model: &SystemModel<T>, state: &StateVector) -> Result<bool> {
    model.evaluate(state)
}

struct Resolver<'a, T> {
    by_name: &'a HashMap<&'a str, usize>,
    decls: &'a [ComponentTypeDecl<T>],
    ids: HashMap<String, usize>,
    instances: Vec<Instance>,
}

impl<T> Resolver<'_, T> {
    fn resolve(&mut self, expr: &StructureExpr) -> Result<Node> {
        let gate = |kind: &'static str, ch: &[StructureExpr]| -> Result<()> {
            if ch.is_empty() {
                Err(StructureError::EmptyGate { kind }.into())
            } else {
                Ok(())
            }
        };
        Ok(match expr {
            StructureExpr::Atom { id, type_name } => {
                if !is_identifier(id) {
                    return Err(StructureError::InvalidIdentifier(id.clone()).into());
                }
                let Some(&k) = self.by_name.get(type_name.as_str()) else {
                    return Err(StructureError::UnknownType {
                        instance: id.clone(),
                        type_name: type_name.clone(),
                    }
                    .into());
                };
                if let Some(&i) = self.ids.get(id) {
                    let first = self.instances[i].type_index;
                    if first != k {
                        return Err(StructureError::DuplicateInstance {
                            instance: id.clone(),
                            first: self.decls[first].name.clone(),
                            second: type_name.clone(),
                        }
                        .into());
                    }
                    Node::Atom(i)
                } else {
                    let i = self.instances.len();
                    if i >= MAX_ENUMERATION_LIMIT {
                        return Err(StructureError::EnumerationLimit {
                            n: i + 1,
                            limit: MAX_ENUMERATION_LIMIT,
                        }
                        .into());
                    }
                    self.ids.insert(id.clone(), i);
                    self.instances.push(Instance {
                        id: id.clone(),
                        type_index: k,
                    });
                    Node::Atom(i)
                }
            }
            StructureExpr::And(ch) => {
                gate("and", ch)?;
                Node::And(self.resolve_all(ch)?)
            }
            StructureExpr::Or(ch) => {
                gate("or", ch)?;
                Node::Or(self.resolve_all(ch)?)
            }
            StructureExpr::KOfN { k, of } => {
                gate("k_of_n", of)?;
                if *k == 0 || *k > of.len() {
                    return Err(StructureError::InvalidThreshold {
                        k: *k,
                        children: of.len(),
                    }
                    .into());
                }
                Node::KOfN(*k, self.resolve_all(of)?)
            }
        })
    }

    fn resolve_all(&mut self, ch: &[StructureExpr]) -> Result<Vec<Node>> {
        ch.iter().map(|c| self.resolve(c)).collect()
    }
}

/// Truth table of φ over all 2ⁿ states, one bit per state.
///
/// Filled in parallel over 64-state words; the result does not depend on
/// how the work is split.
pub(crate) fn truth_table<T: Real>(model: &SystemModel<T>) -> Vec<u64> {
    use rayon::prelude::*;
    let n = model.num_components();
    let states = 1u64 << n;
    let words = states.div_ceil(64) as usize;
    (0..words)
        .into_par_iter()
        .map(|w| {
            let base = (w as u64) * 64;
            let mut word = 0u64;
            for b in 0..64u64 {
                let s = base + b;
                if s < states && model.phi_mask(s) {
                    word |= 1 << b;
                }
            }
            word
        })
        .collect()
}

#[inline]
pub(crate) fn table_bit(table: &[u64], state: u64) -> bool {
    table[(state / 64) as usize] >> (state % 64) & 1 == 1
}

/// The simplified automotive brake system used throughout the tests.
///
/// The master cylinder M feeds four wheel cylinders C1..C4, each actuating
/// its pad assembly P1..P4; the hand brake H acts on P3 and P4 directly.
/// The system brakes if at least one pad assembly is actuated.
#[cfg(test)]
pub(crate) fn brake_system() -> SystemModel<f64> {
    use StructureExpr as E;
    let path = |c: &str, p: &str| E::and(vec![E::atom("M", "M"), E::atom(c, "C"), E::atom(p, "P")]);
    let hand = |c: &str, p: &str| {
        E::and(vec![
            E::or(vec![
                E::and(vec![E::atom("M", "M"), E::atom(c, "C")]),
                E::atom("H", "H"),
            ]),
            E::atom(p, "P"),
        ])
    };
    build_system_model(
        vec![
            ComponentTypeDecl::new("M", 1, 2.5),
            ComponentTypeDecl::new("H", 1, 1.2),
            ComponentTypeDecl::new("C", 4, 2.0),
            ComponentTypeDecl::new("P", 4, 1.5),
        ],
        E::or(vec![
            path("C1", "P1"),
            path("C2", "P2"),
            hand("C3", "P3"),
            hand("C4", "P4"),
        ]),
    )
    .expect("brake system is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use StructureExpr as E;

    fn decl(name: &str, count: usize) -> ComponentTypeDecl<f64> {
        ComponentTypeDecl::new(name, count, 1.0)
    }

    #[test]
    fn brake_system_shape() {
        let m = brake_system();
        assert_eq!(m.num_types(), 4);
        assert_eq!(m.num_components(), 10);
        assert_eq!(m.counts(), vec![1, 1, 4, 4]);
    }

    #[test]
    fn brake_system_evaluation() {
        let m = brake_system();
        assert!(m.evaluate(&StateVector::all(10, true)).unwrap());
        assert!(!m.evaluate(&StateVector::all(10, false)).unwrap());
        let s = m.state_with_working(&["M", "C1", "P1"]).unwrap();
        assert!(m.evaluate(&s).unwrap());
        let s = m.state_with_working(&["M", "C1", "P2"]).unwrap();
        assert!(!m.evaluate(&s).unwrap());
        let s = m.state_with_working(&["H", "P4"]).unwrap();
        assert!(m.evaluate(&s).unwrap());
        let s = m.state_with_working(&["H", "C1", "P1"]).unwrap();
        assert!(!m.evaluate(&s).unwrap());
    }

    #[test]
    fn single_atom_is_identity() {
        let m = build_system_model(vec![decl("A", 1)], E::atom("a", "A")).unwrap();
        assert!(m.evaluate(&StateVector::new(vec![true])).unwrap());
        assert!(!m.evaluate(&StateVector::new(vec![false])).unwrap());
    }

    #[test]
    fn empty_gate_rejected() {
        let err = build_system_model(vec![decl("A", 1)], E::and(vec![])).unwrap_err();
        assert!(matches!(
            err,
            crate::Error::Structure(StructureError::EmptyGate { kind: "and" })
        ));
    }

    #[test]
    fn threshold_must_fit_children() {
        let ch = vec![E::atom("a", "A"), E::atom("b", "A")];
        let err = build_system_model(vec![decl("A", 2)], E::k_of_n(3, ch.clone())).unwrap_err();
        assert!(matches!(
            err,
            crate::Error::Structure(StructureError::InvalidThreshold { k: 3, children: 2 })
        ));
        assert!(build_system_model(vec![decl("A", 2)], E::k_of_n(0, ch)).is_err());
    }

    #[test]
    fn unknown_type_rejected() {
        let err = build_system_model(vec![decl("A", 1)], E::atom("a", "B")).unwrap_err();
        assert!(matches!(
            err,
            crate::Error::Structure(StructureError::UnknownType { .. })
        ));
    }

    #[test]
    fn instance_with_two_types_rejected() {
        let err = build_system_model(
            vec![decl("A", 1), decl("B", 1)],
            E::or(vec![E::atom("x", "A"), E::atom("x", "B")]),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            crate::Error::Structure(StructureError::DuplicateInstance { .. })
        ));
    }

    #[test]
    fn repeated_reference_is_one_component() {
        let m = build_system_model(
            vec![decl("A", 2)],
            E::or(vec![
                E::and(vec![E::atom("x", "A"), E::atom("y", "A")]),
                E::atom("x", "A"),
            ]),
        )
        .unwrap();
        assert_eq!(m.num_components(), 2);
    }

    #[test]
    fn count_mismatch_rejected() {
        let err = build_system_model(vec![decl("A", 3)], E::atom("a", "A")).unwrap_err();
        assert!(matches!(
            err,
            crate::Error::Structure(StructureError::CountMismatch { declared: 3, found: 1, .. })
        ));
    }

    #[test]
    fn duplicate_type_rejected() {
        let err = build_system_model(vec![decl("A", 1), decl("A", 1)], E::atom("a", "A")).unwrap_err();
        assert!(matches!(
            err,
            crate::Error::Structure(StructureError::DuplicateType(_))
        ));
    }

    #[test]
    fn enumeration_limit_enforced() {
        let atoms: Vec<_> = (0..6).map(|i| E::atom(format!("a{i}"), "A")).collect();
        let err = SystemModel::with_limit(vec![decl("A", 6)], E::or(atoms), 5).unwrap_err();
        assert!(matches!(
            err,
            crate::Error::Structure(StructureError::EnumerationLimit { n: 6, limit: 5 })
        ));
    }

    #[test]
    fn state_length_checked() {
        let m = brake_system();
        assert!(m.evaluate(&StateVector::all(9, true)).is_err());
    }

    #[test]
    fn k_of_n_counts_children() {
        let ch: Vec<_> = (0..3).map(|i| E::atom(format!("a{i}"), "A")).collect();
        let m = build_system_model(vec![decl("A", 3)], E::k_of_n(2, ch)).unwrap();
        for mask in 0u64..8 {
            let want = mask.count_ones() >= 2;
            assert_eq!(m.evaluate(&StateVector::from_mask(mask, 3)).unwrap(), want);
        }
    }

    #[test]
    fn truth_table_matches_direct_evaluation() {
        let m = brake_system();
        let table = truth_table(&m);
        for s in 0..1u64 << 10 {
            assert_eq!(table_bit(&table, s), m.phi_mask(s));
        }
    }

    #[test]
    fn expr_serde_shape() {
        let e = E::k_of_n(1, vec![E::atom("a", "A")]);
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(json, r#"{"k_of_n":{"k":1,"of":[{"atom":{"id":"a","type":"A"}}]}}"#);
        let back: StructureExpr = serde_json::from_str(&json).unwrap();
        assert_eq!(back, e);
        assert!(serde_json::from_str::<StructureExpr>(r#"{"xor":[]}"#).is_err());
    }
}
