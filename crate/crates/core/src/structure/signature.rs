use num_rational::Ratio;
use rayon::prelude::*;

use super::SystemModel;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::choose;

/// Survival signature Φ(l₁, …, l_K): probability that the system works
/// given exactly l_k working components of each type k.
///
/// Values are exact fractions; [`SurvivalSignature::probability`] renders
/// them in the working scalar type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurvivalSignature {
    type_names: Vec<String>,
    counts: Vec<usize>,
    /// Working-state count per bucket, row-major with the last type fastest.
    working: Vec<u64>,
    values: Vec<Ratio<u64>>,
}

impl SurvivalSignature {
    pub fn type_names(&self) -> &[String] {
        &self.type_names
    }

    /// (n₁, …, n_K).
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn num_types(&self) -> usize {
        self.counts.len()
    }

    /// Number of table cells, Π (n_k + 1).
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn index_of(&self, l: &[usize]) -> Option<usize> {
        if l.len() != self.counts.len() {
            return None;
        }
        let mut idx = 0;
        for (&lk, &nk) in l.iter().zip(&self.counts) {
            if lk > nk {
                return None;
            }
            idx = idx * (nk + 1) + lk;
        }
        Some(idx)
    }

    pub(crate) fn index_unchecked(&self, l: &[usize]) -> usize {
        l.iter()
            .zip(&self.counts)
            .fold(0, |idx, (&lk, &nk)| idx * (nk + 1) + lk)
    }

    /// Count vector of a flat table index.
    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut l = vec![0; self.counts.len()];
        for k in (0..self.counts.len()).rev() {
            let d = self.counts[k] + 1;
            l[k] = idx % d;
            idx /= d;
        }
        l
    }

    fn out_of_range(&self, l: &[i64]) -> Error {
        Error::IndexOutOfRange {
            index: l.to_vec(),
            bounds: self.counts.clone(),
        }
    }

    /// Exact value Φ(l).
    pub fn exact(&self, l: &[usize]) -> Result<Ratio<u64>> {
        self.index_of(l)
            .map(|i| self.values[i])
            .ok_or_else(|| self.out_of_range(&l.iter().map(|&x| x as i64).collect::<Vec<_>>()))
    }

    /// Φ(l) in the scalar type. Negative coordinates are out of range.
    pub fn probability<T: Real>(&self, l: &[i64]) -> Result<T> {
        if l.iter().any(|&x| x < 0) {
            return Err(self.out_of_range(l));
        }
        let lu: Vec<usize> = l.iter().map(|&x| x as usize).collect();
        let idx = self.index_of(&lu).ok_or_else(|| self.out_of_range(l))?;
        Ok(ratio_to::<T>(self.values[idx]))
    }

    pub(crate) fn value_at<T: Real>(&self, idx: usize) -> T {
        ratio_to(self.values[idx])
    }

    /// Number of working states in bucket l (the numerator of Φ(l)).
    pub fn working_states(&self, l: &[usize]) -> Result<u64> {
        self.index_of(l)
            .map(|i| self.working[i])
            .ok_or_else(|| self.out_of_range(&l.iter().map(|&x| x as i64).collect::<Vec<_>>()))
    }

    /// Iterates over all cells as (l, Φ(l)).
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, Ratio<u64>)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.multi_index(i), v))
    }

    /// True if Φ never decreases when one coordinate is incremented.
    pub fn is_monotone(&self) -> bool {
        (0..self.len()).all(|i| {
            let l = self.multi_index(i);
            (0..l.len()).all(|k| {
                if l[k] == self.counts[k] {
                    return true;
                }
                let mut up = l.clone();
                up[k] += 1;
                self.values[self.index_unchecked(&up)] >= self.values[i]
            })
        })
    }
}

/// Signature lookup as a free function.
pub fn signature_lookup<T: Real>(sig: &SurvivalSignature, l: &[i64]) -> Result<T> {
    sig.probability(l)
}

fn ratio_to<T: Real>(r: Ratio<u64>) -> T {
    T::lit(*r.numer() as f64) / T::lit(*r.denom() as f64)
}

/// Compiles the survival signature with a single pass over all 2ⁿ states.
///
/// Each working state is bucketed by its per-type working counts; bucket l
/// then holds Φ(l)·Π C(n_k, l_k) states. The pass is split across threads
/// by state range and merged with integer addition, so the table is
/// identical however the work is partitioned.
pub fn compute_survival_signature<T: Real>(model: &SystemModel<T>) -> Result<SurvivalSignature> {
    let n = model.num_components();
    if n > model.enumeration_limit() {
        return Err(crate::error::StructureError::EnumerationLimit {
            n,
            limit: model.enumeration_limit(),
        }
        .into());
    }
    let counts = model.counts();
    let cells: usize = counts.iter().map(|c| c + 1).product();
    let bucket = |state: u64| -> usize {
        model
            .counts_of(state)
            .zip(&counts)
            .fold(0, |idx, (lk, &nk)| idx * (nk + 1) + lk)
    };

    const CHUNK: u64 = 1 << 12;
    let states = 1u64 << n;
    let chunks = states.div_ceil(CHUNK);
    let (working, seen) = (0..chunks)
        .into_par_iter()
        .fold(
            || (vec![0u64; cells], vec![0u64; cells]),
            |(mut w, mut s), c| {
                let end = ((c + 1) * CHUNK).min(states);
                for state in c * CHUNK..end {
                    let b = bucket(state);
                    s[b] += 1;
                    if model.phi_mask(state) {
                        w[b] += 1;
                    }
                }
                (w, s)
            },
        )
        .reduce(
            || (vec![0u64; cells], vec![0u64; cells]),
            |(mut w1, mut s1), (w2, s2)| {
                w1.iter_mut().zip(&w2).for_each(|(a, b)| *a += b);
                s1.iter_mut().zip(&s2).for_each(|(a, b)| *a += b);
                (w1, s1)
            },
        );

    let mut sig = SurvivalSignature {
        type_names: model.types().iter().map(|d| d.name.clone()).collect(),
        counts,
        working,
        values: Vec::new(),
    };
    sig.values = (0..cells)
        .map(|i| {
            let l = sig.multi_index(i);
            let denom: u64 = l
                .iter()
                .zip(&sig.counts)
                .map(|(&lk, &nk)| choose(nk as u64, lk as u64))
                .product();
            debug_assert_eq!(seen[i], denom, "bucket {l:?} population");
            Ratio::new(sig.working[i], denom)
        })
        .collect();
    Ok(sig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{brake_system, build_system_model, ComponentTypeDecl, StructureExpr as E};

    /// Independent route: for each l, enumerate the ways of choosing l_k
    /// working instances of each type and evaluate φ on each choice.
    fn signature_by_combinations(model: &SystemModel<f64>) -> Vec<(Vec<usize>, Ratio<u64>)> {
        fn subsets(items: &[usize], k: usize) -> Vec<u64> {
            if k == 0 {
                return vec![0];
            }
            if items.len() < k {
                return vec![];
            }
            let (first, rest) = (items[0], &items[1..]);
            let mut out: Vec<u64> = subsets(rest, k - 1)
                .into_iter()
                .map(|m| m | 1 << first)
                .collect();
            out.extend(subsets(rest, k));
            out
        }
        let per_type: Vec<Vec<usize>> = (0..model.num_types())
            .map(|k| {
                model
                    .instances()
                    .iter()
                    .enumerate()
                    .filter(|(_, inst)| inst.type_index == k)
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        let mut out = Vec::new();
        let mut l = vec![0usize; model.num_types()];
        loop {
            let mut masks = vec![0u64];
            for (k, items) in per_type.iter().enumerate() {
                let subs = subsets(items, l[k]);
                masks = masks
                    .iter()
                    .flat_map(|m| subs.iter().map(move |s| m | s))
                    .collect();
            }
            let good = masks.iter().filter(|&&m| model.phi_mask(m)).count() as u64;
            out.push((l.clone(), Ratio::new(good, masks.len() as u64)));
            // odometer
            let mut k = l.len();
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                if l[k] < per_type[k].len() {
                    l[k] += 1;
                    break;
                }
                l[k] = 0;
            }
        }
    }

    #[test]
    fn bucketing_matches_combination_enumeration() {
        let m = brake_system();
        let sig = compute_survival_signature(&m).unwrap();
        for (l, want) in signature_by_combinations(&m) {
            assert_eq!(sig.exact(&l).unwrap(), want, "Φ{l:?}");
        }
    }

    #[test]
    fn brake_system_nontrivial_values() {
        // Frozen from the combination-enumeration oracle above.
        let want: &[([usize; 4], (u64, u64))] = &[
            ([0, 1, 0, 1], (1, 2)),
            ([0, 1, 0, 2], (5, 6)),
            ([0, 1, 1, 1], (1, 2)),
            ([0, 1, 1, 2], (5, 6)),
            ([0, 1, 2, 1], (1, 2)),
            ([0, 1, 2, 2], (5, 6)),
            ([0, 1, 3, 1], (1, 2)),
            ([0, 1, 3, 2], (5, 6)),
            ([0, 1, 4, 1], (1, 2)),
            ([0, 1, 4, 2], (5, 6)),
            ([1, 0, 1, 1], (1, 4)),
            ([1, 0, 1, 2], (1, 2)),
            ([1, 0, 1, 3], (3, 4)),
            ([1, 0, 2, 1], (1, 2)),
            ([1, 0, 2, 2], (5, 6)),
            ([1, 0, 3, 1], (3, 4)),
            ([1, 1, 0, 1], (1, 2)),
            ([1, 1, 0, 2], (5, 6)),
            ([1, 1, 1, 1], (5, 8)),
            ([1, 1, 1, 2], (11, 12)),
            ([1, 1, 2, 1], (3, 4)),
            ([1, 1, 2, 2], (35, 36)),
            ([1, 1, 3, 1], (7, 8)),
        ];
        let sig = compute_survival_signature(&brake_system()).unwrap();
        let nontrivial: Vec<_> = sig
            .iter()
            .filter(|(_, v)| *v != Ratio::from_integer(0) && *v != Ratio::from_integer(1))
            .collect();
        assert_eq!(nontrivial.len(), want.len());
        for (l, (a, b)) in want {
            assert_eq!(sig.exact(l).unwrap(), Ratio::new(*a, *b), "Φ{l:?}");
        }
    }

    #[test]
    fn lookup_boundaries() {
        let sig = compute_survival_signature(&brake_system()).unwrap();
        assert_eq!(sig.probability::<f64>(&[0, 0, 0, 0]).unwrap(), 0.0);
        assert_eq!(sig.probability::<f64>(&[1, 1, 4, 4]).unwrap(), 1.0);
        assert_eq!(signature_lookup::<f64>(&sig, &[1, 0, 2, 1]).unwrap(), 0.5);
        assert!((sig.probability::<f64>(&[1, 1, 2, 2]).unwrap() - 35.0 / 36.0).abs() < 1e-15);
        assert!(sig.probability::<f64>(&[2, 0, 0, 0]).is_err());
        assert!(sig.probability::<f64>(&[-1, 0, 0, 0]).is_err());
        assert!(sig.probability::<f64>(&[1, 1, 4]).is_err());
        assert!(sig.is_monotone());
    }

    #[test]
    fn bucket_totals_partition_state_space() {
        let sig = compute_survival_signature(&brake_system()).unwrap();
        let total: u64 = (0..sig.len())
            .map(|i| {
                let l = sig.multi_index(i);
                l.iter()
                    .zip(sig.counts())
                    .map(|(&lk, &nk)| choose(nk as u64, lk as u64))
                    .product::<u64>()
            })
            .sum();
        assert_eq!(total, 1 << 10);
    }

    #[test]
    fn series_and_parallel_signatures() {
        for m in 1..=6usize {
            let atoms: Vec<_> = (0..m).map(|i| E::atom(format!("a{i}"), "A")).collect();
            let decl = vec![ComponentTypeDecl::new("A", m, 1.0)];
            let series = compute_survival_signature(
                &build_system_model(decl.clone(), E::and(atoms.clone())).unwrap(),
            )
            .unwrap();
            let parallel =
                compute_survival_signature(&build_system_model(decl, E::or(atoms)).unwrap()).unwrap();
            for l in 0..=m {
                let s: f64 = series.probability(&[l as i64]).unwrap();
                let p: f64 = parallel.probability(&[l as i64]).unwrap();
                assert_eq!(s, if l == m { 1.0 } else { 0.0 });
                assert_eq!(p, if l >= 1 { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn k_of_n_signature_is_step() {
        let atoms: Vec<_> = (0..5).map(|i| E::atom(format!("a{i}"), "A")).collect();
        let m = build_system_model(vec![ComponentTypeDecl::new("A", 5, 1.0)], E::k_of_n(3, atoms)).unwrap();
        let sig = compute_survival_signature(&m).unwrap();
        for l in 0..=5i64 {
            assert_eq!(sig.probability::<f64>(&[l]).unwrap(), if l >= 3 { 1.0 } else { 0.0 });
        }
    }
}
