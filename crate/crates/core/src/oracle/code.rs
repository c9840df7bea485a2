//! CSS class structure of a small chain complex.
//!
//! Errors live in `C1`; two errors are equivalent when they differ by an
//! element of `im d2`. Enumerating all `2^|B1|` errors once yields, for
//! every class, its weight enumerator, from which class probabilities at
//! any `p` follow in closed form.

use super::partition::{check_enumerable, exact_partition, log_sum_exp};
use crate::complex::ChainComplex;
use crate::error::{Error, Result};
use crate::gf2::{EchelonBasis, Gf2Vec};
use crate::models::{compile_model, CouplingModel, DisorderConfig, ModelKind};
use std::collections::BTreeMap;

/// Largest number of classes tabulated.
pub const MAX_CLASSES: usize = 1 << 20;

/// One equivalence class `eps + im d2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorClass {
    /// `weights[w]`: members of Hamming weight `w`.
    pub weights: Vec<u64>,
    /// Lowest-weight member, ties broken by the smallest bit pattern.
    pub representative: Gf2Vec,
    pub syndrome: Gf2Vec,
}

#[derive(Clone, Debug)]
pub struct SmallCSSCode {
    name: String,
    chain: ChainComplex,
    image: EchelonBasis,
    // Class index of each unit error; class indices are linear in the error.
    unit_index: Vec<usize>,
    classes: Vec<ErrorClass>,
    homology: Vec<Gf2Vec>,
    // Classes sharing a syndrome, keyed by syndrome.
    sectors: BTreeMap<Gf2Vec, Vec<usize>>,
}

impl SmallCSSCode {
    pub fn new(name: impl Into<String>, chain: ChainComplex) -> Result<Self> {
        let n = chain.dim1();
        check_enumerable(n)?;
        let d2 = chain.boundary2();
        let mut image = EchelonBasis::new(n);
        for c in 0..d2.cols() {
            image.insert(d2.column_vec(c));
        }
        let pivots = image.pivots();
        let free: Vec<usize> = (0..n).filter(|i| !pivots.contains(i)).collect();
        let num_classes = 1usize << free.len();
        if num_classes > MAX_CLASSES {
            return Err(Error::TooLarge(format!(
                "{num_classes} error classes exceed {MAX_CLASSES}"
            )));
        }
        let compress = |v: &Gf2Vec| -> usize {
            free.iter()
                .enumerate()
                .filter(|(_, &pos)| v.get(pos))
                .map(|(k, _)| 1usize << k)
                .fold(0, |a, b| a | b)
        };
        let unit_index: Vec<usize> = (0..n)
            .map(|i| compress(&image.reduce(&Gf2Vec::from_indices(n, [i]))))
            .collect();

        let mut weights = vec![vec![0u64; n + 1]; num_classes];
        let mut best: Vec<(usize, u64)> = vec![(usize::MAX, u64::MAX); num_classes];
        let (mut bits, mut idx, mut w) = (0u64, 0usize, 0usize);
        weights[0][0] += 1;
        best[0] = (0, 0);
        for t in 1..1u64 << n {
            let i = t.trailing_zeros() as usize;
            bits ^= 1 << i;
            idx ^= unit_index[i];
            if bits >> i & 1 == 1 {
                w += 1;
            } else {
                w -= 1;
            }
            weights[idx][w] += 1;
            if (w, bits) < best[idx] {
                best[idx] = (w, bits);
            }
        }

        let d1 = chain.boundary1();
        let mut sectors: BTreeMap<Gf2Vec, Vec<usize>> = BTreeMap::new();
        let classes: Vec<ErrorClass> = weights
            .into_iter()
            .zip(best)
            .enumerate()
            .map(|(k, (weights, (_, b)))| {
                let representative = Gf2Vec::from_u64(n, b);
                let syndrome = d1.apply(&representative);
                sectors.entry(syndrome.clone()).or_default().push(k);
                ErrorClass {
                    weights,
                    representative,
                    syndrome,
                }
            })
            .collect();

        let mut homology = Vec::new();
        let mut span = image.clone();
        for z in d1.kernel_basis() {
            if span.insert(z.clone()) {
                homology.push(z);
            }
        }

        Ok(Self {
            name: name.into(),
            chain,
            image,
            unit_index,
            classes,
            homology,
            sectors,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn chain(&self) -> &ChainComplex {
        &self.chain
    }

    pub fn num_qubits(&self) -> usize {
        self.chain.dim1()
    }

    pub fn classes(&self) -> &[ErrorClass] {
        &self.classes
    }

    /// Generators of `ker d1 / im d2`.
    pub fn homology_basis(&self) -> &[Gf2Vec] {
        &self.homology
    }

    pub fn homology_order(&self) -> usize {
        1 << self.homology.len()
    }

    /// Every element of `H1` as a cycle, the identity first.
    pub fn homology_elements(&self) -> Vec<Gf2Vec> {
        let n = self.num_qubits();
        (0..self.homology_order())
            .map(|mask| {
                let mut v = Gf2Vec::zeros(n);
                for (k, g) in self.homology.iter().enumerate() {
                    if mask >> k & 1 == 1 {
                        v.xor_assign(g);
                    }
                }
                v
            })
            .collect()
    }

    /// `|ker d2|`: how often each class member appears in a sum over `C2`.
    pub fn gauge_multiplicity_log2(&self) -> usize {
        self.chain.dim2() - self.image.rank()
    }

    pub fn class_index(&self, error: &Gf2Vec) -> Result<usize> {
        if error.len() != self.num_qubits() {
            return Err(Error::Structure(format!(
                "error has {} bits, code has {} qubits",
                error.len(),
                self.num_qubits()
            )));
        }
        Ok(error.ones().fold(0, |a, i| a ^ self.unit_index[i]))
    }

    pub fn equivalent(&self, a: &Gf2Vec, b: &Gf2Vec) -> bool {
        self.image.contains(&a.xor(b))
    }

    /// Syndromes in `im d1` with the classes consistent with each.
    pub fn sectors(&self) -> &BTreeMap<Gf2Vec, Vec<usize>> {
        &self.sectors
    }

    /// Natural log of every class probability at error rate `p`.
    pub fn log_class_probabilities(&self, p: f64) -> Result<Vec<f64>> {
        check_rate(p)?;
        let n = self.num_qubits();
        Ok(self
            .classes
            .iter()
            .map(|c| {
                log_sum_exp(
                    c.weights
                        .iter()
                        .enumerate()
                        .filter(|(_, &m)| m > 0)
                        .map(|(w, &m)| (m as f64).ln() + log_error_probability(w, n, p)),
                )
            })
            .collect())
    }

    /// `Pr(eps + im d2)`, the total probability of the class of `error`.
    pub fn class_probability(&self, error: &Gf2Vec, p: f64) -> Result<f64> {
        let k = self.class_index(error)?;
        Ok(self.log_class_probabilities(p)?[k].exp())
    }

    /// `sum_{w in C2} Pr(eps + d2 w)` by direct enumeration over `C2`.
    /// Every class member is counted `|ker d2|` times.
    pub fn log_stabilizer_sum(&self, error: &Gf2Vec, p: f64) -> Result<f64> {
        check_rate(p)?;
        let m = self.chain.dim2();
        check_enumerable(m)?;
        let n = self.num_qubits();
        let d2 = self.chain.boundary2();
        let mut e = error.clone();
        let mut terms = Vec::with_capacity(1 << m);
        terms.push(log_error_probability(e.weight(), n, p));
        for t in 1..1u64 << m {
            e.xor_assign(&d2.column_vec(t.trailing_zeros() as usize));
            terms.push(log_error_probability(e.weight(), n, p));
        }
        Ok(log_sum_exp(terms))
    }

    /// Coupling model whose term signs are the bits of `error`.
    pub fn model(&self, error: &Gf2Vec) -> Result<CouplingModel> {
        compile_model(
            &self.chain,
            &DisorderConfig::from_flips(error.clone(), 0.0),
            ModelKind::Generic,
        )
    }

    pub fn log_partition(&self, error: &Gf2Vec, beta: f64) -> Result<f64> {
        exact_partition(&self.model(error)?, beta)
    }

    /// Errors if `lambda` is not a nontrivial cycle.
    pub fn check_logical(&self, lambda: &Gf2Vec) -> Result<()> {
        if lambda.len() != self.num_qubits() {
            return Err(Error::Structure("logical has the wrong length".into()));
        }
        if !self.chain.boundary1().apply(lambda).is_zero() {
            return Err(Error::InvalidParameter("lambda is not a cycle".into()));
        }
        if self.image.contains(lambda) {
            return Err(Error::InvalidParameter(
                "lambda is a boundary, hence homologically trivial".into(),
            ));
        }
        Ok(())
    }
}

/// `log(p^w (1-p)^(n-w))`, exact at the endpoints `p = 0` and `p = 1`.
pub fn log_error_probability(w: usize, n: usize, p: f64) -> f64 {
    let part = |k: usize, q: f64| if k == 0 { 0.0 } else { k as f64 * q.ln() };
    part(w, p) + part(n - w, 1.0 - p)
}

fn check_rate(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("error rate {p} outside [0, 1]")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::toy::{self, ToyCode};
    use approx::assert_relative_eq;

    fn code(c: ToyCode) -> SmallCSSCode {
        SmallCSSCode::new(c.to_string(), c.build().unwrap()).unwrap()
    }

    #[test]
    fn homology_orders() {
        assert_eq!(code(ToyCode::Repetition(3)).homology_order(), 2);
        assert_eq!(code(ToyCode::Toric(2)).homology_order(), 4);
        assert_eq!(code(ToyCode::Toric(3)).homology_order(), 4);
        assert_eq!(code(ToyCode::TwoTetrahedra).homology_order(), 1);
        assert_eq!(code(ToyCode::Rpim(2)).homology_order(), 8);
    }

    #[test]
    fn homology_representatives_are_inequivalent_cycles() {
        let c = code(ToyCode::Toric(3));
        let elems = c.homology_elements();
        for (i, a) in elems.iter().enumerate() {
            assert!(c.chain().boundary1().apply(a).is_zero());
            for b in &elems[i + 1..] {
                assert!(!c.equivalent(a, b));
            }
        }
    }

    #[test]
    fn classes_partition_the_error_space() {
        let c = code(ToyCode::Toric(2));
        for p in [0.01, 0.1, 0.3, 0.5] {
            let total: f64 = c
                .log_class_probabilities(p)
                .unwrap()
                .iter()
                .map(|l| l.exp())
                .sum();
            assert_relative_eq!(total, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn trivial_code_class_is_the_error_itself() {
        let c = code(ToyCode::Repetition(4));
        let e = Gf2Vec::from_indices(4, [1, 2]);
        let pr = c.class_probability(&e, 0.2).unwrap();
        assert_relative_eq!(pr, 0.2f64.powi(2) * 0.8f64.powi(2), max_relative = 1e-14);
    }

    #[test]
    fn uniform_measure_makes_sector_classes_equiprobable() {
        let c = code(ToyCode::Toric(2));
        let lp = c.log_class_probabilities(0.5).unwrap();
        for members in c.sectors().values() {
            for &k in members {
                assert_relative_eq!(lp[k], lp[members[0]], max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn class_index_matches_equivalence() {
        let c = code(ToyCode::Toric(2));
        let d2 = c.chain().boundary2();
        let e = Gf2Vec::from_indices(8, [0, 3, 5]);
        let f = e.xor(&d2.column_vec(1)).xor(&d2.column_vec(2));
        assert_eq!(c.class_index(&e).unwrap(), c.class_index(&f).unwrap());
        assert!(c.equivalent(&e, &f));
        let g = e.xor(&Gf2Vec::from_indices(8, [0]));
        assert_ne!(c.class_index(&e).unwrap(), c.class_index(&g).unwrap());
    }

    #[test]
    fn stabilizer_sum_counts_gauge_multiplicity() {
        let c = code(ToyCode::TwoTetrahedra);
        let e = Gf2Vec::from_indices(2, [0]);
        let lhs = c.log_stabilizer_sum(&e, 0.1).unwrap();
        let per_class = c.class_probability(&e, 0.1).unwrap().ln();
        let mult = c.gauge_multiplicity_log2() as f64 * 2f64.ln();
        assert_relative_eq!(lhs, per_class + mult, max_relative = 1e-13);
        assert_eq!(c.gauge_multiplicity_log2(), 3);
    }

    #[test]
    fn logical_guard() {
        let c = code(ToyCode::Repetition(3));
        assert!(c.check_logical(&Gf2Vec::zeros(3)).is_err());
        assert!(c.check_logical(&Gf2Vec::from_indices(3, [0])).is_err());
        c.check_logical(&Gf2Vec::from_indices(3, [0, 1, 2])).unwrap();
        let _ = toy::repetition(3).unwrap();
    }
}
