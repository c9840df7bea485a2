//! Random coupling Ising models compiled from chain complexes.
//!
//! Every spin is a basis element of `C2`, every interaction term a basis
//! element of `C1`. Term `j` couples the spins `i` with `[d2 i]_j = 1` and
//! carries the quenched sign `(-1)^{eps_j}`:
//!
//! ```text
//! H(s) = - sum_j sign_j * prod_{i in term j} s_i
//! ```
//!
//! The same compiler serves the 4-body vertex model, the 6-body edge model
//! and the random plaquette model. Energies are exact integers.

use crate::complex::{
    build_bcc_complex, build_cubic_complex, to_chain_complex, ChainComplex, ChainKind, Color,
    Lattice,
};
use crate::error::{Error, Result};
use crate::gf2::Gf2Vec;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Spins on bcc vertices, one 4-body term per tetrahedron.
    FourBodyVertex,
    /// Spins on bcc edges, one 6-body term per tetrahedron.
    SixBodyEdge,
    /// Spins on cubic edges, one 4-body term per square face.
    Rpim,
    /// Arbitrary chain complex; no arity constraint.
    Generic,
}

impl ModelKind {
    pub fn expected_arity(self) -> Option<usize> {
        match self {
            ModelKind::FourBodyVertex | ModelKind::Rpim => Some(4),
            ModelKind::SixBodyEdge => Some(6),
            ModelKind::Generic => None,
        }
    }

    pub fn chain_kind(self) -> ChainKind {
        match self {
            ModelKind::FourBodyVertex => ChainKind::XCorrection,
            ModelKind::SixBodyEdge => ChainKind::ZCorrection,
            ModelKind::Rpim => ChainKind::Rpim,
            ModelKind::Generic => ChainKind::Custom,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::FourBodyVertex => "four-body-vertex",
            ModelKind::SixBodyEdge => "six-body-edge",
            ModelKind::Rpim => "rpim",
            ModelKind::Generic => "generic",
        }
    }

    /// Builds the lattice this model lives on.
    pub fn lattice(self, linear_size: usize) -> Result<Lattice> {
        match self {
            ModelKind::FourBodyVertex | ModelKind::SixBodyEdge => {
                Ok(Lattice::Bcc(build_bcc_complex(linear_size)?))
            }
            ModelKind::Rpim => Ok(Lattice::Cubic(build_cubic_complex(linear_size)?)),
            ModelKind::Generic => Err(Error::InvalidParameter(
                "generic models have no associated lattice".into(),
            )),
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "four-body-vertex" | "four-body" | "4body" => Ok(ModelKind::FourBodyVertex),
            "six-body-edge" | "six-body" | "6body" => Ok(ModelKind::SixBodyEdge),
            "rpim" => Ok(ModelKind::Rpim),
            "generic" => Ok(ModelKind::Generic),
            other => Err(Error::InvalidParameter(format!("unknown model kind {other:?}"))),
        }
    }
}

/// Quenched disorder: which interaction terms carry a negative sign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderConfig {
    pub flips: Gf2Vec,
    pub p: f64,
    pub seed: u64,
}

impl DisorderConfig {
    /// Disorder-free configuration for `num_terms` terms.
    pub fn clean(num_terms: usize) -> Self {
        Self {
            flips: Gf2Vec::zeros(num_terms),
            p: 0.0,
            seed: 0,
        }
    }

    pub fn from_flips(flips: Gf2Vec, p: f64) -> Self {
        Self { flips, p, seed: 0 }
    }

    pub fn flip_fraction(&self) -> f64 {
        if self.flips.is_empty() {
            0.0
        } else {
            self.flips.weight() as f64 / self.flips.len() as f64
        }
    }
}

pub fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "disorder strength must lie in [0, 0.5], got {p}"
        )));
    }
    Ok(())
}

/// Draws each term sign independently: negative with probability `p`.
pub fn sample_disorder(chain: &ChainComplex, p: f64, seed: u64) -> Result<DisorderConfig> {
    check_probability(p)?;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let n = chain.dim1();
    let mut flips = Gf2Vec::zeros(n);
    for j in 0..n {
        if rng.gen::<f64>() < p {
            flips.flip(j);
        }
    }
    Ok(DisorderConfig { flips, p, seed })
}

/// Interaction table in compressed sparse form, with the reverse
/// spin-to-term index used by local updates.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingModel {
    kind: ModelKind,
    num_spins: usize,
    term_offsets: Vec<usize>,
    term_spins: Vec<u32>,
    signs: Vec<i8>,
    spin_offsets: Vec<usize>,
    spin_terms: Vec<u32>,
}

pub fn compile_model(
    chain: &ChainComplex,
    disorder: &DisorderConfig,
    kind: ModelKind,
) -> Result<CouplingModel> {
    if disorder.flips.len() != chain.dim1() {
        return Err(Error::Structure(format!(
            "disorder has {} bits but the complex has {} interaction terms",
            disorder.flips.len(),
            chain.dim1()
        )));
    }
    let terms = chain.boundary2().transpose();
    if let Some(arity) = kind.expected_arity() {
        if let Some((j, col)) = terms
            .columns()
            .iter()
            .enumerate()
            .find(|(_, c)| c.len() != arity)
        {
            return Err(Error::Structure(format!(
                "{} expects {arity}-body terms but term {j} couples {} spins",
                kind.name(),
                col.len()
            )));
        }
    }
    let mut term_offsets = Vec::with_capacity(terms.cols() + 1);
    let mut term_spins = Vec::new();
    term_offsets.push(0);
    for col in terms.columns() {
        term_spins.extend(col.iter().map(|&i| i as u32));
        term_offsets.push(term_spins.len());
    }
    let signs = (0..chain.dim1())
        .map(|j| if disorder.flips.get(j) { -1 } else { 1 })
        .collect();
    let num_spins = chain.dim2();
    let mut spin_offsets = Vec::with_capacity(num_spins + 1);
    let mut spin_terms = Vec::new();
    spin_offsets.push(0);
    for col in chain.boundary2().columns() {
        spin_terms.extend(col.iter().map(|&j| j as u32));
        spin_offsets.push(spin_terms.len());
    }
    Ok(CouplingModel {
        kind,
        num_spins,
        term_offsets,
        term_spins,
        signs,
        spin_offsets,
        spin_terms,
    })
}

impl CouplingModel {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn num_spins(&self) -> usize {
        self.num_spins
    }

    pub fn num_terms(&self) -> usize {
        self.signs.len()
    }

    #[inline]
    pub fn term(&self, j: usize) -> &[u32] {
        &self.term_spins[self.term_offsets[j]..self.term_offsets[j + 1]]
    }

    #[inline]
    pub fn sign(&self, j: usize) -> i8 {
        self.signs[j]
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Terms containing spin `i`.
    #[inline]
    pub fn spin_terms(&self, i: usize) -> &[u32] {
        &self.spin_terms[self.spin_offsets[i]..self.spin_offsets[i + 1]]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.num_spins)
            .map(|i| self.spin_terms(i).len())
            .max()
            .unwrap_or(0)
    }

    pub fn arity_histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for j in 0..self.num_terms() {
            *h.entry(self.term(j).len()).or_default() += 1;
        }
        h
    }

    /// Same interaction structure with different signs.
    pub fn with_signs(&self, flips: &Gf2Vec) -> Result<CouplingModel> {
        if flips.len() != self.num_terms() {
            return Err(Error::Structure("sign vector length mismatch".into()));
        }
        let mut out = self.clone();
        for (j, s) in out.signs.iter_mut().enumerate() {
            *s = if flips.get(j) { -1 } else { 1 };
        }
        Ok(out)
    }

    /// Current value `sign_j * prod s_i` of term `j`.
    #[inline]
    pub fn term_value(&self, state: &SpinState, j: usize) -> i8 {
        self.term(j)
            .iter()
            .fold(self.signs[j], |acc, &i| acc * state.spins[i as usize])
    }

    pub fn energy(&self, state: &SpinState) -> Result<i64> {
        self.check_state(state)?;
        Ok(-(0..self.num_terms())
            .map(|j| self.term_value(state, j) as i64)
            .sum::<i64>())
    }

    /// Energy change from flipping spin `i`, using only its incident terms.
    pub fn delta_energy(&self, state: &SpinState, i: usize) -> i64 {
        2 * self
            .spin_terms(i)
            .iter()
            .map(|&j| self.term_value(state, j as usize) as i64)
            .sum::<i64>()
    }

    /// SHA-256 over the term table and signs; identifies a compiled model
    /// in run records and checkpoints.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(self.kind.name().as_bytes());
        h.update((self.num_spins as u64).to_le_bytes());
        for &o in &self.term_offsets {
            h.update((o as u64).to_le_bytes());
        }
        for &s in &self.term_spins {
            h.update(s.to_le_bytes());
        }
        h.update(self.signs.iter().map(|&s| s as u8).collect::<Vec<u8>>());
        crate::complex::hex(&h.finalize())
    }

    pub fn negative_terms(&self) -> usize {
        self.signs.iter().filter(|&&s| s < 0).count()
    }

    fn check_state(&self, state: &SpinState) -> Result<()> {
        if state.len() != self.num_spins {
            return Err(Error::Structure(format!(
                "state has {} spins, model has {}",
                state.len(),
                self.num_spins
            )));
        }
        Ok(())
    }
}

/// Ising configuration with values in {-1, +1}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinState {
    spins: Vec<i8>,
}

impl SpinState {
    pub fn all_up(n: usize) -> Self {
        Self { spins: vec![1; n] }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self {
            spins: (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect(),
        }
    }

    pub fn from_spins(spins: Vec<i8>) -> Result<Self> {
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter("spins must be +1 or -1".into()));
        }
        Ok(Self { spins })
    }

    /// Bit `i` of `bits` set means spin `i` is down.
    pub fn from_bits(n: usize, bits: u64) -> Self {
        Self {
            spins: (0..n)
                .map(|i| if (bits >> i) & 1 == 1 { -1 } else { 1 })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> i8 {
        self.spins[i]
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.spins[i] = -self.spins[i];
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.spins
    }
}

/// Spin flips that leave a model's Hamiltonian invariant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymmetryGenerator {
    /// 4-body model: flip every vertex spin of two color classes.
    ColorPair([Color; 2]),
    /// 6-body model: flip the edges from `vertex` to all its neighbours of
    /// two colors, both different from the vertex's own.
    EdgeStar { vertex: usize, colors: [Color; 2] },
    /// Random plaquette model: flip the six edges at a vertex.
    VertexStar { vertex: usize },
}

/// Spins flipped by `generator`, after validating it against the model.
pub fn symmetry_support(
    model: &CouplingModel,
    lattice: &Lattice,
    generator: SymmetryGenerator,
) -> Result<Vec<usize>> {
    let invalid = |msg: String| Err(Error::InvalidParameter(msg));
    match (model.kind(), generator, lattice) {
        (ModelKind::FourBodyVertex, SymmetryGenerator::ColorPair([a, b]), Lattice::Bcc(cx)) => {
            if a == b {
                return invalid("color pair must name two different colors".into());
            }
            Ok((0..cx.vertices().len())
                .filter(|&v| cx.color(v) == a || cx.color(v) == b)
                .collect())
        }
        (
            ModelKind::SixBodyEdge,
            SymmetryGenerator::EdgeStar { vertex, colors: [a, b] },
            Lattice::Bcc(cx),
        ) => {
            if vertex >= cx.vertices().len() {
                return invalid(format!("vertex {vertex} out of range"));
            }
            let own = cx.color(vertex);
            if a == b || a == own || b == own {
                return invalid(format!(
                    "edge star at a {own:?} vertex needs two distinct other colors, got {a:?}, {b:?}"
                ));
            }
            Ok(cx
                .vertex_edges(vertex)
                .iter()
                .copied()
                .filter(|&e| {
                    let c = cx.color(cx.other_endpoint(e, vertex));
                    c == a || c == b
                })
                .collect())
        }
        (ModelKind::Rpim, SymmetryGenerator::VertexStar { vertex }, Lattice::Cubic(cx)) => {
            if vertex >= cx.num_vertices() {
                return invalid(format!("vertex {vertex} out of range"));
            }
            Ok(cx.vertex_star(vertex).to_vec())
        }
        (kind, generator, _) => invalid(format!(
            "generator {generator:?} is not a symmetry of the {} model on this lattice",
            kind.name()
        )),
    }
}

pub fn apply_symmetry(
    model: &CouplingModel,
    lattice: &Lattice,
    state: &SpinState,
    generator: SymmetryGenerator,
) -> Result<SpinState> {
    if state.len() != model.num_spins() {
        return Err(Error::Structure("state length mismatch".into()));
    }
    let mut out = state.clone();
    for i in symmetry_support(model, lattice, generator)? {
        out.flip(i);
    }
    Ok(out)
}

/// A lattice, its chain complex, one disorder sample and the compiled model.
#[derive(Clone, Debug)]
pub struct ModelInstance {
    pub kind: ModelKind,
    pub lattice: Lattice,
    pub chain: ChainComplex,
    pub disorder: DisorderConfig,
    pub model: CouplingModel,
}

impl ModelInstance {
    pub fn build(kind: ModelKind, linear_size: usize, p: f64, disorder_seed: u64) -> Result<Self> {
        check_probability(p)?;
        let lattice = kind.lattice(linear_size)?;
        let chain = to_chain_complex(&lattice, kind.chain_kind())?;
        let disorder = sample_disorder(&chain, p, disorder_seed)?;
        let model = compile_model(&chain, &disorder, kind)?;
        Ok(Self {
            kind,
            lattice,
            chain,
            disorder,
            model,
        })
    }

    pub fn linear_size(&self) -> usize {
        self.lattice.linear_size()
    }

    pub fn dump(&self) -> ModelDump {
        ModelDump {
            kind: self.kind,
            linear_size: self.linear_size(),
            num_spins: self.model.num_spins(),
            num_terms: self.model.num_terms(),
            arity_histogram: self.model.arity_histogram(),
            negative_terms: self.disorder.flips.weight(),
            disorder_p: self.disorder.p,
            disorder_seed: self.disorder.seed,
        }
    }
}

/// JSON description from which a model is rebuilt bit-exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDump {
    pub kind: ModelKind,
    pub linear_size: usize,
    pub num_spins: usize,
    pub num_terms: usize,
    pub arity_histogram: BTreeMap<usize, usize>,
    pub negative_terms: usize,
    pub disorder_p: f64,
    pub disorder_seed: u64,
}

impl ModelDump {
    pub fn rebuild(&self) -> Result<ModelInstance> {
        let inst = ModelInstance::build(
            self.kind,
            self.linear_size,
            self.disorder_p,
            self.disorder_seed,
        )?;
        if inst.dump() != *self {
            return Err(Error::Structure(
                "rebuilt model does not match its dump".into(),
            ));
        }
        Ok(inst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disorder_bounds() {
        let inst = ModelInstance::build(ModelKind::Rpim, 2, 0.0, 1).unwrap();
        assert!(sample_disorder(&inst.chain, 0.6, 1).is_err());
        assert!(sample_disorder(&inst.chain, -0.1, 1).is_err());
        assert_eq!(sample_disorder(&inst.chain, 0.0, 9).unwrap().flips.weight(), 0);
    }

    #[test]
    fn disorder_is_seeded() {
        let inst = ModelInstance::build(ModelKind::FourBodyVertex, 4, 0.0, 1).unwrap();
        let a = sample_disorder(&inst.chain, 0.27, 42).unwrap();
        let b = sample_disorder(&inst.chain, 0.27, 42).unwrap();
        let c = sample_disorder(&inst.chain, 0.27, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.flips, c.flips);
    }

    #[test]
    fn flip_fraction_within_binomial_band() {
        // 12 * 8^3 interaction terms at L = 8.
        let inst = ModelInstance::build(ModelKind::FourBodyVertex, 8, 0.0, 1).unwrap();
        let n = inst.chain.dim1() as f64;
        assert_eq!(n, 6144.0);
        let d = sample_disorder(&inst.chain, 0.27, 7).unwrap();
        let sigma = (0.27 * 0.73 / n).sqrt();
        assert!((d.flip_fraction() - 0.27).abs() < 3.0 * sigma);
    }

    #[test]
    fn compiled_arities() {
        let four = ModelInstance::build(ModelKind::FourBodyVertex, 2, 0.0, 0).unwrap();
        assert_eq!(four.model.num_terms(), 96);
        assert_eq!(four.model.arity_histogram(), BTreeMap::from([(4, 96)]));
        assert!(four.model.signs().iter().all(|&s| s == 1));
        let six = ModelInstance::build(ModelKind::SixBodyEdge, 2, 0.0, 0).unwrap();
        assert_eq!(six.model.arity_histogram(), BTreeMap::from([(6, 96)]));
        let rpim = ModelInstance::build(ModelKind::Rpim, 2, 0.0, 0).unwrap();
        assert_eq!(rpim.model.arity_histogram(), BTreeMap::from([(4, 24)]));
    }

    #[test]
    fn wrong_orientation_is_a_structural_error() {
        let six = ModelInstance::build(ModelKind::SixBodyEdge, 2, 0.0, 0).unwrap();
        let err = compile_model(&six.chain, &six.disorder, ModelKind::FourBodyVertex);
        assert!(matches!(err, Err(Error::Structure(_))));
    }

    #[test]
    fn ground_energies_and_flip_costs() {
        let four = ModelInstance::build(ModelKind::FourBodyVertex, 2, 0.0, 0).unwrap();
        let up = SpinState::all_up(four.model.num_spins());
        assert_eq!(four.model.energy(&up).unwrap(), -96);
        for i in 0..four.model.num_spins() {
            assert_eq!(four.model.delta_energy(&up, i), 48);
        }
        let rpim = ModelInstance::build(ModelKind::Rpim, 2, 0.0, 0).unwrap();
        let up = SpinState::all_up(rpim.model.num_spins());
        assert_eq!(rpim.model.energy(&up).unwrap(), -24);
        for i in 0..rpim.model.num_spins() {
            assert_eq!(rpim.model.delta_energy(&up, i), 8);
        }
    }

    #[test]
    fn energy_rejects_wrong_length() {
        let rpim = ModelInstance::build(ModelKind::Rpim, 2, 0.0, 0).unwrap();
        assert!(rpim.model.energy(&SpinState::all_up(3)).is_err());
    }

    #[test]
    fn invalid_generators_rejected() {
        let four = ModelInstance::build(ModelKind::FourBodyVertex, 2, 0.1, 3).unwrap();
        let up = SpinState::all_up(four.model.num_spins());
        let same = SymmetryGenerator::ColorPair([Color::Red, Color::Red]);
        assert!(apply_symmetry(&four.model, &four.lattice, &up, same).is_err());
        let star = SymmetryGenerator::VertexStar { vertex: 0 };
        assert!(apply_symmetry(&four.model, &four.lattice, &up, star).is_err());

        let six = ModelInstance::build(ModelKind::SixBodyEdge, 2, 0.1, 3).unwrap();
        let cx = six.lattice.as_bcc().unwrap();
        let red = (0..cx.vertices().len()).find(|&v| cx.color(v) == Color::Red).unwrap();
        let bad = SymmetryGenerator::EdgeStar {
            vertex: red,
            colors: [Color::Red, Color::Blue],
        };
        let up = SpinState::all_up(six.model.num_spins());
        assert!(apply_symmetry(&six.model, &six.lattice, &up, bad).is_err());
    }

    #[test]
    fn dump_round_trip() {
        let inst = ModelInstance::build(ModelKind::SixBodyEdge, 2, 0.02, 77).unwrap();
        let json = serde_json::to_string(&inst.dump()).unwrap();
        let back: ModelDump = serde_json::from_str(&json).unwrap();
        let rebuilt = back.rebuild().unwrap();
        assert_eq!(rebuilt.model, inst.model);
    }
}
