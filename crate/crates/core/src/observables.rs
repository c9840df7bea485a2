//! Measurements taken during Monte Carlo runs and the estimators built on
//! them: specific heat, wavevector-dependent sublattice susceptibility,
//! finite-size correlation length and Wilson loop averages.
//!
//! Accumulation is split in two layers. During a run each rung owns a
//! [`RungSeries`]: a fixed number of contiguous time blocks holding sums of
//! the energy, its square, every scalar observable and (optionally) the
//! energy histogram. After the run, series from independent disorder samples
//! at the same temperature are grouped into an [`ObservableSeries`], the
//! unit the estimators consume.

use crate::analysis::bootstrap::{bootstrap, Estimate};
use crate::complex::{Color, Lattice};
use crate::error::{Error, Result};
use crate::models::{ModelInstance, ModelKind};
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Wavevector used by the sublattice susceptibility.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Wavevector {
    Zero,
    /// `k0 = 2 pi / L` along the given axis.
    K0(usize),
}

/// Per-site phase tables for the sublattice Fourier sums.
#[derive(Clone, Debug)]
struct FourierTable {
    /// Vertex indices grouped by color.
    sublattices: [Vec<u32>; 4],
    /// `cos` and `sin` of `k0 . r_u` per vertex and axis.
    cos: Vec<[f64; 3]>,
    sin: Vec<[f64; 3]>,
}

/// Edge layout of an `L x L x L` cubic lattice whose edges carry spins on
/// which square Wilson loops are evaluated.
#[derive(Clone, Debug)]
pub struct WilsonLattice {
    linear_size: usize,
    /// Spin index of the edge leaving cell `c` along axis `a`, at `3c + a`.
    edge_spin: Vec<u32>,
}

/// A square loop of side `size` anchored at `cell` in the plane spanned by
/// the two given axes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WilsonLoopSpec {
    pub size: usize,
    pub cell: [usize; 3],
    pub axes: [usize; 2],
    /// Spin indices of the `4 * size` edges along the loop.
    pub edges: Vec<usize>,
}

impl WilsonLoopSpec {
    pub fn perimeter(&self) -> usize {
        4 * self.size
    }

    pub fn area(&self) -> usize {
        self.size * self.size
    }
}

impl WilsonLattice {
    /// Loops on the red-green (corner-sublattice) edges of the bcc complex,
    /// or on all edges of the cubic lattice.
    pub fn for_lattice(lattice: &Lattice) -> Self {
        let l = lattice.linear_size();
        let mut edge_spin = vec![0u32; 3 * l * l * l];
        for x in 0..l {
            for y in 0..l {
                for z in 0..l {
                    let c = (x * l + y) * l + z;
                    for a in 0..3 {
                        edge_spin[3 * c + a] = match lattice {
                            Lattice::Bcc(cx) => cx.corner_edge([x, y, z], a) as u32,
                            Lattice::Cubic(cx) => cx.edge([x, y, z], a) as u32,
                        };
                    }
                }
            }
        }
        Self {
            linear_size: l,
            edge_spin,
        }
    }

    pub fn max_loop_size(&self) -> usize {
        self.linear_size / 2
    }

    fn cell_index(&self, c: [usize; 3]) -> usize {
        let l = self.linear_size;
        ((c[0] % l) * l + (c[1] % l)) * l + (c[2] % l)
    }

    fn shifted(&self, c: [usize; 3], axis: usize, by: usize) -> [usize; 3] {
        let mut out = c;
        out[axis] = (out[axis] + by) % self.linear_size;
        out
    }

    pub fn loop_spec(&self, size: usize, cell: [usize; 3], axes: [usize; 2]) -> Result<WilsonLoopSpec> {
        if size == 0 || size > self.max_loop_size() {
            return Err(Error::InvalidParameter(format!(
                "loop size {size} outside 1..={}",
                self.max_loop_size()
            )));
        }
        let [a, b] = axes;
        if a == b || a > 2 || b > 2 {
            return Err(Error::InvalidParameter(format!("invalid loop plane {axes:?}")));
        }
        let mut edges = Vec::with_capacity(4 * size);
        let edge = |c: [usize; 3], axis| self.edge_spin[3 * self.cell_index(c) + axis] as usize;
        for k in 0..size {
            edges.push(edge(self.shifted(cell, a, k), a));
            edges.push(edge(self.shifted(self.shifted(cell, a, size), b, k), b));
            edges.push(edge(self.shifted(self.shifted(cell, b, size), a, k), a));
            edges.push(edge(self.shifted(cell, b, k), b));
        }
        Ok(WilsonLoopSpec {
            size,
            cell,
            axes,
            edges,
        })
    }

    /// `W_l` for `l = 1..=L/2`, each averaged over every anchor cell and the
    /// three lattice planes.
    pub fn measure(&self, spins: &[i8]) -> Vec<f64> {
        let l = self.linear_size;
        let n = l * l * l;
        let lmax = self.max_loop_size();
        let mut out = Vec::with_capacity(lmax);
        // seg[3c + a]: product of `size` consecutive spins from cell c along a.
        let mut seg = vec![1i8; 3 * n];
        let mut step = vec![0usize; 3 * n];
        for c in 0..n {
            let coords = [c / (l * l), (c / l) % l, c % l];
            for a in 0..3 {
                step[3 * c + a] = self.cell_index(self.shifted(coords, a, 1));
            }
        }
        // tip[3c + a]: cell reached after `size` steps along a.
        let mut tip: Vec<usize> = (0..3 * n).map(|k| k / 3).collect();
        for _size in 1..=lmax {
            for k in 0..3 * n {
                let a = k % 3;
                seg[k] *= spins[self.edge_spin[3 * tip[k] + a] as usize];
                tip[k] = step[3 * tip[k] + a];
            }
            let mut total = 0i64;
            for c in 0..n {
                for (a, b) in [(0, 1), (0, 2), (1, 2)] {
                    let ca = tip[3 * c + a];
                    let cb = tip[3 * c + b];
                    total += (seg[3 * c + a] * seg[3 * ca + b] * seg[3 * cb + a] * seg[3 * c + b])
                        as i64;
                }
            }
            out.push(total as f64 / (3 * n) as f64);
        }
        out
    }
}

/// Product of the loop's edge spins.
pub fn wilson_loop(spec: &WilsonLoopSpec, spins: &[i8]) -> i8 {
    spec.edges.iter().fold(1, |acc, &e| acc * spins[e])
}

/// What to measure for a given model instance.
#[derive(Clone, Debug)]
pub struct ObservablePlan {
    num_spins: usize,
    linear_size: usize,
    fourier: Option<FourierTable>,
    wilson: Option<WilsonLattice>,
    pub histograms: bool,
    pub blocks: usize,
}

pub const DEFAULT_BLOCKS: usize = 32;

impl ObservablePlan {
    /// Energy only.
    pub fn energy_only(num_spins: usize) -> Self {
        Self {
            num_spins,
            linear_size: 0,
            fourier: None,
            wilson: None,
            histograms: false,
            blocks: DEFAULT_BLOCKS,
        }
    }

    /// Sublattice Fourier sums for the 4-body model, Wilson loops for the
    /// 6-body model and the random plaquette model.
    pub fn for_instance(inst: &ModelInstance) -> Self {
        let mut plan = Self::energy_only(inst.model.num_spins());
        plan.linear_size = inst.linear_size();
        match (inst.kind, &inst.lattice) {
            (ModelKind::FourBodyVertex, Lattice::Bcc(cx)) => {
                let l = cx.linear_size();
                let mut sublattices: [Vec<u32>; 4] = Default::default();
                let mut cos = Vec::with_capacity(cx.vertices().len());
                let mut sin = Vec::with_capacity(cx.vertices().len());
                for (v, vert) in cx.vertices().iter().enumerate() {
                    sublattices[vert.color.index()].push(v as u32);
                    let mut cv = [0.0; 3];
                    let mut sv = [0.0; 3];
                    for a in 0..3 {
                        // Doubled coordinate X: k0 . r = (2 pi / L) (X / 2).
                        let phase = PI * vert.coords[a] as f64 / l as f64;
                        cv[a] = phase.cos();
                        sv[a] = phase.sin();
                    }
                    cos.push(cv);
                    sin.push(sv);
                }
                plan.fourier = Some(FourierTable {
                    sublattices,
                    cos,
                    sin,
                });
            }
            (ModelKind::SixBodyEdge, lattice) | (ModelKind::Rpim, lattice) => {
                plan.wilson = Some(WilsonLattice::for_lattice(lattice));
            }
            _ => {}
        }
        plan
    }

    pub fn with_histograms(mut self, on: bool) -> Self {
        self.histograms = on;
        self
    }

    pub fn with_blocks(mut self, blocks: usize) -> Self {
        self.blocks = blocks.max(1);
        self
    }

    pub fn num_spins(&self) -> usize {
        self.num_spins
    }

    pub fn wilson(&self) -> Option<&WilsonLattice> {
        self.wilson.as_ref()
    }

    /// Names of the scalar observables, in measurement order.
    pub fn labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.fourier.is_some() {
            for c in Color::ALL {
                out.push(susceptibility_label(Wavevector::Zero, c));
                for a in 0..3 {
                    out.push(susceptibility_label(Wavevector::K0(a), c));
                }
            }
        }
        if let Some(w) = &self.wilson {
            for l in 1..=w.max_loop_size() {
                out.push(wilson_label(l));
            }
        }
        out
    }

    /// Scalar observables of one configuration, matching [`Self::labels`].
    pub fn measure(&self, spins: &[i8]) -> Vec<f64> {
        let mut out = Vec::new();
        if let Some(f) = &self.fourier {
            let n = self.num_spins as f64;
            for sub in &f.sublattices {
                let mut m0 = 0.0;
                let mut re = [0.0; 3];
                let mut im = [0.0; 3];
                for &u in sub {
                    let s = spins[u as usize] as f64;
                    m0 += s;
                    for a in 0..3 {
                        re[a] += s * f.cos[u as usize][a];
                        im[a] += s * f.sin[u as usize][a];
                    }
                }
                out.push(m0 * m0 / n);
                for a in 0..3 {
                    out.push((re[a] * re[a] + im[a] * im[a]) / n);
                }
            }
        }
        if let Some(w) = &self.wilson {
            out.extend(w.measure(spins));
        }
        out
    }
}

pub fn susceptibility_label(k: Wavevector, color: Color) -> String {
    let c = match color {
        Color::Red => "r",
        Color::Green => "g",
        Color::Blue => "b",
        Color::Yellow => "y",
    };
    match k {
        Wavevector::Zero => format!("chi0_{c}"),
        Wavevector::K0(a) => format!("chik{}_{c}", ["x", "y", "z"][a]),
    }
}

pub fn wilson_label(l: usize) -> String {
    format!("wilson_{l}")
}

/// Sums over one contiguous block of measurements.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasurementBlock {
    pub count: u64,
    pub sum_e: f64,
    pub sum_e2: f64,
    pub sum_obs: Vec<f64>,
    #[serde(default)]
    pub histogram: BTreeMap<i64, u64>,
}

impl MeasurementBlock {
    fn add(&mut self, other: &MeasurementBlock) {
        self.count += other.count;
        self.sum_e += other.sum_e;
        self.sum_e2 += other.sum_e2;
        if self.sum_obs.len() < other.sum_obs.len() {
            self.sum_obs.resize(other.sum_obs.len(), 0.0);
        }
        for (a, b) in self.sum_obs.iter_mut().zip(&other.sum_obs) {
            *a += b;
        }
        for (e, c) in &other.histogram {
            *self.histogram.entry(*e).or_default() += c;
        }
    }
}

/// Thermal averages of one configuration stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalAverages {
    pub count: u64,
    pub energy: f64,
    pub energy_sq: f64,
    pub obs: Vec<f64>,
}

/// Measurement accumulator for one rung of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RungSeries {
    pub temperature: f64,
    pub labels: Vec<String>,
    pub expected: u64,
    pub recorded: u64,
    pub blocks: Vec<MeasurementBlock>,
}

impl RungSeries {
    pub fn new(temperature: f64, plan: &ObservablePlan, expected: u64) -> Self {
        let labels = plan.labels();
        let nblocks = (plan.blocks as u64).min(expected) as usize;
        let blocks = (0..nblocks)
            .map(|_| MeasurementBlock {
                sum_obs: vec![0.0; labels.len()],
                ..Default::default()
            })
            .collect();
        Self {
            temperature,
            labels,
            expected,
            recorded: 0,
            blocks,
        }
    }

    pub fn record(&mut self, energy: i64, obs: &[f64], histogram: bool) {
        if self.blocks.is_empty() {
            self.blocks.push(MeasurementBlock {
                sum_obs: vec![0.0; self.labels.len()],
                ..Default::default()
            });
        }
        let b = if self.expected == 0 {
            0
        } else {
            ((self.recorded * self.blocks.len() as u64) / self.expected)
                .min(self.blocks.len() as u64 - 1) as usize
        };
        let block = &mut self.blocks[b];
        let e = energy as f64;
        block.count += 1;
        block.sum_e += e;
        block.sum_e2 += e * e;
        for (acc, v) in block.sum_obs.iter_mut().zip(obs) {
            *acc += v;
        }
        if histogram {
            *block.histogram.entry(energy).or_default() += 1;
        }
        self.recorded += 1;
    }

    pub fn count(&self) -> u64 {
        self.blocks.iter().map(|b| b.count).sum()
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    fn averages_of<'a>(&self, blocks: impl Iterator<Item = &'a MeasurementBlock>) -> ThermalAverages {
        let mut total = MeasurementBlock {
            sum_obs: vec![0.0; self.labels.len()],
            ..Default::default()
        };
        for b in blocks {
            total.count += b.count;
            total.sum_e += b.sum_e;
            total.sum_e2 += b.sum_e2;
            for (a, v) in total.sum_obs.iter_mut().zip(&b.sum_obs) {
                *a += v;
            }
        }
        let n = total.count.max(1) as f64;
        ThermalAverages {
            count: total.count,
            energy: total.sum_e / n,
            energy_sq: total.sum_e2 / n,
            obs: total.sum_obs.iter().map(|s| s / n).collect(),
        }
    }

    pub fn averages(&self) -> ThermalAverages {
        self.averages_of(self.blocks.iter())
    }

    /// Averages with block `skip` removed (jackknife).
    pub fn averages_without(&self, skip: usize) -> ThermalAverages {
        self.averages_of(
            self.blocks
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, b)| b),
        )
    }

    pub fn nonempty_blocks(&self) -> usize {
        self.blocks.iter().filter(|b| b.count > 0).count()
    }

    /// Energy histogram over all blocks.
    pub fn histogram(&self) -> BTreeMap<i64, u64> {
        let mut h = BTreeMap::new();
        for b in &self.blocks {
            for (e, c) in &b.histogram {
                *h.entry(*e).or_default() += c;
            }
        }
        h
    }

    /// Blockwise merge of two series with identical layout.
    pub fn merge(&mut self, other: &RungSeries) -> Result<()> {
        if self.blocks.len() != other.blocks.len() || self.labels != other.labels {
            return Err(Error::Structure("cannot merge series with different layouts".into()));
        }
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            a.add(b);
        }
        self.recorded += other.recorded;
        self.expected += other.expected;
        Ok(())
    }
}

/// Series from independent disorder samples at one `(L, p, T)` point.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub samples: Vec<RungSeries>,
}

impl ObservableSeries {
    pub fn new(samples: Vec<RungSeries>) -> Self {
        Self { samples }
    }

    pub fn temperature(&self) -> Option<f64> {
        self.samples.first().map(|s| s.temperature)
    }

    fn require_samples(&self, min_per_sample: u64) -> Result<()> {
        if self.samples.is_empty() {
            return Err(Error::InsufficientData("no disorder samples".into()));
        }
        if let Some(s) = self.samples.iter().find(|s| s.count() < min_per_sample) {
            return Err(Error::InsufficientData(format!(
                "a sample holds {} measurements, need at least {min_per_sample}",
                s.count()
            )));
        }
        Ok(())
    }

    fn label(&self, label: &str) -> Result<usize> {
        self.samples
            .first()
            .and_then(|s| s.label_index(label))
            .ok_or_else(|| Error::InvalidParameter(format!("observable {label:?} was not measured")))
    }

    /// Disorder average of a per-sample statistic of the thermal averages,
    /// with an error bar: bootstrap over samples when there are several,
    /// jackknife over time blocks for a single sample.
    pub fn estimate<F>(&self, stat: F) -> Result<Estimate>
    where
        F: Fn(&ThermalAverages) -> f64,
    {
        self.require_samples(1)?;
        let per_sample: Vec<f64> = self.samples.iter().map(|s| stat(&s.averages())).collect();
        let mean = per_sample.iter().sum::<f64>() / per_sample.len() as f64;
        if per_sample.len() >= 2 {
            let mut rng = Xoshiro256PlusPlus::seed_from_u64(0x5eed_b007);
            let boot = bootstrap(&per_sample, |d| d.iter().sum::<f64>() / d.len() as f64, 200, &mut rng)?;
            Ok(Estimate {
                value: mean,
                error: boot.error,
            })
        } else {
            let s = &self.samples[0];
            Ok(Estimate {
                value: mean,
                error: jackknife_error(s, &stat),
            })
        }
    }
}

/// Jackknife error over the nonempty blocks of one series.
pub fn jackknife_error<F>(series: &RungSeries, stat: &F) -> f64
where
    F: Fn(&ThermalAverages) -> f64,
{
    let idx: Vec<usize> = (0..series.blocks.len())
        .filter(|&i| series.blocks[i].count > 0)
        .collect();
    let n = idx.len();
    if n < 2 {
        return 0.0;
    }
    let vals: Vec<f64> = idx.iter().map(|&i| stat(&series.averages_without(i))).collect();
    let mean = vals.iter().sum::<f64>() / n as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() * (n - 1) as f64 / n as f64;
    var.sqrt()
}

fn heat_of(t: f64, n_spins: usize) -> impl Fn(&ThermalAverages) -> f64 {
    move |a: &ThermalAverages| (a.energy_sq - a.energy * a.energy) / (n_spins as f64 * t * t)
}

/// `c = (<E^2> - <E>^2) / (N T^2)`, thermal average first, then disorder
/// average.
pub fn specific_heat(series: &ObservableSeries, temperature: f64, num_spins: usize) -> Result<Estimate> {
    series.require_samples(2)?;
    if num_spins == 0 || temperature <= 0.0 {
        return Err(Error::InvalidParameter("need N > 0 and T > 0".into()));
    }
    series.estimate(heat_of(temperature, num_spins))
}

/// Disorder-averaged `<|sum_{u in U} s_u e^{i k r_u}|^2> / N` for the color
/// class `U`.
pub fn susceptibility(series: &ObservableSeries, k: Wavevector, sublattice: Color) -> Result<Estimate> {
    if let Wavevector::K0(a) = k {
        if a > 2 {
            return Err(Error::InvalidParameter(format!("axis {a} out of range")));
        }
    }
    let idx = series.label(&susceptibility_label(k, sublattice))?;
    series.estimate(move |a| a.obs[idx])
}

/// Susceptibility averaged over the four color classes and, for `k0`, the
/// three axis directions. Every term is an estimator of the same quantity by
/// lattice symmetry.
pub fn susceptibility_symmetrized(series: &ObservableSeries, at_k0: bool) -> Result<Estimate> {
    let mut idx = Vec::new();
    for c in Color::ALL {
        if at_k0 {
            for a in 0..3 {
                idx.push(series.label(&susceptibility_label(Wavevector::K0(a), c))?);
            }
        } else {
            idx.push(series.label(&susceptibility_label(Wavevector::Zero, c))?);
        }
    }
    series.estimate(move |a| idx.iter().map(|&i| a.obs[i]).sum::<f64>() / idx.len() as f64)
}

/// Outcome of the correlation-length formula.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CorrelationLength {
    Defined(f64),
    /// `chi(k0) > chi(0)`: the estimate is dominated by noise.
    Undefined,
}

/// `xi_L = sqrt(chi(0) / chi(k0) - 1) / (2 sin(k0 / 2))`, `k0 = 2 pi / L`.
pub fn correlation_length(chi_zero: f64, chi_k0: f64, linear_size: usize) -> Result<CorrelationLength> {
    if chi_k0 <= 0.0 || linear_size == 0 {
        return Err(Error::InvalidParameter(format!(
            "need chi(k0) > 0 and L > 0, got chi(k0) = {chi_k0}, L = {linear_size}"
        )));
    }
    if chi_zero < chi_k0 {
        return Ok(CorrelationLength::Undefined);
    }
    let k0 = 2.0 * PI / linear_size as f64;
    Ok(CorrelationLength::Defined(
        (chi_zero / chi_k0 - 1.0).sqrt() / (2.0 * (k0 / 2.0).sin()),
    ))
}

/// Disorder-averaged Wilson loop of side `l` with its noise-floor status.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WilsonAverage {
    pub size: usize,
    pub value: f64,
    pub error: f64,
    /// False when `|<W>| < 2 * error`: logarithms of such values are noise.
    pub loggable: bool,
}

pub const NOISE_FLOOR_SIGMAS: f64 = 2.0;

pub fn wilson_average(series: &ObservableSeries, l: usize) -> Result<WilsonAverage> {
    if l == 0 {
        return Ok(WilsonAverage {
            size: 0,
            value: 1.0,
            error: 0.0,
            loggable: true,
        });
    }
    let idx = series.label(&wilson_label(l)).map_err(|_| {
        Error::InvalidParameter(format!("loop size {l} exceeds L/2 or Wilson loops were not measured"))
    })?;
    let est = series.estimate(move |a| a.obs[idx])?;
    Ok(WilsonAverage {
        size: l,
        value: est.value,
        error: est.error,
        loggable: est.value > 0.0 && est.value.abs() >= NOISE_FLOOR_SIGMAS * est.error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{apply_symmetry, SpinState, SymmetryGenerator};
    use approx::assert_relative_eq;
    use rand::SeedableRng;

    fn series_from(values: &[(i64, Vec<f64>)], plan: &ObservablePlan, t: f64) -> RungSeries {
        let mut s = RungSeries::new(t, plan, values.len() as u64);
        for (e, obs) in values {
            s.record(*e, obs, false);
        }
        s
    }

    #[test]
    fn constant_energy_has_zero_heat() {
        let plan = ObservablePlan::energy_only(10);
        let s = series_from(&vec![(-5, vec![]); 64], &plan, 1.5);
        let c = specific_heat(&ObservableSeries::new(vec![s]), 1.5, 10).unwrap();
        assert_eq!(c.value, 0.0);
        assert_eq!(c.error, 0.0);
    }

    #[test]
    fn heat_needs_two_measurements() {
        let plan = ObservablePlan::energy_only(10);
        let s = series_from(&[(-5, vec![])], &plan, 1.5);
        assert!(specific_heat(&ObservableSeries::new(vec![s]), 1.5, 10).is_err());
    }

    #[test]
    fn magnetized_sublattice_susceptibility() {
        let inst = ModelInstance::build(ModelKind::FourBodyVertex, 4, 0.0, 0).unwrap();
        let plan = ObservablePlan::for_instance(&inst);
        let n = inst.model.num_spins();
        let up = SpinState::all_up(n);
        let obs = plan.measure(up.as_slice());
        let s = series_from(&vec![(0, obs); 4], &plan, 1.0);
        let series = ObservableSeries::new(vec![s]);
        let u = (n / 4) as f64;
        for c in Color::ALL {
            let chi0 = susceptibility(&series, Wavevector::Zero, c).unwrap().value;
            assert_relative_eq!(chi0, u * u / n as f64, epsilon = 1e-9);
            for a in 0..3 {
                let chik = susceptibility(&series, Wavevector::K0(a), c).unwrap().value;
                assert!(chik.abs() < 1e-9, "chi(k0) = {chik}");
            }
        }
        assert!(susceptibility(&series, Wavevector::K0(3), Color::Red).is_err());
    }

    #[test]
    fn random_spins_susceptibility() {
        let inst = ModelInstance::build(ModelKind::FourBodyVertex, 4, 0.0, 0).unwrap();
        let plan = ObservablePlan::for_instance(&inst);
        let n = inst.model.num_spins();
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
        let samples: Vec<(i64, Vec<f64>)> = (0..4000)
            .map(|_| (0, plan.measure(SpinState::random(n, &mut rng).as_slice())))
            .collect();
        let series = ObservableSeries::new(vec![series_from(&samples, &plan, 1e9)]);
        let expected = (n / 4) as f64 / n as f64;
        let chi0 = susceptibility(&series, Wavevector::Zero, Color::Blue).unwrap();
        assert!((chi0.value - expected).abs() < 4.0 * chi0.error.max(0.01));
    }

    #[test]
    fn correlation_length_values() {
        assert_eq!(correlation_length(3.0, 3.0, 8).unwrap(), CorrelationLength::Defined(0.0));
        match correlation_length(5.0, 1.0, 8).unwrap() {
            CorrelationLength::Defined(xi) => assert_relative_eq!(xi, 2.613125929752753, epsilon = 1e-12),
            other => panic!("{other:?}"),
        }
        assert_eq!(correlation_length(1.0, 2.0, 8).unwrap(), CorrelationLength::Undefined);
        assert!(correlation_length(1.0, 0.0, 8).is_err());
    }

    #[test]
    fn empty_loop_is_one() {
        let series = ObservableSeries::default();
        let w = wilson_average(&series, 0).unwrap();
        assert_eq!(w.value, 1.0);
    }

    #[test]
    fn wilson_measure_matches_explicit_loops() {
        for kind in [ModelKind::SixBodyEdge, ModelKind::Rpim] {
            let inst = ModelInstance::build(kind, 4, 0.0, 0).unwrap();
            let w = WilsonLattice::for_lattice(&inst.lattice);
            let mut rng = Xoshiro256PlusPlus::seed_from_u64(11);
            let s = SpinState::random(inst.model.num_spins(), &mut rng);
            let fast = w.measure(s.as_slice());
            for size in 1..=2 {
                let mut total = 0i64;
                for x in 0..4 {
                    for y in 0..4 {
                        for z in 0..4 {
                            for axes in [[0, 1], [0, 2], [1, 2]] {
                                let spec = w.loop_spec(size, [x, y, z], axes).unwrap();
                                assert_eq!(spec.perimeter(), 4 * size);
                                total += wilson_loop(&spec, s.as_slice()) as i64;
                            }
                        }
                    }
                }
                assert_relative_eq!(fast[size - 1], total as f64 / 192.0, epsilon = 1e-12);
            }
            assert!(w.loop_spec(3, [0, 0, 0], [0, 1]).is_err());
        }
    }

    #[test]
    fn wilson_loops_use_two_color_edges() {
        let inst = ModelInstance::build(ModelKind::SixBodyEdge, 4, 0.0, 0).unwrap();
        let cx = inst.lattice.as_bcc().unwrap();
        let w = WilsonLattice::for_lattice(&inst.lattice);
        let spec = w.loop_spec(2, [1, 2, 3], [1, 2]).unwrap();
        for &e in &spec.edges {
            let [a, b] = cx.edges()[e].vertices;
            let colors = [cx.color(a), cx.color(b)];
            assert!(colors.contains(&Color::Red) && colors.contains(&Color::Green));
        }
        // Closed: every vertex on the loop has even degree.
        let mut deg = std::collections::HashMap::new();
        for &e in &spec.edges {
            for v in cx.edges()[e].vertices {
                *deg.entry(v).or_insert(0) += 1;
            }
        }
        assert!(deg.values().all(|d| d % 2 == 0));
    }

    #[test]
    fn wilson_invariant_under_gauge_flips() {
        let inst = ModelInstance::build(ModelKind::SixBodyEdge, 4, 0.02, 5).unwrap();
        let cx = inst.lattice.as_bcc().unwrap();
        let w = WilsonLattice::for_lattice(&inst.lattice);
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(5);
        let s = SpinState::random(inst.model.num_spins(), &mut rng);
        let before = w.measure(s.as_slice());
        for v in [0, 7, 33, 100] {
            let own = cx.color(v);
            let others: Vec<Color> = Color::ALL.into_iter().filter(|&c| c != own).collect();
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                let g = SymmetryGenerator::EdgeStar {
                    vertex: v,
                    colors: [others[i], others[j]],
                };
                let t = apply_symmetry(&inst.model, &inst.lattice, &s, g).unwrap();
                assert_eq!(w.measure(t.as_slice()), before);
            }
        }
    }

    #[test]
    fn susceptibility_invariant_under_color_pair_flip() {
        let inst = ModelInstance::build(ModelKind::FourBodyVertex, 4, 0.1, 5).unwrap();
        let plan = ObservablePlan::for_instance(&inst);
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(9);
        let s = SpinState::random(inst.model.num_spins(), &mut rng);
        let g = SymmetryGenerator::ColorPair([Color::Green, Color::Yellow]);
        let t = apply_symmetry(&inst.model, &inst.lattice, &s, g).unwrap();
        let a = plan.measure(s.as_slice());
        let b = plan.measure(t.as_slice());
        for (x, y) in a.iter().zip(&b) {
            assert_relative_eq!(x, y, epsilon = 1e-9);
        }
    }

    #[test]
    fn merge_is_blockwise_sum() {
        let plan = ObservablePlan::energy_only(4).with_blocks(4);
        let a = series_from(&[(1, vec![]), (2, vec![]), (3, vec![]), (4, vec![])], &plan, 1.0);
        let b = series_from(&[(5, vec![]), (6, vec![]), (7, vec![]), (8, vec![])], &plan, 1.0);
        let mut ab = a.clone();
        ab.merge(&b).unwrap();
        let mut ba = b.clone();
        ba.merge(&a).unwrap();
        assert_eq!(ab.blocks, ba.blocks);
        assert_eq!(ab.count(), 8);
    }
}
