//! Campaign analysis: observable tables, critical-point estimates per
//! method and the phase diagram. Reads run records; never modifies them.

use super::run::{read_manifest, read_record, write_atomic, Manifest, SampleRecord};
use crate::analysis::reweight::heat_peak;
use crate::analysis::{
    assemble_phase_diagram, fixed_temperature_scan, heat_peak_fss_with, wilson_fit, wilson_points,
    wilson_zero_crossing, CriticalPointEstimate, CrossingOutcome, CurvePoint, Estimate,
    FixedTemperatureScan, FssOptions, Method, PhaseDiagram, PhasePoint, SizeCurve, SizePeak,
    WilsonFit,
};
use crate::complex::Color;
use crate::error::{Error, Result};
use crate::models::ModelKind;
use crate::observables::{
    correlation_length, specific_heat, susceptibility_label, wilson_average, CorrelationLength,
    ObservableSeries, RungSeries, ThermalAverages, Wavevector,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

pub const ANALYSIS_DIR: &str = "analysis";

/// Records of one `(L, p)` group, all on the same ladder.
#[derive(Clone, Debug)]
pub struct SizeGroup {
    pub linear_size: usize,
    pub p: f64,
    pub num_spins: usize,
    pub temperatures: Vec<f64>,
    pub records: Vec<SampleRecord>,
}

impl SizeGroup {
    /// `samples[s][r]`: series of rung `r` in disorder sample `s`.
    pub fn rung_samples(&self) -> Vec<Vec<RungSeries>> {
        self.records.iter().map(|r| r.run.series.clone()).collect()
    }

    pub fn rung(&self, r: usize) -> ObservableSeries {
        ObservableSeries::new(self.records.iter().map(|s| s.run.series[r].clone()).collect())
    }

    pub fn equilibrated_fraction(&self) -> f64 {
        let ok = self
            .records
            .iter()
            .filter(|r| r.run.equilibration.equilibrated)
            .count();
        ok as f64 / self.records.len() as f64
    }
}

/// A campaign directory loaded for analysis.
#[derive(Clone, Debug)]
pub struct Campaign {
    pub directory: PathBuf,
    pub manifest: Manifest,
    /// Sorted by `p`, then `L`.
    pub groups: Vec<SizeGroup>,
    pub missing: usize,
}

impl Campaign {
    pub fn load(dir: &Path) -> Result<Self> {
        let manifest = read_manifest(dir)?;
        let mut by_key: BTreeMap<(u64, usize), Vec<SampleRecord>> = BTreeMap::new();
        let mut missing = 0;
        for t in &manifest.tasks {
            let path = dir.join(&t.record);
            if !path.exists() {
                missing += 1;
                continue;
            }
            let rec = read_record(&path)?;
            by_key
                .entry((t.p.to_bits(), t.linear_size))
                .or_default()
                .push(rec);
        }
        if by_key.is_empty() {
            return Err(Error::InsufficientData(format!(
                "{} holds no finished records",
                dir.display()
            )));
        }
        let mut groups = Vec::new();
        for ((_, l), mut records) in by_key {
            records.sort_by_key(|r| r.sample);
            let first = &records[0].run;
            let temperatures = first.temperatures.clone();
            if records.iter().any(|r| r.run.temperatures != temperatures) {
                return Err(Error::Structure(format!(
                    "records for L = {l}, p = {} use different ladders",
                    records[0].p
                )));
            }
            groups.push(SizeGroup {
                linear_size: l,
                p: records[0].p,
                num_spins: first.num_spins,
                temperatures,
                records,
            });
        }
        groups.sort_by(|a, b| a.p.total_cmp(&b.p).then(a.linear_size.cmp(&b.linear_size)));
        Ok(Self {
            directory: dir.to_path_buf(),
            manifest,
            groups,
            missing,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.manifest.config.model
    }

    pub fn disorder_values(&self) -> Vec<f64> {
        let mut ps: Vec<f64> = self.groups.iter().map(|g| g.p).collect();
        ps.dedup();
        ps
    }

    pub fn groups_at(&self, p: f64) -> Vec<&SizeGroup> {
        self.groups.iter().filter(|g| g.p == p).collect()
    }
}

/// One line of the observable table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableRow {
    pub p: f64,
    #[serde(rename = "L")]
    pub linear_size: usize,
    #[serde(rename = "T")]
    pub temperature: f64,
    pub observable: String,
    pub value: f64,
    pub error: f64,
    pub n_disorder: usize,
}

fn chi_indices(series: &RungSeries) -> Option<(Vec<usize>, Vec<usize>)> {
    let mut zero = Vec::new();
    let mut k0 = Vec::new();
    for c in Color::ALL {
        zero.push(series.label_index(&susceptibility_label(Wavevector::Zero, c))?);
        for a in 0..3 {
            k0.push(series.label_index(&susceptibility_label(Wavevector::K0(a), c))?);
        }
    }
    Some((zero, k0))
}

fn mean_of(a: &ThermalAverages, idx: &[usize]) -> f64 {
    idx.iter().map(|&i| a.obs[i]).sum::<f64>() / idx.len() as f64
}

fn xi_over_l(chi0: f64, chik: f64, l: usize) -> Option<f64> {
    match correlation_length(chi0, chik, l).ok()? {
        CorrelationLength::Defined(x) => Some(x / l as f64),
        CorrelationLength::Undefined => None,
    }
}

/// `xi_L / L` from disorder-averaged susceptibilities, with a jackknife
/// error over samples (or over time blocks for a single sample).
pub fn xi_point(samples: &[RungSeries], linear_size: usize) -> Option<CurvePoint> {
    let (zero, k0) = chi_indices(samples.first()?)?;
    let avgs: Vec<ThermalAverages> = samples.iter().map(RungSeries::averages).collect();
    let ratio = |set: &[&ThermalAverages]| {
        let n = set.len() as f64;
        let c0 = set.iter().map(|a| mean_of(a, &zero)).sum::<f64>() / n;
        let ck = set.iter().map(|a| mean_of(a, &k0)).sum::<f64>() / n;
        xi_over_l(c0, ck, linear_size)
    };
    let all: Vec<&ThermalAverages> = avgs.iter().collect();
    let value = ratio(&all)?;
    let leave_out: Vec<f64> = if avgs.len() >= 2 {
        (0..avgs.len())
            .filter_map(|i| {
                let sub: Vec<&ThermalAverages> =
                    avgs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, a)| a).collect();
                ratio(&sub)
            })
            .collect()
    } else {
        let s = &samples[0];
        (0..s.blocks.len())
            .filter(|&b| s.blocks[b].count > 0)
            .filter_map(|b| {
                let a = s.averages_without(b);
                ratio(&[&a])
            })
            .collect()
    };
    let n = leave_out.len();
    let error = if n >= 2 {
        let m = leave_out.iter().sum::<f64>() / n as f64;
        (leave_out.iter().map(|v| (v - m).powi(2)).sum::<f64>() * (n - 1) as f64 / n as f64).sqrt()
    } else {
        0.0
    };
    Some(CurvePoint {
        temperature: samples[0].temperature,
        value,
        error,
    })
}

pub fn observable_rows(group: &SizeGroup) -> Result<Vec<ObservableRow>> {
    let mut rows = Vec::new();
    let n_dis = group.records.len();
    let max_l = group.records[0]
        .run
        .series
        .first()
        .map(|s| s.labels.iter().filter(|l| l.starts_with("wilson_")).count())
        .unwrap_or(0);
    for (r, &t) in group.temperatures.iter().enumerate() {
        let series = group.rung(r);
        let mut push = |name: String, est: Estimate| {
            rows.push(ObservableRow {
                p: group.p,
                linear_size: group.linear_size,
                temperature: t,
                observable: name,
                value: est.value,
                error: est.error,
                n_disorder: n_dis,
            })
        };
        let n = group.num_spins as f64;
        if series.samples.iter().all(|s| s.count() >= 1) {
            push("energy_per_spin".into(), series.estimate(|a| a.energy / n)?);
        }
        if series.samples.iter().all(|s| s.count() >= 2) {
            push("specific_heat".into(), specific_heat(&series, t, group.num_spins)?);
        }
        if let Some((zero, k0)) = series.samples.first().and_then(chi_indices) {
            let (z, k) = (zero.clone(), k0.clone());
            push("chi_0".into(), series.estimate(move |a| mean_of(a, &z))?);
            push("chi_k0".into(), series.estimate(move |a| mean_of(a, &k))?);
            if let Some(pt) = xi_point(&series.samples, group.linear_size) {
                push("xi_over_L".into(), Estimate::new(pt.value, pt.error));
            }
        }
        for l in 1..=max_l {
            let w = wilson_average(&series, l)?;
            push(format!("wilson_{l}"), Estimate::new(w.value, w.error));
        }
    }
    Ok(rows)
}

/// Wilson fit at one temperature of one disorder strength.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WilsonFitRow {
    pub p: f64,
    #[serde(rename = "T")]
    pub temperature: f64,
    pub fit: WilsonFit,
}

/// Outcome of one method at one disorder strength.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub p: f64,
    pub method: Method,
    #[serde(flatten)]
    pub result: OutcomeKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum OutcomeKind {
    Transition { estimate: CriticalPointEstimate },
    NoTransition,
    Inconclusive { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub p: f64,
    #[serde(rename = "L")]
    pub linear_size: usize,
    pub samples: usize,
    pub equilibrated_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSummary {
    pub campaign: String,
    pub model: ModelKind,
    pub methods: Vec<Method>,
    pub groups: Vec<GroupSummary>,
    pub missing_records: usize,
    pub outcomes: Vec<MethodOutcome>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub heat_peaks: Vec<(f64, SizePeak)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub xi_curves: Vec<(f64, SizeCurve)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub wilson_fits: Vec<WilsonFitRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_temperature_scan: Option<FixedTemperatureScan>,
    pub phase_diagram: Option<PhaseDiagram>,
}

impl AnalysisSummary {
    pub fn estimates(&self, method: Method) -> Vec<&CriticalPointEstimate> {
        self.outcomes
            .iter()
            .filter(|o| o.method == method)
            .filter_map(|o| match &o.result {
                OutcomeKind::Transition { estimate } => Some(estimate),
                _ => None,
            })
            .collect()
    }

    pub fn outcome(&self, p: f64, method: Method) -> Option<&OutcomeKind> {
        self.outcomes
            .iter()
            .find(|o| o.method == method && o.p == p)
            .map(|o| &o.result)
    }
}

#[derive(Clone, Debug, Default)]
pub struct AnalyzeOptions {
    /// Methods in priority order for the phase diagram.
    pub methods: Vec<Method>,
    pub fss: FssOptions,
    pub scan_temperature: Option<f64>,
}

impl AnalyzeOptions {
    pub fn for_campaign(c: &Campaign, methods: &[Method]) -> Self {
        let analysis = &c.manifest.config.analysis;
        let fss = FssOptions {
            exponent: analysis.fss_exponent,
            ..FssOptions::default()
        };
        let methods = if methods.is_empty() {
            default_methods(c.kind())
        } else {
            methods.to_vec()
        };
        Self {
            methods,
            fss,
            scan_temperature: analysis.scan_temperature,
        }
    }
}

pub fn default_methods(kind: ModelKind) -> Vec<Method> {
    match kind {
        ModelKind::FourBodyVertex => vec![Method::HeatPeakFss, Method::XiCrossing],
        _ => vec![Method::HeatPeakFss, Method::WilsonFit],
    }
}

fn inconclusive(p: f64, method: Method, reason: impl Into<String>) -> MethodOutcome {
    MethodOutcome {
        p,
        method,
        result: OutcomeKind::Inconclusive {
            reason: reason.into(),
        },
    }
}

fn heat_outcome(c: &Campaign, p: f64, opts: &FssOptions, peaks_out: &mut Vec<(f64, SizePeak)>) -> MethodOutcome {
    let mut peaks = Vec::new();
    for g in c.groups_at(p) {
        match heat_peak(&g.rung_samples(), g.num_spins) {
            Ok((est, _)) => {
                let pk = SizePeak {
                    linear_size: g.linear_size,
                    temperature: est.value,
                    error: est.error,
                };
                peaks_out.push((p, pk));
                peaks.push(pk);
            }
            Err(e) => log::warn!("no heat peak for L = {}, p = {p}: {e}", g.linear_size),
        }
    }
    match heat_peak_fss_with(&peaks, opts) {
        Ok(est) if !est.tc.is_finite() || !est.error.is_finite() => {
            inconclusive(p, Method::HeatPeakFss, "extrapolation is not finite")
        }
        Ok(est) if est.tc <= 0.0 => inconclusive(p, Method::HeatPeakFss, "extrapolated temperature is not positive"),
        Ok(est) => MethodOutcome {
            p,
            method: Method::HeatPeakFss,
            result: OutcomeKind::Transition {
                estimate: est.with_p(p),
            },
        },
        Err(e) => inconclusive(p, Method::HeatPeakFss, e.to_string()),
    }
}

fn xi_outcome(c: &Campaign, p: f64, curves_out: &mut Vec<(f64, SizeCurve)>) -> MethodOutcome {
    let mut curves = Vec::new();
    for g in c.groups_at(p) {
        let pts: Vec<CurvePoint> = (0..g.temperatures.len())
            .filter_map(|r| xi_point(&g.rung(r).samples, g.linear_size))
            .collect();
        let curve = SizeCurve {
            linear_size: g.linear_size,
            points: pts,
        };
        curves_out.push((p, curve.clone()));
        curves.push(curve);
    }
    let method = Method::XiCrossing;
    match crate::analysis::xi_crossing(&curves) {
        Ok(CrossingOutcome::Transition(est)) => MethodOutcome {
            p,
            method,
            result: OutcomeKind::Transition {
                estimate: est.with_p(p),
            },
        },
        Ok(CrossingOutcome::NoTransition) => MethodOutcome {
            p,
            method,
            result: OutcomeKind::NoTransition,
        },
        Ok(CrossingOutcome::Indeterminate) => inconclusive(p, method, "curves coincide"),
        Err(e) => inconclusive(p, method, e.to_string()),
    }
}

/// Wilson fit at every temperature common to all sizes at `p`.
pub fn wilson_fits_at(c: &Campaign, p: f64) -> Vec<WilsonFitRow> {
    let groups = c.groups_at(p);
    let Some(first) = groups.first() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for (r, &t) in first.temperatures.iter().enumerate() {
        let mut points = Vec::new();
        for g in &groups {
            let Some(rg) = g.temperatures.iter().position(|&x| x == t) else {
                continue;
            };
            let series = g.rung(rg);
            let max_l = g.linear_size / 2;
            let avgs: Vec<_> = (1..=max_l)
                .filter_map(|l| wilson_average(&series, l).ok())
                .collect();
            points.extend(wilson_points(&avgs));
        }
        let _ = r;
        if let Ok(fit) = wilson_fit(&points) {
            out.push(WilsonFitRow {
                p,
                temperature: t,
                fit,
            });
        }
    }
    out
}

fn wilson_outcome(p: f64, fits: &[WilsonFitRow]) -> MethodOutcome {
    let method = Method::WilsonFit;
    if fits.len() < 2 {
        return inconclusive(p, method, "fewer than two temperatures admit a Wilson fit");
    }
    let series: Vec<(f64, Estimate)> = fits.iter().map(|f| (f.temperature, f.fit.a)).collect();
    if let Some(cross) = wilson_zero_crossing(&series) {
        return MethodOutcome {
            p,
            method,
            result: OutcomeKind::Transition {
                estimate: CriticalPointEstimate {
                    p,
                    tc: cross.value,
                    error: cross.error,
                    method,
                    diagnostics: Default::default(),
                },
            },
        };
    }
    if fits.iter().all(|f| f.fit.confined()) {
        MethodOutcome {
            p,
            method,
            result: OutcomeKind::NoTransition,
        }
    } else {
        inconclusive(p, method, "no trailing run of significantly positive slope coefficients")
    }
}

fn nearest_rung(temps: &[f64], t: f64) -> Option<f64> {
    temps
        .iter()
        .copied()
        .min_by(|a, b| (a - t).abs().total_cmp(&(b - t).abs()))
}

/// Runs the requested methods on a loaded campaign.
pub fn analyze(c: &Campaign, opts: &AnalyzeOptions) -> Result<AnalysisSummary> {
    let mut outcomes = Vec::new();
    let mut heat_peaks = Vec::new();
    let mut xi_curves = Vec::new();
    let mut all_fits = Vec::new();
    for p in c.disorder_values() {
        let fits = if opts.methods.contains(&Method::WilsonFit) || opts.scan_temperature.is_some() {
            wilson_fits_at(c, p)
        } else {
            Vec::new()
        };
        for &m in &opts.methods {
            let o = match m {
                Method::HeatPeakFss => heat_outcome(c, p, &opts.fss, &mut heat_peaks),
                Method::XiCrossing => xi_outcome(c, p, &mut xi_curves),
                Method::WilsonFit => wilson_outcome(p, &fits),
            };
            outcomes.push(o);
        }
        all_fits.extend(fits);
    }

    let scan = match opts.scan_temperature {
        Some(t) => {
            let mut per_p: Vec<(f64, WilsonFit)> = Vec::new();
            for p in c.disorder_values() {
                let temps: Vec<f64> = all_fits.iter().filter(|f| f.p == p).map(|f| f.temperature).collect();
                if let Some(tn) = nearest_rung(&temps, t) {
                    if (tn - t).abs() > 1e-6 * t {
                        log::warn!("scan at T = {t}: using nearest rung T = {tn} for p = {p}");
                    }
                    let f = all_fits.iter().find(|f| f.p == p && f.temperature == tn).expect("found above");
                    per_p.push((p, f.fit.clone()));
                }
            }
            match fixed_temperature_scan(t, &per_p) {
                Ok(s) => Some(s),
                Err(e) => {
                    log::warn!("fixed-temperature scan failed: {e}");
                    None
                }
            }
        }
        None => None,
    };

    let mut points = Vec::new();
    for p in c.disorder_values() {
        for &m in &opts.methods {
            let o = outcomes.iter().find(|o| o.p == p && o.method == m).expect("every pair ran");
            match &o.result {
                OutcomeKind::Transition { estimate } => points.push(PhasePoint::Transition(estimate.clone())),
                OutcomeKind::NoTransition => points.push(PhasePoint::NoTransition { p, method: m }),
                OutcomeKind::Inconclusive { .. } => continue,
            }
            break;
        }
    }
    let mut diagram = if points.is_empty() {
        None
    } else {
        Some(assemble_phase_diagram(&points, c.kind())?)
    };
    if let Some(s) = &scan {
        let d = diagram.get_or_insert_with(|| PhaseDiagram {
            kind: c.kind(),
            points: Vec::new(),
            no_transition: Vec::new(),
            p_c_bracket: None,
            p_c: None,
            nishimori_samples: Vec::new(),
            fixed_temperature_scans: Vec::new(),
            notes: Vec::new(),
        });
        d.fixed_temperature_scans.push(s.clone());
    }

    Ok(AnalysisSummary {
        campaign: c.manifest.config.name.clone(),
        model: c.kind(),
        methods: opts.methods.clone(),
        groups: c
            .groups
            .iter()
            .map(|g| GroupSummary {
                p: g.p,
                linear_size: g.linear_size,
                samples: g.records.len(),
                equilibrated_fraction: g.equilibrated_fraction(),
            })
            .collect(),
        missing_records: c.missing,
        outcomes,
        heat_peaks,
        xi_curves,
        wilson_fits: all_fits,
        fixed_temperature_scan: scan,
        phase_diagram: diagram,
    })
}

/// Paths written by [`cmd_analyze`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOutputs {
    pub summary: PathBuf,
    pub observables: PathBuf,
    pub estimates: PathBuf,
    pub wilson_fits: PathBuf,
    pub phase_diagram: Option<PathBuf>,
}

/// Loads a campaign directory, analyzes it and writes the tables into
/// `<dir>/analysis/`.
pub fn cmd_analyze(dir: &Path, methods: &[Method]) -> Result<(AnalysisSummary, AnalysisOutputs)> {
    let c = Campaign::load(dir)?;
    let opts = AnalyzeOptions::for_campaign(&c, methods);
    let summary = analyze(&c, &opts)?;
    let out = dir.join(ANALYSIS_DIR);
    fs::create_dir_all(&out)?;

    let observables = out.join("observables.csv");
    let mut w = csv::Writer::from_writer(Vec::new());
    for g in &c.groups {
        for row in observable_rows(g)? {
            w.serialize(row)?;
        }
    }
    write_atomic(&observables, &w.into_inner().map_err(|e| Error::Io(e.into_error()))?)?;

    let estimates = out.join("estimates.csv");
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["p", "method", "outcome", "Tc", "err", "exponent", "chi2", "dof", "note"])?;
    for o in &summary.outcomes {
        let (kind, tc, err, b, chi2, dof, note) = match &o.result {
            OutcomeKind::Transition { estimate: e } => (
                "transition",
                e.tc.to_string(),
                e.error.to_string(),
                e.diagnostics.exponent.map(|x| x.to_string()).unwrap_or_default(),
                e.diagnostics.chi2.map(|x| x.to_string()).unwrap_or_default(),
                e.diagnostics.dof.map(|x| x.to_string()).unwrap_or_default(),
                e.diagnostics.notes.join("; "),
            ),
            OutcomeKind::NoTransition => (
                "no_transition",
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ),
            OutcomeKind::Inconclusive { reason } => (
                "inconclusive",
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                reason.clone(),
            ),
        };
        w.write_record([o.p.to_string(), o.method.name().to_string(), kind.into(), tc, err, b, chi2, dof, note])?;
    }
    write_atomic(&estimates, &w.into_inner().map_err(|e| Error::Io(e.into_error()))?)?;

    let wilson_fits = out.join("wilson_fits.csv");
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["p", "T", "a", "a_err", "b", "b_err", "c", "c_err", "chi2", "dof", "points"])?;
    for f in &summary.wilson_fits {
        w.write_record([
            f.p.to_string(),
            f.temperature.to_string(),
            f.fit.a.value.to_string(),
            f.fit.a.error.to_string(),
            f.fit.b.value.to_string(),
            f.fit.b.error.to_string(),
            f.fit.c.value.to_string(),
            f.fit.c.error.to_string(),
            f.fit.chi2.to_string(),
            f.fit.dof.to_string(),
            f.fit.points.to_string(),
        ])?;
    }
    write_atomic(&wilson_fits, &w.into_inner().map_err(|e| Error::Io(e.into_error()))?)?;

    let phase_diagram = match &summary.phase_diagram {
        Some(d) => {
            let path = out.join("phase_diagram.json");
            write_atomic(&path, d.to_json()?.as_bytes())?;
            Some(path)
        }
        None => None,
    };
    let summary_path = out.join("summary.json");
    write_atomic(&summary_path, serde_json::to_string_pretty(&summary)?.as_bytes())?;
    Ok((
        summary,
        AnalysisOutputs {
            summary: summary_path,
            observables,
            estimates,
            wilson_fits,
            phase_diagram,
        },
    ))
}
