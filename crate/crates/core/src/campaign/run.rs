//! Campaign execution: one parallel-tempering run per (size, p, disorder
//! sample), persisted as JSON records with resumable checkpoints.

use super::config::{CampaignConfig, DisorderRow};
use crate::error::{Error, Result};
use crate::mc::{adapt_ladder, build_ladder, LadderMode, PtSimulation, RunRecord, RunSchedule};
use crate::models::{ModelInstance, ModelKind};
use crate::observables::ObservablePlan;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Deterministic 64-bit seed for one stream of one task.
pub fn derive_seed(master: u64, kind: ModelKind, linear_size: usize, p: f64, sample: usize, stream: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(kind.name().as_bytes());
    h.update((linear_size as u64).to_le_bytes());
    h.update(p.to_bits().to_le_bytes());
    h.update((sample as u64).to_le_bytes());
    h.update(stream.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest is 32 bytes"))
}

pub fn group_dir_name(linear_size: usize, p: f64) -> String {
    format!("L{linear_size}_p{p:.4}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub linear_size: usize,
    pub p: f64,
    pub sample: usize,
    pub disorder_seed: u64,
    pub mc_seed: u64,
    /// Record path relative to the campaign directory.
    pub record: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: CampaignConfig,
    pub tasks: Vec<TaskSpec>,
}

/// Everything persisted for one disorder sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub model: ModelKind,
    pub linear_size: usize,
    pub p: f64,
    pub sample: usize,
    pub disorder_seed: u64,
    pub negative_terms: usize,
    pub run: RunRecord,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub directory: PathBuf,
    pub tasks: usize,
    pub completed: usize,
    pub skipped: usize,
    /// Records whose equilibration test failed.
    pub not_equilibrated: Vec<String>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub resume: bool,
    /// Overrides the configured worker count.
    pub workers: Option<usize>,
}

pub fn plan_tasks(cfg: &CampaignConfig) -> Vec<TaskSpec> {
    let mut tasks = Vec::new();
    for row in &cfg.rows {
        for l in cfg.sizes_for(row) {
            for s in 0..row.samples {
                tasks.push(TaskSpec {
                    linear_size: l,
                    p: row.p,
                    sample: s,
                    disorder_seed: derive_seed(cfg.master_seed, cfg.model, l, row.p, s, "disorder"),
                    mc_seed: derive_seed(cfg.master_seed, cfg.model, l, row.p, s, "monte-carlo"),
                    record: format!("{}/sample_{s:04}.json", group_dir_name(l, row.p)),
                });
            }
        }
    }
    tasks
}

/// Writes `bytes` to `path` through a temporary file and a rename, so a
/// crash never leaves a truncated record.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    if !path.exists() {
        return Err(Error::InsufficientData(format!(
            "{} holds no campaign manifest",
            dir.display()
        )));
    }
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn read_record(path: &Path) -> Result<SampleRecord> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Runs (or resumes) a campaign into `cfg.run_dir()`.
pub fn cmd_run(cfg: &CampaignConfig, options: RunOptions) -> Result<RunSummary> {
    cfg.validate()?;
    let dir = cfg.run_dir();
    run_in(cfg, &dir, options)
}

/// Runs a campaign into an explicit directory.
pub fn run_in(cfg: &CampaignConfig, dir: &Path, options: RunOptions) -> Result<RunSummary> {
    cfg.validate()?;
    fs::create_dir_all(dir)?;
    let tasks = plan_tasks(cfg);
    let manifest_path = dir.join(MANIFEST_FILE);
    if manifest_path.exists() {
        if !options.resume {
            return Err(Error::Config(format!(
                "{} already holds a campaign; pass --resume to continue it",
                dir.display()
            )));
        }
        let old = read_manifest(dir)?;
        if !old.config.compatible_with(cfg) {
            return Err(Error::Config(
                "configuration differs from the campaign on disk beyond sample counts".into(),
            ));
        }
    }
    let manifest = Manifest {
        schema_version: cfg.schema_version,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        tasks: tasks.clone(),
    };
    write_atomic(&manifest_path, serde_json::to_string_pretty(&manifest)?.as_bytes())?;

    let workers = options.workers.unwrap_or(cfg.workers).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot build worker pool: {e}")))?;
    log::info!(
        "campaign {}: {} tasks on {workers} worker(s) in {}",
        cfg.name,
        tasks.len(),
        dir.display()
    );
    let outcomes: Vec<Result<(bool, bool)>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|t| {
                let row = cfg
                    .rows
                    .iter()
                    .find(|r| r.p == t.p)
                    .expect("tasks come from rows");
                run_task(cfg, row, t, dir, options.resume)
            })
            .collect()
    });
    let mut summary = RunSummary {
        directory: dir.to_path_buf(),
        tasks: tasks.len(),
        ..Default::default()
    };
    for (t, o) in tasks.iter().zip(outcomes) {
        let (skipped, equilibrated) = o?;
        if skipped {
            summary.skipped += 1;
        } else {
            summary.completed += 1;
        }
        if !equilibrated {
            summary.not_equilibrated.push(t.record.clone());
        }
    }
    if !summary.not_equilibrated.is_empty() {
        log::warn!(
            "{} of {} records failed the equilibration test",
            summary.not_equilibrated.len(),
            summary.tasks
        );
    }
    Ok(summary)
}

/// Returns `(skipped, equilibrated)`.
fn run_task(cfg: &CampaignConfig, row: &DisorderRow, task: &TaskSpec, dir: &Path, resume: bool) -> Result<(bool, bool)> {
    let record_path = dir.join(&task.record);
    if let Some(parent) = record_path.parent() {
        fs::create_dir_all(parent)?;
    }
    if record_path.exists() {
        let rec = read_record(&record_path)?;
        return Ok((true, rec.run.equilibration.equilibrated));
    }
    let inst = ModelInstance::build(cfg.model, task.linear_size, task.p, task.disorder_seed)?;
    let plan = ObservablePlan::for_instance(&inst).with_histograms(cfg.measurement.histograms);
    let schedule = cfg.schedule(row, task.mc_seed);
    let checkpoint = record_path.with_extension("ckpt");

    let mut sim = if resume && checkpoint.exists() {
        log::info!("resuming {} from checkpoint", task.record);
        PtSimulation::restore(&inst.model, &plan, &checkpoint)?
    } else {
        let mut ladder = build_ladder(row.t_min, row.t_max, row.rungs, cfg.ladder)?;
        if cfg.ladder == LadderMode::Adaptive {
            let pilot = RunSchedule::new(row.tau.saturating_sub(3).max(6), task.mc_seed ^ 0xada9);
            ladder = adapt_ladder(&inst.model, &ladder, &pilot, 3)?;
        }
        PtSimulation::new(&inst.model, &plan, &ladder, &schedule)?
    };
    sim.run_to_end(Some(&checkpoint))?;
    let run = sim.finish();
    let equilibrated = run.equilibration.equilibrated;
    let record = SampleRecord {
        model: cfg.model,
        linear_size: task.linear_size,
        p: task.p,
        sample: task.sample,
        disorder_seed: task.disorder_seed,
        negative_terms: inst.model.negative_terms(),
        run,
    };
    let mut csv = Vec::new();
    record.run.write_bins_csv(&mut csv)?;
    write_atomic(&record_path.with_extension("bins.csv"), &csv)?;
    write_atomic(&record_path, serde_json::to_string(&record)?.as_bytes())?;
    if checkpoint.exists() {
        fs::remove_file(&checkpoint)?;
    }
    log::info!(
        "finished {} (equilibrated: {equilibrated})",
        task.record
    );
    Ok((false, equilibrated))
}
