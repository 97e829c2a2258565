//! Experiment harness: seeded scene grid, parallel rollouts, aggregation and
//! report files.
//!
//! Scene `i` of the cell with `c` occluders is generated from a seed hashed
//! from `(base_seed, c, i, attempt)`, so every policy in a cell faces the
//! same scenes and any cell can be reproduced on its own. Aggregation sorts
//! by `(occluders, policy, scene_index)` first, which makes the reports
//! independent of scheduling and worker count.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::generate::{generate_scene, GenerationConfig, GenerationError};
use crate::policy::{PolicyConfig, PolicyError};
use crate::render::render_depth;
use crate::scene::{Scene, ShelfSpec};
use crate::sim::{rollout, RolloutConfig, RolloutRecord, SimError, TerminationReason, ViolationCounts};

/// A published reference cell (Uniform at 8 occluders: success rate, mean
/// steps, step standard deviation), shown next to our own for orientation.
pub const REFERENCE_UNIFORM_AT_8: (f64, f64, f64) = (0.46, 3.61, 2.75);

pub const DEFAULT_POLICIES: [&str; 5] = ["uniform", "dar", "der1", "der2", "der3"];

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid benchmark config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("rollout of scene {scene_index} ({occluders} occluders, {policy}) failed: {source}")]
    Rollout {
        occluders: usize,
        scene_index: usize,
        policy: String,
        #[source]
        source: SimError,
    },
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("rollout log is inconsistent: {0}")]
    Log(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub base_seed: u64,
    pub scenes_per_cell: usize,
    pub occluder_counts: Vec<usize>,
    pub policies: Vec<String>,
    pub max_steps: usize,
    pub reveal_threshold: f64,
    /// DER search node cap per decision.
    pub node_budget: usize,
    /// Extra generation attempts, each with a fresh derived seed, before a
    /// scene index is excluded.
    pub regeneration_retries: usize,
    pub shelf: ShelfSpec,
    /// Scene sampling; `seed` and `n_occluders` are overridden per scene.
    pub generation: GenerationConfig,
    /// Rollout parameters; `max_steps` and `reveal_threshold` are overridden
    /// by the fields above.
    pub rollout: RolloutConfig,
    /// Worker threads; `None` uses every core. Does not change results.
    pub workers: Option<usize>,
    /// Write the initial observation of each scene as a PGM.
    pub dump_images: bool,
    pub out_dir: Option<PathBuf>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            base_seed: 0,
            scenes_per_cell: 200,
            occluder_counts: vec![2, 4, 6, 8],
            policies: DEFAULT_POLICIES.iter().map(|s| s.to_string()).collect(),
            max_steps: 10,
            reveal_threshold: 0.9,
            node_budget: crate::policy::DEFAULT_NODE_BUDGET,
            regeneration_retries: 3,
            shelf: ShelfSpec::default(),
            generation: GenerationConfig::default(),
            rollout: RolloutConfig::default(),
            workers: None,
            dump_images: false,
            out_dir: None,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<Vec<PolicyConfig>, BenchError> {
        let bad = |m: &str| Err(BenchError::InvalidConfig(m.to_string()));
        if self.scenes_per_cell == 0 {
            return bad("scenes_per_cell must be positive");
        }
        if self.occluder_counts.is_empty() || self.policies.is_empty() {
            return bad("need at least one occluder count and one policy");
        }
        if !(self.reveal_threshold > 0.0 && self.reveal_threshold <= 1.0) {
            return bad("reveal_threshold must lie in (0, 1]");
        }
        if self.workers == Some(0) {
            return bad("workers must be positive");
        }
        if !self.shelf.is_valid() {
            return bad("shelf dimensions must be positive");
        }
        self.policies
            .iter()
            .map(|p| Ok(p.parse::<PolicyConfig>()?.with_node_budget(self.node_budget)))
            .collect()
    }

    /// Rollout parameters with the top-level overrides applied.
    pub fn rollout_config(&self) -> RolloutConfig {
        RolloutConfig { max_steps: self.max_steps, reveal_threshold: self.reveal_threshold, ..self.rollout.clone() }
    }

    /// Hex SHA-256 over every field that can change results (worker count,
    /// image dumping and the output path are left out).
    pub fn digest(&self) -> String {
        let canonical = BenchConfig { workers: None, dump_images: false, out_dir: None, ..self.clone() };
        let text = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

/// Generation seed for one attempt at one scene.
pub fn scene_seed(base_seed: u64, occluders: usize, scene_index: usize, attempt: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(b"shelf-search/scene");
    h.update(base_seed.to_le_bytes());
    h.update((occluders as u64).to_le_bytes());
    h.update((scene_index as u64).to_le_bytes());
    h.update((attempt as u64).to_le_bytes());
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("digest has 32 bytes"))
}

/// One logged rollout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutLog {
    pub occluders: usize,
    pub policy: String,
    pub scene_index: usize,
    pub scene_seed: u64,
    pub record: RolloutRecord,
}

/// A scene index dropped because every generation attempt failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub occluders: usize,
    pub scene_index: usize,
    pub attempts: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub occluders: usize,
    pub policy: String,
    pub n_scenes: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Over successful rollouts only; `None` when nothing succeeded.
    pub mean_steps: Option<f64>,
    /// Population standard deviation over successful rollouts.
    pub std_steps: Option<f64>,
    /// Over all rollouts, a failure counting as the step budget.
    pub mean_steps_all: Option<f64>,
    pub n_failures_no_action: usize,
    pub n_failures_budget: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub config_digest: String,
    pub cells: Vec<CellStats>,
    pub exclusions: Vec<Exclusion>,
    pub violations: ViolationCounts,
    pub wall_clock_seconds: f64,
}

impl BenchReport {
    pub fn cell(&self, occluders: usize, policy: &str) -> Option<&CellStats> {
        self.cells.iter().find(|c| c.occluders == occluders && c.policy == policy)
    }
}

/// Everything a run produced.
#[derive(Debug, Clone)]
pub struct BenchRun {
    pub report: BenchReport,
    pub logs: Vec<RolloutLog>,
}

/// `(success rate, mean steps, std steps)` over `records`; the step
/// statistics cover successes only and are zero when there are none.
pub fn summarize(records: &[RolloutRecord]) -> (f64, f64, f64) {
    let steps: Vec<f64> = records.iter().filter(|r| r.success).map(|r| r.steps_taken as f64).collect();
    let rate = if records.is_empty() { 0.0 } else { steps.len() as f64 / records.len() as f64 };
    match mean_std(&steps) {
        Some((m, s)) => (rate, m, s),
        None => (rate, 0.0, 0.0),
    }
}

fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

fn cell_stats(occluders: usize, policy: &str, records: &[&RolloutRecord], max_steps: usize) -> CellStats {
    let ok: Vec<f64> = records.iter().filter(|r| r.success).map(|r| r.steps_taken as f64).collect();
    let all: Vec<f64> = records
        .iter()
        .map(|r| if r.success { r.steps_taken as f64 } else { max_steps as f64 })
        .collect();
    let count = |t: TerminationReason| records.iter().filter(|r| r.termination_reason == t).count();
    let ms = mean_std(&ok);
    CellStats {
        occluders,
        policy: policy.to_string(),
        n_scenes: records.len(),
        successes: ok.len(),
        success_rate: if records.is_empty() { 0.0 } else { ok.len() as f64 / records.len() as f64 },
        mean_steps: ms.map(|m| m.0),
        std_steps: ms.map(|m| m.1),
        mean_steps_all: mean_std(&all).map(|m| m.0),
        n_failures_no_action: count(TerminationReason::NoFeasibleAction),
        n_failures_budget: count(TerminationReason::StepBudget),
    }
}

/// Per-cell statistics from raw logs, in `(occluders, policy)` order with
/// policies in config order.
pub fn aggregate(cfg: &BenchConfig, logs: &[RolloutLog]) -> Vec<CellStats> {
    let mut cells = Vec::new();
    for &c in &cfg.occluder_counts {
        for p in &cfg.policies {
            let mut rows: Vec<&RolloutLog> = logs.iter().filter(|l| l.occluders == c && &l.policy == p).collect();
            rows.sort_by_key(|l| l.scene_index);
            let records: Vec<&RolloutRecord> = rows.iter().map(|l| &l.record).collect();
            cells.push(cell_stats(c, p, &records, cfg.max_steps));
        }
    }
    cells
}

fn total_violations(logs: &[RolloutLog]) -> ViolationCounts {
    let mut v = ViolationCounts::default();
    for l in logs {
        v.add(&l.record.violations);
    }
    v
}

/// Scene `index` of the cell with `occluders` objects, retrying generation
/// with fresh derived seeds.
pub fn cell_scene(cfg: &BenchConfig, occluders: usize, index: usize) -> Result<(u64, Scene), Exclusion> {
    let mut last: Option<GenerationError> = None;
    let attempts = cfg.regeneration_retries + 1;
    for attempt in 0..attempts {
        let seed = scene_seed(cfg.base_seed, occluders, index, attempt);
        let gen = GenerationConfig { seed, n_occluders: occluders, ..cfg.generation.clone() };
        match generate_scene(&gen, &cfg.shelf) {
            Ok(scene) => return Ok((seed, scene)),
            Err(e) => last = Some(e),
        }
    }
    Err(Exclusion {
        occluders,
        scene_index: index,
        attempts,
        error: last.map_or_else(String::new, |e| e.to_string()),
    })
}

enum Job {
    Done(Vec<RolloutLog>),
    Excluded(Exclusion),
}

/// Runs the grid and, when `out_dir` is set, writes the report files.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchRun, BenchError> {
    let policies = cfg.validate()?;
    let started = Instant::now();
    let rcfg = cfg.rollout_config();
    let jobs: Vec<(usize, usize)> = cfg
        .occluder_counts
        .iter()
        .flat_map(|&c| (0..cfg.scenes_per_cell).map(move |i| (c, i)))
        .collect();
    let image_dir = match (&cfg.out_dir, cfg.dump_images) {
        (Some(d), true) => {
            let d = d.join("images");
            fs::create_dir_all(&d).map_err(|source| BenchError::Io { path: d.clone(), source })?;
            Some(d)
        }
        _ => None,
    };

    let run_job = |&(c, i): &(usize, usize)| -> Result<Job, BenchError> {
        let (seed, scene) = match cell_scene(cfg, c, i) {
            Ok(v) => v,
            Err(x) => return Ok(Job::Excluded(x)),
        };
        if let Some(dir) = &image_dir {
            let r = render_depth(&scene, rcfg.image_width_px, rcfg.image_height_px).map_err(|e| BenchError::Rollout {
                occluders: c,
                scene_index: i,
                policy: String::new(),
                source: e.into(),
            })?;
            let path = dir.join(format!("c{c}_s{i:04}.pgm"));
            fs::write(&path, r.depth.to_pgm()).map_err(|source| BenchError::Io { path, source })?;
        }
        let mut out = Vec::with_capacity(policies.len());
        for p in &policies {
            let record = rollout(&scene, p, &rcfg).map_err(|source| BenchError::Rollout {
                occluders: c,
                scene_index: i,
                policy: p.to_string(),
                source,
            })?;
            out.push(RolloutLog { occluders: c, policy: p.to_string(), scene_index: i, scene_seed: seed, record });
        }
        Ok(Job::Done(out))
    };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| BenchError::Pool(e.to_string()))?;
    let results: Vec<Result<Job, BenchError>> = pool.install(|| jobs.par_iter().map(run_job).collect());

    let mut logs = Vec::new();
    let mut exclusions = Vec::new();
    for r in results {
        match r? {
            Job::Done(l) => logs.extend(l),
            Job::Excluded(x) => exclusions.push(x),
        }
    }
    let order = |p: &str| cfg.policies.iter().position(|q| q == p).unwrap_or(usize::MAX);
    logs.sort_by(|a, b| {
        (a.occluders, order(&a.policy), a.scene_index).cmp(&(b.occluders, order(&b.policy), b.scene_index))
    });
    exclusions.sort_by_key(|x| (x.occluders, x.scene_index));

    let report = BenchReport {
        config: cfg.clone(),
        config_digest: cfg.digest(),
        cells: aggregate(cfg, &logs),
        exclusions,
        violations: total_violations(&logs),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    let run = BenchRun { report, logs };
    if let Some(dir) = &cfg.out_dir {
        write_outputs(dir, &run)?;
    }
    Ok(run)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io { path: path.to_path_buf(), source }
}

/// The CSV report as text.
pub fn report_csv(report: &BenchReport) -> Result<String, BenchError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "occluders",
        "policy",
        "success_rate",
        "mean_steps",
        "std_steps",
        "n_scenes",
        "n_failures_no_action",
        "n_failures_budget",
    ])?;
    let opt = |v: Option<f64>| v.map_or_else(String::new, |v| format!("{v:.6}"));
    for c in &report.cells {
        w.write_record([
            c.occluders.to_string(),
            c.policy.clone(),
            format!("{:.6}", c.success_rate),
            opt(c.mean_steps),
            opt(c.std_steps),
            c.n_scenes.to_string(),
            c.n_failures_no_action.to_string(),
            c.n_failures_budget.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| BenchError::Log(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes `report.csv`, `report.json`, `rollouts.jsonl` and `timing.json`.
pub fn write_outputs(dir: &Path, run: &BenchRun) -> Result<(), BenchError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    emit_report(dir, &run.report)?;
    let mut lines = String::new();
    for l in &run.logs {
        lines.push_str(&serde_json::to_string(l)?);
        lines.push('\n');
    }
    let p = dir.join("rollouts.jsonl");
    fs::write(&p, lines).map_err(io_err(&p))?;
    let timing = serde_json::json!({
        "wall_clock_seconds": run.report.wall_clock_seconds,
        "rollouts": run.logs.len(),
        "workers": run.report.config.workers,
    });
    let p = dir.join("timing.json");
    fs::write(&p, serde_json::to_string_pretty(&timing)?).map_err(io_err(&p))?;
    Ok(())
}

/// Writes `report.csv` and the lossless `report.json`.
pub fn emit_report(dir: &Path, report: &BenchReport) -> Result<(), BenchError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let p = dir.join("report.csv");
    fs::write(&p, report_csv(report)?).map_err(io_err(&p))?;
    let p = dir.join("report.json");
    fs::write(&p, serde_json::to_string_pretty(report)?).map_err(io_err(&p))?;
    Ok(())
}

pub fn load_report(path: &Path) -> Result<BenchReport, BenchError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn load_logs(path: &Path) -> Result<Vec<RolloutLog>, BenchError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(BenchError::from))
        .collect()
}

/// Rebuilds a report from a rollout log, checking that within each cell all
/// policies saw the same scenes.
pub fn reaggregate(cfg: &BenchConfig, logs: &[RolloutLog]) -> Result<BenchReport, BenchError> {
    for l in logs {
        let twin = logs
            .iter()
            .find(|o| o.occluders == l.occluders && o.scene_index == l.scene_index && o.policy != l.policy);
        if let Some(o) = twin {
            if o.record.scene_digest != l.record.scene_digest {
                return Err(BenchError::Log(format!(
                    "scene {} at {} occluders differs between {} and {}",
                    l.scene_index, l.occluders, l.policy, o.policy
                )));
            }
        }
    }
    Ok(BenchReport {
        config: cfg.clone(),
        config_digest: cfg.digest(),
        cells: aggregate(cfg, logs),
        exclusions: Vec::new(),
        violations: total_violations(logs),
        wall_clock_seconds: 0.0,
    })
}
