use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use shelf_search::bench::{
    cell_scene, load_logs, load_report, reaggregate, run_benchmark, write_outputs, BenchConfig, BenchReport, BenchRun,
    REFERENCE_UNIFORM_AT_8,
};
use shelf_search::sim::{rollout_observed, RolloutConfig};
use shelf_search::{load_scene, save_scene, PolicyConfig};

#[derive(Parser)]
#[command(name = "shelf-search", version, about = "Mechanical search on a laterally accessed shelf")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate benchmark scenes as JSON files.
    Gen(GenArgs),
    /// Run one policy on one scene and log every step.
    Rollout(RolloutArgs),
    /// Run the benchmark grid.
    Bench(BenchArgs),
    /// Rebuild a report from a rollout log.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Occluder counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2,4,6,8")]
    occluders: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    scenes_per_cell: usize,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct RolloutArgs {
    /// Scene JSON, as written by `gen`.
    #[arg(long)]
    scene: PathBuf,
    #[arg(long, default_value = "dar")]
    policy: String,
    #[arg(long, default_value_t = 10)]
    max_steps: usize,
    #[arg(long, default_value_t = 0.9)]
    reveal_threshold: f64,
    /// Directory for per-step depth and belief PGMs.
    #[arg(long)]
    dump_images: Option<PathBuf>,
    /// Write the full rollout record here as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// JSON config with BenchConfig field names; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    scenes_per_cell: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    occluders: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    policies: Option<Vec<String>>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    reveal_threshold: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    dump_images: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// `rollouts.jsonl` from a bench run.
    #[arg(long)]
    log: PathBuf,
    /// `report.json` whose embedded config describes the grid.
    #[arg(long)]
    config: PathBuf,
    /// Write `report.csv` and `report.json` here instead of printing CSV.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Rollout(a) => single_rollout(a),
        Command::Bench(a) => bench(a),
        Command::Report(a) => report(a),
    }
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn gen(a: GenArgs) -> Result<()> {
    let cfg = BenchConfig {
        base_seed: a.seed,
        occluder_counts: a.occluders,
        scenes_per_cell: a.scenes_per_cell,
        ..Default::default()
    };
    cfg.validate()?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    for &c in &cfg.occluder_counts {
        for i in 0..cfg.scenes_per_cell {
            match cell_scene(&cfg, c, i) {
                Ok((_, scene)) => write(&a.out_dir.join(format!("scene_c{c}_s{i:04}.json")), save_scene(&scene))?,
                Err(x) => eprintln!("skipped scene {i} at {c} occluders: {}", x.error),
            }
        }
    }
    Ok(())
}

fn single_rollout(a: RolloutArgs) -> Result<()> {
    let text = fs::read_to_string(&a.scene).with_context(|| format!("reading {}", a.scene.display()))?;
    let scene = load_scene(&text)?;
    let policy: PolicyConfig = a.policy.parse()?;
    let cfg = RolloutConfig { max_steps: a.max_steps, reveal_threshold: a.reveal_threshold, ..Default::default() };
    if !(cfg.reveal_threshold > 0.0 && cfg.reveal_threshold <= 1.0) {
        bail!("--reveal-threshold must lie in (0, 1]");
    }
    if let Some(dir) = &a.dump_images {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut dump_error = None;
    let record = rollout_observed(&scene, &policy, &cfg, |view| {
        let Some(dir) = &a.dump_images else { return };
        let mut files = vec![(format!("step{:02}_depth.pgm", view.step), view.observation.to_pgm())];
        if let Some(b) = view.belief {
            files.push((format!("step{:02}_belief.pgm", view.step), b.history_min.to_pgm()));
        }
        for (name, bytes) in files {
            if let Err(e) = write(&dir.join(name), bytes) {
                dump_error.get_or_insert(e);
            }
        }
    })?;
    if let Some(e) = dump_error {
        return Err(e);
    }
    for s in &record.steps {
        println!("{}", serde_json::to_string(s)?);
    }
    println!(
        "{} after {} steps ({:?})",
        if record.success { "revealed" } else { "not revealed" },
        record.steps_taken,
        record.termination_reason
    );
    if let Some(out) = &a.out {
        write(out, serde_json::to_string_pretty(&record)?)?;
    }
    Ok(())
}

fn bench_config(a: &BenchArgs) -> Result<BenchConfig> {
    let mut cfg = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => BenchConfig::default(),
    };
    if let Some(v) = a.seed {
        cfg.base_seed = v;
    }
    if let Some(v) = a.scenes_per_cell {
        cfg.scenes_per_cell = v;
    }
    if let Some(v) = &a.occluders {
        cfg.occluder_counts = v.clone();
    }
    if let Some(v) = &a.policies {
        cfg.policies = v.clone();
    }
    if let Some(v) = a.max_steps {
        cfg.max_steps = v;
    }
    if let Some(v) = a.reveal_threshold {
        cfg.reveal_threshold = v;
    }
    if a.out_dir.is_some() {
        cfg.out_dir = a.out_dir.clone();
    }
    if a.workers.is_some() {
        cfg.workers = a.workers;
    }
    cfg.dump_images |= a.dump_images;
    Ok(cfg)
}

fn print_table(report: &BenchReport) {
    println!("{:>9} {:>8} {:>8} {:>10} {:>9} {:>10} {:>8}", "occluders", "policy", "success", "mean_steps", "std_steps", "no_action", "budget");
    let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"));
    for c in &report.cells {
        println!(
            "{:>9} {:>8} {:>7.1}% {:>10} {:>9} {:>10} {:>8}",
            c.occluders,
            c.policy,
            100.0 * c.success_rate,
            opt(c.mean_steps),
            opt(c.std_steps),
            c.n_failures_no_action,
            c.n_failures_budget
        );
    }
    if let Some(c) = report.cell(8, "uniform") {
        let (r, m, s) = REFERENCE_UNIFORM_AT_8;
        println!(
            "reference uniform@8: {:.0}% / {m:.2} / {s:.2}; this run: {:.1}% / {} / {}",
            100.0 * r,
            100.0 * c.success_rate,
            opt(c.mean_steps),
            opt(c.std_steps)
        );
    }
    let v = &report.violations;
    println!(
        "violations: interpenetration {}, containment {}, target motion {}; excluded scenes {}",
        v.interpenetration,
        v.containment,
        v.target_motion,
        report.exclusions.len()
    );
}

fn bench(a: BenchArgs) -> Result<()> {
    let cfg = bench_config(&a)?;
    let run: BenchRun = run_benchmark(&cfg)?;
    print_table(&run.report);
    println!("config digest {}; {:.1} s", run.report.config_digest, run.report.wall_clock_seconds);
    if cfg.out_dir.is_none() {
        eprintln!("no --out-dir given; nothing written");
    }
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    let base = load_report(&a.config)?;
    let logs = load_logs(&a.log)?;
    let mut rebuilt = reaggregate(&base.config, &logs)?;
    rebuilt.exclusions = base.exclusions.clone();
    match &a.out_dir {
        Some(dir) => {
            let run = BenchRun { report: rebuilt, logs };
            write_outputs(dir, &run)?;
            print_table(&run.report);
        }
        None => print!("{}", shelf_search::bench::report_csv(&rebuilt)?),
    }
    Ok(())
}
