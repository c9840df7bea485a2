//! Runs the smoke preset into a temporary directory, analyzes it and
//! renders the report, as the CLI does.
use rcim::campaign::{cmd_analyze, cmd_report, preset, run_in, RunOptions};

fn main() -> rcim::Result<()> {
    let cfg = preset("smoke")?;
    let dir = std::env::temp_dir().join("rcim-example-campaign");
    let _ = std::fs::remove_dir_all(&dir);
    let summary = run_in(&cfg, &dir, RunOptions::default())?;
    println!("{} tasks, {} not equilibrated", summary.tasks, summary.not_equilibrated.len());
    let (analysis, outputs) = cmd_analyze(&dir, &[])?;
    println!("outcomes: {:#?}", analysis.outcomes);
    println!("tables in {}", outputs.observables.parent().expect("analysis dir").display());
    println!("report: {}", cmd_report(&dir)?.display());
    Ok(())
}
