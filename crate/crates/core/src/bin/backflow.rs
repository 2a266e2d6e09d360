use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use backflow::distinguishability::{blp_integral, trajectory};
use backflow::divisibility::scan_cp_divisibility;
use backflow::dynamics::{ModelSpec, TimeGrid};
use backflow::scenario::{run_pipeline, write_outputs, ScenarioConfig};
use backflow::witness::{construct_witness_with_ancilla, separable_witness, verify_witness};
use backflow::{Error, Result};

/// CP-divisibility scans and information-backflow witnesses for quantum
/// dynamical maps.
#[derive(Parser, Debug)]
#[command(name = "backflow", version, about)]
struct Cli {
    /// Scenario file (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides the scenario file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Time grid as t0:t1:n; overrides the scenario file.
    #[arg(long, global = true)]
    grid: Option<TimeGrid>,

    /// CP tolerance on the minimum Choi eigenvalue.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Seed for sampled positivity checks.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full pipeline: scan, witnesses, trajectories, report.
    Run,
    /// CP-divisibility scan only.
    Scan,
    /// Build a witness pair at s and verify it at t.
    Witness {
        #[arg(long)]
        s: f64,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        eta: Option<f64>,
        /// Also derive a certified separable pair.
        #[arg(long)]
        separable: bool,
    },
    /// Trace-norm trajectory of the witness pair anchored at s.
    Trajectory {
        #[arg(long)]
        s: f64,
        #[arg(long)]
        eta: Option<f64>,
    },
    /// List the model zoo.
    Models,
    /// Parse and check a scenario file without running it.
    Validate,
}

fn load_config(cli: &Cli) -> Result<ScenarioConfig> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::Config("--config is required for this subcommand".into()))?;
    let mut cfg = ScenarioConfig::load(path)?;
    if let Some(g) = cli.grid {
        cfg.grid = g;
    }
    if let Some(t) = cli.tol {
        cfg.tolerances.cp = t;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output.dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn configure_threads() {
    if let Some(n) = std::env::var("BACKFLOW_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Models => {
            for info in ModelSpec::catalog() {
                let params: Vec<String> = info.params.iter().map(|(n, d)| format!("{n}: {d}")).collect();
                println!(
                    "{:<30} generator={:<5} {}",
                    info.id,
                    info.generator,
                    if params.is_empty() { "-".to_string() } else { params.join("; ") }
                );
                println!("{:<30} {}", "", info.description);
            }
            Ok(0)
        }
        Command::Validate => {
            let cfg = load_config(cli)?;
            let f = cfg.family()?;
            println!("ok: {} on grid {}", f.label(), cfg.grid);
            Ok(0)
        }
        Command::Run => {
            let cfg = load_config(cli)?;
            let start = Instant::now();
            let report = run_pipeline(&cfg)?;
            write_outputs(&report, &cfg.output.dir)?;
            write_json(
                &cfg.output.dir,
                "run_meta.json",
                &json!({ "wall_clock_seconds": start.elapsed().as_secs_f64() }),
            )?;
            for line in report.summary() {
                println!("{line}");
            }
            println!("report: {}", cfg.output.dir.join(&cfg.output.report).display());
            Ok(report.exit_code())
        }
        Command::Scan => {
            let cfg = load_config(cli)?;
            let f = cfg.family()?;
            let div = scan_cp_divisibility(&f, &cfg.grid, &cfg.scan_options());
            write_json(&cfg.output.dir, "scan.json", &serde_json::to_value(&div)?)?;
            div.write_csv(fs::File::create(cfg.output.dir.join(&cfg.output.scan_csv))?)?;
            let non_cp = div.non_cp_steps().count();
            println!("{}: {} steps, {non_cp} non-CP", f.label(), div.steps.len());
            for (s, t) in &div.non_cp_intervals {
                println!("  non-CP over [{s}, {t}]");
            }
            if let Some((s, t)) = div.divisibility_obstruction {
                println!("  rank increases over [{s}, {t}]");
            }
            Ok(if non_cp > 0 || div.divisibility_obstruction.is_some() { 3 } else { 0 })
        }
        Command::Witness { s, t, eta, separable } => {
            let cfg = load_config(cli)?;
            let f = cfg.family()?;
            let tol = &cfg.tolerances;
            let pair = construct_witness_with_ancilla(&f, *s, eta.unwrap_or(cfg.eta), cfg.ancilla(), tol)?;
            let cert = verify_witness(&f, &pair, *t, tol)?;
            let mut out = json!({ "pair": pair, "certificate": cert });
            let mut witnessed = cert.witnessed;
            println!("p = {:.9}, norm at s = {:.9}, norm at t = {:.9}, gain = {:.6e}", cert.p, cert.norm_at_s, cert.norm_at_t, cert.gain);
            if *separable {
                let sp = separable_witness(&pair)?;
                let sc = verify_witness(&f, &sp, *t, tol)?;
                let sep = sp.separable.expect("set by separable_witness");
                println!("separable ({:?}, q = {:.6}): gain = {:.6e}", sep.method, sep.q, sc.gain);
                witnessed = witnessed && sc.witnessed;
                out["separable_pair"] = serde_json::to_value(&sp)?;
                out["separable_certificate"] = serde_json::to_value(&sc)?;
            }
            write_json(&cfg.output.dir, "witness.json", &out)?;
            Ok(if witnessed { 3 } else { 0 })
        }
        Command::Trajectory { s, eta } => {
            let cfg = load_config(cli)?;
            let f = cfg.family()?;
            let k = cfg
                .grid
                .index_of(*s)
                .ok_or_else(|| Error::Config(format!("s = {s} is not a grid point of {}", cfg.grid)))?;
            let tail = cfg.grid.tail(k)?;
            let pair = construct_witness_with_ancilla(&f, *s, eta.unwrap_or(cfg.eta), cfg.ancilla(), &cfg.tolerances)?;
            let traj = trajectory(&f, &pair.rho1_initial, &pair.rho2_initial, &tail, Some(pair.ancilla_dim))?;
            let blp = blp_integral(&traj)?;
            fs::create_dir_all(&cfg.output.dir)?;
            traj.write_csv(fs::File::create(cfg.output.dir.join(&cfg.output.trajectory_csv))?)?;
            write_json(
                &cfg.output.dir,
                "trajectory.json",
                &json!({ "anchor_s": s, "blp": blp, "points": traj.to_json() }),
            )?;
            println!("{} points from s = {s}, backflow integral {blp:.6e}", traj.values.len());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
