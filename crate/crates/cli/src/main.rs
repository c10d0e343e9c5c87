use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use poolnet::bench::{
    desk_gap_spec, generate_instance, load_instances_dir, performance_profile, records_to_csv, records_to_json, run_cell, Config,
    Family, GenSpec,
};
use poolnet::cuts::{add_all_pooling_inequalities, DEFAULT_EPSILON};
use poolnet::solve::{branch_and_cut, cut_loop, heuristic_gap_spec, restriction_search, GapSpec};
use poolnet::{build_pq, relax_pq, Network, PqModel};

#[derive(Parser)]
#[command(name = "poolnet", version, about = "Pooling-problem global optimization toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded random instance as JSON.
    Generate(GenerateArgs),
    /// Solve an instance to global optimality with spatial branch and cut.
    Solve(SolveArgs),
    /// Run the MIP-restriction primal heuristic.
    Heuristic(HeuristicArgs),
    /// Run the root cut loop and print the bound after each round.
    Cutloop(CutloopArgs),
    /// Run every configuration on a directory of instances.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_parser = ["sparse_haverly", "dense_rand"])]
    family: String,
    #[arg(long)]
    ni: usize,
    #[arg(long)]
    nl: usize,
    #[arg(long)]
    nj: usize,
    #[arg(long)]
    nk: usize,
    #[arg(long)]
    na: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GapArgs {
    /// Relative gap tolerance.
    #[arg(long, default_value_t = 1e-4)]
    rel_gap: f64,
    /// Absolute gap tolerance.
    #[arg(long, default_value_t = 1e-8)]
    abs_gap: f64,
    /// Time limit in seconds.
    #[arg(long, default_value_t = 120.0)]
    time_limit: f64,
}

impl GapArgs {
    fn spec(&self) -> Result<GapSpec> {
        if !(self.time_limit >= 0.0) || !(self.rel_gap >= 0.0) || !(self.abs_gap >= 0.0) {
            bail!("gap tolerances and time limit must be non-negative");
        }
        Ok(desk_gap_spec()
            .with_rel_tol(self.rel_gap)
            .with_abs_tol(self.abs_gap)
            .with_time_limit(Duration::from_secs_f64(self.time_limit)))
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value = "default", value_parser = ["default", "cuts", "heuristic", "cuts+heuristic"])]
    config: String,
    #[command(flatten)]
    gap: GapArgs,
    /// Write the solve report as JSON to this file.
    #[arg(long)]
    json_report: Option<PathBuf>,
}

#[derive(Args)]
struct HeuristicArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Number of single-output copies per pool.
    #[arg(long, default_value_t = 1)]
    tau: usize,
}

#[derive(Args)]
struct CutloopArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 20)]
    max_rounds: usize,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    instances_dir: PathBuf,
    /// Comma-separated configurations.
    #[arg(long, default_value = "default,cuts,heuristic,cuts+heuristic")]
    configs: String,
    /// Record table; a JSON copy is written next to it.
    #[arg(long)]
    out_csv: PathBuf,
    /// Path prefix for the profile `.csv` and `.dat` files.
    #[arg(long)]
    profile_out: Option<PathBuf>,
    /// Exclude heuristic and cut-generation time from recorded times.
    #[arg(long)]
    oracle_mode: bool,
    #[command(flatten)]
    gap: GapArgs,
}

fn load_network(path: &Path) -> Result<Network> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Network::from_json(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn load_pq(path: &Path) -> Result<PqModel> {
    Ok(build_pq(Arc::new(load_network(path)?))?)
}

fn generate(args: GenerateArgs) -> Result<u8> {
    let family: Family = args.family.parse()?;
    let spec = GenSpec::new(family, args.ni, args.nl, args.nj, args.nk, args.na, args.seed);
    let net = generate_instance(&spec)?;
    match args.out {
        Some(path) => std::fs::write(&path, net.to_json()).with_context(|| format!("writing {}", path.display()))?,
        None => println!("{}", String::from_utf8_lossy(&net.to_json())),
    }
    Ok(0)
}

fn solve(args: SolveArgs) -> Result<u8> {
    let pq = load_pq(&args.instance)?;
    let config: Config = args.config.parse()?;
    let report = branch_and_cut(&pq, &args.gap.spec()?, &config.options())?;
    println!("status:  {}", report.status.as_str());
    println!("lower:   {}", report.lower);
    println!("upper:   {}", report.upper);
    println!("gap:     {:.6}%", 100.0 * report.rel_gap);
    println!("nodes:   {}", report.nodes);
    println!("cuts:    {}", report.cuts);
    println!("time:    {:.3}s", report.wall_seconds);
    if let Some(path) = args.json_report {
        let mut doc = report.to_json();
        doc["instance"] = serde_json::json!(args.instance.display().to_string());
        doc["config"] = serde_json::json!(config.as_str());
        std::fs::write(&path, serde_json::to_string_pretty(&doc)?).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(0)
}

fn heuristic(args: HeuristicArgs) -> Result<u8> {
    let pq = load_pq(&args.instance)?;
    match restriction_search(&pq, args.tau, &heuristic_gap_spec())? {
        Some(sol) => {
            println!("objective: {}", sol.objective);
            for (id, var) in pq.model.variables().iter().enumerate() {
                if sol.values[id].abs() > 1e-9 {
                    println!("  {} = {}", var.name, sol.values[id]);
                }
            }
        }
        None => println!("no feasible restriction"),
    }
    Ok(0)
}

/// Rounds away last-digit noise for display.
fn display_bound(v: f64) -> f64 {
    (v * 1e9).round() / 1e9
}

fn cutloop(args: CutloopArgs) -> Result<u8> {
    let pq = load_pq(&args.instance)?;
    let mut rm = relax_pq(&pq)?;
    let mut cb = add_all_pooling_inequalities(&mut rm, &pq)?;
    let (_, last) = cut_loop(&mut rm, &mut cb, args.max_rounds, DEFAULT_EPSILON, None, |round| {
        println!("Iter {}: {}", round.iteration, display_bound(round.bound));
        println!("  Adding {} cuts", round.added);
    })?;
    println!("final bound: {}", display_bound(last.objective));
    Ok(0)
}

fn bench(args: BenchArgs) -> Result<u8> {
    let configs: Vec<Config> = args.configs.split(',').map(|c| c.trim().parse()).collect::<Result<_, _>>()?;
    let spec = args.gap.spec()?;
    let instances = load_instances_dir(&args.instances_dir)?;
    if instances.is_empty() {
        bail!("no *.json instances in {}", args.instances_dir.display());
    }
    let mut records = Vec::new();
    let mut failures = 0;
    for (name, net) in &instances {
        for &config in &configs {
            let (record, error) = run_cell(name, net, config, &spec, args.oracle_mode);
            if let Some(message) = error {
                eprintln!("{name} [{config}]: {message}");
                failures += 1;
            }
            println!("{name} {config} {} {:.3}s gap {}%", record.status, record.time, record.gap);
            records.push(record);
        }
    }
    std::fs::write(&args.out_csv, records_to_csv(&records)?).with_context(|| format!("writing {}", args.out_csv.display()))?;
    let json_path = args.out_csv.with_extension("json");
    std::fs::write(&json_path, records_to_json(&records)).with_context(|| format!("writing {}", json_path.display()))?;
    if let Some(prefix) = args.profile_out {
        let profile = performance_profile(&records)?;
        let csv = prefix.with_extension("csv");
        let dat = prefix.with_extension("dat");
        std::fs::write(&csv, profile.to_csv()).with_context(|| format!("writing {}", csv.display()))?;
        std::fs::write(&dat, profile.to_dat()).with_context(|| format!("writing {}", dat.display()))?;
    }
    Ok(if failures > 0 { 2 } else { 0 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    let outcome = match cli.command {
        Command::Generate(args) => generate(args),
        Command::Solve(args) => solve(args),
        Command::Heuristic(args) => heuristic(args),
        Command::Cutloop(args) => cutloop(args),
        Command::Bench(args) => bench(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
