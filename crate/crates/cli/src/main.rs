use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use vrpkit_agents::{build_provider, run_pipeline_path, Buffer, PipelineConfig, ProviderConfig, ProviderKind};
use vrpkit_cli::bench::{instance_files, run_bench, BenchConfig};
use vrpkit_cli::{parse_reference, Exit};
use vrpkit_core::solution::parse_sol;
use vrpkit_core::{
    build_distance_matrix, check_solution, classify_with, cost, parse_instance, solve_with_matrix, ClassifyOptions,
    Instance, Rounding, Solution, SolverConfig,
};

#[derive(Parser)]
#[command(name = "vrpkit", version, about = "Classify, solve and validate VRPLIB instances")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one instance and emit a .sol file.
    Solve {
        path: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        hints: HintArgs,
        /// Write the solution here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check a .sol file against an instance.
    Validate {
        instance: PathBuf,
        solution: PathBuf,
        #[arg(long, value_enum)]
        rounding: Option<RoundingArg>,
        #[command(flatten)]
        hints: HintArgs,
    },
    /// Print the variant implied by an instance's fields.
    Classify {
        path: PathBuf,
        #[command(flatten)]
        hints: HintArgs,
    },
    /// Solve every instance in a directory and report gaps.
    Bench {
        dir: PathBuf,
        /// `name objective` table.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        hints: HintArgs,
        /// Seeds per instance, counting up from --seed.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// CSV report path.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Describe, judge and solve through the agent pipeline.
    Pipeline {
        path: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        hints: HintArgs,
        #[arg(long, value_enum, default_value_t = ProviderArg::Rule)]
        provider: ProviderArg,
        #[arg(long)]
        endpoint: Option<String>,
        #[arg(long, default_value = "gpt-4.1")]
        model: String,
        #[arg(long, default_value = "OPENAI_API_KEY")]
        key_env: String,
        #[arg(long, default_value_t = 5)]
        max_rounds: usize,
        /// Accepted configurations, one JSON object per line.
        #[arg(long, default_value = "vrpkit-buffer.jsonl")]
        buffer: PathBuf,
        /// Dump the agent transcript here (`-` for standard error).
        #[arg(long)]
        transcript: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long, default_value_t = 2000)]
    iterations: usize,
    /// Destroy ratio.
    #[arg(long, default_value_t = 0.2)]
    rho: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum)]
    rounding: Option<RoundingArg>,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long, default_value_t = 5)]
    max_subsequence: usize,
}

#[derive(Args, Clone, Copy)]
struct HintArgs {
    /// Treat routes as open (no return to the depot).
    #[arg(long)]
    open: bool,
    /// Allow pickups and deliveries in any order.
    #[arg(long)]
    mixed_backhaul: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum RoundingArg {
    Int,
    None,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProviderArg {
    Rule,
    Remote,
}

impl From<RoundingArg> for Rounding {
    fn from(r: RoundingArg) -> Self {
        match r {
            RoundingArg::Int => Rounding::NearestInteger,
            RoundingArg::None => Rounding::None,
        }
    }
}

impl HintArgs {
    fn options(self) -> ClassifyOptions {
        ClassifyOptions {
            open_route: self.open.then_some(true),
            mixed_backhaul: self.mixed_backhaul.then_some(true),
        }
    }
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig, String> {
        let time_limit = match self.time_limit {
            Some(t) if !(t.is_finite() && t > 0.0) => return Err(format!("time limit {t} must be positive")),
            t => t.map(Duration::from_secs_f64),
        };
        let cfg = SolverConfig {
            iterations: self.iterations,
            destroy_ratio: self.rho,
            seed: self.seed,
            rounding: self.rounding.map(Rounding::from),
            time_limit,
            max_subsequence: self.max_subsequence,
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

fn fail(code: Exit, msg: impl std::fmt::Display) -> Exit {
    eprintln!("error: {msg}");
    code
}

fn read(path: &Path) -> Result<String, Exit> {
    fs::read_to_string(path).map_err(|e| fail(Exit::Parse, format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Instance<f64>, Exit> {
    parse_instance(&read(path)?).map_err(|e| fail(Exit::Parse, format!("{}: {e}", path.display())))
}

fn sol_text(sol: &Solution<f64>, inst: &Instance<f64>) -> String {
    sol.to_sol_with(inst.depots.len() > 1)
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Exit> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| fail(Exit::Config, format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn solve(path: &Path, args: &SolverArgs, hints: HintArgs, output: Option<&Path>) -> Result<(), Exit> {
    let cfg = args.config().map_err(|e| fail(Exit::Config, e))?;
    let t = Instant::now();
    let inst = load(path)?;
    let sig = classify_with(&inst, &hints.options());
    let rounding = cfg.rounding.unwrap_or_else(|| Rounding::default_for(&inst));
    let dm = build_distance_matrix(&inst, rounding).map_err(|e| fail(Exit::Parse, e))?;
    let (sol, stats) = solve_with_matrix(&inst, &sig.set, &dm, &cfg).map_err(|e| fail(Exit::for_solver(&e), e))?;
    let wall = t.elapsed();
    emit(&sol_text(&sol, &inst), output)?;
    println!("# variant: {}", sig.code);
    println!("# objective: {}", sol.cost);
    println!("# wall_time_s: {:.6}", wall.as_secs_f64());
    for line in stats.to_string().lines() {
        println!("# {line}");
    }
    if stats.truncated {
        eprintln!("warning: time limit reached after {} steps; best solution so far emitted", stats.steps);
    }
    Ok(())
}

fn validate(inst_path: &Path, sol_path: &Path, rounding: Option<RoundingArg>, hints: HintArgs) -> Result<(), Exit> {
    let inst = load(inst_path)?;
    let file = parse_sol::<f64>(&read(sol_path)?).map_err(|e| fail(Exit::Parse, format!("{}: {e}", sol_path.display())))?;
    if let Some(bad) = file.routes.iter().flatten().find(|&&v| v == 0 || v > inst.dimension) {
        return Err(fail(Exit::Parse, format!("unknown node id {bad}")));
    }
    let sig = classify_with(&inst, &hints.options());
    let rounding = rounding.map_or_else(|| Rounding::default_for(&inst), Rounding::from);
    let dm = build_distance_matrix(&inst, rounding).map_err(|e| fail(Exit::Parse, e))?;
    let claimed = file.cost;
    let mut sol = file.into_solution(|v| inst.is_depot(v), inst.depots[0]);
    sol.cost = cost(&sol, &dm, &sig.set);
    let report = check_solution(&sol, &inst, &sig.set, &dm);
    print!("{report}");
    println!("variant: {}", sig.code);
    println!("cost: {}", sol.cost);
    let mut ok = report.feasible();
    if let Some(c) = claimed {
        if (c - sol.cost).abs() > 1e-6 * sol.cost.abs().max(1.0) {
            println!("cost mismatch: file says {c}, recomputed {}", sol.cost);
            ok = false;
        }
    }
    if ok {
        Ok(())
    } else {
        Err(Exit::Infeasible)
    }
}

fn classify(path: &Path, hints: HintArgs) -> Result<(), Exit> {
    let inst = load(path)?;
    let sig = classify_with(&inst, &hints.options());
    let cs = &sig.set;
    println!("{}", sig.code);
    println!("nodes: {}", inst.dimension);
    println!("customers: {}", inst.customers().len());
    println!("depots: {:?}", inst.depots);
    if let Some(q) = cs.capacity {
        println!("capacity: {q}");
    }
    if let Some(l) = cs.distance_limit {
        println!("distance_limit: {l}");
    }
    if cs.time_windows {
        println!("time_windows: yes");
    }
    println!("open_route: {} ({})", cs.open_route, sig.open_source);
    if let Some(b) = cs.backhaul {
        println!("backhaul: {b:?} ({})", sig.backhaul_source);
    }
    if let Some(e) = &cs.electric {
        println!(
            "electric: fuel_capacity {} consumption {} refuel_rate {} stations {:?}",
            e.fuel_capacity, e.consumption_rate, e.refuel_rate, e.stations
        );
    }
    if let Some(p) = &cs.precedence {
        println!("precedence pairs: {}", p.len());
    }
    if cs.asymmetric {
        println!("asymmetric: yes");
    }
    for n in &sig.notes {
        println!("note: {n}");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn bench(
    dir: &Path,
    reference: Option<&Path>,
    args: &SolverArgs,
    hints: HintArgs,
    seeds: u64,
    workers: usize,
    output: Option<&Path>,
) -> Result<(), Exit> {
    let solver = args.config().map_err(|e| fail(Exit::Config, e))?;
    if seeds == 0 || workers == 0 {
        return Err(fail(Exit::Config, "--seeds and --workers must be at least 1"));
    }
    let refs = match reference {
        Some(p) => parse_reference(&read(p)?).map_err(|e| fail(Exit::Parse, format!("{}: {e}", p.display())))?,
        None => Default::default(),
    };
    let paths = instance_files(dir).map_err(|e| fail(Exit::Parse, format!("{}: {e}", dir.display())))?;
    if paths.is_empty() {
        return Err(fail(Exit::Parse, format!("no instances in {}", dir.display())));
    }
    let cfg = BenchConfig {
        seeds: (args.seed..args.seed + seeds).collect(),
        solver,
        classify: hints.options(),
        workers,
    };
    let report = run_bench(&paths, &refs, &cfg).map_err(|e| fail(Exit::Config, e))?;
    print!("{}", report.table());
    if let Some(p) = output {
        let f = fs::File::create(p).map_err(|e| fail(Exit::Config, format!("{}: {e}", p.display())))?;
        report.write_csv(f).map_err(|e| fail(Exit::Config, e))?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn pipeline(
    path: &Path,
    args: &SolverArgs,
    hints: HintArgs,
    provider: ProviderArg,
    endpoint: Option<String>,
    model: String,
    key_env: String,
    max_rounds: usize,
    buffer: &Path,
    transcript: Option<&Path>,
    output: Option<&Path>,
) -> Result<(), Exit> {
    let solver = args.config().map_err(|e| fail(Exit::Config, e))?;
    let pcfg = ProviderConfig {
        kind: match provider {
            ProviderArg::Rule => ProviderKind::RuleBased,
            ProviderArg::Remote => ProviderKind::Remote,
        },
        endpoint,
        model,
        key_env,
        max_rounds,
        ..Default::default()
    };
    let mut p = build_provider(&pcfg, hints.options()).map_err(|e| fail(Exit::Config, e))?;
    let mut buf = Buffer::open(buffer).map_err(|e| fail(Exit::Config, format!("{}: {e}", buffer.display())))?;
    let cfg = PipelineConfig {
        max_rounds,
        classify: hints.options(),
        solver,
    };
    let dump = |text: String| -> Result<(), Exit> {
        match transcript {
            Some(p) if p == Path::new("-") => {
                eprint!("{text}");
                Ok(())
            }
            Some(p) => fs::write(p, text).map_err(|e| fail(Exit::Config, format!("{}: {e}", p.display()))),
            None => Ok(()),
        }
    };
    match run_pipeline_path(path, &mut p, &cfg, &mut buf) {
        Ok(out) => {
            dump(out.transcript.to_string())?;
            emit(&sol_text(&out.solution, &out.instance), output)?;
            println!("# variant: {}", out.config.code());
            println!("# objective: {}", out.solution.cost);
            println!("# buffer: {} ({})", if out.buffer_hit { "hit" } else { "miss" }, out.entry.signature);
            println!("# provider_time_s: {:.6}", out.transcript.provider_time().as_secs_f64());
            for line in out.stats.to_string().lines() {
                println!("# {line}");
            }
            if out.stats.truncated {
                eprintln!("warning: time limit reached; best solution so far emitted");
            }
            Ok(())
        }
        Err(e) => {
            let code = Exit::for_pipeline(&e.kind);
            if transcript.is_some() {
                dump(e.transcript.to_string())?;
            } else if !e.transcript.is_empty() {
                eprint!("{}", e.transcript);
            }
            Err(fail(code, &e.kind))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.cmd {
        Cmd::Solve {
            path,
            solver,
            hints,
            output,
        } => solve(&path, &solver, hints, output.as_deref()),
        Cmd::Validate {
            instance,
            solution,
            rounding,
            hints,
        } => validate(&instance, &solution, rounding, hints),
        Cmd::Classify { path, hints } => classify(&path, hints),
        Cmd::Bench {
            dir,
            reference,
            solver,
            hints,
            seeds,
            workers,
            output,
        } => bench(&dir, reference.as_deref(), &solver, hints, seeds, workers, output.as_deref()),
        Cmd::Pipeline {
            path,
            solver,
            hints,
            provider,
            endpoint,
            model,
            key_env,
            max_rounds,
            buffer,
            transcript,
            output,
        } => pipeline(
            &path,
            &solver,
            hints,
            provider,
            endpoint,
            model,
            key_env,
            max_rounds,
            &buffer,
            transcript.as_deref(),
            output.as_deref(),
        ),
    };
    match r {
        Ok(()) => Exit::Ok.into(),
        Err(code) => code.into(),
    }
}
