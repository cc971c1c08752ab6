use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use symvqc::checks::{parse_suites, run_suite};
use symvqc::circuit::{build_brickwall, build_swap_variant_2on4, cnot_count, Circuit, ParameterBinding};
use symvqc::exec::Execution;
use symvqc::gatelib::GateKind;
use symvqc::models::{exact_ground, xxz_hamiltonian, Boundary, XXZSpec};
use symvqc::rng::derive_seed;
use symvqc::simulator::{haar_random_sector_state, infer_particle_number, prepare, NoiseSpec};
use symvqc::varopt::{
    initial_parameters, maximize_fidelity, run_trials, EnergyTask, Estimator, Method, OptimizerConfig,
};

const MANIFEST_SCHEMA: u32 = 1;
const THREADS_VAR: &str = "SYMVQC_THREADS";
const TARGET_STREAM: u64 = 11;

#[derive(Parser)]
#[command(name = "symvqc", version, about = "Particle-conserving variational circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a circuit and write it as JSON.
    Build(BuildArgs),
    /// Maximize fidelity against random sector states.
    Fidelity(FidelityArgs),
    /// Minimize a model energy over many trials.
    Vqe(VqeArgs),
    /// Run the built-in verification suites.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum GateArg {
    A,
    B,
}

impl GateArg {
    fn kind(self) -> GateKind {
        match self {
            GateArg::A => GateKind::AGate,
            GateArg::B => GateKind::BGate,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Variant {
    Brickwall,
    Swap24,
}

#[derive(Args, Serialize)]
struct BuildArgs {
    /// Required for brickwall; swap24 is fixed to 4 sites.
    #[arg(long)]
    sites: Option<usize>,
    /// Required for brickwall; swap24 is fixed to 2 particles.
    #[arg(long)]
    particles: Option<usize>,
    #[arg(long, value_enum, default_value = "a")]
    gate: GateArg,
    #[arg(long, value_enum, default_value = "brickwall")]
    variant: Variant,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum TargetSource {
    /// Haar-random states in the circuit's sector.
    Haar,
    /// Outputs of the circuit itself at random bindings.
    Circuit,
}

#[derive(Args, Serialize)]
struct FidelityArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long, default_value_t = 50)]
    targets: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "haar")]
    target_source: TargetSource,
    /// Objective evaluations per target.
    #[arg(long, default_value_t = 20000)]
    max_iters: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Model {
    Xxz,
}

#[derive(Args, Serialize)]
struct VqeArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long, value_enum, default_value = "xxz")]
    model: Model,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    gamma: f64,
    #[arg(long, default_value = "open")]
    boundary: String,
    /// `exact` or `shots:N`.
    #[arg(long, default_value = "exact")]
    estimator: String,
    /// Depolarizing and readout probabilities as `p1,p2,readout`.
    #[arg(long, default_value = "0,0,0")]
    noise: String,
    /// Trajectories averaged per objective evaluation under gate noise.
    #[arg(long, default_value_t = 16)]
    trajectories: usize,
    /// Trajectories used to re-evaluate final parameters under noise.
    #[arg(long, default_value_t = 256)]
    final_trajectories: usize,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Objective evaluations per trial.
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    /// `nelder_mead` or `spsa`.
    #[arg(long, default_value = "nelder_mead")]
    optimizer: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    /// `gates`, `symmetry`, `mapping` or `all`.
    #[arg(long, default_value = "all")]
    suite: String,
}

enum Failure {
    Usage(String),
    Verification,
}

impl From<symvqc::Error> for Failure {
    fn from(e: symvqc::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Fidelity(a) => cmd_fidelity(a),
        Command::Vqe(a) => cmd_vqe(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Verification) => ExitCode::from(2),
    }
}

/// Writes through a temporary file in the same directory, then renames.
fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let tmp = path.with_file_name(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

#[derive(Serialize)]
struct RunManifest<'a, F: Serialize> {
    schema_version: u32,
    artifact_version: &'static str,
    command: &'static str,
    flags: &'a F,
    seed: Option<u64>,
    threads: Option<usize>,
    outputs: Vec<String>,
    summary: Value,
    wall_clock_seconds: f64,
}

fn write_manifest<F: Serialize>(
    command: &'static str,
    flags: &F,
    seed: Option<u64>,
    exec: Option<Execution>,
    out: &Path,
    summary: Value,
    started: Instant,
) -> CliResult<()> {
    let threads = exec.map(|e| match e {
        Execution::Serial => 1,
        Execution::Parallel { threads } => threads.unwrap_or(0),
    });
    let m = RunManifest {
        schema_version: MANIFEST_SCHEMA,
        artifact_version: env!("CARGO_PKG_VERSION"),
        command,
        flags,
        seed,
        threads,
        outputs: vec![out.display().to_string()],
        summary,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    let text = serde_json::to_string_pretty(&m).map_err(|e| Failure::Usage(e.to_string()))?;
    write_atomic(&manifest_path(out), text.as_bytes())?;
    Ok(())
}

fn load_circuit(path: &Path) -> CliResult<Circuit> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Circuit::from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn cmd_build(a: &BuildArgs) -> CliResult<()> {
    let started = Instant::now();
    let c = match a.variant {
        Variant::Brickwall => match (a.sites, a.particles) {
            (Some(l), Some(n)) => build_brickwall(l, n, a.gate.kind())?,
            _ => return Err(Failure::Usage("brickwall needs --sites and --particles".into())),
        },
        Variant::Swap24 => {
            if a.sites.unwrap_or(4) != 4 || a.particles.unwrap_or(2) != 2 {
                return Err(Failure::Usage(
                    "the swap24 variant needs --sites 4 --particles 2".into(),
                ));
            }
            build_swap_variant_2on4(a.gate.kind())?
        }
    };
    let (gates, params, cnots) = (c.parameterized_gate_count(), c.num_free_parameters(), cnot_count(&c));
    write_atomic(&a.out, c.to_json().as_bytes())?;
    let summary = json!({ "gates": gates, "params": params, "cnots": cnots });
    write_manifest("build", a, None, None, &a.out, summary, started)?;
    println!("gates={gates} params={params} cnots={cnots}");
    Ok(())
}

fn cmd_fidelity(a: &FidelityArgs) -> CliResult<()> {
    let started = Instant::now();
    if a.targets == 0 {
        return Err(Failure::Usage("--targets must be at least 1".into()));
    }
    let c = load_circuit(&a.circuit)?;
    let particles = infer_particle_number(&c)?;
    let targets = (0..a.targets)
        .map(|k| {
            let seed = derive_seed(a.seed, TARGET_STREAM, k as u64);
            match a.target_source {
                TargetSource::Haar => haar_random_sector_state(c.num_qubits(), particles, seed),
                TargetSource::Circuit => {
                    prepare(&c, &ParameterBinding(initial_parameters(c.num_free_parameters(), seed)))
                }
            }
        })
        .collect::<symvqc::Result<Vec<_>>>()?;
    let cfg = OptimizerConfig {
        max_iterations: a.max_iters,
        seed: a.seed,
        ..Default::default()
    };
    let exec = Execution::from_env(THREADS_VAR);
    let report = maximize_fidelity(&c, &targets, &cfg, &exec)?;
    let mut csv = String::from("target,fidelity\n");
    for (k, f) in report.fidelities().iter().enumerate() {
        writeln!(csv, "{k},{f:.12e}").expect("writing to a String");
    }
    let mean = report.mean();
    writeln!(csv, "mean,{mean:.12e}").expect("writing to a String");
    write_atomic(&a.out, csv.as_bytes())?;
    let summary = json!({ "mean_fidelity": mean, "targets": a.targets });
    write_manifest("fidelity", a, Some(a.seed), Some(exec), &a.out, summary, started)?;
    println!("mean_fidelity={mean:.9}");
    Ok(())
}

fn parse_noise(s: &str) -> CliResult<NoiseSpec> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("--noise expects p1,p2,readout, got {s:?}")))?;
    match parts[..] {
        [p1, p2, ro] => Ok(NoiseSpec::new(p1, p2, ro)?),
        _ => Err(Failure::Usage(format!("--noise expects three values, got {s:?}"))),
    }
}

fn cmd_vqe(a: &VqeArgs) -> CliResult<()> {
    let started = Instant::now();
    let boundary: Boundary = a.boundary.parse()?;
    let estimator: Estimator = a.estimator.parse()?;
    let method: Method = a.optimizer.parse()?;
    let noise = parse_noise(&a.noise)?;
    if a.trials == 0 {
        return Err(Failure::Usage("--trials must be at least 1".into()));
    }
    let c = load_circuit(&a.circuit)?;
    let particles = infer_particle_number(&c)?;
    let h = match a.model {
        Model::Xxz => xxz_hamiltonian(&XXZSpec::new(c.num_qubits(), a.gamma, boundary)?),
    };
    let (reference, _) = exact_ground(&h, Some((c.num_qubits(), particles)))?;
    let task = EnergyTask::new(c, h, estimator)?.with_noise(noise, a.trajectories, a.final_trajectories)?;
    let cfg = OptimizerConfig {
        method,
        max_iterations: a.max_iters,
        seed: a.seed,
        ..Default::default()
    };
    let exec = Execution::from_env(THREADS_VAR);
    let set = run_trials(&task, &cfg, a.trials, a.seed, reference, &exec)?;
    let mut csv = Vec::new();
    set.aggregate.write_csv(&mut csv)?;
    write_atomic(&a.out, &csv)?;
    let best = set.best_final();
    let mean_delta = set.mean_final() - reference;
    let summary = json!({
        "reference_energy": reference,
        "best_final_energy": best,
        "mean_final_delta_e": mean_delta,
        "trials": a.trials,
    });
    write_manifest("vqe", a, Some(a.seed), Some(exec), &a.out, summary, started)?;
    println!("reference={reference:.9} best_final={best:.9} mean_final_delta_e={mean_delta:.6e}");
    Ok(())
}

fn cmd_verify(a: &VerifyArgs) -> CliResult<()> {
    let suites = parse_suites(&a.suite)?;
    let mut all_ok = true;
    println!(
        "{:<10} {:<44} {:>12} {:>10}  result",
        "suite", "check", "value", "limit"
    );
    for suite in suites {
        let outcomes = run_suite(suite)?;
        let ok = outcomes.iter().all(|o| o.passed);
        for o in &outcomes {
            println!(
                "{:<10} {:<44} {:>12.3e} {:>10.1e}  {}",
                o.suite.name(),
                o.name,
                o.value,
                o.limit,
                if o.passed { "pass" } else { "FAIL" }
            );
        }
        println!("suite {}: {}", suite.name(), if ok { "pass" } else { "FAIL" });
        all_ok &= ok;
    }
    if all_ok {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}
