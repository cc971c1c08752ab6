//! Variational loops: energy minimization, fidelity maximization and
//! multi-trial aggregation.
//!
//! Budgets count objective evaluations. Every trace holds the best value seen
//! after each evaluation, so its length is the number of evaluations used.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, ParameterBinding};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::numkit::StateVector;
use crate::rng::{derive_seed, seeded, SimRng};
use crate::simulator::{
    apply_circuit_noisy_with, expectation, fidelity, infer_particle_number, prepare, readout_damped_expectation,
    sampled_expectation_with, sector_weight, NoiseSpec, PauliSum,
};

const STREAM_INIT: u64 = 1;
const STREAM_ESTIMATE: u64 = 2;
const STREAM_OPTIMIZER: u64 = 3;
const STREAM_FINAL: u64 = 4;
const STREAM_RESTART: u64 = 5;

/// Overlap with the circuit's sector below which a target is rejected.
pub const SECTOR_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    NelderMead,
    Spsa,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nelder_mead" | "nelder-mead" => Ok(Method::NelderMead),
            "spsa" => Ok(Method::Spsa),
            other => Err(Error::Config(format!("unknown optimizer {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub method: Method,
    /// Objective evaluations allowed.
    pub max_iterations: usize,
    /// Nelder-Mead restarts once the simplex spread in value and position
    /// falls below this.
    pub tolerance: f64,
    pub seed: u64,
    /// Edge length of the initial simplex; SPSA uses it as the gain `a`.
    pub initial_step: f64,
    /// SPSA perturbation size `c`.
    pub spsa_perturbation: f64,
    /// Stop as soon as the best value is at or below this.
    #[serde(default)]
    pub stop_below: Option<f64>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: Method::NelderMead,
            max_iterations: 1000,
            tolerance: 1e-10,
            seed: 0,
            initial_step: 0.5,
            spsa_perturbation: 0.1,
            stop_below: None,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        for (name, v) in [
            ("tolerance", self.tolerance),
            ("initial_step", self.initial_step),
            ("spsa_perturbation", self.spsa_perturbation),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("{name} must be finite and non-negative")));
            }
        }
        if self.initial_step == 0.0 {
            return Err(Error::Config("initial_step must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of a single optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub params: Vec<f64>,
    pub value: f64,
    pub trace: Vec<f64>,
}

/// Wraps an objective with evaluation counting and best-so-far tracking.
struct Tracker<'a, F> {
    f: &'a mut F,
    budget: usize,
    stop_below: f64,
    best: Option<(f64, Vec<f64>)>,
    trace: Vec<f64>,
}

impl<'a, F: FnMut(&[f64]) -> Result<f64>> Tracker<'a, F> {
    fn new(f: &'a mut F, cfg: &OptimizerConfig) -> Self {
        let budget = cfg.max_iterations;
        Self {
            f,
            budget,
            stop_below: cfg.stop_below.unwrap_or(f64::NEG_INFINITY),
            best: None,
            trace: Vec::with_capacity(budget),
        }
    }

    fn exhausted(&self) -> bool {
        self.trace.len() >= self.budget || self.best.as_ref().is_some_and(|(b, _)| *b <= self.stop_below)
    }

    fn eval(&mut self, x: &[f64]) -> Result<f64> {
        let v = (self.f)(x)?;
        if !v.is_finite() {
            return Err(Error::NonFinite("objective value"));
        }
        if self.best.as_ref().is_none_or(|(b, _)| v < *b) {
            self.best = Some((v, x.to_vec()));
        }
        self.trace.push(self.best.as_ref().expect("just set").0);
        Ok(v)
    }

    fn finish(self) -> Optimum {
        let (value, params) = self.best.expect("at least one evaluation");
        Optimum {
            params,
            value,
            trace: self.trace,
        }
    }
}

/// Nelder-Mead with dimension-adaptive coefficients, restarted from the best
/// vertex whenever the simplex collapses, until the budget is spent.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], cfg: &OptimizerConfig) -> Result<Optimum>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    cfg.validate()?;
    let mut t = Tracker::new(&mut f, cfg);
    let n = x0.len();
    let f0 = t.eval(x0)?;
    if n == 0 {
        return Ok(t.finish());
    }
    let nf = n as f64;
    let (alpha, beta) = (1.0, 1.0 + 2.0 / nf);
    let (gamma, delta) = (0.75 - 0.5 / nf, 1.0 - 1.0 / nf);

    let mut start = (x0.to_vec(), f0);
    'restart: while !t.exhausted() {
        let mut simplex: Vec<(Vec<f64>, f64)> = vec![start.clone()];
        for i in 0..n {
            if t.exhausted() {
                break 'restart;
            }
            let mut x = start.0.clone();
            x[i] += cfg.initial_step;
            let v = t.eval(&x)?;
            simplex.push((x, v));
        }
        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let spread = simplex[n].1 - simplex[0].1;
            let size = simplex[1..]
                .iter()
                .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if spread <= cfg.tolerance && size <= cfg.tolerance.sqrt() {
                start = simplex.swap_remove(0);
                continue 'restart;
            }
            if t.exhausted() {
                break 'restart;
            }
            let centroid: Vec<f64> = (0..n)
                .map(|k| simplex[..n].iter().map(|(x, _)| x[k]).sum::<f64>() / nf)
                .collect();
            let worst = simplex[n].clone();
            let along = |s: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(c, w)| c + s * (c - w)).collect() };
            let xr = along(alpha);
            let fr = t.eval(&xr)?;
            if fr < simplex[0].1 {
                if t.exhausted() {
                    break 'restart;
                }
                let xe = along(alpha * beta);
                let fe = t.eval(&xe)?;
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
                continue;
            }
            if t.exhausted() {
                break 'restart;
            }
            let (xc, fc) = if fr < worst.1 {
                let x = along(alpha * gamma);
                let v = t.eval(&x)?;
                (x, v)
            } else {
                let x = along(-gamma);
                let v = t.eval(&x)?;
                (x, v)
            };
            if fc < worst.1.min(fr) {
                simplex[n] = (xc, fc);
                continue;
            }
            let best = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                if t.exhausted() {
                    break 'restart;
                }
                let x: Vec<f64> = best.iter().zip(&vertex.0).map(|(b, v)| b + delta * (v - b)).collect();
                let v = t.eval(&x)?;
                *vertex = (x, v);
            }
        }
    }
    Ok(t.finish())
}

/// Simultaneous-perturbation stochastic approximation with the standard gain
/// decay exponents 0.602 and 0.101 and stability constant of 10% of the
/// iteration count.
pub fn spsa<F>(mut f: F, x0: &[f64], cfg: &OptimizerConfig, rng: &mut impl Rng) -> Result<Optimum>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    cfg.validate()?;
    let mut t = Tracker::new(&mut f, cfg);
    t.eval(x0)?;
    let n = x0.len();
    if n == 0 {
        return Ok(t.finish());
    }
    let iterations = cfg.max_iterations.saturating_sub(1) / 2;
    let stability = 0.1 * iterations as f64;
    let mut x = x0.to_vec();
    for k in 0..iterations {
        if t.exhausted() {
            break;
        }
        let ak = cfg.initial_step / (k as f64 + 1.0 + stability).powf(0.602);
        let ck = cfg.spsa_perturbation / (k as f64 + 1.0).powf(0.101);
        let dir: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let plus: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + ck * d).collect();
        let minus: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a - ck * d).collect();
        let g = (t.eval(&plus)? - t.eval(&minus)?) / (2.0 * ck);
        for (xi, d) in x.iter_mut().zip(&dir) {
            *xi -= ak * g * d;
        }
    }
    Ok(t.finish())
}

/// Dispatches on `cfg.method`; SPSA draws its perturbations from `rng`.
pub fn minimize<F>(f: F, x0: &[f64], cfg: &OptimizerConfig, rng: &mut impl Rng) -> Result<Optimum>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    match cfg.method {
        Method::NelderMead => nelder_mead(f, x0, cfg),
        Method::Spsa => spsa(f, x0, cfg, rng),
    }
}

/// Uniform draws in `[-π, π)`.
pub fn initial_parameters(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed);
    (0..n).map(|_| rng.random_range(-PI..PI)).collect()
}

/// How the energy is read out of a prepared state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    #[default]
    Exact,
    /// Shots per measurement group.
    Shots(usize),
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "exact" {
            return Ok(Estimator::Exact);
        }
        let n = s
            .strip_prefix("shots:")
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Config(format!("estimator must be exact or shots:N, got {s:?}")))?;
        Ok(Estimator::Shots(n))
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Estimator::Exact => write!(f, "exact"),
            Estimator::Shots(n) => write!(f, "shots:{n}"),
        }
    }
}

/// Energy objective for one circuit and Hamiltonian.
///
/// With gate noise each evaluation averages `trajectories` stochastic runs;
/// with the shot estimator each trajectory receives an equal share of the
/// shots (at least one).
#[derive(Debug, Clone)]
pub struct EnergyTask {
    pub circuit: Circuit,
    pub hamiltonian: PauliSum,
    pub estimator: Estimator,
    pub noise: NoiseSpec,
    pub trajectories: usize,
    /// Trajectories used to re-evaluate the final parameters of a noisy run.
    pub final_trajectories: usize,
}

impl EnergyTask {
    pub fn new(circuit: Circuit, hamiltonian: PauliSum, estimator: Estimator) -> Result<Self> {
        if circuit.num_qubits() != hamiltonian.num_qubits() {
            return Err(Error::DimensionMismatch(format!(
                "{}-qubit circuit, {}-qubit Hamiltonian",
                circuit.num_qubits(),
                hamiltonian.num_qubits()
            )));
        }
        if let Estimator::Shots(0) = estimator {
            return Err(Error::Config("shots must be at least 1".into()));
        }
        Ok(Self {
            circuit,
            hamiltonian,
            estimator,
            noise: NoiseSpec::noiseless(),
            trajectories: 1,
            final_trajectories: 1,
        })
    }

    pub fn with_noise(mut self, noise: NoiseSpec, trajectories: usize, final_trajectories: usize) -> Result<Self> {
        if trajectories == 0 || final_trajectories == 0 {
            return Err(Error::Config("trajectory counts must be at least 1".into()));
        }
        self.noise = noise;
        self.trajectories = trajectories;
        self.final_trajectories = final_trajectories;
        Ok(self)
    }

    pub fn num_parameters(&self) -> usize {
        self.circuit.num_free_parameters()
    }

    fn readout(&self, psi: &StateVector, rng: &mut SimRng, shots: usize) -> Result<f64> {
        match self.estimator {
            Estimator::Exact => readout_damped_expectation(&self.hamiltonian, psi, self.noise.readout),
            Estimator::Shots(_) => sampled_expectation_with(&self.hamiltonian, psi, shots, self.noise.readout, rng),
        }
    }

    fn evaluate_with(&self, params: &[f64], trajectories: usize, rng: &mut SimRng) -> Result<f64> {
        let binding = ParameterBinding(params.to_vec());
        if self.noise.is_gate_noiseless() {
            let psi = prepare(&self.circuit, &binding)?;
            return match (self.estimator, self.noise.readout) {
                (Estimator::Exact, 0.0) => expectation(&self.hamiltonian, &psi),
                (Estimator::Shots(n), _) => self.readout(&psi, rng, n),
                _ => self.readout(&psi, rng, 0),
            };
        }
        let shots = match self.estimator {
            Estimator::Shots(n) => n.div_ceil(trajectories),
            Estimator::Exact => 0,
        };
        let zero = StateVector::zero_state(self.circuit.num_qubits());
        let mut total = 0.0;
        for _ in 0..trajectories {
            let psi = apply_circuit_noisy_with(&self.circuit, &binding, &zero, &self.noise, rng)?;
            total += self.readout(&psi, rng, shots)?;
        }
        Ok(total / trajectories as f64)
    }

    /// One objective evaluation.
    pub fn evaluate(&self, params: &[f64], rng: &mut SimRng) -> Result<f64> {
        self.evaluate_with(params, self.trajectories, rng)
    }

    /// Energy reported for final parameters: exact when the objective is
    /// noiseless and exact, otherwise a fresh estimate seeded by `seed` with
    /// `final_trajectories` trajectories.
    pub fn final_energy(&self, params: &[f64], seed: u64) -> Result<f64> {
        self.evaluate_with(params, self.final_trajectories, &mut seeded(seed))
    }

    fn is_deterministic(&self) -> bool {
        self.estimator == Estimator::Exact && self.noise.is_noiseless()
    }
}

/// One optimization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub initial_params: Vec<f64>,
    /// Best objective value after each evaluation.
    pub trace: Vec<f64>,
    pub final_params: ParameterBinding,
    pub final_value: f64,
}

/// Minimizes the task energy from `x0`; all randomness derives from `seed`.
pub fn minimize_energy_from(task: &EnergyTask, cfg: &OptimizerConfig, x0: &[f64], seed: u64) -> Result<TrialResult> {
    task.circuit.check_binding(&ParameterBinding(x0.to_vec()))?;
    let mut est_rng = seeded(derive_seed(seed, STREAM_ESTIMATE, 0));
    let mut opt_rng = seeded(derive_seed(seed, STREAM_OPTIMIZER, 0));
    let opt = minimize(|x| task.evaluate(x, &mut est_rng), x0, cfg, &mut opt_rng)?;
    let final_value = if task.is_deterministic() {
        opt.value
    } else {
        task.final_energy(&opt.params, derive_seed(seed, STREAM_FINAL, 0))?
    };
    Ok(TrialResult {
        initial_params: x0.to_vec(),
        trace: opt.trace,
        final_params: ParameterBinding(opt.params),
        final_value,
    })
}

/// Minimizes `⟨ψ|h|ψ⟩` from initial parameters drawn with `cfg.seed`.
pub fn minimize_energy(c: &Circuit, h: &PauliSum, cfg: &OptimizerConfig, estimator: Estimator) -> Result<TrialResult> {
    let task = EnergyTask::new(c.clone(), h.clone(), estimator)?;
    let x0 = initial_parameters(task.num_parameters(), cfg.seed);
    minimize_energy_from(&task, cfg, &x0, cfg.seed)
}

/// Per-step statistics over trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub trials: usize,
}

impl AggregateResult {
    /// Shorter traces are padded with their last value.
    pub fn from_traces(traces: &[Vec<f64>]) -> Result<Self> {
        if traces.is_empty() || traces.iter().any(|t| t.is_empty()) {
            return Err(Error::Config("aggregation needs at least one non-empty trace".into()));
        }
        let len = traces.iter().map(Vec::len).max().expect("non-empty");
        let k = traces.len() as f64;
        let at = |t: &Vec<f64>, s: usize| t.get(s).copied().unwrap_or(*t.last().expect("non-empty"));
        let mut mean = Vec::with_capacity(len);
        let mut stderr = Vec::with_capacity(len);
        for s in 0..len {
            let m = traces.iter().map(|t| at(t, s)).sum::<f64>() / k;
            let se = if traces.len() > 1 {
                let var = traces.iter().map(|t| (at(t, s) - m).powi(2)).sum::<f64>() / (k - 1.0);
                (var / k).sqrt()
            } else {
                0.0
            };
            mean.push(m);
            stderr.push(se);
        }
        Ok(Self {
            mean,
            stderr,
            trials: traces.len(),
        })
    }

    /// Writes `step,delta_e_mean,delta_e_stderr` rows with steps from 1.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "step,delta_e_mean,delta_e_stderr")?;
        for (s, (m, e)) in self.mean.iter().zip(&self.stderr).enumerate() {
            writeln!(w, "{},{m:.12e},{e:.12e}", s + 1)?;
        }
        Ok(())
    }
}

/// All trials of one energy task.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSet {
    pub results: Vec<TrialResult>,
    /// Traces shifted by the reference energy (ΔE).
    pub aggregate: AggregateResult,
    pub reference: f64,
}

impl TrialSet {
    pub fn best_final(&self) -> f64 {
        self.results.iter().map(|r| r.final_value).fold(f64::INFINITY, f64::min)
    }

    pub fn mean_final(&self) -> f64 {
        self.results.iter().map(|r| r.final_value).sum::<f64>() / self.results.len() as f64
    }
}

/// Seed of the initial parameters for trial `k`. Two tasks run with the same
/// base seed and parameter count start trial `k` from the same vector.
pub fn trial_seed(base_seed: u64, k: usize) -> u64 {
    base_seed.wrapping_add(k as u64)
}

/// Runs `num_trials` independent minimizations of `task`; `reference` is
/// subtracted from every trace for the aggregate.
pub fn run_trials(
    task: &EnergyTask,
    cfg: &OptimizerConfig,
    num_trials: usize,
    base_seed: u64,
    reference: f64,
    exec: &Execution,
) -> Result<TrialSet> {
    if num_trials == 0 {
        return Err(Error::Config("num_trials must be at least 1".into()));
    }
    cfg.validate()?;
    let n = task.num_parameters();
    let results = exec
        .map_indexed(num_trials, |k| {
            let seed = trial_seed(base_seed, k);
            minimize_energy_from(task, cfg, &initial_parameters(n, seed), seed)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let shifted: Vec<Vec<f64>> = results
        .iter()
        .map(|r| r.trace.iter().map(|e| e - reference).collect())
        .collect();
    Ok(TrialSet {
        aggregate: AggregateResult::from_traces(&shifted)?,
        results,
        reference,
    })
}

/// Per-target outcome of [`maximize_fidelity`].
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityReport {
    /// Traces are best fidelity so far (non-decreasing).
    pub per_target: Vec<TrialResult>,
}

impl FidelityReport {
    pub fn fidelities(&self) -> Vec<f64> {
        self.per_target.iter().map(|r| r.final_value).collect()
    }

    pub fn mean(&self) -> f64 {
        self.fidelities().iter().sum::<f64>() / self.per_target.len() as f64
    }
}

/// Fidelity at which a target counts as reached and its search stops early.
pub const FIDELITY_GOAL: f64 = 1.0 - 1e-9;

/// Budget granted to one start of the fidelity search before trying a fresh
/// random start, as a fraction of `max_iterations`.
const FIDELITY_START_SHARE: usize = 4;

/// Maximizes `|⟨φ_k|ψ(params)⟩|²` independently for each target.
///
/// Each target gets `cfg.max_iterations` evaluations, split across random
/// restarts that stop once [`FIDELITY_GOAL`] is met.
pub fn maximize_fidelity(
    c: &Circuit,
    targets: &[StateVector],
    cfg: &OptimizerConfig,
    exec: &Execution,
) -> Result<FidelityReport> {
    cfg.validate()?;
    if targets.is_empty() {
        return Err(Error::Config("at least one target is required".into()));
    }
    let particles = infer_particle_number(c)?;
    for t in targets {
        if t.num_qubits() != c.num_qubits() {
            return Err(Error::DimensionMismatch(format!(
                "{}-qubit target for a {}-qubit circuit",
                t.num_qubits(),
                c.num_qubits()
            )));
        }
        let w = sector_weight(t, particles);
        if w < 1.0 - SECTOR_TOLERANCE {
            return Err(Error::TargetOutsideSector(w));
        }
    }
    let n = c.num_free_parameters();
    let per_target = exec
        .map_indexed(targets.len(), |k| {
            maximize_one(c, &targets[k], cfg, derive_seed(cfg.seed, STREAM_INIT, k as u64), n)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(FidelityReport { per_target })
}

fn maximize_one(c: &Circuit, target: &StateVector, cfg: &OptimizerConfig, seed: u64, n: usize) -> Result<TrialResult> {
    let infidelity = |x: &[f64]| -> Result<f64> {
        let psi = prepare(c, &ParameterBinding(x.to_vec()))?;
        Ok(1.0 - fidelity(target, &psi)?)
    };
    let initial = initial_parameters(n, seed);
    let mut x0 = initial.clone();
    let mut trace: Vec<f64> = Vec::with_capacity(cfg.max_iterations);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut opt_rng = seeded(derive_seed(seed, STREAM_OPTIMIZER, 0));
    let share = (cfg.max_iterations / FIDELITY_START_SHARE).max(1);
    let mut start = 0u64;
    while trace.len() < cfg.max_iterations {
        let mut sub = cfg.clone();
        sub.max_iterations = share.min(cfg.max_iterations - trace.len());
        sub.stop_below = Some(1.0 - FIDELITY_GOAL);
        let opt = minimize(infidelity, &x0, &sub, &mut opt_rng)?;
        let offset = best.as_ref().map_or(f64::INFINITY, |b| b.0);
        trace.extend(opt.trace.iter().map(|v| v.min(offset)));
        if opt.value < offset {
            best = Some((opt.value, opt.params));
        }
        if 1.0 - best.as_ref().expect("ran once").0 >= FIDELITY_GOAL {
            break;
        }
        start += 1;
        x0 = initial_parameters(n, derive_seed(seed, STREAM_RESTART, start));
    }
    let (inf, params) = best.expect("ran once");
    Ok(TrialResult {
        initial_params: initial,
        trace: trace.into_iter().map(|v| 1.0 - v).collect(),
        final_params: ParameterBinding(params),
        final_value: 1.0 - inf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::build_brickwall;
    use crate::gatelib::GateKind;
    use crate::models::{exact_ground, xxz_hamiltonian, Boundary, XXZSpec};
    use crate::simulator::{haar_random_sector_state, PauliString};

    fn rx_toy() -> (Circuit, PauliSum) {
        let mut c = Circuit::new(1);
        c.push_free(GateKind::Rx, &[0]).unwrap();
        let z = PauliSum::from_terms(1, vec![PauliString::parse(1.0, "Z").unwrap()]).unwrap();
        (c, z)
    }

    fn xxz4() -> PauliSum {
        xxz_hamiltonian(&XXZSpec::new(4, 1.0, Boundary::Open).unwrap())
    }

    fn is_non_increasing(t: &[f64]) -> bool {
        t.windows(2).all(|w| w[1] <= w[0])
    }

    #[test]
    fn toy_rotation_reaches_minimum() {
        let (c, z) = rx_toy();
        for seed in 0..5 {
            let cfg = OptimizerConfig {
                seed,
                ..Default::default()
            };
            let r = minimize_energy(&c, &z, &cfg, Estimator::Exact).unwrap();
            assert!((r.final_value + 1.0).abs() < 1e-6, "{}", r.final_value);
            let theta = r.final_params.0[0].rem_euclid(2.0 * PI);
            assert!((theta - PI).abs() < 1e-2);
        }
    }

    #[test]
    fn spsa_toy_improves() {
        let (c, z) = rx_toy();
        let cfg = OptimizerConfig {
            method: Method::Spsa,
            seed: 3,
            ..Default::default()
        };
        let r = minimize_energy(&c, &z, &cfg, Estimator::Exact).unwrap();
        assert!(r.final_value < -0.99, "{}", r.final_value);
        assert!(r.trace.len() <= cfg.max_iterations);
    }

    #[test]
    fn nelder_mead_quadratic_and_budget() {
        let cfg = OptimizerConfig {
            max_iterations: 400,
            ..Default::default()
        };
        let f = |x: &[f64]| -> Result<f64> { Ok((x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2) + 0.5) };
        let r = nelder_mead(f, &[0.0, 0.0], &cfg).unwrap();
        assert!((r.value - 0.5).abs() < 1e-9);
        assert!((r.params[0] - 1.0).abs() < 1e-4 && (r.params[1] + 2.0).abs() < 1e-4);
        assert_eq!(r.trace.len(), 400);
        assert!(is_non_increasing(&r.trace));
    }

    #[test]
    fn rosenbrock_converges() {
        let cfg = OptimizerConfig {
            max_iterations: 3000,
            ..Default::default()
        };
        let f = |x: &[f64]| -> Result<f64> { Ok(100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2)) };
        let r = nelder_mead(f, &[-1.2, 1.0], &cfg).unwrap();
        assert!(r.value < 1e-8, "{}", r.value);
    }

    #[test]
    fn objective_errors_and_bad_config_propagate() {
        let bad = |_: &[f64]| -> Result<f64> { Ok(f64::NAN) };
        assert!(nelder_mead(bad, &[0.0], &OptimizerConfig::default()).is_err());
        let cfg = OptimizerConfig {
            max_iterations: 0,
            ..Default::default()
        };
        assert!(nelder_mead(|_| Ok(0.0), &[0.0], &cfg).is_err());
        let (c, _) = rx_toy();
        assert!(minimize_energy(&c, &xxz4(), &OptimizerConfig::default(), Estimator::Exact).is_err());
    }

    #[test]
    fn estimator_parsing() {
        assert_eq!("exact".parse::<Estimator>().unwrap(), Estimator::Exact);
        assert_eq!("shots:1024".parse::<Estimator>().unwrap(), Estimator::Shots(1024));
        assert!("shots:0".parse::<Estimator>().is_err());
        assert!("shots".parse::<Estimator>().is_err());
        assert_eq!(Estimator::Shots(7).to_string(), "shots:7");
        assert_eq!("spsa".parse::<Method>().unwrap(), Method::Spsa);
    }

    #[test]
    fn energy_traces_are_monotone_variational_and_reproducible() {
        let c = build_brickwall(4, 2, GateKind::BGate).unwrap();
        let h = xxz4();
        let (e0, _) = exact_ground(&h, Some((4, 2))).unwrap();
        let cfg = OptimizerConfig {
            max_iterations: 300,
            seed: 17,
            ..Default::default()
        };
        let a = minimize_energy(&c, &h, &cfg, Estimator::Exact).unwrap();
        let b = minimize_energy(&c, &h, &cfg, Estimator::Exact).unwrap();
        assert_eq!(a, b);
        assert!(is_non_increasing(&a.trace));
        assert!(a.final_value <= a.trace[0]);
        assert!(a.final_value >= e0 - 1e-9);
        assert_eq!(a.trace.len(), 300);
    }

    #[test]
    fn paired_trials_share_initial_parameters() {
        let h = xxz4();
        let ca = EnergyTask::new(
            build_brickwall(4, 2, GateKind::AGate).unwrap(),
            h.clone(),
            Estimator::Exact,
        )
        .unwrap();
        let cb = EnergyTask::new(build_brickwall(4, 2, GateKind::BGate).unwrap(), h, Estimator::Exact).unwrap();
        let cfg = OptimizerConfig {
            max_iterations: 40,
            ..Default::default()
        };
        let ra = run_trials(&ca, &cfg, 3, 100, 0.0, &Execution::Serial).unwrap();
        let rb = run_trials(&cb, &cfg, 3, 100, 0.0, &Execution::Serial).unwrap();
        for (x, y) in ra.results.iter().zip(&rb.results) {
            assert_eq!(x.initial_params, y.initial_params);
        }
        assert_ne!(ra.results[0].initial_params, ra.results[1].initial_params);
        assert_eq!(ra.results[1].initial_params, initial_parameters(10, 101));
    }

    #[test]
    fn single_trial_aggregate_is_the_trace() {
        let task = EnergyTask::new(
            build_brickwall(4, 2, GateKind::AGate).unwrap(),
            xxz4(),
            Estimator::Exact,
        )
        .unwrap();
        let cfg = OptimizerConfig {
            max_iterations: 30,
            ..Default::default()
        };
        let set = run_trials(&task, &cfg, 1, 5, -6.0, &Execution::Serial).unwrap();
        let expect: Vec<f64> = set.results[0].trace.iter().map(|e| e + 6.0).collect();
        assert_eq!(set.aggregate.mean, expect);
        assert!(set.aggregate.stderr.iter().all(|&s| s == 0.0));
        assert_eq!(set.aggregate.trials, 1);
        assert!(run_trials(&task, &cfg, 0, 5, 0.0, &Execution::Serial).is_err());
    }

    #[test]
    fn aggregate_pads_and_writes_csv() {
        let agg = AggregateResult::from_traces(&[vec![3.0, 1.0], vec![2.0]]).unwrap();
        assert_eq!(agg.mean, vec![2.5, 1.5]);
        assert!((agg.stderr[0] - 0.5).abs() < 1e-15);
        let mut out = Vec::new();
        agg.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "step,delta_e_mean,delta_e_stderr");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("1,2.5"));
        assert!(!text.contains('\r'));
        assert!(AggregateResult::from_traces(&[]).is_err());
    }

    #[test]
    fn shot_estimator_is_seed_reproducible() {
        let task = EnergyTask::new(
            build_brickwall(4, 2, GateKind::BGate).unwrap(),
            xxz4(),
            Estimator::Shots(256),
        )
        .unwrap();
        let cfg = OptimizerConfig {
            max_iterations: 50,
            ..Default::default()
        };
        let x0 = initial_parameters(10, 1);
        let a = minimize_energy_from(&task, &cfg, &x0, 9).unwrap();
        let b = minimize_energy_from(&task, &cfg, &x0, 9).unwrap();
        assert_eq!(a, b);
        let c = minimize_energy_from(&task, &cfg, &x0, 10).unwrap();
        assert_ne!(a.trace, c.trace);
    }

    #[test]
    fn zero_noise_matches_noiseless_bitwise() {
        let c = build_brickwall(4, 2, GateKind::BGate).unwrap();
        let cfg = OptimizerConfig {
            max_iterations: 60,
            ..Default::default()
        };
        let x0 = initial_parameters(10, 4);
        for est in [Estimator::Exact, Estimator::Shots(128)] {
            let clean = EnergyTask::new(c.clone(), xxz4(), est).unwrap();
            let zero = clean
                .clone()
                .with_noise(NoiseSpec::new(0.0, 0.0, 0.0).unwrap(), 8, 64)
                .unwrap();
            let a = minimize_energy_from(&clean, &cfg, &x0, 2).unwrap();
            let b = minimize_energy_from(&zero, &cfg, &x0, 2).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn realizable_target_is_reached() {
        let c = build_brickwall(4, 2, GateKind::AGate).unwrap();
        let target = prepare(&c, &ParameterBinding(initial_parameters(10, 77))).unwrap();
        let cfg = OptimizerConfig {
            max_iterations: 20000,
            seed: 1,
            ..Default::default()
        };
        let rep = maximize_fidelity(&c, &[target], &cfg, &Execution::Serial).unwrap();
        assert!(rep.mean() > 1.0 - 1e-6, "{}", rep.mean());
        let t = &rep.per_target[0].trace;
        assert!(t.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn target_outside_sector_is_rejected() {
        let c = build_brickwall(4, 2, GateKind::AGate).unwrap();
        let wrong = haar_random_sector_state(4, 1, 3).unwrap();
        let err = maximize_fidelity(&c, &[wrong], &OptimizerConfig::default(), &Execution::Serial);
        assert!(matches!(err, Err(Error::TargetOutsideSector(_))));
    }

    #[test]
    fn serial_and_parallel_trials_agree() {
        let task = EnergyTask::new(
            build_brickwall(4, 2, GateKind::BGate).unwrap(),
            xxz4(),
            Estimator::Shots(64),
        )
        .unwrap();
        let cfg = OptimizerConfig {
            max_iterations: 40,
            ..Default::default()
        };
        let a = run_trials(&task, &cfg, 4, 8, 0.0, &Execution::Serial).unwrap();
        let b = run_trials(&task, &cfg, 4, 8, 0.0, &Execution::Parallel { threads: Some(2) }).unwrap();
        assert_eq!(a, b);
    }
}
