//! Subcommands: argument definitions and their implementations.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spinvar::optimizers::{GradientConfig, QnspsaConfig, SpsaConfig};
use spinvar::problems::{brute_force_maxcut, build_maxcut, build_mgm, parse_graph, Graph, MgmParams};
use spinvar::rng::SeedStream;
use spinvar::statevector::NoiseConfig;
use spinvar::vqa::{
    default_reps, energy_gap_scan, qaoa_run, vqe_run, Ansatz, EnergyConvention, GapMethod, OptimizerChoice,
    Parity, RunConfig, Simulator, VqaResult,
};
use spinvar::{exact, Error, Observable};

use crate::plot::{Chart, Series};
use crate::scenarios;
use crate::summary::{self, Summary};
use crate::CliError;

/// Largest chain handed to the exact solver for reference energies.
const MAX_REFERENCE_SPINS: usize = 16;
/// Largest graph brute-forced for a reference cut during variational runs.
const MAX_REFERENCE_NODES: usize = 22;

#[derive(Parser, Debug)]
#[command(
    name = "spinvar",
    version,
    about = "VQE, QAOA and VQD experiments on spin chains and Max-cut"
)]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Ground-state energy of the Majumdar-Ghosh ring.
    MgmGround(MgmGroundArgs),
    /// Two lowest energies and the spin gap over a range of ring sizes.
    MgmGap(MgmGapArgs),
    /// Weighted Max-cut by brute force, VQE or QAOA.
    Maxcut(MaxcutArgs),
    /// A named scenario from the built-in registry over several seeds.
    Benchmark(BenchmarkArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroundMethod {
    Vqe,
    Qaoa,
    Exact,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum GapMethodArg {
    Exact,
    Vqd,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaxcutMethod {
    Bruteforce,
    Vqe,
    Qaoa,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptimizerKind {
    Spsa,
    Qnspsa,
    Grad,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Switch {
    Off,
    On,
}

#[derive(Args, Debug, Clone)]
pub struct ChainArgs {
    /// Number of spins (qubits), at least 4.
    #[arg(long)]
    pub n: usize,
    /// Next-nearest-neighbour ratio.
    #[arg(long, default_value_t = -0.1, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Nearest-neighbour coupling.
    #[arg(
        long = "J",
        visible_alias = "j",
        default_value_t = 1.0,
        allow_negative_numbers = true
    )]
    pub j: f64,
    /// Report energies of 2H (Pauli matrices instead of spin operators).
    #[arg(long)]
    pub doubled_energies: bool,
}

#[derive(Args, Debug, Clone)]
pub struct VariationalArgs {
    /// EfficientSU2 repetitions, or the QAOA level.
    #[arg(long, short = 'p')]
    pub reps: Option<usize>,
    /// Defaults to spsa with noise on, grad otherwise.
    #[arg(long, value_enum)]
    pub optimizer: Option<OptimizerKind>,
    /// Defaults to 800 with noise on, 1300 otherwise.
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long, value_enum, default_value = "off")]
    pub noise: Switch,
    /// Shots per energy estimate; with noise off, setting this switches
    /// from exact expectations to shot sampling.
    #[arg(long)]
    pub shots: Option<u64>,
    /// Depolarizing rate after single-qubit gates.
    #[arg(long)]
    pub p1: Option<f64>,
    /// Depolarizing rate after multi-qubit gates.
    #[arg(long)]
    pub p2: Option<f64>,
    /// Readout bit-flip rate.
    #[arg(long)]
    pub p_readout: Option<f64>,
    /// Shots used to read out the final state.
    #[arg(long, default_value_t = spinvar::vqa::DEFAULT_FINAL_SHOTS)]
    pub final_shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Skip `convergence.svg`.
    #[arg(long)]
    pub no_plot: bool,
}

#[derive(Args, Debug, Clone)]
pub struct MgmGroundArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    #[arg(long, value_enum, default_value = "vqe")]
    pub method: GroundMethod,
    #[command(flatten)]
    pub run: VariationalArgs,
}

#[derive(Args, Debug, Clone)]
pub struct MgmGapArgs {
    #[arg(long, default_value_t = 4)]
    pub n_min: usize,
    /// Defaults to 15 for exact, 9 for vqd.
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long, value_enum, default_value = "exact")]
    pub method: GapMethodArg,
    #[arg(long, default_value_t = -0.1, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(
        long = "J",
        visible_alias = "j",
        default_value_t = 1.0,
        allow_negative_numbers = true
    )]
    pub j: f64,
    /// EfficientSU2 repetitions for vqd; default max(5, ceil(n/2)).
    #[arg(long, short = 'p')]
    pub reps: Option<usize>,
    /// Gradient iterations per vqd level.
    #[arg(long, default_value_t = 500)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub doubled_energies: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub no_plot: bool,
}

#[derive(Args, Debug, Clone)]
pub struct MaxcutArgs {
    /// Edge-list file: node count, then `u v [w]` lines.
    #[arg(long, conflicts_with = "random", required_unless_present = "random")]
    pub graph: Option<PathBuf>,
    /// Connected Erdos-Renyi graph: node count, edge probability, seed.
    #[arg(long, num_args = 3, value_names = ["N", "P", "SEED"])]
    pub random: Option<Vec<String>>,
    /// Uniform edge weights in [LO, HI] for --random (unit weights otherwise).
    #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
    pub weights: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "bruteforce")]
    pub method: MaxcutMethod,
    #[command(flatten)]
    pub run: VariationalArgs,
}

#[derive(Args, Debug, Clone)]
pub struct BenchmarkArgs {
    /// Scenario name.
    pub scenario: String,
    /// Number of seeds, starting at --seed.
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Override the scenario's iteration budget.
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub no_plot: bool,
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::MgmGround(a) => mgm_ground(&a),
        Command::MgmGap(a) => mgm_gap(&a),
        Command::Maxcut(a) => maxcut(&a),
        Command::Benchmark(a) => benchmark(&a),
    }
}

impl VariationalArgs {
    fn simulator(&self) -> Result<Simulator, CliError> {
        let sim = match (self.noise, self.shots) {
            (Switch::Off, None) => Simulator::Exact,
            (Switch::Off, Some(shots)) => Simulator::Sampled {
                shots,
                noise: NoiseConfig::off(),
            },
            (Switch::On, shots) => {
                let d = NoiseConfig::nisq();
                Simulator::Sampled {
                    shots: shots.unwrap_or(1024),
                    noise: NoiseConfig {
                        p1: self.p1.unwrap_or(d.p1),
                        p2: self.p2.unwrap_or(d.p2),
                        p_readout: self.p_readout.unwrap_or(d.p_readout),
                        enabled: true,
                    },
                }
            }
        };
        sim.validate().map_err(CliError::usage)?;
        Ok(sim)
    }

    fn noisy(&self) -> bool {
        self.noise == Switch::On
    }

    fn optimizer(&self) -> OptimizerChoice {
        let kind = self.optimizer.unwrap_or(if self.noisy() {
            OptimizerKind::Spsa
        } else {
            OptimizerKind::Grad
        });
        match kind {
            OptimizerKind::Spsa => OptimizerChoice::Spsa(SpsaConfig::default()),
            OptimizerKind::Qnspsa => OptimizerChoice::Qnspsa(QnspsaConfig::default()),
            OptimizerKind::Grad => OptimizerChoice::Grad(GradientConfig::default()),
        }
    }

    fn run_config(
        &self,
        problem: String,
        exact_energy: Option<f64>,
        convention: EnergyConvention,
    ) -> Result<RunConfig, CliError> {
        let iters = self.iters.unwrap_or(if self.noisy() { 800 } else { 1300 });
        if iters == 0 {
            return Err(CliError::Usage("--iters must be >= 1".into()));
        }
        if self.final_shots == 0 {
            return Err(CliError::Usage("--final-shots must be >= 1".into()));
        }
        let mut cfg = RunConfig::new(problem, self.optimizer(), iters, self.seed);
        cfg.simulator = self.simulator()?;
        cfg.exact_energy = exact_energy;
        cfg.convention = convention;
        cfg.final_shots = self.final_shots;
        Ok(cfg)
    }
}

fn convention(doubled: bool) -> EnergyConvention {
    if doubled {
        EnergyConvention::Doubled
    } else {
        EnergyConvention::Actual
    }
}

/// Variational run; an optimizer abort still leaves its partial trace.
fn finish_run(
    out: &Path,
    method: &str,
    result: spinvar::Result<VqaResult>,
    start: Instant,
    plot: bool,
) -> Result<VqaResult, CliError> {
    match result {
        Ok(r) => {
            let s = Summary::from_result(method, &r, start.elapsed().as_secs_f64());
            summary::write_run(out, &s, &r, plot)?;
            Ok(r)
        }
        Err(Error::OptimizerAborted { source, trace }) => {
            summary::create_dir(out)?;
            summary::write(&out.join("trace.csv"), &trace.to_csv())?;
            Err(CliError::Runtime(format!(
                "optimizer aborted after {} iterations: {source} (partial trace in {})",
                trace.records.len(),
                out.join("trace.csv").display()
            )))
        }
        Err(e) => Err(CliError::runtime(e)),
    }
}

fn report(r: &VqaResult) {
    let mut line = format!("best_energy {} final_energy {}", r.best_energy, r.final_energy);
    if let Some(e) = r.exact_energy {
        let _ = write!(line, " exact_energy {e}");
    }
    if let Some(b) = &r.bitstring {
        let _ = write!(line, " bitstring {b}");
    }
    if let Some(c) = r.cut_value {
        let _ = write!(line, " cut_value {c}");
    }
    println!("{line}");
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
}

fn mgm_problem(p: &MgmParams) -> String {
    format!("mgm n={} J={} alpha={}", p.n_spins, p.j, p.alpha)
}

pub fn mgm_ground(a: &MgmGroundArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let params = MgmParams {
        n_spins: a.chain.n,
        j: a.chain.j,
        alpha: a.chain.alpha,
        half_prefactor: true,
    };
    let h = build_mgm(&params).map_err(CliError::usage)?;
    let conv = convention(a.chain.doubled_energies);
    let problem = mgm_problem(&params);
    let exact_energy = if a.method == GroundMethod::Exact || params.n_spins <= MAX_REFERENCE_SPINS {
        Some(exact::lowest_eigenvalues(&h, 1, a.run.seed).map_err(CliError::runtime)?[0])
    } else {
        None
    };
    match a.method {
        GroundMethod::Exact => {
            let e = conv.factor() * exact_energy.expect("computed above");
            let mut s = Summary::classical(problem, "exact", params.n_spins, e, a.run.seed);
            s.energy_convention = conv;
            s.wall_time_s = start.elapsed().as_secs_f64();
            summary::create_dir(&a.run.out)?;
            summary::write_json(&a.run.out.join("summary.json"), &s)?;
            println!("exact_energy {e}");
            Ok(())
        }
        GroundMethod::Vqe => {
            let reps = a.run.reps.unwrap_or_else(|| default_reps(params.n_spins));
            let ansatz = Ansatz::efficient_su2(params.n_spins, reps).map_err(CliError::usage)?;
            let cfg = a.run.run_config(problem, exact_energy, conv)?;
            let r = finish_run(
                &a.run.out,
                "vqe",
                vqe_run(&h, &ansatz, &cfg),
                start,
                !a.run.no_plot,
            )?;
            report(&r);
            Ok(())
        }
        GroundMethod::Qaoa => {
            let n = params.n_spins;
            let p = a.run.reps.unwrap_or(if n <= 4 { 5 } else { 2 * n });
            if p == 0 {
                return Err(CliError::Usage("QAOA level p must be >= 1".into()));
            }
            let cfg = a.run.run_config(problem, exact_energy, conv)?;
            let r = finish_run(&a.run.out, "qaoa", qaoa_run(&h, p, &cfg), start, !a.run.no_plot)?;
            report(&r);
            Ok(())
        }
    }
}

pub fn gaps_csv(rows: &[spinvar::vqa::GapRow]) -> String {
    let mut s = String::from("n,E0,E1,gap,parity\n");
    for r in rows {
        let parity = match r.parity {
            Parity::Even => "even",
            Parity::Odd => "odd",
        };
        let _ = writeln!(s, "{},{},{},{},{parity}", r.n, r.e0, r.e1, r.gap);
    }
    s
}

pub fn mgm_gap(a: &MgmGapArgs) -> Result<(), CliError> {
    let (default_max, limit) = match a.method {
        GapMethodArg::Exact => (15, 20),
        GapMethodArg::Vqd => (9, 12),
    };
    let n_max = a.n_max.unwrap_or(default_max);
    if a.n_min < 4 {
        return Err(CliError::Usage(format!(
            "n must be >= 4 (got --n-min {})",
            a.n_min
        )));
    }
    if n_max < a.n_min {
        return Err(CliError::Usage(format!(
            "--n-max {n_max} is below --n-min {}",
            a.n_min
        )));
    }
    if n_max > limit {
        return Err(CliError::Usage(format!(
            "--n-max {n_max} exceeds the {limit}-spin limit for this method"
        )));
    }
    let params = MgmParams {
        n_spins: a.n_min,
        j: a.j,
        alpha: a.alpha,
        half_prefactor: true,
    };
    params.validate().map_err(CliError::usage)?;
    let method = match a.method {
        GapMethodArg::Exact => GapMethod::Exact { seed: a.seed },
        GapMethodArg::Vqd => {
            if a.iters == 0 {
                return Err(CliError::Usage("--iters must be >= 1".into()));
            }
            GapMethod::Vqd {
                reps: a.reps,
                run: Box::new(RunConfig::new(
                    "",
                    OptimizerChoice::Grad(GradientConfig::default()),
                    a.iters,
                    a.seed,
                )),
            }
        }
    };
    let ns: Vec<usize> = (a.n_min..=n_max).collect();
    let mut rows = energy_gap_scan(&ns, &params, &method).map_err(CliError::runtime)?;
    let factor = convention(a.doubled_energies).factor();
    for r in &mut rows {
        r.e0 *= factor;
        r.e1 *= factor;
        r.gap *= factor;
    }
    summary::create_dir(&a.out)?;
    summary::write(&a.out.join("gaps.csv"), &gaps_csv(&rows))?;
    if !a.no_plot {
        let series = |parity: Parity, label: &str| Series {
            label: label.to_string(),
            points: rows
                .iter()
                .filter(|r| r.parity == parity)
                .map(|r| (r.n as f64, r.gap))
                .collect(),
            markers: true,
        };
        let chart = Chart {
            title: format!("MGM gap E1 - E0 ({:?})", a.method).to_lowercase(),
            x_label: "spins n".into(),
            y_label: "gap".into(),
            series: vec![series(Parity::Even, "even n"), series(Parity::Odd, "odd n")],
            reference: None,
        };
        summary::write(&a.out.join("gaps.svg"), &chart.render())?;
    }
    print!("{}", gaps_csv(&rows));
    Ok(())
}

fn load_graph(a: &MaxcutArgs) -> Result<(Graph, String), CliError> {
    if let Some(path) = &a.graph {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read graph {}: {e}", path.display())))?;
        let g = parse_graph(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let problem = format!("maxcut {} ({} nodes)", path.display(), g.n_nodes());
        return Ok((g, problem));
    }
    let r = a.random.as_ref().expect("clap requires --graph or --random");
    let n: usize = r[0]
        .parse()
        .map_err(|_| CliError::Usage(format!("--random N: bad node count {:?}", r[0])))?;
    let p: f64 = r[1]
        .parse()
        .map_err(|_| CliError::Usage(format!("--random P: bad probability {:?}", r[1])))?;
    let seed: u64 = r[2]
        .parse()
        .map_err(|_| CliError::Usage(format!("--random SEED: bad seed {:?}", r[2])))?;
    let weights = a.weights.as_ref().map(|w| (w[0], w[1]));
    let mut rng = SeedStream::new(seed).child(0);
    let g = Graph::random_connected(n, p, weights, &mut rng).map_err(CliError::usage)?;
    Ok((g, format!("maxcut G({n}, {p}) seed {seed}")))
}

pub fn maxcut(a: &MaxcutArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let (g, problem) = load_graph(a)?;
    let h: Observable = build_maxcut(&g).map_err(CliError::usage)?;
    summary::create_dir(&a.run.out)?;
    summary::write(&a.run.out.join("graph.txt"), &g.to_edge_list())?;
    let n = g.n_nodes();
    match a.method {
        MaxcutMethod::Bruteforce => {
            let sol = brute_force_maxcut(&g).map_err(CliError::usage)?;
            let mut s = Summary::classical(problem, "bruteforce", n, -sol.value, a.run.seed);
            s.cut_value = Some(sol.value);
            s.bitstring = Some(sol.partition.clone());
            s.wall_time_s = start.elapsed().as_secs_f64();
            summary::write_json(&a.run.out.join("summary.json"), &s)?;
            println!("cut_value {} bitstring {}", sol.value, sol.partition);
            Ok(())
        }
        MaxcutMethod::Vqe | MaxcutMethod::Qaoa => {
            let exact_energy = if n <= MAX_REFERENCE_NODES {
                Some(-brute_force_maxcut(&g).map_err(CliError::runtime)?.value)
            } else {
                None
            };
            let mut cfg = a
                .run
                .run_config(problem, exact_energy, EnergyConvention::Actual)?;
            cfg.sample_final = true;
            cfg.maxcut = true;
            let r = if a.method == MaxcutMethod::Vqe {
                let reps = a.run.reps.unwrap_or_else(|| default_reps(n));
                let ansatz = Ansatz::efficient_su2(n, reps).map_err(CliError::usage)?;
                finish_run(
                    &a.run.out,
                    "vqe",
                    vqe_run(&h, &ansatz, &cfg),
                    start,
                    !a.run.no_plot,
                )?
            } else {
                let p = a.run.reps.unwrap_or(3);
                if p == 0 {
                    return Err(CliError::Usage("QAOA level p must be >= 1".into()));
                }
                finish_run(&a.run.out, "qaoa", qaoa_run(&h, p, &cfg), start, !a.run.no_plot)?
            };
            report(&r);
            Ok(())
        }
    }
}

pub fn benchmark(a: &BenchmarkArgs) -> Result<(), CliError> {
    let scenario = scenarios::find(&a.scenario).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown scenario {:?}; available: {}",
            a.scenario,
            scenarios::names().join(", ")
        ))
    })?;
    if a.seeds == 0 {
        return Err(CliError::Usage("--seeds must be >= 1".into()));
    }
    if a.iters == Some(0) {
        return Err(CliError::Usage("--iters must be >= 1".into()));
    }
    let seeds: Vec<u64> = (a.seed..a.seed + a.seeds).collect();
    let exact_energy = scenario.exact_energy().map_err(CliError::runtime)?;
    let outcomes = scenario.run(&seeds, a.iters).map_err(CliError::runtime)?;
    let mut failures = Vec::new();
    for o in &outcomes {
        match &o.result {
            Ok(r) => {
                let dir = a.out.join(format!("seed-{}", o.seed)).join(o.label);
                let method = if r.ansatz.family == "qaoa" { "qaoa" } else { "vqe" };
                let s = Summary::from_result(method, r, r.trace.wall_time_s);
                summary::write_run(&dir, &s, r, !a.no_plot)?;
            }
            Err(e) => failures.push(format!("seed {} {}: {e}", o.seed, o.label)),
        }
    }
    let agg = scenarios::aggregate(&scenario, exact_energy, &outcomes);
    summary::write_json(&a.out.join("aggregate.json"), &agg)?;
    for (label, r) in &agg.runs {
        println!(
            "{label}: median_final_energy {} median_error {} ({} seeds)",
            r.median_final_energy.map_or("n/a".into(), |v| v.to_string()),
            r.median_error.map_or("n/a".into(), |v| v.to_string()),
            r.seeds.len()
        );
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Runtime(failures.join("; ")))
    }
}
