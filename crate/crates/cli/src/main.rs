use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use mfbai::harness::{
    default_lambda, random_instance_gen, run_batch, write_json, write_records_csv, write_trajectory_csv, Algo,
    BatchResult, Demo, ExperimentSpec, RandomInstanceSpec, Snapshot,
};
use mfbai::model::{preset, PRESET_NAMES};
use mfbai::oracle::{solve_oracle, zero_weight_mask, DEFAULT_ITERS};
use mfbai::transport::pair_matrix;
use mfbai::{Instance, ThresholdMode};

#[derive(Parser)]
#[command(name = "mfbai", version, about = "Multi-fidelity best-arm identification toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal cost proportions and the complexity C*(mu) of an instance.
    Oracle {
        /// Instance JSON file or preset name.
        #[arg(long)]
        instance: String,
        #[arg(long, default_value_t = DEFAULT_ITERS)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a batch of identification trials.
    Run {
        #[arg(long)]
        instance: String,
        #[arg(long, value_parser = parse_algo)]
        algo: Algo,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        max_steps: Option<usize>,
        #[arg(long)]
        max_cost: Option<f64>,
        /// Record empirical cost proportions every k steps.
        #[arg(long)]
        trajectory_stride: Option<usize>,
        /// Disable the stopping rule; every trial runs to --max-steps.
        #[arg(long)]
        no_stopping: bool,
        /// Use the threshold with the universal constant C~ instead of the simplified one.
        #[arg(long)]
        c_tilde: Option<f64>,
        /// Fidelity (0-based) pulled for each arm by lucb-oracle.
        #[arg(long, value_delimiter = ',')]
        lucb_targets: Option<Vec<usize>>,
        #[arg(long, default_value_t = 1.0)]
        lucb_l: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one of the shipped experiments: fig1, fig2, fig3, lucb-bug.
    Demo {
        name: String,
        #[arg(long, default_value = "demo-out")]
        out: PathBuf,
        /// Override the number of trials.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate a random multi-fidelity Gaussian instance.
    Gen {
        #[arg(long = "K")]
        arms: usize,
        #[arg(long = "M")]
        fidelities: usize,
        #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
        a: Vec<f64>,
        #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
        b: Vec<f64>,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        lambda: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.1)]
        min_gap: f64,
        #[arg(long, default_value_t = 0.1)]
        sigma2: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the built-in instances.
    Presets,
}

fn parse_algo(s: &str) -> std::result::Result<Algo, String> {
    s.parse().map_err(|e: mfbai::Error| e.to_string())
}

fn load_instance(spec: &str) -> Result<Instance> {
    let path = Path::new(spec);
    if path.is_file() {
        Ok(Instance::load(path).with_context(|| format!("reading instance {}", path.display()))?)
    } else {
        preset(spec).with_context(|| format!("{spec:?} is neither a file nor a preset ({})", PRESET_NAMES.join(", ")))
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Oracle {
            instance,
            iters,
            seed,
            out,
        } => oracle(&instance, iters, seed, &out),
        Command::Run {
            instance,
            algo,
            delta,
            trials,
            seed,
            max_steps,
            max_cost,
            trajectory_stride,
            no_stopping,
            c_tilde,
            lucb_targets,
            lucb_l,
            out,
        } => {
            let inst = load_instance(&instance)?;
            let report = inst.validate();
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            let mut spec = ExperimentSpec::new(inst, algo, delta)?;
            spec.trials = trials;
            spec.seed = seed;
            if let Some(m) = max_steps {
                spec.max_steps = m;
            }
            spec.max_cost = max_cost;
            spec.trajectory_stride = trajectory_stride;
            spec.stopping = !no_stopping;
            if let Some(c) = c_tilde {
                spec.config.threshold_mode = ThresholdMode::Theoretical;
                spec.config.c_tilde = c;
            }
            if let Some(t) = lucb_targets {
                spec.lucb.targets = t;
            }
            spec.lucb.l_const = lucb_l;
            let batch = run_batch(&spec)?;
            write_batch(&out, &spec, &batch, "")?;
            print_summary(&batch);
            Ok(())
        }
        Command::Demo {
            name,
            out,
            trials,
            seed,
        } => {
            let demo: Demo = name.parse()?;
            for mut spec in demo.specs()? {
                if let Some(n) = trials {
                    spec.trials = n;
                }
                spec.seed = seed;
                let batch = run_batch(&spec)?;
                let prefix = format!("{}_", spec.algo);
                write_batch(&out, &spec, &batch, &prefix)?;
                if demo == Demo::Fig3 {
                    let mean = mean_trajectory(&batch);
                    let (k, m) = (spec.instance.arms(), spec.instance.fidelities());
                    write_trajectory_csv(&out.join(format!("{prefix}trajectory_mean.csv")), k, m, &mean)?;
                }
                print_summary(&batch);
            }
            Ok(())
        }
        Command::Gen {
            arms,
            fidelities,
            a,
            b,
            lambda,
            min_gap,
            sigma2,
            seed,
            out,
        } => {
            if a.len() != fidelities || b.len() != fidelities {
                bail!("--a and --b need exactly M = {fidelities} entries");
            }
            let spec = RandomInstanceSpec {
                arms,
                a,
                b,
                lambda: lambda.unwrap_or_else(|| default_lambda(fidelities)),
                min_gap,
                sigma2,
            };
            let inst: Instance = random_instance_gen(&spec, seed)?;
            fs::write(&out, inst.to_json()?).with_context(|| format!("writing {}", out.display()))?;
            Ok(())
        }
        Command::Presets => {
            for name in PRESET_NAMES {
                let inst: Instance = preset(name)?;
                println!("{name}: K={} M={}", inst.arms(), inst.fidelities());
            }
            Ok(())
        }
    }
}

fn oracle(instance: &str, iters: usize, seed: u64, out: &Path) -> Result<()> {
    let inst = load_instance(instance)?;
    let sol = solve_oracle(&inst, iters, seed)?;
    let pairs = pair_matrix(&sol.omega_star, inst.means(), inst.schedule(), inst.family())?;
    let per_pair: Vec<Vec<Option<f64>>> = (0..inst.arms())
        .map(|i| (0..inst.arms()).map(|j| (i != j).then(|| pairs[(i, j)])).collect())
        .collect();
    let mask = zero_weight_mask(&inst).ok().map(|m| m.to_rows());
    let doc = json!({
        "omega_star": sol.omega_star.values().to_rows(),
        "f_star": sol.f_star,
        "c_star": sol.c_star(),
        "per_pair_costs": per_pair,
        "mask": mask,
        "iterations": sol.iterations,
        "stationarity_gap": sol.stationarity_gap,
    });
    write_json(out, &doc)?;
    println!("f_star = {:.9e}, c_star = {:.6}", sol.f_star, sol.c_star());
    Ok(())
}

fn write_batch(dir: &Path, spec: &ExperimentSpec<f64>, batch: &BatchResult, prefix: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_records_csv(&dir.join(format!("{prefix}records.csv")), &batch.records)?;
    write_json(&dir.join(format!("{prefix}summary.json")), &batch.summary)?;
    let (k, m) = (spec.instance.arms(), spec.instance.fidelities());
    for r in &batch.records {
        if let Some(traj) = &r.trajectory {
            write_trajectory_csv(&dir.join(format!("{prefix}trajectory_{}.csv", r.trial)), k, m, traj)?;
        }
    }
    Ok(())
}

/// Pointwise mean of the trials' trajectories (all share the same snapshot times).
fn mean_trajectory(batch: &BatchResult) -> Vec<Snapshot> {
    let trajs: Vec<&Vec<Snapshot>> = batch.records.iter().filter_map(|r| r.trajectory.as_ref()).collect();
    let Some(first) = trajs.first() else { return Vec::new() };
    let n = trajs.len() as f64;
    (0..first.len())
        .map(|i| {
            let mut omega = vec![0.0; first[i].omega.len()];
            for t in &trajs {
                for (o, v) in omega.iter_mut().zip(&t[i].omega) {
                    *o += v / n;
                }
            }
            Snapshot { t: first[i].t, omega }
        })
        .collect()
}

fn print_summary(batch: &BatchResult) {
    let s = &batch.summary;
    println!(
        "{}: trials={} stopped={} error_rate={:.4} cost mean={:.2} median={:.2} q1={:.2} q3={:.2}",
        s.algo, s.trials, s.stopped, s.error_rate, s.mean_cost, s.median_cost, s.q1_cost, s.q3_cost
    );
}
