//! Seeded simulation, batch execution and experiment I/O.
//!
//! Trial `i` of a batch with seed `s` draws rewards from ChaCha8 seeded with
//! `s` on stream `i`, so every trial has its own independent, reproducible
//! stream no matter which worker runs it.

use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::statistics::{Data, OrderStatistics, Statistics};

use crate::algorithms::{
    grad_initialize, grad_should_stop, grad_step, lucb_oracle_demo, mfgrad_should_stop, mfgrad_step, AlgoState,
    LearningRate, MfGradConfig,
};
use crate::divergences::RewardFamily;
use crate::error::{Error, Result};
use crate::model::{preset, BanditInstance};
use crate::scalar::Scalar;
use crate::table::Table;

/// Per-trial generator: `seed` selects the key, `trial` the stream.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One reward from arm `a` at fidelity `m`.
pub fn sample_reward<T: Scalar, R: Rng + ?Sized>(instance: &BanditInstance<T>, a: usize, m: usize, rng: &mut R) -> T {
    let mean = instance.mean(a, m);
    match *instance.family() {
        RewardFamily::Gaussian { sigma2 } => mean + sigma2.sqrt() * T::sample_standard_normal(rng),
        RewardFamily::Bernoulli => {
            if T::sample_unit(rng) < mean {
                T::one()
            } else {
                T::zero()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    Mfgrad,
    MfgradConst,
    Grad,
    LucbOracle,
}

impl Algo {
    pub const ALL: [Algo; 4] = [Algo::Mfgrad, Algo::MfgradConst, Algo::Grad, Algo::LucbOracle];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Mfgrad => "mfgrad",
            Algo::MfgradConst => "mfgrad-const",
            Algo::Grad => "grad",
            Algo::LucbOracle => "lucb-oracle",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algo::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Structural(format!("unknown algorithm {s:?}")))
    }
}

/// Settings of the LUCB oracle demonstrator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LucbSettings {
    /// Fidelity pulled for each arm.
    pub targets: Vec<usize>,
    pub l_const: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec<T> {
    pub instance: BanditInstance<T>,
    pub algo: Algo,
    /// Learning rate and threshold settings; `delta` lives here.
    pub config: MfGradConfig,
    pub trials: usize,
    pub seed: u64,
    pub max_steps: usize,
    pub max_cost: Option<f64>,
    pub trajectory_stride: Option<usize>,
    /// When false the GLR test is never applied and every trial runs to `max_steps`.
    pub stopping: bool,
    pub lucb: LucbSettings,
}

impl<T: Scalar> ExperimentSpec<T> {
    pub fn new(instance: BanditInstance<T>, algo: Algo, delta: f64) -> Result<Self> {
        let config = match algo {
            Algo::MfgradConst => MfGradConfig::constant(delta)?,
            _ => MfGradConfig::new(delta)?,
        };
        let arms = instance.arms();
        Ok(ExperimentSpec {
            instance,
            algo,
            config,
            trials: 1000,
            seed: 0,
            max_steps: 10_000_000,
            max_cost: None,
            trajectory_stride: None,
            stopping: true,
            lucb: LucbSettings {
                targets: vec![0; arms],
                l_const: 1.0,
            },
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.trials == 0 {
            return Err(Error::Domain("at least one trial is required".into()));
        }
        let cells = self.instance.arms() * self.instance.fidelities();
        if self.max_steps < cells {
            return Err(Error::Domain(format!("max_steps must be at least K*M = {cells}")));
        }
        if self.trajectory_stride == Some(0) {
            return Err(Error::Domain("trajectory stride must be positive".into()));
        }
        if self.instance.best_arm().is_none() {
            return Err(Error::Degenerate("instance has tied best arms".into()));
        }
        Ok(())
    }
}

/// Empirical cost proportions `C(t) / Σ C(t)` at step `t`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: usize,
    pub omega: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algo: String,
    pub seed: u64,
    pub trial: u64,
    pub stopped: bool,
    pub tau: usize,
    pub total_cost: f64,
    /// Forced by the budget when `stopped` is false.
    pub recommendation: usize,
    pub correct: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<Snapshot>>,
}

/// One trial of `spec`. Budget exhaustion yields `stopped = false`.
pub fn run_trial<T: Scalar>(spec: &ExperimentSpec<T>, trial: u64) -> Result<RunRecord> {
    spec.validate()?;
    let instance = &spec.instance;
    let mut rng = trial_rng(spec.seed, trial);
    let mut source = |a: usize, m: usize| sample_reward(instance, a, m, &mut rng);
    let best = instance.best_arm();

    let (stopped, tau, total_cost, recommendation, trajectory) = match spec.algo {
        Algo::LucbOracle => {
            let out = lucb_oracle_demo(
                instance.schedule(),
                &spec.lucb.targets,
                T::lit(spec.config.delta),
                T::lit(spec.lucb.l_const),
                spec.max_steps,
                &mut source,
            )?;
            (
                out.stopped,
                out.pulls,
                out.total_cost.as_f64(),
                out.recommendation,
                None,
            )
        }
        Algo::Mfgrad | Algo::MfgradConst | Algo::Grad => {
            let mut config = spec.config;
            if spec.algo == Algo::MfgradConst {
                config.learning_rate = LearningRate::Constant;
            }
            let grad = spec.algo == Algo::Grad;
            let top = instance.fidelities() - 1;
            let mut state = if grad {
                grad_initialize(instance.arms(), instance.schedule(), *instance.family(), &mut source)?
            } else {
                AlgoState::initialize(
                    instance.arms(),
                    instance.schedule().clone(),
                    *instance.family(),
                    &mut source,
                )?
            };
            let mut trajectory = spec.trajectory_stride.map(|_| Vec::new());
            let snapshot = |state: &AlgoState<T>| -> Snapshot {
                let c = state.cost_proportions();
                let omega = if grad {
                    let mut full = Table::filled(instance.arms(), instance.fidelities(), 0.0);
                    for a in 0..instance.arms() {
                        full[(a, top)] = c.get(a, 0).as_f64();
                    }
                    full.as_slice().to_vec()
                } else {
                    c.values().as_slice().iter().map(|v| v.as_f64()).collect()
                };
                Snapshot { t: state.t(), omega }
            };
            let stopped = loop {
                if spec.stopping {
                    let check = if grad {
                        grad_should_stop(&state, &config)?
                    } else {
                        mfgrad_should_stop(&state, &config)?
                    };
                    if check.stop {
                        break Some(check.recommendation);
                    }
                }
                let over_budget = spec.max_cost.is_some_and(|c| state.total_cost().as_f64() >= c);
                if state.t() >= spec.max_steps || over_budget {
                    break None;
                }
                if grad {
                    grad_step(&mut state, &config, &mut source, top)?;
                } else {
                    mfgrad_step(&mut state, &config, &mut source)?;
                }
                if let (Some(stride), Some(traj)) = (spec.trajectory_stride, trajectory.as_mut()) {
                    if state.t() % stride == 0 {
                        traj.push(snapshot(&state));
                    }
                }
            };
            let recommendation = match stopped {
                Some(r) => r,
                None => {
                    if grad {
                        grad_should_stop(&state, &config)?.recommendation
                    } else {
                        mfgrad_should_stop(&state, &config)?.recommendation
                    }
                }
            };
            (
                stopped.is_some(),
                state.t(),
                state.total_cost().as_f64(),
                recommendation,
                trajectory,
            )
        }
    };
    Ok(RunRecord {
        algo: spec.algo.name().to_string(),
        seed: spec.seed,
        trial,
        stopped,
        tau,
        total_cost,
        recommendation,
        correct: Some(recommendation) == best,
        trajectory,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub algo: String,
    pub trials: usize,
    pub stopped: usize,
    pub error_rate: f64,
    pub mean_cost: f64,
    pub median_cost: f64,
    pub q1_cost: f64,
    pub q3_cost: f64,
    pub mean_tau: f64,
}

impl Summary {
    pub fn of(records: &[RunRecord]) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Domain("cannot summarize zero records".into()));
        }
        let costs: Vec<f64> = records.iter().map(|r| r.total_cost).collect();
        let mut data = Data::new(costs.clone());
        let n = records.len() as f64;
        Ok(Summary {
            algo: records[0].algo.clone(),
            trials: records.len(),
            stopped: records.iter().filter(|r| r.stopped).count(),
            error_rate: records.iter().filter(|r| !r.correct).count() as f64 / n,
            mean_cost: costs.iter().sum::<f64>() / n,
            median_cost: data.median(),
            q1_cost: data.lower_quartile(),
            q3_cost: data.upper_quartile(),
            mean_tau: records.iter().map(|r| r.tau as f64).mean(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchResult {
    pub records: Vec<RunRecord>,
    pub summary: Summary,
}

/// All trials of `spec` on the rayon pool, ordered by trial index.
pub fn run_batch<T: Scalar>(spec: &ExperimentSpec<T>) -> Result<BatchResult> {
    spec.validate()?;
    let mut records = (0..spec.trials as u64)
        .into_par_iter()
        .map(|i| run_trial(spec, i))
        .collect::<Result<Vec<_>>>()?;
    records.sort_by_key(|r| r.trial);
    let summary = Summary::of(&records)?;
    Ok(BatchResult { records, summary })
}

/// Same as [`run_batch`] on the calling thread.
pub fn run_batch_serial<T: Scalar>(spec: &ExperimentSpec<T>) -> Result<BatchResult> {
    spec.validate()?;
    let records = (0..spec.trials as u64)
        .map(|i| run_trial(spec, i))
        .collect::<Result<Vec<_>>>()?;
    let summary = Summary::of(&records)?;
    Ok(BatchResult { records, summary })
}

/// Flat CSV row of a [`RunRecord`].
#[derive(Debug, Serialize, Deserialize)]
struct RecordRow {
    algo: String,
    seed: u64,
    trial: u64,
    stopped: bool,
    tau: usize,
    total_cost: f64,
    recommendation: usize,
    correct: bool,
}

pub fn write_records_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(RecordRow {
            algo: r.algo.clone(),
            seed: r.seed,
            trial: r.trial,
            stopped: r.stopped,
            tau: r.tau,
            total_cost: r.total_cost,
            recommendation: r.recommendation,
            correct: r.correct,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads records written by [`write_records_csv`]; trajectories are not part of the CSV.
pub fn read_records_csv(path: &Path) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize::<RecordRow>()
        .map(|row| {
            let row = row?;
            Ok(RunRecord {
                algo: row.algo,
                seed: row.seed,
                trial: row.trial,
                stopped: row.stopped,
                tau: row.tau,
                total_cost: row.total_cost,
                recommendation: row.recommendation,
                correct: row.correct,
                trajectory: None,
            })
        })
        .collect()
}

/// Trajectory CSV: `t` followed by `omega_a_m` in row-major order.
pub fn write_trajectory_csv(path: &Path, arms: usize, fidelities: usize, snapshots: &[Snapshot]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["t".to_string()];
    for a in 0..arms {
        for m in 0..fidelities {
            header.push(format!("omega_{a}_{m}"));
        }
    }
    w.write_record(&header)?;
    for s in snapshots {
        if s.omega.len() != arms * fidelities {
            return Err(Error::Structural("snapshot width does not match the instance".into()));
        }
        let mut row = vec![s.t.to_string()];
        row.extend(s.omega.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trajectory_csv(path: &Path) -> Result<Vec<Snapshot>> {
    let mut r = csv::Reader::from_path(path)?;
    r.records()
        .map(|rec| {
            let rec = rec?;
            let mut fields = rec.iter();
            let t = fields
                .next()
                .ok_or_else(|| Error::Structural("empty trajectory row".into()))?
                .parse::<usize>()
                .map_err(|e| Error::Structural(e.to_string()))?;
            let omega = fields
                .map(|f| f.parse::<f64>().map_err(|e| Error::Structural(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            Ok(Snapshot { t, omega })
        })
        .collect()
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn read_records_json(path: &Path) -> Result<Vec<RunRecord>> {
    Ok(serde_json::from_reader(File::open(path)?)?)
}

/// Parameters of the random multi-fidelity instance generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomInstanceSpec {
    pub arms: usize,
    /// Nonincreasing, last entry zero; one per fidelity.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub lambda: Vec<f64>,
    pub min_gap: f64,
    pub sigma2: f64,
}

/// Costs `0.05, 0.1, 0.2, …` doubling up to fidelity `M − 1`, then `5`
/// at the top fidelity; for five fidelities this is the cost vector of the
/// shipped 4 × 5 instance.
pub fn default_lambda(fidelities: usize) -> Vec<f64> {
    let mut l: Vec<f64> = (0..fidelities.saturating_sub(1))
        .map(|m| 0.05 * 2f64.powi(m as i32))
        .collect();
    l.push(5.0);
    l
}

pub const MAX_REJECTIONS: usize = 10_000;

/// Top-fidelity means uniform on `[0, 1]` with pairwise gaps at least
/// `min_gap`; lower fidelities uniform within `ξ_m = a_m + b_m / 2` of them.
pub fn random_instance_gen<T: Scalar>(spec: &RandomInstanceSpec, seed: u64) -> Result<BanditInstance<T>> {
    let m = spec.a.len();
    if m == 0 || spec.b.len() != m || spec.lambda.len() != m {
        return Err(Error::Structural("a, b and lambda need one entry per fidelity".into()));
    }
    if spec.arms < 2 {
        return Err(Error::Structural("need at least two arms".into()));
    }
    for v in [&spec.a, &spec.b] {
        if v.windows(2).any(|w| w[1] > w[0]) || v[m - 1] != 0.0 || v.iter().any(|&x| x < 0.0) {
            return Err(Error::Invalid(
                "a and b must be nonnegative, nonincreasing and end in zero".into(),
            ));
        }
    }
    let xi: Vec<f64> = spec.a.iter().zip(&spec.b).map(|(a, b)| a + b / 2.0).collect();
    let family = RewardFamily::gaussian(T::lit(spec.sigma2))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = (0..MAX_REJECTIONS)
        .map(|_| (0..spec.arms).map(|_| rng.gen::<f64>()).collect::<Vec<_>>())
        .find(|tops| {
            tops.iter()
                .enumerate()
                .all(|(i, x)| tops[i + 1..].iter().all(|y| (x - y).abs() >= spec.min_gap))
        })
        .ok_or_else(|| {
            Error::Invalid(format!(
                "no means with gap {} after {MAX_REJECTIONS} draws",
                spec.min_gap
            ))
        })?;
    let rows: Vec<Vec<T>> = top
        .iter()
        .map(|&mt| {
            (0..m)
                .map(|f| {
                    if xi[f] > 0.0 {
                        T::lit(rng.gen_range(mt - xi[f]..=mt + xi[f]))
                    } else {
                        T::lit(mt)
                    }
                })
                .collect()
        })
        .collect();
    let inst = BanditInstance::from_rows(
        &rows,
        family,
        xi.iter().map(|&x| T::lit(x)).collect(),
        spec.lambda.iter().map(|&l| T::lit(l)).collect(),
    )?;
    inst.validate().into_result()?;
    Ok(inst)
}

/// Shipped experiments, scaled to run on a desk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Demo {
    /// Cost complexity on the 4 × 5 instance: MF-GRAD against GRAD, δ = 0.01.
    Fig1,
    /// Cost complexity on the 5 × 2 instance: MF-GRAD against GRAD, δ = 0.01.
    Fig2,
    /// Empirical cost proportions of MF-GRAD on the 5 × 2 instance, no stopping.
    Fig3,
    /// LUCB restricted to the cheap fidelity failing to stop.
    LucbBug,
}

impl Demo {
    pub const ALL: [Demo; 4] = [Demo::Fig1, Demo::Fig2, Demo::Fig3, Demo::LucbBug];

    pub fn name(self) -> &'static str {
        match self {
            Demo::Fig1 => "fig1",
            Demo::Fig2 => "fig2",
            Demo::Fig3 => "fig3",
            Demo::LucbBug => "lucb-bug",
        }
    }

    /// The experiment specs run by this demo.
    pub fn specs(self) -> Result<Vec<ExperimentSpec<f64>>> {
        let cost_complexity = |name: &str| -> Result<Vec<ExperimentSpec<f64>>> {
            [Algo::Mfgrad, Algo::Grad]
                .into_iter()
                .map(|algo| {
                    let mut s = ExperimentSpec::new(preset(name)?, algo, 0.01)?;
                    s.trials = 1000;
                    Ok(s)
                })
                .collect()
        };
        match self {
            Demo::Fig1 => cost_complexity("table-mu1"),
            Demo::Fig2 => cost_complexity("five-by-two"),
            Demo::Fig3 => {
                let mut s = ExperimentSpec::new(preset("five-by-two")?, Algo::Mfgrad, 0.01)?;
                s.trials = 100;
                s.max_steps = 100_000;
                s.stopping = false;
                s.trajectory_stride = Some(100);
                Ok(vec![s])
            }
            Demo::LucbBug => {
                let mut s = ExperimentSpec::new(preset("lucb-2x2")?, Algo::LucbOracle, 0.01)?;
                s.trials = 50;
                s.max_steps = 1_000_000;
                s.lucb.targets = vec![0, 0];
                Ok(vec![s])
            }
        }
    }
}

impl FromStr for Demo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Demo::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::Structural(format!("unknown demo {s:?}")))
    }
}
