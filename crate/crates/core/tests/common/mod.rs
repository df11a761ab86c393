//! Reference computations shared by the integration suites. Everything here
//! is written from the definitions and does not call the line minimizer.
#![allow(dead_code)]

use mfbai::divergences::{kl_minus, kl_plus, RewardFamily};
use mfbai::model::{BanditInstance, FidelitySchedule, WeightVector};
use mfbai::table::Table;
use rand::Rng;

/// Cost of moving one arm's top-fidelity mean to `x`:
/// `Σ_m w_m / λ_m [d⁻(μ_m, x + ξ_m) + d⁺(μ_m, x − ξ_m)]`.
pub fn arm_objective(fam: &RewardFamily<f64>, s: &FidelitySchedule<f64>, w: &[f64], mu: &[f64], x: f64) -> f64 {
    (0..s.len())
        .map(|m| {
            let (xi, lam) = (s.xi()[m], s.lambda()[m]);
            let below = kl_minus(fam, mu[m], fam.clamp_mean(x + xi)).unwrap();
            let above = kl_plus(fam, mu[m], fam.clamp_mean(x - xi)).unwrap();
            let below = if mu[m] >= x + xi { below } else { 0.0 };
            let above = if mu[m] <= x - xi { above } else { 0.0 };
            w[m] / lam * (below + above)
        })
        .sum()
}

pub fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).ceil() as usize;
    (0..=n).map(|k| lo + k as f64 * step).collect()
}

/// Search range covering every breakpoint `μ ± ξ` of both rows.
pub fn breakpoint_range(s: &FidelitySchedule<f64>, rows: &[&[f64]]) -> (f64, f64) {
    let xi_max = s.xi().iter().cloned().fold(0.0, f64::max);
    let lo = rows
        .iter()
        .flat_map(|r| r.iter())
        .cloned()
        .fold(f64::INFINITY, f64::min)
        - xi_max;
    let hi = rows
        .iter()
        .flat_map(|r| r.iter())
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
        + xi_max;
    (lo - 0.01, hi + 0.01)
}

/// Grid minimum of the merged objective (both arms share one top mean).
pub fn grid_merged(
    fam: &RewardFamily<f64>,
    s: &FidelitySchedule<f64>,
    w: [&[f64]; 2],
    mu: [&[f64]; 2],
    step: f64,
) -> (f64, f64) {
    let (lo, hi) = breakpoint_range(s, &mu);
    grid(lo, hi, step)
        .into_iter()
        .map(|x| {
            (
                x,
                arm_objective(fam, s, w[0], mu[0], x) + arm_objective(fam, s, w[1], mu[1], x),
            )
        })
        .fold((f64::NAN, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b })
}

/// Grid minimum of `g_i(x_i) + g_j(x_j)` over `x_i ≤ x_j`, by prefix minima.
pub fn grid_transport(
    fam: &RewardFamily<f64>,
    s: &FidelitySchedule<f64>,
    w: [&[f64]; 2],
    mu: [&[f64]; 2],
    step: f64,
) -> f64 {
    let (lo, hi) = breakpoint_range(s, &mu);
    let mut prefix_i = f64::INFINITY;
    let mut best = f64::INFINITY;
    for x in grid(lo, hi, step) {
        prefix_i = prefix_i.min(arm_objective(fam, s, w[0], mu[0], x));
        best = best.min(prefix_i + arm_objective(fam, s, w[1], mu[1], x));
    }
    best
}

pub fn random_simplex(rng: &mut impl Rng, k: usize, m: usize) -> WeightVector<f64> {
    let v: Vec<f64> = (0..k * m).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    WeightVector::normalized(Table::from_vec(k, m, v).unwrap()).unwrap()
}

/// Strictly decreasing precisions ending in zero, increasing costs.
pub fn random_schedule(rng: &mut impl Rng, m: usize) -> FidelitySchedule<f64> {
    let mut xi: Vec<f64> = (0..m - 1).map(|_| rng.gen_range(0.01..0.3)).collect();
    xi.sort_by(|a, b| b.partial_cmp(a).unwrap());
    xi.dedup();
    while xi.len() < m - 1 {
        let last = *xi.last().unwrap_or(&0.3);
        xi.push(last / 2.0);
    }
    xi.push(0.0);
    let mut lambda: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..5.0)).collect();
    lambda.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for k in 1..m {
        if lambda[k] <= lambda[k - 1] {
            lambda[k] = lambda[k - 1] * 1.01;
        }
    }
    FidelitySchedule::new(xi, lambda).unwrap()
}

/// Random Gaussian instance satisfying the multi-fidelity constraints with a unique best arm.
pub fn random_mf_instance(rng: &mut impl Rng, k: usize, m: usize) -> BanditInstance<f64> {
    loop {
        let s = random_schedule(rng, m);
        let rows: Vec<Vec<f64>> = (0..k)
            .map(|_| {
                let top = rng.gen_range(0.0..1.0);
                s.xi().iter().map(|&x| top + rng.gen_range(-x..=x)).collect()
            })
            .collect();
        let sigma2 = rng.gen_range(0.05..1.0);
        let inst = BanditInstance::from_rows(
            &rows,
            RewardFamily::gaussian(sigma2).unwrap(),
            s.xi().to_vec(),
            s.lambda().to_vec(),
        )
        .unwrap();
        if inst.best_arm().is_some() && inst.is_mf() {
            return inst;
        }
    }
}
