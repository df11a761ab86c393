//! Optimal cost proportions `ω*`, the characteristic complexity `C*(μ)` and
//! the lower bound on the expected cost of any δ-correct strategy.
//!
//! `F(·, μ)` is concave on the simplex, so `ω*` is found by exponentiated
//! subgradient ascent with best-iterate selection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BanditInstance, WeightVector};
use crate::scalar::Scalar;
use crate::table::Table;
use crate::transport::{big_f, subgradient_f};

pub const DEFAULT_ITERS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub iters: usize,
    /// Step size at iteration `t` is `alpha0 / √t` in units of the gain's sup norm.
    pub alpha0: f64,
    /// Perturbs the starting point; `None` starts from the uniform allocation.
    pub seed: Option<u64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            iters: DEFAULT_ITERS,
            alpha0: 1.0,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar + Serialize"))]
pub struct OracleSolution<T> {
    #[serde(serialize_with = "serialize_weights")]
    pub omega_star: WeightVector<T>,
    /// `F(ω*, μ) = C*(μ)⁻¹`.
    pub f_star: T,
    pub iterations: usize,
    /// Best value overall minus best value over the last tenth of the run.
    pub stationarity_gap: T,
}

fn serialize_weights<T: Scalar + Serialize, S: serde::Serializer>(
    w: &WeightVector<T>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    w.values().to_rows().serialize(s)
}

impl<T: Scalar> OracleSolution<T> {
    /// `C*(μ)`, infinite when `F(ω*, μ) = 0`.
    pub fn c_star(&self) -> T {
        T::one() / self.f_star
    }
}

/// Solves `max_ω F(ω, μ)` with `iters` exponentiated-gradient steps.
pub fn solve_oracle<T: Scalar>(instance: &BanditInstance<T>, iters: usize, seed: u64) -> Result<OracleSolution<T>> {
    solve_oracle_with(
        instance,
        &OracleConfig {
            iters,
            seed: Some(seed),
            ..OracleConfig::default()
        },
    )
}

pub fn solve_oracle_with<T: Scalar>(instance: &BanditInstance<T>, config: &OracleConfig) -> Result<OracleSolution<T>> {
    if instance.best_arm().is_none() {
        return Err(Error::Degenerate(
            "the best arm at the top fidelity is not unique".into(),
        ));
    }
    if config.iters == 0 || !(config.alpha0 > 0.0) {
        return Err(Error::Domain(
            "oracle needs at least one iteration and a positive step".into(),
        ));
    }
    let (k, m) = (instance.arms(), instance.fidelities());
    let n = k * m;
    let (mu, schedule, family) = (instance.means(), instance.schedule(), instance.family());

    let mut log_w = vec![T::zero(); n];
    if let Some(seed) = config.seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in &mut log_w {
            *v = T::lit(0.1 * (rng.gen::<f64>() - 0.5));
        }
    }
    // Keeps every coordinate strictly positive after exponentiation.
    let floor = T::min_positive_value().ln() * T::lit(0.9);
    let alpha0 = T::lit(config.alpha0);
    let tail_start = config.iters - config.iters / 10;

    let mut w = softmax(&log_w, k, m)?;
    let mut best = (T::neg_infinity(), w.clone());
    let mut best_tail = T::neg_infinity();
    let mut tail_sum = vec![T::zero(); n];
    let mut tail_len = 0usize;

    for t in 1..=config.iters {
        let sg = subgradient_f(&w, mu, schedule, family)?;
        if sg.value > best.0 {
            best = (sg.value, w.clone());
        }
        if t > tail_start {
            best_tail = best_tail.max(sg.value);
            for (s, &v) in tail_sum.iter_mut().zip(w.values().as_slice()) {
                *s += v;
            }
            tail_len += 1;
        }
        let gmax = sg.g.as_slice().iter().fold(T::zero(), |a, &b| a.max(b.abs()));
        if !(gmax > T::zero()) {
            break;
        }
        let step = alpha0 / (T::from_count(t).sqrt() * gmax);
        for (lw, &g) in log_w.iter_mut().zip(sg.g.as_slice()) {
            *lw += step * g;
        }
        let top = log_w.iter().copied().fold(T::neg_infinity(), T::max);
        for lw in &mut log_w {
            *lw = (*lw - top).max(floor);
        }
        w = softmax(&log_w, k, m)?;
    }

    // The average of the tail iterates often sits closer to the optimum than any
    // single oscillating iterate; keep it only if it is actually better.
    if tail_len > 0 {
        let avg = WeightVector::normalized(Table::from_vec(k, m, tail_sum)?)?;
        let v = big_f(&avg, mu, schedule, family)?.value;
        if v > best.0 {
            best = (v, avg);
        }
        best_tail = best_tail.max(v);
    }
    let omega_star = best.1;
    let f_star = big_f(&omega_star, mu, schedule, family)?.value;
    let stationarity_gap = if best_tail.is_finite() {
        (f_star - best_tail).max(T::zero())
    } else {
        T::zero()
    };
    Ok(OracleSolution {
        omega_star,
        f_star,
        iterations: config.iters,
        stationarity_gap,
    })
}

fn softmax<T: Scalar>(log_w: &[T], k: usize, m: usize) -> Result<WeightVector<T>> {
    let top = log_w.iter().copied().fold(T::neg_infinity(), T::max);
    let v: Vec<T> = log_w.iter().map(|&l| (l - top).exp()).collect();
    WeightVector::normalized(Table::from_vec(k, m, v)?)
}

/// `C*(μ) log(1 / (2.4 δ))` from a known `F(ω*, μ)`; zero once `δ ≥ 1/2.4`.
pub fn lower_bound_from_f<T: Scalar>(f_star: T, delta: T) -> Result<T> {
    if !(delta > T::zero() && delta < T::one()) {
        return Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    let log_term = (T::one() / (T::lit(2.4) * delta)).ln().max(T::zero());
    Ok(log_term / f_star)
}

/// Lower bound on the expected cost of any δ-correct strategy on `instance`.
pub fn lower_bound_cost<T: Scalar>(instance: &BanditInstance<T>, delta: T) -> Result<T> {
    lower_bound_from_f(solve_oracle_with(instance, &OracleConfig::default())?.f_star, delta)
}

/// Coordinates that carry no mass in any optimal allocation.
///
/// Marks `(a, m)`, `a` suboptimal, when `μ_{a,m} + ξ_m > μ_{⋆,m}`, and `(⋆, m)`
/// when `μ_{⋆,m} − ξ_m < μ_{j,M}` for every other arm `j`. Strict inequalities
/// keep boundary coordinates, which can carry mass, unmasked.
pub fn zero_weight_mask<T: Scalar>(instance: &BanditInstance<T>) -> Result<Table<bool>> {
    if !instance.is_mf() {
        return Err(Error::Invalid(
            "zero_weight_mask needs an instance satisfying the multi-fidelity constraints".into(),
        ));
    }
    let star = instance
        .best_arm()
        .ok_or_else(|| Error::Degenerate("best arm is not unique".into()))?;
    let (k, m_count) = (instance.arms(), instance.fidelities());
    let top = m_count - 1;
    let xi = instance.schedule().xi();
    let mut mask = Table::filled(k, m_count, false);
    for m in 0..m_count {
        for a in 0..k {
            mask[(a, m)] = if a == star {
                (0..k)
                    .filter(|&j| j != star)
                    .all(|j| instance.mean(star, m) - xi[m] < instance.mean(j, top))
            } else {
                instance.mean(a, m) + xi[m] > instance.mean(star, m)
            };
        }
    }
    Ok(mask)
}

/// Exhaustive search over the simplex grid with spacing `1 / resolution`.
/// Intended as a reference for two-arm instances with at most three fidelities.
pub fn brute_oracle_2xm<T: Scalar>(instance: &BanditInstance<T>, resolution: usize) -> Result<OracleSolution<T>> {
    if instance.arms() != 2 || instance.fidelities() > 3 {
        return Err(Error::Unsupported(
            "brute force oracle handles K = 2 and M <= 3 only".into(),
        ));
    }
    if resolution == 0 {
        return Err(Error::Domain("resolution must be positive".into()));
    }
    let (k, m) = (2, instance.fidelities());
    let n = k * m;
    let scale = T::from_count(resolution);
    let mut parts = vec![0usize; n];
    let mut best: Option<(T, WeightVector<T>)> = None;
    let mut evaluated = 0usize;
    loop {
        if parts[..n - 1].iter().sum::<usize>() <= resolution {
            parts[n - 1] = resolution - parts[..n - 1].iter().sum::<usize>();
            let v: Vec<T> = parts.iter().map(|&p| T::from_count(p) / scale).collect();
            let w = WeightVector::normalized(Table::from_vec(k, m, v)?)?;
            let f = big_f(&w, instance.means(), instance.schedule(), instance.family())?.value;
            evaluated += 1;
            if best.as_ref().map_or(true, |(b, _)| f > *b) {
                best = Some((f, w));
            }
        }
        // Odometer over the first n - 1 coordinates.
        let mut i = 0;
        loop {
            if i == n - 1 {
                let (f_star, omega_star) = best.expect("grid is nonempty");
                return Ok(OracleSolution {
                    omega_star,
                    f_star,
                    iterations: evaluated,
                    stationarity_gap: T::zero(),
                });
            }
            parts[i] += 1;
            if parts[..n - 1].iter().sum::<usize>() <= resolution {
                break;
            }
            parts[i] = 0;
            i += 1;
        }
    }
}
