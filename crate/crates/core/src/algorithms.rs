//! Sequential identification strategies and their stopping thresholds.
//!
//! [`AlgoState`] carries everything MF-GRAD needs between rounds. GRAD is the
//! same program restricted to the top fidelity, and [`lucb_oracle_demo`] runs
//! LUCB with an oracle that always picks a fixed fidelity per arm.

use serde::{Deserialize, Serialize};

use crate::divergences::RewardFamily;
use crate::error::{Error, Result};
use crate::model::{best_arms_of, cost_to_pull, FidelitySchedule, WeightVector};
use crate::scalar::Scalar;
use crate::table::Table;
use crate::transport::{glr_max_min, subgradient_f};

/// Anything that returns a reward for pulling `arm` at `fidelity`.
pub trait RewardSource<T> {
    fn pull(&mut self, arm: usize, fidelity: usize) -> T;
}

impl<T, F: FnMut(usize, usize) -> T> RewardSource<T> for F {
    fn pull(&mut self, arm: usize, fidelity: usize) -> T {
        self(arm, fidelity)
    }
}

/// Presents fidelity `0` of a single-fidelity learner as the top fidelity of a
/// multi-fidelity source.
pub struct TopFidelity<'a, S> {
    pub inner: &'a mut S,
    pub top: usize,
}

impl<'a, T, S: RewardSource<T>> RewardSource<T> for TopFidelity<'a, S> {
    fn pull(&mut self, arm: usize, _fidelity: usize) -> T {
        self.inner.pull(arm, self.top)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearningRate {
    /// `α_t = 1/√t`.
    Theory,
    /// `α_t = constant_alpha`.
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMode {
    /// `log(K/δ) + M log(log t + 1)`.
    Simplified,
    /// The threshold with proven δ-correctness, including the constant `C̃`.
    Theoretical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MfGradConfig {
    /// Gains are clipped at `clip √t`.
    pub clip: f64,
    pub learning_rate: LearningRate,
    pub constant_alpha: f64,
    pub threshold_mode: ThresholdMode,
    pub c_tilde: f64,
    /// Added to one empirical best arm when several tie at the top fidelity.
    pub tie_epsilon: f64,
    pub delta: f64,
}

impl MfGradConfig {
    pub fn new(delta: f64) -> Result<Self> {
        let c = MfGradConfig {
            clip: 100.0,
            learning_rate: LearningRate::Theory,
            constant_alpha: 0.25,
            threshold_mode: ThresholdMode::Simplified,
            c_tilde: 0.0,
            tie_epsilon: 1e-6,
            delta,
        };
        c.validate()?;
        Ok(c)
    }

    /// The constant learning-rate variant (`α = 0.25`).
    pub fn constant(delta: f64) -> Result<Self> {
        Ok(MfGradConfig {
            learning_rate: LearningRate::Constant,
            ..Self::new(delta)?
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.clip > 0.0) {
            return Err(Error::Domain(format!(
                "clip constant must be positive, got {}",
                self.clip
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Domain(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.constant_alpha > 0.0) {
            return Err(Error::Domain("constant learning rate must be positive".into()));
        }
        if !(self.tie_epsilon > 0.0) {
            return Err(Error::Domain("tie epsilon must be positive".into()));
        }
        if !self.c_tilde.is_finite() {
            return Err(Error::Domain("c_tilde must be finite".into()));
        }
        Ok(())
    }

    fn alpha<T: Scalar>(&self, t: usize) -> T {
        match self.learning_rate {
            LearningRate::Theory => T::one() / T::from_count(t).sqrt(),
            LearningRate::Constant => T::lit(self.constant_alpha),
        }
    }
}

/// Stopping threshold `β_{t,δ}`.
pub fn threshold<T: Scalar>(
    t: usize,
    delta: T,
    arms: usize,
    fidelities: usize,
    mode: ThresholdMode,
    c_tilde: T,
) -> Result<T> {
    if t == 0 {
        return Err(Error::Domain("threshold is defined for t >= 1".into()));
    }
    if !(delta > T::zero() && delta < T::one()) {
        return Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    let m = T::from_count(fidelities);
    let log_k = (T::from_count(arms) / delta).ln();
    let log_t = T::from_count(t).ln();
    Ok(match mode {
        ThresholdMode::Simplified => log_k + m * (log_t + T::one()).ln(),
        ThresholdMode::Theoretical => {
            let two_m = m + m;
            log_k
                + two_m * (T::lit(4.0) * log_k + T::one()).ln()
                + T::lit(12.0) * m * (log_t + T::lit(3.0)).ln()
                + two_m * c_tilde
        }
    })
}

/// Learner state after `t` pulls.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgoState<T> {
    schedule: FidelitySchedule<T>,
    family: RewardFamily<T>,
    t: usize,
    counts: Table<u64>,
    sums: Table<T>,
    hat_mu: Table<T>,
    cum_gains: Table<T>,
    cum_pi_prime: Table<T>,
    tilde_omega: WeightVector<T>,
    last_pull: Option<(usize, usize)>,
}

impl<T: Scalar> AlgoState<T> {
    /// Pulls every (arm, fidelity) once, in row-major order.
    pub fn initialize(
        arms: usize,
        schedule: FidelitySchedule<T>,
        family: RewardFamily<T>,
        source: &mut impl RewardSource<T>,
    ) -> Result<Self> {
        if arms < 2 {
            return Err(Error::Structural("need at least two arms".into()));
        }
        let m = schedule.len();
        let n = arms * m;
        let tilde_omega = WeightVector::uniform(arms, m);
        let pi = cost_to_pull(&tilde_omega, &schedule)?;
        let uniform = T::one() / T::from_count(n);
        let mut cum_pi_prime = Table::filled(arms, m, T::zero());
        for s in 1..=n {
            let gamma = forced_exploration::<T>(s);
            for (c, &p) in cum_pi_prime.as_mut_slice().iter_mut().zip(pi.values().as_slice()) {
                *c += (T::one() - gamma) * p + gamma * uniform;
            }
        }
        let mut state = AlgoState {
            schedule,
            family,
            t: 0,
            counts: Table::filled(arms, m, 0),
            sums: Table::filled(arms, m, T::zero()),
            hat_mu: Table::filled(arms, m, T::zero()),
            cum_gains: Table::filled(arms, m, T::zero()),
            cum_pi_prime,
            tilde_omega,
            last_pull: None,
        };
        for a in 0..arms {
            for f in 0..m {
                let x = source.pull(a, f);
                state.record(a, f, x);
            }
        }
        Ok(state)
    }

    fn record(&mut self, arm: usize, fidelity: usize, reward: T) {
        let cell = (arm, fidelity);
        self.counts[cell] += 1;
        self.sums[cell] += reward;
        let mean = self.sums[cell] / T::lit(self.counts[cell] as f64);
        self.hat_mu[cell] = match self.family {
            RewardFamily::Bernoulli => self.family.clamp_mean(mean),
            RewardFamily::Gaussian { .. } => mean,
        };
        self.t += 1;
        self.last_pull = Some(cell);
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn arms(&self) -> usize {
        self.counts.rows()
    }

    pub fn fidelities(&self) -> usize {
        self.counts.cols()
    }

    pub fn schedule(&self) -> &FidelitySchedule<T> {
        &self.schedule
    }

    pub fn family(&self) -> &RewardFamily<T> {
        &self.family
    }

    pub fn counts(&self) -> &Table<u64> {
        &self.counts
    }

    pub fn count_weights(&self) -> WeightVector<T> {
        WeightVector::raw(self.counts.map(|c| T::lit(c as f64))).expect("counts are nonnegative")
    }

    /// `C_{a,m} = λ_m N_{a,m}`.
    pub fn costs(&self) -> Table<T> {
        let lambda = self.schedule.lambda();
        let mut c = self.counts.map(|n| T::lit(n as f64));
        for (k, v) in c.as_mut_slice().iter_mut().enumerate() {
            *v *= lambda[k % lambda.len()];
        }
        c
    }

    pub fn total_cost(&self) -> T {
        self.costs().as_slice().iter().copied().sum()
    }

    /// Empirical cost proportions `C(t) / Σ C(t)`.
    pub fn cost_proportions(&self) -> WeightVector<T> {
        WeightVector::normalized(self.costs()).expect("at least one pull")
    }

    pub fn sums(&self) -> &Table<T> {
        &self.sums
    }

    pub fn hat_mu(&self) -> &Table<T> {
        &self.hat_mu
    }

    pub fn cum_gains(&self) -> &Table<T> {
        &self.cum_gains
    }

    pub fn cum_pi_prime(&self) -> &Table<T> {
        &self.cum_pi_prime
    }

    pub fn tilde_omega(&self) -> &WeightVector<T> {
        &self.tilde_omega
    }

    pub fn last_pull(&self) -> Option<(usize, usize)> {
        self.last_pull
    }

    /// Empirical means with the lowest-index tied best arm nudged up by `epsilon`.
    fn tie_broken_means(&self, epsilon: T) -> Table<T> {
        let mut mu = self.hat_mu.clone();
        let best = best_arms_of(&mu);
        if best.len() > 1 {
            let top = mu.cols() - 1;
            mu[(best[0], top)] += epsilon;
        }
        mu
    }
}

/// `γ_t = 1 / (4 √t)`.
fn forced_exploration<T: Scalar>(t: usize) -> T {
    T::one() / (T::lit(4.0) * T::from_count(t).sqrt())
}

/// One MF-GRAD round: gain, exponential-weights update, forced exploration,
/// cumulative tracking, and one pull. Returns the pulled cell.
pub fn mfgrad_step<T: Scalar>(
    state: &mut AlgoState<T>,
    config: &MfGradConfig,
    source: &mut impl RewardSource<T>,
) -> Result<(usize, usize)> {
    let (k, m) = (state.arms(), state.fidelities());
    if state.t < k * m {
        return Err(Error::Invalid("initialization phase not complete".into()));
    }
    let t = state.t;
    let mu_tilde = state.tie_broken_means(T::lit(config.tie_epsilon));
    let pi_tilde = cost_to_pull(&state.tilde_omega, &state.schedule)?;

    match subgradient_f(&state.tilde_omega, &mu_tilde, &state.schedule, &state.family) {
        Ok(sg) => {
            let c_tilde: T = pi_tilde
                .values()
                .as_slice()
                .iter()
                .enumerate()
                .map(|(idx, &p)| state.schedule.lambda()[idx % m] * p)
                .sum();
            let cap = T::lit(config.clip) * T::from_count(t).sqrt();
            for (acc, &g) in state.cum_gains.as_mut_slice().iter_mut().zip(sg.g.as_slice()) {
                *acc += (c_tilde * g).min(cap);
            }
        }
        // Empirical means with F = 0 carry no gradient information.
        Err(Error::Degenerate(_)) => {}
        Err(e) => return Err(e),
    }

    let alpha: T = config.alpha(t + 1);
    state.tilde_omega = exponential_weights(&state.cum_gains, alpha)?;
    let pi_next = cost_to_pull(&state.tilde_omega, &state.schedule)?;
    let gamma = forced_exploration::<T>(t);
    let uniform = T::one() / T::from_count(k * m);
    for (c, &p) in state
        .cum_pi_prime
        .as_mut_slice()
        .iter_mut()
        .zip(pi_next.values().as_slice())
    {
        *c += (T::one() - gamma) * p + gamma * uniform;
    }

    let mut pick = 0;
    let mut best_deficit = T::neg_infinity();
    for (idx, (&c, &n)) in state
        .cum_pi_prime
        .as_slice()
        .iter()
        .zip(state.counts.as_slice())
        .enumerate()
    {
        let deficit = c - T::lit(n as f64);
        if deficit > best_deficit {
            best_deficit = deficit;
            pick = idx;
        }
    }
    let (arm, fidelity) = (pick / m, pick % m);
    let x = source.pull(arm, fidelity);
    state.record(arm, fidelity, x);
    Ok((arm, fidelity))
}

/// `ω ∝ exp(α · gains)`, computed with the maximum subtracted and floored so
/// every coordinate stays positive.
pub fn exponential_weights<T: Scalar>(gains: &Table<T>, alpha: T) -> Result<WeightVector<T>> {
    let top = gains.as_slice().iter().copied().fold(T::neg_infinity(), T::max);
    let floor = T::min_positive_value().ln() * T::lit(0.9);
    let w = gains.map(|g| (alpha * (g - top)).max(floor).exp());
    WeightVector::normalized(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StopCheck<T> {
    pub stop: bool,
    /// `argmax_i min_{j≠i}` of the GLR statistics, lowest index on ties.
    pub recommendation: usize,
    pub statistic: T,
    pub threshold: T,
}

/// GLR stopping test at the current state.
pub fn mfgrad_should_stop<T: Scalar>(state: &AlgoState<T>, config: &MfGradConfig) -> Result<StopCheck<T>> {
    let (k, m) = (state.arms(), state.fidelities());
    let mm = glr_max_min(&state.count_weights(), &state.hat_mu, &state.schedule, &state.family)?;
    let beta = threshold(
        state.t.max(1),
        T::lit(config.delta),
        k,
        m,
        config.threshold_mode,
        T::lit(config.c_tilde),
    )?;
    Ok(StopCheck {
        stop: mm.value >= beta,
        recommendation: mm.arm,
        statistic: mm.value,
        threshold: beta,
    })
}

/// GRAD: MF-GRAD on the top fidelity alone. The state's single fidelity
/// stands for fidelity `M` of the source.
pub fn grad_initialize<T: Scalar, S: RewardSource<T>>(
    arms: usize,
    schedule: &FidelitySchedule<T>,
    family: RewardFamily<T>,
    source: &mut S,
) -> Result<AlgoState<T>> {
    let top = schedule.len() - 1;
    AlgoState::initialize(
        arms,
        schedule.top_only(),
        family,
        &mut TopFidelity { inner: source, top },
    )
}

/// One GRAD round; returns the pulled arm.
pub fn grad_step<T: Scalar, S: RewardSource<T>>(
    state: &mut AlgoState<T>,
    config: &MfGradConfig,
    source: &mut S,
    top: usize,
) -> Result<usize> {
    if state.fidelities() != 1 {
        return Err(Error::Structural("GRAD state must have a single fidelity".into()));
    }
    Ok(mfgrad_step(state, config, &mut TopFidelity { inner: source, top })?.0)
}

pub fn grad_should_stop<T: Scalar>(state: &AlgoState<T>, config: &MfGradConfig) -> Result<StopCheck<T>> {
    mfgrad_should_stop(state, config)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LucbOutcome<T> {
    pub stopped: bool,
    pub pulls: usize,
    pub total_cost: T,
    pub recommendation: usize,
    pub counts: Vec<Vec<u64>>,
}

/// LUCB with oracle fidelities, for two arms.
///
/// Each round pulls the two candidate arms at `target_fidelities`. Indices use
/// `β(n, t, δ) = √(log(L t⁴ / δ) / n)`, `t` the total number of pulls, and are
/// clipped to `[0, 1]`. Stops once `LCB_ℓ > UCB_u`.
pub fn lucb_oracle_demo<T: Scalar>(
    schedule: &FidelitySchedule<T>,
    target_fidelities: &[usize],
    delta: T,
    l_const: T,
    max_steps: usize,
    source: &mut impl RewardSource<T>,
) -> Result<LucbOutcome<T>> {
    let k = target_fidelities.len();
    if k != 2 {
        return Err(Error::Unsupported("the LUCB oracle demo handles two arms".into()));
    }
    let m = schedule.len();
    if target_fidelities.iter().any(|&f| f >= m) {
        return Err(Error::Structural("target fidelity out of range".into()));
    }
    if !(delta > T::zero() && delta < T::one()) || !(l_const > T::zero()) {
        return Err(Error::Domain("need 0 < delta < 1 and L > 0".into()));
    }
    let xi = schedule.xi();
    let mut counts = Table::filled(k, m, 0u64);
    let mut sums = Table::filled(k, m, T::zero());
    let mut t = 0usize;
    let mut lcb = vec![T::zero(); k];
    let mut ucb = vec![T::one(); k];
    let (mut leader, mut challenger) = (0usize, 1usize);
    let mut stopped = false;
    while t + 2 <= max_steps {
        for arm in [leader, challenger] {
            let f = target_fidelities[arm];
            let x = source.pull(arm, f);
            counts[(arm, f)] += 1;
            sums[(arm, f)] += x;
            t += 1;
        }
        let log_term = (l_const * T::from_count(t).powi(4) / delta).ln();
        for arm in 0..k {
            let (mut lo, mut hi) = (T::neg_infinity(), T::infinity());
            for f in 0..m {
                let n = counts[(arm, f)];
                if n == 0 {
                    continue;
                }
                let nf = T::lit(n as f64);
                let width = (log_term / nf).sqrt();
                let mean = sums[(arm, f)] / nf;
                lo = lo.max(mean - xi[f] - width);
                hi = hi.min(mean + xi[f] + width);
            }
            lcb[arm] = lo.max(T::zero());
            ucb[arm] = hi.min(T::one());
        }
        leader = if ucb[1] > ucb[0] { 1 } else { 0 };
        challenger = 1 - leader;
        if lcb[leader] > ucb[challenger] {
            stopped = true;
            break;
        }
    }
    let lambda = schedule.lambda();
    let total_cost = counts.indexed().map(|((_, f), n)| lambda[f] * T::lit(n as f64)).sum();
    Ok(LucbOutcome {
        stopped,
        pulls: t,
        total_cost,
        recommendation: leader,
        counts: counts.to_rows(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gaussian_source(mu: Table<f64>, sigma: f64, seed: u64) -> impl FnMut(usize, usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        move |a, m| mu[(a, m)] + sigma * f64::sample_standard_normal(&mut rng)
    }

    #[test]
    fn threshold_values() {
        let b = threshold(100, 0.01, 2, 2, ThresholdMode::Simplified, 0.0).unwrap();
        let direct = 200f64.ln() + 2.0 * (100f64.ln() + 1.0).ln();
        assert_abs_diff_eq!(b, direct, epsilon = 1e-12);
        assert_abs_diff_eq!(b, 8.745_696_205_164_327, epsilon = 1e-9);
        let one = threshold(100, 0.01, 2, 1, ThresholdMode::Simplified, 0.0).unwrap();
        assert_abs_diff_eq!(one, 200f64.ln() + (100f64.ln() + 1.0).ln(), epsilon = 1e-12);
        assert!(threshold(0, 0.1, 2, 2, ThresholdMode::Simplified, 0.0).is_err());
        let theo = threshold(100, 0.01, 2, 2, ThresholdMode::Theoretical, 0.5).unwrap();
        let l = 200f64.ln();
        let expected = l + 4.0 * (4.0 * l + 1.0).ln() + 24.0 * (100f64.ln() + 3.0).ln() + 4.0 * 0.5;
        assert_abs_diff_eq!(theo, expected, epsilon = 1e-12);
    }

    #[test]
    fn zero_gains_give_uniform_weights() {
        let w = exponential_weights(&Table::filled(3, 2, 0.0), 0.7).unwrap();
        assert!(w
            .values()
            .as_slice()
            .iter()
            .all(|&v: &f64| (v - 1.0 / 6.0).abs() < 1e-15));
        let extreme = exponential_weights(&Table::from_vec(1, 2, vec![0.0, 1e6]).unwrap(), 1.0).unwrap();
        assert!(extreme.get(0, 0) > 0.0);
    }

    #[test]
    fn initialization_pulls_every_cell_once() {
        let s = FidelitySchedule::new(vec![0.1, 0.0], vec![0.5, 2.0]).unwrap();
        let mu = Table::from_rows(&[vec![0.6, 0.55], vec![0.4, 0.45]]).unwrap();
        let mut src = gaussian_source(mu, 1.0, 0);
        let st = AlgoState::initialize(2, s, RewardFamily::gaussian(1.0).unwrap(), &mut src).unwrap();
        assert_eq!(st.t(), 4);
        assert!(st.counts().as_slice().iter().all(|&n| n == 1));
        assert_eq!(st.costs().to_rows(), vec![vec![0.5, 2.0], vec![0.5, 2.0]]);
        assert_abs_diff_eq!(st.cum_pi_prime().as_slice().iter().sum::<f64>(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn huge_threshold_does_not_stop() {
        let s = FidelitySchedule::new(vec![0.0], vec![1.0]).unwrap();
        let mu = Table::from_rows(&[vec![0.6], vec![0.5]]).unwrap();
        let mut src = gaussian_source(mu, 1.0, 1);
        let st = AlgoState::initialize(2, s, RewardFamily::gaussian(1.0).unwrap(), &mut src).unwrap();
        let cfg = MfGradConfig::new(1e-300).unwrap();
        assert!(!mfgrad_should_stop(&st, &cfg).unwrap().stop);
    }

    #[test]
    fn mfgrad_runs_and_keeps_weights_positive() {
        let s = FidelitySchedule::new(vec![0.1, 0.0], vec![0.1, 1.0]).unwrap();
        let mu = Table::from_rows(&[vec![0.6, 0.55], vec![0.35, 0.4]]).unwrap();
        let mut src = gaussian_source(mu, 0.3, 2);
        let mut st = AlgoState::initialize(2, s, RewardFamily::gaussian(0.09).unwrap(), &mut src).unwrap();
        let cfg = MfGradConfig::new(0.1).unwrap();
        for _ in 0..2000 {
            mfgrad_step(&mut st, &cfg, &mut src).unwrap();
            assert!(st.tilde_omega().values().as_slice().iter().all(|&w| w > 0.0));
        }
        assert_eq!(st.t(), 2004);
        let check = mfgrad_should_stop(&st, &cfg).unwrap();
        assert!(check.stop);
        assert_eq!(check.recommendation, 0);
    }

    #[test]
    fn grad_matches_mfgrad_on_single_fidelity() {
        let s = FidelitySchedule::new(vec![0.0], vec![2.0]).unwrap();
        let mu = Table::from_rows(&[vec![0.6], vec![0.5], vec![0.3]]).unwrap();
        let fam = RewardFamily::gaussian(1.0).unwrap();
        let cfg = MfGradConfig::new(0.05).unwrap();
        let mut a_src = gaussian_source(mu.clone(), 1.0, 7);
        let mut b_src = gaussian_source(mu, 1.0, 7);
        let mut a = AlgoState::initialize(3, s.clone(), fam, &mut a_src).unwrap();
        let mut b = grad_initialize(3, &s, fam, &mut b_src).unwrap();
        for _ in 0..500 {
            let pa = mfgrad_step(&mut a, &cfg, &mut a_src).unwrap();
            let pb = grad_step(&mut b, &cfg, &mut b_src, 0).unwrap();
            assert_eq!(pa.0, pb);
        }
        assert_eq!(a, b);
    }

    #[test]
    fn lucb_stops_at_top_fidelity() {
        let s = FidelitySchedule::new(vec![0.1, 0.0], vec![0.1, 5.0]).unwrap();
        let mu = Table::from_rows(&[vec![0.64, 0.6], vec![0.46, 0.5]]).unwrap();
        let mut src = gaussian_source(mu, 1.0, 3);
        let out = lucb_oracle_demo(&s, &[1, 1], 0.01, 1.0, 1_000_000, &mut src).unwrap();
        assert!(out.stopped);
        assert_eq!(out.recommendation, 0);
        assert_eq!(out.counts[0][0], 0);
    }

    #[test]
    fn lucb_rejects_more_than_two_arms() {
        let s = FidelitySchedule::new(vec![0.0], vec![1.0]).unwrap();
        let mut src = |_: usize, _: usize| 0.0;
        assert!(matches!(
            lucb_oracle_demo(&s, &[0, 0, 0], 0.1, 1.0, 10, &mut src),
            Err(Error::Unsupported(_))
        ));
    }
}
