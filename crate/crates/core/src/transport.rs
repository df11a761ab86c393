//! Transport costs `f_{i,j}`, the max-min value `F`, and its subgradient.
//!
//! For a pair of arms `(i, j)`, `f_{i,j}(w, μ)` is the smallest weighted KL
//! distance from `μ` to a model in which both arms satisfy the multi-fidelity
//! constraints and arm `j` is at least as good as arm `i` at the top fidelity.
//! Once the top-fidelity mean `x` of an arm is fixed, every fidelity `m`
//! contributes
//!
//! ```text
//! d(μ_m, x + ξ_m)   if x ≤ μ_m − ξ_m
//! d(μ_m, x − ξ_m)   if x ≥ μ_m + ξ_m
//! 0                 otherwise
//! ```
//!
//! so the problem collapses to one-dimensional convex minimizations over
//! piecewise objectives whose pieces change only at the breakpoints
//! `μ_m ± ξ_m`. These are solved exactly by enumerating the breakpoints:
//! inside an interval between consecutive breakpoints the active set is fixed
//! and the stationarity condition has a closed form (constant variance) or a
//! monotone root (Bernoulli).

use serde::Serialize;

use crate::divergences::RewardFamily;
use crate::error::{Error, Result};
use crate::model::{FidelitySchedule, Normalization, WeightVector};
use crate::scalar::Scalar;
use crate::table::Table;

/// Slack used when accepting a stationary point at the edge of its interval.
const INTERVAL_SLACK: f64 = 1e-12;

/// One weighted term of a one-dimensional transport objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell<T> {
    pub weight: T,
    pub mean: T,
    pub xi: T,
}

impl<T: Scalar> Cell<T> {
    /// Unweighted contribution when the arm's top-fidelity mean is moved to `x`.
    #[inline]
    pub fn cost(&self, family: &RewardFamily<T>, x: T) -> T {
        if x <= self.mean - self.xi {
            family.divergence(self.mean, x + self.xi)
        } else if x >= self.mean + self.xi {
            family.divergence(self.mean, x - self.xi)
        } else {
            T::zero()
        }
    }
}

/// Minimizer and minimum of a one-dimensional transport objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineMinimum<T> {
    pub argmin: T,
    pub value: T,
}

pub fn line_objective<T: Scalar>(family: &RewardFamily<T>, cells: &[Cell<T>], x: T) -> T {
    cells
        .iter()
        .filter(|c| c.weight > T::zero())
        .map(|c| c.weight * c.cost(family, x))
        .sum()
}

/// Exact minimization of `x ↦ Σ weight · cost(x)` by breakpoint enumeration.
///
/// Returns `None` when no cell carries positive weight (the objective is
/// identically zero). When the minimum is zero the argmin set is the
/// feasibility interval `[max(μ − ξ), min(μ + ξ)]` and its midpoint is returned.
pub fn minimize_line<T: Scalar>(family: &RewardFamily<T>, cells: &[Cell<T>]) -> Result<Option<LineMinimum<T>>> {
    let mut lo = T::neg_infinity();
    let mut hi = T::infinity();
    let mut breakpoints: Vec<T> = Vec::with_capacity(2 * cells.len());
    for c in cells.iter().filter(|c| c.weight > T::zero()) {
        lo = lo.max(c.mean - c.xi);
        hi = hi.min(c.mean + c.xi);
        breakpoints.push(c.mean - c.xi);
        breakpoints.push(c.mean + c.xi);
    }
    if breakpoints.is_empty() {
        return Ok(None);
    }
    if lo <= hi {
        return Ok(Some(LineMinimum {
            argmin: (lo + hi) / T::lit(2.0),
            value: T::zero(),
        }));
    }
    breakpoints.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    breakpoints.dedup();

    let mut best = LineMinimum {
        argmin: T::nan(),
        value: T::infinity(),
    };
    let mut consider = |x: T| {
        let v = line_objective(family, cells, x);
        if v < best.value {
            best = LineMinimum { argmin: x, value: v };
        }
    };
    for &b in &breakpoints {
        consider(b);
    }
    for w in breakpoints.windows(2) {
        if let Some(x) = interval_stationary_point(family, cells, w[0], w[1]) {
            consider(x);
        }
    }
    if !best.value.is_finite() {
        return Err(Error::Internal(
            "breakpoint enumeration produced no finite candidate".into(),
        ));
    }
    Ok(Some(best))
}

/// Stationary point of the objective restricted to `[left, right]`, where
/// the active pieces are those active at the interval's midpoint.
fn interval_stationary_point<T: Scalar>(family: &RewardFamily<T>, cells: &[Cell<T>], left: T, right: T) -> Option<T> {
    let mid = (left + right) / T::lit(2.0);
    if family.has_constant_variance() {
        // η = Σ w (μ ± ξ) / Σ w over the active pieces.
        let (mut num, mut den) = (T::zero(), T::zero());
        for c in cells.iter().filter(|c| c.weight > T::zero()) {
            if mid >= c.mean + c.xi {
                num += c.weight * (c.mean + c.xi);
                den += c.weight;
            } else if mid <= c.mean - c.xi {
                num += c.weight * (c.mean - c.xi);
                den += c.weight;
            }
        }
        if den <= T::zero() {
            return Some(mid);
        }
        let x = num / den;
        let slack = T::lit(INTERVAL_SLACK) * (T::one() + x.abs());
        (x >= left - slack && x <= right + slack).then(|| x.max(left).min(right))
    } else {
        let slope = |x: T| -> T {
            let mut s = T::zero();
            for c in cells.iter().filter(|c| c.weight > T::zero()) {
                if mid >= c.mean + c.xi {
                    s += c.weight * family.divergence_slope(c.mean, x - c.xi);
                } else if mid <= c.mean - c.xi {
                    s += c.weight * family.divergence_slope(c.mean, x + c.xi);
                }
            }
            s
        };
        let (mut a, mut b) = (left, right);
        if slope(a) > T::zero() || slope(b) < T::zero() {
            return None;
        }
        for _ in 0..200 {
            let m = (a + b) / T::lit(2.0);
            if m <= a || m >= b {
                break;
            }
            if slope(m) < T::zero() {
                a = m;
            } else {
                b = m;
            }
        }
        Some((a + b) / T::lit(2.0))
    }
}

/// How raw weights turn into per-term coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Weighting {
    /// Cost proportions or costs: divide by `λ_m`.
    PerCost,
    /// Pull counts: use as is.
    PerPull,
}

/// Which closest alternative attains `f_{i,j}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Both arms moved to a common top-fidelity mean `η*`.
    Merged,
    /// Each arm projected on its own multi-fidelity set; `ψ*_j > ψ*_i` already.
    Separated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransportResult<T> {
    pub value: T,
    pub regime: Regime,
    /// Common minimizer, set in the merged regime.
    pub eta: Option<T>,
    /// Per-arm minimizers; `None` when the arm carries no weight.
    pub psi_i: Option<T>,
    pub psi_j: Option<T>,
    pub pair: (usize, usize),
}

impl<T: Scalar> TransportResult<T> {
    /// Top-fidelity mean of `arm` in the closest alternative.
    fn location(&self, arm: usize) -> Option<T> {
        match self.regime {
            Regime::Merged => self.eta,
            Regime::Separated if arm == self.pair.0 => self.psi_i,
            Regime::Separated => self.psi_j,
        }
    }
}

/// Precomputed per-term coefficients for one `(weights, means)` configuration.
struct Transport<'a, T> {
    coeff: Table<T>,
    mu: &'a Table<T>,
    xi: &'a [T],
    family: RewardFamily<T>,
}

impl<'a, T: Scalar> Transport<'a, T> {
    fn new(
        w: &WeightVector<T>,
        mu: &'a Table<T>,
        schedule: &'a FidelitySchedule<T>,
        family: &RewardFamily<T>,
        weighting: Weighting,
    ) -> Result<Self> {
        if w.shape() != mu.shape() {
            return Err(Error::Structural(format!(
                "weights {:?} vs means {:?}",
                w.shape(),
                mu.shape()
            )));
        }
        if mu.cols() != schedule.len() {
            return Err(Error::Structural(
                "means and schedule disagree on the number of fidelities".into(),
            ));
        }
        if mu.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("means must be finite".into()));
        }
        let coeff = match weighting {
            Weighting::PerPull => w.values().clone(),
            Weighting::PerCost => {
                if schedule.lambda().iter().any(|&l| !(l > T::zero())) {
                    return Err(Error::Domain("costs must be positive".into()));
                }
                let cols = mu.cols();
                let mut c = w.values().clone();
                for (k, v) in c.as_mut_slice().iter_mut().enumerate() {
                    *v /= schedule.lambda()[k % cols];
                }
                c
            }
        };
        Ok(Transport {
            coeff,
            mu,
            xi: schedule.xi(),
            family: *family,
        })
    }

    fn push_cells(&self, arm: usize, out: &mut Vec<Cell<T>>) {
        out.extend(
            self.coeff
                .row(arm)
                .iter()
                .zip(self.mu.row(arm))
                .zip(self.xi)
                .map(|((&weight, &mean), &xi)| Cell { weight, mean, xi }),
        );
    }

    fn psi(&self, arm: usize) -> Result<Option<LineMinimum<T>>> {
        let mut cells = Vec::with_capacity(self.xi.len());
        self.push_cells(arm, &mut cells);
        minimize_line(&self.family, &cells)
    }

    fn all_psi(&self) -> Result<Vec<Option<LineMinimum<T>>>> {
        (0..self.mu.rows()).map(|a| self.psi(a)).collect()
    }

    fn pair(
        &self,
        i: usize,
        j: usize,
        psi_i: Option<LineMinimum<T>>,
        psi_j: Option<LineMinimum<T>>,
    ) -> Result<TransportResult<T>> {
        if let (Some(pi), Some(pj)) = (psi_i, psi_j) {
            if pj.argmin > pi.argmin {
                return Ok(TransportResult {
                    value: pi.value + pj.value,
                    regime: Regime::Separated,
                    eta: None,
                    psi_i: Some(pi.argmin),
                    psi_j: Some(pj.argmin),
                    pair: (i, j),
                });
            }
        }
        let mut cells = Vec::with_capacity(2 * self.xi.len());
        self.push_cells(i, &mut cells);
        self.push_cells(j, &mut cells);
        let merged = minimize_line(&self.family, &cells)?.unwrap_or_else(|| {
            let top = self.mu.cols() - 1;
            LineMinimum {
                argmin: (self.mu[(i, top)] + self.mu[(j, top)]) / T::lit(2.0),
                value: T::zero(),
            }
        });
        Ok(TransportResult {
            value: merged.value,
            regime: Regime::Merged,
            eta: Some(merged.argmin),
            psi_i: psi_i.map(|p| p.argmin),
            psi_j: psi_j.map(|p| p.argmin),
            pair: (i, j),
        })
    }

    /// `max_i min_{j≠i} f_{i,j}` with lowest-index tie breaking.
    fn max_min(&self) -> Result<MaxMin<T>> {
        let k = self.mu.rows();
        if k < 2 {
            return Err(Error::Structural("need at least two arms".into()));
        }
        let psi = self.all_psi()?;
        let top = self.mu.cols() - 1;
        // Visiting arms by decreasing top mean finds a large row minimum early
        // and lets the remaining rows stop as soon as they cannot beat it.
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| {
            self.mu[(b, top)]
                .partial_cmp(&self.mu[(a, top)])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let mut best: Option<(T, usize, TransportResult<T>)> = None;
        for &i in &order {
            let mut row_min: Option<TransportResult<T>> = None;
            let mut pruned = false;
            for &j in order.iter().rev() {
                if j == i {
                    continue;
                }
                let r = self.pair(i, j, psi[i], psi[j])?;
                let better = match &row_min {
                    None => true,
                    Some(cur) => r.value < cur.value || (r.value == cur.value && j < cur.pair.1),
                };
                if better {
                    row_min = Some(r);
                }
                if let Some((bv, bi, _)) = &best {
                    let cur = row_min.as_ref().expect("set above").value;
                    if cur < *bv || (cur == *bv && i > *bi) {
                        pruned = true;
                        break;
                    }
                }
            }
            if pruned {
                continue;
            }
            let r = row_min.expect("at least one competitor");
            let better = match &best {
                None => true,
                Some((bv, bi, _)) => r.value > *bv || (r.value == *bv && i < *bi),
            };
            if better {
                best = Some((r.value, i, r));
            }
        }
        let (value, _, attaining) = best.expect("at least two arms");
        Ok(MaxMin {
            value,
            arm: attaining.pair.0,
            competitor: attaining.pair.1,
            attaining,
        })
    }

    fn matrix(&self) -> Result<Table<T>> {
        let k = self.mu.rows();
        let psi = self.all_psi()?;
        let mut out = Table::filled(k, k, T::zero());
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    out[(i, j)] = self.pair(i, j, psi[i], psi[j])?.value;
                }
            }
        }
        Ok(out)
    }
}

/// `ψ*` of a single arm: the closest multi-fidelity-consistent top mean.
pub fn solve_psi<T: Scalar>(
    weights_row: &[T],
    means_row: &[T],
    schedule: &FidelitySchedule<T>,
    family: &RewardFamily<T>,
) -> Result<LineMinimum<T>> {
    let cells = row_cells(weights_row, means_row, schedule)?;
    minimize_line(family, &cells)?.ok_or_else(|| Error::Domain("solve_psi needs at least one positive weight".into()))
}

/// `η*_{i,j}`: the common top-fidelity mean of the closest merged alternative.
///
/// Solves the merged objective regardless of the arms' own minimizers; use
/// [`transport_pair`] to get `f_{i,j}` with the regime selected.
pub fn solve_eta<T: Scalar>(
    pair_weights: [&[T]; 2],
    pair_means: [&[T]; 2],
    schedule: &FidelitySchedule<T>,
    family: &RewardFamily<T>,
) -> Result<LineMinimum<T>> {
    let mut cells = row_cells(pair_weights[0], pair_means[0], schedule)?;
    cells.extend(row_cells(pair_weights[1], pair_means[1], schedule)?);
    minimize_line(family, &cells)?.ok_or_else(|| Error::Domain("solve_eta needs at least one positive weight".into()))
}

fn row_cells<T: Scalar>(weights: &[T], means: &[T], schedule: &FidelitySchedule<T>) -> Result<Vec<Cell<T>>> {
    if weights.len() != schedule.len() || means.len() != schedule.len() {
        return Err(Error::Structural(
            "row length must equal the number of fidelities".into(),
        ));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < T::zero()) {
        return Err(Error::Domain("weights must be finite and nonnegative".into()));
    }
    if schedule.lambda().iter().any(|&l| !(l > T::zero())) {
        return Err(Error::Domain("costs must be positive".into()));
    }
    Ok(weights
        .iter()
        .zip(means)
        .zip(schedule.xi().iter().zip(schedule.lambda()))
        .map(|((&w, &mean), (&xi, &lambda))| Cell {
            weight: w / lambda,
            mean,
            xi,
        })
        .collect())
}

/// `f_{i,j}(w, μ)` with its minimizer. `w` is a cost allocation (simplex or raw);
/// each term is divided by its fidelity cost.
pub fn transport_pair<T: Scalar>(
    w: &WeightVector<T>,
    mu: &Table<T>,
    i: usize,
    j: usize,
    schedule: &FidelitySchedule<T>,
    family: &RewardFamily<T>,
) -> Result<TransportResult<T>> {
    if i == j || i >= mu.rows() || j >= mu.rows() {
        return Err(Error::Structural(format!("invalid arm pair ({i}, {j})")));
    }
    let t = Transport::new(w, mu, schedule, family, Weighting::PerCost)?;
    t.pair(i, j, t.psi(i)?, t.psi(j)?)
}

/// Value of `F` with the pair `(arm, competitor)` attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxMin<T> {
    pub value: T,
    pub arm: usize,
    pub competitor: usize,
    pub attaining: TransportResult<T>,
}

/// `F(w, μ) = max_i min_{j≠i} f_{i,j}(w, μ)`.
pub fn big_f<T: Scalar>(
    w: &WeightVector<T>,
    mu: &Table<T>,
    schedule: &FidelitySchedule<T>,
    family: &RewardFamily<T>,
) -> Result<MaxMin<T>> {
    Transport::new(w, mu, schedule, family, Weighting::PerCost)?.max_min()
}

/// All `f_{i,j}(w, μ)`; the diagonal is left at zero.
pub fn pair_matrix<T: Scalar>(
    w: &WeightVector<T>,
    mu: &Table<T>,
    schedule: &FidelitySchedule<T>,
    family: &RewardFamily<T>,
) -> Result<Table<T>> {
    Transport::new(w, mu, schedule, family, Weighting::PerCost)?.matrix()
}

/// A subgradient of `F(·, μ)`; nonzero only on the attaining pair's rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgradientVector<T> {
    pub g: Table<T>,
    pub value: T,
    pub pair: (usize, usize),
    pub regime: Regime,
}

/// Subgradient of `F(·, μ)` at a cost simplex point with `F > 0`.
pub fn subgradient_f<T: Scalar>(
    w: &WeightVector<T>,
    mu: &Table<T>,
    schedule: &FidelitySchedule<T>,
    family: &RewardFamily<T>,
) -> Result<SubgradientVector<T>> {
    if w.normalization() != Normalization::Simplex {
        return Err(Error::Domain("subgradient_f expects simplex weights".into()));
    }
    let mm = big_f(w, mu, schedule, family)?;
    if !(mm.value > T::zero()) {
        return Err(Error::Degenerate(
            "F(w, mu) = 0; break ties among the best arms first".into(),
        ));
    }
    let mut g = Table::filled(mu.rows(), mu.cols(), T::zero());
    for arm in [mm.arm, mm.competitor] {
        let x = mm
            .attaining
            .location(arm)
            .ok_or_else(|| Error::Internal(format!("arm {arm} of the attaining pair has no minimizer")))?;
        for m in 0..mu.cols() {
            let cell = Cell {
                weight: T::one(),
                mean: mu[(arm, m)],
                xi: schedule.xi()[m],
            };
            g[(arm, m)] = cell.cost(family, x) / schedule.lambda()[m];
        }
    }
    Ok(SubgradientVector {
        g,
        value: mm.value,
        pair: (mm.arm, mm.competitor),
        regime: mm.attaining.regime,
    })
}

/// GLR statistics `f_{i,j}(C(t), μ̂(t))` from pull counts; diagonal left at zero.
pub fn glr_matrix<T: Scalar>(
    counts: &WeightVector<T>,
    hat_mu: &Table<T>,
    schedule: &FidelitySchedule<T>,
    family: &RewardFamily<T>,
) -> Result<Table<T>> {
    Transport::new(counts, hat_mu, schedule, family, Weighting::PerPull)?.matrix()
}

/// `max_i min_{j≠i}` of the GLR statistics, with the maximizing arm.
pub fn glr_max_min<T: Scalar>(
    counts: &WeightVector<T>,
    hat_mu: &Table<T>,
    schedule: &FidelitySchedule<T>,
    family: &RewardFamily<T>,
) -> Result<MaxMin<T>> {
    Transport::new(counts, hat_mu, schedule, family, Weighting::PerPull)?.max_min()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences::{kl_minus, kl_plus};
    use crate::model::{five_by_two, BanditInstance};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gauss(s: f64) -> RewardFamily<f64> {
        RewardFamily::gaussian(s).unwrap()
    }

    /// Objective written from the one-sided divergences, independent of `Cell::cost`.
    fn reference_objective(
        fam: &RewardFamily<f64>,
        rows: &[(&[f64], &[f64])],
        s: &FidelitySchedule<f64>,
        x: f64,
    ) -> f64 {
        let mut total = 0.0;
        for (w, mu) in rows {
            for m in 0..s.len() {
                let (xi, lam) = (s.xi()[m], s.lambda()[m]);
                let lo = fam.clamp_mean(x + xi);
                let hi = fam.clamp_mean(x - xi);
                let t = kl_minus(fam, mu[m], lo).unwrap() * (mu[m] >= x + xi) as u8 as f64
                    + kl_plus(fam, mu[m], hi).unwrap() * (mu[m] <= x - xi) as u8 as f64;
                total += w[m] / lam * t;
            }
        }
        total
    }

    fn grid_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> (f64, f64) {
        let n = ((hi - lo) / step).ceil() as usize;
        (0..=n)
            .map(|k| lo + k as f64 * step)
            .map(|x| (x, f(x)))
            .fold((f64::NAN, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b })
    }

    #[test]
    fn psi_of_consistent_row_is_top_mean() {
        let s = FidelitySchedule::new(vec![0.1, 0.0], vec![0.5, 5.0]).unwrap();
        let p = solve_psi(&[0.3, 0.7], &[0.4, 0.5], &s, &gauss(0.1)).unwrap();
        assert_eq!(p.argmin, 0.5);
        assert_eq!(p.value, 0.0);
    }

    #[test]
    fn psi_single_fidelity() {
        let s = FidelitySchedule::new(vec![0.0], vec![2.0]).unwrap();
        let p = solve_psi(&[1.0], &[0.37], &s, &gauss(1.0)).unwrap();
        assert_abs_diff_eq!(p.argmin, 0.37, epsilon = 1e-15);
    }

    #[test]
    fn psi_matches_grid_on_inconsistent_row() {
        let s = FidelitySchedule::new(vec![0.1, 0.0], vec![1.0, 1.0]).unwrap();
        let fam = gauss(1.0);
        let (w, mu) = ([0.5, 0.5], [0.8, 0.6]);
        let p = solve_psi(&w, &mu, &s, &fam).unwrap();
        let (gx, gv) = grid_min(|x| reference_objective(&fam, &[(&w, &mu)], &s, x), 0.0, 1.5, 1e-5);
        assert_abs_diff_eq!(p.argmin, gx, epsilon = 1e-4);
        assert_abs_diff_eq!(p.value, gv, epsilon = 1e-4);
        // Balanced pull of 0.7 (from 0.8 - 0.1) and 0.6.
        assert_abs_diff_eq!(p.argmin, 0.65, epsilon = 1e-12);
    }

    #[test]
    fn psi_rejects_empty_weights() {
        let s = FidelitySchedule::new(vec![0.1, 0.0], vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            solve_psi(&[0.0, 0.0], &[0.1, 0.2], &s, &gauss(1.0)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            solve_psi(&[-1.0, 1.0], &[0.1, 0.2], &s, &gauss(1.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn eta_single_fidelity_is_midpoint() {
        let s = FidelitySchedule::new(vec![0.0], vec![1.0]).unwrap();
        let e = solve_eta([&[0.5], &[0.5]], [&[0.6], &[0.5]], &s, &gauss(1.0)).unwrap();
        assert_abs_diff_eq!(e.argmin, 0.55, epsilon = 1e-15);
    }

    #[test]
    fn two_arm_single_fidelity_value() {
        let s = FidelitySchedule::new(vec![0.0], vec![1.0]).unwrap();
        let mu = Table::from_rows(&[vec![0.6], vec![0.5]]).unwrap();
        let w = WeightVector::simplex(Table::from_rows(&[vec![0.5], vec![0.5]]).unwrap()).unwrap();
        let r = transport_pair(&w, &mu, 0, 1, &s, &gauss(1.0)).unwrap();
        assert_eq!(r.regime, Regime::Merged);
        assert_abs_diff_eq!(r.value, 0.00125, epsilon = 1e-15);
        // Reverse pair: arm 0 already above arm 1, nothing to move.
        let rev = transport_pair(&w, &mu, 1, 0, &s, &gauss(1.0)).unwrap();
        assert_eq!(rev.regime, Regime::Separated);
        assert_eq!(rev.value, 0.0);
    }

    #[test]
    fn separated_regime_for_best_competitor_is_zero() {
        let inst: BanditInstance<f64> = five_by_two();
        let w = WeightVector::uniform(5, 2);
        for i in 0..4 {
            let r = transport_pair(&w, inst.means(), i, 4, inst.schedule(), inst.family()).unwrap();
            assert_eq!(r.regime, Regime::Separated);
            assert_eq!(r.value, 0.0);
            assert_eq!(r.psi_i, Some(0.5));
            assert_eq!(r.psi_j, Some(0.6));
        }
    }

    #[test]
    fn merged_eta_lies_between_top_means_for_mf_instance() {
        let inst: BanditInstance<f64> = crate::model::table_mu1();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let w = random_simplex(&mut rng, 4, 5);
            for a in 0..3 {
                let r = transport_pair(&w, inst.means(), 3, a, inst.schedule(), inst.family()).unwrap();
                let eta = r.eta.expect("merged");
                assert!(eta >= inst.mean(a, 4) - 1e-12 && eta <= inst.mean(3, 4) + 1e-12);
            }
        }
    }

    pub(crate) fn random_simplex(rng: &mut impl Rng, k: usize, m: usize) -> WeightVector<f64> {
        let v: Vec<f64> = (0..k * m).map(|_| -rng.gen::<f64>().ln()).collect();
        WeightVector::normalized(Table::from_vec(k, m, v).unwrap()).unwrap()
    }

    #[test]
    fn big_f_attained_at_best_arm_and_positive() {
        let inst: BanditInstance<f64> = crate::model::table_mu1();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let w = random_simplex(&mut rng, 4, 5);
            let mm = big_f(&w, inst.means(), inst.schedule(), inst.family()).unwrap();
            assert_eq!(mm.arm, 3);
            assert!(mm.value > 0.0);
            let row = pair_matrix(&w, inst.means(), inst.schedule(), inst.family()).unwrap();
            let expected = (0..3).map(|j| row[(3, j)]).fold(f64::INFINITY, f64::min);
            assert_eq!(mm.value, expected);
        }
    }

    #[test]
    fn identical_arms_give_zero() {
        let s = FidelitySchedule::new(vec![0.0], vec![1.0]).unwrap();
        let mu = Table::from_rows(&[vec![0.5], vec![0.5]]).unwrap();
        let mm = big_f(&WeightVector::uniform(2, 1), &mu, &s, &gauss(1.0)).unwrap();
        assert_eq!(mm.value, 0.0);
        assert_eq!((mm.arm, mm.competitor), (0, 1));
        assert!(matches!(
            subgradient_f(&WeightVector::uniform(2, 1), &mu, &s, &gauss(1.0)),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn subgradient_support_and_d_plus_gate() {
        let inst: BanditInstance<f64> = five_by_two();
        let w = WeightVector::uniform(5, 2);
        let g = subgradient_f(&w, inst.means(), inst.schedule(), inst.family()).unwrap();
        assert_eq!(g.pair.0, 4);
        let a = g.pair.1;
        let eta = transport_pair(&w, inst.means(), 4, a, inst.schedule(), inst.family())
            .unwrap()
            .eta
            .unwrap();
        for ((arm, m), v) in g.g.indexed() {
            assert!(v >= 0.0);
            if arm != 4 && arm != a {
                assert_eq!(v, 0.0);
            }
            if arm == a && inst.mean(a, m) + inst.schedule().xi()[m] >= eta {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn glr_examples() {
        let s = FidelitySchedule::new(vec![0.0], vec![3.0]).unwrap();
        let mu = Table::from_rows(&[vec![0.6], vec![0.5]]).unwrap();
        let zero = WeightVector::raw(Table::filled(2, 1, 0.0)).unwrap();
        let m = glr_matrix(&zero, &mu, &s, &gauss(1.0)).unwrap();
        assert!(m.as_slice().iter().all(|&v| v == 0.0));

        let n = 40.0;
        let counts = WeightVector::raw(Table::filled(2, 1, n)).unwrap();
        let m = glr_matrix(&counts, &mu, &s, &gauss(1.0)).unwrap();
        // Midpoint 0.55: n (0.05² / 2) twice = n Δ² / 4.
        assert_abs_diff_eq!(m[(0, 1)], n * 0.01 / 4.0, epsilon = 1e-14);
        let doubled = WeightVector::raw(Table::filled(2, 1, 2.0 * n)).unwrap();
        let m2 = glr_matrix(&doubled, &mu, &s, &gauss(1.0)).unwrap();
        assert_abs_diff_eq!(m2[(0, 1)], 2.0 * m[(0, 1)], epsilon = 1e-14);
    }

    #[test]
    fn zero_weight_row_falls_back_to_other_arm() {
        let s = FidelitySchedule::new(vec![0.1, 0.0], vec![1.0, 2.0]).unwrap();
        let mu = Table::from_rows(&[vec![0.9, 0.6], vec![0.3, 0.5]]).unwrap();
        let w = WeightVector::raw(Table::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap()).unwrap();
        let r = transport_pair(&w, &mu, 0, 1, &s, &gauss(1.0)).unwrap();
        let alone = solve_psi(&[1.0, 1.0], &[0.3, 0.5], &s, &gauss(1.0)).unwrap();
        assert_abs_diff_eq!(r.value, alone.value, epsilon = 1e-15);
    }

    #[test]
    fn bernoulli_pairs_match_grid() {
        let fam = RewardFamily::Bernoulli;
        let s = FidelitySchedule::new(vec![0.15, 0.05, 0.0], vec![0.2, 0.5, 1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let w1: Vec<f64> = (0..3).map(|_| rng.gen::<f64>()).collect();
            let w2: Vec<f64> = (0..3).map(|_| rng.gen::<f64>()).collect();
            let m1: Vec<f64> = (0..3).map(|_| rng.gen_range(0.3..0.8)).collect();
            let m2: Vec<f64> = (0..3).map(|_| rng.gen_range(0.2..0.7)).collect();
            let e = solve_eta([&w1, &w2], [&m1, &m2], &s, &fam).unwrap();
            let (_, gv) = grid_min(
                |x| reference_objective(&fam, &[(&w1, &m1), (&w2, &m2)], &s, x),
                0.0,
                1.0,
                1e-5,
            );
            assert!((e.value - gv).abs() <= 1e-4 * gv.max(1.0), "{} vs {}", e.value, gv);
            assert!(e.value <= gv + 1e-12);
        }
    }

    #[test]
    fn single_precision_transport() {
        let s = FidelitySchedule::new(vec![0.0f32], vec![1.0]).unwrap();
        let mu = Table::from_rows(&[vec![0.6f32], vec![0.5]]).unwrap();
        let w = WeightVector::simplex(Table::from_rows(&[vec![0.5f32], vec![0.5]]).unwrap()).unwrap();
        let r = transport_pair(&w, &mu, 0, 1, &s, &RewardFamily::gaussian(1.0f32).unwrap()).unwrap();
        assert!((r.value - 0.00125).abs() < 1e-7);
    }
}
