//! Bandit instances, fidelity schedules, allocation vectors and the
//! cost/pull proportion maps.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::divergences::RewardFamily;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::table::Table;

/// Absolute slack applied to the multi-fidelity constraint `|μ_m − μ_M| ≤ ξ_m`,
/// so that decimal table entries sitting exactly on the boundary are accepted.
pub const MF_TOLERANCE: f64 = 1e-9;

/// Precision bounds `ξ` and per-sample costs `λ`, one entry per fidelity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelitySchedule<T> {
    xi: Vec<T>,
    lambda: Vec<T>,
}

impl<T: Scalar> FidelitySchedule<T> {
    /// Builds a schedule; only shape and finiteness are enforced here; ordering
    /// constraints are reported by [`FidelitySchedule::violations`].
    pub fn new(xi: Vec<T>, lambda: Vec<T>) -> Result<Self> {
        if xi.is_empty() {
            return Err(Error::Structural("a schedule needs at least one fidelity".into()));
        }
        if xi.len() != lambda.len() {
            return Err(Error::Structural(format!(
                "xi has {} entries but lambda has {}",
                xi.len(),
                lambda.len()
            )));
        }
        if xi.iter().chain(&lambda).any(|v| !v.is_finite()) {
            return Err(Error::Structural("schedule entries must be finite".into()));
        }
        Ok(FidelitySchedule { xi, lambda })
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    pub fn xi(&self) -> &[T] {
        &self.xi
    }

    pub fn lambda(&self) -> &[T] {
        &self.lambda
    }

    /// Schedule consisting of the highest fidelity only.
    pub fn top_only(&self) -> Self {
        let m = self.len() - 1;
        FidelitySchedule {
            xi: vec![T::zero()],
            lambda: vec![self.lambda[m]],
        }
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let m_top = self.len() - 1;
        for (m, &x) in self.xi.iter().enumerate() {
            if x < T::zero() {
                out.push(Violation::XiNegative {
                    fidelity: m,
                    value: x.as_f64(),
                });
            }
        }
        for m in 0..m_top {
            if !(self.xi[m] > self.xi[m + 1]) {
                out.push(Violation::XiNotDecreasing { fidelity: m });
            }
        }
        if self.xi[m_top] != T::zero() {
            out.push(Violation::XiLastNonZero {
                value: self.xi[m_top].as_f64(),
            });
        }
        for (m, &l) in self.lambda.iter().enumerate() {
            if !(l > T::zero()) {
                out.push(Violation::LambdaNonPositive {
                    fidelity: m,
                    value: l.as_f64(),
                });
            }
        }
        for m in 0..m_top {
            if !(self.lambda[m] < self.lambda[m + 1]) {
                out.push(Violation::LambdaNotIncreasing { fidelity: m });
            }
        }
        out
    }
}

/// A constraint reported by [`BanditInstance::validate`]. Indices are zero-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "violation", rename_all = "kebab-case")]
pub enum Violation {
    XiNegative {
        fidelity: usize,
        value: f64,
    },
    /// `ξ_m > ξ_{m+1}` fails at `fidelity`.
    XiNotDecreasing {
        fidelity: usize,
    },
    XiLastNonZero {
        value: f64,
    },
    LambdaNonPositive {
        fidelity: usize,
        value: f64,
    },
    /// `λ_m < λ_{m+1}` fails at `fidelity`.
    LambdaNotIncreasing {
        fidelity: usize,
    },
    MeanOutsideDomain {
        arm: usize,
        fidelity: usize,
        value: f64,
    },
    TiedBestArms {
        arms: Vec<usize>,
    },
    /// `|μ_{a,m} − μ_{a,M}| > ξ_m`; a warning only.
    MultiFidelityViolated {
        arm: usize,
        fidelity: usize,
        deviation: f64,
        xi: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::XiNegative { fidelity, value } => write!(f, "xi[{fidelity}] = {value} is negative"),
            Violation::XiNotDecreasing { fidelity } => {
                write!(f, "xi is not strictly decreasing at fidelity {fidelity}")
            }
            Violation::XiLastNonZero { value } => write!(f, "last xi must be 0, got {value}"),
            Violation::LambdaNonPositive { fidelity, value } => {
                write!(f, "lambda[{fidelity}] = {value} is not positive")
            }
            Violation::LambdaNotIncreasing { fidelity } => {
                write!(f, "lambda is not strictly increasing at fidelity {fidelity}")
            }
            Violation::MeanOutsideDomain { arm, fidelity, value } => {
                write!(
                    f,
                    "mean of arm {arm} at fidelity {fidelity} ({value}) is outside the family's domain"
                )
            }
            Violation::TiedBestArms { arms } => write!(f, "best arm at the top fidelity is not unique: {arms:?}"),
            Violation::MultiFidelityViolated {
                arm,
                fidelity,
                deviation,
                xi,
            } => write!(
                f,
                "arm {arm} at fidelity {fidelity} deviates by {deviation} from its top-fidelity mean (xi = {xi})"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<Violation>,
    pub warnings: Vec<Violation>,
    pub is_mf: bool,
    pub unique_best: Option<usize>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    /// Converts the report into an error when any hard constraint fails.
    pub fn into_result(self) -> Result<Self> {
        if self.is_ok() {
            Ok(self)
        } else {
            let msg: Vec<String> = self.errors.iter().map(ToString::to_string).collect();
            Err(Error::Invalid(msg.join("; ")))
        }
    }
}

/// `K × M` means with their reward family and fidelity schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditInstance<T> {
    mu: Table<T>,
    family: RewardFamily<T>,
    schedule: FidelitySchedule<T>,
}

impl<T: Scalar> BanditInstance<T> {
    /// Checks dimensions only; see [`BanditInstance::validate`] for the rest.
    pub fn new(mu: Table<T>, family: RewardFamily<T>, schedule: FidelitySchedule<T>) -> Result<Self> {
        if mu.rows() < 2 {
            return Err(Error::Structural(format!("need at least 2 arms, got {}", mu.rows())));
        }
        if mu.cols() != schedule.len() {
            return Err(Error::Structural(format!(
                "means have {} fidelities but the schedule has {}",
                mu.cols(),
                schedule.len()
            )));
        }
        Ok(BanditInstance { mu, family, schedule })
    }

    pub fn from_rows(mu: &[Vec<T>], family: RewardFamily<T>, xi: Vec<T>, lambda: Vec<T>) -> Result<Self> {
        Self::new(Table::from_rows(mu)?, family, FidelitySchedule::new(xi, lambda)?)
    }

    pub fn arms(&self) -> usize {
        self.mu.rows()
    }

    pub fn fidelities(&self) -> usize {
        self.mu.cols()
    }

    pub fn means(&self) -> &Table<T> {
        &self.mu
    }

    pub fn mean(&self, arm: usize, fidelity: usize) -> T {
        self.mu[(arm, fidelity)]
    }

    pub fn family(&self) -> &RewardFamily<T> {
        &self.family
    }

    pub fn schedule(&self) -> &FidelitySchedule<T> {
        &self.schedule
    }

    /// The same arms observed at the top fidelity only.
    pub fn top_fidelity_only(&self) -> Self {
        let top = self.fidelities() - 1;
        let mu = Table::from_vec(self.arms(), 1, (0..self.arms()).map(|a| self.mean(a, top)).collect())
            .expect("shape is consistent");
        BanditInstance {
            mu,
            family: self.family,
            schedule: self.schedule.top_only(),
        }
    }

    /// Arms attaining the largest top-fidelity mean.
    pub fn best_arms(&self) -> Vec<usize> {
        best_arms_of(&self.mu)
    }

    pub fn best_arm(&self) -> Option<usize> {
        match self.best_arms().as_slice() {
            [a] => Some(*a),
            _ => None,
        }
    }

    pub fn is_mf(&self) -> bool {
        self.mf_violations().is_empty()
    }

    fn mf_violations(&self) -> Vec<Violation> {
        let top = self.fidelities() - 1;
        let tol = T::lit(MF_TOLERANCE);
        let mut out = Vec::new();
        for a in 0..self.arms() {
            let reference = self.mean(a, top);
            for (m, &xi) in self.schedule.xi().iter().enumerate() {
                let dev = (self.mean(a, m) - reference).abs();
                if dev > xi + tol {
                    out.push(Violation::MultiFidelityViolated {
                        arm: a,
                        fidelity: m,
                        deviation: dev.as_f64(),
                        xi: xi.as_f64(),
                    });
                }
            }
        }
        out
    }

    /// Reports schedule, domain, uniqueness (errors) and multi-fidelity (warnings) constraints.
    pub fn validate(&self) -> ValidationReport {
        let mut errors = self.schedule.violations();
        for ((a, m), v) in self.mu.indexed() {
            if !self.family.contains(v) {
                errors.push(Violation::MeanOutsideDomain {
                    arm: a,
                    fidelity: m,
                    value: v.as_f64(),
                });
            }
        }
        let best = self.best_arms();
        if best.len() > 1 {
            errors.push(Violation::TiedBestArms { arms: best.clone() });
        }
        let warnings = self.mf_violations();
        ValidationReport {
            errors,
            is_mf: warnings.is_empty(),
            warnings,
            unique_best: if best.len() == 1 { Some(best[0]) } else { None },
        }
    }

    pub fn to_doc(&self) -> InstanceDoc<T> {
        InstanceDoc {
            arms: self.arms(),
            fidelities: self.fidelities(),
            family: self.family,
            xi: self.schedule.xi().to_vec(),
            lambda: self.schedule.lambda().to_vec(),
            mu: self.mu.to_rows(),
        }
    }

    pub fn from_doc(doc: InstanceDoc<T>) -> Result<Self> {
        if doc.mu.len() != doc.arms {
            return Err(Error::Structural(format!(
                "K = {} but {} rows of means",
                doc.arms,
                doc.mu.len()
            )));
        }
        if doc.xi.len() != doc.fidelities || doc.mu.iter().any(|r| r.len() != doc.fidelities) {
            return Err(Error::Structural(format!(
                "M = {} disagrees with the data",
                doc.fidelities
            )));
        }
        if let RewardFamily::Gaussian { sigma2 } = doc.family {
            RewardFamily::gaussian(sigma2)?;
        }
        Self::from_rows(&doc.mu, doc.family, doc.xi, doc.lambda)
    }
}

impl<T: Scalar + Serialize> BanditInstance<T> {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }
}

impl<T: Scalar + for<'de> Deserialize<'de>> BanditInstance<T> {
    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_doc(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

pub(crate) fn best_arms_of<T: Scalar>(mu: &Table<T>) -> Vec<usize> {
    let top = mu.cols() - 1;
    let best = (0..mu.rows()).map(|a| mu[(a, top)]).fold(T::neg_infinity(), T::max);
    (0..mu.rows()).filter(|&a| mu[(a, top)] == best).collect()
}

/// On-disk instance document; arms are rows, fidelities are columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDoc<T> {
    #[serde(rename = "K")]
    pub arms: usize,
    #[serde(rename = "M")]
    pub fidelities: usize,
    pub family: RewardFamily<T>,
    pub xi: Vec<T>,
    pub lambda: Vec<T>,
    pub mu: Vec<Vec<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Entries sum to one.
    Simplex,
    /// Nonnegative counts or costs.
    Raw,
}

/// A nonnegative `K × M` allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector<T> {
    values: Table<T>,
    normalization: Normalization,
}

impl<T: Scalar> WeightVector<T> {
    pub fn simplex(values: Table<T>) -> Result<Self> {
        check_nonnegative(&values)?;
        let total: T = values.as_slice().iter().copied().sum();
        let tol = T::simplex_tolerance(values.as_slice().len());
        if (total - T::one()).abs() > tol {
            return Err(Error::Domain(format!("simplex weights sum to {total}, not 1")));
        }
        Ok(WeightVector {
            values,
            normalization: Normalization::Simplex,
        })
    }

    /// Rescales nonnegative, not-all-zero entries onto the simplex.
    pub fn normalized(values: Table<T>) -> Result<Self> {
        check_nonnegative(&values)?;
        let total: T = values.as_slice().iter().copied().sum();
        if !(total > T::zero()) {
            return Err(Error::Domain("cannot normalize an all-zero allocation".into()));
        }
        Ok(WeightVector {
            values: values.map(|v| v / total),
            normalization: Normalization::Simplex,
        })
    }

    pub fn raw(values: Table<T>) -> Result<Self> {
        check_nonnegative(&values)?;
        Ok(WeightVector {
            values,
            normalization: Normalization::Raw,
        })
    }

    pub fn uniform(arms: usize, fidelities: usize) -> Self {
        let v = T::one() / T::from_count(arms * fidelities);
        WeightVector {
            values: Table::filled(arms, fidelities, v),
            normalization: Normalization::Simplex,
        }
    }

    pub fn values(&self) -> &Table<T> {
        &self.values
    }

    pub fn into_values(self) -> Table<T> {
        self.values
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn get(&self, arm: usize, fidelity: usize) -> T {
        self.values[(arm, fidelity)]
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values.shape()
    }

    pub fn total(&self) -> T {
        self.values.as_slice().iter().copied().sum()
    }

    fn require_simplex(&self, what: &str) -> Result<()> {
        if self.normalization != Normalization::Simplex {
            return Err(Error::Domain(format!("{what} expects simplex weights")));
        }
        Ok(())
    }
}

fn check_nonnegative<T: Scalar>(values: &Table<T>) -> Result<()> {
    if let Some(((a, m), v)) = values.indexed().find(|(_, v)| !v.is_finite() || *v < T::zero()) {
        return Err(Error::Domain(format!(
            "weight ({a}, {m}) = {v} is negative or not finite"
        )));
    }
    Ok(())
}

fn check_schedule_matches<T: Scalar>(w: &WeightVector<T>, schedule: &FidelitySchedule<T>) -> Result<()> {
    if w.shape().1 != schedule.len() {
        return Err(Error::Structural(format!(
            "weights have {} fidelities but the schedule has {}",
            w.shape().1,
            schedule.len()
        )));
    }
    if schedule.lambda().iter().any(|&l| !(l > T::zero())) {
        return Err(Error::Domain("costs must be positive".into()));
    }
    Ok(())
}

/// Pull proportions `π(ω)` realizing the cost proportions `ω`.
pub fn cost_to_pull<T: Scalar>(w: &WeightVector<T>, schedule: &FidelitySchedule<T>) -> Result<WeightVector<T>> {
    w.require_simplex("cost_to_pull")?;
    check_schedule_matches(w, schedule)?;
    Ok(rescale_columns(w.values(), |m| T::one() / schedule.lambda()[m]))
}

/// Cost proportions `ω(π)` incurred by the pull proportions `π`.
pub fn pull_to_cost<T: Scalar>(pi: &WeightVector<T>, schedule: &FidelitySchedule<T>) -> Result<WeightVector<T>> {
    pi.require_simplex("pull_to_cost")?;
    check_schedule_matches(pi, schedule)?;
    Ok(rescale_columns(pi.values(), |m| schedule.lambda()[m]))
}

fn rescale_columns<T: Scalar>(values: &Table<T>, factor: impl Fn(usize) -> T) -> WeightVector<T> {
    let cols = values.cols();
    let mut out = values.clone();
    for (k, v) in out.as_mut_slice().iter_mut().enumerate() {
        *v *= factor(k % cols);
    }
    let total: T = out.as_slice().iter().copied().sum();
    for v in out.as_mut_slice() {
        *v /= total;
    }
    WeightVector {
        values: out,
        normalization: Normalization::Simplex,
    }
}

/// The built-in instances shipped with the library.
pub const PRESET_NAMES: &[&str] = &[
    "table-mu1",
    "table-mu2",
    "table-mu3",
    "five-by-two",
    "lucb-2x2",
    "compare-lb",
];

fn lits<T: Scalar>(xs: &[f64]) -> Vec<T> {
    xs.iter().map(|&x| T::lit(x)).collect()
}

fn gaussian_preset<T: Scalar>(rows: &[&[f64]], sigma2: f64, xi: &[f64], lambda: &[f64]) -> BanditInstance<T> {
    let mu: Vec<Vec<T>> = rows.iter().map(|r| lits(r)).collect();
    BanditInstance::from_rows(
        &mu,
        RewardFamily::Gaussian { sigma2: T::lit(sigma2) },
        lits(xi),
        lits(lambda),
    )
    .expect("preset is well formed")
}

const RANDOM_XI: [f64; 5] = [0.1, 0.08, 0.05, 0.025, 0.0];

/// The randomly generated 4 × 5 instance used for the first cost-complexity experiment.
pub fn table_mu1<T: Scalar>() -> BanditInstance<T> {
    gaussian_preset(
        &[
            &[0.9465, 0.7727, 0.8812, 0.8284, 0.8494],
            &[0.8526, 0.8708, 0.8515, 0.8374, 0.8401],
            &[0.8162, 0.9050, 0.8209, 0.8353, 0.8495],
            &[0.9099, 1.0594, 1.0083, 0.9745, 0.9856],
        ],
        0.1,
        &RANDOM_XI,
        &[0.05, 0.1, 0.2, 0.4, 5.0],
    )
}

/// A second random 4 × 5 instance.
pub fn table_mu2<T: Scalar>() -> BanditInstance<T> {
    gaussian_preset(
        &[
            &[0.6944, 0.5634, 0.6178, 0.6323, 0.6171],
            &[0.5080, 0.3723, 0.4322, 0.4225, 0.4216],
            &[0.4153, 0.4132, 0.3817, 0.3838, 0.3831],
            &[0.3564, 0.4570, 0.4065, 0.3582, 0.3783],
        ],
        0.1,
        &RANDOM_XI,
        &[0.05, 0.1, 0.2, 0.4, 1.0],
    )
}

/// A 4 × 5 instance whose means drift upward with the fidelity for some arms.
pub fn table_mu3<T: Scalar>() -> BanditInstance<T> {
    gaussian_preset(
        &[
            &[0.41, 0.45, 0.47, 0.48, 0.5],
            &[0.35, 0.37, 0.38, 0.36, 0.35],
            &[0.51, 0.56, 0.64, 0.62, 0.61],
            &[0.41, 0.39, 0.40, 0.42, 0.42],
        ],
        0.1,
        &[0.1, 0.08, 0.04, 0.02, 0.0],
        &[0.1, 0.125, 0.25, 0.5, 1.0],
    )
}

/// Four identical arms `[0.4, 0.5]` and a best arm `[0.5, 0.6]`.
pub fn five_by_two<T: Scalar>() -> BanditInstance<T> {
    gaussian_preset(
        &[&[0.4, 0.5], &[0.4, 0.5], &[0.4, 0.5], &[0.4, 0.5], &[0.5, 0.6]],
        0.1,
        &[0.1, 0.0],
        &[0.5, 5.0],
    )
}

/// Two arms on which confidence-interval methods restricted to the cheap
/// fidelity cannot separate the arms.
pub fn lucb_2x2<T: Scalar>() -> BanditInstance<T> {
    gaussian_preset(&[&[0.64, 0.6], &[0.46, 0.5]], 1.0, &[0.1, 0.0], &[0.1, 5.0])
}

/// Two arms, two fidelities, unit-half variance: `μ_{1,M} = Δ/2`, `μ_{2,M} = −Δ/2`,
/// low-fidelity means pushed outward by `ξ_m / 2`.
pub fn compare_lb<T: Scalar>(gap: f64, xi_low: f64, lambda_low: f64, lambda_top: f64) -> Result<BanditInstance<T>> {
    let top = 0.5 * gap;
    let inst = BanditInstance::from_rows(
        &[lits(&[top + 0.5 * xi_low, top]), lits(&[-top - 0.5 * xi_low, -top])],
        RewardFamily::gaussian(T::lit(0.5))?,
        lits(&[xi_low, 0.0]),
        lits(&[lambda_low, lambda_top]),
    )?;
    inst.validate().into_result()?;
    Ok(inst)
}

/// Instance in which every arm is most informative at the cheapest fidelity:
/// the best arm's low-fidelity means sit `ξ_m` above its top mean, the others `ξ_m` below.
pub fn cheapest_fidelity_class<T: Scalar>(
    arms: usize,
    best_mean: f64,
    xi: &[f64],
    lambda: &[f64],
) -> Result<BanditInstance<T>> {
    if !(best_mean > 0.0) {
        return Err(Error::Domain("best mean must be positive".into()));
    }
    let rows: Vec<Vec<T>> = (0..arms)
        .map(|a| {
            let (top, sign) = if a == 0 { (best_mean, 1.0) } else { (-best_mean, -1.0) };
            xi.iter().map(|&x| T::lit(top + sign * x)).collect()
        })
        .collect();
    let inst = BanditInstance::from_rows(&rows, RewardFamily::gaussian(T::lit(0.5))?, lits(xi), lits(lambda))?;
    inst.validate().into_result()?;
    Ok(inst)
}

/// Resolves a preset name. `compare-lb` accepts optional parameters
/// `compare-lb(Δ, ξ_m, λ_m, λ_M)`; bare `compare-lb` means `(0.2, 0.2, 1, 5)`.
pub fn preset<T: Scalar>(name: &str) -> Result<BanditInstance<T>> {
    let name = name.trim();
    match name {
        "table-mu1" => Ok(table_mu1()),
        "table-mu2" => Ok(table_mu2()),
        "table-mu3" => Ok(table_mu3()),
        "five-by-two" => Ok(five_by_two()),
        "lucb-2x2" => Ok(lucb_2x2()),
        "compare-lb" => compare_lb(0.2, 0.2, 1.0, 5.0),
        _ if name.starts_with("compare-lb(") && name.ends_with(')') => {
            let args: std::result::Result<Vec<f64>, _> = name["compare-lb(".len()..name.len() - 1]
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect();
            match args
                .map_err(|e| Error::Structural(format!("bad compare-lb parameter: {e}")))?
                .as_slice()
            {
                [gap, xi, lm, lt] => compare_lb(*gap, *xi, *lm, *lt),
                other => Err(Error::Structural(format!(
                    "compare-lb takes 4 parameters, got {}",
                    other.len()
                ))),
            }
        }
        _ => Err(Error::Structural(format!(
            "unknown preset '{name}'; known: {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}
