//! KL divergences and variances of one-parameter exponential families.
//!
//! Reward distributions are identified by their mean. Two families are
//! supported: Gaussian with known variance (means range over the real line)
//! and Bernoulli (means in the open unit interval).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Shifted Bernoulli arguments are clamped to `[EPS, 1 - EPS]`.
pub const BERNOULLI_CLAMP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RewardFamily<T> {
    #[serde(alias = "gaussian-known-variance")]
    Gaussian {
        sigma2: T,
    },
    Bernoulli,
}

impl<T: Scalar> RewardFamily<T> {
    pub fn gaussian(sigma2: T) -> Result<Self> {
        if !(sigma2 > T::zero()) || !sigma2.is_finite() {
            return Err(Error::Domain(format!(
                "gaussian variance must be positive, got {sigma2}"
            )));
        }
        Ok(RewardFamily::Gaussian { sigma2 })
    }

    pub fn bernoulli() -> Self {
        RewardFamily::Bernoulli
    }

    /// Whether `p` lies in the admissible mean set.
    pub fn contains(&self, p: T) -> bool {
        match self {
            RewardFamily::Gaussian { .. } => p.is_finite(),
            RewardFamily::Bernoulli => p > T::zero() && p < T::one(),
        }
    }

    pub fn check_mean(&self, p: T) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "mean {p} outside the admissible set of {self:?}"
            )))
        }
    }

    /// Pulls a point into the admissible set; identity for Gaussian.
    pub fn clamp_mean(&self, p: T) -> T {
        match self {
            RewardFamily::Gaussian { .. } => p,
            RewardFamily::Bernoulli => {
                let eps = T::lit(BERNOULLI_CLAMP);
                p.max(eps).min(T::one() - eps)
            }
        }
    }

    /// Whether the variance is constant in the mean (Gaussian).
    pub fn has_constant_variance(&self) -> bool {
        matches!(self, RewardFamily::Gaussian { .. })
    }

    /// `d(p, q)` without domain checks. The second argument is clamped for Bernoulli.
    #[inline]
    pub fn divergence(&self, p: T, q: T) -> T {
        match *self {
            RewardFamily::Gaussian { sigma2 } => {
                let diff = p - q;
                diff * diff / (sigma2 + sigma2)
            }
            RewardFamily::Bernoulli => {
                let q = self.clamp_mean(q);
                let one = T::one();
                xlogx_over(p, q) + xlogx_over(one - p, one - q)
            }
        }
    }

    /// `v(p)` without domain checks.
    #[inline]
    pub fn variance_unchecked(&self, p: T) -> T {
        match *self {
            RewardFamily::Gaussian { sigma2 } => sigma2,
            RewardFamily::Bernoulli => {
                let p = self.clamp_mean(p);
                p * (T::one() - p)
            }
        }
    }

    /// `∂/∂q d(p, q) = (q - p) / v(q)`.
    #[inline]
    pub fn divergence_slope(&self, p: T, q: T) -> T {
        let q = self.clamp_mean(q);
        (q - p) / self.variance_unchecked(q)
    }
}

#[inline]
fn xlogx_over<T: Scalar>(x: T, y: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else {
        x * (x / y).ln()
    }
}

/// Kullback-Leibler divergence `d(p, q)` between the members with means `p` and `q`.
pub fn kl<T: Scalar>(family: &RewardFamily<T>, p: T, q: T) -> Result<T> {
    family.check_mean(p)?;
    family.check_mean(q)?;
    Ok(family.divergence(p, q).max(T::zero()))
}

/// `d⁺(p, q) = d(p, q) 1{p ≤ q}`.
pub fn kl_plus<T: Scalar>(family: &RewardFamily<T>, p: T, q: T) -> Result<T> {
    let d = kl(family, p, q)?;
    Ok(if p <= q { d } else { T::zero() })
}

/// `d⁻(p, q) = d(p, q) 1{p ≥ q}`.
pub fn kl_minus<T: Scalar>(family: &RewardFamily<T>, p: T, q: T) -> Result<T> {
    let d = kl(family, p, q)?;
    Ok(if p >= q { d } else { T::zero() })
}

/// Variance of the member with mean `p`.
pub fn variance<T: Scalar>(family: &RewardFamily<T>, p: T) -> Result<T> {
    family.check_mean(p)?;
    Ok(family.variance_unchecked(p))
}
