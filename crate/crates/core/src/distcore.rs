//! Finite discrete laws on a contiguous integer window.
//!
//! A [`FiniteDist`] stores `P(X = offset + i)` for `i = 0..len` together with
//! the probability `tail_mass` that was cut off to the right of the stored
//! window when the law has unbounded support. Tail mass is never folded back
//! into the stored masses: distances treat it pessimistically so that every
//! number computed from a truncated law remains a certified bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default right-tail truncation tolerance for laws with infinite support.
pub const DEFAULT_TRUNCATION: f64 = 1e-15;

/// Default slack for order and equality comparisons between probabilities.
pub const COMPARE_TOL: f64 = 1e-12;

/// Slack on `sum(masses) + tail_mass = 1`.
const NORMALIZATION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteDist {
    offset: i64,
    masses: Vec<f64>,
    tail_mass: f64,
}

/// Mean, variance and `E[C(X, t)]` for `t = 0..=s_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub variance: f64,
    pub factorial_binomial_moments: Vec<f64>,
}

/// Generalised binomial coefficient `C(n, k)`, zero whenever `n < k`
/// (including every negative `n`).
pub fn binom(n: i64, k: u32) -> f64 {
    if n < k as i64 {
        return 0.0;
    }
    let mut c = 1.0;
    for i in 0..k as i64 {
        c *= (n - i) as f64 / (i + 1) as f64;
    }
    c
}

fn validate_masses(masses: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for (index, &value) in masses.iter().enumerate() {
        if value.is_nan() || value < 0.0 {
            return Err(Error::NegativeMass { index, value });
        }
        total += value;
    }
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::ZeroMass);
    }
    Ok(total)
}

/// Normalised, trimmed law with no tail mass.
pub fn make_dist(offset: i64, masses: Vec<f64>) -> Result<FiniteDist> {
    FiniteDist::new(offset, masses)
}

impl FiniteDist {
    /// Normalise `masses` to total one and trim leading/trailing zeros.
    pub fn new(offset: i64, mut masses: Vec<f64>) -> Result<Self> {
        let total = validate_masses(&masses)?;
        for m in &mut masses {
            *m /= total;
        }
        Ok(Self::trimmed(offset, masses, 0.0))
    }

    /// A law whose stored window carries `1 - tail_mass` of the probability;
    /// the stored masses are rescaled to that total.
    pub fn with_tail(offset: i64, mut masses: Vec<f64>, tail_mass: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&tail_mass) {
            return Err(Error::InvalidProbability(tail_mass));
        }
        let total = validate_masses(&masses)?;
        let scale = (1.0 - tail_mass) / total;
        for m in &mut masses {
            *m *= scale;
        }
        Ok(Self::trimmed(offset, masses, tail_mass))
    }

    fn trimmed(mut offset: i64, mut masses: Vec<f64>, tail_mass: f64) -> Self {
        let lead = masses.iter().take_while(|&&m| m == 0.0).count();
        if lead > 0 {
            masses.drain(..lead);
            offset += lead as i64;
        }
        while masses.last() == Some(&0.0) {
            masses.pop();
        }
        debug_assert!(!masses.is_empty());
        Self { offset, masses, tail_mass }
    }

    pub fn point(k: i64) -> Self {
        Self { offset: k, masses: vec![1.0], tail_mass: 0.0 }
    }

    /// Uniform law on `lo..=hi`.
    pub fn uniform(lo: i64, hi: i64) -> Result<Self> {
        if hi < lo {
            return Err(Error::arg(format!("empty uniform range {lo}..={hi}")));
        }
        Self::new(lo, vec![1.0; (hi - lo + 1) as usize])
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Smallest stored support point.
    pub fn min_support(&self) -> i64 {
        self.offset
    }

    /// Largest stored support point.
    pub fn max_support(&self) -> i64 {
        self.offset + self.masses.len() as i64 - 1
    }

    pub fn pmf(&self, k: i64) -> f64 {
        if k < self.offset {
            return 0.0;
        }
        self.masses.get((k - self.offset) as usize).copied().unwrap_or(0.0)
    }

    /// `(k, P(X = k))` over the stored window.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.masses.iter().enumerate().map(move |(i, &m)| (self.offset + i as i64, m))
    }

    /// `P(X > k)`, with the tail mass counted as lying above the window.
    pub fn survival(&self, k: i64) -> f64 {
        let above: f64 = self.iter().filter(|&(j, _)| j > k).map(|(_, m)| m).sum();
        above + self.tail_mass
    }

    /// `E[g(X)]` over the stored window.
    pub fn expect(&self, g: impl Fn(i64) -> f64) -> f64 {
        self.iter().map(|(j, m)| m * g(j)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|j| j as f64)
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.expect(|j| (j as f64 - mu).powi(2)).max(0.0)
    }

    pub fn moment_summary(&self, s_max: u32) -> MomentSummary {
        MomentSummary {
            mean: self.mean(),
            variance: self.variance(),
            factorial_binomial_moments: (0..=s_max)
                .map(|s| factorial_binomial_moment(self, s))
                .collect(),
        }
    }

    /// Pointwise comparison of the stored pmfs (tails included).
    pub fn approx_eq(&self, other: &FiniteDist, tol: f64) -> bool {
        let lo = self.min_support().min(other.min_support());
        let hi = self.max_support().max(other.max_support());
        (lo..=hi).all(|k| (self.pmf(k) - other.pmf(k)).abs() <= tol)
            && (self.tail_mass - other.tail_mass).abs() <= tol
    }

    /// Law of `map(X)` for an integer map.
    pub fn pushforward(&self, map: impl Fn(i64) -> i64) -> FiniteDist {
        let points: Vec<(i64, f64)> = self.iter().map(|(j, m)| (map(j), m)).collect();
        let lo = points.iter().map(|p| p.0).min().unwrap_or(0);
        let hi = points.iter().map(|p| p.0).max().unwrap_or(0);
        let mut masses = vec![0.0; (hi - lo + 1) as usize];
        for (k, m) in points {
            masses[(k - lo) as usize] += m;
        }
        Self::trimmed(lo, masses, self.tail_mass)
    }

    /// Law of `X + Y` for independent `X` (self) and `Y`.
    pub fn convolve(&self, other: &FiniteDist) -> FiniteDist {
        let mut masses = vec![0.0; self.masses.len() + other.masses.len() - 1];
        for (i, &a) in self.masses.iter().enumerate() {
            for (j, &b) in other.masses.iter().enumerate() {
                masses[i + j] += a * b;
            }
        }
        let tail = self.tail_mass + other.tail_mass - self.tail_mass * other.tail_mass;
        Self::trimmed(self.offset + other.offset, masses, tail)
    }
}

/// Total variation distance, `0.5 * sum |a_j - b_j|`. Each law's tail mass is
/// treated as disjoint from everything else, so the result is an upper bound
/// on the distance between the untruncated laws.
pub fn tv_distance(a: &FiniteDist, b: &FiniteDist) -> f64 {
    let lo = a.min_support().min(b.min_support());
    let hi = a.max_support().max(b.max_support());
    let stored: f64 = (lo..=hi).map(|k| (a.pmf(k) - b.pmf(k)).abs()).sum();
    (0.5 * (stored + a.tail_mass + b.tail_mass)).min(1.0)
}

/// `sum_k |P(a > k) - P(b > k)|` over the stored windows.
pub fn wasserstein_distance(a: &FiniteDist, b: &FiniteDist) -> f64 {
    let lo = a.min_support().min(b.min_support()) - 1;
    let hi = a.max_support().max(b.max_support());
    let (mut sa, mut sb) = (0.0, 0.0);
    let mut total = 0.0;
    // walk k downwards so the survival functions accumulate
    for k in (lo..hi).rev() {
        sa += a.pmf(k + 1);
        sb += b.pmf(k + 1);
        total += (sa - sb).abs();
    }
    total
}

/// The law with pmf proportional to `weights(j) * P(W = j)`, and the
/// normaliser `E[weights(W)]`.
pub fn weighted_bias(w: &FiniteDist, weights: impl Fn(i64) -> f64) -> Result<(FiniteDist, f64)> {
    let raw: Vec<f64> = w
        .iter()
        .map(|(j, m)| {
            let c = weights(j);
            if c < 0.0 || c.is_nan() {
                Err(Error::arg(format!("negative bias weight {c} at {j}")))
            } else {
                Ok(c * m)
            }
        })
        .collect::<Result<_>>()?;
    let normaliser: f64 = raw.iter().sum();
    if !(normaliser > 0.0) {
        return Err(Error::ZeroMass);
    }
    let dist = if w.tail_mass > 0.0 {
        FiniteDist::with_tail(w.offset, raw, w.tail_mass)?
    } else {
        FiniteDist::new(w.offset, raw)?
    };
    Ok((dist, normaliser))
}

/// Size-biased law `W^s`, `P(W^s = j) = j P(W = j) / E W`.
pub fn size_bias(w: &FiniteDist) -> Result<FiniteDist> {
    if w.min_support() < 0 {
        return Err(Error::NegativeSupport(w.min_support()));
    }
    weighted_bias(w, |j| j as f64).map(|(d, _)| d)
}

/// Law of `W + k`.
pub fn shift(w: &FiniteDist, k: i64) -> FiniteDist {
    FiniteDist { offset: w.offset + k, masses: w.masses.clone(), tail_mass: w.tail_mass }
}

/// Law of `v_p * W` with `v_p ~ Bernoulli(p)` independent of `W`.
pub fn bernoulli_thin(w: &FiniteDist, p: f64) -> Result<FiniteDist> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    let lo = w.min_support().min(0);
    let hi = w.max_support().max(0);
    let mut masses = vec![0.0; (hi - lo + 1) as usize];
    for (j, m) in w.iter() {
        masses[(j - lo) as usize] += p * m;
    }
    masses[(-lo) as usize] += 1.0 - p;
    Ok(FiniteDist::trimmed(lo, masses, p * w.tail_mass))
}

/// `E[C(W, s)]`.
pub fn factorial_binomial_moment(w: &FiniteDist, s: u32) -> f64 {
    w.expect(|j| binom(j, s))
}

/// Pointwise convex combination of laws.
pub fn mixture(components: &[(f64, FiniteDist)]) -> Result<FiniteDist> {
    if components.is_empty() {
        return Err(Error::ZeroMass);
    }
    let total: f64 = components.iter().map(|c| c.0).sum();
    if components.iter().any(|c| c.0 < 0.0 || c.0.is_nan()) || (total - 1.0).abs() > NORMALIZATION_SLACK {
        return Err(Error::WeightSum(total));
    }
    let lo = components.iter().map(|c| c.1.min_support()).min().unwrap_or(0);
    let hi = components.iter().map(|c| c.1.max_support()).max().unwrap_or(0);
    let mut masses = vec![0.0; (hi - lo + 1) as usize];
    let mut tail = 0.0;
    for (weight, d) in components {
        for (j, m) in d.iter() {
            masses[(j - lo) as usize] += weight * m;
        }
        tail += weight * d.tail_mass;
    }
    if masses.iter().all(|&m| m == 0.0) {
        return Err(Error::ZeroMass);
    }
    Ok(FiniteDist::trimmed(lo, masses, tail))
}
