//! Exact laws of the example models, their closed-form moments, and moment
//! matching of approximating laws.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bdchain::{stationary_distribution, RateSchedule};
use crate::distcore::{binom, make_dist, mixture, shift, FiniteDist, DEFAULT_TRUNCATION};
use crate::error::{Error, Result};
use crate::exec::Exec;

/// Largest number of configurations any exact enumeration may visit.
pub const ENUMERATION_BUDGET: f64 = 1e8;

fn check_prob(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}

fn check_budget(needed: f64) -> Result<()> {
    if needed > ENUMERATION_BUDGET {
        Err(Error::BudgetExceeded { needed, budget: ENUMERATION_BUDGET })
    } else {
        Ok(())
    }
}

/// Success probabilities of indicator summands, stored as `(p, count)` runs so
/// that very long homogeneous profiles stay cheap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliProfile {
    groups: Vec<(f64, u64)>,
}

impl BernoulliProfile {
    pub fn new(probs: &[f64]) -> Result<Self> {
        let mut groups: Vec<(f64, u64)> = Vec::new();
        for &p in probs {
            check_prob(p)?;
            match groups.last_mut() {
                Some((q, c)) if *q == p => *c += 1,
                _ => groups.push((p, 1)),
            }
        }
        Ok(Self { groups })
    }

    /// `n` summands with common probability `p`.
    pub fn homogeneous(n: u64, p: f64) -> Result<Self> {
        check_prob(p)?;
        Ok(Self { groups: if n == 0 { vec![] } else { vec![(p, n)] } })
    }

    pub fn groups(&self) -> &[(f64, u64)] {
        &self.groups
    }

    pub fn len(&self) -> u64 {
        self.groups.iter().map(|g| g.1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every probability, expanded.
    pub fn probs(&self) -> Vec<f64> {
        self.groups.iter().flat_map(|&(p, c)| std::iter::repeat_n(p, c as usize)).collect()
    }

    /// `λ_k = Σ p_i^k`.
    pub fn lambda_k(&self, k: i32) -> f64 {
        self.groups.iter().map(|&(p, c)| c as f64 * p.powi(k)).sum()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda_k(1)
    }

    /// Variance of the independent sum, `λ - λ_2`.
    pub fn variance(&self) -> f64 {
        self.groups.iter().map(|&(p, c)| c as f64 * p * (1.0 - p)).sum()
    }

    /// `sqrt` of the sum of all but the `k` largest `p_i (1 - p_i)`.
    pub fn sigma_k(&self, k: u64) -> f64 {
        let mut rho: Vec<(f64, u64)> = self.groups.iter().map(|&(p, c)| (p * (1.0 - p), c)).collect();
        rho.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut skip = k;
        let mut total = 0.0;
        for (r, c) in rho {
            let dropped = skip.min(c);
            skip -= dropped;
            total += r * (c - dropped) as f64;
        }
        total.sqrt()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.groups.len() <= 1
    }
}

/// Exact law of a sum of independent indicators (dynamic-programming convolution).
pub fn independent_bernoulli_sum(profile: &BernoulliProfile) -> Result<FiniteDist> {
    let n = profile.len() as usize;
    check_budget(n as f64 * n as f64 / 2.0)?;
    let mut pmf = vec![0.0; n + 1];
    pmf[0] = 1.0;
    for (filled, p) in profile.probs().into_iter().enumerate() {
        for j in (0..=filled).rev() {
            let m = pmf[j];
            pmf[j + 1] += p * m;
            pmf[j] = (1.0 - p) * m;
        }
    }
    make_dist(0, pmf)
}

/// Hypergeometric law with closed-form mean and variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypergeometric {
    pub law: FiniteDist,
    pub lambda: f64,
    pub sigma2: f64,
}

/// Number of occupied urns among the first `n` when `m` balls occupy `m` of
/// `big_n` urns uniformly.
pub fn hypergeometric(big_n: u64, m: u64, n: u64) -> Result<Hypergeometric> {
    if big_n < 2 || m > big_n || n > big_n {
        return Err(Error::arg(format!("need N >= 2 and m, n <= N (N={big_n}, m={m}, n={n})")));
    }
    let (nn, mm, kk) = (big_n as f64, m as f64, n as f64);
    let lo = (m + n).saturating_sub(big_n);
    let hi = m.min(n);
    let mut masses = vec![1.0];
    for k in lo..hi {
        let k = k as f64;
        let ratio = (mm - k) * (kk - k) / ((k + 1.0) * (nn - mm - kk + k + 1.0));
        masses.push(masses[masses.len() - 1] * ratio);
    }
    Ok(Hypergeometric {
        law: make_dist(lo as i64, masses)?,
        lambda: mm * kk / nn,
        sigma2: mm * kk * (nn - mm) * (nn - kk) / ((nn - 1.0) * nn * nn),
    })
}

/// Bose–Einstein occupancy law on `{0..m}` and the matched geometric `q = m / (d + m - 1)`.
pub fn bose_einstein(m: u64, d: u64) -> Result<(FiniteDist, f64)> {
    if m < 1 || d < 2 {
        return Err(Error::arg("need m >= 1 and d >= 2"));
    }
    let (mf, df) = (m as f64, d as f64);
    let mut masses = vec![(df - 1.0) / (df + mf - 1.0)];
    for j in 1..=m {
        let j = j as f64;
        masses.push(masses[masses.len() - 1] * (mf - j + 1.0) / (df + mf - j - 1.0));
    }
    Ok((make_dist(0, masses)?, mf / (df + mf - 1.0)))
}

/// Closed-form moments of the circular `k`-runs count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KRuns {
    pub n: f64,
    pub k: u32,
    pub p: f64,
    pub lambda: f64,
    pub lambda2: f64,
    pub sigma2: f64,
}

/// `λ = n p^k`, `λ_2 = n p^{2k}` and the circular variance.
pub fn kruns_moments(n: f64, k: u32, p: f64) -> Result<KRuns> {
    check_prob(p)?;
    if k < 2 || n <= k as f64 {
        return Err(Error::arg(format!("need 2 <= k < n (n={n}, k={k})")));
    }
    let pk = p.powi(k as i32);
    let sigma2 = if p == 1.0 {
        0.0
    } else if n < (2 * k - 1) as f64 {
        kruns_variance_short(n as u64, k, p)
    } else {
        n * pk / (1.0 - p) * (1.0 + p - pk * (2.0 + (2.0 * k as f64 - 1.0) * (1.0 - p)))
    };
    Ok(KRuns { n, k, p, lambda: n * pk, lambda2: n * pk * pk, sigma2 })
}

/// `n Σ_d Cov(X_0, X_d)` for circles too short for a window to overlap its
/// neighbours on one side only.
fn kruns_variance_short(n: u64, k: u32, p: f64) -> f64 {
    let covered = |d: u64| (0..n).filter(|&i| i < k as u64 || (i + n - d) % n < k as u64).count();
    let p2k = p.powi(2 * k as i32);
    n as f64 * (0..n).map(|d| p.powi(covered(d) as i32) - p2k).sum::<f64>()
}

/// Exact law of the circular `k`-runs count by a transfer map over
/// `(last k-1 bits, count)`, conditioning on the first `k-1` bits to close the circle.
pub fn kruns_law(n: u64, k: u32, p: f64) -> Result<FiniteDist> {
    kruns_moments(n as f64, k, p)?;
    let width = 1usize << (k - 1);
    let nn = n as usize;
    check_budget((n as f64).powi(2) * (width * width) as f64)?;
    let full = width - 1;
    let bitp = |b: usize| if b == 1 { p } else { 1.0 - p };
    let mut total = vec![0.0; nn + 1];
    for prefix in 0..width {
        // bit i of `prefix` is ξ_{i+1}; masks store the most recent bit lowest
        let prefix_prob: f64 = (0..k - 1).map(|i| bitp((prefix >> i) & 1)).product();
        if prefix_prob == 0.0 {
            continue;
        }
        let start_mask = (0..k - 1).fold(0usize, |m, i| (m << 1) | ((prefix >> i) & 1));
        let mut cur = vec![0.0; width * (nn + 1)];
        cur[start_mask * (nn + 1)] = prefix_prob;
        for step in (k - 1) as usize..nn {
            let mut next = vec![0.0; width * (nn + 1)];
            for mask in 0..width {
                for c in 0..=step.min(nn) {
                    let v = cur[mask * (nn + 1) + c];
                    if v == 0.0 {
                        continue;
                    }
                    for bit in 0..2 {
                        let pr = bitp(bit);
                        if pr == 0.0 {
                            continue;
                        }
                        let run = usize::from(bit == 1 && mask == full);
                        let nm = ((mask << 1) | bit) & full;
                        next[nm * (nn + 1) + c + run] += v * pr;
                    }
                }
            }
            cur = next;
        }
        for mask in 0..width {
            // windows straddling the end: last k-1 bits followed by the prefix
            let tail: Vec<usize> = (0..k - 1).rev().map(|i| (mask >> i) & 1).collect();
            let head: Vec<usize> = (0..k - 1).map(|i| (prefix >> i) & 1).collect();
            let seq: Vec<usize> = tail.into_iter().chain(head).collect();
            let wrap = (0..(k - 1) as usize).filter(|&s| seq[s..s + k as usize].iter().all(|&b| b == 1)).count();
            for c in 0..=nn {
                let v = cur[mask * (nn + 1) + c];
                if v != 0.0 {
                    total[c + wrap] += v;
                }
            }
        }
    }
    make_dist(0, total)
}

/// Circular `k`-runs count of a bit pattern (bit `i` is trial `i`).
pub fn kruns_count(bits: u64, n: u32, k: u32) -> u32 {
    (0..n).filter(|&i| (0..k).all(|j| bits >> ((i + j) % n) & 1 == 1)).count() as u32
}

/// Law of `W` by enumerating all `2^n` trial sequences.
pub fn kruns_law_bruteforce(n: u32, k: u32, p: f64, exec: Exec) -> Result<FiniteDist> {
    kruns_moments(n as f64, k, p)?;
    check_budget(2f64.powi(n as i32) * n as f64)?;
    let total = 1u64 << n;
    let blocks = total.div_ceil(BLOCK).max(1);
    let partial = exec.map(blocks as usize, |b| {
        let mut pmf = vec![0.0; n as usize + 1];
        for bits in b as u64 * BLOCK..((b as u64 + 1) * BLOCK).min(total) {
            let ones = bits.count_ones() as i32;
            let pr = p.powi(ones) * (1.0 - p).powi(n as i32 - ones);
            pmf[kruns_count(bits, n, k) as usize] += pr;
        }
        pmf
    });
    make_dist(0, sum_blocks(partial, n as usize + 1))
}

/// Configurations per enumeration block.
pub(crate) const BLOCK: u64 = 1 << 12;

/// Sum per-block tables in block order.
pub(crate) fn sum_blocks(partial: Vec<Vec<f64>>, len: usize) -> Vec<f64> {
    partial.into_iter().fold(vec![0.0; len], |mut acc, t| {
        for (a, x) in acc.iter_mut().zip(t) {
            *a += x;
        }
        acc
    })
}

/// `(L(W | X_1 = 0), L(W | X_1 = 1))` for circular `k`-runs, by enumeration.
pub fn kruns_conditional_laws(n: u32, k: u32, p: f64, exec: Exec) -> Result<(FiniteDist, FiniteDist)> {
    kruns_moments(n as f64, k, p)?;
    check_budget(2f64.powi(n as i32) * n as f64)?;
    let total = 1u64 << n;
    let first = (1u64 << k) - 1;
    let width = n as usize + 1;
    let partial = exec.map(total.div_ceil(BLOCK) as usize, |b| {
        let mut rows = vec![0.0; 2 * width];
        for bits in b as u64 * BLOCK..((b as u64 + 1) * BLOCK).min(total) {
            let ones = bits.count_ones() as i32;
            let pr = p.powi(ones) * (1.0 - p).powi(n as i32 - ones);
            let x = usize::from(bits & first == first);
            rows[x * width + kruns_count(bits, n, k) as usize] += pr;
        }
        rows
    });
    let rows = sum_blocks(partial, 2 * width);
    Ok((make_dist(0, rows[..width].to_vec())?, make_dist(0, rows[width..].to_vec())?))
}

/// `(L(W | X_k = 0), L(W | X_k = 1))` for an urn `k` among the first `n`.
pub fn hypergeometric_conditional_laws(big_n: u64, m: u64, n: u64) -> Result<(FiniteDist, FiniteDist)> {
    if m == 0 || m == big_n || n == 0 {
        return Err(Error::arg("both conditional events need positive probability"));
    }
    let law0 = hypergeometric(big_n - 1, m, n - 1)?.law;
    let law1 = shift(&hypergeometric(big_n - 1, m - 1, n - 1)?.law, 1);
    Ok((law0, law1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum BirthdayMode {
    Enumerate,
    MonteCarlo { seed: u64, samples: u64 },
}

/// The birthday model: `N` points, `m` colours, `r` excluded pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Birthday {
    /// Exact law (enumeration) or empirical law (Monte Carlo).
    pub law: FiniteDist,
    pub exact: bool,
    pub samples: u64,
    pub lambda: f64,
    pub variance: f64,
    /// `ε` in closed form, `2(N-1)(C-r)(C-r-1)/(m²(C-1))`.
    pub epsilon_closed: f64,
    /// `ε` from counting the `2(N-2)` pairs that share a point with a given pair.
    pub epsilon_neighbour: f64,
}

/// Pairs of `{0..N-1}` in lexicographic order.
pub fn birthday_pairs(big_n: u32) -> Vec<(u32, u32)> {
    (0..big_n).flat_map(|a| (a + 1..big_n).map(move |b| (a, b))).collect()
}

/// All `r`-subsets of `{0..c-1}` as bit masks.
pub fn subset_masks(c: u32, r: u32) -> Vec<u64> {
    let mut out = Vec::new();
    let mut idx: Vec<u32> = (0..r).collect();
    if r > c {
        return out;
    }
    loop {
        out.push(idx.iter().fold(0u64, |m, &i| m | 1 << i));
        let Some(pos) = (0..r as usize).rev().find(|&i| idx[i] < c - r + i as u32) else { break };
        idx[pos] += 1;
        for j in pos + 1..r as usize {
            idx[j] = idx[j - 1] + 1;
        }
    }
    out
}

/// Bit mask of monochromatic pairs for colouring number `code` (base `m` digits).
pub fn monochromatic_mask(code: u64, big_n: u32, m: u64, pairs: &[(u32, u32)]) -> u64 {
    let mut colours = [0u64; 64];
    let mut c = code;
    for slot in colours.iter_mut().take(big_n as usize) {
        *slot = c % m;
        c /= m;
    }
    pairs.iter().enumerate().fold(0u64, |acc, (i, &(a, b))| {
        if colours[a as usize] == colours[b as usize] {
            acc | 1 << i
        } else {
            acc
        }
    })
}

pub fn birthday_closed_forms(big_n: u32, m: u64, r: u64) -> Result<(f64, f64, f64, f64)> {
    let c = binom(big_n as i64, 2);
    if big_n < 2 || m < 1 || r as f64 > c {
        return Err(Error::arg("need N >= 2, m >= 1, r <= C(N,2)"));
    }
    let (mf, nf, rf) = (m as f64, big_n as f64, r as f64);
    let lambda = (c - rf) / mf;
    let variance = lambda - (c - rf) / (mf * mf);
    let ratio = if c > 1.0 { (c - rf) * (c - rf - 1.0) / (mf * mf * (c - 1.0)) } else { 0.0 };
    Ok((lambda, variance, 2.0 * (nf - 1.0) * ratio, 2.0 * (nf - 2.0) * ratio))
}

pub fn birthday(big_n: u32, m: u64, r: u64, mode: BirthdayMode, exec: Exec) -> Result<Birthday> {
    let (lambda, variance, epsilon_closed, epsilon_neighbour) = birthday_closed_forms(big_n, m, r)?;
    let pairs = birthday_pairs(big_n);
    let c = pairs.len() as u32;
    if c > 64 {
        return Err(Error::arg("at most 11 points are supported"));
    }
    let (law, exact, samples) = match mode {
        BirthdayMode::Enumerate => {
            let colourings = (m as f64).powi(big_n as i32);
            check_budget(colourings * binom(c as i64, r as u32))?;
            let masks = subset_masks(c, r as u32);
            let total = m.pow(big_n);
            let blocks = total.div_ceil(BLOCK);
            let partial = exec.map(blocks as usize, |b| {
                let mut counts = vec![0.0; c as usize + 1];
                for code in b as u64 * BLOCK..((b as u64 + 1) * BLOCK).min(total) {
                    let mono = monochromatic_mask(code, big_n, m, &pairs);
                    for s in &masks {
                        counts[(mono & !s).count_ones() as usize] += 1.0;
                    }
                }
                counts
            });
            (make_dist(0, sum_blocks(partial, c as usize + 1))?, true, total * masks.len() as u64)
        }
        BirthdayMode::MonteCarlo { seed, samples } => {
            if samples == 0 {
                return Err(Error::arg("samples must be >= 1"));
            }
            let counts = birthday_mc_counts(big_n, m, r, seed, samples, exec);
            (make_dist(0, counts)?, false, samples)
        }
    };
    Ok(Birthday { law, exact, samples, lambda, variance, epsilon_closed, epsilon_neighbour })
}

/// Samples per Monte Carlo block; block `b` draws from stream `b` of the seed.
pub(crate) const MC_BLOCK: u64 = 1 << 14;

fn birthday_mc_counts(big_n: u32, m: u64, r: u64, seed: u64, samples: u64, exec: Exec) -> Vec<f64> {
    let pairs = birthday_pairs(big_n);
    let c = pairs.len();
    let blocks = samples.div_ceil(MC_BLOCK);
    let partial = exec.map(blocks as usize, |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        let mut counts = vec![0.0; c + 1];
        let mut colours = vec![0u64; big_n as usize];
        let mut idx: Vec<usize> = (0..c).collect();
        let here = MC_BLOCK.min(samples - b as u64 * MC_BLOCK);
        for _ in 0..here {
            for col in colours.iter_mut() {
                *col = rng.random_range(0..m);
            }
            // partial Fisher-Yates: the first r entries are the excluded pairs
            for i in 0..r as usize {
                let j = rng.random_range(i..c);
                idx.swap(i, j);
            }
            let mut excluded = 0u64;
            for &i in &idx[..r as usize] {
                excluded |= 1 << i;
            }
            let w = pairs
                .iter()
                .enumerate()
                .filter(|(i, (a, b))| excluded >> i & 1 == 0 && colours[*a as usize] == colours[*b as usize])
                .count();
            counts[w] += 1.0;
        }
        counts
    });
    sum_blocks(partial, c + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KatzClass {
    Binomial,
    Poisson,
    NegativeBinomial,
}

/// Law with `μ_j = (a + b/j) μ_{j-1}`, its class and the rate schedule it is
/// the equilibrium of.
pub fn katz_family(a: f64, b: f64) -> Result<(FiniteDist, KatzClass, RateSchedule)> {
    let (class, schedule) = if a == 0.0 {
        if !(b > 0.0) {
            return Err(Error::arg("a = 0 needs b > 0"));
        }
        (KatzClass::Poisson, RateSchedule::poisson(b))
    } else if a < 0.0 {
        let n = -b / a - 1.0;
        if (n - n.round()).abs() > 1e-9 * n.abs().max(1.0) || n.round() < 1.0 {
            return Err(Error::arg(format!("a < 0 needs -b/a - 1 to be a positive integer, got {n}")));
        }
        (KatzClass::Binomial, RateSchedule::binomial(n.round() as u64, -a / (1.0 - a)))
    } else if a < 1.0 {
        let r = b / a + 1.0;
        if !(r > 0.0) {
            return Err(Error::arg("0 < a < 1 needs b > -a"));
        }
        (KatzClass::NegativeBinomial, RateSchedule::negative_binomial(r, a))
    } else {
        return Err(Error::arg("a >= 1 does not give a summable law"));
    };
    Ok((stationary_distribution(&schedule, DEFAULT_TRUNCATION)?, class, schedule))
}

/// Mixed Poisson law `Σ P(ξ = w) Po(w)` with `λ = E ξ` and `Var ξ`.
pub fn mixed_poisson(atoms: &[(f64, f64)], tol: f64) -> Result<(FiniteDist, f64, f64)> {
    if atoms.iter().any(|&(w, _)| !(w >= 0.0)) {
        return Err(Error::arg("mixing atoms must be nonnegative"));
    }
    let comps = atoms
        .iter()
        .map(|&(w, pr)| {
            let law = if w == 0.0 { FiniteDist::point(0) } else { stationary_distribution(&RateSchedule::poisson(w), tol)? };
            Ok((pr, law))
        })
        .collect::<Result<Vec<_>>>()?;
    let law = mixture(&comps)?;
    let lambda: f64 = atoms.iter().map(|&(w, pr)| w * pr).sum();
    let var = atoms.iter().map(|&(w, pr)| pr * (w - lambda).powi(2)).sum();
    Ok((law, lambda, var))
}

/// Constant-birth polynomial birth–death parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PbdMatch {
    pub alpha: f64,
    /// Falling-factorial death coefficients, monic.
    pub death_poly: Vec<f64>,
    /// `γλ/α` for the two-parameter family.
    pub q: Option<f64>,
    /// Relative `(A_l)` residuals when the law of `W` was available.
    pub residuals: Option<Vec<f64>>,
    pub warnings: Vec<String>,
}

impl PbdMatch {
    pub fn schedule(&self) -> RateSchedule {
        RateSchedule::Pbd { alpha: self.alpha, death_poly: self.death_poly.clone() }
    }

    /// `γ`, the linear death coefficient.
    pub fn gamma(&self) -> f64 {
        self.death_poly[0]
    }
}

/// Relative residuals of `(A_l)`: `E[α_W (W+1)^t] - E[β_W W^t]`, `t < l`.
pub fn condition_a_residuals(w: &FiniteDist, r: &RateSchedule, l: u32) -> Vec<f64> {
    (0..l)
        .map(|t| {
            let lhs = w.expect(|j| r.birth(j) * ((j + 1) as f64).powi(t as i32));
            let rhs = w.expect(|j| r.death(j) * (j as f64).powi(t as i32));
            (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE)
        })
        .collect()
}

/// Closed-form two-parameter match for a sum of independent indicators:
/// `γ = λ²/λ_2 - 1 - 2λ + 2λ_3/λ_2`, `α = γλ + λ² - λ_2`.
pub fn pbd_match_closed_form(profile: &BernoulliProfile) -> Result<PbdMatch> {
    let (l1, l2, l3) = (profile.lambda(), profile.lambda_k(2), profile.lambda_k(3));
    if !(l2 > 0.0) {
        return Err(Error::MatchingFailure("λ_2 = 0".into()));
    }
    let gamma = l1 * l1 / l2 - 1.0 - 2.0 * l1 + 2.0 * l3 / l2;
    let alpha = gamma * l1 + l1 * l1 - l2;
    if !(alpha > 1e-12 * l1 * l1) {
        return Err(Error::MatchingFailure(format!("α = {alpha} is not positive (λ² = λ_2)")));
    }
    let mut warnings = Vec::new();
    if gamma < 0.0 {
        warnings.push(format!("γ = {gamma} < 0"));
    }
    Ok(PbdMatch { alpha, death_poly: vec![gamma, 1.0], q: Some(gamma * l1 / alpha), residuals: None, warnings })
}

/// General `l`: solve `α E[(W+1)^t] - Σ_u c_u E[W^{(u+1)} W^t] = E[W^{(l)} W^t]`, `t < l`,
/// for `(α, c_0, …, c_{l-2})` with the leading coefficient fixed to 1.
pub fn pbd_match_linear(w: &FiniteDist, l: u32) -> Result<PbdMatch> {
    if l < 1 {
        return Err(Error::arg("l must be >= 1"));
    }
    let l = l as usize;
    let ff = |j: i64, order: usize| -> f64 { (0..order as i64).map(|i| (j - i) as f64).product() };
    let mut a = DMatrix::<f64>::zeros(l, l);
    let mut rhs = DVector::<f64>::zeros(l);
    for t in 0..l {
        let pw = t as i32;
        a[(t, 0)] = w.expect(|j| ((j + 1) as f64).powi(pw));
        for u in 0..l - 1 {
            a[(t, u + 1)] = -w.expect(|j| ff(j, u + 1) * (j as f64).powi(pw));
        }
        rhs[t] = w.expect(|j| ff(j, l) * (j as f64).powi(pw));
    }
    let sol = a
        .lu()
        .solve(&rhs)
        .filter(|x| x.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::MatchingFailure("singular moment system".into()))?;
    let alpha = sol[0];
    if !(alpha > 0.0) {
        return Err(Error::MatchingFailure(format!("α = {alpha} is not positive")));
    }
    let mut death_poly: Vec<f64> = sol.iter().skip(1).copied().collect();
    death_poly.push(1.0);
    let mut warnings = Vec::new();
    if death_poly.len() > 1 && death_poly[0] < 0.0 {
        warnings.push(format!("γ = {} < 0", death_poly[0]));
    }
    let mean = w.mean();
    let q = (l == 2).then(|| death_poly[0] * mean / alpha);
    let mut out = PbdMatch { alpha, death_poly, q, residuals: None, warnings };
    out.residuals = Some(condition_a_residuals(w, &out.schedule(), l as u32));
    Ok(out)
}

/// Source of the law to be matched.
#[derive(Debug, Clone, PartialEq)]
pub enum MatchSource<'a> {
    Profile(&'a BernoulliProfile),
    Law(&'a FiniteDist),
}

/// Constant-birth PBD matching `(A_l)`. Profiles with `l = 2` use the closed
/// form (with residuals when the exact law fits the budget); everything else
/// goes through the linear system.
pub fn pbd_match_params(source: MatchSource<'_>, l: u32) -> Result<PbdMatch> {
    match source {
        MatchSource::Profile(profile) if l == 2 => {
            let mut m = pbd_match_closed_form(profile)?;
            if let Ok(law) = independent_bernoulli_sum(profile) {
                m.residuals = Some(condition_a_residuals(&law, &m.schedule(), 2));
            }
            Ok(m)
        }
        MatchSource::Profile(profile) => pbd_match_linear(&independent_bernoulli_sum(profile)?, l),
        MatchSource::Law(w) => pbd_match_linear(w, l),
    }
}

/// Parameters of `TP(λ, σ²) = Po(σ² + γ) + ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TpParams {
    pub lambda: f64,
    pub sigma2: f64,
    pub gamma: f64,
    pub rho: i64,
}

pub fn tp_params(lambda: f64, sigma2: f64) -> Result<TpParams> {
    if !(sigma2 > 0.0) || !lambda.is_finite() {
        return Err(Error::arg(format!("need σ² > 0, got {sigma2}")));
    }
    let x = lambda - sigma2;
    let rho = x.floor();
    Ok(TpParams { lambda, sigma2, gamma: x - rho, rho: rho as i64 })
}

/// Translated Poisson law.
pub fn translated_poisson(lambda: f64, sigma2: f64, tol: f64) -> Result<(TpParams, FiniteDist)> {
    let tp = tp_params(lambda, sigma2)?;
    let base = stationary_distribution(&RateSchedule::poisson(tp.sigma2 + tp.gamma), tol)?;
    Ok((tp, shift(&base, tp.rho)))
}

/// Model descriptors accepted by the command line and oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Kruns { n: u64, k: u32, p: f64 },
    Hypergeometric {
        #[serde(rename = "N")]
        big_n: u64,
        m: u64,
        n: u64,
    },
    BernoulliSum { probs: Vec<f64> },
    BoseEinstein { m: u64, d: u64 },
    Birthday {
        #[serde(rename = "N")]
        big_n: u32,
        m: u64,
        r: u64,
    },
    MixedPoisson { atoms: Vec<[f64; 2]> },
    Katz { a: f64, b: f64 },
}

impl ModelSpec {
    /// Exact law of `W`, refusing when the model exceeds the enumeration budget.
    pub fn exact_law(&self, exec: Exec) -> Result<FiniteDist> {
        match self {
            ModelSpec::Kruns { n, k, p } => kruns_law(*n, *k, *p),
            ModelSpec::Hypergeometric { big_n, m, n } => Ok(hypergeometric(*big_n, *m, *n)?.law),
            ModelSpec::BernoulliSum { probs } => independent_bernoulli_sum(&BernoulliProfile::new(probs)?),
            ModelSpec::BoseEinstein { m, d } => Ok(bose_einstein(*m, *d)?.0),
            ModelSpec::Birthday { big_n, m, r } => Ok(birthday(*big_n, *m, *r, BirthdayMode::Enumerate, exec)?.law),
            ModelSpec::MixedPoisson { atoms } => {
                let atoms: Vec<(f64, f64)> = atoms.iter().map(|a| (a[0], a[1])).collect();
                Ok(mixed_poisson(&atoms, DEFAULT_TRUNCATION)?.0)
            }
            ModelSpec::Katz { a, b } => Ok(katz_family(*a, *b)?.0),
        }
    }

    /// Mean and variance of `W` (closed forms where the model has them).
    pub fn mean_variance(&self, exec: Exec) -> Result<(f64, f64)> {
        match self {
            ModelSpec::Kruns { n, k, p } => {
                let m = kruns_moments(*n as f64, *k, *p)?;
                Ok((m.lambda, m.sigma2))
            }
            ModelSpec::Hypergeometric { big_n, m, n } => {
                let h = hypergeometric(*big_n, *m, *n)?;
                Ok((h.lambda, h.sigma2))
            }
            ModelSpec::BernoulliSum { probs } => {
                let p = BernoulliProfile::new(probs)?;
                Ok((p.lambda(), p.variance()))
            }
            ModelSpec::Birthday { big_n, m, r } => {
                let (l, v, _, _) = birthday_closed_forms(*big_n, *m, *r)?;
                Ok((l, v))
            }
            _ => {
                let law = self.exact_law(exec)?;
                Ok((law.mean(), law.variance()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distcore::tv_distance;

    #[test]
    fn bernoulli_sum_examples() {
        let w = independent_bernoulli_sum(&BernoulliProfile::new(&[0.5, 0.5]).unwrap()).unwrap();
        assert_eq!(w.masses(), &[0.25, 0.5, 0.25]);
        let w = independent_bernoulli_sum(&BernoulliProfile::new(&[0.0; 4]).unwrap()).unwrap();
        assert_eq!(w, FiniteDist::point(0));
        let prof = BernoulliProfile::homogeneous(20, 0.1).unwrap();
        let w = independent_bernoulli_sum(&prof).unwrap();
        assert!((w.mean() - 2.0).abs() < 1e-12);
        assert!((w.variance() - 1.8).abs() < 1e-12);
        assert!((prof.variance() - 1.8).abs() < 1e-12);
    }

    #[test]
    fn sigma_k_drops_largest() {
        let prof = BernoulliProfile::new(&[0.5, 0.1, 0.1]).unwrap();
        assert!((prof.sigma_k(1) - (2.0 * 0.09f64).sqrt()).abs() < 1e-15);
        assert!((prof.sigma_k(2) - 0.3).abs() < 1e-15);
        let h = BernoulliProfile::homogeneous(50, 0.1).unwrap();
        assert!((h.sigma_k(1) - 2.1).abs() < 1e-12);
        assert!((h.sigma_k(2) - (48.0 * 0.09f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn hypergeometric_examples() {
        let h = hypergeometric(6, 3, 3).unwrap();
        for (k, e) in [1.0, 9.0, 9.0, 1.0].iter().enumerate() {
            assert!((h.law.pmf(k as i64) - e / 20.0).abs() < 1e-15);
        }
        let h = hypergeometric(100, 50, 50).unwrap();
        assert!((h.sigma2 - 6.25e6 / 990_000.0).abs() < 1e-12);
        assert!((h.law.variance() - h.sigma2).abs() < 1e-10);
        assert!((h.law.mean() - h.lambda).abs() < 1e-10);
        assert_eq!(hypergeometric(7, 7, 3).unwrap().law, FiniteDist::point(3));
    }

    #[test]
    fn bose_einstein_examples() {
        let (w, q) = bose_einstein(1, 2).unwrap();
        assert_eq!(w.masses(), &[0.5, 0.5]);
        assert_eq!(q, 0.5);
        for m in 1..=12 {
            for d in 2..=12 {
                let (w, _) = bose_einstein(m, d).unwrap();
                let total: f64 = w.masses().iter().sum();
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kruns_transfer_matches_enumeration() {
        for n in [3u32, 4, 6, 9] {
            for k in [2u32, 3] {
                if k >= n {
                    continue;
                }
                for p in [0.2, 0.5, 0.8] {
                    let a = kruns_law(n as u64, k, p).unwrap();
                    let b = kruns_law_bruteforce(n, k, p, Exec::Sequential).unwrap();
                    assert!(tv_distance(&a, &b) < 1e-14, "n={n} k={k} p={p}");
                }
            }
        }
        assert_eq!(kruns_law(4, 2, 1.0).unwrap(), FiniteDist::point(4));
        assert!(kruns_law(3, 3, 0.5).is_err());
    }

    #[test]
    fn kruns_closed_forms() {
        let m = kruns_moments(1e6, 2, 0.5).unwrap();
        assert_eq!(m.lambda, 250_000.0);
        assert!((m.sigma2 - 312_500.0).abs() < 1e-6);
        let law = kruns_law(12, 3, 0.3).unwrap();
        let m = kruns_moments(12.0, 3, 0.3).unwrap();
        assert!((law.mean() - m.lambda).abs() < 1e-9 * m.lambda);
        assert!((law.variance() - m.sigma2).abs() < 1e-9 * m.sigma2);
    }

    #[test]
    fn birthday_enumeration_matches_closed_forms() {
        let b = birthday(5, 3, 1, BirthdayMode::Enumerate, Exec::Sequential).unwrap();
        assert!((b.law.mean() - 3.0).abs() < 1e-12);
        assert!((b.lambda - 3.0).abs() < 1e-15);
        assert!((b.law.variance() - b.variance).abs() < 1e-12);
        let b = birthday(4, 2, 6, BirthdayMode::Enumerate, Exec::Sequential).unwrap();
        assert_eq!(b.law, FiniteDist::point(0));
        let (l, _, _, _) = birthday_closed_forms(10, 365, 0).unwrap();
        assert!((l - 45.0 / 365.0).abs() < 1e-15);
    }

    #[test]
    fn birthday_mc_is_reproducible() {
        let mode = BirthdayMode::MonteCarlo { seed: 7, samples: 40_000 };
        let a = birthday(5, 3, 1, mode, Exec::Sequential).unwrap();
        let b = birthday(5, 3, 1, mode, Exec::Parallel).unwrap();
        assert_eq!(a.law, b.law);
        assert!((a.law.mean() - 3.0).abs() < 0.05);
    }

    #[test]
    fn subsets() {
        assert_eq!(subset_masks(4, 2).len(), 6);
        assert_eq!(subset_masks(4, 0), vec![0]);
        assert_eq!(subset_masks(3, 3), vec![0b111]);
    }

    #[test]
    fn katz_examples() {
        let (w, class, _) = katz_family(0.0, 2.0).unwrap();
        assert_eq!(class, KatzClass::Poisson);
        assert!((w.pmf(0) - (-2f64).exp()).abs() < 1e-15);
        let p: f64 = 0.2;
        let (w, class, _) = katz_family(-p / (1.0 - p), 7.0 * p / (1.0 - p)).unwrap();
        assert_eq!(class, KatzClass::Binomial);
        assert!((w.pmf(6) - p.powi(6)).abs() < 1e-15);
        let (_, class, _) = katz_family(0.5, 0.5).unwrap();
        assert_eq!(class, KatzClass::NegativeBinomial);
        assert!(katz_family(1.5, 1.0).is_err());
    }

    #[test]
    fn mixed_poisson_moments() {
        let (w, l, v) = mixed_poisson(&[(1.0, 0.5), (3.0, 0.5)], 1e-15).unwrap();
        assert_eq!((l, v), (2.0, 1.0));
        assert!((w.mean() - 2.0).abs() < 1e-12);
        assert!((w.variance() - 3.0).abs() < 1e-10);
    }

    #[test]
    fn pbd_match_examples() {
        let prof = BernoulliProfile::homogeneous(50, 0.1).unwrap();
        let m = pbd_match_closed_form(&prof).unwrap();
        assert!((m.gamma() - 39.2).abs() < 1e-10);
        assert!((m.alpha - 220.5).abs() < 1e-10);
        let lin = pbd_match_linear(&independent_bernoulli_sum(&prof).unwrap(), 2).unwrap();
        assert!((lin.alpha - m.alpha).abs() < 1e-10 * m.alpha);
        assert!((lin.gamma() - m.gamma()).abs() < 1e-10 * m.gamma());
        assert!(lin.residuals.unwrap().iter().all(|r| *r < 1e-9));

        let n = 6.0;
        let p = 0.2;
        let m = pbd_match_closed_form(&BernoulliProfile::homogeneous(6, p).unwrap()).unwrap();
        assert!((m.alpha - n * (n - 1.0) * p * (1.0 - p)).abs() < 1e-12);
        assert!((m.gamma() - (n - 1.0) * (1.0 - 2.0 * p)).abs() < 1e-12);

        let single = BernoulliProfile::homogeneous(1, 0.3).unwrap();
        assert!(matches!(pbd_match_params(MatchSource::Profile(&single), 2), Err(Error::MatchingFailure(_))));
    }

    #[test]
    fn tp_examples() {
        let t = tp_params(10.0, 7.3).unwrap();
        assert!((t.gamma - 0.7).abs() < 1e-12 && t.rho == 2);
        let t = tp_params(2.0, 5.0).unwrap();
        assert_eq!((t.gamma, t.rho), (0.0, -3));
        let (_, law) = translated_poisson(2.0, 5.0, 1e-15).unwrap();
        assert_eq!(law.min_support(), -3);
        assert!((law.mean() - 2.0).abs() < 1e-12);
        let t = tp_params(4.0, 4.0).unwrap();
        assert_eq!((t.gamma, t.rho), (0.0, 0));
        assert!(tp_params(1.0, 0.0).is_err());
    }

    #[test]
    fn descriptor_round_trip() {
        let spec: ModelSpec = serde_json::from_str(r#"{"model":"hypergeometric","N":6,"m":3,"n":3}"#).unwrap();
        assert_eq!(spec, ModelSpec::Hypergeometric { big_n: 6, m: 3, n: 3 });
        let back = serde_json::to_string(&spec).unwrap();
        assert!(back.contains(r#""N":6"#));
    }
}
