//! Brute-force ground truth: exact total variation distances, exhaustive joint
//! tables of `(X_i, W_i)`, and random-function validation of `s`-convex orders.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bdchain::{stationary_distribution, RateSchedule};
use crate::distcore::{binom, make_dist, tv_distance, FiniteDist, DEFAULT_TRUNCATION};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::models::{
    birthday, birthday_pairs, bose_einstein, independent_bernoulli_sum, kruns_law_bruteforce, monochromatic_mask, pbd_match_linear,
    subset_masks, sum_blocks, translated_poisson, BernoulliProfile, BirthdayMode, ModelSpec, BLOCK,
    ENUMERATION_BUDGET,
};
use crate::orderings::{CertificateEntry, DependenceCertificate, DependenceKind, JointTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum OracleMethod {
    ExactEnumeration,
    TransferMap,
    PmfSummation,
    MonteCarlo { seed: u64, n: u64, stderr: f64 },
}

impl OracleMethod {
    pub fn stderr(&self) -> f64 {
        match self {
            OracleMethod::MonteCarlo { stderr, .. } => *stderr,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub value: f64,
    pub method: OracleMethod,
    /// States or configurations visited.
    pub cost: u64,
}

/// Approximating law of an exact-TV query. `None` parameters are matched to the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "snake_case")]
pub enum Target {
    /// `Po(λ)`, default `λ = E W`.
    Poisson { lambda: Option<f64> },
    /// `TP(λ, σ²)`, defaults `E W` and `Var W`.
    Tp { lambda: Option<f64>, sigma2: Option<f64> },
    /// Two-parameter PBD, default matched through `(A_2)`.
    Pbd { alpha: Option<f64>, gamma: Option<f64> },
    /// Geometric on `{0, 1, ...}` with ratio `q`; default is the model's matched `q`.
    Geometric { q: Option<f64> },
    Schedule { schedule: RateSchedule },
    Model { spec: ModelSpec },
}

/// Largest circle on which k-runs are enumerated bit by bit rather than
/// through the transfer map.
pub const KRUNS_ENUMERATION_MAX_N: u64 = 20;

fn method_for(model: &ModelSpec) -> OracleMethod {
    match model {
        ModelSpec::Kruns { n, .. } if *n <= KRUNS_ENUMERATION_MAX_N => OracleMethod::ExactEnumeration,
        ModelSpec::Kruns { .. } => OracleMethod::TransferMap,
        ModelSpec::Birthday { .. } => OracleMethod::ExactEnumeration,
        _ => OracleMethod::PmfSummation,
    }
}

fn model_cost(model: &ModelSpec, law: &FiniteDist) -> u64 {
    match *model {
        ModelSpec::Kruns { n, .. } if n <= KRUNS_ENUMERATION_MAX_N => 1u64 << n,
        ModelSpec::Kruns { n, k, .. } => n * (1u64 << (2 * (k - 1))) * (n + 1),
        ModelSpec::Birthday { big_n, m, r } => {
            (m as f64).powi(big_n as i32) as u64 * binom(binom(big_n as i64, 2) as i64, r as u32) as u64
        }
        _ => law.masses().len() as u64,
    }
}

/// Law of the approximating distribution for `model` (whose exact law is `law`).
pub fn resolve_target(model: &ModelSpec, law: &FiniteDist, target: &Target, exec: Exec) -> Result<FiniteDist> {
    let tol = DEFAULT_TRUNCATION;
    match target {
        Target::Poisson { lambda } => stationary_distribution(&RateSchedule::poisson(lambda.unwrap_or(law.mean())), tol),
        Target::Tp { lambda, sigma2 } => {
            Ok(translated_poisson(lambda.unwrap_or(law.mean()), sigma2.unwrap_or(law.variance()), tol)?.1)
        }
        Target::Pbd { alpha, gamma } => {
            let schedule = match (alpha, gamma) {
                (Some(a), Some(g)) => RateSchedule::pbd2(*a, *g),
                (None, None) => pbd_match_linear(law, 2)?.schedule(),
                _ => return Err(Error::arg("give both alpha and gamma, or neither")),
            };
            stationary_distribution(&schedule, tol)
        }
        Target::Geometric { q } => {
            let q = match (q, model) {
                (Some(q), _) => *q,
                (None, ModelSpec::BoseEinstein { m, d }) => bose_einstein(*m, *d)?.1,
                (None, _) => law.mean() / (1.0 + law.mean()),
            };
            stationary_distribution(&RateSchedule::geometric(q), tol)
        }
        Target::Schedule { schedule } => stationary_distribution(schedule, tol),
        Target::Model { spec } => spec.exact_law(exec),
    }
}

/// Exact `d_TV(W, target)`. Truncated tails count in full against the result.
pub fn exact_tv(model: &ModelSpec, target: &Target, exec: Exec) -> Result<OracleResult> {
    let law = match *model {
        ModelSpec::Kruns { n, k, p } if n <= KRUNS_ENUMERATION_MAX_N => kruns_law_bruteforce(n as u32, k, p, exec)?,
        _ => model.exact_law(exec)?,
    };
    let other = resolve_target(model, &law, target, exec)?;
    Ok(OracleResult { value: tv_distance(&law, &other), method: method_for(model), cost: model_cost(model, &law) })
}

/// Which second coordinate a joint table records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointMode {
    /// `W_i = W - X_i`.
    Complement,
    /// `W_i - Y_i` with `Y_i` the sum over the local neighbourhood of `i`.
    Neighbourhood,
}

/// Exact joint data of one summand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointEntry {
    pub table: JointTable,
    pub mean_x: f64,
    pub e_xy: f64,
    pub e_x_plus_y: f64,
}

/// Indicator configurations of a model: configuration `c` has probability
/// `prob(c)` and indicator bit mask `mask(c)`.
struct Configs<'a> {
    total: u64,
    indicators: usize,
    neighbours: Vec<u64>,
    config: Box<dyn Fn(u64) -> (f64, u64) + Sync + Send + 'a>,
}

fn budget(needed: f64) -> Result<()> {
    if needed > ENUMERATION_BUDGET {
        Err(Error::BudgetExceeded { needed, budget: ENUMERATION_BUDGET })
    } else {
        Ok(())
    }
}

fn configs(model: &ModelSpec) -> Result<Configs<'static>> {
    match *model {
        ModelSpec::Hypergeometric { big_n, m, n } => {
            if m > big_n || n > big_n || big_n > 40 {
                return Err(Error::arg("need m, n <= N <= 40"));
            }
            budget(2f64.powi(big_n as i32))?;
            let inv = 1.0 / binom(big_n as i64, m as u32);
            let first = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            Ok(Configs {
                total: 1 << big_n,
                indicators: n as usize,
                neighbours: vec![0; n as usize],
                config: Box::new(move |bits| {
                    if bits.count_ones() as u64 == m {
                        (inv, bits & first)
                    } else {
                        (0.0, 0)
                    }
                }),
            })
        }
        ModelSpec::Kruns { n, k, p } => {
            crate::models::kruns_moments(n as f64, k, p)?;
            if n > 40 {
                return Err(Error::arg("k-runs enumeration needs n <= 40"));
            }
            budget(2f64.powi(n as i32))?;
            let (n32, k) = (n as u32, k);
            let neighbours = (0..n32)
                .map(|i| {
                    (1..k).fold(0u64, |acc, d| acc | 1 << ((i + d) % n32) | 1 << ((i + n32 - d) % n32)) & !(1 << i)
                })
                .collect();
            Ok(Configs {
                total: 1 << n,
                indicators: n as usize,
                neighbours,
                config: Box::new(move |bits| {
                    let ones = bits.count_ones() as i32;
                    let pr = p.powi(ones) * (1.0 - p).powi(n32 as i32 - ones);
                    let starts = (0..n32)
                        .filter(|&i| (0..k).all(|j| bits >> ((i + j) % n32) & 1 == 1))
                        .fold(0u64, |acc, i| acc | 1 << i);
                    (pr, starts)
                }),
            })
        }
        ModelSpec::Birthday { big_n, m, r } => {
            let pairs = birthday_pairs(big_n);
            let c = pairs.len() as u32;
            if c > 64 || (r as u32) > c || m == 0 {
                return Err(Error::arg("need N <= 11, r <= C(N,2), m >= 1"));
            }
            let colourings = (m as f64).powi(big_n as i32);
            budget(colourings * binom(c as i64, r as u32))?;
            let masks = subset_masks(c, r as u32);
            let per = masks.len() as u64;
            let total = m.pow(big_n) * per;
            let inv = 1.0 / total as f64;
            let neighbours = pairs
                .iter()
                .map(|&(a, b)| {
                    pairs.iter().enumerate().fold(0u64, |acc, (j, &(x, y))| {
                        let shared = u32::from(x == a || x == b) + u32::from(y == a || y == b);
                        if shared == 1 {
                            acc | 1 << j
                        } else {
                            acc
                        }
                    })
                })
                .collect();
            Ok(Configs {
                total,
                indicators: c as usize,
                neighbours,
                config: Box::new(move |idx| {
                    let mono = monochromatic_mask(idx / per, big_n, m, &pairs);
                    (inv, mono & !masks[(idx % per) as usize])
                }),
            })
        }
        _ => Err(Error::arg("this model has no enumerable indicator representation")),
    }
}

/// Per-block accumulator layout: for each indicator, `2 * width` table cells
/// followed by `E[X Y]` and `E[X + Y]`.
fn enumerate_tables(cfg: &Configs<'_>, mode: JointMode, exec: Exec) -> Vec<JointEntry> {
    let width = cfg.indicators + 1;
    let stride = 2 * width + 2;
    let len = stride * cfg.indicators;
    let partial = exec.map(cfg.total.div_ceil(BLOCK) as usize, |b| {
        let mut acc = vec![0.0; len];
        for c in b as u64 * BLOCK..((b as u64 + 1) * BLOCK).min(cfg.total) {
            let (pr, mask) = (cfg.config)(c);
            if pr == 0.0 {
                continue;
            }
            let w = mask.count_ones() as usize;
            for i in 0..cfg.indicators {
                let x = (mask >> i & 1) as usize;
                let y = (mask & cfg.neighbours[i]).count_ones() as usize;
                let v = match mode {
                    JointMode::Complement => w - x,
                    JointMode::Neighbourhood => w - x - y,
                };
                let base = i * stride;
                acc[base + x * width + v] += pr;
                acc[base + 2 * width] += pr * (x * y) as f64;
                acc[base + 2 * width + 1] += pr * (x + y) as f64;
            }
        }
        acc
    });
    let acc = sum_blocks(partial, len);
    (0..cfg.indicators)
        .map(|i| {
            let row = &acc[i * stride..(i + 1) * stride];
            let table = JointTable { offset: 0, given0: row[..width].to_vec(), given1: row[width..2 * width].to_vec() };
            JointEntry { mean_x: table.p1(), table, e_xy: row[2 * width], e_x_plus_y: row[2 * width + 1] }
        })
        .collect()
}

fn independent_tables(probs: &[f64]) -> Result<Vec<JointEntry>> {
    probs
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let mut rest = probs.to_vec();
            rest.remove(i);
            let wi = if rest.is_empty() { FiniteDist::point(0) } else { independent_bernoulli_sum(&BernoulliProfile::new(&rest)?)? };
            Ok(JointEntry { table: JointTable::independent(p, &wi), mean_x: p, e_xy: 0.0, e_x_plus_y: p })
        })
        .collect()
}

/// Exact joint tables of every summand.
pub fn enumerate_all_joint(model: &ModelSpec, mode: JointMode, exec: Exec) -> Result<Vec<JointEntry>> {
    match model {
        ModelSpec::BernoulliSum { probs } => independent_tables(probs),
        _ => Ok(enumerate_tables(&configs(model)?, mode, exec)),
    }
}

/// Exact joint table of summand `i`.
pub fn enumerate_joint(model: &ModelSpec, i: usize, mode: JointMode, exec: Exec) -> Result<JointEntry> {
    let mut all = enumerate_all_joint(model, mode, exec)?;
    if i >= all.len() {
        return Err(Error::arg(format!("index {i} out of range (model has {} summands)", all.len())));
    }
    Ok(all.swap_remove(i))
}

/// Certificate for `kind` built from exact tables, with `δ_i = E X_i`.
pub fn enumerate_certificate(model: &ModelSpec, kind: DependenceKind, exec: Exec) -> Result<DependenceCertificate> {
    let mode = if kind.uses_neighbourhood() { JointMode::Neighbourhood } else { JointMode::Complement };
    let entries = enumerate_all_joint(model, mode, exec)?
        .into_iter()
        .map(|e| CertificateEntry { delta: e.mean_x, e_xy: e.e_xy, e_x_plus_y: e.e_x_plus_y, joint: e.table })
        .collect();
    Ok(DependenceCertificate { kind, entries, w_law: Some(model.exact_law(exec)?) })
}

/// Outcome of [`random_sconvex_validation`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SconvexValidation {
    /// `value` is the fraction of trials with `E f(a) < E f(b)`.
    pub result: OracleResult,
    pub violations: u64,
    /// Grid start and values of the worst violating function.
    pub witness: Option<(i64, Vec<f64>)>,
    /// `E f(b) - E f(a)` for the witness.
    pub witness_gap: f64,
}

/// Random `s`-convex function on `lo..=hi`: random values on the first `s`
/// points, then i.i.d. heavy-tailed nonnegative `s`-th differences, about half
/// of them zero.
fn random_sconvex(rng: &mut ChaCha8Rng, len: usize, s: u32) -> Vec<f64> {
    let s = s as usize;
    let mut diffs: Vec<Vec<f64>> = Vec::with_capacity(s + 1);
    let top: Vec<f64> = (0..len.saturating_sub(s))
        .map(|_| {
            if rng.random_bool(0.5) {
                0.0
            } else {
                rng.random::<f64>().max(1e-12).powf(-1.0 / 0.7) - 1.0
            }
        })
        .collect();
    diffs.push(top);
    // integrate s times, each time fixing a random starting value
    for _ in 0..s {
        let d = diffs.last().expect("non-empty");
        let mut f = Vec::with_capacity(d.len() + 1);
        f.push(rng.random_range(-1.0..1.0));
        for (j, x) in d.iter().enumerate() {
            f.push(f[j] + x);
        }
        diffs.push(f);
    }
    let mut f = diffs.pop().expect("non-empty");
    f.truncate(len);
    f
}

/// Sample `trials` random `s`-convex functions and count those with `E f(a) < E f(b)`.
pub fn random_sconvex_validation(
    a: &FiniteDist,
    b: &FiniteDist,
    s: u32,
    trials: u64,
    seed: u64,
    exec: Exec,
) -> Result<SconvexValidation> {
    if s < 1 {
        return Err(Error::arg("s must be >= 1"));
    }
    if a.tail_mass() > 0.0 || b.tail_mass() > 0.0 {
        return Err(Error::arg("random validation needs finite supports"));
    }
    let lo = a.min_support().min(b.min_support());
    let hi = a.max_support().max(b.max_support());
    let len = (hi - lo + 1) as usize + s as usize;
    let gaps = exec.map(trials as usize, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let f = random_sconvex(&mut rng, len, s);
        let ev = |d: &FiniteDist| d.expect(|x| f[(x - lo) as usize]);
        let (ea, eb) = (ev(a), ev(b));
        let scale = f.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        (eb - ea, 1e-12 * scale, f)
    });
    let mut violations = 0u64;
    let mut worst: Option<(f64, Vec<f64>)> = None;
    for (gap, tol, f) in gaps {
        if gap > tol {
            violations += 1;
            if worst.as_ref().is_none_or(|w| gap / tol > w.0) {
                worst = Some((gap / tol, f));
            }
        }
    }
    let (witness, witness_gap) = match worst {
        Some((_, f)) => {
            let gap = b.expect(|x| f[(x - lo) as usize]) - a.expect(|x| f[(x - lo) as usize]);
            (Some((lo, f)), gap)
        }
        None => (None, 0.0),
    };
    Ok(SconvexValidation {
        result: OracleResult {
            value: violations as f64 / trials.max(1) as f64,
            method: OracleMethod::ExactEnumeration,
            cost: trials * len as u64,
        },
        violations,
        witness,
        witness_gap,
    })
}

/// Comonotone (quantile) coupling of `a` and `b` as `(x, y, mass)` triples.
pub fn quantile_coupling(a: &FiniteDist, b: &FiniteDist) -> Vec<(i64, i64, f64)> {
    let mut out = Vec::new();
    let mut ia = a.iter().filter(|(_, m)| *m > 0.0).peekable();
    let mut ib = b.iter().filter(|(_, m)| *m > 0.0).peekable();
    let (mut ra, mut rb) = (0.0, 0.0);
    while let (Some(&(x, ma)), Some(&(y, mb))) = (ia.peek(), ib.peek()) {
        let left_a = ma - ra;
        let left_b = mb - rb;
        let take = left_a.min(left_b);
        out.push((x, y, take));
        ra += take;
        rb += take;
        if left_a <= left_b {
            ia.next();
            ra = 0.0;
        }
        if left_b <= left_a {
            ib.next();
            rb = 0.0;
        }
    }
    out
}

/// Monte Carlo `d_TV(W, Po(λ))` for the birthday model.
///
/// The estimate is `0.5 Σ |p̂_k - π_k|`; its standard error is that of `P̂(A)`
/// on the maximising set `A = {k : p̂_k > π_k}`.
pub fn birthday_mc_tv(big_n: u32, m: u64, r: u64, seed: u64, samples: u64, exec: Exec) -> Result<OracleResult> {
    let b = birthday(big_n, m, r, BirthdayMode::MonteCarlo { seed, samples }, exec)?;
    let po = stationary_distribution(&RateSchedule::poisson(b.lambda), DEFAULT_TRUNCATION)?;
    let hat = make_dist(0, b.law.masses().to_vec())?;
    let value = tv_distance(&hat, &po);
    let pa: f64 = hat.iter().filter(|&(k, m)| m > po.pmf(k)).map(|(_, m)| m).sum();
    let stderr = (pa * (1.0 - pa) / samples as f64).sqrt().max(f64::MIN_POSITIVE);
    Ok(OracleResult { value, method: OracleMethod::MonteCarlo { seed, n: samples, stderr }, cost: samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::hypergeometric;
    use crate::orderings::check_scx_order;

    #[test]
    fn model_against_itself_is_zero() {
        let spec = ModelSpec::Hypergeometric { big_n: 8, m: 3, n: 4 };
        let r = exact_tv(&spec, &Target::Model { spec: spec.clone() }, Exec::Sequential).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.method.stderr(), 0.0);
    }

    #[test]
    fn binomial_against_pbd_under_two_p_squared() {
        let spec = ModelSpec::BernoulliSum { probs: vec![0.2; 20] };
        let r = exact_tv(&spec, &Target::Pbd { alpha: None, gamma: None }, Exec::Sequential).unwrap();
        assert!(r.value > 0.0 && r.value <= 0.08, "{}", r.value);
    }

    #[test]
    fn kruns_methods_agree() {
        let tp = Target::Tp { lambda: None, sigma2: None };
        let small = exact_tv(&ModelSpec::Kruns { n: 6, k: 2, p: 0.5 }, &tp, Exec::Sequential).unwrap();
        assert_eq!(small.method, OracleMethod::ExactEnumeration);
        assert!(small.value > 0.0 && small.value < 1.0);
        let law = crate::models::kruns_law(6, 2, 0.5).unwrap();
        let other = resolve_target(&ModelSpec::Kruns { n: 6, k: 2, p: 0.5 }, &law, &tp, Exec::Sequential).unwrap();
        assert!((tv_distance(&law, &other) - small.value).abs() < 1e-14);
        let big = exact_tv(&ModelSpec::Kruns { n: 30, k: 2, p: 0.5 }, &tp, Exec::Sequential).unwrap();
        assert_eq!(big.method, OracleMethod::TransferMap);
    }

    #[test]
    fn hypergeometric_joint_from_arrangements() {
        let spec = ModelSpec::Hypergeometric { big_n: 6, m: 3, n: 3 };
        let e = enumerate_joint(&spec, 0, JointMode::Complement, Exec::Sequential).unwrap();
        let total: f64 = e.table.given0.iter().chain(&e.table.given1).sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert!((e.mean_x - 0.5).abs() < 1e-14);
        let w = hypergeometric(6, 3, 3).unwrap().law;
        assert!(e.table.sum_law().unwrap().approx_eq(&w, 1e-14));
        // X_1 = 1 leaves Hyp(5, 2, 2) on the other two urns
        let given1 = e.table.conditional(1).unwrap();
        assert!((given1.pmf(2) - 0.1).abs() < 1e-14);
    }

    #[test]
    fn independent_tables_are_products() {
        let spec = ModelSpec::BernoulliSum { probs: vec![0.3, 0.6] };
        let e = enumerate_joint(&spec, 0, JointMode::Complement, Exec::Sequential).unwrap();
        assert_eq!(e.table.given1, vec![0.3 * 0.4, 0.3 * 0.6]);
    }

    #[test]
    fn kruns_neighbourhood_counts() {
        let spec = ModelSpec::Kruns { n: 6, k: 2, p: 0.5 };
        let e = enumerate_joint(&spec, 0, JointMode::Neighbourhood, Exec::Sequential).unwrap();
        // X_0 = ξ0ξ1; neighbours X_5 = ξ5ξ0 and X_1 = ξ1ξ2
        assert!((e.e_xy - 2.0 * 0.125).abs() < 1e-14);
        assert!((e.e_x_plus_y - 0.75).abs() < 1e-14);
        let seq = enumerate_all_joint(&spec, JointMode::Neighbourhood, Exec::Sequential).unwrap();
        let par = enumerate_all_joint(&spec, JointMode::Neighbourhood, Exec::Parallel).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn birthday_epsilon_by_enumeration() {
        let spec = ModelSpec::Birthday { big_n: 5, m: 3, r: 1 };
        let entries = enumerate_all_joint(&spec, JointMode::Neighbourhood, Exec::Sequential).unwrap();
        let eps: f64 = entries.iter().map(|e| e.e_xy).sum();
        let (_, _, _, neighbour) = crate::models::birthday_closed_forms(5, 3, 1).unwrap();
        assert!((eps - neighbour).abs() < 1e-12);
    }

    #[test]
    fn sconvex_validation_examples() {
        let a = make_dist(0, vec![0.2, 0.3, 0.5]).unwrap();
        for s in 1..4 {
            let v = random_sconvex_validation(&a, &a, s, 200, 1, Exec::Sequential).unwrap();
            assert_eq!(v.violations, 0);
        }
        let b = make_dist(0, vec![0.5, 0.3, 0.2]).unwrap();
        assert!(check_scx_order(&a, &b, 1).unwrap().holds);
        assert_eq!(random_sconvex_validation(&a, &b, 1, 1000, 2, Exec::Sequential).unwrap().violations, 0);
        let v = random_sconvex_validation(&b, &a, 1, 1000, 2, Exec::Sequential).unwrap();
        assert!(v.result.value > 0.0);
        assert!(v.witness.is_some() && v.witness_gap > 0.0);
    }

    #[test]
    fn quantile_coupling_marginals() {
        let a = FiniteDist::uniform(0, 4).unwrap();
        let b = make_dist(1, vec![0.5, 0.25, 0.25]).unwrap();
        let pairs = quantile_coupling(&a, &b);
        let total: f64 = pairs.iter().map(|t| t.2).sum();
        assert!((total - 1.0).abs() < 1e-14);
        for k in 0..5 {
            let ma: f64 = pairs.iter().filter(|t| t.0 == k).map(|t| t.2).sum();
            assert!((ma - 0.2).abs() < 1e-14);
        }
        let e: f64 = pairs.iter().map(|t| (t.1 - t.0).abs() as f64 * t.2).sum();
        assert!((e - crate::distcore::wasserstein_distance(&a, &b)).abs() < 1e-14);
    }

    #[test]
    fn mc_is_deterministic_across_exec() {
        let a = birthday_mc_tv(6, 10, 2, 9, 40_000, Exec::Sequential).unwrap();
        let b = birthday_mc_tv(6, 10, 2, 9, 40_000, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        assert!(a.method.stderr() > 0.0);
    }
}
