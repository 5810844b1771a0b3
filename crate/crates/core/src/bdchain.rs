//! Birth-death rate schedules, their equilibrium laws, the generator-type
//! Stein operator `Ag(j) = alpha_j g(j+1) - beta_j g(j)` and the solution
//! `f = Sh` of `h(j) - E h(pi) = Af(j)` normalised by `f(0) = 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distcore::{FiniteDist, COMPARE_TOL, DEFAULT_TRUNCATION};
use crate::error::{Error, Result};
use crate::exec::Exec;

/// Hard cap on explored states when computing an equilibrium law.
pub const STATE_CAP: usize = 1_000_000;

/// Consecutive non-decaying ratios tolerated before declaring divergence.
pub const DIVERGENCE_RUN: usize = 10_000;

/// Truncation used internally by the Stein solver so that the right-hand
/// recursion sees essentially all of the equilibrium mass.
const SOLVER_TRUNCATION: f64 = 1e-40;

/// States with equilibrium mass below this are left out of the solved range.
const SOLVER_MIN_MASS: f64 = 1e-16;

/// Birth and death rates of a chain on the nonnegative integers.
///
/// `Pbd` death rates are written in the falling-factorial basis,
/// `beta_j = sum_t death_poly[t] * j (j-1) ... (j-t)`, so that
/// `death_poly = [gamma, 1]` is `gamma j + j (j - 1)`. The leading coefficient
/// must be one (a monic `Q` in `beta_j = j Q(j)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateSchedule {
    Poisson { lambda: f64 },
    NegativeBinomial { r: f64, q: f64 },
    Binomial { n: u64, p: f64 },
    Geometric { q: f64 },
    Pbd { alpha: f64, death_poly: Vec<f64> },
    Custom { birth: Vec<f64>, death: Vec<f64> },
}

fn falling(j: i64, t: usize) -> f64 {
    (0..=t as i64).map(|i| (j - i) as f64).product()
}

impl RateSchedule {
    pub fn poisson(lambda: f64) -> Self {
        RateSchedule::Poisson { lambda }
    }

    pub fn geometric(q: f64) -> Self {
        RateSchedule::Geometric { q }
    }

    pub fn binomial(n: u64, p: f64) -> Self {
        RateSchedule::Binomial { n, p }
    }

    pub fn negative_binomial(r: f64, q: f64) -> Self {
        RateSchedule::NegativeBinomial { r, q }
    }

    /// Constant birth `alpha`, death `gamma j + j (j - 1)`.
    pub fn pbd2(alpha: f64, gamma: f64) -> Self {
        RateSchedule::Pbd { alpha, death_poly: vec![gamma, 1.0] }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::arg(format!("{msg}: {self:?}")));
        match self {
            RateSchedule::Poisson { lambda } if !(*lambda > 0.0) || !lambda.is_finite() => bad("lambda must be positive"),
            RateSchedule::NegativeBinomial { r, q } if !(*r > 0.0) || !(0.0..1.0).contains(q) || *q == 0.0 => {
                bad("need r > 0 and 0 < q < 1")
            }
            RateSchedule::Binomial { n, p } if *n == 0 || !(0.0..=1.0).contains(p) || *p == 0.0 || *p == 1.0 => {
                bad("need n >= 1 and 0 < p < 1")
            }
            RateSchedule::Geometric { q } if !(*q > 0.0 && *q < 1.0) => bad("need 0 < q < 1"),
            RateSchedule::Pbd { alpha, death_poly } => {
                if !(*alpha > 0.0) {
                    return bad("alpha must be positive");
                }
                if death_poly.last() != Some(&1.0) {
                    return bad("death polynomial must be monic");
                }
                Ok(())
            }
            RateSchedule::Custom { birth, death } => {
                if birth.iter().chain(death).any(|&x| !(x >= 0.0)) {
                    return bad("rates must be nonnegative");
                }
                if death.first().is_some_and(|&d| d != 0.0) {
                    return bad("death rate at 0 must vanish");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Birth rate `alpha_j`.
    pub fn birth(&self, j: i64) -> f64 {
        if j < 0 {
            return 0.0;
        }
        match self {
            RateSchedule::Poisson { lambda } => *lambda,
            RateSchedule::NegativeBinomial { r, q } => q * (r + j as f64),
            RateSchedule::Binomial { n, p } => (*n as i64 - j).max(0) as f64 * p,
            RateSchedule::Geometric { q } => *q,
            RateSchedule::Pbd { alpha, .. } => *alpha,
            RateSchedule::Custom { birth, .. } => birth.get(j as usize).copied().unwrap_or(0.0),
        }
    }

    /// Death rate `beta_j`; always zero at `j = 0`.
    pub fn death(&self, j: i64) -> f64 {
        if j <= 0 {
            return 0.0;
        }
        match self {
            RateSchedule::Poisson { .. } | RateSchedule::NegativeBinomial { .. } => j as f64,
            RateSchedule::Binomial { p, .. } => (1.0 - p) * j as f64,
            RateSchedule::Geometric { .. } => 1.0,
            RateSchedule::Pbd { death_poly, .. } => {
                death_poly.iter().enumerate().map(|(t, c)| c * falling(j, t)).sum()
            }
            RateSchedule::Custom { death, .. } => death.get(j as usize).copied().unwrap_or(0.0),
        }
    }

    /// Human-readable kind tag.
    pub fn kind_name(&self) -> &'static str {
        match self {
            RateSchedule::Poisson { .. } => "poisson",
            RateSchedule::NegativeBinomial { .. } => "negative_binomial",
            RateSchedule::Binomial { .. } => "binomial",
            RateSchedule::Geometric { .. } => "geometric",
            RateSchedule::Pbd { .. } => "pbd",
            RateSchedule::Custom { .. } => "custom",
        }
    }

    /// Upper bound on `alpha_{j} / beta_{j+1}` for every `j` at or beyond the
    /// argument, for kinds with unbounded support.
    fn ratio_sup_from(&self, j: i64) -> f64 {
        let here = self.birth(j) / self.death(j + 1);
        let limit = match self {
            RateSchedule::NegativeBinomial { q, .. } | RateSchedule::Geometric { q } => *q,
            _ => 0.0,
        };
        here.max(limit)
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Equilibrium law by detailed balance, `pi_j ∝ prod_{k=1..j} alpha_{k-1} / beta_k`,
/// truncated on the right once the remaining mass is at most `tol`.
pub fn stationary_distribution(r: &RateSchedule, tol: f64) -> Result<FiniteDist> {
    r.validate()?;
    let mut logs = vec![0.0f64];
    let mut log_z = 0.0f64;
    let mut rising_run = 0usize;
    let mut j: i64 = 1;
    let log_tail;
    loop {
        let a = r.birth(j - 1);
        if a == 0.0 {
            log_tail = f64::NEG_INFINITY;
            break;
        }
        let b = r.death(j);
        if !(b > 0.0) {
            return Err(Error::arg(format!("death rate vanishes at state {j} with positive birth rate")));
        }
        let ratio = a / b;
        let l = logs[logs.len() - 1] + ratio.ln();
        logs.push(l);
        log_z = log_add(log_z, l);
        rising_run = if ratio >= 1.0 { rising_run + 1 } else { 0 };
        if rising_run >= DIVERGENCE_RUN || logs.len() > STATE_CAP {
            return Err(Error::Divergence { states: logs.len() });
        }
        if let RateSchedule::Custom { .. } = r {
            j += 1;
            continue;
        }
        let sup = r.ratio_sup_from(j);
        if sup < 1.0 {
            // remaining mass <= u_j * sup / (1 - sup)
            let lt = l + sup.ln() - (-sup).ln_1p();
            if sup == 0.0 || lt - log_add(log_z, lt) <= tol.ln() {
                log_tail = if sup == 0.0 { f64::NEG_INFINITY } else { lt };
                break;
            }
        }
        j += 1;
    }
    let log_total = log_add(log_z, log_tail);
    let masses: Vec<f64> = logs.iter().map(|l| (l - log_total).exp()).collect();
    let tail = (log_tail - log_total).exp();
    if tail > 0.0 {
        FiniteDist::with_tail(0, masses, tail)
    } else {
        FiniteDist::new(0, masses)
    }
}

/// `(Ag)(j) = alpha_j g(j+1) - beta_j g(j)` for `j = 0..=N`, given `g` on `0..=N+1`.
pub fn apply_stein_operator(r: &RateSchedule, g: &[f64]) -> Vec<f64> {
    (0..g.len().saturating_sub(1))
        .map(|j| r.birth(j as i64) * g[j + 1] - r.death(j as i64) * g[j])
        .collect()
}

/// Indicator test function of a set of states.
pub fn indicator(set: &[i64]) -> impl Fn(i64) -> f64 + '_ {
    move |j| if set.contains(&j) { 1.0 } else { 0.0 }
}

/// Solution of the Stein equation on a solved range `0..=last`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteinSolution {
    /// `f(0..=last)`, with `f(0) = 0`.
    pub values: Vec<f64>,
    /// `Δf(0..last)`.
    pub differences: Vec<f64>,
    /// Test function on the states where the equation is imposed.
    pub h: Vec<f64>,
    /// `E h(pi)`.
    pub eh: f64,
    /// Largest `|α_j f(j+1) - β_j f(j) - h(j) + E h(π)|` over imposed states.
    pub residual: f64,
}

impl SteinSolution {
    /// `sup_j |Δ^order f(j)|` over the solved range (`order = 0` is `sup |f|`).
    pub fn delta_sup_norm(&self, order: usize) -> f64 {
        let mut d = self.values.clone();
        for _ in 0..order {
            d = d.windows(2).map(|w| w[1] - w[0]).collect();
        }
        d.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

/// Caches the equilibrium law of a schedule for repeated Stein solves.
#[derive(Debug, Clone)]
pub struct SteinSolver {
    schedule: RateSchedule,
    pi: Vec<f64>,
    cdf: Vec<f64>,
    /// Number of states on which the equation is imposed.
    imposed: usize,
    finite: bool,
}

impl SteinSolver {
    pub fn new(schedule: &RateSchedule) -> Result<Self> {
        let law = stationary_distribution(schedule, SOLVER_TRUNCATION)?;
        let pi = law.masses().to_vec();
        let finite = law.tail_mass() == 0.0 && schedule.birth(law.max_support()) == 0.0;
        let imposed = if finite {
            pi.len()
        } else {
            pi.iter().rposition(|&m| m >= SOLVER_MIN_MASS).map_or(1, |i| i + 1)
        };
        for j in 0..imposed.saturating_sub(1) {
            if schedule.birth(j as i64) == 0.0 {
                return Err(Error::SingularRate { state: j as i64 });
            }
        }
        let cdf = pi
            .iter()
            .scan(0.0, |acc, &m| {
                *acc += m;
                Some(*acc)
            })
            .collect();
        Ok(Self { schedule: schedule.clone(), pi, cdf, imposed, finite })
    }

    pub fn schedule(&self) -> &RateSchedule {
        &self.schedule
    }

    /// States `0..imposed` where the Stein equation is imposed.
    pub fn imposed_states(&self) -> usize {
        self.imposed
    }

    pub fn solve(&self, h: impl Fn(i64) -> f64) -> SteinSolution {
        let n = self.pi.len();
        let table: Vec<f64> = (0..n as i64).map(&h).collect();
        let eh: f64 = table.iter().zip(&self.pi).map(|(a, b)| a * b).sum();
        let centred: Vec<f64> = table.iter().zip(&self.pi).map(|(a, b)| (a - eh) * b).collect();
        // suffix[j] = sum_{k >= j} centred[k], accumulated from the far tail
        let mut suffix = vec![0.0; n + 1];
        for k in (0..n).rev() {
            suffix[k] = suffix[k + 1] + centred[k];
        }
        let steps = if self.finite { n - 1 } else { self.imposed };
        let mut values = vec![0.0; steps + 1];
        let mut left = 0.0;
        for j in 0..steps {
            left += centred[j];
            let a = self.schedule.birth(j as i64);
            // both sides are the same sum; pick the one away from cancellation
            let num = if self.cdf[j] <= 0.5 { left } else { -suffix[j + 1] };
            values[j + 1] = num / (a * self.pi[j]);
        }
        let imposed = self.imposed.min(values.len());
        let residual = (0..imposed)
            .map(|j| {
                let a = self.schedule.birth(j as i64);
                let up = if a == 0.0 { 0.0 } else { a * values[j + 1] };
                (up - self.schedule.death(j as i64) * values[j] - table[j] + eh).abs()
            })
            .fold(0.0, f64::max);
        let differences = values.windows(2).map(|w| w[1] - w[0]).collect();
        SteinSolution { values, differences, h: table[..imposed].to_vec(), eh, residual }
    }
}

/// Solve the Stein equation with the default solver truncation.
pub fn solve_stein_equation(r: &RateSchedule, h: impl Fn(i64) -> f64) -> Result<SteinSolution> {
    Ok(SteinSolver::new(r)?.solve(h))
}

/// Which norm of the Stein solution a constant refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormOrder {
    /// `sup |Sh|`.
    SupF,
    /// `sup |Δ^s Sh|`, `s >= 1`.
    Delta(u32),
}

/// `min(1, sqrt(2 / (e λ)))`.
pub fn d_lambda(lambda: f64) -> f64 {
    (2.0 / (std::f64::consts::E * lambda)).sqrt().min(1.0)
}

/// Analytic Stein-factor constants for indicator test functions.
///
/// Higher differences use `‖Δ^s Sh‖ <= 2^{s-1} ‖ΔSh‖`.
pub fn stein_norm_constant(r: &RateSchedule, order: NormOrder) -> Result<f64> {
    r.validate()?;
    let none = || Error::NoAnalyticConstant(format!("{} ({order:?})", r.kind_name()));
    let first = match (r, order) {
        (RateSchedule::Poisson { lambda }, NormOrder::SupF) => return Ok(d_lambda(*lambda)),
        (_, NormOrder::SupF) => return Err(none()),
        (_, NormOrder::Delta(0)) => return Err(Error::arg("difference order must be >= 1")),
        (RateSchedule::Poisson { lambda }, _) => (1.0 - (-lambda).exp()) / lambda,
        (RateSchedule::Geometric { q }, _) => 1.0 / (1.0 - q),
        (RateSchedule::Pbd { alpha, .. }, _) => 1.0 / alpha,
        _ => return Err(none()),
    };
    let NormOrder::Delta(s) = order else { unreachable!() };
    Ok(first * 2f64.powi(s as i32 - 1))
}

/// Result of a randomised search over indicator test functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalNorm {
    pub value: f64,
    /// Trial index attaining the maximum.
    pub argmax_trial: usize,
    pub trials: usize,
    pub max_residual: f64,
    pub analytic: Option<f64>,
    /// `value <= analytic (1 + 1e-12)` when an analytic constant exists.
    pub within_analytic: Option<bool>,
}

/// Random indicator set for trial `trial`; the density is itself random so
/// both sparse and dense sets are visited.
pub fn random_indicator_set(states: usize, seed: u64, trial: u64) -> Vec<i64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let density: f64 = rng.random();
    (0..states as i64).filter(|_| rng.random::<f64>() < density).collect()
}

/// Largest norm of `S I_B` over `trials` random sets `B`. Per-trial seeds are
/// derived from `(seed, trial)`, so the maximum is the same for every `exec`.
pub fn empirical_sup_norm(
    r: &RateSchedule,
    order: NormOrder,
    trials: usize,
    seed: u64,
    exec: Exec,
) -> Result<EmpiricalNorm> {
    if trials == 0 {
        return Err(Error::arg("trials must be >= 1"));
    }
    let solver = SteinSolver::new(r)?;
    let states = solver.imposed_states();
    let per_trial = exec.map(trials, |t| {
        let set = random_indicator_set(states, seed, t as u64);
        let sol = solver.solve(indicator(&set));
        let norm = match order {
            NormOrder::SupF => sol.delta_sup_norm(0),
            NormOrder::Delta(s) => sol.delta_sup_norm(s as usize),
        };
        (norm, sol.residual)
    });
    let (argmax_trial, value) = per_trial
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &(v, _))| if v > best.1 { (i, v) } else { best });
    let max_residual = per_trial.iter().map(|p| p.1).fold(0.0, f64::max);
    let analytic = stein_norm_constant(r, order).ok();
    Ok(EmpiricalNorm {
        value,
        argmax_trial,
        trials,
        max_residual,
        analytic,
        within_analytic: analytic.map(|c| value <= c * (1.0 + COMPARE_TOL)),
    })
}

/// `stationary_distribution` with the default truncation.
pub fn equilibrium(r: &RateSchedule) -> Result<FiniteDist> {
    stationary_distribution(r, DEFAULT_TRUNCATION)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson_pmf(lambda: f64, k: u32) -> f64 {
        let mut p = (-lambda).exp();
        for i in 1..=k {
            p *= lambda / i as f64;
        }
        p
    }

    #[test]
    fn poisson_equilibrium() {
        let pi = equilibrium(&RateSchedule::poisson(2.0)).unwrap();
        assert!((pi.pmf(0) - (-2.0f64).exp()).abs() < 1e-15);
        for k in 0..20 {
            assert!((pi.pmf(k) - poisson_pmf(2.0, k as u32)).abs() < 1e-15);
        }
        assert!(pi.tail_mass() <= 1e-15);
    }

    #[test]
    fn geometric_equilibrium() {
        let pi = equilibrium(&RateSchedule::geometric(0.3)).unwrap();
        for k in 0..15 {
            assert!((pi.pmf(k) - 0.7 * 0.3f64.powi(k as i32)).abs() < 1e-15, "k={k}");
        }
        assert!(pi.tail_mass() <= 1e-15 && pi.tail_mass() > 0.0);
    }

    #[test]
    fn binomial_equilibrium() {
        let pi = equilibrium(&RateSchedule::binomial(4, 0.25)).unwrap();
        let expect = [81.0, 108.0, 54.0, 12.0, 1.0].map(|x| x / 256.0);
        assert_eq!(pi.max_support(), 4);
        for (k, e) in expect.iter().enumerate() {
            assert!((pi.pmf(k as i64) - e).abs() < 1e-15);
        }
        assert_eq!(pi.tail_mass(), 0.0);
    }

    #[test]
    fn negative_binomial_equilibrium() {
        // NB(r, 1-q): P(j) = C(r+j-1, j) (1-q)^r q^j
        let pi = equilibrium(&RateSchedule::negative_binomial(3.0, 0.4)).unwrap();
        let mut p = 0.6f64.powi(3);
        for j in 0..20 {
            assert!((pi.pmf(j) - p).abs() < 1e-14);
            p *= 0.4 * (3.0 + j as f64) / (j as f64 + 1.0);
        }
    }

    #[test]
    fn divergence_detected() {
        let r = RateSchedule::Custom { birth: vec![], death: vec![] };
        assert!(r.validate().is_ok());
        let up = RateSchedule::NegativeBinomial { r: 2.0, q: 1.0 };
        assert!(up.validate().is_err());
        // birth rate 2, death 1: geometric growth
        let mut birth = vec![2.0; 20_000];
        birth.push(0.0);
        let mut death = vec![1.0; 20_001];
        death[0] = 0.0;
        let r = RateSchedule::Custom { birth, death };
        assert!(matches!(stationary_distribution(&r, 1e-15), Err(Error::Divergence { .. })));
    }

    #[test]
    fn operator_on_constants() {
        let r = RateSchedule::poisson(3.0);
        let a = apply_stein_operator(&r, &[2.0; 6]);
        for (j, v) in a.iter().enumerate() {
            assert!((v - 2.0 * (3.0 - j as f64)).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_h_gives_zero_solution() {
        let sol = solve_stein_equation(&RateSchedule::poisson(4.0), |_| 0.7).unwrap();
        assert!(sol.values.iter().all(|v| v.abs() < 1e-14));
        assert_eq!(sol.values[0], 0.0);
    }

    #[test]
    fn poisson_point_zero_factor() {
        let sol = solve_stein_equation(&RateSchedule::poisson(1.0), indicator(&[0])).unwrap();
        assert!(sol.residual <= 1e-10);
        let c = stein_norm_constant(&RateSchedule::poisson(1.0), NormOrder::Delta(1)).unwrap();
        assert!(sol.delta_sup_norm(1) <= c * (1.0 + COMPARE_TOL));
        assert!((c - 0.632_120_558_828_557_7).abs() < 1e-15);
    }

    #[test]
    fn binomial_endpoint_is_not_divided() {
        let r = RateSchedule::binomial(4, 0.25);
        let sol = solve_stein_equation(&r, indicator(&[1, 3])).unwrap();
        assert_eq!(sol.values.len(), 5);
        assert!(sol.residual <= 1e-12);
    }

    #[test]
    fn constants() {
        let c = stein_norm_constant(&RateSchedule::pbd2(220.5, 39.2), NormOrder::Delta(1)).unwrap();
        assert_eq!(c, 1.0 / 220.5);
        let c2 = stein_norm_constant(&RateSchedule::pbd2(220.5, 39.2), NormOrder::Delta(3)).unwrap();
        assert_eq!(c2, 4.0 / 220.5);
        let d = stein_norm_constant(&RateSchedule::poisson(2.0), NormOrder::SupF).unwrap();
        assert!((d - (-0.5f64).exp()).abs() < 1e-15);
        assert!(matches!(
            stein_norm_constant(&RateSchedule::binomial(4, 0.3), NormOrder::Delta(1)),
            Err(Error::NoAnalyticConstant(_))
        ));
    }

    #[test]
    fn pbd_death_rates_in_falling_basis() {
        let r = RateSchedule::pbd2(10.0, 2.5);
        for j in 0..10i64 {
            let expect = 2.5 * j as f64 + (j * (j - 1)) as f64;
            assert!((r.death(j) - expect).abs() < 1e-12);
        }
    }
}
