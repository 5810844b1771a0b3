//! Explicit error bounds, each returned as a [`BoundReport`] with its additive
//! terms and the status of every hypothesis it rests on.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bdchain::{d_lambda, stein_norm_constant, NormOrder, RateSchedule};
use crate::distcore::{
    bernoulli_thin, binom, factorial_binomial_moment, shift, size_bias, tv_distance, wasserstein_distance, FiniteDist,
};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::models::{
    bose_einstein, hypergeometric, hypergeometric_conditional_laws, independent_bernoulli_sum, kruns_conditional_laws,
    kruns_law, kruns_moments, mixed_poisson, pbd_match_closed_form, pbd_match_linear, tp_params, BernoulliProfile,
};
use crate::orderings::{
    birth_death_biased, check_alnd, check_alpd, check_conditional_order, check_scx_order, check_st_order, check_tnd,
    check_tpd, karlin_novikoff_check, ConditionalMode, DependenceAggregates, DependenceCertificate, Direction,
    AS_REL_TOL,
};

/// Names accepted by [`BoundReport::name`].
pub const REGISTRY: &[&str] = &[
    "first-order",
    "s-order",
    "s-order-matched",
    "katz-pbd",
    "binomial-pbd",
    "bose-einstein-geometric",
    "mixed-poisson",
    "wasserstein-order",
    "poisson-tnd",
    "poisson-tpd",
    "poisson-alnd",
    "poisson-alpd",
    "birthday",
    "tp-negrel",
    "tp-posrel",
    "tp-independent",
    "tp-hypergeometric",
    "tp-kruns",
    "pbd-smoothing",
    "pbd-newbound",
    "pbd-brown-xia",
];

/// Largest indicator count for which exact-law side checks are attempted.
const SIDE_CHECK_MAX_N: u64 = 2_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisStatus {
    Verified,
    Assumed,
    Failed,
}

impl HypothesisStatus {
    pub fn from_check(ok: bool) -> Self {
        if ok {
            HypothesisStatus::Verified
        } else {
            HypothesisStatus::Failed
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub name: String,
    pub status: HypothesisStatus,
}

impl Hypothesis {
    pub fn new(name: impl Into<String>, status: HypothesisStatus) -> Self {
        Self { name: name.into(), status }
    }
}

/// A bound value with its breakdown. `value` is the sum of `terms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub value: f64,
    pub terms: BTreeMap<String, f64>,
    pub hypotheses: Vec<Hypothesis>,
    pub params: BTreeMap<String, Value>,
    /// Every hypothesis was verified.
    pub certifying: bool,
}

impl BoundReport {
    fn new(name: &str) -> Self {
        debug_assert!(REGISTRY.contains(&name));
        Self {
            name: name.into(),
            value: 0.0,
            terms: BTreeMap::new(),
            hypotheses: Vec::new(),
            params: BTreeMap::new(),
            certifying: true,
        }
    }

    fn term(mut self, key: &str, v: f64) -> Self {
        self.terms.insert(key.into(), v);
        self
    }

    fn hyp(mut self, name: &str, status: HypothesisStatus) -> Self {
        self.hypotheses.push(Hypothesis::new(name, status));
        self
    }

    fn param(mut self, key: &str, v: impl Serialize) -> Self {
        self.params.insert(key.into(), serde_json::to_value(v).unwrap_or(Value::Null));
        self
    }

    fn finish(mut self) -> Self {
        self.value = self.terms.values().sum();
        self.certifying = self.hypotheses.iter().all(|h| h.status == HypothesisStatus::Verified);
        self
    }

    pub fn any_failed(&self) -> bool {
        self.hypotheses.iter().any(|h| h.status == HypothesisStatus::Failed)
    }
}

/// `(1 - e^{-λ})/λ`.
pub fn poisson_delta_constant(lambda: f64) -> f64 {
    (1.0 - (-lambda).exp()) / lambda
}

/// `c_λ = (λ+1)(1 - e^{-λ})/λ + 2 d_λ`.
pub fn c_lambda(lambda: f64) -> f64 {
    (lambda + 1.0) * poisson_delta_constant(lambda) + 2.0 * d_lambda(lambda)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= AS_REL_TOL * a.abs().max(b.abs()).max(1e-300)
}

/// First-order bound `norm · |E[α_W (W+1) - β_W W]|`, valid when `W_α` and
/// `W_β` are stochastically ordered in the same direction as `α` and `β`.
pub fn bound_first_order(w: &FiniteDist, r: &RateSchedule, norm: f64) -> Result<BoundReport> {
    first_order_named("first-order", w, r, norm)
}

fn first_order_named(name: &str, w: &FiniteDist, r: &RateSchedule, norm: f64) -> Result<BoundReport> {
    if !(norm >= 0.0) {
        return Err(Error::arg("norm must be nonnegative"));
    }
    let (wa, alpha, wb, beta) = birth_death_biased(w, r)?;
    let up = check_st_order(&wa, &wb);
    let down = check_st_order(&wb, &wa);
    let case_i = up.holds && alpha >= beta * (1.0 - AS_REL_TOL);
    let case_ii = down.holds && beta >= alpha * (1.0 - AS_REL_TOL);
    let drift = w.expect(|j| r.birth(j) * (j + 1) as f64 - r.death(j) * j as f64);
    Ok(BoundReport::new(name)
        .term("main", norm * drift.abs())
        .hyp("W_alpha and W_beta st-ordered with matching means", HypothesisStatus::from_check(case_i || case_ii))
        .param("norm", norm)
        .param("alpha", alpha)
        .param("beta", beta)
        .param("drift", drift)
        .finish())
}

/// Inputs of the `s`-order bound.
#[derive(Debug, Clone)]
pub struct SOrderInputs<'a> {
    pub w_alpha: &'a FiniteDist,
    pub w_beta: &'a FiniteDist,
    pub w_beta_minus_y: &'a FiniteDist,
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
    pub s: u32,
    /// Bounds on `sup |Δ^t Sh|` for `t = 0..=s`.
    pub norms: &'a [f64],
}

/// `s`-order bound: `Σ_{t<s} |Δ^t Sh(0)| |α E C^t(W_α) - β E C^t(W_β)|` plus
/// `‖Δ^s Sh‖ (S1 + S2 + S3)`. The `t = 0` term vanishes since `Sh(0) = 0`.
///
/// `S1 = α (E C^s(W_α) - p E C^s(W_β - Y))` is nonnegative under the order
/// hypothesis; when that hypothesis fails its absolute value is used.
pub fn bound_s_order(inp: &SOrderInputs<'_>) -> Result<BoundReport> {
    let s = inp.s;
    if s < 1 {
        return Err(Error::arg("s must be >= 1"));
    }
    if inp.norms.len() < s as usize + 1 {
        return Err(Error::arg(format!("need {} norms, got {}", s + 1, inp.norms.len())));
    }
    let thinned = bernoulli_thin(inp.w_beta_minus_y, inp.p)?;
    let order = check_scx_order(inp.w_alpha, &thinned, s)?;
    let coupling = check_st_order(inp.w_beta, inp.w_beta_minus_y);
    let nonneg = inp.w_beta_minus_y.min_support() >= 0;

    let mut report = BoundReport::new("s-order");
    report = report.term("t0", 0.0);
    for t in 1..s {
        let gap = inp.alpha * factorial_binomial_moment(inp.w_alpha, t)
            - inp.beta * factorial_binomial_moment(inp.w_beta, t);
        report = report.term(&format!("t{t}"), inp.norms[t as usize] * gap.abs());
    }
    let (a, p, b) = (inp.alpha, inp.p, inp.beta);
    let ca = factorial_binomial_moment(inp.w_alpha, s);
    let cy = factorial_binomial_moment(inp.w_beta_minus_y, s);
    let cb = factorial_binomial_moment(inp.w_beta, s);
    let ns = inp.norms[s as usize];
    let s1 = a * (ca - p * cy);
    Ok(report
        .term("S1", ns * s1.abs())
        .term("S2", ns * a * p * (cb - cy))
        .term("S3", ns * (a * p - b).abs() * cb)
        .hyp("W_alpha dominates v_p(W_beta - Y) in s-convex order", HypothesisStatus::from_check(order.holds))
        .hyp("W_beta - Y below W_beta", HypothesisStatus::from_check(coupling.holds && nonneg))
        .param("s", s)
        .param("p", p)
        .param("alpha", a)
        .param("beta", b)
        .finish())
}

/// Matched `s`-order bound `‖Δ^s Sh‖ |E[α_W C(W+1, s)] - E[β_W C(W, s)]|`,
/// valid when `α = β` and `W_α`, `W_β` are `s`-convex ordered.
pub fn bound_s_order_matched(w: &FiniteDist, r: &RateSchedule, s: u32, norm: f64) -> Result<BoundReport> {
    s_order_matched_named("s-order-matched", w, r, s, norm)
}

fn s_order_matched_named(name: &str, w: &FiniteDist, r: &RateSchedule, s: u32, norm: f64) -> Result<BoundReport> {
    if s < 1 {
        return Err(Error::arg("s must be >= 1"));
    }
    let (wa, alpha, wb, beta) = birth_death_biased(w, r)?;
    let order = check_scx_order(&wa, &wb, s)?;
    let gap = w.expect(|j| r.birth(j) * binom(j + 1, s) - r.death(j) * binom(j, s));
    Ok(BoundReport::new(name)
        .term("main", norm * gap.abs())
        .hyp("alpha = beta", HypothesisStatus::from_check(close(alpha, beta)))
        .hyp("W_alpha, W_beta s-convex ordered", HypothesisStatus::from_check(order.direction != Direction::Incomparable))
        .param("s", s)
        .param("norm", norm)
        .param("alpha", alpha)
        .param("beta", beta)
        .param("direction", order.direction)
        .finish())
}

/// Katz law against the constant-birth PBD matching `(A_l)`:
/// `2^{l-1} α^{-1} |E[α C(W+1, l) - W Q(W) C(W, l)]|`.
pub fn bound_katz_pbd(w: &FiniteDist, l: u32) -> Result<BoundReport> {
    let matched = pbd_match_linear(w, l)?;
    let schedule = matched.schedule();
    let norm = stein_norm_constant(&schedule, NormOrder::Delta(l))?;
    let mut report = s_order_matched_named("katz-pbd", w, &schedule, l, norm)?;
    let residual_ok = matched.residuals.as_ref().is_some_and(|r| r.iter().all(|x| *x <= AS_REL_TOL));
    let kn = karlin_novikoff_check(w, &schedule, l);
    report.hypotheses.push(Hypothesis::new("condition A_l", HypothesisStatus::from_check(residual_ok)));
    report.hypotheses.push(Hypothesis::new("at most l sign changes", HypothesisStatus::from_check(kn.holds)));
    report.hypotheses.push(Hypothesis::new("PBD Stein factor 1/alpha", HypothesisStatus::Assumed));
    Ok(report.param("l", l).param("death_poly", &matched.death_poly).finish())
}

/// `Bin(n, p)` against the matched two-parameter PBD: `2p²`. The general
/// Katz bound is evaluated alongside for moderate `n`.
pub fn bound_binomial_pbd(n: u64, p: f64) -> Result<BoundReport> {
    let profile = BernoulliProfile::homogeneous(n, p)?;
    let matched = pbd_match_closed_form(&profile)?;
    let mut report = BoundReport::new("binomial-pbd")
        .term("main", 2.0 * p * p)
        .param("n", n)
        .param("p", p)
        .param("alpha", matched.alpha)
        .param("gamma", matched.gamma());
    if n <= SIDE_CHECK_MAX_N {
        let katz = bound_katz_pbd(&independent_bernoulli_sum(&profile)?, 2)?;
        report = report.param("katz_value", katz.value);
        report.hypotheses = katz.hypotheses;
    } else {
        report = report.hyp("condition A_2", HypothesisStatus::Assumed).hyp("PBD Stein factor 1/alpha", HypothesisStatus::Assumed);
    }
    Ok(report.finish())
}

/// Bose–Einstein occupancy against the geometric law with `p = (d-1)/(d+m-1)`;
/// evaluates to `m / (d (d - 1))`.
pub fn bound_bose_einstein(m: u64, d: u64) -> Result<BoundReport> {
    let (w, q) = bose_einstein(m, d)?;
    let schedule = RateSchedule::geometric(q);
    let norm = stein_norm_constant(&schedule, NormOrder::Delta(1))?;
    let report = first_order_named("bose-einstein-geometric", &w, &schedule, norm)?;
    let closed = m as f64 / (d as f64 * (d as f64 - 1.0));
    Ok(report.param("m", m).param("d", d).param("q", q).param("closed_form", closed).finish())
}

/// Mixed Poisson law against `Po(E ξ)`; evaluates to `(1 - e^{-λ}) Var ξ / λ`.
pub fn bound_mixed_poisson(atoms: &[(f64, f64)]) -> Result<BoundReport> {
    let (w, lambda, var_xi) = mixed_poisson(atoms, crate::distcore::DEFAULT_TRUNCATION)?;
    let schedule = RateSchedule::poisson(lambda);
    let norm = stein_norm_constant(&schedule, NormOrder::Delta(1))?;
    let report = first_order_named("mixed-poisson", &w, &schedule, norm)?;
    Ok(report.param("lambda", lambda).param("var_xi", var_xi).finish())
}

/// Ordering bound `a E C^s(X) - 2ap E C^s(Z-Y) + (ap + |ap - b|) E C^s(Z)`
/// on `Σ_k |a E C^{s-1}(X-k-1) - b E C^{s-1}(Z-k-1)|`; for `s = p = a = b = 1`
/// this is `2 EY + EX - EZ`, an upper bound on `d_W(X, Z)`.
pub fn wasserstein_order_bound(
    x: &FiniteDist,
    z: &FiniteDist,
    z_minus_y: &FiniteDist,
    a: f64,
    b: f64,
    p: f64,
    s: u32,
) -> Result<BoundReport> {
    if s < 1 {
        return Err(Error::arg("s must be >= 1"));
    }
    let order = check_scx_order(x, &bernoulli_thin(z_minus_y, p)?, s)?;
    let below = check_st_order(z, z_minus_y).holds && z_minus_y.min_support() >= 0;
    let (cx, cy, cz) =
        (factorial_binomial_moment(x, s), factorial_binomial_moment(z_minus_y, s), factorial_binomial_moment(z, s));
    let mut report = BoundReport::new("wasserstein-order")
        .term("S1", (a * (cx - p * cy)).abs())
        .term("S2", a * p * (cz - cy))
        .term("S3", (a * p - b).abs() * cz)
        .hyp("X dominates v_p(Z - Y) in s-convex order", HypothesisStatus::from_check(order.holds))
        .hyp("Z - Y >= 0 below Z", HypothesisStatus::from_check(below))
        .param("a", a)
        .param("b", b)
        .param("p", p)
        .param("s", s)
        .param("y_mean", z.mean() - z_minus_y.mean());
    if s == 1 && a == 1.0 && b == 1.0 && p == 1.0 {
        report = report.param("wasserstein", wasserstein_distance(x, z));
    }
    Ok(report.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoissonSumKind {
    Tnd,
    Tpd,
    Alnd,
    Alpd,
}

/// Moment inputs of the Poisson bounds for sums of indicators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonSumInputs {
    pub lambda: f64,
    pub mean: f64,
    pub variance: f64,
    /// `Σ p_i²`, used by the TPD bound.
    pub lambda2: f64,
    pub aggregates: Option<DependenceAggregates>,
    /// Status of the dependence condition.
    pub dependence: HypothesisStatus,
}

/// Status of a dependence condition checked on a certificate.
pub fn dependence_status(kind: PoissonSumKind, cert: &DependenceCertificate) -> Result<HypothesisStatus> {
    let report = match kind {
        PoissonSumKind::Tnd => check_tnd(cert)?,
        PoissonSumKind::Tpd => check_tpd(cert)?,
        PoissonSumKind::Alnd => check_alnd(cert)?,
        PoissonSumKind::Alpd => check_alpd(cert)?,
    };
    Ok(HypothesisStatus::from_check(report.holds))
}

/// Poisson approximation of a sum of indicators:
/// TND `c((λ+1) EW - E W²)`, TPD `c(E W² + 2λ_2 - λ(λ+1))`,
/// ALND/ALPD `c(|Var W - λ| + 2ε) + c_λ |δ - λ|` (ALPD with `ε_*`),
/// where `c = (1 - e^{-λ})/λ`.
pub fn poisson_sum_bound(kind: PoissonSumKind, inp: &PoissonSumInputs) -> Result<BoundReport> {
    poisson_sum_named(
        match kind {
            PoissonSumKind::Tnd => "poisson-tnd",
            PoissonSumKind::Tpd => "poisson-tpd",
            PoissonSumKind::Alnd => "poisson-alnd",
            PoissonSumKind::Alpd => "poisson-alpd",
        },
        kind,
        inp,
    )
}

fn poisson_sum_named(name: &str, kind: PoissonSumKind, inp: &PoissonSumInputs) -> Result<BoundReport> {
    let lambda = inp.lambda;
    if !(lambda > 0.0) {
        return Err(Error::arg("λ must be positive"));
    }
    let c = poisson_delta_constant(lambda);
    let second = inp.variance + inp.mean * inp.mean;
    let mean_is_lambda = HypothesisStatus::from_check((inp.mean - lambda).abs() <= 1e-12 * lambda.max(1.0));
    let report = BoundReport::new(name).param("lambda", lambda).param("mean", inp.mean).param("variance", inp.variance);
    let report = match kind {
        PoissonSumKind::Tnd => report
            .term("main", c * ((lambda + 1.0) * inp.mean - second))
            .term("mismatch", 0.0)
            .hyp("TND", inp.dependence)
            .hyp("EW >= lambda", HypothesisStatus::from_check(inp.mean >= lambda * (1.0 - 1e-12))),
        PoissonSumKind::Tpd => report
            .term("main", c * (second + 2.0 * inp.lambda2 - lambda * (lambda + 1.0)))
            .term("mismatch", 0.0)
            .hyp("TPD", inp.dependence)
            .hyp("EW = lambda", mean_is_lambda)
            .param("lambda2", inp.lambda2),
        PoissonSumKind::Alnd | PoissonSumKind::Alpd => {
            let agg = inp.aggregates.ok_or_else(|| Error::arg("ALND/ALPD bounds need δ and ε"))?;
            let eps = if kind == PoissonSumKind::Alnd { agg.epsilon } else { agg.epsilon_star };
            report
                .term("main", c * ((inp.variance - lambda).abs() + 2.0 * eps))
                .term("mismatch", c_lambda(lambda) * (agg.delta - lambda).abs())
                .hyp(if kind == PoissonSumKind::Alnd { "ALND" } else { "ALPD" }, inp.dependence)
                .hyp("EW = lambda", mean_is_lambda)
                .param("delta", agg.delta)
                .param("epsilon", agg.epsilon)
                .param("epsilon_star", agg.epsilon_star)
                .param("c_lambda", c_lambda(lambda))
                .param("d_lambda", d_lambda(lambda))
        }
    };
    Ok(report.finish())
}

/// Birthday model bound with `δ_i = E[Z_i ξ_i]` (so `δ = λ`) and the closed-form
/// `ε`; evaluates to `(1 - e^{-λ})/m (1 + 4(N-1)(C-r-1)/(C-1))`.
pub fn bound_birthday(big_n: u32, m: u64, r: u64, alnd: HypothesisStatus) -> Result<BoundReport> {
    let (lambda, variance, eps, eps_neighbour) = crate::models::birthday_closed_forms(big_n, m, r)?;
    let inputs = PoissonSumInputs {
        lambda,
        mean: lambda,
        variance,
        lambda2: 0.0,
        aggregates: Some(DependenceAggregates { delta: lambda, epsilon: eps, epsilon_star: f64::NAN }),
        dependence: alnd,
    };
    let report = poisson_sum_named("birthday", PoissonSumKind::Alnd, &inputs)?;
    let c = poisson_delta_constant(lambda);
    let neighbour_value = c * ((variance - lambda).abs() + 2.0 * eps_neighbour);
    Ok(report
        .param("N", big_n)
        .param("m", m)
        .param("r", r)
        .param("epsilon_neighbour", eps_neighbour)
        .param("value_with_epsilon_neighbour", neighbour_value)
        .finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TpKind {
    Independent,
    Negrel,
    Posrel,
    Hypergeometric,
    Kruns,
}

impl TpKind {
    fn report_name(self) -> &'static str {
        match self {
            TpKind::Independent => "tp-independent",
            TpKind::Negrel => "tp-negrel",
            TpKind::Posrel => "tp-posrel",
            TpKind::Hypergeometric => "tp-hypergeometric",
            TpKind::Kruns => "tp-kruns",
        }
    }

    fn positive(self) -> bool {
        matches!(self, TpKind::Posrel | TpKind::Kruns)
    }
}

/// Provider of `d_TV(W^s, W^s + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "provider", content = "value")]
pub enum Smoothing {
    Exact(f64),
    WangXia(f64),
    Unused,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TpInputs {
    pub lambda: f64,
    pub lambda2: f64,
    pub sigma2: f64,
    pub l: u32,
    pub q: f64,
    pub smoothing: Smoothing,
}

/// Translated Poisson bounds for negatively (`2/σ² + (λ_2 + (l+q)(λ-λ_2))/(λσ)
/// + l(l+2q-1)(λ-λ_2)/σ² d_TV(W^s, W^s+1)`) and positively (coefficient
/// `(l+1)(l+2q)`) related summands.
pub fn translated_poisson_bound(kind: TpKind, inp: &TpInputs, hypotheses: Vec<Hypothesis>) -> Result<BoundReport> {
    let TpInputs { lambda, lambda2, sigma2, l, q, smoothing } = *inp;
    if !(sigma2 > 0.0) {
        return Err(Error::arg(format!("σ² must be positive, got {sigma2}")));
    }
    if !(lambda > 0.0) || !(0.0..=1.0).contains(&q) {
        return Err(Error::arg("need λ > 0 and q in [0, 1]"));
    }
    let (lf, sigma) = (l as f64, sigma2.sqrt());
    let coef = if kind.positive() { (lf + 1.0) * (lf + 2.0 * q) } else { lf * (lf + 2.0 * q - 1.0) };
    let smoothing_term = if coef == 0.0 {
        0.0
    } else {
        let dtv = match smoothing {
            Smoothing::Exact(v) | Smoothing::WangXia(v) => v,
            Smoothing::Unused => return Err(Error::arg("this (l, q) needs d_TV(W^s, W^s + 1)")),
        };
        coef * (lambda - lambda2) / sigma2 * dtv
    };
    let tp = tp_params(lambda, sigma2)?;
    let mut report = BoundReport::new(kind.report_name())
        .term("chebyshev", 2.0 / sigma2)
        .term("first_order", (lambda2 + (lf + q) * (lambda - lambda2)) / (lambda * sigma))
        .term("smoothing", smoothing_term)
        .param("lambda", lambda)
        .param("lambda2", lambda2)
        .param("sigma2", sigma2)
        .param("l", l)
        .param("q", q)
        .param("smoothing", smoothing)
        .param("tp_gamma", tp.gamma)
        .param("tp_rho", tp.rho);
    report.hypotheses = hypotheses;
    Ok(report.finish())
}

/// Independent summands (`l = q = 0`): `λ_2/(λσ) + 2/σ²`.
pub fn tp_independent(profile: &BernoulliProfile) -> Result<BoundReport> {
    let inputs = TpInputs {
        lambda: profile.lambda(),
        lambda2: profile.lambda_k(2),
        sigma2: profile.variance(),
        l: 0,
        q: 0.0,
        smoothing: Smoothing::Unused,
    };
    let hyps = vec![
        Hypothesis::new("negatively related", HypothesisStatus::Verified),
        Hypothesis::new("conditional order", HypothesisStatus::Verified),
    ];
    Ok(translated_poisson_bound(TpKind::Independent, &inputs, hyps)?.param("n", profile.len()))
}

/// Hypergeometric occupancy (`l = 0`, `q = 1`): `1/σ + 2/σ²`.
pub fn tp_hypergeometric(big_n: u64, m: u64, n: u64) -> Result<BoundReport> {
    let h = hypergeometric(big_n, m, n)?;
    let cond = match hypergeometric_conditional_laws(big_n, m, n) {
        Ok((law0, law1)) => HypothesisStatus::from_check(
            check_conditional_order(&law0, &law1, 0, 1.0, ConditionalMode::Negative)?.holds,
        ),
        Err(_) => HypothesisStatus::Assumed,
    };
    let inputs = TpInputs {
        lambda: h.lambda,
        lambda2: h.lambda * h.lambda / n as f64,
        sigma2: h.sigma2,
        l: 0,
        q: 1.0,
        smoothing: Smoothing::Unused,
    };
    let hyps = vec![
        Hypothesis::new("negatively related", HypothesisStatus::Assumed),
        Hypothesis::new("conditional order", cond),
    ];
    Ok(translated_poisson_bound(TpKind::Hypergeometric, &inputs, hyps)?
        .param("N", big_n)
        .param("m", m)
        .param("n", n)
        .finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothingProvider {
    Exact,
    WangXia,
}

/// `1 ∧ 2.3 / sqrt((n - k - 1) p^k (1 - p)^3)`.
pub fn wang_xia_factor(n: f64, k: u32, p: f64) -> f64 {
    let denom = ((n - k as f64 - 1.0) * p.powi(k as i32) * (1.0 - p).powi(3)).sqrt();
    if denom > 0.0 {
        (2.3 / denom).min(1.0)
    } else {
        1.0
    }
}

/// Largest `n` for which the conditional-order hypothesis of the k-runs bound
/// is checked by enumeration.
const KRUNS_CHECK_MAX_N: f64 = 20.0;

/// Circular `k`-runs (`l = 2k - 3`, `q = 1`).
pub fn tp_kruns(n: f64, k: u32, p: f64, provider: SmoothingProvider, exec: Exec) -> Result<BoundReport> {
    let mom = kruns_moments(n, k, p)?;
    let smoothing = match provider {
        SmoothingProvider::WangXia => Smoothing::WangXia(wang_xia_factor(n, k, p)),
        SmoothingProvider::Exact => {
            let ws = size_bias(&kruns_law(n as u64, k, p)?)?;
            Smoothing::Exact(tv_distance(&ws, &shift(&ws, 1)))
        }
    };
    let l = 2 * k - 3;
    let cond = if n <= KRUNS_CHECK_MAX_N {
        let (law0, law1) = kruns_conditional_laws(n as u32, k, p, exec)?;
        HypothesisStatus::from_check(check_conditional_order(&law0, &law1, l as i64, 1.0, ConditionalMode::Positive)?.holds)
    } else {
        HypothesisStatus::Assumed
    };
    let inputs = TpInputs { lambda: mom.lambda, lambda2: mom.lambda2, sigma2: mom.sigma2, l, q: 1.0, smoothing };
    let hyps = vec![
        Hypothesis::new("positively related", HypothesisStatus::Assumed),
        Hypothesis::new("conditional order", cond),
    ];
    Ok(translated_poisson_bound(TpKind::Kruns, &inputs, hyps)?.param("n", n).param("k", k).param("p", p).finish())
}

/// One cell of the 2-runs comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunsTableCell {
    pub n: f64,
    pub p: f64,
    pub value: f64,
}

pub const RUNS_TABLE_N: [f64; 3] = [1e6, 1e8, 1e10];
pub const RUNS_TABLE_P: [f64; 5] = [0.10, 0.25, 0.50, 0.75, 0.90];

/// The 2-runs bound over `n ∈ {10^6, 10^8, 10^10}` and five values of `p`, row-major.
pub fn runs_table(exec: Exec) -> Result<Vec<RunsTableCell>> {
    let cells: Vec<(f64, f64)> = RUNS_TABLE_N.iter().flat_map(|&n| RUNS_TABLE_P.iter().map(move |&p| (n, p))).collect();
    exec.map_slice(&cells, |&(n, p)| {
        tp_kruns(n, 2, p, SmoothingProvider::WangXia, Exec::Sequential).map(|r| RunsTableCell { n, p, value: r.value })
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PbdVariant {
    Smoothing,
    NewBound,
    BrownXia,
}

/// `max_j sqrt(Var E[X_j | W])` for independent summands.
fn max_conditional_sd(profile: &BernoulliProfile) -> Result<f64> {
    if profile.is_homogeneous() {
        return Ok(profile.variance().sqrt() / profile.len() as f64);
    }
    let w = independent_bernoulli_sum(profile)?;
    let probs = profile.probs();
    let mut best = 0.0f64;
    let mut seen = Vec::new();
    for (idx, &pj) in probs.iter().enumerate() {
        if seen.contains(&pj) {
            continue;
        }
        seen.push(pj);
        let mut rest = probs.clone();
        rest.remove(idx);
        let wj = independent_bernoulli_sum(&BernoulliProfile::new(&rest)?)?;
        let second: f64 = w
            .iter()
            .filter(|&(_, m)| m > 0.0)
            .map(|(k, m)| {
                let e = pj * wj.pmf(k - 1) / m;
                m * e * e
            })
            .sum();
        best = best.max((second - pj * pj).max(0.0).sqrt());
    }
    Ok(best)
}

/// Sums of independent indicators against the matched two-parameter PBD.
pub fn pbd_coupling_bound(profile: &BernoulliProfile, variant: PbdVariant) -> Result<BoundReport> {
    let matched = pbd_match_closed_form(profile)?;
    let (alpha, gamma) = (matched.alpha, matched.gamma());
    let q = matched.q.unwrap_or(f64::NAN);
    let (l1, l2, l3, l4) = (profile.lambda(), profile.lambda_k(2), profile.lambda_k(3), profile.lambda_k(4));
    let (s1, s2) = (profile.sigma_k(1), profile.sigma_k(2));
    let gamma_ok = HypothesisStatus::from_check(gamma >= 0.0);
    let name = match variant {
        PbdVariant::Smoothing => "pbd-smoothing",
        PbdVariant::NewBound => "pbd-newbound",
        PbdVariant::BrownXia => "pbd-brown-xia",
    };
    let mut report = BoundReport::new(name);
    report = match variant {
        PbdVariant::Smoothing => {
            let s0 = profile.sigma_k(0);
            if !(s0 > 0.0) {
                return Err(Error::arg("Σ p_i (1 - p_i) must be positive"));
            }
            report
                .term("smoothing", (l1 * l1 - l2) / (alpha * s0))
                .term("conditional_variance", (2.0 - q) * max_conditional_sd(profile)?)
                .hyp("gamma >= 0", gamma_ok)
        }
        PbdVariant::NewBound => {
            if !(s2 > 0.0) {
                return Err(Error::arg("σ_2 must be positive"));
            }
            report
                .term("I1", (l2 * l2 - l4) / (alpha * s2))
                .term("I2", 2.0 * (l1 * l2 - l3) / (alpha * s1))
                .term("I3", 2.0 * (l1 * l3 - l4) / (alpha * s1) + gamma * l3 / (alpha * s1))
                .hyp("gamma >= 0", gamma_ok)
        }
        PbdVariant::BrownXia => {
            if !(s2 > 0.0) {
                return Err(Error::arg("σ_2 must be positive"));
            }
            report.term("gamma_term", gamma * l3 / (alpha * s1)).term("lambda_term", 2.0 * l1 * l2 / (alpha * s2))
        }
    };
    let residuals = if profile.len() <= SIDE_CHECK_MAX_N {
        let law = independent_bernoulli_sum(profile)?;
        HypothesisStatus::from_check(
            crate::models::condition_a_residuals(&law, &matched.schedule(), 2).iter().all(|r| *r <= AS_REL_TOL),
        )
    } else {
        HypothesisStatus::Assumed
    };
    Ok(report
        .hyp("condition A_2", residuals)
        .hyp("PBD Stein factor 1/alpha", HypothesisStatus::Assumed)
        .param("alpha", alpha)
        .param("gamma", gamma)
        .param("q", q)
        .param("lambda", l1)
        .param("sigma1", s1)
        .param("sigma2", s2)
        .finish())
}
