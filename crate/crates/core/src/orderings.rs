//! Decision procedures for stochastic orders and dependence conditions.
//!
//! Orders use the convention "first dominates second" when `E f(first) >= E f(second)`
//! for every function in the class (nondecreasing for the usual order,
//! `s`-convex for the `s`-convex order).

use serde::{Deserialize, Serialize};

use crate::bdchain::RateSchedule;
use crate::distcore::{binom, mixture, shift, weighted_bias, FiniteDist, COMPARE_TOL};
use crate::error::{Error, Result};

/// Tolerance on the moment clause of the `s`-convex order.
pub const MOMENT_TOL: f64 = 1e-10;

/// Relative tolerance on condition `(A_s)`.
pub const AS_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    FirstDominates,
    SecondDominates,
    Incomparable,
    Equal,
}

impl Direction {
    fn from_flags(first: bool, second: bool) -> Self {
        match (first, second) {
            (true, true) => Direction::Equal,
            (true, false) => Direction::FirstDominates,
            (false, true) => Direction::SecondDominates,
            (false, false) => Direction::Incomparable,
        }
    }
}

/// A member of a test-function family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFn {
    /// `x -> I(x > k)`.
    Threshold(i64),
    /// `x -> C(x, t)`.
    Moment(u32),
    /// `x -> C(x - k - 1, order)`.
    Taylor { k: i64, order: u32 },
    Constant,
}

/// Where a defining inequality fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Test(TestFn),
    /// Failure for summand `index` of a dependence certificate.
    Summand { index: usize, test: TestFn },
    Clause(String),
}

/// A named sub-condition and whether it passed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub passed: bool,
    pub value: f64,
}

impl Clause {
    fn new(name: impl Into<String>, passed: bool, value: f64) -> Self {
        Self { name: name.into(), passed, value }
    }
}

/// Aggregates `δ = Σ δ_i`, `ε = Σ E[X_i Y_i]`, `ε_* = ε + Σ δ_i E[X_i + Y_i]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DependenceAggregates {
    pub delta: f64,
    pub epsilon: f64,
    pub epsilon_star: f64,
}

/// Outcome of an order or dependence check.
///
/// For dependence checks `direction` records the sign pattern of the tested
/// quantities: `Equal` when all vanish within tolerance, `FirstDominates` when
/// all are nonnegative, `SecondDominates` when all are nonpositive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderReport {
    pub holds: bool,
    pub direction: Direction,
    pub witness: Option<Witness>,
    /// Size of the failure at the witness (zero when `holds`).
    pub violation: f64,
    /// Largest `t` such that `E C(a, u) = E C(b, u)` for all `u <= t`.
    pub moments_matched: Option<u32>,
    /// The test family is a proper sub-family of the defining class.
    pub subfamily: bool,
    pub clauses: Vec<Clause>,
    pub aggregates: Option<DependenceAggregates>,
}

impl OrderReport {
    fn new(holds: bool, direction: Direction) -> Self {
        Self {
            holds,
            direction,
            witness: None,
            violation: 0.0,
            moments_matched: None,
            subfamily: false,
            clauses: Vec::new(),
            aggregates: None,
        }
    }
}

/// Usual stochastic order by survival comparison. `holds` means `a ⪰_st b`.
pub fn check_st_order(a: &FiniteDist, b: &FiniteDist) -> OrderReport {
    let lo = a.min_support().min(b.min_support()) - 1;
    let hi = a.max_support().max(b.max_support());
    let diffs: Vec<(i64, f64)> = (lo..=hi).map(|k| (k, a.survival(k) - b.survival(k))).collect();
    let first = diffs.iter().all(|d| d.1 >= -COMPARE_TOL);
    let second = diffs.iter().all(|d| d.1 <= COMPARE_TOL);
    let mut report = OrderReport::new(first, Direction::from_flags(first, second));
    if !first {
        let (k, d) = diffs.iter().copied().fold((lo, f64::INFINITY), |m, d| if d.1 < m.1 { d } else { m });
        report.witness = Some(Witness::Test(TestFn::Threshold(k)));
        report.violation = -d;
    }
    report
}

fn scaled(tol: f64, x: f64, y: f64) -> f64 {
    tol * 1f64.max(x.abs()).max(y.abs())
}

/// `s`-convex order. `holds` means `E f(a) >= E f(b)` for all `s`-convex `f`.
///
/// Both laws are translated by a common amount so that supports start at 0;
/// the order is invariant under common translation.
pub fn check_scx_order(a: &FiniteDist, b: &FiniteDist, s: u32) -> Result<OrderReport> {
    if s < 1 {
        return Err(Error::arg("s must be >= 1"));
    }
    let base = a.min_support().min(b.min_support());
    let ea = |g: &dyn Fn(i64) -> f64| a.expect(|x| g(x - base));
    let eb = |g: &dyn Fn(i64) -> f64| b.expect(|x| g(x - base));

    let mut matched = 0u32;
    let mut moment_fail = None;
    for t in 1..s {
        let (ma, mb) = (ea(&|x| binom(x, t)), eb(&|x| binom(x, t)));
        if (ma - mb).abs() > scaled(MOMENT_TOL, ma, mb) {
            moment_fail = Some((t, (ma - mb).abs()));
            break;
        }
        matched = t;
    }
    if let Some((t, gap)) = moment_fail {
        let mut report = OrderReport::new(false, Direction::Incomparable);
        report.moments_matched = Some(matched);
        report.witness = Some(Witness::Test(TestFn::Moment(t)));
        report.violation = gap;
        report.clauses.push(Clause::new(format!("moment {t}"), false, gap));
        return Ok(report);
    }

    let top = a.max_support().max(b.max_support()) - base;
    let diffs: Vec<(i64, f64, f64)> = (0..=top)
        .map(|k| {
            let w = |x: i64| binom(x - k - 1, s - 1);
            let (va, vb) = (ea(&w), eb(&w));
            (k, va - vb, scaled(COMPARE_TOL, va, vb))
        })
        .collect();
    let first = diffs.iter().all(|d| d.1 >= -d.2);
    let second = diffs.iter().all(|d| d.1 <= d.2);
    let mut report = OrderReport::new(first, Direction::from_flags(first, second));
    report.moments_matched = Some(matched);
    if !first {
        let worst = diffs.iter().fold((0, f64::INFINITY), |m, d| if d.1 < m.1 { (d.0, d.1) } else { m });
        report.witness = Some(Witness::Test(TestFn::Taylor { k: worst.0 + base, order: s - 1 }));
        report.violation = -worst.1;
    }
    Ok(report)
}

/// Number of strict sign alternations after deleting entries with `|x| <= tol`.
pub fn sign_changes(seq: &[f64], tol: f64) -> usize {
    let signs: Vec<bool> = seq.iter().filter(|x| x.abs() > tol).map(|&x| x > 0.0).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// The laws `W_α` and `W_β` with their normalisers `α = E α_W`, `β = E β_W`.
pub fn birth_death_biased(w: &FiniteDist, r: &RateSchedule) -> Result<(FiniteDist, f64, FiniteDist, f64)> {
    let (wa, alpha) = weighted_bias(&shift(w, 1), |j| r.birth(j - 1))?;
    let (wb, beta) = weighted_bias(w, |j| r.death(j))?;
    Ok((wa, alpha, wb, beta))
}

/// `{α_{j-1} μ_{j-1} - β_j μ_j}` for `j = 0..=max+1`.
pub fn crossing_sequence(w: &FiniteDist, r: &RateSchedule) -> Vec<f64> {
    (0..=w.max_support() + 1)
        .map(|j| r.birth(j - 1) * w.pmf(j - 1) - r.death(j) * w.pmf(j))
        .collect()
}

/// Sufficient condition for `W_α` and `W_β` to be `s`-convex ordered:
/// condition `(A_s)` plus at most `s` sign changes of the crossing sequence
/// (for `s = 1`, a monotone crossing sequence is accepted as well).
///
/// `direction` compares `W_α` (first) against `W_β` (second).
pub fn karlin_novikoff_check(w: &FiniteDist, r: &RateSchedule, s: u32) -> OrderReport {
    let mut clauses = Vec::new();
    if w.min_support() < 0 {
        let mut report = OrderReport::new(false, Direction::Incomparable);
        report.witness = Some(Witness::Clause("support".into()));
        report.clauses.push(Clause::new("support", false, w.min_support() as f64));
        return report;
    }
    let mut as_ok = true;
    let mut first_bad = None;
    for t in 0..s.max(1) {
        let lhs = w.expect(|j| r.birth(j) * ((j + 1) as f64).powi(t as i32));
        let rhs = w.expect(|j| r.death(j) * (j as f64).powi(t as i32));
        let gap = (lhs - rhs).abs();
        let ok = gap <= AS_REL_TOL * lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
        clauses.push(Clause::new(format!("A_s moment {t}"), ok, gap));
        if !ok && first_bad.is_none() {
            first_bad = Some(t);
        }
        as_ok &= ok;
    }
    let seq = crossing_sequence(w, r);
    let scale = (0..=w.max_support() + 1)
        .map(|j| (r.birth(j - 1) * w.pmf(j - 1)).max(r.death(j) * w.pmf(j)))
        .fold(0.0f64, f64::max);
    let tol = COMPARE_TOL * scale;
    let changes = sign_changes(&seq, tol);
    let crossing_ok = changes <= s as usize;
    clauses.push(Clause::new("sign changes", crossing_ok, changes as f64));
    let mut shape_ok = crossing_ok;
    if s == 1 {
        let up = seq.windows(2).all(|p| p[1] >= p[0] - tol);
        let down = seq.windows(2).all(|p| p[1] <= p[0] + tol);
        clauses.push(Clause::new("monotone sequence", up || down, 0.0));
        shape_ok |= up || down;
    }
    let holds = as_ok && shape_ok;
    let direction = birth_death_biased(w, r)
        .ok()
        .and_then(|(wa, _, wb, _)| check_scx_order(&wa, &wb, s.max(1)).ok())
        .map_or(Direction::Incomparable, |rep| rep.direction);
    let mut report = OrderReport::new(holds, direction);
    report.clauses = clauses;
    if !holds {
        report.witness = Some(Witness::Clause(match first_bad {
            Some(t) => format!("A_s moment {t}"),
            None => "sign changes".into(),
        }));
        report.violation = if as_ok { (changes as f64 - s as f64).max(0.0) } else { 1.0 };
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DependenceKind {
    Tnd,
    Tpd,
    Alnd,
    Alpd,
    Slnd,
    Slpd,
}

impl DependenceKind {
    /// Whether the tables are of `(X_i, W_i - Y_i)` rather than `(X_i, W_i)`.
    pub fn uses_neighbourhood(self) -> bool {
        matches!(self, DependenceKind::Alnd | DependenceKind::Alpd)
    }
}

/// Joint law of an indicator `X` and an integer variable `V`:
/// `given0[j] = P(X = 0, V = offset + j)`, `given1[j] = P(X = 1, V = offset + j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointTable {
    pub offset: i64,
    pub given0: Vec<f64>,
    pub given1: Vec<f64>,
}

impl JointTable {
    /// Table of an indicator independent of `v`.
    pub fn independent(p: f64, v: &FiniteDist) -> Self {
        let m = v.masses();
        Self {
            offset: v.offset(),
            given0: m.iter().map(|x| (1.0 - p) * x).collect(),
            given1: m.iter().map(|x| p * x).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.given0.len().max(self.given1.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn at(v: &[f64], j: usize) -> f64 {
        v.get(j).copied().unwrap_or(0.0)
    }

    pub fn p1(&self) -> f64 {
        self.given1.iter().sum()
    }

    /// `(E[X g(V)], E[g(V)])`.
    pub fn moments(&self, g: impl Fn(i64) -> f64) -> (f64, f64) {
        (0..self.len()).fold((0.0, 0.0), |(xg, eg), j| {
            let v = g(self.offset + j as i64);
            let (a, b) = (Self::at(&self.given0, j), Self::at(&self.given1, j));
            (xg + b * v, eg + (a + b) * v)
        })
    }

    /// Law of `X + V`.
    pub fn sum_law(&self) -> Result<FiniteDist> {
        let mut masses = vec![0.0; self.len() + 1];
        for j in 0..self.len() {
            masses[j] += Self::at(&self.given0, j);
            masses[j + 1] += Self::at(&self.given1, j);
        }
        FiniteDist::new(self.offset, masses)
    }

    pub fn second_law(&self) -> Result<FiniteDist> {
        let masses = (0..self.len()).map(|j| Self::at(&self.given0, j) + Self::at(&self.given1, j)).collect();
        FiniteDist::new(self.offset, masses)
    }

    /// `V` given `X = x`.
    pub fn conditional(&self, x: u8) -> Result<FiniteDist> {
        let row = if x == 0 { &self.given0 } else { &self.given1 };
        FiniteDist::new(self.offset, row.clone())
    }
}

/// Per-summand data of a dependence certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub joint: JointTable,
    pub delta: f64,
    /// `E[X_i Y_i]` (zero without a neighbourhood).
    pub e_xy: f64,
    /// `E[X_i + Y_i]`.
    pub e_x_plus_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceCertificate {
    pub kind: DependenceKind,
    pub entries: Vec<CertificateEntry>,
    /// Law of `W`, used to check the marginals of `(X_i, W_i)` tables.
    pub w_law: Option<FiniteDist>,
}

/// Consistency tolerance on certificate tables.
const TABLE_TOL: f64 = 1e-10;

impl DependenceCertificate {
    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::Certificate("no summands".into()));
        }
        for (i, e) in self.entries.iter().enumerate() {
            let t = &e.joint;
            if t.given0.iter().chain(&t.given1).any(|&x| !(x >= 0.0)) {
                return Err(Error::Certificate(format!("negative entry in table {i}")));
            }
            let total: f64 = t.given0.iter().chain(&t.given1).sum();
            if (total - 1.0).abs() > TABLE_TOL {
                return Err(Error::Certificate(format!("table {i} has mass {total}")));
            }
            if !(e.delta >= 0.0) {
                return Err(Error::arg(format!("delta_{i} = {} is negative", e.delta)));
            }
            if let (Some(w), false) = (&self.w_law, self.kind.uses_neighbourhood()) {
                let sum = t.sum_law()?;
                let lo = w.min_support().min(sum.min_support());
                let hi = w.max_support().max(sum.max_support());
                if (lo..=hi).any(|k| (w.pmf(k) - sum.pmf(k)).abs() > TABLE_TOL) {
                    return Err(Error::Certificate(format!("X_{i} + W_{i} does not have the law of W")));
                }
            }
        }
        Ok(())
    }

    pub fn aggregates(&self) -> DependenceAggregates {
        let delta = self.entries.iter().map(|e| e.delta).sum();
        let epsilon = self.entries.iter().map(|e| e.e_xy).sum::<f64>();
        let epsilon_star = epsilon + self.entries.iter().map(|e| e.delta * e.e_x_plus_y).sum::<f64>();
        DependenceAggregates { delta, epsilon, epsilon_star }
    }
}

/// Evaluate `value(i, test)` over every summand and test function; `sign = -1`
/// requires all values `<= tol`, `sign = +1` all `>= -tol`.
fn sign_report(values: Vec<(usize, TestFn, f64)>, sign: f64) -> OrderReport {
    let ok_neg = values.iter().all(|v| v.2 <= COMPARE_TOL);
    let ok_pos = values.iter().all(|v| v.2 >= -COMPARE_TOL);
    let holds = if sign < 0.0 { ok_neg } else { ok_pos };
    let mut report = OrderReport::new(holds, Direction::from_flags(ok_pos, ok_neg));
    if !holds {
        let worst = values
            .into_iter()
            .max_by(|a, b| (sign * -a.2).total_cmp(&(sign * -b.2)))
            .expect("a failing check has at least one value");
        report.violation = worst.2.abs();
        report.witness = Some(Witness::Summand { index: worst.0, test: worst.1 });
    }
    report
}

fn threshold_covariances(cert: &DependenceCertificate) -> Vec<(usize, TestFn, f64)> {
    let mut out = Vec::new();
    for (i, e) in cert.entries.iter().enumerate() {
        let t = &e.joint;
        let p1 = t.p1();
        for k in t.offset..t.offset + t.len() as i64 - 1 {
            let (xg, eg) = t.moments(|v| if v > k { 1.0 } else { 0.0 });
            out.push((i, TestFn::Threshold(k), xg - p1 * eg));
        }
    }
    out
}

fn dependence_check(cert: &DependenceCertificate, sign: f64) -> Result<OrderReport> {
    cert.validate()?;
    let mut report = sign_report(threshold_covariances(cert), sign);
    report.aggregates = Some(cert.aggregates());
    Ok(report)
}

/// Total negative dependence: `Cov[I(X_i >= 1), I(V_i > t)] <= 0` for all `i, t`.
pub fn check_tnd(cert: &DependenceCertificate) -> Result<OrderReport> {
    dependence_check(cert, -1.0)
}

/// Total positive dependence.
pub fn check_tpd(cert: &DependenceCertificate) -> Result<OrderReport> {
    dependence_check(cert, 1.0)
}

fn local_check(cert: &DependenceCertificate, family: &dyn Fn(&JointTable) -> Vec<TestFn>, sign: f64) -> Result<OrderReport> {
    cert.validate()?;
    if cert.aggregates().delta <= 0.0 {
        return Err(Error::arg("the deltas must have positive sum"));
    }
    let mut values = Vec::new();
    for (i, e) in cert.entries.iter().enumerate() {
        for test in family(&e.joint) {
            let (xg, eg) = e.joint.moments(|v| eval_test(&test, v));
            values.push((i, test, xg - e.delta * eg));
        }
    }
    let mut report = sign_report(values, sign);
    report.aggregates = Some(cert.aggregates());
    Ok(report)
}

fn eval_test(test: &TestFn, v: i64) -> f64 {
    match *test {
        TestFn::Threshold(k) => f64::from(u8::from(v > k)),
        TestFn::Moment(t) => binom(v, t),
        TestFn::Constant => 1.0,
        TestFn::Taylor { k, order } => binom(v - k - 1, order),
    }
}

/// The test family `{C(x, t), t = 1..s-1} ∪ {C(x-k-1, s-1), k >= 0}` on the
/// range of `table`.
fn taylor_family(table: &JointTable, s: u32) -> Vec<TestFn> {
    let top = table.offset + table.len() as i64;
    let mut fam: Vec<TestFn> = (1..s).map(TestFn::Moment).collect();
    fam.extend((0..top).map(|k| TestFn::Taylor { k, order: s - 1 }));
    fam
}

fn slocal(cert: &DependenceCertificate, s: u32, sign: f64) -> Result<OrderReport> {
    if s < 1 {
        return Err(Error::arg("s must be >= 1"));
    }
    if cert.entries.iter().any(|e| e.joint.offset < 0) {
        return Err(Error::Certificate("W_i must be nonnegative".into()));
    }
    let mut report = local_check(cert, &|t| taylor_family(t, s), sign)?;
    report.subfamily = s >= 2;
    Ok(report)
}

/// `(s, δ)`-local negative dependence over the family
/// `{C(x, t), t < s} ∪ {C(x-k-1, s-1)}`; exact for `s = 1`, a sub-family
/// certificate (flagged) for `s >= 2`.
pub fn check_slnd(cert: &DependenceCertificate, s: u32) -> Result<OrderReport> {
    slocal(cert, s, -1.0)
}

pub fn check_slpd(cert: &DependenceCertificate, s: u32) -> Result<OrderReport> {
    slocal(cert, s, 1.0)
}

fn threshold_family(table: &JointTable) -> Vec<TestFn> {
    let mut fam = vec![TestFn::Constant];
    fam.extend((table.offset..table.offset + table.len() as i64 - 1).map(TestFn::Threshold));
    fam
}

/// Approximate local negative dependence: `E[X_i g(W_i - Y_i)] <= δ_i E[g(W_i - Y_i)]`
/// for all nonnegative nondecreasing `g` (thresholds plus constants generate the cone).
pub fn check_alnd(cert: &DependenceCertificate) -> Result<OrderReport> {
    local_check(cert, &threshold_family, -1.0)
}

pub fn check_alpd(cert: &DependenceCertificate) -> Result<OrderReport> {
    local_check(cert, &threshold_family, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionalMode {
    /// `(W+1 | X=0) ⪯_st (W + l + v_q | X=1)`.
    Negative,
    /// `(W+1 | X=0) ⪰_st (W - l - v_q | X=1)`.
    Positive,
}

/// `law1` shifted by `sign * (l + v_q)`.
pub fn shift_by_lq(law1: &FiniteDist, l: i64, q: f64, sign: i64) -> Result<FiniteDist> {
    mixture(&[(1.0 - q, shift(law1, sign * l)), (q, shift(law1, sign * (l + 1)))])
}

/// Conditional-order hypothesis of the translated Poisson theorems, with
/// `law0 = L(W | X_k = 0)` and `law1 = L(W | X_k = 1)`.
pub fn check_conditional_order(
    law0: &FiniteDist,
    law1: &FiniteDist,
    l: i64,
    q: f64,
    mode: ConditionalMode,
) -> Result<OrderReport> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidProbability(q));
    }
    if l < 0 {
        return Err(Error::arg("l must be nonnegative"));
    }
    let lhs = shift(law0, 1);
    Ok(match mode {
        ConditionalMode::Negative => check_st_order(&shift_by_lq(law1, l, q, 1)?, &lhs),
        ConditionalMode::Positive => check_st_order(&lhs, &shift_by_lq(law1, l, q, -1)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distcore::make_dist;

    fn bin(n: u32, p: f64) -> FiniteDist {
        make_dist(0, (0..=n).map(|k| binom(n as i64, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)).collect())
            .unwrap()
    }

    #[test]
    fn st_order_examples() {
        let r = check_st_order(&bin(1, 0.6), &bin(1, 0.5));
        assert_eq!(r.direction, Direction::FirstDominates);
        assert!(r.holds);

        let u = FiniteDist::uniform(0, 4).unwrap();
        let two_u = u.pushforward(|x| 2 * x);
        let r = check_st_order(&two_u, &FiniteDist::point(4));
        assert_eq!(r.direction, Direction::Incomparable);
        assert!(!r.holds);
        let Some(Witness::Test(TestFn::Threshold(k))) = r.witness else { panic!() };
        assert!(FiniteDist::point(4).survival(k) - two_u.survival(k) >= r.violation - 1e-15);

        let r = check_st_order(&u, &u.pushforward(|x| 4 - x));
        assert_eq!(r.direction, Direction::Equal);
    }

    #[test]
    fn scx_equal_and_errors() {
        let a = bin(5, 0.3);
        for s in 1..5 {
            assert_eq!(check_scx_order(&a, &a, s).unwrap().direction, Direction::Equal);
        }
        assert!(check_scx_order(&a, &a, 0).is_err());
    }

    #[test]
    fn scx_mean_preserving_spread() {
        // δ_1 vs uniform {0, 2}: same mean, the spread dominates in convex order
        let spread = make_dist(0, vec![0.5, 0.0, 0.5]).unwrap();
        let r = check_scx_order(&spread, &FiniteDist::point(1), 2).unwrap();
        assert_eq!(r.direction, Direction::FirstDominates);
        let r = check_scx_order(&FiniteDist::point(1), &spread, 2).unwrap();
        assert!(!r.holds);
        assert_eq!(r.moments_matched, Some(1));
    }

    #[test]
    fn scx_moment_mismatch_is_incomparable() {
        let r = check_scx_order(&FiniteDist::point(2), &FiniteDist::point(1), 2).unwrap();
        assert_eq!(r.direction, Direction::Incomparable);
        assert_eq!(r.witness, Some(Witness::Test(TestFn::Moment(1))));
        assert_eq!(r.moments_matched, Some(0));
    }

    #[test]
    fn signs() {
        assert_eq!(sign_changes(&[1.0, 2.0, 3.0], 0.0), 0);
        assert_eq!(sign_changes(&[1.0, -1.0, 1.0], 0.0), 2);
        assert_eq!(sign_changes(&[1.0, 1e-14, -1.0], 1e-12), 1);
        assert_eq!(sign_changes(&[], 0.0), 0);
    }

    #[test]
    fn independent_indicators_are_tnd_and_tpd() {
        let entries = (0..3)
            .map(|_| CertificateEntry {
                joint: JointTable::independent(0.3, &bin(2, 0.3)),
                delta: 0.3,
                e_xy: 0.0,
                e_x_plus_y: 0.3,
            })
            .collect();
        let cert = DependenceCertificate { kind: DependenceKind::Tnd, entries, w_law: Some(bin(3, 0.3)) };
        assert!(check_tnd(&cert).unwrap().holds);
        assert!(check_tpd(&cert).unwrap().holds);
        assert_eq!(check_tnd(&cert).unwrap().direction, Direction::Equal);
        assert!(check_slnd(&cert, 1).unwrap().holds);
        assert!(check_slpd(&cert, 2).unwrap().holds);
        assert!(check_slpd(&cert, 2).unwrap().subfamily);
    }

    #[test]
    fn inconsistent_marginals_rejected() {
        let entries = vec![CertificateEntry {
            joint: JointTable::independent(0.3, &bin(2, 0.3)),
            delta: 0.3,
            e_xy: 0.0,
            e_x_plus_y: 0.3,
        }];
        let cert = DependenceCertificate { kind: DependenceKind::Tnd, entries, w_law: Some(bin(3, 0.5)) };
        assert!(matches!(check_tnd(&cert), Err(Error::Certificate(_))));
    }

    #[test]
    fn degenerate_neighbourhood() {
        // Y_i = W_i, so W_i - Y_i = 0
        let entries = vec![CertificateEntry {
            joint: JointTable { offset: 0, given0: vec![0.6], given1: vec![0.4] },
            delta: 0.4,
            e_xy: 0.1,
            e_x_plus_y: 0.9,
        }];
        let cert = DependenceCertificate { kind: DependenceKind::Alnd, entries, w_law: None };
        let r = check_alnd(&cert).unwrap();
        assert!(r.holds);
        let agg = r.aggregates.unwrap();
        assert!((agg.epsilon_star - (0.1 + 0.4 * 0.9)).abs() < 1e-15);
    }

    #[test]
    fn conditional_order_independent() {
        let w_k = bin(4, 0.2);
        let law0 = w_k.clone();
        let law1 = shift(&w_k, 1);
        let r = check_conditional_order(&law0, &law1, 0, 0.0, ConditionalMode::Negative).unwrap();
        assert_eq!(r.direction, Direction::Equal);
        assert!(check_conditional_order(&law0, &law1, 0, 1.5, ConditionalMode::Negative).is_err());
    }

    #[test]
    fn karlin_novikoff_poisson_is_trivial() {
        let pi = crate::bdchain::equilibrium(&RateSchedule::poisson(2.0)).unwrap();
        let r = karlin_novikoff_check(&pi, &RateSchedule::poisson(2.0), 2);
        assert!(r.holds, "{r:?}");
    }
}
