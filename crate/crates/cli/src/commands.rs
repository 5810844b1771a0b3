use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Map, Value};

use bdstein::bdchain::{
    empirical_sup_norm, indicator, solve_stein_equation, stein_norm_constant, NormOrder, RateSchedule,
};
use bdstein::bounds::{
    bound_binomial_pbd, bound_birthday, bound_bose_einstein, bound_first_order, bound_katz_pbd, bound_mixed_poisson,
    bound_s_order_matched, dependence_status, pbd_coupling_bound, poisson_sum_bound, runs_table, tp_hypergeometric,
    tp_independent, tp_kruns, BoundReport, HypothesisStatus, PbdVariant, PoissonSumInputs, PoissonSumKind,
    SmoothingProvider, REGISTRY,
};
use bdstein::distcore::{make_dist, FiniteDist, DEFAULT_TRUNCATION};
use bdstein::models::{BernoulliProfile, ModelSpec};
use bdstein::oracle::{birthday_mc_tv, enumerate_certificate, exact_tv, random_sconvex_validation, Target};
use bdstein::orderings::{
    check_alnd, check_alpd, check_scx_order, check_slnd, check_slpd, check_st_order, check_tnd, check_tpd,
    karlin_novikoff_check, DependenceKind,
};
use bdstein_suite::{run_all, run_criterion};
use bdstein::{Error, Exec};

use crate::args::{BoundArgs, Check, Command, OrderArgs, Provider, SteinArgs, TvArgs, VerifyArgs};
use crate::render;
use crate::syntax::{parse_atoms, parse_count, parse_law, parse_model, parse_probs, parse_rates, parse_set, parse_target};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::BudgetExceeded { .. }) { EXIT_BUDGET } else { EXIT_USAGE };
        Self { code, message: e.to_string() }
    }
}

impl From<String> for Failure {
    fn from(message: String) -> Self {
        Failure::usage(message)
    }
}

type Out<T> = std::result::Result<T, Failure>;

/// Result of a subcommand before rendering.
pub struct Outcome {
    pub result: Value,
    pub resolved: Value,
    pub code: i32,
    /// Replaces the generic human rendering.
    pub human: Option<String>,
}

impl Outcome {
    fn new(result: impl Serialize, resolved: Value) -> Self {
        Self { result: to_value(result), resolved, code: EXIT_OK, human: None }
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

pub struct Context {
    pub seed: u64,
    pub tol: f64,
    pub exec: Exec,
    pub spec: Map<String, Value>,
}

impl Context {
    fn spec_entry<T: DeserializeOwned>(&self, key: &str) -> Out<Option<T>> {
        self.spec
            .get(key)
            .map(|v| serde_json::from_value(v.clone()).map_err(|e| Failure::usage(format!("spec file {key}: {e}"))))
            .transpose()
    }

    fn model(&self, flag: &Option<String>) -> Out<ModelSpec> {
        if let Some(m) = self.spec_entry("model")? {
            return Ok(m);
        }
        let s = flag.as_deref().ok_or_else(|| Failure::usage("--model is required"))?;
        Ok(parse_model(s)?)
    }

    fn rates(&self, flag: &Option<String>) -> Out<RateSchedule> {
        if let Some(r) = self.spec_entry("rates")? {
            return Ok(r);
        }
        let s = flag.as_deref().ok_or_else(|| Failure::usage("--rates is required"))?;
        Ok(parse_rates(s)?)
    }

    fn law(&self, key: &str, flag: &Option<String>) -> Out<FiniteDist> {
        match self.spec.get(key) {
            Some(Value::String(s)) => Ok(parse_law(s, self.tol, self.exec)?),
            Some(Value::Object(o)) => {
                let offset = o.get("offset").and_then(Value::as_i64).unwrap_or(0);
                let masses: Vec<f64> = serde_json::from_value(o.get("masses").cloned().unwrap_or(Value::Null))
                    .map_err(|e| Failure::usage(format!("spec file {key}: {e}")))?;
                Ok(make_dist(offset, masses)?)
            }
            Some(_) => Err(Failure::usage(format!("spec file {key} must be a string or {{offset, masses}}"))),
            None => {
                let s = flag.as_deref().ok_or_else(|| Failure::usage(format!("--{key} is required")))?;
                Ok(parse_law(s, self.tol, self.exec)?)
            }
        }
    }
}

pub fn run(command: &Command, ctx: &Context) -> Out<Outcome> {
    match command {
        Command::Bound(a) => bound(a, ctx),
        Command::Table1 => {
            let cells = runs_table(ctx.exec)?;
            let mut out = Outcome::new(&cells, json!({}));
            out.human = Some(render::runs_table_human(&cells));
            Ok(out)
        }
        Command::Tv(a) => tv(a, ctx),
        Command::Order(a) => order(a, ctx),
        Command::Stein(a) => stein(a, ctx),
        Command::Verify(a) => verify(a, ctx),
    }
}

fn need<T: Clone>(v: &Option<T>, flag: &str) -> Out<T> {
    v.clone().ok_or_else(|| Failure::usage(format!("--{flag} is required")))
}

fn profile(a: &BoundArgs) -> Out<BernoulliProfile> {
    let probs = match (&a.probs, a.n.as_deref(), a.p) {
        (Some(s), _, _) => parse_probs(s)?,
        (None, Some(n), Some(p)) => vec![p; parse_count(n)? as usize],
        _ => return Err(Failure::usage("--probs (or --n and --p) is required")),
    };
    Ok(BernoulliProfile::new(&probs)?)
}

fn poisson_sum(kind: PoissonSumKind, model: &ModelSpec, exec: Exec) -> Out<BoundReport> {
    let dep = match kind {
        PoissonSumKind::Tnd => DependenceKind::Tnd,
        PoissonSumKind::Tpd => DependenceKind::Tpd,
        PoissonSumKind::Alnd => DependenceKind::Alnd,
        PoissonSumKind::Alpd => DependenceKind::Alpd,
    };
    let cert = enumerate_certificate(model, dep, exec)?;
    let law = model.exact_law(exec)?;
    let p: Vec<f64> = cert.entries.iter().map(|e| e.joint.p1()).collect();
    let inputs = PoissonSumInputs {
        lambda: p.iter().sum(),
        mean: law.mean(),
        variance: law.variance(),
        lambda2: p.iter().map(|x| x * x).sum(),
        aggregates: Some(cert.aggregates()),
        dependence: dependence_status(kind, &cert)?,
    };
    Ok(poisson_sum_bound(kind, &inputs)?)
}

fn bound(a: &BoundArgs, ctx: &Context) -> Out<Outcome> {
    let name = a.name.as_str();
    if !REGISTRY.contains(&name) {
        return Err(Failure::usage(format!("unknown bound {name:?}; known: {}", REGISTRY.join(", "))));
    }
    let mut resolved = Map::new();
    let report = match name {
        "binomial-pbd" => bound_binomial_pbd(parse_count(&need(&a.n, "n")?)?, need(&a.p, "p")?)?,
        "bose-einstein-geometric" => bound_bose_einstein(need(&a.m, "m")?, need(&a.d, "d")?)?,
        "mixed-poisson" => {
            let atoms: Vec<(f64, f64)> = parse_atoms(&need(&a.atoms, "atoms")?)?.iter().map(|x| (x[0], x[1])).collect();
            bound_mixed_poisson(&atoms)?
        }
        "birthday" => {
            let (big_n, m, r) = (need(&a.big_n, "N")?, need(&a.m, "m")?, need(&a.r, "r")?);
            let big_n = u32::try_from(big_n).map_err(|_| Failure::usage("--N too large"))?;
            let spec = ModelSpec::Birthday { big_n, m, r };
            let alnd = match enumerate_certificate(&spec, DependenceKind::Alnd, ctx.exec) {
                Ok(cert) => dependence_status(PoissonSumKind::Alnd, &cert)?,
                Err(Error::BudgetExceeded { .. }) => HypothesisStatus::Assumed,
                Err(e) => return Err(e.into()),
            };
            bound_birthday(big_n, m, r, alnd)?
        }
        "tp-independent" => tp_independent(&profile(a)?)?,
        "pbd-smoothing" => pbd_coupling_bound(&profile(a)?, PbdVariant::Smoothing)?,
        "pbd-newbound" => pbd_coupling_bound(&profile(a)?, PbdVariant::NewBound)?,
        "pbd-brown-xia" => pbd_coupling_bound(&profile(a)?, PbdVariant::BrownXia)?,
        "tp-hypergeometric" => tp_hypergeometric(need(&a.big_n, "N")?, need(&a.m, "m")?, parse_count(&need(&a.n, "n")?)?)?,
        "tp-kruns" => {
            let n: f64 = need(&a.n, "n")?.parse().map_err(|_| Failure::usage("--n must be a number"))?;
            let provider = match a.provider {
                Provider::Exact => SmoothingProvider::Exact,
                Provider::WangXia => SmoothingProvider::WangXia,
            };
            tp_kruns(n, need(&a.k, "k")?, need(&a.p, "p")?, provider, ctx.exec)?
        }
        "katz-pbd" | "first-order" | "s-order-matched" => {
            let model = ctx.model(&a.model)?;
            let law = model.exact_law(ctx.exec)?;
            resolved.insert("model".into(), to_value(&model));
            if name == "katz-pbd" {
                bound_katz_pbd(&law, a.l)?
            } else {
                let rates = ctx.rates(&a.rates)?;
                resolved.insert("rates".into(), to_value(&rates));
                let s = if name == "first-order" { 1 } else { a.s };
                let norm = stein_norm_constant(&rates, NormOrder::Delta(s))?;
                if name == "first-order" {
                    bound_first_order(&law, &rates, norm)?
                } else {
                    bound_s_order_matched(&law, &rates, s, norm)?
                }
            }
        }
        "poisson-tnd" | "poisson-tpd" | "poisson-alnd" | "poisson-alpd" => {
            let kind = match name {
                "poisson-tnd" => PoissonSumKind::Tnd,
                "poisson-tpd" => PoissonSumKind::Tpd,
                "poisson-alnd" => PoissonSumKind::Alnd,
                _ => PoissonSumKind::Alpd,
            };
            let model = ctx.model(&a.model)?;
            resolved.insert("model".into(), to_value(&model));
            poisson_sum(kind, &model, ctx.exec)?
        }
        _ => {
            return Err(Failure::usage(format!(
                "{name} takes coupling inputs that have no command-line form; use the library"
            )))
        }
    };
    let mut out = Outcome::new(&report, Value::Object(resolved));
    if report.any_failed() {
        out.code = EXIT_HYPOTHESIS;
    }
    Ok(out)
}

fn tv(a: &TvArgs, ctx: &Context) -> Out<Outcome> {
    let model = ctx.model(&a.model)?;
    let target = match ctx.spec_entry::<Target>("target")? {
        Some(t) => t,
        None => parse_target(&a.target)?,
    };
    let resolved = json!({ "model": to_value(&model), "target": to_value(&target) });
    let result = match (&model, a.mc) {
        (ModelSpec::Birthday { big_n, m, r }, Some(samples)) => {
            if target != (Target::Poisson { lambda: None }) {
                return Err(Failure::usage("--mc supports only the matched Poisson target"));
            }
            birthday_mc_tv(*big_n, *m, *r, ctx.seed, samples, ctx.exec)?
        }
        (_, Some(_)) => return Err(Failure::usage("--mc applies only to the birthday model")),
        _ => exact_tv(&model, &target, ctx.exec)?,
    };
    Ok(Outcome::new(result, resolved))
}

fn dependence(check: Check, model: &ModelSpec, s: u32, exec: Exec) -> Out<Value> {
    let kind = match check {
        Check::Tnd => DependenceKind::Tnd,
        Check::Tpd => DependenceKind::Tpd,
        Check::Slnd => DependenceKind::Slnd,
        Check::Slpd => DependenceKind::Slpd,
        Check::Alnd => DependenceKind::Alnd,
        _ => DependenceKind::Alpd,
    };
    let cert = enumerate_certificate(model, kind, exec)?;
    let report = match check {
        Check::Tnd => check_tnd(&cert)?,
        Check::Tpd => check_tpd(&cert)?,
        Check::Slnd => check_slnd(&cert, s)?,
        Check::Slpd => check_slpd(&cert, s)?,
        Check::Alnd => check_alnd(&cert)?,
        _ => check_alpd(&cert)?,
    };
    Ok(to_value(report))
}

fn pair_check(check: Check, a: &FiniteDist, b: &FiniteDist, s: u32) -> Out<Value> {
    Ok(match check {
        Check::St => to_value(check_st_order(a, b)),
        Check::Scx => to_value(check_scx_order(a, b, s)?),
        _ => return Err(Failure::usage("pairs support only --check st or scx")),
    })
}

fn order(a: &OrderArgs, ctx: &Context) -> Out<Outcome> {
    match a.check {
        Check::Tnd | Check::Tpd | Check::Slnd | Check::Slpd | Check::Alnd | Check::Alpd => {
            let model = ctx.model(&a.model)?;
            let result = dependence(a.check, &model, a.s, ctx.exec)?;
            Ok(Outcome::new(result, json!({ "model": to_value(&model) })))
        }
        Check::Kn => {
            let rates = ctx.rates(&a.rates)?;
            let (w, resolved) = if a.model.is_some() || ctx.spec.contains_key("model") {
                let model = ctx.model(&a.model)?;
                (model.exact_law(ctx.exec)?, json!({ "model": to_value(&model), "rates": to_value(&rates) }))
            } else {
                (ctx.law("a", &a.a)?, json!({ "rates": to_value(&rates) }))
            };
            Ok(Outcome::new(karlin_novikoff_check(&w, &rates, a.s), resolved))
        }
        Check::St | Check::Scx => {
            if let Some(pair) = &a.pair {
                let n = pair
                    .strip_prefix("mirror:")
                    .and_then(|n| n.parse::<i64>().ok())
                    .filter(|&n| n >= 1)
                    .ok_or_else(|| Failure::usage(format!("unknown pair preset {pair:?}; use mirror:n")))?;
                let u = FiniteDist::uniform(0, n)?;
                let flipped = u.pushforward(|x| n - x);
                let doubled = u.pushforward(|x| 2 * x);
                let result = json!({
                    "u_vs_n_minus_u": pair_check(a.check, &u, &flipped, a.s)?,
                    "two_u_vs_n": pair_check(a.check, &doubled, &FiniteDist::point(n), a.s)?,
                });
                return Ok(Outcome::new(result, json!({ "n": n })));
            }
            let (x, y) = (ctx.law("a", &a.a)?, ctx.law("b", &a.b)?);
            let mut result = Map::new();
            result.insert("report".into(), pair_check(a.check, &x, &y, a.s)?);
            if a.trials > 0 {
                let s = if a.check == Check::St { 1 } else { a.s };
                let v = random_sconvex_validation(&x, &y, s, a.trials as u64, ctx.seed, ctx.exec)?;
                result.insert("validation".into(), to_value(v));
            }
            Ok(Outcome::new(result, json!({ "a": to_value(&x), "b": to_value(&y) })))
        }
    }
}

fn stein(a: &SteinArgs, ctx: &Context) -> Out<Outcome> {
    let rates = ctx.rates(&a.rates)?;
    let set = parse_set(&a.set)?;
    let sol = solve_stein_equation(&rates, indicator(&set))?;
    let constant = |order| stein_norm_constant(&rates, order).ok();
    let (sup_f, sup_df) = (sol.delta_sup_norm(0), sol.delta_sup_norm(1));
    let (c0, c1) = (constant(NormOrder::SupF), constant(NormOrder::Delta(1)));
    let within = |v: f64, c: Option<f64>| c.map(|c| v <= c * (1.0 + 1e-12));
    let mut result = json!({
        "solved_states": sol.values.len(),
        "residual": sol.residual,
        "eh": sol.eh,
        "sup_f": sup_f,
        "sup_delta_f": sup_df,
        "constant_sup_f": c0,
        "constant_delta_f": c1,
        "sup_f_within_constant": within(sup_f, c0),
        "delta_f_within_constant": within(sup_df, c1),
    });
    if a.trials > 0 {
        let emp = empirical_sup_norm(&rates, NormOrder::Delta(1), a.trials, ctx.seed, ctx.exec)?;
        result["empirical"] = to_value(emp);
    }
    Ok(Outcome::new(result, json!({ "rates": to_value(&rates), "set": set })))
}

fn verify(a: &VerifyArgs, ctx: &Context) -> Out<Outcome> {
    let outcomes = match a.criterion {
        Some(id) => vec![run_criterion(id, ctx.exec).ok_or_else(|| Failure::usage(format!("no criterion {id}")))?],
        None => run_all(ctx.exec),
    };
    let human = outcomes.iter().map(|o| o.line() + "\n").collect();
    let failed = outcomes.iter().any(|o| !o.passed);
    let mut result = to_value(&outcomes);
    if !a.timings {
        for o in result.as_array_mut().into_iter().flatten() {
            if let Some(obj) = o.as_object_mut() {
                obj.remove("seconds");
            }
        }
    }
    let mut out = Outcome::new(result, json!({}));
    out.human = Some(human);
    if failed {
        out.code = EXIT_HYPOTHESIS;
    }
    Ok(out)
}

pub fn default_tol(tol: Option<f64>) -> f64 {
    tol.unwrap_or(DEFAULT_TRUNCATION)
}
