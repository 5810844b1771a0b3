//! Mini-syntax for models, rate schedules, laws, sets and probability lists.
//!
//! Every form mirrors a JSON descriptor: `kruns:6,2,0.5` is
//! `{"model":"kruns","n":6,"k":2,"p":0.5}` and `poisson:1` is
//! `{"kind":"poisson","lambda":1}`.

use bdstein::bdchain::{stationary_distribution, RateSchedule};
use bdstein::distcore::{make_dist, FiniteDist};
use bdstein::models::ModelSpec;
use bdstein::oracle::Target;
use bdstein::Exec;

pub type ParseResult<T> = std::result::Result<T, String>;

fn split_head(s: &str) -> (&str, &str) {
    match s.split_once(':') {
        Some((h, t)) => (h.trim(), t.trim()),
        None => (s.trim(), ""),
    }
}

fn nums<T: std::str::FromStr>(body: &str, what: &str) -> ParseResult<Vec<T>> {
    if body.is_empty() {
        return Ok(Vec::new());
    }
    body.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|_| format!("bad number {t:?} in {what}")))
        .collect()
}

fn exactly<T: Copy, const N: usize>(v: Vec<T>, what: &str) -> ParseResult<[T; N]> {
    let len = v.len();
    v.try_into().map_err(|_| format!("{what} takes {N} parameters, got {len}"))
}

/// Integer that may be written in scientific notation, such as `1e6`.
pub fn parse_count(s: &str) -> ParseResult<u64> {
    let x: f64 = s.trim().parse().map_err(|_| format!("bad count {s:?}"))?;
    if x < 0.0 || x.fract() != 0.0 || x > 2f64.powi(53) {
        return Err(format!("{s:?} is not a nonnegative integer"));
    }
    Ok(x as u64)
}

/// `0.1x100`, `0.1x50,0.3x20`, or a plain list `0.1,0.2,0.4`.
pub fn parse_probs(s: &str) -> ParseResult<Vec<f64>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match part.split_once('x') {
            Some((p, c)) => {
                let p: f64 = p.trim().parse().map_err(|_| format!("bad probability {p:?}"))?;
                let c = parse_count(c)?;
                out.extend(std::iter::repeat_n(p, c as usize));
            }
            None => out.push(part.parse().map_err(|_| format!("bad probability {part:?}"))?),
        }
    }
    if out.is_empty() {
        return Err("empty probability list".into());
    }
    Ok(out)
}

/// `{0}`, `{0,2,5}`, `{0..3}` (inclusive) or the same without braces.
pub fn parse_set(s: &str) -> ParseResult<Vec<i64>> {
    let body = s.trim().trim_start_matches('{').trim_end_matches('}');
    let mut out = Vec::new();
    for part in body.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match part.split_once("..") {
            Some((a, b)) => {
                let a: i64 = a.trim().parse().map_err(|_| format!("bad set bound {a:?}"))?;
                let b: i64 = b.trim().parse().map_err(|_| format!("bad set bound {b:?}"))?;
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| format!("bad set element {part:?}"))?),
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Mixed-Poisson atoms `w@λ,w@λ`.
pub fn parse_atoms(s: &str) -> ParseResult<Vec<[f64; 2]>> {
    s.split(',')
        .map(|part| {
            let (w, l) = part.split_once('@').ok_or_else(|| format!("atom {part:?} is not weight@mean"))?;
            let w: f64 = w.trim().parse().map_err(|_| format!("bad weight {w:?}"))?;
            let l: f64 = l.trim().parse().map_err(|_| format!("bad mean {l:?}"))?;
            Ok([w, l])
        })
        .collect()
}

pub fn parse_model(s: &str) -> ParseResult<ModelSpec> {
    let (head, body) = split_head(s);
    Ok(match head {
        "kruns" => {
            let [n, k, p] = exactly::<f64, 3>(nums(body, "kruns")?, "kruns")?;
            ModelSpec::Kruns { n: parse_count(&n.to_string())?, k: k as u32, p }
        }
        "hypergeometric" | "hyp" => {
            let [big_n, m, n] = exactly::<u64, 3>(nums(body, "hypergeometric")?, "hypergeometric")?;
            ModelSpec::Hypergeometric { big_n, m, n }
        }
        "bernoulli" | "bernoulli_sum" => ModelSpec::BernoulliSum { probs: parse_probs(body)? },
        "bose_einstein" | "bose-einstein" => {
            let [m, d] = exactly::<u64, 2>(nums(body, "bose_einstein")?, "bose_einstein")?;
            ModelSpec::BoseEinstein { m, d }
        }
        "birthday" => {
            let [big_n, m, r] = exactly::<u64, 3>(nums(body, "birthday")?, "birthday")?;
            let big_n = u32::try_from(big_n).map_err(|_| "birthday N too large".to_string())?;
            ModelSpec::Birthday { big_n, m, r }
        }
        "mixed_poisson" | "mixed-poisson" => ModelSpec::MixedPoisson { atoms: parse_atoms(body)? },
        "katz" => {
            let [a, b] = exactly::<f64, 2>(nums(body, "katz")?, "katz")?;
            ModelSpec::Katz { a, b }
        }
        _ => return Err(format!("unknown model {head:?}")),
    })
}

pub fn parse_rates(s: &str) -> ParseResult<RateSchedule> {
    let (head, body) = split_head(s);
    Ok(match head {
        "poisson" => {
            let [lambda] = exactly::<f64, 1>(nums(body, "poisson")?, "poisson")?;
            RateSchedule::poisson(lambda)
        }
        "geometric" => {
            let [q] = exactly::<f64, 1>(nums(body, "geometric")?, "geometric")?;
            RateSchedule::geometric(q)
        }
        "binomial" => {
            let [n, p] = exactly::<f64, 2>(nums(body, "binomial")?, "binomial")?;
            RateSchedule::binomial(parse_count(&n.to_string())?, p)
        }
        "negbin" | "negative_binomial" => {
            let [r, q] = exactly::<f64, 2>(nums(body, "negbin")?, "negbin")?;
            RateSchedule::negative_binomial(r, q)
        }
        "pbd" => {
            let v: Vec<f64> = nums(body, "pbd")?;
            match v.as_slice() {
                [alpha, gamma] => RateSchedule::pbd2(*alpha, *gamma),
                [alpha, rest @ ..] if !rest.is_empty() => {
                    let mut death_poly = rest.to_vec();
                    death_poly.push(1.0);
                    RateSchedule::Pbd { alpha: *alpha, death_poly }
                }
                _ => return Err("pbd takes alpha and at least one death coefficient".into()),
            }
        }
        "custom" => {
            let (b, d) = body.split_once('/').ok_or("custom rates are birth,.../death,...")?;
            RateSchedule::Custom { birth: nums(b, "custom birth")?, death: nums(d, "custom death")? }
        }
        _ => return Err(format!("unknown rate schedule {head:?}")),
    })
}

/// Approximating laws for `tv --target`.
pub fn parse_target(s: &str) -> ParseResult<Target> {
    let (head, body) = split_head(s);
    let v: Vec<f64> = match head {
        "schedule" | "model" => Vec::new(),
        _ => nums(body, head)?,
    };
    Ok(match (head, v.as_slice()) {
        ("poisson" | "po", []) => Target::Poisson { lambda: None },
        ("poisson" | "po", [l]) => Target::Poisson { lambda: Some(*l) },
        ("tp", []) => Target::Tp { lambda: None, sigma2: None },
        ("tp", [l, s2]) => Target::Tp { lambda: Some(*l), sigma2: Some(*s2) },
        ("pbd", []) => Target::Pbd { alpha: None, gamma: None },
        ("pbd", [a, g]) => Target::Pbd { alpha: Some(*a), gamma: Some(*g) },
        ("geometric", []) => Target::Geometric { q: None },
        ("geometric", [q]) => Target::Geometric { q: Some(*q) },
        ("schedule", _) => Target::Schedule { schedule: parse_rates(body)? },
        ("model", _) => Target::Model { spec: parse_model(body)? },
        _ => return Err(format!("unknown or malformed target {s:?}")),
    })
}

/// A law: `point:k`, `uniform:a..b`, `pmf:offset:m0,m1,...`, a rate schedule
/// (its equilibrium) or a model (its exact law).
pub fn parse_law(s: &str, tol: f64, exec: Exec) -> ParseResult<FiniteDist> {
    let (head, body) = split_head(s);
    match head {
        "point" => Ok(FiniteDist::point(body.parse().map_err(|_| format!("bad point {body:?}"))?)),
        "uniform" => {
            let (a, b) = body.split_once("..").ok_or("uniform takes a..b")?;
            let a: i64 = a.trim().parse().map_err(|_| format!("bad bound {a:?}"))?;
            let b: i64 = b.trim().parse().map_err(|_| format!("bad bound {b:?}"))?;
            FiniteDist::uniform(a, b).map_err(|e| e.to_string())
        }
        "pmf" => {
            let (off, masses) = split_head(body);
            let off: i64 = off.parse().map_err(|_| format!("bad offset {off:?}"))?;
            make_dist(off, nums(masses, "pmf")?).map_err(|e| e.to_string())
        }
        _ => {
            if let Ok(r) = parse_rates(s) {
                return stationary_distribution(&r, tol).map_err(|e| e.to_string());
            }
            let model = parse_model(s).map_err(|_| format!("unknown law {s:?}"))?;
            model.exact_law(exec).map_err(|e| e.to_string())
        }
    }
}
