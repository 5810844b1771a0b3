//! Output envelope and the json, csv and human renderings.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::Format;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Rounds every float in `v` to 12 significant digits.
pub fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
            serde_json::Number::from_f64(r).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

#[derive(Serialize)]
pub struct Envelope {
    pub config: Value,
    pub result: Value,
    pub version: &'static str,
}

impl Envelope {
    pub fn new(config: Value, result: Value) -> Self {
        Self { config: round_value(config), result: round_value(result), version: VERSION }
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(o) => o.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

type Row = Map<String, Value>;

/// Rows of flat objects sharing one key set render as a table.
fn as_table(v: &Value) -> Option<(Vec<String>, Vec<&Row>)> {
    let rows: Vec<&Row> = v.as_array()?.iter().map(Value::as_object).collect::<Option<_>>()?;
    let first = rows.first()?;
    let header: Vec<String> = first.keys().cloned().collect();
    let flat = rows.iter().all(|r| r.keys().eq(first.keys()) && r.values().all(|x| !x.is_object() && !x.is_array()));
    flat.then_some((header, rows))
}

pub fn to_csv(env: &Envelope) -> String {
    let mut out = String::new();
    let mut cfg = Vec::new();
    flatten("config", &env.config, &mut cfg);
    cfg.push(("version".into(), env.version.into()));
    for (k, v) in cfg {
        out.push_str(&format!("# {k}={v}\n"));
    }
    if let Some((header, rows)) = as_table(&env.result) {
        out.push_str(&header.iter().map(|h| csv_field(h)).collect::<Vec<_>>().join(","));
        out.push('\n');
        for r in rows {
            out.push_str(&r.values().map(|v| csv_field(&scalar(v))).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
    } else {
        let mut rows = Vec::new();
        flatten("", &env.result, &mut rows);
        out.push_str("key,value\n");
        for (k, v) in rows {
            out.push_str(&format!("{},{}\n", csv_field(&k), csv_field(&v)));
        }
    }
    out
}

pub fn to_human(env: &Envelope) -> String {
    let mut rows = Vec::new();
    flatten("", &env.result, &mut rows);
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
}

/// The 2-runs table with rows `n` and columns `p`, four decimals.
pub fn runs_table_human(cells: &[bdstein::bounds::RunsTableCell]) -> String {
    use bdstein::bounds::{RUNS_TABLE_N, RUNS_TABLE_P};
    let mut out = format!("{:>8}", "n \\ p");
    for p in RUNS_TABLE_P {
        out.push_str(&format!("{p:>9.2}"));
    }
    out.push('\n');
    for (i, n) in RUNS_TABLE_N.iter().enumerate() {
        out.push_str(&format!("{:>8}", format!("10^{}", n.log10().round())));
        for c in &cells[i * RUNS_TABLE_P.len()..(i + 1) * RUNS_TABLE_P.len()] {
            out.push_str(&format!("{:>9.4}", c.value));
        }
        out.push('\n');
    }
    out
}

pub fn render(env: &Envelope, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(env).unwrap_or_default();
            s.push('\n');
            s
        }
        Format::Csv => to_csv(env),
        Format::Human => to_human(env),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rounds_to_twelve_digits() {
        let v = round_value(json!({"a": [0.1234567890123456, 2.0], "b": 1u64, "c": 1e-20 / 3.0}));
        assert_eq!(v["a"][0], json!(0.123456789012));
        assert_eq!(v["a"][1], json!(2.0));
        assert_eq!(v["b"], json!(1));
        assert_eq!(v["c"].as_f64().unwrap().to_string(), "0.00000000000000000000333333333333");
    }

    #[test]
    fn csv_tables_and_pairs() {
        let env = Envelope::new(json!({"seed": 1}), json!([{"n": 1, "p": 0.5}, {"n": 2, "p": 0.25}]));
        assert_eq!(to_csv(&env), format!("# config.seed=1\n# version={VERSION}\nn,p\n1,0.5\n2,0.25\n"));
        let env = Envelope::new(json!({}), json!({"value": 0.25, "terms": {"x": 1.5}, "name": "a,b"}));
        let csv = to_csv(&env);
        assert!(csv.contains("value,0.25\n") && csv.contains("terms.x,1.5\n") && csv.contains("name,\"a,b\"\n"));
    }
}
