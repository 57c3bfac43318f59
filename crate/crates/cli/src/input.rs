use std::path::Path;

use anyhow::{bail, Context, Result};
use forestcalc::forest::Forest;
use forestcalc::rational::parse_rational;
use forestcalc::Rational;
use serde::de::DeserializeOwned;
use serde_json::Value;

/// Inline JSON if the argument starts with `[` or `{`, else a file path.
pub fn load_json(arg: &str) -> Result<Value> {
    let text = arg.trim_start();
    if text.starts_with('[') || text.starts_with('{') {
        return serde_json::from_str(text).context("parsing inline JSON");
    }
    let raw = std::fs::read_to_string(Path::new(arg)).with_context(|| format!("reading {arg}"))?;
    serde_json::from_str(&raw).with_context(|| format!("parsing {arg}"))
}

pub fn load<T: DeserializeOwned>(arg: &str) -> Result<T> {
    Ok(serde_json::from_value(load_json(arg)?)?)
}

pub fn rational(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => Ok(parse_rational(s)?),
        Value::Number(n) if n.is_i64() => Ok(parse_rational(&n.to_string())?),
        _ => bail!("expected a rational as \"p/q\" or an integer, got {v}"),
    }
}

fn pair(v: &Value) -> Result<(usize, usize)> {
    match v {
        Value::Array(xs) if xs.len() == 2 => {
            let get = |x: &Value| {
                x.as_u64()
                    .map(|x| x as usize)
                    .context("vertex must be a positive integer")
            };
            Ok((get(&xs[0])?, get(&xs[1])?))
        }
        Value::String(s) => {
            let (a, b) = s.split_once('-').context("link strings look like \"1-2\"")?;
            Ok((a.trim().parse()?, b.trim().parse()?))
        }
        _ => bail!("expected a link [i, j] or \"i-j\", got {v}"),
    }
}

/// `[[1,2],[2,3]]`, `["1-2","2-3"]` or `{"n": 4, "links": [...]}`. Without
/// an explicit vertex count the largest vertex (or `n`) is used.
pub fn forest(v: &Value, n: Option<usize>) -> Result<Forest> {
    let (links, declared) = match v {
        Value::Object(map) => (
            map.get("links").context("forest object needs \"links\"")?,
            map.get("n").and_then(Value::as_u64).map(|x| x as usize),
        ),
        other => (other, None),
    };
    let pairs = links
        .as_array()
        .context("links must be an array")?
        .iter()
        .map(pair)
        .collect::<Result<Vec<_>>>()?;
    let largest = pairs.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(1);
    let n = n.or(declared).unwrap_or(largest);
    Ok(Forest::from_pairs(n, &pairs)?)
}

pub fn rationals(v: &Value) -> Result<Vec<Rational>> {
    v.as_array()
        .context("expected an array of rationals")?
        .iter()
        .map(rational)
        .collect()
}
