//! JSON form of [`FunctionSpec`] and the `--function` argument syntax.
//!
//! ```json
//! {"kind": "threshold", "params": {"n": 13, "k": 13, "t": 7}}
//! {"kind": "monotone_lowerbound", "params": {"n": 20, "k": 10, "t": 3, "i_star": 0.25},
//!  "R": ["7", "b", "13"]}
//! {"kind": "general_lowerbound", "params": {"n": 4096, "k": 12},
//!  "R": {"predicate_seed": 17, "density": 0.001}}
//! ```
//!
//! Prefixes are hex integers with `x_1` at bit 0. Truth tables carry
//! `"table": "<hex>"`, bit `x` of the table being bit `x % 8` of byte `x / 8`.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use influence_core::zoo::{FunctionKind, FunctionSpec, PrefixSet};
use serde::{Deserialize, Serialize};

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub i_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PrefixDoc {
    Explicit(Vec<String>),
    Predicate {
        predicate_seed: u64,
        density: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weight: Option<u32>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDoc {
    pub kind: String,
    pub params: Params,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<PrefixDoc>,
}

fn need<T>(v: Option<T>, kind: &str, name: &str) -> Result<T> {
    v.ok_or_else(|| anyhow!("{kind} spec needs params.{name}"))
}

fn parse_prefix(s: &str) -> Result<u64> {
    let digits = s.strip_prefix("0x").unwrap_or(s);
    u64::from_str_radix(digits, 16).with_context(|| format!("bad hex prefix {s:?}"))
}

fn prefix_set(doc: Option<PrefixDoc>) -> Result<PrefixSet> {
    Ok(match doc {
        None => PrefixSet::empty(),
        Some(PrefixDoc::Explicit(v)) => PrefixSet::from_prefixes(v.iter().map(|s| parse_prefix(s)).collect::<Result<_>>()?),
        Some(PrefixDoc::Predicate { predicate_seed, density, weight }) => {
            PrefixSet::Predicate { seed: predicate_seed, density, weight }
        }
    })
}

fn prefix_doc(r: &PrefixSet) -> PrefixDoc {
    match r {
        PrefixSet::Explicit(v) => PrefixDoc::Explicit(v.iter().map(|p| format!("{p:x}")).collect()),
        PrefixSet::Predicate { seed, density, weight } => {
            PrefixDoc::Predicate { predicate_seed: *seed, density: *density, weight: *weight }
        }
    }
}

pub fn from_doc(doc: SpecDoc) -> Result<FunctionSpec> {
    let p = doc.params;
    let n = p.n;
    let kind = doc.kind.as_str();
    let fk = match kind {
        "constant" => FunctionKind::Constant(need(p.value, kind, "value")?),
        "dictator" => FunctionKind::Dictator { i: p.i.unwrap_or(1) },
        "threshold" => FunctionKind::Threshold { k: p.k.unwrap_or(n), t: need(p.t, kind, "t")? },
        "majority" => FunctionKind::Threshold { k: n, t: n / 2 + 1 },
        "parity" => FunctionKind::Parity { a: p.a.unwrap_or(1), b: p.b.unwrap_or(n) },
        "monotone_lowerbound" => {
            let t = need(p.t, kind, "t")?;
            let mut r = prefix_set(doc.r)?;
            if let PrefixSet::Predicate { weight: w @ None, .. } = &mut r {
                *w = Some(t as u32);
            }
            FunctionKind::MonotoneLowerBound { k: need(p.k, kind, "k")?, t, r, i_star: p.i_star.unwrap_or(0.0) }
        }
        "general_lowerbound" => FunctionKind::GeneralLowerBound { k: need(p.k, kind, "k")?, r: prefix_set(doc.r)? },
        "truth_table" => {
            let bytes = hex::decode(need(p.table, kind, "table")?).context("truth table is not hex")?;
            let need_bytes = (1usize << n).div_ceil(8);
            if bytes.len() != need_bytes {
                bail!("truth table for n={n} needs {need_bytes} bytes, got {}", bytes.len());
            }
            let mut table = vec![0u64; (1usize << n).div_ceil(64)];
            for (j, b) in bytes.iter().enumerate() {
                table[j / 8] |= (*b as u64) << (8 * (j % 8));
            }
            FunctionKind::TruthTable { table }
        }
        other => bail!("unknown function kind {other:?}"),
    };
    Ok(FunctionSpec::new(n, fk)?)
}

pub fn to_doc(spec: &FunctionSpec) -> SpecDoc {
    let n = spec.dim();
    let mut params = Params { n, ..Params::default() };
    let mut r = None;
    let kind = match spec.kind() {
        FunctionKind::Constant(v) => {
            params.value = Some(*v);
            "constant"
        }
        FunctionKind::Dictator { i } => {
            params.i = Some(*i);
            "dictator"
        }
        FunctionKind::Threshold { k, t } => {
            params.k = Some(*k);
            params.t = Some(*t);
            "threshold"
        }
        FunctionKind::Parity { a, b } => {
            params.a = Some(*a);
            params.b = Some(*b);
            "parity"
        }
        FunctionKind::MonotoneLowerBound { k, t, r: set, i_star } => {
            params.k = Some(*k);
            params.t = Some(*t);
            params.i_star = Some(*i_star);
            r = Some(prefix_doc(set));
            "monotone_lowerbound"
        }
        FunctionKind::GeneralLowerBound { k, r: set } => {
            params.k = Some(*k);
            r = Some(prefix_doc(set));
            "general_lowerbound"
        }
        FunctionKind::TruthTable { table } => {
            let bytes: Vec<u8> = table.iter().flat_map(|w| w.to_le_bytes()).take((1usize << n).div_ceil(8)).collect();
            params.table = Some(hex::encode(bytes));
            "truth_table"
        }
    };
    SpecDoc { kind: kind.into(), params, r }
}

pub fn to_json(spec: &FunctionSpec) -> String {
    serde_json::to_string(&to_doc(spec)).expect("spec documents always serialize")
}

pub fn from_json(text: &str) -> Result<FunctionSpec> {
    from_doc(serde_json::from_str(text).context("malformed function spec JSON")?)
}

/// Resolves a `--function` argument: inline JSON, `@path` to a JSON file,
/// or a named member (`majority`, `parity`, `constant0`, `constant1`,
/// `dictator`, `dictator:I`, `threshold:K:T`) over `n` coordinates.
pub fn parse_function_arg(arg: &str, n: Option<usize>) -> Result<FunctionSpec> {
    let arg = arg.trim();
    let spec = if arg.starts_with('{') {
        from_json(arg)?
    } else if let Some(path) = arg.strip_prefix('@') {
        let text = std::fs::read_to_string(Path::new(path)).with_context(|| format!("reading {path}"))?;
        from_json(&text)?
    } else {
        let n = n.ok_or_else(|| anyhow!("--n is required for named function {arg:?}"))?;
        let parts: Vec<&str> = arg.split(':').collect();
        let num = |s: &str| s.parse::<usize>().with_context(|| format!("bad number {s:?} in {arg:?}"));
        match parts.as_slice() {
            ["majority"] => FunctionSpec::majority(n),
            ["parity"] => FunctionSpec::parity_all(n),
            ["constant0"] => FunctionSpec::constant(n, false),
            ["constant1"] => FunctionSpec::constant(n, true),
            ["dictator"] => FunctionSpec::dictator(n, 1)?,
            ["dictator", i] => FunctionSpec::dictator(n, num(i)?)?,
            ["threshold", k, t] => FunctionSpec::threshold(n, num(k)?, num(t)?)?,
            _ => bail!("unknown function {arg:?}"),
        }
    };
    if let Some(n) = n {
        if spec.dim() != n {
            bail!("--n {n} disagrees with the spec's n={}", spec.dim());
        }
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use influence_core::RngStream;

    #[test]
    fn named_members() {
        assert_eq!(parse_function_arg("majority", Some(7)).unwrap(), FunctionSpec::majority(7));
        assert_eq!(parse_function_arg("dictator:3", Some(4)).unwrap(), FunctionSpec::dictator(4, 3).unwrap());
        assert_eq!(parse_function_arg("threshold:4:2", Some(9)).unwrap(), FunctionSpec::threshold(9, 4, 2).unwrap());
        assert!(parse_function_arg("majority", None).is_err());
        assert!(parse_function_arg("tribes", Some(4)).is_err());
    }

    #[test]
    fn inline_json() {
        let s = parse_function_arg(r#"{"kind":"threshold","params":{"n":5,"k":4,"t":2}}"#, None).unwrap();
        assert_eq!(s, FunctionSpec::threshold(5, 4, 2).unwrap());
        let s = parse_function_arg(r#"{"kind":"general_lowerbound","params":{"n":8,"k":4},"R":["5","0xa"]}"#, Some(8)).unwrap();
        assert_eq!(s.prefix_set().unwrap().1, &PrefixSet::Explicit(vec![5, 10]));
        assert!(parse_function_arg(r#"{"kind":"threshold","params":{"n":5,"t":2}}"#, Some(6)).is_err());
    }

    #[test]
    fn round_trip() {
        let mut rng = RngStream::new(1, 0);
        let r = PrefixSet::sample_weight_class(6, 2, 5, &mut rng).unwrap();
        let specs = vec![
            FunctionSpec::constant(4, true),
            FunctionSpec::dictator(4, 2).unwrap(),
            FunctionSpec::majority(9),
            FunctionSpec::parity(6, 2, 5).unwrap(),
            FunctionSpec::new(12, FunctionKind::MonotoneLowerBound { k: 6, t: 2, r, i_star: 0.5 }).unwrap(),
            FunctionSpec::new(
                30,
                FunctionKind::GeneralLowerBound { k: 5, r: PrefixSet::Predicate { seed: 3, density: 0.25, weight: None } },
            )
            .unwrap(),
            FunctionSpec::truth_table_from_fn(3, |x| x % 3 == 0).unwrap(),
            FunctionSpec::truth_table_from_fn(8, |x| x.count_ones() > 5).unwrap(),
        ];
        for s in specs {
            assert_eq!(from_json(&to_json(&s)).unwrap(), s, "{}", to_json(&s));
        }
    }
}
