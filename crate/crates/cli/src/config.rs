//! Experiment configuration: one JSON object per run, validated field by
//! field so that errors point at the offending value.
//!
//! ```json
//! {"experiment": "trace", "group": "C2*C2*C2", "gamma": "a b",
//!  "nlist": [1000, 10000], "seeds": 200}
//! ```
//!
//! `seeds` is a list of integers, a range string `"a..b"` (inclusive), a
//! comma list string, or a count `k` meaning `seed, seed+1, ..., seed+k-1`.

use serde::Serialize;
use serde_json::Value;

use crate::error::SchemaError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Count,
    Fit,
    Saddle,
    Sample,
    Spectrum,
    Walk,
    Trace,
    ReproducePaper,
}

impl Experiment {
    pub const ALL: [(&'static str, Experiment); 8] = [
        ("count", Experiment::Count),
        ("fit", Experiment::Fit),
        ("saddle", Experiment::Saddle),
        ("sample", Experiment::Sample),
        ("spectrum", Experiment::Spectrum),
        ("walk", Experiment::Walk),
        ("trace", Experiment::Trace),
        ("reproduce-paper", Experiment::ReproducePaper),
    ];

    pub fn name(self) -> &'static str {
        Self::ALL.iter().find(|(_, e)| *e == self).map(|(n, _)| *n).expect("listed")
    }

    fn required(self) -> &'static [&'static str] {
        match self {
            Experiment::Count => &["group", "nmax"],
            Experiment::Fit => &["group", "gamma", "nmax"],
            Experiment::Saddle => &["group", "n"],
            Experiment::Sample => &["group", "n"],
            Experiment::Spectrum => &["group", "n"],
            Experiment::Walk => &["group", "pmax"],
            Experiment::Trace => &["group", "gamma", "nlist"],
            Experiment::ReproducePaper => &[],
        }
    }
}

/// A validated experiment configuration. Serializes back to a config that
/// `run_experiment` accepts, with seeds spelled out.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gens: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nmax: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nmin: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nlist: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pmax: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    pub seed: u64,
    pub seeds: Vec<u64>,
    pub dense: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criteria: Option<Vec<usize>>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            group: None,
            gamma: None,
            gens: None,
            nmax: None,
            nmin: None,
            points: None,
            n: None,
            nlist: None,
            q: None,
            s: None,
            pmax: None,
            model: None,
            seed: 0,
            seeds: Vec::new(),
            dense: false,
            precision: None,
            criteria: None,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self, SchemaError> {
        let v: Value = serde_json::from_str(text).map_err(|e| SchemaError::new("", format!("not valid JSON: {e}")))?;
        Self::from_value(&v)
    }

    pub fn from_value(v: &Value) -> Result<Self, SchemaError> {
        let obj = v.as_object().ok_or_else(|| SchemaError::new("", "config must be a JSON object"))?;
        let experiment = match obj.get("experiment") {
            None => return Err(SchemaError::new("/experiment", "missing required field")),
            Some(Value::String(s)) => Experiment::ALL
                .iter()
                .find(|(n, _)| n == s)
                .map(|(_, e)| *e)
                .ok_or_else(|| {
                    let names: Vec<&str> = Experiment::ALL.iter().map(|(n, _)| *n).collect();
                    SchemaError::new("/experiment", format!("unknown experiment {s:?}; expected one of {}", names.join(", ")))
                })?,
            Some(_) => return Err(SchemaError::new("/experiment", "expected a string")),
        };
        let mut c = ExperimentConfig::new(experiment);
        let mut seeds_raw = None;
        for (key, val) in obj {
            let ptr = format!("/{}", escape(key));
            match key.as_str() {
                "experiment" => {}
                "group" => c.group = Some(string(val, &ptr)?),
                "gamma" => c.gamma = Some(string(val, &ptr)?),
                "gens" => c.gens = Some(string(val, &ptr)?),
                "model" => c.model = Some(string(val, &ptr)?),
                "nmax" => c.nmax = Some(positive(val, &ptr)?),
                "nmin" => c.nmin = Some(positive(val, &ptr)?),
                "points" => c.points = Some(positive(val, &ptr)?),
                "n" => c.n = Some(positive(val, &ptr)?),
                "q" => c.q = Some(positive(val, &ptr)?),
                "s" => c.s = Some(positive(val, &ptr)?),
                "pmax" => c.pmax = Some(positive(val, &ptr)?),
                "precision" => c.precision = Some(positive(val, &ptr)?),
                "seed" => c.seed = uint(val, &ptr)?,
                "dense" => c.dense = val.as_bool().ok_or_else(|| SchemaError::new(&ptr, "expected a boolean"))?,
                "nlist" => c.nlist = Some(positive_list(val, &ptr)?),
                "criteria" => c.criteria = Some(positive_list(val, &ptr)?),
                "seeds" => seeds_raw = Some((val, ptr)),
                _ => return Err(SchemaError::new(ptr, "unknown field")),
            }
        }
        if let Some((val, ptr)) = seeds_raw {
            c.seeds = seeds(val, &ptr, c.seed)?;
        }
        for field in experiment.required() {
            if !obj.contains_key(*field) {
                return Err(SchemaError::new(format!("/{field}"), format!("required for experiment {:?}", experiment.name())));
            }
        }
        if let Some(nl) = &c.nlist {
            if nl.is_empty() {
                return Err(SchemaError::new("/nlist", "must not be empty"));
            }
        }
        Ok(c)
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

/// Parses a seed list written on the command line or in a config string.
pub fn parse_seeds(text: &str, base: u64) -> Result<Vec<u64>, String> {
    let t = text.trim();
    if t.is_empty() {
        return Ok(Vec::new());
    }
    if let Some((a, b)) = t.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| format!("bad range start in {t:?}"))?;
        let b: u64 = b.trim().parse().map_err(|_| format!("bad range end in {t:?}"))?;
        if b < a {
            return Err(format!("empty range {t:?}"));
        }
        return Ok((a..=b).collect());
    }
    if t.contains(',') {
        return t
            .split(',')
            .map(|x| x.trim().parse::<u64>().map_err(|_| format!("bad seed {x:?}")))
            .collect();
    }
    let k: u64 = t.parse().map_err(|_| format!("bad seed count {t:?}"))?;
    Ok((0..k).map(|i| base.wrapping_add(i)).collect())
}

fn escape(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}

fn string(v: &Value, ptr: &str) -> Result<String, SchemaError> {
    v.as_str().map(str::to_string).ok_or_else(|| SchemaError::new(ptr, "expected a string"))
}

fn uint(v: &Value, ptr: &str) -> Result<u64, SchemaError> {
    v.as_u64().ok_or_else(|| SchemaError::new(ptr, "expected a non-negative integer"))
}

fn positive(v: &Value, ptr: &str) -> Result<usize, SchemaError> {
    match v.as_u64() {
        Some(x) if x > 0 => Ok(x as usize),
        _ => Err(SchemaError::new(ptr, "expected a positive integer")),
    }
}

fn positive_list(v: &Value, ptr: &str) -> Result<Vec<usize>, SchemaError> {
    let arr = v.as_array().ok_or_else(|| SchemaError::new(ptr, "expected an array"))?;
    arr.iter().enumerate().map(|(i, x)| positive(x, &format!("{ptr}/{i}"))).collect()
}

fn seeds(v: &Value, ptr: &str, base: u64) -> Result<Vec<u64>, SchemaError> {
    match v {
        Value::Array(arr) => arr.iter().enumerate().map(|(i, x)| uint(x, &format!("{ptr}/{i}"))).collect(),
        Value::String(s) => parse_seeds(s, base).map_err(|m| SchemaError::new(ptr, m)),
        Value::Number(_) => {
            let k = uint(v, ptr)?;
            Ok((0..k).map(|i| base.wrapping_add(i)).collect())
        }
        _ => Err(SchemaError::new(ptr, "expected an array, a range string or a count")),
    }
}
