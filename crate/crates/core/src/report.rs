//! Serialization helpers shared by the report types.

use num::{BigRational, One};
use serde::Serializer;

use crate::linalg::IndexSet;

/// Exact fraction as `"a/b"`, or `"a"` for integers.
pub fn format_ratio(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub(crate) fn ratio_string<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_ratio(r))
}

pub(crate) fn one_based_sets<S: Serializer>(sets: &[IndexSet], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(sets.iter().map(IndexSet::one_based))
}

pub(crate) fn one_based_set<S: Serializer>(set: &IndexSet, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(set.one_based())
}

/// Rounds to 12 significant digits.
pub fn round_sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Rounds every float in a JSON tree to 12 significant digits so re-runs print
/// byte-identical output.
pub fn canonicalize_floats(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Number(n) if n.is_f64() => {
            if let Some(num) = n.as_f64().and_then(|x| serde_json::Number::from_f64(round_sig12(x))) {
                *n = num;
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(canonicalize_floats),
        serde_json::Value::Object(map) => map.values_mut().for_each(canonicalize_floats),
        _ => {}
    }
}

/// Pretty JSON with canonical floats and a trailing newline.
pub fn to_canonical_json<T: serde::Serialize>(value: &T) -> serde_json::Result<String> {
    let mut v = serde_json::to_value(value)?;
    canonicalize_floats(&mut v);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}
