//! JSON report assembly. Numbers are written with 17 significant digits and
//! object keys are sorted, so reports are byte-stable.

use nalgebra::DMatrix;
use ncfock::ncpoly::MatPoly;
use ncfock::scalar::Cx;
use serde_json::{json, Map, Number, Value};
use std::str::FromStr;

pub const SCHEMA: &str = "ncfock/1";

pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let x = if x == 0.0 { 0.0 } else { x };
    Value::Number(Number::from_str(&format!("{x:.16e}")).expect("formatted float is valid JSON"))
}

pub fn complex(z: Cx<f64>) -> Value {
    json!([num(z.re), num(z.im)])
}

pub fn matrix(m: &DMatrix<Cx<f64>>) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| complex(m[(i, j)])).collect())).collect())
}

pub fn symbol(p: &MatPoly<f64>) -> Value {
    let terms: Vec<Value> = p.terms().map(|(w, m)| json!({"word": w.letters().collect::<Vec<_>>(), "matrix": matrix(m)})).collect();
    json!({
        "d": p.d(),
        "rows": p.rows(),
        "cols": p.cols(),
        "degree": p.degree(),
        "expr": p.to_expr(),
        "terms": terms,
    })
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

/// Top-level envelope shared by every subcommand.
pub fn envelope(command: &str, inputs: Value, window: Value, results: Value, tol: f64) -> Value {
    let mut m = Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("command".into(), json!(command));
    m.insert("inputs".into(), inputs);
    m.insert("window".into(), window);
    m.insert("results".into(), results);
    m.insert(
        "provenance".into(),
        json!({
            "tol": num(tol),
            "rank_cut": "max(max(rows, cols) * eps * sigma_max, tol)",
            "generator": concat!("ncfock ", env!("CARGO_PKG_VERSION")),
        }),
    );
    Value::Object(m)
}
