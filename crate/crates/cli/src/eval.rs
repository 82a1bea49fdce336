//! `eval` subcommands: one quantity in, one JSON document out.

use estermann_core::estermann::{estermann_parts, ShiftPair};
use estermann_core::expsums::{kloosterman_sum, weil_bound};
use estermann_core::characters::l_values;
use estermann_core::rationals::{cf_expand, dedekind_sum, ReducedFraction};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::render::complex_json;

fn fraction(a: u64, q: u64) -> Result<ReducedFraction, String> {
    ReducedFraction::new(a, q).map_err(|e| format!("--a {a} --q {q}: {e}"))
}

pub fn estermann(
    s: Complex64,
    a: u64,
    q: u64,
    alpha: Complex64,
    beta: Complex64,
) -> Result<Value, String> {
    let shift = ShiftPair::new_wide(alpha, beta).map_err(|e| e.to_string())?;
    let x = fraction(a, q)?;
    let parts = estermann_parts(s, &shift, &x);
    // the even part owns the polar line, so it and the full value can be
    // unavailable while the odd part never is; poles print as null
    let or_null = |v: Result<Complex64, _>| match v {
        Ok(z) => complex_json(z),
        Err(_) => Value::Null,
    };
    Ok(json!({
        "command": "estermann",
        "s": complex_json(s),
        "x": format!("{}/{}", x.a(), x.q()),
        "alpha": complex_json(alpha),
        "beta": complex_json(beta),
        "value": or_null(parts.eval()),
        "cos": or_null(parts.cos()),
        "sin": complex_json(parts.sin()),
    }))
}

pub fn lvalue(q: u64, s: Complex64, index: Option<usize>) -> Result<Value, String> {
    let table = l_values(q, s).map_err(|e| e.to_string())?;
    let count = table.values().len();
    let mut doc = json!({
        "command": "lvalue",
        "q": q,
        "s": complex_json(s),
        "count": count,
    });
    let obj = doc.as_object_mut().expect("object");
    match index {
        Some(j) => {
            if j >= count {
                return Err(format!("--index {j} out of range, {count} characters mod {q}"));
            }
            obj.insert("index".into(), json!(j));
            obj.insert("value".into(), complex_json(table.at(j)));
        }
        None => {
            let all: Vec<Value> = table.values().iter().map(|&z| complex_json(z)).collect();
            obj.insert("values".into(), Value::Array(all));
        }
    }
    Ok(doc)
}

pub fn dedekind(a: i64, q: u64) -> Result<Value, String> {
    let value = dedekind_sum(a, q).map_err(|e| e.to_string())?;
    Ok(json!({
        "command": "dedekind",
        "a": a,
        "q": q,
        "value": format!("{}/{}", value.numer(), value.denom()),
    }))
}

pub fn cf(a: u64, q: u64) -> Result<Value, String> {
    let x = fraction(a, q)?;
    let expansion = cf_expand(x);
    Ok(json!({
        "command": "cf",
        "x": format!("{}/{}", x.a(), x.q()),
        "quotients": expansion.quotients,
        "trailing_one": expansion.trailing_one,
        "depth": expansion.depth(),
    }))
}

pub fn kloosterman(m: u64, n: u64, l: u64) -> Result<Value, String> {
    if l == 0 {
        return Err("--l must be positive".into());
    }
    let value = kloosterman_sum(m, n, l);
    let bound = weil_bound(m, n, l);
    Ok(json!({
        "command": "kloosterman",
        "m": m,
        "n": n,
        "l": l,
        "value": complex_json(value),
        "weil_bound": bound,
        "within_bound": value.norm() <= bound + 1e-9,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documents_carry_their_inputs() {
        let doc = dedekind(1, 3).unwrap();
        assert_eq!(doc["value"], "1/18");

        let doc = cf(5, 7).unwrap();
        assert_eq!(doc["quotients"], json!([1, 2, 1]));
        assert_eq!(doc["trailing_one"], json!(true));

        let doc = kloosterman(1, 1, 5).unwrap();
        assert_eq!(doc["within_bound"], json!(true));

        let doc = lvalue(7, Complex64::new(0.5, 0.0), Some(3)).unwrap();
        assert!(doc["value"]["re"].is_f64());
        assert!(lvalue(7, Complex64::new(0.5, 0.0), Some(9)).is_err());
    }

    #[test]
    fn pole_maps_to_null_instead_of_failing() {
        let zero = Complex64::new(0.0, 0.0);
        let doc = estermann(Complex64::new(1.0, 0.0), 2, 7, zero, zero).unwrap();
        assert!(doc["value"].is_null());
        assert!(doc["cos"].is_null());
        assert!(doc["sin"]["re"].is_f64());
    }
}
