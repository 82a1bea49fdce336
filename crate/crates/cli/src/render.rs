//! Shared text plumbing: complex-number argument parsing, JSON field
//! helpers, and the output sink (stdout or a file given by `--output`).

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde_json::{json, Value};

pub fn open_sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

/// Parse `0.7`, `2i`, `0.5+2i`, `0.7-1i`, `-i`. Whitespace is ignored.
pub fn parse_complex_arg(text: &str) -> Result<Complex64, String> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err("empty complex literal".into());
    }
    let bad = |part: &str| format!("cannot parse '{part}' in complex literal '{text}'");
    if !t.ends_with('i') {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad(&t));
    }
    let body = &t[..t.len() - 1];
    let unit = |sign: &str| match sign {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        other => other.parse::<f64>().map_err(|_| bad(other)),
    };
    // split at the last sign that is not a leading sign or an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().map_err(|_| bad(&body[..i]))?;
            Ok(Complex64::new(re, unit(&body[i..])?))
        }
        None => Ok(Complex64::new(0.0, unit(body)?)),
    }
}

pub fn complex_json(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

/// One JSON document per line, stamped with the tool version and the
/// configuration hash.
pub fn emit_doc(
    out: &mut dyn Write,
    config_hash: &str,
    mut doc: Value,
) -> io::Result<()> {
    let obj = doc.as_object_mut().expect("documents are objects");
    obj.insert("tool_version".into(), json!(env!("CARGO_PKG_VERSION")));
    obj.insert("config_hash".into(), json!(config_hash));
    writeln!(out, "{doc}")
}

/// Decimal text for a CSV cell. `Display` prints the shortest digit string
/// that round-trips, so equal inputs always yield equal bytes.
pub fn float_cell(x: f64) -> String {
    format!("{x}")
}

pub fn opt_float_cell(x: Option<f64>) -> String {
    x.map(float_cell).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals_parse() {
        let cases = [
            ("0.5", 0.5, 0.0),
            ("-2", -2.0, 0.0),
            ("0.5+2i", 0.5, 2.0),
            ("0.7-1i", 0.7, -1.0),
            ("2i", 0.0, 2.0),
            ("-i", 0.0, -1.0),
            ("i", 0.0, 1.0),
            ("1e-3+2.5e2i", 1e-3, 250.0),
            (" 0.3 - 0.25i ", 0.3, -0.25),
        ];
        for (text, re, im) in cases {
            let z = parse_complex_arg(text).unwrap();
            assert_eq!((z.re, z.im), (re, im), "literal {text}");
        }
        assert!(parse_complex_arg("").is_err());
        assert!(parse_complex_arg("5+quail").is_err());
        assert!(parse_complex_arg("1+2j").is_err());
    }

    #[test]
    fn float_cells_round_trip() {
        for x in [0.1, -3.0, 1.0 / 3.0, 6.02e23, f64::MIN_POSITIVE] {
            assert_eq!(float_cell(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(opt_float_cell(None), "");
    }
}
