use std::collections::BTreeMap;

use serde_json::Value;

/// `%.17g`.
pub fn fmt_g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..17).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mant), exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (16 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn number(n: &serde_json::Number) -> String {
    match (n.as_u64(), n.as_i64(), n.as_f64()) {
        (Some(u), _, _) => u.to_string(),
        (_, Some(i), _) => i.to_string(),
        (_, _, Some(f)) => fmt_g17(f),
        _ => n.to_string(),
    }
}

/// Compact JSON with sorted keys and `%.17g` floats.
pub fn to_json(v: &Value) -> String {
    let mut out = String::new();
    write_json(v, &mut out);
    out
}

fn write_json(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&number(n)),
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string")),
        Value::Array(a) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_json(x, out);
            }
            out.push(']');
        }
        Value::Object(m) => {
            let sorted: BTreeMap<&String, &Value> = m.iter().collect();
            out.push('{');
            for (i, (k, x)) in sorted.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("key"));
                out.push(':');
                write_json(x, out);
            }
            out.push('}');
        }
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut BTreeMap<String, String>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&key(k), x, out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&key(&i.to_string()), x, out);
            }
        }
        Value::String(s) => {
            out.insert(prefix.to_string(), s.clone());
        }
        Value::Number(n) => {
            out.insert(prefix.to_string(), number(n));
        }
        Value::Bool(b) => {
            out.insert(prefix.to_string(), b.to_string());
        }
        Value::Null => {
            out.insert(prefix.to_string(), String::new());
        }
    }
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One line per row with the sorted union of the flattened keys as header.
pub fn to_csv_table(rows: &[Value]) -> String {
    let flat: Vec<BTreeMap<String, String>> = rows
        .iter()
        .map(|r| {
            let mut m = BTreeMap::new();
            flatten("", r, &mut m);
            m
        })
        .collect();
    let mut header: Vec<&String> = flat.iter().flat_map(|m| m.keys()).collect();
    header.sort();
    header.dedup();
    let mut out = header.iter().map(|h| csv_cell(h)).collect::<Vec<_>>().join(",");
    out.push('\n');
    for m in &flat {
        let line: Vec<String> = header.iter().map(|h| csv_cell(m.get(*h).map(String::as_str).unwrap_or(""))).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// `key,value` lines for a report without a natural table.
pub fn to_csv_flat(v: &Value) -> String {
    let mut m = BTreeMap::new();
    flatten("", v, &mut m);
    let mut out = String::from("key,value\n");
    for (k, x) in m {
        out.push_str(&format!("{},{}\n", csv_cell(&k), csv_cell(&x)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn g17_matches_printf() {
        assert_eq!(fmt_g17(0.5), "0.5");
        assert_eq!(fmt_g17(0.1), "0.10000000000000001");
        assert_eq!(fmt_g17(1e-8), "1e-08");
        assert_eq!(fmt_g17(1e16), "10000000000000000");
        assert_eq!(fmt_g17(1.5e17), "1.5e+17");
        assert_eq!(fmt_g17(0.00012345), "0.00012344999999999999");
        assert_eq!(fmt_g17(123456.0), "123456");
        assert_eq!(fmt_g17(-2.5e20), "-2.5e+20");
        assert_eq!(fmt_g17(std::f64::consts::FRAC_1_SQRT_2), "0.70710678118654757");
        assert_eq!(fmt_g17(1e-4), "0.0001");
    }

    #[test]
    fn keys_are_sorted() {
        let v = json!({"b": 1, "a": {"d": 0.25, "c": [true, null]}});
        assert_eq!(to_json(&v), r#"{"a":{"c":[true,null],"d":0.25},"b":1}"#);
    }

    #[test]
    fn csv_table_has_fixed_header() {
        let rows = vec![json!({"q": "1/2", "v": [1.0, 0.0]}), json!({"q": "0", "v": [0.5, 0.0], "x": "a,b"})];
        assert_eq!(to_csv_table(&rows), "q,v.0,v.1,x\n1/2,1,0,\n0,0.5,0,\"a,b\"\n");
    }
}
