//! CSV rendering of JSON reports as `path,value` rows.

use serde_json::Value;

pub fn to_csv(value: &Value) -> String {
    let mut out = String::from("path,value\n");
    flatten(value, String::new(), &mut out);
    out
}

fn flatten(v: &Value, path: String, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                flatten(x, join(&path, k), out);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(x, join(&path, &i.to_string()), out);
            }
        }
        Value::String(s) => {
            out.push_str(&format!("{path},{}\n", quote(s)));
        }
        other => out.push_str(&format!("{path},{other}\n")),
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn nested_paths() {
        let v = json!({"a": {"b": [1.5, "x,y"]}, "ok": true});
        assert_eq!(to_csv(&v), "path,value\na.b.0,1.5\na.b.1,\"x,y\"\nok,true\n");
    }
}
