use std::fmt::Write;

use serde_json::Value;

struct Paint(bool);

impl Paint {
    fn wrap(&self, code: &str, s: &str) -> String {
        if self.0 {
            format!("\x1b[{code}m{s}\x1b[0m")
        } else {
            s.to_string()
        }
    }
}

fn loc(v: &Value) -> String {
    format!(
        "{}.{}:{}",
        v["class"].as_str().unwrap_or("?"),
        v["method"].as_str().unwrap_or("?"),
        v["index"]
    )
}

/// Human-readable summary of a serialized report.
pub fn render_text(report_json: &str, color: bool) -> Result<String, serde_json::Error> {
    let r: Value = serde_json::from_str(report_json)?;
    let paint = Paint(color);
    let mut out = String::new();
    let findings = r["findings"].as_array().cloned().unwrap_or_default();
    let digest = r["input_digest"].as_str().unwrap_or("");
    writeln!(
        out,
        "pdaudit report v{}  input {}",
        r["version"].as_str().unwrap_or("?"),
        &digest[..digest.len().min(12)]
    )
    .unwrap();
    writeln!(out, "{} finding(s)", findings.len()).unwrap();
    for f in &findings {
        let kind = f["kind"].as_str().unwrap_or("?");
        let code = match kind {
            "RawFlow" => "31",
            "PseudonymizedFlow" => "33",
            _ => "36",
        };
        let target = match f.get("sink") {
            Some(s) => match s["name"].as_str() {
                Some(n) => format!("{} {} at {}", s["kind"].as_str().unwrap_or("?"), n, loc(&s["location"])),
                None => format!("{} at {}", s["kind"].as_str().unwrap_or("?"), loc(&s["location"])),
            },
            None => "no sink".to_string(),
        };
        writeln!(
            out,
            "  #{} {} risk {}  {} from {} -> {}",
            f["id"],
            paint.wrap(code, kind),
            f["risk"],
            f["category"].as_str().unwrap_or("?"),
            loc(&f["source_location"]),
            target
        )
        .unwrap();
        if let Some(m) = f["manipulations"].as_array().filter(|m| !m.is_empty()) {
            let names: Vec<&str> = m.iter().filter_map(Value::as_str).collect();
            writeln!(out, "      via {}", names.join(", ")).unwrap();
        }
    }
    if let Some(ds) = r["data_safety"].as_object().filter(|d| !d.is_empty()) {
        writeln!(out, "data safety draft:").unwrap();
        for (cat, v) in ds {
            let shared: Vec<&str> = v["shared_with"]
                .as_array()
                .map(|a| a.iter().filter_map(Value::as_str).collect())
                .unwrap_or_default();
            let shared = if shared.is_empty() {
                "nobody".to_string()
            } else {
                shared.join(", ")
            };
            writeln!(
                out,
                "  {cat}: collected, shared with {shared}, security {}",
                v["security"].as_str().unwrap_or("?")
            )
            .unwrap();
        }
    }
    Ok(out)
}
