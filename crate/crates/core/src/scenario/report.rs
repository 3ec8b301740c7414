use std::fmt::Write;

use super::emit::fmt_real;

/// Structured report data; maps keep insertion order.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    List(Vec<Value>),
    Map(Vec<(String, Value)>),
}

impl Value {
    pub fn map<K: Into<String>>(entries: impl IntoIterator<Item = (K, Value)>) -> Self {
        Self::Map(entries.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn nums(values: &[f64]) -> Self {
        Self::List(values.iter().map(|v| Self::Num(*v)).collect())
    }

    /// Looks up a key of a map.
    pub fn get(&self, key: &str) -> Option<&Value> {
        match self {
            Self::Map(es) => es.iter().find(|(k, _)| k == key).map(|(_, v)| v),
            _ => None,
        }
    }

    /// JSON text; numbers carry 17 significant digits, non-finite numbers
    /// become strings.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        self.write_json(&mut out, 0);
        out.push('\n');
        out
    }

    fn write_json(&self, out: &mut String, indent: usize) {
        let pad = |n: usize| "  ".repeat(n);
        match self {
            Self::Null => out.push_str("null"),
            Self::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Self::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Self::Num(v) if v.is_finite() => out.push_str(&fmt_real(*v)),
            Self::Num(v) => write_json_str(out, &v.to_string()),
            Self::Str(s) => write_json_str(out, s),
            Self::List(items) if items.is_empty() => out.push_str("[]"),
            Self::List(items) => {
                let scalar = items.iter().all(|v| !matches!(v, Self::List(_) | Self::Map(_)));
                if scalar {
                    out.push('[');
                    for (k, v) in items.iter().enumerate() {
                        if k > 0 {
                            out.push_str(", ");
                        }
                        v.write_json(out, indent);
                    }
                    out.push(']');
                } else {
                    out.push_str("[\n");
                    for (k, v) in items.iter().enumerate() {
                        out.push_str(&pad(indent + 1));
                        v.write_json(out, indent + 1);
                        out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
                    }
                    out.push_str(&pad(indent));
                    out.push(']');
                }
            }
            Self::Map(entries) if entries.is_empty() => out.push_str("{}"),
            Self::Map(entries) => {
                out.push_str("{\n");
                for (k, (key, v)) in entries.iter().enumerate() {
                    out.push_str(&pad(indent + 1));
                    write_json_str(out, key);
                    out.push_str(": ");
                    v.write_json(out, indent + 1);
                    out.push_str(if k + 1 < entries.len() { ",\n" } else { "\n" });
                }
                out.push_str(&pad(indent));
                out.push('}');
            }
        }
    }
}

fn write_json_str(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

/// How a metric is judged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Check {
    /// Reported only.
    Info,
    /// `|value − expected| ≤ tolerance`.
    Equal(f64),
    /// `value ≤ bound + tolerance`.
    AtMost(f64),
    /// `value ≥ bound − tolerance`.
    AtLeast(f64),
}

/// Scalar result with the tolerance it was judged against.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub check: Check,
}

impl Metric {
    pub fn info(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, check: Check::Info }
    }

    pub fn equal(name: &str, value: f64, expected: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, check: Check::Equal(expected) }
    }

    pub fn at_most(name: &str, value: f64, bound: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, check: Check::AtMost(bound) }
    }

    pub fn at_least(name: &str, value: f64, bound: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, check: Check::AtLeast(bound) }
    }

    /// `None` for informational metrics.
    pub fn pass(&self) -> Option<bool> {
        let v = self.value;
        let t = self.tolerance;
        match self.check {
            Check::Info => None,
            Check::Equal(e) => Some((v - e).abs() <= t),
            Check::AtMost(b) => Some(v <= b + t),
            Check::AtLeast(b) => Some(v >= b - t),
        }
    }

    fn to_value(&self) -> Value {
        let mut es = vec![("name", Value::Str(self.name.clone())), ("value", Value::Num(self.value))];
        let (relation, target) = match self.check {
            Check::Info => ("info", None),
            Check::Equal(e) => ("equal", Some(e)),
            Check::AtMost(b) => ("at-most", Some(b)),
            Check::AtLeast(b) => ("at-least", Some(b)),
        };
        es.push(("relation", Value::Str(relation.into())));
        es.push(("target", target.map_or(Value::Null, Value::Num)));
        es.push(("tolerance", Value::Num(self.tolerance)));
        es.push(("pass", self.pass().map_or(Value::Null, Value::Bool)));
        Value::map(es)
    }
}

/// One analysis in a report.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub metrics: Vec<Metric>,
    pub details: Vec<(String, Value)>,
    pub notes: Vec<String>,
}

impl Section {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), metrics: Vec::new(), details: Vec::new(), notes: Vec::new() }
    }

    pub fn metric(&mut self, m: Metric) -> &mut Self {
        self.metrics.push(m);
        self
    }

    pub fn detail(&mut self, key: &str, v: Value) -> &mut Self {
        self.details.push((key.into(), v));
        self
    }

    pub fn note(&mut self, n: impl Into<String>) -> &mut Self {
        self.notes.push(n.into());
        self
    }

    pub fn find(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }

    pub fn pass(&self) -> bool {
        self.metrics.iter().all(|m| m.pass() != Some(false))
    }

    fn to_value(&self) -> Value {
        Value::map([
            ("name", Value::Str(self.name.clone())),
            ("pass", Value::Bool(self.pass())),
            ("metrics", Value::List(self.metrics.iter().map(Metric::to_value).collect())),
            ("details", Value::Map(self.details.clone())),
            ("notes", Value::List(self.notes.iter().cloned().map(Value::Str).collect())),
        ])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub tool_version: String,
    pub format_version: String,
    pub seeds: Vec<(String, u64)>,
    pub tolerances: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub scenario: String,
    pub sections: Vec<Section>,
    pub provenance: Provenance,
}

impl Report {
    pub fn pass(&self) -> bool {
        self.sections.iter().all(Section::pass)
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn to_value(&self) -> Value {
        let p = &self.provenance;
        Value::map([
            ("scenario", Value::Str(self.scenario.clone())),
            ("pass", Value::Bool(self.pass())),
            (
                "provenance",
                Value::map([
                    ("tool_version", Value::Str(p.tool_version.clone())),
                    ("format_version", Value::Str(p.format_version.clone())),
                    ("fidelity_convention", Value::Str("uhlmann-squared".into())),
                    ("seeds", Value::map(p.seeds.iter().map(|(k, s)| (k.clone(), Value::Str(s.to_string()))))),
                    ("tolerances", Value::map(p.tolerances.iter().map(|(k, t)| (k.clone(), Value::Num(*t))))),
                ]),
            ),
            ("sections", Value::List(self.sections.iter().map(Section::to_value).collect())),
        ])
    }

    /// Machine-readable rendering.
    pub fn to_structured(&self) -> String {
        self.to_value().to_json()
    }

    /// Human-readable rendering with the same content.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let p = &self.provenance;
        let _ = writeln!(out, "scenario: {}", self.scenario);
        let _ = writeln!(out, "tool {} / format {}; fidelity: squared Uhlmann", p.tool_version, p.format_version);
        for (k, s) in &p.seeds {
            let _ = writeln!(out, "seed {k} = {s}");
        }
        for s in &self.sections {
            let _ = writeln!(out, "\n[{}] {}", if s.pass() { "PASS" } else { "FAIL" }, s.name);
            for m in &s.metrics {
                let verdict = match m.pass() {
                    None => "info",
                    Some(true) => "ok",
                    Some(false) => "FAILED",
                };
                let rel = match m.check {
                    Check::Info => String::new(),
                    Check::Equal(e) => format!(" (expected {e:.12} ± {:.1e})", m.tolerance),
                    Check::AtMost(b) => format!(" (≤ {b:.12} + {:.1e})", m.tolerance),
                    Check::AtLeast(b) => format!(" (≥ {b:.12} − {:.1e})", m.tolerance),
                };
                let _ = writeln!(out, "  {:<36} {:>18.12}{rel} {verdict}", m.name, m.value);
            }
            for (k, v) in &s.details {
                if let Value::Str(text) = v {
                    let _ = writeln!(out, "  {k}: {text}");
                } else {
                    let _ = writeln!(out, "  {k}: {}", compact(v));
                }
            }
            for n in &s.notes {
                let _ = writeln!(out, "  note: {n}");
            }
        }
        let _ = writeln!(out, "\noverall: {}", if self.pass() { "PASS" } else { "FAIL" });
        out
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::Null => "null".into(),
        Value::Bool(b) => b.to_string(),
        Value::Int(i) => i.to_string(),
        Value::Num(x) => format!("{x:.12}"),
        Value::Str(s) => s.clone(),
        Value::List(items) if items.len() > 8 => format!("[{} values]", items.len()),
        Value::List(items) => format!("[{}]", items.iter().map(compact).collect::<Vec<_>>().join(", ")),
        Value::Map(es) => {
            format!("{{{}}}", es.iter().map(|(k, v)| format!("{k}: {}", compact(v))).collect::<Vec<_>>().join(", "))
        }
    }
}
