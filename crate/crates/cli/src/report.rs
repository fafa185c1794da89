//! The report envelope shared by every subcommand, its JSON encoding and the
//! plain-text rendering of the same tree.

use std::fmt::Write as _;
use std::io::{self, Write};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Serialize)]
pub struct CommandEcho {
    pub name: String,
    pub argv: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: CommandEcho,
    pub metric: Option<MetricDigest>,
    pub parameters: Value,
    pub results: Value,
    pub warnings: Vec<String>,
    pub wall_time_ms: f64,
}

/// Floats in scientific notation with 17 significant digits, which
/// round-trips every finite `f64`.
pub fn format_f64(v: f64) -> String {
    if v == 0.0 {
        // keep the sign of negative zero out of reports
        return "0.0".to_string();
    }
    format!("{v:.16e}")
}

struct Precise<F>(F);

impl<F: Formatter> Formatter for Precise<F> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn end_object_key<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_key(writer)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

pub fn to_json<T: Serialize>(value: &T, pretty: bool) -> serde_json::Result<String> {
    let mut out = Vec::new();
    if pretty {
        let mut ser = serde_json::Serializer::with_formatter(&mut out, Precise(PrettyFormatter::with_indent(b"  ")));
        value.serialize(&mut ser)?;
    } else {
        let mut ser = serde_json::Serializer::with_formatter(&mut out, Precise(CompactFormatter));
        value.serialize(&mut ser)?;
    }
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

/// Exact integers: a JSON number when it fits in `i64`, a decimal string otherwise.
pub fn big(v: &BigInt) -> Value {
    match v.to_i64() {
        Some(i) => Value::from(i),
        None => Value::String(v.to_string()),
    }
}

pub fn bigs(v: &[BigInt]) -> Value {
    Value::Array(v.iter().map(big).collect())
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => "null".to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_i64(), n.as_u64(), n.as_f64()) {
            (Some(i), _, _) => i.to_string(),
            (_, Some(u), _) => u.to_string(),
            (_, _, Some(f)) => format_f64(f),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Array(items) => format!("[{}]", items.iter().map(scalar).collect::<Vec<_>>().join(", ")),
        Value::Object(_) => "{..}".to_string(),
    }
}

fn is_inline(v: &Value) -> bool {
    match v {
        Value::Object(_) => false,
        Value::Array(items) => items.iter().all(is_inline),
        _ => true,
    }
}

fn render_map(out: &mut String, map: &Map<String, Value>, indent: usize) {
    for (key, value) in map {
        render_entry(out, key, value, indent);
    }
}

fn render_entry(out: &mut String, key: &str, value: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    if is_inline(value) {
        let _ = writeln!(out, "{pad}{key}: {}", scalar(value));
        return;
    }
    let _ = writeln!(out, "{pad}{key}:");
    match value {
        Value::Object(map) => render_map(out, map, indent + 1),
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                render_entry(out, &format!("[{i}]"), item, indent + 1);
            }
        }
        _ => unreachable!("scalars are inline"),
    }
}

/// Indented `key: value` rendering of the JSON tree of `report`.
pub fn to_text(report: &Report) -> String {
    let tree = serde_json::to_value(report).expect("report serializes");
    let mut out = String::new();
    if let Value::Object(map) = tree {
        render_map(&mut out, &map, 0);
    }
    out
}
