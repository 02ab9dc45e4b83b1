//! Diagnostics reports and plot tables.
//!
//! A [`Report`] is an ordered list of `path = value` entries. The structured
//! form writes floats in shortest round-trip notation, so parsing a report
//! and writing it again reproduces the same bytes.

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Value {
    fn structured(&self) -> String {
        match self {
            Value::Num(x) => format!("{x:e}"),
            Value::Int(i) => i.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Text(s) => format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"")),
        }
    }

    fn human(&self) -> String {
        match self {
            Value::Num(x) => format!("{x:.6e}"),
            Value::Text(s) => s.clone(),
            other => other.structured(),
        }
    }

    fn parse(raw: &str) -> Option<Value> {
        if let Some(inner) = raw.strip_prefix('"').and_then(|r| r.strip_suffix('"')) {
            return Some(Value::Text(inner.replace("\\\"", "\"").replace("\\\\", "\\")));
        }
        match raw {
            "true" => return Some(Value::Bool(true)),
            "false" => return Some(Value::Bool(false)),
            _ => {}
        }
        if let Ok(i) = raw.parse::<i64>() {
            return Some(Value::Int(i));
        }
        raw.parse::<f64>().ok().map(Value::Num)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Num(x) => Some(*x),
            Value::Int(i) => Some(*i as f64),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub entries: Vec<(String, Value)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, path: impl Into<String>, value: Value) {
        self.entries.push((path.into(), value));
    }

    pub fn num(&mut self, path: impl Into<String>, x: f64) {
        self.push(path, Value::Num(x));
    }

    pub fn int(&mut self, path: impl Into<String>, i: usize) {
        self.push(path, Value::Int(i as i64));
    }

    pub fn flag(&mut self, path: impl Into<String>, b: bool) {
        self.push(path, Value::Bool(b));
    }

    pub fn text(&mut self, path: impl Into<String>, s: impl Into<String>) {
        self.push(path, Value::Text(s.into()));
    }

    pub fn extend(&mut self, other: Report) {
        self.entries.extend(other.entries);
    }

    pub fn get(&self, path: &str) -> Option<&Value> {
        self.entries.iter().find(|(p, _)| p == path).map(|(_, v)| v)
    }

    pub fn number(&self, path: &str) -> Option<f64> {
        self.get(path).and_then(Value::as_f64)
    }

    pub fn boolean(&self, path: &str) -> Option<bool> {
        match self.get(path) {
            Some(Value::Bool(b)) => Some(*b),
            _ => None,
        }
    }

    /// One `path = value` line per entry.
    pub fn to_structured(&self) -> String {
        let mut out = String::new();
        for (p, v) in &self.entries {
            let _ = writeln!(out, "{p} = {}", v.structured());
        }
        out
    }

    pub fn parse_structured(text: &str, name: &str) -> Result<Self> {
        let mut report = Report::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let parsed = line
                .split_once(" = ")
                .and_then(|(p, raw)| Value::parse(raw).map(|v| (p.to_string(), v)));
            let (p, v) = parsed.ok_or_else(|| Error::Integrity {
                file: name.to_string(),
                message: format!("line {} is not `path = value`", i + 1),
            })?;
            report.push(p, v);
        }
        Ok(report)
    }

    /// Human-readable form grouped under the first path component.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut section = "";
        for (p, v) in &self.entries {
            let (head, rest) = p.split_once('.').unwrap_or(("", p.as_str()));
            if head != section {
                section = head;
                let _ = writeln!(out, "\n[{head}]");
            }
            let _ = writeln!(out, "  {rest:<44} {}", v.human());
        }
        out.trim_start().to_string()
    }
}

/// Plot-ready table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",") + "\n";
        for r in &self.rows {
            out += &r.join(",");
            out.push('\n');
        }
        out
    }
}

/// Cell text for a float in a table.
pub fn cell(x: f64) -> String {
    format!("{x:e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structured_form_round_trips_exactly() {
        let mut r = Report::new();
        r.num("a.x", 0.1 + 0.2);
        r.num("a.tiny", -1.234e-300);
        r.int("a.count", 12);
        r.flag("b.ok", false);
        r.text("b.note", "say \"hi\" \\ bye");
        let text = r.to_structured();
        let back = Report::parse_structured(&text, "r.kv").unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_structured(), text);
        assert_eq!(back.number("a.x"), Some(0.1 + 0.2));
        assert_eq!(back.boolean("b.ok"), Some(false));
    }

    #[test]
    fn malformed_lines_are_integrity_errors() {
        assert!(matches!(
            Report::parse_structured("a = 1\ngarbage\n", "stages.kv"),
            Err(Error::Integrity { .. })
        ));
    }

    #[test]
    fn text_and_csv_forms() {
        let mut r = Report::new();
        r.num("run.value", 2.0);
        r.flag("check.passed", true);
        let t = r.to_text();
        assert!(t.starts_with("[run]"));
        assert!(t.contains("[check]"));
        let mut table = Table::new(&["k", "norm"]);
        table.row(vec!["16".into(), cell(0.5)]);
        assert_eq!(table.to_csv(), "k,norm\n16,5e-1\n");
    }
}
