//! Rendering of command results as text or JSON.

use std::fmt::Write as _;

use ndarray::Array2;
use serde_json::{Map, Value};
use wcoupling::io::{num_to_value, report_value};
use wcoupling::LawReport;

use crate::verbs;

/// `x` rounded to 12 significant digits, printed in Rust's shortest form
/// (`1.0`, `0.333333333333`, `inf`).
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("scientific notation parses");
    format!("{rounded:?}")
}

/// Violations printed per check in text mode; JSON has them all.
const SHOWN: usize = 10;

pub enum Item {
    Number(f64),
    Matrix { rows: Vec<String>, cols: Vec<String>, data: Array2<f64> },
    Text(String),
    Json(Value),
}

pub struct Output {
    verb: &'static str,
    items: Vec<(String, Item)>,
    checks: Vec<(&'static str, LawReport)>,
    /// Cross-checks outside the library's law checks that disagreed.
    mismatches: Vec<String>,
}

impl Output {
    pub fn new(verb: &'static str) -> Self {
        Self { verb, items: Vec::new(), checks: Vec::new(), mismatches: Vec::new() }
    }

    pub fn item(&mut self, name: &str, item: Item) {
        self.items.push((name.to_string(), item));
    }

    pub fn check(&mut self, name: &'static str, report: LawReport) {
        assert!(verbs::runs(self.verb, name), "{} does not run {name}", self.verb);
        match self.checks.iter_mut().find(|(n, _)| *n == name) {
            Some((_, r)) => r.merge(report),
            None => self.checks.push((name, report)),
        }
    }

    pub fn mismatch(&mut self, what: String) {
        self.mismatches.push(what);
    }

    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.checks.iter().all(|(_, r)| r.passed())
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        for (name, item) in &self.items {
            match item {
                Item::Number(x) => writeln!(s, "{name} {}", fmt_num(*x)).unwrap(),
                Item::Text(t) => writeln!(s, "{name} {t}").unwrap(),
                Item::Matrix { rows, cols, data } => {
                    writeln!(s, "{name}").unwrap();
                    writeln!(s, "  _ {}", cols.join(" ")).unwrap();
                    for (l, row) in rows.iter().zip(data.rows()) {
                        let cells: Vec<String> = row.iter().map(|&x| fmt_num(x)).collect();
                        writeln!(s, "  {l} {}", cells.join(" ")).unwrap();
                    }
                }
                Item::Json(v) => {
                    writeln!(s, "{name}").unwrap();
                    writeln!(s, "{}", serde_json::to_string_pretty(v).unwrap()).unwrap();
                }
            }
        }
        for (name, r) in &self.checks {
            if r.passed() {
                writeln!(s, "check {name}: passed").unwrap();
            } else {
                writeln!(s, "check {name}: {} violation(s)", r.violations().len()).unwrap();
                for v in r.violations().iter().take(SHOWN) {
                    writeln!(s, "  {} at {:?}: {} vs {}", v.law, v.witness, fmt_num(v.lhs), fmt_num(v.rhs)).unwrap();
                }
                if r.violations().len() > SHOWN {
                    writeln!(s, "  ... {} more", r.violations().len() - SHOWN).unwrap();
                }
            }
            let mut notes: Vec<(&str, usize)> = Vec::new();
            for n in r.notes() {
                match notes.iter_mut().find(|(m, _)| *m == n.as_str()) {
                    Some((_, c)) => *c += 1,
                    None => notes.push((n, 1)),
                }
            }
            for (n, c) in notes {
                if c > 1 {
                    writeln!(s, "  note ({c}x): {n}").unwrap();
                } else {
                    writeln!(s, "  note: {n}").unwrap();
                }
            }
        }
        for m in &self.mismatches {
            writeln!(s, "mismatch: {m}").unwrap();
        }
        writeln!(s, "result {}", if self.passed() { "passed" } else { "violations found" }).unwrap();
        s
    }

    pub fn json(&self) -> String {
        let mut results = Map::new();
        for (name, item) in &self.items {
            let v = match item {
                Item::Number(x) => num_to_value(*x),
                Item::Text(t) => Value::from(t.clone()),
                Item::Matrix { rows, cols, data } => {
                    let mut m = Map::new();
                    m.insert("rows".into(), Value::from(rows.clone()));
                    m.insert("cols".into(), Value::from(cols.clone()));
                    m.insert(
                        "data".into(),
                        Value::Array(data.rows().into_iter().map(|r| Value::Array(r.iter().map(|&x| num_to_value(x)).collect())).collect()),
                    );
                    Value::Object(m)
                }
                Item::Json(v) => v.clone(),
            };
            results.insert(name.clone(), v);
        }
        let checks: Map<String, Value> = self.checks.iter().map(|(n, r)| (n.to_string(), report_value(r))).collect();
        let mut obj = Map::new();
        obj.insert("verb".into(), Value::from(self.verb));
        obj.insert("results".into(), Value::Object(results));
        obj.insert("checks".into(), Value::Object(checks));
        obj.insert("mismatches".into(), Value::from(self.mismatches.clone()));
        obj.insert("passed".into(), Value::from(self.passed()));
        let mut s = serde_json::to_string_pretty(&Value::Object(obj)).unwrap();
        s.push('\n');
        s
    }
}
