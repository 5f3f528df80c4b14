//! Typed access to the `[parameters]` table that records every problem
//! instead of stopping at the first one.

use std::collections::BTreeSet;

use toml::{Table, Value};
use uqft::Vec3;

pub struct Reader<'a> {
    table: &'a Table,
    used: BTreeSet<&'a str>,
    errors: Vec<String>,
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

impl<'a> Reader<'a> {
    pub fn new(table: &'a Table) -> Self {
        Self {
            table,
            used: BTreeSet::new(),
            errors: Vec::new(),
        }
    }

    fn get(&mut self, key: &str) -> Option<&'a Value> {
        let (k, v) = self.table.get_key_value(key)?;
        self.used.insert(k.as_str());
        Some(v)
    }

    pub fn error(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }

    pub fn has(&self, key: &str) -> bool {
        self.table.contains_key(key)
    }

    pub fn opt_f64(&mut self, key: &str) -> Option<f64> {
        let v = self.get(key)?;
        match as_f64(v) {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.errors
                    .push(format!("parameters.{key}: expected a finite number"));
                None
            }
        }
    }

    pub fn f64(&mut self, key: &str) -> f64 {
        if !self.has(key) {
            self.errors.push(format!("parameters.{key}: required"));
            return f64::NAN;
        }
        self.opt_f64(key).unwrap_or(f64::NAN)
    }

    pub fn f64_or(&mut self, key: &str, default: f64) -> f64 {
        if self.has(key) {
            self.opt_f64(key).unwrap_or(f64::NAN)
        } else {
            default
        }
    }

    /// Required number satisfying `ok`, described by `what` on failure.
    pub fn f64_where(&mut self, key: &str, what: &str, ok: impl Fn(f64) -> bool) -> f64 {
        let v = self.f64(key);
        if v.is_finite() && !ok(v) {
            self.errors
                .push(format!("parameters.{key}: must be {what}, got {v}"));
        }
        v
    }

    pub fn usize_or(&mut self, key: &str, default: usize) -> usize {
        match self.get(key) {
            None => default,
            Some(Value::Integer(i)) if *i >= 0 => *i as usize,
            Some(_) => {
                self.errors
                    .push(format!("parameters.{key}: expected a non-negative integer"));
                default
            }
        }
    }

    pub fn str_or(&mut self, key: &str, default: &'a str) -> &'a str {
        match self.get(key) {
            None => default,
            Some(Value::String(s)) => s.as_str(),
            Some(_) => {
                self.errors
                    .push(format!("parameters.{key}: expected a string"));
                default
            }
        }
    }

    pub fn f64_list_or(&mut self, key: &str, default: &[f64]) -> Vec<f64> {
        match self.get(key) {
            None => default.to_vec(),
            Some(Value::Array(a)) => {
                let v: Option<Vec<f64>> = a.iter().map(as_f64).collect();
                v.unwrap_or_else(|| {
                    self.errors
                        .push(format!("parameters.{key}: expected a list of numbers"));
                    Vec::new()
                })
            }
            Some(_) => {
                self.errors
                    .push(format!("parameters.{key}: expected a list of numbers"));
                Vec::new()
            }
        }
    }

    fn to_vec3(v: &Value) -> Option<Vec3> {
        match v {
            Value::Array(a) if a.len() == 3 => {
                let c: Option<Vec<f64>> = a.iter().map(as_f64).collect();
                c.map(|c| Vec3::new(c[0], c[1], c[2]))
            }
            _ => None,
        }
    }

    pub fn vec3_or(&mut self, key: &str, default: Vec3) -> Vec3 {
        match self.get(key) {
            None => default,
            Some(v) => Self::to_vec3(v).unwrap_or_else(|| {
                self.errors
                    .push(format!("parameters.{key}: expected [x, y, z]"));
                default
            }),
        }
    }

    pub fn vec3_list(&mut self, key: &str) -> Vec<Vec3> {
        match self.get(key) {
            None => {
                self.errors.push(format!("parameters.{key}: required"));
                Vec::new()
            }
            Some(Value::Array(a)) => {
                let v: Option<Vec<Vec3>> = a.iter().map(Self::to_vec3).collect();
                v.unwrap_or_else(|| {
                    self.errors
                        .push(format!("parameters.{key}: expected a list of [x, y, z]"));
                    Vec::new()
                })
            }
            Some(_) => {
                self.errors
                    .push(format!("parameters.{key}: expected a list of [x, y, z]"));
                Vec::new()
            }
        }
    }

    /// Errors collected so far, plus one per parameter that was never read.
    pub fn finish(self) -> Result<(), Vec<String>> {
        let mut errors = self.errors;
        for key in self.table.keys() {
            if !self.used.contains(key.as_str()) {
                errors.push(format!("parameters.{key}: unknown parameter"));
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(s: &str) -> Table {
        s.parse().unwrap()
    }

    #[test]
    fn collects_all_errors() {
        let t = table("a = \"x\"\nb = [1, 2]\nextra = 1\n");
        let mut r = Reader::new(&t);
        r.f64("a");
        r.vec3_or("b", Vec3::zeros());
        r.f64("missing");
        let errors = r.finish().unwrap_err();
        assert_eq!(errors.len(), 4);
        assert!(errors.iter().any(|e| e.contains("extra")));
    }

    #[test]
    fn integers_read_as_numbers() {
        let t = table("n = 3\nv = [1, 2.5, -1]\n");
        let mut r = Reader::new(&t);
        assert_eq!(r.f64("n"), 3.0);
        assert_eq!(r.vec3_or("v", Vec3::zeros()), Vec3::new(1.0, 2.5, -1.0));
        assert!(r.finish().is_ok());
    }

    #[test]
    fn range_condition_is_reported() {
        let t = table("r = -1.0\n");
        let mut r = Reader::new(&t);
        r.f64_where("r", "positive", |v| v > 0.0);
        assert_eq!(r.finish().unwrap_err().len(), 1);
    }
}
