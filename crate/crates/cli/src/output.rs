//! Tabular output: CSV with a fixed header, or a JSON array of records with
//! the same keys. Missing values are empty CSV fields and JSON `null`.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde_json::{Map, Number};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i128),
    Float(f64),
    Str(String),
    Bool(bool),
    Null,
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i128)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i128)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Str(v)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Null, Into::into)
    }
}

/// `printf("%.17g", x)`.
pub fn format_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        strip_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip_zeros(mantissa.to_string()), exp.abs())
    }
}

fn strip_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

impl Value {
    fn csv_field(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Float(v) => format_g17(*v),
            Value::Str(s) => s.clone(),
            Value::Bool(b) => b.to_string(),
            Value::Null => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Value::Int(v) => match i64::try_from(*v) {
                Ok(i) => serde_json::Value::Number(i.into()),
                Err(_) => serde_json::Value::String(v.to_string()),
            },
            Value::Float(v) => Number::from_f64(*v).map_or(serde_json::Value::Null, serde_json::Value::Number),
            Value::Str(s) => serde_json::Value::String(s.clone()),
            Value::Bool(b) => serde_json::Value::Bool(*b),
            Value::Null => serde_json::Value::Null,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Table { headers: headers.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.headers.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| *h == name)
    }

    /// Value in `row` under header `name`.
    pub fn get(&self, row: usize, name: &str) -> Option<&Value> {
        self.column(name).map(|c| &self.rows[row][c])
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Value::csv_field))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        let records: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let map: Map<String, serde_json::Value> =
                    self.headers.iter().zip(row).map(|(h, v)| (h.to_string(), v.json())).collect();
                serde_json::Value::Object(map)
            })
            .collect();
        serde_json::to_writer_pretty(&mut out, &records)?;
        writeln!(out)?;
        Ok(())
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        match format {
            Format::Csv => self.write_csv(&mut buf)?,
            Format::Json => self.write_json(&mut buf)?,
        }
        Ok(buf)
    }

    /// Writes to `path`, or stdout when `None`.
    pub fn emit(&self, format: Format, path: Option<&Path>) -> Result<()> {
        let bytes = self.render(format)?;
        match path {
            Some(p) => File::create(p)
                .and_then(|mut f| f.write_all(&bytes))
                .with_context(|| format!("writing {}", p.display())),
            None => io::stdout().lock().write_all(&bytes).context("writing stdout"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_matches_printf() {
        // Expected strings from C printf("%.17g").
        assert_eq!(format_g17(1.5), "1.5");
        assert_eq!(format_g17(0.1), "0.10000000000000001");
        assert_eq!(format_g17(7978.845667869995), "7978.8456678699949");
        assert_eq!(format_g17(1e-7), "9.9999999999999995e-08");
        assert_eq!(format_g17(1e20), "1e+20");
        assert_eq!(format_g17(123456789.0), "123456789");
        assert_eq!(format_g17(-2.0), "-2");
        assert_eq!(format_g17(0.0), "0");
        assert_eq!(format_g17(1e16), "10000000000000000");
        assert_eq!(format_g17(1e17), "1e+17");
        assert_eq!(format_g17(0.0001), "0.0001");
        assert_eq!(format_g17(0.00001), "1.0000000000000001e-05");
    }

    #[test]
    fn csv_and_json() {
        let mut t = Table::new(&["a", "b", "c"]);
        t.push(vec![Value::from(3u64), Value::from(0.375), Value::Null]);
        t.push(vec![Value::from("x,y"), Value::from(true), Value::from(Some(2.0))]);
        assert_eq!(String::from_utf8(t.render(Format::Csv).unwrap()).unwrap(), "a,b,c\n3,0.375,\n\"x,y\",true,2\n");
        let j: serde_json::Value = serde_json::from_slice(&t.render(Format::Json).unwrap()).unwrap();
        assert_eq!(j[0]["c"], serde_json::Value::Null);
        assert_eq!(j[0]["b"], 0.375);
        assert_eq!(j[1]["a"], "x,y");
    }
}
