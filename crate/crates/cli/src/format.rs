//! Deterministic text output: `%.17g`-style numbers and CSV tables.

use std::fmt::Write as _;

/// Formats like C's `%.17g`: 17 significant digits, trailing zeros
/// removed, exponent form when the decimal exponent is `< -4` or `>= 17`.
/// Non-finite values print as `nan`, `inf`, `-inf`.
pub fn g17(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (16 - exp) as usize;
        trim_fraction(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Column-oriented table rendered as CSV (header row, `\n` line ends).
#[derive(Debug, Clone, Default)]
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let escaped: Vec<_> = row.iter().map(|c| escape(c)).collect();
            let _ = writeln!(out, "{}", escaped.join(","));
        }
        out
    }

    /// Array of objects keyed by column name; numeric cells become JSON
    /// numbers, `nan`/empty cells become `null`.
    pub fn to_json(&self) -> serde_json::Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let obj = self
                    .header
                    .iter()
                    .zip(row)
                    .map(|(h, c)| (h.to_string(), cell_json(c)))
                    .collect::<serde_json::Map<_, _>>();
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::Value::Array(rows)
    }
}

fn cell_json(cell: &str) -> serde_json::Value {
    if cell.is_empty() || cell == "nan" {
        return serde_json::Value::Null;
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => serde_json::json!(v),
        _ => match cell {
            "true" => serde_json::Value::Bool(true),
            "false" => serde_json::Value::Bool(false),
            other => serde_json::Value::String(other.to_string()),
        },
    }
}

fn escape(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g17() {
        // Reference strings from printf("%.17g").
        let cases = [
            (0.1, "0.10000000000000001"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (1e-5, "1.0000000000000001e-05"),
            (1.5e-4, "0.00014999999999999999"),
            (123456789.0, "123456789"),
            (1e17, "1e+17"),
            (12345678901234567.0, "12345678901234568"),
            (std::f64::consts::PI, "3.1415926535897931"),
            (2.0f64.powi(-1074), "4.9406564584124654e-324"),
            (0.0, "0"),
        ];
        for (v, expected) in cases {
            assert_eq!(g17(v), expected, "{v:e}");
        }
        assert_eq!(g17(f64::NAN), "nan");
        assert_eq!(g17(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn round_trips() {
        for v in [0.3, -1.0 / 3.0, 6.02214076e23, 1e-300, 0.5e-4] {
            assert_eq!(g17(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn csv_and_json_rendering() {
        let mut t = Table::new(vec!["a", "b", "note"]);
        t.push(vec![g17(1.0), g17(f64::NAN), "x, y".into()]);
        assert_eq!(t.to_csv(), "a,b,note\n1,nan,\"x, y\"\n");
        let j = t.to_json();
        assert_eq!(j[0]["a"], 1.0);
        assert!(j[0]["b"].is_null());
        assert_eq!(j[0]["note"], "x, y");
    }
}
