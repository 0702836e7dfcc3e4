//! Number formatting and the two output encodings.
//!
//! Human-readable (delimited) output uses 6 significant digits; structured
//! (JSON) output rounds every float to 15 significant digits so that reports
//! round-trip and stay byte-stable across platforms.

use serde::Serialize;
use serde_json::Value;

use crate::Params;

/// `%g`-style formatting with 6 significant digits.
pub fn fmt6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.5e}");
    let (mant, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        format!("{}e{}", trim_zeros(mant), exp)
    } else {
        trim_zeros(&format!("{:.*}", (5 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rounds to 15 significant digits.
pub fn round15(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.14e}").parse().expect("round trip")
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().and_then(|x| serde_json::Number::from_f64(round15(x))) {
                *n = r;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(o) => o.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to 15 significant digits.
pub fn structured<T: Serialize>(report: &T) -> String {
    let mut v = serde_json::to_value(report).expect("reports serialise");
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("value serialises");
    s.push('\n');
    s
}

/// `# theta=<v> z2=<v> R=<v>`.
pub fn header(params: &Params) -> String {
    format!("# theta={} z2={} R={}\n", fmt6(params.theta), fmt6(params.z2), fmt6(params.r))
}

/// Delimited table: header line, optional comment lines, a column row and
/// data rows, then trailing `# key=value` summary lines.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub comments: Vec<String>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub summary: Vec<(String, String)>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), ..Self::default() }
    }

    pub fn comment(&mut self, c: impl Into<String>) {
        self.comments.push(c.into());
    }

    pub fn row(&mut self, r: Vec<String>) {
        debug_assert_eq!(r.len(), self.columns.len());
        self.rows.push(r);
    }

    pub fn summary(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.summary.push((key.into(), value.into()));
    }

    pub fn render(&self, params: &Params) -> String {
        let mut out = header(params);
        for c in &self.comments {
            out.push_str(&format!("# {c}\n"));
        }
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        let body = w.into_inner().expect("in-memory flush");
        out.push_str(std::str::from_utf8(&body).expect("utf8 fields"));
        for (k, v) in &self.summary {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_digits() {
        assert_eq!(fmt6(-2.0 * std::f64::consts::PI), "-6.28319");
        assert_eq!(fmt6(1.0), "1");
        assert_eq!(fmt6(0.75), "0.75");
        assert_eq!(fmt6(123456.7), "123457");
        assert_eq!(fmt6(1234567.0), "1.23457e6");
        assert_eq!(fmt6(1.5e-12), "1.5e-12");
        assert_eq!(fmt6(0.0001), "0.0001");
        assert_eq!(fmt6(9.999996), "10");
        assert_eq!(fmt6(-0.0), "0");
    }

    #[test]
    fn fifteen_digits() {
        assert_eq!(round15(1.0 / 7.0), 0.142857142857143);
        assert_eq!(round15(0.1 + 0.2), 0.3);
        let s = structured(&serde_json::json!({"a": [0.1 + 0.2, 1], "b": "x"}));
        assert!(s.contains("0.3") && !s.contains("0.30000000000000004"));
    }

    #[test]
    fn table_layout() {
        let p = Params::new(std::f64::consts::FRAC_PI_3, 1.0, 1.0).unwrap();
        let mut t = Table::new(&["a", "b"]);
        t.comment("units: none");
        t.row(vec!["1".into(), "x".into()]);
        t.summary("passed", "true");
        assert_eq!(t.render(&p), "# theta=1.0472 z2=1 R=1\n# units: none\na,b\n1,x\n# passed=true\n");
    }
}
