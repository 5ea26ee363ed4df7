//! Line-oriented `key: value` reports with a versioned header line.

use std::fmt::Display;
use std::io::{self, Write};

pub const REPORT_HEADER: &str = "envcv-report v1";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    fields: Vec<(String, String)>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        let mut r = Report::default();
        r.text("command", command);
        r
    }

    pub fn text(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    /// Numeric field; non-finite values are written as `nan`/`inf` and
    /// flagged by [`Report::is_finite`].
    pub fn num(&mut self, key: &str, value: f64) -> &mut Self {
        self.text(key, value)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn fields(&self) -> &[(String, String)] {
        &self.fields
    }

    pub fn is_finite(&self) -> bool {
        !self
            .fields
            .iter()
            .any(|(_, v)| matches!(v.as_str(), "NaN" | "inf" | "-inf"))
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{REPORT_HEADER}")?;
        for (k, v) in &self.fields {
            writeln!(out, "{k}: {v}")?;
        }
        out.flush()
    }

    pub fn render(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("utf-8 report")
    }

    /// Parses the output of [`Report::render`].
    pub fn parse(text: &str) -> Option<Report> {
        let mut lines = text.lines();
        if lines.next()? != REPORT_HEADER {
            return None;
        }
        let mut r = Report::default();
        for line in lines {
            let (k, v) = line.split_once(": ")?;
            r.fields.push((k.to_string(), v.to_string()));
        }
        Some(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_and_parse() {
        let mut r = Report::new("analyze");
        r.num("stats.cve", 0.52).text("label", "GaussianConsistent");
        let text = r.render();
        assert!(text.starts_with("envcv-report v1\ncommand: analyze\n"));
        assert_eq!(Report::parse(&text).unwrap(), r);
        assert!(r.is_finite());
        r.num("bad", f64::NAN);
        assert!(!r.is_finite());
    }
}
