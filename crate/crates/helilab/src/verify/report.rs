//! Plain-text verification summary: one PASS/FAIL line per check, keyed
//! by a stable check identifier consumed by downstream tooling.

use std::fmt::Write as _;

#[derive(Debug, Clone)]
pub struct CheckLine {
    pub key: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct Summary {
    pub lines: Vec<CheckLine>,
}

impl Summary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: &str, pass: bool, detail: impl Into<String>) {
        self.lines.push(CheckLine { key: key.to_string(), pass, detail: detail.into() });
    }

    pub fn all_pass(&self) -> bool {
        self.lines.iter().all(|l| l.pass)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            let _ = writeln!(
                out,
                "{} {} {}",
                if l.pass { "PASS" } else { "FAIL" },
                l.key,
                l.detail
            );
        }
        let failed = self.lines.iter().filter(|l| !l.pass).count();
        let _ = writeln!(out, "# {} checks, {} failed", self.lines.len(), failed);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_formats_pass_and_fail_lines() {
        let mut s = Summary::new();
        s.add("Thm4.8-slab16", true, "max=12 (bound 16)");
        s.add("Cor4.3-zbound", false, "max|z|=7.1 (bound 6.38)");
        assert!(!s.all_pass());
        let text = s.to_text();
        assert!(text.contains("PASS Thm4.8-slab16 max=12 (bound 16)"));
        assert!(text.contains("FAIL Cor4.3-zbound"));
        assert!(text.ends_with("# 2 checks, 1 failed\n"));
    }
}
