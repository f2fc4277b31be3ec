//! Structured pass/fail reports with exact values, printable as text or JSON.

use std::fmt;

use serde::Serialize;

pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
        }
    }

    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        })
    }
}

/// One checked sub-claim. Values are exact rationals rendered as `p/q`.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub claim: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<(String, String)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn new(claim: impl Into<String>, passed: bool) -> Self {
        Check {
            claim: claim.into(),
            status: Status::from_bool(passed),
            values: Vec::new(),
            note: None,
        }
    }

    pub fn inconclusive(claim: impl Into<String>, why: impl Into<String>) -> Self {
        Check {
            claim: claim.into(),
            status: Status::Inconclusive,
            values: Vec::new(),
            note: Some(why.into()),
        }
    }

    pub fn value(mut self, name: impl Into<String>, v: impl fmt::Display) -> Self {
        self.values.push((name.into(), v.to_string()));
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub report_version: u32,
    pub subject: String,
    pub status: Status,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(subject: impl Into<String>) -> Self {
        Report {
            report_version: REPORT_VERSION,
            subject: subject.into(),
            status: Status::Pass,
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.status = match (self.status, check.status) {
            (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
            (Status::Inconclusive, _) | (_, Status::Inconclusive) => Status::Inconclusive,
            _ => Status::Pass,
        };
        self.checks.push(check);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// Folds another report in as a block of checks prefixed by its subject.
    pub fn absorb(&mut self, other: Report) {
        for mut c in other.checks {
            c.claim = format!("{}: {}", other.subject, c.claim);
            self.push(c);
        }
        self.notes.extend(other.notes);
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {}", self.subject, self.status)?;
        for c in &self.checks {
            write!(f, "  [{}] {}", c.status, c.claim)?;
            if !c.values.is_empty() {
                let vals: Vec<String> = c.values.iter().map(|(k, v)| format!("{k}={v}")).collect();
                write!(f, " ({})", vals.join(", "))?;
            }
            if let Some(n) = &c.note {
                write!(f, " -- {n}")?;
            }
            writeln!(f)?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_folds() {
        let mut r = Report::new("x");
        r.push(Check::new("a", true));
        assert!(r.passed());
        r.push(Check::inconclusive("b", "wide"));
        assert_eq!(r.status, Status::Inconclusive);
        r.push(Check::new("c", false).value("gain", "1/2"));
        assert_eq!(r.status, Status::Fail);
        let json = r.to_json();
        assert!(json.contains("\"report_version\": 1"));
        assert!(json.contains("1/2"));
    }
}
