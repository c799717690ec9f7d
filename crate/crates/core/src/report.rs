//! Named check records with text and JSON rendering.

use std::fmt::Write as _;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    pub max_residual: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub seed: u64,
    pub notes: String,
}

/// Check records, kept sorted by name when rendered.
#[derive(Clone, Debug, Default)]
pub struct CheckReport {
    pub records: Vec<CheckRecord>,
}

impl CheckReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record a residual; the check passes iff `residual ≤ tolerance`.
    pub fn check(
        &mut self,
        name: impl Into<String>,
        residual: f64,
        tolerance: f64,
        samples: usize,
        seed: u64,
        notes: impl Into<String>,
    ) -> bool {
        let status = if residual <= tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
        self.records.push(CheckRecord {
            name: name.into(),
            status,
            max_residual: residual,
            tolerance,
            samples,
            seed,
            notes: notes.into(),
        });
        status == Status::Pass
    }

    /// A lower-bound check `observed ≥ threshold`, stored as the residual
    /// `threshold / observed` against tolerance 1.
    pub fn at_least(
        &mut self,
        name: impl Into<String>,
        observed: f64,
        threshold: f64,
        samples: usize,
        seed: u64,
        notes: impl Into<String>,
    ) -> bool {
        let residual = if observed > 0.0 {
            threshold / observed
        } else {
            f64::INFINITY
        };
        self.check(name, residual, 1.0, samples, seed, notes)
    }

    pub fn error(&mut self, name: impl Into<String>, seed: u64, message: impl Into<String>) {
        self.records.push(CheckRecord {
            name: name.into(),
            status: Status::Error,
            max_residual: f64::NAN,
            tolerance: f64::NAN,
            samples: 0,
            seed,
            notes: message.into(),
        });
    }

    pub fn extend(&mut self, other: CheckReport) {
        self.records.extend(other.records);
    }

    pub fn all_passed(&self) -> bool {
        self.records.iter().all(|r| r.status == Status::Pass)
    }

    pub fn get(&self, name: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn sorted(&self) -> Vec<&CheckRecord> {
        let mut v: Vec<&CheckRecord> = self.records.iter().collect();
        v.sort_by(|a, b| a.name.cmp(&b.name));
        v
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.sorted()).expect("records serialize")
    }

    pub fn to_table(&self) -> String {
        let rows = self.sorted();
        let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:<6}  {:>12}  {:>9}  {:>7}  {:>6}  notes",
            "name", "status", "max_residual", "tolerance", "samples", "seed"
        );
        for r in rows {
            let _ = writeln!(
                out,
                "{:<width$}  {:<6}  {:>12.3e}  {:>9.1e}  {:>7}  {:>6}  {}",
                r.name,
                r.status.as_str(),
                r.max_residual,
                r.tolerance,
                r.samples,
                format!("{:#x}", r.seed),
                r.notes
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_follows_tolerance() {
        let mut r = CheckReport::new();
        assert!(r.check("b", 1e-12, 1e-9, 50, 7, ""));
        assert!(!r.check("a", 1e-3, 1e-9, 50, 7, "too big"));
        assert!(!r.check("c", f64::NAN, 1e-9, 50, 7, ""));
        assert!(r.at_least("d", 2.0, 1.0, 1, 7, ""));
        assert!(!r.at_least("e", 0.0, 1.0, 1, 7, ""));
        assert!(!r.all_passed());
        let names: Vec<_> = r.sorted().iter().map(|x| x.name.clone()).collect();
        assert_eq!(names, ["a", "b", "c", "d", "e"]);
    }

    #[test]
    fn json_keys() {
        let mut r = CheckReport::new();
        r.check("x", 0.0, 1.0, 3, 1, "n");
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        let obj = v[0].as_object().unwrap();
        let mut keys: Vec<_> = obj.keys().cloned().collect();
        keys.sort();
        assert_eq!(
            keys,
            [
                "max_residual",
                "name",
                "notes",
                "samples",
                "seed",
                "status",
                "tolerance"
            ]
        );
        assert_eq!(obj["status"], "pass");
    }

    proptest::proptest! {
        #[test]
        fn pass_iff_within_tolerance(r in proptest::num::f64::ANY, t in 0.0..1.0f64) {
            let mut rep = CheckReport::new();
            let passed = rep.check("c", r, t, 1, 0, "");
            proptest::prop_assert_eq!(passed, r <= t);
            proptest::prop_assert_eq!(rep.records[0].status == Status::Pass, r <= t);
        }
    }
}
