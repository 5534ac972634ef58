//! Structured pass/fail reports emitted by validators and evidence suites.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub check: String,
    pub sample: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub items: Vec<CheckItem>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>) -> Self {
        CheckReport {
            name: name.into(),
            items: Vec::new(),
        }
    }

    pub fn record(&mut self, check: impl Into<String>, sample: impl Into<String>, pass: bool) {
        self.items.push(CheckItem {
            check: check.into(),
            sample: sample.into(),
            pass,
            counterexample: None,
        });
    }

    pub fn record_counterexample(
        &mut self,
        check: impl Into<String>,
        sample: impl Into<String>,
        counterexample: impl Into<String>,
    ) {
        self.items.push(CheckItem {
            check: check.into(),
            sample: sample.into(),
            pass: false,
            counterexample: Some(counterexample.into()),
        });
    }

    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckItem> {
        self.items.iter().filter(|i| !i.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
