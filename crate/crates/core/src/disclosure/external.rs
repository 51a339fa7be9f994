//! Adapter for a classifier running as a separate process.
//!
//! The command receives one JSON object per line on stdin, for example
//! `{"task":"detect","text":"..."}`, and must print exactly one label per
//! input line, in order. Tasks and accepted labels:
//!
//! - `detect`: `disclosure` / `non_disclosure`
//! - `compensation`: `clear` / `ambiguous` / `none`
//! - `relationship` (input also carries `description`): `explicit` /
//!   `grouped` / `mixed_group`
//!
//! Each batch is one process invocation.

use std::io::{BufRead, BufReader, Write};
use std::process::{Command, Stdio};

use serde_json::json;

use super::{ClassifierError, DisclosureClassifier, RelationshipLabel, SegmentContext};
use crate::compliance::{Compensation, Relationship};

#[derive(Debug, Clone)]
pub struct ExternalClassifier {
    program: String,
    args: Vec<String>,
    id: String,
}

impl ExternalClassifier {
    /// Whitespace-separated command line (no shell quoting).
    pub fn from_command(command: &str) -> Result<ExternalClassifier, ClassifierError> {
        let mut parts = command.split_whitespace().map(str::to_string);
        let program = parts.next().ok_or_else(|| ClassifierError::Unavailable {
            command: command.to_string(),
            message: "empty command".into(),
        })?;
        Ok(ExternalClassifier {
            program,
            args: parts.collect(),
            id: format!("external:{command}"),
        })
    }

    fn run(&self, inputs: Vec<serde_json::Value>) -> Result<Vec<String>, ClassifierError> {
        if inputs.is_empty() {
            return Ok(Vec::new());
        }
        let unavailable = |message: String| ClassifierError::Unavailable {
            command: self.id.clone(),
            message,
        };
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| unavailable(e.to_string()))?;
        let mut stdin = child.stdin.take().expect("piped stdin");
        let n = inputs.len();
        let writer = std::thread::spawn(move || -> std::io::Result<()> {
            for v in inputs {
                writeln!(stdin, "{v}")?;
            }
            Ok(())
        });
        let stdout = child.stdout.take().expect("piped stdout");
        let labels: Vec<String> = BufReader::new(stdout)
            .lines()
            .map(|l| l.map(|s| s.trim().to_string()))
            .collect::<Result<_, _>>()
            .map_err(|e| unavailable(e.to_string()))?;
        let status = child.wait().map_err(|e| unavailable(e.to_string()))?;
        // a closed pipe is fine if the child already answered everything
        let _ = writer.join();
        if !status.success() {
            return Err(unavailable(format!("exited with {status}")));
        }
        if labels.len() != n {
            return Err(ClassifierError::Protocol(format!(
                "sent {n} records, received {} labels",
                labels.len()
            )));
        }
        Ok(labels)
    }
}

fn bad(task: &str, label: &str) -> ClassifierError {
    ClassifierError::BadLabel {
        task: task.to_string(),
        label: label.to_string(),
    }
}

impl DisclosureClassifier for ExternalClassifier {
    fn id(&self) -> &str {
        &self.id
    }

    fn detect(&self, sentences: &[&str]) -> Result<Vec<bool>, ClassifierError> {
        let inputs = sentences
            .iter()
            .map(|s| json!({"task": "detect", "text": s}))
            .collect();
        self.run(inputs)?
            .iter()
            .map(|l| match l.to_ascii_lowercase().as_str() {
                "disclosure" | "1" | "true" => Ok(true),
                "non_disclosure" | "non-disclosure" | "0" | "false" => Ok(false),
                _ => Err(bad("detect", l)),
            })
            .collect()
    }

    fn compensation(&self, segments: &[&str]) -> Result<Vec<Compensation>, ClassifierError> {
        let inputs = segments
            .iter()
            .map(|s| json!({"task": "compensation", "text": s}))
            .collect();
        self.run(inputs)?
            .iter()
            .map(|l| match l.to_ascii_lowercase().as_str() {
                "clear" => Ok(Compensation::Clear),
                "ambiguous" => Ok(Compensation::Ambiguous),
                "none" => Ok(Compensation::Absent),
                _ => Err(bad("compensation", l)),
            })
            .collect()
    }

    fn relationship(
        &self,
        segments: &[SegmentContext<'_>],
    ) -> Result<Vec<RelationshipLabel>, ClassifierError> {
        let inputs = segments
            .iter()
            .map(|c| json!({"task": "relationship", "text": c.text, "description": c.description}))
            .collect();
        let labels = self.run(inputs)?;
        labels
            .iter()
            .zip(segments)
            .map(|(l, c)| {
                let relationship = match l.to_ascii_lowercase().as_str() {
                    "explicit" => Relationship::Explicit,
                    "grouped" => Relationship::Grouped,
                    "mixed_group" | "mixed" | "mixedgroup" => Relationship::MixedGroup,
                    _ => return Err(bad("relationship", l)),
                };
                Ok(RelationshipLabel {
                    relationship,
                    vacuous: c.links.is_empty(),
                })
            })
            .collect()
    }
}
