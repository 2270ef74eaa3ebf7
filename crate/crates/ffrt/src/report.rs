//! Serialized report: JSON for machines, an aligned table for people.

use std::fmt::Write as _;

use ffrt_core::summand_catalog::{Multiplicity, Params, SummandInstance};
use ffrt_core::verifier::{EntryStatus, VerificationReport, VerifiedEntry};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    pub params: ReportParams,
    pub consistent: bool,
    pub entries: Vec<Entry>,
    pub residual_degrees: Vec<u64>,
    pub runtime_ms: u64,
    /// First degree and weight that could not be explained.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<FailurePoint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    pub p: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_degree: Option<u64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub outside_hypotheses: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailurePoint {
    pub degree: u64,
    pub weight: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub kind: String,
    pub indices: Vec<u64>,
    pub frobenius_level: u32,
    pub twist: Option<i64>,
    pub multiplicity: Option<Count>,
    pub flag: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confirmed_at: Option<u64>,
}

/// An exact multiplicity, or a label when only its sign is known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Count {
    Exact(u64),
    Label(String),
}

impl Report {
    pub fn new(scenario: impl Into<String>, params: ReportParams) -> Report {
        Report {
            scenario: scenario.into(),
            params,
            consistent: true,
            entries: Vec::new(),
            residual_degrees: Vec::new(),
            runtime_ms: 0,
            failure: None,
            notes: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario: {}", self.scenario);
        let _ = writeln!(out, "params:   {}", self.params.describe());
        let _ = writeln!(out, "consistent: {}", self.consistent);
        if let Some(f) = self.failure {
            let _ = writeln!(out, "first failure: degree {}, weight {}", f.degree, f.weight);
        }
        if !self.residual_degrees.is_empty() {
            let list: Vec<String> = self.residual_degrees.iter().map(u64::to_string).collect();
            let _ = writeln!(out, "residual degrees: {}", list.join(", "));
        }
        for note in &self.notes {
            let _ = writeln!(out, "note: {note}");
        }
        let header = ["kind", "indices", "r", "twist", "multiplicity", "flag", "confirmed_at"];
        let rows: Vec<[String; 7]> = self
            .entries
            .iter()
            .map(|e| {
                [
                    e.kind.clone(),
                    e.indices.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
                    e.frobenius_level.to_string(),
                    e.twist.map_or("-".into(), |t| t.to_string()),
                    match &e.multiplicity {
                        Some(Count::Exact(m)) => m.to_string(),
                        Some(Count::Label(l)) => l.clone(),
                        None => "-".into(),
                    },
                    e.flag.clone(),
                    e.confirmed_at.map_or("-".into(), |d| d.to_string()),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: &[String]| -> String {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            padded.join("  ").trim_end().to_string()
        };
        if rows.is_empty() {
            out.push_str("(no entries)\n");
        } else {
            let _ = writeln!(out, "{}", line(&header.map(String::from)));
            for row in &rows {
                let _ = writeln!(out, "{}", line(row));
            }
        }
        let _ = writeln!(out, "runtime: {} ms", self.runtime_ms);
        out
    }
}

impl ReportParams {
    pub fn from_params(params: &Params, max_degree: Option<u64>) -> ReportParams {
        ReportParams {
            n: Some(params.n),
            p: params.p,
            r: Some(params.r),
            j: params.j,
            k: params.k,
            max_degree,
            outside_hypotheses: params.allow_small_p && params.p < params.n.saturating_sub(2).max(3),
            ..ReportParams::default()
        }
    }

    fn describe(&self) -> String {
        let mut parts = Vec::new();
        if let Some(n) = self.n {
            parts.push(format!("n={n}"));
        }
        parts.push(format!("p={}", self.p));
        if let Some(r) = self.r {
            parts.push(format!("r={r}"));
        }
        for (name, v) in [("j", self.j), ("k", self.k), ("a", self.a), ("b", self.b)] {
            if let Some(v) = v {
                parts.push(format!("{name}={v}"));
            }
        }
        if let Some(d) = self.max_degree {
            parts.push(format!("D={d}"));
        }
        if self.outside_hypotheses {
            parts.push("outside hypotheses".into());
        }
        parts.join(" ")
    }
}

impl From<&SummandInstance> for Entry {
    fn from(s: &SummandInstance) -> Entry {
        Entry {
            kind: s.kind.name().into(),
            indices: s.kind.indices(),
            frobenius_level: s.frobenius_level,
            twist: s.twist,
            multiplicity: Some(match s.multiplicity {
                Multiplicity::Exact(m) => Count::Exact(m),
                Multiplicity::UnknownPositive => Count::Label("unknown-positive".into()),
                Multiplicity::Possible => Count::Label("possible".into()),
            }),
            flag: s.multiplicity.flag().into(),
            confirmed_at: None,
        }
    }
}

impl From<&VerifiedEntry> for Entry {
    fn from(e: &VerifiedEntry) -> Entry {
        Entry {
            kind: e.kind.clone(),
            indices: e.indices.clone(),
            frobenius_level: e.frobenius_level,
            twist: e.twist,
            multiplicity: e.multiplicity.map(Count::Exact),
            flag: e.status.flag().into(),
            confirmed_at: match e.status {
                EntryStatus::Confirmed { at } => Some(at),
                _ => None,
            },
        }
    }
}

impl From<&VerificationReport> for Report {
    fn from(v: &VerificationReport) -> Report {
        let graded = v.scenario != ffrt_core::verifier::Scenario::B1Predictor;
        let mut entries: Vec<Entry> = v.entries.iter().map(Entry::from).collect();
        if !graded {
            entries.iter_mut().for_each(|e| e.confirmed_at = None);
        }
        Report {
            scenario: v.scenario.name().into(),
            params: ReportParams::from_params(&v.params, graded.then_some(v.max_degree)),
            consistent: v.consistent,
            entries,
            residual_degrees: v.residual_degrees.clone(),
            runtime_ms: 0,
            failure: v.failure.map(|f| FailurePoint { degree: f.degree, weight: f.weight }),
            notes: Vec::new(),
        }
    }
}
