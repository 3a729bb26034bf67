//! Reports shared by the text and JSON renderers. Every number is stored
//! already rendered, so both outputs carry the same values.

use std::fmt::{self, Display, Formatter};

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Report {
    Check(CheckReport),
    Evidence(EvidenceReport),
    Audit(AuditSummary),
    Dy(DyReport),
}

impl Report {
    /// Exit status the report calls for.
    pub fn exit_code(&self) -> u8 {
        match self {
            Report::Check(r) => u8::from(!r.holds),
            Report::Evidence(_) => 0,
            Report::Audit(r) => u8::from(!r.passed),
            Report::Dy(r) => match &r.guess {
                Some(g) if g.refused.is_some() => 2,
                Some(g) => u8::from(!g.verdict),
                None => u8::from(!r.derivable),
            },
        }
    }
}

impl Display for Report {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Report::Check(r) => r.fmt(f),
            Report::Evidence(r) => r.fmt(f),
            Report::Audit(r) => r.fmt(f),
            Report::Dy(r) => r.fmt(f),
        }
    }
}

fn truth(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointTruth {
    pub state: String,
    pub point: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub query: String,
    /// `validity`, `state` or `point`.
    pub scope: String,
    pub holds: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<PointTruth>,
    /// Probability of the query at the chosen state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<PointTruth>,
}

impl Display for CheckReport {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self.scope.as_str() {
            "validity" => {
                writeln!(f, "{}: {}", self.query, if self.holds { "valid" } else { "not valid" })?;
                if let Some(c) = &self.counterexample {
                    writeln!(f, "  counterexample: state {}, point {}", c.state, c.point)?;
                }
            }
            _ => {
                for p in &self.points {
                    writeln!(f, "{} at {}, {}: {}", self.query, p.state, p.point, truth(p.holds))?;
                }
                if let Some(p) = &self.probability {
                    writeln!(f, "  probability: {p}")?;
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measure {
    pub state: String,
    pub yes: String,
    pub no: String,
    pub unknown: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub hypothesis: String,
    pub set: Vec<String>,
    pub lower: String,
    pub upper: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub observation: String,
    pub possible: bool,
    pub weights: Vec<Weights>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelEvidence {
    pub label: String,
    /// Answer distributions of the states where the query holds, then of
    /// those where it fails. Duplicates are listed once per state.
    pub measures: Vec<(String, Vec<Measure>)>,
    pub observations: Vec<Observation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvidenceReport {
    pub query: String,
    pub agent: String,
    pub labels: Vec<LabelEvidence>,
}

impl Display for EvidenceReport {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        writeln!(f, "evidence for {} (agent {})", self.query, self.agent)?;
        for l in &self.labels {
            writeln!(f, "local state {}", l.label)?;
            for (h, ms) in &l.measures {
                writeln!(f, "  measures for {h}:")?;
                if ms.is_empty() {
                    writeln!(f, "    (none)")?;
                }
                for m in ms {
                    writeln!(f, "    {:<12} Yes {}  No {}  ? {}", m.state, m.yes, m.no, m.unknown)?;
                }
            }
            writeln!(f, "  {:<4} {:<16} {:<24} {:<8} upper", "obs", "hypothesis", "weights", "lower")?;
            for o in &l.observations {
                if !o.possible {
                    writeln!(f, "  {:<4} impossible", o.observation)?;
                    continue;
                }
                for w in &o.weights {
                    let set = format!("{{{}}}", w.set.join(", "));
                    writeln!(f, "  {:<4} {:<16} {:<24} {:<8} {}", o.observation, w.hypothesis, set, w.lower, w.upper)?;
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidityRow {
    pub formula: String,
    pub valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<PointTruth>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualRow {
    pub predicted: (String, String),
    pub direct: (String, String),
    pub agrees: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClauseRow {
    pub name: String,
    pub guard: String,
    pub conclusion: Vec<String>,
    /// `pass`, `fail` or `skipped`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub triggered: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub query: String,
    pub agent: String,
    pub tight: (String, String),
    pub audited: (String, String),
    pub complete: bool,
    pub negation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual: Option<DualRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negation_lemma: Option<ValidityRow>,
    pub full_evidence: ValidityRow,
    pub clauses: Vec<ClauseRow>,
    pub passed: bool,
}

fn validity_line(f: &mut Formatter<'_>, v: &ValidityRow) -> fmt::Result {
    write!(f, "{}: {}", v.formula, if v.valid { "valid" } else { "not valid" })?;
    if let Some(c) = &v.counterexample {
        write!(f, " (counterexample: state {}, point {})", c.state, c.point)?;
    }
    writeln!(f)
}

impl Display for AuditSummary {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        writeln!(f, "audit of agent {} on {}", self.agent, self.query)?;
        writeln!(f, "  tight pair: ({}, {})-reliable", self.tight.0, self.tight.1)?;
        if self.audited != self.tight {
            writeln!(f, "  audited pair: ({}, {})", self.audited.0, self.audited.1)?;
        }
        writeln!(f, "  complete: {}", if self.complete { "yes" } else { "no" })?;
        writeln!(f, "  respects negation: {}", self.negation)?;
        if let Some(d) = &self.dual {
            writeln!(
                f,
                "  negation pair: predicted ({}, {}), direct ({}, {}): {}",
                d.predicted.0,
                d.predicted.1,
                d.direct.0,
                d.direct.1,
                if d.agrees { "agree" } else { "DISAGREE" }
            )?;
        }
        if let Some(l) = &self.negation_lemma {
            write!(f, "  ")?;
            validity_line(f, l)?;
        }
        write!(f, "  ")?;
        validity_line(f, &self.full_evidence)?;
        for c in &self.clauses {
            match c.status.as_str() {
                "skipped" => writeln!(f, "  [{}] skipped: {}", c.name, c.reason.as_deref().unwrap_or(""))?,
                status => {
                    writeln!(
                        f,
                        "  [{}] {}: {} => {} ({} guarded points)",
                        c.name,
                        status,
                        c.guard,
                        c.conclusion.join(" & "),
                        c.triggered
                    )?;
                    if let Some(w) = &c.witness {
                        writeln!(f, "       witness: {w}")?;
                    }
                }
            }
        }
        writeln!(f, "  result: {}", if self.passed { "pass" } else { "FAIL" })
    }
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuessReport {
    pub guesses: usize,
    pub keyspace: usize,
    pub keys_used: usize,
    pub tuples: usize,
    pub successes: usize,
    pub mass: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refused: Option<String>,
    /// Whether the reported outcome agrees with the bound.
    pub verdict: bool,
    pub note: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub successful_tuples: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyReport {
    pub message: String,
    pub received: Vec<String>,
    pub initkeys: Vec<String>,
    pub derivable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guess: Option<GuessReport>,
}

impl Display for DyReport {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        writeln!(f, "received: {{{}}}", self.received.join(", "))?;
        writeln!(f, "initial keys: {{{}}}", self.initkeys.join(", "))?;
        writeln!(f, "{}: {}", self.message, if self.derivable { "derivable" } else { "not derivable" })?;
        if let Some(g) = &self.guess {
            writeln!(
                f,
                "guessing {} of {} keys, {} used: {} of {} tuples succeed, mass {}",
                g.guesses, g.keyspace, g.keys_used, g.successes, g.tuples, g.mass
            )?;
            if let Some(b) = &g.bound {
                writeln!(f, "  bound 1 - exp(-2rK/|K|) = {b}")?;
            }
            if let Some(r) = &g.refused {
                writeln!(f, "  bound refused: {r}")?;
            }
            writeln!(f, "  {}", g.note)?;
            for t in &g.successful_tuples {
                writeln!(f, "  hit: {t}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let r = Report::Dy(DyReport {
            message: "m".into(),
            received: vec!["{m}_k".into()],
            initkeys: vec![],
            derivable: false,
            guess: Some(GuessReport {
                guesses: 1,
                keyspace: 4,
                keys_used: 1,
                tuples: 4,
                successes: 1,
                mass: "1/4".into(),
                bound: Some("0.39347".into()),
                refused: None,
                verdict: true,
                note: String::new(),
                successful_tuples: vec!["(k)".into()],
            }),
        });
        let back: Report = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
        assert_eq!(r.exit_code(), 0);
    }
}
